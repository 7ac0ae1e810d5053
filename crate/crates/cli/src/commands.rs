//! Subcommand bodies. Each returns whether its configured targets were met.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dyadlab::generators::GENERATORS;
use dyadlab::norms::{bmo2_dyadic, bmo_dyadic, bmo_nondyadic_lower, bmo_r, cmo_distance, default_widths};
use dyadlab::probes::continuity::sample_points;
use dyadlab::probes::fkrt::Condition;
use dyadlab::probes::{
    commutator_compactness_probe, continuity_probe, fkrt_probe, noncompact_shift_probe, noncompact_t_probe,
    opnorm_lower_bound, oscillating_symbol_probe, pi_compactness_probe, run_suite, shift_commutator_probe,
    weighted_ratio_probe, FkrtThresholds,
};
use dyadlab::report::{canonical_string, format_float, to_canonical_json};
use dyadlab::weights::{ap_constant, WeightVector};
use dyadlab::{AlphaVector, Exponents, Operator, TruncatedLattice};
use serde::Serialize;
use serde_json::Value;

use crate::config::{build_inputs, ExperimentConfig, ProbeConfig, PROBE_NAMES};

/// Where artifacts go: `<dir>/<prefix>.json` and `<dir>/<prefix>.csv`.
pub struct Sink {
    dir: PathBuf,
    prefix: String,
}

impl Sink {
    pub fn new(cfg: &ExperimentConfig, out: Option<&Path>, default_prefix: &str) -> Self {
        let dir = out
            .map(Path::to_path_buf)
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let prefix = cfg.output.prefix.clone().unwrap_or_else(|| default_prefix.to_string());
        Sink { dir, prefix }
    }

    fn write(&self, json: &str, csv: &str) -> Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        for (ext, body) in [("json", json), ("csv", csv)] {
            let path = self.dir.join(format!("{}.{ext}", self.prefix));
            std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn operator(cfg: &ExperimentConfig, lat: &TruncatedLattice) -> Result<Operator> {
    cfg.operator
        .as_ref()
        .ok_or_else(|| anyhow!("this command needs an `operator`"))?
        .build(lat)
}

pub fn apply(cfg: &ExperimentConfig, sink: &Sink) -> Result<bool> {
    let lat = cfg.lattice.build()?;
    let op = operator(cfg, &lat)?;
    let fs = build_inputs(&cfg.inputs, &lat)?;
    let out = op.apply(&fs, &lat)?.canonical();
    for &p in &cfg.p_list {
        println!("L^{p} norm of the output: {}", format_float(out.lp_norm(p)?));
    }
    sink.write(&to_canonical_json(&out)?, &out.to_csv("value [output]"))?;
    Ok(true)
}

fn single_exps(p: f64) -> Result<Exponents> {
    Ok(Exponents::new(vec![p])?)
}

pub fn probe(cfg: &ExperimentConfig, sink: &Sink) -> Result<bool> {
    let probe = cfg
        .probe
        .as_ref()
        .ok_or_else(|| anyhow!("`probe` is missing; known probes: {}", PROBE_NAMES.join(", ")))?;
    let lat = cfg.lattice.build()?;
    let (report, csv, met) = match probe {
        ProbeConfig::Fkrt {
            p,
            a_grid,
            t_grid,
            thresholds,
        } => {
            let family = build_inputs(&cfg.inputs, &lat)?;
            let r = fkrt_probe(
                &family,
                *p,
                a_grid,
                t_grid,
                FkrtThresholds {
                    tail: thresholds.0,
                    shift: thresholds.1,
                },
            )?;
            // the family looks precompact when no condition fails on the grids
            let met = ![Condition::A, Condition::B, Condition::C].iter().any(|c| r.fails(*c));
            (to_value(&r)?, r.to_csv(), met)
        }
        ProbeConfig::NoncompactT {
            eps,
            alpha,
            exps,
            level,
        } => {
            let r = noncompact_t_probe(eps, alpha, exps, &lat, *level)?;
            let met = r.fkrt.fails(Condition::B) || r.fkrt.fails(Condition::C);
            (to_value(&r)?, r.fkrt.to_csv(), met)
        }
        ProbeConfig::NoncompactShift { p } => {
            let spec = match operator(cfg, &lat)? {
                Operator::Shift(s) => s,
                other => bail!("noncompact-shift needs a shift operator, got {}", other.name()),
            };
            let r = noncompact_shift_probe(&spec, *p, &lat)?;
            let met = r.fkrt.fails(Condition::B) || r.fkrt.fails(Condition::C);
            (to_value(&r)?, r.fkrt.to_csv(), met)
        }
        ProbeConfig::PiCompactness {
            b,
            alpha,
            exps,
            options,
        } => {
            let b = b.single(&lat)?;
            let r = pi_compactness_probe(&b, alpha, exps, &lat, &seeded(options, cfg.seed))?;
            (to_value(&r)?, r.to_csv(), r.met())
        }
        ProbeConfig::CommutatorCompactness {
            b,
            slot,
            exps,
            modulus_bound,
            options,
        } => {
            let b = b.single(&lat)?;
            let op = operator(cfg, &lat)?;
            let r =
                commutator_compactness_probe(&b, &op, *slot, exps, &lat, &seeded(options, cfg.seed), *modulus_bound)?;
            (to_value(&r)?, r.to_csv(), r.met())
        }
        ProbeConfig::ShiftCommutator {
            b,
            p,
            mds_instances,
            options,
        } => {
            let b = b.single(&lat)?;
            let spec = match operator(cfg, &lat)? {
                Operator::Shift(s) => s,
                other => bail!("shift-commutator needs a shift operator, got {}", other.name()),
            };
            let r = shift_commutator_probe(&b, &spec, *p, &lat, &seeded(options, cfg.seed), *mds_instances)?;
            (to_value(&r)?, r.to_csv(), r.met())
        }
        ProbeConfig::OscillatingSymbol { k0_grid, p, c } => {
            let r = oscillating_symbol_probe(
                k0_grid,
                &AlphaVector::zeros(1),
                &single_exps(*p)?,
                &lat,
                &dyadlab::probes::compact::oscillation_factors(),
                *c,
            )?;
            (to_value(&r)?, r.to_csv(), r.normalized_stays_above)
        }
        ProbeConfig::Continuity {
            lipschitz,
            points,
            options,
        } => {
            let op = operator(cfg, &lat)?;
            let fs = build_inputs(&cfg.inputs, &lat)?;
            let r = continuity_probe(&op, &fs, *lipschitz, &lat, &sample_points(&lat, *points, 1.5)?, options)?;
            (to_value(&r)?, r.to_csv(), r.met())
        }
        ProbeConfig::Opnorm { exps, budget } => {
            let op = operator(cfg, &lat)?;
            let r = opnorm_lower_bound(&op, exps, &lat, *budget, cfg.seed)?;
            (to_value(&r)?, r.to_csv(), true)
        }
        ProbeConfig::WeightedRatio {
            bs,
            eps,
            alpha,
            weights,
            exps,
            options,
        } => {
            let bs = bs.iter().map(|b| b.single(&lat)).collect::<Result<Vec<_>>>()?;
            let w = if weights.is_empty() {
                WeightVector::unit(alpha.len(), &lat)
            } else {
                WeightVector::new(build_inputs(weights, &lat)?)?
            };
            let mut opts = options.clone();
            opts.batch.seed = cfg.seed;
            let r = weighted_ratio_probe(&bs, eps, alpha, &w, exps, &lat, &opts)?;
            let met = r.strong.max.is_finite() && r.endpoint.max.is_finite();
            (to_value(&r)?, r.to_csv(), met)
        }
        ProbeConfig::Suite => {
            let r = run_suite(cfg.seed)?;
            let csv = format!("probe\n{}\n", r.keys().cloned().collect::<Vec<_>>().join("\n"));
            (to_value(&r)?, csv, true)
        }
    };
    sink.write(&canonical_string(&report), &csv)?;
    println!("probe {}: targets {}", probe.name(), if met { "met" } else { "missed" });
    Ok(met)
}

fn seeded(options: &dyadlab::probes::DecayOptions, seed: u64) -> dyadlab::probes::DecayOptions {
    let mut o = options.clone();
    o.batch.seed = seed;
    o
}

pub fn norms(cfg: &ExperimentConfig, sink: &Sink) -> Result<bool> {
    let n = cfg.norms.as_ref().ok_or_else(|| anyhow!("`norms` is missing"))?;
    let lat = cfg.lattice.build()?;
    let mut report: BTreeMap<String, Value> = BTreeMap::new();
    let mut csv = String::from("quantity,value [norm or constant]\n");
    let mut row = |name: String, v: f64, full: Value, report: &mut BTreeMap<String, Value>| {
        csv.push_str(&format!("{name},{}\n", format_float(v)));
        report.insert(name, full);
    };
    if let Some(b) = &n.b {
        let b = b.single(&lat)?;
        let r = bmo_dyadic(&b, &lat)?;
        row("bmo_dyadic".into(), r.value, to_value(&r)?, &mut report);
        for &q in &n.r {
            let r = bmo_r(&b, q, &lat)?;
            row(format!("bmo_r[{q}]"), r.value, to_value(&r)?, &mut report);
        }
        if lat.dim() == 1 {
            let r = bmo2_dyadic(&b, &lat)?;
            row("bmo2_dyadic".into(), r.standard.value, to_value(&r)?, &mut report);
        }
        let r = bmo_nondyadic_lower(&b, &lat)?;
        row("bmo_nondyadic_lower".into(), r.value, to_value(&r)?, &mut report);
        if n.cmo {
            let r = cmo_distance(&b, &lat, &default_widths(&lat))?;
            row("cmo_distance".into(), r.distance, to_value(&r)?, &mut report);
        }
    }
    if !n.weights.is_empty() {
        let w = WeightVector::new(build_inputs(&n.weights, &lat)?)?;
        let exps = match &n.exps {
            Some(e) => e.clone(),
            None => Exponents::uniform(w.len(), 2.0)?,
        };
        let r = ap_constant(&w, &exps, &lat)?;
        row("ap_standard".into(), r.standard, to_value(&r)?, &mut report);
        csv.push_str(&format!("ap_verbatim,{}\n", format_float(r.verbatim)));
    }
    if report.is_empty() {
        bail!("`norms` needs a symbol `b` or `weights`");
    }
    for line in csv.lines().skip(1) {
        println!("{line}");
    }
    sink.write(&canonical_string(&to_value(&report)?), &csv)?;
    Ok(true)
}

pub fn list_generators() {
    println!("generators:");
    for (name, help) in GENERATORS {
        println!("  {name:<18} {help}");
    }
    println!("  {:<18} step function given inline (params: function)", "explicit");
    println!("probes:");
    for name in PROBE_NAMES {
        println!("  {name}");
    }
}
