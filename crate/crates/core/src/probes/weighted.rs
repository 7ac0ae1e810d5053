//! Empirical weighted ratios for iterated commutators `T_{ε,Πb}^α`: the strong
//! `L^p(ν_ω)` ratio and the end-point level-set ratio with `Φ(t) = t(1 + log⁺ t)`.

use serde::{Deserialize, Serialize};

use crate::dyadic::TruncatedLattice;
use crate::error::{DyadError, Result};
use crate::norms::bmo_dyadic;
use crate::operators::{iterated_commutator, AlphaVector, EpsilonSeq, Exponents};
use crate::par;
use crate::stepfn::StepFunction;
use crate::weights::{phi, weighted_lp_norm, WeightVector};

use super::batch::{unit_ball_batch, BatchConfig};

const STREAM_WEIGHTED: u64 = 0x5745_4947;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightedOptions {
    pub batch: BatchConfig,
    /// Levels `t` of the end-point estimate; the level set is `{|out| > t^m}`.
    pub t_grid: Vec<f64>,
    /// Number of compositions of `Φ` in the end-point right-hand side.
    pub phi_iterations: u32,
}

impl Default for WeightedOptions {
    fn default() -> Self {
        WeightedOptions {
            batch: BatchConfig {
                dictionary: false,
                ..BatchConfig::default()
            },
            t_grid: vec![0.125, 0.25, 0.5, 1.0, 2.0],
            phi_iterations: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioStats {
    pub evaluated: usize,
    pub max: f64,
    pub median: f64,
    /// Nonzero numerator over a vanishing denominator.
    pub skipped: usize,
}

fn stats(ratios: &mut [f64], skipped: usize) -> RatioStats {
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    let median = match n {
        0 => 0.0,
        _ if n % 2 == 1 => ratios[n / 2],
        _ => 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]),
    };
    RatioStats {
        evaluated: n,
        max: ratios.last().copied().unwrap_or(0.0),
        median,
        skipped,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedReport {
    pub p: f64,
    pub bmo_product: f64,
    pub strong: RatioStats,
    pub endpoint: RatioStats,
}

impl WeightedReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("estimate,evaluated,max_ratio [dimensionless],median_ratio [dimensionless],skipped\n");
        for (name, s) in [("strong L^p(nu)", &self.strong), ("endpoint level set", &self.endpoint)] {
            out.push_str(&format!(
                "{name},{},{:e},{:e},{}\n",
                s.evaluated, s.max, s.median, s.skipped
            ));
        }
        out
    }
}

enum Ratio {
    Value(f64),
    Skipped,
}

fn ratio(num: f64, den: f64) -> Ratio {
    if num == 0.0 {
        Ratio::Value(0.0)
    } else if den == 0.0 {
        Ratio::Skipped
    } else {
        Ratio::Value(num / den)
    }
}

/// Strong ratio `‖T_{ε,Πb}^α(f⃗)‖_{L^p(ν_ω)} / (Π‖b_j‖_{BMO^d} Π‖f_i‖_{L^{p_i}(ω_i)})`
/// and end-point ratio `ν{|T_{ε,Πb}^α(f⃗)| > t^m} / (Π_j ∫ Φ(|f_j|/t) ω_j)^{1/m}`
/// (with `ν = Π ω_j^{1/m}`) over a random unit batch.
pub fn weighted_ratio_probe(
    bs: &[StepFunction],
    eps: &EpsilonSeq,
    alpha: &AlphaVector,
    w: &WeightVector,
    exps: &Exponents,
    lat: &TruncatedLattice,
    opts: &WeightedOptions,
) -> Result<WeightedReport> {
    let m = alpha.len();
    for len in [bs.len(), w.len(), exps.len()] {
        if len != m {
            return Err(DyadError::ArityMismatch { expected: m, got: len });
        }
    }
    if opts.t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(DyadError::InvalidParameter("end-point levels must be positive".into()));
    }
    let p = exps.p();
    let nu = w.nu(exps, lat)?;
    let nu_end = w.nu(&Exponents::uniform(m, 1.0)?, lat)?;
    let ws = w
        .weights()
        .iter()
        .map(|x| x.to_lattice(lat))
        .collect::<Result<Vec<_>>>()?;
    let bmo_product: f64 = bs
        .iter()
        .map(|b| bmo_dyadic(b, lat).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .product();
    let members = unit_ball_batch(lat, exps, &opts.batch, STREAM_WEIGHTED)?;

    type Row = (Ratio, Vec<Ratio>);
    let rows = par::map_slice(&members, |mb| -> Result<Row> {
        let inputs = mb
            .inputs
            .iter()
            .map(|f| f.to_lattice(lat))
            .collect::<Result<Vec<_>>>()?;
        let out = iterated_commutator(bs, eps, alpha, &inputs, lat)?.to_lattice(lat)?;
        let num = weighted_lp_norm(&out, p, &nu)?;
        let mut den = bmo_product;
        for (j, f) in inputs.iter().enumerate() {
            den *= weighted_lp_norm(f, exps.get(j), &ws[j])?;
        }
        let strong = ratio(num, den);
        let mu = out.cell_measure();
        let mut end = Vec::with_capacity(opts.t_grid.len());
        for &t in &opts.t_grid {
            let level = t.powi(m as i32);
            let ov = out.values();
            let nv = nu_end.values();
            let lhs = par::sum_map(ov.len(), |c| if ov[c].abs() > level { nv[c] } else { 0.0 }) * mu;
            let mut prod = 1.0;
            for (j, f) in inputs.iter().enumerate() {
                let fv = f.values();
                let wv = ws[j].values();
                let terms: Vec<f64> = fv
                    .iter()
                    .map(|x| phi(x.abs() / t, opts.phi_iterations))
                    .collect::<Result<Vec<_>>>()?;
                prod *= par::sum_map(terms.len(), |c| terms[c] * wv[c]) * f.cell_measure();
            }
            end.push(ratio(lhs, prod.powf(1.0 / m as f64)));
        }
        Ok((strong, end))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut strong = Vec::new();
    let mut strong_skipped = 0;
    let mut end = Vec::new();
    let mut end_skipped = 0;
    for (s, e) in rows {
        match s {
            Ratio::Value(v) => strong.push(v),
            Ratio::Skipped => strong_skipped += 1,
        }
        for r in e {
            match r {
                Ratio::Value(v) => end.push(v),
                Ratio::Skipped => end_skipped += 1,
            }
        }
    }
    Ok(WeightedReport {
        p,
        bmo_product,
        strong: stats(&mut strong, strong_skipped),
        endpoint: stats(&mut end, end_skipped),
    })
}
