//! Experiment configuration: one JSON document, unknown fields rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dyadlab::generators;
use dyadlab::probes::continuity::ContinuityOptions;
use dyadlab::probes::{DecayOptions, WeightedOptions};
use dyadlab::{
    AlphaVector, DyadicInterval, EpsilonSeq, Exponents, Operator, ShiftSpec, StepFunction, TruncatedLattice,
};
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
    #[serde(default)]
    pub inputs: Vec<InputSpec>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub norms: Option<NormsConfig>,
    /// Exponents for the norms printed by `apply`.
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_p_list() -> Vec<f64> {
    vec![1.0, 2.0]
}

/// Window `[-2^K, 2^K)^d`, finest scale `-L`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(rename = "K")]
    pub k: i32,
    #[serde(rename = "L")]
    pub l: i32,
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

impl LatticeConfig {
    pub fn build(&self) -> Result<TruncatedLattice> {
        Ok(TruncatedLattice::symmetric(self.d, self.k, self.l)?)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File stem for every artifact; defaults to the subcommand name.
    #[serde(default)]
    pub prefix: Option<String>,
}

/// A function built from explicit data or a named generator.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Explicit {
        function: StepFunction,
    },
    Haar {
        #[serde(rename = "I")]
        interval: DyadicInterval,
        #[serde(default = "unit")]
        c: f64,
    },
    Indicator {
        #[serde(rename = "I")]
        interval: DyadicInterval,
        #[serde(default = "unit")]
        c: f64,
    },
    Hat {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "unit")]
        height: f64,
    },
    OscillatingSymbol,
    OscillatingInput {
        k0: i32,
    },
    NoncompactFamily {
        #[serde(rename = "I")]
        interval: DyadicInterval,
        alpha: AlphaVector,
        exps: Exponents,
    },
    Linear {
        slope: f64,
    },
    Lipschitz {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        index: u64,
        radius: f64,
        knot_scale: i32,
    },
    RandomStep {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        index: u64,
        scale: i32,
        radius: i32,
    },
    Constant {
        value: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl InputSpec {
    /// Every generator yields one function except `noncompact-family`, which yields `m`.
    pub fn build(&self, lat: &TruncatedLattice) -> Result<Vec<StepFunction>> {
        Ok(match self {
            InputSpec::Explicit { function } => vec![function.clone()],
            InputSpec::Haar { interval, c } => vec![generators::haar(interval, *c)],
            InputSpec::Indicator { interval, c } => vec![generators::indicator(interval, *c)?],
            InputSpec::Hat { center, radius, height } => vec![generators::hat(lat, center, *radius, *height)?],
            InputSpec::OscillatingSymbol => vec![generators::oscillating_symbol(lat)?],
            InputSpec::OscillatingInput { k0 } => vec![generators::oscillating_input(*k0)?],
            InputSpec::NoncompactFamily { interval, alpha, exps } => {
                dyadlab::operators::noncompact_family(interval, alpha, exps)?
            }
            InputSpec::Linear { slope } => vec![generators::linear(lat, *slope)],
            InputSpec::Lipschitz {
                seed,
                index,
                radius,
                knot_scale,
            } => vec![generators::random_lipschitz(lat, *seed, *index, *radius, *knot_scale)?.function],
            InputSpec::RandomStep {
                seed,
                index,
                scale,
                radius,
            } => vec![generators::random_step(lat.dim(), *seed, 0, *index, *scale, *radius)?],
            InputSpec::Constant { value } => vec![generators::constant(lat, *value)],
        })
    }

    /// Exactly one function.
    pub fn single(&self, lat: &TruncatedLattice) -> Result<StepFunction> {
        let mut fs = self.build(lat)?;
        if fs.len() != 1 {
            bail!("expected a single function, the generator produced {}", fs.len());
        }
        Ok(fs.remove(0))
    }
}

pub fn build_inputs(specs: &[InputSpec], lat: &TruncatedLattice) -> Result<Vec<StepFunction>> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.build(lat)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum OperatorConfig {
    /// `T` with `ε ≡ 1`, `α = (0)` and top averages.
    #[serde(rename = "identity")]
    Identity,
    /// Full-tensor shift of complexity `(m, n)` over the lattice.
    #[serde(rename = "canonical-shift")]
    CanonicalShift { m: u32, n: u32 },
    #[serde(rename = "shift")]
    Shift { spec: ShiftSpec },
    #[serde(rename = "T")]
    T {
        #[serde(default = "EpsilonSeq::ones")]
        eps: EpsilonSeq,
        alpha: AlphaVector,
        #[serde(default)]
        use_tops: bool,
    },
    #[serde(rename = "P")]
    P { alpha: AlphaVector },
    #[serde(rename = "pi")]
    Pi { b: InputSpec, alpha: AlphaVector },
    #[serde(rename = "commutator")]
    Commutator {
        b: InputSpec,
        inner: Box<OperatorConfig>,
        slot: usize,
    },
    #[serde(rename = "iterated")]
    Iterated {
        bs: Vec<InputSpec>,
        #[serde(default = "EpsilonSeq::ones")]
        eps: EpsilonSeq,
        alpha: AlphaVector,
    },
}

impl OperatorConfig {
    pub fn build(&self, lat: &TruncatedLattice) -> Result<Operator> {
        Ok(match self {
            OperatorConfig::Identity => Operator::identity(),
            OperatorConfig::CanonicalShift { m, n } => Operator::Shift(ShiftSpec::canonical(*m, *n, lat)?),
            OperatorConfig::Shift { spec } => Operator::Shift(spec.clone()),
            OperatorConfig::T { eps, alpha, use_tops } => Operator::T {
                eps: eps.clone(),
                alpha: alpha.clone(),
                use_tops: *use_tops,
            },
            OperatorConfig::P { alpha } => Operator::P { alpha: alpha.clone() },
            OperatorConfig::Pi { b, alpha } => Operator::Pi {
                b: b.single(lat)?,
                alpha: alpha.clone(),
            },
            OperatorConfig::Commutator { b, inner, slot } => Operator::Commutator {
                b: b.single(lat)?,
                inner: Box::new(inner.build(lat)?),
                slot: *slot,
            },
            OperatorConfig::Iterated { bs, eps, alpha } => Operator::Iterated {
                bs: bs.iter().map(|b| b.single(lat)).collect::<Result<_>>()?,
                eps: eps.clone(),
                alpha: alpha.clone(),
            },
        })
    }
}

fn default_b() -> InputSpec {
    InputSpec::Hat {
        center: vec![0.0],
        radius: 1.0,
        height: 1.0,
    }
}

fn default_exps() -> Exponents {
    Exponents::new(vec![2.0, 2.0]).expect("valid exponents")
}

fn default_alpha() -> AlphaVector {
    AlphaVector::zeros(2)
}

fn default_p() -> f64 {
    2.0
}

fn default_level() -> f64 {
    1.0
}

fn default_budget() -> usize {
    64
}

fn default_points() -> usize {
    20
}

fn default_modulus_bound() -> f64 {
    0.1
}

fn default_k0() -> Vec<i32> {
    (1..=4).collect()
}

fn default_oscillation_c() -> f64 {
    0.1
}

fn default_mds() -> usize {
    0
}

fn default_thresholds() -> (f64, f64) {
    (0.25, 0.25)
}

/// One probe and its parameters. Probes that act on an operator take it from
/// the top-level `operator` field.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// Conditions (a)-(c) for the family given by `inputs`.
    Fkrt {
        #[serde(default = "default_p")]
        p: f64,
        a_grid: Vec<f64>,
        t_grid: Vec<f64>,
        #[serde(default = "default_thresholds")]
        thresholds: (f64, f64),
    },
    NoncompactT {
        #[serde(default = "EpsilonSeq::ones")]
        eps: EpsilonSeq,
        #[serde(default = "default_alpha")]
        alpha: AlphaVector,
        #[serde(default = "default_exps")]
        exps: Exponents,
        #[serde(default = "default_level")]
        level: f64,
    },
    NoncompactShift {
        #[serde(default = "default_p")]
        p: f64,
    },
    PiCompactness {
        #[serde(default = "default_b")]
        b: InputSpec,
        #[serde(default = "default_alpha")]
        alpha: AlphaVector,
        #[serde(default = "default_exps")]
        exps: Exponents,
        #[serde(default)]
        options: DecayOptions,
    },
    CommutatorCompactness {
        #[serde(default = "default_b")]
        b: InputSpec,
        #[serde(default = "one")]
        slot: usize,
        #[serde(default = "default_exps")]
        exps: Exponents,
        #[serde(default = "default_modulus_bound")]
        modulus_bound: f64,
        #[serde(default)]
        options: DecayOptions,
    },
    ShiftCommutator {
        #[serde(default = "default_b")]
        b: InputSpec,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_mds")]
        mds_instances: usize,
        #[serde(default)]
        options: DecayOptions,
    },
    OscillatingSymbol {
        #[serde(default = "default_k0")]
        k0_grid: Vec<i32>,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "default_oscillation_c")]
        c: f64,
    },
    /// Uses the first input and its Lipschitz constant `lipschitz`.
    Continuity {
        lipschitz: f64,
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default)]
        options: ContinuityOptions,
    },
    Opnorm {
        #[serde(default = "default_exps")]
        exps: Exponents,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    WeightedRatio {
        bs: Vec<InputSpec>,
        #[serde(default = "EpsilonSeq::ones")]
        eps: EpsilonSeq,
        #[serde(default = "default_alpha")]
        alpha: AlphaVector,
        /// Weights `ω_j`; unit weights when empty.
        #[serde(default)]
        weights: Vec<InputSpec>,
        #[serde(default = "default_exps")]
        exps: Exponents,
        #[serde(default)]
        options: WeightedOptions,
    },
    /// Every probe at small size.
    Suite,
}

impl ProbeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeConfig::Fkrt { .. } => "fkrt",
            ProbeConfig::NoncompactT { .. } => "noncompact-t",
            ProbeConfig::NoncompactShift { .. } => "noncompact-shift",
            ProbeConfig::PiCompactness { .. } => "pi-compactness",
            ProbeConfig::CommutatorCompactness { .. } => "commutator-compactness",
            ProbeConfig::ShiftCommutator { .. } => "shift-commutator",
            ProbeConfig::OscillatingSymbol { .. } => "oscillating-symbol",
            ProbeConfig::Continuity { .. } => "continuity",
            ProbeConfig::Opnorm { .. } => "opnorm",
            ProbeConfig::WeightedRatio { .. } => "weighted-ratio",
            ProbeConfig::Suite => "suite",
        }
    }
}

pub const PROBE_NAMES: &[&str] = &[
    "fkrt",
    "noncompact-t",
    "noncompact-shift",
    "pi-compactness",
    "commutator-compactness",
    "shift-commutator",
    "oscillating-symbol",
    "continuity",
    "opnorm",
    "weighted-ratio",
    "suite",
];

fn default_r_list() -> Vec<f64> {
    vec![2.0]
}

/// Symbol `b` and/or weights for the `norms` subcommand.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsConfig {
    #[serde(default)]
    pub b: Option<InputSpec>,
    #[serde(default = "default_r_list")]
    pub r: Vec<f64>,
    #[serde(default)]
    pub cmo: bool,
    #[serde(default)]
    pub weights: Vec<InputSpec>,
    #[serde(default)]
    pub exps: Option<Exponents>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("invalid configuration {}", path.display()))?;
    Ok(cfg)
}
