//! Measurements of the three compactness conditions (uniform bound, uniform
//! tail decay, uniform translation continuity) on finite families, and the
//! noncompactness families for Haar multipliers and shifts.

use serde::Serialize;

use crate::dyadic::{ldexp, Dyadic, DyadicInterval, HaarFunction, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::operators::{
    apply_shift, noncompact_family, AlphaVector, EpsilonSeq, Exponents, MultilinearPlan, ShiftSpec,
};
use crate::par;
use crate::stepfn::StepFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `sup ‖f‖_p < ∞`.
    A,
    /// `∫_{|x|>A} |f|^p → 0` uniformly.
    B,
    /// `‖f(·+t) - f‖_p → 0` uniformly.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// The profile stays at or above the threshold across the grid tail.
    Fails,
    /// No failure visible on the grid.
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub condition: Condition,
    pub threshold: Option<f64>,
    /// Minimum of the profile over the grid tail (the sup norm for (a)).
    pub measured: f64,
    pub status: VerdictStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub radius: f64,
    /// `sup_f ∫_{|x|_∞ > A} |f|^p`.
    pub mass: f64,
    /// `mass^{1/p}`.
    pub norm: f64,
    pub argmax: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftPoint {
    pub t: f64,
    /// `sup_f ‖f(· + t e_1) - f‖_p`.
    pub value: f64,
    pub argmax: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkrtReport {
    pub p: f64,
    pub family_size: usize,
    pub sup_norm: f64,
    pub tail_profile: Vec<TailPoint>,
    pub shift_profile: Vec<ShiftPoint>,
    pub verdicts: Vec<Verdict>,
}

impl FkrtReport {
    pub fn verdict(&self, c: Condition) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.condition == c)
    }

    pub fn fails(&self, c: Condition) -> bool {
        self.verdict(c).is_some_and(|v| v.status == VerdictStatus::Fails)
    }

    /// CSV with one row per grid point of either profile.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("profile,grid_value [length],sup_over_family [L^p quasi-norm],sup_tail_mass [p-th power]\n");
        for t in &self.tail_profile {
            out.push_str(&format!("tail,{:e},{:e},{:e}\n", t.radius, t.norm, t.mass));
        }
        for s in &self.shift_profile {
            out.push_str(&format!("translation,{:e},{:e},\n", s.t, s.value));
        }
        out
    }
}

/// Thresholds for the (b) and (c) verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FkrtThresholds {
    pub tail: f64,
    pub shift: f64,
}

fn grid_tail_min(values: &[f64]) -> f64 {
    let n = values.len();
    values[n / 2..].iter().copied().fold(f64::INFINITY, f64::min)
}

fn sup_with_arg(values: &[f64]) -> (f64, Option<usize>) {
    let mut best = (0.0, None);
    for (k, &v) in values.iter().enumerate() {
        if best.1.is_none() || v > best.0 {
            best = (v, Some(k));
        }
    }
    best
}

/// Measures conditions (a), (b), (c) for `family`. Radii are sorted
/// increasingly and translations decreasingly; the last half of each grid is
/// the "grid tail" used for the verdicts. Translations act along the first axis.
pub fn fkrt_probe(
    family: &[StepFunction],
    p: f64,
    a_grid: &[f64],
    t_grid: &[f64],
    thresholds: FkrtThresholds,
) -> Result<FkrtReport> {
    if family.is_empty() {
        return Err(DyadError::Empty("function family".into()));
    }
    if a_grid.is_empty() || t_grid.is_empty() {
        return Err(DyadError::Empty("radius or translation grid".into()));
    }
    if !(p > 0.0) {
        return Err(DyadError::NonPositiveExponent(p));
    }
    let dim = family[0].dim();
    let mut radii = a_grid.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let shifts = ts
        .iter()
        .map(|&t| {
            let mut v = vec![Dyadic::ZERO; dim];
            v[0] = Dyadic::from_f64(t)?;
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;

    let norms = par::map_slice(family, |f| f.lp_norm(p));
    let norms = norms.into_iter().collect::<Result<Vec<_>>>()?;
    let sup_norm = norms.iter().copied().fold(0.0, f64::max);

    let mut tail_profile = Vec::new();
    for &a in &radii {
        let masses = par::map_slice(family, |f| f.tail_mass(a, p))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let (mass, argmax) = sup_with_arg(&masses);
        tail_profile.push(TailPoint {
            radius: a,
            mass,
            norm: mass.powf(1.0 / p),
            argmax,
        });
    }
    let mut shift_profile = Vec::new();
    for (t, v) in ts.iter().zip(&shifts) {
        let mods = par::map_slice(family, |f| f.translation_modulus(v, p))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let (value, argmax) = sup_with_arg(&mods);
        shift_profile.push(ShiftPoint { t: *t, value, argmax });
    }

    let tail_vals: Vec<f64> = tail_profile.iter().map(|t| t.norm).collect();
    let shift_vals: Vec<f64> = shift_profile.iter().map(|s| s.value).collect();
    let verdict = |condition, threshold: f64, measured: f64| Verdict {
        condition,
        threshold: Some(threshold),
        measured,
        status: if measured >= threshold {
            VerdictStatus::Fails
        } else {
            VerdictStatus::Holds
        },
    };
    let verdicts = vec![
        Verdict {
            condition: Condition::A,
            threshold: None,
            measured: sup_norm,
            status: if sup_norm.is_finite() {
                VerdictStatus::Holds
            } else {
                VerdictStatus::Fails
            },
        },
        verdict(Condition::B, thresholds.tail, grid_tail_min(&tail_vals)),
        verdict(Condition::C, thresholds.shift, grid_tail_min(&shift_vals)),
    ];
    Ok(FkrtReport {
        p,
        family_size: family.len(),
        sup_norm,
        tail_profile,
        shift_profile,
        verdicts,
    })
}

/// Which case of the noncompactness argument the lattice data falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoncompactCase {
    /// Large coefficients reach the outermost shell of the window: tails fail.
    Escaping,
    /// Large coefficients stay bounded and shrink: translations fail.
    Local,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoncompactReport {
    pub case: NoncompactCase,
    /// The level `A` (for shifts: the smallest output norm in the family).
    pub level: f64,
    pub qualifying: usize,
    /// Cubes generating the escape family, one per shell `|x|_∞ ≥ 2^k`.
    pub escape_family: Vec<DyadicInterval>,
    /// Cubes generating the shrinking family, one per scale.
    pub local_family: Vec<DyadicInterval>,
    /// Measured (b) lower bound: grid-tail minimum of the tail profile.
    pub tail_lower_bound: Option<f64>,
    /// Measured (c) lower bound: grid-tail minimum of the translation profile.
    pub translation_lower_bound: Option<f64>,
    pub fkrt: FkrtReport,
}

fn outside_shell(i: &DyadicInterval, r: f64) -> bool {
    (0..i.dim()).any(|a| i.lower(a).to_f64() >= r || i.upper(a).to_f64() <= -r)
}

fn radius_grid(lat: &TruncatedLattice) -> Vec<f64> {
    (0..lat.top()).map(|k| ldexp(1.0, k)).collect()
}

fn translation_grid(lat: &TruncatedLattice, finest: i32) -> Vec<f64> {
    (finest..lat.top()).rev().map(|s| ldexp(1.0, s)).collect()
}

/// Noncompactness families `f⃗_I` for `T_ε^α`: one cube per shell (for the
/// tail condition) and one per scale (for translations), each with
/// `|ε_I| ≥ level`. Both conditions are measured on the union family.
pub fn noncompact_t_probe(
    eps: &EpsilonSeq,
    alpha: &AlphaVector,
    exps: &Exponents,
    lat: &TruncatedLattice,
    level: f64,
) -> Result<NoncompactReport> {
    if lat.dim() != 1 {
        return Err(DyadError::RequiresOneDimension);
    }
    if alpha.is_all_ones() {
        return Err(DyadError::AllOnesAlpha);
    }
    if !(level > 0.0) {
        return Err(DyadError::InvalidParameter(format!(
            "level A must be positive, got {level}"
        )));
    }
    let qualifying: Vec<DyadicInterval> = lat
        .enumerate()
        .filter(|i| i.scale() > lat.fine() && eps.value(i).abs() >= level)
        .collect();
    if qualifying.is_empty() {
        return Err(DyadError::NoQualifyingInterval(format!(
            "no lattice cube has |eps_I| >= {level}"
        )));
    }
    let score = |i: &DyadicInterval| eps.value(i).abs();
    // escape family: per shell, the largest |ε_I| (ties: larger cube, then order)
    let mut escape = Vec::new();
    for k in 0..lat.top() {
        let r = ldexp(1.0, k);
        let pick = qualifying.iter().filter(|i| outside_shell(i, r)).min_by(|a, b| {
            score(b)
                .total_cmp(&score(a))
                .then(b.scale().cmp(&a.scale()))
                .then(a.cmp(b))
        });
        escape.extend(pick.copied());
    }
    // local family: per scale, the largest |ε_I| (ties: closest to the origin)
    let mut local = Vec::new();
    for s in (lat.fine() + 1..lat.top()).rev() {
        let pick = qualifying.iter().filter(|i| i.scale() == s).min_by(|a, b| {
            score(b)
                .total_cmp(&score(a))
                .then(center_dist(a).total_cmp(&center_dist(b)))
                .then(a.cmp(b))
        });
        local.extend(pick.copied());
    }
    let case = if escape.len() == lat.top() as usize {
        NoncompactCase::Escaping
    } else {
        NoncompactCase::Local
    };
    let mut members: Vec<DyadicInterval> = escape.clone();
    members.extend(local.iter().copied());
    let plan_out = |i: &DyadicInterval| -> Result<StepFunction> {
        let fs = noncompact_family(i, alpha, exps)?;
        MultilinearPlan::new(&fs, lat)?.t(eps, alpha, false)
    };
    let outputs = par::map_slice(&members, plan_out)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let p = exps.p();
    let slack = 1.0 - 1e-12;
    let thresholds = FkrtThresholds {
        tail: level * slack,
        shift: 2f64.powf(1.0 / p) * level * slack,
    };
    let fkrt = fkrt_probe(
        &outputs,
        p,
        &radius_grid(lat),
        &translation_grid(lat, lat.fine() + 1),
        thresholds,
    )?;
    let tail_lower_bound = (!escape.is_empty())
        .then(|| fkrt.verdict(Condition::B).map(|v| v.measured))
        .flatten();
    let translation_lower_bound = (!local.is_empty())
        .then(|| fkrt.verdict(Condition::C).map(|v| v.measured))
        .flatten();
    Ok(NoncompactReport {
        case,
        level,
        qualifying: qualifying.len(),
        escape_family: escape,
        local_family: local,
        tail_lower_bound,
        translation_lower_bound,
        fkrt,
    })
}

fn center_dist(i: &DyadicInterval) -> f64 {
    i.center_f64().iter().map(|c| c.abs()).fold(0.0, f64::max)
}

/// `|I'|^{-1/p}`-normalized source Haar function.
fn unit_source(spec: &ShiftSpec, src: &DyadicInterval, p: f64) -> Result<StepFunction> {
    let h = HaarFunction::new(*src, spec.source_pattern().clone())?;
    let f = StepFunction::haar(&h, 1.0);
    let n = f.lp_norm(p)?;
    Ok(f.scaled(1.0 / n))
}

/// Same construction for a dyadic shift: unit sources `h_{I'}` taken per
/// shell and per scale; the level is the smallest output norm in each family.
pub fn noncompact_shift_probe(spec: &ShiftSpec, p: f64, lat: &TruncatedLattice) -> Result<NoncompactReport> {
    if !(p > 0.0) {
        return Err(DyadError::NonPositiveExponent(p));
    }
    if spec.dim() != lat.dim() {
        return Err(DyadError::DimensionMismatch {
            expected: lat.dim(),
            got: spec.dim(),
        });
    }
    // sources at the lattice resolution see constant inputs and contribute nothing
    let mut terms: Vec<_> = spec
        .terms()
        .iter()
        .filter(|t| t.lambda != 0.0 && t.source.scale() > lat.fine())
        .collect();
    if terms.is_empty() {
        return Err(DyadError::NoQualifyingInterval("shift has no nonzero terms".into()));
    }
    terms.sort_by(|a, b| {
        b.interval
            .scale()
            .cmp(&a.interval.scale())
            .then(a.interval.cmp(&b.interval))
    });
    let output = |src: &DyadicInterval| -> Result<StepFunction> { apply_shift(spec, &unit_source(spec, src, p)?, lat) };

    let mut escape: Vec<(DyadicInterval, StepFunction)> = Vec::new();
    for k in 0..lat.top() {
        let r = ldexp(1.0, k);
        for t in terms.iter().filter(|t| outside_shell(&t.interval, r)) {
            if escape.iter().any(|(s, _)| *s == t.source) {
                continue;
            }
            let g = output(&t.source)?;
            if !g.is_zero() {
                escape.push((t.source, g));
                break;
            }
        }
    }
    let mut local: Vec<(DyadicInterval, StepFunction)> = Vec::new();
    let mut scales: Vec<i32> = terms.iter().map(|t| t.interval.scale()).collect();
    scales.dedup();
    for s in scales {
        let mut at: Vec<_> = terms.iter().filter(|t| t.interval.scale() == s).collect();
        at.sort_by(|a, b| {
            center_dist(&a.interval)
                .total_cmp(&center_dist(&b.interval))
                .then(a.source.cmp(&b.source))
        });
        for t in at {
            let g = output(&t.source)?;
            if !g.is_zero() {
                local.push((t.source, g));
                break;
            }
        }
    }
    if escape.is_empty() && local.is_empty() {
        return Err(DyadError::NoQualifyingInterval("every shift output vanishes".into()));
    }
    let min_norm = |fam: &[(DyadicInterval, StepFunction)]| -> Result<f64> {
        fam.iter()
            .map(|(_, g)| g.lp_norm(p))
            .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
    };
    let slack = 1.0 - 1e-9;
    let lb = min_norm(&escape)?;
    let ll = min_norm(&local)?;
    let thresholds = FkrtThresholds {
        tail: if escape.is_empty() { f64::INFINITY } else { lb * slack },
        shift: if local.is_empty() {
            f64::INFINITY
        } else {
            2f64.powf(1.0 / p) * ll * slack
        },
    };
    let case = if escape.len() == lat.top() as usize {
        NoncompactCase::Escaping
    } else {
        NoncompactCase::Local
    };
    let outputs: Vec<StepFunction> = escape.iter().chain(&local).map(|(_, g)| g.clone()).collect();
    let finest = lat.fine() + 1 + spec.complexity() as i32;
    let fkrt = fkrt_probe(
        &outputs,
        p,
        &radius_grid(lat),
        &translation_grid(lat, finest.min(lat.top() - 1)),
        thresholds,
    )?;
    Ok(NoncompactReport {
        case,
        level: lb.min(ll),
        qualifying: terms.len(),
        escape_family: escape.iter().map(|e| e.0).collect(),
        local_family: local.iter().map(|e| e.0).collect(),
        tail_lower_bound: (!escape.is_empty())
            .then(|| fkrt.verdict(Condition::B).map(|v| v.measured))
            .flatten(),
        translation_lower_bound: (!local.is_empty())
            .then(|| fkrt.verdict(Condition::C).map(|v| v.measured))
            .flatten(),
        fkrt,
    })
}
