//! Multilinear weights, weighted norms, dyadic maximal functions and the
//! Young function `Φ(t) = t(1 + log⁺ t)`.

use serde::Serialize;

use crate::dyadic::{DyadicInterval, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::levels::{sup_over_ancestors, visit_cube};
use crate::norms::oscillation_levels;
use crate::operators::Exponents;
use crate::par;
use crate::stepfn::StepFunction;

/// Weights `ω_1, …, ω_m`, strictly positive on their windows.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<StepFunction>);

impl WeightVector {
    pub fn new(ws: Vec<StepFunction>) -> Result<Self> {
        if ws.is_empty() {
            return Err(DyadError::Empty("weight vector".into()));
        }
        if ws.iter().any(|w| w.values().iter().any(|&v| !(v > 0.0))) {
            return Err(DyadError::NonPositiveWeight);
        }
        Ok(WeightVector(ws))
    }

    /// `m` copies of the constant weight 1 on the lattice.
    pub fn unit(m: usize, lat: &TruncatedLattice) -> Self {
        let one = StepFunction::on_lattice(lat, vec![1.0; lat.cells(lat.fine())]).expect("lattice grid");
        WeightVector(vec![one; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[StepFunction] {
        &self.0
    }

    fn on_lattice(&self, lat: &TruncatedLattice) -> Result<Vec<StepFunction>> {
        let mut out = Vec::new();
        for w in &self.0 {
            let g = w.to_lattice(lat)?;
            if g.values().iter().any(|&v| !(v > 0.0)) {
                return Err(DyadError::NonPositiveWeight);
            }
            out.push(g);
        }
        Ok(out)
    }

    /// `ν_ω = Π_j ω_j^{p/p_j}` on the lattice grid.
    pub fn nu(&self, exps: &Exponents, lat: &TruncatedLattice) -> Result<StepFunction> {
        if exps.len() != self.len() {
            return Err(DyadError::ArityMismatch {
                expected: self.len(),
                got: exps.len(),
            });
        }
        let ws = self.on_lattice(lat)?;
        let p = exps.p();
        let n = lat.cells(lat.fine());
        let values = par::map(n, |c| {
            ws.iter()
                .enumerate()
                .map(|(j, w)| w.values()[c].powf(p / exps.get(j)))
                .product()
        });
        StepFunction::on_lattice(lat, values)
    }
}

/// Multilinear `A_P` constants over the lattice cubes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApReport {
    /// `sup_I ⟨ν⟩_I^{1/p} Π_j ⟨ω_j^{1-p_j'}⟩_I^{1/p_j}`.
    pub verbatim: f64,
    pub verbatim_maximizer: Option<DyadicInterval>,
    /// `sup_I ⟨ν⟩_I^{1/p} Π_j ⟨ω_j^{1-p_j'}⟩_I^{1/p_j'}`, which is at least 1 by Hölder.
    pub standard: f64,
    pub standard_maximizer: Option<DyadicInterval>,
}

/// Both forms of the `A_P` constant. For `p_j = 1` the `j`-th factor is
/// `max_{cells ⊆ I} 1/ω_j` in both forms.
pub fn ap_constant(w: &WeightVector, exps: &Exponents, lat: &TruncatedLattice) -> Result<ApReport> {
    let nu = w.nu(exps, lat)?;
    let ws = w.on_lattice(lat)?;
    let p = exps.p();
    // per-slot logs of ω_j^{1 - p_j'} (or of 1/ω_j for the sup branch); the
    // averages are taken in the log domain since 1 - p_j' is huge near p_j = 1
    let dual: Vec<Vec<f64>> = ws
        .iter()
        .enumerate()
        .map(|(j, wj)| {
            let e = if exps.get(j) == 1.0 { -1.0 } else { 1.0 - exps.conjugate(j) };
            par::map_slice(wj.values(), |v| e * v.ln())
        })
        .collect();
    let nu_v = nu.values();
    let mut best_v: Option<(f64, DyadicInterval)> = None;
    let mut best_s: Option<(f64, DyadicInterval)> = None;
    for s in (lat.fine()..=lat.top()).rev() {
        let vals = par::map(lat.cells(s), |c| {
            let log_max = |vals: &[f64]| {
                let mut m = f64::NEG_INFINITY;
                visit_cube(lat, vals, s, c, |x| m = m.max(x));
                m
            };
            // ln of the mean of exp(x) over the cube
            let log_mean = |vals: &[f64]| {
                let m = log_max(vals);
                let mut sum = 0.0;
                let mut n = 0usize;
                visit_cube(lat, vals, s, c, |x| {
                    sum += (x - m).exp();
                    n += 1;
                });
                m + (sum / n as f64).ln()
            };
            let mut sum = 0.0;
            let mut n = 0usize;
            visit_cube(lat, nu_v, s, c, |x| {
                sum += x;
                n += 1;
            });
            let head = (sum / n as f64).ln() / p;
            let mut verb = head;
            let mut stand = head;
            for (j, d) in dual.iter().enumerate() {
                let pj = exps.get(j);
                if pj == 1.0 {
                    let m = log_max(d);
                    verb += m;
                    stand += m;
                } else {
                    let a = log_mean(d);
                    verb += a / pj;
                    stand += a / exps.conjugate(j);
                }
            }
            (verb.exp(), stand.exp())
        });
        for (c, (v, st)) in vals.into_iter().enumerate() {
            let i = lat.interval_at(s, c);
            if best_v.is_none_or(|(b, _)| v > b) {
                best_v = Some((v, i));
            }
            if best_s.is_none_or(|(b, _)| st > b) {
                best_s = Some((st, i));
            }
        }
    }
    Ok(ApReport {
        verbatim: best_v.map_or(0.0, |b| b.0),
        verbatim_maximizer: best_v.map(|b| b.1),
        standard: best_s.map_or(0.0, |b| b.0),
        standard_maximizer: best_s.map(|b| b.1),
    })
}

/// `(∫ |f|^p ω)^{1/p}`; `ω` must be positive wherever `f` is nonzero.
pub fn weighted_lp_norm(f: &StepFunction, p: f64, w: &StepFunction) -> Result<f64> {
    if !(p > 0.0) {
        return Err(DyadError::NonPositiveExponent(p));
    }
    if w.values().iter().any(|&v| !(v > 0.0)) {
        return Err(DyadError::NonPositiveWeight);
    }
    let (a, b) = f.common_grid(w)?;
    let av = a.values();
    let bv = b.values();
    if av.iter().zip(bv).any(|(x, y)| *x != 0.0 && *y <= 0.0) {
        return Err(DyadError::NonPositiveWeight);
    }
    let mass = par::sum_map(av.len(), |j| av[j].abs().powf(p) * bv[j]) * a.cell_measure();
    Ok(mass.powf(1.0 / p))
}

/// `M_s^d f(x) = sup_{I ∋ x} ((1/|I|) ∫_I |f|^s)^{1/s}` over lattice cubes.
pub fn dyadic_maximal(f: &StepFunction, lat: &TruncatedLattice, s: f64) -> Result<StepFunction> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(DyadError::InvalidParameter(format!(
            "maximal exponent must be >= 1, got {s}"
        )));
    }
    let g = f.to_lattice(lat)?;
    let pw: Vec<f64> = par::map_slice(g.values(), |v| if s == 1.0 { v.abs() } else { v.abs().powf(s) });
    let levels: Vec<Vec<f64>> = (lat.fine()..=lat.top())
        .rev()
        .map(|k| {
            par::map(lat.cells(k), |c| {
                let mut sum = 0.0;
                let mut n = 0usize;
                visit_cube(lat, &pw, k, c, |x| {
                    sum += x;
                    n += 1;
                });
                sum / n as f64
            })
        })
        .collect();
    let sup = sup_over_ancestors(lat, levels);
    let values = if s == 1.0 {
        sup
    } else {
        par::map_slice(&sup, |v| v.powf(1.0 / s))
    };
    StepFunction::on_lattice(lat, values)
}

/// `M^# f(x) = sup_{I ∋ x} (1/|I|) ∫_I |f - ⟨f⟩_I|` over lattice cubes.
pub fn sharp_maximal(f: &StepFunction, lat: &TruncatedLattice) -> Result<StepFunction> {
    let g = f.to_lattice(lat)?;
    let levels = oscillation_levels(lat, g.values());
    StepFunction::on_lattice(lat, sup_over_ancestors(lat, levels))
}

/// `Φ^{(m)}(t)` with `Φ(t) = t (1 + log⁺ t)`.
pub fn phi(t: f64, iterations: u32) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(DyadError::NegativeArgument(t));
    }
    if iterations == 0 {
        return Err(DyadError::InvalidParameter("Φ needs at least one iteration".into()));
    }
    let mut x = t;
    for _ in 0..iterations {
        x *= 1.0 + x.ln().max(0.0);
    }
    Ok(x)
}
