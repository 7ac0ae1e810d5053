//! Almost-everywhere continuity of operator outputs on Lipschitz inputs:
//! the fine-scale part of a dyadic shift against its per-cube bound, and
//! local oscillation at sampled non-dyadic points.

use serde::{Deserialize, Serialize};

use crate::dyadic::{ldexp, Dyadic, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::operators::{apply_shift, Operator};
use crate::stepfn::StepFunction;

/// A point is treated as dyadic when it is a dyadic rational this many
/// levels coarser than the lattice resolution (or finer): every `f64` is a
/// dyadic rational, so the cut-off separates cell boundaries from generic points.
pub const DYADIC_MARGIN: i32 = 16;

/// Whether a coordinate lies in the dyadic boundary set at lattice resolution.
pub fn is_dyadic_coordinate(x: f64, lat: &TruncatedLattice) -> Result<bool> {
    let d = Dyadic::from_f64(x)?;
    Ok(d.is_zero() || d.exponent() >= lat.fine() - DYADIC_MARGIN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuityOptions {
    pub k0_grid: Vec<i32>,
    /// Strictly decreasing oscillation radii.
    pub delta_grid: Vec<f64>,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions {
            k0_grid: (1..=4).collect(),
            delta_grid: (0..=12).map(|e| ldexp(1.0, -e)).collect(),
        }
    }
}

/// Fine-scale contribution `F_{k0} = Σ_{l(I) ≤ 2^{-k0}} (terms of I)` against
/// `2^{-m+1} √d Lip(f) Σ_{l(I) ≤ 2^{-k0}, I ∋ x} l(I)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FineScaleRow {
    pub k0: i32,
    /// `2 sup |F_{k0}|`, the largest jump the fine scales can produce.
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationRow {
    pub point: Vec<f64>,
    pub delta: Vec<f64>,
    pub oscillation: Vec<f64>,
    pub nonincreasing: bool,
    /// Oscillation at the smallest radius.
    pub last: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub operator: String,
    pub lipschitz: f64,
    /// Empty unless the operator is a dyadic shift.
    pub fine_scale: Vec<FineScaleRow>,
    pub oscillation: Vec<OscillationRow>,
    pub margins_nonnegative: bool,
    pub oscillation_nonincreasing: bool,
}

impl ContinuityReport {
    pub fn met(&self) -> bool {
        self.margins_nonnegative && self.oscillation_nonincreasing
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "kind,k0_or_point,delta [length],measured [sup-norm jump or oscillation],bound [sup-norm],margin\n",
        );
        for r in &self.fine_scale {
            out.push_str(&format!(
                "fine_scale,{},,{:e},{:e},{:e}\n",
                r.k0, r.measured, r.bound, r.margin
            ));
        }
        for r in &self.oscillation {
            let pt = r.point.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
            for (d, o) in r.delta.iter().zip(&r.oscillation) {
                out.push_str(&format!("oscillation,{pt},{d:e},{o:e},,\n"));
            }
        }
        out
    }
}

/// Continuity diagnostics for `op` applied to Lipschitz-class inputs `fs`
/// whose sampled functions have Lipschitz bound `lipschitz`.
pub fn continuity_probe(
    op: &Operator,
    fs: &[StepFunction],
    lipschitz: f64,
    lat: &TruncatedLattice,
    points: &[Vec<f64>],
    opts: &ContinuityOptions,
) -> Result<ContinuityReport> {
    if opts.delta_grid.is_empty() || points.is_empty() {
        return Err(DyadError::Empty("continuity sample points or radii".into()));
    }
    if opts.delta_grid.windows(2).any(|w| !(w[1] < w[0])) || opts.delta_grid.iter().any(|&d| !(d > 0.0)) {
        return Err(DyadError::InvalidParameter(
            "oscillation radii must be positive and strictly decreasing".into(),
        ));
    }
    if !(lipschitz >= 0.0) {
        return Err(DyadError::InvalidParameter(format!(
            "Lipschitz bound must be nonnegative, got {lipschitz}"
        )));
    }
    for x in points {
        if x.len() != lat.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: lat.dim(),
                got: x.len(),
            });
        }
        for &c in x {
            if is_dyadic_coordinate(c, lat)? {
                return Err(DyadError::DyadicSamplePoint(format!("{x:?}")));
            }
        }
    }
    let out = op.apply(fs, lat)?;
    let oscillation = points
        .iter()
        .map(|x| -> Result<OscillationRow> {
            let osc = opts
                .delta_grid
                .iter()
                .map(|&d| out.oscillation(x, d))
                .collect::<Result<Vec<_>>>()?;
            Ok(OscillationRow {
                point: x.clone(),
                delta: opts.delta_grid.clone(),
                nonincreasing: osc.windows(2).all(|w| w[1] <= w[0]),
                last: *osc.last().expect("nonempty"),
                oscillation: osc,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut fine_scale = Vec::new();
    if let Operator::Shift(spec) = op {
        let d = lat.dim() as f64;
        let f = fs[0].to_lattice(lat)?;
        for &k0 in &opts.k0_grid {
            let fine = spec.filtered(|t| t.interval.scale() <= -k0);
            let measured = 2.0 * apply_shift(&fine, &f, lat)?.sup_abs();
            let smallest = fine.terms().iter().map(|t| t.interval.scale()).min();
            let lengths: f64 = smallest.map_or(0.0, |s0| (s0..=-k0).map(|s| ldexp(1.0, s)).sum());
            let bound = ldexp(1.0, 1 - spec.m() as i32) * d.sqrt() * lipschitz * lengths;
            fine_scale.push(FineScaleRow {
                k0,
                measured,
                bound,
                margin: bound - measured,
            });
        }
    }
    Ok(ContinuityReport {
        operator: op.name().to_string(),
        lipschitz,
        margins_nonnegative: fine_scale.iter().all(|r| r.margin >= 0.0),
        oscillation_nonincreasing: oscillation.iter().all(|r| r.nonincreasing),
        fine_scale,
        oscillation,
    })
}

/// `count` deterministic non-dyadic sample points in `[-r, r)^d` from the
/// golden-ratio sequence.
pub fn sample_points(lat: &TruncatedLattice, count: usize, r: f64) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(count);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut k = 0u64;
    while out.len() < count {
        k += 1;
        let pt: Vec<f64> = (0..lat.dim())
            .map(|a| {
                let u = ((k as f64 + a as f64 * 0.5) * golden).fract();
                -r + 2.0 * r * u
            })
            .collect();
        let mut ok = true;
        for &c in &pt {
            ok &= !is_dyadic_coordinate(c, lat)?;
        }
        if ok {
            out.push(pt);
        }
    }
    Ok(out)
}
