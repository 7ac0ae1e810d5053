//! Named input generators: Haar functions, indicators, hats, the
//! oscillating `L^∞` symbol with its companion input, Lipschitz samples.

use rand::Rng;

use crate::dyadic::{ldexp, DyadicInterval, HaarFunction, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::rng::element_rng;
use crate::stepfn::StepFunction;

/// Generator names with one-line descriptions, as listed by the CLI.
pub const GENERATORS: &[(&str, &str)] = &[
    ("haar", "standard Haar function of a dyadic cube I (params: I, coefficient)"),
    ("indicator", "indicator of a dyadic cube I (params: I, coefficient)"),
    ("hat", "piecewise-linear bump (1-|x-c|/r)_+ sampled at cell centres, tensorised in d=2 (params: center, radius, height)"),
    ("oscillating-symbol", "alternating L^inf symbol sum_k (-1)^k 1_[1-2^(1-k)+2^(-k-1), 1-2^(-k)) truncated at the lattice resolution"),
    ("oscillating-input", "input -2^k0 on [1-2^(1-k0), 1-2^(-k0)) (params: k0)"),
    ("noncompact-family", "inputs f_(I,j) = |I|^(-1/p_j) h_I^(1+alpha_j) (params: I, alpha, exps)"),
    ("linear", "x_1 -> slope * x_1 on the lattice window, Lipschitz constant |slope| (params: slope)"),
    ("lipschitz", "random continuous piecewise-linear function with compact support (params: seed, index, radius)"),
    ("random-step", "random step function with values in [-1,1] (params: seed, index, scale, radius)"),
    ("constant", "constant on the lattice window (params: value)"),
];

pub fn haar(i: &DyadicInterval, c: f64) -> StepFunction {
    StepFunction::haar(&HaarFunction::standard(*i), c)
}

pub fn indicator(i: &DyadicInterval, c: f64) -> Result<StepFunction> {
    StepFunction::indicator(i, i.scale(), c)
}

pub fn constant(lat: &TruncatedLattice, value: f64) -> StepFunction {
    StepFunction::from_cells(lat, |_, _| value)
}

fn hat1(x: f64, c: f64, r: f64) -> f64 {
    (1.0 - (x - c).abs() / r).max(0.0)
}

/// `height · Π_a (1 - |x_a - c_a|/r)_+` at cell centres. The cell values are
/// exact cell averages when `c ± r` and `c` lie on the lattice grid.
pub fn hat(lat: &TruncatedLattice, center: &[f64], radius: f64, height: f64) -> Result<StepFunction> {
    if center.len() != lat.dim() {
        return Err(DyadError::DimensionMismatch {
            expected: lat.dim(),
            got: center.len(),
        });
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(DyadError::InvalidParameter(format!(
            "hat radius must be positive, got {radius}"
        )));
    }
    Ok(StepFunction::from_cells(lat, |lo, hi| {
        (0..lo.len())
            .map(|a| hat1(0.5 * (lo[a] + hi[a]), center[a], radius))
            .product::<f64>()
            * height
    }))
}

/// `Σ_{k=1}^{K} (-1)^k 1_{[1-2^{1-k}+2^{-k-1}, 1-2^{-k})}` with `K = -fine - 1`,
/// the deepest level resolved by the lattice.
pub fn oscillating_symbol(lat: &TruncatedLattice) -> Result<StepFunction> {
    if lat.dim() != 1 {
        return Err(DyadError::RequiresOneDimension);
    }
    if lat.window_lo(0).to_f64() > 0.25 || lat.window_hi(0).to_f64() < 1.0 {
        return Err(DyadError::WindowMismatch("the symbol lives in [1/4, 1)".into()));
    }
    let kmax = -lat.fine() - 1;
    if kmax < 1 {
        return Err(DyadError::DepthViolation(
            "the symbol needs lattice resolution 2^-2 or finer".into(),
        ));
    }
    let pieces: Vec<(f64, f64, f64)> = (1..=kmax)
        .map(|k| {
            let lo = 1.0 - ldexp(1.0, 1 - k) + ldexp(1.0, -k - 1);
            let hi = 1.0 - ldexp(1.0, -k);
            (lo, hi, if k % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect();
    Ok(StepFunction::from_cells(lat, |lo, _| {
        pieces
            .iter()
            .find(|(a, b, _)| lo[0] >= *a && lo[0] < *b)
            .map_or(0.0, |p| p.2)
    }))
}

/// `-2^{k0}` on `2^{-k0}([0,1) + 2^{k0} - 2)`.
pub fn oscillating_input(k0: i32) -> Result<StepFunction> {
    if !(1..=40).contains(&k0) {
        return Err(DyadError::InvalidParameter(format!("k0 must be in 1..=40, got {k0}")));
    }
    let i = DyadicInterval::new1(-k0, (1i64 << k0) - 2);
    indicator(&i, -ldexp(1.0, k0))
}

/// `slope · x_1` on the lattice window.
pub fn linear(lat: &TruncatedLattice, slope: f64) -> StepFunction {
    StepFunction::from_cells(lat, |lo, hi| slope * 0.5 * (lo[0] + hi[0]))
}

/// A step function with a certified Lipschitz bound of the function it samples.
#[derive(Clone, Debug)]
pub struct Lipschitz {
    pub function: StepFunction,
    pub lipschitz: f64,
}

/// Continuous piecewise-linear function on knots of spacing `2^{knot_scale}` in
/// `[-radius, radius]`, vanishing at the ends, values uniform in `[-1, 1]`;
/// in d = 2 the product `u(x_1) v(x_2)` of two such. Cell values are the exact
/// cell averages as long as knots sit on the lattice grid.
pub fn random_lipschitz(
    lat: &TruncatedLattice,
    seed: u64,
    index: u64,
    radius: f64,
    knot_scale: i32,
) -> Result<Lipschitz> {
    if knot_scale < lat.fine() {
        return Err(DyadError::DepthViolation(format!(
            "knot spacing 2^{knot_scale} is finer than the lattice"
        )));
    }
    let h = ldexp(1.0, knot_scale);
    let n = (2.0 * radius / h).round() as usize;
    if n < 2 {
        return Err(DyadError::InvalidParameter(
            "radius must span at least two knot intervals".into(),
        ));
    }
    let mut rng = element_rng(seed, 0x4c49_5053, index);
    let mut draw = || -> Vec<f64> {
        let mut v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        v[0] = 0.0;
        v[n] = 0.0;
        v
    };
    let us: Vec<Vec<f64>> = (0..lat.dim()).map(|_| draw()).collect();
    let eval = |v: &[f64], x: f64| -> f64 {
        let s = (x + radius) / h;
        if s <= 0.0 || s >= n as f64 {
            return 0.0;
        }
        let j = (s.floor() as usize).min(n - 1);
        let w = s - j as f64;
        v[j] * (1.0 - w) + v[j + 1] * w
    };
    let lip1 = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max) / h;
    let sup1 = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let function = StepFunction::from_cells(lat, |lo, hi| {
        (0..lo.len()).map(|a| eval(&us[a], 0.5 * (lo[a] + hi[a]))).product()
    });
    let lipschitz = if lat.dim() == 1 {
        lip1(&us[0])
    } else {
        ((lip1(&us[0]) * sup1(&us[1])).powi(2) + (sup1(&us[0]) * lip1(&us[1])).powi(2)).sqrt()
    };
    Ok(Lipschitz { function, lipschitz })
}

/// Values uniform in `[-1, 1]` on the cells of scale `scale` inside `[-radius, radius)^d`.
pub fn random_step(dim: usize, seed: u64, stream: u64, index: u64, scale: i32, radius: i32) -> Result<StepFunction> {
    if radius < scale {
        return Err(DyadError::InvalidParameter("support radius below the cell size".into()));
    }
    let per = 1usize << (radius - scale + 1);
    let o = -(1i64 << (radius - scale));
    let mut rng = element_rng(seed, stream, index);
    let n = per.pow(dim as u32);
    let values = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    StepFunction::new(scale, &vec![o; dim], &vec![per; dim], values)
}
