#![allow(dead_code)]

use dyadlab::{AlphaVector, DyadicInterval, EpsilonSeq, HaarFunction, StepFunction, TruncatedLattice};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random step function on the lattice window, constant on cells of `scale`,
/// with values in `{-8, …, 8}/8` so every integral is exact.
pub fn random_step(lat: &TruncatedLattice, scale: i32, rng: &mut ChaCha8Rng) -> StepFunction {
    let coarse_origin: Vec<i64> = (0..lat.dim()).map(|a| lat.origin(scale, a)).collect();
    let shape: Vec<usize> = (0..lat.dim()).map(|a| lat.per_axis(scale, a) as usize).collect();
    let n: usize = shape.iter().product();
    let values = (0..n).map(|_| rng.gen_range(-8i32..=8) as f64 / 8.0).collect();
    StepFunction::new(scale, &coarse_origin, &shape, values).unwrap()
}

/// Random step function supported in `[lo, hi)` (d = 1) at `scale`.
pub fn random_local(lo: f64, hi: f64, scale: i32, rng: &mut ChaCha8Rng) -> StepFunction {
    let w = 2f64.powi(scale);
    let a = (lo / w).round() as i64;
    let b = (hi / w).round() as i64;
    let values = (a..b).map(|_| rng.gen_range(-8i32..=8) as f64 / 8.0).collect();
    StepFunction::new1(scale, a, values).unwrap()
}

pub fn haar(k: i32, m: i64) -> StepFunction {
    StepFunction::haar(&HaarFunction::standard(DyadicInterval::new1(k, m)), 1.0)
}

pub fn chi(k: i32, m: i64) -> StepFunction {
    StepFunction::indicator(&DyadicInterval::new1(k, m), k, 1.0).unwrap()
}

/// `∫ f h_I` computed by an explicit product of step functions.
pub fn pair_h(f: &StepFunction, i: &DyadicInterval) -> f64 {
    f.inner(&StepFunction::haar(&HaarFunction::standard(*i), 1.0)).unwrap()
}

pub fn pair_chi(f: &StepFunction, i: &DyadicInterval) -> f64 {
    f.inner(&StepFunction::indicator(i, i.scale(), 1.0).unwrap()).unwrap()
}

/// Direct-summation evaluation of `Σ_I w(I) Π_j (⟨f_j, h_I^{1+α_j}⟩/|I|) h_I^{power}`
/// over every enumerated interval, evaluated term by term on a grid.
pub fn multilinear_oracle<W: Fn(&DyadicInterval) -> f64>(
    lat: &TruncatedLattice,
    alpha: &AlphaVector,
    power: u32,
    fs: &[StepFunction],
    weight: W,
) -> StepFunction {
    let mut out = StepFunction::lattice_zeros(lat);
    for i in lat.enumerate() {
        let mut c = weight(&i);
        if c == 0.0 {
            continue;
        }
        for (j, f) in fs.iter().enumerate() {
            let v = if alpha.bit(j) == 0 {
                pair_h(f, &i)
            } else {
                pair_chi(f, &i)
            };
            c *= v / i.measure();
        }
        if c == 0.0 {
            continue;
        }
        let term = if power % 2 == 1 {
            StepFunction::haar(&HaarFunction::standard(i), c)
        } else {
            StepFunction::indicator(&i, i.scale(), c).unwrap()
        };
        out = out.add(&term).unwrap();
    }
    out
}

pub fn eps_random(lat: &TruncatedLattice, rng: &mut ChaCha8Rng) -> EpsilonSeq {
    let mut e = EpsilonSeq::constant(0.5).unwrap();
    for i in lat.enumerate() {
        if rng.gen_bool(0.5) {
            e = e.with(i, rng.gen_range(-4i32..=4) as f64 / 4.0).unwrap();
        }
    }
    e
}

pub fn max_diff(a: &StepFunction, b: &StepFunction) -> f64 {
    a.sub(b).unwrap().sup_abs()
}
