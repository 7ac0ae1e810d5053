//! Deterministic unit-ball batches: a dictionary of normalized Haar and
//! indicator atoms plus random step functions with per-element seeds.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, HaarFunction, TruncatedLattice};
use crate::error::Result;
use crate::generators::random_step;
use crate::operators::Exponents;
use crate::rng::element_rng;
use crate::stepfn::StepFunction;

/// Batch composition; the defaults are 64 random members on top of the dictionary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatchConfig {
    pub seed: u64,
    pub random: usize,
    pub dictionary: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            seed: 0,
            random: 64,
            dictionary: true,
        }
    }
}

/// One input tuple `f⃗` with `‖f_j‖_{p_j} = 1`.
#[derive(Clone, Debug)]
pub struct Member {
    pub label: String,
    pub inputs: Vec<StepFunction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Haar,
    Chi,
}

/// `f / ‖f‖_p`, or `None` for the zero function.
pub fn normalized(f: &StepFunction, p: f64) -> Result<Option<StepFunction>> {
    let n = f.lp_norm(p)?;
    Ok((n > 0.0).then(|| f.scaled(1.0 / n)))
}

/// Unit-norm Haar function or indicator of `i`.
pub fn atom(i: &DyadicInterval, kind: Atom, p: f64) -> Result<StepFunction> {
    let f = match kind {
        Atom::Haar => StepFunction::haar(&HaarFunction::standard(*i), 1.0),
        Atom::Chi => StepFunction::indicator(i, i.scale(), 1.0)?,
    };
    Ok(normalized(&f, p)?.expect("atoms are nonzero"))
}

/// Cubes of side `2^ℓ ≥ 1` with a corner at the origin, one per orthant.
pub fn orthant_cubes(lat: &TruncatedLattice) -> Vec<DyadicInterval> {
    let mut out = Vec::new();
    for l in (lat.fine() + 1).max(0)..=lat.top() {
        for corner in 0..(1usize << lat.dim()) {
            let idx: Vec<i64> = (0..lat.dim())
                .map(|a| if corner >> a & 1 == 1 { -1 } else { 0 })
                .collect();
            let i = DyadicInterval::new(l, &idx).expect("valid cube");
            if lat.contains_interval(&i) {
                out.push(i);
            }
        }
    }
    out
}

/// Cubes around the unit cube containing a few fixed points (±1/3, ±2/3 and
/// the cells touching the origin), at scales `0` down to `max(fine + 1, -depth)`.
pub fn near_cubes(lat: &TruncatedLattice, depth: i32) -> Vec<DyadicInterval> {
    let pts1 = [1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, 1e-9, -1e-9];
    let pts: Vec<Vec<f64>> = if lat.dim() == 1 {
        pts1.iter().map(|&x| vec![x]).collect()
    } else {
        vec![
            vec![1.0 / 3.0, 1.0 / 3.0],
            vec![-1.0 / 3.0, -1.0 / 3.0],
            vec![1.0 / 3.0, -2.0 / 3.0],
            vec![-2.0 / 3.0, 1.0 / 3.0],
            vec![1e-9, 1e-9],
            vec![-1e-9, -1e-9],
        ]
    };
    let mut out: Vec<DyadicInterval> = Vec::new();
    let lo = (lat.fine() + 1).max(-depth);
    for s in (lo..=0.min(lat.top())).rev() {
        let w = crate::dyadic::ldexp(1.0, s);
        for x in &pts {
            let idx: Vec<i64> = x.iter().map(|c| (c / w).floor() as i64).collect();
            let i = DyadicInterval::new(s, &idx).expect("valid cube");
            if lat.contains_interval(&i) && !out.contains(&i) {
                out.push(i);
            }
        }
    }
    out
}

/// For every cube all `2^m` assignments of Haar/indicator atoms to the slots.
pub fn dictionary(cubes: &[DyadicInterval], exps: &Exponents) -> Result<Vec<Member>> {
    let m = exps.len();
    let mut out = Vec::new();
    for i in cubes {
        for mask in 0..(1usize << m) {
            let inputs = (0..m)
                .map(|j| {
                    let kind = if mask >> j & 1 == 0 { Atom::Haar } else { Atom::Chi };
                    atom(i, kind, exps.get(j))
                })
                .collect::<Result<Vec<_>>>()?;
            let kinds: String = (0..m).map(|j| if mask >> j & 1 == 0 { 'h' } else { 'c' }).collect();
            out.push(Member {
                label: format!("{kinds}@{i}"),
                inputs,
            });
        }
    }
    Ok(out)
}

/// Copies of `members` with slot `slot` (0-based) replaced by each of `atoms`.
pub fn with_slot(members: &[Member], slot: usize, atoms: &[(String, StepFunction)]) -> Vec<Member> {
    let mut out = Vec::new();
    for m in members {
        for (name, a) in atoms {
            let mut inputs = m.inputs.clone();
            inputs[slot] = a.clone();
            out.push(Member {
                label: format!("{}[{}:={}]", m.label, slot + 1, name),
                inputs,
            });
        }
    }
    out
}

/// Random unit-norm step inputs: support `[-2^r, 2^r)^d` with `r` drawn in
/// `0..=top` (clipped to the window), at most 128 cells per axis, no finer than the lattice.
pub fn random_members(
    lat: &TruncatedLattice,
    exps: &Exponents,
    seed: u64,
    stream: u64,
    count: usize,
) -> Result<Vec<Member>> {
    use rand::Rng;
    let m = exps.len();
    let fits = |r: i32| {
        let w = crate::dyadic::ldexp(1.0, r);
        (0..lat.dim()).all(|a| lat.window_lo(a).to_f64() <= -w && lat.window_hi(a).to_f64() >= w)
    };
    let Some(rmax) = (lat.fine()..=lat.top()).rev().find(|&r| fits(r)) else {
        return Ok(Vec::new());
    };
    let rmin = 0.min(rmax);
    let mut out = Vec::with_capacity(count);
    for k in 0..count as u64 {
        let mut rng = element_rng(seed, stream, k);
        let mut inputs = Vec::with_capacity(m);
        for j in 0..m {
            let r = rng.gen_range(rmin..=rmax);
            let scale = (r - 6).max(lat.fine());
            let f = random_step(lat.dim(), seed, stream.wrapping_add(1 + j as u64), k, scale, r)?;
            let f = normalized(&f, exps.get(j))?.unwrap_or(f);
            inputs.push(f);
        }
        out.push(Member {
            label: format!("random#{k}"),
            inputs,
        });
    }
    Ok(out)
}

/// Dictionary on orthant and near-origin cubes followed by random members.
pub fn unit_ball_batch(
    lat: &TruncatedLattice,
    exps: &Exponents,
    cfg: &BatchConfig,
    stream: u64,
) -> Result<Vec<Member>> {
    let mut out = Vec::new();
    if cfg.dictionary {
        let mut cubes = orthant_cubes(lat);
        for i in near_cubes(lat, 10) {
            if !cubes.contains(&i) {
                cubes.push(i);
            }
        }
        out.extend(dictionary(&cubes, exps)?);
    }
    out.extend(random_members(lat, exps, cfg.seed, stream, cfg.random)?);
    Ok(out)
}
