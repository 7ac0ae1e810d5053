//! Decay surrogates for paraproducts and commutators: uniform tail decay
//! `sup ∫_{|x|≥2^k} |·|^p` against `k`, uniform translation moduli against
//! `log₂ |h|`, the exact re-summation identities behind the translation
//! estimates, and the sharp-maximal ratio for shift commutators.

use serde::{Deserialize, Serialize};

use crate::dyadic::{ldexp, Dyadic, DyadicInterval, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::generators::{oscillating_input, oscillating_symbol, random_lipschitz, random_step};
use crate::norms::bmo_dyadic;
use crate::operators::{
    apply_shift, commutator, shift_kernel, AlphaVector, EpsilonSeq, Exponents, MultilinearPlan, Operator, ShiftSpec,
};
use crate::par;
use crate::rng::element_rng;
use crate::stepfn::StepFunction;
use crate::weights::{dyadic_maximal, sharp_maximal};

use super::batch::{atom, normalized, random_members, unit_ball_batch, with_slot, Atom, BatchConfig, Member};
use super::fit::{DecayFit, FitTarget};

const STREAM_PI: u64 = 0x5049;
const STREAM_COMM: u64 = 0x434f_4d4d;
const STREAM_SHIFT: u64 = 0x5348_4946;
const STREAM_SPLIT: u64 = 0x5350_4c54;
const STREAM_MDS: u64 = 0x004d_4453;

/// Grids and tolerances shared by the decay probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayOptions {
    /// Tail radii `2^k`.
    pub k_grid: Vec<i32>,
    /// Translation lengths `|h|` (dyadic).
    pub h_grid: Vec<f64>,
    /// Allowed deviation of the tail slope from its target.
    pub tail_tolerance: f64,
    /// Translation exponents must reach this fraction of their target.
    pub modulus_factor: f64,
    pub batch: BatchConfig,
    /// Random instances for the re-summation identities.
    pub split_instances: usize,
    /// Absolute tolerance of the identities, relative to `max(1, sup |pieces|)`.
    pub split_tolerance: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            k_grid: (1..=6).collect(),
            h_grid: (1..=8).map(|e| ldexp(1.0, -e)).collect(),
            tail_tolerance: 0.3,
            modulus_factor: 0.9,
            batch: BatchConfig::default(),
            split_instances: 100,
            split_tolerance: 1e-10,
        }
    }
}

impl DecayOptions {
    fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() || self.h_grid.is_empty() {
            return Err(DyadError::Empty("decay grids".into()));
        }
        for &h in &self.h_grid {
            Dyadic::from_f64(h)?;
            if !(h > 0.0) {
                return Err(DyadError::InvalidParameter(format!(
                    "translation lengths must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Sup over a batch at every grid point, with the label of the maximizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupProfile {
    pub grid: Vec<f64>,
    pub sup: Vec<f64>,
    pub argmax: Vec<Option<String>>,
}

fn sup_profile(grid: Vec<f64>, rows: &[(String, Vec<f64>)]) -> SupProfile {
    let n = grid.len();
    let mut sup = vec![0.0; n];
    let mut argmax = vec![None; n];
    for (label, vals) in rows {
        for g in 0..n {
            if argmax[g].is_none() || vals[g] > sup[g] {
                sup[g] = vals[g];
                argmax[g] = Some(label.clone());
            }
        }
    }
    SupProfile { grid, sup, argmax }
}

fn e1(dim: usize, h: f64) -> Result<Vec<Dyadic>> {
    let mut v = vec![Dyadic::ZERO; dim];
    v[0] = Dyadic::from_f64(h)?;
    Ok(v)
}

/// Per member: tail masses at `2^k` and translation moduli at each `h`.
fn tails_and_moduli<F>(
    members: &[Member],
    p: f64,
    opts: &DecayOptions,
    moduli: bool,
    op: F,
) -> Result<(SupProfile, SupProfile, bool)>
where
    F: Fn(&Member) -> Result<StepFunction> + Sync + Send,
{
    let rows = par::map_slice(members, |m| -> Result<(String, Vec<f64>, Vec<f64>, bool)> {
        let g = op(m)?;
        let tails = opts
            .k_grid
            .iter()
            .map(|&k| g.tail_mass(ldexp(1.0, k), p))
            .collect::<Result<Vec<_>>>()?;
        let mods = if moduli {
            opts.h_grid
                .iter()
                .map(|&h| g.translation_modulus(&e1(g.dim(), h)?, p))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok((m.label.clone(), tails, mods, g.is_zero()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let zero = rows.iter().all(|r| r.3);
    let tails: Vec<(String, Vec<f64>)> = rows.iter().map(|r| (r.0.clone(), r.1.clone())).collect();
    let mods: Vec<(String, Vec<f64>)> = rows.iter().map(|r| (r.0.clone(), r.2.clone())).collect();
    let tail = sup_profile(opts.k_grid.iter().map(|&k| k as f64).collect(), &tails);
    let modulus = if moduli {
        sup_profile(opts.h_grid.clone(), &mods)
    } else {
        SupProfile {
            grid: Vec::new(),
            sup: Vec::new(),
            argmax: Vec::new(),
        }
    };
    Ok((tail, modulus, zero))
}

/// `b` must be supported in `[-1, 1]^d`; constants are let through since
/// their commutators vanish identically.
fn check_support(b: &StepFunction) -> Result<()> {
    let v = b.values();
    if v.iter().all(|&x| x == v[0]) {
        return Ok(());
    }
    if let Some(bx) = b.support_box() {
        if bx.iter().any(|&(lo, hi)| lo < -1.0 || hi > 1.0) {
            return Err(DyadError::SupportViolation(format!(
                "symbol support {bx:?} leaves [-1, 1]^d"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub p: f64,
    pub batch_size: usize,
    pub identically_zero: bool,
    pub tail_profile: SupProfile,
    pub tail: DecayFit,
    pub modulus_profile: SupProfile,
    pub modulus: Option<DecayFit>,
    pub split: Option<SplitCheck>,
    pub mds: Option<MdsStats>,
}

impl DecayReport {
    /// All configured targets met.
    pub fn met(&self) -> bool {
        self.tail.met()
            && self.modulus.as_ref().is_none_or(DecayFit::met)
            && self.split.as_ref().is_none_or(|s| s.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("profile,grid [k or |h|],sup_over_batch [tail: p-th power mass; translation: L^p quasi-norm],log2_sup,argmax\n");
        let mut rows = |name: &str, prof: &SupProfile| {
            for g in 0..prof.grid.len() {
                let v = prof.sup[g];
                let l = if v > 0.0 {
                    format!("{:e}", v.log2())
                } else {
                    String::new()
                };
                out.push_str(&format!(
                    "{name},{:e},{:e},{l},{}\n",
                    prof.grid[g],
                    v,
                    prof.argmax[g].as_deref().unwrap_or("")
                ));
            }
        };
        rows("tail", &self.tail_profile);
        rows("translation", &self.modulus_profile);
        out
    }
}

fn tail_fit(prof: &SupProfile, target: f64, tol: f64) -> DecayFit {
    DecayFit::fit(&prof.grid, &prof.sup, FitTarget::Within { target, tolerance: tol })
}

fn modulus_fit(prof: &SupProfile, bound: f64) -> DecayFit {
    let xs: Vec<f64> = prof.grid.iter().map(|h| h.log2()).collect();
    DecayFit::fit(&xs, &prof.sup, FitTarget::AtLeast { bound })
}

/// Tail decay (target slope `-p`) and translation modulus (target exponent
/// `min(1, 1/p)`, accepted from `modulus_factor` times that) of `π_b^α` over a
/// unit-ball batch. `b` must be supported in `[-1, 1]`.
pub fn pi_compactness_probe(
    b: &StepFunction,
    alpha: &AlphaVector,
    exps: &Exponents,
    lat: &TruncatedLattice,
    opts: &DecayOptions,
) -> Result<DecayReport> {
    opts.validate()?;
    if alpha.len() != exps.len() {
        return Err(DyadError::ArityMismatch {
            expected: alpha.len(),
            got: exps.len(),
        });
    }
    let bl = b.to_lattice(lat)?;
    check_support(&bl)?;
    let members = unit_ball_batch(lat, exps, &opts.batch, STREAM_PI)?;
    let (tail_profile, modulus_profile, zero) = tails_and_moduli(&members, exps.p(), opts, true, |m| {
        MultilinearPlan::new(&m.inputs, lat)?.pi(&bl, alpha)
    })?;
    let p = exps.p();
    Ok(DecayReport {
        p,
        batch_size: members.len(),
        identically_zero: zero,
        tail: tail_fit(&tail_profile, -p, opts.tail_tolerance),
        modulus: Some(modulus_fit(
            &modulus_profile,
            opts.modulus_factor * (1.0f64).min(1.0 / p),
        )),
        tail_profile,
        modulus_profile,
        split: None,
        mds: None,
    })
}

/// Translation moduli for the oscillating `L^∞` symbol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillatingSymbolRow {
    pub k0: i32,
    pub t: Vec<f64>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub raw_min: f64,
    pub normalized_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillatingSymbolReport {
    pub p: f64,
    pub c: f64,
    pub rows: Vec<OscillatingSymbolRow>,
    /// Every normalized modulus stays at or above `c`.
    pub normalized_stays_above: bool,
    pub raw_stays_above: bool,
}

impl OscillatingSymbolReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k0,t [length],raw_modulus [L^p quasi-norm],normalized_modulus [L^p quasi-norm]\n");
        for r in &self.rows {
            for j in 0..r.t.len() {
                out.push_str(&format!("{},{:e},{:e},{:e}\n", r.k0, r.t[j], r.raw[j], r.normalized[j]));
            }
        }
        out
    }
}

/// Default translation factors: `t = 2^{-k0} · {1, 1.5, …, 5.5}`, covering
/// `[2^{-k0}, 3·2^{-k0+1})`.
pub fn oscillation_factors() -> Vec<f64> {
    (0..10).map(|j| 1.0 + 0.5 * j as f64).collect()
}

/// `‖π_b^α(f⃗)(·+t) - π_b^α(f⃗)‖_p` for the oscillating symbol and
/// `f_j = f_{k0}^{1-α_j}` (`0⁰ = 0`), raw and rescaled to unit `L^{p_j}` norm.
pub fn oscillating_symbol_probe(
    k0_grid: &[i32],
    alpha: &AlphaVector,
    exps: &Exponents,
    lat: &TruncatedLattice,
    factors: &[f64],
    c: f64,
) -> Result<OscillatingSymbolReport> {
    if lat.dim() != 1 {
        return Err(DyadError::RequiresOneDimension);
    }
    if alpha.len() != exps.len() {
        return Err(DyadError::ArityMismatch {
            expected: alpha.len(),
            got: exps.len(),
        });
    }
    if k0_grid.is_empty() || factors.is_empty() {
        return Err(DyadError::Empty("k0 or translation grid".into()));
    }
    for &f in factors {
        if !(1.0..6.0).contains(&f) {
            return Err(DyadError::InvalidParameter(format!(
                "translation factor {f} outside [1, 6): t must lie in [2^-k0, 3*2^(1-k0))"
            )));
        }
    }
    let b = oscillating_symbol(lat)?;
    let p = exps.p();
    let mut rows = Vec::new();
    for &k0 in k0_grid {
        if -k0 - 2 < lat.fine() {
            return Err(DyadError::DepthViolation(format!(
                "k0 = {k0} needs lattice resolution 2^{} or finer",
                -k0 - 2
            )));
        }
        let f = oscillating_input(k0)?;
        let chi = f.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
        let raw: Vec<StepFunction> = (0..alpha.len())
            .map(|j| if alpha.bit(j) == 0 { f.clone() } else { chi.clone() })
            .collect();
        let unit = raw
            .iter()
            .enumerate()
            .map(|(j, g)| Ok(normalized(g, exps.get(j))?.expect("nonzero")))
            .collect::<Result<Vec<_>>>()?;
        let out_raw = MultilinearPlan::new(&raw, lat)?.pi(&b, alpha)?;
        let out_unit = MultilinearPlan::new(&unit, lat)?.pi(&b, alpha)?;
        let ts: Vec<f64> = factors.iter().map(|x| x * ldexp(1.0, -k0)).collect();
        let modulus = |g: &StepFunction| -> Result<Vec<f64>> {
            ts.iter()
                .map(|&t| g.translation_modulus(&[Dyadic::from_f64(t)?], p))
                .collect()
        };
        let raw_m = modulus(&out_raw)?;
        let unit_m = modulus(&out_unit)?;
        rows.push(OscillatingSymbolRow {
            k0,
            raw_min: raw_m.iter().copied().fold(f64::INFINITY, f64::min),
            normalized_min: unit_m.iter().copied().fold(f64::INFINITY, f64::min),
            t: ts,
            raw: raw_m,
            normalized: unit_m,
        });
    }
    Ok(OscillatingSymbolReport {
        p,
        c,
        normalized_stays_above: rows.iter().all(|r| r.normalized_min >= c),
        raw_stays_above: rows.iter().all(|r| r.raw_min >= c),
        rows,
    })
}

/// Outcome of an exact re-summation identity over random instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitCheck {
    pub instances: usize,
    /// `max sup |Σ pieces - direct|`.
    pub max_abs_error: f64,
    /// Largest `sup |piece|` seen; the tolerance is relative to `max(1, ·)`.
    pub max_scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn finish_split(errors: Vec<(f64, f64)>, tolerance: f64) -> SplitCheck {
    let mut max_abs_error: f64 = 0.0;
    let mut max_scale: f64 = 0.0;
    let mut passed = true;
    for (e, s) in &errors {
        max_abs_error = max_abs_error.max(*e);
        max_scale = max_scale.max(*s);
        passed &= *e <= tolerance * s.max(1.0);
    }
    SplitCheck {
        instances: errors.len(),
        max_abs_error,
        max_scale,
        tolerance,
        passed,
    }
}

fn split_error(pieces: &[(f64, &StepFunction)], direct: &StepFunction) -> Result<(f64, f64)> {
    let mut sum = direct.scaled(-1.0);
    let mut scale = direct.sup_abs();
    for (sign, piece) in pieces {
        sum = sum.add(&piece.scaled(*sign))?;
        scale = scale.max(piece.sup_abs());
    }
    Ok((sum.sup_abs(), scale))
}

fn eps_alpha(op: &Operator) -> Result<(EpsilonSeq, AlphaVector)> {
    match op {
        Operator::T {
            eps,
            alpha,
            use_tops: false,
        } => Ok((eps.clone(), alpha.clone())),
        Operator::P { alpha } => Ok((EpsilonSeq::ones(), alpha.clone())),
        _ => Err(DyadError::InvalidParameter(format!(
            "commutator probe needs a T or P handle without top averages, got {}",
            op.name()
        ))),
    }
}

/// The five-term decomposition of `[b,T]_i(f⃗)(x+h) - [b,T]_i(f⃗)(x)`, returned
/// as `(pieces with signs, direct difference)`; `b(x_I)` is `b` at the centre of `I`.
pub fn commutator_split(
    b: &StepFunction,
    eps: &EpsilonSeq,
    alpha: &AlphaVector,
    slot: usize,
    fs: &[StepFunction],
    lat: &TruncatedLattice,
    h: f64,
) -> Result<(Vec<(f64, StepFunction)>, StepFunction)> {
    if slot == 0 || slot > alpha.len() {
        return Err(DyadError::SlotOutOfRange {
            index: slot,
            arity: alpha.len(),
        });
    }
    let plan = MultilinearPlan::new(fs, lat)?;
    let sigma = alpha.sigma();
    let tf = plan.t(eps, alpha, false)?;
    let mut moved = fs.to_vec();
    moved[slot - 1] = b.mul(&fs[slot - 1])?;
    let tb = MultilinearPlan::new(&moved, lat)?.t(eps, alpha, false)?;
    let tc = plan.weighted(alpha, sigma, |i: &DyadicInterval| eps.value(i) * b.eval(&i.center()))?;
    let sh = |g: &StepFunction| g.translate(&[Dyadic::from_f64(h)?]);
    let (bh, tfh, tbh, tch) = (sh(b)?, sh(&tf)?, sh(&tb)?, sh(&tc)?);
    let i1 = bh.sub(b)?.mul(&tfh)?;
    let i2 = b.mul(&tfh)?.sub(&tch)?;
    let i3 = tch.sub(&tbh)?;
    let i4 = b.mul(&tf)?.sub(&tc)?;
    let i5 = tc.sub(&tb)?;
    let c = b.mul(&tf)?.sub(&tb)?;
    let direct = sh(&c)?.sub(&c)?;
    Ok((vec![(1.0, i1), (1.0, i2), (1.0, i3), (-1.0, i4), (-1.0, i5)], direct))
}

/// The three-term decomposition of `[b,S]f(x+h e_1) - [b,S]f(x)`, with
/// `b(x_{I'})` taken at the centre of each source cube.
pub fn shift_commutator_split(
    b: &StepFunction,
    spec: &ShiftSpec,
    f: &StepFunction,
    lat: &TruncatedLattice,
    h: f64,
) -> Result<(Vec<(f64, StepFunction)>, StepFunction)> {
    let fl = f.to_lattice(lat)?;
    let sf = apply_shift(spec, &fl, lat)?;
    let sbf = apply_shift(spec, &b.mul(&fl)?, lat)?;
    let sc = shift_kernel(
        lat,
        &fl,
        spec.source_pattern(),
        spec.target_pattern(),
        spec.terms(),
        |t| t.lambda * b.eval(&t.source.center()),
    )?;
    let v = e1(lat.dim(), h)?;
    let sh = |g: &StepFunction| g.translate(&v);
    let delta = |g: &StepFunction| -> Result<StepFunction> { sh(g)?.sub(g) };
    let ii1 = sh(b)?.sub(b)?.mul(&sh(&sf)?)?;
    let ii2 = b.mul(&delta(&sf)?)?.sub(&delta(&sc)?)?;
    let ii3 = delta(&sbf)?.sub(&delta(&sc)?)?.scaled(-1.0);
    let c = b.mul(&sf)?.sub(&sbf)?;
    Ok((vec![(1.0, ii1), (1.0, ii2), (1.0, ii3)], delta(&c)?))
}

fn unit_near_atoms(lat: &TruncatedLattice, p: f64) -> Result<Vec<(String, StepFunction)>> {
    let mut out = Vec::new();
    for s in [0, -1] {
        if s <= lat.fine() {
            continue;
        }
        let idx = [0i64, -1];
        let cubes: Vec<DyadicInterval> = if lat.dim() == 1 {
            idx.iter().map(|&m| DyadicInterval::new1(s, m)).collect()
        } else {
            idx.iter()
                .flat_map(|&a| idx.iter().map(move |&c| DyadicInterval::new2(s, a, c)))
                .collect()
        };
        for i in cubes {
            if !lat.contains_interval(&i) {
                continue;
            }
            out.push((format!("c{i}"), atom(&i, Atom::Chi, p)?));
            out.push((format!("h{i}"), atom(&i, Atom::Haar, p)?));
        }
    }
    Ok(out)
}

/// Tail decay (target `-p/p_i'`) and translation modulus (exponent at least
/// `modulus_bound`) of `[b, T_ε^α]_i` over a unit-ball batch, plus the exact
/// five-term identity on `split_instances` random inputs and translations.
pub fn commutator_compactness_probe(
    b: &StepFunction,
    op: &Operator,
    slot: usize,
    exps: &Exponents,
    lat: &TruncatedLattice,
    opts: &DecayOptions,
    modulus_bound: f64,
) -> Result<DecayReport> {
    opts.validate()?;
    let (eps, alpha) = eps_alpha(op)?;
    if alpha.len() != exps.len() {
        return Err(DyadError::ArityMismatch {
            expected: alpha.len(),
            got: exps.len(),
        });
    }
    if slot == 0 || slot > alpha.len() {
        return Err(DyadError::SlotOutOfRange {
            index: slot,
            arity: alpha.len(),
        });
    }
    let bl = b.to_lattice(lat)?;
    check_support(&bl)?;
    let mut members = unit_ball_batch(lat, exps, &opts.batch, STREAM_COMM)?;
    if opts.batch.dictionary {
        let base = super::batch::dictionary(&super::batch::orthant_cubes(lat), exps)?;
        members.extend(with_slot(&base, slot - 1, &unit_near_atoms(lat, exps.get(slot - 1))?));
    }
    let handle = Operator::T {
        eps: eps.clone(),
        alpha: alpha.clone(),
        use_tops: false,
    };
    let (tail_profile, modulus_profile, zero) = tails_and_moduli(&members, exps.p(), opts, true, |m| {
        commutator(&bl, &handle, slot, &m.inputs, lat)
    })?;
    let p = exps.p();
    let target = -p / exps.conjugate(slot - 1);

    let randoms = random_members(lat, exps, opts.batch.seed, STREAM_SPLIT, opts.split_instances)?;
    let errors = par::map(randoms.len(), |k| -> Result<(f64, f64)> {
        use rand::Rng;
        let mut rng = element_rng(opts.batch.seed, STREAM_SPLIT + 1, k as u64);
        let h = opts.h_grid[rng.gen_range(0..opts.h_grid.len())] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (pieces, direct) = commutator_split(&bl, &eps, &alpha, slot, &randoms[k].inputs, lat, h)?;
        split_error(&pieces.iter().map(|(s, g)| (*s, g)).collect::<Vec<_>>(), &direct)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(DecayReport {
        p,
        batch_size: members.len(),
        identically_zero: zero,
        tail: tail_fit(&tail_profile, target, opts.tail_tolerance),
        modulus: Some(modulus_fit(&modulus_profile, modulus_bound)),
        tail_profile,
        modulus_profile,
        split: Some(finish_split(errors, opts.split_tolerance)),
        mds: None,
    })
}

/// Sharp-maximal ratio `M^#([b,S]f) / (‖b‖_{BMO^d} (M_s^d(Sf) + M_s^d f))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MdsSample {
    pub sup_ratio: f64,
    /// Cells where the numerator is nonzero but the denominator vanishes.
    pub skipped: usize,
}

/// The ratio for one `(b, f)`, evaluated on the lattice refined to the
/// output resolution of the shift.
pub fn sharp_maximal_ratio(
    b: &StepFunction,
    f: &StepFunction,
    spec: &ShiftSpec,
    lat: &TruncatedLattice,
    s: f64,
) -> Result<MdsSample> {
    let shift = Operator::Shift(spec.clone());
    let sf = shift.apply(std::slice::from_ref(f), lat)?;
    let c = commutator(b, &shift, 1, std::slice::from_ref(f), lat)?;
    let res = sf.scale().min(c.scale()).min(lat.fine());
    let fine_lat = lat.with_depth(-res)?;
    let num = sharp_maximal(&c, &fine_lat)?;
    let bmo = bmo_dyadic(b, lat)?.value;
    let den = dyadic_maximal(&sf, &fine_lat, s)?.add(&dyadic_maximal(f, &fine_lat, s)?)?;
    let mut sup_ratio: f64 = 0.0;
    let mut skipped = 0;
    for (n, d) in num.values().iter().zip(den.values()) {
        if *n == 0.0 {
            continue;
        }
        let d = bmo * d;
        if d == 0.0 {
            skipped += 1;
        } else {
            sup_ratio = sup_ratio.max(n / d);
        }
    }
    Ok(MdsSample { sup_ratio, skipped })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MdsStats {
    pub instances: usize,
    pub s: f64,
    pub sup_ratio: f64,
    pub median_ratio: f64,
    pub skipped: usize,
}

/// Resolution-independent random pair: `b` piecewise linear on `[-1, 1]^d`
/// (knots `2^-2`), `f` piecewise linear on `[-2, 2]^d` (knots `2^-3`) plus a
/// random step at scale `-2` on `[-2, 2)^d`.
pub fn mds_instance(lat: &TruncatedLattice, seed: u64, index: u64) -> Result<(StepFunction, StepFunction)> {
    let b = random_lipschitz(lat, seed, 2 * index, 1.0, -2)?.function;
    let smooth = random_lipschitz(lat, seed, 2 * index + 1, 2.0, -3)?.function;
    let step = random_step(lat.dim(), seed, STREAM_MDS, index, -2, 1)?;
    Ok((b, smooth.add(&step)?.to_lattice(lat)?))
}

/// Sharp-maximal ratio statistics over `count` instances from [`mds_instance`].
pub fn mds_batch(spec: &ShiftSpec, lat: &TruncatedLattice, seed: u64, count: usize, s: f64) -> Result<MdsStats> {
    if count == 0 {
        return Err(DyadError::Empty("sharp-maximal batch".into()));
    }
    let samples = par::map(count, |k| -> Result<MdsSample> {
        let (b, f) = mds_instance(lat, seed, k as u64)?;
        sharp_maximal_ratio(&b, &f, spec, lat, s)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut ratios: Vec<f64> = samples.iter().map(|x| x.sup_ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median_ratio = if count % 2 == 1 {
        ratios[count / 2]
    } else {
        0.5 * (ratios[count / 2 - 1] + ratios[count / 2])
    };
    Ok(MdsStats {
        instances: count,
        s,
        sup_ratio: *ratios.last().expect("nonempty"),
        median_ratio,
        skipped: samples.iter().map(|x| x.skipped).sum(),
    })
}

/// Tail decay of `[b, S]` (target `-(p-1)d`) over a unit-ball batch, the
/// three-term identity on random instances, and optionally sharp-maximal
/// ratio statistics over `mds_instances` pairs.
pub fn shift_commutator_probe(
    b: &StepFunction,
    spec: &ShiftSpec,
    p: f64,
    lat: &TruncatedLattice,
    opts: &DecayOptions,
    mds_instances: usize,
) -> Result<DecayReport> {
    opts.validate()?;
    if spec.dim() != lat.dim() {
        return Err(DyadError::DimensionMismatch {
            expected: lat.dim(),
            got: spec.dim(),
        });
    }
    if !(p > 1.0) {
        return Err(DyadError::InvalidParameter(format!(
            "shift commutator probe needs p > 1, got {p}"
        )));
    }
    let bl = b.to_lattice(lat)?;
    check_support(&bl)?;
    let exps = Exponents::new(vec![p])?;
    let mut members = unit_ball_batch(lat, &exps, &opts.batch, STREAM_SHIFT)?;
    if opts.batch.dictionary {
        for (label, a) in unit_near_atoms(lat, p)? {
            members.push(Member { label, inputs: vec![a] });
        }
    }
    let shift = Operator::Shift(spec.clone());
    let (tail_profile, modulus_profile, zero) =
        tails_and_moduli(&members, p, opts, false, |m| commutator(&bl, &shift, 1, &m.inputs, lat))?;
    let d = lat.dim() as f64;

    let randoms = random_members(lat, &exps, opts.batch.seed, STREAM_SPLIT + 2, opts.split_instances)?;
    let errors = par::map(randoms.len(), |k| -> Result<(f64, f64)> {
        use rand::Rng;
        let mut rng = element_rng(opts.batch.seed, STREAM_SPLIT + 3, k as u64);
        let h = opts.h_grid[rng.gen_range(0..opts.h_grid.len())] * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (pieces, direct) = shift_commutator_split(&bl, spec, &randoms[k].inputs[0], lat, h)?;
        split_error(&pieces.iter().map(|(s, g)| (*s, g)).collect::<Vec<_>>(), &direct)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mds = if mds_instances > 0 {
        Some(mds_batch(spec, lat, opts.batch.seed, mds_instances, 2.0)?)
    } else {
        None
    };
    Ok(DecayReport {
        p,
        batch_size: members.len(),
        identically_zero: zero,
        tail: tail_fit(&tail_profile, -(p - 1.0) * d, opts.tail_tolerance),
        modulus: None,
        tail_profile,
        modulus_profile,
        split: Some(finish_split(errors, opts.split_tolerance)),
        mds,
    })
}
