//! Dyadic BMO norms, a shifted-lattice lower bound for the continuous BMO
//! norm, and a CMO distance diagnostic.

use serde::Serialize;

use crate::dyadic::{DyadicInterval, HaarPattern, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::levels::{visit_cube, Pyramid};
use crate::par;
use crate::stepfn::StepFunction;

/// Largest value at one scale and the cube attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleEntry {
    pub scale: i32,
    pub value: f64,
    pub maximizer: Option<DyadicInterval>,
    /// Translation applied (per axis) to the maximizing dyadic cube.
    pub offset: f64,
}

/// A supremum over lattice cubes with its maximizer and per-scale profile.
/// Ties go to the smallest cube in the interval order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BmoReport {
    pub value: f64,
    pub maximizer: Option<DyadicInterval>,
    pub offset: f64,
    pub profile: Vec<ScaleEntry>,
}

impl BmoReport {
    fn from_profile(mut profile: Vec<ScaleEntry>) -> Self {
        profile.sort_by_key(|e| std::cmp::Reverse(e.scale));
        let mut best: Option<&ScaleEntry> = None;
        for e in &profile {
            best = match best {
                None => Some(e),
                Some(b) if e.value > b.value => Some(e),
                Some(b) if e.value == b.value && e.maximizer < b.maximizer => Some(e),
                keep => keep,
            };
        }
        let (value, maximizer, offset) = best.map_or((0.0, None, 0.0), |e| (e.value, e.maximizer, e.offset));
        BmoReport {
            value,
            maximizer,
            offset,
            profile,
        }
    }
}

/// `(1/|I|) ∫_I |b - ⟨b⟩_I|^r` from the cube's finest-grid values.
fn mean_osc(lat: &TruncatedLattice, vals: &[f64], s: i32, j: usize, r: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    visit_cube(lat, vals, s, j, |v| {
        sum += v;
        n += 1;
    });
    let avg = sum / n as f64;
    let mut acc = 0.0;
    visit_cube(lat, vals, s, j, |v| {
        let d = (v - avg).abs();
        acc += if r == 1.0 {
            d
        } else if r == 2.0 {
            d * d
        } else {
            d.powf(r)
        };
    });
    acc / n as f64
}

fn scan<F>(lat: &TruncatedLattice, f: F) -> BmoReport
where
    F: Fn(i32, usize) -> f64 + Sync + Send,
{
    let profile = (lat.fine()..=lat.top())
        .rev()
        .map(|s| {
            let best = par::argmax(lat.cells(s), |j| f(s, j));
            ScaleEntry {
                scale: s,
                value: best.map_or(0.0, |b| b.1),
                maximizer: best.map(|b| lat.interval_at(s, b.0)),
                offset: 0.0,
            }
        })
        .collect();
    BmoReport::from_profile(profile)
}

/// Per-cube mean oscillations `(1/|I|)∫_I |b - ⟨b⟩_I|` for every scale, coarsest first.
pub(crate) fn oscillation_levels(lat: &TruncatedLattice, vals: &[f64]) -> Vec<Vec<f64>> {
    (lat.fine()..=lat.top())
        .rev()
        .map(|s| par::map(lat.cells(s), |j| mean_osc(lat, vals, s, j, 1.0)))
        .collect()
}

/// `sup_I (1/|I|) ∫_I |b - ⟨b⟩_I|` over the lattice cubes.
pub fn bmo_dyadic(b: &StepFunction, lat: &TruncatedLattice) -> Result<BmoReport> {
    let g = b.to_lattice(lat)?;
    let v = g.values();
    Ok(scan(lat, |s, j| mean_osc(lat, v, s, j, 1.0)))
}

/// `(sup_I (1/|I|) ∫_I |b - ⟨b⟩_I|^r)^{1/r}`.
pub fn bmo_r(b: &StepFunction, r: f64, lat: &TruncatedLattice) -> Result<BmoReport> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(DyadError::InvalidParameter(format!("BMO_r needs 1 < r < inf, got {r}")));
    }
    let g = b.to_lattice(lat)?;
    let v = g.values();
    Ok(root(scan(lat, |s, j| mean_osc(lat, v, s, j, r)), r))
}

fn root(mut rep: BmoReport, r: f64) -> BmoReport {
    let f = |x: f64| if r == 2.0 { x.sqrt() } else { x.powf(1.0 / r) };
    rep.value = f(rep.value);
    for e in &mut rep.profile {
        e.value = f(e.value);
    }
    rep
}

/// The Haar-coefficient BMO quantity in two normalizations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bmo2Report {
    /// `(sup_I (1/|I|) Σ_{J⊆I} ⟨b,h_J⟩² / |J|²)^{1/2}`.
    pub verbatim: BmoReport,
    /// `(sup_I (1/|I|) Σ_{J⊆I} ⟨b,h_J⟩² / |J|)^{1/2}`, equal to the `L²` oscillation norm.
    pub standard: BmoReport,
    /// `bmo_r(b, 2)` for comparison.
    pub oscillation_r2: f64,
    /// `verbatim / oscillation_r2` (null when the oscillation vanishes).
    pub ratio_verbatim_to_r2: Option<f64>,
}

/// Both Haar-coefficient forms of the dyadic `BMO_2` norm (d = 1).
pub fn bmo2_dyadic(b: &StepFunction, lat: &TruncatedLattice) -> Result<Bmo2Report> {
    if lat.dim() != 1 {
        return Err(DyadError::RequiresOneDimension);
    }
    let g = b.to_lattice(lat)?;
    let pyr = Pyramid::integrals(lat, &g);
    let pattern = HaarPattern::standard(1)?;
    let build = |power: i32| -> BmoReport {
        // energy[s] = Σ over sub-cubes J ⊆ I of ⟨b,h_J⟩² / |J|^power, built bottom-up
        let mut energy: Vec<Vec<f64>> = Vec::new();
        let mut prev: Option<Vec<f64>> = None;
        for s in lat.fine()..=lat.top() {
            let mu = crate::dyadic::ldexp(1.0, s * power);
            let cur = par::map(lat.cells(s), |j| {
                let c = pyr.haar(lat, &pattern, s, j);
                let own = c * c / mu;
                own + prev.as_ref().map_or(0.0, |p| p[2 * j] + p[2 * j + 1])
            });
            energy.push(cur.clone());
            prev = Some(cur);
        }
        let rep = scan(lat, |s, j| {
            energy[(s - lat.fine()) as usize][j] / crate::dyadic::ldexp(1.0, s)
        });
        root(rep, 2.0)
    };
    let verbatim = build(2);
    let standard = build(1);
    let oscillation_r2 = bmo_r(b, 2.0, lat)?.value;
    let ratio = (oscillation_r2 > 0.0).then(|| verbatim.value / oscillation_r2);
    Ok(Bmo2Report {
        verbatim,
        standard,
        oscillation_r2,
        ratio_verbatim_to_r2: ratio,
    })
}

/// Lower bound for the continuous BMO norm: the maximum of the mean
/// oscillation over the dyadic cubes and over the cubes of the two lattices
/// translated by one and two thirds of each side length (snapped to the grid).
pub fn bmo_nondyadic_lower(b: &StepFunction, lat: &TruncatedLattice) -> Result<BmoReport> {
    let g = b.to_lattice(lat)?;
    let v = g.values();
    let dim = lat.dim();
    let nf: Vec<usize> = (0..dim).map(|a| lat.per_axis(lat.fine(), a) as usize).collect();
    let wf = crate::dyadic::ldexp(1.0, lat.fine());
    let mut profile = Vec::new();
    for s in (lat.fine()..=lat.top()).rev() {
        let side = 1usize << (s - lat.fine());
        let mut shifts = vec![0usize];
        for third in [1usize, 2] {
            let sh = (third * side + 1) / 3;
            if sh != 0 && sh != side && !shifts.contains(&sh) {
                shifts.push(sh);
            }
        }
        let mut best = ScaleEntry {
            scale: s,
            value: 0.0,
            maximizer: None,
            offset: 0.0,
        };
        for sh in shifts {
            let counts: Vec<usize> = (0..dim).map(|a| (nf[a] - sh) / side).collect();
            let total: usize = counts.iter().product();
            let cube_osc = |j: usize| -> f64 {
                let (c0, c1) = if dim == 1 {
                    (j, 0)
                } else {
                    (j / counts[1], j % counts[1])
                };
                let mut sum = 0.0;
                let mut n = 0usize;
                let each = |f: &mut dyn FnMut(f64)| {
                    let rows = if dim == 1 {
                        0..1
                    } else {
                        sh + c0 * side..sh + (c0 + 1) * side
                    };
                    for r in rows {
                        let (lo, hi) = if dim == 1 {
                            (sh + c0 * side, sh + (c0 + 1) * side)
                        } else {
                            (r * nf[1] + sh + c1 * side, r * nf[1] + sh + (c1 + 1) * side)
                        };
                        v[lo..hi].iter().for_each(|&x| f(x));
                    }
                };
                each(&mut |x| {
                    sum += x;
                    n += 1;
                });
                let avg = sum / n as f64;
                let mut acc = 0.0;
                each(&mut |x| acc += (x - avg).abs());
                acc / n as f64
            };
            if let Some((j, val)) = par::argmax(total, cube_osc) {
                if val > best.value || best.maximizer.is_none() {
                    let (c0, c1) = if dim == 1 {
                        (j, 0)
                    } else {
                        (j / counts[1], j % counts[1])
                    };
                    // express the cube as a dyadic cube plus a translation
                    let base = if dim == 1 {
                        lat.interval_at(s, c0)
                    } else {
                        lat.interval_at(s, c0 * lat.per_axis(s, 1) as usize + c1)
                    };
                    best = ScaleEntry {
                        scale: s,
                        value: val,
                        maximizer: Some(base),
                        offset: sh as f64 * wf,
                    };
                }
            }
        }
        profile.push(best);
    }
    Ok(BmoReport::from_profile(profile))
}

/// Result of the CMO diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CmoReport {
    pub distance: f64,
    pub best_width: Option<f64>,
    /// `(width, lower-bound BMO distance)` for every smoothing width.
    pub per_width: Vec<(f64, f64)>,
}

/// Piecewise-linear (bilinear in d = 2) interpolant of local averages of `b`
/// at the nodes `n w`, sampled at the lattice cell centers.
pub fn smooth_surrogate(b: &StepFunction, lat: &TruncatedLattice, width: f64) -> Result<StepFunction> {
    let g = b.to_lattice(lat)?;
    let wf = crate::dyadic::ldexp(1.0, lat.fine());
    if !(width >= wf) {
        return Err(DyadError::InvalidParameter(format!(
            "smoothing width {width} is below the lattice cell width {wf}"
        )));
    }
    let dim = lat.dim();
    let lo: Vec<f64> = (0..dim).map(|a| lat.window_lo(a).to_f64()).collect();
    let hi: Vec<f64> = (0..dim).map(|a| lat.window_hi(a).to_f64()).collect();
    let nf: Vec<usize> = (0..dim).map(|a| lat.per_axis(lat.fine(), a) as usize).collect();
    let node_lo: Vec<i64> = (0..dim).map(|a| (lo[a] / width).floor() as i64).collect();
    let node_hi: Vec<i64> = (0..dim).map(|a| (hi[a] / width).ceil() as i64).collect();
    let cnt: Vec<usize> = (0..dim).map(|a| (node_hi[a] - node_lo[a] + 1) as usize).collect();
    let vals = g.values();
    let cell_range = |a: usize, center: f64| -> (usize, usize) {
        let a0 = (((center - width / 2.0) - lo[a]) / wf).ceil().max(0.0) as usize;
        let a1 = ((((center + width / 2.0) - lo[a]) / wf).ceil().max(0.0) as usize).min(nf[a]);
        (a0.min(nf[a]), a1)
    };
    let node_total: usize = cnt.iter().product();
    let nodes = par::map(node_total, |q| {
        let (q0, q1) = if dim == 1 { (q, 0) } else { (q / cnt[1], q % cnt[1]) };
        let x0 = (node_lo[0] + q0 as i64) as f64 * width;
        let (a0, a1) = cell_range(0, x0);
        let (b0, b1) = if dim == 1 {
            (0, 1)
        } else {
            cell_range(1, (node_lo[1] + q1 as i64) as f64 * width)
        };
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in a0..a1 {
            for j in b0..b1 {
                sum += if dim == 1 { vals[i] } else { vals[i * nf[1] + j] };
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    });
    let interp = |a: usize, x: f64| -> (usize, f64) {
        let t = x / width - node_lo[a] as f64;
        let i = (t.floor() as usize).min(cnt[a] - 2);
        (i, t - i as f64)
    };
    let out = par::map(vals.len(), |c| {
        let (c0, c1) = if dim == 1 { (c, 0) } else { (c / nf[1], c % nf[1]) };
        let x0 = lo[0] + (c0 as f64 + 0.5) * wf;
        let (i0, t0) = interp(0, x0);
        if dim == 1 {
            nodes[i0] * (1.0 - t0) + nodes[i0 + 1] * t0
        } else {
            let x1 = lo[1] + (c1 as f64 + 0.5) * wf;
            let (i1, t1) = interp(1, x1);
            let at = |p: usize, q: usize| nodes[p * cnt[1] + q];
            at(i0, i1) * (1.0 - t0) * (1.0 - t1)
                + at(i0 + 1, i1) * t0 * (1.0 - t1)
                + at(i0, i1 + 1) * (1.0 - t0) * t1
                + at(i0 + 1, i1 + 1) * t0 * t1
        }
    });
    StepFunction::on_lattice(lat, out)
}

/// `min_w` of the continuous-BMO lower bound of `b - g_w` over the smoothing widths.
pub fn cmo_distance(b: &StepFunction, lat: &TruncatedLattice, widths: &[f64]) -> Result<CmoReport> {
    if widths.is_empty() {
        return Err(DyadError::Empty("smoothing grid".into()));
    }
    let g = b.to_lattice(lat)?;
    let mut per_width = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for &w in widths {
        let d = bmo_nondyadic_lower(&g.sub(&smooth_surrogate(&g, lat, w)?)?, lat)?.value;
        per_width.push((w, d));
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((w, d));
        }
    }
    Ok(CmoReport {
        distance: best.map_or(0.0, |b| b.1),
        best_width: best.map(|b| b.0),
        per_width,
    })
}

/// Default smoothing widths `2^{-8}, …, 2^0` clipped to the lattice resolution.
pub fn default_widths(lat: &TruncatedLattice) -> Vec<f64> {
    (-8..=0)
        .filter(|&e| e >= lat.fine())
        .map(|e| crate::dyadic::ldexp(1.0, e))
        .collect()
}
