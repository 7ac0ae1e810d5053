//! Per-scale cell arrays over a truncated lattice: bottom-up integral
//! pyramids and top-down synthesis of accumulated coefficients.

use crate::dyadic::{ldexp, HaarPattern, TruncatedLattice};
use crate::par;
use crate::stepfn::StepFunction;

/// Cell integrals `∫_Q f` for every scale from `fine` to `top`.
#[derive(Clone, Debug)]
pub(crate) struct Pyramid {
    fine: i32,
    levels: Vec<Vec<f64>>,
}

impl Pyramid {
    /// `f` must already live on the lattice grid (scale `lat.fine()`).
    pub fn integrals(lat: &TruncatedLattice, f: &StepFunction) -> Self {
        debug_assert_eq!(f.scale(), lat.fine());
        let mu = ldexp(1.0, lat.fine() * lat.dim() as i32);
        let base: Vec<f64> = par::map_slice(f.values(), |v| v * mu);
        let mut levels = vec![base];
        let kids = 1usize << lat.dim();
        for s in lat.fine() + 1..=lat.top() {
            let prev = levels.last().expect("nonempty");
            let next = par::map(lat.cells(s), |p| {
                (0..kids).map(|c| prev[lat.child_flat(s, p, c)]).sum::<f64>()
            });
            levels.push(next);
        }
        Pyramid {
            fine: lat.fine(),
            levels,
        }
    }

    pub fn level(&self, s: i32) -> &[f64] {
        &self.levels[(s - self.fine) as usize]
    }

    /// `⟨f, h_Q⟩` for the cell `j` at scale `s`.
    pub fn haar(&self, lat: &TruncatedLattice, pattern: &HaarPattern, s: i32, j: usize) -> f64 {
        if s <= self.fine {
            return 0.0;
        }
        let below = self.level(s - 1);
        pattern
            .coeffs()
            .iter()
            .enumerate()
            .map(|(c, a)| a * below[lat.child_flat(s, j, c)])
            .sum()
    }

    /// `⟨f, h_Q⟩` for the standard d = 1 pattern, all cells at scale `s`.
    pub fn haar_level(&self, lat: &TruncatedLattice, pattern: &HaarPattern, s: i32) -> Vec<f64> {
        par::map(lat.cells(s), |j| self.haar(lat, pattern, s, j))
    }
}

/// Accumulates coefficients of indicator functions `1_Q` per scale and
/// synthesizes their sum at the finest accumulator scale.
#[derive(Clone, Debug)]
pub(crate) struct ChiAccumulator {
    fine: i32,
    top: i32,
    levels: Vec<Vec<f64>>,
}

impl ChiAccumulator {
    pub fn new(lat: &TruncatedLattice, fine: i32) -> Self {
        let levels = (fine..=lat.top()).map(|s| vec![0.0; lat.cells(s)]).collect();
        ChiAccumulator {
            fine,
            top: lat.top(),
            levels,
        }
    }

    pub fn level_mut(&mut self, s: i32) -> &mut [f64] {
        &mut self.levels[(s - self.fine) as usize]
    }

    /// Adds `c · h_Q` for the cell `j` at scale `s`.
    pub fn add_haar(&mut self, lat: &TruncatedLattice, pattern: &HaarPattern, s: i32, j: usize, c: f64) {
        let children: Vec<usize> = (0..pattern.coeffs().len()).map(|k| lat.child_flat(s, j, k)).collect();
        let lvl = self.level_mut(s - 1);
        for (k, a) in pattern.coeffs().iter().enumerate() {
            lvl[children[k]] += c * a;
        }
    }

    /// Adds `c_j · h_{Q_j}` for every cell at scale `s`.
    pub fn add_haar_level(&mut self, lat: &TruncatedLattice, pattern: &HaarPattern, s: i32, coeffs: &[f64]) {
        let kids = pattern.coeffs().len();
        let alpha = pattern.coeffs().to_vec();
        let lvl = self.level_mut(s - 1);
        par::update(lvl, |child, v| {
            let parent = lat.parent_flat(s - 1, child);
            let slot = child_slot(lat, s - 1, child, kids);
            v + coeffs[parent] * alpha[slot]
        });
    }

    /// Adds `c_j · 1_{Q_j}` for every cell at scale `s`.
    pub fn add_chi_level(&mut self, s: i32, coeffs: &[f64]) {
        let lvl = self.level_mut(s);
        par::update(lvl, |j, v| v + coeffs[j]);
    }

    /// Sum of all accumulated terms on the accumulator's finest grid.
    pub fn synthesize(mut self, lat: &TruncatedLattice) -> StepFunction {
        for s in (self.fine..self.top).rev() {
            let upper = std::mem::take(&mut self.levels[(s + 1 - self.fine) as usize]);
            let lvl = &mut self.levels[(s - self.fine) as usize];
            par::update(lvl, |j, v| v + upper[lat.parent_flat(s, j)]);
        }
        let values = std::mem::take(&mut self.levels[0]);
        StepFunction::on_grid_of(lat, self.fine, values)
    }
}

/// Position of the cell `flat` (scale `s`) among its parent's children.
pub(crate) fn child_slot(lat: &TruncatedLattice, s: i32, flat: usize, kids: usize) -> usize {
    if kids == 2 {
        flat & 1
    } else {
        let w = lat.per_axis(s, 1) as usize;
        (((flat / w) & 1) << 1) | ((flat % w) & 1)
    }
}

/// Calls `visit` with every finest-grid value inside the cube `j` of scale `s`.
/// `vals` must be on the lattice grid.
pub(crate) fn visit_cube<F: FnMut(f64)>(lat: &TruncatedLattice, vals: &[f64], s: i32, j: usize, mut visit: F) {
    let b = 1usize << (s - lat.fine());
    match lat.dim() {
        1 => vals[j * b..(j + 1) * b].iter().for_each(|&v| visit(v)),
        _ => {
            let ws = lat.per_axis(s, 1) as usize;
            let wf = lat.per_axis(lat.fine(), 1) as usize;
            let (j0, j1) = (j / ws, j % ws);
            for r in j0 * b..(j0 + 1) * b {
                vals[r * wf + j1 * b..r * wf + (j1 + 1) * b]
                    .iter()
                    .for_each(|&v| visit(v));
            }
        }
    }
}

/// Per-scale arrays, coarsest first, turned into the pointwise supremum over
/// all cubes containing each finest cell.
pub(crate) fn sup_over_ancestors(lat: &TruncatedLattice, per_scale: Vec<Vec<f64>>) -> Vec<f64> {
    // per_scale[i] holds scale top - i
    let mut iter = per_scale.into_iter();
    let mut acc = iter.next().expect("at least one scale");
    let mut s = lat.top();
    for mut level in iter {
        let upper = acc;
        par::update(&mut level, |j, v| v.max(upper[lat.parent_flat(s - 1, j)]));
        acc = level;
        s -= 1;
    }
    acc
}
