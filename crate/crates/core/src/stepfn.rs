//! Compactly supported dyadic step functions and truncated Haar expansions.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{ldexp, point, Dyadic, DyadicInterval, HaarFunction, HaarPattern, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::levels::{ChiAccumulator, Pyramid};
use crate::par;

/// Most refinement levels `translate` may add to reach a representable shift.
pub const MAX_TRANSLATE_REFINE: u32 = 8;

/// A function constant on the cells of scale `scale` inside a box of
/// `shape` cells starting at cell index `origin`, zero outside the box.
/// Values are stored row-major (axis 0 major).
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    dim: u8,
    scale: i32,
    origin: [i64; 2],
    shape: [usize; 2],
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(scale: i32, origin: &[i64], shape: &[usize], values: Vec<f64>) -> Result<Self> {
        let dim = origin.len();
        if dim != 1 && dim != 2 {
            return Err(DyadError::UnsupportedDimension(dim));
        }
        if shape.len() != dim {
            return Err(DyadError::DimensionMismatch {
                expected: dim,
                got: shape.len(),
            });
        }
        let n: usize = shape.iter().product();
        if values.len() != n {
            return Err(DyadError::InvalidParameter(format!(
                "expected {n} values for the window, got {}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(DyadError::NonFinite(bad));
        }
        let mut o = [0i64; 2];
        let mut sh = [1usize; 2];
        o[..dim].copy_from_slice(origin);
        sh[..dim].copy_from_slice(shape);
        Ok(StepFunction {
            dim: dim as u8,
            scale,
            origin: o,
            shape: sh,
            values,
        })
    }

    /// One-dimensional function with cells `[(origin+i) 2^scale, (origin+i+1) 2^scale)`.
    pub fn new1(scale: i32, origin: i64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(scale, &[origin], &[n], values)
    }

    pub fn zeros(scale: i32, origin: &[i64], shape: &[usize]) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(scale, origin, shape, vec![0.0; n])
    }

    /// Function on the full lattice window at scale `scale`.
    pub(crate) fn on_grid_of(lat: &TruncatedLattice, scale: i32, values: Vec<f64>) -> Self {
        let dim = lat.dim();
        let mut origin = [0i64; 2];
        let mut shape = [1usize; 2];
        for a in 0..dim {
            origin[a] = lat.origin(scale, a);
            shape[a] = lat.per_axis(scale, a) as usize;
        }
        debug_assert_eq!(values.len(), shape[0] * shape[1]);
        StepFunction {
            dim: dim as u8,
            scale,
            origin,
            shape,
            values,
        }
    }

    /// Function on the lattice window at the lattice resolution.
    pub fn on_lattice(lat: &TruncatedLattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lat.cells(lat.fine()) {
            return Err(DyadError::InvalidParameter(format!(
                "lattice grid has {} cells, got {} values",
                lat.cells(lat.fine()),
                values.len()
            )));
        }
        Ok(Self::on_grid_of(lat, lat.fine(), values))
    }

    pub fn lattice_zeros(lat: &TruncatedLattice) -> Self {
        Self::on_grid_of(lat, lat.fine(), vec![0.0; lat.cells(lat.fine())])
    }

    /// Lattice-resolution function whose value on each cell is `f(lo, hi)`
    /// for the cell corners `lo`, `hi`.
    pub fn from_cells<F>(lat: &TruncatedLattice, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Sync + Send,
    {
        let s = lat.fine();
        let w = ldexp(1.0, s);
        let values = par::map(lat.cells(s), |j| {
            let cell = lat.interval_at(s, j);
            let lo: Vec<f64> = cell.index().iter().map(|&m| m as f64 * w).collect();
            let hi: Vec<f64> = lo.iter().map(|x| x + w).collect();
            f(&lo, &hi)
        });
        Self::on_grid_of(lat, s, values)
    }

    /// `c · 1_I` on the cells of `I` at scale `scale ≤ k(I)`.
    pub fn indicator(interval: &DyadicInterval, scale: i32, c: f64) -> Result<Self> {
        if scale > interval.scale() {
            return Err(DyadError::ScaleMismatch(format!(
                "indicator of a scale-{} cube needs resolution ≤ {}",
                interval.scale(),
                interval.scale()
            )));
        }
        let r = (interval.scale() - scale) as u32;
        let origin: Vec<i64> = interval.index().iter().map(|m| m << r).collect();
        let shape = vec![1usize << r; interval.dim()];
        let n = shape.iter().product();
        Self::new(scale, &origin, &shape, vec![c; n])
    }

    /// `c · h` at resolution `k(I) - 1`.
    pub fn haar(h: &HaarFunction, c: f64) -> Self {
        let i = h.interval;
        let origin: Vec<i64> = i.index().iter().map(|m| 2 * m).collect();
        let shape = vec![2usize; i.dim()];
        let values = h.pattern.coeffs().iter().map(|a| c * a).collect();
        Self::new(i.scale() - 1, &origin, &shape, values).expect("valid Haar grid")
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Cell scale: cells have side `2^scale`.
    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin[..self.dim()]
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        ldexp(1.0, self.scale)
    }

    pub fn cell_measure(&self) -> f64 {
        ldexp(1.0, self.scale * self.dim as i32)
    }

    pub fn window_lo(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.origin[axis], self.scale)
    }

    pub fn window_hi(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.origin[axis] + self.shape[axis] as i64, self.scale)
    }

    /// Cube covered by the cell at row-major position `flat`.
    pub fn cell(&self, flat: usize) -> DyadicInterval {
        match self.dim {
            1 => DyadicInterval::new1(self.scale, self.origin[0] + flat as i64),
            _ => DyadicInterval::new2(
                self.scale,
                self.origin[0] + (flat / self.shape[1]) as i64,
                self.origin[1] + (flat % self.shape[1]) as i64,
            ),
        }
    }

    /// Value at an exact point (zero outside the window).
    pub fn eval(&self, x: &[Dyadic]) -> f64 {
        if x.len() != self.dim() {
            return 0.0;
        }
        let mut flat = 0usize;
        for a in 0..self.dim() {
            let off = x[a].floor_at_scale(self.scale).saturating_sub(self.origin[a]);
            if x[a].floor_at_scale(self.scale) < self.origin[a] || off >= self.shape[a] as i64 {
                return 0.0;
            }
            flat = flat * self.shape[a] + off as usize;
        }
        self.values[flat]
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(&point(x)?))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Same function with every cell split into `2^{levels d}` cells.
    pub fn refine(&self, levels: u32) -> Self {
        if levels == 0 {
            return self.clone();
        }
        let f = 1usize << levels;
        let mut shape = self.shape;
        let mut origin = self.origin;
        for a in 0..self.dim() {
            shape[a] *= f;
            origin[a] <<= levels;
        }
        let values = match self.dim {
            1 => par::map(shape[0], |j| self.values[j >> levels]),
            _ => {
                let w = shape[1];
                let sw = self.shape[1];
                par::map(shape[0] * w, |j| {
                    let (r, c) = (j / w, j % w);
                    self.values[(r >> levels) * sw + (c >> levels)]
                })
            }
        };
        StepFunction {
            dim: self.dim,
            scale: self.scale - levels as i32,
            origin,
            shape,
            values,
        }
    }

    /// Samples onto the box of `shape` cells at `origin` and scale `scale ≤ self.scale`.
    /// Values outside the original window become zero; values outside the new box are dropped.
    pub fn resample(&self, scale: i32, origin: &[i64], shape: &[usize]) -> Result<Self> {
        if origin.len() != self.dim() || shape.len() != self.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: self.dim(),
                got: origin.len(),
            });
        }
        if scale > self.scale {
            return Err(DyadError::ScaleMismatch(format!(
                "cannot resample a scale-{} function onto coarser scale {}",
                self.scale, scale
            )));
        }
        let r = (self.scale - scale) as u32;
        let src = |a: usize, j: usize| -> Option<usize> {
            let abs = origin[a] + j as i64;
            let s = (abs >> r) - self.origin[a];
            (s >= 0 && (s as usize) < self.shape[a]).then_some(s as usize)
        };
        let values = match self.dim {
            1 => par::map(shape[0], |j| src(0, j).map_or(0.0, |s| self.values[s])),
            _ => {
                let w = shape[1];
                par::map(shape[0] * w, |j| match (src(0, j / w), src(1, j % w)) {
                    (Some(a), Some(b)) => self.values[a * self.shape[1] + b],
                    _ => 0.0,
                })
            }
        };
        Self::new(scale, origin, shape, values)
    }

    /// True when every nonzero value lies inside the window `[lo, hi)` (in units of `2^self.scale`).
    fn support_within(&self, lo: &[Dyadic], hi: &[Dyadic]) -> bool {
        (0..self.values.len()).all(|j| {
            if self.values[j] == 0.0 {
                return true;
            }
            let c = self.cell(j);
            (0..self.dim()).all(|a| c.lower(a) >= lo[a] && c.upper(a) <= hi[a])
        })
    }

    /// Restates the function on the lattice grid.
    pub fn to_lattice(&self, lat: &TruncatedLattice) -> Result<Self> {
        if self.dim() != lat.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: lat.dim(),
                got: self.dim(),
            });
        }
        if self.scale < lat.fine() {
            return Err(DyadError::ScaleMismatch(format!(
                "function resolution 2^{} is finer than the lattice resolution 2^{}",
                self.scale,
                lat.fine()
            )));
        }
        if self.scale == lat.fine() && self.is_on_grid(lat) {
            return Ok(self.clone());
        }
        let lo: Vec<Dyadic> = (0..lat.dim()).map(|a| lat.window_lo(a)).collect();
        let hi: Vec<Dyadic> = (0..lat.dim()).map(|a| lat.window_hi(a)).collect();
        if !self.support_within(&lo, &hi) {
            return Err(DyadError::WindowMismatch(
                "function has nonzero values outside the lattice window".into(),
            ));
        }
        let s = lat.fine();
        let origin: Vec<i64> = (0..lat.dim()).map(|a| lat.origin(s, a)).collect();
        let shape: Vec<usize> = (0..lat.dim()).map(|a| lat.per_axis(s, a) as usize).collect();
        self.resample(s, &origin, &shape)
    }

    fn is_on_grid(&self, lat: &TruncatedLattice) -> bool {
        (0..self.dim())
            .all(|a| self.origin[a] == lat.origin(self.scale, a) && self.shape[a] as i64 == lat.per_axis(self.scale, a))
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.dim == other.dim && self.scale == other.scale && self.origin == other.origin && self.shape == other.shape
    }

    /// Both functions resampled onto the smallest common grid.
    pub fn common_grid(&self, other: &Self) -> Result<(Self, Self)> {
        if self.dim != other.dim {
            return Err(DyadError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if self.same_grid(other) {
            return Ok((self.clone(), other.clone()));
        }
        let scale = self.scale.min(other.scale);
        let mut origin = Vec::new();
        let mut shape = Vec::new();
        for a in 0..self.dim() {
            let r1 = (self.scale - scale) as u32;
            let r2 = (other.scale - scale) as u32;
            let lo = (self.origin[a] << r1).min(other.origin[a] << r2);
            let hi =
                ((self.origin[a] + self.shape[a] as i64) << r1).max((other.origin[a] + other.shape[a] as i64) << r2);
            origin.push(lo);
            shape.push((hi - lo) as usize);
        }
        Ok((
            self.resample(scale, &origin, &shape)?,
            other.resample(scale, &origin, &shape)?,
        ))
    }

    fn zip_with<F>(&self, other: &Self, op: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let (a, b) = self.common_grid(other)?;
        let values = par::map(a.values.len(), |j| op(a.values[j], b.values[j]));
        Ok(StepFunction { values, ..a })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    /// Pointwise product at the common resolution.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        StepFunction {
            values: par::map_slice(&self.values, |&v| f(v)),
            ..self.clone()
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// `∫ f`.
    pub fn integral(&self) -> f64 {
        par::sum(&self.values) * self.cell_measure()
    }

    /// `∫ |f|^p`.
    pub fn lp_mass(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(DyadError::NonPositiveExponent(p));
        }
        let v = &self.values;
        let s = par::sum_map(v.len(), |j| pow_abs(v[j], p));
        Ok(s * self.cell_measure())
    }

    /// `(∫ |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        Ok(root(self.lp_mass(p)?, p))
    }

    /// `max |f|`.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f g`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        let (a, b) = self.common_grid(other)?;
        Ok(par::sum_map(a.values.len(), |j| a.values[j] * b.values[j]) * a.cell_measure())
    }

    /// `‖f - g‖_p`.
    pub fn diff_norm(&self, other: &Self, p: f64) -> Result<f64> {
        self.sub(other)?.lp_norm(p)
    }

    /// `g(x) = f(x + t)`, refining up to [`MAX_TRANSLATE_REFINE`] levels when
    /// `t` is not a multiple of the cell width.
    pub fn translate(&self, t: &[Dyadic]) -> Result<Self> {
        if t.len() != self.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        let mut need = 0i32;
        for ta in t {
            if !ta.is_multiple_of_scale(self.scale) {
                need = need.max(self.scale - ta.exponent());
            }
        }
        if need as u32 > MAX_TRANSLATE_REFINE {
            let first = t
                .iter()
                .find(|ta| !ta.is_multiple_of_scale(self.scale - MAX_TRANSLATE_REFINE as i32));
            return Err(DyadError::RefinementBudget(
                first.map_or(0.0, |d| d.to_f64()),
                MAX_TRANSLATE_REFINE,
            ));
        }
        let mut g = self.refine(need as u32);
        for a in 0..self.dim() {
            g.origin[a] -= t[a].floor_at_scale(g.scale);
        }
        Ok(g)
    }

    pub fn translate_f64(&self, t: &[f64]) -> Result<Self> {
        self.translate(&point(t)?)
    }

    /// `‖f(· + t) - f‖_p`.
    pub fn translation_modulus(&self, t: &[Dyadic], p: f64) -> Result<f64> {
        if t.len() != self.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        if !(p > 0.0) {
            return Err(DyadError::NonPositiveExponent(p));
        }
        if !t.iter().all(|ta| ta.is_multiple_of_scale(self.scale)) {
            return self.translate(t)?.diff_norm(self, p);
        }
        // whole-cell shift: index arithmetic, no resampling
        let off: Vec<i64> = t.iter().map(|ta| ta.floor_at_scale(self.scale)).collect();
        let shape: Vec<i64> = self.shape[..self.dim()].iter().map(|&n| n as i64).collect();
        let cols = if self.dim == 1 { 1 } else { shape[1] };
        let v = &self.values;
        let at = |idx: &[i64]| -> Option<f64> {
            if idx.iter().zip(&shape).all(|(&i, &n)| (0..n).contains(&i)) {
                Some(v[(if idx.len() == 1 { idx[0] } else { idx[0] * cols + idx[1] }) as usize])
            } else {
                None
            }
        };
        let coords = |j: usize| -> [i64; 2] {
            if self.dim == 1 {
                [j as i64, 0]
            } else {
                [j as i64 / cols, j as i64 % cols]
            }
        };
        let d = self.dim();
        let mass = par::sum_map(v.len(), |j| {
            let c = coords(j);
            let mut fwd = [0i64; 2];
            let mut back = [0i64; 2];
            for a in 0..d {
                fwd[a] = c[a].saturating_add(off[a]);
                back[a] = c[a].saturating_sub(off[a]);
            }
            // cell j as a point x: |f(x+t) - f(x)|^p; plus cell j - t when it lies off the grid
            let here = pow_abs(at(&fwd[..d]).unwrap_or(0.0) - v[j], p);
            let outside = if at(&back[..d]).is_none() {
                pow_abs(v[j], p)
            } else {
                0.0
            };
            here + outside
        }) * self.cell_measure();
        Ok(root(mass, p))
    }

    /// `∫_{|x|_∞ > A} |f|^p`.
    pub fn tail_mass(&self, a: f64, p: f64) -> Result<f64> {
        if !(a >= 0.0) {
            return Err(DyadError::NegativeArgument(a));
        }
        if !(p > 0.0) {
            return Err(DyadError::NonPositiveExponent(p));
        }
        let w = self.cell_width();
        let inside_1d = |idx: i64| -> f64 {
            let lo = idx as f64 * w;
            let hi = lo + w;
            (hi.min(a) - lo.max(-a)).max(0.0)
        };
        let mu = self.cell_measure();
        let v = &self.values;
        let total = match self.dim {
            1 => par::sum_map(v.len(), |j| {
                if v[j] == 0.0 {
                    return 0.0;
                }
                let out = w - inside_1d(self.origin[0] + j as i64);
                if out == 0.0 {
                    0.0
                } else {
                    pow_abs(v[j], p) * out
                }
            }),
            _ => {
                let cols = self.shape[1];
                par::sum_map(v.len(), |j| {
                    if v[j] == 0.0 {
                        return 0.0;
                    }
                    let ix = inside_1d(self.origin[0] + (j / cols) as i64);
                    let iy = inside_1d(self.origin[1] + (j % cols) as i64);
                    let out = mu - ix * iy;
                    if out == 0.0 {
                        0.0
                    } else {
                        pow_abs(v[j], p) * out
                    }
                })
            }
        };
        Ok(total)
    }

    /// `sup - inf` of `f` over the open cube of radius `δ` around `x`, intersected with the window.
    pub fn oscillation(&self, x: &[f64], delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(DyadError::InvalidParameter(format!(
                "oscillation radius must be positive, got {delta}"
            )));
        }
        if x.len() != self.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let w = self.cell_width();
        let mut ranges = Vec::new();
        for a in 0..self.dim() {
            let lo = ((x[a] - delta) / w).floor() as i64 - self.origin[a];
            let hi = ((x[a] + delta) / w).ceil() as i64 - self.origin[a] - 1;
            let lo = lo.max(0);
            let hi = hi.min(self.shape[a] as i64 - 1);
            if lo > hi {
                return Ok(0.0);
            }
            ranges.push((lo as usize, hi as usize));
        }
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        let (r0, r1) = (ranges[0], ranges.get(1).copied().unwrap_or((0, 0)));
        for i in r0.0..=r0.1 {
            for j in r1.0..=r1.1 {
                let v = self.values[i * self.shape[1] + j];
                mn = mn.min(v);
                mx = mx.max(v);
            }
        }
        Ok(mx - mn)
    }

    /// Unique representative of the function: zero borders trimmed and cells
    /// merged while all children of a parent agree. The zero function becomes
    /// one zero cell `[0, 1)^d`.
    pub fn canonical(&self) -> Self {
        let dim = self.dim();
        let mut f = self.clone();
        loop {
            let Some(g) = f.trimmed() else {
                return StepFunction::zeros(0, &vec![0; dim], &vec![1; dim]).expect("unit cell");
            };
            match g.merged() {
                Some(h) => f = h,
                None => return g,
            }
        }
    }

    fn trimmed(&self) -> Option<Self> {
        let dim = self.dim();
        let mut lo = [usize::MAX; 2];
        let mut hi = [0usize; 2];
        for (j, v) in self.values.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let idx = [j / self.shape[1], j % self.shape[1]];
            let idx = if dim == 1 { [j, 0] } else { idx };
            for a in 0..dim {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a] + 1);
            }
        }
        if lo[0] == usize::MAX {
            return None;
        }
        let origin: Vec<i64> = (0..dim).map(|a| self.origin[a] + lo[a] as i64).collect();
        let shape: Vec<usize> = (0..dim).map(|a| hi[a] - lo[a]).collect();
        self.resample(self.scale, &origin, &shape).ok()
    }

    /// The same function one scale coarser, if every parent cell is constant.
    fn merged(&self) -> Option<Self> {
        let dim = self.dim();
        let origin: Vec<i64> = (0..dim).map(|a| self.origin[a].div_euclid(2)).collect();
        let shape: Vec<usize> = (0..dim)
            .map(|a| ((self.origin[a] + self.shape[a] as i64 + 1).div_euclid(2) - origin[a]) as usize)
            .collect();
        let fine = self
            .resample(
                self.scale,
                &origin.iter().map(|o| 2 * o).collect::<Vec<_>>(),
                &shape.iter().map(|s| 2 * s).collect::<Vec<_>>(),
            )
            .ok()?;
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        for j in 0..n {
            let (r, c) = if dim == 1 { (j, 0) } else { (j / shape[1], j % shape[1]) };
            let at = |dr: usize, dc: usize| {
                if dim == 1 {
                    fine.values[2 * r + dr]
                } else {
                    fine.values[(2 * r + dr) * fine.shape[1] + 2 * c + dc]
                }
            };
            let v = at(0, 0);
            let kids: &[(usize, usize)] = if dim == 1 { &[(1, 0)] } else { &[(0, 1), (1, 0), (1, 1)] };
            if kids.iter().any(|&(dr, dc)| at(dr, dc) != v) {
                return None;
            }
            values.push(v);
        }
        StepFunction::new(self.scale + 1, &origin, &shape, values).ok()
    }

    /// Bounding box `[lo, hi)` per axis of the nonzero cells, if any.
    pub fn support_box(&self) -> Option<Vec<(f64, f64)>> {
        let mut bounds: Option<Vec<(f64, f64)>> = None;
        for (j, v) in self.values.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let c = self.cell(j);
            let b = bounds.get_or_insert_with(|| vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim()]);
            for (a, slot) in b.iter_mut().enumerate() {
                slot.0 = slot.0.min(c.lower(a).to_f64());
                slot.1 = slot.1.max(c.upper(a).to_f64());
            }
        }
        bounds
    }

    /// Plot-ready CSV, one row per cell.
    pub fn to_csv(&self, quantity: &str) -> String {
        let mut out = String::new();
        match self.dim {
            1 => out.push_str(&format!("x_lo,x_hi,{quantity}\n")),
            _ => out.push_str(&format!("x_lo,x_hi,y_lo,y_hi,{quantity}\n")),
        }
        for (j, v) in self.values.iter().enumerate() {
            let c = self.cell(j);
            let mut cols: Vec<String> = Vec::new();
            for a in 0..self.dim() {
                cols.push(format!("{:e}", c.lower(a).to_f64()));
                cols.push(format!("{:e}", c.upper(a).to_f64()));
            }
            cols.push(format!("{:.16e}", v));
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRepr {
    k_min: i32,
    window: WindowRepr,
    values: Vec<f64>,
}

impl Serialize for StepFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StepRepr {
            k_min: self.scale,
            window: WindowRepr {
                lo: (0..self.dim()).map(|a| self.window_lo(a).to_f64()).collect(),
                hi: (0..self.dim()).map(|a| self.window_hi(a).to_f64()).collect(),
            },
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let r = StepRepr::deserialize(d)?;
        if r.window.lo.len() != r.window.hi.len() {
            return Err(D::Error::custom("window lo/hi have different dimensions"));
        }
        let mut origin = Vec::new();
        let mut shape = Vec::new();
        for (lo, hi) in r.window.lo.iter().zip(&r.window.hi) {
            let l = Dyadic::from_f64(*lo).map_err(D::Error::custom)?;
            let h = Dyadic::from_f64(*hi).map_err(D::Error::custom)?;
            if !l.is_multiple_of_scale(r.k_min) || !h.is_multiple_of_scale(r.k_min) || h <= l {
                return Err(D::Error::custom(
                    "window corners must be increasing multiples of 2^k_min",
                ));
            }
            let a = l.floor_at_scale(r.k_min);
            let b = h.floor_at_scale(r.k_min);
            origin.push(a);
            shape.push((b - a) as usize);
        }
        StepFunction::new(r.k_min, &origin, &shape, r.values).map_err(D::Error::custom)
    }
}

/// Truncated Haar expansion of a d = 1 step function: details `⟨f, h_I⟩` for
/// the standard Haar functions of all lattice intervals (zeros omitted) and
/// top-scale averages.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarExpansion {
    pub lattice: TruncatedLattice,
    pub details: BTreeMap<DyadicInterval, f64>,
    pub tops: BTreeMap<DyadicInterval, f64>,
}

#[derive(Serialize, Deserialize)]
struct CoeffRepr {
    #[serde(rename = "I")]
    interval: DyadicInterval,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpansionRepr {
    lattice: TruncatedLattice,
    details: Vec<CoeffRepr>,
    tops: Vec<CoeffRepr>,
}

impl Serialize for HaarExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let conv =
            |m: &BTreeMap<DyadicInterval, f64>| m.iter().map(|(i, c)| CoeffRepr { interval: *i, c: *c }).collect();
        ExpansionRepr {
            lattice: self.lattice.clone(),
            details: conv(&self.details),
            tops: conv(&self.tops),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HaarExpansion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ExpansionRepr::deserialize(d)?;
        let conv = |v: Vec<CoeffRepr>| v.into_iter().map(|c| (c.interval, c.c)).collect();
        Ok(HaarExpansion {
            lattice: r.lattice,
            details: conv(r.details),
            tops: conv(r.tops),
        })
    }
}

impl HaarExpansion {
    /// Exact analysis of `f` on the lattice.
    pub fn analyze(f: &StepFunction, lat: &TruncatedLattice) -> Result<Self> {
        if lat.dim() != 1 {
            return Err(DyadError::RequiresOneDimension);
        }
        let g = f.to_lattice(lat)?;
        let pyr = Pyramid::integrals(lat, &g);
        let pattern = HaarPattern::standard(1)?;
        let mut details = BTreeMap::new();
        for s in (lat.fine() + 1..=lat.top()).rev() {
            let level = pyr.haar_level(lat, &pattern, s);
            for (j, c) in level.into_iter().enumerate() {
                if c != 0.0 {
                    details.insert(lat.interval_at(s, j), c);
                }
            }
        }
        let top = lat.top();
        let mu = ldexp(1.0, top);
        let tops = pyr
            .level(top)
            .iter()
            .enumerate()
            .map(|(j, v)| (lat.interval_at(top, j), v / mu))
            .collect();
        Ok(HaarExpansion {
            lattice: lat.clone(),
            details,
            tops,
        })
    }

    /// `Σ_Q ⟨f⟩_Q 1_Q + Σ_I ⟨f, h_I⟩ h_I / |I|` on the lattice window.
    pub fn synthesize(&self) -> Result<StepFunction> {
        let lat = &self.lattice;
        if lat.dim() != 1 {
            return Err(DyadError::RequiresOneDimension);
        }
        let mut out_fine = lat.fine();
        for i in self.details.keys() {
            if lat.flat_index(i).is_none() {
                return Err(DyadError::WindowMismatch(format!(
                    "detail interval {i} is outside the lattice"
                )));
            }
            out_fine = out_fine.min(i.scale() - 1);
        }
        let pattern = HaarPattern::standard(1)?;
        let mut acc = ChiAccumulator::new(lat, out_fine);
        for (q, v) in &self.tops {
            let j = lat
                .flat_index(q)
                .filter(|_| q.scale() == lat.top())
                .ok_or_else(|| DyadError::WindowMismatch(format!("top cell {q} is not a top-scale lattice cell")))?;
            acc.level_mut(lat.top())[j] += v;
        }
        for (i, c) in &self.details {
            let j = lat.flat_index(i).expect("checked above");
            acc.add_haar(lat, &pattern, i.scale(), j, c / i.measure());
        }
        Ok(acc.synthesize(lat))
    }

    /// `Σ_Q ⟨f⟩_Q² |Q| + Σ_I ⟨f, h_I⟩² / |I|`.
    pub fn energy(&self) -> f64 {
        let tops: f64 = self.tops.iter().map(|(q, v)| v * v * q.measure()).sum();
        let det: f64 = self.details.iter().map(|(i, c)| c * c / i.measure()).sum();
        tops + det
    }
}

/// `|x|^p` with exact fast paths for `p = 1, 2`.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

/// `m^{1/p}`.
#[inline]
pub(crate) fn root(m: f64, p: f64) -> f64 {
    if p == 1.0 {
        m
    } else if p == 2.0 {
        m.sqrt()
    } else {
        m.powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(k: i32, m: i64, scale: i32) -> StepFunction {
        StepFunction::indicator(&DyadicInterval::new1(k, m), scale, 1.0).unwrap()
    }

    fn h01() -> StepFunction {
        StepFunction::haar(&HaarFunction::standard(DyadicInterval::new1(0, 0)), 1.0)
    }

    #[test]
    fn norms_and_inner_products() {
        let f = StepFunction::indicator(&DyadicInterval::new1(-1, 0), -1, 2.0).unwrap();
        assert!((f.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(chi(0, 0, -3).lp_norm(1.7).unwrap(), 1.0);
        assert_eq!(h01().lp_norm(3.0).unwrap(), 1.0);
        assert!(f.lp_norm(0.0).is_err());
        assert_eq!(h01().inner(&h01()).unwrap(), 1.0);
        assert_eq!(h01().inner(&chi(0, 0, 0)).unwrap(), 0.0);
        assert_eq!(chi(-1, 0, -1).inner(&chi(0, 0, 0)).unwrap(), 0.5);
    }

    #[test]
    fn translation() {
        let f = chi(0, 0, 0);
        let g = f.translate_f64(&[0.5]).unwrap();
        assert_eq!(g.eval_f64(&[-0.5]).unwrap(), 1.0);
        assert_eq!(g.eval_f64(&[0.5]).unwrap(), 0.0);
        assert_eq!(g.lp_norm(2.0).unwrap(), 1.0);
        assert_eq!(g.diff_norm(&f, 1.0).unwrap(), 1.0);
        assert!(f.translate_f64(&[1.0 / 3.0]).is_err());
    }

    #[test]
    fn tails_and_oscillation() {
        let f = chi(1, 0, 0);
        assert_eq!(f.tail_mass(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(f.tail_mass(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(h01().tail_mass(0.0, 2.0).unwrap(), 1.0);
        assert_eq!(h01().oscillation(&[0.5], 0.25).unwrap(), 2.0);
        assert_eq!(chi(0, 0, -4).oscillation(&[0.25], 0.125).unwrap(), 0.0);
        assert_eq!(f.map(|_| 3.0).oscillation(&[0.7], 0.3).unwrap(), 0.0);
    }

    #[test]
    fn analysis_examples() {
        let lat = TruncatedLattice::new(1, 0, -3, &[0], &[1]).unwrap();
        let e = HaarExpansion::analyze(&chi(-1, 0, -1), &lat).unwrap();
        assert_eq!(e.tops[&DyadicInterval::new1(0, 0)], 0.5);
        assert_eq!(e.details.len(), 1);
        assert_eq!(e.details[&DyadicInterval::new1(0, 0)], -0.5);
        let back = e.synthesize().unwrap();
        assert_eq!(back.sub(&chi(-1, 0, -1)).unwrap().sup_abs(), 0.0);

        let lat = TruncatedLattice::symmetric(1, 1, 2).unwrap();
        let e = HaarExpansion::analyze(&h01(), &lat).unwrap();
        assert_eq!(e.details.len(), 1);
        assert_eq!(e.details[&DyadicInterval::new1(0, 0)], 1.0);
        assert!(e.tops.values().all(|&v| v == 0.0));
        let empty = HaarExpansion {
            lattice: lat.clone(),
            details: BTreeMap::new(),
            tops: BTreeMap::new(),
        };
        assert!(empty.synthesize().unwrap().is_zero());
    }

    #[test]
    fn json_roundtrip() {
        let f = chi(0, 0, -2);
        let s = serde_json::to_string(&f).unwrap();
        let g: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }
}
