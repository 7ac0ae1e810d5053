//! Dyadic rationals, dyadic intervals (d = 1, 2), Haar functions and
//! truncated lattices.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DyadError, Result};

/// Largest number of scales a lattice may span.
pub const MAX_LEVELS: i32 = 40;
/// Largest number of finest-scale cells a lattice may hold.
pub const MAX_FINE_CELLS: u64 = 1 << 26;

/// `x * 2^e` computed without intermediate overflow or underflow.
pub fn ldexp(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

/// An exact dyadic rational `mant * 2^exp`, kept with an odd mantissa.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: i64,
    exp: i32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { mant: 0, exp: 0 };

    pub fn new(mant: i64, exp: i32) -> Self {
        if mant == 0 {
            return Self::ZERO;
        }
        let tz = mant.trailing_zeros();
        Dyadic {
            mant: mant >> tz,
            exp: exp + tz as i32,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(v, 0)
    }

    /// Exact conversion; every finite double is a dyadic rational.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(DyadError::NonFinite(x));
        }
        if x == 0.0 {
            return Ok(Self::ZERO);
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), biased - 1075)
        };
        Ok(Self::new(if negative { -m } else { m }, e))
    }

    pub fn mantissa(self) -> i64 {
        self.mant
    }

    pub fn exponent(self) -> i32 {
        self.exp
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant as f64, self.exp)
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0
    }

    /// `floor(self / 2^k)`, saturating at the `i64` range.
    pub fn floor_at_scale(self, k: i32) -> i64 {
        if self.mant == 0 {
            return 0;
        }
        let s = self.exp as i64 - k as i64;
        if s >= 0 {
            if s >= 63 {
                return if self.mant > 0 { i64::MAX } else { i64::MIN };
            }
            self.mant
                .checked_shl(s as u32)
                .filter(|v| v >> s == self.mant)
                .unwrap_or(if self.mant > 0 { i64::MAX } else { i64::MIN })
        } else {
            let r = -s;
            if r >= 63 {
                if self.mant < 0 {
                    -1
                } else {
                    0
                }
            } else {
                self.mant >> r
            }
        }
    }

    /// True when `self` is an integer multiple of `2^k`.
    pub fn is_multiple_of_scale(self, k: i32) -> bool {
        self.mant == 0 || self.exp >= k
    }

    /// Multiplies by `2^j` exactly.
    pub fn mul_pow2(self, j: i32) -> Self {
        if self.mant == 0 {
            self
        } else {
            Dyadic {
                mant: self.mant,
                exp: self.exp + j,
            }
        }
    }

    pub fn checked_add(self, other: Self) -> Option<Self> {
        if self.mant == 0 {
            return Some(other);
        }
        if other.mant == 0 {
            return Some(self);
        }
        let e = self.exp.min(other.exp);
        let sa = (self.exp - e) as u32;
        let sb = (other.exp - e) as u32;
        if sa > 100 || sb > 100 {
            return None;
        }
        let a = (self.mant as i128).checked_shl(sa)?;
        let b = (other.mant as i128).checked_shl(sb)?;
        let s = a.checked_add(b)?;
        if s == 0 {
            return Some(Self::ZERO);
        }
        let tz = s.trailing_zeros();
        let m = s >> tz;
        i64::try_from(m).ok().map(|m| Dyadic {
            mant: m,
            exp: e + tz as i32,
        })
    }

    pub fn checked_sub(self, other: Self) -> Option<Self> {
        self.checked_add(-other)
    }

    fn bit_position(self) -> i64 {
        (64 - self.mant.unsigned_abs().leading_zeros()) as i64 + self.exp as i64
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.signum();
        let sb = other.mant.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let pa = self.bit_position();
        let pb = other.bit_position();
        let mag = if pa != pb {
            pa.cmp(&pb)
        } else {
            let e = self.exp.min(other.exp);
            let a = (self.mant.unsigned_abs() as u128) << (self.exp - e);
            let b = (other.mant.unsigned_abs() as u128) << (other.exp - e);
            a.cmp(&b)
        };
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        Dyadic::from_f64(x).map_err(serde::de::Error::custom)
    }
}

/// Converts a point given as doubles into exact dyadic coordinates.
pub fn point(coords: &[f64]) -> Result<Vec<Dyadic>> {
    coords.iter().map(|&c| Dyadic::from_f64(c)).collect()
}

impl std::ops::Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

/// The cube `2^k([0,1)^d + m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    dim: u8,
    scale: i32,
    index: [i64; 2],
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(DyadError::UnsupportedDimension(dim))
    }
}

fn shift_floor(v: i64, j: u32) -> i64 {
    if j >= 63 {
        if v < 0 {
            -1
        } else {
            0
        }
    } else {
        v >> j
    }
}

impl DyadicInterval {
    pub fn new(scale: i32, index: &[i64]) -> Result<Self> {
        check_dim(index.len())?;
        let mut m = [0i64; 2];
        m[..index.len()].copy_from_slice(index);
        Ok(DyadicInterval {
            dim: index.len() as u8,
            scale,
            index: m,
        })
    }

    /// `[m 2^k, (m+1) 2^k)`.
    pub fn new1(scale: i32, m: i64) -> Self {
        DyadicInterval {
            dim: 1,
            scale,
            index: [m, 0],
        }
    }

    pub fn new2(scale: i32, m0: i64, m1: i64) -> Self {
        DyadicInterval {
            dim: 2,
            scale,
            index: [m0, m1],
        }
    }

    /// The unit cube `[0,1)^d`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(0, &vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn index(&self) -> &[i64] {
        &self.index[..self.dim as usize]
    }

    /// Side length `l(I) = 2^k`.
    pub fn side(&self) -> f64 {
        ldexp(1.0, self.scale)
    }

    /// Lebesgue measure `|I| = 2^{kd}`.
    pub fn measure(&self) -> f64 {
        ldexp(1.0, self.scale * self.dim as i32)
    }

    pub fn lower(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.index[axis], self.scale)
    }

    pub fn upper(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.index[axis] + 1, self.scale)
    }

    /// Center `x_I`.
    pub fn center(&self) -> Vec<Dyadic> {
        (0..self.dim())
            .map(|a| Dyadic::new(2 * self.index[a] + 1, self.scale - 1))
            .collect()
    }

    pub fn center_f64(&self) -> Vec<f64> {
        self.center().into_iter().map(Dyadic::to_f64).collect()
    }

    /// Child number `c` in `0..2^d`; in d = 2 the bits of `c` are `(eta_0, eta_1)`
    /// with `eta_0` the high bit and `eta_i = 1` selecting the upper half.
    pub fn child(&self, c: usize) -> Self {
        let mut idx = self.index;
        match self.dim {
            1 => idx[0] = 2 * idx[0] + (c & 1) as i64,
            _ => {
                idx[0] = 2 * idx[0] + ((c >> 1) & 1) as i64;
                idx[1] = 2 * idx[1] + (c & 1) as i64;
            }
        }
        DyadicInterval {
            dim: self.dim,
            scale: self.scale - 1,
            index: idx,
        }
    }

    pub fn children(&self) -> Vec<Self> {
        (0..1usize << self.dim).map(|c| self.child(c)).collect()
    }

    /// Position of `self` among the children of its parent.
    pub fn child_slot(&self) -> usize {
        match self.dim {
            1 => self.index[0].rem_euclid(2) as usize,
            _ => ((self.index[0].rem_euclid(2) as usize) << 1) | self.index[1].rem_euclid(2) as usize,
        }
    }

    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    /// The `j`-th ancestor `I^{(j)}`.
    pub fn ancestor(&self, j: u32) -> Self {
        let mut idx = self.index;
        for v in idx.iter_mut().take(self.dim as usize) {
            *v = shift_floor(*v, j);
        }
        DyadicInterval {
            dim: self.dim,
            scale: self.scale + j as i32,
            index: idx,
        }
    }

    /// Exact membership of a dyadic point.
    pub fn contains_point(&self, x: &[Dyadic]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|a| x[a].floor_at_scale(self.scale) == self.index[a])
    }

    pub fn contains_point_f64(&self, x: &[f64]) -> bool {
        point(x).map(|p| self.contains_point(&p)).unwrap_or(false)
    }

    /// True when `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.dim == self.dim && other.scale <= self.scale && other.ancestor((self.scale - other.scale) as u32) == *self
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.contains(other) && !other.contains(self)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.dim())
            .map(|a| format!("[{}, {})", self.lower(a), self.upper(a)))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalRepr {
    k: i32,
    m: Vec<i64>,
}

impl Serialize for DyadicInterval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IntervalRepr {
            k: self.scale,
            m: self.index().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DyadicInterval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = IntervalRepr::deserialize(d)?;
        DyadicInterval::new(r.k, &r.m).map_err(serde::de::Error::custom)
    }
}

/// Child coefficients `alpha_J` of a cancellative Haar function, in child order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HaarPattern {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for HaarPattern {
    type Error = DyadError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        HaarPattern::new(v)
    }
}

impl From<HaarPattern> for Vec<f64> {
    fn from(p: HaarPattern) -> Self {
        p.coeffs
    }
}

impl HaarPattern {
    /// Accepts 2 (d = 1) or 4 (d = 2) finite coefficients summing to zero.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 2 && coeffs.len() != 4 {
            return Err(DyadError::InvalidParameter(format!(
                "Haar pattern needs 2 or 4 coefficients, got {}",
                coeffs.len()
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(DyadError::NonFinite(bad));
        }
        let total: f64 = coeffs.iter().sum();
        let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
        if scale == 0.0 {
            return Err(DyadError::InvalidParameter("Haar pattern is identically zero".into()));
        }
        if total.abs() > 1e-12 * scale {
            return Err(DyadError::NotCancellative(total));
        }
        Ok(HaarPattern { coeffs })
    }

    /// `-1` on the lower half, `+1` on the upper half in d = 1; the tensor
    /// product of that pattern with itself in d = 2.
    pub fn standard(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(match dim {
            1 => HaarPattern {
                coeffs: vec![-1.0, 1.0],
            },
            _ => HaarPattern {
                coeffs: vec![1.0, -1.0, -1.0, 1.0],
            },
        })
    }

    pub fn dim(&self) -> usize {
        if self.coeffs.len() == 2 {
            1
        } else {
            2
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `sum_J alpha_J |J|` for children of a unit cube.
    pub fn weighted_sum(&self) -> f64 {
        let child = ldexp(1.0, -(self.dim() as i32));
        self.coeffs.iter().map(|c| c * child).sum()
    }
}

/// A Haar function `h_I = sum_J alpha_J 1_J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarFunction {
    pub interval: DyadicInterval,
    pub pattern: HaarPattern,
}

impl HaarFunction {
    pub fn new(interval: DyadicInterval, pattern: HaarPattern) -> Result<Self> {
        if pattern.dim() != interval.dim() {
            return Err(DyadError::DimensionMismatch {
                expected: interval.dim(),
                got: pattern.dim(),
            });
        }
        Ok(HaarFunction { interval, pattern })
    }

    pub fn standard(interval: DyadicInterval) -> Self {
        HaarFunction {
            interval,
            pattern: HaarPattern::standard(interval.dim()).expect("interval dimension is valid"),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.pattern.sup_norm()
    }

    /// Exact integral `sum_J alpha_J |J|`; zero for every valid pattern.
    pub fn integral(&self) -> f64 {
        let child = self.interval.measure() * ldexp(1.0, -(self.interval.dim() as i32));
        self.pattern.coeffs().iter().map(|c| c * child).sum()
    }

    pub fn eval(&self, x: &[Dyadic]) -> f64 {
        if !self.interval.contains_point(x) {
            return 0.0;
        }
        let k = self.interval.scale() - 1;
        let slot = match self.interval.dim() {
            1 => (x[0].floor_at_scale(k) - 2 * self.interval.index()[0]) as usize,
            _ => {
                let a = (x[0].floor_at_scale(k) - 2 * self.interval.index()[0]) as usize;
                let b = (x[1].floor_at_scale(k) - 2 * self.interval.index()[1]) as usize;
                (a << 1) | b
            }
        };
        self.pattern.coeffs()[slot]
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(&point(x)?))
    }

    /// Pointwise power `h_I^q` with `h^0 = 1_I`; needs d = 1 and values `±1`.
    pub fn power_eval(&self, x: &[Dyadic], q: u32) -> Result<f64> {
        if self.interval.dim() != 1 {
            return Err(DyadError::RequiresOneDimension);
        }
        if self.pattern.coeffs().iter().any(|c| c.abs() != 1.0) {
            return Err(DyadError::InvalidParameter(
                "Haar powers need a pattern with values ±1".into(),
            ));
        }
        if !self.interval.contains_point(x) {
            return Ok(0.0);
        }
        Ok(if q % 2 == 1 { self.eval(x) } else { 1.0 })
    }
}

/// Finite truncation of the dyadic system: all cubes of scale `fine..=top`
/// inside a window tiled by top-scale cubes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedLattice {
    dim: u8,
    top: i32,
    fine: i32,
    /// Window corners in units of top-scale cells.
    lo: [i64; 2],
    hi: [i64; 2],
}

impl TruncatedLattice {
    /// Window `prod_a [lo_a 2^top, hi_a 2^top)` with scales `fine..=top`.
    pub fn new(dim: usize, top: i32, fine: i32, lo: &[i64], hi: &[i64]) -> Result<Self> {
        check_dim(dim)?;
        if lo.len() != dim || hi.len() != dim {
            return Err(DyadError::DimensionMismatch {
                expected: dim,
                got: lo.len().min(hi.len()),
            });
        }
        if fine > top {
            return Err(DyadError::DegenerateLattice { fine, top });
        }
        if top - fine > MAX_LEVELS {
            return Err(DyadError::BudgetExceeded(format!(
                "{} scales requested, at most {MAX_LEVELS} allowed",
                top - fine + 1
            )));
        }
        let mut l = [0i64, 0];
        let mut h = [0i64, 1];
        let mut cells: u64 = 1;
        for a in 0..dim {
            if hi[a] <= lo[a] {
                return Err(DyadError::InvalidParameter("empty lattice window".into()));
            }
            l[a] = lo[a];
            h[a] = hi[a];
            let per = ((hi[a] - lo[a]) as u64)
                .checked_shl((top - fine) as u32)
                .filter(|v| v >> (top - fine) == (hi[a] - lo[a]) as u64)
                .ok_or_else(|| DyadError::BudgetExceeded("cell count overflow".into()))?;
            cells = cells.saturating_mul(per);
        }
        if cells > MAX_FINE_CELLS {
            return Err(DyadError::BudgetExceeded(format!(
                "{cells} finest cells requested, at most {MAX_FINE_CELLS} allowed"
            )));
        }
        Ok(TruncatedLattice {
            dim: dim as u8,
            top,
            fine,
            lo: l,
            hi: h,
        })
    }

    /// Window `[-2^k, 2^k)^d`, scales `-l..=k`.
    pub fn symmetric(dim: usize, k: i32, l: i32) -> Result<Self> {
        Self::new(dim, k, -l, &vec![-1; dim], &vec![1; dim])
    }

    /// Same window and top scale, finest scale `-l`.
    pub fn with_depth(&self, l: i32) -> Result<Self> {
        Self::new(self.dim(), self.top, -l, &self.lo[..self.dim()], &self.hi[..self.dim()])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Coarsest scale `K`.
    pub fn top(&self) -> i32 {
        self.top
    }

    /// Finest scale `-L`.
    pub fn fine(&self) -> i32 {
        self.fine
    }

    pub fn depth(&self) -> i32 {
        -self.fine
    }

    pub fn window_lo(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.lo[axis], self.top)
    }

    pub fn window_hi(&self, axis: usize) -> Dyadic {
        Dyadic::new(self.hi[axis], self.top)
    }

    pub fn window_measure(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.window_hi(a).to_f64() - self.window_lo(a).to_f64())
            .product()
    }

    /// Cells per axis at scale `s` (any `s <= top`).
    pub fn per_axis(&self, s: i32, axis: usize) -> i64 {
        (self.hi[axis] - self.lo[axis]) << (self.top - s)
    }

    /// Index of the first cell along `axis` at scale `s`.
    pub fn origin(&self, s: i32, axis: usize) -> i64 {
        self.lo[axis] << (self.top - s)
    }

    /// Number of cells at scale `s` (any `s <= top`).
    pub fn cells(&self, s: i32) -> usize {
        (0..self.dim()).map(|a| self.per_axis(s, a) as usize).product()
    }

    /// Row-major position of `I` among the cells of its scale.
    pub fn flat_index(&self, i: &DyadicInterval) -> Option<usize> {
        if i.dim() != self.dim() || i.scale() > self.top {
            return None;
        }
        let s = i.scale();
        let mut flat = 0usize;
        for a in 0..self.dim() {
            let off = i.index()[a] - self.origin(s, a);
            if off < 0 || off >= self.per_axis(s, a) {
                return None;
            }
            flat = flat * self.per_axis(s, a) as usize + off as usize;
        }
        Some(flat)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn interval_at(&self, s: i32, flat: usize) -> DyadicInterval {
        match self.dim {
            1 => DyadicInterval::new1(s, self.origin(s, 0) + flat as i64),
            _ => {
                let w = self.per_axis(s, 1) as usize;
                DyadicInterval::new2(
                    s,
                    self.origin(s, 0) + (flat / w) as i64,
                    self.origin(s, 1) + (flat % w) as i64,
                )
            }
        }
    }

    /// Flat index at scale `s - 1` of child `c` of the cell `flat` at scale `s`.
    pub fn child_flat(&self, s: i32, flat: usize, c: usize) -> usize {
        match self.dim {
            1 => 2 * flat + (c & 1),
            _ => {
                let w = self.per_axis(s, 1) as usize;
                let (j0, j1) = (flat / w, flat % w);
                (2 * j0 + ((c >> 1) & 1)) * (2 * w) + 2 * j1 + (c & 1)
            }
        }
    }

    /// Flat index at scale `s + 1` of the parent of cell `flat` at scale `s`.
    pub fn parent_flat(&self, s: i32, flat: usize) -> usize {
        match self.dim {
            1 => flat / 2,
            _ => {
                let w = self.per_axis(s, 1) as usize;
                let (c0, c1) = (flat / w, flat % w);
                (c0 / 2) * (w / 2) + c1 / 2
            }
        }
    }

    /// All cubes, coarsest scale first, row-major within a scale.
    pub fn enumerate(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        (self.fine..=self.top)
            .rev()
            .flat_map(move |s| (0..self.cells(s)).map(move |j| self.interval_at(s, j)))
    }

    /// Number of cubes produced by [`enumerate`](Self::enumerate).
    pub fn count(&self) -> usize {
        (self.fine..=self.top).map(|s| self.cells(s)).sum()
    }

    pub fn contains_interval(&self, i: &DyadicInterval) -> bool {
        i.scale() >= self.fine && self.flat_index(i).is_some()
    }

    /// True when the point lies in the window.
    pub fn contains_point(&self, x: &[Dyadic]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|a| x[a] >= self.window_lo(a) && x[a] < self.window_hi(a))
    }
}
