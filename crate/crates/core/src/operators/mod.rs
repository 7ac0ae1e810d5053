//! Dyadic shifts, Haar multipliers, paraproducts and commutators.

mod handle;
mod multilinear;
mod shift;

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::DyadicInterval;
use crate::error::{DyadError, Result};

pub use handle::{commutator, iterated_commutator, Operator};
pub use multilinear::{apply_p, apply_pi, apply_t, noncompact_family, reconstruct_product, MultilinearPlan};
pub use shift::{apply_shift, ShiftSpec, ShiftTerm};

pub(crate) use shift::shift_kernel;

/// `α ∈ {0,1}^m`; `σ(α)` counts the zero entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaVector(Vec<u8>);

impl AlphaVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(DyadError::InvalidParameter("alpha vector must be nonempty".into()));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(DyadError::InvalidParameter("alpha entries must be 0 or 1".into()));
        }
        Ok(AlphaVector(bits))
    }

    pub fn zeros(m: usize) -> Self {
        AlphaVector(vec![0; m.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, j: usize) -> u8 {
        self.0[j]
    }

    pub fn sigma(&self) -> u32 {
        self.0.iter().filter(|&&b| b == 0).count() as u32
    }

    pub fn is_all_ones(&self) -> bool {
        self.0.iter().all(|&b| b == 1)
    }

    /// Every vector of length `m` except the all-ones one, in binary order.
    pub fn all_but_ones(m: usize) -> Vec<AlphaVector> {
        (0..(1usize << m) - 1)
            .map(|code| AlphaVector((0..m).map(|j| ((code >> (m - 1 - j)) & 1) as u8).collect()))
            .collect()
    }
}

impl Serialize for AlphaVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        AlphaVector::new(Vec::<u8>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Exponents `p_1, …, p_m` with `1/p = Σ 1/p_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponents(Vec<f64>);

impl Exponents {
    /// Each `p_j` must lie in `[1, ∞)`; `p_j = 1` is kept for the weight endpoint.
    pub fn new(ps: Vec<f64>) -> Result<Self> {
        if ps.is_empty() {
            return Err(DyadError::InvalidParameter("at least one exponent is required".into()));
        }
        for &p in &ps {
            if !p.is_finite() || p < 1.0 {
                return Err(DyadError::InvalidParameter(format!("exponent {p} is outside [1, inf)")));
            }
        }
        Ok(Exponents(ps))
    }

    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Target exponent `p`.
    pub fn p(&self) -> f64 {
        1.0 / self.0.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    /// `p_j' = p_j / (p_j - 1)`, infinite at `p_j = 1`.
    pub fn conjugate(&self, j: usize) -> f64 {
        let p = self.0[j];
        if p == 1.0 {
            f64::INFINITY
        } else {
            p / (p - 1.0)
        }
    }
}

impl Serialize for Exponents {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exponents {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Exponents::new(Vec::<f64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A bounded sequence `ε_I`: explicit assignments, then either a constant
/// default or, with `escape_radius = R`, the default on intervals inside
/// `(-∞, -R] ∪ [R, ∞)` and zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonSeq {
    default: f64,
    escape_radius: Option<f64>,
    assign: BTreeMap<DyadicInterval, f64>,
}

#[derive(Serialize, Deserialize)]
struct EpsAssign {
    #[serde(rename = "I")]
    interval: DyadicInterval,
    eps: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsRepr {
    #[serde(default = "one")]
    default: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    escape_radius: Option<f64>,
    #[serde(default)]
    assign: Vec<EpsAssign>,
}

fn one() -> f64 {
    1.0
}

impl Serialize for EpsilonSeq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EpsRepr {
            default: self.default,
            escape_radius: self.escape_radius,
            assign: self
                .assign
                .iter()
                .map(|(i, e)| EpsAssign { interval: *i, eps: *e })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpsilonSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let r = EpsRepr::deserialize(d)?;
        let mut e = EpsilonSeq::constant(r.default).map_err(D::Error::custom)?;
        if let Some(radius) = r.escape_radius {
            e = EpsilonSeq::escaping(r.default, radius).map_err(D::Error::custom)?;
        }
        for a in r.assign {
            e = e.with(a.interval, a.eps).map_err(D::Error::custom)?;
        }
        Ok(e)
    }
}

impl EpsilonSeq {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(DyadError::NonFinite(value));
        }
        Ok(EpsilonSeq {
            default: value,
            escape_radius: None,
            assign: BTreeMap::new(),
        })
    }

    pub fn ones() -> Self {
        Self::constant(1.0).expect("finite")
    }

    /// `value` on intervals outside `(-radius, radius)`, zero on the rest.
    pub fn escaping(value: f64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(DyadError::InvalidParameter(format!(
                "escape radius {radius} must be finite and nonnegative"
            )));
        }
        let mut e = Self::constant(value)?;
        e.escape_radius = Some(radius);
        Ok(e)
    }

    /// Overrides `ε_I`.
    pub fn with(mut self, interval: DyadicInterval, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(DyadError::NonFinite(value));
        }
        self.assign.insert(interval, value);
        Ok(self)
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn assignments(&self) -> &BTreeMap<DyadicInterval, f64> {
        &self.assign
    }

    pub fn escape_radius(&self) -> Option<f64> {
        self.escape_radius
    }

    pub fn value(&self, i: &DyadicInterval) -> f64 {
        if let Some(v) = self.assign.get(i) {
            return *v;
        }
        match self.escape_radius {
            None => self.default,
            Some(r) => {
                let outside = (0..i.dim()).any(|a| i.lower(a).to_f64() >= r || i.upper(a).to_f64() <= -r);
                if outside {
                    self.default
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup |ε_I|` over the rule.
    pub fn sup_bound(&self) -> f64 {
        self.assign.values().fold(self.default.abs(), |m, v| m.max(v.abs()))
    }

    /// True when the sequence is identically one.
    pub fn is_identically_one(&self) -> bool {
        self.default == 1.0 && self.escape_radius.is_none() && self.assign.values().all(|&v| v == 1.0)
    }
}
