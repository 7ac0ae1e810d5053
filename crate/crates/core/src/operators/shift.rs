//! Elementary dyadic shifts `Σ_I (1/|I|) Σ λ ⟨f, h_{I'}⟩ h_{I''}`.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, HaarPattern, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::levels::{ChiAccumulator, Pyramid};
use crate::par;
use crate::stepfn::StepFunction;

/// One summand `λ ⟨f, h_{I'}⟩ h_{I''} / |I|` attached to `I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftTerm {
    #[serde(rename = "I")]
    pub interval: DyadicInterval,
    pub source: DyadicInterval,
    pub target: DyadicInterval,
    pub lambda: f64,
}

/// A shift with parameters `(m, n)`: sources have side `2^{-m} l(I)`,
/// targets side `2^{-n} l(I)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSpec {
    m: u32,
    n: u32,
    dim: usize,
    source_pattern: HaarPattern,
    target_pattern: HaarPattern,
    terms: Vec<ShiftTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftRepr {
    m: u32,
    n: u32,
    dim: usize,
    #[serde(default)]
    source_pattern: Option<HaarPattern>,
    #[serde(default)]
    target_pattern: Option<HaarPattern>,
    terms: Vec<ShiftTerm>,
}

impl<'de> Deserialize<'de> for ShiftSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let r = ShiftRepr::deserialize(d)?;
        let std = HaarPattern::standard(r.dim).map_err(D::Error::custom)?;
        ShiftSpec::new(
            r.m,
            r.n,
            r.dim,
            r.source_pattern.unwrap_or_else(|| std.clone()),
            r.target_pattern.unwrap_or(std),
            r.terms,
        )
        .map_err(D::Error::custom)
    }
}

impl ShiftSpec {
    /// Validates containment, side lengths and `|λ| ‖h_{I'}‖_∞ ‖h_{I''}‖_∞ ≤ 1`.
    pub fn new(
        m: u32,
        n: u32,
        dim: usize,
        source_pattern: HaarPattern,
        target_pattern: HaarPattern,
        mut terms: Vec<ShiftTerm>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(DyadError::UnsupportedDimension(dim));
        }
        for p in [&source_pattern, &target_pattern] {
            if p.dim() != dim {
                return Err(DyadError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        let norm = source_pattern.sup_norm() * target_pattern.sup_norm();
        for t in &terms {
            if t.interval.dim() != dim || t.source.dim() != dim || t.target.dim() != dim {
                return Err(DyadError::ShiftGeometry("term dimension differs from the shift".into()));
            }
            if t.source.scale() != t.interval.scale() - m as i32 || !t.interval.contains(&t.source) {
                return Err(DyadError::ShiftGeometry(format!(
                    "source {} is not a scale-(k-{m}) subcube of {}",
                    t.source, t.interval
                )));
            }
            if t.target.scale() != t.interval.scale() - n as i32 || !t.interval.contains(&t.target) {
                return Err(DyadError::ShiftGeometry(format!(
                    "target {} is not a scale-(k-{n}) subcube of {}",
                    t.target, t.interval
                )));
            }
            if !t.lambda.is_finite() {
                return Err(DyadError::NonFinite(t.lambda));
            }
            let v = t.lambda.abs() * norm;
            if v > 1.0 + 1e-12 {
                return Err(DyadError::ShiftNormalization(v));
            }
        }
        terms.sort_by_key(|a| (a.interval, a.source, a.target));
        Ok(ShiftSpec {
            m,
            n,
            dim,
            source_pattern,
            target_pattern,
            terms,
        })
    }

    /// All pairs `(I', I'')` for every lattice cube deep enough to host them,
    /// with `λ = coeff(I, I', I'')` (zero coefficients dropped).
    pub fn full_tensor<F>(
        m: u32,
        n: u32,
        lat: &TruncatedLattice,
        source_pattern: HaarPattern,
        target_pattern: HaarPattern,
        coeff: F,
    ) -> Result<Self>
    where
        F: Fn(&DyadicInterval, &DyadicInterval, &DyadicInterval) -> f64,
    {
        let r = m.max(n) as i32;
        let mut terms = Vec::new();
        for i in lat.enumerate() {
            if i.scale() - r < lat.fine() {
                continue;
            }
            let sources = descendants(&i, m);
            let targets = descendants(&i, n);
            for s in &sources {
                for t in &targets {
                    let lambda = coeff(&i, s, t);
                    if lambda != 0.0 {
                        terms.push(ShiftTerm {
                            interval: i,
                            source: *s,
                            target: *t,
                            lambda,
                        });
                    }
                }
            }
        }
        Self::new(m, n, lat.dim(), source_pattern, target_pattern, terms)
    }

    /// Full tensor with standard Haar patterns and `λ = 1`.
    pub fn canonical(m: u32, n: u32, lat: &TruncatedLattice) -> Result<Self> {
        let p = HaarPattern::standard(lat.dim())?;
        Self::full_tensor(m, n, lat, p.clone(), p, |_, _, _| 1.0)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Complexity `max(m, n)`.
    pub fn complexity(&self) -> u32 {
        self.m.max(self.n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[ShiftTerm] {
        &self.terms
    }

    pub fn source_pattern(&self) -> &HaarPattern {
        &self.source_pattern
    }

    pub fn target_pattern(&self) -> &HaarPattern {
        &self.target_pattern
    }

    /// The terms of one cube `I`.
    pub fn terms_of(&self, i: &DyadicInterval) -> &[ShiftTerm] {
        let lo = self.terms.partition_point(|t| t.interval < *i);
        let hi = self.terms.partition_point(|t| t.interval <= *i);
        &self.terms[lo..hi]
    }

    /// Same spec keeping only the terms selected by `keep`.
    pub fn filtered<F: Fn(&ShiftTerm) -> bool>(&self, keep: F) -> Self {
        ShiftSpec {
            terms: self.terms.iter().filter(|t| keep(t)).copied().collect(),
            ..self.clone()
        }
    }
}

fn descendants(i: &DyadicInterval, depth: u32) -> Vec<DyadicInterval> {
    let mut v = vec![*i];
    for _ in 0..depth {
        v = v.iter().flat_map(|c| c.children()).collect();
    }
    v
}

/// Applies a term list with per-term coefficient `weight(term)` in place of `λ`.
/// `f` must be on the lattice grid; terms must lie inside the lattice.
pub(crate) fn shift_kernel<W>(
    lat: &TruncatedLattice,
    f: &StepFunction,
    source_pattern: &HaarPattern,
    target_pattern: &HaarPattern,
    terms: &[ShiftTerm],
    weight: W,
) -> Result<StepFunction>
where
    W: Fn(&ShiftTerm) -> f64 + Sync + Send,
{
    let mut out_fine = lat.fine();
    for t in terms {
        if lat.flat_index(&t.interval).is_none() {
            return Err(DyadError::WindowMismatch(format!(
                "shift cube {} is outside the lattice",
                t.interval
            )));
        }
        if t.source.scale() < lat.fine() || t.target.scale() < lat.fine() {
            return Err(DyadError::DepthViolation(format!(
                "term of {} reaches below the finest lattice scale {}",
                t.interval,
                lat.fine()
            )));
        }
        out_fine = out_fine.min(t.target.scale() - 1);
    }
    let pyr = Pyramid::integrals(lat, f);
    let coeffs = par::map_slice(terms, |t| {
        let w = weight(t);
        if w == 0.0 {
            return 0.0;
        }
        let j = lat.flat_index(&t.source).expect("source inside lattice");
        w * pyr.haar(lat, source_pattern, t.source.scale(), j) / t.interval.measure()
    });
    let mut acc = ChiAccumulator::new(lat, out_fine);
    for (t, c) in terms.iter().zip(coeffs) {
        if c != 0.0 {
            let j = lat.flat_index(&t.target).expect("target inside lattice");
            acc.add_haar(lat, target_pattern, t.target.scale(), j, c);
        }
    }
    Ok(acc.synthesize(lat))
}

/// `Σ_I (1/|I|) Σ_{(I', I'', λ)} λ ⟨f, h_{I'}⟩ h_{I''}` on the lattice.
/// Output resolution is the lattice resolution, or one level below the
/// finest target cube when that is finer.
pub fn apply_shift(spec: &ShiftSpec, f: &StepFunction, lat: &TruncatedLattice) -> Result<StepFunction> {
    if spec.dim != lat.dim() {
        return Err(DyadError::DimensionMismatch {
            expected: lat.dim(),
            got: spec.dim,
        });
    }
    let g = f.to_lattice(lat)?;
    shift_kernel(lat, &g, &spec.source_pattern, &spec.target_pattern, &spec.terms, |t| {
        t.lambda
    })
}
