//! Multilinear Haar multipliers `T_ε^α`, `P^α` and paraproducts `π_b^α`.

use crate::dyadic::{ldexp, DyadicInterval, HaarFunction, HaarPattern, TruncatedLattice};
use crate::error::{DyadError, Result};
use crate::levels::{ChiAccumulator, Pyramid};
use crate::par;
use crate::stepfn::StepFunction;

use super::{AlphaVector, EpsilonSeq, Exponents};

/// Inputs restated on a d = 1 lattice together with their integral pyramids,
/// so several operators can be applied to the same `f⃗` cheaply.
#[derive(Clone, Debug)]
pub struct MultilinearPlan {
    lat: TruncatedLattice,
    inputs: Vec<StepFunction>,
    pyramids: Vec<Pyramid>,
    pattern: HaarPattern,
}

impl MultilinearPlan {
    pub fn new(fs: &[StepFunction], lat: &TruncatedLattice) -> Result<Self> {
        if lat.dim() != 1 {
            return Err(DyadError::RequiresOneDimension);
        }
        if fs.is_empty() {
            return Err(DyadError::Empty("multilinear operators need at least one input".into()));
        }
        let inputs = fs.iter().map(|f| f.to_lattice(lat)).collect::<Result<Vec<_>>>()?;
        let pyramids = inputs.iter().map(|f| Pyramid::integrals(lat, f)).collect();
        Ok(MultilinearPlan {
            lat: lat.clone(),
            inputs,
            pyramids,
            pattern: HaarPattern::standard(1)?,
        })
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[StepFunction] {
        &self.inputs
    }

    pub fn lattice(&self) -> &TruncatedLattice {
        &self.lat
    }

    fn check_alpha(&self, alpha: &AlphaVector) -> Result<()> {
        if alpha.len() != self.arity() {
            return Err(DyadError::ArityMismatch {
                expected: alpha.len(),
                got: self.arity(),
            });
        }
        Ok(())
    }

    /// `Σ_I w(I) Π_j (⟨f_j, h_I^{1+α_j}⟩/|I|) h_I^{power}`.
    pub fn weighted<W>(&self, alpha: &AlphaVector, power: u32, weight: W) -> Result<StepFunction>
    where
        W: Fn(&DyadicInterval) -> f64 + Sync + Send,
    {
        self.check_alpha(alpha)?;
        Ok(kernel(
            &self.lat,
            &self.pyramids,
            &self.pattern,
            alpha,
            power,
            |s, j| weight(&self.lat.interval_at(s, j)),
        ))
    }

    /// `T_ε^α(f⃗)`; with `use_tops` (only for `m = 1`, `α = (0)`) the top-cell
    /// averages are added so that `ε ≡ 1` reproduces the input.
    pub fn t(&self, eps: &EpsilonSeq, alpha: &AlphaVector, use_tops: bool) -> Result<StepFunction> {
        if alpha.is_all_ones() {
            return Err(DyadError::AllOnesAlpha);
        }
        self.check_alpha(alpha)?;
        if use_tops && (alpha.len() != 1 || alpha.bit(0) != 0) {
            return Err(DyadError::InvalidParameter(
                "top averages are only defined for m = 1, alpha = (0)".into(),
            ));
        }
        let constant = eps.assignments().is_empty() && eps.escape_radius().is_none();
        let c = eps.default_value();
        let lat = &self.lat;
        let sigma = alpha.sigma();
        let mut acc = if constant {
            kernel_acc(lat, &self.pyramids, &self.pattern, alpha, sigma, |_, _| c)
        } else {
            kernel_acc(lat, &self.pyramids, &self.pattern, alpha, sigma, |s, j| {
                eps.value(&lat.interval_at(s, j))
            })
        };
        if use_tops {
            let top = lat.top();
            let mu = ldexp(1.0, top);
            let avg: Vec<f64> = self.pyramids[0].level(top).iter().map(|v| v / mu).collect();
            acc.add_chi_level(top, &avg);
        }
        Ok(acc.synthesize(lat))
    }

    /// `P^α(f⃗)`.
    pub fn p(&self, alpha: &AlphaVector) -> Result<StepFunction> {
        self.t(&EpsilonSeq::ones(), alpha, false)
    }

    /// `π_b^α(f⃗)`.
    pub fn pi(&self, b: &StepFunction, alpha: &AlphaVector) -> Result<StepFunction> {
        self.check_alpha(alpha)?;
        let lat = &self.lat;
        let bl = b.to_lattice(lat)?;
        let pb = Pyramid::integrals(lat, &bl);
        let pattern = &self.pattern;
        Ok(kernel(
            lat,
            &self.pyramids,
            pattern,
            alpha,
            1 + alpha.sigma(),
            |s, j| pb.haar(lat, pattern, s, j) / ldexp(1.0, s),
        ))
    }
}

fn kernel_acc<W>(
    lat: &TruncatedLattice,
    pyrs: &[Pyramid],
    pattern: &HaarPattern,
    alpha: &AlphaVector,
    power: u32,
    weight: W,
) -> ChiAccumulator
where
    W: Fn(i32, usize) -> f64 + Sync + Send,
{
    let mut acc = ChiAccumulator::new(lat, lat.fine());
    for s in lat.fine() + 1..=lat.top() {
        let inv = ldexp(1.0, -s);
        let coeffs = par::map(lat.cells(s), |j| {
            let mut prod = weight(s, j);
            for (slot, pyr) in pyrs.iter().enumerate() {
                if prod == 0.0 {
                    return 0.0;
                }
                let f = if alpha.bit(slot) == 0 {
                    pyr.haar(lat, pattern, s, j)
                } else {
                    pyr.level(s)[j]
                };
                prod *= f * inv;
            }
            prod
        });
        if power % 2 == 1 {
            acc.add_haar_level(lat, pattern, s, &coeffs);
        } else {
            acc.add_chi_level(s, &coeffs);
        }
    }
    acc
}

/// Shared multilinear sum over all lattice cubes above the finest scale
/// (finest cubes carry no Haar detail at the lattice resolution).
pub(crate) fn kernel<W>(
    lat: &TruncatedLattice,
    pyrs: &[Pyramid],
    pattern: &HaarPattern,
    alpha: &AlphaVector,
    power: u32,
    weight: W,
) -> StepFunction
where
    W: Fn(i32, usize) -> f64 + Sync + Send,
{
    kernel_acc(lat, pyrs, pattern, alpha, power, weight).synthesize(lat)
}

/// `T_ε^α(f⃗) = Σ_I ε_I Π_j (⟨f_j, h_I^{1+α_j}⟩/|I|) h_I^{σ(α)}`.
pub fn apply_t(
    eps: &EpsilonSeq,
    alpha: &AlphaVector,
    fs: &[StepFunction],
    lat: &TruncatedLattice,
    use_tops: bool,
) -> Result<StepFunction> {
    if alpha.is_all_ones() {
        return Err(DyadError::AllOnesAlpha);
    }
    MultilinearPlan::new(fs, lat)?.t(eps, alpha, use_tops)
}

/// `P^α(f⃗)`: `T_ε^α` with `ε ≡ 1`.
pub fn apply_p(alpha: &AlphaVector, fs: &[StepFunction], lat: &TruncatedLattice) -> Result<StepFunction> {
    apply_t(&EpsilonSeq::ones(), alpha, fs, lat, false)
}

/// `π_b^α(f⃗) = Σ_I (⟨b, h_I⟩/|I|) Π_j (⟨f_j, h_I^{1+α_j}⟩/|I|) h_I^{1+σ(α)}`.
pub fn apply_pi(
    b: &StepFunction,
    alpha: &AlphaVector,
    fs: &[StepFunction],
    lat: &TruncatedLattice,
) -> Result<StepFunction> {
    MultilinearPlan::new(fs, lat)?.pi(b, alpha)
}

/// `Σ_{α ≠ (1,…,1)} P^α(f⃗)` and its `L^p` distance to `Π f_j`.
pub fn reconstruct_product(fs: &[StepFunction], lat: &TruncatedLattice, p: f64) -> Result<(StepFunction, f64)> {
    if fs.len() < 2 {
        return Err(DyadError::InvalidParameter(
            "product reconstruction needs m >= 2".into(),
        ));
    }
    let plan = MultilinearPlan::new(fs, lat)?;
    let mut sum = StepFunction::lattice_zeros(lat);
    for alpha in AlphaVector::all_but_ones(fs.len()) {
        sum = sum.add(&plan.p(&alpha)?)?;
    }
    let mut prod = plan.inputs()[0].clone();
    for f in &plan.inputs()[1..] {
        prod = prod.mul(f)?;
    }
    let residual = sum.diff_norm(&prod, p)?;
    Ok((sum, residual))
}

/// `f_{I,j} = |I|^{-1/p_j} h_I^{1+α_j}`, each of unit `L^{p_j}` norm.
pub fn noncompact_family(i: &DyadicInterval, alpha: &AlphaVector, exps: &Exponents) -> Result<Vec<StepFunction>> {
    if i.dim() != 1 {
        return Err(DyadError::RequiresOneDimension);
    }
    if alpha.len() != exps.len() {
        return Err(DyadError::ArityMismatch {
            expected: alpha.len(),
            got: exps.len(),
        });
    }
    let h = HaarFunction::standard(*i);
    Ok((0..alpha.len())
        .map(|j| {
            let c = i.measure().powf(-1.0 / exps.get(j));
            if alpha.bit(j) == 0 {
                StepFunction::haar(&h, c)
            } else {
                StepFunction::indicator(i, i.scale() - 1, c).expect("valid scale")
            }
        })
        .collect())
}
