//! Operators as first-class values, commutators and iterated commutators.

use serde::{Deserialize, Serialize};

use crate::dyadic::TruncatedLattice;
use crate::error::{DyadError, Result};
use crate::stepfn::StepFunction;

use super::{apply_p, apply_pi, apply_shift, apply_t, AlphaVector, EpsilonSeq, ShiftSpec};

/// Any operator the crate can apply, with its parameters captured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Operator {
    #[serde(rename = "shift")]
    Shift(ShiftSpec),
    #[serde(rename = "T")]
    T {
        eps: EpsilonSeq,
        alpha: AlphaVector,
        #[serde(default)]
        use_tops: bool,
    },
    #[serde(rename = "P")]
    P { alpha: AlphaVector },
    #[serde(rename = "pi")]
    Pi { b: StepFunction, alpha: AlphaVector },
    /// `[b, inner]_slot`, slot counted from 1.
    #[serde(rename = "commutator")]
    Commutator {
        b: StepFunction,
        inner: Box<Operator>,
        slot: usize,
    },
    #[serde(rename = "iterated")]
    Iterated {
        bs: Vec<StepFunction>,
        eps: EpsilonSeq,
        alpha: AlphaVector,
    },
}

impl Operator {
    /// `T_{ε≡1}^{(0)}` with top averages: the identity on the lattice window.
    pub fn identity() -> Self {
        Operator::T {
            eps: EpsilonSeq::ones(),
            alpha: AlphaVector::zeros(1),
            use_tops: true,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Operator::Shift(_) => 1,
            Operator::T { alpha, .. } | Operator::P { alpha } | Operator::Pi { alpha, .. } => alpha.len(),
            Operator::Commutator { inner, .. } => inner.arity(),
            Operator::Iterated { alpha, .. } => alpha.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Operator::Shift(_) => "shift",
            Operator::T { .. } => "T",
            Operator::P { .. } => "P",
            Operator::Pi { .. } => "pi",
            Operator::Commutator { .. } => "commutator",
            Operator::Iterated { .. } => "iterated",
        }
    }

    pub fn apply(&self, fs: &[StepFunction], lat: &TruncatedLattice) -> Result<StepFunction> {
        if fs.len() != self.arity() {
            return Err(DyadError::ArityMismatch {
                expected: self.arity(),
                got: fs.len(),
            });
        }
        match self {
            Operator::Shift(spec) => apply_shift(spec, &fs[0], lat),
            Operator::T { eps, alpha, use_tops } => apply_t(eps, alpha, fs, lat, *use_tops),
            Operator::P { alpha } => apply_p(alpha, fs, lat),
            Operator::Pi { b, alpha } => apply_pi(b, alpha, fs, lat),
            Operator::Commutator { b, inner, slot } => commutator(b, inner, *slot, fs, lat),
            Operator::Iterated { bs, eps, alpha } => iterated_commutator(bs, eps, alpha, fs, lat),
        }
    }
}

/// `[b, op]_i(f⃗) = b · op(f⃗) - op(f_1, …, b f_i, …, f_m)` with `i` counted from 1.
pub fn commutator(
    b: &StepFunction,
    op: &Operator,
    slot: usize,
    fs: &[StepFunction],
    lat: &TruncatedLattice,
) -> Result<StepFunction> {
    let arity = op.arity();
    if slot == 0 || slot > arity {
        return Err(DyadError::SlotOutOfRange { index: slot, arity });
    }
    if fs.len() != arity {
        return Err(DyadError::ArityMismatch {
            expected: arity,
            got: fs.len(),
        });
    }
    let direct = b.mul(&op.apply(fs, lat)?)?;
    let mut moved = fs.to_vec();
    moved[slot - 1] = b.mul(&fs[slot - 1])?;
    direct.sub(&op.apply(&moved, lat)?)
}

/// `[b_1, [b_2, … [b_m, T_ε^α]_m …]_2]_1`.
pub fn iterated_commutator(
    bs: &[StepFunction],
    eps: &EpsilonSeq,
    alpha: &AlphaVector,
    fs: &[StepFunction],
    lat: &TruncatedLattice,
) -> Result<StepFunction> {
    if alpha.is_all_ones() {
        return Err(DyadError::AllOnesAlpha);
    }
    let m = alpha.len();
    if bs.len() != m {
        return Err(DyadError::ArityMismatch {
            expected: m,
            got: bs.len(),
        });
    }
    if fs.len() != m {
        return Err(DyadError::ArityMismatch {
            expected: m,
            got: fs.len(),
        });
    }
    let mut op = Operator::T {
        eps: eps.clone(),
        alpha: alpha.clone(),
        use_tops: false,
    };
    for j in (1..=m).rev() {
        op = Operator::Commutator {
            b: bs[j - 1].clone(),
            inner: Box::new(op),
            slot: j,
        };
    }
    op.apply(fs, lat)
}
