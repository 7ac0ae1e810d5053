//! Certified lower bounds for `sup_{‖f_j‖_{p_j} ≤ 1} ‖op(f⃗)‖_p`: every
//! reported value is attained by an explicit unit-norm input.

use serde::Serialize;

use crate::dyadic::TruncatedLattice;
use crate::error::{DyadError, Result};
use crate::operators::{Exponents, Operator};
use crate::par;
use crate::stepfn::StepFunction;

use super::batch::{atom, dictionary, near_cubes, normalized, orthant_cubes, random_members, Atom, Member};

const STREAM_OPNORM: u64 = 0x4f50_4e4d;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpnormReport {
    pub operator: String,
    pub p: f64,
    /// `‖op(f⃗)‖_p` at the best input found.
    pub value: f64,
    pub argmax: Option<String>,
    pub evaluations: usize,
    /// Value after the batch, before coordinate ascent.
    pub batch_value: f64,
}

impl OpnormReport {
    pub fn to_csv(&self) -> String {
        format!(
            "operator,p,batch_value [L^p norm],value [L^p norm],evaluations,argmax\n{},{:e},{:e},{:e},{},{}\n",
            self.operator,
            self.p,
            self.batch_value,
            self.value,
            self.evaluations,
            self.argmax.as_deref().unwrap_or("")
        )
    }
}

fn evaluate(op: &Operator, m: &Member, lat: &TruncatedLattice, p: f64) -> Result<f64> {
    op.apply(&m.inputs, lat)?.lp_norm(p)
}

/// Dictionary atoms plus `budget` random unit inputs, followed by coordinate
/// ascent on the best one: each slot in turn is replaced by an atom or mixed
/// with one (`f_j ± atom/2`, renormalized) while that improves the norm.
pub fn opnorm_lower_bound(
    op: &Operator,
    exps: &Exponents,
    lat: &TruncatedLattice,
    budget: usize,
    seed: u64,
) -> Result<OpnormReport> {
    if budget == 0 {
        return Err(DyadError::InvalidParameter("opnorm budget must be positive".into()));
    }
    let m = op.arity();
    if exps.len() != m {
        return Err(DyadError::ArityMismatch {
            expected: m,
            got: exps.len(),
        });
    }
    let p = exps.p();
    let mut cubes = orthant_cubes(lat);
    for i in near_cubes(lat, 10) {
        if !cubes.contains(&i) {
            cubes.push(i);
        }
    }
    let mut members = dictionary(&cubes, exps)?;
    members.extend(random_members(lat, exps, seed, STREAM_OPNORM, budget)?);
    let values = par::map_slice(&members, |mb| evaluate(op, mb, lat, p))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = values.len();
    let mut best = 0usize;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    let batch_value = values[best];
    let mut current = members[best].clone();
    let mut value = batch_value;

    // per-slot candidate atoms
    let atoms: Vec<Vec<(String, StepFunction)>> = (0..m)
        .map(|j| {
            cubes
                .iter()
                .flat_map(|i| {
                    [(Atom::Haar, 'h'), (Atom::Chi, 'c')]
                        .into_iter()
                        .map(move |(k, c)| atom(i, k, exps.get(j)).map(|a| (format!("{c}{i}"), a)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for _round in 0..2 {
        let mut improved = false;
        for j in 0..m {
            let mut trials: Vec<Member> = Vec::new();
            for (name, a) in &atoms[j] {
                let mut swap = current.inputs.clone();
                swap[j] = a.clone();
                trials.push(Member {
                    label: format!("{}[{}:={name}]", current.label, j + 1),
                    inputs: swap,
                });
                for s in [0.5, -0.5] {
                    let mixed = current.inputs[j].add(&a.scaled(s))?.to_lattice(lat)?;
                    if let Some(g) = normalized(&mixed, exps.get(j))? {
                        let mut inputs = current.inputs.clone();
                        inputs[j] = g;
                        trials.push(Member {
                            label: format!("{}[{}{:+}{name}]", current.label, j + 1, s),
                            inputs,
                        });
                    }
                }
            }
            let vals = par::map_slice(&trials, |mb| evaluate(op, mb, lat, p))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            evaluations += vals.len();
            let mut k_best = None;
            for (k, v) in vals.iter().enumerate() {
                if *v > value * (1.0 + 1e-12) && k_best.is_none_or(|b: usize| *v > vals[b]) {
                    k_best = Some(k);
                }
            }
            if let Some(k) = k_best {
                value = vals[k];
                current = trials.swap_remove(k);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(OpnormReport {
        operator: op.name().to_string(),
        p,
        value,
        argmax: Some(current.label),
        evaluations,
        batch_value,
    })
}
