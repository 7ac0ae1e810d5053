//! Every probe once at small desk size, for reproducibility checks and
//! quick smoke runs.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::dyadic::TruncatedLattice;
use crate::error::{DyadError, Result};
use crate::generators::{hat, random_lipschitz};
use crate::operators::{AlphaVector, EpsilonSeq, Exponents, Operator, ShiftSpec};
use crate::weights::WeightVector;

use super::batch::BatchConfig;
use super::compact::{
    commutator_compactness_probe, oscillating_symbol_probe, oscillation_factors, pi_compactness_probe,
    shift_commutator_probe, DecayOptions,
};
use super::continuity::{continuity_probe, sample_points, ContinuityOptions};
use super::fkrt::{noncompact_shift_probe, noncompact_t_probe};
use super::opnorm::opnorm_lower_bound;
use super::weighted::{weighted_ratio_probe, WeightedOptions};

fn value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| DyadError::InvalidParameter(format!("serialization failed: {e}")))
}

/// Reports keyed by probe name.
pub fn run_suite(seed: u64) -> Result<BTreeMap<String, Value>> {
    let mut out = BTreeMap::new();
    let lat1 = |k, l| TruncatedLattice::symmetric(1, k, l);
    let opts = DecayOptions {
        k_grid: (1..=3).collect(),
        h_grid: (1..=5).map(|e| crate::dyadic::ldexp(1.0, -e)).collect(),
        batch: BatchConfig {
            seed,
            random: 8,
            dictionary: true,
        },
        split_instances: 8,
        ..DecayOptions::default()
    };
    let a00 = AlphaVector::new(vec![0, 0])?;
    let p22 = Exponents::new(vec![2.0, 2.0])?;
    let p2 = Exponents::new(vec![2.0])?;

    let lat = lat1(3, 6)?;
    out.insert(
        "noncompact_t".into(),
        value(&noncompact_t_probe(&EpsilonSeq::ones(), &a00, &p22, &lat, 1.0)?)?,
    );
    out.insert(
        "noncompact_shift".into(),
        value(&noncompact_shift_probe(&ShiftSpec::canonical(1, 0, &lat)?, 2.0, &lat)?)?,
    );

    let lat = lat1(4, 6)?;
    let b = hat(&lat, &[0.0], 1.0, 1.0)?;
    out.insert(
        "pi_compactness".into(),
        value(&pi_compactness_probe(&b, &a00, &p22, &lat, &opts)?)?,
    );
    let t = Operator::T {
        eps: EpsilonSeq::ones(),
        alpha: a00.clone(),
        use_tops: false,
    };
    out.insert(
        "commutator_compactness".into(),
        value(&commutator_compactness_probe(&b, &t, 1, &p22, &lat, &opts, 0.1)?)?,
    );
    out.insert(
        "shift_commutator".into(),
        value(&shift_commutator_probe(
            &b,
            &ShiftSpec::canonical(1, 1, &lat)?,
            2.0,
            &lat,
            &opts,
            8,
        )?)?,
    );

    let lat = lat1(1, 7)?;
    out.insert(
        "oscillating_symbol".into(),
        value(&oscillating_symbol_probe(
            &[1, 2, 3],
            &AlphaVector::new(vec![0])?,
            &p2,
            &lat,
            &oscillation_factors(),
            0.1,
        )?)?,
    );

    let lat = lat1(2, 8)?;
    let f = random_lipschitz(&lat, seed, 0, 2.0, -3)?;
    let points = sample_points(&lat, 5, 1.5)?;
    out.insert(
        "continuity".into(),
        value(&continuity_probe(
            &Operator::Shift(ShiftSpec::canonical(1, 0, &lat)?),
            &[f.function],
            f.lipschitz,
            &lat,
            &points,
            &ContinuityOptions::default(),
        )?)?,
    );

    let lat = lat1(2, 5)?;
    out.insert(
        "opnorm".into(),
        value(&opnorm_lower_bound(&Operator::identity(), &p2, &lat, 8, seed)?)?,
    );

    let lat = lat1(1, 5)?;
    let bs = vec![
        random_lipschitz(&lat, seed, 1, 1.0, -2)?.function,
        hat(&lat, &[0.25], 0.5, 1.0)?,
    ];
    let wopts = WeightedOptions {
        batch: BatchConfig {
            seed,
            random: 8,
            dictionary: false,
        },
        ..WeightedOptions::default()
    };
    out.insert(
        "weighted_ratio".into(),
        value(&weighted_ratio_probe(
            &bs,
            &EpsilonSeq::ones(),
            &AlphaVector::new(vec![0, 1])?,
            &WeightVector::unit(2, &lat),
            &p22,
            &lat,
            &wopts,
        )?)?,
    );
    Ok(out)
}
