mod common;

use common::*;
use dyadlab::generators::{constant, hat, linear, oscillating_input, oscillating_symbol, random_lipschitz};
use dyadlab::operators::commutator;
use dyadlab::probes::batch::{atom, Atom, BatchConfig};
use dyadlab::probes::continuity::{continuity_probe, is_dyadic_coordinate, sample_points, ContinuityOptions};
use dyadlab::probes::fit::FitStatus;
use dyadlab::probes::fkrt::{Condition, FkrtThresholds};
use dyadlab::probes::*;
use dyadlab::weights::WeightVector;
use dyadlab::{
    AlphaVector, DyadError, DyadicInterval, EpsilonSeq, Exponents, HaarPattern, Operator, ShiftSpec, ShiftTerm,
    StepFunction, TruncatedLattice,
};
use proptest::prelude::*;

fn small_opts() -> DecayOptions {
    DecayOptions {
        batch: BatchConfig {
            seed: 3,
            random: 4,
            dictionary: true,
        },
        split_instances: 4,
        ..DecayOptions::default()
    }
}

// ---- FKRT families -------------------------------------------------------

#[test]
fn escaping_translates_fail_tail_condition() {
    let family: Vec<StepFunction> = (0..7).map(|k| chi(0, 1 << k)).collect();
    let a: Vec<f64> = (0..6).map(|k| 2f64.powi(k)).collect();
    let t: Vec<f64> = (1..6).map(|k| 2f64.powi(-k)).collect();
    let r = fkrt_probe(
        &family,
        2.0,
        &a,
        &t,
        FkrtThresholds {
            tail: 1.0 - 1e-12,
            shift: 10.0,
        },
    )
    .unwrap();
    assert!(r.fails(Condition::B));
    assert!(!r.fails(Condition::C));
    for tp in &r.tail_profile {
        assert_eq!(tp.mass, 1.0);
    }
}

#[test]
fn shrinking_haar_atoms_fail_translation_condition() {
    let p = 2.0;
    let family: Vec<StepFunction> = (0..=8)
        .map(|k| atom(&DyadicInterval::new1(-k, 0), Atom::Haar, p).unwrap())
        .collect();
    let a: Vec<f64> = (0..4).map(|k| 2f64.powi(k)).collect();
    let t: Vec<f64> = (1..=6).map(|k| 2f64.powi(-k)).collect();
    let target = 2f64.powf(1.0 / p);
    let r = fkrt_probe(
        &family,
        p,
        &a,
        &t,
        FkrtThresholds {
            tail: 0.5,
            shift: target * (1.0 - 1e-9),
        },
    )
    .unwrap();
    assert!(r.fails(Condition::C));
    for sp in &r.shift_profile {
        assert!(sp.value >= target * (1.0 - 1e-12), "{} at t = {}", sp.value, sp.t);
    }
    assert!(!r.fails(Condition::B));
}

#[test]
fn singleton_family_passes_every_condition() {
    let f = atom(&DyadicInterval::new1(0, 0), Atom::Haar, 2.0).unwrap();
    let a: Vec<f64> = (0..4).map(|k| 2f64.powi(k)).collect();
    let t: Vec<f64> = (1..=8).map(|k| 2f64.powi(-k)).collect();
    let r = fkrt_probe(
        &[f],
        2.0,
        &a,
        &t,
        FkrtThresholds {
            tail: 0.25,
            shift: 0.25,
        },
    )
    .unwrap();
    assert!(!r.fails(Condition::A) && !r.fails(Condition::B) && !r.fails(Condition::C));
    assert_eq!(r.tail_profile.last().unwrap().mass, 0.0);
}

#[test]
fn fkrt_rejects_empty_inputs() {
    assert!(matches!(
        fkrt_probe(&[], 2.0, &[1.0], &[0.5], FkrtThresholds { tail: 1.0, shift: 1.0 }),
        Err(DyadError::Empty(_))
    ));
    assert!(fkrt_probe(&[chi(0, 0)], 2.0, &[], &[0.5], FkrtThresholds { tail: 1.0, shift: 1.0 }).is_err());
}

// ---- noncompactness ------------------------------------------------------

#[test]
fn identically_one_multiplier_is_not_compact() {
    let lat = TruncatedLattice::symmetric(1, 3, 6).unwrap();
    let alpha = AlphaVector::new(vec![0, 0]).unwrap();
    let exps = Exponents::new(vec![2.0, 2.0]).unwrap();
    let r = noncompact_t_probe(&EpsilonSeq::ones(), &alpha, &exps, &lat, 1.0).unwrap();
    let c = r.translation_lower_bound.unwrap();
    assert!((c - 2.0).abs() < 1e-12, "translation bound {c}");
    assert!(r.fkrt.fails(Condition::C));
    assert!(r.tail_lower_bound.unwrap() >= 1.0 - 1e-12);
    assert!(r.fkrt.fails(Condition::B));
}

#[test]
fn escaping_multiplier_fails_tail_condition() {
    let lat = TruncatedLattice::symmetric(1, 4, 4).unwrap();
    let alpha = AlphaVector::new(vec![0]).unwrap();
    let exps = Exponents::new(vec![2.0]).unwrap();
    let eps = EpsilonSeq::escaping(1.0, 2.0).unwrap();
    let r = noncompact_t_probe(&eps, &alpha, &exps, &lat, 1.0).unwrap();
    assert!(r.tail_lower_bound.unwrap() >= 1.0);
    assert!(r.fkrt.fails(Condition::B));
}

#[test]
fn zero_multiplier_has_no_qualifying_interval() {
    let lat = TruncatedLattice::symmetric(1, 2, 3).unwrap();
    let r = noncompact_t_probe(
        &EpsilonSeq::constant(0.0).unwrap(),
        &AlphaVector::new(vec![0]).unwrap(),
        &Exponents::new(vec![2.0]).unwrap(),
        &lat,
        1.0,
    );
    assert!(matches!(r, Err(DyadError::NoQualifyingInterval(_))));
}

#[test]
fn canonical_shift_is_not_compact() {
    let lat = TruncatedLattice::symmetric(1, 3, 6).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let r = noncompact_shift_probe(&spec, 2.0, &lat).unwrap();
    assert!(r.fkrt.fails(Condition::C));
    assert!(r.translation_lower_bound.unwrap() > 0.0);
    let empty = spec.filtered(|_| false);
    assert!(matches!(
        noncompact_shift_probe(&empty, 2.0, &lat),
        Err(DyadError::NoQualifyingInterval(_))
    ));
}

// ---- paraproduct decay -----------------------------------------------------

#[test]
fn zero_symbol_gives_identically_zero_fits() {
    let lat = TruncatedLattice::symmetric(1, 7, 9).unwrap();
    let b = StepFunction::lattice_zeros(&lat);
    let r = pi_compactness_probe(
        &b,
        &AlphaVector::new(vec![0]).unwrap(),
        &Exponents::new(vec![2.0]).unwrap(),
        &lat,
        &small_opts(),
    )
    .unwrap();
    assert!(r.identically_zero);
    assert_eq!(r.tail.status, FitStatus::IdenticallyZero);
    assert_eq!(r.modulus.as_ref().unwrap().status, FitStatus::IdenticallyZero);
    assert!(r.met());
}

#[test]
fn symbol_outside_the_unit_cube_is_rejected() {
    let lat = TruncatedLattice::symmetric(1, 3, 4).unwrap();
    let b = chi(0, 1);
    let r = pi_compactness_probe(
        &b,
        &AlphaVector::new(vec![0]).unwrap(),
        &Exponents::new(vec![2.0]).unwrap(),
        &lat,
        &small_opts(),
    );
    assert!(matches!(r, Err(DyadError::SupportViolation(_))));
}

#[test]
fn paraproduct_tail_decays_like_the_target_power() {
    let lat = TruncatedLattice::symmetric(1, 7, 9).unwrap();
    let b = hat(&lat, &[0.0], 1.0, 1.0).unwrap();
    let r = pi_compactness_probe(
        &b,
        &AlphaVector::new(vec![0]).unwrap(),
        &Exponents::new(vec![2.0]).unwrap(),
        &lat,
        &small_opts(),
    )
    .unwrap();
    let slope = r.tail.slope.unwrap();
    assert!((slope + 2.0).abs() <= 0.3, "tail slope {slope}");
    assert!(r.modulus.as_ref().unwrap().slope.unwrap() >= 0.45);
    assert!(r.met());
}

// ---- oscillating symbol ----------------------------------------------------

#[test]
fn oscillating_symbol_moduli_match_direct_summation() {
    let lat = TruncatedLattice::symmetric(1, 1, 7).unwrap();
    let alpha = AlphaVector::new(vec![0]).unwrap();
    let exps = Exponents::new(vec![2.0]).unwrap();
    let factors = [1.0, 2.0, 3.5];
    let r = oscillating_symbol_probe(&[3], &alpha, &exps, &lat, &factors, 0.01).unwrap();
    let row = &r.rows[0];

    let b = oscillating_symbol(&lat).unwrap();
    let f = oscillating_input(3).unwrap();
    let hb = |i: &DyadicInterval| pair_h(&b, i) / i.measure();
    let out = multilinear_oracle(&lat, &alpha, 1 + alpha.sigma(), std::slice::from_ref(&f), hb);
    let norm_f = f.lp_norm(2.0).unwrap();
    for (j, &x) in factors.iter().enumerate() {
        let t = x / 8.0;
        let direct = out.translate_f64(&[t]).unwrap().diff_norm(&out, 2.0).unwrap();
        assert!(
            (row.raw[j] - direct).abs() <= 1e-12 * direct.max(1.0),
            "t = {t}: {} vs {direct}",
            row.raw[j]
        );
        assert!((row.normalized[j] * norm_f - direct).abs() <= 1e-12 * direct.max(1.0));
    }
    assert!((norm_f - 2f64.powf(1.5)).abs() < 1e-12);
}

#[test]
fn oscillating_symbol_rejects_translations_out_of_range() {
    let lat = TruncatedLattice::symmetric(1, 1, 7).unwrap();
    let alpha = AlphaVector::new(vec![0]).unwrap();
    let exps = Exponents::new(vec![2.0]).unwrap();
    assert!(oscillating_symbol_probe(&[3], &alpha, &exps, &lat, &[0.5], 0.1).is_err());
    assert!(oscillating_symbol_probe(&[3], &alpha, &exps, &lat, &[6.0], 0.1).is_err());
    assert!(matches!(
        oscillating_symbol_probe(&[9], &alpha, &exps, &lat, &[1.0], 0.1),
        Err(DyadError::DepthViolation(_))
    ));
}

// ---- commutators -----------------------------------------------------------

#[test]
fn zero_symbol_commutator_is_identically_zero() {
    let lat = TruncatedLattice::symmetric(1, 3, 6).unwrap();
    let op = Operator::T {
        eps: EpsilonSeq::ones(),
        alpha: AlphaVector::new(vec![0, 0]).unwrap(),
        use_tops: false,
    };
    let exps = Exponents::new(vec![2.0, 2.0]).unwrap();
    let opts = DecayOptions {
        h_grid: (1..=5).map(|e| 2f64.powi(-e)).collect(),
        ..small_opts()
    };
    let r = commutator_compactness_probe(&StepFunction::lattice_zeros(&lat), &op, 1, &exps, &lat, &opts, 0.1).unwrap();
    assert!(r.identically_zero);
    assert_eq!(r.tail.status, FitStatus::IdenticallyZero);
    assert!(r.split.unwrap().passed);
}

#[test]
fn constant_symbol_commutes_with_shifts() {
    let lat = TruncatedLattice::symmetric(1, 2, 6).unwrap();
    let spec = ShiftSpec::canonical(1, 1, &lat).unwrap();
    let b = constant(&lat, 0.75);
    let mut r = rng(5);
    let f = random_step(&lat, -3, &mut r);
    let c = commutator(&b, &Operator::Shift(spec.clone()), 1, &[f], &lat).unwrap();
    assert!(c.sup_abs() < 1e-14);
    let opts = DecayOptions {
        h_grid: (1..=5).map(|e| 2f64.powi(-e)).collect(),
        k_grid: vec![0, 1],
        ..small_opts()
    };
    let rep = shift_commutator_probe(&b, &spec, 2.0, &lat, &opts, 0).unwrap();
    assert_eq!(rep.tail.status, FitStatus::IdenticallyZero);
    assert!(rep.split.unwrap().passed);
}

#[test]
fn commutator_probe_needs_a_multiplier_handle() {
    let lat = TruncatedLattice::symmetric(1, 2, 4).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let b = hat(&lat, &[0.0], 1.0, 1.0).unwrap();
    let exps = Exponents::new(vec![2.0]).unwrap();
    assert!(commutator_compactness_probe(&b, &Operator::Shift(spec), 1, &exps, &lat, &small_opts(), 0.1).is_err());
}

fn local_symbol(seed: u64, dim: usize) -> StepFunction {
    let mut r = rng(seed);
    if dim == 1 {
        random_local(-1.0, 1.0, -3, &mut r)
    } else {
        let lat = TruncatedLattice::symmetric(2, 0, 3).unwrap();
        random_step(&lat, -2, &mut r)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn five_term_split_is_exact(seed in any::<u64>(), m in 1usize..4, bits in 0u8..8, slot_pick in 0usize..3, h_exp in 1i32..6, neg in any::<bool>()) {
        let lat = TruncatedLattice::symmetric(1, 2, 5).unwrap();
        let mut r = rng(seed);
        let mut bits: Vec<u8> = (0..m).map(|j| (bits >> j) & 1).collect();
        bits[0] = 0;
        let alpha = AlphaVector::new(bits).unwrap();
        let eps = eps_random(&lat, &mut r);
        let fs: Vec<StepFunction> = (0..m).map(|_| random_step(&lat, -3, &mut r)).collect();
        let b = local_symbol(seed ^ 0x55, 1).to_lattice(&lat).unwrap();
        let slot = 1 + slot_pick % m;
        let h = 2f64.powi(-h_exp) * if neg { -1.0 } else { 1.0 };
        let (pieces, direct) = commutator_split(&b, &eps, &alpha, slot, &fs, &lat, h).unwrap();
        let mut sum = direct.scaled(-1.0);
        let mut scale = direct.sup_abs();
        for (s, g) in &pieces {
            sum = sum.add(&g.scaled(*s)).unwrap();
            scale = scale.max(g.sup_abs());
        }
        prop_assert!(sum.sup_abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn three_term_split_is_exact(seed in any::<u64>(), dim in 1usize..3, mm in 0u32..3, nn in 0u32..3, h_exp in 1i32..5) {
        let lat = TruncatedLattice::symmetric(dim, 1, 4).unwrap();
        let spec = ShiftSpec::canonical(mm, nn, &lat).unwrap();
        let mut r = rng(seed);
        let f = random_step(&lat, -2, &mut r);
        let b = local_symbol(seed ^ 0xaa, dim).to_lattice(&lat).unwrap();
        let (pieces, direct) = shift_commutator_split(&b, &spec, &f, &lat, 2f64.powi(-h_exp)).unwrap();
        let mut sum = direct.scaled(-1.0);
        let mut scale = direct.sup_abs();
        for (s, g) in &pieces {
            sum = sum.add(&g.scaled(*s)).unwrap();
            scale = scale.max(g.sup_abs());
        }
        prop_assert!(sum.sup_abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn decay_reports_are_reproducible(seed in 0u64..1000) {
        let lat = TruncatedLattice::symmetric(1, 3, 5).unwrap();
        let b = hat(&lat, &[0.0], 1.0, 1.0).unwrap();
        let opts = DecayOptions {
            k_grid: (0..3).collect(),
            h_grid: (1..=4).map(|e| 2f64.powi(-e)).collect(),
            batch: BatchConfig { seed, random: 3, dictionary: false },
            ..DecayOptions::default()
        };
        let a = pi_compactness_probe(&b, &AlphaVector::new(vec![0]).unwrap(), &Exponents::new(vec![2.0]).unwrap(), &lat, &opts).unwrap();
        let c = pi_compactness_probe(&b, &AlphaVector::new(vec![0]).unwrap(), &Exponents::new(vec![2.0]).unwrap(), &lat, &opts).unwrap();
        prop_assert_eq!(a, c);
    }
}

// ---- sharp maximal ratio ---------------------------------------------------

#[test]
fn sharp_maximal_ratio_is_finite_and_zero_for_constant_symbols() {
    let lat = TruncatedLattice::symmetric(1, 2, 6).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let s = mds_batch(&spec, &lat, 1, 6, 2.0).unwrap();
    assert!(s.sup_ratio.is_finite() && s.sup_ratio > 0.0);
    assert!(s.median_ratio <= s.sup_ratio);
    let mut r = rng(2);
    let f = random_step(&lat, -2, &mut r);
    let z = sharp_maximal_ratio(&constant(&lat, 2.0), &f, &spec, &lat, 2.0).unwrap();
    assert_eq!(z.sup_ratio, 0.0);
    assert_eq!(z.skipped, 0);
}

// ---- continuity ------------------------------------------------------------

fn single_term_shift() -> ShiftSpec {
    let p = HaarPattern::standard(1).unwrap();
    let term = ShiftTerm {
        interval: DyadicInterval::new1(0, 0),
        source: DyadicInterval::new1(-1, 0),
        target: DyadicInterval::new1(0, 0),
        lambda: 1.0,
    };
    ShiftSpec::new(1, 0, 1, p.clone(), p, vec![term]).unwrap()
}

#[test]
fn fine_scales_of_a_linear_input_respect_the_bound() {
    let lat = TruncatedLattice::symmetric(1, 2, 8).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let f = linear(&lat, 1.0);
    let pts = vec![vec![1.0 / 3.0], vec![-0.7]];
    let opts = ContinuityOptions {
        k0_grid: vec![4],
        ..ContinuityOptions::default()
    };
    let r = continuity_probe(&Operator::Shift(spec), &[f], 1.0, &lat, &pts, &opts).unwrap();
    let row = &r.fine_scale[0];
    assert!(row.measured > 0.0);
    assert!(row.margin >= 0.0, "{row:?}");
    assert!(r.met());
}

#[test]
fn constant_input_has_no_fine_scale_contribution() {
    let lat = TruncatedLattice::symmetric(1, 2, 6).unwrap();
    let spec = ShiftSpec::canonical(1, 1, &lat).unwrap();
    let r = continuity_probe(
        &Operator::Shift(spec),
        &[constant(&lat, 3.0)],
        0.0,
        &lat,
        &[vec![1.0 / 3.0]],
        &ContinuityOptions::default(),
    )
    .unwrap();
    for row in &r.fine_scale {
        assert_eq!(row.measured, 0.0);
        assert_eq!(row.margin, 0.0);
    }
}

#[test]
fn oscillation_shrinks_at_a_non_dyadic_point() {
    let lat = TruncatedLattice::symmetric(1, 2, 8).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let f = random_lipschitz(&lat, 4, 0, 2.0, -3).unwrap();
    let r = continuity_probe(
        &Operator::Shift(spec),
        &[f.function],
        f.lipschitz,
        &lat,
        &[vec![1.0 / 3.0]],
        &ContinuityOptions::default(),
    )
    .unwrap();
    let row = &r.oscillation[0];
    assert!(row.nonincreasing);
    assert!(row.oscillation[0] > 0.0);
    assert_eq!(row.last, 0.0);
    assert!(r.met());
}

#[test]
fn dyadic_sample_points_are_rejected() {
    let lat = TruncatedLattice::symmetric(1, 2, 6).unwrap();
    let spec = ShiftSpec::canonical(1, 0, &lat).unwrap();
    let f = linear(&lat, 1.0);
    for x in [0.0, 0.5, 0.375] {
        assert!(is_dyadic_coordinate(x, &lat).unwrap());
        let r = continuity_probe(
            &Operator::Shift(spec.clone()),
            std::slice::from_ref(&f),
            1.0,
            &lat,
            &[vec![x]],
            &ContinuityOptions::default(),
        );
        assert!(matches!(r, Err(DyadError::DyadicSamplePoint(_))));
    }
    for p in sample_points(&lat, 20, 1.0).unwrap() {
        assert!(!is_dyadic_coordinate(p[0], &lat).unwrap());
    }
}

// ---- operator norms --------------------------------------------------------

#[test]
fn identity_norm_is_at_least_one() {
    let lat = TruncatedLattice::symmetric(1, 2, 5).unwrap();
    let r = opnorm_lower_bound(&Operator::identity(), &Exponents::new(vec![2.0]).unwrap(), &lat, 4, 1).unwrap();
    assert!(r.value >= 1.0 - 1e-9);
}

#[test]
fn zero_multiplier_has_zero_norm() {
    let lat = TruncatedLattice::symmetric(1, 2, 5).unwrap();
    let op = Operator::T {
        eps: EpsilonSeq::constant(0.0).unwrap(),
        alpha: AlphaVector::new(vec![0, 1]).unwrap(),
        use_tops: false,
    };
    let r = opnorm_lower_bound(&op, &Exponents::new(vec![2.0, 2.0]).unwrap(), &lat, 4, 1).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn single_term_shift_norm_is_certified() {
    let lat = TruncatedLattice::symmetric(1, 2, 5).unwrap();
    let op = Operator::Shift(single_term_shift());
    let r = opnorm_lower_bound(&op, &Exponents::new(vec![2.0]).unwrap(), &lat, 8, 9).unwrap();
    assert!(r.value >= 0.5);
    // the sup over the unit ball is ‖h_[0,1/2)‖_2 ‖h_[0,1)‖_2 = 2^{-1/2}
    assert!(r.value <= 2f64.sqrt() / 2.0 + 1e-12);
    assert!(matches!(
        opnorm_lower_bound(&op, &Exponents::new(vec![2.0]).unwrap(), &lat, 0, 9),
        Err(DyadError::InvalidParameter(_))
    ));
}

// ---- weighted ratios -------------------------------------------------------

fn weighted_setup(lat: &TruncatedLattice) -> (Vec<StepFunction>, EpsilonSeq, AlphaVector, Exponents) {
    let b = random_lipschitz(lat, 11, 0, 1.0, -2).unwrap().function;
    let b2 = hat(lat, &[0.25], 0.5, 2.0).unwrap();
    (
        vec![b, b2],
        EpsilonSeq::ones(),
        AlphaVector::new(vec![0, 1]).unwrap(),
        Exponents::new(vec![2.0, 3.0]).unwrap(),
    )
}

#[test]
fn constant_symbols_give_zero_weighted_ratio() {
    let lat = TruncatedLattice::symmetric(1, 1, 5).unwrap();
    let (_, eps, alpha, exps) = weighted_setup(&lat);
    let bs = vec![constant(&lat, 1.0), constant(&lat, -2.0)];
    let opts = WeightedOptions {
        batch: BatchConfig {
            seed: 1,
            random: 6,
            dictionary: false,
        },
        ..WeightedOptions::default()
    };
    let r = weighted_ratio_probe(&bs, &eps, &alpha, &WeightVector::unit(2, &lat), &exps, &lat, &opts).unwrap();
    assert_eq!(r.strong.max, 0.0);
    assert_eq!(r.strong.skipped, 0);
    assert_eq!(r.endpoint.max, 0.0);
}

#[test]
fn weighted_ratio_is_invariant_under_constant_weights() {
    let lat = TruncatedLattice::symmetric(1, 1, 5).unwrap();
    let (bs, eps, alpha, exps) = weighted_setup(&lat);
    let opts = WeightedOptions {
        batch: BatchConfig {
            seed: 1,
            random: 6,
            dictionary: false,
        },
        ..WeightedOptions::default()
    };
    let unit = weighted_ratio_probe(&bs, &eps, &alpha, &WeightVector::unit(2, &lat), &exps, &lat, &opts).unwrap();
    let c = WeightVector::new(vec![constant(&lat, 3.0), constant(&lat, 3.0)]).unwrap();
    let scaled = weighted_ratio_probe(&bs, &eps, &alpha, &c, &exps, &lat, &opts).unwrap();
    assert!(unit.strong.max > 0.0 && unit.strong.max.is_finite());
    assert!((unit.strong.max - scaled.strong.max).abs() <= 1e-12 * unit.strong.max);
    assert!((unit.strong.median - scaled.strong.median).abs() <= 1e-12 * unit.strong.max);
}
