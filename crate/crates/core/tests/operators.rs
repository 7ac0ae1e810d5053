mod common;

use common::*;
use dyadlab::operators::{
    apply_p, apply_pi, apply_shift, apply_t, commutator, iterated_commutator, noncompact_family, reconstruct_product,
};
use dyadlab::{
    AlphaVector, DyadError, DyadicInterval, EpsilonSeq, Exponents, HaarFunction, HaarPattern, Operator, ShiftSpec,
    ShiftTerm, StepFunction, TruncatedLattice,
};
use proptest::prelude::*;

fn lat(k: i32, l: i32) -> TruncatedLattice {
    TruncatedLattice::symmetric(1, k, l).unwrap()
}

fn alpha(bits: &[u8]) -> AlphaVector {
    AlphaVector::new(bits.to_vec()).unwrap()
}

#[test]
fn single_term_shift_halves_the_haar_function() {
    let i = DyadicInterval::new1(0, 0);
    let spec = ShiftSpec::new(
        1,
        0,
        1,
        HaarPattern::standard(1).unwrap(),
        HaarPattern::standard(1).unwrap(),
        vec![ShiftTerm {
            interval: i,
            source: DyadicInterval::new1(-1, 0),
            target: i,
            lambda: 1.0,
        }],
    )
    .unwrap();
    let l = lat(1, 3);
    let out = apply_shift(&spec, &haar(-1, 0), &l).unwrap();
    assert_eq!(max_diff(&out, &haar(0, 0).scaled(0.5)), 0.0);
    let empty = spec.filtered(|_| false);
    assert!(apply_shift(&empty, &haar(-1, 0), &l).unwrap().is_zero());
}

#[test]
fn shift_spec_rejects_bad_terms() {
    let p = HaarPattern::standard(1).unwrap();
    let i = DyadicInterval::new1(0, 0);
    let wrong_scale = ShiftTerm {
        interval: i,
        source: i,
        target: i,
        lambda: 1.0,
    };
    assert!(matches!(
        ShiftSpec::new(1, 0, 1, p.clone(), p.clone(), vec![wrong_scale]),
        Err(DyadError::ShiftGeometry(_))
    ));
    let too_big = ShiftTerm {
        lambda: 1.5,
        ..wrong_scale
    };
    assert!(matches!(
        ShiftSpec::new(0, 0, 1, p.clone(), p.clone(), vec![too_big]),
        Err(DyadError::ShiftNormalization(_))
    ));
    let outside = ShiftTerm {
        interval: i,
        source: DyadicInterval::new1(-1, 2),
        target: i,
        lambda: 1.0,
    };
    assert!(ShiftSpec::new(1, 0, 1, p.clone(), p, vec![outside]).is_err());
}

#[test]
fn shift_depth_violation_is_reported() {
    let p = HaarPattern::standard(1).unwrap();
    let i = DyadicInterval::new1(-2, 0);
    let spec = ShiftSpec::new(
        1,
        0,
        1,
        p.clone(),
        p,
        vec![ShiftTerm {
            interval: i,
            source: DyadicInterval::new1(-3, 0),
            target: i,
            lambda: 1.0,
        }],
    )
    .unwrap();
    assert!(matches!(
        apply_shift(&spec, &chi(0, 0), &lat(1, 2)),
        Err(DyadError::DepthViolation(_))
    ));
}

/// Direct evaluation of the shift sum term by term.
fn shift_oracle(spec: &ShiftSpec, f: &StepFunction, l: &TruncatedLattice) -> StepFunction {
    let mut out = StepFunction::lattice_zeros(l).refine(spec.n() + 1);
    for t in spec.terms() {
        let src = StepFunction::haar(
            &HaarFunction::new(t.source, spec.source_pattern().clone()).unwrap(),
            1.0,
        );
        let c = t.lambda * f.inner(&src).unwrap() / t.interval.measure();
        let tgt = HaarFunction::new(t.target, spec.target_pattern().clone()).unwrap();
        out = out.add(&StepFunction::haar(&tgt, c)).unwrap();
    }
    out
}

#[test]
fn canonical_shifts_match_direct_summation() {
    let mut r = rng(11);
    for (m, n) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1)] {
        let l = lat(2, 3);
        let spec = ShiftSpec::canonical(m, n, &l).unwrap();
        let f = random_step(&l, -3, &mut r);
        let fast = apply_shift(&spec, &f, &l).unwrap();
        let slow = shift_oracle(&spec, &f, &l);
        assert!(max_diff(&fast, &slow) < 1e-12, "(m, n) = ({m}, {n})");
    }
    let l2 = TruncatedLattice::symmetric(2, 1, 2).unwrap();
    for (m, n) in [(1, 0), (1, 1)] {
        let spec = ShiftSpec::canonical(m, n, &l2).unwrap();
        let f = random_step(&l2, -2, &mut r);
        let fast = apply_shift(&spec, &f, &l2).unwrap();
        let slow = shift_oracle(&spec, &f, &l2);
        assert!(max_diff(&fast, &slow) < 1e-12, "d = 2, (m, n) = ({m}, {n})");
    }
}

#[test]
fn identity_t_with_tops_reproduces_haar() {
    let l = TruncatedLattice::symmetric(1, 1, 3).unwrap();
    let f = haar(0, 0);
    let out = Operator::identity().apply(std::slice::from_ref(&f), &l).unwrap();
    assert_eq!(max_diff(&out, &f), 0.0);
}

#[test]
fn t_examples() {
    let l = lat(2, 3);
    let out = apply_t(
        &EpsilonSeq::ones(),
        &alpha(&[0, 0]),
        &[haar(0, 0), haar(0, 0)],
        &l,
        false,
    )
    .unwrap();
    assert_eq!(max_diff(&out, &chi(0, 0)), 0.0);
    let zero = StepFunction::lattice_zeros(&l);
    for a in AlphaVector::all_but_ones(2) {
        assert!(apply_t(&EpsilonSeq::ones(), &a, &[haar(0, 0), zero.clone()], &l, false)
            .unwrap()
            .is_zero());
    }
    assert!(matches!(
        apply_t(
            &EpsilonSeq::ones(),
            &alpha(&[1, 1]),
            &[haar(0, 0), haar(0, 0)],
            &l,
            false
        ),
        Err(DyadError::AllOnesAlpha)
    ));
}

#[test]
fn p_examples() {
    let l = lat(2, 3);
    assert_eq!(
        max_diff(&apply_p(&alpha(&[0]), &[haar(0, 0)], &l).unwrap(), &haar(0, 0)),
        0.0
    );
    let out = apply_p(&alpha(&[1, 0]), &[chi(0, 0), haar(0, 0)], &l).unwrap();
    assert_eq!(max_diff(&out, &haar(0, 0)), 0.0);
    assert!(apply_p(&alpha(&[0]), &[StepFunction::lattice_zeros(&l)], &l)
        .unwrap()
        .is_zero());
}

#[test]
fn pi_examples() {
    let l = lat(2, 3);
    let out = apply_pi(&haar(0, 0), &alpha(&[0]), &[haar(0, 0)], &l).unwrap();
    assert_eq!(max_diff(&out, &chi(0, 0)), 0.0);
    let out = apply_pi(&haar(0, 0), &alpha(&[1]), &[chi(0, 0)], &l).unwrap();
    assert_eq!(max_diff(&out, &haar(0, 0)), 0.0);
    let b0 = StepFunction::lattice_zeros(&l);
    assert!(apply_pi(&b0, &alpha(&[0]), &[haar(0, 0)], &l).unwrap().is_zero());
}

#[test]
fn multilinear_operators_match_direct_summation() {
    let mut r = rng(5);
    let l = lat(2, 3);
    for bits in [
        vec![0u8],
        vec![0, 0],
        vec![0, 1],
        vec![1, 0],
        vec![0, 1, 1],
        vec![1, 0, 0],
    ] {
        let a = AlphaVector::new(bits.clone()).unwrap();
        let fs: Vec<_> = (0..a.len()).map(|_| random_step(&l, -3, &mut r)).collect();
        let eps = eps_random(&l, &mut r);
        let fast = apply_t(&eps, &a, &fs, &l, false).unwrap();
        let slow = multilinear_oracle(&l, &a, a.sigma(), &fs, |i| eps.value(i));
        assert!(max_diff(&fast, &slow) < 1e-12, "T with alpha {bits:?}");

        let b = random_step(&l, -2, &mut r);
        let fast = apply_pi(&b, &a, &fs, &l).unwrap();
        let slow = multilinear_oracle(&l, &a, 1 + a.sigma(), &fs, |i| pair_h(&b, i) / i.measure());
        assert!(max_diff(&fast, &slow) < 1e-12, "pi with alpha {bits:?}");
    }
    let a = alpha(&[1, 1]);
    let fs = vec![random_step(&l, -3, &mut r), random_step(&l, -1, &mut r)];
    let b = random_step(&l, -3, &mut r);
    let fast = apply_pi(&b, &a, &fs, &l).unwrap();
    let slow = multilinear_oracle(&l, &a, 1, &fs, |i| pair_h(&b, i) / i.measure());
    assert!(max_diff(&fast, &slow) < 1e-12);
}

#[test]
fn reconstruction_residual_is_top_defect() {
    let l = lat(6, 2);
    let (_, res) = reconstruct_product(&[haar(0, 0), haar(0, 0)], &l, 1.0).unwrap();
    assert!(res <= 2f64.powi(-5), "residual {res}");
    let zero = StepFunction::lattice_zeros(&l);
    let (sum, res) = reconstruct_product(&[haar(0, 0), zero], &l, 1.0).unwrap();
    assert!(sum.is_zero());
    assert_eq!(res, 0.0);
    let mut prev = f64::INFINITY;
    for k in 2..=6 {
        let (_, res) = reconstruct_product(&[chi(0, 0), chi(0, 0)], &lat(k, 2), 1.0).unwrap();
        assert!(res < prev);
        prev = res;
    }
}

/// Expansion of the nested commutator as an alternating sum over subsets.
fn iterated_oracle(
    bs: &[StepFunction],
    eps: &EpsilonSeq,
    a: &AlphaVector,
    fs: &[StepFunction],
    l: &TruncatedLattice,
) -> StepFunction {
    let m = fs.len();
    let mut out = StepFunction::lattice_zeros(l);
    for set in 0..(1usize << m) {
        let mut args = fs.to_vec();
        let mut outside: Option<StepFunction> = None;
        for j in 0..m {
            if set >> j & 1 == 1 {
                args[j] = bs[j].mul(&fs[j]).unwrap();
            } else {
                outside = Some(match outside {
                    None => bs[j].clone(),
                    Some(p) => p.mul(&bs[j]).unwrap(),
                });
            }
        }
        let mut term = apply_t(eps, a, &args, l, false).unwrap();
        if let Some(p) = outside {
            term = p.mul(&term).unwrap();
        }
        let sign = if set.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&term.scaled(sign)).unwrap();
    }
    out
}

#[test]
fn commutator_examples() {
    let l = lat(2, 3);
    let mut r = rng(3);
    let b = random_step(&l, -2, &mut r);
    let f = random_step(&l, -3, &mut r);
    let c = commutator(&b, &Operator::identity(), 1, std::slice::from_ref(&f), &l).unwrap();
    assert!(c.sup_abs() < 1e-14);

    let constant = StepFunction::on_lattice(&l, vec![1.5; l.cells(l.fine())]).unwrap();
    let op = Operator::T {
        eps: eps_random(&l, &mut r),
        alpha: alpha(&[0, 1]),
        use_tops: false,
    };
    let g = random_step(&l, -1, &mut r);
    for slot in 1..=2 {
        let c = commutator(&constant, &op, slot, &[f.clone(), g.clone()], &l).unwrap();
        assert!(c.sup_abs() < 1e-13);
    }
    assert!(matches!(
        commutator(&b, &op, 3, &[f.clone(), g.clone()], &l),
        Err(DyadError::SlotOutOfRange { .. })
    ));

    // b f = -h_{[0,1)} is a pure detail, so P^{(0)} fixes both b f and f: the commutator vanishes.
    let b = haar(1, 0);
    let p0 = Operator::P { alpha: alpha(&[0]) };
    let c = commutator(&b, &p0, 1, &[haar(0, 0)], &l).unwrap();
    assert_eq!(c.sup_abs(), 0.0);
    // With f = 1_{[0,1)}, b f = -f and the commutator is (1 + b) P^{(0)} f, nonzero off [0,1).
    let f = chi(0, 0);
    let c = commutator(&b, &p0, 1, std::slice::from_ref(&f), &l).unwrap();
    let pf = multilinear_oracle(&l, &alpha(&[0]), 1, &[f], |_| 1.0);
    let one_plus_b = b
        .add(&StepFunction::on_lattice(&l, vec![1.0; l.cells(l.fine())]).unwrap())
        .unwrap();
    let expected = one_plus_b.mul(&pf).unwrap();
    assert!(max_diff(&c, &expected) < 1e-15);
    assert!(c.sup_abs() > 0.1);
}

#[test]
fn iterated_commutator_matches_alternating_sum() {
    let l = lat(2, 3);
    let eps = EpsilonSeq::ones();
    let a = alpha(&[0, 0]);
    let bs = vec![haar(1, 0), haar(1, 0)];
    let fs = vec![haar(0, 0), haar(0, 0)];
    let out = iterated_commutator(&bs, &eps, &a, &fs, &l).unwrap();
    assert!(max_diff(&out, &iterated_oracle(&bs, &eps, &a, &fs, &l)) < 1e-13);

    let mut r = rng(17);
    for bits in [vec![0u8], vec![0, 1], vec![1, 0, 0]] {
        let a = AlphaVector::new(bits).unwrap();
        let m = a.len();
        let bs: Vec<_> = (0..m).map(|_| random_step(&l, -2, &mut r)).collect();
        let fs: Vec<_> = (0..m).map(|_| random_step(&l, -3, &mut r)).collect();
        let eps = eps_random(&l, &mut r);
        let out = iterated_commutator(&bs, &eps, &a, &fs, &l).unwrap();
        assert!(max_diff(&out, &iterated_oracle(&bs, &eps, &a, &fs, &l)) < 1e-12);
    }
    let consts: Vec<_> = (0..2)
        .map(|_| StepFunction::on_lattice(&l, vec![0.75; l.cells(l.fine())]).unwrap())
        .collect();
    let fs: Vec<_> = (0..2).map(|_| random_step(&l, -3, &mut r)).collect();
    assert!(
        iterated_commutator(&consts, &eps, &alpha(&[0, 1]), &fs, &l)
            .unwrap()
            .sup_abs()
            < 1e-13
    );
    let b1 = random_step(&l, -2, &mut r);
    let f1 = random_step(&l, -3, &mut r);
    let single = iterated_commutator(
        std::slice::from_ref(&b1),
        &eps,
        &alpha(&[0]),
        std::slice::from_ref(&f1),
        &l,
    )
    .unwrap();
    let op = Operator::T {
        eps: eps.clone(),
        alpha: alpha(&[0]),
        use_tops: false,
    };
    assert_eq!(max_diff(&single, &commutator(&b1, &op, 1, &[f1], &l).unwrap()), 0.0);
    assert!(matches!(
        iterated_commutator(&bs[..1], &eps, &alpha(&[0, 0]), &fs, &l),
        Err(DyadError::ArityMismatch { .. })
    ));
}

#[test]
fn noncompact_family_norms() {
    let e = Exponents::uniform(1, 2.0).unwrap();
    let f = noncompact_family(&DyadicInterval::new1(0, 0), &alpha(&[0]), &e).unwrap();
    assert_eq!(max_diff(&f[0], &haar(0, 0)), 0.0);
    let f = noncompact_family(&DyadicInterval::new1(-1, 0), &alpha(&[0]), &e).unwrap();
    assert!(max_diff(&f[0], &haar(-1, 0).scaled(2f64.sqrt())) < 1e-15);
    assert!((f[0].lp_norm(2.0).unwrap() - 1.0).abs() < 1e-15);
    let e3 = Exponents::new(vec![3.0]).unwrap();
    let f = noncompact_family(&DyadicInterval::new1(-3, 5), &alpha(&[1]), &e3).unwrap();
    assert!((f[0].lp_norm(3.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn operator_json_roundtrip() {
    let l = lat(1, 2);
    let ops = vec![
        Operator::identity(),
        Operator::P { alpha: alpha(&[0, 1]) },
        Operator::Pi {
            b: haar(0, 0),
            alpha: alpha(&[1]),
        },
        Operator::Shift(ShiftSpec::canonical(1, 0, &l).unwrap()),
        Operator::Commutator {
            b: haar(0, 0),
            inner: Box::new(Operator::identity()),
            slot: 1,
        },
    ];
    for op in ops {
        let s = serde_json::to_string(&op).unwrap();
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_are_linear_in_each_slot(seed in any::<u64>(), slot in 0usize..2, ca in -4i32..=4, cb in -4i32..=4) {
        let l = lat(2, 3);
        let mut r = rng(seed);
        let a = AlphaVector::new(vec![0, (seed % 2) as u8]).unwrap();
        let eps = eps_random(&l, &mut r);
        let fs: Vec<_> = (0..2).map(|_| random_step(&l, -3, &mut r)).collect();
        let g = random_step(&l, -2, &mut r);
        let (ca, cb) = (ca as f64 / 4.0, cb as f64 / 4.0);
        let mut mixed = fs.clone();
        mixed[slot] = fs[slot].scaled(ca).add(&g.scaled(cb)).unwrap();
        let mut gs = fs.clone();
        gs[slot] = g.clone();
        let lhs = apply_t(&eps, &a, &mixed, &l, false).unwrap();
        let rhs = apply_t(&eps, &a, &fs, &l, false).unwrap().scaled(ca)
            .add(&apply_t(&eps, &a, &gs, &l, false).unwrap().scaled(cb)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);

        let spec = ShiftSpec::canonical(1, 1, &l).unwrap();
        let lhs = apply_shift(&spec, &mixed[slot], &l).unwrap();
        let rhs = apply_shift(&spec, &fs[slot], &l).unwrap().scaled(ca)
            .add(&apply_shift(&spec, &g, &l).unwrap().scaled(cb)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn commutator_is_odd_and_linear_in_b(seed in any::<u64>()) {
        let l = lat(2, 3);
        let mut r = rng(seed);
        let b1 = random_step(&l, -2, &mut r);
        let b2 = random_step(&l, -3, &mut r);
        let fs: Vec<_> = (0..2).map(|_| random_step(&l, -3, &mut r)).collect();
        let op = Operator::T { eps: eps_random(&l, &mut r), alpha: alpha(&[0, 1]), use_tops: false };
        let c1 = commutator(&b1, &op, 1, &fs, &l).unwrap();
        let c2 = commutator(&b2, &op, 1, &fs, &l).unwrap();
        let c12 = commutator(&b1.add(&b2).unwrap(), &op, 1, &fs, &l).unwrap();
        let cneg = commutator(&b1.scaled(-1.0), &op, 1, &fs, &l).unwrap();
        prop_assert!(max_diff(&c12, &c1.add(&c2).unwrap()) < 1e-12);
        prop_assert!(max_diff(&cneg, &c1.scaled(-1.0)) < 1e-14);
    }

    #[test]
    fn t_is_bounded_by_a_uniform_constant(seed in any::<u64>()) {
        let l = lat(2, 3);
        let mut r = rng(seed);
        let a = AlphaVector::new(vec![(seed % 2) as u8, 0]).unwrap();
        let eps = eps_random(&l, &mut r);
        let fs: Vec<_> = (0..2).map(|_| random_step(&l, -3, &mut r)).collect();
        let ps = [2.0, 4.0];
        let e = Exponents::new(ps.to_vec()).unwrap();
        let num = apply_t(&eps, &a, &fs, &l, false).unwrap().lp_norm(e.p()).unwrap();
        let den = eps.sup_bound() * fs[0].lp_norm(ps[0]).unwrap() * fs[1].lp_norm(ps[1]).unwrap();
        prop_assume!(den > 0.0);
        prop_assert!(num <= 8.0 * den, "ratio {}", num / den);
    }
}
