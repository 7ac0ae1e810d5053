mod common;

use common::*;
use dyadlab::norms::{bmo2_dyadic, bmo_dyadic, bmo_nondyadic_lower, bmo_r, cmo_distance, default_widths};
use dyadlab::weights::{ap_constant, dyadic_maximal, phi, sharp_maximal, weighted_lp_norm, WeightVector};
use dyadlab::{DyadicInterval, Exponents, StepFunction, TruncatedLattice};
use proptest::prelude::*;

fn lat(k: i32, l: i32) -> TruncatedLattice {
    TruncatedLattice::symmetric(1, k, l).unwrap()
}

fn constant(l: &TruncatedLattice, c: f64) -> StepFunction {
    StepFunction::on_lattice(l, vec![c; l.cells(l.fine())]).unwrap()
}

/// Sup scan computing the mean oscillation of each enumerated cube from point samples.
fn bmo_scan(b: &StepFunction, l: &TruncatedLattice, r: f64) -> f64 {
    let mut best = 0f64;
    for i in l.enumerate() {
        let cells = StepFunction::indicator(&i, l.fine(), 1.0).unwrap();
        let restricted = b.mul(&cells).unwrap();
        let avg = restricted.integral() / i.measure();
        let dev = restricted.sub(&cells.scaled(avg)).unwrap();
        best = best.max(dev.lp_mass(r).unwrap() / i.measure());
    }
    best.powf(1.0 / r)
}

#[test]
fn bmo_examples() {
    let l = lat(2, 3);
    assert_eq!(bmo_dyadic(&constant(&l, 3.0), &l).unwrap().value, 0.0);
    let rep = bmo_dyadic(&haar(0, 0), &l).unwrap();
    assert_eq!(rep.value, 1.0);
    assert_eq!(rep.maximizer, Some(DyadicInterval::new1(0, 0)));
    assert_eq!(bmo_dyadic(&haar(0, 0).scaled(-2.5), &l).unwrap().value, 2.5);
    assert_eq!(bmo_r(&haar(0, 0), 2.0, &l).unwrap().value, 1.0);
    assert!(bmo_r(&haar(0, 0), 1.0, &l).is_err());
    assert_eq!(bmo_r(&constant(&l, -1.0), 3.0, &l).unwrap().value, 0.0);
}

#[test]
fn bmo_matches_scan_oracle() {
    let l = lat(2, 3);
    let mut r = rng(1);
    for _ in 0..5 {
        let b = random_step(&l, -2, &mut r);
        let fast = bmo_dyadic(&b, &l).unwrap().value;
        assert!((fast - bmo_scan(&b, &l, 1.0)).abs() < 1e-14);
        let fast = bmo_r(&b, 3.0, &l).unwrap().value;
        assert!((fast - bmo_scan(&b, &l, 3.0)).abs() < 1e-13);
    }
}

#[test]
fn bmo2_both_forms() {
    let l = lat(2, 3);
    let rep = bmo2_dyadic(&haar(0, 0), &l).unwrap();
    assert_eq!(rep.verbatim.value, 1.0);
    assert_eq!(rep.standard.value, 1.0);
    assert_eq!(bmo2_dyadic(&constant(&l, 2.0), &l).unwrap().verbatim.value, 0.0);
    // the standard form equals the L^2 oscillation norm
    let mut r = rng(2);
    for _ in 0..5 {
        let b = random_step(&l, -3, &mut r);
        let rep = bmo2_dyadic(&b, &l).unwrap();
        assert!((rep.standard.value - rep.oscillation_r2).abs() < 1e-13);
    }
    // a bump far from the maximizer leaves the value unchanged
    let base = haar(-1, 0).scaled(4.0);
    let bumped = base.add(&haar(-2, -12)).unwrap();
    let a = bmo2_dyadic(&base, &l).unwrap().verbatim;
    let b = bmo2_dyadic(&bumped, &l).unwrap().verbatim;
    assert_eq!(a.value, b.value);
    assert_eq!(a.maximizer, b.maximizer);
}

#[test]
fn nondyadic_bound_sees_straddling_jumps() {
    let l = lat(2, 4);
    let step = StepFunction::from_cells(&l, |lo, _| if lo[0] >= 0.0 { 1.0 } else { 0.0 });
    let dy = bmo_dyadic(&step, &l).unwrap().value;
    let nd = bmo_nondyadic_lower(&step, &l).unwrap().value;
    assert_eq!(dy, 0.0);
    assert!(nd > 0.4, "shifted cubes should straddle 0, got {nd}");
}

#[test]
fn cmo_examples() {
    let l = lat(2, 10);
    let hat = StepFunction::from_cells(&l, |lo, hi| (1.0 - (0.5 * (lo[0] + hi[0])).abs()).max(0.0));
    let d = cmo_distance(&hat, &l, &default_widths(&l)).unwrap();
    assert!(d.distance <= 0.05, "hat distance {}", d.distance);
    let jump = StepFunction::from_cells(&l, |lo, _| if lo[0] >= 0.0 { 1.0 } else { 0.0 });
    let d = cmo_distance(&jump, &l, &default_widths(&l)).unwrap();
    assert!(d.distance > 0.1, "jump distance {}", d.distance);
    let d = cmo_distance(&constant(&l, 0.0), &l, &default_widths(&l)).unwrap();
    assert_eq!(d.distance, 0.0);
}

#[test]
fn ap_examples() {
    let l = lat(2, 2);
    let e = Exponents::new(vec![2.0, 3.0]).unwrap();
    let rep = ap_constant(&WeightVector::unit(2, &l), &e, &l).unwrap();
    assert_eq!(rep.verbatim, 1.0);
    assert_eq!(rep.standard, 1.0);

    // m = 1, p = 2, ω = 2 on [0,1): both forms coincide at p = 2
    let w = StepFunction::from_cells(&l, |lo, _| if (0.0..1.0).contains(&lo[0]) { 2.0 } else { 1.0 });
    let e2 = Exponents::new(vec![2.0]).unwrap();
    let rep = ap_constant(&WeightVector::new(vec![w.clone()]).unwrap(), &e2, &l).unwrap();
    let mut scan = 0f64;
    for i in l.enumerate() {
        let ind = StepFunction::indicator(&i, l.fine(), 1.0).unwrap();
        let a = w.mul(&ind).unwrap().integral() / i.measure();
        let b = w.map(|v| 1.0 / v).mul(&ind).unwrap().integral() / i.measure();
        scan = scan.max((a * b).sqrt());
    }
    assert!((rep.verbatim - scan).abs() < 1e-15);
    assert!((rep.standard - scan).abs() < 1e-15);
    assert!(rep.standard > 1.0);

    let one = Exponents::new(vec![1.0]).unwrap();
    let rep = ap_constant(&WeightVector::new(vec![w]).unwrap(), &one, &l).unwrap();
    assert!(rep.standard >= 1.0);
    assert!(WeightVector::new(vec![constant(&l, 0.0)]).is_err());
}

#[test]
fn maximal_examples() {
    let l = TruncatedLattice::symmetric(1, 1, 2).unwrap();
    let m = dyadic_maximal(&chi(0, 0), &l, 1.0).unwrap();
    for (x, v) in [(0.25, 1.0), (0.75, 1.0), (1.5, 0.5), (-0.5, 0.0), (-1.5, 0.0)] {
        assert_eq!(m.eval_f64(&[x]).unwrap(), v, "x = {x}");
    }
    let s = sharp_maximal(&haar(0, 0), &l).unwrap();
    assert_eq!(s.eval_f64(&[0.25]).unwrap(), 1.0);
    assert_eq!(s.eval_f64(&[0.75]).unwrap(), 1.0);
    assert_eq!(sharp_maximal(&constant(&l, 4.0), &l).unwrap().sup_abs(), 0.0);
}

#[test]
fn phi_and_weighted_norms() {
    assert_eq!(phi(1.0, 1).unwrap(), 1.0);
    assert_eq!(phi(0.3, 1).unwrap(), 0.3);
    let e = std::f64::consts::E;
    assert!((phi(e, 1).unwrap() - 2.0 * e).abs() < 1e-12);
    assert!(phi(-1.0, 1).is_err());
    let x = phi(e, 2).unwrap();
    assert!((x - 2.0 * e * (1.0 + (2.0 * e).ln())).abs() < 1e-12);

    let l = lat(1, 1);
    let w = StepFunction::from_cells(&l, |lo, _| if (0.0..1.0).contains(&lo[0]) { 2.0 } else { 1.0 });
    assert_eq!(weighted_lp_norm(&chi(0, 0), 1.0, &w).unwrap(), 2.0);
    let f = haar(0, 0).scaled(3.0);
    assert_eq!(
        weighted_lp_norm(&f, 2.0, &constant(&l, 1.0)).unwrap(),
        f.lp_norm(2.0).unwrap()
    );
    assert!(weighted_lp_norm(&f, 2.0, &constant(&l, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bmo_ignores_constants_and_orders_by_jensen(seed in any::<u64>(), c in -8i32..8) {
        let l = lat(2, 3);
        let mut r = rng(seed);
        let b = random_step(&l, -3, &mut r);
        let shifted = b.add(&constant(&l, c as f64 / 4.0)).unwrap();
        let d1 = bmo_dyadic(&b, &l).unwrap().value;
        prop_assert!((d1 - bmo_dyadic(&shifted, &l).unwrap().value).abs() < 1e-14);
        let r2 = bmo_r(&b, 2.0, &l).unwrap().value;
        prop_assert!((r2 - bmo_r(&shifted, 2.0, &l).unwrap().value).abs() < 1e-13);
        let v = bmo2_dyadic(&b, &l).unwrap();
        let vs = bmo2_dyadic(&shifted, &l).unwrap();
        prop_assert!((v.verbatim.value - vs.verbatim.value).abs() < 1e-12);
        prop_assert!(d1 <= r2 * (1.0 + 1e-14));
        prop_assert!(r2 <= bmo_r(&b, 3.0, &l).unwrap().value * (1.0 + 1e-14));
        prop_assert!(d1 <= bmo_nondyadic_lower(&b, &l).unwrap().value);
    }

    #[test]
    fn ap_standard_form_is_at_least_one(seed in any::<u64>(), p1 in 1.0f64..5.0, p2 in 1.2f64..5.0) {
        use rand::Rng;
        let l = lat(1, 2);
        let mut r = rng(seed);
        let ws: Vec<_> = (0..2)
            .map(|_| StepFunction::from_cells(&l, |_, _| 0.0).map(|_| 0.0))
            .map(|f| f.map(|_| 1.0))

            .map(|f| {
                let vals: Vec<f64> = f.values().iter().map(|_| r.gen_range(0.1..4.0)).collect();
                StepFunction::on_lattice(&l, vals).unwrap()
            })
            .collect();
        let e = Exponents::new(vec![p1, p2]).unwrap();
        let rep = ap_constant(&WeightVector::new(ws).unwrap(), &e, &l).unwrap();
        prop_assert!(rep.standard >= 1.0 - 1e-12);
        prop_assert!(rep.standard.is_finite());
    }

    #[test]
    fn maximal_functions_dominate(seed in any::<u64>()) {
        let l = lat(2, 3);
        let mut r = rng(seed);
        let f = random_step(&l, -3, &mut r);
        let m = dyadic_maximal(&f, &l, 1.0).unwrap();
        let sharp = sharp_maximal(&f, &l).unwrap();
        for (j, v) in f.values().iter().enumerate() {
            prop_assert!(m.values()[j] >= v.abs());
            prop_assert!(sharp.values()[j] <= 2.0 * m.values()[j] + 1e-15);
        }
        let m2 = dyadic_maximal(&f.scaled(-3.0), &l, 2.0).unwrap();
        let base = dyadic_maximal(&f, &l, 2.0).unwrap();
        prop_assert!(max_diff(&m2, &base.scaled(3.0)) < 1e-13);
    }
}
