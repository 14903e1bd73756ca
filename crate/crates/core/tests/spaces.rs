use std::sync::Arc;

use proptest::prelude::*;
use weighted_hammerstein::compactline::{CompactMap, ExtReal, Grid};
use weighted_hammerstein::weighted_space::{classify_asymptotic, lift, EvalMode, NormKind, RelationTag, WeightedFunction};
use weighted_hammerstein::weights::{weights_equivalent, Verdict, Weight};

fn maps() -> impl Strategy<Value = CompactMap> {
    prop_oneof![
        (0.25f64..8.0).prop_map(|l| CompactMap::full_line(l).unwrap()),
        (-5.0f64..5.0, 0.25f64..8.0).prop_map(|(a, l)| CompactMap::half_line(a, l).unwrap()),
    ]
}

fn half_grid(m: usize) -> Arc<Grid> {
    Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), m).unwrap())
}

proptest! {
    #[test]
    fn map_is_monotone(map in maps(), x1 in -0.999f64..0.999, x2 in -0.999f64..0.999) {
        prop_assume!(x1 != x2);
        let (t1, t2) = (map.t_of(x1), map.t_of(x2));
        prop_assert_eq!(x1 < x2, t1 < t2);
        prop_assert_eq!(map.x_of(t1) < map.x_of(t2), t1 < t2);
    }

    #[test]
    fn map_round_trip(map in maps(), x in (-1.0 + 1e-9)..(1.0 - 1e-9)) {
        let t = map.from_compact(x).unwrap();
        let back = map.to_compact(t).unwrap();
        prop_assert!((back - x).abs() <= 1e-12, "x = {x}, back = {back}");
    }

    #[test]
    fn jacobian_matches_differences(map in maps(), x in -0.9f64..0.9) {
        let h = 1e-5;
        let fd = (map.t_of(x + h) - map.t_of(x - h)) / (2.0 * h);
        let j = map.jacobian(x);
        prop_assert!(j > 0.0 && j.is_finite());
        prop_assert!((fd - j).abs() <= 1e-6 * j, "fd {fd} vs {j}");
    }

    #[test]
    fn interpolation_exact_for_polynomials(coeffs in prop::collection::vec(-2.0f64..2.0, 1..9), x in -1.0f64..1.0) {
        let g = half_grid(9);
        let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let samples: Vec<f64> = g.x().iter().map(|&x| poly(x)).collect();
        let v = g.interpolate(&samples, x).unwrap();
        prop_assert!((v - poly(x)).abs() <= 1e-12, "{v} vs {}", poly(x));
    }

    #[test]
    fn norms_are_seminorms(
        a in prop::collection::vec(-10.0f64..10.0, 17),
        b in prop::collection::vec(-10.0f64..10.0, 17),
        lam in -5.0f64..5.0,
    ) {
        let g = half_grid(17);
        let w = Weight::affine(1.0);
        let u = lift(vec![a], w.clone(), g.clone()).unwrap();
        let v = lift(vec![b], w, g).unwrap();
        let sum = u.lincomb(1.0, &v, 1.0).unwrap();
        for kind in [NormKind::SupTilde, NormKind::OrderN, NormKind::Phi] {
            prop_assert!(sum.norm(kind) <= u.norm(kind) + v.norm(kind) + 1e-12);
            prop_assert!((u.scaled(lam).norm(kind) - lam.abs() * u.norm(kind)).abs() <= 1e-12 * (1.0 + u.norm(kind)));
        }
    }

    #[test]
    fn equivalence_is_symmetric(b1 in 0.1f64..5.0, b2 in 0.1f64..5.0, k in 0.1f64..10.0) {
        let g = half_grid(33);
        let p1 = Weight::affine(b1);
        let p2 = Weight::affine(b2).scaled(k).unwrap();
        let e12 = weights_equivalent(&p1, &p2, &g, 0);
        let e21 = weights_equivalent(&p2, &p1, &g, 0);
        prop_assert_eq!(e12.verdict, e21.verdict);
        prop_assert_eq!(e12.verdict, Verdict::Equivalent);
        prop_assert!((e12.upper_limit * e21.upper_limit - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equivalence_is_transitive(b in prop::collection::vec(0.1f64..5.0, 3), k in prop::collection::vec(0.2f64..5.0, 3)) {
        let g = half_grid(33);
        let ws: Vec<Weight> = b.iter().zip(&k).map(|(&b, &k)| Weight::affine(b).scaled(k).unwrap()).collect();
        let eq = |i: usize, j: usize| weights_equivalent(&ws[i], &ws[j], &g, 0).verdict == Verdict::Equivalent;
        if eq(0, 1) && eq(1, 2) {
            prop_assert!(eq(0, 2));
        }
    }

    #[test]
    fn exponential_map_correspondence(l in -3.0f64..3.0, amp in 0.0f64..2.0, decay in 0.1f64..4.0) {
        let map = CompactMap::half_line(0.0, 1.0).unwrap();
        // f − g = L + decay/(1+t), both bounded
        let g = move |t: f64| amp * (1.0 / (1.0 + t)).sin();
        let f = move |t: f64| g(t) + l + decay / (1.0 + t);
        let rel = classify_asymptotic(|t| f(t).exp(), |t| g(t).exp(), &map).unwrap();
        let want = l.exp();
        let lim = rel.limit.unwrap();
        prop_assert!((lim - want).abs() <= 1e-4 * want, "{rel} vs e^{l}");
        let expected_tag = if (want - 1.0).abs() <= 1e-4 { RelationTag::Equivalent } else { RelationTag::ComparableWithLimit };
        prop_assert_eq!(rel.tag, expected_tag);
    }
}

#[test]
fn map_examples() {
    let full = CompactMap::full_line(1.0).unwrap();
    assert_eq!(full.to_compact(ExtReal::Finite(0.0)).unwrap(), 0.0);
    assert!((full.to_compact(ExtReal::Finite(1.0)).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!((full.t_of(0.6) - 0.75).abs() < 1e-15);
    let half = CompactMap::half_line(0.0, 3.0).unwrap();
    assert_eq!(half.to_compact(ExtReal::PosInf).unwrap(), 1.0);
    assert_eq!(half.from_compact(1.0).unwrap(), ExtReal::PosInf);
    let g = Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 9).unwrap();
    assert_eq!(g.t()[0], ExtReal::Finite(0.0));
    assert_eq!(g.t()[8], ExtReal::PosInf);
    assert!(Grid::new(full, 2).is_err());
}

#[test]
fn lifted_examples() {
    let g = half_grid(33);
    let phi = Weight::affine(1.0);
    let one = WeightedFunction::from_tilde_fn(g.clone(), phi.clone(), |_| 1.0).unwrap();
    assert_eq!(one.eval(ExtReal::Finite(3.0), EvalMode::Raw).unwrap(), 4.0);
    assert_eq!(one.eval(ExtReal::PosInf, EvalMode::Tilde).unwrap(), 1.0);
    for kind in [NormKind::SupTilde, NormKind::OrderN, NormKind::Phi] {
        assert_eq!(one.norm(kind), 1.0);
    }
    let zero = WeightedFunction::zero(g.clone(), phi.clone(), 0);
    assert_eq!(zero.norm(NormKind::Phi), 0.0);
    assert_eq!(zero.asymptotic_limits(), (0.0, 0.0));

    let p = WeightedFunction::from_raw_fn(g.clone(), phi.clone(), |t| t).unwrap();
    assert!((p.eval(ExtReal::Finite(2.0), EvalMode::Tilde).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    let (lo, hi) = p.asymptotic_limits();
    assert_eq!(lo, 0.0);
    assert!((hi - 1.0).abs() < 1e-12);
    assert!((p.norm(NormKind::Phi) - 1.0).abs() < 1e-12);

    // ‖v₀t‖ against eᵗ: the sup of te^{-t} is e^{-1}
    let v0 = 2.5;
    let e1 = Weight::exponential(1.0).unwrap();
    let q = WeightedFunction::from_raw_fn(Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 65).unwrap()), e1.clone(), |t| v0 * t)
        .unwrap();
    let dense = (0..=20000).map(|i| q.over(&e1, i as f64 * 1e-3)).fold(0.0f64, f64::max);
    assert!((dense - v0 * (-1f64).exp()).abs() < 1e-7);
}

#[test]
fn derivative_rows_vanish_at_ends() {
    let g = Arc::new(Grid::new(CompactMap::full_line(1.0).unwrap(), 33).unwrap());
    let w = Weight::constant(1.0).unwrap();
    let f = |t: f64| (-t * t).exp();
    let df = |t: f64| -2.0 * t * (-t * t).exp();
    let u = WeightedFunction::from_tilde_derivatives(g, w, &[&f, &df]).unwrap();
    let d = u.tilde_row(1);
    assert_eq!((d[0], d[d.len() - 1]), (0.0, 0.0));
}

#[test]
fn classifier_examples() {
    let map = CompactMap::half_line(1.0, 1.0).unwrap();
    assert_eq!(classify_asymptotic(|t| t, |t| t, &map).unwrap().tag, RelationTag::Equivalent);
    let r = classify_asymptotic(|t| 2.0 * t, |t| t, &map).unwrap();
    assert_eq!((r.tag, r.limit), (RelationTag::ComparableWithLimit, Some(2.0)));
    assert_eq!(classify_asymptotic(|t| t * t, |t| t, &map).unwrap().tag, RelationTag::Greater);
    assert!(classify_asymptotic(|t| -t, |t| t, &map).is_err());
}

#[test]
fn weight_examples() {
    let g = half_grid(33);
    let a = Weight::affine(1.0);
    let e = weights_equivalent(&a, &a, &g, 0);
    assert_eq!(e.verdict, Verdict::Equivalent);
    let e = weights_equivalent(&a, &Weight::affine(1.0).scaled(2.0).unwrap(), &g, 0);
    assert_eq!(e.verdict, Verdict::Equivalent);
    assert!((e.upper_limit - 0.5).abs() < 1e-12);
    let e = weights_equivalent(&a, &Weight::exponential(1.0).unwrap(), &g, 0);
    assert_eq!(e.verdict, Verdict::NotEquivalent);
    assert_eq!(weights_equivalent(&a, &a, &g, 1).verdict, Verdict::Inconclusive);
}
