use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::cone::random_nonnegative;
use weighted_hammerstein::hammerstein::{
    apply_t, c3_bound_profile, dominator_check, kernel_limits, kernel_modulus_check, HammersteinProblem, Kernel, Nonlinearity,
    Support,
};
use weighted_hammerstein::problems::{damped_linear_nonlinearity, modified_projectile, ProjectileSetup};
use weighted_hammerstein::quadrature::{integrate_compact, QuadConfig};
use weighted_hammerstein::weighted_space::{NormKind, WeightedFunction};
use weighted_hammerstein::Weight;

fn projectile(m: usize) -> ProjectileSetup {
    let grid = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), m).unwrap());
    modified_projectile(1.0, 2.0, grid).unwrap()
}

fn phi() -> Weight {
    Weight::affine(1.0)
}

#[test]
fn zero_input_returns_forcing() {
    let s = projectile(33);
    let p = &s.problem;
    let tu = apply_t(p, &p.zero_element(), &QuadConfig::default()).unwrap();
    assert_eq!(tu.tilde_row(0), p.forcing().tilde_row(0));
}

#[test]
fn projectile_kernel_limits() {
    let s = projectile(17);
    let map = *s.problem.map();
    for sv in [0.0, 0.5, 3.0, 40.0] {
        let l = kernel_limits(s.problem.kernel(), &phi(), &map, sv).unwrap();
        assert_eq!(l.z_minus, 0.0);
        assert!((l.z_plus - 1.0).abs() < 1e-9, "z+ at {sv}: {}", l.z_plus);
        assert!((l.m - 1.0).abs() < 1e-9, "M at {sv}: {}", l.m);
    }
    let z = kernel_limits(&Kernel::zero(), &phi(), &map, 1.0).unwrap();
    assert_eq!((z.z_minus, z.z_plus, z.m), (0.0, 0.0, 0.0));
}

#[test]
fn decaying_kernel_limits() {
    let map = CompactMap::full_line(1.0).unwrap();
    let g = |s: f64| (2.0 + s.sin()) * if s < 0.0 { -1.0 } else { 1.0 };
    let k = Kernel::new("bump", Arc::new(move |t: f64, s| (-t.abs()).exp() * g(s)), Arc::new(|_| 1.0), Support::Full);
    let one = Weight::constant(1.0).unwrap();
    for sv in [-3.0, 0.5, 7.0] {
        let l = kernel_limits(&k, &one, &map, sv).unwrap();
        assert!(l.z_minus.abs() < 1e-12 && l.z_plus.abs() < 1e-12);
        assert!((l.m - g(sv).abs()).abs() < 1e-9, "M at {sv}: {} vs {}", l.m, g(sv).abs());
    }
}

#[test]
fn modulus_examples() {
    let s = projectile(17);
    let map = *s.problem.map();
    let k = s.problem.kernel();
    let eps = [1e-1, 1e-2, 1e-3];
    assert!(kernel_modulus_check(k, &phi(), &map, &|s| 1.0 + s, &eps, 1e-7).pass);
    let tiny = kernel_modulus_check(k, &phi(), &map, &|_| 1e-9, &eps, 1e-7);
    assert!(!tiny.pass);
    assert!(tiny.worst.is_some());
    let zero = kernel_modulus_check(&Kernel::zero(), &phi(), &map, &|_| 1.0, &eps, 1e-7);
    assert!(zero.pass && zero.deltas.iter().all(|d| d.1.is_infinite()));
}

#[test]
fn dominator_examples() {
    let map = CompactMap::half_line(0.0, 1.0).unwrap();
    let nl = damped_linear_nonlinearity(phi(), Weight::exponential(1.0).unwrap());
    assert!(dominator_check(&nl, &phi(), &map, 2.0, 41).unwrap().pass);
    let w = phi();
    let halved = nl.clone().with_dominator(Arc::new(move |r, t| 0.5 * r * w.eval(t) * (-t).exp()));
    let rep = dominator_check(&halved, &phi(), &map, 2.0, 41).unwrap();
    assert!(!rep.pass);
    assert_eq!(rep.worst.unwrap().1, 2.0);
    let zero = Nonlinearity::zero();
    for r in [0.1, 1.0, 10.0] {
        assert!(dominator_check(&zero, &phi(), &map, r, 11).unwrap().pass);
    }
}

#[test]
fn zero_kernel_profile() {
    let s = projectile(17);
    let p = HammersteinProblem::new(Kernel::zero(), s.problem.nonlinearity().clone(), s.problem.forcing().clone()).unwrap();
    let c3 = c3_bound_profile(&p, 1.0, &QuadConfig::default()).unwrap();
    assert!(c3.profile.iter().all(|&v| v == 0.0));
    assert_eq!((c3.sup, c3.z_minus_integral, c3.z_plus_integral, c3.m_integral), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn endpoint_matches_dominated_limit() {
    let s = projectile(33);
    let p = &s.problem;
    let quad = QuadConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let map = *p.map();
    for _ in 0..5 {
        let u = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
        let tu = apply_t(p, &u, &quad).unwrap();
        // z⁺ ≡ 1 for the projectile kernel
        let tail = integrate_compact(&map, -1.0, 1.0, |x, s| p.nonlinearity().eval(s, u.tilde_at_x(x) * phi().eval(s)), &quad)
            .unwrap()
            .value;
        let want = tail + p.forcing().asymptotic_limits().1;
        assert!((tu.asymptotic_limits().1 - want).abs() < 1e-8, "{} vs {want}", tu.asymptotic_limits().1);
    }
}

#[test]
fn continuity_along_shrinking_perturbations() {
    let s = projectile(33);
    let p = &s.problem;
    let quad = QuadConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
    let w = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
    let tu = apply_t(p, &u, &quad).unwrap();
    let mut prev = f64::INFINITY;
    for k in 0..8 {
        let v = u.lincomb(1.0, &w, 0.5f64.powi(k)).unwrap();
        let d = apply_t(p, &v, &quad).unwrap().distance(&tu).unwrap();
        assert!(d < prev, "step {k}: {d} ≥ {prev}");
        prev = d;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn boundedness_transfer(seed in any::<u64>(), radius in 0.1f64..4.0) {
        let s = projectile(33);
        let p = &s.problem;
        let quad = QuadConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
        let u = u.scaled(radius / u.norm(NormKind::Phi));
        let bound = c3_bound_profile(p, radius, &quad).unwrap().sup + p.forcing().norm(NormKind::Phi);
        let tu = apply_t(p, &u, &quad).unwrap();
        prop_assert!(tu.norm(NormKind::Phi) <= bound + 1e-9, "{} > {bound}", tu.norm(NormKind::Phi));
    }

    #[test]
    fn operator_is_monotone_on_the_projectile(seed in any::<u64>()) {
        let s = projectile(17);
        let p = &s.problem;
        let quad = QuadConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
        let w = random_nonnegative(p.grid(), &phi(), 0, &mut rng).unwrap();
        let v = u.lincomb(1.0, &w, 1.0).unwrap();
        let (tu, tv) = (apply_t(p, &u, &quad).unwrap(), apply_t(p, &v, &quad).unwrap());
        for (a, b) in tu.tilde_row(0).iter().zip(tv.tilde_row(0)) {
            prop_assert!(*a <= *b + 1e-10);
        }
    }
}

#[test]
fn forcing_only_for_zero_nonlinearity() {
    let s = projectile(17);
    let p = s.problem.with_nonlinearity(Nonlinearity::zero());
    let u = WeightedFunction::from_tilde_fn(p.grid().clone(), phi(), |_| 3.0).unwrap();
    let tu = apply_t(&p, &u, &QuadConfig::default()).unwrap();
    assert_eq!(tu.tilde_row(0), p.forcing().tilde_row(0));
}
