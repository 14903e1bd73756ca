use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weighted_hammerstein::compactline::{CompactMap, Grid};
use weighted_hammerstein::cone::{
    check_index_one, check_index_zero, find_solution_windows, kernel_functional_integral, random_nonnegative,
    verify_cone_hypotheses, CertificateReport, Functional, Pattern, RhoScan, Status, VerifyOptions,
};
use weighted_hammerstein::hammerstein::{HammersteinProblem, Kernel, Nonlinearity};
use weighted_hammerstein::problems::{modified_projectile, ProjectileSetup};
use weighted_hammerstein::quadrature::QuadConfig;
use weighted_hammerstein::Weight;

fn projectile(v0: f64, c: f64) -> ProjectileSetup {
    let grid = Arc::new(Grid::new(CompactMap::half_line(0.0, 1.0).unwrap(), 33).unwrap());
    modified_projectile(v0, c, grid).unwrap()
}

fn report(s: &ProjectileSetup) -> CertificateReport {
    verify_cone_hypotheses(&s.problem, &s.functionals, &VerifyOptions::default()).unwrap()
}

const E1: f64 = 0.36787944117144233;

#[test]
fn functional_values_on_forcing() {
    let s = projectile(1.0, 2.0);
    let q = QuadConfig::default();
    let p = s.problem.forcing();
    assert!((s.functionals.gamma.eval(p, &q).unwrap() - 1.0).abs() < 1e-9);
    assert!((s.functionals.alpha.eval(p, &q).unwrap() - (0.5 - E1)).abs() < 1e-9);
    let zero = s.problem.zero_element();
    for f in [&s.functionals.alpha, &s.functionals.beta, &s.functionals.gamma] {
        assert_eq!(f.eval(&zero, &q).unwrap(), 0.0);
    }
}

#[test]
fn beta_profile_below_shifted_exponential() {
    let s = projectile(1.0, 2.0);
    let map = *s.problem.map();
    let prof = kernel_functional_integral(&s.functionals.beta, s.problem.kernel(), &map, &QuadConfig::default()).unwrap();
    for (&sv, &v) in prof.s.iter().zip(&prof.values) {
        assert!(v <= (-(sv + 1.0)).exp() + 1e-12, "s = {sv}: {v}");
    }
    assert!(prof.integral <= E1 + 1e-8);
}

#[test]
fn zero_kernel_fails_positivity() {
    let s = projectile(1.0, 2.0);
    let p = HammersteinProblem::new(Kernel::zero(), s.problem.nonlinearity().clone(), s.problem.forcing().clone()).unwrap();
    let r = verify_cone_hypotheses(&p, &s.functionals, &VerifyOptions::default()).unwrap();
    assert_eq!(r.status("C7"), Status::Fail);
}

#[test]
fn hypotheses_follow_c() {
    let good = report(&projectile(1.0, 2.0));
    assert!(good.entries.iter().all(|e| e.status == Status::Pass), "{:?}", good.failing());
    assert_eq!(good.status("C8"), Status::Pass);
    let wide = report(&projectile(1.0, 3.0));
    assert_eq!(wide.status("C5"), Status::Fail);
}

#[test]
fn index_lhs_values() {
    let s = projectile(1.0, 2.0);
    let r = report(&s);
    let map = *s.problem.map();
    let nl = s.problem.nonlinearity();
    let at = |rho: f64| check_index_one(&r, rho, nl.upper_envelope(), &map).unwrap();
    assert!((at(0.6).lhs - E1 * (1.0 + 1.0 / 0.6)).abs() < 1e-8 && at(0.6).holds);
    assert!((at(0.5).lhs - 3.0 * E1).abs() < 1e-8 && !at(0.5).holds);
    let zero = check_index_zero(&r, 1.1, nl.lower_envelope(), &map).unwrap();
    assert!((zero.lhs - 1.0 / 1.1).abs() < 1e-8 && !zero.holds);

    // LHS decreases strictly along the scan
    let lhs: Vec<f64> = RhoScan::default().radii().unwrap().into_iter().map(|r| at(r).lhs).collect();
    assert!(lhs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn zero_forcing_and_nonlinearity_never_certifies() {
    let s = projectile(0.0, 2.0);
    let p = s.problem.with_nonlinearity(Nonlinearity::zero());
    let r = verify_cone_hypotheses(&p, &s.functionals, &VerifyOptions::default()).unwrap();
    let map = *p.map();
    for rho in [0.01, 0.5, 1.0, 100.0] {
        assert!(!check_index_zero(&r, rho, Some(&(Arc::new(|_, _| 0.0) as _)), &map).unwrap().holds);
    }
    let w = find_solution_windows(&r, None, None, &map, &RhoScan::default()).unwrap();
    assert!(w.windows.is_empty());
}

#[test]
fn windows_replay_independently() {
    for c in [1.0, 2.0, 2.5] {
        let s = projectile(1.0, c);
        let r = report(&s);
        let map = *s.problem.map();
        let nl = s.problem.nonlinearity();
        let search = find_solution_windows(&r, nl.upper_envelope(), nl.lower_envelope(), &map, &RhoScan::default()).unwrap();
        assert!(search.blocked_by.is_empty());
        for w in search.windows.iter().filter(|w| w.pattern == Pattern::S1) {
            let (r1, r2) = (w.radii[0], w.radii[1]);
            // index-zero needs ρ₁ < v₀, index-one needs ρ₂ above e^{-1}/(1 − e^{-1})
            assert!(r1 < 1.0 && r2 > E1 / (1.0 - E1) && r2 > r1 / c, "{w:?}");
        }
        assert!(search.windows.iter().any(|w| w.pattern == Pattern::S1), "c = {c}");
        assert!(search.windows.iter().all(|w| w.pattern == Pattern::S1 || w.pattern == Pattern::S3), "c = {c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_is_linear(seed in any::<u64>(), lam in 0.0f64..10.0) {
        let s = projectile(1.0, 2.0);
        let q = QuadConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = Weight::affine(1.0);
        let u = random_nonnegative(s.problem.grid(), &phi, 0, &mut rng).unwrap();
        let v = random_nonnegative(s.problem.grid(), &phi, 0, &mut rng).unwrap();
        let g = |w: &_| s.functionals.gamma.eval(w, &q).unwrap();
        let (gu, gv) = (g(&u), g(&v));
        prop_assert!((g(&u.lincomb(1.0, &v, 1.0).unwrap()) - gu - gv).abs() <= 1e-9 * (1.0 + gu + gv));
        prop_assert!((g(&u.scaled(lam)) - lam * gu).abs() <= 1e-9 * (1.0 + lam * gu));
    }

    #[test]
    fn alpha_superadditive_and_homogeneous(seed in any::<u64>(), lam in 0.0f64..10.0) {
        let s = projectile(1.0, 2.0);
        let q = QuadConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = Weight::affine(1.0);
        let u = random_nonnegative(s.problem.grid(), &phi, 0, &mut rng).unwrap();
        let v = random_nonnegative(s.problem.grid(), &phi, 0, &mut rng).unwrap();
        let a = |w: &_| s.functionals.alpha.eval(w, &q).unwrap();
        prop_assert!(a(&u.lincomb(1.0, &v, 1.0).unwrap()) >= a(&u) + a(&v) - 1e-10);
        prop_assert!((a(&u.scaled(lam)) - lam * a(&u)).abs() <= 1e-10 * (1.0 + lam));
    }
}

#[test]
fn functional_spec_round_trip() {
    use weighted_hammerstein::cone::FunctionalSpec;
    let s = projectile(1.0, 2.0);
    for f in [&s.functionals.alpha, &s.functionals.beta, &s.functionals.gamma] {
        assert!(matches!(f, Functional::WeightedSup(_) | Functional::WeightedIntegral(_) | Functional::Difference { .. }));
    }
    let text = r#"{"kind":"difference","integral":{"label":"exponential","c":2.0},"sup":{"label":"exponential","c":1.0}}"#;
    let spec: FunctionalSpec = serde_json::from_str(text).unwrap();
    assert_eq!(spec.build().unwrap().label(), s.functionals.alpha.label());
}
