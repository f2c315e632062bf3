//! Randomized invariants.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use thermosemi::characteristic::characteristic_entire;
use thermosemi::mode::{mode_energy, ModeForcing, ModeVector};
use thermosemi::params::{ModelParams, SystemKind};
use thermosemi::profile::ZProfile;
use thermosemi::region::{classify_region, SClass};
use thermosemi::resolvent::{mode_determinant, mode_resolvent_norm_lb, relative_determinant, solve_mode_resolvent};

fn kind() -> impl Strategy<Value = SystemKind> {
    prop::sample::select(SystemKind::ALL.to_vec())
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(r, i)| C64::new(r, i))
}

fn params() -> impl Strategy<Value = ModelParams> {
    (kind(), 0.0..=1.0f64, 0.0..=1.0f64, 0.5..3.0f64, 0.1..0.5f64, 0.3..2.0f64, 0.3..3.0f64).prop_map(
        |(kind, beta, alpha, a, kf, tau, xi)| ModelParams { kind, beta, alpha, a, kappa: kf * a, tau, xi },
    )
}

fn exp_profile() -> impl Strategy<Value = ZProfile> {
    (complex(), complex(), -20.0..20.0f64).prop_map(|(c0, c1, omega)| ZProfile::Exponential { c0, c1, omega })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn energy_is_quadratic(p in params(), mu in 0.1..1e4f64, u in complex(), v in complex(), t in complex(), z in exp_profile(), c in complex()) {
        let s = ModeVector { mode_index: 1, u, v, theta: t, z };
        let e = mode_energy(&s, &p, mu);
        let ec = mode_energy(&s.scaled(c), &p, mu);
        prop_assert!((ec - c.norm_sqr() * e).abs() <= 1e-12 * ec.max(c.norm_sqr() * e).max(1e-300));
    }

    #[test]
    fn exponential_form_matches_fine_grid(p in params(), mu in 0.1..1e3f64, u in complex(), z in exp_profile()) {
        let zero = C64::new(0.0, 0.0);
        let s = ModeVector { mode_index: 1, u, v: zero, theta: zero, z: z.clone() };
        // composite Simpson on 4096 intervals
        let n = 4096;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * z.eval(k as f64 * h).norm_sqr();
        }
        let oracle = mu * u.norm_sqr() + p.z_weight() * sum * h / 3.0;
        let e = mode_energy(&s, &p, mu);
        prop_assert!((e - oracle).abs() <= 1e-8 * e.max(1e-300), "{} vs {}", e, oracle);
    }

    #[test]
    fn q_iff_stable_classes(beta in 0.0..=1.0f64, alpha in 0.0..=1.0f64) {
        let l = classify_region(beta, alpha).unwrap();
        prop_assert_eq!(l.in_q, l.s_class != SClass::S3);
    }

    #[test]
    fn resolvent_ratio_is_scale_invariant(p in params(), mu in 1.0..1e3f64, lambda in -50.0..50.0f64,
                                          f1 in complex(), f2 in complex(), f3 in complex(), h in exp_profile(), c in complex()) {
        prop_assume!(c.norm() > 1e-3 && relative_determinant(&p, mu, lambda) > 1e-8);
        let f = ModeForcing { f1, f2, f3, h };
        let u = solve_mode_resolvent(&p, mu, lambda, &f).unwrap();
        let uc = solve_mode_resolvent(&p, mu, lambda, &f.scaled(c)).unwrap();
        let r = mode_energy(&u, &p, mu).sqrt() / f.norm(&p, mu);
        let rc = mode_energy(&uc, &p, mu).sqrt() / f.scaled(c).norm(&p, mu);
        prop_assert!((r - rc).abs() <= 1e-9 * r);
    }

    #[test]
    fn characteristic_matches_determinant(p in params(), mu in 0.1..1e4f64, lambda in -1e3..1e3f64) {
        let s = C64::new(0.0, lambda);
        let (chi, _) = characteristic_entire(&p, mu, s);
        let det = mode_determinant(&p, mu, lambda);
        let scale = chi.norm().max(det.norm()).max(1.0) + (lambda * lambda + mu) * (lambda.abs() + mu);
        prop_assert!((chi - det).norm() <= 1e-12 * scale, "{} vs {}", chi, det);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_bound_grows_with_trial_space(p in params(), mu in 1.0..1e3f64, lambda in -30.0..30.0f64) {
        prop_assume!(relative_determinant(&p, mu, lambda) > 1e-8);
        let l0 = mode_resolvent_norm_lb(&p, mu, lambda, 0).unwrap();
        let l1 = mode_resolvent_norm_lb(&p, mu, lambda, 1).unwrap();
        let l2 = mode_resolvent_norm_lb(&p, mu, lambda, 2).unwrap();
        prop_assert!(l1 >= l0 * (1.0 - 1e-9) && l2 >= l1 * (1.0 - 1e-9), "{} {} {}", l0, l1, l2);
    }
}
