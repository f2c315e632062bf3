//! Worked examples checked against independent hand or closed-form oracles.

use num_complex::Complex64 as C64;
use thermosemi::characteristic::{spectral_abscissa_estimate, AbscissaSearch};
use thermosemi::mode::ModeForcing;
use thermosemi::params::{xi_admissible, ModelParams, SystemKind};
use thermosemi::profile::ZProfile;
use thermosemi::region::{classify_region, SClass};
use thermosemi::resolvent::{mode_residual, mode_resolvent_norm_lb, resolvent_scan, solve_mode_resolvent};
use thermosemi::spectrum::{make_spectrum, SpectrumSpec};
use thermosemi::witness::{build_witness_mode, select_exponents, string_witness, witness_sweep};

const LIMIT: f64 = 0.577_350_269_189_625_8; // 1 / sqrt(3)

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn s1_point_by_hand() {
    // 2 beta = 0.2 < alpha = 0.9 and alpha > 1/2; 2 beta - alpha = -0.7 <= 1
    let l = classify_region(0.1, 0.9).unwrap();
    assert_eq!(l.s_class, SClass::S1);
    assert!(l.in_q);
}

#[test]
fn parabolic_admissible_interval_arithmetic() {
    let p = ModelParams::new(SystemKind::DelayParabolic, 0.5, 0.5).with_a(5.0).with_kappa(3.0).with_tau(1.0);
    let i = xi_admissible(&p).unwrap();
    // tau (a -+ sqrt(a^2 - kappa^2)) = 5 -+ 4
    assert!((i.lower - 1.0).abs() < 1e-15 && (i.upper - 9.0).abs() < 1e-15);
    assert!(!i.lower_closed && !i.upper_closed);
}

#[test]
fn hand_solved_static_mode() {
    // lambda = 0: v = 0 from row 1, theta = 0 from row 3, z constant = u, z(1) = 1 from row 2
    let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(1.0);
    let f = ModeForcing { f1: c(0.0, 0.0), f2: c(1.0, 0.0), f3: c(0.0, 0.0), h: ZProfile::zero() };
    let u = solve_mode_resolvent(&p, 1.0, 0.0, &f).unwrap();
    assert!((u.u - c(1.0, 0.0)).norm() < 1e-14);
    assert!(u.v.norm() < 1e-14 && u.theta.norm() < 1e-14);
    for k in 0..=10 {
        assert!((u.z.eval(k as f64 / 10.0) - c(1.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn witness_forcing_reproduces_witness_state() {
    for (kind, beta, alpha) in [(SystemKind::DelayHyperbolic, 0.5, 0.5), (SystemKind::DelayParabolic, 0.75, 0.5)] {
        let p = ModelParams::new(kind, beta, alpha).with_a(2.0).with_kappa(1.0).with_xi(3.0);
        for mu in [256.0, 65536.0] {
            let w = build_witness_mode(&p, mu).unwrap();
            let u = solve_mode_resolvent(&p, mu, w.lambda, &w.forcing).unwrap();
            let scale = w.state.u.norm() * mu.sqrt() + w.state.v.norm() + w.state.theta.norm() + 1.0;
            let d = (u.u - w.state.u).norm() * mu.sqrt() + (u.v - w.state.v).norm() + (u.theta - w.state.theta).norm();
            assert!(d / scale < 1e-10, "{kind:?} mu={mu}: {d}");
            for k in 0..=8 {
                let rho = k as f64 / 8.0;
                assert!((u.z.eval(rho) - w.state.z.eval(rho)).norm() < 1e-10 * scale);
            }
            assert!(mode_residual(&p, mu, w.lambda, &w.state, &w.forcing) <= 1e-9);
        }
    }
}

#[test]
fn lower_bound_dominates_witness_ratio() {
    let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5);
    for mu in [64.0, 1024.0] {
        let w = build_witness_mode(&p, mu).unwrap();
        let lb = mode_resolvent_norm_lb(&p, mu, w.lambda, 0).unwrap();
        assert!(lb >= w.row.ratio * (1.0 - 1e-9), "lb {lb} ratio {}", w.row.ratio);
    }
}

#[test]
fn baseline_lower_bound_decays() {
    let p = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
    // the per-mode peak sits near mu ~ (0.75 lambda)^2: compare the best mode at each frequency
    let best = |lambda: f64| {
        let n0 = (lambda * 0.748) as usize;
        (n0.saturating_sub(3).max(1)..=n0 + 3)
            .map(|n| mode_resolvent_norm_lb(&p, (n * n) as f64, lambda, 1).unwrap())
            .fold(0.0, f64::max)
    };
    assert!(best(1e6) < best(1e3));
}

#[test]
fn scans_match_expectations() {
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    // delayed: include the witness frequencies lambda_n = mu_n (alpha = beta = 1/2)
    let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5);
    let lambdas = [256.0, 1024.0];
    let rows = resolvent_scan(&p, &s, &lambdas, 0, 40).unwrap();
    for r in &rows {
        assert!(r.sup_lb >= 0.9 * LIMIT, "{r:?}");
    }
    let b = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
    let rows = resolvent_scan(&b, &s, &[1e2, 1e3, 1e4], 1, 8000).unwrap();
    assert!(rows[0].sup_lb > rows[1].sup_lb && rows[1].sup_lb > rows[2].sup_lb);
}

#[test]
fn abscissa_signs() {
    let search = AbscissaSearch::default();
    let h = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(1.0);
    assert!(spectral_abscissa_estimate(&h, 100.0, &search).unwrap().abscissa < 0.0);
    let b = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
    assert!(spectral_abscissa_estimate(&b, 100.0, &search).unwrap().abscissa < 0.0);
    let p = ModelParams::new(SystemKind::DelayParabolic, 0.1, 0.9).with_a(2.0).with_kappa(1.0);
    let e2 = spectral_abscissa_estimate(&p, 1e2, &search).unwrap().abscissa;
    let e4 = spectral_abscissa_estimate(&p, 1e4, &search).unwrap().abscissa;
    assert!(e2 < e4 && e4 < 0.0, "{e2} {e4}");
}

#[test]
fn parabolic_default_delta() {
    let p = ModelParams::new(SystemKind::DelayParabolic, 0.5, 0.5).with_a(2.0).with_kappa(1.0).with_xi(3.0);
    let e = select_exponents(&p).unwrap();
    assert_eq!((e.delta, e.p, e.q), (0.25, 0.5, 0.25));
    assert!(e.delta_is_default);
}

#[test]
fn string_coefficient_for_a_two() {
    // -i (a + 1) + 1 - a at a = 2
    let (phi, _) = string_witness(101, 2.0, 1.0).unwrap();
    assert!((phi - c(-1.0, -3.0)).norm() < 1e-3, "{phi}");
}

#[test]
fn witness_limits() {
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    let idx: Vec<usize> = (4..=12).map(|k| 1 << k).collect();
    let h = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(1.0).with_xi(2.0);
    let sw = witness_sweep(&h, &s, &idx).unwrap();
    assert!((sw.limit_estimate / LIMIT - 1.0).abs() < 0.02);
    let p = ModelParams::new(SystemKind::DelayParabolic, 0.75, 0.5).with_a(2.0).with_kappa(1.0).with_xi(3.0);
    let sw = witness_sweep(&p, &s, &idx).unwrap();
    assert!((sw.limit_estimate / LIMIT - 1.0).abs() < 0.02);
    let (_, row) = string_witness(401, 1.0, 1.0).unwrap();
    assert!((row.ratio / LIMIT - 1.0).abs() < 0.03);
}
