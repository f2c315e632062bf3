//! Per-mode resolvent `(i lambda - A_n)^{-1}`.
//!
//! Every system kind reduces, after integrating the transport row and
//! eliminating `v`, to a 2x2 complex system in `(u, theta)`:
//!
//! ```text
//! a11 u - mu^beta theta           = b1
//! i lambda mu^beta u + a22 theta  = b2
//! ```
//!
//! whose determinant is the entire characteristic function evaluated at
//! `s = i lambda` (see [`crate::characteristic`]).

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::mode::{boundary_trace, energy_inner, ModeForcing, ModeVector};
use crate::params::{ModelParams, SystemKind};
use crate::profile::{grid_points, merge_terms, moment, transport_particular, ExpTerm, ZProfile, C64, I};
use crate::spectrum::Spectrum;

/// Relative size below which the reduced determinant counts as zero.
pub const SINGULAR_RTOL: f64 = 1e-12;

struct Reduced {
    a11: C64,
    a22: C64,
    b1: C64,
    b2: C64,
    det: C64,
    scale: f64,
}

fn check_inputs(mu: f64, lambda: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Validation(format!("mu = {mu} must be positive")));
    }
    if !lambda.is_finite() {
        return Err(Error::Validation(format!("lambda = {lambda} must be finite")));
    }
    Ok(())
}

/// Coefficients of the reduced system. `g` is `z_p(1)`, the value at `rho = 1`
/// of the transport solution started from zero.
fn reduce(p: &ModelParams, mu: f64, lambda: f64, f: &ModeForcing, g: C64) -> Reduced {
    let il = I * lambda;
    let mb = mu.powf(p.beta);
    let ma = mu.powf(p.alpha);
    let sq = mu.sqrt();
    let (a, kappa) = (p.a, p.kappa);
    let e = C64::from_polar(1.0, -lambda * p.tau);
    let lam2 = lambda * lambda;
    let (a11, s11, a22, s22, b1, b2) = match p.kind {
        SystemKind::DelayHyperbolic => (
            -lam2 + mu * e + il * a * mu,
            lam2 + mu + (a * lambda * mu).abs(),
            il + ma,
            lambda.abs() + ma,
            f.f2 + il * f.f1 + a * mu * f.f1 - sq * g,
            f.f3 + mb * f.f1,
        ),
        SystemKind::DelayParabolic => (
            C64::new(mu - lam2, 0.0),
            mu + lam2,
            il + a * ma + kappa * ma * e,
            lambda.abs() + (a + kappa) * ma,
            f.f2 + il * f.f1,
            f.f3 + mb * f.f1 - kappa * mu.powf(p.alpha / 2.0) * g,
        ),
        SystemKind::NoDelayBaseline => (
            C64::new(mu - lam2, 0.0),
            mu + lam2,
            il + ma,
            lambda.abs() + ma,
            f.f2 + il * f.f1,
            f.f3 + mb * f.f1,
        ),
        SystemKind::DelayedDampingString => (
            -lam2 + mu + il * a * mu * e,
            lam2 + mu + (a * lambda * mu).abs(),
            il + ma,
            lambda.abs() + ma,
            f.f2 + il * f.f1 + a * mu * e * f.f1 - a * sq * g,
            f.f3 + mb * f.f1,
        ),
    };
    let det = a11 * a22 + il * mb * mb;
    let scale = s11 * s22 + lambda.abs() * mb * mb;
    Reduced { a11, a22, b1, b2, det, scale }
}

/// Determinant of the reduced 2x2 system at `s = i lambda`; equals the entire
/// characteristic function there.
pub fn mode_determinant(params: &ModelParams, mu: f64, lambda: f64) -> C64 {
    reduce(params, mu, lambda, &ModeForcing::zero(), C64::new(0.0, 0.0)).det
}

/// Ratio `|det| / scale` of the reduced system at `s = i lambda`; values below
/// [`SINGULAR_RTOL`] make the solver report a near-singular mode.
pub fn relative_determinant(params: &ModelParams, mu: f64, lambda: f64) -> f64 {
    let r = reduce(params, mu, lambda, &ModeForcing::zero(), C64::new(0.0, 0.0));
    r.det.norm() / r.scale
}

/// Solves `(i lambda - A_n) U = F` exactly.
///
/// The transport row is integrated in closed form for analytic `h` and cell by
/// cell (exponential factor exact, `h` linear) for gridded `h`; the returned
/// `z` has the same representation as `h`. The mode index of the result is 0.
pub fn solve_mode_resolvent(
    params: &ModelParams,
    mu: f64,
    lambda: f64,
    forcing: &ModeForcing,
) -> Result<ModeVector> {
    check_inputs(mu, lambda)?;
    let delayed = params.kind.has_delay();
    let zp = if delayed {
        Some(transport_particular(&forcing.h, lambda, params.tau))
    } else {
        None
    };
    let g = zp.as_ref().map_or(C64::new(0.0, 0.0), |z| z.eval(1.0));
    let r = reduce(params, mu, lambda, forcing, g);
    let threshold = SINGULAR_RTOL * r.scale;
    if !(r.det.norm() >= threshold) {
        return Err(Error::NearSingular { det: r.det.norm(), threshold });
    }
    let mb = mu.powf(params.beta);
    let u = (r.b1 * r.a22 + mb * r.b2) / r.det;
    let theta = (r.a11 * r.b2 - I * lambda * mb * r.b1) / r.det;
    let v = I * lambda * u - forcing.f1;
    let z = match (zp, boundary_trace(params, mu, u, v, theta)) {
        (Some(zp), Some(trace)) => with_boundary_value(zp, trace, lambda * params.tau),
        _ => ZProfile::zero(),
    };
    Ok(ModeVector { mode_index: 0, u, v, theta, z })
}

/// `zp + trace e^{-i omega rho}`.
fn with_boundary_value(zp: ZProfile, trace: C64, omega: f64) -> ZProfile {
    match zp {
        ZProfile::Grid(mut values) => {
            let n = values.len();
            for (zj, rho) in values.iter_mut().zip(grid_points(n)) {
                *zj += trace * C64::from_polar(1.0, -omega * rho);
            }
            ZProfile::Grid(values)
        }
        other => {
            let mut terms = other.terms().unwrap();
            terms.push(ExpTerm::new(trace, 0, -omega));
            ZProfile::Terms(merge_terms(terms))
        }
    }
}

/// Energy norm of `(i lambda - A_n) U - F`, plus `sqrt(xi) |z(0) - trace|`
/// for the boundary condition that defines the domain of `A_n`.
///
/// The transport row `i lambda z + z'/tau - h` is exact for analytic profiles.
/// With a gridded `z` or `h` it is evaluated on cells as
/// `((z e^{i omega rho})|_cell / tau - int_cell e^{i omega s} h) / drho`,
/// the integrating-factor difference that vanishes for the solver's output.
pub fn mode_residual(
    params: &ModelParams,
    mu: f64,
    lambda: f64,
    state: &ModeVector,
    forcing: &ModeForcing,
) -> f64 {
    let p = params;
    let il = I * lambda;
    let (u, v, th) = (state.u, state.v, state.theta);
    let mb = mu.powf(p.beta);
    let ma = mu.powf(p.alpha);
    let z1 = state.z.eval(1.0);
    let r1 = il * u - v - forcing.f1;
    let (r2, r3) = match p.kind {
        SystemKind::DelayHyperbolic => (
            il * v + mu.sqrt() * z1 + p.a * mu * v - mb * th - forcing.f2,
            il * th + ma * th + mb * v - forcing.f3,
        ),
        SystemKind::DelayParabolic => (
            il * v + mu * u - mb * th - forcing.f2,
            il * th + p.kappa * mu.powf(p.alpha / 2.0) * z1 + p.a * ma * th + mb * v - forcing.f3,
        ),
        SystemKind::NoDelayBaseline => (
            il * v + mu * u - mb * th - forcing.f2,
            il * th + ma * th + mb * v - forcing.f3,
        ),
        SystemKind::DelayedDampingString => (
            il * v + mu * u + p.a * mu.sqrt() * z1 - mb * th - forcing.f2,
            il * th + ma * th + mb * v - forcing.f3,
        ),
    };
    let mut e = mu * r1.norm_sqr() + r2.norm_sqr() + r3.norm_sqr();
    if p.kind.has_delay() {
        e += p.xi * transport_residual_sq(&state.z, &forcing.h, lambda, p.tau);
        if let Some(trace) = boundary_trace(p, mu, u, v, th) {
            let d = (state.z.eval(0.0) - trace).norm();
            return e.sqrt() + p.xi.sqrt() * d;
        }
    }
    e.sqrt()
}

fn transport_residual_sq(z: &ZProfile, h: &ZProfile, lambda: f64, tau: f64) -> f64 {
    if let (Some(zt), Some(ht), Some(dz)) = (z.terms(), h.terms(), z.derivative_terms()) {
        let mut r: Vec<ExpTerm> = zt
            .iter()
            .map(|t| ExpTerm::new(t.coef * I * lambda, t.power, t.freq))
            .collect();
        r.extend(dz.iter().map(|t| ExpTerm::new(t.coef / tau, t.power, t.freq)));
        r.extend(ht.iter().map(|t| ExpTerm::new(-t.coef, t.power, t.freq)));
        return ZProfile::Terms(merge_terms(r)).norm_sq();
    }
    let n = z.grid_len().max(h.grid_len()).unwrap();
    let zs = z.samples(n);
    let hs = h.samples(n);
    let omega = lambda * tau;
    let dr = 1.0 / (n - 1) as f64;
    let (m0, m1) = (moment(0, omega * dr), moment(1, omega * dr));
    let rho: Vec<f64> = grid_points(n).collect();
    let mut acc = 0.0;
    for j in 0..n - 1 {
        let ej = C64::from_polar(1.0, omega * rho[j]);
        let ek = C64::from_polar(1.0, omega * rho[j + 1]);
        let jump = (zs[j + 1] * ek - zs[j] * ej) / tau;
        let source = dr * ej * (hs[j] * m0 + (hs[j + 1] - hs[j]) * m1);
        acc += ((jump - source) / dr).norm_sqr() * dr;
    }
    acc
}

/// Forcings spanning the trial space of [`mode_resolvent_norm_lb`].
pub fn trial_forcings(params: &ModelParams, mu: f64, lambda: f64, k_max: usize) -> Vec<ModeForcing> {
    let one = C64::new(1.0, 0.0);
    let mut out = vec![
        ModeForcing { f1: C64::new(mu.powf(-0.5), 0.0), ..ModeForcing::zero() },
        ModeForcing { f2: one, ..ModeForcing::zero() },
        ModeForcing { f3: one, ..ModeForcing::zero() },
    ];
    if params.kind.has_delay() {
        let k = k_max as i64;
        for j in -k..=k {
            out.push(ModeForcing::transport(ZProfile::exp(one, 2.0 * std::f64::consts::PI * j as f64)));
        }
        let omega = lambda * params.tau;
        out.push(ModeForcing::transport(ZProfile::exp(one, omega)));
        out.push(ModeForcing::transport(ZProfile::exp(one, -omega)));
    }
    out
}

fn gram(states: &[ModeVector], params: &ModelParams, mu: f64) -> DMatrix<C64> {
    let m = states.len();
    DMatrix::from_fn(m, m, |i, j| energy_inner(&states[j], &states[i], params, mu))
}

/// Largest gain `||R F|| / ||F||` over the trial space: the three scalar
/// slots, Fourier profiles `e^{2 pi i k rho}` for `|k| <= k_max`, and the
/// delay exponentials `e^{+- i lambda tau rho}`. The undelayed system uses
/// the scalar slots only.
///
/// Trial forcings that are numerically dependent (eigenvalues of their Gram
/// matrix below `1e-12` of the largest) are dropped before orthonormalizing.
pub fn mode_resolvent_norm_lb(params: &ModelParams, mu: f64, lambda: f64, k_max: usize) -> Result<f64> {
    check_inputs(mu, lambda)?;
    let forcings = trial_forcings(params, mu, lambda, k_max);
    let states: Vec<ModeVector> = forcings
        .iter()
        .map(|f| solve_mode_resolvent(params, mu, lambda, f))
        .collect::<Result<_>>()?;
    let gf = gram(&forcings.iter().map(|f| f.as_state(0)).collect::<Vec<_>>(), params, mu);
    let gu = gram(&states, params, mu);
    Ok(generalized_top_eigenvalue(gf, gu).sqrt())
}

/// `max c^H gu c / c^H gf c` with `gf` Hermitian positive semidefinite.
fn generalized_top_eigenvalue(gf: DMatrix<C64>, gu: DMatrix<C64>) -> f64 {
    let m = gf.nrows();
    let eig = gf.symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * top)
        .collect();
    if keep.is_empty() {
        return 0.0;
    }
    let w = DMatrix::from_fn(m, keep.len(), |r, c| {
        let i = keep[c];
        eig.eigenvectors[(r, i)] / eig.eigenvalues[i].sqrt()
    });
    let reduced = w.adjoint() * gu * &w;
    let reduced = (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
    reduced.symmetric_eigen().eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0)
}

/// One line of a resolvent scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    /// Largest lower bound over the scanned modes (0 when every mode was skipped).
    pub sup_lb: f64,
    pub argmax_n: Option<usize>,
    /// Modes skipped as near-singular at this `lambda`.
    pub skipped_modes: Vec<usize>,
}

/// For each `lambda`, the maximum over modes `n <= n_max` of
/// [`mode_resolvent_norm_lb`]. Near-singular modes are skipped and listed.
/// Ties go to the smallest mode index, so the output is deterministic.
pub fn resolvent_scan(
    params: &ModelParams,
    spectrum: &Spectrum,
    lambdas: &[f64],
    k_max: usize,
    n_max: usize,
) -> Result<Vec<ScanRow>> {
    params.validate()?;
    if n_max == 0 {
        return Err(Error::Validation("n_max must be at least 1".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::Validation(format!("scan frequency {bad} must be positive")));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("scan frequencies must be increasing".into()));
    }
    let mus = spectrum.eigenvalues(n_max);
    Ok(lambdas
        .par_iter()
        .map(|&lambda| {
            let values: Vec<(usize, Result<f64>)> = mus
                .par_iter()
                .enumerate()
                .map(|(i, &mu)| (i + 1, mode_resolvent_norm_lb(params, mu, lambda, k_max)))
                .collect();
            let mut row = ScanRow { lambda, sup_lb: 0.0, argmax_n: None, skipped_modes: Vec::new() };
            for (n, value) in values {
                match value {
                    Ok(lb) if row.argmax_n.is_none() || lb > row.sup_lb => {
                        row.sup_lb = lb;
                        row.argmax_n = Some(n);
                    }
                    Ok(_) => {}
                    Err(_) => row.skipped_modes.push(n),
                }
            }
            row
        })
        .collect())
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "sup_lb", "argmax_n", "skipped_modes"])?;
    for r in rows {
        let skipped: Vec<String> = r.skipped_modes.iter().map(|n| n.to_string()).collect();
        w.write_record([
            fmt_f64(r.lambda),
            fmt_f64(r.sup_lb),
            r.argmax_n.map(|n| n.to_string()).unwrap_or_default(),
            skipped.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp() -> ModelParams {
        ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5)
    }

    fn sample_forcing() -> ModeForcing {
        ModeForcing {
            f1: C64::new(0.3, -1.0),
            f2: C64::new(-0.7, 0.2),
            f3: C64::new(1.1, 0.4),
            h: ZProfile::Terms(vec![
                ExpTerm::new(C64::new(0.5, 0.5), 0, 3.0),
                ExpTerm::new(C64::new(-0.2, 0.1), 1, -1.0),
            ]),
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        for kind in SystemKind::ALL {
            let p = ModelParams::new(kind, 0.5, 0.5);
            let u = solve_mode_resolvent(&p, 4.0, 1.3, &ModeForcing::zero()).unwrap();
            assert_eq!(u.u, C64::new(0.0, 0.0));
            assert!(u.z.norm_sq() == 0.0);
        }
    }

    #[test]
    fn static_load_hand_solution() {
        // lambda = 0 forces v = 0, theta = 0 and a constant z equal to u
        let f = ModeForcing { f2: C64::new(1.0, 0.0), ..ModeForcing::zero() };
        let u = solve_mode_resolvent(&hyp(), 1.0, 0.0, &f).unwrap();
        assert!((u.u - 1.0).norm() < 1e-14);
        assert!(u.v.norm() < 1e-14 && u.theta.norm() < 1e-14);
        for r in [0.0, 0.5, 1.0] {
            assert!((u.z.eval(r) - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn residual_vanishes_for_every_kind() {
        let f = sample_forcing();
        for kind in SystemKind::ALL {
            let p = ModelParams::new(kind, 0.4, 0.7).with_a(1.5).with_tau(0.8);
            for &(mu, lambda) in &[(2.0, 0.7), (50.0, -3.0), (1e4, 120.0)] {
                let u = solve_mode_resolvent(&p, mu, lambda, &f).unwrap();
                let res = mode_residual(&p, mu, lambda, &u, &f);
                assert!(res <= 1e-10 * f.norm(&p, mu), "{kind} mu={mu}: {res}");
            }
        }
    }

    #[test]
    fn gridded_forcing_residual_vanishes() {
        let mut f = sample_forcing();
        f.h = ZProfile::Grid(f.h.samples(257));
        for kind in [SystemKind::DelayHyperbolic, SystemKind::DelayParabolic] {
            let p = ModelParams::new(kind, 0.5, 0.5).with_a(2.0);
            let u = solve_mode_resolvent(&p, 9.0, 40.0, &f).unwrap();
            assert!(u.z.grid_len() == Some(257));
            assert!(mode_residual(&p, 9.0, 40.0, &u, &f) <= 1e-10 * f.norm(&p, 9.0));
        }
    }

    #[test]
    fn residual_of_zero_state_is_forcing_norm() {
        let f = sample_forcing();
        let p = hyp();
        let r = mode_residual(&p, 3.0, 2.0, &ModeVector::zero(0), &f);
        assert!((r - f.norm(&p, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn perturbed_state_has_residual() {
        let f = sample_forcing();
        let p = hyp();
        let mut u = solve_mode_resolvent(&p, 3.0, 2.0, &f).unwrap();
        u.v += 1e-3;
        assert!(mode_residual(&p, 3.0, 2.0, &u, &f) > 1e-4);
    }

    #[test]
    fn conjugation_symmetry() {
        let f = sample_forcing();
        for kind in SystemKind::ALL {
            let p = ModelParams::new(kind, 0.3, 0.6);
            let a = solve_mode_resolvent(&p, 7.0, 2.5, &f).unwrap();
            let b = solve_mode_resolvent(&p, 7.0, -2.5, &f.conj()).unwrap();
            assert!((a.u.conj() - b.u).norm() < 1e-12);
            assert!((a.theta.conj() - b.theta).norm() < 1e-12);
            for r in [0.2, 0.9] {
                assert!((a.z.eval(r).conj() - b.z.eval(r)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lower_bound_grows_with_trial_space() {
        let p = hyp();
        let lb0 = mode_resolvent_norm_lb(&p, 30.0, 4.0, 0).unwrap();
        let lb4 = mode_resolvent_norm_lb(&p, 30.0, 4.0, 4).unwrap();
        assert!(lb4 >= lb0 * (1.0 - 1e-12));
    }

    #[test]
    fn baseline_bound_decays() {
        let p = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
        // resonant modes mu = lambda^2
        let lo = mode_resolvent_norm_lb(&p, 1e6, 1e3, 0).unwrap();
        let hi = mode_resolvent_norm_lb(&p, 1e12, 1e6, 0).unwrap();
        assert!(hi < lo);
    }

    #[test]
    fn empty_scan() {
        let s = crate::spectrum::make_spectrum(crate::spectrum::SpectrumSpec::String).unwrap();
        assert!(resolvent_scan(&hyp(), &s, &[], 0, 4).unwrap().is_empty());
    }
}
