//! Witness sequences: unit forcings `F_n` and frequencies `lambda_n -> inf`
//! whose resolvent solutions keep their norm bounded below.
//!
//! The forcing acts only on the delay variable, `h(s) = C e^{i lambda tau (1 - s)} Phi`,
//! so `z = c0 e^{-i omega rho} + rho c1 e^{i omega (1 - rho)}` and, as the other
//! components vanish, `||U|| / ||F|| -> tau / sqrt(3)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::mode::{mode_energy, ModeForcing, ModeVector};
use crate::params::{in_region_q, ModelParams, SystemKind, Q_TOL};
use crate::profile::{ZProfile, C64, I};
use crate::resolvent::mode_residual;
use crate::spectrum::Spectrum;

/// Largest eigenvalue for which the witness formulas stay comfortably inside
/// double precision with the default exponents.
pub const MU_SAFE_MAX: f64 = 1e12;

const DELTA_CAP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentChoice {
    pub p: f64,
    pub q: f64,
    /// 0 when the case has no free parameter.
    pub delta: f64,
    pub case_tag: String,
    /// Whether `delta` is the built-in default rather than a caller value.
    pub delta_is_default: bool,
}

/// Strict upper bound for `delta` in the cases that have one.
fn delta_bound(params: &ModelParams) -> Option<f64> {
    let (a, b) = (params.alpha, params.beta);
    match params.kind {
        SystemKind::DelayHyperbolic if a == 0.0 => Some(0.5),
        SystemKind::DelayParabolic if a > 0.0 && !is_parabolic_equality(b, a) => {
            Some(a.min(0.5).min((1.0 + a) / 3.0).min(1.0 + a - 2.0 * b))
        }
        SystemKind::DelayParabolic if a == 0.0 => Some(0.5),
        _ => None,
    }
}

fn is_parabolic_equality(beta: f64, alpha: f64) -> bool {
    (alpha / 2.0 + 0.5 - beta).abs() <= Q_TOL
}

/// Exponents `p` (size of the anchor component `mu^{-p}`) and `q`
/// (`lambda = mu^q`) with the default `delta`.
pub fn select_exponents(params: &ModelParams) -> Result<ExponentChoice> {
    select_exponents_with(params, None)
}

/// As [`select_exponents`]; `delta` overrides the default, which is half the
/// smallest strict bound, capped at 0.25.
pub fn select_exponents_with(params: &ModelParams, delta: Option<f64>) -> Result<ExponentChoice> {
    let (alpha, beta) = (params.alpha, params.beta);
    if !in_region_q(beta, alpha) {
        return Err(Error::Domain(format!(
            "(beta, alpha) = ({beta}, {alpha}) violates 2 beta - alpha <= 1"
        )));
    }
    if params.kind == SystemKind::DelayParabolic && alpha == 0.0 && beta == 0.5 {
        return Err(Error::UnsupportedCase(
            "thermal delay at (beta, alpha) = (1/2, 0): no witness exponents are defined for alpha = 0, beta = 1/2".into(),
        ));
    }
    let bound = delta_bound(params);
    let d = match (bound, delta) {
        (Some(b), Some(d)) => {
            if !(d > 0.0 && d < b) {
                return Err(Error::Validation(format!("delta = {d} must lie in (0, {b})")));
            }
            d
        }
        (Some(b), None) => (0.5 * b).min(DELTA_CAP),
        (None, _) => 0.0,
    };
    let choice = |p: f64, q: f64, tag: &str| ExponentChoice {
        p,
        q,
        delta: d,
        case_tag: tag.to_string(),
        delta_is_default: bound.is_some() && delta.is_none(),
    };
    match params.kind {
        SystemKind::DelayHyperbolic => Ok(if alpha > 0.0 {
            choice(0.5 - beta + alpha, alpha, "hyp-α>0")
        } else {
            choice(0.5 - beta + d, d, "hyp-α=0")
        }),
        SystemKind::DelayParabolic => Ok(if is_parabolic_equality(beta, alpha) {
            choice(0.5, 0.5, "par-equality")
        } else if alpha > 0.0 {
            choice(alpha / 2.0 - beta + 1.0 - d, d, "par-α>0")
        } else {
            choice(1.0 - beta, d, "par-α=0")
        }),
        other => Err(Error::UnsupportedCase(format!("no witness construction for {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    pub exponents: ExponentChoice,
    /// Coefficient `Phi` of the forcing profile.
    pub phi: C64,
    /// Norms before normalization.
    pub norm_u: f64,
    pub norm_f: f64,
    pub ratio: f64,
    /// Residual of the normalized pair (`||F|| = 1`).
    pub residual: f64,
}

/// A witness pair, normalized so that `||F|| = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMode {
    pub lambda: f64,
    pub forcing: ModeForcing,
    pub state: ModeVector,
    pub row: WitnessRow,
}

/// One power term of `Phi`: `coef * mu^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTerm {
    pub label: &'static str,
    pub exponent: f64,
    pub value: C64,
}

struct Raw {
    lambda: f64,
    u: C64,
    v: C64,
    theta: C64,
    phi: C64,
    /// `z(0)` and the coefficient of `rho e^{i omega (1 - rho)}` in `z`.
    c0: C64,
    c1: C64,
    /// `h = h0 e^{i omega (1 - s)}`.
    h0: C64,
}

fn check_magnitudes(mu: f64, e: &ExponentChoice) -> Result<()> {
    let worst = [e.p, e.q, 1.0].iter().fold(0.0f64, |m, x| m.max(x.abs())) * 2.0;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Validation(format!("mu = {mu} must be positive")));
    }
    if mu.ln() * worst > 700.0 {
        return Err(Error::Overflow(format!(
            "mu = {mu:e} overflows mu^{worst}; evaluate in the log domain (not implemented), keep mu <= {MU_SAFE_MAX:e}"
        )));
    }
    Ok(())
}

fn raw_witness(params: &ModelParams, mu: f64, e: &ExponentChoice) -> Result<Raw> {
    check_magnitudes(mu, e)?;
    let (alpha, beta, a, tau) = (params.alpha, params.beta, params.a, params.tau);
    let lambda = mu.powf(e.q);
    let omega = lambda * tau;
    if omega > 1e15 {
        return Err(Error::Overflow(format!(
            "lambda tau = {omega:e} is too large for the phase e^(-i lambda tau) to be meaningful"
        )));
    }
    let il = I * lambda;
    let delay = C64::from_polar(1.0, -omega);
    let raw = match params.kind {
        SystemKind::DelayHyperbolic => {
            let theta = C64::new(-mu.powf(-e.p), 0.0);
            let v = -(il + mu.powf(alpha)) * theta / mu.powf(beta);
            let u = v / il;
            let sq = mu.sqrt();
            let phi = -(sq * u * delay + il * v / sq + a * sq * v - mu.powf(beta - 0.5) * theta);
            Raw { lambda, u, v, theta, phi, c0: sq * u, c1: phi, h0: phi / tau }
        }
        SystemKind::DelayParabolic => {
            let kappa = params.kappa;
            let v = C64::new(mu.powf(-e.p), 0.0);
            let u = v / il;
            let theta = (il * v + mu * u) / mu.powf(beta);
            let ha = mu.powf(alpha / 2.0);
            let phi = -(il * theta / ha + (a + kappa * delay) * ha * theta + mu.powf(beta - alpha / 2.0) * v);
            Raw { lambda, u, v, theta, phi, c0: ha * theta, c1: phi / kappa, h0: phi / (kappa * tau) }
        }
        other => return Err(Error::UnsupportedCase(format!("no witness construction for {other}"))),
    };
    if ![raw.u, raw.v, raw.theta, raw.phi].iter().all(|x| x.is_finite()) {
        return Err(Error::Overflow(format!("non-finite witness component at mu = {mu:e}")));
    }
    Ok(raw)
}

/// Builds the witness at eigenvalue `mu` with the default exponents.
pub fn build_witness_mode(params: &ModelParams, mu: f64) -> Result<WitnessMode> {
    let e = select_exponents(params)?;
    build_witness_mode_with(params, mu, &e, 0)
}

/// Builds the witness for given exponents; `n` is recorded in the row.
pub fn build_witness_mode_with(
    params: &ModelParams,
    mu: f64,
    exponents: &ExponentChoice,
    n: usize,
) -> Result<WitnessMode> {
    params.validate()?;
    let raw = raw_witness(params, mu, exponents)?;
    let omega = raw.lambda * params.tau;
    let z = ZProfile::Exponential { c0: raw.c0, c1: raw.c1, omega };
    // e^{i omega (1 - s)} = e^{i omega} e^{-i omega s}
    let h = ZProfile::Exponential {
        c0: raw.h0 * C64::from_polar(1.0, omega),
        c1: C64::new(0.0, 0.0),
        omega,
    };
    let state = ModeVector { mode_index: n, u: raw.u, v: raw.v, theta: raw.theta, z };
    let forcing = ModeForcing::transport(h);
    let norm_u = mode_energy(&state, params, mu).sqrt();
    let norm_f = forcing.norm(params, mu);
    if !(norm_f > 0.0 && norm_f.is_finite()) {
        return Err(Error::Overflow(format!("forcing norm {norm_f} at mu = {mu:e}")));
    }
    let scale = C64::new(1.0 / norm_f, 0.0);
    let state = state.scaled(scale);
    let forcing = forcing.scaled(scale);
    let residual = mode_residual(params, mu, raw.lambda, &state, &forcing);
    let row = WitnessRow {
        n,
        mu,
        lambda: raw.lambda,
        exponents: exponents.clone(),
        phi: raw.phi,
        norm_u,
        norm_f,
        ratio: norm_u / norm_f,
        residual,
    };
    Ok(WitnessMode { lambda: raw.lambda, forcing, state, row })
}

/// `Phi` split into its power terms `c mu^e`; their sum is `Phi` exactly.
pub fn phi_terms(params: &ModelParams, mu: f64, e: &ExponentChoice) -> Result<Vec<PhiTerm>> {
    let raw = raw_witness(params, mu, e)?;
    let (al, be, a, p, q) = (params.alpha, params.beta, params.a, e.p, e.q);
    let delay = C64::from_polar(1.0, -raw.lambda * params.tau);
    let t = |label, exponent: f64, c: C64| PhiTerm { label, exponent, value: c * mu.powf(exponent) };
    let one = C64::new(1.0, 0.0);
    Ok(match params.kind {
        SystemKind::DelayHyperbolic => vec![
            t("-mu^(1/2) u e^(-i lambda tau), real part of u", 0.5 - p - be, -delay),
            t("-mu^(1/2) u e^(-i lambda tau), imaginary part of u", 0.5 + al - p - be - q, I * delay),
            t("-i lambda mu^(-1/2) v, from i lambda theta", 2.0 * q - 0.5 - p - be, one),
            t("-i lambda mu^(-1/2) v, from mu^alpha theta", q + al - 0.5 - p - be, -I),
            t("-a mu^(1/2) v, from i lambda theta", 0.5 + q - p - be, -a * I),
            t("-a mu^(1/2) v, from mu^alpha theta", 0.5 + al - p - be, C64::new(-a, 0.0)),
            t("mu^(beta-1/2) theta", be - 0.5 - p, -one),
        ],
        SystemKind::DelayParabolic => {
            let damp = params.a + params.kappa * delay;
            vec![
                t("-i lambda mu^(-alpha/2) theta, from i lambda v", 2.0 * q - al / 2.0 - p - be, one),
                t("-i lambda mu^(-alpha/2) theta, from mu u", 1.0 - al / 2.0 - p - be, -one),
                t("-(a + kappa e^(-i lambda tau)) mu^(alpha/2) theta, from i lambda v", al / 2.0 + q - p - be, -I * damp),
                t("-(a + kappa e^(-i lambda tau)) mu^(alpha/2) theta, from mu u", al / 2.0 + 1.0 - p - q - be, I * damp),
                t("-mu^(beta-alpha/2) v", be - al / 2.0 - p, -one),
            ]
        }
        other => return Err(Error::UnsupportedCase(format!("no witness construction for {other}"))),
    })
}

/// Rows of a witness sweep plus the extrapolated ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSweep {
    pub rows: Vec<WitnessRow>,
    pub limit_estimate: f64,
}

/// Builds a witness per index (in parallel) and extrapolates the ratio.
pub fn witness_sweep(params: &ModelParams, spectrum: &Spectrum, indices: &[usize]) -> Result<WitnessSweep> {
    witness_sweep_with(params, spectrum, indices, None)
}

pub fn witness_sweep_with(
    params: &ModelParams,
    spectrum: &Spectrum,
    indices: &[usize],
    delta: Option<f64>,
) -> Result<WitnessSweep> {
    if indices.is_empty() {
        return Err(Error::Validation("witness sweep needs at least one index".into()));
    }
    if indices[0] == 0 || indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("indices must be positive and increasing".into()));
    }
    let e = select_exponents_with(params, delta)?;
    let rows = indices
        .par_iter()
        .map(|&n| {
            let mu = spectrum
                .eigenvalue(n)
                .ok_or_else(|| Error::Validation(format!("spectrum has no eigenvalue with index {n}")))?;
            build_witness_mode_with(params, mu, &e, n).map(|w| w.row)
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 / r.n as f64, r.ratio)).collect();
    let limit_estimate = richardson(&pts);
    Ok(WitnessSweep { rows, limit_estimate })
}

/// Value at `h = 0` of the polynomial through the last (up to) three points `(h, y)`.
pub fn richardson(points: &[(f64, f64)]) -> f64 {
    let tail = &points[points.len().saturating_sub(3)..];
    let mut acc = 0.0;
    for (i, &(hi, yi)) in tail.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(hj, _)) in tail.iter().enumerate() {
            if i != j {
                w *= hj / (hj - hi);
            }
        }
        acc += w * yi;
    }
    acc
}

/// The JSON summary of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub limit_estimate: f64,
    pub certified: bool,
    pub criterion: String,
    /// Smallest ratio among the last three rows: a direct lower bound on the
    /// resolvent norm at those frequencies, independent of extrapolation.
    pub min_trailing_ratio: f64,
    pub max_relative_residual: f64,
    pub case_tag: String,
    pub delta: f64,
    pub delta_is_default: bool,
    pub conclusion: String,
}

pub const CRITERION: &str = "resolvent decay along the imaginary axis (immediate norm continuity)";

/// A sweep certifies when every residual is at most `1e-9 ||F||` and the
/// extrapolated ratio is positive.
pub fn summarize(sweep: &WitnessSweep) -> WitnessSummary {
    let rows = &sweep.rows;
    let tail = &rows[rows.len().saturating_sub(3)..];
    let min_trailing_ratio = tail.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_relative_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let certified = max_relative_residual <= 1e-9 && sweep.limit_estimate > 0.0 && min_trailing_ratio > 0.0;
    let e = &rows[0].exponents;
    let conclusion = if certified {
        format!(
            "lim inf over lambda -> inf of ||(i lambda - A)^-1|| >= {:.6} > 0: the resolvent does not vanish at infinity, so the semigroup is not immediately norm-continuous (hence not differentiable)",
            sweep.limit_estimate
        )
    } else {
        "not certified: residual too large or nonpositive ratio".to_string()
    };
    WitnessSummary {
        limit_estimate: sweep.limit_estimate,
        certified,
        criterion: CRITERION.to_string(),
        min_trailing_ratio,
        max_relative_residual,
        case_tag: e.case_tag.clone(),
        delta: e.delta,
        delta_is_default: e.delta_is_default,
        conclusion,
    }
}

pub fn write_witness_csv<W: Write>(rows: &[WitnessRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n", "mu", "lambda", "p", "q", "delta", "case_tag", "phi_re", "phi_im", "norm_u", "norm_f", "ratio",
        "residual",
    ])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.mu),
            fmt_f64(r.lambda),
            fmt_f64(r.exponents.p),
            fmt_f64(r.exponents.q),
            fmt_f64(r.exponents.delta),
            r.exponents.case_tag.clone(),
            fmt_f64(r.phi.re),
            fmt_f64(r.phi.im),
            fmt_f64(r.norm_u),
            fmt_f64(r.norm_f),
            fmt_f64(r.ratio),
            fmt_f64(r.residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Witness for the thermoelastic string `u_tt - u_xx - a u_xxt(t - tau) + theta_x = 0`
/// on `(0, pi)` at odd `n`: `theta_n = -(1/n^2) cos(n x)`, `v_n = ((1+i)/n) sin(n x)`,
/// `lambda_n = n^2`.
///
/// Returns the coefficient of `cos(n x)` in
/// `Phi_n = i lambda int_{pi/2}^x v - a v_x + theta - u_x e^{-i lambda tau}`,
/// computed from that antiderivative, and the witness row of the equivalent
/// per-mode system (`mu = n^2`, `beta = 1/2`, `alpha = 1`) with norms taken
/// on `(0, pi)`.
pub fn string_witness(n: usize, a: f64, tau: f64) -> Result<(C64, WitnessRow)> {
    if n.is_multiple_of(2) {
        return Err(Error::UnsupportedCase(format!(
            "n = {n}: the string witness needs odd n so that cos(n pi / 2) = 0"
        )));
    }
    if !(a > 0.0 && tau > 0.0) {
        return Err(Error::Validation(format!("a = {a} and tau = {tau} must be positive")));
    }
    let nf = n as f64;
    let lambda = nf * nf;
    let v_amp = (1.0 + I) / nf; // v = v_amp sin(n x)
    let u_amp = v_amp / (I * lambda); // u = u_amp sin(n x)
    let theta_amp = C64::new(-1.0 / (nf * nf), 0.0); // theta = theta_amp cos(n x)
    // int_{pi/2}^x sin(n s) ds = -cos(n x)/n + cos(n pi/2)/n = -cos(n x)/n for odd n
    let antiderivative = I * lambda * v_amp * (-1.0 / nf);
    let vx = v_amp * nf; // d/dx sin(n x) = n cos(n x)
    let ux = u_amp * nf;
    let delay = C64::from_polar(1.0, -lambda * tau);
    let phi = antiderivative - a * vx + theta_amp - ux * delay;

    let params = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 1.0)
        .with_a(a)
        .with_tau(tau)
        .with_xi(2.0 * tau / a);
    let e = select_exponents(&params)?;
    let mut row = build_witness_mode_with(&params, lambda, &e, n)?.row;
    // ||sin(n .)||^2 = ||cos(n .)||^2 = pi/2 on (0, pi)
    let l2 = (std::f64::consts::PI / 2.0).sqrt();
    row.norm_u *= l2;
    row.norm_f *= l2;
    Ok((phi, row))
}

/// Sweep of [`string_witness`] over odd indices. Each row carries the string
/// coefficient `Phi_n` in its `phi` field.
pub fn string_witness_sweep(indices: &[usize], a: f64, tau: f64) -> Result<WitnessSweep> {
    if indices.is_empty() || indices.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("indices must be nonempty and increasing".into()));
    }
    let rows = indices
        .par_iter()
        .map(|&n| {
            string_witness(n, a, tau).map(|(phi, mut row)| {
                row.phi = phi;
                row
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (1.0 / r.n as f64, r.ratio)).collect();
    let limit_estimate = richardson(&pts);
    Ok(WitnessSweep { rows, limit_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(beta: f64, alpha: f64) -> ModelParams {
        ModelParams::new(SystemKind::DelayHyperbolic, beta, alpha)
    }

    fn par(beta: f64, alpha: f64) -> ModelParams {
        ModelParams::new(SystemKind::DelayParabolic, beta, alpha).with_a(2.0).with_kappa(1.0).with_xi(3.0)
    }

    #[test]
    fn hyperbolic_exponents() {
        let e = select_exponents(&hyp(0.5, 0.5)).unwrap();
        assert_eq!((e.p, e.q, e.case_tag.as_str()), (0.5, 0.5, "hyp-α>0"));
        let e = select_exponents(&hyp(0.25, 0.0)).unwrap();
        assert_eq!((e.p, e.q, e.delta), (0.5, 0.25, 0.25));
    }

    #[test]
    fn parabolic_exponents() {
        let e = select_exponents(&par(0.75, 0.5)).unwrap();
        assert_eq!((e.p, e.q, e.case_tag.as_str()), (0.5, 0.5, "par-equality"));
        let e = select_exponents(&par(0.5, 0.5)).unwrap();
        assert_eq!((e.delta, e.p, e.q), (0.25, 0.5, 0.25));
        assert!(matches!(select_exponents(&par(0.5, 0.0)), Err(Error::UnsupportedCase(_))));
        assert!(matches!(select_exponents(&par(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn delta_override_is_checked() {
        assert!(select_exponents_with(&par(0.5, 0.5), Some(0.6)).is_err());
        let e = select_exponents_with(&par(0.5, 0.5), Some(0.1)).unwrap();
        assert!(!e.delta_is_default && (e.p - 0.65).abs() < 1e-15);
    }

    #[test]
    fn plate_witness_components() {
        let w = build_witness_mode(&hyp(0.5, 0.5), 1e4).unwrap();
        let s = w.row.norm_f;
        let st = w.state.scaled(C64::new(s, 0.0));
        assert_eq!(w.lambda, 100.0);
        assert!((st.v - (1.0 + I) * 1e-2).norm() < 1e-15);
        assert!((st.u * 100.0 - (1.0 - I) * 1e-2).norm() < 1e-15);
        assert!((st.theta + 1e-2).norm() < 1e-15);
        assert!((w.row.phi + (1.0 + I)).norm() < 3e-2);
        assert!(w.row.residual < 1e-9);
    }

    #[test]
    fn phi_terms_sum_to_phi() {
        for p in [hyp(0.5, 0.5), hyp(0.25, 0.0), par(0.5, 0.5), par(0.75, 0.5), par(0.25, 0.0)] {
            let e = select_exponents(&p).unwrap();
            let phi = build_witness_mode(&p, 1e6).unwrap().row.phi;
            let sum: C64 = phi_terms(&p, 1e6, &e).unwrap().iter().map(|t| t.value).sum();
            assert!((sum - phi).norm() < 1e-12 * phi.norm().max(1.0), "{:?}", p);
        }
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let p = hyp(0.5, 0.5);
        let w = build_witness_mode(&p, 900.0).unwrap();
        let c = C64::new(-3.0, 7.5);
        let r = mode_energy(&w.state.scaled(c), &p, 900.0).sqrt() / w.forcing.scaled(c).norm(&p, 900.0);
        assert!((r - w.row.ratio).abs() < 1e-12 * r);
    }

    #[test]
    fn richardson_is_exact_on_quadratics() {
        let f = |h: f64| 2.0 + 3.0 * h - 5.0 * h * h;
        let pts: Vec<_> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&h| (h, f(h))).collect();
        assert!((richardson(&pts) - 2.0).abs() < 1e-12);
        assert_eq!(richardson(&pts[..1]), f(0.5));
    }

    #[test]
    fn string_requires_odd_index() {
        assert!(matches!(string_witness(10, 1.0, 1.0), Err(Error::UnsupportedCase(_))));
    }

    #[test]
    fn string_phi_matches_mode_formula() {
        let (phi, row) = string_witness(101, 2.0, 1.0).unwrap();
        assert!((phi - row.phi).norm() < 1e-13);
        assert!((phi - C64::new(-1.0, -3.0)).norm() < 1e-3);
    }

    #[test]
    fn huge_mu_overflows() {
        assert!(matches!(build_witness_mode(&hyp(0.5, 1.0), 1e300), Err(Error::Overflow(_))));
    }
}
