//! Model parameters and the admissible range of the delay-energy weight.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which delayed system a set of parameters instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// Delay on the elastic stiffness `A u(t - tau)`, Kelvin-Voigt damping `a A u'`.
    DelayHyperbolic,
    /// Delay on the thermal dissipation `kappa A^alpha theta(t - tau)`.
    DelayParabolic,
    /// Classical alpha-beta system, no delay and no damping.
    NoDelayBaseline,
    /// Thermoelastic string whose Kelvin-Voigt damping is delayed.
    DelayedDampingString,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::DelayHyperbolic,
        SystemKind::DelayParabolic,
        SystemKind::NoDelayBaseline,
        SystemKind::DelayedDampingString,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::DelayHyperbolic => "delay-hyperbolic",
            SystemKind::DelayParabolic => "delay-parabolic",
            SystemKind::NoDelayBaseline => "no-delay",
            SystemKind::DelayedDampingString => "delayed-damping-string",
        }
    }

    pub fn has_delay(self) -> bool {
        !matches!(self, SystemKind::NoDelayBaseline)
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "delay-hyperbolic" | "hyperbolic" => Ok(SystemKind::DelayHyperbolic),
            "delay-parabolic" | "parabolic" => Ok(SystemKind::DelayParabolic),
            "no-delay" | "baseline" | "no-delay-baseline" => Ok(SystemKind::NoDelayBaseline),
            "delayed-damping-string" | "string" => Ok(SystemKind::DelayedDampingString),
            other => Err(Error::Validation(format!("unknown system kind '{other}'"))),
        }
    }
}

/// Scalars of one delayed alpha-beta system.
///
/// `kappa` is read only by [`SystemKind::DelayParabolic`]; `tau` and `xi`
/// are ignored by [`SystemKind::NoDelayBaseline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: SystemKind,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub kappa: f64,
    pub tau: f64,
    pub xi: f64,
}

impl ModelParams {
    pub fn new(kind: SystemKind, beta: f64, alpha: f64) -> Self {
        ModelParams {
            kind,
            alpha,
            beta,
            a: 1.0,
            kappa: 1.0,
            tau: 1.0,
            xi: 2.0,
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    /// Checks the type invariants: exponents in the unit square and the
    /// scalars used by this kind strictly positive.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, x: f64| {
            if x.is_finite() && (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} = {x} must lie in [0, 1]")))
            }
        };
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} = {x} must be positive")))
            }
        };
        unit("alpha", self.alpha)?;
        unit("beta", self.beta)?;
        if self.kind != SystemKind::NoDelayBaseline {
            positive("a", self.a)?;
            positive("tau", self.tau)?;
            positive("xi", self.xi)?;
        }
        if self.kind == SystemKind::DelayParabolic {
            positive("kappa", self.kappa)?;
        }
        Ok(())
    }

    /// `2 beta - alpha <= 1`.
    pub fn in_q(&self) -> bool {
        in_region_q(self.beta, self.alpha)
    }

    /// Weight of the delay variable in the energy; zero when the kind has no delay.
    pub fn z_weight(&self) -> f64 {
        if self.kind.has_delay() {
            self.xi
        } else {
            0.0
        }
    }

    /// Whether the stability hypotheses (`a >= tau`, resp. `a > kappa`, and an
    /// admissible `xi`) hold. Returns the reason when they do not.
    pub fn stability_hypotheses(&self) -> std::result::Result<(), String> {
        match xi_admissible(self) {
            Ok(interval) if interval.contains(self.xi) => Ok(()),
            Ok(interval) => Err(format!("xi = {} outside admissible set {interval}", self.xi)),
            Err(e) => Err(e.to_string()),
        }
    }
}

pub(crate) const Q_TOL: f64 = 1e-12;

pub fn in_region_q(beta: f64, alpha: f64) -> bool {
    2.0 * beta - alpha <= 1.0 + Q_TOL
}

/// A real interval with optionally closed ends; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub lower_closed: bool,
    pub upper: f64,
    pub upper_closed: bool,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let below = if self.upper.is_infinite() {
            true
        } else if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }

    /// A representative interior point (midpoint, or twice the lower bound when unbounded).
    pub fn interior_point(&self) -> f64 {
        if self.upper.is_infinite() {
            if self.lower > 0.0 {
                2.0 * self.lower
            } else {
                1.0
            }
        } else {
            0.5 * (self.lower + self.upper)
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed && self.upper.is_finite() { ']' } else { ')' };
        if self.upper.is_infinite() {
            write!(f, "{open}{}, inf{close}", self.lower)
        } else {
            write!(f, "{open}{}, {}{close}", self.lower, self.upper)
        }
    }
}

/// Range of `xi` for which the stability theorem applies.
///
/// * delay on the elastic part: `[2 tau / a, inf)`, requires `a >= tau`;
/// * delay on the thermal part: `(tau (a - sqrt(a^2 - kappa^2)), tau (a + sqrt(a^2 - kappa^2)))`,
///   requires `a > kappa`;
/// * no delay: `(0, inf)`.
///
/// The delayed-damping string shares the elastic-part rule.
pub fn xi_admissible(params: &ModelParams) -> Result<Interval> {
    let ModelParams { a, kappa, tau, .. } = *params;
    match params.kind {
        SystemKind::DelayHyperbolic | SystemKind::DelayedDampingString => {
            if !(a > 0.0 && tau > 0.0) || a < tau {
                return Err(Error::AdmissibilityUndefined(format!(
                    "requires a >= tau > 0, got a = {a}, tau = {tau}"
                )));
            }
            Ok(Interval {
                lower: 2.0 * tau / a,
                lower_closed: true,
                upper: f64::INFINITY,
                upper_closed: false,
            })
        }
        SystemKind::DelayParabolic => {
            if !(kappa > 0.0 && tau > 0.0) || a <= kappa {
                return Err(Error::AdmissibilityUndefined(format!(
                    "requires a > kappa > 0, got a = {a}, kappa = {kappa}"
                )));
            }
            let root = (a * a - kappa * kappa).sqrt();
            Ok(Interval {
                lower: tau * (a - root),
                lower_closed: false,
                upper: tau * (a + root),
                upper_closed: false,
            })
        }
        SystemKind::NoDelayBaseline => Ok(Interval {
            lower: 0.0,
            lower_closed: false,
            upper: f64::INFINITY,
            upper_closed: false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_interval() {
        let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_tau(0.5);
        let j = xi_admissible(&p).unwrap();
        assert_eq!(j.lower, 1.0);
        assert!(j.lower_closed && j.upper.is_infinite());
        assert!(j.contains(1.0) && !j.contains(0.999));
    }

    #[test]
    fn parabolic_interval() {
        let p = ModelParams::new(SystemKind::DelayParabolic, 0.5, 0.5)
            .with_a(5.0)
            .with_kappa(3.0);
        let j = xi_admissible(&p).unwrap();
        assert!((j.lower - 1.0).abs() < 1e-14 && (j.upper - 9.0).abs() < 1e-14);
        assert!(!j.contains(1.0) && !j.contains(9.0) && j.contains(5.0));
    }

    #[test]
    fn parabolic_requires_a_above_kappa() {
        let p = ModelParams::new(SystemKind::DelayParabolic, 0.5, 0.5)
            .with_a(1.0)
            .with_kappa(1.0);
        assert!(matches!(xi_admissible(&p), Err(Error::AdmissibilityUndefined(_))));
    }

    #[test]
    fn hyperbolic_requires_a_at_least_tau() {
        let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5)
            .with_a(0.1)
            .with_tau(1.0);
        assert!(xi_admissible(&p).is_err());
        assert!(p.stability_hypotheses().is_err());
    }

    #[test]
    fn baseline_is_open_half_line() {
        let p = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
        let j = xi_admissible(&p).unwrap();
        assert!(!j.contains(0.0) && j.contains(1e-9) && j.contains(1e9));
    }

    #[test]
    fn validation_rejects_out_of_square() {
        let mut p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 1.5);
        assert!(p.validate().is_err());
        p.alpha = 0.5;
        p.tau = 0.0;
        assert!(p.validate().is_err());
        p.kind = SystemKind::NoDelayBaseline;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn kind_names_parse_back() {
        for kind in SystemKind::ALL {
            assert_eq!(kind.name().parse::<SystemKind>().unwrap(), kind);
        }
    }
}
