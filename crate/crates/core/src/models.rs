//! Named parameter sets for the concrete PDE realizations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{xi_admissible, ModelParams, SystemKind};
use crate::spectrum::{make_spectrum, Spectrum, SpectrumSpec};

pub const PRESET_NAMES: [&str; 4] = ["plate-1d", "string", "beam", "abstract-power"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub params: ModelParams,
    pub spectrum: Spectrum,
    /// Default witness sweep indices. Hyperbolic sweeps stop once `n^s` passes
    /// `2^40`, beyond which rounding in the residual approaches `1e-9`; the
    /// string needs odd indices.
    pub witness_indices: Vec<usize>,
    pub notes: String,
}

fn dyadic_indices(s: f64, odd: bool) -> Vec<usize> {
    let top = ((40.0 / s).floor() as usize).clamp(6, 12);
    (4..=top)
        .map(|k| (1usize << k) + usize::from(odd))
        .collect()
}

/// Builds the preset `name` on the interval `(0, length)` (default `pi`).
///
/// `abstract-power` yields the hyperbolic system at `(1/2, 1/2)` with
/// `mu_n = n^2`; use [`abstract_power`] to choose the kind and exponent.
pub fn preset(name: &str, length: Option<f64>) -> Result<Preset> {
    let length = length.unwrap_or(PI);
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Validation(format!("interval length {length} must be positive")));
    }
    match name {
        "plate-1d" => Ok(Preset {
            name: name.into(),
            params: ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(1.0).with_xi(2.0),
            spectrum: make_spectrum(SpectrumSpec::Plate { length })?,
            witness_indices: dyadic_indices(4.0, false),
            notes: "hinged plate u_tt + Delta^2 u(t - tau) + a Delta^2 u_t - Delta theta = 0, \
                    theta_t - Delta theta + Delta u_t = 0 on a 1-D interval; A = Delta^2"
                .into(),
        }),
        "string" => {
            let spec = if (length - PI).abs() < 1e-15 {
                SpectrumSpec::String
            } else {
                SpectrumSpec::PowerLaw { c: (PI / length).powi(2), s: 2.0 }
            };
            let mut params = ModelParams::new(SystemKind::DelayedDampingString, 0.5, 1.0).with_a(1.0).with_tau(1.0);
            params.xi = admissible_xi(&params);
            Ok(Preset {
                name: name.into(),
                params,
                spectrum: make_spectrum(spec)?,
                witness_indices: dyadic_indices(2.0, true),
                notes: "string u_tt - u_xx - a u_xxt(t - tau) + theta_x = 0, theta_t - theta_xx + u_xt = 0; \
                        cos(n x) temperature basis with n >= 1 (zero-mean theta, n = 0 excluded)"
                    .into(),
            })
        }
        "beam" => {
            let mut params = ModelParams::new(SystemKind::DelayParabolic, 0.5, 0.5).with_a(2.0).with_kappa(1.0).with_tau(1.0);
            params.xi = admissible_xi(&params);
            Ok(Preset {
                name: name.into(),
                params,
                spectrum: make_spectrum(SpectrumSpec::Beam { length })?,
                witness_indices: (4..=12).map(|k| 1usize << k).collect(),
                notes: "hinged beam u_tt + u_xxxx - theta_xx = 0, theta_t - a theta_xx - kappa theta_xx(t - tau) \
                        + u_xxt = 0; A = d^4/dx^4"
                    .into(),
            })
        }
        "abstract-power" => abstract_power(SystemKind::DelayHyperbolic, 0.5, 0.5, 2.0),
        other => Err(Error::Validation(format!(
            "unknown preset '{other}' (expected one of {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Abstract system of the given kind with `mu_n = n^s`.
pub fn abstract_power(kind: SystemKind, beta: f64, alpha: f64, s: f64) -> Result<Preset> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Validation(format!("spectral exponent s = {s} must be positive")));
    }
    let mut params = ModelParams::new(kind, beta, alpha);
    if kind == SystemKind::DelayParabolic {
        params.a = 2.0;
    }
    params.validate()?;
    if kind.has_delay() {
        params.xi = admissible_xi(&params);
    }
    Ok(Preset {
        name: "abstract-power".into(),
        params,
        spectrum: make_spectrum(SpectrumSpec::PowerLaw { c: 1.0, s })?,
        witness_indices: dyadic_indices(s, false),
        notes: format!("abstract {} system with mu_n = n^{s}", kind.name()),
    })
}

fn admissible_xi(params: &ModelParams) -> f64 {
    xi_admissible(params).map(|i| i.interior_point()).unwrap_or(params.xi)
}

/// All presets with their default geometry.
pub fn list_presets() -> Vec<Preset> {
    PRESET_NAMES.iter().map(|n| preset(n, None).expect("built-in preset")).collect()
}
