//! Per-mode state, forcing and the energy inner product.

use serde::{Deserialize, Serialize};

use crate::params::{ModelParams, SystemKind};
use crate::profile::{ZProfile, C64};

/// State `(u, v, theta, z)` of the component along the eigenvector `e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVector {
    pub mode_index: usize,
    pub u: C64,
    pub v: C64,
    pub theta: C64,
    pub z: ZProfile,
}

impl ModeVector {
    pub fn zero(mode_index: usize) -> Self {
        ModeVector {
            mode_index,
            u: C64::new(0.0, 0.0),
            v: C64::new(0.0, 0.0),
            theta: C64::new(0.0, 0.0),
            z: ZProfile::zero(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        ModeVector {
            mode_index: self.mode_index,
            u: self.u * c,
            v: self.v * c,
            theta: self.theta * c,
            z: self.z.scaled(c),
        }
    }

    pub fn conj(&self) -> Self {
        ModeVector {
            mode_index: self.mode_index,
            u: self.u.conj(),
            v: self.v.conj(),
            theta: self.theta.conj(),
            z: self.z.conj(),
        }
    }
}

/// Right-hand side `F = (f1, f2, f3, h)` of the resolvent equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeForcing {
    pub f1: C64,
    pub f2: C64,
    pub f3: C64,
    pub h: ZProfile,
}

impl Default for ModeForcing {
    fn default() -> Self {
        ModeForcing::zero()
    }
}

impl ModeForcing {
    pub fn zero() -> Self {
        ModeForcing {
            f1: C64::new(0.0, 0.0),
            f2: C64::new(0.0, 0.0),
            f3: C64::new(0.0, 0.0),
            h: ZProfile::zero(),
        }
    }

    /// Forcing acting only on the delay variable.
    pub fn transport(h: ZProfile) -> Self {
        ModeForcing { h, ..ModeForcing::zero() }
    }

    pub fn scaled(&self, c: C64) -> Self {
        ModeForcing {
            f1: self.f1 * c,
            f2: self.f2 * c,
            f3: self.f3 * c,
            h: self.h.scaled(c),
        }
    }

    pub fn conj(&self) -> Self {
        ModeForcing {
            f1: self.f1.conj(),
            f2: self.f2.conj(),
            f3: self.f3.conj(),
            h: self.h.conj(),
        }
    }

    /// The forcing viewed as a state, so it can share the energy norm.
    pub fn as_state(&self, mode_index: usize) -> ModeVector {
        ModeVector {
            mode_index,
            u: self.f1,
            v: self.f2,
            theta: self.f3,
            z: self.h.clone(),
        }
    }

    pub fn norm(&self, params: &ModelParams, mu: f64) -> f64 {
        mode_energy(&self.as_state(0), params, mu).sqrt()
    }
}

/// `mu u1 conj(u2) + v1 conj(v2) + theta1 conj(theta2) + xi int z1 conj(z2)`.
pub fn energy_inner(a: &ModeVector, b: &ModeVector, params: &ModelParams, mu: f64) -> C64 {
    let mut acc = mu * a.u * b.u.conj() + a.v * b.v.conj() + a.theta * b.theta.conj();
    let w = params.z_weight();
    if w > 0.0 {
        acc += w * a.z.inner(&b.z);
    }
    acc
}

/// `mu |u|^2 + |v|^2 + |theta|^2 + xi int_0^1 |z|^2`; the delay term is
/// absent for the undelayed system.
pub fn mode_energy(state: &ModeVector, params: &ModelParams, mu: f64) -> f64 {
    let mut e = mu * state.u.norm_sqr() + state.v.norm_sqr() + state.theta.norm_sqr();
    let w = params.z_weight();
    if w > 0.0 {
        e += w * state.z.norm_sq();
    }
    e
}

/// The quantity `z(0)` must equal: `mu^{1/2} u`, `mu^{alpha/2} theta` or `mu^{1/2} v`.
pub fn boundary_trace(params: &ModelParams, mu: f64, u: C64, v: C64, theta: C64) -> Option<C64> {
    match params.kind {
        SystemKind::DelayHyperbolic => Some(mu.sqrt() * u),
        SystemKind::DelayParabolic => Some(mu.powf(params.alpha / 2.0) * theta),
        SystemKind::DelayedDampingString => Some(mu.sqrt() * v),
        SystemKind::NoDelayBaseline => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5)
    }

    #[test]
    fn unit_velocity() {
        let mut s = ModeVector::zero(1);
        s.v = C64::new(1.0, 0.0);
        for mu in [0.1, 1.0, 1e6] {
            assert_eq!(mode_energy(&s, &params().with_xi(7.0), mu), 1.0);
        }
    }

    #[test]
    fn displacement_weight() {
        let mu: f64 = 37.0;
        let mut s = ModeVector::zero(1);
        s.u = C64::new(mu.powf(-0.5), 0.0);
        assert!((mode_energy(&s, &params(), mu) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_delay_profile() {
        let mut s = ModeVector::zero(1);
        s.z = ZProfile::constant(C64::new(1.0, 0.0));
        assert!((mode_energy(&s, &params().with_xi(2.0), 3.0) - 2.0).abs() < 1e-15);
        let base = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
        assert_eq!(mode_energy(&s, &base, 3.0), 0.0);
    }
}
