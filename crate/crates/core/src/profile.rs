//! Profiles of the delay variable `z(rho)`, `rho in [0, 1]`.
//!
//! Analytic profiles are exponential polynomials `sum c rho^k e^{i nu rho}`;
//! their integrals, inner products and derivatives are exact. Sampled
//! profiles live on a uniform grid that includes both end points.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Default number of samples for gridded profiles.
///
/// Resolves the oscillation `e^{-i lambda tau rho}` up to `lambda tau` of a
/// few hundred; larger products need a finer grid.
pub const DEFAULT_GRID: usize = 257;

/// One term `coef * rho^power * e^{i freq rho}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub coef: C64,
    pub power: u32,
    pub freq: f64,
}

impl ExpTerm {
    pub fn new(coef: C64, power: u32, freq: f64) -> Self {
        ExpTerm { coef, power, freq }
    }

    fn eval(&self, rho: f64) -> C64 {
        self.coef * rho.powi(self.power as i32) * C64::from_polar(1.0, self.freq * rho)
    }
}

/// The delay variable on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZProfile {
    /// Values on a uniform grid `rho_j = j / (n - 1)`, `n >= 2`.
    Grid(Vec<C64>),
    /// `c0 e^{-i omega rho} + rho c1 e^{i omega (1 - rho)}`.
    Exponential { c0: C64, c1: C64, omega: f64 },
    /// General exponential polynomial.
    Terms(Vec<ExpTerm>),
}

impl Default for ZProfile {
    fn default() -> Self {
        ZProfile::zero()
    }
}

impl ZProfile {
    pub fn zero() -> Self {
        ZProfile::Terms(Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        ZProfile::Terms(vec![ExpTerm::new(c, 0, 0.0)])
    }

    /// `c e^{i freq rho}`
    pub fn exp(c: C64, freq: f64) -> Self {
        ZProfile::Terms(vec![ExpTerm::new(c, 0, freq)])
    }

    pub fn grid(values: Vec<C64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation("gridded profile needs at least 2 samples".into()));
        }
        Ok(ZProfile::Grid(values))
    }

    /// Samples `f` on a uniform `n`-point grid.
    pub fn sampled(n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        ZProfile::grid(grid_points(n).map(f).collect())
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, ZProfile::Grid(_))
    }

    /// Exponential-polynomial form of an analytic profile.
    pub fn terms(&self) -> Option<Vec<ExpTerm>> {
        match self {
            ZProfile::Grid(_) => None,
            ZProfile::Exponential { c0, c1, omega } => Some(vec![
                ExpTerm::new(*c0, 0, -omega),
                ExpTerm::new(c1 * C64::from_polar(1.0, *omega), 1, -omega),
            ]),
            ZProfile::Terms(t) => Some(t.clone()),
        }
    }

    pub fn eval(&self, rho: f64) -> C64 {
        match self {
            ZProfile::Grid(v) => {
                let n = v.len();
                let x = rho.clamp(0.0, 1.0) * (n - 1) as f64;
                let j = (x.floor() as usize).min(n - 2);
                let t = x - j as f64;
                v[j] * (1.0 - t) + v[j + 1] * t
            }
            ZProfile::Exponential { c0, c1, omega } => {
                (c0 + rho * c1 * C64::from_polar(1.0, *omega)) * C64::from_polar(1.0, -omega * rho)
            }
            ZProfile::Terms(t) => t.iter().map(|term| term.eval(rho)).sum(),
        }
    }

    /// Samples on an `n`-point uniform grid.
    pub fn samples(&self, n: usize) -> Vec<C64> {
        match self {
            ZProfile::Grid(v) if v.len() == n => v.clone(),
            _ => grid_points(n).map(|r| self.eval(r)).collect(),
        }
    }

    pub fn grid_len(&self) -> Option<usize> {
        match self {
            ZProfile::Grid(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn scaled(&self, c: C64) -> ZProfile {
        match self {
            ZProfile::Grid(v) => ZProfile::Grid(v.iter().map(|x| x * c).collect()),
            ZProfile::Exponential { c0, c1, omega } => ZProfile::Exponential {
                c0: c0 * c,
                c1: c1 * c,
                omega: *omega,
            },
            ZProfile::Terms(t) => ZProfile::Terms(
                t.iter().map(|x| ExpTerm::new(x.coef * c, x.power, x.freq)).collect(),
            ),
        }
    }

    pub fn conj(&self) -> ZProfile {
        match self {
            ZProfile::Grid(v) => ZProfile::Grid(v.iter().map(|x| x.conj()).collect()),
            ZProfile::Exponential { .. } | ZProfile::Terms(_) => ZProfile::Terms(
                self.terms()
                    .unwrap()
                    .iter()
                    .map(|x| ExpTerm::new(x.coef.conj(), x.power, -x.freq))
                    .collect(),
            ),
        }
    }

    /// `self + c * other`. Analytic profiles stay analytic; otherwise the result
    /// is sampled on the finer of the two grids.
    pub fn add_scaled(&self, c: C64, other: &ZProfile) -> ZProfile {
        match (self.terms(), other.terms()) {
            (Some(mut a), Some(b)) => {
                a.extend(b.into_iter().map(|x| ExpTerm::new(x.coef * c, x.power, x.freq)));
                ZProfile::Terms(merge_terms(a))
            }
            _ => {
                let n = self.grid_len().max(other.grid_len()).unwrap_or(DEFAULT_GRID);
                let a = self.samples(n);
                let b = other.samples(n);
                ZProfile::Grid(a.iter().zip(&b).map(|(x, y)| x + c * y).collect())
            }
        }
    }

    /// `int_0^1 |z|^2`: exact for analytic profiles, trapezoid for grids.
    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re.max(0.0)
    }

    /// `int_0^1 self * conj(other)`.
    pub fn inner(&self, other: &ZProfile) -> C64 {
        match (self.terms(), other.terms()) {
            (Some(a), Some(b)) => terms_inner(&a, &b),
            _ => {
                let n = self.grid_len().max(other.grid_len()).unwrap();
                let a = self.samples(n);
                let b = other.samples(n);
                trapezoid(&a.iter().zip(&b).map(|(x, y)| x * y.conj()).collect::<Vec<_>>())
            }
        }
    }

    /// Exact derivative of an analytic profile.
    pub fn derivative_terms(&self) -> Option<Vec<ExpTerm>> {
        let terms = self.terms()?;
        let mut out = Vec::with_capacity(2 * terms.len());
        for t in terms {
            if t.freq != 0.0 {
                out.push(ExpTerm::new(t.coef * I * t.freq, t.power, t.freq));
            }
            if t.power > 0 {
                out.push(ExpTerm::new(t.coef * t.power as f64, t.power - 1, t.freq));
            }
        }
        Some(merge_terms(out))
    }
}

pub(crate) fn grid_points(n: usize) -> impl Iterator<Item = f64> {
    let last = (n - 1) as f64;
    (0..n).map(move |j| if j + 1 == n { 1.0 } else { j as f64 / last })
}

pub(crate) fn trapezoid(values: &[C64]) -> C64 {
    let n = values.len();
    let h = 1.0 / (n - 1) as f64;
    let inner: C64 = values[1..n - 1].iter().sum();
    (inner + 0.5 * (values[0] + values[n - 1])) * h
}

/// Combines terms with identical power and frequency and drops exact zeros.
pub fn merge_terms(terms: Vec<ExpTerm>) -> Vec<ExpTerm> {
    let mut index: HashMap<(u32, u64), usize> = HashMap::new();
    let mut out: Vec<ExpTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        // +0.0 and -0.0 describe the same frequency
        let freq = if t.freq == 0.0 { 0.0 } else { t.freq };
        let key = (t.power, freq.to_bits());
        match index.get(&key) {
            Some(&k) => out[k].coef += t.coef,
            None => {
                index.insert(key, out.len());
                out.push(ExpTerm::new(t.coef, t.power, freq));
            }
        }
    }
    out.retain(|t| t.coef != C64::new(0.0, 0.0));
    out
}

/// Frequencies closer than this are integrated together, pointwise.
const CLUSTER_GAP: f64 = 2.0;
const CLUSTER_SPAN: f64 = 40.0;

/// `int_0^1 a conj(b)` for exponential polynomials.
///
/// Summing exact pairwise moments loses everything when nearby frequencies
/// nearly cancel (a truncated series against the function it expands), so
/// terms are grouped by frequency: within a group the product is smooth and
/// Gauss-Legendre integrates it to rounding, across groups the moments are
/// well conditioned.
fn terms_inner(a: &[ExpTerm], b: &[ExpTerm]) -> C64 {
    let mut freqs: Vec<f64> = a.iter().chain(b).map(|t| t.freq).collect();
    freqs.sort_by(|x, y| x.total_cmp(y));
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for f in freqs {
        match clusters.last_mut() {
            Some((lo, hi)) if f - *hi < CLUSTER_GAP && f - *lo < CLUSTER_SPAN => *hi = f,
            _ => clusters.push((f, f)),
        }
    }
    let which = |f: f64| clusters.partition_point(|c| c.1 < f);
    let group = |terms: &[ExpTerm]| {
        let mut g: Vec<Vec<ExpTerm>> = vec![Vec::new(); clusters.len()];
        for t in terms {
            g[which(t.freq)].push(*t);
        }
        g
    };
    let (ga, gb) = (group(a), group(b));
    let (nodes, weights) = gauss_legendre_01();
    let mut acc = C64::new(0.0, 0.0);
    for (i, ta) in ga.iter().enumerate() {
        for (j, tb) in gb.iter().enumerate() {
            if ta.is_empty() || tb.is_empty() {
                continue;
            }
            if i == j {
                let center = 0.5 * (clusters[i].0 + clusters[i].1);
                let shifted = |ts: &[ExpTerm], x: f64| -> C64 {
                    ts.iter()
                        .map(|t| t.coef * x.powi(t.power as i32) * C64::from_polar(1.0, (t.freq - center) * x))
                        .sum()
                };
                acc += nodes
                    .iter()
                    .zip(weights)
                    .map(|(&x, &w)| w * shifted(ta, x) * shifted(tb, x).conj())
                    .sum::<C64>();
            } else {
                for x in ta {
                    for y in tb {
                        acc += x.coef * y.coef.conj() * moment(x.power + y.power, x.freq - y.freq);
                    }
                }
            }
        }
    }
    acc
}

/// `int_0^1 rho^k e^{i nu rho} d rho`.
pub fn moment(k: u32, nu: f64) -> C64 {
    let kf = k as f64;
    if nu == 0.0 {
        return C64::new(1.0 / (kf + 1.0), 0.0);
    }
    if nu.abs() < 1.0 {
        // power series; terms shrink at least like 1/m!
        let mut acc = C64::new(0.0, 0.0);
        let mut pow = C64::new(1.0, 0.0);
        let mut m = 0u32;
        loop {
            let term = pow / (kf + m as f64 + 1.0);
            acc += term;
            if term.norm() < 1e-18 * acc.norm().max(1e-300) && m > 2 {
                break;
            }
            m += 1;
            pow = pow * I * nu / m as f64;
            if m > 200 {
                break;
            }
        }
        return acc;
    }
    if nu.abs() > kf + 1.0 {
        // forward recursion, error factor k/|nu| < 1 per step
        let e = C64::from_polar(1.0, nu);
        let inv = 1.0 / (I * nu);
        let mut m = (e - 1.0) * inv;
        for j in 1..=k {
            m = (e - j as f64 * m) * inv;
        }
        return m;
    }
    // moderate frequency relative to the power: Gauss-Legendre is exact to rounding
    let (nodes, weights) = gauss_legendre_01();
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * x.powi(k as i32) * C64::from_polar(1.0, nu * x))
        .sum()
}

fn gauss_legendre_01() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 128usize;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        (nodes, weights)
    })
}

/// Particular solution of the transport equation
/// `i lambda z + z' / tau = h`, `z(0) = 0`, i.e.
/// `z(rho) = tau e^{-i omega rho} int_0^rho e^{i omega s} h(s) ds` with `omega = lambda tau`.
///
/// Analytic forcings give analytic profiles. Gridded forcings are integrated
/// cell by cell with `h` linear and the exponential factor integrated
/// exactly, so `omega * drho > 1` does not alias.
pub fn transport_particular(h: &ZProfile, lambda: f64, tau: f64) -> ZProfile {
    let omega = lambda * tau;
    match h.terms() {
        Some(terms) => ZProfile::Terms(transport_terms(&terms, omega, tau)),
        None => {
            let v = match h {
                ZProfile::Grid(v) => v,
                _ => unreachable!(),
            };
            let n = v.len();
            let dr = 1.0 / (n - 1) as f64;
            let theta = omega * dr;
            let (m0, m1) = (moment(0, theta), moment(1, theta));
            let mut acc = C64::new(0.0, 0.0);
            let mut out = Vec::with_capacity(n);
            out.push(C64::new(0.0, 0.0));
            for j in 0..n - 1 {
                let rho_j = j as f64 * dr;
                let slope = v[j + 1] - v[j];
                acc += dr * C64::from_polar(1.0, omega * rho_j) * (v[j] * m0 + slope * m1);
                let rho_next = if j + 2 == n { 1.0 } else { (j + 1) as f64 * dr };
                out.push(tau * C64::from_polar(1.0, -omega * rho_next) * acc);
            }
            ZProfile::Grid(out)
        }
    }
}

fn transport_terms(terms: &[ExpTerm], omega: f64, tau: f64) -> Vec<ExpTerm> {
    let mut out = Vec::new();
    let scale = omega.abs().max(1.0);
    for t in terms {
        let sigma = omega + t.freq;
        let k = t.power;
        let c = tau * t.coef;
        if sigma.abs() <= 1e-14 * scale {
            out.push(ExpTerm::new(c / (k as f64 + 1.0), k + 1, -omega));
        } else if sigma.abs() < 0.5 {
            // int_0^rho s^k e^{i sigma s} ds as a power series in sigma
            let mut pow = C64::new(1.0, 0.0);
            let mut m = 0u32;
            loop {
                out.push(ExpTerm::new(c * pow / (k + m + 1) as f64, k + m + 1, -omega));
                m += 1;
                pow = pow * I * sigma / m as f64;
                if pow.norm() < 1e-18 || m > 60 {
                    break;
                }
            }
        } else {
            // e^{i sigma rho} P(rho) - P(0), P(rho) = sum_j (-1)^j k!/(k-j)! rho^{k-j} / (i sigma)^{j+1}
            let is = I * sigma;
            let mut falling = 1.0;
            let mut inv_pow = 1.0 / is;
            let mut p_at_zero = C64::new(0.0, 0.0);
            for j in 0..=k {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let coef = sign * falling * inv_pow;
                out.push(ExpTerm::new(c * coef, k - j, t.freq));
                if j == k {
                    p_at_zero = coef;
                }
                falling *= (k - j) as f64;
                inv_pow /= is;
            }
            out.push(ExpTerm::new(-c * p_at_zero, 0, -omega));
        }
    }
    merge_terms(out)
}
