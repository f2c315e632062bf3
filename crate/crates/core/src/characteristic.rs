//! Characteristic quasi-polynomials of the per-mode systems and a
//! rightmost-root search based on the argument principle.
//!
//! `characteristic_value` returns the reduced function `chi` with the thermal
//! pole `s = -mu^alpha` left in; roots are counted on its entire multiple
//! `chi_entire = chi * (s + mu^alpha)` (the parabolic `chi` is already entire).
//! `chi_entire(i lambda)` equals the resolvent solver's determinant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, SystemKind};
use crate::profile::C64;

/// A point `s` at which to evaluate the characteristic function of mode `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicQuery {
    pub mu: f64,
    pub s: C64,
}

/// `chi(s)`; errors with [`Error::Pole`] on the thermal pole.
pub fn characteristic_value(params: &ModelParams, q: CharacteristicQuery) -> Result<C64> {
    let CharacteristicQuery { mu, s } = q;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Validation(format!("mu = {mu} must be positive")));
    }
    let p = params;
    let ma = mu.powf(p.alpha);
    let mb2 = mu.powf(2.0 * p.beta);
    let e = (-s * p.tau).exp();
    if p.kind == SystemKind::DelayParabolic {
        return Ok((s * s + mu) * (s + p.a * ma + p.kappa * ma * e) + mb2 * s);
    }
    let denom = s + ma;
    if denom.norm() <= 1e-14 * ma.max(1.0) {
        return Err(Error::Pole(format!("{s}")));
    }
    let head = match p.kind {
        SystemKind::DelayHyperbolic => s * s + p.a * mu * s + mu * e,
        SystemKind::NoDelayBaseline => s * s + mu,
        SystemKind::DelayedDampingString => s * s + mu + p.a * mu * s * e,
        SystemKind::DelayParabolic => unreachable!(),
    };
    Ok(head + mb2 * s / denom)
}

/// `chi_entire(s)` and its derivative.
pub fn characteristic_entire(params: &ModelParams, mu: f64, s: C64) -> (C64, C64) {
    let p = params;
    let ma = mu.powf(p.alpha);
    let mb2 = mu.powf(2.0 * p.beta);
    let tau = p.tau;
    let e = (-s * tau).exp();
    if p.kind == SystemKind::DelayParabolic {
        let q = s + p.a * ma + p.kappa * ma * e;
        let dq = 1.0 - tau * p.kappa * ma * e;
        let v = (s * s + mu) * q + mb2 * s;
        let dv = 2.0 * s * q + (s * s + mu) * dq + mb2;
        return (v, dv);
    }
    let (head, dhead) = match p.kind {
        SystemKind::DelayHyperbolic => (
            s * s + p.a * mu * s + mu * e,
            2.0 * s + p.a * mu - tau * mu * e,
        ),
        SystemKind::NoDelayBaseline => (s * s + mu, 2.0 * s),
        SystemKind::DelayedDampingString => (
            s * s + mu + p.a * mu * s * e,
            2.0 * s + p.a * mu * e * (1.0 - tau * s),
        ),
        SystemKind::DelayParabolic => unreachable!(),
    };
    let v = head * (s + ma) + mb2 * s;
    let dv = dhead * (s + ma) + head + mb2;
    (v, dv)
}

/// Sum of the magnitudes of the terms of `chi_entire(s)`: the scale against
/// which a computed value counts as zero.
fn entire_scale(p: &ModelParams, mu: f64, s: C64) -> f64 {
    let ma = mu.powf(p.alpha);
    let mb2 = mu.powf(2.0 * p.beta);
    let r = s.norm();
    let e = (-s.re * p.tau).exp();
    match p.kind {
        SystemKind::DelayParabolic => {
            (r * r + mu) * (r + (p.a + p.kappa * e) * ma) + mb2 * r
        }
        SystemKind::DelayHyperbolic => (r * r + p.a * mu * r + mu * e) * (r + ma) + mb2 * r,
        SystemKind::NoDelayBaseline => (r * r + mu) * (r + ma) + mb2 * r,
        SystemKind::DelayedDampingString => (r * r + mu + p.a * mu * r * e) * (r + ma) + mb2 * r,
    }
}

/// Bound `R` such that every root with `Re s >= x` satisfies `|s| <= R`.
///
/// `chi_entire` is monic cubic in `s` with coefficients bounded on the half
/// plane by multiples of `E = e^{-x tau}`; if `|s|^3` exceeds three times
/// each lower-order term no root is possible.
fn modulus_bound(p: &ModelParams, mu: f64, x: f64) -> f64 {
    let ma = mu.powf(p.alpha);
    let mb2 = mu.powf(2.0 * p.beta);
    let e = if p.kind.has_delay() { (-x * p.tau).exp().max(1.0) } else { 1.0 };
    let (c2, c1, c0) = match p.kind {
        SystemKind::DelayHyperbolic => (p.a * mu + ma, mu * e + p.a * mu * ma + mb2, mu * ma * e),
        SystemKind::DelayParabolic => ((p.a + p.kappa * e) * ma, mu + mb2, mu * ma * (p.a + p.kappa * e)),
        SystemKind::NoDelayBaseline => (ma, mu + mb2, mu * ma),
        SystemKind::DelayedDampingString => (ma + p.a * mu * e, mu + p.a * mu * ma * e + mb2, mu * ma),
    };
    (3.0 * c2).max((3.0 * c1).sqrt()).max((3.0 * c0).cbrt())
}

/// Search controls for [`spectral_abscissa_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbscissaSearch {
    /// Real-part window `[re_min, re_max]`; defaults to `[-(a mu + 1), R]`
    /// with `R` a bound on the modulus of roots in the right half plane.
    pub window: Option<(f64, f64)>,
    /// Boundary samples per rectangle edge before adaptive doubling.
    pub edge_samples: usize,
    /// Target size of the final isolating rectangle and Newton tolerance.
    pub tolerance: f64,
}

impl Default for AbscissaSearch {
    fn default() -> Self {
        AbscissaSearch { window: None, edge_samples: 64, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectCount {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub count: i64,
    pub samples_per_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbscissaDiagnostics {
    pub kind: SystemKind,
    pub mu: f64,
    pub window: (f64, f64),
    /// Every rectangle whose root count was computed, in evaluation order.
    pub rectangles: Vec<RectCount>,
    pub root_re: Option<f64>,
    pub root_im: Option<f64>,
    /// `|chi_entire|` at the refined root divided by its term scale.
    pub relative_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbscissaEstimate {
    pub abscissa: f64,
    pub root: C64,
    pub diagnostics: AbscissaDiagnostics,
}

/// Lower imaginary edge of the search boxes, slightly below the real axis so
/// real roots are interior. Conjugate symmetry makes the lower half redundant.
const IM_FLOOR: f64 = -0.37;
const MAX_EDGE_SAMPLES: usize = 1 << 20;
/// Keeps `e^{-s tau}` finite on the left edge.
const MAX_DECAY_EXPONENT: f64 = 600.0;

#[derive(Debug, Clone, Copy)]
struct Rect {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

struct Cell(Rect, i64);

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.re_max.total_cmp(&o.0.re_max)
    }
}

struct Searcher<'a> {
    p: &'a ModelParams,
    mu: f64,
    base_samples: usize,
    log: Vec<RectCount>,
}

impl Searcher<'_> {
    fn chi(&self, s: C64) -> C64 {
        characteristic_entire(self.p, self.mu, s).0
    }

    /// Winding number of `chi_entire` around the rectangle. Each edge starts
    /// from `n` uniform samples and segments turning by more than 0.5 rad are
    /// bisected, so roots close to the boundary are resolved locally; the count
    /// is accepted once `n` and `2n` starting samples agree.
    fn count(&mut self, r: Rect) -> Result<i64> {
        let mut n = self.base_samples.max(8);
        loop {
            let first = self.winding(r, n);
            let second = self.winding(r, 2 * n);
            match (first, second) {
                (Some(a), Some(b)) if a == b => {
                    self.log.push(RectCount {
                        re_min: r.re_min,
                        re_max: r.re_max,
                        im_min: r.im_min,
                        im_max: r.im_max,
                        count: a,
                        samples_per_edge: n,
                    });
                    return Ok(a);
                }
                (None, _) | (_, None) => {
                    // a root sits on the boundary; enlarge the box slightly
                    let eps = 1e-9 * (r.re_max - r.re_min).abs().max(1.0);
                    let nudged = Rect {
                        re_min: r.re_min - eps,
                        re_max: r.re_max + eps,
                        im_min: r.im_min - eps,
                        im_max: r.im_max + eps,
                    };
                    return self.count(nudged);
                }
                _ => {}
            }
            n *= 2;
            if n > MAX_EDGE_SAMPLES {
                return Err(Error::RootNotFound(format!(
                    "argument of chi did not resolve on [{}, {}] x [{}, {}]",
                    r.re_min, r.re_max, r.im_min, r.im_max
                )));
            }
        }
    }

    /// `None` when the function vanishes (numerically) on the boundary.
    fn winding(&self, r: Rect, n: usize) -> Option<i64> {
        let corners = [
            C64::new(r.re_min, r.im_min),
            C64::new(r.re_max, r.im_min),
            C64::new(r.re_max, r.im_max),
            C64::new(r.re_min, r.im_max),
        ];
        let mut total = 0.0;
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let mut prev_s = a;
            let mut prev = self.finite_chi(a)?;
            for j in 1..=n {
                let s = a + (b - a) * (j as f64 / n as f64);
                let cur = self.finite_chi(s)?;
                total += self.segment_turn(prev_s, s, prev, cur, 0)?;
                prev_s = s;
                prev = cur;
            }
        }
        Some((total / (2.0 * std::f64::consts::PI)).round() as i64)
    }

    fn finite_chi(&self, s: C64) -> Option<C64> {
        let v = self.chi(s);
        (v.norm() > 0.0 && v.is_finite()).then_some(v)
    }

    fn segment_turn(&self, a: C64, b: C64, fa: C64, fb: C64, depth: u32) -> Option<f64> {
        let step = (fb / fa).arg();
        if step.abs() <= 0.5 || depth >= 60 {
            return Some(step);
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            return Some(step);
        }
        let fm = self.finite_chi(m)?;
        Some(self.segment_turn(a, m, fa, fm, depth + 1)? + self.segment_turn(m, b, fm, fb, depth + 1)?)
    }

    fn newton(&self, mut s: C64, tol: f64) -> Option<C64> {
        for _ in 0..100 {
            let (v, dv) = characteristic_entire(self.p, self.mu, s);
            if dv.norm() == 0.0 || !v.is_finite() {
                return None;
            }
            let step = v / dv;
            s -= step;
            if step.norm() <= tol * s.norm().max(1.0) {
                return Some(s);
            }
        }
        None
    }
}

fn contains(r: &Rect, s: C64, slack: f64) -> bool {
    s.re >= r.re_min - slack && s.re <= r.re_max + slack && s.im >= r.im_min - slack && s.im <= r.im_max + slack
}

/// Largest real part among the roots of the characteristic function of mode `mu`.
///
/// Strips of geometrically growing width are scanned from the right edge of
/// the window leftwards; the first strip containing roots is bisected, always
/// splitting the cell with the largest right edge, and isolated roots are
/// polished by Newton's method. The returned root satisfies
/// `|chi_entire| <= 1e-8` relative to the size of its terms.
pub fn spectral_abscissa_estimate(
    params: &ModelParams,
    mu: f64,
    search: &AbscissaSearch,
) -> Result<AbscissaEstimate> {
    params.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Validation(format!("mu = {mu} must be positive")));
    }
    let tau = if params.kind.has_delay() { params.tau } else { 1.0 };
    let (mut re_min, re_max) = search.window.unwrap_or_else(|| {
        let a = if params.kind.has_delay() { params.a } else { 1.0 };
        (-(a * mu + 1.0), modulus_bound(params, mu, 0.0) + 1.0)
    });
    if params.kind.has_delay() {
        re_min = re_min.max(-MAX_DECAY_EXPONENT / tau);
    }
    if !(re_min < re_max) {
        return Err(Error::Validation(format!("empty search window [{re_min}, {re_max}]")));
    }
    let mut searcher = Searcher { p: params, mu, base_samples: search.edge_samples, log: Vec::new() };
    let diag = |searcher: Searcher, root: Option<(C64, f64)>| AbscissaDiagnostics {
        kind: params.kind,
        mu,
        window: (re_min, re_max),
        rectangles: searcher.log,
        root_re: root.map(|r| r.0.re),
        root_im: root.map(|r| r.0.im),
        relative_residual: root.map(|r| r.1),
    };

    // scan strips right to left until one holds a root
    let width0 = 1.0 / tau;
    let mut right = re_max;
    let mut width = width0;
    let strip = loop {
        // the right half plane is one box; to the left, widths double
        let left = if right > 0.0 { re_min.max(0.0) } else { (right - width).max(re_min) };
        let im_max = modulus_bound(params, mu, left) + 1.0;
        let r = Rect { re_min: left, re_max: right, im_min: IM_FLOOR, im_max };
        let k = searcher.count(r)?;
        if k > 0 {
            break Some((r, k));
        }
        if left <= re_min {
            break None;
        }
        if right <= 0.0 {
            width *= 2.0;
        }
        right = left;
    };
    let Some((strip, count)) = strip else {
        let d = diag(searcher, None);
        return Err(Error::RootNotFound(format!(
            "no root with real part in [{re_min}, {re_max}]; {} rectangles scanned: {}",
            d.rectangles.len(),
            serde_json::to_string(&d).unwrap_or_default()
        )));
    };

    let tol = search.tolerance.max(1e-15);
    let mut heap = BinaryHeap::new();
    heap.push(Cell(strip, count));
    let mut best: Option<C64> = None;
    while let Some(Cell(r, k)) = heap.pop() {
        if let Some(b) = best {
            if r.re_max <= b.re {
                break;
            }
        }
        let (w, h) = (r.re_max - r.re_min, r.im_max - r.im_min);
        let size = w.max(h);
        let center = C64::new(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
        let scale = center.norm().max(1.0);
        if k == 1 || size <= 1e-6 * scale {
            if let Some(root) = searcher.newton(center, tol) {
                if contains(&r, root, 1e-9 * scale) {
                    if best.is_none_or(|b| root.re > b.re) {
                        best = Some(root);
                    }
                    continue;
                }
            }
            if size <= 1e-6 * scale {
                // cluster too tight to separate; the center is as good as it gets
                if best.is_none_or(|b| center.re > b.re) {
                    best = Some(center);
                }
                continue;
            }
        }
        let halves = if w / scale.max(1.0) >= h / scale.max(1.0) {
            let m = 0.5 * (r.re_min + r.re_max);
            [Rect { re_max: m, ..r }, Rect { re_min: m, ..r }]
        } else {
            let m = 0.5 * (r.im_min + r.im_max);
            [Rect { im_max: m, ..r }, Rect { im_min: m, ..r }]
        };
        let first = searcher.count(halves[0])?;
        // the two counts add up to k unless a root sits on the cut
        let second = if first <= k { k - first } else { searcher.count(halves[1])? };
        for (half, c) in halves.into_iter().zip([first, second]) {
            if c > 0 {
                heap.push(Cell(half, c));
            }
        }
    }
    let root = best.ok_or_else(|| Error::RootNotFound("bisection lost the root".into()))?;
    let (v, _) = characteristic_entire(params, mu, root);
    let rel = v.norm() / entire_scale(params, mu, root);
    Ok(AbscissaEstimate {
        abscissa: root.re,
        root,
        diagnostics: diag(searcher, Some((root, rel))),
    })
}
