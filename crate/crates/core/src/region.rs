//! Classification of the `(beta, alpha)` unit square.
//!
//! Coordinates are always passed in the order `(beta, alpha)`. Two
//! partitions are computed for every point: the stability partition
//! `S, S1, S2, S3` and the regularity partition `R1..R5, SI`. The stability
//! sets are disjoint in exact arithmetic and cover the square; the
//! classification below evaluates every inequality on the same rounded
//! quantities (`2 beta - 1`, `2 beta`) so that property survives rounding.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{in_region_q, Q_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SClass {
    S,
    S1,
    S2,
    S3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RClass {
    R1,
    R2,
    R3,
    R4,
    R5,
    SI,
    /// Belongs to none of the regularity sets (their common seams and the
    /// parts of the square outside `S` that the regularity table does not
    /// split further).
    BoundaryOther,
}

impl fmt::Display for SClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for RClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Labels of one point of the square together with the known regularity and
/// stability of the undelayed system there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub beta: f64,
    pub alpha: f64,
    pub s_class: SClass,
    pub r_class: RClass,
    pub in_q: bool,
    pub expected_regularity: &'static str,
    pub expected_stability: &'static str,
}

const EXP_STABLE: &str = "exponentially stable";
const NOT_ASYMPTOTIC: &str = "not asymptotically stable";
const NOT_DIFF: &str = "not differentiable";

fn table_row(s: SClass, r: RClass) -> (&'static str, &'static str) {
    match r {
        RClass::R1 => ("analytic", EXP_STABLE),
        RClass::R2 => ("Gevrey class δ>1/(2(2β−α))", EXP_STABLE),
        RClass::R3 => ("Gevrey class δ>1/(2(2β+α)−2)", EXP_STABLE),
        RClass::R4 => ("Gevrey class δ>β/α", EXP_STABLE),
        RClass::R5 => ("Gevrey class δ>β/α", NOT_ASYMPTOTIC),
        RClass::SI => (NOT_DIFF, NOT_ASYMPTOTIC),
        RClass::BoundaryOther => match s {
            // closure of S1 u S2 intersected with S
            SClass::S => (NOT_DIFF, EXP_STABLE),
            SClass::S1 => (NOT_DIFF, "polynomially stable of order 1/(2(α−2β))"),
            SClass::S2 => (NOT_DIFF, "polynomially stable of order 1/(2−2(2β+α))"),
            SClass::S3 => ("not tabulated", "not tabulated"),
        },
    }
}

// Grid coordinates such as 0.29 are not exact binary fractions, so points on
// a boundary line can miss it by an ulp. Comparisons absorb that rounding.
fn le(x: f64, y: f64) -> bool {
    x <= y + Q_TOL
}

fn lt(x: f64, y: f64) -> bool {
    x < y - Q_TOL
}

fn s_class(beta: f64, alpha: f64) -> SClass {
    let d = 2.0 * beta - 1.0;
    let y = 2.0 * beta;
    if le(d.abs(), alpha) && le(alpha, y) {
        SClass::S
    } else if lt(y, alpha) {
        if lt(0.5, alpha) {
            SClass::S1
        } else {
            SClass::S2
        }
    } else if d >= 0.0 {
        SClass::S3
    } else {
        SClass::S2
    }
}

fn r_class(beta: f64, alpha: f64) -> RClass {
    let d = 2.0 * beta - 1.0;
    let y = 2.0 * beta;
    let centre = (beta - 0.5).abs() <= Q_TOL && (alpha - 0.5).abs() <= Q_TOL;
    if le(beta, 0.0) && lt(0.5, alpha) {
        RClass::SI
    } else if le(beta, alpha) && le(alpha, y - 0.5) {
        RClass::R1
    } else if lt(y - 0.5, alpha) && lt(0.5, alpha) && lt(alpha, y) {
        RClass::R2
    } else if le(0.0, -d) && lt(-d, alpha) && le(alpha, 0.5) && !centre {
        RClass::R3
    } else if lt(0.0, d) && le(d, alpha) && lt(alpha, beta) {
        RClass::R4
    } else if lt(0.0, alpha) && lt(alpha, d) {
        RClass::R5
    } else {
        RClass::BoundaryOther
    }
}

/// Labels the point `(beta, alpha)` of the unit square.
pub fn classify_region(beta: f64, alpha: f64) -> Result<RegionLabel> {
    let unit = 0.0..=1.0;
    if !(unit.contains(&beta) && unit.contains(&alpha)) {
        return Err(Error::Domain(format!(
            "(beta, alpha) = ({beta}, {alpha}) outside [0,1]^2"
        )));
    }
    let s = s_class(beta, alpha);
    let r = r_class(beta, alpha);
    let (regularity, stability) = table_row(s, r);
    Ok(RegionLabel {
        beta,
        alpha,
        s_class: s,
        r_class: r,
        in_q: in_region_q(beta, alpha),
        expected_regularity: regularity,
        expected_stability: stability,
    })
}

/// Labels of a `grid x grid` uniform lattice over the square, beta-major.
pub fn region_table(grid: usize) -> Result<Vec<RegionLabel>> {
    if grid < 2 {
        return Err(Error::Validation(format!("grid = {grid} must be at least 2")));
    }
    let step = 1.0 / (grid - 1) as f64;
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let beta = if i + 1 == grid { 1.0 } else { i as f64 * step };
        for j in 0..grid {
            let alpha = if j + 1 == grid { 1.0 } else { j as f64 * step };
            out.push(classify_region(beta, alpha)?);
        }
    }
    Ok(out)
}

pub fn write_region_csv<W: Write>(labels: &[RegionLabel], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "beta",
        "alpha",
        "s_class",
        "r_class",
        "in_q",
        "expected_regularity",
        "expected_stability",
    ])?;
    for l in labels {
        w.write_record([
            crate::io::fmt_f64(l.beta),
            crate::io::fmt_f64(l.alpha),
            l.s_class.to_string(),
            l.r_class.to_string(),
            l.in_q.to_string(),
            l.expected_regularity.to_string(),
            l.expected_stability.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
