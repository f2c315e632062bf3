//! Eigenvalue sequences of the abstract operator `A`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a spectrum is generated. Presets produce `mu_n` for any index on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSpec {
    Explicit(Vec<f64>),
    /// `mu_n = c n^s`
    PowerLaw { c: f64, s: f64 },
    /// Dirichlet string on `(0, pi)`: `mu_n = n^2`.
    String,
    /// Hinged plate `A = Delta^2` on `(0, L)`: `mu_n = (n pi / L)^4`.
    Plate { length: f64 },
    /// Hinged beam on `(0, L)`: `mu_n = (n pi / L)^4`.
    Beam { length: f64 },
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumSpec::Explicit(values) => {
                let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "list:{}", items.join(","))
            }
            SpectrumSpec::PowerLaw { c, s } => write!(f, "power:{c}:{s}"),
            SpectrumSpec::String => f.write_str("string"),
            SpectrumSpec::Plate { length } => write!(f, "plate:{length}"),
            SpectrumSpec::Beam { length } => write!(f, "beam:{length}"),
        }
    }
}

impl FromStr for SpectrumSpec {
    type Err = Error;

    /// Accepts `string`, `plate[:L]`, `beam[:L]`, `power:c:s` and `list:m1,m2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad number '{t}' in spectrum '{s}'")))
        };
        match (head, rest) {
            ("string", None) => Ok(SpectrumSpec::String),
            ("plate", None) => Ok(SpectrumSpec::Plate { length: PI }),
            ("plate", Some(l)) => Ok(SpectrumSpec::Plate { length: num(l)? }),
            ("beam", None) => Ok(SpectrumSpec::Beam { length: PI }),
            ("beam", Some(l)) => Ok(SpectrumSpec::Beam { length: num(l)? }),
            ("power", Some(r)) => {
                let (c, e) = r
                    .split_once(':')
                    .ok_or_else(|| Error::Validation(format!("expected power:c:s, got '{s}'")))?;
                Ok(SpectrumSpec::PowerLaw { c: num(c)?, s: num(e)? })
            }
            ("list", Some(r)) => Ok(SpectrumSpec::Explicit(
                r.split(',').map(num).collect::<Result<Vec<_>>>()?,
            )),
            _ => Err(Error::Validation(format!("unknown spectrum descriptor '{s}'"))),
        }
    }
}

/// A validated, nondecreasing sequence of positive eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    spec: SpectrumSpec,
    pub description: String,
}

impl Spectrum {
    pub fn spec(&self) -> &SpectrumSpec {
        &self.spec
    }

    /// `mu_n` for the 1-based index `n`; `None` past the end of an explicit list.
    pub fn eigenvalue(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        let x = n as f64;
        match &self.spec {
            SpectrumSpec::Explicit(v) => v.get(n - 1).copied(),
            SpectrumSpec::PowerLaw { c, s } => Some(c * x.powf(*s)),
            SpectrumSpec::String => Some(x * x),
            SpectrumSpec::Plate { length } | SpectrumSpec::Beam { length } => {
                Some((x * PI / length).powi(4))
            }
        }
    }

    /// Number of available eigenvalues; `None` for generated (unbounded) spectra.
    pub fn len(&self) -> Option<usize> {
        match &self.spec {
            SpectrumSpec::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The first `count` eigenvalues (fewer for a short explicit list).
    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (1..=count).map_while(|n| self.eigenvalue(n)).collect()
    }
}

pub fn make_spectrum(spec: SpectrumSpec) -> Result<Spectrum> {
    let description = match &spec {
        SpectrumSpec::Explicit(values) => {
            if values.is_empty() {
                return Err(Error::Validation("explicit spectrum is empty".into()));
            }
            if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::Validation(format!("eigenvalue {bad} is not positive")));
            }
            if let Some(w) = values.windows(2).find(|w| w[1] < w[0]) {
                return Err(Error::Validation(format!(
                    "eigenvalues must be nondecreasing: {} follows {}",
                    w[1], w[0]
                )));
            }
            format!("explicit list of {} eigenvalues", values.len())
        }
        SpectrumSpec::PowerLaw { c, s } => {
            if !(*c > 0.0 && *s > 0.0 && c.is_finite() && s.is_finite()) {
                return Err(Error::Validation(format!(
                    "power law needs c > 0 and s > 0, got c = {c}, s = {s}"
                )));
            }
            format!("power law mu_n = {c} n^{s}")
        }
        SpectrumSpec::String => "string on (0, pi): mu_n = n^2".to_string(),
        SpectrumSpec::Plate { length } | SpectrumSpec::Beam { length } => {
            if !(*length > 0.0 && length.is_finite()) {
                return Err(Error::Validation(format!("length {length} must be positive")));
            }
            let what = if matches!(spec, SpectrumSpec::Plate { .. }) { "hinged plate" } else { "hinged beam" };
            format!("{what} on (0, {length}): mu_n = (n pi / L)^4")
        }
    };
    Ok(Spectrum { spec, description })
}
