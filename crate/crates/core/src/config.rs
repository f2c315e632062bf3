//! Run configuration: defaults, the sectioned `key = value` file format and
//! its echo.
//!
//! ```text
//! # comment
//! [run]
//! command = witness
//! [model]
//! preset = plate-1d
//! beta = 0.5
//! [witness]
//! indices = 16,64,256,1024
//! [output]
//! dir = out
//! plot = true
//! ```
//!
//! Values are resolved in the order defaults, preset, file, command-line
//! flags. The echo written by [`RunConfig::to_config_string`] lists every
//! resolved value and parses back to an equal configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::DecayKind;
use crate::error::{Error, Result};
use crate::models::preset;
use crate::params::{ModelParams, SystemKind};
use crate::spectrum::SpectrumSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Region,
    Witness,
    Scan,
    Simulate,
    Abscissa,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Region => "region",
            Command::Witness => "witness",
            Command::Scan => "scan",
            Command::Simulate => "simulate",
            Command::Abscissa => "abscissa",
            Command::Report => "report",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "region" => Ok(Command::Region),
            "witness" => Ok(Command::Witness),
            "scan" => Ok(Command::Scan),
            "simulate" => Ok(Command::Simulate),
            "abscissa" => Ok(Command::Abscissa),
            "report" => Ok(Command::Report),
            other => Err(Error::Config(format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryKind {
    Zero,
    Constant,
}

impl FromStr for HistoryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(HistoryKind::Zero),
            "constant" => Ok(HistoryKind::Constant),
            other => Err(Error::Config(format!("unknown history '{other}' (zero or constant)"))),
        }
    }
}

impl fmt::Display for HistoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HistoryKind::Zero => "zero",
            HistoryKind::Constant => "constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionOptions {
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOptions {
    pub indices: Vec<usize>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub lambdas: Vec<f64>,
    pub k_max: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOptions {
    pub modes: usize,
    pub horizon: f64,
    pub steps_per_delay: usize,
    pub record_every: usize,
    pub history: HistoryKind,
    /// Initial displacement `u0_n = amplitude n^{-init_decay}`; `u1 = theta0 = 0`.
    pub amplitude: f64,
    pub init_decay: f64,
    pub fit: DecayKind,
    /// Defaults to the second half of the horizon.
    pub fit_window: Option<(f64, f64)>,
    pub transport_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbscissaOptions {
    pub mu: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub edge_samples: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub plot: bool,
}

/// Fully resolved configuration of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<String>,
    pub length: Option<f64>,
    pub params: ModelParams,
    pub spectrum: SpectrumSpec,
    pub region: RegionOptions,
    pub witness: WitnessOptions,
    pub scan: ScanOptions,
    pub simulate: SimulateOptions,
    pub abscissa: AbscissaOptions,
    pub output: OutputOptions,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            preset: None,
            length: None,
            params: ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5),
            spectrum: SpectrumSpec::String,
            region: RegionOptions { grid: 101 },
            witness: WitnessOptions { indices: (4..=12).map(|k| 1usize << k).collect(), delta: None },
            scan: ScanOptions { lambdas: vec![1e2, 1e3, 1e4], k_max: 2, n_max: 1000 },
            simulate: SimulateOptions {
                modes: 32,
                horizon: 40.0,
                steps_per_delay: 64,
                record_every: 1,
                history: HistoryKind::Constant,
                amplitude: 1.0,
                init_decay: 2.0,
                fit: DecayKind::Exponential,
                fit_window: None,
                transport_check: false,
            },
            abscissa: AbscissaOptions { mu: vec![1e1, 1e2, 1e3, 1e4], window: None, edge_samples: 64, tolerance: 1e-10 },
            output: OutputOptions { dir: PathBuf::from("."), plot: false },
        }
    }

    /// Replaces the model and spectrum with those of a named preset.
    pub fn apply_preset(&mut self, name: &str, length: Option<f64>) -> Result<()> {
        let p = preset(name, length)?;
        self.preset = Some(name.to_string());
        self.length = length;
        self.params = p.params;
        self.spectrum = p.spectrum.spec().clone();
        self.witness.indices = p.witness_indices;
        Ok(())
    }

    /// Sets `section.key` from its textual value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = |what: &str| Error::Config(format!("[{section}] {key} = '{v}': {what}"));
        let f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let u = |s: &str| s.trim().parse::<usize>().map_err(|_| bad("expected a nonnegative integer"));
        let b = |s: &str| match s.trim() {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(bad("expected true or false")),
        };
        let opt = |s: &str| -> Result<Option<f64>> { if s == "none" { Ok(None) } else { f(s).map(Some) } };
        let pair = |s: &str| -> Result<Option<(f64, f64)>> {
            if s == "none" {
                return Ok(None);
            }
            let (lo, hi) = s.split_once(',').ok_or_else(|| bad("expected lo,hi"))?;
            Ok(Some((f(lo)?, f(hi)?)))
        };
        let list_f = |s: &str| -> Result<Vec<f64>> { s.split(',').map(f).collect() };
        let list_u = |s: &str| -> Result<Vec<usize>> { s.split(',').map(u).collect() };
        match (section, key) {
            ("run", "command") => self.command = v.parse()?,
            ("model", "preset") => {
                if v == "none" {
                    self.preset = None;
                } else {
                    self.apply_preset(v, self.length)?;
                }
            }
            ("model", "length") => self.length = opt(v)?,
            ("model", "kind") => self.params.kind = v.parse().map_err(|_| bad("unknown system kind"))?,
            ("model", "beta") => self.params.beta = f(v)?,
            ("model", "alpha") => self.params.alpha = f(v)?,
            ("model", "a") => self.params.a = f(v)?,
            ("model", "kappa") => self.params.kappa = f(v)?,
            ("model", "tau") => self.params.tau = f(v)?,
            ("model", "xi") => self.params.xi = f(v)?,
            ("model", "spectrum") => self.spectrum = v.parse().map_err(|e: Error| bad(&e.to_string()))?,
            ("region", "grid") => self.region.grid = u(v)?,
            ("witness", "indices") => self.witness.indices = list_u(v)?,
            ("witness", "delta") => self.witness.delta = opt(v)?,
            ("scan", "lambdas") => self.scan.lambdas = list_f(v)?,
            ("scan", "k_max") => self.scan.k_max = u(v)?,
            ("scan", "n_max") => self.scan.n_max = u(v)?,
            ("simulate", "modes") => self.simulate.modes = u(v)?,
            ("simulate", "horizon") => self.simulate.horizon = f(v)?,
            ("simulate", "steps_per_delay") => self.simulate.steps_per_delay = u(v)?,
            ("simulate", "record_every") => self.simulate.record_every = u(v)?,
            ("simulate", "history") => self.simulate.history = v.parse()?,
            ("simulate", "amplitude") => self.simulate.amplitude = f(v)?,
            ("simulate", "init_decay") => self.simulate.init_decay = f(v)?,
            ("simulate", "fit") => {
                self.simulate.fit = match v {
                    "exponential" => DecayKind::Exponential,
                    "polynomial" => DecayKind::Polynomial,
                    _ => return Err(bad("expected exponential or polynomial")),
                }
            }
            ("simulate", "fit_window") => self.simulate.fit_window = pair(v)?,
            ("simulate", "transport_check") => self.simulate.transport_check = b(v)?,
            ("abscissa", "mu") => self.abscissa.mu = list_f(v)?,
            ("abscissa", "window") => self.abscissa.window = pair(v)?,
            ("abscissa", "edge_samples") => self.abscissa.edge_samples = u(v)?,
            ("abscissa", "tolerance") => self.abscissa.tolerance = f(v)?,
            ("output", "dir") => self.output.dir = PathBuf::from(v),
            ("output", "plot") => self.output.plot = b(v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}' in section [{section}]"))),
        }
        Ok(())
    }

    /// Applies every entry of a parsed file; the preset (if any) goes first.
    pub fn apply_entries(&mut self, entries: &ConfigEntries) -> Result<()> {
        let length = entries.get("model", "length");
        if let Some(l) = length {
            self.set("model", "length", l)?;
        }
        if let Some(p) = entries.get("model", "preset") {
            self.set("model", "preset", p)?;
        }
        for ((section, key), value) in &entries.values {
            if section == "model" && (key == "preset" || key == "length") {
                continue;
            }
            self.set(section, key, value)?;
        }
        Ok(())
    }

    /// Parses a configuration file. `command` wins over `[run] command`.
    pub fn from_config_str(text: &str, command: Option<Command>) -> Result<Self> {
        let entries = ConfigEntries::parse(text)?;
        let cmd = match (command, entries.get("run", "command")) {
            (Some(c), _) => c,
            (None, Some(c)) => c.parse()?,
            (None, None) => return Err(Error::Config("no command given ([run] command)".into())),
        };
        let mut cfg = RunConfig::defaults(cmd);
        cfg.apply_entries(&entries)?;
        cfg.command = cmd;
        Ok(cfg)
    }

    /// The echo: every resolved value, in the file format.
    pub fn to_config_string(&self) -> String {
        let r = |x: f64| format!("{x:?}");
        let opt = |x: Option<f64>| x.map(r).unwrap_or_else(|| "none".into());
        let pair = |x: Option<(f64, f64)>| x.map(|(a, b)| format!("{},{}", r(a), r(b))).unwrap_or_else(|| "none".into());
        let join_f = |v: &[f64]| v.iter().map(|x| r(*x)).collect::<Vec<_>>().join(",");
        let join_u = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let p = &self.params;
        let s = &self.simulate;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            if !v.is_empty() {
                out.push_str(" = ");
                out.push_str(&v);
            }
            out.push('\n');
        };
        line("[run]", String::new());
        line("command", self.command.name().into());
        line("[model]", String::new());
        line("preset", self.preset.clone().unwrap_or_else(|| "none".into()));
        line("length", opt(self.length));
        line("kind", p.kind.name().into());
        line("beta", r(p.beta));
        line("alpha", r(p.alpha));
        line("a", r(p.a));
        line("kappa", r(p.kappa));
        line("tau", r(p.tau));
        line("xi", r(p.xi));
        line("spectrum", self.spectrum.to_string());
        line("[region]", String::new());
        line("grid", self.region.grid.to_string());
        line("[witness]", String::new());
        line("indices", join_u(&self.witness.indices));
        line("delta", opt(self.witness.delta));
        line("[scan]", String::new());
        line("lambdas", join_f(&self.scan.lambdas));
        line("k_max", self.scan.k_max.to_string());
        line("n_max", self.scan.n_max.to_string());
        line("[simulate]", String::new());
        line("modes", s.modes.to_string());
        line("horizon", r(s.horizon));
        line("steps_per_delay", s.steps_per_delay.to_string());
        line("record_every", s.record_every.to_string());
        line("history", s.history.to_string());
        line("amplitude", r(s.amplitude));
        line("init_decay", r(s.init_decay));
        line(
            "fit",
            match s.fit {
                DecayKind::Exponential => "exponential".into(),
                DecayKind::Polynomial => "polynomial".into(),
            },
        );
        line("fit_window", pair(s.fit_window));
        line("transport_check", s.transport_check.to_string());
        line("[abscissa]", String::new());
        line("mu", join_f(&self.abscissa.mu));
        line("window", pair(self.abscissa.window));
        line("edge_samples", self.abscissa.edge_samples.to_string());
        line("tolerance", r(self.abscissa.tolerance));
        line("[output]", String::new());
        line("dir", self.output.dir.display().to_string());
        line("plot", self.output.plot.to_string());
        out
    }
}

/// Raw `(section, key) -> value` entries of a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigEntries {
    pub values: BTreeMap<(String, String), String>,
}

impl ConfigEntries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section: Option<String> = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", no + 1)))?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            let sec = section
                .clone()
                .ok_or_else(|| Error::Config(format!("line {}: key outside any section", no + 1)))?;
            let key = (sec, k.trim().to_string());
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key [{}] {}", no + 1, key.0, key.1)));
            }
        }
        Ok(ConfigEntries { values })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::defaults(Command::Simulate);
        c.apply_preset("beam", Some(2.5)).unwrap();
        c.params.tau = 0.1 + 0.2;
        c.simulate.fit_window = Some((1.0 / 3.0, 7.0));
        c.witness.delta = Some(0.125);
        c.output.plot = true;
        let text = c.to_config_string();
        let back = RunConfig::from_config_str(&text, None).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_config_string(), text);
    }

    #[test]
    fn file_overrides_preset() {
        let text = "[run]\ncommand = witness\n[model]\nxi = 5\npreset = plate-1d\n";
        let c = RunConfig::from_config_str(text, None).unwrap();
        assert_eq!(c.params.xi, 5.0);
        assert_eq!(c.params.kind, SystemKind::DelayHyperbolic);
        assert_eq!(c.spectrum, SpectrumSpec::Plate { length: std::f64::consts::PI });
    }

    #[test]
    fn rejects_malformed() {
        for text in ["beta = 1", "[model]\nbeta 1", "[model]\nbeta = x", "[model]\nfoo = 1", "[model]\nbeta = 1\nbeta = 2"] {
            assert!(matches!(RunConfig::from_config_str(text, Some(Command::Region)), Err(Error::Config(_))), "{text}");
        }
    }
}
