//! Command-line frontend: argument parsing, dispatch and artifact writing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::warn;
use serde::Serialize;

use crate::characteristic::{spectral_abscissa_estimate, AbscissaDiagnostics, AbscissaSearch};
use crate::config::{Command, HistoryKind, RunConfig};
use crate::dynamics::{fit_decay, simulate, write_trajectory_csv, DecayFit, History, ModeInitial, SimulationConfig};
use crate::error::{Error, Result};
use crate::io::{create, write_json};
use crate::models::list_presets;
use crate::params::{xi_admissible, ModelParams, SystemKind};
use crate::plot::{line_chart, region_map, Axes, Series};
use crate::region::{classify_region, region_table, write_region_csv, RegionLabel};
use crate::resolvent::{resolvent_scan, write_scan_csv};
use crate::spectrum::make_spectrum;
use crate::witness::{string_witness_sweep, summarize, witness_sweep_with, write_witness_csv, WitnessSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Name of the configuration echo written next to the artifacts.
pub const ECHO_FILE: &str = "run.cfg";

#[derive(Debug, Parser)]
#[command(name = "thermosemi", version, about = "Resolvent, spectral and energy analysis of delayed thermoelastic alpha-beta systems")]
pub struct Cli {
    /// Configuration file (sectioned key = value); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Classify a uniform grid of the (beta, alpha) square.
    Region {
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Witness sweep bounding the resolvent from below along the imaginary axis.
    Witness {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated mode indices.
        #[arg(long)]
        indices: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Lower bounds on the resolvent norm over a list of frequencies.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated frequencies.
        #[arg(long)]
        lambdas: Option<String>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Integrate a truncated modal system and fit its energy decay.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        steps_per_delay: Option<usize>,
        #[arg(long)]
        record_every: Option<usize>,
        /// zero or constant
        #[arg(long)]
        history: Option<String>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        init_decay: Option<f64>,
        /// exponential or polynomial
        #[arg(long)]
        fit: Option<String>,
        /// lo,hi
        #[arg(long)]
        fit_window: Option<String>,
        #[arg(long)]
        transport_check: bool,
    },
    /// Rightmost characteristic root per mode.
    Abscissa {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated eigenvalues mu.
        #[arg(long)]
        mu: Option<String>,
        /// Real-part window lo,hi.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        edge_samples: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Region label, admissibility, witness summary and abscissae in one JSON file.
    Report {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// List the built-in presets in configuration format.
    Presets {
        name: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// plate-1d, string, beam or abstract-power.
    #[arg(long)]
    pub preset: Option<String>,
    /// Interval length for the presets (default pi).
    #[arg(long)]
    pub length: Option<f64>,
    /// delay-hyperbolic, delay-parabolic, no-delay or delayed-damping-string.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    /// string, plate[:L], beam[:L], power:c:s or list:m1,m2,...
    #[arg(long)]
    pub spectrum: Option<String>,
}

fn fstr(x: f64) -> String {
    format!("{x:?}")
}

impl ModelArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(l) = self.length {
            out.push(("length", fstr(l)));
        }
        if let Some(p) = &self.preset {
            out.push(("preset", p.clone()));
        }
        if let Some(k) = &self.kind {
            out.push(("kind", k.clone()));
        }
        for (k, v) in [
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("a", self.a),
            ("kappa", self.kappa),
            ("tau", self.tau),
            ("xi", self.xi),
        ] {
            if let Some(v) = v {
                out.push((k, fstr(v)));
            }
        }
        if let Some(s) = &self.spectrum {
            out.push(("spectrum", s.clone()));
        }
        out
    }
}

/// `(section, key, value)` overrides collected from flags.
type Overrides<'a> = Vec<(&'a str, &'a str, String)>;

impl Cli {
    /// Resolves defaults, configuration file and flags into a [`RunConfig`].
    pub fn resolve(&self) -> Result<Option<RunConfig>> {
        let (command, model, mut sets): (Command, Option<&ModelArgs>, Overrides) = match &self.command {
            Sub::Presets { .. } => return Ok(None),
            Sub::Region { grid } => (Command::Region, None, grid.iter().map(|g| ("region", "grid", g.to_string())).collect()),
            Sub::Witness { model, indices, delta } => {
                let mut s = Vec::new();
                if let Some(i) = indices {
                    s.push(("witness", "indices", i.clone()));
                }
                if let Some(d) = delta {
                    s.push(("witness", "delta", fstr(*d)));
                }
                (Command::Witness, Some(model), s)
            }
            Sub::Scan { model, lambdas, k_max, n_max } => {
                let mut s = Vec::new();
                if let Some(l) = lambdas {
                    s.push(("scan", "lambdas", l.clone()));
                }
                if let Some(k) = k_max {
                    s.push(("scan", "k_max", k.to_string()));
                }
                if let Some(n) = n_max {
                    s.push(("scan", "n_max", n.to_string()));
                }
                (Command::Scan, Some(model), s)
            }
            Sub::Simulate {
                model,
                modes,
                horizon,
                steps_per_delay,
                record_every,
                history,
                amplitude,
                init_decay,
                fit,
                fit_window,
                transport_check,
            } => {
                let mut s = Vec::new();
                let mut push = |k: &'static str, v: Option<String>| {
                    if let Some(v) = v {
                        s.push(("simulate", k, v));
                    }
                };
                push("modes", modes.map(|x| x.to_string()));
                push("horizon", horizon.map(fstr));
                push("steps_per_delay", steps_per_delay.map(|x| x.to_string()));
                push("record_every", record_every.map(|x| x.to_string()));
                push("history", history.clone());
                push("amplitude", amplitude.map(fstr));
                push("init_decay", init_decay.map(fstr));
                push("fit", fit.clone());
                push("fit_window", fit_window.clone());
                push("transport_check", transport_check.then(|| "true".to_string()));
                (Command::Simulate, Some(model), s)
            }
            Sub::Abscissa { model, mu, window, edge_samples, tolerance } => {
                let mut s = Vec::new();
                if let Some(m) = mu {
                    s.push(("abscissa", "mu", m.clone()));
                }
                if let Some(w) = window {
                    s.push(("abscissa", "window", w.clone()));
                }
                if let Some(e) = edge_samples {
                    s.push(("abscissa", "edge_samples", e.to_string()));
                }
                if let Some(t) = tolerance {
                    s.push(("abscissa", "tolerance", fstr(*t)));
                }
                (Command::Abscissa, Some(model), s)
            }
            Sub::Report { model } => (Command::Report, Some(model), Vec::new()),
        };
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_config_str(&text, Some(command))?
            }
            None => RunConfig::defaults(command),
        };
        if let Some(m) = model {
            for (k, v) in m.overrides() {
                cfg.set("model", k, &v)?;
            }
        }
        if let Some(out) = &self.out {
            sets.push(("output", "dir", out.display().to_string()));
        }
        if self.plot {
            sets.push(("output", "plot", "true".into()));
        }
        for (sec, key, value) in sets {
            cfg.set(sec, key, &value)?;
        }
        Ok(Some(cfg))
    }
}

/// Caps the rayon pool from `THERMOSEMI_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("THERMOSEMI_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Validation(format!("THERMOSEMI_THREADS = '{v}' must be a positive integer")))?;
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    configure_threads()?;
    if let Sub::Presets { name } = &cli.command {
        return print_presets(name.as_deref(), stdout);
    }
    let cfg = cli.resolve()?.expect("non-preset command");
    if cli.print_config {
        stdout.write_all(cfg.to_config_string().as_bytes())?;
        return Ok(());
    }
    run(&cfg, stdout)
}

fn print_presets(name: Option<&str>, stdout: &mut dyn Write) -> Result<()> {
    let presets = match name {
        Some(n) => vec![crate::models::preset(n, None)?],
        None => list_presets(),
    };
    for p in presets {
        let mut cfg = RunConfig::defaults(Command::Report);
        cfg.apply_preset(&p.name, None)?;
        writeln!(stdout, "# {}: {}", p.name, p.notes)?;
        let text = cfg.to_config_string();
        // the model section only
        let model: String = text
            .split_inclusive('\n')
            .skip_while(|l| !l.starts_with("[model]"))
            .take_while(|l| !l.starts_with("[region]"))
            .collect();
        writeln!(stdout, "{model}")?;
    }
    Ok(())
}

fn prepare_output(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::Validation(format!("output directory {} not writable: {e}", dir.display())))?;
    fs::write(dir.join(ECHO_FILE), cfg.to_config_string())?;
    Ok(dir)
}

/// Executes one resolved configuration, writing its artifacts.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    cfg.params.validate()?;
    let dir = prepare_output(cfg)?;
    match cfg.command {
        Command::Region => run_region(cfg, &dir, stdout),
        Command::Witness => run_witness(cfg, &dir, stdout),
        Command::Scan => run_scan(cfg, &dir, stdout),
        Command::Simulate => run_simulate(cfg, &dir, stdout),
        Command::Abscissa => run_abscissa(cfg, &dir, stdout),
        Command::Report => run_report(cfg, &dir, stdout),
    }
}

fn run_region(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let labels = region_table(cfg.region.grid)?;
    write_region_csv(&labels, create(&dir.join("region.csv"))?)?;
    if cfg.output.plot {
        region_map(&dir.join("region.svg"), &labels, cfg.region.grid)?;
    }
    writeln!(stdout, "region: {} points written to {}", labels.len(), dir.join("region.csv").display())?;
    Ok(())
}

fn witness_summary(cfg: &RunConfig) -> Result<(crate::witness::WitnessSweep, WitnessSummary)> {
    let p = &cfg.params;
    let sweep = if p.kind == SystemKind::DelayedDampingString {
        string_witness_sweep(&cfg.witness.indices, p.a, p.tau)?
    } else {
        let spectrum = make_spectrum(cfg.spectrum.clone())?;
        witness_sweep_with(p, &spectrum, &cfg.witness.indices, cfg.witness.delta)?
    };
    let summary = summarize(&sweep);
    Ok((sweep, summary))
}

fn run_witness(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let (sweep, summary) = witness_summary(cfg)?;
    write_witness_csv(&sweep.rows, create(&dir.join("witness.csv"))?)?;
    write_json(&dir.join("witness.json"), &summary)?;
    if cfg.output.plot {
        let pts = sweep.rows.iter().map(|r| (r.n as f64, r.ratio)).collect();
        line_chart(
            &dir.join("witness.svg"),
            "witness ratio ||U|| / ||F||",
            "n",
            "ratio",
            Axes { log_x: true, log_y: false },
            &[Series { name: "ratio", points: pts }],
        )?;
    }
    writeln!(
        stdout,
        "witness: limit_estimate = {:.8} certified = {} ({})",
        summary.limit_estimate, summary.certified, summary.case_tag
    )?;
    Ok(())
}

fn run_scan(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let spectrum = make_spectrum(cfg.spectrum.clone())?;
    let rows = resolvent_scan(&cfg.params, &spectrum, &cfg.scan.lambdas, cfg.scan.k_max, cfg.scan.n_max)?;
    write_scan_csv(&rows, create(&dir.join("scan.csv"))?)?;
    if cfg.output.plot {
        let pts = rows.iter().filter(|r| r.sup_lb > 0.0).map(|r| (r.lambda, r.sup_lb)).collect();
        line_chart(
            &dir.join("scan.svg"),
            "resolvent norm lower bound",
            "lambda",
            "sup_lb",
            Axes { log_x: true, log_y: true },
            &[Series { name: "sup_lb", points: pts }],
        )?;
    }
    for r in &rows {
        writeln!(stdout, "scan: lambda = {:e} sup_lb = {:e} argmax_n = {:?}", r.lambda, r.sup_lb, r.argmax_n)?;
    }
    Ok(())
}

/// Polynomial decay statement attached to thermal-delay runs.
fn truncation_note(p: &ModelParams) -> Option<String> {
    (p.kind == SystemKind::DelayParabolic && p.alpha > 2.0 * p.beta).then(|| {
        format!(
            "the infinite system decays polynomially with order 1/(2(alpha - 2 beta)) = {:.6}; \
             a truncated system is exponentially stable, so the fitted value does not reproduce that order",
            1.0 / (2.0 * (p.alpha - 2.0 * p.beta))
        )
    })
}

/// The JSON written by `simulate`: the decay fit plus run metadata.
#[derive(Debug, Clone, Serialize)]
struct SimulationReport {
    #[serde(flatten)]
    fit: DecayFit,
    n_modes: usize,
    steps_per_delay: usize,
    initial_energy: f64,
    final_energy: f64,
    stability_hypotheses_met: bool,
    stability_note: Option<String>,
    transport_check: Option<f64>,
    truncation_note: Option<String>,
    warnings: Vec<String>,
}

fn run_simulate(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let s = &cfg.simulate;
    let spectrum = make_spectrum(cfg.spectrum.clone())?;
    let initial = (1..=s.modes)
        .map(|n| ModeInitial { u0: s.amplitude * (n as f64).powf(-s.init_decay), u1: 0.0, theta0: 0.0 })
        .collect();
    let mut sc = SimulationConfig::new(initial, s.horizon);
    sc.history = match s.history {
        HistoryKind::Zero => History::Zero,
        HistoryKind::Constant => History::Constant,
    };
    sc.steps_per_delay = s.steps_per_delay;
    sc.record_every = s.record_every;
    sc.transport_check = s.transport_check;
    let traj = simulate(&cfg.params, &spectrum, &sc)?;
    write_trajectory_csv(&traj, create(&dir.join("trajectory.csv"))?)?;
    if cfg.output.plot {
        let pts = traj.times.iter().zip(&traj.total_energy).filter(|(_, e)| **e > 0.0).map(|(t, e)| (*t, *e)).collect();
        line_chart(
            &dir.join("energy.svg"),
            "total energy",
            "t",
            "E",
            Axes { log_x: false, log_y: true },
            &[Series { name: "E_total", points: pts }],
        )?;
    }
    let window = s.fit_window.unwrap_or((s.horizon / 2.0, s.horizon));
    let fit = fit_decay(&traj, window, s.fit)?;
    let hyp = cfg.params.stability_hypotheses();
    if let Err(reason) = &hyp {
        warn!("stability hypotheses not met ({reason}); the fit is reported without a stability claim");
    }
    let report = SimulationReport {
        fit,
        n_modes: traj.n_modes,
        steps_per_delay: traj.steps_per_delay,
        initial_energy: traj.total_energy[0],
        final_energy: *traj.total_energy.last().unwrap(),
        stability_hypotheses_met: hyp.is_ok(),
        stability_note: hyp.err(),
        transport_check: traj.transport_check,
        truncation_note: truncation_note(&cfg.params),
        warnings: traj.warnings.clone(),
    };
    write_json(&dir.join("fit.json"), &report)?;
    writeln!(stdout, "simulate: {:?} fit_quality = {:?}", report.fit.model, report.fit.fit_quality)?;
    if !report.stability_hypotheses_met {
        writeln!(stdout, "simulate: stability hypotheses not met; no stability is asserted")?;
    }
    if let Some(note) = &report.truncation_note {
        writeln!(stdout, "simulate: {note}")?;
    }
    Ok(())
}

fn abscissa_search(cfg: &RunConfig) -> AbscissaSearch {
    AbscissaSearch { window: cfg.abscissa.window, edge_samples: cfg.abscissa.edge_samples, tolerance: cfg.abscissa.tolerance }
}

#[derive(Debug, Clone, Serialize)]
struct AbscissaRecord {
    mu: f64,
    abscissa: f64,
    root_re: f64,
    root_im: f64,
    diagnostics: AbscissaDiagnostics,
}

fn run_abscissa(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let search = abscissa_search(cfg);
    let mut records = Vec::new();
    for &mu in &cfg.abscissa.mu {
        let e = spectral_abscissa_estimate(&cfg.params, mu, &search)?;
        writeln!(stdout, "abscissa: mu = {mu:e} -> {:.12e}", e.abscissa)?;
        records.push(AbscissaRecord { mu, abscissa: e.abscissa, root_re: e.root.re, root_im: e.root.im, diagnostics: e.diagnostics });
    }
    write_json(&dir.join("abscissa.json"), &records)?;
    if cfg.output.plot {
        let pts = records.iter().map(|r| (r.mu, r.abscissa)).collect();
        line_chart(
            &dir.join("abscissa.svg"),
            "spectral abscissa per mode",
            "mu",
            "max Re s",
            Axes { log_x: true, log_y: false },
            &[Series { name: "abscissa", points: pts }],
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct ReportAbscissa {
    mu: f64,
    abscissa: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct Report {
    preset: Option<String>,
    params: ModelParams,
    spectrum: String,
    region: RegionLabel,
    xi_admissible: std::result::Result<String, String>,
    stability_hypotheses_met: bool,
    stability_note: Option<String>,
    witness: std::result::Result<WitnessSummary, String>,
    abscissae: Vec<ReportAbscissa>,
    truncation_note: Option<String>,
}

fn run_report(cfg: &RunConfig, dir: &Path, stdout: &mut dyn Write) -> Result<()> {
    let p = &cfg.params;
    let region = classify_region(p.beta, p.alpha)?;
    let hyp = p.stability_hypotheses();
    let witness = witness_summary(cfg).map(|(_, s)| s).map_err(|e| e.to_string());
    let search = abscissa_search(cfg);
    let abscissae = cfg
        .abscissa
        .mu
        .iter()
        .map(|&mu| match spectral_abscissa_estimate(p, mu, &search) {
            Ok(e) => ReportAbscissa { mu, abscissa: Some(e.abscissa), error: None },
            Err(e) => ReportAbscissa { mu, abscissa: None, error: Some(e.to_string()) },
        })
        .collect();
    let report = Report {
        preset: cfg.preset.clone(),
        params: *p,
        spectrum: cfg.spectrum.to_string(),
        region,
        xi_admissible: xi_admissible(p).map(|i| i.to_string()).map_err(|e| e.to_string()),
        stability_hypotheses_met: hyp.is_ok(),
        stability_note: hyp.err(),
        witness,
        abscissae,
        truncation_note: truncation_note(p),
    };
    write_json(&dir.join("report.json"), &report)?;
    writeln!(
        stdout,
        "report: ({}, {}) in {} / {}, in_q = {}",
        p.beta, p.alpha, report.region.s_class, report.region.r_class, report.region.in_q
    )?;
    match &report.witness {
        Ok(w) => writeln!(stdout, "report: witness limit_estimate = {:.8} certified = {}", w.limit_estimate, w.certified)?,
        Err(e) => writeln!(stdout, "report: witness unavailable: {e}")?,
    }
    Ok(())
}
