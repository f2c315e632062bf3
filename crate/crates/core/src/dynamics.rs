//! Time-domain simulation of the modal delay equations and decay fitting.
//!
//! Every retained mode obeys
//!
//! ```text
//! u'' + c_u u + c_ud u(t-tau) + c_v u' + c_vd u'(t-tau) - c_c theta = 0
//! theta' + c_th theta + c_thd theta(t-tau) + c_x u' = 0
//! ```
//!
//! integrated with classical RK4 on a grid aligned with the delay, delayed
//! values at half steps coming from cubic Hermite interpolation of the stored
//! states and their derivatives.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::params::{ModelParams, SystemKind};
use crate::spectrum::Spectrum;

/// Coefficients of one modal delay equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOde {
    pub c_u: f64,
    pub c_ud: f64,
    pub c_v: f64,
    pub c_vd: f64,
    pub c_c: f64,
    pub c_th: f64,
    pub c_thd: f64,
    pub c_x: f64,
}

impl ModeOde {
    pub fn for_kind(params: &ModelParams, mu: f64) -> Self {
        let mb = mu.powf(params.beta);
        let ma = mu.powf(params.alpha);
        let (a, kappa) = (params.a, params.kappa);
        let base = ModeOde { c_u: mu, c_ud: 0.0, c_v: 0.0, c_vd: 0.0, c_c: mb, c_th: ma, c_thd: 0.0, c_x: mb };
        match params.kind {
            SystemKind::DelayHyperbolic => ModeOde { c_u: 0.0, c_ud: mu, c_v: a * mu, ..base },
            SystemKind::DelayParabolic => ModeOde { c_th: a * ma, c_thd: kappa * ma, ..base },
            SystemKind::DelayedDampingString => ModeOde { c_vd: a * mu, ..base },
            SystemKind::NoDelayBaseline => base,
        }
    }

    /// Rough magnitude of the fastest time scale, used by the stiffness guard.
    pub fn rate(&self) -> f64 {
        self.c_v.abs() + self.c_vd.abs() + self.c_th.abs() + self.c_thd.abs() + (self.c_u.abs() + self.c_ud.abs()).sqrt()
    }

    /// `(u, v, theta)' ` given the current and delayed states.
    fn rhs(&self, y: [f64; 3], d: [f64; 3]) -> [f64; 3] {
        [
            y[1],
            -self.c_u * y[0] - self.c_ud * d[0] - self.c_v * y[1] - self.c_vd * d[1] + self.c_c * y[2],
            -self.c_th * y[2] - self.c_thd * d[2] - self.c_x * y[1],
        ]
    }
}

/// Initial displacement, velocity and temperature of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeInitial {
    pub u0: f64,
    pub u1: f64,
    pub theta0: f64,
}

pub type HistoryFn = Arc<dyn Fn(usize, f64) -> [f64; 3] + Send + Sync>;

/// Past states `(u, u', theta)` on `[-tau, 0)`.
#[derive(Clone, Default)]
pub enum History {
    #[default]
    Zero,
    /// The initial data held constant.
    Constant,
    /// `f(mode index (1-based), t)` for `t in [-tau, 0]`.
    Function(HistoryFn),
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            History::Zero => f.write_str("Zero"),
            History::Constant => f.write_str("Constant"),
            History::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl History {
    fn at(&self, mode: usize, init: &ModeInitial, t: f64) -> [f64; 3] {
        match self {
            History::Zero => [0.0; 3],
            History::Constant => [init.u0, init.u1, init.theta0],
            History::Function(f) => f(mode, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    /// One entry per mode; its length is the number of retained modes.
    pub initial: Vec<ModeInitial>,
    pub history: History,
    pub horizon: f64,
    pub steps_per_delay: usize,
    /// Keep every `record_every`-th step in the trajectory.
    pub record_every: usize,
    /// Also evolve `z` by upwinding on a 129-point grid and compare energies.
    pub transport_check: bool,
}

impl SimulationConfig {
    pub fn new(initial: Vec<ModeInitial>, horizon: f64) -> Self {
        SimulationConfig {
            initial,
            history: History::Constant,
            horizon,
            steps_per_delay: 64,
            record_every: 1,
            transport_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub total_energy: Vec<f64>,
    /// `per_mode_energy[k][j]`: mode `j + 1` at `times[k]`.
    pub per_mode_energy: Vec<Vec<f64>>,
    /// Steps per delay after the stiffness guard.
    pub steps_per_delay: usize,
    pub n_modes: usize,
    pub warnings: Vec<String>,
    /// Largest relative gap between the history-based and the upwind energies.
    pub transport_check: Option<f64>,
}

const UPWIND_POINTS: usize = 129;
const STIFFNESS_LIMIT: f64 = 0.5;

fn hermite(y0: f64, f0: f64, y1: f64, f1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * f0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * f1
}

struct ModeRun {
    last: [f64; 3],
    energy: Vec<f64>,
    upwind_energy: Option<Vec<f64>>,
}

struct ModeSetup<'a> {
    ode: ModeOde,
    trace_weight: [f64; 3],
    mu: f64,
    xi: f64,
    tau: f64,
    m: usize,
    steps: usize,
    mode: usize,
    init: ModeInitial,
    history: &'a History,
    record_every: usize,
    upwind: bool,
}

fn run_mode(s: &ModeSetup) -> Result<ModeRun> {
    let (m, steps) = (s.m, s.steps);
    let dt = s.tau / m as f64;
    // grid index i <-> time (i - m) dt; entries 0..m are history
    let mut ys: Vec<[f64; 3]> = Vec::with_capacity(m + steps + 1);
    let mut fs: Vec<[f64; 3]> = Vec::with_capacity(m + steps + 1);
    for i in 0..m {
        let t = (i as f64 - m as f64) * dt;
        ys.push(s.history.at(s.mode, &s.init, t));
        fs.push([0.0; 3]);
    }
    let delayed_grid = |ys: &[[f64; 3]], k: usize| ys[k];
    let delayed_mid = |ys: &[[f64; 3]], fs: &[[f64; 3]], k: usize, t: f64| -> [f64; 3] {
        // delayed time lies between grid indices k and k + 1
        if k < m {
            return s.history.at(s.mode, &s.init, t - s.tau);
        }
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = hermite(ys[k][c], fs[k][c], ys[k + 1][c], fs[k + 1][c], dt, 0.5);
        }
        out
    };
    let y0 = [s.init.u0, s.init.u1, s.init.theta0];
    ys.push(y0);
    fs.push(s.ode.rhs(y0, delayed_grid(&ys, 0)));

    let trace = |y: &[f64; 3]| s.trace_weight[0] * y[0] + s.trace_weight[1] * y[1] + s.trace_weight[2] * y[2];
    // squared traces over the trailing window, summed incrementally and
    // refreshed once per delay to keep round-off from accumulating
    let mut tr2: Vec<f64> = ys.iter().map(|y| trace(y).powi(2)).collect();
    let window_sum = |tr2: &[f64], k: usize| tr2[k + 1..k + m].iter().sum::<f64>();
    let mut inner = window_sum(&tr2, 0);
    let delay_energy = |tr2: &[f64], inner: f64, k: usize| s.xi * (inner + 0.5 * (tr2[k] + tr2[k + m])) / m as f64;
    let point_energy = |y: &[f64; 3]| s.mu * y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    let mut energy = Vec::with_capacity(steps / s.record_every + 2);
    energy.push(point_energy(&y0) + delay_energy(&tr2, inner, 0));

    let mut up = s.upwind.then(|| {
        let n = UPWIND_POINTS;
        (0..n)
            .map(|i| {
                let rho = i as f64 / (n - 1) as f64;
                trace(&s.history.at(s.mode, &s.init, -s.tau * rho))
            })
            .collect::<Vec<f64>>()
    });
    if let Some(z) = up.as_mut() {
        z[0] = trace(&y0);
    }
    let up_energy = |z: &[f64]| {
        let n = z.len();
        let mut acc = 0.5 * (z[0] * z[0] + z[n - 1] * z[n - 1]);
        for v in &z[1..n - 1] {
            acc += v * v;
        }
        s.xi * acc / (n - 1) as f64
    };
    let mut upwind_energy = up.as_ref().map(|z| vec![point_energy(&y0) + up_energy(z)]);

    for step in 0..steps {
        let k = step; // delayed index for time (step) dt is step (offset m)
        let i = step + m; // current index
        let t = step as f64 * dt;
        let y = ys[i];
        let dh = delayed_mid(&ys, &fs, k, t + 0.5 * dt);
        let d1 = if k + 1 < m {
            s.history.at(s.mode, &s.init, t + dt - s.tau)
        } else {
            delayed_grid(&ys, k + 1)
        };
        let k1 = fs[i];
        let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
        let k2 = s.ode.rhs(add(y, k1, 0.5 * dt), dh);
        let k3 = s.ode.rhs(add(y, k2, 0.5 * dt), dh);
        let k4 = s.ode.rhs(add(y, k3, dt), d1);
        let mut yn = [0.0; 3];
        for c in 0..3 {
            yn[c] = y[c] + dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        let tn = t + dt;
        if !yn.iter().all(|x| x.is_finite() && x.abs() < 1e150) {
            return Err(Error::Divergence { time: tn });
        }
        ys.push(yn);
        fs.push(s.ode.rhs(yn, d1));
        tr2.push(trace(&yn).powi(2));
        // window for time (step + 1) dt spans indices k + 1 ..= k + 1 + m
        if (step + 1) % m == 0 {
            inner = window_sum(&tr2, k + 1);
        } else {
            inner += tr2[k + m] - tr2[k + 1];
        }

        if let Some(z) = up.as_mut() {
            let n = z.len();
            let drho = 1.0 / (n - 1) as f64;
            let cfl_total = dt / (s.tau * drho);
            let subs = (cfl_total / 0.9).ceil().max(1.0) as usize;
            let c = cfl_total / subs as f64;
            for j in 1..=subs {
                let frac = j as f64 / subs as f64;
                let mut b = [0.0; 3];
                for comp in 0..3 {
                    b[comp] = hermite(y[comp], k1[comp], yn[comp], fs[i + 1][comp], dt, frac);
                }
                for r in (1..n).rev() {
                    z[r] -= c * (z[r] - z[r - 1]);
                }
                z[0] = trace(&b);
            }
        }

        if (step + 1) % s.record_every == 0 || step + 1 == steps {
            let e = point_energy(&yn) + delay_energy(&tr2, inner, k + 1);
            if !e.is_finite() {
                return Err(Error::Divergence { time: tn });
            }
            energy.push(e);
            if let (Some(z), Some(ue)) = (up.as_ref(), upwind_energy.as_mut()) {
                ue.push(point_energy(&yn) + up_energy(z));
            }
        }
    }
    Ok(ModeRun { last: *ys.last().unwrap(), energy, upwind_energy })
}

/// Integrates a single modal equation with `m` steps per delay and returns
/// `(u, u', theta)` at `horizon` (rounded to the step grid).
pub fn integrate_mode(ode: &ModeOde, tau: f64, m: usize, horizon: f64, init: ModeInitial, history: &History) -> Result<[f64; 3]> {
    if !(tau > 0.0) || m == 0 || !(horizon > 0.0) {
        return Err(Error::Validation("tau, steps and horizon must be positive".into()));
    }
    let steps = (horizon / tau * m as f64).round() as usize;
    let run = run_mode(&ModeSetup {
        ode: *ode,
        trace_weight: [0.0; 3],
        mu: 0.0,
        xi: 0.0,
        tau,
        m,
        steps,
        mode: 1,
        init,
        history,
        record_every: steps.max(1),
        upwind: false,
    })?;
    Ok(run.last)
}

/// Weights `(w_u, w_v, w_theta)` with `z(0) = w . (u, v, theta)`.
fn trace_weights(params: &ModelParams, mu: f64) -> [f64; 3] {
    match params.kind {
        SystemKind::DelayHyperbolic => [mu.sqrt(), 0.0, 0.0],
        SystemKind::DelayParabolic => [0.0, 0.0, mu.powf(params.alpha / 2.0)],
        SystemKind::DelayedDampingString => [0.0, mu.sqrt(), 0.0],
        SystemKind::NoDelayBaseline => [0.0; 3],
    }
}

/// Simulates the first `config.initial.len()` modes up to `config.horizon`.
///
/// The step is `tau / M`; `M` is doubled while `rate * dt > 0.5` for the
/// fastest retained mode (explicit RK4 would otherwise be unstable on the
/// strongly damped modes). The undelayed system uses the grid of its `tau`.
pub fn simulate(params: &ModelParams, spectrum: &Spectrum, config: &SimulationConfig) -> Result<Trajectory> {
    params.validate()?;
    let n_modes = config.initial.len();
    if n_modes == 0 {
        return Err(Error::Validation("at least one mode is required".into()));
    }
    if config.steps_per_delay < 8 {
        return Err(Error::Validation(format!(
            "steps per delay = {} must be at least 8",
            config.steps_per_delay
        )));
    }
    if !(config.horizon.is_finite() && config.horizon > 0.0) {
        return Err(Error::Validation(format!("horizon {} must be positive", config.horizon)));
    }
    if config.record_every == 0 {
        return Err(Error::Validation("record_every must be at least 1".into()));
    }
    let mus = spectrum.eigenvalues(n_modes);
    if mus.len() < n_modes {
        return Err(Error::Validation(format!("spectrum has only {} eigenvalues", mus.len())));
    }
    let tau = params.tau;
    let odes: Vec<ModeOde> = mus.iter().map(|&mu| ModeOde::for_kind(params, mu)).collect();
    let fastest = odes.iter().map(ModeOde::rate).fold(0.0, f64::max);
    let mut m = config.steps_per_delay;
    while fastest * tau / m as f64 > STIFFNESS_LIMIT {
        m *= 2;
    }
    let mut warnings = Vec::new();
    if m != config.steps_per_delay {
        warnings.push(format!("stiffness guard raised steps per delay from {} to {m}", config.steps_per_delay));
    }
    let steps = (config.horizon / tau * m as f64).round() as usize;
    let rel_step = (steps as f64 * tau / m as f64 - config.horizon).abs() / config.horizon;
    if rel_step > 1e-9 {
        warnings.push(format!(
            "horizon {} is not a multiple of the step; integrating to {}",
            config.horizon,
            steps as f64 * tau / m as f64
        ));
    }
    for (j, init) in config.initial.iter().enumerate() {
        let h = config.history.at(j + 1, init, 0.0);
        if h != [init.u0, init.u1, init.theta0] {
            warnings.push(format!("mode {}: history at t = 0 differs from the initial data", j + 1));
        }
    }
    if let Err(reason) = params.stability_hypotheses() {
        warnings.push(format!("stability hypotheses not met: {reason}"));
    }
    for w in &warnings {
        warn!("{w}");
    }

    let runs: Vec<ModeRun> = (0..n_modes)
        .into_par_iter()
        .map(|j| {
            run_mode(&ModeSetup {
                ode: odes[j],
                trace_weight: trace_weights(params, mus[j]),
                mu: mus[j],
                xi: params.z_weight(),
                tau,
                m,
                steps,
                mode: j + 1,
                init: config.initial[j],
                history: &config.history,
                record_every: config.record_every,
                upwind: config.transport_check && params.kind.has_delay(),
            })
        })
        .collect::<Result<_>>()
        .map_err(|e| match e {
            // several modes may blow up; report the earliest failure deterministically
            Error::Divergence { time } => Error::Divergence { time },
            other => other,
        })?;

    let dt = tau / m as f64;
    let samples = runs[0].energy.len();
    let mut times = Vec::with_capacity(samples);
    times.push(0.0);
    for r in 1..samples {
        let step = (r * config.record_every).min(steps);
        times.push(step as f64 * dt);
    }
    let per_mode_energy: Vec<Vec<f64>> = (0..samples).map(|k| runs.iter().map(|r| r.energy[k]).collect()).collect();
    let total_energy: Vec<f64> = per_mode_energy.iter().map(|row| row.iter().sum()).collect();
    let transport_check = if config.transport_check && params.kind.has_delay() {
        let mut worst: f64 = 0.0;
        for (k, &e) in total_energy.iter().enumerate() {
            let up: f64 = runs.iter().map(|r| r.upwind_energy.as_ref().unwrap()[k]).sum();
            worst = worst.max((up - e).abs() / e.abs().max(1e-300));
        }
        Some(worst)
    } else {
        None
    };
    Ok(Trajectory {
        times,
        total_energy,
        per_mode_energy,
        steps_per_delay: m,
        n_modes,
        warnings,
        transport_check,
    })
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "E_total".to_string()];
    header.extend((1..=traj.n_modes).map(|j| format!("E_mode_{j}")));
    w.write_record(&header)?;
    for (k, t) in traj.times.iter().enumerate() {
        let mut rec = vec![fmt_f64(*t), fmt_f64(traj.total_energy[k])];
        rec.extend(traj.per_mode_energy[k].iter().map(|e| fmt_f64(*e)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    Exponential,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum DecayModel {
    /// `E ~ e^{-2 rate t}`: `rate` is the semigroup decay rate.
    Exponential { rate: f64 },
    /// `E ~ t^{-2 order}`.
    Polynomial { order: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Coefficient of determination; `None` when the energy is constant.
    pub fit_quality: Option<f64>,
    pub window: (f64, f64),
    pub samples: usize,
    pub caveat: String,
}

/// Least-squares fit of `log E` against `t` (exponential) or `log t`
/// (polynomial) over the samples with `t` in `window`.
pub fn fit_decay(traj: &Trajectory, window: (f64, f64), model: DecayKind) -> Result<DecayFit> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::Validation(format!("empty fit window [{t0}, {t1}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, e) in traj.times.iter().zip(&traj.total_energy) {
        if *t < t0 || *t > t1 {
            continue;
        }
        if !(*e > 0.0) {
            return Err(Error::FitUndefined(format!("energy {e} at t = {t} is not positive")));
        }
        let x = match model {
            DecayKind::Exponential => *t,
            DecayKind::Polynomial => {
                if *t <= 0.0 {
                    continue;
                }
                t.ln()
            }
        };
        xs.push(x);
        ys.push(e.ln());
    }
    if xs.len() < 10 {
        return Err(Error::FitUndefined(format!(
            "window [{t0}, {t1}] holds {} usable samples, need at least 10",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let fit_quality = if ss_tot <= 1e-24 * n * my.abs().max(1.0).powi(2) {
        None
    } else {
        Some((1.0 - ss_res / ss_tot).clamp(0.0, 1.0))
    };
    let model = match model {
        DecayKind::Exponential => DecayModel::Exponential { rate: -slope / 2.0 },
        DecayKind::Polynomial => DecayModel::Polynomial { order: -slope / 2.0 },
    };
    Ok(DecayFit {
        model,
        fit_quality,
        window,
        samples: xs.len(),
        caveat: format!(
            "truncated {}-mode system: the fitted value describes the retained modes only, not the infinite system",
            traj.n_modes
        ),
    })
}
