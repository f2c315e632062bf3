//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thermosemi::characteristic::{spectral_abscissa_estimate, AbscissaSearch};
use thermosemi::dynamics::{fit_decay, simulate, DecayKind, DecayModel, ModeInitial, SimulationConfig, Trajectory};
use thermosemi::mode::{ModeForcing, ModeVector};
use thermosemi::params::{in_region_q, ModelParams, SystemKind};
use thermosemi::profile::{ExpTerm, ZProfile};
use thermosemi::region::{classify_region, region_table, RClass, SClass};
use thermosemi::resolvent::{mode_residual, resolvent_scan, solve_mode_resolvent};
use thermosemi::spectrum::{make_spectrum, SpectrumSpec};
use thermosemi::witness::{string_witness, summarize, witness_sweep, WitnessSweep};
use thermosemi::Error;

const TAU_OVER_SQRT3: f64 = 0.577_350_269_189_625_8;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.pass &= ok;
        self.lines.push(format!("    [{}] {msg}", if ok { "ok" } else { "FAIL" }));
    }
}

fn indices() -> Vec<usize> {
    (4..=12).map(|k| 1usize << k).collect()
}

fn sweep_checks(out: &mut Outcome, label: &str, sweep: &WitnessSweep) {
    let s = summarize(sweep);
    let rel = (s.limit_estimate / TAU_OVER_SQRT3 - 1.0).abs();
    out.check(
        s.max_relative_residual <= 1e-9,
        format!("{label}: max residual {:.3e} <= 1e-9", s.max_relative_residual),
    );
    out.check(rel <= 0.02, format!("{label}: limit_estimate {:.6} ({:.2}% from tau/sqrt3)", s.limit_estimate, 100.0 * rel));
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    for (beta, alpha) in [(0.5, 0.5), (0.25, 0.25), (0.75, 0.5), (0.5, 0.0), (1.0, 1.0)] {
        let p = ModelParams::new(SystemKind::DelayHyperbolic, beta, alpha).with_a(1.0).with_tau(1.0).with_xi(2.0);
        let sweep = witness_sweep(&p, &s, &indices()).unwrap();
        sweep_checks(&mut out, &format!("hyperbolic ({beta}, {alpha})"), &sweep);
    }
    let secs = start.elapsed().as_secs_f64();
    out.check(secs < 10.0, format!("runtime {secs:.3e} s < 10 s"));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    for (beta, alpha) in [(0.5, 0.5), (0.75, 0.5), (0.25, 0.0)] {
        let p = ModelParams::new(SystemKind::DelayParabolic, beta, alpha)
            .with_a(2.0)
            .with_kappa(1.0)
            .with_tau(1.0)
            .with_xi(3.0);
        match witness_sweep(&p, &s, &indices()) {
            Ok(sweep) => sweep_checks(&mut out, &format!("parabolic ({beta}, {alpha})"), &sweep),
            Err(e) => out.check(false, format!("parabolic ({beta}, {alpha}): {e}")),
        }
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    let b = ModelParams::new(SystemKind::NoDelayBaseline, 0.5, 0.5);
    let rows = resolvent_scan(&b, &s, &[1e2, 1e3, 1e4], 2, 30_000).unwrap();
    for w in rows.windows(2) {
        let factor = w[0].sup_lb / w[1].sup_lb;
        out.check(
            factor >= 5.0,
            format!(
                "baseline LB {:.4e} (lambda {:e}) -> {:.4e} (lambda {:e}): factor {factor:.2} >= 5",
                w[0].sup_lb, w[0].lambda, w[1].sup_lb, w[1].lambda
            ),
        );
    }
    let p = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(1.0).with_xi(2.0);
    let sweep = witness_sweep(&p, &s, &indices()).unwrap();
    let worst = sweep.rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    out.check(
        worst >= 0.9 * TAU_OVER_SQRT3,
        format!("delayed lower bound at witness frequencies >= {worst:.5} (need {:.5})", 0.9 * TAU_OVER_SQRT3),
    );
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    for n in [51usize, 101, 201] {
        let (phi, row) = string_witness(n, 1.0, 1.0).unwrap();
        let diff = (phi - C64::new(0.0, -2.0)).norm();
        let bound = 2.0 / (n * n) as f64 + 1e-9;
        out.check(diff <= bound, format!("n = {n}: |Phi + 2i| = {diff:.3e} <= {bound:.3e}"));
        let rel = (row.ratio / TAU_OVER_SQRT3 - 1.0).abs();
        out.check(rel <= 0.03, format!("n = {n}: ratio {:.6} ({:.3}% from tau/sqrt3)", row.ratio, 100.0 * rel));
    }
    out
}

fn string_modes(p: &ModelParams, steps_per_delay: usize) -> Trajectory {
    let s = make_spectrum(SpectrumSpec::String).unwrap();
    let init = (1..=32).map(|n| ModeInitial { u0: 1.0 / (n * n) as f64, u1: 0.0, theta0: 0.0 }).collect();
    let mut cfg = SimulationConfig::new(init, 40.0);
    cfg.steps_per_delay = steps_per_delay;
    simulate(p, &s, &cfg).unwrap()
}

fn worst_increase(t: &Trajectory) -> f64 {
    t.total_energy.windows(2).map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE)).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let h = ModelParams::new(SystemKind::DelayHyperbolic, 0.5, 0.5).with_a(1.0).with_tau(0.5).with_xi(1.0);
    let t = string_modes(&h, 64);
    let inc = worst_increase(&t);
    out.check(inc <= 1e-8, format!("hyperbolic: largest relative energy increase per step {inc:.3e} <= 1e-8 (M = {})", t.steps_per_delay));
    let fit = fit_decay(&t, (20.0, 40.0), DecayKind::Exponential).unwrap();
    let rate = match fit.model {
        DecayModel::Exponential { rate } => rate,
        DecayModel::Polynomial { .. } => f64::NAN,
    };
    let r2 = fit.fit_quality.unwrap_or(0.0);
    out.check(rate > 0.0 && r2 >= 0.99, format!("hyperbolic: fitted rate {rate:.5} > 0, R^2 = {r2:.5} >= 0.99"));
    let t2 = string_modes(&h, 2 * t.steps_per_delay);
    let (e1, e2) = (*t.total_energy.last().unwrap(), *t2.total_energy.last().unwrap());
    let rel = (e1 - e2).abs() / e1;
    out.check(rel <= 1e-5, format!("hyperbolic: step halving (M = {} -> {}) changes E(T) by {rel:.3e}", t.steps_per_delay, t2.steps_per_delay));

    let p = ModelParams::new(SystemKind::DelayParabolic, 0.1, 0.9).with_a(2.0).with_kappa(1.0).with_tau(1.0).with_xi(2.0);
    let t = string_modes(&p, 64);
    let inc = worst_increase(&t);
    out.check(inc <= 1e-8, format!("parabolic (0.1, 0.9): largest relative energy increase per step {inc:.3e} <= 1e-8"));
    let search = AbscissaSearch::default();
    let est: Vec<f64> = [1e1, 1e2, 1e3, 1e4]
        .iter()
        .map(|&mu| spectral_abscissa_estimate(&p, mu, &search).map(|e| e.abscissa).unwrap_or(f64::NAN))
        .collect();
    let negative = est.iter().all(|x| *x < 0.0);
    let increasing = est.windows(2).all(|w| w[0] < w[1]);
    out.check(negative && increasing, format!("parabolic abscissae over mu = 1e1..1e4: {est:?} negative and increasing"));
    out.lines.push(format!(
        "    note: the infinite-system polynomial order 1/(2(alpha - 2 beta)) = {:.4} is not reproduced by any finite truncation",
        1.0 / (2.0 * (0.9 - 0.2))
    ));
    out
}

/// Energy-norm distance between a solver state and grid values of an oracle state.
struct GridState {
    u: C64,
    v: C64,
    theta: C64,
    z: Vec<C64>,
}

fn trapezoid_sq(vals: &[C64]) -> f64 {
    let n = vals.len();
    let h = 1.0 / (n - 1) as f64;
    let mut acc = 0.5 * (vals[0].norm_sqr() + vals[n - 1].norm_sqr());
    for v in &vals[1..n - 1] {
        acc += v.norm_sqr();
    }
    acc * h
}

/// Crank-Nicolson in `rho` for the transport row, dense LU for everything.
fn grid_oracle(p: &ModelParams, mu: f64, lambda: f64, f: &ModeForcing, n_pts: usize) -> Option<GridState> {
    let il = C64::new(0.0, lambda);
    let one = C64::new(1.0, 0.0);
    let (mb, ma) = (mu.powf(p.beta), mu.powf(p.alpha));
    let delayed = p.kind.has_delay();
    let nz = if delayed { n_pts } else { 0 };
    let dim = 3 + nz;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut b = DVector::<C64>::zeros(dim);
    let (iu, iv, it) = (0, 1, 2);
    let last = 3 + n_pts - 1;
    // row 1
    m[(0, iu)] = il;
    m[(0, iv)] = -one;
    b[0] = f.f1;
    // rows 2 and 3
    m[(1, iv)] = il;
    m[(1, it)] = -one * mb;
    m[(2, it)] = il;
    m[(2, iv)] = one * mb;
    b[1] = f.f2;
    b[2] = f.f3;
    match p.kind {
        SystemKind::DelayHyperbolic => {
            m[(1, last)] += one * mu.sqrt();
            m[(1, iv)] += one * (p.a * mu);
            m[(2, it)] += one * ma;
        }
        SystemKind::DelayParabolic => {
            m[(1, iu)] += one * mu;
            m[(2, last)] += one * (p.kappa * mu.powf(p.alpha / 2.0));
            m[(2, it)] += one * (p.a * ma);
        }
        SystemKind::DelayedDampingString => {
            m[(1, iu)] += one * mu;
            m[(1, last)] += one * (p.a * mu.sqrt());
            m[(2, it)] += one * ma;
        }
        SystemKind::NoDelayBaseline => {
            m[(1, iu)] += one * mu;
            m[(2, it)] += one * ma;
        }
    }
    if delayed {
        // boundary condition z_0 = trace
        let r = 3;
        m[(r, 3)] = one;
        match p.kind {
            SystemKind::DelayHyperbolic => m[(r, iu)] = -one * mu.sqrt(),
            SystemKind::DelayParabolic => m[(r, it)] = -one * mu.powf(p.alpha / 2.0),
            SystemKind::DelayedDampingString => m[(r, iv)] = -one * mu.sqrt(),
            SystemKind::NoDelayBaseline => unreachable!(),
        }
        let h = 1.0 / (n_pts - 1) as f64;
        let hv: Vec<C64> = (0..n_pts).map(|j| f.h.eval(j as f64 * h)).collect();
        for j in 0..n_pts - 1 {
            let row = 4 + j;
            let k = 3 + j;
            m[(row, k + 1)] = one / (p.tau * h) + il * 0.5;
            m[(row, k)] = -one / (p.tau * h) + il * 0.5;
            b[row] = (hv[j] + hv[j + 1]) * 0.5;
        }
    }
    let x = m.lu().solve(&b)?;
    Some(GridState { u: x[0], v: x[1], theta: x[2], z: (0..nz).map(|j| x[3 + j]).collect() })
}

/// Richardson combination of the 257- and 513-point oracles (second-order scheme).
fn oracle(p: &ModelParams, mu: f64, lambda: f64, f: &ModeForcing) -> Option<GridState> {
    let fine = grid_oracle(p, mu, lambda, f, 513)?;
    let coarse = grid_oracle(p, mu, lambda, f, 257)?;
    let ex = |a: C64, b: C64| (a * 4.0 - b) / 3.0;
    let z = if fine.z.is_empty() {
        Vec::new()
    } else {
        (0..coarse.z.len()).map(|j| ex(fine.z[2 * j], coarse.z[j])).collect()
    };
    Some(GridState { u: ex(fine.u, coarse.u), v: ex(fine.v, coarse.v), theta: ex(fine.theta, coarse.theta), z })
}

/// Energy-norm gap between a solver state and an oracle state. A gridded
/// solver `z` is compared at its own nodes (a subset of the oracle grid); an
/// analytic one at every oracle node.
fn distance(p: &ModelParams, mu: f64, s: &ModeVector, o: &GridState) -> (f64, f64) {
    let n = o.z.len();
    let stride = match s.z.grid_len() {
        Some(m) if n > 0 => {
            assert_eq!((n - 1) % (m - 1), 0, "oracle grid must contain the solver grid");
            (n - 1) / (m - 1)
        }
        _ => 1,
    };
    let oz: Vec<C64> = o.z.iter().step_by(stride).copied().collect();
    let m = oz.len();
    let zs: Vec<C64> = (0..m).map(|j| s.z.eval(j as f64 / (m - 1).max(1) as f64) - oz[j]).collect();
    let xi = p.z_weight();
    let zpart = |v: &[C64]| if m > 1 { xi * trapezoid_sq(v) } else { 0.0 };
    let diff = mu * (s.u - o.u).norm_sqr() + (s.v - o.v).norm_sqr() + (s.theta - o.theta).norm_sqr() + zpart(&zs);
    let size = mu * o.u.norm_sqr() + o.v.norm_sqr() + o.theta.norm_sqr() + zpart(&oz);
    (diff.sqrt(), size.sqrt())
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_profile(rng: &mut ChaCha8Rng) -> ZProfile {
    match rng.gen_range(0..4) {
        0 => ZProfile::zero(),
        1 => ZProfile::Exponential { c0: random_c(rng), c1: random_c(rng), omega: rng.gen_range(-4.0..4.0) },
        2 => ZProfile::Terms(
            (0..3)
                .map(|_| ExpTerm::new(random_c(rng), rng.gen_range(0..3), rng.gen_range(-4.0..4.0)))
                .collect(),
        ),
        _ => {
            let (a, w) = (random_c(rng), rng.gen_range(-4.0..4.0));
            ZProfile::sampled(129, move |r| a * C64::from_polar(1.0, w * r) + C64::new(r * r, 0.0)).unwrap()
        }
    }
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let (mut solved, mut attempts) = (0, 0);
    let (mut worst_res, mut worst_rel) = (0.0f64, 0.0f64);
    let mut worst_case = String::new();
    while solved < 100 && attempts < 1000 {
        attempts += 1;
        let kind = SystemKind::ALL[rng.gen_range(0..4)];
        let a = rng.gen_range(0.5..3.0);
        let p = ModelParams {
            kind,
            beta: rng.gen_range(0.0..=1.0),
            alpha: rng.gen_range(0.0..=1.0),
            a,
            kappa: rng.gen_range(0.2..a),
            tau: rng.gen_range(0.5..1.5),
            xi: rng.gen_range(0.5..3.0),
        };
        let mu = 10f64.powf(rng.gen_range(0.0..3.0));
        let lambda = rng.gen_range(-10.0..10.0);
        let f = ModeForcing { f1: random_c(&mut rng), f2: random_c(&mut rng), f3: random_c(&mut rng), h: random_profile(&mut rng) };
        let state = match solve_mode_resolvent(&p, mu, lambda, &f) {
            Ok(s) => s,
            Err(Error::NearSingular { .. }) => continue,
            Err(e) => panic!("unexpected error {e}"),
        };
        let Some(o) = oracle(&p, mu, lambda, &f) else { continue };
        solved += 1;
        let res = mode_residual(&p, mu, lambda, &state, &f) / f.norm(&p, mu).max(1e-300);
        let (d, size) = distance(&p, mu, &state, &o);
        let rel = d / size;
        worst_res = worst_res.max(res);
        if rel > worst_rel {
            worst_rel = rel;
            worst_case = format!("{:?} mu = {mu:.3} lambda = {lambda:.3}", kind);
        }
    }
    out.check(solved == 100, format!("{solved} solvable instances drawn in {attempts} attempts"));
    out.check(worst_res <= 1e-10, format!("max relative residual {worst_res:.3e} <= 1e-10"));
    out.check(worst_rel <= 1e-4, format!("max relative gap to the dense grid solve {worst_rel:.3e} <= 1e-4 ({worst_case})"));
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    let labels = region_table(101).unwrap();
    let (mut coverage_ok, mut q_ok, mut agree) = (true, true, true);
    for l in &labels {
        // exact integer arithmetic on the lattice (i, j) / 100
        let (b, a) = ((l.beta * 100.0).round() as i64, (l.alpha * 100.0).round() as i64);
        let in_s = (2 * b - 100).abs() <= a && a <= 2 * b;
        let in_s1 = 2 * b < a && 50 < a;
        let in_s2 = a < 100 - 2 * b && a <= 50;
        let in_s3 = a < 2 * b - 100;
        let count = [in_s, in_s1, in_s2, in_s3].iter().filter(|x| **x).count();
        coverage_ok &= count == 1;
        let expected = if in_s {
            SClass::S
        } else if in_s1 {
            SClass::S1
        } else if in_s2 {
            SClass::S2
        } else {
            SClass::S3
        };
        agree &= expected == l.s_class;
        let q = 2 * b - a <= 100;
        q_ok &= q == (in_s || in_s1 || in_s2) && q == l.in_q && l.in_q == in_region_q(l.beta, l.alpha);
    }
    out.check(coverage_ok && agree, format!("{} grid points each in exactly one of S, S1, S2, S3 (labels agree)", labels.len()));
    out.check(q_ok, "2 beta - alpha <= 1 iff the point lies in S, S1 or S2".into());
    let hand: [((f64, f64), SClass, Option<RClass>); 10] = [
        ((0.0, 0.75), SClass::S1, Some(RClass::SI)),
        ((0.9, 0.5), SClass::S3, Some(RClass::R5)),
        ((0.5, 0.5), SClass::S, Some(RClass::R1)),
        ((1.0, 0.0), SClass::S3, None),
        ((0.1, 0.9), SClass::S1, None),
        ((0.75, 0.75), SClass::S, Some(RClass::R1)),
        ((0.6, 0.9), SClass::S, Some(RClass::R2)),
        ((0.4, 0.4), SClass::S, Some(RClass::R3)),
        ((0.8, 0.7), SClass::S, Some(RClass::R4)),
        ((0.25, 0.25), SClass::S2, None),
    ];
    let mut wrong = Vec::new();
    for ((beta, alpha), s, r) in hand {
        let l = classify_region(beta, alpha).unwrap();
        if l.s_class != s || r.is_some_and(|r| r != l.r_class) {
            wrong.push(format!("({beta}, {alpha}) -> {}/{}", l.s_class, l.r_class));
        }
    }
    out.check(wrong.is_empty(), format!("10 hand-labelled points classified correctly {wrong:?}"));
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 hyperbolic witness certificate", criterion_1),
        ("2 parabolic witness certificate", criterion_2),
        ("3 baseline contrast", criterion_3),
        ("4 string example", criterion_4),
        ("5 energy dissipation and decay", criterion_5),
        ("6 oracle equivalence", criterion_6),
        ("7 region suite", criterion_7),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        println!("criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" });
        for l in &o.lines {
            println!("{l}");
        }
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
