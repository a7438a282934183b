use std::fmt;
use std::io;

use log::{info, warn};

use fracflux::burgers::{self, CharParams};
use fracflux::diagnostics::{self, fmt_float, DiagnosticsReport, ReportOptions, TestFunction};
use fracflux::evolve::{self, Scheme};
use fracflux::particles::{self, ParticleState, Stepper};
use fracflux::{mild, PhysicsParams, Profile, Trajectory};

use crate::config::{ConfigError, Method, RunConfig, StepperKind};
use crate::output::{write_table, write_trajectory, Output};

#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Core(fracflux::Error),
    Io(io::Error),
    /// A run that finished but did not meet its own success condition.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use fracflux::Error as E;
        match self {
            Failure::Config(_) => 2,
            Failure::Core(e) => match e {
                E::InvalidGrid(_)
                | E::InvalidParameter { .. }
                | E::GridMismatch
                | E::Stability { .. }
                | E::Unsupported(_) => 2,
                E::BlowUp { .. } => 3,
                E::HorizonExceeded { .. } => 4,
                _ => 5,
            },
            Failure::Numerical(_) => 5,
            Failure::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "config error: {e}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<fracflux::Error> for Failure {
    fn from(e: fracflux::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

pub type Outcome = Result<(), Failure>;

fn report_for(traj: &Trajectory, cfg: &RunConfig, params: &PhysicsParams) -> Result<DiagnosticsReport, Failure> {
    let opts = ReportOptions {
        energy: cfg.output.energy.then_some((params.gamma, params.nu)),
        analyticity: cfg.output.analyticity,
    };
    let mut report = DiagnosticsReport::from_trajectory(traj, &opts)?;
    if cfg.output.weak_residual {
        report.weak_residual = Some(diagnostics::weak_residual(traj, params, &TestFunction::default())?);
    }
    Ok(report)
}

fn run_direct(cfg: &RunConfig) -> Result<(PhysicsParams, Trajectory), Failure> {
    let params = cfg.require_physics()?;
    let solver = cfg.require_solver()?;
    let p0 = cfg.initial_profile()?;
    let (steps, dt) = solver.steps();
    info!("running {steps} steps of dt = {dt:e} on {} points", p0.grid().n_points());
    Ok((params, evolve::run(&p0, &params, solver)?))
}

fn finish_report(out: &mut Output, report: &DiagnosticsReport, traj: &Trajectory, cfg: &RunConfig) -> Outcome {
    if cfg.output.trajectory {
        out.write("trajectory.csv", |w| write_trajectory(w, traj))?;
    }
    out.write("report.csv", |w| report.write_csv(w))?;
    let (t, p) = traj.last();
    out.result("final_time", fmt_float(t));
    out.result("final_mass", fmt_float(p.mass()));
    for (k, v) in report.summary() {
        out.result(k, v);
    }
    Ok(())
}

pub fn simulate(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let (params, traj) = run_direct(cfg)?;
    let report = report_for(&traj, cfg, &params)?;
    finish_report(out, &report, &traj, cfg)
}

/// Predicted slope of `‖∂ˣ^θ ρ(t)‖_{L^q}` for the free problem.
fn predicted_slope(alpha: f64, q: f64, theta: u32) -> f64 {
    -(theta as f64) / alpha - 1.0 + (1.0 + 1.0 / q) / alpha
}

pub fn decay(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let opts = cfg.require(&cfg.decay, "decay")?.clone();
    let (params, traj) = run_direct(cfg)?;
    let mut report = report_for(&traj, cfg, &params)?;
    let mut rows = Vec::new();
    for &(q, theta) in &opts.norms {
        let slope = match opts.window {
            Some(w) => mild::decay_exponent_fit_window(&traj, q, theta, w)?,
            None => mild::decay_exponent_fit(&traj, q, theta)?,
        };
        info!("q = {q}, theta = {theta}: slope {slope:.4}");
        report.fitted_exponents.push(((q, theta), slope));
        rows.push(vec![q, theta as f64, slope, predicted_slope(params.alpha, q, theta)]);
    }
    out.write("slopes.csv", |w| write_table(w, &["q", "theta", "slope", "predicted"], &rows))?;
    finish_report(out, &report, &traj, cfg)
}

pub fn mild(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let params = cfg.require_physics()?;
    let opts = cfg.require(&cfg.mild, "mild")?;
    let p0 = cfg.initial_profile()?;
    let mesh = mild::graded_mesh(opts.t_final, opts.mesh, params.alpha)?;
    let (traj, rep) = mild::picard_solve_on_mesh(&p0, &params, &mesh, opts.max_iter, opts.tol)?;
    let rows: Vec<Vec<f64>> = rep
        .iterate_gaps
        .iter()
        .enumerate()
        .map(|(k, g)| vec![(k + 1) as f64, *g])
        .collect();
    out.write("picard.csv", |w| write_table(w, &["iteration", "gap"], &rows))?;
    if cfg.output.trajectory {
        out.write("trajectory.csv", |w| write_trajectory(w, &traj))?;
    }
    out.result("a_measured", fmt_float(rep.a_measured));
    out.result("lipschitz_estimate", fmt_float(rep.lipschitz_estimate));
    out.result("small", rep.is_small().to_string());
    out.result("converged", rep.converged.to_string());
    out.result("iterations", rep.iterate_gaps.len().to_string());
    if opts.require_small {
        rep.require_small()?;
    }
    if !rep.converged {
        return Err(Failure::Numerical(format!(
            "Picard iteration did not reach tol = {:e} in {} iterations",
            opts.tol, opts.max_iter
        )));
    }
    Ok(())
}

fn char_params(cfg: &RunConfig, p0: &Profile, mu: Option<f64>) -> Result<CharParams, Failure> {
    let params = cfg.require_physics()?;
    if params.alpha != 1.0 {
        return Err(Failure::Config(ConfigError {
            line: None,
            field: "physics.alpha".into(),
            message: format!("the exact solver needs alpha = 1, got {}", params.alpha),
        }));
    }
    let mu = mu.unwrap_or((-p0.min()).max(0.0));
    Ok(CharParams::new(params.nu, params.gamma, mu)?)
}

pub fn exact(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let opts = cfg.require(&cfg.exact, "exact")?;
    let p0 = cfg.initial_profile()?;
    let cp = char_params(cfg, &p0, opts.mu)?;
    let horizon = burgers::horizon(&cp)?;
    if let Some(&t) = opts.times.iter().find(|t| **t >= horizon) {
        return Err(fracflux::Error::HorizonExceeded { t, horizon }.into());
    }
    out.result("horizon", fmt_float(horizon));
    let mass0 = p0.mass();
    let mut profile_rows = Vec::new();
    let mut time_rows = Vec::new();
    for &t in &opts.times {
        info!("tracing characteristics at t = {t}");
        let sol = burgers::trace_solution(&p0, t, &cp)?;
        let (mut gap, mut gap_mass) = (f64::NAN, f64::NAN);
        if cp.gamma > 0.0 {
            gap = 0.0;
            gap_mass = 0.0;
        }
        for (i, &x) in sol.x_values.iter().enumerate() {
            let w = sol.preimages[i];
            let mut row = vec![t, x, sol.rho[i], sol.u[i], w.re, w.im];
            if cp.gamma > 0.0 {
                let a = burgers::steady_state(x, cp.nu, cp.gamma)?;
                let b = burgers::steady_state_with_mass(x, cp.nu, cp.gamma, mass0)?;
                if x.abs() <= opts.window {
                    gap = gap.max((sol.rho[i] - a).abs());
                    gap_mass = gap_mass.max((sol.rho[i] - b).abs());
                }
                row.extend([a, b]);
            }
            profile_rows.push(row);
        }
        let grid_mass = sol.rho.iter().sum::<f64>() * p0.grid().dx();
        let line_mass = if t == 0.0 {
            mass0
        } else {
            burgers::trace_mass(&p0, t, &cp, 1.0, 4096)?
        };
        time_rows.push(vec![t, grid_mass, line_mass, gap, gap_mass]);
    }
    let mut header = vec!["t", "x", "rho", "u", "w_re", "w_im"];
    if cp.gamma > 0.0 {
        header.extend(["rho_inf", "rho_inf_mass"]);
    }
    out.write("exact.csv", |w| write_table(w, &header, &profile_rows))?;
    out.write("times.csv", |w| {
        write_table(w, &["t", "grid_mass", "line_mass", "gap_rho_inf", "gap_rho_inf_mass"], &time_rows)
    })?;
    if let Some(last) = time_rows.last() {
        out.result("final_gap_rho_inf", fmt_float(last[3]));
        out.result("final_gap_rho_inf_mass", fmt_float(last[4]));
    }
    Ok(())
}

pub fn particles(cfg: &RunConfig, seed: u64, out: &mut Output) -> Outcome {
    let opts = cfg.require(&cfg.particles, "particles")?;
    let stepper = match opts.stepper {
        StepperKind::Euler => Stepper::EulerMaruyama,
        StepperKind::Implicit => Stepper::DriftImplicit(opts.neighbours),
    };
    let mut states = Vec::with_capacity(opts.ensembles);
    for k in 0..opts.ensembles as u64 {
        let s = seed.wrapping_add(k);
        let start = match &opts.positions {
            Some(p) => ParticleState::new(p.clone(), s)?,
            None => ParticleState::gaussian(opts.count, opts.sigma, s)?,
        };
        info!("ensemble {k}: {} particles to t = {}", start.len(), opts.t_end);
        states.push(particles::simulate(&start, opts.dt, opts.t_end, opts.gamma, opts.noise, stepper)?);
    }
    let mut rows = Vec::new();
    for (k, s) in states.iter().enumerate() {
        for (i, x) in s.positions().iter().enumerate() {
            rows.push(vec![k as f64, i as f64, *x]);
        }
    }
    out.write("positions.csv", |w| write_table(w, &["ensemble", "index", "x"], &rows))?;

    let gaps: Vec<f64> = states
        .iter()
        .flat_map(|s| s.positions().windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>())
        .collect();
    if !gaps.is_empty() {
        out.result("min_gap", fmt_float(gaps.iter().copied().fold(f64::INFINITY, f64::min)));
        out.result("max_gap", fmt_float(gaps.iter().copied().fold(0.0, f64::max)));
    }
    if opts.count == 2 {
        let p = states[0].positions();
        out.result("gap", fmt_float(p[1] - p[0]));
    }
    out.result("final_time", fmt_float(states[0].time()));

    if let (Some(grid), true) = (cfg.grid, opts.count * states.len() >= 2) {
        let pooled: Vec<f64> = states.iter().flat_map(|s| s.positions().iter().copied()).collect();
        let h = particles::silverman_bandwidth(&pooled)?;
        let rho = particles::pooled_density(&states, grid, h)?;
        let mut rows = Vec::new();
        let mut l1 = 0.0;
        for (x, v) in grid.nodes().into_iter().zip(rho.values()) {
            if opts.gamma > 0.0 {
                let eq = particles::equilibrium_density(x, opts.gamma)?;
                l1 += (v - eq).abs() * grid.dx();
                rows.push(vec![x, *v, eq]);
            } else {
                rows.push(vec![x, *v]);
            }
        }
        let header: &[&str] = if opts.gamma > 0.0 { &["x", "rho", "rho_eq"] } else { &["x", "rho"] };
        out.write("density.csv", |w| write_table(w, header, &rows))?;
        out.result("bandwidth", fmt_float(h));
        if opts.gamma > 0.0 {
            out.result("l1_to_equilibrium", fmt_float(l1));
        }
    }
    Ok(())
}

/// Profiles of one method at the requested times.
fn profiles_at(cfg: &RunConfig, method: Method, p0: &Profile, times: &[f64]) -> Result<Vec<Profile>, Failure> {
    let params = cfg.require_physics()?;
    match method {
        Method::Direct | Method::Splitting => {
            let base = cfg.require_solver()?;
            let mut out = Vec::with_capacity(times.len());
            let mut p = p0.clone();
            let mut prev = 0.0;
            for &t in times {
                let mut seg = base.clone();
                seg.scheme = if method == Method::Direct { Scheme::Direct } else { Scheme::Splitting };
                seg.t_end = t - prev;
                seg.dt = base.dt.min(seg.t_end);
                seg.record_every = usize::MAX;
                if prev > 0.0 && method == Method::Splitting {
                    // mollify only at the true start
                    seg.mollify_width = Some(1e-3 * p0.grid().dx());
                }
                p = evolve::run(&p, &params, &seg)?.last().1.clone();
                out.push(p.clone());
                prev = t;
            }
            Ok(out)
        }
        Method::Exact => {
            let mu = cfg.exact.as_ref().and_then(|e| e.mu);
            let cp = char_params(cfg, p0, mu)?;
            times
                .iter()
                .map(|&t| {
                    let sol = burgers::trace_solution(p0, t, &cp)?;
                    Ok(Profile::new(*p0.grid(), sol.rho)?)
                })
                .collect()
        }
        Method::Mild => {
            let (mesh_n, max_iter, tol) = match &cfg.mild {
                Some(m) => (m.mesh, m.max_iter, m.tol),
                None => (64, 30, 1e-8),
            };
            times
                .iter()
                .map(|&t| {
                    let mesh = mild::graded_mesh(t, mesh_n, params.alpha)?;
                    let (traj, rep) = mild::picard_solve_on_mesh(p0, &params, &mesh, max_iter, tol)?;
                    if !rep.converged {
                        warn!("Picard iteration at t = {t} stopped before reaching tol");
                    }
                    Ok(traj.last().1.clone())
                })
                .collect()
        }
    }
}

pub fn compare(cfg: &RunConfig, out: &mut Output) -> Outcome {
    let opts = cfg.require(&cfg.compare, "compare")?;
    let p0 = cfg.initial_profile()?;
    let (a, b) = opts.methods;
    info!("comparing {} and {}", a.name(), b.name());
    let pa = profiles_at(cfg, a, &p0, &opts.times)?;
    let pb = profiles_at(cfg, b, &p0, &opts.times)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for ((t, x), y) in opts.times.iter().zip(&pa).zip(&pb) {
        let linf = x.linf_distance(y)?;
        let l1 = x.l1_distance(y)?;
        worst = worst.max(linf);
        rows.push(vec![*t, linf, l1]);
    }
    out.write("compare.csv", |w| write_table(w, &["t", "linf", "l1"], &rows))?;
    out.result("methods", format!("{},{}", a.name(), b.name()));
    out.result("max_linf", fmt_float(worst));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_slopes() {
        assert_eq!(predicted_slope(2.0, f64::INFINITY, 0), -0.5);
        assert_eq!(predicted_slope(2.0, 2.0, 1), -0.75);
        assert!((predicted_slope(1.5, f64::INFINITY, 0) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exit_codes() {
        use fracflux::Error as E;
        assert_eq!(Failure::Core(E::BlowUp { time: 1.0 }).exit_code(), 3);
        assert_eq!(Failure::Core(E::HorizonExceeded { t: 2.0, horizon: 1.0 }).exit_code(), 4);
        assert_eq!(Failure::Core(E::Divergence { iterations: 3 }).exit_code(), 5);
        assert_eq!(Failure::Core(E::Stability { dt: 1.0, limit: 0.1 }).exit_code(), 2);
    }
}
