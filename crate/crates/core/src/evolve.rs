//! Time integration: integrating-factor pseudo-spectral solver, viscous
//! Trotter splitting, the inviscid Dyson substep and the space-time rescaling
//! that removes the confinement term when `α = 2`.

use log::warn;
use num_complex::Complex64;

use crate::burgers::{self, CharParams};
use crate::error::{invalid, Error, Result};
use crate::grid::{mollify, to_physical, to_spectral, Grid, Profile, SpectralField};
use crate::operators::{check_alpha, hilbert_in_place, HeatPropagator};

/// Coefficients of `∂tρ + ∂x[ρ(Hρ − γx)] = −νΛ^α ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub alpha: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl PhysicsParams {
    pub fn new(alpha: f64, nu: f64, gamma: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu", format!("must be positive, got {nu}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be nonnegative, got {gamma}")));
        }
        Ok(Self { alpha, nu, gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Direct,
    Splitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DysonSubstep {
    Spectral,
    Characteristics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dyson_substep: DysonSubstep,
    pub dealias: bool,
    pub record_every: usize,
    /// Width of the initial mollifier for the splitting scheme; `None` uses `dt`.
    pub mollify_width: Option<f64>,
    /// Switch for the transport term. Only tests turn it off.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            scheme: Scheme::Direct,
            dyson_substep: DysonSubstep::Spectral,
            dealias: true,
            record_every: 1,
            mollify_width: None,
            nonlinear: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("must be nonnegative, got {}", self.t_end)));
        }
        if self.t_end > 0.0 && self.dt > self.t_end * (1.0 + 1e-12) {
            return Err(invalid("dt", "must not exceed t_end"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        if let Some(h) = self.mollify_width {
            if !(h > 0.0) {
                return Err(invalid("mollify_width", "must be positive"));
            }
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Snapshots of a run on one grid at strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    profiles: Vec<Profile>,
}

impl Trajectory {
    pub fn new(t0: f64, p0: Profile) -> Self {
        Self {
            times: vec![t0],
            profiles: vec![p0],
        }
    }

    pub fn from_parts(times: Vec<f64>, profiles: Vec<Profile>) -> Result<Self> {
        if times.is_empty() || times.len() != profiles.len() {
            return Err(invalid("trajectory", "times and profiles must align and be non-empty"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("trajectory", "times must be strictly increasing"));
        }
        let g = *profiles[0].grid();
        if profiles.iter().any(|p| *p.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { times, profiles })
    }

    pub fn push(&mut self, t: f64, p: Profile) -> Result<()> {
        if !(t > *self.times.last().expect("non-empty")) {
            return Err(invalid("t", "snapshot times must increase"));
        }
        if p.grid() != self.profiles[0].grid() {
            return Err(Error::GridMismatch);
        }
        self.times.push(t);
        self.profiles.push(p);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn grid(&self) -> &Grid {
        self.profiles[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, &Profile) {
        let i = self.times.len() - 1;
        (self.times[i], &self.profiles[i])
    }
}

/// Transport right-hand side `−∂x(ρHρ)` in spectral form.
#[derive(Debug, Clone)]
struct Transport {
    dealias: bool,
}

impl Transport {
    fn rhs(&self, s: &SpectralField) -> SpectralField {
        let g = *s.grid();
        let rho = to_physical(s);
        let mut hs = s.clone();
        hilbert_in_place(&mut hs);
        let h = to_physical(&hs);
        let prod: Vec<f64> = rho.values().iter().zip(h.values()).map(|(a, b)| a * b).collect();
        let mut out = to_spectral(&Profile::from_raw(g, prod));
        if self.dealias {
            out.dealias();
        }
        let nyq = g.nyquist_slot();
        out.apply(|i| {
            if i == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -g.frequency(i))
            }
        });
        out
    }
}

fn reject_gamma(params: &PhysicsParams) -> Result<()> {
    if params.gamma > 0.0 {
        return Err(Error::Unsupported(
            "gamma > 0 is not representable by periodic spectral transport".into(),
        ));
    }
    Ok(())
}

/// `∂x(ρ Hρ)` with the product formed in physical space.
pub fn nonlinear_flux(p: &Profile, params: &PhysicsParams, dealias: bool) -> Result<Profile> {
    reject_gamma(params)?;
    let mut s = Transport { dealias }.rhs(&to_spectral(p));
    for c in s.coeffs_mut() {
        *c = -*c;
    }
    Ok(to_physical(&s))
}

/// Transport CFL bound `0.5 dx / max(1, ‖Hρ‖∞)`.
pub fn cfl_limit(p: &Profile) -> f64 {
    let h = crate::operators::hilbert_spectral(p);
    0.5 * p.grid().dx() / h.lp_norm(f64::INFINITY).unwrap_or(0.0).max(1.0)
}

fn add_scaled(a: &SpectralField, b: &SpectralField, f: f64) -> SpectralField {
    let mut out = a.clone();
    for (o, x) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *o += x * f;
    }
    out
}

fn is_finite(s: &SpectralField) -> bool {
    s.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Integrating-factor Heun step with precomputed `E = exp(−dt ν|ξ|^α)`.
fn if_rk2(s: &SpectralField, dt: f64, e: &[f64], tr: Option<&Transport>) -> SpectralField {
    let mut lin = s.clone();
    for (c, m) in lin.coeffs_mut().iter_mut().zip(e) {
        *c *= m;
    }
    let Some(tr) = tr else { return lin };
    let n0 = tr.rhs(s);
    let mut star = add_scaled(s, &n0, dt);
    for (c, m) in star.coeffs_mut().iter_mut().zip(e) {
        *c *= m;
    }
    let n1 = tr.rhs(&star);
    let mut out = lin;
    for ((o, a), (b, m)) in out
        .coeffs_mut()
        .iter_mut()
        .zip(n0.coeffs())
        .zip(n1.coeffs().iter().zip(e))
    {
        *o += 0.5 * dt * (a * m + b);
    }
    out
}

/// One integrating-factor RK2 step of the full equation (`γ = 0`).
pub fn step_direct(p: &Profile, dt: f64, params: &PhysicsParams, cfg: &SolverConfig) -> Result<Profile> {
    reject_gamma(params)?;
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    if cfg.nonlinear {
        let limit = cfl_limit(p);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Stability { dt, limit });
        }
    }
    let prop = HeatPropagator::new(*p.grid(), params)?;
    let e = prop.multiplier(dt);
    let tr = Transport { dealias: cfg.dealias };
    let out = if_rk2(&to_spectral(p), dt, &e, cfg.nonlinear.then_some(&tr));
    if !is_finite(&out) {
        return Err(Error::BlowUp { time: dt });
    }
    Ok(to_physical(&out))
}

fn check_nonnegative(p: &Profile) -> Result<()> {
    let min = p.min();
    if min < -1e-10 {
        return Err(Error::NegativeInput { min });
    }
    Ok(())
}

/// Solve the inviscid Dyson equation `∂tω + ∂x(ωHω) = 0` over `[0, h]`.
pub fn dyson_step(p: &Profile, h: f64, cfg: &SolverConfig) -> Result<Profile> {
    check_nonnegative(p)?;
    if !(h >= 0.0) {
        return Err(invalid("h", "must be nonnegative"));
    }
    if h == 0.0 {
        return Ok(p.clone());
    }
    if cfg.dyson_substep == DysonSubstep::Characteristics {
        if p.min() > 1e-8 * p.max() {
            let cp = CharParams::new(0.0, 0.0, 0.0)?;
            let sol = burgers::trace_solution(p, h, &cp)?;
            return Profile::new(*p.grid(), sol.rho);
        }
        warn!("characteristics Dyson substep needs strictly positive data; using the spectral substep");
    }
    dyson_spectral(p, h, cfg.dealias)
}

fn dyson_spectral(p: &Profile, h: f64, dealias: bool) -> Result<Profile> {
    let tr = Transport { dealias };
    let mut s = to_spectral(p);
    let mut t = 0.0;
    while t < h {
        let limit = cfl_limit(&to_physical(&s));
        let k = limit.min(h - t);
        let k1 = tr.rhs(&s);
        let k2 = tr.rhs(&add_scaled(&s, &k1, 0.5 * k));
        let k3 = tr.rhs(&add_scaled(&s, &k2, 0.5 * k));
        let k4 = tr.rhs(&add_scaled(&s, &k3, k));
        for (i, c) in s.coeffs_mut().iter_mut().enumerate() {
            *c += k / 6.0 * (k1.coeffs()[i] + 2.0 * k2.coeffs()[i] + 2.0 * k3.coeffs()[i] + k4.coeffs()[i]);
        }
        if !is_finite(&s) {
            return Err(Error::BlowUp { time: t + k });
        }
        t += k;
    }
    Ok(to_physical(&s))
}

/// One Trotter step: Dyson substep followed by the exact heat substep.
pub fn step_splitting(p: &Profile, h: f64, params: &PhysicsParams, cfg: &SolverConfig) -> Result<Profile> {
    reject_gamma(params)?;
    check_nonnegative(p)?;
    let prop = HeatPropagator::new(*p.grid(), params)?;
    let d = if cfg.nonlinear { dyson_step(p, h, cfg)? } else { p.clone() };
    crate::operators::heat_step(&d, h, &prop)
}

/// Advance `p0` to `cfg.t_end`, recording every `cfg.record_every` steps and
/// always the final state.
///
/// With `γ > 0` the periodic transport cannot be used directly: `α = 2` runs
/// go through [`rescale_gamma_to_zero`] and `α = 1` runs use the exact
/// characteristics solver.
pub fn run(p0: &Profile, params: &PhysicsParams, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if params.gamma > 0.0 {
        if params.alpha == 2.0 {
            return run_rescaled(p0, params, cfg);
        }
        if params.alpha == 1.0 {
            return run_characteristics(p0, params, cfg);
        }
        return Err(Error::Unsupported(format!(
            "gamma > 0 requires alpha = 1 or alpha = 2, got alpha = {}",
            params.alpha
        )));
    }
    let (n_steps, dt) = cfg.steps();
    let mut traj = Trajectory::new(0.0, p0.clone());
    if n_steps == 0 {
        return Ok(traj);
    }
    // the Dyson substep subdivides itself
    if cfg.nonlinear && cfg.scheme == Scheme::Direct {
        let limit = cfl_limit(p0);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Stability { dt, limit });
        }
    }
    let grid = *p0.grid();
    let prop = HeatPropagator::new(grid, params)?;
    match cfg.scheme {
        Scheme::Direct => {
            let e = prop.multiplier(dt);
            let tr = Transport { dealias: cfg.dealias };
            let mut s = to_spectral(p0);
            for step in 1..=n_steps {
                s = if_rk2(&s, dt, &e, cfg.nonlinear.then_some(&tr));
                let t = step as f64 * dt;
                if !is_finite(&s) {
                    return Err(Error::BlowUp { time: t });
                }
                if step % cfg.record_every == 0 || step == n_steps {
                    traj.push(t, to_physical(&s))?;
                }
            }
        }
        Scheme::Splitting => {
            let width = cfg.mollify_width.unwrap_or(dt);
            let mut p = mollify(p0, width)?;
            for step in 1..=n_steps {
                let t = step as f64 * dt;
                p = step_splitting(&p, dt, params, cfg).map_err(|e| match e {
                    Error::BlowUp { .. } => Error::BlowUp { time: t },
                    other => other,
                })?;
                if !p.is_finite() {
                    return Err(Error::BlowUp { time: t });
                }
                if step % cfg.record_every == 0 || step == n_steps {
                    traj.push(t, p.clone())?;
                }
            }
        }
    }
    Ok(traj)
}

fn record_times(cfg: &SolverConfig) -> Vec<f64> {
    let (n_steps, dt) = cfg.steps();
    (1..=n_steps)
        .filter(|s| s % cfg.record_every == 0 || *s == n_steps)
        .map(|s| s as f64 * dt)
        .collect()
}

fn run_rescaled(p0: &Profile, params: &PhysicsParams, cfg: &SolverConfig) -> Result<Trajectory> {
    let flat = PhysicsParams { gamma: 0.0, ..*params };
    let g = params.gamma;
    let mut traj = Trajectory::new(0.0, p0.clone());
    let mut tilde = p0.clone();
    let mut tau = 0.0;
    for t in record_times(cfg) {
        let target = (2.0 * g * t).exp_m1() / (2.0 * g);
        let mut sub = cfg.clone();
        sub.t_end = target - tau;
        sub.dt = cfg.dt.min(sub.t_end);
        sub.record_every = usize::MAX;
        if cfg.scheme == Scheme::Splitting && tau > 0.0 {
            // mollify only once, at the start of the run
            sub.mollify_width = Some(1e-3 * p0.grid().dx());
        }
        let piece = run(&tilde, &flat, &sub).map_err(|e| match e {
            Error::BlowUp { .. } => Error::BlowUp { time: t },
            other => other,
        })?;
        tilde = piece.last().1.clone();
        tau = target;
        let (p, _) = rescale_gamma_to_zero(&tilde, tau, g)?;
        traj.push(t, p)?;
    }
    Ok(traj)
}

fn run_characteristics(p0: &Profile, params: &PhysicsParams, cfg: &SolverConfig) -> Result<Trajectory> {
    let cp = CharParams::new(params.nu, params.gamma, (-p0.min()).max(0.0))?;
    let mut traj = Trajectory::new(0.0, p0.clone());
    for t in record_times(cfg) {
        let sol = burgers::trace_solution(p0, t, &cp)?;
        traj.push(t, Profile::new(*p0.grid(), sol.rho).map_err(|_| Error::BlowUp { time: t })?)?;
    }
    Ok(traj)
}

/// Map a solution `ρ̃(·, τ)` of the `γ = 0` problem to the solution of the
/// confined problem: `ρ(x, t) = s ρ̃(s x, τ)` with `s = √(1 + 2γτ)` and
/// `t = ln(1 + 2γτ)/(2γ)`. Samples needed outside the grid are taken as zero.
pub fn rescale_gamma_to_zero(p: &Profile, tau: f64, gamma: f64) -> Result<(Profile, f64)> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if !(tau >= 0.0) {
        return Err(invalid("tau", "must be nonnegative"));
    }
    if tau == 0.0 {
        return Ok((p.clone(), 0.0));
    }
    let arg = 2.0 * gamma * tau;
    let s = (1.0 + arg).sqrt();
    let t = arg.ln_1p() / (2.0 * gamma);
    let g = *p.grid();
    let values = g.nodes().into_iter().map(|x| s * p.interpolate(s * x)).collect();
    Ok((Profile::new(g, values)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial;
    use crate::operators::heat_step;
    use std::f64::consts::{E, PI};

    fn p15() -> PhysicsParams {
        PhysicsParams::new(1.5, 1.0, 0.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(PhysicsParams::new(2.1, 1.0, 0.0).is_err());
        assert!(PhysicsParams::new(1.0, 0.0, 0.0).is_err());
        assert!(PhysicsParams::new(1.0, 1.0, -1.0).is_err());
        assert!(SolverConfig::new(0.0, 1.0).is_err());
        assert!(SolverConfig::new(0.5, 0.1).is_err());
        assert_eq!(SolverConfig::new(0.1, 0.35).unwrap().steps().0, 4);
    }

    #[test]
    fn flux_of_constant_vanishes() {
        let g = Grid::new(64, 4.0).unwrap();
        let c = Profile::from_fn(g, |_| 0.7).unwrap();
        let f = nonlinear_flux(&c, &p15(), true).unwrap();
        assert!(f.lp_norm(f64::INFINITY).unwrap() < 1e-15);
        let conf = PhysicsParams::new(1.5, 1.0, 1.0).unwrap();
        assert!(nonlinear_flux(&c, &conf, true).is_err());
    }

    #[test]
    fn flux_of_semicircle_matches_finite_difference() {
        let g = Grid::new(4096, 8.0).unwrap();
        let p = initial::semicircle(g);
        let f = nonlinear_flux(&p, &p15(), false).unwrap();
        // ρHρ = ρ x/(2π) on the support
        let prod = |x: f64| (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI) * x / (2.0 * PI);
        let h = 1e-4;
        for &x in &[-1.5, -0.5, 0.0, 0.25, 1.0, 1.5] {
            let j = ((x + 8.0) / g.dx()).round() as usize;
            let xj = g.node(j);
            let fd = (prod(xj + h) - prod(xj - h)) / (2.0 * h);
            assert!((f.values()[j] - fd).abs() < 5e-3, "{x}: {} vs {fd}", f.values()[j]);
        }
        assert!(f.mass().abs() < 1e-10);
    }

    #[test]
    fn linear_step_equals_heat() {
        let g = Grid::new(128, 4.0).unwrap();
        let p = initial::gaussian(g, 0.5, 1.0).unwrap();
        let mut cfg = SolverConfig::new(0.3, 0.3).unwrap();
        cfg.nonlinear = false;
        let prop = HeatPropagator::new(g, &p15()).unwrap();
        let a = step_direct(&p, 0.3, &p15(), &cfg).unwrap();
        let b = heat_step(&p, 0.3, &prop).unwrap();
        assert!(a.linf_distance(&b).unwrap() < 1e-12);
        let c = step_splitting(&p, 0.3, &p15(), &cfg).unwrap();
        assert!(c.linf_distance(&b).unwrap() < 1e-12);
    }

    #[test]
    fn strong_viscosity_dissipates() {
        let g = Grid::new(256, 8.0).unwrap();
        let p = initial::gaussian(g, 0.5, 1.0).unwrap();
        let params = PhysicsParams::new(2.0, 10.0, 0.0).unwrap();
        let cfg = SolverConfig::new(0.01, 0.01).unwrap();
        let out = step_direct(&p, 0.01, &params, &cfg).unwrap();
        assert!(out.max() < p.max());
        assert!((out.mass() - p.mass()).abs() < 1e-10);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = Grid::new(256, 8.0).unwrap();
        let p = initial::gaussian(g, 0.5, 1.0).unwrap();
        let cfg = SolverConfig::new(0.5, 1.0).unwrap();
        assert!(matches!(step_direct(&p, 0.5, &p15(), &cfg), Err(Error::Stability { .. })));
        assert!(matches!(run(&p, &p15(), &cfg), Err(Error::Stability { .. })));
    }

    #[test]
    fn splitting_rejects_negative_input() {
        let g = Grid::new(64, 4.0).unwrap();
        let p = initial::shifted(&initial::semicircle(g), -0.01);
        let cfg = SolverConfig::new(0.01, 0.01).unwrap();
        assert!(matches!(step_splitting(&p, 0.01, &p15(), &cfg), Err(Error::NegativeInput { .. })));
    }

    #[test]
    fn dyson_substep_basics() {
        let g = Grid::new(512, 8.0).unwrap();
        let p = initial::smoothed_semicircle(g, 0.2, 0.0).unwrap();
        let cfg = SolverConfig::new(0.05, 0.05).unwrap();
        assert_eq!(dyson_step(&p, 0.0, &cfg).unwrap(), p);
        let out = dyson_step(&p, 0.05, &cfg).unwrap();
        assert!((out.mass() - p.mass()).abs() < 1e-8);
        assert!((out.lp_norm(1.0).unwrap() - p.lp_norm(1.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn run_records_and_is_deterministic() {
        let g = Grid::new(256, 8.0).unwrap();
        let p = initial::semicircle(g);
        let cfg0 = SolverConfig::new(0.01, 0.0).unwrap();
        assert_eq!(run(&p, &p15(), &cfg0).unwrap().len(), 1);
        let cfg = SolverConfig::new(0.01, 0.1).unwrap().with_record_every(3);
        let a = run(&p, &p15(), &cfg).unwrap();
        let b = run(&p, &p15(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!((a.last().0 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn alpha_two_run_has_decreasing_max() {
        let g = Grid::new(512, 16.0).unwrap();
        let p = initial::semicircle(g);
        let params = PhysicsParams::new(2.0, 1.0, 0.0).unwrap();
        for dt in [0.01, 0.005] {
            let cfg = SolverConfig::new(dt, 2.0).unwrap();
            let traj = run(&p, &params, &cfg).unwrap();
            let maxes: Vec<f64> = traj.profiles().iter().map(|q| q.max()).collect();
            assert!(maxes.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn unsupported_confinement() {
        let g = Grid::new(64, 4.0).unwrap();
        let p = initial::semicircle(g);
        let params = PhysicsParams::new(1.5, 1.0, 1.0).unwrap();
        let cfg = SolverConfig::new(0.01, 0.1).unwrap();
        assert!(matches!(run(&p, &params, &cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rescaling_time_map() {
        let g = Grid::new(256, 8.0).unwrap();
        let p = initial::gaussian(g, 0.5, 1.0).unwrap();
        let (q, t) = rescale_gamma_to_zero(&p, 0.0, 0.5).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(q, p);
        let (q, t) = rescale_gamma_to_zero(&p, E - 1.0, 0.5).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        assert!((q.mass() - 1.0).abs() < 1e-6);
    }
}
