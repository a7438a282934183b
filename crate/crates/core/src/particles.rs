//! Dyson Brownian motion
//!
//! ```text
//! dλ_j = N^{-1/2} dB_j + (πN)^{-1} Σ_{k≠j} dt/(λ_j − λ_k) − γ λ_j dt
//! ```
//!
//! with an Euler-Maruyama stepper guarded by step halving, a drift-implicit
//! stepper for large ensembles, and kernel density estimates for comparison
//! with the mean-field equation.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, Profile};

/// Name of the random number generator recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3), seeded with seed_from_u64";

const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    positions: Vec<f64>,
    time: f64,
    rng_seed: u64,
    rng: ChaCha8Rng,
}

impl ParticleState {
    /// Labels are irrelevant: positions are sorted on entry and must be
    /// pairwise distinct.
    pub fn new(mut positions: Vec<f64>, seed: u64) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("positions", "need at least one particle"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(invalid("positions", "must be finite"));
        }
        positions.sort_by(f64::total_cmp);
        if !is_ordered(&positions) {
            return Err(invalid("positions", "particles must be pairwise distinct"));
        }
        Ok(Self {
            positions,
            time: 0.0,
            rng_seed: seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// `n` i.i.d. samples of `N(0, σ²)`, drawn from the state's own generator.
    pub fn gaussian(n: usize, sigma: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let positions = (0..n)
            .map(|_| sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect::<Vec<f64>>();
        Self::new(positions, seed)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

fn is_ordered(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] > w[0])
}

/// Interaction plus confinement drift.
fn drift(x: &[f64], gamma: f64) -> Vec<f64> {
    let n = x.len();
    let c = 1.0 / (PI * n as f64);
    let mut d = vec![0.0; n];
    for j in 0..n {
        for k in j + 1..n {
            let f = c / (x[j] - x[k]);
            d[j] += f;
            d[k] -= f;
        }
    }
    for (dj, xj) in d.iter_mut().zip(x) {
        *dj -= gamma * xj;
    }
    d
}

fn em_substep(s: &mut ParticleState, dt: f64, gamma: f64, noise: bool, depth: usize) -> Result<()> {
    let n = s.positions.len();
    let d = drift(&s.positions, gamma);
    let amp = (dt / n as f64).sqrt();
    let trial: Vec<f64> = s
        .positions
        .iter()
        .zip(&d)
        .map(|(x, dj)| {
            let kick = if noise {
                let z: f64 = StandardNormal.sample(&mut s.rng);
                amp * z
            } else {
                0.0
            };
            x + dt * dj + kick
        })
        .collect();
    if is_ordered(&trial) {
        s.positions = trial;
        s.time += dt;
        return Ok(());
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::NearCollision {
            halvings: depth,
            time: s.time,
        });
    }
    em_substep(s, 0.5 * dt, gamma, noise, depth + 1)?;
    em_substep(s, 0.5 * dt, gamma, noise, depth + 1)
}

/// One Euler-Maruyama step. A step that breaks the ordering is replaced by
/// two half steps, recursively, at most 20 levels deep.
pub fn sde_step(s: &ParticleState, dt: f64, gamma: f64, noise: bool) -> Result<ParticleState> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let mut out = s.clone();
    em_substep(&mut out, dt, gamma, noise, 0)?;
    Ok(out)
}

/// Drift-implicit step: the confinement and the interaction with the
/// `neighbours` nearest particles on each side are implicit, the remaining
/// pairs explicit. The implicit part is the minimizer of the strictly convex
///
/// ```text
/// ½|λ − μ|² + dt (γ|λ|²/2 − (πN)^{-1} Σ_near log(λ_k − λ_j))
/// ```
///
/// whose logarithmic barrier keeps the particles ordered for any `dt`.
pub fn sde_step_implicit(
    s: &ParticleState,
    dt: f64,
    gamma: f64,
    noise: bool,
    neighbours: usize,
) -> Result<ParticleState> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let n = s.positions.len();
    let kb = neighbours.clamp(1, n.max(2) - 1);
    let c = 1.0 / (PI * n as f64);
    let x = &s.positions;
    let mut out = s.clone();

    // explicit far field: total pair force minus the near band
    let mut far = vec![0.0; n];
    for j in 0..n {
        for k in j + kb + 1..n {
            let f = c / (x[j] - x[k]);
            far[j] += f;
            far[k] -= f;
        }
    }
    let amp = (dt / n as f64).sqrt();
    let mu: Vec<f64> = (0..n)
        .map(|j| {
            let kick = if noise {
                let z: f64 = StandardNormal.sample(&mut out.rng);
                amp * z
            } else {
                0.0
            };
            x[j] + dt * far[j] + kick
        })
        .collect();

    let objective = |l: &[f64]| -> f64 {
        let mut v = 0.0;
        for j in 0..n {
            v += 0.5 * (l[j] - mu[j]).powi(2) + 0.5 * dt * gamma * l[j] * l[j];
            for k in j + 1..(j + kb + 1).min(n) {
                v -= dt * c * (l[k] - l[j]).ln();
            }
        }
        v
    };

    let mut lam = x.clone();
    let mut f_cur = objective(&lam);
    for _ in 0..50 {
        // gradient and banded Hessian (row j holds columns j..=j+kb)
        let mut grad: Vec<f64> = (0..n).map(|j| lam[j] - mu[j] + dt * gamma * lam[j]).collect();
        let mut hess = vec![vec![0.0; kb + 1]; n];
        for row in hess.iter_mut() {
            row[0] = 1.0 + dt * gamma;
        }
        for j in 0..n {
            for k in j + 1..(j + kb + 1).min(n) {
                let d = lam[k] - lam[j];
                let g = dt * c / d;
                grad[j] += g;
                grad[k] -= g;
                let h = dt * c / (d * d);
                hess[j][0] += h;
                hess[k][0] += h;
                hess[j][k - j] -= h;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-14 * (1.0 + lam.iter().map(|l| l * l).sum::<f64>().sqrt()) {
            break;
        }
        let step = banded_cholesky_solve(hess, &grad, kb)?;
        // Newton decrement at rounding level: take the full step and stop
        let dec: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
        if dec <= 1e-15 * (1.0 + f_cur.abs()) {
            let cand: Vec<f64> = lam.iter().zip(&step).map(|(l, d)| l - d).collect();
            if is_ordered(&cand) {
                lam = cand;
            }
            break;
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = lam.iter().zip(&step).map(|(l, d)| l - t * d).collect();
            if is_ordered(&cand) {
                let f_new = objective(&cand);
                if f_new <= f_cur {
                    lam = cand;
                    f_cur = f_new;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
        let dmax = step.iter().fold(0.0f64, |m, d| m.max(d.abs())) * t;
        if dmax < 1e-15 * (1.0 + lam.iter().fold(0.0f64, |m, l| m.max(l.abs()))) {
            break;
        }
    }
    if !is_ordered(&lam) {
        return Err(Error::NearCollision { halvings: 0, time: s.time });
    }
    out.positions = lam;
    out.time += dt;
    Ok(out)
}

/// Solve `A x = b` for a symmetric positive definite band matrix given by its
/// upper band (`a[j][m] = A[j][j+m]`).
fn banded_cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64], kb: usize) -> Result<Vec<f64>> {
    let n = a.len();
    // in place A = Uᵀ U, U stored in the same band layout
    for j in 0..n {
        let lo = j.saturating_sub(kb);
        let mut d = a[j][0];
        for i in lo..j {
            d -= a[i][j - i].powi(2);
        }
        if !(d > 0.0) {
            return Err(Error::InversionFailed {
                x: j as f64,
                reason: "implicit particle system lost positive definiteness".into(),
            });
        }
        let d = d.sqrt();
        a[j][0] = d;
        for m in 1..=kb.min(n - 1 - j) {
            let k = j + m;
            let mut v = a[j][m];
            for i in k.saturating_sub(kb)..j {
                v -= a[i][j - i] * a[i][k - i];
            }
            a[j][m] = v / d;
        }
    }
    let mut y = b.to_vec();
    for j in 0..n {
        for i in j.saturating_sub(kb)..j {
            y[j] -= a[i][j - i] * y[i];
        }
        y[j] /= a[j][0];
    }
    for j in (0..n).rev() {
        for m in 1..=kb.min(n - 1 - j) {
            y[j] -= a[j][m] * y[j + m];
        }
        y[j] /= a[j][0];
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    EulerMaruyama,
    /// Drift-implicit with this many implicit neighbours per side.
    DriftImplicit(usize),
}

/// Advance to `t_end` with uniform steps (the last one shortened).
pub fn simulate(
    s: &ParticleState,
    dt: f64,
    t_end: f64,
    gamma: f64,
    noise: bool,
    stepper: Stepper,
) -> Result<ParticleState> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let steps = ((t_end - s.time) / dt - 1e-9).ceil().max(0.0) as usize;
    let mut cur = s.clone();
    let start = s.time;
    for i in 0..steps {
        let target = (start + (i + 1) as f64 * dt).min(t_end);
        let h = target - cur.time;
        cur = match stepper {
            Stepper::EulerMaruyama => sde_step(&cur, h, gamma, noise)?,
            Stepper::DriftImplicit(k) => sde_step_implicit(&cur, h, gamma, noise, k)?,
        };
        cur.time = target;
    }
    Ok(cur)
}

/// Silverman's rule `1.06 σ̂ N^{-1/5}`.
pub fn silverman_bandwidth(positions: &[f64]) -> Result<f64> {
    let n = positions.len();
    if n < 2 {
        return Err(invalid("positions", "need at least two samples"));
    }
    let mean = positions.iter().sum::<f64>() / n as f64;
    let var = positions.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let h = 1.06 * var.sqrt() * (n as f64).powf(-0.2);
    if !(h > 0.0) {
        return Err(invalid("positions", "samples have zero spread"));
    }
    Ok(h)
}

/// Gaussian kernel density estimate with unit mass.
pub fn empirical_density(s: &ParticleState, grid: Grid, bandwidth: f64) -> Result<Profile> {
    kde(s.positions(), grid, bandwidth)
}

/// Density estimate of the pooled particles of several states, each particle
/// weighted equally.
pub fn pooled_density(states: &[ParticleState], grid: Grid, bandwidth: f64) -> Result<Profile> {
    let all: Vec<f64> = states.iter().flat_map(|s| s.positions().iter().copied()).collect();
    kde(&all, grid, bandwidth)
}

fn kde(positions: &[f64], grid: Grid, bandwidth: f64) -> Result<Profile> {
    if !(bandwidth > 0.0) {
        return Err(invalid("bandwidth", "must be positive"));
    }
    if positions.is_empty() {
        return Err(invalid("positions", "no particles"));
    }
    let n = grid.n_points();
    let dx = grid.dx();
    let period = 2.0 * grid.half_length();
    let reach = ((8.0 * bandwidth / dx).ceil() as usize).min(n / 2 - 1) as i64;
    let weight = 1.0 / positions.len() as f64;
    let mut out = vec![0.0; n];
    let mut bump = Vec::with_capacity(2 * reach as usize + 1);
    for &p in positions {
        // wrap into the periodic cell
        let q = (p + grid.half_length()).rem_euclid(period) - grid.half_length();
        let center = ((q - grid.node(0)) / dx).round() as i64;
        bump.clear();
        let mut total = 0.0;
        for m in -reach..=reach {
            let x = grid.node(0) + (center + m) as f64 * dx;
            let v = (-0.5 * ((x - q) / bandwidth).powi(2)).exp();
            bump.push(v);
            total += v;
        }
        let scale = weight / (total * dx);
        for (i, m) in (-reach..=reach).enumerate() {
            let j = (center + m).rem_euclid(n as i64) as usize;
            out[j] += bump[i] * scale;
        }
    }
    Profile::new(grid, out)
}

/// Equilibrium density of the particle system for `N → ∞`:
/// `γ √((2/(πγ) − x²)₊)`.
pub fn equilibrium_density(x: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    Ok(gamma * (2.0 / (PI * gamma) - x * x).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_particle_equilibrium() {
        let s = ParticleState::new(vec![-1.0, 1.0], 1).unwrap();
        let out = simulate(&s, 1e-3, 20.0, 1.0, false, Stepper::EulerMaruyama).unwrap();
        let gap = out.positions()[1] - out.positions()[0];
        assert!((gap - 1.0 / PI.sqrt()).abs() < 1e-6, "{gap}");
        assert!((out.time() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn two_particle_free_expansion() {
        let s = ParticleState::new(vec![-1.0, 1.0], 1).unwrap();
        let out = simulate(&s, 1e-4, 10.0, 0.0, false, Stepper::EulerMaruyama).unwrap();
        let gap = out.positions()[1] - out.positions()[0];
        let exact = (4.0 + 20.0 / PI).sqrt();
        assert!(((gap - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn seeded_runs_repeat() {
        let s = ParticleState::gaussian(64, 1.0, 7).unwrap();
        let a = simulate(&s, 1e-3, 0.1, 1.0, true, Stepper::EulerMaruyama).unwrap();
        let b = simulate(&s, 1e-3, 0.1, 1.0, true, Stepper::EulerMaruyama).unwrap();
        assert_eq!(a, b);
        let other = ParticleState::gaussian(64, 1.0, 8).unwrap();
        assert_ne!(other.positions(), s.positions());
    }

    #[test]
    fn labels_do_not_matter() {
        let a = ParticleState::new(vec![0.3, -1.0, 2.0, 0.9], 3).unwrap();
        let b = ParticleState::new(vec![2.0, 0.9, -1.0, 0.3], 3).unwrap();
        let ra = simulate(&a, 1e-3, 0.5, 1.0, true, Stepper::EulerMaruyama).unwrap();
        let rb = simulate(&b, 1e-3, 0.5, 1.0, true, Stepper::EulerMaruyama).unwrap();
        assert_eq!(ra, rb);
        assert!(ParticleState::new(vec![1.0, 1.0], 0).is_err());
    }

    #[test]
    fn near_collision_is_reported() {
        // γ dt stays far above 2 after 20 halvings, so every trial flips the order
        let s = ParticleState::new(vec![-1.0, 1.0], 5).unwrap();
        let r = sde_step(&s, 1e9, 1.0, false);
        assert!(matches!(r, Err(Error::NearCollision { halvings: 20, .. })), "{r:?}");
    }

    #[test]
    fn implicit_stepper_matches_equilibrium() {
        let s = ParticleState::new(vec![-1.0, 1.0], 1).unwrap();
        let out = simulate(&s, 0.05, 20.0, 1.0, false, Stepper::DriftImplicit(1)).unwrap();
        let gap = out.positions()[1] - out.positions()[0];
        assert!((gap - 1.0 / PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn implicit_band_solver() {
        // tridiagonal check against a dense solve by hand
        let a = vec![vec![4.0, 1.0], vec![4.0, 1.0], vec![4.0, 0.0]];
        let x = banded_cholesky_solve(a, &[5.0, 6.0, 5.0], 1).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn density_estimates() {
        let g = Grid::new(512, 8.0).unwrap();
        let one = ParticleState::new(vec![0.0], 0).unwrap();
        let p = empirical_density(&one, g, 0.5).unwrap();
        assert!((p.mass() - 1.0).abs() < 1e-12);
        assert!((p.max() - 1.0 / (0.5 * (2.0 * PI).sqrt())).abs() < 1e-3);
        let many = ParticleState::gaussian(300, 1.0, 2).unwrap();
        let h = silverman_bandwidth(many.positions()).unwrap();
        let q = empirical_density(&many, g, h).unwrap();
        assert!((q.mass() - 1.0).abs() < 1e-8);
        assert!(empirical_density(&many, g, 0.0).is_err());
    }

    #[test]
    fn equilibrium_has_unit_mass() {
        let n = 200_000;
        let r = (2.0 / PI).sqrt();
        let h = 2.0 * r / n as f64;
        let m: f64 = (0..n)
            .map(|i| equilibrium_density(-r + (i as f64 + 0.5) * h, 1.0).unwrap() * h)
            .sum();
        assert!((m - 1.0).abs() < 1e-6);
    }
}
