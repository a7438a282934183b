//! Duhamel form and Picard iteration for `1 < α ≤ 2`:
//!
//! ```text
//! S(ρ)(t) = G_α(t) ∗ ρ₀ − ∫₀ᵗ ∂x G_α(t − s) ∗ (ρHρ)(s) ds
//! ```
//!
//! together with the weighted `X_T` norm, the smallness functional and decay
//! exponent fits.

use num_complex::Complex64;

use crate::diagnostics::fit_powerlaw;
use crate::error::{invalid, Error, Result};
use crate::evolve::{self, PhysicsParams, SolverConfig, Trajectory};
use crate::grid::{lp_norm_unchecked, to_physical, to_spectral, Profile, SpectralField};
use crate::operators::{derivative, hilbert_in_place, HeatPropagator};

fn check_subcritical(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(invalid("alpha", format!("mild solutions need alpha in (1, 2], got {alpha}")));
    }
    Ok(())
}

/// Mesh `t_j = T (j/m)^{α/(α−1)}`, `j = 0..=m`, clustered at `t = 0`.
pub fn graded_mesh(t_final: f64, m: usize, alpha: f64) -> Result<Vec<f64>> {
    check_subcritical(alpha)?;
    if !(t_final > 0.0) || m == 0 {
        return Err(invalid("mesh", "need T > 0 and at least one interval"));
    }
    let p = alpha / (alpha - 1.0);
    let mut mesh: Vec<f64> = (0..=m).map(|j| t_final * (j as f64 / m as f64).powf(p)).collect();
    mesh[m] = t_final;
    Ok(mesh)
}

/// `max(sup ‖f‖_{L^{1/(α−1)}}, sup t^{(α−1)/(2α)} ‖f‖_{L^{2/(α−1)}})` over the
/// recorded times `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XTNorm {
    pub sup_base: f64,
    pub sup_weighted: f64,
    pub t_final: f64,
}

impl XTNorm {
    pub fn value(&self) -> f64 {
        self.sup_base.max(self.sup_weighted)
    }
}

fn xt_of(times: &[f64], fields: &[&[f64]], dx: f64, alpha: f64) -> XTNorm {
    let q1 = 1.0 / (alpha - 1.0);
    let q2 = 2.0 / (alpha - 1.0);
    let w = (alpha - 1.0) / (2.0 * alpha);
    let mut out = XTNorm {
        sup_base: 0.0,
        sup_weighted: 0.0,
        t_final: *times.last().unwrap_or(&0.0),
    };
    for (t, f) in times.iter().zip(fields) {
        if *t <= 0.0 {
            continue;
        }
        out.sup_base = out.sup_base.max(lp_norm_unchecked(f, dx, q1));
        out.sup_weighted = out.sup_weighted.max(t.powf(w) * lp_norm_unchecked(f, dx, q2));
    }
    out
}

pub fn xt_norm(traj: &Trajectory, alpha: f64) -> Result<XTNorm> {
    check_subcritical(alpha)?;
    let fields: Vec<&[f64]> = traj.profiles().iter().map(|p| p.values()).collect();
    Ok(xt_of(traj.times(), &fields, traj.grid().dx(), alpha))
}

/// `‖a − b‖_{X_T}` for trajectories on the same mesh.
pub fn xt_distance(a: &Trajectory, b: &Trajectory, alpha: f64) -> Result<f64> {
    check_subcritical(alpha)?;
    if a.times() != b.times() {
        return Err(invalid("trajectory", "time meshes differ"));
    }
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let diffs: Vec<Vec<f64>> = a
        .profiles()
        .iter()
        .zip(b.profiles())
        .map(|(p, q)| p.values().iter().zip(q.values()).map(|(x, y)| x - y).collect())
        .collect();
    let fields: Vec<&[f64]> = diffs.iter().map(|d| d.as_slice()).collect();
    Ok(xt_of(a.times(), &fields, a.grid().dx(), alpha).value())
}

/// Weights of the product rule: `∫₀ʰ e^{−λu}(u/h) du = h·A(z)` and
/// `∫₀ʰ e^{−λu}(1 − u/h) du = h·B(z)` with `z = λh`.
fn product_weights(z: f64) -> (f64, f64) {
    if z < 0.5 {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut term = 1.0; // (−z)^k / k!
        for k in 0..25 {
            let kf = k as f64;
            a += term / (kf + 2.0);
            b += term / ((kf + 1.0) * (kf + 2.0));
            term *= -z / (kf + 1.0);
        }
        (a, b)
    } else {
        let e = (-z).exp();
        let a = (1.0 - e * (1.0 + z)) / (z * z);
        let b = -(-z).exp_m1() / z - a;
        (a, b)
    }
}

fn product_spectrum(p: &Profile) -> SpectralField {
    let s = to_spectral(p);
    let mut hs = s.clone();
    hilbert_in_place(&mut hs);
    let h = to_physical(&hs);
    let prod: Vec<f64> = p.values().iter().zip(h.values()).map(|(a, b)| a * b).collect();
    let mut out = to_spectral(&Profile::from_raw(*p.grid(), prod));
    out.dealias();
    out
}

/// Evaluate `S(ρ)` on the time mesh of `traj`.
///
/// The linear part is exact. In the integral the product `ρHρ` is
/// interpolated linearly in time on each mesh interval and the heat factor is
/// integrated exactly against it.
pub fn duhamel_apply(traj: &Trajectory, p0: &Profile, params: &PhysicsParams) -> Result<Trajectory> {
    check_subcritical(params.alpha)?;
    if traj.grid() != p0.grid() {
        return Err(Error::GridMismatch);
    }
    if traj.times()[0] != 0.0 {
        return Err(invalid("trajectory", "time mesh must start at t = 0"));
    }
    let grid = *p0.grid();
    let n = grid.n_points();
    let prop = HeatPropagator::new(grid, params)?;
    let lambda = prop.symbol();
    let times = traj.times();
    let products: Vec<SpectralField> = traj.profiles().iter().map(product_spectrum).collect();
    let rho0 = to_spectral(p0);
    let nyq = grid.nyquist_slot();
    let mut out = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..j {
            let h = times[i + 1] - times[i];
            let d = t - times[i + 1];
            let (left, right) = (products[i].coeffs(), products[i + 1].coeffs());
            for k in 0..n {
                let (wa, wb) = product_weights(lambda[k] * h);
                let decay = (-lambda[k] * d).exp();
                acc[k] += decay * h * (wa * left[k] + wb * right[k]);
            }
        }
        let mut s = rho0.clone();
        let coeffs = s.coeffs_mut();
        for k in 0..n {
            let deriv = if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.frequency(k))
            };
            coeffs[k] = coeffs[k] * (-lambda[k] * t).exp() - deriv * acc[k];
        }
        out.push(to_physical(&s));
    }
    Trajectory::from_parts(times.to_vec(), out)
}

/// History of a Picard iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    /// `sup_t t^{(α−1)/(2α)} ‖G_α(t) ∗ ρ₀‖_{L^{2/(α−1)}}` on the mesh.
    pub a_measured: f64,
    /// `‖ρ_{k+1} − ρ_k‖_{X_T}` for each iteration.
    pub iterate_gaps: Vec<f64>,
    pub converged: bool,
    /// Largest observed `gap_{k+1}/(a·gap_k)`.
    pub lipschitz_estimate: f64,
}

impl ContractionReport {
    /// Smallness in the sense `a ≤ 0.1/C` with `C` the measured Lipschitz
    /// factor.
    pub fn is_small(&self) -> bool {
        !(self.lipschitz_estimate > 0.0) || self.a_measured <= 0.1 / self.lipschitz_estimate
    }

    pub fn require_small(&self) -> Result<()> {
        if self.is_small() {
            Ok(())
        } else {
            Err(Error::NotSmall {
                a: self.a_measured,
                constant: self.lipschitz_estimate,
            })
        }
    }
}

const DEFAULT_MESH: usize = 64;

/// Picard iteration on the default 64-interval graded mesh.
pub fn picard_solve(
    p0: &Profile,
    params: &PhysicsParams,
    t_final: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(Trajectory, ContractionReport)> {
    let mesh = graded_mesh(t_final, DEFAULT_MESH, params.alpha)?;
    picard_solve_on_mesh(p0, params, &mesh, max_iter, tol)
}

/// Iterate `ρ_{k+1} = S(ρ_k)` from `ρ_0 ≡ 0` until the `X_T` gap drops below
/// `tol`. Three consecutive gap increases abort with [`Error::Divergence`].
pub fn picard_solve_on_mesh(
    p0: &Profile,
    params: &PhysicsParams,
    mesh: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<(Trajectory, ContractionReport)> {
    check_subcritical(params.alpha)?;
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    let grid = *p0.grid();
    let zero = Trajectory::from_parts(mesh.to_vec(), vec![Profile::zeros(grid); mesh.len()])?;
    let a = smallness_on_mesh(p0, params, mesh)?;
    let mut current = zero;
    let mut gaps: Vec<f64> = Vec::new();
    let mut rises = 0;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = duhamel_apply(&current, p0, params)?;
        let gap = xt_distance(&next, &current, params.alpha)?;
        if !gap.is_finite() {
            return Err(Error::Divergence { iterations: gaps.len() + 1 });
        }
        if let Some(&prev) = gaps.last() {
            rises = if gap > prev { rises + 1 } else { 0 };
        }
        gaps.push(gap);
        current = next;
        if gap < tol {
            converged = true;
            break;
        }
        if rises >= 3 {
            return Err(Error::Divergence { iterations: gaps.len() });
        }
    }
    let lipschitz = if a > 0.0 {
        gaps.windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 1e-14 * w[0].max(1e-300))
            .map(|w| w[1] / (a * w[0]))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok((
        current,
        ContractionReport {
            a_measured: a,
            iterate_gaps: gaps,
            converged,
            lipschitz_estimate: lipschitz,
        },
    ))
}

fn weighted_heat_norm(s0: &SpectralField, prop: &HeatPropagator, t: f64, alpha: f64) -> f64 {
    let mut s = s0.clone();
    prop.apply_spectral(&mut s, t);
    let p = to_physical(&s);
    let q = 2.0 / (alpha - 1.0);
    t.powf((alpha - 1.0) / (2.0 * alpha)) * lp_norm_unchecked(p.values(), p.grid().dx(), q)
}

fn smallness_on_mesh(p0: &Profile, params: &PhysicsParams, mesh: &[f64]) -> Result<f64> {
    let prop = HeatPropagator::new(*p0.grid(), params)?;
    let s0 = to_spectral(p0);
    Ok(mesh
        .iter()
        .filter(|t| **t > 0.0)
        .map(|&t| weighted_heat_norm(&s0, &prop, t, params.alpha))
        .fold(0.0, f64::max))
}

/// `sup_{0<t≤T} t^{(α−1)/(2α)} ‖G_α(t) ∗ ρ₀‖_{L^{2/(α−1)}}`, maximized over
/// the graded mesh and then refined locally by golden-section search.
pub fn measure_smallness(p0: &Profile, params: &PhysicsParams, t_final: f64) -> Result<f64> {
    let mesh = graded_mesh(t_final, DEFAULT_MESH, params.alpha)?;
    let prop = HeatPropagator::new(*p0.grid(), params)?;
    let s0 = to_spectral(p0);
    let g = |t: f64| weighted_heat_norm(&s0, &prop, t, params.alpha);
    let vals: Vec<f64> = mesh.iter().map(|&t| if t > 0.0 { g(t) } else { 0.0 }).collect();
    let (jmax, &best) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty mesh");
    if best == 0.0 || jmax == 0 {
        return Ok(best);
    }
    let mut lo = mesh[jmax - 1];
    let mut hi = mesh[(jmax + 1).min(mesh.len() - 1)];
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut top = best;
    for _ in 0..40 {
        let c = hi - r * (hi - lo);
        let d = lo + r * (hi - lo);
        let (gc, gd) = (g(c), g(d));
        top = top.max(gc).max(gd);
        if gc > gd {
            hi = d;
        } else {
            lo = c;
        }
    }
    Ok(top)
}

/// Direct-solver trajectory sampled exactly at the mesh times, with steps no
/// longer than `dt_max`.
pub fn direct_on_mesh(p0: &Profile, params: &PhysicsParams, mesh: &[f64], dt_max: f64) -> Result<Trajectory> {
    if mesh.first() != Some(&0.0) {
        return Err(invalid("mesh", "must start at t = 0"));
    }
    let mut traj = Trajectory::new(0.0, p0.clone());
    let mut p = p0.clone();
    for w in mesh.windows(2) {
        let span = w[1] - w[0];
        let mut cfg = SolverConfig::new(dt_max.min(span), span)?;
        cfg.record_every = usize::MAX;
        p = evolve::run(&p, params, &cfg)?.last().1.clone();
        traj.push(w[1], p.clone())?;
    }
    Ok(traj)
}

/// Norm used for decay fits: `‖∂ˣ^θ ρ‖_{L^q}`.
pub fn derivative_norm(p: &Profile, q: f64, theta: u32) -> Result<f64> {
    if theta > 2 {
        return Err(invalid("theta", "only 0, 1 and 2 are supported"));
    }
    if theta == 0 {
        return p.lp_norm(q);
    }
    derivative(p, theta).lp_norm(q)
}

/// Log-log slope of `‖∂ˣ^θ ρ(t)‖_{L^q}` over the last decade of the run.
pub fn decay_exponent_fit(traj: &Trajectory, q: f64, theta: u32) -> Result<f64> {
    let t_end = traj.last().0;
    decay_exponent_fit_window(traj, q, theta, (t_end / 10.0, t_end))
}

pub fn decay_exponent_fit_window(traj: &Trajectory, q: f64, theta: u32, window: (f64, f64)) -> Result<f64> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, p) in traj.times().iter().zip(traj.profiles()) {
        if *t >= window.0 && *t <= window.1 {
            let v = derivative_norm(p, q, theta)?;
            if !(v > 0.0) {
                return Err(invalid("trajectory", format!("non-positive norm at t = {t}")));
            }
            times.push(*t);
            values.push(v);
        }
    }
    fit_powerlaw(&times, &values, window)
}
