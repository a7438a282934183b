//! Exact solution of the critical case `α = 1` by complex characteristics.
//!
//! With `f₀ = Rρ₀ − iPρ₀` the Stieltjes transform of the data, points of the
//! upper half plane travel along
//!
//! ```text
//! Z(w, t) = a w + b f₀(w) − iν c,   a = e^{−γt}, b = sinh(γt)/γ, c = (1 − e^{−γt})/γ
//! ```
//!
//! and the solution on the real line is read off the preimage `w_x` of each
//! real `x`: `ρ(x, t) = Pρ₀(w_x) e^{γt}`, `Hρ(x, t) = Rρ₀(w_x) e^{γt}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::Profile;
use crate::operators::{Stieltjes, UpperHalfPoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const MAX_DOUBLINGS: usize = 200;

/// Viscosity, confinement and the lower bound `ρ₀ ≥ −μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharParams {
    pub nu: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl CharParams {
    /// `ν = 0` is accepted (inviscid transport of strictly positive data) only
    /// together with `μ = 0`.
    pub fn new(nu: f64, gamma: f64, mu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(invalid("nu", "must be nonnegative"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", "must be nonnegative"));
        }
        if !(mu >= 0.0) || (mu >= nu && !(nu == 0.0 && mu == 0.0)) {
            return Err(invalid("mu", format!("need 0 <= mu < nu, got mu = {mu}, nu = {nu}")));
        }
        Ok(Self { nu, gamma, mu })
    }
}

/// Guaranteed lifespan `T = ln(2ν/μ − 1)/γ`; infinite when `μ = 0` or `γ = 0`.
pub fn horizon(cp: &CharParams) -> Result<f64> {
    if cp.mu >= cp.nu && cp.mu > 0.0 {
        return Err(invalid("mu", "need mu < nu"));
    }
    if cp.mu == 0.0 || cp.gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((2.0 * cp.nu / cp.mu - 1.0).ln() / cp.gamma)
}

/// `a = e^{−γt}`, `b = sinh(γt)/γ`, `c = (1 − e^{−γt})/γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t: f64,
}

impl CharCoeffs {
    pub fn new(t: f64, gamma: f64) -> Self {
        let x = gamma * t;
        if x < 1e-6 {
            let x2 = x * x;
            Self {
                a: (-x).exp(),
                b: t * (1.0 + x2 / 6.0),
                c: t * (1.0 - x / 2.0 + x2 / 6.0),
                t,
            }
        } else {
            Self {
                a: (-x).exp(),
                b: x.sinh() / gamma,
                c: -(-x).exp_m1() / gamma,
                t,
            }
        }
    }
}

/// Characteristic map at a fixed time for fixed data.
#[derive(Debug, Clone)]
pub struct Characteristics {
    f0: Stieltjes,
    coeffs: CharCoeffs,
    nu: f64,
}

impl Characteristics {
    pub fn new(p0: &Profile, t: f64, cp: &CharParams) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(invalid("t", "must be nonnegative"));
        }
        let horizon = horizon(cp)?;
        if t >= horizon {
            return Err(Error::HorizonExceeded { t, horizon });
        }
        Ok(Self {
            f0: Stieltjes::new(p0),
            coeffs: CharCoeffs::new(t, cp.gamma),
            nu: cp.nu,
        })
    }

    pub fn coeffs(&self) -> &CharCoeffs {
        &self.coeffs
    }

    pub fn stieltjes(&self) -> &Stieltjes {
        &self.f0
    }

    /// `Z(w, t)`.
    pub fn forward(&self, w: Complex64) -> Complex64 {
        let k = &self.coeffs;
        k.a * w + k.b * self.f0.eval(w) - I * (self.nu * k.c)
    }

    /// `(Z(w), ∂_w Z(w))`.
    pub fn forward_with_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let k = &self.coeffs;
        let (f, df) = self.f0.eval_with_derivative(w);
        (k.a * w + k.b * f - I * (self.nu * k.c), k.a + k.b * df)
    }

    /// Jacobian `|∂_w Z|² = (a + b∂ₓR)² + (b∂ₓP)²`.
    pub fn jacobian(&self, w: Complex64) -> f64 {
        self.forward_with_derivative(w).1.norm_sqr()
    }

    /// Solve `Z(w) = z` by damped Newton from `guess`, falling back to the
    /// nested monotone root-finds when Newton stalls.
    pub fn invert(&self, z: Complex64, guess: Option<Complex64>) -> Result<Complex64> {
        let start = guess.unwrap_or_else(|| self.initial_guess(z));
        if let Some(w) = self.newton(z, start) {
            return Ok(w);
        }
        if guess.is_some() {
            if let Some(w) = self.newton(z, self.initial_guess(z)) {
                return Ok(w);
            }
        }
        self.invert_bracketing(z)
    }

    fn initial_guess(&self, z: Complex64) -> Complex64 {
        let k = &self.coeffs;
        let w = (z + I * (self.nu * k.c)) / k.a;
        Complex64::new(w.re, w.im.max(1e-3 + self.nu * k.c))
    }

    fn tolerance(z: Complex64) -> f64 {
        1e-12 * (1.0 + z.norm())
    }

    fn newton(&self, z: Complex64, start: Complex64) -> Option<Complex64> {
        let tol = Self::tolerance(z);
        let mut w = start;
        if !(w.im > 0.0) {
            return None;
        }
        let (mut zw, mut dz) = self.forward_with_derivative(w);
        let mut res = (zw - z).norm();
        for _ in 0..100 {
            if res <= tol {
                return Some(w);
            }
            if dz.norm() == 0.0 || !dz.norm().is_finite() {
                return None;
            }
            let step = (zw - z) / dz;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = w - step * lambda;
                if cand.im > 0.0 {
                    let (zc, dc) = self.forward_with_derivative(cand);
                    let rc = (zc - z).norm();
                    if rc.is_finite() && rc < (1.0 - 1e-4 * lambda) * res {
                        w = cand;
                        zw = zc;
                        dz = dc;
                        res = rc;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return if res <= 1e3 * tol { Some(w) } else { None };
            }
        }
        (res <= tol).then_some(w)
    }

    /// `(Z₁, Z₂)` at `w = x + iy`.
    pub fn components(&self, x: f64, y: f64) -> (f64, f64) {
        let z = self.forward(Complex64::new(x, y));
        (z.re, z.im)
    }

    /// For fixed `x`, the unique `y > 0` with `Z₂(x, y) = target`.
    pub fn solve_imaginary(&self, x: f64, target: f64) -> Result<f64> {
        let k = &self.coeffs;
        let phi = |y: f64| self.components(x, y).1 - target;
        let mut hi = (target / k.a + self.nu * k.c / k.a + 1.0).max(1e-3);
        let mut count = 0;
        while phi(hi) <= 0.0 {
            hi *= 2.0;
            count += 1;
            if count > MAX_DOUBLINGS {
                return Err(Error::BracketFailure {
                    target: format!("Z2 = {target} at x = {x}"),
                    stage: "imaginary part, upper end",
                });
            }
        }
        let mut lo = hi;
        count = 0;
        while phi(lo) >= 0.0 {
            lo *= 0.5;
            count += 1;
            if count > MAX_DOUBLINGS {
                return Err(Error::BracketFailure {
                    target: format!("Z2 = {target} at x = {x}"),
                    stage: "imaginary part, lower end",
                });
            }
        }
        Ok(bisect(phi, lo, hi))
    }

    /// Inversion by the two monotone one-dimensional solves: `y(x)` from the
    /// imaginary part, then `x` from the increasing function
    /// `q(x) = Z₁(x, y(x))`.
    pub fn invert_bracketing(&self, z: Complex64) -> Result<Complex64> {
        let k = &self.coeffs;
        let target_im = z.im.max(0.0);
        let q = |x: f64| -> Result<f64> {
            let y = self.solve_imaginary(x, target_im)?;
            Ok(self.components(x, y).0 - z.re)
        };
        let x0 = z.re / k.a;
        let mut width = 1.0;
        let mut count = 0;
        let (mut lo, mut hi) = (x0 - width, x0 + width);
        while q(lo)? > 0.0 || q(hi)? < 0.0 {
            width *= 2.0;
            lo = x0 - width;
            hi = x0 + width;
            count += 1;
            if count > MAX_DOUBLINGS {
                return Err(Error::BracketFailure {
                    target: format!("Z1 = {}", z.re),
                    stage: "real part",
                });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if q(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        let y = self.solve_imaginary(x, target_im)?;
        let w = Complex64::new(x, y);
        // polish the bisection answer
        Ok(self.newton(z, w).unwrap_or(w))
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Z(w, t)` for data `p0`.
pub fn forward_map(w: UpperHalfPoint, t: f64, p0: &Profile, cp: &CharParams) -> Result<Complex64> {
    let w = UpperHalfPoint::new(w.re, w.im)?;
    Ok(Characteristics::new(p0, t, cp)?.forward(w.to_complex()))
}

/// The preimage of `z ∈ ℂ̄₊` under `Z(·, t)`.
pub fn invert_map(z: Complex64, t: f64, p0: &Profile, cp: &CharParams) -> Result<UpperHalfPoint> {
    if !(z.im >= 0.0) {
        return Err(invalid("z", "must lie in the closed upper half plane"));
    }
    let ch = Characteristics::new(p0, t, cp)?;
    let w = ch
        .invert(z, None)
        .map_err(|e| annotate(e, z.re))?;
    UpperHalfPoint::new(w.re, w.im).map_err(|_| Error::InversionFailed {
        x: z.re,
        reason: "preimage left the upper half plane".into(),
    })
}

fn annotate(e: Error, x: f64) -> Error {
    match e {
        Error::BracketFailure { .. } | Error::HorizonExceeded { .. } => e,
        other => Error::InversionFailed { x, reason: other.to_string() },
    }
}

/// Real-line solution recovered from the characteristics at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSolution {
    pub x_values: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub preimages: Vec<UpperHalfPoint>,
}

/// Invert the characteristics at every point of `xs` (in order, each Newton
/// solve warm-started from its neighbour).
pub fn trace_at(p0: &Profile, xs: &[f64], t: f64, cp: &CharParams) -> Result<TraceSolution> {
    let ch = Characteristics::new(p0, t, cp)?;
    let growth = (cp.gamma * t).exp();
    let mut rho = Vec::with_capacity(xs.len());
    let mut u = Vec::with_capacity(xs.len());
    let mut pre = Vec::with_capacity(xs.len());
    let mut guess = None;
    for &x in xs {
        let z = Complex64::new(x, 0.0);
        let w = ch.invert(z, guess).map_err(|e| annotate(e, x))?;
        if !(w.im > 0.0) {
            return Err(Error::InversionFailed { x, reason: "preimage on the real axis".into() });
        }
        let f = ch.stieltjes().eval(w);
        rho.push(-f.im * growth);
        u.push(f.re * growth);
        pre.push(UpperHalfPoint { re: w.re, im: w.im });
        guess = Some(w);
    }
    Ok(TraceSolution {
        x_values: xs.to_vec(),
        rho,
        u,
        t,
        preimages: pre,
    })
}

/// [`trace_at`] on the grid nodes of `p0`.
pub fn trace_solution(p0: &Profile, t: f64, cp: &CharParams) -> Result<TraceSolution> {
    if t == 0.0 {
        let g = p0.grid();
        return Ok(TraceSolution {
            x_values: g.nodes(),
            rho: p0.values().to_vec(),
            u: crate::operators::hilbert_spectral(p0).into_values(),
            t,
            preimages: g.nodes().into_iter().map(UpperHalfPoint::boundary).collect(),
        });
    }
    trace_at(p0, &p0.grid().nodes(), t, cp)
}

/// `∫_ℝ ρ(x, t) dx` for the exact solution, with `x = s·tan θ` and the
/// midpoint rule in `θ`, so the `1/x²` tails are integrated too.
pub fn trace_mass(p0: &Profile, t: f64, cp: &CharParams, scale: f64, points: usize) -> Result<f64> {
    if !(scale > 0.0) || points < 2 {
        return Err(invalid("points", "need a positive scale and at least two points"));
    }
    let h = PI / points as f64;
    let thetas: Vec<f64> = (0..points).map(|k| -PI / 2.0 + (k as f64 + 0.5) * h).collect();
    let xs: Vec<f64> = thetas.iter().map(|th| scale * th.tan()).collect();
    let sol = trace_at(p0, &xs, t, cp)?;
    Ok(thetas
        .iter()
        .zip(&sol.rho)
        .map(|(th, r)| r * scale / th.cos().powi(2) * h)
        .sum())
}

/// The long-time profile in closed form,
///
/// ```text
/// ρ∞(x) = (√(√([γ²x² − ν² − 2γ]² + 4γ²x²ν²) − [γ²x² − ν² − 2γ]) − √2 ν) / (√2 π),
/// ```
///
/// equal to `(Im√((γx + iν)² − 2γ) − ν)/π`. For unit-mass data the actual
/// limit is [`steady_state_with_mass`] with `m = 1`.
pub fn steady_state(x: f64, nu: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    let a = gamma * gamma * x * x - nu * nu - 2.0 * gamma;
    let inner = (a * a + 4.0 * gamma * gamma * x * x * nu * nu).sqrt() - a;
    Ok((inner.max(0.0).sqrt() - 2f64.sqrt() * nu) / (2f64.sqrt() * PI))
}

/// Long-time limit of the confined problem for data of mass `m`:
/// `Im√((γx + iν)² − 2γm/π) − ν`.
pub fn steady_state_with_mass(x: f64, nu: f64, gamma: f64, mass: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    let u = Complex64::new(gamma * x, nu);
    let r = (u * u - 2.0 * gamma * mass / PI).sqrt();
    Ok(r.im.abs() - nu)
}

/// Limit of `e^{−γt} Z^{-1}(z, t)` as `t → ∞` for unit-mass data:
/// `w = 1/(γπz + iνπ − √((γπz + iνπ)² − 2γπ))`, with the root chosen so that
/// `Im w > 0`.
pub fn longtime_limit_w(z: Complex64, nu: f64, gamma: f64) -> Result<Complex64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    if !(z.im >= 0.0) {
        return Err(invalid("z", "must lie in the closed upper half plane"));
    }
    let u = gamma * PI * z + I * (nu * PI);
    let radicand = u * u - 2.0 * gamma * PI;
    let r = radicand.sqrt();
    let principal = 1.0 / (u - r);
    let flipped = 1.0 / (u + r);
    let on_cut = radicand.im == 0.0 && radicand.re < 0.0;
    if on_cut && principal.im > 0.0 && flipped.im > 0.0 {
        return Err(Error::InversionFailed {
            x: z.re,
            reason: "square-root branch is ambiguous on the branch cut".into(),
        });
    }
    if principal.im > 0.0 {
        Ok(principal)
    } else if flipped.im > 0.0 {
        Ok(flipped)
    } else {
        Err(Error::InversionFailed {
            x: z.re,
            reason: "no root with positive imaginary part".into(),
        })
    }
}
