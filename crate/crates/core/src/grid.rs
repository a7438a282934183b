//! Uniform periodic grid on `[-L, L)`, sampled profiles and their Fourier
//! coefficients.
//!
//! Transform convention: a profile with samples `ρ_j = ρ(x_j)` is written as
//!
//! ```text
//! ρ(x_j) = Σ_k c_k exp(i ξ_k x_j),   ξ_k = π k / L,   k = -n/2 .. n/2-1
//! ```
//!
//! so `c_0` is the mean value `(1/2L) ∫ρ dx` and `cos(πx/L)` has
//! `c_{±1} = 1/2`. Every Fourier multiplier in the crate assumes this scaling.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized complex FFT of `buf` in place.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Uniform grid with `n_points` nodes `x_j = -L + j dx` on the torus `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n_points: usize, half_length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half_length must be positive, got {half_length}"
            )));
        }
        Ok(Self {
            n_points,
            half_length,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Signed integer wavenumber stored at FFT slot `index`.
    pub fn wavenumber(&self, index: usize) -> i64 {
        let n = self.n_points;
        if index < n / 2 {
            index as i64
        } else {
            index as i64 - n as i64
        }
    }

    /// Physical frequency `ξ = π k / L` at FFT slot `index`.
    pub fn frequency(&self, index: usize) -> f64 {
        PI * self.wavenumber(index) as f64 / self.half_length
    }

    /// FFT slot holding wavenumber `k` (taken modulo `n`).
    pub fn slot(&self, k: i64) -> usize {
        k.rem_euclid(self.n_points as i64) as usize
    }

    /// Largest resolved frequency `π n / (2L)`.
    pub fn max_frequency(&self) -> f64 {
        PI * (self.n_points / 2) as f64 / self.half_length
    }

    /// Slot index of the unpaired Nyquist mode `k = -n/2`.
    pub fn nyquist_slot(&self) -> usize {
        self.n_points / 2
    }
}

/// Real samples of a density on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(invalid(
                "values",
                format!(
                    "length {} does not match grid size {}",
                    values.len(),
                    grid.n_points()
                ),
            ));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid("values", format!("non-finite sample at index {j}")));
        }
        Ok(Self { grid, values })
    }

    /// Construction without the finiteness check; used by solvers that test
    /// for blow-up themselves.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Trapezoid (equivalently, periodic rectangle) quadrature of `ρ`.
    pub fn mass(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `‖ρ‖_{L^q}` for `q ≥ 1`; `q = ∞` gives `max |ρ|`.
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        if q.is_nan() || q < 1.0 {
            return Err(invalid("q", format!("exponent must be >= 1, got {q}")));
        }
        Ok(lp_norm_unchecked(&self.values, self.grid.dx(), q))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// `self - other`, pointwise.
    pub fn difference(&self, other: &Profile) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `max_j |self_j - other_j|`.
    pub fn linf_distance(&self, other: &Profile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `dx Σ |self_j - other_j|`.
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.dx()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Four-point Lagrange interpolation of the samples, treating the profile
    /// as a function on the line that vanishes outside `[-L, L)`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        let n = self.grid.n_points() as i64;
        let s = (x + self.grid.half_length()) / dx;
        if !(s > -1.0 && s < n as f64) {
            return 0.0;
        }
        let j = s.floor() as i64;
        let u = s - j as f64;
        let sample = |i: i64| -> f64 {
            if (0..n).contains(&i) {
                self.values[i as usize]
            } else {
                0.0
            }
        };
        let (fm, f0, f1, f2) = (sample(j - 1), sample(j), sample(j + 1), sample(j + 2));
        let wm = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let w0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let w1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let w2 = (u + 1.0) * u * (u - 1.0) / 6.0;
        wm * fm + w0 * f0 + w1 * f1 + w2 * f2
    }
}

pub(crate) fn lp_norm_unchecked(values: &[f64], dx: f64, q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if q == 1.0 {
        dx * values.iter().map(|v| v.abs()).sum::<f64>()
    } else if q == 2.0 {
        (dx * values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    } else {
        (dx * values.iter().map(|v| v.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// Fourier coefficients of a [`Profile`], stored in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(invalid("coeffs", "length does not match grid"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficients in FFT slot order (slot `i` holds `grid.wavenumber(i)`).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of integer wavenumber `k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.slot(k)]
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        let slot = self.grid.slot(k);
        self.coeffs[slot] = value;
    }

    /// Multiply slot-wise by `m(slot)`.
    pub fn apply(&mut self, m: impl Fn(usize) -> Complex64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(i);
        }
    }

    pub fn apply_real(&mut self, m: impl Fn(usize) -> f64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c *= m(i);
        }
    }

    /// Zero every mode with `|k| > n/3` (the 2/3 rule).
    pub fn dealias(&mut self) {
        let cutoff = (self.grid.n_points() / 3) as i64;
        for i in 0..self.coeffs.len() {
            if self.grid.wavenumber(i).abs() > cutoff {
                self.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn to_physical(&self) -> Profile {
        to_physical(self)
    }
}

/// Discrete Fourier coefficients, normalized so that slot 0 is the mean.
pub fn to_spectral(p: &Profile) -> SpectralField {
    let grid = *p.grid();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = p.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, false).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    for (i, c) in buf.iter_mut().enumerate() {
        // x_0 = -L contributes the phase exp(-iξ_k L) = (-1)^k
        let sign = if grid.wavenumber(i) % 2 == 0 { 1.0 } else { -1.0 };
        *c *= sign * inv_n;
    }
    SpectralField { grid, coeffs: buf }
}

/// Exact inverse of [`to_spectral`]; the imaginary residue is discarded.
pub fn to_physical(s: &SpectralField) -> Profile {
    let grid = *s.grid();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if grid.wavenumber(i) % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    plan(n, true).process(&mut buf);
    Profile::from_raw(grid, buf.into_iter().map(|c| c.re).collect())
}

/// Periodic convolution with a discrete Gaussian of standard deviation `h`,
/// truncated at `6h` and renormalized to unit discrete mass.
pub fn mollify(p: &Profile, h: f64) -> Result<Profile> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("mollifier width must be positive, got {h}")));
    }
    let grid = *p.grid();
    let n = grid.n_points();
    let dx = grid.dx();
    let reach = ((6.0 * h / dx).ceil() as usize).min(n / 2 - 1);
    let mut kernel: Vec<f64> = (0..=reach)
        .map(|m| {
            let x = m as f64 * dx;
            (-0.5 * (x / h).powi(2)).exp()
        })
        .collect();
    let total = dx * (kernel[0] + 2.0 * kernel[1..].iter().sum::<f64>());
    for w in kernel.iter_mut() {
        *w /= total;
    }
    let src = p.values();
    let out = (0..n)
        .map(|j| {
            let mut acc = kernel[0] * src[j];
            for (m, &w) in kernel.iter().enumerate().skip(1) {
                acc += w * (src[(j + m) % n] + src[(j + n - m) % n]);
            }
            acc * dx
        })
        .collect();
    Ok(Profile::from_raw(grid, out))
}
