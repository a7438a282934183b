//! Norms, energy, weak-form residual, analyticity and decay fits, plus flat
//! CSV/sidecar report writers.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::evolve::{PhysicsParams, Trajectory};
use crate::grid::{fft_in_place, to_spectral, Profile};
use crate::operators::abs_pow;

/// `‖ρ‖_{Ḣ^θ} = √(2L Σ |ξ_k|^{2θ} |c_k|²)`.
pub fn hdot_seminorm(p: &Profile, theta: f64) -> f64 {
    let s = to_spectral(p);
    let g = *p.grid();
    let sum: f64 = s
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| g.wavenumber(*i) != 0)
        .map(|(i, c)| abs_pow(g.frequency(i), 2.0 * theta) * c.norm_sqr())
        .sum();
    (2.0 * g.half_length() * sum).sqrt()
}

pub fn h_half_seminorm(p: &Profile) -> f64 {
    hdot_seminorm(p, 0.5)
}

/// `(‖ρ‖_{L²}, 3 ‖ρ‖_{L¹}^{1/2} ‖ρ‖_{Ḣ^{1/2}}^{1/2})`.
pub fn interpolation_check(p: &Profile) -> (f64, f64) {
    let lhs = p.lp_norm(2.0).unwrap_or(0.0);
    let rhs = 3.0 * (p.lp_norm(1.0).unwrap_or(0.0) * h_half_seminorm(p)).sqrt();
    (lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub e_trap: f64,
    pub e_interaction: f64,
    pub e_entropy: f64,
    pub total: f64,
}

fn g_log(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        0.5 * s * s * s.abs().ln() - 0.75 * s * s
    }
}

/// `γ/2 ∫x²ρ − ½∫∫log|x − y| ρ(x)ρ(y) + ν∫ρ log ρ`.
///
/// The samples are read as cell averages and the logarithmic kernel is
/// averaged exactly over each pair of cells, so the singular diagonal needs no
/// special treatment.
pub fn energy(p: &Profile, gamma: f64, nu: f64) -> Result<EnergyReport> {
    let min = p.min();
    if min < -1e-10 {
        return Err(Error::NegativeInput { min });
    }
    let g = p.grid();
    let dx = g.dx();
    let n = g.n_points();
    let v = p.values();
    let e_trap = 0.5 * gamma * dx * g.nodes().iter().zip(v).map(|(x, r)| x * x * r).sum::<f64>();
    let e_entropy = nu * dx * v.iter().map(|&r| if r <= 1e-300 { 0.0 } else { r * r.ln() }).sum::<f64>();

    // linear convolution with the cell-averaged kernel through a padded FFT
    let ldx = dx.ln();
    let kernel = |m: usize| -> f64 {
        let m = m as f64;
        ldx + g_log(m + 1.0) - 2.0 * g_log(m) + g_log(m - 1.0)
    };
    let len = 2 * n;
    let mut kb = vec![Complex64::new(0.0, 0.0); len];
    for m in 0..n {
        let a = kernel(m);
        kb[m] = Complex64::new(a, 0.0);
        if m > 0 {
            kb[len - m] = Complex64::new(a, 0.0);
        }
    }
    let mut rb: Vec<Complex64> = v.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    rb.resize(len, Complex64::new(0.0, 0.0));
    fft_in_place(&mut kb, false);
    fft_in_place(&mut rb, false);
    for (r, k) in rb.iter_mut().zip(&kb) {
        *r *= k;
    }
    fft_in_place(&mut rb, true);
    let quad: f64 = v.iter().zip(&rb).map(|(r, c)| r * c.re / len as f64).sum();
    let e_interaction = -0.5 * dx * dx * quad;
    Ok(EnergyReport {
        e_trap,
        e_interaction,
        e_entropy,
        total: e_trap + e_interaction + e_entropy,
    })
}

/// Test function `φ(x, t) = cos(πt/(2T)) b(x)` with
/// `b(x) = exp(−1/(1 − s²)) Σ c_k s^k`, `s = (x − center)/radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub center: f64,
    pub radius: f64,
    pub poly: Vec<f64>,
}

impl Default for TestFunction {
    fn default() -> Self {
        Self {
            center: 0.3,
            radius: 2.5,
            poly: vec![1.0, 0.5, -0.3],
        }
    }
}

impl TestFunction {
    /// `(b, b', b'')` at `x`.
    pub fn spatial(&self, x: f64) -> (f64, f64, f64) {
        let s = (x - self.center) / self.radius;
        if s.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let u = 1.0 - s * s;
        let b = (-1.0 / u).exp();
        let b1 = -2.0 * s * b / (u * u);
        let b2 = b * (-2.0 / (u * u) + 4.0 * s * s / u.powi(4) - 8.0 * s * s / u.powi(3));
        let (mut q, mut q1, mut q2) = (0.0, 0.0, 0.0);
        for (k, &c) in self.poly.iter().enumerate() {
            let kf = k as f64;
            q += c * s.powi(k as i32);
            if k >= 1 {
                q1 += c * kf * s.powi(k as i32 - 1);
            }
            if k >= 2 {
                q2 += c * kf * (kf - 1.0) * s.powi(k as i32 - 2);
            }
        }
        let r = self.radius;
        (b * q, (b1 * q + b * q1) / r, (b2 * q + 2.0 * b1 * q1 + b * q2) / (r * r))
    }

    /// `(∂xφ(x) − ∂xφ(y))/(x − y)` with its diagonal limit `∂xxφ(x)`.
    pub fn symmetrized_kernel(&self, x: f64, y: f64) -> f64 {
        if x == y {
            return self.spatial(x).2;
        }
        (self.spatial(x).1 - self.spatial(y).1) / (x - y)
    }

    fn psi(t: f64, t_final: f64) -> (f64, f64) {
        let w = PI / (2.0 * t_final);
        ((w * t).cos(), -w * (w * t).sin())
    }
}

/// Residual of the weak formulation tested against `φ`:
///
/// ```text
/// ∫₀ᵀ [∫ρ∂tφ + ½∫∫(∂xφ(x) − ∂xφ(y)) κ(x − y) ρ(x)ρ(y) − ν∫ρΛ^αφ − γ∫xρ∂xφ] dt + ∫φ(·,0)ρ₀
/// ```
///
/// where `κ(d) = cot(πd/2L)/(2L)` is the periodic Hilbert kernel; its
/// diagonal contributes `∂xxφ/π`. Time integration is the left-endpoint rule
/// over the snapshots of `traj`, which should therefore record every step.
pub fn weak_residual(traj: &Trajectory, params: &PhysicsParams, phi: &TestFunction) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData("weak residual needs at least two snapshots".into()));
    }
    let grid = *traj.grid();
    let n = grid.n_points();
    let dx = grid.dx();
    let l = grid.half_length();
    let t_final = traj.last().0;
    let nodes = grid.nodes();
    let (b, b1, b2): (Vec<f64>, Vec<f64>, Vec<f64>) = {
        let mut b = Vec::with_capacity(n);
        let mut b1 = Vec::with_capacity(n);
        let mut b2 = Vec::with_capacity(n);
        for &x in &nodes {
            let (v, d1, d2) = phi.spatial(x);
            b.push(v);
            b1.push(d1);
            b2.push(d2);
        }
        (b, b1, b2)
    };
    let lap_b = crate::operators::fractional_laplacian(&Profile::new(grid, b.clone())?, params.alpha)?;
    let support: Vec<usize> = (0..n).filter(|&i| b1[i] != 0.0 || b2[i] != 0.0 || b[i] != 0.0).collect();
    // κ(m dx) for m = 1..n-1
    let kappa: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                1.0 / ((PI * m as f64 * dx / (2.0 * l)).tan() * 2.0 * l)
            }
        })
        .collect();

    let times = traj.times();
    let profiles = traj.profiles();
    let mut integral = 0.0;
    for k in 0..times.len() - 1 {
        let (t, rho) = (times[k], profiles[k].values());
        let (psi, dpsi) = TestFunction::psi(t, t_final);
        let mut f_t = 0.0;
        let mut f_diff = 0.0;
        let mut f_conf = 0.0;
        let mut f_pair = 0.0;
        for &i in &support {
            f_t += rho[i] * b[i];
            f_conf += nodes[i] * rho[i] * b1[i];
            if b1[i] != 0.0 {
                let mut h = 0.0;
                for (j, r) in rho.iter().enumerate() {
                    if j != i {
                        h += kappa[(i + n - j) % n] * r;
                    }
                }
                f_pair += rho[i] * b1[i] * h;
            }
            f_pair += 0.5 * rho[i] * rho[i] * b2[i] / PI;
        }
        for (r, lb) in rho.iter().zip(lap_b.values()) {
            f_diff += r * lb;
        }
        let inner = dx * f_t * dpsi + psi * (dx * dx * f_pair - params.nu * dx * f_diff - params.gamma * dx * f_conf);
        integral += (times[k + 1] - t) * inner;
    }
    let rho0 = profiles[0].values();
    let initial: f64 = dx * rho0.iter().zip(&b).map(|(r, v)| r * v).sum::<f64>();
    Ok((integral + initial).abs())
}

/// Outcome of the exponential spectral-decay fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Analyticity {
    /// `|c_k| ≈ A e^{−r|ξ_k|}` with this `r`.
    Radius(f64),
    /// Decay faster than exponential over the band; `r` is only a lower bound.
    BandLimited { lower_bound: f64 },
    /// Too few modes above the noise floor.
    Unavailable,
}

impl Analyticity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Radius(r) => Some(*r),
            Self::BandLimited { lower_bound } => Some(*lower_bound),
            Self::Unavailable => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Radius(_) => "radius",
            Self::BandLimited { .. } => "band_limited",
            Self::Unavailable => "unavailable",
        }
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Strip-width estimate from the exponential decay rate of the Fourier
/// coefficients over the middle of the resolved band.
pub fn analyticity_radius(p: &Profile) -> Analyticity {
    let s = to_spectral(p);
    let g = *p.grid();
    let half = g.n_points() / 2;
    let mags: Vec<f64> = (0..half).map(|k| s.coeff(k as i64).norm().max(s.coeff(-(k as i64)).norm())).collect();
    let top = mags.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Analyticity::Unavailable;
    }
    // algebraic tails (truncation, rounding) form a plateau at the top of the band
    let mut tail: Vec<f64> = mags[3 * half / 4..].to_vec();
    tail.sort_by(f64::total_cmp);
    let floor = (1e-14 * top).max(10.0 * tail[tail.len() / 2]);
    // envelope over blocks of four modes smooths out isolated zeros
    let block = 4;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut k = 1;
    while k + block <= half {
        let (arg, m) = (k..k + block)
            .map(|j| (j, mags[j]))
            .fold((k, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
        if m <= floor {
            break;
        }
        xs.push(g.frequency(arg));
        ys.push(m.ln());
        k += block;
    }
    let lo = xs.len() / 4;
    let hi = 3 * xs.len() / 4;
    if hi < lo + 6 {
        return Analyticity::Unavailable;
    }
    let (bx, by) = (&xs[lo..hi], &ys[lo..hi]);
    let r = -least_squares_slope(bx, by);
    if !(r > 0.0) {
        return Analyticity::Unavailable;
    }
    let mid = bx.len() / 2;
    let r_low = -least_squares_slope(&bx[..mid], &by[..mid]);
    let r_high = -least_squares_slope(&bx[mid..], &by[mid..]);
    if r_high > 1.3 * r_low {
        Analyticity::BandLimited { lower_bound: r }
    } else {
        Analyticity::Radius(r)
    }
}

/// Least-squares slope of `log v` against `log t` over `window`.
pub fn fit_powerlaw(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<f64> {
    if times.len() != values.len() {
        return Err(invalid("values", "times and values differ in length"));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= window.0 && t <= window.1 && t > 0.0 {
            if !(v > 0.0) {
                return Err(invalid("values", format!("non-positive value {v} at t = {t}")));
            }
            lx.push(t.ln());
            ly.push(v.ln());
        }
    }
    if lx.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} samples in the fit window, need at least 5",
            lx.len()
        )));
    }
    Ok(least_squares_slope(&lx, &ly))
}

/// Per-snapshot diagnostics of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    pub h_half: Vec<f64>,
    pub min_value: Vec<f64>,
    pub energy: Option<Vec<EnergyReport>>,
    pub analyticity: Option<Vec<Analyticity>>,
    /// `((q, θ), slope)` pairs.
    pub fitted_exponents: Vec<((f64, u32), f64)>,
    pub weak_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReportOptions {
    /// `(γ, ν)` for the energy columns.
    pub energy: Option<(f64, f64)>,
    pub analyticity: bool,
}

impl DiagnosticsReport {
    pub fn from_trajectory(traj: &Trajectory, opts: &ReportOptions) -> Result<Self> {
        let ps = traj.profiles();
        let energy = match opts.energy {
            Some((gamma, nu)) => Some(
                ps.iter()
                    .map(|p| energy(&clamped(p), gamma, nu))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(Self {
            times: traj.times().to_vec(),
            mass: ps.iter().map(|p| p.mass()).collect(),
            l1: ps.iter().map(|p| p.lp_norm(1.0).unwrap_or(f64::NAN)).collect(),
            l2: ps.iter().map(|p| p.lp_norm(2.0).unwrap_or(f64::NAN)).collect(),
            linf: ps.iter().map(|p| p.lp_norm(f64::INFINITY).unwrap_or(f64::NAN)).collect(),
            h_half: ps.iter().map(h_half_seminorm).collect(),
            min_value: ps.iter().map(|p| p.min()).collect(),
            energy,
            analyticity: opts.analyticity.then(|| ps.iter().map(analyticity_radius).collect()),
            fitted_exponents: Vec::new(),
            weak_residual: None,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut header = vec!["t", "mass", "l1", "l2", "linf", "h_half", "min"];
        if self.energy.is_some() {
            header.extend(["e_trap", "e_interaction", "e_entropy", "e_total"]);
        }
        if self.analyticity.is_some() {
            header.extend(["radius_kind", "radius"]);
        }
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.times.len() {
            let mut row: Vec<String> = [
                self.times[i],
                self.mass[i],
                self.l1[i],
                self.l2[i],
                self.linf[i],
                self.h_half[i],
                self.min_value[i],
            ]
            .iter()
            .map(|v| fmt_float(*v))
            .collect();
            if let Some(e) = &self.energy {
                let e = e[i];
                row.extend([e.e_trap, e.e_interaction, e.e_entropy, e.total].iter().map(|v| fmt_float(*v)));
            }
            if let Some(a) = &self.analyticity {
                row.push(a[i].label().to_string());
                row.push(fmt_float(a[i].value().unwrap_or(f64::NAN)));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Scalar summary for the metadata sidecar.
    pub fn summary(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for ((q, theta), slope) in &self.fitted_exponents {
            out.push((format!("slope_q{}_theta{}", fmt_exponent(*q), theta), fmt_float(*slope)));
        }
        if let Some(r) = self.weak_residual {
            out.push(("weak_residual".into(), fmt_float(r)));
        }
        out
    }
}

/// Undershoots from spectral ringing are clamped for the entropy only.
fn clamped(p: &Profile) -> Profile {
    if p.min() >= 0.0 {
        return p.clone();
    }
    let scale = p.max().max(1e-300);
    if p.min() < -1e-6 * scale {
        return p.clone();
    }
    p.scaled(1.0).map_values(|v| v.max(0.0))
}

impl Profile {
    pub(crate) fn map_values(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile::from_raw(*self.grid(), self.values().iter().map(|&v| f(v)).collect())
    }
}

fn fmt_exponent(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

/// Seventeen significant digits in scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `key=value` lines, one per pair.
pub fn write_metadata<W: Write>(mut w: W, pairs: &[(String, String)]) -> io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::initial;
    use proptest::prelude::*;

    #[test]
    fn seminorm_values() {
        let g = Grid::new(128, 8.0).unwrap();
        assert!(h_half_seminorm(&Profile::from_fn(g, |_| 3.0).unwrap()) < 1e-14);
        let c = Profile::from_fn(g, |x| (PI * x / 8.0).cos()).unwrap();
        assert!((h_half_seminorm(&c) - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seminorm_dilation_invariance() {
        // ρ(λx) has the same Ḣ^{1/2} seminorm as ρ
        let g = Grid::new(16384, 256.0).unwrap();
        let base = h_half_seminorm(&initial::gaussian(g, 1.0, 1.0).unwrap());
        for lam in [0.5, 2.0] {
            let p = initial::gaussian(g, 1.0 / lam, 1.0 / lam).unwrap();
            assert!((h_half_seminorm(&p) - base).abs() < 1e-4 * base);
        }
    }

    #[test]
    fn interpolation_inequality() {
        let g = Grid::new(4096, 8.0).unwrap();
        let (l, r) = interpolation_check(&initial::semicircle(g));
        assert!(l < r);
        let mut last = 0.0;
        for j in 0..6 {
            let w = 2f64.powi(-j);
            let p = initial::gaussian(g, w, 1.0).unwrap();
            let (l, r) = interpolation_check(&p);
            assert!(l <= r);
            assert!(r > last);
            last = r;
        }
        assert_eq!(interpolation_check(&Profile::zeros(g)), (0.0, 0.0));
    }

    #[test]
    fn energy_of_uniform_density() {
        let g = Grid::new(4096, 2.0).unwrap();
        let p = Profile::from_fn(g, |x| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        let e = energy(&p, 1.0, 1.0).unwrap();
        assert!((e.e_trap - 1.0 / 6.0).abs() < 2e-3, "{e:?}");
        assert!((e.e_interaction - 0.75).abs() < 2e-3, "{e:?}");
        assert!(e.e_entropy.abs() < 1e-12);
        assert!((e.total - (e.e_trap + e.e_interaction + e.e_entropy)).abs() < 1e-12);
    }

    #[test]
    fn energy_direct_sum_oracle() {
        let g = Grid::new(64, 4.0).unwrap();
        let p = initial::gaussian(g, 0.7, 1.0).unwrap();
        let e = energy(&p, 0.0, 0.0).unwrap();
        let dx = g.dx();
        let v = p.values();
        let mut direct = 0.0;
        for i in 0..64 {
            for j in 0..64 {
                let m = (i as f64 - j as f64).abs();
                let a = dx.ln() + g_log(m + 1.0) - 2.0 * g_log(m) + g_log(m - 1.0);
                direct += v[i] * v[j] * a;
            }
        }
        assert!((e.e_interaction + 0.5 * dx * dx * direct).abs() < 1e-12);
    }

    #[test]
    fn gaussian_trap_energy() {
        let g = Grid::new(1024, 10.0).unwrap();
        let e = energy(&initial::gaussian(g, 1.0, 1.0).unwrap(), 1.0, 0.0).unwrap();
        assert!((e.e_trap - 0.5).abs() < 1e-4);
        assert!(energy(&initial::shifted(&initial::semicircle(g), -0.1), 1.0, 1.0).is_err());
    }

    #[test]
    fn kernel_diagonal_limit() {
        let phi = TestFunction::default();
        for &x in &[-1.0, 0.2, 1.1] {
            let diag = phi.symmetrized_kernel(x, x);
            let near = phi.symmetrized_kernel(x, x + 1e-6);
            assert!((diag - near).abs() < 1e-4 * (1.0 + diag.abs()));
            // b'' against a centered difference of b'
            let h = 1e-5;
            let fd = (phi.spatial(x + h).1 - phi.spatial(x - h).1) / (2.0 * h);
            assert!((fd - diag).abs() < 1e-5 * (1.0 + diag.abs()));
        }
    }

    #[test]
    fn residual_of_zero_trajectory() {
        let g = Grid::new(128, 8.0).unwrap();
        let traj = Trajectory::from_parts(vec![0.0, 0.1, 0.2], vec![Profile::zeros(g); 3]).unwrap();
        let params = PhysicsParams::new(1.5, 1.0, 0.0).unwrap();
        assert_eq!(weak_residual(&traj, &params, &TestFunction::default()).unwrap(), 0.0);
    }

    #[test]
    fn analyticity_of_poisson_kernel() {
        let g = Grid::new(2048, 64.0).unwrap();
        for y in [0.3, 0.5, 1.0] {
            let p = initial::cauchy(g, y, 1.0, 0.0).unwrap();
            match analyticity_radius(&p) {
                Analyticity::Radius(r) => assert!((r - y).abs() < 0.1 * y, "{r} vs {y}"),
                other => panic!("{other:?}"),
            }
        }
        let gauss = initial::gaussian(Grid::new(512, 64.0).unwrap(), 1.0, 1.0).unwrap();
        assert!(matches!(analyticity_radius(&gauss), Analyticity::BandLimited { .. }));
        assert_eq!(analyticity_radius(&Profile::zeros(g)), Analyticity::Unavailable);
    }

    #[test]
    fn powerlaw_fits() {
        let t: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        assert!((fit_powerlaw(&t, &v, (1.0, 20.0)).unwrap() + 0.5).abs() < 1e-12);
        let c = vec![2.0; 20];
        assert!(fit_powerlaw(&t, &c, (1.0, 20.0)).unwrap().abs() < 1e-12);
        assert!(fit_powerlaw(&t, &v, (1.0, 4.5)).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(64, 4.0).unwrap();
        let traj = Trajectory::new(0.0, initial::semicircle(g));
        let rep = DiagnosticsReport::from_trajectory(&traj, &ReportOptions { energy: Some((1.0, 1.0)), analyticity: true }).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }

    proptest! {
        #[test]
        fn noisy_powerlaw(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let t: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.5).collect();
            let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powi(-2) * (1.0 + 0.01 * (2.0 * rng.gen::<f64>() - 1.0))).collect();
            let s = fit_powerlaw(&t, &v, (1.0, 20.5)).unwrap();
            prop_assert!((-2.05..=-1.95).contains(&s));
        }

        #[test]
        fn interpolation_inequality_holds(values in prop::collection::vec(0.0f64..5.0, 64)) {
            let g = Grid::new(64, 4.0).unwrap();
            let p = Profile::new(g, values).unwrap();
            let (l, r) = interpolation_check(&p);
            prop_assert!(l <= r + 1e-12);
        }
    }
}
