//! Initial data used by the tests, the shipped configs and the CLI.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::grid::{mollify, Grid, Profile};

/// Wigner semicircle `√((4 − x²)₊)/(2π)`, unit mass on `[-2, 2]`.
///
/// Each sample is the exact average over its cell, so the discrete mass is 1
/// to rounding even though the edges are not resolved.
pub fn semicircle(grid: Grid) -> Profile {
    semicircle_cells(grid, 2.0, 1.0)
}

/// Semicircle of radius `r` and mass `m`, sampled as cell averages.
pub fn semicircle_with(grid: Grid, radius: f64, mass: f64) -> Result<Profile> {
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    Ok(semicircle_cells(grid, radius, mass))
}

fn semicircle_cells(grid: Grid, r: f64, mass: f64) -> Profile {
    let c = 2.0 * mass / (PI * r * r);
    let antider = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * c * (x * (r * r - x * x).sqrt() + r * r * (x / r).asin())
    };
    let h = grid.dx();
    Profile::from_raw(
        grid,
        grid.nodes()
            .into_iter()
            .map(|x| (antider(x + 0.5 * h) - antider(x - 0.5 * h)) / h)
            .collect(),
    )
}

pub fn gaussian(grid: Grid, sigma: f64, mass: f64) -> Result<Profile> {
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be positive"));
    }
    let c = mass / (sigma * (2.0 * PI).sqrt());
    Profile::from_fn(grid, |x| c * (-0.5 * (x / sigma).powi(2)).exp())
}

/// Cauchy density `m ε / (π ((x − x₀)² + ε²))`; this is the Poisson kernel
/// `P_ε` when `m = 1, x₀ = 0`.
pub fn cauchy(grid: Grid, eps: f64, mass: f64, center: f64) -> Result<Profile> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    Profile::from_fn(grid, |x| {
        let d = x - center;
        mass * eps / (PI * (d * d + eps * eps))
    })
}

/// Indicator of `[a, b]` with height `value`.
pub fn indicator(grid: Grid, a: f64, b: f64, value: f64) -> Result<Profile> {
    if !(b > a) {
        return Err(invalid("interval", "requires a < b"));
    }
    Profile::from_fn(grid, |x| if x >= a && x <= b { value } else { 0.0 })
}

/// Semicircle mollified at width `h`, blended with a wide Gaussian of weight
/// `floor` so the result is strictly positive on the whole grid. Unit mass.
pub fn smoothed_semicircle(grid: Grid, h: f64, floor: f64) -> Result<Profile> {
    if !(0.0..1.0).contains(&floor) {
        return Err(invalid("floor", "must lie in [0, 1)"));
    }
    let core = mollify(&semicircle(grid), h)?;
    let wide = gaussian(grid, grid.half_length() / 4.0, 1.0)?;
    let raw: Vec<f64> = core
        .values()
        .iter()
        .zip(wide.values())
        .map(|(c, w)| (1.0 - floor) * c + floor * w)
        .collect();
    let p = Profile::from_raw(grid, raw);
    let m = p.mass();
    Ok(p.scaled(1.0 / m))
}

/// Homogeneous profile `amplitude·|x|^{−(α−1)}`, invariant under the scaling
/// of the equation. Samples are exact cell averages, which keeps the
/// integrable singularity at the origin finite.
pub fn critical_power(grid: Grid, alpha: f64, amplitude: f64) -> Result<Profile> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(invalid("alpha", "homogeneous data needs alpha in (1, 2)"));
    }
    let e = 2.0 - alpha;
    let antider = |x: f64| x.signum() * x.abs().powf(e) / e;
    let h = grid.dx();
    Profile::new(
        grid,
        grid.nodes()
            .into_iter()
            .map(|x| amplitude * (antider(x + 0.5 * h) - antider(x - 0.5 * h)) / h)
            .collect(),
    )
}

/// Shift every sample by `offset` (negative offsets model `ρ₀ ≥ −μ`).
pub fn shifted(base: &Profile, offset: f64) -> Profile {
    Profile::from_raw(
        *base.grid(),
        base.values().iter().map(|v| v + offset).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_masses() {
        let g = Grid::new(2048, 16.0).unwrap();
        assert!((semicircle(g).mass() - 1.0).abs() < 1e-12);
        assert!((gaussian(g, 1.0, 1.0).unwrap().mass() - 1.0).abs() < 1e-12);
        let s = smoothed_semicircle(g, 0.1, 1e-3).unwrap();
        assert!((s.mass() - 1.0).abs() < 1e-12);
        assert!(s.min() > 1e-8 * s.max());
        let r = semicircle_with(g, 1.5, 2.0).unwrap();
        assert!((r.mass() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn semicircle_peak() {
        let g = Grid::new(1024, 4.0).unwrap();
        assert!((semicircle(g).max() - 1.0 / PI).abs() < 1e-5);
    }
}
