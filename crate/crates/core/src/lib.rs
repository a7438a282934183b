//! Numerical toolkit for the one-dimensional nonlocal flux equation
//!
//! ```text
//! ∂tρ + ∂x[ρ(Hρ − γx)] = −ν Λ^α ρ
//! ```
//!
//! on a truncated periodic line. The crate provides a pseudo-spectral
//! integrating-factor solver, a viscous Trotter splitting, Picard iteration
//! of the Duhamel form, an exact complex-characteristics solver for `α = 1`,
//! a Dyson Brownian motion particle simulator, and the diagnostics used to
//! cross-check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod burgers;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod initial;
pub mod mild;
pub mod operators;
pub mod particles;

pub use error::{Error, Result};
pub use evolve::{PhysicsParams, SolverConfig, Trajectory};
pub use grid::{mollify, to_physical, to_spectral, Grid, Profile, SpectralField};
