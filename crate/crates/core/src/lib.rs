//! Numerical laboratory for the large-time behavior of two-phase heat conductors.
//!
//! The crate is split along the lines of the problem:
//!
//! - [`geometry`]: planar domains described by indicator functions (cones over
//!   arcs of the unit circle, starshaped sandwich domains, oscillatory shell
//!   domains) and the piecewise-constant conductivity they induce.
//! - [`analytic`]: moment integrals, Gaussian heat-kernel envelopes, the shell
//!   series for `u(0, t)` and the bound sequences that certify oscillation.
//! - [`solver`]: a cell-centered finite-volume θ-scheme for `u_t = div(σ∇u)` on a
//!   truncated square with zero-flux walls, plus probe, energy and Hölder
//!   diagnostics.
//! - [`experiments`]: the self-similarity, stabilization and oscillation studies.
//! - [`config`]: the plain-text key–value format shared by all of the above.

pub mod analytic;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod solver;

pub use error::{Error, Result};
