use std::f64::consts::TAU;

use super::grid::GridSpec;
use super::run::Snapshot;
use crate::geometry::Point;
use crate::{Error, Result};

/// Discrete `∫_{B_ρ} |∇u|² dx`: each face whose midpoint lies in the ball
/// contributes `((u_j − u_i)/h)² · h²`.
fn gradient_energy(grid: &GridSpec, u: &[f64], rho: f64) -> f64 {
    let n = grid.cells();
    let h = grid.spacing();
    let r2 = rho * rho;
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let [x, y] = grid.center(i, j);
            let here = u[grid.index(i, j)];
            if i + 1 < n && (x + 0.5 * h).powi(2) + y * y < r2 {
                sum += (u[grid.index(i + 1, j)] - here).powi(2);
            }
            if j + 1 < n && x * x + (y + 0.5 * h).powi(2) < r2 {
                sum += (u[grid.index(i, j + 1)] - here).powi(2);
            }
        }
    }
    sum
}

/// `∫∫ |∇u|² dx dt` over `B_ρ(0)` and the span of the snapshots, trapezoidal
/// in time. Include a snapshot at `t = 0` to integrate from the start; the
/// initial layer then needs steps well below `h²` or backward Euler's own
/// dissipation adds an O(h) bias.
pub fn energy_integral(grid: &GridSpec, snapshots: &[Snapshot], rho: f64) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(Error::invalid(
            "energy integral needs at least two snapshots",
        ));
    }
    if snapshots.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::invalid("snapshot times must be strictly increasing"));
    }
    let energies: Vec<f64> = snapshots
        .iter()
        .map(|s| gradient_energy(grid, &s.u, rho))
        .collect();
    Ok(snapshots
        .windows(2)
        .zip(energies.windows(2))
        .map(|(s, e)| 0.5 * (s[1].t - s[0].t) * (e[0] + e[1]))
        .sum())
}

/// `sup_{|x − base| = r} |u(x) − u(base)|` for each radius, sampled on the
/// circle with roughly two points per cell of arc length.
pub fn holder_modulus(grid: &GridSpec, u: &[f64], base: Point, radii: &[f64]) -> Vec<(f64, f64)> {
    let center = grid.interpolate(u, base);
    radii
        .iter()
        .map(|&r| {
            let count = ((2.0 * TAU * r / grid.spacing()).ceil() as usize).max(64);
            let sup = (0..count)
                .map(|k| {
                    let phi = TAU * k as f64 / count as f64;
                    let x = [base[0] + r * phi.cos(), base[1] + r * phi.sin()];
                    (grid.interpolate(u, x) - center).abs()
                })
                .fold(0.0, f64::max);
            (r, sup)
        })
        .collect()
}

/// Least-squares slope of `ln modulus` against `ln r`.
pub fn fit_holder_exponent(modulus: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = modulus
        .iter()
        .filter(|(r, m)| *r > 0.0 && *m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Grid-respecting reflections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mirror {
    /// `(x, y) ↦ (x, −y)`.
    AcrossXAxis,
    /// `(x, y) ↦ (−x, y)`.
    AcrossYAxis,
    /// `(x, y) ↦ (y, x)`.
    Diagonal,
}

/// `max |u − u∘mirror|` over all cells.
pub fn reflection_asymmetry(grid: &GridSpec, u: &[f64], mirror: Mirror) -> f64 {
    let n = grid.cells();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (mi, mj) = match mirror {
                Mirror::AcrossXAxis => (i, n - 1 - j),
                Mirror::AcrossYAxis => (n - 1 - i, j),
                Mirror::Diagonal => (j, i),
            };
            worst = worst.max((u[grid.index(i, j)] - u[grid.index(mi, mj)]).abs());
        }
    }
    worst
}
