use std::sync::Arc;

use super::grid::{discretize, init_state_values, FaceConductivity, GridSpec};
use crate::geometry::{ConductivityField, PhaseDomain};
use crate::{Error, Result};

/// Time-step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Fixed(f64),
    /// `dt = clamp(ratio·t, initial, max)`. Parabolic problems started from
    /// discontinuous data need small steps early and tolerate long steps late.
    /// `initial` defaults to `h²/(4 max σ)`.
    Proportional {
        ratio: f64,
        initial: Option<f64>,
        max: Option<f64>,
    },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Proportional {
            ratio: 0.05,
            initial: None,
            max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// θ ∈ [½, 1]; 1 is backward Euler, ½ is Crank–Nicolson.
    pub theta: f64,
    pub dt: DtPolicy,
    /// Relative residual `‖b − A x‖ / ‖b‖` at which conjugate gradients stop.
    pub cg_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 1.0,
            dt: DtPolicy::default(),
            cg_tol: 1e-10,
            max_iterations: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("θ = {} outside [½, 1]", self.theta)));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) || self.max_iterations == 0 {
            return Err(Error::invalid(
                "solver tolerance must lie in (0, 1) with a positive iteration cap",
            ));
        }
        match self.dt {
            DtPolicy::Fixed(dt) if !(dt > 0.0) => Err(Error::invalid("fixed dt must be positive")),
            DtPolicy::Proportional {
                ratio,
                initial,
                max,
            } => {
                if !(ratio > 0.0)
                    || initial.is_some_and(|v| !(v > 0.0))
                    || max.is_some_and(|v| !(v > 0.0))
                {
                    Err(Error::invalid("dt policy values must be positive"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Default)]
struct Workspace {
    b: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
    inv_diag: Vec<f64>,
    diag_coef: f64,
    /// `u` before the last step, and that step's size and end time.
    prev: Vec<f64>,
    prev_dt: f64,
    prev_t: f64,
}

/// Cell values and clock of one solver run.
#[derive(Debug, Clone)]
pub struct SolverState {
    grid: GridSpec,
    faces: Arc<FaceConductivity>,
    pub u: Vec<f64>,
    pub t: f64,
    config: SolverConfig,
    work: Workspace,
}

/// `u = 1_Ω` at cell centers, `t = 0`.
pub fn init_state(
    domain: &PhaseDomain,
    field: &ConductivityField,
    grid: &GridSpec,
    config: SolverConfig,
) -> Result<SolverState> {
    let faces = Arc::new(discretize(field, grid));
    SolverState::new(*grid, faces, init_state_values(domain, grid), config)
}

impl SolverState {
    pub fn new(
        grid: GridSpec,
        faces: Arc<FaceConductivity>,
        u: Vec<f64>,
        config: SolverConfig,
    ) -> Result<Self> {
        config.validate()?;
        if faces.cells() != grid.cells() || u.len() != grid.len() {
            return Err(Error::invalid("state, faces and grid sizes disagree"));
        }
        Ok(SolverState {
            grid,
            faces,
            u,
            t: 0.0,
            config,
            work: Workspace::default(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn faces(&self) -> &FaceConductivity {
        &self.faces
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// `Σ u h²`.
    pub fn mass(&self) -> f64 {
        self.u.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn value_at(&self, x: crate::geometry::Point) -> f64 {
        self.grid.interpolate(&self.u, x)
    }

    /// Largest step keeping the explicit part of the θ-scheme monotone;
    /// infinite for backward Euler.
    pub fn max_monotone_dt(&self) -> f64 {
        let explicit = 1.0 - self.config.theta;
        let deg = self.faces.max_degree();
        if explicit <= 0.0 || deg == 0.0 {
            f64::INFINITY
        } else {
            self.grid.cell_area() / (explicit * deg)
        }
    }

    /// Step proposed by the dt policy at the current time.
    pub fn proposed_dt(&self) -> f64 {
        let dt = match self.config.dt {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Proportional {
                ratio,
                initial,
                max,
            } => {
                let sigma = 0.25 * self.faces.max_degree().max(f64::MIN_POSITIVE);
                let first = initial.unwrap_or(0.25 * self.grid.cell_area() / sigma);
                (ratio * self.t)
                    .max(first)
                    .min(max.unwrap_or(f64::INFINITY))
            }
        };
        dt.min(self.max_monotone_dt())
    }

    /// Advances one θ-step: `(I + θ dt K) u' = (I − (1−θ) dt K) u`.
    pub fn step(&mut self, dt: f64) -> Result<StepStats> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("time step {dt} must be positive")));
        }
        if dt > self.max_monotone_dt() * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {dt} exceeds the monotone limit {} for θ = {}",
                self.max_monotone_dt(),
                self.config.theta
            )));
        }
        let theta = self.config.theta;
        let scale = dt / self.grid.cell_area();
        let n = self.u.len();
        let w = &mut self.work;
        w.b.resize(n, 0.0);
        if theta < 1.0 {
            self.faces
                .apply_shifted(-(1.0 - theta) * scale, &self.u, &mut w.b);
        } else {
            w.b.copy_from_slice(&self.u);
        }
        // Warm start from the linear extrapolation of the last two states.
        if w.prev.len() == n && w.prev_dt > 0.0 && w.prev_t == self.t {
            let ratio = dt / w.prev_dt;
            for (u, prev) in self.u.iter_mut().zip(&mut w.prev) {
                let cur = *u;
                *u = cur + ratio * (cur - *prev);
                *prev = cur;
            }
        } else {
            w.prev.clear();
            w.prev.extend_from_slice(&self.u);
        }
        let stats = self.solve(theta * scale)?;
        self.t += dt;
        self.work.prev_dt = dt;
        self.work.prev_t = self.t;
        Ok(stats)
    }

    /// Jacobi-preconditioned conjugate gradients for `(I + c K) u = b`, started
    /// from the current `u`.
    fn solve(&mut self, c: f64) -> Result<StepStats> {
        let n = self.u.len();
        let faces = &*self.faces;
        let w = &mut self.work;
        for v in [&mut w.r, &mut w.p, &mut w.ap] {
            v.resize(n, 0.0);
        }
        if w.inv_diag.len() != n || w.diag_coef != c {
            w.inv_diag.clear();
            w.inv_diag
                .extend(faces.degree.iter().map(|&d| 1.0 / (1.0 + c * d)));
            w.diag_coef = c;
        }
        let x = &mut self.u;

        let b_norm = dot(&w.b, &w.b).sqrt();
        if b_norm == 0.0 {
            x.fill(0.0);
            return Ok(StepStats::default());
        }
        let target = self.config.cg_tol * b_norm;

        faces.apply_shifted(c, x, &mut w.ap);
        let mut rr = 0.0;
        let mut rz = 0.0;
        for i in 0..n {
            let r = w.b[i] - w.ap[i];
            let z = r * w.inv_diag[i];
            w.r[i] = r;
            w.p[i] = z;
            rr += r * r;
            rz += r * z;
        }
        if rr.sqrt() <= target {
            restore_mass(&w.b, x);
            return Ok(StepStats {
                iterations: 0,
                residual: rr.sqrt() / b_norm,
            });
        }
        for k in 1..=self.config.max_iterations {
            faces.apply_shifted(c, &w.p, &mut w.ap);
            let alpha = rz / dot(&w.p, &w.ap);
            rr = 0.0;
            let mut rz_next = 0.0;
            for i in 0..n {
                x[i] += alpha * w.p[i];
                let r = w.r[i] - alpha * w.ap[i];
                w.r[i] = r;
                rr += r * r;
                rz_next += r * r * w.inv_diag[i];
            }
            if rr.sqrt() <= target {
                restore_mass(&w.b, x);
                return Ok(StepStats {
                    iterations: k,
                    residual: rr.sqrt() / b_norm,
                });
            }
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                w.p[i] = w.r[i] * w.inv_diag[i] + beta * w.p[i];
            }
        }
        Err(Error::NonConvergence {
            iterations: self.config.max_iterations,
            residual: rr.sqrt() / b_norm,
        })
    }
}

/// The system matrix maps constants to themselves and has unit column sums,
/// so adding the mean residual makes `Σx = Σb` exact.
fn restore_mass(b: &[f64], x: &mut [f64]) {
    let shift = (b.iter().sum::<f64>() - x.iter().sum::<f64>()) / x.len() as f64;
    x.iter_mut().for_each(|v| *v += shift);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
