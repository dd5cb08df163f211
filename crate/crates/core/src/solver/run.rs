use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::io::{self, Write};

use super::grid::GridSpec;
use super::state::{init_state, SolverConfig, SolverState};
use crate::analytic::{moment_integral, truncated_moment, GaussianEnvelope};
use crate::geometry::{rescale_domain, ConductivityField, PhaseDomain, Point};
use crate::{Error, Result};

/// How the truncation error of the zero-flux box is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BudgetModel {
    /// Tail mass of the heat kernel of the constant conductivity `M = max σ`.
    #[default]
    HeatKernel,
    /// Tail mass of the upper Gaussian envelope `Λ t^{−N/2} e^{−|x|²/(Λt)}`.
    Envelope(GaussianEnvelope),
}

/// Bound on how much the walls can move `u(0, t)`: twice the kernel mass
/// outside the ball of radius `L − √2 h` (mass lost through the cut plus mass
/// reflected back by the walls).
pub fn truncation_budget(
    field: &ConductivityField,
    grid: &GridSpec,
    t: f64,
    model: &BudgetModel,
) -> f64 {
    let radius = (grid.half_extent() - SQRT_2 * grid.spacing()).max(0.0);
    let tail = match model {
        BudgetModel::HeatKernel => {
            let big_m = field.bounds().1;
            truncated_moment(2, radius / (4.0 * big_m * t).sqrt(), f64::INFINITY)
                / moment_integral(2)
        }
        BudgetModel::Envelope(env) => env.upper_tail_mass(t, radius),
    };
    2.0 * tail
}

/// Largest `t` whose truncation budget stays within `tol`.
pub fn max_admissible_time(
    field: &ConductivityField,
    grid: &GridSpec,
    model: &BudgetModel,
    tol: f64,
) -> f64 {
    let fits = |t: f64| truncation_budget(field, grid, t, model) <= tol;
    let (mut lo, mut hi) = (1e-12, 1.0);
    if !fits(lo) {
        return 0.0;
    }
    while fits(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    while hi / lo > 1.0 + 1e-12 {
        let mid = (lo * hi).sqrt();
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub solver: SolverConfig,
    /// Largest admissible truncation budget at `t_end`.
    pub budget_tol: f64,
    pub budget_model: BudgetModel,
    /// Times in `[0, t_end]` at which full cell fields are kept.
    pub snapshot_times: Vec<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            solver: SolverConfig::default(),
            budget_tol: 0.05,
            budget_model: BudgetModel::default(),
            snapshot_times: Vec::new(),
        }
    }
}

/// Probe values `values[j][i] = u(probes[i], times[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub probes: Vec<Point>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn column(&self, probe: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[probe]).collect()
    }

    /// Value of `probe` at the sample time closest to `t`.
    pub fn at(&self, probe: usize, t: f64) -> Option<f64> {
        let j = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.values[j][probe])
    }

    /// Header `t,probe_0,probe_1,...`, one row per sample time.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for i in 0..self.probes.len() {
            write!(out, ",probe_{i}")?;
        }
        writeln!(out)?;
        for (t, row) in self.times.iter().zip(&self.values) {
            write!(out, "{t}")?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Discrete maximum principle and conservation record of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantLog {
    pub min_value: f64,
    pub max_value: f64,
    pub initial_mass: f64,
    pub max_mass_deviation: f64,
    pub steps: usize,
    pub cg_iterations: usize,
    pub max_residual: f64,
    pub t_end: f64,
}

impl InvariantLog {
    fn new(state: &SolverState) -> Self {
        let (lo, hi) = min_max(&state.u);
        InvariantLog {
            min_value: lo,
            max_value: hi,
            initial_mass: state.mass(),
            max_mass_deviation: 0.0,
            steps: 0,
            cg_iterations: 0,
            max_residual: 0.0,
            t_end: 0.0,
        }
    }

    fn record(&mut self, state: &SolverState, iterations: usize, residual: f64) {
        let (lo, hi) = min_max(&state.u);
        self.min_value = self.min_value.min(lo);
        self.max_value = self.max_value.max(hi);
        self.max_mass_deviation = self
            .max_mass_deviation
            .max((state.mass() - self.initial_mass).abs());
        self.steps += 1;
        self.cg_iterations += iterations;
        self.max_residual = self.max_residual.max(residual);
        self.t_end = state.t;
    }

    /// All cell values stayed in `[−tol, 1 + tol]`.
    pub fn within_unit_interval(&self, tol: f64) -> bool {
        self.min_value >= -tol && self.max_value <= 1.0 + tol
    }

    /// Largest mass deviation relative to the initial mass, per unit time.
    pub fn mass_drift_rate(&self) -> f64 {
        if self.t_end <= 0.0 {
            return 0.0;
        }
        let scale = if self.initial_mass > 0.0 {
            self.initial_mass
        } else {
            1.0
        };
        self.max_mass_deviation / scale / self.t_end
    }
}

fn min_max(u: &[f64]) -> (f64, f64) {
    u.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    /// Truncation budget at the final time.
    pub budget: f64,
    pub invariants: InvariantLog,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SolverState,
}

impl RunOutput {
    /// Plain-text sidecar describing the run.
    pub fn metadata(&self) -> String {
        let g = self.final_state.grid();
        let c = self.final_state.config();
        let inv = &self.invariants;
        let mut s = String::new();
        let _ = writeln!(s, "half_extent = {}", g.half_extent());
        let _ = writeln!(s, "spacing = {}", g.spacing());
        let _ = writeln!(s, "cells_per_side = {}", g.cells());
        let _ = writeln!(s, "theta = {}", c.theta);
        let _ = writeln!(s, "dt_policy = {:?}", c.dt);
        let _ = writeln!(s, "cg_tol = {}", c.cg_tol);
        let _ = writeln!(s, "t_end = {}", inv.t_end);
        let _ = writeln!(s, "truncation_budget = {:e}", self.budget);
        let _ = writeln!(s, "steps = {}", inv.steps);
        let _ = writeln!(s, "cg_iterations = {}", inv.cg_iterations);
        let _ = writeln!(s, "min_value = {:e}", inv.min_value);
        let _ = writeln!(s, "max_value = {:e}", inv.max_value);
        let _ = writeln!(s, "mass_drift_rate = {:e}", inv.mass_drift_rate());
        s
    }
}

fn check_times(times: &[f64], t_end: f64, allow_zero: bool, what: &str) -> Result<()> {
    let start_ok = |t: f64| if allow_zero { t >= 0.0 } else { t > 0.0 };
    if times.iter().any(|&t| !(start_ok(t) && t <= t_end)) {
        return Err(Error::invalid(format!("{what} must lie in (0, t_end]")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "{what} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Solves from `u(·, 0) = 1_domain` with conductivity `field` and records the
/// probes at every sample time.
pub fn run(
    domain: &PhaseDomain,
    field: &ConductivityField,
    grid: &GridSpec,
    t_end: f64,
    probes: &[Point],
    sample_times: &[f64],
    options: &RunOptions,
) -> Result<RunOutput> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("t_end = {t_end} must be positive")));
    }
    check_times(sample_times, t_end, false, "sample times")?;
    let mut snaps = options.snapshot_times.clone();
    snaps.sort_by(f64::total_cmp);
    snaps.dedup();
    check_times(&snaps, t_end, true, "snapshot times")?;

    let budget = truncation_budget(field, grid, t_end, &options.budget_model);
    if budget > options.budget_tol {
        return Err(Error::BudgetExceeded {
            t: t_end,
            budget,
            tol: options.budget_tol,
        });
    }

    let mut state = init_state(domain, field, grid, options.solver)?;
    let mut log = InvariantLog::new(&state);

    let mut stops: Vec<f64> = sample_times
        .iter()
        .chain(&snaps)
        .copied()
        .chain([t_end])
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut series = TimeSeries {
        probes: probes.to_vec(),
        times: Vec::new(),
        values: Vec::new(),
    };
    let mut snapshots = Vec::new();
    let (mut next_sample, mut next_snap) = (0, 0);
    if snaps.first() == Some(&0.0) {
        snapshots.push(Snapshot {
            t: 0.0,
            u: state.u.clone(),
        });
        next_snap = 1;
    }
    for stop in stops.into_iter().filter(|&t| t > 0.0) {
        while stop - state.t > 1e-12 * stop {
            let remaining = stop - state.t;
            let mut dt = state.proposed_dt();
            if remaining <= 1.25 * dt {
                dt = remaining.min(state.max_monotone_dt());
                if dt < remaining && remaining - dt < 0.25 * dt {
                    dt = 0.5 * remaining;
                }
            }
            let stats = state.step(dt)?;
            if (stop - state.t).abs() <= 1e-12 * stop {
                state.t = stop;
            }
            log.record(&state, stats.iterations, stats.residual);
        }
        state.t = stop;
        if sample_times.get(next_sample) == Some(&stop) {
            series.times.push(stop);
            series
                .values
                .push(probes.iter().map(|&p| state.value_at(p)).collect());
            next_sample += 1;
        }
        if snaps.get(next_snap) == Some(&stop) {
            snapshots.push(Snapshot {
                t: stop,
                u: state.u.clone(),
            });
            next_snap += 1;
        }
    }
    log.t_end = state.t;
    Ok(RunOutput {
        series,
        budget,
        invariants: log,
        snapshots,
        final_state: state,
    })
}

/// `u^k(0, t) = u(0, k² t)`, computed by solving on `Ω^k` with `σ^k`.
pub fn rescaled_run(
    domain: &PhaseDomain,
    field: &ConductivityField,
    grid: &GridSpec,
    k: f64,
    t: f64,
    options: &RunOptions,
) -> Result<f64> {
    let scaled = rescale_domain(domain, k)?;
    let scaled_field = field.rescaled(k)?;
    let out = run(
        &scaled,
        &scaled_field,
        grid,
        t,
        &[[0.0, 0.0]],
        &[t],
        options,
    )?;
    Ok(out.series.values[0][0])
}
