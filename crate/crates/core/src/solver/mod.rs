//! Finite-volume solver for `u_t = div(σ∇u)` on a truncated square.

mod diagnostics;
mod grid;
mod run;
mod state;

pub use diagnostics::{
    energy_integral, fit_holder_exponent, holder_modulus, reflection_asymmetry, Mirror,
};
pub use grid::{discretize, init_state_values, FaceConductivity, GridSpec};
pub use run::{
    max_admissible_time, rescaled_run, run, truncation_budget, BudgetModel, InvariantLog,
    RunOptions, RunOutput, Snapshot, TimeSeries,
};
pub use state::{init_state, DtPolicy, SolverConfig, SolverState, StepStats};
