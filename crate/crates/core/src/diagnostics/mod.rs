//! Quantities measured on simulation traces: cylinder norms, running sup
//! norms, Lyapunov series, equilibria and exponential decay fits.

mod csv;
mod decay;
mod equilibrium;
mod norms;
mod series;

pub use csv::{write_trace_csv, OutputHeader, TraceColumns};
pub use decay::{distance_series, fit_decay, fit_exponential, DecayFit, MIN_FIT_SAMPLES, RELATIVE_FLOOR, UNDERFLOW};
pub use equilibrium::{conservation_laws, solve_equilibrium, totals_from_means, EquilibriumResult, MAX_NEWTON_ITER};
pub use norms::{lp_cylinder_norm, plateau_check, running_sup_norm, sup_norms, CylinderWindow, Plateau};
pub use series::{entropy_density, entropy_series, mass_series};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagError {
    #[error("trace has no samples")]
    EmptyTrace,
    #[error("window [{start}, {end}] is outside the trace span [{t0}, {t1}]")]
    WindowOutOfRange { start: f64, end: f64, t0: f64, t1: f64 },
    #[error("species index {0} out of range")]
    NoSuchSpecies(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("conserved total {index} is {value}; equilibria need strictly positive totals")]
    NonPositiveTotal { index: usize, value: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,
    #[error("distance to equilibrium underflows at t = {t}; fewer than {needed} samples left ({found})")]
    DistanceUnderflow { t: f64, found: usize, needed: usize },
    #[error("only {found} samples after t_start, need at least {needed}")]
    InsufficientSamples { found: usize, needed: usize },
}
