//! Positivity-preserving finite-difference simulation on intervals and
//! rectangles with homogeneous Neumann boundaries.
//!
//! One time step is a Strang composition: half a reaction step, a full
//! backward-Euler diffusion step, another half reaction step. Reactions are
//! integrated cell by cell with sub-stepped classical RK4.

mod advance;
mod diffusion;
mod grid;
mod reaction;
mod snapshot;
mod state;

pub use advance::{advance, Observer, Sample, SimTrace};
pub use diffusion::{DiffusionSolver, SOLVER_RESIDUAL};
pub use grid::{Grid, MAX_CELLS};
pub use reaction::{reaction_step, ClipEvent, PositivityLog, BLOWUP_THRESHOLD, MAX_RETRIES};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use state::{init_state, Profile, SimState};

use thiserror::Error;

use crate::netmodel::ReactionNetwork;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("negative initial data for species {species} at cell {cell}")]
    NegativeInitialData { species: usize, cell: usize },
    #[error("initial data shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("diffusion solve missed the residual bound (relative residual {residual:e})")]
    SolverFailure { residual: f64 },
    #[error("positivity could not be restored after {retries} step halvings (species {species}, cell {cell})")]
    PositivityFailure {
        species: usize,
        cell: usize,
        retries: usize,
    },
    #[error("blow-up detected at t = {t}: species {species}, cell {cell}, value {value:e}")]
    BlowupDetected {
        t: f64,
        species: usize,
        cell: usize,
        value: f64,
    },
    #[error("invalid step control: {0}")]
    InvalidControl(String),
    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<PdeError> },
    #[error("snapshot I/O: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    /// IMEX Euler: explicit reaction, implicit diffusion, first order.
    Imex,
    /// Strang splitting, second order.
    Splitting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositivityMode {
    ClipReport,
    RejectRetry,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub mode: StepMode,
    pub reaction_substeps: usize,
    pub positivity: PositivityMode,
}

impl StepControl {
    pub fn new(dt: f64) -> Self {
        StepControl {
            dt,
            mode: StepMode::Splitting,
            reaction_substeps: 4,
            positivity: PositivityMode::RejectRetry,
        }
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PdeError::InvalidControl("dt must be positive".into()));
        }
        if self.reaction_substeps == 0 {
            return Err(PdeError::InvalidControl("reaction_substeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// Backward-Euler diffusion over `dt` for every species.
pub fn diffusion_step(
    state: &mut SimState,
    solver: &DiffusionSolver,
    net: &ReactionNetwork,
    dt: f64,
) -> Result<(), PdeError> {
    use rayon::prelude::*;
    let d = net.diffusion_f64();
    state
        .fields
        .par_iter_mut()
        .zip(d.par_iter())
        .try_for_each(|(u, &di)| solver.solve(dt * di, u))
}

#[cfg(test)]
mod tests;
