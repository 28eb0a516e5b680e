use super::reaction::{reaction_step, PositivityLog, MAX_RETRIES};
use super::{
    diffusion_step, DiffusionSolver, Grid, PdeError, PositivityMode, SimState, StepControl,
    StepMode,
};
use crate::netmodel::{CompiledRhs, ReactionNetwork};

/// Callback invoked on every sampled state.
pub trait Observer {
    fn observe(&mut self, grid: &Grid, state: &SimState) -> Result<(), PdeError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub fields: Vec<Vec<f64>>,
}

/// Time series of sampled states plus positivity bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub grid: Grid,
    pub species: Vec<String>,
    pub samples: Vec<Sample>,
    pub steps: usize,
    pub clip_count: usize,
    /// Integrated mass removed by clamping negative values.
    pub clipped_mass: f64,
    pub retries: usize,
    pub initial_mass: f64,
}

impl SimTrace {
    /// A run is valid when clamping removed at most 1e-6 of the initial mass.
    pub fn is_valid(&self) -> bool {
        self.clipped_mass <= 1e-6 * self.initial_mass.max(f64::MIN_POSITIVE)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn t_span(&self) -> (f64, f64) {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => (a.t, b.t),
            _ => (0.0, 0.0),
        }
    }
}

struct Stepper<'a> {
    solver: DiffusionSolver,
    net: &'a ReactionNetwork,
    f: &'a CompiledRhs,
    ctrl: StepControl,
    log: PositivityLog,
}

impl Stepper<'_> {
    fn step(&mut self, state: &mut SimState, dt: f64) -> Result<(), PdeError> {
        match self.ctrl.mode {
            StepMode::Splitting => {
                let l = reaction_step(state, self.f, 0.5 * dt, &self.ctrl)?;
                self.log.merge(l);
                diffusion_step(state, &self.solver, self.net, dt)?;
                let l = reaction_step(state, self.f, 0.5 * dt, &self.ctrl)?;
                self.log.merge(l);
                Ok(())
            }
            StepMode::Imex => {
                let h = dt / self.ctrl.reaction_substeps as f64;
                for _ in 0..self.ctrl.reaction_substeps {
                    self.imex(state, h, 0)?;
                }
                Ok(())
            }
        }
    }

    /// `u ← (I − h DΔ)⁻¹ (u + h f(u))`, halving the whole step when the
    /// explicit part goes negative in reject-retry mode.
    fn imex(&mut self, state: &mut SimState, h: f64, level: usize) -> Result<(), PdeError> {
        let m = state.num_species();
        let ncells = state.fields.first().map_or(0, |u| u.len());
        let mut next = state.fields.clone();
        let mut u = vec![0.0; m];
        let mut du = vec![0.0; m];
        let mut scratch = vec![0.0; self.f.num_monomials()];
        let mut clips = Vec::new();
        for cell in 0..ncells {
            for s in 0..m {
                u[s] = state.fields[s][cell];
            }
            self.f.eval_into(&u, &mut scratch, &mut du);
            for s in 0..m {
                let v = u[s] + h * du[s];
                if !v.is_finite() || v.abs() > super::BLOWUP_THRESHOLD {
                    return Err(PdeError::BlowupDetected {
                        t: state.t,
                        species: s,
                        cell,
                        value: v,
                    });
                }
                if v < 0.0 {
                    if self.ctrl.positivity == PositivityMode::RejectRetry {
                        if level == MAX_RETRIES {
                            return Err(PdeError::PositivityFailure {
                                species: s,
                                cell,
                                retries: MAX_RETRIES,
                            });
                        }
                        self.log.retries += 1;
                        self.imex(state, 0.5 * h, level + 1)?;
                        return self.imex(state, 0.5 * h, level + 1);
                    }
                    clips.push(super::ClipEvent {
                        cell,
                        species: s,
                        deficit: -v,
                    });
                    next[s][cell] = 0.0;
                } else {
                    next[s][cell] = v;
                }
            }
        }
        self.log.clips.extend(clips);
        state.fields = next;
        diffusion_step(state, &self.solver, self.net, h)
    }
}

/// Marches `state` to `t_end`, sampling every `cadence` time units (rounded
/// to a whole number of steps) and at the final time.
///
/// Step times are `t0 + k·dt`; the last step is shortened to land on
/// `t_end`. Identical inputs give bit-identical traces.
#[allow(clippy::too_many_arguments)]
pub fn advance(
    state: &mut SimState,
    grid: &Grid,
    net: &ReactionNetwork,
    f: &CompiledRhs,
    ctrl: &StepControl,
    t_end: f64,
    cadence: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<SimTrace, PdeError> {
    ctrl.validate()?;
    let t0 = state.t;
    if !(t_end > t0) {
        return Err(PdeError::InvalidControl(format!(
            "t_end ({t_end}) must exceed the current time ({t0})"
        )));
    }
    if state.num_species() != net.num_species() || f.nvars() != net.num_species() {
        return Err(PdeError::ShapeMismatch(
            "state, network and right-hand side disagree on species count".into(),
        ));
    }
    if state.fields.iter().any(|u| u.len() != grid.len()) {
        return Err(PdeError::ShapeMismatch("field length differs from grid size".into()));
    }
    let dt = ctrl.dt;
    let span = t_end - t0;
    let nsteps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    let every = ((cadence / dt).round() as usize).max(1);

    let initial_mass: f64 = state.integrals(grid).iter().sum();
    let mut stepper = Stepper {
        solver: DiffusionSolver::new(grid),
        net,
        f,
        ctrl: *ctrl,
        log: PositivityLog::default(),
    };
    let mut samples = Vec::new();
    let record = |state: &SimState,
                      samples: &mut Vec<Sample>,
                      observers: &mut [&mut dyn Observer]|
     -> Result<(), PdeError> {
        for o in observers.iter_mut() {
            o.observe(grid, state)?;
        }
        samples.push(Sample {
            t: state.t,
            fields: state.fields.clone(),
        });
        Ok(())
    };
    record(state, &mut samples, observers)?;
    for k in 0..nsteps {
        let t_next = if k + 1 == nsteps {
            t_end
        } else {
            t0 + (k + 1) as f64 * dt
        };
        let h = t_next - state.t;
        stepper.step(state, h).map_err(|e| PdeError::AtTime {
            t: state.t,
            source: Box::new(e),
        })?;
        state.t = t_next;
        if (k + 1) % every == 0 || k + 1 == nsteps {
            record(state, &mut samples, observers)?;
        }
    }
    let clipped_mass = stepper.log.total_deficit() * grid.cell_volume();
    Ok(SimTrace {
        grid: grid.clone(),
        species: net.species().to_vec(),
        samples,
        steps: nsteps,
        clip_count: stepper.log.clips.len(),
        clipped_mass,
        retries: stepper.log.retries,
        initial_mass,
    })
}
