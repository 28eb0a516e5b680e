use rayon::prelude::*;

use super::{PdeError, PositivityMode, SimState, StepControl};
use crate::netmodel::CompiledRhs;

/// Any concentration above this is treated as numerical blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e30;
/// Step halvings allowed per sub-step in reject-retry mode.
pub const MAX_RETRIES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct ClipEvent {
    pub cell: usize,
    pub species: usize,
    /// Magnitude of the negative value that was clamped to zero.
    pub deficit: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PositivityLog {
    pub clips: Vec<ClipEvent>,
    pub retries: usize,
}

impl PositivityLog {
    /// Sum of clamped deficits (concentration units, not yet integrated).
    pub fn total_deficit(&self) -> f64 {
        self.clips.iter().map(|c| c.deficit).sum()
    }

    pub fn merge(&mut self, other: PositivityLog) {
        self.clips.extend(other.clips);
        self.retries += other.retries;
    }
}

enum CellFailure {
    Positivity { species: usize },
    Blowup { species: usize, value: f64 },
}

struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    scratch: Vec<f64>,
}

impl Rk4 {
    fn new(f: &CompiledRhs) -> Self {
        let m = f.nvars();
        Rk4 {
            k: std::array::from_fn(|_| vec![0.0; m]),
            tmp: vec![0.0; m],
            scratch: vec![0.0; f.num_monomials()],
        }
    }

    fn step(&mut self, f: &CompiledRhs, u: &[f64], h: f64, out: &mut [f64]) {
        let m = u.len();
        f.eval_into(u, &mut self.scratch, &mut self.k[0]);
        for i in 0..m {
            self.tmp[i] = u[i] + 0.5 * h * self.k[0][i];
        }
        f.eval_into(&self.tmp, &mut self.scratch, &mut self.k[1]);
        for i in 0..m {
            self.tmp[i] = u[i] + 0.5 * h * self.k[1][i];
        }
        f.eval_into(&self.tmp, &mut self.scratch, &mut self.k[2]);
        for i in 0..m {
            self.tmp[i] = u[i] + h * self.k[2][i];
        }
        f.eval_into(&self.tmp, &mut self.scratch, &mut self.k[3]);
        for i in 0..m {
            out[i] = u[i]
                + h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
    }
}

fn check_blowup(u: &[f64]) -> Result<(), CellFailure> {
    for (s, &v) in u.iter().enumerate() {
        if !v.is_finite() || v.abs() > BLOWUP_THRESHOLD {
            return Err(CellFailure::Blowup { species: s, value: v });
        }
    }
    Ok(())
}

fn integrate_cell(
    f: &CompiledRhs,
    rk: &mut Rk4,
    u: &mut [f64],
    dt: f64,
    ctrl: &StepControl,
    cell: usize,
    log: &mut PositivityLog,
) -> Result<(), CellFailure> {
    let n = ctrl.reaction_substeps;
    let h = dt / n as f64;
    let mut next = vec![0.0; u.len()];
    for _ in 0..n {
        match ctrl.positivity {
            PositivityMode::ClipReport => {
                rk.step(f, u, h, &mut next);
                check_blowup(&next)?;
                for (s, v) in next.iter_mut().enumerate() {
                    if *v < 0.0 {
                        log.clips.push(ClipEvent {
                            cell,
                            species: s,
                            deficit: -*v,
                        });
                        *v = 0.0;
                    }
                }
                u.copy_from_slice(&next);
            }
            PositivityMode::RejectRetry => {
                let start = u.to_vec();
                let mut level = 0;
                'retry: loop {
                    u.copy_from_slice(&start);
                    let pieces = 1usize << level;
                    let hh = h / pieces as f64;
                    for _ in 0..pieces {
                        rk.step(f, u, hh, &mut next);
                        check_blowup(&next)?;
                        if let Some(s) = next.iter().position(|&v| v < 0.0) {
                            if level == MAX_RETRIES {
                                return Err(CellFailure::Positivity { species: s });
                            }
                            level += 1;
                            log.retries += 1;
                            continue 'retry;
                        }
                        u.copy_from_slice(&next);
                    }
                    break;
                }
            }
        }
    }
    Ok(())
}

/// Integrates `u' = f(u)` cell by cell over `dt` with sub-stepped RK4.
///
/// Cells are independent, so they are processed in parallel; the log is
/// merged in cell order so the result does not depend on scheduling.
pub fn reaction_step(
    state: &mut SimState,
    f: &CompiledRhs,
    dt: f64,
    ctrl: &StepControl,
) -> Result<PositivityLog, PdeError> {
    let m = state.num_species();
    if m == 0 || f.is_zero() {
        return Ok(PositivityLog::default());
    }
    let ncells = state.fields[0].len();
    const CHUNK: usize = 256;
    let fields = &state.fields;
    let results: Vec<Result<(Vec<f64>, PositivityLog), PdeError>> = (0..ncells.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(ncells);
            let mut rk = Rk4::new(f);
            let mut log = PositivityLog::default();
            let mut out = Vec::with_capacity((hi - lo) * m);
            let mut u = vec![0.0; m];
            for cell in lo..hi {
                for s in 0..m {
                    u[s] = fields[s][cell];
                }
                integrate_cell(f, &mut rk, &mut u, dt, ctrl, cell, &mut log).map_err(|e| match e {
                    CellFailure::Positivity { species } => PdeError::PositivityFailure {
                        species,
                        cell,
                        retries: MAX_RETRIES,
                    },
                    CellFailure::Blowup { species, value } => PdeError::BlowupDetected {
                        t: state.t,
                        species,
                        cell,
                        value,
                    },
                })?;
                out.extend_from_slice(&u);
            }
            Ok((out, log))
        })
        .collect();
    let mut log = PositivityLog::default();
    let mut updated = Vec::with_capacity(results.len());
    for r in results {
        let (vals, l) = r?;
        log.merge(l);
        updated.push(vals);
    }
    for (chunk, vals) in updated.into_iter().enumerate() {
        let lo = chunk * CHUNK;
        for (k, cellvals) in vals.chunks(m).enumerate() {
            for s in 0..m {
                state.fields[s][lo + k] = cellvals[s];
            }
        }
    }
    Ok(log)
}
