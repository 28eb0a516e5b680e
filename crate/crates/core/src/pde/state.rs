use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid;
use super::PdeError;

/// Concentration fields at one instant. `fields[i][cell]` is species `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub fields: Vec<Vec<f64>>,
}

impl SimState {
    pub fn num_species(&self) -> usize {
        self.fields.len()
    }

    /// Discrete integral `Σ_cells u_i · |cell|` of every species.
    pub fn integrals(&self, grid: &Grid) -> Vec<f64> {
        let vol = grid.cell_volume();
        self.fields
            .iter()
            .map(|u| u.iter().sum::<f64>() * vol)
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.fields
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Initial profile of one species, sampled at cell centres.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `mean + amp·cos(πx/Lx)` (times `cos(πy/Ly)` in 2D).
    Cosine { mean: f64, amp: f64 },
    /// Independent uniform samples in `[lo, hi]`, seeded per species.
    Uniform { lo: f64, hi: f64 },
    /// Explicit cell values.
    Values(Vec<f64>),
}

/// Samples the profiles on the grid. Random profiles draw from
/// `ChaCha8(seed + species index)`.
pub fn init_state(grid: &Grid, profiles: &[Profile], seed: u64) -> Result<SimState, PdeError> {
    let mut fields = Vec::with_capacity(profiles.len());
    for (s, p) in profiles.iter().enumerate() {
        let u: Vec<f64> = match p {
            Profile::Constant(c) => vec![*c; grid.len()],
            Profile::Cosine { mean, amp } => (0..grid.len())
                .map(|k| {
                    let [x, y] = grid.center(k);
                    let mut v = (std::f64::consts::PI * x / grid.lengths()[0]).cos();
                    if grid.dim() == 2 {
                        v *= (std::f64::consts::PI * y / grid.lengths()[1]).cos();
                    }
                    mean + amp * v
                })
                .collect(),
            Profile::Uniform { lo, hi } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
                (0..grid.len()).map(|_| rng.gen_range(*lo..=*hi)).collect()
            }
            Profile::Values(v) => {
                if v.len() != grid.len() {
                    return Err(PdeError::ShapeMismatch(format!(
                        "species {s}: {} values for {} cells",
                        v.len(),
                        grid.len()
                    )));
                }
                v.clone()
            }
        };
        if let Some(cell) = u.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(PdeError::NegativeInitialData { species: s, cell });
        }
        fields.push(u);
    }
    Ok(SimState { t: 0.0, fields })
}
