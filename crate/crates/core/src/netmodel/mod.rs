//! Exact representation of species, reactions and the mass-action
//! polynomial right-hand side.

mod compiled;
mod network;
mod polynomial;

pub use compiled::CompiledRhs;
pub use network::{Reaction, ReactionNetwork};
pub use polynomial::{int, ratio, rational_to_f64, Monomial, PolyVec, Polynomial};

use num::BigRational;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate species `{0}`")]
    DuplicateSpecies(String),
    #[error("diffusion coefficient of `{0}` must be positive")]
    NonpositiveDiffusion(String),
    #[error("reactant and product complexes are identical")]
    ZeroNetStoichiometry,
    #[error("forward rate must be positive and backward rate nonnegative")]
    NonpositiveRate,
    #[error("malformed polynomial text at line {line}: {message}")]
    Format { line: usize, message: String },
}

/// `compile_rhs` as a free function.
pub fn compile_rhs(net: &ReactionNetwork) -> PolyVec {
    net.compile_rhs()
}

pub fn eval_rhs(f: &PolyVec, u: &[f64]) -> Result<Vec<f64>, NetError> {
    f.eval(u)
}

pub fn jacobian(f: &PolyVec) -> Vec<Vec<Polynomial>> {
    f.jacobian()
}

pub fn growth_degree(f: &PolyVec) -> u32 {
    f.growth_degree()
}

/// Evaluates an exact Jacobian at a point.
pub fn eval_jacobian(jac: &[Vec<Polynomial>], u: &[f64]) -> Vec<Vec<f64>> {
    jac.iter()
        .map(|row| row.iter().map(|p| p.eval(u)).collect())
        .collect()
}

/// Knobs for [`random_network`].
#[derive(Clone, Debug)]
pub struct RandomNetworkSpec {
    pub max_species: usize,
    pub max_reactions: usize,
    pub max_coeff: u32,
    pub reversible_prob: f64,
}

impl Default for RandomNetworkSpec {
    fn default() -> Self {
        RandomNetworkSpec {
            max_species: 5,
            max_reactions: 6,
            max_coeff: 3,
            reversible_prob: 0.5,
        }
    }
}

/// Draws a valid random mass-action network. Used by property tests.
pub fn random_network<R: Rng>(rng: &mut R, spec: &RandomNetworkSpec) -> ReactionNetwork {
    let m = rng.gen_range(1..=spec.max_species);
    let species: Vec<String> = (0..m).map(|i| format!("S{}", i + 1)).collect();
    let diffusion: Vec<BigRational> = (0..m)
        .map(|_| ratio(rng.gen_range(1..=40), rng.gen_range(1..=8)))
        .collect();
    let nr = rng.gen_range(0..=spec.max_reactions);
    let mut reactions = Vec::with_capacity(nr);
    let complex = |rng: &mut R| -> Vec<u32> {
        let mut c = vec![0u32; m];
        let terms = rng.gen_range(1..=m.min(3));
        for _ in 0..terms {
            c[rng.gen_range(0..m)] = rng.gen_range(1..=spec.max_coeff);
        }
        c
    };
    while reactions.len() < nr {
        let a = complex(rng);
        let b = complex(rng);
        if a == b {
            continue;
        }
        let kf = ratio(rng.gen_range(1..=20), rng.gen_range(1..=4));
        let kb = if rng.gen_bool(spec.reversible_prob) {
            ratio(rng.gen_range(1..=20), rng.gen_range(1..=4))
        } else {
            int(0)
        };
        reactions.push(Reaction::new(a, b, kf, kb).expect("valid by construction"));
    }
    ReactionNetwork::new(species, reactions, diffusion).expect("valid by construction")
}
