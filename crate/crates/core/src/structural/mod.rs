//! Certificates for the structural hypotheses of a mass-action system:
//! quasipositivity, mass control, entropy dissipation, intermediate sums,
//! and the quasi-uniform diffusion criterion.
//!
//! Everything that decides a hypothesis works over exact rationals; floats
//! only appear in the entropy sampling and the max-regularity estimate.

mod entropy;
mod intermediate;
mod lp;
mod mass;
mod maxreg;
mod report;

pub use entropy::{check_entropy_dissipation, EntropyCert, DEFAULT_ENTROPY_SAMPLES};
pub use intermediate::{
    find_intermediate_sum, find_intermediate_sum_with_limit, verify_intermediate_sum,
    IntermediateSumCert, MAX_TOTAL_CONSTRAINTS,
};
pub use lp::{Constraint, LinearProgram, LpOutcome, Relation};
pub use mass::{find_mass_control, verify_mass_control, MassClass, MassControlCert, MAX_LP_CONSTRAINTS};
pub use maxreg::{
    check_quasi_uniform, estimate_maxreg_constant, estimate_maxreg_with, maxreg_dictionary_bound,
    MaxRegEstimate, MaxRegSettings, QuasiUniformQuery, QuasiUniformResult, Verdict,
};
pub use report::{analyze, AnalyzeOptions, Applicability, EntropyStatus, StructuralReport};

use num::{BigRational, Signed};
use thiserror::Error;

use crate::netmodel::{Monomial, PolyVec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructuralError {
    #[error("linear program too large: {constraints} constraints (limit {limit})")]
    LpTooLarge { constraints: usize, limit: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no complex-balance certificate: solver stopped after {iterations} iterations with defect {residual:e}")]
    NoComplexBalance { iterations: usize, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("power iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("estimator dictionary contains no nonzero field")]
    EmptyDictionary,
    #[error(transparent)]
    Pde(#[from] crate::pde::PdeError),
}

/// A negative monomial of `f_i` that does not contain `u_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiWitness {
    pub species: usize,
    pub monomial: Monomial,
    pub coeff: BigRational,
}

/// `Ok(())` when every negative monomial of `f_i` contains `u_i`, otherwise
/// the first violating term in species then graded-lex order.
pub fn check_quasipositivity(f: &PolyVec) -> Result<(), QuasiWitness> {
    for (i, p) in f.components().iter().enumerate() {
        for (mono, c) in p.terms() {
            if c.is_negative() && mono.exponent(i) == 0 {
                return Err(QuasiWitness {
                    species: i,
                    monomial: mono.clone(),
                    coeff: c.clone(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
