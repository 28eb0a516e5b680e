use std::collections::HashSet;

use num::{BigInt, BigRational, Signed, Zero};

use super::polynomial::{Monomial, PolyVec, Polynomial};
use super::NetError;

/// One (possibly reversible) mass-action reaction `ν → ν′`.
///
/// An irreversible reaction has `rate_backward == 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reaction {
    pub reactant: Vec<u32>,
    pub product: Vec<u32>,
    pub rate_forward: BigRational,
    pub rate_backward: BigRational,
}

impl Reaction {
    pub fn new(
        reactant: Vec<u32>,
        product: Vec<u32>,
        rate_forward: BigRational,
        rate_backward: BigRational,
    ) -> Result<Self, NetError> {
        if reactant.len() != product.len() {
            return Err(NetError::DimensionMismatch {
                expected: reactant.len(),
                found: product.len(),
            });
        }
        if reactant == product {
            return Err(NetError::ZeroNetStoichiometry);
        }
        if !rate_forward.is_positive() || rate_backward.is_negative() {
            return Err(NetError::NonpositiveRate);
        }
        Ok(Reaction {
            reactant,
            product,
            rate_forward,
            rate_backward,
        })
    }

    pub fn irreversible(reactant: Vec<u32>, product: Vec<u32>, rate: BigRational) -> Result<Self, NetError> {
        Self::new(reactant, product, rate, BigRational::zero())
    }

    pub fn is_reversible(&self) -> bool {
        self.rate_backward.is_positive()
    }

    /// Net stoichiometric change `ν′ − ν`.
    pub fn net_change(&self) -> Vec<i64> {
        self.product
            .iter()
            .zip(&self.reactant)
            .map(|(&p, &r)| p as i64 - r as i64)
            .collect()
    }
}

/// Species, reactions and diffusion coefficients of a reaction-diffusion
/// system. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    reactions: Vec<Reaction>,
    diffusion: Vec<BigRational>,
}

impl ReactionNetwork {
    pub fn new(
        species: Vec<String>,
        reactions: Vec<Reaction>,
        diffusion: Vec<BigRational>,
    ) -> Result<Self, NetError> {
        let mut seen = HashSet::new();
        for s in &species {
            if !seen.insert(s.as_str()) {
                return Err(NetError::DuplicateSpecies(s.clone()));
            }
        }
        let m = species.len();
        if diffusion.len() != m {
            return Err(NetError::DimensionMismatch {
                expected: m,
                found: diffusion.len(),
            });
        }
        if let Some(i) = diffusion.iter().position(|d| !d.is_positive()) {
            return Err(NetError::NonpositiveDiffusion(species[i].clone()));
        }
        for r in &reactions {
            if r.reactant.len() != m {
                return Err(NetError::DimensionMismatch {
                    expected: m,
                    found: r.reactant.len(),
                });
            }
        }
        Ok(ReactionNetwork {
            species,
            reactions,
            diffusion,
        })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn diffusion(&self) -> &[BigRational] {
        &self.diffusion
    }

    pub fn diffusion_f64(&self) -> Vec<f64> {
        self.diffusion.iter().map(super::rational_to_f64).collect()
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// Same network with every rate constant multiplied by `c`.
    pub fn with_scaled_rates(&self, c: &BigRational) -> ReactionNetwork {
        let reactions = self
            .reactions
            .iter()
            .map(|r| Reaction {
                rate_forward: &r.rate_forward * c,
                rate_backward: &r.rate_backward * c,
                ..r.clone()
            })
            .collect();
        ReactionNetwork {
            reactions,
            ..self.clone()
        }
    }

    /// Stoichiometric matrix, one column per reaction (`m × R`).
    pub fn stoichiometric_matrix(&self) -> Vec<Vec<BigRational>> {
        let m = self.num_species();
        let mut s = vec![Vec::with_capacity(self.reactions.len()); m];
        for r in &self.reactions {
            for (i, d) in r.net_change().into_iter().enumerate() {
                s[i].push(BigRational::from_integer(BigInt::from(d)));
            }
        }
        s
    }

    /// Mass-action right-hand side:
    /// `f_i = Σ_r (ν′_i − ν_i)(k_f u^ν − k_b u^ν′)`.
    pub fn compile_rhs(&self) -> PolyVec {
        let m = self.num_species();
        let mut comps: Vec<Polynomial> = (0..m).map(|_| Polynomial::zero(m)).collect();
        for r in &self.reactions {
            let fwd = Monomial::new(r.reactant.clone());
            let bwd = Monomial::new(r.product.clone());
            for (i, d) in r.net_change().into_iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let d = BigRational::from_integer(BigInt::from(d));
                comps[i].add_term(fwd.clone(), &d * &r.rate_forward);
                if !r.rate_backward.is_zero() {
                    comps[i].add_term(bwd.clone(), -(&d * &r.rate_backward));
                }
            }
        }
        PolyVec::new(comps).expect("components share the species count")
    }
}
