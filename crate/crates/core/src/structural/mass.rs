use num::{BigRational, One, Signed, Zero};

use super::lp::{LinearProgram, LpOutcome, Relation};
use super::StructuralError;
use crate::netmodel::{PolyVec, Polynomial};

/// Constraint cap for a single mass-control LP.
pub const MAX_LP_CONSTRAINTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassClass {
    /// `Σ α_i f_i ≡ 0`.
    Conservation,
    /// Every coefficient of `Σ α_i f_i` is `≤ 0`.
    Dissipation,
    /// `Σ α_i f_i ≤ K(1 + Σ α_i u_i)`.
    Control,
    None,
}

impl MassClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            MassClass::Conservation => "conservation",
            MassClass::Dissipation => "dissipation",
            MassClass::Control => "control",
            MassClass::None => "none",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassControlCert {
    /// Weights `α_i ≥ 1`; empty when the class is `None`.
    pub alpha: Vec<BigRational>,
    pub k: BigRational,
    pub class: MassClass,
}

impl MassControlCert {
    /// `K = 0`: mass is nonincreasing.
    pub fn is_dissipative(&self) -> bool {
        matches!(self.class, MassClass::Conservation | MassClass::Dissipation)
    }
}

/// Solves `min Σ α_i` over `α_i ≥ 1` with one constraint per monomial.
/// `filter` selects the constrained monomials.
fn weight_lp(
    f: &PolyVec,
    rel: Relation,
    filter: impl Fn(u32) -> bool,
) -> Result<Option<Vec<BigRational>>, StructuralError> {
    let m = f.len();
    // α = 1 + y, y ≥ 0
    let mut lp = LinearProgram::new(m, vec![BigRational::one(); m]);
    for mono in f.support() {
        if !filter(mono.degree()) {
            continue;
        }
        let coeffs: Vec<BigRational> = f.components().iter().map(|p| p.coeff(&mono)).collect();
        let rhs = -coeffs.iter().fold(BigRational::zero(), |a, c| a + c);
        lp.push(coeffs, rel, rhs);
    }
    match lp.solve(MAX_LP_CONSTRAINTS)? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x.into_iter().map(|y| y + BigRational::one()).collect())),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
    }
}

/// Smallest `K ≥ 0` with `Σ α_i f_i ≤ K(1 + Σ α_i u_i)` monomial-wise,
/// assuming all monomials of degree ≥ 2 are already nonpositive.
pub(super) fn control_constant(sum: &Polynomial, alpha: &[BigRational]) -> BigRational {
    let mut k = BigRational::zero();
    for (mono, c) in sum.terms() {
        if !c.is_positive() {
            continue;
        }
        let bound = match mono.degree() {
            0 => c.clone(),
            1 => {
                let j = mono.exponents().iter().position(|&e| e == 1).unwrap();
                c / &alpha[j]
            }
            _ => continue,
        };
        if bound > k {
            k = bound;
        }
    }
    k
}

/// Finds the tightest of conservation, dissipation, control (in that
/// order) with minimal `Σ α_i`.
pub fn find_mass_control(f: &PolyVec) -> Result<MassControlCert, StructuralError> {
    let tries = [
        (MassClass::Conservation, Relation::Eq, 0u32),
        (MassClass::Dissipation, Relation::Le, 0),
        (MassClass::Control, Relation::Le, 2),
    ];
    for (class, rel, min_deg) in tries {
        if let Some(alpha) = weight_lp(f, rel, |d| d >= min_deg)? {
            let k = if class == MassClass::Control {
                control_constant(&f.weighted_sum(&alpha), &alpha)
            } else {
                BigRational::zero()
            };
            return Ok(MassControlCert { alpha, k, class });
        }
    }
    Ok(MassControlCert {
        alpha: Vec::new(),
        k: BigRational::zero(),
        class: MassClass::None,
    })
}

/// Re-checks a certificate exactly, independently of how it was found.
pub fn verify_mass_control(f: &PolyVec, cert: &MassControlCert) -> Result<bool, StructuralError> {
    if cert.class == MassClass::None {
        return Ok(true);
    }
    if cert.alpha.len() != f.len() {
        return Err(StructuralError::DimensionMismatch(format!(
            "{} weights for {} species",
            cert.alpha.len(),
            f.len()
        )));
    }
    if cert.alpha.iter().any(|a| !a.is_positive()) || cert.k.is_negative() {
        return Ok(false);
    }
    let sum = f.weighted_sum(&cert.alpha);
    let ok = match cert.class {
        MassClass::Conservation => sum.is_zero(),
        MassClass::Dissipation => sum.terms().all(|(_, c)| !c.is_positive()),
        MassClass::Control => {
            sum.terms()
                .all(|(mono, c)| mono.degree() <= 1 || !c.is_positive())
                && control_constant(&sum, &cert.alpha) <= cert.k
        }
        MassClass::None => true,
    };
    Ok(ok)
}
