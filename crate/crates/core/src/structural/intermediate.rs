//! Search for a lower-triangular matrix `A` and ordering `π` such that every
//! partial sum `Σ_{j≤k} a_kj f_π(j)` has only nonpositive coefficients in
//! degrees above `r`.
//!
//! Row `k` depends only on the first `k+1` species of the ordering, so the
//! search extends prefixes depth-first and remembers prefix sets from which
//! no completion exists.

use std::collections::HashSet;

use num::{BigRational, One, Signed, Zero};

use super::lp::{LinearProgram, LpOutcome, Relation};
use super::StructuralError;
use crate::netmodel::PolyVec;

/// Total LP constraints one search may build.
pub const MAX_TOTAL_CONSTRAINTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct IntermediateSumCert {
    /// `ordering[k]` is the species placed in row `k`.
    pub ordering: Vec<usize>,
    /// Full `m × m` matrix in ordering coordinates, zero above the diagonal.
    pub a: Vec<Vec<BigRational>>,
    pub r: u32,
}

impl IntermediateSumCert {
    /// Matrix with rows and columns indexed by species instead of rows of
    /// the ordering: entry `(π(k), π(j)) = a_kj`.
    pub fn species_matrix(&self) -> Vec<Vec<BigRational>> {
        let m = self.ordering.len();
        let mut out = vec![vec![BigRational::zero(); m]; m];
        for (k, &sk) in self.ordering.iter().enumerate() {
            for (j, &sj) in self.ordering.iter().enumerate() {
                out[sk][sj] = self.a[k][j].clone();
            }
        }
        out
    }
}

struct Search<'a> {
    f: &'a PolyVec,
    r: u32,
    budget: usize,
    limit: usize,
    dead: HashSet<u64>,
}

impl Search<'_> {
    /// Row LP for the prefix whose last entry sits on the diagonal.
    fn row(&mut self, prefix: &[usize]) -> Result<Option<Vec<BigRational>>, StructuralError> {
        let k = prefix.len();
        let mut lp = LinearProgram::new(k, vec![BigRational::one(); k]);
        let mut monos: Vec<_> = prefix
            .iter()
            .flat_map(|&s| self.f.component(s).monomials().cloned())
            .filter(|mono| mono.degree() > self.r)
            .collect();
        monos.sort();
        monos.dedup();
        for mono in monos {
            let coeffs: Vec<BigRational> = prefix.iter().map(|&s| self.f.component(s).coeff(&mono)).collect();
            // a_kk = 1 + y_kk, other entries free nonnegative
            let rhs = -coeffs[k - 1].clone();
            lp.push(coeffs, Relation::Le, rhs);
        }
        self.budget += lp.constraints.len();
        if self.budget > self.limit {
            return Err(StructuralError::LpTooLarge {
                constraints: self.budget,
                limit: self.limit,
            });
        }
        match lp.solve(self.limit)? {
            LpOutcome::Optimal { mut x, .. } => {
                x[k - 1] += BigRational::one();
                Ok(Some(x))
            }
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
        }
    }

    fn extend(
        &mut self,
        prefix: &mut Vec<usize>,
        rows: &mut Vec<Vec<BigRational>>,
        mask: u64,
    ) -> Result<bool, StructuralError> {
        let m = self.f.len();
        if prefix.len() == m {
            return Ok(true);
        }
        if self.dead.contains(&mask) {
            return Ok(false);
        }
        for s in 0..m {
            if mask & (1 << s) != 0 {
                continue;
            }
            prefix.push(s);
            if let Some(row) = self.row(prefix)? {
                rows.push(row);
                if self.extend(prefix, rows, mask | (1 << s))? {
                    return Ok(true);
                }
                rows.pop();
            }
            prefix.pop();
        }
        self.dead.insert(mask);
        Ok(false)
    }
}

/// Smallest `r ≤ r_max` with a certificate, searching orderings in
/// lexicographic order. Each row minimises the sum of its entries.
pub fn find_intermediate_sum(f: &PolyVec, r_max: u32) -> Result<Option<IntermediateSumCert>, StructuralError> {
    find_intermediate_sum_with_limit(f, r_max, MAX_TOTAL_CONSTRAINTS)
}

pub fn find_intermediate_sum_with_limit(
    f: &PolyVec,
    r_max: u32,
    limit: usize,
) -> Result<Option<IntermediateSumCert>, StructuralError> {
    if r_max < 1 {
        return Err(StructuralError::Precondition("r_max must be at least 1".into()));
    }
    let m = f.len();
    if m > 64 {
        return Err(StructuralError::Precondition("at most 64 species supported".into()));
    }
    let mut search = Search {
        f,
        r: 1,
        budget: 0,
        limit,
        dead: HashSet::new(),
    };
    for r in 1..=r_max {
        search.r = r;
        search.dead.clear();
        let mut prefix = Vec::with_capacity(m);
        let mut rows = Vec::with_capacity(m);
        if search.extend(&mut prefix, &mut rows, 0)? {
            let a = rows
                .into_iter()
                .map(|mut row| {
                    row.resize(m, BigRational::zero());
                    row
                })
                .collect();
            return Ok(Some(IntermediateSumCert { ordering: prefix, a, r }));
        }
    }
    Ok(None)
}

/// Exact re-check of a certificate, independent of the search: `A` lower
/// triangular and nonnegative with positive diagonal, and every row sum
/// nonpositive above degree `r`.
pub fn verify_intermediate_sum(f: &PolyVec, cert: &IntermediateSumCert) -> Result<bool, StructuralError> {
    let m = f.len();
    if cert.ordering.len() != m || cert.a.len() != m || cert.a.iter().any(|row| row.len() != m) {
        return Err(StructuralError::DimensionMismatch(format!(
            "certificate for {} species, system has {m}",
            cert.ordering.len()
        )));
    }
    let mut seen = vec![false; m];
    for &s in &cert.ordering {
        if s >= m || seen[s] {
            return Ok(false);
        }
        seen[s] = true;
    }
    for (k, row) in cert.a.iter().enumerate() {
        if !row[k].is_positive() || row.iter().any(|a| a.is_negative()) {
            return Ok(false);
        }
        if row[k + 1..].iter().any(|a| !a.is_zero()) {
            return Ok(false);
        }
        let mut weights = vec![BigRational::zero(); m];
        for j in 0..=k {
            weights[cert.ordering[j]] = row[j].clone();
        }
        let sum = f.weighted_sum(&weights);
        if sum.terms().any(|(mono, c)| mono.degree() > cert.r && c.is_positive()) {
            return Ok(false);
        }
    }
    Ok(true)
}
