//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems here are tiny (one row per monomial), so a dense tableau is
//! fine. Bland's rule guarantees termination without cycling.

use num::{BigRational, One, Signed, Zero};

use super::StructuralError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// `minimize objective·x` subject to the constraints and `x ≥ 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub nvars: usize,
    pub objective: Vec<BigRational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(nvars: usize, objective: Vec<BigRational>) -> Self {
        assert_eq!(objective.len(), nvars);
        LinearProgram {
            nvars,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.nvars);
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self, max_constraints: usize) -> Result<LpOutcome, StructuralError> {
        if self.constraints.len() > max_constraints {
            return Err(StructuralError::LpTooLarge {
                constraints: self.constraints.len(),
                limit: max_constraints,
            });
        }
        Ok(Tableau::build(self).run(&self.objective))
    }
}

struct Tableau {
    // rows[i] = coefficients over all columns, last entry = rhs
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    nvars: usize,
    ncols: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.nvars;
        let m = lp.constraints.len();
        // normalise to rhs >= 0
        let normalized: Vec<(Vec<BigRational>, Relation, BigRational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let n_slack = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let n_art = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let artificial_start = n + n_slack;
        let ncols = artificial_start + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, artificial_start);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![BigRational::zero(); ncols + 1];
            row[..n].clone_from_slice(&coeffs);
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = BigRational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -BigRational::one();
                    s += 1;
                    row[a] = BigRational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = BigRational::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            nvars: n,
            ncols,
            artificial_start,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = BigRational::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimises `cost` over the columns `< allowed`. Returns false when
    /// unbounded.
    fn optimize(&mut self, cost: &[BigRational], allowed: usize) -> bool {
        loop {
            // reduced cost d_j = c_j - c_B B^{-1} a_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        d -= &cost[b] * &row[j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leaving: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[c];
                let better = match &leaving {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn run(mut self, objective: &[BigRational]) -> LpOutcome {
        let mut phase1 = vec![BigRational::zero(); self.ncols];
        for v in phase1.iter_mut().skip(self.artificial_start) {
            *v = BigRational::one();
        }
        self.optimize(&phase1, self.ncols);
        let infeasible = self
            .rows
            .iter()
            .zip(&self.basis)
            .any(|(row, &b)| b >= self.artificial_start && row[self.ncols].is_positive());
        if infeasible {
            return LpOutcome::Infeasible;
        }
        // drive zero-valued artificials out of the basis
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // redundant row
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        let mut cost = vec![BigRational::zero(); self.ncols];
        cost[..self.nvars].clone_from_slice(objective);
        if !self.optimize(&cost, self.artificial_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![BigRational::zero(); self.nvars];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.nvars {
                x[b] = row[self.ncols].clone();
            }
        }
        let value = x
            .iter()
            .zip(objective)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{int, ratio};

    fn r(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn simple_minimum() {
        // min x + y s.t. x + 2y >= 3, 3x + y >= 4
        let mut lp = LinearProgram::new(2, r(&[1, 1]));
        lp.push(r(&[1, 2]), Relation::Ge, int(3));
        lp.push(r(&[3, 1]), Relation::Ge, int(4));
        match lp.solve(100).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![int(1), int(1)]);
                assert_eq!(value, int(2));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn equality_and_fraction() {
        // min x s.t. 2x + 3y = 1, x - y >= 0
        let mut lp = LinearProgram::new(2, r(&[1, 0]));
        lp.push(r(&[2, 3]), Relation::Eq, int(1));
        lp.push(r(&[1, -1]), Relation::Ge, int(0));
        match lp.solve(100).unwrap() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![ratio(1, 5), ratio(1, 5)]),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::new(1, r(&[1]));
        lp.push(r(&[1]), Relation::Le, int(-1));
        assert_eq!(lp.solve(10).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(1, r(&[-1]));
        lp.push(r(&[1]), Relation::Ge, int(0));
        assert_eq!(lp.solve(10).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2, r(&[1, 1]));
        lp.push(r(&[1, -1]), Relation::Eq, int(0));
        lp.push(r(&[2, -2]), Relation::Eq, int(0));
        lp.push(r(&[1, 0]), Relation::Ge, int(1));
        match lp.solve(10).unwrap() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, r(&[1, 1])),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example (Beale) under Bland's rule
        let mut lp = LinearProgram::new(
            4,
            vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6)],
        );
        lp.push(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Relation::Le, int(0));
        lp.push(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Relation::Le, int(0));
        lp.push(r(&[0, 0, 1, 0]), Relation::Le, int(1));
        match lp.solve(10).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(-1, 20)),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn size_limit_enforced() {
        let mut lp = LinearProgram::new(1, r(&[1]));
        for _ in 0..3 {
            lp.push(r(&[1]), Relation::Ge, int(0));
        }
        assert!(matches!(lp.solve(2), Err(StructuralError::LpTooLarge { .. })));
    }
}
