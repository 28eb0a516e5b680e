//! Floating-point form of a [`PolyVec`] for the inner loops of the solver.

use super::polynomial::{rational_to_f64, PolyVec};

/// A polynomial vector field with `f64` coefficients and a shared monomial
/// table, so each monomial is evaluated once per point.
#[derive(Clone, Debug)]
pub struct CompiledRhs {
    nvars: usize,
    // sparse exponent lists (var, power) per distinct monomial
    monomials: Vec<Vec<(usize, i32)>>,
    // per component: (monomial index, coefficient) in graded-lex order
    rows: Vec<Vec<(usize, f64)>>,
}

impl CompiledRhs {
    pub fn new(f: &PolyVec) -> Self {
        let support = f.support();
        let monomials = support
            .iter()
            .map(|m| {
                m.exponents()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| (v, e as i32))
                    .collect()
            })
            .collect();
        let rows = f
            .components()
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(m, c)| {
                        let idx = support.binary_search(m).expect("monomial in support");
                        (idx, rational_to_f64(c))
                    })
                    .collect()
            })
            .collect();
        CompiledRhs {
            nvars: f.nvars(),
            monomials,
            rows,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    /// Writes `f(u)` into `out`; `scratch` holds monomial values and must have
    /// length [`CompiledRhs::num_monomials`].
    #[inline]
    pub fn eval_into(&self, u: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        for (slot, mono) in scratch.iter_mut().zip(&self.monomials) {
            let mut acc = 1.0;
            for &(v, e) in mono {
                acc *= u[v].powi(e);
            }
            *slot = acc;
        }
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let mut s = 0.0;
            for &(idx, c) in row {
                s += c * scratch[idx];
            }
            *o = s;
        }
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let mut scratch = vec![0.0; self.monomials.len()];
        let mut out = vec![0.0; self.nvars];
        self.eval_into(u, &mut scratch, &mut out);
        out
    }

    /// Sum of `|c·u^μ|` per component; a scale for relative tolerances.
    pub fn abs_eval(&self, u: &[f64]) -> Vec<f64> {
        let mut scratch = vec![0.0; self.monomials.len()];
        let mut out = vec![0.0; self.nvars];
        self.eval_into(u, &mut scratch, &mut out);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(i, c)| (c * scratch[i]).abs()).sum())
            .collect()
    }
}
