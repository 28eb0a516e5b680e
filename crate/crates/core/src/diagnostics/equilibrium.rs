//! Positive equilibria on a fixed stoichiometric class.

use nalgebra::{DMatrix, DVector};
use num::{BigRational, One, Signed, Zero};

use super::DiagError;
use crate::netmodel::{rational_to_f64, ReactionNetwork};
use crate::pde::SimState;

pub const MAX_NEWTON_ITER: usize = 500;
const TARGET: f64 = 1e-13;
const ACCEPT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult {
    pub u_inf: Vec<f64>,
    /// `max(‖f(u_inf)‖_∞, ‖C u_inf − totals‖_∞)`, re-evaluated at the end.
    pub residual: f64,
    pub conserved_values: Vec<f64>,
    pub iterations: usize,
}

/// Reduced row echelon form in place; returns pivot columns. Columns are
/// visited in `order`.
fn rref(a: &mut [Vec<BigRational>], order: &[usize]) -> Vec<usize> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in order {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = BigRational::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact basis of the left null space of the stoichiometric matrix, i.e.
/// the linear conservation laws `c · u = const`. Pivots are taken from the
/// last species first, which yields nonnegative laws for the usual
/// "reactants before products" species order.
pub fn conservation_laws(net: &ReactionNetwork) -> Vec<Vec<BigRational>> {
    let m = net.num_species();
    let s = net.stoichiometric_matrix();
    let nr = net.reactions().len();
    // rows of Sᵀ
    let mut st: Vec<Vec<BigRational>> = (0..nr).map(|j| (0..m).map(|i| s[i][j].clone()).collect()).collect();
    let order: Vec<usize> = (0..m).rev().collect();
    let pivots = rref(&mut st, &order);
    let mut basis = Vec::new();
    for free in (0..m).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); m];
        v[free] = BigRational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -st[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Spatial means of `state` projected onto each law.
pub fn totals_from_means(laws: &[Vec<BigRational>], state: &SimState, measure: f64, cell_volume: f64) -> Vec<f64> {
    let means: Vec<f64> = state.fields.iter().map(|f| f.iter().sum::<f64>() * cell_volume / measure).collect();
    laws.iter()
        .map(|c| c.iter().zip(&means).map(|(ci, u)| rational_to_f64(ci) * u).sum())
        .collect()
}

/// Species whose stoichiometric rows are linearly independent; their rate
/// equations determine the rest.
fn independent_species(net: &ReactionNetwork) -> Vec<usize> {
    let mut s = net.stoichiometric_matrix();
    let m = s.len();
    let mut chosen = Vec::new();
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    for (i, row) in s.drain(..).enumerate() {
        let mut trial = basis.clone();
        trial.push(row.clone());
        let ncols = row.len();
        let order: Vec<usize> = (0..ncols).collect();
        if rref(&mut trial, &order).len() > basis.len() {
            basis.push(row);
            chosen.push(i);
        }
        if chosen.len() == m {
            break;
        }
    }
    chosen
}

/// Damped Newton in `x = log u` for `f(u) = 0` on the class `C u = totals`.
/// Starts from the constant state that best matches the totals.
pub fn solve_equilibrium(
    net: &ReactionNetwork,
    conserved: &[Vec<BigRational>],
    totals: &[f64],
) -> Result<EquilibriumResult, DiagError> {
    let m = net.num_species();
    if conserved.len() != totals.len() {
        return Err(DiagError::DimensionMismatch(format!(
            "{} laws but {} totals",
            conserved.len(),
            totals.len()
        )));
    }
    if let Some(c) = conserved.iter().find(|c| c.len() != m) {
        return Err(DiagError::DimensionMismatch(format!("law of length {} for {m} species", c.len())));
    }
    if let Some((index, &value)) = totals.iter().enumerate().find(|(_, t)| !(**t > 0.0)) {
        return Err(DiagError::NonPositiveTotal { index, value });
    }
    let eqs = independent_species(net);
    if eqs.len() + conserved.len() != m {
        return Err(DiagError::Precondition(format!(
            "{} independent rate equations and {} conservation laws for {m} species",
            eqs.len(),
            conserved.len()
        )));
    }
    if conserved.iter().any(|c| c.iter().all(|x| !x.is_positive())) {
        return Err(DiagError::Precondition("each conservation law needs a positive entry".into()));
    }
    let f = net.compile_rhs();
    let jac = f.jacobian();
    let c: Vec<Vec<f64>> = conserved.iter().map(|row| row.iter().map(rational_to_f64).collect()).collect();
    let scale: Vec<f64> = totals.iter().map(|t| t.max(1.0)).collect();

    let residual_vec = |u: &[f64]| -> DVector<f64> {
        let fu = f.eval(u).expect("dimension checked");
        let mut g = DVector::zeros(m);
        for (k, &i) in eqs.iter().enumerate() {
            g[k] = fu[i];
        }
        for (k, row) in c.iter().enumerate() {
            let cu: f64 = row.iter().zip(u).map(|(a, b)| a * b).sum();
            g[eqs.len() + k] = (cu - totals[k]) / scale[k];
        }
        g
    };
    let norm = |g: &DVector<f64>| g.amax();

    // constant start matched to the totals in least squares
    let (num, den) = c.iter().zip(totals).fold((0.0, 0.0), |(n, d), (row, t)| {
        let s: f64 = row.iter().sum();
        (n + s * t, d + s * s)
    });
    let s0 = if den > 0.0 && num > 0.0 { num / den } else { 1.0 };
    let mut x = DVector::from_element(m, s0.ln());
    let to_u = |x: &DVector<f64>| -> Vec<f64> { x.iter().map(|v| v.exp()).collect() };
    let mut u = to_u(&x);
    let mut g = residual_vec(&u);
    for it in 0..MAX_NEWTON_ITER {
        if norm(&g) <= TARGET {
            return finish(&f, &c, totals, u, it);
        }
        let jf = crate::netmodel::eval_jacobian(&jac, &u);
        let mut j = DMatrix::zeros(m, m);
        for (k, &i) in eqs.iter().enumerate() {
            for l in 0..m {
                j[(k, l)] = jf[i][l] * u[l];
            }
        }
        for (k, row) in c.iter().enumerate() {
            for l in 0..m {
                j[(eqs.len() + k, l)] = row[l] * u[l] / scale[k];
            }
        }
        let dx = j.lu().solve(&(-&g)).ok_or(DiagError::SingularJacobian)?;
        // cap the step in log space, then backtrack on the residual
        let cap = 2.0 / dx.amax().max(2.0);
        let mut t = cap;
        let g0 = norm(&g);
        loop {
            let xn = &x + &dx * t;
            let un = to_u(&xn);
            if un.iter().all(|v| v.is_finite() && *v > 0.0) {
                let gn = residual_vec(&un);
                if norm(&gn) < g0 || t < 1e-10 {
                    x = xn;
                    u = un;
                    g = gn;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(DiagError::NonConvergence {
                    iterations: it + 1,
                    residual: g0,
                });
            }
        }
    }
    let res = norm(&g);
    if res <= ACCEPT {
        return finish(&f, &c, totals, u, MAX_NEWTON_ITER);
    }
    Err(DiagError::NonConvergence {
        iterations: MAX_NEWTON_ITER,
        residual: res,
    })
}

/// Re-evaluates the residual independently of the Newton bookkeeping.
fn finish(
    f: &crate::netmodel::PolyVec,
    c: &[Vec<f64>],
    totals: &[f64],
    u: Vec<f64>,
    iterations: usize,
) -> Result<EquilibriumResult, DiagError> {
    let fu = f.eval(&u).expect("dimension checked");
    let rate = fu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let conserved_values: Vec<f64> = c.iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect();
    let cons = conserved_values
        .iter()
        .zip(totals)
        .fold(0.0f64, |a, (v, t)| a.max((v - t).abs() / t.max(1.0)));
    let residual = rate.max(cons);
    if residual > ACCEPT {
        return Err(DiagError::NonConvergence { iterations, residual });
    }
    Ok(EquilibriumResult {
        u_inf: u,
        residual,
        conserved_values,
        iterations,
    })
}
