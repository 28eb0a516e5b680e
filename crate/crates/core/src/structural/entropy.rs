//! Entropy certificates through complex-balanced equilibria.
//!
//! A complex-balanced `z > 0` makes `Σ_i log(u_i/z_i) f_i(u) ≤ 0` on the open
//! orthant, so finding one certifies the shifted entropy
//! `h_i(u) = u log(u/z_i) − u + z_i`. The inequality is then spot-checked on
//! a Halton point set.

use nalgebra::{DMatrix, DVector};

use super::StructuralError;
use crate::netmodel::{rational_to_f64, CompiledRhs, ReactionNetwork};

pub const DEFAULT_ENTROPY_SAMPLES: usize = 10_000;
const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyCert {
    pub z: Vec<f64>,
    /// Largest complex-balance defect at `z`.
    pub residual: f64,
    /// False when `z` is the all-ones vector, i.e. `h_i(u) = u log u − u + 1`.
    pub shifted: bool,
    pub samples: usize,
    /// First sample point where the dissipation inequality failed.
    pub sample_violation: Option<Vec<f64>>,
}

impl EntropyCert {
    pub fn is_dissipative(&self) -> bool {
        self.sample_violation.is_none()
    }
}

struct Edge {
    from: usize,
    to: usize,
    rate: f64,
}

struct ComplexGraph {
    complexes: Vec<Vec<u32>>,
    edges: Vec<Edge>,
}

impl ComplexGraph {
    fn new(net: &ReactionNetwork) -> Self {
        let mut complexes: Vec<Vec<u32>> = Vec::new();
        let index = |c: &Vec<u32>, complexes: &mut Vec<Vec<u32>>| match complexes.iter().position(|x| x == c) {
            Some(i) => i,
            None => {
                complexes.push(c.clone());
                complexes.len() - 1
            }
        };
        let mut edges = Vec::new();
        for r in net.reactions() {
            let a = index(&r.reactant, &mut complexes);
            let b = index(&r.product, &mut complexes);
            edges.push(Edge {
                from: a,
                to: b,
                rate: rational_to_f64(&r.rate_forward),
            });
            if r.is_reversible() {
                edges.push(Edge {
                    from: b,
                    to: a,
                    rate: rational_to_f64(&r.rate_backward),
                });
            }
        }
        ComplexGraph { complexes, edges }
    }

    /// Defect per complex (outflow − inflow) and its Jacobian in `x = log z`.
    fn defect(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let nc = self.complexes.len();
        let m = x.len();
        let mut g = DVector::zeros(nc);
        let mut jac = DMatrix::zeros(nc, m);
        for e in &self.edges {
            let y = &self.complexes[e.from];
            let flux = e.rate * y.iter().zip(x).map(|(&k, xi)| k as f64 * xi).sum::<f64>().exp();
            g[e.from] += flux;
            g[e.to] -= flux;
            for j in 0..m {
                let d = flux * y[j] as f64;
                jac[(e.from, j)] += d;
                jac[(e.to, j)] -= d;
            }
        }
        (g, jac)
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Levenberg–Marquardt on the complex-balance defect in log coordinates,
/// started from `z = 1`.
fn complex_balance(graph: &ComplexGraph, m: usize, tol: f64) -> Result<(Vec<f64>, f64), StructuralError> {
    let mut x = vec![0.0; m];
    let (mut g, mut jac) = graph.defect(&x);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        let res = max_abs(&g);
        if res <= tol {
            return Ok((x.iter().map(|v| v.exp()).collect(), res));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &g);
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&rhs) else {
                lambda *= 10.0;
                continue;
            };
            // keep z within a sane range
            let scale = step.amax().max(1.0);
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi + s / scale).collect();
            let (g2, j2) = graph.defect(&cand);
            if g2.norm() < g.norm() {
                x = cand;
                g = g2;
                jac = j2;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    let res = max_abs(&g);
    if res <= tol {
        return Ok((x.iter().map(|v| v.exp()).collect(), res));
    }
    Err(StructuralError::NoComplexBalance {
        iterations: MAX_ITERATIONS,
        residual: res,
    })
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut k = 2u64;
    while out.len() < n {
        if (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Finds a complex-balanced equilibrium and samples the dissipation
/// inequality at `samples` Halton points in `(1e-3, 1e3)^m`.
///
/// A sample counts as a violation when `Σ log(u_i/z_i) f_i(u)` exceeds
/// `tol · max(1, Σ_i |log(u_i/z_i)|·Σ|terms of f_i|)`, i.e. the tolerance
/// is relative to the size of the terms being summed.
pub fn check_entropy_dissipation(
    net: &ReactionNetwork,
    tol: f64,
    samples: usize,
) -> Result<EntropyCert, StructuralError> {
    if !(tol > 0.0) {
        return Err(StructuralError::Precondition("tol must be positive".into()));
    }
    let m = net.num_species();
    let graph = ComplexGraph::new(net);
    let (mut z, residual) = complex_balance(&graph, m, tol)?;
    let shifted = z.iter().any(|v| (v - 1.0).abs() > tol);
    if !shifted {
        z = vec![1.0; m];
    }
    let f = CompiledRhs::new(&net.compile_rhs());
    let bases = primes(m);
    let mut sample_violation = None;
    let mut u = vec![0.0; m];
    let mut scratch = vec![0.0; f.num_monomials()];
    let mut fu = vec![0.0; m];
    for s in 0..samples {
        for (i, b) in bases.iter().enumerate() {
            // skip index 0, which maps every coordinate to the corner
            let h = radical_inverse(s as u64 + 1, *b);
            u[i] = 10f64.powf(-3.0 + 6.0 * h);
        }
        f.eval_into(&u, &mut scratch, &mut fu);
        let abs = f.abs_eval(&u);
        let mut value = 0.0;
        let mut scale = 0.0;
        for i in 0..m {
            let l = (u[i] / z[i]).ln();
            value += l * fu[i];
            scale += l.abs() * abs[i];
        }
        if value > tol * scale.max(1.0) {
            sample_violation = Some(u.clone());
            break;
        }
    }
    Ok(EntropyCert {
        z,
        residual,
        shifted,
        samples,
        sample_violation,
    })
}
