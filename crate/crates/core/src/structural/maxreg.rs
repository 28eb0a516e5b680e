//! Discrete maximal-regularity constant and the quasi-uniform diffusion
//! criterion.
//!
//! The constant is `sup ‖Δφ‖_{p'} / ‖θ‖_{p'}` where `φ` solves the forward
//! heat problem `∂_t φ − mΔφ = θ`, `φ(0) = 0`, with Neumann boundary. We
//! discretise with backward Euler in time on the simulation grid. Every
//! number produced here is a lower bound for the discrete constant; for
//! `p' = 2` the energy estimate gives the upper bound `1/m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::StructuralError;
use crate::pde::{DiffusionSolver, Grid};

#[derive(Clone, Debug, PartialEq)]
pub struct MaxRegSettings {
    pub horizon: f64,
    pub time_steps: usize,
    /// Cap on Lanczos steps (each keeps two vectors of `time_steps · cells`).
    pub max_iter: usize,
    /// Relative growth of the estimate over ten steps at which iteration stops.
    pub rel_tol: f64,
    pub seed: u64,
    /// Random fields tried when `p' < 2`.
    pub dictionary_size: usize,
}

impl Default for MaxRegSettings {
    fn default() -> Self {
        MaxRegSettings {
            horizon: 1.0,
            time_steps: 64,
            max_iter: 400,
            rel_tol: 1e-6,
            seed: 0,
            dictionary_size: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxRegEstimate {
    /// Always a lower bound for the discrete constant.
    pub value: f64,
    /// `1/m`, reported when `p' = 2`.
    pub analytic_bound: Option<f64>,
    pub iterations: usize,
}

struct HeatOperator {
    grid: Grid,
    solver: DiffusionSolver,
    c: f64,
    dt: f64,
    nt: usize,
}

impl HeatOperator {
    fn new(m_diff: f64, grid: &Grid, s: &MaxRegSettings) -> Self {
        let dt = s.horizon / s.time_steps as f64;
        HeatOperator {
            grid: grid.clone(),
            solver: DiffusionSolver::new(grid),
            c: dt * m_diff,
            dt,
            nt: s.time_steps,
        }
    }

    fn len(&self) -> usize {
        self.nt * self.grid.len()
    }

    /// `θ ↦ (Δφ^k)_k` with `φ^k = R(φ^{k−1} + dt θ^k)`, `R = (I − dt mΔ)⁻¹`.
    fn apply(&self, theta: &[f64], out: &mut [f64]) -> Result<(), StructuralError> {
        let n = self.grid.len();
        let mut phi = vec![0.0; n];
        for k in 0..self.nt {
            for (p, t) in phi.iter_mut().zip(&theta[k * n..(k + 1) * n]) {
                *p += self.dt * t;
            }
            self.solver.solve(self.c, &mut phi)?;
            self.grid.apply_laplacian(&phi, &mut out[k * n..(k + 1) * n]);
        }
        Ok(())
    }

    /// Adjoint: `w^N = RΔy^N`, `w^k = R(Δy^k + w^{k+1})`, output `dt·w^k`.
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) -> Result<(), StructuralError> {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        let mut lap = vec![0.0; n];
        for k in (0..self.nt).rev() {
            self.grid.apply_laplacian(&y[k * n..(k + 1) * n], &mut lap);
            for (wi, l) in w.iter_mut().zip(&lap) {
                *wi += l;
            }
            self.solver.solve(self.c, &mut w)?;
            for (o, wi) in out[k * n..(k + 1) * n].iter_mut().zip(&w) {
                *o = self.dt * wi;
            }
        }
        Ok(())
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_p(v: &[f64], p: f64) -> f64 {
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn check_inputs(m_diff: f64, p_prime: f64) -> Result<(), StructuralError> {
    if !(m_diff > 0.0 && m_diff.is_finite()) {
        return Err(StructuralError::Precondition("m must be positive".into()));
    }
    if !(p_prime > 1.0 && p_prime <= 2.0) {
        return Err(StructuralError::Precondition("p' must lie in (1, 2]".into()));
    }
    Ok(())
}

/// Estimate with default settings and at most `steps` Lanczos steps.
pub fn estimate_maxreg_constant(
    m_diff: f64,
    p_prime: f64,
    grid: &Grid,
    steps: usize,
) -> Result<MaxRegEstimate, StructuralError> {
    let s = MaxRegSettings {
        max_iter: steps,
        ..MaxRegSettings::default()
    };
    estimate_maxreg_with(m_diff, p_prime, grid, &s)
}

/// `p' = 2`: Lanczos bidiagonalisation of `L` (a lower bound for the
/// spectral norm). `p' < 2`: best ratio over a seeded dictionary of random
/// nonnegative fields.
pub fn estimate_maxreg_with(
    m_diff: f64,
    p_prime: f64,
    grid: &Grid,
    s: &MaxRegSettings,
) -> Result<MaxRegEstimate, StructuralError> {
    check_inputs(m_diff, p_prime)?;
    let op = HeatOperator::new(m_diff, grid, s);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    if p_prime < 2.0 {
        let dict: Vec<Vec<f64>> = (0..s.dictionary_size)
            .map(|_| (0..op.len()).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let value = maxreg_dictionary_bound(m_diff, p_prime, grid, s, &dict)?;
        return Ok(MaxRegEstimate {
            value,
            analytic_bound: None,
            iterations: dict.len(),
        });
    }
    golub_kahan(&op, &mut rng, s).map(|(value, iterations)| MaxRegEstimate {
        value,
        analytic_bound: Some(1.0 / m_diff),
        iterations,
    })
}

fn orthogonalise(w: &mut [f64], basis: &[Vec<f64>]) {
    // twice is enough
    for _ in 0..2 {
        for b in basis {
            let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
}

fn bidiag_norm(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let b = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else {
            0.0
        }
    });
    b.singular_values().max()
}

/// Golub–Kahan bidiagonalisation with full reorthogonalisation. Singular
/// values of the projected bidiagonal interlace those of `L`, so the
/// estimate never exceeds `‖L‖₂`.
fn golub_kahan(op: &HeatOperator, rng: &mut ChaCha8Rng, s: &MaxRegSettings) -> Result<(f64, usize), StructuralError> {
    const BREAKDOWN: f64 = 1e-14;
    const WINDOW: usize = 10;
    let len = op.len();
    let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut u = vec![0.0; len];
    op.apply(&v, &mut u)?;
    let mut alpha = vec![norm2(&u)];
    let mut beta: Vec<f64> = Vec::new();
    if alpha[0] <= BREAKDOWN {
        return Ok((0.0, 1));
    }
    u.iter_mut().for_each(|x| *x /= alpha[0]);
    let mut vs = vec![v];
    let mut us = vec![u];
    let mut prev = alpha[0];
    let mut history = vec![prev];
    let mut w = vec![0.0; len];
    for it in 2..=s.max_iter.max(2) {
        let j = vs.len() - 1;
        op.apply_adjoint(&us[j], &mut w)?;
        w.iter_mut().zip(&vs[j]).for_each(|(x, y)| *x -= alpha[j] * y);
        orthogonalise(&mut w, &vs);
        let b = norm2(&w);
        if b <= BREAKDOWN * prev {
            return Ok((bidiag_norm(&alpha, &beta), it));
        }
        let vn: Vec<f64> = w.iter().map(|x| x / b).collect();
        let mut p = vec![0.0; len];
        op.apply(&vn, &mut p)?;
        p.iter_mut().zip(&us[j]).for_each(|(x, y)| *x -= b * y);
        orthogonalise(&mut p, &us);
        let a = norm2(&p);
        beta.push(b);
        vs.push(vn);
        if a <= BREAKDOWN * prev {
            alpha.push(0.0);
            return Ok((bidiag_norm(&alpha, &beta), it));
        }
        alpha.push(a);
        us.push(p.into_iter().map(|x| x / a).collect());
        let sigma = bidiag_norm(&alpha, &beta);
        history.push(sigma);
        // the top of the spectrum is dense, so compare against a lagged value
        if history.len() > WINDOW && sigma - history[history.len() - 1 - WINDOW] <= s.rel_tol * sigma {
            return Ok((sigma, it));
        }
        prev = sigma;
    }
    Err(StructuralError::NonConvergence { iterations: s.max_iter })
}

/// `max ‖Lθ‖_{p'} / ‖θ‖_{p'}` over the nonzero fields of `dict` (each of
/// length `time_steps · cells`, time-major).
pub fn maxreg_dictionary_bound(
    m_diff: f64,
    p_prime: f64,
    grid: &Grid,
    s: &MaxRegSettings,
    dict: &[Vec<f64>],
) -> Result<f64, StructuralError> {
    check_inputs(m_diff, p_prime)?;
    let op = HeatOperator::new(m_diff, grid, s);
    let mut out = vec![0.0; op.len()];
    let mut best: Option<f64> = None;
    for theta in dict {
        if theta.len() != op.len() {
            return Err(StructuralError::DimensionMismatch(format!(
                "dictionary field of length {}, expected {}",
                theta.len(),
                op.len()
            )));
        }
        let den = norm_p(theta, p_prime);
        if den == 0.0 {
            continue;
        }
        op.apply(theta, &mut out)?;
        let ratio = norm_p(&out, p_prime) / den;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(StructuralError::EmptyDictionary)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiUniformQuery {
    pub n: u32,
    pub r: u32,
    /// Smallest diffusion coefficient.
    pub a: f64,
    /// Largest diffusion coefficient.
    pub b: f64,
    pub p_prime: f64,
    /// Lower-bound estimate of `C_{(A+B)/2, p'}`, if one was computed.
    pub c_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiUniformResult {
    pub verdict: Verdict,
    /// `2/(B−A) − C` for the constant the verdict rests on (`∞` if `A = B`).
    pub margin: Option<f64>,
    pub p: f64,
    pub threshold: f64,
    pub reason: String,
}

/// Three-valued check of `C_{(A+B)/2,p'} < 2/(B−A)`.
///
/// At `p' = 2` the energy bound `C ≤ 1/m` is an upper bound, so a pass is
/// certified. Below 2 only lower bounds are available, so the check can
/// only fail or be inconclusive. `p = p'/(p'−1)` must exceed
/// `(n+2)(r−1)/2`; at `p' = 2` equality is accepted as the limit `p' → 2⁻`.
pub fn check_quasi_uniform(q: &QuasiUniformQuery) -> Result<QuasiUniformResult, StructuralError> {
    if !(q.a > 0.0 && q.a <= q.b && q.b.is_finite()) {
        return Err(StructuralError::Precondition("need 0 < A ≤ B".into()));
    }
    if !(q.p_prime > 1.0 && q.p_prime <= 2.0) {
        return Err(StructuralError::Precondition("p' must lie in (1, 2]".into()));
    }
    if q.n < 1 || q.r < 1 {
        return Err(StructuralError::Precondition("n and r must be at least 1".into()));
    }
    let p = q.p_prime / (q.p_prime - 1.0);
    let threshold = (q.n as f64 + 2.0) * (q.r as f64 - 1.0) / 2.0;
    let result = |verdict, margin, reason: &str| QuasiUniformResult {
        verdict,
        margin,
        p,
        threshold,
        reason: reason.to_string(),
    };
    let rhs = if q.b == q.a { f64::INFINITY } else { 2.0 / (q.b - q.a) };
    let m = 0.5 * (q.a + q.b);
    if q.r == 1 {
        let margin = if q.p_prime == 2.0 { Some(rhs - 1.0 / m) } else { None };
        return Ok(result(Verdict::Holds, margin, "r = 1: every p > 0 is admissible"));
    }
    let on_threshold = p == threshold && q.p_prime == 2.0;
    if !(p > threshold || on_threshold) {
        return Err(StructuralError::Precondition(format!(
            "p = {p} does not exceed (n+2)(r-1)/2 = {threshold}"
        )));
    }
    if q.b == q.a {
        return Ok(result(Verdict::Holds, Some(f64::INFINITY), "equal diffusion coefficients"));
    }
    if q.p_prime == 2.0 {
        // 1/m < 2/(B−A) reduces to A > 0, so the energy bound always passes
        let upper = 1.0 / m;
        debug_assert!(upper < rhs);
        return Ok(result(Verdict::Holds, Some(rhs - upper), "energy bound C ≤ 1/m"));
    }
    match q.c_estimate {
        Some(c) if c >= rhs => Ok(result(Verdict::Fails, Some(rhs - c), "lower bound already violates")),
        Some(c) => Ok(result(
            Verdict::Inconclusive,
            Some(rhs - c),
            "only a lower bound is available for p' < 2",
        )),
        None => Ok(result(Verdict::Inconclusive, None, "no estimate supplied")),
    }
}
