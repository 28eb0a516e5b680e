//! Backward-Euler diffusion solves `(I − c Δ_h) u = b` with `c = dt·d`.
//!
//! 1D uses the Thomas algorithm, which keeps every intermediate quantity
//! nonnegative for this M-matrix. 2D uses fast diagonalisation in the
//! Neumann cosine basis, followed by a residual check.

use super::grid::Grid;
use super::PdeError;

/// Relative residual bound every solve must meet.
pub const SOLVER_RESIDUAL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DiffusionSolver {
    grid: Grid,
    // 2D only
    qx: Vec<f64>,
    qy: Vec<f64>,
    mux: Vec<f64>,
    muy: Vec<f64>,
}

impl DiffusionSolver {
    pub fn new(grid: &Grid) -> Self {
        let (qx, qy, mux, muy) = if grid.dim() == 2 {
            (
                grid.axis_eigenvectors(0),
                grid.axis_eigenvectors(1),
                grid.axis_eigenvalues(0),
                grid.axis_eigenvalues(1),
            )
        } else {
            (Vec::new(), Vec::new(), Vec::new(), Vec::new())
        };
        DiffusionSolver {
            grid: grid.clone(),
            qx,
            qy,
            mux,
            muy,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Solves `(I − c Δ_h) u = b` in place. `c ≥ 0`.
    pub fn solve(&self, c: f64, b: &mut [f64]) -> Result<(), PdeError> {
        if c == 0.0 {
            return Ok(());
        }
        let rhs = b.to_vec();
        if self.grid.dim() == 1 {
            self.thomas(c, b);
        } else {
            self.fast_diag(c, b);
            // iterative refinement: the transforms lose a few digits when
            // c/h² is large
            for _ in 0..2 {
                if self.relative_residual(c, b, &rhs) <= 1e-11 {
                    break;
                }
                let mut r = self.residual(c, b, &rhs);
                self.fast_diag(c, &mut r);
                for (v, d) in b.iter_mut().zip(&r) {
                    *v += d;
                }
            }
            // roundoff in the transforms can leave tiny negative values
            // where the exact inverse is nonnegative
            let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for v in b.iter_mut() {
                if *v < 0.0 && *v > -1e-12 * scale {
                    *v = 0.0;
                }
            }
        }
        let res = self.relative_residual(c, b, &rhs);
        if res > SOLVER_RESIDUAL || !res.is_finite() {
            return Err(PdeError::SolverFailure { residual: res });
        }
        Ok(())
    }

    fn residual(&self, c: f64, u: &[f64], b: &[f64]) -> Vec<f64> {
        let mut lap = vec![0.0; u.len()];
        self.grid.apply_laplacian(u, &mut lap);
        for ((l, &ui), &bi) in lap.iter_mut().zip(u).zip(b) {
            *l = bi - (ui - c * *l);
        }
        lap
    }

    pub fn relative_residual(&self, c: f64, u: &[f64], b: &[f64]) -> f64 {
        let r = self.residual(c, u, b);
        let num: f64 = r.iter().map(|v| v * v).sum();
        let den: f64 = b.iter().map(|v| v * v).sum();
        if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        }
    }

    fn thomas(&self, c: f64, b: &mut [f64]) {
        let n = b.len();
        let h = self.grid.spacing(0);
        let a = c / (h * h);
        // matrix: diag 1 + 2a (1 + a at the ends), off-diagonals -a
        let diag = |i: usize| if i == 0 || i + 1 == n { 1.0 + a } else { 1.0 + 2.0 * a };
        let mut cp = vec![0.0; n];
        let mut denom = diag(0);
        cp[0] = -a / denom;
        b[0] /= denom;
        for i in 1..n {
            denom = diag(i) + a * cp[i - 1];
            cp[i] = -a / denom;
            b[i] = (b[i] + a * b[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            b[i] -= cp[i] * b[i + 1];
        }
    }

    fn fast_diag(&self, c: f64, b: &mut [f64]) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        // B̂ = Qyᵀ B Qx, B stored ny × nx
        let mut tmp = vec![0.0; nx * ny];
        matmul(b, ny, nx, &self.qx, nx, &mut tmp);
        let mut hat = vec![0.0; nx * ny];
        matmul_at(&self.qy, ny, &tmp, nx, &mut hat);
        for jy in 0..ny {
            for ix in 0..nx {
                hat[jy * nx + ix] /= 1.0 + c * (self.muy[jy] + self.mux[ix]);
            }
        }
        // U = Qy B̂ Qxᵀ
        matmul_bt(&hat, ny, nx, &self.qx, nx, &mut tmp);
        matmul(&self.qy, ny, ny, &tmp, nx, b);
    }
}

/// `out (r × c2) = a (r × c) · b (c × c2)`.
fn matmul(a: &[f64], r: usize, c: usize, b: &[f64], c2: usize, out: &mut [f64]) {
    for i in 0..r {
        let row = &mut out[i * c2..(i + 1) * c2];
        row.fill(0.0);
        for k in 0..c {
            let aik = a[i * c + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * c2..(k + 1) * c2];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aik * bv;
            }
        }
    }
}

/// `out (n × c2) = aᵀ · b` with `a` square `n × n`, `b` `n × c2`.
fn matmul_at(a: &[f64], n: usize, b: &[f64], c2: usize, out: &mut [f64]) {
    out.fill(0.0);
    for k in 0..n {
        let brow = &b[k * c2..(k + 1) * c2];
        for i in 0..n {
            let aki = a[k * n + i];
            let row = &mut out[i * c2..(i + 1) * c2];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o += aki * bv;
            }
        }
    }
}

/// `out (r × n) = a (r × n) · bᵀ` with `b` square `n × n`.
fn matmul_bt(a: &[f64], r: usize, n: usize, b: &[f64], _bn: usize, out: &mut [f64]) {
    for i in 0..r {
        let arow = &a[i * n..(i + 1) * n];
        for j in 0..n {
            let brow = &b[j * n..(j + 1) * n];
            out[i * n + j] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_solve(grid: &Grid, c: f64) {
        let solver = DiffusionSolver::new(grid);
        let b: Vec<f64> = (0..grid.len())
            .map(|k| 1.0 + ((k * 37 % 11) as f64) * 0.3)
            .collect();
        let mut u = b.clone();
        solver.solve(c, &mut u).unwrap();
        let res = solver.relative_residual(c, &u, &b);
        assert!(res <= SOLVER_RESIDUAL, "{res:e}");
        let mass_b: f64 = b.iter().sum();
        let mass_u: f64 = u.iter().sum();
        assert!((mass_b - mass_u).abs() <= 1e-12 * mass_b);
        assert!(u.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn solves_1d_and_2d() {
        check_solve(&Grid::line(1.0, 33).unwrap(), 0.01);
        check_solve(&Grid::rect(1.0, 2.0, 16, 24).unwrap(), 0.05);
        check_solve(&Grid::rect(1.0, 1.0, 64, 64).unwrap(), 3.0);
    }

    #[test]
    fn point_source_stays_nonnegative() {
        for grid in [Grid::line(1.0, 50).unwrap(), Grid::rect(1.0, 1.0, 20, 20).unwrap()] {
            let solver = DiffusionSolver::new(&grid);
            let mut u = vec![0.0; grid.len()];
            u[3] = 1.0;
            solver.solve(10.0, &mut u).unwrap();
            assert!(u.iter().all(|&v| v >= 0.0));
        }
    }
}
