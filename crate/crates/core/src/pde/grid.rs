use super::PdeError;

/// Largest number of cells a grid may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// Uniform cell-centred grid on an interval or a rectangle.
///
/// Fields are stored row-major: index `j * nx + i` with `i` along x.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    lengths: [f64; 2],
    cells: [usize; 2],
}

impl Grid {
    pub fn new(lengths: &[f64], cells: &[usize]) -> Result<Grid, PdeError> {
        let dim = lengths.len();
        if !(1..=2).contains(&dim) || cells.len() != dim {
            return Err(PdeError::InvalidGrid(format!(
                "dimension must be 1 or 2 with one cell count per axis (got {} lengths, {} counts)",
                lengths.len(),
                cells.len()
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(PdeError::InvalidGrid("lengths must be positive".into()));
        }
        if cells.iter().any(|&c| c < 3) {
            return Err(PdeError::InvalidGrid("need at least 3 cells per axis".into()));
        }
        let total = cells.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        if total.map_or(true, |t| t > MAX_CELLS) {
            return Err(PdeError::InvalidGrid(format!("more than {MAX_CELLS} cells")));
        }
        let mut l = [1.0; 2];
        let mut c = [1usize; 2];
        l[..dim].copy_from_slice(lengths);
        c[..dim].copy_from_slice(cells);
        Ok(Grid {
            dim,
            lengths: l,
            cells: c,
        })
    }

    pub fn line(length: f64, cells: usize) -> Result<Grid, PdeError> {
        Grid::new(&[length], &[cells])
    }

    pub fn rect(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Grid, PdeError> {
        Grid::new(&[lx, ly], &[nx, ny])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    /// 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        self.cells[1]
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    /// `Δx` in 1D, `Δx·Δy` in 2D.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// |Ω|.
    pub fn measure(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.cells[0], idx / self.cells[0]);
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Five/three-point Laplacian with mirrored ghost cells (homogeneous
    /// Neumann). Every row sums to zero and the matrix is symmetric.
    pub fn apply_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let (nx, ny) = (self.cells[0], self.cells[1]);
        let ihx2 = 1.0 / (self.spacing(0) * self.spacing(0));
        let ihy2 = if self.dim == 2 {
            1.0 / (self.spacing(1) * self.spacing(1))
        } else {
            0.0
        };
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let c = u[k];
                let left = if i > 0 { u[k - 1] } else { c };
                let right = if i + 1 < nx { u[k + 1] } else { c };
                let mut v = (left - 2.0 * c + right) * ihx2;
                if self.dim == 2 {
                    let down = if j > 0 { u[k - nx] } else { c };
                    let up = if j + 1 < ny { u[k + nx] } else { c };
                    v += (down - 2.0 * c + up) * ihy2;
                }
                out[k] = v;
            }
        }
    }

    /// Eigenvalues `μ_k ≥ 0` of `−Δ_h` along one axis, `k = 0..n`.
    pub fn axis_eigenvalues(&self, axis: usize) -> Vec<f64> {
        let n = self.cells[axis];
        let h = self.spacing(axis);
        (0..n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * n as f64)).sin();
                4.0 * s * s / (h * h)
            })
            .collect()
    }

    /// Orthonormal eigenvectors of the 1D Neumann stencil along `axis`,
    /// column `k` stored as `q[j * n + k] = c_k cos(kπ(j + ½)/n)`.
    pub fn axis_eigenvectors(&self, axis: usize) -> Vec<f64> {
        let n = self.cells[axis];
        let mut q = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let c = if k == 0 {
                    (1.0 / n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                };
                q[j * n + k] =
                    c * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
            }
        }
        q
    }
}
