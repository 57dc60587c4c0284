//! Finite-difference reference solver on rectangles.
//!
//! `Δ²u = f` is split into two Poisson problems, `Δv = f` and `Δu = v`, each
//! discretized with the five-point Laplacian on a uniform grid with Dirichlet
//! data. Each discrete Poisson system is solved directly: a discrete sine
//! transform along `x` diagonalizes the operator, leaving one tridiagonal
//! system per mode along `y`.

use std::f64::consts::PI;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::metrics::rel_error;
use crate::problems::{BoundaryRegime, ProblemSpec};
use crate::simd::clear_upper_state;

/// Uniform grid with `nx × ny` interior nodes; boundary nodes sit on the box.
#[derive(Clone, Debug, PartialEq)]
pub struct FdmGrid {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl FdmGrid {
    pub fn new(lo: [f64; 2], hi: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::Contract(format!("FDM grid needs at least 3x3 interior nodes, got {nx}x{ny}")));
        }
        if !(lo[0] < hi[0] && lo[1] < hi[1]) {
            return Err(Error::Geometry(format!("FDM box needs lo < hi: {lo:?} {hi:?}")));
        }
        Ok(FdmGrid {
            lo,
            hi,
            nx,
            ny,
            hx: (hi[0] - lo[0]) / (nx + 1) as f64,
            hy: (hi[1] - lo[1]) / (ny + 1) as f64,
        })
    }

    /// An `n × n` mesh in the usual sense: `n` intervals per side, so
    /// `n − 1` interior nodes and spacing `(hi − lo) / n`.
    pub fn with_resolution(lo: [f64; 2], hi: [f64; 2], n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Contract(format!("FDM resolution must be at least 4, got {n}")));
        }
        Self::new(lo, hi, n - 1, n - 1)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo[0] + (i + 1) as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.lo[1] + (j + 1) as f64 * self.hy
    }

    fn x_edge(&self, left: bool) -> f64 {
        if left {
            self.lo[0]
        } else {
            self.hi[0]
        }
    }

    fn y_edge(&self, bottom: bool) -> f64 {
        if bottom {
            self.lo[1]
        } else {
            self.hi[1]
        }
    }
}

/// Applies the five-point Laplacian to interior values `w`, with `boundary`
/// supplying the values on the box edges.
pub fn five_point_laplacian(grid: &FdmGrid, w: &Mat<f64>, boundary: &dyn Fn(f64, f64) -> f64) -> Mat<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 {
            boundary(grid.x_edge(true), grid.y(j as usize))
        } else if i >= nx as isize {
            boundary(grid.x_edge(false), grid.y(j as usize))
        } else if j < 0 {
            boundary(grid.x(i as usize), grid.y_edge(true))
        } else if j >= ny as isize {
            boundary(grid.x(i as usize), grid.y_edge(false))
        } else {
            w[(i as usize, j as usize)]
        }
    };
    Mat::from_fn(nx, ny, |i, j| {
        let (i, j) = (i as isize, j as isize);
        let c = at(i, j);
        (at(i - 1, j) - 2.0 * c + at(i + 1, j)) / (grid.hx * grid.hx)
            + (at(i, j - 1) - 2.0 * c + at(i, j + 1)) / (grid.hy * grid.hy)
    })
}

/// Solves the discrete `Δw = source` with `w = boundary` on the box edges.
/// The result holds interior values, `(i, j)` at `(grid.x(i), grid.y(j))`.
pub fn poisson_dirichlet(
    grid: &FdmGrid,
    source: &dyn Fn(f64, f64) -> f64,
    boundary: &dyn Fn(f64, f64) -> f64,
) -> Mat<f64> {
    let (nx, ny, hx2, hy2) = (grid.nx, grid.ny, grid.hx * grid.hx, grid.hy * grid.hy);
    let mut rhs = Mat::from_fn(nx, ny, |i, j| source(grid.x(i), grid.y(j)));
    for j in 0..ny {
        rhs[(0, j)] -= boundary(grid.lo[0], grid.y(j)) / hx2;
        rhs[(nx - 1, j)] -= boundary(grid.hi[0], grid.y(j)) / hx2;
    }
    for i in 0..nx {
        rhs[(i, 0)] -= boundary(grid.x(i), grid.lo[1]) / hy2;
        rhs[(i, ny - 1)] -= boundary(grid.x(i), grid.hi[1]) / hy2;
    }

    // Orthonormal sine basis of the 1D Dirichlet second difference along x.
    let scale = (2.0 / (nx + 1) as f64).sqrt();
    let sine = Mat::from_fn(nx, nx, |i, k| {
        scale * (PI * ((i + 1) * (k + 1)) as f64 / (nx + 1) as f64).sin()
    });
    let mut modes = Mat::zeros(nx, ny);
    matmul(modes.as_mut(), Accum::Replace, sine.transpose(), rhs.as_ref(), 1.0, Par::Seq);
    clear_upper_state();

    let off = 1.0 / hy2;
    let mut c_prime = vec![0.0; ny];
    let mut d_prime = vec![0.0; ny];
    for k in 0..nx {
        let eig = (2.0 * (PI * (k + 1) as f64 / (nx + 1) as f64).cos() - 2.0) / hx2;
        let diag = eig - 2.0 / hy2;
        // Thomas algorithm; the system is strictly diagonally dominant.
        c_prime[0] = off / diag;
        d_prime[0] = modes[(k, 0)] / diag;
        for j in 1..ny {
            let m = diag - off * c_prime[j - 1];
            c_prime[j] = off / m;
            d_prime[j] = (modes[(k, j)] - off * d_prime[j - 1]) / m;
        }
        modes[(k, ny - 1)] = d_prime[ny - 1];
        for j in (0..ny - 1).rev() {
            modes[(k, j)] = d_prime[j] - c_prime[j] * modes[(k, j + 1)];
        }
    }

    let mut w = Mat::zeros(nx, ny);
    matmul(w.as_mut(), Accum::Replace, sine.as_ref(), modes.as_ref(), 1.0, Par::Seq);
    clear_upper_state();
    w
}

#[derive(Clone, Debug)]
pub struct FdmSolution {
    pub grid: FdmGrid,
    /// Interior values of `u`.
    pub u: Mat<f64>,
    /// Interior values of the intermediate field `v = Δu`.
    pub v: Mat<f64>,
}

impl FdmSolution {
    /// Relative ℓ² error against the exact solution over the interior nodes.
    pub fn rel_error(&self, problem: &ProblemSpec) -> Result<f64> {
        let g = &self.grid;
        let mut pred = Vec::with_capacity(g.nx * g.ny);
        let mut exact = Vec::with_capacity(g.nx * g.ny);
        for j in 0..g.ny {
            for i in 0..g.nx {
                pred.push(self.u[(i, j)]);
                exact.push(problem.exact_u(&[g.x(i), g.y(j)]));
            }
        }
        rel_error(&pred, &exact)
    }
}

/// Coupled solve: `Δv = f` with `v = laplacian_boundary`, then `Δu = v` with
/// `u = value_boundary`.
pub fn solve_coupled(
    grid: &FdmGrid,
    source: &dyn Fn(f64, f64) -> f64,
    laplacian_boundary: &dyn Fn(f64, f64) -> f64,
    value_boundary: &dyn Fn(f64, f64) -> f64,
) -> FdmSolution {
    let v = poisson_dirichlet(grid, source, laplacian_boundary);
    let (x0, y0) = (grid.lo[0], grid.lo[1]);
    let (hx, hy) = (grid.hx, grid.hy);
    let v_at = |x: f64, y: f64| {
        let i = ((x - x0) / hx).round() as usize - 1;
        let j = ((y - y0) / hy).round() as usize - 1;
        v[(i, j)]
    };
    let u = poisson_dirichlet(grid, &v_at, value_boundary);
    FdmSolution {
        grid: grid.clone(),
        u,
        v,
    }
}

/// Runs the coupled scheme for a 2D box problem. Navier problems use their
/// `k` data for `v` on the boundary; Dirichlet problems lack it and use the
/// exact Laplacian of the manufactured solution instead.
pub fn solve_fdm(problem: &ProblemSpec, grid: &FdmGrid) -> Result<FdmSolution> {
    let Domain::Box { lo, hi } = &problem.domain else {
        return Err(Error::UnsupportedGeometry(format!(
            "the FDM reference only handles boxes, not a {}",
            problem.domain.kind_name()
        )));
    };
    if lo.len() != 2 {
        return Err(Error::UnsupportedGeometry("the FDM reference is 2D only".into()));
    }
    if [lo[0], lo[1]] != grid.lo || [hi[0], hi[1]] != grid.hi {
        return Err(Error::Contract(format!(
            "grid box {:?}..{:?} differs from the problem box {lo:?}..{hi:?}",
            grid.lo, grid.hi
        )));
    }
    let f = |x: f64, y: f64| problem.source_f(&[x, y]);
    let g = |x: f64, y: f64| problem.boundary_g(&[x, y]);
    let k = |x: f64, y: f64| match problem.regime {
        BoundaryRegime::Navier => problem.boundary_k(&[x, y]).expect("navier problem has k"),
        BoundaryRegime::Dirichlet => problem.exact_laplacian(&[x, y]),
    };
    Ok(solve_coupled(grid, &f, &k, &g))
}
