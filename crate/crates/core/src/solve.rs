//! Output-weight solve and the trained, evaluable model.
//!
//! Plain least squares goes through a column-pivoted Householder QR. Pivots
//! below `rank_tolerance · |R₁₁|` count as zero; a second QR of the surviving
//! trapezoid then gives the minimum-norm solution, so square invertible, tall
//! full rank, rank deficient and wide systems share one route.
//!
//! With `ridge_lambda > 0` the Tikhonov solution `(HᵀH + λI)⁻¹ HᵀS` is formed
//! from the SVD of the triangular factor through the filter factors
//! `σ / (σ² + λ)`.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::{ColPivQr, Qr, Svd};
use faer::linalg::{householder, triangular_solve};
use faer::{Col, Conj, Mat, MatRef, Par};

use crate::assembly::AssembledSystem;
use crate::error::{Error, Result};
use crate::features::{HiddenLayer, Operator};
use crate::simd::clear_upper_state;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Tikhonov parameter; zero selects plain least squares.
    pub ridge_lambda: f64,
    /// Relative pivot cutoff. `None` means [`DEFAULT_RANK_TOLERANCE`].
    pub rank_tolerance: Option<f64>,
}

/// Collocation matrices are numerically rank deficient long before their
/// trailing pivots stop carrying information: cutting at `ε · max(rows, cols)`
/// costs several digits of accuracy. The default only drops pivots that are
/// zero to working precision squared, so exactly dependent columns need an
/// explicit tolerance to be recognized.
pub const DEFAULT_RANK_TOLERANCE: f64 = f64::EPSILON * f64::EPSILON;

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            ridge_lambda: 0.0,
            rank_tolerance: None,
        }
    }
}

impl SolveConfig {
    pub fn ridge(lambda: f64) -> Self {
        SolveConfig {
            ridge_lambda: lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_lambda >= 0.0 && self.ridge_lambda.is_finite()) {
            return Err(Error::Hyperparameter(format!(
                "ridge parameter must be finite and non-negative, got {}",
                self.ridge_lambda
            )));
        }
        if let Some(t) = self.rank_tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Hyperparameter(format!("rank tolerance must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// `‖Hβ − S‖₂`, recomputed after the solve.
    pub residual_norm: f64,
    /// Pivots (or singular values, for ridge solves) above the cutoff.
    pub rank: usize,
    /// Largest over smallest pivot, or `σ_max / σ_min` for ridge solves.
    pub condition_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub beta: Col<f64>,
    pub diagnostics: Diagnostics,
}

fn apply_qt(basis: MatRef<'_, f64>, coeff: MatRef<'_, f64>, rhs: &Col<f64>) -> Col<f64> {
    let mut out = rhs.as_mat().to_owned();
    householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
        basis,
        coeff,
        Conj::No,
        out.as_mut(),
        Par::Seq,
        MemStack::new(&mut MemBuffer::new(
            householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<f64>(
                basis.nrows(),
                coeff.nrows(),
                1,
            ),
        )),
    );
    out.col(0).to_owned()
}

/// Minimum-norm (or ridge-regularized) solution of `matrix · β ≈ rhs`.
pub fn least_squares(matrix: MatRef<'_, f64>, rhs: &Col<f64>, config: &SolveConfig) -> Result<LeastSquares> {
    config.validate()?;
    let (m, n) = matrix.shape();
    if m == 0 || n == 0 {
        return Err(Error::Degenerate(format!("empty {m}x{n} system")));
    }
    if rhs.nrows() != m {
        return Err(Error::Contract(format!("{m} rows but {} right-hand side entries", rhs.nrows())));
    }
    let mut all_zero = true;
    for j in 0..n {
        for v in matrix.col(j).iter() {
            if !v.is_finite() {
                return Err(Error::Data("coefficient matrix has non-finite entries".into()));
            }
            all_zero &= *v == 0.0;
        }
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("right-hand side has non-finite entries".into()));
    }
    if all_zero {
        return Err(Error::Degenerate("coefficient matrix is identically zero".into()));
    }

    let (beta, rank, condition_estimate) = if config.ridge_lambda > 0.0 {
        ridge(matrix, rhs, config.ridge_lambda)?
    } else {
        pivoted(matrix, rhs, config.rank_tolerance.unwrap_or(DEFAULT_RANK_TOLERANCE))
    };
    let residual_norm = (matrix * &beta - rhs).norm_l2();
    clear_upper_state();
    Ok(LeastSquares {
        beta,
        diagnostics: Diagnostics {
            residual_norm,
            rank,
            condition_estimate,
        },
    })
}

/// `H P = Q R` with column pivoting. Pivots below `tol · |R₁₁|` are treated
/// as zero; the remaining trapezoid `[R₁₁ R₁₂]` is reduced once more by a QR
/// of its transpose, giving the minimum-norm solution.
fn pivoted(matrix: MatRef<'_, f64>, rhs: &Col<f64>, tol: f64) -> (Col<f64>, usize, f64) {
    let n = matrix.ncols();
    let qr = ColPivQr::new(matrix);
    let r = qr.thin_R();
    let k = r.nrows();
    let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let cutoff = tol * pivots[0];
    let rank = pivots.iter().take_while(|p| **p > cutoff).count();
    let c = apply_qt(qr.Q_basis(), qr.Q_coeff(), rhs);

    let mut x = Mat::<f64>::zeros(n, 1);
    if rank == n {
        for i in 0..n {
            x[(i, 0)] = c[i];
        }
        triangular_solve::solve_upper_triangular_in_place(r.get(..n, ..n), x.as_mut(), Par::Seq);
    } else {
        // [R₁₁ R₁₂]ᵀ = Z T, so [R₁₁ R₁₂] x = c has minimum-norm solution Z T⁻ᵀ c.
        let trap_t = r.get(..rank, ..).transpose().to_owned();
        let qr2 = Qr::new(trap_t.as_ref());
        let mut y = Mat::<f64>::from_fn(rank, 1, |i, _| c[i]);
        triangular_solve::solve_lower_triangular_in_place(
            qr2.thin_R().transpose(),
            y.as_mut(),
            Par::Seq,
        );
        for i in 0..rank {
            x[(i, 0)] = y[(i, 0)];
        }
        householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            qr2.Q_basis(),
            qr2.Q_coeff(),
            Conj::No,
            x.as_mut(),
            Par::Seq,
            MemStack::new(&mut MemBuffer::new(
                householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<f64>(
                    n,
                    qr2.Q_coeff().nrows(),
                    1,
                ),
            )),
        );
    }
    let (forward, _) = qr.P().arrays();
    let mut beta = Col::<f64>::zeros(n);
    for (i, &col) in forward.iter().enumerate() {
        beta[col] = x[(i, 0)];
    }
    let smallest = if k < n { 0.0 } else { pivots[k - 1] };
    (beta, rank, pivots[0] / smallest)
}

/// Tikhonov solution through the SVD of the triangular factor (or of the
/// matrix itself when it is wide), using filter factors `σ / (σ² + λ)`.
fn ridge(matrix: MatRef<'_, f64>, rhs: &Col<f64>, lambda: f64) -> Result<(Col<f64>, usize, f64)> {
    let (m, n) = matrix.shape();
    let (svd, core_rhs) = if m >= n {
        let qr = Qr::new(matrix);
        let c = apply_qt(qr.Q_basis(), qr.Q_coeff(), rhs);
        let svd = Svd::new(qr.thin_R()).map_err(|e| Error::Degenerate(format!("SVD failed: {e:?}")))?;
        (svd, Col::from_fn(n, |i| c[i]))
    } else {
        let svd = Svd::new_thin(matrix).map_err(|e| Error::Degenerate(format!("SVD failed: {e:?}")))?;
        (svd, rhs.clone())
    };
    let sigma: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let sigma_min = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = sigma
        .iter()
        .filter(|s| **s > f64::EPSILON * m.max(n) as f64 * sigma_max)
        .count();
    let (u, v) = (svd.U(), svd.V());
    let mut beta = Col::<f64>::zeros(n);
    for (i, &s) in sigma.iter().enumerate() {
        let coeff = u.col(i).transpose() * &core_rhs * (s / (s * s + lambda));
        beta += v.col(i) * coeff;
    }
    let cond = if n > m { f64::INFINITY } else { sigma_max / sigma_min };
    Ok((beta, rank, cond))
}

/// Hidden layer plus fitted output weights.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    pub layer: HiddenLayer,
    pub beta: Col<f64>,
    pub diagnostics: Diagnostics,
}

pub fn solve_system(system: &AssembledSystem, config: &SolveConfig) -> Result<TrainedModel> {
    let fit = least_squares(system.matrix.as_ref(), &system.rhs, config)?;
    Ok(TrainedModel {
        layer: system.layer.clone(),
        beta: fit.beta,
        diagnostics: fit.diagnostics,
    })
}

impl TrainedModel {
    /// Pairs a layer with given output weights; diagnostics are left empty.
    pub fn from_weights(layer: HiddenLayer, beta: Col<f64>) -> Result<Self> {
        if beta.nrows() != layer.n_hidden() {
            return Err(Error::Contract(format!(
                "{} output weights for {} hidden units",
                beta.nrows(),
                layer.n_hidden()
            )));
        }
        Ok(TrainedModel {
            layer,
            beta,
            diagnostics: Diagnostics {
                residual_norm: f64::NAN,
                rank: 0,
                condition_estimate: f64::NAN,
            },
        })
    }

    /// The approximate field `u`, `∂u/∂n`, `Δu` or `Δ²u` at `points`.
    pub fn predict(&self, points: MatRef<'_, f64>, op: Operator<'_>) -> Result<Col<f64>> {
        let block = self.layer.feature_block(points, op)?;
        let field = block * &self.beta;
        clear_upper_state();
        Ok(field)
    }
}
