//! Stacks the collocation rows into one linear system `H β = S`.
//!
//! Row order is fixed: interior biharmonic rows, boundary value rows, then
//! boundary normal-derivative (Dirichlet) or Laplacian (Navier) rows.

use std::ops::Range;

use faer::{Col, Mat, MatRef};

use crate::error::{Error, Result};
use crate::features::{HiddenLayer, Operator};
use crate::geometry::CollocationSet;
use crate::problems::{BoundaryRegime, ProblemSpec};

/// Multipliers applied to each row block (and its right-hand side).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockScales {
    pub interior: f64,
    pub value: f64,
    pub flux: f64,
}

impl Default for BlockScales {
    fn default() -> Self {
        BlockScales {
            interior: 1.0,
            value: 1.0,
            flux: 1.0,
        }
    }
}

/// Row ranges of the three blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockRows {
    pub interior: Range<usize>,
    pub value: Range<usize>,
    /// `h` rows for Dirichlet, `k` rows for Navier.
    pub flux: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub layer: HiddenLayer,
    pub matrix: Mat<f64>,
    pub rhs: Col<f64>,
    pub blocks: BlockRows,
    pub regime: BoundaryRegime,
}

impl AssembledSystem {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    /// `H β - S`: the pointwise PDE and boundary residuals.
    pub fn residual(&self, beta: &Col<f64>) -> Col<f64> {
        &self.matrix * beta - &self.rhs
    }
}

fn point(m: MatRef<'_, f64>, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|k| m[(i, k)]).collect()
}

pub fn assemble(
    layer: &HiddenLayer,
    colloc: &CollocationSet,
    problem: &ProblemSpec,
    regime: BoundaryRegime,
) -> Result<AssembledSystem> {
    assemble_scaled(layer, colloc, problem, regime, BlockScales::default())
}

pub fn assemble_scaled(
    layer: &HiddenLayer,
    colloc: &CollocationSet,
    problem: &ProblemSpec,
    regime: BoundaryRegime,
    scales: BlockScales,
) -> Result<AssembledSystem> {
    let d = layer.dim();
    for (what, m) in [
        ("interior points", colloc.interior.as_ref()),
        ("boundary points", colloc.boundary.as_ref()),
        ("normals", colloc.normals.as_ref()),
    ] {
        if m.nrows() > 0 && m.ncols() != d {
            return Err(Error::Contract(format!(
                "{what} have dimension {} but the hidden layer expects {d}",
                m.ncols()
            )));
        }
    }
    if problem.dim() != d {
        return Err(Error::Contract(format!(
            "problem {} is {}-dimensional, hidden layer is {d}-dimensional",
            problem.name,
            problem.dim()
        )));
    }
    if regime != problem.regime {
        let missing = match regime {
            BoundaryRegime::Dirichlet => "normal-derivative data h",
            BoundaryRegime::Navier => "Laplacian data k",
        };
        return Err(Error::Specification(format!(
            "{regime} assembly needs {missing}, which {} does not provide",
            problem.name
        )));
    }
    if colloc.normals.nrows() != colloc.boundary.nrows() {
        return Err(Error::Contract("one normal per boundary point is required".into()));
    }

    let q = colloc.interior.nrows();
    let p = colloc.boundary.nrows();
    let n = layer.n_hidden();
    let blocks = BlockRows {
        interior: 0..q,
        value: q..q + p,
        flux: q + p..q + 2 * p,
    };
    let mut matrix = Mat::zeros(q + 2 * p, n);
    let mut rhs = Col::zeros(q + 2 * p);

    let interior = colloc.interior.as_ref();
    let boundary = colloc.boundary.as_ref();
    let normals = colloc.normals.as_ref();
    let flux_op = match regime {
        BoundaryRegime::Dirichlet => Operator::NormalDerivative(normals),
        BoundaryRegime::Navier => Operator::Laplacian,
    };
    for (range, points, op) in [
        (&blocks.interior, interior, Operator::Biharmonic),
        (&blocks.value, boundary, Operator::Value),
        (&blocks.flux, boundary, flux_op),
    ] {
        if range.is_empty() {
            continue;
        }
        layer.feature_block_into(
            points,
            op,
            matrix.as_mut().subrows_mut(range.start, range.len()),
        )?;
    }

    for i in 0..q {
        rhs[i] = problem.source_f(&point(interior, i));
    }
    for j in 0..p {
        let x = point(boundary, j);
        rhs[q + j] = problem.boundary_g(&x);
        rhs[q + p + j] = match regime {
            BoundaryRegime::Dirichlet => problem.boundary_h(&x, &point(normals, j)),
            BoundaryRegime::Navier => problem.boundary_k(&x),
        }
        .expect("regime checked above");
    }

    for (range, s) in [
        (&blocks.interior, scales.interior),
        (&blocks.value, scales.value),
        (&blocks.flux, scales.flux),
    ] {
        if s != 1.0 {
            for r in range.clone() {
                rhs[r] *= s;
                for c in 0..n {
                    matrix[(r, c)] *= s;
                }
            }
        }
    }

    Ok(AssembledSystem {
        layer: layer.clone(),
        matrix,
        rhs,
        blocks,
        regime,
    })
}
