//! The fixed random hidden layer and its differential-operator feature blocks.
//!
//! For hidden unit `i` with weight row `w_i` and bias `b_i` the basis function
//! is `σ(V_i(x))`, `V_i(x) = x·w_i + b_i`. Every operator used by the
//! collocation system maps to a derivative of `σ` times a per-column (or, for
//! the normal derivative, per-entry) weight:
//!
//! | operator     | entry `(q, i)`                          |
//! |--------------|-----------------------------------------|
//! | value        | `σ(V_i)`                                |
//! | ∂/∂x_k       | `σ'(V_i) w_ik`                          |
//! | ∂/∂n         | `σ'(V_i) Σ_k w_ik n_k(q)`               |
//! | Laplacian    | `σ''(V_i) Σ_k w_ik²`                    |
//! | biharmonic   | `σ''''(V_i) (Σ_k w_ik²)²`               |
//!
//! The biharmonic weight is the factored form of
//! `Σ_k w_ik⁴ + Σ_{k≠l} w_ik² w_il²`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use faer::reborrow::ReborrowMut;
use rand::Rng;

use crate::activation::{ActivationKind, Order};
use crate::error::{Error, Result};
use crate::simd::clear_upper_state;

/// Differential operator applied to each basis function.
#[derive(Clone, Copy, Debug)]
pub enum Operator<'a> {
    Value,
    /// Plain partial derivative along one axis.
    Partial(usize),
    /// Directional derivative along a per-point unit normal; one normal row per point row.
    NormalDerivative(MatRef<'a, f64>),
    Laplacian,
    Biharmonic,
}

impl Operator<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Value => "value",
            Operator::Partial(_) => "partial",
            Operator::NormalDerivative(_) => "normal-derivative",
            Operator::Laplacian => "laplacian",
            Operator::Biharmonic => "biharmonic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct HiddenLayer {
    /// `N × d`, row `i` is the weight of hidden unit `i`.
    pub weights: Mat<f64>,
    pub biases: Vec<f64>,
    pub kind: ActivationKind,
    pub delta: f64,
}

impl HiddenLayer {
    /// Draws every weight and bias i.i.d. from `U[-delta, delta]`: the weight
    /// matrix row by row, then the biases.
    pub fn init<R: Rng + ?Sized>(
        n: usize,
        d: usize,
        kind: ActivationKind,
        delta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Hyperparameter(format!("scale factor must be positive, got {delta}")));
        }
        if n == 0 {
            return Err(Error::Hyperparameter("hidden layer needs at least one unit".into()));
        }
        if !(2..=3).contains(&d) {
            return Err(Error::Hyperparameter(format!("input dimension must be 2 or 3, got {d}")));
        }
        let mut weights = Mat::zeros(n, d);
        for i in 0..n {
            for k in 0..d {
                weights[(i, k)] = rng.random_range(-delta..=delta);
            }
        }
        let biases = (0..n).map(|_| rng.random_range(-delta..=delta)).collect();
        Ok(HiddenLayer {
            weights,
            biases,
            kind,
            delta,
        })
    }

    /// Builds a layer from explicit parameters. `delta` is recorded as the
    /// largest parameter magnitude.
    pub fn from_parts(weights: Mat<f64>, biases: Vec<f64>, kind: ActivationKind) -> Result<Self> {
        if weights.nrows() != biases.len() || weights.nrows() == 0 {
            return Err(Error::Contract(format!(
                "weights have {} rows but there are {} biases",
                weights.nrows(),
                biases.len()
            )));
        }
        if !(2..=3).contains(&weights.ncols()) {
            return Err(Error::Contract("input dimension must be 2 or 3".into()));
        }
        let mut delta = biases.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        for i in 0..weights.nrows() {
            for k in 0..weights.ncols() {
                delta = delta.max(weights[(i, k)].abs());
            }
        }
        Ok(HiddenLayer {
            weights,
            biases,
            kind,
            delta,
        })
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.nrows()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    fn check_points(&self, points: MatRef<'_, f64>) -> Result<()> {
        if points.ncols() != self.dim() {
            return Err(Error::Contract(format!(
                "points have dimension {} but the layer expects {}",
                points.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `M × N` matrix of `V_i(x_q)`.
    pub fn preactivations(&self, points: MatRef<'_, f64>) -> Result<Mat<f64>> {
        self.check_points(points)?;
        let mut out = Mat::zeros(points.nrows(), self.n_hidden());
        self.preactivations_into(points, out.as_mut());
        Ok(out)
    }

    fn preactivations_into(&self, points: MatRef<'_, f64>, mut out: MatMut<'_, f64>) {
        matmul(out.rb_mut(), Accum::Replace, points, self.weights.transpose(), 1.0, Par::Seq);
        clear_upper_state();
        for (i, b) in self.biases.iter().enumerate() {
            for v in out.rb_mut().col_mut(i).iter_mut() {
                *v += b;
            }
        }
    }

    /// `Σ_k w_ik²` for every hidden unit.
    pub fn squared_norms(&self) -> Vec<f64> {
        (0..self.n_hidden())
            .map(|i| (0..self.dim()).map(|k| self.weights[(i, k)].powi(2)).sum())
            .collect()
    }

    /// `M × N` block of the operator applied to every basis function.
    pub fn feature_block(&self, points: MatRef<'_, f64>, op: Operator<'_>) -> Result<Mat<f64>> {
        let mut out = Mat::zeros(points.nrows(), self.n_hidden());
        self.feature_block_into(points, op, out.as_mut())?;
        Ok(out)
    }

    /// Writes the feature block into `out`, which must be `M × N`.
    pub fn feature_block_into(
        &self,
        points: MatRef<'_, f64>,
        op: Operator<'_>,
        mut out: MatMut<'_, f64>,
    ) -> Result<()> {
        self.check_points(points)?;
        if out.nrows() != points.nrows() || out.ncols() != self.n_hidden() {
            return Err(Error::Contract("feature block output has the wrong shape".into()));
        }
        if let Operator::Partial(k) = op {
            if k >= self.dim() {
                return Err(Error::Contract(format!("axis {k} out of range")));
            }
        }
        if let Operator::NormalDerivative(normals) = op {
            if normals.nrows() != points.nrows() || normals.ncols() != self.dim() {
                return Err(Error::Contract(format!(
                    "normal derivative needs one {}-dimensional normal per point ({} points, {}x{} normals)",
                    self.dim(),
                    points.nrows(),
                    normals.nrows(),
                    normals.ncols()
                )));
            }
        }

        self.preactivations_into(points, out.rb_mut());
        let kind = self.kind;
        let apply = |out: MatMut<'_, f64>, order: Order, scale: &dyn Fn(usize) -> f64| {
            let mut out = out;
            for i in 0..out.ncols() {
                let s = scale(i);
                for v in out.rb_mut().col_mut(i).iter_mut() {
                    *v = kind.eval(order, *v) * s;
                }
            }
        };
        match op {
            Operator::Value => apply(out, Order::Value, &|_| 1.0),
            Operator::Partial(k) => apply(out, Order::First, &|i| self.weights[(i, k)]),
            Operator::Laplacian => {
                let s2 = self.squared_norms();
                apply(out, Order::Second, &|i| s2[i]);
            }
            Operator::Biharmonic => {
                let s2 = self.squared_norms();
                apply(out, Order::Fourth, &|i| s2[i] * s2[i]);
            }
            Operator::NormalDerivative(normals) => {
                let mut directional = Mat::zeros(points.nrows(), self.n_hidden());
                matmul(
                    directional.as_mut(),
                    Accum::Replace,
                    normals,
                    self.weights.transpose(),
                    1.0,
                    Par::Seq,
                );
                clear_upper_state();
                for i in 0..out.ncols() {
                    let dir = directional.col(i);
                    for (v, w) in out.rb_mut().col_mut(i).iter_mut().zip(dir.iter()) {
                        *v = kind.eval(Order::First, *v) * w;
                    }
                }
            }
        }
        Ok(())
    }
}
