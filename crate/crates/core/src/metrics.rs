use faer::{Col, MatRef};

use crate::error::{Error, Result};
use crate::features::Operator;
use crate::problems::ProblemSpec;
use crate::solve::TrainedModel;

/// Relative ℓ² error `‖pred − exact‖ / ‖exact‖`.
pub fn rel_error(pred: &[f64], exact: &[f64]) -> Result<f64> {
    if pred.len() != exact.len() {
        return Err(Error::Contract(format!(
            "{} predictions for {} exact values",
            pred.len(),
            exact.len()
        )));
    }
    let den: f64 = exact.iter().map(|e| e * e).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("exact values are all zero".into()));
    }
    let num: f64 = pred.iter().zip(exact).map(|(p, e)| (p - e) * (p - e)).sum();
    Ok((num / den).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointError {
    pub point: Vec<f64>,
    pub u_exact: f64,
    pub u_pred: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug)]
pub struct EvaluationReport {
    pub rel: f64,
    pub max_abs_error: f64,
    pub pointwise: Vec<PointError>,
    pub n_points: usize,
    /// Set by the caller; covers whatever pipeline stage it timed.
    pub wall_time_seconds: f64,
}

/// Compares the model against the exact solution at `test_points`.
pub fn evaluate(
    model: &TrainedModel,
    problem: &ProblemSpec,
    test_points: MatRef<'_, f64>,
    wall_time_seconds: f64,
) -> Result<EvaluationReport> {
    let pred: Col<f64> = model.predict(test_points, Operator::Value)?;
    let m = test_points.nrows();
    let mut pointwise = Vec::with_capacity(m);
    for i in 0..m {
        let point: Vec<f64> = (0..test_points.ncols()).map(|k| test_points[(i, k)]).collect();
        let u_exact = problem.exact_u(&point);
        let u_pred = pred[i];
        pointwise.push(PointError {
            point,
            u_exact,
            u_pred,
            abs_err: (u_pred - u_exact).abs(),
        });
    }
    let exact: Vec<f64> = pointwise.iter().map(|p| p.u_exact).collect();
    let predicted: Vec<f64> = pointwise.iter().map(|p| p.u_pred).collect();
    let rel = rel_error(&predicted, &exact)?;
    let max_abs_error = pointwise.iter().map(|p| p.abs_err).fold(0.0, f64::max);
    Ok(EvaluationReport {
        rel,
        max_abs_error,
        pointwise,
        n_points: m,
        wall_time_seconds,
    })
}

/// Median of a non-empty slice; NaNs sort last.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
