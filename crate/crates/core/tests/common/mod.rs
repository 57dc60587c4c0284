//! Finite-difference oracles shared by the integration tests. They only use
//! function values, never the closed-form derivatives under test.

#![allow(dead_code)]

pub type Field<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Derivative of order 1, 2 or 4 of a scalar function. Orders 1 and 2 use
/// central differences; order 4 a Richardson-extrapolated five-point stencil.
pub fn derivative_1d(f: &dyn Fn(f64) -> f64, x: f64, order: u32, h: f64) -> f64 {
    match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        4 => {
            let d4 = |h: f64| {
                (f(x + 2.0 * h) - 4.0 * f(x + h) + 6.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / h.powi(4)
            };
            (4.0 * d4(h / 2.0) - d4(h)) / 3.0
        }
        _ => panic!("unsupported order {order}"),
    }
}

pub fn gradient(u: Field, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|k| {
            y[k] = x[k] + h;
            let up = u(&y);
            y[k] = x[k] - h;
            let down = u(&y);
            y[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn laplacian(u: Field, x: &[f64], h: f64) -> f64 {
    let mut y = x.to_vec();
    let centre = u(x);
    let mut sum = 0.0;
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let up = u(&y);
        y[k] = x[k] - h;
        let down = u(&y);
        y[k] = x[k];
        sum += (up - 2.0 * centre + down) / (h * h);
    }
    sum
}

/// Nested five-point Laplacians.
pub fn bilaplacian(u: Field, x: &[f64], h: f64) -> f64 {
    laplacian(&|y: &[f64]| laplacian(u, y, h), x, h)
}

/// Nested Laplacians at `h` and `h/2`, Richardson-combined to fourth order.
pub fn bilaplacian_extrapolated(u: Field, x: &[f64], h: f64) -> f64 {
    (4.0 * bilaplacian(u, x, h / 2.0) - bilaplacian(u, x, h)) / 3.0
}

/// `max |a − b| / max |b|`, falling back to the absolute error when `b` vanishes.
pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}
