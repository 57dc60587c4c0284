//! Activation functions with closed-form derivatives up to fourth order.
//!
//! Only the orders used by the biharmonic operator blocks are provided:
//! value, first, second and fourth derivative. The sigmoid, Gaussian and
//! tanh derivatives are evaluated through their polynomial forms in
//! `s(x)`, `e^{-x^2}` and `tanh(x)` respectively.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Sine,
    Sigmoid,
    Gaussian,
    Tanh,
}

/// Derivative order of an activation evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Value,
    First,
    Second,
    Fourth,
}

impl Order {
    pub fn as_u32(self) -> u32 {
        match self {
            Order::Value => 0,
            Order::First => 1,
            Order::Second => 2,
            Order::Fourth => 4,
        }
    }
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(Order::Value),
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            4 => Ok(Order::Fourth),
            other => Err(Error::Contract(format!(
                "derivative order {other} is not supported (expected 0, 1, 2 or 4)"
            ))),
        }
    }
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Sine,
        ActivationKind::Sigmoid,
        ActivationKind::Gaussian,
        ActivationKind::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sine => "sine",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Gaussian => "gaussian",
            ActivationKind::Tanh => "tanh",
        }
    }

    /// Evaluates the derivative of the given order at `x`.
    #[inline]
    pub fn eval(self, order: Order, x: f64) -> f64 {
        match self {
            ActivationKind::Sine => sine(order, x),
            ActivationKind::Sigmoid => sigmoid(order, x),
            ActivationKind::Gaussian => gaussian(order, x),
            ActivationKind::Tanh => tanh(order, x),
        }
    }

    /// Like [`eval`](Self::eval) but with a numeric order, rejecting anything
    /// outside {0, 1, 2, 4}.
    pub fn eval_order(self, order: u32, x: f64) -> Result<f64> {
        Ok(self.eval(Order::try_from(order)?, x))
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Lookup {
                kind: "activation",
                name: s.to_string(),
            })
    }
}

#[inline]
fn sine(order: Order, x: f64) -> f64 {
    match order {
        Order::Value | Order::Fourth => x.sin(),
        Order::First => x.cos(),
        Order::Second => -x.sin(),
    }
}

/// Logistic function, split by sign so `exp` never overflows.
#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn sigmoid(order: Order, x: f64) -> f64 {
    let s = logistic(x);
    let s2 = s * s;
    match order {
        Order::Value => s,
        Order::First => s - s2,
        Order::Second => s - 3.0 * s2 + 2.0 * s2 * s,
        Order::Fourth => {
            let s3 = s2 * s;
            let s4 = s2 * s2;
            s - 15.0 * s2 + 50.0 * s3 - 60.0 * s4 + 24.0 * s4 * s
        }
    }
}

#[inline]
fn gaussian(order: Order, x: f64) -> f64 {
    let x2 = x * x;
    let e = (-x2).exp();
    match order {
        Order::Value => e,
        Order::First => -2.0 * x * e,
        Order::Second => -2.0 * e + 4.0 * x2 * e,
        Order::Fourth => 12.0 * e - 48.0 * x2 * e + 16.0 * x2 * x2 * e,
    }
}

#[inline]
fn tanh(order: Order, x: f64) -> f64 {
    let t = x.tanh();
    let t2 = t * t;
    match order {
        Order::Value => t,
        Order::First => 1.0 - t2,
        Order::Second => -2.0 * t + 2.0 * t2 * t,
        Order::Fourth => (16.0 * t - 24.0 * t2 * t) * (1.0 - t2),
    }
}
