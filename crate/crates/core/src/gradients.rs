//! Exact parameter-shift gradients and a central finite-difference oracle.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// A deterministic, side-effect free map from parameters to a real number.
pub trait ScalarObjective {
    fn evaluate(&self, theta: &[f64]) -> Result<f64>;
}

impl<F> ScalarObjective for F
where
    F: Fn(&[f64]) -> Result<f64>,
{
    fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        self(theta)
    }
}

fn central<O: ScalarObjective + ?Sized>(
    obj: &O,
    theta: &[f64],
    h: f64,
    scale: f64,
) -> Result<Vec<f64>> {
    let mut work = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        work[i] = theta[i] + h;
        let plus = obj.evaluate(&work)?;
        work[i] = theta[i] - h;
        let minus = obj.evaluate(&work)?;
        work[i] = theta[i];
        grad.push((plus - minus) * scale);
    }
    Ok(grad)
}

/// `(f(theta + pi/2 e_i) - f(theta - pi/2 e_i)) / 2` for every `i`. Exact
/// when each parameter enters through exactly one `exp(-i theta sigma / 2)`.
pub fn parameter_shift_gradient<O: ScalarObjective + ?Sized>(
    obj: &O,
    theta: &[f64],
) -> Result<Vec<f64>> {
    central(obj, theta, FRAC_PI_2, 0.5)
}

/// `(f(theta + h e_i) - f(theta - h e_i)) / (2h)`
pub fn finite_difference_gradient<O: ScalarObjective + ?Sized>(
    obj: &O,
    theta: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Argument(format!("step {h} must be positive")));
    }
    central(obj, theta, h, 0.5 / h)
}
