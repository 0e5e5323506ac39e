//! Central differences with Richardson extrapolation.
//!
//! Every numerical derivative in the crate goes through [`central_derivative`],
//! which evaluates a symmetric difference quotient at steps `h, h/2, …, h/2^L`
//! and eliminates the even error terms with a Neville tableau.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Step-size policy for numerical derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentiationConfig {
    /// Largest step; `None` selects `max(1e-5, 1e-5·|x|)`.
    pub step: Option<f64>,
    pub richardson_levels: usize,
}

impl Default for DifferentiationConfig {
    fn default() -> Self {
        Self {
            step: None,
            richardson_levels: 2,
        }
    }
}

impl DifferentiationConfig {
    /// Fixed step `h=1e-4`, used for families of unitaries.
    pub fn unitary() -> Self {
        Self {
            step: Some(1e-4),
            richardson_levels: 2,
        }
    }

    pub fn with_step(step: f64) -> Self {
        Self {
            step: Some(step),
            ..Self::default()
        }
    }

    pub fn step_at(&self, x: f64) -> f64 {
        self.step.unwrap_or_else(|| 1e-5_f64.max(1e-5 * x.abs()))
    }

    /// Step at `x` shrunk so that `x ± h` stays strictly inside `[lo, hi]`.
    pub fn step_within(&self, x: f64, lo: f64, hi: f64) -> Result<f64> {
        let h = self.step_at(x);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("differentiation step {h} must be positive")));
        }
        let margin = (x - lo).min(hi - x);
        if margin <= 0.0 {
            return Err(Error::Domain {
                name: "x",
                value: x,
                domain: format!("interior of [{lo}, {hi}]"),
            });
        }
        Ok(h.min(0.5 * margin))
    }
}

/// Values that can be linearly combined during extrapolation.
pub trait Lincomb: Sized {
    /// Returns `a·self + b·other`.
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self;
}

impl Lincomb for f64 {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        a * self + b * other
    }
}

impl Lincomb for Vec<f64> {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.iter().zip(other).map(|(x, y)| a * x + b * y).collect()
    }
}

impl Lincomb for DMatrix<Complex64> {
    fn lincomb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map(other, |x, y| x * a + y * b)
    }
}

/// Extrapolates `g(h) → g(0)` for a quantity whose error is even in `h`.
///
/// `g` is evaluated at `h/2^k` for `k = 0..=levels` and the `h², h⁴, …`
/// terms are eliminated with a Neville tableau.
pub fn richardson_even<T, G>(mut g: G, h: f64, levels: usize) -> Result<T>
where
    T: Lincomb,
    G: FnMut(f64) -> Result<T>,
{
    let mut previous: Vec<T> = Vec::new();
    for k in 0..=levels {
        let mut row = Vec::with_capacity(k + 1);
        row.push(g(h / f64::powi(2.0, k as i32))?);
        for (j, prev) in previous.iter().enumerate() {
            let factor = f64::powi(4.0, j as i32 + 1);
            let refined = row[j].lincomb(factor / (factor - 1.0), prev, -1.0 / (factor - 1.0));
            row.push(refined);
        }
        previous = row;
    }
    Ok(previous.pop().expect("at least one level"))
}

/// Richardson-extrapolated central derivative of `f` at `x`.
pub fn central_derivative<T, F>(mut f: F, x: f64, h: f64, levels: usize) -> Result<T>
where
    T: Lincomb,
    F: FnMut(f64) -> Result<T>,
{
    richardson_even(
        |hk| {
            let plus = f(x + hk)?;
            let minus = f(x - hk)?;
            Ok(plus.lincomb(0.5 / hk, &minus, -0.5 / hk))
        },
        h,
        levels,
    )
}
