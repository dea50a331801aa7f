//! Quadrature kernels over axis-aligned boxes.
//!
//! Three schemes are provided: global adaptive subdivision (Gauss–Kronrod
//! 7/15 in one dimension, Genz–Malik 7/5 in two or more), composite tensor
//! Gauss–Legendre with per-axis panel counts, and randomly shifted Halton
//! quasi-Monte Carlo. Every partial sum is reduced in a fixed order with
//! compensated summation so that results are bit-reproducible.

mod cubature;
mod qmc;
pub mod rules;
mod sum;

pub use cubature::{adaptive, tensor, AdaptiveOptions, TensorOptions};
pub use qmc::{halton_point, qmc, QmcOptions};
pub use sum::{CSum, KahanSum};

use num_complex::Complex64;

/// Outcome of one quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
    /// `false` when the evaluation budget ran out before the tolerance was met.
    pub converged: bool,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate { value: Complex64::new(0.0, 0.0), error: 0.0, evals: 0, converged: true }
    }
}

/// Integrand on a box: point -> complex value.
pub trait Integrand: Sync {
    fn eval(&self, x: &[f64]) -> Complex64;
}

impl<F> Integrand for F
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    fn eval(&self, x: &[f64]) -> Complex64 {
        self(x)
    }
}
