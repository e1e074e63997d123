use alloc::format;

use crate::error::{Error, Result};
use crate::vector::FeatureVector;

/// Inner-product kernel used by the classifier.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum Kernel {
    /// `<a, b>`
    #[default]
    Linear,
    /// `(gamma <a, b> + coef0)^degree`
    Polynomial { degree: u32, gamma: f64, coef0: f64 },
    /// `exp(-gamma |a - b|^2)`
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Polynomial {
                degree,
                gamma,
                coef0,
            } => {
                if degree < 1 {
                    return Err(Error::InvalidConfig(format!(
                        "polynomial degree must be >= 1, got {degree}"
                    )));
                }
                check_gamma(gamma)?;
                if !coef0.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "coef0 must be finite, got {coef0}"
                    )));
                }
                Ok(())
            }
            Kernel::Rbf { gamma } => check_gamma(gamma),
        }
    }

    pub fn eval(&self, a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
        b.check_dim(a.dim())?;
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        match *self {
            Kernel::Linear => a.dot(b),
            Kernel::Polynomial {
                degree,
                gamma,
                coef0,
            } => int_pow(gamma * a.dot(b) + coef0, degree),
            Kernel::Rbf { gamma } => libm::exp(-gamma * a.squared_distance(b)),
        }
    }

    /// Same as [`Kernel::eval`] on dense slices of equal length.
    pub(crate) fn eval_dense(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dense_dot(a, b),
            Kernel::Polynomial {
                degree,
                gamma,
                coef0,
            } => int_pow(gamma * dense_dot(a, b) + coef0, degree),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-gamma * d2)
            }
        }
    }
}

/// `K(a, b)` with dimension checking.
pub fn kernel_eval(kernel: &Kernel, a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    kernel.validate()?;
    kernel.eval(a, b)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "gamma must be positive and finite, got {gamma}"
        )))
    }
}

fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn int_pow(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}
