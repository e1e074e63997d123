use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::vector::{FeatureVector, Label};

/// A trained binary classifier in dual form.
///
/// The decision function is `f(x) = sum_i coef_i K(sv_i, x) + bias` with
/// `coef_i = alpha_i y_i`. For the linear kernel the primal weight vector is
/// materialized once and used for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kernel: Kernel,
    bias: f64,
    c_bound: f64,
    dim: usize,
    support_vectors: Vec<FeatureVector>,
    sv_coefficients: Vec<f64>,
    explicit_weights: Option<Vec<f64>>,
}

impl Model {
    /// Assembles a model from its dual representation. `c_bound` is the
    /// box bound of the training run; every coefficient must respect it.
    pub fn new(
        kernel: Kernel,
        bias: f64,
        c_bound: f64,
        dim: usize,
        support_vectors: Vec<FeatureVector>,
        sv_coefficients: Vec<f64>,
    ) -> Result<Model> {
        kernel.validate()?;
        if support_vectors.is_empty() || support_vectors.len() != sv_coefficients.len() {
            return Err(Error::InvalidData(format!(
                "need matching non-empty support vectors and coefficients, got {} and {}",
                support_vectors.len(),
                sv_coefficients.len()
            )));
        }
        if !(c_bound.is_finite() && c_bound > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "C bound must be positive, got {c_bound}"
            )));
        }
        if !bias.is_finite() {
            return Err(Error::InvalidData(format!("bias is not finite: {bias}")));
        }
        for sv in &support_vectors {
            sv.check_dim(dim)?;
        }
        if let Some(bad) = sv_coefficients
            .iter()
            .find(|c| !c.is_finite() || c.abs() > c_bound)
        {
            return Err(Error::InvalidData(format!(
                "coefficient {bad} is outside [-{c_bound}, {c_bound}]"
            )));
        }

        let explicit_weights = match kernel {
            Kernel::Linear => {
                let mut w = alloc::vec![0.0; dim];
                for (sv, coef) in support_vectors.iter().zip(&sv_coefficients) {
                    for &(index, value) in sv.coords() {
                        w[index - 1] += coef * value;
                    }
                }
                Some(w)
            }
            _ => None,
        };

        Ok(Model {
            kernel,
            bias,
            c_bound,
            dim,
            support_vectors,
            sv_coefficients,
            explicit_weights,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_vectors(&self) -> &[FeatureVector] {
        &self.support_vectors
    }

    pub fn sv_coefficients(&self) -> &[f64] {
        &self.sv_coefficients
    }

    pub fn explicit_weights(&self) -> Option<&[f64]> {
        self.explicit_weights.as_deref()
    }

    /// Euclidean norm of the primal weight vector, `sqrt(sum_ij c_i c_j K_ij)`.
    pub fn weight_norm(&self) -> f64 {
        let mut sq = 0.0;
        for (a, ca) in self.support_vectors.iter().zip(&self.sv_coefficients) {
            for (b, cb) in self.support_vectors.iter().zip(&self.sv_coefficients) {
                sq += ca * cb * self.kernel.eval_unchecked(a, b);
            }
        }
        libm::sqrt(sq.max(0.0))
    }

    /// Geometric margin width `2 / |w|`.
    pub fn margin_width(&self) -> f64 {
        2.0 / self.weight_norm()
    }

    pub fn decision_value(&self, x: &FeatureVector) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(match &self.explicit_weights {
            Some(w) => x.dot_dense(w) + self.bias,
            None => self.kernel_expansion(x),
        })
    }

    /// Decision value through the support-vector expansion, bypassing the
    /// linear fast path.
    pub fn kernel_expansion_value(&self, x: &FeatureVector) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(self.kernel_expansion(x))
    }

    fn kernel_expansion(&self, x: &FeatureVector) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.sv_coefficients)
            .map(|(sv, coef)| coef * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// `+1` when the decision value is non-negative; a value of exactly zero
    /// resolves to `+1`.
    pub fn predict(&self, x: &FeatureVector) -> Result<Label> {
        self.decision_value(x).map(Label::from_sign)
    }

    /// Sum of hinge losses `max(0, 1 - y f(x))` over `data`.
    pub fn total_slack(&self, data: &[(FeatureVector, Label)]) -> Result<f64> {
        let mut slack = 0.0;
        for (x, y) in data {
            let f = self.decision_value(x)?;
            slack += (1.0 - y.as_f64() * f).max(0.0);
        }
        Ok(slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(x: f64) -> FeatureVector {
        FeatureVector::from_dense(&[x]).unwrap()
    }

    fn two_point() -> Model {
        Model::new(
            Kernel::Linear,
            0.0,
            10.0,
            1,
            vec![point(-1.0), point(1.0)],
            vec![-0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn two_point_decisions() {
        let m = two_point();
        assert_eq!(m.explicit_weights(), Some(&[1.0][..]));
        assert_eq!(m.decision_value(&point(0.0)).unwrap(), 0.0);
        assert_eq!(m.decision_value(&point(3.0)).unwrap(), 3.0);
        assert_eq!(m.predict(&point(0.5)).unwrap(), Label::Positive);
        assert_eq!(m.predict(&point(-0.5)).unwrap(), Label::Negative);
        assert_eq!(m.predict(&point(0.0)).unwrap(), Label::Positive);
        assert_eq!(m.margin_width(), 2.0);
    }

    #[test]
    fn single_support_vector() {
        let s = FeatureVector::from_dense(&[0.6, 0.8]).unwrap();
        let m = Model::new(Kernel::Linear, -1.0, 5.0, 2, vec![s.clone()], vec![2.0]).unwrap();
        assert!((m.decision_value(&s).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.kernel_expansion_value(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slack() {
        let m = two_point();
        let data = vec![
            (point(-1.0), Label::Negative),
            (point(1.0), Label::Positive),
        ];
        assert_eq!(m.total_slack(&data).unwrap(), 0.0);
        let on_plane = vec![(point(0.0), Label::Positive)];
        assert_eq!(m.total_slack(&on_plane).unwrap(), 1.0);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Model::new(Kernel::Linear, 0.0, 1.0, 1, vec![], vec![]).is_err());
        assert!(Model::new(Kernel::Linear, 0.0, 1.0, 1, vec![point(1.0)], vec![2.0]).is_err());
        assert!(Model::new(Kernel::Linear, 0.0, 1.0, 2, vec![point(1.0)], vec![0.5]).is_err());
    }

    #[test]
    fn dimension_checked() {
        let m = two_point();
        let x = FeatureVector::from_dense(&[1.0, 2.0]).unwrap();
        assert!(matches!(m.decision_value(&x), Err(Error::Dimension { .. })));
        assert!(m.predict(&x).is_err());
    }
}
