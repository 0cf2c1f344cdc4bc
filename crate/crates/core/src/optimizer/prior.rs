use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Gaussian prior `N(alpha | mu0, sigma0)` on the half extents of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePrior {
    pub class_id: u32,
    pub mu0: Vector3<f64>,
    pub sigma0: Matrix3<f64>,
    precision: Matrix3<f64>,
}

impl ScalePrior {
    pub fn new(class_id: u32, mu0: Vector3<f64>, sigma0: Matrix3<f64>) -> Result<Self> {
        if mu0.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "prior mean must be positive, got {:?}",
                mu0.as_slice()
            )));
        }
        if (sigma0 - sigma0.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidParameter(
                "prior covariance is not symmetric".into(),
            ));
        }
        let chol = sigma0.cholesky().ok_or_else(|| {
            Error::InvalidParameter("prior covariance is not positive definite".into())
        })?;
        Ok(Self {
            class_id,
            mu0,
            sigma0,
            precision: chol.inverse(),
        })
    }

    pub fn precision(&self) -> &Matrix3<f64> {
        &self.precision
    }

    /// `½ (α − μ0)ᵀ Σ0⁻¹ (α − μ0)` and its gradient in α.
    pub fn energy(&self, alpha: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let d = alpha - self.mu0;
        let g = self.precision * d;
        (0.5 * d.dot(&g), g)
    }
}
