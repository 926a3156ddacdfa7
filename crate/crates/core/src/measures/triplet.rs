use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_psd, Matrix};
use crate::scalar::Real;

use super::{LevyMeasure, RadialLevyMeasure};

/// Generating triplet `(Sigma, gamma, nu)` with the unit-ball cutoff
/// `gamma`-convention: `E[X_1] = gamma + int_{|v| > 1} v nu(dv)`.
///
/// With `zero_mean` set, `gamma` is ignored and the process is centred so
/// that `E[X_1] = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LevyTriplet<T> {
    gaussian_cov: Matrix<T>,
    drift: Vec<T>,
    measure: LevyMeasure<T>,
    zero_mean: bool,
}

impl<T: Real> LevyTriplet<T> {
    pub fn new(gaussian_cov: Matrix<T>, drift: Vec<T>, measure: impl Into<LevyMeasure<T>>, zero_mean: bool) -> Result<Self> {
        let measure = measure.into();
        let d = measure.dim();
        if gaussian_cov.dim() != d || drift.len() != d {
            return Err(Error::invalid(format!(
                "dimension mismatch: measure {d}, covariance {}, drift {}",
                gaussian_cov.dim(),
                drift.len()
            )));
        }
        if gaussian_cov.as_slice().iter().chain(&drift).any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariance and drift must be finite"));
        }
        let asym_tol = T::lit(1e-12) * gaussian_cov.max_abs().max(T::one());
        if gaussian_cov.asymmetry() > asym_tol {
            return Err(Error::invalid("Gaussian covariance is not symmetric"));
        }
        check_psd(&gaussian_cov.symmetric_eigen())?;
        Ok(Self {
            gaussian_cov,
            drift,
            measure,
            zero_mean,
        })
    }

    /// Zero-mean triplet with the given Gaussian part and measure.
    pub fn centered(gaussian_cov: Matrix<T>, measure: impl Into<LevyMeasure<T>>) -> Result<Self> {
        let measure = measure.into();
        let d = measure.dim();
        Self::new(gaussian_cov, vec![T::zero(); d], measure, true)
    }

    /// Pure jump, zero-mean triplet.
    pub fn pure_jump(measure: impl Into<LevyMeasure<T>>) -> Result<Self> {
        let measure = measure.into();
        Self::centered(Matrix::zeros(measure.dim()), measure)
    }

    /// Brownian motion with covariance `cov`.
    pub fn gaussian(cov: Matrix<T>) -> Result<Self> {
        let d = cov.dim();
        Self::centered(cov, RadialLevyMeasure::zero(d))
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn gaussian_cov(&self) -> &Matrix<T> {
        &self.gaussian_cov
    }

    pub fn drift(&self) -> &[T] {
        &self.drift
    }

    pub fn measure(&self) -> &LevyMeasure<T> {
        &self.measure
    }

    pub fn zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// `E[X_1]`.
    pub fn mean(&self) -> Result<Vec<T>> {
        if self.zero_mean {
            return Ok(vec![T::zero(); self.dim()]);
        }
        let tail = self.measure.tail_first_moment(T::one())?;
        Ok(self.drift.iter().zip(tail).map(|(&g, m)| g + m).collect())
    }

    /// Drift `b` of the compound-Poisson representation
    /// `X_t = Sigma^{1/2} W_t + sum_{i <= N_t} J_i + t b`.
    pub fn compound_drift(&self) -> Result<Vec<T>> {
        if self.zero_mean {
            let all = self.measure.tail_first_moment(T::zero())?;
            return Ok(all.into_iter().map(|m| -m).collect());
        }
        let inner = self.measure.truncated_first_moment(T::one());
        Ok(self.drift.iter().zip(inner).map(|(&g, m)| g - m).collect())
    }

    /// Stable 64-bit hash of the serialised triplet.
    pub fn fingerprint(&self) -> u64 {
        let text = serde_json::to_string(self).expect("triplet serialises");
        fnv1a(text.as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
