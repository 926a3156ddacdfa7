//! Distance estimators between samples and reference laws.
//!
//! Kolmogorov distances over hyper-rays are computed exactly by corner
//! enumeration where feasible. Half-space and centred-ball classes give
//! lower bounds for the convex distance through one-dimensional reductions.

mod bootstrap;
mod corners;
mod ks;
mod laws;
mod projections;
mod wasserstein;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;
use crate::simulate::SampleBatch;

pub use bootstrap::{bootstrap_half_width, BOOTSTRAP_RESAMPLES};
pub use corners::{
    dk_gaussian_cov, dk_product_gaussian, dk_product_gaussian_search, dk_two_sample, TwoSampleOptions, CORNER_WORK_LIMIT,
    THREE_DIM_POOLED_LIMIT,
};
pub use ks::{dkw_band, ks_1d_law, ks_1d_one_sample, ks_statistic, sorted_copy};
pub use laws::{ChiRadius, EmpiricalLaw, Law1d, NormalLaw, PointMass, TabulatedCdf};
pub use projections::{ball_class_distance, default_directions, halfspace_distance, RANDOM_DIRECTIONS};
pub use wasserstein::{w1_1d, w1_two_sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistanceClass {
    KolmogorovRays,
    HalfSpaces,
    CenteredBalls,
    TwoSampleRays,
    Wasserstein1,
}

/// A distance value with advisory uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DistanceEstimate<T> {
    pub class: DistanceClass,
    pub value: T,
    /// Half-width of a confidence band; metadata only.
    pub ci: Option<T>,
    /// True when the value is the exact supremum over the class (given the data).
    pub exact: bool,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<T>,
}

impl<T: Real> DistanceEstimate<T> {
    pub fn with_t(mut self, t: T) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_ci(mut self, ci: T) -> Self {
        self.ci = Some(ci);
        self
    }

    /// One JSON-lines record `{class, value, ci, exact, n, d, t?}`.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("estimates serialise")
    }
}

/// Comparison law for a sample in `R^d`.
#[derive(Clone, Debug)]
pub enum ReferenceLaw<T> {
    /// Independent centred Gaussians with the given standard deviations.
    ProductGaussian { scales: Vec<T> },
    /// Law of `|zeta - center|`, tabulated.
    RadialCdf { cdf: TabulatedCdf<T>, center: Vec<T> },
    Empirical(SampleBatch<T>),
}

impl<T: Real> ReferenceLaw<T> {
    pub fn product_gaussian(scales: Vec<T>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
            return Err(crate::Error::invalid("Gaussian reference scales must be positive"));
        }
        Ok(Self::ProductGaussian { scales })
    }

    /// Distance of `sample` to this law in its natural class: rays for the
    /// Gaussian and empirical laws, centred balls for a radial CDF.
    pub fn distance(&self, sample: &SampleBatch<T>, opts: &TwoSampleOptions) -> Result<DistanceEstimate<T>> {
        match self {
            Self::ProductGaussian { scales } => dk_product_gaussian(sample, scales),
            Self::RadialCdf { cdf, center } => ball_class_distance(sample, cdf, center),
            Self::Empirical(b) => dk_two_sample(sample, b, opts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_shape() {
        let e = DistanceEstimate { class: DistanceClass::HalfSpaces, value: 0.25f64, ci: None, exact: false, n: 4, d: 2, t: None };
        assert_eq!(e.to_json_line(), r#"{"class":"HalfSpaces","value":0.25,"ci":null,"exact":false,"n":4,"d":2}"#);
        let back: DistanceEstimate<f64> = serde_json::from_str(&e.with_t(10.0).to_json_line()).unwrap();
        assert_eq!(back.t, Some(10.0));
    }

    #[test]
    fn reference_law_validates_scales() {
        assert!(ReferenceLaw::product_gaussian(vec![1.0, 0.0]).is_err());
        let law = ReferenceLaw::product_gaussian(vec![1.0f64]).unwrap();
        let s = SampleBatch::from_rows(1.0, 1, vec![0.0], 0).unwrap();
        assert_eq!(law.distance(&s, &TwoSampleOptions::default()).unwrap().value, 0.5);
    }
}
