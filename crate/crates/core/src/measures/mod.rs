//! Levy triplets, measure families, truncated moments and scaling schedules.

mod atomic;
mod charexp;
mod radial;
mod scaling;
mod triplet;

pub use atomic::{Atom, AtomicMeasure};
pub use charexp::char_exponent_1d;
pub use radial::{RadialFamily, RadialLevyMeasure};
pub use scaling::{
    berry_esseen_bound, centering_drift, choose_kappa, full_covariance, moment_class, scaling_pair,
    total_second_moment, truncated_cov, MomentClass, ScalingPair, SecondMomentIdentity, KAPPA_GRID_STEPS,
    KAPPA_TOL,
};
pub use triplet::LevyTriplet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// A moment that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum MomentValue<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> MomentValue<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match *self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }

    /// Value as a float, `inf` when infinite.
    pub fn as_real(&self) -> T {
        self.value().unwrap_or_else(T::infinity)
    }

    pub fn map(self, f: impl FnOnce(T) -> T) -> Self {
        match self {
            MomentValue::Finite(v) => MomentValue::Finite(f(v)),
            MomentValue::Infinite => MomentValue::Infinite,
        }
    }
}

/// Levy measure: an isotropic radial family or a finite set of atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
#[serde(rename_all = "snake_case")]
pub enum LevyMeasure<T> {
    Radial(RadialLevyMeasure<T>),
    Atomic(AtomicMeasure<T>),
}

impl<T: Real> From<RadialLevyMeasure<T>> for LevyMeasure<T> {
    fn from(m: RadialLevyMeasure<T>) -> Self {
        LevyMeasure::Radial(m)
    }
}

impl<T: Real> From<AtomicMeasure<T>> for LevyMeasure<T> {
    fn from(m: AtomicMeasure<T>) -> Self {
        LevyMeasure::Atomic(m)
    }
}

impl<T: Real> LevyMeasure<T> {
    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::Radial(m) => m.dim(),
            LevyMeasure::Atomic(m) => m.dim(),
        }
    }

    pub fn as_radial(&self) -> Option<&RadialLevyMeasure<T>> {
        match self {
            LevyMeasure::Radial(m) => Some(m),
            LevyMeasure::Atomic(_) => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyMeasure::Radial(_) => true,
            LevyMeasure::Atomic(m) => m.is_symmetric(),
        }
    }

    pub fn tail_mass(&self, r: T) -> Result<T> {
        match self {
            LevyMeasure::Radial(m) => m.tail_mass(r),
            LevyMeasure::Atomic(m) => Ok(m.tail_mass(r)),
        }
    }

    pub fn total_mass(&self) -> Result<T> {
        self.tail_mass(T::zero())
    }

    pub fn truncated_moment(&self, p: u32, r: T) -> Result<T> {
        match self {
            LevyMeasure::Radial(m) => m.truncated_moment(p, r),
            LevyMeasure::Atomic(m) => Ok(m.truncated_moment(p, r)),
        }
    }

    pub fn tail_moment(&self, p: u32, r: T) -> Result<MomentValue<T>> {
        match self {
            LevyMeasure::Radial(m) => m.tail_moment(p, r),
            LevyMeasure::Atomic(m) => Ok(MomentValue::Finite(m.tail_moment(p, r))),
        }
    }

    pub fn moment(&self, p: u32) -> Result<MomentValue<T>> {
        self.tail_moment(p, T::zero())
    }

    /// `int_{B_0(r)} v v^T nu(dv)`.
    pub fn truncated_second_moment_matrix(&self, r: T) -> Result<Matrix<T>> {
        match self {
            LevyMeasure::Radial(m) => {
                let m2 = m.truncated_moment(2, r)?;
                Ok(Matrix::scalar(m.dim(), m2 / T::from_usize_lossy(m.dim())))
            }
            LevyMeasure::Atomic(m) => Ok(m.truncated_second_moment_matrix(r)),
        }
    }

    /// `int v v^T nu(dv)`, failing when the second moment diverges.
    pub fn second_moment_matrix(&self) -> Result<Matrix<T>> {
        match self {
            LevyMeasure::Radial(m) => match m.moment(2)? {
                MomentValue::Finite(v) => Ok(Matrix::scalar(m.dim(), v / T::from_usize_lossy(m.dim()))),
                MomentValue::Infinite => Err(Error::IndeterminateMoment("second moment of the Levy measure diverges".into())),
            },
            LevyMeasure::Atomic(m) => Ok(m.truncated_second_moment_matrix(T::infinity())),
        }
    }

    /// `int_{|v| > r} v nu(dv)`.
    pub fn tail_first_moment(&self, r: T) -> Result<Vec<T>> {
        match self {
            LevyMeasure::Radial(m) => match m.tail_moment(1, r)? {
                MomentValue::Finite(_) => Ok(vec![T::zero(); m.dim()]),
                MomentValue::Infinite => Err(Error::IndeterminateMoment("first moment tail diverges".into())),
            },
            LevyMeasure::Atomic(m) => Ok(m.first_moment_vector(|s| s > r)),
        }
    }

    /// `int_{|v| <= r} v nu(dv)`.
    pub fn truncated_first_moment(&self, r: T) -> Vec<T> {
        match self {
            LevyMeasure::Radial(m) => vec![T::zero(); m.dim()],
            LevyMeasure::Atomic(m) => m.first_moment_vector(|s| s <= r),
        }
    }
}
