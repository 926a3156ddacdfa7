use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, Matrix};
use crate::measures::{scaling_pair, LevyTriplet};
use crate::scalar::Real;

/// Representative time changes with `f(t) / t -> 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeChange {
    /// `f(t) = t + sqrt(t)`
    SqrtShift,
    /// `f(t) = ceil(t)`
    Ceil,
}

impl TimeChange {
    pub const ALL: [TimeChange; 2] = [TimeChange::SqrtShift, TimeChange::Ceil];

    pub fn apply<T: Real>(self, t: T) -> T {
        match self {
            TimeChange::SqrtShift => t + t.sqrt(),
            TimeChange::Ceil => t.ceil(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeChangeRow<T> {
    pub t: T,
    pub f_t: T,
    /// `||B(t)^{-1} B(f(t)) - I||_op`
    pub deviation: T,
}

/// Stability of the scaling under a time change. This only probes the
/// listed `f`; the property is required for every `f` with `f(t) / t -> 1`.
pub fn time_change_check<T: Real>(triplet: &LevyTriplet<T>, t_list: &[T], f: TimeChange, kappa: T) -> Result<Vec<TimeChangeRow<T>>> {
    let tol = T::lit(1e-300);
    t_list
        .iter()
        .map(|&t| {
            if !(t >= T::one()) {
                return Err(Error::invalid(format!("time must be at least 1, got {t}")));
            }
            let f_t = f.apply(t);
            let b_inv = spd_inverse(&scaling_pair(triplet, t, kappa)?.scaling, tol)?;
            let b_f = scaling_pair(triplet, f_t, kappa)?.scaling;
            let dev = &(&b_inv * &b_f) - &Matrix::identity(triplet.dim());
            Ok(TimeChangeRow {
                t,
                f_t,
                deviation: dev.op_norm(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::RadialLevyMeasure;
    use std::f64::consts::E;

    #[test]
    fn matches_closed_form_in_one_dimension() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 2.0, 1).unwrap()).unwrap();
        // Sigma(t) = 2 (1 - 1 / ln(kappa sqrt t)) for varsigma = e.
        let sigma = |t: f64| 2.0 * (1.0 - 1.0 / (E * t.sqrt()).ln());
        for f in TimeChange::ALL {
            let rows = time_change_check(&tr, &[3.5, 1e3, 1e6], f, E).unwrap();
            for r in &rows {
                let expected = ((r.f_t * sigma(r.f_t)) / (r.t * sigma(r.t))).sqrt() - 1.0;
                assert!((r.deviation - expected).abs() <= 1e-8, "{f:?} {r:?} vs {expected}");
            }
        }
    }

    #[test]
    fn deviation_vanishes_in_two_dimensions() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 2.0, 2).unwrap()).unwrap();
        for f in TimeChange::ALL {
            let rows = time_change_check(&tr, &[10.5, 1e4 + 0.5, 1e8 + 0.5], f, E).unwrap();
            assert!(rows.windows(2).all(|w| w[1].deviation < w[0].deviation), "{f:?} {rows:?}");
            assert!(rows[2].deviation < 1e-3);
        }
    }

    #[test]
    fn rejects_small_times() {
        let tr = LevyTriplet::gaussian(Matrix::identity(1)).unwrap();
        assert!(time_change_check(&tr, &[0.5], TimeChange::Ceil, 1.0).is_err());
    }
}
