use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{char_exponent_1d, scaling_pair, LevyTriplet};
use crate::scalar::Real;

/// One row of the characteristic-exponent check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CfRow<T> {
    pub t: T,
    pub x: T,
    /// `t mu(x / B_c(t))`
    pub value: T,
    /// `x^2 / 2`
    pub gauss: T,
    pub ratio: T,
}

/// Compares `t mu(x / B_c(t))` with the Gaussian exponent `x^2 / 2` for a
/// symmetric one-dimensional triplet. Quadrature only.
pub fn cf_clt_check<T: Real>(triplet: &LevyTriplet<T>, x_list: &[T], t_list: &[T], kappa: T) -> Result<Vec<CfRow<T>>> {
    if triplet.dim() != 1 {
        return Err(Error::invalid("cf check requires dimension 1"));
    }
    if let Some(x) = x_list.iter().find(|x| !(x.abs() > T::zero() && x.is_finite())) {
        return Err(Error::invalid(format!("frequencies must be finite and non-zero, got {x}")));
    }
    let mut rows = Vec::with_capacity(x_list.len() * t_list.len());
    for &t in t_list {
        let b = scaling_pair(triplet, t, kappa)?.scaling[(0, 0)];
        for &x in x_list {
            let value = t * char_exponent_1d(triplet, x / b)?;
            let gauss = T::lit(0.5) * x * x;
            rows.push(CfRow {
                t,
                x,
                value,
                gauss,
                ratio: value / gauss,
            });
        }
    }
    Ok(rows)
}
