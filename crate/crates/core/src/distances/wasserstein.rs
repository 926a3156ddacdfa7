use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{sorted_copy, DistanceClass, DistanceEstimate, EmpiricalLaw, Law1d};

/// `int |F_n - F|` for a sorted sample: exact between consecutive order
/// statistics (split where `F` crosses the empirical level) plus the
/// reference tails beyond the extreme observations.
pub fn w1_1d<T: Real>(sorted: &[T], law: &impl Law1d<T>) -> Result<DistanceEstimate<T>> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if sorted.windows(2).any(|w| !(w[0] <= w[1])) || sorted.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sample must be finite and sorted ascending"));
    }
    let n = sorted.len();
    let nf = T::from_usize_lossy(n);
    let tail = |v: Result<T>| -> Result<T> {
        match v {
            Ok(x) if x.is_finite() => Ok(x.max(T::zero())),
            _ => Err(Error::TailDivergence),
        }
    };
    let mut acc = tail(law.lower_partial(sorted[0]))? + tail(law.upper_partial(sorted[n - 1]))?;
    for i in 1..n {
        let (a, b) = (sorted[i - 1], sorted[i]);
        if b <= a {
            continue;
        }
        let c = T::from_usize_lossy(i) / nf;
        let q = law.quantile(c).max(a).min(b);
        let below = c * (q - a) - law.cdf_integral(a, q)?;
        let above = law.cdf_integral(q, b)? - c * (b - q);
        acc = acc + below.max(T::zero()) + above.max(T::zero());
    }
    if !acc.is_finite() {
        return Err(Error::TailDivergence);
    }
    Ok(DistanceEstimate {
        class: DistanceClass::Wasserstein1,
        value: acc,
        ci: None,
        exact: true,
        n,
        d: 1,
        t: None,
    })
}

/// Wasserstein-1 distance between two one-dimensional samples.
pub fn w1_two_sample<T: Real>(a: &[T], b: &[T]) -> Result<DistanceEstimate<T>> {
    let law = EmpiricalLaw::new(b.to_vec())?;
    w1_1d(&sorted_copy(a), &law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::NormalLaw;
    use crate::special::norm_quantile;

    #[test]
    fn single_point_against_normal() {
        let v = w1_1d(&[0.0], &NormalLaw::standard()).unwrap().value;
        assert!((v - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn own_empirical_law_is_zero() {
        let s = sorted_copy(&[0.3f64, -1.2, 2.5, 0.3, 7.0]);
        let v = w1_1d(&s, &EmpiricalLaw::new(s.clone()).unwrap()).unwrap().value;
        assert!(v.abs() < 1e-15, "{v}");
    }

    #[test]
    fn translated_quantiles_recover_shift() {
        let n = 10_000;
        let a = 0.7;
        let s: Vec<f64> = (1..=n).map(|i| norm_quantile((i as f64 - 0.5) / n as f64) + a).collect();
        let v = w1_1d(&s, &NormalLaw::standard()).unwrap().value;
        assert!((v - a).abs() < 0.02 * a, "{v}");
    }

    #[test]
    fn two_sample_matches_sorted_differences() {
        let a = [3.0f64, 1.0, 2.0];
        let b = [1.5, 2.5, 4.0];
        let v = w1_two_sample(&a, &b).unwrap().value;
        assert!((v - (0.5 + 0.5 + 1.0) / 3.0).abs() < 1e-15);
        assert!((w1_two_sample(&b, &a).unwrap().value - v).abs() < 1e-15);
    }
}
