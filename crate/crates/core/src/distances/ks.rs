use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{DistanceClass, DistanceEstimate, Law1d};

/// Asymptotic 95% DKW radius `1.36 / sqrt(n)`.
pub fn dkw_band<T: Real>(n: usize) -> T {
    T::lit(1.36) / T::from_usize_lossy(n.max(1)).sqrt()
}

/// Sorted copy of finite values.
pub fn sorted_copy<T: Real>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v
}

fn check_sorted<T: Real>(sorted: &[T]) -> Result<()> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    if sorted.windows(2).any(|w| !(w[0] <= w[1])) || !sorted[0].is_finite() || !sorted[sorted.len() - 1].is_finite() {
        return Err(Error::invalid("sample must be finite and sorted ascending"));
    }
    Ok(())
}

/// `sup_x |F_n(x) - F(x)|` for a sorted sample, given `F` and its left limits:
/// the maximum over order statistics of `i/n - F(x_(i))` and
/// `F(x_(i)-) - (i-1)/n`.
pub fn ks_statistic<T: Real>(sorted: &[T], cdf: impl Fn(T) -> T, cdf_left: impl Fn(T) -> T) -> Result<T> {
    check_sorted(sorted)?;
    let n = T::from_usize_lossy(sorted.len());
    let mut best = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let hi = T::from_usize_lossy(i + 1) / n;
        let lo = T::from_usize_lossy(i) / n;
        best = best.max(hi - cdf(x)).max(cdf_left(x) - lo);
    }
    Ok(best.min(T::one()))
}

/// One-sample Kolmogorov-Smirnov distance to a continuous CDF.
pub fn ks_1d_one_sample<T: Real>(sorted: &[T], cdf: impl Fn(T) -> T) -> Result<DistanceEstimate<T>> {
    let value = ks_statistic(sorted, &cdf, &cdf)?;
    Ok(estimate(value, sorted.len()))
}

/// One-sample Kolmogorov-Smirnov distance to an arbitrary law, atoms included.
pub fn ks_1d_law<T: Real>(sorted: &[T], law: &impl Law1d<T>) -> Result<DistanceEstimate<T>> {
    let value = ks_statistic(sorted, |x| law.cdf(x), |x| law.cdf_left(x))?;
    Ok(estimate(value, sorted.len()))
}

fn estimate<T: Real>(value: T, n: usize) -> DistanceEstimate<T> {
    DistanceEstimate {
        class: DistanceClass::KolmogorovRays,
        value,
        ci: Some(dkw_band(n)),
        exact: true,
        n,
        d: 1,
        t: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{NormalLaw, PointMass};
    use crate::rng::{tag, RngStream};
    use crate::special::{norm_cdf, norm_quantile};

    #[test]
    fn single_point_at_median() {
        assert_eq!(ks_1d_one_sample(&[0.0], norm_cdf).unwrap().value, 0.5);
    }

    #[test]
    fn exact_quantiles_equioscillate() {
        let n = 100;
        let s: Vec<f64> = (1..=n).map(|i| norm_quantile((i as f64 - 0.5) / n as f64)).collect();
        let v = ks_1d_one_sample(&s, norm_cdf).unwrap().value;
        assert!((v - 0.005).abs() < 1e-12, "{v}");
    }

    #[test]
    fn matches_dense_grid() {
        let mut rng = RngStream::new(11, tag::REFERENCE, 0).block(0);
        let s = sorted_copy(&(0..20).map(|_| f64::sample_normal(&mut rng)).collect::<Vec<_>>());
        let v = ks_1d_one_sample(&s, norm_cdf).unwrap().value;
        // Grid points plus the order statistics and their left neighbours.
        let ecdf = |x: f64| s.iter().filter(|&&y| y <= x).count() as f64 / 20.0;
        let mut best: f64 = 0.0;
        let m = 1_000_000;
        for i in 0..=m {
            let x = -6.0 + 12.0 * i as f64 / m as f64;
            best = best.max((ecdf_fast(&s, x) - norm_cdf(x)).abs());
        }
        for &x in &s {
            best = best.max((ecdf(x) - norm_cdf(x)).abs());
            let left = x - 1e-13;
            best = best.max((ecdf(left) - norm_cdf(left)).abs());
        }
        assert!((v - best).abs() < 1e-12, "{v} vs {best}");
    }

    fn ecdf_fast(s: &[f64], x: f64) -> f64 {
        s.partition_point(|&y| y <= x) as f64 / s.len() as f64
    }

    #[test]
    fn atoms_use_left_limits() {
        // Sample exactly on the atom agrees with the law.
        let law = PointMass { at: 1.0 };
        assert_eq!(ks_1d_law(&[1.0, 1.0], &law).unwrap().value, 0.0);
        assert_eq!(ks_1d_law(&[1.5], &law).unwrap().value, 1.0);
        let n = NormalLaw::standard();
        assert_eq!(ks_1d_law(&[0.0], &n).unwrap().value, 0.5);
    }

    #[test]
    fn rejects_unsorted_and_empty() {
        assert!(matches!(ks_1d_one_sample(&[], norm_cdf::<f64>), Err(Error::EmptySample)));
        assert!(ks_1d_one_sample(&[1.0, 0.0], norm_cdf).is_err());
    }
}
