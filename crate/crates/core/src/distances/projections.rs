use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{tag, RngStream};
use crate::scalar::Real;
use crate::simulate::SampleBatch;
use crate::special::norm_cdf;

use super::{dkw_band, ks_statistic, sorted_copy, DistanceClass, DistanceEstimate, Law1d};

/// Seeded uniform directions added to the default half-space set.
pub const RANDOM_DIRECTIONS: usize = 64;
const UNIT_TOL: f64 = 1e-9;

/// Coordinate axes, the diagonals `(e_i +- e_j)/sqrt 2` for `i < j`, and
/// [`RANDOM_DIRECTIONS`] seeded uniform unit vectors (axes only for `d = 1`).
pub fn default_directions<T: Real>(dim: usize, seed: u64) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    for i in 0..dim {
        let mut e = vec![T::zero(); dim];
        e[i] = T::one();
        out.push(e);
    }
    if dim == 1 {
        return out;
    }
    let h = T::FRAC_1_SQRT_2();
    for i in 0..dim {
        for j in (i + 1)..dim {
            for s in [T::one(), -T::one()] {
                let mut e = vec![T::zero(); dim];
                e[i] = h;
                e[j] = s * h;
                out.push(e);
            }
        }
    }
    let mut rng = RngStream::new(seed, tag::DIRECTIONS, dim as u64).block(0);
    while out.len() < dim * dim + RANDOM_DIRECTIONS {
        let v: Vec<T> = (0..dim).map(|_| T::sample_normal(&mut rng)).collect();
        let norm = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if norm > T::lit(1e-8) {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

/// Largest one-dimensional Kolmogorov distance between projections
/// `<w, row>` and `N(0, w^T cov w)` over the given unit directions; a lower
/// bound for the convex distance to `N(0, cov)`.
pub fn halfspace_distance<T: Real>(sample: &SampleBatch<T>, cov: &Matrix<T>, directions: &[Vec<T>]) -> Result<DistanceEstimate<T>> {
    if sample.n() == 0 {
        return Err(Error::EmptySample);
    }
    if cov.dim() != sample.dim {
        return Err(Error::invalid("covariance dimension does not match the sample"));
    }
    crate::linalg::check_psd(&cov.symmetric_eigen())?;
    if directions.is_empty() {
        return Err(Error::invalid("at least one direction is required"));
    }
    for w in directions {
        let norm = w.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
        if w.len() != sample.dim || (norm - T::one()).abs() > T::lit(UNIT_TOL) {
            return Err(Error::invalid("directions must be unit vectors of the sample dimension"));
        }
    }
    let values = directions
        .par_iter()
        .enumerate()
        .map(|(index, w)| {
            let var = cov.quad_form(w);
            if !(var > T::zero()) {
                return Err(Error::DegenerateDirection { index });
            }
            let sd = var.sqrt();
            let proj = sorted_copy(&sample.project(w));
            ks_statistic(&proj, |x| norm_cdf(x / sd), |x| norm_cdf(x / sd))
        })
        .collect::<Result<Vec<T>>>()?;
    let value = values.into_iter().fold(T::zero(), |a, b| a.max(b));
    Ok(DistanceEstimate {
        class: DistanceClass::HalfSpaces,
        value,
        ci: Some(dkw_band(sample.n())),
        exact: false,
        n: sample.n(),
        d: sample.dim,
        t: None,
    })
}

/// Kolmogorov distance over the balls centred at `center`: the
/// one-dimensional distance between `|row - center|` and `radial`.
pub fn ball_class_distance<T: Real>(sample: &SampleBatch<T>, radial: &impl Law1d<T>, center: &[T]) -> Result<DistanceEstimate<T>> {
    if sample.n() == 0 {
        return Err(Error::EmptySample);
    }
    if center.len() != sample.dim {
        return Err(Error::invalid("center dimension does not match the sample"));
    }
    let radii = sorted_copy(&sample.radii(center));
    let value = ks_statistic(&radii, |r| radial.cdf(r), |r| radial.cdf_left(r))?;
    Ok(DistanceEstimate {
        class: DistanceClass::CenteredBalls,
        value,
        ci: Some(dkw_band(sample.n())),
        exact: true,
        n: sample.n(),
        d: sample.dim,
        t: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{ks_1d_one_sample, ChiRadius, PointMass};
    use crate::simulate::sample_circle;

    fn normal_batch(seed: u64, n: usize, d: usize, scale: f64) -> SampleBatch<f64> {
        let mut rng = RngStream::new(seed, tag::REFERENCE, 1).block(0);
        let v = (0..n * d).map(|_| scale * f64::sample_normal(&mut rng)).collect();
        SampleBatch::from_rows(1.0, d, v, seed).unwrap()
    }

    #[test]
    fn direction_set_shape() {
        let dirs = default_directions::<f64>(3, 1);
        assert_eq!(dirs.len(), 3 + 6 + RANDOM_DIRECTIONS);
        assert!(dirs.iter().all(|w| (w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12));
        assert_eq!(dirs, default_directions::<f64>(3, 1));
        assert_ne!(dirs, default_directions::<f64>(3, 2));
        assert_eq!(default_directions::<f64>(1, 0), vec![vec![1.0]]);
    }

    #[test]
    fn gaussian_sample_is_within_band() {
        let s = normal_batch(1, 10_000, 2, 1.0);
        let dirs = default_directions(2, 5);
        let e = halfspace_distance(&s, &Matrix::identity(2), &dirs).unwrap();
        // DKW radius with a union bound over the directions.
        let band = ((2.0 * dirs.len() as f64 / 0.05).ln() / 2.0).sqrt() / 100.0;
        assert!(e.value < band, "{} vs {band}", e.value);
    }

    #[test]
    fn axes_reduce_to_coordinate_ks() {
        let s = normal_batch(2, 200, 2, 1.0);
        let cov = Matrix::diagonal(&[1.0, 4.0]);
        let axes = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let v = halfspace_distance(&s, &cov, &axes).unwrap().value;
        let k0 = ks_1d_one_sample(&sorted_copy(&s.column(0)), norm_cdf).unwrap().value;
        let k1 = ks_1d_one_sample(&sorted_copy(&s.column(1)), |x| norm_cdf(x / 2.0)).unwrap().value;
        assert_eq!(v, k0.max(k1));
    }

    #[test]
    fn shifted_sample_is_detected() {
        let mut s = normal_batch(3, 2000, 2, 1.0);
        for r in s.values.chunks_exact_mut(2) {
            r[0] += 2.0;
        }
        let v = halfspace_distance(&s, &Matrix::identity(2), &[vec![1.0, 0.0]]).unwrap().value;
        assert!(v >= norm_cdf(2.0) - 0.5 - 0.02, "{v}");
    }

    #[test]
    fn degenerate_direction() {
        let s = normal_batch(4, 10, 2, 1.0);
        let cov = Matrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            halfspace_distance(&s, &cov, &[vec![0.0, 1.0]]),
            Err(Error::DegenerateDirection { index: 0 })
        ));
    }

    #[test]
    fn circle_ball_distance_is_one() {
        for n in [2u64, 10, 100] {
            let s = sample_circle::<f64>(n, 500, 2, 4).unwrap();
            let e = ball_class_distance(&s, &PointMass { at: 1.0 }, &[0.0, 0.0]).unwrap();
            assert_eq!(e.value, 1.0);
        }
    }

    #[test]
    fn chi_reference_is_small() {
        let s = normal_batch(5, 10_000, 3, 2.0);
        let e = ball_class_distance(&s, &ChiRadius::new(3, 2.0).unwrap(), &[0.0; 3]).unwrap();
        assert!(e.value < 1.36 / 100.0);
    }
}
