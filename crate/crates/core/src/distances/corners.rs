use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{tag, RngStream, BLOCK_ROWS};
use crate::scalar::Real;
use crate::simulate::SampleBatch;
use crate::special::norm_cdf;

use super::{dkw_band, DistanceClass, DistanceEstimate};

/// Largest number of grid cells visited by an exact corner enumeration.
pub const CORNER_WORK_LIMIT: u64 = 1_000_000_000;
/// Pooled size up to which three-dimensional two-sample distances are exact.
pub const THREE_DIM_POOLED_LIMIT: usize = 2000;
const MAX_EXACT_DIM: usize = 3;
/// Slices of the first axis handed to one task.
const SLICES_PER_TASK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoSampleOptions {
    /// Fall back to a stochastic corner search beyond the exact-path guards.
    pub allow_approximate: bool,
    /// Random corners tried by the stochastic search.
    pub candidates: usize,
    pub seed: u64,
}

impl Default for TwoSampleOptions {
    fn default() -> Self {
        Self {
            allow_approximate: false,
            candidates: 4096,
            seed: 0,
        }
    }
}

/// Distinct sorted coordinate values per axis, pooled over `batches`.
fn axes<T: Real>(d: usize, batches: &[&SampleBatch<T>]) -> Vec<Vec<T>> {
    (0..d)
        .map(|j| {
            let mut v: Vec<T> = batches.iter().flat_map(|b| b.rows().map(move |r| r[j])).collect();
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
            v.dedup();
            v
        })
        .collect()
}

/// Cells per axis: one more than the distinct values, padded to three axes.
fn cell_counts<T>(axes: &[Vec<T>]) -> [usize; 3] {
    let mut c = [1usize; 3];
    for (j, a) in axes.iter().enumerate() {
        c[j] = a.len() + 1;
    }
    c
}

fn total_cells(c: &[usize; 3]) -> u64 {
    c.iter().map(|&x| x as u64).product()
}

/// Grid position `1 + rank` of every row on every axis (0 on padded axes).
fn positions<T: Real>(axes: &[Vec<T>], batch: &SampleBatch<T>, weight: i64, out: &mut Vec<([usize; 3], i64)>) {
    for r in batch.rows() {
        let mut p = [0usize; 3];
        for (j, a) in axes.iter().enumerate() {
            p[j] = a.partition_point(|&v| v < r[j]) + 1;
        }
        out.push((p, weight));
    }
}

#[derive(Clone, Copy)]
struct Best<T> {
    value: T,
    index: u64,
}

impl<T: Real> Best<T> {
    fn merge(self, other: Self) -> Self {
        if other.value > self.value || (other.value == self.value && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Maximises `score(cell, cum)` over all cells of the grid, where `cum` is
/// the total weight of rows whose position is `<= cell` on every axis.
/// Cell `k` on an axis spans `[g_{k-1}, g_k)` with `g_{-1} = -inf`.
fn scan_cells<T, F>(c: [usize; 3], mut rows: Vec<([usize; 3], i64)>, score: F) -> Best<T>
where
    T: Real,
    F: Fn([usize; 3], i64) -> T + Sync,
{
    rows.sort_by_key(|r| r.0[0]);
    let (c1, c2) = (c[1], c[2]);
    let plane = c1 * c2;
    let starts: Vec<usize> = (0..c[0]).step_by(SLICES_PER_TASK).collect();
    starts
        .into_par_iter()
        .map(|start| {
            let end = (start + SLICES_PER_TASK).min(c[0]);
            let mut hist = vec![0i64; plane];
            let mut cum = vec![0i64; plane];
            let mut next = 0usize;
            let mut best = Best { value: T::neg_infinity(), index: u64::MAX };
            for k0 in start..end {
                while next < rows.len() && rows[next].0[0] <= k0 {
                    let (p, w) = rows[next];
                    hist[p[1] * c2 + p[2]] += w;
                    next += 1;
                }
                cum.copy_from_slice(&hist);
                for k1 in 0..c1 {
                    let row = &mut cum[k1 * c2..(k1 + 1) * c2];
                    for k2 in 1..c2 {
                        row[k2] += row[k2 - 1];
                    }
                }
                for k1 in 1..c1 {
                    for k2 in 0..c2 {
                        cum[k1 * c2 + k2] += cum[(k1 - 1) * c2 + k2];
                    }
                }
                for k1 in 0..c1 {
                    for k2 in 0..c2 {
                        let v = score([k0, k1, k2], cum[k1 * c2 + k2]);
                        let index = ((k0 * c1 + k1) * c2 + k2) as u64;
                        best = best.merge(Best { value: v, index });
                    }
                }
            }
            best
        })
        .reduce(|| Best { value: T::neg_infinity(), index: u64::MAX }, Best::merge)
}

fn check_batch<T: Real>(b: &SampleBatch<T>) -> Result<()> {
    if b.n() == 0 {
        return Err(Error::EmptySample);
    }
    Ok(())
}

fn check_scales<T: Real>(sample: &SampleBatch<T>, scales: &[T]) -> Result<()> {
    check_batch(sample)?;
    if scales.len() != sample.dim {
        return Err(Error::invalid(format!("{} scales for dimension {}", scales.len(), sample.dim)));
    }
    if scales.iter().any(|s| !(*s > T::zero() && s.is_finite())) {
        return Err(Error::invalid("reference scales must be positive and finite"));
    }
    Ok(())
}

/// Kolmogorov distance between the empirical law of `sample` and the
/// centred Gaussian with covariance `diag(scales^2)`, by exact enumeration
/// of the coordinate grid including left limits.
pub fn dk_product_gaussian<T: Real>(sample: &SampleBatch<T>, scales: &[T]) -> Result<DistanceEstimate<T>> {
    check_scales(sample, scales)?;
    let d = sample.dim;
    if d > MAX_EXACT_DIM {
        return Err(Error::DimensionTooLarge { dim: d, limit: format!("d <= {MAX_EXACT_DIM}") });
    }
    let ax = axes(d, &[sample]);
    let c = cell_counts(&ax);
    if total_cells(&c) > CORNER_WORK_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: d,
            limit: format!("{CORNER_WORK_LIMIT} corner cells, need {}", total_cells(&c)),
        });
    }
    // phi[j][k] = Phi(g_{k-1} / s_j) with Phi(-inf) = 0 and Phi(+inf) = 1;
    // padded axes contribute a factor 1.
    let phi: Vec<Vec<T>> = (0..MAX_EXACT_DIM)
        .map(|j| {
            if j >= d {
                return vec![T::one(), T::one()];
            }
            let mut v = Vec::with_capacity(ax[j].len() + 2);
            v.push(T::zero());
            v.extend(ax[j].iter().map(|&g| norm_cdf(g / scales[j])));
            v.push(T::one());
            v
        })
        .collect();
    let mut rows = Vec::with_capacity(sample.n());
    positions(&ax, sample, 1, &mut rows);
    let n = T::from_usize_lossy(sample.n());
    let best = scan_cells(c, rows, |k, cum| {
        let f = T::from_i64(cum).expect("count fits") / n;
        let lower = phi[0][k[0]] * phi[1][k[1]] * phi[2][k[2]];
        let upper = phi[0][k[0] + 1] * phi[1][k[1] + 1] * phi[2][k[2] + 1];
        (f - lower).max(upper - f)
    });
    Ok(DistanceEstimate {
        class: DistanceClass::KolmogorovRays,
        value: best.value.max(T::zero()).min(T::one()),
        ci: (d == 1).then(|| dkw_band(sample.n())),
        exact: true,
        n: sample.n(),
        d,
        t: None,
    })
}

/// [`dk_product_gaussian`] for a Gaussian given by its covariance matrix,
/// which must be diagonal.
pub fn dk_gaussian_cov<T: Real>(sample: &SampleBatch<T>, cov: &Matrix<T>) -> Result<DistanceEstimate<T>> {
    if !cov.is_diagonal() {
        return Err(Error::NonDiagonalUnsupported);
    }
    let scales: Vec<T> = cov.diag().into_iter().map(|v| v.sqrt()).collect();
    dk_product_gaussian(sample, &scales)
}

/// Lower bound for the ray distance to `N(0, diag(scales^2))` from randomly
/// chosen corners of the coordinate grid; never exact.
pub fn dk_product_gaussian_search<T: Real>(
    sample: &SampleBatch<T>,
    scales: &[T],
    candidates: usize,
    seed: u64,
) -> Result<DistanceEstimate<T>> {
    check_scales(sample, scales)?;
    let d = sample.dim;
    let ax = axes(d, &[sample]);
    let n = T::from_usize_lossy(sample.n());
    let value = search_corners(&ax, candidates, seed, |x| {
        let (mut closed, mut open) = (0usize, 0usize);
        for r in sample.rows() {
            closed += r.iter().zip(x).all(|(v, c)| v <= c) as usize;
            open += r.iter().zip(x).all(|(v, c)| v < c) as usize;
        }
        let g = x.iter().zip(scales).fold(T::one(), |acc, (&c, &s)| acc * norm_cdf(c / s));
        (T::from_usize_lossy(closed) / n - g).max(g - T::from_usize_lossy(open) / n)
    });
    Ok(DistanceEstimate {
        class: DistanceClass::KolmogorovRays,
        value: value.max(T::zero()).min(T::one()),
        ci: None,
        exact: false,
        n: sample.n(),
        d,
        t: None,
    })
}

/// Kolmogorov distance between two empirical laws in `R^d`.
///
/// Exact for `d <= 2`, and for `d = 3` when the pooled size is at most
/// [`THREE_DIM_POOLED_LIMIT`]; otherwise a stochastic corner search if
/// `opts.allow_approximate`, else [`Error::DimensionTooLarge`].
pub fn dk_two_sample<T: Real>(a: &SampleBatch<T>, b: &SampleBatch<T>, opts: &TwoSampleOptions) -> Result<DistanceEstimate<T>> {
    check_batch(a)?;
    check_batch(b)?;
    if a.dim != b.dim {
        return Err(Error::invalid(format!("dimension mismatch: {} vs {}", a.dim, b.dim)));
    }
    let d = a.dim;
    let (n, m) = (a.n(), b.n());
    let ax = axes(d, &[a, b]);
    let c = cell_counts(&ax);
    let exact_ok = (d <= 2 || (d == MAX_EXACT_DIM && n + m <= THREE_DIM_POOLED_LIMIT)) && total_cells(&c) <= CORNER_WORK_LIMIT;
    let base = DistanceEstimate {
        class: DistanceClass::TwoSampleRays,
        value: T::zero(),
        ci: (d == 1).then(|| T::lit(1.36) * (T::from_usize_lossy(n + m) / (T::from_usize_lossy(n) * T::from_usize_lossy(m))).sqrt()),
        exact: exact_ok,
        n,
        d,
        t: None,
    };
    if exact_ok {
        // Integer weights keep a == b exactly zero and the statistic symmetric.
        let mut rows = Vec::with_capacity(n + m);
        positions(&ax, a, m as i64, &mut rows);
        positions(&ax, b, -(n as i64), &mut rows);
        let denom = T::from_usize_lossy(n) * T::from_usize_lossy(m);
        let best = scan_cells(c, rows, |_, cum| T::from_i64(cum.abs()).expect("count fits") / denom);
        return Ok(DistanceEstimate { value: best.value.min(T::one()), ..base });
    }
    if !opts.allow_approximate {
        return Err(Error::DimensionTooLarge {
            dim: d,
            limit: format!("exact two-sample path needs d <= 2 or d = 3 with n + m <= {THREE_DIM_POOLED_LIMIT}"),
        });
    }
    let (nf, mf) = (T::from_usize_lossy(n), T::from_usize_lossy(m));
    let count = |batch: &SampleBatch<T>, x: &[T]| -> (usize, usize) {
        let (mut closed, mut open) = (0usize, 0usize);
        for r in batch.rows() {
            closed += r.iter().zip(x).all(|(v, c)| v <= c) as usize;
            open += r.iter().zip(x).all(|(v, c)| v < c) as usize;
        }
        (closed, open)
    };
    let value = search_corners(&ax, opts.candidates, opts.seed, |x| {
        let (ac, ao) = count(a, x);
        let (bc, bo) = count(b, x);
        let closed = (T::from_usize_lossy(ac) / nf - T::from_usize_lossy(bc) / mf).abs();
        let open = (T::from_usize_lossy(ao) / nf - T::from_usize_lossy(bo) / mf).abs();
        closed.max(open)
    });
    Ok(DistanceEstimate { value: value.min(T::one()), ..base })
}

/// Maximum of `eval` over `candidates` corners drawn uniformly from the grid.
fn search_corners<T, F>(ax: &[Vec<T>], candidates: usize, seed: u64, eval: F) -> T
where
    T: Real,
    F: Fn(&[T]) -> T + Sync,
{
    let stream = RngStream::new(seed, tag::CORNER_SEARCH, 0);
    let blocks = candidates.div_ceil(BLOCK_ROWS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            use rand::Rng;
            let mut rng = stream.block(b as u64);
            let rows = BLOCK_ROWS.min(candidates - b * BLOCK_ROWS);
            let mut x = vec![T::zero(); ax.len()];
            let mut best = T::zero();
            for _ in 0..rows {
                for (xj, a) in x.iter_mut().zip(ax) {
                    *xj = a[rng.random_range(0..a.len())];
                }
                best = best.max(eval(&x));
            }
            best
        })
        .reduce(T::zero, |p, q| p.max(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distances::{ks_1d_one_sample, sorted_copy};

    fn normal_batch(seed: u64, n: usize, d: usize) -> SampleBatch<f64> {
        let mut rng = RngStream::new(seed, tag::REFERENCE, 0).block(0);
        let v = (0..n * d).map(|_| f64::sample_normal(&mut rng)).collect();
        SampleBatch::from_rows(1.0, d, v, seed).unwrap()
    }

    #[test]
    fn single_point_two_dims() {
        let s = SampleBatch::from_rows(1.0, 2, vec![0.0, 0.0], 0).unwrap();
        assert_eq!(dk_product_gaussian(&s, &[1.0, 1.0]).unwrap().value, 0.75);
    }

    #[test]
    fn one_dim_matches_ks() {
        let s = normal_batch(3, 50, 1);
        let a = dk_product_gaussian(&s, &[1.3]).unwrap().value;
        let b = ks_1d_one_sample(&sorted_copy(&s.values), |x| norm_cdf(x / 1.3)).unwrap().value;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn two_dim_matches_dense_grid() {
        let s = normal_batch(5, 5, 2);
        let v = dk_product_gaussian(&s, &[1.0, 2.0]).unwrap().value;
        let f = |x: f64, y: f64| -> f64 {
            let c = s.rows().filter(|r| r[0] <= x && r[1] <= y).count() as f64 / 5.0;
            (c - norm_cdf(x) * norm_cdf(y / 2.0)).abs()
        };
        let mut xs: Vec<f64> = (0..2000).map(|i| -8.0 + 16.0 * i as f64 / 1999.0).collect();
        let mut ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        for r in s.rows() {
            xs.extend([r[0], r[0] - 1e-13]);
            ys.extend([r[1], r[1] - 1e-13]);
        }
        let mut best: f64 = 0.0;
        for &x in &xs {
            for &y in &ys {
                best = best.max(f(x, y));
            }
        }
        assert!((v - best).abs() < 1e-10, "{v} vs {best}");
    }

    #[test]
    fn rejects_large_dims_and_full_covariance() {
        let s = normal_batch(1, 4, 4);
        assert!(matches!(dk_product_gaussian(&s, &[1.0; 4]), Err(Error::DimensionTooLarge { .. })));
        let s2 = normal_batch(1, 4, 2);
        let cov = Matrix::from_row_major(2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(matches!(dk_gaussian_cov(&s2, &cov), Err(Error::NonDiagonalUnsupported)));
        let diag = Matrix::diagonal(&[4.0, 1.0]);
        assert_eq!(dk_gaussian_cov(&s2, &diag).unwrap().value, dk_product_gaussian(&s2, &[2.0, 1.0]).unwrap().value);
    }

    #[test]
    fn two_sample_basic_cases() {
        let a = normal_batch(7, 30, 2);
        let o = TwoSampleOptions::default();
        assert_eq!(dk_two_sample(&a, &a, &o).unwrap().value, 0.0);
        let lo = SampleBatch::from_rows(1.0, 1, vec![0.0, 1.0, 2.0], 0).unwrap();
        let hi = SampleBatch::from_rows(1.0, 1, vec![5.0, 6.0], 0).unwrap();
        assert_eq!(dk_two_sample(&lo, &hi, &o).unwrap().value, 1.0);
        let b = normal_batch(8, 40, 2);
        assert_eq!(dk_two_sample(&a, &b, &o).unwrap().value, dk_two_sample(&b, &a, &o).unwrap().value);
    }

    #[test]
    fn two_sample_matches_brute_force() {
        let a = normal_batch(9, 50, 2);
        let b = normal_batch(10, 50, 2);
        let v = dk_two_sample(&a, &b, &TwoSampleOptions::default()).unwrap().value;
        let ecdf = |s: &SampleBatch<f64>, x: f64, y: f64| s.rows().filter(|r| r[0] <= x && r[1] <= y).count() as f64 / 50.0;
        let mut xs: Vec<f64> = a.column(0).into_iter().chain(b.column(0)).collect();
        let mut ys: Vec<f64> = a.column(1).into_iter().chain(b.column(1)).collect();
        xs.push(f64::INFINITY);
        ys.push(f64::INFINITY);
        let mut best: f64 = 0.0;
        for &x in &xs {
            for &y in &ys {
                best = best.max((ecdf(&a, x, y) - ecdf(&b, x, y)).abs());
            }
        }
        assert!((v - best).abs() < 1e-12);
    }

    #[test]
    fn three_dim_guard_and_search() {
        let a = normal_batch(11, 1500, 3);
        let b = normal_batch(12, 1500, 3);
        assert!(matches!(
            dk_two_sample(&a, &b, &TwoSampleOptions::default()),
            Err(Error::DimensionTooLarge { .. })
        ));
        let o = TwoSampleOptions { allow_approximate: true, candidates: 512, seed: 3 };
        let e = dk_two_sample(&a, &b, &o).unwrap();
        assert!(!e.exact && e.value > 0.0 && e.value < 0.2);
        let small_a = normal_batch(13, 40, 3);
        let small_b = normal_batch(14, 40, 3);
        let exact = dk_two_sample(&small_a, &small_b, &TwoSampleOptions::default()).unwrap();
        let approx = dk_two_sample(&small_a, &small_b, &TwoSampleOptions { allow_approximate: true, ..o });
        assert!(exact.exact && approx.unwrap().value <= exact.value);
    }

    #[test]
    fn search_is_a_lower_bound() {
        let s = normal_batch(15, 30, 2);
        let exact = dk_product_gaussian(&s, &[1.0, 1.0]).unwrap().value;
        let approx = dk_product_gaussian_search(&s, &[1.0, 1.0], 2000, 1).unwrap();
        assert!(!approx.exact && approx.value <= exact + 1e-15 && approx.value > 0.5 * exact);
    }
}
