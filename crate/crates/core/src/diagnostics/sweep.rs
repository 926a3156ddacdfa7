use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{
    ball_class_distance, bootstrap_half_width, default_directions, dk_product_gaussian, dk_product_gaussian_search, dk_two_sample,
    dkw_band, halfspace_distance, sorted_copy, w1_1d, ChiRadius, DistanceClass, DistanceEstimate, NormalLaw, TwoSampleOptions,
    BOOTSTRAP_RESAMPLES,
};
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, spd_inverse, Matrix};
use crate::measures::{choose_kappa, full_covariance, scaling_pair, LevyTriplet, KAPPA_TOL};
use crate::rng::{tag, RngStream};
use crate::scalar::Real;
use crate::simulate::{cutoff_for_budget, SampleBatch, Simulator};

use super::{partial_integral, PartialIntegral};

/// Expected jumps per replicate before small jumps are replaced by a Gaussian.
pub const DEFAULT_JUMP_BUDGET: f64 = 256.0;
pub const MIN_MC_SIZE: usize = 1000;
/// Random corners for ray distances beyond the exact-path guards.
pub const SEARCH_CANDIDATES: usize = 4096;
const MAX_GRID_RATIO: f64 = 10.0;
const GRID_RATIO_TOL: f64 = 1e-9;

/// How `X_t` is centred and scaled before comparison with `N(0, I)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalingMode {
    /// `A(t) = t E[X_1]`, `B(t) = sqrt(t) Delta(t)`.
    AdaptiveBc,
    /// `A(t) = t E[X_1]`, `B(t) = sqrt(t) sigma` with `sigma^2 = Cov(X_1)`.
    FixedSqrtSigma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepConfig<T> {
    pub mode: ScalingMode,
    pub grid: Vec<T>,
    pub mc_size: usize,
    pub classes: Vec<DistanceClass>,
    /// `None` selects kappa with [`choose_kappa`].
    pub kappa: Option<T>,
    pub seed: u64,
    /// Expected jumps per replicate; `None` simulates every jump.
    pub jump_budget: Option<T>,
}

impl<T: Real> SweepConfig<T> {
    pub fn new(mode: ScalingMode, grid: Vec<T>, mc_size: usize, seed: u64) -> Self {
        Self {
            mode,
            grid,
            mc_size,
            classes: vec![DistanceClass::KolmogorovRays],
            kappa: None,
            seed,
            jump_budget: Some(T::lit(DEFAULT_JUMP_BUDGET)),
        }
    }
}

/// `count` points `start * ratio^k`.
pub fn geometric_grid<T: Real>(start: T, ratio: T, count: usize) -> Vec<T> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// `10^2 .. 10^6` with ratio `10^{1/4}`.
pub fn default_grid<T: Real>() -> Vec<T> {
    (0..17).map(|k| T::lit(10f64.powf(2.0 + k as f64 / 4.0))).collect()
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if grid.iter().any(|t| !(*t >= T::one() && t.is_finite())) {
        return Err(Error::invalid("grid times must be finite and >= 1"));
    }
    if grid.len() >= 2 {
        let rho = grid[1] / grid[0];
        if !(rho > T::one() && rho <= T::lit(MAX_GRID_RATIO * (1.0 + GRID_RATIO_TOL))) {
            return Err(Error::invalid(format!("grid ratio {rho} outside (1, {MAX_GRID_RATIO}]")));
        }
        for w in grid.windows(2) {
            if ((w[1] / w[0]) / rho - T::one()).abs() > T::lit(GRID_RATIO_TOL) {
                return Err(Error::invalid("time grid is not geometric"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepRow<T> {
    pub t: T,
    /// Root seed and grid index of the random stream behind this row.
    pub seed: u64,
    pub grid_index: usize,
    pub mc_size: usize,
    /// Small-jump cutoff (0 when every jump is simulated).
    pub cutoff: T,
    pub approximate: bool,
    pub estimates: Vec<DistanceEstimate<T>>,
}

impl<T: Real> SweepRow<T> {
    pub fn estimate(&self, class: DistanceClass) -> Option<&DistanceEstimate<T>> {
        self.estimates.iter().find(|e| e.class == class)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepReport<T> {
    pub fingerprint: u64,
    pub mode: ScalingMode,
    pub kappa: T,
    pub grid: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    /// One series per requested class, in request order.
    pub partial_integrals: Vec<PartialIntegral<T>>,
}

impl<T: Real> SweepReport<T> {
    /// `(t, value, ci)` for one class.
    pub fn series(&self, class: DistanceClass) -> Vec<(T, T, T)> {
        self.rows
            .iter()
            .filter_map(|r| r.estimate(class).map(|e| (r.t, e.value, e.ci.unwrap_or(T::zero()))))
            .collect()
    }

    pub fn partial(&self, class: DistanceClass) -> Option<&PartialIntegral<T>> {
        self.partial_integrals.iter().find(|p| p.class == class)
    }

    /// Per-t rows as CSV: `t,grid_index,seed,mc_size,cutoff,approximate,class,value,ci,exact`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,grid_index,seed,mc_size,cutoff,approximate,class,value,ci,exact\n");
        for r in &self.rows {
            for e in &r.estimates {
                s.push_str(&format!(
                    "{:.16e},{},{},{},{:.16e},{},{:?},{:.16e},{},{}\n",
                    r.t,
                    r.grid_index,
                    r.seed,
                    r.mc_size,
                    r.cutoff,
                    r.approximate,
                    e.class,
                    e.value,
                    e.ci.map(|c| format!("{c:.16e}")).unwrap_or_default(),
                    e.exact
                ));
            }
        }
        s
    }
}

/// Affine map `x -> B^{-1}(x - A)` for the requested mode.
fn normaliser<T: Real>(triplet: &LevyTriplet<T>, mode: ScalingMode, t: T, kappa: T, sigma_root: Option<&Matrix<T>>) -> Result<(Vec<T>, Matrix<T>)> {
    match mode {
        ScalingMode::AdaptiveBc => {
            let pair = scaling_pair(triplet, t, kappa)?;
            let inv = spd_inverse(&pair.scaling, T::zero())?;
            Ok((pair.centering, inv))
        }
        ScalingMode::FixedSqrtSigma => {
            let root = sigma_root.expect("fixed mode precomputes sigma");
            let b = root.scale(t.sqrt());
            let inv = spd_inverse(&b, T::zero())?;
            let shift = triplet.mean()?.into_iter().map(|m| m * t).collect();
            Ok((shift, inv))
        }
    }
}

/// Distances of normalised `X_t` to `N(0, I)` over a geometric time grid.
pub fn sweep<T: Real>(triplet: &LevyTriplet<T>, config: &SweepConfig<T>) -> Result<SweepReport<T>> {
    check_grid(&config.grid)?;
    if config.mc_size < MIN_MC_SIZE {
        return Err(Error::invalid(format!("mc_size must be at least {MIN_MC_SIZE}")));
    }
    if config.classes.is_empty() {
        return Err(Error::invalid("no distance classes requested"));
    }
    let kappa = match config.kappa {
        Some(k) => k,
        None => choose_kappa(triplet, T::lit(KAPPA_TOL))?,
    };
    let sigma_root = match config.mode {
        ScalingMode::FixedSqrtSigma => {
            let root = psd_sqrt(&full_covariance(triplet)?)?;
            let eig = root.symmetric_eigen();
            if eig.min() <= T::zero() {
                return Err(Error::DegenerateScaling {
                    min_eigenvalue: eig.min().to_f64_lossy(),
                    tolerance: 0.0,
                });
            }
            Some(root)
        }
        ScalingMode::AdaptiveBc => None,
    };
    let sim = Simulator::new(triplet)?;
    let rows = config
        .grid
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let (shift, inv) = normaliser(triplet, config.mode, t, kappa, sigma_root.as_ref())?;
            let cutoff = match config.jump_budget {
                Some(b) => cutoff_for_budget(triplet, t, b)?,
                None => T::zero(),
            };
            let stream = RngStream::new(config.seed, tag::SWEEP, k as u64);
            let batch = sim.sample_with_cutoff(t, config.mc_size, cutoff, stream)?;
            let z = batch.normalized(&shift, &inv);
            let estimates = config
                .classes
                .iter()
                .map(|&c| standard_gaussian_distance(&z, c, config.seed, k as u64).map(|e| e.with_t(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                t,
                seed: config.seed,
                grid_index: k,
                mc_size: config.mc_size,
                cutoff,
                approximate: batch.approximate,
                estimates,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport {
        fingerprint: triplet.fingerprint(),
        mode: config.mode,
        kappa,
        grid: config.grid.clone(),
        rows,
        partial_integrals: Vec::new(),
    };
    report.partial_integrals = config.classes.iter().map(|&c| partial_integral(&report, c)).collect::<Result<_>>()?;
    Ok(report)
}

/// Distance of a normalised batch to the standard Gaussian in one class.
///
/// Ray distances beyond the exact guards fall back to a corner search, and
/// every estimate without its own band gets the DKW radius as advisory CI,
/// except W1 which is bootstrapped.
pub fn standard_gaussian_distance<T: Real>(z: &SampleBatch<T>, class: DistanceClass, seed: u64, index: u64) -> Result<DistanceEstimate<T>> {
    let d = z.dim;
    let n = z.n();
    let mut e = match class {
        DistanceClass::KolmogorovRays => match dk_product_gaussian(z, &vec![T::one(); d]) {
            Err(Error::DimensionTooLarge { .. }) => {
                dk_product_gaussian_search(z, &vec![T::one(); d], SEARCH_CANDIDATES, seed ^ index.rotate_left(32))?
            }
            other => other?,
        },
        DistanceClass::HalfSpaces => halfspace_distance(z, &Matrix::identity(d), &default_directions(d, seed))?,
        DistanceClass::CenteredBalls => ball_class_distance(z, &ChiRadius::new(d, T::one())?, &vec![T::zero(); d])?,
        DistanceClass::TwoSampleRays => {
            let stream = RngStream::new(seed, tag::REFERENCE, index);
            let reference = gaussian_batch(d, n, stream)?;
            let opts = TwoSampleOptions {
                allow_approximate: true,
                candidates: SEARCH_CANDIDATES,
                seed: stream.child(1).root,
            };
            dk_two_sample(z, &reference, &opts)?
        }
        DistanceClass::Wasserstein1 => {
            let w1 = |b: &SampleBatch<T>| -> Result<T> {
                (0..d).try_fold(T::zero(), |acc, j| Ok(acc.max(w1_1d(&sorted_copy(&b.column(j)), &NormalLaw::standard())?.value)))
            };
            let value = w1(z)?;
            let ci = bootstrap_half_width(z, BOOTSTRAP_RESAMPLES, RngStream::new(seed, tag::BOOTSTRAP, index), w1)?;
            DistanceEstimate {
                class,
                value,
                ci: Some(ci),
                exact: true,
                n,
                d,
                t: None,
            }
        }
    };
    if e.ci.is_none() {
        e.ci = Some(dkw_band(n));
    }
    Ok(e)
}

/// `n` rows of `N(0, I_d)`.
pub fn gaussian_batch<T: Real>(d: usize, n: usize, stream: RngStream) -> Result<SampleBatch<T>> {
    Simulator::new(&LevyTriplet::gaussian(Matrix::identity(d))?)?.sample(T::one(), n, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::RadialLevyMeasure;
    use std::f64::consts::E;

    #[test]
    fn grid_validation() {
        assert!(check_grid::<f64>(&[]).is_err());
        assert!(check_grid(&[10.0, 20.0, 41.0]).is_err());
        assert!(check_grid(&[10.0, 200.0]).is_err());
        assert!(check_grid(&default_grid::<f64>()).is_ok());
        assert_eq!(default_grid::<f64>().len(), 17);
    }

    #[test]
    fn gaussian_sweep_is_within_band() {
        let tr = LevyTriplet::<f64>::gaussian(Matrix::identity(1)).unwrap();
        let mut cfg = SweepConfig::new(ScalingMode::AdaptiveBc, geometric_grid(1.0, 10.0, 3), 4000, 7);
        cfg.classes = vec![DistanceClass::KolmogorovRays, DistanceClass::CenteredBalls, DistanceClass::Wasserstein1];
        let r = sweep(&tr, &cfg).unwrap();
        for row in &r.rows {
            for e in &row.estimates[..2] {
                assert!(e.value <= e.ci.unwrap(), "{e:?}");
            }
        }
        let p = r.partial(DistanceClass::KolmogorovRays).unwrap();
        assert!(p.value.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn fixed_mode_needs_finite_variance() {
        let m = RadialLevyMeasure::power_log(E, 1.0, 1).unwrap();
        let tr = LevyTriplet::centered(Matrix::zeros(1), m).unwrap();
        let cfg = SweepConfig::new(ScalingMode::FixedSqrtSigma, vec![100.0], 1000, 1);
        assert!(matches!(sweep(&tr, &cfg), Err(Error::IndeterminateMoment(_))));
    }

    #[test]
    fn sweep_is_deterministic() {
        let m = RadialLevyMeasure::power_log(E, 2.0, 2).unwrap();
        let tr = LevyTriplet::centered(Matrix::zeros(2), m).unwrap();
        let mut cfg = SweepConfig::new(ScalingMode::AdaptiveBc, geometric_grid(100.0, 10.0, 2), 1000, 3);
        cfg.classes = vec![DistanceClass::KolmogorovRays, DistanceClass::HalfSpaces];
        let a = sweep(&tr, &cfg).unwrap();
        let b = sweep(&tr, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
