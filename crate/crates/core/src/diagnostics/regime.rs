use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceClass;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::measures::{moment_class, LevyTriplet, MomentClass, RadialLevyMeasure};
use crate::scalar::Real;

use super::{compare_models, sweep, RateFit, RateModel, ScalingMode, SweepConfig, Verdict};

/// Centred pure-jump triplet with `PowerLog(e, beta, d)` jumps.
pub fn power_log_triplet<T: Real>(beta: T, d: usize) -> Result<LevyTriplet<T>> {
    let m = RadialLevyMeasure::power_log(T::E(), beta, d)?;
    LevyTriplet::centered(Matrix::zeros(d), m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegimeConfig<T> {
    pub betas: Vec<T>,
    pub d: usize,
    pub grid: Vec<T>,
    pub mc_size: usize,
    pub seed: u64,
    /// `None` selects kappa automatically.
    pub kappa: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegimeRow<T> {
    pub beta: T,
    pub moment_class: MomentClass,
    pub mode: ScalingMode,
    /// `None` when the mode is undefined for this measure.
    pub verdict: Option<Verdict>,
    pub first_decade: Option<T>,
    pub last_decade: Option<T>,
    /// Rate fits on the ray distances, best residual first.
    pub fits: Vec<RateFit<T>>,
    pub note: Option<String>,
}

impl<T: Real> RegimeRow<T> {
    pub fn best_model(&self) -> Option<RateModel> {
        self.fits.first().map(|f| f.model)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegimeReport<T> {
    pub config: RegimeConfig<T>,
    pub bounded_ratio: f64,
    pub growing_ratio: f64,
    pub rows: Vec<RegimeRow<T>>,
}

impl<T: Real> RegimeReport<T> {
    pub fn row(&self, beta: T, mode: ScalingMode) -> Option<&RegimeRow<T>> {
        self.rows.iter().find(|r| r.beta == beta && r.mode == mode)
    }

    /// Fixed-width text table; verdicts are heuristics on the per-decade increments.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6}  {:<17}  {:<15}  {:<12}  {:>12}  {:>12}  {:<10}  {}",
            "beta", "moment_class", "mode", "verdict", "first_dec", "last_dec", "best_fit", "note"
        );
        let num = |v: Option<T>| v.map(|x| format!("{:.6e}", x)).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>6}  {:<17}  {:<15}  {:<12}  {:>12}  {:>12}  {:<10}  {}",
                format!("{}", r.beta),
                format!("{:?}", r.moment_class),
                format!("{:?}", r.mode),
                r.verdict.map(|v| format!("{v:?}")).unwrap_or_else(|| "-".into()),
                num(r.first_decade),
                num(r.last_decade),
                r.best_model().map(|m| format!("{m:?}")).unwrap_or_else(|| "-".into()),
                r.note.as_deref().unwrap_or("")
            );
        }
        s
    }
}

/// Sweeps each `beta` under both scalings and classifies the partial-integral trend.
///
/// The fixed scaling is skipped (with a note) when the variance is infinite.
pub fn regime_report<T: Real>(config: &RegimeConfig<T>) -> Result<RegimeReport<T>> {
    if config.betas.is_empty() {
        return Err(Error::invalid("no beta values given"));
    }
    let class = DistanceClass::KolmogorovRays;
    let mut rows = Vec::new();
    for &beta in &config.betas {
        let triplet = power_log_triplet(beta, config.d)?;
        let mc = moment_class(triplet.measure());
        for mode in [ScalingMode::AdaptiveBc, ScalingMode::FixedSqrtSigma] {
            if mode == ScalingMode::FixedSqrtSigma && mc == MomentClass::InfiniteVariance {
                rows.push(RegimeRow {
                    beta,
                    moment_class: mc,
                    mode,
                    verdict: None,
                    first_decade: None,
                    last_decade: None,
                    fits: Vec::new(),
                    note: Some("infinite variance".into()),
                });
                continue;
            }
            let mut sc = SweepConfig::new(mode, config.grid.clone(), config.mc_size, config.seed);
            sc.kappa = config.kappa;
            let report = sweep(&triplet, &sc)?;
            let partial = report.partial(class).expect("sweep computes requested classes");
            let (fits, note) = match compare_models(&report.series(class)) {
                Ok(f) => (f, None),
                Err(e @ Error::InsufficientSignal { .. }) => (Vec::new(), Some(e.to_string())),
                Err(e) => return Err(e),
            };
            rows.push(RegimeRow {
                beta,
                moment_class: mc,
                mode,
                verdict: Some(partial.verdict()),
                first_decade: partial.decades.first().map(|d| d.increment),
                last_decade: partial.last_decade.map(|d| d.increment),
                fits,
                note,
            });
        }
    }
    Ok(RegimeReport {
        config: config.clone(),
        bounded_ratio: super::BOUNDED_RATIO,
        growing_ratio: super::GROWING_RATIO,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::geometric_grid;

    #[test]
    fn infinite_variance_skips_fixed_mode() {
        let cfg = RegimeConfig {
            betas: vec![1.0],
            d: 1,
            grid: geometric_grid(100.0, 10.0, 3),
            mc_size: 1000,
            seed: 3,
            kappa: None,
        };
        let r = regime_report(&cfg).unwrap();
        assert_eq!(r.rows.len(), 2);
        let fixed = r.row(1.0, ScalingMode::FixedSqrtSigma).unwrap();
        assert!(fixed.verdict.is_none() && fixed.note.is_some());
        assert!(r.row(1.0, ScalingMode::AdaptiveBc).unwrap().verdict.is_some());
        assert!(r.to_table().lines().count() == 3);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RegimeReport<f64>>(&json).unwrap(), r);
    }
}
