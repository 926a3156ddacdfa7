use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, Matrix};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::scalar::Real;

use super::{LevyMeasure, LevyTriplet, MomentValue, RadialFamily};

/// Eigenvalue threshold used when searching for a truncation constant.
pub const KAPPA_TOL: f64 = 1e-8;
/// The kappa grid is `e^{k/4}` for `k = 0..=KAPPA_GRID_STEPS`.
pub const KAPPA_GRID_STEPS: u32 = 80;

/// Relative rank tolerance on `Sigma(t)` for the scaling matrix.
const RANK_TOL: f64 = 1e-12;

/// Centring `A(t)` and scaling `B(t) = sqrt(t) Delta(t)` at a fixed time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScalingPair<T> {
    pub t: T,
    pub kappa: T,
    pub centering: Vec<T>,
    /// `Delta(t)`, the PSD square root of `Sigma(t)`.
    pub delta: Matrix<T>,
    pub scaling: Matrix<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentClass {
    InfiniteVariance,
    FiniteVariance,
    TwoPlusLog,
}

/// `int |v|^2 nu(dv)` computed directly and through `int_0^inf nu_bar(sqrt r) dr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SecondMomentIdentity<T> {
    pub direct: MomentValue<T>,
    pub via_tail: MomentValue<T>,
    pub agree: bool,
}

fn check_time_kappa<T: Real>(t: T, kappa: T) -> Result<()> {
    if !(t >= T::one() && t.is_finite()) {
        return Err(Error::invalid(format!("time must be finite and >= 1, got {t}")));
    }
    if !(kappa >= T::one() && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be finite and >= 1, got {kappa}")));
    }
    Ok(())
}

/// `Sigma(t) = Sigma + int_{B_0(kappa sqrt t)} v v^T nu(dv)`.
pub fn truncated_cov<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T) -> Result<Matrix<T>> {
    check_time_kappa(t, kappa)?;
    let jumps = triplet.measure().truncated_second_moment_matrix(kappa * t.sqrt())?;
    Ok(triplet.gaussian_cov() + &jumps)
}

/// `sigma^2 = Sigma + int v v^T nu(dv)`, the covariance of `X_1`.
pub fn full_covariance<T: Real>(triplet: &LevyTriplet<T>) -> Result<Matrix<T>> {
    let jumps = triplet.measure().second_moment_matrix()?;
    Ok(triplet.gaussian_cov() + &jumps)
}

/// `A(t) = t E[X_1]`, `B(t) = sqrt(t) psd_sqrt(Sigma(t))`.
pub fn scaling_pair<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T) -> Result<ScalingPair<T>> {
    let cov = truncated_cov(triplet, t, kappa)?;
    let eig = cov.symmetric_eigen();
    let tol = T::lit(RANK_TOL) * eig.max().max(T::zero());
    if eig.min() <= tol {
        return Err(Error::DegenerateScaling {
            min_eigenvalue: eig.min().to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    let delta = psd_sqrt(&cov)?;
    let scaling = delta.scale(t.sqrt());
    let centering = triplet.mean()?.into_iter().map(|m| m * t).collect();
    Ok(ScalingPair {
        t,
        kappa,
        centering,
        delta,
        scaling,
    })
}

/// Smallest `kappa = e^{k/4}` with `lambda_min(Sigma(1)) > tol`.
pub fn choose_kappa<T: Real>(triplet: &LevyTriplet<T>, tol: T) -> Result<T> {
    for k in 0..=KAPPA_GRID_STEPS {
        let kappa = T::lit(k as f64 * 0.25).exp();
        let cov = truncated_cov(triplet, T::one(), kappa)?;
        if cov.symmetric_eigen().min() > tol {
            return Ok(kappa);
        }
    }
    Err(Error::NoValidKappa {
        kappa_max: (KAPPA_GRID_STEPS as f64 * 0.25).exp(),
    })
}

/// `mu_t = -t int_{|v| > kappa sqrt t} v nu(dv)`.
pub fn centering_drift<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T) -> Result<Vec<T>> {
    check_time_kappa(t, kappa)?;
    let tail = triplet.measure().tail_first_moment(kappa * t.sqrt())?;
    Ok(tail.into_iter().map(|m| -t * m).collect())
}

/// Analytic moment class of a measure.
pub fn moment_class<T: Real>(measure: &LevyMeasure<T>) -> MomentClass {
    match measure {
        LevyMeasure::Radial(m) => match *m.family() {
            RadialFamily::PowerLog { beta, .. } => {
                if beta <= T::one() {
                    MomentClass::InfiniteVariance
                } else if beta <= T::lit(2.0) {
                    MomentClass::FiniteVariance
                } else {
                    MomentClass::TwoPlusLog
                }
            }
            RadialFamily::BoundedShell { .. } | RadialFamily::Zero => MomentClass::TwoPlusLog,
        },
        LevyMeasure::Atomic(_) => MomentClass::TwoPlusLog,
    }
}

/// Berry-Esseen term `4 c ||Delta(1)^{-1}||^3 t^{-1/2} M_3(kappa sqrt t)`.
pub fn berry_esseen_bound<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T, c: T) -> Result<T> {
    if !(c > T::zero()) {
        return Err(Error::invalid("dimension constant must be positive"));
    }
    check_time_kappa(t, kappa)?;
    let m3 = triplet.measure().truncated_moment(3, kappa * t.sqrt())?;
    // ||Delta(1)^{-1}|| = lambda_min(Sigma(1))^{-1/2}
    let base = scaling_pair(triplet, T::one(), kappa)?;
    let lmin = base.delta.symmetric_eigen().min();
    let inv_norm = lmin.recip();
    Ok(T::lit(4.0) * c * inv_norm.powi(3) * m3 / t.sqrt())
}

const IDENTITY_OUTER_TOL: f64 = 1e-9;

/// Second moment two ways: direct radial quadrature, and the layer-cake
/// identity `int |v|^2 nu(dv) = int_0^inf nu_bar(sqrt r) dr`.
pub fn total_second_moment<T: Real>(measure: &LevyMeasure<T>) -> Result<SecondMomentIdentity<T>> {
    let direct = measure.moment(2)?;
    let via_tail = layer_cake_second_moment(measure)?;
    let agree = match (direct, via_tail) {
        (MomentValue::Infinite, MomentValue::Infinite) => true,
        (MomentValue::Finite(a), MomentValue::Finite(b)) => {
            let scale = a.abs().max(b.abs());
            scale == T::zero() || (a - b).abs() <= T::lit(1e-6) * scale
        }
        _ => false,
    };
    Ok(SecondMomentIdentity { direct, via_tail, agree })
}

fn layer_cake_second_moment<T: Real>(measure: &LevyMeasure<T>) -> Result<MomentValue<T>> {
    let opts = QuadOptions::with_rel_tol(IDENTITY_OUTER_TOL);
    let m = match measure {
        LevyMeasure::Atomic(a) => {
            // nu_bar(sqrt r) is a step function with jumps at |v_i|^2.
            let mut radii: Vec<T> = a.atoms().iter().map(|x| x.point.iter().fold(T::zero(), |s, &c| s + c * c)).collect();
            radii.sort_by(|x, y| x.partial_cmp(y).expect("finite radii"));
            radii.dedup();
            let mut acc = T::zero();
            let mut prev = T::zero();
            for r2 in radii {
                acc = acc + (r2 - prev) * a.tail_mass(prev.sqrt());
                prev = r2;
            }
            return Ok(MomentValue::Finite(acc));
        }
        LevyMeasure::Radial(m) => m,
    };
    match *m.family() {
        RadialFamily::Zero => Ok(MomentValue::Finite(T::zero())),
        RadialFamily::BoundedShell { inner, outer } => {
            let head = inner * inner * m.tail_mass(inner)?;
            let body = integrate(|r: T| m.tail_mass(r.sqrt()).unwrap_or(T::nan()), inner * inner, outer * outer, opts)?.value;
            Ok(MomentValue::Finite(head + body))
        }
        RadialFamily::PowerLog { sigma_shell, beta } => {
            if beta <= T::one() {
                return Ok(MomentValue::Infinite);
            }
            // nu_bar is constant on [0, sigma^2]; beyond, r = e^w with
            // w = w0 e^y turns the w^{-beta} decay into e^{(1 - beta) y}.
            let head = sigma_shell * sigma_shell * m.tail_mass(sigma_shell)?;
            let w0 = T::lit(2.0) * sigma_shell.ln();
            let body = integrate_to_infinity(
                |y: T| {
                    let w = w0 * y.exp();
                    if w.is_infinite() {
                        return T::zero();
                    }
                    w * m.scaled_tail_mass_at_log_radius(w * T::lit(0.5)).unwrap_or(T::nan())
                },
                T::zero(),
                opts,
            )?
            .value;
            Ok(MomentValue::Finite(head + body))
        }
    }
}
