use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::scalar::Real;
use crate::special::sphere_area;

use super::MomentValue;

/// Internal quadrature tolerance; tighter than the advertised 1e-9 so that
/// composed quantities (ratios, differences) keep that accuracy.
const RADIAL_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
#[serde(bound = "T: Real")]
pub enum RadialFamily<T> {
    /// Density `1{|v| >= sigma_shell} |v|^{-2-d} (log |v|)^{-beta}`.
    PowerLog { sigma_shell: T, beta: T },
    /// Density `1{inner <= |v| <= outer} |v|^{-2-d}`.
    BoundedShell { inner: T, outer: T },
    Zero,
}

/// Isotropic Levy measure on `R^d` with a radial density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawRadial<T>")]
pub struct RadialLevyMeasure<T> {
    family: RadialFamily<T>,
    dim: usize,
    #[serde(skip)]
    sphere: T,
}

impl<T: Real> RadialLevyMeasure<T> {
    pub fn new(family: RadialFamily<T>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        match family {
            RadialFamily::PowerLog { sigma_shell, beta } => {
                if !(sigma_shell > T::one() && sigma_shell.is_finite()) {
                    return Err(Error::invalid(format!("shell radius must exceed 1, got {sigma_shell}")));
                }
                if !(beta > T::zero() && beta.is_finite()) {
                    return Err(Error::invalid(format!("log exponent must be positive, got {beta}")));
                }
            }
            RadialFamily::BoundedShell { inner, outer } => {
                if !(inner > T::zero() && outer > inner && outer.is_finite()) {
                    return Err(Error::invalid(format!("shell radii must satisfy 0 < inner < outer, got {inner}, {outer}")));
                }
            }
            RadialFamily::Zero => {}
        }
        Ok(Self {
            family,
            dim,
            sphere: sphere_area(dim),
        })
    }

    pub fn power_log(sigma_shell: T, beta: T, dim: usize) -> Result<Self> {
        Self::new(RadialFamily::PowerLog { sigma_shell, beta }, dim)
    }

    pub fn bounded_shell(inner: T, outer: T, dim: usize) -> Result<Self> {
        Self::new(RadialFamily::BoundedShell { inner, outer }, dim)
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(RadialFamily::Zero, dim).expect("zero measure is always valid")
    }

    pub fn family(&self) -> &RadialFamily<T> {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Surface area of the unit sphere `S^{d-1}` (the constant `C_d`).
    pub fn sphere_area(&self) -> T {
        self.sphere
    }

    /// `int_{S^{d-1}} theta_1^2 d theta = C_d / d`, the coefficient of the
    /// identity in the truncated covariance.
    pub fn angular_coefficient(&self) -> T {
        self.sphere / T::from_usize_lossy(self.dim)
    }

    /// Smallest radius in the support, `None` for the zero measure.
    pub fn inner_radius(&self) -> Option<T> {
        match self.family {
            RadialFamily::PowerLog { sigma_shell, .. } => Some(sigma_shell),
            RadialFamily::BoundedShell { inner, .. } => Some(inner),
            RadialFamily::Zero => None,
        }
    }

    /// Radial density `rho` with `nu(A) = int_A rho(|v|) dv` (per unit volume).
    pub fn radial_density(&self, r: T) -> T {
        let d = self.dim as i32;
        match self.family {
            RadialFamily::PowerLog { sigma_shell, beta } if r >= sigma_shell => r.powi(-2 - d) * r.ln().powf(-beta),
            RadialFamily::BoundedShell { inner, outer } if r >= inner && r <= outer => r.powi(-2 - d),
            _ => T::zero(),
        }
    }

    /// `nu(R^d \ B_0(r))`.
    pub fn tail_mass(&self, r: T) -> Result<T> {
        if r < T::zero() {
            return Err(Error::invalid("radius must be non-negative"));
        }
        match self.family {
            RadialFamily::Zero => Ok(T::zero()),
            RadialFamily::BoundedShell { inner, outer } => {
                if r >= outer {
                    return Ok(T::zero());
                }
                let lo = r.max(inner);
                Ok(self.sphere * T::lit(0.5) * (lo.powi(-2) - outer.powi(-2)))
            }
            RadialFamily::PowerLog { sigma_shell, beta } => {
                if r.is_infinite() {
                    return Ok(T::zero());
                }
                let u0 = r.max(sigma_shell).ln();
                match log_tail_integral(-2, beta, u0)? {
                    MomentValue::Finite(v) => Ok(self.sphere * v),
                    MomentValue::Infinite => unreachable!("exponential tail"),
                }
            }
        }
    }

    /// `r^2 nu_bar(r)` at `r = e^u`, evaluated without forming `e^{2u}`.
    pub fn scaled_tail_mass_at_log_radius(&self, u: T) -> Result<T> {
        match self.family {
            RadialFamily::PowerLog { sigma_shell, beta } => {
                let u0 = u.max(sigma_shell.ln());
                let opts = QuadOptions::with_rel_tol(RADIAL_TOL);
                let v = integrate_to_infinity(|w: T| (T::lit(-2.0) * w).exp() * (u0 + w).powf(-beta), T::zero(), opts)?.value;
                Ok(self.sphere * v * (T::lit(2.0) * (u - u0)).exp())
            }
            _ => {
                let r = u.exp();
                Ok(r * r * self.tail_mass(r)?)
            }
        }
    }

    /// Total mass `nu(R^d \ {0})`.
    pub fn total_mass(&self) -> Result<T> {
        self.tail_mass(T::zero())
    }

    /// `M_p(r) = int_{B_0(r)} |v|^p nu(dv)` for `p` in 1..=3.
    pub fn truncated_moment(&self, p: u32, r: T) -> Result<T> {
        check_order(p)?;
        if r < T::zero() {
            return Err(Error::invalid("radius must be non-negative"));
        }
        let a = p as i32 - 2;
        match self.family {
            RadialFamily::Zero => Ok(T::zero()),
            RadialFamily::BoundedShell { inner, outer } => {
                if r <= inner {
                    return Ok(T::zero());
                }
                Ok(self.sphere * shell_power_integral(a, inner, r.min(outer)))
            }
            RadialFamily::PowerLog { sigma_shell, beta } => {
                if r <= sigma_shell {
                    return Ok(T::zero());
                }
                if r.is_infinite() {
                    return match self.moment(p)? {
                        MomentValue::Finite(v) => Ok(v),
                        MomentValue::Infinite => Err(Error::IndeterminateMoment(format!("order {p} moment diverges"))),
                    };
                }
                let lo = sigma_shell.ln();
                let hi = r.ln();
                let v = integrate(
                    |u: T| (T::lit(a as f64) * u).exp() * u.powf(-beta),
                    lo,
                    hi,
                    QuadOptions::with_rel_tol(RADIAL_TOL),
                )?
                .value;
                Ok(self.sphere * v)
            }
        }
    }

    /// `int_{|v| > r} |v|^p nu(dv)` for `p` in 1..=3.
    pub fn tail_moment(&self, p: u32, r: T) -> Result<MomentValue<T>> {
        check_order(p)?;
        let a = p as i32 - 2;
        match self.family {
            RadialFamily::Zero => Ok(MomentValue::Finite(T::zero())),
            RadialFamily::BoundedShell { inner, outer } => {
                if r >= outer {
                    return Ok(MomentValue::Finite(T::zero()));
                }
                Ok(MomentValue::Finite(self.sphere * shell_power_integral(a, r.max(inner), outer)))
            }
            RadialFamily::PowerLog { sigma_shell, beta } => {
                if r.is_infinite() {
                    return Ok(MomentValue::Finite(T::zero()));
                }
                let u0 = r.max(sigma_shell).ln();
                Ok(log_tail_integral(a, beta, u0)?.map(|v| self.sphere * v))
            }
        }
    }

    /// Full moment `int |v|^p nu(dv)`.
    pub fn moment(&self, p: u32) -> Result<MomentValue<T>> {
        self.tail_moment(p, T::zero())
    }
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawRadial<T> {
    family: RadialFamily<T>,
    dim: usize,
}

impl<T: Real> TryFrom<RawRadial<T>> for RadialLevyMeasure<T> {
    type Error = Error;

    fn try_from(raw: RawRadial<T>) -> Result<Self> {
        Self::new(raw.family, raw.dim)
    }
}

fn check_order(p: u32) -> Result<()> {
    if (1..=3).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!("moment order must be 1, 2 or 3, got {p}")))
    }
}

/// `int_lo^hi s^{a-1} ds` (radial `s^{p-3} ds` with `a = p - 2`).
fn shell_power_integral<T: Real>(a: i32, lo: T, hi: T) -> T {
    if hi <= lo {
        return T::zero();
    }
    if a == 0 {
        (hi / lo).ln()
    } else {
        let af = T::lit(a as f64);
        (hi.powi(a) - lo.powi(a)) / af
    }
}

/// `int_{u0}^inf e^{a u} u^{-beta} du` for `u0 > 0`.
///
/// `a < 0` shifts to `w = u - u0` and factors out `e^{a u0}`; `a = 0` uses
/// `u = u0 e^w`, turning the algebraic tail into an exponential one.
fn log_tail_integral<T: Real>(a: i32, beta: T, u0: T) -> Result<MomentValue<T>> {
    let opts = QuadOptions::with_rel_tol(RADIAL_TOL);
    match a.cmp(&0) {
        std::cmp::Ordering::Greater => Ok(MomentValue::Infinite),
        std::cmp::Ordering::Equal => {
            if beta <= T::one() {
                return Ok(MomentValue::Infinite);
            }
            let e = T::one() - beta;
            let v = integrate_to_infinity(|w: T| (e * w).exp(), T::zero(), opts)?.value;
            Ok(MomentValue::Finite(u0.powf(e) * v))
        }
        std::cmp::Ordering::Less => {
            let af = T::lit(a as f64);
            let v = integrate_to_infinity(|w: T| (af * w).exp() * (u0 + w).powf(-beta), T::zero(), opts)?.value;
            Ok(MomentValue::Finite((af * u0).exp() * v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    /// Composite Simpson on `[lo, hi]` with `n` (even) intervals.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn zero_measure_is_empty() {
        let m = RadialLevyMeasure::<f64>::zero(3);
        assert_eq!(m.tail_mass(0.0).unwrap(), 0.0);
        assert_eq!(m.truncated_moment(2, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn tail_mass_against_simpson_oracle() {
        let m = RadialLevyMeasure::power_log(E, 2.0, 1).unwrap();
        // s = e / (1 - x) maps [0, 1) onto [e, inf); ds = e / (1 - x)^2 dx.
        let f = |x: f64| {
            if x >= 1.0 {
                return 0.0;
            }
            let s = E / (1.0 - x);
            s.powi(-3) * s.ln().powi(-2) * E / (1.0 - x).powi(2)
        };
        let oracle = 2.0 * simpson(f, 0.0, 1.0, 1_000_000);
        let v = m.tail_mass(E).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-7, "{v} vs {oracle}");
    }

    #[test]
    fn tail_mass_monotone_and_vanishing() {
        let m = RadialLevyMeasure::power_log(E, 2.0, 1).unwrap();
        let a = m.tail_mass(E).unwrap();
        let b = m.tail_mass(E * E).unwrap();
        let c = m.tail_mass(E.powi(3)).unwrap();
        assert!(a > b && b > c && c > 0.0);
        assert!(m.tail_mass(1e150).unwrap() < 1e-300);
        assert_eq!(m.tail_mass(0.5).unwrap(), a);
    }

    #[test]
    fn second_moment_closed_form() {
        for d in 1..=3 {
            let m = RadialLevyMeasure::power_log(E, 2.0, d).unwrap();
            let s = sphere_area::<f64>(d);
            for &r in &[3.0f64, 50.0, 1e6] {
                let expected = s * (1.0 - 1.0 / r.ln());
                let v = m.truncated_moment(2, r).unwrap();
                assert!(((v - expected) / expected).abs() < 1e-9);
            }
            assert_eq!(m.truncated_moment(2, E / 2.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn tail_moments_classify_by_beta() {
        let m1 = RadialLevyMeasure::power_log(E, 1.0, 2).unwrap();
        assert_eq!(m1.moment(2).unwrap(), MomentValue::Infinite);
        assert!(m1.moment(1).unwrap().is_finite());
        let m2 = RadialLevyMeasure::power_log(E, 2.0, 2).unwrap();
        let full = m2.moment(2).unwrap().value().unwrap();
        assert!((full - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(m2.moment(3).unwrap(), MomentValue::Infinite);
    }

    #[test]
    fn bounded_shell_closed_forms() {
        let m = RadialLevyMeasure::bounded_shell(1.5, 4.0, 2).unwrap();
        let s = 2.0 * std::f64::consts::PI;
        assert!((m.total_mass().unwrap() - s * 0.5 * (1.5f64.powi(-2) - 0.0625)).abs() < 1e-14);
        assert!((m.moment(3).unwrap().value().unwrap() - s * 2.5).abs() < 1e-12);
        assert!((m.truncated_moment(2, 3.0).unwrap() - s * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip_restores_constants() {
        let m = RadialLevyMeasure::power_log(E, 3.0, 3).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: RadialLevyMeasure<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RadialLevyMeasure::power_log(1.0, 2.0, 1).is_err());
        assert!(RadialLevyMeasure::power_log(E, 0.0, 1).is_err());
        assert!(RadialLevyMeasure::bounded_shell(2.0, 1.0, 1).is_err());
        assert!(RadialLevyMeasure::power_log(E, 2.0, 0).is_err());
    }
}
