use crate::error::{Error, Result};
use crate::quadrature::{gk15, integrate, QuadOptions};
use crate::scalar::{CompensatedSum, Real};

use super::{LevyMeasure, LevyTriplet, RadialFamily};

const HEAD_TOL: f64 = 1e-11;
/// Half-period panels summed before the alternating tail is cut off.
const MAX_TAIL_PANELS: usize = 4000;

/// Characteristic exponent of a symmetric one-dimensional Levy process,
/// `mu(x) = Sigma x^2 / 2 + 2 int_(0,inf) (1 - cos(x v)) nu(dv)`.
pub fn char_exponent_1d<T: Real>(triplet: &LevyTriplet<T>, x: T) -> Result<T> {
    if triplet.dim() != 1 {
        return Err(Error::invalid("characteristic exponent requires dimension 1"));
    }
    if !triplet.measure().is_symmetric() {
        return Err(Error::invalid("characteristic exponent requires a symmetric measure"));
    }
    if !x.is_finite() {
        return Err(Error::invalid("frequency must be finite"));
    }
    let x = x.abs();
    if x == T::zero() {
        return Ok(T::zero());
    }
    let gauss = T::lit(0.5) * triplet.gaussian_cov()[(0, 0)] * x * x;
    let jumps = match triplet.measure() {
        LevyMeasure::Atomic(a) => a
            .atoms()
            .iter()
            .map(|at| at.weight * one_minus_cos(x * at.point[0]))
            .fold(T::zero(), |acc, v| acc + v),
        LevyMeasure::Radial(m) => {
            // nu restricted to (0, inf) has density rho(v) = f(v), and the
            // symmetric mass doubles it.
            let f = |v: T| m.radial_density(v);
            match *m.family() {
                RadialFamily::Zero => T::zero(),
                RadialFamily::BoundedShell { inner, outer } => T::lit(2.0) * oscillatory_finite(&f, x, inner, outer)?,
                RadialFamily::PowerLog { sigma_shell, .. } => {
                    let split = (T::TAU() / x).max(sigma_shell);
                    let head = oscillatory_finite(&f, x, sigma_shell, split)?;
                    // int_split^inf f = nu_bar(split) / 2
                    let flat = m.tail_mass(split)? * T::lit(0.5);
                    let wave = cosine_tail(&f, x, split)?;
                    T::lit(2.0) * (head + flat - wave)
                }
            }
        }
    };
    Ok(gauss + jumps)
}

#[inline]
fn one_minus_cos<T: Real>(y: T) -> T {
    let s = (y * T::lit(0.5)).sin();
    T::lit(2.0) * s * s
}

/// `int_lo^hi (1 - cos(x v)) f(v) dv` in `u = log v`, one panel per half
/// period of the cosine so that the adaptive rule never straddles many
/// oscillations.
fn oscillatory_finite<T: Real>(f: &impl Fn(T) -> T, x: T, lo: T, hi: T) -> Result<T> {
    if hi <= lo {
        return Ok(T::zero());
    }
    let half = T::PI() / x;
    let opts = QuadOptions::with_rel_tol(HEAD_TOL);
    let g = |u: T| {
        let v = u.exp();
        one_minus_cos(x * v) * f(v) * v
    };
    let mut acc = CompensatedSum::new();
    let mut a = lo;
    while a < hi {
        let b = ((a / half).floor() + T::one()) * half;
        let b = if b > hi || (hi - b) < half * T::lit(1e-9) { hi } else { b };
        acc.add(integrate(g, a.ln(), b.ln(), opts)?.value);
        a = b;
    }
    Ok(acc.value())
}

/// `int_a^inf cos(x v) f(v) dv` for a decreasing, integrable `f`, summed as
/// an alternating series of half-period panels. The limit is estimated by
/// averaging the last two partial sums.
fn cosine_tail<T: Real>(f: &impl Fn(T) -> T, x: T, a: T) -> Result<T> {
    let half = T::PI() / x;
    let g = |v: T| (x * v).cos() * f(v);
    let mut acc = CompensatedSum::new();
    let mut start = a;
    // Align the first panel end with a zero of cos(x v).
    let first_zero = ((x * a / T::PI() - T::lit(0.5)).floor() + T::lit(1.5)) * half;
    let mut end = first_zero;
    let mut prev = T::zero();
    for k in 0..MAX_TAIL_PANELS {
        let panel = panel_integral(&g, start, end)?;
        prev = acc.value();
        acc.add(panel);
        if k > 8 && panel.abs() <= T::epsilon() * acc.value().abs() {
            return Ok(acc.value());
        }
        start = end;
        end = end + half;
    }
    Ok((acc.value() + prev) * T::lit(0.5))
}

fn panel_integral<T: Real>(g: &impl Fn(T) -> T, a: T, b: T) -> Result<T> {
    if b <= a {
        return Ok(T::zero());
    }
    let (v, err) = gk15(g, a, b);
    if err <= T::epsilon() * T::lit(16.0) * v.abs() {
        return Ok(v);
    }
    Ok(integrate(g, a, b, QuadOptions::with_rel_tol(1e-13))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::measures::{Atom, AtomicMeasure, RadialLevyMeasure};
    use std::f64::consts::E;

    fn power_log(sigma: f64, beta: f64) -> LevyTriplet<f64> {
        LevyTriplet::centered(Matrix::scalar(1, sigma), RadialLevyMeasure::power_log(E, beta, 1).unwrap()).unwrap()
    }

    #[test]
    fn vanishes_at_origin_and_is_even() {
        let tr = power_log(0.0, 2.0);
        assert_eq!(char_exponent_1d(&tr, 0.0).unwrap(), 0.0);
        for &x in &[0.01, 0.3, 1.0, 7.0] {
            let a = char_exponent_1d(&tr, x).unwrap();
            assert_eq!(a, char_exponent_1d(&tr, -x).unwrap());
            assert!(a > 0.0);
        }
    }

    #[test]
    fn pure_gaussian() {
        let tr = LevyTriplet::gaussian(Matrix::identity(1)).unwrap();
        for &x in &[0.5f64, 1.0, 3.0] {
            assert!((char_exponent_1d(&tr, x).unwrap() - x * x / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_atoms() {
        let m = AtomicMeasure::new(1, vec![Atom { weight: 0.5, point: vec![2.0] }, Atom { weight: 0.5, point: vec![-2.0] }]).unwrap();
        let tr = LevyTriplet::pure_jump(m).unwrap();
        let v = char_exponent_1d(&tr, 0.7).unwrap();
        assert!((v - (1.0 - 1.4f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn riemann_sum_oracle() {
        // Composite Simpson in v with step 1e-3 up to V = 10^4, plus the tail
        // int_V^inf v^{-3}(log v)^{-2} dv ~ 1 / (2 V^2 log^2 V).
        let (lo, hi) = (E, 1e4);
        let n = 10_000_000usize;
        let h = (hi - lo) / n as f64;
        let f = |v: f64| (1.0 - v.cos()) * v.powi(-3) * v.ln().powi(-2);
        let mut s = f(lo) + f(hi);
        let mut c = 0.0;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            let y = w * f(lo + i as f64 * h) - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s *= h / 3.0;
        let tail = 1.0 / (2.0 * hi * hi * hi.ln().powi(2));
        let oracle = 2.0 * (s + tail);
        let v = char_exponent_1d(&power_log(0.0, 2.0), 1.0).unwrap();
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn small_frequency_ratio_is_cauchy() {
        let tr = power_log(0.0, 2.0);
        let r: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&x| char_exponent_1d(&tr, x).unwrap() / (x * x)).collect();
        assert!((r[2] - r[1]).abs() < (r[1] - r[0]).abs());
        // Bounded by half the full variance, which is 2 / log(e) = 2.
        assert!(r.iter().all(|&v| v > 0.0 && v < 1.0 + 1e-12));
    }

    #[test]
    fn rejects_wrong_dimension() {
        let tr = LevyTriplet::<f64>::gaussian(Matrix::identity(2)).unwrap();
        assert!(char_exponent_1d(&tr, 1.0).is_err());
    }
}
