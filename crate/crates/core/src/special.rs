//! Normal distribution functions, the chi radius law and sphere areas.

use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Real;

/// Standard normal CDF.
#[inline]
pub fn norm_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc_real()
}

/// Standard normal density.
#[inline]
pub fn norm_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() / (T::TAU()).sqrt()
}

/// Standard normal quantile (Acklam's rational approximation polished by
/// two Halley steps against [`norm_cdf`]).
pub fn norm_quantile<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    let pf = p.to_f64_lossy();
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let plow = 0.024_25;
    let x0 = if pf < plow {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - plow {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = T::lit(x0);
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e / norm_pdf(x);
        if !u.is_finite() {
            break;
        }
        x = x - u / (T::one() + x * u * T::lit(0.5));
    }
    x
}

/// Regularised lower incomplete gamma `P(k/2, x)` for a positive integer `k`.
///
/// Uses the upward recurrence `P(a + 1, x) = P(a, x) - x^a e^-x / Gamma(a + 1)`
/// from `P(1/2, x) = erf(sqrt x)` or `P(1, x) = 1 - e^-x`.
pub fn gamma_p_half_integer<T: Real>(k: usize, x: T) -> T {
    assert!(k >= 1, "order must be positive");
    if x <= T::zero() {
        return T::zero();
    }
    if x.is_infinite() {
        return T::one();
    }
    let (mut a, mut p, mut term) = if k % 2 == 1 {
        // term_a = x^a e^-x / Gamma(a+1) at a = 1/2
        let half = T::lit(0.5);
        let p = T::one() - x.sqrt().erfc_real();
        let term = x.sqrt() * (-x).exp() / (T::PI().sqrt() * half);
        (half, p, term)
    } else {
        let p = -(-x).exp_m1();
        let term = x * (-x).exp();
        (T::one(), p, term)
    };
    let target = T::lit(k as f64 * 0.5);
    while a < target - T::lit(0.25) {
        p = p - term;
        a = a + T::one();
        term = term * x / (a + T::one());
    }
    p.max(T::zero()).min(T::one())
}

/// CDF of `|sigma Z|` for a standard Gaussian `Z` in `R^d`.
pub fn chi_radius_cdf<T: Real>(dim: usize, sigma: T, r: T) -> T {
    if r <= T::zero() {
        return T::zero();
    }
    let x = r * r / (sigma * sigma * T::lit(2.0));
    gamma_p_half_integer(dim, x)
}

/// Surface area of the unit sphere `S^{d-1}` by angular quadrature:
/// `2 pi prod_{k=1}^{d-2} int_0^pi sin^k`, with `S^0` the two-point set.
pub fn sphere_area<T: Real>(dim: usize) -> T {
    assert!(dim >= 1, "dimension must be positive");
    match dim {
        1 => T::lit(2.0),
        _ => {
            let mut area = T::TAU();
            for k in 1..=(dim - 2) {
                let kk = k as i32;
                let factor = integrate(|th: T| th.sin().powi(kk), T::zero(), T::PI(), QuadOptions::with_rel_tol(1e-13))
                    .expect("smooth integrand on a compact interval")
                    .value;
                area = area * factor;
            }
            area
        }
    }
}
