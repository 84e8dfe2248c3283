//! Normal-distribution special functions.
//!
//! `erfc` comes from `libm` (a port of the FreeBSD msun routines, < 1 ulp).
//! The inverse is a rational initial guess refined by Newton steps against
//! that `erfc`, which gives full double precision down to survival
//! probabilities near `f64::MIN_POSITIVE`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, accurate in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival `1 - Phi(z)`, accurate in the upper tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

// Acklam's rational approximation to the normal quantile (rel. error ~1.2e-9).
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Initial guess for `Phi^{-1}(p)`, `p` in (0, 1).
fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam(1.0 - p)
    }
}

/// Inverse complementary error function on (0, 2).
///
/// Returns `QuantileOverflow` when `y` (or `2 - y`) is below
/// `f64::MIN_POSITIVE`, where the tail density underflows and the Newton
/// correction loses meaning.
pub fn erfc_inv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(Error::Domain(format!("erfc_inv argument {y} outside (0, 2)")));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y > 1.0 {
        return erfc_inv(2.0 - y).map(|x| -x);
    }
    if y < f64::MIN_POSITIVE {
        return Err(Error::QuantileOverflow { argument: y / 2.0 });
    }
    // erfc(x) = y  <=>  Phi(-x*sqrt2) = y/2
    let mut x = -acklam(0.5 * y) * FRAC_1_SQRT_2;
    for _ in 0..2 {
        let slope = FRAC_2_SQRT_PI * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        // f(x) = erfc(x) - y, f'(x) = -slope
        x += (erfc(x) - y) / slope;
    }
    Ok(x)
}

/// Upper-tail standard normal quantile: the `z` with `1 - Phi(z) = s`.
pub fn normal_isf(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("survival probability {s} outside (0, 1)")));
    }
    erfc_inv(2.0 * s).map(|x| SQRT_2 * x)
}

/// Standard normal quantile `Phi^{-1}(p)`.
pub fn normal_ppf(p: f64) -> Result<f64> {
    normal_isf(p).map(|z| -z)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    if !sum.is_finite() {
        return sum;
    }
    sum + c
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_inv_roundtrip_across_tail() {
        for &y in &[1e-300, 1e-200, 1e-30, 1e-10, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.3, 1.999999] {
            let x = erfc_inv(y).unwrap();
            let back = erfc(x);
            assert!(((back - y) / y).abs() < 1e-13, "y={y} x={x} back={back}");
        }
    }

    #[test]
    fn erfc_inv_rejects_out_of_range() {
        assert!(erfc_inv(0.0).is_err());
        assert!(erfc_inv(2.0).is_err());
        assert!(erfc_inv(f64::NAN).is_err());
        assert!(matches!(erfc_inv(1e-310), Err(Error::QuantileOverflow { .. })));
    }

    #[test]
    fn median_is_exact_zero() {
        assert_eq!(normal_isf(0.5).unwrap(), 0.0);
        assert_eq!(normal_ppf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn isf_matches_reference_values() {
        // 40-digit reference values of Phi^{-1}(1 - s).
        let cases = [
            (1e-2, 2.326_347_874_040_841),
            (1e-3, 3.090_232_306_167_813_5),
            (1e-6, 4.753_424_308_822_899),
        ];
        for (s, z) in cases {
            assert!((normal_isf(s).unwrap() - z).abs() < 1e-13);
        }
    }

    #[test]
    fn cdf_and_sf_are_complementary() {
        for i in -80..=80 {
            let z = i as f64 * 0.1;
            assert!((normal_cdf(z) + normal_sf(z) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
