//! Extreme-value constants, threshold estimators and tail laws for
//! Gaussian capacities.
//!
//! For `n` i.i.d. standard normals the maximum satisfies
//!
//! ```text
//! P(M_n <= a_n x + b_n) -> exp(-exp(-x))
//! a_n = (2 ln n)^(-1/2)
//! b_n = (2 ln n)^(1/2) - (1/2)(2 ln n)^(-1/2) (ln ln n + ln 4 pi)
//! ```
//!
//! and a `N(mu, sigma^2)` population rescales both constants by `sigma`
//! and shifts `b_n` by `mu`. Excesses above a high threshold are
//! approximately exponential with mean `sigma * a_n`; the general case is
//! the generalized Pareto law `[(1 + xi x / sigma_v)_+]^(-1/xi)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{normal_isf, normal_pdf, normal_sf};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    /// Scale `a_n`.
    pub a: f64,
    /// Location `b_n`.
    pub b: f64,
    /// Sample count being normalized.
    pub n: u64,
}

/// Standard-normal `(a_n, b_n)` for a real-valued sample count `n > 1`.
///
/// Block-maxima thresholds need non-integer counts (`n = 1/p`).
pub fn std_constants(n: f64) -> Result<(f64, f64)> {
    if !(n > 1.0) || !n.is_finite() {
        return domain(format!("normalizing constants need n > 1, got {n}"));
    }
    let two_ln = 2.0 * n.ln();
    let root = two_ln.sqrt();
    let a = 1.0 / root;
    let b = root - 0.5 * a * (n.ln().ln() + (4.0 * PI).ln());
    Ok((a, b))
}

/// Normalizing constants for the maximum of `n` samples of `N(mu, sigma^2)`.
pub fn norm_constants(n: u64, mu: f64, sigma: f64) -> Result<NormConstants> {
    if n < 2 {
        return domain(format!("norm_constants needs n >= 2, got {n}"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    let (a, b) = std_constants(n as f64)?;
    Ok(NormConstants {
        a: sigma * a,
        b: sigma * b + mu,
        n,
    })
}

/// Expected maximum of `n` Gaussian capacities under the Gumbel law,
/// `sigma (b_n + a_n gamma) + mu`.
pub fn expected_max(n: u64, mu: f64, sigma: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("expected_max needs n >= 2, got {n}"));
    }
    if !(sigma >= 0.0) {
        return domain(format!("sigma must be non-negative, got {sigma}"));
    }
    let (a, b) = std_constants(n as f64)?;
    Ok(GevParams::gumbel(b, a)
        .mean()
        .map(|m| sigma * m + mu)
        .unwrap_or(f64::NAN))
}

/// Generalized extreme value law `exp(-(1 + xi z)^(-1/xi))`, `z = (x - location)/scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub xi: f64,
    pub location: f64,
    pub scale: f64,
}

impl GevParams {
    pub fn gumbel(location: f64, scale: f64) -> Self {
        Self {
            xi: 0.0,
            location,
            scale,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.xi == 0.0 {
            return (-(-z).exp()).exp();
        }
        let t = 1.0 + self.xi * z;
        if t <= 0.0 {
            // outside the support: below the lower endpoint (xi > 0) or
            // above the upper endpoint (xi < 0)
            return if self.xi > 0.0 { 0.0 } else { 1.0 };
        }
        (-(t.ln() * (-1.0 / self.xi)).exp()).exp()
    }

    /// `p`-quantile; `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("GEV quantile needs p in (0,1), got {p}"));
        }
        let y = -p.ln();
        let z = if self.xi == 0.0 {
            -y.ln()
        } else {
            (y.powf(-self.xi) - 1.0) / self.xi
        };
        Ok(self.location + self.scale * z)
    }

    /// Mean, defined for `xi < 1`.
    pub fn mean(&self) -> Option<f64> {
        if self.xi == 0.0 {
            Some(self.location + self.scale * EULER_GAMMA)
        } else if self.xi < 1.0 {
            let g = libm::tgamma(1.0 - self.xi);
            Some(self.location + self.scale * (g - 1.0) / self.xi)
        } else {
            None
        }
    }
}

/// Threshold `u_k` exceeded on average by `k` of `K` users,
/// i.e. `1 - Phi((u_k - mu)/sigma) = k/K`, via the inverse erfc.
pub fn threshold_gaussian(k_users: u64, k: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_kk(k_users, k)?;
    check_sigma(sigma)?;
    let z = normal_isf(k / k_users as f64)?;
    Ok(mu + sigma * z)
}

/// The truncated series for `u_k`:
/// `mu + sigma sqrt(2 ln(K/k) - ln[-2 pi (2 ln(k/K) + ln 2 pi)])`.
///
/// Only meaningful for small `k/K` (below `1/sqrt(2 pi)`).
pub fn threshold_gaussian_series(k_users: u64, k: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_kk(k_users, k)?;
    check_sigma(sigma)?;
    let ratio = k / k_users as f64;
    let inner = -2.0 * PI * (2.0 * ratio.ln() + (2.0 * PI).ln());
    if !(inner > 0.0) {
        return domain(format!("series undefined for k/K = {ratio}"));
    }
    let arg = 2.0 * (1.0 / ratio).ln() - inner.ln();
    if !(arg >= 0.0) {
        return domain(format!("series undefined for k/K = {ratio}"));
    }
    Ok(mu + sigma * arg.sqrt())
}

/// Which constants enter the block-maxima threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GumbelForm {
    /// `b_{1/p} - a_{1/p} ln(-ln(1-p))` with the full normalizing constants.
    #[default]
    ReturnLevel,
    /// `(2 ln(1/p))^(1/2) - (2 ln(1/p))^(-1/2) ln(-ln(1-p))`, i.e. the
    /// same return level with the `ln ln` correction of `b` dropped.
    Simplified,
}

/// Block layout for `K` users: blocks of `floor(sqrt K)` users,
/// `floor(K / floor(sqrt K))` blocks.
pub fn gumbel_blocks(k_users: u64) -> (u64, u64) {
    let size = (k_users as f64).sqrt().floor().max(1.0) as u64;
    (size, k_users / size)
}

/// Exceedance fraction among block maxima, `p = k / n_blocks`.
pub fn gumbel_block_probability(k_users: u64, k: f64) -> Result<f64> {
    if k_users < 2 {
        return domain(format!("need K >= 2, got {k_users}"));
    }
    if !(k > 0.0) {
        return domain(format!("k must be positive, got {k}"));
    }
    let (_, blocks) = gumbel_blocks(k_users);
    let p = k / blocks as f64;
    if p >= 1.0 {
        return domain(format!("block exceedance fraction p = {p} must be < 1"));
    }
    Ok(p)
}

/// Gumbel return level with return period `1/p`, scaled to `N(mu, sigma^2)`:
/// `mu + sigma (b_{1/p} - a_{1/p} ln(-ln(1-p)))`.
pub fn gumbel_return_level(p: f64, mu: f64, sigma: f64) -> Result<f64> {
    gumbel_return_level_with(p, mu, sigma, GumbelForm::ReturnLevel)
}

pub fn gumbel_return_level_with(p: f64, mu: f64, sigma: f64, form: GumbelForm) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("exceedance probability must be in (0,1), got {p}"));
    }
    check_sigma(sigma)?;
    let n = 1.0 / p;
    let gumbel_tail = (-(-p).ln_1p()).ln();
    let z = match form {
        GumbelForm::ReturnLevel => {
            let (a, b) = std_constants(n)?;
            b - a * gumbel_tail
        }
        GumbelForm::Simplified => {
            let two_ln = 2.0 * n.ln();
            if !(two_ln > 0.0) {
                return domain(format!("block count 1/p = {n} too small"));
            }
            two_ln.sqrt() - gumbel_tail / two_ln.sqrt()
        }
    };
    Ok(mu + sigma * z)
}

/// Block-maxima threshold for `k` strongest of the block maxima.
pub fn threshold_gumbel(k_users: u64, k: f64, mu: f64, sigma: f64) -> Result<f64> {
    threshold_gumbel_with(k_users, k, mu, sigma, GumbelForm::ReturnLevel)
}

pub fn threshold_gumbel_with(k_users: u64, k: f64, mu: f64, sigma: f64, form: GumbelForm) -> Result<f64> {
    let p = gumbel_block_probability(k_users, k)?;
    gumbel_return_level_with(p, mu, sigma, form)
}

/// Survival of the exponential excess law, `exp(-x/a)`.
pub fn tail_excess_survival(x: f64, a: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    (-x / a).exp()
}

/// Generalized Pareto survival `[(1 + xi x/sigma_v)_+]^(-1/xi)`;
/// the `xi = 0` member is `exp(-x/sigma_v)`.
pub fn gpd_survival(x: f64, sigma_v: f64, xi: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let t = xi * x / sigma_v;
    if xi == 0.0 {
        return (-x / sigma_v).exp();
    }
    if 1.0 + t <= 0.0 {
        return 0.0;
    }
    (-t.ln_1p() / xi).exp()
}

/// Excess law above a threshold: GPD with scale `sigma_v` and shape `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub threshold: f64,
    /// `1/sigma_v`.
    pub rate: f64,
    pub sigma_v: f64,
    pub xi: f64,
}

impl TailModel {
    /// The Gaussian limit: exponential excesses with mean `a`.
    pub fn exponential(threshold: f64, a: f64) -> Self {
        Self {
            threshold,
            rate: 1.0 / a,
            sigma_v: a,
            xi: 0.0,
        }
    }

    pub fn gpd(threshold: f64, sigma_v: f64, xi: f64) -> Self {
        Self {
            threshold,
            rate: 1.0 / sigma_v,
            sigma_v,
            xi,
        }
    }

    /// Survival of the excess `x` above the threshold.
    pub fn survival(&self, x: f64) -> f64 {
        gpd_survival(x, self.sigma_v, self.xi)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    /// Mean excess, finite for `xi < 1`.
    pub fn mean_excess(&self) -> Option<f64> {
        (self.xi < 1.0).then(|| self.sigma_v / (1.0 - self.xi))
    }
}

/// A distribution described by survival and density, for the
/// reciprocal-hazard shape estimate.
pub trait HazardSource {
    fn survival(&self, x: f64) -> f64;
    fn density(&self, x: f64) -> f64;
    /// `sup {x : F(x) < 1}`, possibly infinite.
    fn upper_endpoint(&self) -> f64 {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Normal {
    pub mu: f64,
    pub sigma: f64,
}

impl HazardSource for Normal {
    fn survival(&self, x: f64) -> f64 {
        normal_sf((x - self.mu) / self.sigma)
    }
    fn density(&self, x: f64) -> f64 {
        normal_pdf((x - self.mu) / self.sigma) / self.sigma
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    pub rate: f64,
}

impl HazardSource for Exponential {
    fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-self.rate * x).exp()
        }
    }
    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }
}

/// Pareto law with survival `(x/scale)^(-alpha)` for `x >= scale`.
#[derive(Debug, Clone, Copy)]
pub struct Pareto {
    pub scale: f64,
    pub alpha: f64,
}

impl HazardSource for Pareto {
    fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (x / self.scale).powf(-self.alpha)
        }
    }
    fn density(&self, x: f64) -> f64 {
        if x < self.scale {
            0.0
        } else {
            self.alpha / self.scale * (x / self.scale).powf(-self.alpha - 1.0)
        }
    }
}

/// Uniform on `[lo, hi]`; finite upper endpoint, shape `-1`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl HazardSource for Uniform {
    fn survival(&self, x: f64) -> f64 {
        ((self.hi - x) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
    fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            1.0 / (self.hi - self.lo)
        }
    }
    fn upper_endpoint(&self) -> f64 {
        self.hi
    }
}

const HAZARD_GRID_POINTS: usize = 32;
const HAZARD_REL_STEP: f64 = 1e-4;
const HAZARD_SETTLE_POINTS: usize = 8;
const HAZARD_SETTLE_TOL: f64 = 0.05;

/// Derivative estimates of the reciprocal hazard `(1-F)/f` along a
/// geometric grid approaching the upper endpoint.
///
/// With an infinite endpoint the grid runs geometrically from `start` to
/// `end`. With a finite endpoint `x^F` the distance `x^F - x` shrinks
/// geometrically from `x^F - start` to `x^F - end`.
pub fn reciprocal_hazard_slopes(dist: &dyn HazardSource, start: f64, end: f64) -> Result<Vec<(f64, f64)>> {
    let top = dist.upper_endpoint();
    let (d0, d1) = if top.is_finite() {
        (top - start, top - end)
    } else {
        (start, end)
    };
    if !(d0 > 0.0 && d1 > 0.0) || d0 == d1 {
        return domain(format!("bad hazard grid [{start}, {end}]"));
    }
    let ratio = (d1 / d0).powf(1.0 / (HAZARD_GRID_POINTS - 1) as f64);
    let h = |x: f64| dist.survival(x) / dist.density(x);
    let mut out = Vec::with_capacity(HAZARD_GRID_POINTS);
    let mut d = d0;
    for _ in 0..HAZARD_GRID_POINTS {
        let (x, step) = if top.is_finite() {
            // stay inside the support on both sides
            (top - d, HAZARD_REL_STEP * d)
        } else {
            (d, HAZARD_REL_STEP * d.abs())
        };
        let slope = (h(x + step) - h(x - step)) / (2.0 * step);
        out.push((x, slope));
        d *= ratio;
    }
    Ok(out)
}

/// Shape parameter `xi` as the limit of `d/dx (1-F(x))/f(x)` toward the
/// upper endpoint.
///
/// Fails with `NoLimit` when the last few slope estimates are non-finite
/// or still spread by more than 0.05.
pub fn reciprocal_hazard_shape(dist: &dyn HazardSource, start: f64, end: f64) -> Result<f64> {
    let slopes = reciprocal_hazard_slopes(dist, start, end)?;
    let tail = &slopes[slopes.len() - HAZARD_SETTLE_POINTS..];
    if tail.iter().any(|(_, s)| !s.is_finite()) {
        return Err(Error::NoLimit("non-finite reciprocal hazard slope".into()));
    }
    let lo = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > HAZARD_SETTLE_TOL {
        return Err(Error::NoLimit(format!(
            "slopes still spread over [{lo:.4}, {hi:.4}] near the endpoint"
        )));
    }
    Ok(tail[tail.len() - 1].1)
}

fn check_kk(k_users: u64, k: f64) -> Result<()> {
    if !(k > 0.0 && k < k_users as f64) {
        return domain(format!("need 0 < k < K, got k={k}, K={k_users}"));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn norm_constants_reference_values() {
        // reference values evaluated in 40-digit arithmetic
        let c = norm_constants(500, 0.0, 1.0).unwrap();
        assert!(close(c.a, 0.283_646_957_056, 1e-9), "{}", c.a);
        assert!(close(c.b, 2.907_452_998_912, 1e-9), "{}", c.b);
        let c = norm_constants(500, 2f64.sqrt(), 0.03).unwrap();
        assert!(close(c.a, 0.008_509_408_712, 1e-9), "{}", c.a);
        assert!(close(c.b, 1.501_437_152_340, 1e-9), "{}", c.b);
    }

    #[test]
    fn norm_constants_rejects_small_n_and_bad_sigma() {
        assert!(norm_constants(1, 0.0, 1.0).is_err());
        assert!(norm_constants(0, 0.0, 1.0).is_err());
        assert!(norm_constants(10, 0.0, 0.0).is_err());
        assert!(norm_constants(10, 0.0, -1.0).is_err());
    }

    #[test]
    fn a_decreases_with_n() {
        let a2 = norm_constants(2, 0.0, 1.0).unwrap().a;
        let a6 = norm_constants(1_000_000, 0.0, 1.0).unwrap().a;
        assert!(a2 > a6);
    }

    #[test]
    fn expected_max_values() {
        let e = expected_max(500, 2f64.sqrt(), 0.03).unwrap();
        assert!(close(e, 1.506_348_916_348, 1e-9), "{e}");
        let mu = 2f64.sqrt();
        assert!(e > mu + 2.0 * 0.03 && e < mu + 5.0 * 0.03);
        assert_eq!(expected_max(1000, 5.0, 0.0).unwrap(), 5.0);
        let seq: Vec<f64> = [10, 100, 1000, 10_000]
            .iter()
            .map(|&n| expected_max(n, 0.0, 1.0).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[0] < w[1]));
        assert!(expected_max(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_threshold_median_and_errors() {
        assert_eq!(threshold_gaussian(100, 50.0, 7.0, 2.0).unwrap(), 7.0);
        assert!(threshold_gaussian(100, 100.0, 0.0, 1.0).is_err());
        assert!(threshold_gaussian(100, 0.0, 0.0, 1.0).is_err());
        assert!(threshold_gaussian(100, 1.0, 0.0, 0.0).is_err());
        match threshold_gaussian(u64::MAX, 1e-300, 0.0, 1.0) {
            Err(Error::QuantileOverflow { argument }) => assert!(argument > 0.0),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_threshold_reference() {
        let u = threshold_gaussian(1000, 1.0, 0.0, 1.0).unwrap();
        assert!(close(u, 3.090_232_306_167_813_5, 1e-12));
        let s = threshold_gaussian_series(1000, 1.0, 0.0, 1.0).unwrap();
        assert!(close(s, 3.081_329_657_250, 1e-9), "{s}");
        assert!((s - u).abs() < 0.01);
    }

    #[test]
    fn series_rejects_large_fractions() {
        assert!(threshold_gaussian_series(10, 5.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn gumbel_threshold_blocks_and_errors() {
        assert_eq!(gumbel_blocks(1000), (31, 32));
        assert_eq!(gumbel_blocks(100), (10, 10));
        assert!(threshold_gumbel(100, 10.0, 0.0, 1.0).is_err());
        assert!(threshold_gumbel(100, 0.0, 0.0, 1.0).is_err());
        let g = threshold_gumbel(1_000_000, 1.0, 0.0, 1.0).unwrap();
        let e = threshold_gaussian(1_000_000, 1.0, 0.0, 1.0).unwrap();
        assert!(g.is_finite() && g > e);
    }

    #[test]
    fn gumbel_threshold_is_affine() {
        let base = threshold_gumbel(100, 1.0, 0.0, 1.0).unwrap();
        let mu = 2f64.sqrt();
        let scaled = threshold_gumbel(100, 1.0, mu, 0.03).unwrap();
        assert!(((scaled - (mu + 0.03 * base)) / scaled).abs() < 1e-12);
    }

    #[test]
    fn simplified_form_differs() {
        let a = threshold_gumbel_with(10_000, 1.0, 0.0, 1.0, GumbelForm::ReturnLevel).unwrap();
        let b = threshold_gumbel_with(10_000, 1.0, 0.0, 1.0, GumbelForm::Simplified).unwrap();
        assert!(b > a);
    }

    #[test]
    fn tail_survival_values() {
        assert_eq!(tail_excess_survival(0.0, 0.2), 1.0);
        assert!(close(tail_excess_survival(0.7, 0.7), (-1f64).exp(), 1e-15));
    }

    #[test]
    fn gpd_values() {
        assert_eq!(gpd_survival(0.0, 1.0, 0.5), 1.0);
        assert!(close(gpd_survival(2.0, 1.0, 0.0), (-2f64).exp(), 1e-15));
        assert!(close(gpd_survival(2.0, 1.0, 1e-12), (-2f64).exp(), 1e-9));
        assert!(close(gpd_survival(2.0, 1.0, 1.0), 1.0 / 3.0, 1e-15));
        // beyond the finite endpoint of a negative shape
        assert_eq!(gpd_survival(3.0, 1.0, -0.5), 0.0);
    }

    #[test]
    fn tail_model_exponential_matches_rate() {
        let m = TailModel::exponential(3.0, 0.25);
        assert_eq!(m.survival(0.0), 1.0);
        assert!(close(m.survival(0.5), (-0.5 * m.rate).exp(), 1e-15));
        assert!(close(m.mean_excess().unwrap(), 0.25, 1e-15));
        let g = TailModel::gpd(0.0, 1.0, 0.5);
        assert!(g.survival(1.0) < 1.0 && g.survival(2.0) < g.survival(1.0));
    }

    #[test]
    fn gev_cdf_and_quantile() {
        let g = GevParams::gumbel(0.0, 1.0);
        assert!(close(g.cdf(0.0), (-1f64).exp(), 1e-15));
        let q = g.quantile(0.9).unwrap();
        assert!(close(g.cdf(q), 0.9, 1e-12));
        let f = GevParams {
            xi: 0.5,
            location: 0.0,
            scale: 1.0,
        };
        assert_eq!(f.cdf(-3.0), 0.0);
        let w = GevParams {
            xi: -0.5,
            location: 0.0,
            scale: 1.0,
        };
        assert_eq!(w.cdf(3.0), 1.0);
        let q = f.quantile(0.3).unwrap();
        assert!(close(f.cdf(q), 0.3, 1e-12));
        assert!(GevParams {
            xi: 1.5,
            location: 0.0,
            scale: 1.0
        }
        .mean()
        .is_none());
    }

    #[test]
    fn hazard_shape_normal_exponential_pareto_uniform() {
        let xi = reciprocal_hazard_shape(&Normal { mu: 0.0, sigma: 1.0 }, 4.0, 8.0).unwrap();
        assert!(xi.abs() < 0.02, "{xi}");
        let xi = reciprocal_hazard_shape(&Exponential { rate: 1.0 }, 1.0, 30.0).unwrap();
        assert_eq!(xi, 0.0);
        let xi = reciprocal_hazard_shape(&Pareto { scale: 1.0, alpha: 2.0 }, 2.0, 100.0).unwrap();
        assert!(close(xi, 0.5, 1e-6), "{xi}");
        let xi = reciprocal_hazard_shape(&Uniform { lo: 0.0, hi: 1.0 }, 0.5, 0.999).unwrap();
        assert!(close(xi, -1.0, 1e-6), "{xi}");
    }

    struct Wobbly;
    impl HazardSource for Wobbly {
        // exponent x + 0.5 sin x is increasing, so this is a valid survival
        fn survival(&self, x: f64) -> f64 {
            (-(x + 0.5 * x.sin())).exp()
        }
        fn density(&self, x: f64) -> f64 {
            (1.0 + 0.5 * x.cos()) * self.survival(x)
        }
    }

    #[test]
    fn hazard_shape_reports_no_limit() {
        let r = reciprocal_hazard_shape(&Wobbly, 5.0, 600.0);
        assert!(matches!(r, Err(Error::NoLimit(_))), "{r:?}");
    }
}
