//! Poisson exceedance-rate model.
//!
//! User `i` exceeds a threshold `u` at rate
//! `Lambda_i = exp(-(u - (sigma_i b_K + mu_i)) / (sigma_i a_K))` per unit
//! interval, with `(a_K, b_K)` the standard-normal constants. Per slot the
//! number of exceeders is approximately Poisson with mean `Lambda_T / K`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::evt::{gumbel_return_level, std_constants};
use crate::special::{compensated_sum, ln_gamma, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub mu: f64,
    pub sigma: f64,
    /// Per-user exceedance probability for QoS thresholds.
    pub qos_p: Option<f64>,
}

impl UserProfile {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let p = Self { mu, sigma, qos_p: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_qos(mu: f64, sigma: f64, p: f64) -> Result<Self> {
        let p = Self {
            mu,
            sigma,
            qos_p: Some(p),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return domain(format!("mu must be finite, got {}", self.mu));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return domain(format!("sigma must be positive, got {}", self.sigma));
        }
        if let Some(p) = self.qos_p {
            if !(p > 0.0 && p < 1.0) {
                return domain(format!("qos_p must be in (0,1), got {p}"));
            }
        }
        Ok(())
    }

    /// Standardized threshold `(u - mu) / sigma`.
    pub fn z(&self, u: f64) -> f64 {
        (u - self.mu) / self.sigma
    }
}

/// How per-user exceedance rates are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RateModel {
    /// Gumbel-limit rate `exp(-(z - b_K)/a_K)`.
    #[default]
    Evt,
    /// `K (1 - Phi(z))`, the exact expected exceedances per slot times `K`.
    ExactSurvival,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Thresholds {
    Global(f64),
    PerUser(Vec<f64>),
}

impl Thresholds {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Thresholds::Global(u) => *u,
            Thresholds::PerUser(v) => v[i],
        }
    }

    pub fn check_len(&self, k_users: usize) -> Result<()> {
        if let Thresholds::PerUser(v) = self {
            if v.len() != k_users {
                return domain(format!("{} per-user thresholds for {k_users} users", v.len()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    pub per_user: Vec<f64>,
    pub total: f64,
    pub thresholds: Thresholds,
    pub k_users: u64,
}

impl RateVector {
    /// Mean number of exceeders per slot, `Lambda_T / K`.
    pub fn mean_exceeders(&self) -> f64 {
        self.total / self.k_users as f64
    }

    /// Per-user shares `Lambda_i / Lambda_T`.
    pub fn shares(&self) -> Vec<f64> {
        self.per_user.iter().map(|l| l / self.total).collect()
    }
}

/// `Lambda(B_v) = (1 + xi v)_+^(-1/xi)`, `exp(-v)` at `xi = 0`.
pub fn intensity_above(v: f64, xi: f64) -> f64 {
    if xi == 0.0 {
        return (-v).exp();
    }
    let t = xi * v;
    if 1.0 + t <= 0.0 {
        return if xi > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (-t.ln_1p() / xi).exp()
}

/// Exceedance rate of one user at threshold `u` among `K` users.
/// Underflows to 0 for very large `u`.
pub fn user_rate(u: f64, profile: &UserProfile, k_users: u64) -> Result<f64> {
    user_rate_with(u, profile, k_users, RateModel::Evt)
}

pub fn user_rate_with(u: f64, profile: &UserProfile, k_users: u64, model: RateModel) -> Result<f64> {
    if k_users < 2 {
        return domain(format!("rates need K >= 2, got {k_users}"));
    }
    let z = profile.z(u);
    Ok(match model {
        RateModel::Evt => {
            let (a, b) = std_constants(k_users as f64)?;
            (-(z - b) / a).exp()
        }
        RateModel::ExactSurvival => k_users as f64 * normal_sf(z),
    })
}

/// Rates of all users; `K` is the number of profiles.
pub fn total_rate(thresholds: &Thresholds, profiles: &[UserProfile]) -> Result<RateVector> {
    total_rate_with(thresholds, profiles, RateModel::Evt)
}

pub fn total_rate_with(thresholds: &Thresholds, profiles: &[UserProfile], model: RateModel) -> Result<RateVector> {
    if profiles.is_empty() {
        return domain("no user profiles");
    }
    thresholds.check_len(profiles.len())?;
    let k_users = profiles.len() as u64;
    let per_user = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| user_rate_with(thresholds.at(i), p, k_users, model))
        .collect::<Result<Vec<_>>>()?;
    let total = compensated_sum(per_user.iter().copied());
    Ok(RateVector {
        per_user,
        total,
        thresholds: thresholds.clone(),
        k_users,
    })
}

/// Per-user QoS threshold: the Gumbel return level with exceedance
/// probability `p_i`, scaled by the user's `(mu_i, sigma_i)`.
pub fn qos_threshold(profile: &UserProfile) -> Result<f64> {
    match profile.qos_p {
        Some(p) => gumbel_return_level(p, profile.mu, profile.sigma),
        None => domain("profile has no qos_p"),
    }
}

/// QoS rate by substituting the user's own threshold into [`user_rate`].
pub fn qos_rate(profile: &UserProfile, k_users: u64) -> Result<f64> {
    qos_rate_with(profile, k_users, RateModel::Evt)
}

pub fn qos_rate_with(profile: &UserProfile, k_users: u64, model: RateModel) -> Result<f64> {
    let u = qos_threshold(profile)?;
    user_rate_with(u, profile, k_users, model)
}

/// The displayed closed form
/// `exp(-(b_K + b_{1/p})/a_K) (-ln(1-p))^(a_{1/p})`, kept for comparison.
/// It does not agree with [`qos_rate`].
pub fn qos_rate_closed_form(p: f64, k_users: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("qos_p must be in (0,1), got {p}"));
    }
    let (a_k, b_k) = std_constants(k_users as f64)?;
    let (a_p, b_p) = std_constants(1.0 / p)?;
    Ok((-(b_k + b_p) / a_k).exp() * (-(-p).ln_1p()).powf(a_p))
}

/// Poisson probability of `count` exceeders per slot, mean `Lambda_T / K`.
pub fn count_pmf(rate_total: f64, k_users: u64, count: u64) -> f64 {
    let m = rate_total / k_users as f64;
    if m == 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    let c = count as f64;
    (c * m.ln() - m - ln_gamma(c + 1.0)).exp()
}

/// Global threshold with `Lambda_T / K = target` under `model`, by bisection.
pub fn solve_global_threshold(profiles: &[UserProfile], target: f64, model: RateModel) -> Result<f64> {
    if profiles.is_empty() {
        return domain("no user profiles");
    }
    if !(target > 0.0) || !target.is_finite() {
        return domain(format!("target rate must be positive, got {target}"));
    }
    if model == RateModel::ExactSurvival && target >= 1.0 * profiles.len() as f64 {
        return domain("exact-survival mean exceeders cannot reach K");
    }
    let mean =
        |u: f64| -> Result<f64> { Ok(total_rate_with(&Thresholds::Global(u), profiles, model)?.mean_exceeders()) };
    let lo_start = profiles
        .iter()
        .map(|p| p.mu - 40.0 * p.sigma)
        .fold(f64::INFINITY, f64::min);
    let hi_start = profiles
        .iter()
        .map(|p| p.mu + 40.0 * p.sigma)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (lo_start, hi_start);
    if !(mean(lo)? >= target && mean(hi)? <= target) {
        return domain(format!("cannot bracket threshold for target {target}"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if mean(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
