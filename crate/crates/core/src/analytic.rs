//! Closed-form capacity and throughput predictions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::evt::{expected_max, std_constants, threshold_gaussian};
use crate::point_process::{qos_threshold, total_rate_with, RateModel, RateVector, Thresholds, UserProfile};
use crate::special::{compensated_sum, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Homogeneous,
    Heterogeneous,
    Qos,
    EqualShare,
    Capture,
    Enhanced,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Homogeneous => "homogeneous",
            Scheme::Heterogeneous => "heterogeneous",
            Scheme::Qos => "qos",
            Scheme::EqualShare => "equal_share",
            Scheme::Capture => "capture",
            Scheme::Enhanced => "enhanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub scheme: Scheme,
    pub expected_capacity: f64,
    pub p_idle: f64,
    pub p_collision: f64,
    pub p_utilized: f64,
    pub expected_delay_minislots: Option<f64>,
    pub thresholds: Thresholds,
    /// Predicted per-user share of utilized slots, when users differ.
    pub shares: Option<Vec<f64>>,
}

impl AnalyticReport {
    fn new(scheme: Scheme, capacity: f64, p_idle: f64, p_utilized: f64, thresholds: Thresholds) -> Self {
        Self {
            scheme,
            expected_capacity: capacity,
            p_idle,
            p_collision: (1.0 - p_idle - p_utilized).max(0.0),
            p_utilized,
            expected_delay_minislots: None,
            thresholds,
            shares: None,
        }
    }
}

/// Threshold `u_k` with `k` expected exceeders, then
/// `C = k e^-k (u_k + sigma a_K)`.
pub fn capacity_homogeneous(k_users: u64, k: f64, mu: f64, sigma: f64) -> Result<AnalyticReport> {
    let u = threshold_gaussian(k_users, k, mu, sigma)?;
    capacity_homogeneous_at(k_users, k, u, sigma)
}

/// Same formula at an arbitrary threshold `u`.
pub fn capacity_homogeneous_at(k_users: u64, k: f64, u: f64, sigma: f64) -> Result<AnalyticReport> {
    if !(k > 0.0) || !(k < k_users as f64) {
        return domain(format!("need 0 < k < K, got k={k}, K={k_users}"));
    }
    let (a, _) = std_constants(k_users as f64)?;
    let p_util = k * (-k).exp();
    Ok(AnalyticReport::new(
        Scheme::Homogeneous,
        p_util * (u + sigma * a),
        (-k).exp(),
        p_util,
        Thresholds::Global(u),
    ))
}

/// Single-exceedance capacity at a global threshold with heterogeneous users.
pub fn capacity_heterogeneous(u: f64, profiles: &[UserProfile]) -> Result<AnalyticReport> {
    capacity_heterogeneous_with(u, profiles, RateModel::Evt)
}

pub fn capacity_heterogeneous_with(u: f64, profiles: &[UserProfile], model: RateModel) -> Result<AnalyticReport> {
    capacity_heterogeneous_at(&Thresholds::Global(u), profiles, model)
}

/// Single-exceedance capacity with global or per-user thresholds.
pub fn capacity_heterogeneous_at(
    thresholds: &Thresholds,
    profiles: &[UserProfile],
    model: RateModel,
) -> Result<AnalyticReport> {
    let rates = total_rate_with(thresholds, profiles, model)?;
    single_exceedance(Scheme::Heterogeneous, &rates, profiles)
}

fn single_exceedance(scheme: Scheme, rates: &RateVector, profiles: &[UserProfile]) -> Result<AnalyticReport> {
    let k_users = rates.k_users;
    let (a, _) = std_constants(k_users as f64)?;
    let x = rates.mean_exceeders();
    let shares = if rates.total > 0.0 {
        rates.shares()
    } else {
        vec![0.0; profiles.len()]
    };
    let weighted = compensated_sum(
        shares
            .iter()
            .zip(profiles)
            .enumerate()
            .map(|(i, (w, p))| w * (rates.thresholds.at(i) + p.sigma * a)),
    );
    let p_util = x * (-x).exp();
    let mut r = AnalyticReport::new(scheme, p_util * weighted, (-x).exp(), p_util, rates.thresholds.clone());
    r.shares = Some(shares);
    Ok(r)
}

/// Per-user QoS thresholds and rates; every profile needs `qos_p`.
pub fn capacity_qos(profiles: &[UserProfile]) -> Result<AnalyticReport> {
    capacity_qos_with(profiles, RateModel::Evt)
}

pub fn capacity_qos_with(profiles: &[UserProfile], model: RateModel) -> Result<AnalyticReport> {
    if profiles.is_empty() {
        return domain("no user profiles");
    }
    let thresholds = profiles.iter().map(qos_threshold).collect::<Result<Vec<_>>>()?;
    let rates = total_rate_with(&Thresholds::PerUser(thresholds), profiles, model)?;
    single_exceedance(Scheme::Qos, &rates, profiles)
}

/// QoS with `p_i = 1/K` for every user.
pub fn capacity_equal_share(profiles: &[UserProfile]) -> Result<AnalyticReport> {
    if profiles.is_empty() {
        return domain("no user profiles");
    }
    let p = 1.0 / profiles.len() as f64;
    let with_p: Vec<_> = profiles.iter().map(|u| UserProfile { qos_p: Some(p), ..*u }).collect();
    let mut r = capacity_qos(&with_p)?;
    r.scheme = Scheme::EqualShare;
    Ok(r)
}

/// Mean of the larger of two independent exponentials with means `s_i`, `s_j`.
pub fn max_of_two_exponentials_mean(s_i: f64, s_j: f64) -> f64 {
    if s_i + s_j == 0.0 {
        return 0.0;
    }
    s_i + s_j - s_i * s_j / (s_i + s_j)
}

/// Above this many users the harmonic pair term is aggregated over strata.
pub const CAPTURE_EXACT_LIMIT: usize = 5000;
const CAPTURE_STRATA: usize = 2048;

/// Capacity when the receiver captures the stronger of two colliding users.
pub fn capacity_capture(u: f64, profiles: &[UserProfile]) -> Result<AnalyticReport> {
    capacity_capture_with(u, profiles, RateModel::Evt)
}

pub fn capacity_capture_with(u: f64, profiles: &[UserProfile], model: RateModel) -> Result<AnalyticReport> {
    let rates = total_rate_with(&Thresholds::Global(u), profiles, model)?;
    let single = single_exceedance(Scheme::Capture, &rates, profiles)?;
    let (a, _) = std_constants(rates.k_users as f64)?;
    let total = rates.total;
    if total == 0.0 {
        return Ok(single);
    }
    let lam = &rates.per_user;
    let sig: Vec<f64> = profiles.iter().map(|p| p.sigma).collect();
    // sum_{i<j} L_i L_j
    let sum_sq = compensated_sum(lam.iter().map(|l| l * l));
    let pair_mass = 0.5 * (total * total - sum_sq);
    // sum_{i<j} L_i L_j (s_i + s_j)
    let ls = compensated_sum(lam.iter().zip(&sig).map(|(l, s)| l * s));
    let lls = compensated_sum(lam.iter().zip(&sig).map(|(l, s)| l * l * s));
    let pair_sigma = ls * total - lls;
    let pair_harmonic = harmonic_pair_sum(lam, &sig);

    let weighted = (pair_mass * u + a * (pair_sigma - pair_harmonic)) / (total * total);
    let x = rates.mean_exceeders();
    let two = 0.5 * x * x * (-x).exp();
    let mut r = single;
    r.expected_capacity += two * 2.0 * weighted;
    r.p_utilized += two * 2.0 * pair_mass / (total * total);
    r.p_collision = (1.0 - r.p_idle - r.p_utilized).max(0.0);
    Ok(r)
}

/// `sum_{i<j} L_i L_j s_i s_j / (s_i + s_j)`.
///
/// Exact double loop up to [`CAPTURE_EXACT_LIMIT`] users. Beyond that,
/// users are sorted by scale and grouped into equal-count strata, each
/// represented by its rate-weighted mean scale.
fn harmonic_pair_sum(lam: &[f64], sig: &[f64]) -> f64 {
    let h = |s: f64, t: f64| if s + t > 0.0 { s * t / (s + t) } else { 0.0 };
    let n = lam.len();
    if n <= CAPTURE_EXACT_LIMIT {
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in i + 1..n {
                row += lam[j] * h(sig[i], sig[j]);
            }
            acc += lam[i] * row;
        }
        return acc;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[i].total_cmp(&sig[j]).then(i.cmp(&j)));
    let mut w = Vec::with_capacity(CAPTURE_STRATA);
    let mut w_sq = Vec::with_capacity(CAPTURE_STRATA);
    let mut s_bar = Vec::with_capacity(CAPTURE_STRATA);
    for s in 0..CAPTURE_STRATA {
        let lo = s * n / CAPTURE_STRATA;
        let hi = (s + 1) * n / CAPTURE_STRATA;
        let members = &order[lo..hi];
        let ws: f64 = members.iter().map(|&i| lam[i]).sum();
        let wq: f64 = members.iter().map(|&i| lam[i] * lam[i]).sum();
        let mean = if ws > 0.0 {
            members.iter().map(|&i| lam[i] * sig[i]).sum::<f64>() / ws
        } else {
            members.iter().map(|&i| sig[i]).sum::<f64>() / members.len().max(1) as f64
        };
        w.push(ws);
        w_sq.push(wq);
        s_bar.push(mean);
    }
    let mut acc = 0.0;
    for s in 0..CAPTURE_STRATA {
        acc += 0.5 * (w[s] * w[s] - w_sq[s]) * h(s_bar[s], s_bar[s]);
        let mut row = 0.0;
        for t in s + 1..CAPTURE_STRATA {
            row += w[t] * h(s_bar[s], s_bar[t]);
        }
        acc += w[s] * row;
    }
    acc
}

/// Capture capacity for `K` identical users with `k` expected exceeders
/// at the Gaussian-quantile threshold `u_k`:
/// `k e^-k (u_k + sigma a_K) + (1 - 1/K)(k^2/2) e^-k (u_k + 1.5 sigma a_K)`.
pub fn capacity_capture_homogeneous(k_users: u64, k: f64, mu: f64, sigma: f64) -> Result<AnalyticReport> {
    let base = capacity_homogeneous(k_users, k, mu, sigma)?;
    let u = base.thresholds.at(0);
    let (a, _) = std_constants(k_users as f64)?;
    let pair_w = 1.0 - 1.0 / k_users as f64;
    let two = 0.5 * k * k * (-k).exp() * pair_w;
    let mut r = base;
    r.scheme = Scheme::Capture;
    r.expected_capacity += two * (u + max_of_two_exponentials_mean(sigma * a, sigma * a));
    r.p_utilized += two;
    r.p_collision = (1.0 - r.p_idle - r.p_utilized).max(0.0);
    Ok(r)
}

/// Bin offsets `t_j = a_K ln(l/j)`, `j = 1..=l`, descending to `t_l = 0`.
/// Bin `j` holds excesses in `[t_j, t_{j-1})` with `t_0 = inf`.
pub fn bin_boundaries(l: u32, k_users: u64) -> Result<Vec<f64>> {
    if l < 1 {
        return domain("need l >= 1 bins");
    }
    let (a, _) = std_constants(k_users as f64)?;
    let lf = l as f64;
    Ok((1..=l).map(|j| a * (lf / j as f64).ln()).collect())
}

/// Bin index (1-based) of an excess, given the boundaries from
/// [`bin_boundaries`]. A value exactly on a boundary goes to the lower index.
pub fn bin_index(excess: f64, boundaries: &[f64]) -> u32 {
    // boundaries descend; find the first j with excess >= t_j
    let j = boundaries.partition_point(|&t| excess < t);
    (j + 1).min(boundaries.len()) as u32
}

/// `Binomial(n, p)` pmf terms `(m, P(m))`, walked outward from the mode and
/// truncated once terms drop below `1e-15`.
///
/// Terms come from the ratio recurrence relative to the mode and are then
/// normalized, which avoids the `lgamma` cancellation at large `n`.
pub fn binomial_terms(n: u64, p: f64) -> Vec<(u64, f64)> {
    const CUT: f64 = 1e-15;
    if p <= 0.0 {
        return vec![(0, 1.0)];
    }
    if p >= 1.0 {
        return vec![(n, 1.0)];
    }
    let nf = n as f64;
    let odds = p / (1.0 - p);
    let mode = (((nf + 1.0) * p).floor() as u64).min(n);
    let mf = mode as f64;
    let mode_pmf =
        (ln_gamma(nf + 1.0) - ln_gamma(mf + 1.0) - ln_gamma(nf - mf + 1.0) + mf * p.ln() + (nf - mf) * (-p).ln_1p())
            .exp();
    let cut = CUT / mode_pmf;
    let mut below = Vec::new();
    let (mut m, mut t) = (mode, 1.0);
    while m > 0 {
        t *= m as f64 / ((n - m + 1) as f64 * odds);
        m -= 1;
        if t < cut {
            break;
        }
        below.push((m, t));
    }
    let mut out: Vec<(u64, f64)> = below.into_iter().rev().collect();
    out.push((mode, 1.0));
    let (mut m, mut t) = (mode, 1.0);
    while m < n {
        t *= (n - m) as f64 / (m + 1) as f64 * odds;
        m += 1;
        if t < cut {
            break;
        }
        out.push((m, t));
    }
    let total = compensated_sum(out.iter().map(|x| x.1));
    for x in &mut out {
        x.1 /= total;
    }
    out
}

fn check_enhanced(k_users: u64, k: f64, l: u32) -> Result<()> {
    if !(k > 0.0 && k <= k_users as f64) {
        return domain(format!("need 0 < k <= K, got k={k}, K={k_users}"));
    }
    if l < 1 {
        return domain("need l >= 1 bins");
    }
    Ok(())
}

/// Probability that the strongest occupied bin holds exactly one user,
/// with exceedances `Binomial(K, k/K)` and uniform bin assignment.
pub fn enhanced_utilized_prob(k_users: u64, k: f64, l: u32) -> Result<f64> {
    check_enhanced(k_users, k, l)?;
    let lf = l as f64;
    let terms = binomial_terms(k_users, k / k_users as f64);
    Ok(compensated_sum(terms.iter().filter(|t| t.0 >= 1).map(|&(m, pm)| {
        let e = (m - 1) as i32;
        let inner: f64 = (1..=l).map(|j| ((l - j) as f64 / lf).powi(e)).sum();
        pm * m as f64 / lf * inner
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionFree {
    /// `prod_{j=1}^{k-1} (1 - j/l)`.
    pub exact: f64,
    /// `exp(-k(k-1)/(2l))`.
    pub bound: f64,
}

/// Probability that `k` users land in distinct bins out of `l`.
pub fn collision_free_bound(k: u64, l: u64) -> Result<CollisionFree> {
    if k < 1 || l < 1 {
        return domain("need k >= 1 and l >= 1");
    }
    let lf = l as f64;
    let exact = if k > l {
        0.0
    } else {
        (1..k).map(|j| 1.0 - j as f64 / lf).product()
    };
    let kf = k as f64;
    Ok(CollisionFree {
        exact,
        bound: (-kf * (kf - 1.0) / (2.0 * lf)).exp(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBin {
    /// `sum_{j=1}^{l} sum_{m>=1} P(m) ((l-j)/l)^m`, which equals
    /// `E[J; m >= 1] - P(m >= 1)`.
    pub paper: f64,
    /// `E[J | m >= 1]`.
    pub conditional: f64,
    /// `E[J; m >= 1]`, counting idle slots as zero.
    pub unconditional: f64,
    /// `pmf[j-1] = P(J = j, m >= 1)`.
    pub pmf: Vec<f64>,
    /// `P(m >= 1)`.
    pub p_nonempty: f64,
}

/// Distribution of `J`, the strongest (lowest-index) occupied bin.
pub fn expected_max_bin(k_users: u64, k: f64, l: u32) -> Result<MaxBin> {
    check_enhanced(k_users, k, l)?;
    let lf = l as f64;
    let terms: Vec<_> = binomial_terms(k_users, k / k_users as f64)
        .into_iter()
        .filter(|t| t.0 >= 1)
        .collect();
    let p_nonempty = 1.0 - (k_users as f64 * (-k / k_users as f64).ln_1p()).exp();
    // P(J > j, m >= 1) for j = 0..=l
    let tail = |j: u32| -> f64 {
        let r = (l - j) as f64 / lf;
        compensated_sum(terms.iter().map(|&(m, pm)| pm * r.powi(m as i32)))
    };
    let tails: Vec<f64> = (0..=l).map(tail).collect();
    let pmf: Vec<f64> = (1..=l as usize).map(|j| tails[j - 1] - tails[j]).collect();
    let paper = compensated_sum(tails[1..].iter().copied());
    let unconditional = compensated_sum(tails[..l as usize].iter().copied());
    Ok(MaxBin {
        paper,
        conditional: unconditional / p_nonempty,
        unconditional,
        pmf,
        p_nonempty,
    })
}

/// Enhanced scheme with `l` bins and `k` expected exceeders: utilized
/// probability from the bin combinatorics, capacity `E[max of K]`, delay
/// `E[J | m >= 1]` mini-slots.
pub fn capacity_enhanced(k_users: u64, k: f64, l: u32, mu: f64, sigma: f64) -> Result<AnalyticReport> {
    let u = threshold_gaussian(k_users, k, mu, sigma)?;
    let p_util = enhanced_utilized_prob(k_users, k, l)?;
    let p_idle = (k_users as f64 * (-k / k_users as f64).ln_1p()).exp();
    let mut r = AnalyticReport::new(
        Scheme::Enhanced,
        expected_max(k_users, mu, sigma)?,
        p_idle,
        p_util,
        Thresholds::Global(u),
    );
    r.expected_delay_minislots = Some(expected_max_bin(k_users, k, l)?.conditional);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous(n: usize) -> Vec<UserProfile> {
        vec![UserProfile::new(0.0, 1.0).unwrap(); n]
    }

    fn sums_to_one(r: &AnalyticReport) {
        assert!((r.p_idle + r.p_collision + r.p_utilized - 1.0).abs() < 1e-9, "{r:?}");
        assert!(r.expected_capacity >= 0.0);
    }

    #[test]
    fn homogeneous_k1_values() {
        let r = capacity_homogeneous(1000, 1.0, 0.0, 1.0).unwrap();
        let e1 = (-1f64).exp();
        assert!((r.p_utilized - e1).abs() < 1e-15);
        assert!((r.p_idle - e1).abs() < 1e-15);
        let a = 1.0 / (2.0 * 1000f64.ln()).sqrt();
        let expect = e1 * (3.090_232_306_167_813_5 + a);
        assert!((r.expected_capacity - expect).abs() < 1e-12);
        assert!((r.expected_capacity - 1.2357).abs() < 1e-3);
        sums_to_one(&r);
        let tiny = capacity_homogeneous(1000, 1e-9, 0.0, 1.0).unwrap();
        assert!(tiny.expected_capacity < 1e-7);
        assert!(capacity_homogeneous(10, 10.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn homogeneous_optimum_near_k_one() {
        let cap = |k: f64| capacity_homogeneous(1000, k, 0.0, 1.0).unwrap().expected_capacity;
        let ints: Vec<f64> = (1..=10).map(|k| cap(k as f64)).collect();
        assert!(ints.windows(2).all(|w| w[0] > w[1]));
        // u_k itself falls with k, which pulls the continuous optimum just
        // below 1: 1 - k* ~ 1/(z (u + a)) with z = u_1 ~ 3.09 at K = 1000
        let best = (1..=500)
            .map(|i| i as f64 * 0.01)
            .map(|k| (k, cap(k)))
            .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!(best.0 > 0.85 && best.0 <= 1.0, "{best:?}");
        assert!((best.1 - cap(1.0)) / cap(1.0) < 0.01);
    }

    #[test]
    fn heterogeneous_reduces_to_homogeneous() {
        let profiles = homogeneous(1000);
        let u = 3.0;
        let het = capacity_heterogeneous(u, &profiles).unwrap();
        let k = crate::point_process::user_rate(u, &profiles[0], 1000).unwrap();
        let hom = capacity_homogeneous_at(1000, k, u, 1.0).unwrap();
        assert!(((het.expected_capacity - hom.expected_capacity) / hom.expected_capacity).abs() < 1e-12);
        assert!((het.p_utilized - hom.p_utilized).abs() < 1e-12);
        sums_to_one(&het);
    }

    #[test]
    fn equal_share_is_qos_special_case() {
        let profiles: Vec<_> = (0..20)
            .map(|i| UserProfile::new(1.0 + 0.1 * i as f64, 0.2 + 0.05 * i as f64).unwrap())
            .collect();
        let es = capacity_equal_share(&profiles).unwrap();
        let with_p: Vec<_> = profiles
            .iter()
            .map(|p| UserProfile {
                qos_p: Some(1.0 / 20.0),
                ..*p
            })
            .collect();
        let q = capacity_qos(&with_p).unwrap();
        assert_eq!(es.expected_capacity, q.expected_capacity);
        let shares = es.shares.unwrap();
        for s in &shares {
            assert!((s - 1.0 / 20.0).abs() < 1e-12);
        }
        sums_to_one(&q);
        assert!(capacity_qos(&profiles).is_err());
    }

    #[test]
    fn equal_share_two_users() {
        let profiles = [
            UserProfile::new(0.0, 1.0).unwrap(),
            UserProfile::new(10.0, 1.0).unwrap(),
        ];
        let r = capacity_equal_share(&profiles).unwrap();
        let (t0, t1) = (r.thresholds.at(0), r.thresholds.at(1));
        assert!((t1 - t0 - 10.0).abs() < 1e-12);
        let s = r.shares.unwrap();
        assert!((s[0] - s[1]).abs() < 1e-12);
    }

    #[test]
    fn max_of_two_values() {
        assert_eq!(max_of_two_exponentials_mean(1.0, 1.0), 1.5);
        assert!((max_of_two_exponentials_mean(2.0, 1e-12) - 2.0).abs() < 1e-11);
        assert_eq!(max_of_two_exponentials_mean(1.0, 3.0), 3.25);
    }

    #[test]
    fn capture_dominates_and_reduces() {
        let profiles: Vec<_> = (0..300)
            .map(|i| UserProfile::new(1.0 + (i % 7) as f64 * 0.1, 0.1 + (i % 11) as f64 * 0.2).unwrap())
            .collect();
        for u in [1.5, 2.5, 4.0] {
            let base = capacity_heterogeneous(u, &profiles).unwrap();
            let cap = capacity_capture(u, &profiles).unwrap();
            assert!(cap.expected_capacity >= base.expected_capacity);
            sums_to_one(&cap);
        }
        // identical users: pair term collapses to the homogeneous closed form
        let same = homogeneous(400);
        let u = 2.7;
        let cap = capacity_capture(u, &same).unwrap();
        let k = crate::point_process::user_rate(u, &same[0], 400).unwrap();
        let (a, _) = std_constants(400.0).unwrap();
        let single = k * (-k).exp() * (u + a);
        let two = 0.5 * k * k * (-k).exp() * (1.0 - 1.0 / 400.0) * (u + 1.5 * a);
        assert!(((cap.expected_capacity - single - two) / cap.expected_capacity).abs() < 1e-12);
    }

    #[test]
    fn capture_homogeneous_closed_form_matches_general() {
        let k_users = 500;
        let r = capacity_capture_homogeneous(k_users, 1.5, 0.0, 1.0).unwrap();
        let u = r.thresholds.at(0);
        let k: f64 = 1.5;
        let (a, _) = std_constants(k_users as f64).unwrap();
        let expect = k * (-k).exp() * (u + a) + 0.5 * k * k * (-k).exp() * (1.0 - 1.0 / 500.0) * (u + 1.5 * a);
        assert!((r.expected_capacity - expect).abs() < 1e-12);
        sums_to_one(&r);
    }

    #[test]
    fn stratified_harmonic_close_to_exact() {
        let n = 6000;
        let lam: Vec<f64> = (0..n).map(|i| 0.5 + ((i * 37) % 101) as f64 / 100.0).collect();
        let sig: Vec<f64> = (0..n).map(|i| 0.03 + ((i * 53) % 997) as f64 / 997.0 * 2.97).collect();
        let approx = harmonic_pair_sum(&lam, &sig);
        let h = |s: f64, t: f64| s * t / (s + t);
        let mut exact = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                exact += lam[i] * lam[j] * h(sig[i], sig[j]);
            }
        }
        assert!(((approx - exact) / exact).abs() < 1e-4, "{approx} {exact}");
    }

    #[test]
    fn bins_are_uniform_under_exponential_excess() {
        assert_eq!(bin_boundaries(1, 1000).unwrap(), vec![0.0]);
        let t = bin_boundaries(4, 1000).unwrap();
        let (a, _) = std_constants(1000.0).unwrap();
        for (j, tj) in t.iter().enumerate() {
            let s = (-tj / a).exp();
            assert!((s - (j + 1) as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_index_ties_go_low() {
        let t = bin_boundaries(4, 1000).unwrap();
        assert_eq!(bin_index(1e9, &t), 1);
        assert_eq!(bin_index(t[0], &t), 1);
        assert_eq!(bin_index(t[1], &t), 2);
        assert_eq!(bin_index(0.5 * (t[1] + t[2]), &t), 3);
        assert_eq!(bin_index(0.0, &t), 4);
    }

    #[test]
    fn binomial_terms_normalize() {
        for (n, p) in [(10, 0.3), (1000, 0.007), (1_000_000, 1e-6), (5, 0.999)] {
            let s: f64 = binomial_terms(n, p).iter().map(|t| t.1).sum();
            assert!((s - 1.0).abs() < 1e-12, "{n} {p} {s}");
        }
    }

    #[test]
    fn utilized_single_bin_is_exactly_one() {
        let (kk, k) = (50u64, 2.0);
        let p = k / kk as f64;
        let one = kk as f64 * p * (1.0 - p).powi(kk as i32 - 1);
        assert!((enhanced_utilized_prob(kk, k, 1).unwrap() - one).abs() < 1e-13);
    }

    #[test]
    fn utilized_increases_in_l() {
        let k = 1000f64.ln();
        let vals: Vec<f64> = [12, 24, 48, 96]
            .iter()
            .map(|&l| enhanced_utilized_prob(1000, k, l).unwrap())
            .collect();
        assert!(vals[2] >= 0.6);
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        let nonempty = 1.0 - (1.0 - k / 1000.0f64).powi(1000);
        assert!(vals[3] < nonempty);
    }

    #[test]
    fn collision_free_values() {
        let c = collision_free_bound(1, 5).unwrap();
        assert_eq!((c.exact, c.bound), (1.0, 1.0));
        let c = collision_free_bound(3, 10).unwrap();
        assert!((c.exact - 0.72).abs() < 1e-15);
        assert!((c.bound - (-0.3f64).exp()).abs() < 1e-15);
        let c = collision_free_bound(7, 49).unwrap();
        assert!((c.bound - (-3.0f64 / 7.0).exp()).abs() < 1e-15);
        assert!(c.exact < c.bound);
        assert_eq!(collision_free_bound(6, 5).unwrap().exact, 0.0);
    }

    #[test]
    fn max_bin_conventions() {
        let mb = expected_max_bin(20, 3.0, 1).unwrap();
        assert!(mb.paper.abs() < 1e-15);
        assert!((mb.conditional - 1.0).abs() < 1e-12);
        let mb = expected_max_bin(100, 2.0, 8).unwrap();
        let idle = (1.0 - 0.02f64).powi(100);
        let total: f64 = mb.pmf.iter().sum::<f64>() + idle;
        assert!((total - 1.0).abs() < 1e-10);
        assert!((mb.unconditional - mb.paper - mb.p_nonempty).abs() < 1e-12);
        let mean: f64 = mb.pmf.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum();
        assert!((mean - mb.unconditional).abs() < 1e-12);
    }

    #[test]
    fn enhanced_report_is_consistent() {
        let r = capacity_enhanced(1000, 7.0, 49, 0.0, 1.0).unwrap();
        sums_to_one(&r);
        assert!((r.expected_capacity - expected_max(1000, 0.0, 1.0).unwrap()).abs() < 1e-15);
        assert!(r.expected_delay_minislots.unwrap() > 1.0);
    }
}
