//! Slot-level Monte Carlo of threshold scheduling.
//!
//! # Random streams
//!
//! Every slot owns a ChaCha8 stream: the key comes from the scenario seed
//! and the stream id is the slot index, so slot `t` sees the same uniforms
//! however the run is split across threads. User `i` consumes the `i`-th
//! 64-bit word of its slot's stream. Uniforms are
//! `((x >> 12) + 0.5) * 2^-52`, strictly inside (0, 1).
//!
//! # Capacities
//!
//! A capacity is `C = mu + sigma * Q(U)` with `Q` the upper-tail normal
//! quantile, so `C > u` exactly when `U < S(z)`, `S` the normal survival
//! at the standardized threshold. Only exceeders need `Q`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{bin_boundaries, bin_index};
use crate::error::{Error, Result};
use crate::evt::{threshold_gaussian, threshold_gaussian_series, threshold_gumbel};
use crate::point_process::{qos_threshold, solve_global_threshold, RateModel, UserProfile};
use crate::special::{normal_isf, normal_sf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Exact Gaussian quantile with `k` expected exceeders, per user.
    GaussianExact,
    /// Truncated series approximation of the same quantile.
    GaussianSeries,
    /// Block-maxima return level.
    Gumbel,
    /// One fixed threshold for every user.
    Explicit(f64),
    /// Each user's QoS return level.
    PerUserQos,
    /// One global threshold with `Lambda_T / K = k` under the EVT rates.
    EvtRate,
}

impl ThresholdRule {
    pub fn name(&self) -> String {
        match self {
            ThresholdRule::GaussianExact => "gaussian_exact".into(),
            ThresholdRule::GaussianSeries => "gaussian_series".into(),
            ThresholdRule::Gumbel => "gumbel".into(),
            ThresholdRule::Explicit(u) => format!("explicit({u})"),
            ThresholdRule::PerUserQos => "per_user_qos".into(),
            ThresholdRule::EvtRate => "evt_rate".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Baseline,
    Capture,
    Enhanced,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::Capture => "capture",
            SchemeKind::Enhanced => "enhanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Homogeneous {
        mu: f64,
        sigma: f64,
    },
    /// `sigma_i ~ U[sigma.0, sigma.1]`, `mu_i ~ U[mu.0, mu.1]`, drawn per user
    /// (sigma first) from a ChaCha8 stream keyed by `seed`.
    Uniform {
        mu: (f64, f64),
        sigma: (f64, f64),
        seed: u64,
    },
    Explicit(Vec<UserProfile>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QosSpec {
    None,
    /// `p_i = 1/K`.
    EqualShare,
    Constant(f64),
    /// `p_i = i / (K(K+1)/2)` for `i = 1..=K`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KTarget {
    Value(f64),
    /// `ceil(ln K)`.
    CeilLnK,
}

impl KTarget {
    pub fn resolve(&self, k_users: u64) -> f64 {
        match self {
            KTarget::Value(k) => *k,
            KTarget::CeilLnK => (k_users as f64).ln().ceil(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bins {
    Value(u32),
    /// `l = k^2` with `k` the resolved target.
    KSquared,
}

/// How an exceeder picks its mini-slot bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinRule {
    /// Standardized excess against `a_K ln(l/j)` boundaries.
    #[default]
    Evt,
    /// Exact conditional tail quantile: bin `floor(l U / S(z)) + 1`, which is
    /// uniform over the bins for Gaussian capacities.
    ExactTail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub k_users: u64,
    pub scheme: SchemeKind,
    pub threshold_rule: ThresholdRule,
    pub k_target: KTarget,
    pub bins: Option<Bins>,
    pub bin_rule: BinRule,
    pub rate_model: RateModel,
    pub slots: u64,
    pub seed: u64,
    pub profiles: ProfileSpec,
    pub qos: QosSpec,
}

impl ScenarioConfig {
    pub const DEFAULT_SLOTS: u64 = 100_000;

    /// Minimal config with documented defaults.
    pub fn new(k_users: u64, scheme: SchemeKind, profiles: ProfileSpec) -> Self {
        Self {
            id: "scenario".into(),
            k_users,
            scheme,
            threshold_rule: ThresholdRule::GaussianExact,
            k_target: KTarget::Value(1.0),
            bins: None,
            bin_rule: BinRule::Evt,
            rate_model: RateModel::Evt,
            slots: Self::DEFAULT_SLOTS,
            seed: 0,
            profiles,
            qos: QosSpec::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.k_users < 2 {
            return bad(format!("K must be >= 2, got {}", self.k_users));
        }
        if self.slots < 1 {
            return bad("slots must be >= 1".into());
        }
        if self.bins.is_some() && self.scheme != SchemeKind::Enhanced {
            return bad("l requires scheme=enhanced".into());
        }
        if self.scheme == SchemeKind::Enhanced && self.bins.is_none() {
            return bad("scheme=enhanced requires l".into());
        }
        if let Some(Bins::Value(0)) = self.bins {
            return bad("l must be >= 1".into());
        }
        let k = self.k_target.resolve(self.k_users);
        if !(k > 0.0) || !k.is_finite() {
            return bad(format!("k must be positive, got {k}"));
        }
        match self.threshold_rule {
            ThresholdRule::GaussianExact | ThresholdRule::GaussianSeries if k >= self.k_users as f64 => {
                return bad(format!("k = {k} must be below K = {}", self.k_users));
            }
            ThresholdRule::PerUserQos if self.qos == QosSpec::None => {
                return bad("threshold_rule=per_user_qos requires a qos setting".into());
            }
            ThresholdRule::Explicit(u) if u.is_nan() => return bad("explicit threshold is NaN".into()),
            _ => {}
        }
        match &self.profiles {
            ProfileSpec::Homogeneous { mu, sigma } => check_profile(*mu, *sigma)?,
            ProfileSpec::Uniform { mu, sigma, .. } => {
                if !(mu.0 <= mu.1) || !(sigma.0 <= sigma.1) {
                    return bad("uniform ranges need lo <= hi".into());
                }
                check_profile(mu.0, sigma.0)?;
                check_profile(mu.1, sigma.1)?;
            }
            ProfileSpec::Explicit(v) => {
                if v.len() as u64 != self.k_users {
                    return bad(format!("{} explicit profiles for K = {}", v.len(), self.k_users));
                }
                for p in v {
                    p.validate().map_err(|e| Error::Validation(e.to_string()))?;
                }
            }
        }
        match self.qos {
            QosSpec::Constant(p) if !(p > 0.0 && p < 1.0) => {
                return bad(format!("qos constant must be in (0,1), got {p}"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self.profiles, ProfileSpec::Homogeneous { .. }) && self.qos != QosSpec::Linear
    }

    /// Profiles with the QoS probabilities attached.
    pub fn materialize_profiles(&self) -> Result<Vec<UserProfile>> {
        let n = self.k_users as usize;
        let mut profiles = match &self.profiles {
            ProfileSpec::Homogeneous { mu, sigma } => vec![UserProfile::new(*mu, *sigma)?; n],
            ProfileSpec::Uniform { mu, sigma, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| {
                        let s = sigma.0 + (sigma.1 - sigma.0) * uniform(rng.next_u64());
                        let m = mu.0 + (mu.1 - mu.0) * uniform(rng.next_u64());
                        UserProfile::new(m, s)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            ProfileSpec::Explicit(v) => v.clone(),
        };
        let kf = self.k_users as f64;
        for (i, p) in profiles.iter_mut().enumerate() {
            p.qos_p = match self.qos {
                QosSpec::None => p.qos_p,
                QosSpec::EqualShare => Some(1.0 / kf),
                QosSpec::Constant(c) => Some(c),
                QosSpec::Linear => Some((i + 1) as f64 / (kf * (kf + 1.0) / 2.0)),
            };
            p.validate()?;
        }
        Ok(profiles)
    }

    /// Resolve profiles, thresholds and bins.
    pub fn materialize(&self) -> Result<Materialized> {
        self.validate()?;
        let profiles = self.materialize_profiles()?;
        let k = self.k_target.resolve(self.k_users);
        let kk = self.k_users;
        let thresholds: Vec<f64> = match self.threshold_rule {
            ThresholdRule::GaussianExact => per_user(&profiles, |p| threshold_gaussian(kk, k, p.mu, p.sigma))?,
            ThresholdRule::GaussianSeries => per_user(&profiles, |p| threshold_gaussian_series(kk, k, p.mu, p.sigma))?,
            ThresholdRule::Gumbel => per_user(&profiles, |p| threshold_gumbel(kk, k, p.mu, p.sigma))?,
            ThresholdRule::Explicit(u) => vec![u; profiles.len()],
            ThresholdRule::PerUserQos => per_user(&profiles, qos_threshold)?,
            ThresholdRule::EvtRate => {
                let u = solve_global_threshold(&profiles, k, RateModel::Evt)?;
                vec![u; profiles.len()]
            }
        };
        let survival = profiles
            .iter()
            .zip(&thresholds)
            .map(|(p, &u)| normal_sf(p.z(u)))
            .collect();
        let l = match self.bins {
            None => None,
            Some(Bins::Value(l)) => Some(l),
            Some(Bins::KSquared) => Some((k * k).round() as u32),
        };
        let boundaries = match l {
            Some(l) => bin_boundaries(l, kk)?,
            None => Vec::new(),
        };
        Ok(Materialized {
            scheme: self.scheme,
            profiles,
            thresholds,
            survival,
            k,
            l,
            boundaries,
            bin_rule: self.bin_rule,
            seed: self.seed,
        })
    }
}

fn check_profile(mu: f64, sigma: f64) -> Result<()> {
    UserProfile::new(mu, sigma)
        .map(|_| ())
        .map_err(|e| Error::Validation(e.to_string()))
}

fn per_user(profiles: &[UserProfile], f: impl Fn(&UserProfile) -> Result<f64>) -> Result<Vec<f64>> {
    // identical users share one evaluation
    if profiles.windows(2).all(|w| w[0] == w[1]) {
        let u = f(&profiles[0]).map_err(config_err)?;
        return Ok(vec![u; profiles.len()]);
    }
    profiles.iter().map(|p| f(p).map_err(config_err)).collect()
}

fn config_err(e: Error) -> Error {
    Error::Config(format!("threshold rule cannot be resolved: {e}"))
}

/// A scenario with everything the slot loop needs precomputed.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub scheme: SchemeKind,
    pub profiles: Vec<UserProfile>,
    pub thresholds: Vec<f64>,
    /// Per-user exceedance probability `S(z_i)`.
    pub survival: Vec<f64>,
    pub k: f64,
    pub l: Option<u32>,
    /// Standardized excess boundaries, `a_K ln(l/j)`.
    pub boundaries: Vec<f64>,
    pub bin_rule: BinRule,
    pub seed: u64,
}

impl Materialized {
    pub fn k_users(&self) -> usize {
        self.profiles.len()
    }

    /// The single threshold if all users share one.
    pub fn global_threshold(&self) -> Option<f64> {
        let u = self.thresholds[0];
        self.thresholds.iter().all(|&v| v == u).then_some(u)
    }
}

#[inline]
pub fn uniform(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn slot_rng(seed: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(slot);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    Idle,
    Utilized,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub kind: OutcomeKind,
    pub winner: Option<usize>,
    pub capacity: Option<f64>,
    /// Winning bin (enhanced scheme).
    pub delay_minislots: Option<u32>,
    /// Strongest occupied bin, whether or not the slot was utilized.
    pub lowest_bin: Option<u32>,
    pub exceeders: u32,
}

/// One exceeder seen in a slot.
#[derive(Debug, Clone, Copy)]
struct Hit {
    user: usize,
    capacity: f64,
    bin: u32,
}

fn capacity_of(m: &Materialized, i: usize, x: f64) -> f64 {
    let p = &m.profiles[i];
    let u = m.thresholds[i];
    // x < S(z) <= 1/2 is never 0 or 1, so the quantile exists
    let c = p.mu + p.sigma * normal_isf(x).unwrap_or(f64::INFINITY);
    if c > u {
        c
    } else {
        u.next_up()
    }
}

/// Simulate slot `slot` of a materialized scenario.
pub fn simulate_slot(m: &Materialized, slot: u64) -> SlotOutcome {
    let mut rng = slot_rng(m.seed, slot);
    simulate_slot_with(m, &mut rng, &mut |_, _| {})
}

fn simulate_slot_with(m: &Materialized, rng: &mut ChaCha8Rng, on_excess: &mut dyn FnMut(usize, f64)) -> SlotOutcome {
    let mut n_exc = 0u32;
    // best and second-best by the scheme's ordering
    let mut first: Option<Hit> = None;
    let mut second: Option<Hit> = None;
    let mut lowest_count = 0u32;
    for i in 0..m.survival.len() {
        let x = uniform(rng.next_u64());
        if x >= m.survival[i] {
            continue;
        }
        n_exc += 1;
        let c = capacity_of(m, i, x);
        on_excess(i, c - m.thresholds[i]);
        match m.scheme {
            SchemeKind::Baseline => {
                if first.is_none() {
                    first = Some(Hit {
                        user: i,
                        capacity: c,
                        bin: 0,
                    });
                }
            }
            SchemeKind::Capture => {
                let hit = Hit {
                    user: i,
                    capacity: c,
                    bin: 0,
                };
                match first {
                    Some(f) if f.capacity >= c => {
                        if second.is_none_or(|s| s.capacity < c) {
                            second = Some(hit);
                        }
                    }
                    _ => {
                        second = first;
                        first = Some(hit);
                    }
                }
            }
            SchemeKind::Enhanced => {
                let bin = enhanced_bin(m, i, x, c);
                match first {
                    Some(f) if f.bin < bin => {}
                    Some(f) if f.bin == bin => lowest_count += 1,
                    _ => {
                        first = Some(Hit {
                            user: i,
                            capacity: c,
                            bin,
                        });
                        lowest_count = 1;
                    }
                }
            }
        }
    }
    let idle = SlotOutcome {
        kind: OutcomeKind::Idle,
        winner: None,
        capacity: None,
        delay_minislots: None,
        lowest_bin: None,
        exceeders: 0,
    };
    let Some(best) = first else {
        return idle;
    };
    let won = match m.scheme {
        SchemeKind::Baseline => n_exc == 1,
        SchemeKind::Capture => n_exc <= 2,
        SchemeKind::Enhanced => lowest_count == 1,
    };
    let enhanced = m.scheme == SchemeKind::Enhanced;
    SlotOutcome {
        kind: if won {
            OutcomeKind::Utilized
        } else {
            OutcomeKind::Collision
        },
        winner: won.then_some(best.user),
        capacity: won.then_some(best.capacity),
        delay_minislots: (won && enhanced).then_some(best.bin),
        lowest_bin: enhanced.then_some(best.bin),
        exceeders: n_exc,
    }
}

fn enhanced_bin(m: &Materialized, i: usize, x: f64, c: f64) -> u32 {
    let l = m.boundaries.len() as u32;
    match m.bin_rule {
        BinRule::Evt => {
            let z_excess = (c - m.thresholds[i]) / m.profiles[i].sigma;
            bin_index(z_excess, &m.boundaries)
        }
        BinRule::ExactTail => {
            let q = x / m.survival[i];
            ((q * l as f64) as u32 + 1).min(l)
        }
    }
}

/// Exceeder-count histogram width; the last bucket collects the overflow.
pub const EXCEED_HIST_LEN: usize = 128;

/// Aggregated outcomes of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub n_slots: u64,
    pub idle: u64,
    pub utilized: u64,
    pub collision: u64,
    pub capacity_sum: f64,
    pub capacity_sq_sum: f64,
    pub exceeders_sum: u64,
    pub wins: Vec<u64>,
    /// `delay_hist[j]`: utilized slots won in bin `j` (enhanced).
    pub delay_hist: Vec<u64>,
    /// `lowest_bin_hist[j]`: non-idle slots whose strongest occupied bin is `j`.
    pub lowest_bin_hist: Vec<u64>,
    /// `exceed_hist[n]`: slots with `n` exceeders.
    pub exceed_hist: Vec<u64>,
}

impl SimStats {
    pub fn empty(k_users: usize, l: Option<u32>) -> Self {
        let bins = l.map(|l| l as usize + 1).unwrap_or(0);
        Self {
            n_slots: 0,
            idle: 0,
            utilized: 0,
            collision: 0,
            capacity_sum: 0.0,
            capacity_sq_sum: 0.0,
            exceeders_sum: 0,
            wins: vec![0; k_users],
            delay_hist: vec![0; bins],
            lowest_bin_hist: vec![0; bins],
            exceed_hist: vec![0; EXCEED_HIST_LEN],
        }
    }

    pub fn record(&mut self, o: &SlotOutcome) {
        self.n_slots += 1;
        self.exceeders_sum += o.exceeders as u64;
        self.exceed_hist[(o.exceeders as usize).min(EXCEED_HIST_LEN - 1)] += 1;
        if let Some(b) = o.lowest_bin {
            self.lowest_bin_hist[b as usize] += 1;
        }
        match o.kind {
            OutcomeKind::Idle => self.idle += 1,
            OutcomeKind::Collision => self.collision += 1,
            OutcomeKind::Utilized => {
                self.utilized += 1;
                let c = o.capacity.unwrap_or(0.0);
                self.capacity_sum += c;
                self.capacity_sq_sum += c * c;
                if let Some(w) = o.winner {
                    self.wins[w] += 1;
                }
                if let Some(d) = o.delay_minislots {
                    self.delay_hist[d as usize] += 1;
                }
            }
        }
    }

    /// Fold `other` into `self`. Counts add exactly; float sums add in call order.
    pub fn merge(&mut self, other: &SimStats) {
        self.n_slots += other.n_slots;
        self.idle += other.idle;
        self.utilized += other.utilized;
        self.collision += other.collision;
        self.capacity_sum += other.capacity_sum;
        self.capacity_sq_sum += other.capacity_sq_sum;
        self.exceeders_sum += other.exceeders_sum;
        add_into(&mut self.wins, &other.wins);
        add_into(&mut self.delay_hist, &other.delay_hist);
        add_into(&mut self.lowest_bin_hist, &other.lowest_bin_hist);
        add_into(&mut self.exceed_hist, &other.exceed_hist);
    }

    fn frac(&self, c: u64) -> f64 {
        c as f64 / self.n_slots as f64
    }

    fn prop_half_width(&self, c: u64) -> f64 {
        let p = self.frac(c);
        Z95 * (p * (1.0 - p) / self.n_slots as f64).sqrt()
    }

    pub fn p_idle(&self) -> f64 {
        self.frac(self.idle)
    }
    pub fn p_utilized(&self) -> f64 {
        self.frac(self.utilized)
    }
    pub fn p_collision(&self) -> f64 {
        self.frac(self.collision)
    }
    pub fn p_idle_half_width(&self) -> f64 {
        self.prop_half_width(self.idle)
    }
    pub fn p_utilized_half_width(&self) -> f64 {
        self.prop_half_width(self.utilized)
    }
    pub fn p_collision_half_width(&self) -> f64 {
        self.prop_half_width(self.collision)
    }

    /// Mean capacity per slot, idle and collided slots counting zero.
    pub fn mean_capacity(&self) -> f64 {
        self.capacity_sum / self.n_slots as f64
    }

    /// 95% normal-approximation half-width of [`Self::mean_capacity`].
    pub fn capacity_half_width(&self) -> f64 {
        let n = self.n_slots as f64;
        if n < 2.0 {
            return f64::NAN;
        }
        let mean = self.mean_capacity();
        let var = ((self.capacity_sq_sum - n * mean * mean) / (n - 1.0)).max(0.0);
        Z95 * (var / n).sqrt()
    }

    pub fn mean_exceeders(&self) -> f64 {
        self.exceeders_sum as f64 / self.n_slots as f64
    }

    /// Mean winning bin over utilized slots.
    pub fn mean_delay(&self) -> Option<f64> {
        hist_mean(&self.delay_hist)
    }

    /// Mean strongest occupied bin over non-idle slots.
    pub fn mean_lowest_bin(&self) -> Option<f64> {
        hist_mean(&self.lowest_bin_hist)
    }

    /// Half-width for [`Self::mean_lowest_bin`].
    pub fn lowest_bin_half_width(&self) -> Option<f64> {
        let n: u64 = self.lowest_bin_hist.iter().sum();
        if n < 2 {
            return None;
        }
        let mean = hist_mean(&self.lowest_bin_hist)?;
        let ss: f64 = self
            .lowest_bin_hist
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * (j as f64 - mean).powi(2))
            .sum();
        Some(Z95 * (ss / (n as f64 - 1.0) / n as f64).sqrt())
    }

    /// Per-user fraction of utilized slots.
    pub fn win_fractions(&self) -> Vec<f64> {
        let total = self.utilized.max(1) as f64;
        self.wins.iter().map(|&w| w as f64 / total).collect()
    }

    /// Empirical pmf of the exceeder count.
    pub fn exceed_pmf(&self) -> Vec<f64> {
        self.exceed_hist.iter().map(|&c| self.frac(c)).collect()
    }
}

const Z95: f64 = 1.959_963_984_540_054;

fn add_into(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn hist_mean(h: &[u64]) -> Option<f64> {
    let n: u64 = h.iter().sum();
    if n == 0 {
        return None;
    }
    let s: u64 = h.iter().enumerate().map(|(j, &c)| j as u64 * c).sum();
    Some(s as f64 / n as f64)
}

/// Slots per statistics chunk; merge order is by chunk index.
pub const CHUNK_SLOTS: u64 = 4096;

fn run_chunk(m: &Materialized, lo: u64, hi: u64) -> SimStats {
    let mut stats = SimStats::empty(m.k_users(), m.l);
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    for slot in lo..hi {
        rng.set_stream(slot);
        rng.set_word_pos(0);
        stats.record(&simulate_slot_with(m, &mut rng, &mut |_, _| {}));
    }
    stats
}

/// Run `slots` slots of a materialized scenario on `threads` workers
/// (0 = all cores). The result does not depend on `threads`.
pub fn run_materialized(m: &Materialized, slots: u64, threads: usize) -> Result<SimStats> {
    let n_chunks = slots.div_ceil(CHUNK_SLOTS);
    let chunk = |c: u64| run_chunk(m, c * CHUNK_SLOTS, ((c + 1) * CHUNK_SLOTS).min(slots));
    let parts: Vec<SimStats> = if threads == 1 {
        (0..n_chunks).map(chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(chunk).collect())
    };
    let mut stats = SimStats::empty(m.k_users(), m.l);
    for p in &parts {
        stats.merge(p);
    }
    Ok(stats)
}

/// Run a scenario of any scheme.
pub fn run(config: &ScenarioConfig, threads: usize) -> Result<SimStats> {
    let m = config.materialize()?;
    run_materialized(&m, config.slots, threads)
}

fn run_scheme(config: &ScenarioConfig, want: SchemeKind) -> Result<SimStats> {
    if config.scheme != want {
        return Err(Error::Config(format!(
            "scheme is {}, expected {}",
            config.scheme.name(),
            want.name()
        )));
    }
    run(config, 1)
}

/// At most one exceeder transmits successfully.
pub fn run_baseline(config: &ScenarioConfig) -> Result<SimStats> {
    run_scheme(config, SchemeKind::Baseline)
}

/// Two exceeders: the stronger is received.
pub fn run_capture(config: &ScenarioConfig) -> Result<SimStats> {
    run_scheme(config, SchemeKind::Capture)
}

/// Exceeders wait for their bin's mini-slot; the strongest bin wins if it
/// holds exactly one user.
pub fn run_enhanced(config: &ScenarioConfig) -> Result<SimStats> {
    run_scheme(config, SchemeKind::Enhanced)
}

/// Uniform reservoir (Algorithm R) of excesses `C_i - u_i` over every
/// exceedance in the run. Replacement draws use a stream keyed by the
/// scenario seed but separate from the slot streams.
pub fn collect_excess_samples(config: &ScenarioConfig, cap: usize) -> Result<Vec<f64>> {
    let m = config.materialize()?;
    if cap == 0 {
        return Ok(Vec::new());
    }
    let mut reservoir = Vec::with_capacity(cap);
    let mut seen: u64 = 0;
    let mut pick = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5bd1_e995_a3c5_9ac3);
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    for slot in 0..config.slots {
        rng.set_stream(slot);
        rng.set_word_pos(0);
        simulate_slot_with(&m, &mut rng, &mut |_, excess| {
            seen += 1;
            if reservoir.len() < cap {
                reservoir.push(excess);
            } else {
                let j = pick.random_range(0..seen);
                if (j as usize) < cap {
                    reservoir[j as usize] = excess;
                }
            }
        });
    }
    Ok(reservoir)
}
