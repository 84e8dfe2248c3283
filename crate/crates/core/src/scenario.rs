//! Scenario files.
//!
//! ```text
//! # comments run to end of line
//! id = thr_alg_k1
//! K = 1000
//! scheme = baseline            # baseline | capture | enhanced
//! k = 1                        # number | ceil_ln_k
//! threshold_rule = gaussian_exact
//! #   gaussian_exact | gaussian_series | gumbel | explicit(<u>)
//! #   | per_user_qos | evt_rate
//! l = 49                       # enhanced only: number | k_squared
//! bin_rule = evt               # evt | exact_tail
//! rate_model = evt             # evt | exact_survival
//! slots = 100000
//! seed = 0
//!
//! [profiles]
//! kind = uniform               # homogeneous | uniform | explicit
//! mu = uniform(0.4142, 2.4142) # homogeneous: a number
//! sigma = uniform(0.03, 3)
//! profile_seed = 7             # uniform only
//! qos = none                   # none | equal_share | linear | <p>
//! # kind = explicit takes K lines of `user = <mu>, <sigma>[, <qos_p>]`
//! ```
//!
//! `K` and `scheme` are required. Defaults: `k = 1`,
//! `threshold_rule = gaussian_exact`, `bin_rule = evt`, `rate_model = evt`,
//! `slots = 100000`, `seed = 0`, `id = scenario`, profiles homogeneous
//! with `mu = 0`, `sigma = 1`, `qos = none`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::point_process::{RateModel, UserProfile};
use crate::sim::{BinRule, Bins, KTarget, ProfileSpec, QosSpec, ScenarioConfig, SchemeKind, ThresholdRule};

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| perr(line, format!("bad value for `{key}`: `{v}`")))
}

fn range(line: usize, key: &str, v: &str) -> Result<(f64, f64)> {
    let inner = v
        .strip_prefix("uniform(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| perr(line, format!("`{key}` must be uniform(lo, hi), got `{v}`")))?;
    let mut it = inner.split(',').map(str::trim);
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((num(line, key, a)?, num(line, key, b)?)),
        _ => Err(perr(line, format!("`{key}` must be uniform(lo, hi), got `{v}`"))),
    }
}

#[derive(Default)]
struct Draft {
    id: Option<String>,
    k_users: Option<u64>,
    scheme: Option<SchemeKind>,
    k: Option<KTarget>,
    rule: Option<ThresholdRule>,
    bins: Option<Bins>,
    bin_rule: Option<BinRule>,
    rate_model: Option<RateModel>,
    slots: Option<u64>,
    seed: Option<u64>,
    kind: Option<(usize, String)>,
    mu: Option<(usize, String)>,
    sigma: Option<(usize, String)>,
    profile_seed: Option<u64>,
    qos: Option<QosSpec>,
    users: Vec<UserProfile>,
}

fn set<T>(slot: &mut Option<T>, line: usize, key: &str, v: T) -> Result<()> {
    if slot.is_some() {
        return Err(perr(line, format!("duplicate key `{key}`")));
    }
    *slot = Some(v);
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut d = Draft::default();
    let mut in_profiles = false;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with('[') {
            if body != "[profiles]" {
                return Err(perr(line, format!("unknown section `{body}`")));
            }
            if in_profiles {
                return Err(perr(line, "duplicate section [profiles]"));
            }
            in_profiles = true;
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| perr(line, format!("expected `key = value`, got `{body}`")))?;
        if in_profiles {
            profile_key(&mut d, line, key, value)?;
        } else {
            top_key(&mut d, line, key, value)?;
        }
    }
    finish(d, last_line)
}

fn top_key(d: &mut Draft, line: usize, key: &str, v: &str) -> Result<()> {
    match key {
        "id" => set(&mut d.id, line, key, v.to_string()),
        "K" => set(&mut d.k_users, line, key, num(line, key, v)?),
        "scheme" => {
            let s = match v {
                "baseline" => SchemeKind::Baseline,
                "capture" => SchemeKind::Capture,
                "enhanced" => SchemeKind::Enhanced,
                _ => return Err(perr(line, format!("unknown scheme `{v}`"))),
            };
            set(&mut d.scheme, line, key, s)
        }
        "k" => {
            let k = if v == "ceil_ln_k" {
                KTarget::CeilLnK
            } else {
                KTarget::Value(num(line, key, v)?)
            };
            set(&mut d.k, line, key, k)
        }
        "threshold_rule" => {
            let r = match v {
                "gaussian_exact" => ThresholdRule::GaussianExact,
                "gaussian_series" => ThresholdRule::GaussianSeries,
                "gumbel" => ThresholdRule::Gumbel,
                "per_user_qos" => ThresholdRule::PerUserQos,
                "evt_rate" => ThresholdRule::EvtRate,
                _ => match v.strip_prefix("explicit(").and_then(|s| s.strip_suffix(')')) {
                    Some(u) => ThresholdRule::Explicit(num(line, key, u.trim())?),
                    None => return Err(perr(line, format!("unknown threshold_rule `{v}`"))),
                },
            };
            set(&mut d.rule, line, key, r)
        }
        "l" => {
            let b = if v == "k_squared" {
                Bins::KSquared
            } else {
                Bins::Value(num(line, key, v)?)
            };
            set(&mut d.bins, line, key, b)
        }
        "bin_rule" => {
            let b = match v {
                "evt" => BinRule::Evt,
                "exact_tail" => BinRule::ExactTail,
                _ => return Err(perr(line, format!("unknown bin_rule `{v}`"))),
            };
            set(&mut d.bin_rule, line, key, b)
        }
        "rate_model" => {
            let m = match v {
                "evt" => RateModel::Evt,
                "exact_survival" => RateModel::ExactSurvival,
                _ => return Err(perr(line, format!("unknown rate_model `{v}`"))),
            };
            set(&mut d.rate_model, line, key, m)
        }
        "slots" => set(&mut d.slots, line, key, num(line, key, v)?),
        "seed" => set(&mut d.seed, line, key, num(line, key, v)?),
        _ => Err(perr(line, format!("unknown key `{key}`"))),
    }
}

fn profile_key(d: &mut Draft, line: usize, key: &str, v: &str) -> Result<()> {
    match key {
        "kind" => set(&mut d.kind, line, key, (line, v.to_string())),
        "mu" => set(&mut d.mu, line, key, (line, v.to_string())),
        "sigma" => set(&mut d.sigma, line, key, (line, v.to_string())),
        "profile_seed" => set(&mut d.profile_seed, line, key, num(line, key, v)?),
        "qos" => {
            let q = match v {
                "none" => QosSpec::None,
                "equal_share" => QosSpec::EqualShare,
                "linear" => QosSpec::Linear,
                _ => QosSpec::Constant(num(line, key, v)?),
            };
            set(&mut d.qos, line, key, q)
        }
        "user" => {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if !(parts.len() == 2 || parts.len() == 3) {
                return Err(perr(line, "user = <mu>, <sigma>[, <qos_p>]"));
            }
            d.users.push(UserProfile {
                mu: num(line, key, parts[0])?,
                sigma: num(line, key, parts[1])?,
                qos_p: parts.get(2).map(|p| num(line, key, p)).transpose()?,
            });
            Ok(())
        }
        _ => Err(perr(line, format!("unknown key `{key}` in [profiles]"))),
    }
}

fn finish(d: Draft, last_line: usize) -> Result<ScenarioConfig> {
    let k_users = d.k_users.ok_or_else(|| perr(last_line, "missing required key `K`"))?;
    let scheme = d
        .scheme
        .ok_or_else(|| perr(last_line, "missing required key `scheme`"))?;
    let kind = d.kind.clone().unwrap_or((0, "homogeneous".into()));
    let profiles = match kind.1.as_str() {
        "homogeneous" => {
            let mu = scalar(&d.mu, "mu", 0.0)?;
            let sigma = scalar(&d.sigma, "sigma", 1.0)?;
            reject(d.profile_seed.is_some(), kind.0, "profile_seed requires kind = uniform")?;
            reject(!d.users.is_empty(), kind.0, "user lines require kind = explicit")?;
            ProfileSpec::Homogeneous { mu, sigma }
        }
        "uniform" => {
            let (ml, mv) = d.mu.clone().ok_or_else(|| perr(kind.0, "uniform profiles need `mu`"))?;
            let (sl, sv) = d
                .sigma
                .clone()
                .ok_or_else(|| perr(kind.0, "uniform profiles need `sigma`"))?;
            reject(!d.users.is_empty(), kind.0, "user lines require kind = explicit")?;
            ProfileSpec::Uniform {
                mu: range(ml, "mu", &mv)?,
                sigma: range(sl, "sigma", &sv)?,
                seed: d.profile_seed.unwrap_or(0),
            }
        }
        "explicit" => {
            reject(
                d.mu.is_some() || d.sigma.is_some(),
                kind.0,
                "explicit profiles take `user` lines only",
            )?;
            reject(d.profile_seed.is_some(), kind.0, "profile_seed requires kind = uniform")?;
            ProfileSpec::Explicit(d.users.clone())
        }
        other => return Err(perr(kind.0, format!("unknown profile kind `{other}`"))),
    };
    let config = ScenarioConfig {
        id: d.id.unwrap_or_else(|| "scenario".into()),
        k_users,
        scheme,
        threshold_rule: d.rule.unwrap_or(ThresholdRule::GaussianExact),
        k_target: d.k.unwrap_or(KTarget::Value(1.0)),
        bins: d.bins,
        bin_rule: d.bin_rule.unwrap_or_default(),
        rate_model: d.rate_model.unwrap_or_default(),
        slots: d.slots.unwrap_or(ScenarioConfig::DEFAULT_SLOTS),
        seed: d.seed.unwrap_or(0),
        profiles,
        qos: d.qos.unwrap_or(QosSpec::None),
    };
    config.validate()?;
    Ok(config)
}

fn scalar(v: &Option<(usize, String)>, key: &str, default: f64) -> Result<f64> {
    match v {
        None => Ok(default),
        Some((line, s)) => num(*line, key, s),
    }
}

fn reject(cond: bool, line: usize, msg: &str) -> Result<()> {
    if cond {
        Err(perr(line, msg))
    } else {
        Ok(())
    }
}

/// Canonical text form; [`parse_scenario`] reads it back to an equal config.
pub fn serialize_scenario(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
    kv("id", c.id.clone());
    kv("K", c.k_users.to_string());
    kv("scheme", c.scheme.name().into());
    kv(
        "k",
        match c.k_target {
            KTarget::Value(k) => k.to_string(),
            KTarget::CeilLnK => "ceil_ln_k".into(),
        },
    );
    kv("threshold_rule", c.threshold_rule.name());
    if let Some(b) = c.bins {
        kv(
            "l",
            match b {
                Bins::Value(l) => l.to_string(),
                Bins::KSquared => "k_squared".into(),
            },
        );
    }
    kv(
        "bin_rule",
        match c.bin_rule {
            BinRule::Evt => "evt",
            BinRule::ExactTail => "exact_tail",
        }
        .into(),
    );
    kv(
        "rate_model",
        match c.rate_model {
            RateModel::Evt => "evt",
            RateModel::ExactSurvival => "exact_survival",
        }
        .into(),
    );
    kv("slots", c.slots.to_string());
    kv("seed", c.seed.to_string());
    s.push_str("\n[profiles]\n");
    match &c.profiles {
        ProfileSpec::Homogeneous { mu, sigma } => {
            s.push_str(&format!("kind = homogeneous\nmu = {mu}\nsigma = {sigma}\n"));
        }
        ProfileSpec::Uniform { mu, sigma, seed } => {
            s.push_str(&format!(
                "kind = uniform\nmu = uniform({}, {})\nsigma = uniform({}, {})\nprofile_seed = {seed}\n",
                mu.0, mu.1, sigma.0, sigma.1
            ));
        }
        ProfileSpec::Explicit(users) => {
            s.push_str("kind = explicit\n");
            for u in users {
                match u.qos_p {
                    Some(p) => s.push_str(&format!("user = {}, {}, {p}\n", u.mu, u.sigma)),
                    None => s.push_str(&format!("user = {}, {}\n", u.mu, u.sigma)),
                }
            }
        }
    }
    let qos = match c.qos {
        QosSpec::None => "none".to_string(),
        QosSpec::EqualShare => "equal_share".into(),
        QosSpec::Linear => "linear".into(),
        QosSpec::Constant(p) => p.to_string(),
    };
    s.push_str(&format!("qos = {qos}\n"));
    s
}
