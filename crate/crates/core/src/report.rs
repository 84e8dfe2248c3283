//! Simulation-versus-analytic records, sweeps and report files.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    capacity_capture_homogeneous, capacity_capture_with, capacity_enhanced, capacity_heterogeneous_at,
    capacity_homogeneous_at, capacity_qos_with, AnalyticReport,
};
use crate::error::{Error, Result};
use crate::evt::expected_max;
use crate::point_process::{RateModel, Thresholds};
use crate::sim::{
    run_materialized, Bins, KTarget, Materialized, ProfileSpec, ScenarioConfig, SchemeKind, SimStats, ThresholdRule,
};

/// Floor on the denominator of relative errors.
pub const REL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    pub scheme: String,
    #[serde(rename = "K")]
    pub k_users: u64,
    pub k: f64,
    pub l: Option<u32>,
    pub threshold_rule: String,
    pub rate_model: String,
    pub slots: u64,
    pub seed: u64,
    /// Mean threshold over users.
    pub threshold: f64,
    pub analytic_capacity: f64,
    pub analytic_p_idle: f64,
    pub analytic_p_collision: f64,
    pub analytic_p_utilized: f64,
    pub analytic_expected_bin: Option<f64>,
    /// `E[max of K]` for identical users.
    pub expected_max: Option<f64>,
    pub sim_capacity: f64,
    pub sim_capacity_hw: f64,
    pub sim_p_idle: f64,
    pub sim_p_idle_hw: f64,
    pub sim_p_collision: f64,
    pub sim_p_collision_hw: f64,
    pub sim_p_utilized: f64,
    pub sim_p_utilized_hw: f64,
    /// Mean strongest occupied bin over non-idle slots.
    pub sim_expected_bin: Option<f64>,
    pub sim_expected_bin_hw: Option<f64>,
    pub rel_err_capacity: f64,
    pub rel_err_p_idle: f64,
    pub rel_err_p_collision: f64,
    pub rel_err_p_utilized: f64,
    pub rel_err_expected_bin: Option<f64>,
    /// Wall-clock seconds, recorded only on request so reruns stay byte-identical.
    pub runtime_s: Option<f64>,
}

/// CSV column order.
pub const CSV_HEADER: [&str; 32] = [
    "id",
    "scheme",
    "K",
    "k",
    "l",
    "threshold_rule",
    "rate_model",
    "slots",
    "seed",
    "threshold",
    "analytic_capacity",
    "analytic_p_idle",
    "analytic_p_collision",
    "analytic_p_utilized",
    "analytic_expected_bin",
    "expected_max",
    "sim_capacity",
    "sim_capacity_hw",
    "sim_p_idle",
    "sim_p_idle_hw",
    "sim_p_collision",
    "sim_p_collision_hw",
    "sim_p_utilized",
    "sim_p_utilized_hw",
    "sim_expected_bin",
    "sim_expected_bin_hw",
    "rel_err_capacity",
    "rel_err_p_idle",
    "rel_err_p_collision",
    "rel_err_p_utilized",
    "rel_err_expected_bin",
    "runtime_s",
];

pub fn rel_err(sim: f64, analytic: f64) -> f64 {
    (sim - analytic).abs() / analytic.abs().max(REL_EPS)
}

/// Closed-form prediction matching a scenario.
pub fn analytic_for(config: &ScenarioConfig, m: &Materialized) -> Result<AnalyticReport> {
    let kk = config.k_users;
    let model = config.rate_model;
    let homogeneous = match config.profiles {
        ProfileSpec::Homogeneous { mu, sigma } if config.is_homogeneous() => Some((mu, sigma)),
        _ => None,
    };
    let exact_rule = config.threshold_rule == ThresholdRule::GaussianExact;
    match config.scheme {
        SchemeKind::Baseline => {
            if config.threshold_rule == ThresholdRule::PerUserQos {
                return capacity_qos_with(&m.profiles, model);
            }
            match (homogeneous, exact_rule) {
                (Some((_, sigma)), true) => capacity_homogeneous_at(kk, m.k, m.thresholds[0], sigma),
                _ => heterogeneous(m, model),
            }
        }
        SchemeKind::Capture => match (homogeneous, exact_rule) {
            (Some((mu, sigma)), true) => capacity_capture_homogeneous(kk, m.k, mu, sigma),
            _ => {
                let u = m
                    .global_threshold()
                    .ok_or_else(|| Error::Validation("capture prediction needs one global threshold".into()))?;
                capacity_capture_with(u, &m.profiles, model)
            }
        },
        SchemeKind::Enhanced => {
            let (mu, sigma) = homogeneous
                .ok_or_else(|| Error::Validation("enhanced prediction needs homogeneous profiles".into()))?;
            if !exact_rule {
                return Err(Error::Validation(
                    "enhanced prediction needs threshold_rule=gaussian_exact".into(),
                ));
            }
            capacity_enhanced(kk, m.k, m.l.unwrap_or(1), mu, sigma)
        }
    }
}

fn heterogeneous(m: &Materialized, model: RateModel) -> Result<AnalyticReport> {
    let thresholds = match m.global_threshold() {
        Some(u) => Thresholds::Global(u),
        None => Thresholds::PerUser(m.thresholds.clone()),
    };
    capacity_heterogeneous_at(&thresholds, &m.profiles, model)
}

/// Check the config and everything its prediction needs, without simulating.
pub fn prepare(config: &ScenarioConfig) -> Result<(Materialized, AnalyticReport)> {
    let m = config.materialize()?;
    let a = analytic_for(config, &m)?;
    Ok((m, a))
}

pub fn build_record(
    config: &ScenarioConfig,
    m: &Materialized,
    a: &AnalyticReport,
    s: &SimStats,
    runtime_s: Option<f64>,
) -> ResultRecord {
    let expected_max = match config.profiles {
        ProfileSpec::Homogeneous { mu, sigma } => expected_max(config.k_users, mu, sigma).ok(),
        _ => None,
    };
    let sim_bin = s.mean_lowest_bin();
    let rel_bin = match (sim_bin, a.expected_delay_minislots) {
        (Some(x), Some(y)) => Some(rel_err(x, y)),
        _ => None,
    };
    ResultRecord {
        id: config.id.clone(),
        scheme: config.scheme.name().into(),
        k_users: config.k_users,
        k: m.k,
        l: m.l,
        threshold_rule: config.threshold_rule.name(),
        rate_model: match config.rate_model {
            RateModel::Evt => "evt".into(),
            RateModel::ExactSurvival => "exact_survival".into(),
        },
        slots: s.n_slots,
        seed: config.seed,
        threshold: m.thresholds.iter().sum::<f64>() / m.thresholds.len() as f64,
        analytic_capacity: a.expected_capacity,
        analytic_p_idle: a.p_idle,
        analytic_p_collision: a.p_collision,
        analytic_p_utilized: a.p_utilized,
        analytic_expected_bin: a.expected_delay_minislots,
        expected_max,
        sim_capacity: s.mean_capacity(),
        sim_capacity_hw: s.capacity_half_width(),
        sim_p_idle: s.p_idle(),
        sim_p_idle_hw: s.p_idle_half_width(),
        sim_p_collision: s.p_collision(),
        sim_p_collision_hw: s.p_collision_half_width(),
        sim_p_utilized: s.p_utilized(),
        sim_p_utilized_hw: s.p_utilized_half_width(),
        sim_expected_bin: sim_bin,
        sim_expected_bin_hw: s.lowest_bin_half_width(),
        rel_err_capacity: rel_err(s.mean_capacity(), a.expected_capacity),
        rel_err_p_idle: rel_err(s.p_idle(), a.p_idle),
        rel_err_p_collision: rel_err(s.p_collision(), a.p_collision),
        rel_err_p_utilized: rel_err(s.p_utilized(), a.p_utilized),
        rel_err_expected_bin: rel_bin,
        runtime_s,
    }
}

/// Simulate one scenario and compare with its prediction.
pub fn run_record(config: &ScenarioConfig, threads: usize, timing: bool) -> Result<ResultRecord> {
    let start = Instant::now();
    let (m, a) = prepare(config)?;
    let s = run_materialized(&m, config.slots, threads)?;
    let t = timing.then(|| start.elapsed().as_secs_f64());
    Ok(build_record(config, &m, &a, &s, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SmallK,
    BigK,
    L,
    Scheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<String>,
}

impl Sweep {
    /// `k=1,2,3`, `K=100,1000`, `l=4,8` or `scheme=baseline,capture`.
    /// An empty value list runs the base config once.
    pub fn parse(spec: &str) -> Result<Self> {
        let (axis, vals) = spec
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("sweep must be axis=values, got `{spec}`")))?;
        let axis = match axis.trim() {
            "k" => Axis::SmallK,
            "K" => Axis::BigK,
            "l" => Axis::L,
            "scheme" => Axis::Scheme,
            other => return Err(Error::Validation(format!("unknown sweep axis `{other}`"))),
        };
        let values = vals
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect();
        Ok(Self { axis, values })
    }

    fn apply(&self, base: &ScenarioConfig, v: &str) -> Result<ScenarioConfig> {
        let bad = || Error::Validation(format!("bad sweep value `{v}`"));
        let mut c = base.clone();
        match self.axis {
            Axis::SmallK => {
                c.k_target = if v == "ceil_ln_k" {
                    KTarget::CeilLnK
                } else {
                    KTarget::Value(v.parse().map_err(|_| bad())?)
                }
            }
            Axis::BigK => c.k_users = v.parse().map_err(|_| bad())?,
            Axis::L => {
                c.bins = Some(if v == "k_squared" {
                    Bins::KSquared
                } else {
                    Bins::Value(v.parse().map_err(|_| bad())?)
                })
            }
            Axis::Scheme => {
                c.scheme = match v {
                    "baseline" => SchemeKind::Baseline,
                    "capture" => SchemeKind::Capture,
                    "enhanced" => SchemeKind::Enhanced,
                    _ => return Err(bad()),
                }
            }
        }
        Ok(c)
    }
}

/// One record per grid point, in grid order. Every point is validated
/// before any simulation starts.
pub fn run_sweep(
    base: &ScenarioConfig,
    sweep: Option<&Sweep>,
    threads: usize,
    timing: bool,
) -> Result<Vec<ResultRecord>> {
    let configs = match sweep {
        Some(s) if !s.values.is_empty() => s.values.iter().map(|v| s.apply(base, v)).collect::<Result<Vec<_>>>()?,
        _ => vec![base.clone()],
    };
    let prepared = configs.iter().map(prepare).collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .zip(prepared)
        .map(|(c, (m, a))| {
            let start = Instant::now();
            let s = run_materialized(&m, c.slots, threads)?;
            let t = timing.then(|| start.elapsed().as_secs_f64());
            Ok(build_record(c, &m, &a, &s, t))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{}", round12(x))
    } else {
        String::new()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ResultRecord {
    /// Numbers rounded to 12 significant digits; non-finite values become empty.
    pub fn rounded(&self) -> Self {
        let r = |x: f64| round12(x);
        let o = |x: Option<f64>| x.filter(|v| v.is_finite()).map(round12);
        Self {
            k: r(self.k),
            threshold: r(self.threshold),
            analytic_capacity: r(self.analytic_capacity),
            analytic_p_idle: r(self.analytic_p_idle),
            analytic_p_collision: r(self.analytic_p_collision),
            analytic_p_utilized: r(self.analytic_p_utilized),
            analytic_expected_bin: o(self.analytic_expected_bin),
            expected_max: o(self.expected_max),
            sim_capacity: r(self.sim_capacity),
            sim_capacity_hw: r(self.sim_capacity_hw),
            sim_p_idle: r(self.sim_p_idle),
            sim_p_idle_hw: r(self.sim_p_idle_hw),
            sim_p_collision: r(self.sim_p_collision),
            sim_p_collision_hw: r(self.sim_p_collision_hw),
            sim_p_utilized: r(self.sim_p_utilized),
            sim_p_utilized_hw: r(self.sim_p_utilized_hw),
            sim_expected_bin: o(self.sim_expected_bin),
            sim_expected_bin_hw: o(self.sim_expected_bin_hw),
            rel_err_capacity: r(self.rel_err_capacity),
            rel_err_p_idle: r(self.rel_err_p_idle),
            rel_err_p_collision: r(self.rel_err_p_collision),
            rel_err_p_utilized: r(self.rel_err_p_utilized),
            rel_err_expected_bin: o(self.rel_err_expected_bin),
            runtime_s: o(self.runtime_s),
            ..self.clone()
        }
    }

    fn csv_row(&self) -> String {
        let fields = [
            csv_field(&self.id),
            self.scheme.clone(),
            self.k_users.to_string(),
            fmt_num(self.k),
            self.l.map(|l| l.to_string()).unwrap_or_default(),
            csv_field(&self.threshold_rule),
            self.rate_model.clone(),
            self.slots.to_string(),
            self.seed.to_string(),
            fmt_num(self.threshold),
            fmt_num(self.analytic_capacity),
            fmt_num(self.analytic_p_idle),
            fmt_num(self.analytic_p_collision),
            fmt_num(self.analytic_p_utilized),
            fmt_opt(self.analytic_expected_bin),
            fmt_opt(self.expected_max),
            fmt_num(self.sim_capacity),
            fmt_num(self.sim_capacity_hw),
            fmt_num(self.sim_p_idle),
            fmt_num(self.sim_p_idle_hw),
            fmt_num(self.sim_p_collision),
            fmt_num(self.sim_p_collision_hw),
            fmt_num(self.sim_p_utilized),
            fmt_num(self.sim_p_utilized_hw),
            fmt_opt(self.sim_expected_bin),
            fmt_opt(self.sim_expected_bin_hw),
            fmt_num(self.rel_err_capacity),
            fmt_num(self.rel_err_p_idle),
            fmt_num(self.rel_err_p_collision),
            fmt_num(self.rel_err_p_utilized),
            fmt_opt(self.rel_err_expected_bin),
            fmt_opt(self.runtime_s),
        ];
        fields.join(",")
    }
}

pub fn render_csv(records: &[ResultRecord]) -> String {
    let mut s = CSV_HEADER.join(",");
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn render_json(records: &[ResultRecord]) -> Result<String> {
    let rounded: Vec<_> = records.iter().map(ResultRecord::rounded).collect();
    let mut s = serde_json::to_string_pretty(&rounded).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))
}

pub fn render(records: &[ResultRecord], format: Format) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Validation("no records to emit".into()));
    }
    match format {
        Format::Csv => Ok(render_csv(records)),
        Format::Json => render_json(records),
    }
}

/// Write the report atomically: a sibling temp file is renamed into place.
pub fn emit_report(records: &[ResultRecord], format: Format, out: &Path) -> Result<()> {
    let body = render(records, format)?;
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = out
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", out.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, out)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(format!("{}: {e}", out.display()))
    })
}
