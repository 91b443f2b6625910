//! Exhaustive TGP parameter sweep, envelopes and trade-off extraction.
//!
//! Every parameter point sees the same channel realisations, drawn once from
//! the master seed. A point's sensing metrics come from one discrete FIM at
//! unit `K_FIM`, rescaled per SNR; its capacities from one eigendecomposition
//! per realisation, reused across SNRs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_samples, draw_realizations, summarize, Normalization};
use crate::channel::{ChannelModel, ChannelOptions, PathSet};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pulse::{sample_pulse, PulseKind, PulseParams};
use crate::sensing::{fim_discrete_impl, snr_to_kfim, DerivativeMethod, BOUNDARY_ENERGY_WARN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    Linear,
    Log,
}

/// Inclusive sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, scale: AxisScale::Linear }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, scale: AxisScale::Log }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("{name} axis: {why}")));
        if self.points == 0 {
            return bad("needs at least one point");
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return bad("bounds must be finite with min <= max");
        }
        if self.points == 1 && self.min != self.max {
            return bad("a single point needs min == max");
        }
        if self.scale == AxisScale::Log && self.min <= 0.0 {
            return bad("log scale needs positive bounds");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let u = i as f64 / last;
                match self.scale {
                    AxisScale::Linear => self.min + u * (self.max - self.min),
                    AxisScale::Log => {
                        let (a, b) = (self.min.log10(), self.max.log10());
                        10f64.powf(a + u * (b - a))
                    }
                }
            })
            .collect()
    }

    /// Coordinate in which the axis is uniform.
    fn coordinate(&self, x: f64) -> f64 {
        match self.scale {
            AxisScale::Linear => x,
            AxisScale::Log => x.log10(),
        }
    }

    /// Spacing between neighbours in [`Self::coordinate`] units.
    fn step(&self) -> f64 {
        if self.points < 2 {
            1.0
        } else {
            (self.coordinate(self.max) - self.coordinate(self.min)) / (self.points - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGridSpec {
    pub gamma: Axis,
    pub alpha_c: Axis,
    pub beta_c: Axis,
    pub snr_db: Vec<f64>,
}

impl Default for SweepGridSpec {
    fn default() -> Self {
        Self {
            gamma: Axis::log(0.01, 100.0, 20),
            alpha_c: Axis::linear(0.0, 50.0, 20),
            beta_c: Axis::linear(0.0, 10.0, 20),
            snr_db: vec![0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
        }
    }
}

impl SweepGridSpec {
    pub fn validate(&self) -> Result<()> {
        self.gamma.validate("gamma")?;
        self.alpha_c.validate("alpha_c")?;
        self.beta_c.validate("beta_c")?;
        if self.gamma.min <= 0.0 {
            return Err(Error::Config("gamma axis must be positive".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db must be a non-empty list of finite values".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gamma.points * self.alpha_c.points * self.beta_c.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in (gamma, alpha_c, beta_c) lexicographic order.
    pub fn points(&self) -> Vec<PulseParams> {
        let (a, b) = (self.alpha_c.values(), self.beta_c.values());
        self.gamma
            .values()
            .into_iter()
            .flat_map(|g| {
                let b = &b;
                a.iter().flat_map(move |&a| b.iter().map(move |&b| PulseParams { gamma: g, alpha_c: a, beta_c: b }))
            })
            .collect()
    }

    /// Points of the `i`-th gamma slice.
    pub fn slice(&self, i: usize) -> Vec<PulseParams> {
        let g = self.gamma.values()[i];
        let b = self.beta_c.values();
        self.alpha_c
            .values()
            .into_iter()
            .flat_map(|a| b.iter().map(move |&b| PulseParams { gamma: g, alpha_c: a, beta_c: b }))
            .collect()
    }

    /// Closest sweep point to `p` and its distance measured in axis steps
    /// (log10 steps for the gamma axis).
    pub fn nearest(&self, p: &PulseParams) -> (PulseParams, f64) {
        let pick = |axis: &Axis, x: f64| {
            let c = axis.coordinate(x);
            let step = axis.step();
            axis.values()
                .into_iter()
                .map(|v| (v, (axis.coordinate(v) - c) / step))
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("validated axes are non-empty")
        };
        let (g, dg) = pick(&self.gamma, p.gamma);
        let (a, da) = pick(&self.alpha_c, p.alpha_c);
        let (b, db) = pick(&self.beta_c, p.beta_c);
        let d = (dg * dg + da * da + db * db).sqrt();
        (PulseParams { gamma: g, alpha_c: a, beta_c: b }, d)
    }
}

/// Everything that determines a sweep's output. Missing fields take the
/// defaults of the ISAC study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: SweepGridSpec,
    pub comm_grid: GridSpec,
    pub sensing_grid: GridSpec,
    pub realizations: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub channel_model: ChannelModel,
    pub channel: ChannelOptions,
    /// `|h_T|` entering `K_FIM`.
    pub target_gain: f64,
    pub derivative: DerivativeMethod,
    /// Evaluate capacities.
    pub capacity: bool,
    /// Evaluate CRLBs.
    pub sensing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid: SweepGridSpec::default(),
            comm_grid: GridSpec::communication_default(),
            sensing_grid: GridSpec::sensing_default(),
            realizations: 160,
            normalization: Normalization::UnitAverageGain,
            seed: 2025,
            channel_model: ChannelModel::veh_a_default(),
            channel: ChannelOptions::default(),
            target_gain: 1.0,
            derivative: DerivativeMethod::Auto,
            capacity: true,
            sensing: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.comm_grid.validate()?;
        self.sensing_grid.validate()?;
        self.channel_model.validate()?;
        if self.capacity && self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if !(self.target_gain.is_finite() && self.target_gain > 0.0) {
            return Err(Error::Config("target_gain must be positive".into()));
        }
        Ok(())
    }

    /// Realisations shared by every pulse of the run.
    pub fn draw_realizations(&self) -> Result<Vec<PathSet>> {
        if !self.capacity {
            return Ok(Vec::new());
        }
        draw_realizations(&self.channel_model, self.seed, self.realizations)
    }
}

/// Metrics of one pulse at one SNR. Disabled or failed parts are NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub snr_db: f64,
    pub capacity_mean: f64,
    pub capacity_stderr: f64,
    pub crlb_tau_s2: f64,
    pub crlb_nu_hz2: f64,
    pub rho2: f64,
    pub q_det: f64,
}

/// One CSV row of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub gamma: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub snr_db: f64,
    pub capacity_mean: f64,
    pub capacity_stderr: f64,
    pub crlb_tau_s2: f64,
    pub crlb_nu_hz2: f64,
    pub rho2: f64,
    pub q_det: f64,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";

impl SweepRecord {
    pub fn params(&self) -> PulseParams {
        PulseParams { gamma: self.gamma, alpha_c: self.alpha_c, beta_c: self.beta_c }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    fn new(p: &PulseParams, m: PointMetrics, status: String) -> Self {
        Self {
            gamma: p.gamma,
            alpha_c: p.alpha_c,
            beta_c: p.beta_c,
            snr_db: m.snr_db,
            capacity_mean: m.capacity_mean,
            capacity_stderr: m.capacity_stderr,
            crlb_tau_s2: m.crlb_tau_s2,
            crlb_nu_hz2: m.crlb_nu_hz2,
            rho2: m.rho2,
            q_det: m.q_det,
            status,
        }
    }
}

/// Capacity and CRLBs of any pulse kind under `cfg`.
///
/// Returns the per-SNR metrics and whether the sensing pulse was truncated
/// by the grid boundary.
pub fn evaluate_pulse(kind: PulseKind, cfg: &SweepConfig, reals: &[PathSet]) -> Result<(Vec<PointMetrics>, bool)> {
    let snrs = &cfg.grid.snr_db;
    let mut out: Vec<PointMetrics> = snrs
        .iter()
        .map(|&snr_db| PointMetrics {
            snr_db,
            capacity_mean: f64::NAN,
            capacity_stderr: f64::NAN,
            crlb_tau_s2: f64::NAN,
            crlb_nu_hz2: f64::NAN,
            rho2: f64::NAN,
            q_det: f64::NAN,
        })
        .collect();
    let mut truncated = false;
    if cfg.sensing {
        let pulse = sample_pulse(kind, &cfg.sensing_grid)?;
        let fim = fim_discrete_impl(&pulse, 1.0, cfg.derivative, false)?;
        truncated = fim.boundary_energy > BOUNDARY_ENERGY_WARN;
        let h_t = Complex64::new(cfg.target_gain, 0.0);
        for m in &mut out {
            let c = fim.fim.with_k(snr_to_kfim(m.snr_db, h_t)).crlb(&cfg.sensing_grid);
            m.crlb_tau_s2 = c.crlb_tau;
            m.crlb_nu_hz2 = c.crlb_nu;
            m.rho2 = c.rho2;
            m.q_det = c.q_det;
        }
    }
    if cfg.capacity {
        let pulse = sample_pulse(kind, &cfg.comm_grid)?;
        let samples = capacity_samples(reals, &pulse, snrs, cfg.normalization, cfg.channel)?;
        for (m, e) in out.iter_mut().zip(summarize(&samples, snrs)) {
            m.capacity_mean = e.mean;
            m.capacity_stderr = e.stderr;
        }
    }
    Ok((out, truncated))
}

/// Records of one parameter point. Failures become a status, never an error.
pub fn evaluate_point(p: &PulseParams, cfg: &SweepConfig, reals: &[PathSet]) -> (Vec<SweepRecord>, bool) {
    let result = p.validate().and_then(|_| evaluate_pulse(PulseKind::Tgp(*p), cfg, reals));
    match result {
        Ok((metrics, truncated)) => {
            let records = metrics
                .into_iter()
                .map(|m| {
                    let finite = [m.capacity_mean, m.crlb_tau_s2, m.crlb_nu_hz2]
                        .iter()
                        .zip([cfg.capacity, cfg.sensing, cfg.sensing])
                        .all(|(v, on)| !on || (v.is_finite() && *v >= 0.0));
                    let status = if finite { STATUS_OK.to_string() } else { "error: non-finite metric".to_string() };
                    SweepRecord::new(p, m, status)
                })
                .collect();
            (records, truncated)
        }
        Err(e) => {
            let status = format!("error: {e}");
            let records = cfg
                .grid
                .snr_db
                .iter()
                .map(|&snr_db| {
                    let nan = f64::NAN;
                    let m = PointMetrics {
                        snr_db,
                        capacity_mean: nan,
                        capacity_stderr: nan,
                        crlb_tau_s2: nan,
                        crlb_nu_hz2: nan,
                        rho2: nan,
                        q_det: nan,
                    };
                    SweepRecord::new(p, m, status.clone())
                })
                .collect();
            (records, false)
        }
    }
}

fn evaluate_points(points: &[PulseParams], cfg: &SweepConfig, reals: &[PathSet]) -> (Vec<SweepRecord>, usize) {
    let per_point: Vec<(Vec<SweepRecord>, bool)> = points.par_iter().map(|p| evaluate_point(p, cfg, reals)).collect();
    let truncated = per_point.iter().filter(|(_, t)| *t).count();
    (per_point.into_iter().flat_map(|(r, _)| r).collect(), truncated)
}

fn warn_truncated(count: usize) {
    if count > 0 {
        log::warn!(
            "{count} sweep points keep more than {BOUNDARY_ENERGY_WARN:.0e} of their energy on the sensing grid boundary; their discrete FIM is biased by truncation"
        );
    }
}

/// Sort key giving the canonical row order: parameters, then SNR.
fn record_order(a: &SweepRecord, b: &SweepRecord) -> std::cmp::Ordering {
    a.gamma
        .total_cmp(&b.gamma)
        .then(a.alpha_c.total_cmp(&b.alpha_c))
        .then(a.beta_c.total_cmp(&b.beta_c))
        .then(a.snr_db.total_cmp(&b.snr_db))
}

/// Runs the full sweep in memory.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let reals = cfg.draw_realizations()?;
    let (mut records, truncated) = evaluate_points(&cfg.grid.points(), cfg, &reals);
    warn_truncated(truncated);
    records.sort_by(record_order);
    Ok(records)
}

pub fn write_records<W: std::io::Write>(w: W, records: &[SweepRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(true).from_writer(w);
    if records.is_empty() {
        wtr.write_record(CSV_HEADER)?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected sweep CSV header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_records_file(path: &FsPath, records: &[SweepRecord]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    write_records(fs::File::create(&tmp)?, records)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_records_file(path: &FsPath) -> Result<Vec<SweepRecord>> {
    read_records(fs::File::open(path)?)
}

pub const CSV_HEADER: [&str; 11] = [
    "gamma",
    "alpha_c",
    "beta_c",
    "snr_db",
    "capacity_mean",
    "capacity_stderr",
    "crlb_tau_s2",
    "crlb_nu_hz2",
    "rho2",
    "q_det",
    "status",
];

pub const SWEEP_CSV: &str = "sweep.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
const SHARD_DIR: &str = "shards";
const SHARD_CONFIG: &str = "config.json";

fn shard_path(dir: &FsPath, i: usize) -> PathBuf {
    dir.join(SHARD_DIR).join(format!("gamma_{i:03}.csv"))
}

/// A shard is reusable when it holds exactly the expected rows in order.
fn load_shard(path: &FsPath, points: &[PulseParams], snrs: &[f64]) -> Option<Vec<SweepRecord>> {
    let records = read_records_file(path).ok()?;
    if records.len() != points.len() * snrs.len() {
        return None;
    }
    let matches = records
        .chunks(snrs.len())
        .zip(points)
        .all(|(chunk, p)| chunk.iter().zip(snrs).all(|(r, &s)| r.params() == *p && r.snr_db == s));
    matches.then_some(records)
}

/// Run summary written next to the merged CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: SweepConfig,
    /// Every parameter point is evaluated on the same realisations.
    pub shared_realizations: bool,
    pub records: usize,
    pub failed_records: usize,
    pub shards_reused: usize,
    pub csv: String,
}

/// Outcome of [`run_sweep_to_dir`].
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub records: Vec<SweepRecord>,
    pub manifest: RunManifest,
}

/// Runs the sweep one gamma slice at a time, checkpointing each slice as a
/// CSV shard under `dir/shards`. Shards left by an interrupted run with the
/// same config are reused. The merged CSV and the manifest go to `dir`.
pub fn run_sweep_to_dir(cfg: &SweepConfig, dir: &FsPath) -> Result<SweepRun> {
    cfg.validate()?;
    let shard_dir = dir.join(SHARD_DIR);
    fs::create_dir_all(&shard_dir)?;
    let cfg_path = shard_dir.join(SHARD_CONFIG);
    let cfg_json = serde_json::to_string_pretty(cfg)?;
    match fs::read_to_string(&cfg_path) {
        Ok(old) if old == cfg_json => {}
        Ok(_) => {
            return Err(Error::Config(format!(
                "{} holds shards of a different configuration; remove it or choose another output directory",
                shard_dir.display()
            )))
        }
        Err(_) => fs::write(&cfg_path, &cfg_json)?,
    }

    let reals = cfg.draw_realizations()?;
    let mut records = Vec::with_capacity(cfg.grid.len() * cfg.grid.snr_db.len());
    let (mut reused, mut truncated) = (0, 0);
    for i in 0..cfg.grid.gamma.points {
        let points = cfg.grid.slice(i);
        let path = shard_path(dir, i);
        if let Some(r) = load_shard(&path, &points, &cfg.grid.snr_db) {
            log::info!("reusing shard {}", path.display());
            reused += 1;
            records.extend(r);
            continue;
        }
        let (r, t) = evaluate_points(&points, cfg, &reals);
        truncated += t;
        write_records_file(&path, &r)?;
        log::info!("gamma slice {}/{} done", i + 1, cfg.grid.gamma.points);
        records.extend(r);
    }
    warn_truncated(truncated);
    records.sort_by(record_order);

    write_records_file(&dir.join(SWEEP_CSV), &records)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        shared_realizations: true,
        records: records.len(),
        failed_records: records.iter().filter(|r| !r.is_ok()).count(),
        shards_reused: reused,
        csv: SWEEP_CSV.to_string(),
    };
    fs::write(dir.join(MANIFEST_JSON), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(SweepRun { records, manifest })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Capacity,
    CrlbTau,
    CrlbNu,
}

impl Metric {
    pub fn of(&self, r: &SweepRecord) -> f64 {
        match self {
            Metric::Capacity => r.capacity_mean,
            Metric::CrlbTau => r.crlb_tau_s2,
            Metric::CrlbNu => r.crlb_nu_hz2,
        }
    }
}

/// Min/mean/max of a metric over all parameter points at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub snr_db: f64,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub count: usize,
}

impl Envelope {
    pub fn contains(&self, x: f64) -> bool {
        self.min <= x && x <= self.max
    }
}

fn snr_key(snr: f64) -> u64 {
    // order-preserving bits for finite values
    let b = snr.to_bits();
    if snr.is_sign_negative() {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Per-SNR envelopes, ascending in SNR, over successful finite records.
pub fn envelopes(records: &[SweepRecord], metric: Metric) -> Vec<Envelope> {
    let mut by_snr: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let v = metric.of(r);
        if v.is_finite() {
            by_snr.entry(snr_key(r.snr_db)).or_insert_with(|| (r.snr_db, Vec::new())).1.push(v);
        }
    }
    by_snr
        .into_values()
        .map(|(snr_db, vals)| {
            let (mean, _) = crate::capacity::mean_stderr(&vals);
            Envelope {
                snr_db,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                mean,
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                count: vals.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub gamma: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
    pub capacity: f64,
    pub crlb_tau_s2: f64,
    pub crlb_nu_hz2: f64,
}

impl From<&SweepRecord> for TradeoffPoint {
    fn from(r: &SweepRecord) -> Self {
        Self {
            gamma: r.gamma,
            alpha_c: r.alpha_c,
            beta_c: r.beta_c,
            capacity: r.capacity_mean,
            crlb_tau_s2: r.crlb_tau_s2,
            crlb_nu_hz2: r.crlb_nu_hz2,
        }
    }
}

/// Mean of the sweep at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub snr_db: f64,
    pub capacity: f64,
    pub crlb_tau_s2: f64,
    pub crlb_nu_hz2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tradeoff {
    pub snr_db: f64,
    pub scatter: Vec<TradeoffPoint>,
    /// Largest capacity.
    pub comm_optimal: TradeoffPoint,
    /// Smallest delay CRLB.
    pub sensing_optimal: TradeoffPoint,
    /// Capacity of the sensing-optimal point over the largest capacity.
    pub retention: f64,
    pub mean_trajectory: Vec<TrajectoryPoint>,
}

/// Trade-off scatter and marked points at `snr_db`.
pub fn tradeoff_extract(records: &[SweepRecord], snr_db: f64) -> Result<Tradeoff> {
    let scatter: Vec<TradeoffPoint> = records
        .iter()
        .filter(|r| r.is_ok() && r.snr_db == snr_db)
        .map(TradeoffPoint::from)
        .filter(|p| p.capacity.is_finite() && p.crlb_tau_s2.is_finite())
        .collect();
    let comm_optimal = *scatter
        .iter()
        .max_by(|a, b| a.capacity.total_cmp(&b.capacity))
        .ok_or_else(|| Error::Config(format!("no complete sweep records at {snr_db} dB")))?;
    let sensing_optimal =
        *scatter.iter().min_by(|a, b| a.crlb_tau_s2.total_cmp(&b.crlb_tau_s2)).expect("scatter is non-empty");
    let cap = envelopes(records, Metric::Capacity);
    let tau = envelopes(records, Metric::CrlbTau);
    let nu = envelopes(records, Metric::CrlbNu);
    let mean_trajectory = cap
        .iter()
        .filter_map(|c| {
            let t = tau.iter().find(|e| e.snr_db == c.snr_db)?;
            let n = nu.iter().find(|e| e.snr_db == c.snr_db)?;
            Some(TrajectoryPoint { snr_db: c.snr_db, capacity: c.mean, crlb_tau_s2: t.mean, crlb_nu_hz2: n.mean })
        })
        .collect();
    Ok(Tradeoff {
        snr_db,
        retention: sensing_optimal.capacity / comm_optimal.capacity,
        scatter,
        comm_optimal,
        sensing_optimal,
        mean_trajectory,
    })
}

/// Where a benchmark pulse sits relative to the TGP envelopes at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub label: String,
    pub snr_db: f64,
    pub capacity: f64,
    pub crlb_tau_s2: f64,
    pub crlb_nu_hz2: f64,
    pub capacity_inside: bool,
    pub crlb_tau_inside: bool,
    pub crlb_nu_inside: bool,
}

pub fn envelope_checks(records: &[SweepRecord], label: &str, metrics: &[PointMetrics]) -> Vec<EnvelopeCheck> {
    let cap = envelopes(records, Metric::Capacity);
    let tau = envelopes(records, Metric::CrlbTau);
    let nu = envelopes(records, Metric::CrlbNu);
    let inside = |env: &[Envelope], snr: f64, x: f64| env.iter().any(|e| e.snr_db == snr && e.contains(x));
    metrics
        .iter()
        .map(|m| EnvelopeCheck {
            label: label.to_string(),
            snr_db: m.snr_db,
            capacity: m.capacity_mean,
            crlb_tau_s2: m.crlb_tau_s2,
            crlb_nu_hz2: m.crlb_nu_hz2,
            capacity_inside: inside(&cap, m.snr_db, m.capacity_mean),
            crlb_tau_inside: inside(&tau, m.snr_db, m.crlb_tau_s2),
            crlb_nu_inside: inside(&nu, m.snr_db, m.crlb_nu_hz2),
        })
        .collect()
}
