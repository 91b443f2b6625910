use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use dd_isac::capacity::{capacity_samples, draw_realizations, summarize, Normalization};
use dd_isac::checks::{covariance_oracle, fim_oracle, CheckOutcome};
use dd_isac::config::RunConfig;
use dd_isac::covariance::CovarianceModel;
use dd_isac::sensing::{crlb_closed_form, fim_discrete_with, snr_to_kfim, FimMethod};
use dd_isac::sweep::{
    envelope_checks, envelopes, evaluate_pulse, read_records_file, run_sweep_to_dir, tradeoff_extract, Metric,
};
use dd_isac::{channel::effective_channel_with, sample_pulse, Error, GridSpec, PulseKind, PulseParams};

const SEED_ENV: &str = "DD_ISAC_SEED";

#[derive(Parser)]
#[command(name = "dd-isac", version, about = "Delay-Doppler pulse shaping simulations")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON run configuration; missing fields take the study defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled pulses.
    Pulse {
        #[command(subcommand)]
        action: PulseAction,
    },
    /// Effective channel matrices.
    Channel {
        #[command(subcommand)]
        action: ChannelAction,
    },
    /// Closed-form channel covariance.
    Covariance {
        #[command(subcommand)]
        action: CovarianceAction,
    },
    /// Delay and Doppler CRLBs of a pulse.
    Crlb(CrlbArgs),
    /// Ergodic capacity of a pulse over the configured channel model.
    Capacity(CapacityArgs),
    /// Full TGP parameter sweep with checkpointing.
    Sweep(SweepArgs),
    /// Trade-off summary of a finished sweep.
    Tradeoff(TradeoffArgs),
    /// Built-in oracle checks.
    Validate(ValidateArgs),
}

#[derive(Subcommand)]
enum PulseAction {
    /// Samples as CSV: m, n, re, im, abs.
    Dump {
        #[command(flatten)]
        pulse: PulseArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChannelAction {
    /// One Veh-A realisation as a JSON header line followed by CSV p, q, re, im.
    Dump {
        #[command(flatten)]
        pulse: PulseArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Realisation index within the seed's stream family.
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CovarianceAction {
    /// IPR, condition number and Jensen capacity as JSON.
    Report {
        /// Overrides the configured pulse (Gaussian kinds only).
        #[arg(long, value_enum)]
        pulse: Option<KindArg>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Tgp,
    Sgp,
    Rrc,
    Sinc,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, value_enum, default_value = "tgp")]
    pulse: KindArg,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    /// RRC roll-off (both axes).
    #[arg(long, default_value_t = dd_isac::pulse::DEFAULT_RRC_ROLLOFF)]
    rolloff: f64,
}

impl PulseArgs {
    fn kind(&self) -> anyhow::Result<PulseKind> {
        let kind = match self.pulse {
            KindArg::Tgp => PulseKind::Tgp(PulseParams::new(self.gamma, self.alpha, self.beta)?),
            KindArg::Sgp => PulseKind::Sgp,
            KindArg::Rrc => PulseKind::Rrc { beta_tau: self.rolloff, beta_nu: self.rolloff },
            KindArg::Sinc => PulseKind::Sinc,
        };
        kind.validate()?;
        Ok(kind)
    }

    fn params(&self) -> (f64, f64, f64) {
        match self.pulse {
            KindArg::Tgp => (self.gamma, self.alpha, self.beta),
            KindArg::Sgp => (1.0, 0.0, 0.0),
            _ => (f64::NAN, f64::NAN, f64::NAN),
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Frame duration in seconds.
    #[arg(long)]
    t: Option<f64>,
    /// Bandwidth in hertz.
    #[arg(long)]
    b: Option<f64>,
}

impl GridArgs {
    fn apply(&self, base: GridSpec) -> anyhow::Result<GridSpec> {
        Ok(GridSpec::new(
            self.m.unwrap_or(base.m),
            self.n.unwrap_or(base.n),
            self.t.unwrap_or(base.t),
            self.b.unwrap_or(base.b),
        )?)
    }
}

#[derive(Args)]
struct CrlbArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// SNR values in dB; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Vec<f64>,
    #[arg(long, value_enum, default_value = "discrete")]
    method: MethodArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Discrete,
}

#[derive(Args)]
struct CapacityArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Vec<f64>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long, value_enum)]
    normalization: Option<NormArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    None,
    UnitFrobenius,
    UnitAverageGain,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::None => Normalization::None,
            NormArg::UnitFrobenius => Normalization::UnitFrobenius,
            NormArg::UnitAverageGain => Normalization::UnitAverageGain,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Output directory for shards, the merged CSV and the manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
    /// Skip the capacity evaluation.
    #[arg(long)]
    no_capacity: bool,
    /// Skip the CRLB evaluation.
    #[arg(long)]
    no_sensing: bool,
}

#[derive(Args)]
struct TradeoffArgs {
    /// Merged sweep CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr: f64,
    /// Also evaluate the SGP, RRC and Sinc benchmarks under the run config
    /// and place them against the TGP envelopes.
    #[arg(long)]
    benchmarks: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Monte Carlo draws for the covariance oracle.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Random sweep points for the FIM oracle.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long)]
    seed: Option<u64>,
}

/// Errors the user fixes by changing inputs.
fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(
                Error::Config(_)
                    | Error::Json(_)
                    | Error::InvalidGrid(_)
                    | Error::InvalidPulse(_)
                    | Error::InvalidChannel(_)
                    | Error::PathOutOfCell { .. }
            )
        ) || c.downcast_ref::<serde_json::Error>().is_some()
            || c.downcast_ref::<ConfigError>().is_some()
    })
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Master seed precedence: flag, then environment, then config file.
fn load_config(path: Option<&Path>, seed_flag: Option<u64>) -> anyhow::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| config_error(format!("reading {}: {e}", p.display())))?;
            RunConfig::from_json(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Ok(v) = std::env::var(SEED_ENV) {
        let seed = v.trim().parse().map_err(|_| config_error(format!("{SEED_ENV}={v:?} is not a u64")))?;
        cfg.set_seed(seed);
    }
    if let Some(seed) = seed_flag {
        cfg.set_seed(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let config = cli.config.as_deref();
    match cli.command {
        Command::Pulse { action: PulseAction::Dump { pulse, grid, out } } => {
            let cfg = load_config(config, None)?;
            pulse_dump(&pulse, grid.apply(cfg.isac.comm_grid)?, out.as_deref())
        }
        Command::Channel { action: ChannelAction::Dump { pulse, grid, seed, index, out } } => {
            let cfg = load_config(config, seed)?;
            channel_dump(&cfg, &pulse, grid.apply(cfg.isac.comm_grid)?, index, out.as_deref())
        }
        Command::Covariance { action: CovarianceAction::Report { pulse, gamma, alpha, beta, snr, out } } => {
            let cfg = load_config(config, None)?;
            covariance_report(&cfg, pulse, gamma, alpha, beta, snr, out.as_deref())
        }
        Command::Crlb(args) => {
            let cfg = load_config(config, None)?;
            crlb(&cfg, &args)
        }
        Command::Capacity(args) => {
            let cfg = load_config(config, args.seed)?;
            capacity(&cfg, &args)
        }
        Command::Sweep(args) => {
            let cfg = load_config(config, args.seed)?;
            sweep(cfg, &args)
        }
        Command::Tradeoff(args) => {
            let cfg = load_config(config, args.seed)?;
            tradeoff(&cfg, &args)
        }
        Command::Validate(args) => {
            let cfg = load_config(config, args.seed)?;
            validate(&cfg, &args)
        }
    }
}

/// Writes `f`'s output to `out` or stdout, then prints `summary` on the
/// stream not carrying data.
fn emit<F>(out: Option<&Path>, summary: &str, f: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
{
    match out {
        Some(p) => {
            let mut w = io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
            println!("{summary} -> {}", p.display());
        }
        None => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush()?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[derive(Serialize)]
struct PulseRow {
    m: i64,
    n: i64,
    re: f64,
    im: f64,
    abs: f64,
}

fn pulse_dump(args: &PulseArgs, grid: GridSpec, out: Option<&Path>) -> anyhow::Result<()> {
    let kind = args.kind()?;
    let pulse = sample_pulse(kind, &grid)?;
    let summary = format!("{} pulse on {}x{} grid, energy {:.12}", kind.label(), grid.m, grid.n, pulse.energy());
    emit(out, &summary, |w| {
        let mut wtr = csv_writer(w);
        for i in 0..grid.m {
            for j in 0..grid.n {
                let x = pulse.at(i, j);
                wtr.serialize(PulseRow {
                    m: grid.delay_index(i),
                    n: grid.doppler_index(j),
                    re: x.re,
                    im: x.im,
                    abs: x.norm(),
                })?;
            }
        }
        wtr.flush()?;
        Ok(())
    })
}

#[derive(Serialize)]
struct ChannelHeader<'a> {
    grid: GridSpec,
    pulse: PulseKind,
    seed: u64,
    index: u64,
    channel_model: &'a dd_isac::channel::ChannelModel,
    options: dd_isac::channel::ChannelOptions,
    flattening: &'static str,
}

#[derive(Serialize)]
struct ChannelRow {
    p: usize,
    q: usize,
    re: f64,
    im: f64,
}

fn channel_dump(
    cfg: &RunConfig,
    args: &PulseArgs,
    grid: GridSpec,
    index: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let kind = args.kind()?;
    let pulse = sample_pulse(kind, &grid)?;
    let isac = &cfg.isac;
    let paths = isac.channel_model.sample(isac.seed, index)?;
    let h = effective_channel_with(&paths, &pulse, isac.channel)?;
    let header = ChannelHeader {
        grid,
        pulse: kind,
        seed: isac.seed,
        index,
        channel_model: &isac.channel_model,
        options: isac.channel,
        flattening: "p = k*N + l (delay-major, zero-based storage indices)",
    };
    let summary = format!("{}x{} channel, ||H||_F^2 = {:.6}", grid.size(), grid.size(), h.frobenius_sqr());
    emit(out, &summary, |w| {
        writeln!(w, "{}", serde_json::to_string(&header)?)?;
        let mut wtr = csv_writer(w);
        for p in 0..grid.size() {
            for q in 0..grid.size() {
                let v = h.entry(p, q);
                wtr.serialize(ChannelRow { p, q, re: v.re, im: v.im })?;
            }
        }
        wtr.flush()?;
        Ok(())
    })
}

fn covariance_report(
    cfg: &RunConfig,
    pulse: Option<KindArg>,
    gamma: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    snr: Option<f64>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let run = &cfg.covariance;
    let base = match pulse {
        None => run.pulse.gaussian_params().ok_or_else(|| {
            config_error(format!("covariance needs a Gaussian pulse, configured {}", run.pulse.label()))
        })?,
        Some(KindArg::Tgp) => PulseParams::SGP,
        Some(KindArg::Sgp) => {
            if gamma.is_some() || alpha.is_some() || beta.is_some() {
                return Err(config_error("--gamma/--alpha/--beta need --pulse tgp"));
            }
            PulseParams::SGP
        }
        Some(_) => return Err(config_error("covariance closed form exists for Gaussian pulses only")),
    };
    let params =
        PulseParams::new(gamma.unwrap_or(base.gamma), alpha.unwrap_or(base.alpha_c), beta.unwrap_or(base.beta_c))?;
    let model = CovarianceModel::new(run.grid, params, run.stats(), run.options)?;
    let report = model.report(snr.unwrap_or(run.snr_db))?;
    let summary = format!(
        "Jensen capacity {:.4} bits, condition number {:.4e}, IPR {:.4e}",
        report.jensen_capacity_bits, report.condition_number, report.ipr
    );
    emit(out, &summary, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

#[derive(Serialize)]
struct CrlbRow {
    gamma: f64,
    alpha_c: f64,
    beta_c: f64,
    snr_db: f64,
    crlb_tau_s2: f64,
    crlb_nu_hz2: f64,
    rho2: f64,
    q_det: f64,
    method: &'static str,
}

fn snr_list(flag: &[f64], default: &[f64]) -> anyhow::Result<Vec<f64>> {
    let v = if flag.is_empty() { default.to_vec() } else { flag.to_vec() };
    if v.iter().any(|s| !s.is_finite()) {
        return Err(config_error("SNR values must be finite"));
    }
    Ok(v)
}

fn crlb(cfg: &RunConfig, args: &CrlbArgs) -> anyhow::Result<()> {
    let kind = args.pulse.kind()?;
    let grid = args.grid.apply(cfg.isac.sensing_grid)?;
    let snrs = snr_list(&args.snr, &cfg.isac.grid.snr_db)?;
    let h_t = Complex64::new(cfg.isac.target_gain, 0.0);
    let (gamma, alpha_c, beta_c) = args.pulse.params();
    let rows: Vec<CrlbRow> = match args.method {
        MethodArg::ClosedForm => {
            let p = kind
                .gaussian_params()
                .ok_or_else(|| config_error(format!("no closed-form FIM for the {} pulse", kind.label())))?;
            snrs.iter()
                .map(|&s| {
                    let c = crlb_closed_form(&p, &grid, snr_to_kfim(s, h_t));
                    CrlbRow {
                        gamma,
                        alpha_c,
                        beta_c,
                        snr_db: s,
                        crlb_tau_s2: c.crlb_tau,
                        crlb_nu_hz2: c.crlb_nu,
                        rho2: c.rho2,
                        q_det: c.q_det,
                        method: FimMethod::ClosedForm.label(),
                    }
                })
                .collect()
        }
        MethodArg::Discrete => {
            let pulse = sample_pulse(kind, &grid)?;
            let fim = fim_discrete_with(&pulse, 1.0, cfg.isac.derivative)?.fim;
            snrs.iter()
                .map(|&s| {
                    let c = fim.with_k(snr_to_kfim(s, h_t)).crlb(&grid);
                    CrlbRow {
                        gamma,
                        alpha_c,
                        beta_c,
                        snr_db: s,
                        crlb_tau_s2: c.crlb_tau,
                        crlb_nu_hz2: c.crlb_nu,
                        rho2: c.rho2,
                        q_det: c.q_det,
                        method: FimMethod::DiscreteNumeric.label(),
                    }
                })
                .collect()
        }
    };
    let last = rows.last().expect("at least one SNR");
    let summary = format!(
        "{} at {} dB: CRLB tau {:.4e} s^2, CRLB nu {:.4e} Hz^2, rho2 {:.4e}",
        kind.label(),
        last.snr_db,
        last.crlb_tau_s2,
        last.crlb_nu_hz2,
        last.rho2
    );
    emit(args.out.as_deref(), &summary, |w| {
        let mut wtr = csv_writer(w);
        for r in &rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    })
}

#[derive(Serialize)]
struct CapacityRow {
    pulse: &'static str,
    gamma: f64,
    alpha_c: f64,
    beta_c: f64,
    snr_db: f64,
    capacity_mean: f64,
    capacity_stderr: f64,
    realizations: usize,
    seed: u64,
}

fn capacity(cfg: &RunConfig, args: &CapacityArgs) -> anyhow::Result<()> {
    let kind = args.pulse.kind()?;
    let isac = &cfg.isac;
    let grid = args.grid.apply(isac.comm_grid)?;
    let snrs = snr_list(&args.snr, &isac.grid.snr_db)?;
    let count = args.realizations.unwrap_or(isac.realizations);
    if count == 0 {
        return Err(config_error("--realizations must be at least 1"));
    }
    let normalization = args.normalization.map(Normalization::from).unwrap_or(isac.normalization);
    let pulse = sample_pulse(kind, &grid)?;
    let reals = draw_realizations(&isac.channel_model, isac.seed, count)?;
    let samples = capacity_samples(&reals, &pulse, &snrs, normalization, isac.channel)?;
    let est = summarize(&samples, &snrs);
    let (gamma, alpha_c, beta_c) = args.pulse.params();
    let last = est.last().expect("at least one SNR");
    let summary = format!(
        "{} capacity at {} dB: {:.4} +- {:.4} bits/frame over {count} realisations",
        kind.label(),
        last.snr_db,
        last.mean,
        last.stderr
    );
    emit(args.out.as_deref(), &summary, |w| {
        let mut wtr = csv_writer(w);
        for e in &est {
            wtr.serialize(CapacityRow {
                pulse: kind.label(),
                gamma,
                alpha_c,
                beta_c,
                snr_db: e.snr_db,
                capacity_mean: e.mean,
                capacity_stderr: e.stderr,
                realizations: e.realizations,
                seed: isac.seed,
            })?;
        }
        wtr.flush()?;
        Ok(())
    })
}

fn sweep(mut cfg: RunConfig, args: &SweepArgs) -> anyhow::Result<()> {
    let isac = &mut cfg.isac;
    if let Some(r) = args.realizations {
        isac.realizations = r;
    }
    isac.capacity &= !args.no_capacity;
    isac.sensing &= !args.no_sensing;
    if !isac.capacity && !isac.sensing {
        return Err(config_error("nothing to compute: both capacity and sensing are disabled"));
    }
    isac.validate()?;
    let run = run_sweep_to_dir(isac, &args.out)?;
    let m = &run.manifest;
    println!(
        "{} records ({} failed, {} shards reused) -> {}",
        m.records,
        m.failed_records,
        m.shards_reused,
        args.out.join(&m.csv).display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TradeoffReport {
    tradeoff: dd_isac::sweep::Tradeoff,
    capacity_envelope: Vec<dd_isac::sweep::Envelope>,
    crlb_tau_envelope: Vec<dd_isac::sweep::Envelope>,
    crlb_nu_envelope: Vec<dd_isac::sweep::Envelope>,
    /// Sweep point nearest to the SGP and its distance in axis steps.
    sgp_nearest: (PulseParams, f64),
    benchmarks: Vec<dd_isac::sweep::EnvelopeCheck>,
}

fn tradeoff(cfg: &RunConfig, args: &TradeoffArgs) -> anyhow::Result<()> {
    let records =
        read_records_file(&args.input).with_context(|| format!("reading sweep CSV {}", args.input.display()))?;
    if records.is_empty() {
        return Err(config_error(format!("{} holds no records", args.input.display())));
    }
    let t = tradeoff_extract(&records, args.snr)?;
    let mut benchmarks = Vec::new();
    if args.benchmarks {
        let reals = cfg.isac.draw_realizations()?;
        for kind in [PulseKind::Sgp, PulseKind::rrc_default(), PulseKind::Sinc] {
            let (m, _) = evaluate_pulse(kind, &cfg.isac, &reals)?;
            benchmarks.extend(envelope_checks(&records, kind.label(), &m));
        }
    }
    let summary = format!(
        "{} dB: max capacity {:.4} at (gamma={:.4}, alpha_c={:.3}, beta_c={:.3}); sensing-optimal point retains {:.1}%",
        t.snr_db,
        t.comm_optimal.capacity,
        t.comm_optimal.gamma,
        t.comm_optimal.alpha_c,
        t.comm_optimal.beta_c,
        100.0 * t.retention
    );
    let report = TradeoffReport {
        sgp_nearest: cfg.isac.grid.nearest(&PulseParams::SGP),
        capacity_envelope: envelopes(&records, Metric::Capacity),
        crlb_tau_envelope: envelopes(&records, Metric::CrlbTau),
        crlb_nu_envelope: envelopes(&records, Metric::CrlbNu),
        tradeoff: t,
        benchmarks,
    };
    emit(args.out.as_deref(), &summary, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

fn validate(cfg: &RunConfig, args: &ValidateArgs) -> anyhow::Result<()> {
    let run = &cfg.covariance;
    let mut outcomes: Vec<CheckOutcome> = Vec::new();
    for params in [PulseParams::SGP, PulseParams::new(1.0, 0.0, 5.0)?] {
        let model = CovarianceModel::new(run.grid, params, run.stats(), run.options)?;
        let mut o = covariance_oracle(&model, args.samples, run.seed, 0.02)?;
        o.name =
            format!("{} at (gamma={}, alpha_c={}, beta_c={})", o.name, params.gamma, params.alpha_c, params.beta_c);
        outcomes.push(o);
    }
    outcomes.push(fim_oracle(&cfg.isac.grid, &cfg.isac.sensing_grid, args.points, cfg.isac.seed, 1e-3)?);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{}/{} checks passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        Err(anyhow!("{failed} oracle check(s) failed"))
    } else {
        Ok(())
    }
}
