//! The `tlsm` command line.
//!
//! Every summary line on stdout starts with `tlsm.<command>` followed by
//! space-separated `key=value` pairs. Errors go to stderr.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad config or arguments,
//! 3 I/O or file format failure, 4 dimension mismatch.
//!
//! `TLSM_THREADS` sets the size of the worker pool; unset means one worker
//! per core.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Result, TlsmError};
use crate::io::{self, RunConfig};
use crate::metrics;
use crate::seisgen::{self, NoiseSpec};
use crate::solver::{self, IterationRecord, SolverMode};
use crate::tensor::Tensor3;

pub const THREADS_ENV: &str = "TLSM_THREADS";

pub const BENCHMARK_HEADER: &str = "mode,F,sigma,psnr_db,ssim,seconds";
pub const HISTORY_HEADER: &str = "iter,psnr_db,ssim,res_z,res_d1,res_d2";

pub const DEFAULT_FOOTPRINTS: [f64; 3] = [0.1, 0.2, 0.5];
pub const DEFAULT_SIGMAS: [f64; 4] = [0.01, 0.02, 0.03, 0.04];

pub const CLEAN_FILE: &str = "clean.tns";
pub const NOISY_FILE: &str = "noisy.tns";
pub const FOOTPRINT_FILE: &str = "footprint.tns";

#[derive(Debug, Parser)]
#[command(name = "tlsm", version, about = "TLSM denoising of 3-D seismic tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write clean, noisy and footprint volumes for a config.
    Generate(GenerateArgs),
    /// Denoise a tensor file.
    Denoise(DenoiseArgs),
    /// Sweep a grid of noise conditions and modes, writing a CSV.
    Benchmark(BenchmarkArgs),
    /// PSNR and SSIM of a tensor against a reference.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the solver mode.
    #[arg(long)]
    pub mode: Option<SolverMode>,
    /// Overrides the iteration count.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Overrides the noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(mode) = self.mode {
            cfg.solver.mode = mode;
        }
        if let Some(iters) = self.iters {
            cfg.solver.max_iters = iters;
        }
        if let Some(seed) = self.seed {
            cfg.noise.seed = seed;
        }
        cfg.solver
            .validate()
            .map_err(|e| TlsmError::Config { line: 0, message: e.to_string() })?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory for clean.tns, noisy.tns and footprint.tns.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Noisy tensor file.
    #[arg(long)]
    pub input: PathBuf,
    /// Denoised tensor file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Clean reference for per-iteration PSNR and SSIM.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Per-iteration history CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Modes to run, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = SolverMode::ALL.to_vec())]
    pub modes: Vec<SolverMode>,
    /// Footprint amplitudes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FOOTPRINTS.to_vec())]
    pub footprints: Vec<f64>,
    /// Gaussian standard deviations, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIGMAS.to_vec())]
    pub sigmas: Vec<f64>,
    /// Benchmark CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
}

pub fn exit_code(err: &TlsmError) -> i32 {
    match err {
        TlsmError::Config { .. } | TlsmError::InvalidArgument(_) => 2,
        TlsmError::Io(_) | TlsmError::File { .. } | TlsmError::Format(_) => 3,
        TlsmError::DimensionMismatch(_) => 4,
        _ => 1,
    }
}

/// Builds the global worker pool from `TLSM_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| TlsmError::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| TlsmError::InvalidArgument(e.to_string()))
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(args, out),
        Command::Denoise(args) => cmd_denoise(args, out),
        Command::Benchmark(args) => cmd_benchmark(args, out),
        Command::Metrics(args) => cmd_metrics(args, out),
    }
}

pub struct Synthetic {
    pub clean: Tensor3,
    pub noisy: Tensor3,
    pub footprint: Tensor3,
}

pub fn synthesize(cfg: &RunConfig) -> Result<Synthetic> {
    let d = &cfg.data;
    let clean = seisgen::generate_clean(d.dims, &d.events, d.dt, d.peak_freq)?;
    let noise = seisgen::add_noise(&clean, &cfg.noise)?;
    Ok(Synthetic {
        clean,
        noisy: noise.noisy,
        footprint: noise.footprint,
    })
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let data = synthesize(&cfg)?;
    fs::create_dir_all(&args.out).map_err(|source| TlsmError::File {
        path: args.out.clone(),
        source,
    })?;
    io::write_tensor(args.out.join(CLEAN_FILE), &data.clean)?;
    io::write_tensor(args.out.join(NOISY_FILE), &data.noisy)?;
    io::write_tensor(args.out.join(FOOTPRINT_FILE), &data.footprint)?;
    let [n1, n2, n3] = cfg.data.dims;
    let psnr = metrics::psnr(&data.noisy, &data.clean, metrics::DEFAULT_PEAK)?;
    writeln!(
        out,
        "tlsm.generate dims={n1}x{n2}x{n3} F={} sigma={} seed={} noisy_psnr_db={psnr:.4} out={}",
        cfg.noise.footprint_amplitude,
        cfg.noise.gaussian_sigma,
        cfg.noise.seed,
        args.out.display()
    )?;
    Ok(())
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_history(path: &Path, mode: SolverMode, history: &[IterationRecord]) -> Result<()> {
    let mut text = format!("# mode={mode}\n{HISTORY_HEADER}\n");
    for r in history {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iter,
            optional(r.psnr_db),
            optional(r.ssim),
            r.res_z,
            r.res_d1,
            r.res_d2
        ));
    }
    io::write_text(path, &text)?;
    Ok(())
}

pub fn cmd_denoise(args: &DenoiseArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let noisy = io::read_tensor(&args.input)?;
    let reference = args.reference.as_ref().map(io::read_tensor).transpose()?;
    if let Some(r) = &reference {
        if r.dims() != noisy.dims() {
            return Err(TlsmError::DimensionMismatch(format!(
                "noisy {:?} vs reference {:?}",
                noisy.dims(),
                r.dims()
            )));
        }
    }
    let start = Instant::now();
    let result = solver::denoise(&noisy, &cfg.solver, reference.as_ref())?;
    let seconds = start.elapsed().as_secs_f64();
    io::write_tensor(&args.out, &result.x)?;
    if let Some(path) = &args.history {
        write_history(path, cfg.solver.mode, &result.history)?;
    }
    write!(
        out,
        "tlsm.denoise mode={} iters={} seconds={seconds:.3}",
        cfg.solver.mode,
        result.history.len()
    )?;
    if let Some(r) = &reference {
        let report = metrics::evaluate(&result.x, r, &metrics::MetricOptions::default())?;
        write!(out, " psnr_db={:.4} ssim={:.4}", report.psnr_db, report.ssim)?;
    }
    writeln!(out, " out={}", args.out.display())?;
    Ok(())
}

/// One benchmark CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub mode: SolverMode,
    pub footprint: f64,
    pub sigma: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub seconds: f64,
}

impl BenchmarkRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.mode, self.footprint, self.sigma, self.psnr_db, self.ssim, self.seconds
        )
    }
}

/// Runs every (footprint, sigma) condition in grid order, each mode in turn.
pub fn benchmark(cfg: &RunConfig, modes: &[SolverMode], footprints: &[f64], sigmas: &[f64]) -> Result<Vec<BenchmarkRow>> {
    let mut rows = Vec::new();
    for &footprint in footprints {
        for &sigma in sigmas {
            let mut run = cfg.clone();
            run.noise = NoiseSpec {
                footprint_amplitude: footprint,
                gaussian_sigma: sigma,
                ..cfg.noise
            };
            let data = synthesize(&run)?;
            for &mode in modes {
                let solver_cfg = solver::SolverConfig { mode, ..cfg.solver.clone() };
                let start = Instant::now();
                let result = solver::denoise(&data.noisy, &solver_cfg, None)?;
                let seconds = start.elapsed().as_secs_f64();
                let report = metrics::evaluate(&result.x, &data.clean, &metrics::MetricOptions::default())?;
                rows.push(BenchmarkRow {
                    mode,
                    footprint,
                    sigma,
                    psnr_db: report.psnr_db,
                    ssim: report.ssim,
                    seconds,
                });
            }
        }
    }
    Ok(rows)
}

pub fn cmd_benchmark(args: &BenchmarkArgs, out: &mut impl Write) -> Result<()> {
    let cfg = args.config.resolve()?;
    let rows = benchmark(&cfg, &args.modes, &args.footprints, &args.sigmas)?;
    let mut text = format!("{BENCHMARK_HEADER}\n");
    for r in &rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    io::write_text(&args.out, &text)?;
    for &mode in &args.modes {
        let picked: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.mode == mode).collect();
        let n = picked.len() as f64;
        let mean = |f: fn(&BenchmarkRow) -> f64| picked.iter().map(|r| f(r)).sum::<f64>() / n;
        writeln!(
            out,
            "tlsm.benchmark mode={mode} conditions={} mean_psnr_db={:.4} mean_ssim={:.4} mean_seconds={:.3}",
            picked.len(),
            mean(|r| r.psnr_db),
            mean(|r| r.ssim),
            mean(|r| r.seconds)
        )?;
    }
    Ok(())
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut impl Write) -> Result<()> {
    let x = io::read_tensor(&args.input)?;
    let reference = io::read_tensor(&args.reference)?;
    let report = metrics::evaluate(&x, &reference, &metrics::MetricOptions::default())?;
    writeln!(out, "tlsm.metrics psnr_db={:.4} ssim={:.4}", report.psnr_db, report.ssim)?;
    Ok(())
}
