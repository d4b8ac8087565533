//! Command implementations shared by the `onebit-doa` and `gen-dataset`
//! binaries. Each command writes its human-readable report to `out`.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use onebit_doa::array::{
    build_dictionary, one_bit_quantize, rad_to_deg, simulate_snapshot_with, ArrayGeometry,
    OneBitSnapshot,
};
use onebit_doa::bench::{
    emit_report, estimate_doas, run_bench, run_method, write_bench, AmplitudeModel, BenchConfig,
    Method, ScenarioSpec,
};
use onebit_doa::dataset::{
    generate_dataset, read_predictions, read_record, write_dataset, GenConfig, RECORDS_FILE,
};
use onebit_doa::sbri::{GridMode, SbriConfig};
use onebit_doa::sbrix::SbriXConfig;
use onebit_doa::spectrum::{score_trial, DoaEstimate};

pub const THREADS_ENV: &str = "ONEBIT_DOA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "onebit-doa", version, about = "One-bit single-snapshot DOA estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo sweep over SNR and methods; writes CSVs and plot data.
    Bench(BenchArgs),
    /// Solve one record of a dataset, or score a stored prediction for it.
    Solve(SolveArgs),
    /// Simulate one snapshot of a fixed scene and solve it.
    Simulate(SimulateArgs),
    /// Generate a labeled corpus (`manifest` + `records.bin`).
    GenDataset(GenDatasetArgs),
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML bench configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; falls back to $ONEBIT_DOA_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Dataset directory or its `records.bin`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub index: usize,
    /// Solver and grid mode, e.g. `sbri_x:off_grid`.
    #[arg(long, required_unless_present = "from_predictions")]
    pub method: Option<Method>,
    /// Score the prediction stored for this record instead of solving.
    #[arg(long, conflicts_with = "method")]
    pub from_predictions: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub threshold_deg: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// True directions in degrees, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub doas: Vec<f64>,
    /// Fixed amplitudes as `re:im`, comma separated. Random unit-modulus
    /// phases are drawn when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub amplitudes: Vec<String>,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// `sla18`, `sla10` or `ulaN`.
    #[arg(long, default_value = "sla18")]
    pub geometry: String,
    #[arg(long, default_value_t = 1.0)]
    pub spacing_deg: f64,
    #[arg(long, default_value_t = 60.0)]
    pub fov_deg: f64,
    /// Methods to run on the same snapshot; repeat or comma separate.
    #[arg(long, value_delimiter = ',', default_value = "sbri:on_grid,sbri_x:on_grid")]
    pub method: Vec<Method>,
    /// Write `spectrum_<solver>_<mode>.dat` files (angle, magnitude, gap) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Store gap magnitudes instead of signed gaps.
    #[arg(long)]
    pub abs_gaps: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Bench(a) => bench(&a, out),
        Command::Solve(a) => solve(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::GenDataset(a) => gen_dataset(&a, out),
    }
}

/// `--threads` wins over the environment; `None` means all cores.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let t = match (flag, env) {
        (Some(t), _) => Some(t),
        (None, Some(v)) if !v.trim().is_empty() => Some(
            v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?,
        ),
        _ => None,
    };
    if t == Some(0) {
        bail!("thread count must be positive");
    }
    Ok(t)
}

pub fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = BenchConfig::from_file(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(args.threads, env.as_deref())?;
    let result = run_bench(&cfg, threads)?;
    let sources = cfg.scenario.doas_deg.len();
    write_bench(&args.out, &result, sources)?;
    emit_report(&args.out, &result.summary, &result.traces)?;
    writeln!(out, "{:<24} {:>7} {:>9} {:>10} {:>9}", "method", "snr_db", "hit_rate", "rmse_deg", "mean_it")?;
    for r in &result.summary {
        writeln!(
            out,
            "{:<24} {:>7.1} {:>9.3} {:>10.4} {:>9.2}",
            r.method.to_string(),
            r.snr_db,
            r.hit_rate,
            r.rmse_deg,
            r.mean_iterations
        )?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

fn dataset_dir(input: &Path) -> &Path {
    if input.is_dir() {
        input
    } else {
        input.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
    }
}

fn fmt_angles(v: &[f64]) -> String {
    v.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(" ")
}

fn write_score(out: &mut dyn Write, est: &DoaEstimate, truth: &[f64], threshold: f64) -> Result<()> {
    let score = score_trial(&est.angles_deg, truth, threshold)?;
    writeln!(out, "estimate_deg: {}", fmt_angles(&est.angles_deg))?;
    writeln!(out, "errors_deg: {}", fmt_angles(&score.errors_deg))?;
    writeln!(out, "hit: {}", score.hit)?;
    Ok(())
}

pub fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let dir = dataset_dir(&args.input);
    if !dir.join(RECORDS_FILE).exists() {
        bail!("no {RECORDS_FILE} in {}", dir.display());
    }
    let (manifest, record) = read_record(dir, args.index)?;
    let dict = manifest.dictionary()?;
    let mut truth: Vec<f64> = record.truth_doas.iter().map(|&t| f64::from(t)).collect();
    truth.sort_by(f64::total_cmp);

    writeln!(out, "record: {} ({:?})", args.index, manifest.split_of(args.index))?;
    writeln!(out, "snr_db: {}", record.snr_db)?;
    writeln!(out, "truth_deg: {}", fmt_angles(&truth))?;
    if let Some(path) = &args.from_predictions {
        let preds = read_predictions(path, manifest.n)?;
        if preds.len() != manifest.record_count {
            bail!(
                "{} holds {} predictions but the dataset has {} records",
                path.display(),
                preds.len(),
                manifest.record_count
            );
        }
        let est = preds[args.index].estimate(&dict, manifest.k)?;
        writeln!(out, "method: predictions")?;
        write_score(out, &est, &truth, args.threshold_deg)?;
    } else {
        let method = args.method.expect("clap enforces --method");
        let ybar = OneBitSnapshot::from_real_stack(&record.ybar_real)?;
        let res = run_method(method, &ybar, &dict, &SbriConfig::default(), &SbriXConfig::default())?;
        let est = estimate_doas(&dict, &res, manifest.k)?;
        writeln!(out, "method: {method}")?;
        write_score(out, &est, &truth, args.threshold_deg)?;
        writeln!(out, "iterations: {}", res.iterations)?;
        writeln!(out, "converged: {}", res.converged)?;
        for w in &res.warnings {
            writeln!(out, "warning: {w}")?;
        }
    }
    Ok(())
}

fn parse_amplitude(s: &str) -> Result<[f64; 2]> {
    let (re, im) = s.split_once(':').with_context(|| format!("amplitude {s:?} is not re:im"))?;
    Ok([re.trim().parse()?, im.trim().parse()?])
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let geom = ArrayGeometry::by_name(&args.geometry)?;
    let dict = build_dictionary(&geom, (-args.fov_deg, args.fov_deg), args.spacing_deg)?;
    let amplitudes = if args.amplitudes.is_empty() {
        None
    } else {
        Some(args.amplitudes.iter().map(|s| parse_amplitude(s)).collect::<Result<Vec<_>>>()?)
    };
    let spec = ScenarioSpec {
        doas_deg: args.doas.clone(),
        amplitude_model: Some(if amplitudes.is_some() {
            AmplitudeModel::Fixed
        } else {
            AmplitudeModel::RandomPhase
        }),
        amplitudes,
    };
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let scene = spec.sample(&mut rng)?;
    let ybar = one_bit_quantize(&simulate_snapshot_with(&geom, &scene, args.snr_db, &mut rng)?.y);
    let mut truth = scene.doas_deg.clone();
    truth.sort_by(f64::total_cmp);

    let signs: String = ybar
        .as_vector()
        .iter()
        .map(|z| format!("{}{}", sign_char(z.re), sign_char(z.im)))
        .collect::<Vec<_>>()
        .join(" ");
    writeln!(out, "ybar: {signs}")?;
    writeln!(out, "truth_deg: {}", fmt_angles(&truth))?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
    }
    for &method in &args.method {
        let res = run_method(method, &ybar, &dict, &SbriConfig::default(), &SbriXConfig::default())?;
        let est = estimate_doas(&dict, &res, scene.source_count())?;
        writeln!(out, "[{method}]")?;
        write_score(out, &est, &truth, 2.0)?;
        writeln!(out, "iterations: {} (converged: {})", res.iterations, res.converged)?;
        if let Some(dir) = &args.out {
            let path = dir.join(format!("spectrum_{}_{}.dat", method.solver.as_str(), method.mode.as_str()));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(f, "# angle_deg magnitude gap_deg")?;
            for (i, theta) in dict.grid_deg().iter().enumerate() {
                writeln!(f, "{theta} {:.9e} {:.9e}", res.x_hat[i].norm(), rad_to_deg(res.beta_rad[i]))?;
            }
            f.flush()?;
        }
    }
    Ok(())
}

fn sign_char(v: f64) -> char {
    if v >= 0.0 {
        '+'
    } else {
        '-'
    }
}

pub fn gen_dataset(args: &GenDatasetArgs, out: &mut dyn Write) -> Result<()> {
    let mode = match args.mode {
        ModeArg::On => GridMode::OnGrid,
        ModeArg::Off => GridMode::OffGrid,
    };
    let mut cfg = GenConfig::new(mode, args.count, args.seed);
    cfg.abs_gaps = args.abs_gaps;
    let (manifest, records) = generate_dataset(&cfg)?;
    write_dataset(&args.out, &manifest, &records)?;
    writeln!(
        out,
        "wrote {} records ({} train, {} val) of {} bytes to {}",
        manifest.record_count,
        manifest.train_count,
        manifest.val_count,
        manifest.record_bytes(),
        args.out.display()
    )?;
    Ok(())
}
