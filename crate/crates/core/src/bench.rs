//! Monte Carlo benchmark harness.
//!
//! A [`BenchConfig`] (TOML) fixes an array, a scenario, a grid, a list of
//! methods and an SNR sweep. [`run_bench`] runs every
//! `(method, snr, trial)` combination and [`write_bench`] writes:
//!
//! * `trials.csv`: one row per `(method, snr, trial)`, sorted in that order;
//! * `summary.csv`: one row per `(method, snr)`;
//! * `timings.csv`: wall-clock time per row (kept apart so the other two
//!   files are reproducible byte for byte);
//! * `traces.csv`: per-iteration objective and change, when tracing is on.
//!
//! Floats are written with 9 significant digits. Summary values are computed
//! from the rounded per-trial values, so `summary.csv` can be recomputed
//! exactly from `trials.csv`.
//!
//! Trial `t` at SNR index `s` draws its amplitudes and noise from a generator
//! seeded with `derive_seed(seed, [s, t])`; all methods see the same data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{
    build_dictionary, one_bit_quantize, simulate_snapshot_with, ArrayGeometry, OneBitSnapshot,
    Scene, SteeringDictionary,
};
use crate::error::{invalid, DoaError, Result};
use crate::sbri::{sbri_solve, GridMode, PriorMode, SbriConfig, SolverResult};
use crate::sbrix::{sbrix_solve, SbriXConfig};
use crate::seeds::derive_seed;
use crate::spectrum::{extract_doas, find_peaks, score_trial, DoaEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Sbri,
    SbriX,
    SbriSlimPrior,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Sbri => "sbri",
            Solver::SbriX => "sbri_x",
            Solver::SbriSlimPrior => "sbri_slim_prior",
        }
    }
}

/// A solver together with its grid mode, written `sbri_x:off_grid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Method {
    pub solver: Solver,
    pub mode: GridMode,
}

impl Method {
    pub const fn new(solver: Solver, mode: GridMode) -> Self {
        Self { solver, mode }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.solver.as_str(), self.mode.as_str())
    }
}

impl FromStr for Method {
    type Err = DoaError;

    fn from_str(s: &str) -> Result<Self> {
        let (solver, mode) = s.split_once(':').unwrap_or((s, "on_grid"));
        let solver = match solver {
            "sbri" => Solver::Sbri,
            "sbri_x" | "sbrix" => Solver::SbriX,
            "sbri_slim_prior" => Solver::SbriSlimPrior,
            other => return Err(invalid(format!("unknown solver '{other}'"))),
        };
        let mode = match mode {
            "on_grid" | "on" => GridMode::OnGrid,
            "off_grid" | "off" => GridMode::OffGrid,
            other => return Err(invalid(format!("unknown grid mode '{other}'"))),
        };
        Ok(Self { solver, mode })
    }
}

impl TryFrom<String> for Method {
    type Error = DoaError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub positions: Option<Vec<f64>>,
}

impl GeometrySpec {
    pub fn resolve(&self) -> Result<ArrayGeometry> {
        match (&self.name, &self.positions) {
            (Some(_), Some(_)) => Err(DoaError::Config("give either geometry.name or geometry.positions".into())),
            (Some(name), None) => ArrayGeometry::by_name(name),
            (None, Some(p)) => ArrayGeometry::new(p.clone()),
            (None, None) => Ok(ArrayGeometry::sla18()),
        }
    }
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self { name: Some("sla18".into()), positions: None }
    }
}

/// How source amplitudes are chosen for each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeModel {
    /// `amplitudes` used as given in every trial.
    Fixed,
    /// Moduli from `amplitudes` (unit when omitted), phases uniform per trial.
    RandomPhase,
    /// Real and imaginary parts uniform in `[0.5, 1)` per trial.
    UniformBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub doas_deg: Vec<f64>,
    /// `[re, im]` per source.
    #[serde(default)]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    /// Defaults to `fixed` when `amplitudes` is given, else `random_phase`.
    #[serde(default)]
    pub amplitude_model: Option<AmplitudeModel>,
}

impl ScenarioSpec {
    pub fn model(&self) -> AmplitudeModel {
        self.amplitude_model.unwrap_or(if self.amplitudes.is_some() {
            AmplitudeModel::Fixed
        } else {
            AmplitudeModel::RandomPhase
        })
    }

    fn given(&self) -> Option<Vec<Complex64>> {
        self.amplitudes
            .as_ref()
            .map(|a| a.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        match (self.model(), &self.amplitudes) {
            (AmplitudeModel::Fixed, None) => {
                Err(DoaError::Config("fixed amplitude model needs scenario.amplitudes".into()))
            }
            (AmplitudeModel::UniformBox, Some(_)) => {
                Err(DoaError::Config("uniform_box amplitudes are drawn, not given".into()))
            }
            (_, Some(a)) if a.len() != self.doas_deg.len() => {
                Err(DoaError::Config("one amplitude per direction is required".into()))
            }
            _ => Ok(()),
        }
    }

    /// Draws the scene for one trial from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Scene> {
        let k = self.doas_deg.len();
        let amps = match self.model() {
            AmplitudeModel::Fixed => self.given().ok_or_else(|| invalid("amplitudes missing"))?,
            AmplitudeModel::RandomPhase => {
                let moduli: Vec<f64> = match self.given() {
                    Some(a) => a.iter().map(|z| z.norm()).collect(),
                    None => vec![1.0; k],
                };
                moduli
                    .into_iter()
                    .map(|r| Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)))
                    .collect()
            }
            AmplitudeModel::UniformBox => (0..k)
                .map(|_| Complex64::new(rng.random_range(0.5..1.0), rng.random_range(0.5..1.0)))
                .collect(),
        };
        Scene::new(self.doas_deg.clone(), amps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub fov_deg: [f64; 2],
    pub spacing_deg: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { fov_deg: [-60.0, 60.0], spacing_deg: 1.0 }
    }
}

fn default_threshold() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub geometry: GeometrySpec,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub grid: GridSpec,
    pub methods: Vec<Method>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// A trial is a hit when every source is estimated within this many degrees.
    #[serde(default = "default_threshold")]
    pub threshold_deg: f64,
    #[serde(default)]
    pub sbri: SbriConfig,
    #[serde(default)]
    pub sbri_x: SbriXConfig,
    /// Record objective/change traces for the first `trace_trials` trials.
    #[serde(default)]
    pub trace_trials: usize,
}

impl BenchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| DoaError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(DoaError::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(DoaError::Config("snr_db must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(DoaError::Config("methods must not be empty".into()));
        }
        if !(self.threshold_deg > 0.0) {
            return Err(DoaError::Config("threshold_deg must be positive".into()));
        }
        let geom = self.geometry.resolve()?;
        self.scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.scenario.sample(&mut rng)?.validate(Some(&geom))?;
        self.sbri.validate()?;
        self.sbri_x.validate()?;
        Ok(())
    }

    pub fn dictionary(&self) -> Result<SteeringDictionary> {
        build_dictionary(
            &self.geometry.resolve()?,
            (self.grid.fov_deg[0], self.grid.fov_deg[1]),
            self.grid.spacing_deg,
        )
    }
}

/// Runs one method on a quantized snapshot.
pub fn run_method(
    method: Method,
    ybar: &OneBitSnapshot,
    dict: &SteeringDictionary,
    sbri: &SbriConfig,
    sbri_x: &SbriXConfig,
) -> Result<SolverResult> {
    match method.solver {
        Solver::Sbri => sbri_solve(ybar, dict, sbri, method.mode),
        Solver::SbriSlimPrior => {
            let cfg = SbriConfig { prior_mode: PriorMode::Slim, ..sbri.clone() };
            sbri_solve(ybar, dict, &cfg, method.mode)
        }
        Solver::SbriX => sbrix_solve(ybar, dict, sbri_x, method.mode),
    }
}

/// Picks the `k` strongest peaks of a solve and converts them to angles.
pub fn estimate_doas(dict: &SteeringDictionary, res: &SolverResult, k: usize) -> Result<DoaEstimate> {
    let mag: Vec<f64> = res.magnitudes().iter().copied().collect();
    let peaks = find_peaks(&mag, k)?;
    extract_doas(dict, &res.beta_rad, &mag, &peaks)
}

/// Rounds to 9 significant digits, the precision used in CSV output.
pub fn round_sig9(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.8e}").parse().expect("formatted float parses")
}

fn fmt9(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.8e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub method: Method,
    pub snr_db: f64,
    pub trial: usize,
    pub hit: bool,
    /// Sorted estimates; empty if the solve failed.
    pub estimates_deg: Vec<f64>,
    /// `estimate - truth` per source, rounded to 9 significant digits.
    pub errors_deg: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `ok` or the solver error.
    pub status: String,
}

impl TrialRow {
    pub fn failed(&self) -> bool {
        self.status != "ok"
    }

    pub fn sq_err(&self) -> f64 {
        if self.hit {
            self.errors_deg.iter().map(|e| e * e).sum()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub snr_db: f64,
    pub trials: usize,
    pub hits: usize,
    pub failures: usize,
    pub hit_rate: f64,
    /// Over hits only; NaN when there are none.
    pub rmse_deg: f64,
    /// Over trials whose solve succeeded.
    pub mean_iterations: f64,
    pub converged_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub method: Method,
    pub snr_db: f64,
    pub trial: usize,
    pub iteration: usize,
    pub objective: f64,
    /// Change at this iteration; NaN for the initial point.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub trials: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    /// Wall time in milliseconds, aligned with `trials`.
    pub wall_time_ms: Vec<f64>,
    pub traces: Vec<TraceRow>,
}

struct TrialOutcome {
    row: TrialRow,
    ms: f64,
    trace: Vec<TraceRow>,
}

fn run_trial(
    cfg: &BenchConfig,
    geom: &ArrayGeometry,
    dict: &SteeringDictionary,
    snr_idx: usize,
    trial: usize,
) -> Result<Vec<TrialOutcome>> {
    let snr = cfg.snr_db[snr_idx];
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[snr_idx as u64, trial as u64]));
    let scene = cfg.scenario.sample(&mut rng)?;
    let snap = simulate_snapshot_with(geom, &scene, snr, &mut rng)?;
    let ybar = one_bit_quantize(&snap.y);
    let k = scene.source_count();
    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = Instant::now();
        let solved = run_method(method, &ybar, dict, &cfg.sbri, &cfg.sbri_x)
            .and_then(|res| estimate_doas(dict, &res, k).map(|est| (res, est)));
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let (row, trace) = match solved {
            Ok((res, est)) => {
                let est_deg: Vec<f64> = est.angles_deg.iter().map(|&a| round_sig9(a)).collect();
                let score = score_trial(&est.angles_deg, &scene.doas_deg, cfg.threshold_deg)?;
                let trace = if trial < cfg.trace_trials {
                    res.objective_trace
                        .iter()
                        .enumerate()
                        .map(|(i, &obj)| TraceRow {
                            method,
                            snr_db: snr,
                            trial,
                            iteration: i,
                            objective: round_sig9(obj),
                            change: if i == 0 { f64::NAN } else { round_sig9(res.change_trace[i - 1]) },
                        })
                        .collect()
                } else {
                    Vec::new()
                };
                let row = TrialRow {
                    method,
                    snr_db: snr,
                    trial,
                    hit: score.hit,
                    estimates_deg: est_deg,
                    errors_deg: score.errors_deg.iter().map(|&e| round_sig9(e)).collect(),
                    iterations: res.iterations,
                    converged: res.converged,
                    status: "ok".into(),
                };
                (row, trace)
            }
            Err(e) => (
                TrialRow {
                    method,
                    snr_db: snr,
                    trial,
                    hit: false,
                    estimates_deg: Vec::new(),
                    errors_deg: Vec::new(),
                    iterations: 0,
                    converged: false,
                    status: e.to_string(),
                },
                Vec::new(),
            ),
        };
        out.push(TrialOutcome { row, ms, trace });
    }
    Ok(out)
}

/// Aggregates trial rows per `(method, snr)` in first-seen order.
pub fn summarize(rows: &[TrialRow], sources: usize) -> Vec<SummaryRow> {
    let mut order: Vec<(Method, u64)> = Vec::new();
    let mut groups: BTreeMap<(Method, u64), Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.method, r.snr_db.to_bits());
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let trials = g.len();
            let hits = g.iter().filter(|r| r.hit).count();
            let ok: Vec<_> = g.iter().filter(|r| !r.failed()).collect();
            let sq: f64 = g.iter().map(|r| r.sq_err()).sum();
            let rmse = if hits == 0 { f64::NAN } else { (sq / (hits * sources) as f64).sqrt() };
            let mean_iter = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| r.iterations as f64).sum::<f64>() / ok.len() as f64
            };
            SummaryRow {
                method: key.0,
                snr_db: f64::from_bits(key.1),
                trials,
                hits,
                failures: trials - ok.len(),
                hit_rate: hits as f64 / trials as f64,
                rmse_deg: rmse,
                mean_iterations: mean_iter,
                converged_rate: g.iter().filter(|r| r.converged).count() as f64 / trials as f64,
            }
        })
        .collect()
}

/// Runs the sweep. `threads = None` uses rayon's default pool; results do
/// not depend on the thread count.
pub fn run_bench(cfg: &BenchConfig, threads: Option<usize>) -> Result<BenchOutput> {
    cfg.validate()?;
    let geom = cfg.geometry.resolve()?;
    let dict = cfg.dictionary()?;
    let sources = cfg.scenario.doas_deg.len();
    let jobs: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let work = || -> Result<Vec<Vec<TrialOutcome>>> {
        jobs.par_iter()
            .map(|&(s, t)| run_trial(cfg, &geom, &dict, s, t))
            .collect()
    };
    let per_job = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| DoaError::Config(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    // jobs are (snr, trial)-major; regroup method-major
    let mut outcomes: Vec<TrialOutcome> = Vec::with_capacity(jobs.len() * cfg.methods.len());
    let mut columns: Vec<std::vec::IntoIter<TrialOutcome>> =
        per_job.into_iter().map(Vec::into_iter).collect();
    for _ in 0..cfg.methods.len() {
        for col in columns.iter_mut() {
            outcomes.push(col.next().expect("one outcome per method"));
        }
    }

    let mut trials = Vec::with_capacity(outcomes.len());
    let mut wall_time_ms = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::new();
    for o in outcomes {
        trials.push(o.row);
        wall_time_ms.push(o.ms);
        traces.extend(o.trace);
    }
    let summary = summarize(&trials, sources);
    Ok(BenchOutput { trials, summary, wall_time_ms, traces })
}

fn csv_err(e: csv::Error) -> DoaError {
    DoaError::Csv(e)
}

pub fn write_trials_csv<W: Write>(w: W, rows: &[TrialRow], sources: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> =
        ["method", "snr_db", "trial", "hit", "iterations", "converged"].map(String::from).to_vec();
    header.extend((1..=sources).map(|i| format!("est_{i}_deg")));
    header.extend((1..=sources).map(|i| format!("err_{i}_deg")));
    header.push("status".into());
    wr.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.method.to_string(),
            fmt9(r.snr_db),
            r.trial.to_string(),
            u8::from(r.hit).to_string(),
            r.iterations.to_string(),
            u8::from(r.converged).to_string(),
        ];
        for i in 0..sources {
            rec.push(r.estimates_deg.get(i).map_or("NaN".into(), |&v| fmt9(v)));
        }
        for i in 0..sources {
            rec.push(r.errors_deg.get(i).map_or("NaN".into(), |&v| fmt9(v)));
        }
        rec.push(r.status.clone());
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "method",
        "snr_db",
        "trials",
        "hits",
        "failures",
        "hit_rate",
        "rmse_deg",
        "mean_iterations",
        "converged_rate",
    ])
    .map_err(csv_err)?;
    for r in rows {
        wr.write_record([
            r.method.to_string(),
            fmt9(r.snr_db),
            r.trials.to_string(),
            r.hits.to_string(),
            r.failures.to_string(),
            fmt9(r.hit_rate),
            fmt9(r.rmse_deg),
            fmt9(r.mean_iterations),
            fmt9(r.converged_rate),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Parses a `trials.csv` written by [`write_trials_csv`].
pub fn read_trials_csv<R: std::io::Read>(r: R) -> Result<(Vec<TrialRow>, usize)> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let sources = headers.iter().filter(|h| h.starts_with("err_")).count();
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| DoaError::Format(format!("bad number '{s}'"))) };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |i: usize| rec.get(i).ok_or_else(|| DoaError::Format("short row".into()));
        let status = field(6 + 2 * sources)?.to_string();
        let failed = status != "ok";
        let parse_list = |off: usize| -> Result<Vec<f64>> {
            if failed {
                return Ok(Vec::new());
            }
            (0..sources).map(|i| num(field(off + i)?)).collect()
        };
        rows.push(TrialRow {
            method: field(0)?.parse()?,
            snr_db: num(field(1)?)?,
            trial: num(field(2)?)? as usize,
            hit: field(3)? == "1",
            iterations: num(field(4)?)? as usize,
            converged: field(5)? == "1",
            estimates_deg: parse_list(6)?,
            errors_deg: parse_list(6 + sources)?,
            status,
        });
    }
    Ok((rows, sources))
}

pub fn write_bench(out_dir: &Path, out: &BenchOutput, sources: usize) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_trials_csv(std::fs::File::create(out_dir.join("trials.csv"))?, &out.trials, sources)?;
    write_summary_csv(std::fs::File::create(out_dir.join("summary.csv"))?, &out.summary)?;

    let mut wr = csv::Writer::from_path(out_dir.join("timings.csv")).map_err(csv_err)?;
    wr.write_record(["method", "snr_db", "trial", "wall_time_ms"]).map_err(csv_err)?;
    for (r, ms) in out.trials.iter().zip(&out.wall_time_ms) {
        wr.write_record([r.method.to_string(), fmt9(r.snr_db), r.trial.to_string(), format!("{ms:.3}")])
            .map_err(csv_err)?;
    }
    wr.flush()?;

    if !out.traces.is_empty() {
        let mut wr = csv::Writer::from_path(out_dir.join("traces.csv")).map_err(csv_err)?;
        wr.write_record(["method", "snr_db", "trial", "iteration", "objective", "change"])
            .map_err(csv_err)?;
        for t in &out.traces {
            wr.write_record([
                t.method.to_string(),
                fmt9(t.snr_db),
                t.trial.to_string(),
                t.iteration.to_string(),
                fmt9(t.objective),
                fmt9(t.change),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
    }
    Ok(())
}

fn file_stem(m: Method) -> String {
    format!("{}_{}", m.solver.as_str(), m.mode.as_str())
}

/// Writes plot-ready series: `<metric>_<method>.dat` with columns
/// `snr_db value` for `rmse_deg`, `hit_rate` and `mean_iterations`, a
/// markdown table `report.md`, and one `trace_<method>.dat` per method with
/// columns `snr_db trial iteration objective change` when traces exist.
/// Returns the paths written.
pub fn emit_report(
    out_dir: &Path,
    summary: &[SummaryRow],
    traces: &[TraceRow],
) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut methods: Vec<Method> = Vec::new();
    for r in summary {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let metrics: [(&str, fn(&SummaryRow) -> f64); 3] = [
        ("rmse_deg", |r| r.rmse_deg),
        ("hit_rate", |r| r.hit_rate),
        ("mean_iterations", |r| r.mean_iterations),
    ];
    let mut written = Vec::new();
    for &m in &methods {
        for (name, get) in metrics {
            let path = out_dir.join(format!("{name}_{}.dat", file_stem(m)));
            let mut text = format!("# snr_db {name}\n");
            for r in summary.iter().filter(|r| r.method == m) {
                text.push_str(&format!("{} {}\n", fmt9(r.snr_db), fmt9(get(r))));
            }
            std::fs::write(&path, text)?;
            written.push(path);
        }
        let rows: Vec<&TraceRow> = traces.iter().filter(|t| t.method == m).collect();
        if !rows.is_empty() {
            let path = out_dir.join(format!("trace_{}.dat", file_stem(m)));
            let mut text = String::from("# snr_db trial iteration objective change\n");
            for t in rows {
                text.push_str(&format!(
                    "{} {} {} {} {}\n",
                    fmt9(t.snr_db),
                    t.trial,
                    t.iteration,
                    fmt9(t.objective),
                    fmt9(t.change)
                ));
            }
            std::fs::write(&path, text)?;
            written.push(path);
        }
    }

    let mut md = String::from(
        "| method | SNR (dB) | trials | hit rate | RMSE (deg) | mean iterations |\n|---|---|---|---|---|---|\n",
    );
    for r in summary {
        md.push_str(&format!(
            "| {} | {} | {} | {:.3} | {:.4} | {:.1} |\n",
            r.method, r.snr_db, r.trials, r.hit_rate, r.rmse_deg, r.mean_iterations
        ));
    }
    let path = out_dir.join("report.md");
    std::fs::write(&path, md)?;
    written.push(path);
    Ok(written)
}
