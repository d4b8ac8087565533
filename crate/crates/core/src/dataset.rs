//! Labeled training corpora for learned estimators.
//!
//! A dataset directory holds two files:
//!
//! * `manifest`: TOML with array, grid and split metadata;
//! * `records.bin`: fixed-stride little-endian `f32` records laid out as
//!   `ybar_real[2M] | s_star[N] | beta_star[N] | snr_db | truth_doas[K]`.
//!
//! Records are written in a seeded shuffled order; the first
//! `train_count` records form the training split and the rest validation.
//! Gap labels are stored signed, in degrees, unless the manifest says
//! `abs_gaps = true`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::DVector;

use crate::array::{
    build_dictionary, deg_to_rad, one_bit_quantize, simulate_snapshot_with, ArrayGeometry, Scene,
    SteeringDictionary,
};
use crate::error::{invalid, DoaError, Result};
use crate::sbri::GridMode;
use crate::seeds::derive_seed;
use crate::spectrum::{extract_doas, find_peaks, DoaEstimate};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest";
pub const RECORDS_FILE: &str = "records.bin";
pub const TRAIN_FRACTION: f64 = 0.9;

const SHUFFLE_STREAM: u64 = 0x5348_5546;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub ybar_real: Vec<f32>,
    pub s_star: Vec<f32>,
    pub beta_star: Vec<f32>,
    pub snr_db: f32,
    pub truth_doas: Vec<f32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub mode: GridMode,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub fov_deg: [f64; 2],
    pub spacing_deg: f64,
    pub positions: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub record_count: usize,
    pub train_count: usize,
    pub val_count: usize,
    pub seed: u64,
    pub abs_gaps: bool,
}

impl DatasetManifest {
    /// Floats per record: `2M + 2N + 1 + K`.
    pub fn record_floats(&self) -> usize {
        record_floats(self.m, self.n, self.k)
    }

    pub fn record_bytes(&self) -> usize {
        4 * self.record_floats()
    }

    pub fn split_of(&self, index: usize) -> Split {
        if index < self.train_count {
            Split::Train
        } else {
            Split::Val
        }
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.positions.clone())
    }

    pub fn dictionary(&self) -> Result<SteeringDictionary> {
        build_dictionary(
            &self.geometry()?,
            (self.fov_deg[0], self.fov_deg[1]),
            self.spacing_deg,
        )
    }
}

pub fn record_floats(m: usize, n: usize, k: usize) -> usize {
    2 * m + 2 * n + 1 + k
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub mode: GridMode,
    pub count: usize,
    pub seed: u64,
    pub geometry: ArrayGeometry,
    pub fov_deg: (f64, f64),
    pub spacing_deg: f64,
    pub sources: usize,
    pub snr_db: Vec<f64>,
    pub abs_gaps: bool,
}

impl GenConfig {
    /// On-grid corpora sample integer-degree directions on a 1 deg grid;
    /// off-grid corpora use a 2 deg grid with uniform gaps.
    pub fn new(mode: GridMode, count: usize, seed: u64) -> Self {
        Self {
            mode,
            count,
            seed,
            geometry: ArrayGeometry::sla18(),
            fov_deg: (-60.0, 60.0),
            spacing_deg: match mode {
                GridMode::OnGrid => 1.0,
                GridMode::OffGrid => 2.0,
            },
            sources: 2,
            snr_db: (0..=6).map(|i| 5.0 * i as f64).collect(),
            abs_gaps: false,
        }
    }
}

/// A sampled scene with its grid assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScene {
    pub scene: Scene,
    /// Grid index of each source.
    pub grid_indices: Vec<usize>,
    /// Signed gap of each source from its grid point, degrees.
    pub gaps_deg: Vec<f64>,
}

/// Draws `k` sources in distinct grid cells. Amplitudes have real and
/// imaginary parts uniform in `[0.5, 1)`. Off-grid sources are displaced
/// from their grid point by a gap uniform in `[-r/2, r/2)`.
pub fn sample_scene<R: Rng + ?Sized>(
    rng: &mut R,
    mode: GridMode,
    dict: &SteeringDictionary,
    k: usize,
) -> Result<LabeledScene> {
    if k == 0 || k > dict.len() {
        return Err(invalid("source count must be in 1..=grid size"));
    }
    let idx = rand::seq::index::sample(rng, dict.len(), k).into_vec();
    let half = 0.5 * dict.spacing_deg();
    let mut gaps_deg = Vec::with_capacity(k);
    let mut doas = Vec::with_capacity(k);
    let mut amps = Vec::with_capacity(k);
    for &n in &idx {
        let gap = match mode {
            GridMode::OnGrid => 0.0,
            GridMode::OffGrid => rng.random_range(-half..half),
        };
        gaps_deg.push(gap);
        doas.push(dict.grid_deg()[n] + gap);
        amps.push(Complex64::new(rng.random_range(0.5..1.0), rng.random_range(0.5..1.0)));
    }
    Ok(LabeledScene { scene: Scene::new(doas, amps)?, grid_indices: idx, gaps_deg })
}

pub fn make_record<R: Rng + ?Sized>(
    labeled: &LabeledScene,
    snr_db: f64,
    geom: &ArrayGeometry,
    dict: &SteeringDictionary,
    abs_gaps: bool,
    rng: &mut R,
) -> Result<DatasetRecord> {
    let snap = simulate_snapshot_with(geom, &labeled.scene, snr_db, rng)?;
    let ybar = one_bit_quantize(&snap.y);
    let n = dict.len();
    let mut s_star = vec![0f32; n];
    let mut beta_star = vec![0f32; n];
    for ((&idx, &gap), amp) in
        labeled.grid_indices.iter().zip(&labeled.gaps_deg).zip(&labeled.scene.amplitudes)
    {
        s_star[idx] = amp.norm() as f32;
        beta_star[idx] = if abs_gaps { gap.abs() as f32 } else { gap as f32 };
    }
    Ok(DatasetRecord {
        ybar_real: ybar.to_real_stack().into_iter().map(|v| v as f32).collect(),
        s_star,
        beta_star,
        snr_db: snr_db as f32,
        truth_doas: labeled.scene.doas_deg.iter().map(|&d| d as f32).collect(),
    })
}

fn generate_one(cfg: &GenConfig, dict: &SteeringDictionary, index: usize) -> Result<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[index as u64]));
    let labeled = sample_scene(&mut rng, cfg.mode, dict, cfg.sources)?;
    let snr = cfg.snr_db[rng.random_range(0..cfg.snr_db.len())];
    make_record(&labeled, snr, &cfg.geometry, dict, cfg.abs_gaps, &mut rng)
}

/// Generates a corpus in parallel; the output is independent of the thread
/// count.
pub fn generate_dataset(cfg: &GenConfig) -> Result<(DatasetManifest, Vec<DatasetRecord>)> {
    if cfg.count == 0 {
        return Err(invalid("record count must be positive"));
    }
    if cfg.snr_db.is_empty() {
        return Err(invalid("SNR list must not be empty"));
    }
    let dict = build_dictionary(&cfg.geometry, cfg.fov_deg, cfg.spacing_deg)?;
    let records: Vec<DatasetRecord> = (0..cfg.count)
        .into_par_iter()
        .map(|i| generate_one(cfg, &dict, i))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..cfg.count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[SHUFFLE_STREAM]));
    order.shuffle(&mut rng);
    let mut slots: Vec<Option<DatasetRecord>> = records.into_iter().map(Some).collect();
    let shuffled: Vec<DatasetRecord> =
        order.iter().map(|&i| slots[i].take().expect("permutation visits each slot once")).collect();

    let train_count = ((cfg.count as f64) * TRAIN_FRACTION).round() as usize;
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        mode: cfg.mode,
        m: cfg.geometry.element_count(),
        n: dict.len(),
        k: cfg.sources,
        fov_deg: [cfg.fov_deg.0, cfg.fov_deg.1],
        spacing_deg: cfg.spacing_deg,
        positions: cfg.geometry.positions().to_vec(),
        snr_db: cfg.snr_db.clone(),
        record_count: cfg.count,
        train_count,
        val_count: cfg.count - train_count,
        seed: cfg.seed,
        abs_gaps: cfg.abs_gaps,
    };
    Ok((manifest, shuffled))
}

fn check_record(manifest: &DatasetManifest, r: &DatasetRecord) -> Result<()> {
    if r.ybar_real.len() != 2 * manifest.m
        || r.s_star.len() != manifest.n
        || r.beta_star.len() != manifest.n
        || r.truth_doas.len() != manifest.k
    {
        return Err(invalid("record shape does not match manifest"));
    }
    Ok(())
}

fn encode_record(r: &DatasetRecord, out: &mut Vec<u8>) {
    let floats = r
        .ybar_real
        .iter()
        .chain(&r.s_star)
        .chain(&r.beta_star)
        .chain(std::iter::once(&r.snr_db))
        .chain(&r.truth_doas);
    for v in floats {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn decode_record(manifest: &DatasetManifest, bytes: &[u8]) -> DatasetRecord {
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let (m2, n) = (2 * manifest.m, manifest.n);
    DatasetRecord {
        ybar_real: floats[..m2].to_vec(),
        s_star: floats[m2..m2 + n].to_vec(),
        beta_star: floats[m2 + n..m2 + 2 * n].to_vec(),
        snr_db: floats[m2 + 2 * n],
        truth_doas: floats[m2 + 2 * n + 1..].to_vec(),
    }
}

pub fn write_dataset(dir: &Path, manifest: &DatasetManifest, records: &[DatasetRecord]) -> Result<()> {
    if records.len() != manifest.record_count {
        return Err(invalid("manifest record_count does not match records"));
    }
    std::fs::create_dir_all(dir)?;
    let text = toml::to_string(manifest).map_err(|e| DoaError::Format(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    let mut out = BufWriter::new(File::create(dir.join(RECORDS_FILE))?);
    let mut buf = Vec::with_capacity(manifest.record_bytes());
    for r in records {
        check_record(manifest, r)?;
        buf.clear();
        encode_record(r, &mut buf);
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: DatasetManifest =
        toml::from_str(&text).map_err(|e| DoaError::Format(e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(DoaError::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    Ok(manifest)
}

fn check_size(manifest: &DatasetManifest, len: u64) -> Result<()> {
    let stride = manifest.record_bytes() as u64;
    if len % stride != 0 || len / stride != manifest.record_count as u64 {
        return Err(DoaError::Format(format!(
            "records.bin holds {len} bytes, expected {} records of {stride} bytes",
            manifest.record_count
        )));
    }
    Ok(())
}

pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<DatasetRecord>)> {
    let manifest = read_manifest(dir)?;
    let mut file = File::open(dir.join(RECORDS_FILE))?;
    check_size(&manifest, file.metadata()?.len())?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let records = bytes
        .chunks_exact(manifest.record_bytes())
        .map(|chunk| decode_record(&manifest, chunk))
        .collect();
    Ok((manifest, records))
}

/// Reads a single record without loading the whole file.
pub fn read_record(dir: &Path, index: usize) -> Result<(DatasetManifest, DatasetRecord)> {
    let manifest = read_manifest(dir)?;
    if index >= manifest.record_count {
        return Err(invalid(format!(
            "record {index} out of range (dataset has {})",
            manifest.record_count
        )));
    }
    let file = File::open(dir.join(RECORDS_FILE))?;
    check_size(&manifest, file.metadata()?.len())?;
    let stride = manifest.record_bytes();
    let mut reader = BufReader::new(file);
    reader.seek(SeekFrom::Start((index * stride) as u64))?;
    let mut buf = vec![0u8; stride];
    reader.read_exact(&mut buf)?;
    let rec = decode_record(&manifest, &buf);
    Ok((manifest, rec))
}

/// One prediction per dataset record: spectrum magnitudes and gaps in
/// degrees, `2N` little-endian `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub spectrum: Vec<f32>,
    pub gaps_deg: Vec<f32>,
}

impl Prediction {
    /// Reads out `k` directions the same way solver outputs are: strongest
    /// peaks of the spectrum magnitude plus the predicted gap there.
    pub fn estimate(&self, dict: &SteeringDictionary, k: usize) -> Result<DoaEstimate> {
        if self.spectrum.len() != dict.len() || self.gaps_deg.len() != dict.len() {
            return Err(invalid("prediction length does not match grid"));
        }
        let mag: Vec<f64> = self.spectrum.iter().map(|&v| f64::from(v).abs()).collect();
        let beta = DVector::from_iterator(
            dict.len(),
            self.gaps_deg.iter().map(|&g| deg_to_rad(f64::from(g))),
        );
        extract_doas(dict, &beta, &mag, &find_peaks(&mag, k)?)
    }
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = preds.first().map_or(0, |p| p.spectrum.len());
    for p in preds {
        if p.spectrum.len() != n || p.gaps_deg.len() != n {
            return Err(invalid("all predictions must share the grid size"));
        }
        for v in p.spectrum.iter().chain(&p.gaps_deg) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_predictions(path: &Path, n: usize) -> Result<Vec<Prediction>> {
    let bytes = std::fs::read(path)?;
    let stride = 8 * n;
    if n == 0 || bytes.len() % stride != 0 {
        return Err(DoaError::Format(format!(
            "predictions file of {} bytes is not a multiple of {stride}",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(stride)
        .map(|chunk| {
            let floats: Vec<f32> = chunk
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            Prediction { spectrum: floats[..n].to_vec(), gaps_deg: floats[n..].to_vec() }
        })
        .collect())
}

/// Pearson chi-square statistic and p-value of the gap labels at labeled
/// cells against a uniform law over `[-r/2, r/2)` (or `[0, r/2)` for
/// absolute gaps), using `bins` equal-width bins.
pub fn gap_uniformity_chi2(
    manifest: &DatasetManifest,
    records: &[DatasetRecord],
    bins: usize,
) -> Result<(f64, f64)> {
    if bins < 2 {
        return Err(invalid("need at least two bins"));
    }
    let half = 0.5 * manifest.spacing_deg;
    let lo = if manifest.abs_gaps { 0.0 } else { -half };
    let width = (half - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for r in records {
        for (s, b) in r.s_star.iter().zip(&r.beta_star) {
            if *s != 0.0 {
                let k = (((*b as f64) - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
                counts[k] += 1;
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(invalid("no labeled gaps"));
    }
    let expected = total as f64 / bins as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = statrs::distribution::ChiSquared::new((bins - 1) as f64)
        .map_err(|e| invalid(e.to_string()))?;
    let p = 1.0 - statrs::distribution::ContinuousCDF::cdf(&dist, stat);
    Ok((stat, p))
}
