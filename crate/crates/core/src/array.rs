//! Sparse linear array model: geometry, steering vectors, grid dictionaries,
//! single-snapshot simulation and complex one-bit quantization.
//!
//! Element positions are in half-wavelength units, so the phase of element
//! `m` for a plane wave from `theta` is `pi * positions[m] * sin(theta)`.
//! Angles cross the public API in degrees. Grid gaps and the derivative
//! dictionary use radians internally; see [`deg_to_rad`].

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DoaError, Result};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// 18-element sparse array used for most experiments.
pub const SLA18: [u32; 18] = [0, 1, 2, 3, 4, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19];
/// 10-element sparse array with the same 19 half-wavelength aperture.
pub const SLA10: [u32; 10] = [0, 3, 4, 5, 6, 7, 11, 16, 18, 19];

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad * 180.0 / PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
}

#[derive(Deserialize)]
struct GeometryFile {
    positions: Vec<i64>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(invalid("array needs at least two elements"));
        }
        if positions[0] != 0.0 {
            return Err(invalid("first element position must be 0"));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(invalid("non-finite element position"));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("element positions must be strictly increasing"));
        }
        Ok(Self { positions })
    }

    pub fn from_offsets(offsets: &[u32]) -> Result<Self> {
        Self::new(offsets.iter().map(|&p| p as f64).collect())
    }

    pub fn sla18() -> Self {
        Self::from_offsets(&SLA18).expect("valid built-in geometry")
    }

    pub fn sla10() -> Self {
        Self::from_offsets(&SLA10).expect("valid built-in geometry")
    }

    /// Half-wavelength uniform linear array.
    pub fn ula(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| i as f64).collect())
    }

    /// Built-in names: `sla18`, `sla10`, `ulaN`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sla18" => Ok(Self::sla18()),
            "sla10" => Ok(Self::sla10()),
            _ => match name.strip_prefix("ula").map(str::parse::<usize>) {
                Some(Ok(m)) => Self::ula(m),
                _ => Err(invalid(format!("unknown geometry name '{name}'"))),
            },
        }
    }

    /// Parse `positions = [0, 1, 2, ...]` (integer half-wavelength offsets).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: GeometryFile =
            toml::from_str(text).map_err(|e| DoaError::Config(e.to_string()))?;
        if file.positions.iter().any(|&p| p < 0) {
            return Err(invalid("negative element offset"));
        }
        Self::new(file.positions.into_iter().map(|p| p as f64).collect())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn element_count(&self) -> usize {
        self.positions.len()
    }
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if !theta_deg.is_finite() || theta_deg.abs() >= 90.0 {
        return Err(invalid(format!("angle {theta_deg} deg outside (-90, 90)")));
    }
    Ok(())
}

pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<CVector> {
    check_angle(theta_deg)?;
    let s = deg_to_rad(theta_deg).sin();
    Ok(CVector::from_iterator(
        geom.element_count(),
        geom.positions.iter().map(|&p| Complex64::cis(PI * p * s)),
    ))
}

/// Derivative of the steering vector with respect to the angle in radians.
pub fn steering_derivative(geom: &ArrayGeometry, theta_deg: f64) -> Result<CVector> {
    check_angle(theta_deg)?;
    let th = deg_to_rad(theta_deg);
    let (s, c) = th.sin_cos();
    Ok(CVector::from_iterator(
        geom.element_count(),
        geom.positions.iter().map(|&p| {
            let slope = PI * p * c;
            Complex64::new(0.0, slope) * Complex64::cis(PI * p * s)
        }),
    ))
}

/// Uniform angular grid with its manifold `A` and derivative matrix `B`.
#[derive(Debug, Clone)]
pub struct SteeringDictionary {
    grid_deg: Vec<f64>,
    spacing_deg: f64,
    a: CMatrix,
    b: CMatrix,
}

impl SteeringDictionary {
    pub fn grid_deg(&self) -> &[f64] {
        &self.grid_deg
    }

    pub fn spacing_deg(&self) -> f64 {
        self.spacing_deg
    }

    /// Grid spacing in the internal gap unit (radians).
    pub fn spacing_rad(&self) -> f64 {
        deg_to_rad(self.spacing_deg)
    }

    /// Largest admissible gap magnitude `r/2`, radians.
    pub fn gap_limit_rad(&self) -> f64 {
        0.5 * self.spacing_rad()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.grid_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_deg.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.a.nrows()
    }

    /// Index of the grid point closest to `theta_deg` (ties to the lower index).
    pub fn nearest_index(&self, theta_deg: f64) -> usize {
        let lo = self.grid_deg[0];
        let raw = ((theta_deg - lo) / self.spacing_deg).round();
        raw.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// `C(beta) = A + B diag(beta)`, `beta` in radians.
    pub fn offgrid_manifold(&self, beta_rad: &DVector<f64>) -> CMatrix {
        offgrid_manifold(self, beta_rad)
    }
}

pub fn build_dictionary(
    geom: &ArrayGeometry,
    fov_deg: (f64, f64),
    spacing_deg: f64,
) -> Result<SteeringDictionary> {
    let (lo, hi) = fov_deg;
    if !(lo < hi) {
        return Err(invalid("field of view must satisfy lo < hi"));
    }
    if !(spacing_deg > 0.0) {
        return Err(invalid("grid spacing must be positive"));
    }
    let steps = (hi - lo) / spacing_deg;
    let n_steps = steps.round();
    if (steps - n_steps).abs() > 1e-9 * steps.max(1.0) {
        return Err(invalid(format!(
            "field of view [{lo}, {hi}] is not an integral number of {spacing_deg} deg steps"
        )));
    }
    let n = n_steps as usize + 1;
    let grid_deg: Vec<f64> = (0..n).map(|i| lo + i as f64 * spacing_deg).collect();
    let m = geom.element_count();
    let mut a = CMatrix::zeros(m, n);
    let mut b = CMatrix::zeros(m, n);
    for (j, &theta) in grid_deg.iter().enumerate() {
        a.set_column(j, &steering_vector(geom, theta)?);
        b.set_column(j, &steering_derivative(geom, theta)?);
    }
    Ok(SteeringDictionary { grid_deg, spacing_deg, a, b })
}

pub fn offgrid_manifold(dict: &SteeringDictionary, beta_rad: &DVector<f64>) -> CMatrix {
    assert_eq!(beta_rad.len(), dict.len(), "gap vector length must match grid");
    let mut c = dict.a.clone();
    for (j, &beta) in beta_rad.iter().enumerate() {
        if beta != 0.0 {
            let mut col = c.column_mut(j);
            col += dict.b.column(j) * Complex64::new(beta, 0.0);
        }
    }
    c
}

/// Far-field sources for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub doas_deg: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

impl Scene {
    pub fn new(doas_deg: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let scene = Self { doas_deg, amplitudes };
        scene.validate(None)?;
        Ok(scene)
    }

    pub fn source_count(&self) -> usize {
        self.doas_deg.len()
    }

    /// Checks source count, angle range and distinctness. When `geom` is
    /// given, also requires fewer sources than elements.
    pub fn validate(&self, geom: Option<&ArrayGeometry>) -> Result<()> {
        let k = self.doas_deg.len();
        if k == 0 {
            return Err(invalid("scene needs at least one source"));
        }
        if self.amplitudes.len() != k {
            return Err(invalid("one amplitude per source required"));
        }
        if let Some(g) = geom {
            if k >= g.element_count() {
                return Err(invalid("source count must be below element count"));
            }
        }
        for &d in &self.doas_deg {
            check_angle(d)?;
        }
        for i in 0..k {
            for j in i + 1..k {
                if self.doas_deg[i] == self.doas_deg[j] {
                    return Err(invalid("source directions must be distinct"));
                }
            }
        }
        Ok(())
    }

    pub fn mean_power(&self) -> f64 {
        self.amplitudes.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.amplitudes.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub y: CVector,
    pub sigma: f64,
}

/// Noise standard deviation for a given SNR: `SNR = mean|s_k|^2 / sigma^2`.
/// Infinite SNR maps to a noiseless snapshot.
pub fn noise_sigma(scene: &Scene, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    (scene.mean_power() / 10f64.powf(snr_db / 10.0)).sqrt()
}

pub fn simulate_snapshot(
    geom: &ArrayGeometry,
    scene: &Scene,
    snr_db: f64,
    seed: u64,
) -> Result<Snapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_snapshot_with(geom, scene, snr_db, &mut rng)
}

pub fn simulate_snapshot_with<R: Rng + ?Sized>(
    geom: &ArrayGeometry,
    scene: &Scene,
    snr_db: f64,
    rng: &mut R,
) -> Result<Snapshot> {
    scene.validate(Some(geom))?;
    let m = geom.element_count();
    let mut y = CVector::zeros(m);
    for (&theta, &s) in scene.doas_deg.iter().zip(&scene.amplitudes) {
        y += steering_vector(geom, theta)? * s;
    }
    let sigma = noise_sigma(scene, snr_db);
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma / std::f64::consts::SQRT_2)
            .map_err(|e| invalid(e.to_string()))?;
        for v in y.iter_mut() {
            let re = normal.sample(rng);
            let im = normal.sample(rng);
            *v += Complex64::new(re, im);
        }
    }
    Ok(Snapshot { y, sigma })
}

/// Measurement vector with entries in `{+-1 +- j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBitSnapshot {
    ybar: CVector,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn csgn(z: Complex64) -> Complex64 {
    Complex64::new(sign(z.re), sign(z.im))
}

impl OneBitSnapshot {
    /// Wraps an already-quantized vector, checking every part is `+-1`.
    pub fn from_signs(ybar: CVector) -> Result<Self> {
        let ok = ybar
            .iter()
            .all(|z| (z.re == 1.0 || z.re == -1.0) && (z.im == 1.0 || z.im == -1.0));
        if !ok {
            return Err(invalid("one-bit entries must be +-1 +- j"));
        }
        Ok(Self { ybar })
    }

    /// Rebuilds from the stacked real form `[Re; Im]` of length `2M`.
    pub fn from_real_stack(stack: &[f32]) -> Result<Self> {
        if stack.len() % 2 != 0 || stack.is_empty() {
            return Err(invalid("stacked measurement length must be even and nonzero"));
        }
        let m = stack.len() / 2;
        let ybar = CVector::from_iterator(
            m,
            (0..m).map(|i| Complex64::new(stack[i] as f64, stack[m + i] as f64)),
        );
        Self::from_signs(ybar)
    }

    pub fn as_vector(&self) -> &CVector {
        &self.ybar
    }

    pub fn len(&self) -> usize {
        self.ybar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ybar.is_empty()
    }

    /// Real-valued stack `[Re(ybar); Im(ybar)]`.
    pub fn to_real_stack(&self) -> Vec<f64> {
        self.ybar.iter().map(|z| z.re).chain(self.ybar.iter().map(|z| z.im)).collect()
    }
}

pub fn one_bit_quantize(y: &CVector) -> OneBitSnapshot {
    OneBitSnapshot { ybar: y.map(csgn) }
}
