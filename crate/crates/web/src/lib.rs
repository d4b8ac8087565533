//! Browser demo. Three operations are exported to JavaScript:
//!
//! * `solve`: simulate one snapshot of a scene, solve it, return the spectrum;
//! * the convergence trace of that solve (`objective`, `change` on the result);
//! * `link_curves`: the logistic and probit one-bit likelihood links, with
//!   the quadratic bound of the logistic loss at an anchor point.
//!
//! The plain functions (`solve_scene`, `link_table`) carry the logic and are
//! tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

use onebit_doa::array::{
    build_dictionary, one_bit_quantize, rad_to_deg, simulate_snapshot_with, ArrayGeometry,
};
use onebit_doa::bench::{estimate_doas, run_method, AmplitudeModel, Method, ScenarioSpec};
use onebit_doa::gauss::ln_cdf;
use onebit_doa::sbri::SbriConfig;
use onebit_doa::sbrix::{curvature_bound, logistic_loss, sigmoid_link, SbriXConfig};

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Spectrum {
    angles_deg: Vec<f64>,
    magnitudes: Vec<f64>,
    gaps_deg: Vec<f64>,
    estimates_deg: Vec<f64>,
    truth_deg: Vec<f64>,
    objective: Vec<f64>,
    change: Vec<f64>,
    iterations: usize,
    converged: bool,
}

#[wasm_bindgen]
impl Spectrum {
    #[wasm_bindgen(getter)]
    pub fn angles_deg(&self) -> Vec<f64> {
        self.angles_deg.clone()
    }
    /// Normalized so the strongest bin is 1.
    #[wasm_bindgen(getter)]
    pub fn magnitudes(&self) -> Vec<f64> {
        self.magnitudes.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn gaps_deg(&self) -> Vec<f64> {
        self.gaps_deg.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimates_deg(&self) -> Vec<f64> {
        self.estimates_deg.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth_deg(&self) -> Vec<f64> {
        self.truth_deg.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn objective(&self) -> Vec<f64> {
        self.objective.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn change(&self) -> Vec<f64> {
        self.change.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

pub fn solve_scene(
    doas_deg: &[f64],
    snr_db: f64,
    seed: u32,
    method: &str,
    spacing_deg: f64,
    t_max: usize,
) -> Result<Spectrum, String> {
    let method: Method = method.parse().map_err(|e| format!("{e}"))?;
    let geom = ArrayGeometry::sla18();
    let dict = build_dictionary(&geom, (-60.0, 60.0), spacing_deg).map_err(|e| e.to_string())?;
    let spec = ScenarioSpec {
        doas_deg: doas_deg.to_vec(),
        amplitudes: None,
        amplitude_model: Some(AmplitudeModel::RandomPhase),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    let scene = spec.sample(&mut rng).map_err(|e| e.to_string())?;
    let y = simulate_snapshot_with(&geom, &scene, snr_db, &mut rng).map_err(|e| e.to_string())?.y;
    let sbri = SbriConfig { t_max, ..Default::default() };
    let sbri_x = SbriXConfig { base: sbri.clone(), ..Default::default() };
    let res = run_method(method, &one_bit_quantize(&y), &dict, &sbri, &sbri_x).map_err(|e| e.to_string())?;
    let est = estimate_doas(&dict, &res, scene.source_count()).map_err(|e| e.to_string())?;

    let mags = res.magnitudes();
    let peak = mags.max().max(f64::MIN_POSITIVE);
    let mut truth = scene.doas_deg.clone();
    truth.sort_by(f64::total_cmp);
    Ok(Spectrum {
        angles_deg: dict.grid_deg().to_vec(),
        magnitudes: mags.iter().map(|m| m / peak).collect(),
        gaps_deg: res.beta_rad.iter().map(|&b| rad_to_deg(b)).collect(),
        estimates_deg: est.angles_deg,
        truth_deg: truth,
        objective: res.objective_trace,
        change: res.change_trace,
        iterations: res.iterations,
        converged: res.converged,
    })
}

#[wasm_bindgen]
pub fn solve(
    doas_deg: &[f64],
    snr_db: f64,
    seed: u32,
    method: &str,
    spacing_deg: f64,
    t_max: usize,
) -> Result<Spectrum, JsError> {
    solve_scene(doas_deg, snr_db, seed, method, spacing_deg, t_max).map_err(|e| JsError::new(&e))
}

/// Rows of `[s, logistic P(+1), probit P(+1), logistic loss, quadratic bound]`
/// flattened row-major, for `points` values of `s` in `[lo, hi]`. The bound
/// is anchored at `anchor`.
pub fn link_table(a: f64, b: f64, anchor: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(a > 0.0 && b > 0.0) {
        return Err("a and b must be positive".into());
    }
    if points < 2 || !(hi > lo) {
        return Err("need at least two points on a non-empty range".into());
    }
    let l = curvature_bound(a, b);
    let f0 = logistic_loss(anchor, a, b);
    let df0 = -a * b / (a + (b * anchor).exp());
    let mut out = Vec::with_capacity(points * 5);
    for i in 0..points {
        let s = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        out.extend([
            s,
            sigmoid_link(s, a, b),
            ln_cdf(s).exp(),
            logistic_loss(s, a, b),
            f0 + df0 * (s - anchor) + 0.5 * l * (s - anchor).powi(2),
        ]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn link_curves(a: f64, b: f64, anchor: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    link_table(a, b, anchor, lo, hi, points).map_err(|e| JsError::new(&e))
}
