//! Spectrum readout and scoring: peak picking, DOA extraction with gap
//! correction, per-trial hit/error scoring and RMSE/hit-rate aggregation.

use nalgebra::DVector;

use crate::array::{rad_to_deg, SteeringDictionary};
use crate::error::{invalid, Result};

/// Estimated directions, ascending, with the spectrum magnitude at each peak.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaEstimate {
    pub angles_deg: Vec<f64>,
    pub peak_magnitudes: Vec<f64>,
}

fn is_local_max(mag: &[f64], i: usize) -> bool {
    let left = i == 0 || mag[i] > mag[i - 1];
    let right = i + 1 == mag.len() || mag[i] > mag[i + 1];
    left && right
}

/// Indices of the `k` largest local maxima, strongest first. Boundary bins
/// only compare against their single neighbour. If there are fewer than `k`
/// local maxima the remainder is filled with the largest other bins. Ties go
/// to the lower index.
pub fn find_peaks(magnitude: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(invalid("number of peaks must be positive"));
    }
    if k > magnitude.len() {
        return Err(invalid(format!("asked for {k} peaks from {} bins", magnitude.len())));
    }
    let by_magnitude = |a: &usize, b: &usize| {
        magnitude[*b].total_cmp(&magnitude[*a]).then(a.cmp(b))
    };
    let mut maxima: Vec<usize> =
        (0..magnitude.len()).filter(|&i| is_local_max(magnitude, i)).collect();
    maxima.sort_by(by_magnitude);
    maxima.truncate(k);
    if maxima.len() < k {
        let mut rest: Vec<usize> =
            (0..magnitude.len()).filter(|i| !maxima.contains(i)).collect();
        rest.sort_by(by_magnitude);
        maxima.extend(rest.into_iter().take(k - maxima.len()));
    }
    Ok(maxima)
}

/// Angles `grid[n] + beta[n]` at the given peaks, sorted ascending.
pub fn extract_doas(
    dict: &SteeringDictionary,
    beta_rad: &DVector<f64>,
    magnitude: &[f64],
    peaks: &[usize],
) -> Result<DoaEstimate> {
    if beta_rad.len() != dict.len() || magnitude.len() != dict.len() {
        return Err(invalid("spectrum length does not match grid"));
    }
    let mut pairs = Vec::with_capacity(peaks.len());
    for &n in peaks {
        if n >= dict.len() {
            return Err(invalid(format!("peak index {n} outside grid")));
        }
        pairs.push((dict.grid_deg()[n] + rad_to_deg(beta_rad[n]), magnitude[n]));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(DoaEstimate {
        angles_deg: pairs.iter().map(|p| p.0).collect(),
        peak_magnitudes: pairs.iter().map(|p| p.1).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub hit: bool,
    /// Signed errors `estimate - truth` after ascending pairing.
    pub errors_deg: Vec<f64>,
    /// Sum of squared errors; zero for a miss (misses are excluded from RMSE).
    pub sq_err_sum: f64,
}

/// Pairs estimates and truth by ascending order. A hit requires every
/// absolute error to be within `threshold_deg`.
pub fn score_trial(estimate: &[f64], truth: &[f64], threshold_deg: f64) -> Result<TrialScore> {
    if estimate.len() != truth.len() {
        return Err(invalid(format!(
            "{} estimates for {} true directions",
            estimate.len(),
            truth.len()
        )));
    }
    let mut est = estimate.to_vec();
    let mut tru = truth.to_vec();
    est.sort_by(f64::total_cmp);
    tru.sort_by(f64::total_cmp);
    let errors_deg: Vec<f64> = est.iter().zip(&tru).map(|(e, t)| e - t).collect();
    let hit = errors_deg.iter().all(|e| e.abs() <= threshold_deg);
    let sq_err_sum = if hit { errors_deg.iter().map(|e| e * e).sum() } else { 0.0 };
    Ok(TrialScore { hit, errors_deg, sq_err_sum })
}

/// Running RMSE / hit-rate accumulator over trials with `k` sources each.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub trials: usize,
    pub hits: usize,
    pub sq_err_total: f64,
    pub sources: usize,
}

impl Aggregate {
    pub fn new(sources: usize) -> Self {
        Self { sources, ..Self::default() }
    }

    pub fn push(&mut self, score: &TrialScore) {
        self.trials += 1;
        if score.hit {
            self.hits += 1;
            self.sq_err_total += score.sq_err_sum;
        }
    }

    pub fn push_failure(&mut self) {
        self.trials += 1;
    }

    pub fn hit_rate(&self) -> f64 {
        if self.trials == 0 {
            return f64::NAN;
        }
        self.hits as f64 / self.trials as f64
    }

    /// RMSE over successful trials only; NaN when nothing hit.
    pub fn rmse_deg(&self) -> f64 {
        if self.hits == 0 {
            return f64::NAN;
        }
        (self.sq_err_total / (self.hits * self.sources) as f64).sqrt()
    }
}
