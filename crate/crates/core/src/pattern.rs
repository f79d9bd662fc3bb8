//! Mode content, temporal period and regime classification of simulated
//! fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{FieldState, Grid1D};

/// Spatial modes count when `max_{k>=1} |a_k| > SPATIAL_TOL·|a_0|`.
pub const SPATIAL_TOL: f64 = 1e-3;
/// Oscillation counts when the peak-to-peak excursion exceeds `TEMPORAL_TOL·mean`.
pub const TEMPORAL_TOL: f64 = 1e-3;
pub const DEFAULT_ONSET_FRACTION: f64 = 0.2;
/// Minimum peak prominence as a fraction of the series range.
pub const PEAK_PROMINENCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub amplitudes: Vec<f64>,
    /// Largest `|a_k|` over `k >= 1`; 0 if `k_max` is 0.
    pub dominant_k: usize,
}

impl ModeSpectrum {
    pub fn mean(&self) -> f64 {
        self.amplitudes[0]
    }

    /// Largest non-constant coefficient in absolute value.
    pub fn max_nonconstant(&self) -> f64 {
        self.amplitudes[1..]
            .iter()
            .fold(0.0, |m: f64, a| m.max(a.abs()))
    }

    /// Evaluates the truncated cosine series on the grid.
    pub fn reconstruct(&self, grid: &Grid1D) -> Vec<f64> {
        grid.xs()
            .iter()
            .map(|x| {
                self.amplitudes
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * (k as f64 * x / grid.ell).cos())
                    .sum()
            })
            .collect()
    }
}

/// Cosine-basis coefficients `a_k`, `k = 0..=k_max`, by the trapezoid rule.
///
/// On the vertex grid this is a type-I discrete cosine transform, so the
/// last mode `k = n-1` picks up the same factor 2 as `k = 0`.
pub fn cosine_spectrum(field: &[f64], grid: &Grid1D, k_max: usize) -> ModeSpectrum {
    CosineBasis::new(grid, k_max).project(field)
}

/// Tabulated quadrature weights `w_j (2 - δ_k0) cos(k x_j / ℓ) / (n-1)`.
#[derive(Clone, Debug)]
pub struct CosineBasis {
    n: usize,
    k_max: usize,
    table: Vec<f64>,
}

impl CosineBasis {
    pub fn new(grid: &Grid1D, k_max: usize) -> Self {
        let n = grid.n;
        let m = (n - 1) as f64;
        let period = 2 * (n - 1);
        let mut table = Vec::with_capacity((k_max + 1) * n);
        for k in 0..=k_max {
            let norm = if k % (n - 1) == 0 { 1.0 } else { 2.0 };
            for j in 0..n {
                // cos(k x_j / ℓ) = cos(π k j / (n-1)); reducing the phase
                // keeps large k accurate.
                let phase = (k * j) % period;
                let c = (std::f64::consts::PI * phase as f64 / m).cos();
                let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                table.push(norm * w * c / m);
            }
        }
        Self { n, k_max, table }
    }

    pub fn project(&self, field: &[f64]) -> ModeSpectrum {
        assert_eq!(field.len(), self.n, "field does not match grid");
        let amplitudes: Vec<f64> = self
            .table
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(field).map(|(w, v)| w * v).sum())
            .collect();
        let dominant_k = (1..=self.k_max)
            .max_by(|&a, &b| amplitudes[a].abs().total_cmp(&amplitudes[b].abs()))
            .unwrap_or(0);
        ModeSpectrum {
            amplitudes,
            dominant_k,
        }
    }
}

/// Default number of modes to keep: enough for any pattern the grid resolves
/// well, capped by the grid.
pub fn default_k_max(grid: &Grid1D) -> usize {
    (grid.n - 1).min(64)
}

/// Mean spacing of prominent local maxima. `None` if fewer than three peaks.
pub fn temporal_period(times: &[f64], values: &[f64]) -> Result<Option<f64>> {
    if times.len() != values.len() {
        return Err(Error::Precondition(
            "times and values differ in length".into(),
        ));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(
            "time grid is not strictly increasing".into(),
        ));
    }
    let peaks = prominent_peaks(times, values);
    if peaks.len() < 3 {
        return Ok(None);
    }
    Ok(Some(
        (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64,
    ))
}

/// Times of local maxima whose prominence is at least `PEAK_PROMINENCE` of
/// the series range, refined by a parabola through the neighbours.
pub fn prominent_peaks(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Vec::new();
    }
    let min_prom = PEAK_PROMINENCE * range;
    let mut out = Vec::new();
    let mut j = 1;
    while j < n - 1 {
        // Treat a flat top as one peak at its midpoint.
        if values[j] > values[j - 1] {
            let mut e = j;
            while e + 1 < n && values[e + 1] == values[j] {
                e += 1;
            }
            if e + 1 < n && values[e + 1] < values[j] {
                let top = values[j];
                let mut left_min = top;
                let mut l = j;
                while l > 0 {
                    l -= 1;
                    if values[l] > top {
                        break;
                    }
                    left_min = left_min.min(values[l]);
                }
                let mut right_min = top;
                let mut r = e;
                while r + 1 < n {
                    r += 1;
                    if values[r] > top {
                        break;
                    }
                    right_min = right_min.min(values[r]);
                }
                if top - left_min.max(right_min) >= min_prom {
                    let c = (j + e) / 2;
                    out.push(refine_peak(times, values, c));
                }
            }
            j = e + 1;
        } else {
            j += 1;
        }
    }
    out
}

fn refine_peak(times: &[f64], values: &[f64], c: usize) -> f64 {
    if c == 0 || c + 1 >= values.len() {
        return times[c];
    }
    let (y0, y1, y2) = (values[c - 1], values[c], values[c + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    let h_left = times[c] - times[c - 1];
    let h_right = times[c + 1] - times[c];
    if denom == 0.0 || (h_left - h_right).abs() > 1e-9 * h_left {
        return times[c];
    }
    let offset = 0.5 * (y0 - y2) / denom;
    times[c] + offset.clamp(-0.5, 0.5) * h_left
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternClass {
    ConstantSteady,
    HomogeneousPeriodic,
    StationaryPattern,
    SpatiotemporalPattern,
}

impl PatternClass {
    pub fn from_indices(spatial: bool, temporal: bool) -> Self {
        match (spatial, temporal) {
            (false, false) => PatternClass::ConstantSteady,
            (false, true) => PatternClass::HomogeneousPeriodic,
            (true, false) => PatternClass::StationaryPattern,
            (true, true) => PatternClass::SpatiotemporalPattern,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub class: PatternClass,
    /// Modes with window-averaged `|a_k|` at least a tenth of the largest,
    /// strongest first. Empty for spatially homogeneous states.
    pub dominant_modes: Vec<usize>,
    pub temporal_period: Option<f64>,
    pub transient_onset: Option<f64>,
    /// `max_k |a_k| / |a_0|` averaged over the window (infected field).
    pub spatial_index: f64,
    /// Relative peak-to-peak excursion of the tracked coefficients.
    pub temporal_index: f64,
    pub infected_min: f64,
    pub infected_max: f64,
}

/// Infected-field spectra for every snapshot, computed in parallel.
pub fn spectra(grid: &Grid1D, snapshots: &[FieldState], k_max: usize) -> Vec<ModeSpectrum> {
    let basis = CosineBasis::new(grid, k_max);
    snapshots.par_iter().map(|s| basis.project(&s.i)).collect()
}

fn peak_to_peak(v: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Classifies the snapshots with `t` in `window`.
///
/// Both fields are examined; the spatial and temporal indices are the larger
/// of the two fields' values.
pub fn classify_pattern(
    grid: &Grid1D,
    snapshots: &[FieldState],
    window: (f64, f64),
) -> Result<PatternReport> {
    let (t0, t1) = window;
    let last_t = snapshots.last().map(|s| s.t).unwrap_or(f64::NEG_INFINITY);
    let first_t = snapshots.first().map(|s| s.t).unwrap_or(f64::INFINITY);
    if !(t0 < t1) || t1 > last_t + 1e-9 || t0 < first_t - 1e-9 {
        return Err(Error::Precondition(format!(
            "analysis window [{t0}, {t1}] is not inside the trajectory [{first_t}, {last_t}]"
        )));
    }
    let in_window: Vec<&FieldState> = snapshots
        .iter()
        .filter(|s| s.t >= t0 - 1e-9 && s.t <= t1 + 1e-9)
        .collect();
    if in_window.len() < 2 {
        return Err(Error::Precondition(
            "analysis window holds fewer than two snapshots".into(),
        ));
    }
    let k_max = default_k_max(grid);
    let basis = CosineBasis::new(grid, k_max);
    let per_field = |pick: fn(&FieldState) -> &Vec<f64>| -> (f64, f64, Vec<f64>) {
        let specs: Vec<ModeSpectrum> = in_window
            .par_iter()
            .map(|s| basis.project(pick(s)))
            .collect();
        let m = specs.len() as f64;
        let mean_a0 = specs.iter().map(|s| s.mean()).sum::<f64>() / m;
        let mut avg = vec![0.0; k_max + 1];
        for s in &specs {
            for (acc, a) in avg.iter_mut().zip(&s.amplitudes) {
                *acc += a.abs() / m;
            }
        }
        let spatial = specs.iter().map(|s| s.max_nonconstant()).sum::<f64>() / m;
        let dom = (1..=k_max)
            .max_by(|&a, &b| avg[a].total_cmp(&avg[b]))
            .unwrap_or(0);
        let scale = mean_a0.abs().max(f64::MIN_POSITIVE);
        let ptp0 = peak_to_peak(specs.iter().map(|s| s.mean()));
        let ptpk = if dom > 0 {
            peak_to_peak(specs.iter().map(|s| s.amplitudes[dom]))
        } else {
            0.0
        };
        (spatial / scale, ptp0.max(ptpk) / scale, avg)
    };
    let (sx_i, st_i, avg_i) = per_field(|s| &s.i);
    let (sx_s, st_s, _) = per_field(|s| &s.s);
    let spatial_index = sx_i.max(sx_s);
    let temporal_index = st_i.max(st_s);
    let spatial = spatial_index > SPATIAL_TOL;
    let temporal = temporal_index > TEMPORAL_TOL;
    let class = PatternClass::from_indices(spatial, temporal);

    let dominant_modes = if spatial {
        let top = avg_i[1..].iter().fold(0.0f64, |m, a| m.max(*a));
        let mut modes: Vec<usize> = (1..=k_max).filter(|&k| avg_i[k] >= 0.1 * top).collect();
        modes.sort_by(|&a, &b| avg_i[b].total_cmp(&avg_i[a]));
        modes
    } else {
        Vec::new()
    };
    let temporal_period = if temporal {
        let times: Vec<f64> = in_window.iter().map(|s| s.t).collect();
        let values: Vec<f64> = in_window.iter().map(|s| s.i[0]).collect();
        temporal_period(&times, &values)?
    } else {
        None
    };
    let (infected_min, infected_max) = in_window
        .iter()
        .flat_map(|s| s.i.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    Ok(PatternReport {
        class,
        dominant_modes,
        temporal_period,
        transient_onset: transient_onset(grid, snapshots, DEFAULT_ONSET_FRACTION),
        spatial_index,
        temporal_index,
        infected_min,
        infected_max,
    })
}

/// Spatial inhomogeneity `max_{k>=1} |a_k|` of the infected field per snapshot.
pub fn inhomogeneity_series(grid: &Grid1D, snapshots: &[FieldState]) -> Vec<(f64, f64)> {
    let basis = CosineBasis::new(grid, default_k_max(grid));
    snapshots
        .par_iter()
        .map(|s| (s.t, basis.project(&s.i).max_nonconstant()))
        .collect()
}

/// Earliest time after which the inhomogeneity stays at or above half of
/// `fraction` of its late-time plateau, having reached the full fraction.
///
/// The plateau is the mean over the last tenth of the run. Returns `None`
/// when the plateau itself is below the spatial tolerance.
pub fn transient_onset(grid: &Grid1D, snapshots: &[FieldState], fraction: f64) -> Option<f64> {
    let series = inhomogeneity_series(grid, snapshots);
    onset_from_series(
        &series,
        snapshots.last().map(|s| grid.integrate(&s.i) / grid.length())?,
        fraction,
    )
}

/// [`transient_onset`] on a precomputed `(t, σ_x)` series; `mean_level` is
/// the spatial mean the plateau is judged against.
pub fn onset_from_series(series: &[(f64, f64)], mean_level: f64, fraction: f64) -> Option<f64> {
    if series.len() < 2 {
        return None;
    }
    let t_last = series[series.len() - 1].0;
    let t_first = series[0].0;
    let tail_from = t_last - 0.1 * (t_last - t_first);
    let tail: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= tail_from)
        .map(|(_, v)| *v)
        .collect();
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    if !(plateau > SPATIAL_TOL * mean_level.abs()) {
        return None;
    }
    let level = fraction * plateau;
    // Walk backwards to the last dip below half the level.
    let last_dip = series.iter().rposition(|(_, v)| *v < 0.5 * level);
    let start = last_dip.map_or(0, |p| p + 1);
    series[start..]
        .iter()
        .find(|(_, v)| *v >= level)
        .map(|(t, _)| *t)
}
