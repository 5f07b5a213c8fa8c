//! The independent-distortion-noise model: every antenna gets its own
//! random-phase line at each distortion frequency, uncorrelated with the
//! other antennas. Its trial-averaged far-field power is flat in direction,
//! which is what the behavioral model is contrasted against.
//!
//! Phases come from ChaCha keyed by `seed`, with the trial as stream and
//! `(antenna, line)` as the word position, so any trial can be regenerated
//! on its own and results do not depend on how trials are scheduled.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{combine, ArrayGeometry, ArraySignal, Execution, Pattern, PatternPoint};
use crate::error::{Error, Result};
use crate::spectra::LineSpectrum;

/// A pattern is called directive above this peak-to-mean ratio.
pub const DIRECTIVE_CONTRAST: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModelConfig {
    pub distortion_line_indices: Vec<i64>,
    /// Linear power of each distortion line at each antenna.
    pub per_antenna_line_power: f64,
    pub trials: u64,
    pub seed: u64,
}

impl NoiseModelConfig {
    pub fn new(distortion_line_indices: Vec<i64>, per_antenna_line_power: f64, trials: u64, seed: u64) -> Result<Self> {
        if trials < 1 {
            return Err(Error::InvalidArgument("noise model needs at least one trial".into()));
        }
        if !(per_antenna_line_power.is_finite() && per_antenna_line_power >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "per-antenna line power must be non-negative, got {per_antenna_line_power}"
            )));
        }
        if distortion_line_indices.iter().any(|&k| k < 1) {
            return Err(Error::InvalidArgument(
                "distortion line indices must be positive".into(),
            ));
        }
        Ok(Self {
            distortion_line_indices,
            per_antenna_line_power,
            trials,
            seed,
        })
    }

    /// Single-line configuration whose per-antenna power equals that of line
    /// `index` on the first antenna of `behavioral`.
    pub fn matched_to(behavioral: &ArraySignal, index: i64, trials: u64, seed: u64) -> Result<Self> {
        Self::new(vec![index], behavioral.antenna(0).line_power(index), trials, seed)
    }

    fn check_trial(&self, trial: u64) -> Result<()> {
        if trial >= self.trials {
            return Err(Error::InvalidArgument(format!(
                "trial {trial} out of range for {} trials",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Uniform phase in `[0, 2π)` for one `(trial, antenna, line)` cell.
pub fn noise_phase(seed: u64, trial: u64, antenna: usize, line: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let slot = ((antenna as u128) << 32) | (line as u32 as u128);
    // one f64 draw consumes two 32-bit words
    rng.set_word_pos(2 * slot);
    TAU * rng.gen::<f64>()
}

fn noise_phasor(cfg: &NoiseModelConfig, trial: u64, antenna: usize, line: i64) -> Complex64 {
    let amplitude = (2.0 * cfg.per_antenna_line_power).sqrt();
    Complex64::from_polar(amplitude / 2.0, noise_phase(cfg.seed, trial, antenna, line))
}

/// `desired` plus one independent random-phase line per antenna at each
/// configured index.
pub fn independent_noise_transmit(desired: &ArraySignal, cfg: &NoiseModelConfig, trial: u64) -> Result<ArraySignal> {
    cfg.check_trial(trial)?;
    if let Some(&k) = cfg.distortion_line_indices.iter().find(|&&k| desired.contains(k)) {
        return Err(Error::InvalidArgument(format!(
            "distortion line {k} collides with a desired line"
        )));
    }
    let per_antenna = desired
        .antennas()
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let noise = LineSpectrum::from_coefficients(
                *s.grid(),
                cfg.distortion_line_indices
                    .iter()
                    .map(|&k| (k, noise_phasor(cfg, trial, m, k))),
            )?;
            s.add(&noise)
        })
        .collect::<Result<Vec<_>>>()?;
    ArraySignal::new(per_antenna)
}

pub fn mean_pattern(
    cfg: &NoiseModelConfig,
    desired: &ArraySignal,
    geometry: &ArrayGeometry,
    freq_index: i64,
    num_points: usize,
) -> Result<Pattern> {
    mean_pattern_with(cfg, desired, geometry, freq_index, num_points, Execution::default())
}

/// Trial-averaged received power of the noise line `freq_index` across
/// `[−δ, δ]`. Per sweep point the trial sum always runs in trial order, so
/// parallel and sequential execution agree bit for bit.
pub fn mean_pattern_with(
    cfg: &NoiseModelConfig,
    desired: &ArraySignal,
    geometry: &ArrayGeometry,
    freq_index: i64,
    num_points: usize,
    execution: Execution,
) -> Result<Pattern> {
    if num_points < crate::array::MIN_SWEEP_POINTS {
        return Err(Error::InvalidArgument(format!(
            "pattern sweep needs at least {} points, got {num_points}",
            crate::array::MIN_SWEEP_POINTS
        )));
    }
    if desired.num_antennas() != geometry.num_antennas() {
        return Err(Error::Incompatible(format!(
            "signal has {} antennas, geometry {}",
            desired.num_antennas(),
            geometry.num_antennas()
        )));
    }
    let k = freq_index.abs();
    if !cfg.distortion_line_indices.contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "line {k} is not a configured distortion line"
        )));
    }
    if desired.contains(k) {
        return Err(Error::InvalidArgument(format!(
            "distortion line {k} collides with a desired line"
        )));
    }
    let antennas = desired.num_antennas();
    let trial_line = |t: u64| -> Vec<Complex64> { (0..antennas).map(|m| noise_phasor(cfg, t, m, k)).collect() };
    let trials: Vec<Vec<Complex64>> = match execution {
        Execution::Sequential => (0..cfg.trials).map(trial_line).collect(),
        Execution::Parallel => (0..cfg.trials).into_par_iter().map(trial_line).collect(),
    };

    let omega = desired.grid().angular_frequency(k);
    let count = cfg.trials as f64;
    let point = |&tau: &f64| {
        let total: f64 = trials
            .iter()
            .map(|line| 2.0 * combine(line, omega, tau).norm_sqr())
            .sum();
        PatternPoint {
            tau_rx: tau,
            power: total / count,
        }
    };
    let taus = geometry.sweep_delays(num_points);
    let sweep = match execution {
        Execution::Sequential => taus.iter().map(point).collect(),
        Execution::Parallel => taus.par_iter().map(point).collect(),
    };
    Pattern::from_sweep(k, sweep, antennas as f64 * cfg.per_antenna_line_power)
}

/// Side-by-side summary of a behavioral and a baseline pattern of the same
/// line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ModelContrast {
    NoDistortionLines {
        freq_index: i64,
    },
    Compared {
        freq_index: i64,
        /// Behavioral over baseline peak power; `None` when the baseline is
        /// identically zero.
        peak_ratio: Option<f64>,
        behavioral_peak_tau: f64,
        baseline_peak_tau: f64,
        behavioral_contrast: f64,
        baseline_contrast: f64,
        /// Coefficient of variation of the swept power.
        behavioral_flatness: f64,
        baseline_flatness: f64,
        behavioral_directive: bool,
        baseline_directive: bool,
    },
}

fn coefficient_of_variation(p: &Pattern) -> f64 {
    if p.mean_power <= 0.0 {
        return 0.0;
    }
    let n = p.sweep.len() as f64;
    let var = p.sweep.iter().map(|s| (s.power - p.mean_power).powi(2)).sum::<f64>() / n;
    var.sqrt() / p.mean_power
}

pub fn model_contrast_report(behavioral: &Pattern, baseline: &Pattern) -> Result<ModelContrast> {
    if behavioral.freq_index != baseline.freq_index {
        return Err(Error::Incompatible(format!(
            "patterns of lines {} and {}",
            behavioral.freq_index, baseline.freq_index
        )));
    }
    let same_grid = behavioral.sweep.len() == baseline.sweep.len()
        && behavioral
            .sweep
            .iter()
            .zip(&baseline.sweep)
            .all(|(a, b)| a.tau_rx == b.tau_rx);
    if !same_grid {
        return Err(Error::Incompatible("patterns use different sweep grids".into()));
    }
    if behavioral.peak_power <= 0.0 && baseline.peak_power <= 0.0 {
        return Ok(ModelContrast::NoDistortionLines {
            freq_index: behavioral.freq_index,
        });
    }
    Ok(ModelContrast::Compared {
        freq_index: behavioral.freq_index,
        peak_ratio: (baseline.peak_power > 0.0).then(|| behavioral.peak_power / baseline.peak_power),
        behavioral_peak_tau: behavioral.peak_tau,
        baseline_peak_tau: baseline.peak_tau,
        behavioral_contrast: behavioral.contrast,
        baseline_contrast: baseline.contrast,
        behavioral_flatness: coefficient_of_variation(behavioral),
        baseline_flatness: coefficient_of_variation(baseline),
        behavioral_directive: behavioral.contrast > DIRECTIVE_CONTRAST,
        baseline_directive: baseline.contrast > DIRECTIVE_CONTRAST,
    })
}
