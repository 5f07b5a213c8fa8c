//! Line spectra of real multi-tone signals.
//!
//! A real tone `c·cos(kΔω·t + φ)` is the phasor pair `(c/2)e^{iφ}` at `+k`
//! and its conjugate at `−k`. Only the non-negative half is stored; the
//! negative half is derived on access, so conjugate symmetry holds by
//! construction. The DC coefficient is kept real.
//!
//! [`sample_waveform`] and [`estimate_lines`] form a coherently sampled
//! time-domain path. It shares no arithmetic with the phasor algebra and is
//! only meant for cross-checking it.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped after every operation.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

/// Integer frequency grid: line `k` sits at angular frequency `k·base_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    base_rate: f64,
    max_index: i64,
    prune_threshold: f64,
}

impl FrequencyGrid {
    pub fn new(base_rate: f64, max_index: i64) -> Result<Self> {
        if !(base_rate.is_finite() && base_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid base rate must be positive, got {base_rate}"
            )));
        }
        if max_index < 1 {
            return Err(Error::InvalidArgument(format!(
                "grid max index must be at least 1, got {max_index}"
            )));
        }
        Ok(Self {
            base_rate,
            max_index,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        })
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prune threshold must be non-negative, got {threshold}"
            )));
        }
        self.prune_threshold = threshold;
        Ok(self)
    }

    /// Δω in rad/s.
    pub fn base_rate(&self) -> f64 {
        self.base_rate
    }

    pub fn max_index(&self) -> i64 {
        self.max_index
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    /// Angular frequency of line `k` in rad/s.
    pub fn angular_frequency(&self, k: i64) -> f64 {
        k as f64 * self.base_rate
    }

    /// Fundamental period `2π/Δω` in seconds.
    pub fn period(&self) -> f64 {
        TAU / self.base_rate
    }

    pub fn check_index(&self, k: i64) -> Result<()> {
        if k.abs() > self.max_index {
            Err(Error::Range {
                index: k,
                max_index: self.max_index,
            })
        } else {
            Ok(())
        }
    }
}

/// A single real tone `amplitude·cos(index·Δω·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub index: i64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Tone {
    pub fn new(index: i64, amplitude: f64, phase: f64) -> Self {
        Self {
            index,
            amplitude,
            phase,
        }
    }

    /// Phasor stored at `+index`.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude / 2.0, self.phase)
    }
}

/// Exact spectrum of a real signal as a finite set of lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSpectrum {
    grid: FrequencyGrid,
    // k >= 0 only; entry at 0 is real
    lines: BTreeMap<i64, Complex64>,
}

impl LineSpectrum {
    pub fn empty(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            lines: BTreeMap::new(),
        }
    }

    /// Builds a spectrum from the non-negative half of its coefficients,
    /// summing repeated indices.
    pub fn from_coefficients<I>(grid: FrequencyGrid, coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut lines = BTreeMap::new();
        for (k, c) in coefficients {
            grid.check_index(k)?;
            if k < 0 {
                return Err(Error::InvalidArgument(format!(
                    "only the non-negative half is given explicitly, got index {k}"
                )));
            }
            *lines.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self::normalized(grid, lines))
    }

    fn normalized(grid: FrequencyGrid, mut lines: BTreeMap<i64, Complex64>) -> Self {
        if let Some(dc) = lines.get_mut(&0) {
            dc.im = 0.0;
        }
        lines.retain(|_, c| c.norm() >= grid.prune_threshold && c.norm() > 0.0);
        Self { grid, lines }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Number of stored non-negative lines.
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    /// Phasor at signed index `k`; zero when absent.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        match self.lines.get(&k.abs()) {
            Some(c) if k < 0 => c.conj(),
            Some(c) => *c,
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lines.contains_key(&k.abs())
    }

    /// Non-negative indices with their phasors, ascending.
    pub fn positive_lines(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.lines.iter().map(|(&k, &c)| (k, c))
    }

    /// Every stored line including the mirrored negative half, ascending.
    pub fn signed_lines(&self) -> Vec<(i64, Complex64)> {
        let mut out: Vec<(i64, Complex64)> = self
            .lines
            .iter()
            .rev()
            .filter(|(&k, _)| k > 0)
            .map(|(&k, &c)| (-k, c.conj()))
            .collect();
        out.extend(self.positive_lines());
        out
    }

    /// Peak amplitude of the real tone at `|k|`.
    pub fn amplitude(&self, k: i64) -> f64 {
        let c = self.coefficient(k.abs());
        if k == 0 {
            c.norm()
        } else {
            2.0 * c.norm()
        }
    }

    pub fn phase(&self, k: i64) -> f64 {
        self.coefficient(k).arg()
    }

    /// Mean power contributed by the real tone at `|k|`: `A²/2` for `k ≠ 0`.
    pub fn line_power(&self, k: i64) -> f64 {
        let c = self.coefficient(k.abs());
        if k == 0 {
            c.norm_sqr()
        } else {
            2.0 * c.norm_sqr()
        }
    }

    /// Mean square of the time-domain signal (Parseval).
    pub fn total_power(&self) -> f64 {
        self.lines.keys().map(|&k| self.line_power(k)).sum()
    }

    pub fn max_abs_index(&self) -> i64 {
        self.lines.keys().next_back().copied().unwrap_or(0)
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::IncompatibleGrid)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_grid(other)?;
        let mut lines = self.lines.clone();
        for (&k, &c) in &other.lines {
            *lines.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
        }
        Ok(Self::normalized(self.grid, lines))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let lines = self.lines.iter().map(|(&k, &c)| (k, c * factor)).collect();
        Self::normalized(self.grid, lines)
    }

    /// Spectrum of the pointwise product of two signals (line convolution).
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let reach = self.max_abs_index() + other.max_abs_index();
        if !self.is_empty() && !other.is_empty() {
            self.grid.check_index(reach)?;
        }
        let a = self.signed_lines();
        let b = other.signed_lines();
        let mut lines = BTreeMap::new();
        for &(i, ci) in &a {
            for &(j, cj) in &b {
                let k = i + j;
                if k >= 0 {
                    *lines.entry(k).or_insert(Complex64::new(0.0, 0.0)) += ci * cj;
                }
            }
        }
        Ok(Self::normalized(self.grid, lines))
    }

    /// Applies `f(k, c)` to every non-negative line; negative lines follow
    /// by conjugation.
    pub fn map_lines<F>(&self, mut f: F) -> Self
    where
        F: FnMut(i64, Complex64) -> Complex64,
    {
        let lines = self.lines.iter().map(|(&k, &c)| (k, f(k, c))).collect();
        Self::normalized(self.grid, lines)
    }

    /// Keeps only lines for which `keep(|k|)` holds.
    pub fn retain_lines<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(i64) -> bool,
    {
        let lines = self
            .lines
            .iter()
            .filter(|(&k, _)| keep(k))
            .map(|(&k, &c)| (k, c))
            .collect();
        Self { grid: self.grid, lines }
    }
}

/// Two-line spectrum of `amplitude·cos(freq_index·Δω·t + phase)`.
pub fn tone(grid: &FrequencyGrid, amplitude: f64, freq_index: i64, phase: f64) -> Result<LineSpectrum> {
    if freq_index < 1 {
        return Err(Error::InvalidArgument(format!(
            "tone index must be positive, got {freq_index}"
        )));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) || !phase.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tone needs a finite non-negative amplitude and finite phase, got ({amplitude}, {phase})"
        )));
    }
    grid.check_index(freq_index)?;
    LineSpectrum::from_coefficients(*grid, [(freq_index, Tone::new(freq_index, amplitude, phase).phasor())])
}

/// Real samples on a coherent window.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl SampledWaveform {
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }
}

/// Samples `s` over `periods` fundamental periods at `samples_per_period`
/// points each.
pub fn sample_waveform(s: &LineSpectrum, periods: usize, samples_per_period: usize) -> Result<SampledWaveform> {
    sample_waveform_delayed(s, periods, samples_per_period, 0.0)
}

/// Like [`sample_waveform`] but evaluates `s(t − delay)`.
pub fn sample_waveform_delayed(
    s: &LineSpectrum,
    periods: usize,
    samples_per_period: usize,
    delay: f64,
) -> Result<SampledWaveform> {
    let grid = s.grid();
    check_sampling(grid, periods, samples_per_period)?;
    let n_total = periods * samples_per_period;
    let n_per = samples_per_period as i64;
    let dc = s.coefficient(0).re;
    let samples = (0..n_total as i64)
        .map(|n| {
            let mut acc = dc;
            for (k, c) in s.positive_lines().filter(|&(k, _)| k > 0) {
                // exact reduction of k·n modulo the period keeps the phase accurate
                let r = (k * n).rem_euclid(n_per) as f64;
                let theta = TAU * r / n_per as f64 - grid.angular_frequency(k) * delay;
                acc += 2.0 * (c * Complex64::from_polar(1.0, theta)).re;
            }
            acc
        })
        .collect();
    Ok(SampledWaveform {
        samples,
        sample_rate: samples_per_period as f64 / grid.period(),
    })
}

fn check_sampling(grid: &FrequencyGrid, periods: usize, samples_per_period: usize) -> Result<()> {
    if periods == 0 {
        return Err(Error::InvalidArgument("at least one period is required".into()));
    }
    if samples_per_period as i64 <= 2 * grid.max_index() {
        return Err(Error::Aliasing {
            samples_per_period,
            max_index: grid.max_index(),
        });
    }
    Ok(())
}

/// Discrete Fourier analysis of a coherently sampled waveform back into
/// grid lines.
pub fn estimate_lines(w: &SampledWaveform, grid: &FrequencyGrid) -> Result<LineSpectrum> {
    let per_period = w.sample_rate * grid.period();
    let samples_per_period = per_period.round();
    if !(per_period.is_finite() && samples_per_period >= 1.0)
        || (per_period - samples_per_period).abs() > 1e-9 * per_period
    {
        return Err(Error::Leakage(format!(
            "{per_period} samples per fundamental period is not an integer"
        )));
    }
    let samples_per_period = samples_per_period as usize;
    let len = w.samples.len();
    if len == 0 || !len.is_multiple_of(samples_per_period) {
        return Err(Error::Leakage(format!(
            "{len} samples is not a whole number of {samples_per_period}-sample periods"
        )));
    }
    let periods = len / samples_per_period;
    check_sampling(grid, periods, samples_per_period)?;

    let mut buffer: Vec<Complex64> = w.samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buffer);
    let scale = 1.0 / len as f64;
    let coefficients = (0..=grid.max_index()).map(|k| (k, buffer[k as usize * periods] * scale));
    LineSpectrum::from_coefficients(*grid, coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(TAU, 40).unwrap()
    }

    #[test]
    fn tone_is_a_conjugate_pair() {
        let s = tone(&grid(), 1.0, 9, 0.0).unwrap();
        assert_eq!(s.coefficient(9), Complex64::new(0.5, 0.0));
        assert_eq!(s.coefficient(-9), Complex64::new(0.5, 0.0));
        assert_eq!(s.len(), 1);

        let s = tone(&grid(), 1.0, 11, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.coefficient(11).im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(-11).im, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_amplitude_tone_prunes_away() {
        assert!(tone(&grid(), 0.0, 9, 0.3).unwrap().is_empty());
    }

    #[test]
    fn tone_outside_grid_is_a_range_error() {
        assert_eq!(
            tone(&grid(), 1.0, 41, 0.0),
            Err(Error::Range {
                index: 41,
                max_index: 40
            })
        );
    }

    #[test]
    fn add_builds_two_tone_and_cancels() {
        let g = grid();
        let two = tone(&g, 1.0, 9, 0.0)
            .unwrap()
            .add(&tone(&g, 1.0, 11, 0.0).unwrap())
            .unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two.amplitude(9), 1.0);
        assert_eq!(two.amplitude(11), 1.0);

        assert_eq!(two.add(&LineSpectrum::empty(g)).unwrap(), two);

        let flipped = tone(&g, 1.0, 9, PI).unwrap();
        let cancelled = tone(&g, 1.0, 9, 0.0).unwrap().add(&flipped).unwrap();
        assert!(cancelled.is_empty());
    }

    #[test]
    fn add_rejects_grid_mismatch() {
        let other = FrequencyGrid::new(1.0, 40).unwrap();
        let a = tone(&grid(), 1.0, 9, 0.0).unwrap();
        let b = tone(&other, 1.0, 9, 0.0).unwrap();
        assert_eq!(a.add(&b), Err(Error::IncompatibleGrid));
    }

    #[test]
    fn sampling_empty_spectrum_gives_zeros() {
        let w = sample_waveform(&LineSpectrum::empty(grid()), 2, 128).unwrap();
        assert_eq!(w.samples.len(), 256);
        assert!(w.samples.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sampling_unit_tone_matches_cosine() {
        let g = FrequencyGrid::new(TAU, 3).unwrap();
        let w = sample_waveform(&tone(&g, 1.0, 1, 0.0).unwrap(), 1, 8).unwrap();
        for (n, x) in w.samples.iter().enumerate() {
            assert_abs_diff_eq!(*x, (TAU * n as f64 / 8.0).cos(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(w.sample_rate, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn two_tone_samples_bounded_by_two() {
        let g = grid();
        let two = tone(&g, 1.0, 9, 0.4)
            .unwrap()
            .add(&tone(&g, 1.0, 11, -1.3).unwrap())
            .unwrap();
        let w = sample_waveform(&two, 3, 97).unwrap();
        assert!(w.peak() <= 2.0 + 1e-12);
    }

    #[test]
    fn nyquist_violation_is_aliasing_error() {
        let s = tone(&grid(), 1.0, 9, 0.0).unwrap();
        assert!(matches!(sample_waveform(&s, 1, 80), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn round_trip_recovers_tone() {
        let g = grid();
        let s = tone(&g, 1.0, 9, 0.3).unwrap();
        let back = estimate_lines(&sample_waveform(&s, 1, 128).unwrap(), &g).unwrap();
        assert_eq!(back.len(), 1);
        assert_abs_diff_eq!(back.amplitude(9), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.phase(9), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn zero_samples_estimate_to_empty() {
        let w = SampledWaveform {
            samples: vec![0.0; 128],
            sample_rate: 128.0,
        };
        assert!(estimate_lines(&w, &grid()).unwrap().is_empty());
    }

    #[test]
    fn incoherent_window_is_leakage() {
        let w = SampledWaveform {
            samples: vec![0.0; 130],
            sample_rate: 128.0,
        };
        assert!(matches!(estimate_lines(&w, &grid()), Err(Error::Leakage(_))));
        let w = SampledWaveform {
            samples: vec![0.0; 128],
            sample_rate: 128.5,
        };
        assert!(matches!(estimate_lines(&w, &grid()), Err(Error::Leakage(_))));
    }

    #[test]
    fn multiply_by_itself_squares_cosine() {
        // cos² = 1/2 + cos(2x)/2
        let g = grid();
        let s = tone(&g, 1.0, 5, 0.0).unwrap();
        let sq = s.multiply(&s).unwrap();
        assert_abs_diff_eq!(sq.coefficient(0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sq.amplitude(10), 0.5, epsilon = 1e-15);
        assert_eq!(sq.len(), 2);
    }

    #[test]
    fn multiply_past_grid_is_range_error() {
        let g = FrequencyGrid::new(TAU, 15).unwrap();
        let s = tone(&g, 1.0, 9, 0.0).unwrap();
        assert!(matches!(s.multiply(&s), Err(Error::Range { index: 18, .. })));
    }

    #[test]
    fn delayed_sampling_shifts_phase() {
        let g = grid();
        let s = tone(&g, 1.0, 3, 0.0).unwrap();
        let w = sample_waveform_delayed(&s, 1, 128, 0.05).unwrap();
        let back = estimate_lines(&w, &g).unwrap();
        assert_abs_diff_eq!(back.phase(3), -TAU * 3.0 * 0.05, epsilon = 1e-12);
    }
}
