//! Uniform linear array: per-tone steering, the per-antenna transmit chain,
//! far-field reception and pattern sweeps.
//!
//! Directions are inter-element propagation delays `τ` (seconds). Antenna
//! `m` (0-based) radiates tone `k` with a phase lead of `m·kΔω·τ` over
//! antenna 0, so a far-field receiver at `τ_rx` sees
//! `Σ_m c_m(k)·e^{−i·m·kΔω·τ_rx}`. Path loss and the common propagation delay
//! are normalized out.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{apply_polynomial, band_filter, BandDefinition, PolynomialNonlinearity};
use crate::spectra::{FrequencyGrid, LineSpectrum, Tone};

pub const DEFAULT_SWEEP_POINTS: usize = 1024;
pub const MIN_SWEEP_POINTS: usize = 16;

/// A sample counts as a lobe peak when it is a local maximum at least this
/// fraction of the global peak. ULA sidelobes stay below ~0.05 of the main lobe.
const LOBE_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    num_antennas: usize,
    element_delay: f64,
}

impl ArrayGeometry {
    pub fn new(num_antennas: usize, element_delay: f64) -> Result<Self> {
        if num_antennas < 1 {
            return Err(Error::InvalidArgument("array needs at least one antenna".into()));
        }
        if !(element_delay.is_finite() && element_delay > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "element delay must be positive, got {element_delay}"
            )));
        }
        Ok(Self {
            num_antennas,
            element_delay,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Propagation delay across one element spacing, `d/c`.
    pub fn element_delay(&self) -> f64 {
        self.element_delay
    }

    /// Whether line `highest_index` stays free of grating lobes
    /// (`δ·kΔω ≤ π`, i.e. spacing at most half a wavelength).
    pub fn grating_lobe_free(&self, grid: &FrequencyGrid, highest_index: i64) -> bool {
        // relative slack so exactly half-wavelength spacing counts as lobe-free
        self.element_delay * grid.angular_frequency(highest_index.abs()) <= std::f64::consts::PI * (1.0 + 1e-12)
    }

    pub fn contains(&self, tau: f64) -> bool {
        tau.abs() <= self.element_delay
    }

    /// Angle from broadside in radians, `asin(τ/δ)`.
    pub fn angle_of(&self, tau: DelaySteer) -> f64 {
        (tau.seconds() / self.element_delay).clamp(-1.0, 1.0).asin()
    }

    /// `num_points` delays spaced uniformly over `[−δ, δ]`, endpoints included.
    pub fn sweep_delays(&self, num_points: usize) -> Vec<f64> {
        let d = self.element_delay;
        let last = num_points.saturating_sub(1).max(1) as f64;
        (0..num_points)
            .map(|i| {
                if i + 1 == num_points {
                    d
                } else {
                    -d + 2.0 * d * i as f64 / last
                }
            })
            .collect()
    }
}

/// Far-field direction as an inter-element propagation delay in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DelaySteer(f64);

impl DelaySteer {
    pub fn new(seconds: f64) -> Result<Self> {
        if !seconds.is_finite() {
            return Err(Error::InvalidArgument(format!("delay must be finite, got {seconds}")));
        }
        Ok(Self(seconds))
    }

    pub fn seconds(&self) -> f64 {
        self.0
    }
}

/// A tone together with the direction it is steered to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeredTone {
    pub tone: Tone,
    pub delay: DelaySteer,
}

/// Per-antenna, per-tone phases.
///
/// Phases are kept unreduced (`φ¹ + m·kΔω·τ`). They are equivalent modulo 2π
/// to the wrapped values, and keeping them whole lets derived delays come out
/// as the algebraic combination of the targets rather than an arbitrary alias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringAssignment {
    grid: FrequencyGrid,
    geometry: ArrayGeometry,
    tones: Vec<SteeredTone>,
    phases: Vec<Vec<f64>>,
}

impl SteeringAssignment {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn tones(&self) -> &[SteeredTone] {
        &self.tones
    }

    pub fn tone_indices(&self) -> Vec<i64> {
        self.tones.iter().map(|t| t.tone.index).collect()
    }

    /// Phase of tone column `j` on antenna `m` (0-based).
    pub fn phase(&self, m: usize, j: usize) -> f64 {
        self.phases[m][j]
    }

    /// Same as [`phase`](Self::phase), reduced to `[0, 2π)`.
    pub fn wrapped_phase(&self, m: usize, j: usize) -> f64 {
        self.phases[m][j].rem_euclid(TAU)
    }

    pub fn phase_of(&self, m: usize, k: i64) -> Option<f64> {
        self.column(k).map(|j| self.phases[m][j])
    }

    pub fn column(&self, k: i64) -> Option<usize> {
        self.tones.iter().position(|t| t.tone.index == k)
    }

    /// The tones fed to antenna `m` (0-based).
    pub fn antenna_tones(&self, m: usize) -> Vec<Tone> {
        self.tones
            .iter()
            .zip(&self.phases[m])
            .map(|(t, &phase)| Tone::new(t.tone.index, t.tone.amplitude, phase))
            .collect()
    }

    /// All tones share one direction.
    pub fn is_single_user(&self) -> bool {
        self.tones.windows(2).all(|w| w[0].delay == w[1].delay)
    }
}

/// Assigns `φ_k^m = φ_k^0 + m·kΔω·τ_k` for every antenna `m` and tone `k`.
pub fn steer_tones(
    grid: &FrequencyGrid,
    geometry: &ArrayGeometry,
    tones: &[SteeredTone],
) -> Result<SteeringAssignment> {
    for (j, t) in tones.iter().enumerate() {
        grid.check_index(t.tone.index)?;
        if t.tone.index < 1 || !(t.tone.amplitude.is_finite() && t.tone.amplitude >= 0.0) || !t.tone.phase.is_finite() {
            return Err(Error::InvalidArgument(format!("tone {j} is malformed: {:?}", t.tone)));
        }
        if tones[..j].iter().any(|o| o.tone.index == t.tone.index) {
            return Err(Error::InvalidArgument(format!(
                "tone index {} is steered twice",
                t.tone.index
            )));
        }
    }
    let phases = (0..geometry.num_antennas())
        .map(|m| {
            tones
                .iter()
                .map(|t| t.tone.phase + m as f64 * grid.angular_frequency(t.tone.index) * t.delay.seconds())
                .collect()
        })
        .collect();
    Ok(SteeringAssignment {
        grid: *grid,
        geometry: *geometry,
        tones: tones.to_vec(),
        phases,
    })
}

/// One line spectrum per antenna, all on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySignal {
    per_antenna: Vec<LineSpectrum>,
}

impl ArraySignal {
    pub fn new(per_antenna: Vec<LineSpectrum>) -> Result<Self> {
        let first = per_antenna
            .first()
            .ok_or_else(|| Error::InvalidArgument("array signal needs at least one antenna".into()))?;
        if per_antenna.iter().any(|s| s.grid() != first.grid()) {
            return Err(Error::IncompatibleGrid);
        }
        Ok(Self { per_antenna })
    }

    /// The steered tones without any device in the chain.
    pub fn linear(assignment: &SteeringAssignment) -> Result<Self> {
        let per_antenna = (0..assignment.geometry().num_antennas())
            .map(|m| tones_spectrum(assignment.grid(), &assignment.antenna_tones(m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(per_antenna)
    }

    pub fn num_antennas(&self) -> usize {
        self.per_antenna.len()
    }

    pub fn antenna(&self, m: usize) -> &LineSpectrum {
        &self.per_antenna[m]
    }

    pub fn antennas(&self) -> &[LineSpectrum] {
        &self.per_antenna
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.per_antenna[0].grid()
    }

    /// Line `k` phasor on every antenna.
    pub fn line(&self, k: i64) -> Vec<Complex64> {
        self.per_antenna.iter().map(|s| s.coefficient(k)).collect()
    }

    pub fn contains(&self, k: i64) -> bool {
        self.per_antenna.iter().any(|s| s.contains(k))
    }

    /// `Σ_m` per-antenna power of line `k`.
    pub fn summed_line_power(&self, k: i64) -> f64 {
        self.per_antenna.iter().map(|s| s.line_power(k)).sum()
    }

    /// Indices (non-negative) present on any antenna, ascending.
    pub fn line_indices(&self) -> Vec<i64> {
        let mut out: Vec<i64> = self
            .per_antenna
            .iter()
            .flat_map(|s| s.positive_lines().map(|(k, _)| k))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn tones_spectrum(grid: &FrequencyGrid, tones: &[Tone]) -> Result<LineSpectrum> {
    LineSpectrum::from_coefficients(*grid, tones.iter().map(|t| (t.index, t.phasor())))
}

/// Feeds every antenna its steered multi-tone, applies the shared device and
/// the band filter.
pub fn transmit(
    assignment: &SteeringAssignment,
    f: &PolynomialNonlinearity,
    band: &BandDefinition,
) -> Result<ArraySignal> {
    let per_antenna = (0..assignment.geometry().num_antennas())
        .map(|m| {
            let x = tones_spectrum(assignment.grid(), &assignment.antenna_tones(m))?;
            Ok(band_filter(&apply_polynomial(&x, f)?, band))
        })
        .collect::<Result<Vec<_>>>()?;
    ArraySignal::new(per_antenna)
}

/// `Σ_m c_m·e^{−i·m·ω·τ}`.
pub(crate) fn combine(coefficients: &[Complex64], omega: f64, tau: f64) -> Complex64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(m, &c)| c * Complex64::from_polar(1.0, -(m as f64) * omega * tau))
        .sum()
}

/// Spectrum seen by a unit-gain far-field receiver at `direction`. Any delay
/// is accepted; only `|τ| ≤ δ` maps to a physical direction.
pub fn far_field_receive(signal: &ArraySignal, direction: DelaySteer) -> LineSpectrum {
    let grid = *signal.grid();
    let tau = direction.seconds();
    let indices = signal.line_indices();
    let lines = indices
        .into_iter()
        .map(|k| (k, combine(&signal.line(k), grid.angular_frequency(k), tau)));
    LineSpectrum::from_coefficients(grid, lines).expect("indices come from spectra on this grid")
}

/// A direction at which an intermodulation line adds coherently.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionDirection {
    /// Frequency index of the line (non-negative).
    pub index: i64,
    /// Delay straight from the phase combination, before reduction.
    pub raw: f64,
    /// Spatial period `2π/(|k|Δω)` of the line; delays differing by a
    /// multiple of it are equivalent.
    pub modulus: f64,
    /// Equivalent delay in `[−δ, δ]` closest to `raw`; `None` when no
    /// equivalent delay is physical.
    pub principal: Option<DelaySteer>,
    /// Every equivalent delay in `[−δ, δ]`, ascending. More than one means
    /// grating lobes.
    pub aliases: Vec<DelaySteer>,
}

impl DistortionDirection {
    fn new(index: i64, raw: f64, grid: &FrequencyGrid, geometry: &ArrayGeometry) -> Self {
        let modulus = TAU / grid.angular_frequency(index.abs());
        let d = geometry.element_delay();
        let first = ((-d - raw) / modulus).ceil() as i64;
        let last = ((d - raw) / modulus).floor() as i64;
        let aliases: Vec<DelaySteer> = (first..=last)
            .map(|n| raw + n as f64 * modulus)
            .filter(|t| t.abs() <= d)
            .map(DelaySteer)
            .collect();
        let principal = if geometry.contains(raw) {
            Some(DelaySteer(raw))
        } else {
            aliases
                .iter()
                .copied()
                .min_by(|a, b| (a.0 - raw).abs().total_cmp(&(b.0 - raw).abs()))
        };
        Self {
            index: index.abs(),
            raw,
            modulus,
            principal,
            aliases,
        }
    }
}

/// Directions into which the `2k₂−k₁` and `|k₂−2k₁|` products of a two-tone
/// steering add coherently.
pub fn distortion_delays(
    k1: i64,
    k2: i64,
    assignment: &SteeringAssignment,
) -> Result<(DistortionDirection, DistortionDirection)> {
    let geometry = assignment.geometry();
    if geometry.num_antennas() < 2 {
        return Err(Error::InvalidArgument(
            "distortion directions need at least two antennas".into(),
        ));
    }
    if !(k1 < k2) {
        return Err(Error::InvalidArgument(format!("expected k1 < k2, got ({k1}, {k2})")));
    }
    let mut steered = assignment.tone_indices();
    steered.sort_unstable();
    if steered != [k1, k2] {
        return Err(Error::InvalidArgument(format!(
            "assignment steers {steered:?}, expected exactly [{k1}, {k2}]"
        )));
    }
    if k2 == 2 * k1 {
        return Err(Error::DegenerateFrequencyPlan { k1, k2 });
    }
    let grid = assignment.grid();
    let phi = |m: usize, k: i64| assignment.phase_of(m, k).expect("tone is steered");

    let upper_lead = (2.0 * phi(1, k2) - phi(1, k1)) - (2.0 * phi(0, k2) - phi(0, k1));
    let lower_lead = (phi(1, k2) - 2.0 * phi(1, k1)) - (phi(0, k2) - 2.0 * phi(0, k1));
    let upper_coeff = 2 * k2 - k1;
    let lower_coeff = k2 - 2 * k1;

    Ok((
        DistortionDirection::new(
            upper_coeff,
            upper_lead / grid.angular_frequency(upper_coeff),
            grid,
            geometry,
        ),
        DistortionDirection::new(
            lower_coeff,
            lower_lead / grid.angular_frequency(lower_coeff),
            grid,
            geometry,
        ),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternPoint {
    pub tau_rx: f64,
    pub power: f64,
}

/// Received power of one line against receiver direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pattern {
    pub freq_index: i64,
    pub sweep: Vec<PatternPoint>,
    pub peak_tau: f64,
    pub peak_power: f64,
    /// `peak_power` over the summed per-antenna line power.
    pub peak_gain: f64,
    pub mean_power: f64,
    /// Peak over mean power; zero for an all-zero pattern.
    pub contrast: f64,
    /// Delays of every lobe reaching 90% of the peak.
    pub lobes: Vec<f64>,
    /// Summed per-antenna power of the line.
    pub reference_power: f64,
}

impl Pattern {
    pub fn from_sweep(freq_index: i64, sweep: Vec<PatternPoint>, reference_power: f64) -> Result<Self> {
        if sweep.is_empty() {
            return Err(Error::InvalidArgument("pattern sweep is empty".into()));
        }
        let (peak_at, peak) =
            sweep.iter().enumerate().fold(
                (0, sweep[0]),
                |best, (i, p)| if p.power > best.1.power { (i, *p) } else { best },
            );
        let mean_power = sweep.iter().map(|p| p.power).sum::<f64>() / sweep.len() as f64;
        let min_power = sweep.iter().map(|p| p.power).fold(f64::INFINITY, f64::min);

        let lobes = if peak.power - min_power <= 1e-12 * peak.power {
            vec![sweep[peak_at].tau_rx]
        } else {
            let n = sweep.len();
            (0..n)
                .filter(|&i| {
                    let p = sweep[i].power;
                    let left_ok = i == 0 || p > sweep[i - 1].power;
                    let right_ok = i + 1 == n || p >= sweep[i + 1].power;
                    left_ok && right_ok && p >= LOBE_FRACTION * peak.power
                })
                .map(|i| sweep[i].tau_rx)
                .collect()
        };

        Ok(Self {
            freq_index,
            peak_tau: peak.tau_rx,
            peak_power: peak.power,
            peak_gain: if reference_power > 0.0 {
                peak.power / reference_power
            } else {
                0.0
            },
            mean_power,
            contrast: if mean_power > 0.0 { peak.power / mean_power } else { 0.0 },
            lobes,
            reference_power,
            sweep,
        })
    }

    /// Spacing between sweep points.
    pub fn step(&self) -> f64 {
        match self.sweep.as_slice() {
            [a, b, ..] => b.tau_rx - a.tau_rx,
            _ => 0.0,
        }
    }

    /// Whether some lobe lies within `tolerance` of `tau`.
    pub fn has_lobe_near(&self, tau: f64, tolerance: f64) -> bool {
        self.lobes.iter().any(|&l| (l - tau).abs() <= tolerance)
    }
}

pub fn pattern_sweep(
    signal: &ArraySignal,
    freq_index: i64,
    geometry: &ArrayGeometry,
    num_points: usize,
) -> Result<Pattern> {
    pattern_sweep_with(signal, freq_index, geometry, num_points, Execution::default())
}

/// Received power of line `freq_index` at `num_points` delays over `[−δ, δ]`.
/// Parallel and sequential execution give bit-identical results.
pub fn pattern_sweep_with(
    signal: &ArraySignal,
    freq_index: i64,
    geometry: &ArrayGeometry,
    num_points: usize,
    execution: Execution,
) -> Result<Pattern> {
    if num_points < MIN_SWEEP_POINTS {
        return Err(Error::InvalidArgument(format!(
            "pattern sweep needs at least {MIN_SWEEP_POINTS} points, got {num_points}"
        )));
    }
    if signal.num_antennas() != geometry.num_antennas() {
        return Err(Error::Incompatible(format!(
            "signal has {} antennas, geometry {}",
            signal.num_antennas(),
            geometry.num_antennas()
        )));
    }
    let k = freq_index.abs();
    if !signal.contains(k) {
        return Err(Error::LineAbsent(k));
    }
    let coefficients = signal.line(k);
    let omega = signal.grid().angular_frequency(k);
    let line_scale = if k == 0 { 1.0 } else { 2.0 };
    let point = |&tau: &f64| PatternPoint {
        tau_rx: tau,
        power: line_scale * combine(&coefficients, omega, tau).norm_sqr(),
    };
    let taus = geometry.sweep_delays(num_points);
    let sweep = match execution {
        Execution::Sequential => taus.iter().map(point).collect(),
        Execution::Parallel => taus.par_iter().map(point).collect(),
    };
    Pattern::from_sweep(k, sweep, signal.summed_line_power(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::IndexRange;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(TAU, 40).unwrap()
    }

    fn steered(k: i64, tau: f64) -> SteeredTone {
        SteeredTone {
            tone: Tone::new(k, 1.0, 0.0),
            delay: DelaySteer::new(tau).unwrap(),
        }
    }

    fn band() -> BandDefinition {
        BandDefinition::new(IndexRange::new(8, 12).unwrap(), 4, IndexRange::new(4, 16).unwrap()).unwrap()
    }

    #[test]
    fn single_antenna_keeps_base_phases() {
        let geo = ArrayGeometry::new(1, 0.1).unwrap();
        let tones = [
            SteeredTone {
                tone: Tone::new(9, 1.0, 0.4),
                delay: DelaySteer::new(0.05).unwrap(),
            },
            steered(11, 0.02),
        ];
        let a = steer_tones(&grid(), &geo, &tones).unwrap();
        assert_eq!(a.phase(0, 0), 0.4);
        assert_eq!(a.phase(0, 1), 0.0);
    }

    #[test]
    fn single_user_leads() {
        let geo = ArrayGeometry::new(2, 0.02).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.01), steered(11, 0.01)]).unwrap();
        assert_abs_diff_eq!(a.phase(1, 0) - a.phase(0, 0), TAU * 0.09, epsilon = 1e-12);
        assert_abs_diff_eq!(a.phase(1, 1) - a.phase(0, 1), TAU * 0.11, epsilon = 1e-12);
        assert!(a.is_single_user());
    }

    #[test]
    fn multi_user_leads_wrap() {
        let geo = ArrayGeometry::new(2, 0.4).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.2), steered(11, 0.3)]).unwrap();
        assert_abs_diff_eq!(a.wrapped_phase(1, 0), 1.6 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(a.wrapped_phase(1, 1), 0.6 * PI, epsilon = 1e-12);
        assert!(!a.is_single_user());
    }

    #[test]
    fn duplicate_tone_rejected() {
        let geo = ArrayGeometry::new(2, 0.4).unwrap();
        assert!(steer_tones(&grid(), &geo, &[steered(9, 0.2), steered(9, 0.3)]).is_err());
    }

    #[test]
    fn linear_transmit_is_steered_tones() {
        let geo = ArrayGeometry::new(3, 0.02).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.01), steered(11, -0.005)]).unwrap();
        let sig = transmit(&a, &PolynomialNonlinearity::identity(), &band()).unwrap();
        assert_eq!(sig, ArraySignal::linear(&a).unwrap());
    }

    #[test]
    fn port_spectra_magnitudes_do_not_depend_on_steering() {
        let geo = ArrayGeometry::new(4, 0.02).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.013), steered(11, 0.013)]).unwrap();
        let sig = transmit(&a, &PolynomialNonlinearity::third_order(0.1).unwrap(), &band()).unwrap();
        for m in 0..4 {
            let s = sig.antenna(m);
            assert_eq!(s.len(), 4);
            for (k, amp) in [(7, 0.075), (9, 1.225), (11, 1.225), (13, 0.075)] {
                assert_abs_diff_eq!(s.amplitude(k), amp, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn im3_lead_follows_phase_combination() {
        let geo = ArrayGeometry::new(2, 0.4).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.2), steered(11, 0.3)]).unwrap();
        let sig = transmit(&a, &PolynomialNonlinearity::third_order(0.1).unwrap(), &band()).unwrap();
        let lead = sig.antenna(1).phase(13) - sig.antenna(0).phase(13);
        let expected = (2.0 * a.phase(1, 1) - a.phase(1, 0)) - (2.0 * a.phase(0, 1) - a.phase(0, 0));
        assert_abs_diff_eq!(
            (lead - expected)
                .rem_euclid(TAU)
                .min(TAU - (lead - expected).rem_euclid(TAU)),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn far_field_basics() {
        let g = grid();
        let geo1 = ArrayGeometry::new(1, 0.1).unwrap();
        let a1 = steer_tones(&g, &geo1, &[steered(9, 0.0)]).unwrap();
        let s1 = ArraySignal::linear(&a1).unwrap();
        assert_eq!(far_field_receive(&s1, DelaySteer::new(0.07).unwrap()), *s1.antenna(0));

        let geo = ArrayGeometry::new(2, 0.05).unwrap();
        let a = steer_tones(&g, &geo, &[steered(9, 0.03)]).unwrap();
        let s = ArraySignal::linear(&a).unwrap();
        let on = far_field_receive(&s, DelaySteer::new(0.03).unwrap());
        assert_abs_diff_eq!(on.amplitude(9), 2.0, epsilon = 1e-12);

        // half a period of line 9 away from the beam is a null
        let null = far_field_receive(&s, DelaySteer::new(0.03 - 1.0 / 18.0).unwrap());
        assert!(null.amplitude(9) < 1e-12);
    }

    #[test]
    fn distortion_delays_single_user_match_target() {
        let geo = ArrayGeometry::new(2, 1.0 / 26.0).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.01), steered(11, 0.01)]).unwrap();
        let (up, low) = distortion_delays(9, 11, &a).unwrap();
        assert_eq!(up.index, 13);
        assert_eq!(low.index, 7);
        assert_abs_diff_eq!(up.principal.unwrap().seconds(), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(low.principal.unwrap().seconds(), 0.01, epsilon = 1e-15);
        assert_eq!(up.aliases.len(), 1);
    }

    #[test]
    fn distortion_delays_multi_user_worked_numbers() {
        let geo = ArrayGeometry::new(2, 0.4).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.2), steered(11, 0.3)]).unwrap();
        let (up, low) = distortion_delays(9, 11, &a).unwrap();
        assert_abs_diff_eq!(up.raw, 4.8 / 13.0, epsilon = 1e-12);
        assert_abs_diff_eq!(low.raw, 0.3 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.principal.unwrap().seconds(), 4.8 / 13.0, epsilon = 1e-12);
        assert_abs_diff_eq!(up.modulus, 1.0 / 13.0, epsilon = 1e-15);
        for t in [0.2, 0.3] {
            assert!((up.raw - t).abs() > 1e-3 && (low.raw - t).abs() > 1e-3);
        }
        // grating lobes: several equivalent physical delays
        assert!(up.aliases.len() > 1);
        for al in &up.aliases {
            let n = (al.seconds() - up.raw) / up.modulus;
            assert_abs_diff_eq!(n, n.round(), epsilon = 1e-9);
        }
    }

    #[test]
    fn out_of_range_raw_is_reduced_to_nearest_alias() {
        let geo = ArrayGeometry::new(2, 0.1).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.1), steered(11, -0.1)]).unwrap();
        let (up, _) = distortion_delays(9, 11, &a).unwrap();
        assert!(up.raw.abs() > 0.1);
        let p = up.principal.unwrap().seconds();
        assert!(p.abs() <= 0.1);
        let n = (p - up.raw) / up.modulus;
        assert_abs_diff_eq!(n, n.round(), epsilon = 1e-9);
    }

    #[test]
    fn distortion_delays_preconditions() {
        let g = grid();
        let geo = ArrayGeometry::new(2, 0.4).unwrap();
        let a = steer_tones(&g, &geo, &[steered(5, 0.2), steered(10, 0.3)]).unwrap();
        assert_eq!(
            distortion_delays(5, 10, &a),
            Err(Error::DegenerateFrequencyPlan { k1: 5, k2: 10 })
        );
        let a = steer_tones(&g, &geo, &[steered(9, 0.2), steered(11, 0.3)]).unwrap();
        assert!(distortion_delays(9, 12, &a).is_err());
        let single = steer_tones(
            &g,
            &ArrayGeometry::new(1, 0.4).unwrap(),
            &[steered(9, 0.2), steered(11, 0.3)],
        )
        .unwrap();
        assert!(distortion_delays(9, 11, &single).is_err());
    }

    #[test]
    fn broadside_line_peaks_at_zero() {
        let geo = ArrayGeometry::new(4, 0.025).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.0)]).unwrap();
        let p = pattern_sweep(&ArraySignal::linear(&a).unwrap(), 9, &geo, 1025).unwrap();
        assert_abs_diff_eq!(p.peak_tau, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.peak_gain, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_errors() {
        let geo = ArrayGeometry::new(2, 0.025).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.0)]).unwrap();
        let s = ArraySignal::linear(&a).unwrap();
        assert_eq!(pattern_sweep(&s, 13, &geo, 64), Err(Error::LineAbsent(13)));
        assert!(pattern_sweep(&s, 9, &geo, 8).is_err());
        let other = ArrayGeometry::new(3, 0.025).unwrap();
        assert!(pattern_sweep(&s, 9, &other, 64).is_err());
    }

    #[test]
    fn sweep_covers_interval() {
        let geo = ArrayGeometry::new(2, 0.3).unwrap();
        let taus = geo.sweep_delays(1024);
        assert_eq!(taus.len(), 1024);
        assert_eq!(taus[0], -0.3);
        assert_eq!(taus[1023], 0.3);
    }

    #[test]
    fn parallel_sweep_is_bit_identical() {
        let geo = ArrayGeometry::new(8, 0.4).unwrap();
        let a = steer_tones(&grid(), &geo, &[steered(9, 0.2), steered(11, 0.3)]).unwrap();
        let s = transmit(&a, &PolynomialNonlinearity::third_order(0.1).unwrap(), &band()).unwrap();
        let seq = pattern_sweep_with(&s, 13, &geo, 1024, Execution::Sequential).unwrap();
        let par = pattern_sweep_with(&s, 13, &geo, 1024, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn grating_lobe_flag() {
        let g = grid();
        let geo = ArrayGeometry::new(2, 1.0 / 26.0).unwrap();
        assert!(geo.grating_lobe_free(&g, 13));
        assert!(!geo.grating_lobe_free(&g, 14));
        assert_abs_diff_eq!(
            geo.angle_of(DelaySteer::new(1.0 / 52.0).unwrap()),
            PI / 6.0,
            epsilon = 1e-12
        );
    }
}
