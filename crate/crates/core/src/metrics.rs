//! EVM, ACLR and array gain, evaluated at antenna ports or at far-field
//! directions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::array::{combine, far_field_receive, ArraySignal, DelaySteer, SteeringAssignment};
use crate::error::{Error, Result};
use crate::nonlinearity::{BandDefinition, IndexRange};
use crate::spectra::{LineSpectrum, Tone};

/// A level in dB. Negative infinity (no power at all) is a legitimate value
/// and serializes as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Decibels(pub f64);

impl Decibels {
    pub fn from_power_ratio(ratio: f64) -> Self {
        Self(10.0 * ratio.log10())
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_neg_infinite(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for Decibels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_infinite() {
            write!(f, "-inf dB")
        } else {
            write!(f, "{:.3} dB", self.0)
        }
    }
}

impl Serialize for Decibels {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else if self.0 == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            Err(serde::ser::Error::custom(format!("non-finite dB value {}", self.0)))
        }
    }
}

impl<'de> Deserialize<'de> for Decibels {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Marker(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => Ok(Self(v)),
            Repr::Marker(s) if s == "-inf" => Ok(Self(f64::NEG_INFINITY)),
            Repr::Marker(s) => Err(serde::de::Error::custom(format!("unknown dB marker {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aclr {
    pub lower: Decibels,
    pub upper: Decibels,
}

/// `|Σ_m c_m e^{−i·m·kΔω·τ}|² / Σ_m |c_m|²`, between 0 and M.
pub fn array_gain(signal: &ArraySignal, freq_index: i64, direction: DelaySteer) -> Result<f64> {
    let k = freq_index.abs();
    let coefficients = signal.line(k);
    let incoherent: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    if incoherent == 0.0 {
        return Err(Error::LineAbsent(k));
    }
    let omega = signal.grid().angular_frequency(k);
    Ok(combine(&coefficients, omega, direction.seconds()).norm_sqr() / incoherent)
}

fn band_power(spectrum: &LineSpectrum, range: &IndexRange) -> f64 {
    spectrum
        .positive_lines()
        .filter(|(k, _)| range.contains(*k))
        .map(|(k, _)| spectrum.line_power(k))
        .sum()
}

/// Adjacent-band power relative to total in-band power, each side separately.
pub fn aclr(spectrum: &LineSpectrum, band: &BandDefinition) -> Result<Aclr> {
    let in_band = band_power(spectrum, &band.in_band);
    if in_band <= 0.0 {
        return Err(Error::Undefined("ACLR with zero in-band power"));
    }
    Ok(Aclr {
        lower: Decibels::from_power_ratio(band_power(spectrum, &band.adjacent_lower) / in_band),
        upper: Decibels::from_power_ratio(band_power(spectrum, &band.adjacent_upper) / in_band),
    })
}

/// In-band error relative to the reference after fitting one common complex
/// gain to the reference lines. In-band lines without a reference count as
/// pure error.
pub fn evm(spectrum: &LineSpectrum, reference_tones: &[Tone], band: &BandDefinition) -> Result<f64> {
    let mut reference: BTreeMap<i64, Complex64> = BTreeMap::new();
    for t in reference_tones {
        if !band.in_band.contains(t.index) {
            return Err(Error::InvalidArgument(format!(
                "reference tone {} lies outside the in-band interval {}",
                t.index, band.in_band
            )));
        }
        *reference.entry(t.index).or_insert(Complex64::new(0.0, 0.0)) += t.phasor();
    }
    let reference_power: f64 = reference.values().map(|r| r.norm_sqr()).sum();
    if reference_power == 0.0 {
        return Err(Error::Undefined("EVM with zero reference power"));
    }
    let correlation: Complex64 = reference.iter().map(|(&k, r)| spectrum.coefficient(k) * r.conj()).sum();
    let gain = correlation / reference_power;
    let scaled_power = gain.norm_sqr() * reference_power;
    if scaled_power == 0.0 {
        return Err(Error::Undefined("EVM with no reference signal observed"));
    }

    let mut indices: Vec<i64> = spectrum
        .positive_lines()
        .map(|(k, _)| k)
        .filter(|&k| band.in_band.contains(k))
        .chain(reference.keys().copied())
        .collect();
    indices.sort_unstable();
    indices.dedup();
    let error: f64 = indices
        .into_iter()
        .map(|k| {
            let r = reference.get(&k).copied().unwrap_or_default();
            (spectrum.coefficient(k) - gain * r).norm_sqr()
        })
        .sum();
    Ok((error / scaled_power).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    /// 1-based antenna port.
    Port {
        antenna: usize,
    },
    Direction {
        tau_rx: f64,
    },
}

/// Metrics at one location. `None` marks a metric that is undefined there,
/// e.g. ACLR at an exact null of the in-band signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub location: Location,
    pub evm: Option<f64>,
    pub aclr_lower_db: Option<Decibels>,
    pub aclr_upper_db: Option<Decibels>,
    /// Array gain per line index; empty for port reports.
    pub array_gain_by_line: BTreeMap<i64, f64>,
}

fn defined<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn report_for(
    location: Location,
    spectrum: &LineSpectrum,
    reference: &[Tone],
    band: &BandDefinition,
) -> Result<MetricsReport> {
    let aclr = defined(aclr(spectrum, band))?;
    Ok(MetricsReport {
        location,
        evm: defined(evm(spectrum, reference, band))?,
        aclr_lower_db: aclr.map(|a| a.lower),
        aclr_upper_db: aclr.map(|a| a.upper),
        array_gain_by_line: BTreeMap::new(),
    })
}

/// Metrics at every antenna port followed by metrics at each direction.
///
/// At a port the reference is the tone set fed to that antenna. At a
/// direction it is the undistorted steered signal as received there, so EVM
/// and ACLR isolate what the device adds.
pub fn port_vs_ota_report(
    signal: &ArraySignal,
    assignment: &SteeringAssignment,
    band: &BandDefinition,
    directions: &[DelaySteer],
) -> Result<Vec<MetricsReport>> {
    if signal.num_antennas() != assignment.geometry().num_antennas() {
        return Err(Error::Incompatible(format!(
            "signal has {} antennas, assignment {}",
            signal.num_antennas(),
            assignment.geometry().num_antennas()
        )));
    }
    let mut reports = Vec::with_capacity(signal.num_antennas() + directions.len());
    for m in 0..signal.num_antennas() {
        reports.push(report_for(
            Location::Port { antenna: m + 1 },
            signal.antenna(m),
            &assignment.antenna_tones(m),
            band,
        )?);
    }

    let linear = ArraySignal::linear(assignment)?;
    let tone_indices = assignment.tone_indices();
    let lines = signal.line_indices();
    for &direction in directions {
        let received = far_field_receive(signal, direction);
        let ideal = far_field_receive(&linear, direction);
        let reference: Vec<Tone> = tone_indices
            .iter()
            .filter(|&&k| ideal.contains(k))
            .map(|&k| Tone::new(k, ideal.amplitude(k), ideal.phase(k)))
            .collect();
        let mut report = report_for(
            Location::Direction {
                tau_rx: direction.seconds(),
            },
            &received,
            &reference,
            band,
        )?;
        for &k in &lines {
            report.array_gain_by_line.insert(k, array_gain(signal, k, direction)?);
        }
        reports.push(report);
    }
    Ok(reports)
}
