//! Memoryless polynomial devices applied exactly to line spectra, the
//! closed-form two-tone third-order expansion, and the transmit-chain band
//! filter.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, LineSpectrum};

pub const MAX_DEGREE: usize = 9;

/// `f(x) = Σ a_p x^p` for `p = 1..=P`. `coefficients[0]` is `a_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PolynomialNonlinearity {
    coefficients: Vec<f64>,
}

impl PolynomialNonlinearity {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.len() > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "polynomial needs between 1 and {MAX_DEGREE} coefficients, got {}",
                coefficients.len()
            )));
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument("polynomial coefficients must be finite".into()));
        }
        if coefficients.iter().all(|&a| a == 0.0) {
            return Err(Error::InvalidArgument(
                "polynomial needs at least one nonzero coefficient".into(),
            ));
        }
        Ok(Self { coefficients })
    }

    pub fn identity() -> Self {
        Self {
            coefficients: vec![1.0],
        }
    }

    /// `x + αx³`.
    pub fn third_order(alpha: f64) -> Result<Self> {
        Self::new(vec![1.0, 0.0, alpha])
    }

    /// `x + αx²`.
    pub fn second_order(alpha: f64) -> Result<Self> {
        Self::new(vec![1.0, alpha])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `a_p`, zero beyond the stored degree.
    pub fn coefficient(&self, p: usize) -> f64 {
        if p == 0 {
            return 0.0;
        }
        self.coefficients.get(p - 1).copied().unwrap_or(0.0)
    }

    /// Highest power with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|&a| a != 0.0).map_or(0, |i| i + 1)
    }

    /// Evaluates `f` at a single sample.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &a| (acc + a) * x)
    }
}

impl TryFrom<Vec<f64>> for PolynomialNonlinearity {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PolynomialNonlinearity> for Vec<f64> {
    fn from(value: PolynomialNonlinearity) -> Self {
        value.coefficients
    }
}

/// Exact spectrum of `f(x(t))`.
pub fn apply_polynomial(x: &LineSpectrum, f: &PolynomialNonlinearity) -> Result<LineSpectrum> {
    let degree = f.degree();
    let reach = degree as i64 * x.max_abs_index();
    x.grid().check_index(reach)?;

    let mut out = x.scale(f.coefficient(1));
    let mut power = x.clone();
    for p in 2..=degree {
        power = power.multiply(x)?;
        let a = f.coefficient(p);
        if a != 0.0 {
            out = out.add(&power.scale(a))?;
        }
    }
    Ok(out)
}

/// Inclusive range of non-negative frequency indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct IndexRange {
    lo: i64,
    hi: i64,
}

impl IndexRange {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo < 0 || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "index range [{lo}, {hi}] must satisfy 0 <= lo <= hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn width(&self) -> i64 {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    pub fn covers(&self, other: &IndexRange) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl TryFrom<[i64; 2]> for IndexRange {
    type Error = Error;

    fn try_from([lo, hi]: [i64; 2]) -> Result<Self> {
        Self::new(lo, hi)
    }
}

impl From<IndexRange> for [i64; 2] {
    fn from(r: IndexRange) -> Self {
        [r.lo, r.hi]
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Allocated band, its two equal-width neighbours, and the window the
/// transmit chain passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandDefinition {
    pub in_band: IndexRange,
    pub adjacent_lower: IndexRange,
    pub adjacent_upper: IndexRange,
    pub keep_window: IndexRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BandRegion {
    InBand,
    AdjacentLower,
    AdjacentUpper,
    /// Passed by the transmit chain but outside the measured bands.
    Outside,
    /// Removed by the transmit chain.
    Suppressed,
}

impl BandDefinition {
    /// Adjacent bands of `adjacent_width` lines placed directly either side
    /// of `in_band`.
    pub fn new(in_band: IndexRange, adjacent_width: i64, keep_window: IndexRange) -> Result<Self> {
        if adjacent_width < 1 {
            return Err(Error::InvalidArgument(format!(
                "adjacent band width must be at least 1, got {adjacent_width}"
            )));
        }
        let adjacent_lower = IndexRange::new(in_band.lo - adjacent_width, in_band.lo - 1).map_err(|_| {
            Error::InvalidArgument(format!(
                "lower adjacent band of width {adjacent_width} below {in_band} reaches negative indices"
            ))
        })?;
        let adjacent_upper = IndexRange::new(in_band.hi + 1, in_band.hi + adjacent_width)?;
        Self::from_parts(in_band, adjacent_lower, adjacent_upper, keep_window)
    }

    pub fn from_parts(
        in_band: IndexRange,
        adjacent_lower: IndexRange,
        adjacent_upper: IndexRange,
        keep_window: IndexRange,
    ) -> Result<Self> {
        if adjacent_lower.width() != adjacent_upper.width() {
            return Err(Error::InvalidArgument(format!(
                "adjacent bands {adjacent_lower} and {adjacent_upper} differ in width"
            )));
        }
        if !(adjacent_lower.hi < in_band.lo && in_band.hi < adjacent_upper.lo) {
            return Err(Error::InvalidArgument(format!(
                "bands must be ordered and disjoint: {adjacent_lower} < {in_band} < {adjacent_upper}"
            )));
        }
        if !(keep_window.covers(&adjacent_lower) && keep_window.covers(&adjacent_upper)) {
            return Err(Error::InvalidArgument(format!(
                "keep window {keep_window} must cover {adjacent_lower}..{adjacent_upper}"
            )));
        }
        Ok(Self {
            in_band,
            adjacent_lower,
            adjacent_upper,
            keep_window,
        })
    }

    pub fn region(&self, k: i64) -> BandRegion {
        let k = k.abs();
        if !self.keep_window.contains(k) {
            BandRegion::Suppressed
        } else if self.in_band.contains(k) {
            BandRegion::InBand
        } else if self.adjacent_lower.contains(k) {
            BandRegion::AdjacentLower
        } else if self.adjacent_upper.contains(k) {
            BandRegion::AdjacentUpper
        } else {
            BandRegion::Outside
        }
    }
}

/// Ideal brick-wall transmit chain: lines with `|k|` outside the keep window
/// are removed, the rest pass with unit gain.
pub fn band_filter(x: &LineSpectrum, band: &BandDefinition) -> LineSpectrum {
    x.retain_lines(|k| band.keep_window.contains(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Fundamental,
    /// `2k₂ − k₁`
    Im3Upper,
    /// `|k₂ − 2k₁|`
    Im3Lower,
    /// `2k₂ + k₁` and `k₂ + 2k₁`
    Im3Sum,
    /// `3k₁`, `3k₂`
    ThirdHarmonic,
}

/// One cosine term `amplitude·cos(index·Δω·t + phase)` of a closed-form
/// expansion. Amplitudes keep the sign of the polynomial coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub index: i64,
    pub amplitude: f64,
    pub phase: f64,
    pub kind: TermKind,
}

/// The eight cosine terms of a unit two-tone `cos(k₁Δωt+φ₁) + cos(k₂Δωt+φ₂)`
/// through `x + αx³`. Zero-amplitude terms are omitted.
pub fn two_tone_third_order_terms(k1: i64, k2: i64, phi1: f64, phi2: f64, alpha: f64) -> Result<Vec<ExpansionTerm>> {
    if !(1 <= k1 && k1 < k2) {
        return Err(Error::InvalidArgument(format!(
            "two-tone expansion needs 1 <= k1 < k2, got ({k1}, {k2})"
        )));
    }
    let fundamental = 1.0 + 9.0 * alpha / 4.0;
    let im3 = 3.0 * alpha / 4.0;
    let harmonic = alpha / 4.0;

    // cos(−θ) = cos(θ): a negative ω₂−2ω₁ folds onto the positive axis with the phase negated
    let lower_raw = k2 - 2 * k1;
    let (lower_index, lower_phase) = if lower_raw < 0 {
        (-lower_raw, -(phi2 - 2.0 * phi1))
    } else {
        (lower_raw, phi2 - 2.0 * phi1)
    };

    let terms = [
        (k1, fundamental, phi1, TermKind::Fundamental),
        (k2, fundamental, phi2, TermKind::Fundamental),
        (2 * k2 + k1, im3, 2.0 * phi2 + phi1, TermKind::Im3Sum),
        (2 * k2 - k1, im3, 2.0 * phi2 - phi1, TermKind::Im3Upper),
        (k2 + 2 * k1, im3, phi2 + 2.0 * phi1, TermKind::Im3Sum),
        (lower_index, im3, lower_phase, TermKind::Im3Lower),
        (3 * k1, harmonic, 3.0 * phi1, TermKind::ThirdHarmonic),
        (3 * k2, harmonic, 3.0 * phi2, TermKind::ThirdHarmonic),
    ];
    Ok(terms
        .into_iter()
        .filter(|&(_, amplitude, _, _)| amplitude != 0.0)
        .map(|(index, amplitude, phase, kind)| ExpansionTerm {
            index,
            amplitude,
            phase,
            kind,
        })
        .collect())
}

/// Line spectrum of a sum of expansion terms.
pub fn expansion_spectrum(grid: &FrequencyGrid, terms: &[ExpansionTerm]) -> Result<LineSpectrum> {
    LineSpectrum::from_coefficients(
        *grid,
        terms.iter().map(|t| {
            let c = if t.index == 0 {
                Complex64::new(t.amplitude * t.phase.cos(), 0.0)
            } else {
                Complex64::from_polar(t.amplitude / 2.0, t.phase)
            };
            (t.index, c)
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearBandTerm {
    pub term: ExpansionTerm,
    pub region: BandRegion,
}

/// Picks the two intermodulation terms that land next to the tones
/// (`2k₂−k₁` and `|k₂−2k₁|`) and reports where each falls relative to
/// `band`: in-band terms degrade EVM, adjacent ones ACLR.
pub fn distortion_terms_near_band(expansion: &[ExpansionTerm], band: &BandDefinition) -> Vec<NearBandTerm> {
    expansion
        .iter()
        .filter(|t| matches!(t.kind, TermKind::Im3Upper | TermKind::Im3Lower) && t.amplitude != 0.0)
        .map(|&term| NearBandTerm {
            term,
            region: band.region(term.index),
        })
        .collect()
}
