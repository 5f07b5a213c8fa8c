//! Exact line-spectrum simulation of memoryless polynomial distortion in
//! multi-antenna transmitters.
//!
//! Signals are represented as finite sets of phasors on an integer frequency
//! grid, so every nonlinearity, steering and far-field combination step is
//! computed in closed form. A coherently sampled time-domain path is kept
//! alongside purely as an independent check.
//!
//! Module map:
//!
//! * [`spectra`] line spectra, tone construction, sampling/DFT oracle
//! * [`nonlinearity`] polynomial devices, two-tone expansion, band filtering
//! * [`array`](mod@array) uniform linear array steering, far-field reception, patterns
//! * [`metrics`] EVM, ACLR and array gain at ports and over the air
//! * [`baseline`] the independent-distortion-noise model used for contrast

pub mod array;
pub mod baseline;
mod error;
pub mod metrics;
pub mod nonlinearity;
pub mod spectra;

pub use array::{
    distortion_delays, far_field_receive, pattern_sweep, pattern_sweep_with, steer_tones, transmit, ArrayGeometry,
    ArraySignal, DelaySteer, DistortionDirection, Execution, Pattern, SteeredTone, SteeringAssignment,
};
pub use baseline::{
    independent_noise_transmit, mean_pattern, mean_pattern_with, model_contrast_report, ModelContrast, NoiseModelConfig,
};
pub use error::{Error, Result};
pub use metrics::{aclr, array_gain, evm, port_vs_ota_report, Aclr, Decibels, Location, MetricsReport};
pub use nonlinearity::{
    apply_polynomial, band_filter, distortion_terms_near_band, two_tone_third_order_terms, BandDefinition, BandRegion,
    ExpansionTerm, IndexRange, NearBandTerm, PolynomialNonlinearity, TermKind,
};
pub use spectra::{
    estimate_lines, sample_waveform, sample_waveform_delayed, tone, FrequencyGrid, LineSpectrum, SampledWaveform, Tone,
    DEFAULT_PRUNE_THRESHOLD,
};

pub use num_complex::Complex64;
