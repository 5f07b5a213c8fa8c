//! Scenario documents: JSON in, validated against every precondition of the
//! simulation before anything runs.

use serde::{Deserialize, Serialize};

use beamdist_core::array::DEFAULT_SWEEP_POINTS;
use beamdist_core::{
    ArrayGeometry, BandDefinition, DelaySteer, FrequencyGrid, IndexRange, PolynomialNonlinearity, SteeredTone, Tone,
    DEFAULT_PRUNE_THRESHOLD,
};

use crate::error::{CliError, Result};

pub const DEFAULT_BASELINE_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub tones: Vec<ToneConfig>,
    pub targets: Vec<TargetConfig>,
    pub geometry: GeometryConfig,
    pub nonlinearity: NonlinearityConfig,
    pub band: BandConfig,
    #[serde(default = "default_sweep_points")]
    pub sweep_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Δω in rad/s.
    pub base_rate: f64,
    pub max_index: i64,
    #[serde(default = "default_prune")]
    pub prune_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneConfig {
    pub index: i64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub tone: i64,
    /// Inter-element delay in seconds.
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub num_antennas: usize,
    /// Seconds.
    pub element_delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub in_band: [i64; 2],
    pub adjacent_width: i64,
    pub keep_window: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_BASELINE_TRIALS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

fn default_sweep_points() -> usize {
    DEFAULT_SWEEP_POINTS
}

fn default_prune() -> f64 {
    DEFAULT_PRUNE_THRESHOLD
}

fn default_trials() -> u64 {
    DEFAULT_BASELINE_TRIALS
}

/// The core objects a validated config describes.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: FrequencyGrid,
    pub tones: Vec<SteeredTone>,
    pub geometry: ArrayGeometry,
    pub nonlinearity: PolynomialNonlinearity,
    pub band: BandDefinition,
    pub sweep_points: usize,
    pub baseline: Option<BaselineConfig>,
}

impl Scenario {
    pub fn is_single_user(&self) -> bool {
        self.tones.windows(2).all(|w| w[0].delay == w[1].delay)
    }
}

fn field(name: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Field {
        field: name.into(),
        message: message.to_string(),
    }
}

/// Parses and validates a scenario document, applying defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Applies command-line overrides and re-validates.
    pub fn with_overrides(mut self, seed: Option<u64>, points: Option<usize>) -> Result<Self> {
        if let Some(seed) = seed {
            self.baseline.get_or_insert_with(BaselineConfig::default).seed = seed;
        }
        if let Some(points) = points {
            self.sweep_points = points;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.baseline.as_ref().map_or(0, |b| b.seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario().map(|_| ())
    }

    /// Builds the core objects, reporting the first offending field.
    pub fn scenario(&self) -> Result<Scenario> {
        let g = &self.grid;
        if !(g.base_rate.is_finite() && g.base_rate > 0.0) {
            return Err(field("grid.base_rate", "must be a positive number of rad/s"));
        }
        if g.max_index < 1 {
            return Err(field("grid.max_index", "must be at least 1"));
        }
        if !(g.prune_threshold.is_finite() && (0.0..=1e-9).contains(&g.prune_threshold)) {
            return Err(field("grid.prune_threshold", "must lie in [0, 1e-9]"));
        }
        let grid = FrequencyGrid::new(g.base_rate, g.max_index)
            .and_then(|grid| grid.with_prune_threshold(g.prune_threshold))
            .map_err(|e| field("grid", e))?;

        if self.geometry.num_antennas < 1 {
            return Err(field("geometry.num_antennas", "must be at least 1"));
        }
        if !(self.geometry.element_delay.is_finite() && self.geometry.element_delay > 0.0) {
            return Err(field("geometry.element_delay", "must be a positive number of seconds"));
        }
        let geometry = ArrayGeometry::new(self.geometry.num_antennas, self.geometry.element_delay)
            .map_err(|e| field("geometry", e))?;

        let nonlinearity = PolynomialNonlinearity::new(self.nonlinearity.coefficients.clone())
            .map_err(|e| field("nonlinearity.coefficients", e))?;

        let in_band = IndexRange::try_from(self.band.in_band).map_err(|e| field("band.in_band", e))?;
        let keep = IndexRange::try_from(self.band.keep_window).map_err(|e| field("band.keep_window", e))?;
        let band = BandDefinition::new(in_band, self.band.adjacent_width, keep).map_err(|e| field("band", e))?;

        if self.tones.is_empty() {
            return Err(field("tones", "at least one tone is required"));
        }
        let mut tones = Vec::with_capacity(self.tones.len());
        for (i, t) in self.tones.iter().enumerate() {
            if t.index < 1 || t.index > g.max_index {
                return Err(field(
                    format!("tones[{i}].index"),
                    format!("must lie in [1, {}]", g.max_index),
                ));
            }
            if !in_band.contains(t.index) {
                return Err(field(
                    format!("tones[{i}].index"),
                    format!("must lie inside band.in_band {in_band}"),
                ));
            }
            if self.tones[..i].iter().any(|o| o.index == t.index) {
                return Err(field(format!("tones[{i}].index"), "duplicates an earlier tone"));
            }
            if !(t.amplitude.is_finite() && t.amplitude >= 0.0) {
                return Err(field(
                    format!("tones[{i}].amplitude"),
                    "must be finite and non-negative",
                ));
            }
            if !t.phase.is_finite() {
                return Err(field(format!("tones[{i}].phase"), "must be finite"));
            }
            let targets: Vec<(usize, &TargetConfig)> = self
                .targets
                .iter()
                .enumerate()
                .filter(|(_, tc)| tc.tone == t.index)
                .collect();
            let (j, target) = match targets.as_slice() {
                [one] => *one,
                [] => return Err(field("targets", format!("tone {} has no target delay", t.index))),
                _ => return Err(field("targets", format!("tone {} has several target delays", t.index))),
            };
            if !(target.delay.is_finite() && target.delay.abs() <= geometry.element_delay()) {
                return Err(field(
                    format!("targets[{j}].delay"),
                    format!(
                        "must lie within ±geometry.element_delay = ±{}",
                        geometry.element_delay()
                    ),
                ));
            }
            tones.push(SteeredTone {
                tone: Tone::new(t.index, t.amplitude, t.phase),
                delay: DelaySteer::new(target.delay).map_err(|e| field(format!("targets[{j}].delay"), e))?,
            });
        }
        if let Some((j, t)) = self
            .targets
            .iter()
            .enumerate()
            .find(|(_, tc)| !self.tones.iter().any(|t| t.index == tc.tone))
        {
            return Err(field(
                format!("targets[{j}].tone"),
                format!("{} is not a configured tone", t.tone),
            ));
        }

        let highest = self.tones.iter().map(|t| t.index).max().unwrap_or(0);
        let needed = nonlinearity.degree() as i64 * highest;
        if needed > g.max_index {
            return Err(field(
                "grid.max_index",
                format!(
                    "must be at least {needed} to hold degree-{} products of tone {highest}",
                    nonlinearity.degree()
                ),
            ));
        }

        let scenario = Scenario {
            grid,
            tones,
            geometry,
            nonlinearity,
            band,
            sweep_points: self.sweep_points,
            baseline: self.baseline.clone(),
        };

        if let [a, b] = self.tones.as_slice() {
            let (k1, k2) = (a.index.min(b.index), a.index.max(b.index));
            if k2 == 2 * k1 && !scenario.is_single_user() {
                return Err(field(
                    "tones",
                    format!("degenerate frequency plan: k2 = 2*k1 ({k1}, {k2}) has no lower distortion direction"),
                ));
            }
        }
        if self.sweep_points < beamdist_core::array::MIN_SWEEP_POINTS {
            return Err(field(
                "sweep_points",
                format!("must be at least {}", beamdist_core::array::MIN_SWEEP_POINTS),
            ));
        }
        if let Some(b) = &self.baseline {
            if b.trials < 1 {
                return Err(field("baseline.trials", "must be at least 1"));
            }
        }
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"{
        "grid": {"base_rate": 6.283185307179586, "max_index": 40},
        "tones": [{"index": 9, "amplitude": 1.0}, {"index": 11, "amplitude": 1.0}],
        "targets": [{"tone": 9, "delay": 0.01}, {"tone": 11, "delay": 0.01}],
        "geometry": {"num_antennas": 2, "element_delay": 0.038461538461538464},
        "nonlinearity": {"coefficients": [1.0, 0.0, 0.1]},
        "band": {"in_band": [8, 12], "adjacent_width": 4, "keep_window": [4, 16]}
    }"#;

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        f(&mut v);
        v.to_string()
    }

    fn field_of(text: &str) -> String {
        match parse_config(text) {
            Err(CliError::Field { field, .. }) => field,
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.sweep_points, 1024);
        assert_eq!(cfg.grid.prune_threshold, 1e-14);
        assert!(cfg.baseline.is_none());
        assert!(cfg.scenario().unwrap().is_single_user());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_config(MINIMAL)
            .unwrap()
            .with_overrides(Some(9), Some(256))
            .unwrap();
        let echo = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(parse_config(&echo).unwrap(), cfg);
        assert_eq!(cfg.seed(), 9);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("{\n  \"grid\": ,\n}") {
            Err(CliError::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_element_delay_names_field() {
        let text = edit(|v| v["geometry"]["element_delay"] = (-0.1).into());
        assert_eq!(field_of(&text), "geometry.element_delay");
    }

    #[test]
    fn degenerate_multi_user_plan_rejected() {
        let text = edit(|v| {
            v["tones"][1]["index"] = 10.into();
            v["band"]["in_band"] = serde_json::json!([5, 12]);
            v["band"]["keep_window"] = serde_json::json!([1, 16]);
            v["targets"] = serde_json::json!([{"tone": 5, "delay": 0.01}, {"tone": 10, "delay": -0.01}]);
            v["tones"][0]["index"] = 5.into();
        });
        match parse_config(&text) {
            Err(CliError::Field { field, message }) => {
                assert_eq!(field, "tones");
                assert!(message.contains("degenerate frequency plan"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_errors() {
        assert_eq!(
            field_of(&edit(|v| v["grid"]["max_index"] = 30.into())),
            "grid.max_index"
        );
        assert_eq!(
            field_of(&edit(|v| v["grid"]["base_rate"] = 0.0.into())),
            "grid.base_rate"
        );
        assert_eq!(
            field_of(&edit(|v| v["targets"][1]["delay"] = 0.5.into())),
            "targets[1].delay"
        );
        assert_eq!(field_of(&edit(|v| v["tones"][0]["index"] = 3.into())), "tones[0].index");
        assert_eq!(field_of(&edit(|v| v["sweep_points"] = 4.into())), "sweep_points");
        assert_eq!(
            field_of(&edit(|v| v["nonlinearity"]["coefficients"] = serde_json::json!([0.0]))),
            "nonlinearity.coefficients"
        );
        assert_eq!(
            field_of(&edit(|v| v["band"]["keep_window"] = serde_json::json!([6, 16]))),
            "band"
        );
        assert_eq!(
            field_of(&edit(|v| v["targets"] = serde_json::json!([{"tone": 9, "delay": 0.0}]))),
            "targets"
        );
        assert_eq!(
            field_of(&edit(|v| v["baseline"] = serde_json::json!({"trials": 0}))),
            "baseline.trials"
        );
        assert_eq!(
            field_of(&edit(|v| v["geometry"]["num_antennas"] = 0.into())),
            "geometry.num_antennas"
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(matches!(
            parse_config(&edit(|v| v["colour"] = "blue".into())),
            Err(CliError::Parse { .. })
        ));
    }
}
