//! Runs a validated scenario end to end and collects the results.

use serde::Serialize;
use sha2::{Digest, Sha256};

use beamdist_core::{
    distortion_delays, mean_pattern_with, model_contrast_report, pattern_sweep_with, port_vs_ota_report, steer_tones,
    transmit, ArraySignal, DelaySteer, DistortionDirection, Execution, MetricsReport, ModelContrast, NoiseModelConfig,
    Pattern,
};

use crate::config::{BaselineConfig, ScenarioConfig};
use crate::error::{Context, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the compact JSON config echo.
    pub config_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionDelays {
    /// Line `2k₂ − k₁`.
    pub upper: DistortionDirection,
    /// Line `|2k₁ − k₂|`.
    pub lower: DistortionDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineRole {
    Fundamental,
    Distortion,
}

/// A pattern without its sweep samples, which go to CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternSummary {
    pub freq_index: i64,
    pub role: LineRole,
    pub points: usize,
    pub peak_tau: f64,
    pub peak_power: f64,
    pub peak_gain: f64,
    pub mean_power: f64,
    pub contrast: f64,
    pub lobes: Vec<f64>,
    pub reference_power: f64,
    pub csv: String,
}

impl PatternSummary {
    fn new(p: &Pattern, role: LineRole, csv: String) -> Self {
        Self {
            freq_index: p.freq_index,
            role,
            points: p.sweep.len(),
            peak_tau: p.peak_tau,
            peak_power: p.peak_power,
            peak_gain: p.peak_gain,
            mean_power: p.mean_power,
            contrast: p.contrast,
            lobes: p.lobes.clone(),
            reference_power: p.reference_power,
            csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineLine {
    pub freq_index: i64,
    pub per_antenna_line_power: f64,
    pub mean_pattern: PatternSummary,
    pub comparison: ModelContrast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineComparison {
    pub trials: u64,
    pub seed: u64,
    pub lines: Vec<BaselineLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    pub config: ScenarioConfig,
    pub single_user: bool,
    pub tone_lines: Vec<i64>,
    pub distortion_lines: Vec<i64>,
    pub port_reports: Vec<MetricsReport>,
    pub direction_reports: Vec<MetricsReport>,
    pub distortion_delays: Option<DistortionDelays>,
    pub patterns: Vec<PatternSummary>,
    pub baseline: Option<BaselineComparison>,
    /// Full behavioral sweeps, in the order of `patterns`.
    #[serde(skip)]
    pub pattern_data: Vec<Pattern>,
    /// Full baseline sweeps, in the order of `baseline.lines`.
    #[serde(skip)]
    pub baseline_data: Vec<Pattern>,
}

pub fn pattern_csv_name(k: i64) -> String {
    format!("pattern_{k}.csv")
}

pub fn baseline_csv_name(k: i64) -> String {
    format!("baseline_pattern_{k}.csv")
}

pub fn config_hash(cfg: &ScenarioConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Transmitted {
    signal: ArraySignal,
    assignment: beamdist_core::SteeringAssignment,
    tone_lines: Vec<i64>,
    distortion_lines: Vec<i64>,
}

fn transmit_scenario(cfg: &ScenarioConfig) -> Result<(crate::config::Scenario, Transmitted)> {
    let sc = cfg.scenario()?;
    let assignment = steer_tones(&sc.grid, &sc.geometry, &sc.tones).context(|| "steering tones".into())?;
    let signal = transmit(&assignment, &sc.nonlinearity, &sc.band).context(|| "transmitting".into())?;
    let tone_lines = assignment.tone_indices();
    let distortion_lines = signal
        .line_indices()
        .into_iter()
        .filter(|k| *k > 0 && !tone_lines.contains(k) && signal.summed_line_power(*k) > 0.0)
        .collect();
    Ok((
        sc,
        Transmitted {
            signal,
            assignment,
            tone_lines,
            distortion_lines,
        },
    ))
}

fn sweep_all(
    t: &Transmitted,
    geometry: &beamdist_core::ArrayGeometry,
    points: usize,
    execution: Execution,
) -> Result<Vec<(Pattern, LineRole)>> {
    let fundamentals = t.tone_lines.iter().filter(|&&k| t.signal.summed_line_power(k) > 0.0);
    let lines = fundamentals
        .map(|&k| (k, LineRole::Fundamental))
        .chain(t.distortion_lines.iter().map(|&k| (k, LineRole::Distortion)));
    lines
        .map(|(k, role)| {
            pattern_sweep_with(&t.signal, k, geometry, points, execution)
                .context(|| format!("sweeping line {k}"))
                .map(|p| (p, role))
        })
        .collect()
}

/// Behavioral patterns only, for the `sweep` subcommand.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<Vec<Pattern>> {
    let (sc, t) = transmit_scenario(cfg)?;
    Ok(sweep_all(&t, &sc.geometry, sc.sweep_points, Execution::default())?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ReportBundle> {
    run_scenario_with(cfg, Execution::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, execution: Execution) -> Result<ReportBundle> {
    let (sc, t) = transmit_scenario(cfg)?;
    let single_user = t.assignment.is_single_user();

    let mut ordered = t.tone_lines.clone();
    ordered.sort_unstable();
    let delays = match ordered.as_slice() {
        [k1, k2] if sc.geometry.num_antennas() >= 2 && *k2 != 2 * *k1 => {
            let (upper, lower) =
                distortion_delays(*k1, *k2, &t.assignment).context(|| "computing distortion delays".into())?;
            Some(DistortionDelays { upper, lower })
        }
        _ => None,
    };

    let mut directions: Vec<DelaySteer> = Vec::new();
    let principals = delays
        .iter()
        .flat_map(|d| [d.upper.principal, d.lower.principal])
        .flatten();
    // delays equal up to rounding describe one direction
    let same = 1e-12 * sc.geometry.element_delay();
    for d in sc.tones.iter().map(|t| t.delay).chain(principals) {
        if !directions.iter().any(|x| (x.seconds() - d.seconds()).abs() <= same) {
            directions.push(d);
        }
    }
    let mut reports = port_vs_ota_report(&t.signal, &t.assignment, &sc.band, &directions)
        .context(|| "computing port and direction metrics".into())?;
    let direction_reports = reports.split_off(sc.geometry.num_antennas());

    let swept = sweep_all(&t, &sc.geometry, sc.sweep_points, execution)?;
    let patterns = swept
        .iter()
        .map(|(p, role)| PatternSummary::new(p, *role, pattern_csv_name(p.freq_index)))
        .collect();

    let (baseline, baseline_data) = match &sc.baseline {
        Some(b) => {
            let (cmp, data) = compare_models(&t, &swept, b, &sc.geometry, sc.sweep_points, execution)?;
            (Some(cmp), data)
        }
        None => (None, Vec::new()),
    };

    Ok(ReportBundle {
        provenance: Provenance {
            tool: "beamdist",
            version: VERSION,
            config_sha256: config_hash(cfg)?,
            seed: cfg.seed(),
        },
        config: cfg.clone(),
        single_user,
        tone_lines: t.tone_lines.clone(),
        distortion_lines: t.distortion_lines.clone(),
        port_reports: reports,
        direction_reports,
        distortion_delays: delays,
        patterns,
        baseline,
        pattern_data: swept.into_iter().map(|(p, _)| p).collect(),
        baseline_data,
    })
}

fn compare_models(
    t: &Transmitted,
    swept: &[(Pattern, LineRole)],
    b: &BaselineConfig,
    geometry: &beamdist_core::ArrayGeometry,
    points: usize,
    execution: Execution,
) -> Result<(BaselineComparison, Vec<Pattern>)> {
    let desired = ArraySignal::linear(&t.assignment).context(|| "building the undistorted signal".into())?;
    let mut lines = Vec::new();
    let mut data = Vec::new();
    for (behavioral, _) in swept.iter().filter(|(_, role)| *role == LineRole::Distortion) {
        let k = behavioral.freq_index;
        let noise = NoiseModelConfig::matched_to(&t.signal, k, b.trials, b.seed)
            .context(|| format!("matching noise power on line {k}"))?;
        let mean = mean_pattern_with(&noise, &desired, geometry, k, points, execution)
            .context(|| format!("averaging the independent-noise pattern of line {k}"))?;
        let comparison =
            model_contrast_report(behavioral, &mean).context(|| format!("comparing models on line {k}"))?;
        lines.push(BaselineLine {
            freq_index: k,
            per_antenna_line_power: noise.per_antenna_line_power,
            mean_pattern: PatternSummary::new(&mean, LineRole::Distortion, baseline_csv_name(k)),
            comparison,
        });
        data.push(mean);
    }
    Ok((
        BaselineComparison {
            trials: b.trials,
            seed: b.seed,
            lines,
        },
        data,
    ))
}
