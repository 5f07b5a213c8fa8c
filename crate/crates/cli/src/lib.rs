//! Scenario files in, reports and pattern CSVs out.
//!
//! ```no_run
//! let text = std::fs::read_to_string("scenario.json").unwrap();
//! let cfg = beamdist_cli::parse_config(&text).unwrap();
//! let bundle = beamdist_cli::run_scenario(&cfg).unwrap();
//! beamdist_cli::emit(&bundle, std::path::Path::new("out")).unwrap();
//! ```

pub mod config;
pub mod emit;
mod error;
pub mod scenario;

pub use config::{parse_config, Scenario, ScenarioConfig};
pub use emit::emit;
pub use error::{CliError, Result};
pub use scenario::{run_scenario, run_scenario_with, run_sweep, ReportBundle};

use std::fmt::Write as _;

use beamdist_core::two_tone_third_order_terms;

/// Closed-form two-tone table through `x + αx³`, one term per row.
pub fn expand_table(k1: i64, k2: i64, phi1: f64, phi2: f64, alpha: f64) -> Result<String> {
    let terms = two_tone_third_order_terms(k1, k2, phi1, phi2, alpha).map_err(|source| CliError::Scenario {
        context: "expanding two-tone product".into(),
        source,
    })?;
    let mut out = String::from("index,kind,amplitude,phase\n");
    for t in terms {
        let kind = serde_json::to_value(t.kind)?;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t.index,
            kind.as_str().unwrap_or_default(),
            emit::format_number(t.amplitude),
            emit::format_number(t.phase)
        );
    }
    Ok(out)
}
