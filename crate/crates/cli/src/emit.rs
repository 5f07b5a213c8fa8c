//! Report and pattern files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use beamdist_core::Pattern;

use crate::error::{CliError, Result};
use crate::scenario::{baseline_csv_name, pattern_csv_name, ReportBundle};

pub const REPORT_FILE: &str = "report.json";
pub const CSV_HEADER: &str = "tau_rx_seconds,power_linear,power_db";

/// Twelve significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.11e}")
    }
}

pub fn pattern_csv(p: &Pattern) -> String {
    let mut out = String::with_capacity(64 * (p.sweep.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for pt in &p.sweep {
        let db = if pt.power > 0.0 {
            10.0 * pt.power.log10()
        } else {
            f64::NEG_INFINITY
        };
        let _ = writeln!(
            out,
            "{},{},{}",
            format_number(pt.tau_rx),
            format_number(pt.power),
            format_number(db)
        );
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(path)(e)
    })
}

pub fn write_patterns<'a>(
    dir: &Path,
    patterns: impl IntoIterator<Item = (&'a Pattern, String)>,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (p, name) in patterns {
        let path = dir.join(name);
        write_atomic(&path, pattern_csv(p).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

pub fn report_json(bundle: &ReportBundle) -> Result<String> {
    let mut text = serde_json::to_string_pretty(bundle)?;
    text.push('\n');
    Ok(text)
}

/// Writes every pattern CSV, then `report.json` last.
pub fn emit(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    let report = report_json(bundle)?;
    let behavioral = bundle.pattern_data.iter().map(|p| (p, pattern_csv_name(p.freq_index)));
    let baseline = bundle
        .baseline_data
        .iter()
        .map(|p| (p, baseline_csv_name(p.freq_index)));
    let mut written = write_patterns(dir, behavioral.chain(baseline))?;
    let path = dir.join(REPORT_FILE);
    write_atomic(&path, report.as_bytes())?;
    written.push(path);
    Ok(written)
}
