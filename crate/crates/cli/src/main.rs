use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamdist_cli::config::BaselineConfig;
use beamdist_cli::emit::write_patterns;
use beamdist_cli::scenario::pattern_csv_name;
use beamdist_cli::{emit, expand_table, parse_config, run_scenario, run_sweep, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "beamdist", version, about = "Beamformed PA distortion simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write report.json plus pattern CSVs.
    Run(ScenarioArgs),
    /// Write behavioral pattern CSVs only.
    Sweep(ScenarioArgs),
    /// Run a scenario with the independent-noise baseline enabled.
    Compare(ScenarioArgs),
    /// Print the closed-form two-tone third-order table.
    Expand {
        #[arg(long)]
        k1: i64,
        #[arg(long)]
        k2: i64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi2: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to `output.dir` from the config, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let text = std::fs::read_to_string(&self.config).map_err(|source| CliError::Io {
            path: self.config.clone(),
            source,
        })?;
        parse_config(&text)?.with_overrides(self.seed, self.points)
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.dir)))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let bundle = run_scenario(&cfg)?;
            report_paths(&emit(&bundle, &args.out_dir(&cfg))?);
        }
        Command::Compare(args) => {
            let mut cfg = args.load()?;
            if cfg.baseline.is_none() {
                cfg.baseline = Some(BaselineConfig::default());
            }
            let bundle = run_scenario(&cfg)?;
            report_paths(&emit(&bundle, &args.out_dir(&cfg))?);
        }
        Command::Sweep(args) => {
            let cfg = args.load()?;
            let patterns = run_sweep(&cfg)?;
            let dir = args.out_dir(&cfg);
            let written = write_patterns(
                Path::new(&dir),
                patterns.iter().map(|p| (p, pattern_csv_name(p.freq_index))),
            )?;
            report_paths(&written);
        }
        Command::Expand {
            k1,
            k2,
            phi1,
            phi2,
            alpha,
        } => {
            print!("{}", expand_table(k1, k2, phi1, phi2, alpha)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("beamdist: {e}");
            ExitCode::FAILURE
        }
    }
}
