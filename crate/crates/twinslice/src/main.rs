//! Command-line front end: runs a scenario across schemes and seeds and
//! writes the metric files.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use twinslice::domain::{ScenarioConfig, SchemeId};
use twinslice::harness::{run_experiment, summarize, write_outputs};

/// Simulates twin-assisted slice management for multicast short-video
/// delivery and reports per-window metrics as CSV.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// Scenario file (TOML). Omitted fields take their defaults; without
    /// this flag the built-in default scenario runs.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Schemes to run, comma separated (defaults to the scenario's list).
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<SchemeId>>,

    /// Seeds: a single value `7`, a comma list `0,3,5`, or an inclusive
    /// range `0..9` (defaults to the scenario seed alone).
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,

    /// Output directory for metrics.csv and summary.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Also write per-user playback traces (trace.csv) and end-of-run twin
    /// state (twins.csv).
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|e| format!("bad range start `{a}`: {e}"))?;
        let hi: u64 = b
            .trim()
            .parse()
            .map_err(|e| format!("bad range end `{b}`: {e}"))?;
        if hi < lo {
            return Err(format!("seed range {lo}..{hi} is empty"));
        }
        return Ok(Seeds((lo..=hi).collect()));
    }
    let mut seeds = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        seeds.push(
            part.parse()
                .map_err(|e| format!("bad seed `{part}`: {e}"))?,
        );
    }
    Ok(Seeds(seeds))
}

fn load_config(path: Option<&PathBuf>) -> twinslice::Result<ScenarioConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| twinslice::Error::Scenario(e.to_string()))
        }
        None => Ok(ScenarioConfig::default()),
    }
}

fn run(cli: &Cli) -> twinslice::Result<bool> {
    let config = load_config(cli.config.as_ref())?;
    config.validate()?;
    let schemes = cli
        .schemes
        .clone()
        .unwrap_or_else(|| config.schemes.clone());
    let seeds = cli
        .seeds
        .clone()
        .map(|s| s.0)
        .unwrap_or_else(|| vec![config.seed]);

    let metrics = run_experiment(&config, &schemes, &seeds)?;
    write_outputs(&metrics, &cli.out, cli.trace)?;

    for cell in &metrics.cells {
        match &cell.error {
            None => println!(
                "{:>12} seed {:>3}: ok, {} windows",
                cell.scheme.name(),
                cell.seed,
                cell.windows.len()
            ),
            Some(e) => println!(
                "{:>12} seed {:>3}: FAILED after {} windows: {e}",
                cell.scheme.name(),
                cell.seed,
                cell.windows.len()
            ),
        }
    }
    for &scheme in &schemes {
        let sat = metrics.satisfaction_values(scheme);
        let val = metrics.value_values(scheme);
        if let (Ok(s), Ok(v)) = (summarize(&sat), summarize(&val)) {
            println!(
                "{:>12}: satisfaction median {:.3}, holistic value mean {:.3}",
                scheme.name(),
                s.median,
                v.mean
            );
        }
    }
    println!("wrote {}", cli.out.display());
    Ok(!metrics.has_errors())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some cells failed; see the error column of metrics.csv");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
