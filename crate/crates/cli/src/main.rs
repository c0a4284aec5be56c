use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use drsd_core::harness::{manifest, results_csv, run_point, RunConfig};
use drsd_core::ofec::OfecLayout;
use drsd_core::{selftest, tuner};

#[derive(Parser)]
#[command(name = "drsd", version, about = "Soft-aided decoding of staircase and OFEC codes")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the SNR grid of a config file.
    Run {
        config: PathBuf,
        /// Comma-separated SNR values replacing the grid of the file.
        #[arg(long, value_delimiter = ',')]
        snr: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output prefix; writes PREFIX.csv and PREFIX.manifest.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the BCH decoder against brute force and the OFEC layout.
    Selftest {
        /// Also write the bit-to-codeword table of two OFEC block rows.
        #[arg(long)]
        dump_layout: Option<PathBuf>,
    },
    /// Search DRSD parameters around a base config.
    Tune {
        config: PathBuf,
        /// Search space and settings.
        search: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Output prefix; writes PREFIX.trials.csv and PREFIX.best.conf.
        #[arg(long, default_value = "tune")]
        out: PathBuf,
    },
}

fn revision() -> String {
    let git = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match git {
        Some(g) => format!("{} ({g})", env!("CARGO_PKG_VERSION")),
        None => env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(
    config: &Path,
    snr: Option<Vec<f64>>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = snr {
        cfg.snr = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let mut points = Vec::new();
    for &s in &cfg.snr {
        let p = run_point(&cfg, s)?;
        let c = &p.counters;
        let (lo, hi) = c.ber_interval();
        eprintln!(
            "EbN0 {:.3} dB  EsN0 {:.3} dB  bits {}  errors {}  BER {:.3e} [{:.2e}, {:.2e}]  FER {:.3e}",
            p.ebn0, p.esn0, c.bits, c.bit_errors, c.ber(), lo, hi, c.fer()
        );
        points.push(p);
    }
    let csv = results_csv(&points);
    match out {
        Some(prefix) => {
            fs::write(with_suffix(&prefix, ".csv"), &csv)?;
            fs::write(
                with_suffix(&prefix, ".manifest.txt"),
                manifest(&cfg, &points, &revision()),
            )?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn run_selftest(dump: Option<PathBuf>) -> Result<bool> {
    let checks = selftest::run();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(path) = dump {
        fs::write(&path, OfecLayout::identity().dump(20..22))?;
        println!("layout table written to {}", path.display());
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn tune(config: &Path, search: &Path, workers: Option<usize>, out: &Path) -> Result<()> {
    let mut base = load_config(config)?;
    if let Some(w) = workers {
        base.workers = w;
    }
    let text = fs::read_to_string(search).with_context(|| format!("reading {}", search.display()))?;
    let (space, settings) = tuner::parse_search_file(&text)?;
    let outcome = tuner::search(&base, &space, &settings, |t| {
        eprintln!(
            "trial {} round {}: {} -> {} (best {})",
            t.index, t.round, t.params, t.objective, t.incumbent
        );
    })?;
    fs::write(with_suffix(out, ".trials.csv"), tuner::trial_log_csv(&outcome.trials))?;
    fs::write(with_suffix(out, ".best.conf"), outcome.best.to_text())?;
    println!("{}", space.describe(&outcome.best));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run {
            config,
            snr,
            seed,
            workers,
            out,
        } => run(&config, snr, seed, workers, out).map(|_| true),
        Cmd::Selftest { dump_layout } => run_selftest(dump_layout),
        Cmd::Tune {
            config,
            search,
            workers,
            out,
        } => tune(&config, &search, workers, &out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
