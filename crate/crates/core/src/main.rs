use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dofw::harness::{self, csv, ExperimentConfig};
use dofw::{Error, Result};

#[derive(Parser)]
#[command(name = "dofw", version, about = "Delayed online Frank-Wolfe experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write the per-round CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output path; overrides `run.output`. Stdout when neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `run.base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the loss stream's per-round parameters here.
        #[arg(long)]
        dump_stream: Option<PathBuf>,
        /// Write the realized delay sequence here.
        #[arg(long)]
        dump_delays: Option<PathBuf>,
    },
    /// Run a grid over horizons and delays and write the summary CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated horizons.
        #[arg(long = "T", value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
        /// Comma-separated delay magnitudes.
        #[arg(long = "d", value_delimiter = ',', required = true)]
        delays: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Run cells one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Run an experiment while checking the surrogate-gap bound after every update.
    Gapcheck {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let config = harness::parse_config(&text).map_err(|e| match e {
        Error::Config { line, msg } => Error::Config {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })?;
    for w in &config.warnings {
        eprintln!("warning: {w}");
    }
    Ok(config)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    dump_stream: Option<PathBuf>,
    dump_delays: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = load_config(&config)?;
    if let Some(seed) = seed {
        cfg.base_seed = seed;
    }
    if dump_stream.is_some() || dump_delays.is_some() {
        let exp = harness::Experiment::build(&cfg)?;
        if let Some(path) = dump_stream {
            let mut w = create(&path)?;
            exp.stream.write_params_csv(&mut w)?;
            w.flush()?;
        }
        if let Some(path) = dump_delays {
            let mut w = create(&path)?;
            exp.schedule.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    let result = harness::run_experiment(&cfg)?;
    match out.or_else(|| cfg.output.clone()) {
        Some(path) => {
            let mut w = create(&path)?;
            csv::write_rounds(&result, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            csv::write_rounds(&result, &mut w)?;
        }
    }
    eprintln!(
        "{} on {}: T={} d={} regret={} ({} ms)",
        cfg.algorithm,
        cfg.set.kind(),
        cfg.horizon,
        result.max_delay,
        csv::fmt_real(result.regret),
        result.duration.as_millis()
    );
    Ok(())
}

fn sweep(config: PathBuf, horizons: Vec<usize>, delays: Vec<usize>, out: PathBuf, serial: bool) -> Result<()> {
    let cfg = load_config(&config)?;
    let rows = harness::sweep(&cfg, &horizons, &delays, !serial)?;
    let mut w = create(&out)?;
    csv::write_sweep(&rows, &mut w)?;
    w.flush()?;
    eprintln!("wrote {} cells to {}", rows.len(), out.display());
    Ok(())
}

fn gapcheck(config: PathBuf) -> Result<()> {
    let cfg = load_config(&config)?;
    let summary = harness::gap_check(&cfg)?;
    eprintln!(
        "checked {} surrogate states, worst gap/bound = {:.6}",
        summary.checked, summary.worst_ratio
    );
    if let Some(first) = summary.violations.first() {
        return Err(Error::Invariant(format!(
            "{} gap-bound violations; first at tau={} (gap {} > bound {})",
            summary.violations.len(),
            first.tau,
            csv::fmt_real(first.gap),
            csv::fmt_real(first.bound)
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            dump_stream,
            dump_delays,
        } => run(config, out, seed, dump_stream, dump_delays),
        Command::Sweep {
            config,
            horizons,
            delays,
            out,
            serial,
        } => sweep(config, horizons, delays, out, serial),
        Command::Gapcheck { config } => gapcheck(config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
