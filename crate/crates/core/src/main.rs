use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hepaflow::dataset::{class_counts, load_ilpd};
use hepaflow::numerics::SeededRng;
use hepaflow::pipeline::{self, Mode, PipelineConfig};
use hepaflow::preprocess::{generate_synthetic, SyntheticSpec};
use hepaflow::{Error, Result};

#[derive(Parser)]
#[command(name = "hepaflow", version, about = "Liver-disease prediction pipeline")]
struct Cli {
    /// Log progress (equivalent to RUST_LOG=info).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a simulated cohort to CSV.
    Simulate {
        /// JSON synthetic-cohort spec; omitted keys take their defaults.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report schema, missing values and class counts of an ILPD CSV.
    Inspect {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn run(config: PathBuf, seed: Option<u64>, mode: Option<Mode>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = PipelineConfig::load(&config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    match pipeline::run(&cfg) {
        Ok(report) => {
            for row in &report.metrics {
                println!(
                    "{:<4} {:<6} accuracy {:.4}  auc {:.4}  brier {:.4}",
                    row.model, row.protocol, row.accuracy, row.auc, row.brier
                );
            }
            println!("wrote {} files to {}", report.manifest.len(), cfg.output_dir.display());
            Ok(())
        }
        Err(e) => {
            if let Ok(echo) = serde_json::to_string_pretty(&cfg) {
                eprintln!("config:\n{echo}");
            }
            Err(e)
        }
    }
}

fn simulate(spec: PathBuf, out: PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(&spec).map_err(|e| Error::io(&spec, e))?;
    let spec: SyntheticSpec =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid synthetic spec: {e}")))?;
    let d = generate_synthetic(&spec, &mut SeededRng::new(spec.seed))?;
    d.write_csv(&out)?;
    let (zeros, ones) = class_counts(&d);
    println!("wrote {} rows x {} features ({zeros}/{ones}) to {}", d.n_rows(), d.n_features(), out.display());
    Ok(())
}

fn inspect(data: PathBuf, json: bool) -> Result<()> {
    let (d, report) = load_ilpd(&data)?;
    if json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Input(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    println!("rows: {}", report.rows);
    println!("header: {}", if report.had_header { "yes" } else { "no" });
    println!("features: {}", d.feature_names.join(", "));
    println!("missing:");
    for (name, count) in &report.missing_per_column {
        if *count > 0 {
            println!("  {name}: {count}");
        }
    }
    println!("  total: {}", report.total_missing());
    println!("classes: disease {} / no disease {}", report.present, report.absent);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Run { config, seed, mode, out } => run(config, seed, mode, out),
        Command::Simulate { spec, out } => simulate(spec, out),
        Command::Inspect { data, json } => inspect(data, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
