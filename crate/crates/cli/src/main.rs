use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pbts_cli::manifest::parse_list;
use pbts_cli::{cmd_run, cmd_sweep, cmd_validate, DataFormat, RunManifest, Settings};
use pbts_core::{ArmId, Periodicity};

/// Portfolio bandit via Thompson sampling: backtests, c sweeps, data checks.
#[derive(Parser)]
#[command(name = "pbts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one backtest and write result.json, metrics.csv, cw_curve.csv, selections.csv.
    Run(RunArgs),
    /// Run every (c, seed) pair and write sweep.csv and sweep_summary.csv.
    Sweep(RunArgs),
    /// Report how many assets survive completeness filtering.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Key-value manifest; flags override its entries.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Data file (percent returns or prices).
    #[arg(long)]
    data: Option<PathBuf>,
    /// ff-returns or prices.
    #[arg(long)]
    format: Option<DataFormat>,
    /// monthly (H = 12) or daily (H = 365).
    #[arg(long)]
    periodicity: Option<Periodicity>,
    /// Sliding window length and warm-up, in periods [default: 120].
    #[arg(long)]
    tau: Option<usize>,
    /// Success threshold of the top-c reward [default: 3].
    #[arg(long)]
    c: Option<usize>,
    /// Trailing periods in each arm's reward Sharpe ratio [default: 36].
    #[arg(long)]
    sr_lookback: Option<usize>,
    /// Random seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Covariance ridge as a multiple of the average variance [default: 1e-6].
    #[arg(long)]
    ridge_scale: Option<f64>,
    /// Return unit of the mean-variance objective, 100 = percent [default: 100].
    #[arg(long)]
    mv_return_scale: Option<f64>,
    /// Comma-separated arm roster, e.g. BH,SA,EW,VW,MV.
    #[arg(long, value_parser = |s: &str| parse_list::<ArmId>("arms", s))]
    arms: Option<::std::vec::Vec<ArmId>>,
    /// Output directory [default: pbts-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep: comma-separated c values [default: 1..=number of arms].
    #[arg(long, value_parser = |s: &str| parse_list::<usize>("c-list", s))]
    c_list: Option<::std::vec::Vec<usize>>,
    /// Sweep: comma-separated seeds [default: seed, seed+1, ... for --runs runs].
    #[arg(long, value_parser = |s: &str| parse_list::<u64>("seeds", s))]
    seeds: Option<::std::vec::Vec<u64>>,
    /// Sweep: number of derived seeds when --seeds is absent [default: 20].
    #[arg(long)]
    runs: Option<usize>,
}

impl RunArgs {
    fn manifest(self) -> anyhow::Result<RunManifest> {
        let file = match &self.manifest {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags = Settings {
            data: self.data,
            format: self.format,
            periodicity: self.periodicity,
            tau: self.tau,
            c: self.c,
            sr_lookback: self.sr_lookback,
            seed: self.seed,
            ridge_scale: self.ridge_scale,
            mv_return_scale: self.mv_return_scale,
            arms: self.arms,
            out: self.out,
            c_list: self.c_list,
            seeds: self.seeds,
            runs: self.runs,
        };
        Ok(RunManifest::resolve(flags.or(file))?)
    }
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "ff-returns")]
    format: DataFormat,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let manifest = args.manifest()?;
            let output = cmd_run(&manifest)
                .with_context(|| format!("backtest on {}", manifest.data.display()))?;
            let r = &output.result.report;
            println!(
                "traded {} periods: SR {:.4} (x100 {:.2}), CW {:.4}, MDD {:.2}%, VO {:.2}%",
                r.periods,
                r.sharpe,
                r.sharpe_x100,
                r.cumulative_wealth,
                100.0 * r.max_drawdown_rel,
                100.0 * r.volatility_annualized
            );
            for file in &output.files {
                println!("wrote {}", file.display());
            }
        }
        Command::Sweep(args) => {
            let manifest = args.manifest()?;
            let output = cmd_sweep(&manifest)
                .with_context(|| format!("sweep on {}", manifest.data.display()))?;
            for s in &output.table.summary {
                println!(
                    "c = {}: {} runs, SR {:.4}, CW {:.4}, MDD {:.2}%, VO {:.2}%",
                    s.c,
                    s.runs,
                    s.sharpe.mean,
                    s.cumulative_wealth.mean,
                    100.0 * s.max_drawdown_rel.mean,
                    100.0 * s.volatility.mean
                );
            }
            for file in &output.files {
                println!("wrote {}", file.display());
            }
        }
        Command::Validate(args) => {
            let report = cmd_validate(&args.data, args.format)
                .with_context(|| format!("validating {}", args.data.display()))?;
            println!("{report}");
        }
    }
    Ok(())
}
