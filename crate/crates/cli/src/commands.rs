//! The `run`, `sweep` and `validate` commands and the files they write.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! value reads back bit for bit.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use pbts_core::engine::SweepTable;
use pbts_core::market_data::{
    load_ff_returns_csv, prices_to_returns, read_ff_returns_csv, read_price_csv, RawPanel,
};
use pbts_core::{run_backtest, run_c_sweep, BacktestResult, Periodicity, PricePanel, ReturnPanel};

use crate::error::{CliError, Result};
use crate::manifest::{DataFormat, RunManifest};

pub const RESULT_JSON: &str = "result.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const CW_CURVE_CSV: &str = "cw_curve.csv";
pub const SELECTIONS_CSV: &str = "selections.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_SUMMARY_CSV: &str = "sweep_summary.csv";

/// Loads `path` as gross returns. Price files are converted to returns, so
/// the panel has one period fewer than the file has dates.
pub fn load_panel(path: &Path, format: DataFormat, periodicity: Periodicity) -> Result<ReturnPanel> {
    match format {
        DataFormat::FfReturns => Ok(load_ff_returns_csv(path, periodicity)?),
        DataFormat::Prices => {
            let prices = pbts_core::market_data::load_price_panel_csv(path)?;
            Ok(prices_to_returns(&prices, periodicity)?)
        }
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub result: BacktestResult,
    pub files: Vec<PathBuf>,
}

/// Runs one backtest and writes `result.json`, `metrics.csv`, `cw_curve.csv`
/// and `selections.csv` into the output directory.
pub fn cmd_run(manifest: &RunManifest) -> Result<RunOutput> {
    let panel = load_panel(&manifest.data, manifest.format, manifest.periodicity)?;
    let result = run_backtest(&panel, &manifest.config)?;
    create_dir(&manifest.out)?;

    let mut json = serde_json::to_string_pretty(&result)?;
    json.push('\n');
    let files = vec![
        write_file(&manifest.out, RESULT_JSON, json.into_bytes())?,
        write_file(&manifest.out, METRICS_CSV, metrics_csv(&result)?)?,
        write_file(&manifest.out, CW_CURVE_CSV, cw_curve_csv(&result)?)?,
        write_file(&manifest.out, SELECTIONS_CSV, selections_csv(&result)?)?,
    ];
    Ok(RunOutput { result, files })
}

#[derive(Debug)]
pub struct SweepOutput {
    pub table: SweepTable,
    pub files: Vec<PathBuf>,
}

/// Runs every `(c, seed)` pair and writes `sweep.csv` and `sweep_summary.csv`.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<SweepOutput> {
    let panel = load_panel(&manifest.data, manifest.format, manifest.periodicity)?;
    let table = run_c_sweep(
        &panel,
        &manifest.config,
        &manifest.sweep_c_values(),
        &manifest.sweep_seeds(),
    )?;
    create_dir(&manifest.out)?;
    let files = vec![
        write_file(&manifest.out, SWEEP_CSV, sweep_csv(&table)?)?,
        write_file(&manifest.out, SWEEP_SUMMARY_CSV, sweep_summary_csv(&table)?)?,
    ];
    Ok(SweepOutput { table, files })
}

/// What completeness filtering does to a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub format: DataFormat,
    /// Periods `m` the backtest would see (price files lose their first date).
    pub periods: usize,
    pub assets_total: usize,
    pub kept: Vec<String>,
    pub dropped: Vec<String>,
    pub first_date: String,
    pub last_date: String,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kept {} of {} assets", self.kept.len(), self.assets_total)?;
        write!(
            f,
            "m = {} periods ({} to {}), format {}",
            self.periods, self.first_date, self.last_date, self.format
        )?;
        if !self.dropped.is_empty() {
            write!(f, "\ndropped: {}", self.dropped.join(", "))?;
        }
        Ok(())
    }
}

/// Reads a data file and reports how many assets survive completeness filtering.
pub fn cmd_validate(path: &Path, format: DataFormat) -> Result<ValidationReport> {
    let raw: RawPanel = match format {
        DataFormat::FfReturns => read_ff_returns_csv(path)?,
        DataFormat::Prices => read_price_csv(path)?,
    };
    let complete = raw.filter_complete_assets();
    if complete.asset_ids.is_empty() {
        return Err(CliError::Invalid(format!(
            "no asset in {} has a complete history ({} dropped)",
            path.display(),
            complete.dropped.len()
        )));
    }
    let dates = complete.dates.len();
    let periods = match format {
        DataFormat::FfReturns => dates,
        DataFormat::Prices => {
            // Build the dense panel so price checks run exactly as they would for `run`.
            PricePanel::new(complete.dates.clone(), complete.asset_ids.clone(), complete.values)?;
            dates - 1
        }
    };
    Ok(ValidationReport {
        format,
        periods,
        assets_total: raw.asset_ids.len(),
        kept: complete.asset_ids,
        dropped: complete.dropped,
        first_date: complete.dates.first().cloned().unwrap_or_default(),
        last_date: complete.dates.last().cloned().unwrap_or_default(),
    })
}

fn num(v: f64) -> String {
    v.to_string()
}

fn csv_bytes<F>(header: &[String], fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    fill(&mut writer)?;
    writer
        .into_inner()
        .map_err(|e| CliError::Invalid(format!("flushing CSV buffer: {e}")))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// One row: `sr,sr_x100,cw,mdd_abs,mdd_rel,vo`.
pub fn metrics_csv(result: &BacktestResult) -> Result<Vec<u8>> {
    let r = &result.report;
    csv_bytes(&header(&["sr", "sr_x100", "cw", "mdd_abs", "mdd_rel", "vo"]), |w| {
        w.write_record([
            num(r.sharpe),
            num(r.sharpe_x100),
            num(r.cumulative_wealth),
            num(r.max_drawdown_abs),
            num(r.max_drawdown_rel),
            num(r.volatility_annualized),
        ])?;
        Ok(())
    })
}

/// `period,cw` with the traded date labels; loads back as a one-asset price file.
pub fn cw_curve_csv(result: &BacktestResult) -> Result<Vec<u8>> {
    csv_bytes(&header(&["period", "cw"]), |w| {
        for (date, cw) in result.traded_dates.iter().zip(&result.cw_curve) {
            w.write_record([date.clone(), num(*cw)])?;
        }
        Ok(())
    })
}

/// `period,date,arm,theta_<ARM>...,outcome,success_count`; the first period
/// has no reward and reads `skipped` with an empty count.
pub fn selections_csv(result: &BacktestResult) -> Result<Vec<u8>> {
    let mut names = header(&["period", "date", "arm"]);
    names.extend(result.config.arms.iter().map(|a| format!("theta_{}", a.tag())));
    names.extend(header(&["outcome", "success_count"]));
    csv_bytes(&names, |w| {
        for s in &result.selections {
            let mut row = vec![s.period.to_string(), s.date.clone(), s.chosen.tag().to_string()];
            row.extend(s.sampled_thetas.iter().map(|t| num(*t)));
            row.push(s.outcome.map_or("skipped", |o| o.as_str()).to_string());
            row.push(s.success_count.map(|c| c.to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// `c,seed,sr,cw,mdd_rel,vo`, one row per run.
pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>> {
    csv_bytes(&header(&["c", "seed", "sr", "cw", "mdd_rel", "vo"]), |w| {
        for r in &table.rows {
            w.write_record([
                r.c.to_string(),
                r.seed.to_string(),
                num(r.sharpe),
                num(r.cumulative_wealth),
                num(r.max_drawdown_rel),
                num(r.volatility),
            ])?;
        }
        Ok(())
    })
}

/// Per-`c` mean and sample standard deviation of every sweep metric.
pub fn sweep_summary_csv(table: &SweepTable) -> Result<Vec<u8>> {
    let names = header(&[
        "c", "runs", "sr_mean", "sr_std", "cw_mean", "cw_std", "mdd_rel_mean", "mdd_rel_std",
        "vo_mean", "vo_std",
    ]);
    csv_bytes(&names, |w| {
        for s in &table.summary {
            w.write_record([
                s.c.to_string(),
                s.runs.to_string(),
                num(s.sharpe.mean),
                num(s.sharpe.std),
                num(s.cumulative_wealth.mean),
                num(s.cumulative_wealth.std),
                num(s.max_drawdown_rel.mean),
                num(s.max_drawdown_rel.std),
                num(s.volatility.mean),
                num(s.volatility.std),
            ])?;
        }
        Ok(())
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a truncated file under the final name.
fn write_file(dir: &Path, name: &str, bytes: Vec<u8>) -> Result<PathBuf> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let io = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, &path).map_err(io)?;
    Ok(path)
}
