//! Run manifests: a flat `key = value` file, overridden by command-line flags.
//!
//! ```text
//! # monthly FF25, default window
//! data = ff25.csv
//! format = ff-returns
//! tau = 120
//! c = 3
//! seed = 42
//! arms = BH, SA, EW, VW, MV
//! out = runs/ff25
//! ```
//!
//! Relative paths in a manifest file are resolved against the file's directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pbts_core::{ArmId, BacktestConfig, Periodicity};

use crate::error::{CliError, Result};

/// Number of sweep seeds derived from the base seed when no list is given.
pub const DEFAULT_SWEEP_RUNS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Wide CSV of percent returns, Fama-French style.
    FfReturns,
    /// Wide or long CSV of prices.
    Prices,
}

impl DataFormat {
    pub fn default_periodicity(self) -> Periodicity {
        match self {
            DataFormat::FfReturns => Periodicity::Monthly,
            DataFormat::Prices => Periodicity::Daily,
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::FfReturns => "ff-returns",
            DataFormat::Prices => "prices",
        })
    }
}

impl FromStr for DataFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ff-returns" | "ff" | "returns" => Ok(DataFormat::FfReturns),
            "prices" | "price" => Ok(DataFormat::Prices),
            other => Err(format!("unknown data format {other:?} (expected ff-returns or prices)")),
        }
    }
}

/// Every setting a manifest or the command line can provide. `None` means
/// "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub data: Option<PathBuf>,
    pub format: Option<DataFormat>,
    pub periodicity: Option<Periodicity>,
    pub tau: Option<usize>,
    pub c: Option<usize>,
    pub sr_lookback: Option<usize>,
    pub seed: Option<u64>,
    pub ridge_scale: Option<f64>,
    pub mv_return_scale: Option<f64>,
    pub arms: Option<Vec<ArmId>>,
    pub out: Option<PathBuf>,
    pub c_list: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub runs: Option<usize>,
}

impl Settings {
    /// Parses manifest text. `base` anchors relative paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut settings = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Manifest {
                    line: idx + 1,
                    message: format!("expected `key = value`, found {line:?}"),
                });
            };
            settings
                .set(key.trim(), value.trim(), base)
                .map_err(|message| CliError::Manifest {
                    line: idx + 1,
                    message,
                })?;
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> std::result::Result<(), String> {
        let key = key.to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "data" => self.data = Some(base.join(value)),
            "out" => self.out = Some(base.join(value)),
            "format" => self.format = Some(value.parse()?),
            "periodicity" => self.periodicity = Some(parse_value(&key, value)?),
            "tau" => self.tau = Some(parse_value(&key, value)?),
            "c" => self.c = Some(parse_value(&key, value)?),
            "sr_lookback" => self.sr_lookback = Some(parse_value(&key, value)?),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "ridge_scale" => self.ridge_scale = Some(parse_value(&key, value)?),
            "mv_return_scale" => self.mv_return_scale = Some(parse_value(&key, value)?),
            "runs" => self.runs = Some(parse_value(&key, value)?),
            "arms" => self.arms = Some(parse_list(&key, value)?),
            "c_list" => self.c_list = Some(parse_list(&key, value)?),
            "seeds" => self.seeds = Some(parse_list(&key, value)?),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Fills every unset field of `self` from `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            data: self.data.or(fallback.data),
            format: self.format.or(fallback.format),
            periodicity: self.periodicity.or(fallback.periodicity),
            tau: self.tau.or(fallback.tau),
            c: self.c.or(fallback.c),
            sr_lookback: self.sr_lookback.or(fallback.sr_lookback),
            seed: self.seed.or(fallback.seed),
            ridge_scale: self.ridge_scale.or(fallback.ridge_scale),
            mv_return_scale: self.mv_return_scale.or(fallback.mv_return_scale),
            arms: self.arms.or(fallback.arms),
            out: self.out.or(fallback.out),
            c_list: self.c_list.or(fallback.c_list),
            seeds: self.seeds.or(fallback.seeds),
            runs: self.runs.or(fallback.runs),
        }
    }
}

/// Comma-separated list parser shared with the command line.
pub fn parse_list<T: FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| parse_value(key, item))
        .collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err(format!("{key} list is empty"));
    }
    Ok(items)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

/// A fully resolved run: where the data is, how to run, where to write.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub data: PathBuf,
    pub format: DataFormat,
    pub periodicity: Periodicity,
    pub config: BacktestConfig,
    pub out: PathBuf,
    pub c_list: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
    pub runs: usize,
}

impl RunManifest {
    /// Applies defaults and checks everything that can be checked before
    /// loading data: the data file exists and the config is valid.
    pub fn resolve(settings: Settings) -> Result<Self> {
        let data = settings.data.ok_or(CliError::MissingSetting("data"))?;
        if !data.is_file() {
            return Err(CliError::MissingFile(data));
        }
        let format = settings.format.unwrap_or(DataFormat::FfReturns);
        let defaults = BacktestConfig::default();
        let config = BacktestConfig {
            tau: settings.tau.unwrap_or(defaults.tau),
            c: settings.c.unwrap_or(defaults.c),
            sr_lookback: settings.sr_lookback.unwrap_or(defaults.sr_lookback),
            seed: settings.seed.unwrap_or(defaults.seed),
            ridge_scale: settings.ridge_scale.unwrap_or(defaults.ridge_scale),
            mv_return_scale: settings.mv_return_scale.unwrap_or(defaults.mv_return_scale),
            arms: settings.arms.unwrap_or(defaults.arms),
        };
        config.validate()?;
        let runs = settings.runs.unwrap_or(DEFAULT_SWEEP_RUNS);
        if runs == 0 {
            return Err(CliError::Invalid("runs must be positive".into()));
        }
        Ok(Self {
            data,
            format,
            periodicity: settings.periodicity.unwrap_or(format.default_periodicity()),
            config,
            out: settings.out.unwrap_or_else(|| PathBuf::from("pbts-out")),
            c_list: settings.c_list,
            seeds: settings.seeds,
            runs,
        })
    }

    /// Sweep seeds: the explicit list, else `seed, seed + 1, ...` for `runs` runs.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| {
            (0..self.runs as u64)
                .map(|i| self.config.seed.wrapping_add(i))
                .collect()
        })
    }

    /// Sweep `c` values: the explicit list, else every `c` the roster allows.
    pub fn sweep_c_values(&self) -> Vec<usize> {
        self.c_list
            .clone()
            .unwrap_or_else(|| (1..=self.config.arms.len()).collect())
    }
}
