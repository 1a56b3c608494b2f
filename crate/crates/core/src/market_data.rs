//! Loading, cleaning and windowing of price and return panels.
//!
//! Two wide CSV layouts are understood: percent returns in the Fama-French
//! style (`date,<asset_1>,...,<asset_n>`, values in percent) and prices, either
//! wide or long (`date,asset,price`). Every internal return is a gross return
//! `P_k / P_{k-1}`; net values only show up in [`crate::metrics`].
//!
//! Date labels are opaque strings. Rows are ordered numerically when every
//! label parses as an integer (e.g. `196307`) and lexicographically otherwise,
//! which is correct for ISO dates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Percent values at or below this are the Fama-French missing-data sentinel.
pub const MISSING_SENTINEL_PERCENT: f64 = -99.0;

/// Sampling frequency of a panel. Determines the annualization count `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Monthly,
    Daily,
}

impl Periodicity {
    /// Number of rebalancing periods per year: 12 for monthly, 365 for daily.
    pub fn periods_per_year(self) -> u32 {
        match self {
            Periodicity::Monthly => 12,
            Periodicity::Daily => 365,
        }
    }
}

impl fmt::Display for Periodicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Periodicity::Monthly => "monthly",
            Periodicity::Daily => "daily",
        })
    }
}

impl FromStr for Periodicity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "monthly" => Ok(Periodicity::Monthly),
            "daily" => Ok(Periodicity::Daily),
            other => Err(Error::InvalidConfig(format!(
                "unknown periodicity {other:?} (expected monthly or daily)"
            ))),
        }
    }
}

/// Dense panel of strictly positive prices, one row per date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePanel {
    dates: Vec<String>,
    asset_ids: Vec<String>,
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(dates: Vec<String>, asset_ids: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&dates, &asset_ids, &prices)?;
        check_increasing(&dates)?;
        for (date, row) in dates.iter().zip(&prices) {
            for (asset, &value) in asset_ids.iter().zip(row) {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::NonPositivePrice {
                        asset: asset.clone(),
                        date: date.clone(),
                        value,
                    });
                }
            }
        }
        Ok(Self {
            dates,
            asset_ids,
            prices,
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    /// `(rows, assets)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.dates.len(), self.asset_ids.len())
    }
}

/// Validated panel of gross returns `R_{k,i}`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPanel {
    dates: Vec<String>,
    asset_ids: Vec<String>,
    returns: Vec<Vec<f64>>,
    periodicity: Periodicity,
}

impl ReturnPanel {
    pub fn new(
        dates: Vec<String>,
        asset_ids: Vec<String>,
        returns: Vec<Vec<f64>>,
        periodicity: Periodicity,
    ) -> Result<Self> {
        if dates.is_empty() {
            return Err(Error::Empty("return panel has no periods"));
        }
        if asset_ids.is_empty() {
            return Err(Error::Empty("return panel has no assets"));
        }
        check_shape(&dates, &asset_ids, &returns)?;
        check_increasing(&dates)?;
        for (date, row) in dates.iter().zip(&returns) {
            for (asset, &value) in asset_ids.iter().zip(row) {
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::InvalidReturn {
                        asset: asset.clone(),
                        date: date.clone(),
                        value,
                    });
                }
            }
        }
        Ok(Self {
            dates,
            asset_ids,
            returns,
            periodicity,
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    /// Gross returns of every asset for 0-based row `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.returns[k]
    }

    pub fn periodicity(&self) -> Periodicity {
        self.periodicity
    }

    /// Number of periods `m`.
    pub fn periods(&self) -> usize {
        self.dates.len()
    }

    /// Number of assets `n`.
    pub fn assets(&self) -> usize {
        self.asset_ids.len()
    }
}

/// A parsed panel in which individual cells may be missing.
///
/// Produced by the raw readers so callers can report what completeness
/// filtering removes before committing to a dense panel.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    pub dates: Vec<String>,
    pub asset_ids: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

/// Output of [`RawPanel::filter_complete_assets`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompletePanel {
    pub dates: Vec<String>,
    pub asset_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub dropped: Vec<String>,
}

impl RawPanel {
    /// Drops every asset that has a missing cell on any date.
    pub fn filter_complete_assets(&self) -> CompletePanel {
        let keep: Vec<usize> = (0..self.asset_ids.len())
            .filter(|&i| self.cells.iter().all(|row| row[i].is_some()))
            .collect();
        let dropped = (0..self.asset_ids.len())
            .filter(|i| !keep.contains(i))
            .map(|i| self.asset_ids[i].clone())
            .collect();
        let values = self
            .cells
            .iter()
            .map(|row| keep.iter().map(|&i| row[i].unwrap_or_default()).collect())
            .collect();
        CompletePanel {
            dates: self.dates.clone(),
            asset_ids: keep.iter().map(|&i| self.asset_ids[i].clone()).collect(),
            values,
            dropped,
        }
    }
}

/// Reads a percent-return CSV, converting each value `v` to the gross return
/// `1 + v / 100` and flagging sentinel values (`v <= -99`) and empty cells as
/// missing.
pub fn read_ff_returns_csv(path: impl AsRef<Path>) -> Result<RawPanel> {
    read_wide_csv(path.as_ref(), |row, column, text| {
        let Some(v) = parse_cell(row, column, text)? else {
            return Ok(None);
        };
        if v <= MISSING_SENTINEL_PERCENT {
            Ok(None)
        } else {
            Ok(Some(1.0 + v / 100.0))
        }
    })
}

/// Loads a percent-return CSV into a dense [`ReturnPanel`], dropping assets
/// with any missing value.
pub fn load_ff_returns_csv(path: impl AsRef<Path>, periodicity: Periodicity) -> Result<ReturnPanel> {
    let complete = read_ff_returns_csv(path)?.filter_complete_assets();
    ReturnPanel::new(complete.dates, complete.asset_ids, complete.values, periodicity)
}

/// Reads a wide or long price CSV without dropping incomplete assets.
///
/// The long layout is recognised by a header of exactly `date,asset,price`
/// (case-insensitive). Any other header is read as `date,<asset_1>,...`.
pub fn read_price_csv(path: impl AsRef<Path>) -> Result<RawPanel> {
    let path = path.as_ref();
    let mut reader = csv_reader(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let is_long = headers.len() == 3
        && headers
            .iter()
            .zip(["date", "asset", "price"])
            .all(|(h, want)| h.eq_ignore_ascii_case(want));
    if is_long {
        read_long_prices(reader)
    } else {
        drop(reader);
        read_wide_csv(path, |row, column, text| {
            Ok(parse_cell(row, column, text)?)
        })
        .and_then(check_raw_prices)
    }
}

/// Loads a price CSV into a dense [`PricePanel`]; assets missing any date are dropped.
pub fn load_price_panel_csv(path: impl AsRef<Path>) -> Result<PricePanel> {
    let complete = read_price_csv(path)?.filter_complete_assets();
    if complete.asset_ids.is_empty() {
        return Err(Error::Empty("no asset has a complete price history"));
    }
    PricePanel::new(complete.dates, complete.asset_ids, complete.values)
}

/// Converts prices to gross returns `P_{k,i} / P_{k-1,i}`. The result has one
/// row fewer than the input and is labelled with the later date of each pair.
pub fn prices_to_returns(panel: &PricePanel, periodicity: Periodicity) -> Result<ReturnPanel> {
    let (rows, _) = panel.shape();
    if rows < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: rows,
        });
    }
    let returns = panel
        .prices
        .windows(2)
        .map(|pair| pair[1].iter().zip(&pair[0]).map(|(now, before)| now / before).collect())
        .collect();
    ReturnPanel::new(
        panel.dates[1..].to_vec(),
        panel.asset_ids.clone(),
        returns,
        periodicity,
    )
}

/// Rows `[end - len, end)` of `panel`, in their original order.
pub fn slice_window(panel: &ReturnPanel, end: usize, len: usize) -> Result<ReturnPanel> {
    let rows = panel.periods();
    if len == 0 || len > end || end > rows {
        return Err(Error::OutOfBounds { end, len, rows });
    }
    let range = end - len..end;
    Ok(ReturnPanel {
        dates: panel.dates[range.clone()].to_vec(),
        asset_ids: panel.asset_ids.clone(),
        returns: panel.returns[range].to_vec(),
        periodicity: panel.periodicity,
    })
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn parse_cell(row: usize, column: &str, text: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        Ok(v) => Err(Error::Parse {
            row,
            column: column.to_owned(),
            message: format!("non-finite value {v}"),
        }),
        Err(e) => Err(Error::Parse {
            row,
            column: column.to_owned(),
            message: format!("{text:?}: {e}"),
        }),
    }
}

fn read_wide_csv<F>(path: &Path, mut convert: F) -> Result<RawPanel>
where
    F: FnMut(usize, &str, &str) -> Result<Option<f64>>,
{
    let mut reader = csv_reader(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::Empty("missing header row"));
    }
    if headers.len() < 2 {
        return Err(Error::Empty("header names no asset columns"));
    }
    let asset_ids = headers[1..].to_vec();

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let date = record.get(0).unwrap_or_default().to_owned();
        if date.is_empty() {
            return Err(Error::Parse {
                row,
                column: headers[0].clone(),
                message: "empty date label".into(),
            });
        }
        let cells = asset_ids
            .iter()
            .enumerate()
            .map(|(i, asset)| convert(row, asset, record.get(i + 1).unwrap_or_default()))
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, cells));
    }
    if rows.is_empty() {
        return Err(Error::Empty("no data rows"));
    }
    let (dates, cells) = sort_by_date(rows)?;
    Ok(RawPanel {
        dates,
        asset_ids,
        cells,
    })
}

fn read_long_prices(mut reader: csv::Reader<std::fs::File>) -> Result<RawPanel> {
    let mut assets: Vec<String> = Vec::new();
    let mut asset_index = BTreeMap::new();
    let mut by_date: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let date = record.get(0).unwrap_or_default().to_owned();
        let asset = record.get(1).unwrap_or_default().to_owned();
        if date.is_empty() || asset.is_empty() {
            return Err(Error::Parse {
                row,
                column: if date.is_empty() { "date" } else { "asset" }.into(),
                message: "empty label".into(),
            });
        }
        let Some(price) = parse_cell(row, "price", record.get(2).unwrap_or_default())? else {
            continue;
        };
        if price <= 0.0 {
            return Err(Error::NonPositivePrice {
                asset,
                date,
                value: price,
            });
        }
        let slot = *asset_index.entry(asset.clone()).or_insert_with(|| {
            assets.push(asset.clone());
            assets.len() - 1
        });
        if by_date.entry(date.clone()).or_default().insert(slot, price).is_some() {
            return Err(Error::Parse {
                row,
                column: "price".into(),
                message: format!("duplicate entry for asset {asset} on {date}"),
            });
        }
    }
    if by_date.is_empty() {
        return Err(Error::Empty("no data rows"));
    }
    let rows = by_date
        .into_iter()
        .map(|(date, prices)| {
            let cells = (0..assets.len()).map(|i| prices.get(&i).copied()).collect();
            (date, cells)
        })
        .collect();
    let (dates, cells) = sort_by_date(rows)?;
    Ok(RawPanel {
        dates,
        asset_ids: assets,
        cells,
    })
}

fn check_raw_prices(raw: RawPanel) -> Result<RawPanel> {
    for (date, row) in raw.dates.iter().zip(&raw.cells) {
        for (asset, cell) in raw.asset_ids.iter().zip(row) {
            if let Some(value) = *cell {
                if value <= 0.0 {
                    return Err(Error::NonPositivePrice {
                        asset: asset.clone(),
                        date: date.clone(),
                        value,
                    });
                }
            }
        }
    }
    Ok(raw)
}

/// Orders date labels numerically when all of them are integers, otherwise
/// lexicographically.
pub fn compare_dates(labels: &[String]) -> impl Fn(&str, &str) -> Ordering {
    let numeric = labels.iter().all(|d| d.parse::<i64>().is_ok());
    move |a: &str, b: &str| {
        if numeric {
            a.parse::<i64>()
                .unwrap_or_default()
                .cmp(&b.parse::<i64>().unwrap_or_default())
        } else {
            a.cmp(b)
        }
    }
}

type SortedRows<T> = (Vec<String>, Vec<T>);

fn sort_by_date<T>(mut rows: Vec<(String, T)>) -> Result<SortedRows<T>> {
    let labels: Vec<String> = rows.iter().map(|(d, _)| d.clone()).collect();
    let cmp = compare_dates(&labels);
    rows.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut seen = HashSet::with_capacity(rows.len());
    for (date, _) in &rows {
        if !seen.insert(date.as_str()) {
            return Err(Error::DuplicateDate(date.clone()));
        }
    }
    Ok(rows.into_iter().unzip())
}

fn check_shape<T>(dates: &[String], asset_ids: &[String], rows: &[Vec<T>]) -> Result<()> {
    if rows.len() != dates.len() {
        return Err(Error::DimensionMismatch {
            expected: dates.len(),
            got: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != asset_ids.len()) {
        return Err(Error::DimensionMismatch {
            expected: asset_ids.len(),
            got: bad.len(),
        });
    }
    Ok(())
}

fn check_increasing(dates: &[String]) -> Result<()> {
    let cmp = compare_dates(dates);
    for pair in dates.windows(2) {
        match cmp(&pair[0], &pair[1]) {
            Ordering::Less => {}
            Ordering::Equal => return Err(Error::DuplicateDate(pair[1].clone())),
            Ordering::Greater => {
                return Err(Error::InvalidConfig(format!(
                    "dates out of order: {} before {}",
                    pair[0], pair[1]
                )))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(rows: &[&[f64]]) -> ReturnPanel {
        let dates = (0..rows.len()).map(|k| format!("{:04}", k + 1)).collect();
        let ids = (0..rows[0].len()).map(|i| format!("a{i}")).collect();
        ReturnPanel::new(dates, ids, rows.iter().map(|r| r.to_vec()).collect(), Periodicity::Monthly)
            .unwrap()
    }

    fn prices(rows: &[&[f64]]) -> PricePanel {
        let dates = (0..rows.len()).map(|k| format!("d{k}")).collect();
        let ids = (0..rows[0].len()).map(|i| format!("p{i}")).collect();
        PricePanel::new(dates, ids, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn prices_to_returns_single_step() {
        let r = prices_to_returns(&prices(&[&[100.0], &[110.0]]), Periodicity::Daily).unwrap();
        assert_eq!(r.returns(), &[vec![1.1]]);
        assert_eq!(r.dates(), &["d1".to_string()]);
    }

    #[test]
    fn prices_to_returns_constant_and_down() {
        let r = prices_to_returns(&prices(&[&[5.0], &[5.0], &[5.0]]), Periodicity::Daily).unwrap();
        assert!(r.returns().iter().all(|row| row[0] == 1.0));

        let r = prices_to_returns(&prices(&[&[100.0], &[110.0], &[99.0]]), Periodicity::Daily)
            .unwrap();
        assert!((r.row(0)[0] - 1.1).abs() < 1e-15);
        assert!((r.row(1)[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn prices_to_returns_needs_two_rows() {
        let err = prices_to_returns(&prices(&[&[100.0]]), Periodicity::Daily).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { needed: 2, got: 1 }));
    }

    #[test]
    fn slice_window_examples() {
        let p = panel(&[&[1.0], &[1.1], &[1.2], &[1.3], &[1.4]]);
        assert_eq!(slice_window(&p, 5, 5).unwrap(), p);
        let one = slice_window(&p, 3, 1).unwrap();
        assert_eq!(one.returns(), &[vec![1.2]]);
        assert_eq!(one.dates(), &["0003".to_string()]);
        assert!(matches!(slice_window(&p, 2, 3), Err(Error::OutOfBounds { .. })));
        assert!(matches!(slice_window(&p, 6, 1), Err(Error::OutOfBounds { .. })));
        assert!(matches!(slice_window(&p, 3, 0), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn return_panel_rejects_bad_values() {
        let mk = |v: f64| {
            ReturnPanel::new(vec!["1".into()], vec!["a".into()], vec![vec![v]], Periodicity::Monthly)
        };
        assert!(matches!(mk(0.0), Err(Error::InvalidReturn { .. })));
        assert!(matches!(mk(f64::NAN), Err(Error::InvalidReturn { .. })));
        assert!(mk(0.5).is_ok());
    }

    #[test]
    fn price_panel_rejects_zero() {
        let err = PricePanel::new(
            vec!["d1".into(), "d2".into()],
            vec!["A".into()],
            vec![vec![1.0], vec![0.0]],
        )
        .unwrap_err();
        match err {
            Error::NonPositivePrice { asset, date, .. } => {
                assert_eq!(asset, "A");
                assert_eq!(date, "d2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dates_must_increase() {
        let r = ReturnPanel::new(
            vec!["2".into(), "1".into()],
            vec!["a".into()],
            vec![vec![1.0], vec![1.0]],
            Periodicity::Monthly,
        );
        assert!(r.is_err());
        let r = ReturnPanel::new(
            vec!["1".into(), "1".into()],
            vec!["a".into()],
            vec![vec![1.0], vec![1.0]],
            Periodicity::Monthly,
        );
        assert!(matches!(r, Err(Error::DuplicateDate(_))));
    }

    #[test]
    fn numeric_labels_compare_numerically() {
        let labels = vec!["9".to_string(), "10".to_string()];
        let cmp = compare_dates(&labels);
        assert_eq!(cmp("9", "10"), Ordering::Less);
        let labels = vec!["b".to_string(), "a10".to_string()];
        let cmp = compare_dates(&labels);
        assert_eq!(cmp("a10", "b"), Ordering::Less);
    }

    #[test]
    fn periodicity_h() {
        assert_eq!(Periodicity::Monthly.periods_per_year(), 12);
        assert_eq!(Periodicity::Daily.periods_per_year(), 365);
        assert_eq!("Daily".parse::<Periodicity>().unwrap(), Periodicity::Daily);
        assert!("weekly".parse::<Periodicity>().is_err());
    }

    #[test]
    fn filter_drops_incomplete_assets() {
        let raw = RawPanel {
            dates: vec!["1".into(), "2".into()],
            asset_ids: vec!["A".into(), "B".into()],
            cells: vec![vec![Some(1.0), None], vec![Some(1.1), Some(1.0)]],
        };
        let c = raw.filter_complete_assets();
        assert_eq!(c.asset_ids, vec!["A".to_string()]);
        assert_eq!(c.dropped, vec!["B".to_string()]);
        assert_eq!(c.values, vec![vec![1.0], vec![1.1]]);
    }
}
