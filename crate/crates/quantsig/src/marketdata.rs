//! Daily OHLCV acquisition: CSV parsing, endpoint fetching with a local
//! file cache, and report-only series validation.
//!
//! The wire format is the common historical-export shape: a header row with
//! `Date,Open,High,Low,Close,Adj Close,Volume` (`Adj Close` optional,
//! defaulting to `Close`) followed by one row per trading day. Rows with
//! empty cells are skipped and counted rather than repaired; structural
//! problems (unparseable numbers, duplicate dates) are hard errors.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use chrono::NaiveDate;
use thiserror::Error;

/// Environment variable that overrides [`EndpointConfig::base_url`].
pub const DATA_URL_ENV: &str = "QUANTSIG_DATA_URL";

/// Calendar gaps longer than this many days are flagged by [`validate_series`].
pub const DEFAULT_MAX_GAP_DAYS: i64 = 7;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed number in data row {row}, column {column}: {value:?}")]
    MalformedNumber { row: usize, column: String, value: String },
    #[error("malformed date in data row {row}: {value:?}")]
    MalformedDate { row: usize, value: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("no usable data rows")]
    EmptySeries,
    #[error("start date {start} is not before end date {end}")]
    BadDateRange { start: NaiveDate, end: NaiveDate },
    #[error("symbol {0:?} not found at endpoint")]
    SymbolNotFound(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("cache i/o error at {path}: {source}")]
    CacheIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// One daily bar. Prices are in the quote currency; `volume` is a share count.
///
/// Value-level invariants (`low <= min(open, close)`, `high >= max(open, close)`,
/// strictly positive prices) are checked by [`validate_series`] rather than
/// enforced at construction, so a glitchy vendor row can be loaded and
/// reported instead of silently dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcvBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

/// Ordered daily history for one symbol. Dates are strictly increasing and
/// the series is non-empty after a successful load.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcvSeries {
    pub symbol: String,
    pub bars: Vec<OhlcvBar>,
}

impl OhlcvSeries {
    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.volume as f64).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    /// Serialize back to the historical-export CSV shape. Floats print in
    /// shortest-round-trip form, so `parse_ohlcv_csv` recovers the series
    /// exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
        for bar in &self.bars {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                bar.date, bar.open, bar.high, bar.low, bar.close, bar.adj_close, bar.volume
            ));
        }
        out
    }
}

/// Where and how to fetch history.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    /// URL template with `{symbol}`, `{start}`, and `{end}` placeholders.
    pub base_url: String,
    pub timeout: Duration,
    pub cache_dir: PathBuf,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, timeout: Duration, cache_dir: impl Into<PathBuf>) -> Self {
        Self { base_url: base_url.into(), timeout, cache_dir: cache_dir.into() }
    }

    fn url_for(&self, symbol: &str, start: NaiveDate, end: NaiveDate) -> String {
        let base = std::env::var(DATA_URL_ENV).unwrap_or_else(|_| self.base_url.clone());
        base.replace("{symbol}", symbol)
            .replace("{start}", &start.to_string())
            .replace("{end}", &end.to_string())
    }

    fn cache_path(&self, symbol: &str, start: NaiveDate, end: NaiveDate) -> PathBuf {
        self.cache_dir.join(format!("{symbol}_{start}_{end}.csv"))
    }
}

/// Outcome of a CSV parse: the series plus how many rows were skipped for
/// having empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSeries {
    pub series: OhlcvSeries,
    pub skipped_rows: usize,
}

const REQUIRED_COLUMNS: [&str; 6] = ["Date", "Open", "High", "Low", "Close", "Volume"];

/// Parse a historical-export CSV document into an ordered series.
///
/// Rows arrive in any order and are sorted ascending by date. Rows with one
/// or more empty cells are skipped and counted. A cell that is present but
/// not a number, a duplicate date, or an empty result set are errors.
pub fn parse_ohlcv_csv(symbol: &str, text: &str) -> Result<ParsedSeries, MarketDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| MarketDataError::MalformedHeader(e.to_string()))?
        .clone();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        index.insert(name.to_string(), i);
    }
    for required in REQUIRED_COLUMNS {
        if !index.contains_key(required) {
            return Err(MarketDataError::MalformedHeader(format!("missing column {required:?}")));
        }
    }
    let adj_close_idx = index.get("Adj Close").copied();

    let col = |name: &str| index[name];
    let mut bars: Vec<OhlcvBar> = Vec::new();
    let mut skipped = 0usize;

    for (row_number, record) in reader.records().enumerate() {
        let record = record?;
        // Data rows are numbered from 1 in error messages.
        let row = row_number + 1;

        let get = |i: usize| record.get(i).unwrap_or("");
        let mut cells = vec![
            get(col("Date")),
            get(col("Open")),
            get(col("High")),
            get(col("Low")),
            get(col("Close")),
            get(col("Volume")),
        ];
        if let Some(i) = adj_close_idx {
            cells.push(get(i));
        }
        if cells.iter().any(|c| c.is_empty()) {
            skipped += 1;
            continue;
        }

        let date_str = cells[0];
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d")
            .map_err(|_| MarketDataError::MalformedDate { row, value: date_str.to_string() })?;

        let number = |column: &str, value: &str| -> Result<f64, MarketDataError> {
            value.parse::<f64>().map_err(|_| MarketDataError::MalformedNumber {
                row,
                column: column.to_string(),
                value: value.to_string(),
            })
        };
        let open = number("Open", cells[1])?;
        let high = number("High", cells[2])?;
        let low = number("Low", cells[3])?;
        let close = number("Close", cells[4])?;
        let volume = cells[5].parse::<u64>().map_err(|_| MarketDataError::MalformedNumber {
            row,
            column: "Volume".to_string(),
            value: cells[5].to_string(),
        })?;
        let adj_close = match adj_close_idx {
            Some(_) => number("Adj Close", cells[6])?,
            None => close,
        };

        bars.push(OhlcvBar { date, open, high, low, close, adj_close, volume });
    }

    if bars.is_empty() {
        return Err(MarketDataError::EmptySeries);
    }
    bars.sort_by_key(|b| b.date);
    for pair in bars.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(MarketDataError::DuplicateDate(pair[0].date));
        }
    }

    Ok(ParsedSeries {
        series: OhlcvSeries { symbol: symbol.to_string(), bars },
        skipped_rows: skipped,
    })
}

/// A reported problem found by [`validate_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Index of the offending bar (for gaps, the later bar of the pair).
    pub index: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// `low > min(open, close)`.
    LowAboveBody,
    /// `high < max(open, close)`.
    HighBelowBody,
    /// A price field is zero or negative.
    NonPositivePrice { field: &'static str, value: f64 },
    /// More than `max_gap_days` calendar days since the previous bar.
    CalendarGap { gap_days: i64 },
}

/// Report every bar-invariant violation and every calendar gap longer than
/// `max_gap_days`. Never fails; a clean series yields an empty list.
pub fn validate_series(series: &OhlcvSeries, max_gap_days: i64) -> Vec<Violation> {
    let mut violations = Vec::new();
    for (i, bar) in series.bars.iter().enumerate() {
        for (field, value) in [
            ("open", bar.open),
            ("high", bar.high),
            ("low", bar.low),
            ("close", bar.close),
            ("adj_close", bar.adj_close),
        ] {
            if value <= 0.0 {
                violations
                    .push(Violation { index: i, kind: ViolationKind::NonPositivePrice { field, value } });
            }
        }
        if bar.low > bar.open.min(bar.close) {
            violations.push(Violation { index: i, kind: ViolationKind::LowAboveBody });
        }
        if bar.high < bar.open.max(bar.close) {
            violations.push(Violation { index: i, kind: ViolationKind::HighBelowBody });
        }
    }
    for (i, pair) in series.bars.windows(2).enumerate() {
        let gap_days = (pair[1].date - pair[0].date).num_days();
        if gap_days > max_gap_days {
            violations.push(Violation { index: i + 1, kind: ViolationKind::CalendarGap { gap_days } });
        }
    }
    violations
}

/// What `fetch_history` did to satisfy a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchSource {
    CacheHit,
    Downloaded,
}

#[derive(Debug, Clone)]
pub struct FetchResult {
    pub parsed: ParsedSeries,
    pub source: FetchSource,
    pub cache_path: PathBuf,
}

// One lock per cache file so concurrent fetches of distinct symbols proceed
// while two fetches of the same range serialize.
fn cache_file_lock(path: &Path) -> std::sync::Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, std::sync::Arc<Mutex<()>>>>> = OnceLock::new();
    let locks = LOCKS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = locks.lock().expect("cache lock table poisoned");
    map.entry(path.to_path_buf()).or_default().clone()
}

/// Fetch daily history for `symbol`, consulting the cache first.
///
/// On a cache hit the cached bytes are parsed and no network request is
/// issued. On a miss the configured endpoint is queried, the body parsed,
/// and the exact response bytes written to the cache. `refresh` forces a
/// download even when a cache file exists.
pub fn fetch_history(
    symbol: &str,
    start: NaiveDate,
    end: NaiveDate,
    cfg: &EndpointConfig,
    refresh: bool,
) -> Result<FetchResult, MarketDataError> {
    if start >= end {
        return Err(MarketDataError::BadDateRange { start, end });
    }

    let cache_path = cfg.cache_path(symbol, start, end);
    let lock = cache_file_lock(&cache_path);
    let _guard = lock.lock().expect("cache file lock poisoned");

    if !refresh && cache_path.is_file() {
        let text = fs::read_to_string(&cache_path)
            .map_err(|source| MarketDataError::CacheIo { path: cache_path.clone(), source })?;
        let parsed = parse_ohlcv_csv(symbol, &text)?;
        return Ok(FetchResult { parsed, source: FetchSource::CacheHit, cache_path });
    }

    let url = cfg.url_for(symbol, start, end);
    let client = reqwest::blocking::Client::builder()
        .timeout(cfg.timeout)
        .build()
        .map_err(|e| MarketDataError::Network(e.to_string()))?;
    let response = client.get(&url).send().map_err(|e| MarketDataError::Network(e.to_string()))?;
    if response.status() == reqwest::StatusCode::NOT_FOUND {
        return Err(MarketDataError::SymbolNotFound(symbol.to_string()));
    }
    if !response.status().is_success() {
        return Err(MarketDataError::Network(format!("endpoint returned {}", response.status())));
    }
    let body = response.text().map_err(|e| MarketDataError::Network(e.to_string()))?;

    let parsed = parse_ohlcv_csv(symbol, &body)?;

    fs::create_dir_all(&cfg.cache_dir)
        .map_err(|source| MarketDataError::CacheIo { path: cfg.cache_dir.clone(), source })?;
    fs::write(&cache_path, body.as_bytes())
        .map_err(|source| MarketDataError::CacheIo { path: cache_path.clone(), source })?;

    Ok(FetchResult { parsed, source: FetchSource::Downloaded, cache_path })
}
