//! Technical indicators over daily closing prices, and assembly of the
//! per-day feature frame used by the price models.
//!
//! Conventions that differ from some textbook definitions, deliberately:
//!
//! * [`sma`] uses a *lagged* window — the value at day `t` averages the `N`
//!   closes strictly before `t`, so it is usable as a same-day feature
//!   without peeking at `close[t]`.
//! * [`ema`] seeds at index `span − 1` with the plain mean of the first
//!   `span` closes, then applies the usual recursion.
//! * [`rsi`] averages gains/losses with a simple mean over the trailing
//!   window (no recursive smoothing). Two output variants exist: `Standard`
//!   is the familiar `100 − 100/(1+RS)`; `Mirrored` returns `100/(1+RS)`,
//!   which mirrors `Standard` around 50.

use thiserror::Error;

use crate::preprocess::FeatureMatrix;
use crate::OhlcvSeries;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndicatorError {
    #[error("window {window} does not fit a series of length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("span {span} exceeds series length {len}")]
    SpanTooLarge { span: usize, len: usize },
    #[error("length mismatch: {left} closes vs {right} volumes")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short: indicator warm-up needs {needed} bars, have {len}")]
    InsufficientHistory { needed: usize, len: usize },
    #[error("bad indicator config: {0}")]
    BadConfig(String),
}

/// One indicator evaluated over a whole series. `values[t]` is `None` during
/// warm-up, then defined from some index onward with no interior gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl IndicatorSeries {
    /// Index of the first defined value (series length if none are defined).
    pub fn defined_from(&self) -> usize {
        self.values.iter().position(Option::is_some).unwrap_or(self.values.len())
    }
}

/// Which formula [`rsi`] applies to the gain/loss ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsiVariant {
    /// `100 − 100/(1+RS)`: high values mean recent gains dominate.
    Standard,
    /// `100/(1+RS)`: the mirror image, high values mean losses dominate.
    Mirrored,
}

/// Simple moving average with a lagged window: the value at `t` is the mean
/// of `closes[t−n .. t]` (exclusive of day `t`), defined for `t ≥ n`.
pub fn sma(closes: &[f64], n: usize) -> Result<IndicatorSeries, IndicatorError> {
    assert!(n >= 1, "sma window must be at least 1");
    if n >= closes.len() {
        return Err(IndicatorError::WindowTooLarge { window: n, len: closes.len() });
    }
    let mut values = vec![None; closes.len()];
    let mut window_sum: f64 = closes[..n].iter().sum();
    values[n] = Some(window_sum / n as f64);
    for t in n + 1..closes.len() {
        window_sum += closes[t - 1] - closes[t - 1 - n];
        values[t] = Some(window_sum / n as f64);
    }
    Ok(IndicatorSeries { name: format!("sma_{n}"), values })
}

/// Exponential moving average with smoothing factor `2/(span+1)`, seeded at
/// index `span − 1` with the mean of the first `span` closes.
pub fn ema(closes: &[f64], span: usize) -> Result<IndicatorSeries, IndicatorError> {
    assert!(span >= 1, "ema span must be at least 1");
    if span > closes.len() {
        return Err(IndicatorError::SpanTooLarge { span, len: closes.len() });
    }
    let gamma = 2.0 / (span as f64 + 1.0);
    let mut values = vec![None; closes.len()];
    let seed: f64 = closes[..span].iter().sum::<f64>() / span as f64;
    values[span - 1] = Some(seed);
    let mut prev = seed;
    for t in span..closes.len() {
        prev += (closes[t] - prev) * gamma;
        values[t] = Some(prev);
    }
    Ok(IndicatorSeries { name: format!("ema_{span}"), values })
}

/// Short EMA minus long EMA; defined where both operands are.
pub fn macd(closes: &[f64], k: usize, d: usize) -> Result<IndicatorSeries, IndicatorError> {
    assert!(k != d, "macd spans must differ");
    let short = ema(closes, k)?;
    let long = ema(closes, d)?;
    let values = short
        .values
        .iter()
        .zip(&long.values)
        .map(|(s, l)| match (s, l) {
            (Some(s), Some(l)) => Some(s - l),
            _ => None,
        })
        .collect();
    Ok(IndicatorSeries { name: "macd".to_string(), values })
}

/// On-balance volume: cumulative volume signed by the day-over-day close
/// change, anchored at 0.
pub fn obv(closes: &[f64], volumes: &[f64]) -> Result<IndicatorSeries, IndicatorError> {
    if closes.len() != volumes.len() {
        return Err(IndicatorError::LengthMismatch { left: closes.len(), right: volumes.len() });
    }
    assert!(!closes.is_empty(), "obv needs at least one bar");
    let mut values = Vec::with_capacity(closes.len());
    let mut acc = 0.0;
    values.push(Some(acc));
    for t in 1..closes.len() {
        if closes[t] > closes[t - 1] {
            acc += volumes[t];
        } else if closes[t] < closes[t - 1] {
            acc -= volumes[t];
        }
        values.push(Some(acc));
    }
    Ok(IndicatorSeries { name: "obv".to_string(), values })
}

/// Relative strength index over simple trailing means of gains and losses.
///
/// Degenerate windows: all-gain (average loss 0) reads 100 standard / 0
/// mirrored; a perfectly flat window (both averages 0) reads neutral 50 in
/// both variants.
pub fn rsi(closes: &[f64], period: usize, variant: RsiVariant) -> Result<IndicatorSeries, IndicatorError> {
    assert!(period >= 1, "rsi period must be at least 1");
    if period >= closes.len() {
        return Err(IndicatorError::WindowTooLarge { window: period, len: closes.len() });
    }
    // diff[t] = closes[t] − closes[t−1], defined for t ≥ 1.
    let mut values = vec![None; closes.len()];
    for t in period..closes.len() {
        let mut gain_sum = 0.0;
        let mut loss_sum = 0.0;
        for s in t - period + 1..=t {
            let diff = closes[s] - closes[s - 1];
            if diff > 0.0 {
                gain_sum += diff;
            } else {
                loss_sum -= diff;
            }
        }
        let avg_gain = gain_sum / period as f64;
        let avg_loss = loss_sum / period as f64;
        let standard = if avg_loss == 0.0 && avg_gain == 0.0 {
            50.0
        } else if avg_loss == 0.0 {
            100.0
        } else {
            let rs = avg_gain / avg_loss;
            100.0 - 100.0 / (1.0 + rs)
        };
        values[t] = Some(match variant {
            RsiVariant::Standard => standard,
            RsiVariant::Mirrored => 100.0 - standard,
        });
    }
    Ok(IndicatorSeries { name: "rsi".to_string(), values })
}

/// Which indicator columns [`build_feature_frame`] emits, and at what widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorConfig {
    pub sma_windows: Vec<usize>,
    pub ema_spans: Vec<usize>,
    pub macd_short: usize,
    pub macd_long: usize,
    pub rsi_period: usize,
    pub rsi_variant: RsiVariant,
    pub lag_depths: Vec<usize>,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            sma_windows: vec![5, 10, 20, 50, 100, 200],
            ema_spans: vec![5, 10, 20, 50, 100, 200],
            macd_short: 12,
            macd_long: 16,
            rsi_period: 14,
            rsi_variant: RsiVariant::Standard,
            lag_depths: vec![1, 2, 3, 5, 10],
        }
    }
}

impl IndicatorConfig {
    pub fn validate(&self) -> Result<(), IndicatorError> {
        let all_windows = self
            .sma_windows
            .iter()
            .chain(&self.ema_spans)
            .chain(&self.lag_depths)
            .chain([&self.macd_short, &self.macd_long, &self.rsi_period]);
        for &w in all_windows {
            if w < 1 {
                return Err(IndicatorError::BadConfig("window/period values must be >= 1".into()));
            }
        }
        if self.macd_short == self.macd_long {
            return Err(IndicatorError::BadConfig(format!(
                "macd spans must differ (both {})",
                self.macd_short
            )));
        }
        Ok(())
    }

    /// First index at which every configured column is defined.
    fn warmup(&self) -> usize {
        let mut warmup = 0usize;
        for &n in &self.sma_windows {
            warmup = warmup.max(n);
        }
        for &span in &self.ema_spans {
            warmup = warmup.max(span.saturating_sub(1));
        }
        warmup = warmup.max(self.macd_short.max(self.macd_long).saturating_sub(1));
        warmup = warmup.max(self.rsi_period);
        for &lag in &self.lag_depths {
            warmup = warmup.max(lag);
        }
        warmup
    }

    /// Names of the emitted feature columns, in emission order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            ["open", "high", "low", "volume"].iter().map(|s| s.to_string()).collect();
        for &n in &self.sma_windows {
            names.push(format!("sma_{n}"));
        }
        for &span in &self.ema_spans {
            names.push(format!("ema_{span}"));
        }
        names.push("macd".to_string());
        names.push("rsi".to_string());
        names.push("obv".to_string());
        for &lag in &self.lag_depths {
            names.push(format!("lag_close_{lag}"));
        }
        names
    }
}

/// Assemble the per-day feature frame: same-day open/high/low/volume, every
/// configured indicator, and lagged closes. The target column is the
/// same-day close; rows where any indicator is still warming up are dropped.
///
/// Note the same-day open/high/low are *features of the same day as the
/// close target* — a deliberate look-ahead that makes in-sample fit look
/// near-perfect. Shift the target (see `FeatureMatrix::shift_target`) for
/// an honest next-day evaluation.
pub fn build_feature_frame(
    series: &OhlcvSeries,
    cfg: &IndicatorConfig,
) -> Result<FeatureMatrix, IndicatorError> {
    cfg.validate()?;
    let len = series.len();
    let warmup = cfg.warmup();
    if warmup >= len {
        return Err(IndicatorError::InsufficientHistory { needed: warmup + 1, len });
    }

    let closes = series.closes();
    let volumes = series.volumes();

    // Warm-up covers every window below, so the unwraps cannot fire.
    let mut indicator_columns: Vec<IndicatorSeries> = Vec::new();
    for &n in &cfg.sma_windows {
        indicator_columns.push(sma(&closes, n).expect("warm-up check covers sma window"));
    }
    for &span in &cfg.ema_spans {
        indicator_columns.push(ema(&closes, span).expect("warm-up check covers ema span"));
    }
    indicator_columns
        .push(macd(&closes, cfg.macd_short, cfg.macd_long).expect("warm-up check covers macd"));
    indicator_columns
        .push(rsi(&closes, cfg.rsi_period, cfg.rsi_variant).expect("warm-up check covers rsi"));
    indicator_columns.push(obv(&closes, &volumes).expect("lengths match by construction"));

    let mut rows = Vec::with_capacity(len - warmup);
    let mut target = Vec::with_capacity(len - warmup);
    let mut index = Vec::with_capacity(len - warmup);
    for t in warmup..len {
        let bar = &series.bars[t];
        let mut row = vec![bar.open, bar.high, bar.low, bar.volume as f64];
        for column in &indicator_columns {
            row.push(column.values[t].expect("defined past warm-up"));
        }
        for &lag in &cfg.lag_depths {
            row.push(closes[t - lag]);
        }
        rows.push(row);
        target.push(bar.close);
        index.push(bar.date.to_string());
    }

    Ok(FeatureMatrix { column_names: cfg.column_names(), rows, target, index })
}
