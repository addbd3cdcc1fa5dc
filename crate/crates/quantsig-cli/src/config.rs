//! Flat `key=value` run configuration.
//!
//! One file drives every subcommand: data acquisition, indicator widths,
//! split fractions, selection and PCA settings, corpus columns, training
//! overrides, and output location. Unknown keys are rejected — a typo in a
//! config must fail loudly, not silently fall back to a default. Every key
//! has a documented default so an empty (or absent) file is a valid run.
//!
//! The resolved configuration — file values plus command-line overrides —
//! canonicalizes to a sorted `key=value` listing. That listing is what gets
//! hashed (FNV-1a, 64-bit) for the manifest's `config_hash` and echoed into
//! the manifest itself, so two runs are comparable by hash alone.

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use quantsig::indicators::{IndicatorConfig, RsiVariant};
use quantsig::models::KnnMetric;
use quantsig::textcorpus::BowMode;

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    MalformedLine { line: usize, content: String },
    UnknownKey { line: usize, key: String },
    BadValue { line: usize, key: String, value: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => {
                write!(f, "cannot read config {}: {source}", path.display())
            }
            ConfigError::MalformedLine { line, content } => {
                write!(f, "config line {line} is not key=value: {content:?}")
            }
            ConfigError::UnknownKey { line, key } => {
                write!(f, "config line {line}: unknown key {key:?}")
            }
            ConfigError::BadValue { line, key, value, reason } => {
                write!(f, "config line {line}: bad value {value:?} for {key}: {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Training hyperparameters a config may pin. Anything left blank uses the
/// per-family default baked into the model layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub l2: Option<f64>,
    pub k: Option<usize>,
    pub knn_metric: Option<KnnMetric>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub n_trees: Option<usize>,
    pub hidden_size: Option<usize>,
    pub window_length: Option<usize>,
    pub bootstrap: Option<bool>,
    pub feature_subsample: Option<bool>,
}

impl TrainOverrides {
    /// Overlay the pinned values onto a family-default config.
    pub fn apply(&self, cfg: &mut quantsig::models::TrainConfig) {
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.l2 {
            cfg.l2 = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.knn_metric {
            cfg.metric = v;
        }
        if let Some(v) = self.max_depth {
            cfg.max_depth = v;
        }
        if let Some(v) = self.min_samples_leaf {
            cfg.min_samples_leaf = v;
        }
        if let Some(v) = self.n_trees {
            cfg.n_trees = v;
        }
        if let Some(v) = self.hidden_size {
            cfg.hidden_size = v;
        }
        if let Some(v) = self.window_length {
            cfg.window_length = v;
        }
        if let Some(v) = self.bootstrap {
            cfg.bootstrap = v;
        }
        if let Some(v) = self.feature_subsample {
            cfg.feature_subsample = v;
        }
    }
}

/// Everything a run needs, fully resolved. See the README for the key
/// table; defaults live in [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // data acquisition
    pub endpoint: String,
    pub symbol: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub cache_dir: PathBuf,
    pub timeout_secs: u64,
    pub max_gap_days: i64,
    /// Pre-built feature CSV; set to skip fetching and indicator assembly.
    pub features_csv: Option<PathBuf>,
    // indicator widths
    pub indicators: IndicatorConfig,
    // split / selection / scaling / PCA
    pub split: (f64, f64, f64),
    pub top_k: usize,
    pub redundancy_rho: f64,
    /// Component count for the sentiment pipeline; 0 means pick the
    /// smallest count whose explained-variance fraction reaches
    /// `pca_variance_fraction`.
    pub pca_components: usize,
    pub pca_variance_fraction: f64,
    // sentiment corpus
    pub tweets_csv: PathBuf,
    pub text_col: String,
    pub label_col: String,
    pub min_df: u32,
    pub max_vocab: usize,
    pub bow_mode: BowMode,
    /// Shuffle the corpus (seeded) before the by-file-order split.
    pub sentiment_shuffle: bool,
    // run
    pub out_dir: PathBuf,
    pub seed: u64,
    /// 0 = same-day close target (leaky by construction), 1 = next-day.
    pub horizon: usize,
    // training overrides
    pub train: TrainOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            endpoint: "https://ohlcv.invalid/{symbol}/{start}/{end}.csv".to_string(),
            symbol: "AAPL".to_string(),
            start: NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2021, 12, 31).expect("valid date"),
            cache_dir: PathBuf::from(".quantsig-cache"),
            timeout_secs: 30,
            max_gap_days: quantsig::marketdata::DEFAULT_MAX_GAP_DAYS,
            features_csv: None,
            indicators: IndicatorConfig::default(),
            split: quantsig::preprocess::DEFAULT_SPLIT,
            top_k: 19,
            redundancy_rho: 0.95,
            pca_components: 50,
            pca_variance_fraction: 0.95,
            tweets_csv: PathBuf::from("tweets.csv"),
            text_col: "text".to_string(),
            label_col: "label".to_string(),
            min_df: quantsig::textcorpus::DEFAULT_MIN_DF,
            max_vocab: 1000,
            bow_mode: BowMode::Tf,
            sentiment_shuffle: false,
            out_dir: PathBuf::from("runs/latest"),
            seed: 42,
            horizon: 0,
            train: TrainOverrides::default(),
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with `path` if given. A missing `--config` is a
    /// default run; a named file that cannot be read is an error.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    /// Parse `key=value` lines onto `self`. `#` lines and blanks are
    /// skipped; an empty value resets an optional key and is rejected for
    /// required ones.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                ConfigError::MalformedLine { line, content: trimmed.to_string() }
            })?;
            self.set(key.trim(), value.trim(), line)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        match key {
            "endpoint" => self.endpoint = value.to_string(),
            "symbol" => self.symbol = value.to_string(),
            "start" => self.start = parse_date(value).ok_or_else(|| bad("expected YYYY-MM-DD"))?,
            "end" => self.end = parse_date(value).ok_or_else(|| bad("expected YYYY-MM-DD"))?,
            "cache_dir" => self.cache_dir = PathBuf::from(value),
            "timeout_secs" => self.timeout_secs = value.parse().map_err(|_| bad("expected integer"))?,
            "max_gap_days" => self.max_gap_days = value.parse().map_err(|_| bad("expected integer"))?,
            "features_csv" => {
                self.features_csv = if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            "sma_windows" => self.indicators.sma_windows = parse_usize_list(value).ok_or_else(|| bad("expected comma-separated integers"))?,
            "ema_spans" => self.indicators.ema_spans = parse_usize_list(value).ok_or_else(|| bad("expected comma-separated integers"))?,
            "macd_short" => self.indicators.macd_short = value.parse().map_err(|_| bad("expected integer"))?,
            "macd_long" => self.indicators.macd_long = value.parse().map_err(|_| bad("expected integer"))?,
            "rsi_period" => self.indicators.rsi_period = value.parse().map_err(|_| bad("expected integer"))?,
            "rsi_variant" => {
                self.indicators.rsi_variant = match value {
                    "standard" => RsiVariant::Standard,
                    "mirrored" => RsiVariant::Mirrored,
                    _ => return Err(bad("expected standard or mirrored")),
                }
            }
            "lag_depths" => self.indicators.lag_depths = parse_usize_list(value).ok_or_else(|| bad("expected comma-separated integers"))?,
            "split_train" => self.split.0 = value.parse().map_err(|_| bad("expected number"))?,
            "split_validation" => self.split.1 = value.parse().map_err(|_| bad("expected number"))?,
            "split_test" => self.split.2 = value.parse().map_err(|_| bad("expected number"))?,
            "top_k" => self.top_k = value.parse().map_err(|_| bad("expected integer"))?,
            "redundancy_rho" => self.redundancy_rho = value.parse().map_err(|_| bad("expected number"))?,
            "pca_components" => self.pca_components = value.parse().map_err(|_| bad("expected integer"))?,
            "pca_variance_fraction" => self.pca_variance_fraction = value.parse().map_err(|_| bad("expected number"))?,
            "tweets_csv" => self.tweets_csv = PathBuf::from(value),
            "text_col" => self.text_col = value.to_string(),
            "label_col" => self.label_col = value.to_string(),
            "min_df" => self.min_df = value.parse().map_err(|_| bad("expected integer"))?,
            "max_vocab" => self.max_vocab = value.parse().map_err(|_| bad("expected integer"))?,
            "bow_mode" => {
                self.bow_mode = match value {
                    "tf" => BowMode::Tf,
                    "binary" => BowMode::Binary,
                    _ => return Err(bad("expected tf or binary")),
                }
            }
            "sentiment_shuffle" => self.sentiment_shuffle = parse_bool(value).ok_or_else(|| bad("expected true or false"))?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => self.seed = value.parse().map_err(|_| bad("expected integer"))?,
            "horizon" => self.horizon = value.parse().map_err(|_| bad("expected integer"))?,
            "epochs" => self.train.epochs = parse_opt(value, bad)?,
            "learning_rate" => self.train.learning_rate = parse_opt(value, bad)?,
            "l2" => self.train.l2 = parse_opt(value, bad)?,
            "k" => self.train.k = parse_opt(value, bad)?,
            "knn_metric" => {
                self.train.knn_metric = match value {
                    "" => None,
                    "euclidean" => Some(KnnMetric::Euclidean),
                    "manhattan" => Some(KnnMetric::Manhattan),
                    _ => return Err(bad("expected euclidean or manhattan")),
                }
            }
            "max_depth" => self.train.max_depth = parse_opt(value, bad)?,
            "min_samples_leaf" => self.train.min_samples_leaf = parse_opt(value, bad)?,
            "n_trees" => self.train.n_trees = parse_opt(value, bad)?,
            "hidden_size" => self.train.hidden_size = parse_opt(value, bad)?,
            "window_length" => self.train.window_length = parse_opt(value, bad)?,
            "bootstrap" => {
                self.train.bootstrap =
                    if value.is_empty() { None } else { Some(parse_bool(value).ok_or_else(|| bad("expected true or false"))?) }
            }
            "feature_subsample" => {
                self.train.feature_subsample =
                    if value.is_empty() { None } else { Some(parse_bool(value).ok_or_else(|| bad("expected true or false"))?) }
            }
            _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
        }
        Ok(())
    }

    /// Canonical sorted `key=value` dump of the resolved configuration —
    /// the input to [`RunConfig::hash`] and the `config.*` manifest block.
    /// `out_dir` is deliberately absent: where results land does not change
    /// what they are, so runs differing only in output location share a
    /// hash and compare as equals.
    pub fn resolved_lines(&self) -> Vec<String> {
        let rsi_variant = match self.indicators.rsi_variant {
            RsiVariant::Standard => "standard",
            RsiVariant::Mirrored => "mirrored",
        };
        let bow_mode = match self.bow_mode {
            BowMode::Tf => "tf",
            BowMode::Binary => "binary",
        };
        let knn_metric = match self.train.knn_metric {
            None => "",
            Some(KnnMetric::Euclidean) => "euclidean",
            Some(KnnMetric::Manhattan) => "manhattan",
        };
        let mut lines = vec![
            format!("bootstrap={}", opt_str(&self.train.bootstrap)),
            format!("bow_mode={bow_mode}"),
            format!("cache_dir={}", self.cache_dir.display()),
            format!("ema_spans={}", join(&self.indicators.ema_spans)),
            format!("end={}", self.end),
            format!("endpoint={}", self.endpoint),
            format!("epochs={}", opt_str(&self.train.epochs)),
            format!("feature_subsample={}", opt_str(&self.train.feature_subsample)),
            format!(
                "features_csv={}",
                self.features_csv.as_deref().map(|p| p.display().to_string()).unwrap_or_default()
            ),
            format!("hidden_size={}", opt_str(&self.train.hidden_size)),
            format!("horizon={}", self.horizon),
            format!("k={}", opt_str(&self.train.k)),
            format!("knn_metric={knn_metric}"),
            format!("l2={}", opt_str(&self.train.l2)),
            format!("label_col={}", self.label_col),
            format!("lag_depths={}", join(&self.indicators.lag_depths)),
            format!("learning_rate={}", opt_str(&self.train.learning_rate)),
            format!("macd_long={}", self.indicators.macd_long),
            format!("macd_short={}", self.indicators.macd_short),
            format!("max_depth={}", opt_str(&self.train.max_depth)),
            format!("max_gap_days={}", self.max_gap_days),
            format!("max_vocab={}", self.max_vocab),
            format!("min_df={}", self.min_df),
            format!("min_samples_leaf={}", opt_str(&self.train.min_samples_leaf)),
            format!("n_trees={}", opt_str(&self.train.n_trees)),
            format!("pca_components={}", self.pca_components),
            format!("pca_variance_fraction={}", self.pca_variance_fraction),
            format!("redundancy_rho={}", self.redundancy_rho),
            format!("rsi_period={}", self.indicators.rsi_period),
            format!("rsi_variant={rsi_variant}"),
            format!("seed={}", self.seed),
            format!("sentiment_shuffle={}", self.sentiment_shuffle),
            format!("sma_windows={}", join(&self.indicators.sma_windows)),
            format!("split_test={}", self.split.2),
            format!("split_train={}", self.split.0),
            format!("split_validation={}", self.split.1),
            format!("start={}", self.start),
            format!("symbol={}", self.symbol),
            format!("text_col={}", self.text_col),
            format!("timeout_secs={}", self.timeout_secs),
            format!("top_k={}", self.top_k),
            format!("tweets_csv={}", self.tweets_csv.display()),
            format!("window_length={}", opt_str(&self.train.window_length)),
        ];
        debug_assert!(lines.windows(2).all(|w| w[0] < w[1]), "canonical dump must stay sorted");
        lines.sort();
        lines
    }

    /// FNV-1a over the canonical dump, as 16 lowercase hex digits.
    pub fn hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.resolved_lines().join("\n").as_bytes()))
    }

    pub fn endpoint_config(&self) -> quantsig::marketdata::EndpointConfig {
        quantsig::marketdata::EndpointConfig::new(
            self.endpoint.clone(),
            std::time::Duration::from_secs(self.timeout_secs),
            self.cache_dir.clone(),
        )
    }
}

fn parse_date(value: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").ok()
}

fn parse_bool(value: &str) -> Option<bool> {
    match value {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn parse_usize_list(value: &str) -> Option<Vec<usize>> {
    value.split(',').map(|p| p.trim().parse::<usize>().ok()).collect()
}

/// Empty string clears the override; anything else must parse.
fn parse_opt<T: std::str::FromStr>(
    value: &str,
    bad: impl Fn(&str) -> ConfigError,
) -> Result<Option<T>, ConfigError> {
    if value.is_empty() {
        Ok(None)
    } else {
        value.parse().map(Some).map_err(|_| bad("expected a number"))
    }
}

fn opt_str<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// 64-bit FNV-1a. Not cryptographic — it distinguishes configs, nothing more.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_keeps_defaults() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("\n# comment only\n\n").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn values_comments_and_blanks_parse() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# run setup\nseed = 7\nsymbol=MSFT\n\nsma_windows = 3, 9\nepochs=12\nsentiment_shuffle=true\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.symbol, "MSFT");
        assert_eq!(cfg.indicators.sma_windows, vec![3, 9]);
        assert_eq!(cfg.train.epochs, Some(12));
        assert!(cfg.sentiment_shuffle);
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("seed=1\nspeed=9\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { line, key } => {
                assert_eq!(line, 2);
                assert_eq!(key, "speed");
            }
            other => panic!("expected UnknownKey, got {other:?}"),
        }
    }

    #[test]
    fn bad_value_and_malformed_line_are_rejected() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.apply_text("seed=abc").unwrap_err(),
            ConfigError::BadValue { line: 1, .. }
        ));
        assert!(matches!(
            cfg.apply_text("just words").unwrap_err(),
            ConfigError::MalformedLine { line: 1, .. }
        ));
    }

    #[test]
    fn empty_value_clears_an_override() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("epochs=5").unwrap();
        assert_eq!(cfg.train.epochs, Some(5));
        cfg.apply_text("epochs=").unwrap();
        assert_eq!(cfg.train.epochs, None);
    }

    #[test]
    fn resolved_dump_is_sorted_and_covers_every_key() {
        let lines = RunConfig::default().resolved_lines();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        // one line per accepted key, minus the non-semantic out_dir
        assert_eq!(lines.len(), 43);
        for line in &lines {
            let key = line.split('=').next().unwrap();
            let mut probe = RunConfig::default();
            // every dumped key must round-trip through the parser
            let value = &line[key.len() + 1..];
            probe
                .set(key, value, 1)
                .unwrap_or_else(|e| panic!("dumped key {key} does not parse: {e}"));
        }
    }

    #[test]
    fn hash_is_stable_and_value_sensitive() {
        let a = RunConfig::default();
        let b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        let mut c = RunConfig::default();
        c.apply_text("seed=43").unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn fnv_matches_reference_values() {
        // published FNV-1a test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn train_overrides_overlay_family_defaults() {
        let mut cfg = RunConfig::default();
        cfg.apply_text("epochs=3\nlearning_rate=0.5\nbootstrap=false").unwrap();
        let mut train = quantsig::models::TrainConfig::for_classifier(
            quantsig::models::ClassifierFamily::Logistic,
            9,
        );
        cfg.train.apply(&mut train);
        assert_eq!(train.epochs, 3);
        assert_eq!(train.learning_rate, 0.5);
        assert!(!train.bootstrap);
        assert_eq!(train.l2, 1e-4); // untouched default
    }
}
