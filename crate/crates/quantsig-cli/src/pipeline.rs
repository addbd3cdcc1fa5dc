//! The five subcommands: fetch, features, train-price, train-sentiment,
//! and the shared output-directory plumbing.
//!
//! Every training command follows the same discipline: compute everything
//! in memory first, then write the output files, and write `manifest.txt`
//! last. If any write fails, files written so far are removed — a run
//! directory either holds a complete run or nothing.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quantsig::indicators::build_feature_frame;
use quantsig::marketdata::{fetch_history, validate_series, FetchSource, ViolationKind};
use quantsig::metrics::{classification_report, regression_report, roc_auc};
use quantsig::models::{
    decision_scores, fit_classifier, fit_linear_regression, fit_lstm, predict_labels,
    predict_regressor, save_model, ClassifierFamily, ModelArtifact, RegressorModel, TrainConfig,
    DEFAULT_RIDGE,
};
use quantsig::preprocess::{
    apply_minmax, chronological_split, fit_minmax, pca_fit, pca_transform, select_features,
    FeatureMatrix,
};
use quantsig::textcorpus::{build_vocabulary, load_tweets_csv, vectorize, BowMode};

use crate::config::{fnv1a64, RunConfig};
use crate::report::{self, Manifest};
use crate::svg;
use crate::CliError;

/// Command-line family names in canonical order, paired with the model
/// each one trains.
pub const SENTIMENT_FAMILIES: [(&str, ClassifierFamily); 9] = [
    ("lr", ClassifierFamily::Logistic),
    ("gnb", ClassifierFamily::Gnb),
    ("bnb", ClassifierFamily::Bnb),
    ("dt", ClassifierFamily::Dt),
    ("rf", ClassifierFamily::Rf),
    ("knn", ClassifierFamily::Knn),
    ("svm", ClassifierFamily::LinearSvm),
    ("xgb", ClassifierFamily::Gbt),
    ("ann", ClassifierFamily::Mlp),
];

fn parse_cli_date(text: &str, what: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .map_err(|_| CliError::Usage(format!("{what} date {text:?} is not YYYY-MM-DD")))
}

// ------------------------------------------------------------------ fetch

fn describe_violation(kind: &ViolationKind) -> String {
    match kind {
        ViolationKind::LowAboveBody => "low above body".to_string(),
        ViolationKind::HighBelowBody => "high below body".to_string(),
        ViolationKind::NonPositivePrice { field, value } => {
            format!("non-positive {field} ({value})")
        }
        ViolationKind::CalendarGap { gap_days } => format!("{gap_days}-day calendar gap"),
    }
}

pub fn cmd_fetch(
    cfg: &RunConfig,
    symbol: Option<&str>,
    start: Option<&str>,
    end: Option<&str>,
    refresh: bool,
) -> Result<(), CliError> {
    let symbol = symbol.unwrap_or(&cfg.symbol);
    let start = match start {
        Some(s) => parse_cli_date(s, "start")?,
        None => cfg.start,
    };
    let end = match end {
        Some(s) => parse_cli_date(s, "end")?,
        None => cfg.end,
    };
    if start >= end {
        return Err(CliError::Usage(format!(
            "start date {start} must be before end date {end}"
        )));
    }

    let result = fetch_history(symbol, start, end, &cfg.endpoint_config(), refresh)?;
    let series = &result.parsed.series;
    println!(
        "{symbol}: {} rows {}..{}",
        series.len(),
        series.bars.first().map(|b| b.date.to_string()).unwrap_or_default(),
        series.bars.last().map(|b| b.date.to_string()).unwrap_or_default(),
    );
    match result.source {
        FetchSource::CacheHit => println!("cache hit: {}", result.cache_path.display()),
        FetchSource::Downloaded => println!("downloaded: {}", result.cache_path.display()),
    }
    if result.parsed.skipped_rows > 0 {
        println!("skipped {} incomplete row(s)", result.parsed.skipped_rows);
    }

    let violations = validate_series(series, cfg.max_gap_days);
    if violations.is_empty() {
        println!("validation: clean");
    } else {
        println!("validation: {} issue(s)", violations.len());
        for v in violations.iter().take(10) {
            println!(
                "  row {} ({}): {}",
                v.index,
                series.bars[v.index].date,
                describe_violation(&v.kind)
            );
        }
        if violations.len() > 10 {
            println!("  ... and {} more", violations.len() - 10);
        }
    }
    Ok(())
}

// ------------------------------------------------------- shared plumbing

/// Output directory that tracks what it wrote so a failed run can remove
/// its partial output.
struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    fn create(dir: &Path) -> Result<OutDir, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| {
            CliError::Train(format!("cannot create output directory {}: {e}", dir.display()))
        })?;
        Ok(OutDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Train(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn save_model(&mut self, name: &str, artifact: &ModelArtifact) -> Result<(), CliError> {
        save_model(artifact, &self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn names(&self) -> &[String] {
        &self.written
    }

    /// Remove everything written so far; best-effort, for the error path.
    fn discard(&mut self) {
        for name in self.written.drain(..) {
            let _ = std::fs::remove_file(self.dir.join(name));
        }
    }
}

/// The feature table plus a description of where it came from: a
/// caller-supplied CSV when `features_csv` is set, otherwise indicators
/// built from (cached) downloaded history.
fn load_price_features(cfg: &RunConfig, refresh: bool) -> Result<(FeatureMatrix, String), CliError> {
    if let Some(path) = &cfg.features_csv {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Train(format!("cannot read features file {}: {e}", path.display()))
        })?;
        let matrix = FeatureMatrix::from_csv(&text)?;
        return Ok((matrix, path.display().to_string()));
    }
    let result = fetch_history(&cfg.symbol, cfg.start, cfg.end, &cfg.endpoint_config(), refresh)?;
    let matrix = build_feature_frame(&result.parsed.series, &cfg.indicators)?;
    Ok((matrix, result.cache_path.display().to_string()))
}

pub fn cmd_features(cfg: &RunConfig, refresh: bool) -> Result<(), CliError> {
    let (matrix, input) = load_price_features(cfg, refresh)?;
    matrix.validate()?;
    let csv = matrix.to_csv();

    let mut out = OutDir::create(&cfg.out_dir)?;
    let result = (|| {
        out.write("features.csv", csv.as_bytes())?;
        let mut manifest = Manifest::new("features", cfg);
        manifest.push("input", &input);
        manifest.push("input_rows", matrix.n_rows());
        manifest.push("feature_columns", matrix.n_cols());
        for name in out.names() {
            manifest.push("output", name);
        }
        manifest.push("output", "manifest.txt");
        out.write("manifest.txt", manifest.render(cfg).as_bytes())
    })();
    if let Err(e) = result {
        out.discard();
        return Err(e);
    }

    println!(
        "features: {} rows x {} columns -> {}",
        matrix.n_rows(),
        matrix.n_cols(),
        cfg.out_dir.join("features.csv").display()
    );
    Ok(())
}

// ------------------------------------------------------------ train-price

/// Rows the recurrent model predicts from: for target row `t` the window
/// is the `window` values of the target series ending just before the
/// predicted day (`t + horizon` in unshifted coordinates).
fn predict_windows(
    model: &RegressorModel,
    closes: &[f64],
    range: std::ops::Range<usize>,
    horizon: usize,
    window: usize,
) -> Result<Vec<f64>, CliError> {
    let mut rows = Vec::with_capacity(range.len());
    for t in range {
        let end = t + horizon;
        if end < window {
            return Err(CliError::Train(format!(
                "window of {window} closes reaches before the first row at row {t}"
            )));
        }
        rows.push(closes[end - window..end].to_vec());
    }
    Ok(predict_regressor(model, &rows)?)
}

pub fn cmd_train_price(cfg: &RunConfig, model_name: &str, refresh: bool) -> Result<(), CliError> {
    if model_name != "linear" && model_name != "lstm" {
        return Err(CliError::Usage(format!(
            "unknown price model {model_name:?}; valid models: linear, lstm"
        )));
    }
    if cfg.top_k == 0 {
        return Err(CliError::Usage("top_k must be at least 1".to_string()));
    }

    let (matrix, input) = load_price_features(cfg, refresh)?;
    matrix.validate()?;
    // With indicator-built features the target is the close itself, so this
    // is the price series aligned with the feature rows; with a
    // caller-supplied table it is whatever that table calls `target`.
    let closes = matrix.target.clone();
    let shifted = matrix.shift_target(cfg.horizon)?;
    if shifted.n_rows() < 3 {
        return Err(CliError::Train(format!(
            "only {} rows after applying horizon {}; need at least 3 to split",
            shifted.n_rows(),
            cfg.horizon
        )));
    }
    let split = chronological_split(shifted.n_rows(), cfg.split)?;

    // Selection and scaling learn from training rows only, then apply to
    // the whole table.
    let train_matrix = shifted.take_rows(split.train.clone());
    let (selected_train, selection) =
        select_features(&train_matrix, cfg.top_k, cfg.redundancy_rho)?;
    let scaler = fit_minmax(&selected_train);
    let full = shifted.select_columns(&selection.kept)?;
    let scaled = apply_minmax(&full, &scaler)?;

    let (model, val_pred, test_pred) = if model_name == "linear" {
        let x_train = scaled.rows[split.train.clone()].to_vec();
        let y_train = scaled.target[split.train.clone()].to_vec();
        let linear =
            fit_linear_regression(&x_train, &y_train, DEFAULT_RIDGE, &scaled.column_names)?;
        let model = RegressorModel::Linear(linear);
        let val = predict_regressor(&model, &scaled.rows[split.validation.clone()])?;
        let test = predict_regressor(&model, &scaled.rows[split.test.clone()])?;
        (model, val, test)
    } else {
        let mut train_cfg = TrainConfig::for_lstm(cfg.seed);
        cfg.train.apply(&mut train_cfg);
        let lstm = fit_lstm(&closes[..split.train.end], &train_cfg)?;
        let model = RegressorModel::Lstm(lstm);
        let window = train_cfg.window_length;
        let val =
            predict_windows(&model, &closes, split.validation.clone(), cfg.horizon, window)?;
        let test = predict_windows(&model, &closes, split.test.clone(), cfg.horizon, window)?;
        (model, val, test)
    };

    let y_val = &scaled.target[split.validation.clone()];
    let y_test = &scaled.target[split.test.clone()];
    let val_report = regression_report(y_val, &val_pred)?;
    let test_report = regression_report(y_test, &test_pred)?;

    let metrics_csv = report::price_metrics_csv(&val_report, &test_report);
    let metrics_txt = report::price_metrics_txt(model_name, &val_report, &test_report);
    let predictions_csv =
        report::price_predictions_csv(&scaled.index[split.test.clone()], y_test, &test_pred);
    let chart = svg::price_chart(&scaled.index[split.test.clone()], y_test, &test_pred);

    let mut out = OutDir::create(&cfg.out_dir)?;
    let result = (|| {
        out.write("metrics.csv", metrics_csv.as_bytes())?;
        out.write("metrics.txt", metrics_txt.as_bytes())?;
        out.write("predictions.csv", predictions_csv.as_bytes())?;
        out.write("price.svg", chart.as_bytes())?;
        out.save_model(&format!("model_{model_name}.bin"), &ModelArtifact::Regressor(model))?;

        let mut manifest = Manifest::new("train-price", cfg);
        manifest.push("models", model_name);
        manifest.push("input", &input);
        manifest.push("input_rows", closes.len());
        manifest.push("feature_columns", shifted.n_cols());
        manifest.push("selected_columns", selection.kept.len());
        manifest.push("selected", selection.kept.join(","));
        manifest.push("train_rows", format!("{}..{}", split.train.start, split.train.end));
        manifest.push(
            "validation_rows",
            format!("{}..{}", split.validation.start, split.validation.end),
        );
        manifest.push("test_rows", format!("{}..{}", split.test.start, split.test.end));
        // index keys name the day features were observed
        manifest.push(
            "test_date_range",
            format!("{}..{}", scaled.index[split.test.start], scaled.index[split.test.end - 1]),
        );
        manifest.push("mape_excluded_validation", val_report.mape_excluded);
        manifest.push("mape_excluded_test", test_report.mape_excluded);
        for name in out.names() {
            manifest.push("output", name);
        }
        manifest.push("output", "manifest.txt");
        out.write("manifest.txt", manifest.render(cfg).as_bytes())
    })();
    if let Err(e) = result {
        out.discard();
        return Err(e);
    }

    print!("{metrics_txt}");
    println!("wrote {}", cfg.out_dir.display());
    Ok(())
}

// -------------------------------------------------------- train-sentiment

fn resolve_families(arg: &str) -> Result<Vec<(&'static str, ClassifierFamily)>, CliError> {
    if arg == "all" {
        return Ok(SENTIMENT_FAMILIES.to_vec());
    }
    SENTIMENT_FAMILIES
        .iter()
        .find(|(name, _)| *name == arg)
        .map(|&pair| vec![pair])
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown sentiment family {arg:?}; valid families: lr, gnb, bnb, dt, rf, knn, svm, xgb, ann, all"
            ))
        })
}

pub fn cmd_train_sentiment(cfg: &RunConfig, family_arg: &str) -> Result<(), CliError> {
    let families = resolve_families(family_arg)?;
    let under_all = family_arg == "all";

    let (mut records, skips) =
        load_tweets_csv(&cfg.tweets_csv, &cfg.text_col, &cfg.label_col)?;
    if cfg.sentiment_shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        records.shuffle(&mut rng);
    }
    if records.len() < 3 {
        return Err(CliError::Train(format!(
            "corpus has only {} usable row(s); need at least 3 to split",
            records.len()
        )));
    }
    let split = chronological_split(records.len(), cfg.split)?;

    // Vocabulary comes from training rows only; vectorization then covers
    // the whole corpus against that frozen vocabulary.
    let vocab = build_vocabulary(&records[split.train.clone()], cfg.min_df, cfg.max_vocab)?;
    let counts = vectorize(&records, &vocab, cfg.bow_mode);
    let dense = counts.to_feature_matrix(&vocab);
    let y = counts.labels.clone();

    let scaler = fit_minmax(&dense.take_rows(split.train.clone()));
    let scaled = apply_minmax(&dense, &scaler)?;
    let full_pca = pca_fit(&scaled.rows[split.train.clone()], scaled.n_cols())?;
    let k = if cfg.pca_components > 0 {
        cfg.pca_components.min(full_pca.n_components())
    } else {
        full_pca.components_for_fraction(cfg.pca_variance_fraction)
    };
    let pca = full_pca.truncated(k)?;
    let projected = pca_transform(&scaled.rows, &pca)?;

    // Bernoulli NB sees raw presence/absence features, not projections —
    // build them only if that family is in the request.
    let binary: Option<Vec<Vec<f64>>> = families
        .iter()
        .any(|(_, f)| *f == ClassifierFamily::Bnb)
        .then(|| vectorize(&records, &vocab, BowMode::Binary).to_feature_matrix(&vocab).rows);

    let y_train: Vec<u8> = y[split.train.clone()].to_vec();
    let y_test_f64: Vec<f64> = y[split.test.clone()].iter().map(|&l| l as f64).collect();

    let mut columns: Vec<report::FamilyColumn> = Vec::new();
    let mut curves: Vec<(String, Vec<(f64, f64)>, f64)> = Vec::new();
    let mut score_columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut artifacts: Vec<(String, ModelArtifact)> = Vec::new();
    let mut failures: Vec<String> = Vec::new();

    for &(surface, family) in &families {
        let rows: &[Vec<f64>] = match (family, &binary) {
            (ClassifierFamily::Bnb, Some(b)) => b,
            _ => &projected,
        };
        let mut train_cfg =
            TrainConfig::for_classifier(family, cfg.seed ^ fnv1a64(surface.as_bytes()));
        cfg.train.apply(&mut train_cfg);

        let outcome = (|| -> Result<_, CliError> {
            let model =
                fit_classifier(&rows[split.train.clone()], &y_train, family, &train_cfg)?;
            let scores = decision_scores(&model, &rows[split.test.clone()])?;
            let labels = predict_labels(&model, &rows[split.test.clone()])?;
            let labels_f64: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
            let class_report = classification_report(&y_test_f64, &labels_f64)?;
            let roc = roc_auc(&y_test_f64, &scores)?;
            Ok((model, scores, class_report, roc))
        })();

        match outcome {
            Ok((model, scores, class_report, roc)) => {
                columns.push(report::FamilyColumn {
                    name: surface.to_string(),
                    report: class_report,
                    auc: roc.auc,
                });
                curves.push((surface.to_string(), roc.points, roc.auc));
                score_columns.push((surface.to_string(), scores));
                artifacts
                    .push((format!("model_{surface}.bin"), ModelArtifact::Classifier(model)));
            }
            Err(e) if under_all => {
                eprintln!("warning: family {surface} failed ({e}); skipping");
                failures.push(surface.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if columns.is_empty() {
        return Err(CliError::Train("every requested family failed".to_string()));
    }

    let metrics_csv = report::sentiment_metrics_csv(&columns);
    let metrics_txt = report::sentiment_metrics_txt(&columns);
    let score_refs: Vec<(&str, &[f64])> =
        score_columns.iter().map(|(n, s)| (n.as_str(), s.as_slice())).collect();
    let predictions_csv = report::sentiment_predictions_csv(
        &counts.ids[split.test.clone()],
        &y[split.test.clone()],
        &score_refs,
    );
    let chart = svg::roc_chart(&curves);

    let test_len = split.test.len() as f64;
    let positives = y[split.test.clone()].iter().filter(|&&l| l == 1).count() as f64;
    let majority_share = (positives / test_len).max(1.0 - positives / test_len);

    let mut out = OutDir::create(&cfg.out_dir)?;
    let result = (|| {
        out.write("metrics.csv", metrics_csv.as_bytes())?;
        out.write("metrics.txt", metrics_txt.as_bytes())?;
        out.write("predictions.csv", predictions_csv.as_bytes())?;
        out.write("roc.svg", chart.as_bytes())?;
        for (name, artifact) in &artifacts {
            out.save_model(name, artifact)?;
        }

        let mut manifest = Manifest::new("train-sentiment", cfg);
        let trained: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        manifest.push("models", trained.join(","));
        manifest.push("input", cfg.tweets_csv.display());
        manifest.push("corpus_rows", records.len());
        manifest.push("skipped_empty_text", skips.empty_text);
        manifest.push("skipped_bad_label", skips.bad_label);
        manifest.push("vocab_size", vocab.len());
        manifest.push("pca_components", k);
        manifest.push("train_rows", format!("{}..{}", split.train.start, split.train.end));
        manifest.push(
            "validation_rows",
            format!("{}..{}", split.validation.start, split.validation.end),
        );
        manifest.push("test_rows", format!("{}..{}", split.test.start, split.test.end));
        manifest.push("test_majority_share", majority_share);
        for name in &failures {
            manifest.push("failed", name);
        }
        for name in out.names() {
            manifest.push("output", name);
        }
        manifest.push("output", "manifest.txt");
        out.write("manifest.txt", manifest.render(cfg).as_bytes())
    })();
    if let Err(e) = result {
        out.discard();
        return Err(e);
    }

    print!("{metrics_txt}");
    println!("wrote {}", cfg.out_dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_resolve_in_canonical_order() {
        let all = resolve_families("all").unwrap();
        let names: Vec<&str> = all.iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["lr", "gnb", "bnb", "dt", "rf", "knn", "svm", "xgb", "ann"]);
        assert_eq!(resolve_families("svm").unwrap(), vec![("svm", ClassifierFamily::LinearSvm)]);
        let err = resolve_families("svc").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(err.to_string().contains("valid families"));
    }

    #[test]
    fn violation_descriptions_are_single_line() {
        for kind in [
            ViolationKind::LowAboveBody,
            ViolationKind::HighBelowBody,
            ViolationKind::NonPositivePrice { field: "close", value: -1.0 },
            ViolationKind::CalendarGap { gap_days: 12 },
        ] {
            assert!(!describe_violation(&kind).contains('\n'));
        }
        assert_eq!(
            describe_violation(&ViolationKind::NonPositivePrice { field: "close", value: -1.0 }),
            "non-positive close (-1)"
        );
        assert_eq!(describe_violation(&ViolationKind::CalendarGap { gap_days: 12 }), "12-day calendar gap");
    }

    #[test]
    fn prediction_windows_end_just_before_the_predicted_day() {
        let closes: Vec<f64> = (0..10).map(|i| i as f64).collect();
        // identity-ish check via a linear model that echoes the last window value
        let model = RegressorModel::Linear(quantsig::models::LinearModel {
            weights: vec![0.0, 0.0, 1.0],
            intercept: 0.0,
            feature_names: vec!["a".into(), "b".into(), "c".into()],
        });
        // horizon 0: window for row t is closes[t-3..t], last element t-1
        let p = predict_windows(&model, &closes, 5..7, 0, 3).unwrap();
        assert_eq!(p, vec![4.0, 5.0]);
        // horizon 1: window slides one day forward, last element is day t
        let p = predict_windows(&model, &closes, 5..7, 1, 3).unwrap();
        assert_eq!(p, vec![5.0, 6.0]);
        // a window that would reach before the series start is an error
        let err = predict_windows(&model, &closes, 1..3, 0, 3).unwrap_err();
        assert!(matches!(err, CliError::Train(_)));
    }

    #[test]
    fn out_dir_discard_removes_everything_written() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let mut out = OutDir::create(&dir).unwrap();
        out.write("a.txt", b"alpha").unwrap();
        out.write("b.txt", b"beta").unwrap();
        assert_eq!(out.names(), ["a.txt", "b.txt"]);
        out.discard();
        assert!(!dir.join("a.txt").exists());
        assert!(!dir.join("b.txt").exists());
        // the directory itself stays; only run files are removed
        assert!(dir.exists());
    }
}
