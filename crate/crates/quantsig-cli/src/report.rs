//! Report rendering and run-directory merging.
//!
//! Two output grains per training run: `metrics.csv` carries full-precision
//! values for downstream tooling, `metrics.txt` the aligned human table.
//! `manifest.txt` records what the run was — command, config hash, inputs,
//! split boundaries, and the output files — in plain deterministic
//! `key=value` lines with the full resolved config as a trailing
//! `config.*` block. No timestamps anywhere: a rerun with the same config
//! and cache must reproduce every byte.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use quantsig::metrics::{ClassificationReport, RegressionReport};

use crate::config::RunConfig;
use crate::CliError;

/// Ordered `key=value` lines; keys may repeat (`output=` does).
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let mut m = Manifest { lines: Vec::new() };
        m.push("command", command);
        m.push("config_hash", cfg.hash());
        m.push("seed", cfg.seed);
        m.push("horizon", cfg.horizon);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        for (key, value) in &self.lines {
            let _ = writeln!(out, "{key}={value}");
        }
        for line in cfg.resolved_lines() {
            let _ = writeln!(out, "config.{line}");
        }
        out
    }
}

/// Table 1-shaped regression rows, full precision, validation and test
/// columns side by side.
pub fn price_metrics_csv(val: &RegressionReport, test: &RegressionReport) -> String {
    let mut out = String::from("metric,validation,test\n");
    for ((name, v), (_, t)) in val.table_rows().into_iter().zip(test.table_rows()) {
        let _ = writeln!(out, "{name},{v},{t}");
    }
    out
}

pub fn price_metrics_txt(model: &str, val: &RegressionReport, test: &RegressionReport) -> String {
    let mut out = format!("price model: {model}\n");
    let _ = writeln!(out, "{:<20} {:>12} {:>12}", "metric", "validation", "test");
    for ((name, v), (_, t)) in val.table_rows().into_iter().zip(test.table_rows()) {
        let _ = writeln!(out, "{name:<20} {v:>12.4} {t:>12.4}");
    }
    out
}

pub fn price_predictions_csv(index: &[String], actual: &[f64], predicted: &[f64]) -> String {
    let mut out = String::from("date,actual,predicted\n");
    for i in 0..index.len() {
        let _ = writeln!(out, "{},{},{}", index[i], actual[i], predicted[i]);
    }
    out
}

/// One trained family's share of the Table 2 grid.
pub struct FamilyColumn {
    pub name: String,
    pub report: ClassificationReport,
    pub auc: f64,
}

impl FamilyColumn {
    fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut rows = self.report.table_rows();
        rows.push(("AUC", self.auc));
        rows
    }
}

pub fn sentiment_metrics_csv(columns: &[FamilyColumn]) -> String {
    let mut out = String::from("metric");
    for c in columns {
        let _ = write!(out, ",{}", c.name);
    }
    out.push('\n');
    let per_family: Vec<Vec<(&str, f64)>> = columns.iter().map(|c| c.rows()).collect();
    for row in 0..per_family[0].len() {
        let _ = write!(out, "{}", per_family[0][row].0);
        for rows in &per_family {
            let _ = write!(out, ",{}", rows[row].1);
        }
        out.push('\n');
    }
    out
}

pub fn sentiment_metrics_txt(columns: &[FamilyColumn]) -> String {
    let mut out = format!("{:<20}", "metric");
    for c in columns {
        let _ = write!(out, " {:>10}", c.name);
    }
    out.push('\n');
    let per_family: Vec<Vec<(&str, f64)>> = columns.iter().map(|c| c.rows()).collect();
    for row in 0..per_family[0].len() {
        let _ = write!(out, "{:<20}", per_family[0][row].0);
        for rows in &per_family {
            let _ = write!(out, " {:>10.4}", rows[row].1);
        }
        out.push('\n');
    }
    out
}

pub fn sentiment_predictions_csv(
    ids: &[String],
    labels: &[u8],
    scores: &[(&str, &[f64])],
) -> String {
    let mut out = String::from("id,label");
    for (name, _) in scores {
        let _ = write!(out, ",{name}_score");
    }
    out.push('\n');
    for i in 0..ids.len() {
        let _ = write!(out, "{},{}", ids[i], labels[i]);
        for (_, column) in scores {
            let _ = write!(out, ",{}", column[i]);
        }
        out.push('\n');
    }
    out
}

/// Everything `report` needs from one finished run directory.
#[derive(Debug)]
struct RunInfo {
    dir: PathBuf,
    command: String,
    models: String,
    config_hash: String,
    config: BTreeMap<String, String>,
    /// metrics.csv column headers after the leading `metric` cell.
    metrics_header: Vec<String>,
    /// metric name → one value per header column.
    metrics_rows: Vec<(String, Vec<f64>)>,
}

fn read_run(dir: &Path) -> Result<RunInfo, CliError> {
    let manifest_path = dir.join("manifest.txt");
    if !manifest_path.is_file() {
        return Err(CliError::Usage(format!("missing manifest in {}", dir.display())));
    }
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| {
        CliError::Usage(format!("cannot read {}: {e}", manifest_path.display()))
    })?;

    let mut command = String::new();
    let mut models = String::new();
    let mut config_hash = String::new();
    let mut config = BTreeMap::new();
    for line in text.lines() {
        let Some((key, value)) = line.split_once('=') else { continue };
        match key {
            "command" => command = value.to_string(),
            "models" => models = value.to_string(),
            "config_hash" => config_hash = value.to_string(),
            _ => {
                if let Some(cfg_key) = key.strip_prefix("config.") {
                    config.insert(cfg_key.to_string(), value.to_string());
                }
            }
        }
    }
    if command.is_empty() {
        return Err(CliError::Usage(format!(
            "manifest in {} has no command line",
            dir.display()
        )));
    }

    let mut metrics_header = Vec::new();
    let mut metrics_rows = Vec::new();
    let metrics_path = dir.join("metrics.csv");
    if metrics_path.is_file() {
        let metrics = std::fs::read_to_string(&metrics_path).map_err(|e| {
            CliError::Usage(format!("cannot read {}: {e}", metrics_path.display()))
        })?;
        let mut lines = metrics.lines();
        if let Some(header) = lines.next() {
            metrics_header = header.split(',').skip(1).map(str::to_string).collect();
        }
        for line in lines {
            let mut cells = line.split(',');
            let name = cells.next().unwrap_or_default().to_string();
            let values: Vec<f64> = cells.map(|c| c.parse().unwrap_or(f64::NAN)).collect();
            metrics_rows.push((name, values));
        }
    } else if command.starts_with("train-") {
        return Err(CliError::Usage(format!(
            "run {} is incomplete: metrics.csv missing",
            dir.display()
        )));
    }

    Ok(RunInfo { dir: dir.to_path_buf(), command, models, config_hash, config, metrics_header, metrics_rows })
}

/// Merge run directories into side-by-side comparison tables on stdout.
/// Duplicates (same command, models, and config hash) collapse to the
/// first occurrence; differing configs are flagged, not rejected.
pub fn cmd_report(dirs: &[PathBuf]) -> Result<(), CliError> {
    if dirs.is_empty() {
        return Err(CliError::Usage("report needs at least one run directory".to_string()));
    }
    let mut runs: Vec<RunInfo> = Vec::new();
    let mut seen: HashSet<(String, String, String)> = HashSet::new();
    for dir in dirs {
        let info = read_run(dir)?;
        let key = (info.command.clone(), info.models.clone(), info.config_hash.clone());
        if !seen.insert(key) {
            println!(
                "note: {} duplicates an earlier run (same command, models, config hash); skipped",
                dir.display()
            );
            continue;
        }
        runs.push(info);
    }

    flag_config_mismatches(&runs);

    let price: Vec<&RunInfo> = runs.iter().filter(|r| r.command == "train-price").collect();
    if !price.is_empty() {
        print_price_comparison(&price);
    }
    for run in runs.iter().filter(|r| r.command == "train-sentiment") {
        print_sentiment_grid(run);
    }
    for run in runs.iter().filter(|r| !r.command.starts_with("train-")) {
        println!("{} run in {} (config {})", run.command, run.dir.display(), run.config_hash);
    }
    Ok(())
}

fn flag_config_mismatches(runs: &[RunInfo]) {
    let Some(first) = runs.first() else { return };
    for other in &runs[1..] {
        if other.config_hash == first.config_hash {
            continue;
        }
        let mut differing: Vec<&String> = first
            .config
            .keys()
            .chain(other.config.keys())
            .filter(|k| first.config.get(*k) != other.config.get(*k))
            .collect();
        differing.sort();
        differing.dedup();
        let shown: Vec<&str> = differing.iter().take(8).map(|k| k.as_str()).collect();
        let suffix = if differing.len() > 8 { ", ..." } else { "" };
        println!(
            "note: config mismatch between {} and {}: {}{}",
            first.dir.display(),
            other.dir.display(),
            shown.join(", "),
            suffix
        );
    }
}

/// Two price runs side by side: the Table 1 layout, one column per model,
/// test-split values.
fn print_price_comparison(runs: &[&RunInfo]) {
    println!("price runs (test split)");
    print!("{:<20}", "metric");
    for run in runs {
        let label = if run.models.is_empty() { "?" } else { &run.models };
        print!(" {label:>12}");
    }
    println!();
    let metric_names: Vec<&String> = runs[0].metrics_rows.iter().map(|(name, _)| name).collect();
    for name in metric_names {
        print!("{name:<20}");
        for run in runs {
            // the test column is the last one (validation, test)
            let value = run
                .metrics_rows
                .iter()
                .find(|(n, _)| n == name)
                .and_then(|(_, vs)| vs.last().copied());
            match value {
                Some(v) => print!(" {v:>12.4}"),
                None => print!(" {:>12}", "-"),
            }
        }
        println!();
    }
    println!();
}

fn print_sentiment_grid(run: &RunInfo) {
    println!("sentiment run in {} (config {})", run.dir.display(), run.config_hash);
    print!("{:<20}", "metric");
    for name in &run.metrics_header {
        print!(" {name:>10}");
    }
    println!();
    for (name, values) in &run.metrics_rows {
        print!("{name:<20}");
        for v in values {
            print!(" {v:>10.4}");
        }
        println!();
    }
    println!();
}

#[cfg(test)]
mod tests {
    use super::*;
    use quantsig::metrics::{classification_report, regression_report, roc_auc};

    fn regression_fixture() -> (RegressionReport, RegressionReport) {
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let close = vec![1.1, 1.9, 3.2, 3.8];
        let off = vec![1.5, 2.5, 2.5, 4.5];
        (regression_report(&y, &close).unwrap(), regression_report(&y, &off).unwrap())
    }

    #[test]
    fn price_csv_has_header_and_five_metric_rows() {
        let (val, test) = regression_fixture();
        let csv = price_metrics_csv(&val, &test);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,validation,test");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("R2,"));
        assert!(lines[2].starts_with("Explained Variation,"));
        assert!(lines[5].starts_with("MAE,"));
        // three cells per row
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 3));
    }

    #[test]
    fn sentiment_csv_is_one_column_per_family() {
        let y = vec![1.0, 0.0, 1.0, 0.0, 1.0];
        let yhat = vec![1.0, 0.0, 0.0, 0.0, 1.0];
        let scores = vec![0.9, 0.2, 0.4, 0.1, 0.8];
        let report = classification_report(&y, &yhat).unwrap();
        let auc = roc_auc(&y, &scores).unwrap().auc;
        let columns = vec![
            FamilyColumn { name: "lr".into(), report: report.clone(), auc },
            FamilyColumn { name: "svm".into(), report, auc },
        ];
        let csv = sentiment_metrics_csv(&columns);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "metric,lr,svm");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("Precision,"));
        assert!(lines[5].starts_with("AUC,"));
    }

    #[test]
    fn predictions_csv_aligns_ids_labels_scores() {
        let ids = vec!["7".to_string(), "9".to_string()];
        let labels = vec![1u8, 0u8];
        let lr = vec![0.8, 0.3];
        let csv = sentiment_predictions_csv(&ids, &labels, &[("lr", &lr)]);
        assert_eq!(csv, "id,label,lr_score\n7,1,0.8\n9,0,0.3\n");
    }

    #[test]
    fn manifest_renders_config_block_after_run_lines() {
        let cfg = RunConfig::default();
        let mut m = Manifest::new("train-price", &cfg);
        m.push("models", "linear");
        let text = m.render(&cfg);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "command=train-price");
        assert!(lines[1].starts_with("config_hash="));
        assert!(lines.contains(&"models=linear"));
        assert!(lines.iter().any(|l| l.starts_with("config.seed=42")));
        // config block is the tail, nothing after it
        let first_cfg = lines.iter().position(|l| l.starts_with("config.")).unwrap();
        assert!(lines[first_cfg..].iter().all(|l| l.starts_with("config.")));
    }

    #[test]
    fn read_run_requires_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let err = read_run(dir.path()).unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("missing manifest")));
    }

    #[test]
    fn read_run_parses_manifest_and_metrics() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("manifest.txt"),
            "command=train-price\nmodels=linear\nconfig_hash=abc\nconfig.seed=42\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("metrics.csv"), "metric,validation,test\nR2,0.5,0.25\n")
            .unwrap();
        let info = read_run(dir.path()).unwrap();
        assert_eq!(info.command, "train-price");
        assert_eq!(info.models, "linear");
        assert_eq!(info.config_hash, "abc");
        assert_eq!(info.config.get("seed").map(String::as_str), Some("42"));
        assert_eq!(info.metrics_header, vec!["validation", "test"]);
        assert_eq!(info.metrics_rows, vec![("R2".to_string(), vec![0.5, 0.25])]);
    }

    #[test]
    fn read_run_flags_train_run_without_metrics() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("manifest.txt"), "command=train-sentiment\n").unwrap();
        let err = read_run(dir.path()).unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("metrics.csv missing")));
    }
}
