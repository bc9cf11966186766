//! Flat CSV tables, JSON documents and the run manifest.
//!
//! Residuals and percentages are rounded to integers in CSV; JSON keeps full
//! precision. Coverage in CSV is an integer percentage.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{ExperimentConfig, ExperimentReport, RuleCount, SweepResult};
use crate::inference::Prediction;
use crate::metrics::{display_round, AccuracyRecord};
use crate::sampling::ALPHAS;

pub const RECORDS_HEADER: [&str; 8] = [
    "sample",
    "approach",
    "rule_count",
    "coverage",
    "abs_res",
    "ave_res",
    "med_res",
    "predictions_made",
];

/// Files `write_experiment` creates besides the manifest.
pub const EXPERIMENT_FILES: [&str; 7] = [
    "report.json",
    "records.csv",
    "best_models.csv",
    "comparison.csv",
    "full_comparison.csv",
    "ttests.csv",
    "rule_frequency.csv",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Provenance of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ExperimentConfig,
    pub dataset_source: String,
    /// SHA-256 of the dataset bytes, lowercase hex.
    pub dataset_digest: String,
    pub tool_version: String,
    /// RFC 3339, UTC. The only field that differs between identical runs.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig, dataset_source: &str, dataset_digest: &str) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            dataset_source: dataset_source.into(),
            dataset_digest: dataset_digest.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

fn rounded(x: Option<f64>) -> String {
    x.map(|v| display_round(v).to_string()).unwrap_or_default()
}

fn percent(fraction: f64) -> String {
    display_round(100.0 * fraction).to_string()
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn record_fields(r: &AccuracyRecord) -> [String; 6] {
    [
        r.rule_count.to_string(),
        percent(r.coverage),
        rounded(r.abs_res),
        rounded(r.ave_res),
        rounded(r.med_res),
        r.predictions_made.to_string(),
    ]
}

/// One row per (sweep, rule count), in the order given.
pub fn records_csv<'a>(sweeps: impl IntoIterator<Item = &'a SweepResult>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORDS_HEADER).expect("in-memory write");
    for sweep in sweeps {
        for r in &sweep.records {
            let [rule_count, coverage, abs, ave, med, made] = record_fields(r);
            w.write_record([
                sweep.sample_index.to_string(),
                sweep.approach.name().to_string(),
                rule_count,
                coverage,
                abs,
                ave,
                med,
                made,
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn best_models_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sample",
        "approach",
        "coverage_mode",
        "measure",
        "rule_count",
        "coverage",
        "abs_res",
        "ave_res",
        "med_res",
        "predictions_made",
    ])
    .expect("in-memory write");
    for b in &report.best_models {
        let mut row = vec![
            b.sample_index.to_string(),
            b.approach.name().to_string(),
            b.coverage_mode.name().to_string(),
            b.measure.name().to_string(),
        ];
        row.extend(record_fields(&b.record));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// Per-sample best shares, then mean and median rows (empty `sample`).
pub fn comparison_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "statistic",
        "sample",
        "measure",
        "rule_counts",
        "sampled_pct_best",
        "top_n_pct_best",
    ])
    .expect("in-memory write");
    for s in &report.comparison.per_sample {
        for (m, c) in &s.by_measure {
            w.write_record([
                "sample".to_string(),
                s.sample_index.to_string(),
                m.name().to_string(),
                c.rule_counts.to_string(),
                display_round(c.pct_a).to_string(),
                display_round(c.pct_b).to_string(),
            ])
            .expect("in-memory write");
        }
    }
    for (m, s) in &report.comparison.overall {
        for (stat, a, b) in [("mean", s.mean_a, s.mean_b), ("median", s.median_a, s.median_b)] {
            w.write_record([
                stat.to_string(),
                String::new(),
                m.name().to_string(),
                String::new(),
                display_round(a).to_string(),
                display_round(b).to_string(),
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn full_comparison_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["basis", "sample", "measure", "rule_count", "full", "sampled", "top_n", "winners"])
        .expect("in-memory write");
    for r in &report.full_comparison {
        let winners: Vec<&str> = r.winners.iter().map(|a| a.name()).collect();
        w.write_record([
            r.basis.name().to_string(),
            r.sample_index.to_string(),
            r.measure.name().to_string(),
            r.rule_count.map(|k| k.to_string()).unwrap_or_default(),
            rounded(r.full),
            rounded(r.sampled),
            rounded(r.top_n),
            winners.join(";"),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Significance columns are 1/0 at each alpha level.
pub fn ttests_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["sample_a", "sample_b", "t", "df", "p"].map(String::from).to_vec();
    header.extend(ALPHAS.iter().map(|a| format!("significant_{a}")));
    w.write_record(&header).expect("in-memory write");
    for t in &report.ttests {
        let mut row = vec![
            t.sample_a.to_string(),
            t.sample_b.to_string(),
            t.result.t_statistic.to_string(),
            t.result.degrees_of_freedom.to_string(),
            t.result.p_value.to_string(),
        ];
        row.extend(ALPHAS.iter().map(|&a| u8::from(t.result.significant(a)).to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    finish(w)
}

/// Pooled frequencies (`scope` = "all") followed by each sample's own.
pub fn rule_frequency_csv(report: &ExperimentReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scope", "rank", "rule_id", "count"]).expect("in-memory write");
    let mut emit = |scope: &str, counts: &[RuleCount]| {
        for (rank, rc) in counts.iter().enumerate() {
            w.write_record([scope, &(rank + 1).to_string(), &rc.rule_id, &rc.count.to_string()])
                .expect("in-memory write");
        }
    };
    emit("all", &report.rule_stats.frequency_all_samples);
    for (stats, counts) in report.rule_stats.per_sample.iter().zip(&report.rule_stats.frequency_per_sample) {
        emit(&stats.sample_index.to_string(), counts);
    }
    finish(w)
}

/// One row per input row; `actual` is empty when the target is absent.
pub fn predictions_csv(predictions: &[Prediction], actuals: Option<&[f64]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["row", "prediction", "actual", "fired_rules", "firing_mass"])
        .expect("in-memory write");
    for (i, p) in predictions.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            p.value.map(|v| v.to_string()).unwrap_or_default(),
            actuals.map(|a| a[i].to_string()).unwrap_or_default(),
            p.fired_rule_count.to_string(),
            p.total_firing_mass.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes every file in [`EXPERIMENT_FILES`] plus `manifest.json`.
pub fn write_experiment(report: &ExperimentReport, manifest: &RunManifest, dir: &Path) -> Result<(), ReportError> {
    let records = records_csv(report.full.iter().chain(&report.sampled).chain(&report.top_n));
    let tables = [
        to_json(report)?,
        records,
        best_models_csv(report),
        comparison_csv(report),
        full_comparison_csv(report),
        ttests_csv(report),
        rule_frequency_csv(report),
    ];
    for (name, contents) in EXPERIMENT_FILES.iter().zip(&tables) {
        write_file(dir, name, contents)?;
    }
    write_file(dir, "manifest.json", &to_json(manifest)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Approach;

    fn record(k: usize, coverage: f64, abs: Option<f64>) -> AccuracyRecord {
        AccuracyRecord {
            rule_count: k,
            coverage,
            predictions_made: (coverage * 20.0).round() as usize,
            test_size: 20,
            abs_res: abs,
            ave_res: abs.map(|a| a / 16.0),
            med_res: abs.map(|a| a / 20.0),
        }
    }

    #[test]
    fn records_header_and_rounding() {
        let sweep = SweepResult {
            approach: Approach::Sampled,
            sample_index: 3,
            partitions: vec![],
            records: vec![record(1, 0.0, None), record(19, 0.8, Some(3100.0))],
            rule_sets: vec![],
        };
        let csv = records_csv([&sweep]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "sample,approach,rule_count,coverage,abs_res,ave_res,med_res,predictions_made");
        assert_eq!(lines[1], "3,sampled,1,0,,,,0");
        assert_eq!(lines[2], "3,sampled,19,80,3100,194,155,16");
    }

    #[test]
    fn predictions_table() {
        let p = [
            Prediction {
                value: Some(2.5),
                fired_rule_count: 2,
                total_firing_mass: 0.75,
            },
            Prediction {
                value: None,
                fired_rule_count: 0,
                total_firing_mass: 0.0,
            },
        ];
        let csv = predictions_csv(&p, Some(&[3.0, 4.0]));
        assert_eq!(
            csv,
            "row,prediction,actual,fired_rules,firing_mass\n1,2.5,3,2,0.75\n2,,4,0,0\n"
        );
    }

    #[test]
    fn manifest_version() {
        let m = RunManifest::new("experiment", &ExperimentConfig::default(), "bundled", "ab");
        assert_eq!(m.tool_version, env!("CARGO_PKG_VERSION"));
        assert!(m.timestamp.ends_with('Z'));
    }
}
