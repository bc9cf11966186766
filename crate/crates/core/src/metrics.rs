//! Residual accuracy, best-model selection and approach comparison.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::Prediction;
use crate::stats::{mean, median};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no predictions were made")]
    NoPredictionsMade,
    #[error("{predictions} predictions for {actuals} actual values")]
    LengthMismatch { predictions: usize, actuals: usize },
    #[error("no records to select from")]
    EmptyRecords,
    #[error("records are not aligned by rule count: {0}")]
    MisalignedRecords(String),
    #[error("no samples to summarize")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    AbsRes,
    AveRes,
    MedRes,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::AbsRes, Measure::AveRes, Measure::MedRes];

    pub fn name(self) -> &'static str {
        match self {
            Measure::AbsRes => "abs_res",
            Measure::AveRes => "ave_res",
            Measure::MedRes => "med_res",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Every record competes.
    Ignore,
    /// Only records at the highest coverage reached compete.
    MaxCoverage,
}

impl CoverageMode {
    pub fn name(self) -> &'static str {
        match self {
            CoverageMode::Ignore => "ignore",
            CoverageMode::MaxCoverage => "max_coverage",
        }
    }
}

/// Denominator of the average residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveDenominator {
    #[default]
    PredictionsMade,
    TestSize,
}

/// Absolute-residual summary over covered observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub abs_sum: f64,
    pub mean: f64,
    pub median: f64,
    pub predictions_made: usize,
}

/// Summarizes `|prediction − actual|` over the observations that received a
/// prediction. Uncovered observations are skipped, not imputed.
pub fn residual_metrics(
    predictions: &[Option<f64>],
    actuals: &[f64],
    denominator: AveDenominator,
) -> Result<Residuals, MetricsError> {
    if predictions.len() != actuals.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            actuals: actuals.len(),
        });
    }
    let residuals: Vec<f64> = predictions
        .iter()
        .zip(actuals)
        .filter_map(|(p, a)| p.map(|p| (p - a).abs()))
        .collect();
    if residuals.is_empty() {
        return Err(MetricsError::NoPredictionsMade);
    }
    let abs_sum: f64 = residuals.iter().sum();
    let mean = match denominator {
        AveDenominator::PredictionsMade => mean(&residuals),
        AveDenominator::TestSize => abs_sum / actuals.len() as f64,
    };
    Ok(Residuals {
        abs_sum,
        mean,
        median: median(&residuals),
        predictions_made: residuals.len(),
    })
}

/// Accuracy and coverage of one model on one test subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    pub rule_count: usize,
    pub coverage: f64,
    pub predictions_made: usize,
    pub test_size: usize,
    /// `None` when no prediction was made.
    pub abs_res: Option<f64>,
    pub ave_res: Option<f64>,
    pub med_res: Option<f64>,
}

impl AccuracyRecord {
    pub fn from_predictions(
        rule_count: usize,
        predictions: &[Prediction],
        actuals: &[f64],
        denominator: AveDenominator,
    ) -> Result<Self, MetricsError> {
        let values: Vec<Option<f64>> = predictions.iter().map(|p| p.value).collect();
        let test_size = actuals.len();
        let residuals = match residual_metrics(&values, actuals, denominator) {
            Ok(r) => Some(r),
            Err(MetricsError::NoPredictionsMade) => None,
            Err(e) => return Err(e),
        };
        let predictions_made = residuals.map_or(0, |r| r.predictions_made);
        Ok(Self {
            rule_count,
            coverage: predictions_made as f64 / test_size as f64,
            predictions_made,
            test_size,
            abs_res: residuals.map(|r| r.abs_sum),
            ave_res: residuals.map(|r| r.mean),
            med_res: residuals.map(|r| r.median),
        })
    }

    pub fn measure(&self, measure: Measure) -> Option<f64> {
        match measure {
            Measure::AbsRes => self.abs_res,
            Measure::AveRes => self.ave_res,
            Measure::MedRes => self.med_res,
        }
    }

    fn measure_vector(&self) -> [f64; 3] {
        Measure::ALL.map(|m| self.measure(m).unwrap_or(f64::INFINITY))
    }
}

/// Record with the lowest `measure`, ties going to fewer rules and then to the
/// lexicographically smaller (abs, ave, med) vector. Records without
/// predictions never win.
pub fn select_best(
    records: &[AccuracyRecord],
    measure: Measure,
    mode: CoverageMode,
) -> Result<AccuracyRecord, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    let scored = records.iter().filter(|r| r.measure(measure).is_some());
    let max_coverage = scored.clone().map(|r| r.coverage).fold(f64::NEG_INFINITY, f64::max);
    scored
        .filter(|r| mode == CoverageMode::Ignore || r.coverage == max_coverage)
        .min_by(|a, b| {
            let (ma, mb) = (a.measure(measure).unwrap(), b.measure(measure).unwrap());
            ma.total_cmp(&mb)
                .then(a.rule_count.cmp(&b.rule_count))
                .then_with(|| lex_cmp(&a.measure_vector(), &b.measure_vector()))
        })
        .copied()
        .ok_or(MetricsError::NoPredictionsMade)
}

fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Head-to-head result of two approaches over aligned rule counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rule_counts: usize,
    pub best_a: usize,
    pub best_b: usize,
    pub pct_a: f64,
    pub pct_b: f64,
}

/// At each rule count the lower measure is best; exact ties (including both
/// approaches making no predictions) count for both.
pub fn compare_approaches(
    records_a: &[AccuracyRecord],
    records_b: &[AccuracyRecord],
    measure: Measure,
) -> Result<Comparison, MetricsError> {
    if records_a.len() != records_b.len() {
        return Err(MetricsError::MisalignedRecords(format!(
            "{} records vs {}",
            records_a.len(),
            records_b.len()
        )));
    }
    if records_a.is_empty() {
        return Err(MetricsError::EmptyRecords);
    }
    let (mut best_a, mut best_b) = (0, 0);
    for (a, b) in records_a.iter().zip(records_b) {
        if a.rule_count != b.rule_count {
            return Err(MetricsError::MisalignedRecords(format!(
                "rule count {} paired with {}",
                a.rule_count, b.rule_count
            )));
        }
        // Missing predictions rank worst.
        let key = |r: &AccuracyRecord| r.measure(measure).unwrap_or(f64::INFINITY);
        match key(a).total_cmp(&key(b)) {
            Ordering::Less => best_a += 1,
            Ordering::Greater => best_b += 1,
            Ordering::Equal => {
                best_a += 1;
                best_b += 1;
            }
        }
    }
    let total = records_a.len();
    Ok(Comparison {
        rule_counts: total,
        best_a,
        best_b,
        pct_a: 100.0 * best_a as f64 / total as f64,
        pct_b: 100.0 * best_b as f64 / total as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleComparison {
    pub sample_index: usize,
    pub by_measure: BTreeMap<Measure, Comparison>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentSummary {
    pub mean_a: f64,
    pub mean_b: f64,
    pub median_a: f64,
    pub median_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub per_sample: Vec<SampleComparison>,
    pub overall: BTreeMap<Measure, PercentSummary>,
}

/// Mean and median of each measure's percentages across samples.
pub fn summarize_comparison(per_sample: &[SampleComparison]) -> Result<ComparisonSummary, MetricsError> {
    if per_sample.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut overall = BTreeMap::new();
    for measure in Measure::ALL {
        let cells: Vec<&Comparison> = per_sample.iter().filter_map(|s| s.by_measure.get(&measure)).collect();
        if cells.is_empty() {
            continue;
        }
        let a: Vec<f64> = cells.iter().map(|c| c.pct_a).collect();
        let b: Vec<f64> = cells.iter().map(|c| c.pct_b).collect();
        overall.insert(
            measure,
            PercentSummary {
                mean_a: mean(&a),
                mean_b: mean(&b),
                median_a: median(&a),
                median_b: median(&b),
            },
        );
    }
    Ok(ComparisonSummary {
        per_sample: per_sample.to_vec(),
        overall,
    })
}

/// Rounds a full-precision value for report tables.
pub fn display_round(x: f64) -> i64 {
    x.round() as i64
}
