//! Full, Sampled and Top-N model-building regimes swept over rule-set size.
//!
//! Every FCM run gets its own derived seed, so each (sample, rule count) unit
//! is independent. Units run in parallel; results are collected in
//! (sample, rule count) order, so output does not depend on scheduling.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError};
use crate::fcm::{FcmError, FcmParams};
use crate::inference::{FiringScheme, FisModel, InferenceError};
use crate::membership::{build_partition, default_labels, MembershipError, Partition};
use crate::metrics::{
    compare_approaches, select_best, summarize_comparison, AccuracyRecord, AveDenominator, ComparisonSummary,
    CoverageMode, Measure, MetricsError, SampleComparison,
};
use crate::rulegen::{
    extract_rules, normalize_weights, possible_rule_count, CombineScheme, Provenance, Rule, RuleError, RuleSchemes,
    RuleSet, WeightScheme,
};
use crate::sampling::{make_splits, pairwise_uniformity, SamplingError, SplitArchive, SplitPlan, SplitSide, TTestResult};
use crate::seed::derive_seed;

const TAG_PARTITION: u64 = 1;
const TAG_RULES: u64 = 2;

/// Sample index used for models built from every row.
pub const FULL_SAMPLE: usize = 0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Fcm(#[from] FcmError),
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ExperimentError {
    /// Whether the failure came from the numerics rather than the input data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ExperimentError::Fcm(_)
                | ExperimentError::Membership(_)
                | ExperimentError::Rule(_)
                | ExperimentError::Inference(_)
                | ExperimentError::Metrics(_)
        ) || matches!(self, ExperimentError::Sampling(SamplingError::ZeroVariance))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub predictors: Vec<String>,
    pub target: String,
    /// Membership functions per variable.
    pub mf_count: usize,
    pub labels: Vec<String>,
    pub rule_sweep_max: usize,
    pub sample_count: usize,
    pub build_size: usize,
    pub top_n: usize,
    pub seed: u64,
    pub weight_scheme: WeightScheme,
    pub combine_scheme: CombineScheme,
    pub firing_scheme: FiringScheme,
    pub normalize_weights: bool,
    pub use_rule_weights: bool,
    pub fcm: FcmParams,
    pub ttest_side: SplitSide,
    pub ave_denominator: AveDenominator,
    /// Measure used to pick each sample's best model.
    pub best_measure: Measure,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            predictors: vec!["Attrib".into(), "Nonmenu".into()],
            target: "Size".into(),
            mf_count: 7,
            labels: default_labels(),
            rule_sweep_max: 50,
            sample_count: 10,
            build_size: 50,
            top_n: 50,
            seed: 2011,
            weight_scheme: WeightScheme::Product,
            combine_scheme: CombineScheme::Sum,
            firing_scheme: FiringScheme::Product,
            normalize_weights: true,
            use_rule_weights: true,
            fcm: FcmParams::default(),
            ttest_side: SplitSide::Build,
            ave_denominator: AveDenominator::PredictionsMade,
            best_measure: Measure::AbsRes,
        }
    }
}

impl ExperimentConfig {
    /// Column order the experiment works in: predictors, then target.
    pub fn columns(&self) -> Vec<String> {
        let mut c = self.predictors.clone();
        c.push(self.target.clone());
        c
    }

    pub fn schemes(&self) -> RuleSchemes {
        RuleSchemes {
            weight: self.weight_scheme,
            combine: self.combine_scheme,
        }
    }

    /// Checks the config against a dataset with `rows` rows.
    pub fn validate(&self, rows: usize) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidConfig(m));
        if self.predictors.is_empty() {
            return bad("at least one predictor is required".into());
        }
        if self.columns().iter().any(String::is_empty) {
            return bad("column names must be non-empty".into());
        }
        if self.mf_count < 2 {
            return bad(format!("mf_count must be >= 2, got {}", self.mf_count));
        }
        if self.labels.len() != self.mf_count {
            return bad(format!("{} labels for mf_count {}", self.labels.len(), self.mf_count));
        }
        if self.rule_sweep_max == 0 || self.top_n == 0 || self.sample_count == 0 {
            return bad("rule_sweep_max, top_n and sample_count must be >= 1".into());
        }
        if self.build_size == 0 || self.build_size >= rows {
            return bad(format!("build_size {} must be in 1..{rows}", self.build_size));
        }
        if self.rule_sweep_max > self.build_size {
            return bad(format!(
                "rule_sweep_max {} exceeds build_size {}",
                self.rule_sweep_max, self.build_size
            ));
        }
        if self.mf_count > self.build_size {
            return bad(format!("mf_count {} exceeds build_size {}", self.mf_count, self.build_size));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Full,
    Sampled,
    TopN,
}

impl Approach {
    pub fn name(self) -> &'static str {
        match self {
            Approach::Full => "full",
            Approach::Sampled => "sampled",
            Approach::TopN => "top_n",
        }
    }
}

/// One sample's accuracy across rule-set sizes `1..=R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub approach: Approach,
    pub sample_index: usize,
    pub partitions: Vec<Partition>,
    pub records: Vec<AccuracyRecord>,
    pub rule_sets: Vec<RuleSet>,
}

impl SweepResult {
    /// Σ k over the sweep: the rule slots requested before merging.
    pub fn rule_slots(&self) -> usize {
        self.records.iter().map(|r| r.rule_count).sum()
    }

    /// Rules actually present after merging, summed over the sweep.
    pub fn rules_generated(&self) -> usize {
        self.rule_sets.iter().map(RuleSet::len).sum()
    }
}

/// The experiment's view of a dataset: designated columns plus splits.
struct Prepared {
    data: Array2<f64>,
    splits: Vec<SplitPlan>,
}

fn prepare(dataset: &Dataset, config: &ExperimentConfig) -> Result<Prepared, ExperimentError> {
    let projected = dataset.project(&config.columns())?;
    config.validate(projected.nrows())?;
    let splits = make_splits(projected.nrows(), config.build_size, config.sample_count, config.seed)?;
    Ok(Prepared {
        data: projected.rows().to_owned(),
        splits,
    })
}

/// One partition per column of `points`, clustered independently.
pub fn build_partitions(
    points: ArrayView2<'_, f64>,
    config: &ExperimentConfig,
    sample_index: usize,
) -> Result<Vec<Partition>, ExperimentError> {
    config
        .columns()
        .iter()
        .enumerate()
        .map(|(v, name)| {
            let values = points.column(v).to_vec();
            let seed = derive_seed(config.seed, &[TAG_PARTITION, sample_index as u64, v as u64]);
            build_partition(name, &values, config.mf_count, &config.labels, config.fcm, seed)
                .map_err(ExperimentError::from)
        })
        .collect()
}

/// Extracts the `k`-cluster rule set for one sample, normalized if configured.
pub fn build_rule_set(
    points: ArrayView2<'_, f64>,
    partitions: &[Partition],
    k: usize,
    config: &ExperimentConfig,
    sample_index: usize,
) -> Result<RuleSet, ExperimentError> {
    let seed = derive_seed(config.seed, &[TAG_RULES, sample_index as u64, k as u64]);
    let rules = extract_rules(points, partitions, k, config.schemes(), config.fcm, seed)?;
    let rules = if config.normalize_weights {
        normalize_weights(&rules)?
    } else {
        rules
    };
    Ok(rules.with_provenance(Provenance {
        sample_index,
        cluster_count: k,
    }))
}

pub fn assemble_model(
    partitions: &[Partition],
    rules: RuleSet,
    config: &ExperimentConfig,
) -> Result<FisModel, ExperimentError> {
    let (inputs, output) = partitions.split_at(partitions.len() - 1);
    let model = FisModel::new(inputs.to_vec(), output[0].clone(), rules, config.firing_scheme)?;
    Ok(if config.use_rule_weights {
        model
    } else {
        model.without_rule_weights()
    })
}

/// Builds partitions and a `k`-rule FIS from every row of `dataset`.
pub fn fit_model(dataset: &Dataset, config: &ExperimentConfig, k: usize) -> Result<FisModel, ExperimentError> {
    let projected = dataset.project(&config.columns())?;
    let points = projected.rows();
    if k == 0 || k > points.nrows() {
        return Err(RuleError::InvalidK { k, points: points.nrows() }.into());
    }
    let partitions = build_partitions(points, config, FULL_SAMPLE)?;
    let rules = build_rule_set(points, &partitions, k, config, FULL_SAMPLE)?;
    assemble_model(&partitions, rules, config)
}

fn evaluate(
    model: &FisModel,
    test: ArrayView2<'_, f64>,
    rule_count: usize,
    config: &ExperimentConfig,
) -> Result<AccuracyRecord, ExperimentError> {
    let (predictions, _) = model.predict_set(test)?;
    let actuals: Vec<f64> = test.column(test.ncols() - 1).to_vec();
    Ok(AccuracyRecord::from_predictions(
        rule_count,
        &predictions,
        &actuals,
        config.ave_denominator,
    )?)
}

/// Rule sets for `k = 1..=R` built from `points`.
fn sweep_rule_sets(
    points: ArrayView2<'_, f64>,
    partitions: &[Partition],
    config: &ExperimentConfig,
    sample_index: usize,
) -> Result<Vec<RuleSet>, ExperimentError> {
    (1..=config.rule_sweep_max)
        .into_par_iter()
        .map(|k| build_rule_set(points, partitions, k, config, sample_index))
        .collect()
}

fn evaluate_sweep(
    approach: Approach,
    sample_index: usize,
    partitions: &[Partition],
    rule_sets: &[RuleSet],
    test: ArrayView2<'_, f64>,
    config: &ExperimentConfig,
) -> Result<SweepResult, ExperimentError> {
    let records = rule_sets
        .par_iter()
        .enumerate()
        .map(|(i, rules)| {
            let model = assemble_model(partitions, rules.clone(), config)?;
            evaluate(&model, test, i + 1, config)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepResult {
        approach,
        sample_index,
        partitions: partitions.to_vec(),
        records,
        rule_sets: rule_sets.to_vec(),
    })
}

/// Models from all rows, each size evaluated on every sample's test subset.
pub fn run_full(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<SweepResult>, ExperimentError> {
    let prep = prepare(dataset, config)?;
    run_full_prepared(&prep, config)
}

fn full_partitions(prep: &Prepared, config: &ExperimentConfig) -> Result<Vec<Partition>, ExperimentError> {
    build_partitions(prep.data.view(), config, FULL_SAMPLE)
}

fn run_full_prepared(prep: &Prepared, config: &ExperimentConfig) -> Result<Vec<SweepResult>, ExperimentError> {
    let partitions = full_partitions(prep, config)?;
    let rule_sets = sweep_rule_sets(prep.data.view(), &partitions, config, FULL_SAMPLE)?;
    prep.splits
        .par_iter()
        .map(|split| {
            let test = prep.data.select(ndarray::Axis(0), &split.test_indices);
            evaluate_sweep(Approach::Full, split.sample_index, &partitions, &rule_sets, test.view(), config)
        })
        .collect()
}

/// Per sample: partitions and rule sets from the build subset, evaluated on
/// that sample's test subset.
pub fn run_sampled(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<SweepResult>, ExperimentError> {
    let prep = prepare(dataset, config)?;
    run_sampled_prepared(&prep, config)
}

fn run_sampled_prepared(prep: &Prepared, config: &ExperimentConfig) -> Result<Vec<SweepResult>, ExperimentError> {
    prep.splits
        .par_iter()
        .map(|split| {
            let build = prep.data.select(ndarray::Axis(0), &split.build_indices);
            let test = prep.data.select(ndarray::Axis(0), &split.test_indices);
            let partitions = build_partitions(build.view(), config, split.sample_index)?;
            let rule_sets = sweep_rule_sets(build.view(), &partitions, config, split.sample_index)?;
            evaluate_sweep(Approach::Sampled, split.sample_index, &partitions, &rule_sets, test.view(), config)
        })
        .collect()
}

/// Builds on the first split only: the `sweep` command's single build set.
pub fn run_single_sweep(dataset: &Dataset, config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    let single = ExperimentConfig {
        sample_count: 1,
        ..config.clone()
    };
    let prep = prepare(dataset, &single)?;
    let mut sweeps = run_sampled_prepared(&prep, &single)?;
    Ok(sweeps.remove(0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleCount {
    pub rule_id: String,
    pub antecedents: Vec<usize>,
    pub consequent: usize,
    pub count: usize,
}

/// Occurrences of each rule across every rule set of every sweep, most
/// frequent first, ties by ascending rule id.
pub fn rule_frequency(sweeps: &[SweepResult]) -> Vec<RuleCount> {
    let mut counts: BTreeMap<(Vec<usize>, usize), usize> = BTreeMap::new();
    for rule in sweeps.iter().flat_map(|s| &s.rule_sets).flat_map(|rs| rs.rules()) {
        *counts.entry(rule.key()).or_default() += 1;
    }
    let mut out: Vec<RuleCount> = counts
        .into_iter()
        .map(|((antecedents, consequent), count)| RuleCount {
            rule_id: crate::rulegen::rule_id(&antecedents, consequent),
            antecedents,
            consequent,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.rule_id.cmp(&b.rule_id)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopNResult {
    /// Most frequent rules first; weights proportional to frequency.
    pub mega_set: RuleSet,
    pub sweeps: Vec<SweepResult>,
    pub warning: Option<String>,
}

/// Aggregates the `top_n` most frequent sampled rules into one rule base and
/// evaluates each prefix of it on every sample's test subset, using
/// partitions built from the full dataset.
pub fn run_top_n(
    sampled: &[SweepResult],
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<TopNResult, ExperimentError> {
    let prep = prepare(dataset, config)?;
    let partitions = full_partitions(&prep, config)?;
    run_top_n_prepared(sampled, &prep, &partitions, config)
}

fn run_top_n_prepared(
    sampled: &[SweepResult],
    prep: &Prepared,
    partitions: &[Partition],
    config: &ExperimentConfig,
) -> Result<TopNResult, ExperimentError> {
    if sampled.len() != prep.splits.len() {
        return Err(ExperimentError::InvalidConfig(format!(
            "{} sampled sweeps for {} samples",
            sampled.len(),
            prep.splits.len()
        )));
    }
    let frequency = rule_frequency(sampled);
    let warning = (frequency.len() < config.top_n).then(|| {
        format!(
            "only {} distinct rules available for top_n = {}; using all of them",
            frequency.len(),
            config.top_n
        )
    });
    let chosen: Vec<Rule> = frequency
        .iter()
        .take(config.top_n)
        .map(|rc| Rule::new(rc.antecedents.clone(), rc.consequent, rc.count as f64))
        .collect();
    let mega_set = normalize_weights(&RuleSet::new(chosen, None)?)?;
    let prefixes: Vec<RuleSet> = (1..=mega_set.len()).map(|t| mega_set.prefix(t)).collect();
    let sweeps = prep
        .splits
        .par_iter()
        .map(|split| {
            let test = prep.data.select(ndarray::Axis(0), &split.test_indices);
            evaluate_sweep(Approach::TopN, split.sample_index, partitions, &prefixes, test.view(), config)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TopNResult {
        mega_set,
        sweeps,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRuleStats {
    pub sample_index: usize,
    pub rule_slots: usize,
    pub rules_generated: usize,
    pub distinct_rules: usize,
    pub most_frequent: Option<RuleCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleStats {
    pub possible_rule_count: usize,
    pub per_sample: Vec<SampleRuleStats>,
    pub distinct_rules_all_samples: usize,
    /// Frequencies pooled over every sampled sweep.
    pub frequency_all_samples: Vec<RuleCount>,
    pub frequency_per_sample: Vec<Vec<RuleCount>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestModel {
    pub approach: Approach,
    pub sample_index: usize,
    pub coverage_mode: CoverageMode,
    pub measure: Measure,
    pub record: AccuracyRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FullBasis {
    /// Each approach's best model for the sample (coverage ignored).
    BestPerSample,
    /// Each approach at the largest rule count all approaches share.
    FixedK,
}

impl FullBasis {
    pub fn name(self) -> &'static str {
        match self {
            FullBasis::BestPerSample => "best_per_sample",
            FullBasis::FixedK => "fixed_k",
        }
    }
}

/// Three-way accuracy comparison including the Full benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullComparisonRow {
    pub basis: FullBasis,
    pub sample_index: usize,
    pub measure: Measure,
    pub rule_count: Option<usize>,
    pub full: Option<f64>,
    pub sampled: Option<f64>,
    pub top_n: Option<f64>,
    pub winners: Vec<Approach>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTTest {
    pub sample_a: usize,
    pub sample_b: usize,
    pub result: TTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub splits: SplitArchive,
    pub full: Vec<SweepResult>,
    pub sampled: Vec<SweepResult>,
    pub top_n: Vec<SweepResult>,
    pub top_n_rules: RuleSet,
    pub rule_stats: RuleStats,
    /// Sampled approach, one row per sample and coverage mode.
    pub best_models: Vec<BestModel>,
    /// Sampled (`a`) against Top-N (`b`), aligned by rule count.
    pub comparison: ComparisonSummary,
    pub full_comparison: Vec<FullComparisonRow>,
    pub ttests: Vec<PairTTest>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    /// Number of measures on which Top-N's mean "best" share is at least the
    /// Sampled approach's.
    pub fn top_n_mean_wins(&self) -> usize {
        self.comparison
            .overall
            .values()
            .filter(|s| s.mean_b >= s.mean_a)
            .count()
    }
}

pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let prep = prepare(dataset, config)?;
    let partitions = full_partitions(&prep, config)?;
    let full = run_full_prepared(&prep, config)?;
    let sampled = run_sampled_prepared(&prep, config)?;
    let top = run_top_n_prepared(&sampled, &prep, &partitions, config)?;
    let mut warnings: Vec<String> = top.warning.iter().cloned().collect();

    let rule_stats = rule_stats(&sampled, &partitions);

    let mut best_models = Vec::new();
    for mode in [CoverageMode::Ignore, CoverageMode::MaxCoverage] {
        for sweep in &sampled {
            match select_best(&sweep.records, config.best_measure, mode) {
                Ok(record) => best_models.push(BestModel {
                    approach: Approach::Sampled,
                    sample_index: sweep.sample_index,
                    coverage_mode: mode,
                    measure: config.best_measure,
                    record,
                }),
                Err(MetricsError::NoPredictionsMade) => warnings.push(format!(
                    "sample {}: no sampled model made any prediction",
                    sweep.sample_index
                )),
                Err(e) => return Err(e.into()),
            }
        }
    }

    let aligned = config.rule_sweep_max.min(top.mega_set.len());
    if aligned < config.rule_sweep_max {
        warnings.push(format!(
            "sampled vs top_n comparison covers rule counts 1..={aligned} only"
        ));
    }
    let per_sample = sampled
        .iter()
        .zip(&top.sweeps)
        .map(|(s, t)| {
            let by_measure = Measure::ALL
                .iter()
                .map(|&m| Ok((m, compare_approaches(&s.records[..aligned], &t.records[..aligned], m)?)))
                .collect::<Result<BTreeMap<_, _>, MetricsError>>()?;
            Ok(SampleComparison {
                sample_index: s.sample_index,
                by_measure,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let comparison = summarize_comparison(&per_sample)?;

    let full_comparison = full_comparison(&full, &sampled, &top.sweeps, aligned);

    let target = prep.data.column(prep.data.ncols() - 1).to_vec();
    let matrix = pairwise_uniformity(&prep.splits, &target, config.ttest_side)?;
    let mut ttests = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, cell) in row.iter().enumerate().skip(i + 1) {
            if let Some(result) = cell {
                ttests.push(PairTTest {
                    sample_a: prep.splits[i].sample_index,
                    sample_b: prep.splits[j].sample_index,
                    result: result.clone(),
                });
            }
        }
    }

    let report = ExperimentReport {
        config: config.clone(),
        dataset: DatasetSummary {
            rows: prep.data.nrows(),
            columns: config.columns(),
        },
        splits: SplitArchive {
            seed: config.seed,
            samples: prep.splits.clone(),
        },
        full,
        sampled,
        top_n: top.sweeps,
        top_n_rules: top.mega_set,
        rule_stats,
        best_models,
        comparison,
        full_comparison,
        ttests,
        warnings,
    };
    let mut report = report;
    if report.top_n_mean_wins() < 2 {
        report.warnings.push(format!(
            "top_n mean best-share matched or beat sampled on only {} of 3 measures",
            report.top_n_mean_wins()
        ));
    }
    Ok(report)
}

fn rule_stats(sampled: &[SweepResult], partitions: &[Partition]) -> RuleStats {
    let frequency_per_sample: Vec<Vec<RuleCount>> = sampled
        .iter()
        .map(|s| rule_frequency(std::slice::from_ref(s)))
        .collect();
    let per_sample = sampled
        .iter()
        .zip(&frequency_per_sample)
        .map(|(s, freq)| SampleRuleStats {
            sample_index: s.sample_index,
            rule_slots: s.rule_slots(),
            rules_generated: s.rules_generated(),
            distinct_rules: freq.len(),
            most_frequent: freq.first().cloned(),
        })
        .collect();
    let frequency_all_samples = rule_frequency(sampled);
    RuleStats {
        possible_rule_count: possible_rule_count(partitions),
        per_sample,
        distinct_rules_all_samples: frequency_all_samples.len(),
        frequency_all_samples,
        frequency_per_sample,
    }
}

fn full_comparison(
    full: &[SweepResult],
    sampled: &[SweepResult],
    top: &[SweepResult],
    aligned: usize,
) -> Vec<FullComparisonRow> {
    let mut rows = Vec::new();
    for basis in [FullBasis::BestPerSample, FullBasis::FixedK] {
        for ((f, s), t) in full.iter().zip(sampled).zip(top) {
            for measure in Measure::ALL {
                let pick = |sweep: &SweepResult| match basis {
                    FullBasis::BestPerSample => select_best(&sweep.records, measure, CoverageMode::Ignore)
                        .ok()
                        .and_then(|r| r.measure(measure)),
                    FullBasis::FixedK => sweep.records.get(aligned - 1).and_then(|r| r.measure(measure)),
                };
                let values = [(Approach::Full, pick(f)), (Approach::Sampled, pick(s)), (Approach::TopN, pick(t))];
                let best = values
                    .iter()
                    .filter_map(|v| v.1)
                    .fold(f64::INFINITY, f64::min);
                let winners = values
                    .iter()
                    .filter(|v| v.1 == Some(best))
                    .map(|v| v.0)
                    .collect();
                rows.push(FullComparisonRow {
                    basis,
                    sample_index: f.sample_index,
                    measure,
                    rule_count: (basis == FullBasis::FixedK).then_some(aligned),
                    full: values[0].1,
                    sampled: values[1].1,
                    top_n: values[2].1,
                    winners,
                });
            }
        }
    }
    rows
}
