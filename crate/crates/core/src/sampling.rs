//! Build/test splits and Welch t-tests across samples.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{rng_from_seed, split_seed};
use crate::stats::{mean, student_t_two_sided, variance};

/// Significance levels reported on every t-test.
pub const ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("invalid split sizes: {0}")]
    InvalidSizes(String),
    #[error("t-test needs at least 2 observations per sample, got {x} and {y}")]
    TooFewObservations { x: usize, y: usize },
    #[error("both samples have zero variance")]
    ZeroVariance,
    #[error("non-finite observation")]
    NonFiniteInput,
    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
}

/// One random build/test partition of the row indices. Both index lists are
/// ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    /// 1-based.
    #[serde(rename = "index")]
    pub sample_index: usize,
    #[serde(rename = "build")]
    pub build_indices: Vec<usize>,
    #[serde(rename = "test")]
    pub test_indices: Vec<usize>,
}

/// Archival form of a split sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitArchive {
    pub seed: u64,
    pub samples: Vec<SplitPlan>,
}

/// Draws `sample_count` independent uniform splits of `0..n`, each with
/// `build_size` build rows. Sample `i` shuffles with the seed
/// `seed ^ (i * 0x9E3779B97F4A7C15)`.
pub fn make_splits(
    n: usize,
    build_size: usize,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<SplitPlan>, SamplingError> {
    if build_size == 0 || build_size >= n {
        return Err(SamplingError::InvalidSizes(format!(
            "build size {build_size} must be in 1..{n}"
        )));
    }
    if sample_count == 0 {
        return Err(SamplingError::InvalidSizes("sample count must be >= 1".into()));
    }
    Ok((1..=sample_count)
        .map(|sample_index| {
            let mut rng = rng_from_seed(split_seed(seed, sample_index));
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let (build, test) = order.split_at(build_size);
            let mut build_indices = build.to_vec();
            let mut test_indices = test.to_vec();
            build_indices.sort_unstable();
            test_indices.sort_unstable();
            SplitPlan {
                sample_index,
                build_indices,
                test_indices,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    /// Keyed by the alpha level formatted as a decimal, e.g. `"0.05"`.
    pub significant_at: BTreeMap<String, bool>,
}

impl TTestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom
/// and a two-sided p-value.
pub fn welch_t_test(x: &[f64], y: &[f64]) -> Result<TTestResult, SamplingError> {
    if x.len() < 2 || y.len() < 2 {
        return Err(SamplingError::TooFewObservations { x: x.len(), y: y.len() });
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(SamplingError::NonFiniteInput);
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let sx = variance(x) / nx;
    let sy = variance(y) / ny;
    let se2 = sx + sy;
    if se2 <= 0.0 {
        return Err(SamplingError::ZeroVariance);
    }
    let t = (mean(x) - mean(y)) / se2.sqrt();
    let df = se2 * se2 / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    let p = student_t_two_sided(t, df);
    let significant_at = ALPHAS.iter().map(|&a| (format!("{a}"), p < a)).collect();
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        significant_at,
    })
}

/// Which side of each split the uniformity tests compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSide {
    #[default]
    Build,
    Test,
}

impl SplitPlan {
    pub fn side(&self, side: SplitSide) -> &[usize] {
        match side {
            SplitSide::Build => &self.build_indices,
            SplitSide::Test => &self.test_indices,
        }
    }
}

/// Symmetric matrix of Welch tests between every pair of splits, comparing
/// `column` restricted to the chosen side. The diagonal is `None`; entry
/// `[j][i]` is the test with arguments swapped (negated t).
pub fn pairwise_uniformity(
    splits: &[SplitPlan],
    column: &[f64],
    side: SplitSide,
) -> Result<Vec<Vec<Option<TTestResult>>>, SamplingError> {
    if splits.len() < 2 {
        return Err(SamplingError::InvalidSizes("need at least 2 splits".into()));
    }
    let values: Vec<Vec<f64>> = splits
        .iter()
        .map(|s| {
            s.side(side)
                .iter()
                .map(|&i| {
                    column.get(i).copied().ok_or(SamplingError::IndexOutOfRange {
                        index: i,
                        rows: column.len(),
                    })
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let s = splits.len();
    let mut matrix = vec![vec![None; s]; s];
    for i in 0..s {
        for j in (i + 1)..s {
            matrix[i][j] = Some(welch_t_test(&values[i], &values[j])?);
            matrix[j][i] = Some(welch_t_test(&values[j], &values[i])?);
        }
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn default_shape_splits() {
        let plans = make_splits(70, 50, 10, 2011).unwrap();
        assert_eq!(plans.len(), 10);
        for (i, p) in plans.iter().enumerate() {
            assert_eq!(p.sample_index, i + 1);
            assert_eq!(p.build_indices.len(), 50);
            assert_eq!(p.test_indices.len(), 20);
            let mut all: Vec<usize> = p.build_indices.iter().chain(&p.test_indices).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..70).collect::<Vec<_>>());
        }
        assert_ne!(plans[0], plans[1]);
        assert_eq!(plans, make_splits(70, 50, 10, 2011).unwrap());
    }

    #[test]
    fn minimal_split() {
        let plans = make_splits(2, 1, 1, 0).unwrap();
        assert_eq!(plans[0].build_indices.len(), 1);
        assert_eq!(plans[0].test_indices.len(), 1);
    }

    #[test]
    fn split_errors() {
        assert!(make_splits(5, 5, 1, 0).is_err());
        assert!(make_splits(5, 0, 1, 0).is_err());
        assert!(make_splits(5, 2, 0, 0).is_err());
    }

    #[test]
    fn archive_json_shape() {
        let archive = SplitArchive { seed: 4, samples: make_splits(4, 2, 1, 4).unwrap() };
        let v = serde_json::to_value(&archive).unwrap();
        assert_eq!(v["seed"], 4);
        assert_eq!(v["samples"][0]["index"], 1);
        assert_eq!(v["samples"][0]["build"].as_array().unwrap().len(), 2);
        assert_eq!(v["samples"][0]["test"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn welch_identical_samples() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = welch_t_test(&x, &x).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn welch_shifted_samples() {
        // Hand evaluation: means 3 and 4, both variances 2.5, se = 1.
        let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_abs_diff_eq!(r.t_statistic, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.degrees_of_freedom, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 0.3466, epsilon = 1e-4);
        assert!(!r.significant_at["0.05"]);
    }

    #[test]
    fn welch_separated_samples() {
        let x = [10.0, 10.1, 9.9, 10.2, 9.8];
        let y = [20.0, 20.1, 19.9, 20.2, 19.8];
        let r = welch_t_test(&x, &y).unwrap();
        // se² = 2 * 0.025 / 5 = 0.01, so t = -10 / 0.1.
        assert_abs_diff_eq!(r.t_statistic, -100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.degrees_of_freedom, 8.0, epsilon = 1e-9);
        assert!(r.p_value < 0.05);
        assert!(r.significant_at["0.05"]);
        assert!(r.significant(0.01));
    }

    #[test]
    fn welch_errors() {
        assert_eq!(welch_t_test(&[1.0], &[1.0, 2.0]), Err(SamplingError::TooFewObservations { x: 1, y: 2 }));
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0]), Err(SamplingError::ZeroVariance));
        assert_eq!(welch_t_test(&[2.0, f64::NAN], &[2.0, 1.0]), Err(SamplingError::NonFiniteInput));
    }

    #[test]
    fn uniformity_matrix() {
        let column: Vec<f64> = (0..8).map(f64::from).collect();
        let same = SplitPlan { sample_index: 1, build_indices: vec![0, 2, 5], test_indices: vec![1, 3, 4, 6, 7] };
        let m = pairwise_uniformity(&[same.clone(), same.clone()], &column, SplitSide::Build).unwrap();
        assert!(m[0][0].is_none());
        assert_eq!(m[0][1].as_ref().unwrap().p_value, 1.0);

        let column: Vec<f64> = vec![1.0, 1.2, 0.9, 1.1, 50.0, 51.0, 49.5, 50.5];
        let low = SplitPlan { sample_index: 1, build_indices: vec![0, 1, 2, 3], test_indices: vec![4, 5, 6, 7] };
        let high = SplitPlan { sample_index: 2, build_indices: vec![4, 5, 6, 7], test_indices: vec![0, 1, 2, 3] };
        let m = pairwise_uniformity(&[low.clone(), high.clone()], &column, SplitSide::Build).unwrap();
        assert!(m[0][1].as_ref().unwrap().p_value < 0.05);
        let m = pairwise_uniformity(&[low, high], &column, SplitSide::Test).unwrap();
        assert!(m[1][0].as_ref().unwrap().p_value < 0.05);

        let column: Vec<f64> = (0..70).map(|i| f64::from(i * 7 % 13)).collect();
        let plans = make_splits(70, 50, 10, 1).unwrap();
        let m = pairwise_uniformity(&plans, &column, SplitSide::Build).unwrap();
        let pairs = (0..10).flat_map(|i| (i + 1..10).map(move |j| (i, j))).filter(|&(i, j)| m[i][j].is_some()).count();
        assert_eq!(pairs, 45);
    }

    proptest! {
        #[test]
        fn swap_negates_t(x in prop::collection::vec(-100.0f64..100.0, 2..30), y in prop::collection::vec(-100.0f64..100.0, 2..30)) {
            let a = welch_t_test(&x, &y).unwrap();
            let b = welch_t_test(&y, &x).unwrap();
            prop_assert_eq!(a.t_statistic, -b.t_statistic);
            prop_assert!((a.p_value - b.p_value).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
            prop_assert!(a.degrees_of_freedom > 0.0);
        }

        #[test]
        fn splits_partition_rows(n in 2usize..200, frac in 0.0f64..1.0, s in 1usize..5, seed in any::<u64>()) {
            let build = 1 + ((n - 2) as f64 * frac) as usize;
            for p in make_splits(n, build, s, seed).unwrap() {
                let mut seen = vec![false; n];
                for &i in p.build_indices.iter().chain(&p.test_indices) {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
                prop_assert!(seen.iter().all(|&b| b));
                prop_assert_eq!(p.build_indices.len(), build);
            }
        }
    }
}
