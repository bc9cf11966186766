//! Triangular membership partitions built from one-dimensional FCM centers.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcm::{fcm_cluster, FcmConfig, FcmError, FcmParams};

/// Sorted centers closer than this are treated as duplicates.
pub const DUPLICATE_CENTER_EPS: f64 = 1e-9;

/// The seven-term vocabulary used for every variable by default.
pub const DEFAULT_LABELS: [&str; 7] = [
    "VerySmall",
    "Small",
    "SmallMedium",
    "Medium",
    "MediumLarge",
    "Large",
    "VeryLarge",
];

pub fn default_labels() -> Vec<String> {
    DEFAULT_LABELS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MembershipError {
    #[error("{values} values cannot support {functions} membership functions")]
    TooFewPoints { values: usize, functions: usize },
    #[error("centers {lower} and {upper} coincide; use fewer membership functions")]
    DuplicateCenters { lower: f64, upper: f64 },
    #[error("{labels} labels supplied for {functions} membership functions")]
    LabelCountMismatch { labels: usize, functions: usize },
    #[error("a partition needs at least 2 membership functions, got {0}")]
    TooFewFunctions(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error(transparent)]
    Fcm(#[from] FcmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MfShape {
    LeftShoulder,
    Interior,
    RightShoulder,
}

/// Triangle with feet `a`, `c` and apex `b`. Shoulders stay at 1 beyond the apex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularMf {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub shape: MfShape,
}

impl TriangularMf {
    pub fn eval(&self, x: f64) -> f64 {
        let rising = || {
            if self.b > self.a {
                ((x - self.a) / (self.b - self.a)).max(0.0)
            } else {
                0.0
            }
        };
        let falling = || {
            if self.c > self.b {
                ((self.c - x) / (self.c - self.b)).max(0.0)
            } else {
                0.0
            }
        };
        match self.shape {
            MfShape::LeftShoulder if x <= self.b => 1.0,
            MfShape::LeftShoulder => falling(),
            MfShape::RightShoulder if x >= self.b => 1.0,
            MfShape::RightShoulder => rising(),
            MfShape::Interior if x == self.b => 1.0,
            MfShape::Interior => rising().min(falling()),
        }
    }
}

/// Ordered family of triangular functions over one variable.
///
/// Every interior function reaches zero at its neighbours' apexes, so degrees
/// sum to one between the first and last center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionDoc", into = "PartitionDoc")]
pub struct Partition {
    variable: String,
    labels: Vec<String>,
    mfs: Vec<TriangularMf>,
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    variable: String,
    labels: Vec<String>,
    mfs: Vec<TriangularMf>,
}

impl TryFrom<PartitionDoc> for Partition {
    type Error = MembershipError;

    fn try_from(doc: PartitionDoc) -> Result<Self, Self::Error> {
        Partition::new(doc.variable, doc.labels, doc.mfs)
    }
}

impl From<Partition> for PartitionDoc {
    fn from(p: Partition) -> Self {
        PartitionDoc {
            variable: p.variable,
            labels: p.labels,
            mfs: p.mfs,
        }
    }
}

impl Partition {
    /// Validates a hand-assembled partition.
    pub fn new(
        variable: impl Into<String>,
        labels: Vec<String>,
        mfs: Vec<TriangularMf>,
    ) -> Result<Self, MembershipError> {
        let m = mfs.len();
        if m < 2 {
            return Err(MembershipError::TooFewFunctions(m));
        }
        if labels.len() != m {
            return Err(MembershipError::LabelCountMismatch {
                labels: labels.len(),
                functions: m,
            });
        }
        let invalid = |msg: String| Err(MembershipError::InvalidPartition(msg));
        for (j, mf) in mfs.iter().enumerate() {
            if ![mf.a, mf.b, mf.c].iter().all(|v| v.is_finite()) {
                return invalid(format!("function {} has a non-finite parameter", j + 1));
            }
            let expected = match j {
                0 => MfShape::LeftShoulder,
                j if j == m - 1 => MfShape::RightShoulder,
                _ => MfShape::Interior,
            };
            if mf.shape != expected {
                return invalid(format!("function {} should be {:?}", j + 1, expected));
            }
            if j > 0 && mf.b <= mfs[j - 1].b {
                return invalid(format!("centers not strictly increasing at function {}", j + 1));
            }
            if j > 0 && mf.a != mfs[j - 1].b {
                return invalid(format!("function {} left foot must equal previous center", j + 1));
            }
            if j + 1 < m && mf.c != mfs[j + 1].b {
                return invalid(format!("function {} right foot must equal next center", j + 1));
            }
            if !(mf.a <= mf.b && mf.b <= mf.c) {
                return invalid(format!("function {} violates a <= b <= c", j + 1));
            }
        }
        Ok(Self {
            variable: variable.into(),
            labels,
            mfs,
        })
    }

    /// Places one triangle apex on each of the strictly increasing `centers`.
    pub fn from_centers(
        variable: impl Into<String>,
        labels: Vec<String>,
        centers: &[f64],
    ) -> Result<Self, MembershipError> {
        let m = centers.len();
        if m < 2 {
            return Err(MembershipError::TooFewFunctions(m));
        }
        for w in centers.windows(2) {
            if w[1] - w[0] < DUPLICATE_CENTER_EPS {
                return Err(MembershipError::DuplicateCenters {
                    lower: w[0],
                    upper: w[1],
                });
            }
        }
        let mfs = (0..m)
            .map(|j| {
                let b = centers[j];
                let a = if j == 0 { b } else { centers[j - 1] };
                let c = if j + 1 == m { b } else { centers[j + 1] };
                let shape = match j {
                    0 => MfShape::LeftShoulder,
                    j if j + 1 == m => MfShape::RightShoulder,
                    _ => MfShape::Interior,
                };
                TriangularMf { a, b, c, shape }
            })
            .collect();
        Self::new(variable, labels, mfs)
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mfs(&self) -> &[TriangularMf] {
        &self.mfs
    }

    pub fn len(&self) -> usize {
        self.mfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mfs.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.mfs.iter().map(|mf| mf.b).collect()
    }

    /// Apex of the 1-based label `index`.
    pub fn center(&self, index: usize) -> f64 {
        self.mfs[index - 1].b
    }

    /// Name of the 1-based label `index`.
    pub fn label(&self, index: usize) -> &str {
        &self.labels[index - 1]
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.mfs.iter().map(|mf| mf.eval(x)).collect()
    }

    /// Degree of the 1-based label `index` at `x`.
    pub fn degree(&self, index: usize, x: f64) -> f64 {
        self.mfs[index - 1].eval(x)
    }

    /// 1-based index of the label with the highest degree at `x`, together
    /// with that degree. Ties go to the smaller index.
    pub fn argmax(&self, x: f64) -> (usize, f64) {
        let mut best = (1, self.mfs[0].eval(x));
        for (j, mf) in self.mfs.iter().enumerate().skip(1) {
            let d = mf.eval(x);
            if d > best.1 {
                best = (j + 1, d);
            }
        }
        best
    }

    pub fn argmax_label(&self, x: f64) -> usize {
        self.argmax(x).0
    }
}

/// Runs 1-D FCM with `mf_count` clusters over `values` and turns the sorted
/// centers into a partition.
pub fn build_partition(
    variable: &str,
    values: &[f64],
    mf_count: usize,
    labels: &[String],
    params: FcmParams,
    seed: u64,
) -> Result<Partition, MembershipError> {
    if mf_count < 2 {
        return Err(MembershipError::TooFewFunctions(mf_count));
    }
    if labels.len() != mf_count {
        return Err(MembershipError::LabelCountMismatch {
            labels: labels.len(),
            functions: mf_count,
        });
    }
    if values.len() < mf_count {
        return Err(MembershipError::TooFewPoints {
            values: values.len(),
            functions: mf_count,
        });
    }
    let points = Array2::from_shape_vec((values.len(), 1), values.to_vec())
        .expect("one column per value");
    let result = fcm_cluster(points.view(), &FcmConfig::with_params(mf_count, seed, params))?;
    let mut centers: Vec<f64> = result.centers.column(0).to_vec();
    centers.sort_by(f64::total_cmp);
    Partition::from_centers(variable, labels.to_vec(), &centers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("L{i}")).collect()
    }

    fn partition(centers: &[f64]) -> Partition {
        Partition::from_centers("x", labels(centers.len()), centers).unwrap()
    }

    #[test]
    fn eval_examples() {
        let tri = TriangularMf { a: 0.0, b: 5.0, c: 10.0, shape: MfShape::Interior };
        assert_eq!(tri.eval(5.0), 1.0);
        assert_eq!(tri.eval(2.5), 0.5);
        assert_eq!(tri.eval(-1.0), 0.0);
        assert_eq!(tri.eval(12.0), 0.0);
        let left = TriangularMf { a: 3.0, b: 3.0, c: 7.0, shape: MfShape::LeftShoulder };
        assert_eq!(left.eval(-100.0), 1.0);
        assert_eq!(left.eval(5.0), 0.5);
        assert_eq!(left.eval(8.0), 0.0);
        let right = TriangularMf { a: 3.0, b: 7.0, c: 7.0, shape: MfShape::RightShoulder };
        assert_eq!(right.eval(1e9), 1.0);
        assert_eq!(right.eval(5.0), 0.5);
    }

    #[test]
    fn build_two_groups() {
        let values = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let names = vec!["Small".to_string(), "Large".to_string()];
        let p = build_partition("v", &values, 2, &names, FcmParams::default(), 11).unwrap();
        let mfs = p.mfs();
        assert_eq!(mfs[0].shape, MfShape::LeftShoulder);
        assert_eq!(mfs[1].shape, MfShape::RightShoulder);
        assert_abs_diff_eq!(mfs[0].b, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(mfs[0].c, 10.0, epsilon = 1e-3);
        assert_abs_diff_eq!(mfs[1].a, 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(mfs[1].b, 10.0, epsilon = 1e-3);
        assert_eq!(p.labels(), names.as_slice());
    }

    #[test]
    fn seven_functions_in_label_order() {
        let values: Vec<f64> = (0..70).map(|i| (i / 10) as f64 * 100.0 + (i % 10) as f64).collect();
        let p = build_partition("Size", &values, 7, &default_labels(), FcmParams::default(), 3).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.label(1), "VerySmall");
        assert_eq!(p.label(7), "VeryLarge");
        let c = p.centers();
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        for (j, &b) in c.iter().enumerate() {
            let degrees = p.eval(b);
            assert_eq!(degrees.iter().sum::<f64>(), 1.0);
            assert_eq!(degrees[j], 1.0);
        }
    }

    #[test]
    fn recovers_point_masses() {
        let masses = [1.0, 7.0, 20.0, 33.0];
        let values: Vec<f64> = masses.iter().flat_map(|&v| std::iter::repeat_n(v, 5)).collect();
        let p = build_partition("x", &values, 4, &labels(4), FcmParams::default(), 99).unwrap();
        for (got, want) in p.centers().iter().zip(masses) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn build_errors() {
        let p = FcmParams::default();
        assert_eq!(
            build_partition("x", &[1.0, 2.0], 3, &labels(3), p, 0),
            Err(MembershipError::TooFewPoints { values: 2, functions: 3 })
        );
        assert!(matches!(
            build_partition("x", &[1.0, 2.0, 3.0], 3, &labels(2), p, 0),
            Err(MembershipError::LabelCountMismatch { .. })
        ));
        assert!(matches!(
            build_partition("x", &[5.0; 6], 2, &labels(2), p, 0),
            Err(MembershipError::DuplicateCenters { .. })
        ));
    }

    #[test]
    fn partition_vector_examples() {
        let p = partition(&[0.0, 10.0, 20.0, 30.0]);
        assert_eq!(p.eval(15.0), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(p.eval(20.0), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(p.eval(-3.0), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.eval(99.0), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn argmax_examples() {
        let p = partition(&[0.0, 10.0, 20.0, 30.0]);
        assert_eq!(p.argmax_label(20.0), 3);
        assert_eq!(p.argmax_label(15.0), 2);
        assert_eq!(p.argmax_label(31.0), 4);
        assert_eq!(p.argmax_label(-31.0), 1);
    }

    #[test]
    fn json_field_names() {
        let p = partition(&[1.0, 2.0]);
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        assert_eq!(v["variable"], "x");
        assert_eq!(v["labels"][0], "L1");
        assert_eq!(v["mfs"][0]["shape"], "left_shoulder");
        assert_eq!(v["mfs"][1]["a"], 1.0);
        let back: Partition = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_malformed_documents() {
        let doc = r#"{"variable":"x","labels":["a","b"],"mfs":[
            {"a":0,"b":0,"c":1,"shape":"left_shoulder"},
            {"a":0.5,"b":1,"c":1,"shape":"right_shoulder"}]}"#;
        assert!(serde_json::from_str::<Partition>(doc).is_err());
        let doc = r#"{"variable":"x","labels":["a"],"mfs":[
            {"a":0,"b":0,"c":1,"shape":"left_shoulder"},
            {"a":0,"b":1,"c":1,"shape":"right_shoulder"}]}"#;
        assert!(serde_json::from_str::<Partition>(doc).is_err());
    }

    fn centers_strategy() -> impl Strategy<Value = Vec<f64>> {
        (prop::collection::vec(0.01f64..50.0, 1..9), -1000.0f64..1000.0).prop_map(|(gaps, start)| {
            let mut c = vec![start];
            for g in gaps {
                let last = *c.last().unwrap();
                c.push(last + g);
            }
            c
        })
    }

    proptest! {
        #[test]
        fn ruspini_inside_range(c in centers_strategy(), t in 0.0f64..=1.0) {
            let p = partition(&c);
            let x = c[0] + t * (c[c.len() - 1] - c[0]);
            prop_assert!((p.eval(x).iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn argmax_non_decreasing(c in centers_strategy(), mut xs in prop::collection::vec(-2000.0f64..2000.0, 2..20)) {
            let p = partition(&c);
            xs.sort_by(f64::total_cmp);
            let labels: Vec<usize> = xs.iter().map(|&x| p.argmax_label(x)).collect();
            prop_assert!(labels.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn degrees_in_unit_interval(c in centers_strategy(), x in -5000.0f64..5000.0) {
            let p = partition(&c);
            prop_assert!(p.eval(x).iter().all(|d| (0.0..=1.0).contains(d)));
        }
    }
}
