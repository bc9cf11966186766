//! Rule extraction from multi-dimensional FCM centers.
//!
//! Each cluster center is labelled per dimension by its strongest membership
//! function; the rule weight aggregates those strongest degrees. Rules with the
//! same label triple are merged.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcm::{fcm_cluster, FcmConfig, FcmError, FcmParams};
use crate::membership::Partition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("rule set is empty")]
    EmptyRuleSet,
    #[error("cluster count {k} is outside 1..={points}")]
    InvalidK { k: usize, points: usize },
    #[error("{partitions} partitions supplied for {columns} columns")]
    PartitionCountMismatch { partitions: usize, columns: usize },
    #[error("invalid rule {id}: {reason}")]
    InvalidRule { id: String, reason: String },
    #[error("rule {0} appears more than once")]
    DuplicateRule(String),
    #[error(transparent)]
    Fcm(#[from] FcmError),
}

/// How the per-dimension maximal degrees of a center become a rule weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    Product,
    Sum,
}

/// How the weights of rules sharing antecedents and consequent are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineScheme {
    #[default]
    Sum,
    Product,
    BoundedSum,
}

impl CombineScheme {
    pub fn combine(self, acc: f64, w: f64) -> f64 {
        match self {
            CombineScheme::Sum => acc + w,
            CombineScheme::Product => acc * w,
            CombineScheme::BoundedSum => (acc + w).min(1.0),
        }
    }
}

/// Label indices are 1-based, matching the `"3,3,4"` rule notation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedents: Vec<usize>,
    pub consequent: usize,
    pub weight: f64,
}

impl Rule {
    pub fn new(antecedents: Vec<usize>, consequent: usize, weight: f64) -> Self {
        Self {
            antecedents,
            consequent,
            weight,
        }
    }

    pub fn key(&self) -> (Vec<usize>, usize) {
        (self.antecedents.clone(), self.consequent)
    }

    /// Comma-joined antecedent indices followed by the consequent, e.g. `"3,3,4"`.
    pub fn id(&self) -> String {
        rule_id(&self.antecedents, self.consequent)
    }
}

pub fn rule_id(antecedents: &[usize], consequent: usize) -> String {
    let mut s = String::new();
    for a in antecedents {
        write!(s, "{a},").expect("writing to a String");
    }
    write!(s, "{consequent}").expect("writing to a String");
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sample_index: usize,
    pub cluster_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RuleSetDoc", into = "RuleSetDoc")]
pub struct RuleSet {
    provenance: Option<Provenance>,
    rules: Vec<Rule>,
}

#[derive(Serialize, Deserialize)]
struct RuleSetDoc {
    #[serde(default)]
    provenance: Option<Provenance>,
    rules: Vec<Rule>,
}

impl TryFrom<RuleSetDoc> for RuleSet {
    type Error = RuleError;

    fn try_from(doc: RuleSetDoc) -> Result<Self, Self::Error> {
        RuleSet::new(doc.rules, doc.provenance)
    }
}

impl From<RuleSet> for RuleSetDoc {
    fn from(r: RuleSet) -> Self {
        RuleSetDoc {
            provenance: r.provenance,
            rules: r.rules,
        }
    }
}

impl RuleSet {
    /// Checks weights and that no two rules share antecedents and consequent.
    pub fn new(rules: Vec<Rule>, provenance: Option<Provenance>) -> Result<Self, RuleError> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &rules {
            if !(r.weight.is_finite() && r.weight > 0.0) {
                return Err(RuleError::InvalidRule {
                    id: r.id(),
                    reason: format!("weight {} is not positive and finite", r.weight),
                });
            }
            if r.consequent == 0 || r.antecedents.contains(&0) {
                return Err(RuleError::InvalidRule {
                    id: r.id(),
                    reason: "label indices are 1-based".into(),
                });
            }
            if !seen.insert(r.key()) {
                return Err(RuleError::DuplicateRule(r.id()));
            }
        }
        Ok(Self { provenance, rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// First `n` rules, keeping provenance.
    pub fn prefix(&self, n: usize) -> RuleSet {
        RuleSet {
            provenance: self.provenance,
            rules: self.rules[..n.min(self.rules.len())].to_vec(),
        }
    }

    /// Readable `IF <x> IS [label] AND ... THEN <y> IS [label] (w=...)` lines.
    pub fn render(&self, inputs: &[Partition], output: &Partition) -> Vec<String> {
        self.rules
            .iter()
            .map(|r| render_rule(r, inputs, output))
            .collect()
    }
}

pub fn render_rule(rule: &Rule, inputs: &[Partition], output: &Partition) -> String {
    let clauses: Vec<String> = rule
        .antecedents
        .iter()
        .zip(inputs)
        .map(|(&j, p)| format!("<{}> IS [{}]", p.variable(), p.label(j)))
        .collect();
    format!(
        "IF {} THEN <{}> IS [{}] (w={:.4})",
        clauses.join(" AND "),
        output.variable(),
        output.label(rule.consequent),
        rule.weight
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleSchemes {
    pub weight: WeightScheme,
    pub combine: CombineScheme,
}

/// Clusters `points` (inputs then target as the last column) into `k` groups
/// and turns each center into a rule. Duplicates are merged, so the result
/// holds at most `k` rules, ordered by label indices.
pub fn extract_rules(
    points: ArrayView2<'_, f64>,
    partitions: &[Partition],
    k: usize,
    schemes: RuleSchemes,
    params: FcmParams,
    seed: u64,
) -> Result<RuleSet, RuleError> {
    if partitions.len() != points.ncols() {
        return Err(RuleError::PartitionCountMismatch {
            partitions: partitions.len(),
            columns: points.ncols(),
        });
    }
    if partitions.len() < 2 {
        return Err(RuleError::PartitionCountMismatch {
            partitions: partitions.len(),
            columns: 2,
        });
    }
    if k == 0 || k > points.nrows() {
        return Err(RuleError::InvalidK {
            k,
            points: points.nrows(),
        });
    }
    let result = fcm_cluster(points, &FcmConfig::with_params(k, seed, params))?;
    let candidates = result
        .centers
        .rows()
        .into_iter()
        .map(|center| rule_for_center(center.as_slice().expect("standard layout"), partitions, schemes.weight));
    let rules = merge_rules(candidates, schemes.combine);
    RuleSet::new(
        rules,
        Some(Provenance {
            sample_index: 0,
            cluster_count: k,
        }),
    )
}

/// Labels each coordinate of `center` by its strongest membership function.
pub fn rule_for_center(center: &[f64], partitions: &[Partition], scheme: WeightScheme) -> Rule {
    let picks: Vec<(usize, f64)> = center
        .iter()
        .zip(partitions)
        .map(|(&x, p)| p.argmax(x))
        .collect();
    let weight = match scheme {
        WeightScheme::Product => picks.iter().map(|p| p.1).product(),
        WeightScheme::Sum => picks.iter().map(|p| p.1).sum(),
    };
    let (consequent, _) = *picks.last().expect("at least two partitions");
    let antecedents = picks[..picks.len() - 1].iter().map(|p| p.0).collect();
    Rule::new(antecedents, consequent, weight)
}

/// Merges rules sharing antecedents and consequent; output is key-ordered.
pub fn merge_rules(rules: impl IntoIterator<Item = Rule>, scheme: CombineScheme) -> Vec<Rule> {
    let mut merged: BTreeMap<(Vec<usize>, usize), f64> = BTreeMap::new();
    for r in rules {
        merged
            .entry(r.key())
            .and_modify(|w| *w = scheme.combine(*w, r.weight))
            .or_insert(r.weight);
    }
    merged
        .into_iter()
        .map(|((antecedents, consequent), weight)| Rule::new(antecedents, consequent, weight))
        .collect()
}

/// Rescales weights so their mean is 1. Order is kept.
pub fn normalize_weights(rules: &RuleSet) -> Result<RuleSet, RuleError> {
    if rules.is_empty() {
        return Err(RuleError::EmptyRuleSet);
    }
    let total: f64 = rules.rules.iter().map(|r| r.weight).sum();
    let factor = rules.len() as f64 / total;
    Ok(RuleSet {
        provenance: rules.provenance,
        rules: rules
            .rules
            .iter()
            .map(|r| Rule::new(r.antecedents.clone(), r.consequent, r.weight * factor))
            .collect(),
    })
}

/// Number of distinct label combinations across all variables.
pub fn possible_rule_count(partitions: &[Partition]) -> usize {
    partitions.iter().map(Partition::len).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("L{i}")).collect()
    }

    fn part(name: &str, centers: &[f64]) -> Partition {
        Partition::from_centers(name, labels(centers.len()), centers).unwrap()
    }

    fn weights(rs: &RuleSet) -> Vec<f64> {
        rs.rules().iter().map(|r| r.weight).collect()
    }

    fn three_partitions() -> Vec<Partition> {
        vec![
            part("A", &[0.0, 10.0, 20.0]),
            part("B", &[0.0, 5.0, 10.0]),
            part("Y", &[100.0, 200.0, 300.0]),
        ]
    }

    #[test]
    fn rule_ids() {
        assert_eq!(rule_id(&[3, 3], 4), "3,3,4");
        assert_eq!(rule_id(&[1, 1], 1), "1,1,1");
        assert_eq!(Rule::new(vec![7, 7], 7, 1.0).id(), "7,7,7");
    }

    #[test]
    fn possible_counts() {
        let seven: Vec<f64> = (0..7).map(f64::from).collect();
        let p7 = part("x", &seven);
        assert_eq!(possible_rule_count(&[p7.clone(), p7.clone(), p7]), 343);
        assert_eq!(possible_rule_count(&[part("a", &[0.0, 1.0]), part("b", &[0.0, 1.0, 2.0])]), 6);
        assert_eq!(possible_rule_count(&[part("a", &[0.0, 1.0, 2.0, 3.0, 4.0])]), 5);
    }

    #[test]
    fn normalize_examples() {
        let mk = |ws: &[f64]| {
            let rules = ws
                .iter()
                .enumerate()
                .map(|(i, &w)| Rule::new(vec![i + 1], 1, w))
                .collect();
            RuleSet::new(rules, None).unwrap()
        };
        assert_eq!(weights(&normalize_weights(&mk(&[1.0, 3.0])).unwrap()), vec![0.5, 1.5]);
        assert_eq!(weights(&normalize_weights(&mk(&[2.0])).unwrap()), vec![1.0]);
        let w = weights(&normalize_weights(&mk(&[0.2, 0.3, 0.5])).unwrap());
        for (got, want) in w.iter().zip([0.6, 0.9, 1.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(normalize_weights(&mk(&[])), Err(RuleError::EmptyRuleSet));
    }

    #[test]
    fn single_cluster_rule() {
        let parts = three_partitions();
        let rows: Vec<f64> = (0..6)
            .flat_map(|i| {
                let e = (i as f64 - 2.5) * 1e-3;
                [7.0 + e, 4.0 - e, 180.0 + e]
            })
            .collect();
        let pts = Array2::from_shape_vec((6, 3), rows).unwrap();
        let rs = extract_rules(pts.view(), &parts, 1, RuleSchemes::default(), FcmParams::default(), 1).unwrap();
        assert_eq!(rs.len(), 1);
        let r = &rs.rules()[0];
        assert_eq!(r.id(), "2,2,2");
        // Center is the mean point (7, 4, 180).
        let expected = parts[0].degree(2, 7.0) * parts[1].degree(2, 4.0) * parts[2].degree(2, 180.0);
        assert_abs_diff_eq!(r.weight, expected, epsilon = 1e-9);
        assert_eq!(rs.provenance().unwrap().cluster_count, 1);
    }

    #[test]
    fn duplicates_merge_by_scheme() {
        let a = Rule::new(vec![1, 2], 3, 0.2);
        let b = Rule::new(vec![1, 2], 3, 0.3);
        let c = Rule::new(vec![2, 2], 3, 0.9);
        let sum = merge_rules([a.clone(), b.clone(), c.clone()], CombineScheme::Sum);
        assert_eq!(sum.len(), 2);
        assert_abs_diff_eq!(sum[0].weight, 0.5, epsilon = 1e-12);
        assert_eq!(sum[1], c);
        let prod = merge_rules([a.clone(), b.clone()], CombineScheme::Product);
        assert_abs_diff_eq!(prod[0].weight, 0.06, epsilon = 1e-12);
        let bounded = merge_rules([a, b, Rule::new(vec![1, 2], 3, 0.7)], CombineScheme::BoundedSum);
        assert_eq!(bounded[0].weight, 1.0);
    }

    #[test]
    fn three_separated_clusters() {
        let parts = three_partitions();
        let means = [[0.0, 0.0, 100.0], [10.0, 5.0, 200.0], [20.0, 10.0, 300.0]];
        let mut rows = Vec::new();
        for m in &means {
            for j in 0..5 {
                let e = (j as f64 - 2.0) * 0.01;
                rows.extend([m[0] + e, m[1] - e, m[2] + e]);
            }
        }
        let pts = Array2::from_shape_vec((15, 3), rows).unwrap();
        let rs = extract_rules(pts.view(), &parts, 3, RuleSchemes::default(), FcmParams::default(), 8).unwrap();
        // Oracle: label each cluster mean directly.
        let mut expected: Vec<String> = means
            .iter()
            .map(|m| {
                let idx: Vec<usize> = m.iter().zip(&parts).map(|(&x, p)| p.argmax_label(x)).collect();
                rule_id(&idx[..2], idx[2])
            })
            .collect();
        expected.sort();
        let got: Vec<String> = rs.rules().iter().map(Rule::id).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn rejects_bad_k_and_partitions() {
        let parts = three_partitions();
        let pts = Array2::<f64>::zeros((4, 3));
        let s = RuleSchemes::default();
        let p = FcmParams::default();
        assert_eq!(extract_rules(pts.view(), &parts, 0, s, p, 0), Err(RuleError::InvalidK { k: 0, points: 4 }));
        assert_eq!(extract_rules(pts.view(), &parts, 5, s, p, 0), Err(RuleError::InvalidK { k: 5, points: 4 }));
        assert!(matches!(
            extract_rules(pts.view(), &parts[..2], 1, s, p, 0),
            Err(RuleError::PartitionCountMismatch { .. })
        ));
    }

    #[test]
    fn rule_set_validation_and_json() {
        assert!(matches!(
            RuleSet::new(vec![Rule::new(vec![1], 1, 1.0), Rule::new(vec![1], 1, 2.0)], None),
            Err(RuleError::DuplicateRule(_))
        ));
        assert!(RuleSet::new(vec![Rule::new(vec![1], 1, 0.0)], None).is_err());
        assert!(RuleSet::new(vec![Rule::new(vec![0], 1, 1.0)], None).is_err());

        let rs = RuleSet::new(
            vec![Rule::new(vec![3, 3], 4, 1.25)],
            Some(Provenance { sample_index: 6, cluster_count: 12 }),
        )
        .unwrap();
        let v = serde_json::to_value(&rs).unwrap();
        assert_eq!(v["provenance"]["sample_index"], 6);
        assert_eq!(v["rules"][0]["antecedents"], serde_json::json!([3, 3]));
        assert_eq!(v["rules"][0]["consequent"], 4);
        assert_eq!(serde_json::from_value::<RuleSet>(v).unwrap(), rs);
    }

    #[test]
    fn renders_readable_rule() {
        let names = crate::membership::default_labels();
        let c: Vec<f64> = (0..7).map(f64::from).collect();
        let p = |n: &str| Partition::from_centers(n, names.clone(), &c).unwrap();
        let rule = Rule::new(vec![2, 3], 2, 0.5);
        assert_eq!(
            render_rule(&rule, &[p("Attrib"), p("Nonmenu")], &p("Size")),
            "IF <Attrib> IS [Small] AND <Nonmenu> IS [SmallMedium] THEN <Size> IS [Small] (w=0.5000)"
        );
    }

    proptest! {
        #[test]
        fn bounded_and_in_range(
            raw in prop::collection::vec((0.0f64..30.0, 0.0f64..12.0, 50.0f64..350.0), 3..25),
            k_frac in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let parts = three_partitions();
            let n = raw.len();
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let pts = Array2::from_shape_vec((n, 3), raw.iter().flat_map(|t| [t.0, t.1, t.2]).collect()).unwrap();
            let rs = extract_rules(pts.view(), &parts, k, RuleSchemes::default(), FcmParams::default(), seed).unwrap();
            prop_assert!(!rs.is_empty() && rs.len() <= k);
            for r in rs.rules() {
                prop_assert!(r.antecedents.iter().zip(&parts).all(|(&j, p)| (1..=p.len()).contains(&j)));
                prop_assert!((1..=parts[2].len()).contains(&r.consequent));
                prop_assert!(r.weight > 0.0 && r.weight.is_finite());
            }
        }

        #[test]
        fn sum_merge_preserves_total(ws in prop::collection::vec((1usize..3, 0.01f64..2.0), 1..20)) {
            let rules: Vec<Rule> = ws.iter().map(|&(a, w)| Rule::new(vec![a], 1, w)).collect();
            let total: f64 = ws.iter().map(|p| p.1).sum();
            let merged = merge_rules(rules, CombineScheme::Sum);
            let merged_total: f64 = merged.iter().map(|r| r.weight).sum();
            prop_assert!((total - merged_total).abs() <= 1e-9);
        }

        #[test]
        fn normalize_idempotent(ws in prop::collection::vec(0.001f64..100.0, 1..30)) {
            let rules = ws.iter().enumerate().map(|(i, &w)| Rule::new(vec![i + 1], 1, w)).collect();
            let once = normalize_weights(&RuleSet::new(rules, None).unwrap()).unwrap();
            let twice = normalize_weights(&once).unwrap();
            let mean = weights(&once).iter().sum::<f64>() / once.len() as f64;
            prop_assert!((mean - 1.0).abs() <= 1e-9);
            for (a, b) in weights(&once).iter().zip(weights(&twice)) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
