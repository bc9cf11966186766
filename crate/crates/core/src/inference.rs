//! Rule firing and height defuzzification.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::membership::Partition;
use crate::rulegen::{Rule, RuleSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("model has no rules")]
    NoRules,
    #[error("rule {id} references label {index} of {variable}, which has {available}")]
    RuleOutOfRange {
        id: String,
        variable: String,
        index: usize,
        available: usize,
    },
    #[error("non-finite input {value} at position {position}")]
    NonFiniteInput { position: usize, value: f64 },
}

/// Conjunction applied to a rule's antecedent degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiringScheme {
    #[default]
    Product,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefuzzScheme {
    /// Strength-weighted mean of consequent centers.
    #[default]
    WeightedCenters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FisModelDoc", into = "FisModelDoc")]
pub struct FisModel {
    input_partitions: Vec<Partition>,
    output_partition: Partition,
    rules: RuleSet,
    firing_scheme: FiringScheme,
    defuzz_scheme: DefuzzScheme,
    use_rule_weights: bool,
}

#[derive(Serialize, Deserialize)]
struct FisModelDoc {
    input_partitions: Vec<Partition>,
    output_partition: Partition,
    rules: RuleSet,
    #[serde(default)]
    firing_scheme: FiringScheme,
    #[serde(default)]
    defuzz_scheme: DefuzzScheme,
    #[serde(default = "default_true")]
    use_rule_weights: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<FisModelDoc> for FisModel {
    type Error = InferenceError;

    fn try_from(d: FisModelDoc) -> Result<Self, Self::Error> {
        let mut model = FisModel::new(d.input_partitions, d.output_partition, d.rules, d.firing_scheme)?;
        model.defuzz_scheme = d.defuzz_scheme;
        model.use_rule_weights = d.use_rule_weights;
        Ok(model)
    }
}

impl From<FisModel> for FisModelDoc {
    fn from(m: FisModel) -> Self {
        FisModelDoc {
            input_partitions: m.input_partitions,
            output_partition: m.output_partition,
            rules: m.rules,
            firing_scheme: m.firing_scheme,
            defuzz_scheme: m.defuzz_scheme,
            use_rule_weights: m.use_rule_weights,
        }
    }
}

impl FisModel {
    pub fn new(
        input_partitions: Vec<Partition>,
        output_partition: Partition,
        rules: RuleSet,
        firing_scheme: FiringScheme,
    ) -> Result<Self, InferenceError> {
        if rules.is_empty() {
            return Err(InferenceError::NoRules);
        }
        for rule in rules.rules() {
            if rule.antecedents.len() != input_partitions.len() {
                return Err(InferenceError::DimensionMismatch(format!(
                    "rule {} has {} antecedents for {} inputs",
                    rule.id(),
                    rule.antecedents.len(),
                    input_partitions.len()
                )));
            }
            let slots = rule
                .antecedents
                .iter()
                .zip(&input_partitions)
                .chain(std::iter::once((&rule.consequent, &output_partition)));
            for (&index, p) in slots {
                if index == 0 || index > p.len() {
                    return Err(InferenceError::RuleOutOfRange {
                        id: rule.id(),
                        variable: p.variable().to_string(),
                        index,
                        available: p.len(),
                    });
                }
            }
        }
        Ok(Self {
            input_partitions,
            output_partition,
            rules,
            firing_scheme,
            defuzz_scheme: DefuzzScheme::WeightedCenters,
            use_rule_weights: true,
        })
    }

    /// Fire rules on membership degrees alone, ignoring rule weights.
    pub fn without_rule_weights(mut self) -> Self {
        self.use_rule_weights = false;
        self
    }

    pub fn input_partitions(&self) -> &[Partition] {
        &self.input_partitions
    }

    pub fn output_partition(&self) -> &Partition {
        &self.output_partition
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn firing_scheme(&self) -> FiringScheme {
        self.firing_scheme
    }

    pub fn uses_rule_weights(&self) -> bool {
        self.use_rule_weights
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, InferenceError> {
        check_input(x, self.input_partitions.len())?;
        let mut fired = 0;
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for rule in self.rules.rules() {
            let mut s = fire(rule, &self.input_partitions, x, self.firing_scheme);
            if self.use_rule_weights {
                s *= rule.weight;
            }
            if s > 0.0 {
                fired += 1;
                mass += s;
                weighted += s * self.output_partition.center(rule.consequent);
            }
        }
        Ok(Prediction {
            value: (mass > 0.0).then(|| weighted / mass),
            fired_rule_count: fired,
            total_firing_mass: mass,
        })
    }

    /// Predicts every row of `points`, whose last column is the target and is
    /// ignored. Returns the predictions in row order and the covered fraction.
    pub fn predict_set(&self, points: ArrayView2<'_, f64>) -> Result<(Vec<Prediction>, f64), InferenceError> {
        if points.nrows() == 0 {
            return Err(InferenceError::EmptyTestSet);
        }
        let inputs = self.input_partitions.len();
        if points.ncols() != inputs + 1 {
            return Err(InferenceError::DimensionMismatch(format!(
                "test points have {} columns, expected {} inputs plus target",
                points.ncols(),
                inputs
            )));
        }
        let mut row = vec![0.0; inputs];
        let mut predictions = Vec::with_capacity(points.nrows());
        for p in points.rows() {
            for (dst, src) in row.iter_mut().zip(p.iter()) {
                *dst = *src;
            }
            predictions.push(self.predict(&row)?);
        }
        let covered = predictions.iter().filter(|p| p.value.is_some()).count();
        let coverage = covered as f64 / predictions.len() as f64;
        Ok((predictions, coverage))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// `None` when no rule fires.
    pub value: Option<f64>,
    pub fired_rule_count: usize,
    pub total_firing_mass: f64,
}

/// Weighted firing strength of `rule` at input `x`.
pub fn fire_rule(
    rule: &Rule,
    input_partitions: &[Partition],
    x: &[f64],
    scheme: FiringScheme,
) -> Result<f64, InferenceError> {
    check_input(x, rule.antecedents.len())?;
    if input_partitions.len() != x.len() {
        return Err(InferenceError::DimensionMismatch(format!(
            "{} partitions for {} inputs",
            input_partitions.len(),
            x.len()
        )));
    }
    Ok(rule.weight * fire(rule, input_partitions, x, scheme))
}

fn fire(rule: &Rule, partitions: &[Partition], x: &[f64], scheme: FiringScheme) -> f64 {
    let degrees = rule
        .antecedents
        .iter()
        .zip(partitions)
        .zip(x)
        .map(|((&j, p), &v)| p.degree(j, v));
    match scheme {
        FiringScheme::Product => degrees.product(),
        FiringScheme::Min => degrees.fold(f64::INFINITY, f64::min),
    }
}

fn check_input(x: &[f64], expected: usize) -> Result<(), InferenceError> {
    if x.len() != expected {
        return Err(InferenceError::DimensionMismatch(format!(
            "input has {} values, expected {}",
            x.len(),
            expected
        )));
    }
    if let Some((position, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(InferenceError::NonFiniteInput { position, value });
    }
    Ok(())
}
