//! Fuzzy c-means clustering over `n × d` point matrices.
//!
//! The loop alternates a center update and a membership update starting from a
//! seeded random membership matrix. `objective_history[t]` is the objective of
//! the `t`-th (memberships, centers) pair, with centers always recomputed from
//! the memberships they are paired with, so the history is non-increasing.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::rng_from_seed;

/// Distance below which a point counts as sitting on a center.
pub const COINCIDENCE_EPS: f64 = 1e-12;

/// Number of re-initializations attempted after a degenerate cluster.
pub const MAX_REINITS: u64 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcmError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("{points} points cannot form {clusters} clusters")]
    TooFewPoints { points: usize, clusters: usize },
    #[error("non-finite coordinate at point {point}, dimension {dim}")]
    NonFiniteInput { point: usize, dim: usize },
    #[error("invalid clustering config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cluster {cluster} has zero total membership weight")]
    DegenerateCluster { cluster: usize },
}

/// Clustering knobs that stay fixed across runs of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FcmParams {
    /// Fuzzifier `m > 1`.
    pub fuzzifier: f64,
    /// Stop once no membership moves by this much in one iteration.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Min-max scale each dimension to `[0, 1]` before clustering.
    pub scale_dimensions: bool,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            fuzzifier: 2.0,
            tolerance: 1e-6,
            max_iterations: 300,
            scale_dimensions: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    pub clusters: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub params: FcmParams,
}

impl FcmConfig {
    pub fn new(clusters: usize, seed: u64) -> Self {
        Self::with_params(clusters, seed, FcmParams::default())
    }

    pub fn with_params(clusters: usize, seed: u64, params: FcmParams) -> Self {
        Self {
            clusters,
            seed,
            params,
        }
    }

    pub fn validate(&self) -> Result<(), FcmError> {
        let p = &self.params;
        if self.clusters == 0 {
            return Err(FcmError::InvalidConfig("cluster count must be >= 1".into()));
        }
        if !(p.fuzzifier.is_finite() && p.fuzzifier > 1.0) {
            return Err(FcmError::InvalidConfig(format!(
                "fuzzifier must be finite and > 1, got {}",
                p.fuzzifier
            )));
        }
        if !(p.tolerance.is_finite() && p.tolerance > 0.0) {
            return Err(FcmError::InvalidConfig(format!(
                "tolerance must be finite and > 0, got {}",
                p.tolerance
            )));
        }
        if p.max_iterations == 0 {
            return Err(FcmError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult {
    /// `k × d`, one row per cluster.
    pub centers: Array2<f64>,
    /// `n × k`, rows sum to one.
    pub memberships: Array2<f64>,
    pub objective_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Clusters `points` (`n × d`) into `config.clusters` fuzzy clusters.
///
/// A degenerate cluster restarts from a fresh random initialization seeded
/// with `seed + 1`, `seed + 2`, ... up to [`MAX_REINITS`] times.
pub fn fcm_cluster(points: ArrayView2<'_, f64>, config: &FcmConfig) -> Result<FcmResult, FcmError> {
    validate_input(points, config)?;
    let (n, k) = (points.nrows(), config.clusters);

    let mut last_err = None;
    for attempt in 0..=MAX_REINITS {
        let init = random_memberships(n, k, config.seed.wrapping_add(attempt));
        match run_scaled(points, init, config) {
            Err(e @ FcmError::DegenerateCluster { .. }) => last_err = Some(e),
            other => return other,
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

/// Same as [`fcm_cluster`] but starts from the supplied membership matrix and
/// never re-initializes.
pub fn fcm_cluster_from(
    points: ArrayView2<'_, f64>,
    initial: Array2<f64>,
    config: &FcmConfig,
) -> Result<FcmResult, FcmError> {
    validate_input(points, config)?;
    if initial.dim() != (points.nrows(), config.clusters) {
        return Err(FcmError::DimensionMismatch(format!(
            "initial memberships are {:?}, expected ({}, {})",
            initial.dim(),
            points.nrows(),
            config.clusters
        )));
    }
    run_scaled(points, initial, config)
}

/// Uniform random `n × k` matrix with each row normalized to sum to one.
pub fn random_memberships(n: usize, k: usize, seed: u64) -> Array2<f64> {
    let mut rng = rng_from_seed(seed);
    let mut u = Array2::zeros((n, k));
    for mut row in u.rows_mut() {
        // Open interval keeps every entry strictly positive.
        for v in row.iter_mut() {
            *v = rng.random::<f64>() + f64::EPSILON;
        }
        let total = row.sum();
        row.mapv_inplace(|v| v / total);
    }
    u
}

/// `J = Σ_i Σ_k U[i,k]^m · ‖x_i − c_k‖²`.
pub fn fcm_objective(
    points: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    memberships: ArrayView2<'_, f64>,
    fuzzifier: f64,
) -> Result<f64, FcmError> {
    check_dims(points, centers)?;
    if memberships.dim() != (points.nrows(), centers.nrows()) {
        return Err(FcmError::DimensionMismatch(format!(
            "memberships are {:?}, expected ({}, {})",
            memberships.dim(),
            points.nrows(),
            centers.nrows()
        )));
    }
    let mut total = 0.0;
    for (x, u_row) in points.rows().into_iter().zip(memberships.rows()) {
        for (c, &u) in centers.rows().into_iter().zip(u_row.iter()) {
            total += u.powf(fuzzifier) * squared_distance(x.iter(), c.iter());
        }
    }
    Ok(total)
}

/// Membership update `U[i,k] = 1 / Σ_j (d_ik / d_ij)^(2/(m−1))`.
///
/// A point within [`COINCIDENCE_EPS`] of one or more centers splits its mass
/// equally among those centers.
pub fn update_memberships(
    points: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    fuzzifier: f64,
) -> Result<Array2<f64>, FcmError> {
    check_dims(points, centers)?;
    if centers.nrows() == 0 {
        return Err(FcmError::DimensionMismatch("no centers".into()));
    }
    let k = centers.nrows();
    let exponent = 1.0 / (fuzzifier - 1.0);
    let mut u = Array2::zeros((points.nrows(), k));
    let mut d2 = vec![0.0; k];

    for (x, mut row) in points.rows().into_iter().zip(u.rows_mut()) {
        for (slot, c) in d2.iter_mut().zip(centers.rows()) {
            *slot = squared_distance(x.iter(), c.iter());
        }
        let coincident = d2.iter().filter(|&&d| d < COINCIDENCE_EPS * COINCIDENCE_EPS).count();
        if coincident > 0 {
            let share = 1.0 / coincident as f64;
            for (v, &d) in row.iter_mut().zip(&d2) {
                *v = if d < COINCIDENCE_EPS * COINCIDENCE_EPS { share } else { 0.0 };
            }
            continue;
        }
        // Ratios against the nearest center stay in (0, 1] and cannot overflow.
        let nearest = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (v, &d) in row.iter_mut().zip(&d2) {
            *v = (nearest / d).powf(exponent);
            total += *v;
        }
        row.mapv_inplace(|v| v / total);
    }
    Ok(u)
}

/// Center update `c_k = Σ_i U[i,k]^m x_i / Σ_i U[i,k]^m`.
pub fn update_centers(
    points: ArrayView2<'_, f64>,
    memberships: ArrayView2<'_, f64>,
    fuzzifier: f64,
) -> Result<Array2<f64>, FcmError> {
    if memberships.nrows() != points.nrows() {
        return Err(FcmError::DimensionMismatch(format!(
            "{} membership rows for {} points",
            memberships.nrows(),
            points.nrows()
        )));
    }
    let k = memberships.ncols();
    let mut centers = Array2::zeros((k, points.ncols()));
    for (cluster, (u_col, mut center)) in memberships
        .axis_iter(Axis(1))
        .zip(centers.rows_mut())
        .enumerate()
    {
        let mut weight_sum = 0.0;
        for (x, &u) in points.rows().into_iter().zip(u_col.iter()) {
            let w = u.powf(fuzzifier);
            weight_sum += w;
            center.scaled_add(w, &x);
        }
        if !(weight_sum > 0.0 && weight_sum.is_finite()) {
            return Err(FcmError::DegenerateCluster { cluster });
        }
        center.mapv_inplace(|v| v / weight_sum);
    }
    Ok(centers)
}

fn validate_input(points: ArrayView2<'_, f64>, config: &FcmConfig) -> Result<(), FcmError> {
    config.validate()?;
    if points.nrows() == 0 {
        return Err(FcmError::EmptyInput);
    }
    if points.nrows() < config.clusters {
        return Err(FcmError::TooFewPoints {
            points: points.nrows(),
            clusters: config.clusters,
        });
    }
    if let Some(((point, dim), _)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(FcmError::NonFiniteInput { point, dim });
    }
    Ok(())
}

fn run_scaled(
    points: ArrayView2<'_, f64>,
    init: Array2<f64>,
    config: &FcmConfig,
) -> Result<FcmResult, FcmError> {
    if !config.params.scale_dimensions {
        return iterate(points, init, config);
    }
    let (offsets, spans) = min_max(points);
    let mut scaled = points.to_owned();
    for mut row in scaled.rows_mut() {
        for ((v, &lo), &span) in row.iter_mut().zip(&offsets).zip(&spans) {
            *v = (*v - lo) / span;
        }
    }
    let mut result = iterate(scaled.view(), init, config)?;
    for mut row in result.centers.rows_mut() {
        for ((v, &lo), &span) in row.iter_mut().zip(&offsets).zip(&spans) {
            *v = *v * span + lo;
        }
    }
    Ok(result)
}

/// Per-dimension minimum and range; constant dimensions get range 1.
fn min_max(points: ArrayView2<'_, f64>) -> (Vec<f64>, Vec<f64>) {
    points
        .axis_iter(Axis(1))
        .map(|col| {
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            (lo, span)
        })
        .unzip()
}

fn iterate(
    points: ArrayView2<'_, f64>,
    mut memberships: Array2<f64>,
    config: &FcmConfig,
) -> Result<FcmResult, FcmError> {
    let m = config.params.fuzzifier;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let centers = update_centers(points, memberships.view(), m)?;
        history.push(fcm_objective(points, centers.view(), memberships.view(), m)?);
        if converged || iterations >= config.params.max_iterations {
            return Ok(FcmResult {
                centers,
                memberships,
                objective_history: history,
                iterations,
                converged,
            });
        }
        let next = update_memberships(points, centers.view(), m)?;
        let delta = next
            .iter()
            .zip(memberships.iter())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        memberships = next;
        iterations += 1;
        converged = delta < config.params.tolerance;
    }
}

fn check_dims(points: ArrayView2<'_, f64>, centers: ArrayView2<'_, f64>) -> Result<(), FcmError> {
    if points.ncols() != centers.ncols() {
        return Err(FcmError::DimensionMismatch(format!(
            "points have {} dimensions, centers have {}",
            points.ncols(),
            centers.ncols()
        )));
    }
    Ok(())
}

fn squared_distance<'a>(
    a: impl Iterator<Item = &'a f64>,
    b: impl Iterator<Item = &'a f64>,
) -> f64 {
    a.zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
