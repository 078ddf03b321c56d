//! Extremal direction detection.
//!
//! [`detect`] keeps the `k` rows with the largest l1 norm, projects each
//! exceedance `x / t` onto the simplex and tallies the face each projection
//! lands in. [`damex`] is the rank-based l-infinity baseline using
//! epsilon-thickened rectangles. Both share [`DetectionReport`] and the same
//! one-shot threshold rule: with `C` the set of faces observed at least once,
//! faces with mass `<= p / |C|` are dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::datagen::{rank_transform, GroundTruth, SampleMatrix};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::projection::{project_sorted_slice, support_of};

/// Default threshold weight `p`.
pub const DEFAULT_P: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// Number of exceedances; `None` means `ceil(sqrt(n))`.
    pub k: Option<usize>,
    /// Threshold weight `p >= 0`.
    pub p: f64,
    /// Rectangle tolerance in `(0, 1)`; used by DAMEX only.
    pub epsilon: Option<f64>,
    /// Rank-transform the margins before projecting (Algorithm 1 path only;
    /// DAMEX always rank-transforms).
    pub rank_transform: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            k: None,
            p: DEFAULT_P,
            epsilon: None,
            rank_transform: false,
        }
    }
}

impl DetectionConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_rank_transform(mut self, on: bool) -> Self {
        self.rank_transform = on;
        self
    }

    /// Effective `k` for a sample of `n` rows.
    pub fn resolve_k(&self, n: usize) -> Result<usize> {
        let k = self.k.unwrap_or_else(|| default_k(n));
        if k == 0 {
            return Err(Error::param("k must be at least 1"));
        }
        if k >= n {
            return Err(Error::param(format!(
                "k = {k} must be smaller than the number of rows n = {n}"
            )));
        }
        Ok(k)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(Error::param(format!("p must be finite and >= 0, got {}", self.p)));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::param(format!("epsilon must lie in (0, 1), got {eps}")));
            }
        }
        Ok(())
    }
}

/// `ceil(sqrt(n))`.
pub fn default_k(n: usize) -> usize {
    let r = (n as f64).sqrt().ceil() as usize;
    // Guard against floating error on perfect squares.
    if r > 0 && (r - 1) * (r - 1) >= n {
        r - 1
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Projection,
    Damex,
}

/// A detected face and its empirical mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionMass {
    pub indices: Direction,
    pub t_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub method: Method,
    pub k: usize,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub rank_transform: bool,
    pub n: usize,
    pub d: usize,
}

/// Output of [`detect`] and [`damex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub config: ReportConfig,
    /// Radial threshold: l1 for the projection method, `n / k` for DAMEX.
    pub t: f64,
    pub n_exceed: usize,
    /// Cut-off `p / |C|` applied to the masses.
    pub threshold: f64,
    /// Surviving faces sorted by mass (descending), then indices.
    pub directions: Vec<DirectionMass>,
    /// Pre-threshold exceedance counts of every observed face.
    #[serde(skip)]
    pub counts: BTreeMap<Direction, usize>,
}

impl DetectionReport {
    pub fn detected(&self) -> BTreeSet<Direction> {
        self.directions.iter().map(|m| m.indices.clone()).collect()
    }

    pub fn mass(&self, beta: &Direction) -> Option<f64> {
        self.directions
            .iter()
            .find(|m| &m.indices == beta)
            .map(|m| m.t_beta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn assemble(
    config: ReportConfig,
    t: f64,
    counts: HashMap<Direction, usize>,
    n_exceed: usize,
    normalizer: f64,
) -> DetectionReport {
    let counts: BTreeMap<Direction, usize> = counts.into_iter().collect();
    let threshold = if counts.is_empty() {
        0.0
    } else {
        config.p / counts.len() as f64
    };
    let mut directions: Vec<DirectionMass> = counts
        .iter()
        .map(|(b, &c)| DirectionMass {
            indices: b.clone(),
            t_beta: c as f64 / normalizer,
        })
        .filter(|m| m.t_beta > threshold)
        .collect();
    directions.sort_by(|a, b| {
        b.t_beta
            .total_cmp(&a.t_beta)
            .then_with(|| a.indices.cmp(&b.indices))
    });
    DetectionReport {
        config,
        t,
        n_exceed,
        threshold,
        directions,
        counts,
    }
}

/// Face of `pi(x / t)`.
pub fn assign_direction(x: &[f64], t: f64) -> Result<Direction> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param(format!("threshold must be positive, got {t}")));
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / t).collect();
    let (w, _) = project_sorted_slice(&scaled, 1.0)?;
    Ok(support_of(&w.values))
}

/// Radial threshold: the `(k+1)`-th largest l1 norm. Returns `(t, norms)`.
pub fn norm_threshold(m: &SampleMatrix, k: usize) -> Result<(f64, Vec<f64>)> {
    let norms: Vec<f64> = m.iter_rows().map(|r| r.iter().sum()).collect();
    if norms.iter().all(|&s| s == 0.0) {
        return Err(Error::DegenerateInput);
    }
    let mut sorted = norms.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let t = sorted[k];
    if !(t > 0.0) {
        return Err(Error::param(format!(
            "the {}-th largest norm is zero; decrease k",
            k + 1
        )));
    }
    Ok((t, norms))
}

/// Sparse-regular-variation detection on nonnegative data.
pub fn detect(m: &SampleMatrix, cfg: &DetectionConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let n = m.rows();
    let k = cfg.resolve_k(n)?;
    let transformed;
    let data = if cfg.rank_transform {
        transformed = rank_transform(m)?;
        &transformed
    } else {
        m.validate_nonneg()?;
        m
    };
    let (t, norms) = norm_threshold(data, k)?;

    let mut counts: HashMap<Direction, usize> = HashMap::new();
    let mut n_exceed = 0usize;
    for (row, &norm) in data.iter_rows().zip(&norms) {
        if norm > t {
            *counts.entry(assign_direction(row, t)?).or_insert(0) += 1;
            n_exceed += 1;
        }
    }
    let config = ReportConfig {
        method: Method::Projection,
        k,
        p: cfg.p,
        epsilon: None,
        rank_transform: cfg.rank_transform,
        n,
        d: m.cols(),
    };
    Ok(assemble(config, t, counts, n_exceed, n_exceed as f64))
}

/// DAMEX face of a rank-transformed row, or `None` if `max_j v_j <= t_inf`.
pub fn rectangle_direction(v: &[f64], t_inf: f64, epsilon: f64) -> Option<Direction> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > t_inf) {
        return None;
    }
    let cut = epsilon * t_inf;
    let idx: Vec<usize> = (0..v.len()).filter(|&j| v[j] > cut).collect();
    Some(Direction::from_sorted_unchecked(idx))
}

/// DAMEX baseline: rank-transform margins, keep rows with
/// `max_j V_j > n/k`, assign `beta = {j : V_j > epsilon n/k}`. Masses are
/// counts divided by `k`.
pub fn damex(m: &SampleMatrix, cfg: &DetectionConfig) -> Result<DetectionReport> {
    cfg.validate()?;
    let epsilon = cfg
        .epsilon
        .ok_or_else(|| Error::param("DAMEX needs epsilon"))?;
    let n = m.rows();
    let k = cfg.resolve_k(n)?;
    if m.as_slice().iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput);
    }
    let v = rank_transform(m)?;
    let t_inf = n as f64 / k as f64;

    let mut counts: HashMap<Direction, usize> = HashMap::new();
    let mut n_exceed = 0usize;
    for row in v.iter_rows() {
        if let Some(beta) = rectangle_direction(row, t_inf, epsilon) {
            *counts.entry(beta).or_insert(0) += 1;
            n_exceed += 1;
        }
    }
    let config = ReportConfig {
        method: Method::Damex,
        k,
        p: cfg.p,
        epsilon: Some(epsilon),
        rank_transform: true,
        n,
        d: m.cols(),
    };
    Ok(assemble(config, t_inf, counts, n_exceed, k as f64))
}

/// Type-1 (spurious) and type-2 (missed) error counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub type1: usize,
    pub type2: usize,
}

pub fn compare_errors(report: &DetectionReport, truth: &GroundTruth) -> ErrorCounts {
    compare_sets(&report.detected(), &truth.directions)
}

pub fn compare_sets(detected: &BTreeSet<Direction>, truth: &BTreeSet<Direction>) -> ErrorCounts {
    ErrorCounts {
        type1: detected.difference(truth).count(),
        type2: truth.difference(detected).count(),
    }
}
