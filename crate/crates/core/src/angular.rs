//! Angular laws: spectral models for `Theta`, the projected angular vector
//! `Z = pi(Y Theta)` with `Y ~ Pareto(alpha)` independent of `Theta`, and
//! Monte-Carlo estimators of face probabilities computed two ways (as
//! expectations over `Theta`, and as direct frequencies of `Z`).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::projection::{project_sorted_slice, support_of, SimplexPoint};
use crate::rng::{pareto, stream_rng};
use crate::stats::{proportion_se, Accumulator};

/// Stream offsets so estimators sharing a master seed draw independently.
const STREAM_THETA: u64 = 0;
const STREAM_Z: u64 = 1;
const STREAM_CONDITIONAL: u64 = 2;
const STREAM_PROJECTED: u64 = 3;

/// Law of the spectral vector `Theta` on the unit simplex.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularLaw {
    /// `Theta = a` almost surely.
    Constant(Vec<f64>),
    /// `Theta` uniform on the simplex of dimension `d`.
    Uniform { d: usize },
    /// `Theta = e(beta)/|beta|` with probability `p(beta)`.
    Discrete { d: usize, atoms: Vec<(Direction, f64)> },
}

/// A spectral model: tail index plus angular law.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    alpha: f64,
    law: AngularLaw,
    label: String,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("tail index must be positive, got {alpha}")));
    }
    Ok(())
}

impl SpectralModel {
    /// `Theta = a / |a|` almost surely; `a` must be nonnegative with positive sum.
    pub fn constant(a: &[f64], alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        crate::projection::validate_nonneg(a)?;
        let total: f64 = a.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateInput);
        }
        let a: Vec<f64> = a.iter().map(|x| x / total).collect();
        Ok(SpectralModel {
            alpha,
            label: format!("constant{a:?}"),
            law: AngularLaw::Constant(a),
        })
    }

    /// The proportional model with `a = (7, 6, 4) / 17`.
    pub fn proportional(alpha: f64) -> Result<Self> {
        let mut m = Self::constant(&[7.0, 6.0, 4.0], alpha)?;
        m.label = "proportional(7,6,4)/17".into();
        Ok(m)
    }

    /// `Theta` uniform on the `d`-dimensional simplex. For `d = 2`, `Theta_1 ~ U(0, 1)`.
    pub fn uniform(d: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if d < 2 {
            return Err(Error::param("uniform law needs d >= 2"));
        }
        Ok(SpectralModel {
            alpha,
            law: AngularLaw::Uniform { d },
            label: format!("uniform(d={d})"),
        })
    }

    /// Discrete law placing mass `p(beta)` on the face barycenters `e(beta)/|beta|`.
    /// Weights must be nonnegative and sum to one within `1e-12`; duplicates are merged.
    pub fn discrete(d: usize, atoms: Vec<(Direction, f64)>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if d == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        let mut merged: BTreeMap<Direction, f64> = BTreeMap::new();
        for (beta, p) in atoms {
            if beta.min_dimension() > d {
                return Err(Error::Shape(format!("direction {beta} exceeds dimension {d}")));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::param(format!("invalid weight {p} for {beta}")));
            }
            *merged.entry(beta).or_insert(0.0) += p;
        }
        let total: f64 = merged.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("weights sum to {total}, expected 1")));
        }
        let atoms: Vec<(Direction, f64)> = merged.into_iter().filter(|(_, p)| *p > 0.0).collect();
        Ok(SpectralModel {
            alpha,
            label: format!("discrete(d={d}, atoms={})", atoms.len()),
            law: AngularLaw::Discrete { d, atoms },
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn law(&self) -> &AngularLaw {
        &self.law
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        match &self.law {
            AngularLaw::Constant(a) => a.len(),
            AngularLaw::Uniform { d } => *d,
            AngularLaw::Discrete { d, .. } => *d,
        }
    }

    /// Draws `Theta`.
    pub fn sample_theta<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.law {
            AngularLaw::Constant(a) => a.clone(),
            AngularLaw::Uniform { d } => {
                let e: Vec<f64> = (0..*d).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            }
            AngularLaw::Discrete { d, atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = &atoms[atoms.len() - 1].0;
                for (beta, p) in atoms {
                    acc += p;
                    if u < acc {
                        chosen = beta;
                        break;
                    }
                }
                chosen.barycenter(*d).expect("validated at construction")
            }
        }
    }

    /// Exact `P(Theta in C_beta)` where known.
    pub fn theta_face_law(&self) -> Option<BTreeMap<Direction, f64>> {
        match &self.law {
            AngularLaw::Constant(a) => Some(BTreeMap::from([(support_of(a), 1.0)])),
            AngularLaw::Uniform { d } => Some(BTreeMap::from([(Direction::full(*d).ok()?, 1.0)])),
            AngularLaw::Discrete { atoms, .. } => Some(atoms.iter().cloned().collect()),
        }
    }

    /// Exact `P(Z in C_beta)` where a closed form is available: discrete laws
    /// (where `Z = Theta`), constant laws (nested prefix chain of the sorted
    /// coordinates) and the two-dimensional uniform law.
    pub fn z_face_law(&self) -> Option<BTreeMap<Direction, f64>> {
        match &self.law {
            AngularLaw::Constant(a) => Some(constant_chain_law(a, self.alpha)),
            AngularLaw::Uniform { d: 2 } => {
                let axis = 1.0 / (2.0 * (self.alpha + 1.0));
                Some(BTreeMap::from([
                    (Direction::singleton(0), axis),
                    (Direction::singleton(1), axis),
                    (Direction::full(2).ok()?, self.alpha / (self.alpha + 1.0)),
                ]))
            }
            AngularLaw::Uniform { .. } => None,
            AngularLaw::Discrete { atoms, .. } => Some(atoms.iter().cloned().collect()),
        }
    }
}

/// Face law of `Z` for `Theta = a` a.s. With `a` sorted decreasingly and
/// `s_r = a_1 + .. + a_r`, the prefix `{1..r}` has probability
/// `(s_r - r a_{r+1})^alpha - (s_r - r a_r)^alpha` (with `a_{d+1} = 0`).
fn constant_chain_law(a: &[f64], alpha: f64) -> BTreeMap<Direction, f64> {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(i.cmp(&j)));
    let mut law = BTreeMap::new();
    let mut prefix_sum = 0.0;
    for r in 1..=a.len() {
        let current = a[order[r - 1]];
        prefix_sum += current;
        let next = if r < a.len() { a[order[r]] } else { 0.0 };
        let rf = r as f64;
        let upper = (prefix_sum - rf * next).max(0.0).powf(alpha);
        let lower = (prefix_sum - rf * current).max(0.0).powf(alpha);
        let p = upper - lower;
        if p > 0.0 {
            let beta = Direction::new(order[..r].to_vec()).expect("nonempty prefix");
            law.insert(beta, p);
        }
    }
    law
}

/// Draws `(Y, Z)` with `Z = pi(Y Theta)`.
pub fn sample_yz<R: Rng + ?Sized>(model: &SpectralModel, rng: &mut R) -> (f64, SimplexPoint) {
    let theta = model.sample_theta(rng);
    let y = pareto(rng, model.alpha);
    let scaled: Vec<f64> = theta.iter().map(|t| t * y).collect();
    let (z, _) = project_sorted_slice(&scaled, 1.0).expect("Y Theta has positive mass");
    (y, z)
}

/// Draws the angular vector `Z = pi(Y Theta)`.
pub fn sample_z<R: Rng + ?Sized>(model: &SpectralModel, rng: &mut R) -> SimplexPoint {
    sample_yz(model, rng).1
}

/// A Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: u64,
}

impl McEstimate {
    fn from_acc(acc: &Accumulator) -> Self {
        McEstimate {
            estimate: acc.mean(),
            std_error: acc.std_error(),
            n: acc.count(),
        }
    }

    fn from_proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        McEstimate {
            estimate: p,
            std_error: proportion_se(p, n),
            n,
        }
    }

    /// `|a - b| / sqrt(se_a^2 + se_b^2)`; infinite if both errors vanish and the
    /// estimates differ.
    pub fn z_score(&self, other: &McEstimate) -> f64 {
        joint_z(self.estimate - other.estimate, self.std_error, other.std_error)
    }

    /// Agreement within `k` joint standard errors.
    pub fn agrees_with(&self, other: &McEstimate, k: f64) -> bool {
        let se = self.std_error.hypot(other.std_error);
        (self.estimate - other.estimate).abs() <= k * se
    }
}

fn joint_z(diff: f64, se_a: f64, se_b: f64) -> f64 {
    let se = se_a.hypot(se_b);
    if se > 0.0 {
        diff.abs() / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn check_fits(model: &SpectralModel, beta: &Direction) -> Result<()> {
    if beta.min_dimension() > model.dim() {
        return Err(Error::Shape(format!(
            "direction {beta} exceeds model dimension {}",
            model.dim()
        )));
    }
    Ok(())
}

fn check_draws(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("number of draws must be at least 1"));
    }
    Ok(())
}

/// `sum_{k in beta} (theta_k - theta_i)_+`.
fn positive_gap(theta: &[f64], beta: &Direction, i: usize) -> f64 {
    beta.indices().iter().map(|&k| (theta[k] - theta[i]).max(0.0)).sum()
}

/// Integrand of `P(Z in C_beta)` over `Theta`:
/// `(min_{j not in beta} gap_j^alpha - max_{j in beta} gap_j^alpha)_+`,
/// with `gap_j = sum_{k in beta} (theta_k - theta_j)_+` and an empty minimum equal to one.
pub fn face_integrand(theta: &[f64], beta: &Direction, alpha: f64) -> f64 {
    let d = theta.len();
    let upper = (0..d)
        .filter(|i| !beta.contains(*i))
        .map(|i| positive_gap(theta, beta, i).powf(alpha))
        .fold(1.0, f64::min);
    let lower = beta
        .indices()
        .iter()
        .map(|&i| positive_gap(theta, beta, i).powf(alpha))
        .fold(0.0, f64::max);
    (upper - lower).max(0.0)
}

/// Integrand of `P(Z_{beta^c} = 0)`: `min_{j not in beta} gap_j^alpha`.
pub fn null_complement_integrand(theta: &[f64], beta: &Direction, alpha: f64) -> f64 {
    (0..theta.len())
        .filter(|i| !beta.contains(*i))
        .map(|i| positive_gap(theta, beta, i).powf(alpha))
        .fold(1.0, f64::min)
}

/// Integrand of `P(Z_j = 1)`: `min_{i != j} (theta_j - theta_i)_+^alpha`.
pub fn axis_integrand(theta: &[f64], j: usize, alpha: f64) -> f64 {
    (0..theta.len())
        .filter(|&i| i != j)
        .map(|i| (theta[j] - theta[i]).max(0.0).powf(alpha))
        .fold(1.0, f64::min)
}

/// Integrand of `G_beta(x) = P(Z_beta > x_beta, Z_{beta^c} <= 0)`.
///
/// With `m = |beta|`, `s = sum_{k in beta} theta_k` and
/// `r_j = ((m theta_j - s) / (m x_j - 1))_+^alpha`, the integrand is
/// `(1 ^ min_{j in beta+} r_j ^ min_{j not in beta} (s - m theta_j)_+^alpha - max_{j in beta-} r_j)_+`
/// where `beta+` (`beta-`) collects the `j in beta` with `x_j` above (below) `1/m`.
pub fn g_integrand(theta: &[f64], beta: &Direction, x: &[f64], alpha: f64) -> f64 {
    let m = beta.len() as f64;
    let s: f64 = beta.indices().iter().map(|&k| theta[k]).sum();
    let mut upper = 1.0f64;
    let mut lower = 0.0f64;
    for &j in beta.indices() {
        let denom = m * x[j] - 1.0;
        let r = ((m * theta[j] - s) / denom).max(0.0).powf(alpha);
        if denom > 0.0 {
            upper = upper.min(r);
        } else {
            lower = lower.max(r);
        }
    }
    for i in (0..theta.len()).filter(|i| !beta.contains(*i)) {
        upper = upper.min((s - m * theta[i]).max(0.0).powf(alpha));
    }
    (upper - lower).max(0.0)
}

fn integrand_mc<F: Fn(&[f64]) -> f64>(model: &SpectralModel, n: u64, seed: u64, f: F) -> McEstimate {
    let mut rng = stream_rng(seed, STREAM_THETA);
    let mut acc = Accumulator::default();
    for _ in 0..n {
        let theta = model.sample_theta(&mut rng);
        acc.push(f(&theta));
    }
    McEstimate::from_acc(&acc)
}

/// `P(Z in C_beta)` as a Monte-Carlo mean over draws of `Theta`.
pub fn prob_c_beta_mc(model: &SpectralModel, beta: &Direction, n: u64, seed: u64) -> Result<McEstimate> {
    check_fits(model, beta)?;
    check_draws(n)?;
    let alpha = model.alpha;
    Ok(integrand_mc(model, n, seed, |t| face_integrand(t, beta, alpha)))
}

/// `P(Z_{beta^c} = 0)` as a Monte-Carlo mean over draws of `Theta`.
pub fn prob_null_on_complement(
    model: &SpectralModel,
    beta: &Direction,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_fits(model, beta)?;
    check_draws(n)?;
    if beta.len() == model.dim() {
        return Err(Error::param("complement of the full index set is empty"));
    }
    let alpha = model.alpha;
    Ok(integrand_mc(model, n, seed, |t| null_complement_integrand(t, beta, alpha)))
}

/// `P(Z_j = 1)` as a Monte-Carlo mean over draws of `Theta`.
pub fn prob_axis(model: &SpectralModel, j: usize, n: u64, seed: u64) -> Result<McEstimate> {
    check_fits(model, &Direction::singleton(j))?;
    check_draws(n)?;
    let alpha = model.alpha;
    Ok(integrand_mc(model, n, seed, |t| axis_integrand(t, j, alpha)))
}

fn check_g_point(model: &SpectralModel, beta: &Direction, x: &[f64]) -> Result<()> {
    check_fits(model, beta)?;
    if x.len() != model.dim() {
        return Err(Error::Shape(format!(
            "point has length {}, model dimension is {}",
            x.len(),
            model.dim()
        )));
    }
    let m = beta.len() as f64;
    for (j, &xj) in x.iter().enumerate() {
        if !(0.0..1.0).contains(&xj) {
            return Err(Error::param(format!("x[{j}] = {xj} outside [0, 1)")));
        }
        if beta.contains(j) {
            if (m * xj - 1.0) == 0.0 {
                return Err(Error::param(format!("x[{j}] equals 1/|beta|")));
            }
        } else if xj != 0.0 {
            return Err(Error::param(format!(
                "x[{j}] must be 0 outside beta, got {xj}"
            )));
        }
    }
    Ok(())
}

/// `G_beta(x) = P(Z_beta > x_beta, Z_{beta^c} <= x_{beta^c})` via the
/// expectation over `Theta`. Requires `x` zero outside `beta` and
/// `x_j != 1/|beta|` inside.
pub fn g_beta_mc(
    model: &SpectralModel,
    beta: &Direction,
    x: &[f64],
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_g_point(model, beta, x)?;
    check_draws(n)?;
    let alpha = model.alpha;
    Ok(integrand_mc(model, n, seed, |t| g_integrand(t, beta, x, alpha)))
}

/// `G_beta(x)` as a direct frequency over draws of `Z`.
pub fn g_beta_direct(
    model: &SpectralModel,
    beta: &Direction,
    x: &[f64],
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_g_point(model, beta, x)?;
    check_draws(n)?;
    let mut rng = stream_rng(seed, STREAM_Z);
    let mut hits = 0u64;
    for _ in 0..n {
        let z = sample_z(model, &mut rng);
        let ok = z.values.iter().enumerate().all(|(j, &zj)| {
            if beta.contains(j) {
                zj > x[j]
            } else {
                zj <= x[j]
            }
        });
        hits += ok as u64;
    }
    Ok(McEstimate::from_proportion(hits, n))
}

/// Empirical face law of `Z`. Only observed directions are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularEstimate {
    pub direction_probs: BTreeMap<Direction, f64>,
    pub n_draws: u64,
    pub seed: u64,
}

impl AngularEstimate {
    pub fn prob(&self, beta: &Direction) -> f64 {
        self.direction_probs.get(beta).copied().unwrap_or(0.0)
    }

    pub fn std_error(&self, beta: &Direction) -> f64 {
        proportion_se(self.prob(beta), self.n_draws)
    }

    pub fn face(&self, beta: &Direction) -> McEstimate {
        McEstimate {
            estimate: self.prob(beta),
            std_error: self.std_error(beta),
            n: self.n_draws,
        }
    }

    /// Empirical `P(Z_{beta^c} = 0)`: total mass of faces contained in `beta`.
    pub fn mass_within(&self, beta: &Direction) -> McEstimate {
        let p: f64 = self
            .direction_probs
            .iter()
            .filter(|(g, _)| g.is_subset_of(beta))
            .map(|(_, p)| p)
            .sum();
        McEstimate {
            estimate: p,
            std_error: proportion_se(p, self.n_draws),
            n: self.n_draws,
        }
    }

    /// Directions whose probability exceeds `k` of their own standard errors.
    pub fn maximal(&self, k_se: f64) -> BTreeSet<Direction> {
        let above: HashMap<Direction, f64> = self
            .direction_probs
            .iter()
            .filter(|(b, &p)| p > k_se * self.std_error(b))
            .map(|(b, &p)| (b.clone(), p))
            .collect();
        maximal_directions(&above, 0.0)
    }
}

fn tally_faces<I: IntoIterator<Item = Direction>>(faces: I) -> (BTreeMap<Direction, u64>, u64) {
    let mut counts: HashMap<Direction, u64> = HashMap::new();
    let mut n = 0u64;
    for beta in faces {
        *counts.entry(beta).or_insert(0) += 1;
        n += 1;
    }
    (counts.into_iter().collect(), n)
}

fn to_probs(counts: &BTreeMap<Direction, u64>, n: u64) -> BTreeMap<Direction, f64> {
    counts
        .iter()
        .map(|(b, &c)| (b.clone(), c as f64 / n as f64))
        .collect()
}

/// Face frequencies of `n` draws of `Z`.
pub fn estimate_z_law(model: &SpectralModel, n: u64, seed: u64) -> Result<AngularEstimate> {
    check_draws(n)?;
    let mut rng = stream_rng(seed, STREAM_Z);
    let (counts, n) = tally_faces((0..n).map(|_| support_of(&sample_z(model, &mut rng).values)));
    Ok(AngularEstimate {
        direction_probs: to_probs(&counts, n),
        n_draws: n,
        seed,
    })
}

/// Comparison of the face law of `Z` given `Y > r` with that of `pi(r Z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionalReport {
    pub r: f64,
    pub conditional: BTreeMap<Direction, f64>,
    pub n_conditional: u64,
    pub projected: BTreeMap<Direction, f64>,
    pub n_projected: u64,
    /// Total-variation distance between the two empirical face laws.
    pub tv_distance: f64,
    /// Half the sum over observed faces of the joint standard errors.
    pub tv_std_error: f64,
    /// Largest per-face joint z-score.
    pub max_z_score: f64,
}

impl ConditionalReport {
    pub fn agrees(&self, k_se: f64) -> bool {
        self.tv_distance <= k_se * self.tv_std_error
    }
}

/// Checks `P(Z in . | Y > r) = P(pi(r Z) in .)` on faces from two independent runs of `n` draws.
pub fn conditional_identity_check(
    model: &SpectralModel,
    r: f64,
    n: u64,
    seed: u64,
) -> Result<ConditionalReport> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::param(format!("r must be at least 1, got {r}")));
    }
    check_draws(n)?;

    let mut rng = stream_rng(seed, STREAM_CONDITIONAL);
    let kept = (0..n).filter_map(|_| {
        let (y, z) = sample_yz(model, &mut rng);
        (y > r).then(|| support_of(&z.values))
    });
    let (cond_counts, n_cond) = tally_faces(kept.collect::<Vec<_>>());

    let mut rng = stream_rng(seed, STREAM_PROJECTED);
    let projected = (0..n).map(|_| {
        let z = sample_z(model, &mut rng);
        let scaled: Vec<f64> = z.values.iter().map(|v| v * r).collect();
        let (w, _) = project_sorted_slice(&scaled, 1.0).expect("simplex point has unit mass");
        support_of(&w.values)
    });
    let (proj_counts, n_proj) = tally_faces(projected.collect::<Vec<_>>());

    if n_cond == 0 {
        return Err(Error::param("no draws exceeded r; increase n"));
    }
    let conditional = to_probs(&cond_counts, n_cond);
    let projected = to_probs(&proj_counts, n_proj);

    let faces: BTreeSet<&Direction> = conditional.keys().chain(projected.keys()).collect();
    let (mut tv, mut tv_se, mut max_z) = (0.0, 0.0, 0.0f64);
    for beta in faces {
        let p = conditional.get(beta).copied().unwrap_or(0.0);
        let q = projected.get(beta).copied().unwrap_or(0.0);
        let (sp, sq) = (proportion_se(p, n_cond), proportion_se(q, n_proj));
        tv += (p - q).abs();
        tv_se += sp.hypot(sq);
        max_z = max_z.max(joint_z(p - q, sp, sq));
    }
    Ok(ConditionalReport {
        r,
        conditional,
        n_conditional: n_cond,
        projected,
        n_projected: n_proj,
        tv_distance: 0.5 * tv,
        tv_std_error: 0.5 * tv_se,
        max_z_score: max_z,
    })
}

/// Directions with mass above `tol` and no strict superset with mass above `tol`.
pub fn maximal_directions<S: std::hash::BuildHasher>(
    probs: &HashMap<Direction, f64, S>,
    tol: f64,
) -> BTreeSet<Direction> {
    let charged: Vec<&Direction> = probs
        .iter()
        .filter(|(_, &p)| p > tol)
        .map(|(b, _)| b)
        .collect();
    charged
        .iter()
        .filter(|b| !charged.iter().any(|other| b.is_strict_subset_of(other)))
        .map(|b| (*b).clone())
        .collect()
}

/// [`maximal_directions`] over an ordered map.
pub fn maximal_directions_of(probs: &BTreeMap<Direction, f64>, tol: f64) -> BTreeSet<Direction> {
    let map: HashMap<Direction, f64> = probs.iter().map(|(b, p)| (b.clone(), *p)).collect();
    maximal_directions(&map, tol)
}
