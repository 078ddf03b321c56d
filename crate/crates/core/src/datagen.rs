//! Seeded sample generators for the simulation designs, plus the marginal
//! rank transform and the componentwise power transform.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::rng::pareto;

/// Dense row-major `n x d` matrix of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows} x {cols} matrix",
                data.len()
            )));
        }
        if cols == 0 {
            return Err(Error::Shape("matrix must have at least one column".into()));
        }
        Ok(SampleMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampleMatrix {
        SampleMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Checks that every entry is finite and nonnegative.
    pub fn validate_nonneg(&self) -> Result<()> {
        for (k, &x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(k));
            }
            if x < 0.0 {
                return Err(Error::Negative { index: k, value: x });
            }
        }
        Ok(())
    }
}

/// A labelled set of directions expected to be detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub label: String,
    pub directions: BTreeSet<Direction>,
}

impl GroundTruth {
    pub fn new(label: impl Into<String>, directions: impl IntoIterator<Item = Direction>) -> Result<Self> {
        let directions: BTreeSet<Direction> = directions.into_iter().collect();
        if directions.is_empty() {
            return Err(Error::param("ground truth needs at least one direction"));
        }
        Ok(GroundTruth {
            label: label.into(),
            directions,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Random correlation matrix `D^-1/2 S'^T S' D^-1/2` with `S'` entries iid
/// `U(-1, 1)` and `D` the diagonal of `S'^T S'`.
pub fn random_correlation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if d < 2 {
        return Err(Error::param("correlation matrix needs d >= 2"));
    }
    loop {
        let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let gram = raw.transpose() * &raw;
        let diag: Vec<f64> = (0..d).map(|i| gram[(i, i)]).collect();
        if diag.iter().any(|&v| !(v > 0.0)) {
            continue;
        }
        let scale: Vec<f64> = diag.iter().map(|v| v.sqrt().recip()).collect();
        let mut sigma = DMatrix::from_fn(d, d, |i, j| gram[(i, j)] * scale[i] * scale[j]);
        for i in 0..d {
            sigma[(i, i)] = 1.0;
            for j in 0..i {
                let s = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
                sigma[(i, j)] = s;
                sigma[(j, i)] = s;
            }
        }
        return Ok(sigma);
    }
}

const JITTER: f64 = 1e-10;

/// Lower Cholesky factor of `sigma`, retrying once with a `1e-10` diagonal jitter.
pub fn gaussian_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::Shape("covariance must be square".into()));
    }
    if let Some(c) = sigma.clone().cholesky() {
        return Ok(c.l());
    }
    let d = sigma.nrows();
    let jittered = sigma + DMatrix::identity(d, d) * JITTER;
    jittered
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Factorization("matrix is not positive definite after jitter".into()))
}

/// `n` iid rows from `N(0, sigma)` (signed values).
pub fn gaussian_sample<R: Rng + ?Sized>(
    sigma: &DMatrix<f64>,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let l = gaussian_factor(sigma)?;
    let d = l.nrows();
    let mut data = Vec::with_capacity(n * d);
    let mut g = vec![0.0; d];
    for _ in 0..n {
        for gi in g.iter_mut() {
            *gi = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let mut acc = 0.0;
            for k in 0..=i {
                acc += l[(i, k)] * g[k];
            }
            data.push(acc);
        }
    }
    SampleMatrix::from_vec(n, d, data)
}

/// Column-wise rank transform `1 / (1 - F_j(x))` with the strict-inequality
/// empirical CDF `F_j(x) = #{i : X_ij < x} / n`. Ties share a value; outputs lie in `[1, n]`.
pub fn rank_transform(m: &SampleMatrix) -> Result<SampleMatrix> {
    let n = m.rows();
    if n < 2 {
        return Err(Error::param("rank transform needs at least two rows"));
    }
    let d = m.cols();
    let nf = n as f64;
    let mut out = vec![0.0; n * d];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..d {
        let col = m.column(j);
        if let Some(k) = col.iter().position(|x| x.is_nan()) {
            return Err(Error::NonFinite(k * d + j));
        }
        order.sort_unstable_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // `start` values are strictly below this tie group.
            let value = nf / (nf - start as f64);
            for &i in &order[start..end] {
                out[i * d + j] = value;
            }
            start = end;
        }
    }
    SampleMatrix::from_vec(n, d, out)
}

fn check_block_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::param("block needs at least one tail index"));
    }
    if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::param("tail indices must be positive"));
    }
    if alphas[1..].iter().any(|&a| !(a > alphas[0])) {
        return Err(Error::param(
            "leading tail index must be strictly smaller than the others",
        ));
    }
    Ok(())
}

/// `(P_1, P_1 + P_2, .., P_1 + P_k)` with independent `P_j ~ Pareto(alphas[j])`.
pub fn cumulative_pareto_block<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_block_alphas(alphas)?;
    Ok(pareto_block(alphas, rng))
}

fn pareto_block<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Vec<f64> {
    let lead = pareto(rng, alphas[0]);
    std::iter::once(lead)
        .chain(alphas[1..].iter().map(|&a| lead + pareto(rng, a)))
        .collect()
}

pub const DEPENDENT_PAIRS: usize = 10;
pub const DEPENDENT_TRIPLES: usize = 10;
pub const DEPENDENT_DIM: usize = 2 * DEPENDENT_PAIRS + 3 * DEPENDENT_TRIPLES;

/// Ten cumulative Pareto pairs (tail indices 1, 2) followed by ten triples
/// (1, 2, 2): `d = 50`, truth = the 20 block index sets.
pub fn dependent_model<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(SampleMatrix, GroundTruth)> {
    let pair = [1.0, 2.0];
    let triple = [1.0, 2.0, 2.0];
    let mut data = Vec::with_capacity(n * DEPENDENT_DIM);
    for _ in 0..n {
        for _ in 0..DEPENDENT_PAIRS {
            data.extend(pareto_block(&pair, rng));
        }
        for _ in 0..DEPENDENT_TRIPLES {
            data.extend(pareto_block(&triple, rng));
        }
    }
    let m = SampleMatrix::from_vec(n, DEPENDENT_DIM, data)?;
    Ok((m, dependent_truth()))
}

pub fn dependent_truth() -> GroundTruth {
    let pairs = (0..DEPENDENT_PAIRS).map(|b| Direction::range(2 * b, 2).unwrap());
    let offset = 2 * DEPENDENT_PAIRS;
    let triples = (0..DEPENDENT_TRIPLES).map(|b| Direction::range(offset + 3 * b, 3).unwrap());
    GroundTruth::new("dependent", pairs.chain(triples)).unwrap()
}

pub const NONMAXIMAL_BLOCKS: usize = 20;
pub const NONMAXIMAL_DIM: usize = 3 * NONMAXIMAL_BLOCKS;
const PROPORTIONS: [f64; 3] = [7.0 / 17.0, 6.0 / 17.0, 4.0 / 17.0];

/// Twenty iid blocks `(a_1 P, a_2 P + P_2, a_3 P + P_3)` with `P ~ Pareto(1)`,
/// `P_2, P_3 ~ Pareto(2)` and `a = (7, 6, 4)/17`: `d = 60`. Truth classes are the
/// block triples, the leading pairs and the leading singletons.
pub fn nonmaximal_model<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<(SampleMatrix, [GroundTruth; 3])> {
    let mut data = Vec::with_capacity(n * NONMAXIMAL_DIM);
    for _ in 0..n {
        for _ in 0..NONMAXIMAL_BLOCKS {
            let p = pareto(rng, 1.0);
            data.push(PROPORTIONS[0] * p);
            data.push(PROPORTIONS[1] * p + pareto(rng, 2.0));
            data.push(PROPORTIONS[2] * p + pareto(rng, 2.0));
        }
    }
    let m = SampleMatrix::from_vec(n, NONMAXIMAL_DIM, data)?;
    Ok((m, nonmaximal_truth()))
}

pub fn nonmaximal_truth() -> [GroundTruth; 3] {
    let class = |label: &str, len: usize| {
        GroundTruth::new(
            label,
            (0..NONMAXIMAL_BLOCKS).map(|b| Direction::range(3 * b, len).unwrap()),
        )
        .unwrap()
    };
    [class("triples", 3), class("pairs", 2), class("singletons", 1)]
}

pub const ASYMPTOTIC_INDEPENDENCE_DIM: usize = 40;

/// Rank-transformed Gaussian sample with correlation `sigma`; truth = all singletons.
pub fn asymptotic_independence_sample<R: Rng + ?Sized>(
    sigma: &DMatrix<f64>,
    n: usize,
    rng: &mut R,
) -> Result<(SampleMatrix, GroundTruth)> {
    let raw = gaussian_sample(sigma, n, rng)?;
    let x = rank_transform(&raw)?;
    let truth = GroundTruth::new(
        "asymptotic-independence",
        (0..sigma.nrows()).map(Direction::singleton),
    )?;
    Ok((x, truth))
}

/// Componentwise `q`-th power.
pub fn power_transform(m: &SampleMatrix, q: f64) -> Result<SampleMatrix> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::param(format!("power must be positive, got {q}")));
    }
    m.validate_nonneg()?;
    if q == 1.0 {
        return Ok(m.clone());
    }
    Ok(m.map(|x| x.powf(q)))
}
