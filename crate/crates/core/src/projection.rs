//! Euclidean projection of nonnegative vectors onto the positive sphere
//! `{w >= 0 : sum(w) = z}`.
//!
//! Two interchangeable algorithms are provided: a sort-based one
//! ([`project_sorted`], `O(d log d)`) and a randomized pivot-partition one
//! ([`project_median`], expected `O(d)`). Both return `w_i = max(v_i - lambda, 0)`
//! where `lambda` is the unique constant with `sum_i (v_i - lambda)_+ = z`.
//! Clamped coordinates are exactly `0.0`, so [`support`] uses exact comparison.
//!
//! The module also exposes the closed-form face characterizations of the
//! projection (which coordinates survive, which face `C_beta` the output lands
//! in). They are evaluated directly from `v` without running either
//! algorithm, and serve as independent cross-checks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};

/// A finite, entrywise nonnegative vector of length at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegVector(Vec<f64>);

impl NonnegVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate_nonneg(&values)?;
        Ok(NonnegVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for NonnegVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        NonnegVector::new(values)
    }
}

pub(crate) fn validate_nonneg(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Shape("vector must have at least one entry".into()));
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < 0.0 {
            return Err(Error::Negative { index, value });
        }
    }
    Ok(())
}

/// A point of the positive sphere of radius `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    pub values: Vec<f64>,
    pub scale: f64,
}

impl SimplexPoint {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Threshold and sparsity of a projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDiagnostics {
    /// The shift `lambda` with `sum_i (v_i - lambda)_+ = z`. Negative when `z > sum(v)`.
    pub lambda: f64,
    /// Number of strictly positive output coordinates.
    pub rho: usize,
}

fn check_radius(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::param(format!("radius z must be positive and finite, got {z}")));
    }
    Ok(())
}

fn check_not_degenerate(v: &[f64]) -> Result<()> {
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput);
    }
    Ok(())
}

/// Applies the shift. With `m = max v` and survivors `S = {v_i > lambda}`,
/// `v_i - lambda = c - (m - v_i)` where `c = (z - sum_S (v_i - m)) / |S|`.
/// Working with differences from `m` avoids cancellation when `v` is large.
fn finish(v: &[f64], z: f64, lambda: f64) -> (SimplexPoint, ProjectionDiagnostics) {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut dev, mut count) = (0.0, 0usize);
    for &x in v {
        if x > lambda {
            dev += x - m;
            count += 1;
        }
    }
    if count == 0 {
        count = v.iter().filter(|&&x| x == m).count();
    }
    let c = (z - dev) / count as f64;
    let lambda = m - c;
    let values: Vec<f64> = v.iter().map(|&x| (c - (m - x)).max(0.0)).collect();
    let rho = values.iter().filter(|&&w| w > 0.0).count();
    (
        SimplexPoint { values, scale: z },
        ProjectionDiagnostics { lambda, rho },
    )
}

/// Sort-based projection.
///
/// Sorts `v` in decreasing order into `mu`, finds
/// `rho = max { j : mu_j - (sum_{r<=j} mu_r - z) / j > 0 }`, and shifts by
/// `lambda = (sum_{r<=rho} mu_r - z) / rho`.
pub fn project_sorted(
    v: &NonnegVector,
    z: f64,
) -> Result<(SimplexPoint, ProjectionDiagnostics)> {
    project_sorted_slice(v.as_slice(), z)
}

/// [`project_sorted`] on a raw slice (validated here).
pub fn project_sorted_slice(v: &[f64], z: f64) -> Result<(SimplexPoint, ProjectionDiagnostics)> {
    validate_nonneg(v)?;
    check_radius(z)?;
    check_not_degenerate(v)?;
    let lambda = sorted_threshold(v, z);
    Ok(finish(v, z, lambda))
}

fn sorted_threshold(v: &[f64], z: f64) -> f64 {
    let mut mu = v.to_vec();
    // Stable descending order; the threshold depends only on the multiset.
    mu.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut best = (mu[0] - z, 1usize);
    for (j, &m) in mu.iter().enumerate() {
        cumsum += m;
        let count = j + 1;
        let shift = (cumsum - z) / count as f64;
        if m - shift > 0.0 {
            best = (cumsum - z, count);
        }
    }
    best.0 / best.1 as f64
}

/// Expected linear-time projection by randomized pivot partitioning.
///
/// Maintains a candidate set `U`, a running sum `s` and count `rho` of
/// coordinates known to survive. Each round picks a uniform random pivot `k`
/// from `U` (drawn from `rng`), splits `U` into `G = {v_j >= v_k}` and
/// `L = {v_j < v_k}`, then either accepts `G` (if
/// `(s + sum G) - (rho + |G|) v_k < z`) and continues on `L`, or continues on
/// `G \ {k}`. The shift is `eta = (s - z) / rho`.
pub fn project_median<R: Rng + ?Sized>(
    v: &NonnegVector,
    z: f64,
    rng: &mut R,
) -> Result<(SimplexPoint, ProjectionDiagnostics)> {
    project_median_slice(v.as_slice(), z, rng)
}

/// [`project_median`] on a raw slice (validated here).
pub fn project_median_slice<R: Rng + ?Sized>(
    v: &[f64],
    z: f64,
    rng: &mut R,
) -> Result<(SimplexPoint, ProjectionDiagnostics)> {
    validate_nonneg(v)?;
    check_radius(z)?;
    check_not_degenerate(v)?;
    let eta = pivot_threshold(v, z, rng);
    Ok(finish(v, z, eta))
}

fn pivot_threshold<R: Rng + ?Sized>(v: &[f64], z: f64, rng: &mut R) -> f64 {
    // `buf[lo..hi]` holds the values of U.
    let mut buf = v.to_vec();
    let (mut lo, mut hi) = (0usize, buf.len());
    let mut s = 0.0;
    let mut rho = 0usize;

    while lo < hi {
        let k = rng.random_range(lo..hi);
        buf.swap(lo, k);
        let pivot = buf[lo];
        // Partition buf[lo+1..hi] so that G \ {k} occupies buf[lo+1..split].
        let mut split = lo + 1;
        let mut delta_s = pivot;
        for i in lo + 1..hi {
            if buf[i] >= pivot {
                delta_s += buf[i];
                buf.swap(i, split);
                split += 1;
            }
        }
        let delta_rho = split - lo;
        if (s + delta_s) - (rho + delta_rho) as f64 * pivot < z {
            s += delta_s;
            rho += delta_rho;
            lo = split;
        } else {
            lo += 1;
            hi = split;
        }
    }
    (s - z) / rho as f64
}

/// Indices of strictly positive coordinates.
pub fn support(w: &SimplexPoint) -> Direction {
    support_of(&w.values)
}

pub fn support_of(values: &[f64]) -> Direction {
    let idx: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
        .collect();
    Direction::from_sorted_unchecked(idx)
}

/// Projection of `x / t` onto the unit simplex.
pub fn rescaled_project(x: &NonnegVector, t: f64) -> Result<SimplexPoint> {
    rescaled_project_slice(x.as_slice(), t)
}

pub fn rescaled_project_slice(x: &[f64], t: f64) -> Result<SimplexPoint> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param(format!("threshold t must be positive and finite, got {t}")));
    }
    let scaled: Vec<f64> = x.iter().map(|&xi| xi / t).collect();
    project_sorted_slice(&scaled, 1.0).map(|(w, _)| w)
}

/// Face membership test for `pi_z(v)` evaluated from `v` alone:
/// `pi_z(v)` lies in `C_beta` iff
/// `max_{i in beta} sum_{j in beta} (v_j - v_i) < z` and
/// `min_{i not in beta} sum_{j in beta} (v_j - v_i) >= z`.
pub fn lies_in_face(v: &[f64], beta: &Direction, z: f64) -> bool {
    let d = v.len();
    if beta.min_dimension() > d {
        return false;
    }
    let mass: f64 = beta.indices().iter().map(|&j| v[j]).sum();
    let size = beta.len() as f64;
    let gap = |i: usize| mass - size * v[i];
    let inner_ok = beta.indices().iter().all(|&i| gap(i) < z);
    let outer_ok = (0..d).filter(|i| !beta.contains(*i)).all(|i| gap(i) >= z);
    inner_ok && outer_ok
}

/// Test for `pi_z(v)_{beta^c} = 0` evaluated from `v` alone:
/// `z <= min_{i not in beta} sum_{j in beta} (v_j - v_i)_+`.
pub fn vanishes_off(v: &[f64], beta: &Direction, z: f64) -> bool {
    (0..v.len()).filter(|i| !beta.contains(*i)).all(|i| {
        let s: f64 = beta
            .indices()
            .iter()
            .map(|&j| (v[j] - v[i]).max(0.0))
            .sum();
        s >= z
    })
}

/// Per-coordinate positivity test for `pi_z(v)`: coordinate `j` survives iff
/// `v_j - (sum_{k: v_k >= v_j} v_k - z) / #{k : v_k >= v_j} > 0`.
pub fn positive_coordinates(v: &[f64], z: f64) -> Vec<bool> {
    v.iter()
        .map(|&vj| {
            let (count, sum) = v
                .iter()
                .filter(|&&vk| vk >= vj)
                .fold((0usize, 0.0), |(c, s), &vk| (c + 1, s + vk));
            vj - (sum - z) / count as f64 > 0.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nv(v: &[f64]) -> NonnegVector {
        NonnegVector::new(v.to_vec()).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    /// Exhaustive-support oracle: over every nonempty support, form the
    /// closed-form candidate `w_beta = v_beta - (|v_beta| - z)/|beta|`, keep
    /// the feasible ones and return the one closest to `v`.
    fn oracle(v: &[f64], z: f64) -> Vec<f64> {
        let d = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << d) {
            let members: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
            let mass: f64 = members.iter().map(|&i| v[i]).sum();
            let shift = (mass - z) / members.len() as f64;
            let mut w = vec![0.0; d];
            let mut feasible = true;
            for &i in &members {
                w[i] = v[i] - shift;
                if w[i] < -1e-12 {
                    feasible = false;
                }
            }
            if !feasible {
                continue;
            }
            let dist: f64 = w.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().map_or(true, |(b, _)| dist < *b) {
                best = Some((dist, w));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn figure_examples() {
        let (w, diag) = project_sorted(&nv(&[1.5, 1.0]), 1.0).unwrap();
        assert_close(&w.values, &[0.75, 0.25], 1e-15);
        assert!((diag.lambda - 0.75).abs() < 1e-15);
        assert_eq!(diag.rho, 2);

        let (w, diag) = project_sorted(&nv(&[0.7, 2.0]), 1.0).unwrap();
        assert_eq!(w.values, vec![0.0, 1.0]);
        assert!((diag.lambda - 1.0).abs() < 1e-15);
        assert_eq!(diag.rho, 1);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (w, _) = project_median(&nv(&[1.5, 1.0]), 1.0, &mut rng).unwrap();
        assert_close(&w.values, &[0.75, 0.25], 1e-15);
    }

    #[test]
    fn fixed_point_on_simplex() {
        let (w, diag) = project_sorted(&nv(&[0.2, 0.3, 0.5]), 1.0).unwrap();
        assert_close(&w.values, &[0.2, 0.3, 0.5], 1e-15);
        assert!(diag.lambda.abs() < 1e-15);
        assert_eq!(diag.rho, 3);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            project_sorted(&nv(&[0.0, 0.0]), 1.0),
            Err(Error::DegenerateInput)
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            project_median(&nv(&[0.0]), 1.0, &mut rng),
            Err(Error::DegenerateInput)
        ));
        assert!(project_sorted(&nv(&[1.0]), 0.0).is_err());
        assert!(project_sorted(&nv(&[1.0]), -1.0).is_err());
        assert!(matches!(
            NonnegVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            project_sorted_slice(&[1.0, f64::INFINITY], 1.0),
            Err(Error::NonFinite(1))
        ));
        assert!(NonnegVector::new(vec![-0.5]).is_err());
        assert!(NonnegVector::new(vec![]).is_err());
    }

    #[test]
    fn radius_above_mass_gives_negative_lambda() {
        let v = nv(&[0.1, 0.0, 0.3]);
        let (w, diag) = project_sorted(&v, 1.0).unwrap();
        assert!(diag.lambda < 0.0);
        assert_eq!(diag.rho, 3);
        assert_close(&w.values, &oracle(v.as_slice(), 1.0), 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (wm, _) = project_median(&v, 1.0, &mut rng).unwrap();
        assert_close(&w.values, &wm.values, 1e-12);
    }

    #[test]
    fn support_examples() {
        let s = |v: &[f64]| {
            support(&SimplexPoint {
                values: v.to_vec(),
                scale: 1.0,
            })
        };
        assert_eq!(s(&[0.75, 0.25]), Direction::new(vec![0, 1]).unwrap());
        assert_eq!(s(&[0.0, 1.0]), Direction::singleton(1));
        let third = 1.0 / 3.0;
        assert_eq!(s(&[third; 3]), Direction::full(3).unwrap());
    }

    #[test]
    fn rescaled_examples() {
        let w = rescaled_project(&nv(&[3.0, 2.0]), 2.0).unwrap();
        assert_close(&w.values, &[0.75, 0.25], 1e-15);
        let w = rescaled_project(&nv(&[0.1, 0.6, 0.3]), 1.0).unwrap();
        assert_close(&w.values, &[0.1, 0.6, 0.3], 1e-15);
        assert!(rescaled_project(&nv(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn rescaled_support_matches_face_characterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let d = rng.random_range(2..7);
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let a: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let c = 1.0 + 20.0 * rng.random::<f64>();
            let t = 0.5 + rng.random::<f64>();
            let x: Vec<f64> = a.iter().map(|ai| ai * c * t).collect();
            let w = rescaled_project_slice(&x, t).unwrap();
            let beta = support(&w);
            let scaled: Vec<f64> = x.iter().map(|xi| xi / t).collect();
            assert!(lies_in_face(&scaled, &beta, 1.0));
        }
    }

    #[test]
    fn median_agrees_with_sorted_on_ties() {
        let v = nv(&[2.0, 2.0, 2.0, 1.0, 0.0, 2.0]);
        let (ws, _) = project_sorted(&v, 1.0).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (wm, _) = project_median(&v, 1.0, &mut rng).unwrap();
            assert_close(&ws.values, &wm.values, 1e-12);
        }
        assert_close(&ws.values, &[0.25, 0.25, 0.25, 0.0, 0.0, 0.25], 1e-15);
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let d = rng.random_range(1..7);
            let v: Vec<f64> = (0..d).map(|_| 10.0 * rng.random::<f64>()).collect();
            let z = 0.1 + 5.0 * rng.random::<f64>();
            let (w, _) = project_sorted_slice(&v, z).unwrap();
            assert_close(&w.values, &oracle(&v, z), 1e-9);
        }
    }

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![Just(0.0), 0.0f64..10.0],
            1..40,
        )
        .prop_filter("not all zero", |v| v.iter().any(|&x| x > 0.0))
    }

    proptest! {
        #[test]
        fn sum_and_agreement(v in vec_strategy(), z in 0.01f64..20.0, seed in any::<u64>()) {
            let (ws, ds) = project_sorted_slice(&v, z).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (wm, dm) = project_median_slice(&v, z, &mut rng).unwrap();
            let sum: f64 = ws.values.iter().sum();
            prop_assert!((sum - z).abs() <= 1e-9 * z);
            for (a, b) in ws.values.iter().zip(&wm.values) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + z));
            }
            prop_assert!((ds.lambda - dm.lambda).abs() <= 1e-12 * (1.0 + z));
            prop_assert!(ds.rho >= 1 && ds.rho <= v.len());
            let resid: f64 = v.iter().map(|&x| (x - ds.lambda).max(0.0)).sum();
            prop_assert!((resid - z).abs() <= 1e-9 * z);
        }

        #[test]
        fn order_and_zero_preservation(v in vec_strategy(), z in 0.01f64..20.0) {
            let (w, diag) = project_sorted_slice(&v, z).unwrap();
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] >= v[j] {
                        prop_assert!(w.values[i] >= w.values[j]);
                    }
                }
            }
            // Zero preservation needs lambda >= 0, i.e. sum(v) >= z.
            if v.iter().sum::<f64>() >= z {
                prop_assert!(diag.lambda >= 0.0);
                for (x, y) in v.iter().zip(&w.values) {
                    if *x == 0.0 {
                        prop_assert_eq!(*y, 0.0);
                    }
                }
            }
        }

        #[test]
        fn permutation_equivariance(v in vec_strategy(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..v.len()).collect();
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let permuted: Vec<f64> = perm.iter().map(|&p| v[p]).collect();
            let (w, _) = project_median_slice(&v, 1.0, &mut rng).unwrap();
            let (wp, _) = project_median_slice(&permuted, 1.0, &mut rng).unwrap();
            for (k, &p) in perm.iter().enumerate() {
                prop_assert!((wp.values[k] - w.values[p]).abs() <= 1e-12);
            }
        }

        #[test]
        fn iteration(v in vec_strategy(), z in 0.01f64..5.0, extra in 0.0f64..5.0) {
            let z_outer = z + extra;
            let (inner, _) = project_sorted_slice(&v, z_outer).unwrap();
            let (twice, _) = project_sorted_slice(&inner.values, z).unwrap();
            let (once, _) = project_sorted_slice(&v, z).unwrap();
            for (a, b) in twice.values.iter().zip(&once.values) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn scaling(v in vec_strategy(), z in 0.01f64..20.0) {
            let (w, _) = project_sorted_slice(&v, z).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x / z).collect();
            let (u, _) = project_sorted_slice(&scaled, 1.0).unwrap();
            for (a, b) in w.values.iter().zip(&u.values) {
                prop_assert!((a - z * b).abs() <= 1e-12 * (1.0 + z));
            }
        }

        #[test]
        fn rho_matches_positive_coordinate_test(v in prop::collection::vec(0.0f64..10.0, 1..30)
            .prop_filter("positive", |v| v.iter().any(|&x| x > 0.0))) {
            let (w, diag) = project_sorted_slice(&v, 1.0).unwrap();
            let flags = positive_coordinates(&v, 1.0);
            prop_assert_eq!(flags.iter().filter(|&&f| f).count(), diag.rho);
            prop_assert_eq!(support(&w).len(), diag.rho);
            for (f, x) in flags.iter().zip(&w.values) {
                prop_assert_eq!(*f, *x > 0.0);
            }
        }
    }
}
