//! Replication harness for the simulation tables and the angular-law checks.
//!
//! Tables 1 and 2 share one design (rank-transformed correlated Gaussians in
//! dimension 40) and report type-1 and type-2 errors of the projection method
//! and of DAMEX. Table 3 is the dependent Pareto-block design in dimension 50.
//! Table 4 is the non-maximal design in dimension 60, scored by recovered
//! directions per class.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{
    conditional_identity_check, estimate_z_law, g_beta_direct, g_beta_mc, prob_c_beta_mc, McEstimate,
    SpectralModel,
};
use crate::datagen::{
    asymptotic_independence_sample, dependent_model, nonmaximal_model, power_transform,
    random_correlation, GroundTruth, SampleMatrix, ASYMPTOTIC_INDEPENDENCE_DIM,
};
use crate::detection::{compare_sets, damex, detect, DetectionConfig, DEFAULT_P};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::io::write_json;
use crate::rng::{derive_seed, stream_rng};

/// RNG stream for the correlation matrix of a model replication.
const STREAM_MODEL: u64 = 0;
/// RNG stream for a data set.
const STREAM_DATA: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Design {
    AsymptIndep,
    Dependent,
    Nonmaximal,
}

impl Design {
    pub fn for_table(table: u32) -> Result<Self> {
        match table {
            1 | 2 => Ok(Design::AsymptIndep),
            3 => Ok(Design::Dependent),
            4 => Ok(Design::Nonmaximal),
            other => Err(Error::param(format!("unknown table id {other}; expected 1, 2, 3 or 4"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Design::AsymptIndep => "asympt-indep",
            Design::Dependent => "dependent",
            Design::Nonmaximal => "nonmaximal",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "asympt-indep" => Ok(Design::AsymptIndep),
            "dependent" => Ok(Design::Dependent),
            "nonmaximal" => Ok(Design::Nonmaximal),
            other => Err(Error::param(format!(
                "unknown model {other:?}; expected asympt-indep, dependent or nonmaximal"
            ))),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Design::AsymptIndep => 1,
            Design::Dependent => 3,
            Design::Nonmaximal => 4,
        }
    }
}

/// A generated data set and its ground truth classes.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub matrix: SampleMatrix,
    /// One class for Tables 1-3; triples, pairs, singletons for Table 4.
    pub truth: Vec<GroundTruth>,
}

impl Simulated {
    /// Union of all classes.
    pub fn all_truth(&self) -> GroundTruth {
        let label = self
            .truth
            .iter()
            .map(|g| g.label.as_str())
            .collect::<Vec<_>>()
            .join("+");
        GroundTruth {
            label,
            directions: self.truth.iter().flat_map(|g| g.directions.iter().cloned()).collect(),
        }
    }
}

/// Draws one data set. The correlation matrix (asymptotic-independence design
/// only, dimension `d`) comes from `model_seed`, the observations from `data_seed`.
pub fn simulate(design: Design, n: usize, d: Option<usize>, model_seed: u64, data_seed: u64) -> Result<Simulated> {
    if n == 0 {
        return Err(Error::param("n must be at least 1"));
    }
    let mut rng = stream_rng(data_seed, STREAM_DATA);
    match design {
        Design::AsymptIndep => {
            let sigma = model_correlation(d.unwrap_or(ASYMPTOTIC_INDEPENDENCE_DIM), model_seed)?;
            let (matrix, truth) = asymptotic_independence_sample(&sigma, n, &mut rng)?;
            Ok(Simulated { matrix, truth: vec![truth] })
        }
        Design::Dependent => {
            check_fixed_dim(d, crate::datagen::DEPENDENT_DIM)?;
            let (matrix, truth) = dependent_model(n, &mut rng)?;
            Ok(Simulated { matrix, truth: vec![truth] })
        }
        Design::Nonmaximal => {
            check_fixed_dim(d, crate::datagen::NONMAXIMAL_DIM)?;
            let (matrix, truth) = nonmaximal_model(n, &mut rng)?;
            Ok(Simulated { matrix, truth: truth.into() })
        }
    }
}

fn check_fixed_dim(d: Option<usize>, fixed: usize) -> Result<()> {
    match d {
        Some(d) if d != fixed => Err(Error::param(format!("this model has fixed dimension {fixed}"))),
        _ => Ok(()),
    }
}

pub fn model_correlation(d: usize, model_seed: u64) -> Result<DMatrix<f64>> {
    random_correlation(d, &mut stream_rng(model_seed, STREAM_MODEL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::param(format!("unknown scale {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub table: u32,
    pub ns: Vec<usize>,
    /// Data sets per model.
    pub replications: usize,
    /// Correlation matrices (Tables 1-2); 1 otherwise.
    pub model_replications: usize,
    /// Componentwise powers applied before projection.
    pub powers: Vec<f64>,
    /// DAMEX tolerances (Tables 1-2 only).
    pub epsilons: Vec<f64>,
    pub p: f64,
    pub seed: u64,
    pub scale: Scale,
}

impl ExperimentConfig {
    pub fn new(table: u32, scale: Scale, seed: u64) -> Result<Self> {
        let design = Design::for_table(table)?;
        let (replications, model_replications) = match (scale, design) {
            (Scale::Desk, Design::AsymptIndep) => (10, 3),
            (Scale::Desk, _) => (10, 1),
            (Scale::Full, Design::AsymptIndep) => (100, 20),
            (Scale::Full, _) => (100, 1),
        };
        let (powers, epsilons) = match design {
            Design::AsymptIndep => (vec![1.0, 0.5, 2.0], vec![0.05, 0.1, 0.5]),
            Design::Dependent => (vec![1.0, 0.5, 2.0], vec![]),
            Design::Nonmaximal => (vec![1.0], vec![]),
        };
        Ok(ExperimentConfig {
            table,
            ns: vec![10_000, 50_000, 100_000],
            replications,
            model_replications,
            powers,
            epsilons,
            p: DEFAULT_P,
            seed,
            scale,
        })
    }

    pub fn design(&self) -> Result<Design> {
        Design::for_table(self.table)
    }

    pub fn validate(&self) -> Result<()> {
        let design = self.design()?;
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return Err(Error::param("every n must be at least 2"));
        }
        if self.replications == 0 || self.model_replications == 0 {
            return Err(Error::param("replication counts must be at least 1"));
        }
        if design != Design::AsymptIndep && self.model_replications != 1 {
            return Err(Error::param("model replications apply to tables 1 and 2 only"));
        }
        if design != Design::AsymptIndep && !self.epsilons.is_empty() {
            return Err(Error::param("DAMEX runs on tables 1 and 2 only"));
        }
        if self.powers.is_empty() && self.epsilons.is_empty() {
            return Err(Error::param("no methods selected"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MethodSpec {
    /// Projection method on `X^q`.
    Euclidean(f64),
    Damex(f64),
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Euclidean(_) => "euclidean",
            MethodSpec::Damex(_) => "damex",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            MethodSpec::Euclidean(q) | MethodSpec::Damex(q) => q,
        }
    }

    /// Detected directions on `x`.
    pub fn run(&self, x: &SampleMatrix, p: f64) -> Result<std::collections::BTreeSet<Direction>> {
        let cfg = DetectionConfig::default().with_p(p);
        let report = match *self {
            MethodSpec::Euclidean(q) => detect(&power_transform(x, q)?, &cfg)?,
            MethodSpec::Damex(eps) => damex(x, &cfg.with_epsilon(eps))?,
        };
        Ok(report.detected())
    }
}

/// Scores of one method on one data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationScore {
    pub type1: usize,
    pub type2: usize,
    /// Recovered directions per truth class.
    pub recovered: Vec<usize>,
    pub seconds: f64,
}

pub fn score(method: &MethodSpec, sim: &Simulated, p: f64) -> Result<ReplicationScore> {
    let start = Instant::now();
    let detected = method.run(&sim.matrix, p)?;
    let seconds = start.elapsed().as_secs_f64();
    let errors = compare_sets(&detected, &sim.all_truth().directions);
    let recovered = sim
        .truth
        .iter()
        .map(|g| g.directions.intersection(&detected).count())
        .collect();
    Ok(ReplicationScore {
        type1: errors.type1,
        type2: errors.type2,
        recovered,
        seconds,
    })
}

/// Averages over all replications of one `(n, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub alpha_or_eps: f64,
    pub method: String,
    pub type1_mean: f64,
    pub type2_mean: f64,
    /// Mean recovered count per truth class (Table 4 only).
    pub recovered_mean: Vec<f64>,
    /// Mean number of detected directions outside every class; equals `type1_mean`.
    pub other_mean: f64,
    pub replications: usize,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub config: ExperimentConfig,
    pub class_labels: Vec<String>,
    pub cells: Vec<CellResult>,
    pub runtime_seconds: f64,
}

impl TableResult {
    pub fn cell(&self, n: usize, method: &str, param: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.method == method && c.alpha_or_eps == param)
    }

    /// Deterministic CSV (no timings).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,alpha_or_eps,method,type1_mean,type2_mean");
        for l in &self.class_labels {
            out.push_str(&format!(",recovered_{l}"));
        }
        out.push_str(",other_mean,replications\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{:?},{},{:?},{:?}",
                c.n, c.alpha_or_eps, c.method, c.type1_mean, c.type2_mean
            ));
            for r in &c.recovered_mean {
                out.push_str(&format!(",{r:?}"));
            }
            out.push_str(&format!(",{:?},{}\n", c.other_mean, c.replications));
        }
        out
    }

    /// Writes `table{K}_results.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("table{}_results.csv", self.config.table)), self.to_csv())?;
        write_json(self, &dir.join("summary.json"))
    }
}

pub fn methods(cfg: &ExperimentConfig) -> Vec<MethodSpec> {
    cfg.powers
        .iter()
        .map(|&q| MethodSpec::Euclidean(q))
        .chain(cfg.epsilons.iter().map(|&e| MethodSpec::Damex(e)))
        .collect()
}

/// Seed of the `m`-th correlation model.
pub fn model_seed(cfg: &ExperimentConfig, design: Design, m: usize) -> u64 {
    derive_seed(&[cfg.seed, design.tag(), m as u64])
}

/// Seed of the data set `(n, m, rep)`.
pub fn data_seed(cfg: &ExperimentConfig, design: Design, n: usize, m: usize, rep: usize) -> u64 {
    derive_seed(&[cfg.seed, design.tag(), n as u64, m as u64, rep as u64])
}

pub fn run_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    cfg.validate()?;
    let design = cfg.design()?;
    let start = Instant::now();
    let methods = methods(cfg);
    let class_labels: Vec<String> = match design {
        Design::Nonmaximal => crate::datagen::nonmaximal_truth()
            .iter()
            .map(|g| g.label.clone())
            .collect(),
        _ => Vec::new(),
    };

    let mut cells = Vec::new();
    for &n in &cfg.ns {
        let jobs: Vec<(usize, usize)> = (0..cfg.model_replications)
            .flat_map(|m| (0..cfg.replications).map(move |r| (m, r)))
            .collect();
        // Each job returns one score per method, in method order.
        let scores: Vec<Vec<ReplicationScore>> = jobs
            .par_iter()
            .map(|&(m, r)| {
                let sim = simulate(
                    design,
                    n,
                    None,
                    model_seed(cfg, design, m),
                    data_seed(cfg, design, n, m, r),
                )?;
                methods.iter().map(|meth| score(meth, &sim, cfg.p)).collect()
            })
            .collect::<Result<_>>()?;

        for (i, meth) in methods.iter().enumerate() {
            let reps = scores.len();
            let mean = |f: &dyn Fn(&ReplicationScore) -> f64| scores.iter().map(|s| f(&s[i])).sum::<f64>() / reps as f64;
            let type1_mean = mean(&|s| s.type1 as f64);
            let recovered_mean = if class_labels.is_empty() {
                Vec::new()
            } else {
                (0..class_labels.len())
                    .map(|c| mean(&|s| s.recovered[c] as f64))
                    .collect()
            };
            cells.push(CellResult {
                n,
                alpha_or_eps: meth.parameter(),
                method: meth.name().to_string(),
                type1_mean,
                type2_mean: mean(&|s| s.type2 as f64),
                recovered_mean,
                other_mean: type1_mean,
                replications: reps,
                runtime_seconds: scores.iter().map(|s| s[i].seconds).sum(),
            });
        }
    }
    Ok(TableResult {
        config: cfg.clone(),
        class_labels,
        cells,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One closed-form or two-estimator check on an angular law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// Target value, or the second estimator for agreement checks.
    pub reference: f64,
    pub reference_std_error: f64,
    /// Absolute tolerance, or the number of joint standard errors.
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn absolute(name: &str, est: McEstimate, target: f64, tol: f64) -> Self {
        CheckResult {
            name: name.into(),
            estimate: est.estimate,
            std_error: est.std_error,
            reference: target,
            reference_std_error: 0.0,
            tolerance: tol,
            passed: (est.estimate - target).abs() <= tol,
        }
    }

    fn agreement(name: &str, a: McEstimate, b: McEstimate, k: f64) -> Self {
        CheckResult {
            name: name.into(),
            estimate: a.estimate,
            std_error: a.std_error,
            reference: b.estimate,
            reference_std_error: b.std_error,
            tolerance: k,
            passed: a.agrees_with(&b, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub seed: u64,
    pub n_mc: u64,
    pub checks: Vec<CheckResult>,
}

impl ExampleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Atom, chain and agreement checks on the uniform and proportional models.
pub fn run_example_checks(seed: u64, n_mc: u64) -> Result<ExampleReport> {
    if n_mc < 100_000 {
        return Err(Error::param("n_mc must be at least 100000"));
    }
    let uniform = SpectralModel::uniform(2, 1.0)?;
    let prop = SpectralModel::proportional(1.0)?;
    let e0 = Direction::singleton(0);
    let e1 = Direction::singleton(1);
    let d01 = Direction::range(0, 2)?;

    let law = estimate_z_law(&uniform, n_mc, derive_seed(&[seed, 1]))?;
    let mut checks = vec![
        CheckResult::absolute("uniform P(Z1 = 1)", law.face(&e0), 0.25, 0.005),
        CheckResult::absolute("uniform P(Z1 = 0)", law.face(&e1), 0.25, 0.005),
        CheckResult::absolute("uniform G_Z(0)", law.face(&d01), 0.5, 0.005),
    ];

    let plaw = estimate_z_law(&prop, n_mc, derive_seed(&[seed, 2]))?;
    checks.push(CheckResult::absolute(
        "proportional P(Z in C_{0,1})",
        plaw.face(&d01),
        4.0 / 17.0,
        0.005,
    ));
    for r in 1..=3 {
        let beta = Direction::range(0, r)?;
        let mc = prob_c_beta_mc(&prop, &beta, n_mc, derive_seed(&[seed, 3, r as u64]))?;
        checks.push(CheckResult::agreement(
            &format!("proportional face {beta}: expectation vs frequency"),
            mc,
            plaw.face(&beta),
            3.0,
        ));
    }

    let x = [0.3, 0.2];
    let g_mc = g_beta_mc(&uniform, &d01, &x, n_mc, derive_seed(&[seed, 4]))?;
    let g_dir = g_beta_direct(&uniform, &d01, &x, n_mc, derive_seed(&[seed, 5]))?;
    checks.push(CheckResult::agreement("uniform G_{0,1}(0.3, 0.2)", g_mc, g_dir, 3.0));

    let x = [0.7, 0.1, 0.0];
    let g_mc = g_beta_mc(&prop, &d01, &x, n_mc, derive_seed(&[seed, 6]))?;
    let g_dir = g_beta_direct(&prop, &d01, &x, n_mc, derive_seed(&[seed, 7]))?;
    checks.push(CheckResult::agreement("proportional G_{0,1}(0.7, 0.1, 0)", g_mc, g_dir, 3.0));

    for (i, model) in [&uniform, &prop].into_iter().enumerate() {
        let rep = conditional_identity_check(model, 2.0, n_mc, derive_seed(&[seed, 8, i as u64]))?;
        checks.push(CheckResult {
            name: format!("{} conditional identity at r = 2 (TV)", model.label()),
            estimate: rep.tv_distance,
            std_error: rep.tv_std_error,
            reference: 0.0,
            reference_std_error: 0.0,
            tolerance: 3.0,
            passed: rep.agrees(3.0),
        });
    }
    Ok(ExampleReport { seed, n_mc, checks })
}
