//! `sparsedir` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or parameter error, 2 data error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sparsedir::angular::{
    estimate_z_law, g_beta_direct, g_beta_mc, prob_axis, prob_c_beta_mc, prob_null_on_complement,
};
use sparsedir::detection::{damex, detect, DetectionConfig, DEFAULT_P};
use sparsedir::experiments::{run_example_checks, run_table, simulate, Design, ExperimentConfig, Scale};
use sparsedir::io::{parse_vector, read_csv, write_csv, write_json};
use sparsedir::projection::{project_median_slice, project_sorted_slice};
use sparsedir::rng::stream_rng;
use sparsedir::{Direction, SpectralModel};

#[derive(Parser, Debug)]
#[command(name = "sparsedir", version, about = "Sparse regular variation: simplex projection and extremal direction detection")]
struct Cli {
    /// Maximum number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project a nonnegative vector onto the positive sphere of radius z.
    Project(ProjectArgs),
    /// Detect extremal directions with the projection method.
    Detect(DetectArgs),
    /// Detect extremal directions with the DAMEX baseline.
    Damex(DamexArgs),
    /// Generate a data set from one of the simulation designs.
    Simulate(SimulateArgs),
    /// Monte-Carlo estimates of angular-law quantities.
    Oracle(OracleArgs),
    /// Run a replication table or the angular-law checks.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProjectMethod {
    Sorted,
    Median,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    /// Radius of the positive sphere.
    #[arg(long, default_value_t = 1.0)]
    z: f64,
    /// Comma- or space-separated vector.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    vector: Option<String>,
    /// File holding the vector.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProjectMethod::Sorted)]
    method: ProjectMethod,
    /// Pivot seed for the median method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CommonDetect {
    /// Input CSV (one observation per row).
    #[arg(long)]
    input: PathBuf,
    /// Number of exceedances (default: ceil(sqrt(n))).
    #[arg(long)]
    k: Option<usize>,
    /// Threshold weight p; faces with mass <= p / |C| are dropped.
    #[arg(long, default_value_t = DEFAULT_P)]
    p: f64,
    /// Output JSON path (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    common: CommonDetect,
    /// Rank-transform the margins first.
    #[arg(long)]
    rank_transform: bool,
}

#[derive(Args, Debug)]
struct DamexArgs {
    #[command(flatten)]
    common: CommonDetect,
    /// Rectangle tolerance in (0, 1).
    #[arg(long)]
    epsilon: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelName {
    AsymptIndep,
    Dependent,
    Nonmaximal,
}

impl From<ModelName> for Design {
    fn from(m: ModelName) -> Design {
        match m {
            ModelName::AsymptIndep => Design::AsymptIndep,
            ModelName::Dependent => Design::Dependent,
            ModelName::Nonmaximal => Design::Nonmaximal,
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    #[arg(long)]
    n: usize,
    /// Dimension (asympt-indep only; the other designs are fixed).
    #[arg(long)]
    d: Option<usize>,
    /// Data seed.
    #[arg(long)]
    seed: u64,
    /// Seed of the correlation matrix (asympt-indep; default: --seed).
    #[arg(long)]
    model_seed: Option<u64>,
    /// Componentwise power applied to the sample.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Output CSV; ground truth goes to `<output>.truth.json`.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LawName {
    Uniform,
    Proportional,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Quantity {
    /// P(Z in C_beta).
    Face,
    /// P(Z_j = 0 off beta).
    Null,
    /// P(Z_j = 1) for beta = {j}.
    Axis,
    /// G_beta(x).
    G,
    /// Empirical face law of Z.
    Law,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    model: LawName,
    /// Dimension of the uniform law.
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Quantity::Face)]
    quantity: Quantity,
    /// Direction as 0-based indices, e.g. `0,1`.
    #[arg(long)]
    beta: Option<String>,
    /// Point for `g`, one entry per coordinate.
    #[arg(long)]
    x: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Table id 1-4, or `examples` for the angular-law checks.
    #[arg(long)]
    table: String,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated sample sizes overriding the defaults.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Replications per model overriding the defaults.
    #[arg(long)]
    replications: Option<usize>,
    /// Draws for `--table examples`.
    #[arg(long, default_value_t = 1_000_000)]
    n_mc: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Desk,
    Full,
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => write_json(value, p)?,
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn run_project(a: ProjectArgs) -> Result<()> {
    let text = match (&a.vector, &a.input) {
        (Some(v), _) => v.clone(),
        (None, Some(p)) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        (None, None) => unreachable!("clap requires one of --vector/--input"),
    };
    let v = parse_vector(&text)?;
    let (w, diag) = match a.method {
        ProjectMethod::Sorted => project_sorted_slice(&v, a.z)?,
        ProjectMethod::Median => project_median_slice(&v, a.z, &mut stream_rng(a.seed, 0))?,
    };
    emit(&json!({ "w": w.values, "lambda": diag.lambda, "rho": diag.rho }), None)
}

fn load(path: &Path) -> Result<sparsedir::SampleMatrix> {
    Ok(read_csv(path)?.matrix)
}

fn run_detect(a: DetectArgs) -> Result<()> {
    let m = load(&a.common.input)?;
    let mut cfg = DetectionConfig::default()
        .with_p(a.common.p)
        .with_rank_transform(a.rank_transform);
    cfg.k = a.common.k;
    let report = detect(&m, &cfg)?;
    emit(&report, a.common.output.as_deref())
}

fn run_damex(a: DamexArgs) -> Result<()> {
    let m = load(&a.common.input)?;
    let mut cfg = DetectionConfig::default().with_p(a.common.p).with_epsilon(a.epsilon);
    cfg.k = a.common.k;
    let report = damex(&m, &cfg)?;
    emit(&report, a.common.output.as_deref())
}

fn truth_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

fn run_simulate(a: SimulateArgs) -> Result<()> {
    let design: Design = a.model.into();
    let model_seed = a.model_seed.unwrap_or(a.seed);
    let sim = simulate(design, a.n, a.d, model_seed, a.seed)?;
    let m = sparsedir::datagen::power_transform(&sim.matrix, a.q)?;
    let header: Vec<String> = (0..m.cols()).map(|j| format!("x{j}")).collect();
    write_csv(&m, Some(&header), &a.output)?;
    let sidecar = json!({
        "model": design.name(),
        "n": a.n,
        "d": m.cols(),
        "seed": a.seed,
        "model_seed": model_seed,
        "q": a.q,
        "truth": sim.truth,
    });
    write_json(&sidecar, &truth_path(&a.output))?;
    eprintln!("seed = {}, model seed = {model_seed}", a.seed);
    Ok(())
}

fn parse_beta(beta: Option<&str>) -> Result<Direction> {
    let text = beta.ok_or_else(|| sparsedir::Error::InvalidParameter("--beta is required".into()))?;
    Ok(Direction::parse_list(text)?)
}

fn run_oracle(a: OracleArgs) -> Result<()> {
    let model = match a.model {
        LawName::Uniform => SpectralModel::uniform(a.d, a.alpha)?,
        LawName::Proportional => SpectralModel::proportional(a.alpha)?,
    };
    let closed = model.z_face_law();
    let value = match a.quantity {
        Quantity::Law => {
            let est = estimate_z_law(&model, a.n, a.seed)?;
            let faces: Vec<_> = est
                .direction_probs
                .keys()
                .map(|b| {
                    json!({
                        "indices": b,
                        "estimate": est.prob(b),
                        "std_error": est.std_error(b),
                        "closed_form": closed.as_ref().map(|c| c.get(b).copied().unwrap_or(0.0)),
                    })
                })
                .collect();
            json!({ "model": model.label(), "alpha": a.alpha, "n": a.n, "seed": a.seed, "faces": faces })
        }
        q => {
            let beta = parse_beta(a.beta.as_deref())?;
            let (est, direct, closed_form) = match q {
                Quantity::Face => (
                    prob_c_beta_mc(&model, &beta, a.n, a.seed)?,
                    estimate_z_law(&model, a.n, a.seed)?.face(&beta),
                    closed.as_ref().map(|c| c.get(&beta).copied().unwrap_or(0.0)),
                ),
                Quantity::Null => (
                    prob_null_on_complement(&model, &beta, a.n, a.seed)?,
                    estimate_z_law(&model, a.n, a.seed)?.mass_within(&beta),
                    closed.as_ref().map(|c| {
                        c.iter().filter(|(g, _)| g.is_subset_of(&beta)).map(|(_, p)| p).sum()
                    }),
                ),
                Quantity::Axis => {
                    if beta.len() != 1 {
                        return Err(sparsedir::Error::InvalidParameter("axis needs a single index".into()).into());
                    }
                    (
                        prob_axis(&model, beta.indices()[0], a.n, a.seed)?,
                        estimate_z_law(&model, a.n, a.seed)?.face(&beta),
                        closed.as_ref().map(|c| c.get(&beta).copied().unwrap_or(0.0)),
                    )
                }
                Quantity::G => {
                    let text = a
                        .x
                        .as_deref()
                        .ok_or_else(|| sparsedir::Error::InvalidParameter("--x is required for g".into()))?;
                    let x = parse_vector(text)?;
                    (
                        g_beta_mc(&model, &beta, &x, a.n, a.seed)?,
                        g_beta_direct(&model, &beta, &x, a.n, a.seed)?,
                        None,
                    )
                }
                Quantity::Law => unreachable!(),
            };
            json!({
                "model": model.label(),
                "alpha": a.alpha,
                "beta": beta,
                "n": a.n,
                "seed": a.seed,
                "estimate": est.estimate,
                "std_error": est.std_error,
                "direct": { "estimate": direct.estimate, "std_error": direct.std_error },
                "closed_form": closed_form,
            })
        }
    };
    emit(&value, None)
}

fn run_experiment(a: ExperimentArgs) -> Result<()> {
    if a.table == "examples" {
        let report = run_example_checks(a.seed, a.n_mc)?;
        std::fs::create_dir_all(&a.out_dir)?;
        write_json(&report, &a.out_dir.join("examples_summary.json"))?;
        for c in &report.checks {
            println!(
                "{} {}: {:?} (se {:?}) vs {:?}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.estimate,
                c.std_error,
                c.reference
            );
        }
        return Ok(());
    }
    let table: u32 = a
        .table
        .parse()
        .map_err(|_| sparsedir::Error::InvalidParameter(format!("unknown table id {:?}", a.table)))?;
    let scale = match a.scale {
        ScaleArg::Desk => Scale::Desk,
        ScaleArg::Full => Scale::Full,
    };
    let mut cfg = ExperimentConfig::new(table, scale, a.seed)?;
    if let Some(ns) = a.n {
        cfg.ns = ns;
    }
    if let Some(r) = a.replications {
        cfg.replications = r;
    }
    let res = run_table(&cfg)?;
    res.write(&a.out_dir)?;
    print!("{}", res.to_csv());
    eprintln!("seed = {}, runtime = {:.2} s", a.seed, res.runtime_seconds);
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<sparsedir::Error>() {
            return match e {
                sparsedir::Error::InvalidParameter(_) => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Project(a) => run_project(a),
        Command::Detect(a) => run_detect(a),
        Command::Damex(a) => run_damex(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Experiment(a) => run_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
