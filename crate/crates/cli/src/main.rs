//! `revesz`: coverage experiments and asymptotic constants from the command line.
//!
//! Exit codes: 0 on success, 2 when the configuration cannot be read or
//! fails validation, 1 for any other failure.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use revesz::asymp::{self, Regime, Z_95};
use revesz::infer::ResidualMode;
use revesz::seq::validate_assumptions;
use revesz::simlab::{
    self, CoverageReport, DesignDensity, Estimator, EstimatorSelection, RegressionModel, SimConfig,
};
use revesz::{EstimatorConfig, Kernel, KernelFamily, Mode};

const SCHEMA_VERSION: u32 = 1;

/// Recursive kernel regression: coverage experiments and constants.
#[derive(Parser, Debug)]
#[command(name = "revesz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coverage for every n in {50, 100, 200} and d in {1, 2}.
    CoverageTable(Common),
    /// Coverage of a single (d, n) cell.
    CoverageCell(Common),
    /// Standardized-error variance (or bias with --bias) at one point.
    CltCheck {
        #[command(flatten)]
        common: Common,
        /// Check the bias constant of the averaged estimator instead.
        #[arg(long)]
        bias: bool,
    },
    /// Check the sequence assumptions of a configuration.
    ValidateConfig {
        #[command(flatten)]
        common: Common,
        /// Which estimator's assumptions to check.
        #[arg(long, default_value = "averaged", value_parser = parse_mode)]
        mode: Mode,
    },
    /// Print ξ, m2, limiting bias and variance, optimal q and levels.
    Constants {
        #[command(flatten)]
        common: Common,
        /// Bandwidth exponent; defaults to the configured bandwidth's.
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Weight exponent; defaults to the configured weights'.
        #[arg(long, allow_negative_numbers = true)]
        q: Option<f64>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<RegressionModel>,
    #[arg(long)]
    design: Option<DesignDensity>,
    /// Noise scale.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Evaluation point; repeat for several.
    #[arg(long, allow_negative_numbers = true)]
    x: Vec<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    estimator: Option<EstimatorSelection>,
    /// Write CSV here and print the text table to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "averaged" => Ok(Mode::Averaged),
        "generalized" => Ok(Mode::Generalized),
        other => Err(format!("unknown mode {other:?} (expected averaged or generalized)")),
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    schema_version: u32,
    model: RegressionModel,
    design: DesignDensity,
    d: f64,
    n: usize,
    points: Vec<f64>,
    reps: usize,
    seed: u64,
    #[serde(default)]
    estimators: EstimatorSelection,
    #[serde(default = "default_kernel")]
    kernel: KernelFamily,
    #[serde(default = "EstimatorConfig::undersmoothing")]
    sequences: EstimatorConfig,
    #[serde(default)]
    residual_mode: ResidualMode,
}

fn default_kernel() -> KernelFamily {
    KernelFamily::Gaussian
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_sim(&SimConfig::new(
            RegressionModel::Cosine,
            DesignDensity::StdNormal,
            1.0,
            50,
            5000,
            42,
        ))
    }
}

impl RunConfig {
    fn from_sim(sim: &SimConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            model: sim.model,
            design: sim.design,
            d: sim.d,
            n: sim.n,
            points: sim.points.clone(),
            reps: sim.reps,
            seed: sim.seed,
            estimators: sim.estimators,
            kernel: sim.kernel,
            sequences: sim.estimator_cfg,
            residual_mode: sim.residual_mode,
        }
    }

    fn to_sim(&self) -> SimConfig {
        SimConfig {
            model: self.model,
            design: self.design,
            d: self.d,
            n: self.n,
            reps: self.reps,
            points: self.points.clone(),
            estimator_cfg: self.sequences,
            kernel: self.kernel,
            seed: self.seed,
            estimators: self.estimators,
            residual_mode: self.residual_mode,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn from_core(e: revesz::Error) -> Self {
        use revesz::Error::*;
        match e {
            InvalidSequence(_) | InvalidConfig(_) | AssumptionsFailed(_) | ContractionViolation { .. }
            | InvalidStepsize { .. } | DivergentXi { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            if cfg.schema_version != SCHEMA_VERSION {
                return Err(Failure::Config(format!(
                    "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                    cfg.schema_version
                )));
            }
            cfg
        }
        None => RunConfig::default(),
    };
    if let Some(v) = common.model {
        cfg.model = v;
    }
    if let Some(v) = common.design {
        cfg.design = v;
    }
    if let Some(v) = common.d {
        cfg.d = v;
    }
    if let Some(v) = common.n {
        cfg.n = v;
    }
    if !common.x.is_empty() {
        cfg.points = common.x.clone();
    }
    if let Some(v) = common.reps {
        cfg.reps = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.estimator {
        cfg.estimators = v;
    }
    Ok(cfg)
}

fn emit_report(report: &CoverageReport, out: Option<&PathBuf>) -> Result<(), Failure> {
    let io_err = |e: &dyn std::fmt::Display| Failure::Runtime(e.to_string());
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_err(&format!("{}: {e}", path.display())))?;
            report.write_csv(io::BufWriter::new(file)).map_err(|e| io_err(&e))?;
            print!("{}", report.to_text_table());
        }
        None => report.write_csv(io::stdout().lock()).map_err(|e| io_err(&e))?,
    }
    Ok(())
}

fn validated(cfg: &RunConfig) -> Result<SimConfig, Failure> {
    let sim = cfg.to_sim();
    match sim.validate() {
        Err(revesz::Error::AssumptionsFailed(report)) => Err(Failure::Config(report.to_string())),
        Err(e) => Err(Failure::from_core(e)),
        Ok(()) => Ok(sim),
    }
}

fn coverage(cfg: &RunConfig, common: &Common, table: bool) -> Result<(), Failure> {
    let sim = validated(cfg)?;
    let report = if table {
        simlab::run_table(sim.model, sim.design, &sim)
    } else {
        simlab::run_cell(&sim)
    }
    .map_err(Failure::from_core)?;
    emit_report(&report, common.out.as_ref())
}

fn clt_check(cfg: &RunConfig, bias: bool) -> Result<(), Failure> {
    let sim = validated(cfg)?;
    let x = sim.points[0];
    let mut out = io::stdout().lock();
    if bias {
        let diag = simlab::bias_diagnostic(&sim, x).map_err(Failure::from_core)?;
        let _ = writeln!(
            out,
            "averaged x={} n={} reps={}: mean h^-2 (r_bar - r) = {:.6} (se {:.6}), limit {:.6}, relative error {:.4}",
            diag.x,
            diag.n,
            diag.reps,
            diag.mean,
            diag.std_error,
            diag.limit,
            diag.relative_error()
        );
        return Ok(());
    }
    for est in [Estimator::Nw, Estimator::Averaged] {
        if !sim.estimators.includes(est) {
            continue;
        }
        let diag = simlab::clt_diagnostic(&sim, x, est).map_err(Failure::from_core)?;
        let _ = writeln!(
            out,
            "{} x={} n={} reps={}: limit variance {:.6}, standardized mean {:.4}, variance {:.4}, KS distance {:.4}",
            est.name(),
            diag.x,
            diag.n,
            diag.reps,
            diag.limit_variance,
            diag.mean,
            diag.variance,
            diag.ks_distance
        );
    }
    Ok(())
}

fn validate_config(cfg: &RunConfig, mode: Mode) -> Result<(), Failure> {
    let report = validate_assumptions(&cfg.sequences, mode);
    print!("{report}");
    let kernel = Kernel::from_family(cfg.kernel);
    let contraction = cfg.sequences.check_contraction(&kernel);
    match &contraction {
        Ok(()) => println!("[PASS] contraction: sup gamma_n / h_n * |K|_inf <= 1"),
        Err(e) => println!("[FAIL] contraction: {e}"),
    }
    if report.passed() && contraction.is_ok() {
        Ok(())
    } else {
        Err(Failure::Config("configuration does not satisfy the assumptions".into()))
    }
}

fn show(v: revesz::Result<f64>) -> String {
    match v {
        Ok(v) => format!("{v:.6}"),
        Err(e) => format!("n/a ({e})"),
    }
}

fn constants(cfg: &RunConfig, a: Option<f64>, q: Option<f64>) -> Result<(), Failure> {
    let seqs = &cfg.sequences;
    let a = a.unwrap_or_else(|| seqs.a());
    let q = q.unwrap_or_else(|| seqs.q());
    let kernel = Kernel::from_family(cfg.kernel);
    let oracle = cfg.to_sim().sim_model();
    let xi = asymp::xi(&seqs.stepsize);
    let factor = asymp::variance_factor(q, a);

    println!("a = {a}");
    println!("q = {q}");
    println!("xi = {}", show(xi.clone()));
    println!("optimal q = {}", asymp::optimal_q(a));
    println!("variance factor (1-q)^2/(1+a-2q) = {}", show(factor.clone()));
    println!("level nw = {:.4}", asymp::theoretical_level(1.0, 1.0, Z_95));
    println!(
        "level averaged = {}",
        show(factor.map(|t| asymp::theoretical_level(1.0, t, Z_95)))
    );
    for &x in &cfg.points {
        let f = oracle.design.pdf(x);
        let var = cfg.d * cfg.d;
        let m2 = asymp::m2(&oracle, x, &kernel);
        println!("x = {x}");
        println!("  m2 = {}", show(m2.clone()));
        println!("  nw variance = {}", show(asymp::nadaraya_watson_variance(&oracle, x, &kernel)));
        let Ok(m2) = m2 else { continue };
        let sq = kernel.square_integral();
        let avg = asymp::averaged_limit(f, m2, var, sq, a, q, Regime::Balanced { c: 0.0 });
        println!("  averaged variance = {}", show(avg.map(|p| p.variance)));
        let avg_bias = asymp::averaged_limit(f, m2, var, sq, a, q, Regime::BiasDominant);
        println!("  averaged bias-dominant bias = {}", show(avg_bias.map(|p| p.bias)));
        if let Ok(xi) = xi {
            let gen = asymp::generalized_limit(f, m2, var, sq, a, xi, Regime::Balanced { c: 0.0 });
            println!("  generalized variance = {}", show(gen.map(|p| p.variance)));
            let gen_bias = asymp::generalized_limit(f, m2, var, sq, a, xi, Regime::BiasDominant);
            println!("  generalized bias-dominant bias = {}", show(gen_bias.map(|p| p.bias)));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = match &cli.command {
        Command::CoverageTable(c) | Command::CoverageCell(c) => c,
        Command::CltCheck { common, .. }
        | Command::ValidateConfig { common, .. }
        | Command::Constants { common, .. } => common,
    };
    let cfg = load(common)?;
    if common.dump_config {
        let json = serde_json::to_string_pretty(&cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
        println!("{json}");
        return Ok(());
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = common.threads {
            if t == 0 {
                return Err(Failure::Config("--threads must be positive".into()));
            }
            b = b.num_threads(t);
        }
        b.build().map_err(|e| Failure::Runtime(e.to_string()))?
    };
    pool.install(|| match &cli.command {
        Command::CoverageTable(c) => coverage(&cfg, c, true),
        Command::CoverageCell(c) => coverage(&cfg, c, false),
        Command::CltCheck { bias, .. } => clt_check(&cfg, *bias),
        Command::ValidateConfig { mode, .. } => validate_config(&cfg, *mode),
        Command::Constants { a, q, .. } => constants(&cfg, *a, *q),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
