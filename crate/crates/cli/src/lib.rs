//! Command-line front end: argument parsing, dispatch and result files.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use flgame::best_response::{self, Init};
use flgame::fl_sim::{self, DatasetConfig, SyntheticDataset, TrainingConfig};
use flgame::sweep::{self, Solver};
use flgame::{fixed_point, game, thresholds, GameSpec, StrategyProfile};
use serde::Serialize;

/// Exit code for invalid input.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit code for solver or training failures.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "flgame", version, about = "Equilibria and reward thresholds of the federated-learning effort game")]
pub struct Cli {
    /// Directory for result files (created if missing).
    #[arg(long, global = true, env = "FLGAME_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute λ̄, λ*, λ₁, λ₂, c₁ and c₂ for a homogeneous game.
    Thresholds(SpecArg),
    /// Run best-response dynamics and write the final profile and a trace.
    Solve(SolveArgs),
    /// Enumerate every equilibrium of a homogeneous game.
    Equilibria(SpecArg),
    /// Solve the game over a grid of reward factors.
    Sweep(SweepArgs),
    /// Train FedAvg at the equilibrium efforts for several reward factors.
    FlSim(FlSimArgs),
}

#[derive(Args, Debug)]
pub struct SpecArg {
    /// Game spec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Starting profile: `q` (lower bounds), `Q` (upper bounds), `mid`, or a JSON file.
    #[arg(long, default_value = "q")]
    pub init: String,
    /// Stop when no effort moves by more than this in a sweep.
    #[arg(long, default_value_t = best_response::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = best_response::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SolverArg {
    BestResponse,
    FixedPoint,
    Both,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::BestResponse => Solver::BestResponse,
            SolverArg::FixedPoint => Solver::FixedPoint,
            SolverArg::Both => Solver::Both,
        }
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    #[arg(long)]
    pub lambda_min: f64,
    #[arg(long)]
    pub lambda_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub solver: SolverArg,
}

#[derive(Args, Debug)]
pub struct FlSimArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Comma-separated reward factors. Defaults to four cases placed around λ₁, λ* and λ₂.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Seed for the synthetic dataset.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// FedAvg rounds. Defaults to `T` from the game file.
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    /// Mini-batch size. Defaults to half of each client's data.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub samples_per_client: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 40)]
    pub features: usize,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid input: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl From<flgame::Error> for CliError {
    fn from(e: flgame::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    fs::create_dir_all(&cli.out_dir).map_err(|e| {
        CliError::Validation(format!("cannot create output directory {}: {e}", cli.out_dir.display()))
    })?;
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Thresholds(args) => cmd_thresholds(args, out),
        Command::Solve(args) => cmd_solve(args, out),
        Command::Equilibria(args) => cmd_equilibria(args, out),
        Command::Sweep(args) => cmd_sweep(args, out),
        Command::FlSim(args) => cmd_fl_sim(args, out),
    }
}

fn load_spec(path: &Path) -> CliResult<GameSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read spec file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("spec file {}: {e}", path.display())))
}

/// Shortest decimal form that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(contents)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> CliResult<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_file(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_thresholds(args: &SpecArg, out: &Path) -> CliResult<()> {
    let spec = load_spec(&args.spec)?;
    let report = thresholds::compute_thresholds(&spec)?;
    println!("{:<14} {:>20}", "quantity", "value");
    for (name, value) in [
        ("lambda_bar", report.lambda_bar),
        ("lambda_star", report.lambda_star),
        ("lambda_1", report.lambda_1),
        ("lambda_2", report.lambda_2),
        ("c1", report.c1),
        ("c2", report.c2),
    ] {
        println!("{name:<14} {value:>20.12}");
    }
    println!("{:<14} {:>20}", "jump_occurs", report.jump_occurs);
    write_json(&out.join("thresholds.json"), &report)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    profile: &'a [Vec<f64>],
    average_effort: f64,
    potential: f64,
    iterations: usize,
    converged: bool,
    eps: f64,
    per_player_gap: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    max_kkt_residual: Option<f64>,
}

fn parse_init(raw: &str, spec: &GameSpec) -> CliResult<StrategyProfile> {
    let init = match raw {
        "q" | "lower" => Init::Lower,
        "Q" | "upper" => Init::Upper,
        "mid" => Init::Mid,
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read init file {path}: {e}")))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("init file {path}: {e}")))?;
            let profile = if let Ok(flat) = serde_json::from_value::<Vec<f64>>(value.clone()) {
                StrategyProfile::homogeneous(flat)
            } else {
                let cols: Vec<Vec<f64>> = serde_json::from_value(value).map_err(|e| {
                    CliError::Validation(format!("init file {path}: expected a list of efforts per player: {e}"))
                })?;
                StrategyProfile::from_players(cols)
            };
            Init::Profile(profile)
        }
    };
    Ok(init.profile(spec))
}

fn cmd_solve(args: &SolveArgs, out: &Path) -> CliResult<()> {
    let spec = load_spec(&args.spec.spec)?;
    let init = parse_init(&args.init, &spec)?;
    let initial_gap = game::eps_ne_gap(&spec, &init)?.eps;
    let run = best_response::run_best_response(&spec, &init, args.max_iters, args.tol)?;
    if !run.converged {
        log::warn!("best-response dynamics stopped after {} sweeps without converging", run.iterations);
    }
    let heterogeneous = spec.budget_bounds().is_ok();
    let report = SolveReport {
        profile: run.final_profile.players(),
        average_effort: run.final_profile.average_effort(spec.data_weights()),
        potential: *run.potential_trace.last().expect("trace starts with the initial potential"),
        iterations: run.iterations,
        converged: run.converged,
        eps: run.certificate.eps,
        per_player_gap: &run.certificate.per_player_gap,
        max_kkt_residual: heterogeneous.then_some(run.max_kkt_residual),
    };
    println!(
        "{} after {} sweeps, eps = {:e}, average effort = {}",
        if run.converged { "converged" } else { "stopped" },
        run.iterations,
        run.certificate.eps,
        report.average_effort
    );
    let mut rows = vec![vec!["0".to_string(), num(run.potential_trace[0]), String::new(), num(initial_gap)]];
    for k in 0..run.iterations {
        rows.push(vec![
            (k + 1).to_string(),
            num(run.potential_trace[k + 1]),
            num(run.step_norms[k]),
            num(run.eps_trace[k]),
        ]);
    }
    write_json(&out.join("solve.json"), &report)?;
    write_csv(&out.join("trace.csv"), "iter,potential,step_norm,eps_gap", &rows)
}

fn cmd_equilibria(args: &SpecArg, out: &Path) -> CliResult<()> {
    let spec = load_spec(&args.spec)?;
    let solution = fixed_point::solve_all_equilibria(&spec)?;
    match solution.kind {
        fixed_point::SolutionKind::Unique => println!("unique equilibrium, aggregate {}", solution.aggregates[0]),
        fixed_point::SolutionKind::Continuum => println!(
            "continuum of equilibria, aggregates [{}, {}]",
            solution.aggregates[0], solution.aggregates[1]
        ),
    }
    write_json(&out.join("equilibria.json"), &solution)
}

#[derive(Serialize)]
struct SweepSidecar {
    analytic: thresholds::ThresholdReport,
    empirical: Option<sweep::EmpiricalThresholds>,
    empirical_error: Option<String>,
}

fn cmd_sweep(args: &SweepArgs, out: &Path) -> CliResult<()> {
    if args.points < 2 {
        return Err(CliError::Validation(format!("--points must be at least 2, got {}", args.points)));
    }
    if !(args.lambda_min >= 0.0 && args.lambda_min <= args.lambda_max && args.lambda_max.is_finite()) {
        return Err(CliError::Validation(format!(
            "need 0 <= --lambda-min <= --lambda-max, got {} and {}",
            args.lambda_min, args.lambda_max
        )));
    }
    let spec = load_spec(&args.spec.spec)?;
    let analytic = thresholds::compute_thresholds(&spec)?;
    let grid = sweep::linspace(args.lambda_min, args.lambda_max, args.points);
    let rows = sweep::sweep_lambda(&spec, &grid, args.solver.into())?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} grid points failed to solve");
    }
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.lambda),
                num(r.s_bar),
                r.region.as_str().to_string(),
                r.iterations.to_string(),
                num(r.eps),
                r.discrepancy.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    let (empirical, empirical_error) = match sweep::detect_thresholds_empirically(&rows, 1e-8) {
        Ok(found) => (Some(found), None),
        Err(e) => (None, Some(e.to_string())),
    };
    write_csv(
        &out.join("sweep.csv"),
        "lambda,s_bar,region,iterations,eps,discrepancy",
        &csv_rows,
    )?;
    write_json(
        &out.join("sweep_thresholds.json"),
        &SweepSidecar {
            analytic,
            empirical,
            empirical_error,
        },
    )?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} grid points failed", rows.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct CaseSummary {
    case: usize,
    lambda: f64,
    average_effort: f64,
    applied_efforts: Vec<usize>,
    final_loss: f64,
    final_accuracy: f64,
}

#[derive(Serialize)]
struct FlSummary {
    seed: u64,
    rounds: usize,
    cases: Vec<CaseSummary>,
}

fn cmd_fl_sim(args: &FlSimArgs, out: &Path) -> CliResult<()> {
    let spec = load_spec(&args.spec.spec)?;
    let lambdas = match &args.lambdas {
        Some(l) if l.is_empty() => return Err(CliError::Validation("--lambdas is empty".into())),
        Some(l) => l.clone(),
        None => fl_sim::threshold_cases(&thresholds::compute_thresholds(&spec)?).to_vec(),
    };
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(CliError::Validation(format!("reward factor {l} must be finite and nonnegative")));
    }
    if args.classes < 2 || args.features == 0 || args.samples_per_client == 0 {
        return Err(CliError::Validation(
            "need --classes >= 2, --features >= 1 and --samples-per-client >= 1".into(),
        ));
    }
    if !(args.learning_rate > 0.0) {
        return Err(CliError::Validation(format!("--learning-rate must be positive, got {}", args.learning_rate)));
    }
    let rounds = args.rounds.unwrap_or(spec.num_rounds());
    let dataset = SyntheticDataset::generate(&DatasetConfig {
        num_clients: spec.num_players(),
        num_classes: args.classes,
        num_features: args.features,
        samples_per_client: args.samples_per_client,
        seed: args.seed,
        ..Default::default()
    });
    let config = TrainingConfig {
        rounds,
        learning_rate: args.learning_rate,
        batch_size: args.batch_size,
    };
    let traces = fl_sim::run_cases(&spec, &lambdas, &dataset, &config)?;
    let mut cases = Vec::new();
    for (k, trace) in traces.iter().enumerate() {
        let rows: Vec<Vec<String>> = (0..trace.loss.len())
            .map(|t| vec![(t + 1).to_string(), num(trace.loss[t]), num(trace.accuracy[t])])
            .collect();
        write_csv(&out.join(format!("fl_case{}.csv", k + 1)), "round,loss,accuracy", &rows)?;
        println!(
            "case {}: lambda = {}, average effort = {}, final accuracy = {:.4}",
            k + 1,
            trace.lambda,
            trace.average_effort,
            trace.final_accuracy()
        );
        cases.push(CaseSummary {
            case: k + 1,
            lambda: trace.lambda,
            average_effort: trace.average_effort,
            applied_efforts: trace.applied_efforts.clone(),
            final_loss: trace.final_loss(),
            final_accuracy: trace.final_accuracy(),
        });
    }
    write_json(
        &out.join("fl_summary.json"),
        &FlSummary {
            seed: args.seed,
            rounds,
            cases,
        },
    )
}
