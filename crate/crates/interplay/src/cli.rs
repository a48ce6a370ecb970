//! Command-line entry points. The binary in `src/bin/interplay.rs` is a thin
//! wrapper over [`run`].
//!
//! Exit codes: 0 success (a domain-violation termination is a valid scientific
//! outcome), 1 usage/parameter error, 2 I/O error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::{
    classify_equilibrium, is_socially_balanced_rows, is_socially_balanced_triads,
    modulus_consensus, modulus_sign_consensus, BalanceVerdict, ConsensusKind,
    DEFAULT_SIGN_TOLERANCE,
};
use crate::dynamics::{simulate, SimulationConfig};
use crate::error::Error;
use crate::io;
use crate::montecarlo::{generic_initial, run_experiment, ExperimentParams};
use crate::render::{default_frames, filmstrip, render_frames, MatrixKind, RenderOptions};
use crate::types::{AppraisalMatrix, OpinionMatrix, Termination, Trajectory, DEFAULT_ROW_TOLERANCE};

#[derive(Parser, Debug)]
#[command(name = "interplay", version, about = "Coupled appraisal/opinion dynamics simulator")]
pub struct Cli {
    /// Optional TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate the coupled dynamics from an initial opinion matrix.
    Simulate(SimulateArgs),
    /// Monte Carlo validation of the non-vanishing appraisal condition.
    Validate(ValidateArgs),
    /// Run the analysis predicates on a provided matrix.
    Classify(ClassifyArgs),
    /// Render trajectory snapshots as grayscale heatmaps.
    Render(RenderArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct InputArgs {
    /// Inline matrix literal, rows separated by ';' (e.g. "1 2 5; -1 -2 5").
    #[arg(long)]
    pub matrix: Option<String>,
    /// Read the matrix from a whitespace-separated text file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Agents for a randomly generated initial condition.
    #[arg(long)]
    pub n: Option<usize>,
    /// Issues for a randomly generated initial condition.
    #[arg(long)]
    pub m: Option<usize>,
    /// Half-width of the uniform sampling support.
    #[arg(long)]
    pub support: Option<f64>,
    /// Seed for the generated initial condition.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Convergence tolerance on the max-norm change of Y.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Trajectory export format: text, csv, or both.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct ValidateArgs {
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub support: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub window_start: Option<usize>,
    #[arg(long)]
    pub window_end: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Interpret the matrix as an "opinion" or "appraisal" matrix.
    #[arg(long, default_value = "opinion")]
    pub kind: String,
    /// Value tolerance for equilibrium / consensus comparison.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct RenderArgs {
    /// Trajectory export produced by `simulate`.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Comma-separated step indices; defaults to 0, 1, midpoint, final.
    #[arg(long)]
    pub frames: Option<String>,
    #[arg(long)]
    pub cell_size: Option<u32>,
    /// Which matrices to draw: X, Y, or both.
    #[arg(long)]
    pub matrix: Option<String>,
}

/// Optional file-based configuration; sections mirror the subcommand flags.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub simulate: SimulateFileConfig,
    #[serde(default)]
    pub validate: ValidateFileConfig,
    #[serde(default)]
    pub render: RenderFileConfig,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateFileConfig {
    pub matrix: Option<String>,
    pub input: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub support: Option<f64>,
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub tol: Option<f64>,
    pub record_every: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct ValidateFileConfig {
    pub runs: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub support: Option<f64>,
    pub seed: Option<u64>,
    pub window_start: Option<usize>,
    pub window_end: Option<usize>,
    pub threshold: Option<f64>,
    pub epsilon: Option<f64>,
    pub xi: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct RenderFileConfig {
    pub trajectory: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub frames: Option<String>,
    pub cell_size: Option<u32>,
    pub matrix: Option<String>,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::usage(format!("bad config file: {e}")))
        }
    }
}

fn resolve_input(args: &InputArgs, row_tolerance: f64) -> CliResult<OpinionMatrix> {
    let generator = args.n.is_some() || args.m.is_some() || args.seed.is_some();
    let sources = [args.matrix.is_some(), args.input.is_some(), generator];
    match sources.iter().filter(|&&s| s).count() {
        0 => return Err(CliError::usage(
            "no input: provide --matrix, --input, or a generator spec (--n --m --seed)",
        )),
        1 => {}
        _ => return Err(CliError::usage("provide exactly one input source")),
    }
    if let Some(literal) = &args.matrix {
        let rows = io::parse_inline_matrix(literal)?;
        return Ok(OpinionMatrix::from_rows(&rows, row_tolerance)?);
    }
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let rows = io::parse_matrix_text(&text)?;
        return Ok(OpinionMatrix::from_rows(&rows, row_tolerance)?);
    }
    let n = args
        .n
        .ok_or_else(|| CliError::usage("generator input requires --n"))?;
    let m = args
        .m
        .ok_or_else(|| CliError::usage("generator input requires --m"))?;
    let support = args.support.unwrap_or(1.0);
    let seed = args.seed.unwrap_or(0);
    if n < 1 || m < 1 || !(support > 0.0) {
        return Err(CliError::usage("generator requires n, m >= 1 and support > 0"));
    }
    Ok(generic_initial(n, m, support, seed).0)
}

fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, write: impl FnOnce(&mut fs::File) -> std::io::Result<()>) -> CliResult<()> {
    let mut file = fs::File::create(path)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))?;
    write(&mut file).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn describe_termination(t: &Termination) -> String {
    match t {
        Termination::Converged { step } => format!("converged at step {step}"),
        Termination::MaxStepsReached { step } => format!("max steps reached ({step})"),
        Termination::DomainViolation { step, row } => {
            format!("domain violation at step {step} (agent {row} opinion row vanished)")
        }
    }
}

fn describe_consensus(kind: ConsensusKind) -> &'static str {
    match kind {
        ConsensusKind::None => "none",
        ConsensusKind::SignConsensus => "sign consensus (single faction)",
        ConsensusKind::BipartiteSignConsensus => "bipartite sign consensus (two factions)",
        ConsensusKind::Consensus => "consensus (single faction)",
        ConsensusKind::BipartiteConsensus => "bipartite consensus (two factions)",
    }
}

fn describe_balance(v: &BalanceVerdict) -> String {
    if v.balanced {
        let factions = v
            .partition
            .as_ref()
            .map(|p| if p.is_single_faction() { "single faction" } else { "two factions" })
            .unwrap_or("unknown partition");
        format!("balanced ({factions})")
    } else {
        format!("unbalanced ({:?})", v.witness)
    }
}

fn print_final_analysis(traj: &Trajectory) {
    let final_y = &traj.last().opinion;
    let sign = modulus_sign_consensus(final_y, DEFAULT_SIGN_TOLERANCE);
    let value = modulus_consensus(final_y, 1e-6);
    println!(
        "final modulus sign-consensus: {}",
        describe_consensus(sign.kind)
    );
    println!("final modulus consensus:      {}", describe_consensus(value.kind));
    if let Some(x) = &traj.last().appraisal {
        let balance = is_socially_balanced_triads(x, DEFAULT_SIGN_TOLERANCE);
        println!("final appraisal balance:      {}", describe_balance(&balance));
    }
    match classify_equilibrium(final_y, 1e-6) {
        Ok(desc) => {
            let labels: Vec<String> = desc
                .rho
                .labels()
                .entries()
                .iter()
                .map(|s| if *s > 0 { "+".into() } else { "-".to_string() })
                .collect();
            println!(
                "equilibrium: coefficients {:?}, factions [{}], residual {:.3e}",
                desc.coefficients,
                labels.join(""),
                desc.residual
            );
        }
        Err(_) => println!("equilibrium: final state not classified as an equilibrium"),
    }
}

fn cmd_simulate(args: &SimulateArgs, file: &SimulateFileConfig) -> CliResult<()> {
    let input = InputArgs {
        matrix: args.input.matrix.clone().or_else(|| file.matrix.clone()),
        input: args.input.input.clone().or_else(|| file.input.clone()),
        n: args.input.n.or(file.n),
        m: args.input.m.or(file.m),
        support: args.input.support.or(file.support),
        seed: args.input.seed.or(file.seed),
    };
    let config = SimulationConfig {
        max_steps: args.max_steps.or(file.max_steps).unwrap_or(1000),
        convergence_tolerance: args.tol.or(file.tol).unwrap_or(1e-9),
        row_tolerance: DEFAULT_ROW_TOLERANCE,
        record_every: args.record_every.or(file.record_every).unwrap_or(1),
    };
    if config.max_steps < 1 || config.record_every < 1 {
        return Err(CliError::usage("max-steps and record-every must be >= 1"));
    }
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = args
        .format
        .clone()
        .or_else(|| file.format.clone())
        .unwrap_or_else(|| "text".into());
    if !matches!(format.as_str(), "text" | "csv" | "both") {
        return Err(CliError::usage("--format must be text, csv, or both"));
    }

    let y0 = resolve_input(&input, config.row_tolerance)?;
    let traj = simulate(&y0, &config);

    ensure_out_dir(&out_dir)?;
    if format == "text" || format == "both" {
        let path = out_dir.join("trajectory.txt");
        write_file(&path, |f| io::write_trajectory(f, &traj))?;
        println!("wrote {}", path.display());
    }
    if format == "csv" || format == "both" {
        let path = out_dir.join("trajectory.csv");
        write_file(&path, |f| io::write_trajectory_csv(f, &traj))?;
        println!("wrote {}", path.display());
    }

    println!(
        "simulated {} agents on {} issues: {}",
        y0.n(),
        y0.m(),
        describe_termination(&traj.termination)
    );
    print_final_analysis(&traj);
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, file: &ValidateFileConfig) -> CliResult<()> {
    let defaults = ExperimentParams::default();
    let params = ExperimentParams {
        n: args.n.or(file.n).unwrap_or(defaults.n),
        m: args.m.or(file.m).unwrap_or(defaults.m),
        support: args.support.or(file.support).unwrap_or(defaults.support),
        runs: args.runs.or(file.runs).unwrap_or(defaults.runs),
        master_seed: args.seed.or(file.seed).unwrap_or(defaults.master_seed),
        window_start: args
            .window_start
            .or(file.window_start)
            .unwrap_or(defaults.window_start),
        window_end: args
            .window_end
            .or(file.window_end)
            .unwrap_or(defaults.window_end),
        threshold: args.threshold.or(file.threshold).unwrap_or(defaults.threshold),
        epsilon: args.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
        xi: args.xi.or(file.xi).unwrap_or(defaults.xi),
    };
    params.validate()?;
    let report = run_experiment(&params)?;

    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    ensure_out_dir(&out_dir)?;
    let path = out_dir.join("report.json");
    write_file(&path, |f| io::write_report(f, &report))?;
    println!("wrote {}", path.display());

    println!(
        "runs: {} completed, {} non-vanishing",
        report.n_completed, report.successes
    );
    println!("p_hat = {}", report.p_hat);
    println!(
        "chernoff minimum N for epsilon {} and xi {}: {}",
        params.epsilon, params.xi, report.chernoff_minimum
    );
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> CliResult<()> {
    let tol = args.tol.unwrap_or(1e-6);
    match args.kind.as_str() {
        "opinion" => {
            let y = resolve_input(&args.input, DEFAULT_ROW_TOLERANCE)?;
            let sign = modulus_sign_consensus(&y, DEFAULT_SIGN_TOLERANCE);
            let value = modulus_consensus(&y, tol);
            println!("modulus sign-consensus: {}", describe_consensus(sign.kind));
            println!("modulus consensus:      {}", describe_consensus(value.kind));
            match classify_equilibrium(&y, tol) {
                Ok(desc) => println!(
                    "equilibrium: coefficients {:?}, residual {:.3e}",
                    desc.coefficients, desc.residual
                ),
                Err(e) => println!("equilibrium: no ({e})"),
            }
        }
        "appraisal" => {
            // appraisal input never goes through row validation
            let rows = if let Some(literal) = &args.input.matrix {
                io::parse_inline_matrix(literal)?
            } else if let Some(path) = &args.input.input {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
                io::parse_matrix_text(&text)?
            } else {
                return Err(CliError::usage(
                    "appraisal classification requires --matrix or --input",
                ));
            };
            let x = AppraisalMatrix::from_rows(&rows)?;
            let triads = is_socially_balanced_triads(&x, DEFAULT_SIGN_TOLERANCE);
            let by_rows = is_socially_balanced_rows(&x, DEFAULT_SIGN_TOLERANCE);
            println!("balance (triad test): {}", describe_balance(&triads));
            println!("balance (row test):   {}", describe_balance(&by_rows));
        }
        other => {
            return Err(CliError::usage(format!(
                "--kind must be opinion or appraisal, got {other:?}"
            )))
        }
    }
    Ok(())
}

fn parse_frames(spec: &str, traj: &Trajectory) -> CliResult<Vec<usize>> {
    let final_t = traj.last().t;
    let mut frames = Vec::new();
    for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let t = match token {
            "final" | "last" => final_t,
            "midpoint" | "mid" => final_t / 2,
            _ => token
                .parse()
                .map_err(|_| CliError::usage(format!("bad frame index {token:?}")))?,
        };
        frames.push(t);
    }
    frames.sort_unstable();
    frames.dedup();
    if frames.is_empty() {
        return Err(CliError::usage("no frames selected"));
    }
    Ok(frames)
}

fn cmd_render(args: &RenderArgs, file: &RenderFileConfig) -> CliResult<()> {
    let path = args
        .trajectory
        .clone()
        .or_else(|| file.trajectory.clone())
        .ok_or_else(|| CliError::usage("--trajectory is required"))?;
    let text = fs::File::open(&path)
        .map_err(|e| CliError::io(format!("cannot open {}: {e}", path.display())))?;
    let traj = io::read_trajectory(std::io::BufReader::new(text))?;

    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    ensure_out_dir(&out_dir)?;
    let options = RenderOptions {
        cell_size: args.cell_size.or(file.cell_size).unwrap_or(32),
        ..RenderOptions::default()
    };
    if options.cell_size == 0 {
        return Err(CliError::usage("--cell-size must be >= 1"));
    }
    let frames = match args.frames.clone().or_else(|| file.frames.clone()) {
        Some(spec) => parse_frames(&spec, &traj)?,
        None => default_frames(&traj),
    };
    let which = args
        .matrix
        .clone()
        .or_else(|| file.matrix.clone())
        .unwrap_or_else(|| "both".into());
    let kinds: Vec<MatrixKind> = match which.as_str() {
        "X" | "x" => vec![MatrixKind::Appraisal],
        "Y" | "y" => vec![MatrixKind::Opinion],
        "both" => vec![MatrixKind::Appraisal, MatrixKind::Opinion],
        other => {
            return Err(CliError::usage(format!(
                "--matrix must be X, Y, or both, got {other:?}"
            )))
        }
    };

    for kind in kinds {
        // X does not exist at t = 0; drop frames the matrix is absent from
        let usable: Vec<usize> = frames
            .iter()
            .copied()
            .filter(|&t| !(kind == MatrixKind::Appraisal && t == 0))
            .collect();
        let rendered = render_frames(&traj, kind, &usable, &options)?;
        for (t, img) in &rendered {
            let path = out_dir.join(format!("{}_t{t:04}.png", kind.label()));
            img.save(&path)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        let strip = filmstrip(&rendered, &options)?;
        let path = out_dir.join(format!("filmstrip_{}.png", kind.label()));
        strip
            .save(&path)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let file = match load_config(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args, &file.simulate),
        Command::Validate(args) => cmd_validate(args, &file.validate),
        Command::Classify(args) => cmd_classify(args),
        Command::Render(args) => cmd_render(args, &file.render),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
