//! `fidelity-bounds`: certified upper bounds, seesaw lower bounds and the
//! Bell certificate from the command line.
//!
//! Exit codes: 0 success, 1 input error, 2 solver did not reach optimality.

mod document;
mod generate;
mod report;

use std::fmt;
use std::io::Read;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use fidelity_core::hierarchy::{
    bell_dual_certificate, bell_measurement_basis, bell_optimal_strategy, separable_upper_bound, upper_bound,
    BoundReport, HierarchyConfig, DEFAULT_MAX_SIZE,
};
use fidelity_core::problems::{average_fidelity, bell_problem, build_problem};
use fidelity_core::sdp::{SolverSettings, Status};
use fidelity_core::seesaw::{seesaw_lower_bound, SeesawConfig};

use document::ProblemDocument;
use generate::{Family, GeneratorParams};
use report::{level_records, to_json, CertificateRecord, ReportDocument, SeesawRecord, SettingsEcho};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<fidelity_core::Error> for CliError {
    fn from(e: fidelity_core::Error) -> Self {
        use fidelity_core::Error;
        match e {
            Error::Solver(_) | Error::Eigen(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fidelity-bounds", version, about = "Bounds on the optimal fidelity of pure-state estimation")]
struct Cli {
    /// Seed for randomized searches.
    #[arg(long, global = true, env = "FIDELITY_BOUNDS_SEED", default_value_t = 0)]
    seed: u64,
    /// Solver progress on stderr (repeat for per-iteration output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified upper bounds F^(n) over global strategies.
    Bound(BoundArgs),
    /// Certified upper bounds F_S^(n) for problems shared between parties.
    LocalBound(BoundArgs),
    /// Attainable lower bound by seesaw over global strategies.
    Seesaw(SeesawArgs),
    /// Analytic dual certificate and optimal product strategy for Bell states.
    CertifyBell(CertifyArgs),
    /// Print the problem document of a built-in family.
    Generate(ProblemArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["problem", "generate"])))]
struct ProblemArgs {
    /// Problem document, or `-` for stdin.
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Built-in problem family.
    #[arg(long, value_enum)]
    generate: Option<Family>,
    /// Dimension of the isotropic family.
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated prior probabilities.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    probs: Option<Vec<f64>>,
    /// Overlap of the two pure states (two-pure, copies).
    #[arg(long)]
    overlap: Option<f64>,
    /// Number of copies (copies).
    #[arg(long)]
    copies: Option<usize>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Feasibility and gap tolerance of the interior-point solver.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

impl SolverArgs {
    fn settings(&self, verbosity: u8) -> Result<SolverSettings, CliError> {
        let s = SolverSettings {
            feasibility_tolerance: self.tolerance,
            gap_tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            verbosity,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    source: ProblemArgs,
    /// Hierarchy level.
    #[arg(long, default_value_t = 1, conflicts_with = "levels")]
    level: usize,
    /// Inclusive range of levels `a..b`, solved concurrently.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<RangeInclusive<usize>>,
    /// Largest main-block side to build.
    #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
    max_size: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct SeesawArgs {
    #[command(flatten)]
    source: ProblemArgs,
    /// Number of outcomes (default: ensemble size).
    #[arg(long)]
    outcomes: Option<usize>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    max_sweeps: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    /// Four comma-separated Bell-state probabilities.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    probs: Vec<f64>,
}

fn parse_levels(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a == 0 || b < a {
        return Err(format!("invalid level range {a}..{b}"));
    }
    Ok(a..=b)
}

fn load(args: &ProblemArgs) -> Result<ProblemDocument, CliError> {
    if let Some(family) = args.generate {
        let params = GeneratorParams {
            dim: args.dim,
            probs: args.probs.clone(),
            overlap: args.overlap,
            copies: args.copies,
        };
        return generate::generate(family, &params);
    }
    let path = args.problem.as_ref().expect("clap enforces a source");
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))?
    };
    ProblemDocument::parse(&text)
}

/// Solves every level, one scoped thread per level, results in level order.
fn solve_levels<F>(levels: Vec<usize>, solve_one: F) -> Result<Vec<BoundReport>, CliError>
where
    F: Fn(usize) -> Result<BoundReport, CliError> + Sync,
{
    if levels.len() == 1 {
        return Ok(vec![solve_one(levels[0])?]);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| {
                let f = &solve_one;
                scope.spawn(move || f(n))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Numerical("solver thread panicked".into()))))
            .collect()
    })
}

struct Outcome {
    text: String,
    code: u8,
}

fn finish(doc: &ReportDocument, optimal: bool) -> Result<Outcome, CliError> {
    Ok(Outcome {
        text: to_json(doc).map_err(|e| CliError::Numerical(format!("serializing report: {e}")))?,
        code: if optimal { 0 } else { 2 },
    })
}

fn run_bound(args: &BoundArgs, local: bool, seed: u64, verbosity: u8) -> Result<Outcome, CliError> {
    let doc = load(&args.source)?;
    let settings = args.solver.settings(verbosity)?;
    let levels: Vec<usize> = match &args.levels {
        Some(r) => r.clone().collect(),
        None => vec![args.level],
    };
    if levels.contains(&0) {
        return Err(CliError::Input("hierarchy level must be at least 1".into()));
    }
    let config = |n| HierarchyConfig {
        level: n,
        settings,
        max_size: args.max_size,
        ..HierarchyConfig::default()
    };
    let reports = if local {
        let p = doc.local_problem()?;
        solve_levels(levels, |n| Ok(separable_upper_bound(&p, &config(n))?))?
    } else {
        let p = doc.global_problem()?;
        solve_levels(levels, |n| Ok(upper_bound(&p, &config(n))?))?
    };
    let optimal = reports.iter().all(|r| r.status == Status::Optimal);
    let mut report = ReportDocument::new(if local { "local-bound" } else { "bound" }, seed);
    report.settings = Some(SettingsEcho::new(&settings, Some(args.max_size)));
    report.problem = Some(doc);
    report.levels = level_records(reports);
    finish(&report, optimal)
}

fn run_seesaw(args: &SeesawArgs, seed: u64, verbosity: u8) -> Result<Outcome, CliError> {
    let doc = load(&args.source)?;
    let settings = args.solver.settings(verbosity.saturating_sub(1))?;
    let problem = doc.global_problem()?;
    let config = SeesawConfig {
        outcomes: args.outcomes,
        restarts: args.restarts,
        max_sweeps: args.max_sweeps,
        improvement_tolerance: 1e-9,
        seed,
        settings,
    };
    let result = seesaw_lower_bound(&problem, &config)?;
    if verbosity > 0 {
        eprintln!(
            "seesaw: fidelity {:.12} from restart {} after {} sweeps",
            result.fidelity, result.best_restart, result.sweeps
        );
    }
    let mut report = ReportDocument::new("seesaw", seed);
    report.settings = Some(SettingsEcho::new(&settings, None));
    report.problem = Some(doc);
    report.seesaw = Some(SeesawRecord::from(&result));
    finish(&report, true)
}

fn run_certify_bell(args: &CertifyArgs, seed: u64) -> Result<Outcome, CliError> {
    let cert = bell_dual_certificate(&args.probs)?;
    let strategy = bell_optimal_strategy(&args.probs)?;
    let basis = bell_measurement_basis(&args.probs)?;
    let problem = build_problem(&bell_problem(&args.probs)?)?;
    let fidelity = average_fidelity(&problem, &strategy)?;
    let mut report = ReportDocument::new("certify-bell", seed);
    report.certificate = Some(CertificateRecord::new(&args.probs, &cert, basis.as_str(), fidelity));
    finish(&report, cert.feasibility_slack >= -1e-10)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Bound(a) => run_bound(a, false, cli.seed, cli.verbose),
        Command::LocalBound(a) => run_bound(a, true, cli.seed, cli.verbose),
        Command::Seesaw(a) => run_seesaw(a, cli.seed, cli.verbose),
        Command::CertifyBell(a) => run_certify_bell(a, cli.seed),
        Command::Generate(a) => {
            let doc = load(a)?;
            doc.to_problem()?;
            finish_document(&doc)
        }
    }
}

fn finish_document(doc: &ProblemDocument) -> Result<Outcome, CliError> {
    Ok(Outcome {
        text: to_json(doc).map_err(|e| CliError::Numerical(format!("serializing problem: {e}")))?,
        code: 0,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("fidelity-bounds: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("1..3").unwrap(), 1..=3);
        assert_eq!(parse_levels("2..2").unwrap(), 2..=2);
        assert!(parse_levels("0..2").is_err());
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("3").is_err());
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
