//! `gridsched`: batch front end for the day-ahead scheduler.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid instance (schema or semantic), infeasible case, or infeasible result bundle |
//! | 2 | I/O failure, malformed JSON or malformed result bundle |
//! | 3 | solver limit reached without a feasible solution |
//! | 64 | usage error |

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use gridsched_core::domain::Instance;
use gridsched_core::evaluate::{check_feasibility, CostReport};
use gridsched_core::formulation::{build, CaseConfig, CaseMode};
use gridsched_core::io::{self, IoError, ResultBundle, RunMeta};
use gridsched_core::parallel;
use gridsched_core::solve::{solve_case, CaseSolution, SolveError, SolveOptions};
use gridsched_milp::SolverConfig;
use log::info;

const EXIT_INVALID: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "gridsched", version, about = "Day-ahead unit commitment with PEV frequency reserve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an instance file; prints one violation per line.
    Validate {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Solve one case and write a result bundle.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[arg(long)]
        out: PathBuf,
        /// Relative optimality gap.
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Recorded in meta.json; the solver is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a result bundle against an instance.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        results: PathBuf,
    },
    /// Write the model of one case to a file.
    Export {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve all three cases and write comparison.csv.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Mps,
}

/// A failure mapped to its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Invalid(_) | IoError::Schema { .. } => EXIT_INVALID,
            _ => EXIT_IO,
        };
        Failure::new(code, e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::NoIncumbent { .. } => EXIT_LIMIT,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { instance } => validate(&instance),
        Command::Solve {
            instance,
            case,
            out,
            gap,
            node_limit,
            seed,
        } => {
            let inst = io::read_instance(&instance)?;
            let mode = case_mode(case);
            let mut options = solve_options();
            if let Some(gap) = gap {
                if !(gap >= 0.0) {
                    return Err(Failure::new(EXIT_USAGE, "--gap must be nonnegative"));
                }
                options.solver.rel_gap = gap;
            }
            options.solver.node_limit = node_limit;
            let clock = Instant::now();
            let solution = solve_case(&inst, mode, &options, None)?;
            write_bundle(&inst, &solution, &options.solver, seed, &out)?;
            println!(
                "case={} objective={} gap={} nodes={} time={:.3}s",
                case,
                solution.objective,
                solution.gap,
                solution.nodes,
                clock.elapsed().as_secs_f64()
            );
            Ok(())
        }
        Command::Evaluate { instance, results } => {
            let inst = io::read_instance(&instance)?;
            let bundle = io::read_results(&inst, &results)?;
            let mode = if bundle.meta.mode.has_contingencies() {
                bundle.meta.mode
            } else {
                CaseMode::GeneratorsOnly
            };
            let violations =
                check_feasibility(&inst, mode, &bundle.schedule, &bundle.response).map_err(|e| Failure::new(EXIT_INVALID, e))?;
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::new(EXIT_INVALID, format!("{} violated equations", violations.len())))
            }
        }
        Command::Export {
            instance,
            case,
            format: Format::Mps,
            out,
        } => {
            let inst = io::read_instance(&instance)?;
            let form = build(&inst, CaseConfig::new(case_mode(case))).map_err(|e| Failure::new(EXIT_INVALID, e))?;
            let name = format!("{}_case{case}", model_name(&instance));
            io::export_mps(&form.model, &name, &out)?;
            info!("wrote {} rows, {} columns to {}", form.model.num_rows(), form.model.num_cols(), out.display());
            Ok(())
        }
        Command::Compare { instance, out } => {
            let inst = io::read_instance(&instance)?;
            let options = solve_options();
            let clock = Instant::now();
            let case1 = solve_case(&inst, CaseMode::NoReserve, &options, None)?;
            let case2 = solve_case(&inst, CaseMode::GeneratorsOnly, &options, None)?;
            let case3 = solve_case(&inst, CaseMode::GeneratorsAndPevs, &options, Some(&case2.x))?;
            fs::create_dir_all(&out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", out.display())))?;
            for solution in [&case1, &case2, &case3] {
                let dir = out.join(format!("case{}", solution.case.number()));
                write_bundle(&inst, solution, &options.solver, None, &dir)?;
            }
            let path = out.join("comparison.csv");
            fs::write(&path, comparison_csv(&[&case1, &case2, &case3]))
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            println!(
                "totals case1={} case2={} case3={} time={:.3}s",
                case1.costs.total,
                case2.costs.total,
                case3.costs.total,
                clock.elapsed().as_secs_f64()
            );
            Ok(())
        }
    }
}

fn validate(path: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let inst: Instance = io::parse_instance_unchecked(&text)?;
    let violations = inst.validate();
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_INVALID, ""))
    }
}

fn case_mode(case: u8) -> CaseMode {
    CaseMode::from_number(case).expect("clap restricts the case to 1..=3")
}

fn solve_options() -> SolveOptions {
    let mut options = SolveOptions::default();
    options.solver.threads = parallel::threads_from_env();
    options
}

fn model_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("model").to_string()
}

fn write_bundle(inst: &Instance, solution: &CaseSolution, solver: &SolverConfig, seed: Option<u64>, dir: &Path) -> Result<(), Failure> {
    let mut meta = RunMeta::new(solution.case);
    meta.status = format!("{:?}", solution.status);
    meta.objective = solution.objective;
    meta.bound = solution.bound;
    meta.gap = solution.gap;
    meta.nodes = solution.nodes;
    meta.rel_gap = solver.rel_gap;
    meta.abs_gap = solver.abs_gap;
    meta.node_limit = solver.node_limit;
    meta.seed = seed;
    meta.runtime_seconds = solution.runtime.as_secs_f64();
    let bundle = ResultBundle {
        meta,
        schedule: solution.schedule.clone(),
        response: solution.response.clone(),
        costs: solution.costs.clone(),
    };
    io::write_results(inst, &bundle, dir)?;
    Ok(())
}

const COMPARISON_HEADER: &str =
    "case,production,post_contingency_unserved,frequency_deviation,pev_capacity,pev_deployment,startup,shutdown,unserved,spillage,total";

fn comparison_csv(solutions: &[&CaseSolution]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for s in solutions {
        let c: &CostReport = &s.costs;
        let cells = [
            c.production,
            c.post_contingency_unserved,
            c.frequency_deviation,
            c.pev_capacity,
            c.pev_deployment,
            c.startup,
            c.shutdown,
            c.unserved,
            c.spillage,
            c.total,
        ];
        out.push_str(&s.case.number().to_string());
        for x in cells {
            out.push(',');
            out.push_str(&io::format_number(x));
        }
        out.push('\n');
    }
    out
}
