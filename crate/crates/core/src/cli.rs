//! Command-line interface.
//!
//! Exit codes: 0 success; 2 usage; 3 file or parse trouble; 4 scenario
//! validation failure; 5 the solver could not produce a result; 6 an
//! exported curve failed verification. Failures print one
//! `error[class]: detail` line per problem on stderr.

use crate::eval::{self, AllocationPlan, ObjectivePair};
use crate::formats::{
    export_front, export_plan, read_front_csv, read_manifest, resolve_scenario,
    scenario_digest, verify_front_file, write_manifest, FormatError, RunManifest,
    RunParameters,
};
use crate::front::{
    benefit_endpoint, run_front_with, shortfall_endpoint, FrontConfig, FrontError,
};
use crate::ga::{run_ga, GaConfig, GaError};
use crate::lp::{solve_lp_with, LpError, LpStatus, SimplexOptions};
use crate::models::{build_model1, extract_plan};
use crate::scenario::Scenario;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Print a line to stdout, ignoring write failures such as a closed pipe;
/// a report truncated by `head` is not an error worth dying loudly for.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "aquaplan",
    version,
    about = "Irrigation planning: trade crop net benefit against environmental flow deficit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Solver feasibility tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,

    /// Worker threads for the weight sweep; 0 uses one worker per core,
    /// 1 runs fully sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Print solver models and extra diagnostics to stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

/// A scenario argument is a bundled dataset name (`representative`,
/// `toy-linear`, `toy-envlimited`) or a path to a TOML file.
#[derive(Subcommand)]
enum Command {
    /// Check a scenario and report every violation found
    Validate { scenario: String },

    /// Find the maximum-benefit plan (least shortfall among the optima)
    SolveNb {
        scenario: String,
        /// Pin every monthly release to its target before optimizing
        #[arg(long)]
        with_target_flow: bool,
        /// Write the plan as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Find the minimum-shortfall plan (most benefit among the optima)
    SolveEfd {
        scenario: String,
        /// Write the plan as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Trace the benefit/shortfall trade-off curve by weighted scalarization
    Front {
        scenario: String,
        /// Interior weights to sweep
        #[arg(long, default_value_t = 100)]
        grid_points: usize,
        /// Write the curve as CSV, with a manifest sidecar next to it
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Evolutionary baseline search over the same trade-off
    Baseline {
        scenario: String,
        /// Population size
        #[arg(long, default_value_t = 100)]
        pop: usize,
        /// Generations to evolve
        #[arg(long, default_value_t = 200)]
        gens: usize,
        /// Random seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the curve as CSV, with a manifest sidecar next to it
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Verify an exported curve file from its contents alone
    Report {
        /// Curve CSV to verify
        front_file: PathBuf,
        /// Also check the manifest sidecar against this scenario's digest
        #[arg(long)]
        scenario: Option<String>,
    },
}

/// Failure carrying its exit code and preformatted stderr lines.
struct Failure {
    code: i32,
    messages: Vec<String>,
}

impl Failure {
    fn one(code: i32, class: &str, detail: impl std::fmt::Display) -> Failure {
        Failure {
            code,
            messages: vec![format!("error[{class}]: {detail}")],
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Failure {
        match e {
            FormatError::Io { .. } => Failure::one(3, "io", e),
            FormatError::Parse { .. } | FormatError::Csv { .. } => Failure::one(3, "parse", e),
            FormatError::Validation(report) => Failure {
                code: 4,
                messages: report
                    .violations
                    .iter()
                    .map(|v| format!("error[validation]: {}: {}", v.path, v.message))
                    .collect(),
            },
            FormatError::FrontInvalid { .. } => Failure::one(6, "verify", e),
        }
    }
}

impl From<FrontError> for Failure {
    fn from(e: FrontError) -> Failure {
        Failure::one(5, "solver", e)
    }
}

impl From<LpError> for Failure {
    fn from(e: LpError) -> Failure {
        Failure::one(5, "solver", e)
    }
}

impl From<GaError> for Failure {
    fn from(e: GaError) -> Failure {
        match e {
            GaError::BadPopulationSize(_) | GaError::InvalidRate { .. } => {
                Failure::one(2, "usage", e)
            }
            _ => Failure::one(5, "solver", e),
        }
    }
}

/// Parse the process arguments, run, and return the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(failure) => {
            for line in &failure.messages {
                eprintln!("{line}");
            }
            failure.code
        }
    }
}

fn solver_options(cli: &Cli) -> SimplexOptions {
    SimplexOptions {
        feasibility_tol: cli.tolerance,
        ..Default::default()
    }
}

fn print_plan(s: &Scenario, plan: &AllocationPlan, objectives: &ObjectivePair) {
    say!("net_benefit {}", objectives.net_benefit);
    say!("efd {}", objectives.efd);
    for (crop, area) in s.crops().iter().zip(&plan.area_per_crop) {
        say!("area {} {}", crop.name, area);
    }
    for (m, flow) in plan.env_flow_per_month.iter().enumerate() {
        say!("flow m{:02} {}", m + 1, flow);
    }
}

fn write_plan_if_asked(
    out: &Option<PathBuf>,
    s: &Scenario,
    plan: &AllocationPlan,
    objectives: &ObjectivePair,
) -> Result<(), Failure> {
    if let Some(path) = out {
        export_plan(path, s, plan, objectives)?;
        say!("wrote {}", path.display());
    }
    Ok(())
}

/// Re-solve the two single-goal optima and require the file's extreme rows
/// to agree with them: best net benefit within 1e-6 relative, least
/// shortfall within 1e-6 GL absolute.
fn check_endpoints(
    front_file: &PathBuf,
    s: &Scenario,
    opts: &SimplexOptions,
) -> Result<(), Failure> {
    let rows = read_front_csv(front_file)?;
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return Err(Failure::one(6, "verify", "curve file has no data rows"));
    };
    let ideal = benefit_endpoint(s, opts)?.anchor;
    let floor = shortfall_endpoint(s, opts)?.anchor;
    if (last.net_benefit - ideal).abs() > 1e-6 * ideal.abs().max(1.0) {
        return Err(Failure::one(
            6,
            "verify",
            format!(
                "endpoint mismatch: best net benefit in the file is {} but the recomputed ideal is {ideal}",
                last.net_benefit
            ),
        ));
    }
    if (first.efd - floor).abs() > 1e-6 {
        return Err(Failure::one(
            6,
            "verify",
            format!(
                "endpoint mismatch: least shortfall in the file is {} but the recomputed floor is {floor}",
                first.efd
            ),
        ));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let opts = solver_options(&cli);
    match &cli.command {
        Command::Validate { scenario } => {
            let s = resolve_scenario(scenario)?;
            say!(
                "ok: {} crops, {} months, digest {}",
                s.n_crops(),
                s.n_months(),
                scenario_digest(&s)
            );
            Ok(())
        }

        Command::SolveNb {
            scenario,
            with_target_flow,
            out,
        } => {
            let s = resolve_scenario(scenario)?;
            if *with_target_flow {
                let model = build_model1(&s, true);
                if cli.verbose {
                    eprintln!("{}", model.lp);
                }
                let sol = solve_lp_with(&model.lp, &opts)?;
                match sol.status {
                    LpStatus::Optimal => {
                        let plan = extract_plan(&s, &model, &sol);
                        let objectives = eval::objectives(&s, &plan)
                            .map_err(|e| Failure::one(5, "solver", e))?;
                        print_plan(&s, &plan, &objectives);
                        write_plan_if_asked(out, &s, &plan, &objectives)
                    }
                    LpStatus::Infeasible => Err(Failure::one(
                        5,
                        "infeasible",
                        "the monthly release targets cannot all be met",
                    )),
                    LpStatus::Unbounded => {
                        Err(Failure::one(5, "solver", "model is unbounded"))
                    }
                }
            } else {
                if cli.verbose {
                    eprintln!("{}", build_model1(&s, false).lp);
                }
                let endpoint = benefit_endpoint(&s, &opts)?;
                print_plan(&s, &endpoint.plan, &endpoint.objectives);
                write_plan_if_asked(out, &s, &endpoint.plan, &endpoint.objectives)
            }
        }

        Command::SolveEfd { scenario, out } => {
            let s = resolve_scenario(scenario)?;
            let endpoint = shortfall_endpoint(&s, &opts)?;
            print_plan(&s, &endpoint.plan, &endpoint.objectives);
            write_plan_if_asked(out, &s, &endpoint.plan, &endpoint.objectives)
        }

        Command::Front {
            scenario,
            grid_points,
            out,
        } => {
            if *grid_points == 0 {
                return Err(Failure::one(2, "usage", "--grid-points must be at least 1"));
            }
            let s = resolve_scenario(scenario)?;
            let config = FrontConfig {
                grid_points: *grid_points,
                threads: cli.threads,
                solver_tol: cli.tolerance,
            };
            let result = run_front_with(&s, &config)?;
            say!("ideal_net_benefit {}", result.stats.nb_ideal);
            say!("shortfall_floor {}", result.stats.efd_floor);
            say!("points {}", result.points.len());
            say!("subproblems_solved {}", result.stats.subproblems_solved);
            say!(
                "infeasible_subproblems {}",
                result.stats.infeasible_subproblems
            );
            say!("solver_faults {}", result.stats.solver_failures);
            say!("discarded {}", result.stats.discarded_count);
            say!("wall_ms {}", result.stats.wall_time.as_millis());
            if let Some(path) = out {
                let summary = export_front(path, &result.points)?;
                let mut manifest = RunManifest::new(
                    "weighted-scalarization",
                    scenario_digest(&s),
                    RunParameters {
                        grid_points: Some(*grid_points),
                        tolerance: Some(cli.tolerance),
                        ..Default::default()
                    },
                );
                manifest.points_written = summary.written;
                let sidecar = write_manifest(path, &manifest)?;
                say!("wrote {} ({} rows)", path.display(), summary.written);
                say!("wrote {}", sidecar.display());
            }
            Ok(())
        }

        Command::Baseline {
            scenario,
            pop,
            gens,
            seed,
            out,
        } => {
            let s = resolve_scenario(scenario)?;
            let config = GaConfig {
                population_size: *pop,
                generations: *gens,
                seed: *seed,
                ..Default::default()
            };
            let result = run_ga(&s, &config)?;
            say!("points {}", result.points.len());
            say!("evaluations {}", result.evaluations);
            say!("wall_ms {}", result.wall_time.as_millis());
            if let Some(path) = out {
                let summary = export_front(path, &result.points)?;
                let mut manifest = RunManifest::new(
                    "evolutionary-baseline",
                    scenario_digest(&s),
                    RunParameters {
                        population_size: Some(*pop),
                        generations: Some(*gens),
                        seed: Some(*seed),
                        ..Default::default()
                    },
                );
                manifest.points_written = summary.written;
                let sidecar = write_manifest(path, &manifest)?;
                say!("wrote {} ({} rows)", path.display(), summary.written);
                say!("wrote {}", sidecar.display());
            }
            Ok(())
        }

        Command::Report {
            front_file,
            scenario,
        } => {
            let count = verify_front_file(front_file)?;
            say!("ok: {count} rows form a clean trade-off curve");
            if let Some(spec) = scenario {
                let s = resolve_scenario(spec)?;
                let manifest = read_manifest(front_file)?;
                if manifest.scenario_digest != scenario_digest(&s) {
                    return Err(Failure::one(
                        6,
                        "verify",
                        format!(
                            "manifest digest {} does not match scenario digest {}",
                            manifest.scenario_digest,
                            scenario_digest(&s)
                        ),
                    ));
                }
                say!("ok: manifest digest matches the scenario");
                if manifest.method == "weighted-scalarization" {
                    check_endpoints(front_file, &s, &opts)?;
                    say!("ok: endpoints match the recomputed optima");
                } else {
                    say!(
                        "endpoint check skipped: method {} is approximate",
                        manifest.method
                    );
                }
            }
            Ok(())
        }
    }
}
