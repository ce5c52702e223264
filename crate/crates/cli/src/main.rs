use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greyzone::encoding::{decode, Genotype, PlanExport};
use greyzone::evaluator::{check_feasibility, evaluate_detailed, ObjectiveVector, Violation};
use greyzone::exact::{exact_pareto, solve_epsilon_constraint, EnumBudget};
use greyzone::front_io::{export_front, import_front, import_vectors};
use greyzone::instance::{generate_instance, read_json, write_json, Instance, InstanceSpec, BENCHMARK_SHAPES};
use greyzone::moo::{front_metrics, ParetoFront};
use greyzone::nsga2::{run_nsga2, NsgaParams};
use greyzone::sensitivity::{run_sensitivity, SolverConfig, SweepParam};
use greyzone::{Error, Result};
use serde::Serialize;

/// Commute planning for employees of a company inside a traffic-restricted
/// grey zone: buses, carpools and electric or hybrid shuttles.
#[derive(Parser)]
#[command(name = "greyzone", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance.
    Gen {
        #[command(flatten)]
        source: SpecSource,
        /// Overrides the seed of the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a Pareto front.
    Solve {
        #[command(subcommand)]
        solver: SolveCommand,
    },
    /// Objectives and constraint check of one genotype.
    Eval {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        genotype: PathBuf,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quality indicators of a front CSV.
    Metrics {
        #[arg(long)]
        front: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the carpool fleet size or the battery rate.
    Sensitivity {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        /// Comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Solver::Nsga2)]
        solver: Solver,
        #[command(flatten)]
        nsga: NsgaArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// CSV report; defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decoded routes of every front entry, as node ids.
    Export {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        front: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate, solve with NSGA-II and score in one go.
    Bench {
        #[command(flatten)]
        source: SpecSource,
        #[arg(long)]
        instance_seed: Option<u64>,
        #[command(flatten)]
        nsga: NsgaArgs,
        /// Receives instance.json, front.csv, front.genotypes.json and metrics.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum SolveCommand {
    Nsga2 {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        nsga: NsgaArgs,
        #[arg(long)]
        out: PathBuf,
    },
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Enum)]
        method: Method,
        /// Objective minimised by the epsilon-constraint method.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        primary: u8,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SpecSource {
    /// Instance spec as JSON.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Row of the benchmark shape table, 1 to 13.
    #[arg(long)]
    row: Option<usize>,
}

#[derive(Args)]
struct NsgaArgs {
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 200)]
    generations: usize,
    #[arg(long, default_value_t = 0.8)]
    crossover_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 2)]
    tournament_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation threads; the default uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 50)]
    max_retries: usize,
}

impl NsgaArgs {
    fn params(&self) -> NsgaParams {
        NsgaParams {
            population: self.population,
            generations: self.generations,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            tournament_size: self.tournament_size,
            seed: self.seed,
            workers: self.workers,
            max_retries: self.max_retries,
        }
    }
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 100_000_000)]
    max_plans: u64,
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Allow instances beyond the enumeration size guard.
    #[arg(long)]
    no_size_guard: bool,
    /// Enumeration threads; the default uses every core.
    #[arg(long)]
    enum_workers: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self) -> EnumBudget {
        EnumBudget { max_plans: self.max_plans, time_limit_secs: self.time_limit, size_guard: !self.no_size_guard }
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        match self.enum_workers {
            None => f(),
            Some(0) => Err(Error::InvalidParams { field: "enum_workers", reason: "must be positive".into() }),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Solver(format!("thread pool: {e}")))?
                .install(f),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Enum,
    Epsilon,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Nsga2,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    #[value(name = "carpool_fleet_size", alias = "carpool-fleet-size")]
    CarpoolFleetSize,
    #[value(name = "battery_rate", alias = "battery-rate")]
    BatteryRate,
}

#[derive(Serialize)]
struct EvalReport {
    objectives: ObjectiveVector,
    violations: Vec<Violation>,
    plan: PlanExport,
}

#[derive(Serialize)]
struct ExportedEntry {
    genotype_id: usize,
    objectives: ObjectiveVector,
    plan: PlanExport,
}

fn load_spec(source: &SpecSource, seed: Option<u64>) -> Result<InstanceSpec> {
    let mut spec = match (&source.spec, source.row) {
        (Some(path), _) => read_json(path)?,
        (None, row) => {
            let row = row.unwrap_or(0);
            if !(1..=BENCHMARK_SHAPES.len()).contains(&row) {
                return Err(Error::InvalidParams { field: "row", reason: format!("{row} is not a table row between 1 and {}", BENCHMARK_SHAPES.len()) });
            }
            InstanceSpec::benchmark(row, 0)
        }
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn load_instance(path: &Path) -> Result<Instance> {
    let inst = Instance::load(path)?;
    let problems = inst.validate();
    if let Some(first) = problems.first() {
        return Err(Error::InvalidInstance(format!("{}: {}: {} ({} problems)", path.display(), first.path, first.message, problems.len())));
    }
    Ok(inst)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io { path: path.into(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialise");
    text.push('\n');
    text
}

fn solve_nsga2(inst: &Instance, nsga: &NsgaArgs, out: &Path) -> Result<ParetoFront> {
    let front = run_nsga2(inst, &nsga.params())?;
    log::info!("{} Pareto solutions", front.len());
    export_front(&front, out)?;
    Ok(front)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { source, seed, out } => {
            let inst = generate_instance(&load_spec(&source, seed)?)?;
            inst.save(&out)
        }
        Command::Solve { solver: SolveCommand::Nsga2 { instance, nsga, out } } => {
            solve_nsga2(&load_instance(&instance)?, &nsga, &out).map(drop)
        }
        Command::Solve { solver: SolveCommand::Exact { instance, method, primary, budget, out } } => {
            let inst = load_instance(&instance)?;
            let b = budget.budget();
            let front = match method {
                Method::Enum => {
                    let o = budget.run(|| exact_pareto(&inst, &b))?;
                    log::info!("{} plans enumerated, {} Pareto solutions", o.plans_evaluated, o.front.len());
                    if o.partial {
                        log::warn!("budget exhausted; the front may be incomplete");
                    }
                    o.front
                }
                Method::Epsilon => {
                    let o = budget.run(|| solve_epsilon_constraint(&inst, primary as usize - 1, None, &b))?;
                    log::info!("{} cells, {} without a feasible plan, {} Pareto solutions", o.cells, o.skipped.len(), o.front.len());
                    if o.partial {
                        log::warn!("budget exhausted; the front may be incomplete");
                    }
                    o.front
                }
            };
            export_front(&front, &out)
        }
        Command::Eval { instance, genotype, out } => {
            let inst = load_instance(&instance)?;
            let g = Genotype::load(&genotype)?;
            let ev = evaluate_detailed(&g, &inst)?;
            let violations = check_feasibility(&ev.plan, &ev.schedule, &ev.traces, &inst);
            let report = EvalReport { objectives: ev.objectives, violations, plan: ev.plan.export(&inst)? };
            emit(out.as_deref(), &json(&report))
        }
        Command::Metrics { front, out } => {
            let m = front_metrics(&import_vectors(&front)?)?;
            emit(out.as_deref(), &json(&m))
        }
        Command::Sensitivity { instance, param, values, solver, nsga, budget, out } => {
            let inst = load_instance(&instance)?;
            let param = match param {
                Param::CarpoolFleetSize => SweepParam::CarpoolFleetSize,
                Param::BatteryRate => SweepParam::BatteryRate,
            };
            let report = match solver {
                Solver::Nsga2 => run_sensitivity(&inst, param, &values, &SolverConfig::Nsga2(nsga.params()))?,
                Solver::Exact => {
                    let config = SolverConfig::Exact(budget.budget());
                    budget.run(|| run_sensitivity(&inst, param, &values, &config))?
                }
            };
            emit(out.as_deref(), &report.to_csv())
        }
        Command::Export { instance, front, out } => {
            let inst = load_instance(&instance)?;
            let front = import_front(&front)?;
            let mut entries = Vec::with_capacity(front.len());
            for (id, e) in front.entries.iter().enumerate() {
                let plan = decode(&e.genotype, &inst)?;
                entries.push(ExportedEntry { genotype_id: id, objectives: e.objectives, plan: plan.export(&inst)? });
            }
            write_json(&out, &entries)
        }
        Command::Bench { source, instance_seed, nsga, out_dir } => {
            fs::create_dir_all(&out_dir).map_err(|source| Error::Io { path: out_dir.clone(), source })?;
            let inst = generate_instance(&load_spec(&source, instance_seed)?)?;
            inst.save(&out_dir.join("instance.json"))?;
            let front = solve_nsga2(&inst, &nsga, &out_dir.join("front.csv"))?;
            // Scored from the written file, as `metrics` would.
            let m = front_metrics(&import_vectors(&out_dir.join("front.csv"))?)?;
            debug_assert_eq!(m.nps, front.len());
            emit(Some(&out_dir.join("metrics.json")), &json(&m))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
