use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpptu::bench::{parse_cells, run_batch, write_csv, BatchConfig, Cell};
use rpptu::clock::WallClock;
use rpptu::export::{replicated_dot, spatial_lp_text};
use rpptu::io::{load_instance, save_instance, write_text, SolutionRecord};
use rpptu::verify::{verify_instance, VerifyConfig};
use rpptu::{gantt, io};
use rpptu_core::bnc::{solve_with, BncConfig, Observer, PathPolicy, Status};
use rpptu_core::gen::{generate, GenConfig};
use rpptu_core::lp::{LpProblem, RevisedSimplex};
use rpptu_core::polyhedra::EnumConfig;
use rpptu_core::separation::Cut;
use rpptu_core::spatial::GammaRows;
use rpptu_core::{Instance, ReplicatedGraph};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
/// `solve` hit a budget with an open gap; `verify` found a failing check.
const EXIT_INCOMPLETE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Exact branch-and-cut for multi-agent arc routing with temporal arc
/// unavailability.
#[derive(Parser, Debug)]
#[command(name = "rpptu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance file and write the solution as JSON.
    Solve(SolveArgs),
    /// Generate a random benchmark instance.
    Gen(GenArgs),
    /// Check dimension, equality rank and cut facetness on a small instance.
    Verify(VerifyArgs),
    /// Run generator cells with and without cuts and write a CSV table.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Paths {
    /// Exact deadhead legs once all services are assigned.
    Exact,
    /// Commit the fastest approach to each assigned service.
    Forced,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Makespan {
    /// Each agent's row carries only its own arcs.
    PerAgent,
    /// Each agent's row carries every agent's arcs (not a valid bound for
    /// several agents).
    Verbatim,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Disable cutting planes.
    #[arg(long)]
    no_cuts: bool,
    /// Maximum number of evaluated nodes.
    #[arg(long, default_value_t = 100_000)]
    node_budget: usize,
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "S")]
    time_budget: Option<f64>,
    #[arg(long, value_enum, default_value_t = Paths::Exact)]
    paths: Paths,
    #[arg(long, value_enum, default_value_t = Makespan::PerAgent)]
    makespan: Makespan,
}

impl SolverArgs {
    fn config(&self) -> BncConfig {
        BncConfig {
            node_budget: self.node_budget,
            time_budget_ms: self.time_budget.map(|s| (s.max(0.0) * 1000.0) as u64),
            cuts: !self.no_cuts,
            gamma_rows: match self.makespan {
                Makespan::PerAgent => GammaRows::PerAgent,
                Makespan::Verbatim => GammaRows::Verbatim,
            },
            paths: match self.paths {
                Paths::Exact => PathPolicy::Exact,
                Paths::Forced => PathPolicy::ForcedFastest,
            },
            ..BncConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Print a text Gantt chart of the schedule to stderr.
    #[arg(long)]
    gantt: bool,
    /// Write the root LP in CPLEX LP format.
    #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "root.lp")]
    dump_lp: Option<PathBuf>,
    /// Write the replicated graph (with the solution highlighted) as DOT.
    #[arg(long, value_name = "FILE", num_args = 0..=1, default_missing_value = "replicated.dot")]
    dump_replicated: Option<PathBuf>,
    /// Stream every emitted cut to stderr as a JSON line.
    #[arg(long)]
    log_cuts: bool,
    /// Solution file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    vertices: usize,
    /// Arcs per vertex.
    #[arg(long, default_value_t = 1.2)]
    ratio: f64,
    /// Fraction of arcs that need service.
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Train period in minutes.
    #[arg(long, default_value_t = 74)]
    period: i64,
    /// Trains circulating on the Hamiltonian cycle.
    #[arg(long, default_value_t = 2)]
    trains: usize,
    /// Instance file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    /// Largest arc value in enumerated points.
    #[arg(long, default_value_t = 2)]
    cap: u8,
    /// Refuse instances with more replicated arcs than this.
    #[arg(long, default_value_t = 120)]
    arc_limit: usize,
    /// Report file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated `beta:vertices:ratio` cells, or `grid:V` for all nine
    /// combinations at V vertices.
    #[arg(long, default_value = "0.5:8:1.6", value_parser = parse_cells)]
    cells: std::vec::Vec<Cell>,
    /// Instances per cell.
    #[arg(long, default_value_t = 30)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 1000)]
    node_budget: usize,
    /// Per-solve wall-clock budget in seconds.
    #[arg(long, value_name = "S")]
    time_budget: Option<f64>,
    /// CSV file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error("{0}")]
    Other(String),
}

fn other(e: impl std::fmt::Display) -> CliError {
    CliError::Other(e.to_string())
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write_text(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(other)?,
    }
    Ok(())
}

struct CliObserver<'a> {
    inst: &'a Instance,
    rg: &'a ReplicatedGraph,
    log_cuts: bool,
    root_lp: Option<LpProblem>,
    want_lp: bool,
}

impl Observer for CliObserver<'_> {
    fn on_cut(&mut self, node: usize, cut: &Cut) {
        if !self.log_cuts {
            return;
        }
        let origin = cut.origin.as_ref();
        let line = serde_json::json!({
            "node": node,
            "service": origin.map(|o| self.inst.graph.arc(self.rg.services()[o.service]).name.clone()),
            "agent": origin.map(|o| o.agent + 1),
            "set": origin.map(|o| o.set.clone()),
            "path": origin.map(|o| o.path.clone()),
            "support": cut.support,
            "rhs": cut.rhs,
        });
        eprintln!("{line}");
    }

    fn on_lp(&mut self, node: usize, lp: &LpProblem) {
        if self.want_lp && node == 0 && self.root_lp.is_none() {
            self.root_lp = Some(lp.clone());
        }
    }
}

fn solve_cmd(args: &SolveArgs) -> Result<u8, CliError> {
    let inst = load_instance(&args.instance)?;
    let rg = ReplicatedGraph::build(&inst);
    let mut obs =
        CliObserver { inst: &inst, rg: &rg, log_cuts: args.log_cuts, root_lp: None, want_lp: args.dump_lp.is_some() };
    let clock = WallClock::start();
    let sol = solve_with(&inst, &args.solver.config(), &clock, &mut obs, &RevisedSimplex::default()).map_err(other)?;
    log::info!("{:?} objective {:?} after {} nodes", sol.status, sol.objective, sol.stats.nodes);

    if let Some(path) = &args.dump_lp {
        if let Some(lp) = &obs.root_lp {
            write_text(path, &spatial_lp_text(&inst, &rg, lp))?;
        }
    }
    if let Some(path) = &args.dump_replicated {
        let x = (!sol.x.is_empty()).then_some(sol.x.as_slice());
        write_text(path, &replicated_dot(&inst, &rg, x))?;
    }
    let record = SolutionRecord::new(&inst, &rg, &sol);
    if args.gantt {
        eprint!("{}", gantt::render(&record, 72));
    }
    emit(args.output.as_deref(), &record.to_json())?;
    Ok(match sol.status {
        Status::Optimal => EXIT_OK,
        Status::Gap => EXIT_INCOMPLETE,
        Status::Infeasible => EXIT_ERROR,
    })
}

fn gen_cmd(args: &GenArgs) -> Result<u8, CliError> {
    let cfg = GenConfig {
        num_vertices: args.vertices,
        arc_ratio: args.ratio,
        beta: args.beta,
        num_agents: args.agents,
        seed: args.seed,
        period: args.period,
        num_trains: args.trains,
        ..GenConfig::default()
    };
    let inst = generate(&cfg).map_err(other)?;
    match &args.output {
        Some(p) => save_instance(&inst, p)?,
        None => emit(None, &io::instance_json(&inst))?,
    }
    Ok(EXIT_OK)
}

fn verify_cmd(args: &VerifyArgs) -> Result<u8, CliError> {
    let inst = load_instance(&args.instance)?;
    let cfg = VerifyConfig {
        enumeration: EnumConfig { cap: args.cap, arc_limit: args.arc_limit, ..EnumConfig::default() },
        ..VerifyConfig::default()
    };
    let report = verify_instance(&inst, &cfg).map_err(other)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(other)?;
    text.push('\n');
    emit(args.output.as_deref(), &text)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_INCOMPLETE })
}

fn bench_cmd(args: &BenchArgs) -> Result<u8, CliError> {
    let cfg = BatchConfig {
        count: args.count,
        seed: args.seed,
        agents: args.agents,
        solver: BncConfig {
            node_budget: args.node_budget,
            time_budget_ms: args.time_budget.map(|s| (s.max(0.0) * 1000.0) as u64),
            ..BncConfig::default()
        },
        ..BatchConfig::default()
    };
    let rows = run_batch(&args.cells, &cfg);
    match &args.output {
        Some(p) => {
            let f = File::create(p).map_err(|source| io::IoError::File { path: p.clone(), source })?;
            write_csv(&rows, f).map_err(other)?;
        }
        None => write_csv(&rows, std::io::stdout().lock()).map_err(other)?,
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RPPTU_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK);
        }
        Err(e) => {
            let _ = e.print();
            let mut cmd = <Cli as clap::CommandFactory>::command();
            let _ = cmd.write_long_help(&mut std::io::stderr());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Bench(a) => bench_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
