//! `llp`: solve JSON problem instances from the command line.
//!
//! Exit status is 0 for a solution, 2 when the instance has none, 1 for
//! input errors (reported as JSON on stderr).

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use llp::demo::{job_problem, prefix_problem};
use llp::engine::{
    solve, termination_bound, ExecutionMode, LatticeProblem, Outcome, SolveOptions, SolveResult,
};
use llp::format::{self, number, numbers, trace_line, Document, Instance};
use llp::market::{clearing_assignment, clearing_problem, AuctionInstance, PriceStep};
use llp::oracle::{self, OracleReport};
use llp::shortest_path::{
    dijkstra_mode, parents, shortest_a_problem, shortest_b_problem, WeightedDigraph,
};
use llp::slice::{
    build_slice, enumerate_solutions, SliceOptions, DEFAULT_EVENT_LIMIT, DEFAULT_SOLUTION_LIMIT,
};
use llp::stable_matching::{smp_problem, Matching, SmpInstance};
use llp::{conjoin, Error, LatticeValue};

#[derive(Parser)]
#[command(
    name = "llp",
    version,
    about = "Least solutions of lattice-linear problems"
)]
struct Cli {
    /// Print the expected input for a subcommand and exit
    #[arg(long, value_name = "SUBCOMMAND")]
    schema: Option<String>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Earliest completion times of jobs with prerequisites
    Schedule(Common),
    /// Exclusive prefix sums
    Prefix(Common),
    /// Man-optimal (constrained) stable matching
    Smp(Common),
    /// Single-source shortest paths from vertex 0
    Path {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PathAlgo::B)]
        algo: PathAlgo,
    },
    /// Minimum market clearing prices
    Clearing {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ClearingAlgo::Unit)]
        algo: ClearingAlgo,
    },
    /// Join-irreducibles and all solutions of an smp or auction instance
    Slice {
        #[command(flatten)]
        common: Common,
        /// List every solution
        #[arg(long, conflicts_with = "count")]
        enumerate: bool,
        /// Only report the number of solutions
        #[arg(long)]
        count: bool,
        /// Largest number of solutions to list
        #[arg(long, default_value_t = DEFAULT_SOLUTION_LIMIT)]
        limit: usize,
        /// Largest number of events (sum of the top vector)
        #[arg(long, default_value_t = DEFAULT_EVENT_LIMIT)]
        event_limit: u64,
    },
    /// Brute-force reference answers
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// Instance file, or inline JSON starting with '{'
    input: String,
    #[arg(long, value_enum, default_value_t = Mode::Sequential)]
    mode: Mode,
    /// Worker threads in parallel mode (default: available cores)
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Emit one JSON line per round before the result
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathAlgo {
    A,
    B,
    Dijkstra,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClearingAlgo {
    Unit,
    Accelerated,
}

struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(e.code(), e.to_string())
    }
}

/// Lines for stdout plus the exit status.
struct Report {
    lines: Vec<Value>,
    status: u8,
}

impl Common {
    fn options(&self) -> SolveOptions {
        let mode = match self.mode {
            Mode::Sequential => ExecutionMode::Sequential,
            Mode::Parallel => ExecutionMode::Parallel {
                threads: self
                    .threads
                    .map(usize::from)
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            },
        };
        SolveOptions {
            mode,
            trace: self.trace,
        }
    }

    fn load(&self) -> Result<(Instance, Vec<Value>), Failure> {
        let text = if self.input.trim_start().starts_with('{') {
            self.input.clone()
        } else {
            fs::read_to_string(&self.input)
                .map_err(|e| Failure::new("io_error", format!("{}: {e}", self.input)))?
        };
        let doc = Document::parse(&text).map_err(|e| Failure::new("parse_error", e.to_string()))?;
        Ok((doc.instance()?, doc.constraints))
    }
}

fn wrong_kind(want: &str, got: &Instance) -> Failure {
    Failure::new(
        "schema_mismatch",
        format!("expected a \"{want}\" document, found \"{}\"", got.kind()),
    )
}

fn result_lines<V: LatticeValue>(r: &SolveResult<V>, extra: impl FnOnce(&[V]) -> Value) -> Report {
    let mut lines: Vec<Value> = r.trace.iter().flatten().map(trace_line).collect();
    match &r.outcome {
        Outcome::Feasible(g) => {
            let mut out = json!({"status": "feasible", "solution": numbers(g), "rounds": r.rounds});
            if let (Value::Object(base), Value::Object(more)) = (&mut out, extra(g)) {
                base.extend(more);
            }
            lines.push(out);
            Report { lines, status: 0 }
        }
        Outcome::Infeasible { witness, attempted } => {
            lines.push(json!({
                "status": "infeasible",
                "witness": witness,
                "attempted": number(*attempted),
                "rounds": r.rounds,
            }));
            Report { lines, status: 2 }
        }
    }
}

fn run_problem<P: LatticeProblem>(
    p: &P,
    opts: SolveOptions,
    extra: impl FnOnce(&[P::Value]) -> Value,
) -> Result<Report, Failure> {
    let r = solve(p, opts)?;
    debug_assert!(r.rounds as u128 <= termination_bound(p));
    Ok(result_lines(&r, extra))
}

fn no_extra<V>(_: &[V]) -> Value {
    json!({})
}

fn wives(m: &Matching) -> Vec<usize> {
    m.wife.iter().map(|w| w + 1).collect()
}

fn smp_extra(inst: &SmpInstance) -> impl FnOnce(&[u32]) -> Value + '_ {
    |g| match Matching::from_proposals(inst, g) {
        Some(m) => json!({"matching": wives(&m)}),
        None => json!({}),
    }
}

fn path_extra(graph: &WeightedDigraph) -> impl FnOnce(&[f64]) -> Value + '_ {
    |g| json!({"parents": parents(g, graph)})
}

fn clearing_extra(inst: &AuctionInstance) -> impl FnOnce(&[u64]) -> Value + '_ {
    |g| json!({"assignment": clearing_assignment(inst, g)})
}

fn run(cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::Schedule(c) => {
            let (inst, cs) = c.load()?;
            let Instance::Jobs(jobs) = inst else {
                return Err(wrong_kind("jobs", &inst));
            };
            let n = jobs.t.len();
            let p = conjoin(
                job_problem(jobs)?,
                llp::constraints::parse_constraints(&cs, n)?,
            )?;
            run_problem(&p, c.options(), no_extra)
        }
        Command::Prefix(c) => {
            let (inst, cs) = c.load()?;
            let Instance::Prefix(pre) = inst else {
                return Err(wrong_kind("prefix", &inst));
            };
            let n = pre.a.len();
            let p = conjoin(
                prefix_problem(pre)?,
                llp::constraints::parse_constraints(&cs, n)?,
            )?;
            run_problem(&p, c.options(), no_extra)
        }
        Command::Smp(c) => {
            let (inst, cs) = c.load()?;
            let Instance::Smp(smp) = inst else {
                return Err(wrong_kind("smp", &inst));
            };
            let p = conjoin(
                smp_problem(&smp)?,
                llp::constraints::parse_constraints(&cs, smp.n())?,
            )?;
            run_problem(&p, c.options(), smp_extra(&smp))
        }
        Command::Path { common: c, algo } => {
            let (inst, cs) = c.load()?;
            let Instance::Graph(graph) = inst else {
                return Err(wrong_kind("graph", &inst));
            };
            let parsed = llp::constraints::parse_constraints(&cs, graph.n())?;
            match algo {
                PathAlgo::A => run_problem(
                    &shortest_a_problem(&graph, parsed)?,
                    c.options(),
                    path_extra(&graph),
                ),
                PathAlgo::B => run_problem(
                    &shortest_b_problem(&graph, parsed)?,
                    c.options(),
                    path_extra(&graph),
                ),
                PathAlgo::Dijkstra => {
                    if !parsed.is_empty() {
                        return Err(Failure::new(
                            "invalid_arguments",
                            "dijkstra mode takes no constraints",
                        ));
                    }
                    dijkstra_report(&graph)
                }
            }
        }
        Command::Clearing { common: c, algo } => {
            let (inst, cs) = c.load()?;
            let Instance::Auction(auction) = inst else {
                return Err(wrong_kind("auction", &inst));
            };
            let step = match algo {
                ClearingAlgo::Unit => PriceStep::Unit,
                ClearingAlgo::Accelerated => PriceStep::Accelerated,
            };
            let parsed = llp::constraints::parse_constraints(&cs, auction.n())?;
            let p = clearing_problem(&auction, parsed, step)?;
            run_problem(&p, c.options(), clearing_extra(&auction))
        }
        Command::Slice {
            common: c,
            enumerate,
            count,
            limit,
            event_limit,
        } => {
            let (inst, cs) = c.load()?;
            let opts = SliceOptions {
                event_limit,
                mode: c.options().mode,
            };
            let out = match inst {
                Instance::Smp(smp) => {
                    let p = conjoin(
                        smp_problem(&smp)?,
                        llp::constraints::parse_constraints(&cs, smp.n())?,
                    )?;
                    slice_report(&p, opts, enumerate, count, limit, |sols| {
                        let ms: Vec<Vec<usize>> = sols
                            .iter()
                            .filter_map(|g| Matching::from_proposals(&smp, g))
                            .map(|m| wives(&m))
                            .collect();
                        json!({"matchings": ms})
                    })?
                }
                Instance::Auction(auction) => {
                    let parsed = llp::constraints::parse_constraints(&cs, auction.n())?;
                    let p = clearing_problem(&auction, parsed, PriceStep::Unit)?;
                    slice_report(&p, opts, enumerate, count, limit, |_| json!({}))?
                }
                other => return Err(wrong_kind("smp\" or \"auction", &other)),
            };
            Ok(Report {
                lines: vec![out],
                status: 0,
            })
        }
        Command::Oracle(c) => {
            let (inst, _) = c.load()?;
            let report = match &inst {
                Instance::Smp(smp) => OracleReport::run("smp", || {
                    let (ms, count) = oracle::stable_matchings_counted(smp)?;
                    Ok((ms.iter().map(wives).collect::<Vec<_>>(), count))
                }),
                Instance::Graph(g) => OracleReport::run("graph", || {
                    let d: Vec<Value> = oracle::oracle_bellman_ford(g)
                        .into_iter()
                        .map(|x| x.map_or(Value::Null, number))
                        .collect();
                    Ok((d, 1))
                }),
                Instance::Auction(a) => {
                    OracleReport::run("auction", || oracle::clearing_prices_counted(a))
                }
                Instance::Jobs(j) => OracleReport::run("jobs", || {
                    Ok((numbers(&oracle::oracle_job_schedule(j)?), 1))
                }),
                Instance::Prefix(p) => OracleReport::run("prefix", || {
                    Ok((numbers(&oracle::oracle_exclusive_scan(&p.a)), 1))
                }),
            }?;
            let value = serde_json::to_value(report)
                .map_err(|e| Failure::new("internal", e.to_string()))?;
            Ok(Report {
                lines: vec![value],
                status: 0,
            })
        }
    }
}

fn dijkstra_report(graph: &WeightedDigraph) -> Result<Report, Failure> {
    match dijkstra_mode(graph) {
        Ok(out) => Ok(Report {
            lines: vec![json!({
                "status": "feasible",
                "solution": numbers(&out.dist),
                "rounds": out.order.len() - 1,
                "order": out.order,
                "parents": parents(&out.dist, graph),
            })],
            status: 0,
        }),
        Err(Error::UnreachableVertex { unreachable, .. }) => Ok(Report {
            lines: vec![
                json!({"status": "infeasible", "witness": unreachable[0], "unreachable": unreachable}),
            ],
            status: 2,
        }),
        Err(e) => Err(e.into()),
    }
}

fn slice_report<P: LatticeProblem>(
    p: &P,
    opts: SliceOptions,
    enumerate: bool,
    count_only: bool,
    limit: usize,
    describe: impl FnOnce(&[Vec<P::Value>]) -> Value,
) -> Result<Value, Failure> {
    let s = build_slice(p, opts)?;
    let count = s.count_ideals();
    let status = if s.bottom().is_some() {
        "feasible"
    } else {
        "empty"
    };
    if count_only {
        return Ok(json!({"status": status, "count": u64::try_from(count).ok()}));
    }
    let mut out = json!({
        "status": status,
        "bottom": s.bottom().map(numbers),
        "elements": s.elements().iter().map(|e| numbers(e)).collect::<Vec<_>>(),
        "hasse": s.hasse(),
        "count": u64::try_from(count).ok(),
    });
    if enumerate {
        let sols = enumerate_solutions(&s, limit)?;
        let extra = describe(&sols);
        if let (Value::Object(base), Value::Object(more)) = (&mut out, extra) {
            base.insert(
                "solutions".into(),
                sols.iter().map(|g| numbers(g)).collect(),
            );
            base.extend(more);
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::new("invalid_arguments", e.to_string().trim_end())),
    };
    if let Some(sub) = cli.schema {
        return match format::schema(&sub) {
            Some(text) => {
                println!("{text}");
                if !matches!(sub.as_str(), "slice" | "oracle") {
                    println!("{}", format::constraints_help());
                }
                ExitCode::SUCCESS
            }
            None => fail(Failure::new(
                "invalid_arguments",
                format!(
                    "unknown subcommand {sub}; expected one of {}",
                    format::SUBCOMMANDS.join(", ")
                ),
            )),
        };
    }
    let Some(cmd) = cli.command else {
        return fail(Failure::new(
            "invalid_arguments",
            "no subcommand given; see --help",
        ));
    };
    match run(cmd) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            ExitCode::from(report.status)
        }
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", json!({"error": f.code, "message": f.message}));
    ExitCode::from(1)
}
