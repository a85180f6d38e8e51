use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fpop_core::corpus::{gen, io};
use fpop_core::engine::{parse_value_text, Fact, Schedule, Solver};
use fpop_core::lang::{compile, Diagnostic, TypedProgram};
use fpop_core::planner::{plan, plan_to_json, EvalPlan};
use fpop_core::lattice::Value;

#[derive(Parser)]
#[command(name = "fpop", version, about = "Least-fixed-point solver for lattice-valued logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and plan a program.
    Check { program: PathBuf },
    /// Solve a program over fact files and print facts as JSON lines.
    Run(RunArgs),
    /// Write a random instance as JSON lines.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file; stdout when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Priority,
    Fifo,
    Random,
}

#[derive(clap::Args)]
struct RunArgs {
    program: PathBuf,
    /// JSON-lines fact files, loaded in order.
    #[arg(long, num_args = 1..)]
    facts: Vec<PathBuf>,
    /// Bind a program const, as name=value.
    #[arg(long = "const", value_name = "NAME=VALUE")]
    consts: Vec<String>,
    /// Relation or declared query to print; repeatable. Prints every
    /// relation when absent.
    #[arg(long)]
    query: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
    #[arg(long, value_enum, default_value = "priority")]
    schedule: ScheduleArg,
    /// Seed for the random schedule.
    #[arg(long, required_if_eq("schedule", "random"))]
    seed: Option<u64>,
    /// Re-run every rule in rounds instead of using deltas.
    #[arg(long)]
    naive: bool,
    /// Write solver statistics as JSON.
    #[arg(long, value_name = "PATH")]
    stats: Option<PathBuf>,
    /// Write the evaluation plan as JSON.
    #[arg(long, value_name = "PATH")]
    dump_plan: Option<PathBuf>,
    /// Write facts here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Random weighted digraph for graph_distance.fpop.
    Graph {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        vertices: usize,
        #[arg(long, default_value_t = 200)]
        edges: usize,
        #[arg(long, default_value_t = 100)]
        max_weight: u64,
    },
    /// Layered graph where FIFO order does many redundant updates.
    Layered {
        #[arg(long, default_value_t = 10)]
        layers: usize,
        #[arg(long, default_value_t = 10)]
        width: usize,
    },
    /// Complete DFA for dfa_minimize.fpop.
    Dfa {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
    },
    /// Tree automaton for tree_automata.fpop.
    Tree {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 60)]
        edges: usize,
    },
    /// Grammar and input for cnf_parse.fpop, or weighted_parse.fpop with --weighted.
    Grammar {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        nonterminals: usize,
        #[arg(long, default_value_t = 8)]
        length: usize,
        #[arg(long)]
        weighted: bool,
    },
}

/// A failure with its exit code: 1 for program errors, 2 for I/O and input
/// format errors.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn program(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn render(path: &Path, diags: &[Diagnostic]) -> String {
    let file = path.display().to_string();
    diags.iter().map(|d| d.render(&file)).collect::<Vec<_>>().join("\n")
}

fn load_program(path: &Path) -> Result<EvalPlan, Failure> {
    let src = read(path)?;
    let tp = compile(&src).map_err(|d| Failure::program(render(path, &d)))?;
    plan(tp).map_err(|d| Failure::program(render(path, &d)))
}

fn check(path: &Path) -> Result<String, Failure> {
    let p = load_program(path)?;
    Ok(format!(
        "{}: ok ({} relations, {} rules, {} delta variants)\n",
        path.display(),
        p.program.relations.len(),
        p.program.rules.len(),
        p.delta.len()
    ))
}

fn parse_consts(p: &TypedProgram, bindings: &[String]) -> Result<BTreeMap<String, Value>, Failure> {
    let mut out = BTreeMap::new();
    for b in bindings {
        let (name, text) = b
            .split_once('=')
            .ok_or_else(|| Failure::input(format!("--const `{b}`: expected NAME=VALUE")))?;
        let c = p
            .consts
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Failure::input(format!("--const: the program declares no const `{name}`")))?;
        let v = parse_value_text(&c.ty, text).map_err(|e| Failure::input(format!("--const {name}: {e}")))?;
        out.insert(name.to_owned(), v);
    }
    Ok(out)
}

fn run(args: &RunArgs) -> Result<String, Failure> {
    let plan = load_program(&args.program)?;
    if let Some(path) = &args.dump_plan {
        let json = serde_json::to_string_pretty(&plan_to_json(&plan)).expect("plan serializes");
        write(path, &(json + "\n"))?;
    }
    let consts = parse_consts(&plan.program, &args.consts)?;
    let mut solver = Solver::new(plan, &consts).map_err(|e| Failure::input(e.to_string()))?;
    solver.set_schedule(match args.schedule {
        ScheduleArg::Priority => Schedule::Priority,
        ScheduleArg::Fifo => Schedule::Fifo,
        ScheduleArg::Random => Schedule::Random(args.seed.expect("clap requires a seed")),
    });
    for path in &args.facts {
        io::load_facts(&mut solver, &read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    let stats = if args.naive {
        solver.solve_naive()
    } else {
        solver.solve(args.workers as usize)
    };
    if let Some(path) = &args.stats {
        let json = serde_json::to_string_pretty(&stats).expect("stats serialize");
        write(path, &(json + "\n"))?;
    }
    let mut facts: Vec<Fact> = Vec::new();
    if args.query.is_empty() {
        for rel in &solver.program().relations {
            facts.extend(solver.facts(&rel.name).expect("declared relation"));
        }
    } else {
        for q in &args.query {
            let found = if solver.program().relation_id(q).is_some() {
                solver.facts(q)
            } else {
                solver.run_query(q)
            };
            facts.extend(found.map_err(|_| Failure::program(format!("no relation or query named `{q}`")))?);
        }
    }
    Ok(io::write_facts(&facts))
}

fn generate(kind: &GenKind) -> String {
    let facts = match *kind {
        GenKind::Graph {
            seed,
            vertices,
            edges,
            max_weight,
        } => gen::random_graph(seed, vertices.max(2), edges, max_weight).facts(),
        GenKind::Layered { layers, width } => gen::layered_graph(layers.max(1), width.max(1)).facts(),
        GenKind::Dfa { seed, states, alphabet } => gen::random_dfa(seed, states.max(1), alphabet.max(1)).facts(),
        GenKind::Tree { seed, states, edges } => gen::random_tree_automaton(seed, states.max(1), edges).facts(),
        GenKind::Grammar {
            seed,
            nonterminals,
            length,
            weighted,
        } => {
            let (g, input) = gen::random_grammar(seed, nonterminals.max(1), length);
            if weighted {
                g.weighted_facts(&input)
            } else {
                g.facts(&input)
            }
        }
    };
    io::write_facts(&facts)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { program } => check(program).and_then(|s| emit(None, &s)),
        Command::Run(args) => run(args).and_then(|s| emit(args.out.as_deref(), &s)),
        Command::Gen { kind, out } => emit(out.as_deref(), &generate(kind)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
