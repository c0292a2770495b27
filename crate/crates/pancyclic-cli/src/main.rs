//! Command-line surface: construct cycle certificates, verify them against
//! the adjacency definitions, sweep whole graphs, emit tuple walks, and
//! print family statistics.
//!
//! Exit codes: 0 success, 1 sweep reported failures, 2 invalid input,
//! 3 internal construction failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pancyclic::gammak;
use pancyclic::graph::{CycleWitness, GraphSpec, Vertex};
use pancyclic::perm::{derangement_count, factorial, Arrangement};
use pancyclic::verify::{self, EdgeSelection, SweepEngine};
use pancyclic::ConstructError;

#[derive(Parser)]
#[command(
    name = "pancyclic",
    about = "Cycle certificates through any edge of derangement-type permutation graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a cycle of the given length through an edge.
    Construct {
        /// Graph family: gamma:n | gammak:n:k | arr:n:k
        #[arg(long)]
        spec: String,
        /// Edge as two one-line vertices separated by '|', e.g. "1 2 3 4|2 1 4 3"
        #[arg(long)]
        edge: String,
        /// Target cycle length
        #[arg(long)]
        length: usize,
        /// Seed recorded in reports (constructions themselves are deterministic)
        #[arg(long)]
        seed: Option<u64>,
        /// Write the witness JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a witness file against the raw adjacency definitions.
    Verify {
        #[arg(long)]
        spec: String,
        /// Witness JSON file produced by `construct`
        #[arg(long)]
        witness: PathBuf,
        /// Required edge "u|v"
        #[arg(long)]
        edge: String,
    },
    /// Run the constructor (or the brute oracle) over many edges and lengths.
    Sweep {
        #[arg(long)]
        spec: String,
        /// "all" or a sample size
        #[arg(long, default_value = "all")]
        edges: String,
        /// Length range "A..B" (inclusive); defaults to 3..order
        #[arg(long)]
        lengths: Option<String>,
        #[arg(long, value_enum, default_value = "constructor")]
        engine: EngineArg,
        /// Worker threads; defaults to available parallelism
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for standalone JSON repro files, one per failure
        #[arg(long)]
        failures_dir: Option<PathBuf>,
        /// Node budget per brute-force search
        #[arg(long, default_value = "5000000")]
        brute_budget: u64,
    },
    /// Emit the ordered walk over all k-tuples starting at a given tuple.
    Order {
        /// Must be a gammak:n:k spec
        #[arg(long)]
        spec: String,
        /// Start tuple in one-line notation
        #[arg(long)]
        start: String,
    },
    /// Print order, degree and the dense-quotient margin for a spec.
    Stats {
        #[arg(long)]
        spec: String,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EngineArg {
    Constructor,
    Brute,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Usage(String),
    Internal(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn global_seed(cli_seed: Option<u64>) -> u64 {
    cli_seed.or_else(|| {
        std::env::var("PANCYCLIC_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn parse_spec(s: &str) -> Result<GraphSpec, CliError> {
    s.parse::<GraphSpec>().map_err(|e| usage(e.to_string()))
}

fn parse_edge(spec: &GraphSpec, s: &str) -> Result<(Vertex, Vertex), CliError> {
    let (u, v) = s
        .split_once('|')
        .ok_or_else(|| usage("edge must be \"u|v\" in one-line notation"))?;
    let pu = spec
        .parse_vertex(u.trim())
        .map_err(|e| usage(format!("bad edge endpoint {u:?}: {e}")))?;
    let pv = spec
        .parse_vertex(v.trim())
        .map_err(|e| usage(format!("bad edge endpoint {v:?}: {e}")))?;
    Ok((pu, pv))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Construct {
            spec,
            edge,
            length,
            seed: _,
            out,
        } => {
            let spec = parse_spec(&spec)?;
            let (u, v) = parse_edge(&spec, &edge)?;
            if !spec.is_adjacent(&u, &v).map_err(|e| usage(e.to_string()))? {
                return Err(usage("the given pair is not an edge"));
            }
            let ctx = pancyclic::construct_context(&spec).map_err(|e| usage(e.to_string()))?;
            let witness = match ctx.construct(&u, &v, length) {
                Ok((w, _)) => w,
                Err(ConstructError::StitchFailed(msg)) => return Err(CliError::Internal(msg)),
                Err(e) => return Err(usage(e.to_string())),
            };
            let text = witness.to_json(Some((&u, &v)));
            match out {
                Some(path) => std::fs::write(&path, text.as_bytes())
                    .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
                None => println!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            spec,
            witness,
            edge,
        } => {
            let spec = parse_spec(&spec)?;
            let (u, v) = parse_edge(&spec, &edge)?;
            let text = std::fs::read_to_string(&witness)
                .map_err(|e| usage(format!("cannot read {}: {e}", witness.display())))?;
            let w = CycleWitness::from_json(&text, Some(spec.clone()))
                .map_err(|e| usage(e.to_string()))?;
            match verify::validate_cycle(&spec, &w, Some((&u, &v)), w.len()) {
                Ok(()) => {
                    println!("ok: cycle of length {} through the edge", w.len());
                    Ok(ExitCode::SUCCESS)
                }
                Err(reason) => {
                    eprintln!("invalid witness: {reason}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Sweep {
            spec,
            edges,
            lengths,
            engine,
            jobs,
            seed,
            failures_dir,
            brute_budget,
        } => {
            let spec = parse_spec(&spec)?;
            let selection = match edges.as_str() {
                "all" => EdgeSelection::All,
                count => EdgeSelection::Sample(
                    count
                        .parse()
                        .map_err(|_| usage("--edges takes \"all\" or a sample size"))?,
                ),
            };
            let order = spec.order() as usize;
            let lengths = match lengths {
                None => 3..=order,
                Some(text) => {
                    let (a, b) = text
                        .split_once("..")
                        .ok_or_else(|| usage("--lengths takes \"A..B\" (inclusive)"))?;
                    let a: usize = a.parse().map_err(|_| usage("bad length bound"))?;
                    let b: usize = b.parse().map_err(|_| usage("bad length bound"))?;
                    a..=b
                }
            };
            if let Some(jobs) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .map_err(|e| usage(e.to_string()))?;
            }
            let engine = match engine {
                EngineArg::Constructor => SweepEngine::Constructor,
                EngineArg::Brute => SweepEngine::Brute,
            };
            let report = verify::sweep(
                &spec,
                selection,
                lengths,
                engine,
                global_seed(seed),
                brute_budget,
            );
            if let Some(dir) = failures_dir {
                if !report.failures.is_empty() {
                    std::fs::create_dir_all(&dir)
                        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
                    for (i, failure) in report.failures.iter().enumerate() {
                        let path = dir.join(format!("failure-{i:05}.json"));
                        let mut file = std::fs::File::create(&path)
                            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
                        let body = serde_json::to_string_pretty(failure).expect("serializable");
                        file.write_all(body.as_bytes())
                            .map_err(|e| usage(e.to_string()))?;
                    }
                }
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            if report.failed == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Order { spec, start } => {
            let parsed = parse_spec(&spec)?;
            let GraphSpec::FixedK(n, k) = parsed else {
                return Err(usage("order requires a gammak:n:k spec"));
            };
            if k == 0 {
                return Err(usage("order requires k >= 1"));
            }
            let start = Arrangement::parse(&start, n)
                .map_err(|e| usage(format!("bad start tuple: {e}")))?;
            if start.k() != k {
                return Err(usage(format!("start tuple must have {k} entries")));
            }
            let order = gammak::eta_order(n, k, &start).map_err(|e| usage(e.to_string()))?;
            gammak::check_eta_order(n, k, &order).map_err(CliError::Internal)?;
            let mut stdout = std::io::stdout().lock();
            for eta in &order {
                let line = serde_json::json!({ "eta": eta.to_string() });
                if let Err(e) = writeln!(stdout, "{line}") {
                    if e.kind() == std::io::ErrorKind::BrokenPipe {
                        return Ok(ExitCode::SUCCESS);
                    }
                    return Err(usage(e.to_string()));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { spec } => {
            let spec = parse_spec(&spec)?;
            println!("spec: {spec}");
            println!("order: {}", spec.order());
            println!("degree: {}", spec.degree());
            match spec {
                GraphSpec::Derangement(n) => {
                    let m = n - 1;
                    let delta = factorial(m) - 1 - derangement_count(m);
                    let bound = (factorial(m) + 2) / 2;
                    println!(
                        "quotient complement on {m} points: delta={delta}, bound={bound}, \
                         dense engine {}",
                        if m == 3 {
                            "bipartite (even lengths only)".to_string()
                        } else {
                            format!("applicable: {}", delta >= bound)
                        }
                    );
                }
                GraphSpec::FixedK(n, k) if k > 0 => {
                    println!("blocks: {} of size {}", spec.order() / factorial(n - k), factorial(n - k));
                    if n - k == 3 {
                        println!(
                            "warning: connection set is all even; graph splits into two \
                             components of {} vertices",
                            factorial(n) / 2
                        );
                    }
                }
                GraphSpec::Arrangement(n, k) if n > k => {
                    let g = GraphSpec::GTilde1(n, k);
                    let n1 = g.order();
                    println!(
                        "pivot-side quotient: order={}, degree>={}, bound={}",
                        n1,
                        g.degree(),
                        n1 / 2 + 1
                    );
                }
                _ => {}
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
