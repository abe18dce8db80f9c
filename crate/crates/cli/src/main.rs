use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stabilab_cli::dot::tree_dot;
use stabilab_cli::experiment::{rows_to_csv, run_experiment, ExperimentSpec, ProtocolKind};
use stabilab_core::engine::{DaemonKind, Fairness, FaultSpec};
use stabilab_core::io::{format_graph, parse_graph, parse_member_events, parse_weight_events};
use stabilab_core::oracles::{self, EdgeSet, SteinerVariant};
use stabilab_core::{gen, Graph, NodeId};
use stabilab_robots::naming::{Mode, NamingFaults, NamingSystem, PortGraph};
use stabilab_robots::pellicule::{build_pellicule, reduce_pellicule, DEFAULT_CAP};
use stabilab_robots::ring::{
    all_snapshots, canonical_snapshot, convergence_check, corda_run, exploration_verified, is_permanent, Algo,
    max_start, RandomAdversary,
};

#[derive(Parser)]
#[command(name = "stabilab", version, about = "Self-stabilizing protocol and mobile robot experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a protocol over a list of seeds and emit CSV.
    Run(Box<RunArgs>),
    /// Centralized reference solutions.
    Oracle(OracleArgs),
    #[command(subcommand)]
    Robots(RobotsCmd),
    #[command(subcommand)]
    Graph(GraphCmd),
}

#[derive(Args)]
struct GraphSource {
    /// Graph file (`n m` header, then `u v [w]` lines).
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generated graph instead of a file.
    #[arg(long, value_enum)]
    gen: Option<GenKind>,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Extra edges beyond a spanning tree, for `random`.
    #[arg(long, default_value_t = 4)]
    extra: usize,
    #[arg(long, default_value_t = 100)]
    max_weight: u64,
    #[arg(long, default_value_t = 0)]
    gen_seed: u64,
    #[arg(long)]
    root: Option<NodeId>,
}

impl GraphSource {
    fn load(&self) -> Result<Graph> {
        let g = match (&self.graph, self.gen) {
            (Some(path), _) => read_graph(path)?,
            (None, Some(kind)) => generate(kind, self.n, self.extra, self.max_weight, self.gen_seed),
            (None, None) => bail!("give --graph FILE or --gen KIND"),
        };
        Ok(match self.root {
            Some(r) => g.with_root(r)?,
            None => g,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Ring,
    Path,
    Star,
    Complete,
    Tree,
    Random,
}

fn generate(kind: GenKind, n: usize, extra: usize, max_weight: u64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GenKind::Ring => gen::cycle(n),
        GenKind::Path => gen::path(n),
        GenKind::Star => gen::star(n),
        GenKind::Complete => gen::complete(n),
        GenKind::Tree => gen::random_tree(n, max_weight, &mut rng),
        GenKind::Random => gen::random_connected(n, extra, max_weight, &mut rng),
    }
}

fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => out.extend(a.parse::<u64>()?..b.parse::<u64>()?),
            None => out.push(part.parse()?),
        }
    }
    Ok(out)
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    protocol: String,
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value = "distributed")]
    daemon: String,
    #[arg(long, default_value = "weak")]
    fairness: String,
    /// `nodes=all|0,3;registers=all|parent,dist`, or `none` for a clean start.
    #[arg(long, default_value = "nodes=all;registers=all")]
    faults: String,
    /// Event script: `round u v w` for weights, `round node join|leave` for Steiner.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Comma-separated Steiner members.
    #[arg(long)]
    members: Option<String>,
    /// Seeds as `0..10` or `1,2,5`.
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: usize,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace of the first seed.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// DOT picture of the first seed's final tree.
    #[arg(long)]
    dot: Option<PathBuf>,
}

fn cmd_run(a: &RunArgs) -> Result<bool> {
    let protocol: ProtocolKind = a.protocol.parse()?;
    let graph = a.source.load()?;
    let mut spec = ExperimentSpec::new(protocol, graph);
    spec.daemon = a.daemon.parse::<DaemonKind>().map_err(anyhow::Error::msg)?;
    spec.fairness = a.fairness.parse::<Fairness>().map_err(anyhow::Error::msg)?;
    spec.faults = if a.faults == "none" { None } else { Some(a.faults.parse::<FaultSpec>().map_err(anyhow::Error::msg)?) };
    if let Some(path) = &a.events {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        spec.events = if protocol == ProtocolKind::Steiner { parse_member_events(&text)? } else { parse_weight_events(&text)? };
    }
    if let Some(m) = &a.members {
        spec.members = parse_list(m)?.into_iter().map(|x| x as NodeId).collect();
    }
    spec.seeds = parse_list(&a.seeds)?;
    spec.max_rounds = a.max_rounds;
    spec.record_trace = a.trace.is_some();
    let rows = run_experiment(&spec)?;
    let csv = rows_to_csv(&rows);
    match &a.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = &a.trace {
        fs::write(p, &rows[0].trace)?;
    }
    if let Some(p) = &a.dot {
        fs::write(p, tree_dot(&spec.graph, &rows[0].tree.clone().unwrap_or_default()))?;
    }
    Ok(rows.iter().all(|r| r.holds()))
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleAlg {
    Mst,
    Mdst,
    SteinerTm,
    SteinerOnline,
    SteinerOpt,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    alg: OracleAlg,
    #[arg(long)]
    graph: PathBuf,
    /// Comma-separated members, in arrival order for `steiner-online`.
    #[arg(long)]
    members: Option<String>,
}

fn print_edges(net: &Graph, edges: &EdgeSet) {
    let list: Vec<String> = edges.iter().map(|e| format!("{}-{}", e.lo(), e.hi())).collect();
    println!("edges: {}", list.join(" "));
    println!("weight: {}", oracles::tree_weight(net, edges));
    println!("max_degree: {}", oracles::max_degree(net.n(), edges));
}

fn cmd_oracle(a: &OracleArgs) -> Result<bool> {
    let net = read_graph(&a.graph)?;
    let members: Vec<NodeId> = match &a.members {
        Some(m) => parse_list(m)?.into_iter().map(|x| x as NodeId).collect(),
        None => Vec::new(),
    };
    let need_members = || -> Result<()> {
        if members.is_empty() {
            bail!("--members is required for Steiner oracles");
        }
        Ok(())
    };
    match a.alg {
        OracleAlg::Mst => print_edges(&net, &oracles::mst_reference(&net)),
        OracleAlg::Mdst => {
            print_edges(&net, &oracles::mdst_reference(&net));
            println!("optimum: {}", oracles::min_max_degree_exact(&net)?);
        }
        OracleAlg::SteinerTm => {
            need_members()?;
            print_edges(&net, &oracles::steiner_reference(&net, &members, SteinerVariant::Greedy)?);
        }
        OracleAlg::SteinerOnline => {
            need_members()?;
            print_edges(&net, &oracles::steiner_online(&net, &members)?);
        }
        OracleAlg::SteinerOpt => {
            need_members()?;
            println!("weight: {}", oracles::steiner_optimal(&net, &members)?);
        }
    }
    Ok(true)
}

#[derive(Subcommand)]
enum RobotsCmd {
    /// Perpetual exploration of an anonymous ring.
    Ring(RingArgs),
    /// Snapshot graph in DOT.
    Pellicule(PelliculeArgs),
    /// Self-stabilizing naming with whiteboards.
    Naming(NamingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Min,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Random,
    Exhaustive,
}

#[derive(Args)]
struct RingArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "min")]
    algo: AlgoArg,
    #[arg(long, value_enum, default_value = "random")]
    adversary: AdversaryArg,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exploration window; 3n when absent.
    #[arg(long)]
    window: Option<usize>,
}

fn cmd_ring(a: &RingArgs) -> Result<bool> {
    let algo = match a.algo {
        AlgoArg::Min => Algo::Min,
        AlgoArg::Max => Algo::Max,
    };
    let window = a.window.unwrap_or(3 * a.n);
    match a.adversary {
        AdversaryArg::Exhaustive => {
            let c = convergence_check(algo, a.n, a.k)?;
            println!("snapshots={} permanent={} worst_steps={}", c.snapshots, c.permanent, c.worst_steps);
            Ok(true)
        }
        AdversaryArg::Random => {
            let init = match algo {
                Algo::Max => max_start(a.n, a.k)?,
                _ => {
                    let perm = all_snapshots(a.n, a.k)?
                        .into_iter()
                        .find(|s| is_permanent(algo, &s.positions(), a.n).unwrap_or(false));
                    perm.map(|s| s.positions()).context("no permanent snapshot")?
                }
            };
            let mut adv = RandomAdversary { rng: ChaCha8Rng::seed_from_u64(a.seed) };
            let rep = corda_run(a.n, algo, &init, &mut adv, a.steps)?;
            let ok = exploration_verified(&rep, window, a.n);
            let last = rep.trace.last().expect("start recorded");
            println!(
                "start={} end={} steps={} collision={} error={} exploration_verified(window={window})={ok}",
                canonical_snapshot(&init, a.n)?,
                canonical_snapshot(last, a.n)?,
                rep.steps(),
                rep.collision,
                rep.error.as_ref().map_or("none".to_string(), |e| e.to_string()),
            );
            Ok(ok)
        }
    }
}

#[derive(Args)]
struct PelliculeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    reduce: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_pellicule(a: &PelliculeArgs) -> Result<bool> {
    let mut p = build_pellicule(a.n, a.k, DEFAULT_CAP)?;
    if a.reduce {
        p = reduce_pellicule(&p);
    }
    match &a.out {
        Some(path) => fs::write(path, p.to_dot())?,
        None => print!("{}", p.to_dot()),
    }
    Ok(true)
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Det,
    Prob,
}

#[derive(Args)]
struct NamingArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "det")]
    mode: ModeArg,
    /// Subset of `ids,positions,boards,ports,roles`, or `all`/`none`.
    #[arg(long, default_value = "all")]
    faults: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_rounds: u64,
}

fn cmd_naming(a: &NamingArgs) -> Result<bool> {
    let g = PortGraph::from_graph(&read_graph(&a.graph)?);
    let mode = match a.mode {
        ModeArg::Det => Mode::Deterministic,
        ModeArg::Prob => Mode::Probabilistic,
    };
    let mut sys = NamingSystem::new(g, a.k, mode, a.seed)?;
    sys.corrupt(NamingFaults::parse(&a.faults)?);
    let rep = sys.run(a.max_rounds)?;
    let ids: Vec<String> = rep.ids.iter().map(usize::to_string).collect();
    println!("converged={} rounds={} steps={} ids={}", rep.converged, rep.rounds, rep.steps, ids.join(","));
    Ok(rep.converged)
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Print a generated graph in the graph file format.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        extra: usize,
        #[arg(long, default_value_t = 100)]
        max_weight: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Robots(RobotsCmd::Ring(a)) => cmd_ring(a),
        Cmd::Robots(RobotsCmd::Pellicule(a)) => cmd_pellicule(a),
        Cmd::Robots(RobotsCmd::Naming(a)) => cmd_naming(a),
        Cmd::Graph(GraphCmd::Gen { kind, n, extra, max_weight, seed }) => {
            print!("{}", format_graph(&generate(*kind, *n, *extra, *max_weight, *seed)));
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
