use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use rzkp_core::games::{play_rounds, GameKind};
use rzkp_core::graph::{
    extend_with_gadgets, extended_counts, find_three_coloring, gen_planted, GraphFile, PlantedInstance,
};
use rzkp_core::net::{run_verifier_session, serve_prover, ProverConfig, Role, SessionConfig};
use rzkp_core::quantum::audit::{audit_all, AuditConfig};
use rzkp_core::soundness::{self, Variant};
use rzkp_core::strategies::{
    brute_force_vertex3col_value, fixed_coloring_pair, honest_pair, mismatched_pair,
    pair_for_kind, response_b_uniformity, transcript_uniformity, ClassicalPair,
};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<Outcome, CliError>;

/// A successful run; `ok = false` reports a negative result (exit 1).
struct Outcome {
    ok: bool,
}

#[derive(Parser, Debug)]
#[command(name = "rzkp", version, about = "Relativistic zero-knowledge 3-coloring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a planted 3-colorable instance.
    Gen(GenArgs),
    /// Insert commutativity gadgets between all non-adjacent pairs.
    Extend(ExtendArgs),
    /// Quantum-value bounds and round counts.
    Bounds(BoundsArgs),
    /// Play rounds of a game in-process.
    Simulate(SimulateArgs),
    /// Exact classical value of the vertex game.
    Bruteforce(BruteforceArgs),
    /// Random-strategy sweeps over the numerical certificates.
    AuditQuantum(AuditArgs),
    /// Run an honest prover server.
    ServeProver(ServeArgs),
    /// Run a verifier session against two prover servers.
    Verify(VerifyArgs),
    /// Transcript uniformity of the honest prover A.
    ZkTest(ZkArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Graph JSON file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generate a planted instance with this many vertices instead.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edges: Option<usize>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ExtendArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Main,
    Appendix,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Main => Variant::MainTheorem,
            VariantArg::Appendix => Variant::AppendixChain,
        }
    }
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Without --nodes, the three reference rows are printed.
    #[arg(long, requires_all = ["edges", "max_deg"])]
    nodes: Option<u64>,
    #[arg(long)]
    edges: Option<u64>,
    #[arg(long)]
    max_deg: Option<u64>,
    #[arg(long, default_value_t = 100.0)]
    k: f64,
    #[arg(long, value_enum, default_value = "appendix")]
    variant: VariantArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GameArg {
    AltRzkp,
    AltEdge,
    Bcs,
    Vertex,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    /// Witness with a fresh color permutation every round.
    Honest,
    /// Witness without permutation.
    Fixed,
    /// Prover B uses the witness with colors 0 and 1 swapped.
    Mismatched,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "alt-rzkp")]
    game: GameArg,
    #[arg(long, default_value_t = GameKind::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "honest")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write transcripts as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BruteforceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Strategies per sweep.
    #[arg(long, default_value_t = 400)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    max_dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full report, including violation examples.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    role: String,
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// Seed shared by both provers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    delay_ms: u64,
    /// Exit after this many sessions.
    #[arg(long)]
    sessions: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    prover_a: String,
    #[arg(long)]
    prover_b: String,
    #[arg(long, default_value_t = 10_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    deadline_ms: u64,
    /// Write the full session report with per-round timings.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ZkArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "honest")]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 1_000_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn read_graph_file(path: &Path) -> Result<GraphFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    GraphFile::parse(&text).map_err(CliError::domain)
}

fn load_instance(src: &SourceArgs, seed: u64) -> Result<PlantedInstance, CliError> {
    match (&src.graph, src.nodes, src.edges) {
        (Some(p), None, None) => {
            let file = read_graph_file(p)?;
            if let Some(inst) = file.instance().map_err(CliError::domain)? {
                return Ok(inst);
            }
            let g = file.graph().map_err(CliError::domain)?;
            let w = find_three_coloring(&g).ok_or_else(|| CliError::Domain("graph is not 3-colorable".into()))?;
            PlantedInstance::new(g, w).map_err(CliError::domain)
        }
        (None, Some(n), Some(m)) => gen_planted(n, m, seed).map_err(CliError::domain),
        _ => Err(CliError::Usage("give either --graph or both --nodes and --edges".into())),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn emit(json_mode: bool, command: &str, config: Value, result: Value, human: &[String]) {
    let mut out = std::io::stdout().lock();
    if json_mode {
        let doc = json!({"command": command, "config": config, "result": result});
        let _ = writeln!(out, "{}", serde_json::to_string(&doc).expect("json"));
    } else {
        let _ = writeln!(out, "config: {}", serde_json::to_string(&config).expect("json"));
        for line in human {
            let _ = writeln!(out, "{line}");
        }
    }
}

fn game_kind(g: GameArg, lambda: f64) -> Result<GameKind, CliError> {
    let kind = match g {
        GameArg::AltRzkp => GameKind::AltRzkp,
        GameArg::AltEdge => GameKind::AltEdge,
        GameArg::Bcs => GameKind::Bcs { lambda },
        GameArg::Vertex => GameKind::Vertex { lambda },
    };
    kind.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(kind)
}

fn strategy(s: StrategyArg, inst: &PlantedInstance, seed: u64) -> ClassicalPair {
    match s {
        StrategyArg::Honest => honest_pair(inst, seed),
        StrategyArg::Fixed => fixed_coloring_pair(&inst.witness, seed),
        StrategyArg::Mismatched => mismatched_pair(&inst.witness, &inst.witness.permuted(&[1, 0, 2]), seed),
    }
}

fn strategy_name(s: StrategyArg) -> &'static str {
    match s {
        StrategyArg::Honest => "honest",
        StrategyArg::Fixed => "fixed",
        StrategyArg::Mismatched => "mismatched",
    }
}

fn cmd_gen(a: GenArgs) -> CliResult {
    let inst = gen_planted(a.nodes, a.edges, a.seed).map_err(CliError::domain)?;
    let text = GraphFile::from_instance(&inst).to_canonical_json();
    let config = json!({"nodes": a.nodes, "edges": a.edges, "seed": a.seed, "out": a.out});
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    let hash: String = inst.graph.canonical_hash().iter().map(|b| format!("{b:02x}")).collect();
    let mut human = vec![format!(
        "n={} m={} max_deg={} hash={hash}",
        inst.graph.vertex_count(),
        inst.graph.edge_count(),
        inst.graph.max_degree()
    )];
    if a.out.is_none() {
        human.push(text.clone());
    }
    let result = json!({
        "n": inst.graph.vertex_count(),
        "m": inst.graph.edge_count(),
        "max_deg": inst.graph.max_degree(),
        "hash": hash,
        "graph": serde_json::from_str::<Value>(&text).expect("json"),
    });
    emit(a.output.json, "gen", config, result, &human);
    Ok(Outcome { ok: true })
}

fn cmd_extend(a: ExtendArgs) -> CliResult {
    let g = read_graph_file(&a.graph)?.graph().map_err(CliError::domain)?;
    let ext = extend_with_gadgets(&g);
    let (n, m) = (ext.full.vertex_count() as u64, ext.full.edge_count() as u64);
    let closed = extended_counts(g.vertex_count() as u64, g.edge_count() as u64).map_err(CliError::domain)?;
    if let Some(p) = &a.out {
        write_file(p, &GraphFile::from_graph(&ext.full, None).to_canonical_json())?;
    }
    let config = json!({"graph": a.graph, "out": a.out});
    let result = json!({
        "n": g.vertex_count(),
        "m": g.edge_count(),
        "n_ext": n,
        "m_ext": m,
        "gadgets": ext.gadgets.len(),
        "closed_form": [closed.0, closed.1],
        "matches_closed_form": closed == (n, m),
    });
    let human = vec![
        format!("n'={n}, m'={m}"),
        format!("gadgets={} closed_form=({}, {})", ext.gadgets.len(), closed.0, closed.1),
    ];
    emit(a.output.json, "extend", config, result, &human);
    Ok(Outcome { ok: closed == (n, m) })
}

const REFERENCE_ROWS: [(u64, u64, u64); 3] = [(200, 380, 4), (600, 1122, 4), (900, 1695, 4)];

fn cmd_bounds(a: BoundsArgs) -> CliResult {
    let variant: Variant = a.variant.into();
    let rows: Vec<(u64, u64, u64)> = match (a.nodes, a.edges, a.max_deg) {
        (Some(n), Some(m), Some(d)) => vec![(n, m, d)],
        (None, None, None) => REFERENCE_ROWS.to_vec(),
        _ => return Err(CliError::Usage("--nodes, --edges and --max-deg go together".into())),
    };
    let mut reports = Vec::new();
    let mut human = vec![format!(
        "{:>8} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "n", "m", "n'", "m'", "1-omega_q", "rounds"
    )];
    for &(n, m, d) in &rows {
        let r = soundness::report(n, m, d, a.k, variant).map_err(|e| match e {
            soundness::SoundnessError::BadK(_) => CliError::Usage(e.to_string()),
            _ => CliError::domain(e),
        })?;
        let other = soundness::quantum_value_bound(
            n,
            m,
            d,
            match variant {
                Variant::MainTheorem => Variant::AppendixChain,
                Variant::AppendixChain => Variant::MainTheorem,
            },
        )
        .map_err(CliError::domain)?;
        human.push(format!(
            "{:>8} {:>8} {:>10} {:>10} {:>10} {:>10}",
            n,
            m,
            r.n_ext,
            r.m_ext,
            r.one_minus_omega_q.to_string(),
            r.rounds.expect("rounds").to_string()
        ));
        let mut v = serde_json::to_value(&r).expect("json");
        v["one_minus_omega_q_text"] = json!(r.one_minus_omega_q.to_string());
        v["rounds_text"] = json!(r.rounds.expect("rounds").to_string());
        v["log10_ratio_to_other_variant"] = json!(r.log10_epsilon_star - other.log10_epsilon_star);
        reports.push(v);
    }
    human.push(
        "note: the main-theorem and appendix constant sets disagree; the appendix set reproduces the reference round table"
            .into(),
    );
    let config = json!({"nodes": a.nodes, "edges": a.edges, "max_deg": a.max_deg, "k": a.k, "variant": variant.name()});
    emit(a.output.json, "bounds", config, json!({"rows": reports, "constants_disagree": true}), &human);
    Ok(Outcome { ok: true })
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let kind = game_kind(a.game, a.lambda)?;
    let inst = load_instance(&a.source, a.seed)?;
    let pair = pair_for_kind(strategy(a.strategy, &inst, a.seed), kind);
    let (stats, log) = play_rounds(kind, &inst.graph, &pair, a.rounds, a.seed, a.out.is_some()).map_err(CliError::domain)?;
    if let (Some(p), Some(log)) = (&a.out, log) {
        let mut text = String::new();
        for t in &log {
            text.push_str(&t.to_json_line());
            text.push('\n');
        }
        write_file(p, &text)?;
    }
    let config = json!({
        "graph": a.source.graph, "nodes": a.source.nodes, "edges": a.source.edges,
        "game": kind.name(), "lambda": a.lambda, "strategy": strategy_name(a.strategy),
        "rounds": a.rounds, "seed": a.seed, "out": a.out,
    });
    let human = vec![format!(
        "game={} strategy={} accepts={}/{} win_rate={:.6} wilson95=[{:.6}, {:.6}]",
        kind.name(),
        strategy_name(a.strategy),
        stats.accepts,
        stats.rounds,
        stats.win_rate,
        stats.wilson_95.0,
        stats.wilson_95.1
    )];
    emit(a.output.json, "simulate", config, serde_json::to_value(&stats).expect("json"), &human);
    Ok(Outcome { ok: true })
}

fn cmd_bruteforce(a: BruteforceArgs) -> CliResult {
    let g = read_graph_file(&a.graph)?.graph().map_err(CliError::domain)?;
    let v = brute_force_vertex3col_value(&g).map_err(CliError::domain)?;
    let config = json!({"graph": a.graph});
    let value = *v.ratio().numer() as f64 / *v.ratio().denom() as f64;
    let result = json!({
        "numer": v.numer, "denom": v.denom, "value": value,
        "argmax": v.argmax.0, "edges": g.edge_count(),
    });
    let human = vec![
        format!("{}/{}", v.numer, v.denom),
        format!("value={value:.6} argmax={:?}", v.argmax.0),
    ];
    emit(a.output.json, "bruteforce", config, result, &human);
    Ok(Outcome { ok: true })
}

fn cmd_audit(a: AuditArgs) -> CliResult {
    if a.samples == 0 || a.max_dim == 0 {
        return Err(CliError::Usage("--samples and --max-dim must be positive".into()));
    }
    let cfg = AuditConfig {
        samples: a.samples,
        max_dim: a.max_dim,
        seed: a.seed,
    };
    let audit = audit_all(&cfg).map_err(CliError::domain)?;
    let full = serde_json::to_value(&audit).expect("json");
    if let Some(p) = &a.out {
        write_file(p, &serde_json::to_string_pretty(&full).expect("json"))?;
    }
    let mut human = Vec::new();
    for (name, rep) in &audit.sections {
        for (ineq, t) in &rep.tallies {
            human.push(format!(
                "{name:<26} {ineq:<26} checked={:<8} violations={:<4} worst_ratio={:.4}",
                t.checked, t.violations, t.worst_ratio
            ));
        }
    }
    human.push(format!(
        "strategies={} violations={}",
        audit.strategies(),
        audit.total_violations()
    ));
    let config = json!({"samples": a.samples, "max_dim": a.max_dim, "seed": a.seed, "out": a.out});
    let mut result = full;
    result["strategies"] = json!(audit.strategies());
    result["total_violations"] = json!(audit.total_violations());
    emit(a.output.json, "audit-quantum", config, result, &human);
    Ok(Outcome {
        ok: audit.total_violations() == 0,
    })
}

fn cmd_serve(a: ServeArgs) -> CliResult {
    let role = Role::parse(&a.role).ok_or_else(|| CliError::Usage(format!("--role must be A or B, got {}", a.role)))?;
    let inst = read_graph_file(&a.graph)?
        .instance()
        .map_err(CliError::domain)?
        .ok_or_else(|| CliError::Domain("prover needs a graph file with a witness".into()))?;
    let listener = TcpListener::bind(&a.listen).map_err(|e| CliError::Domain(format!("{}: {e}", a.listen)))?;
    let addr = listener.local_addr().map_err(CliError::domain)?;
    println!(
        "config: {}",
        json!({"graph": a.graph, "role": a.role, "listen": a.listen, "seed": a.seed, "delay_ms": a.delay_ms, "sessions": a.sessions})
    );
    println!("listening on {addr}");
    let _ = std::io::stdout().flush();
    let cfg = ProverConfig {
        role,
        instance: inst,
        shared_seed: a.seed,
        delay: Duration::from_millis(a.delay_ms),
    };
    serve_prover(listener, cfg, a.sessions).map_err(CliError::domain)?;
    Ok(Outcome { ok: true })
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let g = read_graph_file(&a.graph)?.graph().map_err(CliError::domain)?;
    let cfg = SessionConfig {
        rounds: a.rounds,
        deadline: Duration::from_millis(a.deadline_ms),
        seed: a.seed,
        prover_a: a.prover_a.clone(),
        prover_b: a.prover_b.clone(),
        kind: GameKind::AltRzkp,
        handshake_timeout: Duration::from_secs(5),
    };
    let rep = run_verifier_session(&cfg, &g).map_err(CliError::domain)?;
    if let Some(p) = &a.out {
        write_file(p, &serde_json::to_string(&rep).expect("json"))?;
    }
    let config = json!({
        "graph": a.graph, "prover_a": a.prover_a, "prover_b": a.prover_b,
        "rounds": a.rounds, "seed": a.seed, "deadline_ms": a.deadline_ms, "out": a.out,
    });
    let result = json!({
        "rounds": rep.rounds, "accepted": rep.accepted, "rejected_check": rep.rejected_check,
        "rejected_timeout": rep.rejected_timeout, "session_accepted": rep.session_accepted,
        "elapsed_ns": rep.elapsed_ns, "graph_hash": rep.graph_hash,
    });
    let human = vec![format!(
        "accepted={} rejected_check={} rejected_timeout={} decision={} elapsed_ms={:.1}",
        rep.accepted,
        rep.rejected_check,
        rep.rejected_timeout,
        if rep.session_accepted { "accept" } else { "reject" },
        rep.elapsed_ns as f64 / 1e6
    )];
    emit(a.output.json, "verify", config, result, &human);
    Ok(Outcome {
        ok: rep.session_accepted,
    })
}

fn cmd_zk(a: ZkArgs) -> CliResult {
    let inst = load_instance(&a.source, a.seed)?;
    let pair = strategy(a.strategy, &inst, a.seed);
    let (_, log) = play_rounds(GameKind::AltRzkp, &inst.graph, &pair, a.rounds, a.seed, true).map_err(CliError::domain)?;
    let log = log.expect("log kept");
    let mut edges = Vec::new();
    let mut human = Vec::new();
    let (mut max_a, mut max_b) = (0.0f64, 0.0f64);
    for &e in inst.graph.edges() {
        let ra = transcript_uniformity(&log, e).map_err(CliError::domain)?;
        let rb = response_b_uniformity(&log, e).map_err(CliError::domain)?;
        max_a = max_a.max(ra.tv);
        max_b = max_b.max(rb.tv);
        human.push(format!(
            "edge ({}, {}) samples={} support={} tv_a={:.5} tv_b={:.5}",
            e.0, e.1, ra.samples, ra.support, ra.tv, rb.tv
        ));
        edges.push(json!({"edge": [e.0, e.1], "a": ra, "b": rb}));
    }
    human.push(format!("max_tv_a={max_a:.5} max_tv_b={max_b:.5}"));
    let config = json!({
        "graph": a.source.graph, "nodes": a.source.nodes, "edges": a.source.edges,
        "strategy": strategy_name(a.strategy), "rounds": a.rounds, "seed": a.seed,
    });
    emit(a.output.json, "zk-test", config, json!({"edges": edges, "max_tv_a": max_a, "max_tv_b": max_b}), &human);
    Ok(Outcome { ok: true })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Extend(a) => cmd_extend(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bruteforce(a) => cmd_bruteforce(a),
        Command::AuditQuantum(a) => cmd_audit(a),
        Command::ServeProver(a) => cmd_serve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::ZkTest(a) => cmd_zk(a),
    };
    match res {
        Ok(Outcome { ok: true }) => ExitCode::SUCCESS,
        Ok(Outcome { ok: false }) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprintln!("{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
