use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use kfactor_core::generators::{
    gen_boundaried_forest, gen_oracle, gen_random_regular_bipartite, gen_random_regular_multigraph,
    ForestSpec, Labeling, OracleGraph,
};
use kfactor_core::graph::format::{to_dot, FactorDoc, GraphDoc, MatchingDoc};
use kfactor_core::graph::{
    BipartiteMultigraph, FractionalMatching, SupportSubgraph, UndirectedMultigraph,
};
use kfactor_core::pipeline::{balanced_orientation, corollary_factor, k_factor_traced, two_factor};
use kfactor_core::rounding::{
    random_sigma, round_to_acyclic_traced, sigma_round_traced, TraceEvent,
};
use kfactor_core::tree_matching::{match_forest, weight_profile, weight_profile_check};
use kfactor_core::verification::{
    disagreement_frequency, median_residual, parity_obstruction_experiment, verify_factor,
    window_residual_experiment, CSV_HEADER,
};
use kfactor_core::Error;

#[derive(Parser)]
#[command(
    name = "kfactor",
    version,
    about = "Regular spanning subgraphs of regular bipartite multigraphs"
)]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "KFACTOR_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph, window or forest.
    Gen(GenArgs),
    /// Round a fractional perfect matching.
    Round(RoundArgs),
    /// Match a boundaried forest.
    Treematch(TreematchArgs),
    /// Find a k-factor.
    Kfactor(KfactorArgs),
    /// Find a 2-factor of an even-degree graph.
    Twofactor(TwofactorArgs),
    /// 2- or 4-factor of an even-regular general graph.
    Corollary(CorollaryArgs),
    /// Check a factor against its graph.
    Verify(VerifyArgs),
    /// Window experiments.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Random,
    Oracle,
    Forest,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Spider,
    Path,
    Ray,
    Random,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec file; replaces the family flags.
    #[arg(long, conflicts_with = "family")]
    spec: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    seed: Option<u64>,
    /// Vertices per side (random), vertices (general), or tree size (forest).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Preset name or oracle spec file.
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<i64>>,
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long)]
    shape: Option<Shape>,
    /// Legs (spider) or root degree (ray).
    #[arg(long)]
    branches: Option<usize>,
    /// Leg or ray length.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    extra_stub_percent: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Saturate,
    Sigma,
}

#[derive(Args)]
struct RoundArgs {
    /// A graph (started at the uniform matching) or a matching document.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, value_enum, default_value_t = Mode::Saturate)]
    mode: Mode,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    max_rounds: usize,
    #[arg(long)]
    emit_trace: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TreematchArgs {
    /// Forest graph document (stub flags mark stubs), optionally with weights.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    emit_matching: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct KfactorArgs {
    #[arg(long)]
    input: PathBuf,
    /// Degree of the input; read from the graph when omitted.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: usize,
    #[arg(short = 'o', long = "emit", alias = "output")]
    emit: Option<PathBuf>,
    /// Print one JSON line per pipeline stage on stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct TwofactorArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    d: Option<usize>,
    #[arg(short = 'o', long = "emit", alias = "output")]
    emit: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Orient {
    Euler,
}

#[derive(Args)]
struct CorollaryArgs {
    /// General multigraph document: {"vertices": n, "edges": [{id, u, v}]}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Orient::Euler)]
    orient: Orient,
    #[arg(short = 'o', long = "emit", alias = "output")]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    factor: PathBuf,
    /// Defaults to the `k` recorded in the factor file.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Residual,
    Parity,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelingArg {
    Hashed,
    Lexicographic,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// Preset name (line, doubled_line, planar3, planar4) or oracle spec file.
    #[arg(long)]
    oracle: String,
    #[arg(long, value_delimiter = ',', default_values_t = [8u64, 16, 32])]
    radii: Vec<u64>,
    /// Residual: number of seeds. Parity: number of window pairs.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Base seed of the parity experiment.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value_t = LabelingArg::Hashed)]
    labeling: LabelingArg,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Generator spec documents, `{"family": ..., ...params, "seed": int}`.
#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum GenSpec {
    Random {
        n: usize,
        d: usize,
        seed: u64,
    },
    Oracle {
        #[serde(default)]
        preset: Option<String>,
        #[serde(default)]
        shifts: Option<Vec<Vec<i64>>>,
        center: Vec<i64>,
        radius: u64,
        seed: u64,
    },
    Forest {
        #[serde(flatten)]
        shape: ForestSpec,
        seed: u64,
    },
    General {
        n: usize,
        d: usize,
        seed: u64,
    },
}

#[derive(Deserialize)]
struct OracleDoc {
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    shifts: Option<Vec<Vec<i64>>>,
}

type CliResult<T> = Result<T, Error>;

fn arg_err(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| arg_err(format!("--{flag} is required")))
}

fn preset(name: &str) -> Option<OracleGraph> {
    match name {
        "line" => Some(OracleGraph::line()),
        "doubled_line" => Some(OracleGraph::doubled_line()),
        "planar3" => Some(OracleGraph::planar3()),
        "planar4" => Some(OracleGraph::planar4()),
        _ => None,
    }
}

fn oracle_from(preset_name: Option<&str>, shifts: Option<Vec<Vec<i64>>>) -> CliResult<OracleGraph> {
    match (preset_name, shifts) {
        (Some(name), None) => {
            preset(name).ok_or_else(|| arg_err(format!("unknown oracle preset {name}")))
        }
        (None, Some(shifts)) => {
            let dim = shifts.first().map_or(0, Vec::len);
            gen_oracle(dim, shifts)
        }
        _ => Err(arg_err("an oracle needs exactly one of a preset or shifts")),
    }
}

fn load_oracle(arg: &str) -> CliResult<OracleGraph> {
    if let Some(o) = preset(arg) {
        return Ok(o);
    }
    let doc: OracleDoc = serde_json::from_str(&fs::read_to_string(arg)?)?;
    oracle_from(doc.preset.as_deref(), doc.shifts)
}

fn read_json(path: &Path) -> CliResult<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn load_graph(path: &Path) -> CliResult<BipartiteMultigraph> {
    serde_json::from_value::<GraphDoc>(read_json(path)?)?.to_graph()
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn to_pretty<T: serde::Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn path_str(p: &Option<PathBuf>) -> Value {
    p.as_ref()
        .map_or(Value::Null, |p| json!(p.display().to_string()))
}

/// Degree shared by every interior vertex.
fn interior_degree(g: &BipartiteMultigraph, given: Option<usize>) -> CliResult<usize> {
    let d = match given {
        Some(d) => d,
        None => g.interior().next().map_or(0, |v| g.degree(v)),
    };
    if !g.is_interior_regular(d) {
        return Err(Error::Structural(format!(
            "graph is not {d}-regular on its interior"
        )));
    }
    Ok(d)
}

fn gen(args: GenArgs) -> CliResult<Value> {
    let spec = match &args.spec {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
        None => {
            let seed = require(args.seed, "seed")?;
            match require(args.family, "family")? {
                Family::Random => GenSpec::Random {
                    n: require(args.n, "n")?,
                    d: require(args.d, "d")?,
                    seed,
                },
                Family::General => GenSpec::General {
                    n: require(args.n, "n")?,
                    d: require(args.d, "d")?,
                    seed,
                },
                Family::Oracle => {
                    let name = require(args.oracle.clone(), "oracle")?;
                    let o = load_oracle(&name)?;
                    GenSpec::Oracle {
                        preset: None,
                        shifts: Some(o.shifts().to_vec()),
                        center: args.center.clone().unwrap_or_else(|| vec![0; o.dim()]),
                        radius: require(args.radius, "radius")?,
                        seed,
                    }
                }
                Family::Forest => {
                    let shape = match require(args.shape, "shape")? {
                        Shape::Spider => ForestSpec::Spider {
                            legs: require(args.branches, "branches")?,
                            leg_length: require(args.length, "length")?,
                        },
                        Shape::Path => ForestSpec::Path {
                            length: require(args.length, "length")?,
                        },
                        Shape::Ray => ForestSpec::Ray {
                            root_degree: require(args.branches, "branches")?,
                            length: require(args.length, "length")?,
                        },
                        Shape::Random => ForestSpec::Random {
                            vertices: require(args.n, "n")?,
                            extra_stub_percent: args.extra_stub_percent,
                        },
                    };
                    GenSpec::Forest { shape, seed }
                }
            }
        }
    };
    let (family, g_doc, dot, vertices, edges) = match spec {
        GenSpec::Random { n, d, seed } => {
            let g = gen_random_regular_bipartite(n, d, seed);
            (
                "random",
                to_pretty(&GraphDoc::from_graph(&g))?,
                to_dot(&g, None),
                g.vertex_count(),
                g.edge_count(),
            )
        }
        GenSpec::Oracle {
            preset,
            shifts,
            center,
            radius,
            seed,
        } => {
            let o = oracle_from(preset.as_deref(), shifts)?.with_labeling(Labeling::Hashed(seed));
            let w = o.window(&center, radius)?;
            let g = &w.graph;
            (
                "oracle",
                to_pretty(&GraphDoc::from_graph(g))?,
                to_dot(g, None),
                g.vertex_count(),
                g.edge_count(),
            )
        }
        GenSpec::Forest { shape, seed } => {
            let f = gen_boundaried_forest(&shape, seed)?;
            let g = f.graph();
            let mut doc = GraphDoc::from_graph(g);
            for (rec, &stub) in doc.vertices.iter_mut().zip(f.stub_flags()) {
                rec.stub = stub;
                rec.boundary = false;
            }
            (
                "forest",
                to_pretty(&doc)?,
                to_dot(g, None),
                g.vertex_count(),
                g.edge_count(),
            )
        }
        GenSpec::General { n, d, seed } => {
            let g = gen_random_regular_multigraph(n, d, seed)?;
            if matches!(args.format, Format::Dot) {
                return Err(arg_err("dot output is only available for bipartite graphs"));
            }
            (
                "general",
                to_pretty(&g)?,
                String::new(),
                g.vertex_count(),
                g.edge_count(),
            )
        }
    };
    let text = match args.format {
        Format::Json => g_doc,
        Format::Dot => dot,
    };
    write_output(args.output.as_deref(), &text)?;
    Ok(
        json!({"command": "gen", "family": family, "vertices": vertices, "edges": edges, "output": path_str(&args.output)}),
    )
}

fn round(args: RoundArgs) -> CliResult<Value> {
    let value = read_json(&args.input)?;
    let doc: GraphDoc = serde_json::from_value(value.clone())?;
    let g = doc.to_graph()?;
    let f = if value.get("weights").is_some() {
        serde_json::from_value::<MatchingDoc>(value)?.matching(&g)?
    } else {
        let d = interior_degree(&g, None)?;
        if args.k > d as u64 {
            return Err(arg_err(format!("k={} exceeds the degree {d}", args.k)));
        }
        FractionalMatching::uniform(&g, args.k, d.max(1) as u64, args.k)?
    };
    if !f.is_valid() {
        return Err(Error::Structural(
            "input is not a valid fractional matching".into(),
        ));
    }
    let mut trace = Vec::new();
    let mut record = |ev: &TraceEvent, _: &FractionalMatching<'_>| {
        trace.push(serde_json::to_string(ev).expect("trace events serialize"));
    };
    let out = match args.mode {
        Mode::Saturate => round_to_acyclic_traced(&f, &mut record),
        Mode::Sigma => {
            let seed = require(args.seed, "seed")?;
            sigma_round_traced(&f, random_sigma(seed), args.max_rounds, &mut record)
        }
    };
    if let Some(path) = &args.emit_trace {
        let mut text = trace.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        fs::write(path, text)?;
    }
    let text = match args.format {
        Format::Json => to_pretty(&MatchingDoc::from_matching(&out))?,
        Format::Dot => to_dot(&g, Some(&out)),
    };
    write_output(args.output.as_deref(), &text)?;
    let support = SupportSubgraph::of(&out);
    Ok(json!({
        "command": "round",
        "updates": trace.len(),
        "support": support.len(),
        "acyclic": support.is_interior_acyclic(),
        "integral": out.is_integral(),
        "output": path_str(&args.output),
    }))
}

fn treematch(args: TreematchArgs) -> CliResult<Value> {
    let value = read_json(&args.input)?;
    let doc: GraphDoc = serde_json::from_value(value.clone())?;
    let stubs: Vec<bool> = doc.dense_vertices()?.iter().map(|r| r.stub).collect();
    let forest =
        kfactor_core::generators::BoundariedForest::new(doc.to_graph()?, stubs, Vec::new())?;
    let m = match_forest(&forest);
    let weights = if value.get("weights").is_some() {
        Some(serde_json::from_value::<MatchingDoc>(value)?)
    } else {
        None
    };
    let f = weights
        .as_ref()
        .map(|w| w.matching(forest.graph()))
        .transpose()?;
    let reports: Vec<Value> = m
        .reports
        .iter()
        .map(|r| {
            let mut v = json!({
                "ray": r.ray,
                "stub": r.stub,
                "degrees": r.degrees,
                "profile": r.profile,
            });
            if let Some(f) = &f {
                v["weight_profile"] = json!(weight_profile(f, r));
                v["check"] = json!(weight_profile_check(f, r));
            }
            v
        })
        .collect();
    if let Some(path) = &args.emit_matching {
        let doc = json!({"edges": m.edges, "via_stub": m.via_stub, "uncovered": m.uncovered});
        fs::write(path, to_pretty(&doc)?)?;
    }
    if let Some(path) = &args.report {
        fs::write(path, to_pretty(&reports)?)?;
    }
    Ok(json!({
        "command": "treematch",
        "edges": m.edges.len(),
        "reports": m.reports.len(),
        "unresolved": m.unresolved().len(),
    }))
}

fn kfactor(args: KfactorArgs) -> CliResult<Value> {
    let g = load_graph(&args.input)?;
    let d = interior_degree(&g, args.d)?;
    let trace = args.trace;
    let h = k_factor_traced(&g, d, args.k, |ev| {
        if trace {
            eprintln!(
                "{}",
                serde_json::to_string(ev).expect("stage events serialize")
            );
        }
    })?;
    let verified = verify_factor(&g, &h.edge_ids(), args.k);
    if !verified && !g.has_boundary() {
        return Err(Error::InvariantViolation(
            "pipeline output failed verification".into(),
        ));
    }
    write_output(
        args.emit.as_deref(),
        &to_pretty(&FactorDoc::from_factor(&h))?,
    )?;
    Ok(json!({
        "command": "kfactor",
        "d": d,
        "k": args.k,
        "edges": h.len(),
        "unresolved": h.unresolved().len(),
        "verified": verified,
        "output": path_str(&args.emit),
    }))
}

fn twofactor(args: TwofactorArgs) -> CliResult<Value> {
    let g = load_graph(&args.input)?;
    let d = interior_degree(&g, args.d)?;
    let h = two_factor(&g, d)?;
    let verified = verify_factor(&g, &h.edge_ids(), 2);
    write_output(
        args.emit.as_deref(),
        &to_pretty(&FactorDoc::from_factor(&h))?,
    )?;
    Ok(
        json!({"command": "twofactor", "d": d, "edges": h.len(), "verified": verified, "output": path_str(&args.emit)}),
    )
}

fn corollary(args: CorollaryArgs) -> CliResult<Value> {
    let g: UndirectedMultigraph = serde_json::from_value(read_json(&args.input)?)?;
    let o = match args.orient {
        Orient::Euler => balanced_orientation(&g)?,
    };
    let h = corollary_factor(&g, &o)?;
    write_output(args.emit.as_deref(), &to_pretty(&h)?)?;
    Ok(
        json!({"command": "corollary", "degree": h.degree, "edges": h.edges.len(), "output": path_str(&args.emit)}),
    )
}

fn verify(args: VerifyArgs) -> CliResult<Value> {
    let g = load_graph(&args.graph)?;
    let doc: FactorDoc = serde_json::from_value(read_json(&args.factor)?)?;
    let k = args.k.unwrap_or(doc.k);
    doc.factor(&g)?;
    let ok = verify_factor(&g, &doc.edges, k);
    if !ok {
        return Err(Error::Structural(format!(
            "the edge set is not a {k}-factor"
        )));
    }
    Ok(json!({"command": "verify", "k": k, "edges": doc.edges.len(), "verified": true}))
}

fn experiment(args: ExperimentArgs) -> CliResult<Value> {
    let oracle = load_oracle(&args.oracle)?;
    let mut rows = vec![CSV_HEADER.to_string()];
    let summary = match args.kind {
        ExperimentKind::Residual => {
            let reports = window_residual_experiment(&oracle, &args.radii, args.k, args.seeds)?;
            rows.extend(reports.iter().map(|r| r.csv_row()));
            let medians: Vec<Value> = args
                .radii
                .iter()
                .map(|&r| {
                    let m = median_residual(&reports, r);
                    json!({"radius": r, "median_residual": m.map(|m| m.to_string())})
                })
                .collect();
            json!({"command": "experiment", "kind": "residual", "oracle": oracle.id(), "windows": reports.len(), "radii": medians})
        }
        ExperimentKind::Parity => {
            let seed = require(args.seed, "seed")?;
            let oracle = match args.labeling {
                LabelingArg::Hashed => oracle.with_labeling(Labeling::Hashed(seed)),
                LabelingArg::Lexicographic => oracle.with_labeling(Labeling::Lexicographic),
            };
            let reports = parity_obstruction_experiment(&oracle, &args.radii, args.seeds, seed)?;
            rows.extend(reports.iter().map(|r| r.csv_row()));
            let freqs: Vec<Value> = args
                .radii
                .iter()
                .map(|&r| json!({"radius": r, "disagreement": disagreement_frequency(&reports, r)}))
                .collect();
            json!({"command": "experiment", "kind": "parity", "oracle": oracle.id(), "pairs": reports.len(), "radii": freqs})
        }
    };
    if let Some(path) = &args.csv {
        let mut text = rows.join("\n");
        text.push('\n');
        fs::write(path, text)?;
    }
    Ok(summary)
}

fn run(cli: Cli) -> CliResult<Value> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| arg_err(e.to_string()))?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Round(a) => round(a),
        Command::Treematch(a) => treematch(a),
        Command::Kfactor(a) => kfactor(a),
        Command::Twofactor(a) => twofactor(a),
        Command::Corollary(a) => corollary(a),
        Command::Verify(a) => verify(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Unsupported { .. } | Error::OddDegree { .. } => 2,
                _ => 1,
            };
            println!("{}", json!({"error": e.to_string(), "exit": code}));
            ExitCode::from(code)
        }
    }
}
