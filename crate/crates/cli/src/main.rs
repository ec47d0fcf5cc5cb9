//! `multiembed`: build, audit, and exercise multi-embeddings of finite
//! metric spaces from the command line.
//!
//! Reports go to stdout as JSON unless `-o` names a file; per-trial tables
//! are CSV. Every run that writes at least one file also writes a
//! `<first-output>.manifest.json` sidecar recording the exact argv, resolved
//! parameters, seeds, inputs, and outputs; re-invoking the recorded argv
//! reproduces every output byte for byte.
//!
//! Exit codes: 0 success, 1 a checked invariant was falsified (audit
//! violations, a bound exceeded, a lower bound that fails to hold), 2 usage
//! or input errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use multiembed::embed_tree::{build_path_star, realize_in_star, DEFAULT_NODE_BUDGET};
use multiembed::embed_ultra::{
    audit_embedding, build_ultrametric_embedding, noncontraction_violations,
};
use multiembed::gst::{
    exact_oracle, greedy_star_solver, project_solution, reduce_gst, solve_tree_exact, GstSpace,
    SteinerSolution, GROUP_BUDGET, ORACLE_BUDGET,
};
use multiembed::io::{
    embedding_from_json, embedding_to_json, graph_from_tsv, graph_to_tsv, gst_from_json,
    metric_from_json, metric_to_json, mts_from_json, solution_to_json, stats_to_json, tree_to_json,
    trials_to_csv,
};
use multiembed::metric::{from_graph, generate, GenSpec, Generated};
use multiembed::mts::run_experiment;
use multiembed::prob::{sample_ensemble, sample_tree_embedding, union_under_root};
use multiembed::realize::{
    distortion_stats_jobs, lower_bound_check, optimal_rep_path, realization_bound, realize_path,
    PointPath, RepPath,
};
use multiembed::{le_tol, EmbedParams, MetricSpace, MultiEmbedding};

#[derive(Parser)]
#[command(
    name = "multiembed",
    version,
    about = "Build, audit, and exercise multi-embeddings of finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a source graph (TSV) or metric (JSON)
    Gen(GenArgs),
    /// Build an embedding of a source space
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Re-derive every certificate of an embedding and report violations
    Audit(IoArgs),
    /// Realize one source path in the target and compare with the optimum
    Realize(RealizeArgs),
    /// Sample walks and aggregate realized/optimal length ratios
    Distortion(DistortionArgs),
    /// Check the path-metric lower bound on a fresh embedding of P_n
    Lowerbound(LowerboundArgs),
    /// Group Steiner tree pipeline
    #[command(subcommand)]
    Gst(GstCmd),
    /// Metrical task system pipeline
    #[command(subcommand)]
    Mts(MtsCmd),
    /// Random tree embeddings and their union
    #[command(subcommand)]
    Prob(ProbCmd),
}

#[derive(Args)]
struct GenArgs {
    /// One of: path, cycle, hypercube, random-regular, random-metric
    #[arg(long)]
    kind: String,
    /// Vertex count (path, cycle, random-regular, random-metric)
    #[arg(long)]
    n: Option<usize>,
    /// Dimension (hypercube)
    #[arg(long)]
    h: Option<u32>,
    /// Degree (random-regular)
    #[arg(long, default_value_t = 3)]
    deg: usize,
    /// Seed; required for the random kinds
    #[arg(long)]
    seed: Option<u64>,
    /// Emit the graph itself as TSV instead of its shortest-path metric
    #[arg(long)]
    graph: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Deterministic low-distortion ultrametric of size <= n^beta
    Ultra {
        #[arg(short, long)]
        input: PathBuf,
        /// Distortion/size trade-off knob (>= 1)
        #[arg(long)]
        t: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Star of all length-s walks of a graph (input must be a .tsv graph)
    Star {
        #[arg(short, long)]
        input: PathBuf,
        /// Walk length in edges
        #[arg(long)]
        s: usize,
        /// Refuse stars larger than this many nodes
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Union of seeded random tree embeddings under a fresh root
    Prob {
        #[arg(short, long)]
        input: PathBuf,
        /// Comma-separated sample seeds, one tree each
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IoArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RealizeArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Comma-separated source point indices of the walk
    #[arg(long, value_delimiter = ',', required = true)]
    path: Vec<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DistortionArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Points per sampled walk
    #[arg(long, default_value_t = 16)]
    walk_len: usize,
    /// Worker threads; results are identical for every value
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the per-trial table to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct LowerboundArgs {
    /// Path length: the source is the unit path metric P_n
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    t: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GstCmd {
    /// Rewrite groups over the target points of an embedding
    Reduce {
        #[arg(short, long)]
        input: PathBuf,
        /// Embedding whose fibers define the rewrite
        #[arg(long)]
        embedding: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Embed, solve on the target, project the solution back
    Solve {
        #[arg(short, long)]
        input: PathBuf,
        /// Target kind: ultra or star
        #[arg(long)]
        via: String,
        /// Trade-off knob for --via ultra
        #[arg(long)]
        t: Option<u32>,
        /// Walk length for --via star (instance must be graph-backed)
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        /// Use the greedy covering solver on the star instead of the exact one
        #[arg(long)]
        greedy: bool,
        /// Also run the exact oracle and report the approximation ratio
        #[arg(long)]
        oracle: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact optimum by exhaustive representative enumeration
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        /// Refuse instances with more representative tuples than this
        #[arg(long, default_value_t = ORACLE_BUDGET)]
        budget: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MtsCmd {
    /// Reduce onto a fresh ultrametric embedding and compare all four costs
    Run {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProbCmd {
    /// One random tree embedding
    Sample {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Union of seeded samples under a fresh root
    Union {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Bookkeeping for one invocation: inputs/outputs/params feed the manifest.
struct Run {
    argv: Vec<String>,
    params: BTreeMap<String, String>,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a [String],
    params: &'a BTreeMap<String, String>,
    seeds: &'a [u64],
    inputs: &'a [String],
    outputs: &'a [String],
    version: &'static str,
    wall_ms: u128,
}

impl Run {
    fn new() -> Self {
        Run {
            argv: std::env::args().collect(),
            params: BTreeMap::new(),
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    fn read_input(&mut self, path: &Path) -> anyhow::Result<String> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(path.display().to_string());
        Ok(text)
    }

    /// Writes to the file when given, stdout otherwise; file contents always
    /// end in a newline.
    fn emit(&mut self, out: Option<&Path>, content: &str) -> anyhow::Result<()> {
        match out {
            Some(path) => {
                let mut owned = content.to_string();
                if !owned.ends_with('\n') {
                    owned.push('\n');
                }
                std::fs::write(path, owned)
                    .with_context(|| format!("writing {}", path.display()))?;
                self.outputs.push(path.display().to_string());
            }
            None if content.ends_with('\n') => print!("{content}"),
            None => println!("{content}"),
        }
        Ok(())
    }

    /// Manifest sidecar next to the first file output; stdout-only runs
    /// leave nothing to reproduce, so they get no manifest.
    fn finish(self) -> anyhow::Result<()> {
        let Some(first) = self.outputs.first() else {
            return Ok(());
        };
        let manifest = RunManifest {
            command: &self.argv,
            params: &self.params,
            seeds: &self.seeds,
            inputs: &self.inputs,
            outputs: &self.outputs,
            version: env!("CARGO_PKG_VERSION"),
            wall_ms: self.started.elapsed().as_millis(),
        };
        let path = format!("{first}.manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {path}"))?;
        Ok(())
    }
}

fn is_tsv(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("tsv")
}

/// Reads a source space: `.tsv` is a graph (closed into its metric),
/// anything else a metric JSON file.
fn read_metric(run: &mut Run, path: &Path) -> anyhow::Result<MetricSpace> {
    let text = run.read_input(path)?;
    if is_tsv(path) {
        Ok(from_graph(&graph_from_tsv(&text)?)?)
    } else {
        Ok(metric_from_json(&text)?)
    }
}

fn read_embedding(run: &mut Run, path: &Path) -> anyhow::Result<MultiEmbedding> {
    let text = run.read_input(path)?;
    Ok(embedding_from_json(&text)?)
}

#[derive(Serialize)]
struct NoncontractionReport {
    checked_pairs: usize,
    violations: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct RealizeReport {
    source_length: f64,
    /// Worst-case realized/source ratio guaranteed by the construction;
    /// absent for targets without a realization routine.
    ratio_bound: Option<f64>,
    realized: Option<RepPath>,
    optimal: RepPath,
    bound_ok: bool,
}

#[derive(Serialize)]
struct GstReport {
    via: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    greedy: bool,
    target_cost: f64,
    projected: SteinerSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    approx_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio_ok: Option<bool>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    let mut run = Run::new();
    let code = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(&mut run, args)?,
        Cmd::Embed(cmd) => cmd_embed(&mut run, cmd)?,
        Cmd::Audit(args) => cmd_audit(&mut run, args)?,
        Cmd::Realize(args) => cmd_realize(&mut run, args)?,
        Cmd::Distortion(args) => cmd_distortion(&mut run, args)?,
        Cmd::Lowerbound(args) => cmd_lowerbound(&mut run, args)?,
        Cmd::Gst(cmd) => cmd_gst(&mut run, cmd)?,
        Cmd::Mts(cmd) => cmd_mts(&mut run, cmd)?,
        Cmd::Prob(cmd) => cmd_prob(&mut run, cmd)?,
    };
    run.finish()?;
    Ok(code)
}

fn require<T: Copy>(v: Option<T>, what: &str, kind: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!("--{what} is required for kind {kind}"))
}

fn cmd_gen(run: &mut Run, args: GenArgs) -> anyhow::Result<u8> {
    let kind = args.kind.as_str();
    let spec = match kind {
        "path" => GenSpec::Path {
            n: require(args.n, "n", kind)?,
        },
        "cycle" => GenSpec::Cycle {
            n: require(args.n, "n", kind)?,
        },
        "hypercube" => GenSpec::Hypercube {
            h: require(args.h, "h", kind)?,
        },
        "random-regular" => GenSpec::RandomRegular {
            n: require(args.n, "n", kind)?,
            deg: args.deg,
        },
        "random-metric" => GenSpec::RandomMetric {
            n: require(args.n, "n", kind)?,
        },
        other => {
            bail!("unknown kind {other:?} (path, cycle, hypercube, random-regular, random-metric)")
        }
    };
    let random = matches!(kind, "random-regular" | "random-metric");
    let seed = if random {
        let s = args
            .seed
            .ok_or_else(|| anyhow!("--seed is required for kind {kind}"))?;
        run.seeds.push(s);
        s
    } else {
        args.seed.unwrap_or(0)
    };
    run.param("kind", kind);
    if let Some(n) = args.n {
        run.param("n", n);
    }
    if let Some(h) = args.h {
        run.param("h", h);
    }
    if kind == "random-regular" {
        run.param("deg", args.deg);
    }

    let generated = generate(&spec, seed)?;
    let want_graph = args.graph || args.output.as_deref().is_some_and(is_tsv);
    let content = if want_graph {
        match &generated {
            Generated::Graph(g) => graph_to_tsv(g),
            Generated::Metric(_) => bail!("kind {kind} has no graph form; drop --graph"),
        }
    } else {
        metric_to_json(&generated.metric()?)?
    };
    run.emit(args.output.as_deref(), &content)?;
    Ok(0)
}

fn cmd_embed(run: &mut Run, cmd: EmbedCmd) -> anyhow::Result<u8> {
    match cmd {
        EmbedCmd::Ultra { input, t, output } => {
            run.param("t", t);
            let m = read_metric(run, &input)?;
            let me = build_ultrametric_embedding(&m, t)?;
            run.emit(output.as_deref(), &embedding_to_json(&me)?)?;
        }
        EmbedCmd::Star {
            input,
            s,
            node_budget,
            output,
        } => {
            run.param("s", s);
            run.param("node_budget", node_budget);
            if !is_tsv(&input) {
                bail!("star embeddings need graph input (a .tsv file)");
            }
            let text = run.read_input(&input)?;
            let g = graph_from_tsv(&text)?;
            let me = build_path_star(&g, s, node_budget)?;
            run.emit(output.as_deref(), &embedding_to_json(&me)?)?;
        }
        EmbedCmd::Prob {
            input,
            seeds,
            output,
        } => {
            run.seeds = seeds.clone();
            let m = read_metric(run, &input)?;
            let me = union_under_root(&sample_ensemble(&m, &seeds)?)?;
            run.emit(output.as_deref(), &embedding_to_json(&me)?)?;
        }
    }
    Ok(0)
}

fn cmd_audit(run: &mut Run, args: IoArgs) -> anyhow::Result<u8> {
    let me = read_embedding(run, &args.input)?;
    let (content, clean) = match me.params {
        EmbedParams::Ultra { .. } => {
            let report = audit_embedding(&me)?;
            (serde_json::to_string(&report)?, report.is_clean())
        }
        // Star and union targets carry no construction trace to re-derive;
        // the audit reduces to the non-contraction certificate.
        _ => {
            let (violations, checked_pairs) = noncontraction_violations(&me)?;
            let clean = violations.is_empty();
            let report = NoncontractionReport {
                checked_pairs,
                violations,
            };
            (serde_json::to_string(&report)?, clean)
        }
    };
    run.emit(args.output.as_deref(), &content)?;
    Ok(if clean { 0 } else { 1 })
}

fn cmd_realize(run: &mut Run, args: RealizeArgs) -> anyhow::Result<u8> {
    let me = read_embedding(run, &args.input)?;
    run.param(
        "path",
        args.path
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    let p = PointPath::new(args.path, me.source.n())?;
    let source_length = p.length(&me.source);
    let optimal = optimal_rep_path(&me, &p)?;

    let (realized, ratio_bound, bound_applies) = match me.params {
        EmbedParams::Ultra { t, .. } => (
            Some(realize_path(&me, &p, t)?),
            Some(realization_bound(&me)?),
            true,
        ),
        EmbedParams::Star { s, delta } => {
            let edges = p.seq.len() - 1;
            // The guarantee covers walks of at least s edges.
            (
                Some(realize_in_star(&me, &p)?),
                Some(2.0 + delta / s as f64),
                edges >= s,
            )
        }
        EmbedParams::Union { .. } => (None, None, false),
    };
    let bound_ok = match (&realized, ratio_bound) {
        (Some(r), Some(b)) if bound_applies => le_tol(r.length, b * source_length),
        _ => true,
    };
    let report = RealizeReport {
        source_length,
        ratio_bound,
        realized,
        optimal,
        bound_ok,
    };
    run.emit(args.output.as_deref(), &serde_json::to_string(&report)?)?;
    Ok(if bound_ok { 0 } else { 1 })
}

fn cmd_distortion(run: &mut Run, args: DistortionArgs) -> anyhow::Result<u8> {
    run.seeds.push(args.seed);
    run.param("trials", args.trials);
    run.param("walk_len", args.walk_len);
    run.param("jobs", args.jobs);
    let me = read_embedding(run, &args.input)?;
    let stats = distortion_stats_jobs(&me, args.walk_len, args.trials, args.seed, args.jobs)?;
    run.emit(args.output.as_deref(), &stats_to_json(&stats)?)?;
    if let Some(csv) = &args.csv {
        run.emit(Some(csv), &trials_to_csv(&stats))?;
    }
    Ok(if stats.violations == 0 { 0 } else { 1 })
}

fn cmd_lowerbound(run: &mut Run, args: LowerboundArgs) -> anyhow::Result<u8> {
    run.param("n", args.n);
    run.param("t", args.t);
    let m = generate(&GenSpec::Path { n: args.n }, 0)?.metric()?;
    let me = build_ultrametric_embedding(&m, args.t)?;
    let report = lower_bound_check(&me)?;
    run.emit(args.output.as_deref(), &serde_json::to_string(&report)?)?;
    Ok(if report.holds { 0 } else { 1 })
}

fn cmd_gst(run: &mut Run, cmd: GstCmd) -> anyhow::Result<u8> {
    match cmd {
        GstCmd::Reduce {
            input,
            embedding,
            output,
        } => {
            let inst = gst_from_json(&run.read_input(&input)?)?;
            let me = read_embedding(run, &embedding)?;
            let reduced = reduce_gst(&me, &inst)?;
            run.emit(output.as_deref(), &serde_json::to_string(&reduced)?)?;
            Ok(0)
        }
        GstCmd::Oracle {
            input,
            budget,
            output,
        } => {
            run.param("budget", budget);
            let inst = gst_from_json(&run.read_input(&input)?)?;
            let sol = exact_oracle(&inst, budget)?;
            run.emit(output.as_deref(), &solution_to_json(&sol)?)?;
            Ok(0)
        }
        GstCmd::Solve {
            input,
            via,
            t,
            s,
            node_budget,
            greedy,
            oracle,
            output,
        } => {
            let inst = gst_from_json(&run.read_input(&input)?)?;
            run.param("via", &via);
            let (me, approx_bound) = match via.as_str() {
                "ultra" => {
                    let t = t.ok_or_else(|| anyhow!("--t is required for --via ultra"))?;
                    run.param("t", t);
                    let me = build_ultrametric_embedding(inst.metric(), t)?;
                    // Tree edges expand to metric paths, at most doubling the
                    // cost on top of the embedding's path distortion.
                    let bound = 2.0 * realization_bound(&me)?;
                    (me, Some(bound))
                }
                "star" => {
                    let s = s.ok_or_else(|| anyhow!("--s is required for --via star"))?;
                    run.param("s", s);
                    let GstSpace::Graph(g) = inst.space() else {
                        bail!("--via star needs a graph-backed instance (.tsv space)");
                    };
                    (build_path_star(g, s, node_budget)?, None)
                }
                other => bail!("unknown --via {other:?} (ultra or star)"),
            };
            let reduced = reduce_gst(&me, &inst)?;
            let target_sol = if greedy {
                let star = me
                    .target
                    .as_star()
                    .ok_or_else(|| anyhow!("--greedy applies only to --via star"))?;
                greedy_star_solver(star, &reduced.groups)?
            } else {
                solve_tree_exact(&me.target, &reduced.groups, GROUP_BUDGET)?
            };
            let projected = project_solution(&me, &inst, &target_sol)?;

            let (oracle_cost, ratio, ratio_ok) = if oracle {
                let os = exact_oracle(&inst, ORACLE_BUDGET)?;
                let ratio = if os.cost > 0.0 {
                    projected.cost / os.cost
                } else if projected.cost <= multiembed::REL_TOL {
                    1.0
                } else {
                    f64::INFINITY
                };
                let ok = approx_bound.map(|b| le_tol(projected.cost, b * os.cost));
                (Some(os.cost), Some(ratio), ok)
            } else {
                (None, None, None)
            };
            let report = GstReport {
                via,
                t,
                s,
                greedy,
                target_cost: target_sol.cost,
                projected,
                approx_bound,
                oracle_cost,
                ratio,
                ratio_ok,
            };
            run.emit(output.as_deref(), &serde_json::to_string(&report)?)?;
            Ok(if ratio_ok == Some(false) { 1 } else { 0 })
        }
    }
}

fn cmd_mts(run: &mut Run, cmd: MtsCmd) -> anyhow::Result<u8> {
    let MtsCmd::Run { input, t, output } = cmd;
    run.param("t", t);
    let inst = mts_from_json(&run.read_input(&input)?)?;
    let me = build_ultrametric_embedding(inst.space(), t)?;
    let report = run_experiment(&me, &inst)?;
    run.emit(output.as_deref(), &serde_json::to_string(&report)?)?;
    Ok(if report.opt_ok && report.pullback_ok {
        0
    } else {
        1
    })
}

fn cmd_prob(run: &mut Run, cmd: ProbCmd) -> anyhow::Result<u8> {
    match cmd {
        ProbCmd::Sample {
            input,
            seed,
            output,
        } => {
            run.seeds.push(seed);
            let m = read_metric(run, &input)?;
            let tree = sample_tree_embedding(&m, seed)?;
            run.emit(output.as_deref(), &tree_to_json(&tree)?)?;
        }
        ProbCmd::Union {
            input,
            seeds,
            output,
        } => {
            run.seeds = seeds.clone();
            let m = read_metric(run, &input)?;
            let me = union_under_root(&sample_ensemble(&m, &seeds)?)?;
            run.emit(output.as_deref(), &embedding_to_json(&me)?)?;
        }
    }
    Ok(0)
}
