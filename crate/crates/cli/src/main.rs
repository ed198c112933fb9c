use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphhypo::bench::{
    format_summary, generate_graph, ground_truth, stable_proportions, write_rows, write_summary,
    BenchConfig, SynthConfig,
};
use graphhypo::estimate::Contribution;
use graphhypo::graph::{load_graph, save_graph, LoadOptions};
use graphhypo::par::Execution;
use graphhypo::stats::DEFAULT_ALPHA;
use graphhypo::{
    decide, estimate, parse_hypothesis, run_sampler, AttributedGraph, BoundHypothesis, Error,
    EstimateOptions, NodeWeighting, SamplerKind, SamplerSpec, Scope, TestResult,
};
use serde::Serialize;

const DEFAULT_SEED: u64 = 42;

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "graphhypo",
    version,
    about = "Hypothesis testing on attributed graphs by sampling"
)]
struct Cli {
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, env = "GRAPHHYPO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a graph and report counts per type.
    Validate(GraphArgs),
    /// Exact aggregate and verdict on the whole graph.
    Truth {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        hypothesis: HypothesisArgs,
        #[arg(long, default_value_t = 100_000_000)]
        path_limit: u64,
    },
    /// Sample, estimate and test one hypothesis.
    Test(TestArgs),
    /// Run a benchmark described by a TOML file.
    Bench(BenchArgs),
    /// Generate a synthetic graph.
    Gen(GenArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Directory holding schema.json, nodes.tsv and edges.tsv.
    #[arg(long, required_unless_present_all = ["schema", "nodes", "edges"])]
    graph: Option<PathBuf>,
    #[arg(long, conflicts_with = "graph")]
    schema: Option<PathBuf>,
    #[arg(long, conflicts_with = "graph")]
    nodes: Option<PathBuf>,
    #[arg(long, conflicts_with = "graph")]
    edges: Option<PathBuf>,
    /// Accept nodes without incident edges.
    #[arg(long)]
    allow_isolated: bool,
}

impl GraphArgs {
    fn paths(&self) -> (PathBuf, PathBuf, PathBuf) {
        let pick = |explicit: &Option<PathBuf>, name: &str| {
            explicit
                .clone()
                .unwrap_or_else(|| self.graph.as_deref().unwrap_or(Path::new(".")).join(name))
        };
        (
            pick(&self.schema, "schema.json"),
            pick(&self.nodes, "nodes.tsv"),
            pick(&self.edges, "edges.tsv"),
        )
    }

    fn load(&self) -> graphhypo::Result<AttributedGraph> {
        let (schema, nodes, edges) = self.paths();
        load_graph(
            &schema,
            &nodes,
            &edges,
            LoadOptions {
                allow_isolated: self.allow_isolated,
            },
        )
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct HypothesisArgs {
    /// Hypothesis text, e.g. "avg(paper.citations | paper[year>=2015]) > 30".
    #[arg(long)]
    hypothesis: Option<String>,
    #[arg(long)]
    hypothesis_file: Option<PathBuf>,
}

impl HypothesisArgs {
    fn bind(&self, g: &AttributedGraph) -> graphhypo::Result<BoundHypothesis> {
        let text = match (&self.hypothesis, &self.hypothesis_file) {
            (Some(t), _) => t.clone(),
            (None, Some(p)) => read_text(p)?,
            (None, None) => unreachable!("clap requires one"),
        };
        let h = parse_hypothesis(text.trim())?;
        BoundHypothesis::new(&h, g)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Weighting {
    Auto,
    Uniform,
    Induced,
    Traversal,
    Literal,
}

impl From<Weighting> for NodeWeighting {
    fn from(w: Weighting) -> Self {
        match w {
            Weighting::Auto => NodeWeighting::Auto,
            Weighting::Uniform => NodeWeighting::Uniform,
            Weighting::Induced => NodeWeighting::InducedEdges,
            Weighting::Traversal => NodeWeighting::Traversal,
            Weighting::Literal => NodeWeighting::TraversalLiteral,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    hypothesis: HypothesisArgs,
    /// Sampler name, or `ground-truth` to test on the whole graph.
    #[arg(long)]
    sampler: String,
    /// Node budget.
    #[arg(long, conflicts_with = "proportion")]
    budget: Option<usize>,
    /// Budget as a fraction of |V|.
    #[arg(long)]
    proportion: Option<f64>,
    #[arg(long, conflicts_with = "entropy")]
    seed: Option<u64>,
    /// Draw the seed from the operating system; it is reported in the output.
    #[arg(long)]
    entropy: bool,
    /// Sampler parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Significance level for the `significant` field.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Write per-element contributions as CSV.
    #[arg(long)]
    dump_contributions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Weighting::Auto)]
    node_weighting: Weighting,
    #[arg(long, default_value_t = 100_000_000)]
    path_limit: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML benchmark description.
    config: PathBuf,
    /// Row CSV; the summary goes next to it as `<out>.summary.csv`.
    #[arg(long, default_value = "bench.csv")]
    out: PathBuf,
    /// Report the smallest proportion whose accuracy reaches this threshold.
    #[arg(long)]
    stabilize_threshold: Option<f64>,
    /// Consecutive proportions that must stay above the threshold.
    #[arg(long, default_value_t = 2)]
    patience: usize,
}

#[derive(Args)]
struct GenArgs {
    /// Built-in generator preset.
    #[arg(long, value_parser = ["desk", "dense"], required_unless_present = "config")]
    preset: Option<String>,
    /// Generator description (TOML or JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Multiplies node and edge counts of the preset.
    #[arg(long)]
    scale: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("parameter '{k}' needs a number, got '{v}'"))?;
    Ok((k.trim().to_string(), v))
}

fn execution(threads: Option<usize>) -> Execution {
    match threads {
        None | Some(0) => Execution::Auto,
        Some(1) => Execution::Sequential,
        Some(n) => Execution::Parallel { threads: Some(n) },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = execution(cli.threads);
    let code = match cli.command {
        Command::Validate(g) => cmd_validate(&g),
        Command::Truth {
            graph,
            hypothesis,
            path_limit,
        } => cmd_truth(&graph, &hypothesis, path_limit, exec),
        Command::Test(args) => cmd_test(&args, exec),
        Command::Bench(args) => cmd_bench(&args, exec),
        Command::Gen(args) => cmd_gen(&args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn cmd_validate(args: &GraphArgs) -> graphhypo::Result<u8> {
    let g = args.load()?;
    println!("nodes={} edges={}", g.node_count(), g.edge_count());
    let schema = g.schema();
    for (t, decl) in schema.node_types.iter().enumerate() {
        println!("node_type {}={}", decl.name, g.nodes_of_type(t).len());
    }
    let mut per_edge = vec![0usize; schema.edge_types.len()];
    for e in 0..g.edge_count() as u32 {
        per_edge[g.edge_type(e)] += 1;
    }
    for (decl, n) in schema.edge_types.iter().zip(per_edge) {
        println!("edge_type {}={n}", decl.name);
    }
    Ok(EXIT_TRUE)
}

#[derive(Serialize)]
struct TruthJson {
    hypothesis: String,
    theta: f64,
    outcome: bool,
    n_relevant: usize,
}

fn cmd_truth(
    graph: &GraphArgs,
    hyp: &HypothesisArgs,
    path_limit: u64,
    exec: Execution,
) -> graphhypo::Result<u8> {
    let g = graph.load()?;
    let h = hyp.bind(&g)?;
    let opts = EstimateOptions {
        path_limit,
        execution: exec,
        ..EstimateOptions::default()
    };
    let t = ground_truth(&g, &h, &opts)?;
    let out = TruthJson {
        hypothesis: h.hypothesis.to_string(),
        theta: t.theta,
        outcome: t.outcome,
        n_relevant: t.n_relevant,
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(if t.outcome { EXIT_TRUE } else { EXIT_FALSE })
}

#[derive(Serialize)]
struct TestJson {
    outcome: bool,
    p_value: Option<f64>,
    ci: Option<[f64; 2]>,
    estimate: Option<f64>,
    n_relevant: usize,
    inconclusive: bool,
    sampler: String,
    budget: usize,
    seed: u64,
    alpha: f64,
    significant: bool,
}

fn cmd_test(args: &TestArgs, exec: Execution) -> graphhypo::Result<u8> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Config(format!(
            "alpha {} outside (0, 1)",
            args.alpha
        )));
    }
    let g = args.graph.load()?;
    let h = args.hypothesis.bind(&g)?;
    let seed = if args.entropy {
        rand::random::<u64>()
    } else {
        args.seed.unwrap_or(DEFAULT_SEED)
    };
    let opts = EstimateOptions {
        path_limit: args.path_limit,
        node_weighting: args.node_weighting.into(),
        contributions: args.dump_contributions.is_some(),
        execution: exec,
    };
    let ground = matches!(
        args.sampler.to_ascii_lowercase().replace('_', "-").as_str(),
        "ground-truth" | "groundtruth" | "full"
    );
    let (est, sampler, budget) = if ground {
        if !args.params.is_empty() {
            return Err(Error::Config("ground-truth takes no parameters".into()));
        }
        (
            estimate(&g, &h, Scope::Full, &opts)?,
            "ground-truth".to_string(),
            g.node_count(),
        )
    } else {
        let kind: SamplerKind = args.sampler.parse()?;
        let budget = match (args.budget, args.proportion) {
            (Some(b), _) => b,
            (None, Some(p)) if p > 0.0 && p <= 1.0 => {
                ((p * g.node_count() as f64).round() as usize).max(1)
            }
            (None, Some(p)) => return Err(Error::Config(format!("proportion {p} outside (0, 1]"))),
            (None, None) => {
                return Err(Error::Config("--budget or --proportion is required".into()))
            }
        };
        let mut spec = SamplerSpec::new(kind, budget);
        for (k, v) in &args.params {
            spec = spec.with(k, *v);
        }
        if kind.needs_hypothesis() {
            let m = spec.param("m") as usize;
            if budget <= m {
                eprintln!(
                    "warning: budget {budget} <= m={m}; walkers only enter the sample when they move, so the sample is empty or fails"
                );
            }
        }
        let sample = run_sampler(&g, &spec, Some(&h), seed)?;
        (
            estimate(&g, &h, Scope::Sample(&sample), &opts)?,
            kind.name().to_string(),
            budget,
        )
    };
    if let (Some(path), Some(contribs)) = (&args.dump_contributions, &est.contributions) {
        dump_contributions(&g, path, contribs)?;
    }
    let r: TestResult = decide(&est, &h.hypothesis);
    let out = TestJson {
        outcome: r.outcome,
        p_value: r.p_value,
        ci: r.ci.map(|(lo, hi)| [lo, hi]),
        estimate: r.estimate,
        n_relevant: r.n,
        inconclusive: r.inconclusive,
        sampler,
        budget,
        seed,
        alpha: args.alpha,
        significant: r.significant(args.alpha),
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(if r.inconclusive {
        EXIT_INCONCLUSIVE
    } else if r.outcome {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    })
}

fn dump_contributions(
    g: &AttributedGraph,
    path: &Path,
    contribs: &[Contribution],
) -> graphhypo::Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["nodes", "edges", "value", "weight"])?;
    for c in contribs {
        let nodes: Vec<&str> = c.nodes.iter().map(|&v| g.node_key(v)).collect();
        let edges: Vec<String> = c.edges.iter().map(|e| e.to_string()).collect();
        w.write_record([
            nodes.join("|"),
            edges.join("|"),
            c.value.to_string(),
            c.weight.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_text(path: &Path) -> graphhypo::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> graphhypo::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn summary_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".summary.csv");
    out.with_file_name(name)
}

fn cmd_bench(args: &BenchArgs, exec: Execution) -> graphhypo::Result<u8> {
    let text = read_text(&args.config)?;
    let cfg: BenchConfig = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let report = cfg.run(exec)?;
    for f in &report.failures {
        eprintln!("warning: {f}");
    }
    let mut out = create(&args.out)?;
    write_rows(&report.rows, &mut out)?;
    out.flush().map_err(|e| Error::io(&args.out, e))?;
    let spath = summary_path(&args.out);
    let mut sout = create(&spath)?;
    write_summary(&report.summary, &mut sout)?;
    sout.flush().map_err(|e| Error::io(&spath, e))?;
    eprint!("{}", format_summary(&report.summary));
    if let Some(threshold) = args.stabilize_threshold {
        for (h, s, p) in stable_proportions(&report.summary, threshold, args.patience) {
            match p {
                Some(p) => eprintln!("stable: {h} {s} accuracy >= {threshold} from proportion {p}"),
                None => eprintln!(
                    "stable: {h} {s} never reaches accuracy {threshold} for {} proportions",
                    args.patience
                ),
            }
        }
    }
    eprintln!(
        "wrote {} rows to {} and summary to {}",
        report.rows.len(),
        args.out.display(),
        spath.display()
    );
    Ok(EXIT_TRUE)
}

fn cmd_gen(args: &GenArgs) -> graphhypo::Result<u8> {
    let mut cfg = match (&args.preset, &args.config) {
        (Some(p), _) => SynthConfig::preset(p, args.seed)?,
        (None, Some(path)) => {
            let text = read_text(path)?;
            let is_json = path.extension().is_some_and(|e| e == "json");
            if is_json {
                serde_json::from_str(&text)?
            } else {
                toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        }
        (None, None) => unreachable!("clap requires one"),
    };
    if let Some(f) = args.scale {
        if !(f > 0.0) {
            return Err(Error::Config(format!("scale {f} must be positive")));
        }
        cfg = cfg.scaled(f);
    }
    let g = generate_graph(&cfg)?;
    save_graph(&g, &args.out)?;
    eprintln!(
        "nodes={} edges={} written to {}",
        g.node_count(),
        g.edge_count(),
        args.out.display()
    );
    Ok(EXIT_TRUE)
}
