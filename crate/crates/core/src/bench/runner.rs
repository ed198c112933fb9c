use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::fixtures::{desk_hypotheses, HypothesisCase};
use super::synth::{generate_graph, SynthConfig};
use crate::error::{Error, Result};
use crate::estimate::{estimate, EstimateOptions, Scope};
use crate::graph::{load_graph, AttributedGraph, LoadOptions};
use crate::hypothesis::{parse_hypothesis, BoundHypothesis};
use crate::par::{map_indexed, Execution};
use crate::sampler::{run_sampler, SamplerKind, SamplerSpec};
use crate::stats::{accuracy, decide, TestResult};

pub const CSV_HEADER: &str = "dataset,hypothesis,sampler,proportion,seed,outcome,truth,estimate,abs_error,n_relevant,p_value,ci_low,ci_high,t_sample_s,t_extract_s,t_test_s";

/// SplitMix64 of `master` advanced `i + 1` times: independent replicate seeds
/// that do not depend on scheduling.
pub fn split_seed(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exact aggregate and verdict on the whole graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truth {
    pub theta: f64,
    pub outcome: bool,
    pub n_relevant: usize,
}

pub fn ground_truth(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    options: &EstimateOptions,
) -> Result<Truth> {
    let est = estimate(g, h, Scope::Full, options)?;
    let theta = est.value.ok_or(Error::UndefinedAggregate)?;
    Ok(Truth {
        theta,
        outcome: h.hypothesis.op.holds(theta, h.hypothesis.constant),
        n_relevant: est.n_relevant,
    })
}

/// A sampler kind with parameter overrides; the budget comes from the proportion.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerTemplate {
    pub kind: SamplerKind,
    pub params: BTreeMap<String, f64>,
}

impl SamplerTemplate {
    pub fn new(kind: SamplerKind) -> Self {
        Self {
            kind,
            params: BTreeMap::new(),
        }
    }

    pub fn spec(&self, budget: usize) -> SamplerSpec {
        SamplerSpec {
            kind: self.kind,
            budget,
            params: self.params.clone(),
        }
    }
}

/// `round(p * |V|)` clamped to `1..=|V|`.
pub fn budget_for(g: &AttributedGraph, proportion: f64) -> usize {
    let n = g.node_count();
    ((proportion * n as f64).round() as usize).clamp(1, n.max(1))
}

/// One replicate: sample, extract, estimate, decide.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub result: TestResult,
    pub t_sample_s: f64,
    pub t_extract_s: f64,
    pub t_test_s: f64,
}

impl Replicate {
    pub fn total_time_s(&self) -> f64 {
        self.t_sample_s + self.t_extract_s + self.t_test_s
    }
}

/// Runs one replicate. Estimation is sequential: replicates are the unit of parallelism.
pub fn run_replicate(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    spec: &SamplerSpec,
    seed: u64,
    path_limit: u64,
) -> Result<Replicate> {
    let sample = run_sampler(g, spec, Some(h), seed)?;
    let started = Instant::now();
    let opts = EstimateOptions {
        path_limit,
        execution: Execution::Sequential,
        ..EstimateOptions::default()
    };
    let est = estimate(g, h, Scope::Sample(&sample), &opts)?;
    let t_estimate = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let result = decide(&est, &h.hypothesis);
    let t_test_s = started.elapsed().as_secs_f64();
    Ok(Replicate {
        result,
        t_sample_s: sample.meta.walk_time_s,
        t_extract_s: (sample.meta.wall_time_s - sample.meta.walk_time_s).max(0.0) + t_estimate,
        t_test_s,
    })
}

/// A hypothesis bound to the graph with its ground truth.
#[derive(Debug, Clone)]
pub struct BenchCase {
    pub id: String,
    pub hypothesis: BoundHypothesis,
    pub truth: Truth,
}

impl BenchCase {
    pub fn prepare(
        g: &AttributedGraph,
        case: &HypothesisCase,
        options: &EstimateOptions,
    ) -> Result<Self> {
        let parsed = parse_hypothesis(&case.text)?;
        let hypothesis = BoundHypothesis::new(&parsed, g)?;
        let truth = ground_truth(g, &hypothesis, options)?;
        Ok(Self {
            id: case.id.clone(),
            hypothesis,
            truth,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub hypothesis: String,
    pub sampler: String,
    pub proportion: f64,
    pub seed: u64,
    /// `true`, `false`, `inconclusive` or `error`.
    pub outcome: String,
    pub truth: bool,
    pub estimate: Option<f64>,
    pub abs_error: Option<f64>,
    pub n_relevant: Option<usize>,
    pub p_value: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub t_sample_s: f64,
    pub t_extract_s: f64,
    pub t_test_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub hypothesis: String,
    pub sampler: String,
    pub proportion: f64,
    pub k: usize,
    pub matches: usize,
    pub accuracy: f64,
    pub inconclusive: usize,
    pub errors: usize,
    pub mean_abs_error: Option<f64>,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<SummaryRow>,
    /// Per-row and per-hypothesis failures; the run continues past them.
    pub failures: Vec<String>,
}

pub struct BenchPlan<'a> {
    pub dataset: &'a str,
    pub cases: &'a [BenchCase],
    pub samplers: &'a [SamplerTemplate],
    pub proportions: &'a [f64],
    pub k: usize,
    pub master_seed: u64,
    pub path_limit: u64,
    pub execution: Execution,
}

/// `k` replicates per (hypothesis, sampler, proportion). Rows come back in that
/// nesting order with replicate index innermost, whatever the thread schedule.
pub fn run_benchmark(g: &AttributedGraph, plan: &BenchPlan<'_>) -> BenchReport {
    let mut jobs = Vec::new();
    for (c, _) in plan.cases.iter().enumerate() {
        for (s, _) in plan.samplers.iter().enumerate() {
            for (p, _) in plan.proportions.iter().enumerate() {
                for i in 0..plan.k {
                    jobs.push((c, s, p, i));
                }
            }
        }
    }
    let outputs = map_indexed(plan.execution, jobs.len(), |j| {
        let (c, s, p, i) = jobs[j];
        let case = &plan.cases[c];
        let spec = plan.samplers[s].spec(budget_for(g, plan.proportions[p]));
        let seed = split_seed(plan.master_seed, i as u64);
        (
            seed,
            run_replicate(g, &case.hypothesis, &spec, seed, plan.path_limit),
        )
    });

    let mut report = BenchReport::default();
    let mut group: Vec<(Option<TestResult>, Option<f64>, f64)> = Vec::new();
    for (j, (seed, out)) in outputs.into_iter().enumerate() {
        let (c, s, p, i) = jobs[j];
        let case = &plan.cases[c];
        let sampler = plan.samplers[s].kind.name().to_string();
        let proportion = plan.proportions[p];
        let mut row = BenchRow {
            dataset: plan.dataset.to_string(),
            hypothesis: case.id.clone(),
            sampler: sampler.clone(),
            proportion,
            seed,
            outcome: "error".into(),
            truth: case.truth.outcome,
            estimate: None,
            abs_error: None,
            n_relevant: None,
            p_value: None,
            ci_low: None,
            ci_high: None,
            t_sample_s: 0.0,
            t_extract_s: 0.0,
            t_test_s: 0.0,
        };
        match out {
            Ok(rep) => {
                let r = &rep.result;
                row.outcome = if r.inconclusive {
                    "inconclusive".into()
                } else {
                    r.outcome.to_string()
                };
                row.estimate = r.estimate;
                row.abs_error = r.estimate.map(|x| (x - case.truth.theta).abs());
                row.n_relevant = Some(r.n);
                row.p_value = r.p_value;
                row.ci_low = r.ci.map(|c| c.0);
                row.ci_high = r.ci.map(|c| c.1);
                row.t_sample_s = rep.t_sample_s;
                row.t_extract_s = rep.t_extract_s;
                row.t_test_s = rep.t_test_s;
                group.push((Some(rep.result.clone()), row.abs_error, rep.total_time_s()));
            }
            Err(e) => {
                report.failures.push(format!(
                    "{} {} p={proportion} seed={seed}: {e}",
                    case.id, sampler
                ));
                group.push((None, None, 0.0));
            }
        }
        report.rows.push(row);
        if i + 1 == plan.k {
            report
                .summary
                .push(summarize(plan.dataset, case, &sampler, proportion, &group));
            group.clear();
        }
    }
    report
}

fn summarize(
    dataset: &str,
    case: &BenchCase,
    sampler: &str,
    proportion: f64,
    group: &[(Option<TestResult>, Option<f64>, f64)],
) -> SummaryRow {
    // errored replicates count as inconclusive mismatches
    let results: Vec<TestResult> = group
        .iter()
        .map(|(r, _, _)| {
            r.clone().unwrap_or(TestResult {
                outcome: false,
                p_value: None,
                ci: None,
                estimate: None,
                n: 0,
                n_effective: 0.0,
                inconclusive: true,
            })
        })
        .collect();
    let acc = accuracy(case.truth.outcome, &results);
    let errs: Vec<f64> = group.iter().filter_map(|(_, e, _)| *e).collect();
    SummaryRow {
        dataset: dataset.into(),
        hypothesis: case.id.clone(),
        sampler: sampler.into(),
        proportion,
        k: acc.k,
        matches: acc.matches,
        accuracy: acc.accuracy,
        inconclusive: group
            .iter()
            .filter(|(r, _, _)| r.as_ref().is_some_and(|r| r.inconclusive))
            .count(),
        errors: group.iter().filter(|(r, _, _)| r.is_none()).count(),
        mean_abs_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
        mean_time_s: group.iter().map(|g| g.2).sum::<f64>() / group.len().max(1) as f64,
    }
}

pub fn write_rows<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Fixed-width table of the summary, one line per group.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:<6} {:<14} {:>8} {:>4} {:>8} {:>6} {:>12} {:>10}\n",
        "dataset", "hyp", "sampler", "prop", "k", "accuracy", "inconc", "mean_abs_err", "mean_t_s"
    );
    for r in rows {
        let err = r
            .mean_abs_error
            .map_or("-".to_string(), |e| format!("{e:.4}"));
        s.push_str(&format!(
            "{:<10} {:<6} {:<14} {:>8.4} {:>4} {:>8.3} {:>6} {:>12} {:>10.4}\n",
            r.dataset,
            r.hypothesis,
            r.sampler,
            r.proportion,
            r.k,
            r.accuracy,
            r.inconclusive,
            err,
            r.mean_time_s
        ));
    }
    s
}

/// Smallest proportion from which accuracy stays at or above `threshold` for
/// `patience` consecutive proportions (in increasing order), per hypothesis and sampler.
pub fn stable_proportions(
    summary: &[SummaryRow],
    threshold: f64,
    patience: usize,
) -> Vec<(String, String, Option<f64>)> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in summary {
        let key = (r.hypothesis.clone(), r.sampler.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(h, s)| {
            let mut points: Vec<(f64, f64)> = summary
                .iter()
                .filter(|r| r.hypothesis == h && r.sampler == s)
                .map(|r| (r.proportion, r.accuracy))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let need = patience.max(1);
            let found = (0..points.len())
                .find(|&i| {
                    i + need <= points.len() && points[i..i + need].iter().all(|p| p.1 >= threshold)
                })
                .map(|i| points[i].0);
            (h, s, found)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub proportion: f64,
    pub k: usize,
    /// Replicates that produced an estimate.
    pub conclusive: usize,
    pub mean_abs_error: Option<f64>,
    pub std_abs_error: Option<f64>,
}

/// Estimator error against the truth across budget proportions.
pub fn convergence_curve(
    g: &AttributedGraph,
    case: &BenchCase,
    sampler: &SamplerTemplate,
    proportions: &[f64],
    k: usize,
    master_seed: u64,
    execution: Execution,
) -> Result<Vec<CurvePoint>> {
    let plan = BenchPlan {
        dataset: "",
        cases: std::slice::from_ref(case),
        samplers: std::slice::from_ref(sampler),
        proportions,
        k,
        master_seed,
        path_limit: EstimateOptions::default().path_limit,
        execution,
    };
    let report = run_benchmark(g, &plan);
    if let Some(f) = report.failures.first() {
        return Err(Error::Sampler(f.clone()));
    }
    Ok(report
        .rows
        .chunks(k.max(1))
        .zip(proportions)
        .map(|(rows, &proportion)| {
            let errs: Vec<f64> = rows.iter().filter_map(|r| r.abs_error).collect();
            let n = errs.len();
            let mean = (n > 0).then(|| errs.iter().sum::<f64>() / n as f64);
            let std = mean.filter(|_| n > 1).map(|m| {
                (errs.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            });
            CurvePoint {
                proportion,
                k,
                conclusive: n,
                mean_abs_error: mean,
                std_abs_error: std,
            }
        })
        .collect())
}

pub fn write_curve<W: Write>(points: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Graph source of a benchmark: a preset, an inline generator config, or files.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: Option<String>,
    pub preset: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Multiplies preset node and edge counts.
    pub scale: Option<f64>,
    pub synth: Option<SynthConfig>,
    /// Directory with `schema.json`, `nodes.tsv` and `edges.tsv`.
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub allow_isolated: bool,
}

impl DatasetConfig {
    pub fn load(&self) -> Result<(String, AttributedGraph)> {
        match (&self.preset, &self.synth, &self.dir) {
            (Some(p), None, None) => {
                let mut cfg = SynthConfig::preset(p, self.seed)?;
                if let Some(f) = self.scale {
                    cfg = cfg.scaled(f);
                }
                Ok((
                    self.name.clone().unwrap_or_else(|| p.clone()),
                    generate_graph(&cfg)?,
                ))
            }
            (None, Some(cfg), None) => Ok((
                self.name.clone().unwrap_or_else(|| "synth".into()),
                generate_graph(cfg)?,
            )),
            (None, None, Some(dir)) => {
                let g = load_graph(
                    &dir.join("schema.json"),
                    &dir.join("nodes.tsv"),
                    &dir.join("edges.tsv"),
                    LoadOptions {
                        allow_isolated: self.allow_isolated,
                    },
                )?;
                let name = self.name.clone().unwrap_or_else(|| {
                    dir.file_name()
                        .map_or("graph".into(), |n| n.to_string_lossy().into_owned())
                });
                Ok((name, g))
            }
            _ => Err(Error::Config(
                "dataset needs exactly one of preset, synth or dir".into(),
            )),
        }
    }
}

/// A sampler given by name, or a table with `kind` plus parameter overrides.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SamplerEntry {
    Name(String),
    Spec {
        kind: String,
        #[serde(flatten)]
        params: BTreeMap<String, f64>,
    },
}

impl SamplerEntry {
    pub fn template(&self) -> Result<SamplerTemplate> {
        let (kind, params) = match self {
            SamplerEntry::Name(n) => (n, BTreeMap::new()),
            SamplerEntry::Spec { kind, params } => (kind, params.clone()),
        };
        let kind: SamplerKind = kind.parse()?;
        for name in params.keys() {
            if !kind.params().iter().any(|(p, _)| p == name) {
                return Err(Error::Config(format!(
                    "sampler {kind} has no parameter '{name}'"
                )));
            }
        }
        Ok(SamplerTemplate { kind, params })
    }
}

fn default_k() -> usize {
    30
}

/// Benchmark description, usually read from TOML.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: DatasetConfig,
    /// Defaults to the desk fixture hypotheses.
    #[serde(default)]
    pub hypotheses: Vec<HypothesisCase>,
    pub samplers: Vec<SamplerEntry>,
    pub proportions: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    pub path_limit: Option<u64>,
}

impl BenchConfig {
    /// Loads the graph, computes ground truths and runs every replicate.
    /// Hypotheses without a defined truth are reported and skipped.
    pub fn run(&self, execution: Execution) -> Result<BenchReport> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if let Some(p) = self.proportions.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(Error::Config(format!("proportion {p} outside (0, 1]")));
        }
        let samplers = self
            .samplers
            .iter()
            .map(SamplerEntry::template)
            .collect::<Result<Vec<_>>>()?;
        let (dataset, g) = self.dataset.load()?;
        let hypotheses = if self.hypotheses.is_empty() {
            desk_hypotheses()
        } else {
            self.hypotheses.clone()
        };
        let opts = EstimateOptions {
            path_limit: self
                .path_limit
                .unwrap_or(EstimateOptions::default().path_limit),
            execution,
            ..EstimateOptions::default()
        };
        let mut failures = Vec::new();
        let mut cases = Vec::new();
        for h in &hypotheses {
            match BenchCase::prepare(&g, h, &opts) {
                Ok(c) => cases.push(c),
                Err(e) => failures.push(format!("{}: ground truth failed: {e}", h.id)),
            }
        }
        let plan = BenchPlan {
            dataset: &dataset,
            cases: &cases,
            samplers: &samplers,
            proportions: &self.proportions,
            k: self.k,
            master_seed: self.seed,
            path_limit: opts.path_limit,
            execution,
        };
        let mut report = run_benchmark(&g, &plan);
        failures.append(&mut report.failures);
        report.failures = failures;
        Ok(report)
    }
}
