//! Hypothesis estimators over a sampled subgraph or the whole graph.
//!
//! * Node hypotheses: mean over relevant nodes. Samples from edge-biased
//!   samplers are reweighted by `deg_S(v) / deg(v)` (each induced edge
//!   contributes `1/deg` at both endpoints), which is exact once the sample
//!   covers the graph. Node samplers use the plain mean.
//! * Edge hypotheses: mean over relevant induced edges, oriented as in the pattern.
//! * Path hypotheses: mean over relevant simple path instances inside the
//!   induced subgraph, streamed without materializing the instances.
//!
//! All sums are exact, so results do not depend on enumeration order or on
//! how the work is split across threads.

mod paths;
mod relevant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeId, NodeId};
use crate::hypothesis::{Aggregate, BoundHypothesis};
use crate::par::Execution;
use crate::sampler::SamplerFamily;
use crate::subgraph::SampledSubgraph;
use crate::sum::ExactSum;

pub use paths::enumerate_paths;
pub use relevant::{relevant_edges, relevant_nodes};

/// Where relevant elements are looked up.
#[derive(Debug, Clone, Copy)]
pub enum Scope<'a> {
    /// The whole graph: exact ground truth.
    Full,
    Sample(&'a SampledSubgraph),
}

impl<'a> Scope<'a> {
    pub(crate) fn membership(&self) -> Option<&'a [bool]> {
        match self {
            Scope::Full => None,
            Scope::Sample(s) => Some(s.membership()),
        }
    }

    #[inline]
    pub(crate) fn contains(member: Option<&[bool]>, v: NodeId) -> bool {
        member.is_none_or(|m| m[v as usize])
    }
}

/// Weights for node hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum NodeWeighting {
    /// Plain mean for node samplers and the full graph, induced-edge weights otherwise.
    #[default]
    Auto,
    Uniform,
    /// `deg_S(v) / deg(v)` from the induced subgraph; isolated nodes weigh 1.
    InducedEdges,
    /// `1/deg(v_i)` summed over the traversal sequence.
    Traversal,
    /// Traversal numerator divided by the raw count of relevant traversal entries.
    TraversalLiteral,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    /// Maximum number of relevant path instances before enumeration fails.
    pub path_limit: u64,
    pub node_weighting: NodeWeighting,
    /// Keep per-element values in [`Estimate::contributions`].
    pub contributions: bool,
    pub execution: Execution,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            path_limit: 100_000_000,
            node_weighting: NodeWeighting::Auto,
            contributions: false,
            execution: Execution::Auto,
        }
    }
}

/// One relevant element: a node, an edge or a path instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub agg: Aggregate,
    /// `None` when nothing relevant was found.
    pub value: Option<f64>,
    /// Relevant elements with positive weight.
    pub n_relevant: usize,
    /// `(Σw)² / Σw²`; equals `n_relevant` for unweighted estimates.
    pub n_effective: f64,
    /// Variance of the contributions, bias-corrected with `n_effective`; `None` below two elements.
    pub weighted_variance: Option<f64>,
    pub inconclusive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contributions: Option<Vec<Contribution>>,
}

/// Streaming weighted moments with exact sums.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    n: u64,
    sw: ExactSum,
    sw2: ExactSum,
    swx: ExactSum,
    swx2: ExactSum,
    min: Option<f64>,
    max: Option<f64>,
    /// Numerator of the literal traversal estimator.
    literal: Option<ExactSum>,
    contributions: Option<Vec<Contribution>>,
}

impl Accumulator {
    pub(crate) fn new(keep: bool) -> Self {
        Self {
            contributions: keep.then(Vec::new),
            ..Self::default()
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        self.n += 1;
        self.sw.add(w);
        self.sw2.add(w * w);
        self.swx.add(w * x);
        self.swx2.add(w * x * x);
        self.min = Some(self.min.map_or(x, |m| m.min(x)));
        self.max = Some(self.max.map_or(x, |m| m.max(x)));
    }

    pub(crate) fn push_element(&mut self, x: f64, w: f64, nodes: &[NodeId], edges: &[EdgeId]) {
        self.push(x, w);
        if w > 0.0 {
            if let Some(c) = &mut self.contributions {
                c.push(Contribution {
                    nodes: nodes.to_vec(),
                    edges: edges.to_vec(),
                    value: x,
                    weight: w,
                });
            }
        }
    }

    pub(crate) fn merge(&mut self, other: Accumulator) {
        self.n += other.n;
        self.sw.merge(&other.sw);
        self.sw2.merge(&other.sw2);
        self.swx.merge(&other.swx);
        self.swx2.merge(&other.swx2);
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = match (self.max, other.max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        if let (Some(mine), Some(theirs)) = (&mut self.contributions, other.contributions) {
            mine.extend(theirs);
        }
    }

    pub(crate) fn finish(self, agg: Aggregate) -> Estimate {
        let n = self.n as usize;
        if n == 0 {
            return Estimate {
                agg,
                value: None,
                n_relevant: 0,
                n_effective: 0.0,
                weighted_variance: None,
                inconclusive: true,
                contributions: self.contributions,
            };
        }
        let sw = self.sw.value();
        let sw2 = self.sw2.value();
        let mean = self.swx.value() / sw;
        let n_eff = if sw2 > 0.0 { sw * sw / sw2 } else { n as f64 };
        // Σw(x-θ)² = Σwx² - 2θΣwx + θ²Σw
        let mut ss = ExactSum::new();
        ss.add(self.swx2.value());
        ss.add(-2.0 * mean * self.swx.value());
        ss.add(mean * mean * sw);
        let biased = (ss.value() / sw).max(0.0);
        let variance = (n >= 2 && n_eff > 1.0).then(|| biased * n_eff / (n_eff - 1.0));
        let value = match agg {
            Aggregate::Avg => match &self.literal {
                Some(num) => num.value() / n as f64,
                None => mean,
            },
            Aggregate::Min => self.min.expect("n > 0"),
            Aggregate::Max => self.max.expect("n > 0"),
        };
        Estimate {
            agg,
            value: Some(value),
            n_relevant: n,
            n_effective: n_eff,
            weighted_variance: variance,
            inconclusive: false,
            contributions: self.contributions,
        }
    }
}

fn node_weighting(scope: Scope<'_>, requested: NodeWeighting) -> NodeWeighting {
    match (requested, scope) {
        (NodeWeighting::Auto, Scope::Full) => NodeWeighting::Uniform,
        (NodeWeighting::Auto, Scope::Sample(s)) => match s.meta.kind.map(|k| k.family()) {
            None | Some(SamplerFamily::Node) => NodeWeighting::Uniform,
            Some(_) => NodeWeighting::InducedEdges,
        },
        (w, _) => w,
    }
}

/// Estimates the hypothesis aggregate on `scope`.
pub fn estimate(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    options: &EstimateOptions,
) -> Result<Estimate> {
    match h.len() {
        0 => estimate_node(g, h, scope, options),
        1 => estimate_edge(g, h, scope, options),
        _ => estimate_path(g, h, scope, options),
    }
}

pub fn estimate_node(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    options: &EstimateOptions,
) -> Result<Estimate> {
    if h.len() != 0 {
        return Err(Error::Eval(
            "node estimator needs a pattern of length 0".into(),
        ));
    }
    let agg = h.hypothesis.agg;
    let mut acc = Accumulator::new(options.contributions);
    let value_of = |v: NodeId| -> Result<Option<f64>> {
        if !h.step_matches(g, 0, v) {
            return Ok(None);
        }
        relevant::eval_or_skip(g, h, &[v], &[])
    };
    match node_weighting(scope, options.node_weighting) {
        NodeWeighting::Uniform | NodeWeighting::Auto => {
            let mut each = |v: NodeId| -> Result<()> {
                if let Some(x) = value_of(v)? {
                    acc.push_element(x, 1.0, &[v], &[]);
                }
                Ok(())
            };
            match scope {
                Scope::Full => g
                    .nodes_of_type(h.steps[0].type_id)
                    .iter()
                    .try_for_each(|&v| each(v))?,
                Scope::Sample(s) => s.nodes().iter().try_for_each(|&v| each(v))?,
            }
        }
        NodeWeighting::InducedEdges => {
            let member = scope.membership();
            let nodes: Vec<NodeId> = match scope {
                Scope::Full => g.nodes_of_type(h.steps[0].type_id).to_vec(),
                Scope::Sample(s) => s.nodes().to_vec(),
            };
            for v in nodes {
                let Some(x) = value_of(v)? else { continue };
                let deg = g.degree(v);
                // An isolated node has nothing left unobserved.
                let w = if deg == 0 {
                    1.0
                } else {
                    let induced = g
                        .adjacency(v)
                        .iter()
                        .filter(|a| Scope::contains(member, a.neighbor))
                        .count();
                    induced as f64 / deg as f64
                };
                acc.push_element(x, w, &[v], &[]);
            }
        }
        w @ (NodeWeighting::Traversal | NodeWeighting::TraversalLiteral) => {
            let Scope::Sample(s) = scope else {
                return Err(Error::Eval("traversal weighting needs a sample".into()));
            };
            let mut literal = ExactSum::new();
            for t in &s.traversal {
                let v = t.to;
                let Some(x) = value_of(v)? else { continue };
                let inv = 1.0 / g.degree(v) as f64;
                literal.add(x * inv);
                acc.push_element(x, inv, &[v], &[]);
            }
            if w == NodeWeighting::TraversalLiteral {
                acc.literal = Some(literal);
            }
        }
    }
    Ok(acc.finish(agg))
}

pub fn estimate_edge(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    options: &EstimateOptions,
) -> Result<Estimate> {
    if h.len() != 1 {
        return Err(Error::Eval(
            "edge estimator needs a pattern of length 1".into(),
        ));
    }
    let mut acc = Accumulator::new(options.contributions);
    relevant::for_each_relevant_edge(g, h, scope, |v1, v2, e, x| {
        acc.push_element(x, 1.0, &[v1, v2], &[e]);
    })?;
    Ok(acc.finish(h.hypothesis.agg))
}

pub fn estimate_path(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    options: &EstimateOptions,
) -> Result<Estimate> {
    if h.is_empty() {
        return Err(Error::Eval(
            "path estimator needs a pattern of length at least 1".into(),
        ));
    }
    let acc = paths::aggregate_paths(g, h, scope, options)?;
    Ok(acc.finish(h.hypothesis.agg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_moments() {
        let mut acc = Accumulator::new(false);
        for x in [60.0, 61.0, 59.0, 60.0] {
            acc.push(x, 1.0);
        }
        let e = acc.finish(Aggregate::Avg);
        assert_eq!(e.value, Some(60.0));
        assert_eq!(e.n_effective, 4.0);
        assert!((e.weighted_variance.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn extrema_and_empty() {
        let mut acc = Accumulator::new(false);
        for x in [5.0, 2.0, 9.0] {
            acc.push(x, 1.0);
        }
        assert_eq!(acc.clone().finish(Aggregate::Min).value, Some(2.0));
        assert_eq!(acc.finish(Aggregate::Max).value, Some(9.0));
        let e = Accumulator::new(false).finish(Aggregate::Avg);
        assert!(e.inconclusive && e.value.is_none());
    }

    #[test]
    fn weighted_mean_and_ess() {
        let mut acc = Accumulator::new(false);
        acc.push(1.0, 1.0);
        acc.push(3.0, 3.0);
        acc.push(100.0, 0.0);
        let e = acc.finish(Aggregate::Avg);
        assert_eq!(e.value, Some(2.5));
        assert_eq!(e.n_relevant, 2);
        assert!((e.n_effective - 1.6).abs() < 1e-12);
    }

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin() * 1e6).collect();
        let mut one = Accumulator::new(false);
        xs.iter().for_each(|&x| one.push(x, 1.0));
        let mut a = Accumulator::new(false);
        let mut b = Accumulator::new(false);
        xs[..37].iter().for_each(|&x| b.push(x, 1.0));
        xs[37..].iter().for_each(|&x| a.push(x, 1.0));
        a.merge(b);
        assert_eq!(one.finish(Aggregate::Avg), a.finish(Aggregate::Avg));
    }
}
