use super::Scope;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeId, NodeId};
use crate::hypothesis::{BoundHypothesis, Direction, EvalError, PathInstance};

/// Target value, or `None` when an attribute it reads is missing.
#[inline]
pub(crate) fn eval_or_skip(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    nodes: &[NodeId],
    edges: &[EdgeId],
) -> Result<Option<f64>> {
    match h.eval(g, PathInstance { nodes, edges }) {
        Ok(x) => Ok(Some(x)),
        Err(EvalError::MissingAttr) => Ok(None),
        Err(EvalError::DivisionByZero) => Err(Error::Eval(format!(
            "division by zero evaluating target on nodes {nodes:?}"
        ))),
    }
}

/// Nodes in scope that match the single clause of a node hypothesis and carry its target.
pub fn relevant_nodes(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
) -> Result<Vec<NodeId>> {
    let candidates: &[NodeId] = match scope {
        Scope::Full => g.nodes_of_type(h.steps[0].type_id),
        Scope::Sample(s) => s.nodes(),
    };
    let mut out = Vec::new();
    for &v in candidates {
        if h.step_matches(g, 0, v) && eval_or_skip(g, h, &[v], &[])?.is_some() {
            out.push(v);
        }
    }
    Ok(out)
}

/// Calls `f(v1, v2, e, value)` for every relevant induced edge, oriented as in the pattern.
pub(crate) fn for_each_relevant_edge(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    mut f: impl FnMut(NodeId, NodeId, EdgeId, f64),
) -> Result<()> {
    let link = h.links[0];
    let mut visit = |e: EdgeId| -> Result<()> {
        if g.edge_type(e) != link.edge_type {
            return Ok(());
        }
        let (s, d) = g.edge_endpoints(e);
        if s == d {
            return Ok(());
        }
        let (v1, v2) = match link.direction {
            Direction::Forward => (s, d),
            Direction::Backward => (d, s),
        };
        if !h.step_matches(g, 0, v1) || !h.step_matches(g, 1, v2) {
            return Ok(());
        }
        if let Some(x) = eval_or_skip(g, h, &[v1, v2], &[e])? {
            f(v1, v2, e, x);
        }
        Ok(())
    };
    match scope {
        Scope::Full => (0..g.edge_count() as EdgeId).try_for_each(&mut visit),
        Scope::Sample(s) => s.edges().iter().try_for_each(|&e| visit(e)),
    }
}

/// Relevant induced edges as `(v1, v2, edge)` in pattern orientation.
pub fn relevant_edges(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
) -> Result<Vec<(NodeId, NodeId, EdgeId)>> {
    if h.len() != 1 {
        return Err(Error::Eval(
            "relevant_edges needs a pattern of length 1".into(),
        ));
    }
    let mut out = Vec::new();
    for_each_relevant_edge(g, h, scope, |a, b, e, _| out.push((a, b, e)))?;
    Ok(out)
}
