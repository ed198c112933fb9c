use std::sync::atomic::{AtomicU64, Ordering};

use super::relevant::eval_or_skip;
use super::{Accumulator, EstimateOptions, Scope};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeId, NodeId};
use crate::hypothesis::{BoundHypothesis, Direction, PathInstance};
use crate::par::{map_indexed, Execution};

/// Depth-first extension of partial instances from one anchor step.
///
/// Steps are filled in the order `anchor, anchor+1, ..., l, anchor-1, ..., 0`;
/// going left a link is followed against its direction.
struct Walker<'g> {
    g: &'g AttributedGraph,
    h: &'g BoundHypothesis,
    member: Option<&'g [bool]>,
    anchor: usize,
    order: Vec<usize>,
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
}

type Emit<'a> = dyn FnMut(&[NodeId], &[EdgeId]) -> Result<()> + 'a;

impl<'g> Walker<'g> {
    fn new(
        g: &'g AttributedGraph,
        h: &'g BoundHypothesis,
        member: Option<&'g [bool]>,
        anchor: usize,
    ) -> Self {
        let l = h.len();
        let order: Vec<usize> = (anchor..=l).chain((0..anchor).rev()).collect();
        Self {
            g,
            h,
            member,
            anchor,
            order,
            nodes: vec![0; l + 1],
            edges: vec![0; l],
        }
    }

    fn run_from(&mut self, v: NodeId, emit: &mut Emit<'_>) -> Result<()> {
        if !Scope::contains(self.member, v) || !self.h.step_matches(self.g, self.anchor, v) {
            return Ok(());
        }
        self.nodes[self.anchor] = v;
        self.extend(1, emit)
    }

    fn extend(&mut self, depth: usize, emit: &mut Emit<'_>) -> Result<()> {
        if depth == self.order.len() {
            return emit(&self.nodes, &self.edges);
        }
        let g = self.g;
        let j = self.order[depth];
        let (from, link_idx, outgoing) = if j > self.anchor {
            let link = self.h.links[j - 1];
            (
                self.nodes[j - 1],
                j - 1,
                link.direction == Direction::Forward,
            )
        } else {
            let link = self.h.links[j];
            (self.nodes[j + 1], j, link.direction == Direction::Backward)
        };
        let edge_type = self.h.links[link_idx].edge_type;
        for a in g.adjacency(from) {
            if a.outgoing != outgoing || g.edge_type(a.edge) != edge_type {
                continue;
            }
            let w = a.neighbor;
            if !Scope::contains(self.member, w) || !self.h.step_matches(g, j, w) {
                continue;
            }
            if self.order[..depth].iter().any(|&p| self.nodes[p] == w) {
                continue;
            }
            self.nodes[j] = w;
            self.edges[link_idx] = a.edge;
            self.extend(depth + 1, emit)?;
        }
        Ok(())
    }
}

fn scope_candidates(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    step: usize,
) -> Vec<NodeId> {
    match scope {
        Scope::Full => g
            .nodes_of_type(h.steps[step].type_id)
            .iter()
            .copied()
            .filter(|&v| h.step_matches(g, step, v))
            .collect(),
        Scope::Sample(s) => s
            .nodes()
            .iter()
            .copied()
            .filter(|&v| h.step_matches(g, step, v))
            .collect(),
    }
}

/// Clause with the fewest matching nodes in scope; ties go to the earlier step.
fn most_selective(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
) -> (usize, Vec<NodeId>) {
    (0..=h.len())
        .map(|k| (k, scope_candidates(g, h, scope, k)))
        .min_by_key(|(k, c)| (c.len(), *k))
        .expect("at least one clause")
}

/// Streams every simple path instance of the pattern inside `scope` in
/// lexicographic order of `(v1, v2, e1, v3, e2, ...)`. Fails once more than `limit`
/// instances have been produced. Returns the number of instances.
pub fn enumerate_paths(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    limit: u64,
    mut visit: impl FnMut(PathInstance<'_>),
) -> Result<u64> {
    let mut count = 0u64;
    let mut walker = Walker::new(g, h, scope.membership(), 0);
    let mut emit = |nodes: &[NodeId], edges: &[EdgeId]| -> Result<()> {
        count += 1;
        if count > limit {
            return Err(Error::Truncated { limit });
        }
        visit(PathInstance { nodes, edges });
        Ok(())
    };
    for v in scope_candidates(g, h, scope, 0) {
        walker.run_from(v, &mut emit)?;
    }
    Ok(count)
}

/// Aggregates relevant instances, anchored at the most selective clause and
/// split across threads by anchor node.
pub(crate) fn aggregate_paths(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    scope: Scope<'_>,
    options: &EstimateOptions,
) -> Result<Accumulator> {
    let (anchor, starts) = most_selective(g, h, scope);
    let member = scope.membership();
    let limit = options.path_limit;
    let seen = AtomicU64::new(0);
    let chunks = if options.execution.is_parallel() {
        starts.len().clamp(1, 1024)
    } else {
        1
    };
    let per = starts.len().div_ceil(chunks).max(1);
    let run_chunk = |c: usize| -> Result<Accumulator> {
        let mut acc = Accumulator::new(options.contributions);
        let mut walker = Walker::new(g, h, member, anchor);
        let mut local = 0u64;
        let mut emit = |nodes: &[NodeId], edges: &[EdgeId]| -> Result<()> {
            local += 1;
            if local.is_multiple_of(4096) && seen.fetch_add(4096, Ordering::Relaxed) + 4096 > limit {
                return Err(Error::Truncated { limit });
            }
            if let Some(x) = eval_or_skip(g, h, nodes, edges)? {
                acc.push_element(x, 1.0, nodes, edges);
            }
            Ok(())
        };
        let lo = (c * per).min(starts.len());
        let hi = ((c + 1) * per).min(starts.len());
        for &v in &starts[lo..hi] {
            walker.run_from(v, &mut emit)?;
        }
        seen.fetch_add(local % 4096, Ordering::Relaxed);
        Ok(acc)
    };
    let exec = if chunks > 1 {
        options.execution
    } else {
        Execution::Sequential
    };
    let parts = map_indexed(exec, chunks, run_chunk);
    if seen.load(Ordering::Relaxed) > limit {
        return Err(Error::Truncated { limit });
    }
    let mut total = Accumulator::new(options.contributions);
    for part in parts {
        total.merge(part?);
    }
    Ok(total)
}
