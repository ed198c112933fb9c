use rand::seq::index;
use rand::{Rng, SeedableRng};

use super::{start_node, SamplerKind, SamplerRng, SamplerSpec, Visit};
use crate::graph::{Adj, AttributedGraph, NodeId};
use crate::subgraph::Traversal;

const CNARW_MAX_PROPOSALS: usize = 32;

/// Uniform incident edge of `v`.
#[inline]
fn uniform_adj(g: &AttributedGraph, v: NodeId, rng: &mut SamplerRng) -> Option<Adj> {
    let adj = g.adjacency(v);
    (!adj.is_empty()).then(|| adj[rng.random_range(0..adj.len())])
}

/// Uniform incident edge of `v` that does not lead back to `prev`.
fn non_backtracking(
    g: &AttributedGraph,
    v: NodeId,
    prev: Option<NodeId>,
    rng: &mut SamplerRng,
) -> Option<Adj> {
    let Some(prev) = prev else {
        return uniform_adj(g, v, rng);
    };
    let adj = g.adjacency(v);
    for _ in 0..8 {
        let a = uniform_adj(g, v, rng)?;
        if a.neighbor != prev {
            return Some(a);
        }
    }
    let allowed = adj.iter().filter(|a| a.neighbor != prev).count();
    if allowed == 0 {
        return None;
    }
    let pick = rng.random_range(0..allowed);
    adj.iter().filter(|a| a.neighbor != prev).nth(pick).copied()
}

/// Common distinct neighbours of `u` and `v` (merge of sorted adjacency).
fn common_neighbors(g: &AttributedGraph, u: NodeId, v: NodeId) -> usize {
    let mut a = g.neighbor_runs(u).map(|r| r[0].neighbor).peekable();
    let mut b = g.neighbor_runs(v).map(|r| r[0].neighbor).peekable();
    let mut count = 0;
    while let (Some(&x), Some(&y)) = (a.peek(), b.peek()) {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => {
                a.next();
            }
            std::cmp::Ordering::Greater => {
                b.next();
            }
            std::cmp::Ordering::Equal => {
                count += 1;
                a.next();
                b.next();
            }
        }
    }
    count
}

/// One MHRW proposal from `v`; `None` means the walk stays.
#[inline]
fn mh_step(g: &AttributedGraph, v: NodeId, rng: &mut SamplerRng) -> Option<Adj> {
    let a = uniform_adj(g, v, rng)?;
    let ratio = g.degree(v) as f64 / g.degree(a.neighbor) as f64;
    (ratio >= 1.0 || rng.random::<f64>() < ratio).then_some(a)
}

fn cnarw_step(g: &AttributedGraph, v: NodeId, rng: &mut SamplerRng) -> Option<Adj> {
    let mut last = None;
    for _ in 0..CNARW_MAX_PROPOSALS {
        let a = uniform_adj(g, v, rng)?;
        let min_deg = g.distinct_degree(v).min(g.distinct_degree(a.neighbor)) as f64;
        let accept = 1.0 - common_neighbors(g, v, a.neighbor) as f64 / min_deg;
        if rng.random::<f64>() < accept {
            return Some(a);
        }
        last = Some(a);
    }
    last
}

/// SRW, NBRW, RWR, MHRW and CNARW: a single walker.
///
/// A walk that finds no new node for `stall` steps, or cannot move at all,
/// jumps to a fresh uniform node; the jump target is charged like any visit.
pub(super) fn single_walk(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let mut visit = Visit::new(g.node_count());
    let budget = spec.budget;
    let stall = spec.param("stall") as usize;
    let restart = if spec.kind == SamplerKind::Rwr {
        spec.param("restart_prob")
    } else {
        0.0
    };
    let mut cur = start_node(g, spec, rng);
    visit.add(cur);
    let mut anchor = cur;
    let mut prev: Option<NodeId> = None;
    let mut since_new = 0usize;
    while visit.len() < budget {
        if since_new >= stall || g.degree(cur) == 0 {
            let Some(v) = visit.fresh_node(rng) else {
                break;
            };
            visit.add(v);
            visit.teleports += 1;
            cur = v;
            anchor = v;
            prev = None;
            since_new = 0;
            continue;
        }
        if restart > 0.0 && rng.random::<f64>() < restart {
            cur = anchor;
            prev = None;
            since_new += 1;
            continue;
        }
        let step = match spec.kind {
            SamplerKind::Srw | SamplerKind::Rwr => uniform_adj(g, cur, rng),
            SamplerKind::Nbrw => match non_backtracking(g, cur, prev, rng) {
                Some(a) => Some(a),
                None => {
                    // Dead end for a non-backtracking walk.
                    since_new = stall;
                    continue;
                }
            },
            SamplerKind::Mhrw => mh_step(g, cur, rng),
            SamplerKind::Cnarw => cnarw_step(g, cur, rng),
            other => unreachable!("{other} is not a single walk"),
        };
        since_new += 1;
        if let Some(a) = step {
            visit.traversal.push(Traversal {
                from: cur,
                to: a.neighbor,
                edge: a.edge,
            });
            if visit.add(a.neighbor) {
                since_new = 0;
            }
            prev = Some(cur);
            cur = a.neighbor;
        }
    }
    visit
}

/// FrontierS: `m` dependent walkers; each step moves a walker chosen with
/// probability proportional to its degree along a uniform incident edge.
pub(super) fn frontier(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let n = g.node_count();
    let mut visit = Visit::new(n);
    let budget = spec.budget;
    let m = (spec.param("m") as usize).min(budget);
    let stall = spec.param("stall") as usize;
    let mut slots: Vec<NodeId> = index::sample(rng, n, m)
        .into_iter()
        .map(|v| v as NodeId)
        .collect();
    for &v in &slots {
        visit.add(v);
    }
    let mut since_new = 0usize;
    while visit.len() < budget {
        let total: usize = slots.iter().map(|&v| g.degree(v)).sum();
        if total == 0 || since_new >= stall {
            let i = rng.random_range(0..slots.len());
            let Some(v) = visit.fresh_node(rng) else {
                break;
            };
            visit.add(v);
            visit.teleports += 1;
            slots[i] = v;
            since_new = 0;
            continue;
        }
        let mut r = rng.random_range(0..total);
        let i = slots
            .iter()
            .position(|&v| {
                let d = g.degree(v);
                if r < d {
                    true
                } else {
                    r -= d;
                    false
                }
            })
            .expect("r < total");
        let v = slots[i];
        let a = uniform_adj(g, v, rng).expect("positive degree");
        visit.traversal.push(Traversal {
            from: v,
            to: a.neighbor,
            edge: a.edge,
        });
        since_new += 1;
        if visit.add(a.neighbor) {
            since_new = 0;
        }
        slots[i] = a.neighbor;
    }
    visit
}

/// States of a plain Metropolis-Hastings walk (rejections repeat the state),
/// for checking its stationary distribution.
pub fn mhrw_states(g: &AttributedGraph, start: NodeId, steps: usize, seed: u64) -> Vec<NodeId> {
    let mut rng = SamplerRng::seed_from_u64(seed);
    let mut cur = start;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        if let Some(a) = mh_step(g, cur, &mut rng) {
            cur = a.neighbor;
        }
        out.push(cur);
    }
    out
}
