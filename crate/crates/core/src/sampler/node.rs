use rand::seq::index;
use rand::Rng;

use super::{SamplerKind, SamplerRng, SamplerSpec, Visit};
use crate::graph::{AttributedGraph, NodeId};
use crate::subgraph::Traversal;

/// RNS, DBS and PRBS: `B` distinct nodes drawn without replacement.
pub(super) fn node_sample(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let n = g.node_count();
    let mut visit = Visit::new(n);
    match spec.kind {
        SamplerKind::Rns => {
            for v in index::sample(rng, n, spec.budget) {
                visit.add(v as NodeId);
            }
        }
        SamplerKind::Dbs => {
            let w: Vec<f64> = (0..n as NodeId).map(|v| g.degree(v) as f64).collect();
            weighted_without_replacement(&w, spec.budget, rng, &mut visit);
        }
        SamplerKind::Prbs => {
            weighted_without_replacement(g.pagerank(), spec.budget, rng, &mut visit);
        }
        other => unreachable!("{other} is not a node sampler"),
    }
    visit
}

/// Efraimidis-Spirakis: keep the `k` largest `ln(u)/w`. Zero weights come last.
fn weighted_without_replacement(w: &[f64], k: usize, rng: &mut SamplerRng, visit: &mut Visit) {
    let mut keys: Vec<(f64, NodeId)> = w
        .iter()
        .enumerate()
        .map(|(v, &wv)| {
            let u: f64 = rng.random::<f64>();
            let key = if wv > 0.0 {
                // ln of a value in (0, 1]; random::<f64>() lies in [0, 1).
                (1.0 - u).ln() / wv
            } else {
                f64::NEG_INFINITY
            };
            (key, v as NodeId)
        })
        .collect();
    let by_key = |a: &(f64, NodeId), b: &(f64, NodeId)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < keys.len() {
        keys.select_nth_unstable_by(k, by_key);
        keys.truncate(k);
    }
    keys.sort_unstable_by(by_key);
    for (_, v) in keys {
        visit.add(v);
    }
}

/// RES. By default the budget counts nodes: edges are taken in uniform random
/// order and kept while their new endpoints fit. With `edges=1` the budget
/// counts distinct edges instead.
pub(super) fn random_edges(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let mut visit = Visit::new(g.node_count());
    let m = g.edge_count();
    let take = |visit: &mut Visit, e: u32| {
        let (s, d) = g.edge_endpoints(e);
        visit.add(s);
        visit.add(d);
        visit.traversal.push(Traversal {
            from: s,
            to: d,
            edge: e,
        });
    };
    if spec.param("edges") != 0.0 {
        for e in index::sample(rng, m, spec.budget) {
            take(&mut visit, e as u32);
        }
        return visit;
    }
    let budget = spec.budget;
    // Lazy Fisher-Yates over edge ids.
    let mut perm: Vec<u32> = (0..m as u32).collect();
    for i in 0..m {
        if visit.len() >= budget {
            break;
        }
        let j = rng.random_range(i..m);
        perm.swap(i, j);
        let e = perm[i];
        let (s, d) = g.edge_endpoints(e);
        let new = usize::from(!visit.contains(s)) + usize::from(s != d && !visit.contains(d));
        if new > 0 && visit.len() + new <= budget {
            take(&mut visit, e);
        }
    }
    // Only isolated nodes or a single leftover slot can remain.
    while visit.len() < budget {
        match visit.fresh_node(rng) {
            Some(v) => {
                visit.add(v);
                visit.teleports += 1;
            }
            None => break,
        }
    }
    visit
}
