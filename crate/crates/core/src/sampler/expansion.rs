use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::{start_node, SamplerKind, SamplerRng, SamplerSpec, Visit};
use crate::graph::{Adj, AttributedGraph, EdgeId, NodeId};
use crate::subgraph::Traversal;

/// Uniform edge out of a run of parallel edges.
fn pick_edge(run: &[Adj], rng: &mut SamplerRng) -> EdgeId {
    if run.len() == 1 {
        run[0].edge
    } else {
        run[rng.random_range(0..run.len())].edge
    }
}

/// SBS adds `k` unvisited neighbours per expanded node, FFS a geometric number
/// with mean `burn / (1 - burn)`. An exhausted queue restarts from a fresh node.
pub(super) fn snowball(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let mut visit = Visit::new(g.node_count());
    let budget = spec.budget;
    let burn = (spec.kind == SamplerKind::Ffs)
        .then(|| Geometric::new(1.0 - spec.param("burn")).expect("burn validated"));
    let k = if spec.kind == SamplerKind::Sbs {
        spec.param("k") as usize
    } else {
        0
    };
    let start = start_node(g, spec, rng);
    visit.add(start);
    let mut queue = VecDeque::from([start]);
    let mut open: Vec<&[Adj]> = Vec::new();
    while visit.len() < budget {
        let Some(v) = queue.pop_front() else {
            let Some(v) = visit.fresh_node(rng) else {
                break;
            };
            visit.add(v);
            visit.teleports += 1;
            queue.push_back(v);
            continue;
        };
        let want = match &burn {
            Some(geo) => geo.sample(rng) as usize,
            None => k,
        };
        open.clear();
        open.extend(
            g.neighbor_runs(v)
                .filter(|r| !visit.contains(r[0].neighbor)),
        );
        let take = want.min(open.len());
        if take == 0 {
            continue;
        }
        for i in index::sample(rng, open.len(), take) {
            if visit.len() >= budget {
                break;
            }
            let run = open[i];
            let w = run[0].neighbor;
            visit.add(w);
            visit.traversal.push(Traversal {
                from: v,
                to: w,
                edge: pick_edge(run, rng),
            });
            queue.push_back(w);
        }
    }
    visit
}

const OUTSIDE: u8 = 0;
const FRONTIER: u8 = 1;
const INSIDE: u8 = 2;

/// Expansion sampling: repeatedly add the frontier node that brings the most
/// new neighbours, scoring a uniform subset of `candidates` frontier nodes.
/// Ties go to the smaller id.
pub(super) fn community(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> Visit {
    let n = g.node_count();
    let mut visit = Visit::new(n);
    let budget = spec.budget;
    let candidates = spec.param("candidates") as usize;
    let mut state = vec![OUTSIDE; n];
    let mut frontier: Vec<NodeId> = Vec::new();
    let mut position = vec![u32::MAX; n];
    let mut parent: Vec<(NodeId, EdgeId)> = vec![(0, 0); n];

    let absorb = |v: NodeId,
                  visit: &mut Visit,
                  state: &mut Vec<u8>,
                  frontier: &mut Vec<NodeId>,
                  position: &mut Vec<u32>,
                  parent: &mut Vec<(NodeId, EdgeId)>| {
        if state[v as usize] == FRONTIER {
            let p = position[v as usize] as usize;
            let last = *frontier.last().expect("non-empty frontier");
            frontier.swap_remove(p);
            if last != v {
                position[last as usize] = p as u32;
            }
            let (from, edge) = parent[v as usize];
            visit.traversal.push(Traversal { from, to: v, edge });
        }
        state[v as usize] = INSIDE;
        visit.add(v);
        for run in g.neighbor_runs(v) {
            let w = run[0].neighbor;
            if state[w as usize] == OUTSIDE {
                state[w as usize] = FRONTIER;
                position[w as usize] = frontier.len() as u32;
                frontier.push(w);
                parent[w as usize] = (v, run[0].edge);
            }
        }
    };

    let start = start_node(g, spec, rng);
    absorb(
        start,
        &mut visit,
        &mut state,
        &mut frontier,
        &mut position,
        &mut parent,
    );
    while visit.len() < budget {
        if frontier.is_empty() {
            let Some(v) = visit.fresh_node(rng) else {
                break;
            };
            visit.teleports += 1;
            absorb(
                v,
                &mut visit,
                &mut state,
                &mut frontier,
                &mut position,
                &mut parent,
            );
            continue;
        }
        let score = |w: NodeId| {
            g.neighbor_runs(w)
                .filter(|r| state[r[0].neighbor as usize] == OUTSIDE)
                .count()
        };
        let pool: Vec<NodeId> = if frontier.len() <= candidates {
            frontier.clone()
        } else {
            index::sample(rng, frontier.len(), candidates)
                .into_iter()
                .map(|i| frontier[i])
                .collect()
        };
        let best = pool
            .into_iter()
            .map(|w| (score(w), w))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .expect("non-empty pool")
            .1;
        absorb(
            best,
            &mut visit,
            &mut state,
            &mut frontier,
            &mut position,
            &mut parent,
        );
    }
    visit
}

/// Scratch space for bidirectional BFS, reused across queries.
struct Bfs {
    epoch: u32,
    stamp: [Vec<u32>; 2],
    dist: [Vec<u32>; 2],
    sigma: [Vec<f64>; 2],
    frontier: [Vec<NodeId>; 2],
    next: Vec<NodeId>,
    meet: Vec<NodeId>,
}

impl Bfs {
    fn new(n: usize) -> Self {
        Self {
            epoch: 0,
            stamp: [vec![0; n], vec![0; n]],
            dist: [vec![0; n], vec![0; n]],
            sigma: [vec![0.0; n], vec![0.0; n]],
            frontier: [Vec::new(), Vec::new()],
            next: Vec::new(),
            meet: Vec::new(),
        }
    }

    #[inline]
    fn seen(&self, side: usize, v: NodeId) -> bool {
        self.stamp[side][v as usize] == self.epoch
    }

    fn label(&mut self, side: usize, v: NodeId, dist: u32, sigma: f64) {
        self.stamp[side][v as usize] = self.epoch;
        self.dist[side][v as usize] = dist;
        self.sigma[side][v as usize] = sigma;
    }

    /// Uniform random shortest path `s -> t` (over edge sequences) in the undirected view.
    fn path(
        &mut self,
        g: &AttributedGraph,
        s: NodeId,
        t: NodeId,
        rng: &mut SamplerRng,
    ) -> Option<(Vec<NodeId>, Vec<EdgeId>)> {
        if s == t {
            return Some((vec![s], Vec::new()));
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            for side in 0..2 {
                self.stamp[side].fill(0);
            }
            self.epoch = 1;
        }
        self.label(0, s, 0, 1.0);
        self.label(1, t, 0, 1.0);
        self.frontier[0].clear();
        self.frontier[0].push(s);
        self.frontier[1].clear();
        self.frontier[1].push(t);
        loop {
            if self.frontier[0].is_empty() || self.frontier[1].is_empty() {
                return None;
            }
            let side = usize::from(self.frontier[1].len() < self.frontier[0].len());
            let other = 1 - side;
            self.next.clear();
            self.meet.clear();
            let frontier = std::mem::take(&mut self.frontier[side]);
            for &v in &frontier {
                let d = self.dist[side][v as usize] + 1;
                let sv = self.sigma[side][v as usize];
                for a in g.adjacency(v) {
                    let w = a.neighbor;
                    if !self.seen(side, w) {
                        self.label(side, w, d, 0.0);
                        self.next.push(w);
                        if self.seen(other, w) {
                            self.meet.push(w);
                        }
                    }
                    if self.dist[side][w as usize] == d {
                        self.sigma[side][w as usize] += sv;
                    }
                }
            }
            self.frontier[side] = std::mem::take(&mut self.next);
            self.next = frontier;
            if !self.meet.is_empty() {
                break;
            }
        }
        let total: f64 = self
            .meet
            .iter()
            .map(|&x| self.sigma[0][x as usize] * self.sigma[1][x as usize])
            .sum();
        let mut r = rng.random::<f64>() * total;
        let mut x = *self.meet.last().expect("non-empty");
        for &m in &self.meet {
            let w = self.sigma[0][m as usize] * self.sigma[1][m as usize];
            if r < w {
                x = m;
                break;
            }
            r -= w;
        }
        let (mut to_s, mut to_s_edges) = self.walk_back(g, 0, x, rng);
        let (to_t, to_t_edges) = self.walk_back(g, 1, x, rng);
        to_s.reverse();
        to_s_edges.reverse();
        to_s.extend_from_slice(&to_t[1..]);
        to_s_edges.extend(to_t_edges);
        Some((to_s, to_s_edges))
    }

    /// From `x` back to the root of `side`, choosing predecessors by path count.
    fn walk_back(
        &self,
        g: &AttributedGraph,
        side: usize,
        x: NodeId,
        rng: &mut SamplerRng,
    ) -> (Vec<NodeId>, Vec<EdgeId>) {
        let mut nodes = vec![x];
        let mut edges = Vec::new();
        let mut cur = x;
        while self.dist[side][cur as usize] > 0 {
            let d = self.dist[side][cur as usize] - 1;
            let preds = || {
                g.adjacency(cur).iter().filter(move |a| {
                    self.seen(side, a.neighbor) && self.dist[side][a.neighbor as usize] == d
                })
            };
            let total: f64 = preds().map(|a| self.sigma[side][a.neighbor as usize]).sum();
            let mut r = rng.random::<f64>() * total;
            let mut chosen = None;
            for a in preds() {
                chosen = Some(*a);
                let w = self.sigma[side][a.neighbor as usize];
                if r < w {
                    break;
                }
                r -= w;
            }
            let a = chosen.expect("a labelled node has a predecessor");
            nodes.push(a.neighbor);
            edges.push(a.edge);
            cur = a.neighbor;
        }
        (nodes, edges)
    }
}

/// Uniform random shortest path between `s` and `t` as (nodes, edges), or `None` if unreachable.
pub fn random_shortest_path(
    g: &AttributedGraph,
    s: NodeId,
    t: NodeId,
    rng: &mut SamplerRng,
) -> Option<(Vec<NodeId>, Vec<EdgeId>)> {
    Bfs::new(g.node_count()).path(g, s, t, rng)
}

/// ShortestPathS: a fresh source and a uniform target; add a random shortest
/// path between them, source first, until the budget is spent.
pub(super) fn shortest_paths(
    g: &AttributedGraph,
    spec: &SamplerSpec,
    rng: &mut SamplerRng,
) -> Visit {
    let n = g.node_count();
    let mut visit = Visit::new(n);
    let budget = spec.budget;
    let retries = spec.param("retries") as usize;
    let mut bfs = Bfs::new(n);
    while visit.len() < budget {
        let Some(s) = visit.fresh_node(rng) else {
            break;
        };
        let mut found = None;
        if n > 1 {
            for _ in 0..=retries {
                let mut t = rng.random_range(0..n - 1) as NodeId;
                if t >= s {
                    t += 1;
                }
                if let Some(p) = bfs.path(g, s, t, rng) {
                    found = Some(p);
                    break;
                }
            }
        }
        let Some((nodes, edges)) = found else {
            visit.add(s);
            continue;
        };
        visit.add(s);
        for (i, &e) in edges.iter().enumerate() {
            if visit.len() >= budget && !visit.contains(nodes[i + 1]) {
                break;
            }
            visit.add(nodes[i + 1]);
            visit.traversal.push(Traversal {
                from: nodes[i],
                to: nodes[i + 1],
                edge: e,
            });
        }
    }
    visit
}
