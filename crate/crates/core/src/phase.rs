//! Hypothesis-aware sampling: PHASE and PHASE_opt.
//!
//! `m` dependent walkers. A walker is picked with probability proportional to
//! its slot weight (`w_h` when it sits on a node matching the first clause),
//! then moves to a neighbour drawn with probability proportional to the
//! transition weight: `w_h` for candidates that extend the walker's current
//! partial match of the pattern, `w_l` otherwise. PHASE_opt only looks at up
//! to `n` unvisited neighbours per step.
//!
//! Partial matches are tracked as the set of prefix lengths the walker's
//! recent history matches (a bitmask), which handles patterns whose clauses
//! repeat; the transition uses the longest active prefix below a full match.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Adj, AttributedGraph, NodeId};
use crate::hypothesis::BoundHypothesis;
use crate::sampler::{SamplerKind, SamplerRng, SamplerSpec, Visit};
use crate::subgraph::Traversal;

/// Longest pattern the bitmask state supports.
pub const MAX_PATTERN_LEN: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub m: usize,
    pub n: usize,
    pub w_h: f64,
    pub w_l: f64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        Self {
            m: 50,
            n: 30,
            w_h: 10.0,
            w_l: 0.1,
        }
    }
}

impl PhaseParams {
    pub fn from_spec(spec: &SamplerSpec) -> Self {
        let n = if spec.kind == SamplerKind::PhaseOpt {
            spec.param("n") as usize
        } else {
            usize::MAX
        };
        Self {
            m: spec.param("m") as usize,
            n,
            w_h: spec.param("w_h"),
            w_l: spec.param("w_l"),
        }
    }
}

/// Bit `j` set: the walk's history ends with a match of the first `j` clauses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct MatchState(u64);

impl MatchState {
    pub const EMPTY: MatchState = MatchState(0);

    /// State of a walker placed on `v` without history.
    pub fn start(g: &AttributedGraph, h: &BoundHypothesis, v: NodeId) -> Self {
        if h.step_matches(g, 0, v) {
            MatchState(1 << 1)
        } else {
            MatchState(0)
        }
    }

    /// Matched prefix length used for transitions: the longest active prefix
    /// shorter than the full pattern, 0 if none.
    pub fn q(self, l: usize) -> usize {
        let below_full = self.0 & ((1u64 << (l + 1)) - 1) & !1;
        if below_full == 0 {
            0
        } else {
            63 - below_full.leading_zeros() as usize
        }
    }

    pub fn contains(self, j: usize) -> bool {
        self.0 & (1 << j) != 0
    }

    /// State after moving from the current node along `a` (adjacency entry of the current node).
    pub fn advance(self, g: &AttributedGraph, h: &BoundHypothesis, a: &Adj) -> Self {
        let l = h.len();
        let u = a.neighbor;
        let mut next = 0u64;
        if h.step_matches(g, 0, u) {
            next |= 1 << 1;
        }
        let mut active = self.0 & !1;
        while active != 0 {
            let j = active.trailing_zeros() as usize;
            active &= active - 1;
            if j <= l && j >= 1 && h.links[j - 1].follows(g, a) && h.step_matches(g, j, u) {
                next |= 1 << (j + 1);
            }
        }
        MatchState(next)
    }
}

/// Matched-prefix update for a walker with prefix length `q` stepping along `a`;
/// returns the new transition prefix length.
pub fn update_match_state(g: &AttributedGraph, h: &BoundHypothesis, q: usize, a: &Adj) -> usize {
    let state = if q == 0 {
        MatchState(0)
    } else {
        MatchState(1 << q)
    };
    state.advance(g, h, a).q(h.len())
}

/// Slot weights for seeds: `w_h` where the node matches the first clause.
pub fn assign_seed_weights(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    seeds: &[NodeId],
    p: &PhaseParams,
) -> Vec<f64> {
    seeds
        .iter()
        .map(|&v| {
            if h.step_matches(g, 0, v) {
                p.w_h
            } else {
                p.w_l
            }
        })
        .collect()
}

#[inline]
fn transition_weight(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    q: usize,
    a: &Adj,
    p: &PhaseParams,
) -> f64 {
    let favoured = if q == 0 {
        h.step_matches(g, 0, a.neighbor)
    } else {
        h.links[q - 1].follows(g, a) && h.step_matches(g, q, a.neighbor)
    };
    if favoured {
        p.w_h
    } else {
        p.w_l
    }
}

/// Transition weights for candidate moves `candidates` (adjacency entries of the current node).
pub fn transition_weights(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    state: MatchState,
    candidates: &[Adj],
    p: &PhaseParams,
) -> Vec<f64> {
    let q = state.q(h.len());
    candidates
        .iter()
        .map(|a| transition_weight(g, h, q, a, p))
        .collect()
}

fn draw_weighted(weights: &[f64], rng: &mut SamplerRng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if r < w {
            return i;
        }
        r -= w;
    }
    weights.len() - 1
}

/// One transition from `v`: one candidate per distinct neighbour (a parallel
/// edge picked uniformly), drawn proportionally to its transition weight.
pub fn draw_step(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    state: MatchState,
    v: NodeId,
    p: &PhaseParams,
    rng: &mut SamplerRng,
) -> Option<Adj> {
    let mut cands = Vec::new();
    all_candidates(g, v, rng, &mut cands);
    if cands.is_empty() {
        return None;
    }
    let w = transition_weights(g, h, state, &cands, p);
    Some(cands[draw_weighted(&w, rng)])
}

fn pick_parallel(run: &[Adj], rng: &mut SamplerRng) -> Adj {
    if run.len() == 1 {
        run[0]
    } else {
        run[rng.random_range(0..run.len())]
    }
}

fn all_candidates(g: &AttributedGraph, v: NodeId, rng: &mut SamplerRng, out: &mut Vec<Adj>) {
    out.clear();
    for run in g.neighbor_runs(v) {
        out.push(pick_parallel(run, rng));
    }
}

/// Adjacency lists up to `SCAN_FACTOR * n` entries are scanned instead of rejection sampled.
const SCAN_FACTOR: usize = 8;

/// Scratch for PHASE_opt candidate selection.
struct Picker {
    stamp: Vec<u32>,
    epoch: u32,
    /// Adjacency offsets `[start, end)` of the neighbour runs still eligible.
    runs: Vec<(u32, u32)>,
}

impl Picker {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 0,
            runs: Vec::new(),
        }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
    }

    /// Up to `n` distinct unvisited neighbours of `v`, uniformly without
    /// replacement. Falls back to `n` distinct neighbours of any kind when all
    /// are visited.
    fn select(
        &mut self,
        g: &AttributedGraph,
        v: NodeId,
        visited: &[bool],
        n: usize,
        rng: &mut SamplerRng,
        out: &mut Vec<Adj>,
    ) {
        out.clear();
        self.next_epoch();
        let adj = g.adjacency(v);
        if adj.is_empty() {
            return;
        }
        // Rejection sampling over adjacency entries; accepting a run of k
        // parallel edges with probability 1/k makes distinct neighbours equally likely.
        // Short lists are cheaper to scan outright.
        let attempts = if adj.len() <= SCAN_FACTOR * n {
            0
        } else {
            4 * n + 16
        };
        for _ in 0..attempts {
            if out.len() == n {
                return;
            }
            let a = adj[rng.random_range(0..adj.len())];
            let w = a.neighbor;
            if visited[w as usize] || self.stamp[w as usize] == self.epoch {
                continue;
            }
            let run = run_of(adj, w);
            if run.len() > 1 && rng.random_range(0..run.len()) != 0 {
                continue;
            }
            self.stamp[w as usize] = self.epoch;
            out.push(pick_parallel(run, rng));
        }
        // Exact completion from the remaining unvisited neighbours.
        let (stamp, epoch) = (&self.stamp, self.epoch);
        collect_runs(&mut self.runs, adj, |w| {
            !visited[w as usize] && stamp[w as usize] != epoch
        });
        if self.runs.is_empty() && out.is_empty() {
            collect_runs(&mut self.runs, adj, |_| true);
        }
        // Partial Fisher-Yates: the first k runs form a uniform k-subset.
        let k = (n - out.len()).min(self.runs.len());
        for i in 0..k {
            let j = rng.random_range(i..self.runs.len());
            self.runs.swap(i, j);
            let (lo, hi) = self.runs[i];
            out.push(pick_parallel(&adj[lo as usize..hi as usize], rng));
        }
    }
}

fn collect_runs(runs: &mut Vec<(u32, u32)>, adj: &[Adj], keep: impl Fn(NodeId) -> bool) {
    runs.clear();
    let mut lo = 0;
    while lo < adj.len() {
        let w = adj[lo].neighbor;
        let mut hi = lo + 1;
        while hi < adj.len() && adj[hi].neighbor == w {
            hi += 1;
        }
        if keep(w) {
            runs.push((lo as u32, hi as u32));
        }
        lo = hi;
    }
}

fn run_of(adj: &[Adj], w: NodeId) -> &[Adj] {
    let lo = adj.partition_point(|a| a.neighbor < w);
    let hi = lo + adj[lo..].partition_point(|a| a.neighbor == w);
    &adj[lo..hi]
}

/// Distinct unvisited neighbours `N[v] - V_S`.
pub fn unvisited_neighbors(g: &AttributedGraph, v: NodeId, visited: &[bool]) -> Vec<NodeId> {
    g.neighbor_runs(v)
        .map(|r| r[0].neighbor)
        .filter(|&w| !visited[w as usize])
        .collect()
}

/// PHASE_opt candidate set for one step.
pub fn select_candidates(
    g: &AttributedGraph,
    v: NodeId,
    visited: &[bool],
    n: usize,
    rng: &mut SamplerRng,
) -> Vec<Adj> {
    let mut out = Vec::new();
    Picker::new(g.node_count()).select(g, v, visited, n, rng, &mut out);
    out
}

pub(crate) fn phase_visit(
    g: &AttributedGraph,
    h: &BoundHypothesis,
    spec: &SamplerSpec,
    rng: &mut SamplerRng,
) -> Result<Visit> {
    let p = PhaseParams::from_spec(spec);
    let budget = spec.budget;
    if budget < p.m {
        return Err(Error::Sampler(format!(
            "budget {budget} is below the number of walkers m={}",
            p.m
        )));
    }
    if h.len() > MAX_PATTERN_LEN {
        return Err(Error::Sampler(format!(
            "pattern length {} exceeds {MAX_PATTERN_LEN}",
            h.len()
        )));
    }
    let optimized = spec.kind == SamplerKind::PhaseOpt;
    let nodes = g.node_count();
    let mut visit = Visit::new(nodes);
    let mut slots: Vec<NodeId> = index::sample(rng, nodes, p.m)
        .into_iter()
        .map(|v| v as NodeId)
        .collect();
    let mut weights = assign_seed_weights(g, h, &slots, &p);
    let mut states: Vec<MatchState> = slots.iter().map(|&v| MatchState::start(g, h, v)).collect();
    let mut picker = optimized.then(|| Picker::new(nodes));
    let mut cands = Vec::new();
    let mut cand_weights = Vec::new();
    let slot_weight = |v: NodeId| {
        if h.step_matches(g, 0, v) {
            p.w_h
        } else {
            p.w_l
        }
    };

    let mut remaining = budget;
    while remaining > p.m {
        remaining -= 1;
        let i = draw_weighted(&weights, rng);
        let v = slots[i];
        match &mut picker {
            Some(pk) => pk.select(g, v, &visit.member, p.n, rng, &mut cands),
            None => all_candidates(g, v, rng, &mut cands),
        }
        if cands.is_empty() {
            // Isolated node: move the walker to a fresh node instead.
            let u = visit
                .fresh_node(rng)
                .unwrap_or_else(|| rng.random_range(0..nodes) as NodeId);
            visit.add(u);
            visit.teleports += 1;
            slots[i] = u;
            weights[i] = slot_weight(u);
            states[i] = MatchState::start(g, h, u);
            continue;
        }
        let q = states[i].q(h.len());
        cand_weights.clear();
        cand_weights.extend(cands.iter().map(|a| transition_weight(g, h, q, a, &p)));
        visit.record_evals(cands.len() as u64);
        let a = cands[draw_weighted(&cand_weights, rng)];
        visit.add(v);
        visit.add(a.neighbor);
        visit.traversal.push(Traversal {
            from: v,
            to: a.neighbor,
            edge: a.edge,
        });
        states[i] = states[i].advance(g, h, &a);
        slots[i] = a.neighbor;
        weights[i] = slot_weight(a.neighbor);
    }
    Ok(visit)
}
