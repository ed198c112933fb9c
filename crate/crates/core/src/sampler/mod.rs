//! Graph samplers behind one dispatch interface.
//!
//! Every sampler charges the same budget: the number of distinct nodes it
//! visits. A run returns the node-induced subgraph of the visited set together
//! with the traversal sequence. All randomness comes from the seed.

mod expansion;
mod node;
mod walk;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};
use crate::hypothesis::BoundHypothesis;
use crate::subgraph::{SampleMeta, SampledSubgraph, Traversal};

pub use expansion::random_shortest_path;
pub use walk::mhrw_states;

pub type SamplerRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SamplerKind {
    Rns,
    Dbs,
    Prbs,
    Res,
    Srw,
    FrontierS,
    Nbrw,
    Rwr,
    Mhrw,
    Cnarw,
    CommunitySes,
    Sbs,
    Ffs,
    ShortestPathS,
    Phase,
    PhaseOpt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerFamily {
    Node,
    Edge,
    Walk,
    Expansion,
    HypothesisAware,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 16] = [
        SamplerKind::Rns,
        SamplerKind::Dbs,
        SamplerKind::Prbs,
        SamplerKind::Res,
        SamplerKind::Srw,
        SamplerKind::FrontierS,
        SamplerKind::Nbrw,
        SamplerKind::Rwr,
        SamplerKind::Mhrw,
        SamplerKind::Cnarw,
        SamplerKind::CommunitySes,
        SamplerKind::Sbs,
        SamplerKind::Ffs,
        SamplerKind::ShortestPathS,
        SamplerKind::Phase,
        SamplerKind::PhaseOpt,
    ];

    /// The samplers that ignore the hypothesis.
    pub const AGNOSTIC: [SamplerKind; 14] = [
        SamplerKind::Rns,
        SamplerKind::Dbs,
        SamplerKind::Prbs,
        SamplerKind::Res,
        SamplerKind::Srw,
        SamplerKind::FrontierS,
        SamplerKind::Nbrw,
        SamplerKind::Rwr,
        SamplerKind::Mhrw,
        SamplerKind::Cnarw,
        SamplerKind::CommunitySes,
        SamplerKind::Sbs,
        SamplerKind::Ffs,
        SamplerKind::ShortestPathS,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Rns => "rns",
            SamplerKind::Dbs => "dbs",
            SamplerKind::Prbs => "prbs",
            SamplerKind::Res => "res",
            SamplerKind::Srw => "srw",
            SamplerKind::FrontierS => "frontier",
            SamplerKind::Nbrw => "nbrw",
            SamplerKind::Rwr => "rwr",
            SamplerKind::Mhrw => "mhrw",
            SamplerKind::Cnarw => "cnarw",
            SamplerKind::CommunitySes => "community-ses",
            SamplerKind::Sbs => "sbs",
            SamplerKind::Ffs => "ffs",
            SamplerKind::ShortestPathS => "shortest-path",
            SamplerKind::Phase => "phase",
            SamplerKind::PhaseOpt => "phase-opt",
        }
    }

    pub fn family(self) -> SamplerFamily {
        use SamplerKind::*;
        match self {
            Rns | Dbs | Prbs => SamplerFamily::Node,
            Res => SamplerFamily::Edge,
            Srw | FrontierS | Nbrw | Rwr | Mhrw | Cnarw => SamplerFamily::Walk,
            CommunitySes | Sbs | Ffs | ShortestPathS => SamplerFamily::Expansion,
            Phase | PhaseOpt => SamplerFamily::HypothesisAware,
        }
    }

    pub fn needs_hypothesis(self) -> bool {
        self.family() == SamplerFamily::HypothesisAware
    }

    /// Accepted parameters and their defaults.
    pub fn params(self) -> &'static [(&'static str, f64)] {
        use SamplerKind::*;
        match self {
            Rns | Dbs | Prbs => &[],
            Res => &[("edges", 0.0)],
            Srw | Nbrw | Mhrw | Cnarw => &[("start", -1.0), ("stall", 1000.0)],
            Rwr => &[("start", -1.0), ("stall", 1000.0), ("restart_prob", 0.15)],
            FrontierS => &[("m", 50.0), ("stall", 1000.0)],
            Sbs => &[("k", 3.0), ("start", -1.0)],
            Ffs => &[("burn", 0.4), ("start", -1.0)],
            CommunitySes => &[("candidates", 16.0), ("start", -1.0)],
            ShortestPathS => &[("retries", 8.0)],
            Phase => &[("m", 50.0), ("w_h", 10.0), ("w_l", 0.1)],
            PhaseOpt => &[("m", 50.0), ("n", 30.0), ("w_h", 10.0), ("w_l", 0.1)],
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        let kind = match key.as_str() {
            "rns" => SamplerKind::Rns,
            "dbs" => SamplerKind::Dbs,
            "prbs" => SamplerKind::Prbs,
            "res" => SamplerKind::Res,
            "srw" => SamplerKind::Srw,
            "frontier" | "frontiers" => SamplerKind::FrontierS,
            "nbrw" => SamplerKind::Nbrw,
            "rwr" => SamplerKind::Rwr,
            "mhrw" => SamplerKind::Mhrw,
            "cnarw" => SamplerKind::Cnarw,
            "communityses" | "ses" => SamplerKind::CommunitySes,
            "sbs" => SamplerKind::Sbs,
            "ffs" => SamplerKind::Ffs,
            "shortestpath" | "shortestpaths" => SamplerKind::ShortestPathS,
            "phase" => SamplerKind::Phase,
            "phaseopt" => SamplerKind::PhaseOpt,
            _ => return Err(Error::Sampler(format!("unknown sampler '{s}'"))),
        };
        Ok(kind)
    }
}

impl Serialize for SamplerKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for SamplerKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which sampler to run, with its node budget `B` and parameter overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub budget: usize,
    pub params: BTreeMap<String, f64>,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, budget: usize) -> Self {
        Self {
            kind,
            budget,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    /// Override if given, otherwise the kind's default.
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or_else(|| {
            self.kind
                .params()
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, d)| *d)
                .unwrap_or_else(|| panic!("{} has no parameter '{name}'", self.kind))
        })
    }

    pub fn validate(&self, g: &AttributedGraph) -> Result<()> {
        let accepted = self.kind.params();
        for (name, value) in &self.params {
            if !accepted.iter().any(|(n, _)| n == name) {
                let names: Vec<&str> = accepted.iter().map(|(n, _)| *n).collect();
                return Err(Error::Sampler(format!(
                    "unknown parameter '{name}' for {} (accepted: {})",
                    self.kind,
                    if names.is_empty() {
                        "none".into()
                    } else {
                        names.join(", ")
                    }
                )));
            }
            if !value.is_finite() {
                return Err(Error::Sampler(format!("parameter '{name}' must be finite")));
            }
        }
        if self.budget == 0 {
            return Err(Error::Sampler("budget must be at least 1".into()));
        }
        let edge_mode = self.kind == SamplerKind::Res && self.param("edges") != 0.0;
        if edge_mode {
            if self.budget > g.edge_count() {
                return Err(Error::Sampler(format!(
                    "budget {} exceeds the number of edges ({})",
                    self.budget,
                    g.edge_count()
                )));
            }
        } else if self.budget > g.node_count() {
            return Err(Error::Sampler(format!(
                "budget {} exceeds the number of nodes ({})",
                self.budget,
                g.node_count()
            )));
        }
        let check = |name: &str, ok: fn(f64) -> bool, what: &str| -> Result<()> {
            if accepted.iter().any(|(n, _)| *n == name) && !ok(self.param(name)) {
                return Err(Error::Sampler(format!(
                    "parameter '{name}' of {} must be {what}, got {}",
                    self.kind,
                    self.param(name)
                )));
            }
            Ok(())
        };
        check("restart_prob", |p| p > 0.0 && p < 1.0, "in (0, 1)")?;
        check("burn", |p| (0.0..1.0).contains(&p), "in [0, 1)")?;
        check("m", |m| m >= 1.0 && m.fract() == 0.0, "a positive integer")?;
        check("n", |n| n >= 1.0 && n.fract() == 0.0, "a positive integer")?;
        check("k", |k| k >= 1.0 && k.fract() == 0.0, "a positive integer")?;
        check(
            "stall",
            |s| s >= 1.0 && s.fract() == 0.0,
            "a positive integer",
        )?;
        check(
            "candidates",
            |c| c >= 1.0 && c.fract() == 0.0,
            "a positive integer",
        )?;
        check(
            "retries",
            |c| c >= 0.0 && c.fract() == 0.0,
            "a non-negative integer",
        )?;
        check("w_l", |w| w > 0.0, "positive")?;
        if accepted.iter().any(|(n, _)| *n == "w_h") && self.param("w_h") < self.param("w_l") {
            return Err(Error::Sampler("w_h must be at least w_l".into()));
        }
        if accepted.iter().any(|(n, _)| *n == "start") {
            let s = self.param("start");
            if s != -1.0 && !(s >= 0.0 && s.fract() == 0.0 && (s as usize) < g.node_count()) {
                return Err(Error::Sampler(format!("start node {s} out of range")));
            }
        }
        Ok(())
    }
}

/// Runs one sampler. Hypothesis-aware kinds need `hypothesis`; the others ignore it.
pub fn run_sampler(
    g: &AttributedGraph,
    spec: &SamplerSpec,
    hypothesis: Option<&BoundHypothesis>,
    seed: u64,
) -> Result<SampledSubgraph> {
    spec.validate(g)?;
    let started = Instant::now();
    let mut rng = SamplerRng::seed_from_u64(seed);
    let visit = match spec.kind {
        SamplerKind::Rns | SamplerKind::Dbs | SamplerKind::Prbs => {
            node::node_sample(g, spec, &mut rng)
        }
        SamplerKind::Res => node::random_edges(g, spec, &mut rng),
        SamplerKind::Srw
        | SamplerKind::Nbrw
        | SamplerKind::Rwr
        | SamplerKind::Mhrw
        | SamplerKind::Cnarw => walk::single_walk(g, spec, &mut rng),
        SamplerKind::FrontierS => walk::frontier(g, spec, &mut rng),
        SamplerKind::Sbs | SamplerKind::Ffs => expansion::snowball(g, spec, &mut rng),
        SamplerKind::CommunitySes => expansion::community(g, spec, &mut rng),
        SamplerKind::ShortestPathS => expansion::shortest_paths(g, spec, &mut rng),
        SamplerKind::Phase | SamplerKind::PhaseOpt => {
            let h = hypothesis
                .ok_or_else(|| Error::Sampler(format!("{} needs a hypothesis", spec.kind)))?;
            crate::phase::phase_visit(g, h, spec, &mut rng)?
        }
    };
    let walk_time_s = started.elapsed().as_secs_f64();
    let mut meta = SampleMeta {
        kind: Some(spec.kind),
        budget: spec.budget,
        seed,
        wall_time_s: 0.0,
        walk_time_s,
        teleports: visit.teleports,
        weight_evals: visit.weight_evals,
        max_weight_evals_per_step: visit.max_weight_evals,
    };
    let mut sample = SampledSubgraph::induced(
        g,
        visit.order.iter().copied(),
        visit.traversal,
        meta.clone(),
    );
    meta.wall_time_s = started.elapsed().as_secs_f64();
    sample.meta = meta;
    Ok(sample)
}

/// Visited-set bookkeeping shared by the samplers.
#[derive(Debug)]
pub(crate) struct Visit {
    pub member: Vec<bool>,
    pub order: Vec<NodeId>,
    pub traversal: Vec<Traversal>,
    pub teleports: usize,
    pub weight_evals: u64,
    pub max_weight_evals: u64,
}

impl Visit {
    pub fn new(n: usize) -> Self {
        Self {
            member: vec![false; n],
            order: Vec::new(),
            traversal: Vec::new(),
            teleports: 0,
            weight_evals: 0,
            max_weight_evals: 0,
        }
    }

    /// Marks `v` visited; true when it was new.
    #[inline]
    pub fn add(&mut self, v: NodeId) -> bool {
        let slot = &mut self.member[v as usize];
        if *slot {
            return false;
        }
        *slot = true;
        self.order.push(v);
        true
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.member[v as usize]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    /// Uniform node not yet visited, or `None` when every node is.
    pub fn fresh_node(&self, rng: &mut SamplerRng) -> Option<NodeId> {
        let n = self.member.len();
        if self.order.len() >= n {
            return None;
        }
        for _ in 0..64 {
            let v = rng.random_range(0..n);
            if !self.member[v] {
                return Some(v as NodeId);
            }
        }
        let remaining = n - self.order.len();
        let pick = rng.random_range(0..remaining);
        self.member
            .iter()
            .enumerate()
            .filter(|(_, m)| !**m)
            .nth(pick)
            .map(|(v, _)| v as NodeId)
    }

    pub fn record_evals(&mut self, evals: u64) {
        self.weight_evals += evals;
        self.max_weight_evals = self.max_weight_evals.max(evals);
    }
}

/// Start node: the `start` parameter when set, else uniform.
pub(crate) fn start_node(g: &AttributedGraph, spec: &SamplerSpec, rng: &mut SamplerRng) -> NodeId {
    let s = spec.param("start");
    if s >= 0.0 {
        s as NodeId
    } else {
        rng.random_range(0..g.node_count()) as NodeId
    }
}
