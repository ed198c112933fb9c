//! Seeded synthetic attributed graphs.

use std::collections::HashSet;

use indexmap::IndexMap;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    AttrKind, AttrValue, AttributedGraph, EdgeTypeDecl, GraphBuilder, NodeId, NodeTypeDecl, Schema,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueDist {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Rounded to three decimals.
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Integers in `lo..=hi`.
    Int {
        lo: i64,
        hi: i64,
    },
    Categorical {
        values: Vec<String>,
    },
}

impl ValueDist {
    fn kind(&self) -> AttrKind {
        match self {
            ValueDist::Categorical { .. } => AttrKind::String,
            _ => AttrKind::Number,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> AttrValue {
        match self {
            ValueDist::Uniform { lo, hi } => {
                AttrValue::Number(lo + (hi - lo) * rng.random::<f64>())
            }
            ValueDist::Normal { mean, sd } => {
                let x = Normal::new(*mean, *sd).expect("validated").sample(rng);
                AttrValue::Number((x * 1000.0).round() / 1000.0)
            }
            ValueDist::Int { lo, hi } => AttrValue::Number(rng.random_range(*lo..=*hi) as f64),
            ValueDist::Categorical { values } => {
                AttrValue::Str(values[rng.random_range(0..values.len())].clone())
            }
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            ValueDist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            ValueDist::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && *sd >= 0.0,
            ValueDist::Int { lo, hi } => lo <= hi,
            ValueDist::Categorical { values } => !values.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid distribution for attribute '{name}'"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttrGen {
    pub name: String,
    pub dist: ValueDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGen {
    pub name: String,
    pub count: usize,
    #[serde(default)]
    pub attrs: Vec<AttrGen>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeDist {
    Uniform,
    /// Chung-Lu style endpoint weights `rank^(-1/(alpha-1))`.
    PowerLaw {
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeGen {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub count: usize,
    pub degree: DegreeDist,
    #[serde(default)]
    pub attrs: Vec<AttrGen>,
}

/// Plants a numeric 0/1 attribute set to 1 on exactly `round(fraction * |V|)`
/// uniformly chosen nodes of `node_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantGen {
    pub node_type: String,
    pub attr: String,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub node_types: Vec<NodeGen>,
    #[serde(default)]
    pub edge_types: Vec<EdgeGen>,
    #[serde(default)]
    pub relevant: Option<RelevantGen>,
}

fn cat(values: &[&str]) -> ValueDist {
    ValueDist::Categorical {
        values: values.iter().map(|s| s.to_string()).collect(),
    }
}

fn attr(name: &str, dist: ValueDist) -> AttrGen {
    AttrGen {
        name: name.into(),
        dist,
    }
}

impl SynthConfig {
    /// Bibliographic graph: 20,000 nodes, 100,000 edges (average degree 10).
    pub fn desk(seed: u64) -> Self {
        let venues = [
            "kdd", "vldb", "sigmod", "icde", "www", "cikm", "icml", "neurips", "aaai", "ijcai",
        ];
        SynthConfig {
            seed,
            node_types: vec![
                NodeGen {
                    name: "author".into(),
                    count: 8_000,
                    attrs: vec![
                        attr("h_index", ValueDist::Int { lo: 0, hi: 80 }),
                        attr("country", cat(&["us", "cn", "de", "fr", "jp"])),
                    ],
                },
                NodeGen {
                    name: "paper".into(),
                    count: 11_500,
                    attrs: vec![
                        attr("year", ValueDist::Int { lo: 1990, hi: 2024 }),
                        attr(
                            "citations",
                            ValueDist::Normal {
                                mean: 40.0,
                                sd: 15.0,
                            },
                        ),
                        attr("venue", cat(&venues)),
                    ],
                },
                NodeGen {
                    name: "fos".into(),
                    count: 500,
                    attrs: vec![attr("level", ValueDist::Int { lo: 0, hi: 3 })],
                },
            ],
            edge_types: vec![
                EdgeGen {
                    name: "writes".into(),
                    src: "author".into(),
                    dst: "paper".into(),
                    count: 35_000,
                    degree: DegreeDist::PowerLaw { alpha: 2.5 },
                    attrs: vec![attr("order", ValueDist::Int { lo: 1, hi: 8 })],
                },
                EdgeGen {
                    name: "cites".into(),
                    src: "paper".into(),
                    dst: "paper".into(),
                    count: 50_000,
                    degree: DegreeDist::PowerLaw { alpha: 2.3 },
                    attrs: vec![attr("weight", ValueDist::Uniform { lo: 0.0, hi: 1.0 })],
                },
                EdgeGen {
                    name: "with_domain".into(),
                    src: "paper".into(),
                    dst: "fos".into(),
                    count: 15_000,
                    degree: DegreeDist::PowerLaw { alpha: 2.5 },
                    attrs: vec![attr("score", ValueDist::Uniform { lo: 0.0, hi: 1.0 })],
                },
            ],
            relevant: Some(RelevantGen {
                node_type: "author".into(),
                attr: "flag".into(),
                fraction: 0.005,
            }),
        }
    }

    /// Rating graph with average degree 50: 6,000 nodes, 150,000 edges.
    pub fn dense(seed: u64) -> Self {
        SynthConfig {
            seed,
            node_types: vec![
                NodeGen {
                    name: "user".into(),
                    count: 5_000,
                    attrs: vec![attr("age", ValueDist::Int { lo: 15, hi: 74 })],
                },
                NodeGen {
                    name: "item".into(),
                    count: 1_000,
                    attrs: vec![
                        attr("price", ValueDist::Uniform { lo: 1.0, hi: 100.0 }),
                        attr(
                            "genre",
                            cat(&["drama", "comedy", "action", "horror", "doc"]),
                        ),
                    ],
                },
            ],
            edge_types: vec![
                EdgeGen {
                    name: "rates".into(),
                    src: "user".into(),
                    dst: "item".into(),
                    count: 100_000,
                    degree: DegreeDist::PowerLaw { alpha: 2.2 },
                    attrs: vec![attr("stars", ValueDist::Int { lo: 1, hi: 5 })],
                },
                EdgeGen {
                    name: "follows".into(),
                    src: "user".into(),
                    dst: "user".into(),
                    count: 50_000,
                    degree: DegreeDist::PowerLaw { alpha: 2.2 },
                    attrs: vec![],
                },
            ],
            relevant: None,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk(seed)),
            "dense" => Ok(Self::dense(seed)),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (desk, dense)"
            ))),
        }
    }

    /// Scales every node and edge count by `factor` (at least one of each).
    pub fn scaled(mut self, factor: f64) -> Self {
        let scale = |n: usize| ((n as f64 * factor).round() as usize).max(1);
        for t in &mut self.node_types {
            t.count = scale(t.count);
        }
        for t in &mut self.edge_types {
            t.count = scale(t.count);
        }
        self
    }

    pub fn node_total(&self) -> usize {
        self.node_types.iter().map(|t| t.count).sum()
    }

    pub fn schema(&self) -> Result<Schema> {
        let mut node_types = Vec::new();
        for t in &self.node_types {
            let mut attrs: IndexMap<String, AttrKind> = t
                .attrs
                .iter()
                .map(|a| (a.name.clone(), a.dist.kind()))
                .collect();
            if let Some(r) = &self.relevant {
                if r.node_type == t.name && attrs.insert(r.attr.clone(), AttrKind::Number).is_some()
                {
                    return Err(Error::Config(format!(
                        "planted attribute '{}' already declared",
                        r.attr
                    )));
                }
            }
            node_types.push(NodeTypeDecl {
                name: t.name.clone(),
                attrs,
            });
        }
        let edge_types = self
            .edge_types
            .iter()
            .map(|t| EdgeTypeDecl {
                name: t.name.clone(),
                src: t.src.clone(),
                dst: t.dst.clone(),
                attrs: t
                    .attrs
                    .iter()
                    .map(|a| (a.name.clone(), a.dist.kind()))
                    .collect(),
            })
            .collect();
        let schema = Schema {
            node_types,
            edge_types,
        };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self, schema: &Schema) -> Result<()> {
        for t in &self.node_types {
            t.attrs.iter().try_for_each(|a| a.dist.validate(&a.name))?;
        }
        for e in &self.edge_types {
            e.attrs.iter().try_for_each(|a| a.dist.validate(&a.name))?;
            if let DegreeDist::PowerLaw { alpha } = e.degree {
                if !(alpha > 1.0) {
                    return Err(Error::Config(format!(
                        "edge type '{}': alpha must exceed 1",
                        e.name
                    )));
                }
            }
            let ns = self.count_of(&e.src);
            let nd = self.count_of(&e.dst);
            let capacity = if e.src == e.dst {
                ns * ns.saturating_sub(1)
            } else {
                ns * nd
            };
            if e.count > capacity {
                return Err(Error::Config(format!(
                    "edge type '{}': {} edges exceed simple-graph capacity {capacity}",
                    e.name, e.count
                )));
            }
        }
        if let Some(r) = &self.relevant {
            if !(r.fraction > 0.0 && r.fraction <= 1.0) {
                return Err(Error::Config("relevant fraction must lie in (0, 1]".into()));
            }
            let planted = (r.fraction * self.node_total() as f64).round() as usize;
            if schema.node_type_id(&r.node_type).is_none() || planted > self.count_of(&r.node_type)
            {
                return Err(Error::Config(format!(
                    "cannot plant {planted} relevant nodes in type '{}'",
                    r.node_type
                )));
            }
        }
        Ok(())
    }

    fn count_of(&self, type_name: &str) -> usize {
        self.node_types
            .iter()
            .find(|t| t.name == type_name)
            .map_or(0, |t| t.count)
    }
}

/// Endpoint sampler over one node type's id range.
enum Endpoints {
    Uniform {
        base: NodeId,
        n: usize,
    },
    Weighted {
        ids: Vec<NodeId>,
        index: WeightedIndex<f64>,
    },
}

impl Endpoints {
    fn new(base: NodeId, n: usize, degree: DegreeDist, rng: &mut ChaCha8Rng) -> Self {
        match degree {
            DegreeDist::Uniform => Endpoints::Uniform { base, n },
            DegreeDist::PowerLaw { alpha } => {
                let exponent = -1.0 / (alpha - 1.0);
                let weights: Vec<f64> = (1..=n).map(|r| (r as f64).powf(exponent)).collect();
                // Ranks are shuffled so hubs are spread over ids.
                let mut ids: Vec<NodeId> = (0..n as NodeId).map(|i| base + i).collect();
                ids.shuffle(rng);
                Endpoints::Weighted {
                    ids,
                    index: WeightedIndex::new(weights).expect("positive weights"),
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> NodeId {
        match self {
            Endpoints::Uniform { base, n } => base + rng.random_range(0..*n) as NodeId,
            Endpoints::Weighted { ids, index } => ids[index.sample(rng)],
        }
    }
}

/// Generates the graph described by `cfg`. Node keys are `<type><index>`;
/// ids are assigned type by type in declaration order.
pub fn generate_graph(cfg: &SynthConfig) -> Result<AttributedGraph> {
    let schema = cfg.schema()?;
    cfg.validate(&schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = GraphBuilder::new(schema.clone())?;
    let total = cfg.node_total();
    let mut base = Vec::with_capacity(cfg.node_types.len());
    for (type_id, t) in cfg.node_types.iter().enumerate() {
        base.push(b.node_count() as NodeId);
        let planted: HashSet<usize> = match &cfg.relevant {
            Some(r) if r.node_type == t.name => {
                let k = (r.fraction * total as f64).round() as usize;
                index::sample(&mut rng, t.count, k).into_iter().collect()
            }
            _ => HashSet::new(),
        };
        let plant = cfg.relevant.as_ref().is_some_and(|r| r.node_type == t.name);
        for i in 0..t.count {
            let mut values: Vec<Option<AttrValue>> = t
                .attrs
                .iter()
                .map(|a| Some(a.dist.draw(&mut rng)))
                .collect();
            if plant {
                values.push(Some(AttrValue::Number(f64::from(u8::from(
                    planted.contains(&i),
                )))));
            }
            b.add_node_values(format!("{}{i}", t.name), type_id, values)
                .map_err(Error::Graph)?;
        }
    }
    for (type_id, e) in cfg.edge_types.iter().enumerate() {
        let (s, d) = schema.edge_endpoint_types(type_id);
        let src = Endpoints::new(base[s], cfg.node_types[s].count, e.degree, &mut rng);
        let dst = Endpoints::new(base[d], cfg.node_types[d].count, e.degree, &mut rng);
        let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(e.count);
        let mut attempts = 0usize;
        while seen.len() < e.count {
            attempts += 1;
            if attempts > 200 * e.count + 10_000 {
                return Err(Error::Config(format!(
                    "edge type '{}': could not place {} distinct edges; lower the count or flatten the degree distribution",
                    e.name, e.count
                )));
            }
            let (u, v) = (src.draw(&mut rng), dst.draw(&mut rng));
            if u == v || !seen.insert((u, v)) {
                continue;
            }
            let values = e
                .attrs
                .iter()
                .map(|a| Some(a.dist.draw(&mut rng)))
                .collect();
            b.add_edge_values(u, v, type_id, values)
                .map_err(Error::Graph)?;
        }
    }
    b.build(true)
}
