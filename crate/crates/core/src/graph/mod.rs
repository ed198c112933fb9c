//! Typed, attributed multigraph.
//!
//! Nodes and edges get dense 0-based ids in insertion (file) order. External node
//! keys map through a symbol table. Attributes live in columns per
//! (type, attribute) so estimator scans touch contiguous memory. Adjacency is a
//! CSR layout over the undirected view: every edge appears once in the list of
//! each endpoint, tagged with whether it leaves that endpoint.

mod load;
mod schema;
mod write;

use std::collections::HashMap;
use std::sync::OnceLock;

pub use load::{load_graph, GraphBuilder, LoadOptions};
pub use schema::{AttrKind, EdgeTypeDecl, NodeTypeDecl, Schema};
pub use write::{save_graph, write_edges, write_nodes};

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type EdgeId = u32;

/// Owned attribute value, as read from or written to files.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Number(f64),
    Str(String),
}

impl std::fmt::Display for AttrValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AttrValue::Number(x) => write!(f, "{x}"),
            AttrValue::Str(s) => f.write_str(s),
        }
    }
}

/// Borrowed view of a stored attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrRef<'a> {
    Number(f64),
    Str(&'a str),
}

/// One entry of a node's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Adj {
    pub neighbor: NodeId,
    pub edge: EdgeId,
    /// `true` when the edge is stored as leaving the node that owns this list.
    pub outgoing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: NodeId,
    pub key: String,
    pub type_id: usize,
    pub attrs: Vec<(String, AttrValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub type_id: usize,
    pub attrs: Vec<(String, AttrValue)>,
}

/// Missing numbers are NaN, missing categories are `MISSING_CATEGORY`.
#[derive(Debug, Clone)]
pub(crate) enum Column {
    Number(Vec<f64>),
    Category(Vec<u32>),
}

pub(crate) const MISSING_CATEGORY: u32 = u32::MAX;

impl Column {
    fn new(kind: AttrKind) -> Self {
        match kind {
            AttrKind::Number => Column::Number(Vec::new()),
            AttrKind::String => Column::Category(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Interner {
    ids: HashMap<String, u32>,
    strings: Vec<String>,
}

impl Interner {
    pub(crate) fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.strings.len() as u32;
        self.strings.push(s.to_owned());
        self.ids.insert(s.to_owned(), id);
        id
    }

    pub(crate) fn get(&self, s: &str) -> Option<u32> {
        self.ids.get(s).copied()
    }

    pub(crate) fn resolve(&self, id: u32) -> &str {
        &self.strings[id as usize]
    }
}

#[derive(Debug)]
pub struct AttributedGraph {
    pub(crate) schema: Schema,
    pub(crate) node_keys: Vec<String>,
    pub(crate) key_index: HashMap<String, NodeId>,
    pub(crate) node_type: Vec<u16>,
    pub(crate) node_row: Vec<u32>,
    pub(crate) nodes_by_type: Vec<Vec<NodeId>>,
    pub(crate) node_columns: Vec<Vec<Column>>,
    pub(crate) edge_src: Vec<NodeId>,
    pub(crate) edge_dst: Vec<NodeId>,
    pub(crate) edge_type: Vec<u16>,
    pub(crate) edge_row: Vec<u32>,
    pub(crate) edge_columns: Vec<Vec<Column>>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) adjacency: Vec<Adj>,
    pub(crate) strings: Interner,
    pub(crate) pagerank: OnceLock<Vec<f64>>,
}

impl AttributedGraph {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.node_type.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_src.len()
    }

    pub fn node_type(&self, v: NodeId) -> usize {
        self.node_type[v as usize] as usize
    }

    pub fn node_key(&self, v: NodeId) -> &str {
        &self.node_keys[v as usize]
    }

    pub fn node_id(&self, key: &str) -> Option<NodeId> {
        self.key_index.get(key).copied()
    }

    pub fn nodes_of_type(&self, type_id: usize) -> &[NodeId] {
        &self.nodes_by_type[type_id]
    }

    pub fn edge_type(&self, e: EdgeId) -> usize {
        self.edge_type[e as usize] as usize
    }

    pub fn edge_endpoints(&self, e: EdgeId) -> (NodeId, NodeId) {
        (self.edge_src[e as usize], self.edge_dst[e as usize])
    }

    /// Undirected adjacency of `v`, sorted by `(neighbor, edge)`.
    pub fn adjacency(&self, v: NodeId) -> &[Adj] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Number of incident edges in the undirected view (in + out; a self-loop counts twice).
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn checked_degree(&self, v: NodeId) -> Result<usize> {
        if (v as usize) < self.node_count() {
            Ok(self.degree(v))
        } else {
            Err(Error::Graph(format!(
                "node id {v} out of range (graph has {} nodes)",
                self.node_count()
            )))
        }
    }

    /// Adjacency of `v` grouped into runs that share one neighbor (parallel edges).
    pub fn neighbor_runs(&self, v: NodeId) -> impl Iterator<Item = &[Adj]> + '_ {
        self.adjacency(v).chunk_by(|a, b| a.neighbor == b.neighbor)
    }

    /// Number of distinct neighbors of `v`.
    pub fn distinct_degree(&self, v: NodeId) -> usize {
        self.neighbor_runs(v).count()
    }

    pub fn node_number(&self, v: NodeId, attr: usize) -> Option<f64> {
        let v = v as usize;
        match &self.node_columns[self.node_type[v] as usize][attr] {
            Column::Number(col) => {
                let x = col[self.node_row[v] as usize];
                (!x.is_nan()).then_some(x)
            }
            Column::Category(_) => None,
        }
    }

    pub fn node_category(&self, v: NodeId, attr: usize) -> Option<u32> {
        let v = v as usize;
        match &self.node_columns[self.node_type[v] as usize][attr] {
            Column::Category(col) => {
                let c = col[self.node_row[v] as usize];
                (c != MISSING_CATEGORY).then_some(c)
            }
            Column::Number(_) => None,
        }
    }

    pub fn node_attr(&self, v: NodeId, attr: usize) -> Option<AttrRef<'_>> {
        let t = self.node_type(v);
        match self.schema.node_types[t].kind_at(attr)? {
            AttrKind::Number => self.node_number(v, attr).map(AttrRef::Number),
            AttrKind::String => self
                .node_category(v, attr)
                .map(|c| AttrRef::Str(self.strings.resolve(c))),
        }
    }

    pub fn edge_number(&self, e: EdgeId, attr: usize) -> Option<f64> {
        let e = e as usize;
        match &self.edge_columns[self.edge_type[e] as usize][attr] {
            Column::Number(col) => {
                let x = col[self.edge_row[e] as usize];
                (!x.is_nan()).then_some(x)
            }
            Column::Category(_) => None,
        }
    }

    pub fn edge_attr(&self, e: EdgeId, attr: usize) -> Option<AttrRef<'_>> {
        let t = self.edge_type(e);
        let row = self.edge_row[e as usize] as usize;
        match &self.edge_columns[t].get(attr)? {
            Column::Number(col) => {
                let x = col[row];
                (!x.is_nan()).then_some(AttrRef::Number(x))
            }
            Column::Category(col) => {
                let c = col[row];
                (c != MISSING_CATEGORY).then(|| AttrRef::Str(self.strings.resolve(c)))
            }
        }
    }

    /// Interned id of a category string, if any attribute ever takes that value.
    pub fn category_id(&self, s: &str) -> Option<u32> {
        self.strings.get(s)
    }

    pub fn node_record(&self, v: NodeId) -> NodeRecord {
        let type_id = self.node_type(v);
        let decl = &self.schema.node_types[type_id];
        let attrs = decl
            .attrs
            .keys()
            .enumerate()
            .filter_map(|(i, name)| self.node_attr(v, i).map(|a| (name.clone(), owned(a))))
            .collect();
        NodeRecord {
            id: v,
            key: self.node_key(v).to_owned(),
            type_id,
            attrs,
        }
    }

    pub fn edge_record(&self, e: EdgeId) -> EdgeRecord {
        let type_id = self.edge_type(e);
        let decl = &self.schema.edge_types[type_id];
        let (src, dst) = self.edge_endpoints(e);
        let attrs = decl
            .attrs
            .keys()
            .enumerate()
            .filter_map(|(i, name)| self.edge_attr(e, i).map(|a| (name.clone(), owned(a))))
            .collect();
        EdgeRecord {
            id: e,
            src,
            dst,
            type_id,
            attrs,
        }
    }

    /// PageRank over the undirected view (damping 0.85, 50 power iterations), computed once.
    pub fn pagerank(&self) -> &[f64] {
        self.pagerank.get_or_init(|| pagerank(self, 0.85, 50))
    }
}

fn owned(a: AttrRef<'_>) -> AttrValue {
    match a {
        AttrRef::Number(x) => AttrValue::Number(x),
        AttrRef::Str(s) => AttrValue::Str(s.to_owned()),
    }
}

pub(crate) fn pagerank(g: &AttributedGraph, damping: f64, iterations: usize) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        let mut dangling = 0.0;
        for v in 0..n {
            if g.degree(v as NodeId) == 0 {
                dangling += rank[v];
            }
        }
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        for (v, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in g.adjacency(v as NodeId) {
                let u = a.neighbor as usize;
                acc += rank[u] / g.degree(a.neighbor) as f64;
            }
            *slot = base + damping * acc;
        }
        std::mem::swap(&mut rank, &mut next);
    }
    rank
}
