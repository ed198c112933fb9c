use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use super::{
    Adj, AttrKind, AttrValue, AttributedGraph, Column, EdgeId, Interner, NodeId, Schema,
    MISSING_CATEGORY,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept nodes without any incident edge.
    pub allow_isolated: bool,
}

/// Incremental construction of an [`AttributedGraph`].
///
/// Row-level problems come back as plain messages so the file loader can attach
/// file names and line numbers.
#[derive(Debug)]
pub struct GraphBuilder {
    schema: Schema,
    node_keys: Vec<String>,
    key_index: HashMap<String, NodeId>,
    node_type: Vec<u16>,
    node_row: Vec<u32>,
    node_columns: Vec<Vec<Column>>,
    node_type_len: Vec<u32>,
    edge_src: Vec<NodeId>,
    edge_dst: Vec<NodeId>,
    edge_type: Vec<u16>,
    edge_row: Vec<u32>,
    edge_columns: Vec<Vec<Column>>,
    edge_type_len: Vec<u32>,
    edge_ends: Vec<(usize, usize)>,
    strings: Interner,
}

impl GraphBuilder {
    pub fn new(schema: Schema) -> Result<Self> {
        schema.validate()?;
        let node_columns = schema
            .node_types
            .iter()
            .map(|t| t.attrs.values().map(|k| Column::new(*k)).collect())
            .collect();
        let edge_columns = schema
            .edge_types
            .iter()
            .map(|t| t.attrs.values().map(|k| Column::new(*k)).collect())
            .collect();
        let edge_ends = (0..schema.edge_types.len())
            .map(|t| schema.edge_endpoint_types(t))
            .collect();
        Ok(Self {
            node_type_len: vec![0; schema.node_types.len()],
            edge_type_len: vec![0; schema.edge_types.len()],
            schema,
            node_keys: Vec::new(),
            key_index: HashMap::new(),
            node_type: Vec::new(),
            node_row: Vec::new(),
            node_columns,
            edge_src: Vec::new(),
            edge_dst: Vec::new(),
            edge_type: Vec::new(),
            edge_row: Vec::new(),
            edge_columns,
            edge_ends,
            strings: Interner::default(),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.node_type.len()
    }

    pub fn node_id(&self, key: &str) -> Option<NodeId> {
        self.key_index.get(key).copied()
    }

    /// Adds a node whose attributes are given as text (`key=value` pairs).
    pub fn add_node(
        &mut self,
        key: &str,
        type_name: &str,
        attrs: &[(&str, &str)],
    ) -> Result<NodeId, String> {
        let type_id = self
            .schema
            .node_type_id(type_name)
            .ok_or_else(|| format!("unknown node type '{type_name}'"))?;
        let decl = &self.schema.node_types[type_id];
        let values = parse_values(&decl.attrs, attrs, &decl.name)?;
        self.add_node_values(key.to_owned(), type_id, values)
    }

    /// Adds a node with typed attribute values in schema order (`None` = missing).
    pub fn add_node_values(
        &mut self,
        key: String,
        type_id: usize,
        values: Vec<Option<AttrValue>>,
    ) -> Result<NodeId, String> {
        if self.key_index.contains_key(&key) {
            return Err(format!("duplicate node id '{key}'"));
        }
        if self.node_type.len() >= u32::MAX as usize {
            return Err("too many nodes".into());
        }
        let id = self.node_type.len() as NodeId;
        push_row(&mut self.node_columns[type_id], values, &mut self.strings)?;
        self.node_type.push(type_id as u16);
        self.node_row.push(self.node_type_len[type_id]);
        self.node_type_len[type_id] += 1;
        self.key_index.insert(key.clone(), id);
        self.node_keys.push(key);
        Ok(id)
    }

    pub fn add_edge(
        &mut self,
        src_key: &str,
        dst_key: &str,
        type_name: &str,
        attrs: &[(&str, &str)],
    ) -> Result<EdgeId, String> {
        let src = self
            .node_id(src_key)
            .ok_or_else(|| format!("edge source '{src_key}' not found"))?;
        let dst = self
            .node_id(dst_key)
            .ok_or_else(|| format!("edge target '{dst_key}' not found"))?;
        let type_id = self
            .schema
            .edge_type_id(type_name)
            .ok_or_else(|| format!("unknown edge type '{type_name}'"))?;
        let decl = &self.schema.edge_types[type_id];
        let values = parse_values(&decl.attrs, attrs, &decl.name)?;
        self.add_edge_values(src, dst, type_id, values)
    }

    pub fn add_edge_values(
        &mut self,
        src: NodeId,
        dst: NodeId,
        type_id: usize,
        values: Vec<Option<AttrValue>>,
    ) -> Result<EdgeId, String> {
        let n = self.node_type.len() as NodeId;
        if src >= n || dst >= n {
            return Err(format!("edge endpoint out of range ({src}, {dst})"));
        }
        let (want_src, want_dst) = self.edge_ends[type_id];
        let (got_src, got_dst) = (
            self.node_type[src as usize] as usize,
            self.node_type[dst as usize] as usize,
        );
        if (got_src, got_dst) != (want_src, want_dst) {
            let decl = &self.schema.edge_types[type_id];
            return Err(format!(
                "edge type '{}' connects {} -> {}, got {} -> {}",
                decl.name,
                decl.src,
                decl.dst,
                self.schema.node_types[got_src].name,
                self.schema.node_types[got_dst].name
            ));
        }
        if self.edge_src.len() >= u32::MAX as usize {
            return Err("too many edges".into());
        }
        let id = self.edge_src.len() as EdgeId;
        push_row(&mut self.edge_columns[type_id], values, &mut self.strings)?;
        self.edge_src.push(src);
        self.edge_dst.push(dst);
        self.edge_type.push(type_id as u16);
        self.edge_row.push(self.edge_type_len[type_id]);
        self.edge_type_len[type_id] += 1;
        Ok(id)
    }

    /// Nodes that currently have no incident edge, in id order.
    pub fn isolated_nodes(&self) -> Vec<NodeId> {
        let mut touched = vec![false; self.node_type.len()];
        for (&s, &d) in self.edge_src.iter().zip(&self.edge_dst) {
            touched[s as usize] = true;
            touched[d as usize] = true;
        }
        touched
            .iter()
            .enumerate()
            .filter(|(_, t)| !**t)
            .map(|(v, _)| v as NodeId)
            .collect()
    }

    pub fn build(self, allow_isolated: bool) -> Result<AttributedGraph> {
        if !allow_isolated {
            if let Some(&v) = self.isolated_nodes().first() {
                return Err(Error::Graph(format!(
                    "node '{}' has no incident edge",
                    self.node_keys[v as usize]
                )));
            }
        }
        let n = self.node_type.len();
        let mut offsets = vec![0usize; n + 1];
        for (&s, &d) in self.edge_src.iter().zip(&self.edge_dst) {
            offsets[s as usize + 1] += 1;
            offsets[d as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let placeholder = Adj {
            neighbor: 0,
            edge: 0,
            outgoing: false,
        };
        let mut adjacency = vec![placeholder; 2 * self.edge_src.len()];
        for (e, (&s, &d)) in self.edge_src.iter().zip(&self.edge_dst).enumerate() {
            let e = e as EdgeId;
            adjacency[fill[s as usize]] = Adj {
                neighbor: d,
                edge: e,
                outgoing: true,
            };
            fill[s as usize] += 1;
            adjacency[fill[d as usize]] = Adj {
                neighbor: s,
                edge: e,
                outgoing: false,
            };
            fill[d as usize] += 1;
        }
        for v in 0..n {
            adjacency[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        let mut nodes_by_type = vec![Vec::new(); self.schema.node_types.len()];
        for (v, &t) in self.node_type.iter().enumerate() {
            nodes_by_type[t as usize].push(v as NodeId);
        }
        Ok(AttributedGraph {
            schema: self.schema,
            node_keys: self.node_keys,
            key_index: self.key_index,
            node_type: self.node_type,
            node_row: self.node_row,
            nodes_by_type,
            node_columns: self.node_columns,
            edge_src: self.edge_src,
            edge_dst: self.edge_dst,
            edge_type: self.edge_type,
            edge_row: self.edge_row,
            edge_columns: self.edge_columns,
            offsets,
            adjacency,
            strings: self.strings,
            pagerank: OnceLock::new(),
        })
    }
}

fn parse_values(
    decl: &indexmap::IndexMap<String, AttrKind>,
    attrs: &[(&str, &str)],
    type_name: &str,
) -> Result<Vec<Option<AttrValue>>, String> {
    let mut values = vec![None; decl.len()];
    for &(name, text) in attrs {
        let (idx, _, kind) = decl
            .get_full(name)
            .ok_or_else(|| format!("type '{type_name}' has no attribute '{name}'"))?;
        let value = match kind {
            AttrKind::Number => {
                let x: f64 = text
                    .trim()
                    .parse()
                    .map_err(|_| format!("attribute '{name}' expects a number, got '{text}'"))?;
                if !x.is_finite() {
                    return Err(format!("attribute '{name}' must be finite, got '{text}'"));
                }
                AttrValue::Number(x)
            }
            AttrKind::String => AttrValue::Str(text.to_owned()),
        };
        values[idx] = Some(value);
    }
    Ok(values)
}

fn push_row(
    columns: &mut [Column],
    values: Vec<Option<AttrValue>>,
    strings: &mut Interner,
) -> Result<(), String> {
    if values.len() != columns.len() {
        return Err(format!(
            "expected {} attribute values, got {}",
            columns.len(),
            values.len()
        ));
    }
    // Validate before touching any column so a failed row leaves no partial state.
    for (col, value) in columns.iter().zip(&values) {
        match (col, value) {
            (_, None)
            | (Column::Number(_), Some(AttrValue::Number(_)))
            | (Column::Category(_), Some(AttrValue::Str(_))) => {}
            (Column::Number(_), Some(v)) => return Err(format!("expected a number, got '{v}'")),
            (Column::Category(_), Some(v)) => return Err(format!("expected a string, got '{v}'")),
        }
    }
    for (col, value) in columns.iter_mut().zip(values) {
        match (col, value) {
            (Column::Number(c), Some(AttrValue::Number(x))) => c.push(x),
            (Column::Number(c), _) => c.push(f64::NAN),
            (Column::Category(c), Some(AttrValue::Str(s))) => c.push(strings.intern(&s)),
            (Column::Category(c), _) => c.push(MISSING_CATEGORY),
        }
    }
    Ok(())
}

fn split_attrs(field: &str) -> Result<Vec<(&str, &str)>, String> {
    field
        .split(';')
        .filter(|kv| !kv.trim().is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v))
                .ok_or_else(|| format!("attribute '{kv}' is not key=value"))
        })
        .collect()
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a graph from a JSON schema plus nodes/edges TSV files.
///
/// Nodes: `id<TAB>type<TAB>key=value;...`. Edges: `src<TAB>dst<TAB>type<TAB>key=value;...`.
/// Lines starting with `#` are skipped.
pub fn load_graph(
    schema_path: &Path,
    nodes_path: &Path,
    edges_path: &Path,
    options: LoadOptions,
) -> Result<AttributedGraph> {
    let schema = Schema::load(schema_path)?;
    let mut builder = GraphBuilder::new(schema)?;
    let nodes_name = nodes_path.display().to_string();
    let edges_name = edges_path.display().to_string();
    let input_err = |file: &str, line: usize, message: String| Error::Input {
        file: file.to_owned(),
        line,
        message,
    };

    let nodes_text = read(nodes_path)?;
    let mut node_lines = Vec::new();
    for (line, row) in data_lines(&nodes_text) {
        let mut fields = row.splitn(3, '\t');
        let (Some(key), Some(ty)) = (fields.next(), fields.next()) else {
            return Err(input_err(
                &nodes_name,
                line,
                "expected 'id<TAB>type[<TAB>attrs]'".into(),
            ));
        };
        let attrs = split_attrs(fields.next().unwrap_or(""))
            .map_err(|m| input_err(&nodes_name, line, m))?;
        builder
            .add_node(key.trim(), ty.trim(), &attrs)
            .map_err(|m| input_err(&nodes_name, line, m))?;
        node_lines.push(line);
    }

    let edges_text = read(edges_path)?;
    for (line, row) in data_lines(&edges_text) {
        let mut fields = row.splitn(4, '\t');
        let (Some(src), Some(dst), Some(ty)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(input_err(
                &edges_name,
                line,
                "expected 'src<TAB>dst<TAB>type[<TAB>attrs]'".into(),
            ));
        };
        let attrs = split_attrs(fields.next().unwrap_or(""))
            .map_err(|m| input_err(&edges_name, line, m))?;
        builder
            .add_edge(src.trim(), dst.trim(), ty.trim(), &attrs)
            .map_err(|m| input_err(&edges_name, line, m))?;
    }

    if !options.allow_isolated {
        if let Some(&v) = builder.isolated_nodes().first() {
            return Err(input_err(
                &nodes_name,
                node_lines[v as usize],
                format!(
                    "node '{}' has no incident edge (use --allow-isolated to accept)",
                    builder.node_keys[v as usize]
                ),
            ));
        }
    }
    builder.build(options.allow_isolated)
}
