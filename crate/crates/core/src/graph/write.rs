use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{AttrRef, AttributedGraph, NodeId};
use crate::error::{Error, Result};

fn write_attrs<'a, W: Write>(
    out: &mut W,
    attrs: impl Iterator<Item = (String, AttrRef<'a>)>,
) -> std::io::Result<()> {
    let mut first = true;
    for (name, value) in attrs {
        if !first {
            out.write_all(b";")?;
        }
        first = false;
        match value {
            AttrRef::Number(x) => write!(out, "{name}={x}")?,
            AttrRef::Str(s) => write!(out, "{name}={s}")?,
        }
    }
    Ok(())
}

/// Writes the nodes TSV. Numbers use the shortest representation that parses back exactly.
pub fn write_nodes<W: Write>(g: &AttributedGraph, out: &mut W) -> std::io::Result<()> {
    for v in 0..g.node_count() as NodeId {
        let t = g.node_type(v);
        let decl = &g.schema.node_types[t];
        write!(out, "{}\t{}\t", g.node_key(v), decl.name)?;
        let attrs = decl
            .attrs
            .keys()
            .enumerate()
            .filter_map(|(i, name)| g.node_attr(v, i).map(|a| (name.clone(), a)));
        write_attrs(out, attrs)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_edges<W: Write>(g: &AttributedGraph, out: &mut W) -> std::io::Result<()> {
    for e in 0..g.edge_count() as u32 {
        let t = g.edge_type(e);
        let decl = &g.schema.edge_types[t];
        let (s, d) = g.edge_endpoints(e);
        write!(out, "{}\t{}\t{}\t", g.node_key(s), g.node_key(d), decl.name)?;
        let attrs = decl
            .attrs
            .keys()
            .enumerate()
            .filter_map(|(i, name)| g.edge_attr(e, i).map(|a| (name.clone(), a)));
        write_attrs(out, attrs)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes `schema.json`, `nodes.tsv` and `edges.tsv` into `dir`.
pub fn save_graph(g: &AttributedGraph, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let schema_path = dir.join("schema.json");
    std::fs::write(&schema_path, g.schema.to_json() + "\n")
        .map_err(|e| Error::io(&schema_path, e))?;
    let nodes_path = dir.join("nodes.tsv");
    let mut out = BufWriter::new(File::create(&nodes_path).map_err(|e| Error::io(&nodes_path, e))?);
    write_nodes(g, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&nodes_path, e))?;
    let edges_path = dir.join("edges.tsv");
    let mut out = BufWriter::new(File::create(&edges_path).map_err(|e| Error::io(&edges_path, e))?);
    write_edges(g, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&edges_path, e))?;
    Ok(())
}
