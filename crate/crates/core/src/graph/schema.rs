use std::collections::HashSet;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Number,
    String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTypeDecl {
    pub name: String,
    #[serde(default)]
    pub attrs: IndexMap<String, AttrKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTypeDecl {
    pub name: String,
    pub src: String,
    pub dst: String,
    #[serde(default)]
    pub attrs: IndexMap<String, AttrKind>,
}

/// Node and edge type declarations with their attribute names and kinds.
///
/// ```json
/// {"node_types": [{"name": "user", "attrs": {"age": "number", "gender": "string"}}],
///  "edge_types": [{"name": "rates", "src": "user", "dst": "movie", "attrs": {"rating": "number"}}]}
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub node_types: Vec<NodeTypeDecl>,
    #[serde(default)]
    pub edge_types: Vec<EdgeTypeDecl>,
}

impl NodeTypeDecl {
    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attrs.get_index_of(name)
    }

    pub fn kind_at(&self, index: usize) -> Option<AttrKind> {
        self.attrs.get_index(index).map(|(_, k)| *k)
    }
}

impl EdgeTypeDecl {
    pub fn attr_index(&self, name: &str) -> Option<usize> {
        self.attrs.get_index_of(name)
    }

    pub fn kind_at(&self, index: usize) -> Option<AttrKind> {
        self.attrs.get_index(index).map(|(_, k)| *k)
    }
}

impl Schema {
    pub fn parse_json(text: &str) -> Result<Self> {
        let schema: Schema =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_types.len() > u16::MAX as usize || self.edge_types.len() > u16::MAX as usize {
            return Err(Error::Schema("too many types".into()));
        }
        let mut seen = HashSet::new();
        for t in &self.node_types {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::Schema(format!("duplicate node type '{}'", t.name)));
            }
        }
        let mut seen = HashSet::new();
        for t in &self.edge_types {
            if !seen.insert(t.name.as_str()) {
                return Err(Error::Schema(format!("duplicate edge type '{}'", t.name)));
            }
            for end in [&t.src, &t.dst] {
                if self.node_type_id(end).is_none() {
                    return Err(Error::Schema(format!(
                        "edge type '{}' references unknown node type '{end}'",
                        t.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn node_type_id(&self, name: &str) -> Option<usize> {
        self.node_types.iter().position(|t| t.name == name)
    }

    pub fn edge_type_id(&self, name: &str) -> Option<usize> {
        self.edge_types.iter().position(|t| t.name == name)
    }

    /// `(src type id, dst type id)` of an edge type.
    pub fn edge_endpoint_types(&self, edge_type: usize) -> (usize, usize) {
        let t = &self.edge_types[edge_type];
        (
            self.node_type_id(&t.src).expect("validated"),
            self.node_type_id(&t.dst).expect("validated"),
        )
    }
}
