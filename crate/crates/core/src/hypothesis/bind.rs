use crate::error::{Error, Result};
use crate::graph::{Adj, AttrKind, AttributedGraph, EdgeId, NodeId};

use super::{AttrOwner, BinOp, CmpOp, Constant, Direction, Expr, Hypothesis, NodeClause};

#[derive(Debug, Clone)]
enum BoundModifier {
    Num {
        attr: usize,
        op: CmpOp,
        value: f64,
    },
    /// `id: None` when no attribute anywhere carries the string.
    Cat {
        attr: usize,
        eq: bool,
        id: Option<u32>,
    },
}

/// A node clause resolved against a schema.
#[derive(Debug, Clone)]
pub struct BoundClause {
    pub type_id: usize,
    modifiers: Vec<BoundModifier>,
}

impl BoundClause {
    pub fn bind(clause: &NodeClause, g: &AttributedGraph) -> Result<Self> {
        let schema = g.schema();
        let type_id = schema
            .node_type_id(&clause.node_type)
            .ok_or_else(|| Error::Binding(format!("unknown node type '{}'", clause.node_type)))?;
        let decl = &schema.node_types[type_id];
        let mut modifiers = Vec::with_capacity(clause.modifiers.len());
        for m in &clause.modifiers {
            let attr = decl.attr_index(&m.attr).ok_or_else(|| {
                Error::Binding(format!(
                    "node type '{}' has no attribute '{}'",
                    decl.name, m.attr
                ))
            })?;
            let bound = match (decl.kind_at(attr).expect("index from decl"), &m.value) {
                (AttrKind::Number, Constant::Num(x)) => BoundModifier::Num {
                    attr,
                    op: m.op,
                    value: *x,
                },
                (AttrKind::Number, Constant::Text(s)) => {
                    return Err(Error::Binding(format!(
                        "attribute '{}.{}' is numeric, cannot compare with '{s}'",
                        decl.name, m.attr
                    )))
                }
                (AttrKind::String, value) => {
                    let eq = match m.op {
                        CmpOp::Eq => true,
                        CmpOp::Ne => false,
                        op => {
                            return Err(Error::Binding(format!(
                                "string attribute '{}.{}' only supports = and <>, got {op}",
                                decl.name, m.attr
                            )))
                        }
                    };
                    let text = match value {
                        Constant::Text(s) => s.clone(),
                        Constant::Num(x) => x.to_string(),
                    };
                    BoundModifier::Cat {
                        attr,
                        eq,
                        id: g.category_id(&text),
                    }
                }
            };
            modifiers.push(bound);
        }
        Ok(Self { type_id, modifiers })
    }

    /// Type check plus every modifier; a missing attribute never matches.
    #[inline]
    pub fn matches(&self, g: &AttributedGraph, v: NodeId) -> bool {
        g.node_type(v) == self.type_id && self.modifiers_hold(g, v)
    }

    fn modifiers_hold(&self, g: &AttributedGraph, v: NodeId) -> bool {
        self.modifiers.iter().all(|m| match *m {
            BoundModifier::Num { attr, op, value } => {
                g.node_number(v, attr).is_some_and(|x| op.holds(x, value))
            }
            BoundModifier::Cat { attr, eq, id } => match g.node_category(v, attr) {
                None => false,
                Some(c) => (Some(c) == id) == eq,
            },
        })
    }
}

/// `node_matches(g, v, clause)` for a one-off check; binds the clause first.
pub fn node_matches(g: &AttributedGraph, v: NodeId, clause: &NodeClause) -> Result<bool> {
    Ok(BoundClause::bind(clause, g)?.matches(g, v))
}

#[derive(Debug, Clone, Copy)]
pub struct BoundLink {
    pub edge_type: usize,
    pub direction: Direction,
}

impl BoundLink {
    /// Whether walking `a` from the earlier step follows this link.
    #[inline]
    pub fn follows(&self, g: &AttributedGraph, a: &Adj) -> bool {
        g.edge_type(a.edge) == self.edge_type
            && a.outgoing == (self.direction == Direction::Forward)
    }
}

#[derive(Debug, Clone)]
enum BoundExpr {
    Node { step: usize, attr: usize },
    Edge { link: usize, attr: usize },
    Num(f64),
    Neg(Box<BoundExpr>),
    Bin(BinOp, Box<BoundExpr>, Box<BoundExpr>),
    Mean(Box<BoundExpr>, Box<BoundExpr>),
}

/// One concrete match of a pattern: `nodes.len() == edges.len() + 1`.
#[derive(Debug, Clone, Copy)]
pub struct PathInstance<'a> {
    pub nodes: &'a [NodeId],
    pub edges: &'a [EdgeId],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    MissingAttr,
    DivisionByZero,
}

/// A hypothesis resolved against a graph schema.
#[derive(Debug, Clone)]
pub struct BoundHypothesis {
    pub hypothesis: Hypothesis,
    pub steps: Vec<BoundClause>,
    pub links: Vec<BoundLink>,
    target: BoundExpr,
}

impl BoundHypothesis {
    pub fn new(h: &Hypothesis, g: &AttributedGraph) -> Result<Self> {
        let schema = g.schema();
        let steps = h
            .pattern
            .steps
            .iter()
            .map(|c| BoundClause::bind(c, g))
            .collect::<Result<Vec<_>>>()?;
        let mut links = Vec::with_capacity(h.pattern.links.len());
        for (i, link) in h.pattern.links.iter().enumerate() {
            let edge_type = schema
                .edge_type_id(&link.edge_type)
                .ok_or_else(|| Error::Binding(format!("unknown edge type '{}'", link.edge_type)))?;
            let (src, dst) = schema.edge_endpoint_types(edge_type);
            let (a, b) = (steps[i].type_id, steps[i + 1].type_id);
            let ok = match link.direction {
                Direction::Forward => (a, b) == (src, dst),
                Direction::Backward => (a, b) == (dst, src),
            };
            if !ok {
                let decl = &schema.edge_types[edge_type];
                return Err(Error::Binding(format!(
                    "edge type '{}' ({} -> {}) cannot link step {} ({}) to step {} ({})",
                    decl.name,
                    decl.src,
                    decl.dst,
                    i + 1,
                    h.pattern.steps[i].node_type,
                    i + 2,
                    h.pattern.steps[i + 1].node_type
                )));
            }
            links.push(BoundLink {
                edge_type,
                direction: link.direction,
            });
        }
        let target = bind_expr(&h.target, h, &steps, &links, g)?;
        Ok(Self {
            hypothesis: h.clone(),
            steps,
            links,
            target,
        })
    }

    /// Pattern length `l`.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Whether `v` matches clause `step` (0-based).
    #[inline]
    pub fn step_matches(&self, g: &AttributedGraph, step: usize, v: NodeId) -> bool {
        self.steps[step].matches(g, v)
    }

    pub fn eval(&self, g: &AttributedGraph, path: PathInstance<'_>) -> Result<f64, EvalError> {
        eval(&self.target, g, path)
    }

    /// Target value on one instance. Missing attributes and division by zero are errors.
    pub fn eval_target(&self, g: &AttributedGraph, path: PathInstance<'_>) -> Result<f64> {
        if path.nodes.len() != self.steps.len() || path.edges.len() != self.links.len() {
            return Err(Error::Eval(format!(
                "instance has {} nodes and {} edges, pattern needs {} and {}",
                path.nodes.len(),
                path.edges.len(),
                self.steps.len(),
                self.links.len()
            )));
        }
        self.eval(g, path).map_err(|e| {
            Error::Eval(match e {
                EvalError::MissingAttr => "missing numeric attribute on path instance".into(),
                EvalError::DivisionByZero => "division by zero".into(),
            })
        })
    }
}

fn bind_edge_attr(
    g: &AttributedGraph,
    links: &[BoundLink],
    link: usize,
    attr: &str,
) -> Result<BoundExpr> {
    let decl = &g.schema().edge_types[links[link].edge_type];
    let index = decl.attr_index(attr).ok_or_else(|| {
        Error::Binding(format!(
            "edge type '{}' has no attribute '{attr}'",
            decl.name
        ))
    })?;
    if decl.kind_at(index) != Some(AttrKind::Number) {
        return Err(Error::Binding(format!(
            "target attribute '{}.{attr}' is not numeric",
            decl.name
        )));
    }
    Ok(BoundExpr::Edge { link, attr: index })
}

fn bind_expr(
    e: &Expr,
    h: &Hypothesis,
    steps: &[BoundClause],
    links: &[BoundLink],
    g: &AttributedGraph,
) -> Result<BoundExpr> {
    let schema = g.schema();
    let recur = |e: &Expr| bind_expr(e, h, steps, links, g).map(Box::new);
    Ok(match e {
        Expr::Num(x) => BoundExpr::Num(*x),
        Expr::Neg(a) => BoundExpr::Neg(recur(a)?),
        Expr::Bin(op, a, b) => BoundExpr::Bin(*op, recur(a)?, recur(b)?),
        Expr::Mean(a, b) => BoundExpr::Mean(recur(a)?, recur(b)?),
        Expr::Attr {
            owner: AttrOwner::Edge(k),
            attr,
        } => {
            if *k == 0 || *k > links.len() {
                return Err(Error::Binding(format!(
                    "edge{k} out of range (pattern has {} links)",
                    links.len()
                )));
            }
            bind_edge_attr(g, links, k - 1, attr)?
        }
        Expr::Attr {
            owner: AttrOwner::Typed(name),
            attr,
        } if !h.pattern.steps.iter().any(|c| &c.node_type == name)
            && schema.edge_type_id(name).is_some() =>
        {
            let type_id = schema.edge_type_id(name).expect("checked");
            let hits: Vec<usize> = (0..links.len())
                .filter(|&i| links[i].edge_type == type_id)
                .collect();
            match hits.as_slice() {
                [i] => bind_edge_attr(g, links, *i, attr)?,
                [] => {
                    return Err(Error::Binding(format!(
                        "'{name}.{attr}' does not name a pattern link"
                    )))
                }
                _ => {
                    return Err(Error::Binding(format!(
                        "'{name}.{attr}' is ambiguous; use edgeK.{attr}"
                    )))
                }
            }
        }
        Expr::Attr { owner, attr } => {
            let step = match owner {
                AttrOwner::Step(k) if *k >= 1 && *k <= steps.len() => k - 1,
                AttrOwner::Step(k) => {
                    return Err(Error::Binding(format!(
                        "step{k} out of range (pattern has {} steps)",
                        steps.len()
                    )))
                }
                AttrOwner::Typed(name) => {
                    let hits: Vec<usize> = h
                        .pattern
                        .steps
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| &c.node_type == name)
                        .map(|(i, _)| i)
                        .collect();
                    match hits.as_slice() {
                        [i] => *i,
                        [] => {
                            return Err(Error::Binding(format!(
                                "'{name}.{attr}' does not name a pattern step"
                            )))
                        }
                        _ => {
                            return Err(Error::Binding(format!(
                                "'{name}.{attr}' is ambiguous; use stepK.{attr}"
                            )))
                        }
                    }
                }
                AttrOwner::Edge(_) => unreachable!("handled above"),
            };
            let decl = &schema.node_types[steps[step].type_id];
            let index = decl.attr_index(attr).ok_or_else(|| {
                Error::Binding(format!(
                    "node type '{}' has no attribute '{attr}'",
                    decl.name
                ))
            })?;
            if decl.kind_at(index) != Some(AttrKind::Number) {
                return Err(Error::Binding(format!(
                    "target attribute '{}.{attr}' is not numeric",
                    decl.name
                )));
            }
            BoundExpr::Node { step, attr: index }
        }
    })
}

fn eval(e: &BoundExpr, g: &AttributedGraph, p: PathInstance<'_>) -> Result<f64, EvalError> {
    Ok(match e {
        BoundExpr::Node { step, attr } => g
            .node_number(p.nodes[*step], *attr)
            .ok_or(EvalError::MissingAttr)?,
        BoundExpr::Edge { link, attr } => g
            .edge_number(p.edges[*link], *attr)
            .ok_or(EvalError::MissingAttr)?,
        BoundExpr::Num(x) => *x,
        BoundExpr::Neg(a) => -eval(a, g, p)?,
        BoundExpr::Mean(a, b) => (eval(a, g, p)? + eval(b, g, p)?) / 2.0,
        BoundExpr::Bin(op, a, b) => {
            let (x, y) = (eval(a, g, p)?, eval(b, g, p)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div if y == 0.0 => return Err(EvalError::DivisionByZero),
                BinOp::Div => x / y,
            }
        }
    })
}
