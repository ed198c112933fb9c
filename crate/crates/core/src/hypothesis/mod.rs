//! Hypothesis language.
//!
//! ```text
//! avg(step2.citation | author[org=MSR] <-writes- paper -writes-> author[org=MSR]) > 100
//! ```
//!
//! A hypothesis aggregates a target expression over every instance of a path
//! pattern and compares the aggregate with a constant. Node hypotheses are
//! patterns of length 0, edge hypotheses patterns of length 1.

mod bind;
mod parser;

use std::fmt;

pub use bind::{node_matches, BoundClause, BoundHypothesis, BoundLink, EvalError, PathInstance};
pub use parser::{parse_hypothesis, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Avg,
    Min,
    Max,
}

/// Comparison between the aggregate and the hypothesis constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredicateOp {
    Eq,
    Ne,
    Gt,
    Lt,
}

impl PredicateOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            PredicateOp::Eq => lhs == rhs,
            PredicateOp::Ne => lhs != rhs,
            PredicateOp::Gt => lhs > rhs,
            PredicateOp::Lt => lhs < rhs,
        }
    }

    pub fn is_two_sided(self) -> bool {
        matches!(self, PredicateOp::Eq | PredicateOp::Ne)
    }
}

/// Modifier comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
}

impl CmpOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Le => lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constant {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modifier {
    pub attr: String,
    pub op: CmpOp,
    pub value: Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeClause {
    pub node_type: String,
    pub modifiers: Vec<Modifier>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `-r->`: the edge leaves the earlier step.
    Forward,
    /// `<-r-`: the edge enters the earlier step.
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeClause {
    pub edge_type: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub steps: Vec<NodeClause>,
    pub links: Vec<EdgeClause>,
}

impl PathPattern {
    /// Number of links `l`.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Who owns an attribute referenced by the target expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttrOwner {
    /// `stepK`, 1-based.
    Step(usize),
    /// `edgeK`, 1-based.
    Edge(usize),
    /// `Type.attr`, resolved to the single step of that type.
    Typed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Attr { owner: AttrOwner, attr: String },
    Num(f64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Mean(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub agg: Aggregate,
    pub target: Expr,
    pub pattern: PathPattern,
    pub op: PredicateOp,
    pub constant: f64,
}

impl Hypothesis {
    /// Pattern length `l`.
    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_node(&self) -> bool {
        self.pattern.links.is_empty()
    }

    pub fn is_edge(&self) -> bool {
        self.pattern.links.len() == 1
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Avg => "avg",
            Aggregate::Min => "min",
            Aggregate::Max => "max",
        })
    }
}

impl fmt::Display for PredicateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateOp::Eq => "=",
            PredicateOp::Ne => "<>",
            PredicateOp::Gt => ">",
            PredicateOp::Lt => "<",
        })
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
        })
    }
}

/// Text that would read back as something else must be quoted.
fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.trim() != s
        || parser::is_number(s)
        || s.starts_with(['<', '>', '='])
        || s.contains([';', ']', '"', '\\', '\n', '\r'])
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Num(x) => write!(f, "{x}"),
            Constant::Text(s) if needs_quotes(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
            Constant::Text(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for NodeClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.node_type)?;
        for (i, m) in self.modifiers.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}{}{}", m.attr, m.op, m.value)?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.steps[0])?;
        for (link, step) in self.links.iter().zip(&self.steps[1..]) {
            match link.direction {
                Direction::Forward => write!(f, " -{}-> {step}", link.edge_type)?,
                Direction::Backward => write!(f, " <-{}- {step}", link.edge_type)?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for AttrOwner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrOwner::Step(k) => write!(f, "step{k}"),
            AttrOwner::Edge(k) => write!(f, "edge{k}"),
            AttrOwner::Typed(t) => f.write_str(t),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Attr { owner, attr } => write!(f, "{owner}.{attr}"),
            Expr::Num(x) => write!(f, "{x}"),
            // `-3` would read back as the literal -3, so negated literals keep parentheses.
            Expr::Neg(e) if matches!(**e, Expr::Num(_) | Expr::Bin(..)) => write!(f, "-({e})"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Mean(a, b) => write!(f, "mean({a}, {b})"),
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({} | {}) {} {}",
            self.agg, self.target, self.pattern, self.op, self.constant
        )
    }
}
