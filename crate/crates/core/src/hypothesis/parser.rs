use std::fmt;

use super::{
    Aggregate, AttrOwner, BinOp, CmpOp, Constant, Direction, EdgeClause, Expr, Hypothesis,
    Modifier, NodeClause, PathPattern, PredicateOp,
};

/// Syntax error at a byte offset into the hypothesis text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

/// Parses hypothesis text. Type and attribute names are checked later, when
/// binding against a graph.
pub fn parse_hypothesis(text: &str) -> PResult<Hypothesis> {
    let mut p = Parser { src: text, pos: 0 };
    let h = p.hypothesis()?;
    p.skip_ws();
    if p.pos < text.len() {
        return p.err("unexpected trailing input");
    }
    Ok(h)
}

/// Finite numeric literal, as accepted for bare modifier values.
pub(crate) fn is_number(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i - start
    };
    let mut n = digits(&mut i);
    if i < b.len() && b[i] == b'.' {
        i += 1;
        n += digits(&mut i);
    }
    if n == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if digits(&mut i) == 0 {
            return false;
        }
    }
    i == b.len() && s.parse::<f64>().is_ok_and(f64::is_finite)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected '{tok}'"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit())))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return self.err(format!("expected {what}"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number(&mut self) -> PResult<f64> {
        self.skip_ws();
        let rest = self.rest();
        let b = rest.as_bytes();
        let mut i = 0;
        if i < b.len() && (b[i] == b'-' || b[i] == b'+') {
            i += 1;
        }
        while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
            i += 1;
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'-' || b[j] == b'+') {
                j += 1;
            }
            if j < b.len() && b[j].is_ascii_digit() {
                while j < b.len() && b[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let lit = &rest[..i];
        if !is_number(lit) {
            return self.err("expected a number");
        }
        self.pos += i;
        Ok(lit.parse().expect("checked literal"))
    }

    fn hypothesis(&mut self) -> PResult<Hypothesis> {
        let agg = match self.ident("aggregate")? {
            "avg" => Aggregate::Avg,
            "min" => Aggregate::Min,
            "max" => Aggregate::Max,
            other => {
                self.pos -= other.len();
                return self.err(format!(
                    "unknown aggregate '{other}' (expected avg, min or max)"
                ));
            }
        };
        self.expect("(")?;
        let target = self.expr()?;
        self.expect("|")?;
        self.skip_ws();
        if self.peek() == Some(')') {
            return self.err("empty pattern");
        }
        let pattern = self.pattern()?;
        self.expect(")")?;
        let op = if self.eat("<>") {
            PredicateOp::Ne
        } else if self.eat("=") {
            PredicateOp::Eq
        } else if self.eat(">") {
            PredicateOp::Gt
        } else if self.eat("<") {
            PredicateOp::Lt
        } else {
            return self.err("expected one of '=', '<>', '>', '<'");
        };
        let constant = self.number()?;
        Ok(Hypothesis {
            agg,
            target,
            pattern,
            op,
            constant,
        })
    }

    fn pattern(&mut self) -> PResult<PathPattern> {
        let mut steps = vec![self.clause()?];
        let mut links = Vec::new();
        loop {
            let direction = if self.eat("<-") {
                Direction::Backward
            } else if self.eat("-") {
                Direction::Forward
            } else {
                break;
            };
            let edge_type = self.ident("edge type")?.to_owned();
            self.expect(match direction {
                Direction::Forward => "->",
                Direction::Backward => "-",
            })?;
            links.push(EdgeClause {
                edge_type,
                direction,
            });
            steps.push(self.clause()?);
        }
        Ok(PathPattern { steps, links })
    }

    fn clause(&mut self) -> PResult<NodeClause> {
        let node_type = self.ident("node type")?.to_owned();
        let mut modifiers = Vec::new();
        if self.eat("[") && !self.eat("]") {
            loop {
                modifiers.push(self.modifier()?);
                if self.eat("]") {
                    break;
                }
                self.expect(";")?;
            }
        }
        Ok(NodeClause {
            node_type,
            modifiers,
        })
    }

    fn modifier(&mut self) -> PResult<Modifier> {
        let attr = self.ident("attribute name")?.to_owned();
        let op = if self.eat("<>") {
            CmpOp::Ne
        } else if self.eat(">=") {
            CmpOp::Ge
        } else if self.eat("<=") {
            CmpOp::Le
        } else if self.eat("=") {
            CmpOp::Eq
        } else if self.eat(">") {
            CmpOp::Gt
        } else if self.eat("<") {
            CmpOp::Lt
        } else {
            return self.err("expected a comparator");
        };
        self.skip_ws();
        let value = if self.peek() == Some('"') {
            Constant::Text(self.quoted()?)
        } else {
            let rest = self.rest();
            let end = rest.find([';', ']', '"']).unwrap_or(rest.len());
            let raw = rest[..end].trim();
            if raw.is_empty() {
                return self.err("expected a value");
            }
            self.pos += end;
            if is_number(raw) {
                Constant::Num(raw.parse().expect("checked literal"))
            } else {
                Constant::Text(raw.to_owned())
            }
        };
        Ok(Modifier { attr, op, value })
    }

    fn quoted(&mut self) -> PResult<String> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        self.pos = start;
        self.err("unterminated string")
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            self.skip_ws();
            if self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                return Ok(Expr::Num(-self.number()?));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c == '_' || c.is_ascii_alphabetic() => {
                let name = self.ident("attribute reference")?;
                if name == "mean" && self.eat("(") {
                    let a = self.expr()?;
                    self.expect(",")?;
                    let b = self.expr()?;
                    self.expect(")")?;
                    return Ok(Expr::Mean(Box::new(a), Box::new(b)));
                }
                if !self.rest().starts_with('.') {
                    return self.err(format!("expected '.attr' after '{name}'"));
                }
                self.pos += 1;
                let attr = self.ident("attribute name")?.to_owned();
                Ok(Expr::Attr {
                    owner: owner(name),
                    attr,
                })
            }
            _ => self.err("expected an expression"),
        }
    }
}

fn owner(name: &str) -> AttrOwner {
    let index = |prefix: &str| {
        name.strip_prefix(prefix)
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse::<usize>().ok())
    };
    if let Some(k) = index("step") {
        AttrOwner::Step(k)
    } else if let Some(k) = index("edge") {
        AttrOwner::Edge(k)
    } else {
        AttrOwner::Typed(name.to_owned())
    }
}
