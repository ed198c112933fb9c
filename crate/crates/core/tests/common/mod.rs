#![allow(dead_code)]

use graphhypo::graph::{
    AttrKind, AttrRef, AttrValue, EdgeTypeDecl, GraphBuilder, NodeTypeDecl, Schema,
};
use graphhypo::hypothesis::{
    Aggregate, AttrOwner, BinOp, CmpOp, Constant, Direction, EdgeClause, Expr, Modifier,
    NodeClause, PathPattern, PredicateOp,
};
use graphhypo::{AttributedGraph, EdgeId, Hypothesis, NodeId};
use indexmap::IndexMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Hypothesis ASTs for parser round trips. Names avoid the reserved owners
// (`stepK`, `edgeK`) and the `mean` function.

fn ident() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("user".to_owned()),
        Just("item".to_owned()),
        Just("a_b".to_owned()),
        Just("T9".to_owned()),
        "[a-d][a-z_0-9]{0,5}x",
    ]
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-1000i32..1000).prop_map(f64::from),
        (-1e6f64..1e6),
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
    ]
}

fn constant() -> impl Strategy<Value = Constant> {
    prop_oneof![
        finite().prop_map(Constant::Num),
        "[a-zA-Z0-9 _.<>=;\\]\"\\\\-]{0,8}".prop_map(Constant::Text),
    ]
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Gt),
        Just(CmpOp::Lt),
        Just(CmpOp::Ge),
        Just(CmpOp::Le),
    ]
}

fn clause() -> impl Strategy<Value = NodeClause> {
    (
        ident(),
        prop::collection::vec(
            (ident(), cmp_op(), constant()).prop_map(|(attr, op, value)| Modifier {
                attr,
                op,
                value,
            }),
            0..3,
        ),
    )
        .prop_map(|(node_type, modifiers)| NodeClause {
            node_type,
            modifiers,
        })
}

fn pattern() -> impl Strategy<Value = PathPattern> {
    (0usize..=4).prop_flat_map(|l| {
        (
            prop::collection::vec(clause(), l + 1),
            prop::collection::vec(
                (ident(), any::<bool>()).prop_map(|(edge_type, fwd)| EdgeClause {
                    edge_type,
                    direction: if fwd {
                        Direction::Forward
                    } else {
                        Direction::Backward
                    },
                }),
                l,
            ),
        )
            .prop_map(|(steps, links)| PathPattern { steps, links })
    })
}

fn expr(l: usize) -> impl Strategy<Value = Expr> {
    let owner = if l == 0 {
        prop_oneof![
            (1..=l + 1).prop_map(AttrOwner::Step),
            ident().prop_map(AttrOwner::Typed)
        ]
        .boxed()
    } else {
        prop_oneof![
            (1..=l + 1).prop_map(AttrOwner::Step),
            (1..=l).prop_map(AttrOwner::Edge),
            ident().prop_map(AttrOwner::Typed),
        ]
        .boxed()
    };
    let leaf = prop_oneof![
        (owner, ident()).prop_map(|(owner, attr)| Expr::Attr { owner, attr }),
        (0u32..1000).prop_map(|x| Expr::Num(f64::from(x))),
        (0.0f64..1e9).prop_map(Expr::Num),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Bin(
                op,
                Box::new(a),
                Box::new(b)
            )),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Mean(Box::new(a), Box::new(b))),
        ]
    })
}

pub fn arb_hypothesis() -> impl Strategy<Value = Hypothesis> {
    pattern().prop_flat_map(|pattern| {
        let l = pattern.len();
        (
            prop_oneof![
                Just(Aggregate::Avg),
                Just(Aggregate::Min),
                Just(Aggregate::Max)
            ],
            expr(l),
            prop_oneof![
                Just(PredicateOp::Eq),
                Just(PredicateOp::Ne),
                Just(PredicateOp::Gt),
                Just(PredicateOp::Lt)
            ],
            finite(),
        )
            .prop_map(move |(agg, target, op, constant)| Hypothesis {
                agg,
                target,
                pattern: pattern.clone(),
                op,
                constant,
            })
    })
}

// Small random two-type graphs with parallel edges, self-loops and missing values.

pub const TYPES: [&str; 2] = ["a", "b"];
pub const EDGE_TYPES: [(&str, &str, &str); 4] = [
    ("ab", "a", "b"),
    ("ba", "b", "a"),
    ("aa", "a", "a"),
    ("bb", "b", "b"),
];

fn toy_schema() -> Schema {
    let attrs: IndexMap<String, AttrKind> = [
        ("x".to_owned(), AttrKind::Number),
        ("c".to_owned(), AttrKind::String),
    ]
    .into_iter()
    .collect();
    Schema {
        node_types: TYPES
            .iter()
            .map(|&name| NodeTypeDecl {
                name: name.to_owned(),
                attrs: attrs.clone(),
            })
            .collect(),
        edge_types: EDGE_TYPES
            .iter()
            .map(|&(name, src, dst)| EdgeTypeDecl {
                name: name.to_owned(),
                src: src.to_owned(),
                dst: dst.to_owned(),
                attrs: [("w".to_owned(), AttrKind::Number)].into_iter().collect(),
            })
            .collect(),
    }
}

pub fn random_graph(seed: u64, max_nodes: usize) -> AttributedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new(toy_schema()).unwrap();
    let n = rng.random_range(2..=max_nodes);
    let mut types = Vec::with_capacity(n);
    for i in 0..n {
        let t = rng.random_range(0..2);
        let x =
            (rng.random::<f64>() > 0.1).then(|| AttrValue::Number(rng.random_range(0..5) as f64));
        let c = (rng.random::<f64>() > 0.1)
            .then(|| AttrValue::Str(["p", "q"][rng.random_range(0..2)].to_owned()));
        b.add_node_values(format!("n{i}"), t, vec![x, c]).unwrap();
        types.push(t);
    }
    let m = rng.random_range(n..=4 * n);
    for _ in 0..m {
        let s = rng.random_range(0..n);
        let d = if rng.random::<f64>() < 0.05 {
            s
        } else {
            rng.random_range(0..n)
        };
        let et = EDGE_TYPES
            .iter()
            .position(|&(_, src, dst)| src == TYPES[types[s]] && dst == TYPES[types[d]])
            .unwrap();
        let w = (rng.random::<f64>() > 0.1).then(|| AttrValue::Number(rng.random::<f64>()));
        b.add_edge_values(s as NodeId, d as NodeId, et, vec![w])
            .unwrap();
        if rng.random::<f64>() < 0.1 {
            b.add_edge_values(s as NodeId, d as NodeId, et, vec![None])
                .unwrap();
        }
    }
    b.build(true).unwrap()
}

/// A random length-`l` pattern over the toy schema, target `step1.x`.
pub fn random_pattern(rng: &mut ChaCha8Rng, l: usize) -> Hypothesis {
    let mut steps = Vec::new();
    let mut links = Vec::new();
    let mut t = rng.random_range(0..2);
    for k in 0..=l {
        if k > 0 {
            let fwd = rng.random::<bool>();
            let next = rng.random_range(0..2);
            let (src, dst) = if fwd { (t, next) } else { (next, t) };
            let name = EDGE_TYPES
                .iter()
                .find(|&&(_, s, d)| s == TYPES[src] && d == TYPES[dst])
                .unwrap()
                .0;
            links.push(EdgeClause {
                edge_type: name.to_owned(),
                direction: if fwd {
                    Direction::Forward
                } else {
                    Direction::Backward
                },
            });
            t = next;
        }
        let mut modifiers = Vec::new();
        if rng.random::<f64>() < 0.3 {
            modifiers.push(Modifier {
                attr: "x".into(),
                op: [CmpOp::Ge, CmpOp::Lt, CmpOp::Ne][rng.random_range(0..3)],
                value: Constant::Num(rng.random_range(0..5) as f64),
            });
        }
        if rng.random::<f64>() < 0.2 {
            modifiers.push(Modifier {
                attr: "c".into(),
                op: if rng.random() { CmpOp::Eq } else { CmpOp::Ne },
                value: Constant::Text("p".into()),
            });
        }
        steps.push(NodeClause {
            node_type: TYPES[t].to_owned(),
            modifiers,
        });
    }
    Hypothesis {
        agg: Aggregate::Avg,
        target: Expr::Attr {
            owner: AttrOwner::Step(1),
            attr: "x".into(),
        },
        pattern: PathPattern { steps, links },
        op: PredicateOp::Gt,
        constant: 1.0,
    }
}

fn clause_holds(g: &AttributedGraph, v: NodeId, c: &NodeClause) -> bool {
    let schema = g.schema();
    if schema.node_types[g.node_type(v)].name != c.node_type {
        return false;
    }
    let decl = &schema.node_types[g.node_type(v)];
    c.modifiers.iter().all(|m| {
        let idx = decl.attr_index(&m.attr).unwrap();
        match (g.node_attr(v, idx), &m.value) {
            (None, _) => false,
            (Some(AttrRef::Number(x)), Constant::Num(k)) => match m.op {
                CmpOp::Eq => x == *k,
                CmpOp::Ne => x != *k,
                CmpOp::Gt => x > *k,
                CmpOp::Lt => x < *k,
                CmpOp::Ge => x >= *k,
                CmpOp::Le => x <= *k,
            },
            (Some(AttrRef::Str(s)), Constant::Text(k)) => match m.op {
                CmpOp::Eq => s == k,
                CmpOp::Ne => s != k,
                _ => unreachable!(),
            },
            _ => unreachable!(),
        }
    })
}

pub type Instance = (Vec<NodeId>, Vec<EdgeId>);

/// Every simple path instance, by recursion over the raw edge list.
pub fn naive_paths(g: &AttributedGraph, h: &Hypothesis, member: Option<&[bool]>) -> Vec<Instance> {
    let edge_type_id = |name: &str| g.schema().edge_type_id(name).unwrap();
    let in_scope = |v: NodeId| member.is_none_or(|m| m[v as usize]);
    let mut out = Vec::new();

    fn extend(
        g: &AttributedGraph,
        h: &Hypothesis,
        nodes: &mut Vec<NodeId>,
        edges: &mut Vec<EdgeId>,
        ok: &dyn Fn(NodeId, usize) -> bool,
        link_type: &dyn Fn(usize) -> usize,
        out: &mut Vec<Instance>,
    ) {
        let k = edges.len();
        if k == h.pattern.len() {
            out.push((nodes.clone(), edges.clone()));
            return;
        }
        let last = *nodes.last().unwrap();
        let want = link_type(k);
        for e in 0..g.edge_count() as EdgeId {
            if g.edge_type(e) != want {
                continue;
            }
            let (s, d) = g.edge_endpoints(e);
            let next = match h.pattern.links[k].direction {
                Direction::Forward if s == last => d,
                Direction::Backward if d == last => s,
                _ => continue,
            };
            if nodes.contains(&next) || !ok(next, k + 1) {
                continue;
            }
            nodes.push(next);
            edges.push(e);
            extend(g, h, nodes, edges, ok, link_type, out);
            nodes.pop();
            edges.pop();
        }
    }

    let ok = |v: NodeId, step: usize| in_scope(v) && clause_holds(g, v, &h.pattern.steps[step]);
    let link_type = |k: usize| edge_type_id(&h.pattern.links[k].edge_type);
    for v in 0..g.node_count() as NodeId {
        if ok(v, 0) {
            extend(
                g,
                h,
                &mut vec![v],
                &mut Vec::new(),
                &ok,
                &link_type,
                &mut out,
            );
        }
    }
    out.sort();
    out
}
