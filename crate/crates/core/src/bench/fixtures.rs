//! Named hypotheses over the synthetic presets.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCase {
    pub id: String,
    pub text: String,
}

fn case(id: &str, text: &str) -> HypothesisCase {
    HypothesisCase {
        id: id.into(),
        text: text.into(),
    }
}

/// Three node, three edge and three path hypotheses on the `desk` preset.
pub fn desk_hypotheses() -> Vec<HypothesisCase> {
    vec![
        case("N1", "avg(paper.citations | paper[year>=2015]) > 38"),
        case("N2", "avg(author.h_index | author[country=cn]) < 45"),
        case("N3", "max(paper.citations | paper[venue=vldb]) > 100"),
        case("E1", "avg(writes.order | author -writes-> paper) > 4"),
        case("E2", "avg(cites.weight | paper[year>=2010] -cites-> paper) > 0.45"),
        case("E3", "min(with_domain.score | paper -with_domain-> fos[level=3]) < 0.01"),
        case("P1", "avg(step3.citations | author -writes-> paper -cites-> paper) > 35"),
        case("P2", "avg(step3.h_index | author[country=us] -writes-> paper <-writes- author) > 30"),
        case(
            "P3",
            "avg(step4.level | author -writes-> paper[year>=2000] -cites-> paper -with_domain-> fos) > 1.2",
        ),
    ]
}

/// Path hypothesis whose relevant instances start at a handful of planted authors.
pub fn hard_path() -> HypothesisCase {
    case(
        "H1",
        "avg(step2.citations | author[flag=1] -writes-> paper[venue=vldb] -with_domain-> fos[level=3]) > 25",
    )
}

/// Edge hypothesis with an attribute independent of degree, for error curves.
pub fn convergence_edge() -> HypothesisCase {
    case("C1", "avg(cites.weight | paper -cites-> paper) > 0.5")
}

/// Node hypothesis whose truth holds with a margin of half a standard deviation.
pub fn margin_node() -> HypothesisCase {
    case("M1", "avg(paper.citations | paper[year>=2015]) > 32.5")
}

/// Path hypothesis on the `dense` preset.
pub fn dense_path() -> HypothesisCase {
    case(
        "D1",
        "avg(step3.price | user[age>=60] -follows-> user -rates-> item) > 40",
    )
}
