//! The line-oriented input format.
//!
//! ```text
//! kgraph 2
//! vertex v
//! edge b color 1 from v to v    # from = source, to = range
//! edge r color 2 from v to v
//! square b r = r b              # b·r = r·b, color(b) < color(r)
//! ```
//!
//! `graph` documents are 1-graphs and take no `color` clause other than `color 1`.
//! `seqgraph` documents use the family/limit/map stanzas of [`cartan_core::seqgraph`].

use cartan_core::kgraph::{Skeleton, SquareSet};
use cartan_core::seqgraph::{self, ValidatedSeqSpace};
use cartan_core::{hash_text, DirectedGraph, KGraph};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {0}: {1}")]
    Parse(usize, String),
    #[error("validation failed: {0}")]
    Validation(#[from] cartan_core::Error),
}

#[derive(Clone, Debug)]
pub enum Parsed {
    Graph(DirectedGraph),
    KGraph(KGraph),
    SeqGraph(ValidatedSeqSpace),
}

#[derive(Clone, Debug)]
pub struct InputDocument {
    pub parsed: Parsed,
    /// SHA-256 of the canonical serialization.
    pub hash: String,
}

impl InputDocument {
    pub fn kind(&self) -> &'static str {
        match self.parsed {
            Parsed::Graph(_) => "graph",
            Parsed::KGraph(_) => "kgraph",
            Parsed::SeqGraph(_) => "seqgraph",
        }
    }

    /// The underlying k-graph for `graph` and `kgraph` documents.
    pub fn kgraph(&self) -> Option<&KGraph> {
        match &self.parsed {
            Parsed::Graph(g) => Some(g.as_kgraph()),
            Parsed::KGraph(g) => Some(g),
            Parsed::SeqGraph(_) => None,
        }
    }

    pub fn serialize(&self) -> String {
        match &self.parsed {
            Parsed::Graph(g) => serialize_skeleton("graph", g.as_kgraph()),
            Parsed::KGraph(g) => serialize_skeleton(&format!("kgraph {}", g.k()), g),
            Parsed::SeqGraph(s) => s.space().to_text(),
        }
    }
}

impl PartialEq for InputDocument {
    fn eq(&self, other: &Self) -> bool {
        match (&self.parsed, &other.parsed) {
            (Parsed::Graph(a), Parsed::Graph(b)) => {
                a.as_kgraph().content_hash() == b.as_kgraph().content_hash()
            }
            (Parsed::KGraph(a), Parsed::KGraph(b)) => a.content_hash() == b.content_hash(),
            (Parsed::SeqGraph(a), Parsed::SeqGraph(b)) => a.space().same_presentation(b.space()),
            _ => false,
        }
    }
}

fn serialize_skeleton(header: &str, g: &KGraph) -> String {
    let s = g.skeleton();
    let mut out = format!("{header}\n");
    for v in &s.vertices {
        out.push_str(&format!("vertex {v}\n"));
    }
    for e in &s.edges {
        let color = if g.k() > 1 {
            format!(" color {}", e.color + 1)
        } else {
            String::new()
        };
        out.push_str(&format!(
            "edge {}{color} from {} to {}\n",
            e.name, s.vertices[e.src], s.vertices[e.rng]
        ));
    }
    let mut squares = g.squares().squares.clone();
    squares.sort_by_key(|q| (q.e, q.f));
    for q in squares {
        let n = |e| g.edge_name(e);
        out.push_str(&format!(
            "square {} {} = {} {}\n",
            n(q.e),
            n(q.f),
            n(q.f2),
            n(q.e2)
        ));
    }
    out
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_input(text: &str) -> Result<InputDocument, InputError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let Some(&(hno, header)) = lines.first() else {
        return Err(InputError::Parse(
            1,
            "empty input: expected `graph`, `kgraph <k>` or `seqgraph`".into(),
        ));
    };
    let head: Vec<&str> = header.split_whitespace().collect();
    let parsed = match head.as_slice() {
        ["graph"] => Parsed::Graph(DirectedGraph::from_kgraph(parse_skeleton(
            1,
            &lines[1..],
            false,
        )?)?),
        ["kgraph", k] => {
            let k: usize = k
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| InputError::Parse(hno, format!("bad rank {k}")))?;
            Parsed::KGraph(parse_skeleton(k, &lines[1..], true)?)
        }
        ["seqgraph"] => {
            let space =
                seqgraph::parse_lines(&lines[1..]).map_err(|(l, m)| InputError::Parse(l, m))?;
            Parsed::SeqGraph(seqgraph::validate_seqspace(space)?)
        }
        _ => return Err(InputError::Parse(hno, format!("unknown header `{header}`"))),
    };
    let mut doc = InputDocument {
        parsed,
        hash: String::new(),
    };
    doc.hash = hash_text(&doc.serialize());
    Ok(doc)
}

fn parse_skeleton(k: usize, lines: &[(usize, &str)], colored: bool) -> Result<KGraph, InputError> {
    let mut s = Skeleton::new(k);
    let mut squares = SquareSet::new();
    for &(no, line) in lines {
        let err = |m: String| InputError::Parse(no, m);
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["vertex", v] => {
                s.add_vertex(v).map_err(|e| err(e.to_string()))?;
            }
            ["edge", name, rest @ ..] => {
                let (color, rest) = match rest {
                    ["color", c, rest @ ..] => {
                        let c: usize = c
                            .parse()
                            .ok()
                            .filter(|&c| c >= 1 && c <= k)
                            .ok_or_else(|| err(format!("color {c} out of range 1..={k}")))?;
                        (c - 1, rest)
                    }
                    _ if colored && k > 1 => return Err(err(format!("edge {name} needs a color"))),
                    _ => (0, rest),
                };
                let ["from", src, "to", rng] = rest else {
                    return Err(err(
                        "expected `edge <id> [color <c>] from <src> to <rng>`".into()
                    ));
                };
                s.add_edge(name, color, src, rng)
                    .map_err(|e| err(e.to_string()))?;
            }
            ["square", e, f, "=", f2, e2] => {
                if k < 2 {
                    return Err(err("squares need rank at least 2".into()));
                }
                let id = |n: &str| s.edge_id(n).ok_or_else(|| err(format!("unknown edge {n}")));
                let (ie, i_f, if2, ie2) = (id(e)?, id(f)?, id(f2)?, id(e2)?);
                let c = |i: usize| s.edges[i].color;
                if c(ie) >= c(i_f) {
                    return Err(err(format!(
                        "orientation: color({e}) must be less than color({f})"
                    )));
                }
                if c(if2) != c(i_f) || c(ie2) != c(ie) {
                    return Err(err(format!(
                        "orientation: {f2} must have the color of {f} and {e2} that of {e}"
                    )));
                }
                squares.push(ie, i_f, if2, ie2);
            }
            _ => return Err(err(format!("unrecognized line `{line}`"))),
        }
    }
    Ok(KGraph::validate(s, squares)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn k1_text_gives_k1() {
        let doc = parse_input(fixture("K1").unwrap()).unwrap();
        assert_eq!(doc.kind(), "kgraph");
        assert_eq!(
            doc.kgraph().unwrap().content_hash(),
            cartan_core::fixtures::k1().content_hash()
        );
    }

    #[test]
    fn reversed_square_is_an_orientation_error() {
        let text = "kgraph 2\nvertex v\nedge b color 1 from v to v\nedge r color 2 from v to v\nsquare r b = b r\n";
        match parse_input(text) {
            Err(InputError::Parse(5, m)) => assert!(m.starts_with("orientation")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tg1_text_gives_tg1() {
        let doc = parse_input(fixture("TG1").unwrap()).unwrap();
        let Parsed::SeqGraph(s) = &doc.parsed else {
            panic!()
        };
        assert!(s.space().same_presentation(&cartan_core::fixtures::tg1()));
    }

    #[test]
    fn fixtures_round_trip() {
        for name in crate::EXAMPLES {
            let doc = parse_input(fixture(name).unwrap()).unwrap();
            let again = parse_input(&doc.serialize()).unwrap();
            assert_eq!(doc, again, "{name}");
            assert_eq!(doc.hash, again.hash, "{name}");
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "graph\nvertex v\n\n# comment\nedge e from v to nowhere\n";
        assert!(matches!(parse_input(text), Err(InputError::Parse(5, _))));
        assert!(matches!(
            parse_input("graph\nvertex v\nbogus\n"),
            Err(InputError::Parse(3, _))
        ));
        assert!(matches!(
            parse_input("kgraph 2\nvertex v\nedge e from v to v\n"),
            Err(InputError::Parse(3, _))
        ));
        assert!(matches!(parse_input(""), Err(InputError::Parse(1, _))));
    }

    #[test]
    fn missing_squares_are_validation_errors() {
        let text = "kgraph 2\nvertex v\nedge b color 1 from v to v\nedge r color 2 from v to v\n";
        assert!(matches!(parse_input(text), Err(InputError::Validation(_))));
    }
}
