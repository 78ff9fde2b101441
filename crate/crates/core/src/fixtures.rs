//! The worked examples used throughout the tests and the CLI.

use crate::graph::DirectedGraph;
use crate::kgraph::{KGraph, Skeleton, SquareSet};

/// One vertex `v` with a loop `e`.
pub fn g1() -> DirectedGraph {
    DirectedGraph::new(&["v"], &[("e", "v", "v")]).unwrap()
}

/// A 2-cycle: `a` from `w` to `v`, `b` from `v` to `w`.
pub fn g2() -> DirectedGraph {
    DirectedGraph::new(&["v", "w"], &[("a", "w", "v"), ("b", "v", "w")]).unwrap()
}

/// A loop `e` at `v` with an entrance through `u`.
pub fn g3() -> DirectedGraph {
    DirectedGraph::new(&["v", "u"], &[("e", "v", "v"), ("f", "u", "v"), ("m", "v", "u")]).unwrap()
}

/// The 2-graph skeleton with a blue loop `b` and a red loop `r` at `v`, and its square.
pub fn k1_presentation() -> (Skeleton, SquareSet) {
    let mut s = Skeleton::new(2);
    s.add_vertex("v").unwrap();
    s.add_edge("b", 0, "v", "v").unwrap();
    s.add_edge("r", 1, "v", "v").unwrap();
    let mut q = SquareSet::new();
    q.push_named(&s, "b", "r", "r", "b").unwrap();
    (s, q)
}

pub fn k1() -> KGraph {
    let (s, q) = k1_presentation();
    KGraph::validate(s, q).unwrap()
}

/// Three vertices: `v` with loops `e_b`, `e_r`; `u` with loops `c_b`, `c_r` feeding
/// `v` through `alpha_b`, `rho_r`; `w` with loops `g_b`, `g_r` feeding `v` through
/// `beta_b`, `beta_r`.
pub fn k2_presentation() -> (Skeleton, SquareSet) {
    let mut s = Skeleton::new(2);
    for v in ["v", "u", "w"] {
        s.add_vertex(v).unwrap();
    }
    let edges = [
        ("e_b", 0, "v", "v"),
        ("alpha_b", 0, "u", "v"),
        ("beta_b", 0, "w", "v"),
        ("c_b", 0, "u", "u"),
        ("g_b", 0, "w", "w"),
        ("e_r", 1, "v", "v"),
        ("rho_r", 1, "u", "v"),
        ("beta_r", 1, "w", "v"),
        ("c_r", 1, "u", "u"),
        ("g_r", 1, "w", "w"),
    ];
    for (n, c, src, rng) in edges {
        s.add_edge(n, c, src, rng).unwrap();
    }
    let mut q = SquareSet::new();
    for [e, f, f2, e2] in [
        ["e_b", "e_r", "e_r", "e_b"],
        ["e_b", "rho_r", "e_r", "alpha_b"],
        ["alpha_b", "c_r", "rho_r", "c_b"],
        ["e_b", "beta_r", "beta_r", "g_b"],
        ["beta_b", "g_r", "e_r", "beta_b"],
        ["c_b", "c_r", "c_r", "c_b"],
        ["g_b", "g_r", "g_r", "g_b"],
    ] {
        q.push_named(&s, e, f, f2, e2).unwrap();
    }
    (s, q)
}

pub fn k2() -> KGraph {
    let (s, q) = k2_presentation();
    KGraph::validate(s, q).unwrap()
}

pub const TG1_TEXT: &str = "seqgraph
family A arity 1
family B arity 1
family C arity 2 constraint i2>=i1
point Z
limit C(i,inf) -> B(i)
limit B(inf) -> Z
limit A(inf) -> Z
map r : A(i) -> A(i)
map s : A(i) -> A(i)
map r : B(i) -> B(i)
map s : B(i) -> B(i)
map r : C(i,j) -> C(i,j)
map s : C(i,j) -> C(i,j+1)
map r : Z -> Z
map s : Z -> Z
";

pub fn tg1() -> crate::seqgraph::SeqSpace {
    crate::seqgraph::parse(TG1_TEXT).unwrap()
}
