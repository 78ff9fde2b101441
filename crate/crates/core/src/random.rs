//! Random finite graphs for property tests and the acceptance suite.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::DirectedGraph;
use crate::kgraph::{KGraph, Skeleton, SquareSet};

/// A random directed graph in which every vertex receives an edge.
pub fn directed_graph_no_sources<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> DirectedGraph {
    let n = rng.gen_range(1..=max_vertices);
    let m = rng.gen_range(n..=max_edges.max(n));
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    for (i, v) in names.iter().enumerate() {
        let src = &names[rng.gen_range(0..n)];
        edges.push((format!("e{i}"), src.clone(), v.clone()));
    }
    for j in n..m {
        let src = &names[rng.gen_range(0..n)];
        let rng_v = &names[rng.gen_range(0..n)];
        edges.push((format!("e{j}"), src.clone(), rng_v.clone()));
    }
    let vs: Vec<&str> = names.iter().map(String::as_str).collect();
    let es: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    DirectedGraph::new(&vs, &es).expect("generated graph is valid")
}

/// Blue-red (or red-blue) two-edge paths from `w` to `v`, as `(first, second)` with `rng(first) = v`.
fn two_paths(s: &Skeleton, first_color: usize, v: usize, w: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (a, ea) in s.edges.iter().enumerate() {
        if ea.color != first_color || ea.rng != v {
            continue;
        }
        for (b, eb) in s.edges.iter().enumerate() {
            if eb.color != 1 - first_color || eb.rng != ea.src || eb.src != w {
                continue;
            }
            out.push((a, b));
        }
    }
    out
}

/// A random 2-graph without sources: rejection sampling on the skeleton until
/// blue-red and red-blue path counts agree, then a random bijection of squares.
pub fn two_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges_per_color: usize) -> KGraph {
    loop {
        let n = rng.gen_range(1..=max_vertices);
        let mut s = Skeleton::new(2);
        for i in 0..n {
            s.add_vertex(&format!("v{i}")).unwrap();
        }
        for color in 0..2 {
            let m = rng.gen_range(n..=max_edges_per_color.max(n));
            for j in 0..m {
                let r = if j < n { j } else { rng.gen_range(0..n) };
                let src = rng.gen_range(0..n);
                let name = format!("{}{j}", if color == 0 { 'b' } else { 'r' });
                let (sv, rv) = (s.vertices[src].clone(), s.vertices[r].clone());
                s.add_edge(&name, color, &sv, &rv).unwrap();
            }
        }
        let mut squares = SquareSet::new();
        let mut ok = true;
        'pairs: for v in 0..n {
            for w in 0..n {
                let br = two_paths(&s, 0, v, w);
                let mut rb = two_paths(&s, 1, v, w);
                if br.len() != rb.len() {
                    ok = false;
                    break 'pairs;
                }
                rb.shuffle(rng);
                for ((e, f), (f2, e2)) in br.into_iter().zip(rb) {
                    squares.push(e, f, f2, e2);
                }
            }
        }
        if ok {
            if let Ok(g) = KGraph::validate(s, squares) {
                return g;
            }
        }
    }
}
