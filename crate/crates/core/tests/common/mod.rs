//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use cartan_core::graph::{DirectedGraph, FinitePath};
use cartan_core::kgraph::{KGraph, Morphism};
use cartan_core::pathspace::{self, EPPath};
use cartan_core::Degree;

/// All morphisms of degree `≤ top`, grouped by nothing.
pub fn morphisms_upto(g: &KGraph, top: &Degree) -> Vec<Morphism> {
    let mut out = Vec::new();
    for d in top.below() {
        for v in 0..g.vertex_count() {
            out.extend(g.enumerate_morphisms(v, &d));
        }
    }
    out
}

/// Segment `(0, window)` of `μ·x`, computed by unrolling the cycle by hand.
fn head(g: &KGraph, mu: &Morphism, x: &EPPath, window: &Degree) -> Morphism {
    let mut lam = g.compose(mu, &x.prefix).unwrap();
    while !window.le(&lam.degree) {
        lam = g.compose(&lam, &x.cycle).unwrap();
    }
    g.segment(&lam, &Degree::zero(g.k()), window).unwrap()
}

/// Eventually periodic paths from each vertex within the bounds.
pub fn epps_by_vertex(g: &KGraph, prefix: u32, cycle: u32) -> Vec<Vec<EPPath>> {
    let k = g.k();
    (0..g.vertex_count())
        .map(|v| pathspace::enumerate_epps(g, v, &Degree::splat(k, prefix), &Degree::splat(k, cycle)).unwrap())
        .collect()
}

/// The windows `(μx)(0, depth·1)` for every listed `x` from `s(μ)`.
pub fn cycline_heads(g: &KGraph, xs: &[Vec<EPPath>], mu: &Morphism, depth: u32) -> Vec<Morphism> {
    let window = Degree::splat(g.k(), depth);
    xs[mu.src].iter().map(|x| head(g, mu, x, &window)).collect()
}

/// A path `x` from `s(μ)` with `μx ≠ νx`, searched over the given paths and
/// compared on the window `depth·1`.
pub fn brute_cycline_counterexample(
    g: &KGraph,
    xs: &[Vec<EPPath>],
    mu: &Morphism,
    nu: &Morphism,
    depth: u32,
) -> Option<EPPath> {
    let a = cycline_heads(g, xs, mu, depth);
    let b = cycline_heads(g, xs, nu, depth);
    (0..a.len()).find(|&i| a[i] != b[i]).map(|i| xs[mu.src][i].clone())
}

/// Truncated groupoid search for `αw = βw`: extends `w` edge by edge, keeping
/// every edge that keeps both words adjacent and equal where both are defined.
/// Returns the distinct words `αw` of length `|α| + len`.
pub fn brute_bisection(dg: &DirectedGraph, alpha: &FinitePath, beta: &FinitePath, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::<usize>::new()];
    while let Some(w) = stack.pop() {
        let a: Vec<usize> = alpha.edges.iter().chain(&w).copied().collect();
        let b: Vec<usize> = beta.edges.iter().chain(&w).copied().collect();
        let m = a.len().min(b.len());
        if alpha.vertex != beta.vertex || a[..m] != b[..m] {
            continue;
        }
        if w.len() == len {
            out.push(a);
            continue;
        }
        let at = w.last().map(|&e| dg.src(e)).unwrap_or_else(|| dg.path_src(alpha));
        for e in 0..dg.edge_count() {
            if dg.rng(e) == at {
                let mut w2 = w.clone();
                w2.push(e);
                stack.push(w2);
            }
        }
    }
    out
}

/// Entrance-free cycles of length `n` by exhaustive search over edge words.
pub fn brute_bn(dg: &DirectedGraph, n: usize) -> BTreeSet<FinitePath> {
    let m = dg.edge_count();
    let receives = |v: usize| (0..m).filter(|&e| dg.rng(e) == v).count();
    let mut out = BTreeSet::new();
    let mut word = vec![0usize; n];
    loop {
        let adjacent = (0..n.saturating_sub(1)).all(|i| dg.src(word[i]) == dg.rng(word[i + 1]));
        let closed = dg.src(word[n - 1]) == dg.rng(word[0]);
        if adjacent && closed && word.iter().all(|&e| receives(dg.rng(e)) == 1) {
            out.insert(FinitePath { vertex: dg.rng(word[0]), edges: word.clone() });
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            word[i] += 1;
            if word[i] < m {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

/// Whether the length-`n` segment of `x` starting at `start` is an entrance-free cycle.
pub fn segment_in_bn(dg: &DirectedGraph, x: &EPPath, start: u32, n: u32) -> bool {
    let g = dg.as_kgraph();
    let seg = pathspace::segment_inf(g, x, &Degree::new(vec![start]), &Degree::new(vec![start + n]));
    let p = FinitePath { vertex: seg.rng, edges: seg.edges };
    brute_bn(dg, n as usize).contains(&p)
}

pub fn fixture_graphs() -> Vec<(&'static str, DirectedGraph)> {
    use cartan_core::fixtures::{g1, g2, g3};
    vec![("G1", g1()), ("G2", g2()), ("G3", g3())]
}
