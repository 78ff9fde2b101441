//! Eventually periodic infinite paths `prefix · cycle^∞`.

use std::collections::HashMap;

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::kgraph::{KGraph, Morphism, VertexId};

/// `prefix · cycle · cycle · …`; the cycle has positive degree in every color.
///
/// The derived equality is structural. Two values can denote the same path
/// without being equal; use [`epp_equal`] for semantic comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EPPath {
    pub prefix: Morphism,
    pub cycle: Morphism,
}

impl EPPath {
    /// Checked and canonicalized constructor.
    pub fn new(g: &KGraph, prefix: Morphism, cycle: Morphism) -> Result<EPPath> {
        let x = EPPath::raw(g, prefix, cycle)?;
        Ok(canonicalize(g, &x))
    }

    /// Checked constructor without canonicalization.
    pub fn raw(g: &KGraph, prefix: Morphism, cycle: Morphism) -> Result<EPPath> {
        if cycle.rng != cycle.src {
            return Err(Error::NotACycle(format!(
                "{} runs from {} to {}",
                g.format_morphism(&cycle),
                g.vertex_name(cycle.src),
                g.vertex_name(cycle.rng)
            )));
        }
        if prefix.src != cycle.rng {
            return Err(Error::NotACycle(format!(
                "cycle {} does not start at the source of {}",
                g.format_morphism(&cycle),
                g.format_morphism(&prefix)
            )));
        }
        if !cycle.degree.is_positive() {
            return Err(Error::DegenerateCycle(format!(
                "cycle {} has degree {}",
                g.format_morphism(&cycle),
                cycle.degree
            )));
        }
        Ok(EPPath { prefix, cycle })
    }

    pub fn rng(&self) -> VertexId {
        self.prefix.rng
    }
}

/// `make_epp`.
pub fn make_epp(g: &KGraph, prefix: Morphism, cycle: Morphism) -> Result<EPPath> {
    EPPath::new(g, prefix, cycle)
}

/// `x(0, d)` for the least `d = d(prefix) + t·d(cycle)` with `q ≤ d`.
pub fn unroll(g: &KGraph, x: &EPPath, q: &Degree) -> Morphism {
    let p = &x.prefix.degree;
    let c = &x.cycle.degree;
    let t = (0..q.k())
        .map(|i| q[i].saturating_sub(p[i]).div_ceil(c[i]))
        .max()
        .unwrap_or(0);
    if t == 0 {
        return x.prefix.clone();
    }
    let mut edges = x.prefix.edges.clone();
    for _ in 0..t {
        edges.extend_from_slice(&x.cycle.edges);
    }
    g.path(&edges).expect("prefix and cycle are composable")
}

/// `x(p, q)`.
pub fn segment_inf(g: &KGraph, x: &EPPath, p: &Degree, q: &Degree) -> Morphism {
    if g.k() == 1 {
        let (pre, cyc) = (&x.prefix.edges, &x.cycle.edges);
        let at = |i: usize| if i < pre.len() { pre[i] } else { cyc[(i - pre.len()) % cyc.len()] };
        let (p, q) = (p[0] as usize, q[0] as usize);
        if p == q {
            let v = if p == 0 { x.rng() } else { g.src(at(p - 1)) };
            return g.vertex_morphism(v);
        }
        let edges: Vec<_> = (p..q).map(at).collect();
        return g.path(&edges).expect("consecutive edges of a path");
    }
    let lambda = unroll(g, x, q);
    g.segment(&lambda, p, q).expect("p ≤ q within the unrolled path")
}

/// The vertex `x(p)`.
pub fn vertex_at(g: &KGraph, x: &EPPath, p: &Degree) -> VertexId {
    segment_inf(g, x, &Degree::zero(g.k()), p).src
}

/// `σ^p(x)`.
pub fn shift(g: &KGraph, x: &EPPath, p: &Degree) -> EPPath {
    canonicalize(g, &shift_raw(g, x, p))
}

fn shift_raw(g: &KGraph, x: &EPPath, p: &Degree) -> EPPath {
    if p.is_zero() {
        return x.clone();
    }
    if g.k() == 1 {
        let n = p[0] as usize;
        let (pre, cyc) = (&x.prefix.edges, &x.cycle.edges);
        if n <= pre.len() {
            let prefix = if n == pre.len() { g.vertex_morphism(x.cycle.rng) } else { g.path(&pre[n..]).unwrap() };
            return EPPath { prefix, cycle: x.cycle.clone() };
        }
        let mut c = cyc.clone();
        c.rotate_left((n - pre.len()) % cyc.len());
        let cycle = g.path(&c).expect("rotation of a cycle");
        return EPPath { prefix: g.vertex_morphism(cycle.rng), cycle };
    }
    let lambda = unroll(g, x, p);
    let (_, tail) = g.factor(&lambda, p).expect("p within the unrolled path");
    EPPath { prefix: tail, cycle: x.cycle.clone() }
}

/// `μ · x`.
pub fn prepend(g: &KGraph, mu: &Morphism, x: &EPPath) -> Result<EPPath> {
    let prefix = g.compose(mu, &x.prefix)?;
    Ok(canonicalize(g, &EPPath { prefix, cycle: x.cycle.clone() }))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// The comparison window `T` for a pair of paths.
pub fn equality_window(x: &EPPath, y: &EPPath) -> Degree {
    let l = x
        .cycle
        .degree
        .coords()
        .iter()
        .chain(y.cycle.degree.coords())
        .fold(1u64, |acc, &c| lcm(acc, c as u64));
    let l = (2 * l) as u32;
    let c = x.cycle.degree.join(&y.cycle.degree);
    &x.prefix.degree.join(&y.prefix.degree) + &c.scale(l)
}

/// Semantic equality of the denoted infinite paths.
pub fn epp_equal(g: &KGraph, x: &EPPath, y: &EPPath) -> bool {
    epp_equal_scaled(g, x, y, 1)
}

/// `epp_equal` with the window multiplied by `scale`.
pub fn epp_equal_scaled(g: &KGraph, x: &EPPath, y: &EPPath, scale: u32) -> bool {
    if x.rng() != y.rng() {
        return false;
    }
    if x == y {
        return true;
    }
    if g.k() == 1 && scale == 1 {
        return canonicalize(g, x) == canonicalize(g, y);
    }
    let t = equality_window(x, y).scale(scale);
    let zero = Degree::zero(g.k());
    segment_inf(g, x, &zero, &t) == segment_inf(g, y, &zero, &t)
}

/// `x ∈ Z(μ)`.
pub fn in_cylinder(g: &KGraph, x: &EPPath, mu: &Morphism) -> bool {
    x.rng() == mu.rng && segment_inf(g, x, &Degree::zero(g.k()), &mu.degree) == *mu
}

/// Shortest prefix, then shortest cycle, that denotes the same path.
pub fn canonicalize(g: &KGraph, x: &EPPath) -> EPPath {
    if g.k() == 1 {
        return canonicalize_1(g, x);
    }
    let x = primitive_root(g, x);
    let zero = Degree::zero(g.k());
    let cycles: Vec<Degree> = if g.k() == 1 {
        vec![x.cycle.degree.clone()]
    } else {
        x.cycle.degree.below().into_iter().filter(|c| c.is_positive()).collect()
    };
    for p in x.prefix.degree.below() {
        for c in &cycles {
            let end = &p + c;
            let cand_cycle = segment_inf(g, &x, &p, &end);
            if cand_cycle.rng != cand_cycle.src {
                continue;
            }
            let cand = EPPath { prefix: segment_inf(g, &x, &zero, &p), cycle: cand_cycle };
            if cand == x || epp_equal(g, &x, &cand) {
                return primitive_root(g, &cand);
            }
        }
    }
    x
}

/// Rank one: rotate the cycle back over matching prefix edges.
fn canonicalize_1(g: &KGraph, x: &EPPath) -> EPPath {
    let x = primitive_root(g, x);
    let mut prefix = x.prefix.edges.clone();
    let mut cycle = x.cycle.edges.clone();
    if prefix.last().is_none_or(|e| e != cycle.last().unwrap()) {
        return x;
    }
    while let (Some(&p), Some(&c)) = (prefix.last(), cycle.last()) {
        if p != c {
            break;
        }
        prefix.pop();
        cycle.rotate_right(1);
    }
    let prefix = if prefix.is_empty() {
        g.vertex_morphism(x.rng())
    } else {
        g.path(&prefix).expect("prefix of a path")
    };
    let cycle = g.path(&cycle).expect("rotation of a cycle");
    EPPath { prefix, cycle }
}

/// Replaces `cycle = root^t` by `root` for the largest such `t`.
fn primitive_root(g: &KGraph, x: &EPPath) -> EPPath {
    if g.k() == 1 {
        let e = &x.cycle.edges;
        let l = (1..=e.len()).find(|&l| e.len() % l == 0 && (l..e.len()).all(|i| e[i] == e[i - l])).unwrap();
        if l == e.len() {
            return x.clone();
        }
        return EPPath { prefix: x.prefix.clone(), cycle: g.path(&e[..l]).expect("root of a cycle") };
    }
    let c = &x.cycle.degree;
    let d = c.coords().iter().fold(0u64, |acc, &v| gcd(acc, v as u64)) as u32;
    for t in (2..=d).rev() {
        if d % t != 0 {
            continue;
        }
        let root_deg = Degree::new(c.coords().iter().map(|&v| v / t).collect());
        let root = g.segment(&x.cycle, &Degree::zero(g.k()), &root_deg).expect("root below cycle");
        if root.src == root.rng && g.power(&root, t).ok().as_ref() == Some(&x.cycle) {
            return EPPath { prefix: x.prefix.clone(), cycle: root };
        }
    }
    x.clone()
}

/// All distinct eventually periodic paths with range `v` within the bounds.
pub fn enumerate_epps(g: &KGraph, v: VertexId, prefix_bound: &Degree, cycle_bound: &Degree) -> Result<Vec<EPPath>> {
    if !g.no_sources() {
        return Err(Error::PreconditionViolated("path enumeration needs a graph without sources".into()));
    }
    let key_deg = prefix_bound + &cycle_bound.scale(2);
    let zero = Degree::zero(g.k());
    let mut found: Vec<EPPath> = Vec::new();
    let mut buckets: HashMap<Morphism, Vec<usize>> = HashMap::new();
    let cycle_degrees: Vec<Degree> = cycle_bound.below().into_iter().filter(|c| c.is_positive()).collect();
    for p in prefix_bound.below() {
        for prefix in g.enumerate_morphisms(v, &p) {
            for c in &cycle_degrees {
                for cycle in g.enumerate_morphisms(prefix.src, c) {
                    if cycle.src != prefix.src {
                        continue;
                    }
                    let x = EPPath { prefix: prefix.clone(), cycle };
                    let key = segment_inf(g, &x, &zero, &key_deg);
                    let bucket = buckets.entry(key).or_default();
                    if bucket.iter().any(|&i| epp_equal(g, &found[i], &x)) {
                        continue;
                    }
                    bucket.push(found.len());
                    found.push(x);
                }
            }
        }
    }
    Ok(found.iter().map(|x| canonicalize(g, x)).collect())
}

/// Follows the first morphism of degree `(1, …, 1)` from `v` until a vertex repeats.
pub fn any_epp_from(g: &KGraph, v: VertexId) -> Result<EPPath> {
    let ones = Degree::ones(g.k());
    let mut steps: Vec<Morphism> = Vec::new();
    let mut seen = vec![v];
    let mut at = v;
    loop {
        let Some(step) = g.enumerate_morphisms(at, &ones).into_iter().next() else {
            return Err(Error::PreconditionViolated(format!(
                "no infinite path from {}",
                g.vertex_name(at)
            )));
        };
        at = step.src;
        steps.push(step);
        if let Some(i) = seen.iter().position(|&w| w == at) {
            let join = |ms: &[Morphism], start: VertexId| -> Morphism {
                let edges: Vec<_> = ms.iter().flat_map(|m| m.edges.iter().copied()).collect();
                if edges.is_empty() {
                    g.vertex_morphism(start)
                } else {
                    g.path(&edges).expect("steps are adjacent")
                }
            };
            let prefix = join(&steps[..i], v);
            let cycle = join(&steps[i..], at);
            return EPPath::new(g, prefix, cycle);
        }
        seen.push(at);
    }
}

/// `prefix=<edges> cycle=<edges>`.
pub fn serialize(g: &KGraph, x: &EPPath) -> String {
    format!("prefix={} cycle={}", g.format_morphism(&x.prefix), g.format_morphism(&x.cycle))
}

/// Inverse of [`serialize`].
pub fn parse_serialized(g: &KGraph, text: &str) -> Result<EPPath> {
    let text = text.trim();
    let rest = text
        .strip_prefix("prefix=")
        .ok_or_else(|| Error::MalformedInput(format!("expected prefix=…: {text}")))?;
    let (prefix, cycle) = rest
        .split_once(" cycle=")
        .ok_or_else(|| Error::MalformedInput(format!("expected cycle=…: {text}")))?;
    EPPath::new(g, g.path_by_names(prefix)?, g.path_by_names(cycle)?)
}

/// Human readable form, e.g. `a (b a)^∞`.
pub fn pretty(g: &KGraph, x: &EPPath) -> String {
    let cyc = format!("({})^∞", g.format_morphism(&x.cycle));
    if x.prefix.is_vertex() {
        cyc
    } else {
        format!("{} {cyc}", g.format_morphism(&x.prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g2, g3, k1, k2};

    fn d(c: &[u32]) -> Degree {
        Degree::new(c.to_vec())
    }

    fn epp(g: &KGraph, prefix: &str, cycle: &str) -> EPPath {
        EPPath::new(g, g.path_by_names(prefix).unwrap(), g.path_by_names(cycle).unwrap()).unwrap()
    }

    #[test]
    fn make_epp_examples() {
        let g = g1().to_kgraph();
        assert_eq!(pretty(&g, &epp(&g, "@v", "e")), "(e)^∞");
        let g = k1();
        assert_eq!(pretty(&g, &epp(&g, "@v", "b r")), "(b r)^∞");
        let b = g.path_by_names("b").unwrap();
        let err = EPPath::new(&g, g.vertex_morphism(0), b).unwrap_err();
        assert!(matches!(err, Error::DegenerateCycle(_)));
        let g = g2().to_kgraph();
        let a = g.path_by_names("a").unwrap();
        assert!(matches!(EPPath::new(&g, g.vertex_morphism(0), a), Err(Error::NotACycle(_))));
    }

    #[test]
    fn canonical_forms() {
        let g = g1().to_kgraph();
        assert_eq!(epp(&g, "e e", "e e e"), epp(&g, "@v", "e"));
        let g = g2().to_kgraph();
        assert_eq!(pretty(&g, &epp(&g, "a", "b a")), "(a b)^∞");
        let g = k1();
        assert_eq!(pretty(&g, &epp(&g, "b", "b b r")), "(b r)^∞");
        let g = k2();
        assert_eq!(pretty(&g, &epp(&g, "e_b", "e_b e_r")), "(e_b e_r)^∞");
    }

    #[test]
    fn segment_examples() {
        let g = g1().to_kgraph();
        let x = epp(&g, "@v", "e");
        assert_eq!(g.format_morphism(&segment_inf(&g, &x, &d(&[0]), &d(&[3]))), "e e e");
        assert!(segment_inf(&g, &x, &d(&[2]), &d(&[2])).is_vertex());
        let g = k1();
        let x = epp(&g, "@v", "b r");
        let s = segment_inf(&g, &x, &d(&[0, 0]), &d(&[1, 1]));
        assert_eq!(g.format_morphism(&s), "b r");
    }

    #[test]
    fn shift_examples() {
        let g = g1().to_kgraph();
        let x = epp(&g, "@v", "e");
        assert_eq!(shift(&g, &x, &d(&[5])), x);
        assert_eq!(shift(&g, &x, &d(&[0])), x);
        let g = g3().to_kgraph();
        let x = epp(&g, "@v", "f m");
        assert_eq!(pretty(&g, &shift(&g, &x, &d(&[1]))), "(m f)^∞");
    }

    #[test]
    fn equality_examples() {
        let g = g1().to_kgraph();
        assert!(epp_equal(&g, &epp(&g, "@v", "e"), &epp(&g, "e", "e")));
        let g = g2().to_kgraph();
        let x = EPPath::raw(&g, g.vertex_morphism(0), g.path_by_names("a b").unwrap()).unwrap();
        let w = g.vertex_id("w").unwrap();
        let y = EPPath::raw(&g, g.path_by_names("a").unwrap(), g.path_by_names("b a").unwrap()).unwrap();
        assert_eq!(y.prefix.src, w);
        assert!(epp_equal(&g, &x, &y));
        let g = g3().to_kgraph();
        assert!(!epp_equal(&g, &epp(&g, "@v", "f m"), &epp(&g, "@u", "m f")));
    }

    #[test]
    fn cylinder_examples() {
        let g = g1().to_kgraph();
        assert!(in_cylinder(&g, &epp(&g, "@v", "e"), &g.path_by_names("e e").unwrap()));
        let g = k1();
        assert!(in_cylinder(&g, &epp(&g, "@v", "b r"), &g.path_by_names("b r").unwrap()));
        let g = g3().to_kgraph();
        assert!(!in_cylinder(&g, &epp(&g, "@v", "f m"), &g.path_by_names("e").unwrap()));
    }

    #[test]
    fn enumeration_examples() {
        let g = g1().to_kgraph();
        let xs = enumerate_epps(&g, 0, &d(&[0]), &d(&[1])).unwrap();
        assert_eq!(xs.iter().map(|x| pretty(&g, x)).collect::<Vec<_>>(), vec!["(e)^∞"]);
        let g = g3().to_kgraph();
        let xs = enumerate_epps(&g, 0, &d(&[0]), &d(&[2])).unwrap();
        assert_eq!(xs.iter().map(|x| pretty(&g, x)).collect::<Vec<_>>(), vec!["(e)^∞", "(f m)^∞"]);
        let g = k1();
        let xs = enumerate_epps(&g, 0, &d(&[0, 0]), &d(&[1, 1])).unwrap();
        assert_eq!(xs.len(), 1);
        let bare = crate::DirectedGraph::new(&["v"], &[]).unwrap().to_kgraph();
        assert!(enumerate_epps(&bare, 0, &d(&[0]), &d(&[1])).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let g = k2();
        let x = epp(&g, "alpha_b", "c_b c_r");
        let s = serialize(&g, &x);
        assert_eq!(s, "prefix=alpha_b cycle=c_b c_r");
        assert_eq!(parse_serialized(&g, &s).unwrap(), x);
    }

    #[test]
    fn any_path_is_eventually_periodic() {
        let g = k2();
        let x = any_epp_from(&g, 0).unwrap();
        assert_eq!(x.rng(), 0);
        let g = g3().to_kgraph();
        assert_eq!(any_epp_from(&g, 1).unwrap().rng(), 1);
    }
}
