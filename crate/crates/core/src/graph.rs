//! Finite directed graphs: cycles, entrances, and the sets `B^n` / `V_n`.
//!
//! A directed graph is handled both directly (cycle enumeration works on edge
//! lists) and through its lift to a 1-graph, which is what the path space and
//! groupoid layers operate on.

use std::collections::{BTreeSet, HashMap};

use crate::degree::{Degree, Shift};
use crate::error::{Error, Result};
use crate::isotropy::{self, GroupoidElem};
use crate::kgraph::{EdgeId, KGraph, Skeleton, SquareSet, VertexId};
use crate::pathspace::{self, EPPath};

/// A finite directed graph `(E^0, E^1, r, s)`.
#[derive(Clone, Debug)]
pub struct DirectedGraph {
    lifted: KGraph,
}

/// A finite path `e1 ... en` with `src(e_i) = rng(e_{i+1})`; length-0 paths are vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePath {
    pub vertex: VertexId,
    pub edges: Vec<EdgeId>,
}

/// A path whose range equals its source.
pub type Cycle = FinitePath;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub receive_counts: Vec<(String, usize)>,
    pub no_sources: bool,
    pub row_finite: bool,
}

#[derive(Clone, Debug)]
pub enum BisectionMeet {
    Empty,
    Singleton(GroupoidElem),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedCertificate {
    pub kind: &'static str,
    pub graph_hash: String,
    /// Number of non-interior isotropy elements the closure probe separated from the interior sample.
    pub cross_checked: usize,
}

pub const ROW_FINITE_NO_SOURCES: &str = "row-finite directed graph without sources";

impl DirectedGraph {
    /// Builds a graph from vertex names and `(edge, source, range)` triples.
    pub fn new(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<DirectedGraph> {
        let mut s = Skeleton::new(1);
        for v in vertices {
            s.add_vertex(v)?;
        }
        for (name, src, rng) in edges {
            s.add_edge(name, 0, src, rng)?;
        }
        DirectedGraph::from_skeleton(s)
    }

    pub fn from_skeleton(s: Skeleton) -> Result<DirectedGraph> {
        if s.k != 1 {
            return Err(Error::MalformedInput(format!("a directed graph has one color, not {}", s.k)));
        }
        Ok(DirectedGraph { lifted: KGraph::validate(s, SquareSet::new())? })
    }

    pub fn from_kgraph(g: KGraph) -> Result<DirectedGraph> {
        if g.k() != 1 {
            return Err(Error::MalformedInput(format!("a directed graph has one color, not {}", g.k())));
        }
        Ok(DirectedGraph { lifted: g })
    }

    /// The same graph as a 1-graph.
    pub fn to_kgraph(&self) -> KGraph {
        self.lifted.clone()
    }

    pub fn as_kgraph(&self) -> &KGraph {
        &self.lifted
    }

    pub fn vertex_count(&self) -> usize {
        self.lifted.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.lifted.edge_count()
    }

    pub fn rng(&self, e: EdgeId) -> VertexId {
        self.lifted.rng(e)
    }

    pub fn src(&self, e: EdgeId) -> VertexId {
        self.lifted.src(e)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        self.lifted.vertex_name(v)
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        self.lifted.edge_name(e)
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.lifted.vertex_id(name)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.lifted.edge_id(name)
    }

    fn receivers(&self, v: VertexId) -> &[EdgeId] {
        self.lifted.incoming(v, 0)
    }

    pub fn no_sources(&self) -> bool {
        self.lifted.no_sources()
    }

    pub fn validate(&self) -> ValidationReport {
        let receive_counts = (0..self.vertex_count())
            .map(|v| (self.vertex_name(v).to_string(), self.receivers(v).len()))
            .collect();
        ValidationReport { receive_counts, no_sources: self.no_sources(), row_finite: true }
    }

    /// Parses a space separated edge list into a path; `@v` is a vertex.
    pub fn path(&self, names: &str) -> Result<FinitePath> {
        let m = self.lifted.path_by_names(names)?;
        Ok(FinitePath { vertex: m.rng, edges: m.edges })
    }

    pub fn format_path(&self, p: &FinitePath) -> String {
        if p.edges.is_empty() {
            format!("@{}", self.vertex_name(p.vertex))
        } else {
            p.edges.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>().join(" ")
        }
    }

    pub fn path_src(&self, p: &FinitePath) -> VertexId {
        p.edges.last().map(|&e| self.src(e)).unwrap_or(p.vertex)
    }

    /// All paths of length `n`, lexicographic by edge id.
    pub fn enumerate_paths(&self, n: usize) -> Vec<FinitePath> {
        let mut out = Vec::new();
        for v in 0..self.vertex_count() {
            if n == 0 {
                out.push(FinitePath { vertex: v, edges: Vec::new() });
                continue;
            }
            for m in self.lifted.enumerate_morphisms(v, &Degree::new(vec![n as u32])) {
                out.push(FinitePath { vertex: v, edges: m.edges });
            }
        }
        out.sort_by(|a, b| a.edges.cmp(&b.edges).then(a.vertex.cmp(&b.vertex)));
        out
    }

    /// `C^n`: based cycles of length `n`, rotations kept distinct.
    pub fn enumerate_cycles(&self, n: usize) -> Vec<Cycle> {
        assert!(n >= 1, "cycle length must be positive");
        self.enumerate_paths(n)
            .into_iter()
            .filter(|p| self.path_src(p) == p.vertex)
            .collect()
    }

    /// Some vertex on the cycle receives an edge other than the cycle's own.
    pub fn cycle_has_entrance(&self, c: &Cycle) -> bool {
        c.edges
            .iter()
            .any(|&ci| self.receivers(self.rng(ci)).iter().any(|&e| e != ci))
    }

    /// `B^n`: cycles of length `n` without entrances, in the order of [`Self::enumerate_cycles`].
    pub fn compute_bn(&self, n: usize) -> Vec<Cycle> {
        assert!(n >= 1, "cycle length must be positive");
        let mut out: Vec<Cycle> = (0..self.vertex_count()).filter_map(|v| self.forced_cycle(v, n)).collect();
        out.sort_by(|a, b| a.edges.cmp(&b.edges).then(a.vertex.cmp(&b.vertex)));
        out
    }

    /// The length-`n` path at `v` along unique incoming edges, if it closes up.
    fn forced_cycle(&self, v: VertexId, n: usize) -> Option<Cycle> {
        let mut edges = Vec::with_capacity(n);
        let mut at = v;
        for _ in 0..n {
            let [e] = self.receivers(at) else { return None };
            edges.push(*e);
            at = self.src(*e);
        }
        (at == v).then_some(FinitePath { vertex: v, edges })
    }

    /// `V_n`: base points of entrance-free cycles of length `n`.
    pub fn compute_vn(&self, n: usize) -> BTreeSet<VertexId> {
        self.compute_bn(n).into_iter().map(|c| c.vertex).collect()
    }

    /// Entrance-free cycles that are not proper powers, for every length up to `|E|`.
    pub fn simple_entrance_free_cycles(&self) -> Vec<Cycle> {
        let mut out = Vec::new();
        for n in 1..=self.edge_count() {
            for c in self.compute_bn(n) {
                if !is_proper_power(&c.edges) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn is_topologically_free(&self) -> Result<bool> {
        self.require_no_sources()?;
        Ok(self.simple_entrance_free_cycles().is_empty())
    }

    fn require_no_sources(&self) -> Result<()> {
        if self.no_sources() {
            Ok(())
        } else {
            let v = (0..self.vertex_count()).find(|&v| self.receivers(v).is_empty()).unwrap();
            Err(Error::PreconditionViolated(format!("vertex {} receives no edge", self.vertex_name(v))))
        }
    }

    /// `Z(alpha, beta) ∩ Iso` for `|alpha| != |beta|`: empty or one element.
    pub fn check_bisection_singleton(&self, alpha: &FinitePath, beta: &FinitePath) -> Result<BisectionMeet> {
        if alpha.edges.len() == beta.edges.len() {
            return Err(Error::PreconditionViolated("bisection needs |alpha| != |beta|".into()));
        }
        if self.path_src(alpha) != self.path_src(beta) {
            return Err(Error::PreconditionViolated("alpha and beta must share a source".into()));
        }
        let (short, long) = if alpha.edges.len() < beta.edges.len() { (alpha, beta) } else { (beta, alpha) };
        if long.vertex != short.vertex || !long.edges.starts_with(&short.edges) {
            return Ok(BisectionMeet::Empty);
        }
        // long = short · gamma with gamma a cycle at src(short); x = gamma x forces x = gamma^∞.
        let gamma = &long.edges[short.edges.len()..];
        let g = &self.lifted;
        let cycle = g.path(gamma)?;
        let x = EPPath::new(g, g.vertex_morphism(cycle.rng), cycle)?;
        let ax = pathspace::prepend(g, &self.to_morphism(alpha), &x)?;
        let bx = pathspace::prepend(g, &self.to_morphism(beta), &x)?;
        if !pathspace::epp_equal(g, &ax, &bx) {
            return Ok(BisectionMeet::Empty);
        }
        let p = Degree::new(vec![alpha.edges.len() as u32]);
        let q = Degree::new(vec![beta.edges.len() as u32]);
        Ok(BisectionMeet::Singleton(isotropy::make_gelem(g, ax, p, q, bx)?))
    }

    pub fn to_morphism(&self, p: &FinitePath) -> crate::kgraph::Morphism {
        if p.edges.is_empty() {
            self.lifted.vertex_morphism(p.vertex)
        } else {
            self.lifted.path(&p.edges).expect("finite path is adjacent")
        }
    }

    /// Closedness of the isotropy interior, which always holds for these graphs;
    /// the certificate is cross-checked with the closure probe on a small sample.
    pub fn decide_iso_closed(&self) -> Result<ClosedCertificate> {
        self.require_no_sources()?;
        let g = &self.lifted;
        let bound = Degree::new(vec![2]);
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for v in 0..g.vertex_count() {
            for x in pathspace::enumerate_epps(g, v, &bound, &bound)? {
                interior.push(isotropy::unit(g, &x));
                for n in [-2i64, -1, 1, 2] {
                    let Some(gel) = isotropy::isotropy_at(g, &x, &Shift::new(vec![n])) else {
                        continue;
                    };
                    match isotropy::in_iso_interior(g, &gel, 64)? {
                        isotropy::InteriorVerdict::Interior { .. } => interior.push(gel),
                        _ => boundary.push(gel),
                    }
                }
            }
        }
        let depth = 4;
        let mut by_shift: HashMap<Shift, Vec<GroupoidElem>> = HashMap::new();
        for gel in interior {
            by_shift.entry(gel.n.clone()).or_default().push(gel);
        }
        for gel in &boundary {
            let near = by_shift.get(&gel.n).map(Vec::as_slice).unwrap_or(&[]);
            if isotropy::closure_probe(g, near, gel, depth) {
                return Err(Error::PreconditionViolated(format!(
                    "closure probe found a limit of interior elements outside the interior: {}",
                    isotropy::format_gelem(g, gel)
                )));
            }
        }
        Ok(ClosedCertificate {
            kind: ROW_FINITE_NO_SOURCES,
            graph_hash: g.content_hash(),
            cross_checked: boundary.len(),
        })
    }
}

/// True when `edges` is `w^t` for some `t >= 2`.
pub fn is_proper_power(edges: &[EdgeId]) -> bool {
    let n = edges.len();
    (1..n).any(|d| n % d == 0 && (d..n).all(|i| edges[i] == edges[i - d]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g2, g3};

    fn names(g: &DirectedGraph, cs: &[Cycle]) -> Vec<String> {
        cs.iter().map(|c| g.format_path(c)).collect()
    }

    #[test]
    fn validation_reports_sources() {
        assert!(g1().validate().no_sources);
        let r = g3().validate();
        assert!(r.no_sources && r.row_finite);
        assert_eq!(r.receive_counts, vec![("v".into(), 2), ("u".into(), 1)]);
        let bare = DirectedGraph::new(&["v"], &[]).unwrap();
        assert!(!bare.validate().no_sources);
        assert!(matches!(bare.is_topologically_free(), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn unknown_vertex_is_malformed() {
        let err = DirectedGraph::new(&["v"], &[("e", "v", "w")]).unwrap_err();
        assert!(matches!(err, Error::MalformedInput(_)));
    }

    #[test]
    fn cycle_enumeration() {
        let g = g1();
        assert_eq!(names(&g, &g.enumerate_cycles(1)), vec!["e"]);
        let g = g2();
        assert_eq!(names(&g, &g.enumerate_cycles(2)), vec!["a b", "b a"]);
        assert!(g.enumerate_cycles(1).is_empty());
    }

    #[test]
    fn entrances() {
        let g = g1();
        assert!(!g.cycle_has_entrance(&g.path("e").unwrap()));
        let g = g3();
        assert!(g.cycle_has_entrance(&g.path("e").unwrap()));
        let g = g2();
        assert!(!g.cycle_has_entrance(&g.path("a b").unwrap()));
    }

    #[test]
    fn bn_and_vn() {
        let g = g1();
        assert_eq!(names(&g, &g.compute_bn(1)), vec!["e"]);
        assert_eq!(g.compute_vn(1).len(), 1);
        let g = g3();
        assert!(g.compute_bn(1).is_empty());
        for n in 1..=4 {
            assert!(g.compute_vn(n).is_empty());
        }
        let g = g2();
        assert_eq!(names(&g, &g.compute_bn(2)), vec!["a b", "b a"]);
        assert_eq!(g.compute_vn(2).len(), 2);
    }

    #[test]
    fn simple_cycles_and_freeness() {
        assert_eq!(names(&g1(), &g1().simple_entrance_free_cycles()), vec!["e"]);
        assert!(g3().simple_entrance_free_cycles().is_empty());
        assert_eq!(names(&g2(), &g2().simple_entrance_free_cycles()), vec!["a b", "b a"]);
        assert!(g3().is_topologically_free().unwrap());
        assert!(!g1().is_topologically_free().unwrap());
        assert!(!g2().is_topologically_free().unwrap());
    }

    #[test]
    fn bisection_singletons() {
        let g = g1();
        match g.check_bisection_singleton(&g.path("e").unwrap(), &g.path("e e").unwrap()).unwrap() {
            BisectionMeet::Singleton(el) => {
                assert_eq!(el.n.coords(), &[-1]);
                assert_eq!(isotropy::format_gelem(g.as_kgraph(), &el), "((e)^∞, -1, (e)^∞)");
            }
            BisectionMeet::Empty => panic!("expected singleton"),
        }
        let g = g3();
        let r = g.check_bisection_singleton(&g.path("f").unwrap(), &g.path("e f").unwrap()).unwrap();
        assert!(matches!(r, BisectionMeet::Empty));
        let g = g2();
        match g.check_bisection_singleton(&g.path("a").unwrap(), &g.path("a b a").unwrap()).unwrap() {
            BisectionMeet::Singleton(el) => {
                assert_eq!(el.n.coords(), &[-2]);
                assert_eq!(isotropy::format_gelem(g.as_kgraph(), &el), "((a b)^∞, -2, (a b)^∞)");
            }
            BisectionMeet::Empty => panic!("expected singleton"),
        }
        assert!(g.check_bisection_singleton(&g.path("a").unwrap(), &g.path("a").unwrap()).is_err());
    }

    #[test]
    fn graphs_are_always_closed() {
        for g in [g1(), g2(), g3()] {
            let cert = g.decide_iso_closed().unwrap();
            assert_eq!(cert.kind, ROW_FINITE_NO_SOURCES);
        }
    }

    #[test]
    fn proper_powers() {
        assert!(is_proper_power(&[1, 2, 1, 2]));
        assert!(is_proper_power(&[3, 3]));
        assert!(!is_proper_power(&[1, 2, 1]));
        assert!(!is_proper_power(&[4]));
    }
}
