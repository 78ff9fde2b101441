//! Finite k-graphs presented by a colored skeleton and factorization squares.
//!
//! Morphisms are stored in color-block normal form: every color-1 edge first,
//! then every color-2 edge, and so on. The factorization property makes this
//! form unique, so structural equality of [`Morphism`] is morphism equality.
//!
//! Paths follow the range/source convention of the groupoid literature: a path
//! `e1 e2 ... en` satisfies `src(e_i) = rng(e_{i+1})` and an infinite path is
//! extended at its source end.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::degree::Degree;
use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub name: String,
    /// 0-based color.
    pub color: usize,
    pub rng: VertexId,
    pub src: VertexId,
}

/// Colored 1-skeleton of a k-graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub k: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

impl Skeleton {
    pub fn new(k: usize) -> Self {
        Skeleton { k, vertices: Vec::new(), edges: Vec::new() }
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId> {
        if self.vertices.iter().any(|v| v == name) {
            return Err(Error::MalformedInput(format!("duplicate vertex {name}")));
        }
        self.vertices.push(name.to_string());
        Ok(self.vertices.len() - 1)
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Adds an edge by vertex names; `color` is 0-based.
    pub fn add_edge(&mut self, name: &str, color: usize, src: &str, rng: &str) -> Result<EdgeId> {
        if color >= self.k {
            return Err(Error::MalformedInput(format!(
                "edge {name} has color {} but k = {}",
                color + 1,
                self.k
            )));
        }
        if self.edge_id(name).is_some() || self.vertex_id(name).is_some() {
            return Err(Error::MalformedInput(format!("duplicate identifier {name}")));
        }
        let src = self
            .vertex_id(src)
            .ok_or_else(|| Error::MalformedInput(format!("edge {name} references unknown vertex {src}")))?;
        let rng = self
            .vertex_id(rng)
            .ok_or_else(|| Error::MalformedInput(format!("edge {name} references unknown vertex {rng}")))?;
        self.edges.push(EdgeSpec { name: name.to_string(), color, rng, src });
        Ok(self.edges.len() - 1)
    }
}

/// A single square record `e f = f2 e2` with `color(e) < color(f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Square {
    pub e: EdgeId,
    pub f: EdgeId,
    pub f2: EdgeId,
    pub e2: EdgeId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SquareSet {
    pub squares: Vec<Square>,
}

impl SquareSet {
    pub fn new() -> Self {
        SquareSet::default()
    }

    pub fn push(&mut self, e: EdgeId, f: EdgeId, f2: EdgeId, e2: EdgeId) {
        self.squares.push(Square { e, f, f2, e2 });
    }

    /// Adds a square given edge names.
    pub fn push_named(&mut self, s: &Skeleton, e: &str, f: &str, f2: &str, e2: &str) -> Result<()> {
        let look = |n: &str| {
            s.edge_id(n)
                .ok_or_else(|| Error::MalformedInput(format!("square references unknown edge {n}")))
        };
        self.push(look(e)?, look(f)?, look(f2)?, look(e2)?);
        Ok(())
    }
}

/// A morphism in color-block normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub rng: VertexId,
    pub src: VertexId,
    pub degree: Degree,
    pub edges: Vec<EdgeId>,
}

impl Morphism {
    pub fn is_vertex(&self) -> bool {
        self.edges.is_empty()
    }
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            write!(f, "@{}", self.rng)
        } else {
            write!(f, "{:?}", self.edges)
        }
    }
}

/// A validated finite k-graph.
#[derive(Clone, Debug)]
pub struct KGraph {
    skeleton: Skeleton,
    squares: SquareSet,
    /// `swap[a * E + b]`: for a composable pair `a b` of distinct colors, the
    /// pair `b' a'` with `a b = b' a'`, `color(b') = color(b)`.
    swap: Vec<Option<(EdgeId, EdgeId)>>,
    /// `incoming[v][color]`: edges with range `v` of that color.
    incoming: Vec<Vec<Vec<EdgeId>>>,
    no_sources: bool,
}

impl KGraph {
    /// Checks the factorization property on a presentation.
    pub fn validate(skeleton: Skeleton, squares: SquareSet) -> Result<KGraph> {
        let k = skeleton.k;
        if k == 0 {
            return Err(Error::MalformedInput("k must be positive".into()));
        }
        let ne = skeleton.edges.len();
        let nv = skeleton.vertices.len();
        for e in &skeleton.edges {
            if e.color >= k || e.rng >= nv || e.src >= nv {
                return Err(Error::MalformedInput(format!("edge {} is out of range", e.name)));
            }
        }
        let name = |e: EdgeId| skeleton.edges[e].name.clone();
        let mut swap: Vec<Option<(EdgeId, EdgeId)>> = vec![None; ne * ne];
        for sq in &squares.squares {
            let Square { e, f, f2, e2 } = *sq;
            if [e, f, f2, e2].iter().any(|&x| x >= ne) {
                return Err(Error::MalformedInput("square references unknown edge".into()));
            }
            let (se, sf, sf2, se2) =
                (&skeleton.edges[e], &skeleton.edges[f], &skeleton.edges[f2], &skeleton.edges[e2]);
            if se.color >= sf.color {
                return Err(Error::MalformedInput(format!(
                    "square orientation: {} {} must list the lower color first",
                    se.name, sf.name
                )));
            }
            let oriented = sf2.color == sf.color
                && se2.color == se.color
                && se.src == sf.rng
                && sf2.rng == se.rng
                && se2.src == sf.src
                && sf2.src == se2.rng;
            if !oriented {
                return Err(Error::MalformedInput(format!(
                    "square {} {} = {} {} is not a commuting square",
                    se.name, sf.name, sf2.name, se2.name
                )));
            }
            if swap[e * ne + f].is_some() {
                return Err(Error::MalformedInput(format!("duplicate square for ({}, {})", se.name, sf.name)));
            }
            if let Some((b, a)) = swap[f2 * ne + e2] {
                return Err(Error::NonBijectiveSquares(format!(
                    "{} {} is the image of both ({} {}) and ({} {})",
                    sf2.name,
                    se2.name,
                    name(b),
                    name(a),
                    se.name,
                    sf.name
                )));
            }
            swap[e * ne + f] = Some((f2, e2));
            swap[f2 * ne + e2] = Some((e, f));
        }
        // Totality in both orientations.
        for a in 0..ne {
            for b in 0..ne {
                let (sa, sb) = (&skeleton.edges[a], &skeleton.edges[b]);
                if sa.color == sb.color || sa.src != sb.rng || swap[a * ne + b].is_some() {
                    continue;
                }
                if sa.color < sb.color {
                    return Err(Error::MissingSquare(sa.name.clone(), sb.name.clone()));
                }
                return Err(Error::NonBijectiveSquares(format!(
                    "{} {} is not the image of any square",
                    sa.name, sb.name
                )));
            }
        }
        let mut incoming = vec![vec![Vec::new(); k]; nv];
        for (id, e) in skeleton.edges.iter().enumerate() {
            incoming[e.rng][e.color].push(id);
        }
        let no_sources = incoming.iter().all(|per| per.iter().all(|es| !es.is_empty()));
        let g = KGraph { skeleton, squares, swap, incoming, no_sources };
        if k >= 3 {
            g.check_associativity()?;
        }
        Ok(g)
    }

    fn check_associativity(&self) -> Result<()> {
        let ne = self.edge_count();
        let color = |e: EdgeId| self.color(e);
        for a in 0..ne {
            for b in 0..ne {
                if color(b) <= color(a) || self.src(a) != self.rng(b) {
                    continue;
                }
                for c in 0..ne {
                    if color(c) <= color(b) || self.src(b) != self.rng(c) {
                        continue;
                    }
                    let mut left = vec![a, b, c];
                    for pos in [0, 1, 0] {
                        self.swap_at(&mut left, pos);
                    }
                    let mut right = vec![a, b, c];
                    for pos in [1, 0, 1] {
                        self.swap_at(&mut right, pos);
                    }
                    if left != right {
                        return Err(Error::AssociativityFailure(
                            self.edge_name(a).to_string(),
                            self.edge_name(b).to_string(),
                            self.edge_name(c).to_string(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn squares(&self) -> &SquareSet {
        &self.squares
    }

    pub fn k(&self) -> usize {
        self.skeleton.k
    }

    pub fn vertex_count(&self) -> usize {
        self.skeleton.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.skeleton.edges.len()
    }

    pub fn no_sources(&self) -> bool {
        self.no_sources
    }

    pub fn color(&self, e: EdgeId) -> usize {
        self.skeleton.edges[e].color
    }

    pub fn rng(&self, e: EdgeId) -> VertexId {
        self.skeleton.edges[e].rng
    }

    pub fn src(&self, e: EdgeId) -> VertexId {
        self.skeleton.edges[e].src
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.skeleton.edges[e].name
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.skeleton.vertices[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.skeleton.vertex_id(name)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.skeleton.edge_id(name)
    }

    /// Edges of `color` with range `v`.
    pub fn incoming(&self, v: VertexId, color: usize) -> &[EdgeId] {
        &self.incoming[v][color]
    }

    /// The pair `b' a'` with `a b = b' a'`.
    pub fn swap_pair(&self, a: EdgeId, b: EdgeId) -> (EdgeId, EdgeId) {
        self.swap[a * self.edge_count() + b].expect("validated k-graph has all squares")
    }

    fn swap_at(&self, edges: &mut [EdgeId], pos: usize) {
        let (b2, a2) = self.swap_pair(edges[pos], edges[pos + 1]);
        edges[pos] = b2;
        edges[pos + 1] = a2;
    }

    pub fn vertex_morphism(&self, v: VertexId) -> Morphism {
        Morphism { rng: v, src: v, degree: Degree::zero(self.k()), edges: Vec::new() }
    }

    pub fn edge_morphism(&self, e: EdgeId) -> Morphism {
        Morphism {
            rng: self.rng(e),
            src: self.src(e),
            degree: Degree::unit(self.k(), self.color(e)),
            edges: vec![e],
        }
    }

    /// Builds the morphism represented by an adjacent edge sequence in any color order.
    pub fn path(&self, edges: &[EdgeId]) -> Result<Morphism> {
        let Some(&first) = edges.first() else {
            return Err(Error::MalformedInput("empty edge list; use vertex_morphism".into()));
        };
        for w in edges.windows(2) {
            if self.src(w[0]) != self.rng(w[1]) {
                return Err(Error::NotComposable(format!(
                    "{} then {}",
                    self.edge_name(w[0]),
                    self.edge_name(w[1])
                )));
            }
        }
        let mut counts = vec![0u32; self.k()];
        for &e in edges {
            counts[self.color(e)] += 1;
        }
        let degree = Degree::new(counts);
        let mut edges = edges.to_vec();
        if self.k() > 1 {
            self.sort_blocks(&mut edges);
        }
        Ok(Morphism { rng: self.rng(first), src: self.src(*edges.last().unwrap()), degree, edges })
    }

    /// Parses a space separated edge name list; `@v` denotes a vertex morphism.
    pub fn path_by_names(&self, names: &str) -> Result<Morphism> {
        let names = names.trim();
        if let Some(v) = names.strip_prefix('@') {
            let v = self
                .vertex_id(v)
                .ok_or_else(|| Error::MalformedInput(format!("unknown vertex {v}")))?;
            return Ok(self.vertex_morphism(v));
        }
        let ids = names
            .split_whitespace()
            .map(|n| self.edge_id(n).ok_or_else(|| Error::MalformedInput(format!("unknown edge {n}"))))
            .collect::<Result<Vec<_>>>()?;
        self.path(&ids)
    }

    pub fn format_morphism(&self, m: &Morphism) -> String {
        if m.edges.is_empty() {
            format!("@{}", self.vertex_name(m.rng))
        } else {
            m.edges.iter().map(|&e| self.edge_name(e)).collect::<Vec<_>>().join(" ")
        }
    }

    /// Bubble sort into ascending color blocks using squares.
    fn sort_blocks(&self, edges: &mut [EdgeId]) {
        let n = edges.len();
        loop {
            let mut changed = false;
            for i in 0..n.saturating_sub(1) {
                if self.color(edges[i]) > self.color(edges[i + 1]) {
                    self.swap_at(edges, i);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Rewrites an adjacent edge sequence so that its color word equals `word`.
    fn rewrite_to_word(&self, edges: &mut [EdgeId], word: &[usize]) {
        for i in 0..word.len() {
            let j = (i..edges.len())
                .find(|&j| self.color(edges[j]) == word[i])
                .expect("color word has the same content");
            for pos in (i..j).rev() {
                self.swap_at(edges, pos);
            }
        }
    }

    pub fn compose(&self, lhs: &Morphism, rhs: &Morphism) -> Result<Morphism> {
        if lhs.src != rhs.rng {
            return Err(Error::NotComposable(format!(
                "source {} differs from range {}",
                self.vertex_name(lhs.src),
                self.vertex_name(rhs.rng)
            )));
        }
        let mut edges = Vec::with_capacity(lhs.edges.len() + rhs.edges.len());
        edges.extend_from_slice(&lhs.edges);
        edges.extend_from_slice(&rhs.edges);
        self.sort_blocks(&mut edges);
        Ok(Morphism { rng: lhs.rng, src: rhs.src, degree: &lhs.degree + &rhs.degree, edges })
    }

    /// `m^t`; `m` must be a cycle when `t > 1`.
    pub fn power(&self, m: &Morphism, t: u32) -> Result<Morphism> {
        let mut out = self.vertex_morphism(m.rng);
        for _ in 0..t {
            out = self.compose(&out, m)?;
        }
        Ok(out)
    }

    /// The unique factorization `lambda = head tail` with `d(head) = m`.
    pub fn factor(&self, lambda: &Morphism, m: &Degree) -> Result<(Morphism, Morphism)> {
        let rest = lambda.degree.checked_sub(m).ok_or_else(|| {
            Error::DegreeOutOfRange(format!("{m} is not below {}", lambda.degree))
        })?;
        let mut word = Vec::with_capacity(lambda.edges.len());
        for (c, &count) in m.coords().iter().enumerate() {
            word.extend(std::iter::repeat(c).take(count as usize));
        }
        for (c, &count) in rest.coords().iter().enumerate() {
            word.extend(std::iter::repeat(c).take(count as usize));
        }
        let mut edges = lambda.edges.clone();
        self.rewrite_to_word(&mut edges, &word);
        let split = m.total() as usize;
        let mid = if split == 0 {
            lambda.rng
        } else {
            self.src(edges[split - 1])
        };
        let head = Morphism { rng: lambda.rng, src: mid, degree: m.clone(), edges: edges[..split].to_vec() };
        let mut tail_edges = edges[split..].to_vec();
        self.sort_blocks(&mut tail_edges);
        let tail = Morphism { rng: mid, src: lambda.src, degree: rest, edges: tail_edges };
        Ok((head, tail))
    }

    /// `lambda(p, q)`.
    pub fn segment(&self, lambda: &Morphism, p: &Degree, q: &Degree) -> Result<Morphism> {
        if !p.le(q) || !q.le(&lambda.degree) {
            return Err(Error::DegreeOutOfRange(format!(
                "segment ({p}, {q}) of a morphism of degree {}",
                lambda.degree
            )));
        }
        let (head, _) = self.factor(lambda, q)?;
        let (_, mid) = self.factor(&head, p)?;
        Ok(mid)
    }

    /// The vertex `lambda(p)`, the source of `lambda(0, p)`.
    pub fn vertex_at(&self, lambda: &Morphism, p: &Degree) -> Result<VertexId> {
        Ok(self.factor(lambda, p)?.0.src)
    }

    /// All of `v Λ^n` in normal form, in lexicographic order of edge lists.
    pub fn enumerate_morphisms(&self, v: VertexId, n: &Degree) -> Vec<Morphism> {
        let mut word = Vec::new();
        for (c, &count) in n.coords().iter().enumerate() {
            word.extend(std::iter::repeat(c).take(count as usize));
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.extend_word(v, &word, &mut stack, &mut out, n);
        out.sort();
        out
    }

    fn extend_word(
        &self,
        at: VertexId,
        word: &[usize],
        stack: &mut Vec<EdgeId>,
        out: &mut Vec<Morphism>,
        n: &Degree,
    ) {
        match word.split_first() {
            None => {
                let rng = stack.first().map(|&e| self.rng(e)).unwrap_or(at);
                out.push(Morphism { rng, src: at, degree: n.clone(), edges: stack.clone() });
            }
            Some((&c, rest)) => {
                for &e in self.incoming(at, c) {
                    stack.push(e);
                    self.extend_word(self.src(e), rest, stack, out, n);
                    stack.pop();
                }
            }
        }
    }

    /// Morphisms with source `v` of degree `n` (extensions at the range end).
    pub fn enumerate_into(&self, v: VertexId, n: &Degree) -> Vec<Morphism> {
        (0..self.vertex_count())
            .flat_map(|w| self.enumerate_morphisms(w, n))
            .filter(|m| m.src == v)
            .collect()
    }

    /// Vertices reachable from `v` by following edges from range to source.
    pub fn forward_closure(&self, v: VertexId) -> Vec<VertexId> {
        let mut seen = HashSet::from([v]);
        let mut queue = vec![v];
        while let Some(w) = queue.pop() {
            for c in 0..self.k() {
                for &e in self.incoming(w, c) {
                    if seen.insert(self.src(e)) {
                        queue.push(self.src(e));
                    }
                }
            }
        }
        let mut out: Vec<_> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// True when every vertex reachable from `v` receives exactly one edge of
    /// each color; then `v Λ^∞` is a single path.
    pub fn has_unique_infinite_path(&self, v: VertexId) -> bool {
        self.forward_closure(v)
            .into_iter()
            .all(|w| (0..self.k()).all(|c| self.incoming(w, c).len() == 1))
    }

    /// Stable content hash of the presentation.
    pub fn content_hash(&self) -> String {
        let mut text = format!("kgraph {}\n", self.k());
        for v in &self.skeleton.vertices {
            text.push_str(&format!("vertex {v}\n"));
        }
        for e in &self.skeleton.edges {
            text.push_str(&format!(
                "edge {} {} {} {}\n",
                e.name, e.color, self.skeleton.vertices[e.src], self.skeleton.vertices[e.rng]
            ));
        }
        let mut sq: BTreeMap<(String, String), (String, String)> = BTreeMap::new();
        for s in &self.squares.squares {
            sq.insert(
                (self.edge_name(s.e).into(), self.edge_name(s.f).into()),
                (self.edge_name(s.f2).into(), self.edge_name(s.e2).into()),
            );
        }
        for ((e, f), (f2, e2)) in sq {
            text.push_str(&format!("square {e} {f} {f2} {e2}\n"));
        }
        crate::hash_text(&text)
    }
}

/// Counts of `v Λ^n` keyed by vertex, convenient for size estimates.
pub fn path_counts(g: &KGraph, n: &Degree) -> HashMap<VertexId, usize> {
    (0..g.vertex_count()).map(|v| (v, g.enumerate_morphisms(v, n).len())).collect()
}
