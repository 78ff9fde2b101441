//! Countable sequential topological graphs presented by point families,
//! limit rules and affine range/source maps.
//!
//! A family `F` of arity `a` is the set of points `F(i1, …, ia)` with indices
//! `≥ 1` (and `i2 ≥ i1` when ordered). A rule `limit F(i, inf) -> G(i)` declares
//! `F(i, t) → G(i)` as `t → ∞`; neighbourhoods of a point contain, for all large
//! `t`, every point that converges into the rule sequence point at `t`
//! (transitively along the rule DAG). Families live in the vertex space, the
//! edge space, or both; `r` and `s` map edge families to vertex families.
//!
//! Sets over infinite families are evaluated pointwise on a probe grid and
//! extrapolated from a threshold beyond every constant of the presentation;
//! membership that is not uniform past the threshold is reported as
//! [`Error::UnsupportedPresentation`].

use std::collections::HashMap;
use std::fmt;

use crate::decision::{Decision, Verdict, Witness};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Vertex,
    Edge,
    Both,
}

impl Space {
    pub fn has_vertices(self) -> bool {
        matches!(self, Space::Vertex | Space::Both)
    }

    pub fn has_edges(self) -> bool {
        matches!(self, Space::Edge | Space::Both)
    }

    fn keyword(self) -> &'static str {
        match self {
            Space::Vertex => "vertex",
            Space::Edge => "edge",
            Space::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub name: String,
    pub arity: usize,
    /// Arity 2 only: `i2 ≥ i1`.
    pub ordered: bool,
    pub space: Space,
    /// Declared with `point`.
    pub is_point: bool,
}

/// One coordinate of a pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coord {
    /// A variable plus an offset.
    Var(String, i64),
    Const(u32),
    Inf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub family: usize,
    pub coords: Vec<Coord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitRule {
    pub source: Pattern,
    pub target: Pattern,
    pub line: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    R,
    S,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapRule {
    pub kind: MapKind,
    pub source: Pattern,
    pub target: Pattern,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SeqSpace {
    pub families: Vec<Family>,
    pub rules: Vec<LimitRule>,
    pub maps: Vec<MapRule>,
}

/// A concrete point of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub family: usize,
    pub idx: Vec<u32>,
}

/// A bound on one coordinate of a set item.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Eq(u32),
    Ge(u32),
}

impl Bound {
    fn admits(self, v: u32) -> bool {
        match self {
            Bound::Eq(c) => v == c,
            Bound::Ge(c) => v >= c,
        }
    }

    fn within(self, other: Bound) -> bool {
        match (self, other) {
            (Bound::Eq(a), b) => b.admits(a),
            (Bound::Ge(a), Bound::Ge(b)) => a >= b,
            (Bound::Ge(_), Bound::Eq(_)) => false,
        }
    }

    fn constant(self) -> u32 {
        match self {
            Bound::Eq(c) | Bound::Ge(c) => c,
        }
    }
}

/// `{F(i…) : each coordinate within its bound}`, restricted to valid points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub family: usize,
    pub bounds: Vec<Bound>,
}

/// A finite union of items.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SetExpr {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqWitness {
    pub n: u32,
    pub limit_point: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BnVerdict {
    AllClosed,
    NotClosed { n: u32, limit_point: Point },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationFlags {
    /// Every vertex receives at least one edge and finitely many.
    pub esg_empty: bool,
    pub row_finite: bool,
    pub no_sources: bool,
}

/// A presentation that passed [`validate_seqspace`].
#[derive(Clone, Debug)]
pub struct ValidatedSeqSpace {
    space: SeqSpace,
    pub flags: ValidationFlags,
    /// Families in an order where every rule source precedes its target.
    order: Vec<usize>,
    max_const: u32,
}

/// Pattern coordinate evaluated along a sequence in `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TCoord {
    T(i64),
    C(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SeqExpr {
    family: usize,
    coords: Vec<TCoord>,
}

const PROBE_WIDTH: u32 = 6;
const PERIOD_STEPS: usize = 256;

// ---------------------------------------------------------------------------
// Parsing and serialization

/// Parses a presentation, with or without the `seqgraph` header line.
pub fn parse(text: &str) -> Result<SeqSpace> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    parse_lines(&lines).map_err(|(line, msg)| Error::MalformedInput(format!("line {line}: {msg}")))
}

/// Parses numbered lines; errors carry the offending line number.
pub fn parse_lines(lines: &[(usize, &str)]) -> std::result::Result<SeqSpace, (usize, String)> {
    let mut s = SeqSpace::default();
    let mut pending: Vec<(usize, Vec<String>)> = Vec::new();
    for &(no, raw) in lines {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() || line == "seqgraph" {
            continue;
        }
        let words: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        match words[0].as_str() {
            "family" | "point" => declare(&mut s, &words, no)?,
            "limit" | "map" => pending.push((no, words)),
            other => return Err((no, format!("unknown statement `{other}`"))),
        }
    }
    for (no, words) in pending {
        let rest = words[1..].join(" ");
        if words[0] == "limit" {
            let (src, tgt) = rest.split_once("->").ok_or((no, "expected `->`".to_string()))?;
            let source = parse_pattern(&s, src, no)?;
            let target = parse_pattern(&s, tgt, no)?;
            s.rules.push(LimitRule { source, target, line: no });
        } else {
            let mut rest = rest.trim();
            let kind = if let Some(r) = rest.strip_prefix('r') {
                rest = r;
                MapKind::R
            } else if let Some(r) = rest.strip_prefix('s') {
                rest = r;
                MapKind::S
            } else {
                return Err((no, "map must be `r` or `s`".into()));
            };
            let rest = rest.trim_start().strip_prefix(':').unwrap_or(rest);
            let (src, tgt) = rest.split_once("->").ok_or((no, "expected `->`".to_string()))?;
            let source = parse_pattern(&s, src, no)?;
            let target = parse_pattern(&s, tgt, no)?;
            s.maps.push(MapRule { kind, source, target, line: no });
        }
    }
    Ok(s)
}

fn declare(s: &mut SeqSpace, words: &[String], no: usize) -> std::result::Result<(), (usize, String)> {
    let name = words.get(1).ok_or((no, "missing name".to_string()))?.clone();
    if !name.chars().all(|c| c.is_alphanumeric() || c == '_') || name == "inf" {
        return Err((no, format!("invalid family name `{name}`")));
    }
    if s.families.iter().any(|f| f.name == name) {
        return Err((no, format!("duplicate family `{name}`")));
    }
    let is_point = words[0] == "point";
    let mut fam = Family { name, arity: 0, ordered: false, space: Space::Both, is_point };
    let mut i = 2;
    while i < words.len() {
        let word = words[i].as_str();
        let arg = words.get(i + 1).map(String::as_str);
        match (word, arg) {
            ("arity", Some(a)) if !is_point => {
                fam.arity = a.parse().ok().filter(|&a: &usize| a <= 2).ok_or((no, format!("arity must be 0, 1 or 2, not `{a}`")))?;
                i += 2;
            }
            ("constraint", Some("i2>=i1")) if !is_point => {
                fam.ordered = true;
                i += 2;
            }
            ("space", Some(sp)) => {
                fam.space = match sp {
                    "vertex" => Space::Vertex,
                    "edge" => Space::Edge,
                    "both" => Space::Both,
                    _ => return Err((no, format!("unknown space `{sp}`"))),
                };
                i += 2;
            }
            _ => return Err((no, format!("unexpected `{word}`"))),
        }
    }
    if fam.ordered && fam.arity != 2 {
        return Err((no, "constraint i2>=i1 needs arity 2".into()));
    }
    s.families.push(fam);
    Ok(())
}

fn parse_pattern(s: &SeqSpace, text: &str, no: usize) -> std::result::Result<Pattern, (usize, String)> {
    let text = text.trim();
    let (name, args) = match text.split_once('(') {
        Some((name, rest)) => {
            let args = rest.strip_suffix(')').ok_or((no, format!("unbalanced pattern `{text}`")))?;
            (name.trim(), Some(args))
        }
        None => (text, None),
    };
    let family = s
        .families
        .iter()
        .position(|f| f.name == name)
        .ok_or((no, format!("unknown family `{name}`")))?;
    let coords: Vec<Coord> = match args {
        None => Vec::new(),
        Some(args) => args.split(',').map(|a| parse_coord(a.trim(), no)).collect::<std::result::Result<_, _>>()?,
    };
    if coords.len() != s.families[family].arity {
        return Err((no, format!("`{name}` has arity {}, pattern has {}", s.families[family].arity, coords.len())));
    }
    Ok(Pattern { family, coords })
}

fn parse_coord(a: &str, no: usize) -> std::result::Result<Coord, (usize, String)> {
    if a == "inf" {
        return Ok(Coord::Inf);
    }
    if let Ok(c) = a.parse::<u32>() {
        return Ok(Coord::Const(c));
    }
    let (var, off) = match a.find(['+', '-']) {
        Some(pos) => {
            let off: i64 = a[pos..].replace('+', "").parse().map_err(|_| (no, format!("bad offset in `{a}`")))?;
            (a[..pos].trim(), off)
        }
        None => (a, 0),
    };
    if var.is_empty() || !var.chars().all(|c| c.is_alphanumeric() || c == '_') || var.starts_with(|c: char| c.is_ascii_digit()) {
        return Err((no, format!("bad index expression `{a}`")));
    }
    Ok(Coord::Var(var.to_string(), off))
}

impl SeqSpace {
    pub fn family_id(&self, name: &str) -> Option<usize> {
        self.families.iter().position(|f| f.name == name)
    }

    pub fn format_pattern(&self, p: &Pattern) -> String {
        let f = &self.families[p.family];
        if p.coords.is_empty() {
            return f.name.clone();
        }
        let cs: Vec<String> = p
            .coords
            .iter()
            .map(|c| match c {
                Coord::Var(v, 0) => v.clone(),
                Coord::Var(v, o) if *o > 0 => format!("{v}+{o}"),
                Coord::Var(v, o) => format!("{v}{o}"),
                Coord::Const(c) => c.to_string(),
                Coord::Inf => "inf".into(),
            })
            .collect();
        format!("{}({})", f.name, cs.join(","))
    }

    pub fn format_point(&self, p: &Point) -> String {
        let f = &self.families[p.family];
        if p.idx.is_empty() {
            f.name.clone()
        } else {
            let cs: Vec<String> = p.idx.iter().map(u32::to_string).collect();
            format!("{}({})", f.name, cs.join(","))
        }
    }

    /// Parses `Z` or `C(1,2)`.
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let p = parse_pattern(self, text, 0).map_err(|(_, m)| Error::MalformedInput(m))?;
        let idx = p
            .coords
            .iter()
            .map(|c| match c {
                Coord::Const(c) => Ok(*c),
                _ => Err(Error::MalformedInput(format!("`{text}` is not a concrete point"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let pt = Point { family: p.family, idx };
        if !self.valid(&pt) {
            return Err(Error::MalformedInput(format!("`{text}` violates the family's index constraints")));
        }
        Ok(pt)
    }

    /// Canonical text; `parse(to_text(s)) == s` up to line numbers.
    pub fn to_text(&self) -> String {
        let mut out = String::from("seqgraph\n");
        for f in &self.families {
            if f.is_point {
                out.push_str(&format!("point {}", f.name));
            } else {
                out.push_str(&format!("family {} arity {}", f.name, f.arity));
                if f.ordered {
                    out.push_str(" constraint i2>=i1");
                }
            }
            if f.space != Space::Both {
                out.push_str(&format!(" space {}", f.space.keyword()));
            }
            out.push('\n');
        }
        for r in &self.rules {
            out.push_str(&format!("limit {} -> {}\n", self.format_pattern(&r.source), self.format_pattern(&r.target)));
        }
        for m in &self.maps {
            let k = if m.kind == MapKind::R { "r" } else { "s" };
            out.push_str(&format!("map {k} : {} -> {}\n", self.format_pattern(&m.source), self.format_pattern(&m.target)));
        }
        out
    }

    pub fn valid(&self, p: &Point) -> bool {
        let f = &self.families[p.family];
        p.idx.len() == f.arity && p.idx.iter().all(|&i| i >= 1) && (!f.ordered || p.idx[1] >= p.idx[0])
    }

    /// Equality ignoring recorded line numbers.
    pub fn same_presentation(&self, other: &SeqSpace) -> bool {
        let strip = |s: &SeqSpace| {
            let mut s = s.clone();
            s.rules.iter_mut().for_each(|r| r.line = 0);
            s.maps.iter_mut().for_each(|m| m.line = 0);
            s
        };
        strip(self) == strip(other)
    }
}

/// Embeds a discrete directed graph: every vertex and edge is an isolated point.
pub fn from_directed_graph(g: &DirectedGraph) -> SeqSpace {
    let mut s = SeqSpace::default();
    let vname = |v: usize| format!("v_{}", g.vertex_name(v));
    let ename = |e: usize| format!("e_{}", g.edge_name(e));
    for v in 0..g.vertex_count() {
        s.families.push(Family { name: vname(v), arity: 0, ordered: false, space: Space::Vertex, is_point: true });
    }
    for e in 0..g.edge_count() {
        s.families.push(Family { name: ename(e), arity: 0, ordered: false, space: Space::Edge, is_point: true });
    }
    let nv = g.vertex_count();
    for e in 0..g.edge_count() {
        for (kind, v) in [(MapKind::R, g.rng(e)), (MapKind::S, g.src(e))] {
            s.maps.push(MapRule {
                kind,
                source: Pattern { family: nv + e, coords: Vec::new() },
                target: Pattern { family: v, coords: Vec::new() },
                line: 0,
            });
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Validation

fn pattern_vars(p: &Pattern) -> Vec<&str> {
    p.coords
        .iter()
        .filter_map(|c| match c {
            Coord::Var(v, _) => Some(v.as_str()),
            _ => None,
        })
        .collect()
}

/// Checks a left-hand pattern: distinct bare variables, except one `inf` for rules.
fn check_lhs(s: &SeqSpace, p: &Pattern, allow_inf: bool, line: usize) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    let mut infs = 0;
    for c in &p.coords {
        match c {
            Coord::Var(v, 0) if !seen.contains(&v.as_str()) => seen.push(v),
            Coord::Inf if allow_inf => infs += 1,
            _ => {
                return Err(Error::MalformedInput(format!(
                    "line {line}: left side {} must use distinct plain indices",
                    s.format_pattern(p)
                )))
            }
        }
    }
    if allow_inf && infs != 1 {
        return Err(Error::MalformedInput(format!(
            "line {line}: limit {} needs exactly one `inf` index",
            s.format_pattern(p)
        )));
    }
    Ok(())
}

pub fn validate_seqspace(s: SeqSpace) -> Result<ValidatedSeqSpace> {
    let nf = s.families.len();
    let mut max_const = 1u32;
    let mut bump = |p: &Pattern| {
        for c in &p.coords {
            match c {
                Coord::Const(c) => max_const = max_const.max(*c),
                Coord::Var(_, o) => max_const = max_const.max(o.unsigned_abs() as u32),
                Coord::Inf => {}
            }
        }
    };
    for r in &s.rules {
        bump(&r.source);
        bump(&r.target);
    }
    for m in &s.maps {
        bump(&m.source);
        bump(&m.target);
    }
    for r in &s.rules {
        check_lhs(&s, &r.source, true, r.line)?;
        let src_vars = pattern_vars(&r.source);
        let tgt_vars = pattern_vars(&r.target);
        if r.target.coords.contains(&Coord::Inf) || tgt_vars.iter().any(|v| !src_vars.contains(v)) {
            return Err(Error::MalformedInput(format!("line {}: limit target uses unknown indices", r.line)));
        }
        if src_vars.iter().any(|v| !tgt_vars.contains(v)) {
            return Err(Error::UnsupportedPresentation(format!(
                "line {}: limit target must determine every finite index of {}",
                r.line,
                s.format_pattern(&r.source)
            )));
        }
        if s.families[r.source.family].space != s.families[r.target.family].space {
            return Err(Error::MalformedInput(format!("line {}: limit joins families of different spaces", r.line)));
        }
    }
    // Rule DAG.
    let mut indeg = vec![0usize; nf];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for r in &s.rules {
        out[r.source.family].push(r.target.family);
        indeg[r.target.family] += 1;
    }
    let mut order = Vec::new();
    let mut ready: Vec<usize> = (0..nf).filter(|&f| indeg[f] == 0).collect();
    while let Some(f) = ready.pop() {
        order.push(f);
        for &t in &out[f] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push(t);
            }
        }
    }
    if order.len() != nf {
        let f = (0..nf).find(|&f| indeg[f] > 0).unwrap();
        return Err(Error::CyclicLimits(s.families[f].name.clone()));
    }
    // Maps.
    for m in &s.maps {
        check_lhs(&s, &m.source, false, m.line)?;
        if !s.families[m.source.family].space.has_edges() || !s.families[m.target.family].space.has_vertices() {
            return Err(Error::MalformedInput(format!("line {}: maps go from edge families to vertex families", m.line)));
        }
        let vars = pattern_vars(&m.source);
        if m.target.coords.iter().any(|c| match c {
            Coord::Var(v, _) => !vars.contains(&v.as_str()),
            Coord::Inf => true,
            Coord::Const(_) => false,
        }) {
            return Err(Error::MalformedInput(format!("line {}: map target uses unknown indices", m.line)));
        }
    }
    for (f, fam) in s.families.iter().enumerate() {
        if !fam.space.has_edges() {
            continue;
        }
        for kind in [MapKind::R, MapKind::S] {
            let n = s.maps.iter().filter(|m| m.kind == kind && m.source.family == f).count();
            if n != 1 {
                let k = if kind == MapKind::R { "r" } else { "s" };
                return Err(Error::MalformedInput(format!("edge family {} needs exactly one `{k}` map, found {n}", fam.name)));
            }
        }
    }
    let mut v = ValidatedSeqSpace {
        space: s,
        flags: ValidationFlags { esg_empty: false, row_finite: true, no_sources: true },
        order,
        max_const,
    };
    v.check_totality()?;
    v.check_src_injective()?;
    v.check_continuity()?;
    v.flags = v.compute_flags();
    Ok(v)
}

impl ValidatedSeqSpace {
    pub fn space(&self) -> &SeqSpace {
        &self.space
    }

    fn threshold(&self, extra: u32) -> u32 {
        2 + self.max_const + extra
    }

    /// All valid points of a family with indices `≤ hi`.
    fn grid(&self, f: usize, hi: u32) -> Vec<Point> {
        let fam = &self.space.families[f];
        match fam.arity {
            0 => vec![Point { family: f, idx: Vec::new() }],
            1 => (1..=hi).map(|i| Point { family: f, idx: vec![i] }).collect(),
            _ => {
                let mut out = Vec::new();
                for i in 1..=hi {
                    let lo = if fam.ordered { i } else { 1 };
                    for j in lo..=hi.max(lo) {
                        out.push(Point { family: f, idx: vec![i, j] });
                    }
                }
                out
            }
        }
    }

    fn map_rule(&self, kind: MapKind, f: usize) -> &MapRule {
        self.space.maps.iter().find(|m| m.kind == kind && m.source.family == f).expect("validated maps")
    }

    fn bind(p: &Pattern, idx: &[u32]) -> HashMap<String, i64> {
        p.coords
            .iter()
            .zip(idx)
            .filter_map(|(c, &v)| match c {
                Coord::Var(name, _) => Some((name.clone(), v as i64)),
                _ => None,
            })
            .collect()
    }

    fn eval(p: &Pattern, env: &HashMap<String, i64>) -> Option<Point> {
        let idx = p
            .coords
            .iter()
            .map(|c| match c {
                Coord::Var(v, o) => {
                    let x = env[v] + o;
                    u32::try_from(x).ok()
                }
                Coord::Const(c) => Some(*c),
                Coord::Inf => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Point { family: p.family, idx })
    }

    /// `r(e)` or `s(e)`.
    pub fn apply(&self, kind: MapKind, e: &Point) -> Point {
        let m = self.map_rule(kind, e.family);
        Self::eval(&m.target, &Self::bind(&m.source, &e.idx)).expect("total map")
    }

    /// Solves `pattern(env) = v` for the pattern's variables.
    fn solve(p: &Pattern, v: &Point) -> Option<HashMap<String, i64>> {
        if p.family != v.family {
            return None;
        }
        let mut env: HashMap<String, i64> = HashMap::new();
        for (c, &x) in p.coords.iter().zip(&v.idx) {
            match c {
                Coord::Const(c) if *c != x => return None,
                Coord::Const(_) => {}
                Coord::Var(name, o) => {
                    let val = x as i64 - o;
                    if *env.entry(name.clone()).or_insert(val) != val {
                        return None;
                    }
                }
                Coord::Inf => return None,
            }
        }
        Some(env)
    }

    /// Edges with range `v`; `None` if some edge family has infinitely many.
    pub fn r_preimages(&self, v: &Point) -> Option<Vec<Point>> {
        let mut out = Vec::new();
        for m in self.space.maps.iter().filter(|m| m.kind == MapKind::R) {
            let Some(env) = Self::solve(&m.target, v) else { continue };
            let mut idx = Vec::new();
            for c in &m.source.coords {
                let Coord::Var(name, _) = c else { unreachable!("plain left side") };
                let Some(&x) = env.get(name) else { return None };
                let Ok(x) = u32::try_from(x) else { idx.clear(); break };
                idx.push(x);
            }
            if idx.len() != m.source.coords.len() {
                continue;
            }
            let e = Point { family: m.source.family, idx };
            if self.space.valid(&e) && self.apply(MapKind::R, &e) == *v {
                out.push(e);
            }
        }
        Some(out)
    }

    fn check_totality(&self) -> Result<()> {
        let hi = self.threshold(PROBE_WIDTH);
        for m in &self.space.maps {
            for e in self.grid(m.source.family, hi) {
                let ok = Self::eval(&m.target, &Self::bind(&m.source, &e.idx)).is_some_and(|p| self.space.valid(&p));
                if !ok {
                    return Err(Error::MalformedInput(format!(
                        "line {}: map is not total at {}",
                        m.line,
                        self.space.format_point(&e)
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_src_injective(&self) -> Result<()> {
        for m in self.space.maps.iter().filter(|m| m.kind == MapKind::S) {
            let used = pattern_vars(&m.target);
            if pattern_vars(&m.source).iter().any(|v| !used.contains(v)) {
                return Err(Error::MalformedInput(format!("line {}: source map is not injective", m.line)));
            }
        }
        let hi = self.threshold(PROBE_WIDTH);
        for (f, fam) in self.space.families.iter().enumerate() {
            if !fam.space.has_edges() {
                continue;
            }
            let mut seen: HashMap<Point, Point> = HashMap::new();
            for e in self.grid(f, hi) {
                if let Some(prev) = seen.insert(self.apply(MapKind::S, &e), e.clone()) {
                    return Err(Error::MalformedInput(format!(
                        "source map is not injective on {}: {} and {}",
                        fam.name,
                        self.space.format_point(&prev),
                        self.space.format_point(&e)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rule sequences of edge families have images converging to the image of the limit.
    fn check_continuity(&self) -> Result<()> {
        let hi = self.threshold(PROBE_WIDTH);
        for rule in &self.space.rules {
            if !self.space.families[rule.source.family].space.has_edges() {
                continue;
            }
            for kind in [MapKind::R, MapKind::S] {
                for (env, seq) in self.rule_sequences_upto(rule, hi) {
                    let limit = Self::eval(&rule.target, &env).expect("limit evaluates");
                    if !self.space.valid(&limit) {
                        continue;
                    }
                    let image = self.map_seq(kind, &seq);
                    let want = self.apply(kind, &limit);
                    if !self.seq_converges(&image, &want) {
                        let k = if kind == MapKind::R { "r" } else { "s" };
                        return Err(Error::DiscontinuousMap(format!(
                            "{k} along rule `limit {} -> {}` (line {}) does not converge to {}",
                            self.space.format_pattern(&rule.source),
                            self.space.format_pattern(&rule.target),
                            rule.line,
                            self.space.format_point(&want)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Instances of a rule's sequence for every assignment of its finite indices `≤ hi`.
    fn rule_sequences_upto(&self, rule: &LimitRule, hi: u32) -> Vec<(HashMap<String, i64>, SeqExpr)> {
        let vars: Vec<&str> = pattern_vars(&rule.source);
        let mut envs: Vec<HashMap<String, i64>> = vec![HashMap::new()];
        for v in &vars {
            let mut next = Vec::new();
            for env in &envs {
                for x in 1..=hi {
                    let mut e = env.clone();
                    e.insert(v.to_string(), x as i64);
                    next.push(e);
                }
            }
            envs = next;
        }
        envs.into_iter()
            .map(|env| {
                let seq = Self::rule_seq(rule, &env);
                (env, seq)
            })
            .collect()
    }

    fn rule_seq(rule: &LimitRule, env: &HashMap<String, i64>) -> SeqExpr {
        let coords = rule
            .source
            .coords
            .iter()
            .map(|c| match c {
                Coord::Inf => TCoord::T(0),
                Coord::Var(v, _) => TCoord::C(env[v]),
                Coord::Const(c) => TCoord::C(*c as i64),
            })
            .collect();
        SeqExpr { family: rule.source.family, coords }
    }

    fn subst(p: &Pattern, src: &Pattern, seq: &SeqExpr) -> SeqExpr {
        let mut env: HashMap<&str, TCoord> = HashMap::new();
        for (c, &t) in src.coords.iter().zip(&seq.coords) {
            if let Coord::Var(v, _) = c {
                env.insert(v.as_str(), t);
            }
        }
        let coords = p
            .coords
            .iter()
            .map(|c| match c {
                Coord::Var(v, o) => match env[v.as_str()] {
                    TCoord::T(a) => TCoord::T(a + o),
                    TCoord::C(a) => TCoord::C(a + o),
                },
                Coord::Const(c) => TCoord::C(*c as i64),
                Coord::Inf => TCoord::T(0),
            })
            .collect();
        SeqExpr { family: p.family, coords }
    }

    fn map_seq(&self, kind: MapKind, seq: &SeqExpr) -> SeqExpr {
        let m = self.map_rule(kind, seq.family);
        Self::subst(&m.target, &m.source, seq)
    }

    fn seq_const(seq: &SeqExpr) -> Option<Point> {
        let idx = seq
            .coords
            .iter()
            .map(|c| match c {
                TCoord::C(v) => u32::try_from(*v).ok(),
                TCoord::T(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Point { family: seq.family, idx })
    }

    /// Whether `seq(t) → q` in the rule topology: eventually equal to `q`, or
    /// reaching `q` along a rule chain whose last step index grows with `t`.
    fn seq_converges(&self, seq: &SeqExpr, q: &Point) -> bool {
        if let Some(p) = Self::seq_const(seq) {
            return p == *q;
        }
        self.chain_reaches(seq, q)
    }

    fn chain_reaches(&self, seq: &SeqExpr, q: &Point) -> bool {
        for rule in self.space.rules.iter().filter(|r| r.source.family == seq.family) {
            let inf_pos = rule.source.coords.iter().position(|c| *c == Coord::Inf).unwrap();
            let next = Self::subst(&rule.target, &rule.source, seq);
            let grows = matches!(seq.coords[inf_pos], TCoord::T(_));
            if grows && Self::seq_const(&next).as_ref() == Some(q) {
                return true;
            }
            if self.chain_reaches(&next, q) {
                return true;
            }
        }
        false
    }

    fn compute_flags(&self) -> ValidationFlags {
        let hi = self.threshold(PROBE_WIDTH);
        let mut row_finite = true;
        let mut no_sources = true;
        for (f, fam) in self.space.families.iter().enumerate() {
            if !fam.space.has_vertices() {
                continue;
            }
            for v in self.grid(f, hi) {
                match self.r_preimages(&v) {
                    None => row_finite = false,
                    Some(pre) if pre.is_empty() => no_sources = false,
                    Some(_) => {}
                }
            }
        }
        ValidationFlags { esg_empty: row_finite && no_sources, row_finite, no_sources }
    }

    fn require_esg_empty(&self) -> Result<()> {
        if self.flags.esg_empty {
            Ok(())
        } else {
            Err(Error::PreconditionViolated("the presentation has singular vertices".into()))
        }
    }

    // -----------------------------------------------------------------------
    // Pointwise predicates

    /// `v` is the base point of an entrance-free cycle of length `n`.
    pub fn on_entrance_free_cycle(&self, v: &Point, n: u32) -> bool {
        let mut w = v.clone();
        for _ in 0..n {
            match self.r_preimages(&w) {
                Some(pre) if pre.len() == 1 => w = self.apply(MapKind::S, &pre[0]),
                _ => return false,
            }
        }
        w == *v
    }

    /// Rules into `p` as sequences in `t`.
    fn sequences_into(&self, p: &Point) -> Vec<SeqExpr> {
        self.space
            .rules
            .iter()
            .filter_map(|r| Self::solve(&r.target, p).map(|env| Self::rule_seq(r, &env)))
            .collect()
    }

    fn seq_at(&self, seq: &SeqExpr, t: u32) -> Option<Point> {
        let idx = seq
            .coords
            .iter()
            .map(|c| match c {
                TCoord::T(o) => u32::try_from(t as i64 + o).ok(),
                TCoord::C(v) => u32::try_from(*v).ok(),
            })
            .collect::<Option<Vec<_>>>()?;
        let p = Point { family: seq.family, idx };
        self.space.valid(&p).then_some(p)
    }

    /// Values of `pred` along `seq`: all values below the threshold and the
    /// uniform value past it.
    fn along(
        &self,
        seq: &SeqExpr,
        t0: u32,
        pred: &mut dyn FnMut(&Point) -> Result<bool>,
    ) -> Result<(Vec<bool>, bool)> {
        let mut below = Vec::new();
        let mut first_valid = None;
        let mut t = 1;
        while first_valid.is_none() || t < t0.max(first_valid.unwrap()) {
            if let Some(p) = self.seq_at(seq, t) {
                first_valid.get_or_insert(t);
                below.push(pred(&p)?);
            }
            t += 1;
            if t > 10 * t0 + 64 && first_valid.is_none() {
                return Ok((Vec::new(), false));
            }
        }
        let start = t0.max(first_valid.unwrap());
        let mut tail = None;
        for t in start..=start + PROBE_WIDTH {
            let Some(p) = self.seq_at(seq, t) else { continue };
            let v = pred(&p)?;
            if *tail.get_or_insert(v) != v {
                return Err(Error::UnsupportedPresentation(format!(
                    "membership along a rule sequence through {} is not uniform",
                    self.space.format_point(&p)
                )));
            }
        }
        Ok((below, tail.unwrap_or(false)))
    }

    /// Tabulates `pred` over a family into set items.
    fn tabulate(&self, f: usize, t0: u32, pred: &mut dyn FnMut(&Point) -> Result<bool>) -> Result<Vec<Item>> {
        let fam = self.space.families[f].clone();
        let hi = t0 + PROBE_WIDTH;
        let nonuniform = |p: &Point| {
            Error::UnsupportedPresentation(format!(
                "membership is not uniform in the indices of {}",
                self.space.format_point(p)
            ))
        };
        let mut items = Vec::new();
        match fam.arity {
            0 => {
                if pred(&Point { family: f, idx: Vec::new() })? {
                    items.push(Item { family: f, bounds: Vec::new() });
                }
            }
            1 => {
                let vals: Vec<bool> = (1..=hi).map(|i| pred(&Point { family: f, idx: vec![i] })).collect::<Result<_>>()?;
                let tail = vals[t0 as usize - 1];
                if let Some(i) = (t0..=hi).find(|&i| vals[i as usize - 1] != tail) {
                    return Err(nonuniform(&Point { family: f, idx: vec![i] }));
                }
                let mut start = t0;
                if tail {
                    while start > 1 && vals[start as usize - 2] {
                        start -= 1;
                    }
                    items.push(Item { family: f, bounds: vec![Bound::Ge(start)] });
                }
                for i in 1..start {
                    if vals[i as usize - 1] {
                        items.push(Item { family: f, bounds: vec![Bound::Eq(i)] });
                    }
                }
            }
            _ => {
                // Row i: values for j in lo..=max(t0, lo) + width.
                let row = |i: u32, pred: &mut dyn FnMut(&Point) -> Result<bool>| -> Result<(Vec<(u32, bool)>, bool)> {
                    let lo = if fam.ordered { i } else { 1 };
                    let j0 = t0.max(lo);
                    let mut explicit = Vec::new();
                    for j in lo..j0 {
                        explicit.push((j, pred(&Point { family: f, idx: vec![i, j] })?));
                    }
                    let tail = pred(&Point { family: f, idx: vec![i, j0] })?;
                    for j in j0..=j0 + PROBE_WIDTH {
                        if pred(&Point { family: f, idx: vec![i, j] })? != tail {
                            return Err(nonuniform(&Point { family: f, idx: vec![i, j] }));
                        }
                    }
                    Ok((explicit, tail))
                };
                let (ref_explicit, ref_tail) = row(t0, pred)?;
                for i in t0..=hi {
                    let (ex, tail) = row(i, pred)?;
                    let same = if fam.ordered { tail == ref_tail } else { ex == ref_explicit && tail == ref_tail };
                    if !same {
                        return Err(nonuniform(&Point { family: f, idx: vec![i, t0] }));
                    }
                }
                let mut rows: Vec<(Bound, Vec<(u32, bool)>, bool)> = vec![(Bound::Ge(t0), ref_explicit, ref_tail)];
                for i in 1..t0 {
                    let (ex, tail) = row(i, pred)?;
                    rows.push((Bound::Eq(i), ex, tail));
                }
                for (ib, ex, tail) in rows {
                    let lo = match ib {
                        Bound::Eq(i) if fam.ordered => i,
                        Bound::Ge(_) if fam.ordered => 1,
                        _ => 1,
                    };
                    let j0 = if ex.is_empty() { lo } else { ex.last().unwrap().0 + 1 };
                    if tail {
                        let mut start = j0;
                        while let Some(&(j, true)) = ex.iter().find(|&&(j, _)| j + 1 == start) {
                            start = j;
                        }
                        items.push(Item { family: f, bounds: vec![ib, Bound::Ge(start)] });
                        for &(j, v) in &ex {
                            if v && j < start {
                                items.push(Item { family: f, bounds: vec![ib, Bound::Eq(j)] });
                            }
                        }
                    } else {
                        for &(j, v) in &ex {
                            if v {
                                items.push(Item { family: f, bounds: vec![ib, Bound::Eq(j)] });
                            }
                        }
                    }
                }
            }
        }
        Ok(items)
    }

    fn tabulate_vertices(&self, t0: u32, pred: &mut dyn FnMut(&Point) -> Result<bool>) -> Result<SetExpr> {
        let mut items = Vec::new();
        for (f, fam) in self.space.families.iter().enumerate() {
            if fam.space.has_vertices() {
                items.extend(self.tabulate(f, t0, pred)?);
            }
        }
        Ok(SetExpr::normalized(items))
    }

    // -----------------------------------------------------------------------
    // Symbolic sets

    /// Base points of entrance-free `n`-cycles.
    pub fn symbolic_ln(&self, n: u32) -> Result<SetExpr> {
        let t0 = self.threshold(n);
        self.tabulate_vertices(t0, &mut |p| Ok(self.on_entrance_free_cycle(p, n)))
    }

    /// `V_n`: points with a neighbourhood of base points of entrance-free `n`-cycles.
    pub fn symbolic_vn(&self, n: u32) -> Result<SetExpr> {
        let t0 = self.threshold(n);
        let mut memo: HashMap<Point, bool> = HashMap::new();
        self.tabulate_vertices(t0, &mut |p| self.interior_point(p, n, t0, &mut memo))
    }

    /// Every point converging into `p`, and `p`, is a base point of an entrance-free `n`-cycle.
    fn inside(&self, p: &Point, n: u32, t0: u32, memo: &mut HashMap<Point, bool>) -> Result<bool> {
        if let Some(&v) = memo.get(p) {
            return Ok(v);
        }
        let mut ok = self.on_entrance_free_cycle(p, n);
        if ok {
            for seq in self.sequences_into(p) {
                let (below, tail) = self.along(&seq, t0, &mut |q| self.inside(q, n, t0, memo))?;
                if !tail || below.iter().any(|&b| !b) {
                    ok = false;
                    break;
                }
            }
        }
        memo.insert(p.clone(), ok);
        Ok(ok)
    }

    fn interior_point(&self, p: &Point, n: u32, t0: u32, memo: &mut HashMap<Point, bool>) -> Result<bool> {
        if !self.on_entrance_free_cycle(p, n) {
            return Ok(false);
        }
        for seq in self.sequences_into(p) {
            let (_, tail) = self.along(&seq, t0, &mut |q| self.inside(q, n, t0, memo))?;
            if !tail {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `p` is in the interior of `V_n`'s defining set; exposed for replays.
    pub fn in_vn(&self, p: &Point, n: u32) -> Result<bool> {
        let t0 = self.threshold(n);
        self.interior_point(p, n, t0, &mut HashMap::new())
    }

    /// Least closed set containing `a`.
    pub fn closure_of(&self, a: &SetExpr) -> Result<SetExpr> {
        let t0 = self.threshold(a.max_const());
        let mut touch_memo: HashMap<Point, bool> = HashMap::new();
        let mut items = Vec::new();
        for &f in &self.order {
            let fam = &self.space.families[f];
            let _ = fam;
            items.extend(self.tabulate(f, t0, &mut |p| self.in_closure(a, p, t0, &mut touch_memo))?);
        }
        items.sort();
        Ok(SetExpr::normalized(items))
    }

    /// Some point converging into `p`, or `p` itself, is in `a`.
    fn touches(&self, a: &SetExpr, p: &Point, t0: u32, memo: &mut HashMap<Point, bool>) -> Result<bool> {
        if let Some(&v) = memo.get(p) {
            return Ok(v);
        }
        let mut hit = a.contains(&self.space, p);
        if !hit {
            for seq in self.sequences_into(p) {
                let (below, tail) = self.along(&seq, t0, &mut |q| self.touches(a, q, t0, memo))?;
                if tail || below.iter().any(|&b| b) {
                    hit = true;
                    break;
                }
            }
        }
        memo.insert(p.clone(), hit);
        Ok(hit)
    }

    fn in_closure(&self, a: &SetExpr, p: &Point, t0: u32, memo: &mut HashMap<Point, bool>) -> Result<bool> {
        if a.contains(&self.space, p) {
            return Ok(true);
        }
        for seq in self.sequences_into(p) {
            let (_, tail) = self.along(&seq, t0, &mut |q| self.touches(a, q, t0, memo))?;
            if tail {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Set equality by membership on the grid of critical values.
    pub fn set_eq(&self, a: &SetExpr, b: &SetExpr) -> bool {
        self.difference_point(a, b).is_none() && self.difference_point(b, a).is_none()
    }

    /// Some point of `a` outside `b`.
    pub fn difference_point(&self, a: &SetExpr, b: &SetExpr) -> Option<Point> {
        let top = a.max_const().max(b.max_const()) + 2;
        for (f, _) in self.space.families.iter().enumerate() {
            for p in self.grid(f, top) {
                if a.contains(&self.space, &p) && !b.contains(&self.space, &p) {
                    return Some(p);
                }
            }
        }
        None
    }

    // -----------------------------------------------------------------------
    // Decisions

    pub fn decide_bn_closed(&self, n_max: u32) -> Result<BnVerdict> {
        self.require_esg_empty()?;
        for n in 1..=n_max {
            let vn = self.symbolic_vn(n)?;
            let cl = self.closure_of(&vn)?;
            if let Some(p) = self.difference_point(&cl, &vn) {
                return Ok(BnVerdict::NotClosed { n, limit_point: p });
            }
        }
        Ok(BnVerdict::AllClosed)
    }

    /// Primitive period of the forced preimage chain through `v`; `Ok(None)` when
    /// `v` lies on no entrance-free cycle.
    pub fn period(&self, v: &Point) -> Result<Option<u32>> {
        let mut w = v.clone();
        for step in 1..=PERIOD_STEPS {
            let pre = match self.r_preimages(&w) {
                Some(pre) if pre.len() == 1 => pre,
                _ => return Ok(None),
            };
            if self.drifts(w.family) {
                return Ok(None);
            }
            w = self.apply(MapKind::S, &pre[0]);
            if w == *v {
                return Ok(Some(step as u32));
            }
        }
        Err(Error::UnsupportedPresentation(format!(
            "no period found for {} within {PERIOD_STEPS} steps",
            self.space.format_point(v)
        )))
    }

    /// The forced step `v ↦ s(r^{-1}(v))` is a nonzero translation within the family.
    fn drifts(&self, f: usize) -> bool {
        let into: Vec<&MapRule> = self.space.maps.iter().filter(|m| m.kind == MapKind::R && m.target.family == f).collect();
        let [m] = into.as_slice() else { return false };
        // r-map coordinates must be plain variables with offsets.
        let mut var_at: HashMap<&str, (usize, i64)> = HashMap::new();
        for (k, c) in m.target.coords.iter().enumerate() {
            match c {
                Coord::Var(v, o) => {
                    var_at.insert(v.as_str(), (k, *o));
                }
                _ => return false,
            }
        }
        let s = self.map_rule(MapKind::S, m.source.family);
        if s.target.family != f {
            return false;
        }
        let mut moved = false;
        for (k, c) in s.target.coords.iter().enumerate() {
            let Coord::Var(v, o) = c else { return false };
            let Some(&(pos, ro)) = var_at.get(v.as_str()) else { return false };
            if pos != k {
                return false;
            }
            moved |= o - ro != 0;
        }
        moved
    }

    pub fn decide_iso_closed(&self, n_max: u32) -> Result<Decision> {
        self.require_esg_empty()?;
        if let BnVerdict::NotClosed { n, limit_point } = self.decide_bn_closed(n_max)? {
            return Ok(Decision {
                verdict: Verdict::NotClosed(Box::new(Witness::Limit(SeqWitness {
                    n,
                    limit_point: self.space.format_point(&limit_point),
                }))),
                provenance: NOT_CLOSED_LIMIT.into(),
                coverage: format!("first failure at n = {n}"),
            });
        }
        if self.space.rules.is_empty() {
            return Ok(Decision {
                verdict: Verdict::Closed,
                provenance: DISCRETE.into(),
                coverage: "all n".into(),
            });
        }
        let hi = self.threshold(PROBE_WIDTH);
        let mut lcm = 1u32;
        for (f, fam) in self.space.families.iter().enumerate() {
            if !fam.space.has_vertices() {
                continue;
            }
            for v in self.grid(f, hi) {
                match self.period(&v) {
                    Ok(Some(l)) => lcm = lcm / gcd(lcm, l) * l,
                    Ok(None) => {}
                    Err(e) => {
                        return Ok(Decision {
                            verdict: Verdict::Unknown(e.to_string()),
                            provenance: BOUNDED_PERIODS.into(),
                            coverage: format!("n ≤ {n_max}"),
                        })
                    }
                }
            }
        }
        if lcm > n_max {
            if let BnVerdict::NotClosed { n, limit_point } = self.decide_bn_closed(lcm)? {
                return Ok(Decision {
                    verdict: Verdict::NotClosed(Box::new(Witness::Limit(SeqWitness {
                        n,
                        limit_point: self.space.format_point(&limit_point),
                    }))),
                    provenance: NOT_CLOSED_LIMIT.into(),
                    coverage: format!("first failure at n = {n}"),
                });
            }
        }
        Ok(Decision {
            verdict: Verdict::Closed,
            provenance: BOUNDED_PERIODS.into(),
            coverage: format!("all n: entrance-free cycle periods divide {lcm}, checked n ≤ {}", lcm.max(n_max)),
        })
    }

    /// Re-checks that the limit point lies in the closure of `V_n` but not in `V_n`.
    pub fn replay_witness(&self, w: &SeqWitness) -> std::result::Result<(), String> {
        let p = self.space.parse_point(&w.limit_point).map_err(|e| e.to_string())?;
        let vn = self.symbolic_vn(w.n).map_err(|e| e.to_string())?;
        if vn.contains(&self.space, &p) {
            return Err(format!("{} lies in V_{}", w.limit_point, w.n));
        }
        let cl = self.closure_of(&vn).map_err(|e| e.to_string())?;
        if !cl.contains(&self.space, &p) {
            return Err(format!("{} is not a limit of V_{}", w.limit_point, w.n));
        }
        Ok(())
    }

    /// Replays the isotropy sequences around a limit loop.
    ///
    /// `x^t` repeats the loop `loop_family(t)`; `y^t` follows the source map from
    /// the first point of row `t` of `row_family`, and `z^t = σ(y^t)`. The limit
    /// is the loop at `limit`. Checks the first `depth` edges of each path.
    pub fn replay_sequences(&self, loop_family: &str, row_family: &str, limit: &str, depth: usize) -> Result<SequenceReplay> {
        let lf = self.space.family_id(loop_family).ok_or_else(|| Error::MalformedInput(loop_family.into()))?;
        let rf = self.space.family_id(row_family).ok_or_else(|| Error::MalformedInput(row_family.into()))?;
        let z = self.space.parse_point(limit)?;
        let hi = self.threshold(PROBE_WIDTH);
        let is_loop = |e: &Point| self.apply(MapKind::R, e) == *e && self.apply(MapKind::S, e) == *e;
        // Interior approximants: loops whose range lies in V_1.
        let mut interior = true;
        for t in 1..=hi {
            let e = Point { family: lf, idx: vec![t] };
            interior &= is_loop(&e) && self.in_vn(&e, 1)?;
        }
        // Non-isotropy approximants.
        let mut non_isotropy = true;
        let row_start = |t: u32| {
            let f = &self.space.families[rf];
            Point { family: rf, idx: if f.ordered { vec![t, t] } else { vec![t, 1] } }
        };
        let next = |e: &Point| -> Option<Point> {
            let pre = self.r_preimages(&self.apply(MapKind::S, e))?;
            (pre.len() == 1).then(|| pre[0].clone())
        };
        for t in 1..=hi {
            let mut y = vec![row_start(t)];
            for _ in 0..=depth {
                let Some(n) = next(y.last().unwrap()) else { return Err(Error::UnsupportedPresentation("row path is not forced".into())) };
                y.push(n);
            }
            non_isotropy &= y[..depth] != y[1..=depth];
        }
        // Convergence of every coordinate to the limit loop.
        let loop_seq = SeqExpr { family: lf, coords: vec![TCoord::T(0)] };
        let mut converge = is_loop(&z) && self.seq_converges(&loop_seq, &z);
        let f = &self.space.families[rf];
        let mut y_seq = SeqExpr {
            family: rf,
            coords: if f.ordered { vec![TCoord::T(0), TCoord::T(0)] } else { vec![TCoord::T(0), TCoord::C(1)] },
        };
        for _ in 0..=depth {
            converge &= self.seq_converges(&y_seq, &z);
            let s_img = self.map_seq(MapKind::S, &y_seq);
            let m = self.space.maps.iter().find(|m| m.kind == MapKind::R && m.target.family == s_img.family);
            let Some(m) = m else { return Err(Error::UnsupportedPresentation("row path leaves the presentation".into())) };
            y_seq = Self::subst(&m.source, &m.target, &s_img);
        }
        let limit_in_closure = self.closure_of(&self.symbolic_vn(1)?)?.contains(&self.space, &z);
        Ok(SequenceReplay {
            interior_approximants: interior,
            non_isotropy_approximants: non_isotropy,
            converge,
            limit_not_interior: !self.in_vn(&z, 1)?,
            limit_in_closure,
        })
    }
}

pub const NOT_CLOSED_LIMIT: &str = "a limit point of V_n lies outside V_n, so B^n is not closed";
pub const DISCRETE: &str = "discrete topological graph without singular vertices";
pub const BOUNDED_PERIODS: &str = "entrance-free cycle periods are bounded, so finitely many n cover all";

/// Outcome of [`ValidatedSeqSpace::replay_sequences`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceReplay {
    pub interior_approximants: bool,
    pub non_isotropy_approximants: bool,
    pub converge: bool,
    pub limit_not_interior: bool,
    pub limit_in_closure: bool,
}

impl SequenceReplay {
    pub fn all(&self) -> bool {
        self.interior_approximants
            && self.non_isotropy_approximants
            && self.converge
            && self.limit_not_interior
            && self.limit_in_closure
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SetExpr {
    pub fn empty() -> Self {
        SetExpr::default()
    }

    /// Drops items contained in other items and sorts.
    pub fn normalized(mut items: Vec<Item>) -> Self {
        items.sort();
        items.dedup();
        let keep: Vec<Item> = items
            .iter()
            .filter(|it| {
                !items.iter().any(|other| {
                    other != *it
                        && other.family == it.family
                        && it.bounds.iter().zip(&other.bounds).all(|(a, b)| a.within(*b))
                })
            })
            .cloned()
            .collect();
        SetExpr { items: keep }
    }

    pub fn union(&self, other: &SetExpr) -> SetExpr {
        SetExpr::normalized(self.items.iter().chain(&other.items).cloned().collect())
    }

    pub fn contains(&self, s: &SeqSpace, p: &Point) -> bool {
        s.valid(p)
            && self
                .items
                .iter()
                .any(|it| it.family == p.family && it.bounds.iter().zip(&p.idx).all(|(b, &v)| b.admits(v)))
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn max_const(&self) -> u32 {
        self.items.iter().flat_map(|it| it.bounds.iter().map(|b| b.constant())).max().unwrap_or(0)
    }

    pub fn display(&self, s: &SeqSpace) -> String {
        if self.items.is_empty() {
            return "∅".into();
        }
        let parts: Vec<String> = self
            .items
            .iter()
            .map(|it| {
                let name = &s.families[it.family].name;
                if it.bounds.is_empty() {
                    return format!("{{{name}}}");
                }
                let vars = ["i", "j"];
                let coords: Vec<String> = it
                    .bounds
                    .iter()
                    .enumerate()
                    .map(|(k, b)| match b {
                        Bound::Eq(c) => c.to_string(),
                        Bound::Ge(_) => vars[k].to_string(),
                    })
                    .collect();
                let conds: Vec<String> = it
                    .bounds
                    .iter()
                    .enumerate()
                    .filter_map(|(k, b)| match b {
                        Bound::Ge(c) => Some(format!("{}≥{c}", vars[k])),
                        Bound::Eq(_) => None,
                    })
                    .collect();
                if conds.is_empty() {
                    format!("{{{name}({})}}", coords.join(","))
                } else {
                    format!("{{{name}({}): {}}}", coords.join(","), conds.join(", "))
                }
            })
            .collect();
        parts.join(" ∪ ")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}{:?}", self.family, self.idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g3, tg1, TG1_TEXT};

    fn vs(s: SeqSpace) -> ValidatedSeqSpace {
        validate_seqspace(s).unwrap()
    }

    fn set(s: &SeqSpace, items: &[(&str, &[Bound])]) -> SetExpr {
        SetExpr::normalized(
            items.iter().map(|(f, b)| Item { family: s.family_id(f).unwrap(), bounds: b.to_vec() }).collect(),
        )
    }

    #[test]
    fn tg1_is_valid() {
        let v = vs(tg1());
        assert!(v.flags.esg_empty);
    }

    #[test]
    fn text_round_trip() {
        let s = tg1();
        let again = parse(&s.to_text()).unwrap();
        assert!(s.same_presentation(&again));
        assert!(parse(TG1_TEXT).is_ok());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse("seqgraph\nfamily A arity 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let err = parse("seqgraph\npoint Z\nlimit Q(inf) -> Z\n").unwrap_err();
        assert!(err.to_string().contains("unknown family"));
    }

    #[test]
    fn cyclic_limits_rejected() {
        let s = parse("family A arity 1\nfamily B arity 1\nlimit A(inf) -> B(1)\nlimit B(inf) -> A(1)\n").unwrap();
        assert!(matches!(validate_seqspace(s), Err(Error::CyclicLimits(_))));
    }

    #[test]
    fn discontinuous_source_rejected() {
        let text = TG1_TEXT.replace("map r : A(i) -> A(i)", "map r : A(i) -> B(1)");
        let s = parse(&text).unwrap();
        assert!(matches!(validate_seqspace(s), Err(Error::DiscontinuousMap(_))));
    }

    #[test]
    fn non_total_map_rejected() {
        let text = TG1_TEXT.replace("map s : C(i,j) -> C(i,j+1)", "map s : C(i,j) -> C(j,i)");
        let s = parse(&text).unwrap();
        assert!(matches!(validate_seqspace(s), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn discrete_embedding_is_valid() {
        let v = vs(from_directed_graph(&g1()));
        assert!(v.flags.esg_empty);
    }

    #[test]
    fn closure_examples() {
        let v = vs(tg1());
        let s = v.space().clone();
        assert!(v.closure_of(&SetExpr::empty()).unwrap().is_empty());
        let a = set(&s, &[("A", &[Bound::Ge(1)])]);
        let want = set(&s, &[("A", &[Bound::Ge(1)]), ("Z", &[])]);
        assert!(v.set_eq(&v.closure_of(&a).unwrap(), &want));
        let z = set(&s, &[("Z", &[])]);
        assert!(v.set_eq(&v.closure_of(&z).unwrap(), &z));
        let c = set(&s, &[("C", &[Bound::Eq(2), Bound::Ge(2)])]);
        let want = set(&s, &[("C", &[Bound::Eq(2), Bound::Ge(2)]), ("B", &[Bound::Eq(2)])]);
        assert!(v.set_eq(&v.closure_of(&c).unwrap(), &want));
        let all_c = set(&s, &[("C", &[Bound::Ge(1), Bound::Ge(1)])]);
        let cl = v.closure_of(&all_c).unwrap();
        assert!(cl.contains(&s, &s.parse_point("Z").unwrap()));
        assert!(cl.contains(&s, &s.parse_point("B(7)").unwrap()));
    }

    #[test]
    fn vn_examples() {
        let v = vs(tg1());
        let s = v.space().clone();
        let v1 = v.symbolic_vn(1).unwrap();
        assert!(v.set_eq(&v1, &set(&s, &[("A", &[Bound::Ge(1)])])));
        assert_eq!(v1.display(&s), "{A(i): i≥1}");
        let g = vs(from_directed_graph(&g1()));
        assert_eq!(g.symbolic_vn(1).unwrap().items.len(), 1);
        let g = vs(from_directed_graph(&g3()));
        for n in 1..=2 {
            assert!(g.symbolic_vn(n).unwrap().is_empty());
        }
    }

    #[test]
    fn bn_decisions() {
        let v = vs(tg1());
        let z = v.space().parse_point("Z").unwrap();
        assert_eq!(v.decide_bn_closed(1).unwrap(), BnVerdict::NotClosed { n: 1, limit_point: z });
        assert_eq!(vs(from_directed_graph(&g1())).decide_bn_closed(3).unwrap(), BnVerdict::AllClosed);
        assert_eq!(vs(from_directed_graph(&g3())).decide_bn_closed(3).unwrap(), BnVerdict::AllClosed);
    }

    #[test]
    fn iso_decisions() {
        let v = vs(tg1());
        let d = v.decide_iso_closed(3).unwrap();
        match d.verdict {
            Verdict::NotClosed(w) => match *w {
                Witness::Limit(w) => {
                    assert_eq!(w, SeqWitness { n: 1, limit_point: "Z".into() });
                    v.replay_witness(&w).unwrap();
                    assert!(v.replay_witness(&SeqWitness { n: 1, limit_point: "A(1)".into() }).is_err());
                }
                Witness::Path(_) => panic!("expected limit witness"),
            },
            other => panic!("{other:?}"),
        }
        let d = vs(from_directed_graph(&g1())).decide_iso_closed(3).unwrap();
        assert!(matches!(d.verdict, Verdict::Closed));
        assert_eq!(d.provenance, DISCRETE);
        let no_c: String = TG1_TEXT
            .lines()
            .filter(|l| !l.contains('C'))
            .map(|l| format!("{l}\n"))
            .collect();
        let v = vs(parse(&no_c).unwrap());
        let s = v.space().clone();
        let v1 = v.symbolic_vn(1).unwrap();
        assert!(v.set_eq(&v1, &set(&s, &[("A", &[Bound::Ge(1)]), ("B", &[Bound::Ge(1)]), ("Z", &[])])));
        assert!(matches!(v.decide_iso_closed(3).unwrap().verdict, Verdict::Closed));
    }

    #[test]
    fn tg1_sequences_replay() {
        let v = vs(tg1());
        let r = v.replay_sequences("A", "C", "Z", 4).unwrap();
        assert!(r.all(), "{r:?}");
    }

    #[test]
    fn row_paths_are_drifting() {
        let v = vs(tg1());
        let c = v.space().parse_point("C(2,5)").unwrap();
        assert_eq!(v.period(&c).unwrap(), None);
        assert_eq!(v.period(&v.space().parse_point("A(3)").unwrap()).unwrap(), Some(1));
    }
}
