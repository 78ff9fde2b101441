//! Groupoid elements, basic bisections, cycline pairs and the isotropy interior.

use std::collections::{HashMap, VecDeque};

use crate::degree::{Degree, Shift};
use crate::error::{Error, Result};
use crate::kgraph::{EdgeId, KGraph, Morphism};
use crate::pathspace::{self, epp_equal, segment_inf, shift, EPPath};

/// `(x, n, y)` with `σ^p(x) = σ^q(y)` and `n = p - q`.
#[derive(Clone, Debug)]
pub struct GroupoidElem {
    pub x: EPPath,
    pub n: Shift,
    pub y: EPPath,
    pub p: Degree,
    pub q: Degree,
}

/// `Z(μ, ν)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicBisection {
    pub mu: Morphism,
    pub nu: Morphism,
}

#[derive(Clone, Debug)]
pub enum CyclineVerdict {
    Cycline { states: usize },
    NotCycline { witness: EPPath, mismatch: Degree, states: usize },
}

impl CyclineVerdict {
    pub fn is_cycline(&self) -> bool {
        matches!(self, CyclineVerdict::Cycline { .. })
    }

    pub fn states(&self) -> usize {
        match self {
            CyclineVerdict::Cycline { states } | CyclineVerdict::NotCycline { states, .. } => *states,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InteriorVerdict {
    Interior { p: Degree, q: Degree },
    NotInterior,
    Unknown,
}

#[derive(Clone, Debug)]
pub enum FreenessVerdict {
    LikelyFree,
    NotFree { cylinder: Morphism, path: EPPath },
    Unknown,
}

pub fn make_gelem(g: &KGraph, x: EPPath, p: Degree, q: Degree, y: EPPath) -> Result<GroupoidElem> {
    if p.k() != g.k() || q.k() != g.k() {
        return Err(Error::NotAGroupoidElement("shift degrees have the wrong rank".into()));
    }
    if !epp_equal(g, &shift(g, &x, &p), &shift(g, &y, &q)) {
        return Err(Error::NotAGroupoidElement(format!(
            "σ^{p} of {} differs from σ^{q} of {}",
            pathspace::pretty(g, &x),
            pathspace::pretty(g, &y)
        )));
    }
    Ok(GroupoidElem { n: p.diff(&q), x, y, p, q })
}

/// `(x, 0, x)`.
pub fn unit(g: &KGraph, x: &EPPath) -> GroupoidElem {
    let z = Degree::zero(g.k());
    GroupoidElem { x: x.clone(), n: Shift::zero(g.k()), y: x.clone(), p: z.clone(), q: z }
}

pub fn inverse(a: &GroupoidElem) -> GroupoidElem {
    GroupoidElem { x: a.y.clone(), n: a.n.neg(), y: a.x.clone(), p: a.q.clone(), q: a.p.clone() }
}

/// `a · b`, defined when `y_a = x_b`.
pub fn compose(g: &KGraph, a: &GroupoidElem, b: &GroupoidElem) -> Result<GroupoidElem> {
    if !epp_equal(g, &a.y, &b.x) {
        return Err(Error::NotComposable("range of the second element differs from source of the first".into()));
    }
    let m = a.q.join(&b.p);
    let p = &a.p + &m.checked_sub(&a.q).unwrap();
    let q = &b.q + &m.checked_sub(&b.p).unwrap();
    Ok(GroupoidElem { x: a.x.clone(), n: a.n.add(&b.n), y: b.y.clone(), p, q })
}

pub fn is_isotropy(g: &KGraph, gel: &GroupoidElem) -> bool {
    epp_equal(g, &gel.x, &gel.y)
}

pub fn in_bisection(g: &KGraph, gel: &GroupoidElem, bb: &BasicBisection) -> bool {
    gel.n == bb.mu.degree.diff(&bb.nu.degree)
        && pathspace::in_cylinder(g, &gel.x, &bb.mu)
        && pathspace::in_cylinder(g, &gel.y, &bb.nu)
        && epp_equal(g, &shift(g, &gel.x, &bb.mu.degree), &shift(g, &gel.y, &bb.nu.degree))
}

pub fn format_gelem(g: &KGraph, gel: &GroupoidElem) -> String {
    format!("({}, {}, {})", pathspace::pretty(g, &gel.x), gel.n, pathspace::pretty(g, &gel.y))
}

/// Distinct points of the orbit `{σ^m(x)}` in breadth-first order of `m`, or
/// `None` once more than `limit` points have been found.
pub fn orbit(g: &KGraph, x: &EPPath, limit: usize) -> Option<Vec<(Degree, EPPath)>> {
    let k = g.k();
    if k == 1 {
        // Shifts of a canonical rank-one path are pairwise distinct until the cycle repeats.
        let x = pathspace::canonicalize(g, x);
        let n = x.prefix.edges.len() + x.cycle.edges.len();
        if n > limit {
            return None;
        }
        return Some(
            (0..n as u32)
                .map(|m| {
                    let d = Degree::new(vec![m]);
                    let y = shift(g, &x, &d);
                    (d, y)
                })
                .collect(),
        );
    }
    let key_deg = Degree::splat(k, 2);
    let zero = Degree::zero(k);
    let mut out: Vec<(Degree, EPPath)> = Vec::new();
    let mut buckets: HashMap<Morphism, Vec<usize>> = HashMap::new();
    let mut queue = VecDeque::from([(zero.clone(), x.clone())]);
    while let Some((m, y)) = queue.pop_front() {
        let key = segment_inf(g, &y, &zero, &key_deg);
        let bucket = buckets.entry(key).or_default();
        if bucket.iter().any(|&i| epp_equal(g, &out[i].1, &y)) {
            continue;
        }
        if out.len() == limit {
            return None;
        }
        bucket.push(out.len());
        for i in 0..k {
            let step = Degree::unit(k, i);
            queue.push_back((&m + &step, shift(g, &y, &step)));
        }
        out.push((m, y));
    }
    Some(out)
}

/// Some `(x, n, x)` in the groupoid, if `x` admits shift period `n`.
pub fn isotropy_at(g: &KGraph, x: &EPPath, n: &Shift) -> Option<GroupoidElem> {
    let (np, nm) = (n.pos(), n.neg_part());
    for (m, y) in orbit(g, x, 4096)? {
        if epp_equal(g, &shift(g, &y, &np), &shift(g, &y, &nm)) {
            return Some(GroupoidElem {
                x: x.clone(),
                n: n.clone(),
                y: x.clone(),
                p: &m + &np,
                q: &m + &nm,
            });
        }
    }
    None
}

/// Reduction of a pair with common source: strip the common initial segment of
/// degree `d(α) ∧ d(β)`; `None` on a mismatch.
pub fn reduce(g: &KGraph, alpha: &Morphism, beta: &Morphism) -> Option<(Morphism, Morphism)> {
    if alpha.rng != beta.rng {
        return None;
    }
    let m = alpha.degree.meet(&beta.degree);
    let (h1, t1) = g.factor(alpha, &m).expect("meet below degree");
    let (h2, t2) = g.factor(beta, &m).expect("meet below degree");
    (h1 == h2).then_some((t1, t2))
}

/// Reachable reduced states of the cycline fixpoint.
///
/// `succ[s]` lists `(edge, target)` where `target` is `None` for a mismatch.
#[derive(Clone, Debug, Default)]
pub struct StateSpace {
    pub states: Vec<(Morphism, Morphism)>,
    pub succ: Vec<Vec<(EdgeId, Option<usize>)>>,
    parent: Vec<Option<(usize, EdgeId)>>,
    index: HashMap<(Morphism, Morphism), usize>,
    pending: VecDeque<usize>,
}

impl StateSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn id(&self, alpha: &Morphism, beta: &Morphism) -> Option<usize> {
        self.index.get(&(alpha.clone(), beta.clone())).copied()
    }

    fn intern(&mut self, state: (Morphism, Morphism), parent: Option<(usize, EdgeId)>) -> usize {
        if let Some(&id) = self.index.get(&state) {
            return id;
        }
        let id = self.states.len();
        self.index.insert(state.clone(), id);
        self.states.push(state);
        self.succ.push(Vec::new());
        self.parent.push(parent);
        self.pending.push_back(id);
        id
    }

    /// Adds an already reduced state as a root.
    pub fn add_state(&mut self, alpha: Morphism, beta: Morphism) -> usize {
        self.intern((alpha, beta), None)
    }

    /// Reduces `(α, β)` and adds it as a root; `None` on a mismatch.
    pub fn add_root(&mut self, g: &KGraph, alpha: &Morphism, beta: &Morphism) -> Option<usize> {
        let state = reduce(g, alpha, beta)?;
        Some(self.intern(state, None))
    }

    /// Expands pending states. With `stop_on_bad`, returns at the first mismatch
    /// as `(state, edge)`.
    pub fn explore(&mut self, g: &KGraph, stop_on_bad: bool) -> Option<(usize, EdgeId)> {
        let mut first_bad = None;
        while let Some(s) = self.pending.pop_front() {
            let (alpha, beta) = self.states[s].clone();
            let at = alpha.src;
            let mut out = Vec::new();
            for c in 0..g.k() {
                for &e in g.incoming(at, c) {
                    let em = g.edge_morphism(e);
                    let a2 = g.compose(&alpha, &em).expect("composable");
                    let b2 = g.compose(&beta, &em).expect("composable");
                    let target = reduce(g, &a2, &b2).map(|st| self.intern(st, Some((s, e))));
                    if target.is_none() && first_bad.is_none() {
                        first_bad = Some((s, e));
                    }
                    out.push((e, target));
                }
            }
            self.succ[s] = out;
            if stop_on_bad && first_bad.is_some() {
                return first_bad;
            }
        }
        first_bad
    }

    /// Edge path from the root of `s` to `s`.
    pub fn path_to(&self, mut s: usize) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        while let Some((p, e)) = self.parent[s] {
            edges.push(e);
            s = p;
        }
        edges.reverse();
        edges
    }

    /// `safe[s]`: no mismatch is reachable from `s`. Requires a full exploration.
    pub fn safe(&self) -> Vec<bool> {
        let n = self.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut unsafe_ = vec![false; n];
        let mut stack = Vec::new();
        for (s, out) in self.succ.iter().enumerate() {
            for &(_, t) in out {
                match t {
                    Some(t) => preds[t].push(s),
                    None => {
                        if !unsafe_[s] {
                            unsafe_[s] = true;
                            stack.push(s);
                        }
                    }
                }
            }
        }
        while let Some(t) = stack.pop() {
            for &s in &preds[t] {
                if !unsafe_[s] {
                    unsafe_[s] = true;
                    stack.push(s);
                }
            }
        }
        unsafe_.into_iter().map(|u| !u).collect()
    }
}

/// Upper bound on the number of reduced states for residual degrees `(a, b)`.
pub fn state_bound(g: &KGraph, a: &Degree, b: &Degree) -> usize {
    (0..g.vertex_count())
        .map(|v| g.enumerate_morphisms(v, a).len() * g.enumerate_morphisms(v, b).len())
        .sum()
}

/// Exact cycline test: `μx = νx` for every `x ∈ s(μ)Λ^∞`.
pub fn is_cycline(g: &KGraph, mu: &Morphism, nu: &Morphism) -> Result<CyclineVerdict> {
    match cycline_search(g, mu, nu)? {
        (None, states) => Ok(CyclineVerdict::Cycline { states }),
        (Some(lambda), states) => {
            let (witness, mismatch) = mismatch_witness(g, mu, nu, &lambda)?;
            let mismatch = if mu.degree == nu.degree { mu.degree.clone() } else { mismatch };
            Ok(CyclineVerdict::NotCycline { witness, mismatch, states })
        }
    }
}

/// [`is_cycline`] without building a witness.
pub fn cycline(g: &KGraph, mu: &Morphism, nu: &Morphism) -> Result<bool> {
    if g.k() == 1 && mu.src == nu.src {
        return Ok(cycline_1(g, mu, nu));
    }
    Ok(cycline_search(g, mu, nu)?.0.is_none())
}

/// Rank one: the longer path must be the shorter one followed by an entrance-free cycle.
fn cycline_1(g: &KGraph, mu: &Morphism, nu: &Morphism) -> bool {
    let (long, short) = if mu.edges.len() >= nu.edges.len() { (mu, nu) } else { (nu, mu) };
    if long.edges.len() == short.edges.len() {
        return mu == nu;
    }
    if long.rng != short.rng || !long.edges.starts_with(&short.edges) {
        return false;
    }
    long.edges[short.edges.len()..].iter().all(|&e| g.incoming(g.rng(e), 0).len() == 1)
}

/// The edge path to the first mismatch, if any, and the number of states visited.
fn cycline_search(g: &KGraph, mu: &Morphism, nu: &Morphism) -> Result<(Option<Vec<EdgeId>>, usize)> {
    if mu.src != nu.src {
        return Err(Error::PreconditionViolated(format!(
            "{} and {} have different sources",
            g.format_morphism(mu),
            g.format_morphism(nu)
        )));
    }
    if mu.degree == nu.degree {
        return Ok(if mu == nu { (None, 1) } else { (Some(Vec::new()), 0) });
    }
    let mut space = StateSpace::new();
    let lambda = match space.add_root(g, mu, nu) {
        None => Vec::new(),
        Some(_) => match space.explore(g, true) {
            None => return Ok((None, space.len())),
            Some((s, e)) => {
                let mut path = space.path_to(s);
                path.push(e);
                path
            }
        },
    };
    Ok((Some(lambda), space.len()))
}

fn mismatch_witness(g: &KGraph, mu: &Morphism, nu: &Morphism, lambda: &[EdgeId]) -> Result<(EPPath, Degree)> {
    let lam = if lambda.is_empty() { g.vertex_morphism(mu.src) } else { g.path(lambda)? };
    let x = short_extension(g, &lam)?;
    let m = (&mu.degree + &lam.degree).meet(&(&nu.degree + &lam.degree));
    Ok((x, m))
}

/// A short eventually periodic path in `Z(λ)`: the first tail in order of
/// total degree with prefix `≤ 1` and cycle `≤ 2` in each color.
pub fn short_extension(g: &KGraph, lam: &Morphism) -> Result<EPPath> {
    let k = g.k();
    let mut shapes: Vec<(Degree, Degree)> = Vec::new();
    for p in Degree::ones(k).below() {
        for c in Degree::splat(k, 2).below().into_iter().filter(|c| c.is_positive()) {
            shapes.push((p.clone(), c));
        }
    }
    shapes.sort_by_key(|(p, c)| (p.total() + c.total(), p.total()));
    for (p, c) in shapes {
        for prefix in g.enumerate_morphisms(lam.src, &p) {
            if let Some(cycle) = g.enumerate_morphisms(prefix.src, &c).into_iter().find(|m| m.src == prefix.src) {
                return pathspace::prepend(g, lam, &EPPath::new(g, prefix, cycle)?);
            }
        }
    }
    pathspace::prepend(g, lam, &pathspace::any_epp_from(g, lam.src)?)
}

/// Decides whether `(x, n, x)` lies in the interior of the isotropy.
pub fn in_iso_interior(g: &KGraph, gel: &GroupoidElem, window: usize) -> Result<InteriorVerdict> {
    if !is_isotropy(g, gel) {
        return Err(Error::PreconditionViolated("element is not in the isotropy".into()));
    }
    let (np, nm) = (gel.n.pos(), gel.n.neg_part());
    let zero = Degree::zero(g.k());
    let Some(points) = orbit(g, &gel.x, window) else {
        return Ok(InteriorVerdict::Unknown);
    };
    for (m, y) in points {
        if !epp_equal(g, &shift(g, &y, &np), &shift(g, &y, &nm)) {
            continue;
        }
        let a = segment_inf(g, &y, &zero, &np);
        let b = segment_inf(g, &y, &zero, &nm);
        if cycline(g, &a, &b)? {
            return Ok(InteriorVerdict::Interior { p: &m + &np, q: &m + &nm });
        }
    }
    Ok(InteriorVerdict::NotInterior)
}

/// Every bisection `Z(μ, ν)` with `d(μ), d(ν) ≤ depth·1` around `gel` meets `S`.
///
/// Unlike the sequence characterization of convergence, no minimality is
/// imposed on the pair of shifts: all small bisections are tried.
pub fn closure_probe(g: &KGraph, s: &[GroupoidElem], gel: &GroupoidElem, depth: u32) -> bool {
    let k = g.k();
    let top = Degree::splat(k, depth);
    // A bisection only holds elements with its own shift.
    let s: Vec<&GroupoidElem> = s.iter().filter(|el| el.n == gel.n).collect();
    for a in top.below() {
        let b: Vec<i64> = (0..k).map(|i| a[i] as i64 - gel.n.coords()[i]).collect();
        if b.iter().any(|&c| c < 0 || c > depth as i64) {
            continue;
        }
        let b = Degree::new(b.into_iter().map(|c| c as u32).collect());
        if !epp_equal(g, &shift(g, &gel.x, &a), &shift(g, &gel.y, &b)) {
            continue;
        }
        let zero = Degree::zero(k);
        let bb = BasicBisection { mu: segment_inf(g, &gel.x, &zero, &a), nu: segment_inf(g, &gel.y, &zero, &b) };
        if !s.iter().any(|el| in_bisection(g, el, &bb)) {
            return false;
        }
    }
    true
}

const FREENESS_BUDGET: usize = 200_000;

/// Looks for a cylinder on which every path has nontrivial isotropy, in the
/// form of a cycline pair `(α, β)` with `d(α) ∧ d(β) = 0` and `d(α) ≠ d(β)`.
pub fn essential_freeness_probe(g: &KGraph, depth: u32) -> Result<FreenessVerdict> {
    if !g.no_sources() {
        return Err(Error::PreconditionViolated("probe needs a graph without sources".into()));
    }
    let k = g.k();
    let mut degs: Vec<(Degree, Degree)> = Vec::new();
    let all = Degree::splat(k, depth).below();
    for a in &all {
        for b in &all {
            if a != b && a.meet(b).is_zero() && !a.is_zero() {
                degs.push((a.clone(), b.clone()));
            }
        }
    }
    degs.sort_by_key(|(a, b)| (a.total() + b.total(), a.clone(), b.clone()));
    let mut work = 0usize;
    for (a, b) in &degs {
        for w in 0..g.vertex_count() {
            let alphas = g.enumerate_morphisms(w, a);
            let betas = g.enumerate_morphisms(w, b);
            for alpha in &alphas {
                for beta in betas.iter().filter(|beta| beta.src == alpha.src) {
                    work += 1;
                    if work > FREENESS_BUDGET {
                        return Ok(FreenessVerdict::Unknown);
                    }
                    if cycline(g, alpha, beta)? {
                        let cylinder = shortest_determining_prefix(g, alpha);
                        let path = short_extension(g, alpha)?;
                        return Ok(FreenessVerdict::NotFree { cylinder, path });
                    }
                }
            }
        }
    }
    Ok(FreenessVerdict::LikelyFree)
}

/// The shortest nontrivial initial segment of `α` whose only extension to
/// degree `d(α)` is `α`; it spans the same cylinder.
fn shortest_determining_prefix(g: &KGraph, alpha: &Morphism) -> Morphism {
    let zero = Degree::zero(g.k());
    for p in alpha.degree.below() {
        if p.is_zero() {
            continue;
        }
        let mu = g.segment(alpha, &zero, &p).expect("below degree");
        let rest = alpha.degree.checked_sub(&p).unwrap();
        let ext = g.enumerate_morphisms(mu.src, &rest);
        if ext.len() == 1 {
            return mu;
        }
    }
    alpha.clone()
}
