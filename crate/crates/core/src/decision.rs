//! Closedness of the isotropy interior: witness search, decisions and reports.

use crate::degree::Degree;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, ROW_FINITE_NO_SOURCES};
use crate::isotropy::{self, FreenessVerdict, StateSpace};
use crate::kgraph::{KGraph, Morphism};
use crate::pathspace::{self, epp_equal, segment_inf, shift, EPPath};
use crate::seqgraph::SeqWitness;

pub const UNIQUE_PATHS: &str = "every vertex has a unique infinite path";
pub const NO_BAD_STATES: &str = "no periodic non-cycline state can be sustained";
pub const WITNESS_PATH: &str = "periodic path that is never cycline but always cycline-extendable";

/// Search bounds; degree bounds are multiples of `(1, …, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub pq_max: u32,
    pub prefix_bound: u32,
    pub cycle_bound: u32,
    pub depth: u32,
    pub window: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { pq_max: 3, prefix_bound: 3, cycle_bound: 3, depth: 3, window: 4096 }
    }
}

/// A path `x` with `σ^p(x) = σ^q(x)` satisfying the never-cycline /
/// always-extendable condition.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub p: Degree,
    pub q: Degree,
    pub x: EPPath,
    pub verified_window: Degree,
    /// `(p', q', μ)` with `(x(p')μ, x(q')μ)` cycline.
    pub mu_witnesses: Vec<(Degree, Degree, Morphism)>,
    /// Number of distinct shifts of `x` checked, covering every `(p', q')`.
    pub orbit_size: usize,
}

#[derive(Clone, Debug)]
pub enum Witness {
    Path(WitnessReport),
    Limit(SeqWitness),
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Closed,
    NotClosed(Box<Witness>),
    Unknown(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Closed => "closed",
            Verdict::NotClosed(_) => "not_closed",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub provenance: String,
    /// Which shift pairs the verdict covers.
    pub coverage: String,
}

#[derive(Clone, Debug)]
pub enum PqOutcome {
    Witness(WitnessReport),
    /// No state of the periodic fixpoint survives, so no path qualifies.
    Empty { states: usize },
    /// Candidates exhausted but a sustainable state set remains.
    Exhausted { candidates: usize, sustained: usize },
}

/// All ordered pairs `μ ≠ ν` with common source, degrees `≤ bound`, that are cycline.
pub fn find_cycline_pairs(g: &KGraph, bound: &Degree) -> Vec<(Morphism, Morphism)> {
    let mut by_src: Vec<Vec<Morphism>> = vec![Vec::new(); g.vertex_count()];
    for w in 0..g.vertex_count() {
        for d in bound.below() {
            for m in g.enumerate_morphisms(w, &d) {
                by_src[m.src].push(m);
            }
        }
    }
    let mut out = Vec::new();
    for group in &mut by_src {
        group.sort();
        for mu in group.iter() {
            for nu in group.iter() {
                if mu != nu && isotropy::cycline(g, mu, nu).unwrap_or(false) {
                    out.push((mu.clone(), nu.clone()));
                }
            }
        }
    }
    out
}

/// The fixpoint states `(α, β)` with `d(α) = a`, `d(β) = b` and their classification.
struct PeriodicStates {
    space: StateSpace,
    /// Not cycline, but some cycline state is reachable.
    good: Vec<bool>,
    /// Greatest subset of `good` in which every state has a successor in every color.
    sustained: Vec<bool>,
}

fn periodic_states(g: &KGraph, a: &Degree, b: &Degree) -> PeriodicStates {
    let mut space = StateSpace::new();
    for w in 0..g.vertex_count() {
        let betas = g.enumerate_morphisms(w, b);
        for alpha in g.enumerate_morphisms(w, a) {
            for beta in betas.iter().filter(|beta| beta.src == alpha.src) {
                space.add_state(alpha.clone(), beta.clone());
            }
        }
    }
    space.explore(g, false);
    let safe = space.safe();
    let n = space.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, out) in space.succ.iter().enumerate() {
        for &(_, t) in out {
            if let Some(t) = t {
                preds[t].push(s);
            }
        }
    }
    let mut extendable = safe.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&s| safe[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !extendable[s] {
                extendable[s] = true;
                stack.push(s);
            }
        }
    }
    let good: Vec<bool> = (0..n).map(|s| !safe[s] && extendable[s]).collect();
    let mut sustained = good.clone();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !sustained[s] {
                continue;
            }
            let ok = (0..g.k()).all(|c| {
                space.succ[s].iter().any(|&(e, t)| g.color(e) == c && t.is_some_and(|t| sustained[t]))
            });
            if !ok {
                sustained[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    PeriodicStates { space, good, sustained }
}

/// A cycline extension `μ` of `(α, β)`, if one exists.
pub fn cycline_extension(g: &KGraph, alpha: &Morphism, beta: &Morphism) -> Option<Morphism> {
    let mut space = StateSpace::new();
    space.add_root(g, alpha, beta)?;
    space.explore(g, false);
    let safe = space.safe();
    let s = (0..space.len()).find(|&s| safe[s])?;
    let edges = space.path_to(s);
    Some(if edges.is_empty() { g.vertex_morphism(alpha.src) } else { g.path(&edges).ok()? })
}

/// Searches `Λ^∞_{p,q}` for an eventually periodic element.
pub fn lambda_pq_search(g: &KGraph, p: &Degree, q: &Degree, bounds: &Bounds) -> Result<PqOutcome> {
    if p == q {
        return Err(Error::PreconditionViolated("p and q must differ".into()));
    }
    if !g.no_sources() {
        return Err(Error::PreconditionViolated("witness search needs a graph without sources".into()));
    }
    let n = p.diff(q);
    let (a, b) = (n.pos(), n.neg_part());
    let ps = periodic_states(g, &a, &b);
    let sustained = ps.sustained.iter().filter(|&&s| s).count();
    if sustained == 0 {
        return Ok(PqOutcome::Empty { states: ps.space.len() });
    }
    let k = g.k();
    let zero = Degree::zero(k);
    let m = p.meet(q);
    let mut candidates = 0;
    for v in 0..g.vertex_count() {
        let xs = pathspace::enumerate_epps(g, v, &Degree::splat(k, bounds.prefix_bound), &Degree::splat(k, bounds.cycle_bound))?;
        for x in xs {
            candidates += 1;
            if !epp_equal(g, &shift(g, &x, p), &shift(g, &x, q)) {
                continue;
            }
            let Some(points) = isotropy::orbit(g, &shift(g, &x, &m), bounds.window) else {
                continue;
            };
            let all_good = points.iter().all(|(_, y)| {
                let alpha = segment_inf(g, y, &zero, &a);
                let beta = segment_inf(g, y, &zero, &b);
                ps.space.id(&alpha, &beta).is_some_and(|s| ps.good[s])
            });
            if all_good {
                return Ok(PqOutcome::Witness(witness_report(g, p, q, x, points.len())?));
            }
        }
    }
    Ok(PqOutcome::Exhausted { candidates, sustained })
}

fn witness_report(g: &KGraph, p: &Degree, q: &Degree, x: EPPath, orbit_size: usize) -> Result<WitnessReport> {
    let zero = Degree::zero(g.k());
    let window = x.cycle.degree.clone();
    let mut mu_witnesses = Vec::new();
    for t in window.below() {
        let (p2, q2) = (p + &t, q + &t);
        let alpha = segment_inf(g, &x, &zero, &p2);
        let beta = segment_inf(g, &x, &zero, &q2);
        let mu = cycline_extension(g, &alpha, &beta)
            .ok_or_else(|| Error::PreconditionViolated("witness state has no cycline extension".into()))?;
        mu_witnesses.push((p2, q2, mu));
    }
    Ok(WitnessReport { p: p.clone(), q: q.clone(), x, verified_window: window, mu_witnesses, orbit_size })
}

/// Re-checks every recorded claim of a witness.
pub fn replay_witness(g: &KGraph, w: &WitnessReport) -> std::result::Result<(), String> {
    let zero = Degree::zero(g.k());
    if !epp_equal(g, &shift(g, &w.x, &w.p), &shift(g, &w.x, &w.q)) {
        return Err("shift identity σ^p(x) = σ^q(x) fails".into());
    }
    let expected = w.verified_window.below();
    if expected.len() != w.mu_witnesses.len() {
        return Err("witness window is incomplete".into());
    }
    for (t, (p2, q2, mu)) in expected.iter().zip(&w.mu_witnesses) {
        if *p2 != &w.p + t || *q2 != &w.q + t {
            return Err(format!("unexpected shift pair ({p2}, {q2})"));
        }
        let alpha = segment_inf(g, &w.x, &zero, p2);
        let beta = segment_inf(g, &w.x, &zero, q2);
        let plain = isotropy::is_cycline(g, &alpha, &beta).map_err(|e| e.to_string())?;
        if plain.is_cycline() {
            return Err(format!("(x({p2}), x({q2})) is cycline"));
        }
        let am = g.compose(&alpha, mu).map_err(|e| e.to_string())?;
        let bm = g.compose(&beta, mu).map_err(|e| e.to_string())?;
        if !isotropy::cycline(g, &am, &bm).map_err(|e| e.to_string())? {
            return Err(format!("extension {} at ({p2}, {q2}) is not cycline", g.format_morphism(mu)));
        }
    }
    Ok(())
}

/// Reduced shift pairs `(a, b)`, `a ∧ b = 0`, up to swapping, with `a, b ≤ bound·1`,
/// ordered by the ∞-norm of `a - b`, then by larger support, then lexicographically.
fn reduced_pairs(k: usize, bound: u32) -> Vec<(Degree, Degree)> {
    let all = Degree::splat(k, bound).below();
    let mut out: Vec<(Degree, Degree)> = Vec::new();
    for a in &all {
        for b in &all {
            if a.coords() > b.coords() && a.meet(b).is_zero() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out.sort_by_key(|(a, b)| {
        let n = a.diff(b);
        let support = n.coords().iter().filter(|&&c| c != 0).count();
        (n.max_abs(), std::cmp::Reverse(support), a.total() + b.total())
    });
    out
}

/// Decides closedness of the isotropy interior of a finite k-graph.
pub fn decide_iso_closed(g: &KGraph, bounds: &Bounds) -> Result<Decision> {
    if !g.no_sources() {
        return Err(Error::PreconditionViolated("decision needs a graph without sources".into()));
    }
    if g.k() == 1 {
        return Ok(Decision {
            verdict: Verdict::Closed,
            provenance: ROW_FINITE_NO_SOURCES.into(),
            coverage: "all p ≠ q".into(),
        });
    }
    if (0..g.vertex_count()).all(|v| g.has_unique_infinite_path(v)) {
        return Ok(Decision {
            verdict: Verdict::Closed,
            provenance: UNIQUE_PATHS.into(),
            coverage: "all p ≠ q: every common-source pair with equal ranges is cycline".into(),
        });
    }
    let mut undecided = Vec::new();
    for (a, b) in reduced_pairs(g.k(), bounds.pq_max) {
        match lambda_pq_search(g, &a, &b, bounds)? {
            PqOutcome::Witness(w) => {
                return Ok(Decision {
                    verdict: Verdict::NotClosed(Box::new(Witness::Path(w))),
                    provenance: WITNESS_PATH.into(),
                    coverage: format!("witness at p = {a}, q = {b}"),
                });
            }
            PqOutcome::Empty { .. } => {}
            PqOutcome::Exhausted { .. } => undecided.push(format!("({a}, {b})")),
        }
    }
    let reason = if undecided.is_empty() {
        format!(
            "no witness exists for shifts up to pq_max = {}; larger shifts are not covered",
            bounds.pq_max
        )
    } else {
        format!(
            "shift pairs {} admit sustained states but no eventually periodic witness within prefix bound {} and cycle bound {}",
            undecided.join(", "),
            bounds.prefix_bound,
            bounds.cycle_bound
        )
    };
    Ok(Decision {
        verdict: Verdict::Unknown(reason),
        provenance: NO_BAD_STATES.into(),
        coverage: format!("p, q ≤ {}·1", bounds.pq_max),
    })
}

/// Decision for a directed graph, delegating to its certificate.
pub fn decide_iso_closed_graph(g: &DirectedGraph) -> Result<Decision> {
    let cert = g.decide_iso_closed()?;
    Ok(Decision {
        verdict: Verdict::Closed,
        provenance: cert.kind.into(),
        coverage: format!("all p ≠ q; closure probe separated {} boundary elements", cert.cross_checked),
    })
}

#[derive(Clone, Debug)]
pub struct Flags {
    pub no_sources: bool,
    pub row_finite: bool,
    pub topologically_free: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub flags: Flags,
    pub freeness: FreenessVerdict,
    pub cycline_bound: Degree,
    pub cycline_pairs: Vec<(Morphism, Morphism)>,
    pub decision: Decision,
    pub interpretation: Vec<String>,
}

/// Validation flags, freeness probes, cycline inventory, decision and interpretation.
pub fn cartan_report(g: &KGraph, bounds: &Bounds) -> Result<Report> {
    let topologically_free = if g.k() == 1 {
        Some(DirectedGraph::from_kgraph(g.clone())?.is_topologically_free()?)
    } else {
        None
    };
    let depth = if g.k() == 1 { g.edge_count() as u32 } else { bounds.depth.min(2) };
    let freeness = isotropy::essential_freeness_probe(g, depth)?;
    let cycline_bound = Degree::ones(g.k());
    let cycline_pairs = find_cycline_pairs(g, &cycline_bound);
    let decision = decide_iso_closed(g, bounds)?;
    let diagonal = topologically_free == Some(true) || matches!(freeness, FreenessVerdict::LikelyFree);
    let interpretation = interpretation(&decision, diagonal, bounds);
    Ok(Report {
        flags: Flags { no_sources: g.no_sources(), row_finite: true, topologically_free },
        freeness,
        cycline_bound,
        cycline_pairs,
        decision,
        interpretation,
    })
}

pub fn interpretation(decision: &Decision, diagonal: bool, bounds: &Bounds) -> Vec<String> {
    match &decision.verdict {
        Verdict::Closed => {
            let mut lines = vec![
                "Cartan subalgebra: YES".to_string(),
                "C_r*(Iso°) is a Cartan subalgebra (Iso° is abelian: isotropy groups embed in Z^k)".to_string(),
            ];
            if diagonal {
                lines.push("Iso° is the unit space, so the Cartan subalgebra is the diagonal".into());
            }
            lines
        }
        Verdict::NotClosed(_) => vec![
            "Cartan subalgebra: NO".to_string(),
            "Iso° is not closed, so C_r*(Iso°) is not a Cartan subalgebra".to_string(),
        ],
        Verdict::Unknown(reason) => vec![
            "Cartan subalgebra: UNKNOWN".to_string(),
            format!("undecided: {reason}"),
            format!(
                "advice: rerun with larger bounds, e.g. --pq-max {} --prefix-bound {} --cycle-bound {}",
                bounds.pq_max + 2,
                bounds.prefix_bound + 1,
                bounds.cycle_bound + 1
            ),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g2, g3, k1, k2};

    fn d(c: &[u32]) -> Degree {
        Degree::new(c.to_vec())
    }

    #[test]
    fn cycline_inventories() {
        let g = k1();
        let pairs = find_cycline_pairs(&g, &d(&[1, 1]));
        let (b, r) = (g.path_by_names("b").unwrap(), g.path_by_names("r").unwrap());
        assert!(pairs.contains(&(b, r)));
        let g = g3().to_kgraph();
        assert!(find_cycline_pairs(&g, &d(&[2])).is_empty());
        let g = g1().to_kgraph();
        let pairs = find_cycline_pairs(&g, &d(&[1]));
        assert!(pairs.contains(&(g.path_by_names("e").unwrap(), g.vertex_morphism(0))));
    }

    #[test]
    fn pq_search_examples() {
        let bounds = Bounds::default();
        let g = k2();
        match lambda_pq_search(&g, &d(&[1, 0]), &d(&[0, 1]), &bounds).unwrap() {
            PqOutcome::Witness(w) => {
                assert_eq!(pathspace::pretty(&g, &w.x), "(e_b e_r)^∞");
                replay_witness(&g, &w).unwrap();
            }
            other => panic!("{other:?}"),
        }
        let g = k1();
        assert!(matches!(lambda_pq_search(&g, &d(&[1, 0]), &d(&[0, 1]), &bounds).unwrap(), PqOutcome::Empty { .. }));
        let g = g1().to_kgraph();
        assert!(matches!(lambda_pq_search(&g, &d(&[1]), &d(&[0]), &bounds).unwrap(), PqOutcome::Empty { .. }));
        assert!(lambda_pq_search(&g, &d(&[1]), &d(&[1]), &bounds).is_err());
    }

    #[test]
    fn decisions() {
        let bounds = Bounds::default();
        let dec = decide_iso_closed(&g2().to_kgraph(), &bounds).unwrap();
        assert!(matches!(dec.verdict, Verdict::Closed));
        assert_eq!(dec.provenance, ROW_FINITE_NO_SOURCES);
        let dec = decide_iso_closed(&k1(), &bounds).unwrap();
        assert!(matches!(dec.verdict, Verdict::Closed));
        let dec = decide_iso_closed(&k2(), &bounds).unwrap();
        match dec.verdict {
            Verdict::NotClosed(w) => match *w {
                Witness::Path(w) => {
                    assert_eq!(w.p.diff(&w.q), crate::Shift::new(vec![1, -1]));
                    assert_eq!(pathspace::pretty(&k2(), &w.x), "(e_b e_r)^∞");
                }
                Witness::Limit(_) => panic!("expected a path witness"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let g = k2();
        let PqOutcome::Witness(mut w) = lambda_pq_search(&g, &d(&[1, 0]), &d(&[0, 1]), &Bounds::default()).unwrap()
        else {
            panic!("expected witness");
        };
        w.q = d(&[0, 2]);
        assert!(replay_witness(&g, &w).is_err());
    }

    #[test]
    fn reports() {
        let bounds = Bounds::default();
        let r = cartan_report(&g3().to_kgraph(), &bounds).unwrap();
        assert_eq!(r.flags.topologically_free, Some(true));
        assert!(r.interpretation.iter().any(|l| l.contains("diagonal")));
        let r = cartan_report(&k2(), &bounds).unwrap();
        assert!(matches!(r.decision.verdict, Verdict::NotClosed(_)));
        assert_eq!(r.interpretation[0], "Cartan subalgebra: NO");
        let r = cartan_report(&k1(), &bounds).unwrap();
        assert!(matches!(r.decision.verdict, Verdict::Closed));
        assert!(!r.cycline_pairs.is_empty());
    }
}
