//! Command dispatch.

use std::time::Instant;

use cartan_core::decision::{self, Bounds, Decision, Verdict, Witness, WitnessReport};
use cartan_core::isotropy::FreenessVerdict;
use cartan_core::pathspace::{self, pretty};
use cartan_core::seqgraph::{SeqWitness, ValidatedSeqSpace};
use cartan_core::{Degree, DirectedGraph, KGraph};
use thiserror::Error;

use crate::input::{parse_input, InputDocument, InputError, Parsed};
use crate::report::{
    read_witness_file, BoundsOut, Details, FlagsOut, MuOut, Report, SequencesOut, Timings,
    WitnessOut,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Analyze,
    Cycline {
        max_degree: u32,
    },
    Decide,
    /// Replays the witnesses of an emitted report (text or JSON).
    Replay {
        report: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Analyze => "analyze",
            Command::Cycline { .. } => "cycline",
            Command::Decide => "decide",
            Command::Replay { .. } => "witness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Options {
    pub bounds: Bounds,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Usage(String),
    #[error("witness replay failed: {0}")]
    Replay(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Usage(_) => 2,
            CliError::Replay(_) => 3,
        }
    }
}

impl From<cartan_core::Error> for CliError {
    fn from(e: cartan_core::Error) -> Self {
        CliError::Input(InputError::Validation(e))
    }
}

/// 0 for any completed command; 3 for Unknown under `strict`.
pub fn exit_code(r: &Report, strict: bool) -> i32 {
    if strict && r.verdict == "unknown" {
        3
    } else {
        0
    }
}

fn bounds_out(b: &Bounds) -> BoundsOut {
    BoundsOut {
        pq_max: b.pq_max,
        prefix_bound: b.prefix_bound,
        cycle_bound: b.cycle_bound,
        depth: b.depth,
    }
}

fn kgraph_flags(g: &KGraph) -> Result<FlagsOut, CliError> {
    let topologically_free = if g.k() == 1 {
        Some(DirectedGraph::from_kgraph(g.clone())?.is_topologically_free()?)
    } else {
        None
    };
    Ok(FlagsOut {
        no_sources: g.no_sources(),
        row_finite: true,
        topologically_free,
    })
}

fn seq_flags(s: &ValidatedSeqSpace) -> FlagsOut {
    FlagsOut {
        no_sources: s.flags.no_sources,
        row_finite: s.flags.row_finite,
        topologically_free: None,
    }
}

fn freeness_text(g: &KGraph, f: &FreenessVerdict) -> String {
    match f {
        FreenessVerdict::LikelyFree => "likely free".into(),
        FreenessVerdict::NotFree { cylinder, path } => format!(
            "not free: the cylinder of {} contains only the periodic path {}",
            g.format_morphism(cylinder),
            pretty(g, path)
        ),
        FreenessVerdict::Unknown => "unknown".into(),
    }
}

pub fn witness_out(g: Option<&KGraph>, w: &Witness) -> WitnessOut {
    match w {
        Witness::Path(w) => {
            let g = g.expect("path witnesses come from k-graphs");
            WitnessOut::Path {
                path: pretty(g, &w.x),
                n: w.p.diff(&w.q).coords().to_vec(),
                p: w.p.coords().to_vec(),
                q: w.q.coords().to_vec(),
                x: pathspace::serialize(g, &w.x),
                verified_window: w.verified_window.coords().to_vec(),
                mu_witnesses: w
                    .mu_witnesses
                    .iter()
                    .map(|(p, q, mu)| MuOut {
                        p: p.coords().to_vec(),
                        q: q.coords().to_vec(),
                        mu: g.format_morphism(mu),
                    })
                    .collect(),
                orbit_size: w.orbit_size,
            }
        }
        Witness::Limit(w) => WitnessOut::Limit {
            n: w.n,
            limit_point: w.limit_point.clone(),
        },
    }
}

struct Body {
    verdict: String,
    provenance: String,
    coverage: String,
    witnesses: Vec<WitnessOut>,
    flags: FlagsOut,
    details: Details,
    interpretation: Vec<String>,
}

impl Body {
    fn from_decision(
        g: Option<&KGraph>,
        d: &Decision,
        flags: FlagsOut,
        diagonal: bool,
        bounds: &Bounds,
    ) -> Body {
        let witnesses = match &d.verdict {
            Verdict::NotClosed(w) => vec![witness_out(g, w)],
            _ => Vec::new(),
        };
        Body {
            verdict: d.verdict.label().into(),
            provenance: d.provenance.clone(),
            coverage: d.coverage.clone(),
            witnesses,
            flags,
            details: Details::default(),
            interpretation: decision::interpretation(d, diagonal, bounds),
        }
    }
}

pub fn run_command(
    cmd: &Command,
    doc: &InputDocument,
    options: &Options,
) -> Result<Report, CliError> {
    let start = Instant::now();
    if let Command::Replay { report } = cmd {
        return replay_report(report, options);
    }
    let body = run_on(cmd, doc, &options.bounds)?;
    Ok(finish(cmd, doc, body, &options.bounds, start))
}

/// Replays the witnesses of an emitted report against its embedded input.
pub fn replay_report(report: &str, options: &Options) -> Result<Report, CliError> {
    let start = Instant::now();
    let (doc, body) = replay(report)?;
    let cmd = Command::Replay {
        report: String::new(),
    };
    Ok(finish(&cmd, &doc, body, &options.bounds, start))
}

fn finish(
    cmd: &Command,
    doc: &InputDocument,
    body: Body,
    bounds: &Bounds,
    start: Instant,
) -> Report {
    Report {
        kind: doc.kind().into(),
        command: cmd.name().into(),
        verdict: body.verdict,
        provenance: body.provenance,
        coverage: body.coverage,
        witnesses: body.witnesses,
        bounds: bounds_out(bounds),
        flags: body.flags,
        details: body.details,
        interpretation: body.interpretation,
        input_hash: doc.hash.clone(),
        input: doc.serialize(),
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1000.0,
        },
    }
}

fn run_on(cmd: &Command, doc: &InputDocument, bounds: &Bounds) -> Result<Body, CliError> {
    match (&doc.parsed, cmd) {
        (Parsed::SeqGraph(s), _) => run_seq(cmd, s, bounds),
        (parsed, Command::Validate) => {
            let g = doc.kgraph().unwrap();
            let mut interpretation = vec![
                format!("vertices: {}", g.vertex_count()),
                format!("edges: {}", g.edge_count()),
                format!("squares: {}", g.squares().squares.len()),
            ];
            if let Parsed::Graph(dg) = parsed {
                let v = dg.validate();
                for (name, n) in &v.receive_counts {
                    interpretation.push(format!("vertex {name} receives {n} edges"));
                }
            }
            Ok(Body {
                verdict: "valid".into(),
                provenance: "factorization property verified on all squares".into(),
                coverage: String::new(),
                witnesses: Vec::new(),
                flags: kgraph_flags(g)?,
                details: Details::default(),
                interpretation,
            })
        }
        (_, Command::Cycline { max_degree }) => {
            let g = doc.kgraph().unwrap();
            let bound = Degree::splat(g.k(), *max_degree);
            let pairs = decision::find_cycline_pairs(g, &bound);
            let n = pairs.len();
            Ok(Body {
                verdict: "completed".into(),
                provenance: "exact cycline fixpoint on every common-source pair".into(),
                coverage: format!("degrees ≤ {bound}"),
                witnesses: Vec::new(),
                flags: kgraph_flags(g)?,
                details: Details {
                    cycline_bound: Some(bound.coords().to_vec()),
                    cycline_pairs: Some(
                        pairs
                            .iter()
                            .map(|(a, b)| [g.format_morphism(a), g.format_morphism(b)])
                            .collect(),
                    ),
                    ..Details::default()
                },
                interpretation: vec![format!("{n} ordered cycline pairs μ ≠ ν")],
            })
        }
        (Parsed::Graph(dg), Command::Decide) => {
            let d = decision::decide_iso_closed_graph(dg)?;
            let flags = kgraph_flags(dg.as_kgraph())?;
            let diagonal = flags.topologically_free == Some(true);
            Ok(Body::from_decision(
                Some(dg.as_kgraph()),
                &d,
                flags,
                diagonal,
                bounds,
            ))
        }
        (Parsed::KGraph(g), Command::Decide) => {
            if !g.no_sources() {
                return Err(CliError::Usage(
                    "decide needs a graph without sources".into(),
                ));
            }
            let d = decision::decide_iso_closed(g, bounds)?;
            let flags = kgraph_flags(g)?;
            let diagonal = flags.topologically_free == Some(true);
            Ok(Body::from_decision(Some(g), &d, flags, diagonal, bounds))
        }
        (_, Command::Analyze) => {
            let g = doc.kgraph().unwrap();
            if !g.no_sources() {
                return Err(CliError::Usage(
                    "analyze needs a graph without sources".into(),
                ));
            }
            let r = decision::cartan_report(g, bounds)?;
            let flags = FlagsOut {
                no_sources: r.flags.no_sources,
                row_finite: r.flags.row_finite,
                topologically_free: r.flags.topologically_free,
            };
            let mut body = Body::from_decision(Some(g), &r.decision, flags, false, bounds);
            body.interpretation = r.interpretation.clone();
            body.details = Details {
                freeness: Some(freeness_text(g, &r.freeness)),
                cycline_bound: Some(r.cycline_bound.coords().to_vec()),
                cycline_pairs: Some(
                    r.cycline_pairs
                        .iter()
                        .map(|(a, b)| [g.format_morphism(a), g.format_morphism(b)])
                        .collect(),
                ),
                ..Details::default()
            };
            Ok(body)
        }
        (_, Command::Replay { .. }) => unreachable!("replay is dispatched before"),
    }
}

fn run_seq(cmd: &Command, s: &ValidatedSeqSpace, bounds: &Bounds) -> Result<Body, CliError> {
    match cmd {
        Command::Validate => Ok(Body {
            verdict: "valid".into(),
            provenance: "limit rules acyclic, maps continuous, s a local homeomorphism".into(),
            coverage: String::new(),
            witnesses: Vec::new(),
            flags: seq_flags(s),
            details: Details::default(),
            interpretation: vec![
                format!("families: {}", s.space().families.len()),
                format!("limit rules: {}", s.space().rules.len()),
                format!(
                    "singular vertices: {}",
                    if s.flags.esg_empty { "none" } else { "present" }
                ),
            ],
        }),
        Command::Cycline { .. } => Err(CliError::Usage(
            "cycline needs a graph or kgraph document".into(),
        )),
        Command::Decide | Command::Analyze => {
            let d = s.decide_iso_closed(bounds.depth.max(1))?;
            let mut body = Body::from_decision(None, &d, seq_flags(s), false, bounds);
            if *cmd == Command::Analyze {
                if let Verdict::NotClosed(w) = &d.verdict {
                    if let Witness::Limit(w) = w.as_ref() {
                        body.details.sequences = sequences(s, w, bounds.depth.max(4) as usize);
                    }
                }
            }
            Ok(body)
        }
        Command::Replay { .. } => unreachable!("replay is dispatched before"),
    }
}

/// Loop families that accumulate at the limit point, paired with ordered 2-index row families.
fn sequences(s: &ValidatedSeqSpace, w: &SeqWitness, depth: usize) -> Option<SequencesOut> {
    let sp = s.space();
    let z = sp.parse_point(&w.limit_point).ok()?;
    let loops = sp
        .rules
        .iter()
        .filter(|r| r.target.family == z.family && sp.families[r.source.family].arity == 1)
        .map(|r| &sp.families[r.source.family].name);
    let rows: Vec<&String> = sp
        .families
        .iter()
        .filter(|f| f.arity == 2 && f.ordered)
        .map(|f| &f.name)
        .collect();
    let mut found = Vec::new();
    for lf in loops {
        for rf in &rows {
            if let Ok(r) = s.replay_sequences(lf, rf, &w.limit_point, depth) {
                found.push((lf, *rf, r));
            }
        }
    }
    // Prefer loops that are themselves interior points.
    found.sort_by_key(|(_, _, r)| !r.interior_approximants);
    found.into_iter().next().map(|(lf, rf, r)| SequencesOut {
        loop_family: lf.clone(),
        row_family: rf.clone(),
        interior_approximants: r.interior_approximants,
        non_isotropy_approximants: r.non_isotropy_approximants,
        converge: r.converge,
        limit_not_interior: r.limit_not_interior,
        limit_in_closure: r.limit_in_closure,
    })
}

fn path_witness(g: &KGraph, w: &WitnessOut) -> Result<WitnessReport, String> {
    let WitnessOut::Path {
        path,
        n,
        p,
        q,
        x,
        verified_window,
        mu_witnesses,
        orbit_size,
    } = w
    else {
        unreachable!()
    };
    let k = g.k();
    let deg = |c: &[u32]| {
        if c.len() == k {
            Ok(Degree::new(c.to_vec()))
        } else {
            Err(format!("degree {c:?} has the wrong rank"))
        }
    };
    let (p, q) = (deg(p)?, deg(q)?);
    if p.diff(&q).coords() != n.as_slice() {
        return Err("n differs from p - q".into());
    }
    let x = pathspace::parse_serialized(g, x).map_err(|e| e.to_string())?;
    if pretty(g, &x) != *path {
        return Err(format!("path {path} does not match {}", pretty(g, &x)));
    }
    let mut mus = Vec::new();
    for m in mu_witnesses {
        mus.push((
            deg(&m.p)?,
            deg(&m.q)?,
            g.path_by_names(&m.mu).map_err(|e| e.to_string())?,
        ));
    }
    Ok(WitnessReport {
        p,
        q,
        x,
        verified_window: deg(verified_window)?,
        mu_witnesses: mus,
        orbit_size: *orbit_size,
    })
}

fn replay(report: &str) -> Result<(InputDocument, Body), CliError> {
    let file = read_witness_file(report).map_err(CliError::Replay)?;
    let doc =
        parse_input(&file.input).map_err(|e| CliError::Replay(format!("embedded input: {e}")))?;
    if let Some(h) = &file.input_hash {
        if *h != doc.hash {
            return Err(CliError::Replay(
                "embedded input does not match its hash".into(),
            ));
        }
    }
    if file.witnesses.is_empty() {
        return Err(CliError::Replay("report contains no witnesses".into()));
    }
    let mut lines = Vec::new();
    for (i, w) in file.witnesses.iter().enumerate() {
        let outcome = match (w, &doc.parsed) {
            (WitnessOut::Limit { n, limit_point }, Parsed::SeqGraph(s)) => {
                s.replay_witness(&SeqWitness {
                    n: *n,
                    limit_point: limit_point.clone(),
                })
            }
            (WitnessOut::Path { .. }, _) if doc.kgraph().is_some() => {
                let g = doc.kgraph().unwrap();
                path_witness(g, w).and_then(|r| decision::replay_witness(g, &r))
            }
            _ => Err("witness type does not fit the input kind".into()),
        };
        match outcome {
            Ok(()) => lines.push(format!("witness {} ok", i + 1)),
            Err(e) => return Err(CliError::Replay(format!("witness {}: {e}", i + 1))),
        }
    }
    let flags = match &doc.parsed {
        Parsed::SeqGraph(s) => seq_flags(s),
        _ => kgraph_flags(doc.kgraph().unwrap())?,
    };
    let body = Body {
        verdict: "replayed".into(),
        provenance: "every recorded witness claim re-checked".into(),
        coverage: format!("{} witnesses", file.witnesses.len()),
        witnesses: file.witnesses.clone(),
        flags,
        details: Details {
            replay: Some(lines),
            ..Details::default()
        },
        interpretation: vec!["witness replay: OK".into()],
    };
    Ok((doc, body))
}
