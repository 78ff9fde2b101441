//! Reports and their text and JSON forms.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsOut {
    pub pq_max: u32,
    pub prefix_bound: u32,
    pub cycle_bound: u32,
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagsOut {
    pub no_sources: bool,
    pub row_finite: bool,
    pub topologically_free: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuOut {
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub mu: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessOut {
    /// An eventually periodic path `x` with `σ^p x = σ^q x`.
    Path {
        path: String,
        n: Vec<i64>,
        p: Vec<u32>,
        q: Vec<u32>,
        x: String,
        verified_window: Vec<u32>,
        mu_witnesses: Vec<MuOut>,
        orbit_size: usize,
    },
    /// A point in the closure of `V_n` outside `V_n`.
    Limit { n: u32, limit_point: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencesOut {
    pub loop_family: String,
    pub row_family: String,
    pub interior_approximants: bool,
    pub non_isotropy_approximants: bool,
    pub converge: bool,
    pub limit_not_interior: bool,
    pub limit_in_closure: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Details {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub freeness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cycline_bound: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cycline_pairs: Option<Vec<[String; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sequences: Option<SequencesOut>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replay: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub command: String,
    pub verdict: String,
    pub provenance: String,
    pub coverage: String,
    pub witnesses: Vec<WitnessOut>,
    pub bounds: BoundsOut,
    pub flags: FlagsOut,
    pub details: Details,
    pub interpretation: Vec<String>,
    pub input_hash: String,
    pub input: String,
    pub timings: Timings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => emit_text(r),
    }
}

/// Degrees are written `(a,b)`, or as a bare integer when `k = 1`.
pub fn fmt_coords<T: std::fmt::Display>(c: &[T]) -> String {
    if c.len() == 1 {
        return c[0].to_string();
    }
    let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

pub fn parse_coords(s: &str) -> Option<Vec<u32>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(s);
    inner.split(',').map(|c| c.trim().parse().ok()).collect()
}

fn emit_text(r: &Report) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    line(format!("kind: {}", r.kind));
    line(format!("command: {}", r.command));
    line(format!("verdict: {}", r.verdict));
    line(format!("provenance: {}", r.provenance));
    if !r.coverage.is_empty() {
        line(format!("coverage: {}", r.coverage));
    }
    let tf = match r.flags.topologically_free {
        Some(b) => b.to_string(),
        None => "n/a".into(),
    };
    line(format!(
        "flags: no_sources={} row_finite={} topologically_free={tf}",
        r.flags.no_sources, r.flags.row_finite
    ));
    let b = &r.bounds;
    line(format!(
        "bounds: pq_max={} prefix_bound={} cycle_bound={} depth={}",
        b.pq_max, b.prefix_bound, b.cycle_bound, b.depth
    ));
    if let Some(f) = &r.details.freeness {
        line(format!("essential freeness: {f}"));
    }
    if let Some(pairs) = &r.details.cycline_pairs {
        let bound = r
            .details
            .cycline_bound
            .as_deref()
            .map(fmt_coords)
            .unwrap_or_default();
        line(format!(
            "cycline pairs (degree <= {bound}): {}",
            pairs.len()
        ));
        for [a, b] in pairs {
            line(format!("  ({a}, {b})"));
        }
    }
    if let Some(s) = &r.details.sequences {
        line(format!(
            "sequences ({} loops, {} rows):",
            s.loop_family, s.row_family
        ));
        line(format!(
            "  interior approximants: {}",
            s.interior_approximants
        ));
        line(format!(
            "  non-isotropy approximants: {}",
            s.non_isotropy_approximants
        ));
        line(format!("  converge to the limit loop: {}", s.converge));
        line(format!("  limit not interior: {}", s.limit_not_interior));
        line(format!("  limit in closure: {}", s.limit_in_closure));
    }
    if let Some(replay) = &r.details.replay {
        for l in replay {
            line(format!("replay: {l}"));
        }
    }
    for l in &r.interpretation {
        line(l.clone());
    }
    for w in &r.witnesses {
        line("begin witness".into());
        match w {
            WitnessOut::Path {
                path,
                n,
                p,
                q,
                x,
                verified_window,
                mu_witnesses,
                orbit_size,
            } => {
                line("type path".into());
                line(format!("path {path}"));
                line(format!("n {}", fmt_coords(n)));
                line(format!("p {}", fmt_coords(p)));
                line(format!("q {}", fmt_coords(q)));
                line(format!("x {x}"));
                line(format!("verified_window {}", fmt_coords(verified_window)));
                line(format!("orbit_size {orbit_size}"));
                for m in mu_witnesses {
                    line(format!(
                        "mu {} {} {}",
                        fmt_coords(&m.p),
                        fmt_coords(&m.q),
                        m.mu
                    ));
                }
            }
            WitnessOut::Limit { n, limit_point } => {
                line("type limit".into());
                line(format!("n {n}"));
                line(format!("limit_point {limit_point}"));
            }
        }
        line("end witness".into());
    }
    if !r.witnesses.is_empty() {
        line(format!("begin input sha256={}", r.input_hash));
        line(r.input.trim_end().to_string());
        line("end input".into());
    }
    out
}

/// Witnesses, input text and input hash recovered from an emitted report.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFile {
    pub input: String,
    pub input_hash: Option<String>,
    pub witnesses: Vec<WitnessOut>,
}

pub fn read_witness_file(text: &str) -> Result<WitnessFile, String> {
    if text.trim_start().starts_with('{') {
        let r: Report = serde_json::from_str(text).map_err(|e| format!("bad JSON report: {e}"))?;
        return Ok(WitnessFile {
            input: r.input,
            input_hash: Some(r.input_hash),
            witnesses: r.witnesses,
        });
    }
    let mut witnesses = Vec::new();
    let mut input: Option<String> = None;
    let mut input_hash = None;
    let mut lines = text.lines();
    while let Some(l) = lines.next() {
        if l == "begin witness" {
            let body: Vec<&str> = lines.by_ref().take_while(|l| *l != "end witness").collect();
            witnesses.push(parse_witness_block(&body)?);
        } else if let Some(rest) = l.strip_prefix("begin input") {
            input_hash = rest.trim().strip_prefix("sha256=").map(str::to_string);
            let body: Vec<&str> = lines.by_ref().take_while(|l| *l != "end input").collect();
            let mut s = body.join("\n");
            s.push('\n');
            input = Some(s);
        }
    }
    let input = input.ok_or("report has no input block")?;
    Ok(WitnessFile {
        input,
        input_hash,
        witnesses,
    })
}

fn parse_witness_block(body: &[&str]) -> Result<WitnessOut, String> {
    let mut fields: Vec<(&str, &str)> = Vec::new();
    for l in body {
        let (k, v) = l
            .split_once(' ')
            .ok_or_else(|| format!("bad witness line `{l}`"))?;
        fields.push((k, v));
    }
    let get = |k: &str| {
        fields
            .iter()
            .find(|(key, _)| *key == k)
            .map(|(_, v)| *v)
            .ok_or_else(|| format!("witness block lacks `{k}`"))
    };
    let coords = |k: &str| parse_coords(get(k)?).ok_or_else(|| format!("bad degree in `{k}`"));
    match get("type")? {
        "path" => {
            let n = get("n")?;
            let n_inner = n.trim().trim_start_matches('(').trim_end_matches(')');
            let n: Vec<i64> = n_inner
                .split(',')
                .map(|c| c.trim().parse().map_err(|_| format!("bad shift {n}")))
                .collect::<Result<_, _>>()?;
            let mut mu_witnesses = Vec::new();
            for (k, v) in &fields {
                if *k != "mu" {
                    continue;
                }
                let mut parts = v.splitn(3, ' ');
                let (Some(p), Some(q), Some(mu)) = (parts.next(), parts.next(), parts.next())
                else {
                    return Err(format!("bad mu line `{v}`"));
                };
                mu_witnesses.push(MuOut {
                    p: parse_coords(p).ok_or("bad mu degree")?,
                    q: parse_coords(q).ok_or("bad mu degree")?,
                    mu: mu.to_string(),
                });
            }
            Ok(WitnessOut::Path {
                path: get("path")?.to_string(),
                n,
                p: coords("p")?,
                q: coords("q")?,
                x: get("x")?.to_string(),
                verified_window: coords("verified_window")?,
                mu_witnesses,
                orbit_size: get("orbit_size")?.parse().map_err(|_| "bad orbit_size")?,
            })
        }
        "limit" => Ok(WitnessOut::Limit {
            n: get("n")?.parse().map_err(|_| "bad n")?,
            limit_point: get("limit_point")?.to_string(),
        }),
        t => Err(format!("unknown witness type {t}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            kind: "kgraph".into(),
            command: "decide".into(),
            verdict: "not_closed".into(),
            provenance: "p".into(),
            coverage: "c".into(),
            witnesses: vec![
                WitnessOut::Path {
                    path: "(a b)^∞".into(),
                    n: vec![1, -1],
                    p: vec![1, 0],
                    q: vec![0, 1],
                    x: "prefix=@v cycle=a b".into(),
                    verified_window: vec![1, 1],
                    mu_witnesses: vec![MuOut {
                        p: vec![1, 0],
                        q: vec![0, 1],
                        mu: "a b".into(),
                    }],
                    orbit_size: 2,
                },
                WitnessOut::Limit {
                    n: 1,
                    limit_point: "Z".into(),
                },
            ],
            bounds: BoundsOut {
                pq_max: 3,
                prefix_bound: 3,
                cycle_bound: 3,
                depth: 3,
            },
            flags: FlagsOut {
                no_sources: true,
                row_finite: true,
                topologically_free: None,
            },
            details: Details::default(),
            interpretation: vec!["Cartan subalgebra: NO".into()],
            input_hash: "abc".into(),
            input: "kgraph 2\nvertex v\n".into(),
            timings: Timings { total_ms: 1.5 },
        }
    }

    #[test]
    fn text_and_json_witness_blocks_read_back() {
        let r = sample();
        let expected = WitnessFile {
            input: r.input.clone(),
            input_hash: Some("abc".into()),
            witnesses: r.witnesses.clone(),
        };
        assert_eq!(
            read_witness_file(&emit_report(&r, Format::Text)).unwrap(),
            expected
        );
        assert_eq!(
            read_witness_file(&emit_report(&r, Format::Json)).unwrap(),
            expected
        );
    }

    #[test]
    fn json_keys_follow_schema_order() {
        let s = emit_report(&sample(), Format::Json);
        let keys = [
            "\"kind\"",
            "\"verdict\"",
            "\"provenance\"",
            "\"witnesses\"",
            "\"bounds\"",
            "\"flags\"",
            "\"timings\"",
        ];
        let pos: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coords_format_and_parse() {
        assert_eq!(fmt_coords(&[1, 0]), "(1,0)");
        assert_eq!(fmt_coords(&[4]), "4");
        assert_eq!(parse_coords("(1,0)"), Some(vec![1, 0]));
        assert_eq!(parse_coords("4"), Some(vec![4]));
        assert_eq!(parse_coords("(x)"), None);
    }
}
