use std::process::{Command, Output};

use cartan_cli::{fixture, parse_input, run_command, Command as Cmd, Options, EXAMPLES};
use cartan_core::random::{directed_graph_no_sources, two_graph};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn cartan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timings(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn k2_decide_json() {
    let o = cartan(&["decide", "--example", "K2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "not_closed");
    assert_eq!(v["witnesses"][0]["path"], "(e_b e_r)^∞");
    assert_eq!(v["witnesses"][0]["n"], serde_json::json!([1, -1]));
    for key in ["kind", "verdict", "provenance", "witnesses", "bounds", "flags", "timings"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    for key in ["no_sources", "row_finite", "topologically_free"] {
        assert!(v["flags"].get(key).is_some(), "{key}");
    }
}

#[test]
fn g2_decide_text() {
    let o = cartan(&["decide", "--example", "G2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("verdict: closed"));
    assert!(s.contains("Cartan subalgebra: YES"));
}

#[test]
fn tg1_analyze_text() {
    let s = stdout(&cartan(&["analyze", "--example", "TG1"]));
    assert!(s.contains("verdict: not_closed"));
    assert!(s.contains("begin witness\ntype limit\nn 1\nlimit_point Z\nend witness"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "kgraph 2\nvertex v\nedge b color 1 from v to v\nedge r color 2 from v to v\nsquare r b = b r\n").unwrap();
    let o = cartan(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("orientation"));

    let unknown = cartan(&["decide", "--example", "K2", "--pq-max", "0"]);
    assert_eq!(unknown.status.code(), Some(0));
    assert!(stdout(&unknown).contains("advice:"));
    assert_eq!(cartan(&["decide", "--example", "K2", "--pq-max", "0", "--strict"]).status.code(), Some(3));
    assert_eq!(cartan(&["decide", "--example", "K2", "--strict"]).status.code(), Some(0));

    let report = dir.path().join("k2.txt");
    std::fs::write(&report, stdout(&cartan(&["decide", "--example", "K2"]))).unwrap();
    assert_eq!(cartan(&["witness", "--replay", report.to_str().unwrap()]).status.code(), Some(0));
    let tampered = std::fs::read_to_string(&report).unwrap().replace("mu (1,0) (0,1) alpha_b", "mu (1,0) (0,1) @v");
    std::fs::write(&report, tampered).unwrap();
    assert_eq!(cartan(&["witness", "--replay", report.to_str().unwrap()]).status.code(), Some(3));
    let closed = dir.path().join("g2.txt");
    std::fs::write(&closed, stdout(&cartan(&["decide", "--example", "G2"]))).unwrap();
    assert_eq!(cartan(&["witness", "--replay", closed.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn input_from_file_matches_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k1.txt");
    std::fs::write(&path, fixture("K1").unwrap()).unwrap();
    let a = without_timings(&stdout(&cartan(&["analyze", path.to_str().unwrap(), "--format", "json"])));
    let b = without_timings(&stdout(&cartan(&["analyze", "--example", "K1", "--format", "json"])));
    assert_eq!(a, b);
}

#[test]
fn json_is_deterministic_on_fixtures() {
    for name in EXAMPLES {
        for cmd in ["validate", "analyze", "decide"] {
            let a = stdout(&cartan(&[cmd, "--example", name, "--format", "json"]));
            let b = stdout(&cartan(&[cmd, "--example", name, "--format", "json"]));
            assert_eq!(without_timings(&a), without_timings(&b), "{cmd} {name}");
            let strip = |s: &str| s.lines().filter(|l| !l.contains("total_ms")).collect::<Vec<_>>().join("\n");
            assert_eq!(strip(&a), strip(&b), "{cmd} {name}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_graphs_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dg = directed_graph_no_sources(&mut rng, 6, 12);
        let kg = two_graph(&mut rng, 3, 3);
        for g in [dg.as_kgraph(), &kg] {
            let header = if g.k() == 1 { "graph".to_string() } else { format!("kgraph {}", g.k()) };
            let mut text = format!("{header}\n");
            let s = g.skeleton();
            for v in &s.vertices {
                text.push_str(&format!("vertex {v}\n"));
            }
            for e in &s.edges {
                text.push_str(&format!("edge {} color {} from {} to {}\n", e.name, e.color + 1, s.vertices[e.src], s.vertices[e.rng]));
            }
            for q in &g.squares().squares {
                let n = |e| g.edge_name(e);
                text.push_str(&format!("square {} {} = {} {}\n", n(q.e), n(q.f), n(q.f2), n(q.e2)));
            }
            let doc = parse_input(&text).unwrap();
            prop_assert_eq!(doc.kgraph().unwrap().content_hash(), g.content_hash());
            let again = parse_input(&doc.serialize()).unwrap();
            prop_assert_eq!(&again, &doc);
            prop_assert_eq!(&again.hash, &doc.hash);
            prop_assert_eq!(again.serialize(), doc.serialize());
        }
    }

    #[test]
    fn reports_are_deterministic_on_random_graphs(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let kg = two_graph(&mut rng, 2, 2);
        let text = {
            let s = kg.skeleton();
            let mut t = String::from("kgraph 2\n");
            for v in &s.vertices { t.push_str(&format!("vertex {v}\n")); }
            for e in &s.edges { t.push_str(&format!("edge {} color {} from {} to {}\n", e.name, e.color + 1, s.vertices[e.src], s.vertices[e.rng])); }
            for q in &kg.squares().squares {
                t.push_str(&format!("square {} {} = {} {}\n", kg.edge_name(q.e), kg.edge_name(q.f), kg.edge_name(q.f2), kg.edge_name(q.e2)));
            }
            t
        };
        let doc = parse_input(&text).unwrap();
        let opts = Options::default();
        let mut a = run_command(&Cmd::Decide, &doc, &opts).unwrap();
        let mut b = run_command(&Cmd::Decide, &doc, &opts).unwrap();
        a.timings.total_ms = 0.0;
        b.timings.total_ms = 0.0;
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
