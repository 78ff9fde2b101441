use std::collections::BTreeSet;

use cartan_core::fixtures::{g1, g2, g3, tg1};
use cartan_core::random::directed_graph_no_sources;
use cartan_core::seqgraph::{from_directed_graph, parse, validate_seqspace, Bound, Item, SetExpr, ValidatedSeqSpace};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn tg1v() -> ValidatedSeqSpace {
    validate_seqspace(tg1()).unwrap()
}

fn bound() -> impl Strategy<Value = Bound> {
    prop_oneof![(1u32..5).prop_map(Bound::Eq), (1u32..5).prop_map(Bound::Ge)]
}

fn item() -> impl Strategy<Value = Item> {
    prop_oneof![
        bound().prop_map(|b| Item { family: 0, bounds: vec![b] }),
        bound().prop_map(|b| Item { family: 1, bounds: vec![b] }),
        (bound(), bound()).prop_map(|(a, b)| Item { family: 2, bounds: vec![a, b] }),
        Just(Item { family: 3, bounds: vec![] }),
    ]
}

fn set_expr() -> impl Strategy<Value = SetExpr> {
    proptest::collection::vec(item(), 0..4).prop_map(SetExpr::normalized)
}

fn subset(v: &ValidatedSeqSpace, a: &SetExpr, b: &SetExpr) -> bool {
    v.difference_point(a, b).is_none()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_a_closure_operator(a in set_expr(), b in set_expr()) {
        let v = tg1v();
        let ca = v.closure_of(&a).unwrap();
        prop_assert!(subset(&v, &a, &ca));
        prop_assert!(v.set_eq(&v.closure_of(&ca).unwrap(), &ca));
        let ab = a.union(&b);
        prop_assert!(subset(&v, &ca, &v.closure_of(&ab).unwrap()));
    }

    #[test]
    fn discrete_embeddings_match_graph_vn(seed in any::<u64>()) {
        let g = directed_graph_no_sources(&mut StdRng::seed_from_u64(seed), 6, 12);
        check_discrete(&g);
    }
}

fn check_discrete(g: &cartan_core::graph::DirectedGraph) {
    let v = validate_seqspace(from_directed_graph(g)).unwrap();
    assert!(v.flags.esg_empty);
    for n in 1..=4u32 {
        let set = v.symbolic_vn(n).unwrap();
        let names: BTreeSet<String> = set.items.iter().map(|it| v.space().families[it.family].name.clone()).collect();
        let want: BTreeSet<String> =
            g.compute_vn(n as usize).into_iter().map(|x| format!("v_{}", g.vertex_name(x))).collect();
        assert_eq!(names, want);
    }
    assert!(matches!(
        v.decide_iso_closed(4).unwrap().verdict,
        cartan_core::decision::Verdict::Closed
    ));
}

#[test]
fn discrete_fixtures_match_graph_vn() {
    for g in [g1(), g2(), g3()] {
        check_discrete(&g);
    }
}

#[test]
fn presentations_round_trip() {
    let s = tg1();
    assert!(s.same_presentation(&parse(&s.to_text()).unwrap()));
    let d = from_directed_graph(&g3());
    assert!(d.same_presentation(&parse(&d.to_text()).unwrap()));
}
