use cartan_core::fixtures::{g3, k1, k2};
use cartan_core::kgraph::KGraph;
use cartan_core::pathspace::{
    enumerate_epps, epp_equal, epp_equal_scaled, parse_serialized, prepend, segment_inf, serialize, shift, EPPath,
};
use cartan_core::random::two_graph;
use cartan_core::Degree;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn sample(g: &KGraph, bound: u32) -> Vec<EPPath> {
    let b = Degree::splat(g.k(), bound);
    (0..g.vertex_count()).flat_map(|v| enumerate_epps(g, v, &b, &b).unwrap()).collect()
}

fn check_shift_laws(g: &KGraph, xs: &[EPPath], top: u32) {
    let degs = Degree::splat(g.k(), top).below();
    let zero = Degree::zero(g.k());
    for x in xs {
        for p in &degs {
            let sp = shift(g, x, p);
            let head = segment_inf(g, x, &zero, p);
            assert!(epp_equal(g, &prepend(g, &head, &sp).unwrap(), x));
            for q in &degs {
                assert!(epp_equal(g, &shift(g, &sp, q), &shift(g, x, &(p + q))));
            }
        }
    }
}

fn check_windows(g: &KGraph, xs: &[EPPath]) {
    for x in xs {
        for y in xs.iter().filter(|y| y.rng() == x.rng()) {
            let t = epp_equal(g, x, y);
            assert_eq!(t, epp_equal_scaled(g, x, y, 2));
            assert_eq!(t, epp_equal_scaled(g, x, y, 4));
        }
    }
}

#[test]
fn fixture_shift_laws() {
    for g in [k1(), k2(), g3().to_kgraph()] {
        let xs = sample(&g, 2);
        check_shift_laws(&g, &xs, 2);
        check_windows(&g, &xs);
    }
}

#[test]
fn serialization_round_trips() {
    for g in [k1(), k2(), g3().to_kgraph()] {
        for x in sample(&g, 2) {
            let back = parse_serialized(&g, &serialize(&g, &x)).unwrap();
            assert!(epp_equal(&g, &back, &x));
        }
    }
}

#[test]
fn enumeration_has_no_duplicates() {
    for g in [k1(), k2()] {
        let xs = sample(&g, 2);
        for (i, x) in xs.iter().enumerate() {
            for y in &xs[i + 1..] {
                assert!(!epp_equal(&g, x, y));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_two_graph_shift_laws(seed in any::<u64>()) {
        let g = two_graph(&mut StdRng::seed_from_u64(seed), 3, 3);
        let xs: Vec<EPPath> = sample(&g, 1);
        check_shift_laws(&g, &xs, 2);
        check_windows(&g, &xs);
    }
}
