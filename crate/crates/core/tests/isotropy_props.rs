mod common;

use cartan_core::fixtures::{g1, g2, g3, k1, k2};
use cartan_core::graph::DirectedGraph;
use cartan_core::isotropy::{
    closure_probe, in_iso_interior, is_cycline, isotropy_at, state_bound, unit, CyclineVerdict, InteriorVerdict,
};
use cartan_core::kgraph::{KGraph, Morphism};
use cartan_core::pathspace::{enumerate_epps, epp_equal, prepend};
use cartan_core::random::{directed_graph_no_sources, two_graph};
use cartan_core::{Degree, Shift};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn check_cycline_oracle(g: &KGraph, top: u32) {
    let k = g.k();
    let xs = common::epps_by_vertex(g, 2, 2);
    let window = 2 * top + 4;
    let all = common::morphisms_upto(g, &Degree::splat(k, top));
    let heads: Vec<Vec<Morphism>> = all.iter().map(|m| common::cycline_heads(g, &xs, m, window)).collect();
    for (i, mu) in all.iter().enumerate() {
        for (j, nu) in all.iter().enumerate() {
            if nu.src != mu.src {
                continue;
            }
            let verdict = is_cycline(g, mu, nu).unwrap();
            let oracle_cycline = heads[i] == heads[j];
            match &verdict {
                CyclineVerdict::Cycline { .. } => assert!(
                    oracle_cycline,
                    "{} / {} reported cycline",
                    g.format_morphism(mu),
                    g.format_morphism(nu)
                ),
                CyclineVerdict::NotCycline { witness, .. } => {
                    let a = prepend(g, mu, witness).unwrap();
                    let b = prepend(g, nu, witness).unwrap();
                    assert!(!epp_equal(g, &a, &b));
                    assert!(!oracle_cycline, "oracle missed {} / {}", g.format_morphism(mu), g.format_morphism(nu));
                }
            }
            let d = &mu.degree.meet(&nu.degree);
            let (ra, rb) = (mu.degree.checked_sub(d).unwrap(), nu.degree.checked_sub(d).unwrap());
            assert!(verdict.states() <= state_bound(g, &ra, &rb).max(1));
        }
    }
}

#[test]
fn cycline_oracle_on_fixtures() {
    check_cycline_oracle(&k1(), 2);
    check_cycline_oracle(&k2(), 1);
    for g in [g1(), g2(), g3()] {
        check_cycline_oracle(g.as_kgraph(), 3);
    }
}

fn check_interior_iff_entrance_free(dg: &DirectedGraph) {
    let g = dg.as_kgraph();
    let b = Degree::new(vec![3]);
    for v in 0..g.vertex_count() {
        for x in enumerate_epps(g, v, &b, &b).unwrap() {
            for n in [-3i64, -2, -1, 1, 2, 3] {
                let Some(gel) = isotropy_at(g, &x, &Shift::new(vec![n])) else { continue };
                let start = gel.p[0].min(gel.q[0]);
                let expected = common::segment_in_bn(dg, &x, start, n.unsigned_abs() as u32);
                let verdict = in_iso_interior(g, &gel, 4096).unwrap();
                assert_eq!(matches!(verdict, InteriorVerdict::Interior { .. }), expected);
                assert_ne!(verdict, InteriorVerdict::Unknown);
            }
        }
    }
}

#[test]
fn interior_matches_entrance_free_segments_on_fixtures() {
    for g in [g1(), g2(), g3()] {
        check_interior_iff_entrance_free(&g);
    }
}

#[test]
fn interior_elements_pass_the_closure_probe() {
    for g in [g1().to_kgraph(), g2().to_kgraph(), g3().to_kgraph(), k1()] {
        let b = Degree::splat(g.k(), 2);
        let mut interior = Vec::new();
        for v in 0..g.vertex_count() {
            for x in enumerate_epps(&g, v, &b, &b).unwrap() {
                interior.push(unit(&g, &x));
                for i in 0..g.k() {
                    for s in [-1i64, 1] {
                        let mut n = vec![0; g.k()];
                        n[i] = s;
                        if let Some(gel) = isotropy_at(&g, &x, &Shift::new(n)) {
                            if matches!(in_iso_interior(&g, &gel, 4096).unwrap(), InteriorVerdict::Interior { .. }) {
                                interior.push(gel);
                            }
                        }
                    }
                }
            }
        }
        for gel in &interior {
            assert!(closure_probe(&g, &interior, gel, 3));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cycline_oracle_on_random_two_graphs(seed in any::<u64>()) {
        check_cycline_oracle(&two_graph(&mut StdRng::seed_from_u64(seed), 3, 3), 2);
    }

    #[test]
    fn interior_matches_entrance_free_segments(seed in any::<u64>()) {
        check_interior_iff_entrance_free(&directed_graph_no_sources(&mut StdRng::seed_from_u64(seed), 4, 6));
    }
}
