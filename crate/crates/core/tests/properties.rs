use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tscd::graph::{
    apply_meek_rules, apply_meek_rules_in_order, consistent_extension, cpdag_of, enumerate_mec,
};
use tscd::harness::random_chordal_dag;
use tscd::{shd, GraphKind, MixedGraph};

fn dag_from_seed(n: usize, p: f64, seed: u64) -> MixedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut g = MixedGraph::with_nodes(n, GraphKind::Dag);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_directed(order[i], order[j]).unwrap();
            }
        }
    }
    g
}

/// CPDAG of `dag` with some of its undirected edges oriented as in `dag`.
fn partial(dag: &MixedGraph, seed: u64) -> MixedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = cpdag_of(dag).unwrap().with_kind(GraphKind::Pdag);
    let und: Vec<_> = g.undirected_edges().collect();
    for (a, b) in und {
        if rng.random_bool(0.3) {
            if dag.has_arrow(a, b) {
                g.orient(a, b);
            } else {
                g.orient(b, a);
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn meek_is_idempotent(n in 2usize..8, p in 0.1f64..0.9, seed in any::<u64>()) {
        let dag = dag_from_seed(n, p, seed);
        let once = apply_meek_rules(&partial(&dag, seed ^ 1)).unwrap();
        let twice = apply_meek_rules(&once).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn meek_ignores_edge_order(n in 2usize..8, p in 0.1f64..0.9, seed in any::<u64>()) {
        let dag = dag_from_seed(n, p, seed);
        let g = partial(&dag, seed ^ 2);
        let reference = apply_meek_rules(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let shuffled = apply_meek_rules_in_order(&g, &mut |c| c.shuffle(&mut rng)).unwrap();
        let reversed = apply_meek_rules_in_order(&g, &mut |c| c.reverse()).unwrap();
        prop_assert_eq!(&reference, &shuffled);
        prop_assert_eq!(&reference, &reversed);
    }

    #[test]
    fn meek_keeps_the_generating_dag(n in 2usize..8, p in 0.1f64..0.9, seed in any::<u64>()) {
        let dag = dag_from_seed(n, p, seed);
        let closed = apply_meek_rules(&partial(&dag, seed ^ 4)).unwrap();
        for (a, b) in closed.directed_edges() {
            prop_assert!(dag.has_arrow(a, b));
        }
        prop_assert!(consistent_extension(&closed).is_some());
    }

    #[test]
    fn class_members_share_the_cpdag(n in 2usize..7, rho in 0.1f64..=1.0, seed in any::<u64>()) {
        let dag = random_chordal_dag(n, rho, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let cpdag = cpdag_of(&dag).unwrap();
        let members = enumerate_mec(&cpdag).unwrap();
        prop_assert!(members.contains(&dag));
        for m in &members {
            prop_assert_eq!(&cpdag_of(m).unwrap(), &cpdag);
        }
        // Arrows of the CPDAG are exactly those shared by every member.
        for a in 0..n {
            for b in 0..n {
                if a != b && dag.has_arrow(a, b) {
                    let shared = members.iter().all(|m| m.has_arrow(a, b));
                    prop_assert_eq!(shared, cpdag.has_arrow(a, b));
                }
            }
        }
    }

    #[test]
    fn shd_is_a_metric(n in 2usize..7, seeds in any::<(u64, u64, u64)>()) {
        let g1 = dag_from_seed(n, 0.5, seeds.0);
        let g2 = cpdag_of(&dag_from_seed(n, 0.5, seeds.1)).unwrap();
        let g3 = dag_from_seed(n, 0.3, seeds.2);
        prop_assert_eq!(shd(&g1, &g1).unwrap(), 0);
        prop_assert_eq!(shd(&g1, &g2).unwrap(), shd(&g2, &g1).unwrap());
        prop_assert!(shd(&g1, &g3).unwrap() <= shd(&g1, &g2).unwrap() + shd(&g2, &g3).unwrap());
        if shd(&g1, &g3).unwrap() == 0 {
            prop_assert_eq!(&g1, &g3);
        }
    }
}
