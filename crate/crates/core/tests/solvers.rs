use hwy1::dp::{
    steiner_2approx, steiner_exact_td, steiner_exact_td_with, tsp_2approx, tsp_exact_td,
    tsp_exact_td_with, DpOptions,
};
use hwy1::oracles::{dreyfus_wagner_steiner, gen_hd1_instance, held_karp_tsp, GeneratorParams};
use hwy1::par::Execution;
use hwy1::spcover::verify_hd1;
use hwy1::structure::build_hierarchy;
use hwy1::treedecomp::{build_decomposition, make_nice, min_degree_decomposition};
use hwy1::Graph;
use num_bigint::BigUint;
use proptest::prelude::*;

fn nice_min_degree(g: &Graph) -> hwy1::treedecomp::NiceTreeDecomposition {
    make_nice(&min_degree_decomposition(g))
}

fn nice_hierarchy(g: &Graph) -> hwy1::treedecomp::NiceTreeDecomposition {
    let cert = verify_hd1(g).certificate().cloned().expect("certified");
    let h = build_hierarchy(g, &cert).unwrap();
    make_nice(&build_decomposition(g, &h).unwrap())
}

#[test]
fn triangle_tour() {
    let g = Graph::from_u64(3, &[(0, 1, 3), (1, 2, 3), (0, 2, 3)]).unwrap();
    let t = tsp_exact_td(&g, &nice_min_degree(&g)).unwrap();
    t.validate(&g).unwrap();
    assert_eq!(t.cost, BigUint::from(9u32));
}

#[test]
fn star_tour_doubles_every_spoke() {
    let g = Graph::from_u64(4, &[(0, 1, 3), (0, 2, 3), (0, 3, 3)]).unwrap();
    let t = tsp_exact_td(&g, &nice_hierarchy(&g)).unwrap();
    t.validate(&g).unwrap();
    assert_eq!(t.cost, BigUint::from(18u32));
}

#[test]
fn single_vertex_tour() {
    let g = Graph::from_u64(1, &[]).unwrap();
    let t = tsp_exact_td(&g, &nice_min_degree(&g)).unwrap();
    assert_eq!(t.walk, vec![0]);
    assert_eq!(t.cost, BigUint::from(0u32));
}

#[test]
fn path_steiner_and_single_terminal() {
    let g = Graph::from_u64(3, &[(0, 1, 2), (1, 2, 4)]).unwrap();
    let ntd = nice_min_degree(&g);
    let s = steiner_exact_td(&g, &[0, 2], &ntd).unwrap();
    assert_eq!(s.cost, BigUint::from(6u32));
    assert_eq!(s.edges, vec![(0, 1), (1, 2)]);
    let one = steiner_exact_td(&g, &[1], &ntd).unwrap();
    assert_eq!(one.cost, BigUint::from(0u32));
    assert!(one.edges.is_empty());
}

#[test]
fn budget_is_enforced() {
    let mut edges = Vec::new();
    for u in 0..6 {
        for v in u + 1..6 {
            edges.push((u, v, 1));
        }
    }
    let g = Graph::from_u64(6, &edges).unwrap();
    let opts = DpOptions {
        max_bag: 4,
        exec: Execution::Sequential,
    };
    let ntd = nice_min_degree(&g);
    assert!(matches!(
        tsp_exact_td_with(&g, &ntd, &opts),
        Err(hwy1::Error::BudgetExceeded { .. })
    ));
    assert!(steiner_exact_td_with(&g, &[0, 5], &ntd, &opts).is_err());
}

#[test]
fn disconnected_inputs() {
    let g = Graph::from_u64(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
    let ntd = nice_min_degree(&g);
    assert!(tsp_exact_td(&g, &ntd).is_err());
    assert!(matches!(
        steiner_exact_td(&g, &[0, 3], &ntd),
        Err(hwy1::Error::Infeasible(_))
    ));
    assert_eq!(steiner_exact_td(&g, &[0, 1], &ntd).unwrap().cost, BigUint::from(1u32));
}

#[test]
fn generated_instances_match_oracles() {
    for seed in 0..12 {
        let p = GeneratorParams {
            seed,
            depth: 2,
            branching: (2, 3),
            sibling_links: seed % 2 == 1,
            max_vertices: 12,
            ..GeneratorParams::default()
        };
        let inst = gen_hd1_instance(&p).unwrap();
        let g = &inst.graph;
        let ntd = nice_hierarchy(g);
        let t = tsp_exact_td(g, &ntd).unwrap();
        t.validate(g).unwrap();
        assert_eq!(t.cost, held_karp_tsp(g).unwrap().cost, "seed {seed}");
        let terms: Vec<usize> = (0..g.n()).step_by(2).take(6).collect();
        let s = steiner_exact_td(g, &terms, &ntd).unwrap();
        s.validate(g, &terms).unwrap();
        assert_eq!(s.cost, dreyfus_wagner_steiner(g, &terms).unwrap().cost, "seed {seed}");
    }
}

fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let tree = proptest::collection::vec((any::<prop::sample::Index>(), 1u64..20), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n, 1u64..20), 0..n);
            (Just(n), tree, extra)
        })
        .prop_map(|(n, tree, extra)| {
            let mut edges = std::collections::BTreeMap::new();
            for (v, (p, w)) in tree.into_iter().enumerate() {
                let v = v + 1;
                edges.insert((p.index(v), v), w);
            }
            for (u, v, w) in extra {
                if u != v {
                    edges.entry((u.min(v), u.max(v))).or_insert(w);
                }
            }
            let list: Vec<(usize, usize, u64)> =
                edges.into_iter().map(|((u, v), w)| (u, v, w)).collect();
            Graph::from_u64(n, &list).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tsp_dp_matches_held_karp(g in connected_graph(8)) {
        let ntd = nice_min_degree(&g);
        let dp = tsp_exact_td(&g, &ntd).unwrap();
        dp.validate(&g).unwrap();
        let hk = held_karp_tsp(&g).unwrap();
        prop_assert_eq!(&dp.cost, &hk.cost);
        let approx = tsp_2approx(&g).unwrap();
        approx.validate(&g).unwrap();
        prop_assert!(approx.cost <= &hk.cost * 2u32);
    }

    #[test]
    fn steiner_dp_matches_dreyfus_wagner(
        g in connected_graph(9),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..5),
    ) {
        let mut terms: Vec<usize> = picks.iter().map(|i| i.index(g.n())).collect();
        terms.sort_unstable();
        terms.dedup();
        let ntd = nice_min_degree(&g);
        let dp = steiner_exact_td(&g, &terms, &ntd).unwrap();
        dp.validate(&g, &terms).unwrap();
        let dw = dreyfus_wagner_steiner(&g, &terms).unwrap();
        dw.validate(&g, &terms).unwrap();
        prop_assert_eq!(&dp.cost, &dw.cost);
        let approx = steiner_2approx(&g, &terms).unwrap();
        approx.validate(&g, &terms).unwrap();
        prop_assert!(approx.cost <= &dw.cost * 2u32);
    }

    #[test]
    fn sequential_and_parallel_agree(g in connected_graph(8)) {
        let ntd = nice_min_degree(&g);
        let seq = DpOptions { exec: Execution::Sequential, ..DpOptions::default() };
        let par = DpOptions { exec: Execution::Parallel, ..DpOptions::default() };
        prop_assert_eq!(
            tsp_exact_td_with(&g, &ntd, &seq).unwrap(),
            tsp_exact_td_with(&g, &ntd, &par).unwrap()
        );
        let terms = [0, g.n() - 1];
        prop_assert_eq!(
            steiner_exact_td_with(&g, &terms, &ntd, &seq).unwrap(),
            steiner_exact_td_with(&g, &terms, &ntd, &par).unwrap()
        );
    }
}
