use hwy1::fptas::{fptas_steiner, fptas_tsp};
use hwy1::oracles::{dreyfus_wagner_steiner, gen_hd1_instance, held_karp_tsp, GeneratorParams};
use hwy1::reductions::{gen_stp, CnfFormula};
use hwy1::{Graph, ScaleValue};
use num_bigint::BigUint;
use num_rational::Ratio;
use proptest::prelude::*;

fn within(cost: &BigUint, opt: &BigUint, eps: &ScaleValue) -> bool {
    let lhs = Ratio::from_integer(cost.clone());
    let rhs = Ratio::from_integer(opt.clone()) * (Ratio::from_integer(BigUint::from(1u32)) + eps.ratio());
    lhs <= rhs
}

fn instance(seed: u64, max_vertices: usize) -> Graph {
    gen_hd1_instance(&GeneratorParams {
        seed,
        depth: 2,
        branching: (2, 3),
        sibling_links: seed % 3 == 0,
        max_vertices,
        ..GeneratorParams::default()
    })
    .unwrap()
    .graph
}

#[test]
fn huge_eps_is_still_feasible() {
    let g = instance(5, 12);
    let eps: ScaleValue = "1000000".parse().unwrap();
    let (t, rep) = fptas_tsp(&g, &eps).unwrap();
    t.validate(&g).unwrap();
    assert!(rep.is_consistent());
    let terms = [0, g.n() - 1];
    let (s, rep) = fptas_steiner(&g, &terms, &eps).unwrap();
    s.validate(&g, &terms).unwrap();
    assert!(rep.is_consistent());
}

#[test]
fn satisfiable_gadget_within_ten_percent() {
    let red = gen_stp(&CnfFormula::new(1, vec![vec![1]]).unwrap());
    let eps: ScaleValue = "1/10".parse().unwrap();
    let (s, _) = fptas_steiner(&red.graph, red.terminals(), &eps).unwrap();
    s.validate(&red.graph, red.terminals()).unwrap();
    assert!(within(&s.cost, &BigUint::from(133u32), &eps));
}

#[test]
fn report_serialises_exact_values() {
    let g = instance(1, 10);
    let eps: ScaleValue = "1/2".parse().unwrap();
    let (_, rep) = fptas_tsp(&g, &eps).unwrap();
    let v = rep.to_json();
    assert_eq!(v["eps"], "1/2");
    assert_eq!(v["eps_internal"], "1/24");
    assert!(v["final_cost"].is_string());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tsp_guarantee(seed in 0u64..10_000, tenth in any::<bool>()) {
        let g = instance(seed, 11);
        let eps: ScaleValue = if tenth { "1/10" } else { "1/2" }.parse().unwrap();
        let (sol, rep) = fptas_tsp(&g, &eps).unwrap();
        sol.validate(&g).unwrap();
        prop_assert!(rep.is_consistent());
        let opt = held_karp_tsp(&g).unwrap().cost;
        prop_assert!(within(&sol.cost, &opt, &eps));
        let lb = Ratio::from_integer(opt.clone());
        prop_assert!(rep.lower_bound.ratio() <= &lb);
        prop_assert!(opt <= rep.bootstrap_cost);
    }

    #[test]
    fn steiner_guarantee(
        seed in 0u64..10_000,
        tenth in any::<bool>(),
        picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..7),
    ) {
        let g = instance(seed, 14);
        let mut terms: Vec<usize> = picks.iter().map(|i| i.index(g.n())).collect();
        terms.sort_unstable();
        terms.dedup();
        let eps: ScaleValue = if tenth { "1/10" } else { "1/2" }.parse().unwrap();
        let (sol, rep) = fptas_steiner(&g, &terms, &eps).unwrap();
        sol.validate(&g, &terms).unwrap();
        prop_assert!(rep.is_consistent());
        let opt = dreyfus_wagner_steiner(&g, &terms).unwrap().cost;
        prop_assert!(within(&sol.cost, &opt, &eps));
        prop_assert!(opt <= rep.bootstrap_cost);
    }
}
