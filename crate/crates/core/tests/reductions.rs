use hwy1::dp::{tsp_exact_td, SteinerSolution};
use hwy1::oracles::{
    dreyfus_wagner_steiner, exact_highway_dimension, held_karp_tsp_capped, sat_bruteforce,
};
use hwy1::reductions::{
    constructive_tour, decide_stp, decide_tsp, edge_addition_hd_bound, gen_stp, gen_tsp,
    parse_dimacs, CnfFormula,
};
use hwy1::spcover::verify_hd1;
use hwy1::treedecomp::{make_nice, min_degree_decomposition};
use hwy1::Graph;
use num_bigint::BigUint;
use proptest::prelude::*;

fn cnf(vars: usize, clauses: &[&[i64]]) -> CnfFormula {
    CnfFormula::new(vars, clauses.iter().map(|c| c.to_vec()).collect()).unwrap()
}

fn stp_decide(phi: &CnfFormula) -> (hwy1::reductions::Decision, SteinerSolution) {
    let red = gen_stp(phi);
    let opt = dreyfus_wagner_steiner(&red.graph, red.terminals()).unwrap();
    (decide_stp(&red, &opt).unwrap(), opt)
}

#[test]
fn stp_single_literal() {
    let (d, opt) = stp_decide(&cnf(1, &[&[1]]));
    assert!(d.satisfiable);
    assert_eq!(opt.cost, BigUint::from(133u32));
    assert_eq!(d.assignment, Some(vec![true]));
}

#[test]
fn stp_contradiction() {
    let (d, opt) = stp_decide(&cnf(1, &[&[1], &[-1]]));
    assert!(!d.satisfiable);
    assert!(opt.cost > BigUint::from(1464u32));
}

#[test]
fn stp_three_variables() {
    let phi = cnf(3, &[&[1, -2], &[2, 3], &[-1, -3]]);
    let (d, opt) = stp_decide(&phi);
    assert!(d.satisfiable);
    assert_eq!(opt.cost, d.threshold);
    assert!(phi.eval(d.assignment.as_ref().unwrap()));
}

#[test]
fn stp_gadgets_are_certified() {
    for phi in [cnf(1, &[&[1]]), cnf(2, &[&[1, 2], &[-1, 2], &[-2]])] {
        assert!(verify_hd1(&gen_stp(&phi).graph).is_certified());
    }
}

#[test]
fn tsp_one_clause_is_satisfiable() {
    let red = gen_tsp(&cnf(3, &[&[1, 2, 3]])).unwrap();
    let opt = held_karp_tsp_capped(&red.graph, 18).unwrap();
    let d = decide_tsp(&red, &opt).unwrap();
    assert!(d.satisfiable);
    assert!(opt.cost <= red.threshold);
    let built = constructive_tour(&red, d.assignment.as_ref().unwrap()).unwrap();
    assert_eq!(built.cost, red.threshold);
}

#[test]
fn tsp_padded_contradiction_is_unsatisfiable() {
    let phi = cnf(2, &[&[1, 2], &[-1], &[-2]]);
    let red = gen_tsp(&phi).unwrap();
    assert_eq!(red.graph.n(), 26);
    let opt = tsp_exact_td(&red.graph, &make_nice(&min_degree_decomposition(&red.graph))).unwrap();
    opt.validate(&red.graph).unwrap();
    let d = decide_tsp(&red, &opt).unwrap();
    assert!(!d.satisfiable);
    assert!(opt.cost > red.threshold);
}

#[test]
fn single_variable_gadget_has_dimension_two() {
    let red = gen_tsp(&cnf(1, &[&[1]])).unwrap();
    let (gb, _) = red.graph.induced_subgraph(&red.roles.var[0]);
    assert_eq!(exact_highway_dimension(&gb, 4).unwrap(), Some(2));
}

#[test]
fn edge_addition_bounds_hold_on_small_cases() {
    let red = gen_tsp(&cnf(2, &[&[1, 2]])).unwrap();
    // Two variable gadgets (dimension 2 each) joined by the chain edge.
    let (gb, _) = red.graph.induced_subgraph(&(0..8).collect::<Vec<_>>());
    let without: Vec<(usize, usize, u64)> = gb
        .edges()
        .iter()
        .filter(|e| (e.u, e.v) != (0, 4))
        .map(|e| (e.u, e.v, e.w.iter_u64_digits().next().unwrap()))
        .collect();
    let base = Graph::from_u64(8, &without).unwrap();
    let chain = (0, 4, red.ladder.c[0].clone());
    let b = edge_addition_hd_bound(&base, &[chain], 2).unwrap();
    assert_eq!(b.bound, 2);
    assert!(exact_highway_dimension(&gb, 4).unwrap().unwrap() <= b.bound);

    // The last stage of the one-clause construction adds six link edges.
    let red = gen_tsp(&cnf(3, &[&[1, 2, 3]])).unwrap();
    let f = &red.ladder.f[0];
    let (rest, links): (Vec<_>, Vec<_>) =
        red.graph.edges().iter().partition(|e| &e.w != f);
    let base = Graph::new(red.graph.n(), rest.iter().map(|e| (e.u, e.v, e.w.clone()))).unwrap();
    let added: Vec<_> = links.iter().map(|e| (e.u, e.v, e.w.clone())).collect();
    assert_eq!(edge_addition_hd_bound(&base, &added, 2).unwrap().bound, 6);
}

#[test]
fn dimacs_through_reduction() {
    let phi = parse_dimacs("c demo\np cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    let (d, _) = stp_decide(&phi);
    assert!(d.satisfiable);
    assert_eq!(d.assignment, Some(vec![false, true]));
}

fn small_cnf() -> impl Strategy<Value = CnfFormula> {
    (1usize..=4).prop_flat_map(|k| {
        let lit = (1..=k as i64, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        let clause = proptest::collection::vec(lit, 1..=3);
        proptest::collection::vec(clause, 1..=3)
            .prop_map(move |cs| CnfFormula::new(k, cs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stp_equivalence(phi in small_cnf()) {
        let sat = sat_bruteforce(&phi).unwrap();
        let red = gen_stp(&phi);
        prop_assert!(verify_hd1(&red.graph).is_certified());
        let (d, opt) = stp_decide(&phi);
        prop_assert_eq!(d.satisfiable, sat.is_some());
        if sat.is_some() {
            prop_assert_eq!(&opt.cost, &red.threshold);
            prop_assert!(phi.eval(d.assignment.as_ref().unwrap()));
        } else {
            prop_assert!(opt.cost > red.threshold);
        }
    }
}
