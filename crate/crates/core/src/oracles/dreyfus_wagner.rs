use num_bigint::BigUint;

use crate::cost::Cost;
use crate::dispatch_cost;
use crate::dp::SteinerSolution;
use crate::error::{Error, Result};
use crate::graph::{all_pairs, DistMatrix, Graph};

use super::{oracle_cap, DREYFUS_WAGNER_CAP};

/// Optimal Steiner tree through subset DP over the terminals.
pub fn dreyfus_wagner_steiner(g: &Graph, terminals: &[usize]) -> Result<SteinerSolution> {
    dreyfus_wagner_steiner_capped(g, terminals, oracle_cap(DREYFUS_WAGNER_CAP))
}

pub fn dreyfus_wagner_steiner_capped(
    g: &Graph,
    terminals: &[usize],
    cap: usize,
) -> Result<SteinerSolution> {
    let mut ts = terminals.to_vec();
    ts.sort_unstable();
    ts.dedup();
    if ts.is_empty() {
        return Err(Error::InvalidArgument("terminal set is empty".into()));
    }
    if ts.len() > cap {
        return Err(Error::CapExceeded {
            what: "Dreyfus-Wagner terminal count",
            cap,
            actual: ts.len(),
        });
    }
    if let Some(&t) = ts.iter().find(|&&t| t >= g.n()) {
        return Err(Error::InvalidArgument(format!("terminal {t} out of range")));
    }
    let d = all_pairs(g);
    if ts.iter().any(|&t| d.get(ts[0], t).is_none()) {
        return Err(Error::Infeasible("terminals lie in different components".into()));
    }
    // Work inside the component of the terminals.
    let comp: Vec<usize> = (0..g.n()).filter(|&v| d.get(ts[0], v).is_some()).collect();
    let max = comp
        .iter()
        .flat_map(|&u| comp.iter().map(move |&v| (u, v)))
        .map(|(u, v)| d.d(u, v))
        .max()
        .cloned()
        .unwrap_or_default();
    let bound = max * BigUint::from(2 * ts.len() + 1);
    let edges = dispatch_cost!(&bound, C => tree::<C>(g, &d, &ts, &comp));
    let mut sol = SteinerSolution::from_edges(g, edges, "dreyfus-wagner")?;
    sol.states = (1u64 << ts.len()) * comp.len() as u64;
    Ok(sol)
}

struct Tables<C> {
    /// `full[S][i]`: cheapest tree spanning `S` and `comp[i]`.
    full: Vec<Vec<C>>,
    /// `split[S][i]`: the same with `comp[i]` of degree at least two.
    split: Vec<Vec<C>>,
}

fn tree<C: Cost>(g: &Graph, d: &DistMatrix, ts: &[usize], comp: &[usize]) -> Vec<(usize, usize)> {
    let k = ts.len();
    let m = comp.len();
    let dc = |i: usize, j: usize| C::from_weight(d.d(comp[i], comp[j]));
    let mut t = Tables {
        full: vec![Vec::new(); 1 << k],
        split: vec![Vec::new(); 1 << k],
    };
    for (b, &term) in ts.iter().enumerate() {
        t.full[1 << b] = comp
            .iter()
            .map(|&v| C::from_weight(d.d(term, v)))
            .collect();
    }
    for s in 1usize..(1 << k) {
        if s.count_ones() < 2 {
            continue;
        }
        let low = s & s.wrapping_neg();
        let mut split = Vec::with_capacity(m);
        for i in 0..m {
            let mut best: Option<C> = None;
            // Subsets containing the lowest element, proper.
            let rest = s ^ low;
            let mut sub = rest;
            loop {
                let a = sub | low;
                if a != s {
                    let c = t.full[a][i].plus(&t.full[s ^ a][i]);
                    if best.as_ref().is_none_or(|b| c < *b) {
                        best = Some(c);
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            split.push(best.expect("a proper split exists"));
        }
        let full: Vec<C> = (0..m)
            .map(|j| {
                (0..m)
                    .map(|i| split[i].plus(&dc(i, j)))
                    .min()
                    .expect("nonempty component")
            })
            .collect();
        t.split[s] = split;
        t.full[s] = full;
    }
    let all: usize = (1 << k) - 1;
    let root = comp.binary_search(&ts[0]).expect("terminal in its component");
    let mut edges = Vec::new();
    let mut stack = vec![(all, root)];
    while let Some((s, j)) = stack.pop() {
        let path_to = |edges: &mut Vec<(usize, usize)>, a: usize, b: usize| {
            let p = d.path(g, comp[a], comp[b]);
            edges.extend(p.windows(2).map(|w| (w[0], w[1])));
        };
        if s.count_ones() == 1 {
            let term = ts[s.trailing_zeros() as usize];
            let ti = comp.binary_search(&term).expect("terminal in component");
            path_to(&mut edges, ti, j);
            continue;
        }
        let target = &t.full[s][j];
        let i = (0..m)
            .find(|&i| t.split[s][i].plus(&dc(i, j)) == *target)
            .expect("table is consistent");
        path_to(&mut edges, i, j);
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != s && t.full[a][i].plus(&t.full[s ^ a][i]) == t.split[s][i] {
                stack.push((a, i));
                stack.push((s ^ a, i));
                break;
            }
            assert!(sub != 0, "table is consistent");
            sub = (sub - 1) & rest;
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_terminals_take_a_shortest_path() {
        let g = Graph::from_u64(4, &[(0, 1, 2), (1, 2, 2), (0, 3, 1), (3, 2, 5)]).unwrap();
        let sol = dreyfus_wagner_steiner(&g, &[0, 2]).unwrap();
        assert_eq!(sol.cost, BigUint::from(4u32));
        sol.validate(&g, &[0, 2]).unwrap();
    }

    #[test]
    fn star_center_is_used() {
        let g = Graph::from_u64(
            4,
            &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (1, 2, 5), (2, 3, 5), (1, 3, 5)],
        )
        .unwrap();
        let sol = dreyfus_wagner_steiner(&g, &[1, 2, 3]).unwrap();
        assert_eq!(sol.cost, BigUint::from(9u32));
        assert_eq!(sol.edges, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn single_terminal_costs_nothing() {
        let g = Graph::from_u64(2, &[(0, 1, 7)]).unwrap();
        let sol = dreyfus_wagner_steiner(&g, &[1]).unwrap();
        assert_eq!(sol.cost, BigUint::from(0u32));
        assert!(sol.edges.is_empty());
    }
}
