use num_bigint::BigUint;

use crate::cost::Cost;
use crate::dispatch_cost;
use crate::dp::TourSolution;
use crate::error::{Error, Result};
use crate::graph::{all_pairs, DistMatrix, Graph};

use super::{oracle_cap, HELD_KARP_CAP};

/// Optimal closed walk through subset DP on the metric closure.
pub fn held_karp_tsp(g: &Graph) -> Result<TourSolution> {
    held_karp_tsp_capped(g, oracle_cap(HELD_KARP_CAP))
}

pub fn held_karp_tsp_capped(g: &Graph, cap: usize) -> Result<TourSolution> {
    let n = g.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "Held-Karp vertex count",
            cap,
            actual: n,
        });
    }
    if n == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    let d = all_pairs(g);
    if !d.is_connected() {
        return Err(Error::Disconnected);
    }
    let order = if n == 1 {
        vec![0]
    } else {
        let max = d.max_distance().cloned().unwrap_or_default();
        let bound = max * BigUint::from(n);
        dispatch_cost!(&bound, C => cycle::<C>(&d))
    };
    let mut walk = vec![0usize];
    for w in order.windows(2) {
        walk.extend_from_slice(&d.path(g, w[0], w[1])[1..]);
    }
    let mut sol = TourSolution::from_walk(g, walk, "held-karp")?;
    sol.states = if n > 1 { (1u64 << (n - 1)) * (n as u64 - 1) } else { 0 };
    Ok(sol)
}

/// Optimal Hamiltonian cycle on the closure, as `0, ..., 0`.
fn cycle<C: Cost>(d: &DistMatrix) -> Vec<usize> {
    let n = d.n();
    let k = n - 1;
    let w = |a: usize, b: usize| C::from_weight(d.d(a, b));
    // Vertex i + 1 of the graph is index i here.
    let dist: Vec<C> = (0..k * k).map(|x| w(x / k + 1, x % k + 1)).collect();
    let from0: Vec<C> = (0..k).map(|j| w(0, j + 1)).collect();
    let full = (1usize << k) - 1;
    let mut dp: Vec<C> = vec![C::zero(); (full + 1) * k];
    for j in 0..k {
        dp[(1 << j) * k + j] = from0[j].clone();
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        for j in 0..k {
            if mask >> j & 1 == 0 {
                continue;
            }
            let prev = mask ^ (1 << j);
            let row = &dp[prev * k..prev * k + k];
            let mut rest = prev;
            let i0 = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut best = row[i0].plus(&dist[i0 * k + j]);
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let c = row[i].plus(&dist[i * k + j]);
                if c < best {
                    best = c;
                }
            }
            dp[mask * k + j] = best;
        }
    }
    let close = |j: usize| dp[full * k + j].plus(&from0[j]);
    let mut last = 0;
    for j in 1..k {
        if close(j) < close(last) {
            last = j;
        }
    }
    // Walk the table backwards.
    let mut seq = vec![last];
    let mut mask = full;
    let mut j = last;
    while mask.count_ones() > 1 {
        let prev = mask ^ (1 << j);
        let target = &dp[mask * k + j];
        let i = (0..k)
            .find(|&i| prev >> i & 1 == 1 && dp[prev * k + i].plus(&dist[i * k + j]) == *target)
            .expect("table is consistent");
        seq.push(i);
        mask = prev;
        j = i;
    }
    let mut order = vec![0];
    order.extend(seq.iter().rev().map(|&i| i + 1));
    order.push(0);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_and_square() {
        let t = Graph::from_u64(3, &[(0, 1, 3), (1, 2, 3), (0, 2, 3)]).unwrap();
        assert_eq!(held_karp_tsp(&t).unwrap().cost, BigUint::from(9u32));
        let c = Graph::from_u64(4, &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (0, 3, 3)]).unwrap();
        let sol = held_karp_tsp(&c).unwrap();
        assert_eq!(sol.cost, BigUint::from(12u32));
        sol.validate(&c).unwrap();
    }

    #[test]
    fn star_tour_doubles_spokes() {
        let g = Graph::from_u64(4, &[(0, 1, 3), (0, 2, 3), (0, 3, 3)]).unwrap();
        let sol = held_karp_tsp(&g).unwrap();
        assert_eq!(sol.cost, BigUint::from(18u32));
        sol.validate(&g).unwrap();
    }

    #[test]
    fn cap_is_enforced() {
        let edges: Vec<(usize, usize, u64)> = (0..5).map(|i| (i, i + 1, 1)).collect();
        let g = Graph::from_u64(6, &edges).unwrap();
        assert!(matches!(
            held_karp_tsp_capped(&g, 5),
            Err(Error::CapExceeded { .. })
        ));
    }
}
