use std::collections::HashSet;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, DistMatrix, Graph, Weight};

use super::{oracle_cap, HIGHWAY_CAP};

/// Highway dimension by exhaustive search, or `None` if it exceeds `h_max`.
pub fn exact_highway_dimension(g: &Graph, h_max: usize) -> Result<Option<usize>> {
    exact_highway_dimension_capped(g, h_max, oracle_cap(HIGHWAY_CAP))
}

pub fn exact_highway_dimension_capped(
    g: &Graph,
    h_max: usize,
    cap: usize,
) -> Result<Option<usize>> {
    let n = g.n();
    if n > cap.min(64) {
        return Err(Error::CapExceeded {
            what: "highway-dimension vertex count",
            cap: cap.min(64),
            actual: n,
        });
    }
    let d = all_pairs(g);
    let mut lengths: Vec<Weight> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if let Some(x) = d.get(u, v) {
                lengths.push(x.clone());
            }
        }
    }
    lengths.sort();
    lengths.dedup();
    // Scales as exact halves: r = num / 2.
    let mut scales: Vec<BigUint> = lengths
        .iter()
        .flat_map(|l| [l.clone(), l * 2u32])
        .collect();
    scales.sort();
    scales.dedup();
    let mut worst = 0;
    for r2 in &scales {
        let search = Search::new(g, &d, r2);
        if search.pairs.is_empty() {
            continue;
        }
        let mut found = None;
        for h in worst.max(1)..=h_max {
            if search.feasible(h) {
                found = Some(h);
                break;
            }
        }
        match found {
            Some(h) => worst = worst.max(h),
            None => return Ok(None),
        }
    }
    Ok(Some(worst))
}

/// Hub search at one scale `r = r2 / 2`.
struct Search<'a> {
    g: &'a Graph,
    d: &'a DistMatrix,
    pairs: Vec<(usize, usize)>,
    /// `ball[v]`: bitmask of vertices within `2r` of `v`.
    ball: Vec<u64>,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph, d: &'a DistMatrix, r2: &BigUint) -> Self {
        let n = g.n();
        let mut pairs = Vec::new();
        for u in 0..n {
            for w in u + 1..n {
                if let Some(x) = d.get(u, w) {
                    // r < x <= 2r  <=>  r2 < 2x <= 2 r2
                    let x2 = x * 2u32;
                    if &x2 > r2 && x2 <= r2 * 2u32 {
                        pairs.push((u, w));
                    }
                }
            }
        }
        let ball = (0..n)
            .map(|v| {
                (0..n)
                    .filter(|&x| d.get(v, x).is_some_and(|y| y <= r2))
                    .fold(0u64, |acc, x| acc | (1 << x))
            })
            .collect();
        Search { g, d, pairs, ball }
    }

    fn feasible(&self, h: usize) -> bool {
        let mut failed = HashSet::new();
        self.extend(0, h, &mut failed)
    }

    fn extend(&self, hubs: u64, h: usize, failed: &mut HashSet<u64>) -> bool {
        let Some(path) = self.uncovered_path(hubs) else {
            return true;
        };
        for x in path {
            let next = hubs | (1 << x);
            if failed.contains(&next) || !self.sparse_around(next, x, h) {
                continue;
            }
            if self.extend(next, h, failed) {
                return true;
            }
            failed.insert(next);
        }
        false
    }

    /// Every ball containing the new hub `x` still holds at most `h` hubs.
    fn sparse_around(&self, hubs: u64, x: usize, h: usize) -> bool {
        self.ball
            .iter()
            .all(|&b| b >> x & 1 == 0 || (b & hubs).count_ones() as usize <= h)
    }

    /// Lexicographically least hub-free shortest path of the first pair
    /// that has one.
    fn uncovered_path(&self, hubs: u64) -> Option<Vec<usize>> {
        let n = self.g.n();
        let free = |v: usize| hubs >> v & 1 == 0;
        for &(u, w) in &self.pairs {
            if !free(u) || !free(w) {
                continue;
            }
            let duw = self.d.d(u, w);
            let on = |x: usize| self.d.on_some_shortest_path(u, x, w) && free(x);
            // reach[x]: a hub-free shortest path continues from x to w.
            let mut by_dist: Vec<usize> = (0..n).filter(|&x| on(x)).collect();
            by_dist.sort_by(|&a, &b| self.d.d(a, w).cmp(self.d.d(b, w)));
            let mut reach = vec![false; n];
            for &x in &by_dist {
                reach[x] = x == w
                    || self.g.neighbors(x).iter().any(|&(y, e)| {
                        reach[y] && &(self.d.d(u, x) + &self.g.edges()[e].w) == self.d.d(u, y)
                    });
            }
            if !reach[u] {
                continue;
            }
            let mut path = vec![u];
            let mut x = u;
            while x != w {
                x = self
                    .g
                    .neighbors(x)
                    .iter()
                    .filter(|&&(y, e)| {
                        reach[y] && &(self.d.d(u, x) + &self.g.edges()[e].w) == self.d.d(u, y)
                    })
                    .map(|&(y, _)| y)
                    .min()
                    .expect("reachable successor");
                path.push(x);
            }
            debug_assert!(self.d.d(u, path[path.len() - 1]) == duw);
            return Some(path);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_has_dimension_one() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 4), (0, 3, 5), (0, 4, 3)]).unwrap();
        assert_eq!(exact_highway_dimension(&g, 4).unwrap(), Some(1));
    }

    #[test]
    fn uniform_square_needs_two() {
        let g = Graph::from_u64(4, &[(0, 1, 3), (1, 2, 3), (2, 3, 3), (0, 3, 3)]).unwrap();
        assert_eq!(exact_highway_dimension(&g, 4).unwrap(), Some(2));
        assert_eq!(exact_highway_dimension(&g, 1).unwrap(), None);
    }

    #[test]
    fn single_vertex_is_zero() {
        let g = Graph::from_u64(1, &[]).unwrap();
        assert_eq!(exact_highway_dimension(&g, 3).unwrap(), Some(0));
    }
}
