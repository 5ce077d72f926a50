//! TSP DP. A shortest closed walk visiting every vertex is a cheapest
//! connected Eulerian multigraph spanning all vertices, and some optimum
//! uses every edge at most twice. States record per bag vertex whether it
//! has been touched, its degree parity, and the connectivity of touched
//! vertices; multiplicities are decided when an edge's first endpoint is
//! forgotten.

use num_bigint::BigUint;

use crate::cost::Cost;
use crate::dispatch_cost;
use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::treedecomp::NiceTreeDecomposition;

use super::engine::{self, Picks, Rules, State};
use super::{check_cover, euler_circuit, DpOptions, TourSolution};

struct TspRules<'a> {
    g: &'a Graph,
}

fn insert_bit(bits: u64, pos: usize) -> u64 {
    let low = bits & ((1u64 << pos) - 1);
    let high = bits >> pos;
    low | (high << (pos + 1))
}

fn remove_bit(bits: u64, pos: usize) -> u64 {
    let low = bits & ((1u64 << pos) - 1);
    let high = bits >> (pos + 1);
    low | (high << pos)
}

impl<C: Cost> Rules<C> for TspRules<'_> {
    fn introduce(&self, pos: usize, _v: usize, s: &State, out: &mut Vec<State>) {
        if s.closed {
            return;
        }
        let mut labels = s.labels.to_vec();
        labels.insert(pos, 0);
        out.push(State {
            labels: labels.into(),
            parity: insert_bit(s.parity, pos),
            closed: false,
        });
    }

    fn forget(
        &self,
        child_bag: &[usize],
        pos: usize,
        v: usize,
        s: &State,
        out: &mut Vec<(State, C, Picks)>,
    ) {
        let nbrs: Vec<(usize, usize, C)> = self
            .g
            .neighbors(v)
            .iter()
            .filter_map(|&(u, e)| {
                child_bag
                    .binary_search(&u)
                    .ok()
                    .map(|i| (i, u, C::from_weight(&self.g.edges()[e].w)))
            })
            .collect();
        let k = nbrs.len();
        let mut mult = vec![0u8; k];
        loop {
            if let Some(t) = apply(s, pos, &nbrs, &mult) {
                let mut add = C::zero();
                let mut picks = Vec::new();
                for (j, &(_, u, ref w)) in nbrs.iter().enumerate() {
                    for _ in 0..mult[j] {
                        add = add.plus(w);
                    }
                    if mult[j] > 0 {
                        picks.push((v, u, mult[j]));
                    }
                }
                out.push((t, add, picks));
            }
            // Next multiplicity vector in base 3.
            let mut j = 0;
            while j < k && mult[j] == 2 {
                mult[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
            mult[j] += 1;
        }
    }

    fn join_key(&self, _s: &State) -> u64 {
        0
    }

    fn join(&self, a: &State, b: &State) -> Option<State> {
        if a.closed && b.closed {
            return None;
        }
        let k = a.labels.len();
        let mut uf = UnionFind::new(k);
        for side in [&a.labels, &b.labels] {
            let mut first = [usize::MAX; 256];
            for (i, &l) in side.iter().enumerate() {
                if l != 0 {
                    if first[l as usize] == usize::MAX {
                        first[l as usize] = i;
                    } else {
                        uf.union(first[l as usize], i);
                    }
                }
            }
        }
        let labels: Box<[u8]> = (0..k)
            .map(|i| {
                if a.labels[i] == 0 && b.labels[i] == 0 {
                    0
                } else {
                    (uf.find(i) + 1) as u8
                }
            })
            .collect();
        let mut t = State {
            labels,
            parity: a.parity ^ b.parity,
            closed: a.closed || b.closed,
        };
        t.canonicalize();
        Some(t)
    }
}

/// Successor of `s` after giving `v` (at `pos`) the multiplicities `mult`
/// towards `nbrs` and forgetting it.
fn apply<C>(s: &State, pos: usize, nbrs: &[(usize, usize, C)], mult: &[u8]) -> Option<State> {
    let mut labels = s.labels.to_vec();
    let mut parity = s.parity;
    if labels[pos] == 0 && mult.iter().any(|&m| m > 0) {
        labels[pos] = u8::MAX;
    }
    let lv = labels[pos];
    for (j, &(i, _, _)) in nbrs.iter().enumerate() {
        let m = mult[j];
        if m == 0 {
            continue;
        }
        if m == 1 {
            parity ^= (1 << i) | (1 << pos);
        }
        let lu = labels[i];
        if lu == 0 {
            labels[i] = lv;
        } else if lu != lv {
            for x in labels.iter_mut() {
                if *x == lu {
                    *x = lv;
                }
            }
        }
    }
    if lv == 0 || parity >> pos & 1 == 1 {
        return None;
    }
    labels.remove(pos);
    let parity = remove_bit(parity, pos);
    if labels.contains(&lv) {
        let mut t = State {
            labels: labels.into(),
            parity,
            closed: false,
        };
        t.canonicalize();
        Some(t)
    } else if labels.is_empty() && !s.closed {
        Some(State {
            labels: labels.into(),
            parity: 0,
            closed: true,
        })
    } else {
        None
    }
}

pub fn tsp_exact_td(g: &Graph, ntd: &NiceTreeDecomposition) -> Result<TourSolution> {
    tsp_exact_td_with(g, ntd, &DpOptions::default())
}

pub fn tsp_exact_td_with(
    g: &Graph,
    ntd: &NiceTreeDecomposition,
    opts: &DpOptions,
) -> Result<TourSolution> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    let width = ntd.width();
    if width + 1 > opts.max_bag.min(64) {
        return Err(Error::BudgetExceeded {
            width,
            budget: opts.max_bag.min(64).saturating_sub(1),
        });
    }
    if n == 1 {
        let mut sol = TourSolution::from_walk(g, vec![0], "td-dp")?;
        sol.width = Some(width);
        return Ok(sol);
    }
    check_cover(g, ntd)?;
    let goal = State {
        labels: Box::new([]),
        parity: 0,
        closed: true,
    };
    let bound = g.total_weight() * BigUint::from(2u32);
    let rules = TspRules { g };
    let outcome = dispatch_cost!(&bound, C => {
        engine::run::<C, _>(ntd, &rules, &goal, opts.exec)?
            .map(|o| (o.cost.to_weight(), o.picks, o.states))
    });
    let Some((cost, picks, states)) = outcome else {
        return Err(Error::Disconnected);
    };
    let walk = euler_circuit(n, &picks, 0)?;
    let mut sol = TourSolution::from_walk(g, walk, "td-dp")?;
    if sol.cost != cost {
        return Err(Error::Internal("reconstructed tour cost differs".into()));
    }
    sol.width = Some(width);
    sol.states = states;
    Ok(sol)
}
