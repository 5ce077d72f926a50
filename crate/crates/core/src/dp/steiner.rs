//! Steiner tree DP. A state records which bag vertices belong to the
//! partial forest and how the forest partitions them; edges are decided
//! when their first endpoint is forgotten, which happens exactly once per
//! edge. A tree losing its last bag vertex must be the whole solution.

use crate::cost::Cost;
use crate::dispatch_cost;
use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::treedecomp::NiceTreeDecomposition;

use super::engine::{self, Picks, Rules, State};
use super::{check_cover, check_terminals, DpOptions, SteinerSolution};

struct SteinerRules<'a> {
    g: &'a Graph,
    terminal: Vec<bool>,
}

fn remove_at(labels: &[u8], pos: usize) -> Box<[u8]> {
    labels
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != pos)
        .map(|(_, &l)| l)
        .collect()
}

impl<C: Cost> Rules<C> for SteinerRules<'_> {
    fn introduce(&self, pos: usize, v: usize, s: &State, out: &mut Vec<State>) {
        let with = |l: u8, closed: bool| {
            let mut labels = s.labels.to_vec();
            labels.insert(pos, l);
            let mut t = State {
                labels: labels.into(),
                parity: 0,
                closed,
            };
            t.canonicalize();
            t
        };
        if !self.terminal[v] {
            out.push(with(0, s.closed));
        }
        if !s.closed {
            out.push(with(u8::MAX, false));
        }
    }

    fn forget(
        &self,
        child_bag: &[usize],
        pos: usize,
        v: usize,
        s: &State,
        out: &mut Vec<(State, C, Picks)>,
    ) {
        let lv = s.labels[pos];
        if lv == 0 {
            let t = State {
                labels: remove_at(&s.labels, pos),
                parity: 0,
                closed: s.closed,
            };
            out.push((t, C::zero(), Vec::new()));
            return;
        }
        // Cheapest edge from v into every other block.
        let mut best: Vec<Option<(C, usize)>> = vec![None; 256];
        for &(u, e) in self.g.neighbors(v) {
            let Ok(i) = child_bag.binary_search(&u) else {
                continue;
            };
            let l = s.labels[i];
            if l == 0 || l == lv {
                continue;
            }
            let w = C::from_weight(&self.g.edges()[e].w);
            let slot = &mut best[l as usize];
            if slot.as_ref().is_none_or(|(bw, bu)| (&w, &u) < (bw, bu)) {
                *slot = Some((w, u));
            }
        }
        let opts: Vec<(u8, C, usize)> = best
            .into_iter()
            .enumerate()
            .filter_map(|(l, b)| b.map(|(w, u)| (l as u8, w, u)))
            .collect();
        for mask in 0u64..(1u64 << opts.len()) {
            let mut labels = s.labels.to_vec();
            let mut add = C::zero();
            let mut picks = Vec::new();
            for (k, (l, w, u)) in opts.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    for x in labels.iter_mut() {
                        if *x == *l {
                            *x = lv;
                        }
                    }
                    add = add.plus(w);
                    picks.push((v, *u, 1));
                }
            }
            let rest = remove_at(&labels, pos);
            let t = if rest.contains(&lv) {
                let mut t = State {
                    labels: rest,
                    parity: 0,
                    closed: false,
                };
                t.canonicalize();
                t
            } else if rest.iter().all(|&x| x == 0) {
                State {
                    labels: rest,
                    parity: 0,
                    closed: true,
                }
            } else {
                continue;
            };
            out.push((t, add, picks));
        }
    }

    fn join_key(&self, s: &State) -> u64 {
        s.labels
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &l)| acc | (u64::from(l != 0) << i))
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
                if l == 0 {
                    continue;
                }
                if first[l as usize] == usize::MAX {
                    first[l as usize] = i;
                } else if !uf.union(first[l as usize], i) {
                    return None;
                }
            }
        }
        let labels: Box<[u8]> = (0..k)
            .map(|i| {
                if a.labels[i] == 0 {
                    0
                } else {
                    (uf.find(i) + 1) as u8
                }
            })
            .collect();
        let mut t = State {
            labels,
            parity: 0,
            closed: a.closed || b.closed,
        };
        t.canonicalize();
        Some(t)
    }
}

pub fn steiner_exact_td(
    g: &Graph,
    terminals: &[usize],
    ntd: &NiceTreeDecomposition,
) -> Result<SteinerSolution> {
    steiner_exact_td_with(g, terminals, ntd, &DpOptions::default())
}

pub fn steiner_exact_td_with(
    g: &Graph,
    terminals: &[usize],
    ntd: &NiceTreeDecomposition,
    opts: &DpOptions,
) -> Result<SteinerSolution> {
    check_terminals(g, terminals)?;
    check_cover(g, ntd)?;
    let width = ntd.width();
    if width + 1 > opts.max_bag.min(64) {
        return Err(Error::BudgetExceeded {
            width,
            budget: opts.max_bag.min(64).saturating_sub(1),
        });
    }
    let mut terminal = vec![false; g.n()];
    for &t in terminals {
        terminal[t] = true;
    }
    let rules = SteinerRules { g, terminal };
    let goal = State {
        labels: Box::new([]),
        parity: 0,
        closed: true,
    };
    let bound = g.total_weight();
    let outcome = dispatch_cost!(&bound, C => {
        engine::run::<C, _>(ntd, &rules, &goal, opts.exec)?
            .map(|o| (o.cost.to_weight(), o.picks, o.states))
    });
    let Some((cost, picks, states)) = outcome else {
        return Err(Error::Infeasible("terminals are not connected".into()));
    };
    let mut sol = SteinerSolution::from_edges(g, picks.into_keys(), "td-dp")?;
    if sol.cost != cost {
        return Err(Error::Internal("reconstructed tree cost differs".into()));
    }
    sol.width = Some(width);
    sol.states = states;
    Ok(sol)
}
