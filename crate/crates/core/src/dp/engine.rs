//! Bottom-up evaluation of a nice tree decomposition shared by both
//! solvers. A solver supplies the per-kind transition rules; the engine
//! keeps one min-cost table per node and rebuilds the chosen edge multiset.

use std::collections::{BTreeMap, HashMap};

use indexmap::map::Entry as MapEntry;
use indexmap::IndexMap;

use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::treedecomp::{NiceKind, NiceTreeDecomposition};

/// Per-bag-position block labels (0 = absent), a parity bit per position
/// and whether the solution has already been completed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct State {
    pub labels: Box<[u8]>,
    pub parity: u64,
    pub closed: bool,
}

impl State {
    pub fn empty() -> Self {
        State {
            labels: Box::new([]),
            parity: 0,
            closed: false,
        }
    }

    /// Renumbers nonzero labels 1, 2, ... in order of first appearance.
    pub fn canonicalize(&mut self) {
        let mut map = [0u8; 256];
        let mut next = 0u8;
        for l in self.labels.iter_mut() {
            if *l != 0 {
                if map[*l as usize] == 0 {
                    next += 1;
                    map[*l as usize] = next;
                }
                *l = map[*l as usize];
            }
        }
    }
}

/// Edge choices made at a forget node: `(u, v, multiplicity)`.
pub(crate) type Picks = Vec<(usize, usize, u8)>;

#[derive(Clone, Debug)]
enum Back {
    Leaf,
    Unary(usize),
    Forget(usize, Picks),
    Join(usize, usize),
}

#[derive(Clone, Debug)]
struct Entry<C> {
    cost: C,
    back: Back,
}

type Table<C> = IndexMap<State, Entry<C>>;

pub(crate) trait Rules<C: Cost>: Sync {
    /// `v` enters at position `pos` of `bag`; pushes the successors.
    fn introduce(&self, pos: usize, v: usize, s: &State, out: &mut Vec<State>);
    /// `v` leaves from position `pos` of `child_bag`; pushes successors
    /// with their added cost and the edges chosen.
    fn forget(
        &self,
        child_bag: &[usize],
        pos: usize,
        v: usize,
        s: &State,
        out: &mut Vec<(State, C, Picks)>,
    );
    /// Only states with equal keys are combined at a join.
    fn join_key(&self, s: &State) -> u64;
    fn join(&self, a: &State, b: &State) -> Option<State>;
}

pub(crate) struct Outcome<C> {
    pub cost: C,
    pub picks: BTreeMap<(usize, usize), u8>,
    pub states: u64,
}

fn relax<C: Cost>(table: &mut Table<C>, key: State, cost: C, back: Back) {
    match table.entry(key) {
        MapEntry::Occupied(mut e) => {
            if cost < e.get().cost {
                *e.get_mut() = Entry { cost, back };
            }
        }
        MapEntry::Vacant(e) => {
            e.insert(Entry { cost, back });
        }
    }
}

pub(crate) fn run<C: Cost, R: Rules<C>>(
    ntd: &NiceTreeDecomposition,
    rules: &R,
    goal: &State,
    exec: Execution,
) -> Result<Option<Outcome<C>>> {
    let nodes = ntd.nodes();
    let mut tables: Vec<Table<C>> = Vec::with_capacity(nodes.len());
    let mut states = 0u64;
    for node in nodes {
        let mut table: Table<C> = IndexMap::new();
        match node.kind {
            NiceKind::Leaf => {
                relax(&mut table, State::empty(), C::zero(), Back::Leaf);
            }
            NiceKind::Introduce(v) => {
                let child = &tables[node.children[0]];
                let pos = node.bag.binary_search(&v).expect("introduced vertex in bag");
                let mut out = Vec::new();
                for (i, (s, e)) in child.iter().enumerate() {
                    rules.introduce(pos, v, s, &mut out);
                    for t in out.drain(..) {
                        relax(&mut table, t, e.cost.clone(), Back::Unary(i));
                    }
                }
            }
            NiceKind::Forget(v) => {
                let c = node.children[0];
                let child_bag = &nodes[c].bag;
                let pos = child_bag.binary_search(&v).expect("forgotten vertex in child");
                let entries: Vec<(&State, &Entry<C>)> = tables[c].iter().collect();
                let produced = par::map(exec, &entries, |(s, _)| {
                    let mut out = Vec::new();
                    rules.forget(child_bag, pos, v, s, &mut out);
                    out
                });
                for (i, outs) in produced.into_iter().enumerate() {
                    let base = &entries[i].1.cost;
                    for (t, add, picks) in outs {
                        relax(&mut table, t, base.plus(&add), Back::Forget(i, picks));
                    }
                }
            }
            NiceKind::Join => {
                let (l, r) = (&tables[node.children[0]], &tables[node.children[1]]);
                let mut by_key: HashMap<u64, Vec<usize>> = HashMap::new();
                for (j, s) in r.keys().enumerate() {
                    by_key.entry(rules.join_key(s)).or_default().push(j);
                }
                let left: Vec<(&State, &Entry<C>)> = l.iter().collect();
                let produced = par::map(exec, &left, |(a, ea)| {
                    let mut out = Vec::new();
                    if let Some(js) = by_key.get(&rules.join_key(a)) {
                        for &j in js {
                            let (b, eb) = r.get_index(j).expect("index in range");
                            if let Some(t) = rules.join(a, b) {
                                out.push((t, ea.cost.plus(&eb.cost), j));
                            }
                        }
                    }
                    out
                });
                for (i, outs) in produced.into_iter().enumerate() {
                    for (t, cost, j) in outs {
                        relax(&mut table, t, cost, Back::Join(i, j));
                    }
                }
            }
        }
        states += table.len() as u64;
        tables.push(table);
    }
    let root = ntd.root();
    let Some((goal_idx, _, entry)) = tables[root].get_full(goal) else {
        return Ok(None);
    };
    let cost = entry.cost.clone();
    let mut picks: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    let mut stack = vec![(root, goal_idx)];
    while let Some((x, i)) = stack.pop() {
        let (_, e) = tables[x]
            .get_index(i)
            .ok_or_else(|| Error::Internal("dangling back pointer".into()))?;
        let ch = &nodes[x].children;
        match &e.back {
            Back::Leaf => {}
            Back::Unary(j) => stack.push((ch[0], *j)),
            Back::Forget(j, p) => {
                for &(u, v, m) in p {
                    *picks.entry((u.min(v), u.max(v))).or_default() += m;
                }
                stack.push((ch[0], *j));
            }
            Back::Join(a, b) => {
                stack.push((ch[0], *a));
                stack.push((ch[1], *b));
            }
        }
    }
    Ok(Some(Outcome {
        cost,
        picks,
        states,
    }))
}
