//! Exact Steiner Tree and TSP over nice tree decompositions, and the
//! 2-approximations used to bootstrap the approximation schemes.

mod approx;
mod engine;
mod steiner;
mod tsp;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::json;

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind, Weight};
use crate::par::Execution;

pub use approx::{steiner_2approx, tsp_2approx};
pub use steiner::{steiner_exact_td, steiner_exact_td_with};
pub use tsp::{tsp_exact_td, tsp_exact_td_with};

/// Largest bag the solvers accept unless told otherwise.
pub const DEFAULT_MAX_BAG: usize = 24;

#[derive(Clone, Copy, Debug)]
pub struct DpOptions {
    /// Refuse decompositions with a larger bag.
    pub max_bag: usize,
    pub exec: Execution,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            max_bag: DEFAULT_MAX_BAG,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteinerSolution {
    /// Tree edges as `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub cost: Weight,
    pub solver: &'static str,
    pub width: Option<usize>,
    /// DP states created (0 for non-DP solvers).
    pub states: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TourSolution {
    /// Closed walk along edges of the graph; first vertex equals last
    /// whenever the graph has an edge.
    pub walk: Vec<usize>,
    pub cost: Weight,
    pub solver: &'static str,
    pub width: Option<usize>,
    pub states: u64,
}

fn edge_cost(g: &Graph, u: usize, v: usize) -> Result<&Weight> {
    g.edge_weight(u, v)
        .ok_or_else(|| Error::Internal(format!("({u}, {v}) is not an edge")))
}

impl SteinerSolution {
    pub(crate) fn from_edges(
        g: &Graph,
        edges: impl IntoIterator<Item = (usize, usize)>,
        solver: &'static str,
    ) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut cost = BigUint::zero();
        for &(u, v) in &edges {
            cost += edge_cost(g, u, v)?;
        }
        Ok(SteinerSolution {
            edges,
            cost,
            solver,
            width: None,
            states: 0,
        })
    }

    /// Checks the tree is acyclic, connected, spans `terminals` and that
    /// `cost` is the sum of its edge weights.
    pub fn validate(&self, g: &Graph, terminals: &[usize]) -> Result<()> {
        let mut sum = BigUint::zero();
        let mut uf = UnionFind::new(g.n());
        let mut touched = vec![false; g.n()];
        for &(u, v) in &self.edges {
            sum += edge_cost(g, u, v)?;
            if !uf.union(u, v) {
                return Err(Error::Internal(format!("cycle through ({u}, {v})")));
            }
            touched[u] = true;
            touched[v] = true;
        }
        if sum != self.cost {
            return Err(Error::Internal(format!(
                "recorded cost {} but edges sum to {sum}",
                self.cost
            )));
        }
        let Some(&t0) = terminals.first() else {
            return Ok(());
        };
        let root = uf.find(t0);
        for &t in terminals {
            if uf.find(t) != root {
                return Err(Error::Internal(format!("terminal {t} not connected")));
            }
        }
        if self.edges.is_empty() {
            return Ok(());
        }
        if !touched[t0] || (0..g.n()).any(|v| touched[v] && uf.find(v) != root) {
            return Err(Error::Internal("tree is not connected".into()));
        }
        Ok(())
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        json!({
            "solver": self.solver,
            "cost": g.format_length(&self.cost),
            "edges": self.edges,
            "width": self.width,
        })
    }
}

impl TourSolution {
    pub(crate) fn from_walk(g: &Graph, walk: Vec<usize>, solver: &'static str) -> Result<Self> {
        let mut cost = BigUint::zero();
        for w in walk.windows(2) {
            cost += edge_cost(g, w[0], w[1])?;
        }
        Ok(TourSolution {
            walk,
            cost,
            solver,
            width: None,
            states: 0,
        })
    }

    /// Checks the walk is closed, follows edges, visits every vertex and
    /// that `cost` is the sum of its steps.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if g.n() == 0 {
            return Err(Error::InvalidGraph("empty graph".into()));
        }
        if self.walk.is_empty() || self.walk.first() != self.walk.last() {
            return Err(Error::Internal("walk is not closed".into()));
        }
        let mut sum = BigUint::zero();
        for w in self.walk.windows(2) {
            sum += edge_cost(g, w[0], w[1])?;
        }
        if sum != self.cost {
            return Err(Error::Internal(format!(
                "recorded cost {} but walk sums to {sum}",
                self.cost
            )));
        }
        let mut seen = vec![false; g.n()];
        for &v in &self.walk {
            *seen.get_mut(v).ok_or_else(|| Error::Internal(format!("vertex {v} out of range")))? =
                true;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Internal(format!("walk misses vertex {v}")));
        }
        Ok(())
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        json!({
            "solver": self.solver,
            "cost": g.format_length(&self.cost),
            "tour": self.walk,
            "width": self.width,
        })
    }
}

/// Closed walk using every edge of the multigraph `mult` (edge -> count)
/// exactly as often as listed, starting at `start`. Neighbours are taken
/// in increasing order so the walk is deterministic.
pub(crate) fn euler_circuit(
    n: usize,
    mult: &BTreeMap<(usize, usize), u8>,
    start: usize,
) -> Result<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut total = 0usize;
    let mut uses = Vec::new();
    for (&(u, v), &m) in mult {
        for _ in 0..m {
            let id = uses.len();
            uses.push(false);
            adj[u].push((v, id));
            adj[v].push((u, id));
            total += 1;
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        // Popped from the back, so reverse to take small neighbours first.
        a.reverse();
    }
    let mut stack = vec![start];
    let mut walk = Vec::with_capacity(total + 1);
    while let Some(&x) = stack.last() {
        let mut next = None;
        while let Some((y, id)) = adj[x].pop() {
            if !uses[id] {
                uses[id] = true;
                next = Some(y);
                break;
            }
        }
        match next {
            Some(y) => stack.push(y),
            None => {
                walk.push(x);
                stack.pop();
            }
        }
    }
    if walk.len() != total + 1 {
        return Err(Error::Internal("edge multiset is not connected".into()));
    }
    walk.reverse();
    Ok(walk)
}

/// Spanning forest of `edges` (Kruskal, cheapest first, ties by edge),
/// with non-terminal leaves pruned repeatedly.
pub(crate) fn prune_to_tree(
    g: &Graph,
    edges: impl IntoIterator<Item = (usize, usize)>,
    terminals: &[usize],
) -> Result<Vec<(usize, usize)>> {
    let mut list: Vec<(Weight, usize, usize)> = Vec::new();
    for (u, v) in edges {
        let (u, v) = (u.min(v), u.max(v));
        list.push((edge_cost(g, u, v)?.clone(), u, v));
    }
    list.sort();
    list.dedup();
    let mut uf = UnionFind::new(g.n());
    let mut tree: Vec<(usize, usize)> = list
        .into_iter()
        .filter(|(_, u, v)| uf.union(*u, *v))
        .map(|(_, u, v)| (u, v))
        .collect();
    let is_terminal = {
        let mut t = vec![false; g.n()];
        for &x in terminals {
            t[x] = true;
        }
        t
    };
    loop {
        let mut deg = vec![0usize; g.n()];
        for &(u, v) in &tree {
            deg[u] += 1;
            deg[v] += 1;
        }
        let before = tree.len();
        tree.retain(|&(u, v)| {
            !((deg[u] == 1 && !is_terminal[u]) || (deg[v] == 1 && !is_terminal[v]))
        });
        if tree.len() == before {
            break;
        }
    }
    tree.sort_unstable();
    Ok(tree)
}

pub(crate) fn check_terminals(g: &Graph, terminals: &[usize]) -> Result<()> {
    if terminals.is_empty() {
        return Err(Error::InvalidArgument("terminal set is empty".into()));
    }
    if let Some(&t) = terminals.iter().find(|&&t| t >= g.n()) {
        return Err(Error::InvalidArgument(format!("terminal {t} out of range")));
    }
    Ok(())
}

/// Every vertex of `g` must sit in some bag, and nothing else may.
pub(crate) fn check_cover(g: &Graph, ntd: &crate::treedecomp::NiceTreeDecomposition) -> Result<()> {
    let mut seen = vec![false; g.n()];
    for node in ntd.nodes() {
        for &v in &node.bag {
            *seen
                .get_mut(v)
                .ok_or_else(|| Error::InvalidArgument(format!("bag vertex {v} out of range")))? =
                true;
        }
    }
    match seen.iter().position(|s| !s) {
        Some(v) => Err(Error::InvalidArgument(format!("vertex {v} is in no bag"))),
        None => Ok(()),
    }
}
