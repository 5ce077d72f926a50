//! Constant-factor bootstrap solutions: the terminal-closure MST for
//! Steiner Tree and the shortcut doubled MST for TSP, both within a factor
//! 2 of optimal.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, DistMatrix, Graph, UnionFind, Weight};

use super::{check_terminals, prune_to_tree, SteinerSolution, TourSolution};

/// Prim on the complete graph over `points` with metric `d`; returns the
/// tree edges as index pairs into `points`.
fn closure_mst(d: &DistMatrix, points: &[usize]) -> Result<Vec<(usize, usize)>> {
    let k = points.len();
    let mut in_tree = vec![false; k];
    let mut best: Vec<Option<(Weight, usize)>> = vec![None; k];
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    if k == 0 {
        return Ok(edges);
    }
    in_tree[0] = true;
    for j in 1..k {
        best[j] = d.get(points[0], points[j]).map(|w| (w.clone(), 0));
    }
    for _ in 1..k {
        let next = (0..k)
            .filter(|&j| !in_tree[j])
            .filter_map(|j| best[j].as_ref().map(|(w, _)| (w, j)))
            .min()
            .map(|(_, j)| j)
            .ok_or(Error::Disconnected)?;
        let (_, from) = best[next].clone().expect("reachable");
        in_tree[next] = true;
        edges.push((from, next));
        for j in 0..k {
            if !in_tree[j] {
                if let Some(w) = d.get(points[next], points[j]) {
                    if best[j].as_ref().is_none_or(|(b, _)| w < b) {
                        best[j] = Some((w.clone(), next));
                    }
                }
            }
        }
    }
    Ok(edges)
}

pub fn steiner_2approx(g: &Graph, terminals: &[usize]) -> Result<SteinerSolution> {
    check_terminals(g, terminals)?;
    let d = all_pairs(g);
    let mut ts = terminals.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let mst = closure_mst(&d, &ts).map_err(|_| {
        Error::Infeasible("terminals lie in different components".into())
    })?;
    let mut union = Vec::new();
    for (a, b) in mst {
        let p = d.path(g, ts[a], ts[b]);
        union.extend(p.windows(2).map(|w| (w[0], w[1])));
    }
    let tree = prune_to_tree(g, union, &ts)?;
    SteinerSolution::from_edges(g, tree, "closure-mst")
}

pub fn tsp_2approx(g: &Graph) -> Result<TourSolution> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    if n == 1 {
        return TourSolution::from_walk(g, vec![0], "double-mst");
    }
    // Kruskal on g, then a preorder of the tree from vertex 0.
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.sort_by(|&a, &b| g.edges()[a].w.cmp(&g.edges()[b].w).then(a.cmp(&b)));
    let mut uf = UnionFind::new(n);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut used = 0;
    for e in order {
        let ed = &g.edges()[e];
        if uf.union(ed.u, ed.v) {
            adj[ed.u].push(ed.v);
            adj[ed.v].push(ed.u);
            used += 1;
        }
    }
    if used + 1 != n {
        return Err(Error::Disconnected);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut preorder = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        if seen[x] {
            continue;
        }
        seen[x] = true;
        preorder.push(x);
        for &y in adj[x].iter().rev() {
            if !seen[y] {
                stack.push(y);
            }
        }
    }
    preorder.push(0);
    let d = all_pairs(g);
    let mut walk = vec![0usize];
    for w in preorder.windows(2) {
        let p = d.path(g, w[0], w[1]);
        walk.extend_from_slice(&p[1..]);
    }
    let sol = TourSolution::from_walk(g, walk, "double-mst")?;
    debug_assert!({
        let mst: BigUint = (0..n)
            .flat_map(|x| adj[x].iter().filter(move |&&y| y > x).map(move |&y| (x, y)))
            .map(|(x, y)| g.edge_weight(x, y).cloned().unwrap_or_default())
            .sum();
        sol.cost <= mst * 2u32
    });
    Ok(sol)
}
