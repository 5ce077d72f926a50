//! Tree decompositions: the level-hierarchy construction, projection through
//! a net, validation, and conversion to nice form for the DP solvers.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_pairs_with, metric_preprocess_with, Graph};
use crate::par::Execution;
use crate::spcover::{verify_hd1_metric, Hd1Verdict};
use crate::structure::{build_hierarchy_with, ComponentId, LevelHierarchy};

/// Rooted tree of bags. Bags are sorted vertex lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    root: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Violations {
    /// Vertices in no bag.
    pub uncovered: Vec<usize>,
    /// Edges with no bag holding both endpoints.
    pub split_edges: Vec<(usize, usize)>,
    /// Vertices whose bags are not a connected subtree.
    pub disconnected: Vec<usize>,
    /// Bag entries that are not vertices of the graph.
    pub foreign: Vec<usize>,
}

impl Violations {
    pub fn is_valid(&self) -> bool {
        self.uncovered.is_empty()
            && self.split_edges.is_empty()
            && self.disconnected.is_empty()
            && self.foreign.is_empty()
    }
}

impl TreeDecomposition {
    /// `parent[root]` must be `None` and every other node must reach it.
    pub fn new(bags: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Result<Self> {
        if bags.is_empty() || bags.len() != parent.len() {
            return Err(Error::InvalidArgument("malformed decomposition".into()));
        }
        let roots: Vec<usize> = (0..parent.len()).filter(|&i| parent[i].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::InvalidArgument(format!(
                "decomposition needs one root, found {}",
                roots.len()
            )));
        };
        for start in 0..parent.len() {
            let mut x = start;
            let mut steps = 0;
            while let Some(p) = parent[x] {
                if p >= parent.len() || steps > parent.len() {
                    return Err(Error::InvalidArgument("parent links are not a tree".into()));
                }
                x = p;
                steps += 1;
            }
        }
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        Ok(TreeDecomposition { bags, parent, root })
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn bag(&self, i: usize) -> &[usize] {
        &self.bags[i]
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Largest bag size minus one (0 for all-empty bags).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn max_bag(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Children before parents.
    pub fn postorder(&self) -> Vec<usize> {
        let ch = self.children();
        let mut out = Vec::with_capacity(self.bags.len());
        let mut stack = vec![(self.root, false)];
        while let Some((x, expanded)) = stack.pop() {
            if expanded {
                out.push(x);
            } else {
                stack.push((x, true));
                for &c in ch[x].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Replaces every vertex `v` by `map[v]`.
    pub fn map_bags(&self, map: &[usize]) -> TreeDecomposition {
        let bags = self
            .bags
            .iter()
            .map(|b| {
                let s: BTreeSet<usize> = b.iter().map(|&v| map[v]).collect();
                s.into_iter().collect()
            })
            .collect();
        TreeDecomposition {
            bags,
            parent: self.parent.clone(),
            root: self.root,
        }
    }

    /// Drops every vertex not flagged in `keep` from all bags, then renames
    /// the survivors through `rename`.
    pub fn restrict(&self, keep: &[bool], rename: &[usize]) -> TreeDecomposition {
        let bags = self
            .bags
            .iter()
            .map(|b| b.iter().filter(|&&v| keep[v]).map(|&v| rename[v]).collect())
            .collect();
        TreeDecomposition {
            bags,
            parent: self.parent.clone(),
            root: self.root,
        }
    }

    /// Contracts every tree edge whose endpoints carry equal bags, and every
    /// node whose bag is contained in its parent's and has no children.
    pub fn compress(&self) -> TreeDecomposition {
        let n = self.bags.len();
        let mut alias: Vec<usize> = (0..n).collect();
        let ch = self.children();
        // Top-down, so a node's alias is final before its children look.
        let mut order = self.postorder();
        order.reverse();
        for &x in &order {
            if let Some(p) = self.parent[x] {
                let pa = alias[p];
                let subset = self.bags[x].iter().all(|v| self.bags[pa].binary_search(v).is_ok());
                if self.bags[x] == self.bags[pa] || (subset && ch[x].is_empty()) {
                    alias[x] = pa;
                }
            }
        }
        let mut new_id = vec![usize::MAX; n];
        let mut bags = Vec::new();
        for x in 0..n {
            if alias[x] == x {
                new_id[x] = bags.len();
                bags.push(self.bags[x].clone());
            }
        }
        let mut parent = vec![None; bags.len()];
        for x in 0..n {
            if alias[x] == x {
                if let Some(p) = self.parent[x] {
                    parent[new_id[x]] = Some(new_id[alias[p]]);
                }
            }
        }
        TreeDecomposition {
            bags,
            parent,
            root: new_id[alias[self.root]],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = (0..self.bags.len())
            .map(|i| serde_json::json!({ "id": i, "parent": self.parent[i], "bag": self.bags[i] }))
            .collect();
        serde_json::json!({ "root": self.root, "width": self.width(), "nodes": nodes })
    }
}

/// Checks the cover, edge and connectivity properties.
pub fn validate_decomposition(g: &Graph, td: &TreeDecomposition) -> Violations {
    let n = g.n();
    let mut v = Violations::default();
    let mut seen = vec![false; n];
    // A vertex's nodes form a subtree iff exactly one of them has a parent
    // lacking the vertex.
    let mut tops = vec![0usize; n];
    for (i, bag) in td.bags.iter().enumerate() {
        for &x in bag {
            if x >= n {
                v.foreign.push(x);
                continue;
            }
            seen[x] = true;
            let parent_has = td.parent[i].is_some_and(|p| td.bags[p].binary_search(&x).is_ok());
            if !parent_has {
                tops[x] += 1;
            }
        }
    }
    v.foreign.sort_unstable();
    v.foreign.dedup();
    v.uncovered = (0..n).filter(|&x| !seen[x]).collect();
    v.disconnected = (0..n).filter(|&x| tops[x] > 1).collect();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, bag) in td.bags.iter().enumerate() {
        for &x in bag {
            if x < n {
                holders[x].push(i);
            }
        }
    }
    for e in g.edges() {
        let shared = holders[e.u]
            .iter()
            .any(|&i| td.bags[i].binary_search(&e.v).is_ok());
        if !shared {
            v.split_edges.push((e.u, e.v));
        }
    }
    v
}

/// One node per level-`i` component, linked to the enclosing level-`i+1`
/// component; bags are interface points, plus the vertex itself at level 0.
pub fn build_decomposition(g: &Graph, h: &LevelHierarchy) -> Result<TreeDecomposition> {
    let comps = h.all_components();
    let index = |c: &ComponentId| comps.binary_search(c).expect("known component");
    let mut bags = Vec::with_capacity(comps.len());
    let mut parent = Vec::with_capacity(comps.len());
    for c in &comps {
        let mut bag = h.interface_points(*c)?.vertices();
        if c.level == 0 {
            bag.push(c.rep);
        }
        bags.push(bag);
        parent.push(h.parent(*c).map(|p| index(&p)));
    }
    let td = TreeDecomposition::new(bags, parent)?.compress();
    let report = validate_decomposition(g, &td);
    if !report.is_valid() {
        return Err(Error::Internal(format!(
            "hierarchy decomposition is invalid: {report:?}"
        )));
    }
    Ok(td)
}

/// Metric version of `g` with its hierarchy decomposition; fails with
/// `NotCertified` unless `g` has highway dimension 1.
pub fn certified_decomposition(g: &Graph, exec: Execution) -> Result<(Graph, TreeDecomposition)> {
    let d = all_pairs_with(g, exec);
    if !d.is_connected() {
        return Err(Error::Disconnected);
    }
    let gm = metric_preprocess_with(g, &d);
    let cert = match verify_hd1_metric(&gm, &d, exec) {
        Hd1Verdict::Certified(c) => c,
        Hd1Verdict::Witness(w) => return Err(Error::NotCertified(w.scale.to_string())),
    };
    let h = build_hierarchy_with(&gm, &d, &cert)?;
    let td = build_decomposition(&gm, &h)?;
    Ok((gm, td))
}

/// Replaces every bag `X` by `{eta(v) : v in X}`; `eta` maps original
/// vertices to quotient indices.
pub fn project_decomposition(td: &TreeDecomposition, eta: &[usize]) -> TreeDecomposition {
    td.map_bags(eta)
}

/// Greedy min-degree elimination. Used for graphs outside the certified
/// class (hardness instances, tests); no width guarantee.
pub fn min_degree_decomposition(g: &Graph) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition {
            bags: vec![Vec::new()],
            parent: vec![None],
            root: 0,
        };
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in g.edges() {
        adj[e.u].insert(e.v);
        adj[e.v].insert(e.u);
    }
    let mut eliminated = vec![false; n];
    let mut position = vec![0usize; n];
    let mut bags = Vec::with_capacity(n);
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        let v = (0..n)
            .filter(|&x| !eliminated[x])
            .min_by_key(|&x| (adj[x].len(), x))
            .expect("vertices remain");
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
            adj[a].remove(&v);
        }
        let mut bag = nb.clone();
        bag.push(v);
        bags.push(bag);
        eliminated[v] = true;
        position[v] = step;
        order.push((v, nb));
    }
    let mut parent: Vec<Option<usize>> = order
        .iter()
        .map(|(_, nb)| nb.iter().map(|&u| position[u]).min())
        .collect();
    let root = n - 1;
    for (i, p) in parent.iter_mut().enumerate() {
        if p.is_none() && i != root {
            *p = Some(root);
        }
    }
    TreeDecomposition::new(bags, parent)
        .expect("elimination tree")
        .compress()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NiceKind {
    Leaf,
    Introduce(usize),
    Forget(usize),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceNode {
    pub kind: NiceKind,
    pub bag: Vec<usize>,
    pub children: Vec<usize>,
}

/// Nice decomposition; nodes are stored children-first, the root is last
/// and has an empty bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|x| x.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Every node's bag delta matches its kind.
    pub fn is_well_formed(&self) -> bool {
        let root_ok = self.nodes.last().is_some_and(|r| r.bag.is_empty());
        root_ok
            && self.nodes.iter().enumerate().all(|(i, x)| {
                let kids_before = x.children.iter().all(|&c| c < i);
                let child = |k: usize| &self.nodes[x.children[k]].bag;
                let delta_ok = match x.kind {
                    NiceKind::Leaf => x.children.is_empty() && x.bag.is_empty(),
                    NiceKind::Introduce(v) => {
                        x.children.len() == 1 && !child(0).contains(&v) && {
                            let mut b = child(0).clone();
                            b.push(v);
                            b.sort_unstable();
                            b == x.bag
                        }
                    }
                    NiceKind::Forget(v) => {
                        x.children.len() == 1 && child(0).contains(&v) && {
                            let b: Vec<usize> =
                                child(0).iter().copied().filter(|&u| u != v).collect();
                            b == x.bag
                        }
                    }
                    NiceKind::Join => {
                        x.children.len() == 2 && *child(0) == x.bag && *child(1) == x.bag
                    }
                };
                kids_before && delta_ok
            })
    }

    pub fn to_decomposition(&self) -> TreeDecomposition {
        let mut parent = vec![None; self.nodes.len()];
        for (i, x) in self.nodes.iter().enumerate() {
            for &c in &x.children {
                parent[c] = Some(i);
            }
        }
        TreeDecomposition {
            bags: self.nodes.iter().map(|x| x.bag.clone()).collect(),
            parent,
            root: self.root(),
        }
    }

    fn push(&mut self, kind: NiceKind, bag: Vec<usize>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            kind,
            bag,
            children,
        });
        self.nodes.len() - 1
    }

    /// From node `from` (bag `cur`), forget what `target` lacks and
    /// introduce what it adds.
    fn morph(&mut self, mut from: usize, target: &[usize]) -> usize {
        let cur = self.nodes[from].bag.clone();
        let mut bag = cur.clone();
        for &v in cur.iter().filter(|v| target.binary_search(v).is_err()) {
            bag.retain(|&u| u != v);
            from = self.push(NiceKind::Forget(v), bag.clone(), vec![from]);
        }
        for &v in target.iter().filter(|v| cur.binary_search(v).is_err()) {
            let pos = bag.binary_search(&v).unwrap_err();
            bag.insert(pos, v);
            from = self.push(NiceKind::Introduce(v), bag.clone(), vec![from]);
        }
        from
    }
}

/// Converts a decomposition to nice form; width and validity carry over.
pub fn make_nice(td: &TreeDecomposition) -> NiceTreeDecomposition {
    let ch = td.children();
    let mut nice = NiceTreeDecomposition { nodes: Vec::new() };
    let mut top = vec![usize::MAX; td.len()];
    for x in td.postorder() {
        let target = &td.bags[x];
        let node = if ch[x].is_empty() {
            let leaf = nice.push(NiceKind::Leaf, Vec::new(), Vec::new());
            nice.morph(leaf, target)
        } else {
            let mut branches = ch[x].iter().map(|&c| nice.morph(top[c], target));
            let first = branches.next().expect("nonempty");
            let rest: Vec<usize> = branches.collect();
            rest.into_iter().fold(first, |acc, b| {
                nice.push(NiceKind::Join, target.clone(), vec![acc, b])
            })
        };
        top[x] = node;
    }
    let root = top[td.root];
    let last = nice.morph(root, &[]);
    if last == root && nice.nodes[last].kind != NiceKind::Leaf {
        debug_assert!(nice.nodes[last].bag.is_empty());
    }
    // Ensure the root is the final node.
    debug_assert_eq!(last, nice.nodes.len() - 1);
    nice
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spcover::verify_hd1;
    use crate::structure::build_hierarchy;

    #[test]
    fn single_bag_is_valid() {
        let g = Graph::from_u64(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let td = TreeDecomposition::new(vec![vec![0, 1, 2]], vec![None]).unwrap();
        assert!(validate_decomposition(&g, &td).is_valid());
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn split_edge_is_reported() {
        let g = Graph::from_u64(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let td = TreeDecomposition::new(vec![vec![0, 1], vec![1, 2]], vec![None, Some(0)]).unwrap();
        let v = validate_decomposition(&g, &td);
        assert_eq!(v.split_edges, vec![(0, 2)]);
        assert!(v.uncovered.is_empty() && v.disconnected.is_empty());
    }

    #[test]
    fn broken_subtree_is_reported() {
        let g = Graph::from_u64(3, &[(0, 1, 1), (1, 2, 1)]).unwrap();
        let td = TreeDecomposition::new(
            vec![vec![0, 1], vec![2], vec![0, 1, 2]],
            vec![None, Some(0), Some(1)],
        )
        .unwrap();
        let v = validate_decomposition(&g, &td);
        assert_eq!(v.disconnected, vec![0, 1]);
    }

    #[test]
    fn rejects_forest() {
        assert!(TreeDecomposition::new(vec![vec![0], vec![1]], vec![None, None]).is_err());
    }

    #[test]
    fn nice_single_bag_chain() {
        let td = TreeDecomposition::new(vec![vec![0, 1]], vec![None]).unwrap();
        let nice = make_nice(&td);
        let kinds: Vec<NiceKind> = nice.nodes().iter().map(|x| x.kind).collect();
        assert_eq!(
            kinds,
            [
                NiceKind::Leaf,
                NiceKind::Introduce(0),
                NiceKind::Introduce(1),
                NiceKind::Forget(0),
                NiceKind::Forget(1)
            ]
        );
        assert!(nice.is_well_formed());
        assert_eq!(nice.width(), 1);
    }

    #[test]
    fn nice_joins_have_equal_bags() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3)]).unwrap();
        let td = min_degree_decomposition(&g);
        let nice = make_nice(&td);
        assert!(nice.is_well_formed());
        assert_eq!(nice.width(), td.width());
        assert!(validate_decomposition(&g, &nice.to_decomposition()).is_valid());
    }

    #[test]
    fn star_hierarchy_decomposition() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3)]).unwrap();
        let cert = verify_hd1(&g).certificate().cloned().unwrap();
        let h = build_hierarchy(&g, &cert).unwrap();
        let td = build_decomposition(&g, &h).unwrap();
        assert!(validate_decomposition(&g, &td).is_valid());
        assert!(td.width() <= 2);
        for leaf in 1..5 {
            assert!(td.bags().iter().any(|b| b == &vec![0, leaf]));
        }
    }

    #[test]
    fn min_degree_handles_disconnected_graphs() {
        let g = Graph::from_u64(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let td = min_degree_decomposition(&g);
        assert!(validate_decomposition(&g, &td).is_valid());
        assert_eq!(td.width(), 1);
    }
}
