//! Exact-weight undirected graphs, all-pairs shortest paths with path
//! counting, and the metric queries every other module builds on.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Edge lengths and distances. Arbitrary precision, never rounded.
pub type Weight = BigUint;

/// A positive rational scale `r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScaleValue(Ratio<BigUint>);

impl ScaleValue {
    pub fn new(numer: BigUint, denom: BigUint) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::InvalidArgument("scale denominator is zero".into()));
        }
        if numer.is_zero() {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        Ok(ScaleValue(Ratio::new(numer, denom)))
    }

    pub fn from_weight(w: &Weight) -> Self {
        ScaleValue(Ratio::from_integer(w.clone()))
    }

    pub fn from_ratio(r: Ratio<BigUint>) -> Self {
        ScaleValue(r)
    }

    pub fn ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn half(&self) -> Self {
        ScaleValue(&self.0 / BigUint::from(2u32))
    }

    pub fn double(&self) -> Self {
        ScaleValue(&self.0 * BigUint::from(2u32))
    }

    pub fn times_pow2(&self, k: u64) -> Self {
        ScaleValue(&self.0 * (BigUint::one() << k))
    }

    /// Compares this scale against an integer weight.
    pub fn cmp_weight(&self, w: &Weight) -> Ordering {
        self.numer().cmp(&(w * self.denom()))
    }

    /// `w <= self`
    pub fn admits(&self, w: &Weight) -> bool {
        self.cmp_weight(w) != Ordering::Less
    }

    /// `self < w <= 2*self`, the length window of this scale's path family.
    pub fn window_contains(&self, w: &Weight) -> bool {
        self.cmp_weight(w) == Ordering::Less && self.double().admits(w)
    }
}

impl fmt::Display for ScaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for ScaleValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = parse_fraction(s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("bad rational `{s}`")))?;
        ScaleValue::new(n, d)
    }
}

impl Serialize for ScaleValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.numer(), self.denom()))
    }
}

impl<'de> Deserialize<'de> for ScaleValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_fraction(s: &str) -> Option<(BigUint, BigUint)> {
    match s.split_once('/') {
        Some((p, q)) => Some((p.parse().ok()?, q.parse().ok()?)),
        None => Some((s.parse().ok()?, BigUint::one())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: Weight,
}

/// Simple undirected graph on vertices `0..n` with positive integer weights.
///
/// `unit` records the common denominator applied when the graph was read
/// from fractional input: true lengths are `w / unit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    terminals: Vec<usize>,
    labels: Option<Vec<String>>,
    unit: BigUint,
}

impl Graph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Weight)>,
    {
        let mut list: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge {a}-{b} out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if w.is_zero() {
                return Err(Error::InvalidGraph(format!("edge {a}-{b} has weight 0")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { u, v, w });
        }
        list.sort_by_key(|x| (x.u, x.v));
        if let Some(p) = list.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(Error::InvalidGraph(format!(
                "parallel edges {}-{}",
                p[0].u, p[0].v
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (i, e) in list.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list,
            adj,
            terminals: Vec::new(),
            labels: None,
            unit: BigUint::one(),
        })
    }

    /// Convenience constructor for small literal weights.
    pub fn from_u64(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        Graph::new(n, edges.iter().map(|&(u, v, w)| (u, v, BigUint::from(w))))
    }

    pub fn with_terminals(mut self, terminals: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = terminals.into_iter().collect();
        if let Some(&t) = set.iter().find(|&&t| t >= self.n) {
            return Err(Error::InvalidGraph(format!("terminal {t} out of range")));
        }
        self.terminals = set.into_iter().collect();
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph("label count differs from n".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_unit(mut self, unit: BigUint) -> Self {
        self.unit = unit;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `v` with the index of the connecting edge, by id.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<&Weight> {
        self.adj[u]
            .binary_search_by(|&(x, _)| x.cmp(&v))
            .ok()
            .map(|i| &self.edges[self.adj[u][i].1].w)
    }

    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.binary_search(&v).is_ok()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn min_weight(&self) -> Option<&Weight> {
        self.edges.iter().map(|e| &e.w).min()
    }

    pub fn total_weight(&self) -> Weight {
        self.edges.iter().map(|e| &e.w).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    /// Induced subgraph on `keep` (any order); vertex `i` of the result is
    /// `keep_sorted[i]`, which is returned alongside.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in kept.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
            .map(|e| (index[e.u], index[e.v], e.w.clone()));
        let mut g = Graph::new(kept.len(), edges).expect("subgraph of a simple graph");
        g.terminals = self
            .terminals
            .iter()
            .filter(|&&t| index[t] != usize::MAX)
            .map(|&t| index[t])
            .collect();
        g.labels = self
            .labels
            .as_ref()
            .map(|l| kept.iter().map(|&v| l[v].clone()).collect());
        g.unit = self.unit.clone();
        (g, kept)
    }

    /// Parses the line-oriented graph text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut raw: Vec<(usize, usize, BigUint, BigUint, usize)> = Vec::new();
        let mut terminals = Vec::new();
        let mut labels: BTreeMap<usize, String> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            match tag {
                "p" => {
                    if header.is_some() {
                        return Err(err("duplicate header"));
                    }
                    if parts.next() != Some("graph") {
                        return Err(err("expected `p graph <n> <m>`"));
                    }
                    let n = parts.next().and_then(|s| s.parse().ok());
                    let m = parts.next().and_then(|s| s.parse().ok());
                    match (n, m, parts.next()) {
                        (Some(n), Some(m), None) => header = Some((n, m)),
                        _ => return Err(err("expected `p graph <n> <m>`")),
                    }
                }
                "e" => {
                    let (n, _) = header.ok_or_else(|| err("edge before header"))?;
                    let u: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad endpoint"))?;
                    let v: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad endpoint"))?;
                    let (p, q) = parts
                        .next()
                        .and_then(parse_fraction)
                        .ok_or_else(|| err("bad weight"))?;
                    if parts.next().is_some() {
                        return Err(err("trailing tokens"));
                    }
                    if u >= n || v >= n {
                        return Err(err("vertex id out of range"));
                    }
                    if q.is_zero() {
                        return Err(err("zero denominator"));
                    }
                    if p.is_zero() {
                        return Err(err("edge weights must be positive"));
                    }
                    raw.push((u, v, p, q, lineno));
                }
                "t" => {
                    let (n, _) = header.ok_or_else(|| err("terminal before header"))?;
                    let v: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad terminal"))?;
                    if v >= n || parts.next().is_some() {
                        return Err(err("bad terminal"));
                    }
                    terminals.push(v);
                }
                "l" => {
                    let (n, _) = header.ok_or_else(|| err("label before header"))?;
                    let v: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err("bad label"))?;
                    let name: Vec<&str> = parts.collect();
                    if v >= n || name.is_empty() {
                        return Err(err("bad label"));
                    }
                    labels.insert(v, name.join(" "));
                }
                _ => return Err(err("unknown record")),
            }
        }
        let (n, m) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        if raw.len() != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declares {m} edges, found {}", raw.len()),
            });
        }
        let unit = raw
            .iter()
            .map(|(_, _, p, q, _)| q / p.gcd(q))
            .fold(BigUint::one(), |acc, q| acc.lcm(&q));
        let edges = raw.into_iter().map(|(u, v, p, q, _)| {
            let w = p * (&unit / &q);
            (u, v, w)
        });
        let mut g = Graph::new(n, edges)?.with_terminals(terminals)?.with_unit(unit);
        if !labels.is_empty() {
            let all = (0..n)
                .map(|v| labels.get(&v).cloned().unwrap_or_else(|| v.to_string()))
                .collect();
            g = g.with_labels(all)?;
        }
        Ok(g)
    }

    /// Serialises to the text format; `parse(to_text(g)) == g`.
    pub fn to_text(&self) -> String {
        let mut out = format!("p graph {} {}\n", self.n, self.edges.len());
        for e in &self.edges {
            out.push_str(&format!("e {} {} {}\n", e.u, e.v, self.format_length(&e.w)));
        }
        for t in &self.terminals {
            out.push_str(&format!("t {t}\n"));
        }
        if let Some(labels) = &self.labels {
            for (v, l) in labels.iter().enumerate() {
                out.push_str(&format!("l {v} {l}\n"));
            }
        }
        out
    }

    /// Renders an internal length in input units (`p/q` when fractional).
    pub fn format_length(&self, w: &Weight) -> String {
        if self.unit.is_one() {
            return w.to_string();
        }
        let r = Ratio::new(w.clone(), self.unit.clone());
        if r.denom().is_one() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }
}

/// Pairwise distances and exact shortest-path counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistMatrix {
    n: usize,
    dist: Vec<Option<Weight>>,
    count: Vec<BigUint>,
}

impl DistMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `None` when `v` is unreachable from `u`.
    pub fn get(&self, u: usize, v: usize) -> Option<&Weight> {
        self.dist[u * self.n + v].as_ref()
    }

    /// Distance, assuming `u` and `v` are connected.
    pub fn d(&self, u: usize, v: usize) -> &Weight {
        self.get(u, v).expect("distance between disconnected vertices")
    }

    /// Number of distinct shortest `u`-`v` paths (0 when disconnected).
    pub fn paths(&self, u: usize, v: usize) -> &BigUint {
        &self.count[u * self.n + v]
    }

    pub fn is_connected(&self) -> bool {
        self.dist.iter().all(Option::is_some)
    }

    /// `x` lies on some shortest `u`-`v` path.
    pub fn on_some_shortest_path(&self, u: usize, x: usize, v: usize) -> bool {
        match (self.get(u, x), self.get(x, v), self.get(u, v)) {
            (Some(a), Some(b), Some(c)) => &(a + b) == c,
            _ => false,
        }
    }

    /// Distinct positive distances in increasing order.
    pub fn distinct_distances(&self) -> Vec<Weight> {
        let mut set = BTreeSet::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if let Some(d) = self.get(u, v) {
                    set.insert(d.clone());
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn max_distance(&self) -> Option<&Weight> {
        self.dist.iter().flatten().max()
    }

    /// One shortest `s`-`t` path in `g` (from `s` to `t`), built backwards
    /// from `t` through the smallest admissible predecessor.
    pub fn path(&self, g: &Graph, s: usize, t: usize) -> Vec<usize> {
        let mut out = vec![t];
        let mut x = t;
        while x != s {
            let dx = self.d(s, x);
            let p = g
                .neighbors(x)
                .iter()
                .filter(|&&(p, e)| {
                    self.get(s, p)
                        .is_some_and(|dp| &(dp + &g.edges()[e].w) == dx)
                })
                .map(|&(p, _)| p)
                .min()
                .expect("shortest-path predecessor exists");
            out.push(p);
            x = p;
        }
        out.reverse();
        out
    }

    /// Ball `B_v(radius)`: vertices within `radius` of `v`.
    pub fn ball(&self, v: usize, radius: &ScaleValue) -> Vec<usize> {
        (0..self.n)
            .filter(|&x| self.get(v, x).is_some_and(|d| radius.admits(d)))
            .collect()
    }
}

pub fn all_pairs(g: &Graph) -> DistMatrix {
    all_pairs_with(g, Execution::default())
}

/// Dijkstra from every source, counting shortest paths exactly.
pub fn all_pairs_with(g: &Graph, exec: Execution) -> DistMatrix {
    let n = g.n();
    let rows = par::map_range(exec, n, |s| single_source(g, s));
    let mut dist = Vec::with_capacity(n * n);
    let mut count = Vec::with_capacity(n * n);
    for (d, c) in rows {
        dist.extend(d);
        count.extend(c);
    }
    DistMatrix { n, dist, count }
}

/// Distances from `s` plus shortest-path counts.
pub fn single_source(g: &Graph, s: usize) -> (Vec<Option<Weight>>, Vec<BigUint>) {
    let n = g.n();
    let mut dist: Vec<Option<Weight>> = vec![None; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[s] = Some(BigUint::zero());
    heap.push(Reverse((BigUint::zero(), s)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &(u, e) in g.neighbors(v) {
            if done[u] {
                continue;
            }
            let nd = &d + &g.edges()[e].w;
            if dist[u].as_ref().is_none_or(|old| nd < *old) {
                dist[u] = Some(nd.clone());
                heap.push(Reverse((nd, u)));
            }
        }
    }
    // Positive weights: every predecessor on a shortest path settles first.
    let mut count = vec![BigUint::zero(); n];
    count[s] = BigUint::one();
    for &v in order.iter().skip(1) {
        let dv = dist[v].as_ref().expect("settled");
        let mut c = BigUint::zero();
        for &(u, e) in g.neighbors(v) {
            if let Some(du) = &dist[u] {
                if &(du + &g.edges()[e].w) == dv {
                    c += &count[u];
                }
            }
        }
        count[v] = c;
    }
    (dist, count)
}

/// Drops every edge longer than the distance between its endpoints.
pub fn metric_preprocess(g: &Graph) -> Graph {
    let d = all_pairs(g);
    metric_preprocess_with(g, &d)
}

pub fn metric_preprocess_with(g: &Graph, d: &DistMatrix) -> Graph {
    let edges = g
        .edges()
        .iter()
        .filter(|e| d.get(e.u, e.v) == Some(&e.w))
        .map(|e| (e.u, e.v, e.w.clone()));
    let mut out = Graph::new(g.n(), edges).expect("subset of a simple graph");
    out.terminals = g.terminals.clone();
    out.labels = g.labels.clone();
    out.unit = g.unit.clone();
    out
}

pub fn is_metric(g: &Graph, d: &DistMatrix) -> bool {
    g.edges().iter().all(|e| d.get(e.u, e.v) == Some(&e.w))
}

/// Vertices on every shortest `u`-`w` path, ascending.
pub fn mandatory_vertices(d: &DistMatrix, u: usize, w: usize) -> Vec<usize> {
    let total = d.paths(u, w);
    (0..d.n())
        .filter(|&v| d.on_some_shortest_path(u, v, w) && &(d.paths(u, v) * d.paths(v, w)) == total)
        .collect()
}

/// Max pairwise distance over min pairwise distance.
pub fn aspect_ratio(d: &DistMatrix) -> Result<ScaleValue> {
    if d.n() < 2 {
        return Err(Error::InvalidArgument(
            "aspect ratio needs at least two vertices".into(),
        ));
    }
    if !d.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut lo: Option<&Weight> = None;
    let mut hi: Option<&Weight> = None;
    for u in 0..d.n() {
        for v in (u + 1)..d.n() {
            let x = d.d(u, v);
            if lo.is_none_or(|l| x < l) {
                lo = Some(x);
            }
            if hi.is_none_or(|h| x > h) {
                hi = Some(x);
            }
        }
    }
    ScaleValue::new(hi.unwrap().clone(), lo.unwrap().clone())
}

/// Partition of the vertex set; each vertex maps to the smallest id in its
/// block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    rep: Vec<usize>,
}

impl Partition {
    pub fn from_reps(rep: Vec<usize>) -> Self {
        Partition { rep }
    }

    pub fn rep(&self, v: usize) -> usize {
        self.rep[v]
    }

    pub fn reps(&self) -> &[usize] {
        &self.rep
    }

    /// Blocks keyed by representative, members ascending.
    pub fn blocks(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &r) in self.rep.iter().enumerate() {
            out.entry(r).or_default().push(v);
        }
        out
    }

    pub fn block_count(&self) -> usize {
        self.rep.iter().enumerate().filter(|&(v, &r)| v == r).count()
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.rep.len() == coarser.rep.len()
            && (0..self.rep.len()).all(|v| coarser.rep(v) == coarser.rep(self.rep(v)))
    }
}

/// Union-find with path halving; the root of a set is its smallest element.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn into_partition(mut self) -> Partition {
        let rep = (0..self.parent.len()).map(|v| self.find(v)).collect();
        Partition { rep }
    }
}

/// Components of the subgraph keeping edges of length at most `t`.
pub fn threshold_components(g: &Graph, t: &ScaleValue) -> Partition {
    let mut uf = UnionFind::new(g.n());
    for e in g.edges() {
        if t.admits(&e.w) {
            uf.union(e.u, e.v);
        }
    }
    uf.into_partition()
}
