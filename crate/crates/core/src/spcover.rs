//! Shortest-path covers per scale and the highway-dimension-1 certifier.
//!
//! For every scale `r` the cover must hit all shortest paths whose length
//! lies in `(r, 2r]`. Such a path only uses edges of length at most `2r`,
//! so it stays inside one component of `G_{<=2r}`; with highway dimension 1
//! every such component carries at most one hub, and that hub must then lie
//! on every covered shortest path of its component. The certifier searches
//! exactly for that vertex.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{
    all_pairs, mandatory_vertices, metric_preprocess_with, threshold_components, DistMatrix,
    Graph, ScaleValue, Weight,
};
use crate::par::{self, Execution};

/// A hub set for one scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCover {
    pub scale: ScaleValue,
    pub hubs: Vec<usize>,
}

/// Hubs chosen at one critical scale, keyed by the smallest vertex id of
/// their component of `G_{<=2r}`. Components without covered pairs are
/// absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleHubs {
    pub r: ScaleValue,
    pub hubs: BTreeMap<usize, usize>,
}

impl ScaleHubs {
    pub fn hub_set(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.hubs.values().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hd1Certificate {
    pub scales: Vec<ScaleHubs>,
    #[serde(with = "opt_decimal")]
    pub min_weight: Option<Weight>,
}

impl Hd1Certificate {
    /// Hubs in force at an arbitrary scale `r`: the entry of the largest
    /// critical scale not exceeding `r` (the covered family and the
    /// components are constant between consecutive critical scales).
    pub fn hubs_at(&self, r: &ScaleValue) -> Option<&ScaleHubs> {
        let idx = self.scales.partition_point(|s| &s.r <= r);
        idx.checked_sub(1).map(|i| &self.scales[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

/// Negative result: in `component` of `G_{<=2r}` no single vertex lies on
/// every shortest path of all `pairs`, so no cover for this scale can have
/// one hub per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hd1Witness {
    pub scale: ScaleValue,
    pub component: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl Hd1Witness {
    /// Re-checks the witness from scratch against `d`.
    pub fn recheck(&self, g: &Graph, d: &DistMatrix) -> bool {
        if self.pairs.is_empty() {
            return false;
        }
        let comps = threshold_components(g, &self.scale.double());
        let rep = comps.rep(self.component[0]);
        let all_inside = self
            .pairs
            .iter()
            .all(|&(u, w)| comps.rep(u) == rep && comps.rep(w) == rep);
        let in_window = self
            .pairs
            .iter()
            .all(|&(u, w)| d.get(u, w).is_some_and(|x| self.scale.window_contains(x)));
        let common = (0..g.n()).any(|v| {
            self.pairs
                .iter()
                .all(|&(u, w)| mandatory_vertices(d, u, w).contains(&v))
        });
        all_inside && in_window && !common
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hd1Verdict {
    Certified(Hd1Certificate),
    Witness(Hd1Witness),
}

impl Hd1Verdict {
    pub fn certificate(&self) -> Option<&Hd1Certificate> {
        match self {
            Hd1Verdict::Certified(c) => Some(c),
            Hd1Verdict::Witness(_) => None,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Hd1Verdict::Certified(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScaleOutcome {
    Hubs(BTreeMap<usize, usize>),
    Failure(Hd1Witness),
}

/// Representative scales `{L/2, L}` for every distinct positive distance
/// `L`, ascending and deduplicated.
pub fn critical_scales(d: &DistMatrix) -> Vec<ScaleValue> {
    let mut out: Vec<ScaleValue> = d
        .distinct_distances()
        .iter()
        .flat_map(|l| {
            let s = ScaleValue::from_weight(l);
            [s.half(), s]
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Pairs `u < w` whose distance lies in `(r, 2r]`.
pub fn covered_pairs(d: &DistMatrix, r: &ScaleValue) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..d.n() {
        for w in (u + 1)..d.n() {
            if d.get(u, w).is_some_and(|x| r.window_contains(x)) {
                out.push((u, w));
            }
        }
    }
    out
}

fn lies_on_all(d: &DistMatrix, v: usize, u: usize, w: usize) -> bool {
    d.on_some_shortest_path(u, v, w) && &(d.paths(u, v) * d.paths(v, w)) == d.paths(u, w)
}

/// One hub per component of `G_{<=2r}` lying on every covered shortest
/// path of that component (smallest id wins), or a witness that none
/// exists. `g` must be metric.
pub fn spc1_for_scale(g: &Graph, d: &DistMatrix, r: &ScaleValue) -> ScaleOutcome {
    let comps = threshold_components(g, &r.double());
    let mut by_comp: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (u, w) in covered_pairs(d, r) {
        by_comp.entry(comps.rep(u)).or_default().push((u, w));
    }
    let mut hubs = BTreeMap::new();
    for (rep, pairs) in by_comp {
        let (u0, w0) = pairs[0];
        let mut candidates = mandatory_vertices(d, u0, w0);
        let mut blocking = vec![(u0, w0)];
        for &(u, w) in &pairs[1..] {
            let before = candidates.len();
            candidates.retain(|&v| lies_on_all(d, v, u, w));
            if candidates.len() < before {
                blocking.push((u, w));
            }
            if candidates.is_empty() {
                break;
            }
        }
        match candidates.first() {
            Some(&h) => {
                hubs.insert(rep, h);
            }
            None => {
                let component = (0..g.n()).filter(|&v| comps.rep(v) == rep).collect();
                return ScaleOutcome::Failure(Hd1Witness {
                    scale: r.clone(),
                    component,
                    pairs: blocking,
                });
            }
        }
    }
    ScaleOutcome::Hubs(hubs)
}

pub fn verify_hd1(g: &Graph) -> Hd1Verdict {
    verify_hd1_with(g, Execution::default())
}

/// Certifies highway dimension (at most) 1 or returns a witness scale.
/// Non-shortest edges are dropped first; they never change distances or
/// the components of any `G_{<=2r}`.
pub fn verify_hd1_with(g: &Graph, exec: Execution) -> Hd1Verdict {
    let d = all_pairs_exec(g, exec);
    let metric = metric_preprocess_with(g, &d);
    verify_hd1_metric(&metric, &d, exec)
}

fn all_pairs_exec(g: &Graph, exec: Execution) -> DistMatrix {
    crate::graph::all_pairs_with(g, exec)
}

/// As [`verify_hd1_with`] for a graph already known to be metric.
pub fn verify_hd1_metric(g: &Graph, d: &DistMatrix, exec: Execution) -> Hd1Verdict {
    let scales = critical_scales(d);
    let outcomes = par::map(exec, &scales, |r| spc1_for_scale(g, d, r));
    let mut cert = Vec::with_capacity(scales.len());
    for (r, out) in scales.into_iter().zip(outcomes) {
        match out {
            ScaleOutcome::Hubs(hubs) => cert.push(ScaleHubs { r, hubs }),
            ScaleOutcome::Failure(w) => return Hd1Verdict::Witness(w),
        }
    }
    Hd1Verdict::Certified(Hd1Certificate {
        scales: cert,
        min_weight: g.min_weight().cloned(),
    })
}

/// Some shortest `u`-`w` path avoiding every vertex flagged in `blocked`.
pub fn hub_free_path_exists(
    g: &Graph,
    d: &DistMatrix,
    u: usize,
    w: usize,
    blocked: &[bool],
) -> bool {
    if blocked[u] || blocked[w] {
        return false;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![u];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        if x == w {
            return true;
        }
        let dx = d.d(u, x);
        for (y, e) in g.neighbors(x) {
            let y = *y;
            if seen[y] || blocked[y] || !d.on_some_shortest_path(u, y, w) {
                continue;
            }
            if d.d(u, y) == &(dx + &g.edges()[*e].w) {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

/// `hubs` hits every shortest path with length in `(r, 2r]` and every ball
/// `B_v(2r)` holds at most `h` of them.
pub fn verify_spc(g: &Graph, r: &ScaleValue, hubs: &[usize], h: usize) -> bool {
    let d = all_pairs(g);
    verify_spc_with(g, &d, r, hubs, h)
}

pub fn verify_spc_with(
    g: &Graph,
    d: &DistMatrix,
    r: &ScaleValue,
    hubs: &[usize],
    h: usize,
) -> bool {
    let mut blocked = vec![false; g.n()];
    for &x in hubs {
        blocked[x] = true;
    }
    let hits = covered_pairs(d, r)
        .into_iter()
        .all(|(u, w)| !hub_free_path_exists(g, d, u, w, &blocked));
    if !hits {
        return false;
    }
    let radius = r.double();
    (0..g.n()).all(|v| {
        hubs.iter()
            .filter(|&&x| d.get(v, x).is_some_and(|dx| radius.admits(dx)))
            .count()
            <= h
    })
}

mod opt_decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|x| x.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}
