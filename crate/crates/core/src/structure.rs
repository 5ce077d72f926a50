//! Level-component hierarchy, interface points, nets and quotient graphs.
//!
//! Radii are `r_i = (w_min / 3) * 2^i`, so level 0 has no edges and every
//! level-0 component is a single vertex. The top level
//! `1 + ceil(log2 alpha)` is a single component for connected input.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    all_pairs, aspect_ratio, is_metric, threshold_components, DistMatrix, Graph, Partition,
    ScaleValue, Weight,
};
use crate::spcover::Hd1Certificate;

/// Hard cap on the number of levels.
pub const MAX_LEVELS: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct LevelHierarchy {
    base_unit: Option<ScaleValue>,
    levels: Vec<Partition>,
    hubs: Vec<BTreeMap<usize, usize>>,
    dist: DistMatrix,
}

/// A level-`i` component, named by its level and smallest vertex id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ComponentId {
    pub level: usize,
    pub rep: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterfacePoint {
    pub level: usize,
    pub hub: usize,
    #[serde(serialize_with = "ser_decimal")]
    pub dist: Weight,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterfaceSet {
    pub component: ComponentId,
    pub points: Vec<InterfacePoint>,
}

impl InterfaceSet {
    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.points.iter().map(|p| p.hub).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// `ceil(log2(x))` for a rational `x >= 1`.
pub fn ceil_log2(x: &ScaleValue) -> u64 {
    let (p, q) = (x.numer(), x.denom());
    let mut k = 0u64;
    let mut qq = q.clone();
    while &qq < p {
        qq <<= 1;
        k += 1;
    }
    k
}

/// Builds the hierarchy of a connected metric graph from its certificate.
pub fn build_hierarchy(g: &Graph, cert: &Hd1Certificate) -> Result<LevelHierarchy> {
    let d = all_pairs(g);
    build_hierarchy_with(g, &d, cert)
}

pub fn build_hierarchy_with(
    g: &Graph,
    d: &DistMatrix,
    cert: &Hd1Certificate,
) -> Result<LevelHierarchy> {
    if !d.is_connected() {
        return Err(Error::Disconnected);
    }
    if !is_metric(g, d) {
        return Err(Error::InvalidArgument(
            "hierarchy needs a metric graph (run metric preprocessing first)".into(),
        ));
    }
    if g.n() <= 1 {
        return Ok(LevelHierarchy {
            base_unit: None,
            levels: vec![Partition::from_reps((0..g.n()).collect())],
            hubs: vec![BTreeMap::new()],
            dist: d.clone(),
        });
    }
    let w_min = g.min_weight().expect("connected with n >= 2");
    let alpha = aspect_ratio(d)?;
    let l_max = 1 + ceil_log2(&alpha) as usize;
    if l_max + 1 > MAX_LEVELS {
        return Err(Error::CapExceeded {
            what: "hierarchy levels",
            cap: MAX_LEVELS,
            actual: l_max + 1,
        });
    }
    let base = ScaleValue::new(w_min.clone(), BigUint::from(3u32))?;
    let mut levels = Vec::with_capacity(l_max + 1);
    let mut hubs = Vec::with_capacity(l_max + 1);
    for i in 0..=l_max {
        let r = base.times_pow2(i as u64);
        let part = threshold_components(g, &r.double());
        let level_hubs = cert.hubs_at(&r).map(|s| s.hubs.clone()).unwrap_or_default();
        for (&rep, &hub) in &level_hubs {
            if part.rep(hub) != rep || part.rep(rep) != rep {
                return Err(Error::NotCertified(format!(
                    "hub {hub} of component {rep} at level {i} does not match this graph"
                )));
            }
        }
        levels.push(part);
        hubs.push(level_hubs);
    }
    if levels[l_max].block_count() != 1 {
        return Err(Error::Internal("top level is not a single component".into()));
    }
    Ok(LevelHierarchy {
        base_unit: Some(base),
        levels,
        hubs,
        dist: d.clone(),
    })
}

impl LevelHierarchy {
    /// Index of the top level.
    pub fn l_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn base_unit(&self) -> Option<&ScaleValue> {
        self.base_unit.as_ref()
    }

    /// `r_i`; `None` for the single-vertex graph.
    pub fn radius(&self, level: usize) -> Option<ScaleValue> {
        self.base_unit.as_ref().map(|b| b.times_pow2(level as u64))
    }

    pub fn partition(&self, level: usize) -> &Partition {
        &self.levels[level]
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }

    /// Hubs of `SPC(r_level)` keyed by component representative.
    pub fn level_hubs(&self, level: usize) -> &BTreeMap<usize, usize> {
        &self.hubs[level]
    }

    pub fn components(&self, level: usize) -> Vec<ComponentId> {
        self.levels[level]
            .blocks()
            .keys()
            .map(|&rep| ComponentId { level, rep })
            .collect()
    }

    pub fn all_components(&self) -> Vec<ComponentId> {
        (0..self.levels.len())
            .flat_map(|l| self.components(l))
            .collect()
    }

    pub fn members(&self, c: ComponentId) -> Vec<usize> {
        let part = &self.levels[c.level];
        (0..part.reps().len())
            .filter(|&v| part.rep(v) == c.rep)
            .collect()
    }

    /// Component one level up containing `c`; `None` at the top.
    pub fn parent(&self, c: ComponentId) -> Option<ComponentId> {
        (c.level < self.l_max()).then(|| ComponentId {
            level: c.level + 1,
            rep: self.levels[c.level + 1].rep(c.rep),
        })
    }

    /// Interface points `I_C`: for each level `j >= level(C)` the hubs of
    /// `SPC(r_j)` within `2 r_j` of `C`. At most one per level.
    pub fn interface_points(&self, c: ComponentId) -> Result<InterfaceSet> {
        let members = self.members(c);
        if members.is_empty() || self.levels[c.level].rep(c.rep) != c.rep {
            return Err(Error::InvalidArgument(format!(
                "no component {} at level {}",
                c.rep, c.level
            )));
        }
        let mut points = Vec::new();
        for j in c.level..self.levels.len() {
            let Some(radius) = self.radius(j) else { break };
            let reach = radius.double();
            let mut hubs: Vec<usize> = self.hubs[j].values().copied().collect();
            hubs.sort_unstable();
            hubs.dedup();
            let mut found: Option<InterfacePoint> = None;
            for u in hubs {
                let dist_c = members
                    .iter()
                    .map(|&m| self.dist.d(u, m))
                    .min()
                    .expect("nonempty component")
                    .clone();
                if reach.admits(&dist_c) {
                    if let Some(prev) = &found {
                        return Err(Error::Internal(format!(
                            "component {}@{} sees two level-{j} hubs ({} and {u})",
                            c.rep, c.level, prev.hub
                        )));
                    }
                    found = Some(InterfacePoint {
                        level: j,
                        hub: u,
                        dist: dist_c,
                    });
                }
            }
            points.extend(found);
        }
        Ok(InterfaceSet {
            component: c,
            points,
        })
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let mut levels = Vec::new();
        for l in 0..self.levels.len() {
            let mut comps = Vec::new();
            for c in self.components(l) {
                let iface = self.interface_points(c)?;
                comps.push(serde_json::json!({
                    "rep": c.rep,
                    "members": self.members(c),
                    "parent": self.parent(c).map(|p| p.rep),
                    "interface": iface.points,
                }));
            }
            levels.push(serde_json::json!({
                "level": l,
                "radius": self.radius(l).map(|r| r.to_string()),
                "hubs": self.hubs[l],
                "components": comps,
            }));
        }
        Ok(serde_json::json!({
            "base_unit": self.base_unit.as_ref().map(|b| b.to_string()),
            "l_max": self.l_max(),
            "levels": levels,
        }))
    }
}

/// Component-representative net of `G_{<=r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Net {
    pub radius: ScaleValue,
    pub points: Vec<usize>,
    pub eta: Vec<usize>,
    /// `max_v dist(v, eta(v))`.
    #[serde(serialize_with = "ser_decimal")]
    pub max_coverage: Weight,
    /// `max_coverage <= 3r`; guaranteed only on certified input.
    pub covered: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetCheck {
    pub separated: bool,
    pub covering: bool,
    pub one_per_component: bool,
    pub eta_consistent: bool,
}

impl NetCheck {
    pub fn all(&self) -> bool {
        self.separated && self.covering && self.one_per_component && self.eta_consistent
    }
}

pub fn compute_net(g: &Graph, r: &ScaleValue) -> Net {
    let d = all_pairs(g);
    compute_net_with(g, &d, r)
}

/// Picks the smallest vertex of every component of `G_{<=r}`.
pub fn compute_net_with(g: &Graph, d: &DistMatrix, r: &ScaleValue) -> Net {
    let part = threshold_components(g, r);
    let eta: Vec<usize> = part.reps().to_vec();
    let points: Vec<usize> = part.blocks().keys().copied().collect();
    let max_coverage = (0..g.n())
        .filter_map(|v| d.get(v, eta[v]))
        .max()
        .cloned()
        .unwrap_or_else(BigUint::zero);
    let three_r = ScaleValue::from_ratio(r.ratio() * BigUint::from(3u32));
    let covered = three_r.admits(&max_coverage);
    Net {
        radius: r.clone(),
        points,
        eta,
        max_coverage,
        covered,
    }
}

impl Net {
    /// Checks the four net properties from scratch.
    pub fn check(&self, g: &Graph, d: &DistMatrix) -> NetCheck {
        let r = &self.radius;
        let separated = self.points.iter().enumerate().all(|(i, &x)| {
            self.points[i + 1..]
                .iter()
                .all(|&y| d.get(x, y).is_none_or(|dxy| r.cmp_weight(dxy).is_lt()))
        });
        let three_r = ScaleValue::from_ratio(r.ratio() * BigUint::from(3u32));
        let covering = (0..g.n()).all(|v| {
            self.points
                .iter()
                .any(|&p| d.get(v, p).is_some_and(|x| three_r.admits(x)))
        });
        let part = threshold_components(g, r);
        let mut per_comp: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in &self.points {
            *per_comp.entry(part.rep(p)).or_default() += 1;
        }
        let one_per_component = per_comp.len() == part.block_count()
            && per_comp.values().all(|&k| k == 1);
        let eta_consistent = (0..g.n()).all(|v| {
            let e = self.eta[v];
            self.points.binary_search(&e).is_ok() && part.rep(e) == part.rep(v)
        });
        NetCheck {
            separated,
            covering,
            one_per_component,
            eta_consistent,
        }
    }
}

/// The graph on net points with an edge `{eta(u), eta(v)}` for every edge
/// `{u, v}` crossing components, weighted by the distance in the original
/// graph.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub graph: Graph,
    /// Quotient index -> original vertex.
    pub points: Vec<usize>,
    /// Original vertex -> quotient index.
    pub index_of: Vec<usize>,
}

pub fn quotient_graph(g: &Graph, d: &DistMatrix, net: &Net) -> Quotient {
    let mut index = vec![usize::MAX; g.n()];
    for (i, &p) in net.points.iter().enumerate() {
        index[p] = i;
    }
    let index_of: Vec<usize> = (0..g.n()).map(|v| index[net.eta[v]]).collect();
    let mut edges: BTreeMap<(usize, usize), Weight> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (index_of[e.u], index_of[e.v]);
        if a != b {
            let key = (a.min(b), a.max(b));
            edges
                .entry(key)
                .or_insert_with(|| d.d(net.points[key.0], net.points[key.1]).clone());
        }
    }
    let mut graph = Graph::new(
        net.points.len(),
        edges.into_iter().map(|((a, b), w)| (a, b, w)),
    )
    .expect("quotient is simple")
    .with_terminals(g.terminals().iter().map(|&t| index_of[t]))
    .expect("terminal indices in range")
    .with_unit(g.unit().clone());
    if let Some(labels) = g.labels() {
        graph = graph
            .with_labels(net.points.iter().map(|&p| labels[p].clone()).collect())
            .expect("one label per point");
    }
    Quotient {
        graph,
        points: net.points.clone(),
        index_of,
    }
}

fn ser_decimal<S: serde::Serializer>(w: &Weight, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

/// Exact `(max / min)` over distinct pairs of `points` in `d`; one for a
/// single point.
pub fn induced_aspect_ratio(d: &DistMatrix, points: &[usize]) -> ScaleValue {
    let mut lo: Option<&Weight> = None;
    let mut hi: Option<&Weight> = None;
    for (i, &x) in points.iter().enumerate() {
        for &y in &points[i + 1..] {
            let w = d.d(x, y);
            if lo.is_none_or(|l| w < l) {
                lo = Some(w);
            }
            if hi.is_none_or(|h| w > h) {
                hi = Some(w);
            }
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => ScaleValue::new(h.clone(), l.clone()).expect("positive"),
        _ => ScaleValue::from_weight(&BigUint::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spcover::verify_hd1;

    fn certified(g: &Graph) -> (Hd1Certificate, LevelHierarchy) {
        let cert = verify_hd1(g).certificate().cloned().expect("certified");
        let h = build_hierarchy(g, &cert).unwrap();
        (cert, h)
    }

    #[test]
    fn ceil_log2_cases() {
        let s = |x: &str| x.parse::<ScaleValue>().unwrap();
        assert_eq!(ceil_log2(&s("1")), 0);
        assert_eq!(ceil_log2(&s("2")), 1);
        assert_eq!(ceil_log2(&s("3")), 2);
        assert_eq!(ceil_log2(&s("4")), 2);
        assert_eq!(ceil_log2(&s("9/2")), 3);
    }

    #[test]
    fn single_edge_hierarchy() {
        let g = Graph::from_u64(2, &[(0, 1, 3)]).unwrap();
        let (_, h) = certified(&g);
        assert_eq!(h.base_unit().unwrap().to_string(), "1");
        assert_eq!(h.l_max(), 1);
        assert_eq!(h.partition(0).block_count(), 2);
        assert_eq!(h.partition(1).block_count(), 1);
    }

    #[test]
    fn star_hierarchy() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3)]).unwrap();
        let (_, h) = certified(&g);
        // alpha = 2
        assert_eq!(h.l_max(), 2);
        for l in 0..h.l_max() {
            assert!(h.partition(l).refines(h.partition(l + 1)));
        }
        let top = h.components(2)[0];
        let iface = h.interface_points(top).unwrap();
        assert_eq!(iface.vertices(), vec![0]);
        assert!(iface.points.iter().all(|p| p.dist.is_zero()));
    }

    #[test]
    fn rejects_non_metric_input() {
        let g = Graph::from_u64(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 3)]).unwrap();
        let cert = verify_hd1(&g).certificate().cloned().unwrap();
        assert!(build_hierarchy(&g, &cert).is_err());
    }

    #[test]
    fn net_below_min_weight_is_identity() {
        let g = Graph::from_u64(3, &[(0, 1, 4), (1, 2, 5)]).unwrap();
        let d = all_pairs(&g);
        let net = compute_net_with(&g, &d, &"3".parse().unwrap());
        assert_eq!(net.points, vec![0, 1, 2]);
        assert_eq!(net.eta, vec![0, 1, 2]);
        assert!(net.check(&g, &d).all());
        let q = quotient_graph(&g, &d, &net);
        assert_eq!(q.graph.edges(), g.edges());
    }

    #[test]
    fn star_net_single_point() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3)]).unwrap();
        let d = all_pairs(&g);
        let net = compute_net_with(&g, &d, &"3".parse().unwrap());
        assert_eq!(net.points, vec![0]);
        assert_eq!(net.max_coverage, BigUint::from(3u32));
        assert!(net.check(&g, &d).all());
    }

    #[test]
    fn two_clusters_collapse_to_one_edge() {
        // {0,1} and {2,3} joined by the long edge 1-2.
        let g = Graph::from_u64(4, &[(0, 1, 1), (2, 3, 1), (1, 2, 10)]).unwrap();
        let d = all_pairs(&g);
        let net = compute_net_with(&g, &d, &"1".parse().unwrap());
        assert_eq!(net.points, vec![0, 2]);
        let q = quotient_graph(&g, &d, &net);
        assert_eq!(q.graph.n(), 2);
        assert_eq!(q.graph.edge_weight(0, 1), Some(&BigUint::from(11u32)));
    }
}
