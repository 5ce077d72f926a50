//! Approximation schemes for TSP and Steiner Tree on certified graphs:
//! bootstrap with a 2-approximation, shrink the graph to a net whose
//! spacing is proportional to `eps * c / n`, solve the quotient exactly on
//! the projected hierarchy decomposition and lift the solution back.
//!
//! With `c` the bootstrap cost and `beta = 2`, the quotient optimum exceeds
//! the true one by at most `2 * maxcov` per solution edge (at most `2n`
//! edges for a tour, `n - 1` for a tree) and lifting adds at most
//! `2 * maxcov` per vertex (tour) or `maxcov` per terminal (tree), where
//! `maxcov <= 3r`. The internal epsilons below turn these into a clean
//! `(1 + eps) * OPT`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::dp::{
    self, steiner_2approx, steiner_exact_td_with, tsp_2approx, tsp_exact_td_with, DpOptions,
    SteinerSolution, TourSolution,
};
use crate::error::{Error, Result};
use crate::graph::{all_pairs_with, metric_preprocess_with, DistMatrix, Graph, ScaleValue, Weight};
use crate::spcover::{verify_hd1_metric, Hd1Certificate, Hd1Verdict};
use crate::structure::{build_hierarchy_with, compute_net_with, quotient_graph};
use crate::treedecomp::{
    build_decomposition, make_nice, project_decomposition, validate_decomposition,
    NiceTreeDecomposition,
};

/// Factor of the bootstrap approximations.
pub const BETA: u32 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct FptasReport {
    pub problem: &'static str,
    pub eps: ScaleValue,
    pub eps_internal: ScaleValue,
    pub beta: u32,
    #[serde(serialize_with = "decimal")]
    pub bootstrap_cost: Weight,
    /// `c / beta`, a lower bound on the optimum.
    pub lower_bound: ScaleValue,
    pub n: usize,
    /// Vertices left after trimming (equals `n` for TSP).
    pub trimmed_n: usize,
    pub trimmed: bool,
    pub radius: ScaleValue,
    #[serde(serialize_with = "decimal")]
    pub max_coverage: Weight,
    pub quotient_n: usize,
    pub quotient_m: usize,
    pub width: usize,
    pub projected_width: usize,
    #[serde(serialize_with = "decimal")]
    pub quotient_opt: Weight,
    #[serde(serialize_with = "decimal")]
    pub lifted_cost: Weight,
    #[serde(serialize_with = "decimal")]
    pub final_cost: Weight,
    /// `"lifted"` or `"bootstrap"`, whichever was cheaper.
    pub chosen: &'static str,
    /// Work counters.
    pub steps: BTreeMap<&'static str, u64>,
}

impl FptasReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialises")
    }

    /// Checks the relations every run must satisfy.
    pub fn is_consistent(&self) -> bool {
        let lb_ok = self.lower_bound.ratio() * BigUint::from(self.beta)
            == Ratio::from_integer(self.bootstrap_cost.clone());
        let final_ok = self.final_cost == (&self.lifted_cost).min(&self.bootstrap_cost).clone();
        let chosen_ok = (self.chosen == "lifted") == (self.lifted_cost < self.bootstrap_cost);
        lb_ok
            && final_ok
            && chosen_ok
            && self.quotient_opt <= self.lifted_cost
            && self.projected_width <= self.width
            && self.quotient_n <= self.trimmed_n
            && self.trimmed_n <= self.n
    }
}

fn decimal<S: serde::Serializer>(w: &Weight, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&w.to_string())
}

fn check_eps(eps: &ScaleValue) -> Result<()> {
    if eps.numer().is_zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    Ok(())
}

/// `eps_internal * c / (3n)`.
fn net_radius(eps_internal: &ScaleValue, c: &Weight, n: usize) -> ScaleValue {
    let r = eps_internal.ratio() * Ratio::from_integer(c.clone())
        / Ratio::from_integer(BigUint::from(3 * n.max(1)));
    if r.is_zero() {
        // Zero bootstrap cost: any radius below the lightest edge is exact.
        ScaleValue::from_ratio(Ratio::new(BigUint::one(), BigUint::from(2u32)))
    } else {
        ScaleValue::from_ratio(r)
    }
}

/// Metric version of `g`, its distances and certificate.
fn certify(g: &Graph, opts: &DpOptions) -> Result<(Graph, DistMatrix, Hd1Certificate)> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("empty graph".into()));
    }
    let d = all_pairs_with(g, opts.exec);
    if !d.is_connected() {
        return Err(Error::Disconnected);
    }
    let gm = metric_preprocess_with(g, &d);
    match verify_hd1_metric(&gm, &d, opts.exec) {
        Hd1Verdict::Certified(cert) => Ok((gm, d, cert)),
        Hd1Verdict::Witness(w) => Err(Error::NotCertified(w.scale.to_string())),
    }
}

/// Net, quotient and projected nice decomposition of a certified metric
/// graph.
struct Reduced {
    net: crate::structure::Net,
    quotient: crate::structure::Quotient,
    nice: NiceTreeDecomposition,
    width: usize,
    projected_width: usize,
    components: usize,
}

fn reduce(
    g: &Graph,
    d: &DistMatrix,
    cert: &Hd1Certificate,
    r: &ScaleValue,
    opts: &DpOptions,
) -> Result<Reduced> {
    let h = build_hierarchy_with(g, d, cert)?;
    let td = build_decomposition(g, &h)?;
    let net = compute_net_with(g, d, r);
    let quotient = quotient_graph(g, d, &net);
    let projected = project_decomposition(&td, &quotient.index_of).compress();
    let report = validate_decomposition(&quotient.graph, &projected);
    if !report.is_valid() {
        return Err(Error::Internal(format!("projected decomposition is invalid: {report:?}")));
    }
    if projected.max_bag() > opts.max_bag.min(64) {
        return Err(Error::BudgetExceeded {
            width: projected.width(),
            budget: opts.max_bag.min(64).saturating_sub(1),
        });
    }
    Ok(Reduced {
        components: h.all_components().len(),
        width: td.width(),
        projected_width: projected.width(),
        nice: make_nice(&projected),
        net,
        quotient,
    })
}

pub fn fptas_tsp(g: &Graph, eps: &ScaleValue) -> Result<(TourSolution, FptasReport)> {
    fptas_tsp_with(g, eps, &DpOptions::default())
}

/// Internal epsilon `eps / (6 beta)`.
pub fn fptas_tsp_with(
    g: &Graph,
    eps: &ScaleValue,
    opts: &DpOptions,
) -> Result<(TourSolution, FptasReport)> {
    check_eps(eps)?;
    let (gm, d, cert) = certify(g, opts)?;
    let n = g.n();
    let boot = tsp_2approx(&gm)?;
    let c = boot.cost.clone();
    let eps_internal = ScaleValue::from_ratio(eps.ratio() / BigUint::from(6 * BETA));
    let r = net_radius(&eps_internal, &c, n);
    let red = reduce(&gm, &d, &cert, &r, opts)?;
    let q = &red.quotient;
    let sub = tsp_exact_td_with(&q.graph, &red.nice, opts)?;

    // Expand quotient steps into shortest paths, then detour to every
    // vertex the walk still misses.
    let mut walk = vec![q.points[sub.walk[0]]];
    for s in sub.walk.windows(2) {
        let p = d.path(&gm, q.points[s[0]], q.points[s[1]]);
        walk.extend_from_slice(&p[1..]);
    }
    let mut seen = vec![false; n];
    for &v in &walk {
        seen[v] = true;
    }
    let mut detours: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        if !seen[v] {
            detours.entry(red.net.eta[v]).or_default().push(v);
        }
    }
    let mut lifted_walk = Vec::with_capacity(walk.len());
    for &x in &walk {
        lifted_walk.push(x);
        if let Some(vs) = detours.remove(&x) {
            for v in vs {
                if seen[v] {
                    continue;
                }
                let there = d.path(&gm, x, v);
                let back = d.path(&gm, v, x);
                for &y in there[1..].iter().chain(&back[1..]) {
                    seen[y] = true;
                    lifted_walk.push(y);
                }
            }
        }
    }
    let lifted = TourSolution::from_walk(&gm, lifted_walk, "fptas")?;
    lifted.validate(&gm)?;

    let mut steps = BTreeMap::new();
    steps.insert("apsp_pairs", (n * n) as u64);
    steps.insert("hierarchy_components", red.components as u64);
    steps.insert("nice_nodes", red.nice.nodes().len() as u64);
    steps.insert("dp_states", sub.states);
    let report = FptasReport {
        problem: "tsp",
        eps: eps.clone(),
        lower_bound: ScaleValue::from_ratio(Ratio::new(c.clone(), BigUint::from(BETA))),
        eps_internal,
        beta: BETA,
        bootstrap_cost: c.clone(),
        n,
        trimmed_n: n,
        trimmed: false,
        radius: r,
        max_coverage: red.net.max_coverage.clone(),
        quotient_n: q.graph.n(),
        quotient_m: q.graph.m(),
        width: red.width,
        projected_width: red.projected_width,
        quotient_opt: sub.cost.clone(),
        lifted_cost: lifted.cost.clone(),
        final_cost: (&lifted.cost).min(&c).clone(),
        chosen: if lifted.cost < c { "lifted" } else { "bootstrap" },
        steps,
    };
    let mut sol = if lifted.cost < c { lifted } else { boot };
    sol.solver = "fptas";
    sol.width = Some(red.projected_width);
    sol.states = sub.states;
    Ok((sol, report))
}

/// Keeps the vertices within distance `c` of some terminal.
pub fn trim_steiner(g: &Graph, d: &DistMatrix, terminals: &[usize], c: &Weight) -> (Graph, Vec<usize>) {
    let keep: Vec<usize> = (0..g.n())
        .filter(|&v| terminals.iter().any(|&t| d.get(v, t).is_some_and(|x| x <= c)))
        .collect();
    g.induced_subgraph(&keep)
}

pub fn fptas_steiner(
    g: &Graph,
    terminals: &[usize],
    eps: &ScaleValue,
) -> Result<(SteinerSolution, FptasReport)> {
    fptas_steiner_with(g, terminals, eps, &DpOptions::default())
}

/// Internal epsilon `eps / (3 beta)`. The trimmed graph is used only when
/// it is itself certified.
pub fn fptas_steiner_with(
    g: &Graph,
    terminals: &[usize],
    eps: &ScaleValue,
    opts: &DpOptions,
) -> Result<(SteinerSolution, FptasReport)> {
    check_eps(eps)?;
    dp::check_terminals(g, terminals)?;
    let (gm, d, cert) = certify(g, opts)?;
    let n = g.n();
    let mut ts = terminals.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let boot = steiner_2approx(&gm, &ts)?;
    let c = boot.cost.clone();
    let eps_internal = ScaleValue::from_ratio(eps.ratio() / BigUint::from(3 * BETA));

    let (tg, kept) = trim_steiner(&gm.clone().with_terminals(ts.clone())?, &d, &ts, &c);
    let trimmed_cert = if tg.n() < n {
        let td = all_pairs_with(&tg, opts.exec);
        let tm = metric_preprocess_with(&tg, &td);
        match verify_hd1_metric(&tm, &td, opts.exec) {
            Hd1Verdict::Certified(cert) => Some((tm, td, cert)),
            Hd1Verdict::Witness(_) => None,
        }
    } else {
        None
    };
    let trimmed = trimmed_cert.is_some();
    let (wg, wd, wcert, map) = match trimmed_cert {
        Some((tm, td, cert)) => (tm, td, cert, kept),
        None => (gm.clone().with_terminals(ts.clone())?, d.clone(), cert, (0..n).collect()),
    };
    let wn = wg.n();
    let r = net_radius(&eps_internal, &c, wn);
    let red = reduce(&wg, &wd, &wcert, &r, opts)?;
    let q = &red.quotient;
    let q_terms: Vec<usize> = q.graph.terminals().to_vec();
    let sub = steiner_exact_td_with(&q.graph, &q_terms, &red.nice, opts)?;

    let mut union: Vec<(usize, usize)> = Vec::new();
    let mut push_path = |p: Vec<usize>| {
        union.extend(p.windows(2).map(|w| (map[w[0]], map[w[1]])));
    };
    for &(a, b) in &sub.edges {
        push_path(wd.path(&wg, q.points[a], q.points[b]));
    }
    for &t in wg.terminals() {
        push_path(wd.path(&wg, t, red.net.eta[t]));
    }
    let tree = dp::prune_to_tree(&gm, union, &ts)?;
    let lifted = SteinerSolution::from_edges(&gm, tree, "fptas")?;
    lifted.validate(&gm, &ts)?;

    let mut steps = BTreeMap::new();
    steps.insert("apsp_pairs", (n * n) as u64);
    steps.insert("hierarchy_components", red.components as u64);
    steps.insert("nice_nodes", red.nice.nodes().len() as u64);
    steps.insert("dp_states", sub.states);
    let report = FptasReport {
        problem: "steiner",
        eps: eps.clone(),
        lower_bound: ScaleValue::from_ratio(Ratio::new(c.clone(), BigUint::from(BETA))),
        eps_internal,
        beta: BETA,
        bootstrap_cost: c.clone(),
        n,
        trimmed_n: wn,
        trimmed,
        radius: r,
        max_coverage: red.net.max_coverage.clone(),
        quotient_n: q.graph.n(),
        quotient_m: q.graph.m(),
        width: red.width,
        projected_width: red.projected_width,
        quotient_opt: sub.cost.clone(),
        lifted_cost: lifted.cost.clone(),
        final_cost: (&lifted.cost).min(&c).clone(),
        chosen: if lifted.cost < c { "lifted" } else { "bootstrap" },
        steps,
    };
    let mut sol = if lifted.cost < c { lifted } else { boot };
    sol.solver = "fptas";
    sol.width = Some(red.projected_width);
    sol.states = sub.states;
    Ok((sol, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(s: &str) -> ScaleValue {
        s.parse().unwrap()
    }

    #[test]
    fn star_tour_within_bound() {
        let g = Graph::from_u64(5, &[(0, 1, 3), (0, 2, 3), (0, 3, 3), (0, 4, 3)]).unwrap();
        let (sol, rep) = fptas_tsp(&g, &eps("1/2")).unwrap();
        sol.validate(&g).unwrap();
        assert_eq!(sol.cost, BigUint::from(24u32));
        assert!(rep.is_consistent());
    }

    #[test]
    fn identity_net_is_exact() {
        let g = Graph::from_u64(4, &[(0, 1, 5), (1, 2, 40), (1, 3, 40)]).unwrap();
        let (sol, rep) = fptas_steiner(&g, &[0, 2, 3], &eps("1/10")).unwrap();
        assert_eq!(rep.quotient_n, 4);
        assert_eq!(sol.cost, BigUint::from(85u32));
    }

    #[test]
    fn trimming_drops_far_vertices() {
        let g = Graph::from_u64(4, &[(0, 1, 2), (1, 2, 2), (2, 3, 100)]).unwrap();
        let d = all_pairs_with(&g, crate::par::Execution::Sequential);
        let (t, kept) = trim_steiner(&g, &d, &[0, 2], &BigUint::from(4u32));
        assert_eq!(kept, vec![0, 1, 2]);
        assert_eq!(t.n(), 3);
        let (all, _) = trim_steiner(&g, &d, &[0, 2], &BigUint::from(100u32));
        assert_eq!(all.n(), 4);
    }

    #[test]
    fn rejects_uncertified_and_bad_eps() {
        let square = Graph::from_u64(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
        assert!(matches!(fptas_tsp(&square, &eps("1/2")), Err(Error::NotCertified(_))));
        let star = Graph::from_u64(3, &[(0, 1, 1), (0, 2, 1)]).unwrap();
        assert!("0".parse::<ScaleValue>().is_err());
        assert!(fptas_steiner(&star, &[], &eps("1")).is_err());
    }
}
