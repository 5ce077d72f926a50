use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use crate::dp::{euler_circuit, TourSolution};
use crate::error::{Error, Result};
use crate::graph::{Graph, Weight};

use super::{complete_assignment, validate_33sat, CnfFormula, Decision};

/// Edge costs in order of insertion; each is twice the total cost of all
/// edges inserted before it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub a: Weight,
    pub b: Weight,
    pub c: Vec<Weight>,
    pub d: Weight,
    pub e: Weight,
    pub f: Vec<Weight>,
}

impl Ladder {
    pub fn to_json(&self) -> serde_json::Value {
        let s = |w: &Weight| w.to_string();
        json!({
            "a": s(&self.a),
            "b": s(&self.b),
            "c": self.c.iter().map(s).collect::<Vec<_>>(),
            "d": s(&self.d),
            "e": s(&self.e),
            "f": self.f.iter().map(s).collect::<Vec<_>>(),
        })
    }
}

/// `var[i][r]` is `v_{i+1, r+1}`; `w[j][k]` and `w_prime[j][k]` are the
/// clause gadget vertices of literal slot `k` of clause `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TspRoles {
    pub var: Vec<[usize; 4]>,
    pub w: Vec<Vec<usize>>,
    pub w_prime: Vec<Vec<usize>>,
}

/// The two edges joining literal slot `slot` of `clause` to the gadget of
/// `var`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseLink {
    pub clause: usize,
    pub slot: usize,
    pub var: usize,
    pub positive: bool,
    pub delta: usize,
    pub w_edge: (usize, usize),
    pub w_prime_edge: (usize, usize),
}

impl ClauseLink {
    /// The variable-gadget edge the two link edges replace in the
    /// constructive tour.
    fn replaced_b_edge(&self) -> (usize, usize) {
        (self.w_edge.1, self.w_prime_edge.1)
    }
}

#[derive(Clone, Debug)]
pub struct TspReduction {
    pub formula: CnfFormula,
    pub graph: Graph,
    pub ladder: Ladder,
    pub threshold: Weight,
    pub roles: TspRoles,
    pub links: Vec<ClauseLink>,
}

impl TspReduction {
    /// Every distinct edge cost is at least twice the sum over all cheaper
    /// edges.
    pub fn ladder_is_safe(&self) -> bool {
        let mut costs: Vec<&Weight> = self.graph.edges().iter().map(|e| &e.w).collect();
        costs.sort();
        let mut below = BigUint::zero();
        let mut i = 0;
        while i < costs.len() {
            let c = costs[i];
            if *c < &below * 2u32 {
                return false;
            }
            while i < costs.len() && costs[i] == c {
                below += c;
                i += 1;
            }
        }
        true
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        json!({
            "problem": "tsp",
            "threshold": self.threshold.to_string(),
            "variables": self.formula.vars(),
            "clauses": self.formula.clauses().len(),
            "ladder": self.ladder.to_json(),
            "roles": self.roles,
            "links": self.links,
        })
    }
}

struct Builder {
    edges: Vec<(usize, usize, Weight)>,
    total: Weight,
}

impl Builder {
    /// Next safe cost.
    fn next_cost(&self) -> Weight {
        if self.edges.is_empty() {
            BigUint::one()
        } else {
            &self.total * 2u32
        }
    }

    fn add(&mut self, list: &[(usize, usize)], w: &Weight) {
        for &(u, v) in list {
            self.edges.push((u, v, w.clone()));
            self.total += w;
        }
    }
}

/// Builds the instance. Vertices: four per variable, then six per clause
/// (`w_{j1}, w'_{j1}, w_{j2}, ...`).
pub fn gen_tsp(phi: &CnfFormula) -> Result<TspReduction> {
    if !validate_33sat(phi) {
        return Err(Error::InvalidArgument(
            "formula is not (<=3,3): a literal occurs more than twice or a variable more than three times"
                .into(),
        ));
    }
    let n = phi.vars();
    let m = phi.clauses().len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("formula needs a variable and a clause".into()));
    }
    if let Some(j) = phi.clauses().iter().position(|c| c.len() > 3) {
        return Err(Error::InvalidArgument(format!("clause {} has more than 3 literals", j + 1)));
    }
    let var: Vec<[usize; 4]> = (0..n)
        .map(|i| [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3])
        .collect();
    let w: Vec<Vec<usize>> = (0..m)
        .map(|j| (0..3).map(|k| 4 * n + 6 * j + 2 * k).collect())
        .collect();
    let w_prime: Vec<Vec<usize>> = (0..m)
        .map(|j| (0..3).map(|k| 4 * n + 6 * j + 2 * k + 1).collect())
        .collect();

    let mut bld = Builder {
        edges: Vec::new(),
        total: BigUint::zero(),
    };
    let a = bld.next_cost();
    let a_edges: Vec<_> = var.iter().flat_map(|v| [(v[0], v[2]), (v[1], v[3])]).collect();
    bld.add(&a_edges, &a);
    let b = bld.next_cost();
    let b_edges: Vec<_> = var
        .iter()
        .flat_map(|v| [(v[0], v[1]), (v[1], v[2]), (v[2], v[3]), (v[3], v[0])])
        .collect();
    bld.add(&b_edges, &b);
    let mut c = Vec::new();
    for i in 0..n - 1 {
        let ci = bld.next_cost();
        bld.add(&[(var[i][0], var[i + 1][0])], &ci);
        c.push(ci);
    }
    let d = bld.next_cost();
    let d_edges: Vec<_> = (0..m)
        .flat_map(|j| (0..3).map(move |k| (j, k)))
        .map(|(j, k)| (w_prime[j][k], w[j][(k + 1) % 3]))
        .collect();
    bld.add(&d_edges, &d);
    let e = bld.next_cost();
    let e_edges: Vec<_> = (0..m)
        .flat_map(|j| (0..3).map(move |k| (j, k)))
        .map(|(j, k)| (w[j][k], w_prime[j][k]))
        .collect();
    bld.add(&e_edges, &e);

    let mut f = Vec::new();
    let mut links = Vec::new();
    let mut first_clause: BTreeMap<i64, usize> = BTreeMap::new();
    for (j, clause) in phi.clauses().iter().enumerate() {
        let fj = bld.next_cost();
        let mut list = Vec::new();
        for (k, &lit) in clause.iter().enumerate() {
            let i = lit.unsigned_abs() as usize - 1;
            let delta = if *first_clause.entry(lit).or_insert(j) == j { 0 } else { 2 };
            let v = &var[i];
            // 1-based gadget positions from the construction.
            let (pw, pwp) = if lit > 0 {
                (2 + delta, 1 + delta)
            } else {
                (3 - delta, 2 + delta)
            };
            let link = ClauseLink {
                clause: j,
                slot: k,
                var: i,
                positive: lit > 0,
                delta,
                w_edge: (w[j][k], v[pw - 1]),
                w_prime_edge: (w_prime[j][k], v[pwp - 1]),
            };
            list.push(link.w_edge);
            list.push(link.w_prime_edge);
            links.push(link);
        }
        bld.add(&list, &fj);
        f.push(fj);
    }

    // W = 2 sum f + 2me + 3md + 2 sum c + (2n - m)b + 2na
    let big = |x: &Weight| BigInt::from(x.clone());
    let (nn, mm) = (BigInt::from(n), BigInt::from(m));
    let sum_f: BigInt = f.iter().map(big).sum();
    let sum_c: BigInt = c.iter().map(big).sum();
    let threshold: BigInt = sum_f * 2
        + &mm * 2 * big(&e)
        + &mm * 3 * big(&d)
        + sum_c * 2
        + (&nn * 2 - &mm) * big(&b)
        + &nn * 2 * big(&a);
    let threshold = threshold
        .to_biguint()
        .ok_or_else(|| Error::Internal("negative tour threshold".into()))?;

    let mut labels = vec![String::new(); 4 * n + 6 * m];
    for (i, v) in var.iter().enumerate() {
        for (r, &x) in v.iter().enumerate() {
            labels[x] = format!("v{}_{}", i + 1, r + 1);
        }
    }
    for j in 0..m {
        for k in 0..3 {
            labels[w[j][k]] = format!("w{}_{}", j + 1, k + 1);
            labels[w_prime[j][k]] = format!("w'{}_{}", j + 1, k + 1);
        }
    }
    let graph = Graph::new(4 * n + 6 * m, bld.edges)?.with_labels(labels)?;
    let red = TspReduction {
        formula: phi.clone(),
        graph,
        ladder: Ladder { a, b, c, d, e, f },
        threshold,
        roles: TspRoles { var, w, w_prime },
        links,
    };
    if !red.ladder_is_safe() {
        return Err(Error::Internal("ladder costs are not safe".into()));
    }
    Ok(red)
}

/// The tour from the satisfiability direction of the equivalence proof:
/// one cycle per clause gadget, doubled chain edges, one oriented cycle per
/// variable gadget, and for each clause the first satisfied literal's link
/// edges replacing one clause edge and one gadget edge.
pub fn constructive_tour(red: &TspReduction, assignment: &[bool]) -> Result<TourSolution> {
    let phi = &red.formula;
    if assignment.len() != phi.vars() || !phi.eval(assignment) {
        return Err(Error::InvalidArgument("assignment does not satisfy the formula".into()));
    }
    let mut mult: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    let put = |m: &mut BTreeMap<(usize, usize), u8>, u: usize, v: usize, k: u8| {
        *m.entry((u.min(v), u.max(v))).or_default() += k;
    };
    let r = &red.roles;
    for (i, v) in r.var.iter().enumerate() {
        let cycle = if assignment[i] {
            [v[0], v[2], v[3], v[1]]
        } else {
            [v[0], v[2], v[1], v[3]]
        };
        for s in 0..4 {
            put(&mut mult, cycle[s], cycle[(s + 1) % 4], 1);
        }
        if i + 1 < r.var.len() {
            put(&mut mult, v[0], r.var[i + 1][0], 2);
        }
    }
    for j in 0..r.w.len() {
        for k in 0..3 {
            put(&mut mult, r.w[j][k], r.w_prime[j][k], 1);
            put(&mut mult, r.w_prime[j][k], r.w[j][(k + 1) % 3], 1);
        }
    }
    for (j, clause) in phi.clauses().iter().enumerate() {
        let k = clause
            .iter()
            .position(|&l| super::literal_value(l, assignment))
            .expect("clause satisfied");
        let link = red
            .links
            .iter()
            .find(|l| l.clause == j && l.slot == k)
            .expect("link per literal");
        for (x, y) in [(r.w[j][k], r.w_prime[j][k]), link.replaced_b_edge()] {
            let key = (x.min(y), x.max(y));
            match mult.get_mut(&key) {
                Some(c) if *c > 0 => *c -= 1,
                _ => {
                    return Err(Error::Internal(format!(
                        "edge {x}-{y} is not available for replacement"
                    )))
                }
            }
        }
        put(&mut mult, link.w_edge.0, link.w_edge.1, 1);
        put(&mut mult, link.w_prime_edge.0, link.w_prime_edge.1, 1);
    }
    mult.retain(|_, c| *c > 0);
    let walk = euler_circuit(red.graph.n(), &mult, 0)?;
    TourSolution::from_walk(&red.graph, walk, "constructive")
}

/// Decodes each variable from the directions in which the tour crosses
/// its two cheapest gadget edges: `v1 -> v3` with `v4 -> v2` (or both
/// reversed) means true.
pub fn decide_tsp(red: &TspReduction, exact: &TourSolution) -> Result<Decision> {
    exact.validate(&red.graph)?;
    let mut decision = Decision {
        satisfiable: exact.cost <= red.threshold,
        cost: exact.cost.clone(),
        threshold: red.threshold.clone(),
        assignment: None,
        undetermined: Vec::new(),
    };
    if !decision.satisfiable {
        return Ok(decision);
    }
    let mut base = vec![false; red.formula.vars()];
    for (i, v) in red.roles.var.iter().enumerate() {
        let mut d13 = Vec::new();
        let mut d42 = Vec::new();
        for s in exact.walk.windows(2) {
            let (x, y) = (s[0], s[1]);
            if (x, y) == (v[0], v[2]) || (x, y) == (v[2], v[0]) {
                d13.push(x == v[0]);
            }
            if (x, y) == (v[3], v[1]) || (x, y) == (v[1], v[3]) {
                d42.push(x == v[3]);
            }
        }
        match (d13.as_slice(), d42.as_slice()) {
            ([p], [q]) => base[i] = p == q,
            _ => decision.undetermined.push(i),
        }
    }
    let a = complete_assignment(&red.formula, &base, &decision.undetermined).ok_or_else(|| {
        Error::Internal(format!(
            "orientation decoding is inconsistent (undetermined variables {:?})",
            decision.undetermined
        ))
    })?;
    decision.assignment = Some(a);
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> TspReduction {
        gen_tsp(&CnfFormula::new(3, vec![vec![1, 2, 3]]).unwrap()).unwrap()
    }

    #[test]
    fn ladder_and_threshold_for_one_clause() {
        let red = xyz();
        assert_eq!(red.graph.n(), 18);
        let l = &red.ladder;
        assert_eq!(l.a, BigUint::from(1u32));
        assert_eq!(l.b, BigUint::from(12u32));
        // 6 + 12*12 = 150
        assert_eq!(l.c, vec![BigUint::from(300u32), BigUint::from(900u32)]);
        assert_eq!(l.d, BigUint::from(2700u32));
        assert_eq!(l.e, BigUint::from(18900u32));
        let w = &l.f[0] * 2u32 + &l.e * 2u32 + &l.d * 3u32 + &l.c[0] * 2u32 + &l.c[1] * 2u32
            + &l.b * 5u32
            + &l.a * 6u32;
        assert_eq!(red.threshold, w);
        assert!(red.ladder_is_safe());
    }

    #[test]
    fn delta_rule_for_repeated_literal() {
        let phi = CnfFormula::new(2, vec![vec![1, 2], vec![1, -2]]).unwrap();
        let red = gen_tsp(&phi).unwrap();
        let x_links: Vec<_> = red.links.iter().filter(|l| l.var == 0).collect();
        assert_eq!(x_links[0].delta, 0);
        assert_eq!(x_links[1].delta, 2);
        let v = red.roles.var[0];
        assert_eq!(x_links[1].w_edge.1, v[3]);
        assert_eq!(x_links[1].w_prime_edge.1, v[2]);
        let y_neg = red.links.iter().find(|l| l.var == 1 && !l.positive).unwrap();
        assert_eq!(y_neg.delta, 0);
        assert_eq!(y_neg.w_edge.1, red.roles.var[1][2]);
    }

    #[test]
    fn constructive_tour_meets_threshold() {
        let red = xyz();
        for mask in 1..8u32 {
            let a: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
            let t = constructive_tour(&red, &a).unwrap();
            t.validate(&red.graph).unwrap();
            assert_eq!(t.cost, red.threshold);
            let d = decide_tsp(&red, &t).unwrap();
            assert!(d.satisfiable);
            assert!(red.formula.eval(d.assignment.as_ref().unwrap()));
        }
    }

    #[test]
    fn rejects_non_33_formulas() {
        let phi = CnfFormula::new(1, vec![vec![1], vec![1], vec![1]]).unwrap();
        assert!(gen_tsp(&phi).is_err());
    }
}
