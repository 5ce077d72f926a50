use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::dp::SteinerSolution;
use crate::error::{Error, Result};
use crate::graph::{Graph, Weight};

use super::{complete_assignment, CnfFormula, Decision};

/// Vertex ids of the gadget roles; `t[x]`, `u[x]`, `f[x]` belong to
/// variable `x + 1`, `clause[i]` to clause `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StpRoles {
    pub root: usize,
    pub u: Vec<usize>,
    pub t: Vec<usize>,
    pub f: Vec<usize>,
    pub clause: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct StpReduction {
    pub formula: CnfFormula,
    /// Carries the terminal set and role labels.
    pub graph: Graph,
    pub threshold: Weight,
    pub roles: StpRoles,
}

impl StpReduction {
    pub fn terminals(&self) -> &[usize] {
        self.graph.terminals()
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        json!({
            "problem": "steiner",
            "threshold": self.threshold.to_string(),
            "variables": self.formula.vars(),
            "clauses": self.formula.clauses().len(),
            "roles": self.roles,
        })
    }
}

/// Vertex order: the root, then `(u, t, f)` per variable, then one vertex
/// per clause.
pub fn gen_stp(phi: &CnfFormula) -> StpReduction {
    let k = phi.vars();
    let l = phi.clauses().len();
    let n = 1 + 3 * k + l;
    let root = 0;
    let u: Vec<usize> = (0..k).map(|x| 1 + 3 * x).collect();
    let t: Vec<usize> = (0..k).map(|x| 2 + 3 * x).collect();
    let f: Vec<usize> = (0..k).map(|x| 3 + 3 * x).collect();
    let clause: Vec<usize> = (0..l).map(|i| 1 + 3 * k + i).collect();

    let eleven = BigUint::from(11u32);
    let mut edges = Vec::new();
    for x in 0..k {
        edges.push((t[x], u[x], BigUint::from(1u32)));
        edges.push((u[x], f[x], BigUint::from(1u32)));
        edges.push((root, t[x], eleven.clone()));
        edges.push((root, f[x], eleven.clone()));
    }
    let mut threshold = BigUint::from(12 * k);
    for (i, c) in phi.clauses().iter().enumerate() {
        let w = eleven.pow(i as u32 + 2);
        let mut ends: Vec<usize> = c
            .iter()
            .map(|&lit| {
                let x = lit.unsigned_abs() as usize - 1;
                if lit > 0 {
                    t[x]
                } else {
                    f[x]
                }
            })
            .collect();
        ends.sort_unstable();
        ends.dedup();
        for e in ends {
            edges.push((clause[i], e, w.clone()));
        }
        threshold += w;
    }

    let mut labels = vec![String::new(); n];
    labels[root] = "v0".into();
    for x in 0..k {
        labels[u[x]] = format!("u_x{}", x + 1);
        labels[t[x]] = format!("t_x{}", x + 1);
        labels[f[x]] = format!("f_x{}", x + 1);
    }
    for (i, &c) in clause.iter().enumerate() {
        labels[c] = format!("v{}", i + 1);
    }
    let terminals = std::iter::once(root)
        .chain(u.iter().copied())
        .chain(clause.iter().copied());
    let graph = Graph::new(n, edges)
        .and_then(|g| g.with_terminals(terminals))
        .and_then(|g| g.with_labels(labels))
        .expect("gadget graph is simple");
    StpReduction {
        formula: phi.clone(),
        graph,
        threshold,
        roles: StpRoles {
            root,
            u,
            t,
            f,
            clause,
        },
    }
}

/// Reads the assignment off the root edges of an optimal tree: `v0-t_x`
/// sets `x` true, `v0-f_x` sets it false.
pub fn decide_stp(red: &StpReduction, exact: &SteinerSolution) -> Result<Decision> {
    exact.validate(&red.graph, red.terminals())?;
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
    let has = |a: usize, b: usize| exact.edges.binary_search(&(a.min(b), a.max(b))).is_ok();
    let r = &red.roles;
    let mut base = vec![false; red.formula.vars()];
    for x in 0..base.len() {
        match (has(r.root, r.t[x]), has(r.root, r.f[x])) {
            (true, false) => base[x] = true,
            (false, true) => base[x] = false,
            _ => decision.undetermined.push(x),
        }
    }
    let a = complete_assignment(&red.formula, &base, &decision.undetermined).ok_or_else(|| {
        Error::Internal("tree within the threshold encodes no satisfying assignment".into())
    })?;
    decision.assignment = Some(a);
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_positive_clause() {
        let red = gen_stp(&CnfFormula::new(1, vec![vec![1]]).unwrap());
        assert_eq!(red.graph.n(), 5);
        assert_eq!(red.threshold, BigUint::from(133u32));
        assert_eq!(red.terminals(), &[0, 1, 4]);
        assert_eq!(red.graph.edge_weight(4, 2), Some(&BigUint::from(121u32)));
    }

    #[test]
    fn contradiction_threshold() {
        let red = gen_stp(&CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap());
        assert_eq!(red.threshold, BigUint::from(1464u32));
        assert_eq!(red.graph.edge_weight(5, 3), Some(&BigUint::from(1331u32)));
    }
}
