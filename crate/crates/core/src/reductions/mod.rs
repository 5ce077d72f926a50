//! The two hardness constructions: SAT to Steiner Tree on graphs of highway
//! dimension 1, and (<=3,3)-SAT to TSP on graphs of highway dimension at
//! most 6. Each generator records the decision threshold and the vertex
//! roles needed to decode an optimal solution back into an assignment.

mod cnf;
mod stp;
mod tsp;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, Weight};

pub use cnf::{literal_value, parse_dimacs, validate_33sat, CnfFormula};
pub use stp::{decide_stp, gen_stp, StpReduction, StpRoles};
pub use tsp::{constructive_tour, decide_tsp, gen_tsp, Ladder, TspReduction, TspRoles};

/// Outcome of decoding an exact solution of a reduction instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub satisfiable: bool,
    #[serde(with = "decimal")]
    pub cost: Weight,
    #[serde(with = "decimal")]
    pub threshold: Weight,
    /// Verified model when satisfiable.
    pub assignment: Option<Vec<bool>>,
    /// Variables the solution did not pin down.
    pub undetermined: Vec<usize>,
}

/// Data behind an application of the edge-addition bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeAdditionBound {
    pub bound: usize,
    pub known: usize,
    pub added: usize,
    #[serde(with = "decimal")]
    pub existing_total: Weight,
    #[serde(with = "decimal")]
    pub cheapest_added: Weight,
}

/// Adding edges whose costs are all at least twice the total cost of `g`
/// raises the highway dimension to at most `max(known, |new_edges|)`.
pub fn edge_addition_hd_bound(
    g: &Graph,
    new_edges: &[(usize, usize, Weight)],
    known: usize,
) -> Result<EdgeAdditionBound> {
    let total = g.total_weight();
    let need = &total * 2u32;
    for (u, v, w) in new_edges {
        if *w < need {
            return Err(Error::InvalidArgument(format!(
                "edge {u}-{v} of cost {w} is not safe (needs at least {need})"
            )));
        }
    }
    Ok(EdgeAdditionBound {
        bound: known.max(new_edges.len()),
        known,
        added: new_edges.len(),
        existing_total: total,
        cheapest_added: new_edges
            .iter()
            .map(|e| e.2.clone())
            .min()
            .unwrap_or_else(BigUint::zero),
    })
}

/// Tries every value of the `free` variables on top of `base` and returns
/// the first model of `phi`.
fn complete_assignment(phi: &CnfFormula, base: &[bool], free: &[usize]) -> Option<Vec<bool>> {
    if free.len() > crate::oracles::SAT_MAX_VARS {
        return None;
    }
    let mut a = base.to_vec();
    for mask in 0u64..(1u64 << free.len()) {
        for (b, &x) in free.iter().enumerate() {
            a[x] = mask >> b & 1 == 1;
        }
        if phi.eval(&a) {
            return Some(a);
        }
    }
    None
}

mod decimal {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn safe_edge_on_star() {
        let star = Graph::from_u64(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        let b = edge_addition_hd_bound(&star, &[(1, 2, BigUint::from(6u32))], 1).unwrap();
        assert_eq!(b.bound, 1);
        assert!(edge_addition_hd_bound(&star, &[(1, 2, BigUint::from(5u32))], 1).is_err());
    }
}
