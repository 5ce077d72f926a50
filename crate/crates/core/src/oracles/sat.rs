use crate::error::{Error, Result};
use crate::reductions::CnfFormula;

pub const SAT_MAX_VARS: usize = 20;

/// First satisfying assignment in binary counting order (variable 1 is the
/// lowest bit), or `None` when unsatisfiable.
pub fn sat_bruteforce(phi: &CnfFormula) -> Result<Option<Vec<bool>>> {
    let k = phi.vars();
    if k > SAT_MAX_VARS {
        return Err(Error::CapExceeded {
            what: "SAT variable count",
            cap: SAT_MAX_VARS,
            actual: k,
        });
    }
    for mask in 0u64..(1u64 << k) {
        let a: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
        if phi.eval(&a) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_clauses() {
        let x = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(sat_bruteforce(&x).unwrap(), Some(vec![true]));
        let contra = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(sat_bruteforce(&contra).unwrap(), None);
    }
}
