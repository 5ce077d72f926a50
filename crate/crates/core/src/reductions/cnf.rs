use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// CNF over variables `1..=vars`; literal `-i` is the negation of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        for (j, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidArgument(format!("clause {} is empty", j + 1)));
            }
            if let Some(&l) = c.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > vars) {
                return Err(Error::InvalidArgument(format!(
                    "literal {l} in clause {} is not a declared variable",
                    j + 1
                )));
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// `a[i]` is the value of variable `i + 1`.
    pub fn eval(&self, a: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| literal_value(l, a)))
    }

    /// Occurrences of every signed literal.
    pub fn literal_counts(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for &l in self.clauses.iter().flatten() {
            *m.entry(l).or_default() += 1;
        }
        m
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&format!("{l} "));
            }
            s.push_str("0\n");
        }
        s
    }
}

pub fn literal_value(l: i64, a: &[bool]) -> bool {
    let v = a[l.unsigned_abs() as usize - 1];
    if l > 0 {
        v
    } else {
        !v
    }
}

/// DIMACS CNF: `c` comments, one `p cnf <vars> <clauses>` header, clauses
/// as literal lists terminated by `0` (they may span lines).
pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let ln = i + 1;
        last_line = ln;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        let err = |msg: String| Error::Parse { line: ln, msg };
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if header.is_some() {
                return Err(err("duplicate header".into()));
            }
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err("expected `p cnf <vars> <clauses>`".into()));
            }
            let v = parts[2].parse().map_err(|_| err("bad variable count".into()))?;
            let c = parts[3].parse().map_err(|_| err("bad clause count".into()))?;
            header = Some((v, c));
            continue;
        }
        let Some((vars, count)) = header else {
            return Err(err("clause before header".into()));
        };
        for tok in line.split_whitespace() {
            let l: i64 = tok.parse().map_err(|_| err(format!("bad literal `{tok}`")))?;
            if l == 0 {
                if current.is_empty() {
                    return Err(err("empty clause".into()));
                }
                if clauses.len() == count {
                    return Err(err(format!("more than the declared {count} clauses")));
                }
                clauses.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() as usize > vars {
                return Err(err(format!("literal {l} exceeds the declared {vars} variables")));
            } else {
                current.push(l);
            }
        }
    }
    let Some((vars, count)) = header else {
        return Err(Error::Parse {
            line: last_line,
            msg: "missing `p cnf` header".into(),
        });
    };
    if !current.is_empty() {
        return Err(Error::Parse {
            line: last_line,
            msg: "last clause is not terminated by 0".into(),
        });
    }
    if clauses.len() != count {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("declared {count} clauses, found {}", clauses.len()),
        });
    }
    CnfFormula::new(vars, clauses)
}

/// Every literal occurs at most twice and every variable at most three
/// times.
pub fn validate_33sat(phi: &CnfFormula) -> bool {
    let lits = phi.literal_counts();
    let mut vars: BTreeMap<u64, usize> = BTreeMap::new();
    for (&l, &c) in &lits {
        *vars.entry(l.unsigned_abs()).or_default() += c;
    }
    lits.values().all(|&c| c <= 2) && vars.values().all(|&c| c <= 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_formulas() {
        let f = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1]]);
        let f = parse_dimacs("c two clauses\np cnf 2 2\n1 2 0\n-1 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, 2], vec![-1]]);
        let f = parse_dimacs("p cnf 3 1\n1 -2\n 3 0\n").unwrap();
        assert_eq!(f.clauses(), &[vec![1, -2, 3]]);
    }

    #[test]
    fn rejects_inconsistent_headers() {
        assert!(parse_dimacs("p cnf 1 1\n1 0\n-1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n0\n").is_err());
    }

    #[test]
    fn dimacs_roundtrip() {
        let f = CnfFormula::new(3, vec![vec![1, -2], vec![3], vec![-1, 2, -3]]).unwrap();
        assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn occurrence_limits() {
        let ok = CnfFormula::new(3, vec![vec![1, 2, 3]]).unwrap();
        assert!(validate_33sat(&ok));
        let thrice = CnfFormula::new(1, vec![vec![1], vec![1], vec![1]]).unwrap();
        assert!(!validate_33sat(&thrice));
        let four = CnfFormula::new(2, vec![vec![1, 2], vec![1, -2], vec![-1], vec![-1]]).unwrap();
        assert!(!validate_33sat(&four));
    }
}
