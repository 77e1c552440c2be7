//! The finite-chain abstraction: validation, concatenation, the
//! rotate-and-scale transform that turns a chain from 1 into a chain of
//! multiples of the next prime, and lcm utilities.

use std::collections::HashSet;

use crate::arith::{checked_mul, is_prime, next_prime};
use crate::error::{ChainViolation, Error, Result, ViolationKind};

/// An ordered list of pairwise-distinct positive integers in which each
/// adjacent pair is related by divisibility.
///
/// Chains store raw values; adjacency checks are remainder tests. Values
/// stay small enough in practice that factorization caching buys nothing
/// at this layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteChain {
    elems: Vec<u64>,
}

pub fn divides(a: u64, b: u64) -> bool {
    b.is_multiple_of(a)
}

/// True when one of the two values divides the other.
pub fn adjacent(a: u64, b: u64) -> bool {
    divides(a, b) || divides(b, a)
}

impl FiniteChain {
    /// Certify a sequence as a finite chain, or report the first violation.
    pub fn validate(seq: &[u64]) -> Result<FiniteChain> {
        if seq.is_empty() {
            return Err(Error::Domain("empty sequence is not a chain".into()));
        }
        let mut seen = HashSet::with_capacity(seq.len());
        for (i, &v) in seq.iter().enumerate() {
            if v == 0 {
                return Err(Error::Domain(format!("zero at index {i}")));
            }
            if !seen.insert(v) {
                return Err(ChainViolation {
                    kind: ViolationKind::Duplicate,
                    index: i,
                }
                .into());
            }
            if i + 1 < seq.len() && seq[i + 1] != 0 && !adjacent(v, seq[i + 1]) {
                return Err(ChainViolation {
                    kind: ViolationKind::NonAdjacent,
                    index: i,
                }
                .into());
            }
        }
        Ok(FiniteChain {
            elems: seq.to_vec(),
        })
    }

    pub fn elems(&self) -> &[u64] {
        &self.elems
    }

    pub fn longueur(&self) -> usize {
        self.elems.len()
    }

    pub fn first(&self) -> u64 {
        self.elems[0]
    }

    pub fn last(&self) -> u64 {
        *self.elems.last().unwrap()
    }

    /// Concatenate two chains. The junction must satisfy divisibility and
    /// the element sets must be disjoint; equivalent to validating the
    /// concatenated sequence.
    pub fn concat(&self, other: &FiniteChain) -> Result<FiniteChain> {
        let mut all = Vec::with_capacity(self.elems.len() + other.elems.len());
        all.extend_from_slice(&self.elems);
        all.extend_from_slice(&other.elems);
        FiniteChain::validate(&all)
    }

    /// JSON array of decimal strings. Strings, not numbers: JSON numbers
    /// truncate beyond 53 bits.
    pub fn to_json(&self) -> String {
        let strings: Vec<String> = self.elems.iter().map(|v| v.to_string()).collect();
        serde_json::to_string(&strings).expect("string array always serializes")
    }

    /// CSV with a single "value" column, one element per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value\n");
        for v in &self.elems {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Move the leading 1 of `gamma` to the back, then multiply everything by
/// the prime following `p`. A chain `1-p-...-2` becomes
/// `p*p - ... - 2p* - p*`.
pub fn make_d(gamma: &FiniteChain, p: u64) -> Result<FiniteChain> {
    if gamma.first() != 1 {
        return Err(Error::Domain(format!(
            "make_d: chain must start at 1, starts at {}",
            gamma.first()
        )));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("make_d: {p} is not prime")));
    }
    let p_star = next_prime(p)?;
    let elems = gamma.elems();
    let mut out = Vec::with_capacity(elems.len());
    for &g in &elems[1..] {
        out.push(checked_mul(g, p_star, "make_d scale")?);
    }
    out.push(p_star);
    // Rotation preserves adjacency except at the new junction, and scaling
    // by a prime dividing no element preserves it everywhere; validating
    // the result catches violated preconditions (e.g. non-smooth input).
    FiniteChain::validate(&out)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple, checked.
pub fn lcm_pair(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Err(Error::Domain("lcm of zero".into()));
    }
    checked_mul(a / gcd(a, b), b, "lcm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ViolationKind;

    fn violation(r: Result<FiniteChain>) -> ChainViolation {
        match r {
            Err(Error::Chain(v)) => v,
            other => panic!("expected chain violation, got {other:?}"),
        }
    }

    #[test]
    fn validate_accepts_opening_chain() {
        let c = FiniteChain::validate(&[1, 2, 6, 3]).unwrap();
        assert_eq!(c.longueur(), 4);
    }

    #[test]
    fn validate_reports_first_violation() {
        let v = violation(FiniteChain::validate(&[2, 3]));
        assert_eq!(v.kind, ViolationKind::NonAdjacent);
        assert_eq!(v.index, 0);

        let v = violation(FiniteChain::validate(&[1, 2, 2]));
        assert_eq!(v.kind, ViolationKind::Duplicate);
        assert_eq!(v.index, 2);

        assert!(FiniteChain::validate(&[]).is_err());
    }

    #[test]
    fn concat_examples() {
        let a = FiniteChain::validate(&[1]).unwrap();
        let b = FiniteChain::validate(&[6, 3]).unwrap();
        assert_eq!(a.concat(&b).unwrap().elems(), &[1, 6, 3]);

        // 2 divides 4, so the junction holds.
        let a = FiniteChain::validate(&[1, 3, 6, 2]).unwrap();
        let b = FiniteChain::validate(&[4]).unwrap();
        assert_eq!(a.concat(&b).unwrap().elems(), &[1, 3, 6, 2, 4]);

        let a = FiniteChain::validate(&[6, 3]).unwrap();
        let b = FiniteChain::validate(&[3, 9]).unwrap();
        let v = violation(a.concat(&b));
        assert_eq!(v.kind, ViolationKind::Duplicate);
    }

    #[test]
    fn make_d_examples() {
        let g = FiniteChain::validate(&[1, 2]).unwrap();
        assert_eq!(make_d(&g, 2).unwrap().elems(), &[6, 3]);

        let g = FiniteChain::validate(&[1, 3, 6, 2]).unwrap();
        assert_eq!(make_d(&g, 3).unwrap().elems(), &[15, 30, 10, 5]);

        let g = FiniteChain::validate(&[1]).unwrap();
        assert_eq!(make_d(&g, 5).unwrap().elems(), &[7]);

        let g = FiniteChain::validate(&[2, 4]).unwrap();
        assert!(make_d(&g, 2).is_err());
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_pair(4, 6).unwrap(), 12);
        assert_eq!(lcm_pair(5, 35).unwrap(), 35);
        assert_eq!(lcm_pair(1, 77).unwrap(), 77);
        assert!(lcm_pair(u64::MAX, u64::MAX - 1).is_err());
    }

    // Along any chain, the lcm of an adjacent pair is the larger element.
    #[test]
    fn lcm_is_max_along_chains() {
        let c = FiniteChain::validate(&[1, 2, 6, 3, 12, 4, 20, 5]).unwrap();
        for w in c.elems().windows(2) {
            assert_eq!(lcm_pair(w[0], w[1]).unwrap(), w[0].max(w[1]));
        }
    }

    #[test]
    fn serialization_shapes() {
        let c = FiniteChain::validate(&[1, 6, 3]).unwrap();
        assert_eq!(c.to_json(), r#"["1","6","3"]"#);
        assert_eq!(c.to_csv(), "value\n1\n6\n3\n");
    }
}
