//! Independent brute-force re-derivations used to certify the fast paths
//! at small scale. Guards are hard errors: an oracle never returns a
//! partial answer.

use std::collections::HashSet;

use crate::arith::{big_f, is_prime, is_squarefree};
use crate::chain::FiniteChain;
use crate::error::{Error, Result};
use crate::gamma::{allowed_set, required_set};

const BRUTE_DENSE_GUARD: u64 = 1_000_000;
const EXHAUSTIVE_GAMMA_GUARD: u64 = 13;
const SEARCH_NODE_GUARD: u64 = 50_000_000;

/// Result of an exhaustive chain search.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub found: bool,
    pub chain: Option<FiniteChain>,
    pub nodes_expanded: u64,
}

/// All squarefree `m` with `F(m) <= bound`, by evaluating the definition of
/// `F` on every candidate up to `bound/2`. Slow on purpose: this is the
/// oracle the recursive enumerator is checked against.
pub fn brute_dense_set(bound: u64) -> Result<Vec<u64>> {
    if bound == 0 {
        return Err(Error::Domain("brute_dense_set(0)".into()));
    }
    if bound > BRUTE_DENSE_GUARD {
        return Err(Error::GuardExceeded(format!(
            "brute_dense_set bound {bound} > {BRUTE_DENSE_GUARD}"
        )));
    }
    let mut out = vec![1u64];
    for m in 2..=bound / 2 {
        if is_squarefree(m)? && big_f(m)? <= bound {
            out.push(m);
        }
    }
    Ok(out)
}

/// Exhaustive search for a chain over `allowed_set(p)` that starts
/// `1 - p`, ends at 2, and covers `required_set(p)`. Confirms by brute
/// force that the contract is satisfiable; the production builder is
/// checked against this on small primes.
pub fn exhaustive_gamma(p: u64) -> Result<SearchResult> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if p > EXHAUSTIVE_GAMMA_GUARD {
        return Err(Error::GuardExceeded(format!(
            "exhaustive_gamma p {p} > {EXHAUSTIVE_GAMMA_GUARD}"
        )));
    }
    if p == 2 {
        return Ok(SearchResult {
            found: true,
            chain: Some(FiniteChain::validate(&[1, 2])?),
            nodes_expanded: 1,
        });
    }

    let verts = allowed_set(p)?;
    let n = verts.len();
    let idx_of = |v: u64| verts.binary_search(&v).ok();
    let required: Vec<bool> = {
        let req: HashSet<u64> = required_set(p)?.into_iter().collect();
        verts.iter().map(|v| req.contains(v)).collect()
    };
    // Adjacency lists, neighbours in increasing value order.
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&a| {
            verts
                .iter()
                .enumerate()
                .filter(|&(_, &b)| a != b && (a.is_multiple_of(b) || b.is_multiple_of(a)))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();

    let start = idx_of(1).expect("1 is always allowed");
    let second = idx_of(p).expect("p is always allowed");
    let end = idx_of(2).expect("2 is always allowed");
    let req_total = required.iter().filter(|&&r| r).count();

    let mut path = vec![start, second];
    let mut visited = vec![false; n];
    visited[start] = true;
    visited[second] = true;
    let mut req_seen = required[start] as usize + required[second] as usize;
    let mut nodes: u64 = 2;

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        cur: usize,
        adj: &[Vec<usize>],
        required: &[bool],
        end: usize,
        req_total: usize,
        req_seen: &mut usize,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        nodes: &mut u64,
    ) -> Result<bool> {
        if cur == end {
            return Ok(*req_seen == req_total);
        }
        // Required neighbours first, then smaller values; deterministic.
        let mut order: Vec<usize> = adj[cur].iter().copied().filter(|&j| !visited[j]).collect();
        order.sort_by_key(|&j| (!required[j], j));
        for j in order {
            if j == end && *req_seen + required[end] as usize != req_total {
                continue;
            }
            *nodes += 1;
            if *nodes > SEARCH_NODE_GUARD {
                return Err(Error::GuardExceeded(format!(
                    "exhaustive_gamma expanded more than {SEARCH_NODE_GUARD} nodes"
                )));
            }
            visited[j] = true;
            *req_seen += required[j] as usize;
            path.push(j);
            if dfs(j, adj, required, end, req_total, req_seen, visited, path, nodes)? {
                return Ok(true);
            }
            path.pop();
            *req_seen -= required[j] as usize;
            visited[j] = false;
        }
        Ok(false)
    }

    let found = dfs(
        second,
        &adj,
        &required,
        end,
        req_total,
        &mut req_seen,
        &mut visited,
        &mut path,
        &mut nodes,
    )?;
    let chain = if found {
        let vals: Vec<u64> = path.iter().map(|&j| verts[j]).collect();
        Some(FiniteChain::validate(&vals)?)
    } else {
        None
    };
    Ok(SearchResult {
        found,
        chain,
        nodes_expanded: nodes,
    })
}

/// Every contract-satisfying chain for tiny primes, as an exhaustive
/// census. Used to confirm forced shapes such as the unique chain at p=3.
pub fn exhaustive_gamma_census(p: u64) -> Result<Vec<Vec<u64>>> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if p > 7 {
        return Err(Error::GuardExceeded(format!("census p {p} > 7")));
    }
    if p == 2 {
        return Ok(vec![vec![1, 2]]);
    }
    let verts = allowed_set(p)?;
    let n = verts.len();
    let required: Vec<bool> = {
        let req: HashSet<u64> = required_set(p)?.into_iter().collect();
        verts.iter().map(|v| req.contains(v)).collect()
    };
    let req_total = required.iter().filter(|&&r| r).count();
    let start = verts.binary_search(&1).unwrap();
    let second = verts.binary_search(&p).unwrap();
    let end = verts.binary_search(&2).unwrap();

    let mut results = Vec::new();
    let mut visited = vec![false; n];
    visited[start] = true;
    visited[second] = true;
    let mut path = vec![start, second];
    let mut req_seen = required[start] as usize + required[second] as usize;

    #[allow(clippy::too_many_arguments)]
    fn go(
        cur: usize,
        verts: &[u64],
        required: &[bool],
        end: usize,
        req_total: usize,
        req_seen: &mut usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        results: &mut Vec<Vec<u64>>,
    ) {
        if cur == end {
            if *req_seen == req_total {
                results.push(path.iter().map(|&j| verts[j]).collect());
            }
            return;
        }
        for j in 0..verts.len() {
            if visited[j] || !(verts[cur].is_multiple_of(verts[j]) || verts[j].is_multiple_of(verts[cur])) {
                continue;
            }
            visited[j] = true;
            *req_seen += required[j] as usize;
            path.push(j);
            go(j, verts, required, end, req_total, req_seen, visited, path, results);
            path.pop();
            *req_seen -= required[j] as usize;
            visited[j] = false;
        }
    }

    go(
        second,
        &verts,
        &required,
        end,
        req_total,
        &mut req_seen,
        &mut visited,
        &mut path,
        &mut results,
    );
    Ok(results)
}

/// Re-validate a generated prefix with fresh divisibility and distinctness
/// checks, bypassing the chain module entirely. `None` means the prefix is
/// a valid chain; otherwise the description names the first failure.
pub fn recheck_sequence(seq: &[u64]) -> Option<String> {
    if seq.is_empty() {
        return Some("empty prefix".into());
    }
    let mut seen: HashSet<u64> = HashSet::with_capacity(seq.len());
    for (i, &v) in seq.iter().enumerate() {
        if v == 0 {
            return Some(format!("zero value at index {i}"));
        }
        if !seen.insert(v) {
            return Some(format!("value {v} repeats at index {i}"));
        }
        if i + 1 < seq.len() {
            let w = seq[i + 1];
            if w == 0 || !(v.is_multiple_of(w) || w.is_multiple_of(v)) {
                return Some(format!("values {v} and {w} at index {i} are not related"));
            }
        }
    }
    None
}

/// Re-validate the first `n_terms` of the permutation from scratch.
pub fn recheck_prefix(n_terms: u64, store: &crate::gamma::GammaStore) -> Result<bool> {
    let prefix = crate::permutation::generate(n_terms, store)?;
    Ok(recheck_sequence(&prefix).is_none())
}

/// Fault injection: overwrite one element.
pub fn corrupt_element(seq: &[u64], index: usize, value: u64) -> Vec<u64> {
    let mut out = seq.to_vec();
    out[index] = value;
    out
}

/// Fault injection: swap two elements.
pub fn swap_elements(seq: &[u64], i: usize, j: usize) -> Vec<u64> {
    let mut out = seq.to_vec();
    out.swap(i, j);
    out
}
