//! Construction, certification and caching of the finite chains `G(p)`.
//!
//! For a prime `p`, `G(p)` is a finite chain subject to a four-part
//! contract: it is `[1, 2]` for `p = 2`; for `p >= 3` it runs `1 - p - ... - 2`;
//! every element is squarefree, `p`-smooth and at most `2p^2`; and it
//! contains every squarefree `m` with `F(m) <= p^2`. Any chain meeting the
//! contract works for the downstream permutation, so the builder is free to
//! choose its own shape as long as the result is deterministic.
//!
//! The builder partitions the mandatory elements by largest prime factor:
//! an element `m = w * c` with `P^+(m) = w` satisfies `F(m) <= B` exactly
//! when `w^2 <= B` and `F(c) <= B/w`, so the multiples of each prime `w`
//! form a scaled copy of the same problem at bound `B/w`. The chain walks
//! the primes downward, one block per prime, entering every block at its
//! bare prime (always adjacency-safe, since the previous junction value is
//! a multiple of it) and leaving either through a cofactor divisible by
//! the next prime down (a free junction) or through the block's `2w`
//! element followed by the bridge `2 * w * w'`. Whenever that bridge is
//! needed, `F` of it provably exceeds the bound, so bridges never collide
//! with mandatory elements; they are pure helpers below the `2p^2` cap.
//!
//! Every constructed chain is re-verified from scratch by an independent
//! checker before use; a defect is a hard error, never a silently invalid
//! chain.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::arith::{dense_squarefree_set, is_prime, prec_prime, sieve_primes};
use crate::chain::FiniteChain;
use crate::error::{Error, Result};

/// Default work budget per prime, counted in element placements.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A chain certified against the four-property contract for its prime.
#[derive(Debug, Clone)]
pub struct GammaChain {
    pub p: u64,
    pub chain: FiniteChain,
    elem_set: HashSet<u64>,
}

impl GammaChain {
    pub fn contains(&self, m: u64) -> bool {
        self.elem_set.contains(&m)
    }

    pub fn longueur(&self) -> usize {
        self.chain.longueur()
    }
}

/// Every squarefree `m` with `F(m) <= p^2`: the elements the contract
/// forces into `G(p)`.
pub fn required_set(p: u64) -> Result<Vec<u64>> {
    ensure_prime(p)?;
    dense_squarefree_set(p * p)
}

/// Every squarefree `p`-smooth `m <= 2p^2`: the elements the contract
/// permits in `G(p)`.
pub fn allowed_set(p: u64) -> Result<Vec<u64>> {
    ensure_prime(p)?;
    let cap = 2 * p * p;
    let primes = sieve_primes(p)?;
    let mut out = vec![1u64];
    let mut stack: Vec<(u64, usize)> = vec![(1, 0)];
    while let Some((v, lo)) = stack.pop() {
        for (i, &q) in primes.iter().enumerate().skip(lo) {
            match v.checked_mul(q) {
                Some(m) if m <= cap => {
                    out.push(m);
                    stack.push((m, i + 1));
                }
                _ => break,
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn ensure_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok(())
}

/// Independent contract checker. Re-derives every property from arith
/// primitives; shares no state with the builder.
pub fn check_contract(elems: &[u64], p: u64) -> Result<()> {
    ensure_prime(p)?;
    let fail = |what: String| Error::GammaSearch { p, reason: what };

    FiniteChain::validate(elems)?;
    if p == 2 {
        if elems != [1, 2] {
            return Err(fail(format!("P1: chain for p=2 must be [1, 2], got {elems:?}")));
        }
        return Ok(());
    }
    if elems.first() != Some(&1) || elems.get(1) != Some(&p) || elems.last() != Some(&2) {
        return Err(fail("P2: chain must run 1 - p - ... - 2".into()));
    }

    let cap = 2 * p * p;
    let primes = sieve_primes(p)?;
    for &m in elems {
        if m > cap {
            return Err(fail(format!("P3: element {m} exceeds {cap}")));
        }
        let mut rest = m;
        for &q in &primes {
            if q * q > rest {
                break;
            }
            if rest % q == 0 {
                rest /= q;
                if rest % q == 0 {
                    return Err(fail(format!("P3: element {m} is not squarefree")));
                }
            }
        }
        // Whatever remains is a single prime factor or 1; it must not
        // exceed p.
        if rest > p {
            return Err(fail(format!("P3: element {m} is not {p}-smooth")));
        }
    }

    let set: HashSet<u64> = elems.iter().copied().collect();
    for m in required_set(p)? {
        if !set.contains(&m) {
            return Err(fail(format!("P4: required element {m} missing")));
        }
    }
    Ok(())
}

/// Which element a recursive block chain must end at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flavor {
    /// End at exactly 2.
    End2,
    /// End at a multiple of the given prime (possibly the bare prime).
    EndPrime(u64),
}

struct Builder {
    p: u64,
    budget: u64,
}

impl Builder {
    fn spend(&mut self, n: u64) -> Result<()> {
        if self.budget < n {
            return Err(Error::BudgetExceeded { p: self.p });
        }
        self.budget -= n;
        Ok(())
    }

    /// Chain over `{1} + {c squarefree, P^+(c) <= smooth, F(c) <= bound}`
    /// plus helper elements, starting at 1 and ending per `flavor`.
    fn chain_rec(&mut self, bound: u64, smooth: u64, flavor: Flavor) -> Result<Vec<u64>> {
        // Primes with blocks: w^2 <= bound keeps the bare prime itself in
        // the set; larger primes contribute nothing.
        let wmax = bound.isqrt().min(smooth);
        let mut out = vec![1u64];
        if wmax < 2 {
            return Ok(out);
        }
        let primes_desc: Vec<u64> = {
            let mut v = sieve_primes(wmax)?;
            v.reverse();
            v
        };
        let rho = match flavor {
            Flavor::EndPrime(r) if r >= 3 => Some(r),
            _ => None,
        };
        let main: Vec<u64> = primes_desc
            .iter()
            .copied()
            .filter(|&w| Some(w) != rho)
            .collect();
        self.blocks_desc(bound, &main, None, &mut out)?;

        if let Some(r) = rho {
            // The chain must end at a multiple of rho: traverse the rho
            // block last and in reverse, entering at 2*rho from the final
            // even element and ending at the bare prime.
            let sub_bound = bound / r;
            if sub_bound < 4 {
                out.push(2 * r);
                out.push(r);
            } else {
                let sub = self.chain_rec(sub_bound, prec_prime(r)?, Flavor::End2)?;
                out.extend(sub.iter().rev().map(|&c| c * r));
            }
            self.spend(2)?;
        }
        Ok(out)
    }

    /// Emit one block per prime of `main` (descending) with junctions,
    /// each block entered at its bare prime. `trailer` is the prime the
    /// final junction must lead to when the caller continues the chain
    /// itself.
    fn blocks_desc(
        &mut self,
        bound: u64,
        main: &[u64],
        trailer: Option<u64>,
        out: &mut Vec<u64>,
    ) -> Result<()> {
        for (i, &w) in main.iter().enumerate() {
            let next_down = main.get(i + 1).copied().or(trailer);
            let sub_bound = bound / w;
            if w == 2 {
                // The 2-block is the bare element: cofactors would need a
                // prime below 2. The previous junction always ends even.
                out.push(2);
            } else if sub_bound < 4 {
                out.push(w);
            } else {
                let sub_flavor = match next_down {
                    Some(wn) if wn >= 3 && wn * wn <= sub_bound => Flavor::EndPrime(wn),
                    _ => Flavor::End2,
                };
                let sub = self.chain_rec(sub_bound, prec_prime(w)?, sub_flavor)?;
                out.extend(sub.iter().map(|&c| c * w));
            }
            self.spend(4)?;
            // Junction toward the next block down.
            if let Some(wn) = next_down {
                let exit = *out.last().unwrap();
                if exit == w {
                    // Bare block: bridge w*wn, which has F > bound here
                    // because the cofactor set of w was empty.
                    out.push(if wn == 2 { 2 * w } else { w * wn });
                } else if exit.is_multiple_of(wn) || (wn == 2 && exit.is_multiple_of(2)) {
                    // Free junction into the bare prime wn.
                } else {
                    // exit is the block's 2w element; 2*w*wn is never a
                    // mandatory element when this branch is reached.
                    out.push(2 * w * wn);
                }
            }
        }
        Ok(())
    }

    /// Assembly used for p >= 19. The plain descending layout connects the
    /// two largest blocks through a `2*p*p-` bridge close to the front of
    /// the chain, the largest value the contract permits; spreading the
    /// top instead pivots through the bare 3 and re-enters the second
    /// block at its 3-cofactor, so the largest helper drops to about half
    /// the cap and the chain's growth stays dominated by its opening
    /// values.
    ///
    /// Layout: 1, p-block (ends at a 3-multiple cofactor), 3, p1-block in
    /// reverse (entered at 3*p1, ends bare), the minimal bridge p1*p2,
    /// then the ordinary descending blocks down to 11, a 7-block pinned to
    /// end at its 6-cofactor, the bare 6, and the fixed 5-family tail.
    fn build_spread(&mut self, bound: u64) -> Result<Vec<u64>> {
        let p = self.p;
        let p1 = prec_prime(p)?;
        let p2 = prec_prime(p1)?;
        let mut out = vec![1u64];

        // p-block: cofactor bound is exactly p.
        let head = self.chain_rec(bound / p, p1, Flavor::EndPrime(3))?;
        out.extend(head.iter().map(|&c| c * p));
        out.push(3);

        // Second block reversed: enters at 3*p1, exits at the bare prime.
        let climb = self.chain_rec(bound / p1, p2, Flavor::EndPrime(3))?;
        out.extend(climb.iter().rev().map(|&c| c * p1));
        out.push(p1 * p2);

        // Ordinary descent from p2 down to 11, finishing toward 7.
        let mains: Vec<u64> = {
            let mut v: Vec<u64> = sieve_primes(p2)?.into_iter().filter(|&w| w > 7).collect();
            v.reverse();
            v
        };
        self.blocks_desc(bound, &mains, Some(7), &mut out)?;

        // 7-block ending at its 6-cofactor, then the bare 6 and the
        // 5-family, which closes at 2.
        let b7 = bound / 7;
        out.extend([7, 21, 105, 35, 70]);
        if 60 <= b7 {
            out.push(210);
        }
        out.extend([14, 42, 6, 30, 15, 5, 10, 2]);
        self.spend(16)?;
        Ok(out)
    }
}

/// Build `G(p)` deterministically with an explicit work budget.
pub fn build_gamma_with_budget(p: u64, budget: u64) -> Result<GammaChain> {
    ensure_prime(p)?;
    if p == 2 {
        let chain = FiniteChain::validate(&[1, 2])?;
        return certify(chain, p);
    }
    let bound = p
        .checked_mul(p)
        .ok_or(Error::Overflow("gamma bound p^2"))?;
    bound.checked_mul(2).ok_or(Error::Overflow("gamma cap 2p^2"))?;
    let mut b = Builder { p, budget };
    // Below 19 the spread layout's fixed tail does not have room for its
    // pivot elements; the plain descending layout is also already tight
    // there.
    let elems = if p >= 19 {
        b.build_spread(bound)?
    } else {
        b.chain_rec(bound, p, Flavor::End2)?
    };
    certify(FiniteChain::validate(&elems)?, p)
}

/// Build `G(p)` with the default budget.
pub fn build_gamma(p: u64) -> Result<GammaChain> {
    build_gamma_with_budget(p, DEFAULT_BUDGET)
}

fn certify(chain: FiniteChain, p: u64) -> Result<GammaChain> {
    check_contract(chain.elems(), p)?;
    let elem_set = chain.elems().iter().copied().collect();
    Ok(GammaChain { p, chain, elem_set })
}

/// Memoizing store for built chains, optionally persisted to disk.
///
/// Cache files hold one chain per prime; loads re-verify the full contract
/// before the chain is trusted. A chain in memory is immutable and shared.
pub struct GammaStore {
    cache_dir: Option<PathBuf>,
    budget: u64,
    mem: Mutex<HashMap<u64, Arc<GammaChain>>>,
}

impl GammaStore {
    pub fn new(cache_dir: Option<PathBuf>, budget: u64) -> GammaStore {
        GammaStore {
            cache_dir,
            budget,
            mem: Mutex::new(HashMap::new()),
        }
    }

    pub fn in_memory() -> GammaStore {
        GammaStore::new(None, DEFAULT_BUDGET)
    }

    pub fn get(&self, p: u64) -> Result<Arc<GammaChain>> {
        if let Some(g) = self.mem.lock().unwrap().get(&p) {
            return Ok(g.clone());
        }
        let built = match self.load_from_disk(p)? {
            Some(g) => g,
            None => {
                let g = build_gamma_with_budget(p, self.budget)?;
                self.store_to_disk(&g)?;
                g
            }
        };
        let arc = Arc::new(built);
        let mut mem = self.mem.lock().unwrap();
        // A racing builder may have inserted already; keep the first so all
        // readers share one copy. Both are identical by determinism.
        Ok(mem.entry(p).or_insert(arc).clone())
    }

    pub fn contains(&self, p: u64, m: u64) -> Result<bool> {
        Ok(self.get(p)?.contains(m))
    }

    fn cache_path(&self, p: u64) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("gamma_{p}.chain")))
    }

    fn load_from_disk(&self, p: u64) -> Result<Option<GammaChain>> {
        let Some(path) = self.cache_path(p) else {
            return Ok(None);
        };
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let chain = parse_cache_file(&text, p, &path)?;
        Ok(Some(certify(chain, p)?))
    }

    fn store_to_disk(&self, g: &GammaChain) -> Result<()> {
        let Some(path) = self.cache_path(g.p) else {
            return Ok(());
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut text = format!("GAMMA v1 p={}\n", g.p);
        for &m in g.chain.elems() {
            text.push_str(&m.to_string());
            text.push('\n');
        }
        text.push_str("CHECKED=P1P2P3P4\n");
        // Write-then-rename keeps concurrent readers off half-written files.
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

fn parse_cache_file(text: &str, p: u64, path: &Path) -> Result<FiniteChain> {
    let corrupt = |reason: &str| Error::Corrupt {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| corrupt("empty file"))?;
    if header != format!("GAMMA v1 p={p}") {
        return Err(corrupt("bad header"));
    }
    let mut elems = Vec::new();
    let mut checked = false;
    for line in lines {
        if line == "CHECKED=P1P2P3P4" {
            checked = true;
            break;
        }
        let v: u64 = line
            .parse()
            .map_err(|_| corrupt(&format!("bad element line {line:?}")))?;
        elems.push(v);
    }
    if !checked {
        return Err(corrupt("missing CHECKED trailer"));
    }
    FiniteChain::validate(&elems)
}

/// One row per prime up to `p_max`: the prime, the chain length, and
/// `longueur * ln(p) / p^2`.
pub fn gamma_length_stats(store: &GammaStore, p_max: u64) -> Result<Vec<(u64, usize, f64)>> {
    if p_max < 2 {
        return Err(Error::Domain(format!("gamma_length_stats({p_max})")));
    }
    let mut rows = Vec::new();
    for p in sieve_primes(p_max)? {
        let g = store.get(p)?;
        let l = g.longueur();
        let ratio = l as f64 * (p as f64).ln() / (p as f64 * p as f64);
        rows.push((p, l, ratio));
    }
    Ok(rows)
}
