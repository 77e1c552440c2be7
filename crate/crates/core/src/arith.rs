//! Prime and factorization primitives, the dense-divisor function `F`, and
//! enumeration of squarefree integers with `F` below a bound.
//!
//! All arithmetic is checked: an overflow is an error, never a wrapped value.

use crate::error::{Error, Result};

/// Prime factorization with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub pairs: Vec<(u64, u32)>,
}

impl Factorization {
    /// The factored value, recomputed from the pairs.
    pub fn value(&self) -> Result<u64> {
        let mut v: u64 = 1;
        for &(p, e) in &self.pairs {
            for _ in 0..e {
                v = checked_mul(v, p, "factorization product")?;
            }
        }
        Ok(v)
    }
}

/// All divisors of `n`, strictly increasing, starting at 1 and ending at `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorList {
    pub divisors: Vec<u64>,
}

impl DivisorList {
    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.divisors.is_empty()
    }
}

pub(crate) fn checked_mul(a: u64, b: u64, ctx: &'static str) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow(ctx))
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin over the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes up to `limit`, increasing. `limit` must be at least 2.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::Domain(format!(
            "sieve_primes needs limit >= 2, got {limit}"
        )));
    }
    let n = usize::try_from(limit).map_err(|_| Error::Overflow("sieve size"))?;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Ok(primes)
}

/// Smallest prime strictly greater than `p`.
pub fn next_prime(p: u64) -> Result<u64> {
    let mut c = p.checked_add(1).ok_or(Error::Overflow("next_prime"))?;
    loop {
        if is_prime(c) {
            return Ok(c);
        }
        c = c.checked_add(1).ok_or(Error::Overflow("next_prime"))?;
    }
}

/// Largest prime strictly below the prime `p`; `prec_prime(2)` is 1, the
/// sentinel sitting below the first prime.
pub fn prec_prime(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("prec_prime({p}): not a prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let mut c = p - 1;
    while c >= 2 {
        if is_prime(c) {
            return Ok(c);
        }
        c -= 1;
    }
    unreachable!("every prime >= 3 has a predecessor prime")
}

pub fn factorize(mut n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Domain("factorize(0)".into()));
    }
    let mut pairs = Vec::new();
    let mut d: u64 = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0u32;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            pairs.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        pairs.push((n, 1));
    }
    Ok(Factorization { pairs })
}

/// Largest prime factor; `p_plus(1)` is 1 by convention.
pub fn p_plus(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("p_plus(0)".into()));
    }
    if n == 1 {
        return Ok(1);
    }
    Ok(factorize(n)?.pairs.last().unwrap().0)
}

/// Smallest prime factor. Undefined at 1, which is a domain error rather
/// than a sentinel: a silent value here would corrupt `F`.
pub fn p_minus(n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::Domain(format!("p_minus({n}) is undefined")));
    }
    Ok(factorize(n)?.pairs[0].0)
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::Domain("is_squarefree(0)".into()));
    }
    Ok(factorize(n)?.pairs.iter().all(|&(_, e)| e == 1))
}

/// All divisors of `n`, sorted increasing.
pub fn divisors(n: u64) -> Result<DivisorList> {
    if n == 0 {
        return Err(Error::Domain("divisors(0)".into()));
    }
    let f = factorize(n)?;
    let mut divs: Vec<u64> = vec![1];
    for &(p, e) in &f.pairs {
        let prev = divs.clone();
        let mut pe: u64 = 1;
        for _ in 0..e {
            pe = checked_mul(pe, p, "divisor enumeration")?;
            for &d in &prev {
                divs.push(checked_mul(d, pe, "divisor enumeration")?);
            }
        }
    }
    divs.sort_unstable();
    Ok(DivisorList { divisors: divs })
}

/// The dense-divisor function: `F(1) = 1`, otherwise the maximum of
/// `d * P^-(d)` over divisors `d > 1` of `n`.
pub fn big_f(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("big_f(0)".into()));
    }
    if n == 1 {
        return Ok(1);
    }
    let f = factorize(n)?;
    // Enumerate divisors together with their smallest prime factor.
    let mut stack: Vec<(u64, u64)> = vec![(1, 0)]; // (divisor, smallest prime or 0)
    for &(p, e) in f.pairs.iter().rev() {
        let mut next = Vec::with_capacity(stack.len() * (e as usize + 1));
        for &(d, mn) in &stack {
            next.push((d, mn));
            let mut dp = d;
            for _ in 0..e {
                dp = checked_mul(dp, p, "big_f divisor")?;
                next.push((dp, p));
            }
        }
        stack = next;
    }
    let mut best: u64 = 0;
    for (d, mn) in stack {
        if d > 1 {
            let v = checked_mul(d, mn, "big_f")?;
            best = best.max(v);
        }
    }
    Ok(best)
}

/// Exact test `F(n) <= (num/den) * n`, compared as cross-multiplied
/// integers. No floating point is involved.
pub fn is_y_dense(n: u64, y_num: u64, y_den: u64) -> Result<bool> {
    if n == 0 || y_num == 0 || y_den == 0 {
        return Err(Error::Domain(format!(
            "is_y_dense({n}, {y_num}/{y_den}): arguments must be positive"
        )));
    }
    let f = big_f(n)?;
    Ok((f as u128) * (y_den as u128) <= (y_num as u128) * (n as u128))
}

/// All squarefree `m` with `F(m) <= bound`, increasing.
///
/// Enumerates by recursive extension over an increasing largest prime
/// factor, using `F(s*q) = max(q^2, q*F(s))` for `q > P^+(s)`; once `F`
/// exceeds the bound no further extension can recover, so the search is
/// exact without factoring anything.
pub fn dense_squarefree_set(bound: u64) -> Result<Vec<u64>> {
    if bound == 0 {
        return Err(Error::Domain("dense_squarefree_set(0)".into()));
    }
    let mut out = vec![1u64];
    if bound < 4 {
        return Ok(out);
    }
    // q^2 <= bound limits the usable primes.
    let qmax = bound.isqrt();
    let primes = sieve_primes(qmax.max(2))?;
    // Depth-first over (value, F(value), index of next usable prime).
    let mut stack: Vec<(u64, u64, usize)> = vec![(1, 1, 0)];
    while let Some((s, fs, lo)) = stack.pop() {
        for (i, &q) in primes.iter().enumerate().skip(lo) {
            let q2 = q * q;
            if q2 > bound {
                break;
            }
            let lifted = match checked_mul(q, fs, "dense set F") {
                Ok(v) => v,
                Err(_) => continue,
            };
            let f_new = q2.max(lifted);
            if f_new > bound {
                continue;
            }
            let m = checked_mul(s, q, "dense set value")?;
            out.push(m);
            stack.push((m, f_new, i + 1));
        }
    }
    out.sort_unstable();
    Ok(out)
}
