//! Empirical measurement of the quantitative statements: growth of f(n)
//! against n log^2 n, lcm growth along the chain, coverage of the small
//! integers, the naive quadratic baseline, and the chain-length lower
//! bound. Reports use doubles and the natural log; every assertion made
//! along the way is an exact integer comparison.

use serde::{Serialize, Serializer};

use crate::arith::checked_mul;
use crate::chain::lcm_pair;
use crate::error::{Error, Result};
use crate::gamma::{gamma_length_stats, GammaStore};
use crate::permutation::Stream;

// Integers in JSON reports are rendered as decimal strings: consumers
// that parse JSON numbers as doubles would silently truncate past 53
// bits. Ratios are measurements and stay as doubles.
fn as_string<S: Serializer>(v: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn usize_as_string<S: Serializer>(v: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn pairs_as_strings<S: Serializer>(v: &[(u64, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&(n, r)| (n.to_string(), r)))
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthStats {
    #[serde(serialize_with = "as_string")]
    pub horizon: u64,
    pub max_ratio: f64,
    #[serde(serialize_with = "as_string")]
    pub argmax_n: u64,
    /// (n, ratio) sampled at powers of ten and at the horizon.
    #[serde(serialize_with = "pairs_as_strings")]
    pub ratios_at_checkpoints: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageStats {
    #[serde(serialize_with = "as_string")]
    pub horizon: u64,
    /// Smallest positive integer absent from the prefix.
    #[serde(serialize_with = "as_string")]
    pub min_missing: u64,
    /// Largest K with 1..=K all present; always min_missing - 1.
    #[serde(serialize_with = "as_string")]
    pub present_up_to: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineStats {
    #[serde(serialize_with = "as_string")]
    pub horizon: u64,
    /// Max of f(n)/n^2 over the trailing window [N/2, N].
    pub window_max_ratio: f64,
    #[serde(serialize_with = "as_string")]
    pub window_argmax_n: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LengthBoundRow {
    #[serde(serialize_with = "as_string")]
    pub p: u64,
    #[serde(serialize_with = "usize_as_string")]
    pub longueur: usize,
    /// longueur * ln(p) / p^2
    pub ratio: f64,
    /// Minimum of `ratio` over primes from 5 up to this row.
    pub running_min: f64,
}

fn ratio_nlog2(value: u64, n: u64) -> f64 {
    let nf = n as f64;
    value as f64 / (nf * nf.ln() * nf.ln())
}

fn is_checkpoint(n: u64, horizon: u64) -> bool {
    n == horizon || (n >= 10 && is_power_of_ten(n))
}

fn is_power_of_ten(mut n: u64) -> bool {
    while n.is_multiple_of(10) {
        n /= 10;
    }
    n == 1
}

/// Max of f(n) / (n ln^2 n) over 2 <= n <= N.
pub fn growth_report(n_max: u64, store: &GammaStore) -> Result<GrowthStats> {
    if n_max < 2 {
        return Err(Error::Domain(format!("growth_report({n_max}) needs N >= 2")));
    }
    let mut max_ratio = f64::MIN;
    let mut argmax_n = 0;
    let mut checkpoints = Vec::new();
    let mut stream = Stream::new(store);
    for _ in 0..n_max {
        let item = stream.next().unwrap()?;
        if item.n < 2 {
            continue;
        }
        let r = ratio_nlog2(item.value, item.n);
        if r > max_ratio {
            max_ratio = r;
            argmax_n = item.n;
        }
        if is_checkpoint(item.n, n_max) {
            checkpoints.push((item.n, r));
        }
    }
    Ok(GrowthStats {
        horizon: n_max,
        max_ratio,
        argmax_n,
        ratios_at_checkpoints: checkpoints,
    })
}

/// Max of [f(n), f(n+1)] / (n ln^2 n) over 2 <= n <= N-1. Also asserts,
/// exactly, that the lcm of every adjacent pair is the larger element —
/// the chain property that makes the lcm bound follow from the growth
/// bound.
pub fn lcm_report(n_max: u64, store: &GammaStore) -> Result<GrowthStats> {
    if n_max < 2 {
        return Err(Error::Domain(format!("lcm_report({n_max}) needs N >= 2")));
    }
    let mut max_ratio = f64::MIN;
    let mut argmax_n = 0;
    let mut checkpoints = Vec::new();
    let mut stream = Stream::new(store);
    let mut prev = stream.next().unwrap()?.value;
    for _ in 1..n_max {
        let item = stream.next().unwrap()?;
        let l = lcm_pair(prev, item.value)?;
        if l != prev.max(item.value) {
            return Err(Error::Domain(format!(
                "lcm({prev},{}) = {l} is not the larger element at n={}",
                item.value,
                item.n - 1
            )));
        }
        let n = item.n - 1;
        if n >= 2 {
            let r = ratio_nlog2(l, n);
            if r > max_ratio {
                max_ratio = r;
                argmax_n = n;
            }
            if is_checkpoint(n, n_max - 1) {
                checkpoints.push((n, r));
            }
        }
        prev = item.value;
    }
    Ok(GrowthStats {
        horizon: n_max,
        max_ratio,
        argmax_n,
        ratios_at_checkpoints: checkpoints,
    })
}

/// Smallest positive integer missing from f(1..N).
pub fn coverage_report(n_max: u64, store: &GammaStore) -> Result<CoverageStats> {
    if n_max == 0 {
        return Err(Error::Domain("coverage_report(0)".into()));
    }
    coverage_of_stream(n_max, Stream::new(store).map(|r| r.map(|i| i.value)))
}

/// Coverage over an arbitrary value stream; lets callers bound the run by
/// segments instead of a term count.
pub fn coverage_of_stream<I>(horizon: u64, values: I) -> Result<CoverageStats>
where
    I: IntoIterator<Item = Result<u64>>,
{
    // Presence bitmap for values up to horizon+1: the smallest missing
    // value can never exceed N+1.
    let cap = usize::try_from(horizon + 1).map_err(|_| Error::Overflow("coverage bitmap"))?;
    let mut present = vec![false; cap + 1];
    let mut count: u64 = 0;
    for v in values {
        let v = v?;
        if let Ok(small) = usize::try_from(v) {
            if small <= cap {
                present[small] = true;
            }
        }
        count += 1;
        if count == horizon {
            break;
        }
    }
    let mut min_missing = 1u64;
    while (min_missing as usize) <= cap && present[min_missing as usize] {
        min_missing += 1;
    }
    Ok(CoverageStats {
        horizon: count,
        min_missing,
        present_up_to: min_missing - 1,
    })
}

/// The quadratic-growth baseline permutation: after 1 and 2, repeatedly
/// bridge from the current value x to the smallest unused integer y via
/// their product, emitting x*y then y.
pub fn baseline_naive(n_max: u64) -> Result<(Vec<u64>, BaselineStats)> {
    if n_max == 0 {
        return Err(Error::Domain("baseline_naive(0)".into()));
    }
    let mut seq: Vec<u64> = vec![1];
    let mut used: std::collections::HashSet<u64> = [1u64, 2].into_iter().collect();
    if n_max >= 2 {
        seq.push(2);
    }
    let mut x: u64 = 2;
    let mut y_cursor: u64 = 3;
    while (seq.len() as u64) < n_max {
        let mut y = y_cursor;
        while used.contains(&y) {
            y += 1;
        }
        y_cursor = y + 1;
        let prod = checked_mul(x, y, "baseline product")?;
        used.insert(prod);
        used.insert(y);
        seq.push(prod);
        if (seq.len() as u64) < n_max {
            seq.push(y);
        }
        x = y;
    }
    let lo = (n_max / 2).max(1);
    let mut window_max = f64::MIN;
    let mut window_arg = 0u64;
    for (i, &v) in seq.iter().enumerate() {
        let n = i as u64 + 1;
        if n < lo {
            continue;
        }
        let r = v as f64 / (n as f64 * n as f64);
        if r > window_max {
            window_max = r;
            window_arg = n;
        }
    }
    Ok((
        seq,
        BaselineStats {
            horizon: n_max,
            window_max_ratio: window_max,
            window_argmax_n: window_arg,
        },
    ))
}

/// Per-prime chain length against p^2 / ln p, with the running minimum
/// over p >= 5 as the empirical stand-in for the lower-bound constant.
pub fn length_bound_report(p_max: u64, store: &GammaStore) -> Result<Vec<LengthBoundRow>> {
    if p_max < 3 {
        return Err(Error::Domain(format!("length_bound_report({p_max})")));
    }
    let mut rows = Vec::new();
    let mut running = f64::MAX;
    for (p, longueur, ratio) in gamma_length_stats(store, p_max)? {
        if p >= 5 {
            running = running.min(ratio);
        }
        rows.push(LengthBoundRow {
            p,
            longueur,
            ratio,
            running_min: if running == f64::MAX { f64::NAN } else { running },
        });
    }
    Ok(rows)
}

/// Two-column CSV (n, ratio) ready for plotting.
pub fn checkpoints_csv(stats: &GrowthStats) -> String {
    let mut out = String::from("n,ratio\n");
    for (n, r) in &stats.ratios_at_checkpoints {
        out.push_str(&format!("{n},{r}\n"));
    }
    out
}
