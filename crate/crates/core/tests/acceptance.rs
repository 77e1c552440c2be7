//! Acceptance suite: one check per shipped guarantee, each printed as a
//! pass/fail line. Tolerances and horizons are pinned here, not
//! configurable — loosening them is a code change, not a knob.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use chainperm::analysis;
use chainperm::arith;
use chainperm::gamma::{self, GammaStore};
use chainperm::oracle;
use chainperm::permutation::{self, Stream};

struct Outcome {
    name: &'static str,
    result: Result<String, String>,
    elapsed: Duration,
}

fn run(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let t = Instant::now();
    let result = f();
    Outcome {
        name,
        result,
        elapsed: t.elapsed(),
    }
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

#[test]
fn acceptance() {
    let mut outcomes = Vec::new();

    outcomes.push(run("forced prefix", || {
        let store = GammaStore::in_memory();
        let three = permutation::generate(3, &store).map_err(|e| e.to_string())?;
        check(three == [1, 6, 3], format!("generate(3) = {three:?}"))?;
        let ten = permutation::generate(10, &store).map_err(|e| e.to_string())?;
        check(
            ten == [1, 6, 3, 15, 30, 10, 5, 20, 2, 140],
            format!("generate(10) = {ten:?}"),
        )?;
        check(
            oracle::recheck_sequence(&ten).is_none(),
            "independent recheck failed",
        )?;
        Ok("first 10 terms exact".into())
    }));
    check_elapsed(&outcomes, Duration::from_secs(1));

    outcomes.push(run("baseline", || {
        let (seq, _) = analysis::baseline_naive(12).map_err(|e| e.to_string())?;
        check(
            seq == [1, 2, 6, 3, 12, 4, 20, 5, 35, 7, 56, 8],
            format!("first 12 = {seq:?}"),
        )?;
        let (_, stats) = analysis::baseline_naive(10_000).map_err(|e| e.to_string())?;
        check(
            stats.window_max_ratio >= 0.2375 && stats.window_max_ratio <= 0.2625,
            format!("window max {} outside [0.2375, 0.2625]", stats.window_max_ratio),
        )?;
        Ok(format!("window max {:.4}", stats.window_max_ratio))
    }));
    check_elapsed(&outcomes, Duration::from_secs(5));

    outcomes.push(run("gamma contract", || {
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            let g = gamma::build_gamma(p).map_err(|e| e.to_string())?;
            gamma::check_contract(g.chain.elems(), p)
                .map_err(|e| format!("checker failed for p={p}: {e}"))?;
            if p <= 13 {
                let search = oracle::exhaustive_gamma(p).map_err(|e| e.to_string())?;
                check(search.found, format!("no exhaustive chain for p={p}"))?;
            }
        }
        let g3 = gamma::build_gamma(3).map_err(|e| e.to_string())?;
        check(
            g3.chain.elems() == [1, 3, 6, 2],
            format!("G(3) = {:?}", g3.chain.elems()),
        )?;
        Ok("P1-P4 hold for p <= 31; existence confirmed to 13".into())
    }));
    check_elapsed(&outcomes, Duration::from_secs(120));

    outcomes.push(run("dense-set oracle equivalence", || {
        // Literal oracle calls on a sweep of bounds.
        for bound in (1..=400).chain((401..=10_000).step_by(97)) {
            let fast = arith::dense_squarefree_set(bound).map_err(|e| e.to_string())?;
            let brute = oracle::brute_dense_set(bound).map_err(|e| e.to_string())?;
            check(fast == brute, format!("mismatch at bound {bound}"))?;
        }
        // Full range via the same definitional F, hoisted out of the loop.
        let mut table = vec![(1u64, 1u64)];
        for m in 2..=5_000u64 {
            if arith::is_squarefree(m).map_err(|e| e.to_string())? {
                table.push((m, arith::big_f(m).map_err(|e| e.to_string())?));
            }
        }
        for bound in 1..=10_000u64 {
            let expect: Vec<u64> = table
                .iter()
                .filter(|&&(_, f)| f <= bound)
                .map(|&(m, _)| m)
                .collect();
            let fast = arith::dense_squarefree_set(bound).map_err(|e| e.to_string())?;
            check(fast == expect, format!("mismatch at bound {bound}"))?;
        }
        Ok("equal for every bound up to 10^4".into())
    }));
    check_elapsed(&outcomes, Duration::from_secs(60));

    outcomes.push(run("F identity", || {
        for n in 1..=10_000u64 {
            let f = arith::big_f(n).map_err(|e| e.to_string())?;
            let divs = arith::divisors(n).map_err(|e| e.to_string())?.divisors;
            if divs.len() == 1 {
                check(f == 1, format!("F(1) = {f}"))?;
                continue;
            }
            let mut attained = false;
            for w in divs.windows(2) {
                let lhs = f as u128 * w[0] as u128;
                let rhs = n as u128 * w[1] as u128;
                check(lhs >= rhs, format!("F({n})/n below gap {}:{}", w[0], w[1]))?;
                attained |= lhs == rhs;
            }
            check(attained, format!("F({n})/n attained by no gap"))?;
        }
        Ok("exact for all n <= 10^4".into())
    }));

    outcomes.push(run("growth at desk scale", || {
        let store = GammaStore::in_memory();
        let prefix = permutation::generate(100_000, &store).map_err(|e| e.to_string())?;
        check(
            oracle::recheck_sequence(&prefix).is_none(),
            "prefix is not a valid chain",
        )?;
        let distinct: HashSet<u64> = prefix.iter().copied().collect();
        check(distinct.len() == prefix.len(), "prefix repeats a value")?;
        let g1 = analysis::growth_report(100_000, &store).map_err(|e| e.to_string())?;
        check(
            g1.argmax_n <= 100,
            format!("max ratio attained at n={}", g1.argmax_n),
        )?;
        let last = *prefix.last().unwrap() as f64
            / (100_000f64 * 100_000f64.ln() * 100_000f64.ln());
        check(
            last < g1.max_ratio,
            format!("ratio at N ({last}) not below max ({})", g1.max_ratio),
        )?;
        let g2 = analysis::growth_report(200_000, &store).map_err(|e| e.to_string())?;
        check(
            g2.max_ratio == g1.max_ratio,
            format!("max grew on doubling: {} -> {}", g1.max_ratio, g2.max_ratio),
        )?;
        Ok(format!(
            "max {:.4} at n={}, stable under doubling",
            g1.max_ratio, g1.argmax_n
        ))
    }));
    check_elapsed(&outcomes, Duration::from_secs(600));

    outcomes.push(run("corollary property", || {
        let store = GammaStore::in_memory();
        let prefix = permutation::generate(100_000, &store).map_err(|e| e.to_string())?;
        for (i, w) in prefix.windows(2).enumerate() {
            let l = chainperm::chain::lcm_pair(w[0], w[1]).map_err(|e| e.to_string())?;
            check(
                l == w[0].max(w[1]),
                format!("lcm({}, {}) = {l} at n={}", w[0], w[1], i + 1),
            )?;
        }
        Ok("lcm equals the larger element at every n".into())
    }));

    outcomes.push(run("coverage to prime 1009", || {
        let store = GammaStore::in_memory();
        let mut stream = Stream::new(&store);
        let mut present = [false; 33];
        loop {
            let item = stream.next().unwrap().map_err(|e| e.to_string())?;
            if item.segment_p > 1009 {
                break;
            }
            if item.value <= 32 {
                present[item.value as usize] = true;
            }
        }
        for k in 1..=31u64 {
            check(present[k as usize], format!("k={k} missing"))?;
        }
        check(!present[32], "expected 32 to be the first gap")?;
        Ok("all k <= 31 present; min_missing = 32".into())
    }));

    outcomes.push(run("schedule regression", || {
        let golden = include_str!("data/schedule_k12.golden");
        let expect: Vec<(u64, u64)> = golden
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .map(|l| {
                let (k, q) = l.split_once(',').expect("golden line");
                (k.parse().unwrap(), q.parse().unwrap())
            })
            .collect();
        let store = GammaStore::in_memory();
        let schedule = permutation::resolve_schedule(12, &store).map_err(|e| e.to_string())?;
        check(
            schedule.insertions() == expect.as_slice(),
            format!("insertions = {:?}", schedule.insertions()),
        )?;
        Ok(format!("{:?}", schedule.insertions()))
    }));

    outcomes.push(run("length bound", || {
        let store = GammaStore::in_memory();
        let rows = analysis::length_bound_report(101, &store).map_err(|e| e.to_string())?;
        let minima: Vec<f64> = rows
            .iter()
            .filter(|r| r.p >= 5)
            .map(|r| r.running_min)
            .collect();
        let last = minima.last().copied().unwrap();
        check(last > 0.0, format!("running min {last} not positive"))?;
        let tail = &minima[minima.len() - 3..];
        let lo = tail.iter().cloned().fold(f64::MAX, f64::min);
        let hi = tail.iter().cloned().fold(f64::MIN, f64::max);
        check(
            hi <= lo * 1.2,
            format!("running minima unstable: {tail:?}"),
        )?;
        Ok(format!("running min {last:.4} over 5 <= p <= 101"))
    }));

    outcomes.push(run("determinism cold vs warm cache", || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cold = GammaStore::new(Some(dir.path().to_path_buf()), gamma::DEFAULT_BUDGET);
        let a = permutation::generate(10_000, &cold).map_err(|e| e.to_string())?;
        let sched_a = permutation::resolve_schedule(50, &cold).map_err(|e| e.to_string())?;
        drop(cold);
        let warm = GammaStore::new(Some(dir.path().to_path_buf()), gamma::DEFAULT_BUDGET);
        let b = permutation::generate(10_000, &warm).map_err(|e| e.to_string())?;
        let sched_b = permutation::resolve_schedule(50, &warm).map_err(|e| e.to_string())?;
        check(a == b, "generate(10^4) differs between cold and warm cache")?;
        let render = |v: &[u64]| {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\n")
        };
        check(render(&a) == render(&b), "serialized output differs")?;
        check(
            sched_a.insertions() == sched_b.insertions(),
            "schedules differ",
        )?;
        Ok("byte-identical output and schedules".into())
    }));

    let mut failed = 0;
    eprintln!();
    for o in &outcomes {
        match &o.result {
            Ok(detail) => {
                eprintln!("[PASS] {:<32} {:>8.2?}  {}", o.name, o.elapsed, detail)
            }
            Err(msg) => {
                failed += 1;
                eprintln!("[FAIL] {:<32} {:>8.2?}  {}", o.name, o.elapsed, msg)
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}

fn check_elapsed(outcomes: &[Outcome], limit: Duration) {
    let o = outcomes.last().unwrap();
    assert!(
        o.elapsed <= limit,
        "{} took {:?}, budget {:?}",
        o.name,
        o.elapsed,
        limit
    );
}
