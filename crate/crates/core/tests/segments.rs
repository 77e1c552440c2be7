//! Segment-level invariants of the emitted stream: junction shapes and
//! per-segment value bounds, checked across a real range of primes.

use chainperm::arith::{next_prime, sieve_primes};
use chainperm::permutation::{segment_for, SegmentKind};
use chainperm::{GammaStore, Schedule};

#[test]
fn segment_junctions_and_value_bounds() {
    let store = GammaStore::in_memory();
    let mut schedule = Schedule::new();
    let primes = sieve_primes(211).unwrap();
    let mut prev_end: Option<u64> = None;
    for &p in &primes {
        schedule.resolve_to(p.isqrt(), &store).unwrap();
        let seg = segment_for(p, &schedule, &store).unwrap();
        let p_star = next_prime(p).unwrap();
        let p_star2 = next_prime(p_star).unwrap();

        // A segment ends at the prime following p; the next segment opens
        // at a multiple of its own prime's value, so junctions always hold.
        assert_eq!(seg.elems.last(), p_star, "segment end for p={p}");
        if let Some(end) = prev_end {
            assert_eq!(seg.elems.first() % end, 0, "junction into p={p}");
        }
        prev_end = Some(seg.elems.last());

        // Every element stays within twice the square of the next prime
        // times the one after; insertion heads obey it through q_k >= k^2.
        let cap = 2 * p_star * p_star * p_star2;
        for &v in seg.elems.elems() {
            assert!(v <= cap, "element {v} of segment p={p} exceeds {cap}");
        }

        match seg.kind {
            SegmentKind::Insertion(k) => {
                assert!(k * k <= p, "insertion k={k} at p={p}");
                assert_eq!(seg.elems.elems()[0], p * k * k);
                assert_eq!(seg.elems.elems()[1], k);
                assert_eq!(seg.elems.elems()[2], p_star * p * k * k);
            }
            SegmentKind::Natural => {}
        }
    }
}

#[test]
fn recheck_prefix_entry_point() {
    let store = GammaStore::in_memory();
    assert!(chainperm::oracle::recheck_prefix(1, &store).unwrap());
    assert!(chainperm::oracle::recheck_prefix(5_000, &store).unwrap());
}
