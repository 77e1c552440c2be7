//! The insertion induction and the streaming chain-permutation.
//!
//! The stream opens with 1 and then concatenates one segment per prime in
//! increasing order. A segment is normally `D(p)` (the chain `G(p)` with
//! its leading 1 rotated to the back, everything scaled by the next prime).
//! When `p` was chosen as the insertion prime `q_k` for some integer `k`
//! that the chain so far misses, the segment is prefixed by
//! `p*k^2 - k - p'*p*k^2`, which drags `k` into the image while keeping
//! divisibility adjacency at both ends.

use std::collections::BTreeSet;
use std::collections::VecDeque;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::arith::{checked_mul, is_prime, is_squarefree, next_prime, p_plus, prec_prime};
use crate::chain::{make_d, FiniteChain};
use crate::error::{Error, Result};
use crate::gamma::GammaStore;

/// The monotone record of insertion decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// (k, q_k) for every k that forced an insertion, increasing in both.
    insertions: Vec<(u64, u64)>,
    /// Last q assigned; starts at the sentinel q_0 = 1.
    q_prev: u64,
    /// Largest k examined so far.
    resolved_up_to: u64,
    /// Values injected by past insertions that future k may still hit.
    extra_values: BTreeSet<u64>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::new()
    }
}

impl Schedule {
    pub fn new() -> Schedule {
        Schedule {
            insertions: Vec::new(),
            q_prev: 1,
            resolved_up_to: 0,
            extra_values: BTreeSet::new(),
        }
    }

    pub fn insertions(&self) -> &[(u64, u64)] {
        &self.insertions
    }

    pub fn resolved_up_to(&self) -> u64 {
        self.resolved_up_to
    }

    /// The insertion index k for which `p = q_k`, if any.
    pub fn insertion_k_for(&self, p: u64) -> Option<u64> {
        self.insertions
            .binary_search_by_key(&p, |&(_, q)| q)
            .ok()
            .map(|i| self.insertions[i].0)
    }

    /// Decide q_k for every k up to `k_max`, in order. A k already in the
    /// image keeps q unchanged; otherwise q_k is the smallest prime that
    /// exceeds both its predecessor and k^2, which pins the whole stream
    /// deterministically.
    pub fn resolve_to(&mut self, k_max: u64, store: &GammaStore) -> Result<()> {
        while self.resolved_up_to < k_max {
            let k = self.resolved_up_to + 1;
            if !in_natural_image(k, self, store)? {
                let floor = self.q_prev.max(k.checked_mul(k).ok_or(Error::Overflow("k^2"))? - 1);
                let q = next_prime(floor)?;
                let q_star = next_prime(q)?;
                let k2 = k * k;
                let head = checked_mul(q, k2, "insertion head q*k^2")?;
                let bridge = checked_mul(q_star, head, "insertion bridge")?;
                self.insertions.push((k, q));
                self.q_prev = q;
                self.extra_values.insert(head);
                self.extra_values.insert(k);
                self.extra_values.insert(bridge);
            }
            self.resolved_up_to = k;
            // Values at or below k can never be queried again.
            self.extra_values = self.extra_values.split_off(&(k + 1));
        }
        Ok(())
    }
}

/// Is `k` already in the image of the chain built so far?
///
/// Membership in some `D(p)` is decided through the unique candidate: an
/// element of `D(p)` is `p'' * m` with `p''` the prime after `p` and `m`
/// a `p`-smooth element of `G(p)`, so its largest prime factor names the
/// only segment that could contain it.
pub fn in_natural_image(k: u64, schedule: &Schedule, store: &GammaStore) -> Result<bool> {
    if k == 0 {
        return Err(Error::Domain("in_natural_image(0)".into()));
    }
    if k == 1 {
        return Ok(true);
    }
    if schedule.extra_values.contains(&k) {
        return Ok(true);
    }
    if !is_squarefree(k)? {
        return Ok(false);
    }
    let big = p_plus(k)?;
    if big < 3 {
        // k = 2: no segment multiplier can be 2.
        return Ok(false);
    }
    let p = prec_prime(big)?;
    let m = k / big;
    store.contains(p, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Natural,
    Insertion(u64),
}

/// One emitted block of the infinite chain.
#[derive(Debug, Clone)]
pub struct Segment {
    pub p: u64,
    pub kind: SegmentKind,
    pub elems: FiniteChain,
}

/// The segment emitted at prime `p`. The schedule must already be resolved
/// for every k with k^2 <= p, since those are the only k whose insertion
/// prime could be p.
pub fn segment_for(p: u64, schedule: &Schedule, store: &GammaStore) -> Result<Segment> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("segment_for({p}): not prime")));
    }
    if schedule.resolved_up_to < p.isqrt() {
        return Err(Error::Domain(format!(
            "schedule resolved to {} but p={p} needs {}",
            schedule.resolved_up_to,
            p.isqrt()
        )));
    }
    let gamma = store.get(p)?;
    let d = make_d(&gamma.chain, p)?;
    match schedule.insertion_k_for(p) {
        None => Ok(Segment {
            p,
            kind: SegmentKind::Natural,
            elems: d,
        }),
        Some(k) => {
            let k2 = k * k;
            let head = checked_mul(p, k2, "segment head p*k^2")?;
            let p_star = next_prime(p)?;
            let bridge = checked_mul(p_star, head, "segment bridge")?;
            let mut elems = vec![head, k, bridge];
            elems.extend_from_slice(d.elems());
            Ok(Segment {
                p,
                kind: SegmentKind::Insertion(k),
                elems: FiniteChain::validate(&elems)?,
            })
        }
    }
}

/// One value of the stream, tagged with its position and owning segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamItem {
    /// 1-based position n.
    pub n: u64,
    /// f(n).
    pub value: u64,
    /// The prime whose segment produced this value; the leading 1 is
    /// reported with the first segment's prime.
    pub segment_p: u64,
    pub kind: SegmentKind,
}

/// Streaming generator of the chain-permutation. The state is resumable:
/// it can be checkpointed to disk and picked up elsewhere.
pub struct Stream<'a> {
    store: &'a GammaStore,
    schedule: Schedule,
    position: u64,
    last_value: u64,
    current_prime: u64,
    current_kind: SegmentKind,
    buffer: VecDeque<u64>,
}

impl<'a> Stream<'a> {
    pub fn new(store: &'a GammaStore) -> Stream<'a> {
        Stream {
            store,
            schedule: Schedule::new(),
            position: 0,
            last_value: 0,
            current_prime: 0,
            current_kind: SegmentKind::Natural,
            buffer: VecDeque::new(),
        }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// The value most recently emitted; 0 before the first item.
    pub fn last_value(&self) -> u64 {
        self.last_value
    }

    fn refill(&mut self) -> Result<()> {
        let p = if self.current_prime == 0 {
            2
        } else {
            next_prime(self.current_prime)?
        };
        self.schedule.resolve_to(p.isqrt(), self.store)?;
        let seg = segment_for(p, &self.schedule, self.store)?;
        self.current_prime = p;
        self.current_kind = seg.kind;
        self.buffer = seg.elems.elems().iter().copied().collect();
        Ok(())
    }

    fn next_item(&mut self) -> Result<StreamItem> {
        if self.position == 0 {
            self.position = 1;
            self.last_value = 1;
            return Ok(StreamItem {
                n: 1,
                value: 1,
                segment_p: 2,
                kind: SegmentKind::Natural,
            });
        }
        while self.buffer.is_empty() {
            self.refill()?;
        }
        let value = self.buffer.pop_front().unwrap();
        self.position += 1;
        self.last_value = value;
        Ok(StreamItem {
            n: self.position,
            value,
            segment_p: self.current_prime,
            kind: self.current_kind,
        })
    }

    /// Write the resumable state. Format: a version header, then one
    /// `key=value` line per field, lists comma-separated, all decimal.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let mut text = String::from("FSTATE v1\n");
        text.push_str(&format!("position={}\n", self.position));
        text.push_str(&format!("last_value={}\n", self.last_value));
        text.push_str(&format!("current_prime={}\n", self.current_prime));
        let kind = match self.current_kind {
            SegmentKind::Natural => "natural".to_string(),
            SegmentKind::Insertion(k) => format!("insertion:{k}"),
        };
        text.push_str(&format!("current_kind={kind}\n"));
        let buf: Vec<String> = self.buffer.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("buffer={}\n", buf.join(",")));
        text.push_str(&format!("q_prev={}\n", self.schedule.q_prev));
        text.push_str(&format!("resolved_up_to={}\n", self.schedule.resolved_up_to));
        let ins: Vec<String> = self
            .schedule
            .insertions
            .iter()
            .map(|(k, q)| format!("{k}:{q}"))
            .collect();
        text.push_str(&format!("insertions={}\n", ins.join(",")));
        let ex: Vec<String> = self.schedule.extra_values.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("extras={}\n", ex.join(",")));
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load_checkpoint(store: &'a GammaStore, path: &Path) -> Result<Stream<'a>> {
        let corrupt = |reason: String| Error::Corrupt {
            path: path.display().to_string(),
            reason,
        };
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next() != Some("FSTATE v1") {
            return Err(corrupt("bad header".into()));
        }
        let mut fields = std::collections::HashMap::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| corrupt(format!("bad line {line:?}")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| corrupt(format!("missing field {k}")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| corrupt(format!("bad number in {k}")))
        };
        let list = |k: &str| -> Result<Vec<u64>> {
            let raw = get(k)?;
            if raw.is_empty() {
                return Ok(Vec::new());
            }
            raw.split(',')
                .map(|s| s.parse().map_err(|_| corrupt(format!("bad list in {k}"))))
                .collect()
        };
        let kind_raw = get("current_kind")?;
        let current_kind = if kind_raw == "natural" {
            SegmentKind::Natural
        } else if let Some(k) = kind_raw.strip_prefix("insertion:") {
            SegmentKind::Insertion(k.parse().map_err(|_| corrupt("bad kind".into()))?)
        } else {
            return Err(corrupt(format!("bad kind {kind_raw:?}")));
        };
        let insertions: Vec<(u64, u64)> = {
            let raw = get("insertions")?;
            if raw.is_empty() {
                Vec::new()
            } else {
                raw.split(',')
                    .map(|pair| {
                        pair.split_once(':')
                            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                            .ok_or_else(|| corrupt(format!("bad insertion {pair:?}")))
                    })
                    .collect::<Result<_>>()?
            }
        };
        Ok(Stream {
            store,
            schedule: Schedule {
                insertions,
                q_prev: num("q_prev")?,
                resolved_up_to: num("resolved_up_to")?,
                extra_values: list("extras")?.into_iter().collect(),
            },
            position: num("position")?,
            last_value: num("last_value")?,
            current_prime: num("current_prime")?,
            current_kind,
            buffer: list("buffer")?.into_iter().collect(),
        })
    }
}

impl Iterator for Stream<'_> {
    type Item = Result<StreamItem>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_item())
    }
}

/// The first `n_terms` values of the permutation.
pub fn generate(n_terms: u64, store: &GammaStore) -> Result<Vec<u64>> {
    if n_terms == 0 {
        return Err(Error::Domain("generate(0)".into()));
    }
    let mut out = Vec::with_capacity(usize::try_from(n_terms).unwrap_or(0));
    let mut stream = Stream::new(store);
    for _ in 0..n_terms {
        out.push(stream.next_item()?.value);
    }
    Ok(out)
}

/// Resolve the full schedule for every k up to `k_max`.
pub fn resolve_schedule(k_max: u64, store: &GammaStore) -> Result<Schedule> {
    if k_max == 0 {
        return Err(Error::Domain("resolve_schedule(0)".into()));
    }
    let mut s = Schedule::new();
    s.resolve_to(k_max, store)?;
    Ok(s)
}

/// 1-based position of `value` within the first `horizon` terms, if any.
pub fn position_of(value: u64, horizon: u64, store: &GammaStore) -> Result<Option<u64>> {
    if horizon == 0 {
        return Err(Error::Domain("position_of horizon 0".into()));
    }
    let mut stream = Stream::new(store);
    for _ in 0..horizon {
        let item = stream.next_item()?;
        if item.value == value {
            return Ok(Some(item.n));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> GammaStore {
        GammaStore::in_memory()
    }

    #[test]
    fn natural_image_examples() {
        let st = store();
        let sched = Schedule::new();
        assert!(in_natural_image(1, &sched, &st).unwrap());
        assert!(!in_natural_image(2, &sched, &st).unwrap());
        assert!(in_natural_image(3, &sched, &st).unwrap());
        assert!(in_natural_image(15, &sched, &st).unwrap()); // 15 = 5*3, 3 in G(3)
        assert!(!in_natural_image(4, &sched, &st).unwrap()); // not squarefree
        assert!(in_natural_image(6, &sched, &st).unwrap()); // 6 = 3*2, 2 in G(2)
        assert!(in_natural_image(14, &sched, &st).unwrap()); // 14 = 7*2, 2 in G(5)
    }

    #[test]
    fn schedule_first_insertions() {
        let st = store();
        let s = resolve_schedule(12, &st).unwrap();
        assert_eq!(
            s.insertions(),
            &[(2, 5), (4, 17), (8, 67), (9, 83), (12, 149)]
        );
    }

    #[test]
    fn schedule_is_incremental() {
        let st = store();
        let mut s = Schedule::new();
        s.resolve_to(5, &st).unwrap();
        s.resolve_to(12, &st).unwrap();
        assert_eq!(s.insertions(), resolve_schedule(12, &st).unwrap().insertions());
    }

    #[test]
    fn segments_match_forced_prefix() {
        let st = store();
        let mut sched = Schedule::new();
        sched.resolve_to(3, &st).unwrap();
        let s2 = segment_for(2, &sched, &st).unwrap();
        assert_eq!(s2.kind, SegmentKind::Natural);
        assert_eq!(s2.elems.elems(), &[6, 3]);
        let s3 = segment_for(3, &sched, &st).unwrap();
        assert_eq!(s3.elems.elems(), &[15, 30, 10, 5]);
        let s5 = segment_for(5, &sched, &st).unwrap();
        assert_eq!(s5.kind, SegmentKind::Insertion(2));
        assert_eq!(&s5.elems.elems()[..3], &[20, 2, 140]);
    }

    #[test]
    fn generate_forced_prefix() {
        let st = store();
        assert_eq!(generate(3, &st).unwrap(), vec![1, 6, 3]);
        assert_eq!(
            generate(10, &st).unwrap(),
            vec![1, 6, 3, 15, 30, 10, 5, 20, 2, 140]
        );
        assert_eq!(generate(11, &st).unwrap()[10], 35);
    }

    #[test]
    fn segment_needs_resolved_schedule() {
        let st = store();
        let sched = Schedule::new();
        assert!(segment_for(5, &sched, &st).is_err());
    }

    #[test]
    fn position_lookup() {
        let st = store();
        assert_eq!(position_of(1, 5, &st).unwrap(), Some(1));
        assert_eq!(position_of(2, 10, &st).unwrap(), Some(9));
        assert_eq!(position_of(4, 10, &st).unwrap(), None);
    }

    #[test]
    fn checkpoint_roundtrip_matches_fresh_run() {
        let st = store();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.fstate");

        let mut s = Stream::new(&st);
        let mut first: Vec<u64> = Vec::new();
        for _ in 0..50 {
            first.push(s.next_item().unwrap().value);
        }
        s.save_checkpoint(&path).unwrap();

        let mut resumed = Stream::load_checkpoint(&st, &path).unwrap();
        let mut rest: Vec<u64> = Vec::new();
        for _ in 0..50 {
            rest.push(resumed.next_item().unwrap().value);
        }

        let full = generate(100, &st).unwrap();
        let mut joined = first;
        joined.extend(rest);
        assert_eq!(joined, full);
    }
}
