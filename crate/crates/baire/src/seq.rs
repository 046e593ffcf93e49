//! Finite sequences, points of Baire space, and decidable address sets.
//!
//! Finite sequences of naturals do double duty: as chunks of data and as
//! addresses into the tree of all finite sequences, where the extensions of
//! an address form a basic open (a cylinder). Points are infinite sequences
//! with a finitely described tail, so that equality of observed prefixes is
//! always computable.

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// A finite sequence of naturals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSeq(Vec<u64>);

impl FinSeq {
    /// The empty sequence, root of the address tree.
    pub fn empty() -> Self {
        FinSeq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.0.get(i).copied()
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &FinSeq) -> FinSeq {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        FinSeq(v)
    }

    /// `self` followed by the single entry `n`.
    pub fn extended(&self, n: u64) -> FinSeq {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(n);
        FinSeq(v)
    }

    /// Drops the last entry; `None` on the empty sequence.
    pub fn parent(&self) -> Option<FinSeq> {
        if self.0.is_empty() {
            None
        } else {
            Some(FinSeq(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The first `n` entries. Requires `n <= self.len()`.
    pub fn truncated(&self, n: usize) -> FinSeq {
        FinSeq(self.0[..n].to_vec())
    }

    /// Prefix order: every entry of `self` appears at the same position in
    /// `other`, and `self` is no longer than `other`.
    pub fn is_prefix_of(&self, other: &FinSeq) -> bool {
        self.0.len() <= other.0.len() && self.0 == other.0[..self.0.len()]
    }

    pub fn is_strict_prefix_of(&self, other: &FinSeq) -> bool {
        self.0.len() < other.0.len() && self.is_prefix_of(other)
    }

    /// All prefixes in increasing length, from the empty sequence to `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = FinSeq> + '_ {
        (0..=self.0.len()).map(|n| self.truncated(n))
    }
}

impl From<Vec<u64>> for FinSeq {
    fn from(v: Vec<u64>) -> Self {
        FinSeq(v)
    }
}

impl From<&[u64]> for FinSeq {
    fn from(v: &[u64]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl<const N: usize> From<[u64; N]> for FinSeq {
    fn from(v: [u64; N]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl FromIterator<u64> for FinSeq {
    fn from_iter<T: IntoIterator<Item = u64>>(iter: T) -> Self {
        FinSeq(iter.into_iter().collect())
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "⟩")
    }
}

impl Serialize for FinSeq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinSeq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(FinSeq(Vec::deserialize(d)?))
    }
}

/// Builds a [`FinSeq`] from listed entries: `seq![1, 2, 3]`.
#[macro_export]
macro_rules! seq {
    () => { $crate::seq::FinSeq::empty() };
    ($($x:expr),+ $(,)?) => { $crate::seq::FinSeq::from(vec![$($x as u64),+]) };
}

/// A point of Baire space: an infinite sequence of naturals, stored as a
/// finite prefix plus a finitely described tail.
///
/// Points with generated tails memoize the values already produced, so
/// repeated reads are consistent and cheap even for expensive rules. The
/// memo is synchronized internally; a `Point` can be shared across threads.
#[derive(Clone)]
pub struct Point {
    prefix: FinSeq,
    tail: Tail,
}

#[derive(Clone)]
enum Tail {
    Zeros,
    Cycle(Vec<u64>),
    Generated {
        rule: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
        memo: Arc<Mutex<Vec<u64>>>,
    },
}

impl Point {
    /// The all-zero point.
    pub fn zeros() -> Self {
        Point { prefix: FinSeq::empty(), tail: Tail::Zeros }
    }

    /// `prefix` followed by zeros: the canonical point inside the cylinder
    /// at `prefix`.
    pub fn from_prefix(prefix: FinSeq) -> Self {
        Point { prefix, tail: Tail::Zeros }
    }

    /// `prefix` followed by `cycle` repeated forever. The cycle must be
    /// nonempty.
    pub fn cyclic(prefix: FinSeq, cycle: Vec<u64>) -> Result<Self, Error> {
        if cycle.is_empty() {
            return Err(Error::EmptyCycle);
        }
        Ok(Point { prefix, tail: Tail::Cycle(cycle) })
    }

    /// `prefix` followed by `rule(n)` at every position `n` past the
    /// prefix. The rule must be total and must not read the point it is
    /// defining. Generated tails exist only in the API; they do not
    /// serialize.
    pub fn generated<F>(prefix: FinSeq, rule: F) -> Self
    where
        F: Fn(usize) -> u64 + Send + Sync + 'static,
    {
        Point {
            prefix,
            tail: Tail::Generated { rule: Arc::new(rule), memo: Arc::new(Mutex::new(Vec::new())) },
        }
    }

    /// The entry at position `n`.
    pub fn at(&self, n: usize) -> u64 {
        if let Some(x) = self.prefix.get(n) {
            return x;
        }
        let off = n - self.prefix.len();
        match &self.tail {
            Tail::Zeros => 0,
            Tail::Cycle(c) => c[off % c.len()],
            Tail::Generated { rule, memo } => {
                let mut memo = memo.lock().expect("point memo poisoned");
                while memo.len() <= off {
                    let pos = self.prefix.len() + memo.len();
                    memo.push(rule(pos));
                }
                memo[off]
            }
        }
    }

    /// The initial segment of length `n`: the first `n` entries as an
    /// address.
    pub fn initial_segment(&self, n: usize) -> FinSeq {
        (0..n).map(|i| self.at(i)).collect()
    }

    pub fn prefix(&self) -> &FinSeq {
        &self.prefix
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tail = match &self.tail {
            Tail::Zeros => "zeros".to_string(),
            Tail::Cycle(c) => format!("cycle {:?}", c),
            Tail::Generated { .. } => "generated".to_string(),
        };
        write!(f, "Point({} then {tail})", self.prefix)
    }
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    prefix: FinSeq,
    tail: TailJson,
}

#[derive(Serialize, Deserialize)]
enum TailJson {
    #[serde(rename = "zeros")]
    Zeros,
    #[serde(rename = "cycle")]
    Cycle(Vec<u64>),
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let tail = match &self.tail {
            Tail::Zeros => TailJson::Zeros,
            Tail::Cycle(c) => TailJson::Cycle(c.clone()),
            Tail::Generated { .. } => {
                return Err(S::Error::custom("generated tails are not serializable"));
            }
        };
        PointJson { prefix: self.prefix.clone(), tail }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PointJson::deserialize(d)?;
        match raw.tail {
            TailJson::Zeros => Ok(Point::from_prefix(raw.prefix)),
            TailJson::Cycle(c) => {
                Point::cyclic(raw.prefix, c).map_err(|e| D::Error::custom(e.to_string()))
            }
        }
    }
}

/// A set of addresses with a total, deterministic membership rule and an
/// optional finite listing of its elements.
///
/// The listing, when present, is sorted and deduplicated; exact procedures
/// elsewhere in the crate rely on it to bound how far entry values matter.
#[derive(Clone)]
pub struct DecidableSet {
    rule: Arc<dyn Fn(&FinSeq) -> bool + Send + Sync>,
    extent: Option<Arc<Vec<FinSeq>>>,
}

impl DecidableSet {
    /// The set holding exactly the listed addresses.
    pub fn from_listing(items: Vec<FinSeq>) -> Self {
        let mut items = items;
        items.sort();
        items.dedup();
        let index: HashSet<FinSeq> = items.iter().cloned().collect();
        DecidableSet {
            rule: Arc::new(move |a| index.contains(a)),
            extent: Some(Arc::new(items)),
        }
    }

    /// A set given by a bare membership rule, with no finite listing.
    pub fn from_predicate<F>(rule: F) -> Self
    where
        F: Fn(&FinSeq) -> bool + Send + Sync + 'static,
    {
        DecidableSet { rule: Arc::new(rule), extent: None }
    }

    pub fn contains(&self, a: &FinSeq) -> bool {
        (self.rule)(a)
    }

    pub fn extent(&self) -> Option<&[FinSeq]> {
        self.extent.as_deref().map(|v| v.as_slice())
    }

    /// The largest entry value occurring anywhere in the listing, 0 when
    /// the listing has no entries at all, `None` without a listing.
    pub fn max_entry(&self) -> Option<u64> {
        self.extent
            .as_deref()?
            .iter()
            .flat_map(|a| a.entries().iter().copied())
            .max()
            .or(Some(0))
    }

    /// Membership in the extension closure: some prefix of `a` (possibly
    /// `a` itself) belongs to the set.
    pub fn ext_member(&self, a: &FinSeq) -> bool {
        a.prefixes().any(|p| self.contains(&p))
    }

    /// A finite listing of the extension closure restricted to addresses of
    /// length at most `max_len` with entries below `width`.
    pub fn ext_closure_listing(&self, max_len: usize, width: u64) -> DecidableSet {
        let items = enumerate_addresses(width, max_len)
            .into_iter()
            .filter(|a| self.ext_member(a))
            .collect();
        DecidableSet::from_listing(items)
    }
}

impl fmt::Debug for DecidableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.extent {
            Some(items) => write!(f, "DecidableSet({} listed)", items.len()),
            None => write!(f, "DecidableSet(predicate)"),
        }
    }
}

/// The cylinder at `a` of depth `k`: all extensions of `a` by exactly `k`
/// entries. Listing it requires a width cutoff whenever `k > 0`; under
/// cutoff `w` the extensions range over entries below `w`, in lexicographic
/// order, giving `w^k` addresses.
pub fn cylinder(a: &FinSeq, k: usize, width: Option<u64>) -> Result<Vec<FinSeq>, Error> {
    if k == 0 {
        return Ok(vec![a.clone()]);
    }
    let w = width.ok_or(Error::CutoffRequired { what: "listing a cylinder of positive depth" })?;
    let mut out = Vec::new();
    let mut stack = vec![a.clone()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(stack.len() * w as usize);
        for b in stack {
            for n in 0..w {
                next.push(b.extended(n));
            }
        }
        stack = next;
    }
    out.append(&mut stack);
    Ok(out)
}

/// All addresses of length at most `max_len` with entries below `width`,
/// ordered by length and then lexicographically.
pub fn enumerate_addresses(width: u64, max_len: usize) -> Vec<FinSeq> {
    let mut out = vec![FinSeq::empty()];
    let mut level = vec![FinSeq::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(level.len() * width as usize);
        for a in &level {
            for n in 0..width {
                next.push(a.extended(n));
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concat_and_prefix_order() {
        let a = seq![1, 2];
        let b = seq![3];
        assert_eq!(a.concat(&b), seq![1, 2, 3]);
        assert_eq!(FinSeq::empty().concat(&a), a);
        assert_eq!(a.concat(&FinSeq::empty()), a);
        assert!(a.is_prefix_of(&seq![1, 2, 3]));
        assert!(a.is_prefix_of(&a));
        assert!(!a.is_strict_prefix_of(&a));
        assert!(!seq![1, 3].is_prefix_of(&seq![1, 2, 3]));
    }

    #[test]
    fn initial_segments_of_an_eventually_zero_point() {
        let p = Point::from_prefix(seq![1, 2, 3]);
        assert_eq!(p.initial_segment(0), FinSeq::empty());
        assert_eq!(p.initial_segment(2), seq![1, 2]);
        assert_eq!(p.initial_segment(5), seq![1, 2, 3, 0, 0]);
    }

    #[test]
    fn cyclic_tail_repeats_the_cycle() {
        let p = Point::cyclic(seq![9], vec![1, 2]).unwrap();
        // position len(prefix) + q*len(cycle) + r reads cycle[r]
        assert_eq!(p.at(0), 9);
        assert_eq!(p.at(1), 1);
        assert_eq!(p.at(2), 2);
        assert_eq!(p.at(3), 1);
        assert_eq!(p.at(6), 2);
        assert!(Point::cyclic(FinSeq::empty(), vec![]).is_err());
    }

    #[test]
    fn generated_tail_is_memoized_and_consistent() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let p = Point::generated(seq![5], move |n| {
            c.fetch_add(1, Ordering::SeqCst);
            (n as u64) * 10
        });
        assert_eq!(p.at(3), 30);
        assert_eq!(p.at(3), 30);
        assert_eq!(p.at(1), 10);
        // positions 1..=3 were filled once each
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn point_json_round_trip() {
        let p = Point::cyclic(seq![1], vec![2, 3]).unwrap();
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(js, r#"{"prefix":[1],"tail":{"cycle":[2,3]}}"#);
        let back: Point = serde_json::from_str(&js).unwrap();
        assert_eq!(back.at(4), p.at(4));

        let z = Point::zeros();
        assert_eq!(serde_json::to_string(&z).unwrap(), r#"{"prefix":[],"tail":"zeros"}"#);

        let gen = Point::generated(FinSeq::empty(), |n| n as u64);
        assert!(serde_json::to_string(&gen).is_err());
        assert!(serde_json::from_str::<Point>(r#"{"prefix":[],"tail":{"cycle":[]}}"#).is_err());
    }

    #[test]
    fn cylinders_require_a_cutoff_and_enumerate_exactly() {
        let a = seq![1];
        assert_eq!(cylinder(&a, 0, None).unwrap(), vec![a.clone()]);
        assert!(cylinder(&a, 1, None).is_err());
        let c = cylinder(&a, 2, Some(2)).unwrap();
        assert_eq!(c, vec![seq![1, 0, 0], seq![1, 0, 1], seq![1, 1, 0], seq![1, 1, 1]]);
    }

    #[test]
    fn ext_membership_scans_prefixes() {
        let u = DecidableSet::from_listing(vec![seq![1], seq![0, 2]]);
        assert!(u.ext_member(&seq![1]));
        assert!(u.ext_member(&seq![1, 5, 5]));
        assert!(!u.ext_member(&seq![0]));
        assert!(u.ext_member(&seq![0, 2, 0]));
        assert!(!u.ext_member(&FinSeq::empty()));
        assert_eq!(u.max_entry(), Some(2));
    }

    #[test]
    fn ext_closure_listing_matches_the_predicate() {
        let u = DecidableSet::from_listing(vec![seq![1], seq![0, 2]]);
        let closed = u.ext_closure_listing(3, 3);
        for a in enumerate_addresses(3, 3) {
            assert_eq!(closed.contains(&a), u.ext_member(&a), "at {a}");
        }
        // closing again changes nothing
        let twice = closed.ext_closure_listing(3, 3);
        assert_eq!(twice.extent(), closed.extent());
    }

    #[test]
    fn address_enumeration_is_ordered_by_length_then_lexicographic() {
        let all = enumerate_addresses(2, 2);
        assert_eq!(
            all,
            vec![
                FinSeq::empty(),
                seq![0],
                seq![1],
                seq![0, 0],
                seq![0, 1],
                seq![1, 0],
                seq![1, 1]
            ]
        );
    }
}
