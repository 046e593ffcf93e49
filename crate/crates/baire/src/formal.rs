//! The point-free side: cover witnesses, formal points, and formal maps.
//!
//! Formal Baire space presents the same topology without mentioning points:
//! basic opens are finite sequences, and "the cylinder at `a` is covered by
//! the set `U`" is an inductively generated judgement. A [`CovWitness`] is
//! a canonical certificate of such a judgement: a root address plus a
//! unit-leaf tree whose bar spells out a concrete cover of the root. Cover
//! witnesses and continuity certificates are the same trees viewed from
//! two sides, and the conversions here are correspondingly cheap.
//!
//! A [`FormalMap`] is a relation between basic opens and output values that
//! induces a function on points. The relation alone is not enough to
//! compute with: it comes packaged with a totality witness, a cover of the
//! root by addresses that already determine an output.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::brouwer::{BarListing, BarOptions, BrouwerOp, Children, ContinuousFn};
use crate::seq::{DecidableSet, FinSeq, Point};
use crate::{Error, DEFAULT_FUEL};

/// A canonical cover certificate: the bar of `shape`, prefixed by `root`,
/// covers the cylinder at `root`.
///
/// Shapes are restricted to unit leaves; they carry where a cover element
/// sits, never an output value. [`CovWitness::new`] checks the restriction
/// exactly on tabular shapes and up to a bounded probe on generated ones.
#[derive(Clone, Debug)]
pub struct CovWitness {
    root: FinSeq,
    shape: BrouwerOp,
}

impl CovWitness {
    /// Wraps a root and a unit-leaf shape, rejecting leaves other than 1.
    pub fn new(root: FinSeq, shape: BrouwerOp) -> Result<Self, Error> {
        fn check(op: &BrouwerOp, depth: usize) -> Result<(), Error> {
            match op {
                BrouwerOp::Leaf(1) => Ok(()),
                BrouwerOp::Leaf(v) => Err(Error::NonUnitLeaf { value: *v }),
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    for c in explicit {
                        check(c, depth + 1)?;
                    }
                    check(default, depth + 1)
                }
                BrouwerOp::Sup(Children::Generated { rule, cutoff_hint }) => {
                    // bounded spot check; generated shapes are probed, not proven
                    if depth >= 8 {
                        return Ok(());
                    }
                    for i in 0..(*cutoff_hint).clamp(1, 4) {
                        check(&rule(i), depth + 1)?;
                    }
                    Ok(())
                }
            }
        }
        check(&shape, 0)?;
        Ok(CovWitness { root, shape })
    }

    /// The canonical cover underlying an operation: root `a`, shape the
    /// skeleton of `op`. The denoted set is `a` prefixed onto `op`'s bar.
    pub fn from_op(a: FinSeq, op: &BrouwerOp) -> Self {
        CovWitness { root: a, shape: op.skeleton() }
    }

    pub fn root(&self) -> &FinSeq {
        &self.root
    }

    pub fn shape(&self) -> &BrouwerOp {
        &self.shape
    }

    /// The witness read back as an operation: exactly its shape. Together
    /// with [`CovWitness::from_op`] this is the round trip between canonical
    /// covers and (skeletons of) continuity certificates.
    pub fn to_op(&self) -> BrouwerOp {
        self.shape.clone()
    }

    /// Lists the denoted cover: bar addresses of the shape, each prefixed
    /// by the root.
    pub fn denoted(&self, opts: &BarOptions) -> BarListing {
        let mut listing = self.shape.bar(opts);
        for item in &mut listing.items {
            item.address = self.root.concat(&item.address);
        }
        listing
    }

    /// True when `a` lies in the denoted set: it extends the root and the
    /// remainder is a bar address of the shape.
    pub fn denotes_address(&self, a: &FinSeq) -> bool {
        match strip_prefix(&self.root, a) {
            Some(rest) => self.shape.is_bar_address(&rest),
            None => false,
        }
    }
}

fn strip_prefix(prefix: &FinSeq, a: &FinSeq) -> Option<FinSeq> {
    if !prefix.is_prefix_of(a) {
        return None;
    }
    Some((prefix.len()..a.len()).map(|i| a.get(i).expect("index in range")).collect())
}

#[derive(Serialize, Deserialize)]
struct CovJson {
    root: FinSeq,
    shape: BrouwerOp,
}

impl Serialize for CovWitness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CovWitness", 2)?;
        st.serialize_field("root", &self.root)?;
        st.serialize_field("shape", &self.shape)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for CovWitness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = CovJson::deserialize(d)?;
        CovWitness::new(raw.root, raw.shape).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Verdict of a cover check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverCheck {
    Holds,
    /// Either a denoted address outside the extension closure of the
    /// queried set, or the witness root when it differs from the queried
    /// address.
    Fails { address: FinSeq },
    /// The witness could not be expanded exhaustively; no violation found.
    Unverified,
}

impl CoverCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CoverCheck::Holds)
    }
}

/// Checks that `w` certifies "the cylinder at `a` is covered by `u`": the
/// witness root must be `a` and every address in the witness's expanded
/// listing must have a prefix in `u`.
///
/// The judgement is relative to the expansion width: each default family
/// is sampled at the listed indices (the explicit width up to `cutoff`, or
/// up to the per-node default when no cutoff is given). Tabular witnesses
/// give a definite verdict under that convention; generated witnesses
/// require a cutoff and can only fail or stay unverified.
pub fn check_cover(
    a: &FinSeq,
    u: &DecidableSet,
    w: &CovWitness,
    cutoff: Option<u64>,
) -> Result<CoverCheck, Error> {
    if !w.shape.is_tabular() && cutoff.is_none() {
        return Err(Error::CutoffRequired { what: "cover checking over a generated witness" });
    }
    if w.root != *a {
        return Ok(CoverCheck::Fails { address: w.root.clone() });
    }
    let listing = w.denoted(&BarOptions { cutoff, limit: None, fuel: DEFAULT_FUEL });
    for item in &listing.items {
        if !u.ext_member(&item.address) {
            return Ok(CoverCheck::Fails { address: item.address.clone() });
        }
    }
    if listing.truncated {
        Ok(CoverCheck::Unverified)
    } else {
        Ok(CoverCheck::Holds)
    }
}

/// A finite initial part of a formal point: the chain of initial segments
/// of some point, one per length from 0 to `depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalPointFragment {
    chain: Vec<FinSeq>,
}

impl FormalPointFragment {
    /// The fragment of the formal point of `p`: `[iseg(p,0), ..,
    /// iseg(p,depth)]`.
    pub fn of_point(p: &Point, depth: usize) -> Self {
        FormalPointFragment { chain: (0..=depth).map(|n| p.initial_segment(n)).collect() }
    }

    /// Validates an explicit chain: element `i` must have length `i` and be
    /// a prefix of its successor. These two conditions give all the formal
    /// point laws on the fragment: inhabitedness, pairwise comparability,
    /// prefix closure, and existence of successors below the depth.
    pub fn from_chain(chain: Vec<FinSeq>) -> Result<Self, Error> {
        if chain.is_empty() {
            return Err(Error::MalformedFragment { reason: "chain is empty".into() });
        }
        for (i, a) in chain.iter().enumerate() {
            if a.len() != i {
                return Err(Error::MalformedFragment {
                    reason: format!("element {i} has length {}, expected {i}", a.len()),
                });
            }
        }
        for pair in chain.windows(2) {
            if !pair[0].is_strict_prefix_of(&pair[1]) {
                return Err(Error::MalformedFragment {
                    reason: format!("{} is not extended by {}", pair[0], pair[1]),
                });
            }
        }
        Ok(FormalPointFragment { chain })
    }

    pub fn depth(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn chain(&self) -> &[FinSeq] {
        &self.chain
    }

    /// The deepest element: `iseg(p, depth)` for the generating point. Its
    /// entries recover the point on the fragment's window.
    pub fn tip(&self) -> &FinSeq {
        self.chain.last().expect("fragments are nonempty")
    }
}

/// One recorded violation of single-valuedness on the witness set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleValuedViolation {
    pub address: FinSeq,
    pub first: u64,
    pub second: u64,
}

/// One defect in the point-level commuting check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagramIssue {
    /// Applying the map disagrees with the function.
    Mismatch { sample: usize, expected: u64, got: u64 },
    /// The map scan met no witness address within budget.
    FuelExhausted { sample: usize },
}

/// Outcome of [`FormalMap::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MapReport {
    /// Witness addresses with no related output value (totality defects).
    pub totality_failures: Vec<FinSeq>,
    /// Witness addresses related to two distinct values.
    pub single_valued_failures: Vec<SingleValuedViolation>,
    /// Point-level disagreements with the compared function.
    pub diagram_issues: Vec<DiagramIssue>,
    /// True when a generated witness kept a check from being exhaustive.
    pub unverified: bool,
}

impl MapReport {
    /// No violations found. A bounded (`unverified`) run with no findings
    /// still passes; the flag records the caveat.
    pub fn passed(&self) -> bool {
        self.totality_failures.is_empty()
            && self.single_valued_failures.is_empty()
            && self.diagram_issues.is_empty()
    }
}

/// Scan bound for "is some value related here": when the map suggests a
/// value the suggestion is tried first, then values up to this bound.
const RELATE_SCAN_BOUND: u64 = 64;

/// A formal topology map into the naturals.
///
/// `relate` is the raw relation between addresses and output values.
/// `witness` certifies totality: it covers the root with addresses that
/// are supposed to determine an output. `value_at` picks the determined
/// output where one exists; it is the computational handle on the
/// relation, and must return a related value whenever there is one.
type RelateFn = Arc<dyn Fn(&FinSeq, u64) -> bool + Send + Sync>;
type ValueAtFn = Arc<dyn Fn(&FinSeq) -> Option<u64> + Send + Sync>;

#[derive(Clone)]
pub struct FormalMap {
    relate: RelateFn,
    witness: CovWitness,
    value_at: ValueAtFn,
}

impl FormalMap {
    /// Assembles a map from its three components. The witness must be
    /// rooted at the empty sequence: it certifies totality on the whole
    /// space.
    pub fn new<R, V>(relate: R, witness: CovWitness, value_at: V) -> Result<Self, Error>
    where
        R: Fn(&FinSeq, u64) -> bool + Send + Sync + 'static,
        V: Fn(&FinSeq) -> Option<u64> + Send + Sync + 'static,
    {
        if !witness.root().is_empty() {
            return Err(Error::WitnessRoot);
        }
        Ok(FormalMap { relate: Arc::new(relate), witness, value_at: Arc::new(value_at) })
    }

    /// The map induced by a realised function: `a` relates to `n` exactly
    /// when `a` is a bar address of the realiser and the function answers
    /// `n` on the canonical point of `a`'s cylinder. The realiser's own
    /// cover is the totality witness.
    pub fn from_realisable(f: &ContinuousFn) -> Result<Self, Error> {
        let realiser = f
            .realiser()
            .ok_or(Error::RealiserMissing { what: "formal map construction" })?;
        if !realiser.is_tabular() {
            return Err(Error::TabularRequired { what: "formal map construction" });
        }
        let witness = CovWitness::from_op(FinSeq::empty(), realiser);
        let shape = witness.shape().clone();
        let shape2 = shape.clone();
        let f1 = f.clone();
        let f2 = f.clone();
        FormalMap::new(
            move |a, n| {
                shape.is_bar_address(a) && f1.apply(&Point::from_prefix(a.clone())) == n
            },
            witness,
            move |a| {
                shape2
                    .is_bar_address(a)
                    .then(|| f2.apply(&Point::from_prefix(a.clone())))
            },
        )
    }

    pub fn relates(&self, a: &FinSeq, n: u64) -> bool {
        (self.relate)(a, n)
    }

    pub fn witness(&self) -> &CovWitness {
        &self.witness
    }

    pub fn value_at(&self, a: &FinSeq) -> Option<u64> {
        (self.value_at)(a)
    }

    /// Applies the map to a point: scans the point's initial segments for
    /// the first witness address with a determined value. Well-defined on
    /// valid maps because output values agree wherever witness addresses
    /// overlap a point.
    pub fn apply(&self, p: &Point, fuel: usize) -> Result<u64, Error> {
        for n in 0..=fuel {
            let u = p.initial_segment(n);
            if self.witness.denotes_address(&u) {
                if let Some(v) = self.value_at(&u) {
                    return Ok(v);
                }
            }
        }
        Err(Error::FuelExhausted { what: "formal map application", budget: fuel })
    }

    /// Builds the function the map induces, realised by relabelling the
    /// witness shape: the leaf at address `u` answers `value_at(u)`.
    /// Requires a tabular witness and a value at every leaf position
    /// (default families are read at their representative index).
    pub fn to_continuous(&self) -> Result<ContinuousFn, Error> {
        fn label(map: &FormalMap, shape: &BrouwerOp, at: &FinSeq) -> Result<BrouwerOp, Error> {
            match shape {
                BrouwerOp::Leaf(_) => {
                    let v = map
                        .value_at(at)
                        .ok_or_else(|| Error::ValueUndefined { at: at.clone() })?;
                    let encoded =
                        v.checked_add(1).ok_or(Error::Overflow { what: "leaf encoding" })?;
                    Ok(BrouwerOp::Leaf(encoded))
                }
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    let mut out = Vec::with_capacity(explicit.len());
                    for (i, c) in explicit.iter().enumerate() {
                        out.push(label(map, c, &at.extended(i as u64))?);
                    }
                    let rep = at.extended(explicit.len() as u64);
                    Ok(BrouwerOp::sup(out, label(map, default, &rep)?))
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    Err(Error::TabularRequired { what: "realiser construction from a map" })
                }
            }
        }
        let op = label(self, self.witness.shape(), &FinSeq::empty())?;
        Ok(ContinuousFn::from_op(op))
    }

    /// Checks the map axioms and, when `f` is supplied, the point-level
    /// diagram: applying the map must reproduce `f` on every sample.
    ///
    /// Totality and single-valuedness are checked on the witness's
    /// expanded listing (see [`check_cover`] for the expansion convention);
    /// a generated witness needs `cutoff` and marks the report unverified.
    pub fn validate(
        &self,
        f: Option<&ContinuousFn>,
        samples: &[Point],
        cutoff: Option<u64>,
    ) -> Result<MapReport, Error> {
        if !self.witness.shape().is_tabular() && cutoff.is_none() {
            return Err(Error::CutoffRequired { what: "map validation over a generated witness" });
        }
        let mut report = MapReport::default();
        let listing = self.witness.denoted(&BarOptions {
            cutoff,
            limit: None,
            fuel: DEFAULT_FUEL,
        });
        report.unverified = listing.truncated;

        for item in &listing.items {
            let u = &item.address;
            let suggested = self.value_at(u);
            let related = |n: u64| self.relates(u, n);
            let any_related =
                suggested.is_some_and(related) || (0..=RELATE_SCAN_BOUND).any(related);
            if !any_related {
                report.totality_failures.push(u.clone());
                continue;
            }
            let bound = RELATE_SCAN_BOUND
                .max(suggested.map_or(0, |v| v.saturating_mul(2).saturating_add(2)));
            let mut found: Option<u64> = None;
            for n in 0..=bound {
                if !related(n) {
                    continue;
                }
                match found {
                    None => found = Some(n),
                    Some(first) => {
                        report.single_valued_failures.push(SingleValuedViolation {
                            address: u.clone(),
                            first,
                            second: n,
                        });
                        break;
                    }
                }
            }
        }

        if let Some(f) = f {
            for (i, p) in samples.iter().enumerate() {
                match self.apply(p, DEFAULT_FUEL) {
                    Ok(got) => {
                        let expected = f.apply(p);
                        if got != expected {
                            report.diagram_issues.push(DiagramIssue::Mismatch {
                                sample: i,
                                expected,
                                got,
                            });
                        }
                    }
                    Err(_) => report.diagram_issues.push(DiagramIssue::FuelExhausted { sample: i }),
                }
            }
        }
        Ok(report)
    }

    /// Tabulates the map: one entry per leaf position of the witness shape
    /// (default families at their representative index), in depth-first
    /// order. Requires a tabular witness and values at every position.
    pub fn to_table(&self) -> Result<Vec<MapEntry>, Error> {
        fn walk(
            map: &FormalMap,
            shape: &BrouwerOp,
            at: &FinSeq,
            out: &mut Vec<MapEntry>,
        ) -> Result<(), Error> {
            match shape {
                BrouwerOp::Leaf(_) => {
                    let n = map
                        .value_at(at)
                        .ok_or_else(|| Error::ValueUndefined { at: at.clone() })?;
                    out.push(MapEntry { addr: at.clone(), n });
                    Ok(())
                }
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    for (i, c) in explicit.iter().enumerate() {
                        walk(map, c, &at.extended(i as u64), out)?;
                    }
                    walk(map, default, &at.extended(explicit.len() as u64), out)
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    Err(Error::TabularRequired { what: "map tabulation" })
                }
            }
        }
        let mut out = Vec::new();
        walk(self, self.witness.shape(), &FinSeq::empty(), &mut out)?;
        Ok(out)
    }

    /// Rebuilds a map from a witness and a value table. Lookups
    /// canonicalize addresses against the witness shape, so every member
    /// of a default family resolves to its tabulated representative.
    pub fn from_table(witness: CovWitness, entries: Vec<MapEntry>) -> Result<Self, Error> {
        if !witness.shape().is_tabular() {
            return Err(Error::TabularRequired { what: "map tabulation" });
        }
        if !witness.root().is_empty() {
            return Err(Error::WitnessRoot);
        }
        let shape = witness.shape().clone();
        let table: HashMap<FinSeq, u64> =
            entries.into_iter().map(|e| (canonical_address(&shape, &e.addr), e.n)).collect();
        let lookup = move |a: &FinSeq| table.get(&canonical_address(&shape, a)).copied();
        let lookup2 = lookup.clone();
        FormalMap::new(move |a, n| lookup(a) == Some(n), witness, move |a| lookup2(a))
    }
}

/// Clamps each entry of `a` to the explicit width of the tabular node it
/// selects, identifying all members of a default family with the
/// representative at the width index.
fn canonical_address(shape: &BrouwerOp, a: &FinSeq) -> FinSeq {
    let mut cur = shape;
    let mut out = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let entry = a.get(i).expect("index in range");
        match cur {
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                let w = explicit.len() as u64;
                out.push(entry.min(w));
                cur = match explicit.get(usize::try_from(entry).unwrap_or(usize::MAX)) {
                    Some(c) => c,
                    None => default,
                };
            }
            // past a leaf (or into a generated region) nothing identifies
            // addresses; keep the raw entries
            _ => {
                out.extend((i..a.len()).map(|j| a.get(j).expect("index in range")));
                break;
            }
        }
    }
    FinSeq::from(out)
}

impl fmt::Debug for FormalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalMap(witness rooted at {})", self.witness.root())
    }
}

/// One row of a tabulated map: the witness address and its output value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEntry {
    pub addr: FinSeq,
    pub n: u64,
}

impl Serialize for FormalMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let values = self.to_table().map_err(|e| S::Error::custom(e.to_string()))?;
        let mut st = s.serialize_struct("FormalMap", 2)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("values", &values)?;
        st.end()
    }
}

#[derive(Deserialize)]
struct MapJson {
    witness: CovWitness,
    values: Vec<MapEntry>,
}

impl<'de> Deserialize<'de> for FormalMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MapJson::deserialize(d)?;
        FormalMap::from_table(raw.witness, raw.values).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brouwer::Equivalence;
    use crate::seq;
    use crate::Cutoff;

    fn uniform_witness(depth: usize) -> CovWitness {
        CovWitness::from_op(FinSeq::empty(), &BrouwerOp::uniform_depth(depth, 1))
    }

    #[test]
    fn witness_of_a_leaf_denotes_its_root() {
        let w = CovWitness::from_op(seq![2], &BrouwerOp::leaf(7));
        let listing = w.denoted(&BarOptions::default());
        assert!(!listing.truncated);
        assert_eq!(listing.items.len(), 1);
        assert_eq!(listing.items[0].address, seq![2]);
        assert_eq!(listing.items[0].value, 1);
        assert!(w.denotes_address(&seq![2]));
        assert!(!w.denotes_address(&seq![2, 0]));
        assert!(!w.denotes_address(&FinSeq::empty()));
    }

    #[test]
    fn witness_round_trip_is_the_skeleton() {
        let op = BrouwerOp::sup(vec![BrouwerOp::leaf(3)], BrouwerOp::leaf(8));
        let w = CovWitness::from_op(FinSeq::empty(), &op);
        assert_eq!(
            w.to_op().equivalence(&op.skeleton(), &Cutoff::default()),
            Equivalence::Equal
        );
    }

    #[test]
    fn witnesses_reject_nonunit_leaves() {
        assert!(matches!(
            CovWitness::new(FinSeq::empty(), BrouwerOp::leaf(2)),
            Err(Error::NonUnitLeaf { value: 2 })
        ));
        assert!(CovWitness::new(FinSeq::empty(), BrouwerOp::leaf(1)).is_ok());
    }

    #[test]
    fn whole_space_covers_itself() {
        let u = DecidableSet::from_listing(vec![FinSeq::empty()]);
        let w = uniform_witness(2);
        assert_eq!(check_cover(&FinSeq::empty(), &u, &w, Some(4)).unwrap(), CoverCheck::Holds);
    }

    #[test]
    fn depth_k_slice_covers_under_matched_cutoff() {
        let cutoff = 4u64;
        for k in 0..=3 {
            let slice: Vec<FinSeq> = crate::seq::enumerate_addresses(cutoff, k)
                .into_iter()
                .filter(|a| a.len() == k)
                .collect();
            let u = DecidableSet::from_listing(slice);
            let w = uniform_witness(k);
            assert_eq!(
                check_cover(&FinSeq::empty(), &u, &w, Some(cutoff)).unwrap(),
                CoverCheck::Holds,
                "depth {k}"
            );
        }
    }

    #[test]
    fn singleton_below_the_root_does_not_cover() {
        let u = DecidableSet::from_listing(vec![seq![0]]);
        let w = CovWitness::from_op(FinSeq::empty(), &BrouwerOp::leaf(1));
        assert_eq!(
            check_cover(&FinSeq::empty(), &u, &w, None).unwrap(),
            CoverCheck::Fails { address: FinSeq::empty() }
        );
    }

    #[test]
    fn root_mismatch_fails_with_the_witness_root() {
        let u = DecidableSet::from_listing(vec![FinSeq::empty()]);
        let w = CovWitness::from_op(seq![1], &BrouwerOp::leaf(1));
        assert_eq!(
            check_cover(&FinSeq::empty(), &u, &w, None).unwrap(),
            CoverCheck::Fails { address: seq![1] }
        );
    }

    #[test]
    fn generated_witnesses_need_a_cutoff_and_stay_unverified() {
        let shape = BrouwerOp::sup_generated(|_| BrouwerOp::leaf(1), 2);
        let w = CovWitness::new(FinSeq::empty(), shape).unwrap();
        let u = DecidableSet::from_listing(vec![FinSeq::empty()]);
        assert!(check_cover(&FinSeq::empty(), &u, &w, None).is_err());
        assert_eq!(
            check_cover(&FinSeq::empty(), &u, &w, Some(3)).unwrap(),
            CoverCheck::Unverified
        );
        let empty = DecidableSet::from_listing(vec![]);
        assert!(matches!(
            check_cover(&FinSeq::empty(), &empty, &w, Some(3)).unwrap(),
            CoverCheck::Fails { .. }
        ));
    }

    #[test]
    fn fragments_list_initial_segments() {
        let frag = FormalPointFragment::of_point(&Point::zeros(), 2);
        assert_eq!(frag.chain(), &[FinSeq::empty(), seq![0], seq![0, 0]]);
        assert_eq!(frag.tip(), &seq![0, 0]);
        assert_eq!(frag.depth(), 2);

        let p = Point::from_prefix(seq![3]);
        let frag = FormalPointFragment::of_point(&p, 1);
        assert_eq!(frag.chain(), &[FinSeq::empty(), seq![3]]);

        let frag = FormalPointFragment::of_point(&Point::zeros(), 0);
        assert_eq!(frag.chain(), &[FinSeq::empty()]);
    }

    #[test]
    fn fragment_validation_rejects_non_chains() {
        assert!(FormalPointFragment::from_chain(vec![]).is_err());
        assert!(FormalPointFragment::from_chain(vec![seq![1]]).is_err());
        assert!(
            FormalPointFragment::from_chain(vec![FinSeq::empty(), seq![1], seq![2, 2]]).is_err()
        );
        let ok = FormalPointFragment::from_chain(vec![FinSeq::empty(), seq![5], seq![5, 7]])
            .unwrap();
        assert_eq!(ok.tip(), &seq![5, 7]);
    }

    #[test]
    fn fragment_round_trip_recovers_the_initial_segment() {
        let p = Point::cyclic(FinSeq::empty(), vec![4, 1]).unwrap();
        for depth in 0..5 {
            let frag = FormalPointFragment::of_point(&p, depth);
            assert_eq!(*frag.tip(), p.initial_segment(depth));
        }
    }

    #[test]
    fn constant_function_gives_the_singleton_relation() {
        let f = ContinuousFn::from_op(BrouwerOp::leaf(5));
        let map = FormalMap::from_realisable(&f).unwrap();
        assert!(map.relates(&FinSeq::empty(), 4));
        assert!(!map.relates(&FinSeq::empty(), 5));
        assert!(!map.relates(&seq![0], 4));
        assert_eq!(map.value_at(&FinSeq::empty()), Some(4));
        assert_eq!(map.apply(&Point::from_prefix(seq![9]), DEFAULT_FUEL).unwrap(), 4);
    }

    #[test]
    fn first_entry_map_relates_each_singleton_address() {
        // answers its first entry on 0..3 and 3 beyond
        let op = BrouwerOp::sup(
            vec![BrouwerOp::leaf(1), BrouwerOp::leaf(2), BrouwerOp::leaf(3)],
            BrouwerOp::leaf(4),
        );
        let g = ContinuousFn::from_op(op);
        let map = FormalMap::from_realisable(&g).unwrap();
        for n in 0..3u64 {
            assert!(map.relates(&seq![n], n));
        }
        assert!(map.relates(&seq![7], 3));
        assert!(!map.relates(&seq![1], 0));
        assert_eq!(map.apply(&Point::from_prefix(seq![7, 1]), DEFAULT_FUEL).unwrap(), 3);
    }

    #[test]
    fn map_application_scans_to_the_witness_bar() {
        let op = BrouwerOp::sup_uniform(BrouwerOp::sup_uniform(BrouwerOp::leaf(6)));
        let f = ContinuousFn::from_op(op);
        let map = FormalMap::from_realisable(&f).unwrap();
        assert_eq!(map.apply(&Point::zeros(), DEFAULT_FUEL).unwrap(), 5);
        assert!(map.apply(&Point::zeros(), 1).is_err());
    }

    #[test]
    fn realiser_rebuilt_from_a_map_reproduces_the_function() {
        let op = BrouwerOp::sup(
            vec![BrouwerOp::leaf(2), BrouwerOp::sup_uniform(BrouwerOp::leaf(9))],
            BrouwerOp::leaf(1),
        );
        let f = ContinuousFn::from_op(op);
        let map = FormalMap::from_realisable(&f).unwrap();
        let g = map.to_continuous().unwrap();
        for p in [Point::zeros(), Point::from_prefix(seq![1, 3]), Point::from_prefix(seq![5])] {
            assert_eq!(f.apply(&p), g.apply(&p));
        }
    }

    #[test]
    fn undefined_witness_values_are_rejected_with_the_address() {
        let witness = uniform_witness(1);
        let map = FormalMap::new(|_, _| false, witness, |_| None).unwrap();
        match map.to_continuous().unwrap_err() {
            Error::ValueUndefined { at } => assert_eq!(at, seq![0]),
            other => panic!("expected ValueUndefined, got {other}"),
        }
    }

    #[test]
    fn validation_flags_double_values() {
        let witness = CovWitness::from_op(FinSeq::empty(), &BrouwerOp::leaf(1));
        let map = FormalMap::new(
            |a, n| a.is_empty() && (n == 1 || n == 2),
            witness,
            |a| a.is_empty().then_some(1),
        )
        .unwrap();
        let report = map.validate(None, &[], None).unwrap();
        assert!(!report.passed());
        assert_eq!(
            report.single_valued_failures,
            vec![SingleValuedViolation { address: FinSeq::empty(), first: 1, second: 2 }]
        );
        assert!(report.totality_failures.is_empty());
    }

    #[test]
    fn validation_flags_empty_relations() {
        let map = FormalMap::new(|_, _| false, uniform_witness(1), |_| None).unwrap();
        let report = map.validate(None, &[], None).unwrap();
        assert!(!report.passed());
        assert!(!report.totality_failures.is_empty());
        assert!(report.single_valued_failures.is_empty());
    }

    #[test]
    fn validation_checks_the_diagram_on_samples() {
        let f = ContinuousFn::from_op(BrouwerOp::sup(
            vec![BrouwerOp::leaf(1)],
            BrouwerOp::leaf(3),
        ));
        let map = FormalMap::from_realisable(&f).unwrap();
        let samples = vec![Point::zeros(), Point::from_prefix(seq![4])];
        let report = map.validate(Some(&f), &samples, None).unwrap();
        assert!(report.passed());
        assert!(!report.unverified);

        let other = ContinuousFn::new(|_| 9);
        let report = map.validate(Some(&other), &samples, None).unwrap();
        assert_eq!(report.diagram_issues.len(), 2);
    }

    #[test]
    fn map_tables_round_trip_through_json() {
        let op = BrouwerOp::sup(vec![BrouwerOp::leaf(4), BrouwerOp::leaf(2)], BrouwerOp::leaf(7));
        let f = ContinuousFn::from_op(op);
        let map = FormalMap::from_realisable(&f).unwrap();
        let js = serde_json::to_string(&map).unwrap();
        assert_eq!(
            js,
            concat!(
                r#"{"witness":{"root":[],"shape":{"sup":{"children":[{"leaf":1},{"leaf":1}],"#,
                r#""default":{"leaf":1}}}},"#,
                r#""values":[{"addr":[0],"n":3},{"addr":[1],"n":1},{"addr":[2],"n":6}]}"#
            )
        );
        let back: FormalMap = serde_json::from_str(&js).unwrap();
        // default family members resolve to the tabulated representative
        assert_eq!(back.value_at(&seq![2]), Some(6));
        assert_eq!(back.value_at(&seq![9]), Some(6));
        assert_eq!(back.value_at(&seq![0]), Some(3));
        assert_eq!(back.value_at(&FinSeq::empty()), None);
        assert!(back.relates(&seq![9], 6));
        assert!(!back.relates(&seq![9], 3));
        for p in [Point::zeros(), Point::from_prefix(seq![1]), Point::from_prefix(seq![6, 6])] {
            assert_eq!(back.apply(&p, DEFAULT_FUEL).unwrap(), f.apply(&p));
        }
    }

    #[test]
    fn canonicalization_clamps_only_default_indices() {
        let shape = BrouwerOp::sup(
            vec![BrouwerOp::sup(vec![BrouwerOp::leaf(1)], BrouwerOp::leaf(1)), BrouwerOp::leaf(1)],
            BrouwerOp::leaf(1),
        );
        assert_eq!(canonical_address(&shape, &seq![0, 5]), seq![0, 1]);
        assert_eq!(canonical_address(&shape, &seq![0, 0]), seq![0, 0]);
        assert_eq!(canonical_address(&shape, &seq![8]), seq![2]);
        // entries below a leaf are preserved untouched
        assert_eq!(canonical_address(&shape, &seq![1, 4, 4]), seq![1, 4, 4]);
    }
}
