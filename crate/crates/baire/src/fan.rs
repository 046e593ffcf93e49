//! Finitely branching trees and uniform continuity over them.
//!
//! A spread is a decidable, prefix-closed tree in which every node has a
//! child; a fan additionally branches finitely. Fans are where uniformity
//! lives: a continuous function restricted to the paths of a fan admits a
//! single depth after which nothing it sees can change its answer, and the
//! searches in this module compute that depth or fail loudly within a
//! budget.
//!
//! A [`CBar`] packages a stabilization predicate: a function `delta` on
//! addresses together with the claim that along every path `delta`
//! eventually stops changing. Membership `P(a)` means "`delta` is already
//! settled below `a`". Because that claim is not decidable for an
//! arbitrary `delta`, c-bars carry an explicit well-foundedness witness,
//! and only sources that expose enough structure support exact answers.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brouwer::{extract_realiser, BrouwerOp, Constancy, ContinuousFn};
use crate::formal::{CovWitness, FormalMap};
use crate::seq::{FinSeq, Point};
use crate::{Cutoff, Error, DEFAULT_FUEL};

/// A fan: membership rule plus a branching bound.
///
/// For a member node `a`, the children are exactly the member sequences
/// `a * n` with `n <= bound(a)`. Both rules are total; `bound` may answer
/// anything off the tree.
#[derive(Clone)]
pub struct FanTree {
    member: Arc<dyn Fn(&FinSeq) -> bool + Send + Sync>,
    bound: Arc<dyn Fn(&FinSeq) -> u64 + Send + Sync>,
}

impl FanTree {
    /// The full binary fan: every node has children 0 and 1.
    pub fn full_binary() -> Self {
        FanTree {
            member: Arc::new(|a: &FinSeq| a.entries().iter().all(|&n| n < 2)),
            bound: Arc::new(|_| 1),
        }
    }

    /// Level-dependent widths: level `i` allows entries below `widths[i]`,
    /// levels past the list allow entries below `tail_width`. Every width
    /// must be at least 1 (a spread never runs out of children).
    pub fn bounded_by(widths: Vec<u64>, tail_width: u64) -> Result<Self, Error> {
        if tail_width == 0 || widths.contains(&0) {
            return Err(Error::ZeroWidth);
        }
        let width_at = move |level: usize| widths.get(level).copied().unwrap_or(tail_width);
        let member_widths = width_at.clone();
        Ok(FanTree {
            member: Arc::new(move |a: &FinSeq| {
                (0..a.len()).all(|i| a.get(i).expect("index in range") < member_widths(i))
            }),
            bound: Arc::new(move |a: &FinSeq| width_at(a.len()) - 1),
        })
    }

    /// A finite table of member nodes, prefix-closed automatically. Nodes
    /// listed in `full` continue forever below themselves along index 0
    /// (the minimal way to satisfy the spread law on a marked leaf); every
    /// unmarked leaf of the table violates the spread law and is rejected.
    pub fn explicit_table(nodes: Vec<FinSeq>, full: Vec<FinSeq>) -> Result<Self, Error> {
        let mut set: BTreeSet<FinSeq> = BTreeSet::new();
        for a in nodes.iter().chain(full.iter()) {
            for p in a.prefixes() {
                set.insert(p);
            }
            set.insert(a.clone());
        }
        set.insert(FinSeq::empty());
        let full: Vec<FinSeq> = {
            let mut f = full;
            f.sort();
            f.dedup();
            f
        };

        let covered = |a: &FinSeq, full: &[FinSeq]| {
            full.iter().any(|m| {
                m.is_prefix_of(a)
                    && (m.len()..a.len()).all(|i| a.get(i).expect("index in range") == 0)
            })
        };
        for a in &set {
            if covered(a, &full) {
                continue;
            }
            let has_child = set.iter().any(|b| b.parent().as_ref() == Some(a));
            if !has_child {
                return Err(Error::SpreadLaw { at: a.clone() });
            }
        }

        let member_set = set.clone();
        let member_full = full.clone();
        Ok(FanTree {
            member: Arc::new(move |a: &FinSeq| {
                member_set.contains(a) || covered(a, &member_full)
            }),
            bound: Arc::new(move |a: &FinSeq| {
                let mut top = if covered(a, &full) { Some(0) } else { None };
                for b in &set {
                    if b.parent().as_ref() == Some(a) {
                        let last = b.get(b.len() - 1).expect("children are nonempty");
                        top = Some(top.map_or(last, |t: u64| t.max(last)));
                    }
                }
                top.unwrap_or(0)
            }),
        })
    }

    /// Builds the fan a serialized spec describes.
    pub fn from_spec(spec: &FanSpec) -> Result<Self, Error> {
        match spec {
            FanSpec::FullBinary => Ok(FanTree::full_binary()),
            FanSpec::Bounded { widths, tail_width } => {
                FanTree::bounded_by(widths.clone(), *tail_width)
            }
            FanSpec::Explicit { nodes, full } => {
                FanTree::explicit_table(nodes.clone(), full.clone())
            }
        }
    }

    pub fn contains(&self, a: &FinSeq) -> bool {
        (self.member)(a)
    }

    pub fn bound(&self, a: &FinSeq) -> u64 {
        (self.bound)(a)
    }

    /// The member children of `a`, in index order.
    pub fn children(&self, a: &FinSeq) -> Vec<FinSeq> {
        if !self.contains(a) {
            return Vec::new();
        }
        (0..=self.bound(a)).map(|n| a.extended(n)).filter(|b| self.contains(b)).collect()
    }

    /// All member nodes at exactly depth `d`, in lexicographic order.
    pub fn nodes_at_depth(&self, d: usize) -> Vec<FinSeq> {
        let mut level = vec![FinSeq::empty()];
        if !self.contains(&FinSeq::empty()) {
            return Vec::new();
        }
        for _ in 0..d {
            level = level.iter().flat_map(|a| self.children(a)).collect();
        }
        level
    }
}

impl fmt::Debug for FanTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FanTree(root bound {})", self.bound(&FinSeq::empty()))
    }
}

/// Serializable fan descriptions for the canned constructors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FanSpec {
    FullBinary,
    Bounded {
        widths: Vec<u64>,
        #[serde(rename = "tailWidth")]
        tail_width: u64,
    },
    Explicit {
        nodes: Vec<FinSeq>,
        #[serde(default)]
        full: Vec<FinSeq>,
    },
}

/// Where a c-bar's stabilization structure comes from.
#[derive(Clone, Debug)]
pub enum CBarSource {
    /// `delta` is the (clipped) neighbourhood function of an operation;
    /// membership is exactly positivity.
    FromBrouwer(BrouwerOp),
    /// `delta(a)` is a realised function at the canonical point of `a`;
    /// membership is exactly local constancy of the realiser.
    FromFunction(ContinuousFn),
    /// `delta` is a black box; only bounded queries are possible.
    Opaque,
}

/// Grid used for bounded membership probes of opaque c-bars: extensions of
/// length up to this, entries below the cutoff width.
const OPAQUE_GRID_LEN: usize = 3;

/// A c-set barring the universal spread: `delta` stabilizes along every
/// path, and `member(a)` asks whether it is already settled below `a`.
#[derive(Clone)]
pub struct CBar {
    delta: Arc<dyn Fn(&FinSeq) -> u64 + Send + Sync>,
    source: CBarSource,
    witness: Option<BrouwerOp>,
}

impl CBar {
    /// The characteristic c-bar of an operation: `delta` is its
    /// neighbourhood function clipped to 0 or 1, witnessed by the
    /// operation itself.
    pub fn from_brouwer(op: BrouwerOp) -> Self {
        let rule = op.clone();
        CBar {
            delta: Arc::new(move |a: &FinSeq| rule.apply(a).min(1)),
            witness: Some(op.clone()),
            source: CBarSource::FromBrouwer(op),
        }
    }

    /// The stabilization c-bar of a realised function: `delta(a)` is the
    /// function's value at `a * 0^omega`, witnessed by the realiser.
    pub fn from_function(f: &ContinuousFn) -> Result<Self, Error> {
        let realiser =
            f.realiser().ok_or(Error::RealiserMissing { what: "c-bar construction" })?;
        if !realiser.is_tabular() {
            return Err(Error::TabularRequired { what: "c-bar construction" });
        }
        let g = f.clone();
        Ok(CBar {
            delta: Arc::new(move |a: &FinSeq| g.apply(&Point::from_prefix(a.clone()))),
            witness: Some(realiser.clone()),
            source: CBarSource::FromFunction(f.clone()),
        })
    }

    /// A black-box `delta`, optionally with a well-foundedness witness.
    /// Membership queries are bounded; conversions need the witness.
    pub fn opaque<D>(delta: D, witness: Option<BrouwerOp>) -> Self
    where
        D: Fn(&FinSeq) -> u64 + Send + Sync + 'static,
    {
        CBar { delta: Arc::new(delta), source: CBarSource::Opaque, witness }
    }

    pub fn delta(&self, a: &FinSeq) -> u64 {
        (self.delta)(a)
    }

    pub fn source(&self) -> &CBarSource {
        &self.source
    }

    pub fn witness(&self) -> Option<&BrouwerOp> {
        self.witness.as_ref()
    }

    /// Does `delta` agree with `delta(a)` on every extension of `a`?
    ///
    /// Exact when the source permits whole-subtree analysis (tabular
    /// data); otherwise a bounded probe over the cutoff grid that can
    /// refute but never affirm.
    pub fn member(&self, a: &FinSeq, cutoff: &Cutoff) -> Constancy {
        match &self.source {
            CBarSource::FromFunction(_) => self
                .witness
                .as_ref()
                .expect("function-sourced c-bars carry their realiser")
                .is_constant_below(a, cutoff),
            CBarSource::FromBrouwer(op) => {
                if op.apply(a) > 0 {
                    return Constancy::Constant;
                }
                // positive somewhere below: walk index 0 to the leaf
                let mut b = a.clone();
                for _ in 0..cutoff.depth.max(1) {
                    b = b.extended(0);
                    if op.apply(&b) > 0 {
                        return Constancy::Differs { left: a.clone(), right: b };
                    }
                }
                Constancy::Unverified
            }
            CBarSource::Opaque => {
                if let Some(w) = &self.witness {
                    if w.apply(a) > 0 {
                        // at or beyond the witness bar delta is settled
                        return Constancy::Constant;
                    }
                }
                let base = self.delta(a);
                let mut grid = vec![FinSeq::empty()];
                for _ in 0..OPAQUE_GRID_LEN.min(cutoff.depth) {
                    let next: Vec<FinSeq> =
                        grid.iter().flat_map(|b| (0..cutoff.width).map(|n| b.extended(n))).collect();
                    for b in &next {
                        let probe = a.concat(b);
                        if self.delta(&probe) != base {
                            return Constancy::Differs { left: a.clone(), right: probe };
                        }
                    }
                    grid = next;
                }
                Constancy::Unverified
            }
        }
    }

    /// The function a c-bar computes: follow the point to the witness bar,
    /// collect the depths where `delta` changes along the way, and answer
    /// the largest (at least 1). The witness guarantees the collection is
    /// complete at the bar. A tabular witness also yields a realiser,
    /// relabelled from its skeleton by these very values.
    pub fn to_function(&self) -> Result<ContinuousFn, Error> {
        let witness = self.witness.clone().ok_or(Error::WitnessMissing)?;
        let delta = self.delta.clone();
        let eval_witness = witness.clone();
        let rule = move |p: &Point| {
            let stop = eval_witness
                .eval(p, DEFAULT_FUEL)
                .expect("witness evaluation exhausted its fuel")
                .modulus;
            let mut best = 1u64;
            let mut prev = delta(&p.initial_segment(0));
            for n in 1..=stop {
                let cur = delta(&p.initial_segment(n));
                if cur != prev {
                    best = best.max((n - 1) as u64);
                }
                prev = cur;
            }
            best
        };
        if witness.is_tabular() {
            let bare = ContinuousFn::new(rule.clone());
            let realiser = extract_realiser(&bare, &witness.skeleton())?;
            Ok(ContinuousFn::with_realiser(rule, realiser))
        } else {
            Ok(ContinuousFn::new(rule))
        }
    }
}

impl fmt::Debug for CBar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.source {
            CBarSource::FromBrouwer(_) => "from operation",
            CBarSource::FromFunction(_) => "from function",
            CBarSource::Opaque => "opaque",
        };
        write!(f, "CBar({kind}, witness {})", if self.witness.is_some() { "yes" } else { "no" })
    }
}

/// The least depth `N` such that the realiser of `f` is constant below
/// every member node of `fan` at depth `N`: past that depth, what `f`
/// answers on a path through the fan is already determined.
///
/// The search walks the fan depth-first, descending only where constancy
/// has not yet been reached, so it terminates exactly when the modulus
/// exists within `depth_budget` and errs otherwise.
pub fn uniform_modulus(f: &ContinuousFn, fan: &FanTree, depth_budget: usize) -> Result<usize, Error> {
    if f.realiser().is_none() {
        return Err(Error::RealiserMissing { what: "uniform modulus search" });
    }
    let realiser =
        f.tabular_realiser().ok_or(Error::TabularRequired { what: "uniform modulus search" })?;
    settle_depth(fan, depth_budget, &mut |a| {
        realiser.is_constant_below(a, &Cutoff::default()) == Constancy::Constant
    })
}

/// The least depth at which `settled` holds on every member node, computed
/// as the recursion `depth(a) = 0` if settled else `1 + max over children`.
/// Relies on `settled` being monotone (settled nodes stay settled below).
fn settle_depth(
    fan: &FanTree,
    depth_budget: usize,
    settled: &mut dyn FnMut(&FinSeq) -> bool,
) -> Result<usize, Error> {
    fn go(
        fan: &FanTree,
        a: &FinSeq,
        remaining: usize,
        settled: &mut dyn FnMut(&FinSeq) -> bool,
    ) -> Result<usize, Error> {
        if settled(a) {
            return Ok(0);
        }
        if remaining == 0 {
            return Err(Error::FuelExhausted {
                what: "uniform modulus search",
                budget: remaining,
            });
        }
        let mut deepest = 0usize;
        for child in fan.children(a) {
            deepest = deepest.max(go(fan, &child, remaining - 1, settled)?);
        }
        Ok(1 + deepest)
    }
    go(fan, &FinSeq::empty(), depth_budget, settled).map_err(|e| match e {
        Error::FuelExhausted { what, .. } => Error::FuelExhausted { what, budget: depth_budget },
        other => other,
    })
}

/// The companion bound from the uniform modulus: `max(N, largest value of
/// f on the depth-N slice) + 1`. Every initial segment of that length is
/// past both the modulus and every value the function can take on the
/// slice.
pub fn modulus_m(f: &ContinuousFn, fan: &FanTree, n: usize) -> u64 {
    let slice = fan.nodes_at_depth(n);
    let top = slice
        .into_iter()
        .map(|a| f.apply(&Point::from_prefix(a)))
        .max()
        .unwrap_or(0);
    (n as u64).max(top).checked_add(1).expect("modulus overflow")
}

/// The least depth `N` at which `p.member` confirms every member node of
/// the fan. For opaque sources this is relative to the bounded probe: a
/// node the probe cannot settle counts as unconfirmed.
pub fn uniform_bar_modulus(
    p: &CBar,
    fan: &FanTree,
    cutoff: &Cutoff,
    depth_budget: usize,
) -> Result<usize, Error> {
    settle_depth(fan, depth_budget, &mut |a| p.member(a, cutoff) == Constancy::Constant)
}

/// The formal map a c-bar induces against a function: `a` relates to `n`
/// exactly when `delta` is settled below `a` and `f` answers `n` at the
/// canonical point of `a`. The c-bar's witness becomes the totality
/// witness.
pub fn map_from_cbar(p: &CBar, f: &ContinuousFn) -> Result<FormalMap, Error> {
    if matches!(p.source(), CBarSource::Opaque) {
        return Err(Error::OpaqueCBar { what: "formal map construction" });
    }
    let witness_op = p.witness().expect("non-opaque c-bars carry a witness");
    if !witness_op.is_tabular() {
        return Err(Error::TabularRequired { what: "formal map construction" });
    }
    let witness = CovWitness::from_op(FinSeq::empty(), witness_op);
    let p1 = p.clone();
    let p2 = p.clone();
    let f1 = f.clone();
    let f2 = f.clone();
    FormalMap::new(
        move |a, n| {
            p1.member(a, &Cutoff::default()) == Constancy::Constant
                && f1.apply(&Point::from_prefix(a.clone())) == n
        },
        witness,
        move |a| {
            (p2.member(a, &Cutoff::default()) == Constancy::Constant)
                .then(|| f2.apply(&Point::from_prefix(a.clone())))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    /// min(p(0),1) + min(p(1),1) with its tabular realiser.
    fn clipped_sum() -> ContinuousFn {
        let level1 = |base: u64| {
            BrouwerOp::sup(
                vec![BrouwerOp::leaf(base + 1), BrouwerOp::leaf(base + 2)],
                BrouwerOp::leaf(base + 2),
            )
        };
        let op = BrouwerOp::sup(vec![level1(0), level1(1)], level1(1));
        ContinuousFn::from_op(op)
    }

    #[test]
    fn full_binary_members_and_bounds() {
        let fan = FanTree::full_binary();
        assert!(fan.contains(&FinSeq::empty()));
        assert!(fan.contains(&seq![0, 1, 1, 0]));
        assert!(!fan.contains(&seq![0, 2]));
        assert_eq!(fan.bound(&seq![1, 1]), 1);
        assert_eq!(fan.children(&seq![1]), vec![seq![1, 0], seq![1, 1]]);
        assert_eq!(fan.nodes_at_depth(2).len(), 4);
    }

    #[test]
    fn level_bounded_fans_narrow_by_level() {
        let fan = FanTree::bounded_by(vec![3, 1], 1).unwrap();
        assert_eq!(fan.nodes_at_depth(1), vec![seq![0], seq![1], seq![2]]);
        assert_eq!(fan.nodes_at_depth(2), vec![seq![0, 0], seq![1, 0], seq![2, 0]]);
        assert_eq!(fan.nodes_at_depth(3).len(), 3);
        assert!(fan.contains(&seq![2, 0, 0]));
        assert!(!fan.contains(&seq![2, 1]));
        assert!(!fan.contains(&seq![3]));
        assert!(matches!(FanTree::bounded_by(vec![2, 0], 1), Err(Error::ZeroWidth)));
        assert!(matches!(FanTree::bounded_by(vec![2], 0), Err(Error::ZeroWidth)));
    }

    #[test]
    fn explicit_tables_are_prefix_closed_and_validated() {
        let fan = FanTree::explicit_table(vec![seq![0, 1]], vec![seq![0, 1], seq![1]]).unwrap();
        assert!(fan.contains(&FinSeq::empty()));
        assert!(fan.contains(&seq![0]));
        assert!(fan.contains(&seq![0, 1]));
        // full markers continue along index 0 only
        assert!(fan.contains(&seq![0, 1, 0, 0]));
        assert!(!fan.contains(&seq![0, 1, 1]));
        assert!(fan.contains(&seq![1, 0]));
        assert!(!fan.contains(&seq![2]));
        assert_eq!(fan.bound(&FinSeq::empty()), 1);
        assert_eq!(fan.children(&seq![0]), vec![seq![0, 1]]);

        let err = FanTree::explicit_table(vec![seq![0], seq![1]], vec![]).unwrap_err();
        assert!(matches!(err, Error::SpreadLaw { .. }));
    }

    #[test]
    fn constant_functions_are_settled_everywhere() {
        let p = CBar::from_function(&ContinuousFn::from_op(BrouwerOp::leaf(5))).unwrap();
        assert_eq!(p.member(&FinSeq::empty(), &Cutoff::default()), Constancy::Constant);
        assert_eq!(p.member(&seq![9, 9], &Cutoff::default()), Constancy::Constant);
        assert_eq!(p.delta(&seq![7]), 4);
    }

    #[test]
    fn clipped_first_entry_settles_after_one_step() {
        // min(p(0), 1) realised over explicit children 0 and 1
        let op = BrouwerOp::sup(
            vec![BrouwerOp::leaf(1), BrouwerOp::leaf(2)],
            BrouwerOp::leaf(2),
        );
        let p = CBar::from_function(&ContinuousFn::from_op(op)).unwrap();
        assert!(matches!(
            p.member(&FinSeq::empty(), &Cutoff::default()),
            Constancy::Differs { .. }
        ));
        assert_eq!(p.member(&seq![0], &Cutoff::default()), Constancy::Constant);
        assert_eq!(p.member(&seq![1], &Cutoff::default()), Constancy::Constant);
        assert_eq!(p.member(&seq![4], &Cutoff::default()), Constancy::Constant);
    }

    #[test]
    fn membership_is_monotone_under_extension() {
        let p = CBar::from_function(&clipped_sum()).unwrap();
        for a in [seq![0, 0], seq![1, 1], seq![2, 0]] {
            assert_eq!(p.member(&a, &Cutoff::default()), Constancy::Constant);
            for n in 0..3 {
                assert_eq!(p.member(&a.extended(n), &Cutoff::default()), Constancy::Constant);
            }
        }
    }

    #[test]
    fn operation_sourced_membership_is_positivity() {
        let op = BrouwerOp::sup(vec![BrouwerOp::leaf(2)], BrouwerOp::leaf(3));
        let p = CBar::from_brouwer(op);
        assert_eq!(p.delta(&FinSeq::empty()), 0);
        assert_eq!(p.delta(&seq![0]), 1);
        assert_eq!(p.delta(&seq![5]), 1);
        assert_eq!(
            p.member(&FinSeq::empty(), &Cutoff::default()),
            Constancy::Differs { left: FinSeq::empty(), right: seq![0] }
        );
        assert_eq!(p.member(&seq![0], &Cutoff::default()), Constancy::Constant);
        assert_eq!(p.member(&seq![0, 4], &Cutoff::default()), Constancy::Constant);
    }

    #[test]
    fn opaque_membership_stays_bounded() {
        let p = CBar::opaque(|_| 7, None);
        assert_eq!(p.member(&FinSeq::empty(), &Cutoff::default()), Constancy::Unverified);
        let q = CBar::opaque(|a: &FinSeq| a.len() as u64, None);
        assert!(matches!(
            q.member(&FinSeq::empty(), &Cutoff::default()),
            Constancy::Differs { .. }
        ));
    }

    #[test]
    fn depth_clipped_delta_computes_its_top_change_point() {
        let p = CBar::opaque(
            |a: &FinSeq| (a.len() as u64).min(3),
            Some(BrouwerOp::uniform_depth(3, 1)),
        );
        let f = p.to_function().unwrap();
        for point in [Point::zeros(), Point::from_prefix(seq![5, 2, 8, 1])] {
            assert_eq!(f.apply(&point), 2);
        }
        let realiser = f.realiser().expect("tabular witness yields a realiser");
        let report = crate::brouwer::check_realises(
            &f,
            realiser,
            &[Point::zeros(), Point::from_prefix(seq![3, 3, 3])],
            DEFAULT_FUEL,
        );
        assert!(report.passed());
    }

    #[test]
    fn constant_delta_answers_one() {
        let p = CBar::opaque(|_| 4, Some(BrouwerOp::leaf(1)));
        let f = p.to_function().unwrap();
        assert_eq!(f.apply(&Point::zeros()), 1);
        assert_eq!(f.apply(&Point::from_prefix(seq![9])), 1);
    }

    #[test]
    fn single_step_delta_answers_one() {
        let p = CBar::opaque(
            |a: &FinSeq| u64::from(!a.is_empty()),
            Some(BrouwerOp::uniform_depth(1, 1)),
        );
        let f = p.to_function().unwrap();
        assert_eq!(f.apply(&Point::zeros()), 1);
        assert_eq!(f.apply(&Point::from_prefix(seq![6, 6])), 1);
    }

    #[test]
    fn missing_witnesses_are_rejected() {
        let p = CBar::opaque(|_| 0, None);
        assert!(matches!(p.to_function(), Err(Error::WitnessMissing)));
    }

    #[test]
    fn uniform_modulus_of_a_constant_is_zero() {
        let f = ContinuousFn::from_op(BrouwerOp::leaf(3));
        assert_eq!(uniform_modulus(&f, &FanTree::full_binary(), 64).unwrap(), 0);
    }

    #[test]
    fn clipped_sum_fixes_after_two_entries_of_the_binary_fan() {
        let f = clipped_sum();
        let fan = FanTree::full_binary();
        assert_eq!(uniform_modulus(&f, &fan, 64).unwrap(), 2);
        assert_eq!(modulus_m(&f, &fan, 2), 3);
    }

    #[test]
    fn first_entry_function_fixes_after_one() {
        let op = BrouwerOp::sup(
            vec![BrouwerOp::leaf(1), BrouwerOp::leaf(2)],
            BrouwerOp::leaf(2),
        );
        let f = ContinuousFn::from_op(op);
        assert_eq!(uniform_modulus(&f, &FanTree::full_binary(), 64).unwrap(), 1);
    }

    #[test]
    fn modulus_searches_report_budget_exhaustion() {
        // realiser depends on every entry along 0^omega beyond the budget
        let op = BrouwerOp::sup(
            vec![BrouwerOp::sup(
                vec![BrouwerOp::sup(vec![BrouwerOp::leaf(1)], BrouwerOp::leaf(2))],
                BrouwerOp::leaf(2),
            )],
            BrouwerOp::leaf(2),
        );
        let f = ContinuousFn::from_op(op);
        let err = uniform_modulus(&f, &FanTree::full_binary(), 2).unwrap_err();
        assert!(matches!(err, Error::FuelExhausted { budget: 2, .. }));
        assert_eq!(uniform_modulus(&f, &FanTree::full_binary(), 3).unwrap(), 3);
    }

    #[test]
    fn bar_modulus_matches_function_modulus() {
        let f = clipped_sum();
        let p = CBar::from_function(&f).unwrap();
        let fan = FanTree::full_binary();
        assert_eq!(
            uniform_bar_modulus(&p, &fan, &Cutoff::default(), 64).unwrap(),
            uniform_modulus(&f, &fan, 64).unwrap()
        );
    }

    #[test]
    fn depth_clipped_delta_is_uniform_at_three() {
        let p = CBar::opaque(
            |a: &FinSeq| (a.len() as u64).min(3),
            Some(BrouwerOp::uniform_depth(3, 1)),
        );
        assert_eq!(
            uniform_bar_modulus(&p, &FanTree::full_binary(), &Cutoff::default(), 64).unwrap(),
            3
        );
    }

    #[test]
    fn maps_from_cbars_validate_and_commute() {
        let f = clipped_sum();
        let p = CBar::from_function(&f).unwrap();
        let map = map_from_cbar(&p, &f).unwrap();
        assert!(map.relates(&seq![0, 0], 0));
        assert!(map.relates(&seq![1, 1], 2));
        assert!(map.relates(&seq![2, 2], 2));
        assert!(!map.relates(&seq![0], 0));
        let samples = vec![Point::zeros(), Point::from_prefix(seq![1]), Point::from_prefix(seq![2, 2])];
        let report = map.validate(Some(&f), &samples, None).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn constant_cbar_maps_to_the_singleton_relation() {
        let f = ContinuousFn::from_op(BrouwerOp::leaf(5));
        let p = CBar::from_function(&f).unwrap();
        let map = map_from_cbar(&p, &f).unwrap();
        assert!(map.relates(&FinSeq::empty(), 4));
        assert!(!map.relates(&FinSeq::empty(), 3));
    }

    #[test]
    fn opaque_cbars_cannot_become_maps() {
        let p = CBar::opaque(|_| 1, Some(BrouwerOp::leaf(1)));
        let f = ContinuousFn::from_op(BrouwerOp::leaf(2));
        assert!(matches!(map_from_cbar(&p, &f), Err(Error::OpaqueCBar { .. })));
    }

    #[test]
    fn fan_specs_round_trip_through_json() {
        let specs = vec![
            (FanSpec::FullBinary, r#"{"kind":"full_binary"}"#),
            (
                FanSpec::Bounded { widths: vec![3, 1], tail_width: 1 },
                r#"{"kind":"bounded","widths":[3,1],"tailWidth":1}"#,
            ),
            (
                FanSpec::Explicit { nodes: vec![seq![0, 1]], full: vec![seq![0, 1]] },
                r#"{"kind":"explicit","nodes":[[0,1]],"full":[[0,1]]}"#,
            ),
        ];
        for (spec, expected) in specs {
            assert_eq!(serde_json::to_string(&spec).unwrap(), expected);
            let back: FanSpec = serde_json::from_str(expected).unwrap();
            assert_eq!(back, spec);
            FanTree::from_spec(&back).unwrap();
        }
    }
}
