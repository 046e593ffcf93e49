//! Brouwer operations: well-founded certificates of continuity.
//!
//! A Brouwer operation is a countably branching tree. A leaf carrying the
//! value `v >= 1` denotes the neighbourhood function that answers `v` on
//! every address; an internal node defers to the child selected by the next
//! entry and answers 0 at its own address. Well-foundedness makes every
//! path hit a leaf, so the induced function on points is total, and the
//! depth at which the leaf is reached is a modulus of continuity: the
//! answer only depends on that much of the point.
//!
//! Trees come in two child layouts. `Tabular` stores finitely many explicit
//! children plus a default child standing for every index at or beyond the
//! explicit width; such trees are finite objects and support exact
//! whole-tree judgements. `Generated` produces children from a rule on
//! demand; it supports evaluation (which only ever walks one path) and
//! bounded probes that answer "unverified" when their budget runs out.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::seq::{FinSeq, Point};
use crate::{Cutoff, Error, DEFAULT_FUEL};

/// A well-founded continuity certificate.
///
/// Leaf values must be at least 1; `BrouwerOp::leaf` enforces this and the
/// JSON form rejects anything smaller. Value `n + 1` at a leaf encodes the
/// answer `n`, keeping 0 free to mean "still reading".
#[derive(Clone)]
pub enum BrouwerOp {
    Leaf(u64),
    Sup(Children),
}

/// Child layout of an internal node.
#[derive(Clone)]
pub enum Children {
    /// Children 0 through `explicit.len() - 1` as listed, every later index
    /// behaving like `default`.
    Tabular { explicit: Vec<BrouwerOp>, default: Box<BrouwerOp> },
    /// Children produced on demand. `cutoff_hint` is the exploration width
    /// bounded probes fall back to when the caller does not supply one.
    Generated { rule: Arc<dyn Fn(u64) -> BrouwerOp + Send + Sync>, cutoff_hint: u64 },
}

impl Children {
    /// The child at index `i`, borrowed when the layout allows it.
    pub fn child(&self, i: u64) -> Cow<'_, BrouwerOp> {
        match self {
            Children::Tabular { explicit, default } => {
                let idx = usize::try_from(i).unwrap_or(usize::MAX);
                match explicit.get(idx) {
                    Some(c) => Cow::Borrowed(c),
                    None => Cow::Borrowed(default),
                }
            }
            Children::Generated { rule, .. } => Cow::Owned(rule(i)),
        }
    }

    fn into_child(self, i: u64) -> BrouwerOp {
        match self {
            Children::Tabular { mut explicit, default } => {
                let idx = usize::try_from(i).unwrap_or(usize::MAX);
                if idx < explicit.len() {
                    explicit.swap_remove(idx)
                } else {
                    *default
                }
            }
            Children::Generated { rule, .. } => rule(i),
        }
    }

    /// Number of explicitly listed children; 0 for generated layouts.
    pub fn explicit_width(&self) -> u64 {
        match self {
            Children::Tabular { explicit, .. } => explicit.len() as u64,
            Children::Generated { .. } => 0,
        }
    }
}

/// Result of evaluating an operation against a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Eval {
    /// The answer of the denoted function.
    pub value: u64,
    /// How many entries of the point were read: the least `n` at which the
    /// operation is positive on the initial segment of length `n`.
    pub modulus: usize,
}

/// One enumerated bar address with the value the operation takes there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BarItem {
    #[serde(rename = "addr")]
    pub address: FinSeq,
    pub value: u64,
}

/// A (possibly truncated) listing of an operation's bar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarListing {
    pub items: Vec<BarItem>,
    /// True when bar addresses exist that are neither listed nor identified
    /// with a listed default-family representative.
    pub truncated: bool,
}

/// Options for [`BrouwerOp::bar`].
#[derive(Clone, Debug)]
pub struct BarOptions {
    /// Expansion width per node; each node lists every explicit child plus
    /// at least one representative of its default family, so `None`
    /// (meaning `max(width + 1, 2)`) and small cutoffs still produce
    /// listings that are complete up to the default-family identification.
    pub cutoff: Option<u64>,
    /// Maximum number of items to list.
    pub limit: Option<usize>,
    /// Budget on visited nodes, guarding against generated trees with no
    /// reachable leaves.
    pub fuel: usize,
}

impl Default for BarOptions {
    fn default() -> Self {
        BarOptions { cutoff: None, limit: None, fuel: DEFAULT_FUEL }
    }
}

/// One segment of a grouped bar address.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    /// Exactly this index.
    At(u64),
    /// Every index at or beyond this one (a default family).
    From(u64),
}

impl Serialize for Segment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Segment::At(n) => s.serialize_u64(*n),
            Segment::From(k) => {
                #[derive(Serialize)]
                struct Ge {
                    ge: u64,
                }
                Ge { ge: *k }.serialize(s)
            }
        }
    }
}

/// A whole family of bar addresses sharing one value: the product of its
/// segments, where a `From` segment ranges over all indices it covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BarGroup {
    #[serde(rename = "addr")]
    pub segments: Vec<Segment>,
    pub value: u64,
}

impl BarGroup {
    /// The least concrete address in the family.
    pub fn representative(&self) -> FinSeq {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::At(n) => *n,
                Segment::From(k) => *k,
            })
            .collect()
    }
}

/// Outcome of asking whether an operation is constant below an address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constancy {
    Constant,
    /// Two addresses below the queried one taking different values.
    Differs { left: FinSeq, right: FinSeq },
    /// The probe budget ran out before the subtree was exhausted.
    Unverified,
}

/// Outcome of comparing two operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equal,
    Distinct,
    /// No difference found, but a generated layout kept the comparison from
    /// being exhaustive.
    Unverified,
}

impl BrouwerOp {
    /// A leaf certificate. Panics if `value` is 0; leaves answer
    /// `value - 1` and must stay positive to be distinguishable from the
    /// "still reading" marker.
    pub fn leaf(value: u64) -> Self {
        assert!(value >= 1, "leaf values must be at least 1");
        BrouwerOp::Leaf(value)
    }

    /// The certificate of the constant function answering `n` immediately.
    pub fn constant(n: u64) -> Self {
        BrouwerOp::Leaf(n.checked_add(1).expect("natural overflow in leaf encoding"))
    }

    /// An internal node with explicitly listed children and a default child
    /// for every index at or beyond the explicit width.
    pub fn sup(explicit: Vec<BrouwerOp>, default: BrouwerOp) -> Self {
        BrouwerOp::Sup(Children::Tabular { explicit, default: Box::new(default) })
    }

    /// An internal node whose children all equal `child`.
    pub fn sup_uniform(child: BrouwerOp) -> Self {
        BrouwerOp::sup(Vec::new(), child)
    }

    /// An internal node with rule-generated children.
    pub fn sup_generated<F>(rule: F, cutoff_hint: u64) -> Self
    where
        F: Fn(u64) -> BrouwerOp + Send + Sync + 'static,
    {
        BrouwerOp::Sup(Children::Generated { rule: Arc::new(rule), cutoff_hint })
    }

    /// The uniform certificate of depth `k`: every path reads exactly `k`
    /// entries and then answers `value - 1`.
    pub fn uniform_depth(k: usize, value: u64) -> Self {
        let mut op = BrouwerOp::leaf(value);
        for _ in 0..k {
            op = BrouwerOp::sup_uniform(op);
        }
        op
    }

    /// The neighbourhood value at address `a`: 0 while the tree is still
    /// internal along `a`, and the leaf's value from the first leaf on the
    /// path onwards.
    pub fn apply(&self, a: &FinSeq) -> u64 {
        let mut cur = Cow::Borrowed(self);
        for i in 0..a.len() {
            let entry = a.get(i).expect("index in range");
            cur = match cur {
                Cow::Borrowed(BrouwerOp::Leaf(v)) => return *v,
                Cow::Owned(BrouwerOp::Leaf(v)) => return v,
                Cow::Borrowed(BrouwerOp::Sup(ch)) => ch.child(entry),
                Cow::Owned(BrouwerOp::Sup(ch)) => Cow::Owned(ch.into_child(entry)),
            };
        }
        match cur.as_ref() {
            BrouwerOp::Leaf(v) => *v,
            BrouwerOp::Sup(_) => 0,
        }
    }

    /// True when `a` is a minimal positive address: the operation is
    /// positive at `a` and zero at every strict prefix.
    pub fn is_bar_address(&self, a: &FinSeq) -> bool {
        if self.apply(a) == 0 {
            return false;
        }
        match a.parent() {
            None => true,
            Some(p) => self.apply(&p) == 0,
        }
    }

    /// Evaluates the denoted function at `p`, also reporting how much of
    /// the point was read. Errs when `fuel` entries are read without
    /// reaching a leaf, which on a well-founded tree only means the budget
    /// was too small.
    pub fn eval(&self, p: &Point, fuel: usize) -> Result<Eval, Error> {
        let mut cur = Cow::Borrowed(self);
        let mut depth = 0usize;
        loop {
            match cur.as_ref() {
                BrouwerOp::Leaf(v) => {
                    return Ok(Eval { value: *v - 1, modulus: depth });
                }
                BrouwerOp::Sup(_) => {
                    if depth >= fuel {
                        return Err(Error::FuelExhausted { what: "evaluation", budget: fuel });
                    }
                }
            }
            let entry = p.at(depth);
            cur = match cur {
                Cow::Borrowed(BrouwerOp::Sup(ch)) => ch.child(entry),
                Cow::Owned(BrouwerOp::Sup(ch)) => Cow::Owned(ch.into_child(entry)),
                _ => unreachable!("leaves returned above"),
            };
            depth += 1;
        }
    }

    /// Lists the bar: the minimal positive addresses, in depth-then-index
    /// order. Tabular trees yield a listing that is complete up to the
    /// identification of each default family with its listed
    /// representatives; generated trees yield a truncated stream.
    pub fn bar(&self, opts: &BarOptions) -> BarListing {
        let mut items = Vec::new();
        let mut truncated = false;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((FinSeq::empty(), self.clone()));
        let mut visited = 0usize;
        while let Some((addr, node)) = queue.pop_front() {
            if let Some(limit) = opts.limit {
                if items.len() >= limit {
                    truncated = true;
                    break;
                }
            }
            if visited >= opts.fuel {
                truncated = true;
                break;
            }
            visited += 1;
            match node {
                BrouwerOp::Leaf(v) => items.push(BarItem { address: addr, value: v }),
                BrouwerOp::Sup(ch) => {
                    let width = match &ch {
                        Children::Tabular { explicit, .. } => {
                            // every explicit child plus at least one
                            // representative of the default family,
                            // whatever the cutoff
                            (explicit.len() as u64 + 1).max(opts.cutoff.unwrap_or(2))
                        }
                        Children::Generated { cutoff_hint, .. } => {
                            truncated = true;
                            opts.cutoff.unwrap_or(*cutoff_hint).max(1)
                        }
                    };
                    for i in 0..width {
                        queue.push_back((addr.extended(i), ch.child(i).into_owned()));
                    }
                }
            }
        }
        BarListing { items, truncated }
    }

    /// The complete bar of a tabular tree as finitely many groups, one per
    /// leaf position, with default families kept symbolic.
    pub fn bar_groups(&self) -> Result<Vec<BarGroup>, Error> {
        fn walk(op: &BrouwerOp, segs: &mut Vec<Segment>, out: &mut Vec<BarGroup>) -> Result<(), Error> {
            match op {
                BrouwerOp::Leaf(v) => {
                    out.push(BarGroup { segments: segs.clone(), value: *v });
                    Ok(())
                }
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    for (i, c) in explicit.iter().enumerate() {
                        segs.push(Segment::At(i as u64));
                        walk(c, segs, out)?;
                        segs.pop();
                    }
                    segs.push(Segment::From(explicit.len() as u64));
                    walk(default, segs, out)?;
                    segs.pop();
                    Ok(())
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    Err(Error::TabularRequired { what: "grouped bar enumeration" })
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out)?;
        Ok(out)
    }

    /// The same tree with every leaf value replaced by 1. The skeleton
    /// remembers where answers appear but forgets what they are.
    pub fn skeleton(&self) -> BrouwerOp {
        match self {
            BrouwerOp::Leaf(_) => BrouwerOp::Leaf(1),
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => BrouwerOp::sup(
                explicit.iter().map(|c| c.skeleton()).collect(),
                default.skeleton(),
            ),
            BrouwerOp::Sup(Children::Generated { rule, cutoff_hint }) => {
                let rule = rule.clone();
                BrouwerOp::Sup(Children::Generated {
                    rule: Arc::new(move |i| rule(i).skeleton()),
                    cutoff_hint: *cutoff_hint,
                })
            }
        }
    }

    /// True when no generated layout occurs anywhere in the tree.
    pub fn is_tabular(&self) -> bool {
        match self {
            BrouwerOp::Leaf(_) => true,
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                explicit.iter().all(|c| c.is_tabular()) && default.is_tabular()
            }
            BrouwerOp::Sup(Children::Generated { .. }) => false,
        }
    }

    /// Whether every leaf value in the subtree below `a` is the same, i.e.
    /// whether the denoted function is constant on the cylinder at `a`.
    /// Exact on tabular trees; on generated trees the probe explores
    /// `cutoff.width` children per node down to `cutoff.depth` and answers
    /// [`Constancy::Unverified`] when nothing decisive was found.
    pub fn is_constant_below(&self, a: &FinSeq, cutoff: &Cutoff) -> Constancy {
        // descend to the subtree at `a`; passing a leaf settles the answer
        let mut cur = Cow::Borrowed(self);
        for i in 0..a.len() {
            if matches!(cur.as_ref(), BrouwerOp::Leaf(_)) {
                return Constancy::Constant;
            }
            let entry = a.get(i).expect("index in range");
            cur = match cur {
                Cow::Borrowed(BrouwerOp::Sup(ch)) => ch.child(entry),
                Cow::Owned(BrouwerOp::Sup(ch)) => Cow::Owned(ch.into_child(entry)),
                _ => unreachable!("leaves returned above"),
            };
        }

        let mut first: Option<(FinSeq, u64)> = None;
        let mut complete = true;
        let clash = scan_leaves(cur.as_ref(), a.clone(), 0, cutoff, &mut first, &mut complete);
        match clash {
            Some((left, right)) => Constancy::Differs { left, right },
            None if complete => Constancy::Constant,
            None => Constancy::Unverified,
        }
    }

    /// Structural comparison. Exact between tabular trees; generated
    /// layouts are probed up to `cutoff` and report
    /// [`Equivalence::Unverified`] when no difference surfaces.
    pub fn equivalence(&self, other: &BrouwerOp, cutoff: &Cutoff) -> Equivalence {
        fn go(x: &BrouwerOp, y: &BrouwerOp, depth: usize, cutoff: &Cutoff) -> Equivalence {
            match (x, y) {
                (BrouwerOp::Leaf(u), BrouwerOp::Leaf(v)) => {
                    if u == v {
                        Equivalence::Equal
                    } else {
                        Equivalence::Distinct
                    }
                }
                (BrouwerOp::Leaf(_), BrouwerOp::Sup(_)) | (BrouwerOp::Sup(_), BrouwerOp::Leaf(_)) => {
                    Equivalence::Distinct
                }
                (
                    BrouwerOp::Sup(a @ Children::Tabular { .. }),
                    BrouwerOp::Sup(b @ Children::Tabular { .. }),
                ) => {
                    let w = a.explicit_width().max(b.explicit_width());
                    let mut verdict = Equivalence::Equal;
                    // indices beyond both widths are the two defaults,
                    // compared once at index w
                    for i in 0..=w {
                        match go(&a.child(i), &b.child(i), depth + 1, cutoff) {
                            Equivalence::Distinct => return Equivalence::Distinct,
                            Equivalence::Unverified => verdict = Equivalence::Unverified,
                            Equivalence::Equal => {}
                        }
                    }
                    verdict
                }
                (BrouwerOp::Sup(a), BrouwerOp::Sup(b)) => {
                    if depth >= cutoff.depth {
                        return Equivalence::Unverified;
                    }
                    let hint = |ch: &Children| match ch {
                        Children::Generated { cutoff_hint, .. } => *cutoff_hint,
                        Children::Tabular { explicit, .. } => explicit.len() as u64,
                    };
                    let w = cutoff.width.max(hint(a)).max(hint(b)).max(1);
                    for i in 0..w {
                        if let Equivalence::Distinct = go(&a.child(i), &b.child(i), depth + 1, cutoff)
                        {
                            return Equivalence::Distinct;
                        }
                    }
                    Equivalence::Unverified
                }
            }
        }
        go(self, other, 0, cutoff)
    }
}

/// Depth-first leaf scan used by constancy checks. Returns the first pair
/// of leaf addresses with differing values; `complete` is cleared whenever
/// a generated node keeps the scan from being exhaustive.
fn scan_leaves(
    op: &BrouwerOp,
    addr: FinSeq,
    depth: usize,
    cutoff: &Cutoff,
    first: &mut Option<(FinSeq, u64)>,
    complete: &mut bool,
) -> Option<(FinSeq, FinSeq)> {
    match op {
        BrouwerOp::Leaf(v) => match first {
            None => {
                *first = Some((addr, *v));
                None
            }
            Some((a0, v0)) => {
                if *v0 != *v {
                    Some((a0.clone(), addr))
                } else {
                    None
                }
            }
        },
        BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
            for (i, c) in explicit.iter().enumerate() {
                if let Some(pair) =
                    scan_leaves(c, addr.extended(i as u64), depth + 1, cutoff, first, complete)
                {
                    return Some(pair);
                }
            }
            let rep = explicit.len() as u64;
            scan_leaves(default, addr.extended(rep), depth + 1, cutoff, first, complete)
        }
        BrouwerOp::Sup(Children::Generated { rule, cutoff_hint }) => {
            *complete = false;
            if depth >= cutoff.depth {
                return None;
            }
            let width = cutoff.width.max(*cutoff_hint).max(1);
            for i in 0..width {
                if let Some(pair) =
                    scan_leaves(&rule(i), addr.extended(i), depth + 1, cutoff, first, complete)
                {
                    return Some(pair);
                }
            }
            None
        }
    }
}

impl fmt::Debug for BrouwerOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BrouwerOp::Leaf(v) => write!(f, "Leaf({v})"),
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                write!(f, "Sup({explicit:?} then {default:?})")
            }
            BrouwerOp::Sup(Children::Generated { cutoff_hint, .. }) => {
                write!(f, "Sup(generated, hint {cutoff_hint})")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
enum OpJson {
    #[serde(rename = "leaf")]
    Leaf(u64),
    #[serde(rename = "sup")]
    Sup { children: Vec<OpJson>, default: Box<OpJson> },
}

impl OpJson {
    fn of(op: &BrouwerOp) -> Option<OpJson> {
        match op {
            BrouwerOp::Leaf(v) => Some(OpJson::Leaf(*v)),
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => Some(OpJson::Sup {
                children: explicit.iter().map(OpJson::of).collect::<Option<_>>()?,
                default: Box::new(OpJson::of(default)?),
            }),
            BrouwerOp::Sup(Children::Generated { .. }) => None,
        }
    }

    fn build(self) -> Result<BrouwerOp, Error> {
        match self {
            OpJson::Leaf(0) => Err(Error::ZeroLeaf),
            OpJson::Leaf(v) => Ok(BrouwerOp::Leaf(v)),
            OpJson::Sup { children, default } => Ok(BrouwerOp::sup(
                children.into_iter().map(OpJson::build).collect::<Result<_, _>>()?,
                default.build()?,
            )),
        }
    }
}

impl Serialize for BrouwerOp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match OpJson::of(self) {
            Some(tree) => tree.serialize(s),
            None => Err(S::Error::custom("generated operations are not serializable")),
        }
    }
}

impl<'de> Deserialize<'de> for BrouwerOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        OpJson::deserialize(d)?.build().map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A total function from points to naturals, optionally packaged with a
/// certificate realising it.
///
/// The rule must be continuous and agree with the realiser when one is
/// attached; [`check_realises`] samples exactly that agreement.
#[derive(Clone)]
pub struct ContinuousFn {
    rule: Arc<dyn Fn(&Point) -> u64 + Send + Sync>,
    realiser: Option<BrouwerOp>,
}

impl ContinuousFn {
    pub fn new<F>(rule: F) -> Self
    where
        F: Fn(&Point) -> u64 + Send + Sync + 'static,
    {
        ContinuousFn { rule: Arc::new(rule), realiser: None }
    }

    pub fn with_realiser<F>(rule: F, realiser: BrouwerOp) -> Self
    where
        F: Fn(&Point) -> u64 + Send + Sync + 'static,
    {
        ContinuousFn { rule: Arc::new(rule), realiser: Some(realiser) }
    }

    /// The function an operation denotes, carrying that operation as its
    /// realiser. Evaluation uses the default fuel; a generated operation
    /// that is not actually well-founded will panic rather than mislead.
    pub fn from_op(op: BrouwerOp) -> Self {
        let g = op.clone();
        ContinuousFn {
            rule: Arc::new(move |p| {
                g.eval(p, DEFAULT_FUEL).expect("realiser evaluation exhausted its fuel").value
            }),
            realiser: Some(op),
        }
    }

    pub fn apply(&self, p: &Point) -> u64 {
        (self.rule)(p)
    }

    pub fn realiser(&self) -> Option<&BrouwerOp> {
        self.realiser.as_ref()
    }

    /// The realiser, if present and fully tabular.
    pub fn tabular_realiser(&self) -> Option<&BrouwerOp> {
        self.realiser.as_ref().filter(|r| r.is_tabular())
    }
}

impl fmt::Debug for ContinuousFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.realiser {
            Some(r) => write!(f, "ContinuousFn(realised by {r:?})"),
            None => write!(f, "ContinuousFn(bare rule)"),
        }
    }
}

/// One defect found while checking realisability on samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealiseIssue {
    /// The certificate's answer disagrees with the function.
    Mismatch { sample: usize, expected: u64, got: u64 },
    /// The certificate could not be evaluated within the budget.
    FuelExhausted { sample: usize, budget: usize },
}

/// Outcome of [`check_realises`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealiseReport {
    pub checked: usize,
    pub issues: Vec<RealiseIssue>,
}

impl RealiseReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks `op` against `f` on each sample point: the evaluation must
/// answer exactly `f`'s value. Fuel exhaustion is recorded per sample
/// rather than aborting the run.
pub fn check_realises(
    f: &ContinuousFn,
    op: &BrouwerOp,
    samples: &[Point],
    fuel: usize,
) -> RealiseReport {
    let mut issues = Vec::new();
    for (i, p) in samples.iter().enumerate() {
        match op.eval(p, fuel) {
            Ok(out) => {
                let expected = f.apply(p);
                if out.value != expected {
                    issues.push(RealiseIssue::Mismatch { sample: i, expected, got: out.value });
                }
            }
            Err(_) => issues.push(RealiseIssue::FuelExhausted { sample: i, budget: fuel }),
        }
    }
    RealiseReport { checked: samples.len(), issues }
}

/// Relabels `shape` into a certificate for `f`: every leaf position `a`
/// becomes a leaf answering `f` at the canonical point of the cylinder at
/// `a`. The result has the same skeleton as `shape`.
///
/// Requires `f` to be constant on the cylinder at every leaf position of
/// `shape`. When `f` carries a tabular realiser the requirement is checked
/// exactly (including across whole default families) and a violation is
/// reported with a witnessing address pair; otherwise it is assumed.
pub fn extract_realiser(f: &ContinuousFn, shape: &BrouwerOp) -> Result<BrouwerOp, Error> {
    // family of realiser subtrees covering the cylinder under construction,
    // tagged with the address each subtree sits at
    type Family<'a> = Vec<(FinSeq, &'a BrouwerOp)>;

    fn family_child<'a>(fam: &Family<'a>, i: u64) -> Family<'a> {
        let mut out = Vec::new();
        for (addr, node) in fam {
            match node {
                BrouwerOp::Leaf(_) => out.push((addr.clone(), *node)),
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    let idx = usize::try_from(i).unwrap_or(usize::MAX);
                    let child: &BrouwerOp = explicit.get(idx).map_or(default, |c| c);
                    out.push((addr.extended(i), child));
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    unreachable!("families are built from tabular realisers only")
                }
            }
        }
        out
    }

    fn family_from<'a>(fam: &Family<'a>, w: u64) -> Family<'a> {
        let mut out = Vec::new();
        for (addr, node) in fam {
            match node {
                BrouwerOp::Leaf(_) => out.push((addr.clone(), *node)),
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    for j in w..explicit.len() as u64 {
                        out.push((addr.extended(j), &explicit[j as usize]));
                    }
                    let rep = w.max(explicit.len() as u64);
                    out.push((addr.extended(rep), default));
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    unreachable!("families are built from tabular realisers only")
                }
            }
        }
        out
    }

    fn family_constant(fam: &Family<'_>, at: &FinSeq) -> Result<(), Error> {
        let mut first: Option<(FinSeq, u64)> = None;
        let mut complete = true;
        for (addr, node) in fam {
            if let Some((left, right)) = scan_leaves(
                node,
                addr.clone(),
                0,
                &Cutoff::default(),
                &mut first,
                &mut complete,
            ) {
                return Err(Error::NotConstant { at: at.clone(), left, right });
            }
        }
        Ok(())
    }

    fn go(
        shape: &BrouwerOp,
        fam: &Family<'_>,
        prefix: &FinSeq,
        f: &ContinuousFn,
    ) -> Result<BrouwerOp, Error> {
        match shape {
            BrouwerOp::Leaf(_) => {
                family_constant(fam, prefix)?;
                let value = f.apply(&Point::from_prefix(prefix.clone()));
                let encoded =
                    value.checked_add(1).ok_or(Error::Overflow { what: "leaf encoding" })?;
                Ok(BrouwerOp::Leaf(encoded))
            }
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                let w = explicit.len() as u64;
                let mut out = Vec::with_capacity(explicit.len());
                for (i, c) in explicit.iter().enumerate() {
                    let i = i as u64;
                    out.push(go(c, &family_child(fam, i), &prefix.extended(i), f)?);
                }
                let d = go(default, &family_from(fam, w), &prefix.extended(w), f)?;
                Ok(BrouwerOp::sup(out, d))
            }
            BrouwerOp::Sup(Children::Generated { .. }) => {
                Err(Error::TabularRequired { what: "realiser extraction" })
            }
        }
    }

    let fam: Family<'_> = match f.tabular_realiser() {
        Some(r) => vec![(FinSeq::empty(), r)],
        None => Vec::new(),
    };
    go(shape, &fam, &FinSeq::empty(), f)
}
