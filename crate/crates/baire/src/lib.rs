//! Computational continuity on Baire space.
//!
//! Baire space is the space of infinite sequences of naturals. A continuous
//! function from Baire space to the naturals only ever inspects a finite
//! prefix of its argument, and that fact can be carried around as data: a
//! well-founded tree whose leaves say "once you have read this much, the
//! answer is fixed". This crate makes those certificates first-class and
//! keeps every judgement about them either exact or explicitly bounded.
//!
//! The pieces:
//!
//! - [`seq`]: finite sequences as tree addresses, points of Baire space with
//!   finitely described tails, and decidable sets of addresses.
//! - [`brouwer`]: [`BrouwerOp`] certificates, evaluation against points,
//!   bar enumeration, and extraction of a certificate from a function that
//!   is known to be locally constant.
//! - [`formal`]: the same certificates repackaged as cover witnesses for
//!   the formal (point-free) presentation, and relations that act as maps
//!   out of it.
//! - [`fan`]: finitely branching trees, c-bars, and uniform continuity
//!   moduli over them.
//! - [`testkit`]: seeded generators and brute-force oracles used to keep
//!   the fast paths honest.
//!
//! ```
//! use baire::{seq::Point, brouwer::BrouwerOp, DEFAULT_FUEL};
//!
//! // "answer 4, after reading one entry, plus that entry"
//! let op = BrouwerOp::sup_generated(|n| BrouwerOp::leaf(n + 5), 4);
//! let out = op.eval(&Point::from_prefix([7].into()), DEFAULT_FUEL).unwrap();
//! assert_eq!((out.value, out.modulus), (11, 1));
//! ```

pub mod brouwer;
pub mod fan;
pub mod formal;
pub mod seq;
pub mod testkit;

use thiserror::Error;

/// Default depth budget for evaluating generated operations against a point.
pub const DEFAULT_FUEL: usize = 10_000;

/// Default depth budget for uniform-modulus searches over fans.
pub const DEFAULT_SEARCH_DEPTH: usize = 64;

/// Bounds for probing structures that cannot be inspected exhaustively.
///
/// `width` caps how many children of a generated node are explored, `depth`
/// how deep the probe descends. Exact (tabular) queries ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cutoff {
    pub width: u64,
    pub depth: usize,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { width: 4, depth: 64 }
    }
}

/// Everything that can go wrong across the crate.
///
/// Bounded procedures that merely fail to reach a verdict do not error;
/// they return an `Unverified`-style outcome instead. Errors are reserved
/// for violated preconditions and exhausted budgets.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fuel exhausted after {budget} steps during {what}")]
    FuelExhausted { what: &'static str, budget: usize },
    #[error("{what} requires a width cutoff")]
    CutoffRequired { what: &'static str },
    #[error("cycle tails must be nonempty")]
    EmptyCycle,
    #[error("leaf values must be at least 1")]
    ZeroLeaf,
    #[error("cover shapes must use unit leaves, found leaf value {value}")]
    NonUnitLeaf { value: u64 },
    #[error("{what} requires a realiser")]
    RealiserMissing { what: &'static str },
    #[error("{what} is only available for tabular operations")]
    TabularRequired { what: &'static str },
    #[error("not constant on the cylinder at {at}: values at {left} and {right} disagree")]
    NotConstant { at: FinSeq, left: FinSeq, right: FinSeq },
    #[error("no value assigned at witness address {at}")]
    ValueUndefined { at: FinSeq },
    #[error("not a properly nested prefix chain: {reason}")]
    MalformedFragment { reason: String },
    #[error("spread law violated at {at}: member node has no member child")]
    SpreadLaw { at: FinSeq },
    #[error("tree level widths must be at least 1")]
    ZeroWidth,
    #[error("totality witnesses must be rooted at the empty sequence")]
    WitnessRoot,
    #[error("c-bar carries no well-foundedness witness")]
    WitnessMissing,
    #[error("opaque c-bars support only bounded queries; {what} needs a transparent source")]
    OpaqueCBar { what: &'static str },
    #[error("natural overflow in {what}")]
    Overflow { what: &'static str },
}

pub use brouwer::{BarItem, BarListing, BrouwerOp, Constancy, ContinuousFn, Equivalence, Eval};
pub use fan::{CBar, FanSpec, FanTree};
pub use formal::{check_cover, CovWitness, CoverCheck, FormalMap, FormalPointFragment};
pub use seq::{DecidableSet, FinSeq, Point};
