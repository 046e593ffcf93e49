//! Seeded generators and brute-force oracles.
//!
//! Everything here exists to catch the fast paths lying. The oracles walk
//! structures with their own loops rather than calling the engine's
//! judgement procedures, so agreement between the two is evidence rather
//! than tautology. Generation is deterministic in the seed, which keeps
//! failures replayable.


use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brouwer::{BrouwerOp, Children, ContinuousFn};
use crate::fan::FanTree;
use crate::seq::{FinSeq, Point};

/// Parameters for random tabular operation generation.
#[derive(Clone, Copy, Debug)]
pub struct OpGenSpec {
    /// Nodes at this depth are always leaves.
    pub max_depth: usize,
    /// Explicit children per node are drawn from `0..=max_width`.
    pub max_width: u64,
    /// Leaf values are drawn from `1..=max_leaf`.
    pub max_leaf: u64,
    pub seed: u64,
}

impl Default for OpGenSpec {
    fn default() -> Self {
        OpGenSpec { max_depth: 5, max_width: 4, max_leaf: 9, seed: 0 }
    }
}

/// Draws one random tabular operation. Deterministic in the spec's seed.
pub fn gen_op(spec: &OpGenSpec) -> BrouwerOp {
    assert!(spec.max_leaf >= 1, "leaf values must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    gen_node(&mut rng, spec, 0)
}

/// Draws `count` operations with seeds derived from the spec's seed; the
/// prefix of a longer run equals a shorter run.
pub fn gen_ops(spec: &OpGenSpec, count: usize) -> Vec<BrouwerOp> {
    (0..count)
        .map(|i| {
            let derived = OpGenSpec {
                seed: spec.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                ..*spec
            };
            gen_op(&derived)
        })
        .collect()
}

fn gen_node(rng: &mut ChaCha8Rng, spec: &OpGenSpec, depth: usize) -> BrouwerOp {
    // leaves get likelier with depth, certain at the bottom
    let leaf_prob = 0.2 + 0.6 * depth as f64 / spec.max_depth.max(1) as f64;
    if depth >= spec.max_depth || rng.gen_bool(leaf_prob.min(1.0)) {
        return BrouwerOp::Leaf(rng.gen_range(1..=spec.max_leaf));
    }
    let width = rng.gen_range(0..=spec.max_width) as usize;
    let explicit = (0..width).map(|_| gen_node(rng, spec, depth + 1)).collect();
    let default = gen_node(rng, spec, depth + 1);
    BrouwerOp::sup(explicit, default)
}

/// Draws sample points: random finite prefixes with zero or cyclic tails.
pub fn gen_points(seed: u64, count: usize, max_prefix: usize, entry_width: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=max_prefix);
            let prefix: FinSeq = (0..len).map(|_| rng.gen_range(0..entry_width)).collect();
            if rng.gen_bool(0.5) {
                Point::from_prefix(prefix)
            } else {
                let cycle_len = rng.gen_range(1..=3);
                let cycle = (0..cycle_len).map(|_| rng.gen_range(0..entry_width)).collect();
                Point::cyclic(prefix, cycle).expect("cycles are nonempty by construction")
            }
        })
        .collect()
}

/// Extension grid for probing functions without a usable realiser:
/// all extensions of length up to 3 with entries below 3.
fn probe_grid() -> Vec<FinSeq> {
    let mut grid = vec![FinSeq::empty()];
    let mut level = vec![FinSeq::empty()];
    for _ in 0..3 {
        level = level.iter().flat_map(|b| (0..3).map(|n| b.extended(n))).collect();
        grid.extend(level.iter().cloned());
    }
    grid
}

/// Probe points witnessing every value `f` can take below `a`: one point
/// per leaf cylinder of the realiser's subtree at `a` when a tabular
/// realiser is available, else the canonical points of a bounded grid of
/// extensions.
fn probe_points_below(f: &ContinuousFn, a: &FinSeq) -> Vec<Point> {
    fn leaf_points(op: &BrouwerOp, at: &FinSeq, out: &mut Vec<Point>) {
        match op {
            BrouwerOp::Leaf(_) => out.push(Point::from_prefix(at.clone())),
            BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                for (i, c) in explicit.iter().enumerate() {
                    leaf_points(c, &at.extended(i as u64), out);
                }
                leaf_points(default, &at.extended(explicit.len() as u64), out);
            }
            BrouwerOp::Sup(Children::Generated { .. }) => {
                unreachable!("probed realisers are tabular")
            }
        }
    }

    if let Some(realiser) = f.tabular_realiser() {
        // walk the realiser down to `a` with its own cursor
        let mut cur = realiser;
        for i in 0..a.len() {
            match cur {
                BrouwerOp::Leaf(_) => break,
                BrouwerOp::Sup(Children::Tabular { explicit, default }) => {
                    let entry = a.get(i).expect("index in range");
                    cur = explicit
                        .get(usize::try_from(entry).unwrap_or(usize::MAX))
                        .unwrap_or(default);
                }
                BrouwerOp::Sup(Children::Generated { .. }) => {
                    unreachable!("tabular realisers have no generated nodes")
                }
            }
        }
        let mut out = Vec::new();
        leaf_points(cur, a, &mut out);
        out
    } else {
        probe_grid().into_iter().map(|b| Point::from_prefix(a.concat(&b))).collect()
    }
}

/// Exhaustive uniform-modulus search: for each depth from 0 up, checks on
/// every member node of the fan that `f` takes a single value on all probe
/// points below the node. Returns the least such depth, or `None` when
/// `max_depth` is exhausted.
///
/// The fan slices are enumerated here with a plain breadth-first loop over
/// the membership rule; nothing is shared with the engine's search.
pub fn brute_force_modulus(f: &ContinuousFn, fan: &FanTree, max_depth: usize) -> Option<usize> {
    let mut slice = vec![FinSeq::empty()];
    if !fan.contains(&FinSeq::empty()) {
        return None;
    }
    for depth in 0..=max_depth {
        let all_settled = slice.iter().all(|a| {
            let mut values = probe_points_below(f, a).into_iter().map(|p| f.apply(&p));
            match values.next() {
                None => true,
                Some(first) => values.all(|v| v == first),
            }
        });
        if all_settled {
            return Some(depth);
        }
        slice = slice
            .iter()
            .flat_map(|a| {
                (0..=fan.bound(a)).map(|n| a.extended(n)).filter(|b| fan.contains(b))
            })
            .collect();
        if slice.is_empty() {
            return None;
        }
    }
    None
}

/// Recomputation of the change-point value a c-bar's function should take:
/// the largest depth `n` (at least 1) with `delta(iseg(p, n)) !=
/// delta(iseg(p, n + 1))`, scanned up to `depth`.
pub fn brute_force_change_value<D>(delta: D, p: &Point, depth: usize) -> u64
where
    D: Fn(&FinSeq) -> u64,
{
    let mut best = 1u64;
    for n in 0..depth {
        if delta(&p.initial_segment(n)) != delta(&p.initial_segment(n + 1)) {
            best = best.max(n as u64);
        }
    }
    best
}

/// A witnessed violation of the neighbourhood-function laws.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawViolation {
    /// First positive address on the offending path.
    pub base_at: FinSeq,
    /// Value at that address.
    pub base: u64,
    /// Extension of it where the value changed.
    pub at: FinSeq,
    pub got: u64,
}

impl std::fmt::Display for LawViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "value {} at {} changed to {} at extension {}",
            self.base, self.base_at, self.got, self.at
        )
    }
}

/// Checks the neighbourhood-function laws of `op` over the window of
/// addresses with entries below `width` and length at most `depth`.
///
/// The walk descends to every minimal positive address in the window (the
/// positions where the operation first answers). Below such an address the
/// tree carries no further structure, so persistence of the value is
/// verified black-box instead: the public `apply` must report the same
/// value at the address itself and at every extension of it by up to three
/// entries below `width`. Interior addresses must apply to zero, which the
/// walk checks directly.
pub fn scan_neighbourhood_law(op: &BrouwerOp, width: u64, depth: usize) -> Result<(), LawViolation> {
    fn spot_check(
        op: &BrouwerOp,
        base_at: &[u64],
        base: u64,
        width: u64,
    ) -> Result<(), LawViolation> {
        let root: FinSeq = base_at.iter().copied().collect();
        let got = op.apply(&root);
        if got != base {
            return Err(LawViolation { base_at: root.clone(), base, at: root, got });
        }
        let mut level = vec![root.clone()];
        for _ in 0..3 {
            level = level.iter().flat_map(|b| (0..width).map(|n| b.extended(n))).collect();
            for b in &level {
                let got = op.apply(b);
                if got != base {
                    return Err(LawViolation { base_at: root, base, at: b.clone(), got });
                }
            }
        }
        Ok(())
    }

    fn walk(
        op: &BrouwerOp,
        node: &BrouwerOp,
        addr: &mut Vec<u64>,
        width: u64,
        depth: usize,
    ) -> Result<(), LawViolation> {
        match node {
            BrouwerOp::Leaf(v) => spot_check(op, addr, *v, width),
            BrouwerOp::Sup(ch) => {
                // an interior address must still read as unanswered
                let at: FinSeq = addr.iter().copied().collect();
                let got = op.apply(&at);
                if got != 0 {
                    return Err(LawViolation { base_at: at.clone(), base: 0, at, got });
                }
                if addr.len() >= depth {
                    return Ok(());
                }
                for i in 0..width {
                    let child = ch.child(i);
                    addr.push(i);
                    let out = walk(op, child.as_ref(), addr, width, depth);
                    addr.pop();
                    out?;
                }
                Ok(())
            }
        }
    }

    walk(op, op, &mut Vec::new(), width, depth)
}
