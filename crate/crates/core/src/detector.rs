//! Geometric deadlock detection.
//!
//! A deadlock is a lattice point `p` (grid state `p - 1`) that is blocked in
//! every direction: advancing process `i` either runs into a forbidden box
//! whose lower face on axis `i` is at `p[i]`, or process `i` has finished
//! (`p[i] = L[i]`, a *wall*). Candidates are found by assigning one blocker
//! per direction and checking that each rect blocker spans the candidate on
//! every other axis.
//!
//! Every valid candidate also yields a box of states that cannot escape it
//! except into blocked territory. Those boxes are added to the blocker set
//! and the search repeats until nothing new appears; the union of the boxes,
//! minus the forbidden region, is then exactly the set of doomed states.
//! Running the same procedure on the time-reversed graph gives the
//! unreachable region.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{reflect_graph, HyperRect, Point, ProgressGraph, RectLabel};
use crate::oracle::{GridState, OracleResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RectKind {
    Forbidden,
    Unsafe,
}

/// What stops progress along one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Blocker {
    /// `index` points into the forbidden or unsafe list of a [`BlockerSet`].
    Rect { index: usize, kind: RectKind },
    /// Process `i` has finished: the virtual constraint `x[i] ≥ L[i]`.
    Wall(usize),
}

impl Blocker {
    pub fn is_wall(&self) -> bool {
        matches!(self, Blocker::Wall(_))
    }
}

/// The rects and walls a candidate may be blocked by.
#[derive(Debug, Clone, Copy)]
pub struct BlockerSet<'a> {
    pub extents: &'a [u32],
    pub forbidden: &'a [HyperRect],
    pub unsafe_boxes: &'a [HyperRect],
}

impl<'a> BlockerSet<'a> {
    pub fn new(g: &'a ProgressGraph, unsafe_boxes: &'a [HyperRect]) -> Self {
        BlockerSet {
            extents: g.extents(),
            forbidden: &g.forbidden,
            unsafe_boxes,
        }
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn rect(&self, b: Blocker) -> Option<&'a HyperRect> {
        match b {
            Blocker::Rect { index, kind: RectKind::Forbidden } => self.forbidden.get(index),
            Blocker::Rect { index, kind: RectKind::Unsafe } => self.unsafe_boxes.get(index),
            Blocker::Wall(_) => None,
        }
    }

    /// Every forbidden rect, then every unsafe box.
    pub fn rect_blockers(&self) -> Vec<Blocker> {
        let f = (0..self.forbidden.len()).map(|index| Blocker::Rect { index, kind: RectKind::Forbidden });
        let u = (0..self.unsafe_boxes.len()).map(|index| Blocker::Rect { index, kind: RectKind::Unsafe });
        f.chain(u).collect()
    }

    /// Lower bound `b` imposes on axis `axis`: its lower corner for a rect,
    /// `L[i]` for the wall of that axis, `0` for any other wall.
    fn lower(&self, b: Blocker, axis: usize) -> u32 {
        match b {
            Blocker::Wall(i) if i == axis => self.extents[axis],
            Blocker::Wall(_) => 0,
            rect => self.rect(rect).expect("blocker index in range").lo[axis],
        }
    }

    fn in_forbidden(&self, s: &[u32]) -> bool {
        self.forbidden.iter().any(|r| r.contains_state(s))
    }
}

/// One blocker per direction together with the lattice point they pin down.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub sigma: Vec<Blocker>,
    pub candidate: Point,
}

impl Assignment {
    fn new(sigma: Vec<Blocker>, set: &BlockerSet<'_>) -> Self {
        let candidate = (0..sigma.len()).map(|i| set.lower(sigma[i], i)).collect::<Vec<_>>();
        Assignment { sigma, candidate: Point::new(candidate) }
    }

    pub fn all_forbidden(&self) -> bool {
        self.sigma
            .iter()
            .all(|b| !matches!(b, Blocker::Rect { kind: RectKind::Unsafe, .. }))
    }
}

/// Brute-force stream of every assignment of blockers to directions.
///
/// Direction `i` may take any rect or its own wall; a rect appears in at most
/// one direction. The all-walls assignment (the final point) is skipped.
/// Order is odometer order (rects by index, then the wall) with the last
/// direction varying fastest.
pub fn enumerate_candidates<'a>(set: &BlockerSet<'a>) -> impl Iterator<Item = Assignment> + 'a {
    let set = *set;
    let n = set.dim();
    let rects = set.rect_blockers();
    let choices: Vec<Vec<Blocker>> = (0..n)
        .map(|i| rects.iter().copied().chain(core::iter::once(Blocker::Wall(i))).collect())
        .collect();
    let mut digits = vec![0usize; n];
    let mut done = n == 0;
    core::iter::from_fn(move || {
        while !done {
            let sigma: Vec<Blocker> = digits.iter().enumerate().map(|(i, &d)| choices[i][d]).collect();
            // advance the odometer
            let mut k = n;
            loop {
                if k == 0 {
                    done = true;
                    break;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < choices[k].len() {
                    break;
                }
                digits[k] = 0;
            }
            if sigma.iter().all(Blocker::is_wall) {
                continue;
            }
            let distinct = sigma
                .iter()
                .enumerate()
                .all(|(i, b)| b.is_wall() || !sigma[i + 1..].contains(b));
            if distinct {
                return Some(Assignment::new(sigma, &set));
            }
        }
        None
    })
}

/// Whether `rect`, blocking direction `axis`, spans coordinate `p` of the
/// candidate on the transverse axis `k`. The grid state just below the
/// candidate must lie inside the rect's `k`-th span: `lo < p ≤ hi`.
fn spans(rect: &HyperRect, k: usize, p: u32, rule: TransverseRule) -> bool {
    let lower_ok = match rule {
        TransverseRule::Exact => rect.lo[k] < p,
        TransverseRule::NonStrictLower => rect.lo[k] <= p,
    };
    lower_ok && p <= rect.hi[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TransverseRule {
    Exact,
    /// Deliberately wrong; exists so tests can show the oracle catches it.
    NonStrictLower,
}

/// Checks a candidate: every rect blocker spans the candidate transversally,
/// the candidate's grid state exists and is legal, and it is not the final
/// point.
pub fn validate_candidate(a: &Assignment, set: &BlockerSet<'_>) -> bool {
    validate_with(a, set, TransverseRule::Exact)
}

fn validate_with(a: &Assignment, set: &BlockerSet<'_>, rule: TransverseRule) -> bool {
    let p = a.candidate.coords();
    let n = set.dim();
    if a.sigma.len() != n || p.len() != n {
        return false;
    }
    if a.sigma.iter().all(Blocker::is_wall) || p == set.extents {
        return false;
    }
    if p.contains(&0) {
        return false;
    }
    for (i, &b) in a.sigma.iter().enumerate() {
        if let Some(rect) = set.rect(b) {
            if a.sigma[i + 1..].contains(&b) {
                return false;
            }
            if (0..n).any(|k| k != i && !spans(rect, k, p[k], rule)) {
                return false;
            }
        } else if b != Blocker::Wall(i) {
            return false;
        }
    }
    let state: Vec<u32> = p.iter().map(|x| x - 1).collect();
    !set.in_forbidden(&state)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("assignment {sigma:?} produces an empty box on axis {axis}")]
pub struct DegenerateBox {
    pub sigma: Vec<Blocker>,
    pub axis: usize,
}

/// The box of states trapped below a valid candidate:
/// `∏ ]l[i], p[i]]` with `l[i]` the largest lower corner on axis `i` among
/// the blockers of the other directions.
pub fn unsafe_box(a: &Assignment, set: &BlockerSet<'_>) -> Result<HyperRect, DegenerateBox> {
    let p = a.candidate.coords();
    let n = p.len();
    let mut lo = vec![0u32; n];
    for (i, l) in lo.iter_mut().enumerate() {
        *l = (0..n)
            .filter(|&j| j != i)
            .map(|j| set.lower(a.sigma[j], i))
            .max()
            .unwrap_or(0);
        if *l >= p[i] {
            return Err(DegenerateBox { sigma: a.sigma.clone(), axis: i });
        }
    }
    Ok(HyperRect::new(lo, p.to_vec(), RectLabel::Unsafe))
}

/// Valid assignments in the same order as filtering [`enumerate_candidates`]
/// through [`validate_candidate`], found by backtracking with pairwise
/// pruning.
fn valid_assignments(set: &BlockerSet<'_>, rule: TransverseRule) -> Vec<Assignment> {
    let n = set.dim();
    let rects = set.rect_blockers();
    // Per direction, the blockers that could pin a coordinate ≥ 1.
    let options: Vec<Vec<(Blocker, u32)>> = (0..n)
        .map(|i| {
            rects
                .iter()
                .copied()
                .chain(core::iter::once(Blocker::Wall(i)))
                .map(|b| (b, set.lower(b, i)))
                .filter(|&(_, c)| c >= 1)
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut chosen: Vec<(Blocker, u32)> = Vec::with_capacity(n);
    search(set, &options, &mut chosen, &mut out, rule);
    out
}

fn compatible(
    set: &BlockerSet<'_>,
    chosen: &[(Blocker, u32)],
    b: Blocker,
    coord: u32,
    rule: TransverseRule,
) -> bool {
    let i = chosen.len();
    let rect = set.rect(b);
    for (k, &(other, pk)) in chosen.iter().enumerate() {
        if let Some(rect) = rect {
            if other == b || !spans(rect, k, pk, rule) {
                return false;
            }
        }
        if let Some(orect) = set.rect(other) {
            if !spans(orect, i, coord, rule) {
                return false;
            }
        }
    }
    true
}

fn search(
    set: &BlockerSet<'_>,
    options: &[Vec<(Blocker, u32)>],
    chosen: &mut Vec<(Blocker, u32)>,
    out: &mut Vec<Assignment>,
    rule: TransverseRule,
) {
    let i = chosen.len();
    if i == options.len() {
        let sigma: Vec<Blocker> = chosen.iter().map(|&(b, _)| b).collect();
        let a = Assignment::new(sigma, set);
        if validate_with(&a, set, rule) {
            out.push(a);
        }
        return;
    }
    // Odometer order: rects by blocker index, then the wall last.
    for &(b, c) in &options[i] {
        if compatible(set, chosen, b, c, rule) {
            chosen.push((b, c));
            search(set, options, chosen, out, rule);
            chosen.pop();
        }
    }
}

/// A reported deadlock: a lattice point blocked in every direction by
/// forbidden rects or walls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadlockPoint {
    pub point: Point,
    pub assignment: Assignment,
    /// `point - 1`: events completed per process when stuck.
    pub grid_state: GridState,
    pub reachable: bool,
}

/// Result of the unsafe-region fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixpoint {
    /// Sorted by point.
    pub deadlocks: Vec<DeadlockPoint>,
    /// Maximal boxes only, sorted by corners.
    pub unsafe_boxes: Vec<HyperRect>,
    pub rounds: usize,
}

/// Inserts `b` unless an existing box already contains it; drops boxes `b`
/// contains. Returns whether the set changed.
fn insert_maximal(boxes: &mut Vec<HyperRect>, b: HyperRect) -> bool {
    if boxes.iter().any(|x| x.contains_box(&b)) {
        return false;
    }
    boxes.retain(|x| !b.contains_box(x));
    boxes.push(b);
    true
}

/// Iterates candidate search until no new unsafe box appears.
///
/// Each round searches against a snapshot of the boxes found so far. Only
/// assignments made purely of forbidden rects and walls are deadlocks; mixed
/// ones only grow the unsafe region, since the lower face of an unsafe box
/// can be crossed.
pub fn compute_unsafe_fixpoint(g: &ProgressGraph) -> Fixpoint {
    fixpoint_with(g, TransverseRule::Exact)
}

fn fixpoint_with(g: &ProgressGraph, rule: TransverseRule) -> Fixpoint {
    let mut boxes: Vec<HyperRect> = Vec::new();
    let mut deadlocks: BTreeMap<Point, Assignment> = BTreeMap::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let found = {
            let set = BlockerSet::new(g, &boxes);
            valid_assignments(&set, rule)
                .into_iter()
                .map(|a| {
                    let b = match unsafe_box(&a, &set) {
                        Ok(b) => Some(b),
                        Err(e) if rule == TransverseRule::Exact => {
                            panic!("valid candidate yields a nonempty box: {e}")
                        }
                        Err(_) => None,
                    };
                    (a, b)
                })
                .collect::<Vec<_>>()
        };
        let mut changed = false;
        for (a, b) in found {
            if a.all_forbidden() {
                deadlocks.entry(a.candidate.clone()).or_insert(a);
            }
            if let Some(b) = b {
                changed |= insert_maximal(&mut boxes, b);
            }
        }
        if !changed {
            break;
        }
    }
    boxes.sort();
    let deadlocks = deadlocks
        .into_iter()
        .map(|(point, assignment)| {
            let grid_state = GridState(point.coords().iter().map(|x| x - 1).collect());
            DeadlockPoint { point, assignment, grid_state, reachable: true }
        })
        .collect();
    Fixpoint { deadlocks, unsafe_boxes: boxes, rounds }
}

/// States that no execution from the origin can reach, as boxes: the unsafe
/// region of the time-reversed graph, mirrored back.
pub fn compute_unreachable(g: &ProgressGraph) -> Vec<HyperRect> {
    unreachable_with(g, TransverseRule::Exact)
}

fn unreachable_with(g: &ProgressGraph, rule: TransverseRule) -> Vec<HyperRect> {
    let reversed = fixpoint_with(&reflect_graph(g), rule);
    let mut out: Vec<HyperRect> = reversed
        .unsafe_boxes
        .iter()
        .map(|b| b.reflect(g.extents()).with_label(RectLabel::Unreachable))
        .collect();
    out.sort();
    out
}

/// Geometric classification of a grid state. Deadlocked states count as
/// doomed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionClass {
    Forbidden,
    Unreachable,
    Doomed,
    Safe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionReport {
    pub deadlocks: Vec<DeadlockPoint>,
    pub unsafe_boxes: Vec<HyperRect>,
    pub unreachable: Vec<HyperRect>,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("grid state {state:?} is outside the grid {bounds:?}")]
pub struct StateOutOfRange {
    pub state: Vec<u32>,
    pub bounds: Vec<u32>,
}

/// Classifies the midpoint of grid state `s`; the first matching region in
/// the order forbidden, unreachable, unsafe wins.
pub fn classify_midpoint(
    g: &ProgressGraph,
    regions: &RegionReport,
    s: &[u32],
) -> Result<RegionClass, StateOutOfRange> {
    if s.len() != g.dim() || s.iter().zip(g.extents()).any(|(&x, &l)| x >= l) {
        return Err(StateOutOfRange { state: s.to_vec(), bounds: g.event_counts() });
    }
    Ok(if g.in_forbidden(s) {
        RegionClass::Forbidden
    } else if regions.unreachable.iter().any(|b| b.contains_state(s)) {
        RegionClass::Unreachable
    } else if regions.unsafe_boxes.iter().any(|b| b.contains_state(s)) {
        RegionClass::Doomed
    } else {
        RegionClass::Safe
    })
}

/// How deadlock reachability is decided.
#[derive(Debug, Clone, Copy)]
pub enum Reachability<'a> {
    /// A deadlock is reachable unless it lies in an unreachable box.
    Geometric,
    /// Use the exact reachable set of an explored state space.
    Oracle(&'a OracleResult),
}

/// Full geometric analysis: deadlocks, unsafe region and unreachable region.
pub fn analyze(g: &ProgressGraph, reach: Reachability<'_>) -> RegionReport {
    analyze_with(g, reach, TransverseRule::Exact)
}

fn analyze_with(g: &ProgressGraph, reach: Reachability<'_>, rule: TransverseRule) -> RegionReport {
    let fp = fixpoint_with(g, rule);
    let unreachable = unreachable_with(g, rule);
    let deadlocks = fp
        .deadlocks
        .into_iter()
        .map(|mut d| {
            d.reachable = match reach {
                Reachability::Geometric => {
                    !unreachable.iter().any(|b| b.contains_state(&d.grid_state.0))
                }
                Reachability::Oracle(o) => o.is_reachable(&d.grid_state.0),
            };
            d
        })
        .collect();
    RegionReport {
        deadlocks,
        unsafe_boxes: fp.unsafe_boxes,
        unreachable,
        rounds: fp.rounds,
    }
}

/// [`analyze`] with the transverse containment test weakened to `lo ≤ p`.
/// Only for mutation tests of the oracle comparison.
#[doc(hidden)]
pub fn analyze_weakened_transverse(g: &ProgressGraph) -> RegionReport {
    analyze_with(g, Reachability::Geometric, TransverseRule::NonStrictLower)
}
