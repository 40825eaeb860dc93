//! Exhaustive interleaving semantics.
//!
//! A grid state counts completed events per process. Process `i` holds `r` in
//! state `s` when some hold interval `(l, u)` of `(i, r)` has `l ≤ s[i] < u`;
//! a state is legal when no resource has two holders. This module classifies
//! every state of the grid directly and is the reference the geometric
//! detector is checked against.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::detector::{classify_midpoint, RegionClass, RegionReport};
use crate::graph::ProgressGraph;
use crate::scenario::{ProcessId, ResourceId, ValidatedScenario};

/// Default cap on the number of grid states [`explore`] will visit.
pub const DEFAULT_STATE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridState(pub Vec<u32>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateClass {
    Forbidden,
    Unreachable,
    Deadlock,
    Doomed,
    Safe,
}

impl StateClass {
    /// The geometric class this state should receive (deadlocks are doomed).
    pub fn region(self) -> RegionClass {
        match self {
            StateClass::Forbidden => RegionClass::Forbidden,
            StateClass::Unreachable => RegionClass::Unreachable,
            StateClass::Deadlock | StateClass::Doomed => RegionClass::Doomed,
            StateClass::Safe => RegionClass::Safe,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("state space has {required} grid states, budget allows {allowed}")]
    BudgetExceeded { required: u128, allowed: u64 },
    #[error("grid state {0:?} is illegal or out of range")]
    IllegalState(Vec<u32>),
    #[error("oracle result and progress graph describe different scenarios")]
    ScenarioMismatch,
}

/// Per-process, per-resource hold table: `held[p][r][k]` after `k` events.
struct HoldTable {
    held: Vec<Vec<Vec<bool>>>,
    counts: Vec<u32>,
}

impl HoldTable {
    fn new(v: &ValidatedScenario) -> Self {
        let n = v.process_count();
        let nr = v.scenario().resources.len();
        let counts: Vec<u32> = (0..n).map(|p| v.event_count(ProcessId(p)) as u32).collect();
        let held = (0..n)
            .map(|p| {
                (0..nr)
                    .map(|r| {
                        (0..=counts[p])
                            .map(|k| v.holds(ProcessId(p), ResourceId(r)).iter().any(|iv| iv.held_after(k)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        HoldTable { held, counts }
    }

    fn in_range(&self, s: &[u32]) -> bool {
        s.len() == self.counts.len() && s.iter().zip(&self.counts).all(|(x, m)| x <= m)
    }

    fn legal(&self, s: &[u32]) -> bool {
        let nr = self.held.first().map_or(0, Vec::len);
        (0..nr).all(|r| {
            self.held
                .iter()
                .zip(s)
                .filter(|(h, &k)| h[r][k as usize])
                .count()
                < 2
        })
    }

    fn successors(&self, s: &[u32]) -> Vec<GridState> {
        let mut out = Vec::new();
        for i in 0..s.len() {
            if s[i] < self.counts[i] {
                let mut t = s.to_vec();
                t[i] += 1;
                if self.legal(&t) {
                    out.push(GridState(t));
                }
            }
        }
        out
    }
}

/// Legal one-step successors of `s`, in process order.
pub fn state_successors(v: &ValidatedScenario, s: &GridState) -> Result<Vec<GridState>, OracleError> {
    let table = HoldTable::new(v);
    if !table.in_range(&s.0) || !table.legal(&s.0) {
        return Err(OracleError::IllegalState(s.0.clone()));
    }
    Ok(table.successors(&s.0))
}

/// Every grid state classified, stored densely in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    counts: Vec<u32>,
    legal: Vec<bool>,
    reachable: Vec<bool>,
    doomed: Vec<bool>,
    classes: Vec<StateClass>,
    deadlocks: Vec<GridState>,
}

impl OracleResult {
    /// `m[i]` per process.
    pub fn event_counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn state_count(&self) -> usize {
        self.classes.len()
    }

    fn index(&self, s: &[u32]) -> Option<usize> {
        if s.len() != self.counts.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&x, &m) in s.iter().zip(&self.counts) {
            if x > m {
                return None;
            }
            idx = idx * (m as usize + 1) + x as usize;
        }
        Some(idx)
    }

    fn state_at(&self, mut idx: usize) -> GridState {
        let mut s = vec![0u32; self.counts.len()];
        for i in (0..self.counts.len()).rev() {
            let radix = self.counts[i] as usize + 1;
            s[i] = (idx % radix) as u32;
            idx /= radix;
        }
        GridState(s)
    }

    /// All grid states in lexicographic order.
    pub fn states(&self) -> impl Iterator<Item = GridState> + '_ {
        (0..self.classes.len()).map(|i| self.state_at(i))
    }

    fn flag(&self, bits: &[bool], s: &[u32]) -> bool {
        self.index(s).is_some_and(|i| bits[i])
    }

    pub fn is_legal(&self, s: &[u32]) -> bool {
        self.flag(&self.legal, s)
    }

    pub fn is_reachable(&self, s: &[u32]) -> bool {
        self.flag(&self.reachable, s)
    }

    pub fn is_doomed(&self, s: &[u32]) -> bool {
        self.flag(&self.doomed, s)
    }

    pub fn class(&self, s: &[u32]) -> Option<StateClass> {
        self.index(s).map(|i| self.classes[i])
    }

    /// Legal non-final states with no legal successor, sorted.
    pub fn deadlocks(&self) -> &[GridState] {
        &self.deadlocks
    }

    pub fn legal_count(&self) -> usize {
        self.legal.iter().filter(|&&b| b).count()
    }

    pub fn reachable_count(&self) -> usize {
        self.reachable.iter().filter(|&&b| b).count()
    }

    pub fn states_with(&self, class: StateClass) -> Vec<GridState> {
        (0..self.classes.len())
            .filter(|&i| self.classes[i] == class)
            .map(|i| self.state_at(i))
            .collect()
    }

    pub fn doomed_states(&self) -> Vec<GridState> {
        (0..self.doomed.len())
            .filter(|&i| self.doomed[i])
            .map(|i| self.state_at(i))
            .collect()
    }
}

/// Classifies every grid state of `v`.
///
/// Legality is tested directly, reachability by breadth-first search from the
/// origin, and doom by a backward sweep: successors always have larger
/// lexicographic index, so one pass from the top suffices.
pub fn explore(v: &ValidatedScenario, budget: u64) -> Result<OracleResult, OracleError> {
    let table = HoldTable::new(v);
    let counts = table.counts.clone();
    let required: u128 = counts.iter().map(|&m| m as u128 + 1).product();
    if required > budget as u128 {
        return Err(OracleError::BudgetExceeded { required, allowed: budget });
    }
    let total = required as usize;
    let mut result = OracleResult {
        counts,
        legal: vec![false; total],
        reachable: vec![false; total],
        doomed: vec![false; total],
        classes: vec![StateClass::Safe; total],
        deadlocks: Vec::new(),
    };

    for i in 0..total {
        result.legal[i] = table.legal(&result.state_at(i).0);
    }

    let mut queue = VecDeque::new();
    result.reachable[0] = true;
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        for t in table.successors(&result.state_at(i).0) {
            let j = result.index(&t.0).expect("successor in range");
            if !result.reachable[j] {
                result.reachable[j] = true;
                queue.push_back(j);
            }
        }
    }

    let final_idx = total - 1;
    let mut is_deadlock = vec![false; total];
    for i in (0..total).rev() {
        if !result.legal[i] || i == final_idx {
            continue;
        }
        let succ = table.successors(&result.state_at(i).0);
        if succ.is_empty() {
            is_deadlock[i] = true;
            result.doomed[i] = true;
        } else {
            result.doomed[i] = succ
                .iter()
                .all(|t| result.doomed[result.index(&t.0).expect("successor in range")]);
        }
    }

    for (i, &deadlock) in is_deadlock.iter().enumerate() {
        result.classes[i] = if !result.legal[i] {
            StateClass::Forbidden
        } else if !result.reachable[i] {
            StateClass::Unreachable
        } else if deadlock {
            StateClass::Deadlock
        } else if result.doomed[i] {
            StateClass::Doomed
        } else {
            StateClass::Safe
        };
        if is_deadlock[i] {
            result.deadlocks.push(result.state_at(i));
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    /// The oracle has a deadlock the detector did not report.
    MissingDeadlock(GridState),
    /// The detector reported a deadlock the oracle does not have.
    SpuriousDeadlock(GridState),
    Class {
        state: GridState,
        geometric: RegionClass,
        oracle: StateClass,
    },
    Reachability {
        state: GridState,
        geometric: bool,
        oracle: bool,
    },
}

impl core::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Mismatch::MissingDeadlock(s) => write!(f, "missing deadlock at state {:?}", s.0),
            Mismatch::SpuriousDeadlock(s) => write!(f, "spurious deadlock at state {:?}", s.0),
            Mismatch::Class { state, geometric, oracle } => write!(
                f,
                "state {:?}: geometry says {:?}, oracle says {:?}",
                state.0, geometric, oracle
            ),
            Mismatch::Reachability { state, geometric, oracle } => write!(
                f,
                "deadlock {:?}: reachable {} geometrically, {} by search",
                state.0, geometric, oracle
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonReport {
    pub states_total: usize,
    /// States whose geometric class equals the oracle class.
    pub agreeing: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// `agreeing/total`, e.g. `25/25`.
    pub fn agreement(&self) -> String {
        format!("{}/{}", self.agreeing, self.states_total)
    }
}

/// Checks a geometric report against the oracle: deadlock sets (shifted by
/// one), per-state classes, and deadlock reachability flags.
pub fn compare_with_geometry(
    o: &OracleResult,
    r: &RegionReport,
    g: &ProgressGraph,
) -> Result<ComparisonReport, OracleError> {
    if o.counts != g.event_counts() {
        return Err(OracleError::ScenarioMismatch);
    }
    let mut mismatches = Vec::new();

    let mut geometric: Vec<GridState> = r.deadlocks.iter().map(|d| d.grid_state.clone()).collect();
    geometric.sort();
    for s in &o.deadlocks {
        if geometric.binary_search(s).is_err() {
            mismatches.push(Mismatch::MissingDeadlock(s.clone()));
        }
    }
    for s in &geometric {
        if o.deadlocks.binary_search(s).is_err() {
            mismatches.push(Mismatch::SpuriousDeadlock(s.clone()));
        }
    }

    let mut agreeing = 0;
    for (i, state) in o.states().enumerate() {
        let oracle = o.classes[i];
        let geo = classify_midpoint(g, r, &state.0).map_err(|_| OracleError::ScenarioMismatch)?;
        if geo == oracle.region() {
            agreeing += 1;
        } else {
            mismatches.push(Mismatch::Class { state, geometric: geo, oracle });
        }
    }

    for d in &r.deadlocks {
        let oracle = o.is_reachable(&d.grid_state.0);
        if d.reachable != oracle {
            mismatches.push(Mismatch::Reachability {
                state: d.grid_state.clone(),
                geometric: d.reachable,
                oracle,
            });
        }
    }

    Ok(ComparisonReport {
        states_total: o.state_count(),
        agreeing,
        mismatches,
    })
}
