//! Deadlock analysis for lock/unlock concurrency scenarios.
//!
//! A scenario lists processes, the shared resources they lock and unlock, and
//! one ordered trace per process. The crate maps a validated scenario onto a
//! progress graph (one integer axis per process, one open forbidden box per
//! mutual-exclusion conflict) and finds deadlocks, the unsafe region and the
//! unreachable region geometrically. An exhaustive interleaving explorer in
//! [`oracle`] gives the exact answer on small inputs and is used to check the
//! geometric results.
//!
//! ```
//! use msc_deadlock_core::{analyze, build_graph, parse_scenario, validate, Reachability};
//!
//! let src = "scenario swiss
//! process T1, T2
//! resource a, b
//! T1: P a; P b; V b; V a
//! T2: P b; P a; V a; V b
//! ";
//! let scenario = parse_scenario(src).unwrap();
//! let graph = build_graph(&validate(&scenario).unwrap());
//! let report = analyze(&graph, Reachability::Geometric);
//! assert_eq!(report.deadlocks.len(), 1);
//! assert_eq!(report.deadlocks[0].point.coords(), &[2, 2]);
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod detector;
pub mod graph;
pub mod oracle;
pub mod scenario;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use detector::{
    analyze, classify_midpoint, compute_unreachable, compute_unsafe_fixpoint,
    enumerate_candidates, unsafe_box, validate_candidate, Assignment, Blocker, BlockerSet,
    DeadlockPoint, Fixpoint, Reachability, RectKind, RegionClass, RegionReport,
};
pub use graph::{
    build_graph, conflict_rects, normalize_point, reflect_graph, AxisMap, HyperRect, Point,
    ProgressGraph, RectLabel,
};
pub use oracle::{
    compare_with_geometry, explore, state_successors, ComparisonReport, GridState, Mismatch,
    OracleError, OracleResult, StateClass, DEFAULT_STATE_BUDGET,
};
pub use scenario::{
    parse_scenario, validate, Action, ActionKind, Diagnostic, DiagnosticCode, Diagnostics,
    Interval, Location, LookupError, ProcessId, ResourceId, Scenario, Severity,
    ValidatedScenario,
};
