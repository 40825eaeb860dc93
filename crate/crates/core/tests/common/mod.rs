#![allow(dead_code)]

use msc_deadlock_core::{Action, ResourceId, Scenario};
use proptest::prelude::*;

pub const SWISS: &str = "scenario swiss
process T1, T2
resource a, b
T1: lock a; lock b; unlock b; unlock a
T2: lock b; lock a; unlock a; unlock b
";

pub const PHILOSOPHERS: &str = "scenario philosophers
process P1, P2, P3
resource f1, f2, f3
P1: lock f1; lock f2; unlock f2; unlock f1
P2: lock f2; lock f3; unlock f3; unlock f2
P3: lock f3; lock f1; unlock f1; unlock f3
";

/// Needs two productive fixpoint rounds: the doomed state (1,1) is only
/// trapped once the boxes below both deadlocks exist.
pub const CASCADE: &str = "scenario cascade
process P1, P2
resource r0, r1, r2
P1: lock r0; lock r2; lock r1; unlock r2; unlock r0; unlock r1
P2: lock r1; lock r2; lock r0; unlock r2; unlock r1; unlock r0
";

pub const SWISS_P3: &str = "scenario swiss3
process T1, T2, P3
resource a, b, c
T1: lock a; lock b; unlock b; unlock a
T2: lock b; lock a; unlock a; unlock b
P3: lock c; unlock c
";

pub const ORDERED: &str = "scenario ordered
process T1, T2
resource a, b
T1: lock a; lock b; unlock b; unlock a
T2: lock a; lock b; unlock b; unlock a
";

/// Its only deadlock is unreachable from the initial state.
pub const HIDDEN: &str = "scenario hidden
process P1, P2
resource r0, r1, r2
P1: lock r1; lock r2; unlock r1; lock r0; unlock r2; unlock r0
P2: lock r1; lock r2; unlock r2; lock r0; lock r2; unlock r0; unlock r1; unlock r2
";

pub const DISJOINT: &str = "scenario disjoint
process A, B
resource x, y
A: lock x; unlock x
B: lock y; unlock y
";

/// Turns a byte stream into a well-formed trace of `2 * pairs` events.
/// With `ordered`, a resource is only locked while holding lower ones.
pub fn decode_trace(bytes: &[u8], pairs: usize, nr: usize, ordered: bool) -> Vec<Action> {
    let len = 2 * pairs;
    let mut held: Vec<usize> = Vec::new();
    let mut out = Vec::with_capacity(len);
    for step in 0..len {
        let b = bytes.get(step).copied().unwrap_or(0) as usize;
        let remaining = len - step;
        let lockable: Vec<usize> = (0..nr)
            .filter(|r| !held.contains(r))
            .filter(|r| !ordered || held.iter().all(|h| h < r))
            .collect();
        let can_lock = remaining > held.len() && !lockable.is_empty();
        if can_lock && (held.is_empty() || b & 1 == 0) {
            let r = lockable[(b >> 1) % lockable.len()];
            held.push(r);
            out.push(Action::lock(ResourceId(r)));
        } else {
            let r = held.remove((b >> 1) % held.len());
            out.push(Action::unlock(ResourceId(r)));
        }
    }
    out
}

pub fn scenario_from(n: usize, nr: usize, traces: Vec<Vec<Action>>) -> Scenario {
    Scenario::from_parts(
        "generated",
        (1..=n).map(|i| format!("P{i}")).collect(),
        (0..nr).map(|r| format!("r{r}")).collect(),
        traces,
    )
    .unwrap()
}

/// Scenarios in the test envelope: 2–3 processes, at most 8 events each,
/// at most 4 resources.
pub fn scenarios(ordered: bool) -> impl Strategy<Value = Scenario> {
    (2usize..=3, 1usize..=4)
        .prop_flat_map(move |(n, nr)| {
            let trace = (0usize..=4, proptest::collection::vec(any::<u8>(), 8));
            (Just(n), Just(nr), proptest::collection::vec(trace, n))
        })
        .prop_map(move |(n, nr, raw)| {
            let traces = raw
                .iter()
                .map(|(pairs, bytes)| decode_trace(bytes, *pairs, nr, ordered))
                .collect();
            scenario_from(n, nr, traces)
        })
}
