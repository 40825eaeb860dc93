//! Random well-formed scenarios for property and acceptance tests.

use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use rand::Rng;

use crate::scenario::{Action, ResourceId, Scenario};

/// Size limits for generated scenarios.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub processes: RangeInclusive<usize>,
    /// Upper bound on events per process; traces have even length.
    pub max_events: usize,
    pub max_resources: usize,
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope {
            processes: 2..=3,
            max_events: 8,
            max_resources: 4,
        }
    }
}

/// A scenario whose traces lock and unlock freely (binary locks, everything
/// released by the end of each trace).
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R, env: &Envelope) -> Scenario {
    generate(rng, env, false)
}

/// A scenario in which every process acquires resources in increasing index
/// order: a resource is only locked while holding lower-indexed ones.
pub fn random_ordered_scenario<R: Rng + ?Sized>(rng: &mut R, env: &Envelope) -> Scenario {
    generate(rng, env, true)
}

fn generate<R: Rng + ?Sized>(rng: &mut R, env: &Envelope, ordered: bool) -> Scenario {
    let n = rng.gen_range(env.processes.clone());
    let nr = rng.gen_range(1..=env.max_resources.max(1));
    let events = (0..n).map(|_| random_trace(rng, nr, env.max_events, ordered)).collect();
    Scenario::from_parts(
        "random",
        (1..=n).map(|i| format!("P{i}")).collect(),
        (0..nr).map(|r| format!("r{r}")).collect(),
        events,
    )
    .expect("generated identifiers are valid")
}

fn random_trace<R: Rng + ?Sized>(rng: &mut R, nr: usize, max_events: usize, ordered: bool) -> Vec<Action> {
    let len = 2 * rng.gen_range(0..=max_events / 2);
    let mut held: Vec<usize> = Vec::new();
    let mut trace = Vec::with_capacity(len);
    for step in 0..len {
        let remaining = len - step;
        let lockable: Vec<usize> = (0..nr)
            .filter(|r| !held.contains(r))
            .filter(|r| !ordered || held.iter().all(|h| h < r))
            .collect();
        // `remaining - held.len()` stays even, so locking is possible
        // whenever it exceeds zero and something is lockable.
        let can_lock = remaining > held.len() && !lockable.is_empty();
        let lock = can_lock && (held.is_empty() || rng.gen_bool(0.5));
        if lock {
            let r = lockable[rng.gen_range(0..lockable.len())];
            held.push(r);
            trace.push(Action::lock(ResourceId(r)));
        } else {
            let k = rng.gen_range(0..held.len());
            let r = held.swap_remove(k);
            trace.push(Action::unlock(ResourceId(r)));
        }
    }
    debug_assert!(held.is_empty());
    trace
}
