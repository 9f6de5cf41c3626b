//! Fair dovetailing over a countable family of enumerators with an explicit
//! step budget. Realizes every "first element in some fixed enumeration"
//! search as a total, replayable procedure.

use std::sync::Arc;

use super::enumerate::Enumerator;
use super::nat::{nat, pair, unpair_u64, Nat};
use super::outcome::{Fuel, Outcome};

/// A countable family of enumerators, indexed by task id.
#[derive(Clone)]
pub struct TaskFamily {
    tasks: Arc<dyn Fn(u64) -> Enumerator + Send + Sync>,
}

impl TaskFamily {
    pub fn new(tasks: impl Fn(u64) -> Enumerator + Send + Sync + 'static) -> Self {
        TaskFamily {
            tasks: Arc::new(tasks),
        }
    }

    /// Finite family; out-of-range ids behave as empty tasks.
    pub fn from_vec(tasks: Vec<Enumerator>) -> Self {
        let tasks = Arc::new(tasks);
        TaskFamily::new(move |i| {
            tasks
                .get(i as usize)
                .cloned()
                .unwrap_or_else(Enumerator::empty)
        })
    }

    pub fn single(task: Enumerator) -> Self {
        TaskFamily::from_vec(vec![task])
    }

    pub fn task(&self, i: u64) -> Enumerator {
        (self.tasks)(i)
    }
}

/// The fixed fair schedule: tick `t` visits task `i` at step `k` where
/// `(i, k)` is the Cantor unpairing of `t`. One tick is charged per visit;
/// the acceptance predicate is free and must be total.
///
/// Confirmed outcomes carry `⟨task, value⟩` and the tick of the hit, so any
/// confirmation replays bit-for-bit, and confirming at fuel `F` confirms the
/// same witness at every fuel above `F`.
pub fn dovetail(
    tasks: &TaskFamily,
    accept: &(dyn Fn(u64, &Nat) -> bool + Sync),
    fuel: Fuel,
) -> Outcome {
    for t in 0..fuel.ticks() {
        let (i, k) = unpair_u64(t);
        if let Some(v) = tasks.task(i).step(k) {
            if accept(i, &v) {
                return Outcome::confirmed(pair(&nat(i), &v), nat(t));
            }
        }
    }
    Outcome::exhausted(fuel.ticks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::nat::{pair_u64, unpair};

    #[test]
    fn linear_scan_single_task() {
        let tasks = TaskFamily::single(Enumerator::all());
        let out = dovetail(&tasks, &|_, v| *v == nat(7), Fuel(10_000));
        let Outcome::Confirmed { value, .. } = out else {
            panic!("expected confirmation");
        };
        let (task, v) = unpair(&value);
        assert_eq!((task, v), (nat(0), nat(7)));
    }

    #[test]
    fn nothing_accepted_exhausts() {
        let tasks = TaskFamily::single(Enumerator::all());
        assert_eq!(
            dovetail(&tasks, &|_, _| false, Fuel(500)),
            Outcome::exhausted(500)
        );
    }

    #[test]
    fn diagonal_schedule_replays_by_hand() {
        // Two tasks; only task 1 produces an accepted value, at its step 5.
        let tasks = TaskFamily::from_vec(vec![
            Enumerator::empty(),
            Enumerator::from_fn(|k| (k == 5).then(|| nat(42))),
        ]);
        let out = dovetail(&tasks, &|_, v| *v == nat(42), Fuel(100));
        // The hit sits exactly at tick ⟨1, 5⟩ of the fixed diagonal.
        let expected_tick = pair_u64(1, 5);
        assert_eq!(
            out,
            Outcome::confirmed(pair(&nat(1), &nat(42)), nat(expected_tick))
        );
        assert_eq!(expected_tick, 26);
    }

    #[test]
    fn confirmation_is_monotone_in_fuel() {
        let tasks = TaskFamily::from_vec(vec![
            Enumerator::from_fn(|k| (k == 3).then(|| nat(9))),
            Enumerator::from_fn(|k| (k == 2).then(|| nat(9))),
        ]);
        let accept = |_: u64, v: &Nat| *v == nat(9);
        let first = (0..200u64)
            .map(Fuel)
            .map(|f| dovetail(&tasks, &accept, f))
            .find(|o| o.is_confirmed())
            .unwrap();
        for f in 0..400 {
            let out = dovetail(&tasks, &accept, Fuel(f));
            if out.is_confirmed() {
                assert_eq!(out, first);
            }
        }
    }
}
