//! Step budgets and search outcomes. A `Fuel` budget makes every unbounded
//! search a total, replayable procedure; `Exhausted` always means "unknown",
//! never "no".

use super::nat::Nat;

/// A step budget, counted in scheduler ticks rather than wall time so that
/// every run replays exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fuel(pub u64);

impl Fuel {
    pub const ZERO: Fuel = Fuel(0);

    pub fn new(ticks: u64) -> Self {
        Fuel(ticks)
    }

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn saturating_sub(self, used: u64) -> Fuel {
        Fuel(self.0.saturating_sub(used))
    }

    pub fn min(self, other: Fuel) -> Fuel {
        Fuel(self.0.min(other.0))
    }
}

/// Result of a fuel-bounded search.
///
/// `Confirmed` carries the witness value together with the schedule position
/// at which it was produced, so every positive answer is replayable.
/// A Confirmed outcome is stable: re-running the same search with more fuel
/// yields the same witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Confirmed { value: Nat, at_step: Nat },
    Exhausted { steps_used: u64 },
}

impl Outcome {
    pub fn confirmed(value: Nat, at_step: Nat) -> Self {
        Outcome::Confirmed { value, at_step }
    }

    pub fn exhausted(steps_used: u64) -> Self {
        Outcome::Exhausted { steps_used }
    }

    pub fn is_confirmed(&self) -> bool {
        matches!(self, Outcome::Confirmed { .. })
    }

    /// The witness if confirmed.
    pub fn value(&self) -> Option<&Nat> {
        match self {
            Outcome::Confirmed { value, .. } => Some(value),
            Outcome::Exhausted { .. } => None,
        }
    }

    pub fn into_value(self) -> Option<Nat> {
        match self {
            Outcome::Confirmed { value, .. } => Some(value),
            Outcome::Exhausted { .. } => None,
        }
    }

    /// Steps consumed by an exhausted search; zero for confirmations.
    pub fn steps_used(&self) -> u64 {
        match self {
            Outcome::Confirmed { .. } => 0,
            Outcome::Exhausted { steps_used } => *steps_used,
        }
    }

    pub fn map_value(self, f: impl FnOnce(Nat) -> Nat) -> Self {
        match self {
            Outcome::Confirmed { value, at_step } => Outcome::Confirmed {
                value: f(value),
                at_step,
            },
            other => other,
        }
    }
}
