//! Deterministic step-indexed enumerators: the working model of a
//! computably enumerable set. `step` is total — "no value this step" encodes
//! partiality without divergence — and repeated calls always agree.
//!
//! An enumerator may additionally carry a `probe`, a fast membership
//! semi-test used when the underlying set is decidable or has exploitable
//! structure. A probe must be sound and complete for the same set the sweep
//! enumerates; it changes reachable fuel budgets, never semantics.

use std::sync::Arc;

use super::nat::{nat, pair, pair_u64, to_u64, unpair, unpair_u64, Nat};
use super::outcome::{Fuel, Outcome};

type StepFn = dyn Fn(u64) -> Option<Nat> + Send + Sync;
type ProbeFn = dyn Fn(&Nat, Fuel) -> Outcome + Send + Sync;

/// A deterministic producer of naturals; the enumerated set is the union of
/// produced values over all step indices.
#[derive(Clone)]
pub struct Enumerator {
    step: Arc<StepFn>,
    probe: Option<Arc<ProbeFn>>,
}

impl Enumerator {
    pub fn from_fn(step: impl Fn(u64) -> Option<Nat> + Send + Sync + 'static) -> Self {
        Enumerator {
            step: Arc::new(step),
            probe: None,
        }
    }

    /// Attach a membership semi-test. The probe must confirm exactly the
    /// values the sweep eventually produces.
    pub fn with_probe(
        self,
        probe: impl Fn(&Nat, Fuel) -> Outcome + Send + Sync + 'static,
    ) -> Self {
        Enumerator {
            step: self.step,
            probe: Some(Arc::new(probe)),
        }
    }

    /// Enumerator of a decidable set: sweeps codes in order, emitting each at
    /// its own position, and decides membership queries instantly.
    pub fn decidable(test: impl Fn(&Nat) -> bool + Send + Sync + 'static) -> Self {
        let test = Arc::new(test);
        let sweep_test = test.clone();
        Enumerator {
            step: Arc::new(move |k| {
                let v = nat(k);
                sweep_test(&v).then_some(v)
            }),
            probe: Some(Arc::new(move |v, _| {
                if test(v) {
                    Outcome::confirmed(v.clone(), v.clone())
                } else {
                    Outcome::exhausted(1)
                }
            })),
        }
    }

    pub fn empty() -> Self {
        Enumerator {
            step: Arc::new(|_| None),
            probe: Some(Arc::new(|_, _| Outcome::exhausted(0))),
        }
    }

    /// Every natural, at its own position.
    pub fn all() -> Self {
        Enumerator::decidable(|_| true)
    }

    pub fn single(v: Nat) -> Self {
        Enumerator::from_values(vec![v])
    }

    pub fn from_values(values: Vec<Nat>) -> Self {
        let values = Arc::new(values);
        let lookup = values.clone();
        Enumerator {
            step: Arc::new(move |k| values.get(k as usize).cloned()),
            probe: Some(Arc::new(move |v, _| {
                match lookup.iter().position(|x| x == v) {
                    Some(i) => Outcome::confirmed(v.clone(), nat(i as u64)),
                    None => Outcome::exhausted(lookup.len() as u64),
                }
            })),
        }
    }

    pub fn step(&self, k: u64) -> Option<Nat> {
        (self.step)(k)
    }

    pub fn has_probe(&self) -> bool {
        self.probe.is_some()
    }

    /// Fuel-bounded membership semi-test. Confirmed iff the value is found
    /// within budget; Exhausted means unknown.
    pub fn semi_contains(&self, v: &Nat, fuel: Fuel) -> Outcome {
        if let Some(probe) = &self.probe {
            return probe(v, fuel);
        }
        for k in 0..fuel.ticks() {
            if self.step(k).as_ref() == Some(v) {
                return Outcome::confirmed(v.clone(), nat(k));
            }
        }
        Outcome::exhausted(fuel.ticks())
    }

    /// Transform emitted values; drops the probe since images are not
    /// invertible in general.
    pub fn map(&self, f: impl Fn(&Nat) -> Option<Nat> + Send + Sync + 'static) -> Self {
        let inner = self.step.clone();
        Enumerator {
            step: Arc::new(move |k| inner(k).and_then(|v| f(&v))),
            probe: None,
        }
    }

    /// Transform with an exact preimage function, preserving probe support:
    /// `w` is emitted iff some `v` with `back(w) = Some(v)` is, and
    /// `forward(v) = w` for that `v`.
    pub fn map_invertible(
        &self,
        forward: impl Fn(&Nat) -> Option<Nat> + Send + Sync + 'static,
        back: impl Fn(&Nat) -> Option<Nat> + Send + Sync + 'static,
    ) -> Self {
        let inner = self.step.clone();
        let probe = self.probe.clone();
        let fwd = Arc::new(forward);
        let step_fwd = fwd.clone();
        Enumerator {
            step: Arc::new(move |k| inner(k).and_then(|v| step_fwd(&v))),
            probe: probe.map(|p| {
                Arc::new(move |w: &Nat, fuel: Fuel| match back(w) {
                    Some(v) if fwd(&v).as_ref() == Some(w) => p(&v, fuel),
                    _ => Outcome::exhausted(0),
                }) as Arc<ProbeFn>
            }),
        }
    }

    pub fn filter(&self, keep: impl Fn(&Nat) -> bool + Send + Sync + 'static) -> Self {
        let inner = self.step.clone();
        let probe = self.probe.clone();
        let keep = Arc::new(keep);
        let sweep_keep = keep.clone();
        Enumerator {
            step: Arc::new(move |k| inner(k).filter(|v| sweep_keep(v))),
            probe: probe.map(|p| {
                Arc::new(move |v: &Nat, fuel: Fuel| {
                    if keep(v) {
                        p(v, fuel)
                    } else {
                        Outcome::exhausted(0)
                    }
                }) as Arc<ProbeFn>
            }),
        }
    }

    /// Fair merge: even steps from `self`, odd from `other`.
    pub fn interleave(&self, other: &Enumerator) -> Self {
        let a = self.clone();
        let b = other.clone();
        let pa = self.clone();
        let pb = other.clone();
        Enumerator {
            step: Arc::new(move |k| {
                if k % 2 == 0 {
                    a.step(k / 2)
                } else {
                    b.step(k / 2)
                }
            }),
            probe: Some(Arc::new(move |v, fuel| {
                let half = Fuel(fuel.ticks() / 2);
                match pa.semi_contains(v, half) {
                    Outcome::Confirmed { value, at_step } => {
                        Outcome::confirmed(value, at_step * 2u32)
                    }
                    Outcome::Exhausted { steps_used } => match pb.semi_contains(v, half) {
                        Outcome::Confirmed { value, at_step } => {
                            Outcome::confirmed(value, at_step * 2u32 + 1u32)
                        }
                        Outcome::Exhausted { steps_used: s2 } => {
                            Outcome::exhausted(steps_used + s2)
                        }
                    },
                }
            })),
        }
    }

    /// Fair union of a countable family: tick `t` visits pair `(i, k)` of
    /// task and step under the Cantor diagonal.
    pub fn diagonal(family: impl Fn(u64) -> Enumerator + Send + Sync + 'static) -> Self {
        let family = Arc::new(family);
        Enumerator {
            step: Arc::new(move |t| {
                let (i, k) = unpair_u64(t);
                family(i).step(k)
            }),
            probe: None,
        }
    }

    /// As [`Enumerator::diagonal`], but emissions are tagged `⟨i, v⟩`.
    pub fn diagonal_tagged(family: impl Fn(u64) -> Enumerator + Send + Sync + 'static) -> Self {
        let family = Arc::new(family);
        Enumerator {
            step: Arc::new(move |t| {
                let (i, k) = unpair_u64(t);
                family(i).step(k).map(|v| pair(&nat(i), &v))
            }),
            probe: None,
        }
    }

    /// Tagged union with a row-aware probe: a query `⟨i, v⟩` is answered by
    /// probing row `i` directly.
    pub fn rows(family: impl Fn(u64) -> Enumerator + Send + Sync + 'static) -> Self {
        let family = Arc::new(family);
        let probe_family = family.clone();
        Enumerator {
            step: Arc::new(move |t| {
                let (i, k) = unpair_u64(t);
                family(i).step(k).map(|v| pair(&nat(i), &v))
            }),
            probe: Some(Arc::new(move |code, fuel| {
                let (i, v) = unpair(code);
                match to_u64(&i) {
                    Some(row) => probe_family(row)
                        .semi_contains(&v, fuel)
                        .map_value(|w| pair(&i, &w)),
                    None => Outcome::exhausted(0),
                }
            })),
        }
    }

    /// Closure of a set of `⟨a, e⟩` codes under shrinking `e`: whenever
    /// `⟨a, e⟩` is emitted, every `⟨a, e'⟩` with `e' ≤ e` eventually is.
    /// Probes widen the other way: a query `⟨a, e⟩` searches the base for
    /// any `⟨a, e''⟩` with `e'' ≥ e`.
    pub fn widen_radius(&self) -> Self {
        let inner = self.clone();
        let probe_inner = self.clone();
        Enumerator {
            step: Arc::new(move |t| {
                let (k, j) = unpair_u64(t);
                let code = inner.step(k)?;
                let (a, e) = unpair(&code);
                let j = nat(j);
                if j <= e {
                    Some(pair(&a, &(e - j)))
                } else {
                    None
                }
            }),
            probe: probe_inner.probe.as_ref().map(|_| {
                let p = probe_inner.clone();
                Arc::new(move |code: &Nat, fuel: Fuel| {
                    // With a probe on the base set, check e, e+1, … up to a
                    // fuel-derived depth; any hit widens down to e.
                    let (a, e) = unpair(code);
                    let depth = (fuel.ticks() as f64).sqrt() as u64 + 1;
                    let per = Fuel(fuel.ticks() / depth.max(1));
                    let mut spent = 0;
                    for d in 0..depth {
                        let q = pair(&a, &(&e + nat(d)));
                        match p.semi_contains(&q, per) {
                            Outcome::Confirmed { .. } => {
                                return Outcome::confirmed(code.clone(), nat(pair_u64(d, 0)));
                            }
                            Outcome::Exhausted { steps_used } => spent += steps_used,
                        }
                    }
                    Outcome::exhausted(spent.max(1))
                }) as Arc<ProbeFn>
            }),
        }
    }

    /// Collect the distinct values produced in the first `fuel` steps, in
    /// order of first emission.
    pub fn collect_within(&self, fuel: Fuel) -> Vec<Nat> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for k in 0..fuel.ticks() {
            if let Some(v) = self.step(k) {
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl std::fmt::Debug for Enumerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Enumerator{{probe: {}}}",
            if self.probe.is_some() { "yes" } else { "no" }
        )
    }
}
