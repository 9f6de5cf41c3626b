//! Session-local registry of indexed partial functions. Codes are stable
//! within a session and evaluation is deterministic given fuel. Derived
//! registrations (specialization, composition, constructions keyed on
//! existing codes) are memoized so replays assign identical codes.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use super::enumerate::Enumerator;
use super::nat::{nat, pair, to_u64, Nat};
use super::outcome::{Fuel, Outcome};
use super::KernelError;

/// Index of a registered partial function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Code(pub usize);

impl Code {
    pub fn as_nat(self) -> Nat {
        nat(self.0 as u64)
    }

    pub fn from_nat(n: &Nat) -> Option<Code> {
        to_u64(n).map(|v| Code(v as usize))
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

type IndexFn = dyn Fn(&Nat, Fuel) -> Outcome + Send + Sync;

#[derive(Clone)]
struct Entry {
    eval: Arc<IndexFn>,
    enumerator: Option<Enumerator>,
}

/// Memoization key for derived registrations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DerivedKey {
    pub tag: &'static str,
    pub params: Vec<Nat>,
}

impl DerivedKey {
    pub fn new(tag: &'static str, params: Vec<Nat>) -> Self {
        DerivedKey { tag, params }
    }
}

struct Inner {
    entries: RwLock<Vec<Entry>>,
    derived: RwLock<HashMap<DerivedKey, Code>>,
}

/// Append-only table of evaluable index transformers. Cloning shares the
/// underlying session.
#[derive(Clone)]
pub struct FnRegistry {
    inner: Arc<Inner>,
}

impl Default for FnRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl FnRegistry {
    pub fn new() -> Self {
        FnRegistry {
            inner: Arc::new(Inner {
                entries: RwLock::new(Vec::new()),
                derived: RwLock::new(HashMap::new()),
            }),
        }
    }

    fn push(&self, entry: Entry) -> Code {
        let mut entries = self.inner.entries.write().expect("registry poisoned");
        entries.push(entry);
        Code(entries.len() - 1)
    }

    fn entry(&self, c: Code) -> Option<Entry> {
        self.inner
            .entries
            .read()
            .expect("registry poisoned")
            .get(c.0)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.entries.read().expect("registry poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Register a fuel-evaluable partial function.
    pub fn register(&self, f: impl Fn(&Nat, Fuel) -> Outcome + Send + Sync + 'static) -> Code {
        self.push(Entry {
            eval: Arc::new(f),
            enumerator: None,
        })
    }

    /// Register a total function; evaluation is instant and ignores fuel.
    pub fn register_total(&self, f: impl Fn(&Nat) -> Nat + Send + Sync + 'static) -> Code {
        self.register(move |arg, _| Outcome::confirmed(f(arg), Nat::from(0u32)))
    }

    /// Register an enumerator, making it addressable as a W-index. The entry
    /// evaluates step queries: argument `k` yields `v + 1` for an emission
    /// `v` and `0` for a gap.
    pub fn register_enumerator(&self, en: Enumerator) -> Code {
        let stepper = en.clone();
        self.push(Entry {
            eval: Arc::new(move |arg, _| {
                let k = to_u64(arg).unwrap_or(u64::MAX);
                let v = match stepper.step(k) {
                    Some(v) => v + 1u32,
                    None => Nat::from(0u32),
                };
                Outcome::confirmed(v, Nat::from(0u32))
            }),
            enumerator: Some(en),
        })
    }

    /// The enumerator registered under a code, if any.
    pub fn enumerator(&self, c: Code) -> Option<Enumerator> {
        self.entry(c).and_then(|e| e.enumerator)
    }

    /// The enumerator registered under a code, defaulting to the empty set
    /// for unknown or non-enumerator codes. This is the W-numbering view:
    /// every natural denotes some (possibly empty) enumerable set.
    pub fn w_set(&self, index: &Nat) -> Enumerator {
        Code::from_nat(index)
            .and_then(|c| self.enumerator(c))
            .unwrap_or_else(Enumerator::empty)
    }

    /// Evaluate a registered function. Unknown codes are an error, distinct
    /// from exhaustion.
    pub fn apply(&self, c: Code, arg: &Nat, fuel: Fuel) -> Result<Outcome, KernelError> {
        let entry = self.entry(c).ok_or(KernelError::UnknownCode { code: c.0 })?;
        Ok((entry.eval)(arg, fuel))
    }

    /// Partial application: fixes the first component of a paired argument.
    /// Total and fuel-free; the derived code is memoized on `(c, fixed)`.
    pub fn specialize(&self, c: Code, fixed: &Nat) -> Result<Code, KernelError> {
        let entry = self.entry(c).ok_or(KernelError::UnknownCode { code: c.0 })?;
        let key = DerivedKey::new("smn", vec![c.as_nat(), fixed.clone()]);
        let fixed = fixed.clone();
        Ok(self.register_derived(key, move || {
            let eval = entry.eval.clone();
            Entry {
                eval: Arc::new(move |arg, fuel| eval(&pair(&fixed, arg), fuel)),
                enumerator: None,
            }
        }))
    }

    /// `outer ∘ inner` with sequential fuel accounting: the budget left by
    /// the inner evaluation is handed to the outer one.
    pub fn compose(&self, outer: Code, inner: Code) -> Result<Code, KernelError> {
        let o = self
            .entry(outer)
            .ok_or(KernelError::UnknownCode { code: outer.0 })?;
        let i = self
            .entry(inner)
            .ok_or(KernelError::UnknownCode { code: inner.0 })?;
        let key = DerivedKey::new("compose", vec![outer.as_nat(), inner.as_nat()]);
        Ok(self.register_derived(key, move || {
            let o = o.eval.clone();
            let i = i.eval.clone();
            Entry {
                eval: Arc::new(move |arg, fuel| match i(arg, fuel) {
                    Outcome::Confirmed { value, .. } => {
                        // Inner steps are not metered against the outer run;
                        // budgets stay a function of the call, not of timing.
                        o(&value, fuel)
                    }
                    exhausted => exhausted,
                }),
                enumerator: None,
            }
        }))
    }

    fn register_derived(&self, key: DerivedKey, make: impl FnOnce() -> Entry) -> Code {
        if let Some(code) = self
            .inner
            .derived
            .read()
            .expect("registry poisoned")
            .get(&key)
        {
            return *code;
        }
        let entry = make();
        let code = self.push(entry);
        self.inner
            .derived
            .write()
            .expect("registry poisoned")
            .insert(key, code);
        code
    }

    /// Memoized registration of a derived function.
    pub fn derive(
        &self,
        key: DerivedKey,
        make: impl FnOnce() -> Arc<IndexFn>,
    ) -> Code {
        self.register_derived(key, || Entry {
            eval: make(),
            enumerator: None,
        })
    }

    /// Memoized registration of a derived enumerator.
    pub fn derive_enumerator(&self, key: DerivedKey, make: impl FnOnce() -> Enumerator) -> Code {
        self.register_derived(key, || {
            let en = make();
            let stepper = en.clone();
            Entry {
                eval: Arc::new(move |arg, _| {
                    let k = to_u64(arg).unwrap_or(u64::MAX);
                    let v = match stepper.step(k) {
                        Some(v) => v + 1u32,
                        None => Nat::from(0u32),
                    };
                    Outcome::confirmed(v, Nat::from(0u32))
                }),
                enumerator: Some(en),
            }
        })
    }

    /// Snapshot sweep of currently registered codes.
    pub fn codes(&self) -> Vec<Code> {
        (0..self.len()).map(Code).collect()
    }
}

impl fmt::Debug for FnRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnRegistry({} entries)", self.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::nat::unpair;

    #[test]
    fn apply_identity() {
        let reg = FnRegistry::new();
        let id = reg.register_total(|v| v.clone());
        let out = reg.apply(id, &nat(42), Fuel(1)).unwrap();
        assert_eq!(out.value(), Some(&nat(42)));
    }

    #[test]
    fn unknown_code_is_an_error_not_exhaustion() {
        let reg = FnRegistry::new();
        let err = reg.apply(Code(3), &nat(0), Fuel(100)).unwrap_err();
        assert_eq!(err, KernelError::UnknownCode { code: 3 });
    }

    #[test]
    fn specialize_agrees_with_paired_application() {
        let reg = FnRegistry::new();
        let add = reg.register_total(|v| {
            let (a, b) = unpair(v);
            a + b
        });
        let add3 = reg.specialize(add, &nat(3)).unwrap();
        let via_spec = reg.apply(add3, &nat(4), Fuel(10)).unwrap();
        let direct = reg.apply(add, &pair(&nat(3), &nat(4)), Fuel(10)).unwrap();
        assert_eq!(via_spec.value(), direct.value());
        assert_eq!(via_spec.value(), Some(&nat(7)));
        // Re-deriving returns the same code.
        assert_eq!(reg.specialize(add, &nat(3)).unwrap(), add3);
    }

    #[test]
    fn zero_budget_exhausts_non_instant_functions() {
        let reg = FnRegistry::new();
        let slow = reg.register(|v, fuel| {
            if fuel.ticks() >= 5 {
                Outcome::confirmed(v.clone(), nat(5))
            } else {
                Outcome::exhausted(fuel.ticks())
            }
        });
        assert_eq!(
            reg.apply(slow, &nat(1), Fuel::ZERO).unwrap(),
            Outcome::exhausted(0)
        );
        assert!(reg.apply(slow, &nat(1), Fuel(5)).unwrap().is_confirmed());
    }

    #[test]
    fn registered_enumerators_are_w_sets() {
        let reg = FnRegistry::new();
        let evens = reg.register_enumerator(Enumerator::decidable(|v| (v % 2u32) == 0u32.into()));
        let w = reg.w_set(&evens.as_nat());
        assert!(w.semi_contains(&nat(8), Fuel(10)).is_confirmed());
        // Unregistered indices denote the empty set.
        assert!(!reg
            .w_set(&nat(999))
            .semi_contains(&nat(0), Fuel(50))
            .is_confirmed());
    }

    #[test]
    fn compose_chains_results() {
        let reg = FnRegistry::new();
        let double = reg.register_total(|v| v * 2u32);
        let inc = reg.register_total(|v| v + 1u32);
        let f = reg.compose(inc, double).unwrap();
        let out = reg.apply(f, &nat(5), Fuel(10)).unwrap();
        assert_eq!(out.value(), Some(&nat(11)));
    }
}
