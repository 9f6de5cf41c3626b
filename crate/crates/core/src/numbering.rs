//! Numberings of abstract carriers: indices are programs for points.
//!
//! A carrier point is presented by its observation set — the computably
//! enumerable set of codes one can confirm about it. Equality between
//! points of a shared carrier is a semi-test: a fuel-bounded procedure that
//! can confirm agreement up to a fuel-determined depth and never refutes.
//! Consequently every domain restriction stated in terms of equality (as in
//! the product numbering) is fuel-relative, recorded per query and never
//! cached as a refutation.

use std::sync::Arc;

use crate::kernel::scan::{scan_candidates, Probe};
use crate::kernel::{
    nat, pair, unpair, Code, Enumerator, FnRegistry, Fuel, KernelError, Nat, Outcome,
};

/// A carrier point, presented by what is observable about it.
#[derive(Clone, Debug)]
pub struct PointHandle {
    pub observations: Enumerator,
}

impl PointHandle {
    pub fn new(observations: Enumerator) -> Self {
        PointHandle { observations }
    }
}

type EqFn = dyn Fn(&PointHandle, &PointHandle, Fuel) -> Outcome + Send + Sync;

/// Carrier equality as a semi-test. Confirmation means the two points agree
/// to the depth the budget allowed; exhaustion means unknown.
#[derive(Clone)]
pub struct PointEq(Arc<EqFn>);

impl PointEq {
    pub fn new(
        f: impl Fn(&PointHandle, &PointHandle, Fuel) -> Outcome + Send + Sync + 'static,
    ) -> Self {
        PointEq(Arc::new(f))
    }

    pub fn check(&self, a: &PointHandle, b: &PointHandle, fuel: Fuel) -> Outcome {
        (self.0)(a, b, fuel)
    }
}

/// Outcome of dereferencing an index.
#[derive(Clone, Debug)]
pub enum PointOutcome {
    Confirmed(PointHandle),
    Exhausted { steps_used: u64 },
}

impl PointOutcome {
    pub fn point(&self) -> Option<&PointHandle> {
        match self {
            PointOutcome::Confirmed(p) => Some(p),
            PointOutcome::Exhausted { .. } => None,
        }
    }

    pub fn is_confirmed(&self) -> bool {
        matches!(self, PointOutcome::Confirmed(_))
    }
}

type DerefFn = dyn Fn(&Nat, Fuel) -> PointOutcome + Send + Sync;

/// A (partial) numbering of a carrier: a domain of indices, a fuel-bounded
/// dereference from indices to point handles, and optionally a carrier
/// equality semi-test.
#[derive(Clone)]
pub struct Numbering {
    pub domain: Enumerator,
    deref: Arc<DerefFn>,
    pub equality: Option<PointEq>,
}

impl Numbering {
    pub fn new(
        domain: Enumerator,
        deref: impl Fn(&Nat, Fuel) -> PointOutcome + Send + Sync + 'static,
    ) -> Self {
        Numbering {
            domain,
            deref: Arc::new(deref),
            equality: None,
        }
    }

    pub fn with_equality(mut self, eq: PointEq) -> Self {
        self.equality = Some(eq);
        self
    }

    /// Numbering whose index `i` denotes the point presented by the
    /// registered enumerable set under `i`, viewed through `observe`.
    /// The domain is the session-local snapshot of registered codes.
    pub fn from_registry(
        registry: &FnRegistry,
        observe: impl Fn(Enumerator) -> Enumerator + Send + Sync + 'static,
    ) -> Self {
        let registry = registry.clone();
        let dom_registry = registry.clone();
        let domain = Enumerator::from_fn(move |k| (k < dom_registry.len() as u64).then(|| nat(k)));
        Numbering::new(domain, move |i, _| {
            PointOutcome::Confirmed(PointHandle::new(observe(registry.w_set(i))))
        })
    }

    pub fn deref(&self, i: &Nat, fuel: Fuel) -> PointOutcome {
        (self.deref)(i, fuel)
    }

    /// Identity of presentation, used for the reflexive fast path.
    pub fn same_presentation(&self, other: &Numbering) -> bool {
        Arc::ptr_eq(&self.deref, &other.deref)
    }
}

impl std::fmt::Debug for Numbering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Numbering{{eq: {}}}", self.equality.is_some())
    }
}

/// A reduction `ν ≤ κ` packaged with spot-checking. The caller asserts the
/// transformer is correct; spot checks semi-verify `ν_i = κ_{g(i)}` through
/// the carrier equality where one is available.
#[derive(Clone)]
pub struct Reduction {
    pub g: Code,
    pub source: Numbering,
    pub target: Numbering,
    registry: FnRegistry,
}

/// Package an asserted reduction between two numberings of one carrier.
pub fn reduction(
    source: Numbering,
    target: Numbering,
    g: Code,
    registry: &FnRegistry,
) -> Reduction {
    Reduction {
        g,
        source,
        target,
        registry: registry.clone(),
    }
}

impl Reduction {
    /// Apply the underlying index transformer.
    pub fn apply(&self, i: &Nat, fuel: Fuel) -> Result<Outcome, KernelError> {
        self.registry.apply(self.g, i, fuel)
    }

    /// Semi-verify `ν_i = κ_{g(i)}` at one index. Exhaustion of the
    /// transformer on a domain index surfaces as an exhausted outcome.
    pub fn spot_check(&self, i: &Nat, fuel: Fuel) -> Result<Outcome, KernelError> {
        let eq = self
            .source
            .equality
            .as_ref()
            .or(self.target.equality.as_ref());
        let Some(eq) = eq else {
            return Ok(Outcome::exhausted(0));
        };
        let quarter = Fuel(fuel.ticks() / 4);
        let mapped = self.registry.apply(self.g, i, quarter)?;
        let Some(j) = mapped.value() else {
            return Ok(Outcome::exhausted(quarter.ticks()));
        };
        let (PointOutcome::Confirmed(p), PointOutcome::Confirmed(q)) =
            (self.source.deref(i, quarter), self.target.deref(j, quarter))
        else {
            return Ok(Outcome::exhausted(quarter.ticks() * 2));
        };
        Ok(eq.check(&p, &q, Fuel(fuel.ticks() / 2)))
    }
}

/// The product numbering `ν ∗ κ`: index `⟨i, j⟩` dereferences to `ν_i`,
/// restricted to pairs whose equality the semi-test confirms within the
/// query's budget. Pairs never confirmed stay outside the domain for that
/// query; nothing is ever recorded as refuted.
pub fn product_numbering(nu: &Numbering, kappa: &Numbering) -> Numbering {
    let eq = nu
        .equality
        .clone()
        .or_else(|| kappa.equality.clone())
        .expect("product numbering requires a carrier equality semi-test");
    let reflexive = nu.same_presentation(kappa);

    let deref_nu = nu.clone();
    let deref_kappa = kappa.clone();
    let deref_eq = eq.clone();
    let deref = move |code: &Nat, fuel: Fuel| {
        let (i, j) = unpair(code);
        if reflexive && i == j {
            return deref_nu.deref(&i, fuel);
        }
        let quarter = Fuel(fuel.ticks() / 4);
        let (PointOutcome::Confirmed(p), PointOutcome::Confirmed(q)) =
            (deref_nu.deref(&i, quarter), deref_kappa.deref(&j, quarter))
        else {
            return PointOutcome::Exhausted {
                steps_used: quarter.ticks() * 2,
            };
        };
        match deref_eq.check(&p, &q, Fuel(fuel.ticks() / 2)) {
            Outcome::Confirmed { .. } => PointOutcome::Confirmed(p),
            Outcome::Exhausted { steps_used } => PointOutcome::Exhausted { steps_used },
        }
    };

    // Domain sweep: stage s grants every earlier index pair a doubled
    // equality budget, so each genuinely equal pair is eventually emitted.
    let dom_nu = nu.clone();
    let dom_kappa = kappa.clone();
    let dom_eq = eq.clone();
    let domain = Enumerator::from_fn(move |t| {
        let (pair_rank, stage) = crate::kernel::nat::unpair_u64(t);
        let (ki, kj) = crate::kernel::nat::unpair_u64(pair_rank);
        let i = dom_nu.domain.step(ki)?;
        let j = dom_kappa.domain.step(kj)?;
        let budget = Fuel(64u64.saturating_mul(1 << stage.min(20)));
        let quarter = Fuel(budget.ticks() / 4);
        let (PointOutcome::Confirmed(p), PointOutcome::Confirmed(q)) =
            (dom_nu.deref(&i, quarter), dom_kappa.deref(&j, quarter))
        else {
            return None;
        };
        dom_eq
            .check(&p, &q, budget)
            .is_confirmed()
            .then(|| pair(&i, &j))
    });

    Numbering {
        domain,
        deref: Arc::new(deref),
        equality: Some(eq),
    }
}

/// Projection transformers realizing `ν ∗ κ ≤ ν` and `ν ∗ κ ≤ κ`.
pub fn product_projections(registry: &FnRegistry) -> (Code, Code) {
    let first = registry.derive(
        crate::kernel::DerivedKey::new("product-proj-1", vec![]),
        || {
            Arc::new(|code: &Nat, _| {
                let (i, _) = unpair(code);
                Outcome::confirmed(i, Nat::from(0u32))
            })
        },
    );
    let second = registry.derive(
        crate::kernel::DerivedKey::new("product-proj-2", vec![]),
        || {
            Arc::new(|code: &Nat, _| {
                let (_, j) = unpair(code);
                Outcome::confirmed(j, Nat::from(0u32))
            })
        },
    );
    (first, second)
}

/// A completely enumerable subset of a carrier: membership of `ν_i` is
/// witnessed by `i` showing up in the witness set.
#[derive(Clone, Debug)]
pub struct CEnumerableSet {
    pub witness: Enumerator,
}

impl CEnumerableSet {
    pub fn new(witness: Enumerator) -> Self {
        CEnumerableSet { witness }
    }
}

/// Fuel-bounded membership: confirmed iff the index appears in the witness
/// enumerator within budget, with the enumeration step recorded. Exhausted
/// is "unknown", never "no".
pub fn ce_member(set: &CEnumerableSet, i: &Nat, fuel: Fuel) -> Outcome {
    set.witness.semi_contains(i, fuel)
}

/// An open set presented as a computably enumerable union of basic opens.
#[derive(Clone, Debug)]
pub struct LacombeSet {
    pub index_set: Enumerator,
}

impl LacombeSet {
    pub fn new(index_set: Enumerator) -> Self {
        LacombeSet { index_set }
    }

    pub fn empty() -> Self {
        LacombeSet::new(Enumerator::empty())
    }
}

/// Generic Lacombe membership: dovetail the index set against a membership
/// semi-test for the queried point. Confirmed outcomes carry the basic-set
/// code that witnessed the hit.
pub fn lacombe_member_with(
    set: &LacombeSet,
    member: impl Fn(&Nat, Fuel) -> Outcome,
    fuel: Fuel,
) -> Outcome {
    let (hit, spent) = scan_candidates(&set.index_set, fuel, 16, |basic, budget| {
        match member(basic, budget) {
            Outcome::Confirmed { .. } => Probe::hit(basic.clone(), 1),
            Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
        }
    });
    match hit {
        Some(basic) => Outcome::confirmed(basic, nat(spent)),
        None => Outcome::exhausted(spent),
    }
}
