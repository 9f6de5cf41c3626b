//! Quasi-metric machinery over a countable dense base: lower/full
//! computability via the `lt`/`gt` relations, induced effective spaces with
//! ball bases and gap-certified strong inclusion, weakly computable and
//! computable points, limit passing, and the effective-regularity
//! witnesses.
//!
//! Conventions: a base code names a dense-base point through the instance's
//! `β` numbering; a basis code `⟨i, m⟩` names the ball around `β_i` of
//! radius `2^{-m}`; `lt` enumerates `⟨a, b, c, e⟩` with
//! `δ(β_a, β_b) < c·2^{-e}` and `gt` the corresponding strict lower bounds.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::kernel::nat::{to_u64, unpair_u64};
use crate::kernel::scan::{scan_candidates, Probe};
use crate::kernel::{
    bound_code, nat, pair, pair3, pair4, split3, split4, unpair, Code, DerivedKey, Dyadic,
    Enumerator, FnRegistry, Fuel, Nat, Outcome,
};
use crate::numbering::{LacombeSet, Numbering};
use crate::report::CheckRecord;
use crate::space::SpaceDescriptor;

static NEXT_QM_ID: AtomicU64 = AtomicU64::new(0);

type DeltaFn = dyn Fn(&Nat, &Nat) -> Dyadic + Send + Sync;
type RankFn = dyn Fn(u64) -> Nat + Send + Sync;

/// A quasi-metric presented through its behaviour on a dense base.
#[derive(Clone)]
pub struct QuasiMetricDescriptor {
    pub registry: FnRegistry,
    pub id: Nat,
    /// `⟨a, b, c, e⟩` with `δ(β_a, β_b) < c·2^{-e}`; lower computability.
    pub lt: Enumerator,
    /// `⟨a, b, c, e⟩` with `δ(β_a, β_b) > c·2^{-e}`; present iff the space
    /// is fully computable.
    pub gt: Option<Enumerator>,
    /// Exact distance on base codes; instances only.
    pub exact_delta: Option<Arc<DeltaFn>>,
    /// Fair sweep of base codes, canonical codes of nearby base points
    /// first. Defaults to the identity sweep.
    pub base_rank: Arc<RankFn>,
}

impl QuasiMetricDescriptor {
    pub fn new(registry: &FnRegistry, lt: Enumerator) -> Self {
        QuasiMetricDescriptor {
            registry: registry.clone(),
            id: nat(NEXT_QM_ID.fetch_add(1, Ordering::Relaxed)),
            lt,
            gt: None,
            exact_delta: None,
            base_rank: Arc::new(|r| nat(r)),
        }
    }

    pub fn with_gt(mut self, gt: Enumerator) -> Self {
        self.gt = Some(gt);
        self
    }

    pub fn with_exact_delta(
        mut self,
        delta: impl Fn(&Nat, &Nat) -> Dyadic + Send + Sync + 'static,
    ) -> Self {
        self.exact_delta = Some(Arc::new(delta));
        self
    }

    pub fn with_base_rank(mut self, rank: impl Fn(u64) -> Nat + Send + Sync + 'static) -> Self {
        self.base_rank = Arc::new(rank);
        self
    }

    /// Strong inclusion on ball codes: `⟨i, m⟩ ≺ ⟨j, n⟩` exactly when the
    /// gap `δ(β_j, β_i) < 2^{-n} - 2^{-m}` is certified through `lt` with
    /// the gap's exact dyadic bound code.
    pub fn strong_incl(&self) -> Enumerator {
        let lt = self.lt.clone();
        let sweep_lt = lt.clone();
        Enumerator::from_fn(move |t| {
            let (k, p) = unpair_u64(t);
            let fact = sweep_lt.step(k)?;
            let (a, b, c, e) = split4(&fact);
            let (m, n) = unpair_u64(p);
            let bound = dyadic_bound(&c, &e)?;
            let gap = &Dyadic::pow2(-(n as i64)) - &Dyadic::pow2(-(m as i64));
            // δ(β_a, β_b) < c·2^{-e}; the emission certifies every pair of
            // radii whose gap dominates the bound.
            (bound <= gap).then(|| pair(&pair(&b, &nat(m)), &pair(&a, &nat(n))))
        })
        .with_probe(move |code, fuel| {
            let (small, big) = unpair(code);
            let (i, m) = unpair(&small);
            let (j, n) = unpair(&big);
            let (Some(m), Some(n)) = (to_u64(&m), to_u64(&n)) else {
                return Outcome::exhausted(0);
            };
            if m <= n {
                return Outcome::exhausted(0);
            }
            let gap = &Dyadic::pow2(-(n as i64)) - &Dyadic::pow2(-(m as i64));
            let Some((c, e)) = bound_code(&gap) else {
                return Outcome::exhausted(0);
            };
            lt.semi_contains(&pair4(&j, &i, &c, &e), fuel)
                .map_value(|_| code.clone())
        })
    }

    /// Exact ball semantics on instances: does `β_y` lie in
    /// `ball(β_i, 2^{-m})`, i.e. `δ(β_i, β_y) < 2^{-m}`?
    pub fn base_in_ball(&self, y: &Nat, ball: &Nat) -> Option<bool> {
        let delta = self.exact_delta.as_ref()?;
        let (i, m) = unpair(ball);
        let m = to_u64(&m)?;
        Some(delta(&i, y) < Dyadic::pow2(-(m as i64)))
    }
}

impl std::fmt::Debug for QuasiMetricDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "QuasiMetricDescriptor(id {}, gt: {}, oracle: {})",
            self.id,
            self.gt.is_some(),
            self.exact_delta.is_some()
        )
    }
}

/// Errors from the quasi-metric layer.
#[derive(Debug, thiserror::Error)]
pub enum QuasiMetricError {
    #[error("the quasi-metric has no upper (gt) enumerator; not fully computable")]
    GtUnavailable,
    #[error("the quasi-metric has no exact distance oracle")]
    OracleUnavailable,
}

fn dyadic_bound(c: &Nat, e: &Nat) -> Option<Dyadic> {
    let e = to_u64(e)?;
    let c = num_bigint::BigInt::from(c.clone());
    Some(Dyadic::new(c, num_bigint::BigInt::from(-(e as i64))))
}

/// Build a relation enumerator from a decidable test and a semantic
/// generator: even steps sweep raw codes for completeness, odd steps sweep
/// generated candidates so that facts about nearby base points appear
/// early. Queries decide instantly.
pub fn relation_enumerator(
    test: impl Fn(&Nat) -> bool + Send + Sync + 'static,
    gen: impl Fn(u64) -> Option<Nat> + Send + Sync + 'static,
) -> Enumerator {
    let test = Arc::new(test);
    let sweep_test = test.clone();
    Enumerator::from_fn(move |t| {
        let code = if t % 2 == 0 { nat(t / 2) } else { gen((t - 1) / 2)? };
        sweep_test(&code).then_some(code)
    })
    .with_probe(move |code, _| {
        if test(code) {
            Outcome::confirmed(code.clone(), code * 2u32)
        } else {
            Outcome::exhausted(1)
        }
    })
}

/// The conjugate quasi-metric `δ^c(x, y) = δ(y, x)`: argument order swapped
/// in both relations and the oracle. An involution up to membership.
pub fn conjugate(q: &QuasiMetricDescriptor) -> QuasiMetricDescriptor {
    let swap = |code: &Nat| -> Option<Nat> {
        let (a, b, c, e) = split4(code);
        Some(pair4(&b, &a, &c, &e))
    };
    let lt = q.lt.map_invertible(swap, swap);
    let gt = q.gt.as_ref().map(|gt| gt.map_invertible(swap, swap));
    let delta = q
        .exact_delta
        .clone()
        .map(|d| Arc::new(move |a: &Nat, b: &Nat| d(b, a)) as Arc<DeltaFn>);
    QuasiMetricDescriptor {
        registry: q.registry.clone(),
        id: nat(NEXT_QM_ID.fetch_add(1, Ordering::Relaxed)),
        lt,
        gt,
        exact_delta: delta,
        base_rank: q.base_rank.clone(),
    }
}

/// Symmetrization bound check: `δ*(β_a, β_b) < c·2^{-e}` holds exactly when
/// both one-sided facts do.
pub fn sym_lt(
    q: &QuasiMetricDescriptor,
    a: &Nat,
    b: &Nat,
    c: &Nat,
    e: &Nat,
    fuel: Fuel,
) -> Outcome {
    let half = Fuel(fuel.ticks() / 2);
    let fwd = q.lt.semi_contains(&pair4(a, b, c, e), half);
    let Outcome::Confirmed { .. } = fwd else {
        return Outcome::exhausted(fwd.steps_used());
    };
    q.lt.semi_contains(&pair4(b, a, c, e), half)
        .map_value(|_| pair4(a, b, c, e))
}

/// A weakly computable point: the enumerable set of `⟨a, e⟩` with
/// `δ(β_a, y) < 2^{-e}`, closed under radius widening.
#[derive(Clone, Debug)]
pub struct WcPoint {
    pub observations: Enumerator,
}

impl WcPoint {
    /// Wrap a raw observation enumerator, enforcing widening closure.
    pub fn from_raw(raw: Enumerator) -> Self {
        WcPoint {
            observations: raw.widen_radius(),
        }
    }

    pub fn from_closed(observations: Enumerator) -> Self {
        WcPoint { observations }
    }
}

/// A computable point: the enumerable set of `⟨a, b, e⟩` with both
/// `δ(β_a, y) < 2^{-e}` and `δ(y, β_b) < 2^{-e}`, closed under widening.
#[derive(Clone, Debug)]
pub struct CPoint {
    pub observations: Enumerator,
}

impl CPoint {
    pub fn from_raw(raw: Enumerator) -> Self {
        // A c-observation ⟨⟨a, b⟩, e⟩ widens in e exactly like a wc one.
        CPoint {
            observations: raw.widen_radius(),
        }
    }

    pub fn from_closed(observations: Enumerator) -> Self {
        CPoint { observations }
    }
}

/// Membership of a weakly computable point in a basic ball: confirmed iff
/// the ball code is enumerated among the point's observations.
pub fn ball_member(p: &WcPoint, ball: &Nat, fuel: Fuel) -> Outcome {
    p.observations.semi_contains(ball, fuel)
}

/// Project c-observations `⟨a, b, e⟩` to τ-side wc-observations `⟨a, e⟩`.
/// When the source has a probe, queries search the dense base for a
/// partner witness instead of sweeping the projected image.
pub fn project_left(q: &QuasiMetricDescriptor, obs: &Enumerator) -> Enumerator {
    let sweep = obs.map(|code| {
        let (a, _b, e) = split3(code);
        Some(pair(&a, &e))
    });
    if !obs.has_probe() {
        return sweep;
    }
    let obs = obs.clone();
    let rank = q.base_rank.clone();
    sweep.with_probe(move |code, fuel| {
        let (a, e) = unpair(code);
        let partners = {
            let rank = rank.clone();
            Enumerator::from_fn(move |r| Some(rank(r)))
        };
        let (hit, spent) = scan_candidates(&partners, fuel, 8, |d, budget| {
            match obs.semi_contains(&pair3(&a, d, &e), budget) {
                Outcome::Confirmed { .. } => Probe::hit(code.clone(), 1),
                Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
            }
        });
        match hit {
            Some(v) => Outcome::confirmed(v, nat(spent)),
            None => Outcome::exhausted(spent),
        }
    })
}

/// Project c-observations `⟨a, b, e⟩` to σ-side (conjugate) observations
/// `⟨b, e⟩`, with the same partner-search probe as [`project_left`].
pub fn project_right(q: &QuasiMetricDescriptor, obs: &Enumerator) -> Enumerator {
    let sweep = obs.map(|code| {
        let (_a, b, e) = split3(code);
        Some(pair(&b, &e))
    });
    if !obs.has_probe() {
        return sweep;
    }
    let obs = obs.clone();
    let rank = q.base_rank.clone();
    sweep.with_probe(move |code, fuel| {
        let (b, e) = unpair(code);
        let partners = {
            let rank = rank.clone();
            Enumerator::from_fn(move |r| Some(rank(r)))
        };
        let (hit, spent) = scan_candidates(&partners, fuel, 8, |a, budget| {
            match obs.semi_contains(&pair3(a, &b, &e), budget) {
                Outcome::Confirmed { .. } => Probe::hit(code.clone(), 1),
                Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
            }
        });
        match hit {
            Some(v) => Outcome::confirmed(v, nat(spent)),
            None => Outcome::exhausted(spent),
        }
    })
}

/// The canonical computable point sitting on a base element: observations
/// `⟨a, d, e⟩` with `δ(β_a, β_b) < 2^{-e}` and `δ(β_b, β_d) < 2^{-e}`,
/// certified through `lt`.
pub fn base_to_c(q: &QuasiMetricDescriptor, b: &Nat) -> CPoint {
    let lt = q.lt.clone();
    let rank = q.base_rank.clone();
    let b_sweep = b.clone();
    let sweep = Enumerator::from_fn(move |t| {
        let (ad, e) = unpair_u64(t);
        let (ar, dr) = unpair_u64(ad);
        let a = rank(ar);
        let d = rank(dr);
        let e = nat(e);
        let one = nat(1);
        let left = pair4(&a, &b_sweep, &one, &e);
        let right = pair4(&b_sweep, &d, &one, &e);
        // Cheap instant certificates only; the probe handles the rest.
        (lt.semi_contains(&left, Fuel(8)).is_confirmed()
            && lt.semi_contains(&right, Fuel(8)).is_confirmed())
        .then(|| pair3(&a, &d, &e))
    });
    let lt = q.lt.clone();
    let b = b.clone();
    let with_probe = sweep.with_probe(move |code, fuel| {
        let (a, d, e) = split3(code);
        let one = nat(1);
        let half = Fuel(fuel.ticks() / 2);
        let left = lt.semi_contains(&pair4(&a, &b, &one, &e), half);
        let Outcome::Confirmed { .. } = left else {
            return Outcome::exhausted(left.steps_used());
        };
        lt.semi_contains(&pair4(&b, &d, &one, &e), half)
            .map_value(|_| code.clone())
    });
    // The (a, d, e) sweep already visits every radius of a qualifying pair,
    // so the set is radius-closed as built.
    CPoint::from_closed(with_probe)
}

/// The index transformer behind [`base_to_c`], as a registered code mapping
/// a base code to the registered observation set of its computable point.
pub fn base_to_c_code(q: &QuasiMetricDescriptor) -> Code {
    let key = DerivedKey::new("base-to-c", vec![q.id.clone()]);
    let q = q.clone();
    let registry = q.registry.clone();
    q.registry.clone().derive(key, move || {
        Arc::new(move |b: &Nat, _| {
            let point = base_to_c(&q, b);
            let code = registry.derive_enumerator(
                DerivedKey::new("base-point-obs", vec![q.id.clone(), b.clone()]),
                move || point.observations.clone(),
            );
            Outcome::confirmed(code.as_nat(), Nat::from(0u32))
        })
    })
}

/// Drop the right-hand witness of a computable point, keeping every τ-side
/// ball membership. The base sweep provides partner candidates for the
/// derived probe.
pub fn c_to_wc(q: &QuasiMetricDescriptor, p: &CPoint) -> WcPoint {
    WcPoint::from_closed(project_left(q, &p.observations))
}

/// The transformer behind [`c_to_wc`] on registered indices.
pub fn c_to_wc_code(q: &QuasiMetricDescriptor) -> Code {
    let key = DerivedKey::new("c-to-wc", vec![q.id.clone()]);
    let q = q.clone();
    let registry = q.registry.clone();
    q.registry.clone().derive(key, move || {
        Arc::new(move |i: &Nat, _| {
            let source = CPoint::from_closed(registry.w_set(i));
            let wc = c_to_wc(&q, &source);
            let code = registry.derive_enumerator(
                DerivedKey::new("wc-of", vec![q.id.clone(), i.clone()]),
                move || wc.observations.clone(),
            );
            Outcome::confirmed(code.as_nat(), Nat::from(0u32))
        })
    })
}

const CHAIN_BUDGET_UNIT: u64 = 2_048;

/// View a registered chain code as the enumerator of its values.
fn chain_values(registry: &FnRegistry, f: Code) -> Enumerator {
    let registry = registry.clone();
    Enumerator::from_fn(move |n| {
        registry
            .apply(f, &nat(n), Fuel(CHAIN_BUDGET_UNIT.saturating_mul(n + 1)))
            .ok()?
            .into_value()
    })
}

/// Observations of the limit of a normed convergent chain of ball codes:
/// `⟨b, e⟩` is emitted once some chain element equals the queried ball or
/// stands in certified strong inclusion below it.
fn limit_observations(
    q: &QuasiMetricDescriptor,
    strong_incl: &Enumerator,
    f: Code,
) -> Enumerator {
    let chain = chain_values(&q.registry, f);
    let incl = strong_incl.clone();
    let rank = q.base_rank.clone();
    let sweep_chain = chain.clone();
    let sweep_incl = incl.clone();
    let sweep_rank = rank;
    let sweep = Enumerator::from_fn(move |t| {
        let (n, rest) = unpair_u64(t);
        let (cand_rank, er) = unpair_u64(rest);
        let (cr, e) = unpair_u64(cand_rank);
        let cand = pair(&sweep_rank(cr), &nat(e));
        let link = sweep_chain.step(n)?;
        if link == cand {
            return Some(cand);
        }
        sweep_incl
            .semi_contains(&pair(&link, &cand), Fuel(16 * (er + 1)))
            .is_confirmed()
            .then_some(cand)
    });
    sweep.with_probe(move |ball, fuel| {
        let (hit, spent) = scan_candidates(&chain, fuel, 32, |link, budget| {
            if link == ball {
                return Probe::hit(ball.clone(), 1);
            }
            match incl.semi_contains(&pair(link, ball), budget) {
                Outcome::Confirmed { .. } => Probe::hit(ball.clone(), 1),
                Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
            }
        });
        match hit {
            Some(v) => Outcome::confirmed(v, nat(spent)),
            None => Outcome::exhausted(spent),
        }
    })
}

/// Limit passing into weakly computable points: from (an index of) a normed
/// convergent enumeration of balls to the wc-point it converges to.
/// Non-convergent input is tolerated; later spot checks flag it.
pub fn limit_pass_wc(q: &QuasiMetricDescriptor, f: Code) -> WcPoint {
    // Strong inclusion below a ball only gets easier as the ball widens, so
    // the candidate sweep is radius-closed as built.
    WcPoint::from_closed(limit_observations(q, &q.strong_incl(), f))
}

/// Registered form of [`limit_pass_wc`]: a code mapping chain indices to
/// indices of their limit points. Serves as the `pt` transformer of the
/// induced wc-space.
pub fn limit_pass_wc_code(q: &QuasiMetricDescriptor) -> Code {
    let key = DerivedKey::new("wc-pt", vec![q.id.clone()]);
    let q = q.clone();
    let registry = q.registry.clone();
    q.registry.clone().derive(key, move || {
        Arc::new(move |fnat: &Nat, _| {
            let Some(f) = Code::from_nat(fnat) else {
                return Outcome::exhausted(0);
            };
            let wc = limit_pass_wc(&q, f);
            let code = registry.derive_enumerator(
                DerivedKey::new("wc-limit", vec![q.id.clone(), fnat.clone()]),
                move || wc.observations.clone(),
            );
            Outcome::confirmed(code.as_nat(), Nat::from(0u32))
        })
    })
}

/// Bi-topological limit passing into computable points: two normed chains,
/// one per topology, converging to the same point yield its c-observations
/// `⟨a, b, e⟩` by certifying each side against its own strong inclusion.
pub fn bi_limit_pass_c(q: &QuasiMetricDescriptor, f_tau: Code, f_sigma: Code) -> CPoint {
    let conj = conjugate(q);
    let tau_side = limit_observations(q, &q.strong_incl(), f_tau);
    let sigma_side = limit_observations(&conj, &conj.strong_incl(), f_sigma);
    let sweep_tau = tau_side.clone();
    let sweep_sigma = sigma_side.clone();
    let sweep = Enumerator::from_fn(move |t| {
        let (k1, k2) = unpair_u64(t);
        let left = sweep_tau.step(k1)?;
        let right = sweep_sigma.step(k2)?;
        let (a, e1) = unpair(&left);
        let (b, e2) = unpair(&right);
        (e1 == e2).then(|| pair3(&a, &b, &e1))
    });
    let raw = sweep.with_probe(move |code, fuel| {
        let (a, b, e) = split3(code);
        let half = Fuel(fuel.ticks() / 2);
        let left = tau_side.semi_contains(&pair(&a, &e), half);
        let Outcome::Confirmed { .. } = left else {
            return Outcome::exhausted(left.steps_used());
        };
        sigma_side
            .semi_contains(&pair(&b, &e), half)
            .map_value(|_| code.clone())
    });
    CPoint::from_closed(raw)
}

/// Registered form of [`bi_limit_pass_c`]; the bi-space `pt` transformer.
pub fn bi_limit_pass_c_code(q: &QuasiMetricDescriptor) -> Code {
    let key = DerivedKey::new("c-bi-pt", vec![q.id.clone()]);
    let q = q.clone();
    let registry = q.registry.clone();
    q.registry.clone().derive(key, move || {
        Arc::new(move |arg: &Nat, _| {
            let (f1, f2) = unpair(arg);
            let (Some(f1), Some(f2)) = (Code::from_nat(&f1), Code::from_nat(&f2)) else {
                return Outcome::exhausted(0);
            };
            let point = bi_limit_pass_c(&q, f1, f2);
            let code = registry.derive_enumerator(
                DerivedKey::new("c-limit", vec![q.id.clone(), arg.clone()]),
                move || point.observations.clone(),
            );
            Outcome::confirmed(code.as_nat(), Nat::from(0u32))
        })
    })
}

/// Build the effective space induced by the quasi-metric: the ball basis
/// over pair codes, the gap-certified strong inclusion, and the supplied
/// per-point membership rows.
pub fn induced_space(
    q: &QuasiMetricDescriptor,
    row: impl Fn(&Nat) -> Enumerator + Send + Sync + 'static,
    points: Numbering,
) -> SpaceDescriptor {
    let registry = q.registry.clone();
    let space = SpaceDescriptor::from_rows(&registry, q.strong_incl(), row, points);
    let rank = q.base_rank.clone();
    let space = space.with_basis_rank(move |r| {
        let (cr, e) = unpair_u64(r);
        pair(&rank(cr), &nat(e))
    });
    // Effective strong-basis witness via the shared refinement search.
    let sb_space = space.clone();
    let key = DerivedKey::new("qm-sb", vec![space.id.clone()]);
    let sb = registry.derive(key, move || {
        let space = sb_space.clone();
        Arc::new(move |arg: &Nat, fuel: Fuel| {
            let (i, m, n) = split3(arg);
            crate::space::sb_search(&space, &i, &m, &n, fuel)
        })
    });
    space.with_sb(sb)
}

/// First regularity witness: refine a ball `⟨a, m⟩ ∋ x_i` to a certified
/// strong sub-ball still containing the point. Candidates come from the
/// point's own membership row and refinements from strong inclusion, so a
/// confirmation is exactly a hit in the enumerable set of pairs
/// `⟨b, n⟩ ≺ ⟨a, m⟩` with `⟨i, ⟨b, n⟩⟩` in the membership relation.
pub fn regularity_s(
    q: &QuasiMetricDescriptor,
    space: &SpaceDescriptor,
    i: &Nat,
    ball: &Nat,
    fuel: Fuel,
) -> Outcome {
    let row = space.row(i);
    let incl = q.strong_incl();
    let ball = ball.clone();
    let (hit, spent) = scan_candidates(&row, fuel, 8, move |cand, budget| {
        match incl.semi_contains(&pair(cand, &ball), budget) {
            Outcome::Confirmed { .. } => Probe::hit(cand.clone(), 1),
            Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
        }
    });
    match hit {
        Some(b) => Outcome::confirmed(b, nat(spent)),
        None => Outcome::exhausted(spent),
    }
}

/// Second regularity witness: the Lacombe cover of the complement of the
/// queried ball by conjugate balls, measured from the refined center. An
/// emitted code `⟨v, c⟩` names the conjugate ball of radius `2^{-c}` about
/// `β_v` and carries a `gt` certificate
/// `δ(β_{b'}, β_v) > 2^{-(c-1)} + 2^{-n'}` where `⟨b', n'⟩` is the refined
/// s-ball; the certificate makes it disjoint from that ball by the
/// triangle law.
pub fn regularity_t(
    q: &QuasiMetricDescriptor,
    s_result: &Nat,
) -> Result<LacombeSet, QuasiMetricError> {
    let gt = q.gt.clone().ok_or(QuasiMetricError::GtUnavailable)?;
    let (b_refined, n_refined) = unpair(s_result);
    let Some(n_refined) = to_u64(&n_refined) else {
        return Ok(LacombeSet::empty());
    };
    let margin = move |c: u64| -> Option<(Nat, Nat)> {
        // 2^{-(c-1)} + 2^{-n'}, exactly, as a positive bound code.
        let bound = &Dyadic::pow2(-(c as i64) + 1) + &Dyadic::pow2(-(n_refined as i64));
        bound_code(&bound)
    };
    let rank = q.base_rank.clone();
    let sweep_gt = gt.clone();
    let sweep_b = b_refined.clone();
    let sweep = Enumerator::from_fn(move |t| {
        let (vr, c_off) = unpair_u64(t);
        let c = c_off + 1;
        let v = rank(vr);
        let (coeff, exp) = margin(c)?;
        let fact = pair4(&sweep_b, &v, &coeff, &exp);
        sweep_gt
            .semi_contains(&fact, Fuel(64))
            .is_confirmed()
            .then(|| pair(&v, &nat(c)))
    });
    let index_set = sweep.with_probe(move |code, fuel| {
        let (v, c) = unpair(code);
        let Some(c) = to_u64(&c) else {
            return Outcome::exhausted(0);
        };
        if c == 0 {
            return Outcome::exhausted(0);
        }
        let Some((coeff, exp)) = margin(c) else {
            return Outcome::exhausted(0);
        };
        gt.semi_contains(&pair4(&b_refined, &v, &coeff, &exp), fuel)
            .map_value(|_| code.clone())
    });
    Ok(LacombeSet::new(index_set))
}

/// Refine toward a computable point: find a dense-base ball `⟨u, e⟩`
/// containing `y` in certified strong inclusion below the given ball. The
/// point's own both-sided observations provide the candidate centers.
pub fn refine_toward(q: &QuasiMetricDescriptor, y: &CPoint, ball: &Nat, fuel: Fuel) -> Outcome {
    let incl = q.strong_incl();
    let ball = ball.clone();
    let (hit, spent) = scan_candidates(&y.observations, fuel, 8, move |obs, budget| {
        let (u, _b, e) = split3(obs);
        let cand = pair(&u, &e);
        match incl.semi_contains(&pair(&cand, &ball), budget) {
            Outcome::Confirmed { .. } => Probe::hit(cand, 1),
            Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
        }
    });
    match hit {
        Some(c) => Outcome::confirmed(c, nat(spent)),
        None => Outcome::exhausted(spent),
    }
}

/// Carrier equality for computable points presented by c-observations:
/// agreement to depth `d` means that for every precision `e ≤ d` some
/// shared base center `u` has both points confirmed in `⟨u, u, e⟩`, i.e.
/// within `2^{-e}` of `β_u` on both sides. Confirmation is fuel-relative
/// agreement evidence, never a proof of equality; distinct points stall
/// once the depth passes their separation.
pub fn c_equality(q: &QuasiMetricDescriptor) -> crate::numbering::PointEq {
    let rank = q.base_rank.clone();
    crate::numbering::PointEq::new(move |p, r, fuel| {
        let depth = (fuel.ticks() / 64).clamp(2, 24);
        let per_probe = Fuel((fuel.ticks() / (4 * depth)).clamp(64, 8_192));
        let width = (fuel.ticks() / (8 * depth)).clamp(8, 256);
        let mut spent = 0;
        'depths: for e in 1..=depth {
            for ur in 0..width {
                let u = rank(ur);
                let obs = pair3(&u, &u, &nat(e));
                let a = p.observations.semi_contains(&obs, per_probe);
                spent += a.steps_used().max(1);
                if !a.is_confirmed() {
                    continue;
                }
                let b = r.observations.semi_contains(&obs, per_probe);
                spent += b.steps_used().max(1);
                if b.is_confirmed() {
                    continue 'depths;
                }
            }
            return Outcome::exhausted(spent);
        }
        Outcome::confirmed(nat(depth), nat(depth))
    })
}

/// Exact axiom checks on sampled base triples: `δ(x, x) = 0` and the
/// triangle law, both against the instance oracle.
pub fn check_axioms(
    q: &QuasiMetricDescriptor,
    label: &str,
    triples: &[(Nat, Nat, Nat)],
) -> Result<Vec<CheckRecord>, QuasiMetricError> {
    let delta = q
        .exact_delta
        .clone()
        .ok_or(QuasiMetricError::OracleUnavailable)?;
    let mut records = Vec::new();
    let mut reflexive_ok = true;
    let mut triangle_err = None;
    for (x, y, z) in triples {
        if !delta(x, x).is_zero() {
            reflexive_ok = false;
        }
        let direct = delta(x, z);
        let through = &delta(x, y) + &delta(y, z);
        if direct > through {
            triangle_err = Some(format!(
                "δ({x},{z}) = {direct} exceeds δ({x},{y}) + δ({y},{z}) = {through}"
            ));
            break;
        }
    }
    records.push(if reflexive_ok {
        CheckRecord::pass(format!("{label}.reflexive-zero"), 0)
    } else {
        CheckRecord::fail(format!("{label}.reflexive-zero"), "δ(x,x) ≠ 0", 0)
    });
    records.push(match triangle_err {
        None => CheckRecord::pass_with(
            format!("{label}.triangle"),
            format!("{} triples", triples.len()),
            0,
        ),
        Some(err) => CheckRecord::fail(format!("{label}.triangle"), err, 0),
    });
    Ok(records)
}

/// Trichotomy guard: on sampled tuples, `lt` and `gt` never both confirm.
pub fn check_trichotomy(
    q: &QuasiMetricDescriptor,
    label: &str,
    tuples: &[Nat],
    fuel: Fuel,
) -> Vec<CheckRecord> {
    let Some(gt) = &q.gt else {
        return vec![CheckRecord::inconclusive(
            format!("{label}.trichotomy"),
            "no gt enumerator",
            0,
        )];
    };
    for tuple in tuples {
        if q.lt.semi_contains(tuple, fuel).is_confirmed()
            && gt.semi_contains(tuple, fuel).is_confirmed()
        {
            return vec![CheckRecord::fail(
                format!("{label}.trichotomy"),
                format!("tuple {tuple} confirmed on both sides"),
                fuel.ticks(),
            )];
        }
    }
    vec![CheckRecord::pass_with(
        format!("{label}.trichotomy"),
        format!("{} tuples", tuples.len()),
        fuel.ticks(),
    )]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::nat::zigzag_unrank;
    use crate::numbering::{PointHandle, PointOutcome};
    use num_bigint::BigInt;

    /// Integer line under the upper quasi-metric δ(a, b) = max(a - b, 0);
    /// base codes are zig-zag ranks of integers.
    fn int_value(code: &Nat) -> BigInt {
        zigzag_unrank(code)
    }

    fn int_code(v: i64) -> Nat {
        crate::kernel::nat::zigzag_rank(&BigInt::from(v))
    }

    fn int_delta(a: &Nat, b: &Nat) -> Dyadic {
        let diff = int_value(a) - int_value(b);
        let zero = Dyadic::zero();
        Dyadic::new(diff, BigInt::from(0)).max(zero)
    }

    fn int_qm(registry: &FnRegistry) -> QuasiMetricDescriptor {
        let lt = relation_enumerator(
            |code| {
                let (a, b, c, e) = split4(code);
                match dyadic_bound(&c, &e) {
                    Some(bound) => int_delta(&a, &b) < bound,
                    None => false,
                }
            },
            |r| {
                let (ab, ce) = unpair_u64(r);
                let (a, b) = unpair_u64(ab);
                let (c, e) = unpair_u64(ce);
                Some(pair4(&nat(a), &nat(b), &nat(c), &nat(e)))
            },
        );
        let gt = relation_enumerator(
            |code| {
                let (a, b, c, e) = split4(code);
                match dyadic_bound(&c, &e) {
                    Some(bound) => int_delta(&a, &b) > bound,
                    None => false,
                }
            },
            |r| {
                let (ab, ce) = unpair_u64(r);
                let (a, b) = unpair_u64(ab);
                let (c, e) = unpair_u64(ce);
                Some(pair4(&nat(a), &nat(b), &nat(c), &nat(e)))
            },
        );
        QuasiMetricDescriptor::new(registry, lt)
            .with_gt(gt)
            .with_exact_delta(int_delta)
    }

    fn int_space(q: &QuasiMetricDescriptor) -> SpaceDescriptor {
        let registry = q.registry.clone();
        let row_reg = registry.clone();
        let domain_reg = registry.clone();
        let points = Numbering::new(
            Enumerator::from_fn(move |k| (k < domain_reg.len() as u64).then(|| nat(k))),
            {
                let registry = registry.clone();
                let q = q.clone();
                move |i, _| {
                    PointOutcome::Confirmed(PointHandle::new(project_left(&q, &registry.w_set(i))))
                }
            },
        );
        let row_q = q.clone();
        induced_space(q, move |i| project_left(&row_q, &row_reg.w_set(i)), points)
    }

    fn register_int_point(q: &QuasiMetricDescriptor, v: i64) -> Nat {
        let point = base_to_c(q, &int_code(v));
        q.registry
            .derive_enumerator(
                DerivedKey::new("int-test-point", vec![q.id.clone(), int_code(v)]),
                move || point.observations.clone(),
            )
            .as_nat()
    }

    #[test]
    fn strong_inclusion_probe_matches_gap_semantics() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let incl = q.strong_incl();
        // Same center, shrinking radius.
        let small = pair(&int_code(5), &nat(3));
        let big = pair(&int_code(5), &nat(0));
        assert!(incl
            .semi_contains(&pair(&small, &big), Fuel(1_000))
            .is_confirmed());
        assert!(!incl
            .semi_contains(&pair(&big, &small), Fuel(1_000))
            .is_confirmed());
        // δ(β_3, β_5) = 0, so ⟨5-ball, 3⟩ ≺ ⟨3-ball, 0⟩.
        let below = pair(&int_code(5), &nat(3));
        let above = pair(&int_code(3), &nat(0));
        assert!(incl
            .semi_contains(&pair(&below, &above), Fuel(1_000))
            .is_confirmed());
        // δ(β_5, β_3) = 2: never below a unit ball around 5.
        let fact = pair(&pair(&int_code(3), &nat(3)), &pair(&int_code(5), &nat(0)));
        assert!(!incl.semi_contains(&fact, Fuel(10_000)).is_confirmed());
    }

    #[test]
    fn strong_inclusion_sweep_is_sound_for_the_oracle() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let incl = q.strong_incl();
        let mut emitted = 0;
        for t in 0..60_000u64 {
            let Some(code) = incl.step(t) else { continue };
            emitted += 1;
            let (small, big) = unpair(&code);
            let (i, m) = unpair(&small);
            let (j, n) = unpair(&big);
            let (m, n) = (to_u64(&m).unwrap(), to_u64(&n).unwrap());
            let lhs = &int_delta(&j, &i) + &Dyadic::pow2(-(m as i64));
            assert!(lhs < Dyadic::pow2(-(n as i64)), "unsound emission {code}");
        }
        assert!(emitted > 0, "sweep never emits");
    }

    #[test]
    fn conjugation_is_an_involution_on_memberships() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let back = conjugate(&conjugate(&q));
        for (a, b, c, e) in [(3i64, 5i64, 1u64, 0u64), (5, 3, 1, 0), (5, 3, 3, 0), (0, 0, 1, 4)] {
            let tuple = pair4(&int_code(a), &int_code(b), &nat(c), &nat(e));
            assert_eq!(
                q.lt.semi_contains(&tuple, Fuel(100)).is_confirmed(),
                back.lt.semi_contains(&tuple, Fuel(100)).is_confirmed(),
                "tuple ({a},{b},{c},{e})"
            );
        }
        // Conjugate swaps the argument order: δ^c(5,3) = δ(3,5) = 0 < 1.
        let conj = conjugate(&q);
        let swapped = pair4(&int_code(5), &int_code(3), &nat(1), &nat(0));
        assert!(conj.lt.semi_contains(&swapped, Fuel(100)).is_confirmed());
    }

    #[test]
    fn symmetrization_needs_both_sides() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        // δ*(x, x) = 0 < any positive bound.
        let out = sym_lt(&q, &int_code(7), &int_code(7), &nat(1), &nat(5), Fuel(200));
        assert!(out.is_confirmed());
        // δ*(3, 5) = 2: below 4, never below 1.
        assert!(sym_lt(&q, &int_code(3), &int_code(5), &nat(4), &nat(0), Fuel(200)).is_confirmed());
        assert!(!sym_lt(&q, &int_code(3), &int_code(5), &nat(1), &nat(0), Fuel(5_000)).is_confirmed());
    }

    #[test]
    fn base_points_inhabit_their_own_balls() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let p = base_to_c(&q, &int_code(5));
        let wc = c_to_wc(&q, &p);
        // In its own ball at any radius.
        for e in [0u64, 3, 7] {
            let ball = pair(&int_code(5), &nat(e));
            assert!(
                ball_member(&wc, &ball, Fuel(50_000)).is_confirmed(),
                "own ball radius 2^-{e}"
            );
        }
        // ball(7, 1/2): δ(7, 5) = 2, never a member.
        let far = pair(&int_code(7), &nat(1));
        assert!(!ball_member(&wc, &far, Fuel(50_000)).is_confirmed());
        // ball(3, 1): δ(3, 5) = 0, member.
        let below = pair(&int_code(3), &nat(0));
        assert!(ball_member(&wc, &below, Fuel(50_000)).is_confirmed());
    }

    #[test]
    fn limit_passing_recovers_the_chain_target() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        // Normed chain: constant center 0, radius 2^{-k}.
        let f = reg.register_total(|k| pair(&int_code(0), k));
        let wc = limit_pass_wc(&q, f);
        // δ(β_{-3}, 0) = 0: in the limit's balls.
        let hit = pair(&int_code(-3), &nat(5));
        assert!(ball_member(&wc, &hit, Fuel(200_000)).is_confirmed());
        // δ(β_1, 0) = 1: never.
        let miss = pair(&int_code(1), &nat(0));
        assert!(!ball_member(&wc, &miss, Fuel(200_000)).is_confirmed());
    }

    #[test]
    fn bi_limit_passing_builds_a_computable_point() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let f_tau = reg.register_total(|k| pair(&int_code(2), k));
        let f_sigma = reg.register_total(|k| pair(&int_code(2), k));
        let p = bi_limit_pass_c(&q, f_tau, f_sigma);
        // Observation ⟨2, 2, e⟩: both sides at the point itself.
        let obs = pair3(&int_code(2), &int_code(2), &nat(3));
        assert!(p
            .observations
            .semi_contains(&obs, Fuel(400_000))
            .is_confirmed());
    }

    #[test]
    fn regularity_witnesses_cover_and_stay_disjoint() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let space = int_space(&q);
        let point3 = register_int_point(&q, 3);
        // Ball(1, 1): the up-set {y ≥ 1}; 3 belongs.
        let ball = pair(&int_code(1), &nat(0));
        let s_out = regularity_s(&q, &space, &point3, &ball, Fuel(300_000));
        let s_ball = s_out.value().expect("s witness").clone();
        let (b_refined, n_refined) = unpair(&s_ball);
        // Sound: point inside, refinement strict.
        assert!(space
            .strong_incl
            .semi_contains(&pair(&s_ball, &ball), Fuel(1_000))
            .is_confirmed());
        assert!(space.member(&point3, &s_ball, Fuel(50_000)).is_confirmed());

        // t covers the complement {y ≤ 0} by conjugate balls.
        let t_set = regularity_t(&q, &s_ball).unwrap();
        let conj = conjugate(&q);
        let conj_reg = reg.clone();
        let conj_q = conj.clone();
        let sigma = induced_space(&conj, move |i| project_right(&conj_q, &conj_reg.w_set(i)), {
            let reg = reg.clone();
            let dom = reg.clone();
            let q2 = conj.clone();
            Numbering::new(
                Enumerator::from_fn(move |k| (k < dom.len() as u64).then(|| nat(k))),
                move |i, _| {
                    PointOutcome::Confirmed(PointHandle::new(project_right(&q2, &reg.w_set(i))))
                },
            )
        });
        for v in [0i64, -1, -4] {
            let z = register_int_point(&q, v);
            let hit = sigma.lacombe_member(&t_set, &z, Fuel(300_000));
            assert!(hit.is_confirmed(), "complement point {v} uncovered");
        }
        // Exact disjointness of every early emission from the s-ball.
        let b_val = int_value(&b_refined);
        let n_exp = to_u64(&n_refined).unwrap();
        let mut emissions = 0;
        for k in 0..30_000u64 {
            let Some(code) = t_set.index_set.step(k) else {
                continue;
            };
            emissions += 1;
            let (v, c) = unpair(&code);
            // s-ball = {y : δ(b', y) < 2^{-n'}} = {y ≥ b'} for n' ≥ 1;
            // t-ball = {y : δ(y, v) < 2^{-c}} = {y ≤ v}: disjoint iff v < b'.
            assert!(n_exp >= 1);
            assert!(to_u64(&c).unwrap() >= 1);
            assert!(int_value(&v) < b_val, "emission {code} overlaps the s-ball");
        }
        assert!(emissions > 0, "t-cover never emits");
    }

    #[test]
    fn refine_toward_lands_inside() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let y = base_to_c(&q, &int_code(5));
        let ball = pair(&int_code(3), &nat(0));
        let out = refine_toward(&q, &y, &ball, Fuel(300_000));
        let cand = out.value().expect("refinement").clone();
        assert!(q
            .strong_incl()
            .semi_contains(&pair(&cand, &ball), Fuel(1_000))
            .is_confirmed());
        let (u, _e) = unpair(&cand);
        // The refined center must sit at 5 or below (δ(u, 5) = 0).
        assert!(int_value(&u) <= BigInt::from(5));
        assert_eq!(
            refine_toward(&q, &y, &ball, Fuel::ZERO),
            Outcome::exhausted(0)
        );
    }

    #[test]
    fn axiom_and_trichotomy_checks_pass() {
        let reg = FnRegistry::new();
        let q = int_qm(&reg);
        let triples: Vec<(Nat, Nat, Nat)> = (0..20)
            .map(|k| (int_code(k - 10), int_code(2 * k - 20), int_code(5 - k)))
            .collect();
        for r in check_axioms(&q, "int", &triples).unwrap() {
            assert_eq!(r.status, crate::report::Status::Pass, "{}", r.name);
        }
        let tuples: Vec<Nat> = (0..40u64)
            .map(|r| {
                let (ab, ce) = unpair_u64(r);
                let (a, b) = unpair_u64(ab);
                let (c, e) = unpair_u64(ce);
                pair4(&nat(a), &nat(b), &nat(c), &nat(e))
            })
            .collect();
        for r in check_trichotomy(&q, "int", &tuples, Fuel(100)) {
            assert_eq!(r.status, crate::report::Status::Pass, "{}", r.name);
        }
    }
}
