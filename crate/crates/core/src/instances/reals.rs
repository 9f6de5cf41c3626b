//! Computable reals under the upper and lower quasi-metrics, with the
//! dyadic rationals as dense base and exact interval oracles.
//!
//! Base codes decode through `(a - b)·2^{c - e}`; the upper metric is
//! `δ_U(y, z) = -min{z - y, 0}` and the lower one `δ_L(y, z) = max{z - y, 0}`,
//! each the conjugate of the other. Upper balls are the open rays
//! `(β_i - 2^{-m}, ∞)`, lower balls `(-∞, β_i + 2^{-m})`; their join is the
//! Euclidean interval topology.
//!
//! Points are registered observation sets `⟨a, b, e⟩` for the upper metric:
//! `β_a < y + 2^{-e}` and `y < β_b + 2^{-e}`. Everything is produced from
//! exact dyadic brackets; no floating point exists anywhere in the path.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};

use crate::kernel::nat::{to_u64, unpair_u64};
use crate::kernel::{
    dyadic_decode, dyadic_encode, dyadic_rank, nat, pair, pair3, split3, unpair, Code, DerivedKey,
    Dyadic, Enumerator, FnRegistry, Fuel, Nat, Outcome,
};
use crate::numbering::{Numbering, PointHandle, PointOutcome};
use crate::quasimetric::{
    c_equality, conjugate, induced_space, project_left, project_right, relation_enumerator,
    CPoint, QuasiMetricDescriptor,
};
use crate::space::{BiSpaceDescriptor, CrossOracle, SpaceDescriptor, SpaceOracle};

/// δ_U on dyadic values: `max{y - z, 0}`.
pub fn delta_upper(y: &Dyadic, z: &Dyadic) -> Dyadic {
    (y - z).max(Dyadic::zero())
}

/// δ_L on dyadic values: `max{z - y, 0}`.
pub fn delta_lower(y: &Dyadic, z: &Dyadic) -> Dyadic {
    (z - y).max(Dyadic::zero())
}

/// Fair base-code sweep: canonical codes of small dyadics first, raw codes
/// interleaved for completeness over non-canonical codes.
fn base_rank(r: u64) -> Nat {
    if r % 2 == 0 {
        dyadic_encode(&dyadic_rank(r / 2))
    } else {
        nat((r - 1) / 2)
    }
}

fn rank_tuple4(r: u64) -> Option<Nat> {
    let (ab, ce) = unpair_u64(r);
    let (ar, br) = unpair_u64(ab);
    let (c, e) = unpair_u64(ce);
    Some(crate::kernel::pair4(
        &base_rank(ar),
        &base_rank(br),
        &nat(c),
        &nat(e),
    ))
}

fn tuple_bound(c: &Nat, e: &Nat) -> Option<Dyadic> {
    let e = to_u64(e)?;
    Some(Dyadic::new(
        BigInt::from(c.clone()),
        BigInt::from(-(e as i64)),
    ))
}

/// Shared table of exact point values, filled by the constructors. Values
/// are rationals so that non-dyadic targets can be tracked exactly too.
#[derive(Default)]
pub struct ValueTable {
    known: RwLock<BTreeMap<Nat, BigRational>>,
}

impl ValueTable {
    fn record(&self, index: Nat, value: BigRational) {
        self.known
            .write()
            .expect("value table poisoned")
            .entry(index)
            .or_insert(value);
    }

    pub fn value(&self, index: &Nat) -> Option<BigRational> {
        self.known
            .read()
            .expect("value table poisoned")
            .get(index)
            .cloned()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Upper,
    Lower,
}

/// Exact interval oracle for one of the two ray topologies.
struct RayOracle {
    side: Side,
    values: Arc<ValueTable>,
    instance: std::sync::Weak<RealsInner>,
}

impl RayOracle {
    /// The finite endpoint of a ball code's ray.
    fn endpoint(&self, ball: &Nat) -> Option<Dyadic> {
        let (i, m) = unpair(ball);
        let m = to_u64(&m)?;
        let center = dyadic_decode(&i);
        let radius = Dyadic::pow2(-(m as i64));
        Some(match self.side {
            Side::Upper => &center - &radius,
            Side::Lower => &center + &radius,
        })
    }
}

fn rational(d: &Dyadic) -> BigRational {
    d.to_rational().expect("desk-scale dyadic")
}

impl SpaceOracle for RayOracle {
    fn point_in(&self, point: &Nat, basic: &Nat) -> Option<bool> {
        let v = self.values.value(point)?;
        let end = rational(&self.endpoint(basic)?);
        Some(match self.side {
            Side::Upper => v > end,
            Side::Lower => v < end,
        })
    }

    fn subset(&self, m: &Nat, n: &Nat) -> bool {
        match (self.endpoint(m), self.endpoint(n)) {
            (Some(a), Some(b)) => match self.side {
                Side::Upper => a >= b,
                Side::Lower => a <= b,
            },
            _ => false,
        }
    }

    fn complement_samples(&self, basic: &Nat, count: usize, seed: u64) -> Vec<Nat> {
        let Some(end) = self.endpoint(basic) else {
            return Vec::new();
        };
        let Some(instance) = self.instance.upgrade() else {
            return Vec::new();
        };
        // The complement of an open ray is the closed opposite ray; its
        // boundary point is dyadic and always sampled first.
        let mut picks = vec![end.clone()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        while picks.len() < count {
            let offset_exp: i64 = rng.random_range(-6..6);
            let step = Dyadic::pow2(offset_exp);
            let last = &picks[picks.len() - 1];
            let next = match self.side {
                Side::Upper => last - &step,
                Side::Lower => last + &step,
            };
            picks.push(next);
        }
        picks
            .into_iter()
            .take(count)
            .map(|d| instance.dyadic_point(&d))
            .collect()
    }

    fn describe_basic(&self, code: &Nat) -> String {
        match self.endpoint(code) {
            Some(end) => match self.side {
                Side::Upper => format!("({end}, inf)"),
                Side::Lower => format!("(-inf, {end})"),
            },
            None => format!("B_{code}"),
        }
    }

    fn describe_point(&self, index: &Nat) -> String {
        match self.values.value(index) {
            Some(v) => format!("x_{index}={v}"),
            None => format!("x_{index}"),
        }
    }
}

/// Cross-topology disjointness: `(a, ∞) ∩ (-∞, b) = ∅` iff `b ≤ a`.
struct RayCross {
    tau_side: Side,
    values: Arc<ValueTable>,
}

impl CrossOracle for RayCross {
    fn disjoint(&self, tau_basic: &Nat, sigma_basic: &Nat) -> bool {
        let tau = RayOracle {
            side: self.tau_side,
            values: self.values.clone(),
            instance: std::sync::Weak::new(),
        };
        let sigma = RayOracle {
            side: match self.tau_side {
                Side::Upper => Side::Lower,
                Side::Lower => Side::Upper,
            },
            values: self.values.clone(),
            instance: std::sync::Weak::new(),
        };
        match (tau.endpoint(tau_basic), sigma.endpoint(sigma_basic)) {
            (Some(a), Some(b)) => match self.tau_side {
                Side::Upper => b <= a,
                Side::Lower => a <= b,
            },
            _ => false,
        }
    }
}

pub type BracketFn = dyn Fn(u64) -> Option<(Dyadic, Dyadic)> + Send + Sync;

/// Observation set of a bracketed real for the upper metric: `⟨a, b, e⟩`
/// is emitted once some bracket stage certifies both one-sided facts.
fn bracket_observations(bracket: Arc<BracketFn>) -> Enumerator {
    #[derive(PartialEq)]
    enum Stage {
        Certified,
        NotYet,
        /// Ruled out under the monotone-bracket assertion: the certificate
        /// compares against the side of the bracket that can only move
        /// further away.
        Never,
    }
    let check = {
        let bracket = bracket.clone();
        move |a: &Nat, b: &Nat, e: &Nat, stage: u64| -> Stage {
            let Some((lo, hi)) = bracket(stage) else {
                return Stage::NotYet;
            };
            let Some(e) = to_u64(e) else {
                return Stage::Never;
            };
            let eps = Dyadic::pow2(-(e as i64));
            // β_a < y + ε certified by β_a - lo < ε; y < β_b + ε by hi < β_b + ε.
            let beta_a = dyadic_decode(a);
            let beta_b = dyadic_decode(b);
            if &(&beta_a - &lo) < &eps && &(&hi - &beta_b) < &eps {
                return Stage::Certified;
            }
            // lo only rises and hi only falls, so y stays within [lo, hi]:
            // once β_a - hi ≥ ε or lo - β_b ≥ ε no later stage can certify.
            if &(&beta_a - &hi) >= &eps || &(&lo - &beta_b) >= &eps {
                Stage::Never
            } else {
                Stage::NotYet
            }
        }
    };
    let sweep_check = check.clone();
    let sweep = Enumerator::from_fn(move |t| {
        let (q, stage) = unpair_u64(t);
        let (abr, e) = unpair_u64(q);
        let (ar, br) = unpair_u64(abr);
        let (a, b, e) = (base_rank(ar), base_rank(br), nat(e));
        (sweep_check(&a, &b, &e, stage) == Stage::Certified).then(|| pair3(&a, &b, &e))
    });
    sweep.with_probe(move |code, fuel| {
        let (a, b, e) = split3(code);
        let depth = (fuel.ticks() / 4).clamp(1, 4_096);
        for stage in 0..depth {
            match check(&a, &b, &e, stage) {
                Stage::Certified => return Outcome::confirmed(code.clone(), nat(stage)),
                Stage::Never => return Outcome::exhausted(stage + 1),
                Stage::NotYet => {}
            }
        }
        Outcome::exhausted(depth)
    })
}

struct RealsInner {
    registry: FnRegistry,
    values: Arc<ValueTable>,
    upper_id: Nat,
    brackets: RwLock<BTreeMap<Nat, Arc<BracketFn>>>,
}

impl RealsInner {
    /// Register (memoized) the computable point sitting on a dyadic value
    /// and record its exact value for the oracle.
    fn dyadic_point(&self, d: &Dyadic) -> Nat {
        let key = DerivedKey::new("dyadic-point", vec![self.upper_id.clone(), dyadic_encode(d)]);
        let constant = d.clone();
        let bracket: Arc<BracketFn> =
            Arc::new(move |_| Some((constant.clone(), constant.clone())));
        let obs_bracket = bracket.clone();
        let code = self
            .registry
            .derive_enumerator(key, move || bracket_observations(obs_bracket));
        self.values.record(code.as_nat(), rational(d));
        self.record_bracket(code.as_nat(), bracket);
        code.as_nat()
    }

    fn record_bracket(&self, index: Nat, bracket: Arc<BracketFn>) {
        self.brackets
            .write()
            .expect("bracket table poisoned")
            .entry(index)
            .or_insert(bracket);
    }

    fn bracket_of(&self, index: &Nat) -> Option<Arc<BracketFn>> {
        self.brackets
            .read()
            .expect("bracket table poisoned")
            .get(index)
            .cloned()
    }
}

/// The computable reals instance: both quasi-metric descriptors, the
/// bi-space `(ℝ_c, 𝒰, ℒ)`, the wc-spaces of each one-sided topology, the
/// dense-base selector, and the exact value oracle.
pub struct RealInstance {
    pub registry: FnRegistry,
    pub upper: QuasiMetricDescriptor,
    pub lower: QuasiMetricDescriptor,
    pub bispace: BiSpaceDescriptor,
    pub wc_upper: SpaceDescriptor,
    pub wc_lower: SpaceDescriptor,
    /// Dense-base selector: rank ↦ point index of the corresponding dyadic.
    pub dense_selector: Code,
    pub values: Arc<ValueTable>,
    inner: Arc<RealsInner>,
}

/// Build the fully oracled instance over a fresh or shared registry.
pub fn make_reals(registry: &FnRegistry) -> RealInstance {
    let delta_u = |a: &Nat, b: &Nat| delta_upper(&dyadic_decode(a), &dyadic_decode(b));
    let lt = relation_enumerator(
        move |code| {
            let (a, b, c, e) = crate::kernel::split4(code);
            match tuple_bound(&c, &e) {
                Some(bound) => delta_u(&a, &b) < bound,
                None => false,
            }
        },
        rank_tuple4,
    );
    let gt = relation_enumerator(
        move |code| {
            let (a, b, c, e) = crate::kernel::split4(code);
            match tuple_bound(&c, &e) {
                Some(bound) => delta_u(&a, &b) > bound,
                None => false,
            }
        },
        rank_tuple4,
    );
    let upper = QuasiMetricDescriptor::new(registry, lt)
        .with_gt(gt)
        .with_exact_delta(delta_u)
        .with_base_rank(base_rank);
    let lower = conjugate(&upper)
        .with_exact_delta(|a, b| delta_lower(&dyadic_decode(a), &dyadic_decode(b)));

    let values = Arc::new(ValueTable::default());
    let inner = Arc::new(RealsInner {
        registry: registry.clone(),
        values: values.clone(),
        upper_id: upper.id.clone(),
        brackets: RwLock::new(BTreeMap::new()),
    });

    let eq = c_equality(&upper);
    let points = {
        let reg = registry.clone();
        let dom = registry.clone();
        Numbering::new(
            Enumerator::from_fn(move |k| (k < dom.len() as u64).then(|| nat(k))),
            move |i, _| PointOutcome::Confirmed(PointHandle::new(reg.w_set(i))),
        )
        .with_equality(eq)
    };

    let tau_rows = registry.clone();
    let tau_q = upper.clone();
    let tau = induced_space(
        &upper,
        move |i| project_left(&tau_q, &tau_rows.w_set(i)),
        points.clone(),
    )
    .with_oracle(Arc::new(RayOracle {
        side: Side::Upper,
        values: values.clone(),
        instance: Arc::downgrade(&inner),
    }));

    let sigma_rows = registry.clone();
    let sigma_q = upper.clone();
    let sigma = induced_space(
        &lower,
        move |i| project_right(&sigma_q, &sigma_rows.w_set(i)),
        points.clone(),
    )
    .with_oracle(Arc::new(RayOracle {
        side: Side::Lower,
        values: values.clone(),
        instance: Arc::downgrade(&inner),
    }));

    let bi_pt = crate::quasimetric::bi_limit_pass_c_code(&upper);
    let bispace = BiSpaceDescriptor::new(tau, sigma)
        .with_bi_pt(bi_pt)
        .with_cross(Arc::new(RayCross {
            tau_side: Side::Upper,
            values: values.clone(),
        }));

    // One-sided wc-point spaces, each with its own limit passing.
    let wc_points = |metric: &QuasiMetricDescriptor| {
        let reg = registry.clone();
        let dom = registry.clone();
        Numbering::new(
            Enumerator::from_fn(move |k| (k < dom.len() as u64).then(|| nat(k))),
            move |i, _| PointOutcome::Confirmed(PointHandle::new(reg.w_set(i)))
        )
        .with_equality(c_equality(metric))
    };
    let wc_u_rows = registry.clone();
    let wc_upper = induced_space(&upper, move |i| wc_u_rows.w_set(i), wc_points(&upper))
        .with_pt(crate::quasimetric::limit_pass_wc_code(&upper))
        .with_oracle(Arc::new(RayOracle {
            side: Side::Upper,
            values: values.clone(),
            instance: Arc::downgrade(&inner),
        }));
    let wc_l_rows = registry.clone();
    let wc_lower = induced_space(&lower, move |i| wc_l_rows.w_set(i), wc_points(&lower))
        .with_pt(crate::quasimetric::limit_pass_wc_code(&lower))
        .with_oracle(Arc::new(RayOracle {
            side: Side::Lower,
            values: values.clone(),
            instance: Arc::downgrade(&inner),
        }));

    let selector_inner = inner.clone();
    let dense_selector = registry.derive(
        DerivedKey::new("dense-selector", vec![upper.id.clone()]),
        move || {
            let inner = selector_inner.clone();
            Arc::new(move |rank: &Nat, _| {
                let Some(r) = to_u64(rank) else {
                    return Outcome::exhausted(0);
                };
                let idx = inner.dyadic_point(&dyadic_rank(r));
                Outcome::confirmed(idx, Nat::from(0u32))
            })
        },
    );

    RealInstance {
        registry: registry.clone(),
        upper,
        lower,
        bispace,
        wc_upper,
        wc_lower,
        dense_selector,
        values,
        inner,
    }
}

impl RealInstance {
    /// Point index of an exact dyadic value, registered and recorded.
    pub fn dyadic_point(&self, d: &Dyadic) -> Nat {
        self.inner.dyadic_point(d)
    }

    /// Register a computable real from caller-supplied bracket sequences:
    /// `lower` must be monotone, `upper` antitone, both converging on a
    /// common value (asserted by the caller, spot-checked later). An exact
    /// value may be recorded for the oracle.
    pub fn make_creal(
        &self,
        lower: Code,
        upper: Code,
        exact_value: Option<BigRational>,
    ) -> Nat {
        let key = DerivedKey::new(
            "creal",
            vec![self.upper.id.clone(), lower.as_nat(), upper.as_nat()],
        );
        let registry = self.registry.clone();
        let bracket: Arc<BracketFn> = Arc::new(move |stage| {
            let lo = registry
                .apply(lower, &nat(stage), Fuel(4_096))
                .ok()?
                .into_value()?;
            let hi = registry
                .apply(upper, &nat(stage), Fuel(4_096))
                .ok()?
                .into_value()?;
            Some((dyadic_decode(&lo), dyadic_decode(&hi)))
        });
        let obs_bracket = bracket.clone();
        let code = self
            .registry
            .derive_enumerator(key, move || bracket_observations(obs_bracket));
        if let Some(v) = exact_value {
            self.values.record(code.as_nat(), v);
        }
        self.inner.record_bracket(code.as_nat(), bracket.clone());
        code.as_nat()
    }

    /// The bracket backing a constructor-registered point, if any.
    pub fn bracket_of(&self, index: &Nat) -> Option<Arc<BracketFn>> {
        self.inner.bracket_of(index)
    }

    /// Register the image of a bracketed point under an exact nondecreasing
    /// dyadic map; the derived point is memoized on `(tag, index)` and its
    /// exact value recorded when the source's is known.
    pub fn map_point(
        &self,
        tag: &'static str,
        tag_params: &[Nat],
        index: &Nat,
        map: Arc<dyn Fn(&Dyadic) -> Dyadic + Send + Sync>,
        map_rational: Arc<dyn Fn(&BigRational) -> BigRational + Send + Sync>,
    ) -> Option<Nat> {
        let source = self.inner.bracket_of(index)?;
        let mapped: Arc<BracketFn> = {
            let map = map.clone();
            Arc::new(move |stage| {
                let (lo, hi) = source(stage)?;
                Some((map(&lo), map(&hi)))
            })
        };
        let mut params = vec![self.upper.id.clone(), index.clone()];
        params.extend_from_slice(tag_params);
        let key = DerivedKey::new(tag, params);
        let obs_bracket = mapped.clone();
        let code = self
            .registry
            .derive_enumerator(key, move || bracket_observations(obs_bracket));
        self.inner.record_bracket(code.as_nat(), mapped);
        if let Some(v) = self.values.value(index) {
            self.values.record(code.as_nat(), map_rational(&v));
        }
        Some(code.as_nat())
    }

    /// The c-point view of a registered index.
    pub fn c_point(&self, index: &Nat) -> CPoint {
        CPoint::from_closed(self.registry.w_set(index))
    }

    /// Upper-topology ball code `(left, ∞)` with radius `2^{-m}`.
    pub fn upper_ball(&self, left_end: &Dyadic, m: u64) -> Nat {
        let center = left_end + &Dyadic::pow2(-(m as i64));
        pair(&dyadic_encode(&center), &nat(m))
    }

    /// Lower-topology ball code `(-∞, right)` with radius `2^{-m}`.
    pub fn lower_ball(&self, right_end: &Dyadic, m: u64) -> Nat {
        let center = right_end - &Dyadic::pow2(-(m as i64));
        pair(&dyadic_encode(&center), &nat(m))
    }

    /// Exact left end of an upper ball code.
    pub fn upper_left_end(&self, ball: &Nat) -> Option<Dyadic> {
        let (i, m) = unpair(ball);
        let m = to_u64(&m)?;
        Some(&dyadic_decode(&i) - &Dyadic::pow2(-(m as i64)))
    }

    /// Exact right end of a lower ball code.
    pub fn lower_right_end(&self, ball: &Nat) -> Option<Dyadic> {
        let (i, m) = unpair(ball);
        let m = to_u64(&m)?;
        Some(&dyadic_decode(&i) + &Dyadic::pow2(-(m as i64)))
    }

    /// Exact membership of a tracked point in an upper/lower ball.
    pub fn oracle_in_upper(&self, point: &Nat, ball: &Nat) -> Option<bool> {
        let v = self.values.value(point)?;
        Some(v > rational(&self.upper_left_end(ball)?))
    }

    pub fn oracle_in_lower(&self, point: &Nat, ball: &Nat) -> Option<bool> {
        let v = self.values.value(point)?;
        Some(v < rational(&self.lower_right_end(ball)?))
    }
}
