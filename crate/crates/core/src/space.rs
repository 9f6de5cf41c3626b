//! Effective topological spaces: total basis numberings, computably
//! enumerable strong inclusion and point membership, strong-basis search,
//! normed enumerations with limit passing, bi-topological joins, and the
//! effective pairwise-regularity checker.
//!
//! All positive answers are c.e.-level: searches over the membership and
//! strong-inclusion enumerators. Negative facts (non-membership,
//! non-inclusion, disjointness) come only from the exact instance oracles
//! attached to concrete spaces, never from exhausted searches.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::kernel::scan::{scan_candidates, Probe};
use crate::kernel::{
    nat, pair, pair3, unpair, Code, DerivedKey, Enumerator, FnRegistry, Fuel, KernelError, Nat,
    Outcome,
};
use crate::numbering::{lacombe_member_with, product_numbering, LacombeSet, Numbering};
use crate::report::{CheckRecord, Status};

/// Exact answers about one space, supplied by instances. The oracle is the
/// trusted base for tests and checkers; production search paths stay
/// c.e.-level.
pub trait SpaceOracle: Send + Sync {
    /// Exact point-in-basic-set membership; `None` when the point's value is
    /// not known to the oracle.
    fn point_in(&self, point: &Nat, basic: &Nat) -> Option<bool>;
    /// Exact set inclusion between basic opens.
    fn subset(&self, m: &Nat, n: &Nat) -> bool;
    /// Exact point indices sampled from the complement of a basic open,
    /// including boundary-adjacent picks. May register fresh points.
    fn complement_samples(&self, basic: &Nat, count: usize, seed: u64) -> Vec<Nat>;
    fn describe_basic(&self, code: &Nat) -> String {
        format!("B_{code}")
    }
    fn describe_point(&self, index: &Nat) -> String {
        format!("x_{index}")
    }
}

/// Exact disjointness facts across the two topologies of a bi-space.
pub trait CrossOracle: Send + Sync {
    /// `B^τ_m ∩ B^σ_n = ∅`, exactly.
    fn disjoint(&self, tau_basic: &Nat, sigma_basic: &Nat) -> bool;
}

struct FlippedCross(Arc<dyn CrossOracle>);

impl CrossOracle for FlippedCross {
    fn disjoint(&self, tau_basic: &Nat, sigma_basic: &Nat) -> bool {
        self.0.disjoint(sigma_basic, tau_basic)
    }
}

static NEXT_SPACE_ID: AtomicU64 = AtomicU64::new(0);

fn fresh_space_id() -> Nat {
    nat(NEXT_SPACE_ID.fetch_add(1, Ordering::Relaxed))
}

type RowFn = dyn Fn(&Nat) -> Enumerator + Send + Sync;
type RankFn = dyn Fn(u64) -> Nat + Send + Sync;

/// An effective topological space presented at index level.
///
/// The basis numbering is total: every natural denotes a basic open.
/// `strong_incl` enumerates pairs `⟨m, n⟩` with `B_m ⊆ B_n` certified by a
/// definite refinement; `membership` enumerates `⟨i, n⟩` with `x_i ∈ B_n`.
#[derive(Clone)]
pub struct SpaceDescriptor {
    pub registry: FnRegistry,
    pub id: Nat,
    pub strong_incl: Enumerator,
    pub membership: Enumerator,
    row: Option<Arc<RowFn>>,
    pub points: Numbering,
    pub sb: Option<Code>,
    pub pt: Option<Code>,
    pub oracle: Option<Arc<dyn SpaceOracle>>,
    pub basis_rank: Arc<RankFn>,
}

impl SpaceDescriptor {
    pub fn new(
        registry: &FnRegistry,
        strong_incl: Enumerator,
        membership: Enumerator,
        points: Numbering,
    ) -> Self {
        SpaceDescriptor {
            registry: registry.clone(),
            id: fresh_space_id(),
            strong_incl,
            membership,
            row: None,
            points,
            sb: None,
            pt: None,
            oracle: None,
            basis_rank: Arc::new(|r| nat(r)),
        }
    }

    /// Build from a per-point row view of the membership relation; the
    /// global enumerator is derived with a row-aware probe.
    pub fn from_rows(
        registry: &FnRegistry,
        strong_incl: Enumerator,
        row: impl Fn(&Nat) -> Enumerator + Send + Sync + 'static,
        points: Numbering,
    ) -> Self {
        let row: Arc<RowFn> = Arc::new(row);
        let fam = row.clone();
        let membership = Enumerator::rows(move |i| fam(&nat(i)));
        let mut space = SpaceDescriptor::new(registry, strong_incl, membership, points);
        space.row = Some(row);
        space
    }

    pub fn with_sb(mut self, sb: Code) -> Self {
        self.sb = Some(sb);
        self
    }

    pub fn with_pt(mut self, pt: Code) -> Self {
        self.pt = Some(pt);
        self
    }

    pub fn with_oracle(mut self, oracle: Arc<dyn SpaceOracle>) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn with_basis_rank(mut self, rank: impl Fn(u64) -> Nat + Send + Sync + 'static) -> Self {
        self.basis_rank = Arc::new(rank);
        self
    }

    /// The membership row of one point: codes of basic opens containing it.
    pub fn row(&self, i: &Nat) -> Enumerator {
        match &self.row {
            Some(row) => row(i),
            None => {
                let i = i.clone();
                self.membership.map(move |code| {
                    let (p, n) = unpair(code);
                    (p == i).then_some(n)
                })
            }
        }
    }

    /// Fuel-bounded membership query `x_i ∈ B_n`.
    pub fn member(&self, i: &Nat, n: &Nat, fuel: Fuel) -> Outcome {
        match &self.row {
            Some(row) => row(i).semi_contains(n, fuel),
            None => self.membership.semi_contains(&pair(i, n), fuel),
        }
    }

    /// Lacombe membership over this space's basis.
    pub fn lacombe_member(&self, set: &LacombeSet, i: &Nat, fuel: Fuel) -> Outcome {
        lacombe_member_with(set, |basic, budget| self.member(i, basic, budget), fuel)
    }

    fn refine(&self, i: &Nat, m: &Nat, n: &Nat, fuel: Fuel) -> Outcome {
        match self.sb {
            Some(sb) => self
                .registry
                .apply(sb, &pair3(i, m, n), fuel)
                .unwrap_or(Outcome::Exhausted { steps_used: 0 }),
            None => sb_search(self, i, m, n, fuel),
        }
    }
}

impl std::fmt::Debug for SpaceDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpaceDescriptor(id {})", self.id)
    }
}

/// Errors from space-level operations.
#[derive(Debug, thiserror::Error)]
pub enum SpaceError {
    #[error("space has no limit-passing transformer")]
    LimitPassingUnavailable,
    #[error("space has no exact oracle")]
    OracleUnavailable,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Search for a common strong refinement: a basic open `a` with
/// `x_i ∈ B_a`, `a ≺ m`, and `a ≺ n`. Candidates come from the point's
/// membership row; refinement facts from the strong-inclusion enumerator.
/// Exhaustion is never a refutation.
pub fn sb_search(space: &SpaceDescriptor, i: &Nat, m: &Nat, n: &Nat, fuel: Fuel) -> Outcome {
    let row = space.row(i);
    let (hit, spent) = scan_candidates(&row, fuel, 8, |a, budget| {
        let half = Fuel(budget.ticks() / 2);
        let below_m = space.strong_incl.semi_contains(&pair(a, m), half);
        let Outcome::Confirmed { .. } = below_m else {
            return Probe::miss(below_m.steps_used());
        };
        if m == n {
            return Probe::hit(a.clone(), 1);
        }
        match space.strong_incl.semi_contains(&pair(a, n), half) {
            Outcome::Confirmed { .. } => Probe::hit(a.clone(), 1),
            Outcome::Exhausted { steps_used } => Probe::miss(steps_used),
        }
    });
    match hit {
        Some(a) => Outcome::confirmed(a, nat(spent)),
        None => Outcome::exhausted(spent),
    }
}

/// A computable enumeration of basis codes, decreasing (non-strictly) under
/// strong inclusion. Stalls repeat the current code.
#[derive(Clone)]
pub struct NormedEnumeration {
    pub f: Code,
    pub space: SpaceDescriptor,
}

impl NormedEnumeration {
    pub fn code_at(&self, k: u64, fuel: Fuel) -> Option<Nat> {
        self.space
            .registry
            .apply(self.f, &nat(k), fuel)
            .ok()?
            .into_value()
    }

    /// Semi-verify the decreasing law on the first `upto` consecutive pairs:
    /// each step is either a repeat or a confirmed strong inclusion.
    pub fn verify_decreasing(&self, upto: u64, fuel: Fuel) -> Result<(), String> {
        let mut prev: Option<Nat> = None;
        for k in 0..=upto {
            let Some(cur) = self.code_at(k, fuel) else {
                prev = None;
                continue;
            };
            if let Some(p) = prev {
                if p != cur {
                    let fact = pair(&cur, &p);
                    if !self
                        .space
                        .strong_incl
                        .semi_contains(&fact, fuel)
                        .is_confirmed()
                    {
                        return Err(format!(
                            "step {k}: ⟨{cur}, {p}⟩ not confirmed by strong inclusion"
                        ));
                    }
                }
            }
            prev = Some(cur);
        }
        Ok(())
    }
}

const CONVERGE_ROW_UNIT: u64 = 64;
const CONVERGE_SB_UNIT: u64 = 512;

/// Effectively enumerate a normed sequence of basic opens converging onto
/// the neighbourhood filter of `x_i`: each emitted code contains the point,
/// and the sequence refines every containing basic open the membership row
/// reaches. When a fuel-bounded refinement step fails the sequence stalls,
/// repeating its current code.
pub fn converge(space: &SpaceDescriptor, i: &Nat) -> NormedEnumeration {
    let key = DerivedKey::new("converge", vec![space.id.clone(), i.clone()]);
    let space_for_f = space.clone();
    let i = i.clone();
    let f = space.registry.derive(key, move || {
        // chain[j] caches the j-th value; entries are write-once and the
        // construction below is deterministic, so caching is transparent.
        let chain: Mutex<Vec<Option<Nat>>> = Mutex::new(Vec::new());
        let space = space_for_f;
        Arc::new(move |arg: &Nat, _fuel: Fuel| {
            let Some(k) = crate::kernel::nat::to_u64(arg) else {
                return Outcome::exhausted(0);
            };
            let mut chain = chain.lock().expect("converge cache poisoned");
            while (chain.len() as u64) <= k {
                let j = chain.len() as u64;
                // Candidate j: the j-th distinct row emission scanned within
                // a window that depends on j alone, keeping every prefix of
                // the chain independent of the query position.
                let row = space.row(&i);
                let mut distinct: Vec<Nat> = Vec::new();
                let mut seen = std::collections::HashSet::new();
                for step in 0..CONVERGE_ROW_UNIT * (j + 1) {
                    if let Some(v) = row.step(step) {
                        if seen.insert(v.clone()) {
                            distinct.push(v);
                        }
                    }
                    if distinct.len() as u64 > j {
                        break;
                    }
                }
                let value = if j == 0 {
                    distinct.first().cloned()
                } else {
                    let prev = chain[(j - 1) as usize].clone();
                    match (prev, distinct.get(j as usize)) {
                        (Some(cur), Some(cand)) => {
                            let budget = Fuel(CONVERGE_SB_UNIT * (j + 1));
                            match space.refine(&i, &cur, cand, budget) {
                                Outcome::Confirmed { value, .. } => Some(value),
                                Outcome::Exhausted { .. } => Some(cur),
                            }
                        }
                        (Some(cur), None) => Some(cur),
                        (None, first) => first.cloned(),
                    }
                };
                chain.push(value);
            }
            match &chain[k as usize] {
                Some(v) => Outcome::confirmed(v.clone(), nat(k)),
                None => Outcome::exhausted(CONVERGE_ROW_UNIT * (k + 1)),
            }
        })
    });
    NormedEnumeration {
        f,
        space: space.clone(),
    }
}

/// Pass from a convergent normed enumeration to an index of its limit
/// point. Garbage in (a non-convergent enumeration) yields an index whose
/// dereference later spot-checks flag; the operation itself stays total.
pub fn limit_pass(
    space: &SpaceDescriptor,
    ne: &NormedEnumeration,
    fuel: Fuel,
) -> Result<Outcome, SpaceError> {
    let pt = space.pt.ok_or(SpaceError::LimitPassingUnavailable)?;
    Ok(space.registry.apply(pt, &ne.f.as_nat(), fuel)?)
}

/// A shared carrier with two topologies. Both descriptors use the same
/// point numbering when that numbering is bi-computable.
#[derive(Clone)]
pub struct BiSpaceDescriptor {
    pub tau: SpaceDescriptor,
    pub sigma: SpaceDescriptor,
    pub bi_pt: Option<Code>,
    pub cross: Option<Arc<dyn CrossOracle>>,
}

impl BiSpaceDescriptor {
    pub fn new(tau: SpaceDescriptor, sigma: SpaceDescriptor) -> Self {
        BiSpaceDescriptor {
            tau,
            sigma,
            bi_pt: None,
            cross: None,
        }
    }

    pub fn with_bi_pt(mut self, pt: Code) -> Self {
        self.bi_pt = Some(pt);
        self
    }

    pub fn with_cross(mut self, cross: Arc<dyn CrossOracle>) -> Self {
        self.cross = Some(cross);
        self
    }

    /// The dual bi-space: topologies swapped, cross facts flipped.
    pub fn dual(&self) -> BiSpaceDescriptor {
        BiSpaceDescriptor {
            tau: self.sigma.clone(),
            sigma: self.tau.clone(),
            bi_pt: self.bi_pt,
            cross: self
                .cross
                .as_ref()
                .map(|c| Arc::new(FlippedCross(c.clone())) as Arc<dyn CrossOracle>),
        }
    }
}

struct JoinOracle {
    tau: Arc<dyn SpaceOracle>,
    sigma: Arc<dyn SpaceOracle>,
}

impl SpaceOracle for JoinOracle {
    fn point_in(&self, point: &Nat, basic: &Nat) -> Option<bool> {
        let (m, n) = unpair(basic);
        match (self.tau.point_in(point, &m), self.sigma.point_in(point, &n)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }

    // Componentwise certification: sound for emitted strong inclusions,
    // not complete for arbitrary intersections.
    fn subset(&self, m: &Nat, n: &Nat) -> bool {
        let (mt, ms) = unpair(m);
        let (nt, ns) = unpair(n);
        self.tau.subset(&mt, &nt) && self.sigma.subset(&ms, &ns)
    }

    fn complement_samples(&self, basic: &Nat, count: usize, seed: u64) -> Vec<Nat> {
        let (m, n) = unpair(basic);
        let mut out = self.tau.complement_samples(&m, count / 2 + 1, seed);
        out.extend(self.sigma.complement_samples(&n, count / 2 + 1, seed ^ 1));
        out.truncate(count);
        out
    }

    fn describe_basic(&self, code: &Nat) -> String {
        let (m, n) = unpair(code);
        format!(
            "{} ∩ {}",
            self.tau.describe_basic(&m),
            self.sigma.describe_basic(&n)
        )
    }

    fn describe_point(&self, index: &Nat) -> String {
        self.tau.describe_point(index)
    }
}

/// The join space: basic opens are pair-codes of componentwise
/// intersections, strong inclusion is the componentwise conjunction, and
/// membership requires both components.
pub fn join_space(bi: &BiSpaceDescriptor) -> SpaceDescriptor {
    let tau = bi.tau.clone();
    let sigma = bi.sigma.clone();

    let incl_tau = tau.strong_incl.clone();
    let incl_sigma = sigma.strong_incl.clone();
    let sweep_tau = incl_tau.clone();
    let sweep_sigma = incl_sigma.clone();
    let strong_incl = Enumerator::from_fn(move |t| {
        let (k1, k2) = crate::kernel::nat::unpair_u64(t);
        let a = sweep_tau.step(k1)?;
        let b = sweep_sigma.step(k2)?;
        let (m, mp) = unpair(&a);
        let (n, np) = unpair(&b);
        Some(pair(&pair(&m, &n), &pair(&mp, &np)))
    })
    .with_probe(move |code, fuel| {
        let (small, big) = unpair(code);
        let (m, n) = unpair(&small);
        let (mp, np) = unpair(&big);
        let half = Fuel(fuel.ticks() / 2);
        match incl_tau.semi_contains(&pair(&m, &mp), half) {
            Outcome::Confirmed { .. } => incl_sigma
                .semi_contains(&pair(&n, &np), half)
                .map_value(|_| code.clone()),
            miss => miss,
        }
    });

    let row_tau = tau.clone();
    let row_sigma = sigma.clone();
    let row = move |i: &Nat| {
        let rt = row_tau.row(i);
        let rs = row_sigma.row(i);
        let sweep_rt = rt.clone();
        let sweep_rs = rs.clone();
        Enumerator::from_fn(move |t| {
            let (k1, k2) = crate::kernel::nat::unpair_u64(t);
            let m = sweep_rt.step(k1)?;
            let n = sweep_rs.step(k2)?;
            Some(pair(&m, &n))
        })
        .with_probe(move |code, fuel| {
            let (m, n) = unpair(code);
            let half = Fuel(fuel.ticks() / 2);
            match rt.semi_contains(&m, half) {
                Outcome::Confirmed { .. } => {
                    rs.semi_contains(&n, half).map_value(|_| code.clone())
                }
                miss => miss,
            }
        })
    };

    let mut joined = SpaceDescriptor::from_rows(
        &tau.registry,
        strong_incl,
        row,
        bi.tau.points.clone(),
    );

    // Effective strong-basis witness, componentwise.
    let sb_tau = tau.clone();
    let sb_sigma = sigma.clone();
    let key = DerivedKey::new("join-sb", vec![tau.id.clone(), sigma.id.clone()]);
    let sb = tau.registry.derive(key, move || {
        Arc::new(move |arg: &Nat, fuel: Fuel| {
            let (i, mn, mpnp) = crate::kernel::split3(arg);
            let (m, n) = unpair(&mn);
            let (mp, np) = unpair(&mpnp);
            let half = Fuel(fuel.ticks() / 2);
            let at = sb_tau.refine(&i, &m, &mp, half);
            let Outcome::Confirmed { value: a_tau, .. } = at else {
                return Outcome::exhausted(at.steps_used());
            };
            let asig = sb_sigma.refine(&i, &n, &np, half);
            match asig {
                Outcome::Confirmed { value: a_sigma, at_step } => Outcome::Confirmed {
                    value: pair(&a_tau, &a_sigma),
                    at_step,
                },
                Outcome::Exhausted { steps_used } => Outcome::exhausted(steps_used),
            }
        })
    });
    joined = joined.with_sb(sb);

    let t_rank = tau.basis_rank.clone();
    let s_rank = sigma.basis_rank.clone();
    joined = joined.with_basis_rank(move |r| {
        let (r1, r2) = crate::kernel::nat::unpair_u64(r);
        pair(&t_rank(r1), &s_rank(r2))
    });

    if let Some(pt) = bi.bi_pt {
        joined = joined.with_pt(pt);
    }
    if let (Some(ot), Some(os)) = (tau.oracle.clone(), sigma.oracle.clone()) {
        joined = joined.with_oracle(Arc::new(JoinOracle {
            tau: ot,
            sigma: os,
        }));
    }
    joined
}

/// Existential projections of a join membership enumerator onto the two
/// component relations.
pub fn split_l(join_l: &Enumerator) -> (Enumerator, Enumerator) {
    let l_tau = join_l.map(|code| {
        let (i, mn) = unpair(code);
        let (m, _) = unpair(&mn);
        Some(pair(&i, &m))
    });
    let l_sigma = join_l.map(|code| {
        let (i, mn) = unpair(code);
        let (_, n) = unpair(&mn);
        Some(pair(&i, &n))
    });
    (l_tau, l_sigma)
}

/// Product of two component membership enumerators into a join membership
/// enumerator: `⟨i, ⟨m, n⟩⟩` appears iff `⟨i, m⟩` and `⟨i, n⟩` do.
pub fn merge_l(l_tau: &Enumerator, l_sigma: &Enumerator) -> Enumerator {
    let sweep_tau = l_tau.clone();
    let sweep_sigma = l_sigma.clone();
    let probe_tau = l_tau.clone();
    let probe_sigma = l_sigma.clone();
    Enumerator::from_fn(move |t| {
        let (k1, k2) = crate::kernel::nat::unpair_u64(t);
        let a = sweep_tau.step(k1)?;
        let b = sweep_sigma.step(k2)?;
        let (i, m) = unpair(&a);
        let (ip, n) = unpair(&b);
        (i == ip).then(|| pair(&i, &pair(&m, &n)))
    })
    .with_probe(move |code, fuel| {
        let (i, mn) = unpair(code);
        let (m, n) = unpair(&mn);
        let half = Fuel(fuel.ticks() / 2);
        match probe_tau.semi_contains(&pair(&i, &m), half) {
            Outcome::Confirmed { .. } => probe_sigma
                .semi_contains(&pair(&i, &n), half)
                .map_value(|_| code.clone()),
            miss => miss,
        }
    })
}

/// A bi-computable numbering assembled from two one-topology computable
/// numberings: the product numbering with lifted membership enumerators.
pub struct StarBicomputable {
    pub points: Numbering,
    pub l_tau: Enumerator,
    pub l_sigma: Enumerator,
}

/// Lift `⟨i, n⟩ ∈ L` to `⟨⟨i, j⟩, n⟩` over all partner indices `j`.
fn lift_first(l: &Enumerator) -> Enumerator {
    let sweep = l.clone();
    let probe = l.clone();
    Enumerator::from_fn(move |t| {
        let (k, j) = crate::kernel::nat::unpair_u64(t);
        let fact = sweep.step(k)?;
        let (i, n) = unpair(&fact);
        Some(pair(&pair(&i, &nat(j)), &n))
    })
    .with_probe(move |code, fuel| {
        let (ij, n) = unpair(code);
        let (i, _) = unpair(&ij);
        probe
            .semi_contains(&pair(&i, &n), fuel)
            .map_value(|_| code.clone())
    })
}

fn lift_second(l: &Enumerator) -> Enumerator {
    let sweep = l.clone();
    let probe = l.clone();
    Enumerator::from_fn(move |t| {
        let (k, i) = crate::kernel::nat::unpair_u64(t);
        let fact = sweep.step(k)?;
        let (j, n) = unpair(&fact);
        Some(pair(&pair(&nat(i), &j), &n))
    })
    .with_probe(move |code, fuel| {
        let (ij, n) = unpair(code);
        let (_, j) = unpair(&ij);
        probe
            .semi_contains(&pair(&j, &n), fuel)
            .map_value(|_| code.clone())
    })
}

/// Assemble the bi-computable product numbering `x^τ ∗ x^σ` with membership
/// enumerators lifted to product indices.
pub fn star_bicomputable(
    x_tau: &Numbering,
    x_sigma: &Numbering,
    l_tau: &Enumerator,
    l_sigma: &Enumerator,
) -> StarBicomputable {
    StarBicomputable {
        points: product_numbering(x_tau, x_sigma),
        l_tau: lift_first(l_tau),
        l_sigma: lift_second(l_sigma),
    }
}

/// Componentwise bi-limit passing: `pt(⟨m₁, m₂⟩) = ⟨pt_τ(m₁), pt_σ(m₂)⟩`.
pub fn bi_limit_pass(registry: &FnRegistry, pt_tau: Code, pt_sigma: Code) -> Code {
    let key = DerivedKey::new("bi-pt", vec![pt_tau.as_nat(), pt_sigma.as_nat()]);
    let reg = registry.clone();
    registry.derive(key, move || {
        let reg = reg.clone();
        Arc::new(move |arg: &Nat, fuel: Fuel| {
            let (m1, m2) = unpair(arg);
            let half = Fuel(fuel.ticks() / 2);
            let first = match reg.apply(pt_tau, &m1, half) {
                Ok(out) => out,
                Err(_) => return Outcome::exhausted(0),
            };
            let Outcome::Confirmed { value: j1, .. } = first else {
                return Outcome::exhausted(first.steps_used());
            };
            let second = match reg.apply(pt_sigma, &m2, half) {
                Ok(out) => out,
                Err(_) => return Outcome::exhausted(0),
            };
            match second {
                Outcome::Confirmed { value: j2, at_step } => Outcome::Confirmed {
                    value: pair(&j1, &j2),
                    at_step,
                },
                Outcome::Exhausted { steps_used } => Outcome::exhausted(steps_used),
            }
        })
    })
}

/// Refute `x_i ≤ x_j` in the specialization preorder by exhibiting a basic
/// open containing `x_i` but (exactly) not `x_j`. Containment is c.e.
/// evidence from the membership row; non-membership comes from the oracle.
pub fn specialization_refute(
    space: &SpaceDescriptor,
    i: &Nat,
    j: &Nat,
    fuel: Fuel,
) -> Result<Outcome, SpaceError> {
    let oracle = space.oracle.clone().ok_or(SpaceError::OracleUnavailable)?;
    let row = space.row(i);
    let j = j.clone();
    let (hit, spent) = scan_candidates(&row, fuel, 4, move |n, _| {
        match oracle.point_in(&j, n) {
            Some(false) => Probe::hit(n.clone(), 1),
            _ => Probe::miss(1),
        }
    });
    Ok(match hit {
        Some(n) => Outcome::confirmed(n, nat(spent)),
        None => Outcome::exhausted(spent),
    })
}

/// Tuning knobs for the effective-regularity checker. All sampling is
/// seeded; a report is reproducible from `(seed, fuel, samples)`.
#[derive(Debug, Clone, Copy)]
pub struct RegularityCfg {
    pub fuel: Fuel,
    pub complement_samples: usize,
    pub seed: u64,
    /// How many emissions of each t-set to scan for exact disjointness.
    pub disjoint_scan: u64,
    /// Per-point budget for the index-level cross search.
    pub cross_budget: Fuel,
    /// Cap on session points visited by the cross search.
    pub cross_points: u64,
}

impl Default for RegularityCfg {
    fn default() -> Self {
        RegularityCfg {
            fuel: Fuel(100_000),
            complement_samples: 20,
            seed: 0,
            disjoint_scan: 2_000,
            cross_budget: Fuel(256),
            cross_points: 512,
        }
    }
}

/// Check the effective-regularity contract of witnesses `(s, t)` on a
/// bi-space, sample by sample. For each queried pair `(i, m)` with
/// `x_i ∈ B^τ_m` the checker validates:
///
/// (a) both witnesses evaluate;
/// (b) `x_i ∈ B^τ_{s(i,m)}` and `s(i,m) ≺ m`, by strong inclusion or oracle;
/// (c) sampled oracle points of the complement of `B^τ_m` are confirmed
///     members of the σ-Lacombe set `t(i,m)`;
/// (d) `B^τ_{s(i,m)}` is disjoint from the t-cover: exact per emitted ball,
///     plus no session point is confirmed in both within budget.
///
/// Any witnessed violation yields a fail record carrying the counterexample.
pub fn check_effective_regularity(
    bi: &BiSpaceDescriptor,
    s: Code,
    t: Code,
    samples: &[(Nat, Nat)],
    cfg: &RegularityCfg,
) -> Vec<CheckRecord> {
    let mut records = Vec::new();
    let fuel = cfg.fuel;
    for (idx, (i, m)) in samples.iter().enumerate() {
        let base = format!("q{idx:03}");
        let query = pair(i, m);

        // (a) witnesses evaluate
        let s_out = bi.tau.registry.apply(s, &query, fuel);
        let t_out = bi.tau.registry.apply(t, &query, fuel);
        let (s_ball, t_index) = match (&s_out, &t_out) {
            (Ok(Outcome::Confirmed { value: sv, .. }), Ok(Outcome::Confirmed { value: tv, .. })) => {
                records.push(CheckRecord::pass(format!("{base}.a-evaluate"), 0));
                (sv.clone(), tv.clone())
            }
            _ => {
                let why = match (&s_out, &t_out) {
                    (Err(e), _) => format!("s failed: {e}"),
                    (_, Err(e)) => format!("t failed: {e}"),
                    (Ok(o), _) if !o.is_confirmed() => "s exhausted".to_string(),
                    _ => "t exhausted".to_string(),
                };
                records.push(CheckRecord {
                    name: format!("{base}.a-evaluate"),
                    status: if s_out.is_err() || t_out.is_err() {
                        Status::Fail
                    } else {
                        Status::Inconclusive
                    },
                    witness: Some(why),
                    fuel_used: fuel.ticks(),
                });
                continue;
            }
        };
        let t_set = LacombeSet::new(bi.tau.registry.w_set(&t_index));
        let describe_tau = |c: &Nat| match &bi.tau.oracle {
            Some(o) => o.describe_basic(c),
            None => format!("B^τ_{c}"),
        };
        let describe_sigma = |c: &Nat| match &bi.sigma.oracle {
            Some(o) => o.describe_basic(c),
            None => format!("B^σ_{c}"),
        };

        // (b) containment and refinement
        let contain = bi.tau.member(i, &s_ball, fuel);
        let contain_ok = contain.is_confirmed()
            || bi
                .tau
                .oracle
                .as_ref()
                .and_then(|o| o.point_in(i, &s_ball))
                .unwrap_or(false);
        let oracle_denies = bi
            .tau
            .oracle
            .as_ref()
            .and_then(|o| o.point_in(i, &s_ball))
            == Some(false);
        let refine_fact = pair(&s_ball, m);
        let refine_ok = bi.tau.strong_incl.semi_contains(&refine_fact, fuel).is_confirmed()
            || bi
                .tau
                .oracle
                .as_ref()
                .map(|o| o.subset(&s_ball, m))
                .unwrap_or(false);
        if oracle_denies {
            records.push(CheckRecord::fail(
                format!("{base}.b-refines"),
                format!(
                    "x_i ∉ {} (oracle): s-ball misses its own point",
                    describe_tau(&s_ball)
                ),
                fuel.ticks(),
            ));
        } else if contain_ok && refine_ok {
            records.push(CheckRecord::pass_with(
                format!("{base}.b-refines"),
                format!("s-ball {}", describe_tau(&s_ball)),
                fuel.ticks(),
            ));
        } else {
            records.push(CheckRecord::inconclusive(
                format!("{base}.b-refines"),
                format!(
                    "containment {} refinement {}",
                    contain_ok, refine_ok
                ),
                fuel.ticks(),
            ));
        }

        // (c) complement coverage against oracle samples
        match &bi.tau.oracle {
            Some(oracle) => {
                let seed = cfg.seed.wrapping_add(idx as u64);
                let zs = oracle.complement_samples(m, cfg.complement_samples, seed);
                let mut missing = None;
                for z in &zs {
                    let hit = bi.sigma.lacombe_member(&t_set, z, fuel);
                    if !hit.is_confirmed() {
                        missing = Some(z.clone());
                        break;
                    }
                }
                match missing {
                    None => records.push(CheckRecord::pass_with(
                        format!("{base}.c-coverage"),
                        format!("{} complement samples covered", zs.len()),
                        fuel.ticks(),
                    )),
                    Some(z) => records.push(CheckRecord::fail(
                        format!("{base}.c-coverage"),
                        format!(
                            "complement point {} of {} not confirmed in t-cover",
                            oracle.describe_point(&z),
                            describe_tau(m)
                        ),
                        fuel.ticks(),
                    )),
                }
            }
            None => records.push(CheckRecord::inconclusive(
                format!("{base}.c-coverage"),
                "no oracle for complement sampling",
                0,
            )),
        }

        // (d) disjointness: exact per emitted ball, plus index-level cross search
        let mut d_fail = None;
        if let Some(cross) = &bi.cross {
            let mut seen = std::collections::HashSet::new();
            for k in 0..cfg.disjoint_scan {
                if let Some(v) = t_set.index_set.step(k) {
                    if seen.insert(v.clone()) && !cross.disjoint(&s_ball, &v) {
                        d_fail = Some(format!(
                            "t-ball {} meets s-ball {}",
                            describe_sigma(&v),
                            describe_tau(&s_ball)
                        ));
                        break;
                    }
                }
            }
        }
        if d_fail.is_none() {
            let mut scanned = 0;
            let mut k = 0;
            while scanned < cfg.cross_points {
                let Some(p) = bi.tau.points.domain.step(k) else {
                    k += 1;
                    if k > cfg.cross_points * 4 {
                        break;
                    }
                    continue;
                };
                k += 1;
                scanned += 1;
                let in_s = bi.tau.member(&p, &s_ball, cfg.cross_budget).is_confirmed();
                if in_s
                    && bi
                        .sigma
                        .lacombe_member(&t_set, &p, cfg.cross_budget)
                        .is_confirmed()
                {
                    d_fail = Some(format!("point x_{p} confirmed on both sides"));
                    break;
                }
            }
        }
        match d_fail {
            None => records.push(CheckRecord::pass(format!("{base}.d-disjoint"), fuel.ticks())),
            Some(err) => records.push(CheckRecord::fail(
                format!("{base}.d-disjoint"),
                err,
                fuel.ticks(),
            )),
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::nat;
    use crate::numbering::{PointEq, PointHandle, PointOutcome};

    /// Three-point carrier with a table basis; masks index subsets of {0,1,2}.
    fn mask(code: &Nat) -> u8 {
        match crate::kernel::nat::to_u64(code) {
            Some(0) => 0b001,
            Some(1) => 0b010,
            Some(2) => 0b100,
            Some(3) => 0b011,
            Some(4) => 0b110,
            Some(5) => 0b111,
            Some(6) => 0b101,
            _ => 0b000,
        }
    }

    fn point_bit(i: &Nat) -> Option<u8> {
        match crate::kernel::nat::to_u64(i) {
            Some(b @ 0..=2) => Some(1 << b),
            _ => None,
        }
    }

    struct ToyOracle;

    impl SpaceOracle for ToyOracle {
        fn point_in(&self, point: &Nat, basic: &Nat) -> Option<bool> {
            point_bit(point).map(|b| mask(basic) & b != 0)
        }
        fn subset(&self, m: &Nat, n: &Nat) -> bool {
            mask(m) & !mask(n) == 0
        }
        fn complement_samples(&self, basic: &Nat, count: usize, _seed: u64) -> Vec<Nat> {
            (0u64..3)
                .filter(|p| mask(basic) & (1 << p) == 0)
                .map(nat)
                .take(count)
                .collect()
        }
        fn describe_basic(&self, code: &Nat) -> String {
            format!("mask{:03b}", mask(code))
        }
    }

    struct ToyCross;

    impl CrossOracle for ToyCross {
        fn disjoint(&self, tau_basic: &Nat, sigma_basic: &Nat) -> bool {
            mask(tau_basic) & mask(sigma_basic) == 0
        }
    }

    fn toy_row(i: &Nat) -> Enumerator {
        match point_bit(i) {
            Some(b) => Enumerator::decidable(move |n| mask(n) & b != 0),
            None => Enumerator::empty(),
        }
    }

    fn toy_points() -> Numbering {
        let domain = Enumerator::from_fn(|k| (k < 3).then(|| nat(k)));
        Numbering::new(domain, |i, _| match point_bit(i) {
            Some(_) => PointOutcome::Confirmed(PointHandle::new(toy_row(i))),
            None => PointOutcome::Exhausted { steps_used: 0 },
        })
        .with_equality(PointEq::new(|a, b, _| {
            for n in 0..8u64 {
                let va = a.observations.semi_contains(&nat(n), Fuel(16)).is_confirmed();
                let vb = b.observations.semi_contains(&nat(n), Fuel(16)).is_confirmed();
                if va != vb {
                    return Outcome::exhausted(n + 1);
                }
            }
            Outcome::confirmed(nat(8), nat(8))
        }))
    }

    fn toy_space(registry: &FnRegistry) -> SpaceDescriptor {
        let strong_incl = Enumerator::decidable(|code| {
            let (m, n) = unpair(code);
            mask(&m) & !mask(&n) == 0
        });
        let space = SpaceDescriptor::from_rows(registry, strong_incl, |i| toy_row(i), toy_points())
            .with_oracle(Arc::new(ToyOracle));
        // Limit passing: evaluate the chain deep; a chain pinned to a
        // singleton names its point.
        let chain_space = space.clone();
        let pt = registry.derive(
            DerivedKey::new("toy-pt", vec![space.id.clone()]),
            move || {
                let space = chain_space.clone();
                Arc::new(move |fcode: &Nat, fuel: Fuel| {
                    let Some(code) = Code::from_nat(fcode) else {
                        return Outcome::exhausted(0);
                    };
                    let Ok(out) = space.registry.apply(code, &nat(8), fuel) else {
                        return Outcome::exhausted(0);
                    };
                    let Some(final_code) = out.into_value() else {
                        return Outcome::exhausted(fuel.ticks());
                    };
                    match mask(&final_code) {
                        0b001 => Outcome::confirmed(nat(0), nat(8)),
                        0b010 => Outcome::confirmed(nat(1), nat(8)),
                        0b100 => Outcome::confirmed(nat(2), nat(8)),
                        _ => Outcome::exhausted(fuel.ticks()),
                    }
                })
            },
        );
        space.with_pt(pt)
    }

    #[test]
    fn sb_search_finds_common_refinement() {
        let reg = FnRegistry::new();
        let space = toy_space(&reg);
        // x_1 ∈ B_3 ∩ B_4; the singleton {1} refines both.
        let out = sb_search(&space, &nat(1), &nat(3), &nat(4), Fuel(10_000));
        let a = out.value().expect("refinement found");
        assert_eq!(mask(a), 0b010);
        assert_eq!(
            sb_search(&space, &nat(1), &nat(3), &nat(4), Fuel::ZERO),
            Outcome::exhausted(0)
        );
    }

    #[test]
    fn sb_search_handles_equal_arguments() {
        let reg = FnRegistry::new();
        let space = toy_space(&reg);
        let out = sb_search(&space, &nat(0), &nat(5), &nat(5), Fuel(10_000));
        let a = out.value().expect("refinement found");
        assert!(mask(a) & 0b001 != 0);
        assert!(mask(a) & !mask(&nat(5)) == 0);
    }

    #[test]
    fn converge_narrows_and_stays_sound() {
        let reg = FnRegistry::new();
        let space = toy_space(&reg);
        let ne = converge(&space, &nat(2));
        ne.verify_decreasing(10, Fuel(10_000)).unwrap();
        for k in 0..10 {
            let code = ne.code_at(k, Fuel(100_000)).expect("total chain");
            assert!(mask(&code) & 0b100 != 0, "chain code misses the point");
        }
        // The chain reaches the minimal neighbourhood of a discrete point.
        let deep = ne.code_at(9, Fuel(100_000)).unwrap();
        assert_eq!(mask(&deep), 0b100);
    }

    #[test]
    fn limit_pass_round_trips() {
        let reg = FnRegistry::new();
        let space = toy_space(&reg);
        let ne = converge(&space, &nat(1));
        let out = limit_pass(&space, &ne, Fuel(1_000_000)).unwrap();
        assert_eq!(out.value(), Some(&nat(1)));
    }

    #[test]
    fn join_split_merge_agree_on_membership() {
        let reg = FnRegistry::new();
        let bi = BiSpaceDescriptor::new(toy_space(&reg), toy_space(&reg))
            .with_cross(Arc::new(ToyCross));
        let joined = join_space(&bi);
        // 1 ∈ B_3 ∩ B_4 = {1}.
        let code = pair(&nat(3), &nat(4));
        assert!(joined.member(&nat(1), &code, Fuel(5_000)).is_confirmed());
        assert!(!joined.member(&nat(0), &code, Fuel(5_000)).is_confirmed());

        // Round trip: merge of the splits is membership-equivalent on samples.
        let (l_tau, l_sigma) = split_l(&joined.membership);
        let merged = merge_l(&l_tau, &l_sigma);
        for i in 0..3u64 {
            for m in 0..7u64 {
                for n in 0..7u64 {
                    let fact = pair(&nat(i), &pair(&nat(m), &nat(n)));
                    let direct = joined
                        .member(&nat(i), &pair(&nat(m), &nat(n)), Fuel(4_000))
                        .is_confirmed();
                    if direct {
                        assert!(
                            merged.semi_contains(&fact, Fuel(600_000)).is_confirmed(),
                            "merge lost ⟨{i},⟨{m},{n}⟩⟩"
                        );
                    }
                }
            }
        }
        // Split soundness: emitted τ-facts hold in the component space.
        for fact in l_tau.collect_within(Fuel(2_000)) {
            let (i, m) = unpair(&fact);
            assert_eq!(ToyOracle.point_in(&i, &m), Some(true));
        }
    }

    #[test]
    fn strong_incl_of_join_is_componentwise() {
        let reg = FnRegistry::new();
        let bi = BiSpaceDescriptor::new(toy_space(&reg), toy_space(&reg));
        let joined = join_space(&bi);
        for (small, big, want) in [
            ((1u64, 1u64), (3u64, 4u64), true),
            ((1, 0), (3, 4), false), // second component fails
            ((2, 1), (3, 4), false), // first component fails
        ] {
            let code = pair(
                &pair(&nat(small.0), &nat(small.1)),
                &pair(&nat(big.0), &nat(big.1)),
            );
            assert_eq!(
                joined
                    .strong_incl
                    .semi_contains(&code, Fuel(1_000))
                    .is_confirmed(),
                want,
                "{small:?} ≺ {big:?}"
            );
        }
    }

    #[test]
    fn star_bicomputable_lifts_membership() {
        let reg = FnRegistry::new();
        let tau = toy_space(&reg);
        let sigma = toy_space(&reg);
        let star = star_bicomputable(
            &tau.points,
            &sigma.points,
            &tau.membership,
            &sigma.membership,
        );
        let idx = pair(&nat(1), &nat(1));
        assert!(star.points.deref(&idx, Fuel(10_000)).is_confirmed());
        // Lifted τ-membership mirrors the component relation.
        let fact = pair(&idx, &nat(4));
        assert!(star.l_tau.semi_contains(&fact, Fuel(10_000)).is_confirmed());
        let miss = pair(&idx, &nat(0));
        assert!(!star.l_tau.semi_contains(&miss, Fuel(10_000)).is_confirmed());
        // Mismatched pairs never dereference.
        let bad = pair(&nat(0), &nat(2));
        assert!(!star.points.deref(&bad, Fuel(50_000)).is_confirmed());
    }

    #[test]
    fn bi_limit_pass_is_componentwise() {
        let reg = FnRegistry::new();
        let tau = toy_space(&reg);
        let sigma = toy_space(&reg);
        let bipt = bi_limit_pass(&reg, tau.pt.unwrap(), sigma.pt.unwrap());
        let ne1 = converge(&tau, &nat(0));
        let ne2 = converge(&sigma, &nat(0));
        let arg = pair(&ne1.f.as_nat(), &ne2.f.as_nat());
        let out = reg.apply(bipt, &arg, Fuel(2_000_000)).unwrap();
        assert_eq!(out.value(), Some(&pair(&nat(0), &nat(0))));
    }

    fn toy_regularity_witnesses(reg: &FnRegistry) -> (Code, Code) {
        // s: refine to the singleton of the queried point.
        let s = reg.register(|query, _| {
            let (i, _m) = unpair(query);
            Outcome::confirmed(i, nat(0))
        });
        // t: enumerate singleton codes of the complement of the queried set.
        let reg_inner = reg.clone();
        let t = reg.register(move |query, _| {
            let (_i, m) = unpair(query);
            let missing: Vec<Nat> = (0u64..3)
                .filter(|p| mask(&m) & (1 << p) == 0)
                .map(nat)
                .collect();
            let code = reg_inner.derive_enumerator(
                DerivedKey::new("toy-t-set", vec![m.clone()]),
                move || Enumerator::from_values(missing.clone()),
            );
            Outcome::confirmed(code.as_nat(), nat(0))
        });
        (s, t)
    }

    #[test]
    fn effective_regularity_passes_on_the_toy_bispace() {
        let reg = FnRegistry::new();
        let bi = BiSpaceDescriptor::new(toy_space(&reg), toy_space(&reg))
            .with_cross(Arc::new(ToyCross));
        let (s, t) = toy_regularity_witnesses(&reg);
        let samples = vec![
            (nat(0), nat(3)),
            (nat(1), nat(3)),
            (nat(2), nat(4)),
            (nat(0), nat(5)),
        ];
        let cfg = RegularityCfg {
            fuel: Fuel(20_000),
            complement_samples: 3,
            ..Default::default()
        };
        let records = check_effective_regularity(&bi, s, t, &samples, &cfg);
        assert_eq!(records.len(), 4 * 4);
        for r in &records {
            assert_eq!(r.status, Status::Pass, "{}: {:?}", r.name, r.witness);
        }
    }

    #[test]
    fn faulty_witnesses_are_caught_with_counterexamples() {
        let reg = FnRegistry::new();
        let bi = BiSpaceDescriptor::new(toy_space(&reg), toy_space(&reg))
            .with_cross(Arc::new(ToyCross));
        let (s, _) = toy_regularity_witnesses(&reg);

        // t that omits part of the complement: coverage must fail, naming
        // the missing point.
        let reg_inner = reg.clone();
        let t_omitting = reg.register(move |query, _| {
            let (_i, m) = unpair(query);
            let partial: Vec<Nat> = (0u64..3)
                .filter(|p| mask(&m) & (1 << p) == 0)
                .skip(1)
                .map(nat)
                .collect();
            let code = reg_inner.derive_enumerator(
                DerivedKey::new("toy-t-omit", vec![m.clone()]),
                move || Enumerator::from_values(partial.clone()),
            );
            Outcome::confirmed(code.as_nat(), nat(0))
        });
        let samples = vec![(nat(0), nat(3))]; // complement of {0,1} is {2}
        let cfg = RegularityCfg {
            fuel: Fuel(20_000),
            complement_samples: 3,
            ..Default::default()
        };
        let records = check_effective_regularity(&bi, s, t_omitting, &samples, &cfg);
        let coverage = records
            .iter()
            .find(|r| r.name.ends_with("c-coverage"))
            .unwrap();
        assert_eq!(coverage.status, Status::Fail);
        assert!(coverage.witness.as_ref().unwrap().contains("x_2"));

        // t that covers with an overlapping set: disjointness must fail.
        let reg_inner = reg.clone();
        let t_overlap = reg.register(move |query, _| {
            let (_i, m) = unpair(query);
            let code = reg_inner.derive_enumerator(
                DerivedKey::new("toy-t-overlap", vec![m.clone()]),
                || Enumerator::from_values(vec![nat(5)]), // the whole space
            );
            Outcome::confirmed(code.as_nat(), nat(0))
        });
        let records = check_effective_regularity(&bi, s, t_overlap, &samples, &cfg);
        let disjoint = records
            .iter()
            .find(|r| r.name.ends_with("d-disjoint"))
            .unwrap();
        assert_eq!(disjoint.status, Status::Fail);
    }

    #[test]
    fn specialization_refutation_uses_the_oracle_for_negatives() {
        let reg = FnRegistry::new();
        let space = toy_space(&reg);
        // Discrete space: 0 ≤ 1 is refutable by the singleton {0}.
        let out = specialization_refute(&space, &nat(0), &nat(1), Fuel(10_000)).unwrap();
        let n = out.value().expect("separating basic open");
        assert_eq!(ToyOracle.point_in(&nat(0), n), Some(true));
        assert_eq!(ToyOracle.point_in(&nat(1), n), Some(false));
    }
}
