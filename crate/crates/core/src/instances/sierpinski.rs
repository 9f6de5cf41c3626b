//! Sierpinski space as a computable quasi-metric space: carrier {⊥, ⊤},
//! distance zero except δ(⊤, ⊥) = 1, dense base β with β_0 = ⊥ and β_i = ⊤
//! otherwise. Every table is exact and both relations are decidable.
//!
//! Basic opens of the metric topology are `S` for centers at ⊥ and `{⊤}`
//! otherwise; conjugate basic opens are `{⊥}` for centers at ⊥ and `S`
//! otherwise. The strong inclusion used on ball codes is the (decidable)
//! set inclusion of the named tables, which keeps the basis strong: the
//! radius-independent cross pairs `{⊤} ≺ S` of the tables are included
//! verbatim.
//!
//! The halting diagnostics live here: a registered program yields the point
//! that is ⊤ exactly if the program ever confirms, presented by a
//! τ-membership enumerator that always emits `S`-codes and emits `{⊤}`-codes
//! exactly upon confirmation.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use crate::kernel::nat::{to_u64, unpair_u64};
use crate::kernel::{
    nat, pair, pair4, split3, split4, unpair, Code, DerivedKey, Dyadic, Enumerator, FnRegistry,
    Fuel, Nat, Outcome,
};
use crate::numbering::{Numbering, PointHandle, PointOutcome};
use crate::quasimetric::{
    bi_limit_pass_c_code, c_equality, limit_pass_wc_code, project_left, project_right,
    relation_enumerator, QuasiMetricDescriptor,
};
use crate::space::{BiSpaceDescriptor, CrossOracle, SpaceDescriptor, SpaceOracle};

/// A Sierpinski carrier value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SValue {
    Bot,
    Top,
}

/// β: code 0 names ⊥, everything else ⊤.
pub fn base_value(code: &Nat) -> SValue {
    if code == &Nat::from(0u32) {
        SValue::Bot
    } else {
        SValue::Top
    }
}

/// The quasi-metric: zero except δ(⊤, ⊥) = 1.
pub fn delta(y: SValue, z: SValue) -> Dyadic {
    match (y, z) {
        (SValue::Top, SValue::Bot) => Dyadic::one(),
        _ => Dyadic::zero(),
    }
}

/// τ-side basic open of a ball code: `S` if the center is ⊥, else `{⊤}`.
pub fn tau_basic(ball: &Nat) -> &'static str {
    let (a, _e) = unpair(ball);
    match base_value(&a) {
        SValue::Bot => "S",
        SValue::Top => "{top}",
    }
}

/// σ-side basic open of a ball code: `{⊥}` if the center is ⊥, else `S`.
pub fn sigma_basic(ball: &Nat) -> &'static str {
    let (b, _e) = unpair(ball);
    match base_value(&b) {
        SValue::Bot => "{bot}",
        SValue::Top => "S",
    }
}

fn tau_contains(ball: &Nat, v: SValue) -> bool {
    match tau_basic(ball) {
        "S" => true,
        _ => v == SValue::Top,
    }
}

fn sigma_contains(ball: &Nat, v: SValue) -> bool {
    match sigma_basic(ball) {
        "S" => true,
        _ => v == SValue::Bot,
    }
}

#[derive(Default)]
pub struct SValueTable {
    known: RwLock<BTreeMap<Nat, SValue>>,
}

impl SValueTable {
    fn record(&self, index: Nat, value: SValue) {
        self.known
            .write()
            .expect("value table poisoned")
            .entry(index)
            .or_insert(value);
    }

    pub fn value(&self, index: &Nat) -> Option<SValue> {
        self.known
            .read()
            .expect("value table poisoned")
            .get(index)
            .copied()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Tau,
    Sigma,
}

struct TableOracle {
    side: Side,
    values: Arc<SValueTable>,
    bot_index: Nat,
    top_index: Nat,
}

impl SpaceOracle for TableOracle {
    fn point_in(&self, point: &Nat, basic: &Nat) -> Option<bool> {
        let v = self.values.value(point)?;
        Some(match self.side {
            Side::Tau => tau_contains(basic, v),
            Side::Sigma => sigma_contains(basic, v),
        })
    }

    fn subset(&self, m: &Nat, n: &Nat) -> bool {
        match self.side {
            Side::Tau => tau_incl(m, n),
            Side::Sigma => sigma_incl(m, n),
        }
    }

    fn complement_samples(&self, basic: &Nat, count: usize, _seed: u64) -> Vec<Nat> {
        if count == 0 {
            return Vec::new();
        }
        match self.side {
            Side::Tau => match tau_basic(basic) {
                "S" => Vec::new(),
                _ => vec![self.bot_index.clone()],
            },
            Side::Sigma => match sigma_basic(basic) {
                "S" => Vec::new(),
                _ => vec![self.top_index.clone()],
            },
        }
    }

    fn describe_basic(&self, code: &Nat) -> String {
        match self.side {
            Side::Tau => tau_basic(code).to_string(),
            Side::Sigma => sigma_basic(code).to_string(),
        }
    }

    fn describe_point(&self, index: &Nat) -> String {
        match self.values.value(index) {
            Some(SValue::Bot) => format!("x_{index}=bot"),
            Some(SValue::Top) => format!("x_{index}=top"),
            None => format!("x_{index}"),
        }
    }
}

struct TableCross;

impl CrossOracle for TableCross {
    fn disjoint(&self, tau_code: &Nat, sigma_code: &Nat) -> bool {
        tau_basic(tau_code) == "{top}" && sigma_basic(sigma_code) == "{bot}"
    }
}

/// Set inclusion on τ-side ball codes: `{⊤} ⊆ anything`, `S ⊆ S` only.
fn tau_incl(m: &Nat, n: &Nat) -> bool {
    tau_basic(m) == "{top}" || tau_basic(n) == "S"
}

/// Set inclusion on σ-side ball codes: `{⊥} ⊆ anything`, `S ⊆ S` only.
fn sigma_incl(m: &Nat, n: &Nat) -> bool {
    sigma_basic(m) == "{bot}" || sigma_basic(n) == "S"
}

/// The fully tabulated Sierpinski instance.
pub struct SierpinskiInstance {
    pub registry: FnRegistry,
    pub qm: QuasiMetricDescriptor,
    pub bispace: BiSpaceDescriptor,
    /// τ_δ over weakly computable presentations; hosts the halting points.
    pub wc_space: SpaceDescriptor,
    /// Computable-point indices of the two carrier elements.
    pub bot: Nat,
    pub top: Nat,
    /// Weakly computable presentations of the same two points.
    pub wc_bot: Nat,
    pub wc_top: Nat,
    pub values: Arc<SValueTable>,
}

fn delta_codes(a: &Nat, b: &Nat) -> Dyadic {
    delta(base_value(a), base_value(b))
}

fn rank_tuple4(r: u64) -> Option<Nat> {
    let (ab, ce) = unpair_u64(r);
    let (a, b) = unpair_u64(ab);
    let (c, e) = unpair_u64(ce);
    Some(pair4(&nat(a), &nat(b), &nat(c), &nat(e)))
}

fn bound(c: &Nat, e: &Nat) -> Option<Dyadic> {
    let e = to_u64(e)?;
    Some(Dyadic::new(
        num_bigint::BigInt::from(c.clone()),
        num_bigint::BigInt::from(-(e as i64)),
    ))
}

/// Materialize the instance: decidable `lt`/`gt`, the four exact tables,
/// table-based strong inclusions, and both carrier points registered in
/// computable and weakly computable presentation.
pub fn make_sierpinski(registry: &FnRegistry) -> SierpinskiInstance {
    let lt = relation_enumerator(
        |code| {
            let (a, b, c, e) = split4(code);
            match bound(&c, &e) {
                Some(bnd) => delta_codes(&a, &b) < bnd,
                None => false,
            }
        },
        rank_tuple4,
    );
    let gt = relation_enumerator(
        |code| {
            let (a, b, c, e) = split4(code);
            match bound(&c, &e) {
                Some(bnd) => delta_codes(&a, &b) > bnd,
                None => false,
            }
        },
        rank_tuple4,
    );
    let qm = QuasiMetricDescriptor::new(registry, lt)
        .with_gt(gt)
        .with_exact_delta(delta_codes);

    // Computable presentations: full c-observation sets of the two points.
    let bot_obs = Enumerator::decidable(|code| {
        let (a, _b, _e) = split3(code);
        base_value(&a) == SValue::Bot
    });
    let top_obs = Enumerator::decidable(|code| {
        let (_a, b, _e) = split3(code);
        base_value(&b) == SValue::Top
    });
    let bot = registry
        .derive_enumerator(DerivedKey::new("s-bot-c", vec![qm.id.clone()]), move || {
            bot_obs.clone()
        })
        .as_nat();
    let top = registry
        .derive_enumerator(DerivedKey::new("s-top-c", vec![qm.id.clone()]), move || {
            top_obs.clone()
        })
        .as_nat();

    // Weakly computable presentations: τ-side observations only.
    let wc_bot_obs = Enumerator::decidable(|code| {
        let (a, _e) = unpair(code);
        base_value(&a) == SValue::Bot
    });
    let wc_top_obs = Enumerator::decidable(|_| true);
    let wc_bot = registry
        .derive_enumerator(DerivedKey::new("s-bot-wc", vec![qm.id.clone()]), move || {
            wc_bot_obs.clone()
        })
        .as_nat();
    let wc_top = registry
        .derive_enumerator(DerivedKey::new("s-top-wc", vec![qm.id.clone()]), move || {
            wc_top_obs.clone()
        })
        .as_nat();

    let values = Arc::new(SValueTable::default());
    values.record(bot.clone(), SValue::Bot);
    values.record(top.clone(), SValue::Top);
    values.record(wc_bot.clone(), SValue::Bot);
    values.record(wc_top.clone(), SValue::Top);

    let tau_strong = Enumerator::decidable(|code| {
        let (m, n) = unpair(code);
        tau_incl(&m, &n)
    });
    let sigma_strong = Enumerator::decidable(|code| {
        let (m, n) = unpair(code);
        sigma_incl(&m, &n)
    });

    let points = {
        let reg = registry.clone();
        let dom = registry.clone();
        Numbering::new(
            Enumerator::from_fn(move |k| (k < dom.len() as u64).then(|| nat(k))),
            move |i, _| PointOutcome::Confirmed(PointHandle::new(reg.w_set(i))),
        )
        .with_equality(c_equality(&qm))
    };

    let ball_rank = |r: u64| {
        let (a, e) = unpair_u64(r);
        pair(&nat(a), &nat(e))
    };

    let tau_rows = registry.clone();
    let tau_q = qm.clone();
    let tau = SpaceDescriptor::from_rows(
        registry,
        tau_strong,
        move |i| project_left(&tau_q, &tau_rows.w_set(i)),
        points.clone(),
    )
    .with_basis_rank(ball_rank)
    .with_oracle(Arc::new(TableOracle {
        side: Side::Tau,
        values: values.clone(),
        bot_index: bot.clone(),
        top_index: top.clone(),
    }));
    let tau_sb_space = tau.clone();
    let tau = tau.with_sb(registry.derive(
        DerivedKey::new("s-sb-tau", vec![tau_sb_space.id.clone()]),
        move || {
            let space = tau_sb_space.clone();
            Arc::new(move |arg: &Nat, fuel: Fuel| {
                let (i, m, n) = split3(arg);
                crate::space::sb_search(&space, &i, &m, &n, fuel)
            })
        },
    ));

    let sigma_rows = registry.clone();
    let sigma_q = qm.clone();
    let sigma = SpaceDescriptor::from_rows(
        registry,
        sigma_strong,
        move |i| project_right(&sigma_q, &sigma_rows.w_set(i)),
        points.clone(),
    )
    .with_basis_rank(ball_rank)
    .with_oracle(Arc::new(TableOracle {
        side: Side::Sigma,
        values: values.clone(),
        bot_index: bot.clone(),
        top_index: top.clone(),
    }));
    let sigma_sb_space = sigma.clone();
    let sigma = sigma.with_sb(registry.derive(
        DerivedKey::new("s-sb-sigma", vec![sigma_sb_space.id.clone()]),
        move || {
            let space = sigma_sb_space.clone();
            Arc::new(move |arg: &Nat, fuel: Fuel| {
                let (i, m, n) = split3(arg);
                crate::space::sb_search(&space, &i, &m, &n, fuel)
            })
        },
    ));

    let bispace = BiSpaceDescriptor::new(tau, sigma)
        .with_bi_pt(bi_limit_pass_c_code(&qm))
        .with_cross(Arc::new(TableCross));

    // wc-points of the metric topology, the home of halting diagnostics.
    let wc_points = {
        let reg = registry.clone();
        let dom = registry.clone();
        Numbering::new(
            Enumerator::from_fn(move |k| (k < dom.len() as u64).then(|| nat(k))),
            move |i, _| PointOutcome::Confirmed(PointHandle::new(reg.w_set(i))),
        )
    };
    let wc_rows = registry.clone();
    let wc_strong = Enumerator::decidable(|code| {
        let (m, n) = unpair(code);
        tau_incl(&m, &n)
    });
    let wc_space = SpaceDescriptor::from_rows(
        registry,
        wc_strong,
        move |i| wc_rows.w_set(i),
        wc_points,
    )
    .with_basis_rank(ball_rank)
    .with_pt(limit_pass_wc_code(&qm))
    .with_oracle(Arc::new(TableOracle {
        side: Side::Tau,
        values: values.clone(),
        bot_index: wc_bot.clone(),
        top_index: wc_top.clone(),
    }));
    let wc_sb_space = wc_space.clone();
    let wc_space = wc_space.with_sb(registry.derive(
        DerivedKey::new("s-sb-wc", vec![wc_sb_space.id.clone()]),
        move || {
            let space = wc_sb_space.clone();
            Arc::new(move |arg: &Nat, fuel: Fuel| {
                let (i, m, n) = split3(arg);
                crate::space::sb_search(&space, &i, &m, &n, fuel)
            })
        },
    ));

    SierpinskiInstance {
        registry: registry.clone(),
        qm,
        bispace,
        wc_space,
        bot,
        top,
        wc_bot,
        wc_top,
        values,
    }
}

impl SierpinskiInstance {
    /// τ-ball code around base code `a` with radius `2^{-e}`.
    pub fn ball(&self, a: u64, e: u64) -> Nat {
        pair(&nat(a), &nat(e))
    }

    /// The point that is ⊤ exactly if the registered program confirms on
    /// input 0. Its membership enumerator always emits `S`-codes and emits
    /// `{⊤}`-codes exactly upon the program's confirmation, at a schedule
    /// position determined by the detection budget.
    pub fn halting_point(&self, p: Code) -> Nat {
        let registry = self.registry.clone();
        let key = DerivedKey::new("halting-point", vec![self.qm.id.clone(), p.as_nat()]);
        self.registry
            .derive_enumerator(key, move || {
                let run_registry = registry.clone();
                let sweep = Enumerator::from_fn(move |t| {
                    if t % 2 == 0 {
                        // S-codes at every radius, unconditionally.
                        return Some(pair(&nat(0), &nat(t / 2)));
                    }
                    let (budget, r) = unpair_u64((t - 1) / 2);
                    let halted = run_registry
                        .apply(p, &nat(0), Fuel(budget))
                        .map(|o| o.is_confirmed())
                        .unwrap_or(false);
                    if !halted {
                        return None;
                    }
                    let (a, e) = unpair_u64(r);
                    Some(pair(&nat(a + 1), &nat(e)))
                });
                let probe_registry = registry.clone();
                sweep.with_probe(move |ball, fuel| {
                    let (a, _e) = unpair(ball);
                    if base_value(&a) == SValue::Bot {
                        return Outcome::confirmed(ball.clone(), Nat::from(0u32));
                    }
                    match probe_registry.apply(p, &nat(0), fuel) {
                        Ok(Outcome::Confirmed { at_step, .. }) => {
                            Outcome::confirmed(ball.clone(), at_step)
                        }
                        Ok(Outcome::Exhausted { steps_used }) => Outcome::exhausted(steps_used),
                        Err(_) => Outcome::exhausted(0),
                    }
                })
            })
            .as_nat()
    }

    /// The eight exact table entries: the quasi-metric on the carrier, the
    /// basic-set tables of both topologies, and the nontrivial strong
    /// inclusion pairs.
    pub fn tables(&self) -> Vec<(String, String)> {
        let mut rows = Vec::new();
        for (y, z) in [
            (SValue::Bot, SValue::Bot),
            (SValue::Bot, SValue::Top),
            (SValue::Top, SValue::Bot),
            (SValue::Top, SValue::Top),
        ] {
            rows.push((format!("delta({y:?},{z:?})"), delta(y, z).to_string()));
        }
        rows.push(("basis(a=0)".into(), "S".into()));
        rows.push(("basis(a!=0)".into(), "{top}".into()));
        rows.push((
            "incl({top},S)".into(),
            tau_incl(&self.ball(3, 1), &self.ball(0, 7)).to_string(),
        ));
        rows.push((
            "incl(S,{top})".into(),
            tau_incl(&self.ball(0, 1), &self.ball(2, 1)).to_string(),
        ));
        rows
    }
}
