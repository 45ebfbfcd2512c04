use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    cw_impossibility_pair, cw_policies, external_incomparability_instance, trap_instance, oracle_trap_run, random_dracc,
    random_mdbg, random_ojs, DraccGenParams, MdbgGenParams, OjsGenParams, ValuationGen, FORWARD, TRAP_SINK, TRAP_SOURCE,
};
use crate::apps::{mdbg_demand, mdbg_to_dracc, ojs_demand, ojs_to_dracc};
use crate::chasing::{run_chase, run_chase_dracc, stateless_check, ExploringChaser, ForwardBackwardChaser, OjsChaser};
use crate::ddmdp::{run_learner, simulate_policy, DdMdp, FixedPolicyLearner, View};
use crate::dracc::{
    demand_by_enumeration, make_policy_family, static_policy, DraccInstance, Inventory, LadderRung, PolicyFamilySpec, PriceVector,
    ResourceId, ResourceSchedule, Valuation,
};
use crate::error::{Error, Result};
use crate::meta::{lbpp_run, OracleChoice};
use crate::rng::{derive_seed, substream, StreamRng};

/// Named invariant suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PhiMonotone,
    Feasibility,
    ReductionSoundness,
    LowerBounds,
    BruteForceEquivalence,
    Stateless,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PhiMonotone,
        Suite::Feasibility,
        Suite::ReductionSoundness,
        Suite::LowerBounds,
        Suite::BruteForceEquivalence,
        Suite::Stateless,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PhiMonotone => "phi-monotone",
            Suite::Feasibility => "feasibility",
            Suite::ReductionSoundness => "reduction-soundness",
            Suite::LowerBounds => "lower-bounds",
            Suite::BruteForceEquivalence => "brute-force-equivalence",
            Suite::Stateless => "stateless",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// Machine-readable suite outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: usize,
    pub violations: usize,
    /// First few violation descriptions.
    pub details: Vec<String>,
}

const MAX_DETAILS: usize = 20;

impl VerifyReport {
    fn from_cases(suite: Suite, results: Vec<Result<Vec<String>>>) -> Result<Self> {
        let cases = results.len();
        let mut details = Vec::new();
        let mut violations = 0;
        for r in results {
            let v = r?;
            violations += v.len();
            details.extend(v);
        }
        details.truncate(MAX_DETAILS);
        Ok(VerifyReport { suite, passed: violations == 0, cases, violations, details })
    }
}

/// Run `suite` at pinned seeds derived from `master_seed`.
pub fn verify(suite: Suite, master_seed: u64) -> Result<VerifyReport> {
    match suite {
        Suite::PhiMonotone => phi_monotone(master_seed),
        Suite::Feasibility => feasibility(master_seed),
        Suite::ReductionSoundness => reduction_soundness(master_seed),
        Suite::LowerBounds => lower_bounds(master_seed),
        Suite::BruteForceEquivalence => brute_force(master_seed),
        Suite::Stateless => stateless(master_seed),
    }
}

fn ladder() -> PolicyFamilySpec {
    let rungs = [(0.9, 0.6), (0.8, 0.3), (0.6, 0.2), (0.5, 0.0), (0.35, 0.0), (0.7, 0.5)]
        .iter()
        .map(|&(base, slope)| LadderRung { base, slope, floor: 0.05 })
        .collect();
    PolicyFamilySpec::InventoryLadder { rungs }
}

/// Units drawn uniformly in `0..=c` for every resource active at `t`.
fn random_inventory(schedule: &ResourceSchedule, t: usize, rng: &mut StreamRng) -> Inventory {
    Inventory(schedule.active(t).iter().map(|&(i, c)| (i, rng.random_range(0..=c))).collect())
}

fn phi_params(horizon: usize) -> DraccGenParams {
    DraccGenParams {
        horizon,
        arrivals: 1,
        capacity: [1, 2],
        lifetime: [1, 4],
        valuation: ValuationGen::Kdemand { k: [1, 3], weight: [0.0, 1.0], density: 0.8 },
        drift: None,
        capacity_bound: Some(2),
        width_bound: Some(4),
    }
}

fn phi_monotone(master: u64) -> Result<VerifyReport> {
    let horizon = 2000;
    let results = (0..100u64)
        .into_par_iter()
        .map(|k| -> Result<Vec<String>> {
            let inst = random_dracc::<f64>(&phi_params(horizon), derive_seed(master, k, "phi-instance"))?;
            let policies = make_policy_family::<f64>(&ladder(), inst.schedule())?;
            let mut rng = substream(master, k, "phi-start");
            let target = policies.get(rng.random_range(0..policies.len()));
            let t_init = rng.random_range(1..=horizon / 2);
            let s_init = random_inventory(inst.schedule(), t_init, &mut rng);
            let mut oracle = ExploringChaser::kdemand(inst.cw(), horizon);
            let (_, probe, last) = run_chase_dracc(&inst, &mut oracle, target, t_init, &s_init, horizon, derive_seed(master, k, "phi-oracle"))?;
            let mut seq: Vec<(usize, u64)> = probe.rows.iter().map(|r| (r.t, r.phi)).collect();
            seq.push((horizon + 1, last));
            Ok(seq
                .windows(2)
                .filter(|w| w[1].1 > w[0].1)
                .map(|w| format!("instance {k}: phi rose from {} to {} at round {}", w[0].1, w[1].1, w[1].0))
                .collect())
        })
        .collect();
    VerifyReport::from_cases(Suite::PhiMonotone, results)
}

fn check_inventory_safety(inst: &DraccInstance<f64>, states: &[Inventory], actions: &[PriceVector<f64>], label: &str) -> Vec<String> {
    let mut out = Vec::new();
    let view = View::new(inst);
    for (t, (s, x)) in states.iter().zip(actions).enumerate() {
        if !view.is_feasible(s, x) {
            out.push(format!("{label}: infeasible prices at round {}", t + 1));
        }
        for &(i, u) in &s.0 {
            if inst.schedule().resource(i).is_none_or(|r| u > r.c) {
                out.push(format!("{label}: resource {i} holds {u} units at round {}", t + 1));
            }
        }
        if let Some(prev) = t.checked_sub(1).map(|p| &states[p]) {
            for &(i, u) in &s.0 {
                if prev.get(i).is_some_and(|pu| u > pu) {
                    out.push(format!("{label}: resource {i} regained units at round {}", t + 1));
                }
            }
        }
    }
    out
}

fn feasibility(master: u64) -> Result<VerifyReport> {
    let families = [
        ValuationGen::Kdemand { k: [1, 3], weight: [0.1, 1.0], density: 0.9 },
        ValuationGen::SingleMinded { value: [0.2, 1.0], max_bundle: 3 },
        ValuationGen::Explicit { value: [0.0, 1.0], density: 0.5 },
    ];
    let results = (0..30u64)
        .into_par_iter()
        .map(|k| -> Result<Vec<String>> {
            let params = DraccGenParams {
                horizon: 300,
                arrivals: 1,
                capacity: [1, 3],
                lifetime: [1, 3],
                valuation: families[k as usize % families.len()].clone(),
                drift: None,
                capacity_bound: None,
                width_bound: None,
            };
            let inst = random_dracc::<f64>(&params, derive_seed(master, k, "feasibility"))?;
            let policies = make_policy_family::<f64>(&ladder(), inst.schedule())?;
            let mut out = Vec::new();
            let lbpp = lbpp_run(&inst, &policies, OracleChoice::Auto, derive_seed(master, k, "lbpp"))?;
            out.extend(lbpp.check_invariants().err().map(|e| format!("instance {k}: {e}")));
            out.extend(check_inventory_safety(&inst, &lbpp.learner_states, &lbpp.learner_actions, &format!("instance {k} lbpp")));
            let fixed = run_learner(&inst, &mut FixedPolicyLearner::new(policies.get(3).clone()), &policies, 0)?;
            out.extend(check_inventory_safety(&inst, &fixed.learner_states, &fixed.learner_actions, &format!("instance {k} fixed")));
            Ok(out)
        })
        .collect();
    VerifyReport::from_cases(Suite::Feasibility, results)
}

fn random_prices(ids: &[ResourceId], rng: &mut StreamRng) -> PriceVector<Rational64> {
    PriceVector(ids.iter().map(|&i| (i, Rational64::new(rng.random_range(1..=16), 16))).collect())
}

fn reduction_soundness(master: u64) -> Result<VerifyReport> {
    let ojs = (0..1000u64).into_par_iter().map(|k| -> Result<Vec<String>> {
        let mut rng = substream(master, k, "ojs-case");
        let params = OjsGenParams {
            jobs: rng.random_range(1..=20),
            jobs_per_slot: rng.random_range(1..=3),
            bandwidth: [1, 2],
            span: [1, 4],
            length: [1, 3],
            value: [0.0, 1.0],
        };
        let native = random_ojs::<Rational64>(&params, derive_seed(master, k, "ojs"))?;
        let image = ojs_to_dracc(&native)?;
        let mut out = Vec::new();
        for t in 1..=image.horizon() {
            let window = native.window(t);
            let active: Vec<ResourceId> = image.schedule().active(t).iter().map(|e| e.0).collect();
            if active != window {
                out.push(format!("ojs case {k}: active set differs from the window at job {t}"));
                continue;
            }
            let p = random_prices(&window, &mut rng);
            if ojs_demand(native.job(t), &p) != image.user(t).demand(&p)? {
                out.push(format!("ojs case {k}: demand differs at job {t} under {p:?}"));
            }
        }
        let trace = simulate_policy(&image, &static_policy("uniform:1/4", Rational64::new(1, 4)), image.horizon())?;
        let mut used = vec![0u32; native.slots() + 1];
        for t in 1..=image.horizon() {
            for i in image.round_at(t).demand(&trace.actions[t - 1]).chosen {
                used[i as usize] += 1;
            }
        }
        for (i, u) in used.iter().enumerate().skip(1) {
            if *u > native.bandwidth(i) {
                out.push(format!("ojs case {k}: slot {i} allocated {u} times"));
            }
        }
        Ok(out)
    });
    let mdbg = (0..1000u64).into_par_iter().map(|k| -> Result<Vec<String>> {
        let mut rng = substream(master, k, "mdbg-case");
        let params = MdbgGenParams { right: rng.random_range(1..=20), left_per_round: rng.random_range(1..=2), lifetime: [1, 5], weight: [0.0, 1.0], density: 0.7 };
        let native = random_mdbg::<Rational64>(&params, derive_seed(master, k, "mdbg"))?;
        let image = mdbg_to_dracc(&native)?;
        let mut out = Vec::new();
        for t in 1..=image.horizon() {
            let live = native.live(t);
            let p = random_prices(&live, &mut rng);
            if mdbg_demand(&native.right()[t - 1], &p) != image.user(t).demand(&p)? {
                out.push(format!("mdbg case {k}: demand differs at right node {t}"));
            }
        }
        let trace = simulate_policy(&image, &static_policy("uniform:1/4", Rational64::new(1, 4)), image.horizon())?;
        let mut matched: Vec<ResourceId> = Vec::new();
        for t in 1..=image.horizon() {
            let chosen = image.round_at(t).demand(&trace.actions[t - 1]).chosen;
            if chosen.len() > 1 {
                out.push(format!("mdbg case {k}: right node {t} matched {} times", chosen.len()));
            }
            matched.extend(chosen);
        }
        matched.sort_unstable();
        if matched.windows(2).any(|w| w[0] == w[1]) {
            out.push(format!("mdbg case {k}: a left node was matched twice"));
        }
        Ok(out)
    });
    let mut results: Vec<Result<Vec<String>>> = ojs.collect();
    results.extend(mdbg.collect::<Vec<_>>());
    VerifyReport::from_cases(Suite::ReductionSoundness, results)
}

fn lower_bounds(master: u64) -> Result<VerifyReport> {
    let mut results: Vec<Result<Vec<String>>> = Vec::new();
    let third = Rational64::new(1, 3);
    for span in [30usize, 300] {
        let oracles: [(&str, fn() -> ExploringChaser); 2] =
            [("follower", ExploringChaser::follower), ("all-ones", || ExploringChaser::with_epsilon(1.0))];
        for (name, make) in oracles {
            results.push(oracle_trap_run::<Rational64, _, _>(make, 1, span, derive_seed(master, span as u64, "oracle-trap")).map(|out| {
                let target = Rational64::from_integer(span as i64) * third;
                if (out.cr - target).abs() > third {
                    vec![format!("oracle trap {name}, span {span}: CR {} not within 1/3 of {target}", out.cr)]
                } else {
                    Vec::new()
                }
            }));
        }
    }
    let eps = Rational64::new(1, 10);
    for (c, w) in [(5u32, 2usize), (25, 4)] {
        results.push((|| {
            let (a, b) = cw_impossibility_pair(c, w, eps)?;
            let pols = cw_policies(eps)?;
            let horizon = a.horizon() as i64;
            let best = |inst: &DraccInstance<Rational64>| -> Result<Rational64> {
                let mut top = Rational64::from_integer(0);
                for p in pols.iter() {
                    top = top.max(simulate_policy(inst, p, inst.horizon())?.cumulative() * inst.reward_scale());
                }
                Ok(top)
            };
            let mut v = Vec::new();
            if best(&a)? != Rational64::new(horizon, 4) {
                v.push(format!("C={c}, W={w}: first instance best revenue {}", best(&a)?));
            }
            if best(&b)? != Rational64::new(9 * horizon, 20) {
                v.push(format!("C={c}, W={w}: second instance best revenue {}", best(&b)?));
            }
            Ok(v)
        })());
    }
    results.push((|| {
        let horizon = 100;
        let inst = trap_instance::<Rational64>(horizon, TRAP_SOURCE)?;
        let mut v = Vec::new();
        let stay = simulate_policy(&inst, &inst.constant_policy(TRAP_SINK), horizon)?.cumulative();
        let trapped = simulate_policy(&inst, &inst.constant_policy(TRAP_SOURCE), horizon)?.cumulative();
        if stay != Rational64::from_integer(horizon as i64) || trapped != Rational64::from_integer(1) {
            v.push(format!("trap: rewards {stay} and {trapped}"));
        }
        Ok(v)
    })());
    results.push((|| {
        let (m, horizon) = (4usize, 100usize);
        let inst = external_incomparability_instance::<Rational64>(m, horizon)?;
        let mut v = Vec::new();
        let fwd = simulate_policy(&inst, &inst.constant_policy(FORWARD), horizon)?.cumulative();
        if fwd < Rational64::new((horizon - m) as i64, 2) {
            v.push(format!("all-forward reward {fwd}"));
        }
        let sigma = Rational64::from_integer(m as i64 - 1);
        for policy in inst.all_policies().iter() {
            for t_init in [1usize, 10, 37] {
                for s in 0..m {
                    let mut oracle = ForwardBackwardChaser::new(m, FORWARD, crate::adversaries::BACKWARD);
                    let rep = run_chase(&inst, &mut oracle, policy, t_init, &s, horizon, 0, None)?;
                    if rep.max_prefix_cr_native() > sigma {
                        v.push(format!("loop chase of {} from state {s} at {t_init}: CR {}", policy.id(), rep.cr));
                    }
                }
            }
        }
        Ok(v)
    })());
    VerifyReport::from_cases(Suite::LowerBounds, results)
}

fn grid(rng: &mut StreamRng) -> Rational64 {
    Rational64::new(rng.random_range(0..8), 8)
}

/// Random valuation over `ids` with values on an eighth grid, so ties are common.
fn random_valuation(ids: &[ResourceId], family: usize, rng: &mut StreamRng) -> Result<Valuation<Rational64>> {
    let weights = |rng: &mut StreamRng| {
        let mut w = Vec::new();
        for &i in ids {
            if rng.random_bool(0.8) {
                w.push((i, grid(rng)));
            }
        }
        w
    };
    match family {
        0 => {
            let k = rng.random_range(1..=4);
            let w = weights(rng);
            Valuation::kdemand(k, w)
        }
        1 => {
            let w = weights(rng);
            Valuation::unit_demand(w)
        }
        2 => {
            let mut bundle: Vec<ResourceId> = ids.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
            if bundle.is_empty() {
                bundle = ids.iter().copied().take(1).collect();
            }
            if bundle.is_empty() {
                return Valuation::kdemand(1, Vec::new());
            }
            let v = grid(rng);
            Valuation::single_minded(bundle, v)
        }
        3 => {
            let rows = (0..rng.random_range(1..=3)).map(|_| weights(rng)).collect();
            Valuation::oxs(rows)
        }
        _ => {
            let n = ids.len();
            let mut table = Vec::new();
            for mask in 1u32..(1 << n) {
                if rng.random_bool(0.3) {
                    table.push(((0..n).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect(), grid(rng)));
                }
            }
            Valuation::explicit(table)
        }
    }
}

fn random_ids(max: usize, rng: &mut StreamRng) -> Vec<ResourceId> {
    let mut pool: Vec<ResourceId> = (1..=12).collect();
    pool.shuffle(rng);
    let mut ids: Vec<ResourceId> = pool.into_iter().take(rng.random_range(0..=max)).collect();
    ids.sort_unstable();
    ids
}

fn eighth_prices(ids: &[ResourceId], rng: &mut StreamRng) -> PriceVector<Rational64> {
    PriceVector(ids.iter().map(|&i| (i, Rational64::new(rng.random_range(1..=8), 8))).collect())
}

fn brute_force(master: u64) -> Result<VerifyReport> {
    let equivalence = (0..10_000u64).into_par_iter().map(|k| -> Result<Vec<String>> {
        let mut rng = substream(master, k, "brute-force");
        let ids = random_ids(8, &mut rng);
        let v = random_valuation(&ids, (k % 5) as usize, &mut rng)?;
        let p = eighth_prices(&ids, &mut rng);
        let fast = v.demand(&p)?;
        let slow = demand_by_enumeration(&v, &p)?;
        Ok(if fast != slow { vec![format!("case {k}: fast {fast:?} vs enumeration {slow:?} for {v:?} at {p:?}")] } else { Vec::new() })
    });
    let exchange = (0..1000u64).into_par_iter().map(|k| -> Result<Vec<String>> {
        let mut rng = substream(master, k, "exchange");
        let ids = random_ids(6, &mut rng);
        let family = [0usize, 2, 3][(k % 3) as usize];
        let v = random_valuation(&ids, family, &mut rng)?;
        let p = eighth_prices(&ids, &mut rng);
        let b: Vec<ResourceId> = ids.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let raised = PriceVector(p.0.iter().map(|(i, x)| (*i, if b.contains(i) { Rational64::from_integer(1) } else { *x })).collect());
        let before = v.demand(&p)?.chosen;
        let after = v.demand(&raised)?.chosen;
        let kept = before.iter().filter(|i| b.contains(i)).count();
        let gained = after.iter().filter(|i| !before.contains(i)).count();
        Ok(if kept < gained { vec![format!("exchange case {k}: {kept} < {gained} for {v:?}, B = {b:?}")] } else { Vec::new() })
    });
    let mut results: Vec<Result<Vec<String>>> = equivalence.collect();
    results.extend(exchange.collect::<Vec<_>>());
    VerifyReport::from_cases(Suite::BruteForceEquivalence, results)
}

fn stateless(master: u64) -> Result<VerifyReport> {
    let results = (0..20u64)
        .into_par_iter()
        .map(|k| -> Result<Vec<String>> {
            let params = OjsGenParams { jobs: 200, jobs_per_slot: 2, bandwidth: [1, 3], span: [1, 4], length: [1, 3], value: [0.0, 1.0] };
            let inst = ojs_to_dracc(&random_ojs::<f64>(&params, derive_seed(master, k, "stateless-instance"))?)?;
            let policies = make_policy_family::<f64>(&ladder(), inst.schedule())?;
            let mut rng = substream(master, k, "stateless-start");
            let target = policies.get(rng.random_range(0..policies.len()));
            let t_init = rng.random_range(1..=inst.horizon());
            let pairs: Vec<(Inventory, Inventory)> = (0..3)
                .map(|_| (random_inventory(inst.schedule(), t_init, &mut rng), random_inventory(inst.schedule(), t_init, &mut rng)))
                .collect();
            let schedule = inst.schedule().clone();
            let outcome = stateless_check(
                || OjsChaser::new(schedule.clone()).expect("scheduling instances are first-in-first-out"),
                &inst,
                target,
                t_init,
                &pairs,
                inst.horizon(),
                1,
                derive_seed(master, k, "stateless"),
            )?;
            Ok(if outcome.stateless { Vec::new() } else { vec![format!("instance {k}: deviation {}", outcome.max_deviation)] })
        })
        .collect();
    VerifyReport::from_cases(Suite::Stateless, results)
}
