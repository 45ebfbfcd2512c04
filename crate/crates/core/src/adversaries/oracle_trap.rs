use std::sync::Arc;

use crate::chasing::{ChasingOracle, Target};
use crate::ddmdp::{Policy, RoundDynamics, Transition, View};
use crate::dracc::{
    apply_sale, DraccInstance, DraccRound, Inventory, PriceVector, PricingPolicy, Resource, ResourceId, ResourceSchedule,
    Valuation,
};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Target of the construction: `2/3` on the older active resource, `1/3` on the newer.
pub fn oracle_trap_policy<R: Scalar>() -> PricingPolicy<R> {
    Policy::new("split:2/3,1/3", |inv: &Inventory| {
        let prices = [R::ratio(2, 3), R::ratio(1, 3)];
        PriceVector(
            inv.0
                .iter()
                .enumerate()
                .map(|(k, &(i, u))| (i, if u == 0 { R::one() } else { prices.get(k).cloned().unwrap_or_else(R::one) }))
                .collect(),
        )
    })
}

/// Result of running the adaptive construction against one oracle.
#[derive(Clone, Debug)]
pub struct OracleTrapOutcome<R> {
    pub t_init: usize,
    pub t_final: usize,
    /// Per-round payment of the target minus payment of the oracle, `t_init..=t_final`.
    pub gaps: Vec<R>,
    /// Sum of `gaps`, in payment units.
    pub cr: R,
    pub oracle_prices: Vec<PriceVector<R>>,
    /// The realized stream as an ordinary instance, for oblivious replay.
    pub frozen: DraccInstance<R>,
    /// Oracle inventory at `t_init`.
    pub s_init: Inventory,
}

struct Layout<R> {
    horizon: usize,
    resources: Vec<Resource>,
    users: Vec<Valuation<R>>,
}

impl<R: Scalar> Layout<R> {
    fn instance(&self) -> Result<DraccInstance<R>> {
        let mut users = self.users.clone();
        users.resize(self.horizon, Valuation::kdemand(1, Vec::new())?);
        DraccInstance::with_bounds(ResourceSchedule::new(self.horizon, self.resources.clone())?, users, 1, 2)
    }
}

fn expected_invariant(active: &[ResourceId; 2]) -> Inventory {
    Inventory(vec![(active[0], 0), (active[1], 1)])
}

/// Drive a deterministic oracle through the adaptive two-resource construction
/// with unit capacities and width 2, for rounds `t_init..=t_init + span`.
///
/// Two oracle copies with different seeds are queried in lockstep; any
/// difference between them is reported as [`Error::NondeterministicOracle`].
pub fn oracle_trap_run<R, O, F>(factory: F, t_init: usize, span: usize, seed: u64) -> Result<OracleTrapOutcome<R>>
where
    R: Scalar,
    O: ChasingOracle<DraccInstance<R>>,
    F: Fn() -> O,
{
    if t_init == 0 {
        return Err(Error::InvalidParams("t_init must be at least 1".into()));
    }
    let t_final = t_init + span;
    let gamma = oracle_trap_policy::<R>();
    let zero = Valuation::kdemand(1, Vec::new())?;
    let mut layout = Layout {
        horizon: t_final,
        resources: vec![Resource { id: 1, ta: 1, te: t_final, c: 1 }, Resource { id: 2, ta: 1, te: t_final, c: 1 }],
        users: vec![zero; t_init - 1],
    };
    let mut active: [ResourceId; 2] = [1, 2];
    let mut next_id: ResourceId = 3;
    let mut own = expected_invariant(&active);
    let s_init = own.clone();
    let mut target_state = Inventory(vec![(1, 1), (2, 1)]);
    let scale = R::from_count(2);

    let mut first = factory();
    let mut second = factory();
    let provisional = layout.instance()?;
    first.start(View::new(&provisional), t_init, &own, &gamma, seed)?;
    // A deterministic oracle must not depend on its seed either.
    second.start(View::new(&provisional), t_init, &own, &gamma, derive_seed(seed, 1, "oracle-trap-replay"))?;

    let mut gaps = Vec::with_capacity(span + 1);
    let mut oracle_prices = Vec::with_capacity(span + 1);
    for t in t_init..=t_final {
        if own != expected_invariant(&active) {
            return Err(Error::InvalidInstance(format!("round {t}: oracle inventory left the invariant, {own:?}")));
        }
        let provisional = layout.instance()?;
        let view = View::new(&provisional);
        let target_action = gamma.act(&target_state);
        let target = || Target { state: &target_state, action: &target_action };
        let p = first.act(view, t, &own, target())?;
        if second.act(view, t, &own, target())? != p {
            return Err(Error::NondeterministicOracle(t));
        }
        if !view.is_feasible(&own, &p) {
            return Err(Error::InfeasibleAction { t, state: format!("{own:?}"), action: format!("{p:?}") });
        }
        let newer = p.get(active[1]).cloned().unwrap_or_else(R::one);
        let third = R::ratio(1, 3);
        let older_value = if newer <= third { R::ratio(2, 3) } else { third.clone() };
        let valuation = Arc::new(Valuation::unit_demand(vec![(active[0], older_value), (active[1], third)])?);

        let target_sale = valuation.demand_unchecked(&target_action);
        let mut survivors: Vec<(ResourceId, u32)> = Vec::new();
        let mut replacement = None;
        for &i in &active {
            if target_sale.chosen.contains(&i) && t < t_final {
                let r = layout.resources.iter_mut().find(|r| r.id == i).expect("active resource is recorded");
                r.te = t;
                replacement = Some(next_id);
            } else {
                survivors.push((i, 1));
            }
        }
        if let Some(id) = replacement {
            layout.resources.push(Resource { id, ta: t + 1, te: t_final, c: 1 });
            survivors.push((id, 1));
            next_id += 1;
        }
        layout.users.push((*valuation).clone());
        let round = DraccRound { t, next: survivors.clone().into(), valuation, scale: scale.clone() };

        let oracle_reward = round.reward(&own, &p);
        let gap = (round.reward(&target_state, &target_action) - oracle_reward.clone()) * scale.clone();
        let full = if first.consults_full_feedback() { Some(&round) } else { None };
        first.observe(view, t, &round, &oracle_reward, full)?;
        second.observe(view, t, &round, &oracle_reward, full)?;

        let own_next = round.next_state(&own, &p);
        target_state = if t < t_final { apply_sale(&target_state, &target_sale.chosen, &round.next)? } else { target_state };
        own = own_next;
        if t < t_final {
            active = [survivors[0].0, survivors[1].0];
        }
        gaps.push(gap);
        oracle_prices.push(p);
    }
    let cr = R::sum_of(gaps.iter());
    Ok(OracleTrapOutcome { t_init, t_final, gaps, cr, oracle_prices, frozen: layout.instance()?, s_init })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chasing::{run_chase, ExploringChaser};
    use num_rational::Rational64;

    #[test]
    fn follower_loses_a_third_every_round() {
        let out = oracle_trap_run::<Rational64, _, _>(ExploringChaser::follower, 1, 30, 7).unwrap();
        assert!(out.gaps.iter().all(|g| *g == Rational64::new(1, 3)));
        assert_eq!(out.cr, Rational64::new(31, 3));
    }

    #[test]
    fn frozen_stream_replays_the_same_chase() {
        let out = oracle_trap_run::<Rational64, _, _>(ExploringChaser::follower, 4, 12, 1).unwrap();
        let mut oracle = ExploringChaser::follower();
        let rep = run_chase(&out.frozen, &mut oracle, &oracle_trap_policy(), 4, &out.s_init, out.t_final, 1, None).unwrap();
        assert_eq!(rep.cr_native(), out.cr);
    }

    #[test]
    fn randomized_oracle_is_rejected() {
        let err = oracle_trap_run::<Rational64, _, _>(|| ExploringChaser::with_epsilon(0.5), 1, 40, 3);
        assert!(matches!(err, Err(Error::NondeterministicOracle(_))));
    }
}
