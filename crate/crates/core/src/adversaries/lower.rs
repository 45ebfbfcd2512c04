use std::sync::Arc;

use crate::ddmdp::{ExplicitDdMdp, ExplicitRound, ExplicitTables, PolicyCollection};
use crate::dracc::{static_policy, DraccInstance, PricingPolicies, Resource, ResourceId, ResourceSchedule, Valuation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two pricing instances sharing `W` resources of capacity `C`, alive for all
/// `T = 2CW` rounds. The first half of the buyers values any single resource at
/// 1/2; the second half values nothing in the first instance and a single
/// resource at `1 - eps` in the second.
pub fn cw_impossibility_pair<R: Scalar>(c: u32, w: usize, eps: R) -> Result<(DraccInstance<R>, DraccInstance<R>)> {
    let half = R::ratio(1, 2);
    if c == 0 || w == 0 || !(eps > R::zero() && eps < half) {
        return Err(Error::InvalidParams("need C, W >= 1 and eps in (0, 1/2)".into()));
    }
    let horizon = 2 * c as usize * w;
    let ids: Vec<ResourceId> = (1..=w as ResourceId).collect();
    let resources: Vec<Resource> = ids.iter().map(|&id| Resource { id, ta: 1, te: horizon, c }).collect();
    let singletons = |v: R| Valuation::explicit(ids.iter().map(|&i| (vec![i], v.clone())).collect());
    let early = singletons(half)?;
    let zero = Valuation::explicit(Vec::new())?;
    let late = singletons(R::one() - eps)?;
    let build = |second: &Valuation<R>| {
        let users = (1..=horizon).map(|t| if t <= horizon / 2 { early.clone() } else { second.clone() }).collect();
        DraccInstance::with_bounds(ResourceSchedule::new(horizon, resources.clone())?, users, c, w)
    };
    Ok((build(&zero)?, build(&late)?))
}

/// The two uniform price levels that are best on the respective instances.
pub fn cw_policies<R: Scalar>(eps: R) -> Result<PricingPolicies<R>> {
    let hi = R::one() - eps;
    PolicyCollection::new(vec![static_policy("uniform:1/2", R::ratio(1, 2)), static_policy(format!("uniform:{hi}"), hi)])
}

/// Input distribution `((1 - 2 eps) / (2 - 2 eps), 1 / (2 - 2 eps))`.
pub fn cw_yao_weights<R: Scalar>(eps: R) -> (R, R) {
    let two = R::from_count(2);
    let denom = two.clone() - two.clone() * eps.clone();
    ((R::one() - two * eps) / denom.clone(), R::one() / denom)
}

/// `(1 - 2 eps) / (8 (1 - eps)) * T`.
pub fn cw_regret_bound<R: Scalar>(eps: R, horizon: usize) -> R {
    (R::one() - R::from_count(2) * eps.clone()) / (R::from_count(8) * (R::one() - eps)) * R::from_count(horizon)
}

/// Experts game as a Dd-MDP: one state per action, playing `x` moves to the
/// state of `x`, and the reward is half the expert reward plus half a bonus for
/// repeating the previous action. Returns the constant policies as well.
pub fn olsc_to_ddmdp<R: Scalar>(stream: &[Vec<R>]) -> Result<(ExplicitDdMdp<R>, PolicyCollection<usize, usize>)> {
    let arms = stream.first().map(Vec::len).ok_or(Error::EmptyCollection)?;
    if arms == 0 {
        return Err(Error::EmptyCollection);
    }
    let half = R::ratio(1, 2);
    let mut rounds = Vec::with_capacity(stream.len());
    for row in stream {
        if row.len() != arms {
            return Err(Error::LengthMismatch(row.len(), arms));
        }
        if row.iter().any(|r| *r < R::zero() || *r > R::one()) {
            return Err(Error::InvalidInstance("expert reward outside [0, 1]".into()));
        }
        let next = vec![(0..arms).collect::<Vec<_>>(); arms];
        let reward = (0..arms)
            .map(|s| {
                (0..arms)
                    .map(|x| half.clone() * row[x].clone() + if s == x { half.clone() } else { R::zero() })
                    .collect()
            })
            .collect();
        rounds.push(ExplicitRound(Arc::new(ExplicitTables { next, reward })));
    }
    let inst = ExplicitDdMdp::new(
        (0..arms).map(|x| format!("s{x}")).collect(),
        (0..arms).map(|x| format!("x{x}")).collect(),
        vec![(0..arms).collect(); arms],
        0,
        rounds,
    )?;
    let policies = PolicyCollection::new((0..arms).map(|x| inst.constant_policy(x)).collect())?;
    Ok((inst, policies))
}

pub const FORWARD: usize = 0;
pub const BACKWARD: usize = 1;

/// Loop of `m` states: Forward climbs (staying at the top), Backward returns to
/// the bottom. Forward at the top pays 1/2, Backward at the top pays 1.
pub fn external_incomparability_instance<R: Scalar>(m: usize, horizon: usize) -> Result<ExplicitDdMdp<R>> {
    if m < 2 || horizon == 0 {
        return Err(Error::InvalidParams(format!("need m >= 2 and T >= 1, got m = {m}, T = {horizon}")));
    }
    let top = m - 1;
    let next = (0..m).map(|s| vec![(s + 1).min(top), 0]).collect();
    let reward = (0..m)
        .map(|s| if s == top { vec![R::ratio(1, 2), R::one()] } else { vec![R::zero(), R::zero()] })
        .collect();
    let round = ExplicitRound(Arc::new(ExplicitTables { next, reward }));
    ExplicitDdMdp::new(
        (1..=m).map(|s| s.to_string()).collect(),
        vec!["forward".into(), "backward".into()],
        vec![vec![FORWARD, BACKWARD]; m],
        0,
        vec![round; horizon],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddmdp::{simulate_policy, DdMdp};
    use num_rational::Rational64;

    #[test]
    fn pair_revenues_match_the_closed_forms() {
        let eps = Rational64::new(1, 10);
        let (a, b) = cw_impossibility_pair(2, 3, eps).unwrap();
        let pols = cw_policies(eps).unwrap();
        let revenue = |inst: &DraccInstance<Rational64>, k: usize| {
            simulate_policy(inst, pols.get(k), inst.horizon()).unwrap().cumulative() * inst.reward_scale()
        };
        assert_eq!(a.horizon(), 12);
        assert_eq!(revenue(&a, 0), Rational64::from_integer(3));
        assert_eq!(revenue(&a, 1), Rational64::from_integer(0));
        assert_eq!(revenue(&b, 1), Rational64::new(9, 10) * 6);
        let (p, q) = cw_yao_weights(eps);
        assert_eq!(p + q, Rational64::from_integer(1));
    }

    #[test]
    fn repeating_an_action_earns_the_bonus() {
        let stream = vec![vec![1.0, 0.0]; 4];
        let (inst, pols) = olsc_to_ddmdp(&stream).unwrap();
        assert_eq!(simulate_policy(&inst, pols.get(0), 4).unwrap().cumulative(), 4.0);
        assert_eq!(simulate_policy(&inst, pols.get(1), 4).unwrap().cumulative(), 1.5);
    }

    #[test]
    fn all_forward_reaches_the_top() {
        let inst = external_incomparability_instance::<f64>(4, 20).unwrap();
        let fwd = inst.constant_policy(FORWARD);
        assert_eq!(simulate_policy(&inst, &fwd, 20).unwrap().cumulative(), 0.5 * 17.0);
    }
}
