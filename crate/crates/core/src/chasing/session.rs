use rayon::prelude::*;

use super::{ChasingOracle, Target};
use crate::ddmdp::{DdMdp, History, Policy, PolicySimulator, RoundDynamics, Transition, View};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::stats;

/// Everything visible in one round of a chasing session.
pub struct ChaseStep<'a, M: DdMdp> {
    pub t: usize,
    pub state: &'a M::State,
    pub target_state: &'a M::State,
    pub target_action: &'a M::Action,
    pub action: &'a M::Action,
    pub round: &'a M::Round,
    pub explored: bool,
    pub reward_oracle: &'a M::Scalar,
    pub reward_policy: &'a M::Scalar,
}

/// One realization of a chasing session over `[t_init, t_final]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChasingReport<S, R> {
    pub t_init: usize,
    pub t_final: usize,
    pub seed: u64,
    /// Target's reward minus the oracle's, in instance units.
    pub cr: R,
    pub oracle_rewards: Vec<R>,
    pub policy_rewards: Vec<R>,
    pub explored: Vec<bool>,
    pub final_state: S,
    pub final_target_state: S,
    pub reward_scale: R,
}

impl<S, R: Scalar> ChasingReport<S, R> {
    /// Chasing regret in native units.
    pub fn cr_native(&self) -> R {
        self.cr.clone() * self.reward_scale.clone()
    }

    /// Chasing regret over `[t_init, t]`, instance units.
    pub fn cr_until(&self, t: usize) -> R {
        let n = (t + 1).saturating_sub(self.t_init).min(self.policy_rewards.len());
        R::sum_of(&self.policy_rewards[..n]) - R::sum_of(&self.oracle_rewards[..n])
    }

    /// Largest prefix chasing regret over all `t_final' <= t_final`, native units.
    pub fn max_prefix_cr_native(&self) -> R {
        let mut acc = R::zero();
        let mut best = R::zero();
        for (p, o) in self.policy_rewards.iter().zip(&self.oracle_rewards) {
            acc = acc + p.clone() - o.clone();
            best = R::max_of(best, acc.clone());
        }
        best * self.reward_scale.clone()
    }
}

/// Run `oracle` chasing `policy` from `(t_init, s_init)` through `t_final` on an
/// oblivious instance.
#[allow(clippy::too_many_arguments)]
pub fn run_chase<M, O>(
    instance: &M,
    oracle: &mut O,
    policy: &Policy<M::State, M::Action>,
    t_init: usize,
    s_init: &M::State,
    t_final: usize,
    seed: u64,
    mut probe: Option<&mut dyn FnMut(&ChaseStep<'_, M>)>,
) -> Result<ChasingReport<M::State, M::Scalar>>
where
    M: DdMdp,
    O: ChasingOracle<M> + ?Sized,
{
    if t_init < 1 || t_init > t_final || t_final > instance.horizon() {
        return Err(Error::InvalidParams(format!(
            "chasing window [{t_init}, {t_final}] outside [1, {}]",
            instance.horizon()
        )));
    }
    let view = View::new(instance);
    let mut target = PolicySimulator::new(policy, instance.initial_state());
    for t in 1..t_init {
        let round = instance.round(t, History::empty());
        target.advance::<M>(view, policy, &round)?;
    }
    oracle.start(view, t_init, s_init, policy, seed)?;
    let span = t_final - t_init + 1;
    let mut oracle_rewards = Vec::with_capacity(span);
    let mut policy_rewards = Vec::with_capacity(span);
    let mut explored = Vec::with_capacity(span);
    let mut state = s_init.clone();
    for t in t_init..=t_final {
        let round = instance.round(t, History::empty());
        let x = oracle.act(view, t, &state, Target { state: target.state(), action: target.action() })?;
        if !instance.is_feasible(&state, &x) {
            return Err(Error::InfeasibleAction { t, state: format!("{state:?}"), action: format!("{x:?}") });
        }
        let r_oracle = round.reward(&state, &x);
        let r_policy = round.reward(target.state(), target.action());
        let was_explored = oracle.explored();
        if let Some(p) = probe.as_mut() {
            p(&ChaseStep {
                t,
                state: &state,
                target_state: target.state(),
                target_action: target.action(),
                action: &x,
                round: &round,
                explored: was_explored,
                reward_oracle: &r_oracle,
                reward_policy: &r_policy,
            });
        }
        let next = round.next_state(&state, &x);
        let full = if oracle.consults_full_feedback() { Some(&round) } else { None };
        oracle.observe(view, t, &round, &r_oracle, full)?;
        target.advance::<M>(view, policy, &round)?;
        state = next;
        oracle_rewards.push(r_oracle);
        policy_rewards.push(r_policy);
        explored.push(was_explored);
    }
    let cr = M::Scalar::sum_of(&policy_rewards) - M::Scalar::sum_of(&oracle_rewards);
    Ok(ChasingReport {
        t_init,
        t_final,
        seed,
        cr,
        oracle_rewards,
        policy_rewards,
        explored,
        final_state: state,
        final_target_state: target.state().clone(),
        reward_scale: instance.reward_scale(),
    })
}

/// Monte-Carlo estimate of expected chasing regret.
#[derive(Clone, Debug)]
pub struct CrEstimate<S, R> {
    /// Mean chasing regret, instance units.
    pub mean: f64,
    pub stderr: f64,
    pub mean_native: f64,
    pub stderr_native: f64,
    pub reports: Vec<ChasingReport<S, R>>,
}

/// Estimate expected chasing regret over `n_seeds` oracle seeds.
#[allow(clippy::too_many_arguments)]
pub fn estimate_cr<M, O, F>(
    factory: F,
    instance: &M,
    policy: &Policy<M::State, M::Action>,
    t_init: usize,
    s_init: &M::State,
    t_final: usize,
    n_seeds: usize,
    master_seed: u64,
) -> Result<CrEstimate<M::State, M::Scalar>>
where
    M: DdMdp,
    O: ChasingOracle<M>,
    F: Fn() -> O + Sync,
    M::State: Send,
    M::Scalar: Send,
{
    if n_seeds == 0 {
        return Err(Error::InvalidParams("at least one seed is required".into()));
    }
    let reports: Vec<_> = (0..n_seeds)
        .into_par_iter()
        .map(|k| {
            let mut oracle = factory();
            run_chase(instance, &mut oracle, policy, t_init, s_init, t_final, derive_seed(master_seed, k as u64, "chase"), None)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = reports.iter().map(|r| r.cr.to_f64_lossy()).collect();
    let scale = instance.reward_scale().to_f64_lossy();
    let (mean, stderr) = stats::mean_stderr(&values);
    Ok(CrEstimate { mean, stderr, mean_native: mean * scale, stderr_native: stderr * scale, reports })
}

/// Outcome of comparing an oracle's reward across different start states.
#[derive(Clone, Debug, PartialEq)]
pub struct StatelessOutcome {
    pub stateless: bool,
    /// Largest gap between mean cumulative rewards over all pairs, instance units.
    pub max_deviation: f64,
    /// Whether the comparison was exact (deterministic oracle).
    pub exact: bool,
}

/// Check empirically whether an oracle's expected reward is independent of its
/// start state.
///
/// Both start states of a pair are run with the same seeds. A deterministic
/// oracle must produce identical per-round rewards; a randomized one passes if
/// the means agree within three pooled standard errors.
#[allow(clippy::too_many_arguments)]
pub fn stateless_check<M, O, F>(
    factory: F,
    instance: &M,
    policy: &Policy<M::State, M::Action>,
    t_init: usize,
    pairs: &[(M::State, M::State)],
    t_final: usize,
    n_seeds: usize,
    master_seed: u64,
) -> Result<StatelessOutcome>
where
    M: DdMdp,
    O: ChasingOracle<M>,
    F: Fn() -> O + Sync,
    M::State: Send,
    M::Scalar: Send,
{
    let exact = factory().is_deterministic();
    let runs = if exact { 1 } else { n_seeds.max(2) };
    let mut stateless = true;
    let mut max_dev = 0.0f64;
    for (a, b) in pairs {
        let sample = |s: &M::State| -> Result<Vec<Vec<M::Scalar>>> {
            (0..runs)
                .into_par_iter()
                .map(|k| {
                    let mut oracle = factory();
                    let seed = derive_seed(master_seed, k as u64, "stateless");
                    run_chase(instance, &mut oracle, policy, t_init, s, t_final, seed, None).map(|r| r.oracle_rewards)
                })
                .collect()
        };
        let ra = sample(a)?;
        let rb = sample(b)?;
        let ta: Vec<f64> = ra.iter().map(|r| M::Scalar::sum_of(r).to_f64_lossy()).collect();
        let tb: Vec<f64> = rb.iter().map(|r| M::Scalar::sum_of(r).to_f64_lossy()).collect();
        let dev = (stats::mean(&ta) - stats::mean(&tb)).abs();
        max_dev = max_dev.max(dev);
        let ok = if exact {
            ra == rb
        } else {
            let pooled = (stats::sample_variance(&ta) / ta.len() as f64 + stats::sample_variance(&tb) / tb.len() as f64).sqrt();
            if pooled == 0.0 {
                dev == 0.0
            } else {
                dev <= 3.0 * pooled
            }
        };
        stateless &= ok;
    }
    Ok(StatelessOutcome { stateless, max_deviation: max_dev, exact })
}
