use super::{DdMdp, Feedback, FeedbackMode, History, OnlineLearner, Policy, PolicyCollection, PolicyTrace, RoundDynamics, Transition, View};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Zero};

fn infeasible<S: std::fmt::Debug, A: std::fmt::Debug>(t: usize, s: &S, x: &A) -> Error {
    Error::InfeasibleAction { t, state: format!("{s:?}"), action: format!("{x:?}") }
}

/// Incremental simulation of one policy, advanced one round at a time.
#[derive(Clone, Debug)]
pub struct PolicySimulator<S, A, R> {
    state: S,
    action: A,
    next_round: usize,
    cumulative: R,
}

impl<S: Clone + std::fmt::Debug, A: Clone + std::fmt::Debug, R: Scalar> PolicySimulator<S, A, R> {
    pub fn new(policy: &Policy<S, A>, initial: S) -> Self {
        let action = policy.act(&initial);
        PolicySimulator { state: initial, action, next_round: 1, cumulative: R::zero() }
    }

    /// Current simulated state.
    pub fn state(&self) -> &S {
        &self.state
    }

    /// Action the policy takes at the current simulated state.
    pub fn action(&self) -> &A {
        &self.action
    }

    /// Round the next call to `advance` simulates.
    pub fn next_round(&self) -> usize {
        self.next_round
    }

    pub fn cumulative(&self) -> &R {
        &self.cumulative
    }

    fn check<M>(&self, view: View<'_, M>) -> Result<()>
    where
        M: DdMdp<State = S, Action = A, Scalar = R>,
        S: PartialEq + Send + Sync,
        A: PartialEq + Send + Sync,
    {
        if view.is_feasible(&self.state, &self.action) {
            Ok(())
        } else {
            Err(infeasible(self.next_round, &self.state, &self.action))
        }
    }

    /// Advance through one round with full dynamics; returns the round reward.
    pub fn advance<M>(&mut self, view: View<'_, M>, policy: &Policy<S, A>, round: &M::Round) -> Result<R>
    where
        M: DdMdp<State = S, Action = A, Scalar = R>,
        S: PartialEq + Send + Sync,
        A: PartialEq + Send + Sync,
    {
        self.check(view)?;
        let r = round.reward(&self.state, &self.action);
        self.cumulative = self.cumulative.clone() + r.clone();
        self.step(policy, round.next_state(&self.state, &self.action));
        Ok(r)
    }

    /// Advance using only the transition, as in bandit feedback.
    pub fn advance_transition<M>(
        &mut self,
        view: View<'_, M>,
        policy: &Policy<S, A>,
        transition: &dyn Transition<S, A>,
    ) -> Result<()>
    where
        M: DdMdp<State = S, Action = A, Scalar = R>,
        S: PartialEq + Send + Sync,
        A: PartialEq + Send + Sync,
    {
        self.check(view)?;
        self.step(policy, transition.next_state(&self.state, &self.action));
        Ok(())
    }

    fn step(&mut self, policy: &Policy<S, A>, next: S) {
        self.state = next;
        self.action = policy.act(&self.state);
        self.next_round += 1;
    }
}

/// Simulate `policy` for rounds `1..=upto` of an oblivious instance.
pub fn simulate_policy<M: DdMdp>(
    instance: &M,
    policy: &Policy<M::State, M::Action>,
    upto: usize,
) -> Result<PolicyTrace<M::State, M::Action, M::Scalar>> {
    simulate_policy_with_history(instance, policy, upto, &[], &[])
}

/// Simulate `policy` against the rounds an adaptive instance produced for a
/// learner whose realized trajectory is `(states, actions)`.
pub fn simulate_policy_with_history<M: DdMdp>(
    instance: &M,
    policy: &Policy<M::State, M::Action>,
    upto: usize,
    states: &[M::State],
    actions: &[M::Action],
) -> Result<PolicyTrace<M::State, M::Action, M::Scalar>> {
    if upto > instance.horizon() {
        return Err(Error::InvalidParams(format!("upto {upto} exceeds horizon {}", instance.horizon())));
    }
    let mut trace = PolicyTrace {
        states: Vec::with_capacity(upto),
        actions: Vec::with_capacity(upto),
        rewards: Vec::with_capacity(upto),
        terminal: instance.initial_state(),
    };
    let mut sim = PolicySimulator::new(policy, instance.initial_state());
    for t in 1..=upto {
        let round = instance.round(t, history_prefix(states, actions, t));
        trace.states.push(sim.state().clone());
        trace.actions.push(sim.action().clone());
        let r = sim.advance::<M>(View::new(instance), policy, &round)?;
        trace.rewards.push(r);
    }
    trace.terminal = sim.state().clone();
    Ok(trace)
}

fn history_prefix<'a, S, A>(states: &'a [S], actions: &'a [A], t: usize) -> History<'a, S, A> {
    History { states: &states[..t.min(states.len())], actions: &actions[..(t - 1).min(actions.len())] }
}

/// Best simulated cumulative reward minus the learner's.
pub fn policy_regret<S, A, R: Scalar>(report_rewards: &[R], traces: &[PolicyTrace<S, A, R>]) -> Result<R> {
    let learner = R::sum_of(report_rewards);
    let mut best: Option<R> = None;
    for trace in traces {
        if trace.rewards.len() != report_rewards.len() {
            return Err(Error::LengthMismatch(trace.rewards.len(), report_rewards.len()));
        }
        let c = trace.cumulative();
        best = Some(match best {
            Some(b) => R::max_of(b, c),
            None => c,
        });
    }
    best.map(|b| b - learner).ok_or(Error::EmptyCollection)
}

/// Best policy evaluated at the learner's realized states minus the learner's reward.
pub fn external_regret<M: DdMdp>(
    instance: &M,
    learner_states: &[M::State],
    learner_actions: &[M::Action],
    learner_rewards: &[M::Scalar],
    policies: &PolicyCollection<M::State, M::Action>,
) -> Result<M::Scalar> {
    if learner_states.len() != learner_rewards.len() {
        return Err(Error::LengthMismatch(learner_states.len(), learner_rewards.len()));
    }
    let mut totals = vec![M::Scalar::zero(); policies.len()];
    for (i, s) in learner_states.iter().enumerate() {
        let t = i + 1;
        let round = instance.round(t, history_prefix(learner_states, learner_actions, t));
        for (k, p) in policies.iter().enumerate() {
            let x = p.act(s);
            if !instance.is_feasible(s, &x) {
                return Err(infeasible(t, s, &x));
            }
            totals[k] = totals[k].clone() + round.reward(s, &x);
        }
    }
    let best = totals.into_iter().reduce(M::Scalar::max_of).ok_or(Error::EmptyCollection)?;
    Ok(best - M::Scalar::sum_of(learner_rewards))
}

/// Raw outcome of the decision loop, before any benchmark accounting.
#[derive(Clone, Debug, PartialEq)]
pub struct PlayLog<S, A, R> {
    pub learner: String,
    pub seed: u64,
    pub states: Vec<S>,
    pub actions: Vec<A>,
    pub rewards: Vec<R>,
    pub episode_ids: Vec<usize>,
    pub terminal: S,
}

/// Run the game loop. Rewards are read only at the learner's own `(s_t, x_t)`.
pub fn play<M, L>(instance: &M, learner: &mut L, seed: u64) -> Result<PlayLog<M::State, M::Action, M::Scalar>>
where
    M: DdMdp,
    L: OnlineLearner<M> + ?Sized,
{
    let view = View::new(instance);
    let horizon = instance.horizon();
    learner.begin(view, seed)?;
    let mut states = Vec::with_capacity(horizon);
    let mut actions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut episode_ids = Vec::with_capacity(horizon);
    let mut s = instance.initial_state();
    for t in 1..=horizon {
        let x = learner.act(view, t, &s)?;
        if !instance.is_feasible(&s, &x) {
            return Err(infeasible(t, &s, &x));
        }
        states.push(s.clone());
        let round = instance.round(t, History { states: &states, actions: &actions });
        let r = round.reward(&s, &x);
        let next = round.next_state(&s, &x);
        let feedback = match learner.feedback_mode() {
            FeedbackMode::Full => Feedback::Full(&round),
            FeedbackMode::Bandit => Feedback::Bandit { transition: &round, reward: r.clone() },
        };
        learner.observe(view, t, &s, &x, feedback)?;
        episode_ids.push(learner.episode());
        actions.push(x);
        rewards.push(r);
        s = next;
    }
    Ok(PlayLog { learner: learner.name(), seed, states, actions, rewards, episode_ids, terminal: s })
}

/// Complete record of one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport<S, A, R> {
    pub learner: String,
    pub rng_seed: u64,
    pub learner_states: Vec<S>,
    pub learner_actions: Vec<A>,
    pub learner_rewards: Vec<R>,
    pub terminal_state: S,
    pub policy_ids: Vec<String>,
    /// Simulated cumulative reward of every policy, in collection order.
    pub policy_rewards: Vec<R>,
    pub policy_regret: R,
    pub external_regret: R,
    /// Policy regret over rounds `1..=t`, indexed by `t - 1`.
    pub regret_curve: Vec<R>,
    pub episode_ids: Vec<usize>,
    pub switched: Vec<bool>,
    pub switch_count: usize,
    pub episodes: usize,
    /// Multiply instance rewards by this to get native units (revenue for pricing).
    pub reward_scale: R,
}

impl<S: std::fmt::Debug, A: std::fmt::Debug, R: Scalar> TrialReport<S, A, R> {
    pub fn horizon(&self) -> usize {
        self.learner_rewards.len()
    }

    pub fn learner_total(&self) -> R {
        R::sum_of(&self.learner_rewards)
    }

    pub fn best_policy_total(&self) -> R {
        self.policy_rewards.iter().cloned().reduce(R::max_of).unwrap_or_else(R::zero)
    }

    /// Policy regret in native units.
    pub fn native_policy_regret(&self) -> R {
        self.policy_regret.clone() * self.reward_scale.clone()
    }

    pub fn native_external_regret(&self) -> R {
        self.external_regret.clone() * self.reward_scale.clone()
    }

    /// Recheck the report's internal accounting. Returns a description of the
    /// first violated invariant.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.learner_rewards.len();
        if self.learner_states.len() != n || self.learner_actions.len() != n || self.episode_ids.len() != n {
            return Err("trace lengths differ".into());
        }
        let (zero, one) = (R::zero(), R::one());
        if let Some(t) = self.learner_rewards.iter().position(|r| *r < zero || *r > one) {
            return Err(format!("learner reward out of range at round {}", t + 1));
        }
        let expected = self.best_policy_total() - self.learner_total();
        if expected != self.policy_regret {
            return Err(format!("policy regret {} differs from recomputed {}", self.policy_regret, expected));
        }
        if n > 0 && self.regret_curve.last() != Some(&self.policy_regret) {
            return Err("regret curve does not end at the policy regret".into());
        }
        let switches = self.switched.iter().filter(|b| **b).count();
        if switches != self.switch_count {
            return Err("switch count does not match switch flags".into());
        }
        Ok(())
    }

    /// Per-round CSV with columns t, state_digest, action_digest, reward, episode_id, switched.
    pub fn per_round_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "state_digest", "action_digest", "reward", "episode_id", "switched"])?;
        for i in 0..self.horizon() {
            w.write_record([
                (i + 1).to_string(),
                super::digest(&self.learner_states[i]),
                super::digest(&self.learner_actions[i]),
                (self.learner_rewards[i].clone() * self.reward_scale.clone()).to_string(),
                self.episode_ids[i].to_string(),
                u8::from(self.switched[i]).to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Benchmark a play log against `policies`: simulated policy rewards, both
/// regret notions, prefix regret curve and episode statistics.
pub fn account<M: DdMdp>(
    instance: &M,
    log: PlayLog<M::State, M::Action, M::Scalar>,
    policies: &PolicyCollection<M::State, M::Action>,
) -> Result<TrialReport<M::State, M::Action, M::Scalar>> {
    let view = View::new(instance);
    let horizon = log.states.len();
    let mut sims: Vec<_> = policies.iter().map(|p| PolicySimulator::new(p, instance.initial_state())).collect();
    let mut external = vec![M::Scalar::zero(); policies.len()];
    let mut curve = Vec::with_capacity(horizon);
    let mut learner_cum = M::Scalar::zero();
    for t in 1..=horizon {
        let round = instance.round(t, history_prefix(&log.states, &log.actions, t));
        let s = &log.states[t - 1];
        for (k, p) in policies.iter().enumerate() {
            sims[k].advance::<M>(view, p, &round)?;
            let x = p.act(s);
            if !instance.is_feasible(s, &x) {
                return Err(infeasible(t, s, &x));
            }
            external[k] = external[k].clone() + round.reward(s, &x);
        }
        learner_cum = learner_cum + log.rewards[t - 1].clone();
        let best = sims.iter().map(|s| s.cumulative().clone()).reduce(M::Scalar::max_of).expect("nonempty collection");
        curve.push(best - learner_cum.clone());
    }
    let policy_rewards: Vec<_> = sims.iter().map(|s| s.cumulative().clone()).collect();
    let best = policy_rewards.iter().cloned().reduce(M::Scalar::max_of).expect("nonempty collection");
    let best_external = external.into_iter().reduce(M::Scalar::max_of).expect("nonempty collection");
    let mut switched = vec![false; horizon];
    for t in 1..horizon {
        switched[t] = log.episode_ids[t] != log.episode_ids[t - 1];
    }
    let switch_count = switched.iter().filter(|b| **b).count();
    Ok(TrialReport {
        learner: log.learner,
        rng_seed: log.seed,
        policy_ids: policies.ids(),
        policy_regret: best - learner_cum.clone(),
        external_regret: best_external - learner_cum,
        policy_rewards,
        regret_curve: curve,
        episodes: if horizon == 0 { 0 } else { switch_count + 1 },
        switch_count,
        switched,
        episode_ids: log.episode_ids,
        learner_states: log.states,
        learner_actions: log.actions,
        learner_rewards: log.rewards,
        terminal_state: log.terminal,
        reward_scale: instance.reward_scale(),
    })
}

/// Play `learner` on `instance` and benchmark it against `policies`.
pub fn run_learner<M, L>(
    instance: &M,
    learner: &mut L,
    policies: &PolicyCollection<M::State, M::Action>,
    seed: u64,
) -> Result<TrialReport<M::State, M::Action, M::Scalar>>
where
    M: DdMdp,
    L: OnlineLearner<M> + ?Sized,
{
    let log = play(instance, learner, seed)?;
    account(instance, log, policies)
}

/// Learner that always follows one fixed policy.
pub struct FixedPolicyLearner<S, A> {
    policy: Policy<S, A>,
}

impl<S, A> FixedPolicyLearner<S, A> {
    pub fn new(policy: Policy<S, A>) -> Self {
        FixedPolicyLearner { policy }
    }
}

impl<M: DdMdp> OnlineLearner<M> for FixedPolicyLearner<M::State, M::Action> {
    fn name(&self) -> String {
        format!("fixed-policy:{}", self.policy.id())
    }

    fn begin(&mut self, _view: View<'_, M>, _seed: u64) -> Result<()> {
        Ok(())
    }

    fn act(&mut self, _view: View<'_, M>, _t: usize, state: &M::State) -> Result<M::Action> {
        Ok(self.policy.act(state))
    }

    fn observe(
        &mut self,
        _view: View<'_, M>,
        _t: usize,
        _state: &M::State,
        _action: &M::Action,
        _feedback: Feedback<'_, M>,
    ) -> Result<()> {
        Ok(())
    }
}
