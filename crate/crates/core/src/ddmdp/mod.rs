//! Dynamic deterministic MDPs: instances, policies, simulation, the game loop
//! and regret accounting.

mod explicit;
mod simulate;

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{One, Scalar};

pub use explicit::{ExplicitDdMdp, ExplicitFile, ExplicitRound, ExplicitRoundFile, ExplicitTables};
pub use simulate::{
    account, external_regret, play, policy_regret, run_learner, simulate_policy, simulate_policy_with_history,
    FixedPolicyLearner, PlayLog, PolicySimulator, TrialReport,
};

/// State transition of a single round.
pub trait Transition<S, A> {
    fn next_state(&self, s: &S, x: &A) -> S;
}

/// Transition and reward of a single round.
pub trait RoundDynamics<S, A, R>: Transition<S, A> {
    /// Reward in `[0, 1]`.
    fn reward(&self, s: &S, x: &A) -> R;
}

/// What the adversary has seen before choosing round `t`: the learner's states
/// `s_1..s_t` and actions `x_1..x_{t-1}`.
#[derive(Clone, Copy, Debug)]
pub struct History<'a, S, A> {
    pub states: &'a [S],
    pub actions: &'a [A],
}

impl<S, A> History<'_, S, A> {
    pub fn empty() -> Self {
        History { states: &[], actions: &[] }
    }
}

/// A T-round game chosen by an adversary.
///
/// `round` must be a pure function of `(t, history)`. Oblivious instances
/// ignore the history.
pub trait DdMdp: Send + Sync {
    type Scalar: Scalar;
    type State: Clone + PartialEq + Debug + Send + Sync;
    type Action: Clone + PartialEq + Debug + Send + Sync;
    type Round: RoundDynamics<Self::State, Self::Action, Self::Scalar>;

    fn horizon(&self) -> usize;
    fn initial_state(&self) -> Self::State;
    fn is_feasible(&self, s: &Self::State, x: &Self::Action) -> bool;
    fn round(&self, t: usize, history: History<'_, Self::State, Self::Action>) -> Self::Round;

    /// Factor that converts instance rewards back to native units.
    fn reward_scale(&self) -> Self::Scalar {
        Self::Scalar::one()
    }
}

/// The part of an instance a learner may look at: horizon, start state and
/// feasibility. Round dynamics only reach learners through [`Feedback`].
pub struct View<'a, M>(&'a M);

impl<'a, M: DdMdp> View<'a, M> {
    pub fn new(instance: &'a M) -> Self {
        View(instance)
    }
    pub fn horizon(&self) -> usize {
        self.0.horizon()
    }
    pub fn initial_state(&self) -> M::State {
        self.0.initial_state()
    }
    pub fn is_feasible(&self, s: &M::State, x: &M::Action) -> bool {
        self.0.is_feasible(s, x)
    }
    pub fn reward_scale(&self) -> M::Scalar {
        self.0.reward_scale()
    }
}

impl<M> Clone for View<'_, M> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<M> Copy for View<'_, M> {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedbackMode {
    Full,
    Bandit,
}

/// Information revealed after the learner commits its action.
pub enum Feedback<'a, M: DdMdp> {
    Full(&'a M::Round),
    Bandit { transition: &'a dyn Transition<M::State, M::Action>, reward: M::Scalar },
}

impl<'a, M: DdMdp> Feedback<'a, M> {
    pub fn transition(&self) -> &'a dyn Transition<M::State, M::Action> {
        match self {
            Feedback::Full(r) => *r,
            Feedback::Bandit { transition, .. } => *transition,
        }
    }
}

/// Online decision procedure playing a Dd-MDP.
pub trait OnlineLearner<M: DdMdp> {
    fn name(&self) -> String;

    fn feedback_mode(&self) -> FeedbackMode {
        FeedbackMode::Full
    }

    fn begin(&mut self, view: View<'_, M>, seed: u64) -> Result<()>;

    fn act(&mut self, view: View<'_, M>, t: usize, state: &M::State) -> Result<M::Action>;

    fn observe(
        &mut self,
        view: View<'_, M>,
        t: usize,
        state: &M::State,
        action: &M::Action,
        feedback: Feedback<'_, M>,
    ) -> Result<()>;

    /// Identifier of the current episode (constant for learners without restarts).
    fn episode(&self) -> usize {
        0
    }
}

type Rule<S, A> = Arc<dyn Fn(&S) -> A + Send + Sync>;

/// A state-to-action map.
pub struct Policy<S, A> {
    id: String,
    rule: Rule<S, A>,
}

impl<S, A> Clone for Policy<S, A> {
    fn clone(&self) -> Self {
        Policy { id: self.id.clone(), rule: Arc::clone(&self.rule) }
    }
}

impl<S, A> Debug for Policy<S, A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Policy").field("id", &self.id).finish()
    }
}

impl<S, A> Policy<S, A> {
    pub fn new(id: impl Into<String>, rule: impl Fn(&S) -> A + Send + Sync + 'static) -> Self {
        Policy { id: id.into(), rule: Arc::new(rule) }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn act(&self, s: &S) -> A {
        (self.rule)(s)
    }
}

/// Finite benchmark set of policies.
pub struct PolicyCollection<S, A> {
    policies: Vec<Policy<S, A>>,
}

impl<S, A> Clone for PolicyCollection<S, A> {
    fn clone(&self) -> Self {
        PolicyCollection { policies: self.policies.clone() }
    }
}

impl<S, A> Debug for PolicyCollection<S, A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.policies.iter().map(|p| &p.id)).finish()
    }
}

impl<S, A> PolicyCollection<S, A> {
    pub fn new(policies: Vec<Policy<S, A>>) -> Result<Self> {
        if policies.is_empty() {
            return Err(Error::EmptyCollection);
        }
        let mut seen = std::collections::HashSet::new();
        for p in &policies {
            if !seen.insert(p.id.clone()) {
                return Err(Error::DuplicatePolicyId(p.id.clone()));
            }
        }
        Ok(PolicyCollection { policies })
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn get(&self, i: usize) -> &Policy<S, A> {
        &self.policies[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Policy<S, A>> {
        self.policies.iter()
    }

    pub fn ids(&self) -> Vec<String> {
        self.policies.iter().map(|p| p.id.clone()).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.policies.iter().position(|p| p.id == id)
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        PolicyCollection::new(indices.iter().map(|&i| self.policies[i].clone()).collect())
    }
}

/// Simulated trajectory of a policy.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTrace<S, A, R> {
    pub states: Vec<S>,
    pub actions: Vec<A>,
    pub rewards: Vec<R>,
    /// State after the last simulated round.
    pub terminal: S,
}

impl<S, A, R: Scalar> PolicyTrace<S, A, R> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn cumulative(&self) -> R {
        R::sum_of(&self.rewards)
    }
}

/// Stable 64-bit digest of a value's debug representation.
pub fn digest<T: Debug>(value: &T) -> String {
    format!("{:016x}", crate::rng::fnv1a(format!("{value:?}").as_bytes()))
}
