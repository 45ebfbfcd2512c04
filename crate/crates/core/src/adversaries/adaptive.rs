use std::sync::Arc;

use crate::ddmdp::{DdMdp, ExplicitDdMdp, ExplicitRound, ExplicitTables, History, OnlineLearner, RoundDynamics, View};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Instance whose round dynamics are produced on the fly from the revealed history.
pub struct AdaptiveAdversary<S, A, R, D> {
    horizon: usize,
    initial: S,
    scale: R,
    feasible: Arc<dyn Fn(&S, &A) -> bool + Send + Sync>,
    respond: Arc<dyn Fn(usize, History<'_, S, A>) -> D + Send + Sync>,
}

impl<S, A, R, D> AdaptiveAdversary<S, A, R, D> {
    pub fn new(
        horizon: usize,
        initial: S,
        scale: R,
        feasible: impl Fn(&S, &A) -> bool + Send + Sync + 'static,
        respond: impl Fn(usize, History<'_, S, A>) -> D + Send + Sync + 'static,
    ) -> Self {
        AdaptiveAdversary { horizon, initial, scale, feasible: Arc::new(feasible), respond: Arc::new(respond) }
    }
}

impl<S, A, R, D> DdMdp for AdaptiveAdversary<S, A, R, D>
where
    S: Clone + PartialEq + std::fmt::Debug + Send + Sync,
    A: Clone + PartialEq + std::fmt::Debug + Send + Sync,
    R: Scalar,
    D: RoundDynamics<S, A, R>,
{
    type Scalar = R;
    type State = S;
    type Action = A;
    type Round = D;

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn initial_state(&self) -> S {
        self.initial.clone()
    }

    fn is_feasible(&self, s: &S, x: &A) -> bool {
        (self.feasible)(s, x)
    }

    fn round(&self, t: usize, history: History<'_, S, A>) -> D {
        (self.respond)(t, history)
    }

    fn reward_scale(&self) -> R {
        self.scale.clone()
    }
}

/// Index of the rewarding start state.
pub const TRAP_SOURCE: usize = 0;
/// Index of the absorbing zero-reward state.
pub const TRAP_SINK: usize = 1;

/// Two states, two actions. Every round pays 1 in the source and 0 in the sink;
/// only the first round can move the learner, and only `trap` moves it to the sink.
pub fn trap_instance<R: Scalar>(horizon: usize, trap: usize) -> Result<ExplicitDdMdp<R>> {
    if horizon < 2 || trap > 1 {
        return Err(Error::InvalidParams(format!("need T >= 2 and trap in {{0, 1}}, got T = {horizon}, trap = {trap}")));
    }
    let reward = vec![vec![R::one(), R::one()], vec![R::zero(), R::zero()]];
    let mut first_next = vec![vec![TRAP_SOURCE; 2], vec![TRAP_SINK; 2]];
    first_next[TRAP_SOURCE][trap] = TRAP_SINK;
    let first = ExplicitRound(Arc::new(ExplicitTables { next: first_next, reward: reward.clone() }));
    let rest = ExplicitRound(Arc::new(ExplicitTables { next: vec![vec![TRAP_SOURCE; 2], vec![TRAP_SINK; 2]], reward }));
    let mut rounds = vec![first];
    rounds.extend(std::iter::repeat_n(rest, horizon - 1));
    ExplicitDdMdp::new(
        vec!["s".into(), "s'".into()],
        vec!["x".into(), "x'".into()],
        vec![vec![0, 1], vec![0, 1]],
        TRAP_SOURCE,
        rounds,
    )
}

/// Pick the trap against the learner's more frequent first action over `probes`
/// fresh round-1 replays. Ties trap action 0.
pub fn calibrate_trap<R, L, F>(horizon: usize, factory: F, probes: usize, master_seed: u64) -> Result<usize>
where
    R: Scalar,
    F: Fn() -> L,
    L: OnlineLearner<ExplicitDdMdp<R>>,
{
    let probe = trap_instance::<R>(horizon, 0)?;
    let view = View::new(&probe);
    let mut counts = [0usize; 2];
    for k in 0..probes {
        let mut learner = factory();
        learner.begin(view, derive_seed(master_seed, k as u64, "trap-probe"))?;
        let x = learner.act(view, 1, &probe.initial_state())?;
        counts[x.min(1)] += 1;
    }
    Ok(if counts[1] > counts[0] { 1 } else { 0 })
}
