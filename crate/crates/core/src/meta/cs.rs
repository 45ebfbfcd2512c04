use serde::{Deserialize, Serialize};

use crate::chasing::{ChasabilityBound, ChasingOracle, ExploringChaser, Target};
use crate::ddmdp::{run_learner, DdMdp, Feedback, OnlineLearner, PolicyCollection, PolicySimulator, RoundDynamics, TrialReport, View};
use crate::dracc::{DraccInstance, Inventory, PriceVector, PricingPolicies};
use crate::error::{Error, Result};
use crate::experts::{FollowLazyLeader, OlscConfig};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Chase-and-switch configuration: the benchmark set and the oracle's
/// chasing-regret bound, which becomes the expert learner's switching cost.
#[derive(Clone, Debug)]
pub struct CsConfig<S, A> {
    pub policies: PolicyCollection<S, A>,
    pub sigma: f64,
}

/// Rounds played while chasing one policy.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub start: usize,
    pub end: usize,
    pub arm: usize,
    /// Sum of the chased policy's simulated rewards over the episode.
    pub policy_reward: f64,
    pub learner_reward: f64,
}

/// Follows the lazy leader over policies and restarts the chasing oracle,
/// from the current realized state, whenever the leader changes.
pub struct ChaseAndSwitch<M: DdMdp, O> {
    cfg: CsConfig<M::State, M::Action>,
    oracle: O,
    fll: Option<FollowLazyLeader>,
    sims: Vec<PolicySimulator<M::State, M::Action, M::Scalar>>,
    current: usize,
    episode: usize,
    seed: u64,
    log: Vec<EpisodeRecord>,
    scratch: Vec<f64>,
}

impl<M: DdMdp, O: ChasingOracle<M>> ChaseAndSwitch<M, O> {
    pub fn new(cfg: CsConfig<M::State, M::Action>, oracle: O) -> Result<Self> {
        if !(cfg.sigma >= 0.0) {
            return Err(Error::InvalidParams(format!("sigma {} must be nonnegative", cfg.sigma)));
        }
        Ok(ChaseAndSwitch {
            cfg,
            oracle,
            fll: None,
            sims: Vec::new(),
            current: 0,
            episode: 0,
            seed: 0,
            log: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn episode_log(&self) -> &[EpisodeRecord] {
        &self.log
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }
}

impl<M: DdMdp, O: ChasingOracle<M>> OnlineLearner<M> for ChaseAndSwitch<M, O> {
    fn name(&self) -> String {
        format!("cs:{}", self.oracle.name())
    }

    fn begin(&mut self, view: View<'_, M>, seed: u64) -> Result<()> {
        let n = self.cfg.policies.len();
        let olsc = OlscConfig::new(n, self.cfg.sigma, view.horizon(), derive_seed(seed, 0, "olsc"))?;
        self.fll = Some(FollowLazyLeader::new(&olsc));
        self.sims = self.cfg.policies.iter().map(|p| PolicySimulator::new(p, view.initial_state())).collect();
        self.current = 0;
        self.episode = 0;
        self.seed = seed;
        self.log.clear();
        self.scratch = vec![0.0; n];
        Ok(())
    }

    fn act(&mut self, view: View<'_, M>, t: usize, state: &M::State) -> Result<M::Action> {
        let arm = self.fll.as_ref().ok_or_else(|| Error::InvalidParams("learner used before begin".into()))?.leader();
        if t == 1 || arm != self.current {
            if t > 1 {
                self.episode += 1;
            }
            self.current = arm;
            self.oracle.start(
                view,
                t,
                state,
                self.cfg.policies.get(arm),
                derive_seed(self.seed, self.episode as u64, "oracle"),
            )?;
            self.log.push(EpisodeRecord { start: t, end: t, arm, policy_reward: 0.0, learner_reward: 0.0 });
        }
        let sim = &self.sims[arm];
        self.oracle.act(view, t, state, Target { state: sim.state(), action: sim.action() })
    }

    fn observe(
        &mut self,
        view: View<'_, M>,
        t: usize,
        state: &M::State,
        action: &M::Action,
        feedback: Feedback<'_, M>,
    ) -> Result<()> {
        let Feedback::Full(round) = feedback else {
            return Err(Error::InvalidParams("chase-and-switch needs full feedback".into()));
        };
        let reward = round.reward(state, action);
        let full = if self.oracle.consults_full_feedback() { Some(round) } else { None };
        self.oracle.observe(view, t, round, &reward, full)?;
        for (k, p) in self.cfg.policies.iter().enumerate() {
            self.scratch[k] = self.sims[k].advance::<M>(view, p, round)?.to_f64_lossy();
        }
        if let Some(rec) = self.log.last_mut() {
            rec.end = t;
            rec.policy_reward += self.scratch[self.current];
            rec.learner_reward += reward.to_f64_lossy();
        }
        let fll = self.fll.as_mut().expect("begin was called");
        fll.update(&self.scratch)
    }

    fn episode(&self) -> usize {
        self.episode
    }
}

/// Run chase-and-switch and benchmark it against its own policy set.
pub fn cs_run<M, O>(instance: &M, cfg: CsConfig<M::State, M::Action>, oracle: O, seed: u64) -> Result<TrialReport<M::State, M::Action, M::Scalar>>
where
    M: DdMdp,
    O: ChasingOracle<M>,
{
    let policies = cfg.policies.clone();
    let mut learner = ChaseAndSwitch::new(cfg, oracle)?;
    run_learner(instance, &mut learner, &policies, seed)
}

/// Which exploring oracle a pricing run uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    /// Square-root rate; requires k-demand, single-minded or OXS buyers.
    Kdemand,
    /// Power rate for arbitrary buyers.
    General,
    /// `kdemand` when every buyer allows it, `general` otherwise.
    #[default]
    Auto,
}

impl OracleChoice {
    pub fn resolve<R: Scalar>(self, instance: &DraccInstance<R>) -> Result<OracleChoice> {
        match self {
            OracleChoice::Auto if instance.all_in_exchange_family() => Ok(OracleChoice::Kdemand),
            OracleChoice::Auto => Ok(OracleChoice::General),
            OracleChoice::Kdemand if !instance.all_in_exchange_family() => Err(Error::InvalidParams(
                "the square-root oracle needs k-demand, single-minded or OXS buyers".into(),
            )),
            other => Ok(other),
        }
    }
}

/// Switching cost used by the pricing mechanism: the bound of the matching oracle.
pub fn lbpp_sigma<R: Scalar>(instance: &DraccInstance<R>, choice: OracleChoice) -> Result<ChasabilityBound> {
    let (c, w, t) = (instance.capacity_bound(), instance.width_bound(), instance.horizon());
    Ok(match choice.resolve(instance)? {
        OracleChoice::General => ChasabilityBound::general(c, w, t),
        _ => ChasabilityBound::kdemand(c, w, t),
    })
}

/// Learning-based posted pricing: chase-and-switch on the pricing Dd-MDP with
/// the oracle matching the buyers' valuation family.
pub fn lbpp_run<R: Scalar>(
    instance: &DraccInstance<R>,
    policies: &PricingPolicies<R>,
    choice: OracleChoice,
    seed: u64,
) -> Result<TrialReport<Inventory, PriceVector<R>, R>> {
    let choice = choice.resolve(instance)?;
    let bound = lbpp_sigma(instance, choice)?;
    let (cw, t) = (instance.cw(), instance.horizon());
    let oracle = match choice {
        OracleChoice::General => ExploringChaser::general(cw, t),
        _ => ExploringChaser::kdemand(cw, t),
    };
    cs_run(instance, CsConfig { policies: policies.clone(), sigma: bound.sigma }, oracle, seed)
}
