use crate::chasing::{ChasingOracle, Target};
use crate::ddmdp::{run_learner, DdMdp, Feedback, FeedbackMode, OnlineLearner, PolicyCollection, PolicySimulator, TrialReport, View};
use crate::error::{Error, Result};
use crate::experts::{BanditLearner, MbpConfig, MbpKind};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// Smallest `tau` with `tau^3 >= T`.
pub fn default_period(horizon: usize) -> usize {
    let mut tau = (horizon as f64).cbrt().round() as usize;
    while tau.saturating_mul(tau).saturating_mul(tau) < horizon {
        tau += 1;
    }
    while tau > 1 && (tau - 1).pow(3) >= horizon {
        tau -= 1;
    }
    tau.max(1)
}

#[derive(Clone, Debug)]
pub struct FlpConfig<S, A> {
    pub policies: PolicyCollection<S, A>,
    /// Period length; `None` uses the cube-root schedule.
    pub tau: Option<usize>,
    pub mbp: MbpKind,
    /// Chasing-regret bound of the oracle, used only to warn when `tau <= sigma`.
    pub sigma: Option<f64>,
}

/// Bandit meta-algorithm over fixed-length periods: a bandit learner picks a
/// policy per period, the oracle chases it from the period's start state, and the
/// learner is paid the period's reward divided by `tau`.
pub struct ChaseFixedPeriods<M: DdMdp, O> {
    cfg: FlpConfig<M::State, M::Action>,
    oracle: O,
    tau: usize,
    mbp: Option<Box<dyn BanditLearner>>,
    sims: Vec<PolicySimulator<M::State, M::Action, M::Scalar>>,
    current: usize,
    period: usize,
    period_reward: f64,
    seed: u64,
    warnings: Vec<String>,
}

impl<M: DdMdp, O: ChasingOracle<M>> ChaseFixedPeriods<M, O> {
    pub fn new(cfg: FlpConfig<M::State, M::Action>, oracle: O) -> Result<Self> {
        if oracle.consults_full_feedback() {
            return Err(Error::NotBanditApplicable);
        }
        if !oracle.declared_stateless() {
            return Err(Error::NotStateless);
        }
        if cfg.tau == Some(0) {
            return Err(Error::InvalidParams("period length must be at least 1".into()));
        }
        Ok(ChaseFixedPeriods {
            cfg,
            oracle,
            tau: 1,
            mbp: None,
            sims: Vec::new(),
            current: 0,
            period: 0,
            period_reward: 0.0,
            seed: 0,
            warnings: Vec::new(),
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

impl<M: DdMdp, O: ChasingOracle<M>> OnlineLearner<M> for ChaseFixedPeriods<M, O> {
    fn name(&self) -> String {
        format!("flp:{}", self.oracle.name())
    }

    fn feedback_mode(&self) -> FeedbackMode {
        FeedbackMode::Bandit
    }

    fn begin(&mut self, view: View<'_, M>, seed: u64) -> Result<()> {
        let horizon = view.horizon();
        self.tau = self.cfg.tau.unwrap_or_else(|| default_period(horizon));
        self.warnings.clear();
        if let Some(sigma) = self.cfg.sigma {
            if self.tau as f64 <= sigma {
                let msg = format!("period length {} does not exceed the chasing bound {sigma}", self.tau);
                log::warn!("{msg}");
                self.warnings.push(msg);
            }
        }
        let periods = horizon.div_ceil(self.tau).max(1);
        let cfg = MbpConfig::new(self.cfg.policies.len(), periods, derive_seed(seed, 0, "mbp"))?;
        self.mbp = Some(self.cfg.mbp.build(&cfg));
        self.sims = self.cfg.policies.iter().map(|p| PolicySimulator::new(p, view.initial_state())).collect();
        self.current = 0;
        self.period = 0;
        self.period_reward = 0.0;
        self.seed = seed;
        Ok(())
    }

    fn act(&mut self, view: View<'_, M>, t: usize, state: &M::State) -> Result<M::Action> {
        if (t - 1) % self.tau == 0 {
            let mbp = self.mbp.as_mut().ok_or_else(|| Error::InvalidParams("learner used before begin".into()))?;
            if t > 1 {
                mbp.update(self.current, self.period_reward / self.tau as f64);
            }
            self.current = mbp.select();
            self.period += 1;
            self.period_reward = 0.0;
            self.oracle.start(
                view,
                t,
                state,
                self.cfg.policies.get(self.current),
                derive_seed(self.seed, self.period as u64, "oracle"),
            )?;
        }
        let sim = &self.sims[self.current];
        self.oracle.act(view, t, state, Target { state: sim.state(), action: sim.action() })
    }

    fn observe(
        &mut self,
        view: View<'_, M>,
        t: usize,
        _state: &M::State,
        _action: &M::Action,
        feedback: Feedback<'_, M>,
    ) -> Result<()> {
        let Feedback::Bandit { transition, reward } = feedback else {
            return Err(Error::InvalidParams("fixed-period learner expects bandit feedback".into()));
        };
        self.period_reward += reward.to_f64_lossy();
        self.oracle.observe(view, t, transition, &reward, None)?;
        for (k, p) in self.cfg.policies.iter().enumerate() {
            self.sims[k].advance_transition::<M>(view, p, transition)?;
        }
        Ok(())
    }

    fn episode(&self) -> usize {
        self.period.saturating_sub(1)
    }
}

/// Run the fixed-period bandit learner and benchmark it against its policy set.
pub fn flp_run<M, O>(instance: &M, cfg: FlpConfig<M::State, M::Action>, oracle: O, seed: u64) -> Result<TrialReport<M::State, M::Action, M::Scalar>>
where
    M: DdMdp,
    O: ChasingOracle<M>,
{
    let policies = cfg.policies.clone();
    let mut learner = ChaseFixedPeriods::new(cfg, oracle)?;
    run_learner(instance, &mut learner, &policies, seed)
}
