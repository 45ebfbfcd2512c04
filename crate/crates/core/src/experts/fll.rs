use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp;

use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

/// Full-information learner configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct OlscConfig {
    pub arms: usize,
    /// Switching cost used to tune the learning rate.
    pub switching_cost: f64,
    pub horizon: usize,
    pub seed: u64,
}

impl OlscConfig {
    pub fn new(arms: usize, switching_cost: f64, horizon: usize, seed: u64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::EmptyCollection);
        }
        if !(switching_cost >= 0.0) {
            return Err(Error::InvalidParams(format!("switching cost {switching_cost} is negative")));
        }
        Ok(OlscConfig { arms, switching_cost, horizon, seed })
    }

    /// `sqrt(ln n / (Delta T))`; infinite when `Delta T = 0`, zero with one arm.
    pub fn learning_rate(&self) -> f64 {
        if self.arms == 1 {
            return 0.0;
        }
        let denom = self.switching_cost * self.horizon as f64;
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            ((self.arms as f64).ln() / denom).sqrt()
        }
    }
}

/// Follow-the-Lazy-Leader with exponential perturbations.
///
/// The leader is `argmax_i (cum_i + X_i)` with `X_i ~ Exp(eta)` i.i.d. After a
/// reward vector `r`, set `d = r - min r`. If `X >= d` coordinatewise the
/// perturbation becomes `X - d`, which leaves the leader unchanged and is again
/// i.i.d. exponential by memorylessness. Otherwise `X` is redrawn. A redraw, the
/// only way the leader can change, happens with probability at most
/// `eta * |d|_1`.
#[derive(Clone, Debug)]
pub struct FollowLazyLeader {
    eta: f64,
    cumulative: Vec<f64>,
    perturbation: Vec<f64>,
    leader: usize,
    redraws: usize,
    rng: StreamRng,
}

impl FollowLazyLeader {
    pub fn new(cfg: &OlscConfig) -> Self {
        let mut fll = FollowLazyLeader {
            eta: cfg.learning_rate(),
            cumulative: vec![0.0; cfg.arms],
            perturbation: vec![0.0; cfg.arms],
            leader: 0,
            redraws: 0,
            rng: substream(cfg.seed, 0, "fll"),
        };
        fll.redraw();
        fll.redraws = 0;
        fll
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn arms(&self) -> usize {
        self.cumulative.len()
    }

    /// Arm for the current round.
    pub fn leader(&self) -> usize {
        self.leader
    }

    /// Number of perturbation redraws after the first.
    pub fn redraws(&self) -> usize {
        self.redraws
    }

    fn redraw(&mut self) {
        self.redraws += 1;
        if self.eta.is_finite() && self.eta > 0.0 {
            let exp = Exp::new(self.eta).expect("positive rate");
            for x in &mut self.perturbation {
                *x = exp.sample(&mut self.rng);
            }
        } else {
            self.perturbation.iter_mut().for_each(|x| *x = 0.0);
            // keep consuming the stream so replays stay aligned across rates
            let _: u64 = self.rng.random();
        }
        self.leader = self.argmax();
    }

    fn argmax(&self) -> usize {
        let mut best = 0;
        let mut best_z = f64::NEG_INFINITY;
        for (i, (c, x)) in self.cumulative.iter().zip(&self.perturbation).enumerate() {
            let z = c + x;
            if z > best_z {
                best = i;
                best_z = z;
            }
        }
        best
    }

    /// Incorporate one round's full reward vector.
    pub fn update(&mut self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.cumulative.len() {
            return Err(Error::LengthMismatch(rewards.len(), self.cumulative.len()));
        }
        let floor = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        for (c, r) in self.cumulative.iter_mut().zip(rewards) {
            *c += r;
        }
        let lazy = self.perturbation.iter().zip(rewards).all(|(x, r)| *x >= r - floor);
        if lazy && self.eta.is_finite() {
            for (x, r) in self.perturbation.iter_mut().zip(rewards) {
                *x -= r - floor;
            }
        } else {
            self.redraw();
        }
        Ok(())
    }
}

/// One learner step: absorb the previous round's rewards (if any) and return
/// the arm for the current round.
pub fn olsc_learner_step(state: &mut FollowLazyLeader, feedback: Option<&[f64]>) -> Result<usize> {
    if let Some(r) = feedback {
        state.update(r)?;
    }
    Ok(state.leader())
}

/// Realized cost charged per switch.
#[derive(Clone, Debug, PartialEq)]
pub enum SwitchCost {
    Fixed(f64),
    /// Uniform on `[0, 2 * mean]`, drawn from its own stream.
    Random { mean: f64, seed: u64 },
}

/// Outcome of a full-information run.
#[derive(Clone, Debug, PartialEq)]
pub struct OlscReport {
    pub arms: Vec<usize>,
    pub switch_rounds: Vec<usize>,
    pub switch_count: usize,
    pub switching_cost_paid: f64,
    pub best_arm_reward: f64,
    pub learner_reward: f64,
    /// `max_i sum F_t(i) - (sum F_t(arm_t) - cost paid)`.
    pub adjusted_regret: f64,
}

/// Run the lazy leader on a reward stream (`stream[t][arm]`).
pub fn run_olsc(cfg: &OlscConfig, stream: &[Vec<f64>], cost: &SwitchCost) -> Result<OlscReport> {
    let mut fll = FollowLazyLeader::new(cfg);
    let mut cost_rng = match cost {
        SwitchCost::Random { seed, .. } => Some(substream(*seed, 0, "switch-cost")),
        SwitchCost::Fixed(_) => None,
    };
    let mut arms = Vec::with_capacity(stream.len());
    let mut switch_rounds = Vec::new();
    let mut paid = 0.0;
    let mut learner = 0.0;
    let mut totals = vec![0.0; cfg.arms];
    let mut feedback: Option<&[f64]> = None;
    for (i, rewards) in stream.iter().enumerate() {
        let arm = olsc_learner_step(&mut fll, feedback)?;
        if rewards.len() != cfg.arms {
            return Err(Error::LengthMismatch(rewards.len(), cfg.arms));
        }
        if i > 0 && arms[i - 1] != arm {
            switch_rounds.push(i + 1);
            paid += match (cost, cost_rng.as_mut()) {
                (SwitchCost::Random { mean, .. }, Some(rng)) => rng.random::<f64>() * 2.0 * mean,
                (SwitchCost::Fixed(d), _) => *d,
                _ => 0.0,
            };
        }
        arms.push(arm);
        learner += rewards[arm];
        totals.iter_mut().zip(rewards).for_each(|(t, r)| *t += r);
        feedback = Some(rewards);
    }
    let best = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let best = if stream.is_empty() { 0.0 } else { best };
    Ok(OlscReport {
        switch_count: switch_rounds.len(),
        switch_rounds,
        switching_cost_paid: paid,
        best_arm_reward: best,
        learner_reward: learner,
        adjusted_regret: best - (learner - paid),
        arms,
    })
}
