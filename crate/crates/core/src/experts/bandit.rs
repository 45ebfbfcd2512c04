use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

/// Bandit learner configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct MbpConfig {
    pub arms: usize,
    /// Number of rounds `Psi`.
    pub horizon: usize,
    pub seed: u64,
}

impl MbpConfig {
    pub fn new(arms: usize, horizon: usize, seed: u64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::EmptyCollection);
        }
        if horizon == 0 {
            return Err(Error::InvalidParams("bandit horizon must be at least 1".into()));
        }
        Ok(MbpConfig { arms, horizon, seed })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MbpKind {
    #[default]
    Exp3,
    Inf,
}

/// Adversarial bandit learner over arms `0..K`.
pub trait BanditLearner: Send {
    /// Current sampling distribution.
    fn distribution(&self) -> &[f64];
    /// Sample the next arm.
    fn select(&mut self) -> usize;
    /// Report the reward in `[0, 1]` of the arm just played.
    fn update(&mut self, arm: usize, reward: f64);
}

impl MbpKind {
    pub fn build(self, cfg: &MbpConfig) -> Box<dyn BanditLearner> {
        match self {
            MbpKind::Exp3 => Box::new(Exp3::new(cfg)),
            MbpKind::Inf => Box::new(PolyInf::new(cfg)),
        }
    }
}

fn sample(probs: &[f64], rng: &mut StreamRng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Exponential weights with importance-weighted reward estimates.
#[derive(Clone, Debug)]
pub struct Exp3 {
    eta: f64,
    estimates: Vec<f64>,
    probs: Vec<f64>,
    rng: StreamRng,
}

impl Exp3 {
    /// Learning rate `sqrt(2 ln K / (K Psi))`.
    pub fn new(cfg: &MbpConfig) -> Self {
        let k = cfg.arms as f64;
        let eta = if cfg.arms > 1 { (2.0 * k.ln() / (k * cfg.horizon as f64)).sqrt() } else { 0.0 };
        Exp3 { eta, estimates: vec![0.0; cfg.arms], probs: vec![1.0 / k; cfg.arms], rng: substream(cfg.seed, 0, "exp3") }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn refresh(&mut self) {
        let top = self.estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, s) in self.probs.iter_mut().zip(&self.estimates) {
            *p = (self.eta * (s - top)).exp();
            total += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= total);
    }
}

impl BanditLearner for Exp3 {
    fn distribution(&self) -> &[f64] {
        &self.probs
    }

    fn select(&mut self) -> usize {
        sample(&self.probs, &mut self.rng)
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.estimates[arm] += reward / self.probs[arm];
        self.refresh();
    }
}

/// Implicitly normalised forecaster with potential `psi(x) = (eta / -x)^2`.
///
/// The weights are `p_i = (eta / (C - G_i))^2` for estimated gains `G_i`, with
/// `C > max G` chosen so they sum to one.
#[derive(Clone, Debug)]
pub struct PolyInf {
    eta: f64,
    estimates: Vec<f64>,
    probs: Vec<f64>,
    rng: StreamRng,
}

impl PolyInf {
    /// `eta = sqrt(2 Psi)`.
    pub fn new(cfg: &MbpConfig) -> Self {
        let k = cfg.arms as f64;
        PolyInf {
            eta: (2.0 * cfg.horizon as f64).sqrt(),
            estimates: vec![0.0; cfg.arms],
            probs: vec![1.0 / k; cfg.arms],
            rng: substream(cfg.seed, 0, "inf"),
        }
    }

    fn weights_at(&self, c: f64) -> f64 {
        self.estimates.iter().map(|g| (self.eta / (c - g)).powi(2)).sum()
    }

    fn refresh(&mut self) {
        let top = self.estimates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let k = self.estimates.len() as f64;
        let (mut lo, mut hi) = (top + self.eta, top + self.eta * k.sqrt());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.weights_at(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = hi;
        let mut total = 0.0;
        for (p, g) in self.probs.iter_mut().zip(&self.estimates) {
            *p = (self.eta / (c - g)).powi(2);
            total += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= total);
    }
}

impl BanditLearner for PolyInf {
    fn distribution(&self) -> &[f64] {
        &self.probs
    }

    fn select(&mut self) -> usize {
        sample(&self.probs, &mut self.rng)
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.estimates[arm] += reward / self.probs[arm];
        self.refresh();
    }
}

/// One bandit step: absorb the previous arm's reward (if any) and sample the next arm.
pub fn mbp_learner_step(state: &mut dyn BanditLearner, feedback: Option<(usize, f64)>) -> usize {
    if let Some((arm, r)) = feedback {
        state.update(arm, r);
    }
    state.select()
}
