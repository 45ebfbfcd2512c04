use std::sync::Arc;

use rand::Rng;

use super::bounds::{general_epsilon, kdemand_epsilon};
use super::session::{run_chase, ChaseStep, ChasingReport};
use super::{ChasingOracle, Target};
use crate::ddmdp::{Policy, View};
use crate::dracc::{DraccInstance, Inventory, PriceVector, ResourceId, ResourceSchedule};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};
use crate::scalar::Scalar;

/// Split the oracle's active resources into Good (`target <= own`) and Bad.
pub fn good_bad(own: &Inventory, target: &Inventory) -> (Vec<ResourceId>, Vec<ResourceId>) {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for &(i, units) in &own.0 {
        match target.get(i) {
            Some(tu) if tu <= units => good.push(i),
            _ => bad.push(i),
        }
    }
    (good, bad)
}

/// Total inventory deficit over the Bad resources.
pub fn phi(own: &Inventory, target: &Inventory) -> u64 {
    own.0
        .iter()
        .map(|&(i, units)| match target.get(i) {
            Some(tu) if tu > units => u64::from(tu - units),
            _ => 0,
        })
        .sum()
}

/// Oracle that, with probability `epsilon`, posts price 1 everywhere and
/// otherwise copies the target's prices on Good resources and posts 1 on Bad ones.
#[derive(Clone, Debug)]
pub struct ExploringChaser {
    epsilon: f64,
    label: String,
    rng: Option<StreamRng>,
    explored: bool,
}

impl ExploringChaser {
    pub fn with_epsilon(epsilon: f64) -> Self {
        let epsilon = epsilon.clamp(0.0, 1.0);
        ExploringChaser { epsilon, label: format!("explore:{epsilon}"), rng: None, explored: false }
    }

    /// Rate `sqrt(CW / T)`, for k-demand and OXS-type buyers.
    pub fn kdemand(cw: usize, horizon: usize) -> Self {
        let mut o = Self::with_epsilon(kdemand_epsilon(cw, horizon));
        o.label = "kdemand".into();
        o
    }

    /// Rate `(T / CW)^{-1/(CW+1)}`, for arbitrary buyers.
    pub fn general(cw: usize, horizon: usize) -> Self {
        let mut o = Self::with_epsilon(general_epsilon(cw, horizon));
        o.label = "general".into();
        o
    }

    /// Never explores.
    pub fn follower() -> Self {
        let mut o = Self::with_epsilon(0.0);
        o.label = "follower".into();
        o
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl<R: Scalar> ChasingOracle<DraccInstance<R>> for ExploringChaser {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn is_deterministic(&self) -> bool {
        self.epsilon == 0.0 || self.epsilon >= 1.0
    }

    fn start(
        &mut self,
        _view: View<'_, DraccInstance<R>>,
        _t_init: usize,
        _s_init: &Inventory,
        _target: &Policy<Inventory, PriceVector<R>>,
        seed: u64,
    ) -> Result<()> {
        self.rng = Some(substream(seed, 0, "explore"));
        self.explored = false;
        Ok(())
    }

    fn act(
        &mut self,
        _view: View<'_, DraccInstance<R>>,
        t: usize,
        state: &Inventory,
        target: Target<'_, Inventory, PriceVector<R>>,
    ) -> Result<PriceVector<R>> {
        let rng = self.rng.as_mut().ok_or_else(|| Error::InvalidParams("oracle used before start".into()))?;
        let u: f64 = rng.random();
        self.explored = u < self.epsilon;
        if self.explored {
            return Ok(PriceVector::all_ones(state));
        }
        let mut prices = Vec::with_capacity(state.len());
        for &(i, units) in &state.0 {
            let good = target.state.get(i).is_some_and(|tu| tu <= units);
            let p = match (good, target.action.get(i)) {
                (true, Some(p)) => p.clone(),
                _ => R::one(),
            };
            if units == 0 && p != R::one() {
                return Err(Error::InfeasiblePrice { t, resource: i });
            }
            prices.push((i, p));
        }
        Ok(PriceVector(prices))
    }

    fn explored(&self) -> bool {
        self.explored
    }
}

/// Deterministic oracle for first-in-first-out schedules: price 1 until every
/// resource active at the start has departed, then the target's prices.
#[derive(Clone, Debug)]
pub struct OjsChaser {
    schedule: Arc<ResourceSchedule>,
    t_prime: usize,
}

impl OjsChaser {
    pub fn new(schedule: Arc<ResourceSchedule>) -> Result<Self> {
        if let Some((a, b)) = schedule.fifo_violation() {
            return Err(Error::FifoViolation(a, b));
        }
        Ok(OjsChaser { schedule, t_prime: 0 })
    }

    /// Last round of the all-ones phase of the current session.
    pub fn t_prime(&self) -> usize {
        self.t_prime
    }
}

impl<R: Scalar> ChasingOracle<DraccInstance<R>> for OjsChaser {
    fn name(&self) -> String {
        "ojs".into()
    }

    fn declared_stateless(&self) -> bool {
        true
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn start(
        &mut self,
        view: View<'_, DraccInstance<R>>,
        t_init: usize,
        _s_init: &Inventory,
        _target: &Policy<Inventory, PriceVector<R>>,
        _seed: u64,
    ) -> Result<()> {
        let last = self
            .schedule
            .active(t_init)
            .iter()
            .filter_map(|(i, _)| self.schedule.resource(*i).map(|r| r.te))
            .max();
        self.t_prime = match last {
            Some(te) => te.min(view.horizon()),
            None => t_init - 1,
        };
        Ok(())
    }

    fn act(
        &mut self,
        _view: View<'_, DraccInstance<R>>,
        _t: usize,
        state: &Inventory,
        target: Target<'_, Inventory, PriceVector<R>>,
    ) -> Result<PriceVector<R>> {
        if _t <= self.t_prime {
            Ok(PriceVector::all_ones(state))
        } else {
            Ok(target.action.clone())
        }
    }
}

/// Per-round view of a pricing chase in terms of the proof objects.
#[derive(Clone, Debug, PartialEq)]
pub struct DraccDiagnostics {
    pub t: usize,
    pub phi: u64,
    pub good_size: usize,
    pub bad_size: usize,
    pub explored: bool,
    /// The target sells a Bad resource this round.
    pub missing: bool,
    pub reward_oracle: f64,
    pub reward_policy: f64,
    /// The oracle sells a Bad resource this round.
    pub sold_bad: bool,
    /// Oracle prices are at least the target's on every resource.
    pub dominated: bool,
    /// A resource arriving this round (after the start) is Bad.
    pub arrival_bad: bool,
}

/// Probe that records [`DraccDiagnostics`] for every round of a chase.
pub struct DraccProbe {
    schedule: Arc<ResourceSchedule>,
    t_init: usize,
    pub rows: Vec<DraccDiagnostics>,
}

impl DraccProbe {
    pub fn new(schedule: Arc<ResourceSchedule>, t_init: usize) -> Self {
        DraccProbe { schedule, t_init, rows: Vec::new() }
    }

    pub fn record<R: Scalar>(&mut self, step: &ChaseStep<'_, DraccInstance<R>>) {
        let (good, bad) = good_bad(step.state, step.target_state);
        let target_sale = step.round.demand(step.target_action).chosen;
        let own_sale = step.round.demand(step.action).chosen;
        let in_bad = |i: &ResourceId| bad.binary_search(i).is_ok();
        let dominated = step
            .action
            .0
            .iter()
            .all(|(i, p)| step.target_action.get(*i).is_none_or(|q| p >= q));
        let arrival_bad = step.t > self.t_init
            && bad.iter().any(|i| self.schedule.resource(*i).is_some_and(|r| r.ta == step.t));
        self.rows.push(DraccDiagnostics {
            t: step.t,
            phi: phi(step.state, step.target_state),
            good_size: good.len(),
            bad_size: bad.len(),
            explored: step.explored,
            missing: target_sale.iter().any(in_bad),
            reward_oracle: (step.reward_oracle.clone() * step.round.scale.clone()).to_f64_lossy(),
            reward_policy: (step.reward_policy.clone() * step.round.scale.clone()).to_f64_lossy(),
            sold_bad: own_sale.iter().any(in_bad),
            dominated,
            arrival_bad,
        });
    }

    /// CSV with columns t, phi, good_size, bad_size, explored, missing, reward_oracle, reward_policy.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "phi", "good_size", "bad_size", "explored", "missing", "reward_oracle", "reward_policy"])?;
        for r in &self.rows {
            w.write_record([
                r.t.to_string(),
                r.phi.to_string(),
                r.good_size.to_string(),
                r.bad_size.to_string(),
                u8::from(r.explored).to_string(),
                u8::from(r.missing).to_string(),
                r.reward_oracle.to_string(),
                r.reward_policy.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Chase on a pricing instance, recording diagnostics. The returned list has
/// one row per round plus the potential after the final round.
#[allow(clippy::too_many_arguments)]
pub fn run_chase_dracc<R, O>(
    instance: &DraccInstance<R>,
    oracle: &mut O,
    policy: &Policy<Inventory, PriceVector<R>>,
    t_init: usize,
    s_init: &Inventory,
    t_final: usize,
    seed: u64,
) -> Result<(ChasingReport<Inventory, R>, DraccProbe, u64)>
where
    R: Scalar,
    O: ChasingOracle<DraccInstance<R>> + ?Sized,
{
    let mut probe = DraccProbe::new(Arc::clone(instance.schedule()), t_init);
    let report = {
        let mut hook = |s: &ChaseStep<'_, DraccInstance<R>>| probe.record(s);
        run_chase(instance, oracle, policy, t_init, s_init, t_final, seed, Some(&mut hook))?
    };
    let final_phi = phi(&report.final_state, &report.final_target_state);
    Ok((report, probe, final_phi))
}
