//! Chasing oracles: started mid-run from an arbitrary state, they track a target
//! policy's cumulative reward.

mod bounds;
mod dracc;
mod generic;
mod session;

pub use bounds::{general_epsilon, kdemand_epsilon, BoundKind, ChasabilityBound};
pub use dracc::{good_bad, phi, run_chase_dracc, DraccDiagnostics, DraccProbe, ExploringChaser, OjsChaser};
pub use generic::{ForwardBackwardChaser, PolicyFollower};
pub use session::{estimate_cr, run_chase, stateless_check, ChaseStep, ChasingReport, CrEstimate, StatelessOutcome};

use crate::ddmdp::{DdMdp, Policy, Transition, View};
use crate::error::Result;

/// The target policy's simulated state and action for the current round.
pub struct Target<'a, S, A> {
    pub state: &'a S,
    pub action: &'a A,
}

/// An ongoing chasing oracle.
///
/// A session is opened with [`ChasingOracle::start`]; starting again discards
/// all internal state.
pub trait ChasingOracle<M: DdMdp>: Send {
    fn name(&self) -> String;

    /// Whether `observe` needs the full reward function.
    fn consults_full_feedback(&self) -> bool {
        false
    }

    /// Whether the expected cumulative reward does not depend on `s_init`.
    fn declared_stateless(&self) -> bool {
        false
    }

    fn is_deterministic(&self) -> bool;

    fn start(
        &mut self,
        view: View<'_, M>,
        t_init: usize,
        s_init: &M::State,
        target: &Policy<M::State, M::Action>,
        seed: u64,
    ) -> Result<()>;

    /// Action for round `t` at the oracle's own state.
    fn act(
        &mut self,
        view: View<'_, M>,
        t: usize,
        state: &M::State,
        target: Target<'_, M::State, M::Action>,
    ) -> Result<M::Action>;

    /// Post-action feedback. `full` is `Some` only if the oracle consults full feedback
    /// and the caller has it.
    fn observe(
        &mut self,
        _view: View<'_, M>,
        _t: usize,
        _transition: &dyn Transition<M::State, M::Action>,
        _reward: &M::Scalar,
        _full: Option<&M::Round>,
    ) -> Result<()> {
        Ok(())
    }

    /// Whether the last action came from an exploration draw.
    fn explored(&self) -> bool {
        false
    }
}

impl<M: DdMdp, O: ChasingOracle<M> + ?Sized> ChasingOracle<M> for Box<O> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn consults_full_feedback(&self) -> bool {
        (**self).consults_full_feedback()
    }
    fn declared_stateless(&self) -> bool {
        (**self).declared_stateless()
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn start(
        &mut self,
        view: View<'_, M>,
        t_init: usize,
        s_init: &M::State,
        target: &Policy<M::State, M::Action>,
        seed: u64,
    ) -> Result<()> {
        (**self).start(view, t_init, s_init, target, seed)
    }
    fn act(
        &mut self,
        view: View<'_, M>,
        t: usize,
        state: &M::State,
        target: Target<'_, M::State, M::Action>,
    ) -> Result<M::Action> {
        (**self).act(view, t, state, target)
    }
    fn observe(
        &mut self,
        view: View<'_, M>,
        t: usize,
        transition: &dyn Transition<M::State, M::Action>,
        reward: &M::Scalar,
        full: Option<&M::Round>,
    ) -> Result<()> {
        (**self).observe(view, t, transition, reward, full)
    }
    fn explored(&self) -> bool {
        (**self).explored()
    }
}
