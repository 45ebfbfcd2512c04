use super::{ChasingOracle, Target};
use crate::ddmdp::{DdMdp, ExplicitDdMdp, Policy, View};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Plays the target policy at the oracle's own state.
pub struct PolicyFollower<S, A> {
    policy: Option<Policy<S, A>>,
}

impl<S, A> Default for PolicyFollower<S, A> {
    fn default() -> Self {
        PolicyFollower { policy: None }
    }
}

impl<S, A> PolicyFollower<S, A> {
    pub fn new() -> Self {
        Self::default()
    }
}

impl<M: DdMdp> ChasingOracle<M> for PolicyFollower<M::State, M::Action> {
    fn name(&self) -> String {
        "follow".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn start(
        &mut self,
        _view: View<'_, M>,
        _t_init: usize,
        _s_init: &M::State,
        target: &Policy<M::State, M::Action>,
        _seed: u64,
    ) -> Result<()> {
        self.policy = Some(target.clone());
        Ok(())
    }

    fn act(
        &mut self,
        _view: View<'_, M>,
        _t: usize,
        state: &M::State,
        _target: Target<'_, M::State, M::Action>,
    ) -> Result<M::Action> {
        let p = self.policy.as_ref().ok_or_else(|| Error::InvalidParams("oracle used before start".into()))?;
        Ok(p.act(state))
    }
}

/// Chaser for the loop instance with states `0..m` and actions Forward/Backward:
/// climb to the last state, wait there until the target plays Backward, play
/// Backward in the same round, then copy the target.
#[derive(Clone, Debug)]
pub struct ForwardBackwardChaser {
    top: usize,
    forward: usize,
    backward: usize,
}

impl ForwardBackwardChaser {
    pub fn new(states: usize, forward: usize, backward: usize) -> Self {
        ForwardBackwardChaser { top: states - 1, forward, backward }
    }
}

impl<R: Scalar> ChasingOracle<ExplicitDdMdp<R>> for ForwardBackwardChaser {
    fn name(&self) -> String {
        "forward-backward".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn start(
        &mut self,
        _view: View<'_, ExplicitDdMdp<R>>,
        _t_init: usize,
        _s_init: &usize,
        _target: &Policy<usize, usize>,
        _seed: u64,
    ) -> Result<()> {
        Ok(())
    }

    fn act(&mut self, _view: View<'_, ExplicitDdMdp<R>>, _t: usize, state: &usize, target: Target<'_, usize, usize>) -> Result<usize> {
        Ok(if state == target.state {
            *target.action
        } else if *state != self.top {
            self.forward
        } else if *target.action == self.backward {
            self.backward
        } else {
            self.forward
        })
    }
}
