//! Stateless expert learners: full-information learning with switching cost
//! and adversarial multi-armed bandits.

mod bandit;
mod fll;

pub use bandit::{mbp_learner_step, BanditLearner, Exp3, MbpConfig, MbpKind, PolyInf};
pub use fll::{olsc_learner_step, run_olsc, FollowLazyLeader, OlscConfig, OlscReport, SwitchCost};
