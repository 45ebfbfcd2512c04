//! Meta-algorithms that combine an expert learner over policies with chasing
//! oracles.

mod cs;
mod flp;

pub use cs::{cs_run, lbpp_run, lbpp_sigma, ChaseAndSwitch, CsConfig, EpisodeRecord, OracleChoice};
pub use flp::{default_period, flp_run, ChaseFixedPeriods, FlpConfig};
