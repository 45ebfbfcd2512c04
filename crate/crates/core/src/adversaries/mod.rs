//! Hard instances from the lower-bound constructions and random instance
//! generators.

mod adaptive;
mod generators;
mod lower;
mod oracle_trap;

pub use adaptive::{calibrate_trap, trap_instance, AdaptiveAdversary, TRAP_SINK, TRAP_SOURCE};
pub use generators::{
    random_dracc, random_mdbg, random_ojs, DraccGenParams, DriftParams, MdbgGenParams, OjsGenParams, ValuationGen,
};
pub use lower::{
    cw_impossibility_pair, cw_policies, cw_regret_bound, cw_yao_weights, external_incomparability_instance,
    olsc_to_ddmdp, BACKWARD, FORWARD,
};
pub use oracle_trap::{oracle_trap_run, oracle_trap_policy, OracleTrapOutcome};
