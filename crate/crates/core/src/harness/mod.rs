//! Experiment configs, seed sweeps, regret curves, slope fits and the
//! invariant-verification suites.

mod config;
mod fit;
mod run;
mod verify;

pub use config::{CsOracle, ExperimentConfig, InstanceSource, LearnerSpec, PoliciesSpec, TableFamily};
pub use fit::{fit_loglog, CurvePoint, RegretCurve, SlopeFit};
pub use run::{load_file, run_experiment, thread_count, Loaded, RunOutcome, TrialRow, CURVE_COLUMNS, TRIAL_COLUMNS};
pub use verify::{verify, Suite, VerifyReport};
