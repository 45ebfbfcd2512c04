//! Job scheduling over bandwidth-limited slots and matching over a dynamic
//! bipartite graph, each with its reduction to posted pricing.

mod mdbg;
mod ojs;

pub use mdbg::{mdbg_demand, mdbg_to_dracc, MdbgFile, MdbgInstance, MdbgLeft, MdbgLeftFile, MdbgRight, MdbgRightFile};
pub use ojs::{ojs_demand, ojs_to_dracc, Job, JobFile, OjsFile, OjsInstance};
