//! QED-style self-consistency checking of the ISA-level machine model:
//! concrete machine, injectable bug mutations, and bounded symbolic checks
//! in both the equivalent-program (EDSEP-V) and duplication (EDDI-V) modes.

pub mod bmc;
pub mod machine;
pub mod mutation;

pub use bmc::{
    bmc_check, replay, BmcConfig, BmcProblem, BmcVerdict, QedTrace, ReplayVerdict,
    SchedulingPolicy,
};
pub use machine::{
    first_violated_pair, qed_consistent, qed_ready, CheckMode, Machine, MachineState,
};
pub use mutation::{mutation_by_id, mutation_catalog, BugMutation, MutationKind};
