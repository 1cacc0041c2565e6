//! Fair allocation of indivisible goods.
//!
//! Instances are either pooled (every agent receives `K` of `nK` objects) or
//! periodic (one object per agent in each of `T` periods). The crate runs
//! draft and TTC+SD mechanisms, audits allocations for EF1, swapEF and
//! swapBE, maximizes welfare exactly, and cross-checks all of it with a
//! brute-force oracle.

pub mod audit;
pub mod draft;
pub mod io;
pub mod model;
pub mod oracle;
pub mod ttc;
pub mod welfare;

pub use audit::{audit, FairnessReport, Verdict};
pub use draft::{make_schedule, run_draft, PrioritySchedule, ScheduleKind};
pub use model::{
    validate_allocation, validate_instance, AgentId, Allocation, Instance, ObjectId, Rational, Structure,
};
pub use ttc::run_ttc_sd;
