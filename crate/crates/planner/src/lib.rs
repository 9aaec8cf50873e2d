//! Iterative pattern planning: encode, maximise satisfied goals, compress, extend.

pub mod extract;
pub mod spp;

pub use extract::{compress, get_plan, get_state};
pub use spp::{spp_solve, IterationStats, PlannerError, SppConfig, SppOutcome, SppResult, SppStats};
