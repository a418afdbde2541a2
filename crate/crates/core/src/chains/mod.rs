//! Reference processes: simple and Metropolis exclusion, coalescing
//! walkers, the colored KCIP, and the triple-time calculation.

mod coalescence;
mod colored;
mod exclusion;
mod triple;

pub use coalescence::{
    coalescence_step, collision_time, meeting_time_exact, near_collision_time, run_until_collision, CoalescenceDraw,
    CoalescenceRun, CoalescenceState, Move,
};
pub use colored::{colored_kcip_step, ColorTimes, ColoredChain, ColoredConfig};
pub use exclusion::{
    mh_sep_kernel, mh_sep_step, sep_kernel, sep_step, EdgeDraw, ExclusionKernel, ExclusionState,
    EXCLUSION_MAX_VERTICES,
};
pub use triple::{
    small_matrix, triple_time_asymptote, triple_time_exact, triple_time_mc, triple_time_sample, triple_times,
    TripleRates, TripleSamples,
};
