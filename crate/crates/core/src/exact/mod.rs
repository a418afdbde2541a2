//! Exact analysis of small chains: kernels over enumerated state spaces,
//! stationary solves, mixing profiles, trace chains and functionals.

mod export;
mod functional;
mod kernel;
mod mixing;
mod occupation;
mod spectral;
mod state_space;
mod trace;

pub use export::{read_distribution, read_kernel, write_distribution, write_kernel};
pub use functional::{dirichlet_form, entropy_form, functional_forms, l2_norm_sq, variance, FunctionalForms};
pub use kernel::{
    stationary_solve, stationary_solve_with, StationaryOptions, TransitionKernel, DENSE_CAP, ROW_SUM_TOL,
    STATIONARY_TOL,
};
pub use mixing::{distribution_at, mixing_profile, tv_distance, MixingProfile};
pub use occupation::{
    class_sequence, hitting_times, occupation_counters, occupation_exceedance, ClassTracker, Exceedance,
    HittingTimes, OccupationCounters, OccupationObserver,
};
pub use spectral::{
    log_sobolev_estimate, spectral_gap, LogSobolevConfig, LogSobolevEstimate, LOG_SOBOLEV_CAP, REVERSIBILITY_TOL,
};
pub use state_space::{
    build_kernel, build_kernel_with_cap, classify, occupied_edges, KcipKernel, StateClass, StateSpace,
    DEFAULT_MAX_VERTICES,
};
pub use trace::{trace_kernel, TRACE_ROW_TOL};
