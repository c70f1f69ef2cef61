//! Confidence sequences for divergences and a streaming monitor.

pub mod boundaries;
pub mod config;
pub mod monitor;

pub use boundaries::{
    dkw_boundary, entropy_bound, kappa_two_sample, kappa_upper, kl_finite_boundary, ks_two_sample_boundary,
    mean_boundary, mmd_boundary, mmd_u_boundary, ot_boundary, rademacher_bound, rademacher_lower,
    smoothed_boundary, smoothed_constants, triangle_compose, tv_finite_boundary, KlBoundary, Radii, SmoothedTarget,
};
pub use config::{BiasBound, ConfSeqConfig, Covering, DivergenceKind, LambdaSchedule, Mode, ReferenceCdf};
pub use monitor::{monitor_update, ConfSeqState, IntervalRecord, Observation, Stream};
