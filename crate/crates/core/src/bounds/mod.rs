//! Stitching functions, CGF envelopes, Legendre duals and crossing radii.

pub mod cgf;
pub mod radius;
pub mod stitching;

pub use cgf::CgfEnvelope;
pub use radius::{
    forward_boundary, maximal_tail_bound, monotonicity_check, one_sample_radius, paired_radius,
    subgaussian_radius, two_sample_radius, Monotonicity, RadiusRequest,
};
pub use stitching::{zeta, BudgetReport, StitchingFunctions};
