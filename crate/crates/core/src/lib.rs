//! Anytime-valid confidence sequences for convex divergences.
//!
//! Plug-in estimates of convex functionals of empirical measures are reverse
//! submartingales under the exchangeable filtration, so Ville-type maximal
//! inequalities stitched over geometric epochs give boundaries that hold
//! simultaneously for every sample size.
//!
//! * [`bounds`]: stitching functions, CGF envelopes and generic radii.
//! * [`estimators`]: plug-in divergences (KS, MMD, OT, TV, KL, W1, smoothed, Rademacher).
//! * [`confseq`]: per-divergence boundaries and the streaming monitor.
//! * [`validation`]: Monte Carlo and exhaustive audits.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod confseq;
pub mod error;
pub mod estimators;
pub mod validation;

pub use error::{Error, Result};
