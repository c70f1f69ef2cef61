//! Plug-in estimators of divergences between empirical measures.

pub mod finite;
pub mod ks;
pub mod mmd;
pub mod multinomial;
pub mod ot;
pub mod rademacher;
pub mod sample;
pub mod smoothed;
pub mod wasserstein;

pub use finite::{kl_finite, ks_finite, tv_finite, w1_finite};
pub use ks::{ks_one_sample, ks_two_sample};
pub use mmd::{mmd_u_squared, mmd_v, mmd_v_weighted, KernelKind, KernelSpec, MmdState};
pub use multinomial::{g_k_t, g_k_t_enumerate, ln_g_k_t};
pub use ot::{ot_cost_discrete, ot_cost_samples, CostSpec, OtSolution};
pub use rademacher::{rademacher_empirical, RademacherEstimate, RademacherMode};
pub use sample::{CategoricalCounts, EmpiricalSample};
pub use smoothed::{smoothed_estimators_1d, SmoothedKind, SmoothedReference};
pub use wasserstein::w1_1d;
