//! Semiflow-level experiments built on the integrator.
//!
//! Existential constants (Lipschitz rates, the `M√ε` prefactor,
//! attraction rates) appear here only as fitted [`RateFit`] outputs.

mod absorbing;
mod cloud;
mod fit;
mod gap;
mod lipschitz;

pub use absorbing::{
    absorbing_spec, acoustic_entry_time, acoustic_entry_time_specialized, acoustic_radius_sq, invariance_check,
    robin_entry_time, robin_radius_sq, AbsorbingParams, AbsorbingSpec, InvarianceReport,
};
pub use cloud::{box_counting_dim, greedy_cover_count, hausdorff_semidist, omega_cloud, BoxCounting, Cloud, CloudMeta};
pub use fit::{
    comparison_entry_time, exp_attraction_fit, linear_fit, power_law_fit, transitivity_compose, RateFit,
};
pub use gap::{
    canonical_extension, epsilon_sweep, lift, project, trajectory_gap, EpsilonSweep, GapData, GapMode, GapSeries,
    SweepEntry,
};
pub use lipschitz::{lipschitz_fit, LipschitzReport};
