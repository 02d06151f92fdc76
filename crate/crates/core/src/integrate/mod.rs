//! Structure-preserving time integration for Problems (R) and (A).
//!
//! One step is the implicit midpoint rule for the first-order system with
//! the nonlinearity replaced by its discrete gradient
//! `f̄ = (F(u^{n+1}) − F(u^n))/(u^{n+1} − u^n)`. With that choice
//!
//! ```text
//! E^{n+1} − E^n + 2dt(‖v̄‖² + ε‖γ̄‖²_Γ) = 0
//! ```
//!
//! holds exactly for the energy of [`crate::model`], up to the Newton residual.
//! The acoustic volume equation carries the boundary flux `+⟨γ, ψ⟩_Γ` from
//! integrating `Δu` by parts with `∂ₙu = γ`.

mod decompose;
mod state;
mod stepper;
mod trajectory;

pub use decompose::DecompositionRecord;
pub use state::{initial_data_a, Problem, State, StateA, StateR};
pub use stepper::{SolverOptions, StepReport, WaveSystem};
pub use trajectory::{step_count, SnapshotFormat, TrajectoryRecord};
