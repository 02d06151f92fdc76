//! Simulation and diagnostics for the damped semilinear wave equation
//!
//! ```text
//! u_tt + u_t - Δu + u + f(u) = 0     in (0, ∞) × Ω
//! ```
//!
//! on a one-dimensional interval, closed either by the Robin condition
//! `∂ₙu + u = 0` or by the acoustic boundary system
//!
//! ```text
//! δ_tt + ε(δ_t + δ + g(δ)) = -u_t,   δ_t = ∂ₙu     on (0, ∞) × Γ
//! ```
//!
//! The time integrator is an implicit midpoint rule with discrete-gradient
//! nonlinearities, so the continuous energy identities hold step by step up to
//! the Newton tolerance. On top of the integrator sit the semiflow
//! experiments: the √ε trajectory gap between the two problems, Lipschitz
//! fits, absorbing-ball formulas, ω-limit clouds, Hausdorff semidistances and
//! box-counting dimension.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod operators;
pub mod random;

pub use error::{Error, Result};
pub use integrate::{Problem, SolverOptions, State, StateA, StateR, TrajectoryRecord, WaveSystem};
pub use mesh::{BoundaryField, Field, InnerKind, Mesh, PhaseSpace};
pub use model::{BoundaryNonlinearity, EnergyBreakdown, Nonlinearity};
