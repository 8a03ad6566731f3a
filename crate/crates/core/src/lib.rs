//! Numerical laboratory for the Josephson-class torus equation
//! `ẋ = ν sin x + a + s sin t`.
//!
//! * [`torus`]: the period-2π flow map, its lift and the rotation number ρ(a, s).
//! * [`tongue`]: phase locking, tongue boundaries and adjacency points.
//! * [`linear`]: the complex linear system whose projectivization is the
//!   flow, its monodromy around τ = 0, and Möbius actions.
//! * [`canonical`]: the Riccati solutions holomorphic at τ = 0, their
//!   continuation to the unit disk and argument-principle counts.
//! * [`bessel`]: integer-order Bessel functions of the first kind.
//! * [`ode`]: the adaptive Dormand–Prince integrator everything runs on.

pub mod bessel;
pub mod canonical;
pub mod error;
pub mod linear;
pub mod ode;
pub mod roots;
pub mod tongue;
pub mod torus;
pub mod verify;

pub use bessel::bessel_j;
pub use canonical::{
    canonical_series, condition_star, continue_canonical, count_poles_unit_disk, CanonicalSolution,
    ConditionStar, PoleCount, Which,
};
pub use error::{Error, OdeError, Result};
pub use linear::{mobius_apply, monodromy, riccati_rhs, LinearSystem, Monodromy, ProjPoint};
pub use ode::{IntegratorConfig, Path};
pub use tongue::{
    boundary_at, find_adjacencies, locking_witness, width_function, Adjacency, AdjacencyScan,
    LockingWitness, SliceOutcome, TongueSlice,
};
pub use torus::{is_identity_map, period_map, rotation_number, LiftMap, Params, RotationResult};
