//! Trajectory-based travelling salesman toolkit.
//!
//! Waypoints are visited with a chosen heading and speed. Travel between two
//! such configurations costs the duration of a time-optimal, acceleration
//! and speed limited trajectory ([`trajectory`]), or of a constant-speed
//! Dubins path for the classic baseline ([`dubins`]). [`costs`] tabulates
//! every pair, [`solver`] finds the best closed tour and [`milp`] writes the
//! equivalent integer program for external solvers.
//!
//! Everything is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod costs;
pub mod dubins;
pub mod milp;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod trajectory;
pub mod validate;

pub use costs::{build_ddtsp_costs, build_tbtsp_costs, CostError, CostTensor, TensorKind};
pub use model::{Configuration, DiscretizationScheme, Instance, KinematicLimits, ModelError, Waypoint};
pub use scalar::Scalar;
pub use solver::{reoptimize_configs, solve_exact, solve_heuristic, SolverError, TourSolution};
pub use trajectory::{PlanarTrajectory, TrajectoryError};

pub type InstanceF64 = Instance<f64>;
pub type InstanceF32 = Instance<f32>;
pub type CostTensorF64 = CostTensor<f64>;
pub type CostTensorF32 = CostTensor<f32>;
pub type PlanarTrajectoryF64 = PlanarTrajectory<f64>;
pub type PlanarTrajectoryF32 = PlanarTrajectory<f32>;
