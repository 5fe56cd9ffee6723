//! Boundary-vortex nucleation in superconductors: the heuristic vortex law and
//! its closed-form solutions, first-passage analytics of the stochastically
//! perturbed law with a Monte Carlo cross-check, the Meissner potential
//! problem, and a gauge-free Ginzburg–Landau field solver with vortex
//! tracking.

pub mod exit;
pub mod field;
pub mod meissner;
pub mod ode;
pub mod params;
pub mod sde;
pub mod specialfn;

pub use params::{ParamError, PhysicalParams};
pub use specialfn::LogValue;
