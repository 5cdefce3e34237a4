//! Ground states of the nonlinear Schrödinger equation
//! `-Δu + λu = K|u|^{p-1}u` on radially symmetric model spaces
//! (Euclidean, hyperbolic, exterior of a ball, annulus).
//!
//! The crate computes constrained minimizers of `F_λ(u) = ‖∇u‖² + λ‖u‖²` at
//! fixed `∫|u|^{p+1}` and of the energy `E(u) = ½‖∇u‖² - ∫|u|^{p+1}/(p+1)` at
//! fixed mass, maximizers of the Weinstein functional, and checks the
//! identities around them: scaling laws, Lagrange multipliers, spectra of
//! the linearized operators, rearrangement inequalities and the
//! concentration-compactness trichotomy.

pub mod cc;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod numerics;
pub mod rearrange;
pub mod solvers;
pub mod spaces;
pub mod spectral;
pub mod verify;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use fields::{Functionals, ProblemParams, RadialField, RadialGrid};
pub use solvers::SolveReport;
pub use spaces::{ModelSpace, SpaceKind};
pub use spectral::SpectralReport;
