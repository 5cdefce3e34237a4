//! Scripted reproductions of quantitative phenomena: scaling laws, energy
//! signs, non-existence on exterior domains, non-uniqueness on annuli and
//! positive energy on hyperbolic space.
//!
//! Every experiment is a pure function of its configuration. Independent
//! parameter points are solved in parallel and assembled in input order.

mod demos;
mod hyperbolic;
pub mod quadrature;
mod scaling;

use serde::Serialize;

pub use demos::{annulus_demo, exterior_demo, AnnulusConfig, AnnulusReport, ExteriorConfig, ExteriorReport, Trial};
pub use hyperbolic::{
    hyperbolic_positive_energy, weinstein_hyperbolic, zero_multiplier_identity, HyperbolicCase, PositiveEnergy,
    WeinsteinExploration, ZeroMultiplier,
};
pub use scaling::{
    ibeta_power_law, scaling_scan, IbetaConfig, IbetaReport, ScalingConfig, ScalingRow, ScalingScan, Subadditivity,
    LAMBDA_STEP,
};

use crate::config::SolverConfig;
use crate::error::Result;
use crate::fields::{functionals, Functionals, ProblemParams, RadialField};
use crate::solvers::{minimize_f, rescale_to_unit_k, unit_residual};
use crate::spaces::ModelSpace;

/// `K = 1` ground state of `-Δu + λu = u^p` from the `F_λ` minimizer.
#[derive(Debug, Clone, Serialize)]
pub struct GroundState {
    #[serde(skip)]
    pub u: RadialField,
    pub params: ProblemParams,
    pub functionals: Functionals,
    /// Residual of the `K = 1` equation.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the `F_λ` problem at `params.beta` and rescales to `K = 1`; fails
/// unless the solve converged.
pub fn ground_state(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<GroundState> {
    let rep = minimize_f(space, params, cfg)?.require_converged()?;
    let (u, beta) = rescale_to_unit_k(&rep)?;
    let params = ProblemParams { beta, ..*params };
    Ok(GroundState {
        functionals: functionals(&u, &params),
        residual: unit_residual(&u, &params),
        iterations: rep.iterations,
        params,
        u,
    })
}
