//! Radial grids, sampled fields, the discrete Dirichlet form and the
//! functionals built on it.
//!
//! The discrete Laplacian is the exact gradient of the discrete Dirichlet
//! form in the weighted inner product `⟨u, v⟩ = Σ wᵢ uᵢ vᵢ`, so that
//! `⟨-Δu, u⟩ = ‖∇u‖²` holds to rounding and every Euler-Lagrange residual
//! is consistent with the functionals being minimized.

mod field;
mod grid;
mod interp;
mod io;
mod random;

pub use field::{
    apply_operator, centrifugal, dirichlet_energy, el_residual, el_residual_field, functionals, neg_laplacian,
    weinstein, Functionals, ProblemParams, RadialField,
};
pub(crate) use field::{parity_for, weighted_dot, OriginParity, Stiffness};
pub use grid::{GridSpec, InnerBoundary, RadialGrid};
pub use io::{fmt_f64, FieldJson};
pub use random::{random_signed_field, random_smooth_field};
