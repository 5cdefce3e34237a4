//! Linearized operators `L_a = -Δ + λ - a|u|^{p-1}` around a ground state,
//! their low spectrum per angular sector, the second-variation identity and
//! the eigenvalue derivative in `a`.
//!
//! `L₋ = L₁` and `L₊ = L_p`. Operators act on radial profiles of the sector
//! `ℓ`, where `-Δ` picks up the centrifugal term `ℓ(ℓ+n-2)/r²`.

mod checks;
mod eigen;

use std::sync::Arc;

use serde::Serialize;

pub use checks::{eig_derivative_check, second_variation_check, Constraint, EigDerivative, SecondVariation};
pub use eigen::lowest_eigs;

use crate::error::{Error, Result};
use crate::fields::{centrifugal, el_residual, parity_for, ProblemParams, RadialField, RadialGrid, Stiffness};

/// Residual required of the profile an operator is built around.
pub const RESIDUAL_GATE: f64 = 1e-4;

/// Null-mode tolerance constant: zero modes of the discrete operators are
/// zero up to `NULL_C h²` times the potential scale. The translation mode of
/// the cubic ground state in three dimensions sits at about `1.2 h²` times
/// that scale.
pub const NULL_C: f64 = 2.0;

/// `L_a` on one angular sector, stored as the symmetric tridiagonal matrix
/// `W^{1/2} L_a W^{-1/2}`.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub grid: Arc<RadialGrid>,
    pub a: f64,
    pub ell: usize,
    pub params: ProblemParams,
    /// `λ + ℓ(ℓ+n-2)/r² - a|u|^{p-1}` at the nodes.
    pub potential: Vec<f64>,
    pub(crate) stiff: Stiffness,
    pub(crate) diag: Vec<f64>,
    pub(crate) off: Vec<f64>,
    /// `‖u‖_∞^{p-1}`, the size of the potential well.
    pub scale: f64,
}

/// Builds `L_a` around the `K = 1` ground state `u` of
/// `-Δu + λu = |u|^{p-1}u` (`λ = params.lambda`).
pub fn assemble_la(u: &RadialField, params: &ProblemParams, a: f64, ell: usize) -> Result<LinearizedOperator> {
    let residual = el_residual(u, params.lambda, 1.0, params.p);
    if !(residual < RESIDUAL_GATE) {
        return Err(Error::StaleProfile {
            residual,
            gate: RESIDUAL_GATE,
        });
    }
    assemble_unchecked(u, params, a, ell)
}

/// [`assemble_la`] without the residual gate, for operators around fields
/// that are not ground states (e.g. `a = 0`).
pub fn assemble_unchecked(u: &RadialField, params: &ProblemParams, a: f64, ell: usize) -> Result<LinearizedOperator> {
    if !a.is_finite() {
        return Err(Error::Parameter("potential coefficient must be finite".into()));
    }
    let grid = Arc::clone(&u.grid);
    let cent = centrifugal(&grid, ell)?;
    let stiff = Stiffness::assemble(&grid, parity_for(&grid, ell));
    let p = params.p;
    let potential: Vec<f64> = (0..grid.m)
        .map(|i| params.lambda + cent[i] - a * u.values[i].abs().powf(p - 1.0))
        .collect();
    let w = &grid.weights;
    let diag = (0..grid.m).map(|i| stiff.diag[i] / w[i] + potential[i]).collect();
    let off = (0..grid.m - 1)
        .map(|i| stiff.off[i] / (w[i] * w[i + 1]).sqrt())
        .collect();
    Ok(LinearizedOperator {
        scale: u.max_abs().powf(p - 1.0).max(1.0),
        grid,
        a,
        ell,
        params: *params,
        potential,
        stiff,
        diag,
        off,
    })
}

impl LinearizedOperator {
    /// `L_a ψ`.
    pub fn apply(&self, psi: &RadialField) -> Result<RadialField> {
        self.check(psi)?;
        let s = self.stiff.apply(&psi.values);
        let w = &self.grid.weights;
        Ok(psi.with_values(
            (0..self.grid.m)
                .map(|i| s[i] / w[i] + self.potential[i] * psi.values[i])
                .collect(),
        ))
    }

    /// `⟨L_a ψ, ψ⟩` in the weighted inner product.
    pub fn quadratic_form(&self, psi: &RadialField) -> Result<f64> {
        self.check(psi)?;
        let v = &psi.values;
        let s = self.stiff.apply(v);
        Ok((0..self.grid.m)
            .map(|i| s[i] * v[i] + self.grid.weights[i] * self.potential[i] * v[i] * v[i])
            .sum())
    }

    fn check(&self, psi: &RadialField) -> Result<()> {
        if *psi.grid != *self.grid {
            return Err(Error::Shape("field lives on another grid than the operator".into()));
        }
        Ok(())
    }

    /// Tolerance for calling an eigenvalue zero on this grid.
    pub fn null_tolerance(&self) -> f64 {
        (NULL_C * self.grid.h * self.grid.h).max(1e-6) * self.scale
    }
}

/// `⟨L_a ψ, ψ⟩`.
pub fn quadratic_form(op: &LinearizedOperator, psi: &RadialField) -> Result<f64> {
    op.quadratic_form(psi)
}

/// Lowest eigenpairs of one operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub a: f64,
    pub ell: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenfields: Vec<RadialField>,
    pub negative_count: usize,
    pub null_tolerance: f64,
}

/// Bottom of the spectrum of the discrete `-Δ` on `grid` (the discrete
/// counterpart of `δ₀`, shifted up by the truncation).
pub fn discrete_bottom(grid: &Arc<RadialGrid>) -> Result<f64> {
    let zero = RadialField::zeros(grid);
    let params = ProblemParams::new(grid.space.n, 2.0, 0.0, 1.0);
    let op = assemble_unchecked(&zero, &params, 0.0, 0)?;
    Ok(lowest_eigs(&op, 1)?.eigenvalues[0])
}

/// Weighted cosine of the angle between two fields.
pub fn cosine(a: &RadialField, b: &RadialField) -> Result<f64> {
    Ok(a.dot(b)? / (a.norm() * b.norm()))
}
