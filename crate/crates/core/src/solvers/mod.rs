//! Constrained minimizers and the independent shooting oracle.
//!
//! * [`minimize_f`]: minimize `F_λ(u)` subject to `J_p(u) = β`.
//! * [`minimize_e`]: minimize `E(u)` subject to `‖u‖² = β`.
//! * [`maximize_w`]: maximize the Weinstein quotient on Euclidean space.
//! * [`shoot`]: ODE shooting for `-Δu + λu = u^p` on Euclidean space.
//!
//! The descent methods precondition the gradient with `(-Δ + s)⁻¹`, which
//! is a single tridiagonal solve, so iteration counts do not grow with the
//! grid size.

mod flow;
mod shooting;
mod weinstein;

use std::sync::Arc;

use serde::Serialize;

pub use flow::{minimize_e, minimize_e_on, minimize_f, minimize_f_on};
pub use shooting::{shoot, shoot_amplitude, shoot_on};
pub use weinstein::{maximize_w, maximize_w_on};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::{el_residual, ProblemParams, RadialField, RadialGrid};
use crate::spaces::ModelSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// `I_β = inf { F_λ(u) : J_p(u) = β }`
    FLambda,
    /// `𝓘_β = inf { E(u) : ‖u‖² = β }`
    Energy,
    /// `W_max = sup W(u)`
    Weinstein,
}

/// Outcome of a constrained solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub problem: Problem,
    pub space: ModelSpace,
    pub params: ProblemParams,
    pub minimizer: RadialField,
    /// `I_β`, `𝓘_β` or `W_max`.
    pub value: f64,
    /// `K₀ = I_β/β` for the `F_λ` problem, the Rayleigh multiplier `λ` for
    /// the energy problem, `λ = (α/β)‖∇u‖²/‖u‖²` for the Weinstein problem.
    pub multiplier: f64,
    /// Coefficient `K` of the Weinstein Euler-Lagrange equation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    /// Least-squares `(λ', K')` with `-Δu + λ'u ≈ K'u^p` for the returned
    /// field (Weinstein problem on Euclidean space).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_multipliers: Option<(f64, f64)>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<(usize, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip)]
    pub iterates: Vec<RadialField>,
}

impl SolveReport {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.minimizer.grid
    }

    /// Error if the solve did not converge.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(format!(
                "{:?} solve stopped after {} iterations (residual {:.3e})",
                self.problem, self.iterations, self.residual
            )))
        }
    }
}

/// Iterates kept every `stride` steps; the stride doubles whenever the log
/// is full, so at most `2·cap` fields are held during a long solve.
pub(crate) struct IterateLog {
    cap: usize,
    stride: usize,
    grid: Arc<RadialGrid>,
    kept: Vec<(usize, Vec<f64>)>,
    last: Option<(usize, Vec<f64>)>,
}

impl IterateLog {
    pub(crate) fn new(cfg: &SolverConfig, grid: &Arc<RadialGrid>) -> Self {
        IterateLog {
            cap: cfg.keep_iterates,
            stride: 1,
            grid: Arc::clone(grid),
            kept: Vec::new(),
            last: None,
        }
    }

    pub(crate) fn push(&mut self, it: usize, u: &[f64]) {
        if self.cap == 0 {
            return;
        }
        if it % self.stride == 0 {
            self.kept.push((it, u.to_vec()));
            if self.kept.len() >= 2 * self.cap.max(1) {
                self.stride *= 2;
                let stride = self.stride;
                self.kept.retain(|(i, _)| i % stride == 0);
            }
        }
        match &mut self.last {
            Some((i, v)) => {
                *i = it;
                v.copy_from_slice(u);
            }
            None => self.last = Some((it, u.to_vec())),
        }
    }

    /// At most `cap` iterates, evenly spread, ending with the last one.
    pub(crate) fn finish(self) -> Vec<RadialField> {
        let mut kept = self.kept;
        if let Some((i, v)) = self.last {
            if kept.last().map(|k| k.0) != Some(i) {
                kept.push((i, v));
            }
        }
        let n = kept.len();
        let cap = self.cap;
        let picks: Vec<usize> = if n <= cap {
            (0..n).collect()
        } else if cap == 1 {
            vec![n - 1]
        } else {
            (0..cap).map(|i| (i * (n - 1)) / (cap - 1)).collect()
        };
        picks
            .into_iter()
            .map(|i| RadialField {
                grid: Arc::clone(&self.grid),
                values: std::mem::take(&mut kept[i].1),
            })
            .collect()
    }
}

/// Rescales an `F_λ` minimizer `u` (which solves `-Δu + λu = K₀u^p`) to
/// `κu` with `κ = K₀^{1/(p-1)}`, which solves `-Δv + λv = v^p` and minimizes
/// `F_λ` at the constraint level `J_p(κu) = κ^{p+1} β`.
pub fn rescale_to_unit_k(report: &SolveReport) -> Result<(RadialField, f64)> {
    if report.problem != Problem::FLambda {
        return Err(Error::InvalidReport("rescaling needs an F_λ report".into()));
    }
    let k0 = report.multiplier;
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::InvalidReport(format!("multiplier K₀ = {k0} must be positive")));
    }
    let p = report.params.p;
    let kappa = k0.powf(1.0 / (p - 1.0));
    let v = report.minimizer.scaled(kappa);
    let beta = v.lp_integral(p + 1.0);
    Ok((v, beta))
}

/// Relative residual of `-Δu + λu - u^p` for a `K = 1` profile.
pub fn unit_residual(u: &RadialField, params: &ProblemParams) -> f64 {
    el_residual(u, params.lambda, 1.0, params.p)
}

/// Grid for a solve, honouring the configured truncation radius.
pub fn grid_for(space: &ModelSpace, lambda: f64, cfg: &SolverConfig) -> Result<Arc<RadialGrid>> {
    let r_max = match space.kind {
        crate::spaces::SpaceKind::Annulus => None,
        _ => Some(cfg.r_max.unwrap_or_else(|| RadialGrid::default_r_max(space, lambda))),
    };
    RadialGrid::new(*space, r_max, cfg.m)
}

/// Least-squares slope of `log |u|` over the outer quarter of the resolved
/// profile: nodes where `|u|` is above `1e-10` of its peak, stopping short of
/// the last tenth of the grid where the outer Dirichlet condition bends it.
pub fn decay_rate(u: &RadialField) -> f64 {
    let g = &u.grid;
    let peak = u.max_abs();
    let r_sig = (0..g.m)
        .rev()
        .find(|&i| u.values[i].abs() > 1e-10 * peak)
        .map(|i| g.nodes[i])
        .unwrap_or(g.r_min);
    let hi = r_sig.min(g.r_min + 0.9 * (g.r_max - g.r_min));
    let lo = g.r_min + 0.75 * (hi - g.r_min);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..g.m)
        .filter(|&i| g.nodes[i] >= lo && g.nodes[i] <= hi && u.values[i] != 0.0)
        .map(|i| (g.nodes[i], u.values[i].abs().ln()))
        .unzip();
    if xs.len() < 3 {
        return f64::NAN;
    }
    crate::numerics::linear_fit(&xs, &ys).0
}
