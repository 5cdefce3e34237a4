//! Preconditioned descent for the two constrained minimization problems.

use std::sync::Arc;

use super::{grid_for, IterateLog, Problem, SolveReport};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::{weighted_dot, OriginParity, ProblemParams, RadialField, RadialGrid, Stiffness};
use crate::spaces::ModelSpace;

/// Discrete pieces shared by the descent loops.
struct Discretization {
    grid: Arc<RadialGrid>,
    stiff: Stiffness,
}

impl Discretization {
    fn new(grid: &Arc<RadialGrid>) -> Self {
        Discretization {
            stiff: Stiffness::assemble(grid, OriginParity::Even),
            grid: Arc::clone(grid),
        }
    }

    fn w(&self) -> &[f64] {
        &self.grid.weights
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        weighted_dot(self.w(), a, b)
    }

    fn gradient_sq(&self, u: &[f64]) -> f64 {
        self.stiff.apply(u).iter().zip(u).map(|(a, b)| a * b).sum()
    }

    fn neg_lap(&self, u: &[f64]) -> Vec<f64> {
        self.stiff.apply(u).iter().zip(self.w()).map(|(a, w)| a / w).collect()
    }

    fn lp(&self, u: &[f64], q: f64) -> f64 {
        self.w().iter().zip(u).map(|(w, v)| w * v.abs().powf(q)).sum()
    }

    /// `(-Δ + s)⁻¹ b`.
    fn precondition(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let shift: Vec<f64> = self.w().iter().map(|w| s * w).collect();
        let rhs: Vec<f64> = b.iter().zip(self.w()).map(|(b, w)| b * w).collect();
        self.stiff.solve_shifted(&shift, &rhs)
    }
}

fn initial_guess(grid: &Arc<RadialGrid>) -> Vec<f64> {
    let lo = grid.r_min;
    if grid.space.contains_origin() {
        grid.sample(|r| (-r * r).exp())
    } else {
        let width = ((grid.r_max - lo) / 4.0).min(1.0);
        grid.sample(|r| {
            let x = (r - lo) / width;
            x * (-x * x).exp()
        })
    }
}

/// Slack for comparing two sums of `m` terms of size `scale`: a step that
/// changes the value by less than this is indistinguishable from rounding.
pub(super) fn rounding_slack(m: usize, scale: f64) -> f64 {
    8.0 * f64::EPSILON * (m as f64).sqrt() * scale.abs()
}

fn pow_signed(v: f64, p: f64) -> f64 {
    v.abs().powf(p - 1.0) * v
}

struct StallDetector {
    history: Vec<f64>,
    window: usize,
    tol: f64,
}

impl StallDetector {
    fn push(&mut self, v: f64) -> bool {
        self.history.push(v);
        let n = self.history.len();
        if n <= self.window {
            return false;
        }
        let old = self.history[n - 1 - self.window];
        (v - old).abs() <= self.tol * v.abs().max(f64::MIN_POSITIVE)
    }
}


/// Minimizes `F_λ(u)/J_p(u)^{2/(p+1)}` on the default grid of `space` and
/// rescales to `J_p = β`.
pub fn minimize_f(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    params.validate_f(space)?;
    let grid = grid_for(space, params.lambda, cfg)?;
    minimize_f_on(&grid, params, cfg, None)
}

/// [`minimize_f`] on a given grid, optionally from a given starting field.
pub fn minimize_f_on(
    grid: &Arc<RadialGrid>,
    params: &ProblemParams,
    cfg: &SolverConfig,
    init: Option<&RadialField>,
) -> Result<SolveReport> {
    params.validate_f(&grid.space)?;
    let disc = Discretization::new(grid);
    let (p, lambda, beta) = (params.p, params.lambda, params.beta);
    let q = p + 1.0;
    let expo = 2.0 / q;

    let mut u = match init {
        Some(f) => {
            if !(*f.grid == **grid) {
                return Err(Error::Shape("initial field lives on another grid".into()));
            }
            f.values.iter().map(|v| v.abs()).collect()
        }
        None => initial_guess(grid),
    };
    let normalize = |u: &mut Vec<f64>| -> Result<()> {
        let j = disc.lp(u, q);
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::Numerical("iterate has vanishing or non-finite L^{p+1} norm".into()));
        }
        let c = (beta / j).powf(1.0 / q);
        u.iter_mut().for_each(|v| *v = (*v * c).abs());
        Ok(())
    };
    let quotient = |u: &[f64]| {
        let f = disc.gradient_sq(u) + lambda * disc.dot(u, u);
        f / disc.lp(u, q).powf(expo)
    };
    normalize(&mut u)?;

    let mut trace = Vec::new();
    let mut iterates = IterateLog::new(cfg, grid);
    let mut stall = StallDetector {
        history: Vec::new(),
        window: cfg.stall_window,
        tol: cfg.value_tol,
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut residual;
    let mut multiplier;
    let mut value;

    loop {
        let lap = disc.neg_lap(&u);
        let f = disc.dot(&lap, &u) + lambda * disc.dot(&u, &u);
        let j = disc.lp(&u, q);
        multiplier = f / j;
        value = f * (beta / j).powf(expo);
        let r: Vec<f64> = (0..u.len())
            .map(|i| lap[i] + lambda * u[i] - multiplier * pow_signed(u[i], p))
            .collect();
        residual = (disc.dot(&r, &r) / disc.dot(&u, &u)).sqrt();
        trace.push((iterations, value));
        iterates.push(iterations, &u);
        let stalled = stall.push(value);
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite residual in F_λ descent".into()));
        }
        if residual < cfg.residual_tol && stalled {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        let pr = disc.precondition(lambda, &r);
        let slope = -2.0 * disc.dot(&r, &pr) / j.powf(expo);
        let r0 = f / j.powf(expo);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&pr).map(|(a, d)| a - t * d).collect();
            let rt = quotient(&trial);
            if rt.is_finite() && rt <= r0 + cfg.armijo_c * t * slope + rounding_slack(grid.m, r0) {
                accepted = Some(trial);
                break;
            }
            t *= cfg.backtrack;
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                u = next;
                normalize(&mut u)?;
            }
            None => {
                // Line search exhausted: we are at the rounding floor.
                converged = residual < cfg.residual_tol;
                break;
            }
        }
    }

    Ok(SolveReport {
        problem: Problem::FLambda,
        space: grid.space,
        params: *params,
        minimizer: RadialField::new(Arc::clone(grid), u)?,
        value,
        multiplier,
        coupling: None,
        fitted_multipliers: None,
        residual,
        iterations,
        converged,
        trace,
        warning: None,
        iterates: iterates.finish(),
    })
}

/// Minimizes `E(u)` subject to `‖u‖² = β` on the default grid.
pub fn minimize_e(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    params.validate_energy(space)?;
    let grid = grid_for(space, params.lambda.max(0.1), cfg)?;
    minimize_e_on(&grid, params, cfg, None)
}

/// Projected preconditioned gradient flow for the energy problem.
///
/// Each step moves along the preconditioned gradient projected onto the
/// tangent space of the mass sphere and renormalizes to `‖u‖² = β`. The
/// multiplier is the Rayleigh quotient `λ = -⟨-Δu - |u|^{p-1}u, u⟩/‖u‖²`.
/// `params.lambda` is ignored.
pub fn minimize_e_on(
    grid: &Arc<RadialGrid>,
    params: &ProblemParams,
    cfg: &SolverConfig,
    init: Option<&RadialField>,
) -> Result<SolveReport> {
    params.validate_energy(&grid.space)?;
    let disc = Discretization::new(grid);
    let (p, beta) = (params.p, params.beta);
    let q = p + 1.0;
    let shift_floor = 0.05 - grid.space.spectral_bottom();

    let mut u = match init {
        Some(f) => {
            if !(*f.grid == **grid) {
                return Err(Error::Shape("initial field lives on another grid".into()));
            }
            f.values.iter().map(|v| v.abs()).collect()
        }
        None => initial_guess(grid),
    };
    let normalize = |u: &mut Vec<f64>| -> Result<()> {
        let mass = disc.dot(u, u);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Numerical("iterate has vanishing or non-finite mass".into()));
        }
        let c = (beta / mass).sqrt();
        u.iter_mut().for_each(|v| *v = (*v * c).abs());
        Ok(())
    };
    let energy = |u: &[f64]| 0.5 * disc.gradient_sq(u) - disc.lp(u, q) / q;
    normalize(&mut u)?;

    let mut trace = Vec::new();
    let mut iterates = IterateLog::new(cfg, grid);
    let mut stall = StallDetector {
        history: Vec::new(),
        window: cfg.stall_window,
        tol: cfg.value_tol,
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut residual;
    let mut multiplier;
    let mut value;

    loop {
        let lap = disc.neg_lap(&u);
        let grad: Vec<f64> = lap.iter().zip(&u).map(|(l, v)| l - pow_signed(*v, p)).collect();
        let mass = disc.dot(&u, &u);
        multiplier = -disc.dot(&grad, &u) / mass;
        let kinetic = 0.5 * disc.dot(&lap, &u);
        let potential = disc.lp(&u, q) / q;
        value = kinetic - potential;
        let slack = rounding_slack(grid.m, kinetic + potential);
        let r: Vec<f64> = grad.iter().zip(&u).map(|(g, v)| g + multiplier * v).collect();
        residual = (disc.dot(&r, &r) / mass).sqrt();
        trace.push((iterations, value));
        iterates.push(iterations, &u);
        let stalled = stall.push(value);
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite residual in energy flow".into()));
        }
        if residual < cfg.residual_tol && stalled {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        let shift = multiplier.max(shift_floor);
        let pr = disc.precondition(shift, &r);
        let pu = disc.precondition(shift, &u);
        let coef = disc.dot(&u, &pr) / disc.dot(&u, &pu);
        let d: Vec<f64> = pr.iter().zip(&pu).map(|(a, b)| -(a - coef * b)).collect();
        let slope = disc.dot(&r, &d);
        if slope >= 0.0 {
            converged = residual < cfg.residual_tol;
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            normalize(&mut trial)?;
            let et = energy(&trial);
            if et.is_finite() && et <= value + cfg.armijo_c * t * slope + slack {
                accepted = Some(trial);
                break;
            }
            t *= cfg.backtrack;
        }
        iterations += 1;
        match accepted {
            Some(next) => u = next,
            None => {
                converged = residual < cfg.residual_tol;
                break;
            }
        }
    }

    let warning = (value >= 0.0).then(|| {
        format!("minimum energy {value:.6e} is not negative; a minimizer need not exist in this setting")
    });
    let mut params = *params;
    params.lambda = multiplier;
    Ok(SolveReport {
        problem: Problem::Energy,
        space: grid.space,
        params,
        minimizer: RadialField::new(Arc::clone(grid), u)?,
        value,
        multiplier,
        coupling: None,
        fitted_multipliers: None,
        residual,
        iterations,
        converged,
        trace,
        warning,
        iterates: iterates.finish(),
    })
}
