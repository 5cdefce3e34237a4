//! Preconditioned ascent of the Weinstein quotient
//! `W(u) = J_p(u) / (‖u‖^α ‖∇u‖^β)`.
//!
//! At a critical point `-Δu + λu = K u^p` with
//! `λ = (α/β) ‖∇u‖²/‖u‖²` and `K = (p+1)‖∇u‖²/(β J_p)`.
//!
//! On a fixed radial grid the discrete quotient is only approximately
//! dilation invariant, and an unconstrained ascent creeps along the dilation
//! mode without converging. On Euclidean space the iterates are therefore
//! kept on the gauge set `‖u‖ = ‖∇u‖ = 1`: the preconditioned gradient is
//! projected onto its tangent space and every step is retracted back onto
//! it. A maximizer on the gauge set solves `-Δu + λ'u = K'u^p` for some pair
//! `(λ', K')`, recovered by least squares and reported next to the pair
//! above; the two agree up to the discretization error.

use std::sync::Arc;

use super::{grid_for, IterateLog, Problem, SolveReport};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::{weighted_dot, OriginParity, ProblemParams, RadialField, RadialGrid, Stiffness};
use crate::spaces::{ModelSpace, SpaceKind};

use super::flow::rounding_slack;

fn validate(space: &ModelSpace, params: &ProblemParams) -> Result<()> {
    match space.kind {
        SpaceKind::Euclidean | SpaceKind::Hyperbolic => {}
        _ => {
            return Err(Error::UnsupportedGeometry(format!(
                "the Weinstein maximizer runs on Euclidean or hyperbolic space, not {space}"
            )))
        }
    }
    if space.n != params.n {
        return Err(Error::Parameter("params dimension differs from the space".into()));
    }
    let pmax = ProblemParams::p_max_f(params.n);
    if !(params.p > 1.0 && params.p < pmax) {
        return Err(Error::Parameter(format!("p = {} outside (1, {pmax})", params.p)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct Parts {
    q: f64,
    d: f64,
    j: f64,
}

struct Ops {
    grid: Arc<RadialGrid>,
    stiff: Stiffness,
    p: f64,
    alpha: f64,
    beta: f64,
}

impl Ops {
    fn new(grid: &Arc<RadialGrid>, params: &ProblemParams) -> Self {
        let (alpha, beta) = params.weinstein_exponents();
        Ops {
            stiff: Stiffness::assemble(grid, OriginParity::Even),
            grid: Arc::clone(grid),
            p: params.p,
            alpha,
            beta,
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        weighted_dot(&self.grid.weights, a, b)
    }

    /// `⟨∇a, ∇b⟩`.
    fn grad_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.stiff.apply(a).iter().zip(b).map(|(x, y)| x * y).sum()
    }

    fn neg_lap(&self, u: &[f64]) -> Vec<f64> {
        self.stiff.apply(u).iter().zip(&self.grid.weights).map(|(a, w)| a / w).collect()
    }

    fn parts(&self, u: &[f64]) -> Parts {
        Parts {
            q: self.dot(u, u),
            d: self.grad_dot(u, u),
            j: self
                .grid
                .weights
                .iter()
                .zip(u)
                .map(|(w, v)| w * v.abs().powf(self.p + 1.0))
                .sum(),
        }
    }

    fn log_w(&self, s: &Parts) -> f64 {
        s.j.ln() - 0.5 * self.alpha * s.q.ln() - 0.5 * self.beta * s.d.ln()
    }

    fn multipliers(&self, s: &Parts) -> (f64, f64) {
        let lambda = self.alpha / self.beta * s.d / s.q;
        let k = (self.p + 1.0) / self.beta * s.d / s.j;
        (lambda, k)
    }

    fn nonlinear(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|v| v.abs().powf(self.p - 1.0) * v).collect()
    }

    /// `-Δu + λu - K|u|^{p-1}u` and its relative weighted norm.
    fn residual(&self, u: &[f64], lambda: f64, k: f64) -> (Vec<f64>, f64) {
        let lap = self.neg_lap(u);
        let nl = self.nonlinear(u);
        let r: Vec<f64> = (0..u.len()).map(|i| lap[i] + lambda * u[i] - k * nl[i]).collect();
        let rel = (self.dot(&r, &r) / self.dot(u, u)).sqrt();
        (r, rel)
    }

    /// Least-squares pair `(λ', K')` for `-Δu + λ'u = K'|u|^{p-1}u`.
    fn fitted(&self, u: &[f64]) -> (f64, f64) {
        let a = self.neg_lap(u);
        let v = self.nonlinear(u);
        let (uu, uv, vv) = (self.dot(u, u), self.dot(u, &v), self.dot(&v, &v));
        let (au, av) = (self.dot(&a, u), self.dot(&a, &v));
        // [uu -uv; -uv vv] [λ; K] = [-au; av]
        let det = uu * vv - uv * uv;
        let lambda = (-au * vv + uv * av) / det;
        let k = (uu * av - uv * au) / det;
        (lambda, k)
    }

    fn precondition(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let w = &self.grid.weights;
        let shift: Vec<f64> = w.iter().map(|w| s * w).collect();
        let rhs: Vec<f64> = b.iter().zip(w).map(|(b, w)| b * w).collect();
        self.stiff.solve_shifted(&shift, &rhs)
    }

    /// `‖∇x‖² - ‖x‖²` as a symmetric bilinear form.
    fn gap(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grad_dot(a, b) - self.dot(a, b)
    }

    /// Maps `v` onto `‖v‖ = ‖∇v‖ = 1` along `v + τz`, then rescales.
    fn retract(&self, v: &[f64], z: &[f64]) -> Option<Vec<f64>> {
        let c0 = self.gap(v, v);
        let c1 = 2.0 * self.gap(v, z);
        let c2 = self.gap(z, z);
        let tau = if c2.abs() <= 1e-14 * c1.abs() {
            -c0 / c1
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc < 0.0 {
                return None;
            }
            // Root of smallest modulus, in the cancellation-free form.
            let qd = -0.5 * (c1 + c1.signum() * disc.sqrt());
            c0 / qd
        };
        if !tau.is_finite() {
            return None;
        }
        let mut out: Vec<f64> = v.iter().zip(z).map(|(a, b)| (a + tau * b).abs()).collect();
        let q = self.dot(&out, &out);
        if !(q > 0.0 && q.is_finite()) {
            return None;
        }
        let a = q.sqrt().recip();
        out.iter_mut().for_each(|x| *x *= a);
        Some(out)
    }
}

/// Maximizes `W` over radial fields.
///
/// Euclidean: the maximizer is returned in the gauge `‖u‖ = ‖∇u‖ = 1`, so
/// `λ = α/β` and `K = (p+1)/(β W_max)`. Hyperbolic (exploratory, no
/// dilations): iterates are held at `‖∇u‖ = 1` and the report carries the
/// last iterate with the multipliers it implies.
pub fn maximize_w(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    validate(space, params)?;
    let (alpha, beta) = params.weinstein_exponents();
    let grid = grid_for(space, (alpha / beta).max(0.1), cfg)?;
    maximize_w_on(&grid, params, cfg)
}

/// [`maximize_w`] on a given grid.
pub fn maximize_w_on(grid: &Arc<RadialGrid>, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    validate(&grid.space, params)?;
    if grid.space.kind == SpaceKind::Euclidean {
        gauged_ascent(grid, params, cfg)
    } else {
        free_ascent(grid, params, cfg)
    }
}

struct Progress {
    trace: Vec<(usize, f64)>,
    iterates: IterateLog,
    history: Vec<f64>,
    best: f64,
}

impl Progress {
    fn new(cfg: &SolverConfig, grid: &Arc<RadialGrid>) -> Self {
        Progress {
            trace: Vec::new(),
            iterates: IterateLog::new(cfg, grid),
            history: Vec::new(),
            best: f64::NEG_INFINITY,
        }
    }

    /// Records a value; true once it has stalled over the window.
    fn record(&mut self, it: usize, value: f64, u: &[f64], cfg: &SolverConfig) -> bool {
        self.best = self.best.max(value);
        self.trace.push((it, value));
        self.iterates.push(it, u);
        self.history.push(value);
        let n = self.history.len();
        n > cfg.stall_window && {
            let old = self.history[n - 1 - cfg.stall_window];
            (value - old).abs() <= cfg.value_tol * value
        }
    }
}

fn gaussian_start(ops: &Ops, dilate: bool) -> Vec<f64> {
    let grid = &ops.grid;
    let probe = grid.sample(|r| (-r * r).exp());
    let s0 = ops.parts(&probe);
    // ‖∇u‖²/‖u‖² scales as c⁻² under u(r/c).
    let c = if dilate { (s0.d / s0.q).sqrt() } else { 1.0 };
    grid.sample(|r| (-(r / c).powi(2)).exp())
}

fn gauged_ascent(grid: &Arc<RadialGrid>, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    let ops = Ops::new(grid, params);
    let start = gaussian_start(&ops, true);
    let mut u = ops
        .retract(&start, &ops.precondition(1.0, &start))
        .ok_or_else(|| Error::Numerical("cannot gauge the initial Weinstein iterate".into()))?;

    let mut progress = Progress::new(cfg, grid);
    let mut converged = false;
    let mut iterations = 0;
    let mut residual;

    loop {
        let s = ops.parts(&u);
        let lw = ops.log_w(&s);
        let (lf, kf) = ops.fitted(&u);
        residual = ops.residual(&u, lf, kf).1;
        let stalled = progress.record(iterations, lw.exp(), &u, cfg);
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite residual in Weinstein ascent".into()));
        }
        if residual < cfg.residual_tol && stalled {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        // Ascent direction of log W, preconditioned and projected onto the
        // tangent space of the gauge set (normals u and -Δu).
        let (lambda, k) = ops.multipliers(&s);
        let (r, _) = ops.residual(&u, lambda, k);
        let g: Vec<f64> = r.iter().map(|x| -ops.beta / s.d * x).collect();
        let shift = lf.max(0.05);
        let pg = ops.precondition(shift, &g);
        let a2 = ops.neg_lap(&u);
        let pa1 = ops.precondition(shift, &u);
        let pa2 = ops.precondition(shift, &a2);
        let m = [
            [ops.dot(&u, &pa1), ops.dot(&u, &pa2)],
            [ops.dot(&a2, &pa1), ops.dot(&a2, &pa2)],
        ];
        let b = [ops.dot(&u, &pg), ops.dot(&a2, &pg)];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let c1 = (b[0] * m[1][1] - m[0][1] * b[1]) / det;
        let c2 = (m[0][0] * b[1] - m[1][0] * b[0]) / det;
        let d: Vec<f64> = (0..u.len()).map(|i| pg[i] - c1 * pa1[i] - c2 * pa2[i]).collect();
        let slope = ops.dot(&g, &d);
        if !(slope > 0.0) {
            converged = residual < cfg.residual_tol;
            break;
        }

        let slack = rounding_slack(grid.m, lw.abs().max(1.0));
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let v: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if let Some(trial) = ops.retract(&v, &pa1) {
                let lt = ops.log_w(&ops.parts(&trial));
                if lt.is_finite() && lt >= lw + cfg.armijo_c * t * slope - slack {
                    accepted = Some(trial);
                    break;
                }
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

    let s = ops.parts(&u);
    let value = ops.log_w(&s).exp();
    let (lambda, k) = ops.multipliers(&s);
    let fitted = ops.fitted(&u);
    finish(grid, params, u, s, value, progress, (lambda, k), Some(fitted), residual, iterations, converged, None)
}

fn free_ascent(grid: &Arc<RadialGrid>, params: &ProblemParams, cfg: &SolverConfig) -> Result<SolveReport> {
    let ops = Ops::new(grid, params);
    let gauge = |u: &mut Vec<f64>| -> Result<()> {
        let d = ops.parts(u).d;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Numerical("Weinstein iterate degenerated".into()));
        }
        let a = d.sqrt().recip();
        u.iter_mut().for_each(|v| *v = (*v * a).abs());
        Ok(())
    };
    let mut u = gaussian_start(&ops, false);
    gauge(&mut u)?;

    let mut progress = Progress::new(cfg, grid);
    let mut converged = false;
    let mut iterations = 0;
    let mut residual;

    loop {
        let s = ops.parts(&u);
        let lw = ops.log_w(&s);
        let (lambda, k) = ops.multipliers(&s);
        let (r, rel) = ops.residual(&u, lambda, k);
        residual = rel;
        let stalled = progress.record(iterations, lw.exp(), &u, cfg);
        if !residual.is_finite() {
            return Err(Error::Numerical("non-finite residual in Weinstein ascent".into()));
        }
        if residual < cfg.residual_tol && stalled {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }

        // Gradient of -log W is (β/‖∇u‖²) r.
        let pr = ops.precondition(lambda.max(1e-3), &r);
        let slope = -ops.beta / s.d * ops.dot(&r, &pr);
        let slack = rounding_slack(grid.m, lw.abs().max(1.0));
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&pr).map(|(a, d)| a - t * d).collect();
            let lt = ops.log_w(&ops.parts(&trial));
            if lt.is_finite() && -lt <= -lw + cfg.armijo_c * t * slope + slack {
                accepted = Some(trial);
                break;
            }
            t *= cfg.backtrack;
        }
        iterations += 1;
        match accepted {
            Some(next) => {
                u = next;
                gauge(&mut u)?;
            }
            None => {
                converged = residual < cfg.residual_tol;
                break;
            }
        }
    }

    let s = ops.parts(&u);
    let value = ops.log_w(&s).exp();
    let (lambda, k) = ops.multipliers(&s);
    let residual = ops.residual(&u, lambda, k).1;
    let warning = Some(
        "hyperbolic space has no dilations; the iterates are only gauged to ‖∇u‖ = 1 and need not converge to a maximizer"
            .to_string(),
    );
    finish(grid, params, u, s, value, progress, (lambda, k), None, residual, iterations, converged, warning)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    grid: &Arc<RadialGrid>,
    params: &ProblemParams,
    u: Vec<f64>,
    s: Parts,
    value: f64,
    progress: Progress,
    (lambda, k): (f64, f64),
    fitted: Option<(f64, f64)>,
    residual: f64,
    iterations: usize,
    converged: bool,
    warning: Option<String>,
) -> Result<SolveReport> {
    Ok(SolveReport {
        problem: Problem::Weinstein,
        space: grid.space,
        params: ProblemParams {
            lambda,
            k,
            beta: s.q,
            ..*params
        },
        minimizer: RadialField::new(Arc::clone(grid), u)?,
        value: progress.best.max(value),
        multiplier: lambda,
        coupling: Some(k),
        fitted_multipliers: fitted,
        residual,
        iterations,
        converged,
        trace: progress.trace,
        warning,
        iterates: progress.iterates.finish(),
    })
}
