//! Shooting for the radial ODE `u'' + ((n-1)/r) u' = λu - u^p`, `u'(0) = 0`.
//!
//! The amplitude `a = u(0)` of the decaying positive solution separates the
//! trajectories that turn back up while positive (amplitude too small) from
//! those that cross zero (amplitude too large); bisection on that dichotomy
//! converges to the ground state. Past the point where the bisected
//! trajectory is trustworthy the profile is continued by the decaying
//! solution of the linearized equation, integrated inward from `r_max`.

use std::sync::Arc;

use super::grid_for;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::{ProblemParams, RadialField, RadialGrid};
use crate::spaces::{ModelSpace, SpaceKind};

const STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    /// `u' > 0` while `u > 0`: amplitude below the ground state.
    TurnsUp,
    /// `u < 0`: amplitude above the ground state.
    CrossesZero,
    /// Neither happened before `r_end`.
    Undecided,
}

struct Ode {
    n: f64,
    lambda: f64,
    p: f64,
    /// Drop the nonlinearity (tail continuation).
    linear: bool,
}

impl Ode {
    fn rhs(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        let friction = if self.n > 1.0 { (self.n - 1.0) / r * v } else { 0.0 };
        let nonlinear = if self.linear { 0.0 } else { u.abs().powf(self.p - 1.0) * u };
        (v, -friction + self.lambda * u - nonlinear)
    }

    fn rk4(&self, r: f64, u: f64, v: f64, h: f64) -> (f64, f64) {
        let (k1u, k1v) = self.rhs(r, u, v);
        let (k2u, k2v) = self.rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = self.rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = self.rhs(r + h, u + h * k3u, v + h * k3v);
        (
            u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }

    /// Regular start `u = a + c r²` off the singular point.
    fn start(&self, a: f64) -> (f64, f64, f64) {
        if self.n <= 1.0 {
            return (0.0, a, 0.0);
        }
        let c = (self.lambda * a - a.abs().powf(self.p - 1.0) * a) / (2.0 * self.n);
        (STEP, a + c * STEP * STEP, 2.0 * c * STEP)
    }
}

/// Trajectory samples `(r, u, u')` on the uniform step grid.
struct Trajectory {
    r0: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    outcome: Outcome,
}

fn integrate(ode: &Ode, a: f64, r_end: f64, record: bool) -> Trajectory {
    let (r0, mut u, mut v) = ode.start(a);
    let steps = ((r_end - r0) / STEP).ceil() as usize;
    let mut tu = Vec::new();
    let mut tv = Vec::new();
    if record {
        tu.reserve(steps + 1);
        tv.reserve(steps + 1);
        tu.push(u);
        tv.push(v);
    }
    let mut outcome = Outcome::Undecided;
    for k in 0..steps {
        let r = r0 + k as f64 * STEP;
        (u, v) = ode.rk4(r, u, v, STEP);
        if record {
            tu.push(u);
            tv.push(v);
        }
        if u < 0.0 {
            outcome = Outcome::CrossesZero;
            break;
        }
        if v > 0.0 {
            outcome = Outcome::TurnsUp;
            break;
        }
    }
    Trajectory { r0, u: tu, v: tv, outcome }
}

fn check_params(space: &ModelSpace, params: &ProblemParams) -> Result<()> {
    if space.kind != SpaceKind::Euclidean {
        return Err(Error::UnsupportedGeometry(format!("shooting is implemented on Euclidean space only, not {space}")));
    }
    if space.n != params.n {
        return Err(Error::Parameter("params dimension differs from the space".into()));
    }
    if !(params.lambda > 0.0) {
        return Err(Error::Parameter(format!("shooting needs λ > 0, got {}", params.lambda)));
    }
    let pmax = ProblemParams::p_max_f(params.n);
    if !(params.p > 1.0 && params.p < pmax) {
        return Err(Error::Parameter(format!("p = {} outside (1, {pmax})", params.p)));
    }
    Ok(())
}

/// Bisection bracket `(turns_up, crosses_zero)` for the amplitude.
fn bracket(ode: &Ode, r_end: f64) -> Result<(f64, f64)> {
    let base = ode.lambda.powf(1.0 / (ode.p - 1.0));
    let mut lo = base * (1.0 + 1e-6);
    let mut hi = 40.0 * base;
    if integrate(ode, lo, r_end, false).outcome != Outcome::TurnsUp {
        return Err(Error::Bracket(format!("amplitude {lo} does not turn up")));
    }
    if integrate(ode, hi, r_end, false).outcome != Outcome::CrossesZero {
        return Err(Error::Bracket(format!("amplitude {hi} does not cross zero")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(ode, mid, r_end, false).outcome {
            Outcome::TurnsUp => lo = mid,
            Outcome::CrossesZero => hi = mid,
            Outcome::Undecided => return Ok((mid, mid)),
        }
    }
    Ok((lo, hi))
}

/// Ground-state amplitude `u(0)` of `-Δu + λu = u^p` on `R^n`.
pub fn shoot_amplitude(n: usize, lambda: f64, p: f64) -> Result<f64> {
    let space = ModelSpace::euclidean(n)?;
    let params = ProblemParams::new(n, p, lambda, 1.0);
    check_params(&space, &params)?;
    let ode = Ode {
        n: n as f64,
        lambda,
        p,
        linear: false,
    };
    let r_end = 80.0 / lambda.sqrt();
    let (lo, hi) = bracket(&ode, r_end)?;
    Ok(0.5 * (lo + hi))
}

/// Shooting solution sampled on the default grid for `space`.
pub fn shoot(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<RadialField> {
    check_params(space, params)?;
    let grid = grid_for(space, params.lambda, cfg)?;
    shoot_on(&grid, params)
}

fn hermite(u0: f64, v0: f64, u1: f64, v1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * h * v0 + (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * h * v1
}

/// Shooting solution of `-Δu + λu = u^p` sampled at the nodes of `grid`
/// (Euclidean, `u = 0` at `r_max`).
pub fn shoot_on(grid: &Arc<RadialGrid>, params: &ProblemParams) -> Result<RadialField> {
    check_params(&grid.space, params)?;
    let ode = Ode {
        n: params.n as f64,
        lambda: params.lambda,
        p: params.p,
        linear: false,
    };
    let r_end = grid.r_max;
    let (lo, hi) = bracket(&ode, r_end)?;
    let a = lo;
    let low = integrate(&ode, lo, r_end, true);
    let high = integrate(&ode, hi, r_end, true);

    // Splice point: the profile has decayed far enough for the equation to be
    // linear, and the two bracketing trajectories still agree.
    let floor = 1e-7 * a;
    let len = low.u.len().min(high.u.len());
    let mut splice = None;
    for k in 1..len {
        if (low.u[k] - high.u[k]).abs() > 1e-9 * a {
            if low.u[k] > 1e-4 * a {
                return Err(Error::Numerical(format!(
                    "bracketing trajectories separate at r = {:.3} before the profile has decayed",
                    low.r0 + k as f64 * STEP
                )));
            }
            splice = Some(k);
            break;
        }
        if low.u[k] < floor {
            splice = Some(k);
            break;
        }
    }
    let splice = splice.unwrap_or(len - 1);
    let r_splice = low.r0 + splice as f64 * STEP;

    // Decaying mode of the linear equation with u(r_max) = 0, integrated
    // inward (stable direction for this mode).
    let lin = Ode { linear: true, ..ode };
    let tail_steps = ((r_end - r_splice) / STEP).ceil().max(1.0) as usize;
    let hs = (r_end - r_splice) / tail_steps as f64;
    let mut tail_u = vec![0.0; tail_steps + 1];
    let mut tail_v = vec![0.0; tail_steps + 1];
    tail_u[tail_steps] = 0.0;
    tail_v[tail_steps] = -1.0;
    for k in (0..tail_steps).rev() {
        let r = r_splice + (k + 1) as f64 * hs;
        let (u, v) = lin.rk4(r, tail_u[k + 1], tail_v[k + 1], -hs);
        tail_u[k] = u;
        tail_v[k] = v;
        // Renormalize to stay in range; only the shape matters.
        if u.abs() > 1e200 {
            for j in k..=tail_steps {
                tail_u[j] *= 1e-200;
                tail_v[j] *= 1e-200;
            }
        }
    }
    let scale = low.u[splice] / tail_u[0];

    let values = grid
        .nodes
        .iter()
        .map(|&r| {
            if r < r_splice {
                let s = ((r - low.r0) / STEP).max(0.0);
                let k = (s.floor() as usize).min(splice - 1);
                let t = s - k as f64;
                if r < low.r0 {
                    // Inside the series start: u = a + c r².
                    let c = (low.u[0] - a) / (low.r0 * low.r0);
                    return a + c * r * r;
                }
                hermite(low.u[k], low.v[k], low.u[k + 1], low.v[k + 1], STEP, t)
            } else {
                let s = (r - r_splice) / hs;
                let k = (s.floor() as usize).min(tail_steps - 1);
                let t = s - k as f64;
                scale * hermite(tail_u[k], tail_v[k], tail_u[k + 1], tail_v[k + 1], hs, t)
            }
        })
        .collect();
    RadialField::new(Arc::clone(grid), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_soliton_amplitude() {
        let a = shoot_amplitude(1, 1.0, 3.0).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-6, "{a}");
        // u_λ(x) = λ^{1/(p-1)} u_1(√λ x) ⇒ a(λ) = λ^{1/(p-1)} a(1).
        let a4 = shoot_amplitude(1, 4.0, 3.0).unwrap();
        assert!((a4 - 2.0 * 2f64.sqrt()).abs() < 1e-6, "{a4}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = SolverConfig::default().with_m(100);
        let h = ModelSpace::hyperbolic(2).unwrap();
        assert!(matches!(
            shoot(&h, &ProblemParams::new(2, 3.0, 1.0, 1.0), &cfg),
            Err(Error::UnsupportedGeometry(_))
        ));
        let e = ModelSpace::euclidean(2).unwrap();
        assert!(shoot(&e, &ProblemParams::new(2, 3.0, 0.0, 1.0), &cfg).is_err());
        assert!(shoot_amplitude(3, 1.0, 5.0).is_err());
    }

    #[test]
    fn sech_profile() {
        let cfg = SolverConfig::default().with_m(8000);
        let space = ModelSpace::euclidean(1).unwrap();
        let u = shoot(&space, &ProblemParams::new(1, 3.0, 1.0, 1.0), &cfg).unwrap();
        let exact = RadialField::from_fn(&u.grid, |r| 2f64.sqrt() / r.cosh());
        let err = u.rel_sup_diff(&exact).unwrap();
        assert!(err < 1e-6, "{err}");
    }
}
