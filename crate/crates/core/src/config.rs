//! Numerical settings shared by the solvers and experiments.

use serde::{Deserialize, Serialize};

/// Grid, stopping and line-search settings for every iterative solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Number of interior grid nodes.
    pub m: usize,
    /// Truncation radius; `None` picks [`crate::RadialGrid::default_r_max`].
    pub r_max: Option<f64>,
    /// Relative Euler-Lagrange residual required for convergence.
    pub residual_tol: f64,
    /// Relative change of the objective over `stall_window` iterations.
    pub value_tol: f64,
    pub stall_window: usize,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_halvings: u32,
    /// Number of intermediate iterates kept in the report (0 = none).
    pub keep_iterates: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            m: 4000,
            r_max: None,
            residual_tol: 1e-6,
            value_tol: 1e-12,
            stall_window: 10,
            max_iter: 200_000,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_halvings: 60,
            keep_iterates: 0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }
}

/// Decision thresholds of the trichotomy classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcThresholds {
    /// `α ≤ vanish` ⇒ vanishing.
    pub vanish: f64,
    /// `α ≥ 1 - conc` ⇒ concentration.
    pub conc: f64,
    /// Maximal spread of `Q_k(R_max)` over the last quartile of `k`.
    pub stabilization: f64,
    /// Largest number of candidate centres per cloud (heaviest atoms first).
    pub max_centers: usize,
}

impl Default for CcThresholds {
    fn default() -> Self {
        CcThresholds {
            vanish: 0.05,
            conc: 0.05,
            stabilization: 0.02,
            max_centers: 2048,
        }
    }
}
