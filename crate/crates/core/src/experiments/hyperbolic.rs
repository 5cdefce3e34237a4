use serde::Serialize;

use super::{ground_state, GroundState};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::{functionals, ProblemParams, RadialField};
use crate::solvers::{maximize_w, unit_residual};
use crate::spaces::{ModelSpace, SpaceKind};

#[derive(Debug, Clone, Serialize)]
pub struct PositiveEnergy {
    pub space: ModelSpace,
    pub ground_state: GroundState,
    pub energy: f64,
    /// `-(λ/2)‖u‖² + (p-1)/(2(p+1)) J_p`
    pub identity_value: f64,
    pub identity_rel_err: f64,
    pub positive: bool,
}

/// Energy of the `K = 1` ground state, with the identity that follows from
/// pairing the equation with `u`. On hyperbolic space with `λ ≤ 0` the
/// energy is positive; on `ℝⁿ` the same pipeline serves as the contrast.
pub fn hyperbolic_positive_energy(space: &ModelSpace, params: &ProblemParams, cfg: &SolverConfig) -> Result<PositiveEnergy> {
    if space.kind == SpaceKind::Hyperbolic && params.lambda > 0.0 {
        return Err(Error::Parameter(format!(
            "positive energy is a statement about λ ≤ 0, got λ = {}",
            params.lambda
        )));
    }
    if !matches!(space.kind, SpaceKind::Hyperbolic | SpaceKind::Euclidean) {
        return Err(Error::Parameter(format!("expected hyperbolic or Euclidean space, got {space}")));
    }
    let g = ground_state(space, params, cfg)?;
    let f = g.functionals;
    let p = params.p;
    let energy = f.energy;
    let identity_value = -0.5 * params.lambda * f.mass + (p - 1.0) / (2.0 * (p + 1.0)) * f.j_p;
    Ok(PositiveEnergy {
        space: *space,
        energy,
        identity_value,
        identity_rel_err: (energy - identity_value).abs() / energy.abs().max(f64::MIN_POSITIVE),
        positive: energy > 0.0,
        ground_state: g,
    })
}

/// Gate on the residual of `-Δv = v^p`.
pub const ZERO_MULTIPLIER_GATE: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct ZeroMultiplier {
    pub residual: f64,
    pub gradient: f64,
    pub j_p: f64,
    /// `|‖∇v‖² - J_p| / J_p`
    pub gradient_rel_err: f64,
    pub energy: f64,
    /// `(1/2 - 1/(p+1)) J_p`
    pub expected_energy: f64,
    pub energy_rel_err: f64,
    pub positive: bool,
}

/// `‖∇v‖² = ∫v^{p+1}` and `E(v) = (1/2 - 1/(p+1)) ∫v^{p+1}` for a solution
/// of `-Δv = v^p`.
pub fn zero_multiplier_identity(v: &RadialField, p: f64) -> Result<ZeroMultiplier> {
    let params = ProblemParams::new(v.grid.space.n, p, 0.0, 1.0);
    let residual = unit_residual(v, &params);
    if !(residual < ZERO_MULTIPLIER_GATE) {
        return Err(Error::StaleProfile {
            residual,
            gate: ZERO_MULTIPLIER_GATE,
        });
    }
    let f = functionals(v, &params);
    let expected_energy = (0.5 - 1.0 / (p + 1.0)) * f.j_p;
    Ok(ZeroMultiplier {
        residual,
        gradient: f.gradient,
        j_p: f.j_p,
        gradient_rel_err: (f.gradient - f.j_p).abs() / f.j_p,
        energy: f.energy,
        expected_energy,
        energy_rel_err: (f.energy - expected_energy).abs() / expected_energy.abs(),
        positive: f.energy > 0.0,
    })
}

/// Which behaviour the gauged iterates on hyperbolic space show.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum HyperbolicCase {
    /// `‖u_ν‖ → A > 0`
    MassPersists { limit: f64 },
    /// `‖u_ν‖ → 0`
    MassEscapes,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeinsteinExploration {
    pub n: usize,
    pub p: f64,
    /// Last value of `W` along the ascent.
    pub w_value: f64,
    /// `W_max` on `ℝⁿ`, for comparison.
    pub w_euclidean: Option<f64>,
    /// `(iteration, ‖u_ν‖)` with `‖∇u_ν‖ = 1`.
    pub mass_trace: Vec<(usize, f64)>,
    pub case: HyperbolicCase,
    pub iterations: usize,
    pub residual: f64,
    pub warning: Option<String>,
}

impl WeinsteinExploration {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample", "l2_norm"])?;
        for (i, m) in &self.mass_trace {
            w.write_record([i.to_string(), crate::fields::fmt_f64(*m)])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("ascii csv"))
    }
}

/// Relative change of `‖u_ν‖` over the last quarter below which it counts
/// as settled.
const SETTLED: f64 = 1e-3;

/// Runs the gauged Weinstein ascent on `ℍⁿ` and reports whether `‖u_ν‖`
/// settles at a positive value or decays. Nothing is asserted about the
/// outcome.
pub fn weinstein_hyperbolic(n: usize, p: f64, cfg: &SolverConfig) -> Result<WeinsteinExploration> {
    let space = ModelSpace::hyperbolic(n)?;
    let params = ProblemParams::new(n, p, 1.0, 1.0);
    let cfg = SolverConfig {
        keep_iterates: cfg.keep_iterates.max(64),
        ..*cfg
    };
    let rep = maximize_w(&space, &params, &cfg)?;
    let w_euclidean = maximize_w(&ModelSpace::euclidean(n)?, &params, &SolverConfig { keep_iterates: 0, ..cfg })
        .ok()
        .map(|r| r.value);
    let mass_trace: Vec<(usize, f64)> = rep.iterates.iter().enumerate().map(|(i, u)| (i, u.norm())).collect();
    let case = classify_masses(&mass_trace.iter().map(|m| m.1).collect::<Vec<_>>());
    Ok(WeinsteinExploration {
        n,
        p,
        w_value: rep.value,
        w_euclidean,
        mass_trace,
        case,
        iterations: rep.iterations,
        residual: rep.residual,
        warning: rep.warning,
    })
}

fn classify_masses(m: &[f64]) -> HyperbolicCase {
    if m.len() < 4 {
        return HyperbolicCase::Undetermined;
    }
    let last = *m.last().expect("nonempty");
    let q = m[m.len() - 1 - m.len() / 4];
    let peak = m.iter().cloned().fold(0.0, f64::max);
    if (last - q).abs() <= SETTLED * last && last > 1e-3 * peak {
        HyperbolicCase::MassPersists { limit: last }
    } else if last < 0.5 * peak && m[m.len() / 2..].windows(2).all(|w| w[1] <= w[0]) {
        HyperbolicCase::MassEscapes
    } else {
        HyperbolicCase::Undetermined
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_classification() {
        let settled: Vec<f64> = (0..20).map(|i| 1.0 + (-(i as f64)).exp()).collect();
        assert!(matches!(classify_masses(&settled), HyperbolicCase::MassPersists { .. }));
        let decaying: Vec<f64> = (0..20).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(classify_masses(&decaying), HyperbolicCase::MassEscapes);
        assert_eq!(classify_masses(&[1.0, 2.0]), HyperbolicCase::Undetermined);
    }
}
