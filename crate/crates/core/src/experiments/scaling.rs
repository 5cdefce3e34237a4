use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ground_state, GroundState};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fields::ProblemParams;
use crate::numerics::{linear_fit, log_space};
use crate::solvers::minimize_f;
use crate::spaces::ModelSpace;

/// Relative step of the extra solves used for `de/dλ` and `dq/dλ`.
pub const LAMBDA_STEP: f64 = 0.01;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingConfig {
    pub n: usize,
    pub p: f64,
    pub lambdas: Vec<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            n: 2,
            p: 2.0,
            lambdas: log_space(0.25, 4.0, 8),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub lambda: f64,
    /// `e(λ) = E(u_λ)`
    pub energy: Option<f64>,
    /// `q(λ) = ½‖u_λ‖²`
    pub half_mass: Option<f64>,
    pub residual: Option<f64>,
    pub de_dlambda: Option<f64>,
    pub dq_dlambda: Option<f64>,
    /// `|e' + λq'| / max(|e'|, |λq'|)`
    pub identity_rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingScan {
    pub n: usize,
    pub p: f64,
    /// `γ = 2/(p-1) - n/2`
    pub gamma: f64,
    pub rows: Vec<ScalingRow>,
    pub mass_exponent: f64,
    pub energy_exponent: f64,
    pub mass_exponent_err: f64,
    pub energy_exponent_err: f64,
    pub max_identity_err: f64,
    pub all_energy_negative: bool,
    pub all_energy_positive: bool,
    pub failures: usize,
}

impl ScalingScan {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["lambda", "energy", "half_mass", "residual", "de_dlambda", "dq_dlambda", "identity_rel_err"])?;
        let f = |v: Option<f64>| v.map(crate::fields::fmt_f64).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                crate::fields::fmt_f64(r.lambda),
                f(r.energy),
                f(r.half_mass),
                f(r.residual),
                f(r.de_dlambda),
                f(r.dq_dlambda),
                f(r.identity_rel_err),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("ascii csv"))
    }
}

fn solve_point(space: &ModelSpace, n: usize, p: f64, lambda: f64, cfg: &SolverConfig) -> Result<GroundState> {
    ground_state(space, &ProblemParams::new(n, p, lambda, 1.0), cfg)
}

/// Energy and half mass of the `K = 1` ground states `u_λ` on `ℝⁿ` across
/// `λ`, their power-law exponents, and `de/dλ = -λ dq/dλ` at the interior
/// points from extra solves at `λ(1 ± 0.01)`.
pub fn scaling_scan(cfg_scan: &ScalingConfig, cfg: &SolverConfig) -> Result<ScalingScan> {
    let (n, p) = (cfg_scan.n, cfg_scan.p);
    let lambdas = &cfg_scan.lambdas;
    if lambdas.len() < 3 || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::Parameter("scaling scan needs at least 3 positive λ".into()));
    }
    let space = ModelSpace::euclidean(n)?;
    ProblemParams::new(n, p, 1.0, 1.0).validate_f(&space)?;
    let last = lambdas.len() - 1;
    let rows: Vec<ScalingRow> = lambdas
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let mut row = ScalingRow {
                lambda,
                energy: None,
                half_mass: None,
                residual: None,
                de_dlambda: None,
                dq_dlambda: None,
                identity_rel_err: None,
                error: None,
            };
            let mut run = || -> Result<()> {
                let g = solve_point(&space, n, p, lambda, cfg)?;
                row.energy = Some(g.functionals.energy);
                row.half_mass = Some(0.5 * g.functionals.mass);
                row.residual = Some(g.residual);
                if i > 0 && i < last {
                    let hi = solve_point(&space, n, p, lambda * (1.0 + LAMBDA_STEP), cfg)?;
                    let lo = solve_point(&space, n, p, lambda * (1.0 - LAMBDA_STEP), cfg)?;
                    let dl = 2.0 * LAMBDA_STEP * lambda;
                    let de = (hi.functionals.energy - lo.functionals.energy) / dl;
                    let dq = 0.5 * (hi.functionals.mass - lo.functionals.mass) / dl;
                    row.de_dlambda = Some(de);
                    row.dq_dlambda = Some(dq);
                    row.identity_rel_err = Some((de + lambda * dq).abs() / de.abs().max((lambda * dq).abs()));
                }
                Ok(())
            };
            if let Err(e) = run() {
                row.error = Some(e.to_string());
            }
            row
        })
        .collect();

    let ok: Vec<&ScalingRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let failures = rows.len() - ok.len();
    let xs: Vec<f64> = ok.iter().map(|r| r.lambda.ln()).collect();
    let fit = |ys: Vec<f64>| if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { f64::NAN };
    let mass_exponent = fit(ok.iter().map(|r| r.half_mass.unwrap().ln()).collect());
    let energy_exponent = fit(ok.iter().map(|r| r.energy.unwrap().abs().ln()).collect());
    let gamma = 2.0 / (p - 1.0) - n as f64 / 2.0;
    let max_identity_err = ok
        .iter()
        .filter_map(|r| r.identity_rel_err)
        .fold(0.0, f64::max);
    Ok(ScalingScan {
        n,
        p,
        gamma,
        mass_exponent,
        energy_exponent,
        mass_exponent_err: (mass_exponent - gamma).abs(),
        energy_exponent_err: (energy_exponent - (1.0 + gamma)).abs(),
        max_identity_err,
        all_energy_negative: !ok.is_empty() && ok.iter().all(|r| r.energy.unwrap() < 0.0),
        all_energy_positive: !ok.is_empty() && ok.iter().all(|r| r.energy.unwrap() > 0.0),
        failures,
        rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IbetaConfig {
    pub space: ModelSpace,
    pub p: f64,
    pub lambda: f64,
    pub betas: Vec<f64>,
}

impl Default for IbetaConfig {
    fn default() -> Self {
        IbetaConfig {
            space: ModelSpace::euclidean(2).expect("valid space"),
            p: 3.0,
            lambda: 1.0,
            betas: log_space(0.5, 8.0, 5),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Subadditivity {
    pub beta: f64,
    pub eta: f64,
    pub i_beta: f64,
    pub i_eta: f64,
    pub i_rest: f64,
    /// `I_β < I_η + I_{β-η}`
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IbetaReport {
    pub space: ModelSpace,
    pub p: f64,
    pub lambda: f64,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub exponent: f64,
    /// `2/(p+1)`
    pub expected: f64,
    pub exponent_err: f64,
    pub all_positive: bool,
    pub subadditivity: Vec<Subadditivity>,
}

impl IbetaReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["beta", "i_beta", "residual", "converged"])?;
        for i in 0..self.betas.len() {
            w.write_record([
                crate::fields::fmt_f64(self.betas[i]),
                crate::fields::fmt_f64(self.values[i]),
                crate::fields::fmt_f64(self.residuals[i]),
                self.converged[i].to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("ascii csv"))
    }
}

/// `I_β` across `β`, its log-log slope and strict subadditivity at three
/// splits of the middle `β`.
pub fn ibeta_power_law(c: &IbetaConfig, cfg: &SolverConfig) -> Result<IbetaReport> {
    if c.betas.len() < 2 {
        return Err(Error::Parameter("need at least two β values".into()));
    }
    let n = c.space.n;
    let solve = |beta: f64| minimize_f(&c.space, &ProblemParams::new(n, c.p, c.lambda, beta), cfg);
    let reports: Vec<_> = c.betas.par_iter().map(|&b| solve(b)).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let xs: Vec<f64> = c.betas.iter().map(|b| b.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let exponent = linear_fit(&xs, &ys).0;
    let expected = 2.0 / (c.p + 1.0);

    let mid = c.betas.len() / 2;
    let beta = c.betas[mid];
    let fractions = [0.25, 0.5, 0.75];
    let parts: Vec<f64> = fractions
        .par_iter()
        .map(|f| solve(f * beta).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let subadditivity = fractions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let i_eta = parts[i];
            let i_rest = parts[fractions.len() - 1 - i];
            Subadditivity {
                beta,
                eta: f * beta,
                i_beta: values[mid],
                i_eta,
                i_rest,
                holds: values[mid] < i_eta + i_rest,
            }
        })
        .collect();
    Ok(IbetaReport {
        space: c.space,
        p: c.p,
        lambda: c.lambda,
        betas: c.betas.clone(),
        all_positive: values.iter().all(|v| *v > 0.0),
        residuals: reports.iter().map(|r| r.residual).collect(),
        converged: reports.iter().map(|r| r.converged).collect(),
        values,
        exponent,
        expected,
        exponent_err: (exponent - expected).abs(),
        subadditivity,
    })
}
