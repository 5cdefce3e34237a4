use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{axisymmetric, planar_annulus};
use crate::cc::{classify, MeasureSequence, TrichotomyReport, DEFAULT_RADII};
use crate::config::{CcThresholds, SolverConfig};
use crate::error::{Error, Result};
use crate::fields::ProblemParams;
use crate::solvers::minimize_f;
use crate::spaces::ModelSpace;

/// Smallest relative margin `R_β/I_β - 1` reported as conclusive.
pub const MARGIN_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExteriorConfig {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Radius of the removed ball.
    pub radius: f64,
    /// Number of trial translations.
    pub trials: usize,
}

impl Default for ExteriorConfig {
    fn default() -> Self {
        ExteriorConfig {
            n: 3,
            p: 3.0,
            lambda: 1.0,
            beta: 1.0,
            radius: 1.0,
            trials: 12,
        }
    }
}

/// One member of the escaping sequence: the free minimizer centred at
/// distance `distance` from the origin, cut off near the removed ball.
#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub distance: f64,
    /// `F_λ` at `J_p = β`.
    pub value: f64,
    /// `value / I_β - 1`
    pub rel_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExteriorReport {
    pub config: ExteriorConfig,
    /// Radial minimum on the exterior domain.
    pub r_beta: f64,
    pub r_beta_residual: f64,
    /// Minimum on all of `ℝⁿ`.
    pub i_beta: f64,
    pub i_beta_residual: f64,
    /// `R_β/I_β - 1`
    pub margin: f64,
    pub inconclusive: bool,
    pub trials: Vec<Trial>,
    /// Values nonincreasing along the sequence.
    pub monotone: bool,
    /// First trial at least `8/√λ` beyond the ball, and its gap.
    pub approach_distance: f64,
    pub approach_gap: f64,
    pub diagnostic: TrichotomyReport,
}

impl ExteriorReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["distance", "value", "rel_gap"])?;
        for t in &self.trials {
            w.write_record([
                crate::fields::fmt_f64(t.distance),
                crate::fields::fmt_f64(t.value),
                crate::fields::fmt_f64(t.rel_gap),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Input(e.to_string()))?).expect("ascii csv"))
    }
}

/// `R_β` on `ℝⁿ ∖ B_R` against `I_β` on `ℝⁿ`, and the escaping sequence of
/// translated, cut-off free minimizers whose values fall to `I_β`.
pub fn exterior_demo(c: &ExteriorConfig, cfg: &SolverConfig) -> Result<ExteriorReport> {
    if c.n < 2 {
        return Err(Error::Parameter("the exterior demo needs n ≥ 2".into()));
    }
    if !(c.lambda > 0.0) {
        return Err(Error::Parameter("the exterior demo needs λ > 0".into()));
    }
    if c.trials < crate::cc::MIN_ENTRIES {
        return Err(Error::Parameter(format!("need at least {} trials", crate::cc::MIN_ENTRIES)));
    }
    let params = ProblemParams::new(c.n, c.p, c.lambda, c.beta);
    let ext = ModelSpace::exterior(c.n, c.radius)?;
    let free = ModelSpace::euclidean(c.n)?;
    let (ext_rep, free_rep) = rayon::join(|| minimize_f(&ext, &params, cfg), || minimize_f(&free, &params, cfg));
    let ext_rep = ext_rep?.require_converged()?;
    let free_rep = free_rep?.require_converged()?;
    let (r_beta, i_beta) = (ext_rep.value, free_rep.value);
    let margin = r_beta / i_beta - 1.0;

    let scale = c.lambda.sqrt().recip();
    let hq = 0.02 * scale;
    let bin = 0.5 * scale;
    let u = &free_rep.minimizer;
    let results: Vec<(Trial, crate::cc::Cloud)> = (0..c.trials)
        .into_par_iter()
        .map(|k| {
            let distance = c.radius + (k + 1) as f64 * scale;
            let (s, cloud) = axisymmetric(u, c.n, c.p, distance, Some(c.radius), hq, Some(bin))?;
            let value = s.normalized_f(c.lambda, c.p, c.beta);
            Ok((
                Trial {
                    distance,
                    value,
                    rel_gap: value / i_beta - 1.0,
                },
                cloud.expect("binned cloud"),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (trials, clouds): (Vec<Trial>, Vec<_>) = results.into_iter().unzip();
    let monotone = trials.windows(2).all(|w| w[1].value <= w[0].value * (1.0 + 1e-9));
    let target = c.radius + 8.0 * scale;
    let approach = trials
        .iter()
        .find(|t| t.distance >= target - 1e-12)
        .unwrap_or_else(|| trials.last().expect("trials"));
    let diagnostic = classify(&MeasureSequence::new(clouds)?, &DEFAULT_RADII.map(|r| r * scale), &CcThresholds {
        max_centers: 512,
        ..CcThresholds::default()
    })?;
    Ok(ExteriorReport {
        config: c.clone(),
        r_beta,
        r_beta_residual: ext_rep.residual,
        i_beta,
        i_beta_residual: free_rep.residual,
        margin,
        inconclusive: margin < MARGIN_FLOOR,
        approach_distance: approach.distance,
        approach_gap: approach.rel_gap,
        trials,
        monotone,
        diagnostic,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnulusConfig {
    pub p: f64,
    pub lambda: f64,
    pub inner: f64,
    pub outer: f64,
    pub beta: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        AnnulusConfig {
            p: 3.0,
            lambda: 4.0,
            inner: 1.0,
            outer: 12.0,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnulusReport {
    pub config: AnnulusConfig,
    /// Radial minimum on the annulus.
    pub l2_radial: f64,
    pub l2_residual: f64,
    /// `F_λ` of the off-centre cut-off trial at `J_p = β`.
    pub l1_upper: f64,
    pub trial_center: f64,
    pub quadrature_step: f64,
    /// `K₁ ≤ L₁/β` and `K₂ = L₂/β`.
    pub k1_upper: f64,
    pub k2: f64,
    /// `‖u_j‖_{L^{p+1}} = K_j^{1/(p-1)} β^{1/(p+1)}`
    pub u1_norm: f64,
    pub u2_norm: f64,
}

/// Planar annulus: the radial minimum `L₂` against the value of a
/// translated, cut-off free minimizer, an upper bound for the true minimum.
pub fn annulus_demo(c: &AnnulusConfig, cfg: &SolverConfig) -> Result<AnnulusReport> {
    if !(c.lambda > 0.0) {
        return Err(Error::Parameter("the annulus demo needs λ > 0".into()));
    }
    let params = ProblemParams::new(2, c.p, c.lambda, c.beta);
    let ann = ModelSpace::annulus(2, c.inner, c.outer)?;
    let free = ModelSpace::euclidean(2)?;
    let (ann_rep, free_rep) = rayon::join(|| minimize_f(&ann, &params, cfg), || minimize_f(&free, &params, cfg));
    let ann_rep = ann_rep?.require_converged()?;
    let free_rep = free_rep?.require_converged()?;
    let l2 = ann_rep.value;
    let centre = 0.5 * (c.inner + c.outer);
    let hq = (0.02 * (c.outer - c.inner)).min(0.02 / c.lambda.sqrt());
    let s = planar_annulus(&free_rep.minimizer, c.p, centre, c.inner, c.outer, hq);
    let l1 = s.normalized_f(c.lambda, c.p, c.beta);
    if !(l1 < l2) {
        return Err(Error::Parameter(format!(
            "the trial value {l1:.6} does not beat the radial minimum {l2:.6}; widen the annulus"
        )));
    }
    let (k1, k2) = (l1 / c.beta, l2 / c.beta);
    let norm = |k: f64| k.powf(1.0 / (c.p - 1.0)) * c.beta.powf(1.0 / (c.p + 1.0));
    Ok(AnnulusReport {
        config: c.clone(),
        l2_radial: l2,
        l2_residual: ann_rep.residual,
        l1_upper: l1,
        trial_center: centre,
        quadrature_step: hq,
        k1_upper: k1,
        k2,
        u1_norm: norm(k1),
        u2_norm: norm(k2),
    })
}
