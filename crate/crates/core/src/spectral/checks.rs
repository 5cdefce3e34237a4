use serde::{Deserialize, Serialize};

use super::{assemble_la, lowest_eigs};
use crate::error::{Error, Result};
use crate::fields::{dirichlet_energy, ProblemParams, RadialField};

/// Which constraint the variation path preserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// `‖w‖ = ‖u‖`, energy `E` along the path.
    Mass,
    /// `‖w‖_{L^{p+1}} = ‖u‖_{L^{p+1}}`, `½F_λ` along the path.
    Jp,
}

impl std::str::FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mass" => Ok(Constraint::Mass),
            "jp" => Ok(Constraint::Jp),
            other => Err(Error::Parameter(format!("unknown constraint {other:?}; expected mass or jp"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SecondVariation {
    /// `(L₊ψ₀, ψ₀) + (L₋ψ₁, ψ₁)`
    pub analytic: f64,
    /// Centred second difference along the constrained path.
    pub numeric: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// Step of the centred second difference, relative to `‖u‖/‖ψ‖`.
pub const VARIATION_STEP: f64 = 1e-3;

/// Projection tolerance for the tangency condition.
const TANGENCY_TOL: f64 = 1e-10;

fn axpy(u: &[f64], s: f64, psi: &[f64]) -> Vec<f64> {
    u.iter().zip(psi).map(|(a, b)| a + s * b).collect()
}

/// Compares `(L₊ψ₀,ψ₀) + (L₋ψ₁,ψ₁)` with the second derivative at `s = 0` of
/// `E` (or `½F_λ`) along the normalized path through `u + s(ψ₀ + iψ₁)`.
///
/// `u` must solve `-Δu + λu = |u|^{p-1}u` with `λ = params.lambda`. `ψ₀` is
/// projected onto the tangent space of the constraint first.
pub fn second_variation_check(
    u: &RadialField,
    params: &ProblemParams,
    psi0: &RadialField,
    psi1: &RadialField,
    constraint: Constraint,
) -> Result<SecondVariation> {
    u.check_grid(psi0)?;
    u.check_grid(psi1)?;
    let lplus = assemble_la(u, params, params.p, 0)?;
    let lminus = assemble_la(u, params, 1.0, 0)?;
    let p = params.p;
    let q = p + 1.0;
    let w = &u.grid.weights;

    // Normal of the constraint surface at u.
    let normal = match constraint {
        Constraint::Mass => u.clone(),
        Constraint::Jp => u.with_values(u.values.iter().map(|v| v.abs().powf(p - 1.0) * v).collect()),
    };
    let c = psi0.dot(&normal)? / normal.dot(&normal)?;
    let psi0 = psi0.with_values(axpy(&psi0.values, -c, &normal.values));
    let leftover = psi0.dot(&normal)?.abs();
    let scale = psi0.norm() * normal.norm();
    if leftover > TANGENCY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Constraint(format!(
            "direction is not tangent after projection: |(ψ₀, n)| = {leftover:.3e}"
        )));
    }
    if psi0.max_abs() == 0.0 && psi1.max_abs() == 0.0 {
        return Err(Error::Parameter("variation direction is zero".into()));
    }

    let analytic = lplus.quadratic_form(&psi0)? + lminus.quadratic_form(psi1)?;

    let lp = |re: &[f64], im: &[f64]| -> f64 {
        (0..re.len())
            .map(|i| w[i] * (re[i] * re[i] + im[i] * im[i]).powf(0.5 * q))
            .sum()
    };
    let mass = |x: &[f64]| -> f64 { (0..x.len()).map(|i| w[i] * x[i] * x[i]).sum() };
    let grad = |x: &[f64]| dirichlet_energy(&u.with_values(x.to_vec()));
    let zero = vec![0.0; u.values.len()];
    let target = match constraint {
        Constraint::Mass => mass(&u.values).sqrt(),
        Constraint::Jp => lp(&u.values, &zero).powf(1.0 / q),
    };
    let value = |s: f64| -> f64 {
        let re = axpy(&u.values, s, &psi0.values);
        let im: Vec<f64> = psi1.values.iter().map(|v| s * v).collect();
        let size = match constraint {
            Constraint::Mass => (mass(&re) + mass(&im)).sqrt(),
            Constraint::Jp => lp(&re, &im).powf(1.0 / q),
        };
        let k = target / size;
        let re: Vec<f64> = re.iter().map(|v| k * v).collect();
        let im: Vec<f64> = im.iter().map(|v| k * v).collect();
        let gradient = grad(&re) + grad(&im);
        match constraint {
            Constraint::Mass => 0.5 * gradient - lp(&re, &im) / q,
            Constraint::Jp => 0.5 * (gradient + params.lambda * (mass(&re) + mass(&im))),
        }
    };
    let h = VARIATION_STEP * u.norm() / (psi0.mass() + psi1.mass()).sqrt();
    let numeric = (value(h) - 2.0 * value(0.0) + value(-h)) / (h * h);
    let abs_err = (analytic - numeric).abs();
    let rel_err = abs_err / analytic.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
    Ok(SecondVariation {
        analytic,
        numeric,
        abs_err,
        rel_err,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigDerivative {
    pub a: f64,
    pub index: usize,
    pub eigenvalue: f64,
    /// `-∫u^{p-1}ψ² / ‖ψ‖²`
    pub formula: f64,
    /// Centred difference of `λ_j` over `a ± 1e-4`.
    pub finite_diff: f64,
    pub rel_err: f64,
}

/// Step in `a` for the centred difference.
pub const EIG_STEP: f64 = 1e-4;

/// Checks `λ'_j(a) ‖ψ‖² = -∫ u^{p-1} ψ²` in the radial sector.
pub fn eig_derivative_check(u: &RadialField, params: &ProblemParams, a: f64, j: usize) -> Result<EigDerivative> {
    let op = assemble_la(u, params, a, 0)?;
    let rep = lowest_eigs(&op, j + 2)?;
    let ev = &rep.eigenvalues;
    let mut gap = ev[j + 1] - ev[j];
    if j > 0 {
        gap = gap.min(ev[j] - ev[j - 1]);
    }
    if gap <= 1e-6 {
        return Err(Error::Degeneracy(format!(
            "eigenvalue {j} of L_{a} is within {gap:.3e} of a neighbour"
        )));
    }
    let psi = &rep.eigenfields[j];
    let p = params.p;
    let w = &u.grid.weights;
    let num: f64 = (0..u.values.len())
        .map(|i| w[i] * u.values[i].abs().powf(p - 1.0) * psi.values[i] * psi.values[i])
        .sum();
    let formula = -num / psi.mass();
    let up = lowest_eigs(&assemble_la(u, params, a + EIG_STEP, 0)?, j + 1)?.eigenvalues[j];
    let down = lowest_eigs(&assemble_la(u, params, a - EIG_STEP, 0)?, j + 1)?.eigenvalues[j];
    let finite_diff = (up - down) / (2.0 * EIG_STEP);
    let rel_err = (formula - finite_diff).abs() / formula.abs().max(f64::MIN_POSITIVE);
    Ok(EigDerivative {
        a,
        index: j,
        eigenvalue: ev[j],
        formula,
        finite_diff,
        rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::random_signed_field;
    use crate::spectral::tests::soliton;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn phase_direction_is_flat() {
        let (u, params) = soliton(4000);
        let zero = RadialField::zeros(&u.grid);
        for c in [Constraint::Mass, Constraint::Jp] {
            let sv = second_variation_check(&u, &params, &zero, &u, c).unwrap();
            assert!(sv.analytic.abs() < 1e-9, "{sv:?}");
            assert!(sv.numeric.abs() < 1e-6, "{sv:?}");
        }
    }

    #[test]
    fn random_directions_match() {
        let (u, params) = soliton(4000);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let psi0 = random_signed_field(&u.grid, &mut rng);
            let psi1 = random_signed_field(&u.grid, &mut rng);
            for c in [Constraint::Mass, Constraint::Jp] {
                let sv = second_variation_check(&u, &params, &psi0, &psi1, c).unwrap();
                assert!(sv.rel_err < 1e-4, "{c:?}: {sv:?}");
            }
        }
    }

    #[test]
    fn parses_constraint() {
        assert_eq!("Mass".parse::<Constraint>().unwrap(), Constraint::Mass);
        assert_eq!("jp".parse::<Constraint>().unwrap(), Constraint::Jp);
        assert!("energy".parse::<Constraint>().is_err());
    }

    #[test]
    fn eigenvalue_derivative() {
        let (u, params) = soliton(4000);
        let mut last = f64::INFINITY;
        for a in [1.0, 1.5, 2.0, 2.5, 3.0] {
            let d = eig_derivative_check(&u, &params, a, 0).unwrap();
            assert!(d.formula < 0.0 && d.finite_diff < 0.0);
            assert!(d.rel_err < 1e-3, "{d:?}");
            assert!(d.eigenvalue < last);
            last = d.eigenvalue;
        }
        // Ground state of L₊ on the line: -3 with eigenfunction sech².
        assert!((last + 3.0).abs() < 1e-3);
    }
}
