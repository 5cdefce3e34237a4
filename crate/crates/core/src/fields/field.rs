use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{InnerBoundary, RadialGrid};
use crate::error::{Error, Result};
use crate::spaces::{ModelSpace, SpaceKind};

/// A radial profile sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::Shape(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.m
            )));
        }
        Ok(RadialField { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Arc<RadialGrid>, f: F) -> Self {
        RadialField {
            values: grid.sample(f),
            grid: Arc::clone(grid),
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        RadialField {
            values: vec![0.0; grid.m],
            grid: Arc::clone(grid),
        }
    }

    /// Same grid, new values (length must match).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.grid.m);
        RadialField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &RadialField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Shape("fields live on different grids".into()))
        }
    }

    /// Weighted inner product `Σ wᵢ uᵢ vᵢ`.
    pub fn dot(&self, other: &RadialField) -> Result<f64> {
        self.check_grid(other)?;
        Ok(weighted_dot(&self.grid.weights, &self.values, &other.values))
    }

    /// `‖u‖²_{L²}`.
    pub fn mass(&self) -> f64 {
        weighted_dot(&self.grid.weights, &self.values, &self.values)
    }

    pub fn norm(&self) -> f64 {
        self.mass().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    pub fn abs(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `∫ |u|^q dV`.
    pub fn lp_integral(&self, q: f64) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.abs().powf(q))
            .sum()
    }

    /// `sup|u - v| / sup|v|`.
    pub fn rel_sup_diff(&self, reference: &RadialField) -> Result<f64> {
        self.check_grid(reference)?;
        let diff = self
            .values
            .iter()
            .zip(&reference.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        Ok(diff / reference.max_abs())
    }

    /// Centred-difference radial derivative at the nodes, using the boundary
    /// ghosts of the grid.
    pub fn radial_derivative(&self) -> Vec<f64> {
        let m = self.grid.m;
        let h = self.grid.h;
        let u = &self.values;
        (0..m)
            .map(|i| {
                let left = if i == 0 {
                    match self.grid.bc_inner {
                        InnerBoundary::NaturalAtOrigin => u[0],
                        InnerBoundary::Dirichlet => 0.0,
                    }
                } else {
                    u[i - 1]
                };
                let right = if i + 1 < m { u[i + 1] } else { 0.0 };
                (right - left) / (2.0 * h)
            })
            .collect()
    }
}

pub(crate) fn weighted_dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// Parameters of the stationary problem `-Δu + λu = K|u|^{p-1}u` and its
/// constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub beta: f64,
    #[serde(default = "unit")]
    pub k: f64,
}

fn unit() -> f64 {
    1.0
}

impl ProblemParams {
    pub fn new(n: usize, p: f64, lambda: f64, beta: f64) -> Self {
        ProblemParams {
            n,
            p,
            lambda,
            beta,
            k: 1.0,
        }
    }

    fn check_common(&self, space: &ModelSpace) -> Result<()> {
        if self.n != space.n {
            return Err(Error::Parameter(format!(
                "params dimension {} differs from space dimension {}",
                self.n, space.n
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.p.is_finite() && self.lambda.is_finite()) {
            return Err(Error::Parameter("p and lambda must be finite".into()));
        }
        Ok(())
    }

    /// Upper end of the admissible `p` range for the `F_λ` problem:
    /// `p + 1 < 2n/(n-2)` for `n ≥ 3`, unbounded for `n ≤ 2`.
    pub fn p_max_f(n: usize) -> f64 {
        if n <= 2 {
            f64::INFINITY
        } else {
            (n as f64 + 2.0) / (n as f64 - 2.0)
        }
    }

    /// Validity for the `F_λ` minimization: subcritical `p > 1` and
    /// `λ > -δ₀`.
    pub fn validate_f(&self, space: &ModelSpace) -> Result<()> {
        self.check_common(space)?;
        let pmax = Self::p_max_f(self.n);
        if !(self.p > 1.0 && self.p < pmax) {
            return Err(Error::Parameter(format!(
                "p = {} outside the subcritical range (1, {pmax})",
                self.p
            )));
        }
        let delta0 = space.spectral_bottom();
        if self.lambda <= -delta0 {
            return Err(Error::Parameter(format!(
                "lambda = {} must exceed -δ₀ = {}",
                self.lambda, -delta0
            )));
        }
        Ok(())
    }

    /// Validity for the energy minimization: `1 < p < 1 + 4/n`.
    pub fn validate_energy(&self, space: &ModelSpace) -> Result<()> {
        self.check_common(space)?;
        let pmax = 1.0 + 4.0 / self.n as f64;
        if !(self.p > 1.0 && self.p < pmax) {
            return Err(Error::Parameter(format!(
                "p = {} outside the mass-subcritical range (1, {pmax})",
                self.p
            )));
        }
        Ok(())
    }

    /// Exponents `(α, β)` of the Weinstein functional; `α + β = p + 1`.
    pub fn weinstein_exponents(&self) -> (f64, f64) {
        let n = self.n as f64;
        let alpha = 2.0 - (n - 2.0) * (self.p - 1.0) / 2.0;
        let beta = n * (self.p - 1.0) / 2.0;
        (alpha, beta)
    }
}

/// Parity of the extension through the base point; only matters for `n = 1`,
/// where odd angular sectors are odd functions on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OriginParity {
    Even,
    Odd,
}

/// Symmetric tridiagonal matrix `S` of the discrete Dirichlet form,
/// `‖∇u‖² = uᵀ S u`.
#[derive(Debug, Clone)]
pub(crate) struct Stiffness {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Stiffness {
    pub fn assemble(grid: &RadialGrid, parity: OriginParity) -> Self {
        let m = grid.m;
        let h = grid.h;
        let a = &grid.face_area;
        let inner = match (grid.bc_inner, parity) {
            (InnerBoundary::Dirichlet, _) => a[0] / h,
            (InnerBoundary::NaturalAtOrigin, OriginParity::Even) => 0.0,
            // Antisymmetric ghost: jump 2u₀ across the single face at r = 0,
            // which carries half of the folded area element.
            (InnerBoundary::NaturalAtOrigin, OriginParity::Odd) => 4.0 * (a[0] / 2.0) / h,
        };
        let mut diag: Vec<f64> = (0..m).map(|i| (a[i] + a[i + 1]) / h).collect();
        diag[0] = inner + a[1] / h;
        let off = (0..m - 1).map(|i| -a[i + 1] / h).collect();
        Stiffness { diag, off }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.diag.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.off[i - 1] * u[i - 1];
                }
                if i + 1 < m {
                    s += self.off[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solves `(S + diag(shift)) x = rhs`.
    pub fn solve_shifted(&self, shift: &[f64], rhs: &[f64]) -> Vec<f64> {
        let diag: Vec<f64> = self.diag.iter().zip(shift).map(|(d, s)| d + s).collect();
        crate::numerics::solve_tridiagonal(&self.off, &diag, &self.off, rhs)
    }
}

/// `-Δu` as the gradient of the discrete Dirichlet form with respect to the
/// weighted inner product.
pub fn neg_laplacian(u: &RadialField) -> RadialField {
    let s = Stiffness::assemble(&u.grid, OriginParity::Even);
    let su = s.apply(&u.values);
    u.with_values(su.iter().zip(&u.grid.weights).map(|(v, w)| v / w).collect())
}

/// `‖∇u‖²`: sum over cell faces of `A(r_face) (Δu)² / h`, including the
/// jumps to the Dirichlet ghosts.
pub fn dirichlet_energy(u: &RadialField) -> f64 {
    let g = &u.grid;
    let a = &g.face_area;
    let v = &u.values;
    let m = g.m;
    let mut sum = 0.0;
    if g.bc_inner == InnerBoundary::Dirichlet {
        sum += a[0] * v[0] * v[0];
    }
    for j in 1..m {
        let d = v[j] - v[j - 1];
        sum += a[j] * d * d;
    }
    sum += a[m] * v[m - 1] * v[m - 1];
    sum / g.h
}

/// All functionals of a field at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Functionals {
    /// `‖∇u‖² + λ‖u‖²`
    pub f_lambda: f64,
    /// `∫|u|^{p+1}`
    pub j_p: f64,
    /// `½‖∇u‖² - J_p/(p+1)`
    pub energy: f64,
    /// `‖u‖²`
    pub mass: f64,
    /// `‖∇u‖²`
    pub gradient: f64,
    /// Weinstein quotient; `None` when `u = 0` or `∇u = 0`.
    pub weinstein: Option<f64>,
}

pub fn functionals(u: &RadialField, params: &ProblemParams) -> Functionals {
    let gradient = dirichlet_energy(u);
    let mass = u.mass();
    let j_p = u.lp_integral(params.p + 1.0);
    let weinstein = weinstein_from_parts(j_p, mass, gradient, params);
    Functionals {
        f_lambda: gradient + params.lambda * mass,
        j_p,
        energy: 0.5 * gradient - j_p / (params.p + 1.0),
        mass,
        gradient,
        weinstein,
    }
}

pub(crate) fn weinstein_from_parts(j_p: f64, mass: f64, gradient: f64, params: &ProblemParams) -> Option<f64> {
    if mass > 0.0 && gradient > 0.0 {
        let (alpha, beta) = params.weinstein_exponents();
        Some(j_p / (mass.powf(alpha / 2.0) * gradient.powf(beta / 2.0)))
    } else {
        None
    }
}

/// `W(u) = J_p / (‖u‖^α ‖∇u‖^β)`.
pub fn weinstein(u: &RadialField, params: &ProblemParams) -> Result<f64> {
    functionals(u, params)
        .weinstein
        .ok_or_else(|| Error::UndefinedValue("Weinstein functional of a constant-zero field".into()))
}

/// Angular-momentum potential `ℓ(ℓ+n-2)/r²` (Euclidean) or
/// `ℓ(ℓ+n-2)/sinh²r` (hyperbolic) at the nodes.
pub fn centrifugal(grid: &RadialGrid, ell: usize) -> Result<Vec<f64>> {
    if ell == 0 {
        return Ok(vec![0.0; grid.m]);
    }
    let n = grid.space.n;
    if n == 1 && ell > 1 {
        return Err(Error::Parameter("n = 1 has only the even (ℓ=0) and odd (ℓ=1) sectors".into()));
    }
    let c = (ell * (ell + n - 2)) as f64;
    match grid.space.kind {
        SpaceKind::Euclidean => Ok(grid.nodes.iter().map(|r| c / (r * r)).collect()),
        SpaceKind::Hyperbolic => Ok(grid.nodes.iter().map(|r| c / r.sinh().powi(2)).collect()),
        _ => Err(Error::Parameter(format!(
            "angular sectors ℓ > 0 are only defined on Euclidean and hyperbolic spaces, not {}",
            grid.space
        ))),
    }
}

pub(crate) fn parity_for(grid: &RadialGrid, ell: usize) -> OriginParity {
    if grid.space.n == 1 && ell % 2 == 1 {
        OriginParity::Odd
    } else {
        OriginParity::Even
    }
}

/// `(-Δ + λ + V + c_ℓ) u`.
pub fn apply_operator(
    u: &RadialField,
    params: &ProblemParams,
    potential: Option<&RadialField>,
    ell: usize,
) -> Result<RadialField> {
    if let Some(v) = potential {
        u.check_grid(v)?;
    }
    let grid = &u.grid;
    let cent = centrifugal(grid, ell)?;
    let s = Stiffness::assemble(grid, parity_for(grid, ell));
    let su = s.apply(&u.values);
    let values = (0..grid.m)
        .map(|i| {
            let pot = potential.map_or(0.0, |v| v.values[i]);
            su[i] / grid.weights[i] + (params.lambda + pot + cent[i]) * u.values[i]
        })
        .collect();
    Ok(u.with_values(values))
}

/// Euler-Lagrange residual `-Δu + λu - K|u|^{p-1}u` (returned as a field).
pub fn el_residual_field(u: &RadialField, lambda: f64, k: f64, p: f64) -> RadialField {
    let lap = neg_laplacian(u);
    u.with_values(
        lap.values
            .iter()
            .zip(&u.values)
            .map(|(l, v)| l + lambda * v - k * v.abs().powf(p - 1.0) * v)
            .collect(),
    )
}

/// Relative residual `‖-Δu + λu - K|u|^{p-1}u‖ / ‖u‖` in the weighted norm.
pub fn el_residual(u: &RadialField, lambda: f64, k: f64, p: f64) -> f64 {
    el_residual_field(u, lambda, k, p).norm() / u.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(space: ModelSpace, r_max: Option<f64>, m: usize) -> Arc<RadialGrid> {
        RadialGrid::new(space, r_max, m).unwrap()
    }

    fn random_smooth(g: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> RadialField {
        let (lo, hi) = (g.r_min, g.r_max);
        let bumps: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(lo..lo + 0.5 * (hi - lo)),
                    rng.gen_range(0.3..2.0),
                )
            })
            .collect();
        RadialField::from_fn(g, |r| {
            bumps
                .iter()
                .map(|(a, c, s)| a * (-((r - c) / s).powi(2)).exp())
                .sum::<f64>()
                * (hi - r).min(1.0)
        })
    }

    #[test]
    fn constant_has_zero_gradient_in_interior() {
        // On the annulus a constant has boundary jumps only, so test the
        // interior faces through the operator.
        let g = grid(ModelSpace::annulus(2, 1.0, 5.0).unwrap(), None, 200);
        let u = RadialField::from_fn(&g, |_| 3.0);
        let params = ProblemParams::new(2, 3.0, 0.7, 1.0);
        let lu = apply_operator(&u, &params, None, 0).unwrap();
        for i in 1..g.m - 1 {
            assert!((lu.values[i] - 0.7 * 3.0).abs() < 1e-9);
        }
        let interior: f64 = (1..g.m)
            .map(|j| g.face_area[j] * (u.values[j] - u.values[j - 1]).powi(2))
            .sum();
        assert_eq!(interior, 0.0);
    }

    #[test]
    fn tent_on_half_line() {
        // u = r on [0,1], 2 - r on [1,2]: ∫|u'|² A dr = 2 · 2 with A ≡ 2.
        let g = grid(ModelSpace::euclidean(1).unwrap(), Some(2.0), 4000);
        let u = RadialField::from_fn(&g, |r| if r < 1.0 { r } else { 2.0 - r });
        let d = dirichlet_energy(&u);
        assert!((d - 4.0).abs() < 1e-2, "{d}");
    }

    #[test]
    fn dirichlet_energy_matches_quadrature_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for space in [ModelSpace::euclidean(3).unwrap(), ModelSpace::hyperbolic(2).unwrap()] {
            let g = grid(space, Some(12.0), 4000);
            let u = random_smooth(&g, &mut rng);
            let r = &g.nodes;
            let v = &u.values;
            // Independent oracle: centred derivative at nodes, node-sampled A.
            let mut oracle = 0.0;
            for i in 1..g.m - 1 {
                let du = (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]);
                oracle += du * du * space.area_element(r[i]).unwrap() * g.h;
            }
            let d = dirichlet_energy(&u);
            assert!(((d - oracle) / oracle).abs() < 1e-3, "{space}: {d} vs {oracle}");
        }
    }

    #[test]
    fn operator_is_exact_gradient_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zero = ProblemParams::new(2, 3.0, 0.0, 1.0);
        for space in [
            ModelSpace::euclidean(2).unwrap(),
            ModelSpace::euclidean(1).unwrap(),
            ModelSpace::hyperbolic(3).unwrap(),
            ModelSpace::annulus(2, 1.0, 9.0).unwrap(),
            ModelSpace::exterior(3, 1.0).unwrap(),
        ] {
            let r_max = if space.kind == SpaceKind::Annulus { None } else { Some(space.radial_domain().0 + 10.0) };
            let g = grid(space, r_max, 500);
            let params = ProblemParams { n: space.n, ..zero };
            for _ in 0..50 {
                let u = RadialField::new(g.clone(), (0..g.m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
                let v = RadialField::new(g.clone(), (0..g.m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
                let lu = apply_operator(&u, &params, None, 0).unwrap();
                let lv = apply_operator(&v, &params, None, 0).unwrap();
                let a = lu.dot(&v).unwrap();
                let b = u.dot(&lv).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{space}: {a} vs {b}");
                let form = lu.dot(&u).unwrap();
                let d = dirichlet_energy(&u);
                assert!(((form - d) / d).abs() < 1e-12, "{space}: {form} vs {d}");
            }
        }
    }

    #[test]
    fn soliton_mass_on_half_line() {
        let g = grid(ModelSpace::euclidean(1).unwrap(), Some(40.0), 8000);
        let u = RadialField::from_fn(&g, |r| 2f64.sqrt() / r.cosh());
        let f = functionals(&u, &ProblemParams::new(1, 3.0, 1.0, 1.0));
        assert!((f.mass - 4.0).abs() < 1e-3, "{}", f.mass);
    }

    #[test]
    fn zero_field_functionals() {
        let g = grid(ModelSpace::euclidean(2).unwrap(), Some(10.0), 100);
        let params = ProblemParams::new(2, 3.0, 1.0, 1.0);
        let f = functionals(&RadialField::zeros(&g), &params);
        assert_eq!((f.f_lambda, f.j_p, f.energy, f.mass), (0.0, 0.0, 0.0, 0.0));
        assert!(f.weinstein.is_none());
        assert!(matches!(weinstein(&RadialField::zeros(&g), &params), Err(Error::UndefinedValue(_))));
    }

    #[test]
    fn weinstein_exponents_sum() {
        let (a, b) = ProblemParams::new(2, 3.0, 1.0, 1.0).weinstein_exponents();
        assert_eq!((a, b), (2.0, 2.0));
        for n in 1..6 {
            for p in [1.5, 2.0, 2.5] {
                let (a, b) = ProblemParams::new(n, p, 1.0, 1.0).weinstein_exponents();
                assert!((a + b - (p + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parameter_ranges() {
        let e3 = ModelSpace::euclidean(3).unwrap();
        assert!(ProblemParams::new(3, 3.0, 1.0, 1.0).validate_f(&e3).is_ok());
        assert!(ProblemParams::new(3, 5.0, 1.0, 1.0).validate_f(&e3).is_err());
        assert!(ProblemParams::new(3, 3.0, -0.1, 1.0).validate_f(&e3).is_err());
        let h3 = ModelSpace::hyperbolic(3).unwrap();
        assert!(ProblemParams::new(3, 2.0, -0.5, 1.0).validate_f(&h3).is_ok());
        assert!(ProblemParams::new(3, 2.0, -1.0, 1.0).validate_f(&h3).is_err());
        assert!(ProblemParams::new(2, 8.0, 1.0, 1.0).validate_f(&ModelSpace::euclidean(2).unwrap()).is_ok());
        assert!(ProblemParams::new(2, 2.0, 0.0, 1.0).validate_energy(&ModelSpace::euclidean(2).unwrap()).is_ok());
        assert!(ProblemParams::new(2, 3.0, 0.0, 1.0).validate_energy(&ModelSpace::euclidean(2).unwrap()).is_err());
        assert!(ProblemParams::new(2, 2.0, 0.0, -1.0).validate_energy(&ModelSpace::euclidean(2).unwrap()).is_err());
        assert!(ProblemParams::new(3, 2.0, 0.0, 1.0).validate_energy(&ModelSpace::euclidean(2).unwrap()).is_err());
    }

    #[test]
    fn angular_sectors() {
        let ann = grid(ModelSpace::annulus(2, 1.0, 3.0).unwrap(), None, 10);
        let u = RadialField::from_fn(&ann, |r| r);
        assert!(apply_operator(&u, &ProblemParams::new(2, 3.0, 1.0, 1.0), None, 1).is_err());
        let e3 = grid(ModelSpace::euclidean(3).unwrap(), Some(5.0), 10);
        let c = centrifugal(&e3, 1).unwrap();
        assert!((c[0] - 2.0 / e3.nodes[0].powi(2)).abs() < 1e-12);
        let other = grid(ModelSpace::euclidean(3).unwrap(), Some(6.0), 10);
        let v = RadialField::zeros(&other);
        let w = RadialField::zeros(&e3);
        assert!(matches!(
            apply_operator(&w, &ProblemParams::new(3, 3.0, 1.0, 1.0), Some(&v), 0),
            Err(Error::Shape(_))
        ));
    }
}
