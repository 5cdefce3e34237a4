//! Radial model geometries.
//!
//! Every space is described by its area element `A(r)` (the area of the
//! geodesic sphere of radius `r` about the base point), its radial domain and
//! a lower bound for the spectrum of `-Δ`. The hyperbolic metric has constant
//! curvature -1.
//!
//! `n = 1` is admitted for the Euclidean line folded onto the half-line
//! (`A ≡ 2`). It exists so that the closed-form one-dimensional soliton can
//! serve as a validation oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, unit_sphere_area};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Hyperbolic,
    /// R^n with the closed ball of radius `inner_radius` removed.
    Exterior,
    /// The planar or higher-dimensional shell `inner_radius < r < outer_radius`.
    Annulus,
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(SpaceKind::Euclidean),
            "hyperbolic" => Ok(SpaceKind::Hyperbolic),
            "exterior" => Ok(SpaceKind::Exterior),
            "annulus" => Ok(SpaceKind::Annulus),
            other => Err(Error::Parameter(format!("unknown space '{other}'"))),
        }
    }
}

/// A radially symmetric model space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub kind: SpaceKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
}

impl ModelSpace {
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Euclidean, n, None, None)
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::new(SpaceKind::Hyperbolic, n, None, None)
    }

    pub fn exterior(n: usize, inner_radius: f64) -> Result<Self> {
        Self::new(SpaceKind::Exterior, n, Some(inner_radius), None)
    }

    pub fn annulus(n: usize, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        Self::new(SpaceKind::Annulus, n, Some(inner_radius), Some(outer_radius))
    }

    /// Builds and validates a space; unused radii are dropped.
    pub fn new(
        kind: SpaceKind,
        n: usize,
        inner_radius: Option<f64>,
        outer_radius: Option<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("dimension n must be >= 1".into()));
        }
        let space = match kind {
            SpaceKind::Euclidean | SpaceKind::Hyperbolic => ModelSpace {
                kind,
                n,
                inner_radius: None,
                outer_radius: None,
            },
            SpaceKind::Exterior => {
                let r = inner_radius
                    .ok_or_else(|| Error::Parameter("exterior space needs inner_radius".into()))?;
                if !(r.is_finite() && r > 0.0) {
                    return Err(Error::Parameter(format!("inner_radius must be > 0, got {r}")));
                }
                ModelSpace {
                    kind,
                    n,
                    inner_radius: Some(r),
                    outer_radius: None,
                }
            }
            SpaceKind::Annulus => {
                let r = inner_radius
                    .ok_or_else(|| Error::Parameter("annulus needs inner_radius".into()))?;
                let s = outer_radius
                    .ok_or_else(|| Error::Parameter("annulus needs outer_radius".into()))?;
                if !(r.is_finite() && s.is_finite() && r >= 0.0 && s > r) {
                    return Err(Error::Parameter(format!(
                        "annulus radii must satisfy 0 <= R < S, got R={r}, S={s}"
                    )));
                }
                ModelSpace {
                    kind,
                    n,
                    inner_radius: Some(r),
                    outer_radius: Some(s),
                }
            }
        };
        Ok(space)
    }

    /// Radial domain `[lo, hi]`; `hi` is infinite for unbounded spaces.
    pub fn radial_domain(&self) -> (f64, f64) {
        match self.kind {
            SpaceKind::Euclidean | SpaceKind::Hyperbolic => (0.0, f64::INFINITY),
            SpaceKind::Exterior => (self.inner_radius.unwrap_or(0.0), f64::INFINITY),
            SpaceKind::Annulus => (
                self.inner_radius.unwrap_or(0.0),
                self.outer_radius.unwrap_or(f64::INFINITY),
            ),
        }
    }

    /// True when the radial domain starts at the base point.
    pub fn contains_origin(&self) -> bool {
        self.radial_domain().0 == 0.0 && matches!(self.kind, SpaceKind::Euclidean | SpaceKind::Hyperbolic)
    }

    pub fn is_bounded(&self) -> bool {
        self.radial_domain().1.is_finite()
    }

    /// Area element without domain checks. Used on quadrature nodes that may
    /// sit exactly on a boundary.
    pub(crate) fn area_unchecked(&self, r: f64) -> f64 {
        let omega = unit_sphere_area(self.n);
        let k = (self.n - 1) as i32;
        match self.kind {
            SpaceKind::Hyperbolic => omega * r.sinh().powi(k),
            _ => omega * r.powi(k),
        }
    }

    /// Area of the geodesic sphere of radius `r`.
    pub fn area_element(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.radial_domain();
        if !(r >= lo && r <= hi) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "radius {r} outside radial domain [{lo}, {hi}]"
            )));
        }
        Ok(self.area_unchecked(r))
    }

    /// Lower bound δ₀ for the spectrum of `-Δ`: `(n-1)²/4` on hyperbolic
    /// space and 0 otherwise. For the annulus this is a conservative bound,
    /// not the Dirichlet bottom.
    pub fn spectral_bottom(&self) -> f64 {
        match self.kind {
            SpaceKind::Hyperbolic => {
                let k = (self.n - 1) as f64;
                k * k / 4.0
            }
            _ => 0.0,
        }
    }

    /// η(R) = (∫_R^∞ dr / A(r))^{1/2}, the constant in the radial decay bound
    /// `‖v‖_∞ ≤ η(R) ‖∇v‖` for radial `v` supported outside the ball of
    /// radius `R`. On the annulus the integral runs up to the outer radius.
    pub fn eta_tail(&self, radius: f64) -> Result<f64> {
        let (lo, hi) = self.radial_domain();
        if !(radius > 0.0 && radius >= lo && radius < hi) {
            return Err(Error::Domain(format!(
                "eta_tail needs a positive radius inside [{lo}, {hi}), got {radius}"
            )));
        }
        let n = self.n;
        let tol = 1e-14;
        let integral = match self.kind {
            SpaceKind::Annulus => {
                let f = |r: f64| 1.0 / self.area_unchecked(r);
                adaptive_simpson(&f, radius, hi, tol)
            }
            SpaceKind::Euclidean | SpaceKind::Exterior if n <= 2 => {
                return Err(Error::UnsupportedGeometry(format!(
                    "∫ dr/A(r) diverges on {n}-dimensional Euclidean space"
                )))
            }
            SpaceKind::Hyperbolic if n == 1 => {
                return Err(Error::UnsupportedGeometry(
                    "∫ dr/A(r) diverges on the hyperbolic line".into(),
                ))
            }
            _ => {
                // r = R/t maps the tail onto t in (0, 1].
                let omega = unit_sphere_area(n);
                let hyperbolic = self.kind == SpaceKind::Hyperbolic;
                let f = |t: f64| {
                    if t <= 0.0 {
                        // Limit of the integrand at r = ∞.
                        return if !hyperbolic && n == 3 { 1.0 / (omega * radius) } else { 0.0 };
                    }
                    let r = radius / t;
                    let v = radius / (t * t) / self.area_unchecked(r);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                };
                adaptive_simpson(&f, 0.0, 1.0, tol)
            }
        };
        Ok(integral.sqrt())
    }
}

impl std::fmt::Display for ModelSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.kind {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Hyperbolic => "hyperbolic",
            SpaceKind::Exterior => "exterior",
            SpaceKind::Annulus => "annulus",
        };
        write!(f, "{name}(n={})", self.n)?;
        if let Some(r) = self.inner_radius {
            write!(f, "[R={r}")?;
            if let Some(s) = self.outer_radius {
                write!(f, ",S={s}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn area_examples() {
        let e3 = ModelSpace::euclidean(3).unwrap();
        assert!((e3.area_element(2.0).unwrap() - 16.0 * PI).abs() < 1e-12);
        let h2 = ModelSpace::hyperbolic(2).unwrap();
        assert!((h2.area_element(1.0).unwrap() - 2.0 * PI * 1f64.sinh()).abs() < 1e-12);
        assert!((h2.area_element(1.0).unwrap() - 7.384007).abs() < 1e-6);
        let e2 = ModelSpace::euclidean(2).unwrap();
        assert_eq!(e2.area_element(0.0).unwrap(), 0.0);
        let e1 = ModelSpace::euclidean(1).unwrap();
        assert_eq!(e1.area_element(5.0).unwrap(), 2.0);
    }

    #[test]
    fn area_outside_domain() {
        let ext = ModelSpace::exterior(3, 1.0).unwrap();
        assert!(matches!(ext.area_element(0.5), Err(Error::Domain(_))));
        let ann = ModelSpace::annulus(2, 1.0, 3.0).unwrap();
        assert!(ann.area_element(3.5).is_err());
        assert!((ann.area_element(2.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!(ModelSpace::euclidean(3).unwrap().area_element(-1.0).is_err());
    }

    #[test]
    fn invalid_constructions() {
        assert!(ModelSpace::euclidean(0).is_err());
        assert!(ModelSpace::annulus(2, 3.0, 1.0).is_err());
        assert!(ModelSpace::exterior(2, 0.0).is_err());
    }

    #[test]
    fn spectral_bottoms() {
        assert_eq!(ModelSpace::euclidean(2).unwrap().spectral_bottom(), 0.0);
        assert_eq!(ModelSpace::hyperbolic(3).unwrap().spectral_bottom(), 1.0);
        assert_eq!(ModelSpace::hyperbolic(2).unwrap().spectral_bottom(), 0.25);
        assert_eq!(ModelSpace::annulus(2, 1.0, 2.0).unwrap().spectral_bottom(), 0.0);
    }

    #[test]
    fn hyperbolic_growth() {
        for n in 2..=5 {
            let h = ModelSpace::hyperbolic(n).unwrap();
            let bound = ((n - 1) as f64 * 0.5).exp();
            let mut r = 1.0;
            while r < 30.0 {
                let ratio = h.area_element(r + 1.0).unwrap() / h.area_element(r).unwrap();
                assert!(ratio >= bound, "n={n} r={r} ratio={ratio}");
                r += 0.25;
            }
        }
    }

    #[test]
    fn eta_tail_examples() {
        let e3 = ModelSpace::euclidean(3).unwrap();
        let v = e3.eta_tail(1.0).unwrap();
        assert!((v - (1.0 / (4.0 * PI)).sqrt()).abs() < 1e-10);
        assert!((v - 0.28209).abs() < 1e-5);
        assert!(matches!(
            ModelSpace::euclidean(2).unwrap().eta_tail(1.0),
            Err(Error::UnsupportedGeometry(_))
        ));
        // Oracle: d/dr log tanh(r/2) = 1/sinh r.
        let h2 = ModelSpace::hyperbolic(2).unwrap();
        for &r in &[0.5, 1.0, 2.0, 5.0] {
            let exact = (-(r / 2.0f64).tanh().ln() / (2.0 * PI)).sqrt();
            let got = h2.eta_tail(r).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-8, "R={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn eta_tail_decreasing() {
        for space in [
            ModelSpace::euclidean(3).unwrap(),
            ModelSpace::euclidean(5).unwrap(),
            ModelSpace::hyperbolic(2).unwrap(),
            ModelSpace::hyperbolic(3).unwrap(),
            ModelSpace::exterior(4, 1.0).unwrap(),
            ModelSpace::annulus(2, 1.0, 10.0).unwrap(),
        ] {
            let lo = space.radial_domain().0.max(0.1);
            let mut prev = f64::INFINITY;
            for i in 0..40 {
                let r = lo + 0.2 * i as f64;
                let v = space.eta_tail(r).unwrap();
                assert!(v < prev, "{space} not decreasing at r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn parse_and_serialize() {
        let k: SpaceKind = "Hyperbolic".parse().unwrap();
        assert_eq!(k, SpaceKind::Hyperbolic);
        assert!("sphere".parse::<SpaceKind>().is_err());
        let s = ModelSpace::annulus(2, 1.0, 12.0).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"annulus","n":2,"inner_radius":1.0,"outer_radius":12.0}"#);
        let back: ModelSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
