use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre4;
use crate::spaces::{ModelSpace, SpaceKind};

/// Boundary treatment at the inner end of the radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerBoundary {
    /// Regular behaviour at the base point (`u'(0) = 0` by a mirror ghost).
    NaturalAtOrigin,
    /// `u = 0` at the inner radius.
    Dirichlet,
}

/// Serializable description of a grid; the grid itself is rebuilt from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub space: ModelSpace,
    pub r_max: f64,
    pub m: usize,
}

/// Uniform radial grid with finite-volume weights.
///
/// With `NaturalAtOrigin` the nodes are cell centred, `r_i = (i + ½) h` with
/// `h = r_max / (m + ½)`, so that the mirror ghost at `-h/2` imposes
/// `u'(0) = 0` at second order. With an inner Dirichlet boundary the nodes
/// are `r_i = r_min + (i + 1) h`, `h = (r_max - r_min) / (m + 1)`. In both
/// layouts `u = 0` at `r_max`.
///
/// `weights[i]` is the exact measure of the dual cell around node `i`, and
/// `face_area[j]` is `A` at the interface between nodes `j - 1` and `j`
/// (`j = 0` is the inner boundary face, `j = m` the outer one).
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub space: ModelSpace,
    pub r_min: f64,
    pub r_max: f64,
    pub m: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub face_area: Vec<f64>,
    pub bc_inner: InnerBoundary,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
}

impl RadialGrid {
    /// Builds a grid with `m` unknowns on `[r_min, r_max]`. For the annulus
    /// `r_max` must equal the outer radius (pass `None` to use it).
    pub fn new(space: ModelSpace, r_max: Option<f64>, m: usize) -> Result<Arc<Self>> {
        if m < 2 {
            return Err(Error::Parameter("grid needs at least 2 interior nodes".into()));
        }
        let (lo, hi) = space.radial_domain();
        let r_max = match (space.kind, r_max) {
            (SpaceKind::Annulus, None) => hi,
            (SpaceKind::Annulus, Some(r)) if (r - hi).abs() <= 1e-12 * hi.max(1.0) => hi,
            (SpaceKind::Annulus, Some(r)) => {
                return Err(Error::Parameter(format!(
                    "annulus grid must end at the outer radius {hi}, got {r}"
                )))
            }
            (_, Some(r)) => r,
            (_, None) => {
                return Err(Error::Parameter("unbounded space needs a truncation radius".into()))
            }
        };
        if !(r_max.is_finite() && r_max > lo) {
            return Err(Error::Parameter(format!("truncation radius {r_max} must exceed {lo}")));
        }
        let bc_inner = if space.contains_origin() {
            InnerBoundary::NaturalAtOrigin
        } else {
            InnerBoundary::Dirichlet
        };
        let (h, nodes, faces): (f64, Vec<f64>, Vec<f64>) = match bc_inner {
            InnerBoundary::NaturalAtOrigin => {
                let h = r_max / (m as f64 + 0.5);
                let nodes = (0..m).map(|i| (i as f64 + 0.5) * h).collect();
                let faces = (0..=m).map(|j| j as f64 * h).collect();
                (h, nodes, faces)
            }
            InnerBoundary::Dirichlet => {
                let h = (r_max - lo) / (m as f64 + 1.0);
                let nodes = (0..m).map(|i| lo + (i as f64 + 1.0) * h).collect();
                let faces = (0..=m).map(|j| lo + (j as f64 + 0.5) * h).collect();
                (h, nodes, faces)
            }
        };
        let weights = (0..m)
            .map(|i| gauss_legendre4(|r| space.area_unchecked(r), faces[i], faces[i + 1]))
            .collect();
        let face_area = faces.iter().map(|&r| space.area_unchecked(r)).collect();
        Ok(Arc::new(RadialGrid {
            space,
            r_min: lo,
            r_max,
            m,
            h,
            nodes,
            weights,
            face_area,
            bc_inner,
        }))
    }

    /// Truncation radius used when none is configured: `40/√max(λ, 0.1)`
    /// beyond the inner radius for Euclidean-type spaces, 30 for hyperbolic
    /// space and the outer radius for the annulus.
    pub fn default_r_max(space: &ModelSpace, lambda: f64) -> f64 {
        match space.kind {
            SpaceKind::Euclidean | SpaceKind::Exterior => {
                space.radial_domain().0 + 40.0 / lambda.max(0.1).sqrt()
            }
            SpaceKind::Hyperbolic => 30.0,
            SpaceKind::Annulus => space.radial_domain().1,
        }
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Arc<Self>> {
        let r_max = if spec.space.kind == SpaceKind::Annulus { None } else { Some(spec.r_max) };
        Self::new(spec.space, r_max, spec.m)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            space: self.space,
            r_max: self.r_max,
            m: self.m,
        }
    }

    /// Radii of the cell interfaces (`m + 1` values).
    pub fn face_radii(&self) -> Vec<f64> {
        match self.bc_inner {
            InnerBoundary::NaturalAtOrigin => (0..=self.m).map(|j| j as f64 * self.h).collect(),
            InnerBoundary::Dirichlet => (0..=self.m)
                .map(|j| self.r_min + (j as f64 + 0.5) * self.h)
                .collect(),
        }
    }

    /// Measure of the truncated radial domain as seen by the quadrature.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Samples `f` at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unit_sphere_area;

    fn shell_volume(space: &ModelSpace, a: f64, b: f64) -> f64 {
        let n = space.n as i32;
        let omega = unit_sphere_area(space.n);
        match space.kind {
            SpaceKind::Hyperbolic => {
                crate::numerics::adaptive_simpson(&|r: f64| omega * r.sinh().powi(n - 1), a, b, 1e-10)
            }
            _ => omega * (b.powi(n) - a.powi(n)) / n as f64,
        }
    }

    #[test]
    fn constant_integrates_to_shell_volume() {
        let cases = [
            (ModelSpace::euclidean(1).unwrap(), Some(10.0)),
            (ModelSpace::euclidean(2).unwrap(), Some(10.0)),
            (ModelSpace::euclidean(3).unwrap(), Some(10.0)),
            (ModelSpace::hyperbolic(2).unwrap(), Some(8.0)),
            (ModelSpace::hyperbolic(3).unwrap(), Some(8.0)),
            (ModelSpace::exterior(3, 1.0).unwrap(), Some(11.0)),
            (ModelSpace::annulus(2, 1.0, 12.0).unwrap(), None),
        ];
        for (space, r_max) in cases {
            let grid = RadialGrid::new(space, r_max, 1000).unwrap();
            let faces = grid.face_radii();
            let exact = shell_volume(&space, faces[0], faces[grid.m]);
            let rel = (grid.volume() - exact).abs() / exact;
            assert!(rel < 1e-9, "{space}: rel {rel}");
        }
    }

    #[test]
    fn layout() {
        let g = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(10.5), 10).unwrap();
        assert_eq!(g.bc_inner, InnerBoundary::NaturalAtOrigin);
        assert!((g.h - 1.0).abs() < 1e-15);
        assert!((g.nodes[0] - 0.5).abs() < 1e-15);
        assert!(g.weights.iter().all(|&w| w > 0.0));
        let a = RadialGrid::new(ModelSpace::annulus(2, 1.0, 12.0).unwrap(), None, 10).unwrap();
        assert_eq!(a.bc_inner, InnerBoundary::Dirichlet);
        assert!((a.h - 1.0).abs() < 1e-15);
        assert!((a.nodes[0] - 2.0).abs() < 1e-15);
        assert!((a.nodes[9] - 11.0).abs() < 1e-15);
        assert!(RadialGrid::new(ModelSpace::annulus(2, 1.0, 12.0).unwrap(), Some(20.0), 10).is_err());
        assert!(RadialGrid::new(ModelSpace::euclidean(2).unwrap(), None, 10).is_err());
    }

    #[test]
    fn default_truncation() {
        let e = ModelSpace::euclidean(2).unwrap();
        assert!((RadialGrid::default_r_max(&e, 1.0) - 40.0).abs() < 1e-12);
        assert!((RadialGrid::default_r_max(&e, 4.0) - 20.0).abs() < 1e-12);
        assert!((RadialGrid::default_r_max(&e, 0.0) - 40.0 / 0.1f64.sqrt()).abs() < 1e-12);
        let h = ModelSpace::hyperbolic(3).unwrap();
        assert_eq!(RadialGrid::default_r_max(&h, 1.0), 30.0);
    }
}
