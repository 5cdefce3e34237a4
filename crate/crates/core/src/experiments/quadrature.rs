//! Functionals of translated, cut-off radial profiles, evaluated by the
//! midpoint rule on tensor grids. These are evaluators only: the fields are
//! built from a radial profile, never solved for.

use rayon::prelude::*;

use crate::cc::Cloud;
use crate::error::Result;
use crate::fields::RadialField;
use crate::numerics::unit_sphere_area;

/// `(‖∇v‖², ‖v‖², ∫|v|^{p+1})` of a trial field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Integrals {
    pub gradient: f64,
    pub mass: f64,
    pub j_p: f64,
}

impl Integrals {
    fn add(self, o: Integrals) -> Integrals {
        Integrals {
            gradient: self.gradient + o.gradient,
            mass: self.mass + o.mass,
            j_p: self.j_p + o.j_p,
        }
    }

    /// `F_λ` of the multiple of `v` with `J_p = β`.
    pub fn normalized_f(&self, lambda: f64, p: f64, beta: f64) -> f64 {
        (self.gradient + lambda * self.mass) * (beta / self.j_p).powf(2.0 / (p + 1.0))
    }
}

/// Linear ramp from 0 at `edge` to 1 at `edge + 1`, and its slope.
fn ramp(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        (t, 1.0)
    }
}

/// Radius beyond which `|u|` stays below `1e-12` of its peak.
pub fn support_radius(u: &RadialField) -> f64 {
    let peak = u.max_abs();
    let g = &u.grid;
    (0..g.m)
        .rev()
        .find(|&i| u.values[i].abs() > 1e-12 * peak)
        .map(|i| (g.nodes[i] + g.h).min(g.r_max))
        .unwrap_or(g.r_max)
}

/// Axially symmetric trial `v(x) = χ(|x|) u(|x - d e_z|)` in `ℝⁿ`, `n ≥ 2`,
/// with `χ` the unit-width ramp off the ball of radius `obstacle` (no cutoff
/// when `obstacle` is `None`). Cells of side `hq` in the meridian half-plane
/// `(ρ, z)`, `dV = ω ρ^{n-2} dρ dz`, with `z` nodes placed relative to `d`.
/// With `bin` set, also returns the measure `|v|^{p+1} dV` aggregated on
/// square bins of that side, as a cloud in the half-plane.
pub fn axisymmetric(
    u: &RadialField,
    n: usize,
    p: f64,
    d: f64,
    obstacle: Option<f64>,
    hq: f64,
    bin: Option<f64>,
) -> Result<(Integrals, Option<Cloud>)> {
    let l = support_radius(u);
    let nr = (l / hq).ceil() as usize;
    let nz = 2 * nr;
    let omega = unit_sphere_area(n - 1);
    let cell = hq * hq * omega;
    let q = p + 1.0;
    let rows: Vec<(Integrals, Vec<(usize, usize, f64)>)> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let rho = (i as f64 + 0.5) * hq;
            let wr = cell * rho.powi(n as i32 - 2);
            let mut acc = Integrals::default();
            let mut binned = Vec::new();
            for j in 0..nz {
                let dz = (j as f64 + 0.5 - nr as f64) * hq;
                let z = d + dz;
                let s = (rho * rho + dz * dz).sqrt();
                if s >= l {
                    continue;
                }
                let (us, dus) = (u.eval(s), u.eval_derivative(s));
                let (chi, grad_chi) = match obstacle {
                    Some(r0) => {
                        let x = (rho * rho + z * z).sqrt();
                        let (c, dc) = ramp(x - r0);
                        (c, if x > 0.0 { (dc * rho / x, dc * z / x) } else { (0.0, 0.0) })
                    }
                    None => (1.0, (0.0, 0.0)),
                };
                let v = chi * us;
                let (gr, gz) = if s > 0.0 {
                    (
                        grad_chi.0 * us + chi * dus * rho / s,
                        grad_chi.1 * us + chi * dus * dz / s,
                    )
                } else {
                    (grad_chi.0 * us, grad_chi.1 * us)
                };
                let jv = v.abs().powf(q) * wr;
                acc.gradient += (gr * gr + gz * gz) * wr;
                acc.mass += v * v * wr;
                acc.j_p += jv;
                if let Some(b) = bin {
                    if jv > 0.0 {
                        binned.push(((rho / b) as usize, ((z - d + l) / b).floor().max(0.0) as usize, jv));
                    }
                }
            }
            (acc, binned)
        })
        .collect();
    let total = rows.iter().fold(Integrals::default(), |a, r| a.add(r.0));
    let cloud = match bin {
        Some(b) => {
            let mut cells = std::collections::BTreeMap::new();
            for (_, row) in &rows {
                for &(a, c, w) in row {
                    *cells.entry((a, c)).or_insert(0.0) += w;
                }
            }
            let mut coords = Vec::with_capacity(2 * cells.len());
            let mut weights = Vec::with_capacity(cells.len());
            for ((a, c), w) in cells {
                coords.push((a as f64 + 0.5) * b);
                coords.push(d - l + (c as f64 + 0.5) * b);
                weights.push(w);
            }
            Some(Cloud::from_weights(2, coords, &weights)?)
        }
        None => None,
    };
    Ok((total, cloud))
}

/// Planar trial `v(x) = χ(|x|) u(|x - (c, 0)|)` on the annulus `R < |x| < S`
/// with `χ` ramping up over unit width at both boundaries. Cells of side `hq`
/// in a box around the bump, clipped to the annulus.
pub fn planar_annulus(u: &RadialField, p: f64, c: f64, inner: f64, outer: f64, hq: f64) -> Integrals {
    let l = support_radius(u).min(outer);
    let nx = (l / hq).ceil() as usize;
    let q = p + 1.0;
    let cell = hq * hq;
    (0..2 * nx)
        .into_par_iter()
        .map(|i| {
            let dx = (i as f64 + 0.5 - nx as f64) * hq;
            let x = c + dx;
            let mut acc = Integrals::default();
            for j in 0..2 * nx {
                let y = (j as f64 + 0.5 - nx as f64) * hq;
                let rx = (x * x + y * y).sqrt();
                if rx <= inner || rx >= outer {
                    continue;
                }
                let s = (dx * dx + y * y).sqrt();
                if s >= l {
                    continue;
                }
                let (a, da) = ramp(rx - inner);
                let (b, db) = ramp(outer - rx);
                let chi = a * b;
                // ∇χ = (da·b - a·db) x/|x|
                let dchi = da * b - a * db;
                let (us, dus) = (u.eval(s), u.eval_derivative(s));
                let (mut gx, mut gy) = (dchi * x / rx * us, dchi * y / rx * us);
                if s > 0.0 {
                    gx += chi * dus * dx / s;
                    gy += chi * dus * y / s;
                }
                let v = chi * us;
                acc.gradient += (gx * gx + gy * gy) * cell;
                acc.mass += v * v * cell;
                acc.j_p += v.abs().powf(q) * cell;
            }
            acc
        })
        .reduce(Integrals::default, Integrals::add)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{functionals, ProblemParams, RadialGrid};
    use crate::spaces::ModelSpace;

    #[test]
    fn reproduces_radial_functionals() {
        for n in [2usize, 3] {
            let g = RadialGrid::new(ModelSpace::euclidean(n).unwrap(), Some(12.0), 3000).unwrap();
            let u = RadialField::from_fn(&g, |r| (-r * r).exp());
            let f = functionals(&u, &ProblemParams::new(n, 3.0, 1.0, 1.0));
            let (s, _) = axisymmetric(&u, n, 3.0, 5.0, None, 0.01, None).unwrap();
            assert!((s.mass / f.mass - 1.0).abs() < 1e-4, "n={n}: {} vs {}", s.mass, f.mass);
            assert!((s.gradient / f.gradient - 1.0).abs() < 1e-4);
            assert!((s.j_p / f.j_p - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn planar_matches_radial_away_from_boundaries() {
        let g = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(12.0), 3000).unwrap();
        let u = RadialField::from_fn(&g, |r| (-r * r).exp());
        let f = functionals(&u, &ProblemParams::new(2, 3.0, 1.0, 1.0));
        let s = planar_annulus(&u, 3.0, 20.0, 1.0, 40.0, 0.01);
        assert!((s.mass / f.mass - 1.0).abs() < 1e-4);
        assert!((s.gradient / f.gradient - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cutoff_costs_energy() {
        let g = RadialGrid::new(ModelSpace::euclidean(3).unwrap(), Some(12.0), 3000).unwrap();
        let u = RadialField::from_fn(&g, |r| (-r).exp() / r.cosh());
        let (free, _) = axisymmetric(&u, 3, 3.0, 2.0, None, 0.02, None).unwrap();
        let (cut, cloud) = axisymmetric(&u, 3, 3.0, 2.0, Some(1.0), 0.02, Some(0.5)).unwrap();
        assert!(cut.mass < free.mass);
        let total: f64 = cloud.unwrap().masses.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
