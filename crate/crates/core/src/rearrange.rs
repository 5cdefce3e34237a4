//! Radial decreasing rearrangement of sampled radial fields.
//!
//! The values `|uᵢ|` with their cell measures `wᵢ` define a step function
//! of the measure variable once sorted in decreasing order. The rearranged
//! field assigns to each cell, taken outward from the origin, the average of
//! that step function over the cell's measure interval. Away from at most
//! one boundary cell per level this is exact, so distribution functions are
//! matched to within one cell's measure.

use crate::error::{Error, Result};
use crate::fields::RadialField;

/// The equimeasurable nonincreasing profile `u*` of `|u|`.
pub fn decreasing_rearrangement(u: &RadialField) -> Result<RadialField> {
    let grid = &u.grid;
    if !grid.space.contains_origin() {
        return Err(Error::Domain(format!(
            "rearrangement needs a radial domain starting at the origin, not {}",
            grid.space
        )));
    }
    let w = &grid.weights;
    let m = grid.m;
    let mut order: Vec<usize> = (0..m).collect();
    // Stable: ties keep their radial order, so a nonincreasing input maps
    // onto itself cell by cell.
    order.sort_by(|&a, &b| u.values[b].abs().total_cmp(&u.values[a].abs()));

    // Cumulative measure of the cells in radial order and in sorted order.
    let mut cells = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    cells.push(acc);
    for &wi in w {
        acc += wi;
        cells.push(acc);
    }
    let mut levels = Vec::with_capacity(m + 1);
    acc = 0.0;
    levels.push(acc);
    for &k in &order {
        acc += w[k];
        levels.push(acc);
    }

    let mut out = vec![0.0; m];
    let mut k = 0;
    for j in 0..m {
        let (a, b) = (cells[j], cells[j + 1]);
        while k + 1 < m && levels[k + 1] <= a {
            k += 1;
        }
        if levels[k] <= a && levels[k + 1] >= b {
            out[j] = u.values[order[k]].abs();
            continue;
        }
        let mut sum = 0.0;
        let mut kk = k;
        while kk < m && levels[kk] < b {
            let lo = levels[kk].max(a);
            let hi = levels[kk + 1].min(b);
            if hi > lo {
                sum += (hi - lo) * u.values[order[kk]].abs();
            }
            kk += 1;
        }
        out[j] = sum / (b - a);
    }
    // Rounding in the averages must not break monotonicity.
    for j in 1..m {
        if out[j] > out[j - 1] {
            out[j] = out[j - 1];
        }
    }
    Ok(u.with_values(out))
}

/// `μ{|u| > t}` in the grid's cell measure.
pub fn distribution_function(u: &RadialField, t: f64) -> f64 {
    u.values
        .iter()
        .zip(&u.grid.weights)
        .filter(|(v, _)| v.abs() > t)
        .map(|(_, w)| w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{dirichlet_energy, random_smooth_field, RadialGrid};
    use crate::spaces::ModelSpace;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_and_monotone_are_fixed() {
        let g = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(5.0), 300).unwrap();
        let c = RadialField::from_fn(&g, |_| 1.5);
        assert_eq!(decreasing_rearrangement(&c).unwrap().values, c.values);
        let d = RadialField::from_fn(&g, |r| (-r).exp());
        assert_eq!(decreasing_rearrangement(&d).unwrap().values, d.values);
    }

    #[test]
    fn step_moves_to_origin() {
        let g = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(4.0), 2000).unwrap();
        let u = RadialField::from_fn(&g, |r| {
            if r < 1.0 {
                1.0
            } else if r < 2.0 {
                2.0
            } else {
                0.0
            }
        });
        let s = decreasing_rearrangement(&u).unwrap();
        let cell = g.weights.iter().cloned().fold(0.0, f64::max);
        for t in [0.5, 1.5] {
            let a = distribution_function(&u, t);
            let b = distribution_function(&s, t);
            assert!((a - b).abs() <= cell, "t={t}: {a} vs {b}");
        }
        // The level-2 region (area 3π) becomes the disc of radius √3.
        for (i, &r) in g.nodes.iter().enumerate() {
            if r < 3f64.sqrt() - 0.01 {
                assert_eq!(s.values[i], 2.0);
            }
            if r > 3f64.sqrt() + 0.01 && r < 2.0 - 0.01 {
                assert_eq!(s.values[i], 1.0);
            }
            if r > 2.01 {
                assert_eq!(s.values[i], 0.0);
            }
        }
    }

    #[test]
    fn rejects_exterior() {
        let g = RadialGrid::new(ModelSpace::exterior(3, 1.0).unwrap(), Some(5.0), 100).unwrap();
        let u = RadialField::from_fn(&g, |r| r);
        assert!(matches!(decreasing_rearrangement(&u), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn rearrangement_properties(seed in 0u64..1_000_000, hyperbolic in any::<bool>()) {
            let space = if hyperbolic { ModelSpace::hyperbolic(2).unwrap() } else { ModelSpace::euclidean(2).unwrap() };
            let r_max = if hyperbolic { 8.0 } else { 12.0 };
            let g = RadialGrid::new(space, Some(r_max), 2000).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_smooth_field(&g, &mut rng);
            let s = decreasing_rearrangement(&u).unwrap();
            for w in s.values.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            let again = decreasing_rearrangement(&s).unwrap();
            prop_assert_eq!(&again.values, &s.values);
            prop_assert!((s.mass() / u.mass() - 1.0).abs() < 1e-2);
            prop_assert!((s.lp_integral(4.0) / u.lp_integral(4.0) - 1.0).abs() < 1e-2);
            prop_assert!(dirichlet_energy(&s) <= dirichlet_energy(&u) * 1.02);
        }
    }
}
