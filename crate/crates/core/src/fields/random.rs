use std::sync::Arc;

use rand::Rng;

use super::field::RadialField;
use super::grid::{InnerBoundary, RadialGrid};

fn bumps<R: Rng + ?Sized>(grid: &Arc<RadialGrid>, rng: &mut R, signed: bool) -> RadialField {
    let lo = grid.r_min;
    let span = grid.r_max - lo;
    let count = rng.gen_range(1..=4);
    let params: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let amp = rng.gen_range(0.2..2.0) * if signed && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
            let centre = lo + rng.gen_range(0.0..0.5) * span;
            let width = rng.gen_range(0.03..0.15) * span;
            (amp, centre, width)
        })
        .collect();
    let taper = (span / 20.0).max(grid.h * 10.0);
    RadialField::from_fn(grid, |r| {
        let inner = match grid.bc_inner {
            InnerBoundary::NaturalAtOrigin => 1.0,
            InnerBoundary::Dirichlet => 1.0 - (-((r - lo) / taper).powi(2)).exp(),
        };
        let outer = 1.0 - (-((grid.r_max - r) / taper).powi(2)).exp();
        inner
            * outer
            * params
                .iter()
                .map(|&(a, c, w)| a * (-((r - c) / w).powi(2)).exp())
                .sum::<f64>()
    })
}

/// Nonnegative sum of one to four Gaussian shells, resolved by the grid and
/// vanishing at Dirichlet ends.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: &Arc<RadialGrid>, rng: &mut R) -> RadialField {
    bumps(grid, rng, false)
}

/// As [`random_smooth_field`] with random signs on the shells.
pub fn random_signed_field<R: Rng + ?Sized>(grid: &Arc<RadialGrid>, rng: &mut R) -> RadialField {
    bumps(grid, rng, true)
}
