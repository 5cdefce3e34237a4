use super::{LinearizedOperator, SpectralReport};
use crate::error::{Error, Result};
use crate::fields::RadialField;
use crate::numerics::solve_tridiagonal;

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let m = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let mut rad = 0.0;
        if i > 0 {
            rad += e[i - 1].abs();
        }
        if i + 1 < m {
            rad += e[i].abs();
        }
        lo = lo.min(d[i] - rad);
        hi = hi.max(d[i] + rad);
    }
    (lo, hi)
}

/// The `j`-th smallest eigenvalue by bisection on the Sturm count.
fn bisect(d: &[f64], e: &[f64], j: usize, lo: f64, hi: f64) -> f64 {
    let norm = lo.abs().max(hi.abs());
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * f64::EPSILON * norm || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn tri_apply(d: &[f64], e: &[f64], x: &[f64]) -> Vec<f64> {
    let m = d.len();
    (0..m)
        .map(|i| {
            let mut s = d[i] * x[i];
            if i > 0 {
                s += e[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                s += e[i] * x[i + 1];
            }
            s
        })
        .collect()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    n
}

/// Inverse iteration for the eigenvector of `mu`, kept orthogonal to `prev`.
fn eigenvector(d: &[f64], e: &[f64], mu: f64, norm: f64, prev: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = d.len();
    let shift = mu - 1e-10 * norm;
    let diag: Vec<f64> = d.iter().map(|v| v - shift).collect();
    // Deterministic, generic start.
    let mut x: Vec<f64> = (0..m).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract()).collect();
    normalize(&mut x);
    let mut resid = f64::INFINITY;
    for _ in 0..12 {
        let mut y = solve_tridiagonal(e, &diag, e, &x);
        for p in prev {
            let c: f64 = y.iter().zip(p).map(|(a, b)| a * b).sum();
            y.iter_mut().zip(p).for_each(|(a, b)| *a -= c * b);
        }
        let n = normalize(&mut y);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Numerical(format!("inverse iteration broke down at eigenvalue {mu:.6e}")));
        }
        x = y;
        let tx = tri_apply(d, e, &x);
        let next = tx.iter().zip(&x).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
        // Stop at the rounding floor, or once another step no longer helps.
        let stalled = next > 0.5 * resid;
        resid = resid.min(next);
        if next <= 64.0 * f64::EPSILON * norm || (stalled && resid <= 1e-9 * norm) {
            return Ok(x);
        }
    }
    Err(Error::Numerical(format!(
        "inverse iteration stagnated at eigenvalue {mu:.6e}: residual {resid:.3e} (matrix norm {norm:.3e})"
    )))
}

/// The `k` lowest eigenpairs of `op`; eigenfields are normalized to unit
/// weighted mass with their largest entry positive.
pub fn lowest_eigs(op: &LinearizedOperator, k: usize) -> Result<SpectralReport> {
    let m = op.grid.m;
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("need 1 ≤ k ≤ {m}, got {k}")));
    }
    let (d, e) = (&op.diag, &op.off);
    let (lo, hi) = gershgorin(d, e);
    let norm = lo.abs().max(hi.abs());
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut fields = Vec::with_capacity(k);
    for j in 0..k {
        let mu = bisect(d, e, j, lo, hi);
        let mut y = eigenvector(d, e, mu, norm, &vectors)?;
        let peak = y.iter().cloned().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if peak < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let values = y
            .iter()
            .zip(&op.grid.weights)
            .map(|(v, w)| v / w.sqrt())
            .collect();
        fields.push(RadialField::new(op.grid.clone(), values)?);
        vectors.push(y);
        eigenvalues.push(mu);
    }
    let null_tolerance = op.null_tolerance();
    let negative_count = sturm_count(d, e, -null_tolerance);
    Ok(SpectralReport {
        a: op.a,
        ell: op.ell,
        eigenvalues,
        eigenfields: fields,
        negative_count,
        null_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_matches_known_spectrum() {
        // Discrete Dirichlet Laplacian: eigenvalues 2 - 2cos(kπ/(m+1)).
        let m = 50;
        let d = vec![2.0; m];
        let e = vec![-1.0; m - 1];
        let (lo, hi) = gershgorin(&d, &e);
        for j in 0..5 {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (m as f64 + 1.0)).cos();
            let got = bisect(&d, &e, j, lo, hi);
            assert!((got - exact).abs() < 1e-13, "{j}: {got} {exact}");
            let v = eigenvector(&d, &e, got, 4.0, &[]).unwrap();
            let mut s: Vec<f64> = (0..m)
                .map(|i| ((i + 1) as f64 * (j + 1) as f64 * std::f64::consts::PI / (m as f64 + 1.0)).sin())
                .collect();
            normalize(&mut s);
            let c: f64 = v.iter().zip(&s).map(|(a, b)| a * b).sum();
            assert!(1.0 - c.abs() < 1e-12, "{j}: cos {c}");
        }
        assert_eq!(sturm_count(&d, &e, 0.0), 0);
        assert_eq!(sturm_count(&d, &e, 4.0), m);
    }
}
