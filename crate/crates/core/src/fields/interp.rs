use super::field::RadialField;
use super::grid::InnerBoundary;

impl RadialField {
    /// Value at virtual node `j`, extending by the boundary ghosts: even
    /// mirror through the origin, odd reflection through Dirichlet ends.
    fn extended(&self, j: i64) -> f64 {
        let m = self.grid.m as i64;
        if (0..m).contains(&j) {
            return self.values[j as usize];
        }
        if j >= m {
            // Ghost at index m sits on r_max with value 0.
            let k = j - m;
            if k == 0 || m - k < 0 {
                return 0.0;
            }
            return -self.extended(m - k);
        }
        match self.grid.bc_inner {
            InnerBoundary::NaturalAtOrigin => {
                let k = -1 - j;
                if k < m {
                    self.values[k as usize]
                } else {
                    0.0
                }
            }
            InnerBoundary::Dirichlet => {
                let k = -1 - j;
                if k == 0 || k - 1 >= m {
                    0.0
                } else {
                    -self.values[(k - 1) as usize]
                }
            }
        }
    }

    fn first_node(&self) -> f64 {
        self.grid.nodes[0]
    }

    /// Cubic Lagrange interpolation of the profile at radius `r`; zero beyond
    /// the truncation radius and inside a Dirichlet inner boundary. Negative
    /// radii on grids through the origin use the even extension.
    pub fn eval(&self, r: f64) -> f64 {
        let (lo, hi) = (self.grid.r_min, self.grid.r_max);
        if r >= hi {
            return 0.0;
        }
        let r = match self.grid.bc_inner {
            InnerBoundary::NaturalAtOrigin => r.abs(),
            InnerBoundary::Dirichlet if r <= lo => return 0.0,
            InnerBoundary::Dirichlet => r,
        };
        let s = (r - self.first_node()) / self.grid.h;
        let j = s.floor() as i64;
        let t = s - j as f64;
        let f = [
            self.extended(j - 1),
            self.extended(j),
            self.extended(j + 1),
            self.extended(j + 2),
        ];
        let w = [
            -t * (t - 1.0) * (t - 2.0) / 6.0,
            (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0,
            (t + 1.0) * t * (t - 1.0) / 6.0,
        ];
        f.iter().zip(w).map(|(f, w)| f * w).sum()
    }

    /// Radial derivative of the cubic interpolant at `r`.
    pub fn eval_derivative(&self, r: f64) -> f64 {
        let (lo, hi) = (self.grid.r_min, self.grid.r_max);
        if r >= hi {
            return 0.0;
        }
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        let r = match self.grid.bc_inner {
            InnerBoundary::NaturalAtOrigin => r.abs(),
            InnerBoundary::Dirichlet if r <= lo => return 0.0,
            InnerBoundary::Dirichlet => r,
        };
        let s = (r - self.first_node()) / self.grid.h;
        let j = s.floor() as i64;
        let t = s - j as f64;
        let f = [
            self.extended(j - 1),
            self.extended(j),
            self.extended(j + 1),
            self.extended(j + 2),
        ];
        // Derivatives of the Lagrange basis above with respect to t.
        let w = [
            -(3.0 * t * t - 6.0 * t + 2.0) / 6.0,
            (3.0 * t * t - 4.0 * t - 1.0) / 2.0,
            -(3.0 * t * t - 2.0 * t - 2.0) / 2.0,
            (3.0 * t * t - 1.0) / 6.0,
        ];
        sign * f.iter().zip(w).map(|(f, w)| f * w).sum::<f64>() / self.grid.h
    }

    /// Resamples `r ↦ u(b r)` onto the same grid.
    pub fn dilated(&self, b: f64) -> RadialField {
        let values = self.grid.nodes.iter().map(|&r| self.eval(b * r)).collect();
        self.with_values(values)
    }
}

#[cfg(test)]
mod tests {
    use crate::fields::{RadialField, RadialGrid};
    use crate::spaces::ModelSpace;

    #[test]
    fn interpolation_is_accurate() {
        let g = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(20.0), 2000).unwrap();
        let u = RadialField::from_fn(&g, |r| (-r * r).exp());
        for &r in &[0.0f64, 0.003, 0.5, 1.234, 3.0, -0.7] {
            let exact = (-r * r).exp();
            assert!((u.eval(r) - exact).abs() < 1e-8, "r={r}");
            let dexact = -2.0 * r * exact;
            assert!((u.eval_derivative(r) - dexact).abs() < 1e-5, "r={r}");
        }
        assert_eq!(u.eval(25.0), 0.0);
        for (i, &r) in g.nodes.iter().enumerate() {
            assert!((u.eval(r) - u.values[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn dirichlet_ends() {
        let g = RadialGrid::new(ModelSpace::annulus(2, 1.0, 4.0).unwrap(), None, 3000).unwrap();
        let f = |r: f64| ((r - 1.0) * std::f64::consts::PI / 3.0).sin();
        let u = RadialField::from_fn(&g, f);
        for &r in &[1.0, 1.0005, 2.2, 3.9999, 4.0] {
            assert!((u.eval(r) - f(r)).abs() < 1e-9, "r={r}");
        }
        assert_eq!(u.eval(0.5), 0.0);
        let same = u.dilated(1.0);
        for (a, b) in same.values.iter().zip(&u.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
