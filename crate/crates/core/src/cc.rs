//! Concentration-compactness trichotomy for sequences of atomic
//! probability measures on `ℝ^d`.
//!
//! `Q_k(R) = sup_y μ_k(B_R(y))` is evaluated with centres restricted to the
//! atoms of `μ_k`. Every ball of radius `R` that holds mass sits inside a
//! ball of radius `2R` around one of its atoms, so the atom-centred values at
//! `R` and `2R` bracket the true supremum.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::CcThresholds;
use crate::error::{Error, Result};
use crate::fields::RadialField;

/// Tolerance on the total mass of a cloud.
pub const MASS_TOL: f64 = 1e-12;

/// Atoms `(x_i, m_i)` in `ℝ^dim` with `Σ m_i = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cloud {
    pub dim: usize,
    /// Row-major coordinates, `dim` per atom.
    pub coords: Vec<f64>,
    pub masses: Vec<f64>,
}

impl Cloud {
    pub fn new(dim: usize, coords: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("clouds need dimension d ≥ 1".into()));
        }
        if masses.is_empty() {
            return Err(Error::Input("cloud has no atoms".into()));
        }
        if coords.len() != dim * masses.len() {
            return Err(Error::Input(format!(
                "{} coordinates for {} atoms in dimension {dim}",
                coords.len(),
                masses.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("non-finite coordinate".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Input("masses must be finite and nonnegative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::Input(format!("cloud masses sum to {total}, not 1")));
        }
        Ok(Cloud { dim, coords, masses })
    }

    /// A cloud from nonnegative weights, normalized to unit mass.
    pub fn from_weights(dim: usize, coords: Vec<f64>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Input(format!("cannot normalize weights with total {total}")));
        }
        Cloud::new(dim, coords, weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::Shape(format!("offset of length {} in dimension {}", offset.len(), self.dim)));
        }
        let coords = self
            .coords
            .chunks(self.dim)
            .flat_map(|x| x.iter().zip(offset).map(|(a, b)| a + b))
            .collect();
        Ok(Cloud {
            dim: self.dim,
            coords,
            masses: self.masses.clone(),
        })
    }

    fn dist2(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Candidate centres: the heaviest atoms, at most `cap` of them.
    fn centres(&self, cap: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        if idx.len() > cap {
            idx.sort_by(|&a, &b| self.masses[b].total_cmp(&self.masses[a]));
            idx.truncate(cap);
            idx.sort_unstable();
        }
        idx
    }

    /// Squared distances from atom `c`, sorted, with cumulative masses.
    fn shells(&self, c: usize) -> (Vec<f64>, Vec<f64>) {
        let mut order: Vec<(f64, f64)> = (0..self.len()).map(|j| (self.dist2(c, j), self.masses[j])).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(order.len());
        for &(_, m) in &order {
            acc += m;
            cum.push(acc);
        }
        (order.into_iter().map(|o| o.0).collect(), cum)
    }

    /// Mass of the closed ball of radius `r`, from [`Cloud::shells`].
    fn ball(d2: &[f64], cum: &[f64], r: f64) -> f64 {
        let count = d2.partition_point(|&d| d <= r * r);
        match count {
            0 => 0.0,
            c if c == d2.len() => 1.0,
            c => cum[c - 1].min(1.0),
        }
    }

    /// `(Q(R), best centre)` for every radius, centres capped at `cap`.
    fn profile(&self, radii: &[f64], cap: usize) -> Vec<(f64, usize)> {
        let mut best = vec![(f64::NEG_INFINITY, 0usize); radii.len()];
        for c in self.centres(cap) {
            let (d2, cum) = self.shells(c);
            for (slot, &r) in best.iter_mut().zip(radii) {
                let q = Cloud::ball(&d2, &cum, r);
                if q > slot.0 {
                    *slot = (q, c);
                }
            }
        }
        best
    }
}

/// `sup_y μ(B_R(y))` with `y` ranging over the atoms.
pub fn concentration_function(cloud: &Cloud, r: f64) -> f64 {
    cloud.profile(&[r], usize::MAX)[0].0
}

/// An ordered sequence of clouds in a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSequence {
    pub dim: usize,
    pub entries: Vec<Cloud>,
}

impl MeasureSequence {
    pub fn new(entries: Vec<Cloud>) -> Result<Self> {
        let dim = entries
            .first()
            .ok_or_else(|| Error::Input("empty measure sequence".into()))?
            .dim;
        if entries.iter().any(|c| c.dim != dim) {
            return Err(Error::Input("clouds of different dimensions".into()));
        }
        Ok(MeasureSequence { dim, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads CSV rows `k, x_1, …, x_d, mass` with a header line. Clouds are
    /// ordered by `k`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let ncols = rdr.headers()?.len();
        if ncols < 3 {
            return Err(Error::Input("expected columns k, coordinates…, mass".into()));
        }
        let dim = ncols - 2;
        let mut groups: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("row {}: column {}: {e}", line + 2, i + 1)))
            };
            let k = rec[0]
                .parse::<i64>()
                .map_err(|e| Error::Input(format!("row {}: k: {e}", line + 2)))?;
            let entry = groups.entry(k).or_default();
            for i in 1..=dim {
                entry.0.push(parse(i)?);
            }
            entry.1.push(parse(ncols - 1)?);
        }
        let entries = groups
            .into_values()
            .map(|(coords, masses)| Cloud::new(dim, coords, masses))
            .collect::<Result<Vec<_>>>()?;
        MeasureSequence::new(entries)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        MeasureSequence::from_csv(std::fs::File::open(path)?)
    }

    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        MeasureSequence::new(self.entries.iter().map(|c| c.translated(offset)).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Vanishing,
    Concentration,
    Splitting,
    Inconclusive,
}

/// Ball `B_R(y_k)` carrying the concentrated mass, and for splitting the
/// complement of the larger ball `B_ρ(y_k)` carrying the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub k: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_mass: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrichotomyReport {
    pub alpha: f64,
    pub label: Label,
    pub radii: Vec<f64>,
    /// `Q_k(R)` with atom centres, one row per `k`.
    pub q_table: Vec<Vec<f64>>,
    /// Atom-centred values at `2R`, an upper bound for the true `Q_k(R)`.
    pub q_upper: Vec<Vec<f64>>,
    /// Tail averages of `Q_k(R)`, the estimate of `Q(R)`.
    pub limit: Vec<f64>,
    /// First index of the tail used for the limits.
    pub tail_start: usize,
    /// Spread of `Q_k(R_max)` over the tail.
    pub spread: f64,
    pub epsilon: f64,
    pub witnesses: Vec<Witness>,
}

/// Minimum number of clouds for a classification.
pub const MIN_ENTRIES: usize = 8;

/// Classifies a sequence of clouds as vanishing, concentrating or splitting.
pub fn classify(seq: &MeasureSequence, radii: &[f64], th: &CcThresholds) -> Result<TrichotomyReport> {
    if seq.is_empty() {
        return Err(Error::Input("empty measure sequence".into()));
    }
    if seq.len() < MIN_ENTRIES {
        return Err(Error::Input(format!(
            "need at least {MIN_ENTRIES} clouds, got {}",
            seq.len()
        )));
    }
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::Input("radii must be a nonempty list of finite nonnegative lengths".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("radii must be strictly ascending".into()));
    }
    let cap = th.max_centers.max(1);
    let mut both: Vec<f64> = radii.to_vec();
    both.extend(radii.iter().map(|r| 2.0 * r));
    let rows: Vec<Vec<(f64, usize)>> = seq.entries.par_iter().map(|c| c.profile(&both, cap)).collect();
    let nr = radii.len();
    let q_table: Vec<Vec<f64>> = rows.iter().map(|r| r[..nr].iter().map(|x| x.0).collect()).collect();
    let q_upper: Vec<Vec<f64>> = rows.iter().map(|r| r[nr..].iter().map(|x| x.0).collect()).collect();

    let kk = seq.len();
    let tail_start = kk - (kk / 4).max(2);
    let tail = &q_table[tail_start..];
    let limit: Vec<f64> = (0..nr)
        .map(|j| tail.iter().map(|row| row[j]).sum::<f64>() / tail.len() as f64)
        .collect();
    let last = nr - 1;
    let alpha = limit[last];
    let (lo, hi) = tail
        .iter()
        .map(|row| row[last])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| (a.min(q), b.max(q)));
    let spread = hi - lo;
    let label = if spread >= th.stabilization {
        Label::Inconclusive
    } else if alpha <= th.vanish {
        Label::Vanishing
    } else if alpha >= 1.0 - th.conc {
        Label::Concentration
    } else {
        Label::Splitting
    };

    let epsilon = th.stabilization;
    let r_big = radii[last];
    let witnesses = match label {
        Label::Concentration | Label::Splitting => (tail_start..kk)
            .map(|k| {
                let cloud = &seq.entries[k];
                let (mass, c) = rows[k][last];
                let mut w = Witness {
                    k,
                    center: cloud.point(c).to_vec(),
                    radius: r_big,
                    mass,
                    outer_radius: None,
                    outer_mass: None,
                };
                if label == Label::Splitting {
                    let (d2, cum) = cloud.shells(c);
                    // Grow the ball while it gains less than ε over B_R.
                    let mut idx = d2.partition_point(|&d| d <= r_big * r_big);
                    while idx < d2.len() && cum[idx] <= mass + epsilon {
                        idx += 1;
                    }
                    let (rho, inside) = if idx == 0 { (r_big, 0.0) } else { (d2[idx - 1].sqrt().max(r_big), cum[idx - 1]) };
                    w.outer_radius = Some(rho);
                    w.outer_mass = Some((1.0 - inside).max(0.0));
                }
                w
            })
            .collect(),
        _ => Vec::new(),
    };

    Ok(TrichotomyReport {
        alpha,
        label,
        radii: radii.to_vec(),
        q_table,
        q_upper,
        limit,
        tail_start,
        spread,
        epsilon,
        witnesses,
    })
}

/// Which density of a field becomes the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Density {
    /// `|u|^{p+1}`, the `F_λ` problem.
    Jp,
    /// `|u|²`, the energy problem.
    Mass,
}

/// Turns radial iterates into clouds over the radial coordinate (cell
/// measures as weights) and classifies them.
pub fn minimizer_diagnostic(
    iterates: &[RadialField],
    p: f64,
    density: Density,
    radii: &[f64],
    th: &CcThresholds,
) -> Result<TrichotomyReport> {
    let clouds = iterates
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let w = &u.grid.weights;
            let weights: Vec<f64> = match density {
                Density::Jp => u.values.iter().zip(w).map(|(v, w)| v.abs().powf(p + 1.0) * w).collect(),
                Density::Mass => u.values.iter().zip(w).map(|(v, w)| v * v * w).collect(),
            };
            Cloud::from_weights(1, u.grid.nodes.clone(), &weights)
                .map_err(|e| Error::Input(format!("iterate {k} is not normalizable: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    classify(&MeasureSequence::new(clouds)?, radii, th)
}

/// Radii used when none are given.
pub const DEFAULT_RADII: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

/// Test families with known limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// A fixed Gaussian bump in the plane translated by `(k, 0)`.
    FixedBump,
    /// Uniform atoms on `[-L_k, L_k]` with `L_k = 4^k`.
    Spreading,
    /// Half the mass at the origin, half at distance `4k`.
    SeparatingPair,
}

fn bump(half_width: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    let n = (2.0 * half_width / step).round() as usize + 1;
    let mut coords = Vec::with_capacity(2 * n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let x = -half_width + i as f64 * step;
            let y = -half_width + j as f64 * step;
            coords.push(x);
            coords.push(y);
            weights.push((-(x * x + y * y) / 2.0).exp());
        }
    }
    (coords, weights)
}

/// `entries` clouds of the family, indexed `k = 1..=entries`.
pub fn synthetic(family: Family, entries: usize) -> Result<MeasureSequence> {
    let clouds = (1..=entries)
        .map(|k| {
            let k = k as f64;
            match family {
                Family::FixedBump => {
                    let (c, w) = bump(4.0, 0.5);
                    Cloud::from_weights(2, c, &w)?.translated(&[k, 0.0])
                }
                Family::Spreading => {
                    let n = 1000;
                    let l = 4f64.powf(k);
                    let coords = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
                    Cloud::from_weights(1, coords, &vec![1.0; n])
                }
                Family::SeparatingPair => {
                    let (c, w) = bump(4.0, 0.5);
                    let mut coords = c.clone();
                    coords.extend(c.chunks(2).flat_map(|x| [x[0] + 4.0 * k, x[1]]));
                    let mut weights = w.clone();
                    weights.extend(w);
                    Cloud::from_weights(2, coords, &weights)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureSequence::new(clouds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::RadialGrid;
    use crate::spaces::ModelSpace;
    use proptest::prelude::*;

    #[test]
    fn atoms() {
        let one = Cloud::new(3, vec![1.0, 2.0, 3.0], vec![1.0]).unwrap();
        for r in [0.0, 1.0, 10.0] {
            assert_eq!(concentration_function(&one, r), 1.0);
        }
        let two = Cloud::new(1, vec![0.0, 10.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(concentration_function(&two, 1.0), 0.5);
        assert_eq!(concentration_function(&two, 10.0), 1.0);
    }

    #[test]
    fn uniform_counting() {
        let n = 1000;
        let k = 5.0;
        let coords: Vec<f64> = (0..n).map(|i| -k + 2.0 * k * i as f64 / (n - 1) as f64).collect();
        let cloud = Cloud::from_weights(1, coords, &vec![1.0; n]).unwrap();
        for r in [0.1, 0.7, 2.0, 4.9, 5.0] {
            let q = concentration_function(&cloud, r);
            assert!((q - (2.0 * r / (2.0 * k)).min(1.0)).abs() <= 2.0 / n as f64, "R={r}: {q}");
        }
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(Cloud::new(1, vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(Cloud::new(1, vec![0.0], vec![0.5, 0.5]).is_err());
        assert!(Cloud::new(1, vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(MeasureSequence::new(vec![]).is_err());
        let short = synthetic(Family::FixedBump, 4).unwrap();
        assert!(classify(&short, &DEFAULT_RADII, &CcThresholds::default()).is_err());
    }

    #[test]
    fn synthetic_families() {
        let th = CcThresholds::default();
        let cases = [
            (Family::FixedBump, Label::Concentration, 1.0),
            (Family::Spreading, Label::Vanishing, 0.0),
            (Family::SeparatingPair, Label::Splitting, 0.5),
        ];
        for (family, label, alpha) in cases {
            let seq = synthetic(family, 12).unwrap();
            let rep = classify(&seq, &DEFAULT_RADII, &th).unwrap();
            assert_eq!(rep.label, label, "{family:?}");
            assert!((rep.alpha - alpha).abs() < 0.02, "{family:?}: α = {}", rep.alpha);
            for row in &rep.q_table {
                for w in row.windows(2) {
                    assert!(w[1] >= w[0]);
                }
            }
            for (lo, hi) in rep.q_table.iter().zip(&rep.q_upper) {
                for (a, b) in lo.iter().zip(hi) {
                    assert!(b >= a);
                }
            }
            for w in &rep.witnesses {
                assert!((w.mass - rep.alpha).abs() < rep.epsilon);
                if let Some(outer) = w.outer_mass {
                    assert!((outer - (1.0 - rep.alpha)).abs() < 3.0 * rep.epsilon);
                    assert!(w.outer_radius.unwrap() >= w.radius);
                }
            }
        }
    }

    #[test]
    fn translation_invariance() {
        let th = CcThresholds::default();
        let seq = synthetic(Family::SeparatingPair, 10).unwrap();
        let moved = seq.translated(&[3.0, -5.0]).unwrap();
        let a = classify(&seq, &DEFAULT_RADII, &th).unwrap();
        let b = classify(&moved, &DEFAULT_RADII, &th).unwrap();
        assert_eq!(a.q_table, b.q_table);
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.label, b.label);
        for (x, y) in a.witnesses.iter().zip(&b.witnesses) {
            assert_eq!(x.center[0] + 3.0, y.center[0]);
            assert_eq!(x.center[1] - 5.0, y.center[1]);
            assert_eq!(x.mass, y.mass);
        }
    }

    #[test]
    fn csv_round() {
        let text = "k,x,mass\n2,0.0,0.5\n2,10.0,0.5\n1,0.0,1.0\n";
        let seq = MeasureSequence::from_csv(text.as_bytes()).unwrap();
        assert_eq!(seq.dim, 1);
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.entries[0].masses, vec![1.0]);
        assert_eq!(seq.entries[1].coords, vec![0.0, 10.0]);
        assert!(MeasureSequence::from_csv("k,x,mass\n1,a,1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn escaping_shells_concentrate() {
        let g = RadialGrid::new(ModelSpace::exterior(3, 1.0).unwrap(), Some(60.0), 3000).unwrap();
        let iterates: Vec<RadialField> = (0..10)
            .map(|k| RadialField::from_fn(&g, |r| (-(r - 4.0 - 4.0 * k as f64).powi(2)).exp()))
            .collect();
        let rep = minimizer_diagnostic(&iterates, 3.0, Density::Jp, &DEFAULT_RADII, &CcThresholds::default()).unwrap();
        assert_eq!(rep.label, Label::Concentration);
        let centres: Vec<f64> = rep.witnesses.iter().map(|w| w.center[0]).collect();
        assert!(centres.windows(2).all(|w| w[1] > w[0] + 3.0));
        let zero = vec![RadialField::zeros(&g); 8];
        assert!(matches!(
            minimizer_diagnostic(&zero, 3.0, Density::Jp, &DEFAULT_RADII, &CcThresholds::default()),
            Err(Error::Input(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn q_is_monotone_and_saturates(pts in prop::collection::vec((-50.0f64..50.0, 0.01f64..1.0), 1..60)) {
            let coords: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let w: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let cloud = Cloud::from_weights(1, coords, &w).unwrap();
            let radii: Vec<f64> = (0..30).map(|i| i as f64 * 4.0).collect();
            let q: Vec<f64> = radii.iter().map(|&r| concentration_function(&cloud, r)).collect();
            for pair in q.windows(2) {
                prop_assert!(pair[1] >= pair[0]);
            }
            prop_assert_eq!(concentration_function(&cloud, 100.0), 1.0);
        }
    }
}
