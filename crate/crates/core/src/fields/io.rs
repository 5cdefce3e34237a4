//! CSV and JSON serialization of radial fields.
//!
//! CSV has a header `r,u` and one row per node, printed with 17 significant
//! digits so every value round-trips bit for bit. JSON carries the grid
//! descriptor alongside the values.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::RadialField;
use super::grid::{GridSpec, RadialGrid};
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl RadialField {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u"])?;
        for (r, u) in self.grid.nodes.iter().zip(&self.values) {
            w.write_record([fmt_f64(*r), fmt_f64(*u)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Reads a CSV written by [`RadialField::write_csv`] onto `grid`. The
    /// radii must match the grid nodes.
    pub fn read_csv<R: Read>(grid: &Arc<RadialGrid>, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut values = Vec::with_capacity(grid.m);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Input(format!("row {i}: expected 2 columns")));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("row {i}: {e}")))
            };
            let r = parse(&rec[0])?;
            let u = parse(&rec[1])?;
            let node = *grid
                .nodes
                .get(i)
                .ok_or_else(|| Error::Shape(format!("csv has more rows than the {} grid nodes", grid.m)))?;
            if (r - node).abs() > 1e-12 * node.abs().max(1.0) {
                return Err(Error::Shape(format!("row {i}: radius {r} is not grid node {node}")));
            }
            values.push(u);
        }
        RadialField::new(Arc::clone(grid), values)
    }

    pub fn to_json(&self) -> FieldJson {
        FieldJson {
            grid: self.grid.spec(),
            values: self.values.clone(),
        }
    }

    pub fn from_json(doc: &FieldJson) -> Result<Self> {
        let grid = RadialGrid::from_spec(&doc.grid)?;
        RadialField::new(grid, doc.values.clone())
    }
}

impl Serialize for RadialField {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FieldRef {
            grid: self.grid.spec(),
            values: &self.values,
        }
        .serialize(serializer)
    }
}

#[derive(Serialize)]
struct FieldRef<'a> {
    grid: GridSpec,
    values: &'a [f64],
}

/// JSON form of a field: grid descriptor plus the value array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldJson {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::ModelSpace;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_and_json_round_trip_bit_exact(vals in proptest::collection::vec(-1e300f64..1e300, 17), scale in -30i32..30) {
            let grid = RadialGrid::new(ModelSpace::hyperbolic(2).unwrap(), Some(7.3), 17).unwrap();
            let values: Vec<f64> = vals.iter().map(|v| v * 1e-280 * 10f64.powi(scale)).collect();
            let u = RadialField::new(grid.clone(), values).unwrap();
            let back = RadialField::read_csv(&grid, u.to_csv_string().as_bytes()).unwrap();
            for (a, b) in u.values.iter().zip(&back.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let json = serde_json::to_string(&u.to_json()).unwrap();
            let doc: FieldJson = serde_json::from_str(&json).unwrap();
            let again = RadialField::from_json(&doc).unwrap();
            prop_assert!(again.same_grid(&u));
            for (a, b) in u.values.iter().zip(&again.values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn csv_rejects_foreign_grid() {
        let g1 = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(5.0), 10).unwrap();
        let g2 = RadialGrid::new(ModelSpace::euclidean(2).unwrap(), Some(6.0), 10).unwrap();
        let u = RadialField::from_fn(&g1, |r| (-r).exp());
        assert!(matches!(RadialField::read_csv(&g2, u.to_csv_string().as_bytes()), Err(Error::Shape(_))));
        assert!(RadialField::read_csv(&g1, "r,u\n0.25,abc\n".as_bytes()).is_err());
    }
}
