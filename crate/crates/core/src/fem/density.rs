//! Per-element relative density grids and their text file format.
//!
//! File layout: a header line `nx ny`, followed by `ny` lines of `nx`
//! whitespace-separated values. Line `j` (0-based after the header) holds
//! element row `j`, counted from the bottom of the grid, so the values are in
//! the same row-major order as [`DensityField::values`]. Values are written in
//! shortest round-trip form, so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "density grid {nx}x{ny} needs {} values, got {}",
                nx * ny,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::DomainError(format!("density {v} outside [0, 1]")));
        }
        Ok(Self { nx, ny, values })
    }

    pub fn uniform(nx: usize, ny: usize, rho: f64) -> Result<Self> {
        Self::new(nx, ny, vec![rho; nx * ny])
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(i, j));
            }
        }
        Self::new(nx, ny, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.nx, self.ny);
        for j in 0..self.ny {
            let row = &self.values[j * self.nx..(j + 1) * self.nx];
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let nx = next_usize("nx")?;
        let ny = next_usize("ny")?;
        let values = text
            .split_whitespace()
            .skip(2)
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad density '{t}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nx, ny, values)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_range_and_size() {
        assert!(DensityField::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DensityField::new(1, 2, vec![0.5, 1.2]).is_err());
        assert!(DensityField::uniform(3, 2, 0.5).is_ok());
    }

    #[test]
    fn text_layout() {
        let d = DensityField::new(2, 2, vec![0.0, 0.25, 1.0, 0.5]).unwrap();
        assert_eq!(d.to_text(), "2 2\n0.0 0.25\n1.0 0.5\n");
    }

    #[test]
    fn parse_errors() {
        assert!(DensityField::from_text("2").is_err());
        assert!(DensityField::from_text("1 1\nabc").is_err());
        assert!(DensityField::from_text("1 2\n0.5").is_err());
    }

    proptest::proptest! {
        #[test]
        fn text_round_trip_is_lossless(nx in 1usize..6, ny in 1usize..6, seed in proptest::collection::vec(0.0f64..=1.0, 36)) {
            let d = DensityField::from_fn(nx, ny, |i, j| seed[(j * nx + i) % seed.len()]).unwrap();
            let back = DensityField::from_text(&d.to_text()).unwrap();
            proptest::prop_assert_eq!(back, d);
        }
    }
}
