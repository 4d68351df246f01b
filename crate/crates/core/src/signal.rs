use crate::error::{CoreError, Result};
use num_complex::Complex64;
use std::io::{BufRead, Write};

/// Complex-valued function on the dyadic grid of `[0,1)` at resolution `N`:
/// one value per cell `[i 2^-N, (i+1) 2^-N)`, `0 <= i < 2^N`.
///
/// All integrals are with respect to Lebesgue measure, so sums over cells
/// carry the weight `2^-N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    resolution: u32,
    values: Vec<Complex64>,
}

impl GridSignal {
    /// Builds a signal from raw cell values; the length fixes the resolution.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        let m = values.len();
        if m == 0 || !m.is_power_of_two() {
            return Err(CoreError::InvalidParameter(format!(
                "signal length must be a positive power of two, got {m}"
            )));
        }
        Ok(Self {
            resolution: m.trailing_zeros(),
            values,
        })
    }

    /// The zero signal at resolution `n`.
    pub fn zero(n: u32) -> Self {
        Self {
            resolution: n,
            values: vec![Complex64::ZERO; 1usize << n],
        }
    }

    /// Builds a signal by evaluating `f` on each cell index.
    pub fn from_fn(n: u32, f: impl Fn(usize) -> Complex64) -> Self {
        Self {
            resolution: n,
            values: (0..1usize << n).map(f).collect(),
        }
    }

    /// Real-valued convenience constructor.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_values(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of grid cells, `2^N`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Measure of one grid cell, `2^-N`.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.len() as f64
    }

    pub fn check_same_resolution(&self, other: &Self) -> Result<()> {
        if self.resolution != other.resolution {
            return Err(CoreError::ResolutionMismatch {
                left: self.resolution,
                right: other.resolution,
            });
        }
        Ok(())
    }

    /// `L^2` inner product `∫ f conj(g)`, i.e. `2^-N Σ_i f_i conj(g_i)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_resolution(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.cell_measure())
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (s * self.cell_measure()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Cellwise magnitudes as a real vector.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_resolution(other)?;
        Ok(Self {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_resolution(other)?;
        Ok(Self {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            resolution: self.resolution,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Writes `index,re,im` rows; 17 significant digits so values round-trip.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,re,im")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv).
    /// Rows must cover exactly the indices `0..2^N` in order.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(CoreError::Csv(format!(
                    "line {}: expected index,re,im, got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let idx: usize = fields[0]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad index: {e}", lineno + 1)))?;
            if idx != values.len() {
                return Err(CoreError::Csv(format!(
                    "line {}: index {} out of order (expected {})",
                    lineno + 1,
                    idx,
                    values.len()
                )));
            }
            let re: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad re: {e}", lineno + 1)))?;
            let im: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|e| CoreError::Csv(format!("line {}: bad im: {e}", lineno + 1)))?;
            values.push(Complex64::new(re, im));
        }
        Self::from_values(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rejects_bad_lengths() {
        assert!(GridSignal::from_real(&[]).is_err());
        assert!(GridSignal::from_real(&[1.0, 2.0, 3.0]).is_err());
        assert!(GridSignal::from_real(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn inner_product_carries_cell_measure() {
        let f = GridSignal::from_real(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let ip = f.inner(&f).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-15);
        assert!(ip.im.abs() < 1e-15);
        assert!((f.l2_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resolution_mismatch_is_an_error() {
        let f = GridSignal::zero(2);
        let g = GridSignal::zero(3);
        assert!(f.inner(&g).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = GridSignal::from_values(vec![
            Complex64::new(1.0 / 3.0, -2.0e-17),
            Complex64::new(f64::MIN_POSITIVE, 1e300),
            Complex64::new(-0.1234567890123456, 7.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = GridSignal::read_csv(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_rejects_out_of_order_rows() {
        let text = "index,re,im\n1,0.0,0.0\n0,0.0,0.0\n";
        assert!(GridSignal::read_csv(text.as_bytes()).is_err());
    }
}
