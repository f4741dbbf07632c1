//! Complex sound pressure sampled at grid points for several frequencies.
//!
//! Values are stored frequency-major: `values[f * num_points + i]`.
//! CSV layout: header `freqHz,pointIndex,re,im`, one row per sample in
//! storage order. Floats are written in shortest round-trip form, so a
//! write/read cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub frequencies: Vec<f64>,
    pub num_points: usize,
    pub values: Vec<Complex64>,
}

pub const FIELD_CSV_HEADER: &str = "freqHz,pointIndex,re,im";

impl PressureField {
    pub fn zeros(frequencies: Vec<f64>, num_points: usize) -> Self {
        let n = frequencies.len() * num_points;
        Self { frequencies, num_points, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_rows(frequencies: Vec<f64>, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.len() != frequencies.len() {
            return Err(Error::Misaligned(format!(
                "{} frequency rows for {} frequencies",
                rows.len(),
                frequencies.len()
            )));
        }
        let num_points = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != num_points) {
            return Err(Error::Misaligned("rows have different lengths".into()));
        }
        Ok(Self { frequencies, num_points, values: rows.concat() })
    }

    pub fn num_frequencies(&self) -> usize {
        self.frequencies.len()
    }

    #[inline]
    pub fn get(&self, freq_index: usize, point: usize) -> Complex64 {
        self.values[freq_index * self.num_points + point]
    }

    #[inline]
    pub fn set(&mut self, freq_index: usize, point: usize, v: Complex64) {
        self.values[freq_index * self.num_points + point] = v;
    }

    pub fn row(&self, freq_index: usize) -> &[Complex64] {
        &self.values[freq_index * self.num_points..(freq_index + 1) * self.num_points]
    }

    pub fn row_mut(&mut self, freq_index: usize) -> &mut [Complex64] {
        &mut self.values[freq_index * self.num_points..(freq_index + 1) * self.num_points]
    }

    /// Fails unless both fields share frequencies (exactly) and point count.
    pub fn check_aligned(&self, other: &PressureField) -> Result<()> {
        if self.num_points != other.num_points {
            return Err(Error::Misaligned(format!(
                "{} vs {} points",
                self.num_points, other.num_points
            )));
        }
        if self.frequencies != other.frequencies {
            return Err(Error::Misaligned(format!(
                "frequencies {:?} vs {:?}",
                self.frequencies, other.frequencies
            )));
        }
        Ok(())
    }

    /// Restriction to the listed frequencies (by index).
    pub fn select_frequencies(&self, indices: &[usize]) -> PressureField {
        let rows = indices.iter().map(|&f| self.row(f).to_vec()).collect();
        PressureField::from_rows(indices.iter().map(|&f| self.frequencies[f]).collect(), rows)
            .expect("rows share a length")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 48 + 32);
        s.push_str(FIELD_CSV_HEADER);
        s.push('\n');
        for (fi, f) in self.frequencies.iter().enumerate() {
            for i in 0..self.num_points {
                let v = self.get(fi, i);
                let _ = writeln!(s, "{f},{i},{},{}", v.re, v.im);
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == FIELD_CSV_HEADER => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header '{FIELD_CSV_HEADER}'"),
                })
            }
        }
        let mut frequencies: Vec<f64> = Vec::new();
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (ln, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse { line: ln + 1, message: m.to_string() };
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(err("expected 4 columns"));
            }
            let f: f64 = parts[0].parse().map_err(|_| err("bad frequency"))?;
            let i: usize = parts[1].parse().map_err(|_| err("bad point index"))?;
            let re: f64 = parts[2].parse().map_err(|_| err("bad real part"))?;
            let im: f64 = parts[3].parse().map_err(|_| err("bad imaginary part"))?;
            if frequencies.last() != Some(&f) {
                frequencies.push(f);
                rows.push(Vec::new());
            }
            let row = rows.last_mut().unwrap();
            if i != row.len() {
                return Err(err("point indices must be consecutive from 0"));
            }
            row.push(Complex64::new(re, im));
        }
        PressureField::from_rows(frequencies, rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            vec![Complex64::new(0.1, -1e-300), Complex64::new(1.0 / 3.0, 2.5e17)],
            vec![Complex64::new(-0.0, 7.0), Complex64::new(f64::MIN_POSITIVE, -2.0)],
        ];
        let f = PressureField::from_rows(vec![500.0, 1234.5], rows).unwrap();
        let back = PressureField::from_csv(&f.to_csv()).unwrap();
        assert_eq!(f, back);
        assert_eq!(back.get(1, 0), Complex64::new(-0.0, 7.0));
    }

    #[test]
    fn misaligned_fields() {
        let a = PressureField::zeros(vec![1.0, 2.0], 3);
        let b = PressureField::zeros(vec![1.0, 2.0], 4);
        let c = PressureField::zeros(vec![1.0, 3.0], 3);
        assert!(a.check_aligned(&b).is_err());
        assert!(a.check_aligned(&c).is_err());
        assert!(a.check_aligned(&a.clone()).is_ok());
        assert!(PressureField::from_rows(vec![1.0], vec![vec![], vec![]]).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(PressureField::from_csv("a,b\n").is_err());
        let bad = format!("{FIELD_CSV_HEADER}\n100,1,0,0\n");
        assert!(matches!(PressureField::from_csv(&bad), Err(Error::Parse { line: 2, .. })));
    }
}
