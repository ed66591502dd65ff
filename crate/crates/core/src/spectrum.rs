//! Frequency-indexed complex data on a uniform axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform frequency grid `start + i * step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl FrequencyAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() {
            return Err(Error::NonFinite("frequency axis"));
        }
        if len == 0 {
            return Err(Error::param("frequency axis", "empty axis"));
        }
        if len > 1 && step <= 0.0 {
            return Err(Error::param("frequency axis", "step must be positive"));
        }
        Ok(Self { start, step, len })
    }

    /// Inclusive band `[lo, hi]` sampled every `step`.
    pub fn from_band(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi > lo) || !(step > 0.0) {
            return Err(Error::param("frequency band", format!("need lo < hi and step > 0, got [{lo}, {hi}] step {step}")));
        }
        let len = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Self::new(lo, step, len)
    }

    pub fn at(&self, index: usize) -> f64 {
        self.start + self.step * index as f64
    }

    pub fn stop(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.at(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub axis: FrequencyAxis,
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(axis: FrequencyAxis, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != axis.len {
            return Err(Error::Spectrum(format!(
                "axis has {} points but {} values were given",
                axis.len,
                values.len()
            )));
        }
        Ok(Self { axis, values })
    }

    /// Evaluates `f` at every axis frequency.
    pub fn try_from_fn<F>(axis: FrequencyAxis, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        let values = axis.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Self::new(axis, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.axis.to_vec()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.axis.iter().zip(self.values.iter().copied())
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| to_db(v.norm())).collect()
    }

    /// Wrapped phase in degrees, range (-180, 180].
    pub fn phase_deg(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg().to_degrees()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            axis: self.axis,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Samples with `lo <= f <= hi` (within a millionth of a step).
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Spectrum> {
        let tol = 1e-6 * self.axis.step.abs();
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let f = self.axis.at(i);
                f >= lo - tol && f <= hi + tol
            })
            .collect();
        let (Some(&first), Some(&last)) = (idx.first(), idx.last()) else {
            return Err(Error::param("band", format!("no samples in [{lo:e}, {hi:e}] Hz")));
        };
        let axis = FrequencyAxis::new(self.axis.at(first), self.axis.step, last - first + 1)?;
        Spectrum::new(axis, self.values[first..=last].to_vec())
    }

    pub fn same_axis(&self, other: &Spectrum) -> bool {
        self.axis.len == other.axis.len
            && (self.axis.start - other.axis.start).abs() <= 1e-9 * self.axis.start.abs().max(1.0)
            && (self.axis.step - other.axis.step).abs() <= 1e-9 * self.axis.step.abs().max(1.0)
    }
}

/// 20·log10 of an amplitude.
pub fn to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_keeps_grid() {
        let axis = FrequencyAxis::from_band(1e12, 10e12, 25e9).unwrap();
        let s = Spectrum::try_from_fn(axis, |f| Ok(Complex64::new(f, 0.0))).unwrap();
        let r = s.restricted(6e12, 8e12).unwrap();
        assert_eq!(r.len(), 81);
        assert_eq!(r.values[0].re, r.axis.start);
        assert!((r.axis.stop() - 8e12).abs() < 1.0);
        assert!(s.restricted(20e12, 30e12).is_err());
    }

    #[test]
    fn band_is_inclusive() {
        let axis = FrequencyAxis::from_band(600e9, 900e9, 1e9).unwrap();
        assert_eq!(axis.len, 301);
        assert!((axis.stop() - 900e9).abs() < 1.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let axis = FrequencyAxis::new(1.0, 1.0, 3).unwrap();
        assert!(Spectrum::new(axis, vec![Complex64::new(1.0, 0.0)]).is_err());
    }
}
