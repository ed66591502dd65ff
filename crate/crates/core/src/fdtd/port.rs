use num_complex::Complex64;
use rayon::prelude::*;

use super::config::PulseSpec;
use crate::constants::angular;
use crate::error::{Error, Result};
use crate::spectrum::{FrequencyAxis, Spectrum};

/// Source-side sampling of a lumped port at `t0 + n dt` (half steps).
///
/// `voltage` is across the port gap, `current` flows out of the source into
/// the structure, `source` is the open-circuit source voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct PortRecord {
    pub dt: f64,
    pub t0: f64,
    pub impedance: f64,
    pub pulse: PulseSpec,
    pub voltage: Vec<f64>,
    pub current: Vec<f64>,
    pub source: Vec<f64>,
}

/// Lower limit on the source spectrum relative to its peak (−40 dB).
pub const MIN_SOURCE_LEVEL: f64 = 1e-2;

pub fn dft(series: &[f64], t0: f64, dt: f64, f: f64) -> Complex64 {
    let w = angular(f);
    series
        .iter()
        .enumerate()
        .map(|(n, &x)| Complex64::from_polar(x, -w * (t0 + n as f64 * dt)))
        .sum::<Complex64>()
        * dt
}

impl PortRecord {
    pub fn new(dt: f64, impedance: f64, pulse: PulseSpec) -> Self {
        Self {
            dt,
            t0: 0.5 * dt,
            impedance,
            pulse,
            voltage: Vec::new(),
            current: Vec::new(),
            source: Vec::new(),
        }
    }

    pub fn push(&mut self, v: f64, i: f64, vs: f64) {
        self.voltage.push(v);
        self.current.push(i);
        self.source.push(vs);
    }

    pub fn len(&self) -> usize {
        self.voltage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty()
    }

    /// Incident power wave `(V + Z0 I)/2`, the reference against which reflection is measured.
    pub fn incident(&self) -> Vec<f64> {
        self.voltage
            .iter()
            .zip(&self.current)
            .map(|(v, i)| 0.5 * (v + self.impedance * i))
            .collect()
    }

    pub fn reflected(&self) -> Vec<f64> {
        self.voltage
            .iter()
            .zip(&self.current)
            .map(|(v, i)| 0.5 * (v - self.impedance * i))
            .collect()
    }

    pub fn voltage_phasor(&self, f: f64) -> Complex64 {
        dft(&self.voltage, self.t0, self.dt, f)
    }

    pub fn current_phasor(&self, f: f64) -> Complex64 {
        dft(&self.current, self.t0, self.dt, f)
    }

    /// Time-averaged power into the structure, ½ Re(V I*).
    pub fn accepted_power(&self, f: f64) -> f64 {
        0.5 * (self.voltage_phasor(f) * self.current_phasor(f).conj()).re
    }

    /// Available source power |V + Z0 I|²/(8 Z0).
    pub fn incident_power(&self, f: f64) -> f64 {
        let a = self.voltage_phasor(f) + self.current_phasor(f) * self.impedance;
        a.norm_sqr() / (8.0 * self.impedance)
    }

    fn source_level(&self, f: f64) -> f64 {
        dft(&self.source, self.t0, self.dt, f).norm()
    }

    /// Rejects frequencies where the excitation is more than 40 dB below its peak.
    pub fn check_band(&self, frequencies: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Spectrum("empty port record".into()));
        }
        let peak = self.source_level(self.pulse.f0);
        for &f in frequencies {
            if self.source_level(f) < MIN_SOURCE_LEVEL * peak {
                return Err(Error::Spectrum(format!(
                    "{f:e} Hz lies more than 40 dB below the source spectrum peak"
                )));
            }
        }
        Ok(())
    }
}

/// Port reflection coefficient over `axis`.
pub fn s11_spectrum(record: &PortRecord, axis: FrequencyAxis) -> Result<Spectrum> {
    let freqs = axis.to_vec();
    record.check_band(&freqs)?;
    let z0 = record.impedance;
    let values = freqs
        .par_iter()
        .map(|&f| {
            let v = record.voltage_phasor(f);
            let i = record.current_phasor(f);
            (v - i * z0) / (v + i * z0)
        })
        .collect();
    Spectrum::new(axis, values)
}
