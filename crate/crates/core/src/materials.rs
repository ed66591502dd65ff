//! Material models: lossy dielectrics, thin metal sheets, and intraband graphene.
//!
//! Graphene and copper are both treated as zero-thickness sheets characterised
//! by a surface conductivity. Graphene follows the intraband (Drude-like) Kubo
//! term, which in the time domain becomes a first-order auxiliary differential
//! equation for the sheet current.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{angular, BOLTZMANN, ELEMENTARY_CHARGE, EPS0, HBAR};
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DielectricSpec {
    pub eps_r: f64,
    pub tan_delta: f64,
}

impl DielectricSpec {
    pub const VACUUM: DielectricSpec = DielectricSpec {
        eps_r: 1.0,
        tan_delta: 0.0,
    };
    /// Rogers RT/duroid 6010 (patch substrate).
    pub const RT6010: DielectricSpec = DielectricSpec {
        eps_r: 10.2,
        tan_delta: 0.0023,
    };
    /// Rogers RT/duroid 5880 (PRS substrate).
    pub const RT5880: DielectricSpec = DielectricSpec {
        eps_r: 2.2,
        tan_delta: 0.0009,
    };

    pub fn new(eps_r: f64, tan_delta: f64) -> Result<Self> {
        let spec = Self { eps_r, tan_delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lossless(eps_r: f64) -> Result<Self> {
        Self::new(eps_r, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("eps_r", self.eps_r)?;
        ensure_finite("tan_delta", self.tan_delta)?;
        if self.eps_r < 1.0 {
            return Err(Error::param("eps_r", format!("must be >= 1, got {}", self.eps_r)));
        }
        if self.tan_delta < 0.0 {
            return Err(Error::param("tan_delta", format!("must be >= 0, got {}", self.tan_delta)));
        }
        Ok(())
    }

    /// Complex relative permittivity `eps_r (1 - j tan_delta)` (e^{+jωt}).
    pub fn complex_permittivity(&self) -> Complex64 {
        Complex64::new(self.eps_r, -self.eps_r * self.tan_delta)
    }

    /// Equivalent frequency-independent conductivity pinned at `design_frequency`.
    pub fn equivalent_conductivity(&self, design_frequency: f64) -> f64 {
        angular(design_frequency) * EPS0 * self.eps_r * self.tan_delta
    }

    pub fn is_lossless(&self) -> bool {
        self.tan_delta == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrapheneSpec {
    /// Chemical potential in eV.
    pub mu_c: f64,
    /// Momentum relaxation time in seconds.
    pub tau: f64,
    /// Temperature in kelvin.
    pub temperature: f64,
}

impl Default for GrapheneSpec {
    fn default() -> Self {
        Self {
            mu_c: 0.5,
            tau: 1e-12,
            temperature: 300.0,
        }
    }
}

impl GrapheneSpec {
    pub fn new(mu_c: f64, tau: f64, temperature: f64) -> Result<Self> {
        let spec = Self {
            mu_c,
            tau,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("mu_c", self.mu_c)?;
        ensure_finite("tau", self.tau)?;
        ensure_finite("temperature", self.temperature)?;
        if self.tau <= 0.0 {
            return Err(Error::param("tau", "relaxation time must be positive"));
        }
        if self.temperature <= 0.0 {
            return Err(Error::param("temperature", "must be positive"));
        }
        Ok(())
    }

    /// Zero-frequency sheet conductivity (S).
    pub fn dc_conductivity(&self) -> f64 {
        let kt = BOLTZMANN * self.temperature;
        let x = self.mu_c * ELEMENTARY_CHARGE / (2.0 * kt);
        ELEMENTARY_CHARGE.powi(2) * kt * self.tau / (PI * HBAR.powi(2)) * 2.0 * ln_two_cosh(x)
    }

    /// Drude weight `sigma_dc / tau` (S/s); finite as tau grows without bound.
    pub fn drude_weight(&self) -> f64 {
        self.dc_conductivity() / self.tau
    }
}

/// `ln(2 cosh x)` without overflow for large |x|.
fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorSheetSpec {
    /// Bulk conductivity (S/m).
    pub sigma_dc: f64,
    /// Physical thickness (m).
    pub thickness: f64,
}

impl ConductorSheetSpec {
    /// Annealed copper, 5 µm.
    pub const ANNEALED_COPPER_5UM: ConductorSheetSpec = ConductorSheetSpec {
        sigma_dc: 5.8e7,
        thickness: 5e-6,
    };

    pub fn new(sigma_dc: f64, thickness: f64) -> Result<Self> {
        let spec = Self { sigma_dc, thickness };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("sigma_dc", self.sigma_dc)?;
        ensure_finite("thickness", self.thickness)?;
        if self.sigma_dc <= 0.0 {
            return Err(Error::param("sigma_dc", "must be positive"));
        }
        if self.thickness <= 0.0 {
            return Err(Error::param("thickness", "must be positive"));
        }
        Ok(())
    }

    /// Sheet conductance `sigma_dc * t` (S).
    pub fn sheet_conductance(&self) -> f64 {
        self.sigma_dc * self.thickness
    }
}

/// Any material the toolkit knows how to place in a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialSpec {
    Dielectric(DielectricSpec),
    Graphene(GrapheneSpec),
    ConductorSheet(ConductorSheetSpec),
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MaterialSpec::Dielectric(d) => d.validate(),
            MaterialSpec::Graphene(g) => g.validate(),
            MaterialSpec::ConductorSheet(c) => c.validate(),
        }
    }

    pub fn is_sheet(&self) -> bool {
        !matches!(self, MaterialSpec::Dielectric(_))
    }

    /// Surface conductivity of sheet materials at `f`; `None` for dielectrics.
    pub fn sheet_conductivity(&self, f: f64) -> Option<Result<Complex64>> {
        match self {
            MaterialSpec::Dielectric(_) => None,
            MaterialSpec::Graphene(g) => Some(graphene_sigma(g, f)),
            MaterialSpec::ConductorSheet(c) => Some(Ok(Complex64::new(c.sheet_conductance(), 0.0))),
        }
    }
}

/// Intraband graphene surface conductivity at frequency `f` (Hz), e^{+jωt}.
///
/// `sigma(ω) = sigma_dc / (1 + jωτ)`. Negative frequencies are accepted and
/// return the conjugate of the positive-frequency value.
pub fn graphene_sigma(spec: &GrapheneSpec, f: f64) -> Result<Complex64> {
    ensure_finite("frequency", f)?;
    spec.validate()?;
    let omega_tau = angular(f) * spec.tau;
    Ok(spec.dc_conductivity() / Complex64::new(1.0, omega_tau))
}

/// Coefficients of the time-stepped sheet-current recursion
/// `J[n+1] = decay * J[n] + drive * (E[n+1] + E[n])`.
///
/// The recursion is the trapezoidal discretisation of `τ dJ/dt + J = sigma_dc E`,
/// which is unconditionally stable when coupled semi-implicitly to the field
/// update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdeCoefficients {
    pub decay: f64,
    pub drive: f64,
}

impl AdeCoefficients {
    /// Coefficients for a fixed drude weight `d` (S/s) and damping rate `gamma = 1/τ`.
    ///
    /// `gamma = 0` is the lossless limit where the update is a pure
    /// trapezoidal integrator of `d * E`.
    pub fn from_drude(d: f64, gamma: f64, dt: f64) -> Self {
        let half = 0.5 * gamma * dt;
        Self {
            decay: (1.0 - half) / (1.0 + half),
            drive: 0.5 * d * dt / (1.0 + half),
        }
    }

    pub fn step(&self, current: f64, e_prev: f64, e_next: f64) -> f64 {
        self.decay * current + self.drive * (e_next + e_prev)
    }

    /// Exact discrete steady-state admittance J/E at frequency `f` for step `dt`.
    pub fn discrete_response(&self, f: f64, dt: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, angular(f) * dt);
        self.drive * (z + 1.0) / (z - self.decay)
    }
}

pub fn drude_ade_coefficients(spec: &GrapheneSpec, dt: f64) -> Result<AdeCoefficients> {
    spec.validate()?;
    ensure_finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::param("dt", "time step must be positive"));
    }
    if dt >= spec.tau {
        return Err(Error::param(
            "dt",
            format!("time step {dt:e} s does not resolve relaxation time {:e} s", spec.tau),
        ));
    }
    Ok(AdeCoefficients::from_drude(spec.drude_weight(), 1.0 / spec.tau, dt))
}

/// Drives the recursion with a sampled field and returns the current samples,
/// colocated in time with the field.
pub fn drive_sheet_current(coeffs: &AdeCoefficients, field: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(field.len());
    let mut j = 0.0;
    let mut e_prev = 0.0;
    for &e in field {
        j = coeffs.step(j, e_prev, e);
        e_prev = e;
        out.push(j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn static_limit_is_real() {
        let s = graphene_sigma(&GrapheneSpec::default(), 0.0).unwrap();
        assert_eq!(s.im, 0.0);
        assert!(s.re > 0.0);
    }

    #[test]
    fn phase_follows_relaxation_time() {
        let s = graphene_sigma(&GrapheneSpec::default(), 800e9).unwrap();
        let expected = -(2.0 * PI * 8e11 * 1e-12f64).atan();
        assert_relative_eq!(s.arg(), expected, epsilon = 1e-14);
        assert_relative_eq!(s.arg().to_degrees(), -78.7, epsilon = 0.05);
    }

    #[test]
    fn regression_value_at_800ghz() {
        // mpmath, 40 digits, CODATA 2018 constants.
        let s = graphene_sigma(&GrapheneSpec::default(), 800e9).unwrap();
        assert_relative_eq!(s.re, 0.002_240_794_114_515_171, max_relative = 1e-12);
        assert_relative_eq!(s.im, -0.011_263_459_725_388_97, max_relative = 1e-12);
        assert_relative_eq!(
            GrapheneSpec::default().dc_conductivity(),
            0.058_857_117_838_173_58,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(graphene_sigma(&GrapheneSpec::default(), f64::NAN).is_err());
        assert!(GrapheneSpec::new(0.5, 0.0, 300.0).is_err());
        assert!(GrapheneSpec::new(0.5, 1e-12, -1.0).is_err());
        assert!(DielectricSpec::new(0.5, 0.0).is_err());
        assert!(DielectricSpec::new(2.0, -0.1).is_err());
        assert!(ConductorSheetSpec::new(0.0, 1e-6).is_err());
    }

    #[test]
    fn ade_rejects_under_resolved_step() {
        let g = GrapheneSpec::default();
        assert!(drude_ade_coefficients(&g, g.tau).is_err());
        assert!(drude_ade_coefficients(&g, 0.0).is_err());
    }

    #[test]
    fn lossless_limit_is_integrator() {
        let dt = 1e-16;
        let d = 5e10;
        let c = AdeCoefficients::from_drude(d, 0.0, dt);
        assert_eq!(c.decay, 1.0);
        assert_relative_eq!(c.drive, 0.5 * d * dt);
        // Long relaxation times approach the same limit.
        let g = GrapheneSpec::new(0.5, 1e3, 300.0).unwrap();
        let c = drude_ade_coefficients(&g, dt).unwrap();
        assert_relative_eq!(c.decay, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.drive, 0.5 * g.drude_weight() * dt, max_relative = 1e-15);
    }

    #[test]
    fn zero_field_gives_zero_current() {
        let c = drude_ade_coefficients(&GrapheneSpec::default(), 1e-16).unwrap();
        assert!(drive_sheet_current(&c, &[0.0; 1000]).iter().all(|&j| j == 0.0));
    }

    #[test]
    fn dielectric_conductivity_at_design_frequency() {
        let s = DielectricSpec::RT6010.equivalent_conductivity(800e9);
        assert_relative_eq!(s, 2.0 * PI * 800e9 * EPS0 * 10.2 * 0.0023, max_relative = 1e-15);
    }
}
