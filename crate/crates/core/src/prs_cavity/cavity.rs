//! Fabry–Perot (ray-model) cavity formed by a partially reflecting sheet above a ground.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tmm::{tmm_reflection, Layer, LayerStack, Polarization, Termination};
use crate::constants::C0;
use crate::error::{ensure_finite, Error, Result};
use crate::materials::DielectricSpec;
use crate::spectrum::{FrequencyAxis, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub z_s: f64,
    pub phi_prs: f64,
    pub phi_ground: f64,
    pub order: u32,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_s > 0.0) {
            return Err(Error::param("z_s", "separation must be positive"));
        }
        for (name, phi) in [("phi_prs", self.phi_prs), ("phi_ground", self.phi_ground)] {
            if !(phi > -PI && phi <= PI) {
                return Err(Error::param(name, "phase must lie in (-π, π]"));
            }
        }
        Ok(())
    }
}

/// Resonant separation `z = (φ_prs + φ_ground) λ/(4π) + N λ/2`, lifted by λ/2
/// when the zeroth order is not positive.
pub fn cavity_height(phi_prs: f64, phi_ground: f64, f: f64, order: u32) -> Result<f64> {
    ensure_finite("phi_prs", phi_prs)?;
    ensure_finite("phi_ground", phi_ground)?;
    ensure_finite("frequency", f)?;
    if f <= 0.0 {
        return Err(Error::param("frequency", "must be positive"));
    }
    let lambda = C0 / f;
    let mut z = (phi_prs + phi_ground) * lambda / (4.0 * PI) + order as f64 * lambda / 2.0;
    while z <= 0.0 {
        z += lambda / 2.0;
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectivityEnhancement {
    pub linear: f64,
    pub db: f64,
}

/// Broadside enhancement `(1 + |Γ|)/(1 − |Γ|)` of the ray model.
pub fn trentini_directivity(gamma_mag: f64) -> Result<DirectivityEnhancement> {
    ensure_finite("gamma_mag", gamma_mag)?;
    if !(0.0..1.0).contains(&gamma_mag) {
        return Err(Error::param("gamma_mag", format!("must satisfy 0 <= |Γ| < 1, got {gamma_mag}")));
    }
    // Carry the rounding errors of 1 ± |Γ| so the quotient is correctly rounded.
    let (num, den) = (1.0 + gamma_mag, 1.0 - gamma_mag);
    let (num_lo, den_lo) = ((1.0 - num) + gamma_mag, (1.0 - den) - gamma_mag);
    let q = num / den;
    let rem = (-q).mul_add(den, num) + num_lo - q * den_lo;
    let linear = q + rem / den;
    Ok(DirectivityEnhancement {
        linear,
        db: 10.0 * linear.log10(),
    })
}

/// One-dimensional cavity: PRS layers (listed from the outside inward), an
/// air gap of height `z_s`, then the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityModel {
    pub prs_layers: Vec<Layer>,
    pub gap: DielectricSpec,
    pub ground: Termination,
    #[serde(default)]
    pub polarization: Polarization,
}

impl CavityModel {
    pub fn new(prs_layers: Vec<Layer>) -> Self {
        Self {
            prs_layers,
            gap: DielectricSpec::VACUUM,
            ground: Termination::Pec,
            polarization: Polarization::Te,
        }
    }

    pub fn stack(&self, z_s: f64) -> Result<LayerStack> {
        ensure_finite("z_s", z_s)?;
        if z_s <= 0.0 {
            return Err(Error::param("z_s", "separation must be positive"));
        }
        let mut layers = self.prs_layers.clone();
        layers.push(Layer::slab(z_s, self.gap));
        LayerStack::new(DielectricSpec::VACUUM, layers, self.ground)
    }

    /// PRS reflection seen from inside the cavity.
    pub fn prs_reflection_inside(&self, f: f64) -> Result<num_complex::Complex64> {
        let stack = LayerStack::new(
            self.gap,
            self.prs_layers.iter().rev().copied().collect(),
            Termination::HalfSpace(DielectricSpec::VACUUM),
        )?;
        tmm_reflection(&stack, f, self.polarization, 0.0)
    }

    pub fn input_reflection(&self, z_s: f64, axis: FrequencyAxis) -> Result<Spectrum> {
        let stack = self.stack(z_s)?;
        Spectrum::try_from_fn(axis, |f| tmm_reflection(&stack, f, self.polarization, 0.0))
    }
}

/// Input reflection of the cavity for every separation, in input order.
///
/// Entries are independent; the result does not depend on evaluation order.
pub fn sweep_cavity(model: &CavityModel, separations: &[f64], axis: FrequencyAxis) -> Result<Vec<Spectrum>> {
    separations
        .par_iter()
        .map(|&z| model.input_reflection(z, axis))
        .collect()
}
