//! Closed-form rectangular microstrip patch sizing.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::C0;
use crate::error::{ensure_finite, Error, Result};
use crate::geometry::PatchGeometry;
use crate::materials::graphene_sigma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignInputs {
    /// Target resonance (Hz).
    pub f_r: f64,
    pub eps_r: f64,
    /// Substrate thickness (m).
    pub h: f64,
    /// Feed-line impedance to match (Ω).
    pub z0: f64,
    /// Radiating-edge resistance (Ω).
    #[serde(default = "default_edge_resistance")]
    pub r_edge: f64,
}

fn default_edge_resistance() -> f64 {
    240.0
}

impl Default for DesignInputs {
    fn default() -> Self {
        Self {
            f_r: 800e9,
            eps_r: 10.2,
            h: 45e-6,
            z0: 50.0,
            r_edge: default_edge_resistance(),
        }
    }
}

impl DesignInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_r", self.f_r),
            ("eps_r", self.eps_r),
            ("h", self.h),
            ("z0", self.z0),
            ("r_edge", self.r_edge),
        ] {
            ensure_finite(name, v)?;
        }
        if self.f_r <= 0.0 {
            return Err(Error::param("f_r", format!("must be positive, got {}", self.f_r)));
        }
        if self.eps_r < 1.0 {
            return Err(Error::param("eps_r", "must be >= 1"));
        }
        if self.h <= 0.0 {
            return Err(Error::param("h", "must be positive"));
        }
        if self.z0 <= 0.0 {
            return Err(Error::param("z0", "must be positive"));
        }
        if self.r_edge <= 0.0 {
            return Err(Error::param("r_edge", "must be positive"));
        }
        Ok(())
    }
}

/// First-order design produced from [`DesignInputs`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchDesign {
    pub width: f64,
    pub eps_eff: f64,
    pub fringe_extension: f64,
    pub length: f64,
    pub inset_depth: f64,
}

pub fn design(inputs: &DesignInputs) -> Result<PatchDesign> {
    inputs.validate()?;
    let width = patch_width(inputs.f_r, inputs.eps_r)?;
    let eps_eff = effective_permittivity(inputs.eps_r, inputs.h, width)?;
    let fringe_extension = fringe_extension(eps_eff, inputs.h, width)?;
    let length = patch_length(inputs.f_r, eps_eff, inputs.h, width)?;
    let inset_depth = inset_depth(length, inputs.r_edge, inputs.z0)?;
    Ok(PatchDesign {
        width,
        eps_eff,
        fringe_extension,
        length,
        inset_depth,
    })
}

/// `W = c / (2 f_r) * sqrt(2 / (eps_r + 1))`.
pub fn patch_width(f_r: f64, eps_r: f64) -> Result<f64> {
    ensure_finite("f_r", f_r)?;
    ensure_finite("eps_r", eps_r)?;
    if f_r <= 0.0 {
        return Err(Error::param("f_r", format!("must be positive, got {f_r}")));
    }
    if eps_r < 1.0 {
        return Err(Error::param("eps_r", "must be >= 1"));
    }
    Ok(C0 / (2.0 * f_r) * (2.0 / (eps_r + 1.0)).sqrt())
}

/// Hammerstad quasi-static effective permittivity of a strip of width `w`.
pub fn effective_permittivity(eps_r: f64, h: f64, w: f64) -> Result<f64> {
    ensure_finite("eps_r", eps_r)?;
    if !(h > 0.0) || !(w > 0.0) {
        return Err(Error::param("h/w", "substrate thickness and width must be positive"));
    }
    if eps_r < 1.0 {
        return Err(Error::param("eps_r", "must be >= 1"));
    }
    Ok((eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / (1.0 + 12.0 * h / w).sqrt())
}

/// Open-end fringing extension ΔL of each radiating edge.
pub fn fringe_extension(eps_eff: f64, h: f64, w: f64) -> Result<f64> {
    if !(h > 0.0) || !(w > 0.0) {
        return Err(Error::param("h/w", "substrate thickness and width must be positive"));
    }
    if !(eps_eff >= 1.0) {
        return Err(Error::param("eps_eff", "must be >= 1"));
    }
    let u = w / h;
    Ok(0.412 * h * (eps_eff + 0.3) * (u + 0.264) / ((eps_eff - 0.258) * (u + 0.8)))
}

pub fn patch_length(f_r: f64, eps_eff: f64, h: f64, w: f64) -> Result<f64> {
    let dl = fringe_extension(eps_eff, h, w)?;
    patch_length_with_extension(f_r, eps_eff, dl)
}

/// `L = c / (2 f_r sqrt(eps_eff)) - 2 ΔL` for an explicit extension.
pub fn patch_length_with_extension(f_r: f64, eps_eff: f64, extension: f64) -> Result<f64> {
    ensure_finite("f_r", f_r)?;
    if f_r <= 0.0 {
        return Err(Error::param("f_r", "must be positive"));
    }
    if !(eps_eff >= 1.0) {
        return Err(Error::param("eps_eff", "must be >= 1"));
    }
    if !(extension >= 0.0) {
        return Err(Error::param("extension", "must be non-negative"));
    }
    let half_wave = C0 / (2.0 * f_r * eps_eff.sqrt());
    if extension >= half_wave / 2.0 {
        return Err(Error::param(
            "h",
            format!(
                "fringing extension {extension:e} m consumes the half-wave length {half_wave:e} m"
            ),
        ));
    }
    Ok(half_wave - 2.0 * extension)
}

/// Inset depth `y0` where `r_edge cos²(π y0 / L) = z0`.
pub fn inset_depth(length: f64, r_edge: f64, z0: f64) -> Result<f64> {
    ensure_finite("length", length)?;
    if length <= 0.0 {
        return Err(Error::param("length", "must be positive"));
    }
    if !(z0 > 0.0) {
        return Err(Error::param("z0", "must be positive"));
    }
    if z0 > r_edge {
        return Err(Error::param(
            "z0",
            format!("{z0} Ω exceeds the edge resistance {r_edge} Ω; no inset position matches"),
        ));
    }
    Ok(length / PI * (z0 / r_edge).sqrt().acos())
}

/// Input resistance at inset depth `y0`.
pub fn inset_resistance(length: f64, r_edge: f64, y0: f64) -> f64 {
    r_edge * (PI * y0 / length).cos().powi(2)
}

/// Hammerstad-Wheeler characteristic impedance of a perfectly conducting strip.
pub fn microstrip_impedance(eps_r: f64, h: f64, w: f64) -> Result<f64> {
    let ee = effective_permittivity(eps_r, h, w)?;
    let u = w / h;
    let z = if u <= 1.0 {
        60.0 / ee.sqrt() * (8.0 / u + u / 4.0).ln()
    } else {
        120.0 * PI / (ee.sqrt() * (u + 1.393 + 0.667 * (u + 1.444).ln()))
    };
    Ok(z)
}

/// Characteristic impedance of a strip with surface impedance `zs` (Ω/sq).
///
/// The sheet adds `zs / w` in series with the external inductance per unit
/// length, which for kinetic-inductance-dominated graphene raises the line
/// impedance well above the PEC value.
pub fn sheet_line_impedance(eps_r: f64, h: f64, w: f64, zs: Complex64, f: f64) -> Result<Complex64> {
    ensure_finite("f", f)?;
    if !(f > 0.0) {
        return Err(Error::param("f", "must be positive"));
    }
    if !(zs.re.is_finite() && zs.im.is_finite()) {
        return Err(Error::param("zs", "must be finite"));
    }
    let z_pec = microstrip_impedance(eps_r, h, w)?;
    let ee = effective_permittivity(eps_r, h, w)?;
    let l = z_pec * ee.sqrt() / C0;
    let c = ee.sqrt() / (z_pec * C0);
    let jw = Complex64::new(0.0, 2.0 * PI * f);
    Ok(((zs / w + jw * l) / (jw * c)).sqrt())
}

/// Real part of the graphene feed-line impedance at a given strip width.
///
/// This is the natural reference for a port at the end of the feed; the
/// ground return path is treated as a perfect conductor.
pub fn feed_line_impedance(patch: &PatchGeometry, strip_width: f64, f: f64) -> Result<f64> {
    let zs = graphene_sigma(&patch.radiator, f)?.inv();
    Ok(sheet_line_impedance(patch.substrate.eps_r, patch.h, strip_width, zs, f)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn width_at_design_point() {
        // mpmath evaluation: 79.178397316943783... µm
        let w = patch_width(800e9, 10.2).unwrap();
        assert_relative_eq!(w, 79.178_397_316_943_78e-6, max_relative = 1e-13);
    }

    #[test]
    fn width_limits() {
        assert_relative_eq!(patch_width(1e12, 1.0).unwrap(), C0 / 2e12, max_relative = 1e-15);
        let a = patch_width(400e9, 4.0).unwrap();
        let b = patch_width(800e9, 4.0).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-15);
        assert!(patch_width(0.0, 4.0).is_err());
        assert!(patch_width(-1.0, 4.0).is_err());
    }

    #[test]
    fn effective_permittivity_cases() {
        assert_relative_eq!(effective_permittivity(1.0, 45e-6, 60e-6).unwrap(), 1.0);
        let thin = effective_permittivity(10.2, 1e-12, 1.0).unwrap();
        assert_relative_eq!(thin, 10.2, max_relative = 1e-5);
        // mpmath: 7.0546477236774544927
        assert_relative_eq!(
            effective_permittivity(10.2, 45e-6, 60e-6).unwrap(),
            7.054_647_723_677_454,
            max_relative = 1e-14
        );
    }

    #[test]
    fn length_cases() {
        let l = patch_length_with_extension(800e9, 1.0, 0.0).unwrap();
        assert_relative_eq!(l, C0 / 1.6e12, max_relative = 1e-15);
        // mpmath: 40.501456736944896 µm
        let ee = effective_permittivity(10.2, 45e-6, 60e-6).unwrap();
        let l = patch_length(800e9, ee, 45e-6, 60e-6).unwrap();
        assert_relative_eq!(l, 40.501_456_736_944_90e-6, max_relative = 1e-12);
        assert!(l < C0 / 1.6e12);
    }

    #[test]
    fn thicker_substrate_shortens_patch() {
        let w = 60e-6;
        let mut last = f64::INFINITY;
        for h in [10e-6, 20e-6, 30e-6, 45e-6] {
            let ee = 7.0;
            let l = patch_length(800e9, ee, h, w).unwrap();
            assert!(l < last);
            last = l;
        }
    }

    #[test]
    fn electrically_thick_substrate_rejected() {
        assert!(patch_length(800e9, 7.0, 500e-6, 60e-6).is_err());
    }

    #[test]
    fn inset_cases() {
        let l = 36e-6;
        assert_eq!(inset_depth(l, 240.0, 240.0).unwrap(), 0.0);
        assert_relative_eq!(inset_depth(l, 240.0, 120.0).unwrap(), l / 4.0, max_relative = 1e-14);
        assert_relative_eq!(inset_depth(l, 240.0, 60.0).unwrap(), l / 3.0, max_relative = 1e-14);
        assert!(inset_depth(l, 240.0, 300.0).is_err());
        let y0 = inset_depth(l, 240.0, 50.0).unwrap();
        assert_relative_eq!(inset_resistance(l, 240.0, y0), 50.0, max_relative = 1e-12);
    }

    #[test]
    fn microstrip_impedance_cases() {
        // alumina, w = h: about 49 Ω in the usual design charts
        let z = microstrip_impedance(9.9, 1.0, 1.0).unwrap();
        assert!((z - 49.0).abs() < 1.0, "{z}");
        let below = microstrip_impedance(4.0, 1.0, 1.0 - 1e-9).unwrap();
        let above = microstrip_impedance(4.0, 1.0, 1.0 + 1e-9).unwrap();
        assert!((below - above).abs() / below < 0.01);
        assert!(microstrip_impedance(4.0, 1.0, 0.5).unwrap() > microstrip_impedance(4.0, 1.0, 2.0).unwrap());
    }

    #[test]
    fn sheet_line_reduces_to_pec_line() {
        let pec = microstrip_impedance(10.2, 45e-6, 2.5e-6).unwrap();
        let z = sheet_line_impedance(10.2, 45e-6, 2.5e-6, Complex64::new(0.0, 0.0), 800e9).unwrap();
        assert_relative_eq!(z.re, pec, max_relative = 1e-12);
        assert!(z.im.abs() < 1e-9 * pec);
        let inductive = sheet_line_impedance(10.2, 45e-6, 2.5e-6, Complex64::new(0.0, 50.0), 800e9).unwrap();
        assert!(inductive.re > pec);
    }

    #[test]
    fn graphene_feed_line_is_high_impedance() {
        let p = crate::geometry::default_patch();
        let z = feed_line_impedance(&p, 2.5e-6, 800e9).unwrap();
        let pec = microstrip_impedance(p.substrate.eps_r, p.h, 2.5e-6).unwrap();
        assert!(z > 1.5 * pec, "{z} vs {pec}");
    }

    #[test]
    fn default_inputs_design() {
        let d = design(&DesignInputs::default()).unwrap();
        assert!(d.length > 0.0 && d.inset_depth < d.length / 2.0);
        assert!(d.eps_eff >= 1.0 && d.eps_eff <= 10.2);
    }
}
