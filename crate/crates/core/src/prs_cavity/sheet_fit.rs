//! Series-LC surface-impedance fit of a reflection spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::phase_zero_crossings;
use super::tmm::{Layer, Polarization, SeriesLcSheet, SheetSlot, Termination};
use crate::constants::{angular, ETA0};
use crate::error::{Error, Result};
use crate::materials::DielectricSpec;
use crate::spectrum::Spectrum;

/// Maximum |ΔΓ| accepted between the reference and the fitted sheet.
pub const MAX_FIT_RESIDUAL: f64 = 0.1;
/// Maximum relative offset between the LC resonance and the reference crossing.
pub const MAX_RESONANCE_OFFSET: f64 = 0.02;

/// Where the fitted sheet sits: layers in front of it, layers behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetHost {
    pub incident: DielectricSpec,
    pub before: Vec<Layer>,
    pub after: Vec<Layer>,
    pub termination: Termination,
    #[serde(default)]
    pub polarization: Polarization,
}

impl SheetHost {
    pub fn free_standing() -> Self {
        Self {
            incident: DielectricSpec::VACUUM,
            before: Vec::new(),
            after: Vec::new(),
            termination: Termination::HalfSpace(DielectricSpec::VACUUM),
            polarization: Polarization::Te,
        }
    }

    /// Sheet printed on top of a substrate slab, illuminated from the sheet side.
    pub fn on_substrate(substrate: DielectricSpec, thickness: f64) -> Self {
        Self {
            after: vec![Layer::slab(thickness, substrate)],
            ..Self::free_standing()
        }
    }

    pub(crate) fn slot(&self, f: f64) -> Result<SheetSlot> {
        SheetSlot::new(
            self.incident,
            &self.before,
            &self.after,
            self.termination,
            f,
            self.polarization,
            0.0,
        )
    }

    /// Reflection of this host with `sheet` in place, over the axis of `like`.
    pub fn reflection_spectrum(&self, sheet: &SeriesLcSheet, like: &Spectrum) -> Result<Spectrum> {
        Spectrum::try_from_fn(like.axis, |f| Ok(self.slot(f)?.reflection(sheet.impedance(f))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetFit {
    pub sheet: SeriesLcSheet,
    /// max |Γ_fit − Γ_ref| over the band.
    pub max_residual: f64,
    /// 1/(2π√LC).
    pub resonance: f64,
    /// Reference phase sign change nearest to the LC resonance.
    pub reference_crossing: f64,
}

/// Fits `R + jωL + 1/(jωC)` so that the host stack reproduces `gamma_ref`.
///
/// Each sample is inverted exactly to a sheet impedance; L and 1/C then come
/// from a weighted linear least-squares fit of the reactance, R from the
/// weighted mean resistance.
pub fn fit_sheet_impedance(gamma_ref: &Spectrum, host: &SheetHost) -> Result<SheetFit> {
    let crossings = phase_zero_crossings(gamma_ref);
    if crossings.is_empty() {
        return Err(Error::Fit(
            "reference reflection phase never changes sign in the band".into(),
        ));
    }

    let mut samples = Vec::with_capacity(gamma_ref.len());
    for (f, g) in gamma_ref.iter() {
        if let Some(z) = host.slot(f)?.invert(g) {
            samples.push((angular(f), z));
        }
    }
    if samples.len() < 3 {
        return Err(Error::Fit("too few invertible reference samples".into()));
    }

    // Reactance X = ωL − S/ω with S = 1/C; weight to reflection sensitivity.
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut r_num, mut r_den) = (0.0, 0.0);
    for &(w, z) in &samples {
        let weight = 1.0 / (z.norm() + ETA0).powi(2);
        let (u, v) = (w, -1.0 / w);
        a11 += weight * u * u;
        a12 += weight * u * v;
        a22 += weight * v * v;
        b1 += weight * u * z.im;
        b2 += weight * v * z.im;
        r_num += weight * z.re;
        r_den += weight;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= f64::EPSILON * a11 * a22 {
        return Err(Error::Fit("band too narrow to separate L and C".into()));
    }
    let inductance = (b1 * a22 - b2 * a12) / det;
    let elastance = (a11 * b2 - a12 * b1) / det;
    if !(inductance > 0.0) || !(elastance > 0.0) {
        return Err(Error::Fit(format!(
            "non-physical series LC (L = {inductance:e} H, 1/C = {elastance:e} 1/F)"
        )));
    }
    let sheet = SeriesLcSheet {
        resistance: (r_num / r_den).max(0.0),
        inductance,
        capacitance: 1.0 / elastance,
    };

    let fitted = host.reflection_spectrum(&sheet, gamma_ref)?;
    let max_residual = fitted
        .values
        .iter()
        .zip(&gamma_ref.values)
        .map(|(a, b): (&Complex64, &Complex64)| (a - b).norm())
        .fold(0.0, f64::max);
    if max_residual > MAX_FIT_RESIDUAL {
        return Err(Error::Fit(format!(
            "residual {max_residual:.3} exceeds {MAX_FIT_RESIDUAL}; a single series LC does not model this reference"
        )));
    }
    let resonance = sheet.resonance();
    let reference_crossing = crossings
        .iter()
        .map(|c| c.frequency)
        .min_by(|a, b| (a - resonance).abs().total_cmp(&(b - resonance).abs()))
        .unwrap_or(f64::NAN);
    if (resonance - reference_crossing).abs() > MAX_RESONANCE_OFFSET * reference_crossing {
        return Err(Error::Fit(format!(
            "LC resonance {resonance:e} Hz is more than 2% from the reference crossing {reference_crossing:e} Hz"
        )));
    }
    Ok(SheetFit {
        sheet,
        max_residual,
        resonance,
        reference_crossing,
    })
}
