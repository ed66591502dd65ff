//! Sign changes of the reflection phase.

use std::f64::consts::PI;

use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    /// Phase passes through 0.
    ThroughZero,
    /// Phase wraps through ±π.
    ThroughPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Negative to positive phase (capacitive to inductive for a sheet).
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCrossing {
    pub frequency: f64,
    pub kind: CrossingKind,
    pub direction: CrossingDirection,
}

fn positive(phase: f64) -> bool {
    phase >= 0.0
}

/// Every sign change of `arg Γ` on the grid, ascending in frequency.
///
/// The crossing frequency is linearly interpolated between the bracketing
/// samples on the locally unwrapped phase.
pub fn phase_zero_crossings(gamma: &Spectrum) -> Vec<PhaseCrossing> {
    let phase: Vec<f64> = gamma.values.iter().map(|v| v.arg()).collect();
    let mut out = Vec::new();
    for i in 1..phase.len() {
        let (a, b) = (phase[i - 1], phase[i]);
        if positive(a) == positive(b) {
            continue;
        }
        let direction = if positive(b) {
            CrossingDirection::Rising
        } else {
            CrossingDirection::Falling
        };
        let (f0, f1) = (gamma.axis.at(i - 1), gamma.axis.at(i));
        let (kind, t) = if (b - a).abs() < PI {
            (CrossingKind::ThroughZero, -a / (b - a))
        } else {
            // Unwrap `b` next to `a`, then interpolate to the ±π line.
            let (b_unwrapped, target) = if a < 0.0 {
                (b - 2.0 * PI, -PI)
            } else {
                (b + 2.0 * PI, PI)
            };
            (CrossingKind::ThroughPi, (target - a) / (b_unwrapped - a))
        };
        out.push(PhaseCrossing {
            frequency: f0 + t.clamp(0.0, 1.0) * (f1 - f0),
            kind,
            direction,
        });
    }
    out
}

/// Frequencies of every phase sign change, ascending.
pub fn phase_zero_crossing(gamma: &Spectrum) -> Vec<f64> {
    phase_zero_crossings(gamma).into_iter().map(|c| c.frequency).collect()
}

/// Crossings through 0 only (resonances of a closed cavity, Γ = +1).
pub fn zero_phase_resonances(gamma: &Spectrum) -> Vec<f64> {
    phase_zero_crossings(gamma)
        .into_iter()
        .filter(|c| c.kind == CrossingKind::ThroughZero)
        .map(|c| c.frequency)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::FrequencyAxis;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn from_phase_deg(axis: FrequencyAxis, phase: impl Fn(f64) -> f64) -> Spectrum {
        let values = axis.iter().map(|f| Complex64::from_polar(0.7, phase(f).to_radians())).collect();
        Spectrum::new(axis, values).unwrap()
    }

    #[test]
    fn linear_phase_crosses_at_center() {
        let axis = FrequencyAxis::from_band(700e9, 900e9, 3e9).unwrap();
        let s = from_phase_deg(axis, |f| 90.0 - 180.0 * (f - 700e9) / 200e9);
        let c = phase_zero_crossings(&s);
        assert_eq!(c.len(), 1);
        assert_relative_eq!(c[0].frequency, 800e9, max_relative = 1e-12);
        assert_eq!(c[0].kind, CrossingKind::ThroughZero);
        assert_eq!(c[0].direction, CrossingDirection::Falling);
    }

    #[test]
    fn constant_phase_has_no_crossing() {
        let axis = FrequencyAxis::from_band(700e9, 900e9, 1e9).unwrap();
        assert!(phase_zero_crossing(&from_phase_deg(axis, |_| 45.0)).is_empty());
    }

    #[test]
    fn wrap_through_pi_is_interpolated() {
        let axis = FrequencyAxis::from_band(0.0, 10.0, 1.0).unwrap();
        // -170 at f=0 falling by 10 deg per unit: -180 reached at f=1.
        let s = from_phase_deg(axis, |f| {
            let p = -170.0 - 4.0 * f;
            if p < -180.0 { p + 360.0 } else { p }
        });
        let c = phase_zero_crossings(&s);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, CrossingKind::ThroughPi);
        assert_eq!(c[0].direction, CrossingDirection::Rising);
        assert_relative_eq!(c[0].frequency, 2.5, epsilon = 1e-9);
    }
}
