//! 2×2 transfer matrices for planar stacks of slabs and zero-thickness sheets.
//!
//! Each layer acts on the tangential (E, H) pair as an ABCD matrix. Slabs
//! propagate with the transverse wavenumber of their medium; sheets are shunt
//! admittances. Time dependence is e^{+jωt}, so a PEC reflects with phase π.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{angular, C0, EPS0, MU0};
use crate::error::{ensure_finite, Error, Result};
use crate::materials::{graphene_sigma, ConductorSheetSpec, DielectricSpec, GrapheneSpec};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    /// Electric field perpendicular to the plane of incidence (s).
    #[default]
    Te,
    /// Magnetic field perpendicular to the plane of incidence (p).
    Tm,
}

/// Series R-L-C surface impedance `R + jωL + 1/(jωC)` (Ω per square).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesLcSheet {
    #[serde(default)]
    pub resistance: f64,
    /// H per square.
    pub inductance: f64,
    /// F per square.
    pub capacitance: f64,
}

impl SeriesLcSheet {
    pub fn lossless(inductance: f64, capacitance: f64) -> Self {
        Self {
            resistance: 0.0,
            inductance,
            capacitance,
        }
    }

    pub fn impedance(&self, f: f64) -> Complex64 {
        let w = angular(f);
        Complex64::new(self.resistance, w * self.inductance - 1.0 / (w * self.capacitance))
    }

    pub fn resonance(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * (self.inductance * self.capacitance).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SheetModel {
    SeriesLc(SeriesLcSheet),
    Graphene(GrapheneSpec),
    Conductor(ConductorSheetSpec),
    /// Fixed admittance (S), frequency independent.
    Admittance { re: f64, im: f64 },
    Pec,
}

impl SheetModel {
    /// Shunt admittance; `None` stands for a short (PEC).
    pub fn admittance(&self, f: f64) -> Result<Option<Complex64>> {
        Ok(match self {
            SheetModel::SeriesLc(s) => Some(1.0 / s.impedance(f)),
            SheetModel::Graphene(g) => Some(graphene_sigma(g, f)?),
            SheetModel::Conductor(c) => Some(Complex64::new(c.sheet_conductance(), 0.0)),
            SheetModel::Admittance { re, im } => Some(Complex64::new(*re, *im)),
            SheetModel::Pec => None,
        })
    }

    pub fn is_passive(&self) -> bool {
        match self {
            SheetModel::SeriesLc(s) => s.resistance >= 0.0,
            SheetModel::Admittance { re, .. } => *re >= 0.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layer {
    Slab {
        thickness: f64,
        material: DielectricSpec,
    },
    Sheet(SheetModel),
}

impl Layer {
    pub fn slab(thickness: f64, material: DielectricSpec) -> Self {
        Layer::Slab {
            thickness,
            material,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    HalfSpace(DielectricSpec),
    Pec,
}

/// Incident half-space, layers in propagation order, and the exit termination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub incident: DielectricSpec,
    pub layers: Vec<Layer>,
    pub termination: Termination,
}

impl LayerStack {
    pub fn new(incident: DielectricSpec, layers: Vec<Layer>, termination: Termination) -> Result<Self> {
        let stack = Self {
            incident,
            layers,
            termination,
        };
        stack.validate()?;
        Ok(stack)
    }

    pub fn air() -> Self {
        Self {
            incident: DielectricSpec::VACUUM,
            layers: Vec::new(),
            termination: Termination::HalfSpace(DielectricSpec::VACUUM),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.incident.validate()?;
        if !self.incident.is_lossless() {
            return Err(Error::param("incident", "incident half-space must be lossless"));
        }
        for layer in &self.layers {
            match layer {
                Layer::Slab {
                    thickness,
                    material,
                } => {
                    ensure_finite("thickness", *thickness)?;
                    if *thickness <= 0.0 {
                        return Err(Error::param("thickness", "slab thickness must be positive"));
                    }
                    material.validate()?;
                }
                Layer::Sheet(SheetModel::Graphene(g)) => g.validate()?,
                Layer::Sheet(SheetModel::Conductor(c)) => c.validate()?,
                Layer::Sheet(_) => {}
            }
        }
        if let Termination::HalfSpace(m) = self.termination {
            m.validate()?;
        }
        Ok(())
    }

    /// The same structure seen from the other side. Only valid when the
    /// termination is a half-space.
    pub fn reversed(&self) -> Result<Self> {
        let Termination::HalfSpace(exit) = self.termination else {
            return Err(Error::param("termination", "a PEC-terminated stack has no far side"));
        };
        Ok(Self {
            incident: exit,
            layers: self.layers.iter().rev().copied().collect(),
            termination: Termination::HalfSpace(self.incident),
        })
    }

    pub fn is_passive(&self) -> bool {
        self.layers.iter().all(|l| match l {
            Layer::Sheet(s) => s.is_passive(),
            Layer::Slab { .. } => true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmmResult {
    /// Tangential-field reflection coefficient.
    pub reflection: Complex64,
    /// Tangential-E transmission coefficient into the exit half-space.
    pub transmission: Complex64,
    pub reflectance: f64,
    pub transmittance: f64,
}

/// Transverse wavenumber and wave impedance of a medium at fixed `kx`.
fn medium_wave(material: &DielectricSpec, omega: f64, kx: f64, pol: Polarization) -> (Complex64, Complex64) {
    let eps = material.complex_permittivity();
    let k = omega / C0 * eps.sqrt();
    let mut kz = (k * k - kx * kx).sqrt();
    // Decaying branch for e^{-j kz z}: Im(kz) <= 0.
    if kz.im > 0.0 {
        kz = -kz;
    }
    let z = match pol {
        Polarization::Te => omega * MU0 / kz,
        Polarization::Tm => kz / (omega * EPS0 * eps),
    };
    (kz, z)
}

#[derive(Debug, Clone, Copy)]
struct Abcd {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl Abcd {
    fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    fn then(self, o: Abcd) -> Abcd {
        Abcd {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Impedance seen at the input for load `zl`.
    fn input_impedance(&self, zl: Complex64) -> Complex64 {
        (self.a * zl + self.b) / (self.c * zl + self.d)
    }

    /// Inverse map: load impedance that produces input impedance `zin`.
    fn load_for_input(&self, zin: Complex64) -> Complex64 {
        (self.d * zin - self.b) / (self.a - self.c * zin)
    }
}

pub(crate) struct Prepared {
    omega: f64,
    kx: f64,
    pol: Polarization,
    z_incident: Complex64,
}

fn prepare(stack: &LayerStack, f: f64, pol: Polarization, angle_deg: f64) -> Result<Prepared> {
    ensure_finite("frequency", f)?;
    ensure_finite("incidence angle", angle_deg)?;
    if f <= 0.0 {
        return Err(Error::param("frequency", "must be positive"));
    }
    if !(0.0..90.0).contains(&angle_deg) {
        return Err(Error::param("incidence angle", "must lie in [0, 90) degrees"));
    }
    stack.validate()?;
    let omega = angular(f);
    let kx = omega / C0 * stack.incident.eps_r.sqrt() * angle_deg.to_radians().sin();
    if let Termination::HalfSpace(exit) = stack.termination {
        if exit.is_lossless() && kx >= omega / C0 * exit.eps_r.sqrt() {
            return Err(Error::param(
                "termination",
                "exit half-space supports only evanescent waves at this angle",
            ));
        }
    }
    let (_, z_incident) = medium_wave(&stack.incident, omega, kx, pol);
    Ok(Prepared {
        omega,
        kx,
        pol,
        z_incident,
    })
}

fn layer_matrix(layer: &Layer, p: &Prepared, f: f64) -> Result<Option<Abcd>> {
    Ok(match layer {
        Layer::Slab {
            thickness,
            material,
        } => {
            let (kz, z) = medium_wave(material, p.omega, p.kx, p.pol);
            let phase = kz * *thickness;
            let (cos, sin) = (phase.cos(), phase.sin());
            Some(Abcd {
                a: cos,
                b: J * z * sin,
                c: J * sin / z,
                d: cos,
            })
        }
        Layer::Sheet(sheet) => sheet.admittance(f)?.map(|y| Abcd {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: y,
            d: Complex64::new(1.0, 0.0),
        }),
    })
}

fn termination_impedance(stack: &LayerStack, p: &Prepared) -> Option<Complex64> {
    match stack.termination {
        Termination::HalfSpace(m) => Some(medium_wave(&m, p.omega, p.kx, p.pol).1),
        Termination::Pec => None,
    }
}

/// Reflection and transmission of `stack` at frequency `f`.
pub fn tmm_solve(stack: &LayerStack, f: f64, pol: Polarization, angle_deg: f64) -> Result<TmmResult> {
    let p = prepare(stack, f, pol, angle_deg)?;
    let zl = termination_impedance(stack, &p);

    // Backward pass: impedance looking into each interface, `None` for a short.
    let mut z_right = Vec::with_capacity(stack.layers.len());
    let mut matrices = Vec::with_capacity(stack.layers.len());
    let mut z = zl;
    for layer in stack.layers.iter().rev() {
        let m = layer_matrix(layer, &p, f)?;
        z_right.push(z);
        z = match (m, z) {
            (None, _) => None,
            (Some(m), Some(zr)) => Some(m.input_impedance(zr)),
            (Some(m), None) => Some(m.b / m.d),
        };
        matrices.push(m);
    }
    z_right.reverse();
    matrices.reverse();

    let z1 = p.z_incident;
    let reflection = match z {
        Some(zin) => (zin - z1) / (zin + z1),
        None => Complex64::new(-1.0, 0.0),
    };

    // Forward pass on the tangential voltage.
    let mut v = Complex64::new(1.0, 0.0) + reflection;
    for (m, zr) in matrices.iter().zip(&z_right) {
        v = match (m, zr) {
            (None, _) | (_, None) => Complex64::new(0.0, 0.0),
            (Some(m), Some(zr)) => v / (m.a + m.b / zr),
        };
    }
    let (transmission, transmittance) = match zl {
        Some(zl) if z.is_some() => {
            let t = v;
            let ratio = (1.0 / zl).re / (1.0 / z1).re;
            (t, t.norm_sqr() * ratio)
        }
        _ => (Complex64::new(0.0, 0.0), 0.0),
    };
    Ok(TmmResult {
        reflection,
        transmission,
        reflectance: reflection.norm_sqr(),
        transmittance,
    })
}

pub fn tmm_reflection(stack: &LayerStack, f: f64, pol: Polarization, angle_deg: f64) -> Result<Complex64> {
    Ok(tmm_solve(stack, f, pol, angle_deg)?.reflection)
}

/// Maps between a sheet admittance placed at a fixed slot in a host stack and
/// the reflection seen from the incident side.
pub(crate) struct SheetSlot {
    z_incident: Complex64,
    before: Abcd,
    /// Impedance behind the sheet; `None` when the sheet is shorted behind.
    behind: Option<Complex64>,
}

impl SheetSlot {
    pub(crate) fn new(
        incident: DielectricSpec,
        before: &[Layer],
        after: &[Layer],
        termination: Termination,
        f: f64,
        pol: Polarization,
        angle_deg: f64,
    ) -> Result<Self> {
        let host = LayerStack {
            incident,
            layers: before.iter().chain(after).copied().collect(),
            termination,
        };
        let p = prepare(&host, f, pol, angle_deg)?;
        let mut behind = termination_impedance(&host, &p);
        for layer in after.iter().rev() {
            let m = layer_matrix(layer, &p, f)?;
            behind = match (m, behind) {
                (None, _) => None,
                (Some(m), Some(zr)) => Some(m.input_impedance(zr)),
                (Some(m), None) => Some(m.b / m.d),
            };
        }
        let mut m_before = Abcd::identity();
        for layer in before {
            match layer_matrix(layer, &p, f)? {
                Some(m) => m_before = m_before.then(m),
                None => return Err(Error::param("sheet host", "PEC sheet in front of the fitted sheet")),
            }
        }
        Ok(Self {
            z_incident: p.z_incident,
            before: m_before,
            behind,
        })
    }

    pub(crate) fn reflection(&self, sheet_impedance: Complex64) -> Complex64 {
        let zs = sheet_impedance;
        let z_at = match self.behind {
            Some(zb) => zb * zs / (zb + zs),
            None => Complex64::new(0.0, 0.0),
        };
        let zin = self.before.input_impedance(z_at);
        (zin - self.z_incident) / (zin + self.z_incident)
    }

    /// Sheet impedance reproducing `gamma` exactly; `None` if unreachable.
    pub(crate) fn invert(&self, gamma: Complex64) -> Option<Complex64> {
        let zin = self.z_incident * (1.0 + gamma) / (1.0 - gamma);
        let z_at = self.before.load_for_input(zin);
        let zb = self.behind?;
        // 1/z_at = 1/zb + 1/zs
        let y = 1.0 / z_at - 1.0 / zb;
        let zs = 1.0 / y;
        zs.is_finite().then_some(zs)
    }
}
