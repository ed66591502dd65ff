use serde::{Deserialize, Serialize};

use crate::constants::{C0, ETA0};
use crate::error::{Error, Result};
use crate::geometry::{PortCells, VoxelGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Pec,
    #[default]
    Cpml,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
}

impl Component {
    pub fn axis(self) -> usize {
        match self {
            Component::Ex | Component::Hx => 0,
            Component::Ey | Component::Hy => 1,
            Component::Ez | Component::Hz => 2,
        }
    }

    pub fn is_electric(self) -> bool {
        matches!(self, Component::Ex | Component::Ey | Component::Ez)
    }
}

/// Gaussian-modulated sinusoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// Carrier frequency (Hz).
    pub f0: f64,
    /// Full width between the −20 dB spectral edges (Hz).
    pub bandwidth: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            f0: 800e9,
            bandwidth: 400e9,
            amplitude: 1.0,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return Err(Error::param("source.f0", "must be positive"));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::param("source.bandwidth", "must be positive"));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::NonFinite("source.amplitude"));
        }
        Ok(())
    }

    /// Spectral standard deviation (Hz).
    pub fn sigma_f(&self) -> f64 {
        0.5 * self.bandwidth / (2.0 * std::f64::consts::LN_10).sqrt()
    }

    pub fn sigma_t(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.sigma_f())
    }

    pub fn delay(&self) -> f64 {
        5.0 * self.sigma_t()
    }

    /// Time after which the pulse is negligible.
    pub fn duration(&self) -> f64 {
        2.0 * self.delay()
    }

    pub fn value(&self, t: f64) -> f64 {
        let tau = (t - self.delay()) / self.sigma_t();
        self.amplitude * (-0.5 * tau * tau).exp() * (2.0 * std::f64::consts::PI * self.f0 * (t - self.delay())).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpmlSpec {
    pub layers: usize,
    /// Polynomial grading order of the conductivity profile.
    pub order: f64,
    /// Peak conductivity as a multiple of the optimal 0.8 (m+1)/(η0 Δ).
    pub sigma_factor: f64,
    /// Peak complex-frequency shift (S/m).
    pub alpha_max: f64,
}

impl Default for CpmlSpec {
    fn default() -> Self {
        Self {
            layers: 10,
            order: 3.0,
            sigma_factor: 1.0,
            alpha_max: 2.0 * std::f64::consts::PI * crate::constants::EPS0 * 100e9,
        }
    }
}

impl CpmlSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers < 6 {
            return Err(Error::param("cpml.layers", "at least 6 layers are required"));
        }
        if !(self.order >= 1.0 && self.order <= 6.0) {
            return Err(Error::param("cpml.order", "grading order must be within [1, 6]"));
        }
        if !(self.sigma_factor > 0.0 && self.sigma_factor.is_finite()) {
            return Err(Error::param("cpml.sigma_factor", "must be positive"));
        }
        if !(self.alpha_max >= 0.0 && self.alpha_max.is_finite()) {
            return Err(Error::param("cpml.alpha_max", "must be non-negative"));
        }
        Ok(())
    }

    pub fn sigma_max(&self, cell: f64) -> f64 {
        self.sigma_factor * 0.8 * (self.order + 1.0) / (ETA0 * cell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopCriterion {
    pub max_steps: usize,
    /// Stop once field energy falls below this fraction of its peak.
    pub energy_threshold: f64,
    pub check_interval: usize,
}

impl Default for StopCriterion {
    fn default() -> Self {
        Self {
            max_steps: 200_000,
            energy_threshold: 1e-8,
            check_interval: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSpec {
    pub cells: PortCells,
    /// Reference (source) impedance (Ω).
    pub impedance: f64,
}

/// Soft current source over a block of edges: `J = amplitude * pulse(t)` (A/m²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSource {
    pub component: Component,
    /// Inclusive lower and exclusive upper edge indices in voxel coordinates.
    pub lo: [usize; 3],
    pub hi: [usize; 3],
    pub amplitude: f64,
}

/// Records a field component averaged over a block of edges, every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub component: Component,
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NtffSpec {
    pub frequencies: Vec<f64>,
    /// Distance of the Huygens box from the grid edge, in cells.
    pub margin: usize,
    /// Face centres averaged per side of each surface patch.
    pub patch: usize,
    /// Time steps between surface samples; 0 picks 20 samples per period of the highest frequency.
    pub stride: usize,
}

impl Default for NtffSpec {
    fn default() -> Self {
        Self {
            frequencies: (0..17).map(|n| 600e9 + 25e9 * n as f64).collect(),
            margin: 4,
            patch: 1,
            stride: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: VoxelGrid,
    pub boundaries: [Boundary; 3],
    /// `None` selects 0.99 of the Courant limit.
    pub dt: Option<f64>,
    pub source: PulseSpec,
    pub port: Option<PortSpec>,
    pub currents: Vec<CurrentSource>,
    pub probes: Vec<Probe>,
    pub stop: StopCriterion,
    pub cpml: CpmlSpec,
    pub ntff: Option<NtffSpec>,
    /// Frequency at which dielectric loss tangents are converted to conductivity.
    pub loss_frequency: f64,
}

pub fn courant_limit(cell: [f64; 3]) -> f64 {
    1.0 / (C0 * cell.iter().map(|d| 1.0 / (d * d)).sum::<f64>().sqrt())
}

impl SimulationConfig {
    pub fn new(grid: VoxelGrid) -> Self {
        Self {
            grid,
            boundaries: [Boundary::Cpml; 3],
            dt: None,
            source: PulseSpec::default(),
            port: None,
            currents: Vec::new(),
            probes: Vec::new(),
            stop: StopCriterion::default(),
            cpml: CpmlSpec::default(),
            ntff: None,
            loss_frequency: 800e9,
        }
    }

    pub fn time_step(&self) -> f64 {
        self.dt.unwrap_or(0.99 * courant_limit(self.grid.cell))
    }

    pub fn validate(&self) -> Result<()> {
        let limit = courant_limit(self.grid.cell);
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::param("dt", "must be positive"));
            }
            if dt > limit {
                return Err(Error::param(
                    "dt",
                    format!("{dt:e} s exceeds the Courant limit {limit:e} s"),
                ));
            }
        }
        self.source.validate()?;
        if self.boundaries.contains(&Boundary::Cpml) {
            self.cpml.validate()?;
        }
        if self.stop.max_steps == 0 || self.stop.check_interval == 0 {
            return Err(Error::param("stop", "step counts must be positive"));
        }
        if !(self.stop.energy_threshold >= 0.0 && self.stop.energy_threshold < 1.0) {
            return Err(Error::param("stop.energy_threshold", "must lie in [0, 1)"));
        }
        if !(self.loss_frequency > 0.0 && self.loss_frequency.is_finite()) {
            return Err(Error::param("loss_frequency", "must be positive"));
        }
        let dims = self.grid.dims;
        if let Some(port) = &self.port {
            if !(port.impedance > 0.0 && port.impedance.is_finite()) {
                return Err(Error::param("port.impedance", "must be positive"));
            }
            let c = &port.cells;
            let y_nodes = if self.boundaries[1] == Boundary::Periodic { dims[1] } else { dims[1] + 1 };
            if c.columns.is_empty()
                || c.i > dims[0]
                || c.k[1] <= c.k[0]
                || c.k[1] > dims[2]
                || c.columns.iter().any(|&j| j >= y_nodes)
            {
                return Err(Error::param("port", "port cells lie outside the grid"));
            }
        }
        for s in &self.currents {
            check_block("current source", s.component, s.lo, s.hi, dims)?;
        }
        for p in &self.probes {
            check_block("probe", p.component, p.lo, p.hi, dims)?;
        }
        if let Some(n) = &self.ntff {
            if n.frequencies.is_empty() || n.frequencies.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
                return Err(Error::param("ntff.frequencies", "need at least one positive frequency"));
            }
            if n.patch == 0 {
                return Err(Error::param("ntff.patch", "must be at least 1"));
            }
            if self.boundaries.contains(&Boundary::Periodic) {
                return Err(Error::param("ntff", "far-field transform needs an open domain on every axis"));
            }
        }
        Ok(())
    }
}

fn check_block(what: &'static str, c: Component, lo: [usize; 3], hi: [usize; 3], dims: [usize; 3]) -> Result<()> {
    for a in 0..3 {
        if hi[a] <= lo[a] || hi[a] > dims[a] + 1 {
            return Err(Error::param(what, format!("{c:?} block is empty or outside the grid")));
        }
    }
    Ok(())
}
