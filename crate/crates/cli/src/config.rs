//! Run configuration: one TOML document with a section per module.

use std::path::{Path, PathBuf};

use prsant_core::fdtd::{CpmlSpec, FarFieldOptions, NtffSpec, PlaneWaveSetup, PulseSpec, StopCriterion};
use prsant_core::geometry::{
    default_patch, default_prs_array, CavityAssembly, GridSpec, PatchGeometry, PrsArrayGeometry,
};
use prsant_core::patch_design::{feed_line_impedance, DesignInputs};
use prsant_core::prs_cavity::SeriesLcSheet;
use prsant_core::FrequencyAxis;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

const UM: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub design: DesignInputs,
    pub geometry: GeometryConfig,
    pub frequency: BandConfig,
    pub prs_cavity: CavityConfig,
    pub unitcell: UnitCellConfig,
    pub fdtd: FdtdConfig,
    pub simulate: SimulateConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub patch: PatchGeometry,
    /// PRS array; its `cell` table is the unit cell.
    pub prs: PrsArrayGeometry,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            patch: default_patch(),
            prs: default_prs_array(),
        }
    }
}

/// Inclusive band sampled every `step` (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            start: 550e9,
            stop: 1050e9,
            step: 1e9,
        }
    }
}

impl BandConfig {
    pub fn axis(&self) -> Result<FrequencyAxis, CliError> {
        if !(self.start > 0.0) {
            return Err(CliError::invalid("band start must be positive"));
        }
        Ok(FrequencyAxis::from_band(self.start, self.stop, self.step)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSolver {
    /// Full-wave run of the voxelized assembly for every separation.
    #[default]
    Fdtd,
    /// One-dimensional cavity with the PRS reduced to a fitted LC sheet.
    Tmm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityConfig {
    /// Patch-to-PRS separations (m).
    pub z_s: Vec<f64>,
    pub solver: SweepSolver,
    /// Sheet for the TMM solver; fitted from the unit cell when absent.
    pub sheet: Option<SeriesLcSheet>,
}

impl Default for CavityConfig {
    fn default() -> Self {
        Self {
            z_s: (1..=8).map(|n| 5.0 * n as f64 * UM).collect(),
            solver: SweepSolver::default(),
            sheet: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitCellConfig {
    /// Simulated band.
    pub band: BandConfig,
    /// Sub-band used for the LC sheet fit.
    pub fit_band: BandConfig,
    /// Cells per tile side (even).
    pub lateral_cells: usize,
    pub plane_wave: PlaneWaveSetup,
}

impl Default for UnitCellConfig {
    fn default() -> Self {
        Self {
            band: BandConfig {
                start: 1e12,
                stop: 10e12,
                step: 25e9,
            },
            fit_band: BandConfig {
                start: 6e12,
                stop: 8e12,
                step: 25e9,
            },
            lateral_cells: 24,
            plane_wave: PlaneWaveSetup::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdtdConfig {
    /// Cells per micrometre.
    pub resolution: f64,
    /// Air margin around the structure (m).
    pub padding: f64,
    /// Port reference impedance (Ω); the graphene feed line's own impedance when absent.
    pub port_impedance: Option<f64>,
    pub pulse: PulseSpec,
    pub stop: StopCriterion,
    pub cpml: CpmlSpec,
    pub ntff: NtffSpec,
    pub farfield: FarFieldOptions,
}

impl Default for FdtdConfig {
    fn default() -> Self {
        Self {
            resolution: 1.0,
            padding: 40.0 * UM,
            port_impedance: None,
            pulse: PulseSpec::default(),
            stop: StopCriterion::default(),
            cpml: CpmlSpec::default(),
            ntff: NtffSpec::default(),
            farfield: FarFieldOptions::default(),
        }
    }
}

impl FdtdConfig {
    pub fn cell(&self) -> f64 {
        UM / self.resolution
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::uniform(self.cell(), self.padding)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Patch antenna alone.
    #[default]
    Patch,
    /// Patch with the PRS at `z_s`.
    Assembly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: Model,
    pub z_s: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: Model::Patch,
            z_s: 15.0 * UM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub resolution: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if let Some(r) = o.resolution {
            self.fdtd.resolution = r;
        }
    }

    /// Checks every section; nothing runs until this passes.
    pub fn validate(&self) -> Result<(), CliError> {
        self.design.validate()?;
        self.geometry.patch.validate()?;
        self.geometry.prs.validate()?;
        self.frequency.axis()?;
        self.unitcell.band.axis()?;
        let (sim, fit) = (self.unitcell.band, self.unitcell.fit_band);
        if !(fit.start >= sim.start && fit.stop <= sim.stop && fit.stop > fit.start) {
            return Err(CliError::invalid("unitcell.fit_band must lie inside unitcell.band"));
        }
        let n = self.unitcell.lateral_cells;
        if n < 2 || n % 2 != 0 {
            return Err(CliError::invalid("unitcell.lateral_cells must be even and at least 2"));
        }
        if self.prs_cavity.z_s.is_empty() {
            return Err(CliError::invalid("prs_cavity.z_s is empty"));
        }
        for &z in &self.prs_cavity.z_s {
            CavityAssembly::new(self.geometry.patch.clone(), self.geometry.prs.clone(), z)?;
        }
        CavityAssembly::new(self.geometry.patch.clone(), self.geometry.prs.clone(), self.simulate.z_s)?;
        if !(self.fdtd.resolution.is_finite() && self.fdtd.resolution > 0.0) {
            return Err(CliError::invalid("fdtd.resolution must be positive"));
        }
        if !(self.fdtd.padding.is_finite() && self.fdtd.padding >= 0.0) {
            return Err(CliError::invalid("fdtd.padding must be non-negative"));
        }
        if let Some(z) = self.fdtd.port_impedance {
            if !(z.is_finite() && z > 0.0) {
                return Err(CliError::invalid("fdtd.port_impedance must be positive"));
            }
        }
        if let Some(sheet) = &self.prs_cavity.sheet {
            if !(sheet.inductance > 0.0 && sheet.capacitance > 0.0 && sheet.resistance >= 0.0) {
                return Err(CliError::invalid("prs_cavity.sheet needs L > 0, C > 0, R >= 0"));
            }
        }
        self.fdtd.cpml.validate()?;
        if self.fdtd.stop.max_steps == 0 || self.fdtd.stop.check_interval == 0 {
            return Err(CliError::invalid("fdtd.stop step counts must be positive"));
        }
        if self.fdtd.ntff.frequencies.iter().any(|f| !(*f > 0.0)) {
            return Err(CliError::invalid("fdtd.ntff.frequencies must be positive"));
        }
        Ok(())
    }

    /// Port impedance actually used: the configured value or the feed line's.
    pub fn port_impedance(&self) -> Result<f64, CliError> {
        if let Some(z) = self.fdtd.port_impedance {
            return Ok(z);
        }
        let d = self.fdtd.cell();
        let width = (self.geometry.patch.w_1 / d).round().max(1.0) * d;
        Ok(feed_line_impedance(&self.geometry.patch, width, self.design.f_r)?)
    }

    /// Validated copy with every implicit value filled in.
    pub fn resolved(mut self, o: &Overrides) -> Result<Self, CliError> {
        self.apply(o);
        self.validate()?;
        self.fdtd.port_impedance = Some(self.port_impedance()?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_rejected() {
        let e = RunConfig::from_toml("[fdtd]\nresolutoin = 2.0\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn partial_override() {
        let c = RunConfig::from_toml("[geometry.patch]\nw_p = 5.5e-5\n").unwrap();
        assert_eq!(c.geometry.patch.w_p, 5.5e-5);
        assert_eq!(c.geometry.patch.l_p, default_patch().l_p);
    }

    #[test]
    fn empty_sweep_rejected() {
        let c = RunConfig::from_toml("[prs_cavity]\nz_s = []\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn feed_impedance_fills_port() {
        let c = RunConfig::default().resolved(&Overrides::default()).unwrap();
        let z = c.fdtd.port_impedance.unwrap();
        assert!(z > 100.0 && z < 1000.0, "{z}");
    }
}
