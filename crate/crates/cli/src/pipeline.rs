//! Simulation pipelines shared by the subcommands.

use prsant_core::fdtd::{
    bandwidth_minus10db, ntff_farfield, plane_wave_reflection, resonance_frequency, run, s11_spectrum, FarField,
    PortSpec, SimulationConfig,
};
use prsant_core::geometry::{voxelize, CavityAssembly, Layout, VoxelGrid};
use prsant_core::prs_cavity::{
    fit_sheet_impedance, phase_zero_crossings, zero_phase_resonances, CavityModel, Layer, PhaseCrossing, SheetFit,
    SheetHost, SheetModel,
};
use prsant_core::Spectrum;
use serde::{Deserialize, Serialize};

use crate::config::{Model, RunConfig};
use crate::error::CliError;

/// Realized gain at one far-field frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub frequency_hz: f64,
    pub directivity_dbi: f64,
    pub realized_gain_dbi: f64,
    /// Radiated over accepted power.
    pub radiation_efficiency: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: Model,
    pub z_s_m: Option<f64>,
    pub resonance_hz: Option<f64>,
    /// −10 dB intervals `[lo, hi]` (Hz).
    pub bandwidth_hz: Vec<[f64; 2]>,
    pub total_bandwidth_hz: f64,
    pub peak_realized_gain_dbi: Option<f64>,
    pub peak_gain_frequency_hz: Option<f64>,
    pub port_impedance_ohm: f64,
    pub steps: usize,
    pub converged: bool,
    pub wall_clock_s: f64,
    pub cell_count: usize,
}

#[derive(Debug, Clone)]
pub struct AntennaRun {
    pub grid: VoxelGrid,
    pub s11: Spectrum,
    pub farfields: Vec<(FarField, GainPoint)>,
    pub summary: RunSummary,
}

impl AntennaRun {
    pub fn peak(&self) -> Option<&(FarField, GainPoint)> {
        self.farfields
            .iter()
            .max_by(|a, b| a.1.realized_gain_dbi.total_cmp(&b.1.realized_gain_dbi))
    }
}

pub fn model_layout(cfg: &RunConfig, model: Model, z_s: f64) -> Result<Layout, CliError> {
    Ok(match model {
        Model::Patch => cfg.geometry.patch.layout()?,
        Model::Assembly => CavityAssembly::new(cfg.geometry.patch.clone(), cfg.geometry.prs.clone(), z_s)?.layout()?,
    })
}

/// Full-wave port excitation of `layout`; far fields at the NTFF frequencies when `radiation` is set.
pub fn run_antenna(cfg: &RunConfig, model: Model, z_s: f64, radiation: bool) -> Result<AntennaRun, CliError> {
    let layout = model_layout(cfg, model, z_s)?;
    let grid = voxelize(&layout, &cfg.fdtd.grid_spec())?;
    let cells = grid
        .port
        .clone()
        .ok_or_else(|| CliError::invalid("layout has no port site on the radiator"))?;
    let impedance = cfg.port_impedance()?;
    let mut sim = SimulationConfig::new(grid.clone());
    sim.port = Some(PortSpec { cells, impedance });
    sim.source = cfg.fdtd.pulse;
    sim.stop = cfg.fdtd.stop;
    sim.cpml = cfg.fdtd.cpml;
    sim.loss_frequency = cfg.design.f_r;
    if radiation {
        sim.ntff = Some(cfg.fdtd.ntff.clone());
    }
    let result = run(sim)?;
    let record = result.port.as_ref().expect("port configured");
    let s11 = s11_spectrum(record, cfg.frequency.axis()?)?;

    let mut farfields = Vec::new();
    if let Some(near) = &result.near_field {
        for &f in &near.frequencies {
            let ff = ntff_farfield(near, f, &cfg.fdtd.farfield)?;
            let p_inc = record.incident_power(f);
            let p_acc = record.accepted_power(f);
            // 4πU / P_inc, i.e. directivity × efficiency × mismatch
            let offset = 10.0 * (ff.radiated_power / p_inc).log10();
            let point = GainPoint {
                frequency_hz: f,
                directivity_dbi: ff.peak_directivity_dbi,
                realized_gain_dbi: ff.peak_directivity_dbi + offset,
                radiation_efficiency: ff.radiated_power / p_acc,
                theta_deg: ff.peak_theta_deg,
                phi_deg: ff.peak_phi_deg,
            };
            farfields.push((ff, point));
        }
    }

    let bands = bandwidth_minus10db(&s11);
    let mut run = AntennaRun {
        summary: RunSummary {
            model,
            z_s_m: (model == Model::Assembly).then_some(z_s),
            resonance_hz: resonance_frequency(&s11),
            total_bandwidth_hz: bands.iter().map(|(lo, hi)| hi - lo).sum(),
            bandwidth_hz: bands.iter().map(|&(lo, hi)| [lo, hi]).collect(),
            peak_realized_gain_dbi: None,
            peak_gain_frequency_hz: None,
            port_impedance_ohm: impedance,
            steps: result.steps,
            converged: result.converged,
            wall_clock_s: result.wall_clock.as_secs_f64(),
            cell_count: result.cell_count,
        },
        grid,
        s11,
        farfields,
    };
    if let Some(p) = run.peak().map(|(_, p)| *p) {
        run.summary.peak_realized_gain_dbi = Some(p.realized_gain_dbi);
        run.summary.peak_gain_frequency_hz = Some(p.frequency_hz);
    }
    Ok(run)
}

/// Plane-wave reflection of the PRS unit cell, referred to the ring plane.
pub fn unit_cell_reflection(cfg: &RunConfig) -> Result<Spectrum, CliError> {
    let cell = &cfg.geometry.prs.cell;
    let layout = cell.layout()?;
    let nx = cfg.unitcell.lateral_cells;
    let d = cell.span_x / nx as f64;
    let ny = 2 * ((cell.span_y / d / 2.0).round() as usize).max(1);
    if ((ny as f64 * d) - cell.span_y).abs() > 1e-6 * cell.span_y {
        return Err(CliError::invalid("unit-cell tile spans are not commensurate with the lateral cell count"));
    }
    let t = cell.substrate_thickness;
    let dz = t / (t / d).round().max(1.0);
    Ok(plane_wave_reflection(
        &layout,
        [nx, ny],
        dz,
        cell.substrate_thickness,
        cfg.unitcell.band.axis()?,
        &cfg.unitcell.plane_wave,
    )?)
}

pub fn unit_cell_host(cfg: &RunConfig) -> SheetHost {
    let cell = &cfg.geometry.prs.cell;
    SheetHost::on_substrate(cell.substrate, cell.substrate_thickness)
}

#[derive(Debug, Clone)]
pub struct UnitCellAnalysis {
    pub gamma: Spectrum,
    pub fit: SheetFit,
    /// Reflection of the fitted sheet in the same host, over the simulated band.
    pub fitted: Spectrum,
    pub crossings: Vec<PhaseCrossing>,
}

pub fn analyse_unit_cell(cfg: &RunConfig, gamma: Spectrum) -> Result<UnitCellAnalysis, CliError> {
    let host = unit_cell_host(cfg);
    let band = cfg.unitcell.fit_band;
    let fit = fit_sheet_impedance(&gamma.restricted(band.start, band.stop)?, &host)?;
    let fitted = host.reflection_spectrum(&fit.sheet, &gamma)?;
    let crossings = phase_zero_crossings(&fitted);
    Ok(UnitCellAnalysis {
        gamma,
        fit,
        fitted,
        crossings,
    })
}

/// One-dimensional cavity with the PRS reduced to `sheet` on its substrate.
pub fn cavity_model(cfg: &RunConfig, sheet: SheetModel) -> CavityModel {
    let prs = &cfg.geometry.prs;
    let substrate = Layer::slab(prs.cell.substrate_thickness, prs.cell.substrate);
    let layers = if prs.rings_facing_antenna {
        vec![substrate, Layer::Sheet(sheet)]
    } else {
        vec![Layer::Sheet(sheet), substrate]
    };
    CavityModel::new(layers)
}

/// One row of the z_s sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub z_s: f64,
    pub gamma: Spectrum,
    pub resonance_hz: Option<f64>,
    pub bandwidth_hz: Vec<[f64; 2]>,
    pub crossings_hz: Vec<f64>,
    pub peak_realized_gain_dbi: Option<f64>,
}

pub fn sweep_row_fdtd(cfg: &RunConfig, z_s: f64) -> Result<SweepRow, CliError> {
    let run = run_antenna(cfg, Model::Assembly, z_s, true)?;
    Ok(SweepRow {
        z_s,
        crossings_hz: phase_zero_crossings(&run.s11).iter().map(|c| c.frequency).collect(),
        resonance_hz: run.summary.resonance_hz,
        bandwidth_hz: run.summary.bandwidth_hz,
        peak_realized_gain_dbi: run.summary.peak_realized_gain_dbi,
        gamma: run.s11,
    })
}

pub fn sweep_row_tmm(cfg: &RunConfig, model: &CavityModel, z_s: f64) -> Result<SweepRow, CliError> {
    let gamma = model.input_reflection(z_s, cfg.frequency.axis()?)?;
    Ok(SweepRow {
        z_s,
        crossings_hz: phase_zero_crossings(&gamma).iter().map(|c| c.frequency).collect(),
        resonance_hz: zero_phase_resonances(&gamma).first().copied(),
        bandwidth_hz: bandwidth_minus10db(&gamma).iter().map(|&(lo, hi)| [lo, hi]).collect(),
        peak_realized_gain_dbi: None,
        gamma,
    })
}
