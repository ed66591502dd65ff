use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Boundary, Component, CpmlSpec, CurrentSource, Probe, PulseSpec, SimulationConfig, StopCriterion};
use super::port::dft;
use super::solver::run;
use crate::constants::C0;
use crate::error::{Error, Result};
use crate::geometry::{voxelize, GridSpec, Layout, VoxelGrid};
use crate::spectrum::{FrequencyAxis, Spectrum};

/// Normal-incidence plane-wave illumination of a laterally periodic layout.
///
/// The wave is x-polarized and travels toward −z; the lateral period is the
/// layout's x/y extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneWaveSetup {
    /// Cells between the top of the structure and the probe plane.
    pub clearance: usize,
    /// Cells between the probe plane and the source plane.
    pub source_gap: usize,
    pub stop: StopCriterion,
    pub cpml: CpmlSpec,
}

impl Default for PlaneWaveSetup {
    fn default() -> Self {
        Self {
            clearance: 20,
            source_gap: 10,
            stop: StopCriterion {
                max_steps: 200_000,
                energy_threshold: 1e-10,
                check_interval: 50,
            },
            cpml: CpmlSpec::default(),
        }
    }
}

/// Yee-grid wavenumber of a plane wave along one axis.
pub fn numerical_wavenumber(f: f64, d: f64, dt: f64) -> f64 {
    let s = d / (C0 * dt) * (std::f64::consts::PI * f * dt).sin();
    2.0 / d * s.asin()
}

fn periodic_grid(layout: &Layout, lateral_cells: [usize; 2], dz: f64, pad_cells: usize) -> Result<VoxelGrid> {
    let b = layout
        .bounds()
        .ok_or_else(|| Error::param("layout", "plane-wave illumination needs a non-empty layout"))?;
    let span = [b[1] - b[0], b[3] - b[2]];
    if lateral_cells.iter().any(|n| *n == 0 || n % 2 != 0) {
        return Err(Error::param("lateral_cells", "need an even, non-zero cell count per lateral axis"));
    }
    let dx = span[0] / lateral_cells[0] as f64;
    let dy = span[1] / lateral_cells[1] as f64;
    let spec = GridSpec {
        cell: [dx, dy, dz],
        padding: [0.0, 0.0, pad_cells as f64 * dz],
    };
    let grid = voxelize(layout, &spec)?;
    if grid.dims[0] != lateral_cells[0] || grid.dims[1] != lateral_cells[1] {
        return Err(Error::param("layout", "lateral extent must be centred on the origin"));
    }
    Ok(grid)
}

/// Reflection coefficient referred to the grid plane nearest `reference_z`.
pub fn plane_wave_reflection(
    layout: &Layout,
    lateral_cells: [usize; 2],
    dz: f64,
    reference_z: f64,
    axis: FrequencyAxis,
    setup: &PlaneWaveSetup,
) -> Result<Spectrum> {
    let pad = setup.clearance + setup.source_gap + 6;
    let grid = periodic_grid(layout, lateral_cells, dz, pad)?;
    let top = layout.bounds().map(|b| b[5]).unwrap_or(0.0);
    let k_top = ((top - grid.origin[2]) / dz).round() as usize;
    let k_probe = k_top + setup.clearance;
    let k_source = k_probe + setup.source_gap;
    if k_source >= grid.dims[2] {
        return Err(Error::param("setup", "source plane falls outside the grid"));
    }
    let (lo, hi) = (axis.start, axis.stop());
    let pulse = PulseSpec {
        f0: 0.5 * (lo + hi),
        bandwidth: (hi - lo).max(1e-3 * hi),
        amplitude: 1.0,
    };
    let [nx, ny, _] = grid.dims;
    let configure = |g: VoxelGrid| {
        let mut cfg = SimulationConfig::new(g);
        cfg.boundaries = [Boundary::Periodic, Boundary::Periodic, Boundary::Cpml];
        cfg.source = pulse;
        cfg.stop = setup.stop;
        cfg.cpml = setup.cpml;
        cfg.currents.push(CurrentSource {
            component: Component::Ex,
            lo: [0, 0, k_source],
            hi: [nx, ny, k_source + 1],
            amplitude: 1.0,
        });
        cfg.probes.push(Probe {
            component: Component::Ex,
            lo: [0, 0, k_probe],
            hi: [nx, ny, k_probe + 1],
        });
        cfg
    };
    let empty = VoxelGrid::vacuum(grid.cell, grid.dims, grid.origin);
    let incident = run(configure(empty))?;
    let total = run(configure(grid.clone()))?;
    let (inc, tot) = (&incident.probes[0], &total.probes[0]);
    let n = inc.values.len().max(tot.values.len());
    let pad_to = |v: &[f64]| {
        let mut out = v.to_vec();
        out.resize(n, 0.0);
        out
    };
    let (inc_v, tot_v) = (pad_to(&inc.values), pad_to(&tot.values));
    let refl: Vec<f64> = tot_v.iter().zip(&inc_v).map(|(a, b)| a - b).collect();
    let k_ref = ((reference_z - grid.origin[2]) / dz).round().max(0.0) as usize;
    let distance = grid.node(2, k_probe) - grid.node(2, k_ref);
    let dt = total.dt;
    Spectrum::try_from_fn(axis, |f| {
        let a = dft(&inc_v, inc.t0, dt, f);
        if a.norm() == 0.0 {
            return Err(Error::Spectrum(format!("no incident field at {f:e} Hz")));
        }
        let k = numerical_wavenumber(f, dz, dt);
        Ok(dft(&refl, tot.t0, dt, f) / a * Complex64::from_polar(1.0, 2.0 * k * distance))
    })
}
