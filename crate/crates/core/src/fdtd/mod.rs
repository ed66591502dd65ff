//! Yee-grid finite-difference time-domain solver with absorbing boundaries,
//! dispersive sheets, a lumped port and a near-to-far-field transform.

mod analysis;
mod config;
mod cpml;
mod lattice;
mod ntff;
mod plane_wave;
mod port;
mod solver;

pub use analysis::{bandwidth_minus10db, directivity_dbi, realized_gain, resonance_frequency, MINUS_10_DB};
pub use config::{
    courant_limit, Boundary, Component, CpmlSpec, CurrentSource, NtffSpec, PortSpec, Probe, PulseSpec,
    SimulationConfig, StopCriterion,
};
pub use ntff::{ntff_farfield, FarField, FarFieldOptions, HuygensFace, NearFieldData, Radiator};
pub use plane_wave::{numerical_wavenumber, plane_wave_reflection, PlaneWaveSetup};
pub use port::{dft, s11_spectrum, PortRecord, MIN_SOURCE_LEVEL};
pub use solver::{run, ProbeRecord, SimulationResult, Solver};
