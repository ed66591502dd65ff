//! Planar-stack analysis of the partially reflecting surface and its cavity.

mod cavity;
mod phase;
mod sheet_fit;
mod tmm;

pub use cavity::{
    cavity_height, sweep_cavity, trentini_directivity, CavityModel, CavityParams, DirectivityEnhancement,
};
pub use phase::{
    phase_zero_crossing, phase_zero_crossings, zero_phase_resonances, CrossingDirection, CrossingKind,
    PhaseCrossing,
};
pub use sheet_fit::{fit_sheet_impedance, SheetFit, SheetHost, MAX_FIT_RESIDUAL, MAX_RESONANCE_OFFSET};
pub use tmm::{
    tmm_reflection, tmm_solve, Layer, LayerStack, Polarization, SeriesLcSheet, SheetModel, Termination, TmmResult,
};
