//! Simulation core for graphene patch antennas loaded with a partially
//! reflective surface: material models, closed-form patch design,
//! transfer-matrix cavity analysis, geometry voxelization and a Yee FDTD solver.

pub mod constants;
pub mod error;
pub mod fdtd;
pub mod geometry;
pub mod materials;
pub mod patch_design;
pub mod prs_cavity;
pub mod spectrum;

pub use error::{Error, Result};
pub use materials::{ConductorSheetSpec, DielectricSpec, GrapheneSpec, MaterialSpec};
pub use num_complex::Complex64;
pub use spectrum::{FrequencyAxis, Spectrum};
