//! Parametric antenna/PRS models and their voxelization.

mod layout;
mod models;
mod shapes;
mod voxel;

pub use layout::{DielectricBlock, Layout, PortSite, SheetLayer};
pub use models::{
    default_patch, default_prs_array, default_unit_cell, CavityAssembly, PatchGeometry, PrsArrayGeometry,
    UnitCellGeometry,
};
pub use shapes::{covered, Paint, Shape, ShapeOp};
pub use voxel::{smallest_feature, voxelize, GridSpec, PortCells, SheetPlane, VoxelGrid, VoxelMaterial};
