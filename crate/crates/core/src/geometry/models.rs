//! Parametric solid models of the patch antenna, the PRS unit cell and array,
//! and the stacked assembly.
//!
//! Axes: x runs along the patch length and the feed line, y along the patch
//! width, z is normal to the substrate. The antenna substrate is centred on
//! the origin in x and y, with the ground plane at z = 0.

use serde::{Deserialize, Serialize};

use super::layout::{DielectricBlock, Layout, PortSite, SheetLayer};
use super::shapes::{Shape, ShapeOp};
use crate::error::{Error, Result};
use crate::materials::{ConductorSheetSpec, DielectricSpec, GrapheneSpec, MaterialSpec};

const UM: f64 = 1e-6;

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::param(name, format!("must be a positive length, got {v}")));
    }
    Ok(())
}

/// Slotted, inset-fed graphene patch on a substrate with a defected ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchGeometry {
    pub l_p: f64,
    pub w_p: f64,
    pub ring_thickness: f64,
    /// Inset feed width W_1.
    pub w_1: f64,
    /// Inset gap W_2 on each side of the feed.
    pub w_2: f64,
    /// Patch cut width W_3.
    pub w_3: f64,
    /// Patch cut length l_4.
    pub l_4: f64,
    /// Slot length L_c (along y) and width W_c (along x).
    pub l_c: f64,
    pub w_c: f64,
    pub l_s: f64,
    pub w_s: f64,
    pub h: f64,
    /// Microstrip length from the substrate edge to the patch.
    pub l_1: f64,
    pub l_2: f64,
    /// Inset cut depth.
    pub l_3: f64,
    /// Slot centre offset from the patch centre.
    pub slot_offset_x: f64,
    pub slot_offset_y: f64,
    /// Rectangular ground defect under the feed line.
    pub dgs_length_x: f64,
    pub dgs_width_y: f64,
    /// Distance of the defect centre from the fed substrate edge.
    pub dgs_center_from_edge: f64,
    pub substrate: DielectricSpec,
    pub radiator: GrapheneSpec,
    pub ground: GrapheneSpec,
}

pub fn default_patch() -> PatchGeometry {
    PatchGeometry {
        l_p: 36.0 * UM,
        w_p: 60.0 * UM,
        ring_thickness: 5.0 * UM,
        w_1: 1.0 * UM,
        w_2: 5.0 * UM,
        w_3: 4.0 * UM,
        l_4: 10.0 * UM,
        l_c: 20.0 * UM,
        w_c: 5.0 * UM,
        l_s: 130.0 * UM,
        w_s: 100.0 * UM,
        h: 45.0 * UM,
        l_1: 40.0 * UM,
        l_2: 25.0 * UM,
        l_3: 15.0 * UM,
        slot_offset_x: 0.0,
        slot_offset_y: 0.0,
        dgs_length_x: 5.0 * UM,
        dgs_width_y: 20.0 * UM,
        dgs_center_from_edge: 20.0 * UM,
        substrate: DielectricSpec::RT6010,
        radiator: GrapheneSpec::default(),
        ground: GrapheneSpec::default(),
    }
}

impl Default for PatchGeometry {
    fn default() -> Self {
        default_patch()
    }
}

impl PatchGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_p", self.l_p),
            ("w_p", self.w_p),
            ("ring_thickness", self.ring_thickness),
            ("w_1", self.w_1),
            ("w_2", self.w_2),
            ("w_3", self.w_3),
            ("l_4", self.l_4),
            ("l_c", self.l_c),
            ("w_c", self.w_c),
            ("l_s", self.l_s),
            ("w_s", self.w_s),
            ("h", self.h),
            ("l_1", self.l_1),
            ("l_2", self.l_2),
            ("l_3", self.l_3),
            ("dgs_length_x", self.dgs_length_x),
            ("dgs_width_y", self.dgs_width_y),
            ("dgs_center_from_edge", self.dgs_center_from_edge),
        ] {
            positive(name, v)?;
        }
        if self.w_p > self.w_s {
            return Err(Error::param("w_p", "patch wider than the substrate"));
        }
        if self.l_p + self.l_1 > self.l_s {
            return Err(Error::param("l_1", "patch plus feed line longer than the substrate"));
        }
        if self.l_3 >= self.l_p {
            return Err(Error::param("l_3", "inset cut deeper than the patch"));
        }
        if self.w_1 + 2.0 * self.w_2 >= self.w_p {
            return Err(Error::param("w_2", "inset cut wider than the patch"));
        }
        if 2.0 * self.w_3 >= self.w_p || self.l_4 >= self.l_p - self.l_3 {
            return Err(Error::param("w_3/l_4", "patch cuts do not fit on the far edge"));
        }
        if 2.0 * self.ring_thickness >= self.w_p.min(self.l_p) {
            return Err(Error::param("ring_thickness", "ring thicker than half the patch"));
        }
        let (cx, cy) = self.patch_center();
        let slot = Shape::centered_rect(cx + self.slot_offset_x, cy + self.slot_offset_y, self.w_c, self.l_c);
        let [x0, x1, y0, y1] = slot.bounds();
        let (px0, px1) = (self.patch_x0(), self.patch_x0() + self.l_p);
        if x0 < px0 || x1 > px1 || y0 < -self.w_p / 2.0 || y1 > self.w_p / 2.0 {
            return Err(Error::param("slot", "slot does not fit inside the patch"));
        }
        if self.dgs_center_from_edge + self.dgs_length_x / 2.0 > self.l_s
            || self.dgs_center_from_edge < self.dgs_length_x / 2.0
        {
            return Err(Error::param("dgs_center_from_edge", "ground defect leaves the substrate"));
        }
        self.substrate.validate()?;
        self.radiator.validate()?;
        self.ground.validate()
    }

    fn patch_x0(&self) -> f64 {
        -self.l_s / 2.0 + self.l_1
    }

    fn patch_center(&self) -> (f64, f64) {
        (self.patch_x0() + self.l_p / 2.0, 0.0)
    }

    /// Paint/cut list of the top (radiator) sheet.
    pub fn radiator_ops(&self) -> Vec<ShapeOp> {
        let x0 = self.patch_x0();
        let (cx, cy) = self.patch_center();
        let half_w = self.w_p / 2.0;
        let far = x0 + self.l_p;
        let inset_half = self.w_1 / 2.0 + self.w_2;
        vec![
            ShapeOp::add("patch", Shape::rect(x0, far, -half_w, half_w)),
            ShapeOp::cut("inset cut", Shape::rect(x0, x0 + self.l_3, -inset_half, inset_half)),
            ShapeOp::cut(
                "patch slot",
                Shape::centered_rect(cx + self.slot_offset_x, cy + self.slot_offset_y, self.w_c, self.l_c),
            ),
            ShapeOp::cut("patch cut -y", Shape::rect(far - self.l_4, far, -half_w, -half_w + self.w_3)),
            ShapeOp::cut("patch cut +y", Shape::rect(far - self.l_4, far, half_w - self.w_3, half_w)),
            ShapeOp::add(
                "feed line",
                Shape::rect(-self.l_s / 2.0, x0 + self.l_3, -self.w_1 / 2.0, self.w_1 / 2.0),
            )
            .widened(),
        ]
    }

    pub fn ground_ops(&self) -> Vec<ShapeOp> {
        let dgs_x = -self.l_s / 2.0 + self.dgs_center_from_edge;
        vec![
            ShapeOp::add(
                "ground",
                Shape::rect(-self.l_s / 2.0, self.l_s / 2.0, -self.w_s / 2.0, self.w_s / 2.0),
            ),
            ShapeOp::cut(
                "ground defect",
                Shape::centered_rect(dgs_x, 0.0, self.dgs_length_x, self.dgs_width_y),
            )
            .widened(),
        ]
    }

    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        let mut layout = Layout::default();
        self.add_to(&mut layout);
        Ok(layout)
    }

    pub(crate) fn add_to(&self, layout: &mut Layout) {
        layout.blocks.push(DielectricBlock {
            name: "antenna substrate".into(),
            material: self.substrate,
            x: [-self.l_s / 2.0, self.l_s / 2.0],
            y: [-self.w_s / 2.0, self.w_s / 2.0],
            z: [0.0, self.h],
        });
        layout.sheets.push(SheetLayer {
            name: "ground".into(),
            material: MaterialSpec::Graphene(self.ground),
            z: 0.0,
            ops: self.ground_ops(),
        });
        layout.sheets.push(SheetLayer {
            name: "radiator".into(),
            material: MaterialSpec::Graphene(self.radiator),
            z: self.h,
            ops: self.radiator_ops(),
        });
        layout.port = Some(PortSite {
            x: -self.l_s / 2.0,
            y: 0.0,
            z: [0.0, self.h],
        });
    }
}

/// Triangular copper ring on a thin substrate tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitCellGeometry {
    /// Outer side length L_g.
    pub l_g: f64,
    /// Inner side length W_g; zero gives a solid triangle.
    pub w_g: f64,
    /// Metal thickness t_1.
    pub t_1: f64,
    pub substrate_thickness: f64,
    /// Tile span (period) along x and y.
    pub span_x: f64,
    pub span_y: f64,
    pub substrate: DielectricSpec,
    pub metal_conductivity: f64,
}

pub fn default_unit_cell() -> UnitCellGeometry {
    UnitCellGeometry {
        l_g: 17.32 * UM,
        w_g: 8.66 * UM,
        t_1: 5.0 * UM,
        substrate_thickness: 10.0 * UM,
        span_x: 25.0 * UM,
        span_y: 25.0 * UM,
        substrate: DielectricSpec::RT5880,
        metal_conductivity: ConductorSheetSpec::ANNEALED_COPPER_5UM.sigma_dc,
    }
}

impl Default for UnitCellGeometry {
    fn default() -> Self {
        default_unit_cell()
    }
}

impl UnitCellGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_g", self.l_g),
            ("t_1", self.t_1),
            ("substrate_thickness", self.substrate_thickness),
            ("span_x", self.span_x),
            ("span_y", self.span_y),
            ("metal_conductivity", self.metal_conductivity),
        ] {
            positive(name, v)?;
        }
        if !(self.w_g >= 0.0 && self.w_g < self.l_g) {
            return Err(Error::param("w_g", "inner side must satisfy 0 <= W_g < L_g"));
        }
        if self.l_g > self.span_x || self.outer_height() > self.span_y {
            return Err(Error::param("l_g", "ring does not fit in the tile"));
        }
        self.substrate.validate()
    }

    pub fn outer_height(&self) -> f64 {
        self.l_g * 3f64.sqrt() / 2.0
    }

    pub fn metal(&self) -> ConductorSheetSpec {
        ConductorSheetSpec {
            sigma_dc: self.metal_conductivity,
            thickness: self.t_1,
        }
    }

    /// Ring paint/cut list centred at (cx, cy).
    pub fn ring_ops(&self, cx: f64, cy: f64, label: &str) -> Vec<ShapeOp> {
        let mut ops = vec![ShapeOp::add(format!("{label} outer triangle"), Shape::triangle_up(cx, cy, self.l_g))];
        if self.w_g > 0.0 {
            ops.push(ShapeOp::cut(
                format!("{label} inner triangle"),
                Shape::triangle_up(cx, cy, self.w_g),
            ));
        }
        ops
    }

    pub fn ring_area(&self) -> f64 {
        3f64.sqrt() / 4.0 * (self.l_g.powi(2) - self.w_g.powi(2))
    }

    /// Single tile centred on the origin: substrate in z ∈ [0, t], ring on top.
    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        let mut layout = Layout::default();
        layout.blocks.push(DielectricBlock {
            name: "unit-cell substrate".into(),
            material: self.substrate,
            x: [-self.span_x / 2.0, self.span_x / 2.0],
            y: [-self.span_y / 2.0, self.span_y / 2.0],
            z: [0.0, self.substrate_thickness],
        });
        layout.sheets.push(SheetLayer {
            name: "ring".into(),
            material: MaterialSpec::ConductorSheet(self.metal()),
            z: self.substrate_thickness,
            ops: self.ring_ops(0.0, 0.0, "ring"),
        });
        Ok(layout)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrsArrayGeometry {
    pub cell: UnitCellGeometry,
    /// Cells along x (aperture length).
    pub nx: usize,
    /// Cells along y (aperture width).
    pub ny: usize,
    pub pitch_x: f64,
    pub pitch_y: f64,
    /// Aperture length l_s2 (x) and width W_s2 (y).
    pub aperture_x: f64,
    pub aperture_y: f64,
    /// Rings on the substrate face toward the antenna.
    #[serde(default = "yes")]
    pub rings_facing_antenna: bool,
}

fn yes() -> bool {
    true
}

pub fn default_prs_array() -> PrsArrayGeometry {
    let (nx, ny) = (5, 4);
    let (ax, ay) = (125.0 * UM, 100.0 * UM);
    PrsArrayGeometry {
        cell: default_unit_cell(),
        nx,
        ny,
        pitch_x: ax / nx as f64,
        pitch_y: ay / ny as f64,
        aperture_x: ax,
        aperture_y: ay,
        rings_facing_antenna: true,
    }
}

impl Default for PrsArrayGeometry {
    fn default() -> Self {
        default_prs_array()
    }
}

impl PrsArrayGeometry {
    pub fn validate(&self) -> Result<()> {
        self.cell.validate()?;
        positive("pitch_x", self.pitch_x)?;
        positive("pitch_y", self.pitch_y)?;
        positive("aperture_x", self.aperture_x)?;
        positive("aperture_y", self.aperture_y)?;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::param("nx/ny", "array needs at least one cell per axis"));
        }
        let tol = 1e-12;
        if self.nx as f64 * self.pitch_x > self.aperture_x + tol || self.ny as f64 * self.pitch_y > self.aperture_y + tol {
            return Err(Error::param("pitch", "array does not fit in the aperture"));
        }
        if self.cell.l_g > self.pitch_x || self.cell.outer_height() > self.pitch_y {
            return Err(Error::param("pitch", "rings overlap their neighbours"));
        }
        Ok(())
    }

    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push((
                    (ix as f64 - (self.nx as f64 - 1.0) / 2.0) * self.pitch_x,
                    (iy as f64 - (self.ny as f64 - 1.0) / 2.0) * self.pitch_y,
                ));
            }
        }
        out
    }

    /// Adds substrate and rings with the lower substrate face at `z_bottom`.
    pub(crate) fn add_to(&self, layout: &mut Layout, z_bottom: f64) {
        let t = self.cell.substrate_thickness;
        layout.blocks.push(DielectricBlock {
            name: "PRS substrate".into(),
            material: self.cell.substrate,
            x: [-self.aperture_x / 2.0, self.aperture_x / 2.0],
            y: [-self.aperture_y / 2.0, self.aperture_y / 2.0],
            z: [z_bottom, z_bottom + t],
        });
        let ops = self
            .cell_centers()
            .into_iter()
            .enumerate()
            .flat_map(|(n, (cx, cy))| self.cell.ring_ops(cx, cy, &format!("PRS cell {n}")))
            .collect();
        layout.sheets.push(SheetLayer {
            name: "PRS rings".into(),
            material: MaterialSpec::ConductorSheet(self.cell.metal()),
            z: if self.rings_facing_antenna { z_bottom } else { z_bottom + t },
            ops,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityAssembly {
    pub antenna: PatchGeometry,
    pub prs: PrsArrayGeometry,
    /// Gap between the radiator plane and the PRS.
    pub z_s: f64,
}

impl CavityAssembly {
    pub fn new(antenna: PatchGeometry, prs: PrsArrayGeometry, z_s: f64) -> Result<Self> {
        let a = Self { antenna, prs, z_s };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        positive("z_s", self.z_s)?;
        self.antenna.validate()?;
        self.prs.validate()
    }

    pub fn layout(&self) -> Result<Layout> {
        self.validate()?;
        let mut layout = Layout::default();
        self.antenna.add_to(&mut layout);
        self.prs.add_to(&mut layout, self.antenna.h + self.z_s);
        Ok(layout)
    }
}
