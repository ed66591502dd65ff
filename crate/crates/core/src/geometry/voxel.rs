//! Rasterization of a [`Layout`] onto a uniform Yee grid.
//!
//! Dielectric blocks fill the cells whose centres they contain; sheets cover
//! the faces (in their grid plane) whose centres they contain. The grid is
//! centred on x = y = 0 with an even cell count per lateral axis, and has a
//! node plane at z = 0.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::shapes::{covered, Paint, Shape, ShapeOp};
use crate::error::{Error, Result};
use crate::materials::{ConductorSheetSpec, DielectricSpec, GrapheneSpec, MaterialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cell size along x, y, z (m).
    pub cell: [f64; 3],
    /// Free space added on every side of the layout, per axis (m).
    pub padding: [f64; 3],
}

impl GridSpec {
    pub fn uniform(cell: f64, padding: f64) -> Self {
        Self {
            cell: [cell; 3],
            padding: [padding; 3],
        }
    }

    /// Cubic cells sized so the smallest declared feature spans `cells_per_feature` cells.
    pub fn from_resolution(layout: &Layout, cells_per_feature: f64, padding: f64) -> Result<Self> {
        if !(cells_per_feature >= 2.0) {
            return Err(Error::param("resolution", "need at least 2 cells per smallest feature"));
        }
        let feature = smallest_feature(layout)
            .ok_or_else(|| Error::param("resolution", "empty layout has no features to resolve"))?;
        Ok(Self::uniform(feature / cells_per_feature, padding))
    }
}

/// Smallest block dimension or non-widened shape extent in the layout.
pub fn smallest_feature(layout: &Layout) -> Option<f64> {
    let blocks = layout
        .blocks
        .iter()
        .flat_map(|b| [b.x[1] - b.x[0], b.y[1] - b.y[0], b.z[1] - b.z[0]]);
    let shapes = layout
        .sheets
        .iter()
        .flat_map(|s| s.ops.iter())
        .filter(|o| !o.widen_to_cell)
        .map(|o| {
            let [x0, x1, y0, y1] = o.shape.bounds();
            (x1 - x0).min(y1 - y0)
        });
    blocks.chain(shapes).filter(|v| *v > 0.0).min_by(f64::total_cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VoxelMaterial {
    Vacuum,
    Dielectric(DielectricSpec),
    Sheet(MaterialSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetPlane {
    pub name: String,
    /// z node index.
    pub k: usize,
    pub material: u8,
    /// Face coverage, `nx * ny`, x fastest.
    pub faces: Vec<bool>,
}

/// Lumped feed: parallel columns of z-directed edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortCells {
    /// x node index.
    pub i: usize,
    /// y node indices of the parallel columns.
    pub columns: Vec<usize>,
    /// Edges k0..k1 (z node indices).
    pub k: [usize; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub cell: [f64; 3],
    /// Cell counts.
    pub dims: [usize; 3],
    /// Coordinates of node (0, 0, 0).
    pub origin: [f64; 3],
    /// Entry 0 is always vacuum.
    pub materials: Vec<VoxelMaterial>,
    /// Per-cell dielectric tag, x fastest.
    pub cells: Vec<u8>,
    pub sheets: Vec<SheetPlane>,
    pub port: Option<PortCells>,
}

fn centered_count(half_extent: f64, d: f64) -> usize {
    2 * ((half_extent / d) - 1e-9).ceil().max(1.0) as usize
}

/// Face/cell centre coordinate on a lateral axis with `n` cells centred on 0.
fn lateral_center(i: usize, n: usize, d: f64) -> f64 {
    (i as f64 + 0.5 - n as f64 / 2.0) * d
}

impl VoxelGrid {
    pub fn vacuum(cell: [f64; 3], dims: [usize; 3], origin: [f64; 3]) -> Self {
        Self {
            cell,
            dims,
            origin,
            materials: vec![VoxelMaterial::Vacuum],
            cells: vec![0; dims[0] * dims[1] * dims[2]],
            sheets: Vec::new(),
            port: None,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn cell_tag(&self, i: usize, j: usize, k: usize) -> u8 {
        self.cells[self.cell_index(i, j, k)]
    }

    pub fn dielectric(&self, tag: u8) -> DielectricSpec {
        match self.materials[tag as usize] {
            VoxelMaterial::Dielectric(d) => d,
            _ => DielectricSpec::VACUUM,
        }
    }

    pub fn center(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + (index as f64 + 0.5) * self.cell[axis]
    }

    pub fn node(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.cell[axis]
    }

    /// Covered sheet area summed over all planes (m²).
    pub fn sheet_area(&self) -> f64 {
        let face = self.cell[0] * self.cell[1];
        self.sheets.iter().map(|s| s.faces.iter().filter(|&&f| f).count() as f64 * face).sum()
    }

    /// x-directed edge (i+½, j) of plane `plane` carries sheet current.
    pub fn sheet_edge_x(&self, plane: &SheetPlane, i: usize, j: usize) -> bool {
        let nx = self.dims[0];
        (j > 0 && plane.faces[i + nx * (j - 1)]) || (j < self.dims[1] && plane.faces[i + nx * j])
    }

    /// y-directed edge (i, j+½) of plane `plane` carries sheet current.
    pub fn sheet_edge_y(&self, plane: &SheetPlane, i: usize, j: usize) -> bool {
        let nx = self.dims[0];
        (i > 0 && plane.faces[i - 1 + nx * j]) || (i < nx && plane.faces[i + nx * j])
    }

    pub fn is_all_vacuum(&self) -> bool {
        self.cells.iter().all(|&c| c == 0) && self.sheets.iter().all(|s| s.faces.iter().all(|f| !f))
    }

    /// Reflection through x = 0 (the grid is centred there).
    pub fn mirrored_x(&self) -> VoxelGrid {
        let [nx, ny, nz] = self.dims;
        let mut cells = vec![0; self.cells.len()];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    cells[self.cell_index(nx - 1 - i, j, k)] = self.cells[self.cell_index(i, j, k)];
                }
            }
        }
        let sheets = self
            .sheets
            .iter()
            .map(|s| {
                let mut faces = vec![false; s.faces.len()];
                for j in 0..ny {
                    for i in 0..nx {
                        faces[nx - 1 - i + nx * j] = s.faces[i + nx * j];
                    }
                }
                SheetPlane {
                    faces,
                    ..s.clone()
                }
            })
            .collect();
        VoxelGrid {
            cells,
            sheets,
            port: self.port.as_ref().map(|p| PortCells { i: nx - p.i, ..p.clone() }),
            ..self.clone()
        }
    }

    fn material_id(&mut self, m: VoxelMaterial) -> Result<u8> {
        if let Some(pos) = self.materials.iter().position(|x| *x == m) {
            return Ok(pos as u8);
        }
        if self.materials.len() >= u8::MAX as usize {
            return Err(Error::param("materials", "more than 255 distinct materials"));
        }
        self.materials.push(m);
        Ok((self.materials.len() - 1) as u8)
    }
}

/// Widens sub-cell rectangles to one cell, centred on the nearest face centre.
fn snap_thin(op: &ShapeOp, dims: [usize; 3], cell: [f64; 3]) -> ShapeOp {
    if !op.widen_to_cell {
        return op.clone();
    }
    let Shape::Rect { x0, x1, y0, y1 } = op.shape else {
        return op.clone();
    };
    let snap = |lo: f64, hi: f64, n: usize, d: f64| -> (f64, f64) {
        if hi - lo >= d {
            return (lo, hi);
        }
        let c = 0.5 * (lo + hi);
        let m = ((c / d + n as f64 / 2.0).floor().max(0.0) as usize).min(n - 1);
        let center = lateral_center(m, n, d);
        (center - d / 4.0, center + d / 4.0)
    };
    let (x0, x1) = snap(x0, x1, dims[0], cell[0]);
    let (y0, y1) = snap(y0, y1, dims[1], cell[1]);
    ShapeOp {
        shape: Shape::Rect { x0, x1, y0, y1 },
        ..op.clone()
    }
}

pub fn voxelize(layout: &Layout, spec: &GridSpec) -> Result<VoxelGrid> {
    for (a, d) in spec.cell.iter().enumerate() {
        if !(d.is_finite() && *d > 0.0) {
            return Err(Error::param("cell", format!("cell size along axis {a} must be positive")));
        }
    }
    if spec.padding.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::param("padding", "must be non-negative"));
    }
    let [dx, dy, dz] = spec.cell;
    let b = layout.bounds().unwrap_or([0.0; 6]);
    let nx = centered_count(b[0].abs().max(b[1].abs()) + spec.padding[0], dx);
    let ny = centered_count(b[2].abs().max(b[3].abs()) + spec.padding[1], dy);
    let below = ((spec.padding[2] - b[4].min(0.0)) / dz - 1e-9).ceil().max(1.0) as usize;
    let above = ((b[5].max(0.0) + spec.padding[2]) / dz - 1e-9).ceil().max(1.0) as usize;
    let nz = below + above;
    let origin = [-(nx as f64) / 2.0 * dx, -(ny as f64) / 2.0 * dy, -(below as f64) * dz];
    let mut grid = VoxelGrid::vacuum(spec.cell, [nx, ny, nz], origin);
    let z_index = |z: f64| -> i64 { ((z - origin[2]) / dz).round() as i64 };

    for block in &layout.blocks {
        block.material.validate()?;
        let tag = grid.material_id(VoxelMaterial::Dielectric(block.material))?;
        let (k0, k1) = (z_index(block.z[0]), z_index(block.z[1]));
        if k1 <= k0 {
            return Err(Error::Geometry {
                feature: block.name.clone(),
                reason: format!(
                    "thickness {:e} m is below one cell ({dz:e} m) and a dielectric cannot be a sheet",
                    block.z[1] - block.z[0]
                ),
            });
        }
        let tol = super::shapes::EDGE_TOLERANCE;
        let is: Vec<usize> = (0..nx)
            .filter(|&i| {
                let c = lateral_center(i, nx, dx);
                c >= block.x[0] - tol && c <= block.x[1] + tol
            })
            .collect();
        let js: Vec<usize> = (0..ny)
            .filter(|&j| {
                let c = lateral_center(j, ny, dy);
                c >= block.y[0] - tol && c <= block.y[1] + tol
            })
            .collect();
        if is.is_empty() || js.is_empty() {
            return Err(Error::Geometry {
                feature: block.name.clone(),
                reason: "narrower than one cell".into(),
            });
        }
        let k0 = k0.clamp(0, nz as i64) as usize;
        let k1 = k1.clamp(0, nz as i64) as usize;
        for k in k0..k1 {
            for &j in &js {
                for &i in &is {
                    let idx = grid.cell_index(i, j, k);
                    grid.cells[idx] = tag;
                }
            }
        }
    }

    for sheet in &layout.sheets {
        sheet.material.validate()?;
        if !sheet.material.is_sheet() {
            return Err(Error::Geometry {
                feature: sheet.name.clone(),
                reason: "sheet layers need a graphene or conductor material".into(),
            });
        }
        let tag = grid.material_id(VoxelMaterial::Sheet(sheet.material))?;
        let k = z_index(sheet.z);
        if k < 0 || k > nz as i64 {
            return Err(Error::Geometry {
                feature: sheet.name.clone(),
                reason: "sheet plane outside the grid".into(),
            });
        }
        let ops: Vec<ShapeOp> = sheet.ops.iter().map(|o| snap_thin(o, grid.dims, grid.cell)).collect();
        let mut faces = vec![false; nx * ny];
        faces.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            let y = lateral_center(j, ny, dy);
            for (i, f) in row.iter_mut().enumerate() {
                *f = covered(&ops, lateral_center(i, nx, dx), y);
            }
        });
        for op in ops.iter().filter(|o| o.paint == Paint::Add) {
            let hits = (0..ny).any(|j| {
                let y = lateral_center(j, ny, dy);
                (0..nx).any(|i| op.shape.contains(lateral_center(i, nx, dx), y))
            });
            if !hits {
                return Err(Error::Geometry {
                    feature: op.name.clone(),
                    reason: "thinner than one cell and not marked for widening".into(),
                });
            }
        }
        grid.sheets.push(SheetPlane {
            name: sheet.name.clone(),
            k: k as usize,
            material: tag,
            faces,
        });
    }

    if let Some(site) = layout.port {
        grid.port = Some(locate_port(&grid, site)?);
    }
    Ok(grid)
}

fn locate_port(grid: &VoxelGrid, site: super::layout::PortSite) -> Result<PortCells> {
    let [nx, ny, _] = grid.dims;
    let fail = |reason: &str| Error::Geometry {
        feature: "port".into(),
        reason: reason.into(),
    };
    let node = |axis: usize, v: f64| ((v - grid.origin[axis]) / grid.cell[axis]).round() as i64;
    let i = node(0, site.x);
    let (k0, k1) = (node(2, site.z[0]), node(2, site.z[1]));
    if i < 0 || i > nx as i64 || k1 <= k0 || k0 < 0 {
        return Err(fail("feed gap does not map onto the grid"));
    }
    let plane = grid
        .sheets
        .iter()
        .find(|s| s.k as i64 == k1)
        .ok_or_else(|| fail("no sheet at the top of the feed gap"))?;
    let i = i as usize;
    let j_site = (((site.y - grid.origin[1]) / grid.cell[1]).floor().max(0.0) as usize).min(ny - 1);
    // The line may leave the port toward either side; use whichever face column it covers.
    let column = [i, i.wrapping_sub(1)]
        .into_iter()
        .filter(|&c| c < nx)
        .find(|&c| (0..ny).any(|j| plane.faces[c + nx * j]))
        .ok_or_else(|| fail("feed line does not reach the port plane"))?;
    let covered_row = |j: usize| plane.faces[column + nx * j];
    let start = (0..ny)
        .min_by_key(|&j| (j as i64 - j_site as i64).abs() + if covered_row(j) { 0 } else { ny as i64 })
        .filter(|&j| covered_row(j))
        .ok_or_else(|| fail("feed line does not reach the port plane"))?;
    let (mut lo, mut hi) = (start, start);
    while lo > 0 && covered_row(lo - 1) {
        lo -= 1;
    }
    while hi + 1 < ny && covered_row(hi + 1) {
        hi += 1;
    }
    Ok(PortCells {
        i,
        columns: (lo..=hi + 1).collect(),
        k: [k0 as usize, k1 as usize],
    })
}

// ---------------------------------------------------------------------------
// Dump format: ASCII header terminated by a line `end`, then little-endian u8
// tags: nx*ny*nz cell tags (x fastest), then nx*ny face tags per sheet plane
// (material id where covered, 0 elsewhere).

const MAGIC: &str = "PRSVOX 1";

fn material_line(m: &VoxelMaterial) -> String {
    match m {
        VoxelMaterial::Vacuum => "vacuum".into(),
        VoxelMaterial::Dielectric(d) => format!("dielectric {:e} {:e}", d.eps_r, d.tan_delta),
        VoxelMaterial::Sheet(MaterialSpec::Graphene(g)) => {
            format!("graphene {:e} {:e} {:e}", g.mu_c, g.tau, g.temperature)
        }
        VoxelMaterial::Sheet(MaterialSpec::ConductorSheet(c)) => {
            format!("conductor {:e} {:e}", c.sigma_dc, c.thickness)
        }
        VoxelMaterial::Sheet(MaterialSpec::Dielectric(d)) => {
            format!("dielectric {:e} {:e}", d.eps_r, d.tan_delta)
        }
    }
}

impl VoxelGrid {
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "dims {} {} {}", self.dims[0], self.dims[1], self.dims[2])?;
        writeln!(w, "spacing {:e} {:e} {:e}", self.cell[0], self.cell[1], self.cell[2])?;
        writeln!(w, "origin {:e} {:e} {:e}", self.origin[0], self.origin[1], self.origin[2])?;
        writeln!(w, "materials {}", self.materials.len())?;
        for (n, m) in self.materials.iter().enumerate() {
            writeln!(w, "{n} {}", material_line(m))?;
        }
        writeln!(w, "sheets {}", self.sheets.len())?;
        for s in &self.sheets {
            writeln!(w, "{} {} {}", s.k, s.material, s.name.replace(' ', "_"))?;
        }
        match &self.port {
            Some(p) => {
                let cols: Vec<String> = p.columns.iter().map(|c| c.to_string()).collect();
                writeln!(w, "port {} {} {} {}", p.i, p.k[0], p.k[1], cols.join(","))?;
            }
            None => writeln!(w, "port none")?,
        }
        writeln!(w, "end")?;
        w.write_all(&self.cells)?;
        for s in &self.sheets {
            let tags: Vec<u8> = s.faces.iter().map(|&f| if f { s.material } else { 0 }).collect();
            w.write_all(&tags)?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(mut r: R) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut line = String::new();
        let mut next_line = |r: &mut R| -> io::Result<String> {
            line.clear();
            r.read_line(&mut line)?;
            Ok(line.trim_end().to_string())
        };
        if next_line(&mut r)? != MAGIC {
            return Err(bad("not a voxel dump"));
        }
        let nums = |s: &str, key: &str| -> io::Result<Vec<f64>> {
            let rest = s.strip_prefix(key).ok_or_else(|| bad(key))?;
            rest.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(key)))
                .collect()
        };
        let dims = nums(&next_line(&mut r)?, "dims")?;
        let spacing = nums(&next_line(&mut r)?, "spacing")?;
        let origin = nums(&next_line(&mut r)?, "origin")?;
        if dims.len() != 3 || spacing.len() != 3 || origin.len() != 3 {
            return Err(bad("header"));
        }
        let dims = [dims[0] as usize, dims[1] as usize, dims[2] as usize];
        let n_mat = nums(&next_line(&mut r)?, "materials")?[0] as usize;
        let mut materials = Vec::with_capacity(n_mat);
        for _ in 0..n_mat {
            let l = next_line(&mut r)?;
            let t: Vec<&str> = l.split_whitespace().collect();
            let p = |i: usize| -> io::Result<f64> { t.get(i).ok_or_else(|| bad("material"))?.parse().map_err(|_| bad("material")) };
            materials.push(match t.get(1).copied() {
                Some("vacuum") => VoxelMaterial::Vacuum,
                Some("dielectric") => VoxelMaterial::Dielectric(DielectricSpec {
                    eps_r: p(2)?,
                    tan_delta: p(3)?,
                }),
                Some("graphene") => VoxelMaterial::Sheet(MaterialSpec::Graphene(GrapheneSpec {
                    mu_c: p(2)?,
                    tau: p(3)?,
                    temperature: p(4)?,
                })),
                Some("conductor") => VoxelMaterial::Sheet(MaterialSpec::ConductorSheet(ConductorSheetSpec {
                    sigma_dc: p(2)?,
                    thickness: p(3)?,
                })),
                _ => return Err(bad("material kind")),
            });
        }
        let n_sheets = nums(&next_line(&mut r)?, "sheets")?[0] as usize;
        let mut sheet_heads = Vec::with_capacity(n_sheets);
        for _ in 0..n_sheets {
            let l = next_line(&mut r)?;
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() < 3 {
                return Err(bad("sheet"));
            }
            let k: usize = t[0].parse().map_err(|_| bad("sheet"))?;
            let m: u8 = t[1].parse().map_err(|_| bad("sheet"))?;
            sheet_heads.push((k, m, t[2..].join(" ").replace('_', " ")));
        }
        let port_line = next_line(&mut r)?;
        let port = if port_line == "port none" {
            None
        } else {
            let t: Vec<&str> = port_line.split_whitespace().collect();
            if t.len() != 5 {
                return Err(bad("port"));
            }
            let u = |s: &str| s.parse::<usize>().map_err(|_| bad("port"));
            Some(PortCells {
                i: u(t[1])?,
                k: [u(t[2])?, u(t[3])?],
                columns: t[4].split(',').map(u).collect::<io::Result<_>>()?,
            })
        };
        if next_line(&mut r)? != "end" {
            return Err(bad("missing end"));
        }
        let n = dims[0] * dims[1] * dims[2];
        let mut cells = vec![0u8; n];
        r.read_exact(&mut cells)?;
        let mut sheets = Vec::with_capacity(n_sheets);
        for (k, material, name) in sheet_heads {
            let mut tags = vec![0u8; dims[0] * dims[1]];
            r.read_exact(&mut tags)?;
            sheets.push(SheetPlane {
                name,
                k,
                material,
                faces: tags.iter().map(|&t| t != 0).collect(),
            });
        }
        Ok(VoxelGrid {
            cell: [spacing[0], spacing[1], spacing[2]],
            dims,
            origin: [origin[0], origin[1], origin[2]],
            materials,
            cells,
            sheets,
            port,
        })
    }
}
