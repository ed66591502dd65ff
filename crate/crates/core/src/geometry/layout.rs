use serde::{Deserialize, Serialize};

use super::shapes::{Paint, ShapeOp};
use crate::materials::{DielectricSpec, MaterialSpec};

/// Axis-aligned dielectric box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricBlock {
    pub name: String,
    pub material: DielectricSpec,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

/// Zero-thickness conductive sheet in the plane `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetLayer {
    pub name: String,
    pub material: MaterialSpec,
    pub z: f64,
    pub ops: Vec<ShapeOp>,
}

/// Vertical feed gap between the ground and the feed line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortSite {
    pub x: f64,
    pub y: f64,
    pub z: [f64; 2],
}

/// Flattened 3D description, ready for voxelization. Later entries win where
/// blocks overlap.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub blocks: Vec<DielectricBlock>,
    pub sheets: Vec<SheetLayer>,
    pub port: Option<PortSite>,
}

impl Layout {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty() && self.sheets.is_empty()
    }

    /// [xmin, xmax, ymin, ymax, zmin, zmax]; `None` for an empty layout.
    pub fn bounds(&self) -> Option<[f64; 6]> {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut grow = |x: f64, y: f64, z: f64| {
            b[0] = b[0].min(x);
            b[1] = b[1].max(x);
            b[2] = b[2].min(y);
            b[3] = b[3].max(y);
            b[4] = b[4].min(z);
            b[5] = b[5].max(z);
        };
        for blk in &self.blocks {
            grow(blk.x[0], blk.y[0], blk.z[0]);
            grow(blk.x[1], blk.y[1], blk.z[1]);
        }
        for s in &self.sheets {
            for op in s.ops.iter().filter(|o| o.paint == Paint::Add) {
                let [x0, x1, y0, y1] = op.shape.bounds();
                grow(x0, y0, s.z);
                grow(x1, y1, s.z);
            }
        }
        b[0].is_finite().then_some(b)
    }

    /// Reflection through the plane x = 0.
    pub fn mirrored_x(&self) -> Layout {
        Layout {
            blocks: self
                .blocks
                .iter()
                .map(|b| DielectricBlock {
                    x: [-b.x[1], -b.x[0]],
                    ..b.clone()
                })
                .collect(),
            sheets: self
                .sheets
                .iter()
                .map(|s| SheetLayer {
                    ops: s
                        .ops
                        .iter()
                        .map(|o| ShapeOp {
                            shape: o.shape.mirrored_x(),
                            ..o.clone()
                        })
                        .collect(),
                    ..s.clone()
                })
                .collect(),
            port: self.port.map(|p| PortSite { x: -p.x, ..p }),
        }
    }
}
