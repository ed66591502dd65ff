//! Planar shapes and an ordered paint/cut list used to describe sheet layouts.

use serde::{Deserialize, Serialize};

/// Tolerance (m) within which a point on a boundary counts as inside.
pub(crate) const EDGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    /// Simple polygon, vertices in order.
    Polygon(Vec<[f64; 2]>),
}

impl Shape {
    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Shape::Rect {
            x0: x0.min(x1),
            x1: x0.max(x1),
            y0: y0.min(y1),
            y1: y0.max(y1),
        }
    }

    pub fn centered_rect(cx: f64, cy: f64, width_x: f64, width_y: f64) -> Self {
        Self::rect(cx - width_x / 2.0, cx + width_x / 2.0, cy - width_y / 2.0, cy + width_y / 2.0)
    }

    /// Equilateral triangle of side `side`, centroid at (cx, cy), apex toward +y.
    pub fn triangle_up(cx: f64, cy: f64, side: f64) -> Self {
        let r = side / 3f64.sqrt();
        let verts = [90.0f64, 210.0, 330.0]
            .iter()
            .map(|a| {
                let t = a.to_radians();
                [cx + r * t.cos(), cy + r * t.sin()]
            })
            .collect();
        Shape::Polygon(verts)
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Rect { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Shape::Polygon(v) => {
                let n = v.len();
                let twice: f64 = (0..n)
                    .map(|i| {
                        let (a, b) = (v[i], v[(i + 1) % n]);
                        a[0] * b[1] - b[0] * a[1]
                    })
                    .sum();
                twice.abs() / 2.0
            }
        }
    }

    pub fn bounds(&self) -> [f64; 4] {
        match self {
            Shape::Rect { x0, x1, y0, y1 } => [*x0, *x1, *y0, *y1],
            Shape::Polygon(v) => v.iter().fold(
                [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
                |b, p| [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])],
            ),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Rect { x0, x1, y0, y1 } => {
                x >= x0 - EDGE_TOLERANCE
                    && x <= x1 + EDGE_TOLERANCE
                    && y >= y0 - EDGE_TOLERANCE
                    && y <= y1 + EDGE_TOLERANCE
            }
            Shape::Polygon(v) => polygon_contains(v, x, y),
        }
    }

    pub fn mirrored_x(&self) -> Shape {
        match self {
            Shape::Rect { x0, x1, y0, y1 } => Shape::rect(-x1, -x0, *y0, *y1),
            Shape::Polygon(v) => Shape::Polygon(v.iter().rev().map(|p| [-p[0], p[1]]).collect()),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Shape {
        match self {
            Shape::Rect { x0, x1, y0, y1 } => Shape::rect(x0 + dx, x1 + dx, y0 + dy, y1 + dy),
            Shape::Polygon(v) => Shape::Polygon(v.iter().map(|p| [p[0] + dx, p[1] + dy]).collect()),
        }
    }
}

fn segment_distance_sq(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len_sq = abx * abx + aby * aby;
    let t = if len_sq > 0.0 {
        ((apx * abx + apy * aby) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (dx, dy) = (apx - t * abx, apy - t * aby);
    dx * dx + dy * dy
}

/// Closed polygon test: boundary points (within tolerance) are inside.
/// Symmetric under mirroring since it only depends on distances and parity.
fn polygon_contains(v: &[[f64; 2]], x: f64, y: f64) -> bool {
    let n = v.len();
    if n < 3 {
        return false;
    }
    let p = [x, y];
    if (0..n).any(|i| segment_distance_sq(p, v[i], v[(i + 1) % n]) <= EDGE_TOLERANCE * EDGE_TOLERANCE) {
        return true;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > y) != (b[1] > y) {
            let xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Paint {
    Add,
    Cut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeOp {
    pub name: String,
    pub paint: Paint,
    pub shape: Shape,
    /// Rectangles narrower than one cell are widened to exactly one cell.
    #[serde(default)]
    pub widen_to_cell: bool,
}

impl ShapeOp {
    pub fn add(name: impl Into<String>, shape: Shape) -> Self {
        Self {
            name: name.into(),
            paint: Paint::Add,
            shape,
            widen_to_cell: false,
        }
    }

    pub fn cut(name: impl Into<String>, shape: Shape) -> Self {
        Self {
            name: name.into(),
            paint: Paint::Cut,
            shape,
            widen_to_cell: false,
        }
    }

    pub fn widened(mut self) -> Self {
        self.widen_to_cell = true;
        self
    }
}

/// Ordered paint/cut list; the last operation covering a point decides it.
pub fn covered(ops: &[ShapeOp], x: f64, y: f64) -> bool {
    ops.iter()
        .rev()
        .find(|op| op.shape.contains(x, y))
        .map(|op| op.paint == Paint::Add)
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_area_and_height() {
        let t = Shape::triangle_up(0.0, 0.0, 17.32e-6);
        assert_relative_eq!(t.area(), 3f64.sqrt() / 4.0 * 17.32e-6f64.powi(2), max_relative = 1e-12);
        let b = t.bounds();
        assert_relative_eq!(b[3] - b[2], 17.32e-6 * 3f64.sqrt() / 2.0, max_relative = 1e-12);
        assert_relative_eq!(b[1] - b[0], 17.32e-6, max_relative = 1e-12);
        assert!(t.contains(0.0, 0.0));
        assert!(!t.contains(0.0, -9e-6));
    }

    #[test]
    fn cut_then_add_order() {
        let ops = vec![
            ShapeOp::add("plate", Shape::rect(0.0, 10.0, 0.0, 10.0)),
            ShapeOp::cut("hole", Shape::rect(2.0, 8.0, 2.0, 8.0)),
            ShapeOp::add("island", Shape::rect(4.0, 6.0, 4.0, 6.0)),
        ];
        assert!(covered(&ops, 1.0, 1.0));
        assert!(!covered(&ops, 3.0, 3.0));
        assert!(covered(&ops, 5.0, 5.0));
        assert!(!covered(&ops, 11.0, 5.0));
    }
}
