use super::config::Boundary;

/// Index arithmetic for the staggered field arrays.
///
/// Every component is stored in an array of `(n+1)` entries per axis, where
/// `n` is the cell count. On periodic axes node `n` is a ghost copy of node 0
/// and half-index `n` a ghost of half-index 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lattice {
    pub cells: [usize; 3],
    pub stride: [usize; 3],
    pub len: usize,
    pub boundary: [Boundary; 3],
}

impl Lattice {
    pub fn new(cells: [usize; 3], boundary: [Boundary; 3]) -> Self {
        let stride = [1, cells[0] + 1, (cells[0] + 1) * (cells[1] + 1)];
        Self {
            cells,
            stride,
            len: stride[2] * (cells[2] + 1),
            boundary,
        }
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.stride[1] * j + self.stride[2] * k
    }

    pub fn plane(&self) -> usize {
        self.stride[2]
    }

    /// Update range of electric component `c` along axis `a`.
    pub fn e_range(&self, c: usize, a: usize) -> std::ops::Range<usize> {
        let n = self.cells[a];
        if c == a {
            0..n
        } else if self.boundary[a] == Boundary::Periodic {
            1..n + 1
        } else {
            1..n
        }
    }

    /// Update range of magnetic component `c` along axis `a`.
    pub fn h_range(&self, c: usize, a: usize) -> std::ops::Range<usize> {
        let n = self.cells[a];
        if c == a {
            0..n + 1
        } else {
            0..n
        }
    }

    pub fn e_ranges(&self, c: usize) -> [std::ops::Range<usize>; 3] {
        [self.e_range(c, 0), self.e_range(c, 1), self.e_range(c, 2)]
    }

    pub fn h_ranges(&self, c: usize) -> [std::ops::Range<usize>; 3] {
        [self.h_range(c, 0), self.h_range(c, 1), self.h_range(c, 2)]
    }

    /// Copies plane `from` onto plane `to` along `axis`.
    pub fn copy_plane(&self, field: &mut [f64], axis: usize, from: usize, to: usize) {
        let (b, c) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for q in 0..=self.cells[c] {
            for p in 0..=self.cells[b] {
                let base = p * self.stride[b] + q * self.stride[c];
                field[base + to * self.stride[axis]] = field[base + from * self.stride[axis]];
            }
        }
    }

    /// Refreshes ghost layers of electric components after an update.
    pub fn sync_e(&self, e: &mut [Vec<f64>; 3]) {
        for a in 0..3 {
            if self.boundary[a] != Boundary::Periodic {
                continue;
            }
            for (c, field) in e.iter_mut().enumerate() {
                if c != a {
                    self.copy_plane(field, a, self.cells[a], 0);
                }
            }
        }
    }

    pub fn sync_h(&self, h: &mut [Vec<f64>; 3]) {
        for a in 0..3 {
            if self.boundary[a] != Boundary::Periodic {
                continue;
            }
            for (c, field) in h.iter_mut().enumerate() {
                if c != a {
                    self.copy_plane(field, a, 0, self.cells[a]);
                }
            }
        }
    }
}
