use std::collections::HashMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{Boundary, Component, SimulationConfig};
use super::cpml::Cpml;
use super::lattice::Lattice;
use super::ntff::{NearFieldData, NtffAccumulator};
use super::port::PortRecord;
use crate::constants::{angular, EPS0, MU0};
use crate::error::{Error, Result};
use crate::geometry::{VoxelGrid, VoxelMaterial};
use crate::materials::{drude_ade_coefficients, MaterialSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Coeff {
    ca: f64,
    cb: f64,
    eps: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Copy)]
struct AdeEdge {
    component: usize,
    index: usize,
    current: f64,
    e_prev: f64,
    decay: f64,
    drive: f64,
    correction: f64,
}

#[derive(Debug, Clone)]
struct Port {
    /// Edge indices per column.
    columns: Vec<Vec<usize>>,
    edge_resistance: f64,
    edge_voltage_scale: f64,
    impedance: f64,
    v_prev: f64,
    record: PortRecord,
}

#[derive(Debug, Clone)]
struct Block {
    component: usize,
    electric: bool,
    indices: Vec<usize>,
    amplitude: f64,
}

/// Time series of a probe; electric samples are at `(n+1) dt`, magnetic at `(n+½) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub component: Component,
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub port: Option<PortRecord>,
    pub probes: Vec<ProbeRecord>,
    pub near_field: Option<NearFieldData>,
    pub steps: usize,
    pub dt: f64,
    /// Energy decayed below the threshold before the step limit.
    pub converged: bool,
    pub peak_energy: f64,
    pub final_energy: f64,
    pub wall_clock: Duration,
    pub cell_count: usize,
}

pub struct Solver {
    config: SimulationConfig,
    lat: Lattice,
    offset: [usize; 3],
    cell: [f64; 3],
    dt: f64,
    e: [Vec<f64>; 3],
    h: [Vec<f64>; 3],
    mat: [Vec<u16>; 3],
    table: Vec<Coeff>,
    ade: Vec<AdeEdge>,
    cpml: Cpml,
    port: Option<Port>,
    sources: Vec<Block>,
    probes: Vec<(Block, ProbeRecord)>,
    ntff: Option<NtffAccumulator>,
    step: usize,
}

fn cell_properties(grid: &VoxelGrid, loss_omega: f64) -> Vec<(f64, f64)> {
    grid.materials
        .iter()
        .map(|m| match m {
            VoxelMaterial::Dielectric(d) => (d.eps_r, loss_omega * EPS0 * d.eps_r * d.tan_delta),
            _ => (1.0, 0.0),
        })
        .collect()
}

struct TableBuilder {
    table: Vec<Coeff>,
    lookup: HashMap<[u64; 4], u16>,
    dt: f64,
}

impl TableBuilder {
    fn insert(&mut self, c: Coeff) -> Result<u16> {
        let key = [c.ca.to_bits(), c.cb.to_bits(), c.eps.to_bits(), c.sigma.to_bits()];
        if let Some(&id) = self.lookup.get(&key) {
            return Ok(id);
        }
        if self.table.len() >= u16::MAX as usize {
            return Err(Error::param("grid", "too many distinct edge materials"));
        }
        self.table.push(c);
        let id = (self.table.len() - 1) as u16;
        self.lookup.insert(key, id);
        Ok(id)
    }

    /// Exponential update for an edge with conductivity `sigma`.
    fn lossy(&mut self, eps: f64, sigma: f64) -> Result<u16> {
        let (ca, cb) = if sigma > 0.0 {
            let ca = (-sigma * self.dt / eps).exp();
            (ca, (1.0 - ca) / sigma)
        } else {
            (1.0, self.dt / eps)
        };
        self.insert(Coeff { ca, cb, eps, sigma })
    }

    /// Trapezoidal update with total half-conductance `s`.
    fn trapezoid(&mut self, eps: f64, s: f64) -> Result<u16> {
        let a = eps / self.dt;
        self.insert(Coeff {
            ca: (a - s) / (a + s),
            cb: 1.0 / (a + s),
            eps,
            sigma: 2.0 * s,
        })
    }
}

impl Solver {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let grid = &config.grid;
        let dt = config.time_step();
        let boundary = config.boundaries;
        let mut offset = [0; 3];
        let mut cells = grid.dims;
        for a in 0..3 {
            if boundary[a] == Boundary::Cpml {
                offset[a] = config.cpml.layers;
                cells[a] += 2 * config.cpml.layers;
            }
            if cells[a] == 0 {
                return Err(Error::param("grid", "every axis needs at least one cell"));
            }
        }
        let lat = Lattice::new(cells, boundary);
        let cell = grid.cell;
        let props = cell_properties(grid, angular(config.loss_frequency));
        let mut builder = TableBuilder {
            table: Vec::new(),
            lookup: HashMap::new(),
            dt,
        };

        // Cell tag at solver cell coordinates, extruding into the absorbing layers.
        let dims = grid.dims;
        let tag_at = |c: [isize; 3]| -> u8 {
            let mut v = [0usize; 3];
            for a in 0..3 {
                let x = c[a] - offset[a] as isize;
                let n = dims[a] as isize;
                v[a] = if boundary[a] == Boundary::Periodic {
                    x.rem_euclid(n) as usize
                } else {
                    x.clamp(0, n - 1) as usize
                };
            }
            grid.cell_tag(v[0], v[1], v[2])
        };

        // Background dielectric coefficients.
        let mut background: HashMap<[u8; 4], u16> = HashMap::new();
        let mut mat: [Vec<u16>; 3] = [vec![0; lat.len], vec![0; lat.len], vec![0; lat.len]];
        for c in 0..3 {
            let (b1, b2) = ((c + 1) % 3, (c + 2) % 3);
            for k in 0..=cells[2] {
                for j in 0..=cells[1] {
                    for i in 0..=cells[0] {
                        let p = [i as isize, j as isize, k as isize];
                        let mut tags = [0u8; 4];
                        let mut n = 0;
                        for d1 in [-1isize, 0] {
                            for d2 in [-1isize, 0] {
                                let mut q = p;
                                q[b1] += d1;
                                q[b2] += d2;
                                tags[n] = tag_at(q);
                                n += 1;
                            }
                        }
                        let id = match background.get(&tags) {
                            Some(&id) => id,
                            None => {
                                let (eps, sigma) = tags.iter().fold((0.0, 0.0), |acc, &t| {
                                    let (e, s) = props[t as usize];
                                    (acc.0 + 0.25 * e, acc.1 + 0.25 * s)
                                });
                                let id = builder.lossy(eps * EPS0, sigma)?;
                                background.insert(tags, id);
                                id
                            }
                        };
                        mat[c][lat.index(i, j, k)] = id;
                    }
                }
            }
        }
        let edge_eps_sigma = |builder: &TableBuilder, id: u16| -> (f64, f64) {
            let c = builder.table[id as usize];
            (c.eps, c.sigma)
        };

        // Sheets on z planes: tangential Ex and Ey edges.
        let mut ade = Vec::new();
        let dz = cell[2];
        for sheet in &grid.sheets {
            let k = sheet.k + offset[2];
            let material = match grid.materials[sheet.material as usize] {
                VoxelMaterial::Sheet(m) => m,
                _ => return Err(Error::param("grid", "sheet plane tagged with a non-sheet material")),
            };
            let (nx, ny) = (dims[0], dims[1]);
            let face = |fi: isize, fj: isize| -> bool {
                let wrap = |x: isize, n: usize, a: usize| -> Option<usize> {
                    if boundary[a] == Boundary::Periodic {
                        Some(x.rem_euclid(n as isize) as usize)
                    } else if x >= 0 && x < n as isize {
                        Some(x as usize)
                    } else {
                        None
                    }
                };
                match (wrap(fi, nx, 0), wrap(fj, ny, 1)) {
                    (Some(i), Some(j)) => sheet.faces[i + nx * j],
                    _ => false,
                }
            };
            for c in 0..2 {
                for j in 0..=cells[1] {
                    for i in 0..=cells[0] {
                        let (vi, vj) = (i as isize - offset[0] as isize, j as isize - offset[1] as isize);
                        let hit = if c == 0 {
                            face(vi, vj - 1) || face(vi, vj)
                        } else {
                            face(vi - 1, vj) || face(vi, vj)
                        };
                        let in_range = vi >= 0 && vj >= 0 && (vi as usize) <= nx && (vj as usize) <= ny;
                        if !hit || !in_range {
                            continue;
                        }
                        let g = lat.index(i, j, k);
                        let (eps, sigma) = edge_eps_sigma(&builder, mat[c][g]);
                        match material {
                            MaterialSpec::ConductorSheet(cs) => {
                                mat[c][g] = builder.lossy(eps, sigma + cs.sheet_conductance() / dz)?;
                            }
                            MaterialSpec::Graphene(gs) => {
                                let co = drude_ade_coefficients(&gs, dt)?;
                                let id = builder.trapezoid(eps, 0.5 * sigma + co.drive / (2.0 * dz))?;
                                mat[c][g] = id;
                                ade.push(AdeEdge {
                                    component: c,
                                    index: g,
                                    current: 0.0,
                                    e_prev: 0.0,
                                    decay: co.decay,
                                    drive: co.drive,
                                    correction: builder.table[id as usize].cb * (1.0 + co.decay) / (2.0 * dz),
                                });
                            }
                            MaterialSpec::Dielectric(_) => {
                                return Err(Error::param("grid", "dielectric cannot be a sheet"));
                            }
                        }
                    }
                }
            }
        }
        ade.sort_by_key(|a| (a.component, a.index));
        ade.dedup_by_key(|a| (a.component, a.index));

        let to_solver = |c: usize, v: [usize; 3]| -> usize {
            let mut s = [0usize; 3];
            for a in 0..3 {
                s[a] = v[a] + offset[a];
                if boundary[a] == Boundary::Periodic && a != c && s[a] == 0 {
                    s[a] = cells[a];
                }
            }
            lat.index(s[0], s[1], s[2])
        };

        let port = match &config.port {
            Some(spec) => {
                let pc = &spec.cells;
                let n_ser = pc.k[1] - pc.k[0];
                let n_par = pc.columns.len();
                let r_e = spec.impedance * n_par as f64 / n_ser as f64;
                let sigma_port = cell[2] / (r_e * cell[0] * cell[1]);
                let mut columns = Vec::new();
                for &j in &pc.columns {
                    let mut col = Vec::new();
                    for k in pc.k[0]..pc.k[1] {
                        let g = to_solver(2, [pc.i, j, k]);
                        let (eps, sigma) = edge_eps_sigma(&builder, mat[2][g]);
                        mat[2][g] = builder.trapezoid(eps, 0.5 * (sigma + sigma_port))?;
                        col.push(g);
                    }
                    columns.push(col);
                }
                Some(Port {
                    columns,
                    edge_resistance: r_e,
                    edge_voltage_scale: 1.0 / n_ser as f64,
                    impedance: spec.impedance,
                    v_prev: 0.0,
                    record: PortRecord::new(dt, spec.impedance, config.source),
                })
            }
            None => None,
        };

        let block = |component: Component, lo: [usize; 3], hi: [usize; 3], amplitude: f64| -> Block {
            let c = component.axis();
            let mut indices = Vec::new();
            for k in lo[2]..hi[2] {
                for j in lo[1]..hi[1] {
                    for i in lo[0]..hi[0] {
                        let idx = if component.is_electric() {
                            to_solver(c, [i, j, k])
                        } else {
                            lat.index(i + offset[0], j + offset[1], k + offset[2])
                        };
                        indices.push(idx);
                    }
                }
            }
            Block {
                component: c,
                electric: component.is_electric(),
                indices,
                amplitude,
            }
        };
        let sources = config
            .currents
            .iter()
            .map(|s| block(s.component, s.lo, s.hi, s.amplitude))
            .collect();
        let probes = config
            .probes
            .iter()
            .map(|p| {
                let b = block(p.component, p.lo, p.hi, 1.0);
                let t0 = if p.component.is_electric() { dt } else { 0.5 * dt };
                (
                    b,
                    ProbeRecord {
                        component: p.component,
                        t0,
                        dt,
                        values: Vec::new(),
                    },
                )
            })
            .collect();

        for a in 0..3 {
            if boundary[a] == Boundary::Cpml && cells[a] <= 2 * config.cpml.layers {
                return Err(Error::param("cpml.layers", "absorbing layers fill the whole axis"));
            }
        }
        let mut cpml = Cpml::new(&lat, &config.cpml, cell, dt);
        cpml.set_coefficients(&lat, dt / MU0, |c, g| builder.table[mat[c][g] as usize].cb);
        let ntff = match &config.ntff {
            Some(spec) => Some(NtffAccumulator::new(grid, &lat, offset, spec, dt)?),
            None => None,
        };
        let table = builder.table;
        Ok(Self {
            lat,
            offset,
            cell,
            dt,
            e: [vec![0.0; lat.len], vec![0.0; lat.len], vec![0.0; lat.len]],
            h: [vec![0.0; lat.len], vec![0.0; lat.len], vec![0.0; lat.len]],
            mat,
            table,
            ade,
            cpml,
            port,
            sources,
            probes,
            ntff,
            step: 0,
            config,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    /// Total cells including absorbing layers.
    pub fn cell_count(&self) -> usize {
        self.lat.cells.iter().product()
    }

    /// Solver-grid cell counts, including absorbing layers.
    pub fn dims(&self) -> [usize; 3] {
        self.lat.cells
    }

    pub fn offset(&self) -> [usize; 3] {
        self.offset
    }

    /// Field value at solver-grid indices.
    pub fn field(&self, component: Component, i: usize, j: usize, k: usize) -> f64 {
        let g = self.lat.index(i, j, k);
        let c = component.axis();
        if component.is_electric() {
            self.e[c][g]
        } else {
            self.h[c][g]
        }
    }

    fn update_h(&mut self, track: bool) -> f64 {
        let lat = self.lat;
        let plane = lat.plane();
        let (sy, sz) = (lat.stride[1], lat.stride[2]);
        let ch = self.dt / MU0;
        let (cx, cy, cz) = (ch / self.cell[0], ch / self.cell[1], ch / self.cell[2]);
        let [ex, ey, ez] = &self.e;
        let [hx, hy, hz] = &mut self.h;
        let (rx, ry, rz) = (lat.h_ranges(0), lat.h_ranges(1), lat.h_ranges(2));
        let sums: Vec<f64> = hx
            .par_chunks_mut(plane)
            .zip(hy.par_chunks_mut(plane))
            .zip(hz.par_chunks_mut(plane))
            .enumerate()
            .map(|(k, ((hx, hy), hz))| {
                let mut acc = 0.0;
                if rx[2].contains(&k) {
                    let (i0, i1) = (rx[0].start, rx[0].end);
                    for j in rx[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let h = &mut hx[r + i0..r + i1];
                        let n = h.len();
                        let (ez0, ez1) = (&ez[g + i0..][..n], &ez[g + sy + i0..][..n]);
                        let (ey0, ey1) = (&ey[g + i0..][..n], &ey[g + sz + i0..][..n]);
                        for q in 0..n {
                            let old = h[q];
                            let new = old - (cy * (ez1[q] - ez0[q]) - cz * (ey1[q] - ey0[q]));
                            h[q] = new;
                            if track {
                                acc += old * new;
                            }
                        }
                    }
                }
                if ry[2].contains(&k) {
                    let (i0, i1) = (ry[0].start, ry[0].end);
                    for j in ry[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let h = &mut hy[r + i0..r + i1];
                        let n = h.len();
                        let (ex0, ex1) = (&ex[g + i0..][..n], &ex[g + sz + i0..][..n]);
                        let (ez0, ez1) = (&ez[g + i0..][..n], &ez[g + i0 + 1..][..n]);
                        for q in 0..n {
                            let old = h[q];
                            let new = old - (cz * (ex1[q] - ex0[q]) - cx * (ez1[q] - ez0[q]));
                            h[q] = new;
                            if track {
                                acc += old * new;
                            }
                        }
                    }
                }
                if rz[2].contains(&k) {
                    let (i0, i1) = (rz[0].start, rz[0].end);
                    for j in rz[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let h = &mut hz[r + i0..r + i1];
                        let n = h.len();
                        let (ey0, ey1) = (&ey[g + i0..][..n], &ey[g + i0 + 1..][..n]);
                        let (ex0, ex1) = (&ex[g + i0..][..n], &ex[g + sy + i0..][..n]);
                        for q in 0..n {
                            let old = h[q];
                            let new = old - (cx * (ey1[q] - ey0[q]) - cy * (ex1[q] - ex0[q]));
                            h[q] = new;
                            if track {
                                acc += old * new;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        sums.iter().sum()
    }

    fn update_e(&mut self) {
        let lat = self.lat;
        let plane = lat.plane();
        let (sy, sz) = (lat.stride[1], lat.stride[2]);
        let (ix, iy, iz) = (1.0 / self.cell[0], 1.0 / self.cell[1], 1.0 / self.cell[2]);
        let [hx, hy, hz] = &self.h;
        let [mx, my, mz] = &self.mat;
        let table = &self.table;
        let [ex, ey, ez] = &mut self.e;
        let (rx, ry, rz) = (lat.e_ranges(0), lat.e_ranges(1), lat.e_ranges(2));
        ex.par_chunks_mut(plane)
            .zip(ey.par_chunks_mut(plane))
            .zip(ez.par_chunks_mut(plane))
            .enumerate()
            .for_each(|(k, ((ex, ey), ez))| {
                if rx[2].contains(&k) {
                    let (i0, i1) = (rx[0].start, rx[0].end);
                    for j in rx[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let e = &mut ex[r + i0..r + i1];
                        let n = e.len();
                        let m = &mx[g + i0..][..n];
                        let (hz0, hz1) = (&hz[g - sy + i0..][..n], &hz[g + i0..][..n]);
                        let (hy0, hy1) = (&hy[g - sz + i0..][..n], &hy[g + i0..][..n]);
                        for q in 0..n {
                            let c = table[m[q] as usize];
                            e[q] = c.ca * e[q] + c.cb * ((hz1[q] - hz0[q]) * iy - (hy1[q] - hy0[q]) * iz);
                        }
                    }
                }
                if ry[2].contains(&k) {
                    let (i0, i1) = (ry[0].start, ry[0].end);
                    for j in ry[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let e = &mut ey[r + i0..r + i1];
                        let n = e.len();
                        let m = &my[g + i0..][..n];
                        let (hx0, hx1) = (&hx[g - sz + i0..][..n], &hx[g + i0..][..n]);
                        let (hz0, hz1) = (&hz[g + i0 - 1..][..n], &hz[g + i0..][..n]);
                        for q in 0..n {
                            let c = table[m[q] as usize];
                            e[q] = c.ca * e[q] + c.cb * ((hx1[q] - hx0[q]) * iz - (hz1[q] - hz0[q]) * ix);
                        }
                    }
                }
                if rz[2].contains(&k) {
                    let (i0, i1) = (rz[0].start, rz[0].end);
                    for j in rz[1].clone() {
                        let (r, g) = (j * sy, k * sz + j * sy);
                        let e = &mut ez[r + i0..r + i1];
                        let n = e.len();
                        let m = &mz[g + i0..][..n];
                        let (hy0, hy1) = (&hy[g + i0 - 1..][..n], &hy[g + i0..][..n]);
                        let (hx0, hx1) = (&hx[g - sy + i0..][..n], &hx[g + i0..][..n]);
                        for q in 0..n {
                            let c = table[m[q] as usize];
                            e[q] = c.ca * e[q] + c.cb * ((hy1[q] - hy0[q]) * ix - (hx1[q] - hx0[q]) * iy);
                        }
                    }
                }
            });
    }

    fn electric_energy(&self) -> f64 {
        let lat = self.lat;
        let plane = lat.plane();
        let table = &self.table;
        let sums: Vec<f64> = (0..=lat.cells[2])
            .into_par_iter()
            .map(|k| {
                let mut acc = 0.0;
                for c in 0..3 {
                    let r = lat.e_ranges(c);
                    if !r[2].contains(&k) {
                        continue;
                    }
                    for j in r[1].clone() {
                        for i in r[0].clone() {
                            let g = k * plane + j * lat.stride[1] + i;
                            let e = self.e[c][g];
                            acc += table[self.mat[c][g] as usize].eps * e * e;
                        }
                    }
                }
                acc
            })
            .collect();
        sums.iter().sum()
    }

    /// Advances one step; returns the discrete field energy (J) when `track` is set.
    ///
    /// The tracked quantity pairs H at the two half steps around the current
    /// E, which the scheme conserves exactly in a lossless closed cavity.
    pub fn step(&mut self, track: bool) -> Option<f64> {
        let n = self.step;
        let dt = self.dt;
        let t_half = (n as f64 + 0.5) * dt;
        let cross = self.update_h(track);
        let lat = self.lat;
        if !self.cpml.is_empty() {
            self.cpml.correct_h(&lat, &mut self.h, &self.e);
        }
        lat.sync_h(&mut self.h);
        let energy = track.then(|| {
            let dv = self.cell.iter().product::<f64>();
            0.5 * dv * (self.electric_energy() + MU0 * cross)
        });

        for a in &mut self.ade {
            a.e_prev = self.e[a.component][a.index];
        }
        self.update_e();
        if !self.cpml.is_empty() {
            self.cpml.correct_e(&lat, &mut self.e, &self.h);
        }
        let pulse = self.config.source.value(t_half);
        for s in &self.sources {
            let c = s.component;
            for &g in &s.indices {
                let cb = self.table[self.mat[c][g] as usize].cb;
                self.e[c][g] -= cb * s.amplitude * pulse;
            }
        }
        if let Some(port) = &mut self.port {
            let [dx, dy, _] = self.cell;
            let j_src = pulse * port.edge_voltage_scale / (port.edge_resistance * dx * dy);
            for col in &port.columns {
                for &g in col {
                    let cb = self.table[self.mat[2][g] as usize].cb;
                    self.e[2][g] -= cb * j_src;
                }
            }
        }
        for a in &mut self.ade {
            let e = &mut self.e[a.component][a.index];
            *e -= a.correction * a.current;
            a.current = a.decay * a.current + a.drive * (*e + a.e_prev);
        }
        lat.sync_e(&mut self.e);

        if let Some(port) = &mut self.port {
            let dz = self.cell[2];
            let v: f64 = port
                .columns
                .iter()
                .map(|col| -col.iter().map(|&g| self.e[2][g]).sum::<f64>() * dz)
                .sum::<f64>()
                / port.columns.len() as f64;
            // Source-branch current; the trapezoidal resistor update makes it exact at the half step.
            let v_half = 0.5 * (port.v_prev + v);
            port.record.push(v_half, (pulse - v_half) / port.impedance, pulse);
            port.v_prev = v;
        }
        for (b, rec) in &mut self.probes {
            let field = if b.electric { &self.e[b.component] } else { &self.h[b.component] };
            let mean = b.indices.iter().map(|&g| field[g]).sum::<f64>() / b.indices.len() as f64;
            rec.values.push(mean);
        }
        if let Some(ntff) = &mut self.ntff {
            ntff.accumulate(n, &self.e, &self.h);
        }
        self.step += 1;
        energy
    }

    pub fn run(mut self) -> Result<SimulationResult> {
        let start = Instant::now();
        let stop = self.config.stop;
        let source_end = self.config.source.duration();
        let mut peak: f64 = 0.0;
        let mut last = 0.0;
        let mut converged = false;
        while self.step < stop.max_steps {
            let track = (self.step + 1) % stop.check_interval == 0;
            if let Some(w) = self.step(track) {
                if !w.is_finite() {
                    return Err(Error::Unstable { step: self.step });
                }
                peak = peak.max(w);
                last = w;
                let t = self.step as f64 * self.dt;
                if t > source_end && (peak == 0.0 || w <= stop.energy_threshold * peak) {
                    converged = true;
                    break;
                }
            }
            if let Some(port) = &self.port {
                if !port.v_prev.is_finite() {
                    return Err(Error::Unstable { step: self.step });
                }
            }
        }
        if !converged {
            log::warn!(
                "energy decay not converged after {} steps ({:.3e} of peak)",
                self.step,
                if peak > 0.0 { last / peak } else { 0.0 }
            );
        }
        let cell_count = self.cell_count();
        let near_field = self.ntff.take().map(|n| n.finish());
        Ok(SimulationResult {
            port: self.port.take().map(|p| {
                debug_assert!(p.impedance > 0.0);
                p.record
            }),
            probes: self.probes.into_iter().map(|(_, r)| r).collect(),
            near_field,
            steps: self.step,
            dt: self.dt,
            converged,
            peak_energy: peak,
            final_energy: last,
            wall_clock: start.elapsed(),
            cell_count,
        })
    }
}

pub fn run(config: SimulationConfig) -> Result<SimulationResult> {
    Solver::new(config)?.run()
}
