use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::NtffSpec;
use super::lattice::Lattice;
use crate::constants::{angular, C0, ETA0};
use crate::error::{Error, Result};
use crate::geometry::VoxelGrid;

/// One face of the Huygens box with its patch grid.
#[derive(Debug, Clone)]
struct FaceLayout {
    axis: usize,
    /// +1 for the high face, −1 for the low face.
    sign: f64,
    node: usize,
    coordinate: f64,
    /// Face-centre index ranges along the two tangential axes (u, v).
    u_range: (usize, usize),
    v_range: (usize, usize),
    patch: usize,
    u_centres: Vec<f64>,
    v_centres: Vec<f64>,
    /// Area of one face centre's cell.
    da: f64,
}

impl FaceLayout {
    fn patches(&self) -> usize {
        self.u_centres.len() * self.v_centres.len()
    }
}

pub(crate) struct NtffAccumulator {
    faces: Vec<FaceLayout>,
    frequencies: Vec<f64>,
    stride: usize,
    dt: f64,
    lat: Lattice,
    /// Per face, per frequency: tangential (Eu, Ev, Hu, Hv) phasors per patch.
    sums: Vec<Vec<Vec<[Complex64; 4]>>>,
    scratch: Vec<[f64; 4]>,
}

fn tangential(a: usize) -> (usize, usize) {
    ((a + 1) % 3, (a + 2) % 3)
}

impl NtffAccumulator {
    pub fn new(grid: &VoxelGrid, lat: &Lattice, offset: [usize; 3], spec: &NtffSpec, dt: f64) -> Result<Self> {
        let dims = grid.dims;
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            if dims[a] < 2 * spec.margin + 4 {
                return Err(Error::param("ntff.margin", "grid too small for the requested Huygens box"));
            }
            lo[a] = spec.margin;
            hi[a] = dims[a] - spec.margin;
        }
        let fail = |what: &str| Error::Geometry {
            feature: "huygens surface".into(),
            reason: format!("intersects {what}; enlarge the padding or reduce the margin"),
        };
        // Materials must sit at least one cell inside the box.
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    if grid.cell_tag(i, j, k) != 0 {
                        let inside = [i, j, k].iter().enumerate().all(|(a, &c)| c > lo[a] && c + 1 < hi[a]);
                        if !inside {
                            return Err(fail("a dielectric region"));
                        }
                    }
                }
            }
        }
        for s in &grid.sheets {
            let covered = s.faces.iter().enumerate().filter(|(_, &f)| f).map(|(n, _)| (n % dims[0], n / dims[0]));
            for (i, j) in covered {
                if !(s.k > lo[2] && s.k < hi[2] && i > lo[0] && i + 1 < hi[0] && j > lo[1] && j + 1 < hi[1]) {
                    return Err(fail(&format!("sheet `{}`", s.name)));
                }
            }
        }
        let f_max = spec.frequencies.iter().cloned().fold(0.0, f64::max);
        let stride = if spec.stride > 0 {
            spec.stride
        } else {
            ((1.0 / (20.0 * f_max * dt)).floor() as usize).max(1)
        };
        let mut faces = Vec::new();
        for a in 0..3 {
            let (u, v) = tangential(a);
            for (sign, node) in [(-1.0, lo[a]), (1.0, hi[a])] {
                let centres = |axis: usize| -> Vec<f64> {
                    let mut c = Vec::new();
                    let mut p = lo[axis];
                    while p < hi[axis] {
                        let n = spec.patch.min(hi[axis] - p);
                        c.push((0..n).map(|q| grid.center(axis, p + q)).sum::<f64>() / n as f64);
                        p += n;
                    }
                    c
                };
                faces.push(FaceLayout {
                    axis: a,
                    sign,
                    node: node + offset[a],
                    coordinate: grid.node(a, node),
                    u_range: (lo[u] + offset[u], hi[u] + offset[u]),
                    v_range: (lo[v] + offset[v], hi[v] + offset[v]),
                    patch: spec.patch,
                    u_centres: centres(u),
                    v_centres: centres(v),
                    da: grid.cell[u] * grid.cell[v],
                });
            }
        }
        let sums = faces
            .iter()
            .map(|f| vec![vec![[Complex64::new(0.0, 0.0); 4]; f.patches()]; spec.frequencies.len()])
            .collect();
        Ok(Self {
            faces,
            frequencies: spec.frequencies.clone(),
            stride,
            dt,
            lat: *lat,
            sums,
            scratch: Vec::new(),
        })
    }

    /// Adds the fields after step `n`: E at `(n+1) dt`, H at `(n+½) dt`.
    pub fn accumulate(&mut self, n: usize, e: &[Vec<f64>; 3], h: &[Vec<f64>; 3]) {
        if n % self.stride != 0 {
            return;
        }
        let weight = self.stride as f64 * self.dt;
        let t_e = (n as f64 + 1.0) * self.dt;
        let t_h = (n as f64 + 0.5) * self.dt;
        let phases: Vec<(Complex64, Complex64)> = self
            .frequencies
            .iter()
            .map(|&f| {
                let w = angular(f);
                (Complex64::from_polar(weight, -w * t_e), Complex64::from_polar(weight, -w * t_h))
            })
            .collect();
        let st = self.lat.stride;
        for (face, sums) in self.faces.iter().zip(self.sums.iter_mut()) {
            let a = face.axis;
            let (u, v) = tangential(a);
            let (su, sv, sa) = (st[u], st[v], st[a]);
            let nu = face.u_centres.len();
            self.scratch.clear();
            self.scratch.resize(face.patches(), [0.0; 4]);
            for pv in face.v_range.0..face.v_range.1 {
                let qv = (pv - face.v_range.0) / face.patch;
                for pu in face.u_range.0..face.u_range.1 {
                    let qu = (pu - face.u_range.0) / face.patch;
                    let b = face.node * sa + pu * su + pv * sv;
                    let (eu, ev, hu, hv) = (&e[u], &e[v], &h[u], &h[v]);
                    let s = &mut self.scratch[qu + nu * qv];
                    s[0] += 0.5 * (eu[b] + eu[b + sv]);
                    s[1] += 0.5 * (ev[b] + ev[b + su]);
                    s[2] += 0.25 * (hu[b] + hu[b + su] + hu[b - sa] + hu[b + su - sa]);
                    s[3] += 0.25 * (hv[b] + hv[b + sv] + hv[b - sa] + hv[b + sv - sa]);
                }
            }
            for (acc, (pe, ph)) in sums.iter_mut().zip(&phases) {
                for (dst, src) in acc.iter_mut().zip(&self.scratch) {
                    dst[0] += pe * src[0];
                    dst[1] += pe * src[1];
                    dst[2] += ph * src[2];
                    dst[3] += ph * src[3];
                }
            }
        }
    }

    pub fn finish(self) -> NearFieldData {
        let faces = self
            .faces
            .iter()
            .zip(self.sums)
            .map(|(f, sums)| {
                let da = f.da;
                let fields = sums
                    .into_iter()
                    .map(|per_f| per_f.into_iter().map(|s| s.map(|x| x * da)).collect())
                    .collect();
                HuygensFace {
                    axis: f.axis,
                    sign: f.sign,
                    coordinate: f.coordinate,
                    u: f.u_centres.clone(),
                    v: f.v_centres.clone(),
                    fields,
                }
            })
            .collect();
        NearFieldData {
            frequencies: self.frequencies,
            faces,
        }
    }
}

/// Surface-integrated tangential field phasors on one face of the Huygens box.
#[derive(Debug, Clone, PartialEq)]
pub struct HuygensFace {
    pub axis: usize,
    pub sign: f64,
    pub coordinate: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Per frequency, per patch (u fastest): ∫E_u, ∫E_v, ∫H_u, ∫H_v over the patch.
    pub fields: Vec<Vec<[Complex64; 4]>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldData {
    pub frequencies: Vec<f64>,
    pub faces: Vec<HuygensFace>,
}

/// Equivalent-current radiator at one frequency.
pub struct Radiator {
    k: f64,
    faces: Vec<(usize, f64, Vec<f64>, Vec<f64>, Vec<[Complex64; 6]>)>,
}

impl NearFieldData {
    pub fn frequency_index(&self, f: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .position(|&g| (g - f).abs() <= 1e-9 * f.abs().max(1.0))
    }

    pub fn radiator(&self, index: usize) -> Radiator {
        let f = self.frequencies[index];
        let faces = self
            .faces
            .iter()
            .map(|face| {
                let a = face.axis;
                let (u, v) = tangential(a);
                let currents = face.fields[index]
                    .iter()
                    .map(|&[eu, ev, hu, hv]| {
                        // J = n × H, M = −n × E with n = sign·e_a, e_a × e_u = e_v, e_a × e_v = −e_u.
                        let mut jm = [Complex64::new(0.0, 0.0); 6];
                        jm[v] = hu * face.sign;
                        jm[u] = -hv * face.sign;
                        jm[3 + v] = -eu * face.sign;
                        jm[3 + u] = ev * face.sign;
                        jm
                    })
                    .collect();
                (a, face.coordinate, face.u.clone(), face.v.clone(), currents)
            })
            .collect();
        Radiator {
            k: angular(f) / C0,
            faces,
        }
    }
}

impl Radiator {
    /// Radiation intensity U(θ, φ) (W/sr) for the stored phasors.
    pub fn intensity(&self, theta: f64, phi: f64) -> f64 {
        let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
        let r = [st * cp, st * sp, ct];
        let mut nl = [Complex64::new(0.0, 0.0); 6];
        for (a, coord, us, vs, currents) in &self.faces {
            let (u, v) = tangential(*a);
            let eu: Vec<Complex64> = us.iter().map(|&x| Complex64::from_polar(1.0, self.k * r[u] * x)).collect();
            let phase_a = Complex64::from_polar(1.0, self.k * r[*a] * coord);
            for (row, &y) in currents.chunks(us.len()).zip(vs) {
                let mut inner = [Complex64::new(0.0, 0.0); 6];
                for (jm, p) in row.iter().zip(&eu) {
                    for q in 0..6 {
                        inner[q] += jm[q] * p;
                    }
                }
                let pv = Complex64::from_polar(1.0, self.k * r[v] * y) * phase_a;
                for q in 0..6 {
                    nl[q] += inner[q] * pv;
                }
            }
        }
        let th = [ct * cp, ct * sp, -st];
        let ph = [-sp, cp, 0.0];
        let proj = |off: usize, d: [f64; 3]| (0..3).map(|q| nl[off + q] * d[q]).sum::<Complex64>();
        let (n_t, n_p, l_t, l_p) = (proj(0, th), proj(0, ph), proj(3, th), proj(3, ph));
        let k = self.k;
        k * k / (32.0 * PI * PI * ETA0) * ((l_p + n_t * ETA0).norm_sqr() + (l_t - n_p * ETA0).norm_sqr())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FarFieldOptions {
    pub cut_step_deg: f64,
    pub theta_samples: usize,
    pub phi_samples: usize,
}

impl Default for FarFieldOptions {
    fn default() -> Self {
        Self {
            cut_step_deg: 1.0,
            theta_samples: 36,
            phi_samples: 72,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub frequency: f64,
    pub angles_deg: Vec<f64>,
    /// Directivity (dBi) in the x–z plane; positive angles lean toward +x.
    pub e_plane_dbi: Vec<f64>,
    /// Directivity (dBi) in the y–z plane; positive angles lean toward +y.
    pub h_plane_dbi: Vec<f64>,
    pub peak_directivity_dbi: f64,
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    /// Total radiated power from the pattern quadrature (W).
    pub radiated_power: f64,
}

impl FarField {
    pub fn peak_directivity(&self) -> f64 {
        10f64.powf(self.peak_directivity_dbi / 10.0)
    }
}

pub fn ntff_farfield(near: &NearFieldData, f: f64, options: &FarFieldOptions) -> Result<FarField> {
    let index = near
        .frequency_index(f)
        .ok_or_else(|| Error::Spectrum(format!("no near-field data stored at {f:e} Hz")))?;
    if options.theta_samples == 0 || options.phi_samples == 0 || !(options.cut_step_deg > 0.0) {
        return Err(Error::param("farfield", "quadrature and cut resolutions must be positive"));
    }
    let rad = near.radiator(index);
    let (nt, np) = (options.theta_samples, options.phi_samples);
    let (dth, dph) = (PI / nt as f64, 2.0 * PI / np as f64);
    let grid: Vec<(f64, f64, f64)> = (0..nt * np)
        .into_par_iter()
        .map(|q| {
            let (t, p) = ((q / np) as f64 + 0.5, (q % np) as f64 + 0.5);
            let (theta, phi) = (t * dth, p * dph);
            (theta, phi, rad.intensity(theta, phi))
        })
        .collect();
    let power: f64 = grid.iter().map(|(t, _, u)| u * t.sin() * dth * dph).sum();
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Spectrum(format!("no radiated power at {f:e} Hz")));
    }
    let steps = (360.0 / options.cut_step_deg).round() as usize;
    let angles: Vec<f64> = (0..=steps).map(|n| -180.0 + n as f64 * options.cut_step_deg).collect();
    let cut = |phi0: f64| -> Vec<(f64, f64, f64)> {
        angles
            .par_iter()
            .map(|&deg| {
                let psi = deg.to_radians();
                let (theta, phi) = if psi >= 0.0 { (psi, phi0) } else { (-psi, phi0 + PI) };
                (theta, phi, rad.intensity(theta, phi))
            })
            .collect()
    };
    let e_cut = cut(0.0);
    let h_cut = cut(0.5 * PI);
    let to_d = |u: f64| 10.0 * (4.0 * PI * u / power).log10();
    let (pt, pp, pu) = grid
        .iter()
        .chain(&e_cut)
        .chain(&h_cut)
        .copied()
        .fold((0.0, 0.0, f64::NEG_INFINITY), |best, x| if x.2 > best.2 { x } else { best });
    Ok(FarField {
        frequency: f,
        angles_deg: angles,
        e_plane_dbi: e_cut.iter().map(|x| to_d(x.2)).collect(),
        h_plane_dbi: h_cut.iter().map(|x| to_d(x.2)).collect(),
        peak_directivity_dbi: to_d(pu),
        peak_theta_deg: pt.to_degrees(),
        peak_phi_deg: pp.to_degrees().rem_euclid(360.0),
        radiated_power: power,
    })
}
