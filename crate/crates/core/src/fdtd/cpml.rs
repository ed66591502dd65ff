use std::ops::Range;

use super::config::{Boundary, CpmlSpec};
use super::lattice::Lattice;
use crate::constants::EPS0;

/// Levi-Civita symbol for distinct axes.
fn levi(c: usize, a: usize, s: usize) -> f64 {
    match (c, a, s) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        _ => -1.0,
    }
}

#[derive(Debug, Clone)]
struct Slab {
    ranges: [Range<usize>; 3],
    psi: Vec<f64>,
    /// Signed update coefficient per slab edge.
    coef: Vec<f64>,
}

/// Convolution accumulators for the derivative along `axis` of `source`
/// that enters the update of `target`.
#[derive(Debug, Clone)]
struct Term {
    target: usize,
    source: usize,
    axis: usize,
    sign: f64,
    slabs: Vec<Slab>,
}

#[derive(Debug, Clone)]
struct Profile {
    b: Vec<f64>,
    c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Cpml {
    h_terms: Vec<Term>,
    e_terms: Vec<Term>,
    /// Per axis: profiles at node positions (E) and half positions (H).
    e_profile: [Option<Profile>; 3],
    h_profile: [Option<Profile>; 3],
    inv_d: [f64; 3],
}

fn profile(spec: &CpmlSpec, n: usize, d: f64, dt: f64, half: bool) -> Profile {
    let layers = spec.layers as f64;
    let sigma_max = spec.sigma_max(d);
    let mut b = vec![0.0; n + 1];
    let mut c = vec![0.0; n + 1];
    for idx in 0..=n {
        let pos = idx as f64 + if half { 0.5 } else { 0.0 };
        let depth = ((layers - pos).max(pos - (n as f64 - layers)) / layers).clamp(0.0, 1.0);
        let sigma = sigma_max * depth.powf(spec.order);
        let alpha = spec.alpha_max * (1.0 - depth);
        if sigma > 0.0 {
            let bb = (-(sigma + alpha) * dt / EPS0).exp();
            b[idx] = bb;
            c[idx] = sigma / (sigma + alpha) * (bb - 1.0);
        }
    }
    Profile { b, c }
}

impl Cpml {
    pub fn new(lat: &Lattice, spec: &CpmlSpec, cell: [f64; 3], dt: f64) -> Self {
        let mut h_terms = Vec::new();
        let mut e_terms = Vec::new();
        let mut e_profile: [Option<Profile>; 3] = Default::default();
        let mut h_profile: [Option<Profile>; 3] = Default::default();
        let layers = spec.layers;
        for a in 0..3 {
            if lat.boundary[a] != Boundary::Cpml {
                continue;
            }
            let n = lat.cells[a];
            e_profile[a] = Some(profile(spec, n, cell[a], dt, false));
            h_profile[a] = Some(profile(spec, n, cell[a], dt, true));
            let low = 0..layers + 1;
            let high = n - layers..n + 1;
            for c in (0..3).filter(|&c| c != a) {
                let s = 3 - a - c;
                for electric in [false, true] {
                    let full = if electric { lat.e_ranges(c) } else { lat.h_ranges(c) };
                    let slabs = [&low, &high]
                        .iter()
                        .map(|r| {
                            let mut ranges = full.clone();
                            ranges[a] = r.start.max(full[a].start)..r.end.min(full[a].end);
                            let len = ranges.iter().map(|r| r.len()).product();
                            Slab {
                                ranges,
                                psi: vec![0.0; len],
                                coef: Vec::new(),
                            }
                        })
                        .collect();
                    let term = Term {
                        target: c,
                        source: s,
                        axis: a,
                        sign: levi(c, a, s) * if electric { 1.0 } else { -1.0 },
                        slabs,
                    };
                    if electric {
                        e_terms.push(term);
                    } else {
                        h_terms.push(term);
                    }
                }
            }
        }
        Self {
            h_terms,
            e_terms,
            e_profile,
            h_profile,
            inv_d: [1.0 / cell[0], 1.0 / cell[1], 1.0 / cell[2]],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.h_terms.is_empty()
    }

    pub fn correct_h(&mut self, lat: &Lattice, h: &mut [Vec<f64>; 3], e: &[Vec<f64>; 3]) {
        for term in &mut self.h_terms {
            let prof = self.h_profile[term.axis].as_ref().expect("profile for absorbing axis");
            apply(term, lat, prof, &mut h[term.target], &e[term.source], self.inv_d[term.axis], true);
        }
    }

    pub fn correct_e(&mut self, lat: &Lattice, e: &mut [Vec<f64>; 3], h: &[Vec<f64>; 3]) {
        for term in &mut self.e_terms {
            let prof = self.e_profile[term.axis].as_ref().expect("profile for absorbing axis");
            apply(term, lat, prof, &mut e[term.target], &h[term.source], self.inv_d[term.axis], false);
        }
    }
}

fn apply(term: &mut Term, lat: &Lattice, prof: &Profile, target: &mut [f64], source: &[f64], inv_d: f64, forward: bool) {
    let a = term.axis;
    let sa = lat.stride[a];
    let [_, sy, sz] = lat.stride;
    for slab in &mut term.slabs {
        let [ri, rj, rk] = slab.ranges.clone();
        let (i0, n) = (ri.start, ri.len());
        let mut q = 0;
        for k in rk {
            for j in rj.clone() {
                let g = j * sy + k * sz + i0;
                let t = &mut target[g..g + n];
                let (s0, s1) = if forward {
                    (&source[g..g + n], &source[g + sa..g + sa + n])
                } else {
                    (&source[g - sa..g - sa + n], &source[g..g + n])
                };
                let psi = &mut slab.psi[q..q + n];
                let coef = &slab.coef[q..q + n];
                if a == 0 {
                    let (b, c) = (&prof.b[i0..i0 + n], &prof.c[i0..i0 + n]);
                    for m in 0..n {
                        psi[m] = b[m] * psi[m] + c[m] * (s1[m] - s0[m]) * inv_d;
                        t[m] += coef[m] * psi[m];
                    }
                } else {
                    let pa = if a == 1 { j } else { k };
                    let (b, c) = (prof.b[pa], prof.c[pa] * inv_d);
                    for m in 0..n {
                        psi[m] = b * psi[m] + c * (s1[m] - s0[m]);
                        t[m] += coef[m] * psi[m];
                    }
                }
                q += n;
            }
        }
    }
}

impl Cpml {
    /// Fills the per-edge coefficients: `dt/μ0` for H, `cb(c, g)` for E.
    pub fn set_coefficients<F: Fn(usize, usize) -> f64>(&mut self, lat: &Lattice, ch: f64, cb: F) {
        let [_, sy, sz] = lat.stride;
        for (terms, electric) in [(&mut self.h_terms, false), (&mut self.e_terms, true)] {
            for term in terms.iter_mut() {
                for slab in &mut term.slabs {
                    let [ri, rj, rk] = slab.ranges.clone();
                    slab.coef.clear();
                    for k in rk {
                        for j in rj.clone() {
                            for i in ri.clone() {
                                let g = i + j * sy + k * sz;
                                let c = if electric { cb(term.target, g) } else { ch };
                                slab.coef.push(term.sign * c);
                            }
                        }
                    }
                }
            }
        }
    }
}
