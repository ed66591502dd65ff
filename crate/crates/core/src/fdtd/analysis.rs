use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

pub const MINUS_10_DB: f64 = -10.0;

/// Maximal frequency intervals with |S11| ≤ −10 dB; edges are interpolated in dB.
pub fn bandwidth_minus10db(s11: &Spectrum) -> Vec<(f64, f64)> {
    let db = s11.magnitude_db();
    let f = s11.frequencies();
    let below = |n: usize| db[n] <= MINUS_10_DB;
    let cross = |a: usize, b: usize| {
        let t = (MINUS_10_DB - db[a]) / (db[b] - db[a]);
        f[a] + t * (f[b] - f[a])
    };
    let mut out = Vec::new();
    let mut start = None;
    for n in 0..db.len() {
        match (start, below(n)) {
            (None, true) => start = Some(if n == 0 { f[0] } else { cross(n - 1, n) }),
            (Some(lo), false) => {
                out.push((lo, cross(n - 1, n)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        out.push((lo, f[db.len() - 1]));
    }
    out
}

/// Frequency of minimum |S11|, refined by a parabola through the neighbouring dB samples.
pub fn resonance_frequency(s11: &Spectrum) -> Option<f64> {
    let db = s11.magnitude_db();
    let n = db
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let f = s11.frequencies();
    if n == 0 || n + 1 == db.len() {
        return Some(f[n]);
    }
    let (a, b, c) = (db[n - 1], db[n], db[n + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(f[n] + shift.clamp(-0.5, 0.5) * (f[n + 1] - f[n]))
}

/// Realized gain `D · η · (1 − |S11|²)` in dBi; `directivity` is linear.
pub fn realized_gain(directivity: f64, s11_magnitude: f64, efficiency: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::param("efficiency", "radiation efficiency must lie in [0, 1]"));
    }
    if !(directivity >= 0.0 && directivity.is_finite()) {
        return Err(Error::param("directivity", "must be finite and non-negative"));
    }
    if !(s11_magnitude >= 0.0 && s11_magnitude.is_finite()) {
        return Err(Error::param("s11", "magnitude must be finite and non-negative"));
    }
    let mismatch = (1.0 - s11_magnitude * s11_magnitude).max(0.0);
    let g = directivity * efficiency * mismatch;
    Ok(if g > 0.0 { 10.0 * g.log10() } else { f64::NEG_INFINITY })
}

pub fn directivity_dbi(linear: f64) -> f64 {
    10.0 * linear.log10()
}
