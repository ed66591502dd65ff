//! Output files. Every file starts with `#` lines echoing the resolved config.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use prsant_core::fdtd::FarField;
use prsant_core::{Complex64, FrequencyAxis, Spectrum};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn header(command: &str, config: &RunConfig) -> String {
    let mut out = format!("# prsant {command} {}\n# resolved configuration:\n", env!("CARGO_PKG_VERSION"));
    for line in config.to_toml().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, header: &str, body: &str) -> Result<(), CliError> {
    let mut text = String::with_capacity(header.len() + body.len());
    text.push_str(header);
    text.push_str(body);
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_csv<R>(path: &Path, header: &str, columns: &[&str], rows: R) -> Result<(), CliError>
where
    R: IntoIterator<Item = Vec<f64>>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut buf = BufWriter::new(file);
    buf.write_all(header.as_bytes()).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(columns).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn db(v: Complex64) -> f64 {
    20.0 * v.norm().log10()
}

/// `f_Hz,re_gamma,im_gamma,mag_dB,phase_deg`
pub fn write_gamma_csv(path: &Path, header: &str, gamma: &Spectrum) -> Result<(), CliError> {
    write_csv(
        path,
        header,
        &["f_Hz", "re_gamma", "im_gamma", "mag_dB", "phase_deg"],
        gamma
            .iter()
            .map(|(f, g)| vec![f, g.re, g.im, db(g), g.arg().to_degrees()]),
    )
}

/// `f_Hz,re,im,mag_dB`
pub fn write_s11_csv(path: &Path, header: &str, s11: &Spectrum) -> Result<(), CliError> {
    write_csv(
        path,
        header,
        &["f_Hz", "re", "im", "mag_dB"],
        s11.iter().map(|(f, s)| vec![f, s.re, s.im, db(s)]),
    )
}

/// `angle_deg,e_plane_dBi,h_plane_dBi`, shifted by `offset_db` (directivity to realized gain).
pub fn write_farfield_csv(path: &Path, header: &str, ff: &FarField, offset_db: f64) -> Result<(), CliError> {
    write_csv(
        path,
        header,
        &["angle_deg", "e_plane_dBi", "h_plane_dBi"],
        ff.angles_deg
            .iter()
            .zip(ff.e_plane_dbi.iter().zip(&ff.h_plane_dbi))
            .map(|(&a, (&e, &h))| vec![a, e + offset_db, h + offset_db]),
    )
}

pub fn write_rows(path: &Path, header: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Result<(), CliError> {
    write_csv(path, header, columns, rows)
}

/// Reads an S11 CSV back into a spectrum on a uniform axis.
pub fn read_s11_csv(path: &Path) -> Result<Spectrum, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::csv(path, e))?;
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for rec in r.deserialize::<(f64, f64, f64, f64)>() {
        let (f, re, im, _) = rec.map_err(|e| CliError::csv(path, e))?;
        freqs.push(f);
        values.push(Complex64::new(re, im));
    }
    if freqs.is_empty() {
        return Err(CliError::invalid(format!("{}: no samples", path.display())));
    }
    let step = if freqs.len() > 1 { freqs[1] - freqs[0] } else { 0.0 };
    let axis = FrequencyAxis::new(freqs[0], step, freqs.len())?;
    let uniform = freqs
        .iter()
        .enumerate()
        .all(|(i, &f)| (f - axis.at(i)).abs() <= 1e-9 * f.abs().max(1.0));
    if !uniform {
        return Err(CliError::invalid(format!("{}: frequencies are not uniformly spaced", path.display())));
    }
    Ok(Spectrum::new(axis, values)?)
}
