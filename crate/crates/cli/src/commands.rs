//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use prsant_core::fdtd::{bandwidth_minus10db, resonance_frequency};
use prsant_core::geometry::{PatchGeometry, VoxelGrid};
use prsant_core::patch_design::{design, DesignInputs, PatchDesign};
use prsant_core::prs_cavity::{CrossingDirection, CrossingKind, PhaseCrossing, SeriesLcSheet, SheetModel};
use prsant_core::Spectrum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SweepSolver};
use crate::error::CliError;
use crate::output::{
    create_dir, header, read_s11_csv, write_farfield_csv, write_gamma_csv, write_rows, write_s11_csv, write_text,
};
use crate::pipeline::{
    analyse_unit_cell, cavity_model, run_antenna, sweep_row_fdtd, sweep_row_tmm, unit_cell_reflection, AntennaRun,
    RunSummary, SweepRow,
};

pub const SUMMARY_FILE: &str = "summary.toml";
pub const S11_FILE: &str = "s11.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("report types serialize to TOML")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub inputs: DesignInputs,
    pub closed_form: PatchDesign,
    pub geometry: PatchGeometry,
}

pub fn cmd_design(cfg: &RunConfig) -> Result<DesignReport, CliError> {
    let report = DesignReport {
        inputs: cfg.design,
        closed_form: design(&cfg.design)?,
        geometry: cfg.geometry.patch.clone(),
    };
    let body = to_toml(&report);
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    write_text(&dir.join("design.toml"), &header("design", cfg), &body)?;
    println!("{body}");
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub frequency_hz: f64,
    /// `zero` or `pi`.
    pub through: String,
    /// `capacitive_to_inductive` (phase rising) or `inductive_to_capacitive`.
    pub transition: String,
}

impl From<&PhaseCrossing> for CrossingRecord {
    fn from(c: &PhaseCrossing) -> Self {
        Self {
            frequency_hz: c.frequency,
            through: match c.kind {
                CrossingKind::ThroughZero => "zero",
                CrossingKind::ThroughPi => "pi",
            }
            .into(),
            transition: match c.direction {
                CrossingDirection::Rising => "capacitive_to_inductive",
                CrossingDirection::Falling => "inductive_to_capacitive",
            }
            .into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCellReport {
    pub sheet: SeriesLcSheet,
    pub lc_resonance_hz: f64,
    pub reference_crossing_hz: f64,
    pub max_residual: f64,
    pub band_hz: [f64; 2],
    pub fit_band_hz: [f64; 2],
    pub fitted_crossings: Vec<CrossingRecord>,
}

pub fn cmd_unitcell(cfg: &RunConfig) -> Result<UnitCellReport, CliError> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let head = header("unitcell", cfg);
    let gamma = unit_cell_reflection(cfg)?;
    write_gamma_csv(&dir.join("unitcell_gamma.csv"), &head, &gamma)?;
    let a = analyse_unit_cell(cfg, gamma)?;
    write_gamma_csv(&dir.join("unitcell_fit_gamma.csv"), &head, &a.fitted)?;
    let report = UnitCellReport {
        sheet: a.fit.sheet,
        lc_resonance_hz: a.fit.resonance,
        reference_crossing_hz: a.fit.reference_crossing,
        max_residual: a.fit.max_residual,
        band_hz: [a.gamma.axis.start, a.gamma.axis.stop()],
        fit_band_hz: [cfg.unitcell.fit_band.start, cfg.unitcell.fit_band.stop],
        fitted_crossings: a.crossings.iter().map(CrossingRecord::from).collect(),
    };
    let body = to_toml(&report);
    write_text(&dir.join("unitcell.toml"), &head, &body)?;
    println!("{body}");
    Ok(report)
}

fn zs_file_name(z_s: f64) -> String {
    format!("zs_{:05.1}um.csv", z_s * 1e6)
}

/// Outcome of one sweep entry; failures are kept so the rest can finish.
pub type SweepEntry = (f64, Result<SweepRow, CliError>);

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(";")
}

fn write_sweep_summary(path: &Path, head: &str, entries: &[SweepEntry]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut buf = BufWriter::new(file);
    buf.write_all(head.as_bytes()).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(buf);
    let csv_err = |e| CliError::csv(path, e);
    w.write_record([
        "z_s_m",
        "status",
        "resonance_Hz",
        "bandwidth_Hz",
        "bands_Hz",
        "crossings_Hz",
        "peak_realized_gain_dBi",
    ])
    .map_err(csv_err)?;
    for (z, entry) in entries {
        let record = match entry {
            Ok(r) => vec![
                z.to_string(),
                "ok".into(),
                r.resonance_hz.map(|f| f.to_string()).unwrap_or_default(),
                r.bandwidth_hz.iter().map(|b| b[1] - b[0]).sum::<f64>().to_string(),
                join(r.bandwidth_hz.iter().map(|b| format!("{}-{}", b[0], b[1]))),
                join(r.crossings_hz.iter().map(|f| f.to_string())),
                r.peak_realized_gain_dbi.map(|g| g.to_string()).unwrap_or_default(),
            ],
            Err(e) => vec![
                z.to_string(),
                format!("error: {e}"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Runs every separation; rows come back in configuration order whatever the worker count.
pub fn cmd_sweep_zs(cfg: &RunConfig) -> Result<Vec<SweepEntry>, CliError> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let zs = &cfg.prs_cavity.z_s;
    let entries: Vec<SweepEntry> = match cfg.prs_cavity.solver {
        SweepSolver::Fdtd => zs.par_iter().map(|&z| (z, sweep_row_fdtd(cfg, z))).collect(),
        SweepSolver::Tmm => {
            let sheet = match cfg.prs_cavity.sheet {
                Some(s) => s,
                None => {
                    log::info!("fitting the PRS sheet from the unit cell");
                    analyse_unit_cell(cfg, unit_cell_reflection(cfg)?)?.fit.sheet
                }
            };
            let model = cavity_model(cfg, SheetModel::SeriesLc(sheet));
            zs.par_iter().map(|&z| (z, sweep_row_tmm(cfg, &model, z))).collect()
        }
    };
    let head = header("sweep-zs", cfg);
    for (z, entry) in &entries {
        match entry {
            Ok(row) => write_gamma_csv(&dir.join(zs_file_name(*z)), &head, &row.gamma)?,
            Err(e) => log::error!("z_s = {z:e} m failed: {e}"),
        }
    }
    write_sweep_summary(&dir.join(SWEEP_SUMMARY_FILE), &head, &entries)?;
    println!("{:>10} {:>14} {:>14} {:>12}", "z_s (µm)", "resonance GHz", "-10 dB GHz", "gain dBi");
    for (z, entry) in &entries {
        match entry {
            Ok(r) => println!(
                "{:>10.1} {:>14} {:>14.1} {:>12}",
                z * 1e6,
                r.resonance_hz.map(|f| format!("{:.1}", f / 1e9)).unwrap_or_else(|| "-".into()),
                r.bandwidth_hz.iter().map(|b| b[1] - b[0]).sum::<f64>() / 1e9,
                r.peak_realized_gain_dbi.map(|g| format!("{g:.2}")).unwrap_or_else(|| "-".into()),
            ),
            Err(e) => println!("{:>10.1} failed: {e}", z * 1e6),
        }
    }
    let failed: Vec<&CliError> = entries.iter().filter_map(|(_, e)| e.as_ref().err()).collect();
    if !failed.is_empty() {
        return Err(CliError::Partial {
            failed: failed.len(),
            total: entries.len(),
            code: failed.iter().map(|e| e.exit_code()).max().unwrap_or(2),
        });
    }
    Ok(entries)
}

fn write_run(dir: &Path, head: &str, run: &AntennaRun, every_cut: bool) -> Result<(), CliError> {
    create_dir(dir)?;
    write_s11_csv(&dir.join(S11_FILE), head, &run.s11)?;
    write_text(&dir.join(SUMMARY_FILE), head, &to_toml(&run.summary))?;
    let gains: Vec<Vec<f64>> = run
        .farfields
        .iter()
        .map(|(_, g)| {
            vec![
                g.frequency_hz,
                g.directivity_dbi,
                g.realized_gain_dbi,
                g.radiation_efficiency,
                g.theta_deg,
                g.phi_deg,
            ]
        })
        .collect();
    if !gains.is_empty() {
        write_rows(
            &dir.join("gain.csv"),
            head,
            &["f_Hz", "directivity_dBi", "realized_gain_dBi", "radiation_efficiency", "theta_deg", "phi_deg"],
            gains,
        )?;
    }
    let offset = |ff: &prsant_core::fdtd::FarField, g: &crate::pipeline::GainPoint| {
        g.realized_gain_dbi - ff.peak_directivity_dbi
    };
    if let Some((ff, g)) = run.peak() {
        write_farfield_csv(&dir.join("farfield.csv"), head, ff, offset(ff, g))?;
    }
    if every_cut {
        for (ff, g) in &run.farfields {
            let name = format!("farfield_{:06.1}GHz.csv", ff.frequency / 1e9);
            write_farfield_csv(&dir.join(name), head, ff, offset(ff, g))?;
        }
    }
    let vox = dir.join("geometry.prsvox");
    let file = File::create(&vox).map_err(|e| CliError::io(&vox, e))?;
    let mut w = BufWriter::new(file);
    run.grid.write_dump(&mut w).map_err(|e| CliError::io(&vox, e))?;
    w.flush().map_err(|e| CliError::io(&vox, e))
}

fn simulate(cfg: &RunConfig, command: &str, every_cut: bool) -> Result<RunSummary, CliError> {
    let run = run_antenna(cfg, cfg.simulate.model, cfg.simulate.z_s, true)?;
    write_run(&cfg.output.dir, &header(command, cfg), &run, every_cut)?;
    let body = to_toml(&run.summary);
    println!("{body}");
    Ok(run.summary)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    simulate(cfg, "simulate", false)
}

pub fn cmd_farfield(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    simulate(cfg, "farfield", true)
}

pub fn read_summary(dir: &Path) -> Result<RunSummary, CliError> {
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn read_voxels(path: &Path) -> Result<VoxelGrid, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    VoxelGrid::read_dump(BufReader::new(file)).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub run_a: PathBuf,
    pub run_b: PathBuf,
    pub resonance_a_hz: Option<f64>,
    pub resonance_b_hz: Option<f64>,
    /// b − a
    pub resonance_shift_hz: Option<f64>,
    pub bandwidth_a_hz: f64,
    pub bandwidth_b_hz: f64,
    pub bandwidth_delta_hz: f64,
    pub peak_gain_a_dbi: Option<f64>,
    pub peak_gain_b_dbi: Option<f64>,
    pub peak_gain_delta_db: Option<f64>,
}

fn total_band(s11: &Spectrum) -> f64 {
    bandwidth_minus10db(s11).iter().map(|(lo, hi)| hi - lo).sum()
}

pub fn compare_runs(a: &Path, b: &Path) -> Result<CompareReport, CliError> {
    let (sa, sb) = (read_s11_csv(&a.join(S11_FILE))?, read_s11_csv(&b.join(S11_FILE))?);
    if !sa.same_axis(&sb) {
        return Err(CliError::invalid("runs do not share a frequency axis"));
    }
    let (ga, gb) = (read_summary(a)?.peak_realized_gain_dbi, read_summary(b)?.peak_realized_gain_dbi);
    let (ra, rb) = (resonance_frequency(&sa), resonance_frequency(&sb));
    let (ba, bb) = (total_band(&sa), total_band(&sb));
    Ok(CompareReport {
        run_a: a.to_path_buf(),
        run_b: b.to_path_buf(),
        resonance_a_hz: ra,
        resonance_b_hz: rb,
        resonance_shift_hz: ra.zip(rb).map(|(x, y)| y - x),
        bandwidth_a_hz: ba,
        bandwidth_b_hz: bb,
        bandwidth_delta_hz: bb - ba,
        peak_gain_a_dbi: ga,
        peak_gain_b_dbi: gb,
        peak_gain_delta_db: ga.zip(gb).map(|(x, y)| y - x),
    })
}

pub fn cmd_compare(cfg: &RunConfig, a: &Path, b: &Path) -> Result<CompareReport, CliError> {
    let report = compare_runs(a, b)?;
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    let body = to_toml(&report);
    write_text(&dir.join("compare.toml"), &header("compare", cfg), &body)?;
    println!("{body}");
    Ok(report)
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Collects whatever results sit in the output directory into `report.txt`.
pub fn cmd_report(cfg: &RunConfig) -> Result<String, CliError> {
    let dir = &cfg.output.dir;
    let read = |p: PathBuf| std::fs::read_to_string(&p).map_err(|e| CliError::io(&p, e));
    let mut sections: Vec<(String, String)> = Vec::new();
    for (title, name) in [
        ("Patch design", "design.toml"),
        ("Unit cell", "unitcell.toml"),
        ("z_s sweep", SWEEP_SUMMARY_FILE),
        ("Run", SUMMARY_FILE),
        ("Comparison", "compare.toml"),
    ] {
        let p = dir.join(name);
        if p.is_file() {
            sections.push((title.to_string(), strip_comments(&read(p)?)));
        }
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SUMMARY_FILE).is_file())
        .collect();
    subdirs.sort();
    for sub in subdirs {
        let name = sub.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        sections.push((format!("Run {name}"), strip_comments(&read(sub.join(SUMMARY_FILE))?)));
    }
    if sections.is_empty() {
        return Err(CliError::invalid(format!("no results found in {}", dir.display())));
    }
    let mut body = String::new();
    for (title, text) in &sections {
        body.push_str(&format!("== {title} ==\n{}\n", text.trim_end()));
        body.push('\n');
    }
    write_text(&dir.join("report.txt"), &header("report", cfg), &body)?;
    print!("{body}");
    Ok(body)
}

/// Whether a sweep summary's resonance column strictly decreases with z_s.
pub fn strictly_decreasing(rows: &[SweepRow]) -> bool {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.z_s.total_cmp(&b.z_s));
    sorted.windows(2).all(|w| match (w[0].resonance_hz, w[1].resonance_hz) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    })
}

