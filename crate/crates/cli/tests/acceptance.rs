//! Acceptance suite: one line per criterion.
//!
//! Criteria 1–8 are exact properties and any failure among them makes the
//! binary exit nonzero. Criteria 9–12 check full-wave trends against reference
//! results; their failures are printed but only gate the exit status when
//! `ACCEPTANCE_STRICT=1`.
//!
//! `ACCEPTANCE_ONLY=3,7` runs a subset. The full-wave trend criteria run at
//! `ACCEPTANCE_RESOLUTION` cells/µm (default 0.4).

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use prsant_cli::commands::{cmd_sweep_zs, cmd_unitcell, strictly_decreasing, SWEEP_SUMMARY_FILE};
use prsant_cli::config::Model;
use prsant_cli::pipeline::{run_antenna, SweepRow};
use prsant_cli::{Overrides, RunConfig};
use prsant_core::constants::C0;
use prsant_core::fdtd::*;
use prsant_core::geometry::{DielectricBlock, Layout, PortCells, VoxelGrid};
use prsant_core::materials::{drive_sheet_current, drude_ade_coefficients, graphene_sigma};
use prsant_core::patch_design::patch_width;
use prsant_core::prs_cavity::*;
use prsant_core::{Complex64, DielectricSpec, FrequencyAxis, GrapheneSpec};

const UM: f64 = 1e-6;
const REFERENCE_GAIN_DELTA_DB: f64 = 1.07;

type Outcome = Result<String, String>;

fn check(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn resolution() -> f64 {
    std::env::var("ACCEPTANCE_RESOLUTION").ok().and_then(|s| s.parse().ok()).unwrap_or(0.4)
}

fn config(dir: &Path) -> RunConfig {
    let overrides = Overrides { out: Some(dir.to_path_buf()), resolution: Some(resolution()) };
    RunConfig::default().resolved(&overrides).expect("default configuration is valid")
}

fn c1_patch_width() -> Outcome {
    let data = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/patch_width_oracle.csv"))
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in data.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.trim().parse().unwrap()).collect();
        let w = patch_width(v[0], v[1]).map_err(|e| e.to_string())?;
        worst = worst.max((w - v[2]).abs() / v[2]);
        rows += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        rows == 100 && worst <= 1e-12 && elapsed < 1.0,
        format!("{rows} points, max rel err {worst:.2e}, {elapsed:.3} s"),
    )
}

fn c2_fresnel() -> Outcome {
    let lossless = |e: f64| DielectricSpec::lossless(e).unwrap();
    let half = LayerStack::new(DielectricSpec::VACUUM, vec![], Termination::HalfSpace(lossless(2.2))).unwrap();
    let n = 2.2f64.sqrt();
    let g = tmm_reflection(&half, 800e9, Polarization::Te, 0.0).map_err(|e| e.to_string())?;
    let mut closed: f64 = (g - Complex64::new((1.0 - n) / (1.0 + n), 0.0)).norm();
    for (eps, d, exit, f) in [(2.2, 37e-6, 1.0, 800e9), (10.2, 45e-6, 2.2, 650e9), (4.0, 120e-6, 9.0, 1.3e12)] {
        let (n2, n3) = (f64::sqrt(eps), f64::sqrt(exit));
        let r12 = (1.0 - n2) / (1.0 + n2);
        let r23 = (n2 - n3) / (n2 + n3);
        let delta = 2.0 * PI * f / C0 * n2 * d;
        let ph = Complex64::from_polar(1.0, -2.0 * delta);
        let t = (2.0 / (1.0 + n2)) * (2.0 * n2 / (n2 + n3)) * Complex64::from_polar(1.0, -delta) / (1.0 + r12 * r23 * ph);
        let r = (r12 + r23 * ph) / (1.0 + r12 * r23 * ph);
        let stack = LayerStack::new(DielectricSpec::VACUUM, vec![Layer::slab(d, lossless(eps))], Termination::HalfSpace(lossless(exit))).unwrap();
        let res = tmm_solve(&stack, f, Polarization::Te, 0.0).map_err(|e| e.to_string())?;
        closed = closed.max((res.reflection - r).norm()).max((res.transmission - t).norm());
    }
    // Deterministic stack family across angle, polarization and frequency.
    let mut balance: f64 = 0.0;
    for q in 0..400 {
        let layers: Vec<Layer> = (0..1 + q % 5)
            .map(|m| Layer::slab((1.0 + ((q * 7 + m * 13) % 200) as f64) * UM, lossless(1.0 + ((q * 3 + m * 5) % 11) as f64)))
            .collect();
        let exit = lossless(1.0 + (q % 9) as f64);
        let stack = LayerStack::new(DielectricSpec::VACUUM, layers, Termination::HalfSpace(exit)).unwrap();
        let pol = if q % 2 == 0 { Polarization::Te } else { Polarization::Tm };
        let f = 100e9 + (q as f64) * 7.3e9;
        let angle = (q % 60) as f64;
        let r = tmm_solve(&stack, f, pol, angle).map_err(|e| e.to_string())?;
        balance = balance.max((r.reflectance + r.transmittance - 1.0).abs());
    }
    check(
        closed < 1e-10 && balance < 1e-12,
        format!("closed-form err {closed:.2e}, energy balance err {balance:.2e}"),
    )
}

fn slab_error(cells_per_wavelength: f64) -> f64 {
    let eps = DielectricSpec::lossless(2.2).unwrap();
    let dz = C0 / 1e12 / eps.eps_r.sqrt() / cells_per_wavelength;
    let t = (cells_per_wavelength / 2.0).round() * dz;
    let layout = Layout {
        blocks: vec![DielectricBlock { name: "slab".into(), material: eps, x: [-dz, dz], y: [-dz, dz], z: [0.0, t] }],
        ..Default::default()
    };
    let axis = FrequencyAxis::from_band(600e9, 1000e9, 20e9).unwrap();
    let gamma = plane_wave_reflection(&layout, [2, 2], dz, t, axis, &PlaneWaveSetup::default()).unwrap();
    let stack = LayerStack::new(DielectricSpec::VACUUM, vec![Layer::slab(t, eps)], Termination::HalfSpace(DielectricSpec::VACUUM)).unwrap();
    gamma
        .iter()
        .map(|(f, g)| (g.norm() - tmm_reflection(&stack, f, Polarization::Te, 0.0).unwrap().norm()).abs())
        .fold(0.0, f64::max)
}

fn c3_slab_cross_check() -> Outcome {
    let start = Instant::now();
    let (coarse, fine) = (slab_error(20.0), slab_error(40.0));
    let elapsed = start.elapsed().as_secs_f64();
    check(
        coarse < 0.02 && fine < coarse && elapsed < 300.0,
        format!("max ||Γ| err| {coarse:.4} at 20 cells/λ, {fine:.4} at 40, {elapsed:.1} s"),
    )
}

fn column(nz: usize) -> Vec<f64> {
    let dz = 15.0 * UM;
    let mut cfg = SimulationConfig::new(VoxelGrid::vacuum([dz; 3], [1, 1, nz], [0.0; 3]));
    cfg.boundaries = [Boundary::Periodic, Boundary::Periodic, Boundary::Cpml];
    cfg.currents.push(CurrentSource { component: Component::Ex, lo: [0, 0, 30], hi: [1, 1, 31], amplitude: 1.0 });
    cfg.probes.push(Probe { component: Component::Ex, lo: [0, 0, 50], hi: [1, 1, 51] });
    cfg.stop.energy_threshold = 1e-12;
    run(cfg).unwrap().probes.remove(0).values
}

fn c4_boundaries() -> Outcome {
    let (short, long) = (column(100), column(2000));
    let n = short.len().min(long.len()).min(1500);
    let peak = long[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let echo = short[..n].iter().zip(&long[..n]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let cpml_db = 20.0 * (echo / peak).log10();

    let d = 15.0 * UM;
    let mut cfg = SimulationConfig::new(VoxelGrid::vacuum([d; 3], [16; 3], [-8.0 * d; 3]));
    cfg.boundaries = [Boundary::Pec; 3];
    cfg.currents.push(CurrentSource { component: Component::Ez, lo: [5, 7, 6], hi: [6, 8, 9], amplitude: 1.0 });
    let source_end = cfg.source.duration();
    let mut solver = Solver::new(cfg).map_err(|e| e.to_string())?;
    while solver.steps_taken() as f64 * solver.dt() <= source_end {
        solver.step(false);
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..10_000 {
        let w = solver.step(true).unwrap();
        lo = lo.min(w);
        hi = hi.max(w);
    }
    let spread = (hi - lo) / hi;
    check(
        cpml_db < -60.0 && lo > 0.0 && spread < 1e-3,
        format!("CPML reflection {cpml_db:.1} dB, PEC-box energy spread {:.2e} % over 1e4 steps", spread * 100.0),
    )
}

fn c5_dipole() -> Outcome {
    let (n, d) = (60, 12.5 * UM);
    let c = n / 2;
    let mut cfg = SimulationConfig::new(VoxelGrid::vacuum([d; 3], [n; 3], [-(n as f64) * d / 2.0; 3]));
    cfg.port = Some(PortSpec { cells: PortCells { i: c, columns: vec![c], k: [c, c + 1] }, impedance: 50.0 });
    cfg.ntff = Some(NtffSpec { frequencies: vec![700e9, 800e9, 900e9], margin: 4, patch: 1, stride: 0 });
    cfg.stop.energy_threshold = 1e-8;
    let r = run(cfg).map_err(|e| e.to_string())?;
    let near = r.near_field.as_ref().unwrap();
    let port = r.port.as_ref().unwrap();
    let (mut dir_err, mut bal_err) = (0.0f64, 0.0f64);
    let mut detail = Vec::new();
    for f in [700e9, 800e9, 900e9] {
        let ff = ntff_farfield(near, f, &FarFieldOptions::default()).map_err(|e| e.to_string())?;
        let balance = ff.radiated_power / port.accepted_power(f);
        dir_err = dir_err.max((ff.peak_directivity_dbi - 1.7609).abs());
        bal_err = bal_err.max((balance - 1.0).abs());
        detail.push(format!("{:.0} GHz {:.3} dBi", f / 1e9, ff.peak_directivity_dbi));
    }
    check(
        dir_err < 0.1 && bal_err < 0.03,
        format!("{}, power balance within {:.2} %", detail.join(", "), bal_err * 100.0),
    )
}

fn lock_in(samples: &[f64], dt: f64, w: f64, periods: usize) -> Complex64 {
    let n = (2.0 * PI / (w * dt) * periods as f64).round() as usize;
    let start = samples.len() - n;
    let sum: Complex64 = samples[start..]
        .iter()
        .enumerate()
        .map(|(i, &v)| v * Complex64::from_polar(1.0, -w * (start + i) as f64 * dt))
        .sum();
    2.0 * sum / n as f64
}

fn c6_graphene_ade() -> Outcome {
    let g = GrapheneSpec::default();
    let dt = 0.1e-15;
    let coeffs = drude_ade_coefficients(&g, dt).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for f in (0..=8).map(|n| 600e9 + 50e9 * n as f64) {
        let w = 2.0 * PI * f;
        let steps = (20.0 * g.tau / dt) as usize;
        let field: Vec<f64> = (0..steps).map(|n| (w * n as f64 * dt).cos()).collect();
        let measured = lock_in(&drive_sheet_current(&coeffs, &field), dt, w, 4);
        let exact = graphene_sigma(&g, f).map_err(|e| e.to_string())?;
        worst = worst.max((measured - exact).norm() / exact.norm());
    }
    check(worst < 0.01, format!("max rel err {:.3} % over 600–1000 GHz", worst * 100.0))
}

fn c7_trivial_cases() -> Outcome {
    let d0 = trentini_directivity(0.0).map_err(|e| e.to_string())?.linear;
    let d3 = trentini_directivity(1.0 / 3.0).map_err(|e| e.to_string())?.linear;
    let f = 800e9;
    let h = cavity_height(PI, PI, f, 0).map_err(|e| e.to_string())?;
    check(
        d0 == 1.0 && d3 == 2.0 && h == C0 / f / 2.0,
        format!("D(0) = {d0}, D(1/3) = {d3:?}, h = {h:e} m vs λ/2 = {:e} m", C0 / f / 2.0),
    )
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn sweep_twice(tmp: &Path, config: &str, extra: &[&str]) -> Result<usize, String> {
    let cfg = tmp.join("det.toml");
    fs::write(&cfg, config).map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for workers in ["1", "3"] {
        let mut args = vec!["sweep-zs", "--config", cfg.to_str().unwrap(), "--workers", workers, "--out", "det"];
        args.extend_from_slice(extra);
        let out = Command::new(env!("CARGO_BIN_EXE_prsant")).args(&args).current_dir(tmp).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        runs.push(dir_bytes(&tmp.join("det")));
        fs::remove_dir_all(tmp.join("det")).map_err(|e| e.to_string())?;
    }
    if runs[0] != runs[1] || !runs[0].iter().any(|(n, _)| n == SWEEP_SUMMARY_FILE) {
        return Err(format!("outputs differ between 1 and 3 workers ({} files)", runs[0].len()));
    }
    Ok(runs[0].len())
}

fn c8_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tmm = sweep_twice(
        tmp.path(),
        "[prs_cavity]\nsolver = \"tmm\"\n\n[prs_cavity.sheet]\ninductance = 1.3e-12\ncapacitance = 2.2e-15\n",
        &[],
    )?;
    let fdtd = sweep_twice(tmp.path(), "[prs_cavity]\nz_s = [10e-6, 20e-6]\n", &["--resolution", "0.2"])?;
    Ok(format!("TMM sweep ({tmm} files) and full-wave sweep ({fdtd} files) identical with 1 and 3 workers"))
}

/// Shared state of the full-wave trend criteria.
#[derive(Default)]
struct Trend {
    sweep: Option<Vec<SweepRow>>,
    bare_gain: Option<f64>,
}

fn c9_sweep(tmp: &Path, trend: &mut Trend) -> Outcome {
    let cfg = config(&tmp.join("sweep"));
    let start = Instant::now();
    let rows: Vec<SweepRow> = cmd_sweep_zs(&cfg)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|(_, r)| r.expect("sweep entries succeed when the sweep does"))
        .collect();
    let listing: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.0}:{}", r.z_s / UM, r.resonance_hz.map_or("-".into(), |f| format!("{:.1}", f / 1e9))))
        .collect();
    let pass = strictly_decreasing(&rows);
    trend.sweep = Some(rows);
    check(
        pass,
        format!(
            "resonance (µm:GHz) {} at {} cells/µm, {:.0} s",
            listing.join(" "),
            resolution(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c10_bare_band(tmp: &Path, trend: &mut Trend) -> Outcome {
    let cfg = config(&tmp.join("bare"));
    let run = run_antenna(&cfg, Model::Patch, 0.0, true).map_err(|e| e.to_string())?;
    trend.bare_gain = run.summary.peak_realized_gain_dbi;
    let (lo_ok, hi_ok) = (0.85 * 785e9, 1.15 * 785e9);
    let res = run.summary.resonance_hz.ok_or("no resonance in the band")?;
    let band = run
        .summary
        .bandwidth_hz
        .iter()
        .find(|b| b[0] <= res && res <= b[1])
        .ok_or_else(|| format!("no −10 dB band around the {:.1} GHz resonance", res / 1e9))?;
    let centre = 0.5 * (band[0] + band[1]);
    check(
        (lo_ok..=hi_ok).contains(&centre),
        format!(
            "resonance {:.1} GHz, −10 dB band {:.1}–{:.1} GHz ({:.1} GHz wide), centre {:.1} GHz vs {:.1}–{:.1}",
            res / 1e9,
            band[0] / 1e9,
            band[1] / 1e9,
            (band[1] - band[0]) / 1e9,
            centre / 1e9,
            lo_ok / 1e9,
            hi_ok / 1e9
        ),
    )
}

fn c11_gain_delta(trend: &Trend) -> Outcome {
    let rows = trend.sweep.as_ref().ok_or("needs the separation sweep")?;
    let bare = trend.bare_gain.ok_or("needs the bare-patch run")?;
    let best = rows
        .iter()
        .filter_map(|r| r.peak_realized_gain_dbi.map(|g| (r.z_s, g)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or("no gain in the sweep")?;
    let delta = best.1 - bare;
    check(
        delta > 0.0,
        format!(
            "best z_s {:.0} µm: {:.2} dBi vs bare {:.2} dBi, Δ = {:+.2} dB (reference {REFERENCE_GAIN_DELTA_DB} dB)",
            best.0 / UM,
            best.1,
            bare,
            delta
        ),
    )
}

fn c12_phase_transition(tmp: &Path) -> Outcome {
    let cfg = config(&tmp.join("unitcell"));
    let report = cmd_unitcell(&cfg).map_err(|e| e.to_string())?;
    let [lo, hi] = report.band_hz;
    let hit = report
        .fitted_crossings
        .iter()
        .find(|c| c.transition == "capacitive_to_inductive" && lo < c.frequency_hz && c.frequency_hz < hi);
    match hit {
        Some(c) => Ok(format!(
            "capacitive→inductive phase sign change (through {}) at {:.3} THz inside {:.1}–{:.1} THz, LC resonance {:.3} THz (L = {:.3e} H, C = {:.3e} F)",
            c.through,
            c.frequency_hz / 1e12,
            lo / 1e12,
            hi / 1e12,
            report.lc_resonance_hz / 1e12,
            report.sheet.inductance,
            report.sheet.capacitance
        )),
        None => Err(format!("no capacitive→inductive phase sign change in {:.1}–{:.1} THz: {:?}", lo / 1e12, hi / 1e12, report.fitted_crossings)),
    }
}

fn main() {
    // Quiet under `cargo test -- --list` and friends.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|n| n.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().map_or(true, |o| o.contains(&n));
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mut trend = Trend::default();
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut gating = 0;
    let mut failed = Vec::new();
    for n in 1..=12u32 {
        if !wanted(n) {
            continue;
        }
        let start = Instant::now();
        let outcome = match n {
            1 => c1_patch_width(),
            2 => c2_fresnel(),
            3 => c3_slab_cross_check(),
            4 => c4_boundaries(),
            5 => c5_dipole(),
            6 => c6_graphene_ade(),
            7 => c7_trivial_cases(),
            8 => c8_determinism(),
            9 => c9_sweep(tmp.path(), &mut trend),
            10 => c10_bare_band(tmp.path(), &mut trend),
            11 => c11_gain_delta(&trend),
            _ => c12_phase_transition(tmp.path()),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n}: PASS ({d}) [{secs:.1} s]"),
            Err(d) => {
                failed.push(n);
                if n <= 8 || strict {
                    gating += 1;
                }
                println!("criterion {n}: FAIL ({d}) [{secs:.1} s]");
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
    }
    if gating > 0 {
        std::process::exit(1);
    }
}
