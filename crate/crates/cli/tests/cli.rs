use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prsant_cli::commands::{CompareReport, DesignReport, S11_FILE, SUMMARY_FILE, SWEEP_SUMMARY_FILE};
use prsant_cli::output::{header, write_s11_csv, write_text};
use prsant_cli::pipeline::RunSummary;
use prsant_cli::config::Model;
use prsant_cli::RunConfig;
use prsant_core::{Complex64, FrequencyAxis, Spectrum};

fn prsant(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prsant")).args(args).current_dir(cwd).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn strip_header(text: &str) -> String {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect()
}

/// The commented header, with the `# ` prefixes removed, minus the banner lines.
fn header_config(text: &str) -> RunConfig {
    let body: String = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .skip(2)
        .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
        .collect();
    RunConfig::from_toml(&body).unwrap()
}

#[test]
fn design_writes_report_with_config_header() {
    let tmp = tempfile::tempdir().unwrap();
    let out = prsant(&["design", "--out", "res"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("res/design.toml")).unwrap();
    assert!(text.starts_with("# prsant design "));
    let report: DesignReport = toml::from_str(&strip_header(&text)).unwrap();
    assert!((report.closed_form.width - 79.18e-6).abs() < 0.01e-6);
    assert!((report.geometry.w_p - 60e-6).abs() < 1e-15);
    let echoed = header_config(&text);
    assert_eq!(echoed.output.dir, PathBuf::from("res"));
    assert!(echoed.fdtd.port_impedance.is_some());
}

#[test]
fn negative_resonance_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[design]\nf_r = -800e9\n");
    let out = prsant(&["design", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("f_r"));
}

#[test]
fn unknown_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[fdtd]\nresolutoin = 2.0\n");
    let out = prsant(&["design", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_config_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = prsant(&["design", "--config", "nowhere.toml"], tmp.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn bad_flags_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&prsant(&["design", "--workers", "0"], tmp.path())), 1);
    assert_eq!(code(&prsant(&["design", "--resolution=-1"], tmp.path())), 1);
    assert_eq!(code(&prsant(&["design", "--bogus"], tmp.path())), 1);
    assert_eq!(code(&prsant(&["--help"], tmp.path())), 0);
}

#[test]
fn empty_separation_list_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[prs_cavity]\nz_s = []\nsolver = \"tmm\"\n");
    let out = prsant(&["sweep-zs", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&out), 1);
}

const TMM_SWEEP: &str = "[prs_cavity]\nsolver = \"tmm\"\n\n[prs_cavity.sheet]\ninductance = 1.3e-12\ncapacitance = 2.2e-15\n";

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn tmm_sweep_is_worker_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), TMM_SWEEP);
    let mut runs = Vec::new();
    for workers in ["1", "3"] {
        let out = prsant(&["sweep-zs", "--config", cfg.to_str().unwrap(), "--workers", workers, "--out", "sweep"], tmp.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(dir_bytes(&tmp.path().join("sweep")));
        fs::remove_dir_all(tmp.path().join("sweep")).unwrap();
    }
    assert_eq!(runs[0].len(), 9);
    assert_eq!(runs[0], runs[1]);
    let summary = String::from_utf8(runs[0].iter().find(|(n, _)| n == SWEEP_SUMMARY_FILE).unwrap().1.clone()).unwrap();
    let rows = strip_header(&summary).lines().count() - 1;
    assert_eq!(rows, 8);
}

fn v_curve(centre: f64) -> Spectrum {
    let axis = FrequencyAxis::from_band(600e9, 1000e9, 1e9).unwrap();
    Spectrum::try_from_fn(axis, |f| {
        let db = -25.0 + 0.4 * (f - centre).abs() / 1e9;
        Ok(Complex64::from_polar(10f64.powf(db.min(0.0) / 20.0), 0.3))
    })
    .unwrap()
}

fn fake_run(dir: &Path, centre: f64, gain: f64) {
    fs::create_dir_all(dir).unwrap();
    let cfg = RunConfig::default();
    let head = header("simulate", &cfg);
    write_s11_csv(&dir.join(S11_FILE), &head, &v_curve(centre)).unwrap();
    let summary = RunSummary {
        model: Model::Patch,
        z_s_m: None,
        resonance_hz: Some(centre),
        bandwidth_hz: vec![],
        total_bandwidth_hz: 0.0,
        peak_realized_gain_dbi: Some(gain),
        peak_gain_frequency_hz: Some(centre),
        port_impedance_ohm: 300.0,
        steps: 1,
        converged: true,
        wall_clock_s: 0.0,
        cell_count: 1,
    };
    write_text(&dir.join(SUMMARY_FILE), &head, &toml::to_string(&summary).unwrap()).unwrap();
}

fn compare(tmp: &Path, a: &str, b: &str) -> (i32, Option<CompareReport>) {
    let out = prsant(&["compare", a, b, "--out", "cmp"], tmp);
    let report = fs::read_to_string(tmp.join("cmp/compare.toml")).ok().map(|t| toml::from_str(&strip_header(&t)).unwrap());
    (code(&out), report)
}

#[test]
fn run_compared_with_itself_has_zero_deltas() {
    let tmp = tempfile::tempdir().unwrap();
    fake_run(&tmp.path().join("a"), 800e9, 5.0);
    let (c, report) = compare(tmp.path(), "a", "a");
    assert_eq!(c, 0);
    let r = report.unwrap();
    assert_eq!(r.resonance_shift_hz, Some(0.0));
    assert_eq!(r.bandwidth_delta_hz, 0.0);
    assert_eq!(r.peak_gain_delta_db, Some(0.0));
}

#[test]
fn known_shift_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fake_run(&tmp.path().join("a"), 820e9, 5.0);
    fake_run(&tmp.path().join("b"), 790e9, 6.07);
    let (c, report) = compare(tmp.path(), "a", "b");
    assert_eq!(c, 0);
    let r = report.unwrap();
    assert!((r.resonance_shift_hz.unwrap() + 30e9).abs() < 1e3, "{r:?}");
    assert!(r.bandwidth_delta_hz.abs() < 1e3);
    assert!((r.peak_gain_delta_db.unwrap() - 1.07).abs() < 1e-12);
}

#[test]
fn mismatched_axes_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fake_run(&tmp.path().join("a"), 800e9, 5.0);
    let b = tmp.path().join("b");
    fake_run(&b, 800e9, 5.0);
    let short = v_curve(800e9).restricted(600e9, 900e9).unwrap();
    write_s11_csv(&b.join(S11_FILE), "", &short).unwrap();
    let (c, _) = compare(tmp.path(), "a", "b");
    assert_eq!(c, 1);
    assert_eq!(compare(tmp.path(), "a", "missing").0, 3);
}

#[test]
fn report_collects_results() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&prsant(&["report", "--out", "res"], tmp.path())), 3);
    assert_eq!(code(&prsant(&["design", "--out", "res"], tmp.path())), 0);
    fake_run(&tmp.path().join("res/bare"), 800e9, 5.0);
    let out = prsant(&["report", "--out", "res"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(tmp.path().join("res/report.txt")).unwrap();
    assert!(text.contains("== Patch design =="));
    assert!(text.contains("== Run bare =="));
}
