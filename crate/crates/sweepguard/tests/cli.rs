use std::path::Path;
use std::process::{Command, Output};

use sweepguard::config::parse_config;
use sweepguard::output;

const MINIMAL: &str = r#"
[sweep]
delta_f_hz = 1.55e9

[odn]
[[odn.reflections]]
reach_m = 4300.0

[ofdm]
bandwidth_hz = 125e6
"#;

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweepguard"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn plan_writes_the_fixed_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let o = run(&["plan"], &cfg, tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("plan.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(output::PLAN_HEADER));
    assert!(csv.lines().count() >= 2);
}

#[test]
fn resolved_dump_parses_back_to_the_same_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), MINIMAL);
    assert!(run(&["plan"], &cfg_path, tmp.path()).status.success());
    let first = parse_config(&cfg_path).unwrap();
    let dumped = parse_config(&tmp.path().join("resolved_config.toml")).unwrap();
    assert_eq!(first, dumped);
}

#[test]
fn bad_reach_is_a_config_error_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &MINIMAL.replace("4300.0", "-1.0"));
    let o = run(&["plan"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("odn.reflections[0].reach_m"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["plan"], &tmp.path().join("absent.toml"), tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn no_common_frequency_exits_with_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{MINIMAL}\n[overlap]\nf_upper_hz = 900e6\n");
    let cfg = write_config(tmp.path(), &text);
    let o = run(&["plan"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(4));
    // the plan is still written, with an empty κ column
    let csv = std::fs::read_to_string(tmp.path().join("plan.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "");
}

#[test]
fn scan_without_grid_reports_missing_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let o = run(&["osrr-scan"], &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scan.osrr_db"));
}

#[test]
fn unknown_command_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    assert!(!run(&["teleport"], &cfg, tmp.path()).status.success());
}

#[test]
fn simulate_writes_four_cases_and_seed_flag_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{MINIMAL}\n[link]\nosrr_db = 5.0\n");
    let cfg = write_config(tmp.path(), &text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run(&["simulate"], &cfg, &a).status.success());
    assert!(run(&["simulate", "--seed", "7"], &cfg, &b).status.success());
    let sa = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    let sb = std::fs::read_to_string(b.join("summary.csv")).unwrap();
    assert_eq!(sa.lines().next(), Some(output::SUMMARY_HEADER));
    let cases: Vec<&str> = sa.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(cases, ["nofr_static", "nofr_swept", "fr_static", "fr_swept"]);
    assert_ne!(sa, sb);
    let evm = std::fs::read_to_string(a.join("evm.csv")).unwrap();
    assert_eq!(evm.lines().count(), 129);
    let spec = std::fs::read_to_string(a.join("spectrum.csv")).unwrap();
    assert_eq!(spec.lines().next(), Some(output::SPECTRUM_HEADER));
}

#[test]
fn pilot_writes_its_track() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{MINIMAL}\n[pilot]\nmode = \"free_running\"\n");
    let cfg = write_config(tmp.path(), &text);
    assert!(run(&["pilot"], &cfg, tmp.path()).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("pilot_track.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(output::TRACK_HEADER));
}

#[test]
fn map_rows_cover_every_pi_and_frequency() {
    let tmp = tempfile::tempdir().unwrap();
    let text =
        MINIMAL.to_string() + "\n[scan]\nf_lo_hz = 5e3\nf_hi_hz = 20e3\nf_step_hz = 100.0\npi_values = [0.2, 0.4]\n";
    let cfg = write_config(tmp.path(), &text);
    assert!(run(&["map"], &cfg, tmp.path()).status.success());
    let csv = std::fs::read_to_string(tmp.path().join("map.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(output::MAP_HEADER));
    assert_eq!(csv.lines().count(), 1 + 2 * 151);
}
