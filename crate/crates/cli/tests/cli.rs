use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hanle_core::scenario::{parse_config, parse_csv_metadata};

const SMALL: &str = "\
system = model_1_2_closed
laser.rabi_over_gamma = 0.05
scan.min = -0.01
scan.max = 0.01
scan.points = 3
outputs = ground_populations, coherence
";

fn hanle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hanle-obe")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn small_scan_has_header_and_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let out = dir.path().join("small.csv");
    let status = hanle(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(!csv.contains('\r'));
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 4);
    assert_eq!(
        body[0],
        "b_larmor,pi_e,chi_im,ground_pop_m-1,ground_pop_m0,ground_pop_m+1,coherence"
    );
    assert!(body[1..].iter().all(|row| row.split(',').count() == 7));
    assert_eq!(parse_csv_metadata(&csv).unwrap(), parse_config(SMALL).unwrap());
    assert!(!dir.path().join("small.csv.partial").exists());
}

#[test]
fn output_matches_golden_file_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let first = hanle(&["run", "--config", &cfg]);
    let second = hanle(&["run", "--config", &cfg, "--threads", "2"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let golden = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/small.csv")).unwrap();
    assert_eq!(first.stdout, golden, "regenerate tests/golden/small.csv if the output format changed on purpose");
}

#[test]
fn preset_and_file_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(hanle(&["run", "--preset", "fig5_low", "--out", a.to_str().unwrap()]).status.success());
    let cfg = write(dir.path(), "fig5.cfg", &fs::read_to_string(&a).unwrap().lines().filter_map(|l| l.strip_prefix("# ")).map(|l| format!("{l}\n")).collect::<String>());
    assert!(hanle(&["run", "--config", &cfg, "--out", b.to_str().unwrap()]).status.success());
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let both = write(dir.path(), "both.cfg", "system = rb87_2_3\nlaser.rabi_over_gamma = 0.1\nlaser.intensity_mw_cm2 = 1\n");
    let out = hanle(&["run", "--config", &both]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("laser.rabi_over_gamma") && err.contains("laser.intensity_mw_cm2"), "{err}");

    let bad = write(dir.path(), "bad.cfg", "system = rb87_2_3\nlaser.rabi_over_gamma = 0.1\nscan.points = -4\n");
    assert_eq!(hanle(&["run", "--config", &bad]).status.code(), Some(1));
    assert_eq!(hanle(&["run", "--preset", "fig9"]).status.code(), Some(1));
}

#[test]
fn solver_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let open = write(dir.path(), "open.cfg", "system = rb87_1_2_open\nlaser.rabi_over_gamma = 0.1\nscan.points = 3\n");
    let out = hanle(&["run", "--config", &open]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrated"));
}

#[test]
fn io_errors_exit_with_three_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.cfg", SMALL);
    let target = dir.path().join("missing").join("out.csv");
    assert_eq!(hanle(&["run", "--config", &cfg, "--out", target.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(hanle(&["run", "--config", dir.path().join("nope.cfg").to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn presets_list_names_everything() {
    let out = hanle(&["presets", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["fig2_low", "fig4", "fig5_high", "rb87_1_2_open", "cs_4_5"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn help_documents_config_defaults() {
    let out = hanle(&["run", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("scan.points") && text.contains("[201]"), "{text}");
}

#[test]
fn check_runs_the_quick_subset() {
    let out = hanle(&["check"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 5);
}
