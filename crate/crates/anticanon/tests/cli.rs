//! End-to-end tests of the `anticanon` binary: exit-code contract, file
//! round-trips, and the generate → check → decompose workflow.

use std::path::Path;
use std::process::{Command, Output};

use anticanon::files;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anticanon"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary should run")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal expected")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

const PAULI_PAIR: &str = r#"{
  "format": "anticanon/1",
  "field_mode": "complex",
  "n": 2,
  "operators": [
    {"name": "A1", "matrix": [[[0,0],[1,0]],[[1,0],[0,0]]]},
    {"name": "A2", "matrix": [[[0,0],[0,-1]],[[0,1],[0,0]]]}
  ]
}"#;

const NILPOTENT: &str = r#"{
  "format": "anticanon/1",
  "field_mode": "real",
  "n": 2,
  "operators": [
    {"name": "A1", "matrix": [[0, 1], [0, 0]]}
  ]
}"#;

const MISMATCHED_N: &str = r#"{
  "format": "anticanon/1",
  "field_mode": "real",
  "n": 3,
  "operators": [
    {"name": "A1", "matrix": [[0, 1], [1, 0]]}
  ]
}"#;

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pauli = dir.path().join("pauli.json");
    write(&pauli, PAULI_PAIR);
    let out = run(bin().arg("check").arg(&pauli));
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("anti-commutation"), "{stdout}");

    let nil = dir.path().join("nil.json");
    write(&nil, NILPOTENT);
    let out = run(bin().arg("check").arg(&nil));
    assert_eq!(exit_code(&out), 2);

    let bad = dir.path().join("bad.json");
    write(&bad, MISMATCHED_N);
    let out = run(bin().arg("check").arg(&bad));
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rows"));

    let out = run(bin().arg("check").arg(dir.path().join("missing.json")));
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn decompose_writes_report_with_canonical_forms() {
    let dir = tempfile::tempdir().unwrap();
    let pauli = dir.path().join("pauli.json");
    write(&pauli, PAULI_PAIR);
    let report_path = dir.path().join("report.json");
    let out = run(bin()
        .arg("decompose")
        .arg(&pauli)
        .arg("-o")
        .arg(&report_path)
        .arg("--canon"));
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let report = files::load_report(&report_path).unwrap();
    assert_eq!(report.blocks.len(), 1);
    assert_eq!(report.blocks[0].kind, "clifford");
    assert_eq!(report.blocks[0].dim, 2);
    assert_eq!(report.blocks[0].support, vec!["A1", "A2"]);
    assert!(report.residuals.anticommutation <= 1e-9);
    let forms = report.canonical_forms.expect("--canon requested");
    assert_eq!(forms.len(), 1);

    // Machine report and human summary agree on the block inventory.
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("clifford dim 2"), "{stdout}");
}

#[test]
fn report_file_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let pauli = dir.path().join("pauli.json");
    write(&pauli, PAULI_PAIR);
    let report_path = dir.path().join("report.json");
    let out = run(bin()
        .arg("decompose")
        .arg(&pauli)
        .arg("-o")
        .arg(&report_path)
        .arg("--canon"));
    assert_eq!(exit_code(&out), 0);

    let report = files::load_report(&report_path).unwrap();
    let resaved = dir.path().join("resaved.json");
    files::save_report(&resaved, &report).unwrap();
    let reloaded = files::load_report(&resaved).unwrap();
    assert_eq!(report, reloaded);
    // Bytes are stable too once normalized through one save.
    assert_eq!(
        std::fs::read(&report_path).unwrap(),
        std::fs::read(&resaved).unwrap()
    );
}

#[test]
fn decompose_tol_flag_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let pauli = dir.path().join("pauli.json");
    write(&pauli, PAULI_PAIR);
    let report_path = dir.path().join("report.json");
    let out = run(bin()
        .arg("decompose")
        .arg(&pauli)
        .arg("-o")
        .arg(&report_path)
        .arg("--tol")
        .arg("1e-7"));
    assert_eq!(exit_code(&out), 0);
    let report = files::load_report(&report_path).unwrap();
    assert_eq!(report.tolerance.rel_zero, 1e-7);
    assert_eq!(report.tolerance.eig_cluster, 1e-7 * 100.0);
}

#[test]
fn generate_check_decompose_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write(
        &spec,
        r#"{
  "format": "anticanon-genspec/1",
  "field_mode": "complex",
  "operators": 5,
  "seed": 424242,
  "blocks": [
    {"kind": "kernel", "dim": 1},
    {"kind": "single", "dim": 1, "operator": 4, "constant": [4.0, 0.0]},
    {"kind": "single", "dim": 1, "operator": 4, "constant": [9.0, 0.0]},
    {"kind": "single", "dim": 1, "operator": 2, "constant": [4.0, 0.0]},
    {"kind": "clifford", "dim": 2, "support": [3, 5], "constants": [[1,0],[2,0]]},
    {"kind": "clifford", "dim": 6, "support": [2, 4], "constants": [[1,0],[2,0]]},
    {"kind": "clifford", "dim": 2, "support": [1, 3, 5], "constants": [[1,0],[1,0],[1,0]]},
    {"kind": "clifford", "dim": 2, "support": [1, 3, 5], "constants": [[2,0],[1,0],[1,0]]},
    {"kind": "clifford", "dim": 4, "support": [1, 3, 4, 5], "constants": [[1,0],[1,0],[1,0],[1,0]]}
  ],
  "scramble": {"cond_max": 50.0}
}"#,
    );
    let fam_path = dir.path().join("family.json");
    let out = run(bin().arg("generate").arg(&spec).arg("-o").arg(&fam_path));
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(fam_path.exists());
    let sidecar = dir.path().join("family.expected.json");
    assert!(sidecar.exists());

    // Generated family files are always accepted by check.
    let out = run(bin().arg("check").arg(&fam_path));
    assert_eq!(
        exit_code(&out),
        0,
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );

    let report_path = dir.path().join("report.json");
    let out = run(bin()
        .arg("decompose")
        .arg(&fam_path)
        .arg("-o")
        .arg(&report_path)
        .arg("--canon"));
    assert_eq!(exit_code(&out), 0);
    let report = files::load_report(&report_path).unwrap();
    // Kernel 1, U(A4) 2, U(A2) 1, and five Clifford blocks.
    assert_eq!(report.blocks.len(), 8);
    let dims: Vec<usize> = report.blocks.iter().map(|b| b.dim).collect();
    assert_eq!(dims.iter().sum::<usize>(), 20);

    // The library-level verifier agrees with the sidecar.
    let (ok, diff) = anticanon::commands::verify_generated(&fam_path, None).unwrap();
    assert!(ok, "{diff}");
}

#[test]
fn generate_seed_repetition_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    write(
        &spec,
        r#"{
  "format": "anticanon-genspec/1",
  "field_mode": "real",
  "operators": 2,
  "blocks": [{"kind": "clifford", "dim": 4, "support": [1, 2], "constants": [2.0, -3.0]}],
  "scramble": {"cond_max": 25.0}
}"#,
    );
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    assert_eq!(
        exit_code(&run(bin()
            .arg("generate")
            .arg(&spec)
            .arg("-o")
            .arg(&out_a)
            .arg("--seed")
            .arg("123"))),
        0
    );
    assert_eq!(
        exit_code(&run(bin()
            .arg("generate")
            .arg(&spec)
            .arg("-o")
            .arg(&out_b)
            .arg("--seed")
            .arg("123"))),
        0
    );
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );
}

#[test]
fn generate_rejects_invalid_spec_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    // 3 generators on a 3-dimensional block: not divisible by 2.
    write(
        &spec,
        r#"{
  "format": "anticanon-genspec/1",
  "field_mode": "complex",
  "operators": 3,
  "blocks": [{"kind": "clifford", "dim": 3, "support": [1,2,3], "constants": [[1,0],[1,0],[1,0]]}]
}"#,
    );
    let out = run(bin()
        .arg("generate")
        .arg(&spec)
        .arg("-o")
        .arg(dir.path().join("f.json")));
    assert_eq!(exit_code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("divisible"));
}

#[test]
fn no_partial_report_on_failure() {
    // Decompose on a hypothesis-violating family must not leave a file.
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("ids.json");
    write(
        &fam,
        r#"{
  "format": "anticanon/1",
  "field_mode": "real",
  "n": 2,
  "operators": [
    {"name": "A1", "matrix": [[1, 0], [0, 1]]},
    {"name": "A2", "matrix": [[1, 0], [0, 1]]}
  ]
}"#,
    );
    let report = dir.path().join("report.json");
    let out = run(bin().arg("decompose").arg(&fam).arg("-o").arg(&report));
    assert_eq!(exit_code(&out), 1);
    assert!(!report.exists());
    // No stray temp files either.
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|name| name.contains("tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}
