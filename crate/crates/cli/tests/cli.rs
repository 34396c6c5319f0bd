use std::process::Command;

fn svlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_svlab"))
}

#[test]
fn check_runs_selected_criteria() {
    let out = svlab().args(["check", "--criterion", "3", "--criterion", "6"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 2, "{text}");
}

#[test]
fn unknown_criterion_is_an_error() {
    let out = svlab().args(["check", "--criterion", "12"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_source_is_an_error() {
    let out = svlab().arg("simulate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--scenario"));
}

#[test]
fn bad_config_reports_the_line() {
    let dir = std::env::temp_dir().join(format!("svlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "scenario = constant\nnx = 16\nbogus = 1\n").unwrap();
    let out = svlab().args(["cell", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cell_writes_a_manifest() {
    let dir = std::env::temp_dir().join(format!("svlab-cell-{}", std::process::id()));
    let out = svlab().args(["cell", "--scenario", "checkerboard-A0", "--out"]).arg(&dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("config_sha256 "));
    assert!(manifest.contains(" c0.csv"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn constant_coefficient_cell_passes_its_audits() {
    let dir = std::env::temp_dir().join(format!("svlab-const-{}", std::process::id()));
    let out = svlab().args(["cell", "--scenario", "constant", "--out"]).arg(&dir).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    std::fs::remove_dir_all(&dir).unwrap();
}
