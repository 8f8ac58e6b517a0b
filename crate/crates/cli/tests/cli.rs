use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("parabolic-verify-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parabolic-verify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn weight_only_config_passes() {
    let cfg = fixture("weight_identity.toml");
    let out = verify(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("\"interpolation\""));
    assert!(text.contains("\"pass\": true"));
    assert!(!text.contains("\"sweep\""));
}

#[test]
fn backward_heat_fails() {
    let cfg = fixture("backward_heat.toml");
    let out = verify(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("condition (i)"), "{err}");
}

#[test]
fn errors_exit_with_two() {
    let out = verify(&["--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = scratch_dir("bad");
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[run]\nseed = 1\nunknown = 3\n").unwrap();
    let out = verify(&["--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let cfg = fixture("weight_identity.toml");
    let out = verify(&["--config", cfg.to_str().unwrap(), "--stage", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_selection_and_missing_sections() {
    let cfg = fixture("weight_identity.toml");
    // ln · (ln ln)^(-1/2) deviates by more than 0.05 at λ = 10, r = 1e8
    let out = verify(&["--config", cfg.to_str().unwrap(), "--stage", "weights"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Karamata deviation"));
    let text = stdout(&out);
    assert!(text.contains("\"weights\"") && !text.contains("\"interpolation\""));

    // the sweep needs [system], [domain] and [sweep]
    let out = verify(&["--config", cfg.to_str().unwrap(), "--stage", "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing [system] section"));
}

#[test]
fn full_fixture_passes_and_writes_csv() {
    let dir = scratch_dir("full");
    let report = dir.join("report.json");
    let cfg = fixture("heat_dirichlet.toml");
    let out = verify(&["--config", cfg.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(&report).unwrap();
    for key in [
        "\"weights\"",
        "\"parabolicity\"",
        "\"compatibility\"",
        "\"interpolation\"",
        "\"sweep\"",
    ] {
        assert!(json.contains(key), "{key} missing");
    }
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("cutoff,draw,solution_norm,data_norm,ratio"));
    assert_eq!(lines.count(), 3 * 30);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = scratch_dir("seeded");
    let text = std::fs::read_to_string(fixture("heat_dirichlet.toml")).unwrap();
    let small = text
        .replace("cutoffs = [8, 16, 32]", "cutoffs = [4, 8]")
        .replace("samples = 30", "samples = 4");
    let cfg = dir.join("small.toml");
    std::fs::write(&cfg, small).unwrap();
    let run = |seed: &str, name: &str| {
        let path = dir.join(name);
        let out = verify(&[
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (
            std::fs::read(&path).unwrap(),
            std::fs::read(path.with_extension("csv")).unwrap(),
        )
    };
    let a = run("11", "a.json");
    let b = run("11", "b.json");
    let c = run("12", "c.json");
    assert_eq!(a, b);
    assert_ne!(a.1, c.1);
}
