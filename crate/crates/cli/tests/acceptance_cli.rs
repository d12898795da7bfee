//! CLI acceptance: determinism of reports and artifact content against the
//! committed desk-oracle table. Prints one pass/fail line per criterion
//! block; run with `-- --nocapture`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

fn run_cli(args: &[&str], out_dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_collarext"))
        .current_dir(workspace_root())
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn read_to_string(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn criterion_8_deterministic_reports() {
    let start = Instant::now();
    let tmp = std::env::temp_dir().join("collarext-acceptance");
    let _ = std::fs::remove_dir_all(&tmp);

    for (subcommand, config) in [
        ("sweep-slab", "configs/sweep.json"),
        ("milnor-glue", "configs/milnor.json"),
        ("verify-map", "configs/verify.json"),
    ] {
        let out_a = tmp.join(format!("{subcommand}-a"));
        let out_b = tmp.join(format!("{subcommand}-b"));
        let status_a = run_cli(&[subcommand, "--config", config, "--seed", "12345"], &out_a);
        let status_b = run_cli(&[subcommand, "--config", config, "--seed", "12345"], &out_b);
        assert!(
            status_a.status.success(),
            "{subcommand} failed: {}",
            String::from_utf8_lossy(&status_a.stderr)
        );
        assert!(status_b.status.success());
        let report_a = read_to_string(&out_a.join("report.json"));
        let report_b = read_to_string(&out_b.join("report.json"));
        assert_eq!(report_a, report_b, "{subcommand}: reports differ between runs");
        assert!(report_a.contains("\"config_hash\""));
        assert!(report_a.contains("\"tool_version\""));
        for artifact in ["slab_sweep.json"] {
            let pa = out_a.join(artifact);
            if pa.exists() {
                assert_eq!(
                    read_to_string(&pa),
                    read_to_string(&out_b.join(artifact)),
                    "{subcommand}: artifact {artifact} differs"
                );
            }
        }
    }
    println!("criterion 8 (deterministic reports): PASS ({:.1} s)", start.elapsed().as_secs_f64());
}

#[test]
fn sweep_flags_match_committed_golden_table() {
    let tmp = std::env::temp_dir().join("collarext-golden-check");
    let _ = std::fs::remove_dir_all(&tmp);
    let out = tmp.join("sweep");
    let status = run_cli(&["sweep-slab", "--config", "configs/sweep.json"], &out);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let rows: serde_json::Value =
        serde_json::from_str(&read_to_string(&out.join("slab_sweep.json"))).unwrap();
    let golden_path = workspace_root().join("crates/core/tests/golden/slab_sweep_golden.json");
    let golden: serde_json::Value = serde_json::from_str(&read_to_string(&golden_path)).unwrap();
    let rows = rows.as_array().unwrap();
    let golden = golden.as_array().unwrap();
    assert_eq!(rows.len(), golden.len());
    for (row, gold) in rows.iter().zip(golden) {
        assert_eq!(row["a"], gold["a"]);
        assert_eq!(
            row["separated"], gold["separated"],
            "separated flag mismatch at a = {}",
            row["a"]
        );
        assert_eq!(row["c1_at_pole"], gold["c1_at_pole"], "inner pole flag at a = {}", row["a"]);
        assert_eq!(row["c2_at_pole"], gold["c2_at_pole"], "outer pole flag at a = {}", row["a"]);
        let c1 = row["c1"].as_f64().unwrap();
        let c1_gold = gold["c1"].as_f64().unwrap();
        assert!((c1 - c1_gold).abs() < 5e-3);
    }
    println!("sweep-slab flags match the committed desk-oracle table: PASS");
}

#[test]
fn hypothesis_violations_exit_with_config_code() {
    let tmp = std::env::temp_dir().join("collarext-exitcodes");
    let _ = std::fs::remove_dir_all(&tmp);

    // p >= n is a hypothesis violation: exit code 2.
    let bad = tmp.join("bad-config.json");
    std::fs::create_dir_all(&tmp).unwrap();
    let cfg = read_to_string(&workspace_root().join("configs/collar.json"))
        .replace("\"exponent\": 1.5", "\"exponent\": 3.0");
    std::fs::write(&bad, cfg).unwrap();
    let out = tmp.join("collar-bad");
    let status = run_cli(
        &["extend-collar", "--config", bad.to_str().unwrap()],
        &out,
    );
    assert_eq!(status.status.code(), Some(2), "expected config exit code");
    let err = String::from_utf8_lossy(&status.stderr);
    assert!(err.contains("p < n"), "hypothesis message missing: {err}");

    // Unreadable config: exit code 2.
    let status = run_cli(&["verify-map", "--config", "configs/missing.json"], &tmp.join("x"));
    assert_eq!(status.status.code(), Some(2));
    println!("CLI exit codes: PASS");
}

#[test]
fn pipelines_run_end_to_end_from_configs() {
    let start = Instant::now();
    let tmp = std::env::temp_dir().join("collarext-pipelines");
    let _ = std::fs::remove_dir_all(&tmp);

    for (subcommand, config) in [
        ("extend-identity", "configs/identity.json"),
        ("extend-punctured", "configs/punctured.json"),
        ("extend-collar", "configs/collar.json"),
        ("plot-data", "configs/plot.json"),
    ] {
        let out = tmp.join(subcommand);
        let status = run_cli(&[subcommand, "--config", config], &out);
        assert!(
            status.status.success(),
            "{subcommand} failed:\n{}\n{}",
            String::from_utf8_lossy(&status.stdout),
            String::from_utf8_lossy(&status.stderr)
        );
        assert!(out.join("report.json").exists());
    }
    // Plot artifacts carry the expected CSV header.
    let shear_csv = read_to_string(&tmp.join("plot-data").join("shear_levels.csv"));
    assert!(shear_csv.starts_with("x1,xn,branch-id\n"));
    assert!(!shear_csv.contains('\r'));
    let stages_csv = read_to_string(&tmp.join("plot-data").join("gstar_stages.csv"));
    assert!(stages_csv.starts_with("x1,xn,branch-id\n"));
    println!(
        "pipeline subcommands run from configs: PASS ({:.1} s)",
        start.elapsed().as_secs_f64()
    );
}
