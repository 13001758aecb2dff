use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lcspec"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn neg_x8() -> PathBuf {
    configs().join("neg_x8.toml")
}

fn free() -> PathBuf {
    configs().join("free_lp.toml")
}

fn run(args: &[&str], config: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--config").arg(config);
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

/// Config file in a temp dir; the dir must outlive the path.
fn write_config(text: &str) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, text).unwrap();
    (dir, path)
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn notes(text: &str) -> Vec<&str> {
    text.lines().filter_map(|l| l.strip_prefix("# ")).collect()
}

fn note_value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}: ");
    notes(text)
        .iter()
        .find_map(|n| n.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no note {key}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn classify_free_is_lp() {
    let o = run(&["classify"], &free());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["classification"], "LP");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn classify_auto_truncation_for_neg_x8() {
    let (_d, path) = write_config("[problem]\nq = \"-x^8\"\nalpha = \"inf\"\n[domain]\nx_max = \"auto\"\n");
    let o = run(&["classify"], &path);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["classification"], "LC");
    let x = v["x_max"].as_f64().unwrap();
    assert!((14.0..16.0).contains(&x), "x_max = {x}");
    assert_eq!(v["config"]["domain"]["x_max"].as_f64(), Some(x));
}

#[test]
fn unknown_key_is_a_config_error() {
    let (_d, path) = write_config("[problem]\nqq = \"0\"\n");
    let o = run(&["classify"], &path);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("qq"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let o = run(&["classify"], Path::new("/nonexistent/run.toml"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eig_matches_oracle_fixtures() {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/v1/oracle_eigenvalues.csv");
    let text = fs::read_to_string(fixtures).unwrap();
    let (fh, frows) = csv_rows(&text);
    let (t_col, x_col) = (
        fh.iter().position(|h| h == "t").unwrap(),
        fh.iter().position(|h| h == "extrapolated").unwrap(),
    );
    for t in ["0", "1", "inf"] {
        let (_d, path) = write_config(
            &fs::read_to_string(neg_x8())
                .unwrap()
                .replace("t = 0\n", &format!("t = \"{t}\"\n")),
        );
        let o = run(&["eig"], &path);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let out = stdout(&o);
        let (header, rows) = csv_rows(&out);
        assert_eq!(header, ["index", "lambda", "norm_sq", "weight", "secular_residual"]);
        let got: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
        let want: Vec<f64> = frows
            .iter()
            .filter(|r| r[t_col].parse::<f64>().ok() == t.parse::<f64>().ok() || (t == "inf" && r[t_col] == "inf"))
            .map(|r| r[x_col].parse().unwrap())
            .collect();
        assert_eq!(got.len(), want.len(), "t = {t}: {got:?} vs {want:?}");
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() / w.abs().max(1.0) <= 1e-4, "t = {t}: {g} vs {w}");
        }
        for r in &rows {
            let (n, w): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
            assert!((n * w - 1.0).abs() < 1e-12);
        }
        if t == "inf" {
            assert!(
                got.iter().any(|l| l.abs() < 1e-8),
                "zeta = 0 must be an eigenvalue of A_inf: {got:?}"
            );
        }
    }
}

#[test]
fn eig_empty_window_gives_header_only() {
    let o = run(&["eig", "--window", "3", "4"], &neg_x8());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header.len(), 5);
    assert!(rows.is_empty());
}

#[test]
fn eig_refuses_lp_problem() {
    let o = run(&["eig"], &free());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("LC required"), "{}", stderr(&o));
}

#[test]
fn csv_provenance_header() {
    let o = run(&["eig"], &neg_x8());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some(format!("# lcspec {}", env!("CARGO_PKG_VERSION")).as_str())
    );
    let cfg: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(cfg["problem"]["q"], "-x^8");
}

#[test]
fn resolvent_of_zero_is_zero() {
    let o = run(&["resolvent", "--h", "0"], &neg_x8());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn resolvent_residual_is_small() {
    let o = run(&["resolvent", "--z", "-1", "1"], &neg_x8());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(note_value(&out, "relative_residual") <= 1e-6);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["x", "re_u", "im_u", "residual"]);
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn resolvent_lp_reports_weyl_function() {
    let o = run(&["resolvent", "--lp"], &free());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(note_value(&out, "relative_residual") <= 1e-6);
    let line = notes(&out)
        .into_iter()
        .find(|n| n.starts_with("weyl_function: "))
        .unwrap();
    let w: Vec<f64> = line["weyl_function: ".len()..]
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    let s = 0.5f64.sqrt();
    assert!((w[0] + s).abs() < 1e-6 && (w[1] - s).abs() < 1e-6, "{w:?}");
}

#[test]
fn spectral_reports_all_fields() {
    let o = run(&["spectral"], &neg_x8());
    // The Bessel tail bound at W = 40 is above the tolerance, so the check
    // cannot certify a pass even though the discrepancy is within it.
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let v = json(&o);
    for key in [
        "z",
        "lhs",
        "rhs",
        "discrepancy",
        "relative_discrepancy",
        "tail_bound",
        "captured_mass",
        "h_norm_sq",
        "tolerance",
        "status",
        "required_window",
        "eigenvalue_count",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["status"], "INCONCLUSIVE");
    assert!(v["relative_discrepancy"].as_f64().unwrap() <= 1e-2);
    assert!(v["rhs"]["im"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_default_passes() {
    let o = run(&["verify"], &neg_x8());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 11);
    assert!(checks.iter().all(|c| c["status"] == "PASS"), "{checks:?}");
}

#[test]
fn verify_catches_sabotaged_solver() {
    let text = fs::read_to_string(neg_x8())
        .unwrap()
        .replace("ode_rtol = 1e-10", "ode_rtol = 1e-2");
    let (_d, path) = write_config(&text);
    let o = run(&["verify"], &path);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stderr(&o).contains("wronskian"), "{}", stderr(&o));
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn verify_lp_skips_lc_checks() {
    let o = run(&["verify"], &free());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["classification"], "LP");
    let checks = v["checks"].as_array().unwrap();
    let status = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["status"].clone();
    assert_eq!(status("oracle_eigenvalues"), "SKIPPED");
    assert_eq!(status("weyl_function"), "PASS");
    assert_eq!(status("lp_resolvent"), "PASS");
}

#[test]
fn output_is_byte_stable_and_out_flag_matches_stdout() {
    let a = run(&["eig", "--threads", "1"], &neg_x8());
    let b = run(&["eig", "--threads", "3"], &neg_x8());
    assert_eq!(a.stdout, b.stdout);
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("eig.csv");
    let c = bin()
        .args(["eig", "--config"])
        .arg(neg_x8())
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run(&["eig", "--threads", "0"], &neg_x8()).status.code(), Some(1));
    assert_eq!(run(&["eig", "--frobnicate"], &neg_x8()).status.code(), Some(1));
    assert_eq!(run(&["eig", "--h", "x"], &neg_x8()).status.code(), Some(1));
    assert_eq!(run(&["classify", "--lp"], &neg_x8()).status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
