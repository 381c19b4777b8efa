use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn psector(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psector"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("PSECTOR_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn exponent_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(dir.path(), &["exponent", "--nu", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "k = 1\n");

    let o = psector(dir.path(), &["exponent", "--nu", "0.5", "--p", "3"]);
    assert_eq!(stdout(&o), "k = 0.6666666667\n");

    let o = psector(dir.path(), &["exponent", "--nu", "0.4", "--p", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nu must be >= 0.5"), "{}", stderr(&o));

    let o = psector(dir.path(), &["exponent", "--nu", "2", "--p", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p must be > 1"));
}

#[test]
fn exponent_extras_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(
        dir.path(),
        &["exponent", "--nu", "1.5", "--p", "3", "--derivatives", "--roots"],
    );
    let text = stdout(&o);
    assert!(text.starts_with("k = 1.360750117\n"), "{text}");
    assert!(text.contains("k1 = 1.360750117"));
    assert!(text.contains("dk/dnu = "));

    let o = psector(
        dir.path(),
        &["exponent", "--table", "--nu-grid", "0.5,1,2", "--p-grid", "1.5,2,inf"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("exponent_table_grid_grid.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);
    assert!(dir.path().join("exponent_table_grid_grid.json").exists());
}

#[test]
fn profile_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(dir.path(), &["profile", "--nu", "2", "--p", "3", "--samples", "128"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("band constant c = "));
    let rows = csv_rows(&fs::read_to_string(dir.path().join("profile_2_3.csv")).unwrap());
    assert!((rows[0][0] + std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    assert!(rows[0][2].abs() < 1e-12);

    let out = dir.path().join("sub/cos.csv");
    let o = psector(
        dir.path(),
        &["profile", "--nu", "1", "--p", "2", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    for r in csv_rows(&fs::read_to_string(&out).unwrap()) {
        assert!((r[2] - r[0].cos()).abs() < 1e-12);
    }

    psector(dir.path(), &["profile", "--nu", "1", "--p", "1.5"]);
    let text = fs::read_to_string(dir.path().join("profile_1_1.5.csv")).unwrap();
    assert!(text.lines().any(|l| l == "# case: P_LT2_STREAM"));
}

#[test]
fn measure_writes_field_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(
        dir.path(),
        &["measure", "--nu", "1", "--p", "2", "--n-r", "128", "--n-phi", "128"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_1_2.json")).unwrap()).unwrap();
    let slope = summary["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
    assert_eq!(summary["converged"], true);
    let field = fs::read_to_string(dir.path().join("measure_1_2.csv")).unwrap();
    assert_eq!(csv_rows(&field).len(), 129 * 129);
}

#[test]
fn measure_variants() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(
        dir.path(),
        &[
            "measure",
            "--nu",
            "2",
            "--p",
            "3",
            "--inner-arc",
            "--n-r",
            "64",
            "--n-phi",
            "64",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_inner_2_3.json")).unwrap()).unwrap();
    assert_eq!(s["problem"]["arc"], "inner_arc");

    let o = psector(
        dir.path(),
        &[
            "measure",
            "--nu",
            "1",
            "--p",
            "2",
            "--n-r",
            "64",
            "--n-phi",
            "64",
            "--mc-check",
            "--seed",
            "7",
            "--walks",
            "4000",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_1_2.json")).unwrap()).unwrap();
    assert_eq!(s["mc_check"]["seed"], 7);
    assert_eq!(s["mc_check"]["points"].as_array().unwrap().len(), 10);

    let o = psector(dir.path(), &["measure", "--nu", "1", "--p", "3", "--mc-check"]);
    assert_eq!(o.status.code(), Some(2));
    let o = psector(dir.path(), &["measure", "--nu", "1", "--p", "inf"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_4_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(
        dir.path(),
        &[
            "measure",
            "--nu",
            "1",
            "--p",
            "4",
            "--n-r",
            "32",
            "--n-phi",
            "32",
            "--max-iterations",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_1_4.json")).unwrap()).unwrap();
    assert_eq!(s["converged"], false);
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "measure",
        "--nu",
        "1",
        "--p",
        "2",
        "--n-r",
        "32",
        "--n-phi",
        "32",
        "--mc-check",
        "--seed",
        "3",
        "--walks",
        "2000",
    ];
    let oa = psector(a.path(), &args);
    let ob = psector(b.path(), &args);
    assert_eq!(oa.status.code(), Some(0));
    let strip = |s: String, d: &Path| s.replace(d.to_str().unwrap(), "");
    assert_eq!(strip(stdout(&oa), a.path()), strip(stdout(&ob), b.path()));
    for f in ["measure_1_2.json", "measure_1_2.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = psector(dir.path(), &["verify", "exponent"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().join("exponent_table_grid_grid.json").exists());

    let o = psector(dir.path(), &["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"));

    let o = psector(dir.path(), &["verify", "all", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn verify_failure_exits_1() {
    // an 8x8 grid cannot hold the fit window
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.toml");
    fs::write(&cfg, "n_r = 8\nn_phi = 8\nwalks = 500\n").unwrap();
    let o = psector(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "verify", "measure", "--quick"],
    );
    assert_eq!(o.status.code(), Some(1), "{}{}", stdout(&o), stderr(&o));
    assert!(stderr(&o).contains("first failed criterion"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n_r = 16\nn_phi = 16\nsamples = 32\n").unwrap();
    let c = cfg.to_str().unwrap();

    let o = psector(dir.path(), &["--config", c, "profile", "--nu", "1", "--p", "3"]);
    assert!(stdout(&o).contains("rows = 33"), "{}", stdout(&o));
    let o = psector(
        dir.path(),
        &["--config", c, "profile", "--nu", "1", "--p", "3", "--samples", "64"],
    );
    assert!(stdout(&o).contains("rows = 65"));

    psector(
        dir.path(),
        &["--config", c, "measure", "--nu", "1", "--p", "2", "--n-phi", "24"],
    );
    let s: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measure_1_2.json")).unwrap()).unwrap();
    assert_eq!(s["problem"]["n_r"], 16);
    assert_eq!(s["problem"]["n_phi"], 24);

    fs::write(&cfg, "n_r = 16\ngrid = 3\n").unwrap();
    let o = psector(dir.path(), &["--config", c, "exponent", "--nu", "1", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field"));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_psector"))
        .current_dir(dir.path())
        .env("PSECTOR_OUT_DIR", dir.path().join("env-out"))
        .args(["profile", "--nu", "1", "--p", "2", "--samples", "16"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("env-out/profile_1_2.csv").exists());
}
