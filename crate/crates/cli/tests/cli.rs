use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spinsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinsq"))
        .args(args)
        .env_remove("SPINSQ_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(file).display()))
}

const POINT: [&str; 6] = ["--Ctilde", "100", "--delta-tilde", "10", "--I2", "25.2"];

#[test]
fn bare_invocation_prints_help_and_exits_2() {
    let o = spinsq(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn missing_parameter_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = spinsq(&["variance", "--Ctilde", "100", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unstable_operating_point_is_a_numerical_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("u");
    let o = spinsq(&[
        "variance",
        "--Ctilde",
        "100",
        "--delta-tilde",
        "15",
        "--delta-c",
        "-0.4",
        "--I2",
        "56.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[numerical]"), "{}", stderr(&o));
}

#[test]
fn variance_reports_the_minimal_spin_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let mut args = vec!["variance"];
    args.extend(POINT);
    args.extend(["--out", out.to_str().unwrap()]);
    let o = spinsq(&args);
    assert!(o.status.success(), "{}", stderr(&o));

    let csv = read(&out, "results.csv");
    let header: Vec<&str> = csv.lines().take(3).collect();
    assert!(header[0].starts_with("# spinsq "));
    assert!(header[1].starts_with("# manifest-sha256: "));
    assert!(header[2].starts_with("ds_min,ds_max,"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][0] - 0.7210718884186081).abs() < 1e-8);
    assert!(rows[0][0] * rows[0][1] >= 1.0);
    assert!(read(&out, "manifest.toml").contains("i2 = 25.2"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let mut args = vec!["spectrum"];
        args.extend(POINT);
        args.extend(["--omega-max", "200", "--omega-points", "41", "--out", out.to_str().unwrap()]);
        let o = spinsq(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["manifest.toml", "results.csv", "results_s_out_min.dat", "results_s_out_max.dat"] {
        assert_eq!(read(&a, f), read(&b, f), "{f} differs");
    }
}

#[test]
fn manifest_reruns_the_same_job() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let mut args = vec!["decompose", "--delta-c", "0.2", "--Ctilde", "100", "--delta-tilde", "12", "--I2", "40"];
    args.extend(["--omega-points", "21", "--out", first.to_str().unwrap()]);
    assert!(spinsq(&args).status.success());

    let second = tmp.path().join("second");
    let manifest = first.join("manifest.toml");
    let o = spinsq(&["run", "--config", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["manifest.toml", "results.csv", "spectra.csv"] {
        assert_eq!(read(&first, f), read(&second, f), "{f} differs");
    }
    let rows = data_rows(&read(&second, "results.csv"));
    assert!((rows[0][0] - 0.7171570978455419).abs() < 1e-8);
}

#[test]
fn config_file_values_yield_to_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("job.toml");
    fs::write(&cfg, "study = \"variance\"\n\n[params]\nctilde = 100.0\ndelta_tilde = 10.0\ni2 = 1.0\n").unwrap();
    let out = tmp.path().join("out");
    let o = spinsq(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--I2",
        "25.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&read(&out, "results.csv"));
    assert!((rows[0][0] - 0.7210718884186081).abs() < 1e-8);
}

#[test]
fn malformed_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "study = \"variance\"\n[params]\nctilde = \"lots\"\n").unwrap();
    let o = spinsq(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_mode_turns_regime_warnings_into_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    let base = ["variance", "--model", "adiabatic", "--Ctilde", "1", "--delta-tilde", "0", "--I2", "0.25"];
    let mut args = base.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let o = spinsq(&args);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning[regime]"));

    args.push("--strict");
    let o = spinsq(&args);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn reproduce_writes_the_transfer_efficiency_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig6");
    let o = spinsq(&["reproduce", "fig6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&read(&out, "results.csv"));
    assert_eq!(rows.len(), 101);
    let at_100 = rows.iter().find(|r| (r[0] - 100.0).abs() < 1e-6).unwrap();
    assert!((at_100[1] - 0.9945276118159826).abs() < 1e-8);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[1]) && (0.0..=1.0).contains(&r[2])));
    assert!(out.join("results_eta_rho_1_2000.dat").exists());
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spinsq"))
        .args(["transfer", "--Ctilde", "100"])
        .env("SPINSQ_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("transfer").join("results.csv").exists());
}
