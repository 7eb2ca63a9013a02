use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn reservoir(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reservoir"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RESERVOIR_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Body rows of a written CSV, header comment and column row dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_series(path: &Path, values: &[f64]) {
    let mut s = String::from("date,value\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{}-{:02},{v}\n", 2000 + i / 12, i % 12 + 1));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn steady_converges_and_writes_provenance() {
    let dir = TempDir::new().unwrap();
    let out = reservoir(dir.path(), &["steady"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("converged"));
    let text = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# reservoir "), "{first}");
    assert!(first.contains("command=steady") && first.contains("config_sha256=") && first.contains("seed=1"));
    let resid = rows(&dir.path().join("residuals.csv"));
    assert_eq!(resid.len(), 29);
    for r in resid {
        assert!(r[1].parse::<f64>().unwrap().abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn json_summary_parses() {
    let dir = TempDir::new().unwrap();
    let out = reservoir(dir.path(), &["steady", "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["command"], "steady");
    assert_eq!(doc["converged"], true);
    assert!(doc["residual_norm"].as_f64().unwrap() < 1e-10);
    assert!(doc["state"]["GDP"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["files"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_key_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "periods = 10\nnot_a_key = 4\n").unwrap();
    let out = reservoir(dir.path(), &["steady", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("not_a_key") && err.contains("line 2"), "{err}");
}

#[test]
fn invalid_parameter_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "beta = 1.5\n").unwrap();
    let out = reservoir(dir.path(), &["steady", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn fevd_rows_sum_to_one() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("short.conf");
    fs::write(&conf, "var_periods = 3000\n").unwrap();
    let out = reservoir(dir.path(), &["fevd", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = rows(&dir.path().join("fevd.csv"));
    assert_eq!(table.len(), 16);
    for r in &table {
        let shares: Vec<f64> = r[3..].iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(shares.len(), 5);
        assert!(shares.iter().all(|s| (-1e-12..=1.0 + 1e-12).contains(s)), "{r:?}");
        assert!((shares.iter().sum::<f64>() - 1.0).abs() < 1e-10, "{r:?}");
    }
}

#[test]
fn same_seed_reproduces_simulation_byte_for_byte() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert!(reservoir(d.path(), &["simulate", "--seed", "7"]).status.success());
    }
    let read = |d: &TempDir| fs::read(d.path().join("simulate.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let c = TempDir::new().unwrap();
    assert!(reservoir(c.path(), &["simulate", "--seed", "8"]).status.success());
    assert_ne!(rows(&a.path().join("simulate.csv")), rows(&c.path().join("simulate.csv")));
}

#[test]
fn cycles_of_a_series_with_itself_is_one() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let values: Vec<f64> = (0..48).map(|t| 100.0 + 5.0 * (t as f64 * 0.7).sin() + 0.3 * t as f64).collect();
    write_series(&a, &values);
    let out = reservoir(dir.path(), &["cycles", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["amplitude_rank"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((doc["pearson"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(doc["observations"], 48);
}

#[test]
fn schema_errors_name_row_and_column() {
    let dir = TempDir::new().unwrap();
    let good = dir.path().join("good.csv");
    write_series(&good, &[1.0; 20]);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,value\n2000-01,1.0\n2000-02,oops\n").unwrap();
    let out = reservoir(dir.path(), &["cycles", "--a", bad.to_str().unwrap(), "--b", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3, column 2"), "{}", stderr(&out));

    fs::write(&bad, "date,value\n2000-02,1.0\n2000-01,2.0\n").unwrap();
    let out = reservoir(dir.path(), &["cycles", "--a", bad.to_str().unwrap(), "--b", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 3, column 1"), "{}", stderr(&out));

    fs::write(&bad, "when,value\n2000-01,1.0\n").unwrap();
    let out = reservoir(dir.path(), &["cycles", "--a", bad.to_str().unwrap(), "--b", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("row 1"), "{}", stderr(&out));
}

#[test]
fn misaligned_dates_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_series(&a, &[1.0; 30]);
    write_series(&b, &[1.0; 29]);
    let out = reservoir(dir.path(), &["cycles", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("b.csv"), "{}", stderr(&out));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = reservoir(dir.path(), &["cycles", "--a", "/nonexistent/a.csv", "--b", "/nonexistent/b.csv"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn growth_reports_interior_alpha_with_strong_research() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("g.conf");
    fs::write(&conf, "eta = 1.0\ngrowth_draws = 500\n").unwrap();
    let out = reservoir(dir.path(), &["growth", "--config", conf.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let alpha = doc["alpha"]["alpha"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha < 1.0, "{alpha}");
    assert!(doc["rate_offsets"]["leverage_up"].as_f64().unwrap() > 0.0);
    assert!(doc["rate_offsets"]["population_down"].as_f64().unwrap() < 0.0);
}

#[test]
fn default_config_round_trips_through_the_binary() {
    let dir = TempDir::new().unwrap();
    let out = reservoir(dir.path(), &["default-config"]);
    assert!(out.status.success());
    let conf = dir.path().join("d.conf");
    fs::write(&conf, out.stdout).unwrap();
    let a = reservoir(dir.path(), &["steady", "--json", "--config", conf.to_str().unwrap()]);
    let b = reservoir(dir.path(), &["steady", "--json"]);
    let hash = |o: &Output| serde_json::from_str::<serde_json::Value>(&stdout(o)).unwrap()["config_sha256"].clone();
    assert_eq!(hash(&a), hash(&b));
}
