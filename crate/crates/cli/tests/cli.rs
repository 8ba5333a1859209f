use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isacemu::chain::read_dataset;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isacemu"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn isacemu")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compile_writes_one_bundle_per_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compile", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for label in ["t1", "t2", "t3"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{label}.bundle.toml"))).unwrap();
        let v: toml_value::Table = toml_value::parse(&text);
        assert_eq!(v.int("rts_units_used"), 2, "{label}");
        assert_eq!(v.int("rts_ports_used"), 4, "{label}");
    }
}

#[test]
fn satr_bundle_has_disjoint_tx_rx_weights() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compile", "--scenario", s(&scenario("satr_drone.toml")), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("static.bundle.toml")).unwrap();
    let v = toml_value::parse(&text);
    assert_eq!(v.int("rts_units_used"), 1);
    let apm = v.get("apm");
    let tx = apm.get("weights_tx").weights();
    let rx = apm.get("weights_rx").weights();
    assert_eq!((tx.len(), rx.len()), (16, 16));
    // first 8 elements transmit, last 8 receive
    for k in 0..16 {
        let (t, r) = (tx[k].0.hypot(tx[k].1), rx[k].0.hypot(rx[k].1));
        if k < 8 {
            assert!((t - 1.0).abs() < 1e-12 && r == 0.0, "element {k}");
        } else {
            assert!(t == 0.0 && (r - 1.0).abs() < 1e-12, "element {k}");
        }
    }
}

#[test]
fn synthesize_file_size_is_predictable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synthesize", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for label in ["t1", "t2", "t3"] {
        let path = dir.path().join(format!("{label}.cfr"));
        let d = read_dataset(&path).unwrap();
        assert_eq!(d.dims(), vec![256, 251, 32]);
        // magic, version, mode, axis count, 3 lengths, 3 grids, samples, metadata
        let expect = 8 + 4 + 1 + 1 + 3 * 4 + 8 * (256 + 251 + 32) + 16 * 256 * 251 * 32 + 8 + d.metadata.len() as u64;
        assert_eq!(std::fs::metadata(&path).unwrap().len(), expect, "{label}");
    }
}

#[test]
fn run_passes_and_report_renders_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["run", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    assert!(table.contains("30/30 checks passed"), "{table}");
    assert!(table.trim_end().ends_with("RESULT: PASS"));

    let report = out.join("report.json");
    let a = run(&["report", "--report", s(&report)]);
    let b = run(&["report", "--report", s(&report)]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a), table);

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["summary"]["all_pass"], true);
}

#[test]
fn single_time_sample_marks_velocity_not_estimable() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(dir.path()), "--nt", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = stdout(&o);
    let velocity_rows: Vec<&str> = table.lines().filter(|l| l.contains("velocity (m/s)")).collect();
    assert_eq!(velocity_rows.len(), 6);
    assert!(velocity_rows.iter().all(|l| l.ends_with("not estimable")), "{table}");
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn coarse_quantization_reports_failure_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(dir.path()), "--phase-bits", "3"]);
    let table = stdout(&o);
    eprintln!("{table}");
    assert!(table.contains("3-bit phase"));
    if table.contains("RESULT: PASS") {
        assert_eq!(o.status.code(), Some(0));
    } else {
        assert_eq!(o.status.code(), Some(1));
        assert!(table.contains("FAIL"));
    }
}

#[test]
fn satr_run_at_full_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "--scenario", s(&scenario("satr_drone.toml")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("angle (deg)"));
}

#[test]
fn estimate_writes_detections_and_heatmaps() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let scen = scenario("adtr_drones.toml");
    let o = run(&["synthesize", "--scenario", s(&scen), "--out", s(&data), "--nt", "64", "--nf", "101"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let est = dir.path().join("est");
    let o = run(&["estimate", "--dataset", s(&data.join("t2.cfr")), "--scenario", s(&scen), "--out", s(&est)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    for f in ["t2.detections.json", "t2.rv.csv", "t2.rv.pgm", "t2.pas1.csv", "t2.pas2.pgm"] {
        assert!(est.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(est.join("t2.rv.csv")).unwrap();
    assert!(csv.lines().filter(|l| l.starts_with("# peak")).count() == 2, "{csv:.400}");
    assert!(std::fs::read(est.join("t2.rv.pgm")).unwrap().starts_with(b"P5"));

    // wrong mode for this dataset
    let o = run(&["estimate", "--dataset", s(&data.join("t2.cfr")), "--scenario", s(&scenario("satr_drone.toml")), "--out", s(&est)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("mode mismatch"));
}

#[test]
fn corrupted_dataset_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let scen = scenario("satr_drone.toml");
    let o = run(&["synthesize", "--scenario", s(&scen), "--out", s(dir.path()), "--nf", "101"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("static.cfr");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[..4].copy_from_slice(b"XXXX");
    std::fs::write(&path, &bytes).unwrap();
    let o = run(&["estimate", "--dataset", s(&path), "--scenario", s(&scen), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("magic"), "{}", stderr(&o));

    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    let o = run(&["estimate", "--dataset", s(&path), "--scenario", s(&scen), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn malformed_scenario_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("adtr_drones.toml")).unwrap().replace("n_freq = 251", "n_freq = \"many\"");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, &text).unwrap();
    let line = text.lines().position(|l| l.contains("\"many\"")).unwrap() + 1;
    let o = run(&["compile", "--scenario", s(&path), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));
}

#[test]
fn invalid_scenarios_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("satr_drone.toml")).unwrap();
    let cut = text.find("[[snapshots.targets]]").unwrap();
    let path = dir.path().join("empty.toml");
    std::fs::write(&path, &text[..cut]).unwrap();
    let o = run(&["run", "--scenario", s(&path), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!dir.path().join("report.json").exists());

    let o = run(&["run", "--scenario", s(&scenario("adtr_drones.toml")), "--out", s(dir.path()), "--nt", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("n_time"));
}

#[test]
fn report_schema_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    std::fs::write(&path, r#"{"schema_version": 99}"#).unwrap();
    let o = run(&["report", "--report", s(&path)]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("99"));

    let o = run(&["report", "--report", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--scenario", "x.toml"]).status.code(), Some(2));
    let o = run(&["compile", "--scenario", "x.toml", "--out", "y", "--ideal", "--phase-bits", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Minimal accessors over parsed bundle TOML.
mod toml_value {
    pub struct Table(toml::Table);

    pub fn parse(text: &str) -> Table {
        Table(text.parse().expect("bundle is valid TOML"))
    }

    impl Table {
        pub fn int(&self, key: &str) -> i64 {
            self.0[key].as_integer().unwrap()
        }

        pub fn get(&self, key: &str) -> Table {
            Table(self.0[key].as_table().unwrap().clone())
        }

        pub fn weights(&self) -> Vec<(f64, f64)> {
            let cols = self.int("cols");
            assert_eq!(cols, 1);
            self.0["data"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| {
                    let c = c.as_array().unwrap();
                    (c[0].as_float().unwrap(), c[1].as_float().unwrap())
                })
                .collect()
        }
    }
}
