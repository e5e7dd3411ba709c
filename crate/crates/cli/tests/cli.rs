use std::path::Path;
use std::process::Command;

use slowhom_cli::plot::read_csv;
use slowhom_cli::{run, Artifact};

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("slowhom").chain(list.iter().copied()).map(String::from).collect()
}

fn load(path: &Path) -> Artifact {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(args(&["--help"])), 0);
    assert_eq!(run(args(&["halfspace-certify", "--help"])), 0);
    assert_eq!(run(args(&["halfspace-certify", "--no-such-flag"])), 2);
    assert_eq!(run(args(&["no-such-command"])), 2);
    assert_eq!(run(args(&[])), 2);
    assert_eq!(run(args(&["halfspace-certify", "--omega", "sideways:3"])), 2);
    assert_eq!(run(args(&["direction", "--dim", "2", "--seed-vector", "1,2,3"])), 2);
}

#[test]
fn halfspace_certify_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("cert.json");
    let csv = dir.path().join("schedule.csv");
    let code = run(args(&[
        "halfspace-certify", "--omega", "power:0.5", "--dim", "2", "--stages", "4",
        "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let a = load(&json);
    assert_eq!(a.schema_version, slowhom_cli::SCHEMA_VERSION);
    assert_eq!(a.kind, "halfspace-certificate");
    assert_eq!(a.run_config.subcommand, "halfspace-certify");
    assert_eq!(a.run_config.dim, Some(2));
    assert_eq!(a.run_config.stages, Some(4));
    assert_eq!(a.run_config.gap_base, Some(10));
    let rows = a.report["schedule"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r["margin"].as_f64().unwrap() >= 0.0, "{r}");
    }
    // the CSV carries the same numbers exactly
    let (header, cells) = read_csv(&csv).unwrap();
    assert_eq!(header, ["k", "ln_t_k", "ln_S", "ln_omega", "margin"]);
    for (row, r) in cells.iter().zip(rows) {
        assert_eq!(row[4].parse::<f64>().unwrap(), r["margin"].as_f64().unwrap());
        assert_eq!(row[1].parse::<f64>().unwrap(), r["ln_t"].as_f64().unwrap());
    }
    // no stray temporaries next to the outputs
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.json");
    let texts: Vec<String> = (0..2)
        .map(|_| {
            assert_eq!(run(args(&["direction", "--dim", "3", "--stages", "3", "--out", p.to_str().unwrap()])), 0);
            let text = std::fs::read_to_string(&p).unwrap();
            // everything before the metadata block is fixed by the run config
            text[..text.find("\"metadata\"").unwrap()].to_string()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
    assert!(texts[0].contains("\"run_config\""));
}

#[test]
fn infeasible_modulus_exits_with_failure() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("log.json");
    let csv = dir.path().join("log.csv");
    let code = run(args(&["halfspace-certify", "--omega", "log", "--stages", "4", "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]));
    assert_eq!(code, 1);
    let a = load(&json);
    assert_eq!(a.verdict, slowhom::family::Verdict::Fail);
    assert!(a.report["direction"]["failure"].is_string());
    // schedule is empty, so the table is header only
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "k,ln_t_k,ln_S,ln_omega,margin\n");
}

#[test]
fn family_certify_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("family.json");
    let code = run(args(&["family-certify", "--profile", "gaussian", "--omega", "power:0.25", "--stages", "3", "--out", json.to_str().unwrap()]));
    let a = load(&json);
    assert_eq!(code, slowhom_cli::verdict_exit_code(a.verdict));
    assert_eq!(code, 0);
    let csv = dir.path().join("family.csv");
    assert_eq!(run(args(&["plot-data", "--input", json.to_str().unwrap(), "--out", csv.to_str().unwrap()])), 0);
    let (header, rows) = read_csv(&csv).unwrap();
    assert_eq!(header[0], "k");
    assert_eq!(rows.len(), 3);
    let stages = dir.path().join("stages.csv");
    assert_eq!(run(args(&["plot-data", "--input", json.to_str().unwrap(), "--table", "stages", "--out", stages.to_str().unwrap()])), 0);
    assert_eq!(read_csv(&stages).unwrap().1.len(), 4);
    assert_eq!(run(args(&["plot-data", "--input", json.to_str().unwrap(), "--table", "trend", "--out", stages.to_str().unwrap()])), 2);
}

#[test]
fn missing_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let out = dir.path().join("x.csv");
    assert_eq!(run(args(&["plot-data", "--input", missing.to_str().unwrap(), "--out", out.to_str().unwrap()])), 2);
    assert!(!out.exists());
}

#[test]
fn binary_exit_codes_and_thread_cap() {
    let exe = env!("CARGO_BIN_EXE_slowhom");
    let help = Command::new(exe).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("halfspace-certify"));
    assert_eq!(Command::new(exe).arg("--bogus").output().unwrap().status.code(), Some(2));
    let bad = Command::new(exe).args(["direction", "--stages", "2"]).env("SLOWHOM_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let ok = Command::new(exe).args(["direction", "--stages", "2"]).env("SLOWHOM_THREADS", "1").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let a: Artifact = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(a.metadata.threads, 1);
}

#[test]
fn demo_config_file_is_resolved() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("demo.json");
    std::fs::write(&cfg, r#"{ "sample_points": 2, "trend_eps": [0.1, 0.05] }"#).unwrap();
    let json = dir.path().join("demo_out.json");
    let trend = dir.path().join("trend.csv");
    let decay = dir.path().join("decay.csv");
    let code = run(args(&[
        "dirichlet-demo", "--config", cfg.to_str().unwrap(), "--out", json.to_str().unwrap(),
        "--trend-csv", trend.to_str().unwrap(), "--decay-csv", decay.to_str().unwrap(),
    ]));
    let a = load(&json);
    assert_eq!(code, slowhom_cli::verdict_exit_code(a.verdict));
    let resolved = a.run_config.demo.unwrap();
    assert_eq!(resolved.sample_points, 2);
    assert_eq!(resolved.min_nodes, slowhom::dirichlet::DemoConfig::default().min_nodes);
    let (h, rows) = read_csv(&trend).unwrap();
    assert_eq!((h[0].as_str(), rows.len()), ("eps", 2));
    assert_eq!(read_csv(&decay).unwrap().0, ["k", "point", "lambda", "abs_curved"]);
    std::fs::write(&cfg, "{ not json").unwrap();
    assert_eq!(run(args(&["dirichlet-demo", "--config", cfg.to_str().unwrap()])), 2);
}
