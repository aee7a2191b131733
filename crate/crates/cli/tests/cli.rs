use std::path::Path;
use std::process::{Command, Output};

use probesched_cli::experiment::{columns, Table};
use probesched_cli::output::{render_csv, render_json};
use probesched_cli::settings::{Grid, Preset, Settings, DEFAULT_SEED};

fn probesched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probesched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn preset_defaults_are_frozen() {
    let g = Settings::for_preset(Some(Preset::CapacityVsGamma1));
    assert_eq!((g.lambda0, g.beta, g.d, g.alpha), (0.0025, 2.5, 10.0, 4.0));
    assert_eq!(g.grid, Grid::new(0.0, 4.0, 0.1));

    let d = Settings::for_preset(Some(Preset::CapacityVsDensity));
    assert_eq!(d.gamma1, 0.6);
    assert_eq!(d.grid.points().first(), Some(&0.0005));
    assert_eq!(d.grid.points().last(), Some(&0.006));

    let s = Settings::for_preset(Some(Preset::SchemeComparison));
    assert_eq!((s.gamma1, s.channel_threshold), (0.4, 0.4));

    let e = Settings::for_preset(Some(Preset::SirError));
    assert_eq!((e.gamma1, e.sigma2), (0.4, 0.01));

    let surface = Settings::for_preset(Some(Preset::GammaSurface));
    assert_eq!((surface.beta, surface.d, surface.alpha), (2.0, 10.0, 4.0));
    assert_eq!(surface.grid.points().len(), 41);

    let p = Settings::for_preset(Some(Preset::ProbingTradeoff));
    assert_eq!(p.tau, vec![0.0, 0.04]);
    assert_eq!((p.slot_duration, p.max_stages, p.beta), (1.0, 19, 2.0));

    for preset in Preset::ALL {
        let s = Settings::for_preset(Some(preset));
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.realizations, 2000);
    }
}

#[test]
fn csv_has_metadata_line_and_preset_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.csv");
    let o = probesched(&[
        "simulate",
        "--preset",
        "capacity-vs-density",
        "--set",
        "grid.stop=0.0015",
        "--realizations",
        "20",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("argmax"));

    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let meta = lines.next().unwrap();
    assert!(meta.starts_with('#'));
    for part in ["seed=5", "realizations=20", "preset=capacity-vs-density", "version="] {
        assert!(meta.contains(part), "{meta}");
    }
    let rest: String = lines.map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, columns(Some(Preset::CapacityVsDensity)));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    // Three densities, proposed and reference each.
    assert_eq!(rows.len(), 6);
    let series: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert!(series.contains(&"proposed") && series.contains(&"reference"));
}

#[test]
fn json_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sir.json");
    let o = probesched(&[
        "simulate",
        "--preset",
        "sir-error",
        "--set",
        "grid.start=0.001",
        "--set",
        "grid.stop=0.002",
        "--realizations",
        "10",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(&out).unwrap();
    let table: Table = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(render_json(&table).unwrap(), bytes);
    assert_eq!(table.records.len(), 6);
    assert!(render_csv(&table).is_ok());
}

#[test]
fn identical_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = probesched(&[
            "simulate",
            "--preset",
            "probing-tradeoff",
            "--set",
            "max_stages=3",
            "--realizations",
            "15",
            "--out",
            path_str(p),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn unknown_keys_are_all_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = probesched(&[
        "simulate",
        "--preset",
        "sir-error",
        "--set",
        "gamma9=1",
        "--set",
        "lambda=0.1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("gamma9") && err.contains("lambda"), "{err}");
    assert!(err.contains("lambda0"), "valid keys are listed: {err}");
    assert!(!out.exists());
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = probesched(&["simulate", "--preset", "fig-9", "--out", path_str(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig-9"));
}

#[test]
fn config_file_is_overridden_by_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# custom sweep\nscheme=reference\nrealizations=7\ngrid.start=0.001\ngrid.stop=0.001\n").unwrap();
    let out = dir.path().join("custom.json");
    let o = probesched(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--set",
        "realizations=9",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table: Table = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(table.metadata.realizations, 9);
    assert_eq!(table.records.len(), 1);
    assert_eq!(table.records[0].series, "reference");
}

#[test]
fn zero_threshold_row_matches_reference_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gamma.json");
    let o = probesched(&[
        "simulate",
        "--preset",
        "capacity-vs-gamma1",
        "--set",
        "grid.stop=0",
        "--realizations",
        "400",
        "--format",
        "json",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table: Table = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let row = &table.records[0];
    assert_eq!(row.gamma1, Some(0.0));
    let mean = row.mc_mean.unwrap();
    let se = row.mc_std_error.unwrap();
    let reference = row.reference.unwrap();
    assert!((mean - reference).abs() <= 3.0 * se, "{mean} ± {se} vs {reference}");
}

#[test]
fn validate_passes_and_catches_a_wrong_constant() {
    let ok = probesched(&["validate", "--realizations", "200"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(!stdout(&ok).contains("FAIL"));

    let bad = probesched(&["validate", "--realizations", "200", "--rho-override", "1.5"]);
    assert!(!bad.status.success());
    let report = stdout(&bad);
    let failing: Vec<&str> = report.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert!(failing.iter().any(|l| l.contains("reference-success-oracle")), "{report}");
}
