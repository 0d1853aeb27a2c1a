//! End-to-end runs of the `supergraph` binary and report rendering.

use std::process::Command;

use serde_json::Value;
use supergraph::cli::{render_report, Format};
use supergraph::montecarlo::{run_experiment, ExperimentKind, ExperimentPlan, ExperimentReport};
use supergraph::sampler::{Regime, SuperGraph};
use supergraph::Seed;

fn supergraph(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_supergraph"))
        .args(args)
        .env("SUPERGRAPH_THREADS", "2")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn without_wall_time(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).unwrap();
    v["meta"]["wall_time"] = Value::Null;
    v
}

#[test]
fn generate_writes_edge_list() {
    let (code, out, _) = supergraph(&[
        "generate", "--inline", "1x10", "--regime", "raw", "--c", "0", "--seed", "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "# N=10 sizes=1x10\n");

    let args = [
        "generate", "--inline", "1x20,3x5", "--regime", "sparse", "--c", "3", "--seed", "4",
    ];
    let (code, out, _) = supergraph(&args);
    assert_eq!(code, 0);
    assert_eq!(supergraph(&args).1, out);
    let g = SuperGraph::from_edge_list(&out).unwrap();
    assert_eq!(g.n_super(), 25);
    assert!(g.edges().iter().all(|(u, v)| u < v));

    let (code, out, _) = supergraph(&[
        "generate",
        "--inline",
        "2x6",
        "--regime",
        "raw",
        "--c",
        "1",
        "--seed",
        "4",
        "--sampler",
        "constructive",
    ]);
    assert_eq!(code, 0);
    assert_eq!(SuperGraph::from_edge_list(&out).unwrap().edge_count(), 15);
}

#[test]
fn predict_reports_threshold_and_giant() {
    let (code, out, err) = supergraph(&[
        "predict",
        "--inline",
        "1x500,2x500",
        "--regime",
        "sparse",
        "--c",
        "1.2",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["c_star"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!(v["rho"].as_f64().unwrap() > 0.0);
    for key in [
        "E_isolated",
        "Var_isolated",
        "P_connected_limit",
        "rho_by_size",
        "degree_pmf",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let pmf: Vec<f64> = v["degree_pmf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-8);

    // 1000 of size 1 and 500 of size 2: s2 = 3000/2000, so c* = 2/3
    let (code, out, _) = supergraph(&[
        "predict",
        "--inline",
        "1x1000,2x500",
        "--regime",
        "sparse",
        "--c",
        "1.2",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v["c_star"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(v["rho"].as_f64().unwrap() > 0.0);
}

#[test]
fn predict_from_config_file_and_powerlaw() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pl.json");
    let path_str = path.to_str().unwrap();
    let (code, _, _) = supergraph(&[
        "powerlaw",
        "--n-super",
        "1000",
        "--alpha",
        "2",
        "--max-size",
        "10",
        "--out",
        path_str,
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("{\"sizes\":{"));
    let (code, out, _) = supergraph(&["predict", "--config", path_str, "--c", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["N"], 1000);

    let (code, _, err) = supergraph(&[
        "powerlaw",
        "--n-super",
        "10",
        "--alpha",
        "0.5",
        "--max-size",
        "3",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("exponent"));
}

#[test]
fn giant_experiment_near_fixed_point() {
    let (code, out, err) = supergraph(&[
        "giant", "--inline", "1x100000", "--c", "2", "--trials", "20", "--seed", "7",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let l1 = v["estimates"]["L1"]["value"].as_f64().unwrap();
    assert!((l1 - 0.796812).abs() < 0.02, "{l1}");
    assert!((v["theory"]["rho"].as_f64().unwrap() - 0.796812).abs() < 1e-6);
}

#[test]
fn identical_argv_gives_identical_reports() {
    let args = [
        "connectivity",
        "--inline",
        "1x300,2x10",
        "--c",
        "0.5",
        "--trials",
        "50",
        "--seed",
        "3",
    ];
    let (_, a, _) = supergraph(&args);
    let (_, b, _) = supergraph(&args);
    assert_eq!(without_wall_time(&a), without_wall_time(&b));

    let strip = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.contains("\"wall_time\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));

    let csv_args = [
        "degree",
        "--inline",
        "1x300,2x10",
        "--c",
        "1",
        "--trials",
        "3",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let (code, a, _) = supergraph(&csv_args);
    assert_eq!(code, 0);
    assert_eq!(a, supergraph(&csv_args).1);
}

#[test]
fn exit_codes() {
    assert_eq!(supergraph(&["giant", "--inline", "1x10", "--c", "1"]).0, 2);
    assert_eq!(supergraph(&[]).0, 2);
    let (code, _, err) = supergraph(&["giant", "--inline", "1x10", "--c", "11", "--seed", "1"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let (code, out, _) = supergraph(&["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "generate",
        "predict",
        "connectivity",
        "giant",
        "degree",
        "powerlaw",
    ] {
        assert!(out.contains(sub), "help lists {sub}");
    }
}

fn small_report(trials: u64, kind: ExperimentKind) -> ExperimentReport {
    let plan = ExperimentPlan {
        config: "1x200,2x50".parse().unwrap(),
        regime: if kind == ExperimentKind::Connectivity {
            Regime::Connectivity
        } else {
            Regime::Sparse
        },
        c: 1.0,
        trials,
        seed: Seed(11),
        experiment: kind,
    };
    run_experiment(&plan, Some(2)).unwrap()
}

#[test]
fn json_report_round_trips_estimates_exactly() {
    let report = small_report(40, ExperimentKind::Degree);
    let json = render_report(&report, Format::Json).unwrap();
    let parsed: ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed.estimates, report.estimates);
    assert_eq!(parsed.theory, report.theory);
    assert_eq!(parsed.distributions, report.distributions);
    assert_eq!(parsed.meta, report.meta);
    assert!(json.find("\"estimates\"").unwrap() < json.find("\"theory\"").unwrap());
    assert!(json.find("\"theory\"").unwrap() < json.find("\"meta\"").unwrap());
}

#[test]
fn empty_estimates_render_skeleton() {
    let mut report = small_report(1, ExperimentKind::Giant);
    report.estimates.clear();
    let json = render_report(&report, Format::Json).unwrap();
    let v: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["estimates"], serde_json::json!({}));
    assert_eq!(v["meta"]["N"], 250);
    assert_eq!(v["meta"]["trials"], 1);
}

#[test]
fn csv_has_one_row_per_trial() {
    let report = small_report(3, ExperimentKind::Connectivity);
    let csv = render_report(&report, Format::Csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "trial,connected,isolated,L1,L2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn plot_csv_for_degree_reports() {
    let report = small_report(2, ExperimentKind::Degree);
    let plot = render_report(&report, Format::Plot).unwrap();
    let lines: Vec<&str> = plot.lines().collect();
    assert_eq!(lines[0], "k,empirical,theory");
    assert!(lines[1].starts_with("0,"));
    assert!(lines.last().unwrap().starts_with(">="));
    assert!(render_report(&small_report(2, ExperimentKind::Giant), Format::Plot).is_err());
}
