use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fjlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fjlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FJLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn two_agents_reach_the_stubborn_opinion() {
    let tmp = TempDir::new().unwrap();
    let psi = tmp.path().join("psi.csv");
    fs::write(&psi, "0, 1\n1, 0\n").unwrap();
    let out = tmp.path().join("run");
    let o = fjlab(
        &[
            "simulate",
            "--set",
            &format!("psi_file={}", psi.display()),
            "--set",
            "n_s=1",
            "--set",
            "x0=1,0",
            "--theta",
            "0.5",
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = out.join("simulate.csv");
    assert_eq!(header(&csv), "agent,stubborn,x0,x_direct,x_iterative");
    for col in ["x_direct", "x_iterative"] {
        for v in column(&csv, col) {
            assert!(
                (v.parse::<f64>().unwrap() - 1.0).abs() < 1e-8,
                "{col} = {v}"
            );
        }
    }
    let m = manifest(&out);
    assert_eq!(m["status"], "complete");
    let lam = m["results"]["lambda_min"].as_f64().unwrap();
    assert!((lam - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-9);
    let b1 = m["results"]["b1"].as_f64().unwrap();
    assert!((b1 - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(
        m["results"]["psi_file_checksum"].as_str().map(str::len),
        Some(64)
    );
}

#[test]
fn theta_out_of_range_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(
        &[
            "simulate", "--n", "20", "--theta", "1.2", "--set", "r_s=0.5", "--set", "p_s=0.5",
            "--set", "p_r=0.5", "--set", "p_sr=0.5",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("theta"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(&["simulate", "--set", "nn=10"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nn"));
}

#[test]
fn missing_key_is_named() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(&["bounds", "--n", "100"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("r_s"), "{}", stderr(&o));
}

#[test]
fn flags_override_file_and_preset() {
    let tmp = TempDir::new().unwrap();
    let conf = tmp.path().join("run.conf");
    fs::write(&conf, "# small run\ntrials = 50\nn_grid = 100, 150, 200\n").unwrap();
    let out = tmp.path().join("run");
    let o = fjlab(
        &[
            "experiment",
            "scaling",
            "--preset",
            "paper-fig1",
            "--config",
            conf.to_str().unwrap(),
            "--trials",
            "2",
            "--seed",
            "11",
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["config"]["trials"]["value"], "2");
    assert_eq!(m["config"]["trials"]["source"], "flag");
    assert_eq!(m["config"]["p_sr"]["source"], "preset:paper-fig1");
    let ov = m["overrides"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|o| o["key"] == "trials")
        .count();
    assert_eq!(ov, 2, "preset -> file -> flag");

    assert_eq!(header(&out.join("scaling.csv")), "n,trial,seed,dist,failed");
    assert_eq!(
        header(&out.join("scaling_agg.csv")),
        "n,count,median,q95,min,max,eps_bar_n"
    );
    assert_eq!(column(&out.join("scaling.csv"), "n").len(), 6);
    assert_eq!(
        column(&out.join("scaling_agg.csv"), "n"),
        ["100", "150", "200"]
    );
    assert!(m["results"]["fit"].is_object());

    // The echoed config alone reproduces the run.
    let again = tmp.path().join("again");
    let o = fjlab(
        &[
            "experiment",
            "scaling",
            "--config",
            out.join("effective.conf").to_str().unwrap(),
        ],
        &again,
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(out.join("scaling.csv")).unwrap(),
        fs::read_to_string(again.join("scaling.csv")).unwrap()
    );
}

#[test]
fn threads_from_environment_are_recorded() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fjlab"))
        .args([
            "bounds", "--n", "300", "--set", "r_s=0.5", "--set", "p_s=0.5", "--set", "p_r=0.5",
            "--set", "p_sr=0.5", "--out",
        ])
        .arg(tmp.path())
        .env("FJLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m["config"]["threads"]["source"], "env");
    assert_eq!(m["config"]["threads"]["value"], "2");
}

#[test]
fn bounds_table_and_sparse_hypothesis() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("dense");
    let o = fjlab(
        &[
            "bounds", "--n", "1000", "--set", "r_s=0.5", "--set", "p_s=0.5", "--set", "p_r=0.5",
            "--set", "p_sr=0.5",
        ],
        &out,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = out.join("bounds.csv");
    assert_eq!(
        header(&csv),
        "n,theta,b1,sigma1,eps_n,eta_n,eps_prime_n,eps_bar_n,q,vacuous_eta"
    );
    assert_eq!(column(&csv, "eps_prime_n"), ["NaN"]);
    let q: f64 = column(&csv, "q")[0].parse().unwrap();
    assert!((q - 0.2).abs() < 1e-12);

    let sparse = tmp.path().join("sparse");
    let o = fjlab(
        &[
            "bounds",
            "--n",
            "200",
            "--set",
            "r_s=0.5",
            "--set",
            "p_s=0.01",
            "--set",
            "p_r=0.3",
            "--set",
            "p_sr=0.01",
        ],
        &sparse,
    );
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("log n"), "{}", stderr(&o));
    let m = manifest(&sparse);
    assert_eq!(m["status"], "failed");
    assert!(!sparse.join("bounds.csv").exists());
}

#[test]
fn preset_must_match_the_experiment() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(
        &["experiment", "degree-sweep", "--preset", "paper-fig3"],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn degree_sweep_tables() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(
        &[
            "experiment",
            "degree-sweep",
            "--preset",
            "paper-fig2",
            "--n",
            "60",
            "--trials",
            "1",
            "--set",
            "values=0.3,0.7",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let agg = tmp.path().join("degree_sweep_agg.csv");
    assert_eq!(header(&agg), "p_s,p_r,p_sr,count,median");
    assert_eq!(column(&agg, "p_s").len(), 8);
    assert_eq!(
        header(&tmp.path().join("degree_sweep.csv")),
        "p_s,p_r,p_sr,trial,seed,dist,failed"
    );
}

#[test]
fn stubbornness_sweep_tables() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(
        &[
            "experiment",
            "stubbornness-sweep",
            "--preset",
            "paper-fig3",
            "--n",
            "80",
            "--trials",
            "2",
            "--set",
            "thetas=0.1,0.5,0.9",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let agg = tmp.path().join("stub_sweep_agg.csv");
    assert_eq!(header(&agg), "theta,count,median,q95,min,max");
    let med: Vec<f64> = column(&agg, "median")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(med.len(), 3);
    assert!(med[0] > med[2]);

    let o = fjlab(
        &[
            "experiment",
            "stubbornness-sweep",
            "--n",
            "80",
            "--trials",
            "2",
            "--set",
            "p_s=0.2",
            "--set",
            "thetas=0.5",
            "--set",
            "r_s=0.5",
        ],
        &tmp.path().join("bad"),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("r_s"));
}

#[test]
fn validate_reports_every_check() {
    let tmp = TempDir::new().unwrap();
    let o = fjlab(
        &[
            "validate",
            "--trials",
            "2",
            "--set",
            "tail_samples=50",
            "--set",
            "lambda_samples=5",
            "--set",
            "chernoff_runs=2000",
        ],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = tmp.path().join("validate.csv");
    assert_eq!(header(&csv), "check,statistic,bound,holds");
    assert_eq!(column(&csv, "holds"), ["1"; 5]);
}
