//! Subcommand implementations. Each has a `prepare` step that fills in
//! defaults and checks required keys (so the manifest can echo them) and an
//! `execute` step that does the work and writes the tables.

use std::path::Path;

use fjlab::bounds::{bound_report, ReportInputs};
use fjlab::experiments::validation::{
    chernoff_frequency, degree_tail_frequencies, lambda_min_frequency, theorem1_coverage,
};
use fjlab::experiments::{
    exp_grid, experiment_degree_sweep, experiment_scaling, experiment_stubbornness_sweep, spearman,
    triplet_cube, DegreeSweepParams, GroupKey, ScalingParams, StubbornnessSweepParams, SweepResult,
    TrialRecord,
};
use fjlab::fj::{
    convergence_condition, final_opinions_direct, final_opinions_iterative, system_matrix,
    ConvergenceVerdict, OpinionVector, StubbornnessProfile,
};
use fjlab::graph::{
    check_assumptions, expected_degree_stats, realized_degree_stats, sample_graph,
    sbm_probability_matrix, CommunityPartition, ProbabilityMatrix, SbmSpec,
};
use fjlab::lemma3_b1;
use fjlab::linalg::{min_eigenvalue_symmetric, DenseMatrix};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, Preset, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, json_opt, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Bounds,
    Scaling,
    DegreeSweep,
    StubbornnessSweep,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Bounds => "bounds",
            Command::Scaling => "experiment scaling",
            Command::DegreeSweep => "experiment degree-sweep",
            Command::StubbornnessSweep => "experiment stubbornness-sweep",
            Command::Validate => "validate",
        }
    }

    /// The preset that matches an experiment, if the command is one.
    pub fn preset_compatible(self, preset: Preset) -> bool {
        match self {
            Command::Scaling => preset == Preset::Fig1,
            Command::DegreeSweep => preset == Preset::Fig2,
            Command::StubbornnessSweep => preset == Preset::Fig3,
            _ => true,
        }
    }
}

pub fn prepare(cmd: Command, cfg: &mut RunConfig) -> Result<(), CliError> {
    cfg.materialize("seed", "0")?;
    match cmd {
        Command::Simulate | Command::Bounds => {
            cfg.materialize("theta", "0.5")?;
            if cmd == Command::Simulate {
                cfg.materialize("tol", "1e-9")?;
                cfg.materialize("max_iters", "1000000")?;
            }
            if cfg.has("psi_file") {
                if cfg.has("n_s") && cfg.has("r_s") {
                    return Err(CliError::config(
                        "give either n_s or r_s with psi_file, not both",
                    ));
                }
                if !cfg.has("n_s") {
                    cfg.require("r_s")?;
                }
            } else {
                for k in ["n", "r_s", "p_s", "p_r", "p_sr"] {
                    cfg.require(k)?;
                }
                if cfg.has("n_s") {
                    return Err(CliError::config(
                        "n_s applies to psi_file input; use r_s for the block model",
                    ));
                }
            }
        }
        Command::Scaling => {
            for k in ["r_s", "p_s", "p_r", "p_sr", "theta", "trials"] {
                cfg.require(k)?;
            }
            if !cfg.has("n_grid") {
                for k in ["grid_start", "grid_end", "grid_step"] {
                    cfg.require(k)?;
                }
            }
        }
        Command::DegreeSweep => {
            for k in ["n", "r_s", "theta", "values", "trials"] {
                cfg.require(k)?;
            }
        }
        Command::StubbornnessSweep => {
            cfg.materialize("r_s", "1")?;
            if cfg.f64("r_s")? != 1.0 {
                return Err(ConfigError::Invalid {
                    key: "r_s".into(),
                    value: cfg.raw("r_s").unwrap_or_default().into(),
                    reason: "the stubbornness sweep needs every agent stubborn (r_s = 1)".into(),
                }
                .into());
            }
            for k in ["n", "p_s", "thetas", "trials"] {
                cfg.require(k)?;
            }
            let p = cfg.require("p_s")?.to_string();
            cfg.materialize("p_r", p.clone())?;
            cfg.materialize("p_sr", p)?;
        }
        Command::Validate => {
            cfg.materialize("tail_samples", "2000")?;
            cfg.materialize("lambda_samples", "500")?;
            cfg.materialize("trials", "200")?;
            cfg.materialize("chernoff_runs", "100000")?;
        }
    }
    Ok(())
}

pub fn execute(cmd: Command, cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    match cmd {
        Command::Simulate => simulate(cfg, run),
        Command::Bounds => bounds(cfg, run),
        Command::Scaling => scaling(cfg, run),
        Command::DegreeSweep => degree_sweep(cfg, run),
        Command::StubbornnessSweep => stubbornness_sweep(cfg, run),
        Command::Validate => validate(cfg, run),
    }
}

struct GraphInput {
    psi: ProbabilityMatrix<f64>,
    partition: CommunityPartition,
    sbm: Option<SbmSpec<f64>>,
    /// SHA-256 of the psi_file bytes, so a manifest pins the input.
    checksum: Option<String>,
}

fn file_checksum(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn read_psi(path: &Path) -> Result<(ProbabilityMatrix<f64>, String), CliError> {
    let bad = |msg: String| ConfigError::Invalid {
        key: "psi_file".into(),
        value: path.display().to_string(),
        reason: msg,
    };
    let bytes = std::fs::read(path).map_err(|e| bad(e.to_string()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| bad(format!("row {}: {f:?} is not a number", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let m = DenseMatrix::from_rows(&rows).map_err(|e| bad(e.to_string()))?;
    let psi = ProbabilityMatrix::new(m).map_err(|e| bad(e.to_string()))?;
    Ok((psi, file_checksum(&bytes)))
}

fn graph_input(cfg: &RunConfig) -> Result<GraphInput, CliError> {
    if let Some(path) = cfg.raw("psi_file") {
        let (psi, checksum) = read_psi(Path::new(path))?;
        let n = psi.n();
        if let Some(given) = cfg.opt_usize("n") {
            if given != n {
                return Err(CliError::config(format!(
                    "n = {given} but psi_file has {n} rows"
                )));
            }
        }
        let partition = match cfg.opt_usize("n_s") {
            Some(n_s) if n_s <= n => CommunityPartition::new(n_s, n - n_s),
            Some(n_s) => {
                return Err(ConfigError::Invalid {
                    key: "n_s".into(),
                    value: n_s.to_string(),
                    reason: format!("exceeds the {n} agents in psi_file"),
                }
                .into())
            }
            None => CommunityPartition::from_ratio(n, cfg.f64("r_s")?)?,
        };
        Ok(GraphInput {
            psi,
            partition,
            sbm: None,
            checksum: Some(checksum),
        })
    } else {
        let spec = sbm_from(cfg, cfg.usize("n")?)?;
        let (psi, partition) = sbm_probability_matrix(&spec);
        Ok(GraphInput {
            psi,
            partition,
            sbm: Some(spec),
            checksum: None,
        })
    }
}

fn sbm_from(cfg: &RunConfig, n: usize) -> Result<SbmSpec<f64>, CliError> {
    Ok(SbmSpec::new(
        n,
        cfg.f64("r_s")?,
        cfg.f64("p_s")?,
        cfg.f64("p_r")?,
        cfg.f64("p_sr")?,
    )?)
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(", ")
}

fn simulate(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let input = graph_input(cfg)?;
    let n = input.psi.n();
    let x0 = if cfg.has("x0") {
        let v = cfg.f64_list("x0")?;
        if v.len() != n {
            return Err(ConfigError::Invalid {
                key: "x0".into(),
                value: cfg.raw("x0").unwrap_or_default().into(),
                reason: format!("has {} entries for {n} agents", v.len()),
            }
            .into());
        }
        v
    } else if n == 1 {
        vec![0.0]
    } else {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    };
    let x0 = OpinionVector::new(x0)?;
    let theta = cfg.f64("theta")?;
    let seed = cfg.u64("seed")?;
    let g = sample_graph(&input.psi, seed);
    let verdict = convergence_condition(&g, &input.partition);
    println!(
        "n = {n}, n_s = {}, theta = {theta}, seed = {seed}, edges = {}",
        input.partition.n_s(),
        g.edge_count()
    );
    println!("convergence condition: {}", verdict.as_str());
    if verdict == ConvergenceVerdict::Fail {
        return Err(CliError::Hypothesis(
            "the sampled graph has an isolated agent or a non-stubborn agent with no path to a stubborn one".into(),
        ));
    }
    let prof = StubbornnessProfile::new(input.partition, theta)?;
    let sys = system_matrix(&g, &prof)?;
    let direct = final_opinions_direct(&sys, &x0)?;
    let (iter, updates) =
        final_opinions_iterative(&g, &prof, &x0, cfg.f64("tol")?, cfg.usize("max_iters")?)?;
    let gap = direct.max_abs_diff(&iter);
    let lambda_min = min_eigenvalue_symmetric(sys.m(), 1e-12)?;
    let rs = realized_degree_stats(&g, &input.partition)?;
    let b1 = match rs.min_cross_degree {
        Some(c) if c > 0 && rs.min_stubborn_degree > 0 => {
            Some(lemma3_b1(rs.min_stubborn_degree as f64, c as f64, theta)?)
        }
        _ => None,
    };
    println!("x_direct = [{}]", fmt_vec(direct.as_slice()));
    println!(
        "x_iterative = [{}] after {updates} updates",
        fmt_vec(iter.as_slice())
    );
    println!("max |x_direct - x_iterative| = {}", fmt_f64(gap));
    println!("lambda_min(M) = {}", fmt_f64(lambda_min));
    match b1 {
        Some(b) => println!("b1 = {}", fmt_f64(b)),
        None => println!("b1 = undefined (needs both communities and a stubborn neighbour for every non-stubborn agent)"),
    }
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            vec![
                i.to_string(),
                u8::from(input.partition.is_stubborn(i)).to_string(),
                fmt_f64(x0.as_slice()[i]),
                fmt_f64(direct.as_slice()[i]),
                fmt_f64(iter.as_slice()[i]),
            ]
        })
        .collect();
    run.write_csv(
        "simulate.csv",
        &["agent", "stubborn", "x0", "x_direct", "x_iterative"],
        &rows,
    )?;
    Ok(json!({
        "verdict": verdict.as_str(),
        "edges": g.edge_count(),
        "iterative_updates": updates,
        "max_abs_gap": gap,
        "lambda_min": lambda_min,
        "b1": json_opt(b1),
        "psi_file_checksum": input.checksum,
    }))
}

fn bounds(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let input = graph_input(cfg)?;
    let theta = cfg.f64("theta")?;
    let part = input.partition;
    let n = part.n();
    let stats = expected_degree_stats(&input.psi, &part)?;
    let log_n = (n as f64).ln();
    let mut warnings: Vec<String> = Vec::new();

    let derived = cfg.opt_f64("c1").is_none() || cfg.opt_f64("c2").is_none();
    let c1 = cfg
        .opt_f64("c1")
        .unwrap_or_else(|| stats.min_cross_degree.unwrap_or(f64::INFINITY) / log_n);
    let c2 = cfg
        .opt_f64("c2")
        .unwrap_or(stats.min_stubborn_degree / log_n);
    let constants = if c1 > 8.0 && c2 > 8.0 {
        let a = check_assumptions(&input.psi, &part, c1, c2)?;
        if !a.stubborn_reachability_holds() {
            return Err(CliError::Hypothesis(format!(
                "non-stubborn agent {} has no link probability to any stubborn agent",
                a.unreachable_agents[0]
            )));
        }
        if !a.degree_growth_holds() {
            warnings.push(format!(
                "expected degrees do not satisfy the growth condition with c1 = {c1}, c2 = {c2}"
            ));
        }
        Some((c1, c2))
    } else {
        warnings.push(format!(
            "growth constants c1 = {c1}, c2 = {c2} do not exceed 8{}; q is undefined",
            if derived {
                " (derived from expected degrees)"
            } else {
                ""
            }
        ));
        None
    };

    let g = sample_graph(&input.psi, cfg.u64("seed")?);
    let rs = realized_degree_stats(&g, &part)?;
    let report = bound_report(ReportInputs {
        stats: &stats,
        n_s: part.n_s(),
        n_r: part.n_r(),
        theta,
        realized: Some((rs.min_stubborn_degree, rs.min_cross_degree)),
        constants,
        sbm: input.sbm.as_ref(),
    })?;
    if report.b1.is_none() {
        warnings.push("b1 undefined: the sampled graph lacks a stubborn or cross link".into());
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let sigma1 = report.lambda_min.map(|l| l.sigma1.value);
    let row = vec![
        n.to_string(),
        fmt_f64(theta),
        fmt_opt(report.b1),
        fmt_opt(sigma1),
        fmt_opt(report.eps_n),
        fmt_opt(report.eta_n.map(|p| p.value)),
        fmt_opt(report.eps_prime_n),
        fmt_opt(report.eps_bar_n),
        fmt_opt(report.q),
        report
            .eta_n
            .map_or("NaN".to_string(), |p| u8::from(p.vacuous).to_string()),
    ];
    run.write_csv(
        "bounds.csv",
        &[
            "n",
            "theta",
            "b1",
            "sigma1",
            "eps_n",
            "eta_n",
            "eps_prime_n",
            "eps_bar_n",
            "q",
            "vacuous_eta",
        ],
        &[row],
    )?;
    println!("n = {n}, n_s = {}, theta = {theta}", part.n_s());
    println!("b1 = {}", fmt_opt(report.b1));
    if let Some(l) = report.lambda_min {
        println!(
            "lambda_min threshold = {}, sigma1 = {}{}",
            fmt_f64(l.threshold),
            fmt_f64(l.sigma1.value),
            if l.sigma1.vacuous { " (vacuous)" } else { "" }
        );
    }
    if let (Some(e), Some(eta)) = (report.eps_n, report.eta_n) {
        println!(
            "eps_n = {}, eta_n = {}{}",
            fmt_f64(e),
            fmt_f64(eta.value),
            if eta.vacuous { " (vacuous)" } else { "" }
        );
    }
    if let Some(e) = report.eps_prime_n {
        println!("eps_prime_n = {}", fmt_f64(e));
    }
    if let Some(e) = report.eps_bar_n {
        println!("eps_bar_n = {}", fmt_f64(e));
    }
    println!("q = {}", fmt_opt(report.q));
    Ok(json!({
        "psi_file_checksum": input.checksum,
        "c1": c1,
        "c2": c2,
        "constants_derived": derived,
        "warnings": warnings,
        "b1": json_opt(report.b1),
        "lambda_threshold": json_opt(report.lambda_min.map(|l| l.threshold)),
        "sigma1": json_opt(sigma1),
        "eps_n": json_opt(report.eps_n),
        "eta_n": json_opt(report.eta_n.map(|p| p.value)),
        "eta_vacuous": report.eta_n.map(|p| p.vacuous),
        "eps_prime_n": json_opt(report.eps_prime_n),
        "eps_bar_n": json_opt(report.eps_bar_n),
        "q": json_opt(report.q),
    }))
}

fn trial_cells(r: &TrialRecord) -> [String; 4] {
    [
        r.trial.to_string(),
        r.seed.to_string(),
        fmt_f64(r.dist),
        u8::from(r.failed()).to_string(),
    ]
}

fn scaling(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let grid = if cfg.has("n_grid") {
        cfg.usize_list("n_grid")?
    } else {
        exp_grid(
            cfg.f64("grid_start")?,
            cfg.f64("grid_end")?,
            cfg.f64("grid_step")?,
        )
    };
    if grid.is_empty() {
        return Err(CliError::config("the size grid is empty"));
    }
    let p = ScalingParams {
        grid,
        trials: cfg.usize("trials")?,
        base_seed: cfg.u64("seed")?,
        r_s: cfg.f64("r_s")?,
        p_s: cfg.f64("p_s")?,
        p_r: cfg.f64("p_r")?,
        p_sr: cfg.f64("p_sr")?,
        theta: cfg.f64("theta")?,
    };
    let r = experiment_scaling(&p)?;
    let raw: Vec<Vec<String>> = r
        .trials
        .iter()
        .map(|t| {
            let mut row = vec![t.n.to_string()];
            row.extend(trial_cells(t));
            row
        })
        .collect();
    run.write_csv(
        "scaling.csv",
        &["n", "trial", "seed", "dist", "failed"],
        &raw,
    )?;
    let agg: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| {
            let s = row.group.summary;
            vec![
                row.n.to_string(),
                s.map_or(0, |s| s.count).to_string(),
                fmt_opt(s.map(|s| s.median)),
                fmt_opt(s.map(|s| s.q95)),
                fmt_opt(s.map(|s| s.min)),
                fmt_opt(s.map(|s| s.max)),
                fmt_opt(row.eps_bar_n),
            ]
        })
        .collect();
    run.write_csv(
        "scaling_agg.csv",
        &["n", "count", "median", "q95", "min", "max", "eps_bar_n"],
        &agg,
    )?;
    let failed: usize = r.rows.iter().map(|row| row.group.failed).sum();
    let fit = match &r.fit {
        Ok(f) => {
            println!("log-log slope of the median: {:.4}", f.slope);
            json!({"slope": f.slope, "intercept": f.intercept})
        }
        Err(e) => {
            println!("log-log slope undefined: {e}");
            json!({"undefined": e.to_string()})
        }
    };
    println!(
        "{} sizes, {} trials, {failed} excluded (no stubborn neighbour or numerical failure)",
        r.rows.len(),
        r.trials.len()
    );
    Ok(json!({"fit": fit, "failed_trials": failed, "sizes": r.rows.len()}))
}

fn sweep_raw(result: &SweepResult, lead: impl Fn(&GroupKey) -> Vec<String>) -> Vec<Vec<String>> {
    result
        .trials
        .iter()
        .map(|t| {
            let mut row = lead(&t.key);
            row.extend(trial_cells(t));
            row
        })
        .collect()
}

fn triplet_cells(k: &GroupKey) -> Vec<String> {
    match *k {
        GroupKey::Triplet { p_s, p_r, p_sr } => vec![fmt_f64(p_s), fmt_f64(p_r), fmt_f64(p_sr)],
        _ => unreachable!("degree sweep keys are triplets"),
    }
}

fn theta_cells(k: &GroupKey) -> Vec<String> {
    match *k {
        GroupKey::Theta(t) => vec![fmt_f64(t)],
        _ => unreachable!("stubbornness sweep keys are thetas"),
    }
}

fn degree_sweep(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let p = DegreeSweepParams {
        triplets: triplet_cube(&cfg.f64_list("values")?),
        trials: cfg.usize("trials")?,
        base_seed: cfg.u64("seed")?,
        n: cfg.usize("n")?,
        r_s: cfg.f64("r_s")?,
        theta: cfg.f64("theta")?,
    };
    let r = experiment_degree_sweep(&p)?;
    run.write_csv(
        "degree_sweep.csv",
        &["p_s", "p_r", "p_sr", "trial", "seed", "dist", "failed"],
        &sweep_raw(&r, triplet_cells),
    )?;
    let agg: Vec<Vec<String>> = r
        .groups
        .iter()
        .map(|g| {
            let mut row = triplet_cells(&g.key);
            row.push(g.summary.map_or(0, |s| s.count).to_string());
            row.push(fmt_opt(g.summary.map(|s| s.median)));
            row
        })
        .collect();
    run.write_csv(
        "degree_sweep_agg.csv",
        &["p_s", "p_r", "p_sr", "count", "median"],
        &agg,
    )?;
    let failed: usize = r.groups.iter().map(|g| g.failed).sum();
    println!(
        "{} triplets, {} trials, {failed} excluded",
        r.groups.len(),
        r.trials.len()
    );
    Ok(json!({"triplets": r.groups.len(), "failed_trials": failed}))
}

fn stubbornness_sweep(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let thetas = cfg.f64_list("thetas")?;
    let p = StubbornnessSweepParams {
        thetas: thetas.clone(),
        trials: cfg.usize("trials")?,
        base_seed: cfg.u64("seed")?,
        sbm: sbm_from(cfg, cfg.usize("n")?)?,
    };
    let r = experiment_stubbornness_sweep(&p)?;
    run.write_csv(
        "stub_sweep.csv",
        &["theta", "trial", "seed", "dist", "failed"],
        &sweep_raw(&r, theta_cells),
    )?;
    let agg: Vec<Vec<String>> = r
        .groups
        .iter()
        .map(|g| {
            let s = g.summary;
            let mut row = theta_cells(&g.key);
            row.push(s.map_or(0, |s| s.count).to_string());
            for v in [
                s.map(|s| s.median),
                s.map(|s| s.q95),
                s.map(|s| s.min),
                s.map(|s| s.max),
            ] {
                row.push(fmt_opt(v));
            }
            row
        })
        .collect();
    run.write_csv(
        "stub_sweep_agg.csv",
        &["theta", "count", "median", "q95", "min", "max"],
        &agg,
    )?;
    let medians: Vec<f64> = r
        .groups
        .iter()
        .map(|g| g.summary.map_or(f64::NAN, |s| s.median))
        .collect();
    let rho = spearman(&thetas, &medians);
    match rho {
        Some(v) => println!("Spearman correlation of the median with theta: {v:.4}"),
        None => println!("Spearman correlation undefined (fewer than two thetas)"),
    }
    Ok(json!({"spearman_theta_median": json_opt(rho), "thetas": thetas.len()}))
}

fn validate(cfg: &RunConfig, run: &mut Run) -> Result<Value, CliError> {
    let seed = cfg.u64("seed")?;
    let tails = degree_tail_frequencies(
        &SbmSpec::new(200, 0.5, 0.4, 0.4, 0.4)?,
        cfg.usize("tail_samples")?,
        seed,
    )?;
    let lambda = lambda_min_frequency(
        &SbmSpec::new(300, 0.5, 0.3, 0.3, 0.3)?,
        0.5,
        cfg.usize("lambda_samples")?,
        seed,
    )?;
    let cover = theorem1_coverage(
        &SbmSpec::new(400, 0.1, 0.3, 0.3, 0.5)?,
        0.5,
        cfg.usize("trials")?,
        seed,
    )?;
    let chern = chernoff_frequency(40, 0.5, 0.5, cfg.usize("chernoff_runs")?, seed)?;

    let checks: Vec<(&str, f64, f64, bool)> = vec![
        (
            "stubborn_min_degree_tail",
            tails.stubborn_frequency,
            tails.bound.stubborn.value,
            tails.stubborn_frequency <= tails.bound.stubborn.value,
        ),
        (
            "cross_min_degree_tail",
            tails.cross_frequency,
            tails.bound.cross.value,
            tails.cross_frequency <= tails.bound.cross.value,
        ),
        (
            "lambda_min_below_threshold",
            lambda.below_frequency,
            lambda.bound.sigma1.value,
            lambda.holds(),
        ),
        (
            "mixed_bound_violations",
            cover.violations as f64,
            0.0,
            cover.violations == 0,
        ),
        (
            "chernoff_tail",
            chern.frequency,
            chern.bound,
            chern.frequency <= chern.bound,
        ),
    ];
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(name, stat, bound, ok)| {
            vec![
                name.to_string(),
                fmt_f64(*stat),
                fmt_f64(*bound),
                u8::from(*ok).to_string(),
            ]
        })
        .collect();
    run.write_csv(
        "validate.csv",
        &["check", "statistic", "bound", "holds"],
        &rows,
    )?;
    for (name, stat, bound, ok) in &checks {
        println!(
            "{} {name}: {} vs {}",
            if *ok { "PASS" } else { "FAIL" },
            fmt_f64(*stat),
            fmt_f64(*bound)
        );
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.3).map(|c| c.0).collect();
    if !failed.is_empty() {
        return Err(CliError::Hypothesis(format!(
            "empirical frequencies exceed their bounds: {}",
            failed.join(", ")
        )));
    }
    Ok(json!({
        "checks": checks.iter().map(|c| json!({"check": c.0, "statistic": c.1, "bound": c.2, "holds": c.3})).collect::<Vec<_>>(),
        "coverage": {"eps_n": cover.eps_n, "max_dist": cover.max_dist, "excluded": cover.failed},
    }))
}
