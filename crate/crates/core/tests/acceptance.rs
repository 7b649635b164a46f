//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! FAIL. Runs without the libtest harness so the lines are always shown.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::InstanceGen;
use fjlab::bounds::{corollary1_bound, theorem1_bounds, theorem2_bound};
use fjlab::experiments::validation::{degree_tail_frequencies, theorem1_coverage};
use fjlab::experiments::{
    exp_grid, experiment_degree_sweep, experiment_scaling, experiment_stubbornness_sweep, spearman,
    triplet_cube, DegreeSweepParams, GroupKey, ScalingParams, StubbornnessSweepParams,
};
use fjlab::fj::{
    final_opinions_direct, final_opinions_iterative, influence_matrix, influence_matrix_resolvent,
    system_matrix, OpinionVector,
};
use fjlab::graph::{realized_degree_stats, ExpectedDegreeStats, SbmSpec};
use fjlab::lemma3_b1;
use fjlab::linalg::min_eigenvalue_symmetric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn row_stochastic() -> Verdict {
    let mut gen = InstanceGen::new(0xA11CE, (10, 120));
    let (mut worst_neg, mut worst_row) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let inst = gen.next_instance();
        let sys = system_matrix(&inst.graph, &inst.profile).map_err(|e| e.to_string())?;
        let p = influence_matrix(&sys).map_err(|e| e.to_string())?;
        worst_neg = worst_neg.min(p.as_slice().iter().copied().fold(0.0, f64::min));
        for s in p.row_sums() {
            worst_row = worst_row.max((s - 1.0).abs());
        }
    }
    check(
        worst_neg >= -1e-12 && worst_row <= 1e-10,
        format!("200 instances, min entry {worst_neg:e}, max |row sum - 1| {worst_row:e}"),
    )
}

fn two_forms_agree() -> Verdict {
    let mut gen = InstanceGen::new(0xB0B, (10, 120));
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let inst = gen.next_instance();
        let sys = system_matrix(&inst.graph, &inst.profile).map_err(|e| e.to_string())?;
        let p = influence_matrix(&sys).map_err(|e| e.to_string())?;
        let q = influence_matrix_resolvent(
            &inst.graph.adjacency_matrix(),
            sys.degrees(),
            &inst.profile,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(p.sub(&q).max_abs());
    }
    check(
        worst <= 1e-9,
        format!("50 instances, max entry gap {worst:e}"),
    )
}

fn direct_vs_iterative() -> Verdict {
    let mut gen = InstanceGen::new(0xC0FFEE, (10, 100));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut worst, mut max_iters) = (0.0f64, 0usize);
    for _ in 0..50 {
        let inst = gen.next_instance();
        let x0 = OpinionVector::new(
            (0..inst.graph.n())
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let sys = system_matrix(&inst.graph, &inst.profile).map_err(|e| e.to_string())?;
        let direct = final_opinions_direct(&sys, &x0).map_err(|e| e.to_string())?;
        let (iter, k) = final_opinions_iterative(&inst.graph, &inst.profile, &x0, 1e-9, 1_000_000)
            .map_err(|e| e.to_string())?;
        worst = worst.max(direct.max_abs_diff(&iter));
        max_iters = max_iters.max(k);
    }
    check(
        worst <= 1e-7,
        format!("50 instances, max inf-norm gap {worst:e}, most updates {max_iters}"),
    )
}

fn lambda_min_certified() -> Verdict {
    let mut gen = InstanceGen::new(0xD1CE, (20, 200));
    gen.all_stubborn_share = 0.0;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..100 {
        let inst = gen.next_instance();
        let r = realized_degree_stats(&inst.graph, inst.partition()).map_err(|e| e.to_string())?;
        let b1 = lemma3_b1(
            r.min_stubborn_degree as f64,
            r.min_cross_degree.unwrap() as f64,
            inst.profile.theta(),
        )
        .map_err(|e| e.to_string())?;
        let sys = system_matrix(&inst.graph, &inst.profile).map_err(|e| e.to_string())?;
        let lmin = min_eigenvalue_symmetric(sys.m(), 1e-12).map_err(|e| e.to_string())?;
        worst_margin = worst_margin.min(lmin - b1);
    }
    check(
        worst_margin >= -1e-8,
        format!("100 instances, min(lambda_min - b1) = {worst_margin:e}"),
    )
}

fn degree_tails() -> Verdict {
    let spec = SbmSpec::new(200, 0.5, 0.4, 0.4, 0.4).unwrap();
    let c = degree_tail_frequencies(&spec, 2000, 0x4D43).map_err(|e| e.to_string())?;
    check(
        c.holds(),
        format!(
            "stubborn {} <= {:.4e}, cross {} <= {:.4e}",
            c.stubborn_frequency, c.bound.stubborn.value, c.cross_frequency, c.bound.cross.value
        ),
    )
}

fn example1_scaling() -> Verdict {
    let p = ScalingParams {
        grid: exp_grid(4.0, 6.5, 0.25),
        trials: 20,
        base_seed: 20_240_601,
        r_s: 0.1,
        p_s: 0.3,
        p_r: 0.3,
        p_sr: 0.5,
        theta: 0.5,
    };
    let r = experiment_scaling(&p).map_err(|e| e.to_string())?;
    let fit = r.fit.clone().map_err(|e| e.to_string())?;
    let widths: Vec<(usize, f64)> = r.rows[r.rows.len() - 3..]
        .iter()
        .map(|row| {
            let s = row.group.summary.expect("trials succeed at large n");
            (row.n, (s.max - s.min) / s.median)
        })
        .collect();
    let shrinking = widths.windows(2).all(|w| w[1].1 < w[0].1);
    let failed: usize = r.rows.iter().map(|row| row.group.failed).sum();
    check(
        (-0.65..=-0.45).contains(&fit.slope) && shrinking,
        format!(
            "slope {:.4}, top-3 band widths {:?}, {failed} of {} trials excluded",
            fit.slope,
            widths
                .iter()
                .map(|(n, w)| format!("{n}:{w:.3}"))
                .collect::<Vec<_>>(),
            r.trials.len()
        ),
    )
}

fn example2_degrees() -> Verdict {
    let p = DegreeSweepParams {
        triplets: triplet_cube(&[0.2, 0.5, 0.8]),
        trials: 10,
        base_seed: 77,
        n: 200,
        r_s: 0.5,
        theta: 0.5,
    };
    let r = experiment_degree_sweep(&p).map_err(|e| e.to_string())?;
    let median_at = |ps: f64, pr: f64, psr: f64| {
        r.groups
            .iter()
            .find(|g| {
                g.key
                    == GroupKey::Triplet {
                        p_s: ps,
                        p_r: pr,
                        p_sr: psr,
                    }
            })
            .and_then(|g| g.summary)
            .map(|s| s.median)
    };
    let lo = median_at(0.2, 0.2, 0.2).ok_or("no successful trial at (0.2,0.2,0.2)")?;
    let hi = median_at(0.8, 0.8, 0.8).ok_or("no successful trial at (0.8,0.8,0.8)")?;
    let psr = [0.2, 0.5, 0.8];
    let meds: Vec<f64> = psr
        .iter()
        .map(|&x| median_at(0.5, 0.5, x).unwrap_or(f64::NAN))
        .collect();
    let rho = spearman(&psr, &meds).unwrap_or(f64::NAN);
    check(
        hi < lo && rho <= -0.8,
        format!(
            "median(0.8^3) {hi:.4e} < median(0.2^3) {lo:.4e}; p_sr medians {meds:?}, rho {rho}"
        ),
    )
}

/// median(θ = 0.05) / median(θ = 0.95) from the first full run of the
/// Example-3 configuration below (n = 300, p = 0.2, 10 trials, seed 303).
const EXAMPLE3_RATIO: f64 = 10.162144904693;

fn example3_stubbornness() -> Verdict {
    let thetas: Vec<f64> = (0..10).map(|k| 0.05 + 0.1 * k as f64).collect();
    let p = StubbornnessSweepParams {
        thetas: thetas.clone(),
        trials: 10,
        base_seed: 303,
        sbm: SbmSpec::new(300, 1.0, 0.2, 0.2, 0.2).unwrap(),
    };
    let r = experiment_stubbornness_sweep(&p).map_err(|e| e.to_string())?;
    let meds: Vec<f64> = r
        .groups
        .iter()
        .map(|g| g.summary.map_or(f64::NAN, |s| s.median))
        .collect();
    let rho = spearman(&thetas, &meds).unwrap_or(f64::NAN);
    let ratio = meds[0] / meds[meds.len() - 1];
    let frozen = rel_err(ratio, EXAMPLE3_RATIO) <= 1e-11;
    check(
        rho <= -0.95 && ratio >= 2.0 && frozen,
        format!("rho {rho}, median ratio 0.05/0.95 = {ratio:.12} (frozen {EXAMPLE3_RATIO})"),
    )
}

fn bound_formulas() -> Verdict {
    let mut worst = 0.0f64;
    let mut track = |a: f64, b: f64| worst = worst.max(rel_err(a, b));

    // Mixed communities at n = 100 with equal expected degrees 60.
    let st = ExpectedDegreeStats {
        min_stubborn_degree: 60.0,
        max_stubborn_degree: 60.0,
        min_cross_degree: Some(60.0),
        max_cross_degree: Some(60.0),
        max_nonstubborn_degree: Some(60.0),
        max_degree: 60.0,
        max_nonstubborn_degree_literal: 60.0,
    };
    let t1 = theorem1_bounds(&st, 50, 50, 0.5, 9.0, 10.0).map_err(|e| e.to_string())?;
    let l = 100f64.ln();
    let inv = 1.0 / 60.0 + 0.5 / 60.0;
    track(
        t1.eps_n,
        12.0 * inv * (60.0 * l).sqrt() + 4.0 * 1.5 / 0.125 * inv * inv * (60.0 * l).sqrt() * 60.0,
    );
    track(
        t1.eta_n.value,
        100.0 * (-7.5f64).exp() + 0.1 + 2.0 * 100f64.powf(-0.2),
    );
    track(t1.q, 0.125);

    // All stubborn, δ = Δ = n/2, θ = 1/2, n = e⁴.
    let n = 4f64.exp();
    let (eps2, q2) = theorem2_bound(n / 2.0, n / 2.0, 0.5, n, 9.6).map_err(|e| e.to_string())?;
    track(eps2, 36.0 * 2f64.sqrt() * (-2f64).exp());
    track(q2, 0.2);

    // Example-1 block constants and the √(log n / n) rate.
    let spec = SbmSpec::new(1000, 0.1, 0.3, 0.3, 0.5).unwrap();
    let c3 = corollary1_bound(&spec, 0.5, 1e3).map_err(|e| e.to_string())?;
    let c5 = corollary1_bound(&spec, 0.5, 1e5).map_err(|e| e.to_string())?;
    track(c3.b1, 0.05);
    track(c3.b2, 0.48);
    track(c3.b3, 0.32);
    let k = 0.48f64.sqrt() / 0.05 + 0.5 / 0.48f64.sqrt();
    track(
        c3.eps_bar_n,
        (12.0 * k + 48.0 * k * k * 0.48f64.sqrt()) * (1e3f64.ln() / 1e3).sqrt(),
    );
    track(
        c3.eps_bar_n / (1e3f64.ln() / 1e3).sqrt(),
        c5.eps_bar_n / (1e5f64.ln() / 1e5).sqrt(),
    );
    check(worst <= 1e-10, format!("max relative error {worst:e}"))
}

fn mixed_bound_conservative() -> Verdict {
    let spec = SbmSpec::new(400, 0.1, 0.3, 0.3, 0.5).unwrap();
    let c = theorem1_coverage(&spec, 0.5, 200, 0x7431).map_err(|e| e.to_string())?;
    check(
        c.violations == 0 && c.failed < c.trials,
        format!(
            "{} violations of Dist <= eps_n*|x0| (eps_n {:.4e}, |x0| {:.3}), max Dist {:.4e}, {} of {} trials excluded, eta_n {:.4} (vacuous: {})",
            c.violations, c.eps_n, c.x0_norm, c.max_dist, c.failed, c.trials, c.eta_n.value, c.eta_n.vacuous
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Verdict); 10] = [
        ("influence matrix is row-stochastic", 30, row_stochastic),
        (
            "M-inverse and resolvent forms of P agree",
            10,
            two_forms_agree,
        ),
        (
            "direct and iterative final opinions agree",
            30,
            direct_vs_iterative,
        ),
        (
            "lambda_min(M) >= b1 from realized degrees",
            60,
            lambda_min_certified,
        ),
        (
            "minimum-degree tail frequencies within bounds",
            120,
            degree_tails,
        ),
        (
            "size scaling: slope near -1/2 and shrinking band",
            600,
            example1_scaling,
        ),
        (
            "degree sweep: denser graphs and larger p_sr concentrate",
            600,
            example2_degrees,
        ),
        (
            "stubbornness sweep: Dist decreasing in theta",
            300,
            example3_stubbornness,
        ),
        ("bound formulas match hand values", 1, bound_formulas),
        (
            "mixed-community bound is never violated",
            300,
            mixed_bound_conservative,
        ),
    ];
    let mut failures = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(budget);
        let (ok, detail) = match verdict {
            Ok(d) => (!over, d),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s of {budget}s{}]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if over { ", over budget" } else { "" }
        );
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
