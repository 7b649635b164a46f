//! Monte-Carlo frequency checks of the probabilistic bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, trial_distance, ExpectedInfluence, ExperimentError};
use crate::bounds::{
    chernoff_tail, lemma4_degree_tails, lemma5_lambda_min_bound, theorem1_distance_bound,
    DegreeTails, LambdaMinBound, ProbabilityBound,
};
use crate::fj::{system_matrix, StubbornnessProfile};
use crate::graph::{
    expected_degree_stats, realized_degree_stats, sample_graph, sbm_probability_matrix, SbmSpec,
};
use crate::linalg::min_eigenvalue_symmetric;

const TAG_DEGREE: u64 = 0x6465_6772;
const TAG_LAMBDA: u64 = 0x6c61_6d62;
const TAG_COVER: u64 = 0x636f_7672;

fn stubborn_and_cross(spec: &SbmSpec<f64>) -> Result<(f64, f64), ExperimentError> {
    let (psi, part) = sbm_probability_matrix(spec);
    let st = expected_degree_stats(&psi, &part)?;
    let cross = st
        .min_cross_degree
        .ok_or(ExperimentError::InvalidParameter {
            name: "r_s",
            value: spec.r_s,
        })?;
    Ok((st.min_stubborn_degree, cross))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeTailCheck {
    pub samples: usize,
    /// Frequency of `d_min^s ≤ δˢ/2`.
    pub stubborn_frequency: f64,
    /// Frequency of `d_min^{rs} ≤ δʳˢ/2`.
    pub cross_frequency: f64,
    pub bound: DegreeTails<f64>,
}

impl DegreeTailCheck {
    pub fn holds(&self) -> bool {
        self.stubborn_frequency <= self.bound.stubborn.value
            && self.cross_frequency <= self.bound.cross.value
    }
}

/// Empirical frequency of low minimum degrees against the degree tails.
pub fn degree_tail_frequencies(
    spec: &SbmSpec<f64>,
    samples: usize,
    base_seed: u64,
) -> Result<DegreeTailCheck, ExperimentError> {
    let (psi, part) = sbm_probability_matrix(spec);
    let (ds, drs) = stubborn_and_cross(spec)?;
    let bound = lemma4_degree_tails(part.n_s(), part.n_r(), ds, drs)?;
    let hits: Vec<(bool, bool)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let g = sample_graph(&psi, derive_seed(base_seed, &[TAG_DEGREE], k as u64));
            let r = realized_degree_stats(&g, &part).expect("partition matches");
            let cross = r.min_cross_degree.expect("non-stubborn block is nonempty");
            (
                r.min_stubborn_degree as f64 <= ds / 2.0,
                cross as f64 <= drs / 2.0,
            )
        })
        .collect();
    let freq = |f: fn(&(bool, bool)) -> bool| {
        hits.iter().filter(|h| f(h)).count() as f64 / samples.max(1) as f64
    };
    Ok(DegreeTailCheck {
        samples,
        stubborn_frequency: freq(|h| h.0),
        cross_frequency: freq(|h| h.1),
        bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMinCheck {
    pub samples: usize,
    /// Frequency of `λ_min(M) < threshold`. Graphs with an isolated agent
    /// count as below the threshold.
    pub below_frequency: f64,
    pub min_observed: f64,
    pub bound: LambdaMinBound<f64>,
}

impl LambdaMinCheck {
    pub fn holds(&self) -> bool {
        self.below_frequency <= self.bound.sigma1.value.max(0.0)
    }
}

/// Empirical frequency of `λ_min(M)` falling below the high-probability
/// threshold.
pub fn lambda_min_frequency(
    spec: &SbmSpec<f64>,
    theta: f64,
    samples: usize,
    base_seed: u64,
) -> Result<LambdaMinCheck, ExperimentError> {
    let (psi, part) = sbm_probability_matrix(spec);
    let st = expected_degree_stats(&psi, &part)?;
    let bound = lemma5_lambda_min_bound(&st, part.n_s(), part.n_r(), theta)?;
    let prof = StubbornnessProfile::new(part, theta)?;
    let lambdas: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let g = sample_graph(&psi, derive_seed(base_seed, &[TAG_LAMBDA], k as u64));
            system_matrix(&g, &prof)
                .ok()
                .and_then(|sys| min_eigenvalue_symmetric(sys.m(), 1e-10).ok())
                .unwrap_or(0.0)
        })
        .collect();
    let below = lambdas.iter().filter(|&&l| l < bound.threshold).count();
    Ok(LambdaMinCheck {
        samples,
        below_frequency: below as f64 / samples.max(1) as f64,
        min_observed: lambdas.iter().copied().fold(f64::INFINITY, f64::min),
        bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCheck {
    pub trials: usize,
    /// Trials that produced no distance (not strict-pass or numerical).
    pub failed: usize,
    /// Trials with `Dist > ε_n · ‖x(0)‖` for `x(0) = 1`.
    pub violations: usize,
    /// Trials with `Dist > ε_n`.
    pub unit_violations: usize,
    pub eps_n: f64,
    pub eta_n: ProbabilityBound<f64>,
    pub x0_norm: f64,
    pub max_dist: f64,
}

/// Counts trials in which `Dist` exceeds the mixed-community bound.
pub fn theorem1_coverage(
    spec: &SbmSpec<f64>,
    theta: f64,
    trials: usize,
    base_seed: u64,
) -> Result<CoverageCheck, ExperimentError> {
    let (psi, part) = sbm_probability_matrix(spec);
    let st = expected_degree_stats(&psi, &part)?;
    let (eps_n, eta_n) = theorem1_distance_bound(&st, part.n_s(), part.n_r(), theta)?;
    let expected = ExpectedInfluence::new(psi, part, theta)?;
    let x0_norm = (part.n() as f64).sqrt();
    let dists: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            trial_distance(&expected, derive_seed(base_seed, &[TAG_COVER], k as u64))
                .0
                .ok()
        })
        .collect();
    let ok: Vec<f64> = dists.iter().flatten().copied().collect();
    Ok(CoverageCheck {
        trials,
        failed: trials - ok.len(),
        violations: ok.iter().filter(|&&d| d > eps_n * x0_norm).count(),
        unit_violations: ok.iter().filter(|&&d| d > eps_n).count(),
        eps_n,
        eta_n,
        x0_norm,
        max_dist: ok.iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffCheck {
    pub runs: usize,
    pub frequency: f64,
    pub bound: f64,
}

/// Frequency of `X ≤ (1 − δ)μ` for `X` a sum of `m` Bernoulli(`p`) draws.
pub fn chernoff_frequency(
    m: usize,
    p: f64,
    delta_frac: f64,
    runs: usize,
    seed: u64,
) -> Result<ChernoffCheck, ExperimentError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExperimentError::InvalidParameter {
            name: "p",
            value: p,
        });
    }
    let mu = m as f64 * p;
    let bound = chernoff_tail(mu, delta_frac)?;
    let cut = (1.0 - delta_frac) * mu;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..runs)
        .filter(|_| ((0..m).filter(|_| rng.gen::<f64>() < p).count() as f64) <= cut)
        .count();
    Ok(ChernoffCheck {
        runs,
        frequency: hits as f64 / runs.max(1) as f64,
        bound,
    })
}
