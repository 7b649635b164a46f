//! Monte-Carlo harness: per-trial `Dist = ‖P − P̄‖₂`, the three parameter
//! sweeps, and frequency checks of the probabilistic bounds.
//!
//! Experiments run in `f64`. Trials are independent and are executed with
//! rayon; every trial owns a seed derived from the base seed, its group key
//! and its index, so results do not depend on the schedule.

mod seed;
mod stats;
pub mod validation;

pub use seed::{derive_seed, stable_hash};
pub use stats::{aggregate, average_ranks, fit_loglog_slope, spearman, LogLogFit, Summary};

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{corollary1_bound, BoundsError};
use crate::fj::{
    convergence_condition, expected_system_matrix, stubborn_influence_block, system_matrix,
    ConvergenceVerdict, FjError, StubbornnessProfile,
};
use crate::graph::{
    sample_graph, sbm_probability_matrix, CommunityPartition, GraphError, ProbabilityMatrix,
    SbmSpec,
};
use crate::linalg::{operator_two_norm, DenseMatrix, LinalgError};

/// Relative tolerance for `‖P − P̄‖₂`.
pub const DIST_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("slope fit needs at least 3 distinct n, got {0}")]
    TooFewPoints(usize),
    #[error("slope fit needs positive data, got n = {n}, median = {median}")]
    NonPositiveFitPoint { n: f64, median: f64 },
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("expected graph violates stubborn reachability (agent {agent} has no stubborn link)")]
    Unreachable { agent: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fj(#[from] FjError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Identifies the configuration a trial belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupKey {
    Size(usize),
    Triplet { p_s: f64, p_r: f64, p_sr: f64 },
    Theta(f64),
}

impl GroupKey {
    fn words(&self) -> Vec<u64> {
        match *self {
            GroupKey::Size(n) => vec![0, n as u64],
            GroupKey::Triplet { p_s, p_r, p_sr } => {
                vec![1, p_s.to_bits(), p_r.to_bits(), p_sr.to_bits()]
            }
            GroupKey::Theta(t) => vec![2, t.to_bits()],
        }
    }

    pub fn seed(&self, base_seed: u64, trial: usize) -> u64 {
        derive_seed(base_seed, &self.words(), trial as u64)
    }
}

/// Why a trial produced no distance.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialFailure {
    /// Some non-stubborn agent has no stubborn neighbour (or some agent is
    /// isolated).
    NotStrictPass(ConvergenceVerdict),
    Numerical(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub key: GroupKey,
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub theta: f64,
    pub sbm: SbmSpec<f64>,
    /// `‖P − P̄‖₂`, or NaN when the trial failed.
    pub dist: f64,
    pub strict_pass: bool,
    pub failure: Option<TrialFailure>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// `P̄` restricted to its stubborn columns, computed once per configuration.
#[derive(Debug, Clone)]
pub struct ExpectedInfluence {
    psi: ProbabilityMatrix<f64>,
    profile: StubbornnessProfile<f64>,
    block: DenseMatrix<f64>,
}

impl ExpectedInfluence {
    /// Fails unless every non-stubborn agent has a positive link
    /// probability to some stubborn agent.
    pub fn new(
        psi: ProbabilityMatrix<f64>,
        partition: CommunityPartition,
        theta: f64,
    ) -> Result<Self, ExperimentError> {
        if partition.n() != psi.n() {
            return Err(GraphError::PartitionMismatch {
                partition: partition.n(),
                graph: psi.n(),
            }
            .into());
        }
        if partition.n_s() == 0 {
            return Err(GraphError::NoStubbornAgents.into());
        }
        if let Some(agent) = partition
            .non_stubborn()
            .find(|&i| partition.stubborn().all(|j| psi.get(i, j) <= 0.0))
        {
            return Err(ExperimentError::Unreachable { agent });
        }
        let profile = StubbornnessProfile::new(partition, theta)?;
        let block = stubborn_influence_block(&expected_system_matrix(&psi, &profile)?)?;
        Ok(Self {
            psi,
            profile,
            block,
        })
    }

    pub fn from_sbm(spec: &SbmSpec<f64>, theta: f64) -> Result<Self, ExperimentError> {
        let (psi, part) = sbm_probability_matrix(spec);
        Self::new(psi, part, theta)
    }

    pub fn psi(&self) -> &ProbabilityMatrix<f64> {
        &self.psi
    }

    pub fn profile(&self) -> &StubbornnessProfile<f64> {
        &self.profile
    }

    /// Stubborn columns of `P̄` (`n × n_s`).
    pub fn block(&self) -> &DenseMatrix<f64> {
        &self.block
    }
}

/// Realized-graph `Dist` for one seed, or why it could not be computed.
pub fn trial_distance(
    expected: &ExpectedInfluence,
    seed: u64,
) -> (Result<f64, TrialFailure>, ConvergenceVerdict) {
    let g = sample_graph(&expected.psi, seed);
    let verdict = convergence_condition(&g, expected.profile.partition());
    if verdict != ConvergenceVerdict::StrictPass {
        return (Err(TrialFailure::NotStrictPass(verdict)), verdict);
    }
    let dist = system_matrix(&g, &expected.profile)
        .and_then(|sys| stubborn_influence_block(&sys))
        .map_err(|e| TrialFailure::Numerical(e.to_string()))
        .and_then(|p| {
            operator_two_norm(&p.sub(&expected.block), DIST_TOL)
                .map_err(|e| TrialFailure::Numerical(e.to_string()))
        });
    (dist, verdict)
}

/// Samples one graph and records its `Dist`. Failures are recorded, not
/// raised.
pub fn run_trial(
    expected: &ExpectedInfluence,
    sbm: SbmSpec<f64>,
    key: GroupKey,
    trial: usize,
    base_seed: u64,
) -> TrialRecord {
    let seed = key.seed(base_seed, trial);
    let (dist, verdict) = trial_distance(expected, seed);
    TrialRecord {
        key,
        trial,
        seed,
        n: expected.psi.n(),
        theta: expected.profile.theta(),
        sbm,
        dist: *dist.as_ref().unwrap_or(&f64::NAN),
        strict_pass: verdict == ConvergenceVerdict::StrictPass,
        failure: dist.err(),
    }
}

/// Aggregate of one configuration. `summary` is `None` when every trial
/// failed.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub key: GroupKey,
    pub summary: Option<Summary>,
    pub failed: usize,
}

struct Group {
    key: GroupKey,
    sbm: SbmSpec<f64>,
    expected: ExpectedInfluence,
}

fn run_groups(
    configs: Vec<(GroupKey, SbmSpec<f64>, f64)>,
    trials: usize,
    base_seed: u64,
) -> Result<(Vec<TrialRecord>, Vec<GroupSummary>), ExperimentError> {
    if configs.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    if trials == 0 {
        return Err(ExperimentError::InvalidParameter {
            name: "trials",
            value: 0.0,
        });
    }
    let groups: Vec<Group> = configs
        .into_par_iter()
        .map(|(key, sbm, theta)| {
            Ok(Group {
                key,
                sbm,
                expected: ExpectedInfluence::from_sbm(&sbm, theta)?,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;

    let jobs: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..trials).map(move |t| (g, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs
        .into_par_iter()
        .map(|(g, t)| {
            let grp = &groups[g];
            run_trial(&grp.expected, grp.sbm, grp.key, t, base_seed)
        })
        .collect();

    let summaries = records
        .chunks(trials)
        .zip(&groups)
        .map(|(chunk, grp)| summarize(grp.key, chunk))
        .collect();
    Ok((records, summaries))
}

fn summarize(key: GroupKey, records: &[TrialRecord]) -> GroupSummary {
    let ok: Vec<f64> = records
        .iter()
        .filter(|r| !r.failed())
        .map(|r| r.dist)
        .collect();
    GroupSummary {
        key,
        summary: aggregate(&ok).ok(),
        failed: records.len() - ok.len(),
    }
}

fn check_theta(theta: f64) -> Result<(), ExperimentError> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(ExperimentError::InvalidParameter {
            name: "theta",
            value: theta,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingParams {
    pub grid: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub r_s: f64,
    pub p_s: f64,
    pub p_r: f64,
    pub p_sr: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub group: GroupSummary,
    /// Large-`n` bound, `None` when it does not apply (for example when
    /// every agent is stubborn).
    pub eps_bar_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub trials: Vec<TrialRecord>,
    pub rows: Vec<ScalingRow>,
    /// Log-log fit of the medians; an error when it is undefined.
    pub fit: Result<LogLogFit, ExperimentError>,
}

/// `n = round(e^k)` for `k = start, start + step, …` up to `end`
/// (inclusive, with a small tolerance for accumulated rounding).
pub fn exp_grid(start: f64, end: f64, step: f64) -> Vec<usize> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| (start + i as f64 * step).exp().round() as usize)
        .collect()
}

/// Dist as a function of the network size.
pub fn experiment_scaling(p: &ScalingParams) -> Result<ScalingResult, ExperimentError> {
    check_theta(p.theta)?;
    let configs = p
        .grid
        .iter()
        .map(|&n| {
            Ok((
                GroupKey::Size(n),
                SbmSpec::new(n, p.r_s, p.p_s, p.p_r, p.p_sr)?,
                p.theta,
            ))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let specs: Vec<SbmSpec<f64>> = configs.iter().map(|c| c.1).collect();
    let (trials, groups) = run_groups(configs, p.trials, p.base_seed)?;
    let rows: Vec<ScalingRow> = groups
        .into_iter()
        .zip(&specs)
        .map(|(group, spec)| ScalingRow {
            n: spec.n,
            eps_bar_n: corollary1_bound(spec, p.theta, spec.n as f64)
                .ok()
                .map(|c| c.eps_bar_n),
            group,
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.group.summary.map(|s| (r.n as f64, s.median)))
        .collect();
    let fit = fit_loglog_slope(&points);
    Ok(ScalingResult { trials, rows, fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSweepParams {
    pub triplets: Vec<(f64, f64, f64)>,
    pub trials: usize,
    pub base_seed: u64,
    pub n: usize,
    pub r_s: f64,
    pub theta: f64,
}

/// Every `(p_s, p_r, p_sr)` with entries drawn from `values`, in
/// lexicographic order.
pub fn triplet_cube(values: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(values.len().pow(3));
    for &a in values {
        for &b in values {
            for &c in values {
                out.push((a, b, c));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub trials: Vec<TrialRecord>,
    pub groups: Vec<GroupSummary>,
}

/// Dist as a function of the block probabilities.
pub fn experiment_degree_sweep(p: &DegreeSweepParams) -> Result<SweepResult, ExperimentError> {
    check_theta(p.theta)?;
    let configs = p
        .triplets
        .iter()
        .map(|&(p_s, p_r, p_sr)| {
            for (name, v) in [("p_s", p_s), ("p_r", p_r), ("p_sr", p_sr)] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(ExperimentError::InvalidParameter { name, value: v });
                }
            }
            Ok((
                GroupKey::Triplet { p_s, p_r, p_sr },
                SbmSpec::new(p.n, p.r_s, p_s, p_r, p_sr)?,
                p.theta,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (trials, groups) = run_groups(configs, p.trials, p.base_seed)?;
    Ok(SweepResult { trials, groups })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StubbornnessSweepParams {
    pub thetas: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    /// Must have `r_s = 1`.
    pub sbm: SbmSpec<f64>,
}

/// Dist as a function of θ when every agent is stubborn.
pub fn experiment_stubbornness_sweep(
    p: &StubbornnessSweepParams,
) -> Result<SweepResult, ExperimentError> {
    if p.sbm.r_s != 1.0 {
        return Err(ExperimentError::InvalidParameter {
            name: "r_s",
            value: p.sbm.r_s,
        });
    }
    let configs = p
        .thetas
        .iter()
        .map(|&t| {
            check_theta(t)?;
            Ok((GroupKey::Theta(t), p.sbm, t))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let (trials, groups) = run_groups(configs, p.trials, p.base_seed)?;
    Ok(SweepResult { trials, groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_psi_gives_zero_distance() {
        let spec = SbmSpec::new(6, 0.5, 1.0, 1.0, 1.0).unwrap();
        let e = ExpectedInfluence::from_sbm(&spec, 0.5).unwrap();
        let r = run_trial(&e, spec, GroupKey::Size(6), 0, 42);
        assert!(!r.failed());
        assert!(r.dist.abs() < 1e-12, "{}", r.dist);
    }

    #[test]
    fn two_agents_full_cross_link() {
        let spec = SbmSpec::new(2, 0.5, 0.3, 0.3, 1.0).unwrap();
        let e = ExpectedInfluence::from_sbm(&spec, 0.5).unwrap();
        let b = e.block();
        assert!((b[(0, 0)] - 1.0).abs() < 1e-14 && (b[(1, 0)] - 1.0).abs() < 1e-14);
        let r = run_trial(&e, spec, GroupKey::Size(2), 3, 9);
        assert_eq!(r.dist, 0.0);
    }

    #[test]
    fn smoke_distance_is_in_range() {
        let spec = SbmSpec::new(55, 0.1, 0.3, 0.3, 0.5).unwrap();
        let e = ExpectedInfluence::from_sbm(&spec, 0.5).unwrap();
        // About half the graphs at this size leave some non-stubborn agent
        // without a stubborn neighbour; take the first that does not.
        let r = (0..50)
            .map(|t| run_trial(&e, spec, GroupKey::Size(55), t, 2024))
            .find(|r| !r.failed())
            .unwrap();
        assert!(r.dist > 0.0 && r.dist <= 2.0 && r.dist.is_finite());
    }

    #[test]
    fn unreachable_expected_graph_rejected() {
        let spec = SbmSpec::new(10, 0.5, 0.3, 0.3, 0.0).unwrap();
        assert!(matches!(
            ExpectedInfluence::from_sbm(&spec, 0.5),
            Err(ExperimentError::Unreachable { agent: 5 })
        ));
    }

    #[test]
    fn zero_cross_probability_rejected_by_sweep() {
        let p = DegreeSweepParams {
            triplets: vec![(0.5, 0.5, 0.0)],
            trials: 1,
            base_seed: 1,
            n: 20,
            r_s: 0.5,
            theta: 0.5,
        };
        assert!(matches!(
            experiment_degree_sweep(&p),
            Err(ExperimentError::InvalidParameter { name: "p_sr", .. })
        ));
    }

    #[test]
    fn single_size_grid_has_undefined_fit() {
        let p = ScalingParams {
            grid: vec![120],
            trials: 3,
            base_seed: 5,
            r_s: 0.1,
            p_s: 0.3,
            p_r: 0.3,
            p_sr: 0.5,
            theta: 0.5,
        };
        let r = experiment_scaling(&p).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(matches!(r.fit, Err(ExperimentError::TooFewPoints(k)) if k <= 1));
    }

    #[test]
    fn single_theta_sweep() {
        let p = StubbornnessSweepParams {
            thetas: vec![0.4],
            trials: 2,
            base_seed: 11,
            sbm: SbmSpec::new(30, 1.0, 0.3, 0.3, 0.3).unwrap(),
        };
        let r = experiment_stubbornness_sweep(&p).unwrap();
        assert_eq!(r.groups.len(), 1);
        assert_eq!(r.trials.len(), 2);
    }

    #[test]
    fn full_grid_shape() {
        let g = exp_grid(4.0, 6.5, 0.25);
        assert_eq!(g, vec![55, 70, 90, 116, 148, 191, 245, 314, 403, 518, 665]);
        let full = exp_grid(4.0, 8.0, 0.05);
        assert_eq!(full.len(), 81);
        assert_eq!(*full.last().unwrap(), 2981);
    }

    #[test]
    fn cube_order() {
        let c = triplet_cube(&[0.2, 0.8]);
        assert_eq!(c.len(), 8);
        assert_eq!(c[1], (0.2, 0.2, 0.8));
        assert_eq!(c[7], (0.8, 0.8, 0.8));
    }
}
