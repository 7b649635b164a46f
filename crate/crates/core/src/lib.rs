//! Friedkin–Johnsen opinion dynamics on Bernoulli random graphs.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the bottom of this file fix the scalar to `f64`, which is
//! what the experiments and the command-line tool use.

pub mod bounds;
pub mod experiments;
pub mod fj;
pub mod graph;
pub mod linalg;
pub mod scalar;

pub use bounds::{
    bernstein_tail, bound_report, chernoff_tail, corollary1_bound, lemma3_b1, lemma4_degree_tails,
    lemma5_lambda_min_bound, mixed_decay_exponent, theorem1_bounds, theorem1_distance_bound,
    theorem2_bound, theorem2_distance_bound, BoundReport, BoundsError, DegreeTails, LambdaMinBound,
    MixedCommunityBound, ProbabilityBound, ReportInputs, SbmDistanceBound,
};
pub use experiments::{ExpectedInfluence, ExperimentError, TrialRecord};
pub use fj::{
    convergence_condition, expected_system_matrix, final_opinions_direct, final_opinions_iterative,
    fj_step, influence_matrix, influence_matrix_resolvent, stubborn_influence_block,
    stubbornness_profile, system_matrix, ConvergenceVerdict, FjError, GraphSource, InfluenceSystem,
    OpinionVector, StubbornnessProfile,
};
pub use graph::{
    check_assumptions, expected_degree_stats, realized_degree_stats, sample_graph,
    sbm_probability_matrix, AssumptionReport, CommunityPartition, ExpectedDegreeStats, GraphError,
    ProbabilityMatrix, RealizedDegreeStats, RealizedGraph, SbmSpec,
};
pub use linalg::{DenseMatrix, LinalgError};
pub use scalar::Scalar;

pub type Matrix = DenseMatrix<f64>;
pub type Probabilities = ProbabilityMatrix<f64>;
pub type Sbm = SbmSpec<f64>;
pub type Stubbornness = StubbornnessProfile<f64>;
pub type System = InfluenceSystem<f64>;
pub type Opinions = OpinionVector<f64>;
pub type DegreeStats = ExpectedDegreeStats<f64>;
pub type Report = BoundReport<f64>;
