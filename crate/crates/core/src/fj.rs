//! Friedkin-Johnsen dynamics with a homogeneous stubborn community: the
//! one-step update, the closed-form final opinions for realized and
//! expected graphs, and the convergence condition.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{CommunityPartition, ProbabilityMatrix, RealizedGraph};
use crate::linalg::{min_eigenvalue_symmetric, solve_general, Cholesky, DenseMatrix, LinalgError};
use crate::scalar::Scalar;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FjError {
    #[error("stubbornness theta = {0} must lie in (0, 1)")]
    InvalidTheta(f64),
    #[error("agent {agent} has zero degree")]
    ZeroDegree { agent: usize },
    #[error("expected {expected} agents, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("opinion {index} is not finite")]
    NonFiniteOpinion { index: usize },
    #[error("M is singular or indefinite (lambda_min estimate {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("some non-stubborn agent cannot reach a stubborn agent")]
    NotConvergent,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// θ on the stubborn block, 0 on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StubbornnessProfile<T> {
    partition: CommunityPartition,
    theta: T,
}

impl<T: Scalar> StubbornnessProfile<T> {
    pub fn new(partition: CommunityPartition, theta: T) -> Result<Self, FjError> {
        if !(theta > T::zero() && theta < T::one()) {
            return Err(FjError::InvalidTheta(theta.as_f64()));
        }
        Ok(Self { partition, theta })
    }

    pub fn partition(&self) -> &CommunityPartition {
        &self.partition
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    #[inline]
    pub fn theta_of(&self, i: usize) -> T {
        if self.partition.is_stubborn(i) {
            self.theta
        } else {
            T::zero()
        }
    }

    /// Diagonal of Θ.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n()).map(|i| self.theta_of(i)).collect()
    }

    /// θ / (1 − θ), the diagonal of (I − Θ)⁻¹Θ on the stubborn block.
    pub fn anchor_weight(&self) -> T {
        self.theta / (T::one() - self.theta)
    }
}

pub fn stubbornness_profile<T: Scalar>(
    partition: CommunityPartition,
    theta: T,
) -> Result<StubbornnessProfile<T>, FjError> {
    StubbornnessProfile::new(partition, theta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector<T>(Vec<T>);

impl<T: Scalar> OpinionVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, FjError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FjError::NonFiniteOpinion { index });
        }
        Ok(Self(values))
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn euclidean_norm(&self) -> T {
        self.0.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// ‖self − other‖_∞
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSource {
    Realized,
    Expected,
}

/// `M = (I − Θ)⁻¹ΘD + D − A` for one graph, with the anchoring diagonal
/// `(I − Θ)⁻¹ΘD` kept alongside so that `P = M⁻¹ (I − Θ)⁻¹ΘD`.
#[derive(Debug, Clone)]
pub struct InfluenceSystem<T> {
    m: DenseMatrix<T>,
    degrees: Vec<T>,
    anchor: Vec<T>,
    partition: CommunityPartition,
    source: GraphSource,
}

impl<T: Scalar> InfluenceSystem<T> {
    fn assemble(
        adjacency: impl Fn(usize, usize) -> T,
        degrees: Vec<T>,
        prof: &StubbornnessProfile<T>,
        source: GraphSource,
    ) -> Result<Self, FjError> {
        let n = degrees.len();
        if let Some(agent) = degrees.iter().position(|&d| !(d > T::zero())) {
            return Err(FjError::ZeroDegree { agent });
        }
        let w = prof.anchor_weight();
        let anchor: Vec<T> = (0..n)
            .map(|i| {
                if prof.partition().is_stubborn(i) {
                    w * degrees[i]
                } else {
                    T::zero()
                }
            })
            .collect();
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                anchor[i] + degrees[i]
            } else {
                -adjacency(i, j)
            }
        });
        Ok(Self {
            m,
            degrees,
            anchor,
            partition: *prof.partition(),
            source,
        })
    }

    pub fn m(&self) -> &DenseMatrix<T> {
        &self.m
    }

    pub fn degrees(&self) -> &[T] {
        &self.degrees
    }

    /// Diagonal of `(I − Θ)⁻¹ΘD`.
    pub fn anchor(&self) -> &[T] {
        &self.anchor
    }

    pub fn source(&self) -> GraphSource {
        self.source
    }

    pub fn partition(&self) -> &CommunityPartition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    fn factor(&self) -> Result<Cholesky<T>, FjError> {
        Cholesky::factor(&self.m).map_err(|e| match e {
            LinalgError::NotPositiveDefinite { .. } => FjError::NotPositiveDefinite {
                lambda_min: min_eigenvalue_symmetric(&self.m, T::lit(1e-10))
                    .map_or(f64::NAN, Scalar::as_f64),
            },
            other => other.into(),
        })
    }
}

/// M for a realized graph.
pub fn system_matrix<T: Scalar>(
    g: &RealizedGraph,
    prof: &StubbornnessProfile<T>,
) -> Result<InfluenceSystem<T>, FjError> {
    check_dim(prof.n(), g.n())?;
    let degrees = g.degrees().iter().map(|&d| T::from_count(d)).collect();
    InfluenceSystem::assemble(
        |i, j| {
            if g.has_edge(i, j) {
                T::one()
            } else {
                T::zero()
            }
        },
        degrees,
        prof,
        GraphSource::Realized,
    )
}

/// M̄ for the expected graph (A replaced by Ψ, D by D̄).
pub fn expected_system_matrix<T: Scalar>(
    psi: &ProbabilityMatrix<T>,
    prof: &StubbornnessProfile<T>,
) -> Result<InfluenceSystem<T>, FjError> {
    check_dim(prof.n(), psi.n())?;
    InfluenceSystem::assemble(
        |i, j| psi.get(i, j),
        psi.expected_degrees(),
        prof,
        GraphSource::Expected,
    )
}

/// The columns of `P` indexed by stubborn agents (all other columns of `P`
/// are zero), as an `n × n_s` matrix.
pub fn stubborn_influence_block<T: Scalar>(
    sys: &InfluenceSystem<T>,
) -> Result<DenseMatrix<T>, FjError> {
    let chol = sys.factor()?;
    let n = sys.n();
    let n_s = sys.partition.n_s();
    let mut block = DenseMatrix::zeros(n, n_s);
    let mut col = vec![T::zero(); n];
    for j in 0..n_s {
        col.iter_mut().for_each(|c| *c = T::zero());
        col[j] = sys.anchor[j];
        chol.solve_in_place(&mut col);
        block.set_column(j, &col);
    }
    Ok(block)
}

/// `P = M⁻¹ (I − Θ)⁻¹ΘD`.
pub fn influence_matrix<T: Scalar>(sys: &InfluenceSystem<T>) -> Result<DenseMatrix<T>, FjError> {
    let block = stubborn_influence_block(sys)?;
    let n = sys.n();
    let mut p = DenseMatrix::zeros(n, n);
    for i in 0..n {
        p.row_mut(i)[..block.cols()].copy_from_slice(block.row(i));
    }
    Ok(p)
}

/// `P = (I − (I − Θ)D⁻¹W)⁻¹Θ`, computed by a general LU solve. Works for
/// any symmetric weight matrix `W` with positive row sums `degrees`.
pub fn influence_matrix_resolvent<T: Scalar>(
    weights: &DenseMatrix<T>,
    degrees: &[T],
    prof: &StubbornnessProfile<T>,
) -> Result<DenseMatrix<T>, FjError> {
    let n = degrees.len();
    check_dim(prof.n(), n)?;
    check_dim(n, weights.rows())?;
    if let Some(agent) = degrees.iter().position(|&d| !(d > T::zero())) {
        return Err(FjError::ZeroDegree { agent });
    }
    let k = DenseMatrix::from_fn(n, n, |i, j| {
        let mix = (T::one() - prof.theta_of(i)) * weights[(i, j)] / degrees[i];
        if i == j {
            T::one() - mix
        } else {
            -mix
        }
    });
    let theta = DenseMatrix::from_diagonal(&prof.diagonal());
    Ok(solve_general(&k, &theta)?)
}

/// `x(∞) = P x(0)` via one SPD solve `M y = (I − Θ)⁻¹ΘD x(0)`.
pub fn final_opinions_direct<T: Scalar>(
    sys: &InfluenceSystem<T>,
    x0: &OpinionVector<T>,
) -> Result<OpinionVector<T>, FjError> {
    check_dim(sys.n(), x0.len())?;
    let chol = sys.factor()?;
    let mut rhs: Vec<T> = sys
        .anchor
        .iter()
        .zip(x0.as_slice())
        .map(|(&a, &x)| a * x)
        .collect();
    chol.solve_in_place(&mut rhs);
    OpinionVector::new(rhs)
}

/// One FJ update `(I − Θ)D⁻¹A x + Θ x(0)`.
pub fn fj_step<T: Scalar>(
    x: &OpinionVector<T>,
    g: &RealizedGraph,
    prof: &StubbornnessProfile<T>,
    x0: &OpinionVector<T>,
) -> Result<OpinionVector<T>, FjError> {
    let n = g.n();
    check_dim(prof.n(), n)?;
    check_dim(n, x.len())?;
    check_dim(n, x0.len())?;
    if let Some(agent) = g.degrees().iter().position(|&d| d == 0) {
        return Err(FjError::ZeroDegree { agent });
    }
    let neighbors: Vec<Vec<usize>> = (0..n).map(|i| g.neighbors(i).collect()).collect();
    Ok(OpinionVector(step(
        x.as_slice(),
        &neighbors,
        prof,
        x0.as_slice(),
    )))
}

fn step<T: Scalar>(
    x: &[T],
    neighbors: &[Vec<usize>],
    prof: &StubbornnessProfile<T>,
    x0: &[T],
) -> Vec<T> {
    neighbors
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let th = prof.theta_of(i);
            let avg = nb.iter().map(|&j| x[j]).sum::<T>() / T::from_count(nb.len());
            (T::one() - th) * avg + th * x0[i]
        })
        .collect()
}

/// Iterates the FJ update until `‖x(t+1) − x(t)‖_∞ ≤ tol`. Returns the
/// final vector and the number of updates performed.
pub fn final_opinions_iterative<T: Scalar>(
    g: &RealizedGraph,
    prof: &StubbornnessProfile<T>,
    x0: &OpinionVector<T>,
    tol: T,
    max_iters: usize,
) -> Result<(OpinionVector<T>, usize), FjError> {
    if !(tol > T::zero()) {
        return Err(FjError::InvalidTolerance(tol.as_f64()));
    }
    check_dim(prof.n(), g.n())?;
    check_dim(g.n(), x0.len())?;
    if convergence_condition(g, prof.partition()) == ConvergenceVerdict::Fail {
        return Err(match g.degrees().iter().position(|&d| d == 0) {
            Some(agent) => FjError::ZeroDegree { agent },
            None => FjError::NotConvergent,
        });
    }
    let neighbors: Vec<Vec<usize>> = (0..g.n()).map(|i| g.neighbors(i).collect()).collect();
    let mut x = x0.as_slice().to_vec();
    let mut residual = T::infinity();
    for it in 1..=max_iters {
        let next = step(&x, &neighbors, prof, x0.as_slice());
        residual = next
            .iter()
            .zip(&x)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        x = next;
        if residual <= tol {
            return Ok((OpinionVector(x), it));
        }
    }
    Err(FjError::MaxIterations {
        iterations: max_iters,
        residual: residual.as_f64(),
    })
}

/// Which reading of "every non-stubborn agent is connected to a stubborn
/// agent" a graph satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceVerdict {
    /// Every non-stubborn agent is adjacent to a stubborn agent.
    StrictPass,
    /// Every non-stubborn agent has a path to a stubborn agent.
    PathPass,
    /// Some agent is isolated or cut off from every stubborn agent.
    Fail,
}

impl ConvergenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::StrictPass => "strict_pass",
            Self::PathPass => "path_pass",
            Self::Fail => "fail",
        }
    }
}

/// Zero-degree agents (stubborn or not) always fail: `D⁻¹` does not exist.
pub fn convergence_condition(g: &RealizedGraph, part: &CommunityPartition) -> ConvergenceVerdict {
    if part.n() != g.n() || part.n_s() == 0 || g.degrees().iter().any(|&d| d == 0) {
        return ConvergenceVerdict::Fail;
    }
    let strict = part
        .non_stubborn()
        .all(|i| g.neighbors(i).any(|j| part.is_stubborn(j)));
    if strict {
        return ConvergenceVerdict::StrictPass;
    }
    let mut seen = vec![false; g.n()];
    let mut queue: VecDeque<usize> = part.stubborn().collect();
    for i in part.stubborn() {
        seen[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for j in g.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        ConvergenceVerdict::PathPass
    } else {
        ConvergenceVerdict::Fail
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), FjError> {
    if expected == found {
        Ok(())
    } else {
        Err(FjError::DimensionMismatch { expected, found })
    }
}
