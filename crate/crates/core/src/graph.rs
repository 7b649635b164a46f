//! Link-probability matrices, realized graphs, the two-community stochastic
//! block model and the degree statistics consumed by the bounds.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("probability matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("probability matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("self-loop probability at agent {0} must be 0")]
    SelfLoop(usize),
    #[error("probability {value} at ({i}, {j}) is outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("invalid {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("partition covers {partition} agents but the graph has {graph}")]
    PartitionMismatch { partition: usize, graph: usize },
    #[error("there are no stubborn agents")]
    NoStubbornAgents,
    #[error("edge ({0}, {1}) is a self-loop or out of range")]
    BadEdge(usize, usize),
    #[error("assumption constant {name} = {value} must exceed 8")]
    ConstantTooSmall { name: &'static str, value: f64 },
}

/// Split of the agents into the stubborn block `{0, …, n_s − 1}` and the
/// non-stubborn block `{n_s, …, n − 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommunityPartition {
    n_s: usize,
    n_r: usize,
}

impl CommunityPartition {
    pub fn new(n_s: usize, n_r: usize) -> Self {
        Self { n_s, n_r }
    }

    /// `n_s = round(r_s · n)`, at least 1 and at most `n`.
    pub fn from_ratio(n: usize, r_s: f64) -> Result<Self, GraphError> {
        if !(r_s > 0.0 && r_s <= 1.0) || n == 0 {
            return Err(GraphError::InvalidParameter {
                name: "r_s",
                value: r_s,
            });
        }
        let n_s = ((r_s * n as f64).round() as usize).clamp(1, n);
        Ok(Self::new(n_s, n - n_s))
    }

    pub fn n(&self) -> usize {
        self.n_s + self.n_r
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    #[inline]
    pub fn is_stubborn(&self, i: usize) -> bool {
        i < self.n_s
    }

    pub fn stubborn(&self) -> Range<usize> {
        0..self.n_s
    }

    pub fn non_stubborn(&self) -> Range<usize> {
        self.n_s..self.n()
    }

    fn check(&self, n: usize) -> Result<(), GraphError> {
        if self.n() != n {
            return Err(GraphError::PartitionMismatch {
                partition: self.n(),
                graph: n,
            });
        }
        Ok(())
    }
}

/// Symmetric matrix of link probabilities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<T> {
    psi: DenseMatrix<T>,
}

impl<T: Scalar> ProbabilityMatrix<T> {
    pub fn new(psi: DenseMatrix<T>) -> Result<Self, GraphError> {
        if !psi.is_square() {
            return Err(GraphError::NotSquare {
                rows: psi.rows(),
                cols: psi.cols(),
            });
        }
        let n = psi.rows();
        for i in 0..n {
            if psi[(i, i)] != T::zero() {
                return Err(GraphError::SelfLoop(i));
            }
            for j in 0..n {
                let v = psi[(i, j)];
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(GraphError::OutOfRange {
                        i,
                        j,
                        value: v.as_f64(),
                    });
                }
                if j < i && v != psi[(j, i)] {
                    return Err(GraphError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { psi })
    }

    pub fn n(&self) -> usize {
        self.psi.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.psi[(i, j)]
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.psi
    }

    /// Expected degrees `d_i(Ḡ) = Σ_{j≠i} ψ_ij`.
    pub fn expected_degrees(&self) -> Vec<T> {
        self.psi.row_sums()
    }
}

/// Two-community SBM: stubborn block first, then non-stubborn block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmSpec<T> {
    pub n: usize,
    pub r_s: T,
    pub p_s: T,
    pub p_r: T,
    pub p_sr: T,
}

impl<T: Scalar> SbmSpec<T> {
    pub fn new(n: usize, r_s: T, p_s: T, p_r: T, p_sr: T) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidParameter {
                name: "n",
                value: 0.0,
            });
        }
        if !(r_s > T::zero() && r_s <= T::one()) {
            return Err(GraphError::InvalidParameter {
                name: "r_s",
                value: r_s.as_f64(),
            });
        }
        for (name, p) in [("p_s", p_s), ("p_r", p_r), ("p_sr", p_sr)] {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(GraphError::InvalidParameter {
                    name,
                    value: p.as_f64(),
                });
            }
        }
        Ok(Self {
            n,
            r_s,
            p_s,
            p_r,
            p_sr,
        })
    }

    pub fn partition(&self) -> CommunityPartition {
        CommunityPartition::from_ratio(self.n, self.r_s.as_f64())
            .expect("validated at construction")
    }
}

/// Block probability matrix `ψ_ij = π_{c_i c_j}` (zero diagonal) and its
/// partition.
pub fn sbm_probability_matrix<T: Scalar>(
    spec: &SbmSpec<T>,
) -> (ProbabilityMatrix<T>, CommunityPartition) {
    let part = spec.partition();
    let psi = DenseMatrix::from_fn(spec.n, spec.n, |i, j| {
        if i == j {
            T::zero()
        } else {
            match (part.is_stubborn(i), part.is_stubborn(j)) {
                (true, true) => spec.p_s,
                (false, false) => spec.p_r,
                _ => spec.p_sr,
            }
        }
    });
    (ProbabilityMatrix { psi }, part)
}

/// Undirected simple graph stored as a dense 0/1 adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedGraph {
    n: usize,
    adj: Vec<u8>,
    degrees: Vec<usize>,
}

impl RealizedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![0; n * n],
            degrees: vec![0; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.link(i, j);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(GraphError::BadEdge(i, j));
            }
            if !g.has_edge(i, j) {
                g.link(i, j);
            }
        }
        Ok(g)
    }

    fn link(&mut self, i: usize, j: usize) {
        self.adj[i * self.n + j] = 1;
        self.adj[j * self.n + i] = 1;
        self.degrees[i] += 1;
        self.degrees[j] += 1;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j] != 0
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i * self.n..(i + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| (a != 0).then_some(j))
    }

    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    pub fn adjacency_matrix<T: Scalar>(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                T::one()
            } else {
                T::zero()
            }
        })
    }
}

/// Draws one realization of `RG(V, Ψ)`.
///
/// Row `i` owns ChaCha stream `i` under `seed`; its `k`-th draw decides the
/// pair `(i, i + 1 + k)`. Every pair therefore gets a value fixed by
/// `(seed, i, j)` alone, and only the upper triangle of `Ψ` is read.
pub fn sample_graph<T: Scalar>(psi: &ProbabilityMatrix<T>, seed: u64) -> RealizedGraph {
    let n = psi.n();
    let mut g = RealizedGraph::empty(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for j in i + 1..n {
            let u: f64 = rng.gen();
            if u < psi.get(i, j).as_f64() {
                g.link(i, j);
            }
        }
    }
    g
}

/// Expected-degree extremes of `Ḡ`. Fields involving the non-stubborn
/// block are `None` when that block is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedDegreeStats<T> {
    /// δˢ: minimum expected degree over stubborn agents.
    pub min_stubborn_degree: T,
    /// Δˢ: maximum expected degree over stubborn agents.
    pub max_stubborn_degree: T,
    /// δʳˢ: minimum expected stubborn degree over non-stubborn agents.
    pub min_cross_degree: Option<T>,
    /// Δʳˢ: maximum expected stubborn degree over non-stubborn agents.
    pub max_cross_degree: Option<T>,
    /// Δʳ: maximum expected degree over non-stubborn agents.
    pub max_nonstubborn_degree: Option<T>,
    /// Δ = max(Δʳ, Δˢ).
    pub max_degree: T,
    /// The Δʳ definition read literally as a maximum over stubborn agents.
    /// Always equal to Δˢ; kept for diagnostics only.
    pub max_nonstubborn_degree_literal: T,
}

pub fn expected_degree_stats<T: Scalar>(
    psi: &ProbabilityMatrix<T>,
    part: &CommunityPartition,
) -> Result<ExpectedDegreeStats<T>, GraphError> {
    part.check(psi.n())?;
    if part.n_s() == 0 {
        return Err(GraphError::NoStubbornAgents);
    }
    let degrees = psi.expected_degrees();
    let cross = |i: usize| part.stubborn().map(|j| psi.get(i, j)).sum::<T>();

    let (min_s, max_s) = min_max(part.stubborn().map(|i| degrees[i])).expect("n_s >= 1");
    let cross_ext = min_max(part.non_stubborn().map(cross));
    let max_r = min_max(part.non_stubborn().map(|i| degrees[i])).map(|(_, hi)| hi);

    Ok(ExpectedDegreeStats {
        min_stubborn_degree: min_s,
        max_stubborn_degree: max_s,
        min_cross_degree: cross_ext.map(|(lo, _)| lo),
        max_cross_degree: cross_ext.map(|(_, hi)| hi),
        max_nonstubborn_degree: max_r,
        max_degree: max_r.map_or(max_s, |r| r.max(max_s)),
        max_nonstubborn_degree_literal: max_s,
    })
}

fn min_max<T: Scalar>(it: impl Iterator<Item = T>) -> Option<(T, T)> {
    it.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// Realized degree statistics of one graph under a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedDegreeStats {
    /// d_min^s: minimum degree over stubborn agents (0 if there are none).
    pub min_stubborn_degree: usize,
    /// d_min^{rs}: minimum number of stubborn neighbours over non-stubborn
    /// agents; `None` when every agent is stubborn.
    pub min_cross_degree: Option<usize>,
    /// d_i^s for every agent.
    pub stubborn_neighbors: Vec<usize>,
    /// d_i^r for every agent.
    pub nonstubborn_neighbors: Vec<usize>,
}

pub fn realized_degree_stats(
    g: &RealizedGraph,
    part: &CommunityPartition,
) -> Result<RealizedDegreeStats, GraphError> {
    part.check(g.n())?;
    let stubborn_neighbors: Vec<usize> = (0..g.n())
        .map(|i| g.neighbors(i).filter(|&j| part.is_stubborn(j)).count())
        .collect();
    let nonstubborn_neighbors: Vec<usize> = g
        .degrees()
        .iter()
        .zip(&stubborn_neighbors)
        .map(|(d, s)| d - s)
        .collect();
    let min_stubborn_degree = part.stubborn().map(|i| g.degrees()[i]).min().unwrap_or(0);
    let min_cross_degree = part.non_stubborn().map(|i| stubborn_neighbors[i]).min();
    Ok(RealizedDegreeStats {
        min_stubborn_degree,
        min_cross_degree,
        stubborn_neighbors,
        nonstubborn_neighbors,
    })
}

/// Outcome of checking the degree-growth and stubborn-reachability
/// assumptions on an expected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub log_n: T,
    /// δʳˢ ≥ c1 · log n; `None` when there are no non-stubborn agents.
    pub cross_degree_ok: Option<bool>,
    /// δˢ ≥ c2 · log n.
    pub stubborn_degree_ok: bool,
    /// Non-stubborn agents with no positive link probability to any
    /// stubborn agent.
    pub unreachable_agents: Vec<usize>,
}

impl<T> AssumptionReport<T> {
    pub fn degree_growth_holds(&self) -> bool {
        self.stubborn_degree_ok && self.cross_degree_ok.unwrap_or(true)
    }

    pub fn stubborn_reachability_holds(&self) -> bool {
        self.unreachable_agents.is_empty()
    }
}

pub fn check_assumptions<T: Scalar>(
    psi: &ProbabilityMatrix<T>,
    part: &CommunityPartition,
    c1: T,
    c2: T,
) -> Result<AssumptionReport<T>, GraphError> {
    for (name, c) in [("c1", c1), ("c2", c2)] {
        if !(c > T::lit(8.0)) {
            return Err(GraphError::ConstantTooSmall {
                name,
                value: c.as_f64(),
            });
        }
    }
    let stats = expected_degree_stats(psi, part)?;
    let log_n = T::from_count(psi.n()).ln();
    let unreachable_agents = part
        .non_stubborn()
        .filter(|&i| part.stubborn().all(|j| psi.get(i, j) <= T::zero()))
        .collect();
    Ok(AssumptionReport {
        log_n,
        cross_degree_ok: stats.min_cross_degree.map(|d| d >= c1 * log_n),
        stubborn_degree_ok: stats.min_stubborn_degree >= c2 * log_n,
        unreachable_agents,
    })
}
