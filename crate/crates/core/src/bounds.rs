//! Closed-form concentration quantities: the deterministic `λ_min(M)` lower
//! bound, degree tail probabilities, the distance bounds `ε_n`, `ε′_n` and
//! `ε̄_n` with their failure probabilities, and generic Bernstein/Chernoff
//! tails.
//!
//! All logarithms are natural. Probability bounds at or above one are
//! returned as computed and flagged vacuous, never clamped.

use thiserror::Error;

use crate::graph::{ExpectedDegreeStats, SbmSpec};
use crate::scalar::Scalar;

/// Stubbornness accepted by the evaluators: `[1e-6, 1 − 1e-6]`.
pub const THETA_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("theta = {0} is outside [1e-6, 1 - 1e-6]")]
    InvalidTheta(f64),
    #[error("{name} = {value} must be positive")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("constant {name} = {value} must exceed 8")]
    ConstantTooSmall { name: &'static str, value: f64 },
    #[error("max stubborn expected degree {max_stubborn_degree} is below log n = {log_n}")]
    DegreeBelowLogN {
        max_stubborn_degree: f64,
        log_n: f64,
    },
    #[error("the bound needs both a stubborn and a non-stubborn community")]
    NeedsBothCommunities,
}

/// A probability upper bound that may exceed one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBound<T> {
    pub value: T,
    pub vacuous: bool,
}

impl<T: Scalar> ProbabilityBound<T> {
    pub fn new(value: T) -> Self {
        Self {
            value,
            vacuous: value >= T::one(),
        }
    }
}

fn check_theta<T: Scalar>(theta: T) -> Result<(), BoundsError> {
    let lo = T::lit(THETA_GUARD);
    let hi = T::one() - lo;
    if theta >= lo && theta <= hi {
        Ok(())
    } else {
        Err(BoundsError::InvalidTheta(theta.as_f64()))
    }
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<T, BoundsError> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(BoundsError::NonPositive {
            name,
            value: v.as_f64(),
        })
    }
}

fn constant<T: Scalar>(name: &'static str, c: T) -> Result<T, BoundsError> {
    if c > T::lit(8.0) {
        Ok(c)
    } else {
        Err(BoundsError::ConstantTooSmall {
            name,
            value: c.as_f64(),
        })
    }
}

/// `b₁ = θ d_s d_rs / (d_s + (1 − θ) d_rs)` from realized minimum degrees.
pub fn lemma3_b1<T: Scalar>(d_min_s: T, d_min_rs: T, theta: T) -> Result<T, BoundsError> {
    check_theta(theta)?;
    let ds = positive("d_min_s", d_min_s)?;
    let drs = positive("d_min_rs", d_min_rs)?;
    Ok(theta * ds * drs / (ds + (T::one() - theta) * drs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeTails<T> {
    /// Bound on `P(d_min^s ≤ δˢ/2)`.
    pub stubborn: ProbabilityBound<T>,
    /// Bound on `P(d_min^{rs} ≤ δʳˢ/2)`.
    pub cross: ProbabilityBound<T>,
}

/// `(n_s e^{−δˢ/8}, n_r e^{−δʳˢ/8})`.
pub fn lemma4_degree_tails<T: Scalar>(
    n_s: usize,
    n_r: usize,
    delta_s: T,
    delta_rs: T,
) -> Result<DegreeTails<T>, BoundsError> {
    for (name, v) in [("delta_s", delta_s), ("delta_rs", delta_rs)] {
        if !(v >= T::zero()) {
            return Err(BoundsError::OutOfRange {
                name,
                value: v.as_f64(),
            });
        }
    }
    let eight = T::lit(8.0);
    Ok(DegreeTails {
        stubborn: ProbabilityBound::new(T::from_count(n_s) * (-delta_s / eight).exp()),
        cross: ProbabilityBound::new(T::from_count(n_r) * (-delta_rs / eight).exp()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaMinBound<T> {
    /// `θ δˢ δʳˢ / 2 / (δˢ + (1 − θ) δʳˢ)`.
    pub threshold: T,
    /// `σ₁`: `P(λ_min(M) ≥ threshold) > 1 − σ₁`.
    pub sigma1: ProbabilityBound<T>,
}

pub fn lemma5_lambda_min_bound<T: Scalar>(
    stats: &ExpectedDegreeStats<T>,
    n_s: usize,
    n_r: usize,
    theta: T,
) -> Result<LambdaMinBound<T>, BoundsError> {
    check_theta(theta)?;
    let ds = positive("delta_s", stats.min_stubborn_degree)?;
    let drs = positive(
        "delta_rs",
        stats
            .min_cross_degree
            .ok_or(BoundsError::NeedsBothCommunities)?,
    )?;
    let two = T::lit(2.0);
    let threshold = theta * ds * drs / two / (ds + (T::one() - theta) * drs);
    let tails = lemma4_degree_tails(n_s, n_r, ds, drs)?;
    Ok(LambdaMinBound {
        threshold,
        sigma1: ProbabilityBound::new(tails.stubborn.value + tails.cross.value),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCommunityBound<T> {
    pub eps_n: T,
    pub eta_n: ProbabilityBound<T>,
    pub q: T,
}

/// `ε_n` and `η_n` for a graph with both stubborn and non-stubborn agents.
/// Requires `Δˢ ≥ log n`; no constants needed.
pub fn theorem1_distance_bound<T: Scalar>(
    stats: &ExpectedDegreeStats<T>,
    n_s: usize,
    n_r: usize,
    theta: T,
) -> Result<(T, ProbabilityBound<T>), BoundsError> {
    check_theta(theta)?;
    if n_s == 0 || n_r == 0 {
        return Err(BoundsError::NeedsBothCommunities);
    }
    let ds = positive("delta_s", stats.min_stubborn_degree)?;
    let drs = positive(
        "delta_rs",
        stats
            .min_cross_degree
            .ok_or(BoundsError::NeedsBothCommunities)?,
    )?;
    let big_ds = stats.max_stubborn_degree;
    let big_d = stats.max_degree;
    let n = T::from_count(n_s + n_r);
    let log_n = n.ln();
    if big_ds < log_n {
        return Err(BoundsError::DegreeBelowLogN {
            max_stubborn_degree: big_ds.as_f64(),
            log_n: log_n.as_f64(),
        });
    }
    let one = T::one();
    let lit = T::lit;
    let inv = one / drs + (one - theta) / ds;
    let eps = lit(6.0) / (one - theta) * inv * (big_ds * log_n).sqrt()
        + lit(4.0) * (lit(2.0) - theta) / (theta * (one - theta).powi(2))
            * inv
            * inv
            * (big_d * log_n).sqrt()
            * big_ds;
    let eta = T::from_count(n_s) * (-ds / lit(8.0)).exp()
        + T::from_count(n_r) * (-drs / lit(8.0)).exp()
        + lit(2.0) * T::from_count(n_s) * n.powf(lit(-1.5))
        + lit(2.0) * n.powf(lit(-0.2));
    Ok((eps, ProbabilityBound::new(eta)))
}

/// Decay exponent `min{min(c1, c2)/8 − 1, 1/5}`.
pub fn mixed_decay_exponent<T: Scalar>(c1: T, c2: T) -> Result<T, BoundsError> {
    let c = constant("c1", c1)?.min(constant("c2", c2)?);
    Ok((c / T::lit(8.0) - T::one()).min(T::lit(0.2)))
}

/// `(ε_n, η_n, q)`.
pub fn theorem1_bounds<T: Scalar>(
    stats: &ExpectedDegreeStats<T>,
    n_s: usize,
    n_r: usize,
    theta: T,
    c1: T,
    c2: T,
) -> Result<MixedCommunityBound<T>, BoundsError> {
    let q = mixed_decay_exponent(c1, c2)?;
    let (eps_n, eta_n) = theorem1_distance_bound(stats, n_s, n_r, theta)?;
    Ok(MixedCommunityBound { eps_n, eta_n, q })
}

/// `ε′_n = 6√(Δ log n)/δ + 4(2 − θ)√(Δ log n) Δ / (θ δ²)` for the
/// all-stubborn case. `n` may be any real ≥ 1.
pub fn theorem2_distance_bound<T: Scalar>(
    delta: T,
    max_degree: T,
    theta: T,
    n: T,
) -> Result<T, BoundsError> {
    check_theta(theta)?;
    let d = positive("delta", delta)?;
    let big_d = positive("Delta", max_degree)?;
    if !(n >= T::one()) {
        return Err(BoundsError::OutOfRange {
            name: "n",
            value: n.as_f64(),
        });
    }
    let root = (big_d * n.ln()).sqrt();
    let lit = T::lit;
    Ok(lit(6.0) * root / d + lit(4.0) * (lit(2.0) - theta) * root * big_d / (theta * d * d))
}

/// `(ε′_n, q)` with `q = min{c2/8 − 1, 1/5}`.
pub fn theorem2_bound<T: Scalar>(
    delta: T,
    max_degree: T,
    theta: T,
    n: T,
    c2: T,
) -> Result<(T, T), BoundsError> {
    let c2 = constant("c2", c2)?;
    let eps = theorem2_distance_bound(delta, max_degree, theta, n)?;
    Ok((eps, (c2 / T::lit(8.0) - T::one()).min(T::lit(0.2))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmDistanceBound<T> {
    pub eps_bar_n: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
}

/// Large-`n` bound `ε̄_n` for the two-community SBM; `n` may be real.
pub fn corollary1_bound<T: Scalar>(
    spec: &SbmSpec<T>,
    theta: T,
    n: T,
) -> Result<SbmDistanceBound<T>, BoundsError> {
    check_theta(theta)?;
    let one = T::one();
    if !(spec.r_s > T::zero() && spec.r_s < one) {
        return Err(BoundsError::NeedsBothCommunities);
    }
    for (name, p) in [("p_s", spec.p_s), ("p_r", spec.p_r), ("p_sr", spec.p_sr)] {
        if !(p > T::zero() && p < one) {
            return Err(BoundsError::OutOfRange {
                name,
                value: p.as_f64(),
            });
        }
    }
    if !(n > one) {
        return Err(BoundsError::OutOfRange {
            name: "n",
            value: n.as_f64(),
        });
    }
    let r = spec.r_s;
    let b1 = r * spec.p_sr;
    let b2 = r * spec.p_s + (one - r) * spec.p_sr;
    let b3 = r * spec.p_sr + (one - r) * spec.p_r;
    let lit = T::lit;
    let k = b2.sqrt() / b1 + (one - theta) / b2.sqrt();
    let rate = (n.ln() / n).sqrt();
    let eps_bar_n = lit(6.0) / (one - theta) * k * rate
        + lit(4.0) * (lit(2.0) - theta) / (theta * (one - theta).powi(2))
            * k
            * k
            * b2.max(b3).sqrt()
            * rate;
    Ok(SbmDistanceBound {
        eps_bar_n,
        b1,
        b2,
        b3,
    })
}

/// Matrix Bernstein tail `2 n exp(−(a²/2) / (σ² + U a / 3))`.
pub fn bernstein_tail<T: Scalar>(sigma_sq: T, u: T, dim_n: usize, a: T) -> Result<T, BoundsError> {
    for (name, v) in [("sigma_sq", sigma_sq), ("U", u)] {
        if !(v >= T::zero()) {
            return Err(BoundsError::OutOfRange {
                name,
                value: v.as_f64(),
            });
        }
    }
    let a = positive("a", a)?;
    let lit = T::lit;
    Ok(lit(2.0)
        * T::from_count(dim_n)
        * (-(a * a / lit(2.0)) / (sigma_sq + u * a / lit(3.0))).exp())
}

/// Lower Chernoff tail `e^{−μ δ²/2} ≥ P(X ≤ (1 − δ) μ)`.
pub fn chernoff_tail<T: Scalar>(mu: T, delta_frac: T) -> Result<T, BoundsError> {
    if !(mu >= T::zero()) {
        return Err(BoundsError::OutOfRange {
            name: "mu",
            value: mu.as_f64(),
        });
    }
    if !(delta_frac > T::zero() && delta_frac < T::one()) {
        return Err(BoundsError::OutOfRange {
            name: "delta_frac",
            value: delta_frac.as_f64(),
        });
    }
    Ok((-mu * delta_frac * delta_frac / T::lit(2.0)).exp())
}

/// Every theoretical quantity for one configuration. Entries that do not
/// apply (for instance `ε_n` when every agent is stubborn) are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub n: usize,
    pub theta: T,
    /// Lemma-3 bound from realized degrees, when a realization was given
    /// and its minimum degrees are positive.
    pub b1: Option<T>,
    pub lambda_min: Option<LambdaMinBound<T>>,
    pub eps_n: Option<T>,
    pub eta_n: Option<ProbabilityBound<T>>,
    pub eps_prime_n: Option<T>,
    pub eps_bar_n: Option<T>,
    pub q: Option<T>,
}

/// Inputs for [`bound_report`].
#[derive(Debug, Clone, Copy)]
pub struct ReportInputs<'a, T> {
    pub stats: &'a ExpectedDegreeStats<T>,
    pub n_s: usize,
    pub n_r: usize,
    pub theta: T,
    /// Realized `(d_min^s, d_min^{rs})`; `d_min^{rs}` is `None` when every
    /// agent is stubborn.
    pub realized: Option<(usize, Option<usize>)>,
    /// Assumption constants `(c1, c2)`; without them `q` is left empty.
    pub constants: Option<(T, T)>,
    pub sbm: Option<&'a SbmSpec<T>>,
}

/// Assembles a [`BoundReport`]. A violated `Δˢ ≥ log n` hypothesis is an
/// error; inapplicable quantities are simply omitted.
pub fn bound_report<T: Scalar>(inp: ReportInputs<'_, T>) -> Result<BoundReport<T>, BoundsError> {
    check_theta(inp.theta)?;
    let n = inp.n_s + inp.n_r;
    let mixed = inp.n_r > 0;

    let b1 = match inp.realized {
        Some((ds, Some(drs))) if ds > 0 && drs > 0 => {
            Some(lemma3_b1(T::from_count(ds), T::from_count(drs), inp.theta)?)
        }
        _ => None,
    };

    let mut report = BoundReport {
        n,
        theta: inp.theta,
        b1,
        lambda_min: None,
        eps_n: None,
        eta_n: None,
        eps_prime_n: None,
        eps_bar_n: None,
        q: None,
    };

    if mixed {
        report.lambda_min = Some(lemma5_lambda_min_bound(
            inp.stats, inp.n_s, inp.n_r, inp.theta,
        )?);
        let (eps, eta) = theorem1_distance_bound(inp.stats, inp.n_s, inp.n_r, inp.theta)?;
        report.eps_n = Some(eps);
        report.eta_n = Some(eta);
        if let Some((c1, c2)) = inp.constants {
            report.q = Some(mixed_decay_exponent(c1, c2)?);
        }
        if let Some(spec) = inp.sbm {
            report.eps_bar_n = Some(corollary1_bound(spec, inp.theta, T::from_count(n))?.eps_bar_n);
        }
    } else {
        let eps = theorem2_distance_bound(
            inp.stats.min_stubborn_degree,
            inp.stats.max_degree,
            inp.theta,
            T::from_count(n),
        )?;
        report.eps_prime_n = Some(eps);
        if let Some((_, c2)) = inp.constants {
            report.q = Some(
                theorem2_bound(
                    inp.stats.min_stubborn_degree,
                    inp.stats.max_degree,
                    inp.theta,
                    T::from_count(n),
                    c2,
                )?
                .1,
            );
        }
    }
    Ok(report)
}
