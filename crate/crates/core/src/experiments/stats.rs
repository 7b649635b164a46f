//! Order statistics, rank correlation and log-log fitting.

use super::ExperimentError;

/// Summary of a nonempty sample of distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub median: f64,
    /// Nearest-rank 0.95-quantile: the `⌈0.95·N⌉`-th smallest value.
    pub q95: f64,
    pub min: f64,
    pub max: f64,
}

/// Median (midpoint for even counts), nearest-rank q95, min and max.
pub fn aggregate(samples: &[f64]) -> Result<Summary, ExperimentError> {
    if samples.is_empty() {
        return Err(ExperimentError::EmptySample);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(ExperimentError::NonFiniteSample);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    Ok(Summary {
        count: n,
        median,
        q95: s[nearest_rank(n, 0.95) - 1],
        min: s[0],
        max: s[n - 1],
    })
}

/// 1-based nearest rank `⌈p·n⌉`, at least 1.
fn nearest_rank(n: usize, p: f64) -> usize {
    // Exact integer form of ceil(p·n) for p = k/100 avoids 0.95·100 = 95.00000000000001.
    let k = (p * 100.0).round() as usize;
    (k * n).div_ceil(100).max(1)
}

/// Ranks starting at 1, ties receiving the average of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation. `None` when fewer than two points or when
/// either variable is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line through `(ln n, ln median)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit, ExperimentError> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(ExperimentError::TooFewPoints(xs.len()));
    }
    if let Some(&(n, m)) = points.iter().find(|&&(n, m)| !(n > 0.0 && m > 0.0)) {
        return Err(ExperimentError::NonPositiveFitPoint { n, median: m });
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
    })
}
