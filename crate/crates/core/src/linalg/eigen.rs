use super::{DenseMatrix, LinalgError};
use crate::scalar::Scalar;

const MAX_BISECTION_STEPS: usize = 2_000;

/// Symmetric tridiagonal matrix obtained by orthogonal (Householder)
/// reduction; it has the same spectrum as the input.
#[derive(Clone, Debug)]
pub struct SymmetricTridiagonal<T> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Scalar> SymmetricTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Self {
        assert!(diag.is_empty() || off.len() + 1 == diag.len());
        Self { diag, off }
    }

    /// Householder reduction of a symmetric matrix, O(n³).
    pub fn reduce(m: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_symmetric(T::lit(64.0) * T::epsilon() * m.max_abs()) {
            return Err(LinalgError::NotSymmetric);
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut v = vec![T::zero(); n];
        let mut p = vec![T::zero(); n];

        for k in 0..n.saturating_sub(2) {
            let x_norm = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
            if x_norm == T::zero() {
                off.push(T::zero());
                continue;
            }
            let x0 = a[(k + 1, k)];
            let alpha = if x0 > T::zero() { -x_norm } else { x_norm };
            for i in k + 1..n {
                v[i] = a[(i, k)];
            }
            v[k + 1] -= alpha;
            let vtv: T = (k + 1..n).map(|i| v[i] * v[i]).sum();
            if vtv == T::zero() {
                off.push(x0);
                continue;
            }
            let beta = T::lit(2.0) / vtv;
            // p = β A₂₂ v
            for i in k + 1..n {
                let row = a.row(i);
                p[i] = beta * (k + 1..n).map(|j| row[j] * v[j]).sum::<T>();
            }
            let ptv: T = (k + 1..n).map(|i| p[i] * v[i]).sum();
            let half = beta * ptv / T::lit(2.0);
            // w = p − (β pᵀv / 2) v ; A₂₂ ← A₂₂ − v wᵀ − w vᵀ
            for i in k + 1..n {
                p[i] -= half * v[i];
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let upd = v[i] * p[j] + p[i] * v[j];
                    a[(i, j)] -= upd;
                }
            }
            off.push(alpha);
        }
        if n >= 2 {
            off.push(a[(n - 1, n - 2)]);
        }
        let diag = a.diagonal();
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(T::min_positive_value());
        let pivmin = T::epsilon() * T::epsilon() * scale;
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.diag.len() {
            q = if i == 0 {
                self.diag[0] - x
            } else {
                let e = self.off[i - 1];
                self.diag[i] - x - e * e / q
            };
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection until the
    /// bracket is below `rel_tol · ‖T‖_∞ / 3 ≤ rel_tol · ρ(T)`.
    pub fn eigenvalue(&self, k: usize, rel_tol: T) -> Result<T, LinalgError> {
        assert!(k < self.dim(), "eigenvalue index out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        if scale == T::zero() {
            return Ok(T::zero());
        }
        let width = (rel_tol * scale / T::lit(3.0)).max(T::lit(4.0) * T::epsilon() * scale);
        // Widen slightly so the enclosure is strict.
        lo -= T::epsilon() * scale;
        hi += T::epsilon() * scale;
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = lo + (hi - lo) / T::lit(2.0);
            if hi - lo <= width || mid == lo || mid == hi {
                return Ok(mid);
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(LinalgError::IterationCap {
            iterations: MAX_BISECTION_STEPS,
            last: hi.as_f64(),
            previous: lo.as_f64(),
        })
    }
}

/// Smallest eigenvalue of a symmetric matrix, accurate to
/// `rel_tol · ρ(M)`.
pub fn min_eigenvalue_symmetric<T: Scalar>(
    m: &DenseMatrix<T>,
    rel_tol: T,
) -> Result<T, LinalgError> {
    check_tol(rel_tol)?;
    if m.rows() == 0 {
        return Err(LinalgError::Empty);
    }
    SymmetricTridiagonal::reduce(m)?.eigenvalue(0, rel_tol)
}

/// Largest eigenvalue of a symmetric matrix, accurate to `rel_tol · ρ(M)`.
pub fn max_eigenvalue_symmetric<T: Scalar>(
    m: &DenseMatrix<T>,
    rel_tol: T,
) -> Result<T, LinalgError> {
    check_tol(rel_tol)?;
    if m.rows() == 0 {
        return Err(LinalgError::Empty);
    }
    let t = SymmetricTridiagonal::reduce(m)?;
    t.eigenvalue(t.dim() - 1, rel_tol)
}

pub(super) fn check_tol<T: Scalar>(rel_tol: T) -> Result<(), LinalgError> {
    if rel_tol > T::zero() && rel_tol.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::InvalidTolerance(rel_tol.as_f64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_minimum() {
        let m = DenseMatrix::<f64>::from_diagonal(&[4.0, 2.0, 7.0]);
        let l = min_eigenvalue_symmetric(&m, 1e-12).unwrap();
        assert!((l - 2.0).abs() < 1e-10);
        let h = max_eigenvalue_symmetric(&m, 1e-12).unwrap();
        assert!((h - 7.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DenseMatrix::from_rows(&[vec![2.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let l = min_eigenvalue_symmetric(&m, 1e-12).unwrap();
        let expected = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((l - expected).abs() < 1e-11, "{l} vs {expected}");
    }

    #[test]
    fn connected_laplacian_has_zero_minimum() {
        // Cycle on 6 vertices.
        let n = 6;
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0
            } else if (i + 1) % n == j || (j + 1) % n == i {
                -1.0
            } else {
                0.0
            }
        });
        let l: f64 = min_eigenvalue_symmetric(&m, 1e-10).unwrap();
        assert!(l.abs() < 1e-9, "{l}");
    }

    #[test]
    fn rejects_bad_tolerance() {
        let m = DenseMatrix::<f64>::identity(2);
        assert!(matches!(
            min_eigenvalue_symmetric(&m, 0.0),
            Err(LinalgError::InvalidTolerance(_))
        ));
    }
}
