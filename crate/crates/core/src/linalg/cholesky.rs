use super::{DenseMatrix, LinalgError};
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: DenseMatrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric matrix. A pivot at or below `ε · max|m_ii|`
    /// means the matrix is singular or indefinite; the failing index is
    /// reported.
    pub fn factor(m: &DenseMatrix<T>) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        let sym_tol = T::lit(64.0) * T::epsilon() * m.max_abs();
        if !m.is_symmetric(sym_tol) {
            return Err(LinalgError::NotSymmetric);
        }
        let scale = m
            .diagonal()
            .into_iter()
            .fold(T::zero(), |a, d| a.max(d.abs()));
        let floor = T::epsilon() * scale;

        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let lj = l.row(j);
            let mut d = m[(j, j)] - lj[..j].iter().map(|&x| x * x).sum::<T>();
            if !(d > floor) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite {
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let s: T = {
                    let (ri, rj) = (l.row(i), l.row(j));
                    ri[..j].iter().zip(&rj[..j]).map(|(&a, &b)| a * b).sum()
                };
                l[(i, j)] = (m[(i, j)] - s) / d;
            }
        }
        Ok(Self { l })
    }

    pub fn factor_matrix(&self) -> &DenseMatrix<T> {
        &self.l
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        for i in 0..n {
            let row = self.l.row(i);
            let s: T = row[..i].iter().zip(&b[..i]).map(|(&a, &x)| a * x).sum();
            b[i] = (b[i] - s) / row[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(b.rows(), self.l.rows());
        let mut x = DenseMatrix::zeros(b.rows(), b.cols());
        let mut col = vec![T::zero(); b.rows()];
        for j in 0..b.cols() {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            self.solve_in_place(&mut col);
            x.set_column(j, &col);
        }
        x
    }
}

/// Solves `M X = B` for symmetric positive definite `M`.
pub fn solve_spd<T: Scalar>(
    m: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>, LinalgError> {
    if b.rows() != m.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: (m.rows(), b.cols()),
            found: (b.rows(), b.cols()),
        });
    }
    Ok(Cholesky::factor(m)?.solve(b))
}
