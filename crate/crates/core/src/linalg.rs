//! Dense and tridiagonal direct solvers used by the discretized resolvents
//! and the Newton fallback. Sizes stay in the low thousands, so simple
//! partial-pivoting LU is appropriate.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("singular matrix encountered during factorization")]
    Singular,
    #[error("dimension mismatch")]
    Dimension,
}

/// Solve a tridiagonal system in place (Thomas algorithm).
/// `lower`, `diag`, `upper` have lengths n-1, n, n-1.
pub fn solve_tridiagonal<S: Scalar>(
    lower: &[S],
    diag: &[S],
    upper: &[S],
    rhs: &[S],
) -> Result<Vec<S>, LinalgError> {
    let n = diag.len();
    if lower.len() != n - 1 || upper.len() != n - 1 || rhs.len() != n {
        return Err(LinalgError::Dimension);
    }
    let mut c = vec![S::zero(); n - 1];
    let mut d = rhs.to_vec();
    let mut denom = diag[0];
    if denom == S::zero() {
        return Err(LinalgError::Singular);
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = d[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == S::zero() || !denom.is_finite() {
            return Err(LinalgError::Singular);
        }
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (d[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = d[i + 1];
        d[i] = d[i] - c[i] * next;
    }
    Ok(d)
}

/// Dense LU factorization with partial pivoting, row-major storage.
pub struct DenseLu<S> {
    n: usize,
    lu: Vec<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> DenseLu<S> {
    pub fn factor(matrix: &[S], n: usize) -> Result<Self, LinalgError> {
        if matrix.len() != n * n {
            return Err(LinalgError::Dimension);
        }
        let mut lu = matrix.to_vec();
        let mut piv = vec![0usize; n];
        for col in 0..n {
            let mut p = col;
            let mut best = lu[col * n + col].abs();
            for r in col + 1..n {
                let v = lu[r * n + col].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == S::zero() || !best.is_finite() {
                return Err(LinalgError::Singular);
            }
            piv[col] = p;
            if p != col {
                for k in 0..n {
                    lu.swap(col * n + k, p * n + k);
                }
            }
            let pivot = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                if factor != S::zero() {
                    for k in col + 1..n {
                        let upd = lu[col * n + k] * factor;
                        lu[r * n + k] = lu[r * n + k] - upd;
                    }
                }
            }
        }
        Ok(Self { n, lu, piv })
    }

    pub fn solve(&self, rhs: &[S]) -> Result<Vec<S>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::Dimension);
        }
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in 0..n {
            x.swap(i, self.piv[i]);
            let xi = x[i];
            if i + 1 < n && xi != S::zero() {
                for r in i + 1..n {
                    let upd = self.lu[r * n + i] * xi;
                    x[r] = x[r] - upd;
                }
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc = acc - self.lu[i * n + k] * x[k];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }
}

/// y = A x for a dense row-major matrix.
pub fn matvec<S: Scalar>(matrix: &[S], n: usize, x: &[S], y: &mut [S]) {
    debug_assert_eq!(matrix.len(), n * n);
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(y.len(), n);
    for (i, yi) in y.iter_mut().enumerate() {
        let row = &matrix[i * n..(i + 1) * n];
        let mut acc = S::zero();
        for (a, b) in row.iter().zip(x) {
            acc += *a * *b;
        }
        *yi = acc;
    }
}
