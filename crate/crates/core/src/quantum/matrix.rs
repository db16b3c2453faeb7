use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::MAX_DIM;
use crate::error::{Error, Result};

/// Square dense complex matrix with finite entries.
///
/// Operators on a two-level atom use the basis ordering `[|g>, |e>]`, so
/// `sigma_z = diag(-1, +1)` and `sigma_minus = |g><e|` has its single
/// nonzero entry at `(0, 1)`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Wraps an nalgebra matrix after checking it is square, non-empty and
    /// finite. No dimension cap is applied here; see [`Self::check_dense_cap`].
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be >= 1");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be >= 1");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        let n = entries.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                entries[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Self::from_fn(a.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn check_dense_cap(&self) -> Result<()> {
        if self.dim() > MAX_DIM {
            Err(Error::DimensionTooLarge(self.dim()))
        } else {
            Ok(())
        }
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(C64::new(x, 0.0))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = self.hermitian_part();
        let mut ev: Vec<f64> = if h.dim() == 2 {
            // closed form avoids an iterative solve on the hot 2x2 path
            let a = h.0[(0, 0)].re;
            let d = h.0[(1, 1)].re;
            let b = h.0[(0, 1)].norm();
            let mean = 0.5 * (a + d);
            let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            vec![mean - r, mean + r]
        } else {
            h.0.symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        }
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            write!(f, "  ")?;
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
                ComplexMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Standard two-level and bosonic operators.
pub mod ops {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// `|e><g|`
    pub fn sigma_plus() -> ComplexMatrix {
        let mut m = DMatrix::zeros(2, 2);
        m[(1, 0)] = c(1.0);
        ComplexMatrix(m)
    }

    /// `|g><e|`
    pub fn sigma_minus() -> ComplexMatrix {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        ComplexMatrix(m)
    }

    /// `|e><e| - |g><g|`
    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(-1.0),
            c(1.0),
        ])))
    }

    pub fn sigma_x() -> ComplexMatrix {
        &sigma_plus() + &sigma_minus()
    }

    /// `-i (sigma_plus - sigma_minus)`
    pub fn sigma_y() -> ComplexMatrix {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, -1.0);
        ComplexMatrix(m)
    }

    /// Truncated annihilation operator on Fock states `0..=n_max`.
    pub fn annihilation(n_max: usize) -> ComplexMatrix {
        let d = n_max + 1;
        let mut m = DMatrix::zeros(d, d);
        for n in 1..d {
            m[(n - 1, n)] = c((n as f64).sqrt());
        }
        ComplexMatrix(m)
    }
}
