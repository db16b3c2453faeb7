use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{ComplexMatrix, DensityMatrix};
use crate::error::{Error, Result};

pub const COMPLETENESS_TOL: f64 = 1e-10;

fn kraus_sum(kraus: &[ComplexMatrix], dim: usize) -> Result<DMatrix<C64>> {
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    for k in kraus {
        if k.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
        sum += k.as_dmatrix().adjoint() * k.as_dmatrix();
    }
    Ok(sum)
}

fn conjugate_sum(rho: &ComplexMatrix, kraus: &[ComplexMatrix]) -> DMatrix<C64> {
    let r = rho.as_dmatrix();
    let n = rho.dim();
    kraus.iter().fold(DMatrix::zeros(n, n), |acc, k| {
        acc + k.as_dmatrix() * r * k.as_dmatrix().adjoint()
    })
}

/// `sum_k K rho K^dag` for a complete Kraus set (`sum K^dag K = I`).
pub fn apply_channel(rho: &DensityMatrix, kraus: &[ComplexMatrix]) -> Result<DensityMatrix> {
    let n = rho.dim();
    let sum = kraus_sum(kraus, n)?;
    let deviation = (sum - DMatrix::<C64>::identity(n, n))
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()));
    if deviation > COMPLETENESS_TOL {
        return Err(Error::IncompleteKraus { deviation });
    }
    let out = conjugate_sum(rho.matrix(), kraus);
    let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    Ok(DensityMatrix::new_unchecked(ComplexMatrix::from_dmatrix(
        out,
    )?))
}

/// Trace-decreasing variant for non-Hermitian (norm-losing) evolution.
/// Requires `sum K^dag K <= I`; the result is not renormalized.
pub fn apply_trace_decreasing(
    rho: &DensityMatrix,
    kraus: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let n = rho.dim();
    let sum = ComplexMatrix::wrap(kraus_sum(kraus, n)?);
    let max_eigenvalue = *sum.hermitian_eigenvalues().last().expect("dim >= 1");
    if max_eigenvalue > 1.0 + COMPLETENESS_TOL {
        return Err(Error::TraceIncreasingKraus { max_eigenvalue });
    }
    ComplexMatrix::from_dmatrix(conjugate_sum(rho.matrix(), kraus))
}
