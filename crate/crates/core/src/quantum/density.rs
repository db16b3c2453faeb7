use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.check_dense_cap()?;
        let rho = Self(matrix);
        rho.validate(HERMITIAN_TOL, TRACE_TOL, POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// Skips validation. Used for integrator samples, which are checked
    /// against their own (looser) drift bounds.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let defect = self.0.hermiticity_defect();
        if defect > herm_tol {
            return Err(Error::NotHermitian {
                what: "density matrix",
                deviation: defect,
            });
        }
        let tr = self.0.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::TraceNotUnity {
                trace: tr.re,
                tol: trace_tol,
            });
        }
        let min = self.min_eigenvalue();
        if min < -pos_tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Pure state from (not necessarily normalized) amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(crate::error::invalid(
                "amplitudes",
                "state vector has zero norm",
            ));
        }
        let psi: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        Self::new(ComplexMatrix::outer(&psi, &psi)?)
    }

    /// `|g><g|` in the `[g, e]` basis.
    pub fn ground() -> Self {
        Self(ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap())
    }

    /// `|e><e|`.
    pub fn excited() -> Self {
        Self(ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap())
    }

    /// `|+><+|` with `|+> = (|g> + |e>)/sqrt 2`.
    pub fn plus() -> Self {
        Self(ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap())
    }

    /// Qubit state from a Bloch vector with `|r| <= 1`, using
    /// `rho = (I + x sx + y sy + z sz) / 2` in the `[g, e]` basis.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !(r2.is_finite() && r2 <= 1.0 + 1e-12) {
            return Err(crate::error::invalid("bloch", format!("|r|^2 = {r2} > 1")));
        }
        let half = |v: f64| 0.5 * v;
        Self::new(ComplexMatrix::from_rows(&[
            &[C64::new(half(1.0 - z), 0.0), C64::new(half(x), half(y))],
            &[C64::new(half(x), -half(y)), C64::new(half(1.0 + z), 0.0)],
        ])?)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues()[0]
    }

    /// Excited-state population of a qubit.
    pub fn excited_population(&self) -> f64 {
        self.0.get(1, 1).re
    }

    /// `<g|rho|e>` of a qubit.
    pub fn coherence(&self) -> C64 {
        self.0.get(0, 1)
    }

    /// `<sigma_z> = rho_ee - rho_gg` of a qubit.
    pub fn sigma_z_expectation(&self) -> f64 {
        self.0.get(1, 1).re - self.0.get(0, 0).re
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        (self.0.as_dmatrix() * op.as_dmatrix()).trace()
    }

    /// `(1/2) || rho - sigma ||_1`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = &self.0 - &other.0;
        0.5 * diff
            .hermitian_eigenvalues()
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    }
}
