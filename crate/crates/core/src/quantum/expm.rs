//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which the unscaled degree-13 approximant meets
/// double-precision backward error.
const THETA13: f64 = 5.371920351148152;

/// `exp(scale * m)`.
pub fn expm(m: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    m.check_dense_cap()?;
    if !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let n = m.dim();
    let a = m.as_dmatrix() * scale;
    let norm = m.norm_one() * scale.norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-squarings), 0.0);

    let id = DMatrix::<C64>::identity(n, n);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| crate::error::invalid("m", "Padé denominator is singular"))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    ComplexMatrix::from_dmatrix(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ops::{sigma_x, sigma_z};
    use std::f64::consts::PI;

    /// Plain Taylor series summed until terms vanish, applied after enough
    /// halvings that the series converges fast. Independent oracle.
    fn taylor_oracle(m: &DMatrix<C64>) -> DMatrix<C64> {
        let n = m.nrows();
        let norm: f64 = m.iter().map(|z| z.norm()).sum();
        let halvings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let a = m * C64::new(2f64.powi(-halvings), 0.0);
        let mut sum = DMatrix::<C64>::identity(n, n);
        let mut term = DMatrix::<C64>::identity(n, n);
        for k in 1..60 {
            term = &term * &a * C64::new(1.0 / k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_gives_identity() {
        let z = ComplexMatrix::zeros(3);
        assert_eq!(
            expm(&z, C64::new(1.0, 0.0)).unwrap(),
            ComplexMatrix::identity(3)
        );
    }

    #[test]
    fn diagonal_phase() {
        let e = expm(&sigma_z(), C64::new(0.0, PI / 2.0)).unwrap();
        // basis [g, e]: sigma_z = diag(-1, 1)
        assert!((e.get(0, 0) - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((e.get(1, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(e.get(0, 1).norm() < 1e-15 && e.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let n = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let e = expm(&n, C64::new(1.0, 0.0)).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(e.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let theta = 0.7;
        let e = expm(&sigma_x(), C64::new(0.0, -theta)).unwrap();
        assert!((e.get(0, 0) - C64::new(theta.cos(), 0.0)).norm() < 1e-15);
        assert!((e.get(0, 1) - C64::new(0.0, -theta.sin())).norm() < 1e-15);
    }

    #[test]
    fn matches_taylor_oracle_on_large_norm() {
        let m = ComplexMatrix::from_fn(5, |i, j| {
            C64::new(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 * 0.5,
            )
        })
        .unwrap();
        let got = expm(&m, C64::new(1.3, 0.0)).unwrap();
        let want = taylor_oracle(&(m.as_dmatrix() * C64::new(1.3, 0.0)));
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = got
            .as_dmatrix()
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "err {err} scale {scale}");
    }

    #[test]
    fn rejects_oversized_and_non_finite() {
        let big = ComplexMatrix::zeros(17);
        assert!(matches!(
            expm(&big, C64::new(1.0, 0.0)),
            Err(Error::DimensionTooLarge(17))
        ));
        let m = ComplexMatrix::identity(2);
        assert!(expm(&m, C64::new(f64::INFINITY, 0.0)).is_err());
    }
}
