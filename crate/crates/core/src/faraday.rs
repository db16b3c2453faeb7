//! Off-resonant Faraday probing: each slice rotates the probe polarization
//! by `chi` in a direction set by `sigma_z`, so the atom dephases in the
//! `sigma_z` basis while its populations are untouched (a QND measurement).
//!
//! The field is never represented here. Tracing out the two polarization
//! modes of the state `|alpha cos(chi s)>_x |-alpha sin(chi s)>_y`
//! (`s = ±1`) leaves the coherence multiplied by the overlap
//! `<beta|-beta> = exp(-2 |beta|^2)` with `beta = alpha sin(chi)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_non_negative, require_positive, Error, Result};
use crate::quantum::{ops, ComplexMatrix, DensityMatrix, LindbladGenerator, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaradayConfig {
    pub chi: f64,
    pub alpha_sq: f64,
    pub dt: f64,
    pub kappa: f64,
}

impl FaradayConfig {
    /// `kappa = |alpha|^2 sin^2(chi) / dt`: the continuum rate whose
    /// dephasing over `dt` equals one exact slice.
    pub fn new(chi: f64, alpha_sq: f64, dt: f64) -> Result<Self> {
        let s = chi.sin();
        Self {
            chi,
            alpha_sq,
            dt,
            kappa: alpha_sq * s * s / dt,
        }
        .validated()
    }

    /// `kappa = |alpha|^2 chi^2 / dt = P chi^2 / (hbar w0)`, the small-angle
    /// rate of the dephasing master equation.
    pub fn small_angle(chi: f64, alpha_sq: f64, dt: f64) -> Result<Self> {
        Self {
            chi,
            alpha_sq,
            dt,
            kappa: alpha_sq * chi * chi / dt,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !self.chi.is_finite() {
            return Err(invalid("chi", "must be finite"));
        }
        require_non_negative("alpha_sq", self.alpha_sq)?;
        require_positive("dt", self.dt)?;
        require_non_negative("kappa", self.kappa)?;
        let exact = self.alpha_sq * self.chi.sin().powi(2);
        let kdt = self.kappa * self.dt;
        if kdt > 0.0 {
            let rel = (kdt - exact).abs() / kdt;
            // small-angle bookkeeping: chi^2 vs sin^2 chi differ by ~chi^2/3
            if rel > self.chi * self.chi / 3.0 + 1e-12 {
                return Err(invalid(
                    "kappa",
                    format!("kappa*dt = {kdt} inconsistent with |alpha|^2 sin^2(chi) = {exact}"),
                ));
            }
        } else if exact > 0.0 {
            return Err(invalid("kappa", "zero kappa with nonzero rotation"));
        }
        Ok(self)
    }

    /// Coherence multiplier of one exact slice, `exp(-2 |alpha|^2 sin^2 chi)`.
    pub fn slice_coherence_factor(&self) -> f64 {
        (-2.0 * self.alpha_sq * self.chi.sin().powi(2)).exp()
    }
}

fn require_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() == 2 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        })
    }
}

/// One slice with the field traced out exactly.
pub fn exact_slice_map(rho: &DensityMatrix, cfg: &FaradayConfig) -> Result<DensityMatrix> {
    require_qubit(rho)?;
    let f = C64::new(cfg.slice_coherence_factor(), 0.0);
    let m = ComplexMatrix::from_rows(&[
        &[rho.get(0, 0), rho.get(0, 1) * f],
        &[rho.get(1, 0) * f, rho.get(1, 1)],
    ])?;
    Ok(DensityMatrix::new_unchecked(m))
}

/// Lowest-order expansion in `alpha`:
/// `rho + |alpha|^2 [-rho + S rho S + C rho C]` with `S = sin(chi sigma_z)`,
/// `C = cos(chi sigma_z)`.
pub fn perturbative_slice_map(rho: &DensityMatrix, cfg: &FaradayConfig) -> Result<DensityMatrix> {
    require_qubit(rho)?;
    let sz = ops::sigma_z();
    let s = sz.scale_real(cfg.chi.sin());
    let c = ComplexMatrix::identity(2).scale_real(cfg.chi.cos());
    let r = rho.matrix();
    let bracket = &(&(&s * r) * &s) + &(&(&c * r) * &c);
    let out = r + &(&bracket - r).scale_real(cfg.alpha_sq);
    Ok(DensityMatrix::new_unchecked(out))
}

/// `d rho/dt = -(kappa/2) [sigma_z, [sigma_z, rho]]`, written with the single
/// jump operator `sqrt(kappa) sigma_z`.
pub fn build_dephasing_generator(kappa: f64) -> Result<LindbladGenerator> {
    require_non_negative("kappa", kappa)?;
    LindbladGenerator::new(
        ComplexMatrix::zeros(2),
        vec![ops::sigma_z().scale_real(kappa.sqrt())],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceMap {
    Exact,
    Perturbative,
}

/// Applies `n_slices` successive slice maps, sampling every
/// `sample_every` slices and at the end.
pub fn compose_slices(
    rho0: &DensityMatrix,
    cfg: &FaradayConfig,
    map: SliceMap,
    n_slices: usize,
    sample_every: usize,
) -> Result<Trajectory> {
    require_qubit(rho0)?;
    if sample_every == 0 {
        return Err(invalid("sample_every", "must be >= 1"));
    }
    let mut rho = rho0.clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
    };
    for k in 1..=n_slices {
        rho = match map {
            SliceMap::Exact => exact_slice_map(&rho, cfg)?,
            SliceMap::Perturbative => perturbative_slice_map(&rho, cfg)?,
        };
        if k % sample_every == 0 || k == n_slices {
            traj.times.push(k as f64 * cfg.dt);
            traj.states.push(rho.clone());
        }
    }
    Ok(traj)
}

/// Least-squares `kappa` from `|rho_01(t)| = |rho_01(0)| exp(-2 kappa t)`.
pub fn fit_dephasing_rate(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(invalid("trajectory", "need at least two samples"));
    }
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, rho)| (*t, rho.coherence().norm().ln()))
        .collect();
    if pts.iter().any(|(_, y)| !y.is_finite()) {
        return Err(invalid("trajectory", "coherence vanished"));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    Ok(-0.5 * sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve_lindblad, expm, steady_state};

    fn cfg() -> FaradayConfig {
        FaradayConfig::new(0.3, 0.1, 0.01).unwrap()
    }

    #[test]
    fn exact_map_values() {
        let out = exact_slice_map(&DensityMatrix::plus(), &cfg()).unwrap();
        let want = 0.5 * (-2.0 * 0.1 * 0.3f64.sin().powi(2)).exp();
        assert!((out.coherence().re - want).abs() < 1e-16);
        assert!((out.coherence().re - 0.491344).abs() < 2e-6);
        assert_eq!(out.get(0, 0), DensityMatrix::plus().get(0, 0));

        let still = FaradayConfig::new(0.0, 0.1, 0.01).unwrap();
        let rho = DensityMatrix::from_bloch(0.3, 0.4, 0.1).unwrap();
        assert_eq!(exact_slice_map(&rho, &still).unwrap(), rho);
        let up = DensityMatrix::excited();
        assert_eq!(exact_slice_map(&up, &cfg()).unwrap(), up);
    }

    #[test]
    fn perturbative_map_values() {
        let out = perturbative_slice_map(&DensityMatrix::plus(), &cfg()).unwrap();
        let want = 0.5 * (1.0 - 2.0 * 0.1 * 0.3f64.sin().powi(2));
        assert!((out.coherence().re - want).abs() < 1e-16);
        assert!((out.coherence().re - 0.491267).abs() < 1e-6);
        assert!((out.trace() - 1.0).abs() < 1e-15);

        let still = FaradayConfig::new(0.0, 0.1, 0.01).unwrap();
        let rho = DensityMatrix::from_bloch(0.3, 0.4, 0.1).unwrap();
        assert!(
            perturbative_slice_map(&rho, &still)
                .unwrap()
                .matrix()
                .max_abs_diff(rho.matrix())
                < 1e-16
        );
        let diag = DensityMatrix::from_bloch(0.0, 0.0, 0.4).unwrap();
        assert!(
            perturbative_slice_map(&diag, &cfg())
                .unwrap()
                .matrix()
                .max_abs_diff(diag.matrix())
                < 1e-16
        );
    }

    #[test]
    fn dephasing_generator() {
        let g = build_dephasing_generator(1.0).unwrap();
        let rho0 = DensityMatrix::from_bloch(1.0, 0.0, 0.0).unwrap();
        let traj = evolve_lindblad(&rho0, &g, 0.5, 1e-3, 50).unwrap();
        let end = traj.last().unwrap().1;
        assert!((end.coherence().re - 0.5 * (-1.0f64).exp()).abs() < 1e-8);
        let tilted = DensityMatrix::from_bloch(0.5, 0.2, 0.6).unwrap();
        let traj = evolve_lindblad(&tilted, &g, 2.0, 1e-3, 100).unwrap();
        for rho in &traj.states {
            assert!((rho.sigma_z_expectation() - 0.6).abs() < 1e-14);
        }
        assert!(matches!(
            steady_state(&g),
            Err(Error::NonUniqueSteadyState { .. })
        ));
    }

    #[test]
    fn double_commutator_form_matches_jump_form() {
        let kappa = 0.7;
        let g = build_dephasing_generator(kappa).unwrap();
        let rho = DensityMatrix::from_bloch(0.2, -0.5, 0.3).unwrap();
        let sz = ops::sigma_z();
        let inner = sz.commutator(rho.matrix());
        let want = sz.commutator(&inner).scale_real(-kappa / 2.0);
        assert!(g.apply(rho.matrix()).unwrap().max_abs_diff(&want) < 1e-16);
    }

    #[test]
    fn config_consistency() {
        assert!(FaradayConfig::small_angle(0.3, 0.1, 0.01).is_ok());
        let bad = FaradayConfig {
            chi: 0.3,
            alpha_sq: 0.1,
            dt: 0.01,
            kappa: 2.0,
        };
        assert!(bad.validated().is_err());
        assert!(FaradayConfig::new(0.1, -1.0, 0.01).is_err());
        assert!(FaradayConfig::new(0.1, 1.0, 0.0).is_err());
    }

    /// Builds the polarization-rotation unitary on a truncated two-mode Fock
    /// space and traces the field out numerically.
    #[test]
    fn two_mode_fock_route_agrees() {
        let n_max = 3;
        let d = n_max + 1;
        let a = ops::annihilation(n_max);
        let id = ComplexMatrix::identity(d);
        let ax = a.kron(&id);
        let ay = id.kron(&a);
        // N+ - N- in the linear-polarization basis
        let j = (&ax.adjoint() * &ay - &ay.adjoint() * &ax).scale(C64::new(0.0, 1.0));

        let cfg = FaradayConfig::new(0.4, 0.01, 1.0).unwrap();
        let alpha = cfg.alpha_sq.sqrt();
        let mut coh = vec![C64::new(0.0, 0.0); d];
        let mut c = (-0.5 * cfg.alpha_sq).exp();
        for (n, slot) in coh.iter_mut().enumerate() {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            *slot = C64::new(c, 0.0);
        }
        let norm: f64 = coh.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi0: Vec<C64> = (0..d * d)
            .map(|k| {
                if k % d == 0 {
                    coh[k / d] / norm
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();

        // sigma_z = -1 for |g>, +1 for |e>
        let out: Vec<Vec<C64>> = [-1.0, 1.0]
            .iter()
            .map(|s| {
                let u = expm(&j, C64::new(0.0, -cfg.chi * s)).unwrap();
                (0..d * d)
                    .map(|r| (0..d * d).map(|k| u.get(r, k) * psi0[k]).sum())
                    .collect()
            })
            .collect();
        let overlap: C64 = (0..d * d).map(|k| out[0][k] * out[1][k].conj()).sum();

        let rho = DensityMatrix::plus();
        let exact = exact_slice_map(&rho, &cfg).unwrap();
        let fock = rho.coherence() * overlap;
        assert!(
            (exact.coherence() - fock).norm() < 1e-8,
            "{:?} vs {:?}",
            exact.coherence(),
            fock
        );
    }
}
