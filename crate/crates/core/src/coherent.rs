//! Resonant coherent probe beam: classical Rabi drive plus decay at the
//! measurement strength, and a first-principles slice-by-slice oracle that
//! never makes the displacement or jump-operator step.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::quantum::{
    apply_channel, expm, ops, ComplexMatrix, DensityMatrix, LindbladGenerator, Trajectory, MAX_DIM,
};

/// Field-norm deficit of the truncated coherent state tolerated per slice.
pub const LEAKAGE_TOL: f64 = 1e-8;

/// `kappa * dt` above which the per-slice Markov expansion is suspect.
pub const MARKOV_WARN_KAPPA_DT: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivenAtomConfig {
    pub rabi: f64,
    pub kappa: f64,
    /// Decay into modes outside the beam, `Gamma - kappa`. Zero keeps only
    /// the paraxial environment.
    #[serde(default)]
    pub extra_decay: f64,
}

impl DrivenAtomConfig {
    pub fn new(rabi: f64, kappa: f64) -> Result<Self> {
        Self {
            rabi,
            kappa,
            extra_decay: 0.0,
        }
        .validated()
    }

    pub fn with_extra_decay(mut self, extra_decay: f64) -> Result<Self> {
        self.extra_decay = extra_decay;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        require_non_negative("rabi", self.rabi)?;
        require_non_negative("kappa", self.kappa)?;
        require_non_negative("extra_decay", self.extra_decay)?;
        Ok(self)
    }
}

/// `H = (Omega/2)(sigma_+ + sigma_-)` with jumps `sqrt(kappa) sigma_-` and,
/// if nonzero, `sqrt(extra_decay) sigma_-`.
pub fn build_driven_generator(cfg: &DrivenAtomConfig) -> Result<LindbladGenerator> {
    let cfg = cfg.validated()?;
    let h = ops::sigma_x().scale_real(0.5 * cfg.rabi);
    let mut jumps = vec![ops::sigma_minus().scale_real(cfg.kappa.sqrt())];
    if cfg.extra_decay > 0.0 {
        jumps.push(ops::sigma_minus().scale_real(cfg.extra_decay.sqrt()));
    }
    LindbladGenerator::new(h, jumps)
}

/// Excited population of the resonantly driven, damped atom at steady state:
/// `(Omega^2/4) / (Omega^2/2 + kappa^2/4)`.
pub fn steady_excited_population(rabi: f64, kappa: f64) -> f64 {
    let w2 = rabi * rabi;
    (w2 / 4.0) / (w2 / 2.0 + kappa * kappa / 4.0)
}

/// One coherent-state slice `|alpha>` passing the atom per `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceOracleConfig {
    /// Real slice amplitude; the common optical phase is fixed to zero.
    pub alpha: f64,
    /// Dimensionless per-slice coupling `g sqrt(dt) = sqrt(kappa dt)`.
    pub g_dt: f64,
    pub dt: f64,
    pub n_slices: usize,
    pub fock_cutoff: usize,
}

impl SliceOracleConfig {
    /// Config for a beam with Rabi frequency `rabi` and measurement strength
    /// `kappa`, sliced at `dt`. The slice amplitude is
    /// `alpha = Omega sqrt(dt) / (2 sqrt(kappa))` and the cutoff follows
    /// [`min_fock_cutoff`].
    pub fn for_drive(rabi: f64, kappa: f64, dt: f64, n_slices: usize) -> Result<Self> {
        require_non_negative("rabi", rabi)?;
        require_positive("kappa", kappa)?;
        require_positive("dt", dt)?;
        let alpha = rabi * dt.sqrt() / (2.0 * kappa.sqrt());
        Self {
            alpha,
            g_dt: (kappa * dt).sqrt(),
            dt,
            n_slices,
            fock_cutoff: min_fock_cutoff(alpha * alpha),
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !self.alpha.is_finite() {
            return Err(crate::error::invalid("alpha", "must be finite"));
        }
        require_non_negative("g_dt", self.g_dt)?;
        require_positive("dt", self.dt)?;
        if self.n_slices == 0 {
            return Err(crate::error::invalid("n_slices", "must be >= 1"));
        }
        let need = min_fock_cutoff(self.alpha * self.alpha);
        if self.fock_cutoff < need {
            return Err(crate::error::invalid(
                "fock_cutoff",
                format!(
                    "{} is below the 5-sigma rule minimum {need}",
                    self.fock_cutoff
                ),
            ));
        }
        if 2 * (self.fock_cutoff + 1) > MAX_DIM {
            return Err(Error::DimensionTooLarge(2 * (self.fock_cutoff + 1)));
        }
        Ok(self)
    }

    pub fn kappa(&self) -> f64 {
        self.g_dt * self.g_dt / self.dt
    }

    /// Rabi frequency the slices are equivalent to, `2 alpha g`.
    pub fn rabi(&self) -> f64 {
        2.0 * self.alpha * self.g_dt / self.dt
    }

    pub fn markov_warning(&self) -> Option<String> {
        let kdt = self.g_dt * self.g_dt;
        (kdt > MARKOV_WARN_KAPPA_DT).then(|| {
            format!("kappa*dt = {kdt} is not small; slice dynamics will deviate from the master equation")
        })
    }
}

/// `ceil(|alpha|^2 + 5 sqrt(|alpha|^2 + 1))`
pub fn min_fock_cutoff(alpha_sq: f64) -> usize {
    (alpha_sq + 5.0 * (alpha_sq + 1.0).sqrt()).ceil() as usize
}

/// Truncated coherent-state amplitudes on `0..=cutoff` and the norm deficit
/// `1 - sum |c_n|^2` before renormalization.
fn coherent_amplitudes(alpha: f64, cutoff: usize) -> (Vec<f64>, f64) {
    let mut amps = Vec::with_capacity(cutoff + 1);
    let mut c = (-0.5 * alpha * alpha).exp();
    amps.push(c);
    for n in 1..=cutoff {
        c *= alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let norm_sq: f64 = amps.iter().map(|a| a * a).sum();
    let deficit = (1.0 - norm_sq).max(0.0);
    let norm = norm_sq.sqrt();
    (amps.into_iter().map(|a| a / norm).collect(), deficit)
}

/// Atom-side Kraus operators `K_n = <n| U |alpha>` of one slice, where
/// `U = exp(-i g sqrt(dt) (a sigma_+ + a^dag sigma_-))` on atom ⊗ mode.
pub fn slice_kraus(cfg: &SliceOracleConfig) -> Result<Vec<ComplexMatrix>> {
    let cfg = cfg.validated()?;
    let (field, deficit) = coherent_amplitudes(cfg.alpha, cfg.fock_cutoff);
    if deficit > LEAKAGE_TOL {
        return Err(Error::TruncationLeakage { slice: 0, deficit });
    }
    let d = cfg.fock_cutoff + 1;
    let a = ops::annihilation(cfg.fock_cutoff);
    let coupling = ops::sigma_plus().kron(&a) + ops::sigma_minus().kron(&a.adjoint());
    let u = expm(&coupling, C64::new(0.0, -cfg.g_dt))?;

    (0..d)
        .map(|n| {
            ComplexMatrix::from_fn(2, |i, j| {
                (0..d)
                    .map(|m| u.get(i * d + n, j * d + m) * field[m])
                    .sum::<C64>()
            })
        })
        .collect()
}

/// Reduced atom trajectory from exact per-slice unitaries on atom ⊗ one
/// field mode, tracing the mode out after each slice. Samples every
/// `sample_every` slices and at the end.
pub fn simulate_slicewise_coherent(
    cfg: &SliceOracleConfig,
    rho0: &DensityMatrix,
    sample_every: usize,
) -> Result<Trajectory> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho0.dim(),
        });
    }
    if sample_every == 0 {
        return Err(crate::error::invalid("sample_every", "must be >= 1"));
    }
    let kraus = slice_kraus(cfg)?;
    let mut rho = rho0.clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
    };
    for k in 1..=cfg.n_slices {
        rho = apply_channel(&rho, &kraus)?;
        if k % sample_every == 0 || k == cfg.n_slices {
            traj.times.push(k as f64 * cfg.dt);
            traj.states.push(rho.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evolve_lindblad, steady_state};
    use std::f64::consts::PI;

    #[test]
    fn generator_shapes() {
        let g = build_driven_generator(&DrivenAtomConfig::new(1.0, 0.5).unwrap()).unwrap();
        assert_eq!(g.jumps().len(), 1);
        let cfg = DrivenAtomConfig::new(1.0, 0.5)
            .unwrap()
            .with_extra_decay(0.3)
            .unwrap();
        let g = build_driven_generator(&cfg).unwrap();
        assert_eq!(g.jumps().len(), 2);
        assert!(DrivenAtomConfig::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn unitary_rabi_pi_pulse() {
        let g = build_driven_generator(&DrivenAtomConfig::new(1.0, 0.0).unwrap()).unwrap();
        let traj = evolve_lindblad(&DensityMatrix::ground(), &g, PI, 1e-3, 100).unwrap();
        for (t, rho) in traj.times.iter().zip(&traj.states) {
            assert!((rho.excited_population() - (t / 2.0).sin().powi(2)).abs() < 1e-10);
        }
        assert!((traj.last().unwrap().1.excited_population() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn driven_steady_state() {
        let g = build_driven_generator(&DrivenAtomConfig::new(1.0, 1.0).unwrap()).unwrap();
        let rho = steady_state(&g).unwrap();
        assert!((rho.excited_population() - 1.0 / 3.0).abs() < 1e-8);
        assert!((steady_excited_population(1.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(min_fock_cutoff(0.0), 5);
        assert_eq!(min_fock_cutoff(0.05), 6);
        let (amps, deficit) = coherent_amplitudes(0.05f64.sqrt(), 6);
        assert!(deficit < 1e-12);
        assert!((amps.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_slice_vacuum_rotation() {
        let cfg = SliceOracleConfig {
            alpha: 0.0,
            g_dt: 0.1,
            dt: 0.01,
            n_slices: 1,
            fock_cutoff: 5,
        };
        let traj = simulate_slicewise_coherent(&cfg, &DensityMatrix::excited(), 1).unwrap();
        let pe = traj.last().unwrap().1.excited_population();
        assert!((pe - 0.1f64.cos().powi(2)).abs() < 1e-14, "{pe}");
        assert!((pe - 0.990033).abs() < 1e-6);
    }

    #[test]
    fn ground_state_in_vacuum_is_stationary() {
        let cfg = SliceOracleConfig {
            alpha: 0.0,
            g_dt: 0.05,
            dt: 0.0025,
            n_slices: 50,
            fock_cutoff: 5,
        };
        let traj = simulate_slicewise_coherent(&cfg, &DensityMatrix::ground(), 1).unwrap();
        for rho in &traj.states {
            assert!(rho.matrix().max_abs_diff(DensityMatrix::ground().matrix()) < 1e-15);
        }
    }

    #[test]
    fn rejects_undersized_cutoff_and_oversized_space() {
        let mut cfg = SliceOracleConfig::for_drive(1.0, 1.0, 1e-3, 10).unwrap();
        cfg.fock_cutoff = 3;
        assert!(cfg.validated().is_err());
        // |alpha|^2 = 1 needs a cutoff of 9, i.e. dimension 20
        let big = SliceOracleConfig {
            alpha: 1.0,
            g_dt: 0.01,
            dt: 1e-4,
            n_slices: 1,
            fock_cutoff: 9,
        };
        assert!(matches!(big.validated(), Err(Error::DimensionTooLarge(20))));
    }

    #[test]
    fn for_drive_round_trips_rates() {
        let cfg = SliceOracleConfig::for_drive(3.0, 0.5, 1e-3, 10).unwrap();
        assert!((cfg.kappa() - 0.5).abs() < 1e-15);
        assert!((cfg.rabi() - 3.0).abs() < 1e-14);
        assert!(cfg.markov_warning().is_none());
        let coarse = SliceOracleConfig::for_drive(3.0, 0.5, 0.1, 10).unwrap();
        assert!(coarse.markov_warning().is_some());
    }

    #[test]
    fn trace_held_after_every_slice() {
        let cfg = SliceOracleConfig::for_drive(2.0, 1.0, 1e-3, 500).unwrap();
        let traj = simulate_slicewise_coherent(&cfg, &DensityMatrix::excited(), 1).unwrap();
        for rho in &traj.states {
            assert!((rho.trace() - 1.0).abs() < 1e-10);
        }
    }
}
