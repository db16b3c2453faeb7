//! Physical parameters and the coupling constants derived from them.
//!
//! Everything is expressed in whatever rate unit the caller picks; the
//! scenarios default to `Gamma = 1`. The optional dipole/frequency inputs are
//! Gaussian (cgs) quantities.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_non_negative, require_positive, Error, Result};

/// Reduced Planck constant, erg s.
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// Speed of light, cm/s.
pub const C_CGS: f64 = 2.997_924_58e10;

/// Perturbative Faraday slice map is trusted while `chi^2 |alpha|^2` stays
/// below this.
pub const PERTURBATIVE_FARADAY_LIMIT: f64 = 1e-3;

/// Relative disagreement tolerated between the dipole route and the
/// `Gamma * sigma_eff / A` route to the measurement strength.
const DIPOLE_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub gamma_total: f64,
    pub dipole: Option<f64>,
    pub omega0: Option<f64>,
    pub k0: Option<f64>,
    pub sigma0: Option<f64>,
}

impl AtomParams {
    pub fn new(gamma_total: f64) -> Result<Self> {
        require_positive("gamma_total", gamma_total)?;
        Ok(Self {
            gamma_total,
            dipole: None,
            omega0: None,
            k0: None,
            sigma0: None,
        })
    }

    pub fn with_dipole(mut self, dipole: f64) -> Result<Self> {
        self.dipole = Some(require_non_negative("dipole", dipole)?);
        Ok(self)
    }

    pub fn with_omega0(mut self, omega0: f64) -> Result<Self> {
        self.omega0 = Some(require_positive("omega0", omega0)?);
        Ok(self)
    }

    pub fn with_k0(mut self, k0: f64) -> Result<Self> {
        self.k0 = Some(require_positive("k0", k0)?);
        Ok(self)
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> Result<Self> {
        self.sigma0 = Some(require_positive("sigma0", sigma0)?);
        Ok(self)
    }

    /// `k0`, or `omega0 / c` when only the frequency is known.
    pub fn wavenumber(&self) -> Option<f64> {
        self.k0.or(self.omega0.map(|w| w / C_CGS))
    }

    /// Effective cross-section for scattering into the paraxial modes,
    /// `3 pi / (2 k0^2)`.
    pub fn sigma_eff(&self) -> Option<f64> {
        self.wavenumber().map(|k| 3.0 * PI / (2.0 * k * k))
    }
}

/// Probe beam. `sigma_eff_over_area` and `chi` are direct dimensionless
/// inputs that bypass the geometric and atomic bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BeamParams {
    pub area: Option<f64>,
    pub power: Option<f64>,
    pub detuning: Option<f64>,
    pub alpha_sq_per_slice: Option<f64>,
    pub photon_flux: Option<f64>,
    pub sigma_eff_over_area: Option<f64>,
    pub chi: Option<f64>,
}

impl BeamParams {
    pub fn with_area(area: f64) -> Result<Self> {
        Ok(Self {
            area: Some(require_positive("area", area)?),
            ..Self::default()
        })
    }

    pub fn with_ratio(sigma_eff_over_area: f64) -> Result<Self> {
        Ok(Self {
            sigma_eff_over_area: Some(require_non_negative(
                "sigma_eff_over_area",
                sigma_eff_over_area,
            )?),
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.area {
            require_positive("area", a)?;
        }
        if let Some(p) = self.power {
            require_non_negative("power", p)?;
        }
        if let Some(d) = self.detuning {
            if !d.is_finite() {
                return Err(invalid("detuning", "must be finite"));
            }
        }
        if let Some(a) = self.alpha_sq_per_slice {
            require_non_negative("alpha_sq_per_slice", a)?;
        }
        if let Some(f) = self.photon_flux {
            require_non_negative("photon_flux", f)?;
        }
        if let Some(r) = self.sigma_eff_over_area {
            require_non_negative("sigma_eff_over_area", r)?;
        }
        if let Some(c) = self.chi {
            if !c.is_finite() {
                return Err(invalid("chi", "must be finite"));
            }
        }
        Ok(())
    }

    /// Photons per unit time. An explicit flux wins, then `P / (hbar w0)`,
    /// then `|alpha|^2 / dt` for the given slice length.
    pub fn photon_flux(&self, atom: &AtomParams, dt: f64) -> Option<f64> {
        self.photon_flux
            .or_else(|| match (self.power, atom.omega0) {
                (Some(p), Some(w)) => Some(p / (HBAR_CGS * w)),
                _ => None,
            })
            .or_else(|| self.alpha_sq_per_slice.map(|a| a / dt))
    }

    fn area_ratio(&self, atom: &AtomParams) -> Option<f64> {
        self.sigma_eff_over_area
            .or_else(|| Some(atom.sigma_eff()? / self.area?))
    }
}

/// Time slicing of the traveling field into modes of duration `dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseGraining {
    dt: f64,
    n_slices: usize,
    tau: f64,
}

impl CoarseGraining {
    pub fn new(dt: f64, n_slices: usize) -> Result<Self> {
        require_positive("dt", dt)?;
        if n_slices == 0 {
            return Err(invalid("n_slices", "must be >= 1"));
        }
        Ok(Self {
            dt,
            n_slices,
            tau: n_slices as f64 * dt,
        })
    }

    /// Slices a pulse of length `tau` into `n_slices` pieces. The stored
    /// `tau` is recomputed as `n_slices * dt`.
    pub fn from_pulse(tau: f64, n_slices: usize) -> Result<Self> {
        require_positive("tau", tau)?;
        if n_slices == 0 {
            return Err(invalid("n_slices", "must be >= 1"));
        }
        Self::new(tau / n_slices as f64, n_slices)
    }

    /// Same pulse, each slice split into `m` finer ones.
    pub fn refine(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "refinement factor must be >= 1"));
        }
        Self::new(self.dt / m as f64, self.n_slices * m)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Step function `Theta_i(t)`: 1 on `(i dt, (i + 1) dt]`, else 0.
    pub fn theta(&self, i: usize, t: f64) -> f64 {
        let lo = i as f64 * self.dt;
        if t > lo && t <= lo + self.dt {
            1.0
        } else {
            0.0
        }
    }

    /// Index of the slice interacting with the atom at time `t`, if any.
    pub fn active_slice(&self, t: f64) -> Option<usize> {
        if t <= 0.0 || t > self.tau {
            return None;
        }
        let i = (t / self.dt).ceil() as usize - 1;
        Some(i.min(self.n_slices - 1))
    }
}

/// Coupling constants derived from the inputs. Fields that could not be
/// derived from what was supplied are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    pub kappa_resonant: Option<f64>,
    pub g: Option<f64>,
    pub rabi: Option<f64>,
    pub sigma_eff: Option<f64>,
    pub chi: Option<f64>,
    pub kappa_faraday: Option<f64>,
    pub g_eff: Option<f64>,
    pub alpha_sq_per_slice: Option<f64>,
    pub kappa_from_dipole: Option<f64>,
    pub dt: f64,
    pub tau: f64,
}

impl DerivedCouplings {
    /// `(name, value, formula)` for every populated field.
    pub fn provenance(&self) -> Vec<(&'static str, f64, &'static str)> {
        let rows = [
            (
                "kappa",
                self.kappa_resonant,
                "kappa = gamma * sigma_eff / A",
            ),
            ("g", self.g, "g = sqrt(kappa / dt)"),
            (
                "rabi",
                self.rabi,
                "Omega = 2 g alpha, |alpha|^2 = flux * dt",
            ),
            ("sigma_eff", self.sigma_eff, "sigma_eff = 3 pi / (2 k0^2)"),
            ("chi", self.chi, "chi = (sigma0 / A) * gamma / (-2 delta)"),
            (
                "kappa_faraday",
                self.kappa_faraday,
                "kappa = flux * chi^2 = P chi^2 / (hbar w0)",
            ),
            ("g_eff", self.g_eff, "g_eff = sqrt(kappa / tau)"),
            (
                "alpha_sq_per_slice",
                self.alpha_sq_per_slice,
                "|alpha|^2 = flux * dt",
            ),
            (
                "kappa_from_dipole",
                self.kappa_from_dipole,
                "kappa = 2 pi d^2 k0 / (hbar A)",
            ),
            ("dt", Some(self.dt), "slice duration"),
            ("tau", Some(self.tau), "tau = N dt"),
        ];
        rows.into_iter()
            .filter_map(|(name, v, f)| v.map(|v| (name, v, f)))
            .collect()
    }
}

/// Resonant measurement strength and the couplings built on it.
///
/// `kappa = Gamma sigma_eff / A`, `g = sqrt(kappa/dt)`, `g_eff =
/// sqrt(kappa/tau)` and, when a photon flux is known, `Omega = 2 g alpha`.
pub fn derive_resonant(
    atom: &AtomParams,
    beam: &BeamParams,
    grid: &CoarseGraining,
) -> Result<DerivedCouplings> {
    require_positive("gamma_total", atom.gamma_total)?;
    beam.validate()?;
    let ratio = beam.area_ratio(atom).ok_or(Error::InsufficientParameters {
        quantity: "kappa",
        missing: "need sigma_eff_over_area, or k0 (or omega0) together with area",
    })?;
    let kappa = atom.gamma_total * ratio;
    let dt = grid.dt();
    let g_sq = kappa / dt;

    let kappa_from_dipole = match (atom.dipole, atom.wavenumber(), beam.area) {
        (Some(d), Some(k), Some(a)) => Some(2.0 * PI * d * d * k / (HBAR_CGS * a)),
        _ => None,
    };

    let flux = beam.photon_flux(atom, dt);
    let alpha_sq = flux.map(|f| f * dt);
    // 2 g alpha as a single square root so dt cancels to within one rounding
    let rabi = alpha_sq.map(|a2| 2.0 * (g_sq * a2).sqrt());

    Ok(DerivedCouplings {
        kappa_resonant: Some(kappa),
        g: Some(g_sq.sqrt()),
        rabi,
        sigma_eff: atom.sigma_eff(),
        g_eff: Some((kappa / grid.tau()).sqrt()),
        alpha_sq_per_slice: alpha_sq,
        kappa_from_dipole,
        dt,
        tau: grid.tau(),
        ..DerivedCouplings::default()
    })
}

/// Faraday rotation angle per photon and the QND measurement strength
/// `kappa = flux * chi^2`.
pub fn derive_faraday(
    atom: &AtomParams,
    beam: &BeamParams,
    grid: &CoarseGraining,
) -> Result<DerivedCouplings> {
    beam.validate()?;
    let chi = match beam.chi {
        Some(chi) => chi,
        None => {
            let delta = beam.detuning.ok_or(Error::InsufficientParameters {
                quantity: "chi",
                missing: "detuning",
            })?;
            if delta == 0.0 {
                return Err(invalid(
                    "detuning",
                    "chi is undefined on resonance (delta = 0)",
                ));
            }
            let (sigma0, area) = match (atom.sigma0, beam.area) {
                (Some(s), Some(a)) => (s, a),
                _ => {
                    return Err(Error::InsufficientParameters {
                        quantity: "chi",
                        missing: "sigma0 and area",
                    })
                }
            };
            (sigma0 / area) * (atom.gamma_total / (-2.0 * delta))
        }
    };
    let dt = grid.dt();
    let flux = beam
        .photon_flux(atom, dt)
        .ok_or(Error::InsufficientParameters {
            quantity: "kappa_faraday",
            missing: "photon flux (photon_flux, power with omega0, or alpha_sq_per_slice)",
        })?;

    Ok(DerivedCouplings {
        chi: Some(chi),
        kappa_faraday: Some(flux * chi * chi),
        alpha_sq_per_slice: Some(flux * dt),
        sigma_eff: atom.sigma_eff(),
        dt,
        tau: grid.tau(),
        ..DerivedCouplings::default()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RegimeWarning {
    /// `kappa > Gamma`, equivalently `A < sigma_eff`.
    ExceedsDiffractionBound {
        kappa_over_gamma: f64,
    },
    /// Fock pulse too weak for Rabi oscillation within the pulse.
    FockOscillationNotReached {
        margin: f64,
    },
    PerturbativeFaradayInvalid {
        chi_sq_alpha_sq: f64,
    },
    DipoleInconsistent {
        kappa_from_dipole: f64,
        kappa: f64,
    },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExceedsDiffractionBound { kappa_over_gamma } => write!(
                f,
                "kappa/gamma = {kappa_over_gamma} exceeds diffraction-limited bound \
                 (mode area below sigma_eff; paraxial treatment invalid)"
            ),
            Self::FockOscillationNotReached { margin } => write!(
                f,
                "n*gamma*tau / (A/sigma_eff) = {margin} < 1: no Rabi oscillation within the pulse"
            ),
            Self::PerturbativeFaradayInvalid { chi_sq_alpha_sq } => write!(
                f,
                "chi^2 |alpha|^2 = {chi_sq_alpha_sq} > {PERTURBATIVE_FARADAY_LIMIT}: \
                 use the exact slice map"
            ),
            Self::DipoleInconsistent {
                kappa_from_dipole,
                kappa,
            } => write!(
                f,
                "dipole-derived kappa {kappa_from_dipole} disagrees with gamma*sigma_eff/A = {kappa}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RegimeReport {
    pub kappa_over_gamma: Option<f64>,
    pub fock_margin: Option<f64>,
    pub chi_sq_alpha_sq: Option<f64>,
    pub warnings: Vec<RegimeWarning>,
}

impl RegimeReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Regime diagnostics; never fails. `photons` enables the Fock-pulse
/// oscillation figure `n Gamma tau` against `A / sigma_eff`.
pub fn validate_regime(
    couplings: &DerivedCouplings,
    atom: &AtomParams,
    photons: Option<u64>,
) -> RegimeReport {
    let mut report = RegimeReport::default();
    let gamma = atom.gamma_total;

    if let Some(kappa) = couplings.kappa_resonant {
        let ratio = kappa / gamma;
        report.kappa_over_gamma = Some(ratio);
        if ratio > 1.0 {
            report
                .warnings
                .push(RegimeWarning::ExceedsDiffractionBound {
                    kappa_over_gamma: ratio,
                });
        }
        if let Some(n) = photons {
            let margin = fock_margin(n, gamma * couplings.tau, 1.0 / ratio);
            report.fock_margin = Some(margin);
            if margin < 1.0 {
                report
                    .warnings
                    .push(RegimeWarning::FockOscillationNotReached { margin });
            }
        }
        if let Some(kd) = couplings.kappa_from_dipole {
            if ((kd - kappa) / kappa).abs() > DIPOLE_CONSISTENCY_TOL {
                report.warnings.push(RegimeWarning::DipoleInconsistent {
                    kappa_from_dipole: kd,
                    kappa,
                });
            }
        }
    }

    if let (Some(chi), Some(a2)) = (couplings.chi, couplings.alpha_sq_per_slice) {
        let x = chi * chi * a2;
        report.chi_sq_alpha_sq = Some(x);
        if x > PERTURBATIVE_FARADAY_LIMIT {
            report
                .warnings
                .push(RegimeWarning::PerturbativeFaradayInvalid { chi_sq_alpha_sq: x });
        }
    }
    report
}

/// `n Gamma tau / (A / sigma_eff)`; oscillations need this to reach 1.
pub fn fock_margin(n: u64, gamma_tau: f64, area_over_sigma_eff: f64) -> f64 {
    n as f64 * gamma_tau / area_over_sigma_eff
}
