//! Large-n Fock pulse treated as one effective mode: Jaynes-Cummings
//! flopping inside the `{|g, n>, |e, n-1>}` manifold.
//!
//! No measurement strength is attached to a Fock pulse. The pulse is
//! entangled across slices, so a per-slice Markov treatment does not apply.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{invalid, require_non_negative, require_positive, Result};
use crate::params::fock_margin;

/// Default `Gamma tau` above which the single-mode picture is flagged.
pub const DEFAULT_MAX_GAMMA_TAU: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JcManifoldState {
    pub n: u64,
    /// Amplitude of `|g, n>`.
    pub c_g: C64,
    /// Amplitude of `|e, n-1>`.
    pub c_e: C64,
}

impl JcManifoldState {
    pub fn excited_population(&self) -> f64 {
        self.c_e.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_e.norm_sqr()
    }
}

/// `cos(g_eff sqrt(n) t) |g,n> - i sin(g_eff sqrt(n) t) |e,n-1>`
pub fn jc_evolve(n: u64, g_eff: f64, t: f64) -> Result<JcManifoldState> {
    if n == 0 {
        return Err(invalid("n", "the zero-photon manifold has no dynamics"));
    }
    require_non_negative("g_eff", g_eff)?;
    require_non_negative("t", t)?;
    let phase = g_eff * (n as f64).sqrt() * t;
    Ok(JcManifoldState {
        n,
        c_g: C64::new(phase.cos(), 0.0),
        c_e: C64::new(0.0, -phase.sin()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillationRegime {
    pub satisfied: bool,
    /// `n Gamma tau / (A / sigma_eff)`
    pub margin: f64,
}

/// Whether stimulated emission into the pulse outpaces spontaneous emission,
/// `n Gamma tau >~ A / sigma_eff`.
pub fn oscillation_regime_check(
    n: u64,
    gamma_total: f64,
    tau: f64,
    area_ratio: f64,
) -> Result<OscillationRegime> {
    require_positive("gamma_total", gamma_total)?;
    require_positive("tau", tau)?;
    require_positive("area_ratio", area_ratio)?;
    if n == 0 {
        return Err(invalid("n", "must be >= 1"));
    }
    let margin = fock_margin(n, gamma_total * tau, area_ratio);
    Ok(OscillationRegime {
        satisfied: margin >= 1.0,
        margin,
    })
}

/// The single-mode picture drops effects of order `Gamma tau`.
pub fn single_mode_valid(gamma_total: f64, tau: f64, max_gamma_tau: f64) -> bool {
    gamma_total * tau < max_gamma_tau
}
