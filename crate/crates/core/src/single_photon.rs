//! A square single-photon pulse meeting a ground-state atom.
//!
//! The state lives in the one-excitation sector: an excited-atom amplitude
//! plus one amplitude per coarse-grained field slice. Slice `k` interacts
//! with the atom during `(k dt, (k + 1) dt]` through an exact two-level
//! rotation by `sqrt(kappa dt)`; decay into non-beam modes at rate `gamma`
//! damps the atomic amplitude.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{invalid, require_non_negative, require_positive, Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct SinglePhotonState {
    a_e: C64,
    a_modes: Vec<C64>,
    /// `sum_{j >= k} |A_j|^2` of the untouched slices, indexed by `k`.
    pending: Vec<f64>,
    /// `sum_{j < k} |A_j|^2`, accumulated as slices pass.
    emitted: f64,
    k: usize,
    dt: f64,
    kappa: f64,
    gamma_np: f64,
    sin: f64,
    cos: f64,
    damping: f64,
}

impl SinglePhotonState {
    /// Field amplitudes given slice by slice, atom in the ground state.
    /// The sequence must be normalized to within 1e-12.
    pub fn from_envelope(amplitudes: Vec<C64>, dt: f64, kappa: f64, gamma_np: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("n_slices", "must be >= 1"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid("amplitudes", format!("envelope norm {norm} != 1")));
        }
        Self::with_amplitudes(C64::new(0.0, 0.0), amplitudes, dt, kappa, gamma_np)
    }

    /// Excited atom, field slices all in vacuum.
    pub fn excited_in_vacuum(n_slices: usize, dt: f64, kappa: f64, gamma_np: f64) -> Result<Self> {
        if n_slices == 0 {
            return Err(invalid("n_slices", "must be >= 1"));
        }
        Self::with_amplitudes(
            C64::new(1.0, 0.0),
            vec![C64::new(0.0, 0.0); n_slices],
            dt,
            kappa,
            gamma_np,
        )
    }

    fn with_amplitudes(
        a_e: C64,
        a_modes: Vec<C64>,
        dt: f64,
        kappa: f64,
        gamma_np: f64,
    ) -> Result<Self> {
        require_positive("dt", dt)?;
        require_non_negative("kappa", kappa)?;
        require_non_negative("gamma_np", gamma_np)?;
        let theta = (kappa * dt).sqrt();
        let mut pending = vec![0.0; a_modes.len() + 1];
        for j in (0..a_modes.len()).rev() {
            pending[j] = pending[j + 1] + a_modes[j].norm_sqr();
        }
        Ok(Self {
            a_e,
            a_modes,
            pending,
            emitted: 0.0,
            k: 0,
            dt,
            kappa,
            gamma_np,
            sin: theta.sin(),
            cos: theta.cos(),
            damping: (-0.5 * gamma_np * dt).exp(),
        })
    }

    pub fn a_e(&self) -> C64 {
        self.a_e
    }

    pub fn a_modes(&self) -> &[C64] {
        &self.a_modes
    }

    /// Number of slices that have already passed the atom.
    pub fn slice_index(&self) -> usize {
        self.k
    }

    pub fn n_slices(&self) -> usize {
        self.a_modes.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma_np(&self) -> f64 {
        self.gamma_np
    }

    /// Total decay rate `Gamma = gamma + kappa`.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_np + self.kappa
    }

    pub fn tau(&self) -> f64 {
        self.a_modes.len() as f64 * self.dt
    }

    pub fn time(&self) -> f64 {
        self.k as f64 * self.dt
    }

    pub fn excited_population(&self) -> f64 {
        self.a_e.norm_sqr()
    }

    /// `|A_e|^2 + sum |A_j|^2`
    pub fn norm(&self) -> f64 {
        self.a_e.norm_sqr() + self.emitted + self.pending[self.k]
    }

    /// Passes slice `k` by the atom.
    pub fn step(&mut self) -> Result<()> {
        let n = self.a_modes.len();
        if self.k >= n {
            return Err(Error::PulseEnded {
                slice: self.k,
                n_slices: n,
            });
        }
        let a_k = self.a_modes[self.k];
        let a_e = self.a_e;
        self.a_modes[self.k] = a_k * self.cos - I * a_e * self.sin;
        self.emitted += self.a_modes[self.k].norm_sqr();
        self.a_e = a_e * self.cos * self.damping - I * a_k * self.sin;
        self.k += 1;
        Ok(())
    }

    /// Free decay of the atomic amplitude at `Gamma / 2` after the pulse;
    /// field amplitudes stay as they are.
    pub fn post_pulse_decay(&mut self, duration: f64) -> Result<()> {
        require_non_negative("duration", duration)?;
        self.a_e *= (-0.5 * self.gamma_total() * duration).exp();
        Ok(())
    }
}

/// Flat square pulse, `A_j = 1/sqrt(N)`, atom in `|g>`.
pub fn init_square_pulse(
    n_slices: usize,
    dt: f64,
    kappa: f64,
    gamma_np: f64,
) -> Result<SinglePhotonState> {
    if n_slices == 0 {
        return Err(invalid("n_slices", "must be >= 1"));
    }
    let a = C64::new(1.0 / (n_slices as f64).sqrt(), 0.0);
    SinglePhotonState::with_amplitudes(C64::new(0.0, 0.0), vec![a; n_slices], dt, kappa, gamma_np)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecursionSample {
    pub t: f64,
    pub a_e: C64,
    pub p_e: f64,
    pub norm: f64,
}

fn sample(state: &SinglePhotonState, t: f64) -> RecursionSample {
    RecursionSample {
        t,
        a_e: state.a_e,
        p_e: state.excited_population(),
        norm: state.norm(),
    }
}

/// Runs a prepared state to `t_final`.
///
/// Slices are stepped on the grid `k dt` until the pulse has passed or
/// `t_final` is reached; after the pulse the amplitude decays freely and is
/// sampled on the continued grid `tau + m dt` plus `t_final` itself.
/// `sample_every` thins both phases; the end of the pulse is always sampled.
pub fn run_state(
    mut state: SinglePhotonState,
    t_final: f64,
    sample_every: usize,
) -> Result<Vec<RecursionSample>> {
    require_non_negative("t_final", t_final)?;
    if sample_every == 0 {
        return Err(invalid("sample_every", "must be >= 1"));
    }
    let dt = state.dt;
    let n = state.n_slices();
    let tau = state.tau();
    let last_slice = n.min(((t_final / dt) * (1.0 + 1e-12)).floor() as usize);

    let mut out = vec![sample(&state, 0.0)];
    while state.k < last_slice {
        state.step()?;
        if state.k.is_multiple_of(sample_every) || state.k == last_slice {
            out.push(sample(&state, state.time()));
        }
    }
    if last_slice < n || t_final <= tau {
        return Ok(out);
    }

    let at_tau = state.a_e;
    let rate = 0.5 * state.gamma_total();
    let mut m = 0usize;
    loop {
        m += sample_every;
        let t = tau + m as f64 * dt;
        let t = if t >= t_final * (1.0 - 1e-12) {
            t_final
        } else {
            t
        };
        state.a_e = at_tau * (-rate * (t - tau)).exp();
        out.push(sample(&state, t));
        if t == t_final {
            break;
        }
    }
    Ok(out)
}

/// Square pulse of `n_slices` slices run to `t_final`.
pub fn run_recursion(
    n_slices: usize,
    dt: f64,
    kappa: f64,
    gamma_np: f64,
    t_final: f64,
    sample_every: usize,
) -> Result<Vec<RecursionSample>> {
    run_state(
        init_square_pulse(n_slices, dt, kappa, gamma_np)?,
        t_final,
        sample_every,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClosedFormVariant {
    /// Decay into the beam modes only (`Gamma -> kappa`).
    NoSpont,
    /// Total decay `Gamma` including non-beam modes.
    Full,
}

/// Continuum excited amplitude during a square pulse of length `tau`:
/// `-(2i/Gamma) sqrt(kappa/tau) (1 - exp(-Gamma t / 2))`, with
/// `Gamma = kappa` for [`ClosedFormVariant::NoSpont`].
pub fn closed_form_a_e(
    t: f64,
    kappa: f64,
    gamma_total: f64,
    tau: f64,
    variant: ClosedFormVariant,
) -> Result<C64> {
    require_non_negative("t", t)?;
    require_non_negative("kappa", kappa)?;
    require_positive("tau", tau)?;
    if t > tau {
        return Err(Error::OutsidePulse { t, tau });
    }
    let rate = match variant {
        ClosedFormVariant::NoSpont => kappa,
        ClosedFormVariant::Full => {
            require_positive("gamma_total", gamma_total)?;
            if gamma_total < kappa {
                return Err(invalid("gamma_total", "total decay must be >= kappa"));
            }
            gamma_total
        }
    };
    if rate == 0.0 {
        // kappa = 0 under NoSpont: no coupling at all
        return Ok(C64::new(0.0, 0.0));
    }
    let rise = -(-0.5 * rate * t).exp_m1();
    Ok(-I * (2.0 / rate) * (kappa / tau).sqrt() * rise)
}

/// `4 kappa / (Gamma^2 tau) (1 - exp(-Gamma t / 2))^2`
pub fn closed_form_p_e(t: f64, kappa: f64, gamma_total: f64, tau: f64) -> Result<f64> {
    Ok(closed_form_a_e(t, kappa, gamma_total, tau, ClosedFormVariant::Full)?.norm_sqr())
}

/// Excitation probability of a single-mode cavity photon, `sin^2(g_eff t)`.
pub fn cavity_p_e(t: f64, kappa: f64, tau: f64) -> f64 {
    ((kappa / tau).sqrt() * t).sin().powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulseOptimum {
    pub tau: f64,
    pub p_e: f64,
}

/// Bisection tolerance on `x = Gamma tau / 2`.
const OPT_TOL: f64 = 1e-10;

/// Root in (0, inf) of `2 x e^{-x} = 1 - e^{-x}`, the stationarity
/// condition of `P_e(tau)` with `x = Gamma tau / 2`.
pub fn optimal_half_gamma_tau() -> f64 {
    let f = |x: f64| 2.0 * x * (-x).exp() + (-x).exp_m1();
    let (mut lo, mut hi) = (0.5_f64, 3.0_f64);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > OPT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Pulse length maximizing the end-of-pulse excitation, and that maximum.
pub fn optimize_pulse_length(kappa: f64, gamma_total: f64) -> Result<PulseOptimum> {
    require_positive("gamma_total", gamma_total)?;
    require_non_negative("kappa", kappa)?;
    let tau = 2.0 * optimal_half_gamma_tau() / gamma_total;
    let rise = -(-0.5 * gamma_total * tau).exp_m1();
    let p_e = 4.0 * kappa / (gamma_total * gamma_total * tau) * rise * rise;
    Ok(PulseOptimum { tau, p_e })
}
