use serde_json::{json, Map, Value};
use thiserror::Error;

use super::config::{ScenarioConfig, ScenarioKind};
use super::timeseries::TimeSeries;
use crate::coherent::{
    build_driven_generator, simulate_slicewise_coherent, steady_excited_population,
    DrivenAtomConfig, SliceOracleConfig,
};
use crate::error::{invalid, Error, Result};
use crate::faraday::{build_dephasing_generator, compose_slices, FaradayConfig, SliceMap};
use crate::fock::{jc_evolve, oscillation_regime_check, single_mode_valid};
use crate::params::{
    derive_resonant, validate_regime, AtomParams, BeamParams, CoarseGraining, DerivedCouplings,
    RegimeReport,
};
use crate::quantum::{evolve_lindblad, steady_state, DensityMatrix, Trajectory};
use crate::single_photon::{cavity_p_e, closed_form_p_e, optimize_pulse_length, run_recursion};

/// A module error tagged with the scenario that raised it.
#[derive(Debug, Error)]
#[error("scenario `{name}` ({kind}): {source}")]
pub struct ScenarioError {
    pub name: String,
    pub kind: ScenarioKind,
    #[source]
    pub source: Error,
}

/// Runs one scenario. Pure: the same config always gives the same series.
pub fn run_scenario(cfg: &ScenarioConfig) -> std::result::Result<TimeSeries, ScenarioError> {
    let result = match cfg.kind {
        ScenarioKind::CoherentDrive => coherent_drive(cfg),
        ScenarioKind::SinglePhoton => single_photon(cfg),
        ScenarioKind::FockPulse => fock_pulse(cfg),
        ScenarioKind::Faraday => faraday(cfg),
        ScenarioKind::OracleCompare => oracle_compare(cfg),
    };
    result.map_err(|source| ScenarioError {
        name: cfg.name.clone(),
        kind: cfg.kind,
        source,
    })
}

/// Collects `derived` and `diagnostics` entries and attaches them, together
/// with the resolved config, to a series.
struct Meta {
    derived: Map<String, Value>,
    diagnostics: Map<String, Value>,
    warnings: Vec<String>,
}

impl Meta {
    fn new() -> Self {
        Self {
            derived: Map::new(),
            diagnostics: Map::new(),
            warnings: Vec::new(),
        }
    }

    fn derived(&mut self, name: &str, value: f64, formula: &str) {
        self.derived
            .insert(name.into(), json!({ "value": value, "formula": formula }));
    }

    fn couplings(&mut self, d: &DerivedCouplings, keep: &[&str]) {
        for (name, value, formula) in d.provenance() {
            if keep.contains(&name) {
                self.derived(name, value, formula);
            }
        }
    }

    fn diag(&mut self, name: &str, value: impl Into<Value>) {
        self.diagnostics.insert(name.into(), value.into());
    }

    fn regime(&mut self, report: &RegimeReport) {
        self.warnings
            .extend(report.warnings.iter().map(|w| w.to_string()));
        self.diag("regime", serde_json::to_value(report).expect("plain data"));
    }

    fn attach(self, cfg: &ScenarioConfig, ts: &mut TimeSeries) {
        let mut params: Map<String, Value> = cfg
            .params
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        if let Some(init) = cfg.initial {
            params.insert("initial".into(), json!(init.name()));
        }
        let m = ts.metadata_mut();
        m.insert("name".into(), json!(cfg.name));
        m.insert("scenario".into(), json!(cfg.kind.name()));
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("params".into(), Value::Object(params));
        m.insert("derived".into(), Value::Object(self.derived));
        m.insert("diagnostics".into(), Value::Object(self.diagnostics));
        m.insert("warnings".into(), json!(self.warnings));
    }
}

fn density_columns(traj: &Trajectory) -> Result<TimeSeries> {
    let col = |f: &dyn Fn(&DensityMatrix) -> f64| traj.states.iter().map(f).collect::<Vec<_>>();
    TimeSeries::new(traj.times.clone())?
        .with_column("P_e", col(&|r| r.excited_population()))?
        .with_column("re_rho01", col(&|r| r.coherence().re))?
        .with_column("im_rho01", col(&|r| r.coherence().im))?
        .with_column("sigma_z", col(&|r| r.sigma_z_expectation()))?
        .with_column("trace", col(&|r| r.trace()))
}

fn resonant_kappa(cfg: &ScenarioConfig, meta: &mut Meta) -> (f64, f64) {
    let gamma = cfg.param("gamma");
    let kappa = gamma * cfg.param("kappa_over_gamma");
    meta.derived("kappa", kappa, "kappa = gamma * sigma_eff / A");
    (gamma, kappa)
}

fn coherent_drive(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let mut meta = Meta::new();
    let (_, kappa) = resonant_kappa(cfg, &mut meta);
    let rabi = cfg.param("rabi");
    let extra = cfg.param("extra_decay");
    let drive = DrivenAtomConfig::new(rabi, kappa)?.with_extra_decay(extra)?;
    let generator = build_driven_generator(&drive)?;
    let rho0 = cfg.initial.expect("defaulted").density();
    let traj = evolve_lindblad(
        &rho0,
        &generator,
        cfg.param("t_final"),
        cfg.param("step"),
        cfg.count("sample_every"),
    )?;
    let mut ts = density_columns(&traj)?;

    let decay = kappa + extra;
    if decay > 0.0 {
        let analytic = steady_excited_population(rabi, decay);
        meta.derived(
            "rho_ee_steady",
            analytic,
            "rho_ee = (Omega^2/4) / (Omega^2/2 + kappa^2/4)",
        );
        let numeric = steady_state(&generator)?.excited_population();
        meta.diag("rho_ee_steady_numeric", numeric);
    }
    meta.diag(
        "final_p_e",
        *ts.column("P_e").and_then(|c| c.last()).expect("non-empty"),
    );
    meta.attach(cfg, &mut ts);
    Ok(ts)
}

fn single_photon(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let mut meta = Meta::new();
    let gamma = cfg.param("gamma");
    let atom = AtomParams::new(gamma)?;
    let beam = BeamParams::with_ratio(cfg.param("kappa_over_gamma"))?;
    let grid = CoarseGraining::from_pulse(cfg.param("gamma_tau") / gamma, cfg.count("n_slices"))?;
    let d = derive_resonant(&atom, &beam, &grid)?;
    meta.couplings(&d, &["kappa", "g", "g_eff", "dt", "tau"]);
    let kappa = d.kappa_resonant.expect("ratio given");
    let gamma_np = (gamma - kappa).max(0.0);
    meta.derived("gamma_np", gamma_np, "gamma_np = gamma - kappa");
    let tau = grid.tau();

    let samples = run_recursion(
        grid.n_slices(),
        grid.dt(),
        kappa,
        gamma_np,
        cfg.param("t_final"),
        cfg.count("sample_every"),
    )?;
    let at_tau = closed_form_p_e(tau, kappa, gamma, tau)?;
    let closed = samples
        .iter()
        .map(|s| {
            if s.t <= tau {
                closed_form_p_e(s.t, kappa, gamma, tau)
            } else {
                Ok(at_tau * (-gamma * (s.t - tau)).exp())
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let col = |f: fn(&crate::single_photon::RecursionSample) -> f64| {
        samples.iter().map(f).collect::<Vec<_>>()
    };
    let mut ts = TimeSeries::new(col(|s| s.t))?
        .with_column("P_e", col(|s| s.p_e))?
        .with_column("re_A_e", col(|s| s.a_e.re))?
        .with_column("im_A_e", col(|s| s.a_e.im))?
        .with_column("norm", col(|s| s.norm))?
        .with_column("P_e_closed_form", closed)?
        // single-mode cavity comparison, sin^2(g_eff t)
        .with_column(
            "P_e_cavity",
            col(|s| s.t)
                .into_iter()
                .map(|t| cavity_p_e(t, kappa, tau))
                .collect(),
        )?;

    if let Some(s) = samples.iter().find(|s| s.t == tau) {
        meta.diag("p_e_at_tau", s.p_e);
        meta.diag("p_e_at_tau_closed_form", at_tau);
        meta.diag("relative_error_at_tau", ((s.p_e - at_tau) / at_tau).abs());
    }
    let opt = optimize_pulse_length(kappa, gamma)?;
    meta.diag("optimal_gamma_tau", gamma * opt.tau);
    meta.diag("optimal_p_e", opt.p_e);
    meta.regime(&validate_regime(&d, &atom, None));
    meta.attach(cfg, &mut ts);
    Ok(ts)
}

fn fock_pulse(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let mut meta = Meta::new();
    let gamma = cfg.param("gamma");
    let ratio = cfg.param("kappa_over_gamma");
    let n = cfg.count("photons") as u64;
    let atom = AtomParams::new(gamma)?;
    let grid = CoarseGraining::from_pulse(cfg.param("gamma_tau") / gamma, 1)?;
    let d = derive_resonant(&atom, &BeamParams::with_ratio(ratio)?, &grid)?;
    meta.couplings(&d, &["kappa", "g_eff", "tau"]);
    let g_eff = d.g_eff.expect("always derived");
    let tau = grid.tau();

    let t_final = cfg.param("t_final");
    let samples = cfg.count("samples");
    let times: Vec<f64> = if t_final == 0.0 {
        vec![0.0]
    } else {
        (0..=samples)
            .map(|i| t_final * i as f64 / samples as f64)
            .collect()
    };
    let states = times
        .iter()
        .map(|&t| jc_evolve(n, g_eff, t))
        .collect::<Result<Vec<_>>>()?;
    let col =
        |f: &dyn Fn(&crate::fock::JcManifoldState) -> f64| states.iter().map(f).collect::<Vec<_>>();
    let mut ts = TimeSeries::new(times.clone())?
        .with_column("P_e", col(&|s| s.excited_population()))?
        .with_column("re_c_g", col(&|s| s.c_g.re))?
        .with_column("im_c_e", col(&|s| s.c_e.im))?
        .with_column("norm", col(&|s| s.norm()))?;

    meta.derived(
        "rabi_n",
        2.0 * g_eff * (n as f64).sqrt(),
        "Omega_n = 2 g_eff sqrt(n)",
    );
    let regime = oscillation_regime_check(n, gamma, tau, 1.0 / ratio)?;
    meta.diag("oscillation_margin", regime.margin);
    meta.diag("oscillation_regime", regime.satisfied);
    let valid = single_mode_valid(gamma, tau, cfg.param("max_gamma_tau"));
    meta.diag("single_mode_valid", valid);
    if !valid {
        meta.warnings.push(format!(
            "gamma*tau = {} >= {}: single-mode picture drops spontaneous emission at this order",
            gamma * tau,
            cfg.param("max_gamma_tau")
        ));
    }
    meta.regime(&validate_regime(&d, &atom, Some(n)));
    meta.attach(cfg, &mut ts);
    Ok(ts)
}

fn faraday(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let mut meta = Meta::new();
    let kappa = cfg.param("kappa");
    meta.derived("kappa", kappa, "kappa = P chi^2 / (hbar w0)");
    let generator = build_dephasing_generator(kappa)?;
    let rho0 = cfg.initial.expect("defaulted").density();
    let every = cfg.count("sample_every");

    let slices = match (cfg.get("chi"), cfg.get("alpha_sq"), cfg.get("dt")) {
        (Some(chi), Some(a2), Some(dt)) => Some((FaradayConfig::new(chi, a2, dt)?, dt)),
        _ => None,
    };

    let (traj, exact, pert) = match slices {
        None => {
            let traj = evolve_lindblad(
                &rho0,
                &generator,
                cfg.param("t_final"),
                cfg.param("step"),
                every,
            )?;
            (traj, None, None)
        }
        Some((fc, dt)) => {
            meta.derived("dt", dt, "dt = |alpha|^2 sin^2(chi) / kappa");
            meta.derived(
                "slice_coherence_factor",
                fc.slice_coherence_factor(),
                "exp(-2 |alpha|^2 sin^2 chi)",
            );
            let n_slices = ((cfg.param("t_final") / dt).round() as usize).max(1);
            let sub = (dt / cfg.param("step") * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let t_end = n_slices as f64 * dt;
            meta.diag("n_slices", n_slices);
            meta.diag("t_end", t_end);
            let traj = evolve_lindblad(&rho0, &generator, t_end, dt / sub as f64, every * sub)?;
            let exact = compose_slices(&rho0, &fc, SliceMap::Exact, n_slices, every)?;
            let pert = compose_slices(&rho0, &fc, SliceMap::Perturbative, n_slices, every)?;
            if exact.len() != traj.len() {
                return Err(invalid(
                    "sample_every",
                    "slice and continuum grids do not align",
                ));
            }
            (traj, Some(exact), Some(pert))
        }
    };

    let abs0 = rho0.coherence().norm();
    let abs: Vec<f64> = traj.states.iter().map(|r| r.coherence().norm()).collect();
    let analytic: Vec<f64> = traj
        .times
        .iter()
        .map(|t| abs0 * (-2.0 * kappa * t).exp())
        .collect();
    let mut ts = density_columns(&traj)?
        .with_column("abs_rho01", abs.clone())?
        .with_column("abs_rho01_analytic", analytic)?;
    let abs_of = |t: &Trajectory| {
        t.states
            .iter()
            .map(|r| r.coherence().norm())
            .collect::<Vec<_>>()
    };
    if let (Some(e), Some(p)) = (&exact, &pert) {
        ts.push_column("abs_rho01_exact_slices", abs_of(e))?;
        ts.push_column("abs_rho01_perturbative_slices", abs_of(p))?;
    }
    meta.diag("final_abs_rho01", *abs.last().expect("non-empty"));
    meta.attach(cfg, &mut ts);
    Ok(ts)
}

fn oracle_compare(cfg: &ScenarioConfig) -> Result<TimeSeries> {
    let mut meta = Meta::new();
    let (_, kappa) = resonant_kappa(cfg, &mut meta);
    let dt = cfg.param("dt");
    let n = cfg.count("n_slices");
    let every = cfg.count("sample_every");
    let alpha_sq = cfg.param("alpha_sq");
    let rabi = 2.0 * (alpha_sq * kappa / dt).sqrt();
    let oracle = SliceOracleConfig::for_drive(rabi, kappa, dt, n)?;
    meta.derived("dt", dt, "dt = (kappa dt) / kappa");
    meta.derived("g", (kappa / dt).sqrt(), "g = sqrt(kappa / dt)");
    meta.derived("rabi", rabi, "Omega = 2 g alpha");
    meta.derived(
        "fock_cutoff",
        oracle.fock_cutoff as f64,
        "ceil(|alpha|^2 + 5 sqrt(|alpha|^2 + 1))",
    );

    let rho0 = cfg.initial.expect("defaulted").density();
    let slices = simulate_slicewise_coherent(&oracle, &rho0, every)?;
    // only the beam's own decay: the oracle has no other environment
    let generator = build_driven_generator(&DrivenAtomConfig::new(rabi, kappa)?)?;
    let lindblad = evolve_lindblad(&rho0, &generator, n as f64 * dt, dt, every)?;
    if slices.len() != lindblad.len() {
        return Err(invalid(
            "n_slices",
            "oracle and master-equation grids do not align",
        ));
    }

    let pick =
        |t: &Trajectory, f: fn(&DensityMatrix) -> f64| t.states.iter().map(f).collect::<Vec<_>>();
    let distance: Vec<f64> = slices
        .states
        .iter()
        .zip(&lindblad.states)
        .map(|(a, b)| a.trace_distance(b))
        .collect();
    let max_distance = distance.iter().copied().fold(0.0, f64::max);
    let mut ts = TimeSeries::new(slices.times.clone())?
        .with_column("P_e_oracle", pick(&slices, |r| r.excited_population()))?
        .with_column("P_e_lindblad", pick(&lindblad, |r| r.excited_population()))?
        .with_column("re_rho01_oracle", pick(&slices, |r| r.coherence().re))?
        .with_column("re_rho01_lindblad", pick(&lindblad, |r| r.coherence().re))?
        .with_column("im_rho01_oracle", pick(&slices, |r| r.coherence().im))?
        .with_column("im_rho01_lindblad", pick(&lindblad, |r| r.coherence().im))?
        .with_column("trace_distance", distance)?;
    meta.diag("max_trace_distance", max_distance);
    if let Some(w) = oracle.markov_warning() {
        meta.warnings.push(w);
    }
    meta.attach(cfg, &mut ts);
    Ok(ts)
}
