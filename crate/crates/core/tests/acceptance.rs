//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use twmeas::coherent::{
    build_driven_generator, simulate_slicewise_coherent, steady_excited_population,
    DrivenAtomConfig, SliceOracleConfig,
};
use twmeas::faraday::{
    compose_slices, exact_slice_map, fit_dephasing_rate, perturbative_slice_map, FaradayConfig,
    SliceMap,
};
use twmeas::fock::jc_evolve;
use twmeas::params::{derive_faraday, derive_resonant, AtomParams, BeamParams, CoarseGraining};
use twmeas::quantum::{evolve_lindblad, steady_state, DensityMatrix};
use twmeas::single_photon::{optimize_pulse_length, run_recursion, run_state, SinglePhotonState};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fig2_peak() -> Outcome {
    let (gamma, kappa, tau, n) = (1.0, 0.02, 2.5, 10_000);
    // (4 kappa / gamma^2 tau)(1 - e^{-gamma tau / 2})^2, evaluated by hand
    let want = 4.0 * 0.02 / 2.5 * (1.0 - (-1.25f64).exp()).powi(2);
    let start = Instant::now();
    let samples = run_recursion(n, tau / n as f64, kappa, gamma - kappa, tau, 1)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let last = samples.last().ok_or("no samples")?;
    let rel = (last.p_e - want).abs() / want;
    check(
        rel <= 1e-3 && elapsed < 1.0 && (want - 0.016290).abs() < 5e-7,
        format!(
            "P_e(tau) = {:.7} vs {want:.7}, rel {rel:.2e}, {elapsed:.3} s",
            last.p_e
        ),
    )
}

fn optimal_pulse() -> Outcome {
    let opt = optimize_pulse_length(0.02, 1.0).map_err(|e| e.to_string())?;
    let x = opt.tau / 2.0;
    let residual = 2.0 * x * (-x).exp() - (1.0 - (-x).exp());
    let ratio = opt.p_e / 0.02;
    check(
        (opt.tau - 2.513).abs() <= 0.01 && (ratio - 0.8147).abs() <= 1e-3 && residual.abs() < 1e-9,
        format!(
            "gamma tau* = {:.5}, P_e*/(kappa/gamma) = {ratio:.5}",
            opt.tau
        ),
    )
}

fn vacuum_decay_order() -> Outcome {
    let (gamma, t) = (1.0_f64, 1.0_f64);
    let want = (-0.5 * gamma * t).exp();
    let mut errs = Vec::new();
    for dt in [1e-2, 1e-3, 1e-4] {
        let n = (t / dt).round() as usize;
        let state =
            SinglePhotonState::excited_in_vacuum(n, dt, gamma, 0.0).map_err(|e| e.to_string())?;
        let out = run_state(state, t, n).map_err(|e| e.to_string())?;
        let a = out.last().ok_or("no samples")?.a_e;
        errs.push((dt, (a.norm() - want).abs()));
    }
    let orders: Vec<f64> = errs
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log10() / (w[0].0 / w[1].0).log10())
        .collect();
    check(
        orders.iter().all(|p| (p - 1.0).abs() <= 0.2),
        format!(
            "errors {:.2e} {:.2e} {:.2e}, orders {:.3} {:.3}",
            errs[0].1, errs[1].1, errs[2].1, orders[0], orders[1]
        ),
    )
}

fn integrator_soundness() -> Outcome {
    let gen = build_driven_generator(&DrivenAtomConfig::new(3.0, 1.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut drift: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    // the pure start puts an eigenvalue at zero, where positivity is tight
    for rho0 in [
        DensityMatrix::ground(),
        DensityMatrix::from_bloch(0.3, -0.2, 0.5).map_err(|e| e.to_string())?,
    ] {
        let traj = evolve_lindblad(&rho0, &gen, 10.0, 1e-3, 1).map_err(|e| e.to_string())?;
        for r in &traj.states {
            drift = drift.max((r.trace() - 1.0).abs());
            min_eig = min_eig.min(r.min_eigenvalue());
        }
    }

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rabi = rng.random_range(0.01..20.0);
        let kappa = rng.random_range(0.01..10.0);
        let gen =
            build_driven_generator(&DrivenAtomConfig::new(rabi, kappa).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        let ss = steady_state(&gen).map_err(|e| e.to_string())?;
        // independent: rho_ee from the optical Bloch equations solved by hand
        let want = (rabi * rabi / 4.0) / (rabi * rabi / 2.0 + kappa * kappa / 4.0);
        worst = worst
            .max((ss.excited_population() - want).abs())
            .max((steady_excited_population(rabi, kappa) - want).abs());
    }
    check(
        drift <= 1e-9 && min_eig >= -1e-8 && worst <= 1e-8,
        format!(
            "trace drift {drift:.1e}, min eigenvalue {min_eig:.1e}, steady-state error {worst:.1e}"
        ),
    )
}

fn markov_oracle() -> Outcome {
    let (kappa, rabi, t_final) = (1.0_f64, 2.0 * (0.05f64 * 1e3).sqrt(), 2.0_f64);
    let mut worst = Vec::new();
    for kdt in [1e-3, 5e-4] {
        let dt = kdt / kappa;
        let n = (t_final / dt).round() as usize;
        let oracle = SliceOracleConfig::for_drive(rabi, kappa, dt, n).map_err(|e| e.to_string())?;
        let gen =
            build_driven_generator(&DrivenAtomConfig::new(rabi, kappa).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        let mut max_d: f64 = 0.0;
        for rho0 in [
            DensityMatrix::ground(),
            DensityMatrix::excited(),
            DensityMatrix::plus(),
        ] {
            let a = simulate_slicewise_coherent(&oracle, &rho0, 1).map_err(|e| e.to_string())?;
            let b =
                evolve_lindblad(&rho0, &gen, n as f64 * dt, dt, 1).map_err(|e| e.to_string())?;
            if a.len() != b.len() {
                return Err("grids differ".into());
            }
            for (x, y) in a.states.iter().zip(&b.states) {
                max_d = max_d.max(x.trace_distance(y));
            }
        }
        worst.push((oracle.alpha * oracle.alpha, max_d));
    }
    let ratio = worst[0].1 / worst[1].1;
    check(
        worst[0].0 <= 0.05 + 1e-12 && worst[0].1 < 5e-3 && (ratio - 2.0).abs() < 0.4,
        format!(
            "max trace distance {:.2e} (kappa dt 1e-3), {:.2e} (5e-4), halving ratio {ratio:.3}",
            worst[0].1, worst[1].1
        ),
    )
}

fn faraday_qnd() -> Outcome {
    let (chi, alpha_sq, dt, n) = (0.2, 0.03, 1e-3, 2000);
    let cfg = FaradayConfig::new(chi, alpha_sq, dt).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::from_bloch(0.6, 0.3, 0.2).map_err(|e| e.to_string())?;
    let traj = compose_slices(&rho0, &cfg, SliceMap::Exact, n, 1).map_err(|e| e.to_string())?;
    let c0 = rho0.coherence().norm();
    let mut coh_err: f64 = 0.0;
    let mut pop_err: f64 = 0.0;
    for (t, r) in traj.times.iter().zip(&traj.states) {
        coh_err =
            coh_err.max((r.coherence().norm() - c0 * (-2.0 * cfg.kappa * t).exp()).abs() / c0);
        pop_err = pop_err
            .max((r.get(0, 0) - rho0.get(0, 0)).norm())
            .max((r.get(1, 1) - rho0.get(1, 1)).norm());
    }

    let fit = |a2: f64| -> Result<f64, String> {
        let c = FaradayConfig::new(chi, a2, dt).map_err(|e| e.to_string())?;
        let tr = compose_slices(&DensityMatrix::plus(), &c, SliceMap::Exact, 500, 10)
            .map_err(|e| e.to_string())?;
        fit_dephasing_rate(&tr).map_err(|e| e.to_string())
    };
    let doubling = fit(2.0 * alpha_sq)? / fit(alpha_sq)?;
    let doubling_rel = (doubling / 2.0 - 1.0).abs();

    let mut rng = StdRng::seed_from_u64(7);
    let mut excess: f64 = f64::NEG_INFINITY;
    for _ in 0..200 {
        let c = FaradayConfig::new(rng.random_range(-1.0..1.0), rng.random_range(0.0..0.2), dt)
            .map_err(|e| e.to_string())?;
        let (x, y, z): (f64, f64, f64) = (
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let r = (x * x + y * y + z * z).sqrt().max(1.0);
        let rho = DensityMatrix::from_bloch(x / r, y / r, z / r).map_err(|e| e.to_string())?;
        let e = exact_slice_map(&rho, &c).map_err(|e| e.to_string())?;
        let p = perturbative_slice_map(&rho, &c).map_err(|e| e.to_string())?;
        let bound = 2.0 * c.alpha_sq.powi(2) * c.chi.sin().powi(4);
        excess = excess.max(e.matrix().max_abs_diff(p.matrix()) - bound);
    }
    check(
        coh_err <= 1e-12 && pop_err <= 1e-14 && doubling_rel <= 1e-10 && excess <= 1e-16,
        format!(
            "coherence err {coh_err:.1e}, population drift {pop_err:.1e}, rate ratio {doubling:.12} (rel {doubling_rel:.1e}), \
             perturbative excess over bound {excess:.1e}"
        ),
    )
}

fn jaynes_cummings() -> Outcome {
    let g_eff = 0.37;
    let mut norm_err: f64 = 0.0;
    for n in [1u64, 7, 100, 10_000] {
        for i in 0..=1000 {
            let s = jc_evolve(n, g_eff, i as f64 * 0.05).map_err(|e| e.to_string())?;
            norm_err = norm_err.max((s.norm() - 1.0).abs());
        }
    }

    // first zero of Re c_g located by bisection
    let first_zero = |n: u64| -> Result<f64, String> {
        let f = |t: f64| {
            jc_evolve(n, g_eff, t)
                .map(|s| s.c_g.re)
                .map_err(|e| e.to_string())
        };
        let (mut lo, mut hi) = (0.0, 1e-3);
        while f(hi)? > 0.0 {
            lo = hi;
            hi *= 1.5;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut ratio_err: f64 = 0.0;
    for n in [1u64, 3, 25, 400] {
        ratio_err = ratio_err.max((first_zero(n)? / first_zero(4 * n)? - 2.0).abs());
    }

    // single-photon square pulse at small times against -i g_eff t
    let (gamma, kappa, tau, n) = (1.0, 0.02, 2.5, 100_000);
    let dt = tau / n as f64;
    let g = (kappa / tau).sqrt();
    let samples = run_recursion(n, dt, kappa, gamma - kappa, 1e-3, 1).map_err(|e| e.to_string())?;
    let mut small_excess: f64 = f64::NEG_INFINITY;
    for s in samples.iter().skip(1) {
        let dev = (s.a_e - C64::new(0.0, -g * s.t)).norm();
        small_excess = small_excess.max(dev - gamma * s.t * g * s.t);
        let jc = jc_evolve(1, g, s.t).map_err(|e| e.to_string())?;
        small_excess =
            small_excess.max((jc.c_e - C64::new(0.0, -g * s.t)).norm() - gamma * s.t * g * s.t);
    }
    check(
        norm_err <= 1e-12 && ratio_err <= 1e-6 && small_excess <= 0.0,
        format!("norm err {norm_err:.1e}, frequency ratio err {ratio_err:.1e}, small-t excess {small_excess:.1e}"),
    )
}

fn parameter_invariance() -> Outcome {
    let err = |e: twmeas::Error| e.to_string();
    let atom = AtomParams::new(3.8e7)
        .and_then(|a| a.with_k0(8.05e4))
        .and_then(|a| a.with_omega0(2.41e15))
        .and_then(|a| a.with_sigma0(1.0e-9))
        .map_err(err)?;
    let base = CoarseGraining::from_pulse(2.5e-8, 100).map_err(err)?;
    let beam = |power: f64| BeamParams {
        area: Some(1.0e-6),
        power: Some(power),
        detuning: Some(-5.0e8),
        ..BeamParams::default()
    };
    let r0 = derive_resonant(&atom, &beam(1e-3), &base).map_err(err)?;
    let f0 = derive_faraday(&atom, &beam(1e-3), &base).map_err(err)?;
    let mut bitwise = true;
    let mut rel: f64 = 0.0;
    for m in [2, 3, 10, 64, 1000] {
        let grid = base.refine(m).map_err(err)?;
        for p in [1e-3, 2e-2, 5e-6] {
            let r = derive_resonant(&atom, &beam(p), &grid).map_err(err)?;
            let f = derive_faraday(&atom, &beam(p), &grid).map_err(err)?;
            bitwise &= r.kappa_resonant.map(f64::to_bits) == r0.kappa_resonant.map(f64::to_bits)
                && r.sigma_eff.map(f64::to_bits) == r0.sigma_eff.map(f64::to_bits)
                && f.chi.map(f64::to_bits) == f0.chi.map(f64::to_bits);
            if p == 1e-3 {
                let (a, b) = (r.rabi.ok_or("no rabi")?, r0.rabi.ok_or("no rabi")?);
                rel = rel.max(((a - b) / b).abs());
                let (a, b) = (
                    f.kappa_faraday.ok_or("no kappa")?,
                    f0.kappa_faraday.ok_or("no kappa")?,
                );
                rel = rel.max(((a - b) / b).abs());
            }
        }
    }
    check(
        bitwise && rel <= 1e-15,
        format!("kappa, sigma_eff, chi bitwise: {bitwise}; Omega, kappa_faraday max rel change {rel:.1e}"),
    )
}

const FIG2_CONFIG: &str = "\
[fig2]
scenario = \"single-photon\"
kappa_over_gamma = 0.02
gamma_tau = 2.5
n_slices = 10000
";

fn run_cli(config: &str, dir: &Path) -> Result<(i32, Option<Vec<u8>>), String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let path = dir.join("batch.toml");
    fs::write(&path, config).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_twmeas"))
        .arg("run")
        .arg(&path)
        .arg("--out")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let csv = fs::read(dir.join("fig2.csv")).ok();
    Ok((status.code().unwrap_or(-1), csv))
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (c1, a) = run_cli(FIG2_CONFIG, &tmp.path().join("a"))?;
    let (c2, b) = run_cli(FIG2_CONFIG, &tmp.path().join("b"))?;
    let identical = c1 == 0 && c2 == 0 && a.is_some() && a == b;

    let mut codes = Vec::new();
    for key in ["scenario", "kappa_over_gamma", "gamma_tau", "n_slices"] {
        let text: String = FIG2_CONFIG
            .lines()
            .filter(|l| !l.starts_with(&format!("{key} ")))
            .map(|l| format!("{l}\n"))
            .collect();
        let (code, _) = run_cli(&text, &tmp.path().join(format!("no_{key}")))?;
        codes.push((key, code));
    }
    check(
        identical && codes.iter().all(|(_, c)| *c == 2),
        format!(
            "byte-identical: {identical} ({} bytes); exit codes without key: {codes:?}",
            a.map_or(0, |v| v.len())
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("single-photon pulse peak", fig2_peak),
        ("optimal pulse length", optimal_pulse),
        ("vacuum decay convergence order", vacuum_decay_order),
        ("integrator soundness", integrator_soundness),
        ("slicewise oracle vs master equation", markov_oracle),
        ("Faraday QND dephasing", faraday_qnd),
        ("Jaynes-Cummings flopping", jaynes_cummings),
        ("parameter invariance", parameter_invariance),
        ("CLI determinism and validation", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
