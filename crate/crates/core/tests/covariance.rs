//! Laser-phase covariance of the tiers and linearity of the probe response.

use sqzcav_core::models::{build_t3e, build_t4i, build_t4r, Model};
use sqzcav_core::*;

fn rotation(phi: f64) -> OperatorMatrix {
    OperatorMatrix::from_fn(2, |i, j| if i != j { C64::new(0.0, 0.0) } else if i == 0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, phi) })
}

fn conjugate(u: &OperatorMatrix, x: &OperatorMatrix) -> OperatorMatrix {
    &(u * x) * &u.dagger()
}

/// Evolves `ρ₀` under the phase-free model and `Uρ₀U†` under the phased
/// one; the ground blocks must stay related by `U`.
fn check_covariance(plain: &Model, phased: &Model, phi: f64) {
    let u = rotation(phi);
    let rho0 = DensityMatrix::from_bloch(0.5, -0.3, 0.6).unwrap();
    let rotated = DensityMatrix::new(conjugate(&u, rho0.op())).unwrap();
    let controls = StepControls::default().with_tolerances(1e-10, 1e-12);
    let a = evolve(&plain.liouvillian, &plain.initial_state(&rho0).unwrap(), 2.0, 21, &controls).unwrap();
    let b = evolve(&phased.liouvillian, &phased.initial_state(&rotated).unwrap(), 2.0, 21, &controls).unwrap();
    for k in 0..a.times.len() {
        let ga = plain.ground_block(a.states[k].op(), a.times[k]).unwrap();
        let gb = phased.ground_block(b.states[k].op(), b.times[k]).unwrap();
        assert!((&conjugate(&u, &ga) - &gb).max_abs() < 1e-8, "t = {}", a.times[k]);
    }
}

fn config(phi: f64, n_max: usize) -> SystemConfig {
    let mut inputs = MhzInputs::reference();
    inputs.phi = phi;
    inputs.n_max = n_max;
    let mut cfg = inputs.to_config().unwrap();
    cfg.aux.omega_s = solve_aux_drive(&cfg, cfg.aux.delta_s).unwrap();
    cfg
}

#[test]
fn effective_model_is_phase_covariant() {
    let phi = 0.7;
    check_covariance(&build_t3e(&config(0.0, 4)).unwrap(), &build_t3e(&config(phi, 4)).unwrap(), phi);
}

#[test]
fn reduced_model_is_phase_covariant() {
    let phi = -1.1;
    check_covariance(&build_t4r(&config(0.0, 4)).unwrap(), &build_t4r(&config(phi, 4)).unwrap(), phi);
}

fn small_kernel() -> (SystemConfig, ResponseKernel) {
    let mut inputs = MhzInputs::reference();
    inputs.n = 0.0;
    inputs.m_re = 0.0;
    inputs.n_max = 3;
    let mut cfg = inputs.to_config().unwrap();
    cfg.aux.omega_s = solve_aux_drive(&cfg, cfg.aux.delta_s).unwrap();
    let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
    let model = build_t4i(&cfg).unwrap();
    let kernel = ResponseKernel::compute(&model, 6.0, &NumericOptions::for_rates(&rates, cfg.cavity.kappa)).unwrap();
    (cfg, kernel)
}

#[test]
fn numeric_response_is_linear_in_the_probe() {
    let (_, kernel) = small_kernel();
    let grid = ProbeConfig::grid(6.0, 13);
    let (e1, e2) = (C64::new(0.01, 0.02), C64::new(-0.015, 0.005));
    let both = kernel.spectrum(&ProbeConfig { e_plus: e1, e_minus: e2, nu_grid: grid.clone() }).unwrap();
    let upper = kernel.spectrum(&ProbeConfig { e_plus: e1, e_minus: C64::new(0.0, 0.0), nu_grid: grid.clone() }).unwrap();
    let lower = kernel.spectrum(&ProbeConfig { e_plus: C64::new(0.0, 0.0), e_minus: e2, nu_grid: grid }).unwrap();
    for k in 0..both.nu.len() {
        assert!((both.a_plus[k] - upper.a_plus[k] - lower.a_plus[k]).norm() < 1e-15);
        assert!((both.a_minus[k] - upper.a_minus[k] - lower.a_minus[k]).norm() < 1e-15);
    }
}

#[test]
fn uncorrelated_bath_generates_no_lower_sideband() {
    let (_, kernel) = small_kernel();
    let probe = ProbeConfig::single(C64::new(0.01, 0.0), ProbeConfig::grid(6.0, 25));
    let num = kernel.spectrum(&probe).unwrap();
    assert!(num.abs2_plus().iter().all(|&v| v > 0.0));
    assert!(num.abs2_minus().iter().all(|&v| v < 1e-20));
}

#[test]
fn analytic_response_scales_with_the_probe() {
    let cfg = config(0.0, 15);
    let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
    let grid = ProbeConfig::grid(6.0, 31);
    let a = probe_analytic(&cfg, &rates, rates.sz_steady(), &ProbeConfig::antisym(C64::new(0.01, 0.0), grid.clone())).unwrap();
    let b = probe_analytic(&cfg, &rates, rates.sz_steady(), &ProbeConfig::antisym(C64::new(0.02, 0.0), grid)).unwrap();
    for k in 0..a.nu.len() {
        assert!((b.a_plus[k] - a.a_plus[k] * 2.0).norm() < 1e-15);
    }
}

#[test]
fn strong_probe_is_rejected() {
    let cfg = config(0.0, 15);
    let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
    let probe = ProbeConfig::single(C64::new(cfg.cavity.kappa, 0.0), vec![0.0]);
    assert!(probe_analytic(&cfg, &rates, rates.sz_steady(), &probe).is_err());
}
