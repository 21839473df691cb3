//! Closed-form Bloch rates against the generators they summarize.

use std::f64::consts::TAU;

use proptest::prelude::*;
use sqzcav_core::models::{build_t3r_simplified, build_t4r, Model};
use sqzcav_core::operator::two_level;
use sqzcav_core::*;

/// `d⟨σ_k⟩/dt` read off the generator for the state `(I + σ_j)/2`, and the
/// drive term from `I/2`.
fn generator_rates(model: &Model) -> [f64; 4] {
    let l = &model.liouvillian;
    let half = OperatorMatrix::identity(2).scale_real(0.5);
    let paulis = [two_level::sigma_x(), two_level::sigma_y(), two_level::sigma_z()];
    let mut out = [0.0; 4];
    for k in 0..3 {
        let rho = &half + &paulis[k].scale_real(0.5);
        let drift = l.apply(&half, 0.0).unwrap();
        let flow = l.apply(&rho, 0.0).unwrap();
        out[k] = -(paulis[k].expect(&flow).unwrap() - paulis[k].expect(&drift).unwrap()).re;
    }
    out[3] = -two_level::sigma_z().expect(&l.apply(&half, 0.0).unwrap()).unwrap().re;
    out
}

fn assert_rates(model: &Model, rates: &BlochRates) {
    let g = generator_rates(model);
    let want = [rates.gamma_x, rates.gamma_y, rates.gamma_z, rates.gamma_drive];
    for k in 0..4 {
        assert!((g[k] - want[k]).abs() <= 1e-12 * want[k].abs().max(1.0), "component {k}: {} vs {}", g[k], want[k]);
    }
}

fn balanced(inputs: MhzInputs) -> SystemConfig {
    let mut cfg = inputs.to_config().unwrap();
    cfg.aux.omega_s = solve_aux_drive(&cfg, cfg.aux.delta_s).unwrap();
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn t0_rates(gamma in 0.1f64..5.0, n in 0.0f64..4.0, frac in -1.0f64..1.0) {
        let sq = SqueezingParams::new(n, C64::new(frac * (n * (n + 1.0)).sqrt(), 0.0)).unwrap();
        let rates = bloch_rates(&RateModel::T0 { gamma, squeezing: sq }).unwrap();
        assert_rates(&build_t0(gamma, &sq).unwrap(), &rates);
        prop_assert!((rates.gamma_z - gamma * (2.0 * n + 1.0)).abs() < 1e-12 * rates.gamma_z);
    }

    #[test]
    fn t4r_rates_and_quadrature_split(n in 0.01f64..2.0, frac in 0.0f64..1.0, kappa in 2.0f64..20.0, gamma_r in 0.0f64..10.0) {
        let mut inputs = MhzInputs::reference();
        inputs.n = n;
        inputs.m_re = frac * (n * (n + 1.0)).sqrt();
        inputs.kappa = kappa;
        inputs.gamma_r = gamma_r;
        let cfg = balanced(inputs);
        let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
        assert_rates(&build_t4r(&cfg).unwrap(), &rates);
        let split = -4.0 * cfg.beta_r().powi(2) * cfg.squeezing.m.re / cfg.cavity.kappa;
        prop_assert!((rates.gamma_y - rates.gamma_x - split).abs() <= 1e-12 * split.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn aux_drive_balances_shifts(n in 0.0f64..3.0, omega_r in 50.0f64..400.0, delta_s in 1000.0f64..20000.0) {
        let mut inputs = MhzInputs::reference();
        inputs.n = n;
        inputs.m_re = 0.0;
        inputs.omega_r = omega_r;
        inputs.delta_s = delta_s;
        let mut cfg = inputs.to_config().unwrap();
        let radicand = 4.0 * cfg.aux.delta_s * alpha(&cfg, LevelScheme::ThreeLevel);
        prop_assume!(radicand > 0.0);
        cfg.aux.omega_s = solve_aux_drive(&cfg, cfg.aux.delta_s).unwrap();
        let scale = cfg.raman.omega_r.powi(2) / (4.0 * cfg.raman.delta_r);
        prop_assert!(alpha(&cfg, LevelScheme::FourLevel).abs() <= 1e-12 * scale);
    }

    #[test]
    fn three_level_no_go_holds(n in 1e-3f64..10.0, frac in 0.0f64..1.0) {
        let row = sqzcav_core::regime::NogoRow::new(n, frac);
        prop_assert!(row.quad_sum >= 1.0 - 1e-9);
        // the uncorrelated row bounds the ratio from below
        prop_assert!(row.ratio >= (n + 1.0) / (2.0 * (2.0 * n + 1.0)) - 1e-12);
    }
}

#[test]
fn simplified_three_level_rates() {
    let mut inputs = MhzInputs::reference();
    // Ω_r = 2g√N balances the three-level shifts
    inputs.omega_r = 2.0 * inputs.g * inputs.n.sqrt();
    let cfg = inputs.to_config().unwrap();
    let rates = bloch_rates(&RateModel::T3R(cfg)).unwrap();
    assert_rates(&build_t3r_simplified(&cfg).unwrap(), &rates);
    let d = derived_params(&cfg, LevelScheme::ThreeLevel);
    let n = cfg.squeezing.n;
    let m = cfg.squeezing.m.re;
    assert!((d.p_const - (n * (n + 1.0) + m * m) / (2.0 * n)).abs() < 1e-12);
}

#[test]
fn complex_correlation_rotates_quadratures() {
    let mut inputs = MhzInputs::reference();
    inputs.phi = 0.3;
    let cfg = balanced(inputs);
    let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
    assert!((rates.quadrature_angle - 0.3).abs() < 1e-12);
    let mut real = cfg;
    real.raman.phi = 0.0;
    let reference = bloch_rates(&RateModel::T4R(real)).unwrap();
    assert!((rates.gamma_x - reference.gamma_x).abs() < 1e-12 && (rates.gamma_y - reference.gamma_y).abs() < 1e-12);
}

#[test]
fn figure_rate_scale() {
    let cfg = balanced(MhzInputs::reference());
    let rates = bloch_rates(&RateModel::T4R(cfg)).unwrap();
    assert!((rates.gamma_y / TAU - 0.027164).abs() < 5e-7);
    assert!((rates.sz_steady() + 0.50236).abs() < 5e-6);
}
