//! Closed-form rates, level-shift balancing, validity conditions, decay fits
//! and the three-level phase-damping scan.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::inverse_two_c;
use crate::params::{DerivedParams, SqueezingParams, SystemConfig};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelScheme {
    ThreeLevel,
    FourLevel,
}

/// Difference of the ground-state level shifts.
pub fn alpha(cfg: &SystemConfig, scheme: LevelScheme) -> f64 {
    let r = &cfg.raman;
    let base = r.omega_r * r.omega_r / (4.0 * r.delta_r) - cfg.cavity.g * cfg.cavity.g * cfg.squeezing.n / r.delta_r;
    match scheme {
        LevelScheme::ThreeLevel => base,
        LevelScheme::FourLevel if cfg.aux.omega_s == 0.0 => base,
        LevelScheme::FourLevel => base - cfg.aux.omega_s * cfg.aux.omega_s / (4.0 * cfg.aux.delta_s),
    }
}

/// Auxiliary Rabi frequency that balances the four-level shifts at detuning
/// `delta_s`.
pub fn solve_aux_drive(cfg: &SystemConfig, delta_s: f64) -> Result<f64> {
    if delta_s == 0.0 || !delta_s.is_finite() {
        return Err(Error::InvalidParameter("delta_s must be finite and nonzero".into()));
    }
    let radicand = 4.0 * delta_s * alpha(cfg, LevelScheme::ThreeLevel);
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { radicand });
    }
    Ok(radicand.sqrt())
}

/// Phase-damping constant of the reduced three-level equation in units of
/// `β_r²/κ`. Written through `η_r²/β_r²` it is finite at `N = 0` and equals
/// `(N(N+1)+|M|²)/(2N)` whenever the shifts are balanced.
fn three_level_p(cfg: &SystemConfig) -> f64 {
    let sq = &cfg.squeezing;
    let (kappa, delta) = (cfg.cavity.kappa, cfg.cavity.delta);
    let corr = sq.n * (sq.n + 1.0) + kappa * kappa * sq.m.norm_sqr() / (kappa * kappa + delta * delta);
    let beta = cfg.beta_r();
    if beta != 0.0 {
        cfg.eta_r().powi(2) * corr / (2.0 * beta * beta)
    } else if sq.n > 0.0 {
        corr / (2.0 * sq.n)
    } else {
        0.0
    }
}

fn four_level_scattering(cfg: &SystemConfig) -> f64 {
    let sq = &cfg.squeezing;
    2.0 * (cfg.cavity.g / cfg.raman.omega_r).powi(2) * (sq.n * (sq.n + 1.0) + sq.m.norm_sqr())
}

pub fn derived_params(cfg: &SystemConfig, scheme: LevelScheme) -> DerivedParams {
    let inv_2c = inverse_two_c(cfg);
    let (p_const, d_const) = match scheme {
        LevelScheme::ThreeLevel => {
            let p = three_level_p(cfg);
            (p, p)
        }
        LevelScheme::FourLevel => {
            let s = four_level_scattering(cfg);
            let b1 = cfg.decay.b1;
            (s + b1 * b1 * inv_2c, s + inv_2c)
        }
    };
    DerivedParams {
        beta_r: cfg.beta_r(),
        eta_r: cfg.eta_r(),
        alpha: alpha(cfg, scheme),
        big_c: cfg.cooperativity(),
        p_const,
        d_const,
    }
}

/// Decay constants of `d⟨σ_x⟩/dt = −Γ_x⟨σ_x⟩`, `d⟨σ_y⟩/dt = −Γ_y⟨σ_y⟩`,
/// `d⟨σ_z⟩/dt = −Γ − Γ_z⟨σ_z⟩`.
///
/// For a complex effective correlation `M̃` the quadratures are those of the
/// Bloch axes rotated by `quadrature_angle = arg(M̃)/2`; for real `M̃` the angle
/// is zero and `M̃` enters with its sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRates {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_z: f64,
    pub gamma_drive: f64,
    pub quadrature_angle: f64,
}

impl BlochRates {
    /// Stationary `⟨σ_z⟩ = −Γ/Γ_z`.
    pub fn sz_steady(&self) -> f64 {
        -self.gamma_drive / self.gamma_z
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateModel {
    /// Two-level atom of linewidth `gamma` in squeezed vacuum.
    T0 { gamma: f64, squeezing: SqueezingParams },
    T3R(SystemConfig),
    T4R(SystemConfig),
}

/// Signed real correlation and the quadrature rotation that makes it real.
fn effective_m(m: crate::operator::C64) -> (f64, f64) {
    if m.im == 0.0 {
        (m.re, 0.0)
    } else {
        (m.norm(), 0.5 * m.arg())
    }
}

fn check_balanced(cfg: &SystemConfig, scheme: LevelScheme) -> Result<()> {
    let al = alpha(cfg, scheme);
    let scale = (cfg.raman.omega_r * cfg.raman.omega_r / (4.0 * cfg.raman.delta_r)).abs();
    let tolerance = crate::models::ALPHA_TOLERANCE * if scale > 0.0 { scale } else { 1.0 };
    if al.abs() > tolerance {
        return Err(Error::AlphaNotBalanced { alpha: al, tolerance });
    }
    if cfg.cavity.delta != 0.0 {
        return Err(Error::InvalidParameter("closed-form rates require delta = 0".into()));
    }
    Ok(())
}

pub fn bloch_rates(model: &RateModel) -> Result<BlochRates> {
    match model {
        RateModel::T0 { gamma, squeezing } => {
            squeezing.validate()?;
            let (m, angle) = effective_m(squeezing.m);
            let n2 = 2.0 * squeezing.n + 1.0;
            Ok(BlochRates {
                gamma_x: 0.5 * gamma * (n2 + 2.0 * m),
                gamma_y: 0.5 * gamma * (n2 - 2.0 * m),
                gamma_z: gamma * n2,
                gamma_drive: *gamma,
                quadrature_angle: angle,
            })
        }
        RateModel::T3R(cfg) => {
            cfg.validate()?;
            check_balanced(cfg, LevelScheme::ThreeLevel)?;
            let r = cfg.beta_r().powi(2) / cfg.cavity.kappa;
            let (m, angle) = effective_m(cfg.phased_m());
            let p = three_level_p(cfg);
            let n2 = 2.0 * cfg.squeezing.n + 1.0;
            Ok(BlochRates {
                gamma_x: r * (n2 + 2.0 * m + p),
                gamma_y: r * (n2 - 2.0 * m + p),
                gamma_z: 2.0 * r * n2,
                gamma_drive: 2.0 * r,
                quadrature_angle: angle,
            })
        }
        RateModel::T4R(cfg) => {
            cfg.validate()?;
            check_balanced(cfg, LevelScheme::FourLevel)?;
            let r = cfg.beta_r().powi(2) / cfg.cavity.kappa;
            let (m, angle) = effective_m(cfg.phased_m());
            let d = derived_params(cfg, LevelScheme::FourLevel).d_const;
            let b0_term = cfg.decay.b0 * cfg.decay.b0 * inverse_two_c(cfg);
            let n2 = 2.0 * cfg.squeezing.n + 1.0;
            Ok(BlochRates {
                gamma_x: r * (n2 + 2.0 * m + d),
                gamma_y: r * (n2 - 2.0 * m + d),
                gamma_z: 2.0 * r * (n2 + b0_term),
                gamma_drive: 2.0 * r * (1.0 + b0_term),
                quadrature_angle: angle,
            })
        }
    }
}

/// Largest allowed `small/large` ratio for each "≫" condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub adiabatic: f64,
    pub pumping: f64,
    pub bad_cavity: f64,
    pub phase_damping: f64,
    pub cooperativity: f64,
    /// Relative tolerance on `|α| / |Ω_r²/4Δ_r|`.
    pub alpha_balance: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            adiabatic: 0.1,
            pumping: 0.1,
            bad_cavity: 0.15,
            phase_damping: 0.15,
            cooperativity: 0.1,
            alpha_balance: crate::models::ALPHA_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRow {
    pub name: &'static str,
    /// The side required to be small.
    pub small: f64,
    /// The side required to be large.
    pub large: f64,
    /// `small / large`.
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub rows: Vec<RegimeRow>,
    pub pass: bool,
}

impl RegimeReport {
    pub fn row(&self, name: &str) -> Option<&RegimeRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

fn row(name: &'static str, small: f64, large: f64, threshold: f64) -> RegimeRow {
    let ratio = if small == 0.0 || large.is_infinite() {
        0.0
    } else if large == 0.0 {
        f64::INFINITY
    } else {
        small / large
    };
    RegimeRow { name, small, large, ratio, threshold, pass: ratio <= threshold }
}

/// Evaluates every validity inequality of the four-level reduction (which
/// contains the three-level ones at `Ω_s = 0`). Never fails.
pub fn check_regime(cfg: &SystemConfig, th: &RegimeThresholds) -> RegimeReport {
    let (g, kappa) = (cfg.cavity.g.abs(), cfg.cavity.kappa);
    let (om_r, dr) = (cfg.raman.omega_r.abs(), cfg.raman.delta_r.abs());
    let (om_s, ds) = (cfg.aux.omega_s.abs(), cfg.aux.delta_s.abs());
    let d = &cfg.decay;
    let sq = &cfg.squeezing;
    let m = sq.m.norm();
    let mut rows = Vec::new();

    rows.push(row("adiabatic_r", kappa.max(om_r).max(g).max(d.gamma_r), dr, th.adiabatic));
    if om_s != 0.0 {
        rows.push(row("adiabatic_s", kappa.max(om_s).max(d.gamma_s), ds, th.adiabatic));
    }
    rows.push(row("bad_cavity", cfg.beta_r().abs().max(cfg.eta_r().abs()), kappa, th.bad_cavity));
    rows.push(row("pumping", g * sq.n.sqrt(), om_r, th.pumping));
    let corr = sq.n * (sq.n + 1.0) + m * m;
    let pd_rhs = if corr == 0.0 { f64::INFINITY } else { (sq.n + 0.5 - m) / corr };
    let g2_om2 = if om_r == 0.0 { f64::INFINITY } else { (g / om_r).powi(2) };
    rows.push(row("phase_damping", g2_om2, pd_rhs, th.phase_damping));
    let c = cfg.cooperativity();
    let quad = 2.0 * sq.n + 1.0 - 2.0 * m;
    let coop_small = if quad > 0.0 { 1.0 / (2.0 * quad) } else { f64::INFINITY };
    rows.push(row("cooperativity_squeezed", coop_small, c, th.cooperativity));
    rows.push(row("cooperativity_branching", 0.5 * d.b0 * d.b0, c, th.cooperativity));
    let scale = om_r * om_r / (4.0 * dr);
    rows.push(row("alpha_balance", alpha(cfg, LevelScheme::FourLevel).abs(), if scale > 0.0 { scale } else { 1.0 }, th.alpha_balance));

    let pass = rows.iter().all(|r| r.pass);
    RegimeReport { rows, pass }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `v(t) = A e^{−Γt}`
    PureExp,
    /// `v(t) = A e^{−Γt} + v_∞`
    OffsetExp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// RMS misfit relative to the decaying amplitude.
    pub residual: f64,
    /// Set when the residual exceeds [`FIT_RESIDUAL_FLAG`].
    pub flagged: bool,
}

pub const FIT_RESIDUAL_FLAG: f64 = 0.05;
const MIN_SAMPLES: usize = 20;
const MIN_DECAY_TIMES: f64 = 3.0;

/// Linear least squares for fixed rate; returns (A, offset, sse).
fn linear_part(t: &[f64], v: &[f64], rate: f64, model: DecayModel) -> (f64, f64, f64) {
    let e: Vec<f64> = t.iter().map(|&ti| (-rate * (ti - t[0])).exp()).collect();
    let (a, c) = match model {
        DecayModel::PureExp => {
            let num: f64 = e.iter().zip(v).map(|(x, y)| x * y).sum();
            let den: f64 = e.iter().map(|x| x * x).sum();
            (num / den, 0.0)
        }
        DecayModel::OffsetExp => {
            let n = t.len() as f64;
            let (se, see) = (e.iter().sum::<f64>(), e.iter().map(|x| x * x).sum::<f64>());
            let (sv, sev) = (v.iter().sum::<f64>(), e.iter().zip(v).map(|(x, y)| x * y).sum::<f64>());
            let det = see * n - se * se;
            if det.abs() < 1e-300 {
                return (0.0, sv / n, f64::INFINITY);
            }
            ((sev * n - se * sv) / det, (see * sv - se * sev) / det)
        }
    };
    let sse = e.iter().zip(v).map(|(x, y)| (a * x + c - y).powi(2)).sum();
    (a, c, sse)
}

/// Least-squares exponential fit. The first 5% of the samples are discarded
/// as transient; the rate is found by a bracketing scan in `log Γ` followed by
/// golden-section refinement with the linear coefficients eliminated.
pub fn fit_decay(times: &[f64], values: &[f64], model: DecayModel) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    let skip = times.len().div_ceil(20);
    let (t, v) = (&times[skip.min(times.len())..], &values[skip.min(values.len())..]);
    if t.len() < MIN_SAMPLES {
        return Err(Error::FitFailed("need at least 20 samples after the transient window".into()));
    }
    let span = t[t.len() - 1] - t[0];
    if !(span > 0.0) {
        return Err(Error::FitFailed("samples must span a positive time".into()));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::FitFailed("non-finite sample".into()));
    }
    let (lo, hi) = ((1e-3 / span).ln(), (1e4 / span).ln());
    let sse = |lr: f64| linear_part(t, v, lr.exp(), model).2;
    let n_scan = 400;
    let mut best = (0, f64::INFINITY);
    for k in 0..=n_scan {
        let x = lo + (hi - lo) * k as f64 / n_scan as f64;
        let s = sse(x);
        if s < best.1 {
            best = (k, s);
        }
    }
    let step = (hi - lo) / n_scan as f64;
    let (mut a, mut b) = (lo + step * (best.0 as f64 - 1.0), lo + step * (best.0 as f64 + 1.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = sse(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = sse(x2);
        }
    }
    let rate = (0.5 * (a + b)).exp();
    let (amp, offset, s) = linear_part(t, v, rate, model);
    if rate * span < MIN_DECAY_TIMES {
        return Err(Error::FitFailed("samples span fewer than 3 decay times".into()));
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max((x - offset).abs()));
    let residual = if scale > 0.0 { (s / t.len() as f64).sqrt() / scale } else { 0.0 };
    // report the amplitude at the first retained sample's time origin
    let amplitude = amp * (rate * t[0]).exp();
    Ok(DecayFit { rate, amplitude, offset, residual, flagged: residual > FIT_RESIDUAL_FLAG })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NogoRow {
    pub n: f64,
    /// `M / √(N(N+1))`.
    pub m_fraction: f64,
    pub p: f64,
    /// `2N + 1 − 2M + P`
    pub quad_sum: f64,
    /// `P / (2N + 1 − 2M)`
    pub ratio: f64,
}

impl NogoRow {
    pub fn new(n: f64, m_fraction: f64) -> Self {
        let m = m_fraction * (n * (n + 1.0)).sqrt();
        let p = (n * (n + 1.0) + m * m) / (2.0 * n);
        let q = 2.0 * n + 1.0 - 2.0 * m;
        Self { n, m_fraction, p, quad_sum: q + p, ratio: p / q }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NogoScan {
    pub rows: Vec<NogoRow>,
    pub min_quad_sum: f64,
    pub argmin_quad_sum: usize,
    pub min_ratio: f64,
    pub argmin_ratio: usize,
}

/// `n` log-spaced photon numbers in `[1e-3, 10]` and `n` correlation
/// fractions in `[0, 1]`.
pub fn default_nogo_grid(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (1e-3f64.ln(), 10f64.ln());
    let ns = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp().clamp(1e-3, 10.0)).collect();
    let fs = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    (ns, fs)
}

/// Scans the three-level phase-damping constant over `N × M-fraction`, rows
/// ordered with the fraction varying fastest. Ties keep the lowest index.
pub fn three_level_nogo_scan(n_grid: &[f64], fraction_grid: &[f64]) -> Result<NogoScan> {
    if n_grid.iter().any(|&n| !(n > 0.0 && n <= 10.0)) {
        return Err(Error::InvalidParameter("N grid must lie in (0, 10]".into()));
    }
    if fraction_grid.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
        return Err(Error::InvalidParameter("M fractions must lie in [0, 1]".into()));
    }
    if n_grid.is_empty() || fraction_grid.is_empty() {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    let rows: Vec<NogoRow> =
        n_grid.iter().flat_map(|&n| fraction_grid.iter().map(move |&f| NogoRow::new(n, f))).collect();
    Ok(summarize_nogo(rows))
}

/// Reduction step of the scan, shared with parallel callers that build rows
/// themselves.
pub fn summarize_nogo(rows: Vec<NogoRow>) -> NogoScan {
    let (mut iq, mut ir) = (0, 0);
    for (k, r) in rows.iter().enumerate() {
        if r.quad_sum < rows[iq].quad_sum {
            iq = k;
        }
        if r.ratio < rows[ir].ratio {
            ir = k;
        }
    }
    NogoScan { min_quad_sum: rows[iq].quad_sum, argmin_quad_sum: iq, min_ratio: rows[ir].ratio, argmin_ratio: ir, rows }
}
