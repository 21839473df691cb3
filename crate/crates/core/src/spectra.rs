//! Two-probe transmission amplitudes `A_p±(ν)`.
//!
//! The probe field `ε(t) = ℰ₊e^{−iνt} + ℰ₋e^{iνt}` drives the cavity weakly;
//! `A_p⁺` and `A_p⁻` are the components of the intracavity response at
//! `e^{−iνt}` and `e^{iνt}`. Two independent routes are provided: the
//! closed forms in terms of the reduced Bloch rates, and linear response of
//! an effective atom–cavity model via regression.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};
use core::fmt;

use crate::correlate::commutator_correlator;
use crate::error::{Error, Result};
use crate::integrate::StepControls;
use crate::models::{build_t4i, ground_bloch_vector, Model, ModelWarning, ALPHA_TOLERANCE};
use crate::operator::{C64, ZERO};
use crate::params::SystemConfig;
use crate::regime::{alpha, bloch_rates, check_regime, BlochRates, LevelScheme, RateModel, RegimeReport, RegimeThresholds};
use crate::steady::steady_state;
use crate::truncation::check_truncation;
#[allow(unused_imports)]
use num_traits::Float;

/// Largest probe amplitude relative to `κ` accepted as linear response.
pub const WEAK_PROBE_LIMIT: f64 = 0.01;
/// Relative misfit above which the exponential tail closure is rejected.
pub const TAIL_FIT_LIMIT: f64 = 0.01;
/// Relative disagreement between closed-form and simulated `⟨σ_z⟩` that is
/// reported as a regime breakdown.
pub const SZ_DISCREPANCY_LIMIT: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub e_plus: C64,
    pub e_minus: C64,
    /// Probe detunings `ν` in rad/μs.
    pub nu_grid: Vec<f64>,
}

impl ProbeConfig {
    /// 801 points with `ν/2π ∈ [−3, 3]` MHz.
    pub fn default_grid() -> Vec<f64> {
        Self::grid(3.0 * TAU, 801)
    }

    /// `n` evenly spaced detunings in `[−nu_max, nu_max]`.
    pub fn grid(nu_max: f64, n: usize) -> Vec<f64> {
        if n == 1 {
            return alloc::vec![0.0];
        }
        (0..n).map(|k| -nu_max + 2.0 * nu_max * k as f64 / (n - 1) as f64).collect()
    }

    /// Upper probe only.
    pub fn single(e: C64, nu_grid: Vec<f64>) -> Self {
        Self { e_plus: e, e_minus: ZERO, nu_grid }
    }

    /// `ℰ₊ = ℰ₋ = ℰ`, selecting the `Γ_x` quadrature.
    pub fn sym(e: C64, nu_grid: Vec<f64>) -> Self {
        Self { e_plus: e, e_minus: e, nu_grid }
    }

    /// `ℰ₊ = −ℰ₋ = ℰ`, selecting the `Γ_y` quadrature.
    pub fn antisym(e: C64, nu_grid: Vec<f64>) -> Self {
        Self { e_plus: e, e_minus: -e, nu_grid }
    }

    pub fn validate(&self, kappa: f64) -> Result<()> {
        let limit = WEAK_PROBE_LIMIT * kappa;
        if self.e_plus.norm() > limit || self.e_minus.norm() > limit {
            return Err(Error::InvalidParameter(alloc::format!(
                "probe amplitudes must not exceed {WEAK_PROBE_LIMIT} kappa = {limit}"
            )));
        }
        if !self.e_plus.is_finite() || !self.e_minus.is_finite() || self.nu_grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("probe parameters must be finite".into()));
        }
        Ok(())
    }

    fn nu_max(&self) -> f64 {
        self.nu_grid.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Analytic,
    Numeric,
}

impl SpectrumMethod {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumMethod::Analytic => "analytic",
            SpectrumMethod::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumWarning {
    /// At least one validity inequality is violated.
    RegimeFailed,
    /// Closed-form and simulated `⟨σ_z⟩` differ by more than
    /// [`SZ_DISCREPANCY_LIMIT`].
    SzDiscrepancy { relative: f64 },
    /// Fock-space tail population of the effective model's steady state.
    Truncation { tail_population: f64 },
    Model(ModelWarning),
}

impl fmt::Display for SpectrumWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumWarning::RegimeFailed => f.write_str("regime conditions violated; closed forms are not expected to hold"),
            SpectrumWarning::SzDiscrepancy { relative } => {
                write!(f, "closed-form and simulated <sigma_z> differ by {:.2}%", 100.0 * relative)
            }
            SpectrumWarning::Truncation { tail_population } => {
                write!(f, "Fock truncation tail population {tail_population:.3e}")
            }
            SpectrumWarning::Model(w) => fmt::Display::fmt(w, f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub method: SpectrumMethod,
    pub nu: Vec<f64>,
    pub a_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
    pub rates: Option<BlochRates>,
    pub sz_closed_form: Option<f64>,
    pub sz_numeric: Option<f64>,
    pub regime: Option<RegimeReport>,
    pub warnings: Vec<SpectrumWarning>,
}

impl SpectrumResult {
    pub fn abs2_plus(&self) -> Vec<f64> {
        self.a_plus.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn abs2_minus(&self) -> Vec<f64> {
        self.a_minus.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn require_balanced(cfg: &SystemConfig) -> Result<()> {
    let al = alpha(cfg, LevelScheme::FourLevel);
    let scale = (cfg.raman.omega_r * cfg.raman.omega_r / (4.0 * cfg.raman.delta_r)).abs();
    let tolerance = ALPHA_TOLERANCE * if scale > 0.0 { scale } else { 1.0 };
    if al.abs() > tolerance {
        return Err(Error::AlphaNotBalanced { alpha: al, tolerance });
    }
    Ok(())
}

fn require_real_quadratures(rates: &BlochRates) -> Result<()> {
    if rates.quadrature_angle != 0.0 {
        return Err(Error::InvalidParameter("closed-form spectra need a real effective M (rotate the laser phase)".into()));
    }
    Ok(())
}

/// Closed-form amplitudes. A failing regime report is attached as a warning
/// rather than an error.
pub fn probe_analytic(cfg: &SystemConfig, rates: &BlochRates, sz: f64, probe: &ProbeConfig) -> Result<SpectrumResult> {
    cfg.validate()?;
    probe.validate(cfg.cavity.kappa)?;
    require_balanced(cfg)?;
    require_real_quadratures(rates)?;
    let kappa = cfg.cavity.kappa;
    let k = cfg.beta_r().powi(2) / (2.0 * kappa * kappa) * sz;
    let (ep, em) = (probe.e_plus, probe.e_minus);
    let (gx, gy) = (rates.gamma_x, rates.gamma_y);
    let i = C64::new(0.0, 1.0);
    let mut a_plus = Vec::with_capacity(probe.nu_grid.len());
    let mut a_minus = Vec::with_capacity(probe.nu_grid.len());
    for &nu in &probe.nu_grid {
        let inu = i * nu;
        a_plus.push(ep / (kappa - inu) + ((ep + em.conj()) / (gx - inu) + (ep - em.conj()) / (gy - inu)) * k);
        a_minus.push(em / (kappa + inu) + ((em + ep.conj()) / (gx + inu) + (em - ep.conj()) / (gy + inu)) * k);
    }
    let regime = check_regime(cfg, &RegimeThresholds::default());
    let mut warnings = Vec::new();
    if !regime.pass {
        warnings.push(SpectrumWarning::RegimeFailed);
    }
    Ok(SpectrumResult {
        method: SpectrumMethod::Analytic,
        nu: probe.nu_grid.clone(),
        a_plus,
        a_minus,
        rates: Some(*rates),
        sz_closed_form: Some(sz),
        sz_numeric: None,
        regime: Some(regime),
        warnings,
    })
}

/// Lower-sideband amplitude generated by a single real upper probe `ℰ`.
pub fn lower_sideband_response(cfg: &SystemConfig, rates: &BlochRates, sz: f64, e: f64, nu: f64) -> C64 {
    let beta = cfg.beta_r();
    let kappa = cfg.cavity.kappa;
    let m = cfg.phased_m().re;
    let i = C64::new(0.0, 1.0);
    C64::new(-2.0 * e * beta.powi(4) / kappa.powi(3) * sz * m, 0.0) / ((rates.gamma_x + i * nu) * (rates.gamma_y + i * nu))
}

/// Quadrature settings of the linear-response route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    /// Regression horizon; beyond it the correlators are closed by a fitted
    /// exponential.
    pub tau_max: f64,
    /// Trapezoid step; defaults to `1/(40 max(κ, |ν|_max))`.
    pub step: Option<f64>,
    pub controls: StepControls,
}

impl NumericOptions {
    /// Horizon of ten times the slowest of `1/Γ_y` and `1/κ`.
    pub fn for_rates(rates: &BlochRates, kappa: f64) -> Self {
        Self { tau_max: 10.0 / rates.gamma_y.min(rates.gamma_x).min(kappa), step: None, controls: StepControls::default() }
    }
}

/// Analytic continuation `c e^{−λ(τ−τ_max)}` of a sampled correlator beyond
/// its last sample.
#[derive(Debug, Clone, Copy)]
struct Tail {
    c: C64,
    lambda: C64,
}

impl Tail {
    fn fit(samples: &[C64], h: f64, scale: f64) -> Result<Option<Tail>> {
        let n = samples.len();
        let c = samples[n - 1];
        // below the regression's absolute accuracy the tail is immaterial
        if c.norm() <= 1e-8 * scale {
            return Ok(None);
        }
        let lag = (n / 20).max(1);
        if n < 2 * lag + 1 {
            return Err(Error::TailFit { residual: f64::INFINITY, limit: TAIL_FIT_LIMIT });
        }
        let (c1, c2) = (samples[n - 1 - lag], samples[n - 1 - 2 * lag]);
        let dt = lag as f64 * h;
        let lambda = -(c / c1).ln() / dt;
        let predicted = c * (lambda * 2.0 * dt).exp();
        let residual = (predicted - c2).norm() / c2.norm();
        if !(residual <= TAIL_FIT_LIMIT) || !(lambda.re > 0.0) {
            return Err(Error::TailFit { residual, limit: TAIL_FIT_LIMIT });
        }
        Ok(Some(Tail { c, lambda }))
    }

    /// `∫_{τ_max}^∞ e^{iστ} c e^{−λ(τ−τ_max)} dτ`.
    fn integral(&self, sigma: f64, tau_max: f64) -> C64 {
        let i = C64::new(0.0, 1.0);
        self.c * (i * sigma * tau_max).exp() / (self.lambda - i * sigma)
    }
}

/// Sampled correlator with its Fourier–Laplace transform.
struct Series {
    samples: Vec<C64>,
    h: f64,
    tail: Option<Tail>,
}

impl Series {
    fn new(samples: Vec<C64>, h: f64) -> Result<Self> {
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let tail = Tail::fit(&samples, h, scale)?;
        Ok(Self { samples, h, tail })
    }

    /// `∫_0^∞ e^{iστ} f(τ) dτ` by the trapezoid rule plus the tail.
    fn transform(&self, sigma: f64) -> C64 {
        let n = self.samples.len();
        let step = C64::from_polar(1.0, sigma * self.h);
        let mut phase = C64::new(1.0, 0.0);
        let mut acc = ZERO;
        for (k, &f) in self.samples.iter().enumerate() {
            if k % 256 == 0 {
                phase = C64::from_polar(1.0, sigma * self.h * k as f64);
            }
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += f * phase * w;
            phase *= step;
        }
        let tau_max = self.h * (n - 1) as f64;
        acc * self.h + self.tail.map_or(ZERO, |t| t.integral(sigma, tau_max))
    }
}

/// Regression correlators `⟨[a(τ),a†]⟩` and `⟨[a(τ),a]⟩` of a static
/// effective atom–cavity model in its steady state, sampled once and reused
/// for any probe configuration up to `nu_max`.
pub struct ResponseKernel {
    c1: Series,
    c2: Series,
    nu_max: f64,
    kappa: f64,
    coupling_phase: f64,
    sz: f64,
    warnings: Vec<SpectrumWarning>,
}

impl ResponseKernel {
    pub fn compute(model: &Model, nu_max: f64, opts: &NumericOptions) -> Result<Self> {
        let l = &model.liouvillian;
        if !l.is_static() {
            return Err(Error::TimeDependentGenerator);
        }
        let a = model.cavity_annihilation()?;
        let kappa = model.bath.map(|(k, _)| k).ok_or_else(|| Error::InvalidParameter("model has no cavity bath".into()))?;
        if !(opts.tau_max > 0.0) || !opts.tau_max.is_finite() || !(nu_max >= 0.0) {
            return Err(Error::InvalidParameter("tau_max must be positive and nu_max non-negative".into()));
        }
        let h_target = opts.step.unwrap_or(1.0 / (40.0 * kappa.max(nu_max)));
        let n = (opts.tau_max / h_target).ceil() as usize + 1;
        let h = opts.tau_max / (n - 1) as f64;
        let taus: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();

        let ss = steady_state(l, &opts.controls)?;
        let ad = a.dagger();
        let c1 = Series::new(commutator_correlator(l, &ss.state, &a, &ad, &taus, &opts.controls)?, h)?;
        let c2 = Series::new(commutator_correlator(l, &ss.state, &a, &a, &taus, &opts.controls)?, h)?;

        let sz = ground_bloch_vector(model, ss.state.op(), 0.0)?[2];
        let mut warnings: Vec<SpectrumWarning> = model.warnings.iter().copied().map(SpectrumWarning::Model).collect();
        let trunc = check_truncation(&ss.state, model.space.levels())?;
        if !trunc.pass {
            warnings.push(SpectrumWarning::Truncation { tail_population: trunc.tail_population });
        }
        Ok(Self { c1, c2, nu_max, kappa, coupling_phase: model.coupling_phase, sz, warnings })
    }

    /// Simulated stationary `⟨σ_z⟩` of the ground states.
    pub fn sz(&self) -> f64 {
        self.sz
    }

    /// Amplitudes `A_p±(ν)` over the probe grid, with
    /// `A_p⁺(ν) = ∫e^{iντ}(ℰ₊⟨[a(τ),a†]⟩ − ℰ₋*⟨[a(τ),a]⟩)dτ` and
    /// `A_p⁻(ν) = ∫e^{−iντ}(ℰ₋⟨[a(τ),a†]⟩ − ℰ₊*⟨[a(τ),a]⟩)dτ`.
    ///
    /// Probe and response amplitudes are referenced to the field
    /// `a_p = i e^{iφ} a`, the phase in which the adiabatically following
    /// cavity field is `+(β_r/κ)σ⁻`; this is the reference of the closed
    /// forms. In the phase of `a` itself the anomalous correlator enters with
    /// the opposite sign.
    pub fn spectrum(&self, probe: &ProbeConfig) -> Result<SpectrumResult> {
        probe.validate(self.kappa)?;
        if probe.nu_max() > self.nu_max * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter("probe grid exceeds the detuning range the kernel was sampled for".into()));
        }
        let u = C64::from_polar(1.0, self.coupling_phase + FRAC_PI_2);
        let (ep, em) = (u.conj() * probe.e_plus, u.conj() * probe.e_minus);
        let mut a_plus = Vec::with_capacity(probe.nu_grid.len());
        let mut a_minus = Vec::with_capacity(probe.nu_grid.len());
        for &nu in &probe.nu_grid {
            let (c1p, c2p) = (self.c1.transform(nu), self.c2.transform(nu));
            let (c1m, c2m) = (self.c1.transform(-nu), self.c2.transform(-nu));
            a_plus.push(u * (ep * c1p - em.conj() * c2p));
            a_minus.push(u * (em * c1m - ep.conj() * c2m));
        }
        Ok(SpectrumResult {
            method: SpectrumMethod::Numeric,
            nu: probe.nu_grid.clone(),
            a_plus,
            a_minus,
            rates: None,
            sz_closed_form: None,
            sz_numeric: Some(self.sz),
            regime: None,
            warnings: self.warnings.clone(),
        })
    }
}

/// Linear-response amplitudes of a static effective atom–cavity model; see
/// [`ResponseKernel::spectrum`].
pub fn probe_numeric(model: &Model, probe: &ProbeConfig, opts: &NumericOptions) -> Result<SpectrumResult> {
    let kappa = model.bath.map(|(k, _)| k).ok_or_else(|| Error::InvalidParameter("model has no cavity bath".into()))?;
    probe.validate(kappa)?;
    ResponseKernel::compute(model, probe.nu_max(), opts)?.spectrum(probe)
}

/// Evaluates one route over the probe grid for the four-level scheme,
/// recording the closed-form rates, `⟨σ_z⟩` and the regime report.
pub fn spectrum_scan(cfg: &SystemConfig, probe: &ProbeConfig, method: SpectrumMethod) -> Result<SpectrumResult> {
    let rates = bloch_rates(&RateModel::T4R(*cfg))?;
    let sz_cf = rates.sz_steady();
    let mut out = probe_analytic(cfg, &rates, sz_cf, probe)?;
    if method == SpectrumMethod::Analytic {
        return Ok(out);
    }
    let model = build_t4i(cfg)?;
    let opts = NumericOptions::for_rates(&rates, cfg.cavity.kappa);
    let numeric = ResponseKernel::compute(&model, probe.nu_max(), &opts)?.spectrum(probe)?;
    let sz_num = numeric.sz_numeric.unwrap_or(f64::NAN);
    let relative = ((sz_num - sz_cf) / sz_cf).abs();
    out.method = SpectrumMethod::Numeric;
    out.a_plus = numeric.a_plus;
    out.a_minus = numeric.a_minus;
    out.sz_numeric = Some(sz_num);
    out.warnings.extend(numeric.warnings);
    if !(relative <= SZ_DISCREPANCY_LIMIT) {
        out.warnings.push(SpectrumWarning::SzDiscrepancy { relative });
    }
    Ok(out)
}
