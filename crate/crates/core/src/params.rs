//! Physical parameters of one model instance.
//!
//! Every field of [`SystemConfig`] is an angular frequency in rad/μs (or a
//! dimensionless number). Inputs quoted as `f/(2π)` in MHz go through
//! [`MhzInputs`], which applies the factor `2π` exactly once.

use alloc::format;

use core::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::operator::{FockTruncation, C64};
#[allow(unused_imports)]
use num_traits::Float;

const BRANCHING_TOL: f64 = 1e-12;
const SQUEEZING_TOL: f64 = 1e-12;
const IDEAL_TOL: f64 = 1e-9;

/// Broadband squeezing parameters: photon number `N` and correlation `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingParams {
    pub n: f64,
    pub m: C64,
}

impl SqueezingParams {
    pub fn new(n: f64, m: C64) -> Result<Self> {
        let s = Self { n, m };
        s.validate()?;
        Ok(s)
    }

    pub fn vacuum() -> Self {
        Self { n: 0.0, m: C64::new(0.0, 0.0) }
    }

    /// Minimum-uncertainty squeezing `M = √(N(N+1))` with real `M`.
    pub fn ideal(n: f64) -> Self {
        Self { n, m: C64::new((n * (n + 1.0)).sqrt(), 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 0.0) || !self.n.is_finite() {
            return Err(Error::InvalidParameter(format!("N must be finite and >= 0, got {}", self.n)));
        }
        let bound = (self.n * (self.n + 1.0)).sqrt();
        if !(self.m.norm() <= bound + SQUEEZING_TOL) {
            return Err(Error::InvalidParameter(format!("|M| = {} exceeds sqrt(N(N+1)) = {bound}", self.m.norm())));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        (self.m.norm() - (self.n * (self.n + 1.0)).sqrt()).abs() <= IDEAL_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Field decay rate κ.
    pub kappa: f64,
    /// Atom–cavity coupling g.
    pub g: f64,
    /// Laser–cavity detuning δ.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanDrive {
    pub omega_r: f64,
    /// Signed detuning Δ_r of the Raman laser from the excited level.
    pub delta_r: f64,
    /// Laser phase in radians.
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxDrive {
    pub omega_s: f64,
    pub delta_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomDecay {
    pub gamma_r: f64,
    pub gamma_s: f64,
    /// Branching amplitudes of `|r⟩ → |0⟩` and `|r⟩ → |1⟩`.
    pub b0: f64,
    pub b1: f64,
}

impl Default for AtomDecay {
    fn default() -> Self {
        Self { gamma_r: 0.0, gamma_s: 0.0, b0: FRAC_1_SQRT_2, b1: FRAC_1_SQRT_2 }
    }
}

/// All physical parameters of one model instance, in angular units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub squeezing: SqueezingParams,
    pub cavity: CavityParams,
    pub raman: RamanDrive,
    pub aux: AuxDrive,
    pub decay: AtomDecay,
    pub trunc: FockTruncation,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        self.squeezing.validate()?;
        let finite = [
            self.cavity.kappa,
            self.cavity.g,
            self.cavity.delta,
            self.raman.omega_r,
            self.raman.delta_r,
            self.raman.phi,
            self.aux.omega_s,
            self.aux.delta_s,
            self.decay.gamma_r,
            self.decay.gamma_s,
            self.decay.b0,
            self.decay.b1,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("all parameters must be finite".into()));
        }
        if !(self.cavity.kappa > 0.0) {
            return Err(Error::InvalidParameter("kappa must be positive".into()));
        }
        if self.raman.delta_r == 0.0 {
            return Err(Error::InvalidParameter("delta_r must be nonzero".into()));
        }
        if self.aux.omega_s != 0.0 && self.aux.delta_s == 0.0 {
            return Err(Error::InvalidParameter("delta_s must be nonzero when omega_s is".into()));
        }
        if self.decay.gamma_r < 0.0 || self.decay.gamma_s < 0.0 {
            return Err(Error::InvalidParameter("decay rates must be >= 0".into()));
        }
        let b = self.decay.b0 * self.decay.b0 + self.decay.b1 * self.decay.b1;
        if (b - 1.0).abs() > BRANCHING_TOL {
            return Err(Error::InvalidParameter(format!("b0^2 + b1^2 = {b}, expected 1")));
        }
        Ok(())
    }

    /// Effective Raman coupling `gΩ_r/(2Δ_r)`.
    pub fn beta_r(&self) -> f64 {
        self.cavity.g * self.raman.omega_r / (2.0 * self.raman.delta_r)
    }

    /// Stark shift per cavity photon `g²/Δ_r`.
    pub fn eta_r(&self) -> f64 {
        self.cavity.g * self.cavity.g / self.raman.delta_r
    }

    /// Cooperativity `g²/(κγ_r)`; infinite without spontaneous emission.
    pub fn cooperativity(&self) -> f64 {
        self.cavity.g * self.cavity.g / (self.cavity.kappa * self.decay.gamma_r)
    }

    /// Squeezing correlation including the Raman laser phase, `M e^{2iφ}`.
    pub fn phased_m(&self) -> C64 {
        self.squeezing.m * C64::from_polar(1.0, 2.0 * self.raman.phi)
    }
}

/// Parameters derived from a [`SystemConfig`]; recomputed on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub beta_r: f64,
    pub eta_r: f64,
    pub alpha: f64,
    pub big_c: f64,
    /// Phase-damping constant in units of `β_r²/κ`.
    pub p_const: f64,
    /// Total quadrature dephasing constant in units of `β_r²/κ`.
    pub d_const: f64,
}

/// Parameters as quoted in experimental papers: frequencies are `f/(2π)` in
/// MHz, phases in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhzInputs {
    pub g: f64,
    pub kappa: f64,
    pub delta: f64,
    pub omega_r: f64,
    pub delta_r: f64,
    pub phi: f64,
    pub omega_s: f64,
    pub delta_s: f64,
    pub gamma_r: f64,
    pub gamma_s: f64,
    pub b0: f64,
    pub b1: f64,
    pub n: f64,
    pub m_re: f64,
    pub m_im: f64,
    pub n_max: usize,
}

impl MhzInputs {
    /// Single-atom cavity parameters with ideal `N = 0.5` squeezing:
    /// g = 24, κ = 4.2, γ_r = 5.2, Ω_r = 240, Δ_r = 4800 (all `/2π` MHz).
    /// The auxiliary drive is off; balance it with
    /// [`solve_aux_drive`](crate::regime::solve_aux_drive).
    pub fn reference() -> Self {
        Self {
            g: 24.0,
            kappa: 4.2,
            delta: 0.0,
            omega_r: 240.0,
            delta_r: 4800.0,
            phi: 0.0,
            omega_s: 0.0,
            delta_s: 4800.0,
            gamma_r: 5.2,
            gamma_s: 0.0,
            b0: FRAC_1_SQRT_2,
            b1: FRAC_1_SQRT_2,
            n: 0.5,
            m_re: 0.75f64.sqrt(),
            m_im: 0.0,
            n_max: FockTruncation::default().n_max(),
        }
    }

    pub fn to_config(&self) -> Result<SystemConfig> {
        let cfg = SystemConfig {
            squeezing: SqueezingParams { n: self.n, m: C64::new(self.m_re, self.m_im) },
            cavity: CavityParams { kappa: TAU * self.kappa, g: TAU * self.g, delta: TAU * self.delta },
            raman: RamanDrive { omega_r: TAU * self.omega_r, delta_r: TAU * self.delta_r, phi: self.phi },
            aux: AuxDrive { omega_s: TAU * self.omega_s, delta_s: TAU * self.delta_s },
            decay: AtomDecay { gamma_r: TAU * self.gamma_r, gamma_s: TAU * self.gamma_s, b0: self.b0, b1: self.b1 },
            trunc: FockTruncation::new(self.n_max)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`to_config`](Self::to_config).
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            g: cfg.cavity.g / TAU,
            kappa: cfg.cavity.kappa / TAU,
            delta: cfg.cavity.delta / TAU,
            omega_r: cfg.raman.omega_r / TAU,
            delta_r: cfg.raman.delta_r / TAU,
            phi: cfg.raman.phi,
            omega_s: cfg.aux.omega_s / TAU,
            delta_s: cfg.aux.delta_s / TAU,
            gamma_r: cfg.decay.gamma_r / TAU,
            gamma_s: cfg.decay.gamma_s / TAU,
            b0: cfg.decay.b0,
            b1: cfg.decay.b1,
            n: cfg.squeezing.n,
            m_re: cfg.squeezing.m.re,
            m_im: cfg.squeezing.m.im,
            n_max: cfg.trunc.n_max(),
        }
    }
}
