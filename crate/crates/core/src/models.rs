//! Generators for every model tier, from the full multi-level atom in a
//! squeezed-driven cavity down to the reduced two-level master equations.
//!
//! Level indices: `|0⟩ = 0`, `|1⟩ = 1`, `|r⟩ = 2`, `|s⟩ = 3`. Composite
//! spaces are ordered `atom ⊗ cavity`. Cavity tiers are written in the frame
//! rotating at the Raman laser frequency, so the squeezed-bath channels are
//! static.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::integrate::StepControls;
use crate::liouvillian::{DissipatorChannel, Liouvillian};
use crate::operator::{annihilation, kron, two_level, DensityMatrix, FockTruncation, OperatorMatrix, C64};
use crate::params::{SqueezingParams, SystemConfig};
use crate::regime::{alpha, LevelScheme};
use crate::steady::steady_state;
#[allow(unused_imports)]
use num_traits::Float;

/// Relative tolerance on `|α| / |Ω_r²/4Δ_r|` for the balanced-shift tiers.
pub const ALPHA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    /// Two-level atom in broadband squeezed vacuum.
    T0,
    /// Three-level atom ⊗ cavity.
    T3F,
    /// Effective two-level atom ⊗ cavity after eliminating `|r⟩`.
    T3E,
    /// Reduced three-level ground-state master equation.
    T3R,
    /// Four-level atom ⊗ cavity with spontaneous emission.
    T4F,
    /// Effective two-level atom ⊗ cavity with residual spontaneous emission.
    T4I,
    /// Reduced four-level ground-state master equation.
    T4R,
}

impl Tier {
    pub const ALL: [Tier; 7] = [Tier::T0, Tier::T3F, Tier::T3E, Tier::T3R, Tier::T4F, Tier::T4I, Tier::T4R];

    pub fn name(self) -> &'static str {
        match self {
            Tier::T0 => "T0",
            Tier::T3F => "T3F",
            Tier::T3E => "T3E",
            Tier::T3R => "T3R",
            Tier::T4F => "T4F",
            Tier::T4I => "T4I",
            Tier::T4R => "T4R",
        }
    }

    pub fn parse(s: &str) -> Option<Tier> {
        Tier::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    pub fn has_cavity(self) -> bool {
        matches!(self, Tier::T3F | Tier::T3E | Tier::T4F | Tier::T4I)
    }

    pub fn scheme(self) -> Option<LevelScheme> {
        match self {
            Tier::T0 => None,
            Tier::T3F | Tier::T3E | Tier::T3R => Some(LevelScheme::ThreeLevel),
            Tier::T4F | Tier::T4I | Tier::T4R => Some(LevelScheme::FourLevel),
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpace {
    Atom { levels: usize },
    AtomCavity { levels: usize, trunc: FockTruncation },
}

impl ModelSpace {
    pub fn levels(&self) -> usize {
        match *self {
            ModelSpace::Atom { levels } | ModelSpace::AtomCavity { levels, .. } => levels,
        }
    }

    pub fn fock_dim(&self) -> usize {
        match self {
            ModelSpace::Atom { .. } => 1,
            ModelSpace::AtomCavity { trunc, .. } => trunc.dim(),
        }
    }

    pub fn dim(&self) -> usize {
        self.levels() * self.fock_dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelWarning {
    /// `g√N` is not small compared with `Ω_r`.
    CavityPumpedSpontaneousEmission { ratio: f64 },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::CavityPumpedSpontaneousEmission { ratio } => {
                write!(f, "g*sqrt(N)/Omega_r = {ratio:.3} exceeds 1/3; cavity-driven spontaneous emission is not negligible")
            }
        }
    }
}

/// A generator together with the bookkeeping needed to compare tiers.
#[derive(Debug, Clone)]
pub struct Model {
    pub tier: Tier,
    pub liouvillian: Liouvillian,
    pub space: ModelSpace,
    /// Ground-state splitting removed by the interaction picture of the
    /// reduced three-level equation; zero for every other tier.
    pub frame_alpha: f64,
    /// Raman laser phase `φ` of the atom–cavity coupling.
    pub coupling_phase: f64,
    /// Squeezed-bath parameters, used to prepare the cavity in its bath state.
    pub(crate) bath: Option<(f64, SqueezingParams)>,
    pub warnings: Vec<ModelWarning>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Embeds a ground-state operator (2×2) into the full model space.
    pub fn embed_ground_operator(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: op.dim() });
        }
        let levels = self.space.levels();
        let atom = OperatorMatrix::from_fn(levels, |i, j| if i < 2 && j < 2 { op.get(i, j) } else { C64::new(0.0, 0.0) });
        Ok(kron(&atom, &OperatorMatrix::identity(self.space.fock_dim())))
    }

    /// Cavity annihilation operator on the full space.
    pub fn cavity_annihilation(&self) -> Result<OperatorMatrix> {
        match self.space {
            ModelSpace::AtomCavity { levels, trunc } => Ok(kron(&OperatorMatrix::identity(levels), &annihilation(trunc))),
            ModelSpace::Atom { .. } => Err(Error::InvalidParameter("model has no cavity mode".into())),
        }
    }

    /// Product state of a ground-state density matrix and the stationary
    /// state of the empty, squeezed-driven cavity.
    pub fn initial_state(&self, ground: &DensityMatrix) -> Result<DensityMatrix> {
        if ground.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: ground.dim() });
        }
        let levels = self.space.levels();
        let atom = OperatorMatrix::from_fn(levels, |i, j| if i < 2 && j < 2 { ground.op().get(i, j) } else { C64::new(0.0, 0.0) });
        match (self.space, self.bath) {
            (ModelSpace::AtomCavity { trunc, .. }, Some((kappa, sq))) => {
                let cavity = empty_cavity_state(kappa, &sq, trunc)?;
                DensityMatrix::new(kron(&atom, cavity.op()))
            }
            _ => DensityMatrix::new(atom),
        }
    }

    /// Ground-state block (2×2, unnormalized) of `ρ` at time `t`, expressed in
    /// the laser frame shared by all tiers.
    pub fn ground_block(&self, rho: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
        let levels = self.space.levels();
        let atom = if self.space.fock_dim() > 1 {
            rho.partial_trace_second(levels, self.space.fock_dim())?
        } else {
            rho.clone()
        };
        let mut g = atom.leading_block(2);
        if self.frame_alpha != 0.0 {
            let rot = C64::from_polar(1.0, -self.frame_alpha * t);
            g.set(1, 0, g.get(1, 0) * rot);
            g.set(0, 1, g.get(0, 1) * rot.conj());
        }
        Ok(g)
    }
}

/// Stationary state of a cavity damped by the squeezed bath alone.
pub fn empty_cavity_state(kappa: f64, sq: &SqueezingParams, trunc: FockTruncation) -> Result<DensityMatrix> {
    let a = annihilation(trunc);
    let l = cavity_bath(Liouvillian::builder(trunc.dim()), kappa, sq, &a).build()?;
    Ok(steady_state(&l, &StepControls::default())?.state)
}

fn cavity_bath(
    b: crate::liouvillian::LiouvillianBuilder,
    kappa: f64,
    sq: &SqueezingParams,
    a: &OperatorMatrix,
) -> crate::liouvillian::LiouvillianBuilder {
    let ad = a.dagger();
    let mut b = b
        .channel(DissipatorChannel::lindblad(kappa * (sq.n + 1.0), a))
        .channel(DissipatorChannel::lindblad(kappa * sq.n, &ad));
    if sq.m.norm() > 0.0 {
        b = b.channel_pair(DissipatorChannel::new(sq.m * kappa, ad.clone(), ad));
    }
    b
}

fn proj(levels: usize, i: usize, j: usize) -> OperatorMatrix {
    OperatorMatrix::projector(levels, i, j)
}

/// Two-level atom with linewidth `γ` in broadband squeezed vacuum.
pub fn build_t0(gamma: f64, sq: &SqueezingParams) -> Result<Model> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter("gamma must be positive".into()));
    }
    sq.validate()?;
    let sp = two_level::sigma_plus();
    let sm = two_level::sigma_minus();
    let mut b = Liouvillian::builder(2)
        .channel(DissipatorChannel::lindblad(0.5 * gamma * (sq.n + 1.0), &sm))
        .channel(DissipatorChannel::lindblad(0.5 * gamma * sq.n, &sp));
    if sq.m.norm() > 0.0 {
        // σ⁺σ⁺ = 0, so only the sandwich term −γMσ⁺ρσ⁺ survives
        b = b.channel_pair(DissipatorChannel::new(-sq.m * (0.5 * gamma), sp.clone(), sp));
    }
    Ok(Model {
        tier: Tier::T0,
        liouvillian: b.build()?,
        space: ModelSpace::Atom { levels: 2 },
        frame_alpha: 0.0,
        coupling_phase: 0.0,
        bath: None,
        warnings: Vec::new(),
    })
}

/// Builds any cavity or reduced tier from a configuration. The two-level
/// reference tier needs a linewidth instead; see [`build_t0`].
pub fn build_model(tier: Tier, cfg: &SystemConfig) -> Result<Model> {
    match tier {
        Tier::T0 => Err(Error::InvalidParameter("T0 is parameterized by gamma; use build_t0".into())),
        Tier::T3F => build_t3f(cfg),
        Tier::T3E => build_t3e(cfg),
        Tier::T3R => build_t3r(cfg),
        Tier::T4F => build_t4f(cfg),
        Tier::T4I => build_t4i(cfg),
        Tier::T4R => build_t4r(cfg),
    }
}

fn cavity_model(tier: Tier, cfg: &SystemConfig, levels: usize, l: Liouvillian, warnings: Vec<ModelWarning>) -> Model {
    Model {
        tier,
        liouvillian: l,
        space: ModelSpace::AtomCavity { levels, trunc: cfg.trunc },
        frame_alpha: 0.0,
        coupling_phase: cfg.raman.phi,
        bath: Some((cfg.cavity.kappa, cfg.squeezing)),
        warnings,
    }
}

/// Hamiltonian and cavity bath shared by the multi-level tiers.
fn multilevel(cfg: &SystemConfig, levels: usize) -> crate::liouvillian::LiouvillianBuilder {
    let trunc = cfg.trunc;
    let id_a = OperatorMatrix::identity(levels);
    let id_c = OperatorMatrix::identity(trunc.dim());
    let a = annihilation(trunc);
    let num = &a.dagger() * &a;
    let (g, delta) = (cfg.cavity.g, cfg.cavity.delta);
    let r = &cfg.raman;

    let mut h = kron(&proj(levels, 2, 2), &id_c).scale_real(-r.delta_r);
    h = &h - &kron(&id_a, &num).scale_real(delta);
    let drive = proj(levels, 2, 1).scale(C64::from_polar(0.5 * r.omega_r, -r.phi));
    let drive = &drive + &drive.dagger();
    h = &h + &kron(&drive, &id_c);
    let jc = kron(&proj(levels, 2, 0), &a).scale_real(g);
    h = &h + &(&jc + &jc.dagger());

    let a_full = kron(&id_a, &a);
    cavity_bath(Liouvillian::builder(levels * trunc.dim()).hamiltonian(h), cfg.cavity.kappa, &cfg.squeezing, &a_full)
}

fn spontaneous(cfg: &SystemConfig, levels: usize) -> Vec<DissipatorChannel> {
    let id_c = OperatorMatrix::identity(cfg.trunc.dim());
    let d = &cfg.decay;
    let mut out = Vec::new();
    let mut push = |rate: f64, to: usize, from: usize| {
        if rate > 0.0 {
            out.push(DissipatorChannel::lindblad(rate, &kron(&proj(levels, to, from), &id_c)));
        }
    };
    push(0.5 * d.gamma_r * d.b0 * d.b0, 0, 2);
    push(0.5 * d.gamma_r * d.b1 * d.b1, 1, 2);
    if levels > 3 {
        push(0.5 * d.gamma_s, 0, 3);
    }
    out
}

/// Three-level atom ⊗ cavity without spontaneous emission.
pub fn build_t3f(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    let l = multilevel(cfg, 3).build()?;
    Ok(cavity_model(Tier::T3F, cfg, 3, l, Vec::new()))
}

/// [`build_t3f`] with spontaneous emission from `|r⟩` into both ground states.
pub fn build_t3f_with_spontaneous(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    let mut b = multilevel(cfg, 3);
    for ch in spontaneous(cfg, 3) {
        b = b.channel(ch);
    }
    Ok(cavity_model(Tier::T3F, cfg, 3, b.build()?, Vec::new()))
}

/// Ground-state operators on `2 ⊗ Fock`.
struct EffectiveOps {
    sp: OperatorMatrix,
    sm: OperatorMatrix,
    p0: OperatorMatrix,
    p1: OperatorMatrix,
    a: OperatorMatrix,
    num: OperatorMatrix,
    id: OperatorMatrix,
}

impl EffectiveOps {
    fn new(trunc: FockTruncation) -> Self {
        let id_c = OperatorMatrix::identity(trunc.dim());
        let a = annihilation(trunc);
        let num = &a.dagger() * &a;
        Self {
            sp: kron(&two_level::sigma_plus(), &id_c),
            sm: kron(&two_level::sigma_minus(), &id_c),
            p0: kron(&proj(2, 0, 0), &id_c),
            p1: kron(&proj(2, 1, 1), &id_c),
            a: kron(&OperatorMatrix::identity(2), &a),
            num: kron(&OperatorMatrix::identity(2), &num),
            id: OperatorMatrix::identity(2 * trunc.dim()),
        }
    }

    /// `β(e^{iφ}σ⁺a + h.c.)`
    fn raman_coupling(&self, beta: f64, phi: f64) -> OperatorMatrix {
        let x = (&self.sp * &self.a).scale(C64::from_polar(beta, phi));
        &x + &x.dagger()
    }
}

/// Effective two-level atom ⊗ cavity after eliminating `|r⟩`.
pub fn build_t3e(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    let o = EffectiveOps::new(cfg.trunc);
    let r = &cfg.raman;
    let mut h = o.p1.scale_real(r.omega_r * r.omega_r / (4.0 * r.delta_r));
    h = &h - &o.num.scale_real(cfg.cavity.delta);
    h = &h + &o.raman_coupling(cfg.beta_r(), r.phi);
    h = &h + &(&o.p0 * &o.num).scale_real(cfg.eta_r());
    let l = cavity_bath(Liouvillian::builder(o.id.dim()).hamiltonian(h), cfg.cavity.kappa, &cfg.squeezing, &o.a).build()?;
    Ok(cavity_model(Tier::T3E, cfg, 2, l, Vec::new()))
}

/// Reduced three-level ground-state equation in its general, possibly
/// time-dependent form. The model lives in the interaction picture that
/// removes the ground-state splitting `α`; [`Model::ground_block`] maps back.
pub fn build_t3r(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    let (kappa, delta) = (cfg.cavity.kappa, cfg.cavity.delta);
    let beta2 = cfg.beta_r() * cfg.beta_r();
    let eta = cfg.eta_r();
    let sq = &cfg.squeezing;
    let al = alpha(cfg, LevelScheme::ThreeLevel);
    let i = C64::new(0.0, 1.0);
    let sp = two_level::sigma_plus();
    let sm = two_level::sigma_minus();
    let p0 = proj(2, 0, 0);
    let p1 = proj(2, 1, 1);

    let c = C64::new(beta2 * (sq.n + 1.0), 0.0) / (C64::new(kappa, 0.0) - i * (al + delta));
    let d = C64::new(beta2 * sq.n, 0.0) / (C64::new(kappa, 0.0) + i * (al + delta));
    // one-sided complex weights split into a dissipator and a level shift
    let h = &p1.scale_real(c.im) + &p0.scale_real(d.im);
    let mut b = Liouvillian::builder(2)
        .hamiltonian(h)
        .channel(DissipatorChannel::lindblad(c.re, &sm))
        .channel(DissipatorChannel::lindblad(d.re, &sp));
    let m = cfg.phased_m();
    if m.norm() > 0.0 {
        let w = -m * (beta2 * kappa) / ((C64::new(kappa, 0.0) - i * delta) * (C64::new(kappa, 0.0) + i * (al - delta)));
        b = b.channel_pair(DissipatorChannel::new(w, sp.clone(), sp).with_phase(2.0 * al));
    }
    let dephasing = eta * eta / (2.0 * kappa) * (sq.n * (sq.n + 1.0) + kappa * kappa * sq.m.norm_sqr() / (kappa * kappa + delta * delta));
    b = b.channel(DissipatorChannel::new(C64::new(dephasing, 0.0), p0.clone(), p0));
    Ok(Model {
        tier: Tier::T3R,
        liouvillian: b.build()?,
        space: ModelSpace::Atom { levels: 2 },
        frame_alpha: al,
        coupling_phase: 0.0,
        bath: None,
        warnings: Vec::new(),
    })
}

fn alpha_scale(cfg: &SystemConfig) -> f64 {
    let s = (cfg.raman.omega_r * cfg.raman.omega_r / (4.0 * cfg.raman.delta_r)).abs();
    if s > 0.0 { s } else { 1.0 }
}

fn require_balanced(cfg: &SystemConfig, scheme: LevelScheme) -> Result<()> {
    let al = alpha(cfg, scheme);
    let tolerance = ALPHA_TOLERANCE * alpha_scale(cfg);
    if al.abs() > tolerance {
        return Err(Error::AlphaNotBalanced { alpha: al, tolerance });
    }
    Ok(())
}

fn require_raman_resonance(cfg: &SystemConfig) -> Result<()> {
    if cfg.cavity.delta != 0.0 {
        return Err(Error::InvalidParameter("four-level tiers require delta = 0".into()));
    }
    Ok(())
}

/// Static reduced three-level equation with the constant phase-damping
/// coefficient; valid only for `α = δ = 0` and `N > 0`.
pub fn build_t3r_simplified(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    let sq = &cfg.squeezing;
    if sq.n <= 0.0 {
        return Err(Error::SimplifiedRouteUndefined("the constant P divides by 2N and N = 0".into()));
    }
    require_balanced(cfg, LevelScheme::ThreeLevel)?;
    if cfg.cavity.delta != 0.0 {
        return Err(Error::SimplifiedRouteUndefined("delta must be 0".into()));
    }
    let rate = cfg.beta_r() * cfg.beta_r() / cfg.cavity.kappa;
    let p = (sq.n * (sq.n + 1.0) + sq.m.norm_sqr()) / (2.0 * sq.n);
    let sp = two_level::sigma_plus();
    let p0 = proj(2, 0, 0);
    let mut b = Liouvillian::builder(2)
        .channel(DissipatorChannel::lindblad(rate * (sq.n + 1.0), &two_level::sigma_minus()))
        .channel(DissipatorChannel::lindblad(rate * sq.n, &sp))
        .channel(DissipatorChannel::new(C64::new(rate * p, 0.0), p0.clone(), p0));
    let m = cfg.phased_m();
    if m.norm() > 0.0 {
        b = b.channel_pair(DissipatorChannel::new(-m * rate, sp.clone(), sp));
    }
    Ok(Model {
        tier: Tier::T3R,
        liouvillian: b.build()?,
        space: ModelSpace::Atom { levels: 2 },
        frame_alpha: 0.0,
        coupling_phase: 0.0,
        bath: None,
        warnings: Vec::new(),
    })
}

/// Four-level atom ⊗ cavity with spontaneous emission from both excited levels.
pub fn build_t4f(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    require_raman_resonance(cfg)?;
    let id_c = OperatorMatrix::identity(cfg.trunc.dim());
    let aux = &cfg.aux;
    let mut h = kron(&proj(4, 3, 3), &id_c).scale_real(-aux.delta_s);
    let drive = proj(4, 3, 0).scale_real(0.5 * aux.omega_s);
    h = &h + &kron(&(&drive + &drive.dagger()), &id_c);
    let mut b = multilevel(cfg, 4).add_hamiltonian(&h);
    for ch in spontaneous(cfg, 4) {
        b = b.channel(ch);
    }
    Ok(cavity_model(Tier::T4F, cfg, 4, b.build()?, Vec::new()))
}

/// Effective two-level atom ⊗ cavity for the four-level scheme, keeping the
/// laser-driven part of the spontaneous emission.
pub fn build_t4i(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    require_raman_resonance(cfg)?;
    let o = EffectiveOps::new(cfg.trunc);
    let (r, aux, n) = (&cfg.raman, &cfg.aux, cfg.squeezing.n);
    let eta = cfg.eta_r();
    let mut shift0 = eta * n;
    if aux.omega_s != 0.0 {
        shift0 += aux.omega_s * aux.omega_s / (4.0 * aux.delta_s);
    }
    let mut h = &o.p0.scale_real(shift0) + &o.p1.scale_real(r.omega_r * r.omega_r / (4.0 * r.delta_r));
    let n_shifted = &o.num - &o.id.scale_real(n);
    h = &h + &(&n_shifted * &o.p0).scale_real(eta);
    h = &h + &o.raman_coupling(cfg.beta_r(), r.phi);

    let rate = cfg.decay.gamma_r * r.omega_r * r.omega_r / (8.0 * r.delta_r * r.delta_r);
    let (b0, b1) = (cfg.decay.b0, cfg.decay.b1);
    let mut b = cavity_bath(Liouvillian::builder(o.id.dim()).hamiltonian(h), cfg.cavity.kappa, &cfg.squeezing, &o.a);
    if rate > 0.0 {
        b = b
            .channel(DissipatorChannel::lindblad(b0 * b0 * rate, &o.sm))
            .channel(DissipatorChannel::new(C64::new(b1 * b1 * rate, 0.0), o.p1.clone(), o.p1.clone()));
    }
    let mut warnings = Vec::new();
    let ratio = (cfg.cavity.g * n.sqrt() / r.omega_r).abs();
    if ratio > 1.0 / 3.0 {
        warnings.push(ModelWarning::CavityPumpedSpontaneousEmission { ratio });
    }
    Ok(cavity_model(Tier::T4I, cfg, 2, b.build()?, warnings))
}

/// Reduced four-level ground-state equation; requires balanced level shifts.
pub fn build_t4r(cfg: &SystemConfig) -> Result<Model> {
    cfg.validate()?;
    require_raman_resonance(cfg)?;
    require_balanced(cfg, LevelScheme::FourLevel)?;
    let sq = &cfg.squeezing;
    let rate = cfg.beta_r() * cfg.beta_r() / cfg.cavity.kappa;
    let inv_2c = inverse_two_c(cfg);
    let (b0, b1) = (cfg.decay.b0, cfg.decay.b1);
    let g2_over_om2 = (cfg.cavity.g / cfg.raman.omega_r).powi(2);
    let p = 2.0 * g2_over_om2 * (sq.n * (sq.n + 1.0) + sq.m.norm_sqr()) + b1 * b1 * inv_2c;
    let sp = two_level::sigma_plus();
    let p1 = proj(2, 1, 1);
    let mut b = Liouvillian::builder(2)
        .channel(DissipatorChannel::lindblad(rate * (sq.n + 1.0 + b0 * b0 * inv_2c), &two_level::sigma_minus()))
        .channel(DissipatorChannel::lindblad(rate * sq.n, &sp))
        .channel(DissipatorChannel::new(C64::new(rate * p, 0.0), p1.clone(), p1));
    let m = cfg.phased_m();
    if m.norm() > 0.0 {
        b = b.channel_pair(DissipatorChannel::new(-m * rate, sp.clone(), sp));
    }
    Ok(Model {
        tier: Tier::T4R,
        liouvillian: b.build()?,
        space: ModelSpace::Atom { levels: 2 },
        frame_alpha: 0.0,
        coupling_phase: 0.0,
        bath: None,
        warnings: Vec::new(),
    })
}

/// `1/(2C)`, zero without spontaneous emission.
pub(crate) fn inverse_two_c(cfg: &SystemConfig) -> f64 {
    let g2 = cfg.cavity.g * cfg.cavity.g;
    if cfg.decay.gamma_r == 0.0 {
        0.0
    } else {
        cfg.cavity.kappa * cfg.decay.gamma_r / (2.0 * g2)
    }
}

/// `⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩` of the normalized ground block.
pub fn ground_bloch_vector(model: &Model, rho: &OperatorMatrix, t: f64) -> Result<[f64; 3]> {
    let g = model.ground_block(rho, t)?;
    let tr = g.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidParameter("ground-state population vanishes".into()));
    }
    Ok(two_level::bloch_vector(&g.scale_real(1.0 / tr)))
}
