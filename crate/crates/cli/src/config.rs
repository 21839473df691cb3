//! Run configuration: JSON in, fully resolved snapshot out.
//!
//! Frequencies are `f/(2π)` in MHz, times in μs. Every section is optional;
//! omitted values take the single-atom reference parameters. Resolution
//! fills every derived default (auxiliary drive, time spans) so the snapshot
//! in a result record reproduces the run on its own.

use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sqzcav_core::models::Tier;
use sqzcav_core::{bloch_rates, solve_aux_drive, MhzInputs, RateModel, RegimeThresholds, StepControls, SystemConfig};

pub const SCHEMA: &str = "sqzcav-config/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default = "default_tier")]
    pub tier: String,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub bloch: BlochSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub nogo: NogoSection,
    #[serde(default)]
    pub controls: ControlsSection,
    #[serde(default)]
    pub thresholds: ThresholdsSection,
}

fn default_tier() -> String {
    "T4R".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub g: f64,
    pub kappa: f64,
    pub delta: f64,
    pub omega_r: f64,
    pub delta_r: f64,
    /// Raman laser phase in radians.
    pub phi: f64,
    /// Auxiliary Rabi frequency; solved from the balance condition when
    /// absent and a four-level tier is involved.
    pub omega_s: Option<f64>,
    pub delta_s: f64,
    /// Also the linewidth of the two-level reference tier.
    pub gamma_r: f64,
    pub gamma_s: f64,
    pub b0: f64,
    pub b1: f64,
    pub n: f64,
    pub m_re: f64,
    pub m_im: f64,
    pub n_max: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        let r = MhzInputs::reference();
        Self {
            g: r.g,
            kappa: r.kappa,
            delta: r.delta,
            omega_r: r.omega_r,
            delta_r: r.delta_r,
            phi: r.phi,
            omega_s: None,
            delta_s: r.delta_s,
            gamma_r: r.gamma_r,
            gamma_s: r.gamma_s,
            b0: r.b0,
            b1: r.b1,
            n: r.n,
            m_re: r.m_re,
            m_im: r.m_im,
            n_max: r.n_max,
        }
    }
}

impl SystemSection {
    fn inputs(&self) -> MhzInputs {
        MhzInputs {
            g: self.g,
            kappa: self.kappa,
            delta: self.delta,
            omega_r: self.omega_r,
            delta_r: self.delta_r,
            phi: self.phi,
            omega_s: self.omega_s.unwrap_or(0.0),
            delta_s: self.delta_s,
            gamma_r: self.gamma_r,
            gamma_s: self.gamma_s,
            b0: self.b0,
            b1: self.b1,
            n: self.n,
            m_re: self.m_re,
            m_im: self.m_im,
            n_max: self.n_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeMode {
    Single,
    Sym,
    Antisym,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    pub mode: ProbeMode,
    /// `[re, im]` of ℰ₊ in MHz; the other modes derive ℰ₋ from it.
    pub e_plus: [f64; 2],
    /// `[re, im]` of ℰ₋, used by the custom mode only.
    pub e_minus: [f64; 2],
    pub nu_max: f64,
    pub points: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { mode: ProbeMode::Antisym, e_plus: [0.01, 0.0], e_minus: [0.0, 0.0], nu_max: 3.0, points: 801 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlochSection {
    /// Defaults to six decay times of the slowest closed-form rate.
    pub t_final_us: Option<f64>,
    pub samples: usize,
    /// Initial Bloch vector of the ground states.
    pub initial: [f64; 3],
}

impl Default for BlochSection {
    fn default() -> Self {
        let c = 1.0 / 3f64.sqrt();
        Self { t_final_us: None, samples: 400, initial: [c, c, c] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub tier_a: String,
    pub tier_b: String,
    /// Defaults to `3κ/β_r²`.
    pub t_final_us: Option<f64>,
    pub samples: usize,
    pub initial: [f64; 3],
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { tier_a: "T4I".into(), tier_b: "T4R".into(), t_final_us: None, samples: 200, initial: [0.6, 0.5, 0.3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NogoSection {
    pub points: usize,
}

impl Default for NogoSection {
    fn default() -> Self {
        Self { points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlsSection {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ControlsSection {
    fn default() -> Self {
        let c = StepControls::default();
        Self { rtol: c.rtol, atol: c.atol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsSection {
    pub adiabatic: f64,
    pub pumping: f64,
    pub bad_cavity: f64,
    pub phase_damping: f64,
    pub cooperativity: f64,
    pub alpha_balance: f64,
}

impl Default for ThresholdsSection {
    fn default() -> Self {
        let t = RegimeThresholds::default();
        Self {
            adiabatic: t.adiabatic,
            pumping: t.pumping,
            bad_cavity: t.bad_cavity,
            phase_damping: t.phase_damping,
            cooperativity: t.cooperativity,
            alpha_balance: t.alpha_balance,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            system: SystemSection::default(),
            tier: default_tier(),
            probe: ProbeSection::default(),
            bloch: BlochSection::default(),
            compare: CompareSection::default(),
            nogo: NogoSection::default(),
            controls: ControlsSection::default(),
            thresholds: ThresholdsSection::default(),
        }
    }
}

/// Parses a config document, reporting the offending field path and position.
pub fn parse(text: &str, origin: &str) -> anyhow::Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        anyhow::anyhow!("{origin}: field `{path}`: {inner}")
    })?;
    if cfg.schema != SCHEMA {
        bail!("{origin}: unsupported schema `{}` (expected `{SCHEMA}`)", cfg.schema);
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text, &path.display().to_string())
}

pub fn parse_tier(name: &str) -> anyhow::Result<Tier> {
    Tier::parse(name).ok_or_else(|| anyhow::anyhow!("unknown tier `{name}` (expected one of T0, T3F, T3E, T3R, T4F, T4I, T4R)"))
}

fn involves_four_level(cfg: &RunConfig) -> anyhow::Result<bool> {
    let tiers = [&cfg.tier, &cfg.compare.tier_a, &cfg.compare.tier_b];
    let mut four = false;
    for t in tiers {
        four |= parse_tier(t)?.scheme() == Some(sqzcav_core::LevelScheme::FourLevel);
    }
    Ok(four)
}

impl RunConfig {
    /// Physical parameters in angular units.
    pub fn system_config(&self) -> anyhow::Result<SystemConfig> {
        Ok(self.system.inputs().to_config()?)
    }

    pub fn step_controls(&self) -> StepControls {
        StepControls::default().with_tolerances(self.controls.rtol, self.controls.atol)
    }

    pub fn regime_thresholds(&self) -> RegimeThresholds {
        let t = &self.thresholds;
        RegimeThresholds {
            adiabatic: t.adiabatic,
            pumping: t.pumping,
            bad_cavity: t.bad_cavity,
            phase_damping: t.phase_damping,
            cooperativity: t.cooperativity,
            alpha_balance: t.alpha_balance,
        }
    }

    /// Validates every field and fills the derived defaults. Idempotent.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut out = self.clone();
        for t in [&out.tier, &out.compare.tier_a, &out.compare.tier_b] {
            parse_tier(t)?;
        }
        if out.system.omega_s.is_none() {
            let mut omega_s = 0.0;
            if involves_four_level(&out)? {
                let cfg = out.system_config()?;
                omega_s = solve_aux_drive(&cfg, cfg.aux.delta_s).context("cannot balance the ground-state shifts")? / TAU;
            }
            out.system.omega_s = Some(omega_s);
        }
        let cfg = out.system_config()?;
        if !(out.controls.rtol > 0.0 && out.controls.atol > 0.0) {
            bail!("controls: rtol and atol must be positive");
        }
        let p = &out.probe;
        if !(p.nu_max >= 0.0 && p.nu_max.is_finite()) || p.points == 0 {
            bail!("probe: nu_max must be finite and >= 0 and points >= 1");
        }
        if p.e_plus.iter().chain(&p.e_minus).any(|v| !v.is_finite()) {
            bail!("probe: amplitudes must be finite");
        }
        if out.bloch.samples < 2 || out.compare.samples < 2 {
            bail!("bloch/compare: need at least two samples");
        }
        if out.nogo.points < 2 {
            bail!("nogo: need at least two grid points");
        }
        for v in [out.bloch.initial, out.compare.initial] {
            if v.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-12 {
                bail!("initial Bloch vectors must have length <= 1");
            }
        }
        if out.bloch.t_final_us.is_none() {
            let tier = parse_tier(&out.tier)?;
            let slowest = closed_form_rates(tier, &cfg)
                .map(|r| r.gamma_x.min(r.gamma_y).min(r.gamma_z))
                .unwrap_or(cfg.beta_r().powi(2) / cfg.cavity.kappa);
            out.bloch.t_final_us = Some(6.0 / slowest);
        }
        if out.compare.t_final_us.is_none() {
            out.compare.t_final_us = Some(3.0 * cfg.cavity.kappa / cfg.beta_r().powi(2));
        }
        for t in [out.bloch.t_final_us, out.compare.t_final_us].into_iter().flatten() {
            if !(t > 0.0 && t.is_finite()) {
                bail!("time spans must be positive and finite");
            }
        }
        Ok(out)
    }
}

/// Closed-form Bloch rates of the reduced equation belonging to a tier.
pub fn closed_form_rates(tier: Tier, cfg: &SystemConfig) -> sqzcav_core::Result<sqzcav_core::BlochRates> {
    let model = match tier.scheme() {
        None => RateModel::T0 { gamma: cfg.decay.gamma_r, squeezing: cfg.squeezing },
        Some(sqzcav_core::LevelScheme::ThreeLevel) => RateModel::T3R(*cfg),
        Some(sqzcav_core::LevelScheme::FourLevel) => RateModel::T4R(*cfg),
    };
    bloch_rates(&model)
}
