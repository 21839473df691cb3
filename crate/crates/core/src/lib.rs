//! Open-system models of a Λ-atom coupled to a squeezed-light-driven cavity.
//!
//! The crate is split along the chain of models it simulates:
//!
//! * [`operator`], [`liouvillian`], [`integrate`], [`steady`], [`correlate`] and
//!   [`truncation`] hold the dense operator algebra, generator assembly, the
//!   adaptive Dormand–Prince propagator, steady states and regression
//!   correlators.
//! * [`params`] and [`models`] build the generator of every model tier, from
//!   the full 3/4-level atom in a cavity down to the reduced two-level master
//!   equations.
//! * [`regime`] evaluates closed-form Bloch rates, balances the ground-state
//!   level shifts, checks the validity inequalities and fits decay rates.
//!   the closed forms and from linear response on an effective model.
//!
//! All frequencies are angular frequencies in rad/μs and all times are in μs.
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod correlate;
pub mod error;
pub mod integrate;
pub mod liouvillian;
pub mod models;
pub mod operator;
pub mod params;
pub mod regime;
pub mod spectra;
pub mod steady;
pub mod truncation;

mod linalg;

pub use correlate::{commutator_correlator, two_time_correlator};
pub use error::{Error, Result};
pub use integrate::{evolve, evolve_at, propagate, uniform_times, StepControls, Trajectory};
pub use liouvillian::{DissipatorChannel, Liouvillian, LiouvillianBuilder};
pub use models::{build_model, build_t0, Model, ModelSpace, ModelWarning, Tier};
pub use operator::{
    annihilation, kron, trace_distance, DensityMatrix, FockTruncation, OperatorMatrix, C64,
};
pub use params::{
    AtomDecay, AuxDrive, CavityParams, DerivedParams, MhzInputs, RamanDrive, SqueezingParams,
    SystemConfig,
};
pub use regime::{
    alpha, bloch_rates, check_regime, derived_params, fit_decay, solve_aux_drive,
    three_level_nogo_scan, BlochRates, DecayFit, DecayModel, LevelScheme, RateModel,
    RegimeReport, RegimeThresholds,
};
pub use spectra::{
    lower_sideband_response, probe_analytic, probe_numeric, spectrum_scan, NumericOptions,
    ProbeConfig, ResponseKernel, SpectrumMethod, SpectrumResult, SpectrumWarning,
};
pub use steady::{steady_state, SteadyState, SteadyStateMethod};
pub use truncation::{check_truncation, TruncationReport};
