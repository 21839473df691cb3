//! Stationary states of time-independent generators.

use alloc::vec;

use crate::error::{Error, Result};
use crate::integrate::{propagate, StepControls};
use crate::linalg::Lu;
use crate::liouvillian::Liouvillian;
use crate::operator::{DensityMatrix, OperatorMatrix, C64, ZERO};

/// Smallest singular value of the trace-bordered generator, relative to its
/// largest entry, below which the stationary state is considered non-unique.
pub const UNIQUENESS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStateMethod {
    /// Direct solve of the trace-bordered superoperator.
    Direct,
    /// Long-time integration from the maximally mixed state.
    Integrated,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityMatrix,
    pub method: SteadyStateMethod,
    /// `max |L(ρ_ss)|` of the returned state.
    pub residual: f64,
    /// Relative smallest singular value of the bordered superoperator
    /// (direct path only).
    pub min_singular_value: Option<f64>,
}

/// Unique stationary state of a static generator.
pub fn steady_state(l: &Liouvillian, controls: &StepControls) -> Result<SteadyState> {
    if !l.is_static() {
        return Err(Error::TimeDependentGenerator);
    }
    if l.dim() <= controls.dense_steady_max_dim {
        direct(l, controls)
    } else {
        integrated(l, controls)
    }
}

fn residual(l: &Liouvillian, rho: &OperatorMatrix) -> Result<f64> {
    Ok(l.apply(rho, 0.0)?.max_abs())
}

fn direct(l: &Liouvillian, controls: &StepControls) -> Result<SteadyState> {
    let d = l.dim();
    let n = d * d;
    let mut s = l.superoperator(0.0);
    let scale = s.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return Err(Error::DegenerateSteadyState { sigma: 0.0 });
    }
    // the ρ₀₀ equation is implied by the others through trace preservation;
    // swap it for the normalization condition
    for c in 0..n {
        s[c] = ZERO;
    }
    for i in 0..d {
        s[i * d + i] = C64::new(scale, 0.0);
    }
    let lu = Lu::factor(n, s).ok_or(Error::DegenerateSteadyState { sigma: 0.0 })?;
    let sigma = lu.min_singular_value(200) / scale;
    if !(sigma > UNIQUENESS_THRESHOLD) {
        return Err(Error::DegenerateSteadyState { sigma });
    }
    let mut rhs = vec![ZERO; n];
    rhs[0] = C64::new(scale, 0.0);
    let x = lu.solve(&rhs);
    let raw = OperatorMatrix::from_row_major(d, x)?;
    let op = symmetrize(&raw);
    let residual = residual(l, &op)?;
    let state = DensityMatrix::with_tolerances(op, controls.state_tolerances())?;
    Ok(SteadyState { state, method: SteadyStateMethod::Direct, residual, min_singular_value: Some(sigma) })
}

fn symmetrize(op: &OperatorMatrix) -> OperatorMatrix {
    let sym = (op + &op.dagger()).scale_real(0.5);
    let tr = sym.trace().re;
    sym.scale_real(1.0 / tr)
}

fn integrated(l: &Liouvillian, controls: &StepControls) -> Result<SteadyState> {
    let d = l.dim();
    // the stopping criterion is absolute, so the local error must sit well below it
    let ctl = StepControls { rtol: controls.rtol.min(1e-11), atol: controls.atol.min(1e-14), ..*controls };
    let mut rho = DensityMatrix::maximally_mixed(d).into_op();
    let mut res = residual(l, &rho)?;
    let mut chunk = if res > 0.0 { 1.0 / res } else { 1.0 };
    let mut stalled = 0;
    while res >= controls.steady_residual {
        let out = propagate(l, &rho, 0.0, &[chunk], &ctl)?;
        rho = out.into_iter().next().expect("one output time");
        let next = residual(l, &rho)?;
        if next > 0.9 * res {
            stalled += 1;
            if stalled >= 4 {
                return Err(Error::NotConverged { residual: next });
            }
        } else {
            stalled = 0;
        }
        if next > 0.1 * res {
            chunk *= 2.0;
        }
        res = next;
    }
    let op = symmetrize(&rho);
    let state = DensityMatrix::with_tolerances(op, controls.state_tolerances())?;
    Ok(SteadyState { state, method: SteadyStateMethod::Integrated, residual: res, min_singular_value: None })
}
