//! Two-time correlators by the quantum regression theorem.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrate::{propagate_visit, StepControls};
use crate::liouvillian::Liouvillian;
use crate::operator::{DensityMatrix, OperatorMatrix, C64};

fn regress(
    l: &Liouvillian,
    a: &OperatorMatrix,
    x0: &OperatorMatrix,
    taus: &[f64],
    controls: &StepControls,
) -> Result<Vec<C64>> {
    if !l.is_static() {
        return Err(Error::TimeDependentGenerator);
    }
    if a.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: a.dim() });
    }
    let at = a.dagger();
    let mut out = Vec::with_capacity(taus.len());
    // tr(A X) = Σ_ij A_ij X_ji, read straight off the streamed state
    propagate_visit(l, x0, 0.0, taus, controls, |_, _, x| {
        let mut acc = C64::new(0.0, 0.0);
        for (&ad, &xv) in at.as_slice().iter().zip(x) {
            acc += ad.conj() * xv;
        }
        out.push(acc);
        Ok(())
    })?;
    Ok(out)
}

/// `⟨A(τ)B⟩ = tr(A Λ_τ(Bρ))` on an ascending grid of `τ ≥ 0`.
pub fn two_time_correlator(
    l: &Liouvillian,
    rho: &DensityMatrix,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    taus: &[f64],
    controls: &StepControls,
) -> Result<Vec<C64>> {
    let x0 = b.matmul(rho.op())?;
    regress(l, a, &x0, taus, controls)
}

/// `⟨[A(τ), B]⟩ = tr(A Λ_τ(Bρ − ρB))`.
pub fn commutator_correlator(
    l: &Liouvillian,
    rho: &DensityMatrix,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    taus: &[f64],
    controls: &StepControls,
) -> Result<Vec<C64>> {
    let x0 = b.commutator(rho.op())?;
    regress(l, a, &x0, taus, controls)
}
