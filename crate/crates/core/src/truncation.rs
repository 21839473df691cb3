//! Fock-space truncation diagnostics.

use crate::error::{Error, Result};
use crate::operator::DensityMatrix;

/// Population limit on the two highest retained Fock levels.
pub const TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub n_max: usize,
    /// Population of Fock levels `n_max − 1` and `n_max`.
    pub tail_population: f64,
    pub pass: bool,
}

/// Tail check for a state on `atom ⊗ Fock(n_max)` with the atom as the
/// leading tensor factor.
pub fn check_truncation(rho: &DensityMatrix, atom_dim: usize) -> Result<TruncationReport> {
    let d = rho.dim();
    if atom_dim == 0 || d % atom_dim != 0 || d / atom_dim < 2 {
        return Err(Error::InvalidParameter("state dimension is not atom_dim × (n_max + 1)".into()));
    }
    let fock = d / atom_dim;
    let cavity = rho.op().partial_trace_first(atom_dim, fock)?;
    let tail = (cavity.get(fock - 1, fock - 1) + cavity.get(fock - 2, fock - 2)).re;
    Ok(TruncationReport { n_max: fock - 1, tail_population: tail, pass: tail < TAIL_LIMIT })
}
