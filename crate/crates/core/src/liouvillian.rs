//! Master-equation generators.
//!
//! A generator is a Hamiltonian (with optional harmonic time-dependent terms)
//! plus a list of generalized dissipator channels, each contributing
//! `w·e^{iωt}·(2AρB − BAρ − ρBA)`. The anomalous squeezing terms `2a†ρa†` do
//! not fit the usual `D[c]` form, hence the explicit `(A, B)` pair.
//!
//! For application the generator is compiled once into sparse left, right and
//! sandwich terms, so that `dρ/dt = G(t)ρ + ρG'(t) + Σ c_k(t) A_k ρ B_k`.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, C64, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

const TOL_HERM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DissipatorChannel {
    pub weight: C64,
    pub left: OperatorMatrix,
    pub right: OperatorMatrix,
    /// Angular frequency of the `e^{iωt}` factor carried by the channel.
    pub phase: f64,
}

impl DissipatorChannel {
    pub fn new(weight: C64, left: OperatorMatrix, right: OperatorMatrix) -> Self {
        Self { weight, left, right, phase: 0.0 }
    }

    /// Standard Lindblad channel `γ(2cρc† − c†cρ − ρc†c)`.
    pub fn lindblad(rate: f64, c: &OperatorMatrix) -> Self {
        Self::new(C64::new(rate, 0.0), c.clone(), c.dagger())
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// The channel whose contribution is the Hermitian conjugate of this one.
    pub fn conjugate_partner(&self) -> Self {
        Self {
            weight: self.weight.conj(),
            left: self.right.dagger(),
            right: self.left.dagger(),
            phase: -self.phase,
        }
    }
}

/// Sparse copy of an operator used on the hot path.
#[derive(Debug, Clone, PartialEq)]
struct Sparse {
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_dense(op: &OperatorMatrix) -> Self {
        let d = op.dim();
        let mut entries = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let v = op.get(i, j);
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Self { entries }
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `out += s · (self · x)`
    fn left_mul_acc(&self, d: usize, s: C64, x: &[C64], out: &mut [C64]) {
        for &(i, k, v) in &self.entries {
            let f = s * v;
            let src = &x[k * d..(k + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (o, &xv) in dst.iter_mut().zip(src) {
                *o += f * xv;
            }
        }
    }

    /// `out += s · (x · self)`
    fn right_mul_acc(&self, d: usize, s: C64, x: &[C64], out: &mut [C64]) {
        for &(k, j, v) in &self.entries {
            let f = s * v;
            for r in 0..d {
                out[r * d + j] += x[r * d + k] * f;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PhasedSparse {
    op: Sparse,
    coeff: C64,
    phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Sandwich {
    left: Sparse,
    right: Sparse,
    coeff: C64,
    phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Compiled {
    static_left: Sparse,
    static_right: Sparse,
    timed_left: Vec<PhasedSparse>,
    timed_right: Vec<PhasedSparse>,
    sandwiches: Vec<Sandwich>,
}

#[inline]
fn phase_factor(omega: f64, t: f64) -> C64 {
    if omega == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        let (s, c) = (omega * t).sin_cos();
        C64::new(c, s)
    }
}

/// Generator `ρ̇ = −i[H(t), ρ] + Σ channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    dim: usize,
    hamiltonian: OperatorMatrix,
    ham_phases: Vec<(OperatorMatrix, f64)>,
    channels: Vec<DissipatorChannel>,
    compiled: Compiled,
    /// Assembled superoperator, present for static generators.
    csr: Option<Csr>,
}

/// Compressed-row superoperator acting on row-major `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

impl Csr {
    fn assemble(d: usize, c: &Compiled) -> Self {
        let n = d * d;
        let mut triplets: Vec<(u32, u32, C64)> = Vec::new();
        for &(i, k, v) in &c.static_left.entries {
            for j in 0..d {
                triplets.push(((i * d + j) as u32, (k * d + j) as u32, v));
            }
        }
        for &(k, j, v) in &c.static_right.entries {
            for r in 0..d {
                triplets.push(((r * d + j) as u32, (r * d + k) as u32, v));
            }
        }
        for s in &c.sandwiches {
            for &(i, k, a) in &s.left.entries {
                for &(l, j, b) in &s.right.entries {
                    triplets.push(((i * d + j) as u32, (k * d + l) as u32, s.coeff * a * b));
                }
            }
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { row_ptr, cols, vals }
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p] as usize];
            }
            *o = acc;
        }
    }
}

#[derive(Debug, Clone)]
pub struct LiouvillianBuilder {
    dim: usize,
    hamiltonian: OperatorMatrix,
    ham_phases: Vec<(OperatorMatrix, f64)>,
    channels: Vec<DissipatorChannel>,
}

impl LiouvillianBuilder {
    pub fn hamiltonian(mut self, h: OperatorMatrix) -> Self {
        self.hamiltonian = h;
        self
    }

    pub fn add_hamiltonian(mut self, h: &OperatorMatrix) -> Self {
        self.hamiltonian = &self.hamiltonian + h;
        self
    }

    /// Adds `H_k e^{iωt} + h.c.` to the Hamiltonian.
    pub fn phase_term(mut self, h: OperatorMatrix, omega: f64) -> Self {
        self.ham_phases.push((h, omega));
        self
    }

    pub fn channel(mut self, ch: DissipatorChannel) -> Self {
        self.channels.push(ch);
        self
    }

    /// Adds a channel together with its Hermitian-conjugate partner.
    pub fn channel_pair(self, ch: DissipatorChannel) -> Self {
        let partner = ch.conjugate_partner();
        self.channel(ch).channel(partner)
    }

    pub fn build(self) -> Result<Liouvillian> {
        if self.hamiltonian.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.hamiltonian.dim() });
        }
        Liouvillian::new(self.hamiltonian, self.ham_phases, self.channels)
    }
}

impl Liouvillian {
    pub fn builder(dim: usize) -> LiouvillianBuilder {
        LiouvillianBuilder {
            dim,
            hamiltonian: OperatorMatrix::zeros(dim),
            ham_phases: Vec::new(),
            channels: Vec::new(),
        }
    }

    pub fn new(
        hamiltonian: OperatorMatrix,
        ham_phases: Vec<(OperatorMatrix, f64)>,
        channels: Vec<DissipatorChannel>,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        let deviation = hamiltonian.hermiticity_deviation();
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        for (h, w) in &ham_phases {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: h.dim() });
            }
            if !w.is_finite() {
                return Err(Error::InvalidParameter("non-finite Hamiltonian phase frequency".into()));
            }
        }
        for ch in &channels {
            for op in [&ch.left, &ch.right] {
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
                }
            }
            if !ch.weight.re.is_finite() || !ch.weight.im.is_finite() || !ch.phase.is_finite() {
                return Err(Error::InvalidParameter("non-finite channel weight or phase".into()));
            }
        }
        let compiled = compile(dim, &hamiltonian, &ham_phases, &channels);
        let is_static = compiled.timed_left.is_empty() && compiled.sandwiches.iter().all(|s| s.phase == 0.0);
        let csr = is_static.then(|| Csr::assemble(dim, &compiled));
        Ok(Self { dim, hamiltonian, ham_phases, channels, compiled, csr })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn ham_phases(&self) -> &[(OperatorMatrix, f64)] {
        &self.ham_phases
    }

    pub fn channels(&self) -> &[DissipatorChannel] {
        &self.channels
    }

    /// Stored entries of the assembled superoperator, if any.
    pub fn superoperator_nnz(&self) -> Option<usize> {
        self.csr.as_ref().map(|c| c.vals.len())
    }

    pub fn is_static(&self) -> bool {
        self.ham_phases.is_empty() && self.channels.iter().all(|c| c.phase == 0.0)
    }

    /// `dρ/dt` at time `t`.
    pub fn apply(&self, rho: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        let mut out = vec![ZERO; self.dim * self.dim];
        self.apply_into(t, rho.as_slice(), &mut out);
        OperatorMatrix::from_row_major(self.dim, out)
    }

    /// Writes `dρ/dt` for a row-major `ρ` into `out` (overwritten).
    pub(crate) fn apply_into(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        if let Some(csr) = &self.csr {
            csr.apply(rho, out);
            return;
        }
        let d = self.dim;
        let c = &self.compiled;
        out.iter_mut().for_each(|z| *z = ZERO);
        let one = C64::new(1.0, 0.0);
        c.static_left.left_mul_acc(d, one, rho, out);
        c.static_right.right_mul_acc(d, one, rho, out);
        for term in &c.timed_left {
            term.op.left_mul_acc(d, term.coeff * phase_factor(term.phase, t), rho, out);
        }
        for term in &c.timed_right {
            term.op.right_mul_acc(d, term.coeff * phase_factor(term.phase, t), rho, out);
        }
        let mut tmp = vec![ZERO; d * d];
        for s in &c.sandwiches {
            tmp.iter_mut().for_each(|z| *z = ZERO);
            s.left.left_mul_acc(d, one, rho, &mut tmp);
            s.right.right_mul_acc(d, s.coeff * phase_factor(s.phase, t), &tmp, out);
        }
    }

    /// Row-major superoperator `S` (size `d² × d²`) with `vec(L(ρ)) = S·vec(ρ)`
    /// where `vec(ρ)[i·d + j] = ρ[i, j]`.
    pub fn superoperator(&self, t: f64) -> Vec<C64> {
        let d = self.dim;
        let n = d * d;
        let mut s = vec![ZERO; n * n];
        let c = &self.compiled;
        let one = C64::new(1.0, 0.0);
        let add_left = |op: &Sparse, f: C64, s: &mut [C64]| {
            for &(i, k, v) in &op.entries {
                for j in 0..d {
                    s[(i * d + j) * n + k * d + j] += f * v;
                }
            }
        };
        add_left(&c.static_left, one, &mut s);
        for term in &c.timed_left {
            add_left(&term.op, term.coeff * phase_factor(term.phase, t), &mut s);
        }
        let add_right = |op: &Sparse, f: C64, s: &mut [C64]| {
            for &(l, j, v) in &op.entries {
                for i in 0..d {
                    s[(i * d + j) * n + i * d + l] += f * v;
                }
            }
        };
        add_right(&c.static_right, one, &mut s);
        for term in &c.timed_right {
            add_right(&term.op, term.coeff * phase_factor(term.phase, t), &mut s);
        }
        for sw in &c.sandwiches {
            let f = sw.coeff * phase_factor(sw.phase, t);
            for &(i, k, a) in &sw.left.entries {
                for &(l, j, b) in &sw.right.entries {
                    s[(i * d + j) * n + k * d + l] += f * a * b;
                }
            }
        }
        s
    }
}

fn compile(
    dim: usize,
    hamiltonian: &OperatorMatrix,
    ham_phases: &[(OperatorMatrix, f64)],
    channels: &[DissipatorChannel],
) -> Compiled {
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);

    // static parts: G = −iH − Σ w BA, G' = iH − Σ w BA
    let mut left = hamiltonian.scale(minus_i);
    let mut right = hamiltonian.scale(plus_i);
    let mut timed_left = Vec::new();
    let mut timed_right = Vec::new();
    let mut sandwiches = Vec::new();

    for (h, w) in ham_phases {
        let hd = h.dagger();
        for (op, omega) in [(h, *w), (&hd, -*w)] {
            let sp = Sparse::from_dense(op);
            if sp.is_empty() {
                continue;
            }
            timed_left.push(PhasedSparse { op: sp.clone(), coeff: minus_i, phase: omega });
            timed_right.push(PhasedSparse { op: sp, coeff: plus_i, phase: omega });
        }
    }

    for ch in channels {
        if ch.weight == ZERO {
            continue;
        }
        let ba = ch.right.matmul(&ch.left).expect("channel dimensions checked");
        if ch.phase == 0.0 {
            let sub = ba.scale(ch.weight);
            left = &left - &sub;
            right = &right - &sub;
        } else {
            let sp = Sparse::from_dense(&ba);
            if !sp.is_empty() {
                timed_left.push(PhasedSparse { op: sp.clone(), coeff: -ch.weight, phase: ch.phase });
                timed_right.push(PhasedSparse { op: sp, coeff: -ch.weight, phase: ch.phase });
            }
        }
        let (l, r) = (Sparse::from_dense(&ch.left), Sparse::from_dense(&ch.right));
        if !l.is_empty() && !r.is_empty() {
            sandwiches.push(Sandwich { left: l, right: r, coeff: ch.weight * 2.0, phase: ch.phase });
        }
    }
    debug_assert_eq!(left.dim(), dim);

    Compiled {
        static_left: Sparse::from_dense(&left),
        static_right: Sparse::from_dense(&right),
        timed_left,
        timed_right,
        sandwiches,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::two_level::*;
    use crate::operator::DensityMatrix;

    /// Straightforward dense evaluation used as a reference.
    fn reference_apply(l: &Liouvillian, rho: &OperatorMatrix, t: f64) -> OperatorMatrix {
        let mut h = l.hamiltonian().clone();
        for (hk, w) in l.ham_phases() {
            let p = phase_factor(*w, t);
            h = &h + &(&hk.scale(p) + &hk.dagger().scale(p.conj()));
        }
        let mut out = h.commutator(rho).unwrap().scale(C64::new(0.0, -1.0));
        for ch in l.channels() {
            let w = ch.weight * phase_factor(ch.phase, t);
            let (a, b) = (&ch.left, &ch.right);
            let ba = b * a;
            let term = &(&(&(a * rho) * b).scale_real(2.0) - &(&ba * rho)) - &(rho * &ba);
            out = &out + &term.scale(w);
        }
        out
    }

    fn t0_like() -> Liouvillian {
        let m = C64::new(0.6, 0.2);
        Liouvillian::builder(2)
            .hamiltonian(sigma_z().scale_real(0.3))
            .phase_term(sigma_plus().scale_real(0.1), 1.7)
            .channel(DissipatorChannel::lindblad(0.75, &sigma_minus()))
            .channel(DissipatorChannel::lindblad(0.25, &sigma_plus()))
            .channel_pair(DissipatorChannel::new(-m * 0.5, sigma_plus(), sigma_plus()).with_phase(0.9))
            .build()
            .unwrap()
    }

    #[test]
    fn compiled_matches_dense_reference() {
        let l = t0_like();
        let rho = DensityMatrix::from_bloch(0.2, -0.5, 0.3).unwrap();
        for &t in &[0.0, 0.37, 2.5] {
            let got = l.apply(rho.op(), t).unwrap();
            let want = reference_apply(&l, rho.op(), t);
            assert!((&got - &want).max_abs() < 1e-14);
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let l = t0_like();
        let rho = DensityMatrix::from_bloch(0.1, 0.4, -0.6).unwrap();
        let t = 1.3;
        let s = l.superoperator(t);
        let v = rho.op().as_slice();
        let direct = l.apply(rho.op(), t).unwrap();
        for r in 0..4 {
            let acc: C64 = (0..4).map(|c| s[r * 4 + c] * v[c]).sum();
            assert!((acc - direct.as_slice()[r]).norm() < 1e-14);
        }
    }

    #[test]
    fn commuting_hamiltonian_gives_zero() {
        let l = Liouvillian::builder(2).hamiltonian(sigma_z()).build().unwrap();
        let rho = OperatorMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(l.apply(&rho, 4.2).unwrap().max_abs() == 0.0);
        assert!(l.is_static());
    }

    #[test]
    fn spontaneous_decay_rate() {
        let gamma = 1.7;
        let l = Liouvillian::builder(2)
            .channel(DissipatorChannel::lindblad(gamma / 2.0, &sigma_minus()))
            .build()
            .unwrap();
        let d = l.apply(DensityMatrix::basis(2, 1).op(), 0.0).unwrap();
        assert!((d.get(1, 1).re + gamma).abs() < 1e-15);
        assert!((d.get(0, 0).re - gamma).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian_and_mismatched_dims() {
        assert!(matches!(
            Liouvillian::builder(2).hamiltonian(sigma_plus()).build(),
            Err(Error::NotHermitian { .. })
        ));
        let l = Liouvillian::builder(2).build().unwrap();
        assert!(matches!(l.apply(&OperatorMatrix::zeros(3), 0.0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            Liouvillian::builder(2).channel(DissipatorChannel::lindblad(1.0, &OperatorMatrix::zeros(3))).build(),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn time_phase_breaks_static_flag() {
        assert!(!t0_like().is_static());
    }
}
