//! Adaptive Dormand–Prince 5(4) propagation of matrix-valued master equations.
//!
//! The integrator works on the `d × d` operator directly; the `d² × d²`
//! superoperator is never formed here.

use alloc::vec;
use alloc::vec::Vec;


use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::operator::{DensityMatrix, OperatorMatrix, StateTolerances, C64, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

/// Step-size control and state-validation tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the generator when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
    pub tol_trace: f64,
    pub tol_herm: f64,
    /// Most negative eigenvalue tolerated in an emitted state.
    pub tol_positivity: f64,
    /// Largest Hilbert-space dimension solved through the dense superoperator.
    pub dense_steady_max_dim: usize,
    /// Convergence threshold on `max |dρ/dt|` for the integrating steady-state fallback.
    pub steady_residual: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 50_000_000,
            tol_trace: 1e-9,
            tol_herm: 1e-8,
            tol_positivity: 1e-6,
            dense_steady_max_dim: 64,
            steady_residual: 1e-10,
        }
    }
}

impl StepControls {
    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub(crate) fn state_tolerances(&self) -> StateTolerances {
        StateTolerances { hermiticity: self.tol_herm, trace: self.tol_trace, positivity: self.tol_positivity }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter("rtol and atol must be positive".into()));
        }
        if !(self.h_max > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidParameter("h_max and max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Sampled solution of a master equation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    /// `⟨A⟩(t)` along the trajectory.
    pub fn expectation(&self, a: &OperatorMatrix) -> Result<Vec<f64>> {
        self.states.iter().map(|s| s.expect(a)).collect()
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }
}

/// `n` equally spaced times on `[0, t_final]`, both ends included.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|k| t_final * k as f64 / (n - 1) as f64).collect()
}

// Dormand–Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stepper<'a> {
    l: &'a Liouvillian,
    ctl: StepControls,
    n: usize,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
    steps: usize,
}

impl<'a> Stepper<'a> {
    fn new(l: &'a Liouvillian, ctl: StepControls) -> Self {
        let n = l.dim() * l.dim();
        Self {
            l,
            ctl,
            n,
            k: core::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
            steps: 0,
        }
    }

    fn error_scale(&self, a: C64, b: C64) -> f64 {
        self.ctl.atol + self.ctl.rtol * a.norm().max(b.norm())
    }

    fn initial_step(&mut self, t: f64, y: &[C64], span: f64) -> f64 {
        if let Some(h) = self.ctl.h_init {
            return h.min(span);
        }
        // Hairer–Nørsett–Wanner starting-step heuristic
        self.l.apply_into(t, y, &mut self.k[0]);
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..self.n {
            let sc = self.error_scale(y[i], y[i]);
            d0 += (y[i].norm() / sc).powi(2);
            d1 += (self.k[0][i].norm() / sc).powi(2);
        }
        d0 = (d0 / self.n as f64).sqrt();
        d1 = (d1 / self.n as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        for i in 0..self.n {
            self.stage[i] = y[i] + self.k[0][i] * h0;
        }
        let (stage, k1) = (&self.stage, &mut self.k[1]);
        self.l.apply_into(t + h0, stage, k1);
        let mut d2 = 0.0;
        for i in 0..self.n {
            let sc = self.error_scale(y[i], y[i]);
            d2 += ((self.k[1][i] - self.k[0][i]).norm() / sc).powi(2);
        }
        d2 = (d2 / self.n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span).min(self.ctl.h_max)
    }

    /// Attempts one step of size `h`; on success `y_new` holds the result and
    /// the scaled error norm is returned.
    fn attempt(&mut self, t: f64, y: &[C64], h: f64) -> f64 {
        let n = self.n;
        let l = self.l;
        self.l.apply_into(t, y, &mut self.k[0]);
        let stages: [(f64, &[f64]); 5] = [
            (C2, &[A21]),
            (C3, &[A31, A32]),
            (C4, &[A41, A42, A43]),
            (C5, &[A51, A52, A53, A54]),
            (1.0, &[A61, A62, A63, A64, A65]),
        ];
        for (s, (c, a)) in stages.iter().enumerate() {
            for i in 0..n {
                let mut acc = ZERO;
                for (j, &aj) in a.iter().enumerate() {
                    acc += self.k[j][i] * aj;
                }
                self.stage[i] = y[i] + acc * h;
            }
            let (head, tail) = self.k.split_at_mut(s + 1);
            let _ = head;
            l.apply_into(t + c * h, &self.stage, &mut tail[0]);
        }
        for i in 0..n {
            let k = &self.k;
            self.y_new[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        let (y_new, k6) = (&self.y_new, &mut self.k[6]);
        l.apply_into(t + h, y_new, k6);
        let mut err = 0.0;
        for i in 0..n {
            let k = &self.k;
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = self.error_scale(y[i], self.y_new[i]);
            err += (e.norm() / sc).powi(2);
        }
        (err / n as f64).sqrt()
    }

    /// Takes one accepted step, never past `t_end`. Afterwards `y` holds the
    /// new state, `y_new` the previous one and `k` the stages of the step;
    /// returns the step size used.
    fn step(&mut self, t: &mut f64, y: &mut Vec<C64>, t_end: f64, h: &mut f64) -> Result<f64> {
        loop {
            if self.steps >= self.ctl.max_steps {
                return Err(Error::MaxStepsExceeded { t: *t });
            }
            let remaining = t_end - *t;
            let last = *h >= remaining;
            let step = if last { remaining } else { *h };
            let err = self.attempt(*t, y, step);
            self.steps += 1;
            if !err.is_finite() {
                return Err(Error::NonFinite { t: *t });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *t = if last { t_end } else { *t + step };
                core::mem::swap(y, &mut self.y_new);
                // a step shortened to hit the end time does not shrink the proposal
                let base = if last { h.max(step) } else { step };
                *h = (base * factor).min(self.ctl.h_max);
                return Ok(step);
            }
            *h = step * factor.min(1.0);
            if *h < self.ctl.h_min {
                return Err(Error::StepSizeUnderflow { t: *t });
            }
        }
    }

    /// Fourth-order continuous extension of the last step at fraction
    /// `theta` of its length.
    fn interpolate(&self, y1: &[C64], h: f64, theta: f64, out: &mut [C64]) {
        let y0 = &self.y_new;
        let k = &self.k;
        let th1 = 1.0 - theta;
        for i in 0..self.n {
            let diff = y1[i] - y0[i];
            let bspl = k[0][i] * h - diff;
            let r4 = diff - k[6][i] * h - bspl;
            let r5 = (k[0][i] * D1 + k[2][i] * D3 + k[3][i] * D4 + k[4][i] * D5 + k[5][i] * D6 + k[6][i] * D7) * h;
            out[i] = y0[i] + (diff + (bspl + (r4 + r5 * th1) * theta) * th1) * theta;
        }
    }
}

/// Propagates an arbitrary operator `x0` (not necessarily a state) from `t0`
/// and returns it at each of `times` (ascending, all `≥ t0`).
pub fn propagate(
    l: &Liouvillian,
    x0: &OperatorMatrix,
    t0: f64,
    times: &[f64],
    controls: &StepControls,
) -> Result<Vec<OperatorMatrix>> {
    propagate_with(l, x0, t0, times, controls, |_, _| Ok(()))
}

fn propagate_with(
    l: &Liouvillian,
    x0: &OperatorMatrix,
    t0: f64,
    times: &[f64],
    controls: &StepControls,
    mut check: impl FnMut(f64, &OperatorMatrix) -> Result<()>,
) -> Result<Vec<OperatorMatrix>> {
    let d = l.dim();
    let mut out = Vec::with_capacity(times.len());
    propagate_visit(l, x0, t0, times, controls, |_, t, y| {
        let op = OperatorMatrix::from_row_major(d, y.to_vec())?;
        check(t, &op)?;
        out.push(op);
        Ok(())
    })?;
    Ok(out)
}

/// Streams the solution at each output time to `visit(index, t, row-major x)`
/// without retaining it. Steps are chosen by the error controller alone;
/// output times inside a step use the method's continuous extension.
pub(crate) fn propagate_visit(
    l: &Liouvillian,
    x0: &OperatorMatrix,
    t0: f64,
    times: &[f64],
    controls: &StepControls,
    mut visit: impl FnMut(usize, f64, &[C64]) -> Result<()>,
) -> Result<()> {
    controls.validate()?;
    if x0.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: x0.dim() });
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter("output times must be ascending and >= t0".into()));
    }
    let mut stepper = Stepper::new(l, *controls);
    let mut y = x0.as_slice().to_vec();
    let mut t = t0;
    let t_end = times.last().copied().unwrap_or(t0);
    let mut h = if t_end > t0 { stepper.initial_step(t, &y, t_end - t0) } else { 0.0 };
    let mut buf = vec![ZERO; y.len()];
    let mut next = 0;
    while next < times.len() && times[next] <= t {
        visit(next, times[next], &y)?;
        next += 1;
    }
    while next < times.len() {
        let t_prev = t;
        let used = stepper.step(&mut t, &mut y, t_end, &mut h)?;
        while next < times.len() && times[next] <= t {
            let te = times[next];
            if te == t {
                visit(next, te, &y)?;
            } else {
                stepper.interpolate(&y, used, (te - t_prev) / used, &mut buf);
                visit(next, te, &buf)?;
            }
            next += 1;
        }
    }
    Ok(())
}

/// Integrates a density matrix and validates every emitted state. Trace is
/// never renormalized; a violation beyond tolerance is an error.
pub fn evolve_at(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    controls: &StepControls,
) -> Result<Trajectory> {
    let tol = controls.state_tolerances();
    let ops = propagate_with(l, rho0.op(), 0.0, times, controls, |t, op| DensityMatrix::validate(op, tol, t))?;
    Ok(Trajectory { times: times.to_vec(), states: ops.into_iter().map(DensityMatrix::new_unchecked).collect() })
}

/// [`evolve_at`] on `n_samples` uniform times over `[0, t_final]`.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_final: f64,
    n_samples: usize,
    controls: &StepControls,
) -> Result<Trajectory> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter("t_final must be positive".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    evolve_at(l, rho0, &uniform_times(t_final, n_samples), controls)
}
