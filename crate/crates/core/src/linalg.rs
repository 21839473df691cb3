//! Dense kernels not tied to the operator type: Hermitian spectra and a
//! pivoted LU factorization with adjoint solves.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::operator::{C64, ZERO};
#[allow(unused_imports)]
use num_traits::Float;

/// Ascending eigenvalues of a row-major Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(dim: usize, data: &[C64]) -> Vec<f64> {
    if dim == 1 {
        return vec![data[0].re];
    }
    if dim == 2 {
        let a = data[0].re;
        let d = data[3].re;
        let b = data[1];
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - r, mean + r];
    }
    // symmetrize so tiny non-Hermitian noise cannot leak into the solver
    let m = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (data[i * dim + j] + data[j * dim + i].conj()));
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// LU factorization with partial pivoting, `P·A = L·U`, row-major.
pub(crate) struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot is exactly zero.
    pub(crate) fn factor(n: usize, mut a: Vec<C64>) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].norm();
            for i in (k + 1)..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = C64::new(1.0, 0.0) / a[k * n + k];
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n + k + 1..k * n + n];
            for i in 0..(n - k - 1) {
                let row = &mut tail[i * n..(i + 1) * n];
                let l = row[k] * inv;
                row[k] = l;
                if l == ZERO {
                    continue;
                }
                for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                    *x -= l * u;
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    /// Solves `A x = b`.
    pub(crate) fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    /// Solves `A† y = b`.
    pub(crate) fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        // A† = U† L† P, so solve U† z = b, L† w = z, then y = Pᵀ w
        let n = self.n;
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * n + i].conj() * z[j];
            }
            z[i] = s / self.lu[i * n + i].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i].conj() * z[j];
            }
            z[i] = s;
        }
        let mut y = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = z[k];
        }
        y
    }

    /// Estimate of the smallest singular value by inverse iteration on `(A A†)⁻¹`.
    pub(crate) fn min_singular_value(&self, iterations: usize) -> f64 {
        let n = self.n;
        // deterministic, non-degenerate start vector
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05)).collect();
        normalize(&mut v);
        let mut estimate = f64::INFINITY;
        for _ in 0..iterations {
            let w = self.solve_adjoint(&v);
            let mut u = self.solve(&w);
            let growth = norm(&u);
            if !growth.is_finite() || growth == 0.0 {
                return 0.0;
            }
            let next = 1.0 / growth.sqrt();
            for z in u.iter_mut() {
                *z /= growth;
            }
            v = u;
            let converged = (next - estimate).abs() <= 1e-6 * next;
            estimate = next;
            if converged {
                break;
            }
        }
        estimate
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) {
    let n = norm(v);
    for z in v.iter_mut() {
        *z /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lu_solves_and_adjoint_solves() {
        let a = vec![c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(1.0, 1.0), c(2.0, 0.0), c(-1.0, 0.5)];
        let lu = Lu::factor(3, a.clone()).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let x = lu.solve(&b);
        for i in 0..3 {
            let r: C64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - b[i]).norm() < 1e-13);
        }
        let y = lu.solve_adjoint(&b);
        for i in 0..3 {
            let r: C64 = (0..3).map(|j| a[j * 3 + i].conj() * y[j]).sum();
            assert!((r - b[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn smallest_singular_value_of_diagonal() {
        let a = vec![c(3.0, 0.0), ZERO, ZERO, ZERO, c(0.0, 0.25), ZERO, ZERO, ZERO, c(-2.0, 0.0)];
        let lu = Lu::factor(3, a).unwrap();
        assert!((lu.min_singular_value(200) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn eigenvalues_match_closed_form_for_2x2() {
        let data = [c(1.0, 0.0), c(0.3, -0.4), c(0.3, 0.4), c(-1.0, 0.0)];
        let ev = hermitian_eigenvalues(2, &data);
        let r = (1.0f64 + 0.25).sqrt();
        assert!((ev[0] + r).abs() < 1e-14 && (ev[1] - r).abs() < 1e-14);
    }
}
