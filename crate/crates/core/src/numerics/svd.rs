//! Square complex SVD by one-sided Jacobi rotations.
//!
//! Columns of a working copy `B = A·V` are rotated pairwise until they are
//! mutually orthogonal; then `σ_j = ‖b_j‖` and `u_j = b_j / σ_j`. Each
//! rotation first removes the phase of the column inner product so the
//! remaining 2×2 problem is the real symmetric one.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// `m = u · diag(singular_values) · v†` with singular values nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let s = ComplexMatrix::from_real_diag(&self.singular_values);
        &(&self.u * &s) * &self.v.adjoint()
    }
}

/// Rotation `(c, s)` zeroing the off-diagonal of the real symmetric block
/// `[[a, g], [g, b]]` with `g > 0`; columns map as `p ← c·p − s·q`, `q ← s·p + c·q`.
#[inline]
pub(crate) fn jacobi_rotation(a: f64, b: f64, g: f64) -> (f64, f64) {
    let zeta = (b - a) / (2.0 * g);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
    } else {
        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

/// Applies `[col_p, col_q] ← [col_p, col_q · phase] · [[c, s], [−s, c]]` on a row-major buffer.
#[inline]
fn rotate_columns(data: &mut [C64], n: usize, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    for row in data.chunks_exact_mut(n) {
        let bp = row[p];
        let bq = row[q] * phase;
        row[p] = bp * c - bq * s;
        row[q] = bp * s + bq * c;
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }

    let mut b: Vec<C64> = m.data().to_vec();
    let mut v: Vec<C64> = ComplexMatrix::identity(n).data().to_vec();
    let tol = n as f64 * f64::EPSILON;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for row in b.chunks_exact(n) {
                    alpha += row[p].norm_sqr();
                    beta += row[q].norm_sqr();
                    gamma += row[p].conj() * row[q];
                }
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let (c, s) = jacobi_rotation(alpha, beta, g);
                rotate_columns(&mut b, n, p, q, c, s, phase);
                rotate_columns(&mut v, n, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let b = ComplexMatrix::new(n, n, b)?;
    let v = ComplexMatrix::new(n, n, v)?;
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let sigma_max = norms[order[0]];
    let cutoff = sigma_max * 1e-13;
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v_sorted = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut filled = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        singular_values.push(norms[j]);
        v_sorted.set_column(k, &v.column(j));
        if norms[j] > cutoff && norms[j] > 0.0 {
            let inv = 1.0 / norms[j];
            let col: Vec<C64> = b.column(j).iter().map(|z| z * inv).collect();
            u.set_column(k, &col);
            filled.push(k);
        }
    }
    complete_orthonormal_columns(&mut u, &filled);

    Ok(SvdResult {
        u,
        singular_values,
        v: v_sorted,
    })
}

/// Fills every column not listed in `filled` with a unit vector orthogonal to all
/// previously fixed columns, so that `u` becomes unitary.
pub(crate) fn complete_orthonormal_columns(u: &mut ComplexMatrix, filled: &[usize]) {
    let n = u.rows();
    let mut basis: Vec<Vec<C64>> = filled.iter().map(|&k| u.column(k)).collect();
    for k in 0..u.cols() {
        if filled.contains(&k) {
            continue;
        }
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..n {
            let mut w: Vec<C64> = (0..n).map(|i| if i == e { ONE } else { ZERO }).collect();
            // two passes of Gram–Schmidt keep the completion orthogonal to rounding
            for _ in 0..2 {
                for q in &basis {
                    let proj: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= proj * qi;
                    }
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, w));
            }
        }
        let (norm, w) = best.expect("dimension is positive");
        let col: Vec<C64> = w.iter().map(|z| z / norm).collect();
        u.set_column(k, &col);
        basis.push(col);
    }
}
