use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::matrix::{ComplexMatrix, RealMatrix, C64, ZERO};
use super::svd::svd;
use crate::error::{Error, Result};

/// Thin Householder QR of an `m × n` matrix with `m ≥ n`: `a = q · r`, `q` has
/// orthonormal columns, `r` is `n × n` upper triangular.
pub fn qr(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidArgument(
            "qr needs at least as many rows as columns",
        ));
    }
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(n);

    for k in 0..n {
        let x: Vec<C64> = (k..m).map(|i| work[(i, k)]).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            reflectors.push(None);
            continue;
        }
        let head_phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -head_phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let norm_v = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            reflectors.push(None);
            continue;
        }
        for z in v.iter_mut() {
            *z /= norm_v;
        }
        apply_reflector(&mut work, &v, k, k);
        reflectors.push(Some(v));
    }

    let r = ComplexMatrix::from_fn(n, n, |i, j| if j >= i { work[(i, j)] } else { ZERO });
    let mut q = ComplexMatrix::from_fn(m, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { ZERO });
    for k in (0..n).rev() {
        if let Some(v) = &reflectors[k] {
            apply_reflector(&mut q, v, k, 0);
        }
    }
    Ok((q, r))
}

/// `m[row0.., col0..] ← (I − 2 v v†) · m[row0.., col0..]`
fn apply_reflector(m: &mut ComplexMatrix, v: &[C64], row0: usize, col0: usize) {
    for j in col0..m.cols() {
        let dot: C64 = v
            .iter()
            .enumerate()
            .map(|(t, vt)| vt.conj() * m[(row0 + t, j)])
            .sum();
        let scaled = dot * 2.0;
        for (t, vt) in v.iter().enumerate() {
            m[(row0 + t, j)] -= vt * scaled;
        }
    }
}

/// Minimum-norm least-squares solution of a real system together with the numerical
/// rank of the design.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub rank: usize,
}

/// Solves `min ‖a·x − b‖₂` through a QR factorization followed by an SVD of the
/// triangular factor; singular values below `rcond · σ_max` are treated as zero.
pub fn least_squares(a: &RealMatrix, b: &[f64], rcond: f64) -> Result<LeastSquares> {
    let (m, k) = a.shape();
    if b.len() != m {
        return Err(Error::ShapeMismatch {
            left: (m, k),
            right: (b.len(), 1),
        });
    }
    // zero rows leave the problem unchanged and make it tall enough to factor
    let rows = m.max(k);
    let mut padded = ComplexMatrix::zeros(rows, k);
    for i in 0..m {
        for j in 0..k {
            padded[(i, j)] = C64::new(a[(i, j)], 0.0);
        }
    }
    let mut rhs = vec![ZERO; rows];
    for (r, &bi) in rhs.iter_mut().zip(b) {
        *r = C64::new(bi, 0.0);
    }

    let (q, r) = qr(&padded)?;
    let qtb: Vec<C64> = (0..k)
        .map(|j| (0..rows).map(|i| q[(i, j)].conj() * rhs[i]).sum())
        .collect();
    let dec = svd(&r)?;
    let sigma_max = dec.singular_values[0];
    let cut = rcond * sigma_max;
    let mut rank = 0;
    let mut coeffs = vec![ZERO; k];
    for (t, &s) in dec.singular_values.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        rank += 1;
        let ut_b: C64 = (0..k).map(|i| dec.u[(i, t)].conj() * qtb[i]).sum();
        coeffs[t] = ut_b / s;
    }
    let solution = (0..k)
        .map(|i| (0..k).map(|t| dec.v[(i, t)] * coeffs[t]).sum::<C64>().re)
        .collect();
    Ok(LeastSquares { solution, rank })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_square() {
        let a = ComplexMatrix::new(
            3,
            3,
            vec![
                C64::new(1.0, 1.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.5, 0.0),
                C64::new(-1.0, 2.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(3.0, -0.5),
                C64::new(0.25, 0.25),
            ],
        )
        .unwrap();
        let (q, r) = qr(&a).unwrap();
        assert!(q.is_unitary(1e-13));
        assert!((&(&q * &r) - &a).frobenius_norm() < 1e-13);
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(r[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn qr_tall_and_rank_deficient() {
        let a = ComplexMatrix::from_real(4, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]).unwrap();
        let (q, r) = qr(&a).unwrap();
        assert!((&(&q * &r) - &a).frobenius_norm() < 1e-13);
        let gram = &q.adjoint() * &q;
        // the second column is dependent, so only the first column of q is meaningful
        assert!((gram[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(qr(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn least_squares_exact_and_overdetermined() {
        // y = 2 + 3t sampled without noise
        let ts = [0.0, 1.0, 2.0, 3.0, 4.0];
        let a = RealMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { ts[i] });
        let b: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 * t).collect();
        let sol = least_squares(&a, &b, 1e-12).unwrap();
        assert_eq!(sol.rank, 2);
        assert!((sol.solution[0] - 2.0).abs() < 1e-12);
        assert!((sol.solution[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_underdetermined_is_minimum_norm() {
        // x + y = 2 has minimum-norm solution (1, 1)
        let a = RealMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let sol = least_squares(&a, &[2.0], 1e-12).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.solution[0] - 1.0).abs() < 1e-12);
        assert!((sol.solution[1] - 1.0).abs() < 1e-12);
    }
}
