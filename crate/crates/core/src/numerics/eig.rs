use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::matrix::{ComplexMatrix, C64};
use super::svd::jacobi_rotation;
use super::HERMITIAN_TOL;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal eigenvectors
/// as columns.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    hermitian_eig_with_tol(m, HERMITIAN_TOL)
}

pub fn hermitian_eig_with_tol(m: &ComplexMatrix, tol: f64) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.require_square()?;
    let dev = m.hermiticity_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    // symmetrize so rounding in the input never leaks into the rotations
    let mut a = (m + &m.adjoint()).scale(C64::new(0.5, 0.0));
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = (apq / g).conj();
                let (c, s) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, g);
                // W = diag(1, phase) · [[c, s], [-s, c]] acting on coordinates p, q
                let w_pp = C64::new(c, 0.0);
                let w_pq = C64::new(s, 0.0);
                let w_qp = phase * (-s);
                let w_qq = phase * c;
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * w_pp + y * w_qp;
                    a[(k, q)] = x * w_pq + y * w_qq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = w_pp.conj() * x + w_qp.conj() * y;
                    a[(q, k)] = w_pq.conj() * x + w_qq.conj() * y;
                }
                for k in 0..n {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * w_pp + y * w_qp;
                    v[(k, q)] = x * w_pq + y * w_qq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re).then(x.cmp(&y)));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(j));
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn check_decomposition(m: &ComplexMatrix, values: &[f64], vectors: &ComplexMatrix) {
        assert!(vectors.is_unitary(1e-10));
        let d = ComplexMatrix::from_real_diag(values);
        let rec = &(vectors * &d) * &vectors.adjoint();
        assert!((&rec - m).frobenius_norm() < 1e-10);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity() {
        let m = ComplexMatrix::identity(2);
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        assert_eq!(vals, vec![1.0, 1.0]);
        check_decomposition(&m, &vals, &vecs);
    }

    #[test]
    fn pauli_z() {
        let m = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
        check_decomposition(&m, &vals, &vecs);
    }

    #[test]
    fn projector_onto_plus() {
        // |+><+| = [[1/2, 1/2], [1/2, 1/2]]; characteristic polynomial λ² − λ = 0
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        assert!(vals[0].abs() < 1e-15);
        assert!((vals[1] - 1.0).abs() < 1e-15);
        check_decomposition(&m, &vals, &vecs);
    }

    #[test]
    fn complex_hermitian_3x3() {
        let m = ComplexMatrix::new(
            3,
            3,
            vec![
                C64::new(2.0, 0.0),
                C64::new(0.5, -1.0),
                C64::new(0.0, 0.3),
                C64::new(0.5, 1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.25, 0.25),
                C64::new(0.0, -0.3),
                C64::new(0.25, -0.25),
                C64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        check_decomposition(&m, &vals, &vecs);
        let trace: f64 = vals.iter().sum();
        assert!((trace - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }
}
