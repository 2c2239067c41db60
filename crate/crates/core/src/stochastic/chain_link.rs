//! Exact unistochasticity test for 3×3 bistochastic matrices.
//!
//! Two rows `a`, `b` of a 3×3 unitary are orthogonal, so the three phasors
//! `√(p_ak·p_bk)·e^{iθ_k}` must close into a triangle. The link lengths therefore
//! satisfy the triangle inequality; conversely, when they do, the triangle angles
//! give phases for the second row and the third row follows as the conjugated
//! cross product of the first two.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use super::{is_bistochastic_with_tol, ClassKind, MatrixClass, ProbabilityMatrix, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};

/// Slack allowed in `max ℓ ≤ sum of the other two`.
pub const CLOSURE_TOL: f64 = 1e-12;

pub fn chain_link_3x3(m: &ProbabilityMatrix) -> Result<MatrixClass> {
    chain_link_3x3_with_tol(m, STOCHASTIC_TOL)
}

pub(crate) fn chain_link_3x3_with_tol(m: &ProbabilityMatrix, tol: f64) -> Result<MatrixClass> {
    if m.n() != 3 {
        return Err(Error::ShapeMismatch {
            left: (3, 3),
            right: (m.n(), m.n()),
        });
    }
    if !is_bistochastic_with_tol(m, tol) {
        return Err(Error::NotBistochastic(
            m.column_sum_deviation().max(m.row_sum_deviation()),
        ));
    }

    let entry = |i: usize, j: usize| m.get(i, j).max(0.0);
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

    for (a, b) in PAIRS {
        let links: [f64; 3] = core::array::from_fn(|k| (entry(a, k) * entry(b, k)).sqrt());
        if let Some(excess) = closure_violation(&links) {
            return Ok(not_unistochastic(format!(
                "rows {a},{b}: links ({}, {}, {}) violate closure by {excess:e}",
                links[0], links[1], links[2]
            )));
        }
    }
    for (a, b) in PAIRS {
        let links: [f64; 3] = core::array::from_fn(|k| (entry(k, a) * entry(k, b)).sqrt());
        if let Some(excess) = closure_violation(&links) {
            return Ok(not_unistochastic(format!(
                "columns {a},{b}: links ({}, {}, {}) violate closure by {excess:e}",
                links[0], links[1], links[2]
            )));
        }
    }

    Ok(MatrixClass::unistochastic(triangle_witness(m)))
}

fn not_unistochastic(certificate: alloc::string::String) -> MatrixClass {
    MatrixClass {
        certificate: Some(certificate),
        ..MatrixClass::bare(ClassKind::NotUnistochastic)
    }
}

/// Amount by which the longest link exceeds the sum of the other two, if beyond tolerance.
fn closure_violation(links: &[f64; 3]) -> Option<f64> {
    let total: f64 = links.iter().sum();
    let longest = links.iter().copied().fold(0.0, f64::max);
    let excess = longest - (total - longest);
    (excess > CLOSURE_TOL).then_some(excess)
}

/// Phases `θ` with `Σ_k ℓ_k e^{iθ_k} = 0` for links satisfying the triangle inequality.
fn triangle_phases(links: &[f64; 3]) -> [f64; 3] {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| links[y].total_cmp(&links[x]));
    let [a, b, c] = order;
    let mut phases = [0.0; 3];
    if links[b] == 0.0 {
        // at most one nonzero link, which closure forces to be (numerically) zero
        return phases;
    }
    // |ℓ_a + ℓ_b e^{iθ_b}| = ℓ_c  (law of cosines)
    let cos_b = ((links[c] * links[c] - links[a] * links[a] - links[b] * links[b])
        / (2.0 * links[a] * links[b]))
        .clamp(-1.0, 1.0);
    phases[b] = cos_b.acos();
    let closing = -(C64::new(links[a], 0.0) + C64::from_polar(links[b], phases[b]));
    phases[c] = if closing.norm() > 0.0 { closing.arg() } else { PI };
    phases
}

fn triangle_witness(m: &ProbabilityMatrix) -> ComplexMatrix {
    let r = |i: usize, j: usize| m.get(i, j).max(0.0).sqrt();
    let links: [f64; 3] = core::array::from_fn(|k| r(0, k) * r(1, k));
    let theta = triangle_phases(&links);

    let row0: Vec<C64> = (0..3).map(|k| C64::new(r(0, k), 0.0)).collect();
    let row1: Vec<C64> = (0..3).map(|k| C64::from_polar(r(1, k), theta[k])).collect();
    // conj(row0 × row1) is orthogonal to both rows and has unit norm
    let cross = [
        row0[1] * row1[2] - row0[2] * row1[1],
        row0[2] * row1[0] - row0[0] * row1[2],
        row0[0] * row1[1] - row0[1] * row1[0],
    ];
    let mut w = ComplexMatrix::zeros(3, 3);
    for k in 0..3 {
        w[(0, k)] = row0[k];
        w[(1, k)] = row1[k];
        w[(2, k)] = cross[k].conj();
    }
    w
}
