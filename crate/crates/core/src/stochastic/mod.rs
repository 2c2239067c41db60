//! Probability matrices between two contexts and the phase matrices built on them.
//!
//! Orientation is fixed throughout the crate: row `i` is the initial modality and
//! column `j` the outcome modality, so rows of a [`ProbabilityMatrix`] sum to one.

mod chain_link;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{svd, ComplexMatrix, RealMatrix, RngStream, C64};
use crate::phase_recovery::{recover_with_tol, RecoverySettings, RecoveryStatus};

pub use crate::numerics::STOCHASTIC_TOL;
pub use chain_link::{chain_link_3x3, CLOSURE_TOL};

/// Square real matrix of conditional probabilities `p(v_j | u_i)`.
///
/// Construction only checks shape and finiteness; stochasticity is a property
/// queried with [`validate_stochastic`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    entries: RealMatrix,
}

impl ProbabilityMatrix {
    pub fn new(entries: RealMatrix) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(Error::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            });
        }
        Ok(Self { entries })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(RealMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: RealMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }),
        }
    }

    /// `|u_ij|²` of a square matrix; unistochastic when `u` is unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let n = u.require_square()?;
        Ok(Self {
            entries: RealMatrix::from_fn(n, n, |i, j| u[(i, j)].norm_sqr()),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.entries
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
        }
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.data().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.entries
            .data()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_i |Σ_j p_ij − 1|`
    pub fn row_sum_deviation(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| (self.entries.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_j |Σ_i p_ij − 1|`
    pub fn column_sum_deviation(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| ((0..n).map(|i| self.entries[(i, j)]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries.max_abs_diff(&other.entries)
    }
}

pub fn validate_stochastic(m: &ProbabilityMatrix) -> bool {
    validate_stochastic_with_tol(m, STOCHASTIC_TOL)
}

/// Entries within `[−tol, 1 + tol]` and every row summing to one within `tol`.
pub fn validate_stochastic_with_tol(m: &ProbabilityMatrix, tol: f64) -> bool {
    m.min_entry() >= -tol && m.max_entry() <= 1.0 + tol && m.row_sum_deviation() <= tol
}

pub fn is_bistochastic(m: &ProbabilityMatrix) -> bool {
    is_bistochastic_with_tol(m, STOCHASTIC_TOL)
}

pub fn is_bistochastic_with_tol(m: &ProbabilityMatrix, tol: f64) -> bool {
    validate_stochastic_with_tol(m, tol) && m.column_sum_deviation() <= tol
}

/// `Σ` with entries `e^{iφ_ij}·√p_ij`, carrying its probability matrix and phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    sigma: ComplexMatrix,
    phases: RealMatrix,
}

impl PhaseMatrix {
    #[inline]
    pub fn n(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn phases(&self) -> &RealMatrix {
        &self.phases
    }

    /// `|Σ_ij|²`
    pub fn probabilities(&self) -> ProbabilityMatrix {
        ProbabilityMatrix::from_unitary(&self.sigma).expect("sigma is square")
    }
}

pub fn build_sigma(m: &ProbabilityMatrix, phases: &RealMatrix) -> Result<PhaseMatrix> {
    let n = m.n();
    if phases.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            left: (n, n),
            right: phases.shape(),
        });
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = m.get(i, j);
            if p < -STOCHASTIC_TOL {
                return Err(Error::NegativeProbability(p));
            }
            entries.push(C64::from_polar(p.max(0.0).sqrt(), phases[(i, j)]));
        }
    }
    Ok(PhaseMatrix {
        sigma: ComplexMatrix::new(n, n, entries)?,
        phases: phases.clone(),
    })
}

/// Diagonal projector onto the `k`-th canonical basis vector.
pub(crate) fn basis_projector(n: usize, k: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    p[(k, k)] = C64::new(1.0, 0.0);
    p
}

/// Evaluates `Tr(P_j · Σ† · P_i · Σ)` with explicit projector matrices.
///
/// Deliberately literal: the result must agree with `|Σ_ij|²`, and this is the
/// route that checks it.
pub fn extract_probability(sigma: &PhaseMatrix, i: usize, j: usize) -> Result<f64> {
    let n = sigma.n();
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, dim: n });
        }
    }
    let p_i = basis_projector(n, i);
    let p_j = basis_projector(n, j);
    let s = sigma.sigma();
    let product = &(&(&p_j * &s.adjoint()) * &p_i) * s;
    Ok(product.trace().re)
}

/// Singular values of `Σ`, nonincreasing.
pub fn singular_value_profile(sigma: &PhaseMatrix) -> Vec<f64> {
    svd(sigma.sigma())
        .expect("phase matrices are square and finite")
        .singular_values
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    StochasticOnly,
    /// Bistochastic with no decision on unistochasticity. [`classify`] always refines
    /// this into one of the three decided kinds or [`ClassKind::Undecided`].
    BistochasticOnly,
    Unistochastic,
    NotUnistochastic,
    Undecided,
}

impl ClassKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClassKind::StochasticOnly => "stochastic-only",
            ClassKind::BistochasticOnly => "bistochastic-only",
            ClassKind::Unistochastic => "unistochastic",
            ClassKind::NotUnistochastic => "not-unistochastic",
            ClassKind::Undecided => "undecided",
        }
    }
}

/// Verdict on a probability matrix with its supporting evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixClass {
    pub kind: ClassKind,
    /// Unitary whose squared moduli reproduce the input, when unistochastic.
    pub witness: Option<ComplexMatrix>,
    /// Human-readable reason for a negative verdict.
    pub certificate: Option<String>,
    /// Restarts consumed when the verdict came from phase recovery.
    pub restarts_used: Option<usize>,
    pub objective: Option<f64>,
}

impl MatrixClass {
    pub(crate) fn bare(kind: ClassKind) -> Self {
        Self {
            kind,
            witness: None,
            certificate: None,
            restarts_used: None,
            objective: None,
        }
    }

    pub(crate) fn unistochastic(witness: ComplexMatrix) -> Self {
        Self {
            witness: Some(witness),
            ..Self::bare(ClassKind::Unistochastic)
        }
    }
}

/// Full classification pipeline.
///
/// Non-bistochastic input is `stochastic-only`; `n ≤ 2` bistochastic input is always
/// unistochastic; `n = 3` is decided exactly by the chain-link test; larger `n`
/// goes to phase recovery, whose failure is reported as `undecided`, never as a
/// negative verdict.
pub fn classify(m: &ProbabilityMatrix, settings: &RecoverySettings, rng: &RngStream) -> Result<MatrixClass> {
    classify_with_tol(m, settings, rng, STOCHASTIC_TOL)
}

pub fn classify_with_tol(
    m: &ProbabilityMatrix,
    settings: &RecoverySettings,
    rng: &RngStream,
    tol: f64,
) -> Result<MatrixClass> {
    if !validate_stochastic_with_tol(m, tol) {
        return Err(Error::NotStochastic(
            m.row_sum_deviation().max(-m.min_entry()).max(m.max_entry() - 1.0),
        ));
    }
    if !is_bistochastic_with_tol(m, tol) {
        let mut class = MatrixClass::bare(ClassKind::StochasticOnly);
        class.certificate = Some(alloc::format!(
            "column sums deviate from 1 by up to {:e}",
            m.column_sum_deviation()
        ));
        return Ok(class);
    }
    match m.n() {
        1 => Ok(MatrixClass::unistochastic(ComplexMatrix::identity(1))),
        2 => Ok(MatrixClass::unistochastic(rotation_witness(m))),
        3 => chain_link::chain_link_3x3_with_tol(m, tol),
        _ => {
            let res = recover_with_tol(m, settings, rng, tol)?;
            let mut class = match res.status {
                RecoveryStatus::Success => {
                    MatrixClass::unistochastic(res.witness.expect("success carries a witness"))
                }
                RecoveryStatus::Exhausted => MatrixClass::bare(ClassKind::Undecided),
            };
            class.restarts_used = Some(res.restarts_used);
            class.objective = Some(res.objective);
            Ok(class)
        }
    }
}

/// `[[√p₀₀, √p₀₁], [−√p₁₀, √p₁₁]]`, a real rotation for any 2×2 bistochastic matrix.
fn rotation_witness(m: &ProbabilityMatrix) -> ComplexMatrix {
    let r = |i, j| m.get(i, j).max(0.0).sqrt();
    ComplexMatrix::from_real(2, 2, &[r(0, 0), r(0, 1), -r(1, 0), r(1, 1)]).expect("finite")
}

/// Random positive matrix driven to bistochastic form by alternating row and column
/// normalization (Sinkhorn–Knopp).
pub fn sample_bistochastic(n: usize, rng: &RngStream, iters: usize) -> Result<ProbabilityMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("sample_bistochastic needs n >= 2"));
    }
    let mut gen = rng.generator();
    // (0, 1]: strictly positive so the iteration converges
    let mut m = RealMatrix::from_fn(n, n, |_, _| 1.0 - gen.random::<f64>());
    let mut deviation = f64::INFINITY;
    for _ in 0..iters {
        for i in 0..n {
            let s: f64 = m.row(i).iter().sum();
            for j in 0..n {
                m[(i, j)] /= s;
            }
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| m[(i, j)]).sum();
            for i in 0..n {
                m[(i, j)] /= s;
            }
        }
        let candidate = ProbabilityMatrix { entries: m.clone() };
        deviation = candidate
            .row_sum_deviation()
            .max(candidate.column_sum_deviation());
        if deviation <= STOCHASTIC_TOL {
            return Ok(candidate);
        }
    }
    Err(Error::Convergence {
        iterations: iters,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::haar_unitary;
    use core::f64::consts::{PI, TAU};

    fn pm<const N: usize>(rows: [[f64; N]; N]) -> ProbabilityMatrix {
        ProbabilityMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn stochastic_examples() {
        assert!(validate_stochastic(&ProbabilityMatrix::identity(3)));
        assert!(validate_stochastic(&pm([[0.7, 0.3], [0.2, 0.8]])));
        assert!(!validate_stochastic(&pm([[0.7, 0.4], [0.2, 0.8]])));
        assert!(!validate_stochastic(&pm([[1.2, -0.2], [0.2, 0.8]])));
        assert!(ProbabilityMatrix::from_rows(&[alloc::vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn bistochastic_examples() {
        assert!(is_bistochastic(&pm([[0.5, 0.5], [0.5, 0.5]])));
        assert!(!is_bistochastic(&pm([[1.0, 0.0], [0.5, 0.5]])));
        let u = haar_unitary(4, &RngStream::new(1, 0));
        assert!(is_bistochastic(&ProbabilityMatrix::from_unitary(&u).unwrap()));
    }

    #[test]
    fn build_sigma_examples() {
        let s = build_sigma(&ProbabilityMatrix::identity(2), &RealMatrix::zeros(2, 2)).unwrap();
        assert_eq!(s.sigma(), &ComplexMatrix::identity(2));

        let s = build_sigma(
            &pm([[0.5, 0.5], [0.5, 0.5]]),
            &RealMatrix::from_rows(&[[0.0, 0.0], [0.0, PI]]).unwrap(),
        )
        .unwrap();
        let h = 0.5f64.sqrt();
        let expected = ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap();
        assert!((s.sigma() - &expected).frobenius_norm() < 1e-15);

        let third = 1.0 / 3.0;
        let s = build_sigma(
            &ProbabilityMatrix::new(RealMatrix::from_fn(3, 3, |_, _| third)).unwrap(),
            &RealMatrix::from_fn(3, 3, |j, k| TAU * (j * k) as f64 / 3.0),
        )
        .unwrap();
        assert!(s.sigma().unitarity_deviation() < 1e-14);

        assert!(build_sigma(&ProbabilityMatrix::identity(2), &RealMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn extract_probability_examples() {
        let id = build_sigma(&ProbabilityMatrix::identity(3), &RealMatrix::zeros(3, 3)).unwrap();
        assert_eq!(extract_probability(&id, 0, 0).unwrap(), 1.0);
        assert_eq!(extract_probability(&id, 0, 1).unwrap(), 0.0);
        let had = build_sigma(
            &pm([[0.5, 0.5], [0.5, 0.5]]),
            &RealMatrix::from_rows(&[[0.0, 0.0], [0.0, PI]]).unwrap(),
        )
        .unwrap();
        assert!((extract_probability(&had, 0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(
            extract_probability(&id, 3, 0),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        );
    }

    #[test]
    fn profile_examples() {
        let id = build_sigma(&ProbabilityMatrix::identity(4), &RealMatrix::zeros(4, 4)).unwrap();
        assert_eq!(singular_value_profile(&id), alloc::vec![1.0; 4]);

        let rank_one = build_sigma(&pm([[1.0, 0.0], [1.0, 0.0]]), &RealMatrix::zeros(2, 2)).unwrap();
        let prof = singular_value_profile(&rank_one);
        assert!((prof[0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(prof[1], 0.0);
    }

    #[test]
    fn classify_two_by_two() {
        let m = pm([[0.25, 0.75], [0.75, 0.25]]);
        let c = classify(&m, &RecoverySettings::default(), &RngStream::new(0, 0)).unwrap();
        assert_eq!(c.kind, ClassKind::Unistochastic);
        let w = c.witness.unwrap();
        assert!(w.unitarity_deviation() < 1e-15);
        assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn classify_stochastic_only_and_rejects_non_stochastic() {
        let c = classify(
            &pm([[1.0, 0.0], [0.5, 0.5]]),
            &RecoverySettings::default(),
            &RngStream::new(0, 0),
        )
        .unwrap();
        assert_eq!(c.kind, ClassKind::StochasticOnly);
        assert!(classify(
            &pm([[0.7, 0.4], [0.2, 0.8]]),
            &RecoverySettings::default(),
            &RngStream::new(0, 0)
        )
        .is_err());
    }

    #[test]
    fn classify_haar_five() {
        let u = haar_unitary(5, &RngStream::new(77, 0));
        let m = ProbabilityMatrix::from_unitary(&u).unwrap();
        let c = classify(&m, &RecoverySettings::default(), &RngStream::new(1, 0)).unwrap();
        assert_eq!(c.kind, ClassKind::Unistochastic);
        let w = c.witness.unwrap();
        assert!(ProbabilityMatrix::from_unitary(&w).unwrap().max_abs_diff(&m) < 1e-8);
    }

    #[test]
    fn sinkhorn_samples() {
        for seed in 0..20 {
            let m = sample_bistochastic(2, &RngStream::new(seed, 0), 1000).unwrap();
            assert!(is_bistochastic(&m));
        }
        let m = sample_bistochastic(4, &RngStream::new(5, 0), 1000).unwrap();
        assert!(is_bistochastic(&m));
        assert!(m.min_entry() > 0.0);
        assert!(sample_bistochastic(1, &RngStream::new(0, 0), 10).is_err());
        assert!(matches!(
            sample_bistochastic(6, &RngStream::new(0, 0), 1),
            Err(Error::Convergence { iterations: 1, .. })
        ));
    }
}
