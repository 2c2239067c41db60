//! Contexts of rank-one projectors, Born probabilities between them, and the
//! unitary maps that carry one context onto another.
//!
//! All projectors live in one Hilbert space. A [`ContextMap`] `S` from context
//! `{P_i}` to `{Q_j}` satisfies `Q_j = S·P_j·S†`, and the transition probability
//! from modality `P_i` to modality `Q_j` is `Tr(P_i·Q_j)`.

mod spin;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, RealMatrix, C64, HERMITIAN_TOL, UNITARY_TOL};
use crate::stochastic::ProbabilityMatrix;

pub use spin::{spin_rotation, GroupElement, Motion, Spin};

/// Tolerance on projector and context invariants.
pub const PROJECTOR_TOL: f64 = HERMITIAN_TOL;
/// Traces this close to `[0, 1]` are clamped onto it; anything further is an error.
pub const BORN_CLAMP_TOL: f64 = 1e-10;
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Components below this magnitude are skipped when fixing the phase of a ray.
const RAY_GAUGE_FLOOR: f64 = 1e-10;

/// Hermitian rank-one projector with a modality label.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    label: String,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        Self::with_tol(matrix, label, PROJECTOR_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, label: impl Into<String>, tol: f64) -> Result<Self> {
        matrix.require_square()?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = matrix.hermiticity_deviation();
        if herm > tol {
            return Err(Error::NotProjector {
                reason: "not Hermitian",
                deviation: herm,
            });
        }
        let idem = (&(&matrix * &matrix) - &matrix).frobenius_norm();
        if idem > tol {
            return Err(Error::NotProjector {
                reason: "not idempotent",
                deviation: idem,
            });
        }
        let trace_dev = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if trace_dev > tol {
            return Err(Error::NotProjector {
                reason: "trace is not 1",
                deviation: trace_dev,
            });
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    /// `v·v† / ‖v‖²`
    pub fn from_vector(v: &[C64], label: impl Into<String>) -> Result<Self> {
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if v.is_empty() || !norm_sqr.is_finite() || norm_sqr == 0.0 {
            return Err(Error::InvalidArgument(
                "projector vector must be finite and nonzero",
            ));
        }
        let inv = 1.0 / norm_sqr;
        let matrix = ComplexMatrix::outer(v, v).map(|z| z * inv);
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Unit vector spanning the range, with its first non-negligible component real
    /// and positive.
    pub fn ray(&self) -> Vec<C64> {
        let n = self.dim();
        // column k of v·v† is v·conj(v_k); the largest diagonal entry picks the best one
        let k = (0..n)
            .max_by(|&a, &b| self.matrix[(a, a)].re.total_cmp(&self.matrix[(b, b)].re))
            .expect("dimension is positive");
        let mut v = self.matrix.column(k);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= norm;
        }
        fix_ray_gauge(&mut v);
        v
    }

    /// Same projector under `S·P·S†`.
    pub fn conjugated(&self, s: &ComplexMatrix) -> Self {
        Self {
            matrix: s.conjugate(&self.matrix),
            label: self.label.clone(),
        }
    }
}

fn fix_ray_gauge(v: &mut [C64]) {
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > RAY_GAUGE_FLOOR) {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Ordered complete set of mutually orthogonal rank-one projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    projectors: Vec<Projector>,
    label: String,
}

impl Context {
    pub fn new(projectors: Vec<Projector>, label: impl Into<String>) -> Result<Self> {
        Self::with_tol(projectors, label, PROJECTOR_TOL)
    }

    pub fn with_tol(projectors: Vec<Projector>, label: impl Into<String>, tol: f64) -> Result<Self> {
        let n = projectors.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for p in &projectors {
            if p.dim() != n {
                return Err(Error::ShapeMismatch {
                    left: (n, n),
                    right: (p.dim(), p.dim()),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let overlap = (projectors[i].matrix() * projectors[j].matrix()).frobenius_norm();
                if overlap > tol {
                    return Err(Error::InvalidContext {
                        reason: "projectors are not mutually orthogonal",
                        deviation: overlap,
                    });
                }
            }
        }
        let mut total = ComplexMatrix::zeros(n, n);
        for p in &projectors {
            total = &total + p.matrix();
        }
        let completeness = (&total - &ComplexMatrix::identity(n)).frobenius_norm();
        if completeness > tol {
            return Err(Error::InvalidContext {
                reason: "projectors do not sum to the identity",
                deviation: completeness,
            });
        }
        Ok(Self {
            projectors,
            label: label.into(),
        })
    }

    /// Validates each matrix as a projector and labels modalities by position.
    pub fn from_matrices(matrices: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let projectors = matrices
            .into_iter()
            .enumerate()
            .map(|(k, m)| Projector::new(m, k.to_string()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projectors, label)
    }

    /// Context whose `k`-th projector is onto the `k`-th column of `u`.
    pub fn from_unitary(u: &ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        u.require_square()?;
        let dev = u.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        let projectors = (0..u.cols())
            .map(|k| Projector::from_vector(&u.column(k), k.to_string()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projectors, label)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.projectors.len()
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> Result<&Projector> {
        self.projectors.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            dim: self.dim(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Rays of the projectors as columns, Gram–Schmidt polished so the result is
    /// unitary to rounding.
    fn ray_matrix(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for p in &self.projectors {
            let mut v = p.ray();
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in v.iter_mut() {
                *z /= norm;
            }
            cols.push(v);
        }
        ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
    }
}

/// Unitary `S` with `to_j = S·from_j·S†`, tagged with the labels of both contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMap {
    unitary: ComplexMatrix,
    source: String,
    target: String,
}

impl ContextMap {
    pub fn new(unitary: ComplexMatrix, source: impl Into<String>, target: impl Into<String>) -> Result<Self> {
        Self::with_tol(unitary, source, target, UNITARY_TOL)
    }

    pub fn with_tol(
        unitary: ComplexMatrix,
        source: impl Into<String>,
        target: impl Into<String>,
        tol: f64,
    ) -> Result<Self> {
        unitary.require_square()?;
        if !unitary.is_finite() {
            return Err(Error::NonFinite);
        }
        let dev = unitary.unitarity_deviation();
        if dev > tol {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            unitary,
            source: source.into(),
            target: target.into(),
        })
    }

    pub fn identity(n: usize, label: impl Into<String>) -> Self {
        let label = label.into();
        Self {
            unitary: ComplexMatrix::identity(n),
            source: label.clone(),
            target: label,
        }
    }

    pub(crate) fn from_parts(unitary: ComplexMatrix, source: String, target: String) -> Self {
        Self {
            unitary,
            source,
            target,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.unitary.rows()
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// The reverse map, whose unitary is the adjoint.
    pub fn inverse(&self) -> Self {
        Self {
            unitary: self.unitary.adjoint(),
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// `self` followed by `next`: the unitary `next·self`.
    pub fn then(&self, next: &ContextMap) -> Result<Self> {
        Ok(Self {
            unitary: next.unitary.try_mul(&self.unitary)?,
            source: self.source.clone(),
            target: next.target.clone(),
        })
    }
}

/// Diagonal projectors onto the canonical basis.
pub fn standard_context(n: usize) -> Result<Context> {
    if n < 2 {
        return Err(Error::InvalidArgument("a context needs dimension >= 2"));
    }
    let projectors = (0..n)
        .map(|k| {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(k, k)] = C64::new(1.0, 0.0);
            Projector {
                matrix: m,
                label: format!("e{k}"),
            }
        })
        .collect();
    Ok(Context {
        projectors,
        label: String::from("standard"),
    })
}

/// `Re Tr(a·b)`, summed so that swapping the arguments gives a bitwise identical result.
pub(crate) fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let term = |x: C64, y: C64| x.re * y.re - x.im * y.im;
    let mut total = 0.0;
    for i in 0..n {
        total += term(a[(i, i)], b[(i, i)]);
        for j in (i + 1)..n {
            total += term(a[(i, j)], b[(j, i)]) + term(a[(j, i)], b[(i, j)]);
        }
    }
    total
}

/// Transition probability `Tr(p·q)` between two modalities.
pub fn born(p: &Projector, q: &Projector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch {
            left: p.matrix.shape(),
            right: q.matrix.shape(),
        });
    }
    let t = trace_of_product(&p.matrix, &q.matrix);
    if t < -BORN_CLAMP_TOL {
        return Err(Error::NegativeProbability(t));
    }
    if t > 1.0 + BORN_CLAMP_TOL {
        return Err(Error::InvalidArgument("trace of projector product exceeds 1"));
    }
    Ok(t.clamp(0.0, 1.0))
}

/// Conjugates every projector of `c` by the map; the result carries the map's target label.
pub fn transform_context(c: &Context, s: &ContextMap) -> Result<Context> {
    if s.dim() != c.dim() {
        return Err(Error::ShapeMismatch {
            left: (c.dim(), c.dim()),
            right: s.unitary.shape(),
        });
    }
    Ok(Context {
        projectors: c.projectors.iter().map(|p| p.conjugated(&s.unitary)).collect(),
        label: s.target.clone(),
    })
}

/// `entry(i, j) = born(from_i, to_j)`
pub fn born_matrix(from: &Context, to: &Context) -> Result<ProbabilityMatrix> {
    let n = from.dim();
    if to.dim() != n {
        return Err(Error::ShapeMismatch {
            left: (n, n),
            right: (to.dim(), to.dim()),
        });
    }
    let mut data = Vec::with_capacity(n * n);
    for p in &from.projectors {
        for q in &to.projectors {
            data.push(born(p, q)?);
        }
    }
    ProbabilityMatrix::new(RealMatrix::new(n, n, data)?)
}

/// Unitary sending the `i`-th ray of `from` to the `i`-th ray of `to`.
///
/// Rays are gauge-fixed with their first non-negligible component real positive,
/// which makes the output deterministic; conjugation by it is gauge independent.
pub fn map_from_contexts(from: &Context, to: &Context) -> Result<ContextMap> {
    if from.dim() != to.dim() {
        return Err(Error::ShapeMismatch {
            left: (from.dim(), from.dim()),
            right: (to.dim(), to.dim()),
        });
    }
    let w_from = from.ray_matrix();
    let w_to = to.ray_matrix();
    Ok(ContextMap::from_parts(
        &w_to * &w_from.adjoint(),
        from.label.clone(),
        to.label.clone(),
    ))
}

/// Largest deviation in each of the four ways of relating two contexts through a map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// `max_j ‖S·from_j·S† − to_j‖_F`
    pub forward: f64,
    /// `max_i ‖S†·to_i·S − from_i‖_F`
    pub backward: f64,
    /// `max_ij |Tr(from_i·S·from_j·S†) − born(from_i, to_j)|`
    pub from_frame: f64,
    /// `max_ij |Tr(S†·to_i·S·to_j) − born(from_i, to_j)|`
    pub to_frame: f64,
    pub tolerance: f64,
}

impl ConsistencyReport {
    pub fn max_deviation(&self) -> f64 {
        self.forward
            .max(self.backward)
            .max(self.from_frame)
            .max(self.to_frame)
    }

    pub fn passed(&self) -> bool {
        self.max_deviation() <= self.tolerance
    }
}

/// Checks that `s` carries `from` onto `to` in both directions, and that the
/// probabilities extracted in either frame agree with the direct ones.
///
/// Never fails: mismatched dimensions give infinite deviations.
#[allow(clippy::needless_range_loop)]
pub fn consistency_check(from: &Context, to: &Context, s: &ContextMap) -> ConsistencyReport {
    let n = from.dim();
    if to.dim() != n || s.dim() != n {
        return ConsistencyReport {
            forward: f64::INFINITY,
            backward: f64::INFINITY,
            from_frame: f64::INFINITY,
            to_frame: f64::INFINITY,
            tolerance: CONSISTENCY_TOL,
        };
    }
    let u = &s.unitary;
    let u_adj = u.adjoint();
    let pushed: Vec<ComplexMatrix> = from.projectors.iter().map(|p| u.conjugate(&p.matrix)).collect();
    let pulled: Vec<ComplexMatrix> = to.projectors.iter().map(|q| u_adj.conjugate(&q.matrix)).collect();

    let mut report = ConsistencyReport {
        forward: 0.0,
        backward: 0.0,
        from_frame: 0.0,
        to_frame: 0.0,
        tolerance: CONSISTENCY_TOL,
    };
    for k in 0..n {
        report.forward = report
            .forward
            .max((&pushed[k] - &to.projectors[k].matrix).frobenius_norm());
        report.backward = report
            .backward
            .max((&pulled[k] - &from.projectors[k].matrix).frobenius_norm());
    }
    for i in 0..n {
        for j in 0..n {
            let direct = trace_of_product(&from.projectors[i].matrix, &to.projectors[j].matrix);
            let via_from = trace_of_product(&from.projectors[i].matrix, &pushed[j]);
            let via_to = trace_of_product(&pulled[i], &to.projectors[j].matrix);
            report.from_frame = report.from_frame.max((via_from - direct).abs());
            report.to_frame = report.to_frame.max((via_to - direct).abs());
        }
    }
    report
}
