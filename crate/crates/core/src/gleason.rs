//! Frame functions on rank-one projectors and least-squares recovery of the density
//! operator that generates them.
//!
//! In dimension ≥ 3 every frame function is `P ↦ Tr(ρ·P)` for a unique density
//! operator `ρ`, so a linear fit over sampled contexts reproduces it exactly. In
//! dimension 2 the claim fails; [`BlochPower`] is a frame function that no `ρ`
//! reproduces, and its fit residual stays bounded away from zero.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::csm::{trace_of_product, Context, Projector};
use crate::error::{Error, Result};
use crate::numerics::{
    ginibre, haar_unitary, hermitian_eig, least_squares, ComplexMatrix, RealMatrix, RngStream, C64,
    HERMITIAN_TOL,
};

/// Largest allowed deviation of a context sum from 1.
pub const FRAME_TOL: f64 = 1e-10;
pub const MIN_EIGENVALUE_TOL: f64 = 1e-9;
/// Relative cutoff on singular values when solving and ranking the design.
pub const DESIGN_RCOND: f64 = 1e-10;

/// Three quarters of `√(1/175) ≈ 0.0756`, the RMS distance between `(1 + n_z³)/2` and
/// the closest affine function of the Bloch vector under the uniform measure on the
/// sphere. Fits of the cubic frame function to sampled contexts land near the latter.
pub const COUNTEREXAMPLE_RESIDUAL_BOUND: f64 = 0.0567;

/// Raw residual below which a fit counts as exact.
pub const EXACT_FIT_RESIDUAL: f64 = 1e-8;

/// Positive semidefinite Hermitian operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.require_square()?;
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = matrix.hermiticity_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotDensity {
                reason: "not Hermitian",
                deviation: herm,
            });
        }
        let trace_dev = (matrix.trace() - C64::new(1.0, 0.0)).norm();
        if trace_dev > HERMITIAN_TOL {
            return Err(Error::NotDensity {
                reason: "trace is not 1",
                deviation: trace_dev,
            });
        }
        let (values, _) = hermitian_eig(&matrix)?;
        let lowest = values.first().copied().unwrap_or(0.0);
        if n > 0 && lowest < -MIN_EIGENVALUE_TOL {
            return Err(Error::NotDensity {
                reason: "negative eigenvalue",
                deviation: -lowest,
            });
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diag(&alloc::vec![1.0 / n as f64; n]),
        }
    }

    pub fn pure(p: &Projector) -> Self {
        Self {
            matrix: p.matrix().clone(),
        }
    }

    /// `G·G† / Tr(G·G†)` for a complex Gaussian `G`: full rank almost surely.
    pub fn random(n: usize, rng: &RngStream) -> Self {
        let g = ginibre(n, &mut rng.generator());
        let gg = &g * &g.adjoint();
        let t = gg.trace().re;
        let mut m = gg.scale(C64::new(1.0 / t, 0.0));
        symmetrize(&mut m);
        Self { matrix: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

fn symmetrize(m: &mut ComplexMatrix) {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Assignment of a value to every rank-one projector of a fixed dimension.
///
/// The value may depend on the projector alone, never on the context it is drawn
/// from; that is built into the signature.
pub trait FrameFunction {
    fn dim(&self) -> usize;

    /// Value at `p`; callers go through [`eval_frame`], which checks the dimension.
    fn value(&self, p: &Projector) -> Result<f64>;
}

/// `P ↦ Re Tr(ρ·P)`
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFrame {
    pub rho: DensityOperator,
}

impl FrameFunction for DensityFrame {
    fn dim(&self) -> usize {
        self.rho.dim()
    }

    fn value(&self, p: &Projector) -> Result<f64> {
        Ok(trace_of_product(self.rho.matrix(), p.matrix()))
    }
}

/// `P ↦ (1 + n_z^k)/2` on qubit projectors `P = (I + n·σ)/2`, for odd `k`.
///
/// Antipodal Bloch vectors make up every qubit context, and odd powers cancel
/// between them, so this is a frame function for every odd `k`. Only `k = 1` is
/// of the form `Tr(ρ·P)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlochPower {
    exponent: u32,
}

impl BlochPower {
    pub fn new(exponent: u32) -> Result<Self> {
        if exponent.is_multiple_of(2) {
            return Err(Error::InvalidArgument("Bloch power frame needs an odd exponent"));
        }
        Ok(Self { exponent })
    }

    pub fn cubic() -> Self {
        Self { exponent: 3 }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }
}

impl FrameFunction for BlochPower {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, p: &Projector) -> Result<f64> {
        let m = p.matrix();
        let z = (m[(0, 0)].re - m[(1, 1)].re).clamp(-1.0, 1.0);
        Ok(0.5 * (1.0 + z.powi(self.exponent as i32)))
    }
}

pub fn eval_frame<F: FrameFunction + ?Sized>(f: &F, p: &Projector) -> Result<f64> {
    if p.dim() != f.dim() {
        return Err(Error::ShapeMismatch {
            left: (f.dim(), f.dim()),
            right: (p.dim(), p.dim()),
        });
    }
    f.value(p)
}

/// `count` contexts, the `k`-th built from the columns of a Haar unitary drawn from
/// substream `k`.
pub fn sample_contexts(dim: usize, count: usize, rng: &RngStream) -> Result<Vec<Context>> {
    if dim < 2 {
        return Err(Error::InvalidArgument("contexts need dimension >= 2"));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("at least one context is needed"));
    }
    (0..count as u64)
        .map(|k| {
            let u = haar_unitary(dim, &rng.substream(k));
            Context::from_unitary(&u, alloc::format!("sample{k}"))
        })
        .collect()
}

/// A projector with the frame-function value observed on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub projector: Projector,
    pub value: f64,
}

/// Evaluates `f` on every projector of every context.
pub fn sample_frame<F: FrameFunction + ?Sized>(f: &F, contexts: &[Context]) -> Result<Vec<FrameSample>> {
    let mut out = Vec::with_capacity(contexts.iter().map(Context::dim).sum());
    for c in contexts {
        for p in c.projectors() {
            out.push(FrameSample {
                projector: p.clone(),
                value: eval_frame(f, p)?,
            });
        }
    }
    Ok(out)
}

/// Orthonormal basis of `n × n` Hermitian matrices under `⟨A, B⟩ = Tr(A·B)`:
/// `I/√n` first, then the `n² − 1` generalized Gell-Mann matrices.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    basis.push(ComplexMatrix::from_real_diag(
        &alloc::vec![1.0 / (n as f64).sqrt(); n],
    ));
    let h = core::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym[(j, k)] = C64::new(h, 0.0);
            sym[(k, j)] = C64::new(h, 0.0);
            basis.push(sym);
            let mut anti = ComplexMatrix::zeros(n, n);
            anti[(j, k)] = C64::new(0.0, -h);
            anti[(k, j)] = C64::new(0.0, h);
            basis.push(anti);
        }
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = alloc::vec![0.0; n];
        for d in diag.iter_mut().take(l) {
            *d = norm;
        }
        diag[l] = -(l as f64) * norm;
        basis.push(ComplexMatrix::from_real_diag(&diag));
    }
    basis
}

/// Outcome of fitting a density operator to frame-function samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Fitted operator after projection onto the positive semidefinite cone.
    pub rho: DensityOperator,
    /// Unconstrained least-squares operator: Hermitian with unit trace, possibly indefinite.
    pub raw_rho: ComplexMatrix,
    /// RMS of `Tr(raw_rho·P) − value` over the samples.
    pub raw_residual: f64,
    /// Same with the projected operator.
    pub projected_residual: f64,
    pub sample_count: usize,
    /// Numerical rank of the full `n²`-column design, identity direction included.
    pub rank_of_design: usize,
    pub min_raw_eigenvalue: f64,
}

impl FitReport {
    /// Fewer independent samples than Hermitian degrees of freedom.
    pub fn is_rank_deficient(&self) -> bool {
        let n = self.rho.dim();
        self.rank_of_design < n * n
    }
}

/// Least-squares fit of `value ≈ Tr(ρ·P)` over unit-trace Hermitian `ρ`.
///
/// `ρ = I/n + Σ_a x_a·B_a` over the traceless part of [`hermitian_basis`], so the
/// trace constraint disappears and the fit is an ordinary linear least-squares
/// problem with the minimum-norm solution when underdetermined. Negative eigenvalues
/// of the result are clipped and the trace renormalized to give `rho`.
pub fn fit_density(samples: &[FrameSample], dim: usize) -> Result<FitReport> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive"));
    }
    for s in samples {
        if s.projector.dim() != dim {
            return Err(Error::ShapeMismatch {
                left: (dim, dim),
                right: (s.projector.dim(), s.projector.dim()),
            });
        }
        if !s.value.is_finite() {
            return Err(Error::NonFinite);
        }
    }
    let basis = hermitian_basis(dim);
    let m = samples.len();
    let k = basis.len();
    let full = RealMatrix::from_fn(m, k, |i, a| {
        trace_of_product(&basis[a], samples[i].projector.matrix())
    });
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let rank_of_design = least_squares(&full, &values, DESIGN_RCOND)?.rank;

    let inv_n = 1.0 / dim as f64;
    let mut raw_rho = ComplexMatrix::from_real_diag(&alloc::vec![inv_n; dim]);
    if k > 1 {
        let reduced = RealMatrix::from_fn(m, k - 1, |i, a| full[(i, a + 1)]);
        let rhs: Vec<f64> = values.iter().map(|v| v - inv_n).collect();
        let coeffs = least_squares(&reduced, &rhs, DESIGN_RCOND)?.solution;
        for (x, b) in coeffs.iter().zip(&basis[1..]) {
            raw_rho = &raw_rho + &b.scale(C64::new(*x, 0.0));
        }
    }
    symmetrize(&mut raw_rho);

    let (eigenvalues, vectors) = hermitian_eig(&raw_rho)?;
    let min_raw_eigenvalue = eigenvalues[0];
    let projected = if min_raw_eigenvalue >= 0.0 {
        raw_rho.clone()
    } else {
        let clipped: Vec<f64> = eigenvalues.iter().map(|&e| e.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let scaled: Vec<f64> = clipped.iter().map(|e| e / total).collect();
        let mut p = vectors.conjugate(&ComplexMatrix::from_real_diag(&scaled));
        symmetrize(&mut p);
        p
    };

    Ok(FitReport {
        raw_residual: rms_residual(&raw_rho, samples),
        projected_residual: rms_residual(&projected, samples),
        rho: DensityOperator::new(projected)?,
        raw_rho,
        sample_count: m,
        rank_of_design,
        min_raw_eigenvalue,
    })
}

fn rms_residual(rho: &ComplexMatrix, samples: &[FrameSample]) -> f64 {
    let sq: f64 = samples
        .iter()
        .map(|s| (trace_of_product(rho, s.projector.matrix()) - s.value).powi(2))
        .sum();
    (sq / samples.len() as f64).sqrt()
}

/// Per-context sums of a frame function and the contexts where they miss 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub sums: Vec<f64>,
    pub max_deviation: f64,
    /// Indices of contexts whose sum deviates from 1 by more than [`FRAME_TOL`].
    pub flagged: Vec<usize>,
}

impl FrameReport {
    pub fn holds(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn verify_frame_hypothesis<F: FrameFunction + ?Sized>(
    f: &F,
    contexts: &[Context],
) -> Result<FrameReport> {
    let mut sums = Vec::with_capacity(contexts.len());
    let mut flagged = Vec::new();
    let mut max_deviation = 0.0f64;
    for (k, c) in contexts.iter().enumerate() {
        let mut total = 0.0;
        for p in c.projectors() {
            total += eval_frame(f, p)?;
        }
        let dev = (total - 1.0).abs();
        if dev > FRAME_TOL {
            flagged.push(k);
        }
        max_deviation = max_deviation.max(dev);
        sums.push(total);
    }
    Ok(FrameReport {
        sums,
        max_deviation,
        flagged,
    })
}
