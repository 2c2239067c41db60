//! Search for phases that turn `Σ = [e^{iφ}·√p]` into a unitary matrix.
//!
//! The moduli are fixed by the probability matrix, so the search space is the
//! torus of phase matrices. The objective `‖ΣΣ† − I‖²_F` is invariant under adding
//! a constant to a whole row or a whole column of phases; those `2N − 1` flat
//! directions are removed by pinning the first row and the first column to zero.
//! Each restart runs a limited-memory quasi-Newton descent with a backtracking
//! line search from uniformly random phases; within a restart, a descent stuck at
//! a positive local minimum is resumed from fresh phases until the restart's
//! iteration budget runs out.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, RealMatrix, RngStream, C64};
use crate::stochastic::{ProbabilityMatrix, STOCHASTIC_TOL};

/// Witness unitarity required on top of the objective threshold.
pub const WITNESS_UNITARITY_TOL: f64 = 1e-8;

/// Backtracking (Armijo) line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub sufficient_decrease: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            sufficient_decrease: 1e-4,
            shrink: 0.5,
            max_backtracks: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoverySettings {
    pub restarts: usize,
    pub max_iterations: usize,
    pub success_threshold: f64,
    pub line_search: LineSearch,
    /// Number of curvature pairs kept by the quasi-Newton update.
    pub memory: usize,
}

impl Default for RecoverySettings {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iterations: 2000,
            success_threshold: 1e-10,
            line_search: LineSearch::default(),
            memory: 8,
        }
    }
}

impl RecoverySettings {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must be rejected
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidArgument("success threshold must be positive"));
        }
        if !(self.line_search.shrink > 0.0 && self.line_search.shrink < 1.0) {
            return Err(Error::InvalidArgument(
                "line-search shrink factor must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryStatus {
    Success,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub status: RecoveryStatus,
    pub witness: Option<ComplexMatrix>,
    /// Best objective reached across all restarts.
    pub objective: f64,
    pub phases: Option<RealMatrix>,
    pub restarts_used: usize,
}

/// `‖ΣΣ† − I‖²_F` for `Σ = build_sigma(m, phases)`.
pub fn objective(m: &ProbabilityMatrix, phases: &RealMatrix) -> Result<f64> {
    let problem = Problem::new(m)?;
    problem.check_shape(phases)?;
    Ok(problem.evaluate(phases.data(), false).0)
}

/// Analytic partial derivatives of [`objective`] with respect to every phase.
pub fn gradient(m: &ProbabilityMatrix, phases: &RealMatrix) -> Result<RealMatrix> {
    let problem = Problem::new(m)?;
    problem.check_shape(phases)?;
    let (_, grad) = problem.evaluate(phases.data(), true);
    RealMatrix::new(problem.n, problem.n, grad)
}

/// Multi-restart phase search. Non-bistochastic input is rejected before any
/// optimization since it cannot be unistochastic.
pub fn recover(
    m: &ProbabilityMatrix,
    settings: &RecoverySettings,
    rng: &RngStream,
) -> Result<RecoveryResult> {
    recover_with_tol(m, settings, rng, STOCHASTIC_TOL)
}

/// [`recover`] with a caller-chosen tolerance on the stochastic pre-checks.
pub fn recover_with_tol(
    m: &ProbabilityMatrix,
    settings: &RecoverySettings,
    rng: &RngStream,
    tol: f64,
) -> Result<RecoveryResult> {
    settings.validate()?;
    let row_dev = m.row_sum_deviation();
    if row_dev > tol || m.min_entry() < -tol {
        return Err(Error::NotStochastic(row_dev.max(-m.min_entry())));
    }
    let col_dev = m.column_sum_deviation();
    if col_dev > tol {
        return Err(Error::NotBistochastic(col_dev));
    }

    let problem = Problem::new(m)?;
    let n = problem.n;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restarts_used = 0;

    for restart in 0..settings.restarts {
        restarts_used = restart + 1;
        let mut gen = rng.substream(restart as u64).generator();
        let mut phases = vec![0.0; n * n];
        problem.draw(&mut phases, &mut gen);
        let value = problem.search(&mut phases, settings, &mut gen);
        let improved = best.as_ref().is_none_or(|(b, _)| value < *b);
        if improved {
            best = Some((value, phases));
        }
        let (best_value, best_phases) = best.as_ref().expect("set above");
        if *best_value <= settings.success_threshold
            && problem.sigma(best_phases).unitarity_deviation() < WITNESS_UNITARITY_TOL
        {
            break;
        }
    }

    let (value, phases) = best.expect("at least one restart");
    let sigma = problem.sigma(&phases);
    if value <= settings.success_threshold && sigma.unitarity_deviation() < WITNESS_UNITARITY_TOL {
        Ok(RecoveryResult {
            status: RecoveryStatus::Success,
            witness: Some(sigma),
            objective: value,
            phases: Some(RealMatrix::new(n, n, phases)?),
            restarts_used,
        })
    } else {
        Ok(RecoveryResult {
            status: RecoveryStatus::Exhausted,
            witness: None,
            objective: value,
            phases: None,
            restarts_used,
        })
    }
}

struct Problem {
    n: usize,
    moduli: Vec<f64>,
}

impl Problem {
    fn new(m: &ProbabilityMatrix) -> Result<Self> {
        let moduli = m
            .matrix()
            .data()
            .iter()
            .map(|&p| {
                if p < -STOCHASTIC_TOL {
                    Err(Error::NegativeProbability(p))
                } else {
                    Ok(p.max(0.0).sqrt())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n: m.n(), moduli })
    }

    fn check_shape(&self, phases: &RealMatrix) -> Result<()> {
        if phases.shape() != (self.n, self.n) {
            return Err(Error::ShapeMismatch {
                left: (self.n, self.n),
                right: phases.shape(),
            });
        }
        Ok(())
    }

    fn sigma_entries(&self, phases: &[f64]) -> Vec<C64> {
        self.moduli
            .iter()
            .zip(phases)
            .map(|(&r, &phi)| C64::from_polar(r, phi))
            .collect()
    }

    fn sigma(&self, phases: &[f64]) -> ComplexMatrix {
        ComplexMatrix::new(self.n, self.n, self.sigma_entries(phases)).expect("finite phases")
    }

    /// Objective and, when asked, its gradient over all `n²` phases.
    fn evaluate(&self, phases: &[f64], with_gradient: bool) -> (f64, Vec<f64>) {
        let n = self.n;
        let s = self.sigma_entries(phases);
        // G = Σ Σ† − I
        let mut g = vec![C64::new(0.0, 0.0); n * n];
        let mut value = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc: C64 = (0..n).map(|k| s[i * n + k] * s[j * n + k].conj()).sum();
                if i == j {
                    acc.re -= 1.0;
                }
                value += acc.norm_sqr();
                g[i * n + j] = acc;
            }
        }
        if !with_gradient {
            return (value, Vec::new());
        }
        // ∂f/∂φ_jk = 4 Im( conj(Σ_jk) · (G Σ)_jk )
        let mut grad = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let gs: C64 = (0..n).map(|a| g[j * n + a] * s[a * n + k]).sum();
                grad[j * n + k] = 4.0 * (s[j * n + k].conj() * gs).im;
            }
        }
        (value, grad)
    }

    fn is_free(&self, idx: usize) -> bool {
        idx / self.n != 0 && !idx.is_multiple_of(self.n)
    }

    fn free_gradient(&self, phases: &[f64]) -> (f64, Vec<f64>) {
        let (value, mut grad) = self.evaluate(phases, true);
        for (idx, gv) in grad.iter_mut().enumerate() {
            if !self.is_free(idx) {
                *gv = 0.0;
            }
        }
        (value, grad)
    }

    /// Limited-memory BFGS with Armijo backtracking on the free phases. Returns the
    /// final objective and leaves the final point in `phases`.
    /// Descends from `phases`; a descent that stalls above the threshold is restarted
    /// from freshly drawn phases until the iteration budget is spent. Keeps the best.
    /// A tenth of the budget is held back to finish polishing a descent that crossed
    /// the threshold just as exploration ran out.
    fn search<R: Rng>(&self, phases: &mut [f64], settings: &RecoverySettings, gen: &mut R) -> f64 {
        let reserve = settings.max_iterations / 10;
        let mut budget = settings.max_iterations - reserve;
        let mut best = f64::INFINITY;
        let mut trial = phases.to_vec();
        loop {
            let (value, used) = self.descend(&mut trial, settings, budget);
            budget = budget.saturating_sub(used.max(1));
            if value < best {
                best = value;
                phases.copy_from_slice(&trial);
            }
            if best <= settings.success_threshold || budget == 0 {
                break;
            }
            self.draw(&mut trial, gen);
        }
        if best <= settings.success_threshold && reserve > 0 {
            best = self.descend(phases, settings, reserve).0;
        }
        best
    }

    /// Uniform phases in [0, 2π) on the free entries, zero on the pinned ones.
    fn draw<R: Rng>(&self, phases: &mut [f64], gen: &mut R) {
        let n = self.n;
        phases.fill(0.0);
        for i in 1..n {
            for j in 1..n {
                phases[i * n + j] = gen.random::<f64>() * TAU;
            }
        }
    }

    /// Returns the final objective and the iterations spent.
    fn descend(&self, phases: &mut [f64], settings: &RecoverySettings, budget: usize) -> (f64, usize) {
        const POLISH_TARGET: f64 = 1e-28;
        const GRADIENT_FLOOR: f64 = 1e-15;
        const STALL_WINDOW: usize = 100;

        let ls = settings.line_search;
        let (mut value, mut grad) = self.free_gradient(phases);
        let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut recent: VecDeque<f64> = VecDeque::with_capacity(STALL_WINDOW + 1);

        let mut spent = 0;
        for _iter in 0..budget {
            spent += 1;
            if value <= POLISH_TARGET || dot(&grad, &grad).sqrt() <= GRADIENT_FLOOR {
                break;
            }
            recent.push_back(value);
            if recent.len() > STALL_WINDOW {
                let old = recent.pop_front().expect("non-empty");
                // stuck at a positive local minimum: further iterations cannot help
                if value > settings.success_threshold && old - value <= 1e-9 * old {
                    break;
                }
            }

            let mut direction = two_loop(&grad, &history);
            let mut slope = dot(&grad, &direction);
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // also catches NaN
            if !(slope < 0.0) {
                history.clear();
                direction = grad.iter().map(|g| -g).collect();
                slope = -dot(&grad, &grad);
            }

            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..ls.max_backtracks {
                let trial: Vec<f64> = phases.iter().zip(&direction).map(|(p, d)| p + step * d).collect();
                let (trial_value, _) = self.evaluate(&trial, false);
                if trial_value <= value + ls.sufficient_decrease * step * slope {
                    accepted = Some((trial, trial_value));
                    break;
                }
                step *= ls.shrink;
            }
            let Some((trial, _)) = accepted else {
                if history.is_empty() {
                    break;
                }
                history.clear();
                continue;
            };

            let (new_value, new_grad) = self.free_gradient(&trial);
            let s: Vec<f64> = trial.iter().zip(phases.iter()).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if history.len() == settings.memory.max(1) {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
            phases.copy_from_slice(&trial);
            value = new_value;
            grad = new_grad;
        }
        (value, spent)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton direction `−H·g` from the stored curvature pairs.
fn two_loop(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}
