//! Constrained maximization of Hardy probabilities over state matrices.
//!
//! States are parametrized by their free amplitude entries (the constraint
//! pattern of the chosen paradox type), normalized inside the embedding, and
//! searched with multi-start adaptive Nelder-Mead. Each restart owns a
//! private generator derived from (seed, restart index), so results are
//! reproducible regardless of how restarts are scheduled.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hardy::{
    analytic_max, type1_probability, type2_probabilities, HardyError, ParadoxType, StateMatrix,
    DEFAULT_GS_TOL, DEFAULT_REG,
};
use crate::matcore::{singular_values, ComplexMatrix};

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("objective {0} is not compatible with paradox type {1}")]
    IncompatibleObjective(String, ParadoxType),
    #[error("restart count must be positive")]
    ZeroRestarts,
    #[error("parameter vector must be nonzero")]
    ZeroParameters,
    #[error("parameter count mismatch: expected {expected}, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("invalid dimension range: {0}")]
    InvalidRange(String),
    #[error("step must be positive")]
    NonPositiveStep,
    #[error("malformed optimization result: {0}")]
    MalformedResult(String),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

/// The quantity being maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// P(A₂=1, B₂=1) for Type-I states.
    PI,
    /// P_II(1,2) = |q₁₂|² for Type-II states.
    Pair12,
    /// Σ over 1 ≤ i < j ≤ n of |q_ij|² for Type-II states.
    PartialSum(usize),
    /// Σ over all i < j of |q_ij|² for Type-II states.
    FullPII,
}

impl Objective {
    pub fn paradox_type(&self) -> ParadoxType {
        match self {
            Objective::PI => ParadoxType::I,
            _ => ParadoxType::II,
        }
    }

    pub fn target_n(&self) -> Option<usize> {
        match self {
            Objective::PartialSum(n) => Some(*n),
            _ => None,
        }
    }

    /// The analytic ceiling, when one applies. The n = 2 partial sum is the
    /// single pair term, so it inherits the pair bound.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Objective::PI | Objective::Pair12 | Objective::PartialSum(2) => Some(analytic_max()),
            _ => None,
        }
    }

    pub fn evaluate(&self, h: &StateMatrix) -> Result<f64, HardyError> {
        match self {
            Objective::PI => type1_probability(h, DEFAULT_REG),
            Objective::Pair12 => Ok(type2_probabilities(h, DEFAULT_GS_TOL)?.pair12()),
            Objective::PartialSum(n) => Ok(type2_probabilities(h, DEFAULT_GS_TOL)?.partial(*n)),
            Objective::FullPII => Ok(type2_probabilities(h, DEFAULT_GS_TOL)?.full_pii()),
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Objective::PI => write!(f, "P_I"),
            Objective::Pair12 => write!(f, "pair12"),
            Objective::PartialSum(n) => write!(f, "partial_sum({n})"),
            Objective::FullPII => write!(f, "full_PII"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    RealNonnegative,
    Complex,
}

/// Maps a free real parameter vector onto the constraint pattern of a
/// paradox type, normalizing to unit Frobenius norm inside the embedding.
#[derive(Debug, Clone, Copy)]
pub struct Parametrization {
    pub paradox_type: ParadoxType,
    pub dim: usize,
    pub mode: Mode,
}

impl Parametrization {
    pub fn new(paradox_type: ParadoxType, dim: usize, mode: Mode) -> Self {
        Self {
            paradox_type,
            dim,
            mode,
        }
    }

    /// Free amplitude entries: Type I frees everything except h₁₁; Type II
    /// frees the upper triangle.
    pub fn free_entries(&self) -> usize {
        let k = self.dim;
        match self.paradox_type {
            ParadoxType::I => k * k - 1,
            ParadoxType::II => k * (k + 1) / 2,
        }
    }

    /// Real parameter count; complex mode adds one phase per non-pivot entry.
    pub fn free_parameters(&self) -> usize {
        let m = self.free_entries();
        match self.mode {
            Mode::RealNonnegative => m,
            Mode::Complex => 2 * m - 1,
        }
    }

    fn free_slots(&self) -> Vec<(usize, usize)> {
        let k = self.dim;
        let mut slots = Vec::with_capacity(self.free_entries());
        for i in 0..k {
            for j in 0..k {
                let free = match self.paradox_type {
                    ParadoxType::I => !(i == 0 && j == 0),
                    ParadoxType::II => j >= i,
                };
                if free {
                    slots.push((i, j));
                }
            }
        }
        slots
    }

    pub fn embed(&self, params: &[f64]) -> Result<StateMatrix, OptimError> {
        let expected = self.free_parameters();
        if params.len() != expected {
            return Err(OptimError::ParameterCount {
                expected,
                got: params.len(),
            });
        }
        let m = self.free_entries();
        let mags = &params[..m];
        let norm: f64 = mags.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(OptimError::ZeroParameters);
        }
        let mut amplitudes = ComplexMatrix::zeros(self.dim, self.dim);
        for (idx, (i, j)) in self.free_slots().into_iter().enumerate() {
            let r = mags[idx] / norm;
            amplitudes[(i, j)] = match self.mode {
                Mode::RealNonnegative => Complex64::new(r, 0.0),
                Mode::Complex => {
                    // The pivot (first) entry carries the fixed global phase.
                    if idx == 0 {
                        Complex64::new(r, 0.0)
                    } else {
                        Complex64::from_polar(r, params[m + idx - 1])
                    }
                }
            };
        }
        Ok(StateMatrix::renormalized(amplitudes).expect("nonzero by construction"))
    }

    /// Recovers the real-mode parameter vector of a state that already
    /// matches the constraint pattern.
    pub fn extract(&self, h: &StateMatrix) -> Vec<f64> {
        self.free_slots()
            .into_iter()
            .map(|(i, j)| h.amplitudes()[(i, j)].re)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizationConfig {
    pub restarts: u32,
    pub seed: u64,
    pub max_iterations: u32,
    /// Convergence threshold on the simplex objective spread.
    pub convergence_tol: f64,
    pub initial_simplex_scale: f64,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            max_iterations: 20_000,
            convergence_tol: 1e-12,
            initial_simplex_scale: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub objective: Objective,
    pub dim: usize,
    pub target_n: Option<usize>,
    pub best_value: f64,
    pub best_state: StateMatrix,
    pub bound: Option<f64>,
    pub restarts_used: u32,
    pub seed: u64,
    pub converged: bool,
    pub wall_ms: u64,
}

fn restart_rng(seed: u64, restart: u32) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(restart as u64).to_le_bytes());
    bytes[16] = 0x9e;
    bytes[17] = 0x37;
    ChaCha8Rng::from_seed(bytes)
}

/// Multi-start Nelder-Mead maximization of `objective` over the embedding.
///
/// Deterministic given (seed, restarts); restarts merge by best value with
/// ties broken by lower restart index, so parallel scheduling cannot change
/// the outcome.
pub fn maximize(
    objective: Objective,
    p: &Parametrization,
    cfg: &OptimizationConfig,
) -> Result<OptimizationResult, OptimError> {
    if objective.paradox_type() != p.paradox_type {
        return Err(OptimError::IncompatibleObjective(
            objective.to_string(),
            p.paradox_type,
        ));
    }
    if cfg.restarts == 0 {
        return Err(OptimError::ZeroRestarts);
    }
    let start = Instant::now();
    let nparam = p.free_parameters();
    let m = p.free_entries();
    let f = |params: &[f64]| -> f64 {
        match p.embed(params) {
            Ok(state) => match objective.evaluate(&state) {
                Ok(v) => -v,
                Err(_) => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };

    let runs: Vec<(f64, Vec<f64>, bool)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(cfg.seed, r);
            let mut x0 = vec![0.0; nparam];
            for x in x0.iter_mut().take(m) {
                *x = rng.random::<f64>();
            }
            for x in x0.iter_mut().skip(m) {
                *x = rng.random::<f64>() * std::f64::consts::TAU;
            }
            let out = nelder_mead(
                &f,
                &x0,
                cfg.initial_simplex_scale,
                cfg.max_iterations,
                cfg.convergence_tol,
            );
            (out.best_f, out.best_x, out.converged)
        })
        .collect();

    let mut best_idx = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best_idx].0 {
            best_idx = i;
        }
    }
    let (_, best_x, converged) = &runs[best_idx];
    let best_state = p.embed(best_x)?;
    let best_value = objective.evaluate(&best_state)?;
    Ok(OptimizationResult {
        objective,
        dim: p.dim,
        target_n: objective.target_n(),
        best_value,
        best_state,
        bound: objective.bound(),
        restarts_used: cfg.restarts,
        seed: cfg.seed,
        converged: *converged,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

struct NmOutput {
    best_x: Vec<f64>,
    best_f: f64,
    converged: bool,
}

/// Adaptive Nelder-Mead (coefficients scaled with dimension) on an initial
/// axis-aligned simplex of the given scale.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iterations: u32,
    ftol: f64,
) -> NmOutput {
    let n = x0.len();
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += scale;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut converged = false;
    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= ftol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in simplex.iter().take(n) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let at = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };
        let xr = at(alpha);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = at(alpha * beta);
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = at(alpha * gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = at(-gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(simplex[n - 1].1) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for (x, fx) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    *fx = f(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    NmOutput {
        best_x: simplex[0].0.clone(),
        best_f: simplex[0].1,
        converged,
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub dim: usize,
    pub best_value: f64,
    pub deviation_from_reference: f64,
    pub seed: u64,
    pub restarts: u32,
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub objective: Objective,
    pub target_n: usize,
    pub reference_value: f64,
    pub rows: Vec<ScanRow>,
}

/// One maximization per dimension; deviations are taken against the
/// dim = target_n value. Restart budget is raised to 256 for k ≥ 6 where the
/// landscape grows more multi-modal.
pub fn scan_dimensions(
    objective: Objective,
    target_n: usize,
    dims: impl IntoIterator<Item = usize>,
    cfg: &OptimizationConfig,
) -> Result<ScanReport, OptimError> {
    if target_n < 2 {
        return Err(OptimError::InvalidRange(format!(
            "target_n must be at least 2, got {target_n}"
        )));
    }
    let dims: Vec<usize> = dims.into_iter().collect();
    if dims.is_empty() {
        return Err(OptimError::InvalidRange("empty dimension range".into()));
    }
    if let Some(&bad) = dims.iter().find(|&&d| d < target_n) {
        return Err(OptimError::InvalidRange(format!(
            "dimension {bad} is below target_n {target_n}"
        )));
    }
    let run = |dim: usize| -> Result<OptimizationResult, OptimError> {
        let mut c = *cfg;
        if dim >= 6 {
            c.restarts = c.restarts.max(256);
        }
        let p = Parametrization::new(objective.paradox_type(), dim, Mode::RealNonnegative);
        maximize(objective, &p, &c)
    };
    let mut results: Vec<OptimizationResult> = Vec::with_capacity(dims.len());
    for &dim in &dims {
        results.push(run(dim)?);
    }
    let reference_value = match results.iter().find(|r| r.dim == target_n) {
        Some(r) => r.best_value,
        None => run(target_n)?.best_value,
    };
    let mut rows: Vec<ScanRow> = results
        .into_iter()
        .map(|r| ScanRow {
            dim: r.dim,
            best_value: r.best_value,
            deviation_from_reference: (r.best_value - reference_value).abs(),
            seed: r.seed,
            restarts: r.restarts_used,
            wall_ms: r.wall_ms,
        })
        .collect();
    rows.sort_by_key(|r| r.dim);
    Ok(ScanReport {
        objective,
        target_n,
        reference_value,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct StandardFormCheck {
    pub rank_ok: bool,
    pub value_ok: bool,
    pub singular_values: Vec<f64>,
}

/// Certifies that a partial-sum optimum collapses to the block form
/// diag(H_n, 0): at most `target_n` singular values above `tol`, and a value
/// matching a fresh dim = target_n reference run within 2e-4.
pub fn standard_form_check(
    r: &OptimizationResult,
    target_n: usize,
    tol: f64,
) -> Result<StandardFormCheck, OptimError> {
    match r.objective {
        Objective::PartialSum(n) if n == target_n => {}
        other => {
            return Err(OptimError::MalformedResult(format!(
                "expected a partial_sum({target_n}) result, got {other}"
            )))
        }
    }
    if r.dim < target_n {
        return Err(OptimError::MalformedResult(format!(
            "result dimension {} is below target_n {target_n}",
            r.dim
        )));
    }
    let sv = singular_values(r.best_state.amplitudes());
    let rank_ok = sv.iter().filter(|&&s| s > tol).count() <= target_n;
    let cfg = OptimizationConfig {
        restarts: r.restarts_used,
        seed: r.seed,
        ..OptimizationConfig::default()
    };
    let p = Parametrization::new(ParadoxType::II, target_n, Mode::RealNonnegative);
    let reference = maximize(r.objective, &p, &cfg)?.best_value;
    let value_ok = (r.best_value - reference).abs() < 2e-4;
    Ok(StandardFormCheck {
        rank_ok,
        value_ok,
        singular_values: sv,
    })
}

/// Norm of the central-difference gradient of the objective at `h`, taken
/// along the real-mode free parameters and projected onto the tangent space
/// of the normalization sphere.
pub fn finite_difference_probe(
    objective: Objective,
    h: &StateMatrix,
    step: f64,
) -> Result<f64, OptimError> {
    if step <= 0.0 {
        return Err(OptimError::NonPositiveStep);
    }
    let p = Parametrization::new(objective.paradox_type(), h.dim(), Mode::RealNonnegative);
    let params = p.extract(h);
    let eval = |x: &[f64]| -> Result<f64, OptimError> {
        Ok(objective.evaluate(&p.embed(x)?)?)
    };
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let mut plus = params.clone();
        plus[i] += step;
        let mut minus = params.clone();
        minus[i] -= step;
        grad[i] = (eval(&plus)? - eval(&minus)?) / (2.0 * step);
    }
    let norm: f64 = params.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radial: f64 = grad
        .iter()
        .zip(&params)
        .map(|(g, x)| g * x / norm)
        .sum();
    let tangent_sq: f64 = grad
        .iter()
        .zip(&params)
        .map(|(g, x)| {
            let t = g - radial * x / norm;
            t * t
        })
        .sum();
    Ok(tangent_sq.sqrt())
}
