//! Brute-force baselines that validate the analytic bounds and the
//! optimizer without sharing its search code: everything here calls only the
//! evaluation routines in [`crate::hardy`], so a bug in the optimizer cannot
//! validate itself.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hardy::{
    theorem1_norm_bound, type1_probability, type2_probabilities, HardyError, ParadoxType,
    StateMatrix, DEFAULT_GS_TOL, DEFAULT_REG,
};
use crate::matcore::ComplexMatrix;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("resolution must be at least {min}, got {got}")]
    ResolutionTooLow { min: u32, got: u32 },
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("quantity {0} is not available for paradox type {1}")]
    IncompatibleQuantity(String, ParadoxType),
    #[error(transparent)]
    Hardy(#[from] HardyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Grid,
    Sampling,
}

impl std::fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleMethod::Grid => write!(f, "grid"),
            OracleMethod::Sampling => write!(f, "sampling"),
        }
    }
}

/// The probability aggregate a sampling sweep tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampledQuantity {
    PI,
    Pair12,
    PartialSum(usize),
}

impl SampledQuantity {
    fn evaluate(&self, h: &StateMatrix) -> Result<f64, HardyError> {
        match self {
            SampledQuantity::PI => type1_probability(h, DEFAULT_REG),
            SampledQuantity::Pair12 => Ok(type2_probabilities(h, DEFAULT_GS_TOL)?.pair12()),
            SampledQuantity::PartialSum(n) => {
                Ok(type2_probabilities(h, DEFAULT_GS_TOL)?.partial(*n))
            }
        }
    }
}

impl std::fmt::Display for SampledQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampledQuantity::PI => write!(f, "P_I"),
            SampledQuantity::Pair12 => write!(f, "pair12"),
            SampledQuantity::PartialSum(n) => write!(f, "partial_sum({n})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub method: OracleMethod,
    pub paradox_type: ParadoxType,
    pub dim: usize,
    pub resolution: Option<u32>,
    pub samples: Option<u64>,
    pub best_value: f64,
    pub best_point: String,
    pub seed: Option<u64>,
}

/// Maximizes the norm-split bound xyz/((x+z)(y+z)) over the simplex
/// x + y + z = 1 on a uniform grid with `resolution` cells per axis.
/// Boundary points are included; ties resolve to the lexicographically
/// smallest (x, y).
pub fn grid_maximize_norm_bound(resolution: u32) -> Result<OracleReport, OracleError> {
    if resolution < 10 {
        return Err(OracleError::ResolutionTooLow {
            min: 10,
            got: resolution,
        });
    }
    let res = resolution as usize;
    let step = 1.0 / resolution as f64;
    let best = (0..=res)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * step;
            let mut row_best = (f64::NEG_INFINITY, 0usize, 0usize);
            for j in 0..=(res - i) {
                let y = j as f64 * step;
                let z = 1.0 - x - y;
                let v = theorem1_norm_bound(x, y, z.max(0.0));
                if v > row_best.0 {
                    row_best = (v, i, j);
                }
            }
            row_best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let (best_value, i, j) = best;
    let x = i as f64 * step;
    let y = j as f64 * step;
    let z = 1.0 - x - y;
    Ok(OracleReport {
        method: OracleMethod::Grid,
        paradox_type: ParadoxType::I,
        dim: 2,
        resolution: Some(resolution),
        samples: None,
        best_value,
        best_point: format!("norm split (x, y, z) = ({x:.6}, {y:.6}, {z:.6})"),
        seed: None,
    })
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn free_slots(paradox_type: ParadoxType, dim: usize) -> Vec<(usize, usize)> {
    let mut slots = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let free = match paradox_type {
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

/// Draws `samples` states uniformly from the unit sphere of the constraint
/// pattern's free real amplitudes and tracks the maximum of the default
/// quantity for the type (P_I for Type I, pair12 for Type II).
pub fn random_state_sampling(
    paradox_type: ParadoxType,
    dim: usize,
    samples: u64,
    seed: u64,
) -> Result<OracleReport, OracleError> {
    let quantity = match paradox_type {
        ParadoxType::I => SampledQuantity::PI,
        ParadoxType::II => SampledQuantity::Pair12,
    };
    random_state_sampling_of(quantity, paradox_type, dim, samples, seed)
}

/// [`random_state_sampling`] generalized to an explicit quantity, used for
/// empirical partial-sum ceilings.
pub fn random_state_sampling_of(
    quantity: SampledQuantity,
    paradox_type: ParadoxType,
    dim: usize,
    samples: u64,
    seed: u64,
) -> Result<OracleReport, OracleError> {
    if samples == 0 {
        return Err(OracleError::ZeroSamples);
    }
    match (quantity, paradox_type) {
        (SampledQuantity::PI, ParadoxType::I) => {}
        (SampledQuantity::Pair12 | SampledQuantity::PartialSum(_), ParadoxType::II) => {}
        (q, t) => return Err(OracleError::IncompatibleQuantity(q.to_string(), t)),
    }
    let slots = free_slots(paradox_type, dim);
    // Chunked so sweeps parallelize while each chunk's stream stays tied to
    // (seed, chunk index) — the merged max is scheduling-independent.
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c.wrapping_mul(0x9e3779b97f4a7c15)));
            let in_chunk = CHUNK.min(samples - c * CHUNK);
            let mut chunk_best = (f64::NEG_INFINITY, u64::MAX);
            for s in 0..in_chunk {
                let mut m = ComplexMatrix::zeros(dim, dim);
                for &(i, j) in &slots {
                    m[(i, j)] = Complex64::new(standard_normal(&mut rng), 0.0);
                }
                let Ok(state) = StateMatrix::renormalized(m) else {
                    continue;
                };
                let Ok(v) = quantity.evaluate(&state) else {
                    continue;
                };
                let idx = c * CHUNK + s;
                if v > chunk_best.0 {
                    chunk_best = (v, idx);
                }
            }
            chunk_best
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(OracleReport {
        method: OracleMethod::Sampling,
        paradox_type,
        dim,
        resolution: None,
        samples: Some(samples),
        best_value: best.0,
        best_point: format!("{} at sample index {}", quantity, best.1),
        seed: Some(seed),
    })
}

/// Exhaustive dimension-2 Type-I search: grids the octant of the unit
/// 2-sphere of magnitudes (|h₁₂|, |h₂₁|, |H₂₂|) with `resolution` steps per
/// spherical angle and evaluates the full Type-I pipeline at each point.
/// Phases cannot change |q₁₁|² at k = 2, so the magnitude octant is the
/// whole search space.
pub fn exhaustive_type1_dim2(resolution: u32) -> Result<OracleReport, OracleError> {
    if resolution < 50 {
        return Err(OracleError::ResolutionTooLow {
            min: 50,
            got: resolution,
        });
    }
    let res = resolution as usize;
    let astep = std::f64::consts::FRAC_PI_2 / resolution as f64;
    let best = (0..=res)
        .into_par_iter()
        .map(|ti| {
            let theta = ti as f64 * astep;
            let (st, ct) = theta.sin_cos();
            let mut row_best = (f64::NEG_INFINITY, usize::MAX, usize::MAX);
            for pj in 0..=res {
                let phi = pj as f64 * astep;
                let (sp, cp) = phi.sin_cos();
                let (x, y, z) = (st * cp, st * sp, ct);
                let mut m = ComplexMatrix::zeros(2, 2);
                m[(0, 1)] = Complex64::new(x, 0.0);
                m[(1, 0)] = Complex64::new(y, 0.0);
                m[(1, 1)] = Complex64::new(z, 0.0);
                let Ok(state) = StateMatrix::renormalized(m) else {
                    continue;
                };
                let Ok(v) = type1_probability(&state, DEFAULT_REG) else {
                    continue;
                };
                if v > row_best.0 {
                    row_best = (v, ti, pj);
                }
            }
            row_best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    let (best_value, ti, pj) = best;
    let theta = ti as f64 * astep;
    let phi = pj as f64 * astep;
    let (x, y, z) = (
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    );
    Ok(OracleReport {
        method: OracleMethod::Grid,
        paradox_type: ParadoxType::I,
        dim: 2,
        resolution: Some(resolution),
        samples: None,
        best_value,
        best_point: format!("magnitudes (|h12|, |h21|, |H22|) = ({x:.6}, {y:.6}, {z:.6})"),
        seed: None,
    })
}
