//! Hardy-paradox scenarios over bipartite pure states.
//!
//! A state is a unit-Frobenius-norm amplitude matrix H. Both paradox types
//! force a set of joint probabilities to zero; the measurement settings that
//! realize the zeros are constructed here (linear solve / null space for
//! Type I, Gram-Schmidt for Type II), together with the probability tables
//! and the analytic bound (5√5−11)/2 they are compared against.

use num_complex::Complex64;
use thiserror::Error;

use crate::matcore::{
    antidiagonal_permutation, conj_transpose, frobenius_norm, gram_schmidt_parts,
    gram_schmidt_rows, matmul, solve_against_block, ComplexMatrix,
};

/// Largest |h₁₁| for which a state still counts as Type I.
pub const H11_TOL: f64 = 1e-8;
/// Default Gram-Schmidt dependency threshold for setting construction.
pub const DEFAULT_GS_TOL: f64 = 1e-10;
/// Default regularization for the Type-I linear solves.
pub const DEFAULT_REG: f64 = 1e-12;
/// Accepted deviation of an input state's Frobenius norm from 1.
pub const NORM_TOL: f64 = 1e-6;
/// Unitarity residual allowed for measurement settings.
pub const UNITARITY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum HardyError {
    #[error("state must be at least 2x2")]
    DimensionTooSmall,
    #[error("state matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("dimension mismatch between state ({0}) and settings ({1})")]
    DimensionMismatch(usize, usize),
    #[error("settings are not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("|h11| = {0:.3e} is too large for a Type-I state")]
    H11TooLarge(f64),
    #[error("state is not upper-triangular (residual {0:.3e})")]
    NotUpperTriangular(f64),
    #[error("t vector is degenerate (|t| = {0:.3e})")]
    DegenerateT(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParadoxType {
    I,
    II,
}

impl std::fmt::Display for ParadoxType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParadoxType::I => write!(f, "I"),
            ParadoxType::II => write!(f, "II"),
        }
    }
}

/// A bipartite pure state as a k×k amplitude matrix with unit Frobenius norm.
///
/// Construction renormalizes to machine precision; inputs further than
/// [`NORM_TOL`] from unit norm are rejected (callers that accept sloppier
/// transcriptions renormalize explicitly first).
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    amplitudes: ComplexMatrix,
}

impl StateMatrix {
    pub fn new(amplitudes: ComplexMatrix) -> Result<Self, HardyError> {
        let deviation = (frobenius_norm(&amplitudes) - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(HardyError::NotNormalized(deviation));
        }
        Self::renormalized(amplitudes)
    }

    /// Accepts any nonzero matrix and scales it to unit Frobenius norm.
    pub fn renormalized(amplitudes: ComplexMatrix) -> Result<Self, HardyError> {
        if !amplitudes.is_square() {
            return Err(HardyError::NotSquare(amplitudes.rows(), amplitudes.cols()));
        }
        let norm = frobenius_norm(&amplitudes);
        if norm == 0.0 {
            return Err(HardyError::NotNormalized(1.0));
        }
        Ok(Self {
            amplitudes: amplitudes.scale(Complex64::new(1.0 / norm, 0.0)),
        })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, HardyError> {
        let m = ComplexMatrix::from_real(dim, dim, entries)
            .map_err(|_| HardyError::NotSquare(dim, entries.len() / dim.max(1)))?;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.rows()
    }

    pub fn amplitudes(&self) -> &ComplexMatrix {
        &self.amplitudes
    }

    /// Largest magnitude below the main diagonal.
    pub fn lower_triangular_residual(&self) -> f64 {
        let k = self.dim();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..i {
                worst = worst.max(self.amplitudes[(i, j)].norm());
            }
        }
        worst
    }
}

/// The block decomposition (h₁₁, h⃗₁₂, h⃗₂₁, t⃗, H₂₂) of a state matrix.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub h11: Complex64,
    /// First row without its first entry (length k−1).
    pub h12: Vec<Complex64>,
    /// First column without its first entry (length k−1).
    pub h21: Vec<Complex64>,
    /// First row of H₂₂ (length k−1).
    pub t: Vec<Complex64>,
    /// Trailing (k−1)×(k−1) block.
    pub h22: ComplexMatrix,
}

pub fn block_split(h: &StateMatrix) -> Result<Blocks, HardyError> {
    let k = h.dim();
    if k < 2 {
        return Err(HardyError::DimensionTooSmall);
    }
    let a = h.amplitudes();
    let h12 = (1..k).map(|j| a[(0, j)]).collect();
    let h21 = (1..k).map(|i| a[(i, 0)]).collect();
    let t = (1..k).map(|j| a[(1, j)]).collect();
    let mut h22 = ComplexMatrix::zeros(k - 1, k - 1);
    for i in 1..k {
        for j in 1..k {
            h22[(i - 1, j - 1)] = a[(i, j)];
        }
    }
    Ok(Blocks {
        h11: a[(0, 0)],
        h12,
        h21,
        t,
        h22,
    })
}

/// The unitaries defining both parties' second measurement settings; the
/// state in those settings is Q = U·H·V.
#[derive(Debug, Clone)]
pub struct SettingPair {
    u: ComplexMatrix,
    v: ComplexMatrix,
}

impl SettingPair {
    pub fn new(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self, HardyError> {
        if u.rows() != v.rows() || !u.is_square() || !v.is_square() {
            return Err(HardyError::DimensionMismatch(u.rows(), v.rows()));
        }
        let residual = u.unitarity_residual().max(v.unitarity_residual());
        if residual > UNITARITY_TOL {
            return Err(HardyError::NotUnitary(residual));
        }
        Ok(Self { u, v })
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }
}

/// Joint-outcome probabilities |q_ij|² with the aggregates used by both
/// paradox types.
#[derive(Debug, Clone)]
pub struct ProbabilityTable {
    dim: usize,
    q: ComplexMatrix,
    p: Vec<f64>,
}

impl ProbabilityTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.dim + j]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// P_I = P(A₂ = 1, B₂ = 1).
    pub fn p_i(&self) -> f64 {
        self.p(0, 0)
    }

    /// P_II(1,2), the dimension-independent pair term.
    pub fn pair12(&self) -> f64 {
        self.p(0, 1)
    }

    /// Σ over i < j of p[i][j].
    pub fn full_pii(&self) -> f64 {
        self.partial(self.dim)
    }

    /// Σ over 1 ≤ i < j ≤ n (1-based) of p[i][j].
    pub fn partial(&self, n: usize) -> f64 {
        let n = n.min(self.dim);
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.p(i, j);
            }
        }
        s
    }
}

/// Express the state in both parties' second settings and tabulate |q_ij|².
pub fn transform_state(h: &StateMatrix, s: &SettingPair) -> Result<ProbabilityTable, HardyError> {
    let k = h.dim();
    if s.dim() != k {
        return Err(HardyError::DimensionMismatch(k, s.dim()));
    }
    let q = matmul(&matmul(&s.u, h.amplitudes()).expect("dims"), &s.v).expect("dims");
    let p: Vec<f64> = q.entries().iter().map(|z| z.norm_sqr()).collect();
    let table = ProbabilityTable { dim: k, q, p };
    debug_assert!((table.total() - 1.0).abs() < 1e-9);
    Ok(table)
}

/// Residuals of the constraints a Hardy scenario forces to zero.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub paradox_type: ParadoxType,
    pub residuals: Vec<(String, f64)>,
    pub max_residual: f64,
}

impl ConstraintReport {
    fn new(paradox_type: ParadoxType, residuals: Vec<(String, f64)>) -> Self {
        let max_residual = residuals.iter().map(|(_, m)| *m).fold(0.0, f64::max);
        Self {
            paradox_type,
            residuals,
            max_residual,
        }
    }
}

/// Type-I residuals: |h₁₁|, |h'_{1i}| for H' = UH, |h''_{i1}| for H'' = HV.
pub fn type1_constraint_residuals(h: &StateMatrix, s: &SettingPair) -> ConstraintReport {
    let k = h.dim();
    let hp = matmul(&s.u, h.amplitudes()).expect("dims");
    let hpp = matmul(h.amplitudes(), &s.v).expect("dims");
    let mut residuals = vec![("h11".to_string(), h.amplitudes()[(0, 0)].norm())];
    for i in 1..k {
        residuals.push((format!("h'_1{}", i + 1), hp[(0, i)].norm()));
    }
    for i in 1..k {
        residuals.push((format!("h''_{}1", i + 1), hpp[(i, 0)].norm()));
    }
    ConstraintReport::new(ParadoxType::I, residuals)
}

/// Type-II residuals: the below-diagonal magnitudes of the state itself.
pub fn type2_constraint_residuals(h: &StateMatrix) -> ConstraintReport {
    let k = h.dim();
    let mut residuals = Vec::new();
    for i in 0..k {
        for j in 0..i {
            residuals.push((
                format!("h_{}{}", i + 1, j + 1),
                h.amplitudes()[(i, j)].norm(),
            ));
        }
    }
    ConstraintReport::new(ParadoxType::II, residuals)
}

/// Smallest-residual unit row `u` with `u · stacked = 0`, where `stacked` has
/// `v` as its first row above `block`. Tries the regularized solve first and
/// falls back to an exact null-space computation when the solve's candidate
/// cannot satisfy the constraint (singular block with incompatible `v`).
fn constrained_first_row(
    v: &[Complex64],
    block: &ComplexMatrix,
    reg: f64,
) -> Vec<Complex64> {
    let k = block.rows() + 1;
    let w = solve_against_block(v, block, reg);
    let mut row = Vec::with_capacity(k);
    row.push(Complex64::ONE);
    row.extend_from_slice(&w);
    let norm: f64 = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in row.iter_mut() {
        *z /= norm;
    }
    // Constraint residual of the candidate: |u₁·v + (u₂..u_k)·block|.
    let mut res = 0.0f64;
    for j in 0..block.cols() {
        let mut s = row[0] * v[j];
        for i in 0..block.rows() {
            s += row[i + 1] * block[(i, j)];
        }
        res += s.norm_sqr();
    }
    if res.sqrt() <= 1e-9 {
        return row;
    }
    // Null space of the stacked k×(k−1) matrix always exists; recover it by
    // completing the orthonormal basis of its conjugated column span.
    let mut m = ComplexMatrix::zeros(k, k);
    for j in 0..k - 1 {
        m[(j, 0)] = v[j].conj();
        for i in 0..block.rows() {
            m[(j, i + 1)] = block[(i, j)].conj();
        }
    }
    let out = gram_schmidt_rows(&m, 1e-12);
    let slot = *out
        .completed_indices
        .first()
        .expect("k x (k-1) system has a null vector");
    out.q.row(slot).to_vec()
}

/// Unitary completion of a prescribed first row.
fn complete_unitary_from_row(row: &[Complex64]) -> ComplexMatrix {
    let k = row.len();
    let mut m = ComplexMatrix::zeros(k, k);
    for j in 0..k {
        m[(0, j)] = row[j];
    }
    gram_schmidt_rows(&m, 1e-10).q
}

/// Construct the Type-I settings: the first row of U solves
/// u₁₁·h⃗₁₂ + (u₁₂..u₁ₖ)·H₂₂ = 0 with u₁₁ ≥ 0, the first column of V solves
/// the transposed condition, and the rest is deterministic unitary completion.
pub fn type1_settings(h: &StateMatrix, reg: f64) -> Result<SettingPair, HardyError> {
    let blocks = block_split(h)?;
    let h11 = blocks.h11.norm();
    if h11 >= H11_TOL {
        return Err(HardyError::H11TooLarge(h11));
    }
    let u_row = constrained_first_row(&blocks.h12, &blocks.h22, reg);
    let u = complete_unitary_from_row(&u_row);
    // Column condition: h⃗₂₁·v₁₁ + H₂₂·(v₂₁..v_k1)ᵀ = 0 is the row condition
    // on the transposed block.
    let v_col = constrained_first_row(&blocks.h21, &blocks.h22.transpose(), reg);
    let v_row_conj: Vec<Complex64> = v_col.iter().map(|z| z.conj()).collect();
    let v = conj_transpose(&complete_unitary_from_row(&v_row_conj));
    SettingPair::new(u, v)
}

/// P_I = |q₁₁|² under the constructed Type-I settings.
pub fn type1_probability(h: &StateMatrix, reg: f64) -> Result<f64, HardyError> {
    let s = type1_settings(h, reg)?;
    Ok(transform_state(h, &s)?.p_i())
}

/// Ordering of canonical basis candidates when completing rank-deficient
/// setting constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionOrder {
    Canonical,
    ReversedCanonical,
}

fn completion_indices(k: usize, order: CompletionOrder) -> Vec<usize> {
    match order {
        CompletionOrder::Canonical => (0..k).collect(),
        CompletionOrder::ReversedCanonical => (0..k).rev().collect(),
    }
}

/// Construct the Type-II settings V = (Orthogonalize[H])† and
/// U = conj(F · Orthogonalize[F·Hᵀ]).
///
/// `tol` is the Gram-Schmidt dependency threshold. For rank-deficient input
/// the accepted directions are arranged so that they occupy the leading
/// outcome slots (on the U side this means completions are inserted before
/// the anti-diagonal flip); this reproduces the evaluation of the
/// rank-truncated state in its compressed basis.
pub fn type2_settings(h: &StateMatrix, tol: f64) -> Result<SettingPair, HardyError> {
    type2_settings_ordered(h, tol, CompletionOrder::Canonical)
}

pub fn type2_settings_ordered(
    h: &StateMatrix,
    tol: f64,
    order: CompletionOrder,
) -> Result<SettingPair, HardyError> {
    let k = h.dim();
    if k < 2 {
        return Err(HardyError::DimensionTooSmall);
    }
    let lower = h.lower_triangular_residual();
    if lower > tol.max(NORM_TOL) {
        return Err(HardyError::NotUpperTriangular(lower));
    }
    let comp_order = completion_indices(k, order);

    let v_parts = gram_schmidt_parts(h.amplitudes(), tol, &comp_order);
    let mut gv = ComplexMatrix::zeros(k, k);
    for (i, row) in v_parts
        .accepted
        .iter()
        .chain(v_parts.completions.iter())
        .enumerate()
    {
        for j in 0..k {
            gv[(i, j)] = row[j];
        }
    }
    let v = conj_transpose(&gv);

    let f = antidiagonal_permutation(k);
    let fht = matmul(&f, &h.amplitudes().transpose()).expect("dims");
    let u_parts = gram_schmidt_parts(&fht, tol, &comp_order);
    let mut gu = ComplexMatrix::zeros(k, k);
    for (i, row) in u_parts
        .completions
        .iter()
        .chain(u_parts.accepted.iter())
        .enumerate()
    {
        for j in 0..k {
            gu[(i, j)] = row[j];
        }
    }
    let u = matmul(&f, &gu).expect("dims").conj();
    SettingPair::new(u, v)
}

/// Full probability table under the constructed Type-II settings.
pub fn type2_probabilities(h: &StateMatrix, tol: f64) -> Result<ProbabilityTable, HardyError> {
    let s = type2_settings(h, tol)?;
    transform_state(h, &s)
}

/// The Type-I bound integrand x·y·z/((z+x)(z+y)) on the norm simplex.
pub fn theorem1_norm_bound(x: f64, y: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    x * y * z / ((z + x) * (z + y))
}

/// (5√5 − 11)/2, the dimension-independent maximum for P_I and P_II(1,2).
pub fn analytic_max() -> f64 {
    (5.0 * 5f64.sqrt() - 11.0) / 2.0
}

/// The (x, y, z) = (|h⃗₁₂|², |h⃗₂₁|², |H₂₂|²) split attaining the bound.
pub fn optimal_norm_split() -> (f64, f64, f64) {
    let a2 = (3.0 - 5f64.sqrt()) / 2.0;
    (a2, a2, 5f64.sqrt() - 2.0)
}

/// The 2-dim state a|01⟩ + a|10⟩ + e^{iθ}√(1−2a²)|11⟩ with a² = (3−√5)/2,
/// which attains the Type-I maximum for every θ.
pub fn derived_optimal_type1_state(theta: f64) -> StateMatrix {
    let a = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
    let b = (5f64.sqrt() - 2.0).sqrt();
    let phase = Complex64::from_polar(b, theta);
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::ZERO,
            Complex64::new(a, 0.0),
            Complex64::new(a, 0.0),
            phase,
        ],
    )
    .expect("valid 2x2");
    StateMatrix::new(m).expect("unit norm by construction")
}

/// The 2-dim upper-triangular state attaining the Type-II pair maximum.
pub fn optimal_type2_dim2() -> StateMatrix {
    let a = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
    let b = (5f64.sqrt() - 2.0).sqrt();
    StateMatrix::from_real(2, &[a, b, 0.0, a]).expect("unit norm by construction")
}

/// Reference optimal state for the n = 3 partial sum in dimension 3.
pub fn optimal_partial3_dim3() -> StateMatrix {
    StateMatrix::renormalized(
        ComplexMatrix::from_real(
            3,
            3,
            &[
                0.498328, 0.316483, 0.329301, //
                0.0, 0.441108, 0.316483, //
                0.0, 0.0, 0.498328,
            ],
        )
        .expect("3x3"),
    )
    .expect("nonzero")
}

/// The dimension-4 embedding of the n = 3 optimum in standard block form.
pub fn optimal_partial3_dim4() -> StateMatrix {
    StateMatrix::renormalized(
        ComplexMatrix::from_real(
            4,
            4,
            &[
                0.498328, 0.316483, 0.329301, 0.0, //
                0.0, 0.441108, 0.316483, 0.0, //
                0.0, 0.0, 0.498328, 0.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        )
        .expect("4x4"),
    )
    .expect("nonzero")
}

/// A rank-3 dimension-5 optimal state for the n = 3 partial sum that is not
/// in standard block form (its trailing columns are parallel).
pub fn optimal_partial3_dim5() -> StateMatrix {
    StateMatrix::renormalized(
        ComplexMatrix::from_real(
            5,
            5,
            &[
                0.49832, 0.316487, 0.232321, 0.187338, 0.139177, //
                0.0, 0.441109, 0.223283, 0.18005, 0.133762, //
                0.0, 0.0, 0.351577, 0.283503, 0.210619, //
                0.0, 0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, 0.0,
            ],
        )
        .expect("5x5"),
    )
    .expect("nonzero")
}

/// Compares |v₁₂|² read from the constructed Type-II settings against its
/// closed form in terms of (h₁₁, h⃗₁₂, t⃗).
pub fn v12_formula_check(h: &StateMatrix, tol: f64) -> Result<(f64, f64), HardyError> {
    let blocks = block_split(h)?;
    let t_norm2: f64 = blocks.t.iter().map(|z| z.norm_sqr()).sum();
    if t_norm2.sqrt() <= 1e-8 {
        return Err(HardyError::DegenerateT(t_norm2.sqrt()));
    }
    let s = type2_settings(h, tol)?;
    let lhs = s.v()[(0, 1)].norm_sqr();
    let h11_2 = blocks.h11.norm_sqr();
    let h12_2: f64 = blocks.h12.iter().map(|z| z.norm_sqr()).sum();
    let inner: Complex64 = blocks
        .h12
        .iter()
        .zip(&blocks.t)
        .map(|(a, b)| a * b.conj())
        .sum();
    let inner2 = inner.norm_sqr();
    let a = h11_2 + h12_2;
    let rhs = h11_2 * inner2 / (a * a * t_norm2 - a * inner2);
    Ok((lhs, rhs))
}

/// Compares |q₁₂| against |u₁₁·h₁₁·v₁₂| for the constructed Type-II settings.
pub fn q12_identity_check(h: &StateMatrix, tol: f64) -> Result<(f64, f64), HardyError> {
    let s = type2_settings(h, tol)?;
    let table = transform_state(h, &s)?;
    let lhs = table.q()[(0, 1)].norm();
    let rhs = (s.u()[(0, 0)] * h.amplitudes()[(0, 0)] * s.v()[(0, 1)]).norm();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn block_split_2x2() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap();
        let b = block_split(&h).unwrap();
        let n = (14f64).sqrt();
        assert_eq!(b.h11, Complex64::ZERO);
        assert_abs_diff_eq!(b.h12[0].re, 1.0 / n, epsilon = 1e-12);
        assert_abs_diff_eq!(b.h21[0].re, 2.0 / n, epsilon = 1e-12);
        assert_abs_diff_eq!(b.t[0].re, 3.0 / n, epsilon = 1e-12);
        assert_abs_diff_eq!(b.h22[(0, 0)].re, 3.0 / n, epsilon = 1e-12);
    }

    #[test]
    fn block_split_h3() {
        let b = block_split(&optimal_partial3_dim3()).unwrap();
        assert_abs_diff_eq!(b.h11.re, 0.498328, epsilon = 1e-5);
        assert_abs_diff_eq!(b.h12[0].re, 0.316483, epsilon = 1e-5);
        assert_abs_diff_eq!(b.h12[1].re, 0.329301, epsilon = 1e-5);
        assert!(b.h21[0].norm() < 1e-12 && b.h21[1].norm() < 1e-12);
    }

    #[test]
    fn block_split_diagonal() {
        let k = 3;
        let s = 1.0 / (k as f64).sqrt();
        let h = StateMatrix::renormalized(ComplexMatrix::identity(k)).unwrap();
        let b = block_split(&h).unwrap();
        assert_abs_diff_eq!(b.h11.re, s, epsilon = 1e-12);
        assert!(b.h12.iter().all(|z| z.norm() == 0.0));
        assert!(b.h21.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn block_split_rejects_dim1() {
        let h = StateMatrix::from_real(1, &[1.0]).unwrap();
        assert!(matches!(
            block_split(&h),
            Err(HardyError::DimensionTooSmall)
        ));
    }

    #[test]
    fn transform_identity_settings() {
        let h = optimal_partial3_dim3();
        let id = ComplexMatrix::identity(3);
        let s = SettingPair::new(id.clone(), id).unwrap();
        let table = transform_state(&h, &s).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(
                    table.p(i, j),
                    h.amplitudes()[(i, j)].norm_sqr(),
                    epsilon = 1e-12
                );
            }
        }
        assert_abs_diff_eq!(table.total(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn transform_rejects_non_unitary() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            SettingPair::new(m.clone(), m),
            Err(HardyError::NotUnitary(_))
        ));
    }

    #[test]
    fn type1_residual_reads_h11() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(2, 2, &[0.3, 0.5, 0.5, 0.6403124237432849]).unwrap(),
        )
        .unwrap();
        let id = ComplexMatrix::identity(2);
        let s = SettingPair::new(id.clone(), id).unwrap();
        let report = type1_constraint_residuals(&h, &s);
        assert_eq!(report.residuals[0].0, "h11");
        assert_abs_diff_eq!(report.residuals[0].1, 0.3, epsilon = 1e-9);
        assert_eq!(
            report.max_residual,
            report.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
        );
    }

    #[test]
    fn type1_settings_satisfy_constraints() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(
                3,
                3,
                &[0.0, 0.4, 0.2, 0.3, 0.5, 0.1, 0.2, 0.3, 0.55],
            )
            .unwrap(),
        )
        .unwrap();
        let s = type1_settings(&h, DEFAULT_REG).unwrap();
        let report = type1_constraint_residuals(&h, &s);
        assert!(report.max_residual < 1e-9, "residual {}", report.max_residual);
    }

    #[test]
    fn type1_settings_dim2_direction() {
        // H = [[0,a],[b,c]] → u row ∝ (c, −a), v col ∝ (c, −b).
        let (a, b, c) = (0.5, 0.4, 0.59f64.sqrt());
        let h = StateMatrix::from_real(2, &[0.0, a, b, c]).unwrap();
        let s = type1_settings(&h, 0.0).unwrap();
        let n = (a * a + c * c).sqrt();
        assert_abs_diff_eq!(s.u()[(0, 0)].re, c / n, epsilon = 1e-9);
        assert_abs_diff_eq!(s.u()[(0, 1)].re, -a / n, epsilon = 1e-9);
        let nv = (b * b + c * c).sqrt();
        assert_abs_diff_eq!(s.v()[(0, 0)].re, c / nv, epsilon = 1e-9);
        assert_abs_diff_eq!(s.v()[(1, 0)].re, -b / nv, epsilon = 1e-9);
    }

    #[test]
    fn type1_u11_matches_closed_form() {
        let h = derived_optimal_type1_state(0.0);
        let blocks = block_split(&h).unwrap();
        let s = type1_settings(&h, 0.0).unwrap();
        let sol = solve_against_block(&blocks.h12, &blocks.h22, 0.0);
        let expect = 1.0 / (1.0 + sol.iter().map(|z| z.norm_sqr()).sum::<f64>());
        assert_abs_diff_eq!(s.u()[(0, 0)].norm_sqr(), expect, epsilon = 1e-10);
    }

    #[test]
    fn type1_degenerate_block_forces_u11_zero() {
        let s = 1.0 / 2f64.sqrt();
        let h = StateMatrix::from_real(2, &[0.0, s, s, 0.0]).unwrap();
        let settings = type1_settings(&h, DEFAULT_REG).unwrap();
        assert!(settings.u()[(0, 0)].norm() < 1e-9);
        assert!(type1_probability(&h, DEFAULT_REG).unwrap() < 1e-18);
        let report = type1_constraint_residuals(&h, &settings);
        assert!(report.max_residual < 1e-9);
    }

    #[test]
    fn type1_rejects_large_h11() {
        let h = StateMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            type1_settings(&h, DEFAULT_REG),
            Err(HardyError::H11TooLarge(_))
        ));
    }

    #[test]
    fn type1_probability_at_derived_optimum() {
        for theta in [0.0, 1.0, std::f64::consts::PI] {
            let h = derived_optimal_type1_state(theta);
            let p = type1_probability(&h, DEFAULT_REG).unwrap();
            assert_abs_diff_eq!(p, analytic_max(), epsilon = 1e-10);
        }
    }

    #[test]
    fn type1_probability_closed_form() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(
                3,
                3,
                &[0.0, 0.35, 0.25, 0.3, 0.6, 0.15, 0.25, 0.1, 0.5],
            )
            .unwrap(),
        )
        .unwrap();
        let p = type1_probability(&h, 0.0).unwrap();
        let blocks = block_split(&h).unwrap();
        let xs = solve_against_block(&blocks.h12, &blocks.h22, 0.0);
        let num: Complex64 = xs.iter().zip(&blocks.h21).map(|(a, b)| a * b).sum();
        let ys = solve_against_block(&blocks.h21, &blocks.h22.transpose(), 0.0);
        let d1 = 1.0 + xs.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let d2 = 1.0 + ys.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert_abs_diff_eq!(p, num.norm_sqr() / (d1 * d2), epsilon = 1e-9);
    }

    #[test]
    fn type2_settings_h3() {
        let h = optimal_partial3_dim3();
        let s = type2_settings(&h, DEFAULT_GS_TOL).unwrap();
        let hp = matmul(s.u(), h.amplitudes()).unwrap();
        let hpp = matmul(h.amplitudes(), s.v()).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(hp[(i, j)].norm() < 1e-8);
                assert!(hpp[(i, j)].norm() < 1e-8);
            }
        }
    }

    #[test]
    fn type2_rejects_non_triangular() {
        let h = StateMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            type2_settings(&h, DEFAULT_GS_TOL),
            Err(HardyError::NotUpperTriangular(_))
        ));
    }

    #[test]
    fn type2_diagonal_state() {
        let h = StateMatrix::renormalized(ComplexMatrix::identity(3)).unwrap();
        let table = type2_probabilities(&h, DEFAULT_GS_TOL).unwrap();
        assert_abs_diff_eq!(table.total(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn type2_dim2_optimum() {
        let table = type2_probabilities(&optimal_type2_dim2(), DEFAULT_GS_TOL).unwrap();
        assert_abs_diff_eq!(table.pair12(), analytic_max(), epsilon = 1e-6);
        assert_abs_diff_eq!(table.full_pii(), analytic_max(), epsilon = 1e-6);
    }

    #[test]
    fn type2_h3_partial_sum() {
        let table = type2_probabilities(&optimal_partial3_dim3(), DEFAULT_GS_TOL).unwrap();
        assert_abs_diff_eq!(table.partial(3), 0.141327, epsilon = 1e-4);
    }

    #[test]
    fn type2_block_embedded_dim4() {
        let table = type2_probabilities(&optimal_partial3_dim4(), DEFAULT_GS_TOL).unwrap();
        assert_abs_diff_eq!(table.partial(3), 0.141327, epsilon = 1e-4);
    }

    #[test]
    fn type2_rank_deficient_dim5() {
        // The trailing columns are only 6-digit-parallel, so the dependency
        // threshold must sit above the transcription noise.
        let table = type2_probabilities(&optimal_partial3_dim5(), 1e-5).unwrap();
        assert_abs_diff_eq!(table.partial(3), 0.141327, epsilon = 1e-4);
    }

    #[test]
    fn completion_independence_on_rank_deficient_states() {
        for (h, tol) in [
            (optimal_partial3_dim4(), DEFAULT_GS_TOL),
            (optimal_partial3_dim5(), 1e-5),
        ] {
            let a = transform_state(
                &h,
                &type2_settings_ordered(&h, tol, CompletionOrder::Canonical).unwrap(),
            )
            .unwrap();
            let b = transform_state(
                &h,
                &type2_settings_ordered(&h, tol, CompletionOrder::ReversedCanonical).unwrap(),
            )
            .unwrap();
            assert_abs_diff_eq!(a.partial(3), b.partial(3), epsilon = 1e-9);
            assert_abs_diff_eq!(a.pair12(), b.pair12(), epsilon = 1e-9);
        }
    }

    #[test]
    fn norm_bound_examples() {
        let (x, y, z) = optimal_norm_split();
        assert_abs_diff_eq!(
            theorem1_norm_bound(x, y, z),
            analytic_max(),
            epsilon = 1e-10
        );
        assert_eq!(theorem1_norm_bound(0.0, 0.5, 0.5), 0.0);
        assert_eq!(theorem1_norm_bound(0.3, 0.3, 0.0), 0.0);
    }

    #[test]
    fn analytic_max_identities() {
        assert_abs_diff_eq!(analytic_max(), 0.0901699437494745, epsilon = 1e-15);
        assert_abs_diff_eq!(
            2.0 * analytic_max() + 11.0,
            5.0 * 5f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(analytic_max() < 1.0 / 11.0);
    }

    #[test]
    fn derived_optimal_state_amplitudes() {
        let h = derived_optimal_type1_state(0.0);
        let a = h.amplitudes();
        assert_abs_diff_eq!(a[(0, 1)].re, 0.6180340, epsilon = 1e-6);
        assert_abs_diff_eq!(a[(1, 0)].re, 0.6180340, epsilon = 1e-6);
        assert_abs_diff_eq!(a[(1, 1)].re, 0.4858683, epsilon = 1e-6);
        assert_abs_diff_eq!(frobenius_norm(a), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn v12_formula_dim2() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(2, 2, &[0.6, 0.3, 0.0, 0.74]).unwrap(),
        )
        .unwrap();
        let (lhs, rhs) = v12_formula_check(&h, DEFAULT_GS_TOL).unwrap();
        let b = block_split(&h).unwrap();
        let expect = b.h12[0].norm_sqr() / (b.h11.norm_sqr() + b.h12[0].norm_sqr());
        assert_abs_diff_eq!(lhs, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(rhs, expect, epsilon = 1e-9);
    }

    #[test]
    fn v12_formula_parallel_rows() {
        // h⃗₁₂ ∝ t⃗: equality case of the bound inside the formula.
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(
                3,
                3,
                &[0.5, 0.4, 0.2, 0.0, 0.4, 0.2, 0.0, 0.0, 0.3],
            )
            .unwrap(),
        )
        .unwrap();
        let (lhs, _) = v12_formula_check(&h, DEFAULT_GS_TOL).unwrap();
        let b = block_split(&h).unwrap();
        let h12_2: f64 = b.h12.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(lhs, h12_2 / (b.h11.norm_sqr() + h12_2), epsilon = 1e-9);
    }

    #[test]
    fn v12_formula_random_3dim() {
        let h = StateMatrix::renormalized(
            ComplexMatrix::from_real(
                3,
                3,
                &[0.45, 0.31, 0.17, 0.0, 0.52, 0.23, 0.0, 0.0, 0.41],
            )
            .unwrap(),
        )
        .unwrap();
        let (lhs, rhs) = v12_formula_check(&h, DEFAULT_GS_TOL).unwrap();
        assert!((lhs - rhs).abs() < 1e-8, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn q12_identity_holds() {
        let h3 = optimal_partial3_dim3();
        let (lhs, rhs) = q12_identity_check(&h3, DEFAULT_GS_TOL).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
        let diag = StateMatrix::renormalized(ComplexMatrix::identity(3)).unwrap();
        let (l2, r2) = q12_identity_check(&diag, DEFAULT_GS_TOL).unwrap();
        assert!(l2 < 1e-12 && r2 < 1e-12);
        let h4 = StateMatrix::renormalized(
            ComplexMatrix::from_real(
                4,
                4,
                &[
                    0.4, 0.2, 0.1, 0.15, //
                    0.0, 0.45, 0.2, 0.1, //
                    0.0, 0.0, 0.5, 0.2, //
                    0.0, 0.0, 0.0, 0.35,
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let (l3, r3) = q12_identity_check(&h4, DEFAULT_GS_TOL).unwrap();
        assert!((l3 - r3).abs() < 1e-9);
    }
}
