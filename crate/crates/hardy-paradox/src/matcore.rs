//! Dense complex matrix arithmetic for small amplitude matrices.
//!
//! Everything here operates on matrices of side at most ~12, so the
//! implementations favour clarity and reproducibility over asymptotics:
//! classical Gram-Schmidt with one re-orthogonalization pass, explicit
//! Gaussian elimination for the regularized solves, and a deterministic
//! canonical-basis completion rule for rank-deficient input.

use num_complex::Complex64;
use thiserror::Error;

/// Numerical zero used when picking the leading entry for phase fixing.
const PHASE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix must have positive dimensions")]
    Empty,
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, MatError> {
        if rows == 0 || cols == 0 {
            return Err(MatError::Empty);
        }
        if entries.len() != rows * cols {
            return Err(MatError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, MatError> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Maximum entry magnitude of `self · self† − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = matmul(self, &conj_transpose(self)).expect("square product");
        let mut worst = 0.0f64;
        for i in 0..prod.rows {
            for j in 0..prod.cols {
                let target = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// √(Σ|entries|²); zero iff the matrix is zero.
pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    if a.cols != b.rows {
        return Err(MatError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

pub fn conj_transpose(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.cols, m.rows);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
    out
}

/// Anti-diagonal permutation F with F[i][n−1−i] = 1; unitary involution.
pub fn antidiagonal_permutation(n: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        f[(i, n - 1 - i)] = Complex64::ONE;
    }
    f
}

/// Result of row-wise Gram-Schmidt with canonical-basis completion.
#[derive(Debug, Clone)]
pub struct GramSchmidtOutput {
    /// Unitary matrix whose rows are the orthonormalized input rows, with
    /// dependent slots filled from the canonical basis.
    pub q: ComplexMatrix,
    /// Number of linearly independent input rows.
    pub rank: usize,
    /// Slots (0-based row indices) that were filled by completion.
    pub completed_indices: Vec<usize>,
}

/// Accepted directions and completion fills, before slot assembly.
///
/// `accepted` keeps the processing order of the independent rows;
/// `completions` are canonical-basis fills orthonormalized against
/// everything accepted, in the order given by `completion_order`.
#[derive(Debug, Clone)]
pub struct GramSchmidtParts {
    pub accepted: Vec<Vec<Complex64>>,
    pub completions: Vec<Vec<Complex64>>,
    pub dependent_slots: Vec<usize>,
}

fn dot_conj(w: &[Complex64], v: &[Complex64]) -> Complex64 {
    w.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for w in basis {
        let c = dot_conj(w, v);
        for (vi, wi) in v.iter_mut().zip(w) {
            *vi -= c * wi;
        }
    }
}

/// Normalize and rotate so the leading entry above `PHASE_EPS` is positive real.
fn normalize_phase(v: &mut [Complex64]) {
    let n = vec_norm(v);
    for vi in v.iter_mut() {
        *vi /= n;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > PHASE_EPS) {
        let phase = lead.conj() / lead.norm();
        for vi in v.iter_mut() {
            *vi *= phase;
        }
    }
}

/// Classical Gram-Schmidt over the rows of `m`, split into accepted
/// directions and completion fills.
///
/// A row whose residual norm after projection (with one re-orthogonalization
/// pass) falls below `tol` is flagged dependent. Completion candidates are
/// canonical basis vectors tried in `completion_order`, accepted when their
/// own residual stays at or above `tol`.
pub fn gram_schmidt_parts(
    m: &ComplexMatrix,
    tol: f64,
    completion_order: &[usize],
) -> GramSchmidtParts {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = m.cols;
    let mut accepted: Vec<Vec<Complex64>> = Vec::with_capacity(m.rows);
    let mut dependent_slots = Vec::new();
    for i in 0..m.rows {
        let mut v = m.row(i).to_vec();
        project_out(&mut v, &accepted);
        project_out(&mut v, &accepted);
        if vec_norm(&v) < tol {
            dependent_slots.push(i);
        } else {
            normalize_phase(&mut v);
            accepted.push(v);
        }
    }
    let mut completions: Vec<Vec<Complex64>> = Vec::new();
    let needed = n.saturating_sub(accepted.len()).min(dependent_slots.len());
    for &e in completion_order {
        if completions.len() == needed {
            break;
        }
        let mut v = vec![Complex64::ZERO; n];
        v[e] = Complex64::ONE;
        project_out(&mut v, &accepted);
        project_out(&mut v, &completions);
        project_out(&mut v, &accepted);
        project_out(&mut v, &completions);
        if vec_norm(&v) >= tol {
            normalize_phase(&mut v);
            completions.push(v);
        }
    }
    GramSchmidtParts {
        accepted,
        completions,
        dependent_slots,
    }
}

/// Gram-Schmidt with slot-preserving assembly: accepted rows keep their
/// input positions, dependent slots are filled from the canonical basis in
/// index order.
pub fn gram_schmidt_rows(m: &ComplexMatrix, tol: f64) -> GramSchmidtOutput {
    let order: Vec<usize> = (0..m.cols).collect();
    gram_schmidt_rows_ordered(m, tol, &order)
}

/// As [`gram_schmidt_rows`] but with an explicit completion candidate order.
pub fn gram_schmidt_rows_ordered(
    m: &ComplexMatrix,
    tol: f64,
    completion_order: &[usize],
) -> GramSchmidtOutput {
    assert!(m.is_square(), "gram_schmidt_rows expects a square matrix");
    let n = m.rows;
    let parts = gram_schmidt_parts(m, tol, completion_order);
    let rank = parts.accepted.len();
    let mut q = ComplexMatrix::zeros(n, n);
    let mut acc_it = parts.accepted.iter();
    let mut comp_it = parts.completions.iter();
    for i in 0..n {
        let row = if parts.dependent_slots.contains(&i) {
            comp_it.next().expect("completion for dependent slot")
        } else {
            acc_it.next().expect("accepted row")
        };
        for j in 0..n {
            q[(i, j)] = row[j];
        }
    }
    GramSchmidtOutput {
        q,
        rank,
        completed_indices: parts.dependent_slots,
    }
}

/// Regularized least-squares solve: returns the row vector `x` minimizing
/// `|x·m + v|² + reg·|x|²`. For invertible `m` and `reg → 0` this is `−v·m⁻¹`.
pub fn solve_against_block(v: &[Complex64], m: &ComplexMatrix, reg: f64) -> Vec<Complex64> {
    assert_eq!(v.len(), m.cols, "right-hand side length must match m.cols");
    assert!(reg >= 0.0, "regularization must be nonnegative");
    let r = m.rows;
    // Normal equations: x (M M† + reg I) = −v M†, solved by elimination.
    let mt = conj_transpose(m);
    let mut a = matmul(m, &mt).expect("gram matrix");
    for i in 0..r {
        a[(i, i)] += Complex64::new(reg, 0.0);
    }
    let mut b: Vec<Complex64> = (0..r)
        .map(|i| -v.iter().zip(mt.col(i)).map(|(vi, mi)| vi * mi).sum::<Complex64>())
        .collect();
    // x A = b  ⇔  Aᵀ xᵀ = bᵀ; A is Hermitian so solve Aᵀ y = b.
    let at = a.transpose();
    solve_linear(&at, &mut b);
    b
}

/// In-place Gaussian elimination with partial pivoting; `b` becomes the solution.
fn solve_linear(a: &ComplexMatrix, b: &mut [Complex64]) {
    let n = a.rows;
    let mut m = a.clone();
    for k in 0..n {
        let (pivot, _) = (k..n)
            .map(|i| (i, m[(i, k)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(pivot, j)];
                m[(pivot, j)] = tmp;
            }
            b.swap(k, pivot);
        }
        let d = m[(k, k)];
        if d.norm() == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            if f == Complex64::ZERO {
                continue;
            }
            for j in k..n {
                let mkj = m[(k, j)];
                m[(i, j)] -= f * mkj;
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= m[(k, j)] * b[j];
        }
        let d = m[(k, k)];
        b[k] = if d.norm() == 0.0 { Complex64::ZERO } else { s / d };
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let dm = nalgebra::DMatrix::from_fn(m.rows, m.cols, |i, j| m[(i, j)]);
    let mut sv: Vec<f64> = dm.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
