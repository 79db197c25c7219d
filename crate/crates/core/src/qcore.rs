// Copyright 2026 The rydqaoa Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here is sized for at most six three-level sites (dimension
//! 3^6 = 729), so matrices are stored densely in row-major order. Three
//! exponentiation routes are provided: an exact diagonal path, a Hermitian
//! eigendecomposition, and Padé(13) scaling-and-squaring. They are expected
//! to agree to [`ORACLE_TOL`].

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Norm drift allowed on a state after any evolution.
pub const NORM_TOL: f64 = 1e-10;
/// Max-entry deviation of `U†U` from the identity accepted as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Relative max-entry deviation of `H - H†` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Agreement required between independent numerical routes.
pub const ORACLE_TOL: f64 = 1e-9;
/// Largest supported Hilbert-space dimension (six qutrits).
pub const MAX_DIM: usize = 729;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let c: Vec<C64> = diag.iter().map(|&d| C64::new(d, 0.0)).collect();
        Self::from_diagonal(&c)
    }

    /// Builds a matrix from nested rows; convenient for small literals.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        Self::new(r, c, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|col| col.len() != r) {
            return Err(invalid("ragged columns"));
        }
        let mut m = Self::new(r, c, vec![ZERO; r * c])?;
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.data[i * c + j] = *v;
            }
        }
        Ok(m)
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    ///
    /// # Panics
    /// Panics if the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry deviation of `self - self†`, relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / self.max_abs().max(1.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = &self.adjoint() * self;
        g.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.cols;
        self.data
            .iter()
            .enumerate()
            .all(|(k, v)| k / n == k % n || *v == ZERO)
    }

    /// Matrix-vector product.
    ///
    /// # Panics
    /// Panics if `v.len() != self.cols()`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Induced 1-norm (max column sum of moduli).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.data[i * self.cols + j].norm()).sum())
            .fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let (n, m, k) = (self.rows, rhs.cols, self.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let rrow = &rhs.data[l * m..(l + 1) * m];
                for (o, b) in row.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: n,
            cols: m,
            data: out,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Normalized amplitude vector over `levels^num_sites` basis states.
///
/// Basis ordering is big-endian: site 0 is the most significant digit, so
/// `|b0 b1 ... b(n-1)>` has index `sum b_k * levels^(n-1-k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    num_sites: usize,
    levels: usize,
    amplitudes: Vec<C64>,
}

impl QuantumState {
    /// Wraps an amplitude vector that must already be normalized.
    pub fn new(num_sites: usize, levels: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = checked_dim(num_sites, levels)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self {
            num_sites,
            levels,
            amplitudes,
        })
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(num_sites: usize, levels: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        let s = 1.0 / n2.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= s);
        Self::new(num_sites, levels, amplitudes)
    }

    pub fn basis(num_sites: usize, levels: usize, index: usize) -> Result<Self> {
        let dim = checked_dim(num_sites, levels)?;
        if index >= dim {
            return Err(invalid(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(num_sites, levels, amps)
    }

    /// `|+>^n` on qubits.
    pub fn plus(num_sites: usize) -> Result<Self> {
        let dim = checked_dim(num_sites, 2)?;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::new(num_sites, 2, vec![a; dim])
    }

    pub(crate) fn from_raw(num_sites: usize, levels: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), levels.pow(num_sites as u32));
        Self {
            num_sites,
            levels,
            amplitudes,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Applies a matrix of matching dimension.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() || u.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.cols(),
            });
        }
        Ok(Self::from_raw(self.num_sites, self.levels, u.apply(&self.amplitudes)))
    }
}

fn checked_dim(num_sites: usize, levels: usize) -> Result<usize> {
    if num_sites == 0 {
        return Err(invalid("a state needs at least one site"));
    }
    if levels != 2 && levels != 3 {
        return Err(invalid(format!("levels per site must be 2 or 3, got {levels}")));
    }
    let dim = levels
        .checked_pow(num_sites as u32)
        .filter(|&d| d <= MAX_DIM)
        .ok_or(Error::DimensionTooLarge {
            dim: usize::MAX,
            max: MAX_DIM,
        })?;
    Ok(dim)
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// `<a|b>` (conjugate-linear in `a`).
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Kronecker product with big-endian index convention.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: rows.max(cols),
            max: MAX_DIM,
        });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i1 in 0..a.rows {
        for j1 in 0..a.cols {
            let x = a.data[i1 * a.cols + j1];
            if x == ZERO {
                continue;
            }
            for i2 in 0..b.rows {
                let row = (i1 * b.rows + i2) * cols;
                for j2 in 0..b.cols {
                    out.data[row + j1 * b.cols + j2] = x * b.data[i2 * b.cols + j2];
                }
            }
        }
    }
    Ok(out)
}

/// A real diagonal operator; exponentiates in O(d).
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOperator {
    diag: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(diag: Vec<f64>) -> Self {
        Self { diag }
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }

    /// Diagonal of `exp(-i t D)`.
    pub fn evolution_phases(&self, t: f64) -> Vec<C64> {
        self.diag.iter().map(|&d| C64::from_polar(1.0, -d * t)).collect()
    }

    pub fn evolution(&self, t: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.evolution_phases(t))
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.diag)
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// `exp(-i H t)` for Hermitian `H`.
///
/// Exactly diagonal inputs take the O(d) route; everything else goes
/// through the Hermitian eigendecomposition.
pub fn unitary_evolution(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_hermitian(h)?;
    if h.is_diagonal() {
        let d: Vec<f64> = h.diagonal().iter().map(|v| v.re).collect();
        return Ok(DiagonalOperator::new(d).evolution(t));
    }
    Ok(evolution_eigen_unchecked(h, t))
}

/// `exp(-i H t)` via the Hermitian eigendecomposition `H = V Λ V†`.
pub fn evolution_by_eigen(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_hermitian(h)?;
    Ok(evolution_eigen_unchecked(h, t))
}

fn evolution_eigen_unchecked(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.rows;
    let eig = h.to_nalgebra().symmetric_eigen();
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, -l * t))
        .collect();
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for k in 0..n {
                acc += v[(i, k)] * phases[k] * v[(j, k)].conj();
            }
            out.data[i * n + j] = acc;
        }
    }
    out
}

/// `exp(-i H t)` via Padé(13) scaling-and-squaring of `-i H t`.
pub fn evolution_by_pade(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    check_hermitian(h)?;
    expm(&h.scale(C64::new(0.0, -t)))
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// General matrix exponential `exp(A)` (Higham's Padé(13) scaling-and-squaring).
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let norm = a.norm_one();
    if !norm.is_finite() {
        return Err(invalid("matrix exponential of a non-finite matrix"));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(C64::new(2f64.powi(-s), 0.0));
    let id = ComplexMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let lin = |terms: &[(&ComplexMatrix, usize)]| {
        let mut acc = ComplexMatrix::zeros(n, n);
        for (m, k) in terms {
            acc = &acc + &m.scale(b(*k));
        }
        acc
    };
    let u_inner = &a6 * &lin(&[(&a6, 13), (&a4, 11), (&a2, 9)]);
    let u_tail = lin(&[(&a6, 7), (&a4, 5), (&a2, 3), (&id, 1)]);
    let u = &a * &(&u_inner + &u_tail);
    let v_inner = &a6 * &lin(&[(&a6, 12), (&a4, 10), (&a2, 8)]);
    let v_tail = lin(&[(&a6, 6), (&a4, 4), (&a2, 2), (&id, 0)]);
    let v = &v_inner + &v_tail;
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Solves `A X = B` by LU with partial pivoting.
fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows;
    let m = b.cols;
    let mut lu = a.data.clone();
    let mut x = b.data.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| lu[i * n + col].norm().total_cmp(&lu[j * n + col].norm()))
            .unwrap_or(col);
        if lu[piv * n + col].norm() == 0.0 {
            return Err(invalid("singular matrix in Padé solve"));
        }
        if piv != col {
            for k in 0..n {
                lu.swap(col * n + k, piv * n + k);
            }
            for k in 0..m {
                x.swap(col * m + k, piv * m + k);
            }
        }
        let d = lu[col * n + col];
        for r in col + 1..n {
            let f = lu[r * n + col] / d;
            if f == ZERO {
                continue;
            }
            for k in col..n {
                let v = lu[col * n + k];
                lu[r * n + k] -= f * v;
            }
            for k in 0..m {
                let v = x[col * m + k];
                x[r * m + k] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[col * n + col];
        for k in 0..m {
            let mut acc = x[col * m + k];
            for j in col + 1..n {
                acc -= lu[col * n + j] * x[j * m + k];
            }
            x[col * m + k] = acc / d;
        }
    }
    ComplexMatrix::new(n, m, x)
}

/// `|<psi|phi>|^2`.
pub fn state_fidelity(psi: &QuantumState, phi: &QuantumState) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}

/// `|Tr(V† U)| / Tr(U† U)` for unitaries of equal dimension.
pub fn operator_fidelity(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    for m in [u, v] {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
    }
    if u.rows != v.rows {
        return Err(Error::DimensionMismatch {
            expected: u.rows,
            found: v.rows,
        });
    }
    for m in [u, v] {
        let defect = m.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
    }
    let overlap: C64 = inner(&v.data, &u.data);
    let norm: f64 = norm_sqr(&u.data);
    Ok((overlap.norm() / norm).min(1.0))
}

/// `|Tr(V† M)| / d` for a target unitary `V` and a possibly leaky map `M`
/// (a sub-unitary logical block); lost norm lowers the value.
pub fn leaky_operator_fidelity(m: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if (v.rows, v.cols) != (m.rows, m.cols) {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: v.rows,
        });
    }
    let defect = v.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let overlap: C64 = inner(&v.data, &m.data);
    Ok((overlap.norm() / m.rows as f64).min(1.0))
}

/// Reduced density matrix on the `keep` sites (ascending site order).
pub fn partial_trace(psi: &QuantumState, keep: &[usize]) -> Result<ComplexMatrix> {
    let n = psi.num_sites;
    let d = psi.levels;
    if keep.is_empty() {
        return Err(invalid("partial trace needs at least one kept site"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(invalid("kept sites must be distinct"));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= n) {
        return Err(invalid(format!("site {bad} out of range for {n} sites")));
    }
    let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
    let dk = d.pow(kept.len() as u32);
    let dt = d.pow(traced.len() as u32);
    // digit weight of each site in the full index
    let weight = |s: usize| d.pow((n - 1 - s) as u32);
    let compose = |sites: &[usize], mut idx: usize| -> usize {
        let mut full = 0;
        for &s in sites.iter().rev() {
            full += (idx % d) * weight(s);
            idx /= d;
        }
        full
    };
    let kept_off: Vec<usize> = (0..dk).map(|i| compose(&kept, i)).collect();
    let traced_off: Vec<usize> = (0..dt).map(|i| compose(&traced, i)).collect();
    let amps = &psi.amplitudes;
    let mut rho = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in i..dk {
            let v: C64 = traced_off
                .iter()
                .map(|&t| amps[kept_off[i] + t] * amps[kept_off[j] + t].conj())
                .sum();
            rho.data[i * dk + j] = v;
            rho.data[j * dk + i] = v.conj();
        }
    }
    Ok(rho)
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn kron_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
        for i1 in 0..a.rows() {
            for i2 in 0..b.rows() {
                for j1 in 0..a.cols() {
                    for j2 in 0..b.cols() {
                        out[(i1 * b.rows() + i2, j1 * b.cols() + j2)] = a[(i1, j1)] * b[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tensor_identities_and_paulis() {
        let i4 = tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zz = tensor_product(&pauli('Z'), &pauli('Z')).unwrap();
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
        let xz = tensor_product(&pauli('X'), &pauli('Z')).unwrap();
        // row (i1,i2) = (0,1), column (j1,j2) = (1,1)
        assert_eq!(xz[(1, 3)], c(-1.0));
        assert_eq!(xz, kron_oracle(&pauli('X'), &pauli('Z')));
    }

    #[test]
    fn tensor_matches_brute_force_on_rectangular_inputs() {
        let mut r = rng(3);
        let a = ComplexMatrix::new(2, 3, (0..6).map(|_| C64::new(r.random(), r.random())).collect())
            .unwrap();
        let b = ComplexMatrix::new(3, 2, (0..6).map(|_| C64::new(r.random(), r.random())).collect())
            .unwrap();
        assert_eq!(tensor_product(&a, &b).unwrap(), kron_oracle(&a, &b));
    }

    #[test]
    fn tensor_rejects_oversized_results() {
        let big = ComplexMatrix::identity(243);
        let err = tensor_product(&big, &ComplexMatrix::identity(9)).unwrap_err();
        assert!(matches!(err, Error::DimensionTooLarge { .. }));
        assert!(tensor_product(&big, &ComplexMatrix::identity(3)).is_ok());
    }

    #[test]
    fn evolution_examples() {
        let mut r = rng(1);
        let h = random_hermitian(&mut r, 5);
        let u0 = unitary_evolution(&h, 0.0).unwrap();
        assert!(u0.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);

        let u = unitary_evolution(&pauli('X'), FRAC_PI_2).unwrap();
        let expected = pauli('X').scale(-I);
        assert!(u.max_abs_diff(&expected) < 1e-12);

        let zz = tensor_product(&pauli('Z'), &pauli('Z')).unwrap();
        let u = unitary_evolution(&zz, 0.7).unwrap();
        let e = |s: f64| C64::from_polar(1.0, s * 0.7);
        let expected = ComplexMatrix::from_diagonal(&[e(-1.0), e(1.0), e(1.0), e(-1.0)]);
        // diagonal route must be exact
        assert_eq!(u, expected);
    }

    #[test]
    fn evolution_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = ONE;
        assert!(matches!(unitary_evolution(&m, 1.0), Err(Error::NotHermitian(_))));
        assert!(matches!(evolution_by_pade(&m, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn three_exponential_routes_agree() {
        let mut r = rng(11);
        for &n in &[2usize, 3, 8, 27, 32] {
            let h = random_hermitian(&mut r, n);
            for &t in &[0.1, 1.3, 7.5] {
                let e = evolution_by_eigen(&h, t).unwrap();
                let p = evolution_by_pade(&h, t).unwrap();
                assert!(e.max_abs_diff(&p) < ORACLE_TOL, "n={n} t={t}: {}", e.max_abs_diff(&p));
                assert!(e.is_unitary(UNITARY_TOL));
            }
        }
        // diagonal input: exact path vs both dense paths
        let d: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin() * 3.0).collect();
        let h = ComplexMatrix::from_real_diagonal(&d);
        let exact = DiagonalOperator::new(d).evolution(2.1);
        assert!(exact.max_abs_diff(&evolution_by_eigen(&h, 2.1).unwrap()) < ORACLE_TOL);
        assert!(exact.max_abs_diff(&evolution_by_pade(&h, 2.1).unwrap()) < ORACLE_TOL);
    }

    #[test]
    fn pade_handles_large_norms() {
        // angular-frequency scale Hamiltonians over nanoseconds
        let h = pauli('X').scale(c(2.0 * PI * 36e6));
        let t = 1.0 / 36e6;
        let u = evolution_by_pade(&h, t).unwrap();
        let theta = 2.0 * PI;
        let expected = ComplexMatrix::identity(2).scale(c(theta.cos()));
        assert!(u.max_abs_diff(&expected) < 1e-9);
    }

    #[test]
    fn state_fidelity_examples() {
        let zero = QuantumState::basis(1, 2, 0).unwrap();
        let one = QuantumState::basis(1, 2, 1).unwrap();
        let plus = QuantumState::plus(1).unwrap();
        assert_eq!(state_fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(state_fidelity(&zero, &one).unwrap(), 0.0);
        assert!((state_fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-15);
        let two = QuantumState::plus(2).unwrap();
        assert!(matches!(
            state_fidelity(&zero, &two),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn state_constructors_validate() {
        assert!(matches!(
            QuantumState::new(1, 2, vec![ONE, ONE]),
            Err(Error::NotNormalized(_))
        ));
        assert!(QuantumState::new(2, 2, vec![ONE]).is_err());
        assert!(QuantumState::new(1, 4, vec![ONE; 4]).is_err());
        assert!(QuantumState::plus(10).is_err());
        assert!(QuantumState::basis(6, 3, 728).is_ok());
    }

    #[test]
    fn operator_fidelity_examples() {
        let id32 = ComplexMatrix::identity(32);
        assert!((operator_fidelity(&id32, &id32).unwrap() - 1.0).abs() < 1e-15);
        let id2 = ComplexMatrix::identity(2);
        assert!(operator_fidelity(&id2, &pauli('Z')).unwrap().abs() < 1e-15);
        let rz = unitary_evolution(&pauli('Z'), FRAC_PI_4).unwrap();
        // hand expansion: |e^{-iπ/4} + e^{iπ/4}| / 2 = cos(π/4)
        let by_hand = (C64::from_polar(1.0, -FRAC_PI_4) + C64::from_polar(1.0, FRAC_PI_4)).norm() / 2.0;
        let f = operator_fidelity(&id2, &rz).unwrap();
        assert!((f - by_hand).abs() < 1e-15);
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn operator_fidelity_rejects_bad_inputs() {
        let id2 = ComplexMatrix::identity(2);
        let id4 = ComplexMatrix::identity(4);
        assert!(matches!(
            operator_fidelity(&id2, &id4),
            Err(Error::DimensionMismatch { .. })
        ));
        let m = id2.scale(c(2.0));
        assert!(matches!(operator_fidelity(&m, &id2), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn operator_fidelity_phase_invariance() {
        let mut r = rng(5);
        let u = unitary_evolution(&random_hermitian(&mut r, 8), 1.0).unwrap();
        for _ in 0..20 {
            let theta: f64 = r.random_range(-PI..PI);
            let v = u.scale(C64::from_polar(1.0, theta));
            assert!((operator_fidelity(&u, &v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    fn brute_partial_trace(psi: &QuantumState, keep: &[usize]) -> ComplexMatrix {
        // direct double sum over kept row/col indices and traced configurations
        let n = psi.num_sites();
        let bit = |x: usize, s: usize| (x >> (n - 1 - s)) & 1;
        let dk = 1 << keep.len();
        let mut rho = ComplexMatrix::zeros(dk, dk);
        for x in 0..psi.dim() {
            for y in 0..psi.dim() {
                let same_traced = (0..n).filter(|s| !keep.contains(s)).all(|s| bit(x, s) == bit(y, s));
                if !same_traced {
                    continue;
                }
                let ki = keep.iter().fold(0, |acc, &s| acc * 2 + bit(x, s));
                let kj = keep.iter().fold(0, |acc, &s| acc * 2 + bit(y, s));
                rho[(ki, kj)] += psi.amplitudes()[x] * psi.amplitudes()[y].conj();
            }
        }
        rho
    }

    #[test]
    fn partial_trace_examples() {
        let zz = QuantumState::basis(2, 2, 0).unwrap();
        let rho = partial_trace(&zz, &[0]).unwrap();
        assert_eq!(rho, ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumState::new(2, 2, vec![c(s), ZERO, ZERO, c(s)]).unwrap();
        let rho = partial_trace(&bell, &[1]).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.5])) < 1e-15);

        let mut amps = vec![ZERO; 8];
        amps[0] = c(s);
        amps[7] = c(s);
        let ghz3 = QuantumState::new(3, 2, amps).unwrap();
        let rho = partial_trace(&ghz3, &[0]).unwrap();
        assert!(rho.max_abs_diff(&brute_partial_trace(&ghz3, &[0])) < 1e-15);
        assert!(rho.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let psi = QuantumState::plus(3).unwrap();
        assert!(partial_trace(&psi, &[]).is_err());
        assert!(partial_trace(&psi, &[3]).is_err());
        assert!(partial_trace(&psi, &[1, 1]).is_err());
    }

    #[test]
    fn partial_trace_matches_brute_force_on_random_states() {
        let mut r = rng(17);
        for _ in 0..5 {
            let psi = random_state(&mut r, 4, 2);
            for keep in [vec![0], vec![1, 3], vec![0, 2, 3], vec![2]] {
                let rho = partial_trace(&psi, &keep).unwrap();
                assert!(rho.max_abs_diff(&brute_partial_trace(&psi, &keep)) < 1e-14);
                assert!(rho.is_hermitian(1e-12));
                assert!((rho.trace() - ONE).norm() < NORM_TOL);
                let eig = rho.to_nalgebra().symmetric_eigen();
                assert!(eig.eigenvalues.iter().all(|&l| l > -NORM_TOL));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn semigroup_property(seed in any::<u64>(), dim in 2usize..=32, t1 in -3.0f64..3.0, t2 in -3.0f64..3.0) {
            let h = random_hermitian(&mut rng(seed), dim);
            let a = unitary_evolution(&h, t1).unwrap();
            let b = unitary_evolution(&h, t2).unwrap();
            let ab = unitary_evolution(&h, t1 + t2).unwrap();
            prop_assert!((&a * &b).max_abs_diff(&ab) < ORACLE_TOL);
            prop_assert!(a.is_unitary(UNITARY_TOL));
        }

        #[test]
        fn evolution_preserves_norm(seed in any::<u64>(), sites in 1usize..=5, t in -5.0f64..5.0) {
            let mut r = rng(seed);
            let psi = random_state(&mut r, sites, 2);
            let h = random_hermitian(&mut r, psi.dim());
            let out = psi.evolve(&unitary_evolution(&h, t).unwrap()).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < NORM_TOL);
        }

        #[test]
        fn nested_partial_traces_reach_unit_scalar(seed in any::<u64>(), mask in 1u32..15) {
            let psi = random_state(&mut rng(seed), 4, 2);
            let keep: Vec<usize> = (0..4).filter(|s| mask >> s & 1 == 1).collect();
            let rho = partial_trace(&psi, &keep).unwrap();
            prop_assert!((rho.trace() - ONE).norm() < NORM_TOL);
            let complement: Vec<usize> = (0..4).filter(|s| !keep.contains(s)).collect();
            if !complement.is_empty() {
                let rho_c = partial_trace(&psi, &complement).unwrap();
                prop_assert!((rho_c.trace() - ONE).norm() < NORM_TOL);
            }
        }
    }
}
