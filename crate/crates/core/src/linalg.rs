//! Dense complex linear algebra for matrix algebras M_m(ℂ).
//!
//! Everything here works on small dense matrices (dimension up to a few
//! dozen). The Hermitian eigensolver is a cyclic complex Jacobi iteration,
//! which is slow asymptotically but accurate to working precision and has
//! no external dependencies.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for Hermiticity and PSD checks.
pub const DEFAULT_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Fails if the count is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Matrix unit e_ij of M_n.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
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

    pub fn same_shape(&self, other: &CMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &CMatrix) {
        assert!(self.same_shape(other), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Trace inner product ⟨a, b⟩ = tr(a* b).
    pub fn inner(&self, other: &CMatrix) -> C64 {
        assert!(self.same_shape(other), "inner shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// tr(self · other) without forming the product.
    pub fn trace_product(&self, other: &CMatrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn hermitian_part(&self) -> CMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// ‖M − M*‖_F.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    pub fn sub_block(&self, r0: usize, c0: usize, h: usize, w: usize) -> CMatrix {
        Self::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &CMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Real and imaginary parts of every entry, row-major.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn dist(&self, other: &CMatrix) -> f64 {
        (self - other).frobenius_norm()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert!(self.same_shape(rhs), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert!(self.same_shape(rhs), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.axpy(C64::new(1.0, 0.0), rhs);
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.axpy(C64::new(-1.0, 0.0), rhs);
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let data = raw.data.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        CMatrix::from_vec(raw.rows, raw.cols, data).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for complex scalars as `[re, im]` pairs.
pub mod complex_pairs {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| [z.re, z.im]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// Hermitian eigendecomposition M = V diag(values) V*.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| x)
    }

    /// V diag(f(values)) V*.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * &self.vectors.adjoint()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, j)]).collect()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Requires ‖M − M*‖_F ≤ tol·max(1, ‖M‖_F); the Hermitian part is
/// diagonalized.
pub fn hermitian_eig(m: &CMatrix, tol: f64) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermiticity_residual();
    if residual > tol * m.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    jacobi(m.hermitian_part())
}

fn jacobi(mut a: CMatrix) -> Result<Eigh> {
    let n = a.rows();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    if n <= 1 || scale == 0.0 {
        let values = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok(Eigh { values, vectors: v });
    }
    let target = f64::EPSILON * scale;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, target / (n as f64));
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "hermitian_eig",
        });
    }
    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, pairs[j].1)]);
    Ok(Eigh { values, vectors })
}

/// One Jacobi rotation annihilating a[p][q].
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, skip_below: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= skip_below * 1e-3 || mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e_minus = phase.conj();
    // V acts on (p, q) as [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
    let vpp = C64::new(c, 0.0);
    let vpq = C64::new(s, 0.0);
    let vqp = -e_minus * s;
    let vqq = e_minus * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // The smaller Gram matrix has the same nonzero spectrum.
    let gram = if m.rows() < m.cols() {
        m * &m.adjoint()
    } else {
        &m.adjoint() * m
    };
    let eig = jacobi(gram.hermitian_part()).expect("Jacobi on a Gram matrix");
    eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let gram = &m.adjoint() * m;
    let eig = jacobi(gram.hermitian_part()).expect("Jacobi on a Gram matrix");
    let mut s: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    s.reverse();
    s
}

/// Least eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix, tol: f64) -> Result<f64> {
    let eig = hermitian_eig(m, tol)?;
    Ok(eig.values.first().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(m: &CMatrix, tol: f64) -> Result<f64> {
    let eig = hermitian_eig(m, tol)?;
    Ok(eig.values.last().copied().unwrap_or(0.0))
}

/// Least eigenvalue of the Hermitian part, for matrices that are Hermitian
/// up to accumulated rounding.
pub fn min_eigenvalue_hermitian_part(m: &CMatrix) -> f64 {
    let eig = jacobi(m.hermitian_part()).expect("Jacobi on a Hermitian matrix");
    eig.values.first().copied().unwrap_or(0.0)
}

pub fn eig_hermitian_part(m: &CMatrix) -> Result<Eigh> {
    jacobi(m.hermitian_part())
}

pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m, tol)? >= -tol)
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Which tensor factor of ℂ^m ⊗ ℂ^n is traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial trace of an operator on ℂ^m ⊗ ℂ^n (index (a, k) ↦ a·n + k).
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), which: Factor) -> Result<CMatrix> {
    let (d1, d2) = dims;
    if m.rows() != d1 * d2 || m.cols() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {}⊗{} applied to {}x{}",
            d1,
            d2,
            m.rows(),
            m.cols()
        )));
    }
    Ok(match which {
        Factor::Second => CMatrix::from_fn(d1, d1, |a, b| {
            (0..d2).map(|k| m[(a * d2 + k, b * d2 + k)]).sum()
        }),
        Factor::First => CMatrix::from_fn(d2, d2, |k, l| {
            (0..d1).map(|a| m[(a * d2 + k, a * d2 + l)]).sum()
        }),
    })
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMatrix) -> Option<CMatrix> {
    let n = m.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &CMatrix) -> CMatrix {
    let n = l.rows();
    let mut inv = CMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_pd(m: &CMatrix) -> Option<CMatrix> {
    let l = cholesky(m)?;
    let li = lower_inverse(&l);
    Some(&li.adjoint() * &li)
}

/// General complex inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap();
        if a[(piv, col)].norm() <= 1e-14 * scale {
            return Err(Error::InvalidInput("matrix is singular".into()));
        }
        for j in 0..n {
            a.data.swap(col * n + j, piv * n + j);
            inv.data.swap(col * n + j, piv * n + j);
        }
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f.norm() == 0.0 {
                continue;
            }
            for j in 0..n {
                let ac = a[(col, j)];
                let ic = inv[(col, j)];
                a[(i, j)] -= f * ac;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

/// Unitary polar factor of a square matrix: m (m* m)^{-1/2}.
pub fn polar_unitary(m: &CMatrix) -> Result<CMatrix> {
    let gram = &m.adjoint() * m;
    let eig = jacobi(gram.hermitian_part())?;
    if eig.values.first().copied().unwrap_or(0.0) <= 1e-300 {
        return Err(Error::InvalidInput("polar factor of a singular matrix".into()));
    }
    let inv_sqrt = eig.apply_fn(|x| 1.0 / x.sqrt());
    Ok(m * &inv_sqrt)
}

/// Orthonormalizes the columns of a square matrix (modified Gram–Schmidt,
/// two passes). Returns Q with positive real diagonal in the implicit R.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let n = m.rows();
    let k = m.cols();
    let mut q = m.clone();
    for j in 0..k {
        for _pass in 0..2 {
            for p in 0..j {
                let mut proj = C64::new(0.0, 0.0);
                for i in 0..n {
                    proj += q[(i, p)].conj() * q[(i, j)];
                }
                for i in 0..n {
                    let qp = q[(i, p)];
                    q[(i, j)] -= proj * qp;
                }
            }
        }
        let norm: f64 = (0..n).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-13 {
            return Err(Error::InvalidInput("columns are linearly dependent".into()));
        }
        for i in 0..n {
            q[(i, j)] /= norm;
        }
    }
    Ok(q)
}

/// Orthonormal basis (as unit vectors) of the null space of `m`: eigenvectors
/// v of m*m with ‖m·v‖ ≤ `tol`.
///
/// The residual is measured directly rather than read off the Gram
/// eigenvalue, whose square root carries an error of order √ε·‖m‖.
pub fn null_space(m: &CMatrix, tol: f64) -> Vec<Vec<C64>> {
    let gram = &m.adjoint() * m;
    let eig = jacobi(gram.hermitian_part()).expect("Jacobi on a Gram matrix");
    let mut out = Vec::new();
    for j in 0..eig.values.len() {
        let v = eig.column(j);
        let resid: f64 = (0..m.rows())
            .map(|i| (0..m.cols()).map(|k| m[(i, k)] * v[k]).sum::<C64>().norm_sqr())
            .sum::<f64>()
            .sqrt();
        if resid <= tol {
            out.push(v);
        }
    }
    out
}

/// Solves a real symmetric positive definite system in place. Falls back to
/// LU with partial pivoting when Cholesky breaks down.
pub fn solve_symmetric(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    if let Some(x) = solve_cholesky_real(a, b) {
        return Some(x);
    }
    solve_lu_real(a, b)
}

fn solve_cholesky_real(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

fn solve_lu_real(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        for i in col + 1..n {
            let f = m[i * n + col] / m[col * n + col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[i * n + j] -= f * m[col * n + j];
            }
            x[i] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= m[i * n + j] * x[j];
        }
        x[i] /= m[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Orthonormal Hermitian basis of all Hermitian n×n matrices under the
/// trace inner product: e_ii, (e_ij + e_ji)/√2, i(e_ij − e_ji)/√2.
pub fn hermitian_unit_basis(n: usize) -> Vec<CMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(CMatrix::unit(n, i, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut s = CMatrix::zeros(n, n);
            s[(i, j)] = C64::new(r, 0.0);
            s[(j, i)] = C64::new(r, 0.0);
            out.push(s);
            let mut a = CMatrix::zeros(n, n);
            a[(i, j)] = C64::new(0.0, r);
            a[(j, i)] = C64::new(0.0, -r);
            out.push(a);
        }
    }
    out
}

/// Orthonormal basis of the traceless Hermitian n×n matrices.
pub fn traceless_hermitian_basis(n: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(n * n - 1);
    // Off-diagonal symmetric and antisymmetric units.
    for m in hermitian_unit_basis(n).into_iter().skip(n) {
        out.push(m);
    }
    // Generalized diagonal Gell-Mann matrices.
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut d = vec![0.0; n];
        for v in d.iter_mut().take(k) {
            *v = 1.0 / norm;
        }
        d[k] = -(k as f64) / norm;
        out.push(CMatrix::diag_real(&d));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> CMatrix {
        CMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
        random_matrix(rng, n, n).hermitian_part()
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = hermitian_eig(&CMatrix::identity(3), DEFAULT_TOL).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = hermitian_eig(&CMatrix::diag_real(&[2.0, -1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
    }

    #[test]
    fn eig_pauli_x() {
        let x = CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eig(&x, DEFAULT_TOL).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::unit(2, 0, 1);
        assert!(matches!(
            hermitian_eig(&m, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_reconstruction_up_to_dim_32() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8, 16, 32] {
            let m = random_hermitian(&mut rng, n);
            let e = hermitian_eig(&m, DEFAULT_TOL).unwrap();
            let d = CMatrix::diag_real(&e.values);
            let resid = (&(&m * &e.vectors) - &(&e.vectors * &d)).frobenius_norm();
            assert!(resid <= 10.0 * DEFAULT_TOL * operator_norm(&m), "n={n} resid={resid}");
            let vv = &e.vectors.adjoint() * &e.vectors;
            assert!(vv.dist(&CMatrix::identity(n)) <= DEFAULT_TOL);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_degenerate_complex() {
        // Unitary conjugate of diag(1, 1, -2) keeps the spectrum.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = orthonormalize_columns(&random_matrix(&mut rng, 3, 3)).unwrap();
        let m = &(&u * &CMatrix::diag_real(&[1.0, 1.0, -2.0])) * &u.adjoint();
        let e = hermitian_eig(&m.hermitian_part(), DEFAULT_TOL).unwrap();
        for (a, b) in e.values.iter().zip([-2.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&CMatrix::identity(4)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&CMatrix::diag_real(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
        for k in 1..6 {
            let j = CMatrix::from_fn(k, k, |_, _| C64::new(1.0, 0.0));
            // Brute-force oracle: largest eigenvalue of the Hermitian J_k.
            let lam = max_eigenvalue(&j, DEFAULT_TOL).unwrap();
            assert!((lam - k as f64).abs() < 1e-12);
            assert!((operator_norm(&j) - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_norm_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..6 {
            let m = random_matrix(&mut rng, n, n);
            let u = orthonormalize_columns(&random_matrix(&mut rng, n, n)).unwrap();
            let v = orthonormalize_columns(&random_matrix(&mut rng, n, n)).unwrap();
            let a = operator_norm(&m);
            let b = operator_norm(&(&(&u * &m) * &v));
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(3)), CMatrix::identity(6));
        assert_eq!(
            kron(&CMatrix::diag_real(&[1.0, 2.0]), &CMatrix::identity(2)),
            CMatrix::diag_real(&[1.0, 1.0, 2.0, 2.0])
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 2, 2);
            let lhs = operator_norm(&kron(&a, &b));
            assert!((lhs - operator_norm(&a) * operator_norm(&b)).abs() < 1e-12);
            let c = random_matrix(&mut rng, 2, 2);
            let d = random_matrix(&mut rng, 2, 2);
            let mixed = &kron(&a, &b) * &kron(&c, &d);
            assert!(mixed.dist(&kron(&(&a * &c), &(&b * &d))) < 1e-13);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let p = partial_trace(&CMatrix::identity(4), (2, 2), Factor::Second).unwrap();
        assert_eq!(p, CMatrix::identity(2).scale_real(2.0));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 2, 2);
        let p = partial_trace(&kron(&a, &CMatrix::identity(2)), (2, 2), Factor::Second).unwrap();
        assert!(p.dist(&a.scale_real(2.0)) < 1e-14);

        // |ψ⟩ = (|00⟩ + |11⟩)/√2, projector entries 1/2 at (0,0),(0,3),(3,0),(3,3).
        let mut omega = CMatrix::zeros(4, 4);
        for &(i, j) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            omega[(i, j)] = C64::new(0.5, 0.0);
        }
        for which in [Factor::First, Factor::Second] {
            let r = partial_trace(&omega, (2, 2), which).unwrap();
            assert!(r.dist(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
        assert!(partial_trace(&omega, (2, 3), Factor::First).is_err());
    }

    #[test]
    fn partial_trace_is_adjoint_of_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (m, n) in [(2, 2), (2, 3), (3, 2)] {
            let big = random_matrix(&mut rng, m * n, m * n);
            let a = random_matrix(&mut rng, m, m);
            let lhs = partial_trace(&big, (m, n), Factor::Second).unwrap().trace_product(&a);
            let rhs = big.trace_product(&kron(&a, &CMatrix::identity(n)));
            assert!((lhs - rhs).norm() < 1e-13);
            let tr = partial_trace(&big, (m, n), Factor::First).unwrap().trace();
            assert!((tr - big.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(&CMatrix::identity(3), DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-15);
        let m = CMatrix::from_real(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!((min_eigenvalue(&m, DEFAULT_TOL).unwrap() + 1.0).abs() < 1e-14);
        let p = CMatrix::from_real(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(min_eigenvalue(&p, DEFAULT_TOL).unwrap().abs() < 1e-15);
    }

    #[test]
    fn cholesky_inverse_and_polar() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 4, 4);
        let pd = &(&a * &a.adjoint()) + &CMatrix::identity(4);
        let inv = inverse_pd(&pd).unwrap();
        assert!((&inv * &pd).dist(&CMatrix::identity(4)) < 1e-12);
        let ginv = inverse(&a).unwrap();
        assert!((&ginv * &a).dist(&CMatrix::identity(4)) < 1e-10);
        let u = polar_unitary(&a).unwrap();
        assert!((&u.adjoint() * &u).dist(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn bases_are_orthonormal() {
        for n in 1..5 {
            let h = hermitian_unit_basis(n);
            let t = traceless_hermitian_basis(n);
            assert_eq!(h.len(), n * n);
            assert_eq!(t.len(), n * n - 1);
            for set in [&h, &t] {
                for (i, a) in set.iter().enumerate() {
                    assert!(a.is_hermitian(1e-15));
                    for (j, b) in set.iter().enumerate() {
                        let ip = a.inner(b);
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - C64::new(want, 0.0)).norm() < 1e-14);
                    }
                }
            }
            for b in &t {
                assert!(b.trace().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn real_solver() {
        let a = [4.0, 1.0, 1.0, 3.0];
        let x = solve_symmetric(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        // Indefinite falls through to LU.
        let a = [0.0, 1.0, 1.0, 0.0];
        let x = solve_symmetric(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(&mut rng, 2, 3);
        let s = serde_json::to_string(&m).unwrap();
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert!(back.dist(&m) < 1e-12);
        let bad = r#"{"rows":2,"cols":2,"data":[[1,0]]}"#;
        assert!(serde_json::from_str::<CMatrix>(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn eig_reconstructs(seed in any::<u64>(), n in 1usize..7) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let h = random_hermitian(&mut r, n);
                let e = hermitian_eig(&h, DEFAULT_TOL).unwrap();
                prop_assert!(e.reconstruct().dist(&h) < 1e-12);
                prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            }

            #[test]
            fn partial_trace_of_kron(seed in any::<u64>(), a in 1usize..4, b in 1usize..4) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let x = random_matrix(&mut r, a, a);
                let y = random_matrix(&mut r, b, b);
                let k = kron(&x, &y);
                let first = partial_trace(&k, (a, b), Factor::First).unwrap();
                let second = partial_trace(&k, (a, b), Factor::Second).unwrap();
                prop_assert!(first.dist(&y.scale(x.trace())) < 1e-12);
                prop_assert!(second.dist(&x.scale(y.trace())) < 1e-12);
            }

            #[test]
            fn polar_factor_is_unitary(seed in any::<u64>(), n in 1usize..6) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let u = polar_unitary(&random_matrix(&mut r, n, n)).unwrap();
                prop_assert!((&u.adjoint() * &u).dist(&CMatrix::identity(n)) < 1e-10);
            }

            #[test]
            fn norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..5) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let a = random_matrix(&mut r, n, n);
                let b = random_matrix(&mut r, n, n);
                prop_assert!(operator_norm(&(&a * &b)) <= operator_norm(&a) * operator_norm(&b) + 1e-12);
                prop_assert!(operator_norm(&a) <= a.frobenius_norm() + 1e-12);
            }
        }
    }
}
