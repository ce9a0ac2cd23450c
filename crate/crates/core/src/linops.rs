//! Dense complex matrices over tensor-product spaces.
//!
//! Every [`ComplexMatrix`] carries the list of subsystem dimensions it acts
//! on, in tensor order left to right. Partial traces and factor permutations
//! consult that list, so a mismatch between what a caller believes the
//! tensor structure is and what it actually is surfaces as an error instead
//! of a silently wrong contraction.
//!
//! Storage is row-major and dense. The instances this crate deals with are
//! small (a few hundred rows at most), so no attempt is made at blocking or
//! sparsity.

use std::fmt;
use std::ops::{Add, AddAssign, Deref, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};

pub type C64 = Complex64;

/// Tolerance used when comparing computed operators.
pub const COMPARISON_TOL: f64 = 1e-10;
/// Tolerance used when validating freshly constructed objects.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

fn validate_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("dimension list is empty".into()));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::InvalidDims(format!("subsystem {pos} has dimension 0")));
    }
    Ok(dims.iter().product())
}

/// Row-major strides for a multi-index with the given dimensions.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the subsystems in `subset`,
/// enumerated in row-major order of `subset`.
fn subset_offsets(dims: &[usize], all_strides: &[usize], subset: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &s in subset {
        let mut next = Vec::with_capacity(offsets.len() * dims[s]);
        for &o in &offsets {
            for i in 0..dims[s] {
                next.push(o + i * all_strides[s]);
            }
        }
        offsets = next;
    }
    offsets
}

/// A square complex matrix acting on `dims[0] ⊗ dims[1] ⊗ …`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    dims: Vec<usize>,
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let n = validate_dims(&dims)?;
        if data.len() != n * n {
            return Err(dim_mismatch(
                format!("{} entries for dims {:?}", n * n, dims),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { dims, n, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dims: Vec<usize>, entries: &[f64]) -> Result<Self> {
        Self::new(dims, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let n = validate_dims(&dims)?;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Ok(Self { dims, n, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        Self::from_fn(dims, |_, _| ZERO)
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        Self::from_fn(dims, |i, j| if i == j { ONE } else { ZERO })
    }

    /// The matrix unit `|row⟩⟨col|`.
    pub fn unit(dims: Vec<usize>, row: usize, col: usize) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        if row >= m.n || col >= m.n {
            return Err(Error::IndexOutOfRange {
                index: row.max(col),
                count: m.n,
            });
        }
        m.data[row * m.n + col] = ONE;
        Ok(m)
    }

    /// Identity on a single subsystem of dimension `d`.
    pub fn eye(d: usize) -> Self {
        Self::identity(vec![d]).expect("dimension must be positive")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension (number of rows).
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.n + col]
    }

    /// Reinterprets the tensor structure without touching the entries.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let n = validate_dims(&dims)?;
        if n != self.n {
            return Err(dim_mismatch(self.n, format!("{n} for dims {dims:?}")));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i].conj());
            }
        }
        Self {
            dims: self.dims.clone(),
            n,
            data,
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i]);
            }
        }
        Self {
            dims: self.dims.clone(),
            n,
            data,
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            dims: self.dims.clone(),
            n: self.n,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `(m + m†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.n;
        Self::from_fn(self.dims.clone(), |i, j| {
            (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5
        })
        .expect("dims already validated")
    }

    /// Matrix product; the result keeps the tensor structure of `self`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(dim_mismatch(self.n, other.n));
        }
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (r, &b) in row.iter_mut().zip(other_row) {
                    *r += a * b;
                }
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            n,
            data,
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.n {
            return Err(dim_mismatch(self.n, v.len()));
        }
        Ok((0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.n != other.n {
            return Err(dim_mismatch(self.n, other.n));
        }
        let n = self.n;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        Ok(acc)
    }

    /// Kronecker product; dims are concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let (na, nb) = (self.n, other.n);
        let n = na * nb;
        let mut data = vec![ZERO; n * n];
        for ia in 0..na {
            for ja in 0..na {
                let a = self.data[ia * na + ja];
                if a == ZERO {
                    continue;
                }
                for ib in 0..nb {
                    let row = (ia * nb + ib) * n + ja * nb;
                    for jb in 0..nb {
                        data[row + jb] = a * other.data[ib * nb + jb];
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, n, data }
    }

    /// Traces out every subsystem not listed in `keep`. Kept subsystems
    /// appear in ascending index order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let count = self.dims.len();
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&k| k >= count) {
            return Err(Error::IndexOutOfRange { index: bad, count });
        }
        let traced: Vec<usize> = (0..count).filter(|k| !kept.contains(k)).collect();
        let st = strides(&self.dims);
        let kept_off = subset_offsets(&self.dims, &st, &kept);
        let traced_off = subset_offsets(&self.dims, &st, &traced);
        let m = kept_off.len();
        let mut data = vec![ZERO; m * m];
        for (r, &ro) in kept_off.iter().enumerate() {
            for (c, &co) in kept_off.iter().enumerate() {
                data[r * m + c] = traced_off
                    .iter()
                    .map(|&t| self.data[(ro + t) * self.n + co + t])
                    .sum();
            }
        }
        let dims = if kept.is_empty() {
            vec![1]
        } else {
            kept.iter().map(|&k| self.dims[k]).collect()
        };
        Ok(Self { dims, n: m, data })
    }

    /// Reorders tensor factors: subsystem `k` of the result is subsystem
    /// `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let count = self.dims.len();
        let mut seen = vec![false; count];
        if order.len() != count {
            return Err(dim_mismatch(
                format!("permutation of {count} subsystems"),
                format!("{} indices", order.len()),
            ));
        }
        for &o in order {
            if o >= count {
                return Err(Error::IndexOutOfRange { index: o, count });
            }
            if seen[o] {
                return Err(Error::InvalidDims(format!("index {o} repeated in permutation")));
            }
            seen[o] = true;
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let map = permutation_map(&self.dims, order);
        let n = self.n;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[map[i] * n + map[j]] = self.data[i * n + j];
            }
        }
        Ok(Self {
            dims: new_dims,
            n,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(dim_mismatch(self.n, other.n));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Frobenius norm of `self - self†`, halved.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        0.5 * acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Frobenius norm of `U†U - 1`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.dagger().matmul(self).expect("square");
        let id = Self::identity(self.dims.clone()).expect("dims valid");
        frobenius_distance(&prod, &id).expect("same size")
    }

    /// Eigen-decomposition of the Hermitian part of `self`: ascending
    /// eigenvalues and the matching eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, Self) {
        let h = self.hermitian_part();
        let eig = nalgebra::SymmetricEigen::new(h.to_nalgebra());
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(self.dims.clone(), |i, j| eig.eigenvectors[(i, order[j])])
            .expect("dims valid");
        (values, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigh().0.last().copied().unwrap_or(0.0)
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.data[i * self.n + j]).collect()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub(crate) fn from_nalgebra(dims: Vec<usize>, m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidDims(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        Self::from_fn(dims, |i, j| m[(i, j)]).and_then(|out| {
            if out.n != m.nrows() {
                Err(dim_mismatch(out.n, m.nrows()))
            } else {
                Ok(out)
            }
        })
    }
}

/// Maps every flat index of a space with `dims` to its position after the
/// factor reordering `order` (as in [`ComplexMatrix::permute`]).
pub(crate) fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let new_strides = strides(&new_dims);
    // stride in the new layout of old subsystem `order[k]`
    let mut stride_of_old = vec![0; dims.len()];
    for (k, &o) in order.iter().enumerate() {
        stride_of_old[o] = new_strides[k];
    }
    let n: usize = dims.iter().product();
    (0..n)
        .map(|flat| {
            let mut rest = flat;
            let mut out = 0;
            for (s, (&os, &ns)) in old_strides.iter().zip(&stride_of_old).enumerate() {
                let idx = rest / os;
                rest %= os;
                debug_assert!(idx < dims[s]);
                out += idx * ns;
            }
            out
        })
        .collect()
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix dims={:?}", self.dims)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl AsRef<ComplexMatrix> for ComplexMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        self
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

// Operator sugar. These panic on size mismatch, like nalgebra's operators;
// use the `matmul`/`checked_*` methods where the sizes come from user input.

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product size mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum size mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("matrix difference size mismatch")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.n, rhs.n, "matrix sum size mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl ComplexMatrix {
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.n != other.n {
            return Err(dim_mismatch(self.n, other.n));
        }
        Ok(Self {
            dims: self.dims.clone(),
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

/// Wire form of a matrix: `{"dims": [...], "data": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dims: Vec<usize>,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;
    fn try_from(m: MatrixJson) -> Result<Self> {
        ComplexMatrix::new(
            m.dims,
            m.data.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        )
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            dims: m.dims,
            data: m.data.into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Kronecker product of two matrices.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// Kronecker product of a list of matrices, left to right.
pub fn tensor_all<'a>(items: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    items.into_iter().fold(None, |acc, m| match acc {
        None => Some(m.clone()),
        Some(a) => Some(a.tensor(m)),
    })
}

pub fn partial_trace(m: &ComplexMatrix, keep: &[usize]) -> Result<ComplexMatrix> {
    m.partial_trace(keep)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.dagger()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    m.hermitian_part()
}

/// `‖a − b‖_F`. Only the total dimensions have to agree.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(dim_mismatch(a.n, b.n));
    }
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Pauli matrices and the qubit identity.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::eye(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(vec![2], &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        ComplexMatrix::new(vec![2], vec![z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(vec![2], &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// `[1, X, Y, Z]`.
    pub fn all() -> [ComplexMatrix; 4] {
        [id(), x(), y(), z()]
    }
}

/// A dense `rows × cols` matrix, used for maps between spaces of different
/// dimension (Kraus operators, isometries).
#[derive(Clone, Debug, PartialEq)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl RectMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims(format!("shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(dim_mismatch(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj()).expect("shape valid")
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_mismatch(
                format!("{} rows", self.cols),
                format!("{} rows", other.rows),
            ));
        }
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
        .expect("shape valid")
    }

    /// `K·ρ·K†` for a square `ρ` of size `cols`; the result acts on a single
    /// subsystem of dimension `rows`.
    pub fn sandwich(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.cols {
            return Err(dim_mismatch(self.cols, rho.dim()));
        }
        let (r, c) = (self.rows, self.cols);
        // tmp = K ρ  (r × c)
        let mut tmp = vec![ZERO; r * c];
        for i in 0..r {
            for k in 0..c {
                let a = self.data[i * c + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..c {
                    tmp[i * c + j] += a * rho.get(k, j);
                }
            }
        }
        ComplexMatrix::from_fn(vec![r], |i, j| {
            (0..c).map(|k| tmp[i * c + k] * self.data[j * c + k].conj()).sum()
        })
    }

    /// `K† K` as a square matrix on a single subsystem of dimension `cols`.
    pub fn gram(&self) -> ComplexMatrix {
        let (r, c) = (self.rows, self.cols);
        ComplexMatrix::from_fn(vec![c], |i, j| {
            (0..r).map(|k| self.data[k * c + i].conj() * self.data[k * c + j]).sum()
        })
        .expect("shape valid")
    }

    /// Views a square matrix as a rectangular one.
    pub fn from_square(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.dim(),
            cols: m.dim(),
            data: m.data().to_vec(),
        }
    }

    pub fn to_square(&self, dims: Vec<usize>) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(Error::InvalidDims(format!(
                "{}x{} matrix is not square",
                self.rows, self.cols
            )));
        }
        ComplexMatrix::new(dims, self.data.clone())
    }
}

/// Wire form: square matrices use the `{"dims", "data"}` layout, others
/// `{"shape": [rows, cols], "data"}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RectJson {
    Shaped { shape: [usize; 2], data: Vec<[f64; 2]> },
    Square(ComplexMatrix),
}

impl Serialize for RectMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_square() {
            let m = ComplexMatrix::new(vec![self.rows], self.data.clone())
                .map_err(serde::ser::Error::custom)?;
            RectJson::Square(m).serialize(s)
        } else {
            RectJson::Shaped {
                shape: [self.rows, self.cols],
                data: self.data.iter().map(|z| [z.re, z.im]).collect(),
            }
            .serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for RectMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RectJson::deserialize(d)? {
            RectJson::Square(m) => Ok(RectMatrix::from_square(&m)),
            RectJson::Shaped { shape, data } => RectMatrix::new(
                shape[0],
                shape[1],
                data.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
            )
            .map_err(serde::de::Error::custom),
        }
    }
}

/// Normalized pure state on a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let n = validate_dims(&dims)?;
        if amplitudes.len() != n {
            return Err(dim_mismatch(n, amplitudes.len()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(dims, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(dims: Vec<usize>, k: usize) -> Result<Self> {
        let n = validate_dims(&dims)?;
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, count: n });
        }
        let mut amplitudes = vec![ZERO; n];
        amplitudes[k] = ONE;
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(dim_mismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        let a = &self.amplitudes;
        ComplexMatrix::from_fn(self.dims.clone(), |i, j| a[i] * a[j].conj()).expect("dims valid")
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, amplitudes }
    }
}

/// A matrix validated to satisfy `U†U = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "ComplexMatrix")]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let err = m.unitarity_error();
        if err > tol {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self(m))
    }

    pub fn identity(d: usize) -> Self {
        Self(ComplexMatrix::eye(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.dagger())
    }

    /// `e^{iφ}·U`, still unitary.
    pub fn phased(&self, phase: C64) -> Self {
        Self(self.0.scale(phase))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(self.0.tensor(&other.0))
    }
}

impl Deref for UnitaryMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl From<UnitaryMatrix> for ComplexMatrix {
    fn from(u: UnitaryMatrix) -> Self {
        u.0
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        UnitaryMatrix::with_tolerance(m, COMPARISON_TOL).map_err(serde::de::Error::custom)
    }
}

fn gaussian_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(vec![dim], |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
    .expect("dim must be positive")
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryMatrix {
    let g = gaussian_matrix(dim, rng).to_nalgebra();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut m = ComplexMatrix::from_nalgebra(vec![dim], &q).expect("square");
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            m[(i, j)] *= phase;
        }
    }
    UnitaryMatrix(m)
}

/// Random density matrix `GG†/Tr(GG†)` with `G` complex Gaussian.
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(dim, rng);
    let p = &g * &g.dagger();
    let t = p.trace().re;
    p.scale_real(1.0 / t).hermitian_part()
}

/// Haar-random pure state.
pub fn random_state_vector(dims: Vec<usize>, rng: &mut impl Rng) -> Result<StateVector> {
    let n = validate_dims(&dims)?;
    let amps: Vec<C64> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect();
    StateVector::normalized(dims, amps)
}
