//! Complex vectors, dense operators and the spectral backend.
//!
//! Inner products are linear in the first argument: `inner(x, y) = Σ x_i conj(y_i)`.
//! Every sequence type here upholds the no-zero-elements rule: vectors whose
//! norm falls below [`ZERO_TOL`](crate::tol::ZERO_TOL) are rejected at construction.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FrameError, Result};
use crate::tol;

pub type C64 = Complex64;

/// Iteration cap handed to the eigen and SVD sweeps.
pub const MAX_SWEEPS: usize = 200_000;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct ComplexVector(DVector<C64>);

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl ComplexVector {
    pub fn new(components: Vec<C64>) -> Self {
        Self(DVector::from_vec(components))
    }

    pub fn from_real(components: &[f64]) -> Self {
        Self(DVector::from_iterator(components.len(), components.iter().map(|&v| re(v))))
    }

    pub fn from_dvector(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Standard basis vector `e_{k+1}` (zero-based `k`).
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = re(1.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<C64> {
        self.0
    }

    pub fn components(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scaled_real(&self, s: f64) -> Self {
        Self(&self.0 * re(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    /// Zero-pad (or keep) to `dim` coordinates. Inner products are unchanged.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim(), "cannot pad {} down to {}", self.dim(), dim);
        let mut v = DVector::zeros(dim);
        v.rows_mut(0, self.dim()).copy_from(&self.0);
        Self(v)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for z in self.0.iter() {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        Ok(Self::new(pairs.into_iter().map(|[a, b]| c(a, b)).collect()))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(FrameError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn inner(x: &ComplexVector, y: &ComplexVector) -> Result<C64> {
    check_dim(x.dim(), y.dim())?;
    Ok(y.0.dotc(&x.0))
}

/// A finite indexed family of nonzero vectors sharing one ambient dimension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorSequence {
    ambient_dim: usize,
    vectors: Vec<ComplexVector>,
    label: String,
}

impl VectorSequence {
    pub fn new(ambient_dim: usize, vectors: Vec<ComplexVector>, label: impl Into<String>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(FrameError::ParamValidation("ambient dimension must be positive".into()));
        }
        for (index, v) in vectors.iter().enumerate() {
            check_dim(ambient_dim, v.dim())?;
            let norm = v.norm();
            if !(norm > tol::ZERO_TOL) {
                return Err(FrameError::ZeroVector { index, norm });
            }
        }
        Ok(Self { ambient_dim, vectors, label: label.into() })
    }

    pub fn from_real_rows(ambient_dim: usize, rows: &[&[f64]], label: &str) -> Result<Self> {
        Self::new(ambient_dim, rows.iter().map(|r| ComplexVector::from_real(r)).collect(), label)
    }

    /// The first `n` standard basis vectors of `C^n`.
    pub fn orthonormal_basis(n: usize) -> Self {
        let vectors = (0..n).map(|k| ComplexVector::basis(n, k)).collect();
        Self { ambient_dim: n, vectors, label: format!("onb({n})") }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> &ComplexVector {
        &self.vectors[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexVector> {
        self.vectors.iter()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vectors.iter().map(ComplexVector::norm).collect()
    }

    pub fn padded(&self, dim: usize) -> Self {
        Self {
            ambient_dim: dim,
            vectors: self.vectors.iter().map(|v| v.padded(dim)).collect(),
            label: self.label.clone(),
        }
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            vectors: self.vectors[..n.min(self.len())].to_vec(),
            label: self.label.clone(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            label: self.label.clone(),
        }
    }

    /// Apply a vector map; the result is revalidated against the zero tolerance.
    pub fn try_map(&self, f: impl Fn(usize, &ComplexVector) -> ComplexVector) -> Result<Self> {
        let vectors: Vec<_> = self.vectors.iter().enumerate().map(|(i, v)| f(i, v)).collect();
        let dim = vectors.first().map_or(self.ambient_dim, ComplexVector::dim);
        Self::new(dim, vectors, self.label.clone())
    }

    /// Columns are the vectors: the `d × N` synthesis matrix.
    pub fn synthesis_matrix(&self) -> DMatrix<C64> {
        let d = self.ambient_dim;
        let mut m = DMatrix::zeros(d, self.len());
        for (j, v) in self.vectors.iter().enumerate() {
            m.column_mut(j).copy_from(v.as_dvector());
        }
        m
    }
}

/// Dense square operator with lazily decided structural flags.
#[derive(Clone)]
pub struct LinearOperator {
    matrix: DMatrix<C64>,
    max_abs: f64,
    hermitian_dev: OnceLock<f64>,
    normal_dev: OnceLock<f64>,
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearOperator").field("dim", &self.dim()).field("matrix", &self.matrix).finish()
    }
}

impl PartialEq for LinearOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl LinearOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(FrameError::NotSquare { rows, cols });
        }
        let max_abs = max_abs(&matrix);
        Ok(Self { matrix, max_abs, hermitian_dev: OnceLock::new(), normal_dev: OnceLock::new() })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is square")
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries))).expect("diagonal is square")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// `max|M − M^H|`.
    pub fn hermitian_deviation(&self) -> f64 {
        *self.hermitian_dev.get_or_init(|| max_abs(&(&self.matrix - self.matrix.adjoint())))
    }

    /// `max|M M^H − M^H M|`.
    pub fn normal_deviation(&self) -> f64 {
        *self.normal_dev.get_or_init(|| {
            let adj = self.matrix.adjoint();
            max_abs(&(&self.matrix * &adj - &adj * &self.matrix))
        })
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= tol::HERMITIAN_REL * self.max_abs
    }

    pub fn is_normal(&self) -> bool {
        self.normal_deviation() <= tol::NORMAL_REL * self.max_abs * self.max_abs
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub fn apply(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.dim(), x.dim())?;
        Ok(ComplexVector(&self.matrix * x.as_dvector()))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.matrix.adjoint()).expect("adjoint of square is square")
    }

    pub fn operator_norm(&self) -> Result<f64> {
        Ok(singular_values(&self.matrix)?.first().copied().unwrap_or(0.0))
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues ascending with matching orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ComplexVector>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Eigenvectors as matrix columns, in eigenvalue order.
    pub fn vectors_matrix(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut v = DMatrix::zeros(n, n);
        for (j, e) in self.eigenvectors.iter().enumerate() {
            v.column_mut(j).copy_from(e.as_dvector());
        }
        v
    }

    /// `V f(Λ) V^H`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
        let v = self.vectors_matrix();
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = re(f(lambda));
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        self.functional_calculus(|x| x)
    }
}

/// Full spectral decomposition of a Hermitian operator.
pub fn hermitian_eig(op: &LinearOperator) -> Result<SpectralData> {
    if !op.is_hermitian() {
        return Err(FrameError::NotHermitian { deviation: op.hermitian_deviation() });
    }
    eig_hermitian_matrix(op.matrix())
}

/// Spectral decomposition of a matrix known to be Hermitian up to rounding.
/// The matrix is symmetrised before the sweep.
pub(crate) fn eig_hermitian_matrix(m: &DMatrix<C64>) -> Result<SpectralData> {
    let sym = (m + m.adjoint()) * re(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or(FrameError::ConvergenceFailure { iterations: MAX_SWEEPS })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Ok(SpectralData {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: order.iter().map(|&i| ComplexVector(eig.eigenvectors.column(i).into_owned())).collect(),
    })
}

/// Singular value decomposition with singular values sorted descending.
#[derive(Clone, Debug)]
pub struct SvdData {
    pub u: DMatrix<C64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<C64>,
}

impl SvdData {
    /// Numerical rank with the cutoff `rel · σ_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values.iter().filter(|&&s| s > rel * top && s > 0.0).count()
    }

    /// Right singular vector `k` (column of `V`).
    pub fn right_vector(&self, k: usize) -> ComplexVector {
        ComplexVector(self.v_t.row(k).adjoint())
    }
}

pub fn svd(m: &DMatrix<C64>) -> Result<SvdData> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(SvdData { u: DMatrix::zeros(rows, 0), singular_values: vec![], v_t: DMatrix::zeros(0, cols) });
    }
    let s = SVD::try_new(m.clone(), true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(FrameError::ConvergenceFailure { iterations: MAX_SWEEPS })?;
    Ok(SvdData {
        u: s.u.expect("u requested"),
        singular_values: s.singular_values.iter().copied().collect(),
        v_t: s.v_t.expect("v_t requested"),
    })
}

/// Singular values, descending, `min(rows, cols)` of them.
pub fn singular_values(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(vec![]);
    }
    let s = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_SWEEPS)
        .ok_or(FrameError::ConvergenceFailure { iterations: MAX_SWEEPS })?;
    Ok(s.singular_values.iter().copied().collect())
}

/// A subspace carried by an orthonormal basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubspaceSpec {
    ambient_dim: usize,
    basis: Vec<ComplexVector>,
}

impl SubspaceSpec {
    pub fn new(ambient_dim: usize, basis: Vec<ComplexVector>) -> Result<Self> {
        for b in &basis {
            check_dim(ambient_dim, b.dim())?;
        }
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(a, b)? - re(target)).norm());
            }
        }
        if worst > tol::ORTHONORMAL {
            return Err(FrameError::ParamValidation(format!("basis is not orthonormal (Gram deviation {worst:e})")));
        }
        Ok(Self { ambient_dim, basis })
    }

    pub fn whole(dim: usize) -> Self {
        Self { ambient_dim: dim, basis: (0..dim).map(|k| ComplexVector::basis(dim, k)).collect() }
    }

    /// Span of the given standard coordinates (zero-based).
    pub fn coordinates(dim: usize, coords: impl IntoIterator<Item = usize>) -> Self {
        Self { ambient_dim: dim, basis: coords.into_iter().map(|k| ComplexVector::basis(dim, k)).collect() }
    }

    /// Orthonormal basis of the span of `vectors`, rank decided by [`tol::RANK_REL`].
    pub fn spanned_by(ambient_dim: usize, vectors: &[ComplexVector]) -> Result<Self> {
        for v in vectors {
            check_dim(ambient_dim, v.dim())?;
        }
        if vectors.is_empty() {
            return Ok(Self { ambient_dim, basis: vec![] });
        }
        let mut m = DMatrix::zeros(ambient_dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            m.column_mut(j).copy_from(v.as_dvector());
        }
        let s = svd(&m)?;
        let top = s.singular_values.first().copied().unwrap_or(0.0);
        let basis = s
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &sv)| sv > 0.0 && sv * sv > tol::RANK_REL * top * top)
            .map(|(k, _)| ComplexVector(s.u.column(k).into_owned()))
            .collect();
        Ok(Self { ambient_dim, basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexVector] {
        &self.basis
    }

    pub fn project(&self, x: &ComplexVector) -> Result<ComplexVector> {
        check_dim(self.ambient_dim, x.dim())?;
        let mut out = DVector::zeros(self.ambient_dim);
        for b in &self.basis {
            let coeff = inner(x, b)?;
            out += b.as_dvector() * coeff;
        }
        Ok(ComplexVector(out))
    }
}

/// Orthogonal projection onto `m`.
pub fn project(m: &SubspaceSpec, x: &ComplexVector) -> Result<ComplexVector> {
    m.project(x)
}
