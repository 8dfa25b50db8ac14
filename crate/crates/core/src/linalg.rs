//! Dense complex linear algebra: the matrix type, Kronecker products,
//! tensor-leg embeddings, rank-revealing nullspaces and projective
//! comparison.
//!
//! Matrices are stored row-major. Vectorization is also row-major, so for
//! `X` of shape `m × k` the identities used by the intertwiner solvers are
//!
//! ```text
//! vec(A·X) = (A ⊗ I_k) vec(X)
//! vec(X·B) = (I_m ⊗ Bᵀ) vec(X)
//! ```

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cone, czero, is_finite, Real};

/// Default relative threshold below which a singular value counts as zero.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Relative window within which two moduli are treated as tied by
/// [`normalize_solution`].
pub const NORMALIZE_TIE_TOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cone();
        }
        m
    }

    /// Elementary matrix `e^a_b` of size `n × n`: a single one at row `a`, column `b`.
    pub fn elementary(n: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[a * n + b] = cone();
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(rows.len(), ncols, rows.concat())
    }

    /// Real-valued convenience constructor, mostly for tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Complex::new(T::lit(v), T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    /// Column vector holding `entries`.
    pub fn column(entries: Vec<Complex<T>>) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: Complex<T>) {
        self.data[r * self.cols + c] += v;
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|&z| !is_finite(z)) {
            Some(k) => Err(Error::NonFinite {
                row: k / self.cols.max(1),
                col: k % self.cols.max(1),
            }),
            None => Ok(()),
        }
    }

    /// Same entries, new shape.
    pub fn reshape(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.data.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot reshape {}x{} into {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: self.data.clone(),
        })
    }

    /// Row-major vectorization as a column.
    pub fn vectorize(&self) -> Self {
        Self::column(self.data.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> T {
        let mut acc = T::zero();
        for z in &self.data {
            acc += z.norm_sqr();
        }
        num_traits::Float::sqrt(acc)
    }

    pub fn max_modulus(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, &z| num_traits::Float::max(m, cabs(z)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// Hermitian inner product `⟨self, other⟩ = Σ conj(self) · other` over all entries.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.data
            .iter()
            .zip(&other.data)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "shapes {:?} and {:?} differ",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::DimensionMismatch("vstack blocks differ in width".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Self { rows, cols, data })
    }

    /// The listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::DimensionMismatch(format!("column {bad} out of range")));
        }
        Ok(Self::from_fn(self.rows, cols.len(), |r, j| self.get(r, cols[j])))
    }

    /// Drops rows whose entries are all exactly zero.
    pub fn without_zero_rows(&self) -> Self {
        let zero = czero::<T>();
        let mut data = Vec::with_capacity(self.data.len());
        let mut rows = 0;
        for row in self.data.chunks(self.cols.max(1)) {
            if row.iter().any(|&z| z != zero) {
                data.extend_from_slice(row);
                rows += 1;
            }
        }
        Self {
            rows,
            cols: self.cols,
            data,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let inv = self
            .to_nalgebra()
            .try_inverse()
            .ok_or_else(|| Error::Singular("LU factorization found a zero pivot".into()))?;
        let out = Self::from_nalgebra(&inv);
        out.check_finite()
            .map_err(|_| Error::Singular("inverse has non-finite entries".into()))?;
        Ok(out)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex<T>> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex<T>>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_add(rhs).expect("matrix addition shape mismatch")
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_sub(rhs).expect("matrix subtraction shape mismatch")
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Real> Mul<Complex<T>> for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Complex<T>) -> ComplexMatrix<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        self.scale(-cone::<T>())
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a.get(i, j);
            if s.re == T::zero() && s.im == T::zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, s * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Permutation `P : C^dA ⊗ C^dB → C^dB ⊗ C^dA` with `P(u ⊗ v) = v ⊗ u`.
pub fn flip_operator<T: Real>(d_a: usize, d_b: usize) -> ComplexMatrix<T> {
    let n = d_a * d_b;
    let mut p = ComplexMatrix::zeros(n, n);
    for i in 0..d_a {
        for j in 0..d_b {
            p.set(j * d_a + i, i * d_b + j, cone());
        }
    }
    p
}

/// Acts with `op` on the tensor legs listed in `legs` (0-based, strictly
/// increasing) and with the identity on every other leg.
///
/// Non-adjacent legs are handled as the conjugation of `op ⊗ I` by the leg
/// permutation that brings the selected legs to the front; the entries are
/// written directly rather than by multiplying permutation matrices.
pub fn embed_on_legs<T: Real>(op: &ComplexMatrix<T>, legs: &[usize], leg_dims: &[usize]) -> Result<ComplexMatrix<T>> {
    if legs.is_empty() || legs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "legs must be non-empty and strictly increasing".into(),
        ));
    }
    if *legs.last().unwrap() >= leg_dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "leg {} does not exist among {} legs",
            legs.last().unwrap(),
            leg_dims.len()
        )));
    }
    let sel_dim: usize = legs.iter().map(|&l| leg_dims[l]).product();
    if op.shape() != (sel_dim, sel_dim) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but the selected legs span dimension {sel_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let total: usize = leg_dims.iter().product();
    let mut selected = vec![false; leg_dims.len()];
    for &l in legs {
        selected[l] = true;
    }
    // Split every basis index into (selected part, remaining part).
    let split: Vec<(usize, usize)> = (0..total)
        .map(|mut idx| {
            let mut digits = vec![0usize; leg_dims.len()];
            for (k, &d) in leg_dims.iter().enumerate().rev() {
                digits[k] = idx % d;
                idx /= d;
            }
            let (mut s, mut r) = (0usize, 0usize);
            for (k, &d) in leg_dims.iter().enumerate() {
                if selected[k] {
                    s = s * d + digits[k];
                } else {
                    r = r * d + digits[k];
                }
            }
            (s, r)
        })
        .collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for (row, &(rs, rr)) in split.iter().enumerate() {
        for (col, &(cs, cr)) in split.iter().enumerate() {
            if rr == cr {
                out.set(row, col, op.get(rs, cs));
            }
        }
    }
    Ok(out)
}

/// Basis of a right nullspace.
#[derive(Clone, Debug)]
pub struct NullspaceResult<T: Real> {
    pub dimension: usize,
    /// Unit-norm column vectors spanning the nullspace, mutually orthonormal.
    pub basis: Vec<ComplexMatrix<T>>,
    /// Singular values of the system, descending.
    pub singular_values: Vec<T>,
    /// Largest `‖M v‖` over the basis vectors.
    pub max_residual: T,
    pub tolerance_used: T,
    /// Set when the system matrix is identically zero.
    pub degenerate: bool,
}

impl<T: Real> NullspaceResult<T> {
    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// Lifts a nullspace computed on the coordinates `support` of a
    /// `k`-dimensional space back to the full space (zero elsewhere).
    pub fn embed(self, support: &[usize], k: usize) -> Result<Self> {
        if let Some(&bad) = support.iter().find(|&&c| c >= k) {
            return Err(Error::DimensionMismatch(format!("support index {bad} out of range")));
        }
        let basis = self
            .basis
            .iter()
            .map(|v| {
                let mut full = ComplexMatrix::zeros(k, 1);
                for (j, &c) in support.iter().enumerate() {
                    full.set(c, 0, v.get(j, 0));
                }
                full
            })
            .collect();
        Ok(Self { basis, ..self })
    }
}

/// Right nullspace of `m` from its singular value decomposition.
///
/// A singular value counts as zero iff it is below `rel_tol · σ_max`. Tall
/// systems are first reduced to their triangular QR factor, which has the
/// same singular values and right singular vectors.
pub fn nullspace<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> Result<NullspaceResult<T>> {
    if rel_tol.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    if m.rows() == 0 {
        return Err(Error::InvalidParameter("system has no rows".into()));
    }
    m.check_finite()?;
    let k = m.cols();
    if m.is_zero() {
        let basis = (0..k)
            .map(|j| ComplexMatrix::from_fn(k, 1, |r, _| if r == j { cone() } else { czero() }))
            .collect();
        return Ok(NullspaceResult {
            dimension: k,
            basis,
            singular_values: vec![T::zero(); k],
            max_residual: T::zero(),
            tolerance_used: rel_tol,
            degenerate: true,
        });
    }

    let a = m.to_nalgebra();
    let square = if a.nrows() > 2 * k {
        a.qr().r()
    } else if a.nrows() < k {
        // Pad with zero rows so that V is returned in full.
        let mut padded = DMatrix::zeros(k, k);
        padded.view_mut((0, 0), (a.nrows(), k)).copy_from(&a);
        padded
    } else {
        a
    };
    let svd = nalgebra::SVD::try_new(square, false, true, T::default_epsilon(), 0).ok_or(Error::SvdFailed)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::SvdFailed)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // The reductions above make the factored matrix k x k or taller, so
    // there are exactly k singular values.
    let singular_values: Vec<T> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = singular_values[0];
    let threshold = rel_tol * sigma_max;

    let mut basis = Vec::new();
    let mut max_residual = T::zero();
    for &i in &order {
        if svd.singular_values[i] < threshold {
            let v = ComplexMatrix::from_fn(k, 1, |r, _| v_t[(i, r)].conj());
            let res = m.try_mul(&v)?.frobenius_norm();
            max_residual = num_traits::Float::max(max_residual, res);
            basis.push(v);
        }
    }
    Ok(NullspaceResult {
        dimension: basis.len(),
        basis,
        singular_values,
        max_residual,
        tolerance_used: rel_tol,
        degenerate: false,
    })
}

/// Outcome of a comparison up to one overall scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveComparison<T: Real> {
    pub equal: bool,
    /// Best-fit scalar with `a ≈ λ b`.
    pub lambda: Complex<T>,
    /// `‖a − λ b‖_F / ‖a‖_F`.
    pub deviation: T,
}

/// Compares `a` and `b` up to a scalar: `λ = ⟨b, a⟩ / ‖b‖²` and the
/// deviation is measured relative to `a`.
///
/// If exactly one side is zero the deviation is 1 and the pair is never
/// equal, whichever side it is.
pub fn projective_compare<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    tol: T,
) -> Result<ProjectiveComparison<T>> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {:?} with {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let na = a.frobenius_norm();
    let nb = b.frobenius_norm();
    if na == T::zero() && nb == T::zero() {
        return Err(Error::DegenerateComparison);
    }
    if na == T::zero() || nb == T::zero() {
        return Ok(ProjectiveComparison {
            equal: false,
            lambda: czero(),
            deviation: T::one(),
        });
    }
    let lambda = b.inner(a) / Complex::new(nb * nb, T::zero());
    let mut acc = T::zero();
    for (&x, &y) in a.data().iter().zip(b.data()) {
        acc += (x - lambda * y).norm_sqr();
    }
    let deviation = num_traits::Float::sqrt(acc) / na;
    Ok(ProjectiveComparison {
        equal: deviation <= tol,
        lambda,
        deviation,
    })
}

/// Divides by the entry of largest modulus, which becomes exactly `1`.
/// Ties within a relative `1e-12` go to the lowest row-major index.
pub fn normalize_solution<T: Real>(v: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let max = v.max_modulus();
    if max == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    let window = max * T::lit(NORMALIZE_TIE_TOL);
    let pivot = v
        .data()
        .iter()
        .position(|&z| max - cabs(z) <= window)
        .expect("some entry attains the maximum modulus");
    let p = v.data()[pivot];
    let mut out = v.scale(p.inv());
    out.data[pivot] = cone();
    Ok(out)
}

/// Coefficient matrix of the linear map `X ↦ X·m_in − m_out·X` acting on
/// row-major `vec(X)`, with `X` of shape `m_out.rows() × m_in.rows()`.
pub fn sylvester_operator<T: Real>(m_in: &ComplexMatrix<T>, m_out: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !m_in.is_square() || !m_out.is_square() {
        return Err(Error::DimensionMismatch("intertwined operators must be square".into()));
    }
    let p = m_out.rows();
    let k = m_in.rows();
    let left = kron(&ComplexMatrix::identity(p), &m_in.transpose());
    let right = kron(m_out, &ComplexMatrix::identity(k));
    left.try_sub(&right)
}
