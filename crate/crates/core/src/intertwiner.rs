//! Intertwiners as nullspaces of stacked Sylvester systems.
//!
//! Each defining equation `X · M_in = M_out · X` contributes the block
//! [`sylvester_operator`]`(M_in, M_out)` acting on row-major `vec(X)`.
//! Blocks are stacked in the order the equations are given; the solvers
//! here always use the node-major order `Q_0, Q̄_0, q^{T_0}, Q_1, …` of
//! [`Generator::intertwining_set`].

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{normalize_solution, nullspace, sylvester_operator, ComplexMatrix, NullspaceResult};
use crate::reps::{
    coideal_generators, conjugate_rep, coproduct_matrix, low_root_of_unity_order, vector_rep, BoundaryParams,
    DualConvention, EvaluationRep, Generator,
};
use crate::scalar::{cabs, Real};
use crate::toda::solve_paper_k;

/// Roots of unity up to this order are flagged.
pub const ROOT_OF_UNITY_MAX_ORDER: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Bulk,
    Boundary,
    Equivalence,
    /// The explicit boundary equations of [`crate::toda`].
    PaperBoundary,
}

/// Non-generic features of a problem. They never stop a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolutionFlag {
    EqualSpectral,
    RootOfUnity(u32),
    /// The system matrix was identically zero.
    ZeroSystem,
}

/// One equation `X · m_in = m_out · X`.
#[derive(Clone, Debug)]
pub struct Equation<T: Real> {
    pub label: String,
    pub m_in: ComplexMatrix<T>,
    pub m_out: ComplexMatrix<T>,
}

impl<T: Real> Equation<T> {
    pub fn new(label: impl Into<String>, m_in: ComplexMatrix<T>, m_out: ComplexMatrix<T>) -> Self {
        Self {
            label: label.into(),
            m_in,
            m_out,
        }
    }

    /// `‖X m_in − m_out X‖ / (‖X‖ (‖m_in‖ + ‖m_out‖))`.
    pub fn relative_residual(&self, x: &ComplexMatrix<T>) -> Result<T> {
        let lhs = x.try_mul(&self.m_in)?;
        let rhs = self.m_out.try_mul(x)?;
        let scale = x.frobenius_norm() * (self.m_in.frobenius_norm() + self.m_out.frobenius_norm());
        if scale == T::zero() {
            return Ok(T::zero());
        }
        Ok(lhs.try_sub(&rhs)?.frobenius_norm() / scale)
    }
}

#[derive(Clone, Debug)]
pub struct IntertwinerSolution<T: Real> {
    pub kind: ProblemKind,
    pub n: usize,
    pub q: Complex<T>,
    /// Spectral parameters of the source and target spaces.
    pub x_in: Complex<T>,
    pub x_out: Complex<T>,
    pub eps: Option<BoundaryParams<T>>,
    pub flags: Vec<SolutionFlag>,
    /// Shape of the unknown matrix, `(target dim, source dim)`.
    pub shape: (usize, usize),
    pub nullspace: NullspaceResult<T>,
    /// Present iff the dimension is 1; its largest-modulus entry is 1.
    pub normalized: Option<ComplexMatrix<T>>,
    /// Largest relative equation residual of `normalized`, zero if absent.
    pub residual: T,
}

impl<T: Real> IntertwinerSolution<T> {
    pub fn dimension(&self) -> usize {
        self.nullspace.dimension
    }

    pub fn is_unique(&self) -> bool {
        self.normalized.is_some()
    }

    /// The normalized matrix, or [`Error::NotUnique`].
    pub fn unique(&self) -> Result<&ComplexMatrix<T>> {
        self.normalized.as_ref().ok_or(Error::NotUnique(self.dimension()))
    }

    /// Nullspace basis vectors reshaped to the unknown's shape.
    pub fn basis_matrices(&self) -> Result<Vec<ComplexMatrix<T>>> {
        self.nullspace
            .basis
            .iter()
            .map(|v| v.reshape(self.shape.0, self.shape.1))
            .collect()
    }
}

/// Stacks the Sylvester blocks of `equations` into one system matrix.
pub fn stack_equations<T: Real>(equations: &[Equation<T>]) -> Result<ComplexMatrix<T>> {
    let first = equations
        .first()
        .ok_or_else(|| Error::InvalidParameter("no equations to solve".into()))?;
    let shape = (first.m_out.rows(), first.m_in.rows());
    let blocks = equations
        .iter()
        .map(|eq| {
            if (eq.m_out.rows(), eq.m_in.rows()) != shape {
                return Err(Error::DimensionMismatch(format!(
                    "equation {} acts on a different space",
                    eq.label
                )));
            }
            sylvester_operator(&eq.m_in, &eq.m_out)
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::vstack(&blocks)
}

fn is_diagonal<T: Real>(m: &ComplexMatrix<T>) -> bool {
    let zero = ComplexMatrix::<T>::zeros(1, 1).get(0, 0);
    (0..m.rows()).all(|r| (0..m.cols()).all(|c| r == c || m.get(r, c) == zero))
}

/// Solves the stacked system and normalizes when the solution is unique.
/// `meta` supplies everything except the nullspace-derived fields.
///
/// Equations whose two sides are both diagonal (the `q^{T_i}`) only
/// constrain single unknowns: `(m_in[c,c] − m_out[r,r]) X[r,c] = 0`. Their
/// joint nullspace is spanned by the coordinates whose coefficient vector
/// is below `rel_tol` times the largest one, so those are solved first and
/// the remaining equations are restricted to the surviving coordinates
/// before the SVD.
pub fn solve_equations<T: Real>(
    meta: SolutionMeta<T>,
    equations: &[Equation<T>],
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    let first = equations
        .first()
        .ok_or_else(|| Error::InvalidParameter("no equations to solve".into()))?;
    let shape = (first.m_out.rows(), first.m_in.rows());
    if let Some(eq) = equations.iter().find(|eq| (eq.m_out.rows(), eq.m_in.rows()) != shape) {
        return Err(Error::DimensionMismatch(format!(
            "equation {} acts on a different space",
            eq.label
        )));
    }
    if rel_tol.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter("rel_tol must be positive".into()));
    }
    let k = shape.0 * shape.1;
    let (diag, general): (Vec<&Equation<T>>, Vec<&Equation<T>>) = equations
        .iter()
        .partition(|eq| is_diagonal(&eq.m_in) && is_diagonal(&eq.m_out));

    let mut pinned = vec![T::zero(); k];
    for eq in &diag {
        for r in 0..shape.0 {
            for c in 0..shape.1 {
                let d = eq.m_in.get(c, c) - eq.m_out.get(r, r);
                pinned[r * shape.1 + c] += d.norm_sqr();
            }
        }
    }
    let pinned: Vec<T> = pinned.into_iter().map(num_traits::Float::sqrt).collect();
    let top = pinned.iter().copied().fold(T::zero(), num_traits::Float::max);
    let support: Vec<usize> = (0..k).filter(|&i| pinned[i] <= rel_tol * top).collect();

    let unit = |i: usize, len: usize| {
        ComplexMatrix::from_fn(len, 1, |r, _| {
            if r == i {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    };
    let reduced = if general.is_empty() || support.is_empty() {
        None
    } else {
        let blocks = general
            .iter()
            .map(|eq| sylvester_operator(&eq.m_in, &eq.m_out)?.select_columns(&support))
            .collect::<Result<Vec<_>>>()?;
        Some(ComplexMatrix::vstack(&blocks)?.without_zero_rows())
    };
    let ns = match reduced {
        Some(m) if m.rows() > 0 => nullspace(&m, rel_tol)?.embed(&support, k)?,
        _ => {
            let mut singular_values: Vec<T> = pinned.iter().copied().filter(|&p| p > rel_tol * top).collect();
            singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            singular_values.extend(std::iter::repeat_n(T::zero(), support.len()));
            NullspaceResult {
                dimension: support.len(),
                basis: support.iter().map(|&i| unit(i, k)).collect(),
                singular_values,
                max_residual: T::zero(),
                tolerance_used: rel_tol,
                degenerate: top == T::zero() && general.iter().all(|eq| eq.m_in.is_zero() && eq.m_out.is_zero()),
            }
        }
    };
    let mut sol = meta.finish(shape, ns)?;
    if let Some(x) = &sol.normalized {
        let mut worst = T::zero();
        for eq in equations {
            worst = num_traits::Float::max(worst, eq.relative_residual(x)?);
        }
        sol.residual = worst;
    }
    Ok(sol)
}

/// Problem description carried into an [`IntertwinerSolution`].
#[derive(Clone, Debug)]
pub struct SolutionMeta<T: Real> {
    pub kind: ProblemKind,
    pub n: usize,
    pub q: Complex<T>,
    pub x_in: Complex<T>,
    pub x_out: Complex<T>,
    pub eps: Option<BoundaryParams<T>>,
    pub flags: Vec<SolutionFlag>,
}

impl<T: Real> SolutionMeta<T> {
    pub fn new(kind: ProblemKind, n: usize, q: Complex<T>, x_in: Complex<T>, x_out: Complex<T>) -> Self {
        let mut flags = Vec::new();
        if let Some(k) = low_root_of_unity_order(q, ROOT_OF_UNITY_MAX_ORDER) {
            flags.push(SolutionFlag::RootOfUnity(k));
        }
        Self {
            kind,
            n,
            q,
            x_in,
            x_out,
            eps: None,
            flags,
        }
    }

    pub(crate) fn finish(mut self, shape: (usize, usize), ns: NullspaceResult<T>) -> Result<IntertwinerSolution<T>> {
        if ns.degenerate {
            self.flags.push(SolutionFlag::ZeroSystem);
        }
        let normalized = if ns.dimension == 1 {
            Some(normalize_solution(&ns.basis[0].reshape(shape.0, shape.1)?)?)
        } else {
            None
        };
        Ok(IntertwinerSolution {
            kind: self.kind,
            n: self.n,
            q: self.q,
            x_in: self.x_in,
            x_out: self.x_out,
            eps: self.eps,
            flags: self.flags,
            shape,
            nullspace: ns,
            normalized,
            residual: T::zero(),
        })
    }
}

fn same_algebra<T: Real>(a: &EvaluationRep<T>, b: &EvaluationRep<T>) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::InvalidParameter(format!(
            "rank mismatch: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    if cabs(a.q() - b.q()) > T::lit(1e-12) * num_traits::Float::max(cabs(a.q()), T::one()) {
        return Err(Error::InvalidParameter("q mismatch between representations".into()));
    }
    Ok(())
}

fn near<T: Real>(a: Complex<T>, b: Complex<T>) -> bool {
    cabs(a - b) <= T::lit(1e-12) * num_traits::Float::max(cabs(a), T::one())
}

/// Equations for `S : V_A ⊗ V_B → V_B ⊗ V_A` with
/// `S · Δ_{A,B}(g) = Δ_{B,A}(g) · S`.
pub fn bulk_equations<T: Real>(rep_a: &EvaluationRep<T>, rep_b: &EvaluationRep<T>) -> Result<Vec<Equation<T>>> {
    same_algebra(rep_a, rep_b)?;
    Generator::intertwining_set(rep_a.n())
        .into_iter()
        .map(|g| {
            Ok(Equation::new(
                g.to_string(),
                coproduct_matrix(rep_a, rep_b, g)?,
                coproduct_matrix(rep_b, rep_a, g)?,
            ))
        })
        .collect()
}

/// Braiding S-matrix between two representations. Equal spectral
/// parameters are solved anyway and flagged.
pub fn solve_bulk<T: Real>(
    rep_a: &EvaluationRep<T>,
    rep_b: &EvaluationRep<T>,
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    let equations = bulk_equations(rep_a, rep_b)?;
    let mut meta = SolutionMeta::new(ProblemKind::Bulk, rep_a.n(), rep_a.q(), rep_a.x(), rep_b.x());
    if near(rep_a.x(), rep_b.x()) && rep_a.is_dual() == rep_b.is_dual() {
        meta.flags.push(SolutionFlag::EqualSpectral);
    }
    solve_equations(meta, &equations, rel_tol)
}

/// Equations `K · π(Q̂_i) = π̄(Q̂_i) · K`, `i = 0..n`.
pub fn boundary_equations<T: Real>(
    rep: &EvaluationRep<T>,
    dual: &EvaluationRep<T>,
    eps: &BoundaryParams<T>,
) -> Result<Vec<Equation<T>>> {
    same_algebra(rep, dual)?;
    let src = coideal_generators(rep, eps)?;
    let dst = coideal_generators(dual, eps)?;
    Ok(src
        .qhat
        .into_iter()
        .zip(dst.qhat)
        .enumerate()
        .map(|(i, (m_in, m_out))| Equation::new(format!("Qhat_{i}"), m_in, m_out))
        .collect())
}

/// Reflection matrix `K : V → V̄` intertwining the coideal generators.
///
/// `dual` is the outgoing representation; [`boundary_target`] builds it
/// for a chosen [`DualConvention`].
pub fn solve_boundary<T: Real>(
    rep: &EvaluationRep<T>,
    dual: &EvaluationRep<T>,
    eps: &BoundaryParams<T>,
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    if rep.dim() != dual.dim() {
        return Err(Error::DimensionMismatch(
            "representation and dual differ in dimension".into(),
        ));
    }
    let equations = boundary_equations(rep, dual, eps)?;
    let mut meta = SolutionMeta::new(ProblemKind::Boundary, rep.n(), rep.q(), rep.x(), dual.x());
    meta.eps = Some(eps.clone());
    solve_equations(meta, &equations, rel_tol)
}

/// Outgoing representation of a reflection of `rep`.
pub fn boundary_target<T: Real>(rep: &EvaluationRep<T>, convention: DualConvention) -> Result<EvaluationRep<T>> {
    conjugate_rep(rep, convention)
}

/// Shorthand: vector representation at `x`, reflected into its
/// conjugate under `convention`.
pub fn solve_vector_boundary<T: Real>(
    n: usize,
    q: Complex<T>,
    x: Complex<T>,
    eps: &BoundaryParams<T>,
    convention: DualConvention,
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    let rep = vector_rep(n, q, x)?;
    let dual = boundary_target(&rep, convention)?;
    solve_boundary(&rep, &dual, eps, rel_tol)
}

/// Maps `M` with `M · π_A(g) = π_B(g) · M` for every generator, including
/// `q^{T_i}`.
pub fn solve_equivalence<T: Real>(
    rep_a: &EvaluationRep<T>,
    rep_b: &EvaluationRep<T>,
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    same_algebra(rep_a, rep_b)?;
    if rep_a.dim() != rep_b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare representations of dimension {} and {}",
            rep_a.dim(),
            rep_b.dim()
        )));
    }
    let equations = Generator::intertwining_set(rep_a.n())
        .into_iter()
        .map(|g| {
            Ok(Equation::new(
                g.to_string(),
                rep_a.image(g)?.clone(),
                rep_b.image(g)?.clone(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut meta = SolutionMeta::new(ProblemKind::Equivalence, rep_a.n(), rep_a.q(), rep_a.x(), rep_b.x());
    if near(rep_a.x(), rep_b.x()) {
        meta.flags.push(SolutionFlag::EqualSpectral);
    }
    solve_equations(meta, &equations, rel_tol)
}

/// Which boundary equations a scan solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundarySystem {
    /// The printed component equations ([`crate::toda::paper_boundary_system`]).
    Paper,
    /// The coideal intertwining system against a conjugate representation.
    Engine(DualConvention),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScanKind {
    /// Vector `S`-matrix with the first spectral parameter fixed.
    Bulk,
    Boundary(BoundarySystem),
}

/// One point of a scan grid.
#[derive(Clone, Debug, PartialEq)]
pub enum GridPoint<T: Real> {
    /// Boundary parameters; the spectral parameter is the fixed one.
    Eps(BoundaryParams<T>),
    /// A spectral parameter: the second particle for bulk scans, the
    /// incoming particle for boundary scans.
    Spectral(Complex<T>),
}

/// Parameters held fixed across a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanFixed<T: Real> {
    pub n: usize,
    pub q: Complex<T>,
    pub x: Complex<T>,
    /// Required for boundary scans over spectral points.
    pub eps: Option<BoundaryParams<T>>,
    pub rel_tol: T,
}

#[derive(Clone, Debug)]
pub struct ScanResult<T: Real> {
    pub kind: ScanKind,
    pub fixed: ScanFixed<T>,
    pub grid: Vec<GridPoint<T>>,
    pub dims: Vec<usize>,
}

fn scan_point<T: Real>(kind: ScanKind, fixed: &ScanFixed<T>, point: &GridPoint<T>) -> Result<usize> {
    let (x, eps) = match point {
        GridPoint::Eps(e) => (fixed.x, e.clone()),
        GridPoint::Spectral(x) => (*x, fixed.eps.clone().unwrap_or_else(|| BoundaryParams::zeros(fixed.n))),
    };
    let sol = match kind {
        ScanKind::Bulk => {
            let GridPoint::Spectral(xb) = point else {
                return Err(Error::InvalidParameter("bulk scans take spectral grid points".into()));
            };
            let a = vector_rep(fixed.n, fixed.q, fixed.x)?;
            let b = vector_rep(fixed.n, fixed.q, *xb)?;
            solve_bulk(&a, &b, fixed.rel_tol)?
        }
        ScanKind::Boundary(BoundarySystem::Paper) => solve_paper_k(fixed.n, fixed.q, x, &eps, fixed.rel_tol)?,
        ScanKind::Boundary(BoundarySystem::Engine(conv)) => {
            solve_vector_boundary(fixed.n, fixed.q, x, &eps, conv, fixed.rel_tol)?
        }
    };
    Ok(sol.dimension())
}

/// Nullspace dimension at every grid point, in grid order.
///
/// Points are evaluated in parallel. The grid is validated first, so a
/// malformed point fails the whole scan before any work is done.
pub fn dimension_scan<T: Real>(kind: ScanKind, fixed: ScanFixed<T>, grid: Vec<GridPoint<T>>) -> Result<ScanResult<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("scan grid is empty".into()));
    }
    if matches!(kind, ScanKind::Boundary(_))
        && fixed.eps.is_none()
        && grid.iter().any(|p| matches!(p, GridPoint::Spectral(_)))
    {
        return Err(Error::InvalidParameter("spectral boundary scans need fixed eps".into()));
    }
    for point in &grid {
        match (kind, point) {
            (ScanKind::Bulk, GridPoint::Eps(_)) => {
                return Err(Error::InvalidParameter("bulk scans take spectral grid points".into()))
            }
            (_, GridPoint::Eps(e)) => e.check_rank(fixed.n)?,
            (_, GridPoint::Spectral(x)) => {
                if cabs(*x) == T::zero() {
                    return Err(Error::InvalidParameter("spectral grid point is zero".into()));
                }
            }
        }
    }
    if let Some(e) = &fixed.eps {
        e.check_rank(fixed.n)?;
    }
    let dims = grid
        .par_iter()
        .map(|p| scan_point(kind, &fixed, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        kind,
        fixed,
        grid,
        dims,
    })
}

/// `{values}^{n+1}` in lexicographic order, first index slowest.
pub fn eps_grid<T: Real>(n: usize, values: &[Complex<T>]) -> Vec<GridPoint<T>> {
    let len = n + 1;
    let total = values.len().pow(len as u32);
    (0..total)
        .map(|mut idx| {
            let mut eps = vec![values[0]; len];
            for slot in eps.iter_mut().rev() {
                *slot = values[idx % values.len()];
                idx /= values.len();
            }
            GridPoint::Eps(BoundaryParams::new(eps).expect("finite grid values"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, projective_compare};
    use crate::reps::dual_rep;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn q0() -> Complex<f64> {
        Complex::from_polar(0.8, 0.3)
    }

    fn ex(theta: f64) -> Complex<f64> {
        c(theta.exp(), 0.0)
    }

    #[test]
    fn bulk_unique_at_generic_point() {
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let b = vector_rep(1, q0(), ex(0.23)).unwrap();
        let sol = solve_bulk(&a, &b, 1e-9).unwrap();
        assert_eq!(sol.dimension(), 1);
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        assert!(sol.flags.is_empty());
        assert_eq!(sol.shape, (4, 4));
    }

    #[test]
    fn bulk_equal_spectral_is_flagged() {
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let sol = solve_bulk(&a, &a, 1e-9).unwrap();
        assert!(sol.flags.contains(&SolutionFlag::EqualSpectral));
        // Measured: one-dimensional, spanned by the identity, which
        // trivially intertwines V ⊗ V with itself.
        assert_eq!(sol.dimension(), 1);
        assert!(
            projective_compare(sol.unique().unwrap(), &M::identity(4), 1e-10)
                .unwrap()
                .equal
        );
    }

    #[test]
    fn bulk_rejects_mismatched_reps() {
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let b = vector_rep(2, q0(), ex(0.2)).unwrap();
        assert!(solve_bulk(&a, &b, 1e-9).is_err());
        let b = vector_rep(1, c(1.3, 0.0), ex(0.2)).unwrap();
        assert!(solve_bulk(&a, &b, 1e-9).is_err());
    }

    #[test]
    fn bulk_schur_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..10 {
                let q = Complex::from_polar(rng.gen_range(0.6..1.4), rng.gen_range(0.1..1.2));
                let xa = Complex::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
                let xb = Complex::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
                let a = vector_rep(n, q, xa).unwrap();
                let b = vector_rep(n, q, xb).unwrap();
                let ab = solve_bulk(&a, &b, 1e-9).unwrap();
                let ba = solve_bulk(&b, &a, 1e-9).unwrap();
                assert_eq!(ab.dimension(), 1, "n={n}");
                assert!(ab.residual < 1e-8);
                let prod = ba.unique().unwrap() * ab.unique().unwrap();
                let cmp = projective_compare(&prod, &M::identity(prod.rows()), 1e-8).unwrap();
                assert!(cmp.equal, "n={n}, deviation {}", cmp.deviation);
            }
        }
    }

    #[test]
    fn boundary_zero_eps_n1_under_both_conventions() {
        let eps = BoundaryParams::zeros(1);
        let crossed = solve_vector_boundary(1, q0(), ex(0.7), &eps, DualConvention::Crossed, 1e-9).unwrap();
        assert!(crossed.dimension() >= 1);
        assert!(crossed.residual < 1e-10);
        let inverse = solve_vector_boundary(1, q0(), ex(0.7), &eps, DualConvention::Inverse, 1e-9).unwrap();
        assert_eq!(inverse.dimension(), 0);
        assert!(inverse.normalized.is_none());
    }

    #[test]
    fn boundary_literal_signature_with_negated_dual() {
        let rep = vector_rep(1, q0(), ex(0.7)).unwrap();
        let dual = dual_rep(&rep, true).unwrap();
        let sol = solve_boundary(&rep, &dual, &BoundaryParams::zeros(1), 1e-9).unwrap();
        assert_eq!(sol.dimension(), 0);
        assert!(matches!(sol.unique(), Err(Error::NotUnique(0))));
    }

    #[test]
    fn boundary_n2_measured() {
        let eps = BoundaryParams::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let sol = solve_vector_boundary(2, q0(), ex(0.7), &eps, DualConvention::Crossed, 1e-9).unwrap();
        assert_eq!(sol.dimension(), 0);
        let zero = solve_vector_boundary(
            2,
            q0(),
            ex(0.7),
            &BoundaryParams::zeros(2),
            DualConvention::Crossed,
            1e-9,
        )
        .unwrap();
        assert_eq!(zero.dimension(), 1);
        assert!(zero.residual < 1e-10);
    }

    #[test]
    fn boundary_wrong_eps_length() {
        let eps = BoundaryParams::zeros(2);
        assert!(solve_vector_boundary(1, q0(), ex(0.7), &eps, DualConvention::Crossed, 1e-9).is_err());
    }

    #[test]
    fn boundary_independent_of_equation_order() {
        let rep = vector_rep(1, q0(), ex(0.7)).unwrap();
        let dual = boundary_target(&rep, DualConvention::Crossed).unwrap();
        let eps = BoundaryParams::new(vec![c(0.3, 0.1), c(2.0, 0.0)]).unwrap();
        let eqs = boundary_equations(&rep, &dual, &eps).unwrap();
        let meta = || SolutionMeta::new(ProblemKind::Boundary, 1, q0(), rep.x(), dual.x());
        let forward = solve_equations(meta(), &eqs, 1e-9).unwrap();
        let reversed: Vec<_> = eqs.iter().rev().cloned().collect();
        let backward = solve_equations(meta(), &reversed, 1e-9).unwrap();
        assert_eq!(forward.dimension(), 1);
        let diff = forward.unique().unwrap() - backward.unique().unwrap();
        assert!(diff.frobenius_norm() < 1e-10);
    }

    #[test]
    fn equivalence_examples() {
        let rep = vector_rep(2, q0(), c(1.1, 0.4)).unwrap();
        let same = solve_equivalence(&rep, &rep, 1e-9).unwrap();
        assert!(same.dimension() >= 1);
        let cmp = projective_compare(same.unique().unwrap(), &M::identity(3), 1e-10).unwrap();
        assert!(cmp.equal);

        let g = M::diagonal(&[c(1.0, 0.0), c(2.0, -1.0), c(0.5, 0.0)]);
        let conj = rep.conjugated(&g).unwrap();
        let sol = solve_equivalence(&rep, &conj, 1e-9).unwrap();
        let cmp = projective_compare(sol.unique().unwrap(), &g, 1e-10).unwrap();
        assert!(cmp.equal, "{}", cmp.deviation);

        let other = vector_rep(2, q0(), c(0.7, -0.2)).unwrap();
        assert_eq!(solve_equivalence(&rep, &other, 1e-9).unwrap().dimension(), 0);

        let bigger = vector_rep(3, q0(), c(0.7, -0.2)).unwrap();
        assert!(solve_equivalence(&rep, &bigger, 1e-9).is_err());
    }

    #[test]
    fn equation_residual_detects_perturbation() {
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let b = vector_rep(1, q0(), ex(0.23)).unwrap();
        let sol = solve_bulk(&a, &b, 1e-9).unwrap();
        let eqs = bulk_equations(&a, &b).unwrap();
        let mut bad = sol.unique().unwrap().clone();
        bad.add_at(0, 1, c(0.01, 0.0));
        let worst = eqs
            .iter()
            .map(|e| e.relative_residual(&bad).unwrap())
            .fold(0.0, f64::max);
        assert!(worst > 1e-4);
    }

    #[test]
    fn staged_solve_matches_full_stack() {
        for n in 1..=2 {
            let a = vector_rep(n, q0(), c(1.4, 0.3)).unwrap();
            let b = vector_rep(n, q0(), c(0.6, -0.8)).unwrap();
            let eqs = bulk_equations(&a, &b).unwrap();
            let staged = solve_bulk(&a, &b, 1e-9).unwrap();
            let full = nullspace(&stack_equations(&eqs).unwrap(), 1e-9).unwrap();
            assert_eq!(full.dimension, staged.dimension());
            let direct = normalize_solution(&full.basis[0].reshape(staged.shape.0, staged.shape.1).unwrap()).unwrap();
            assert!((&direct - staged.unique().unwrap()).frobenius_norm() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn stacking_is_generator_major() {
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let b = vector_rep(1, q0(), ex(0.2)).unwrap();
        let eqs = bulk_equations(&a, &b).unwrap();
        let labels: Vec<_> = eqs.iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["Q_0", "Qbar_0", "q^T_0", "Q_1", "Qbar_1", "q^T_1"]);
        let stacked = stack_equations(&eqs).unwrap();
        assert_eq!(stacked.shape(), (6 * 16, 16));
        let second = sylvester_operator(&eqs[1].m_in, &eqs[1].m_out).unwrap();
        for r in 0..16 {
            for cc in 0..16 {
                assert_eq!(stacked.get(16 + r, cc), second.get(r, cc));
            }
        }
    }

    #[test]
    fn scan_paper_grid_n2() {
        let values = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)];
        let grid = eps_grid(2, &values);
        assert_eq!(grid.len(), 64);
        let fixed = ScanFixed {
            n: 2,
            q: q0(),
            x: ex(0.7),
            eps: None,
            rel_tol: 1e-9,
        };
        let res = dimension_scan(ScanKind::Boundary(BoundarySystem::Paper), fixed, grid.clone()).unwrap();
        assert_eq!(res.dims.len(), grid.len());
        for (p, &d) in res.grid.iter().zip(&res.dims) {
            let GridPoint::Eps(e) = p else { unreachable!() };
            let mods: Vec<f64> = e.values().iter().map(|z| z.norm()).collect();
            if mods.iter().all(|&m| m == 1.0) || mods.iter().all(|&m| m == 0.0) {
                assert_eq!(d, 1, "{mods:?}");
            } else {
                assert_eq!(d, 0, "{mods:?}");
            }
        }
    }

    #[test]
    fn scan_engine_grid_n2_only_zero() {
        let values = [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)];
        let fixed = ScanFixed {
            n: 2,
            q: q0(),
            x: ex(0.7),
            eps: None,
            rel_tol: 1e-9,
        };
        let res = dimension_scan(
            ScanKind::Boundary(BoundarySystem::Engine(DualConvention::Crossed)),
            fixed,
            eps_grid(2, &values),
        )
        .unwrap();
        let ones: Vec<usize> = res
            .dims
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 1)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(ones, vec![0]);
    }

    #[test]
    fn scan_bulk_ray_and_order() {
        let fixed = ScanFixed {
            n: 1,
            q: q0(),
            x: ex(0.7),
            eps: None,
            rel_tol: 1e-9,
        };
        let grid: Vec<_> = [0.1, 0.35, 0.9, 1.4]
            .iter()
            .map(|&t| GridPoint::Spectral(ex(t)))
            .collect();
        let res = dimension_scan(ScanKind::Bulk, fixed.clone(), grid.clone()).unwrap();
        assert_eq!(res.dims, vec![1, 1, 1, 1]);
        assert_eq!(res.grid, grid);

        let with_equal = vec![GridPoint::Spectral(ex(0.3)), GridPoint::Spectral(ex(0.7))];
        let res = dimension_scan(ScanKind::Bulk, fixed.clone(), with_equal).unwrap();
        assert_eq!(res.dims, vec![1, 1]);

        assert!(dimension_scan(ScanKind::Bulk, fixed.clone(), vec![]).is_err());
        assert!(dimension_scan(ScanKind::Bulk, fixed, vec![GridPoint::Eps(BoundaryParams::zeros(1))]).is_err());
    }

    #[test]
    fn bulk_solution_matches_kron_structure_for_trivial_n1_block() {
        // On the highest-weight vector e_0 ⊗ e_0 the braiding acts by a
        // scalar: S(e_0⊗e_0) ∝ e_0⊗e_0.
        let a = vector_rep(1, q0(), ex(0.7)).unwrap();
        let b = vector_rep(1, q0(), ex(0.23)).unwrap();
        let s = solve_bulk(&a, &b, 1e-9).unwrap();
        let e00 = kron(
            &M::column(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            &M::column(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        );
        let img = s.unique().unwrap() * &e00;
        let cmp = projective_compare(&img, &e00, 1e-12).unwrap();
        assert!(cmp.equal);
    }
}
