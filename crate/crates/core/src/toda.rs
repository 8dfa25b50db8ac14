//! Vector-soliton reflection matrices for `A_n^(1)` from the explicit
//! component equations, their closed-form solution, and the gauge bridge to
//! the intertwiner engine.
//!
//! Unknowns are the entries `K^a_b` in row-major order (column `a·N + b`).
//! For each node `i` (indices mod `N = n + 1`) the equations are
//!
//! ```text
//! (1) ε̂_i (q⁻¹ − q) K^i_i + x K^i_{i+1} − x⁻¹ K^{i+1}_i = 0
//! (2) K^{i+1}_{i+1} − K^i_i = 0
//! (3) ε̂_i q K^i_j + x⁻¹ K^{i+1}_j = 0        j ∉ {i, i+1}
//! (4) ε̂_i q⁻¹ K^j_i + x K^j_{i+1} = 0        j ∉ {i, i+1}
//! ```
//!
//! Rows are emitted family by family, node-major inside each family and
//! `j` ascending inside families 3 and 4.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::intertwiner::{IntertwinerSolution, ProblemKind, SolutionMeta};
use crate::linalg::{normalize_solution, nullspace, projective_compare, ComplexMatrix};
use crate::reps::{BoundaryParams, DualConvention};
use crate::scalar::{cabs, cone, is_finite, Real};

#[derive(Clone, Debug)]
pub struct PaperBoundarySystem<T: Real> {
    pub n: usize,
    pub q: Complex<T>,
    pub x: Complex<T>,
    pub eps: BoundaryParams<T>,
    /// `(n+1)(2N − 2) × N²`.
    pub rows: ComplexMatrix<T>,
}

fn check_nonzero<T: Real>(name: &str, z: Complex<T>) -> Result<()> {
    if !is_finite(z) || cabs(z) == T::zero() {
        return Err(Error::InvalidParameter(format!("{name} must be finite and nonzero")));
    }
    Ok(())
}

pub fn paper_boundary_system<T: Real>(
    n: usize,
    q: Complex<T>,
    x: Complex<T>,
    eps: &BoundaryParams<T>,
) -> Result<PaperBoundarySystem<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("rank n must be at least 1".into()));
    }
    check_nonzero("q", q)?;
    check_nonzero("x", x)?;
    eps.check_rank(n)?;
    let size = n + 1;
    let unknowns = size * size;
    let col = |a: usize, b: usize| (a % size) * size + (b % size);
    let row_count = size * (2 * size - 2);
    let mut rows = ComplexMatrix::zeros(row_count, unknowns);
    let (qi, xi) = (q.inv(), x.inv());
    let mut r = 0;

    for i in 0..size {
        rows.add_at(r, col(i, i), eps.get(i) * (qi - q));
        rows.add_at(r, col(i, i + 1), x);
        rows.add_at(r, col(i + 1, i), -xi);
        r += 1;
    }
    for i in 0..size {
        rows.add_at(r, col(i + 1, i + 1), cone());
        rows.add_at(r, col(i, i), -cone::<T>());
        r += 1;
    }
    let others = |i: usize| (0..size).filter(move |&j| j != i && j != (i + 1) % size);
    for i in 0..size {
        for j in others(i) {
            rows.add_at(r, col(i, j), eps.get(i) * q);
            rows.add_at(r, col(i + 1, j), xi);
            r += 1;
        }
    }
    for i in 0..size {
        for j in others(i) {
            rows.add_at(r, col(j, i), eps.get(i) * qi);
            rows.add_at(r, col(j, i + 1), x);
            r += 1;
        }
    }
    debug_assert_eq!(r, row_count);
    Ok(PaperBoundarySystem {
        n,
        q,
        x,
        eps: eps.clone(),
        rows,
    })
}

/// Solves the component equations; dimension 0 is a normal outcome.
pub fn solve_paper_k<T: Real>(
    n: usize,
    q: Complex<T>,
    x: Complex<T>,
    eps: &BoundaryParams<T>,
    rel_tol: T,
) -> Result<IntertwinerSolution<T>> {
    let system = paper_boundary_system(n, q, x, eps)?;
    let size = n + 1;
    let ns = nullspace(&system.rows, rel_tol)?;
    let sigma_max = ns.sigma_max();
    let mut meta = SolutionMeta::new(ProblemKind::PaperBoundary, n, q, x, x);
    meta.eps = Some(eps.clone());
    let mut sol = meta.finish((size, size), ns)?;
    if let Some(k) = &sol.normalized {
        let res = system.rows.try_mul(&k.vectorize())?.frobenius_norm();
        sol.residual = res / (sigma_max * k.frobenius_norm());
    }
    Ok(sol)
}

/// Which square root of `−qx` the closed form uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Branch {
    #[default]
    Principal,
    Negated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormParams<T: Real> {
    eps: BoundaryParams<T>,
    aggregate: Complex<T>,
    k: Complex<T>,
    branch: Branch,
}

impl<T: Real> ClosedFormParams<T> {
    /// Requires `|ε̂_i| = 1` for every entry; the aggregate defaults to
    /// `∏ ε̂_i` and the overall factor to 1.
    pub fn new(eps: BoundaryParams<T>) -> Result<Self> {
        for (i, e) in eps.values().iter().enumerate() {
            if num_traits::Float::abs(cabs(*e) - T::one()) > T::lit(1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "closed form needs |eps_{i}| = 1, got modulus {}",
                    cabs(*e)
                )));
            }
        }
        let aggregate = eps.values().iter().fold(cone(), |acc, &e| acc * e);
        Ok(Self {
            eps,
            aggregate,
            k: cone(),
            branch: Branch::Principal,
        })
    }

    pub fn with_aggregate(mut self, aggregate: Complex<T>) -> Self {
        self.aggregate = aggregate;
        self
    }

    pub fn with_k(mut self, k: Complex<T>) -> Self {
        self.k = k;
        self
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn eps(&self) -> &BoundaryParams<T> {
        &self.eps
    }

    pub fn aggregate(&self) -> Complex<T> {
        self.aggregate
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }
}

/// Closed-form reflection matrix, with `w = ±√(−qx)` and `ε̂` the aggregate:
///
/// ```text
/// K^i_i = k (q⁻¹ w^{n+1} − ε̂ q w^{−(n+1)}) / (q⁻¹ − q)
/// K^i_j = k ε̂_i⋯ε̂_{j−1} w^{2(i−j)+n+1}          j > i
/// K^j_i = k ε̂_i⋯ε̂_{j−1} ε̂ w^{2(j−i)−(n+1)}      j > i
/// ```
pub fn closed_form_k<T: Real>(
    n: usize,
    q: Complex<T>,
    x: Complex<T>,
    params: &ClosedFormParams<T>,
) -> Result<ComplexMatrix<T>> {
    check_nonzero("q", q)?;
    check_nonzero("x", x)?;
    params.eps.check_rank(n)?;
    if cabs(q * q - cone::<T>()) < T::lit(1e-14) {
        return Err(Error::InvalidParameter("q^2 = 1 makes the diagonal singular".into()));
    }
    let mut w = (-(q * x)).sqrt();
    if params.branch == Branch::Negated {
        w = -w;
    }
    let size = n + 1;
    let np1 = size as i32;
    let agg = params.aggregate;
    let k = params.k;
    let qi = q.inv();
    let diag = k * (qi * w.powi(np1) - agg * q * w.powi(-np1)) / (qi - q);
    let mut out = ComplexMatrix::zeros(size, size);
    for i in 0..size {
        out.set(i, i, diag);
        let mut run = cone::<T>();
        for j in i + 1..size {
            run *= params.eps.get(j - 1);
            let d = (j - i) as i32;
            out.set(i, j, k * run * w.powi(-2 * d + np1));
            out.set(j, i, k * run * agg * w.powi(2 * d - np1));
        }
    }
    Ok(out)
}

/// A pair of reflection matrices at one rapidity.
#[derive(Clone, Debug)]
pub struct GaugeSample<T: Real> {
    pub theta: Complex<T>,
    pub k_paper: ComplexMatrix<T>,
    pub k_generic: ComplexMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct GaugeReport<T: Real> {
    pub thetas: Vec<Complex<T>>,
    /// Normalized `k_generic · k_paper⁻¹` per sample.
    pub gauges: Vec<ComplexMatrix<T>>,
    /// Largest projective deviation of any sample's gauge from the first.
    pub deviation: T,
    pub theta_independent: bool,
    /// The common gauge when it is rapidity independent.
    pub gauge: Option<ComplexMatrix<T>>,
}

/// Threshold for calling the gauge rapidity independent.
pub const GAUGE_TOL: f64 = 1e-6;

/// Computes `C(θ) = normalize(k_generic(θ) · k_paper(θ)⁻¹)` at every sample
/// and reports whether it is the same matrix up to scale throughout.
pub fn reconcile_gauge<T: Real>(samples: &[GaugeSample<T>]) -> Result<GaugeReport<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no rapidity samples".into()));
    }
    let gauges = samples
        .iter()
        .map(|s| {
            let inv = s.k_paper.inverse().map_err(|_| Error::Singular("paper K".into()))?;
            if s.k_generic.inverse().is_err() {
                return Err(Error::Singular("generic K".into()));
            }
            normalize_solution(&s.k_generic.try_mul(&inv)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut deviation = T::zero();
    for g in &gauges[1..] {
        deviation = num_traits::Float::max(deviation, projective_compare(g, &gauges[0], T::one())?.deviation);
    }
    let theta_independent = deviation < T::lit(GAUGE_TOL);
    Ok(GaugeReport {
        thetas: samples.iter().map(|s| s.theta).collect(),
        gauge: theta_independent.then(|| gauges[0].clone()),
        gauges,
        deviation,
        theta_independent,
    })
}

/// Outcome of solving both systems along a set of rapidities.
#[derive(Clone, Debug)]
pub enum GaugeOutcome<T: Real> {
    Compared(GaugeReport<T>),
    /// Some sample had no unique solution; dimensions are `(paper, generic)`.
    Missing {
        theta: Complex<T>,
        paper_dim: usize,
        generic_dim: usize,
    },
}

/// Solves the component system and the engine system for the vector
/// representation at `x = e^θ` for every `θ`, then reconciles them.
pub fn reconcile_vector_gauge<T: Real>(
    n: usize,
    q: Complex<T>,
    eps: &BoundaryParams<T>,
    thetas: &[Complex<T>],
    convention: DualConvention,
    rel_tol: T,
) -> Result<GaugeOutcome<T>> {
    let mut samples = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let x = theta.exp();
        let paper = solve_paper_k(n, q, x, eps, rel_tol)?;
        let generic = crate::intertwiner::solve_vector_boundary(n, q, x, eps, convention, rel_tol)?;
        match (&paper.normalized, &generic.normalized) {
            (Some(kp), Some(kg)) => samples.push(GaugeSample {
                theta,
                k_paper: kp.clone(),
                k_generic: kg.clone(),
            }),
            _ => {
                return Ok(GaugeOutcome::Missing {
                    theta,
                    paper_dim: paper.dimension(),
                    generic_dim: generic.dimension(),
                })
            }
        }
    }
    reconcile_gauge(&samples).map(GaugeOutcome::Compared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intertwiner::solve_vector_boundary;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn eps(v: &[f64]) -> BoundaryParams<f64> {
        BoundaryParams::from_real(v).unwrap()
    }

    fn all_signs(len: usize) -> Vec<Vec<f64>> {
        (0..1usize << len)
            .map(|m| (0..len).map(|b| if m >> b & 1 == 1 { -1.0 } else { 1.0 }).collect())
            .collect()
    }

    fn q0() -> Complex<f64> {
        Complex::from_polar(0.8, 0.3)
    }

    fn x0() -> Complex<f64> {
        Complex::from_polar(1.3, 0.45)
    }

    #[test]
    fn n1_rows_transcribed() {
        let (q, x) = (c(2.0, 0.0), c(3.0, 0.0));
        let sys = paper_boundary_system(1, q, x, &eps(&[1.0, 1.0])).unwrap();
        assert_eq!(sys.rows.shape(), (4, 4));
        let row0: Vec<_> = (0..4).map(|j| sys.rows.get(0, j)).collect();
        assert_eq!(
            row0,
            vec![c(0.5 - 2.0, 0.0), c(3.0, 0.0), c(-1.0 / 3.0, 0.0), c(0.0, 0.0)]
        );
        // i = 0 gives K¹₁ − K⁰₀; i = 1 wraps round to K⁰₀ − K¹₁.
        let fam2: Vec<Vec<_>> = [2, 3]
            .iter()
            .map(|&r| (0..4).map(|j| sys.rows.get(r, j)).collect())
            .collect();
        assert_eq!(fam2[0], vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(fam2[1], fam2[0].iter().map(|z| -z).collect::<Vec<_>>());
    }

    #[test]
    fn row_counts() {
        for n in 1..=5 {
            let size = n + 1;
            let sys = paper_boundary_system(n, q0(), x0(), &BoundaryParams::zeros(n)).unwrap();
            assert_eq!(sys.rows.shape(), (size * (2 * size - 2), size * size));
        }
        let sys = paper_boundary_system(2, q0(), x0(), &BoundaryParams::zeros(2)).unwrap();
        assert_eq!(sys.rows.rows(), 12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(paper_boundary_system(1, c(0.0, 0.0), x0(), &BoundaryParams::zeros(1)).is_err());
        assert!(paper_boundary_system(1, q0(), x0(), &BoundaryParams::zeros(2)).is_err());
    }

    #[test]
    fn n1_analytic_anchors() {
        let (q, x) = (c(2.0, 0.0), c(3.0, 0.0));
        let k = solve_paper_k(1, q, x, &eps(&[1.0, 1.0]), 1e-9).unwrap();
        let expected = M::from_real_rows(&[&[1.0, 0.5625], &[0.5625, 1.0]]).unwrap();
        assert!((k.unique().unwrap() - &expected).frobenius_norm() < 1e-12);
        let k = solve_paper_k(1, q, x, &eps(&[1.0, -1.0]), 1e-9).unwrap();
        let expected = M::from_real_rows(&[&[1.0, 0.45], &[-0.45, 1.0]]).unwrap();
        assert!((k.unique().unwrap() - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn closed_form_n1_arithmetic() {
        let (q, x) = (c(2.0, 0.0), c(3.0, 0.0));
        let k = closed_form_k(1, q, x, &ClosedFormParams::new(eps(&[1.0, 1.0])).unwrap()).unwrap();
        assert!((k.get(0, 0) - c(16.0 / 9.0, 0.0)).norm() < 1e-12);
        assert!((k.get(0, 1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((k.get(0, 1) / k.get(0, 0) - c(0.5625, 0.0)).norm() < 1e-12);

        let k = closed_form_k(1, q, x, &ClosedFormParams::new(eps(&[1.0, -1.0])).unwrap()).unwrap();
        assert!((k.get(0, 1) / k.get(0, 0) - c(0.45, 0.0)).norm() < 1e-12);
        assert!((k.get(1, 0) + k.get(0, 1)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_nullspace_n2_to_n4() {
        for n in 2..=4 {
            for signs in all_signs(n + 1) {
                let e = eps(&signs);
                let sol = solve_paper_k(n, q0(), x0(), &e, 1e-9).unwrap();
                assert_eq!(sol.dimension(), 1, "n={n} eps={signs:?}");
                assert!(sol.residual < 1e-10);
                let cf = closed_form_k(n, q0(), x0(), &ClosedFormParams::new(e).unwrap()).unwrap();
                let cmp = projective_compare(&cf, sol.unique().unwrap(), 1e-8).unwrap();
                assert!(cmp.equal, "n={n} eps={signs:?} dev={}", cmp.deviation);
            }
        }
    }

    #[test]
    fn wrong_aggregate_breaks_the_match() {
        let e = eps(&[1.0, -1.0, 1.0]);
        let sol = solve_paper_k(2, q0(), x0(), &e, 1e-9).unwrap();
        let cf = closed_form_k(
            2,
            q0(),
            x0(),
            &ClosedFormParams::new(e).unwrap().with_aggregate(c(1.0, 0.0)),
        )
        .unwrap();
        assert!(!projective_compare(&cf, sol.unique().unwrap(), 1e-8).unwrap().equal);
    }

    #[test]
    fn zero_eps_gives_identity() {
        for n in 1..=4 {
            let sol = solve_paper_k(n, q0(), x0(), &BoundaryParams::zeros(n), 1e-9).unwrap();
            let k = sol.unique().unwrap();
            assert!((k - &M::identity(n + 1)).frobenius_norm() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn modulus_two_entry_has_no_solution() {
        for n in 2..=4 {
            let mut v = vec![1.0; n + 1];
            v[0] = 2.0;
            assert_eq!(solve_paper_k(n, q0(), x0(), &eps(&v), 1e-9).unwrap().dimension(), 0);
        }
    }

    #[test]
    fn n1_any_eps_unique() {
        for e in [[0.3, 2.0], [-1.7, 0.0], [5.0, -0.2]] {
            let sol = solve_paper_k(1, q0(), x0(), &eps(&e), 1e-9).unwrap();
            assert_eq!(sol.dimension(), 1);
        }
        let complex = BoundaryParams::new(vec![c(0.2, 1.1), c(-0.5, 0.3)]).unwrap();
        assert_eq!(solve_paper_k(1, q0(), x0(), &complex, 1e-9).unwrap().dimension(), 1);
    }

    #[test]
    fn branch_flip_is_projective() {
        for n in 1..=4 {
            let e = eps(&vec![1.0; n + 1]);
            let p = ClosedFormParams::new(e).unwrap();
            let a = closed_form_k(n, q0(), x0(), &p).unwrap();
            let b = closed_form_k(n, q0(), x0(), &p.clone().with_branch(Branch::Negated)).unwrap();
            assert!(projective_compare(&a, &b, 1e-12).unwrap().equal, "n={n}");
        }
    }

    #[test]
    fn closed_form_rejects_non_unit_eps() {
        assert!(ClosedFormParams::new(eps(&[1.0, 2.0])).is_err());
        assert!(ClosedFormParams::new(eps(&[0.0, 1.0])).is_err());
        let phase = BoundaryParams::new(vec![Complex::from_polar(1.0, 0.7), c(1.0, 0.0)]).unwrap();
        assert!(ClosedFormParams::new(phase).is_ok());
    }

    #[test]
    fn gauge_trivial_cases() {
        let k = closed_form_k(2, q0(), x0(), &ClosedFormParams::new(eps(&[1.0, 1.0, -1.0])).unwrap()).unwrap();
        let k2 = closed_form_k(
            2,
            q0(),
            x0() * 1.7,
            &ClosedFormParams::new(eps(&[1.0, 1.0, -1.0])).unwrap(),
        )
        .unwrap();
        let same = reconcile_gauge(&[
            GaugeSample {
                theta: c(0.1, 0.0),
                k_paper: k.clone(),
                k_generic: k.clone(),
            },
            GaugeSample {
                theta: c(0.6, 0.0),
                k_paper: k2.clone(),
                k_generic: k2.clone(),
            },
        ])
        .unwrap();
        assert!(same.theta_independent);
        assert!((&same.gauge.unwrap() - &M::identity(3)).frobenius_norm() < 1e-12);

        let g = M::diagonal(&[c(2.0, 0.0), c(1.0, 1.0), c(-0.5, 0.0)]);
        let rep = reconcile_gauge(&[
            GaugeSample {
                theta: c(0.1, 0.0),
                k_paper: k.clone(),
                k_generic: &g * &k,
            },
            GaugeSample {
                theta: c(0.6, 0.0),
                k_paper: k2.clone(),
                k_generic: &g * &k2,
            },
        ])
        .unwrap();
        assert!(rep.theta_independent);
        assert!(
            projective_compare(rep.gauge.as_ref().unwrap(), &g, 1e-12)
                .unwrap()
                .equal
        );

        let singular = M::zeros(3, 3);
        assert!(reconcile_gauge(&[GaugeSample {
            theta: c(0.0, 0.0),
            k_paper: singular,
            k_generic: k
        }])
        .is_err());
    }

    #[test]
    fn gauge_between_systems_is_identity_where_both_exist() {
        let thetas = [c(0.7, 0.0), c(0.23, 0.0), c(-0.41, 0.0)];
        for (n, e) in [(1, vec![1.0, 1.0]), (1, vec![1.0, -1.0]), (2, vec![0.0, 0.0, 0.0])] {
            let out = reconcile_vector_gauge(n, q0(), &eps(&e), &thetas, DualConvention::Crossed, 1e-9).unwrap();
            let GaugeOutcome::Compared(rep) = out else {
                panic!("missing solution at n={n}")
            };
            assert!(rep.theta_independent, "n={n} dev={}", rep.deviation);
            assert!((&rep.gauge.unwrap() - &M::identity(n + 1)).frobenius_norm() < 1e-9);
        }
    }

    #[test]
    fn gauge_n2_unit_eps_has_no_engine_counterpart() {
        let thetas = [c(0.7, 0.0), c(0.23, 0.0), c(-0.41, 0.0)];
        let out =
            reconcile_vector_gauge(2, q0(), &eps(&[1.0, 1.0, 1.0]), &thetas, DualConvention::Crossed, 1e-9).unwrap();
        match out {
            GaugeOutcome::Missing {
                paper_dim, generic_dim, ..
            } => {
                assert_eq!(paper_dim, 1);
                assert_eq!(generic_dim, 0);
            }
            GaugeOutcome::Compared(_) => panic!("engine unexpectedly solved"),
        }
        let sol = solve_vector_boundary(
            2,
            q0(),
            c(2.0, 0.0),
            &eps(&[1.0, 1.0, 1.0]),
            DualConvention::Crossed,
            1e-9,
        )
        .unwrap();
        assert_eq!(sol.dimension(), 0);
    }
}
