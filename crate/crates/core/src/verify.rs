//! Consistency checks on solved intertwiners: Yang–Baxter, reflection
//! equation, coideal property, and the evaluated reflection algebra.
//!
//! Every map carries the spaces it goes between as [`RepTag`]s so that
//! compositions are type checked before any multiplication. All
//! comparisons are projective.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::intertwiner::{solve_boundary, solve_bulk, IntertwinerSolution};
use crate::linalg::{embed_on_legs, flip_operator, kron, projective_compare, ComplexMatrix};
use crate::report::{fmt_complex, fmt_complex_list, VerificationReport};
use crate::reps::{
    coideal_generators, conjugate_rep, coproduct_matrix, vector_rep, BoundaryParams, DualConvention, EvaluationRep,
    Generator,
};
use crate::scalar::{cabs, Real};

/// Identifies a representation space: dimension, spectral parameter and
/// whether it is a dual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepTag<T: Real> {
    pub dim: usize,
    pub x: Complex<T>,
    pub dual: bool,
}

impl<T: Real> RepTag<T> {
    pub fn of(rep: &EvaluationRep<T>) -> Self {
        Self {
            dim: rep.dim(),
            x: rep.x(),
            dual: rep.is_dual(),
        }
    }

    fn matches(&self, other: &Self) -> bool {
        let scale = num_traits::Float::max(cabs(self.x), T::one());
        self.dim == other.dim && self.dual == other.dual && cabs(self.x - other.x) <= T::lit(1e-12) * scale
    }
}

fn expect_tag<T: Real>(what: &str, got: &RepTag<T>, want: &RepTag<T>) -> Result<()> {
    if got.matches(want) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{what}: space (dim {}, x {}, dual {}) does not match (dim {}, x {}, dual {})",
            got.dim,
            fmt_complex(got.x),
            got.dual,
            want.dim,
            fmt_complex(want.x),
            want.dual
        )))
    }
}

/// `S : V_left ⊗ V_right → V_right ⊗ V_left`.
#[derive(Clone, Debug)]
pub struct Braiding<T: Real> {
    pub matrix: ComplexMatrix<T>,
    pub left: RepTag<T>,
    pub right: RepTag<T>,
}

impl<T: Real> Braiding<T> {
    pub fn new(matrix: ComplexMatrix<T>, left: RepTag<T>, right: RepTag<T>) -> Result<Self> {
        let d = left.dim * right.dim;
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "braiding of shape {:?} between spaces of dimension {} and {}",
                matrix.shape(),
                left.dim,
                right.dim
            )));
        }
        Ok(Self { matrix, left, right })
    }

    /// Solves for the braiding and requires a unique solution.
    pub fn solve(a: &EvaluationRep<T>, b: &EvaluationRep<T>, rel_tol: T) -> Result<Self> {
        let sol = solve_bulk(a, b, rel_tol)?;
        Self::new(sol.unique()?.clone(), RepTag::of(a), RepTag::of(b))
    }

    /// Plain form `P̌ S` on `V_left ⊗ V_right`.
    pub fn plain(&self) -> ComplexMatrix<T> {
        &flip_operator(self.right.dim, self.left.dim) * &self.matrix
    }

    /// `P̌ (P̌ S) P̌` on `V_right ⊗ V_left`: the opposite-ordered plain form.
    pub fn plain_op(&self) -> ComplexMatrix<T> {
        let to_lr = flip_operator(self.right.dim, self.left.dim);
        let to_rl = flip_operator(self.left.dim, self.right.dim);
        &(&to_lr * &self.plain()) * &to_rl
    }
}

/// `K : V_from → V_to`.
#[derive(Clone, Debug)]
pub struct Reflection<T: Real> {
    pub matrix: ComplexMatrix<T>,
    pub from: RepTag<T>,
    pub to: RepTag<T>,
}

impl<T: Real> Reflection<T> {
    pub fn new(matrix: ComplexMatrix<T>, from: RepTag<T>, to: RepTag<T>) -> Result<Self> {
        if matrix.shape() != (to.dim, from.dim) {
            return Err(Error::DimensionMismatch("reflection matrix shape".into()));
        }
        Ok(Self { matrix, from, to })
    }

    pub fn solve(rep: &EvaluationRep<T>, dual: &EvaluationRep<T>, eps: &BoundaryParams<T>, rel_tol: T) -> Result<Self> {
        let sol = solve_boundary(rep, dual, eps, rel_tol)?;
        Self::new(sol.unique()?.clone(), RepTag::of(rep), RepTag::of(dual))
    }
}

fn compare<T: Real>(
    name: &str,
    lhs: &ComplexMatrix<T>,
    rhs: &ComplexMatrix<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    let cmp = projective_compare(lhs, rhs, tol)?;
    Ok(VerificationReport::new(name, cmp.deviation, cmp.lambda, tol))
}

/// `(1⊗S_ab)(S_ac⊗1)(1⊗S_bc)` against `(S_bc⊗1)(1⊗S_ac)(S_ab⊗1)` on
/// `V_a ⊗ V_b ⊗ V_c`.
pub fn check_ybe<T: Real>(
    s_ab: &Braiding<T>,
    s_ac: &Braiding<T>,
    s_bc: &Braiding<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    expect_tag("S_ac left leg", &s_ac.left, &s_ab.left)?;
    expect_tag("S_bc left leg", &s_bc.left, &s_ab.right)?;
    expect_tag("S_bc right leg", &s_bc.right, &s_ac.right)?;
    let (da, db, dc) = (s_ab.left.dim, s_ab.right.dim, s_ac.right.dim);
    let id = ComplexMatrix::identity;

    let lhs = &(&kron(&id(dc), &s_ab.matrix) * &kron(&s_ac.matrix, &id(db))) * &kron(&id(da), &s_bc.matrix);
    let rhs = &(&kron(&s_bc.matrix, &id(da)) * &kron(&id(db), &s_ac.matrix)) * &kron(&s_ab.matrix, &id(dc));
    Ok(
        compare("ybe", &lhs, &rhs, tol)?
            .with_context("x", fmt_complex_list(&[s_ab.left.x, s_ab.right.x, s_ac.right.x])),
    )
}

/// Reflection equation as two paths `V^μ ⊗ V^ν → V^μ̄ ⊗ V^ν̄`:
///
/// ```text
/// right: S_{ν̄μ̄} ∘ (1 ⊗ K_μ) ∘ S_{μν̄} ∘ (1 ⊗ K_ν)
/// left:  (1 ⊗ K_ν) ∘ S_{νμ̄} ∘ (1 ⊗ K_μ) ∘ S_{μν}
/// ```
pub fn check_reflection_equation<T: Real>(
    k_mu: &Reflection<T>,
    k_nu: &Reflection<T>,
    s_mu_nu: &Braiding<T>,
    s_mu_nubar: &Braiding<T>,
    s_nu_mubar: &Braiding<T>,
    s_nubar_mubar: &Braiding<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    let (mu, nu, mubar, nubar) = (k_mu.from, k_nu.from, k_mu.to, k_nu.to);
    expect_tag("S_{mu nu} legs", &s_mu_nu.left, &mu)?;
    expect_tag("S_{mu nu} legs", &s_mu_nu.right, &nu)?;
    expect_tag("S_{mu nubar} legs", &s_mu_nubar.left, &mu)?;
    expect_tag("S_{mu nubar} legs", &s_mu_nubar.right, &nubar)?;
    expect_tag("S_{nu mubar} legs", &s_nu_mubar.left, &nu)?;
    expect_tag("S_{nu mubar} legs", &s_nu_mubar.right, &mubar)?;
    expect_tag("S_{nubar mubar} legs", &s_nubar_mubar.left, &nubar)?;
    expect_tag("S_{nubar mubar} legs", &s_nubar_mubar.right, &mubar)?;
    let id = ComplexMatrix::identity;

    let right = &(&(&s_nubar_mubar.matrix * &kron(&id(nubar.dim), &k_mu.matrix)) * &s_mu_nubar.matrix)
        * &kron(&id(mu.dim), &k_nu.matrix);
    let left = &(&(&kron(&id(mubar.dim), &k_nu.matrix) * &s_nu_mubar.matrix) * &kron(&id(nu.dim), &k_mu.matrix))
        * &s_mu_nu.matrix;
    Ok(compare("reflection", &right, &left, tol)?.with_context("x", fmt_complex_list(&[mu.x, nu.x])))
}

/// Checks `Δ(Q̂_i) = (Q_i + Q̄_i) ⊗ 1 + q^{T_i} ⊗ Q̂_i` on `V_A ⊗ V_B`, the
/// left side assembled from the coproduct by linearity.
pub fn check_coideal_property<T: Real>(
    rep_a: &EvaluationRep<T>,
    rep_b: &EvaluationRep<T>,
    eps: &BoundaryParams<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    let gens_b = coideal_generators(rep_b, eps)?;
    let id_b = ComplexMatrix::identity(rep_b.dim());
    let mut worst = T::zero();
    for i in 0..=rep_a.n() {
        let lhs = &(&coproduct_matrix(rep_a, rep_b, Generator::Q(i))?
            + &coproduct_matrix(rep_a, rep_b, Generator::QBar(i))?)
            + &coproduct_matrix(rep_a, rep_b, Generator::QPow(i))?.scale(eps.get(i));
        let rhs = &kron(&(rep_a.q_gen(i) + rep_a.qbar(i)), &id_b) + &kron(rep_a.d(i), &gens_b.qhat[i]);
        let scale = num_traits::Float::max(
            num_traits::Float::max(lhs.frobenius_norm(), rhs.frobenius_norm()),
            T::one(),
        );
        worst = num_traits::Float::max(worst, (&lhs - &rhs).frobenius_norm() / scale);
    }
    Ok(VerificationReport::residual("coideal", worst, tol)
        .with_context("n", rep_a.n())
        .with_context("eps", fmt_complex_list(eps.values())))
}

/// `B = R_op_out ∘ (K ⊗ 1_λ) ∘ R_in : V^μ ⊗ V^λ → V^μ̄ ⊗ V^λ`.
pub fn eval_b_matrix<T: Real>(
    k_mu: &ComplexMatrix<T>,
    r_in: &ComplexMatrix<T>,
    r_op_out: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let (n_out, n_in) = k_mu.shape();
    if n_in == 0 || !r_in.rows().is_multiple_of(n_in) || !r_in.is_square() {
        return Err(Error::DimensionMismatch("R_in does not act on V^mu ⊗ V^lambda".into()));
    }
    let d_lambda = r_in.rows() / n_in;
    if r_op_out.shape() != (n_out * d_lambda, n_out * d_lambda) {
        return Err(Error::DimensionMismatch(
            "R_op_out does not act on V^mubar ⊗ V^lambda".into(),
        ));
    }
    let middle = kron(k_mu, &ComplexMatrix::identity(d_lambda));
    r_op_out.try_mul(&middle)?.try_mul(r_in)
}

/// B-matrix from typed pieces: `R_in = P̌ S(μ, λ)` and
/// `R_op_out = P̌ (P̌ S(λ, μ̄)) P̌`.
pub fn b_matrix<T: Real>(
    k_mu: &Reflection<T>,
    s_mu_lambda: &Braiding<T>,
    s_lambda_mubar: &Braiding<T>,
) -> Result<ComplexMatrix<T>> {
    expect_tag("S(mu, lambda) left leg", &s_mu_lambda.left, &k_mu.from)?;
    expect_tag("S(lambda, mubar) right leg", &s_lambda_mubar.right, &k_mu.to)?;
    expect_tag("companion leg", &s_lambda_mubar.left, &s_mu_lambda.right)?;
    eval_b_matrix(&k_mu.matrix, &s_mu_lambda.plain(), &s_lambda_mubar.plain_op())
}

/// Splits `B` on `V^μ ⊗ V^λ` into blocks `M_{αβ} ∈ Hom(V^λ)` indexed by
/// the `μ` leg, `M_{αβ}[a, b] = B[(α, a), (β, b)]`.
fn blocks<T: Real>(b: &ComplexMatrix<T>, d_mu: usize) -> Result<Vec<ComplexMatrix<T>>> {
    if d_mu == 0 || !b.is_square() || !b.rows().is_multiple_of(d_mu) {
        return Err(Error::DimensionMismatch(
            "B is not block square over the first leg".into(),
        ));
    }
    let dl = b.rows() / d_mu;
    Ok((0..d_mu)
        .flat_map(|alpha| (0..d_mu).map(move |beta| (alpha, beta)))
        .map(|(alpha, beta)| ComplexMatrix::from_fn(dl, dl, |a, bb| b.get(alpha * dl + a, beta * dl + bb)))
        .collect())
}

/// Checks `K_ν M_{αβ} = c · M̄_{αβ} K_ν` for every block with one common
/// `c`, where `M` are the blocks of `B` with companion `ν` and `M̄` those
/// with companion `ν̄`. The reported `lambda` is `1/c`.
pub fn check_b_commutation<T: Real>(
    b_with_nu: &ComplexMatrix<T>,
    b_with_nubar: &ComplexMatrix<T>,
    k_nu: &ComplexMatrix<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    if b_with_nu.shape() != b_with_nubar.shape() {
        return Err(Error::DimensionMismatch("B matrices differ in shape".into()));
    }
    let (d_out, d_in) = k_nu.shape();
    if d_out != d_in || !b_with_nu.rows().is_multiple_of(d_in) {
        return Err(Error::DimensionMismatch("K_nu does not match the companion leg".into()));
    }
    let d_mu = b_with_nu.rows() / d_in;
    let m = blocks(b_with_nu, d_mu)?;
    let mbar = blocks(b_with_nubar, d_mu)?;
    let lhs = m.iter().map(|blk| k_nu.try_mul(blk)).collect::<Result<Vec<_>>>()?;
    let rhs = mbar.iter().map(|blk| blk.try_mul(k_nu)).collect::<Result<Vec<_>>>()?;
    compare(
        "b-commutation",
        &ComplexMatrix::vstack(&lhs)?,
        &ComplexMatrix::vstack(&rhs)?,
        tol,
    )
}

/// Plain and flipped `R`-matrices on legs (1,2) for the quadratic relation.
#[derive(Clone, Debug)]
pub struct RSet<T: Real> {
    /// `R^{μν}` on `V^μ ⊗ V^ν`.
    pub r_mu_nu: ComplexMatrix<T>,
    /// `R^{μν̄}` on `V^μ ⊗ V^ν̄`.
    pub r_mu_nubar: ComplexMatrix<T>,
    /// `P̌ R^{ν̄μ̄} P̌` on `V^μ̄ ⊗ V^ν̄`.
    pub prp_nubar_mubar: ComplexMatrix<T>,
    /// `P̌ R^{νμ̄} P̌` on `V^μ̄ ⊗ V^ν`.
    pub prp_nu_mubar: ComplexMatrix<T>,
}

/// Sklyanin relation on `V^μ ⊗ V^ν ⊗ V^λ → V^μ̄ ⊗ V^ν̄ ⊗ V^λ`:
///
/// ```text
/// [P̌R^{ν̄μ̄}P̌]₁₂ B1₁₃ [R^{μν̄}]₁₂ B2₂₃ = B2₂₃ [P̌R^{νμ̄}P̌]₁₂ B1₁₃ [R^{μν}]₁₂
/// ```
///
/// `B1` acts on legs 1 and 3, `B2` on legs 2 and 3. All three legs must
/// have the same dimension.
pub fn check_sklyanin<T: Real>(
    b1: &ComplexMatrix<T>,
    b2: &ComplexMatrix<T>,
    r: &RSet<T>,
    tol: T,
) -> Result<VerificationReport<T>> {
    let d2 = r.r_mu_nu.rows();
    let d = (1..=d2)
        .find(|k| k * k == d2)
        .ok_or_else(|| Error::DimensionMismatch("R-matrices must act on two legs of equal dimension".into()))?;
    for m in [&r.r_mu_nu, &r.r_mu_nubar, &r.prp_nubar_mubar, &r.prp_nu_mubar, b1, b2] {
        if m.shape() != (d2, d2) {
            return Err(Error::DimensionMismatch(
                "Sklyanin inputs must all be square on two legs".into(),
            ));
        }
    }
    let dims = [d, d, d];
    let id = ComplexMatrix::identity(d);
    let on12 = |m: &ComplexMatrix<T>| kron(m, &id);
    let b1_13 = embed_on_legs(b1, &[0, 2], &dims)?;
    let b2_23 = kron(&id, b2);

    let lhs = &(&(&on12(&r.prp_nubar_mubar) * &b1_13) * &on12(&r.r_mu_nubar)) * &b2_23;
    let rhs = &(&(&b2_23 * &on12(&r.prp_nu_mubar)) * &b1_13) * &on12(&r.r_mu_nu);
    compare("sklyanin", &lhs, &rhs, tol)
}

/// Every intertwiner needed by the checks at one parameter point: particles
/// `μ`, `ν` and a companion `λ`, all vector representations, reflected
/// under one [`DualConvention`].
#[derive(Clone, Debug)]
pub struct CheckPoint<T: Real> {
    pub n: usize,
    pub q: Complex<T>,
    pub thetas: [Complex<T>; 3],
    pub eps: BoundaryParams<T>,
    pub convention: DualConvention,
    pub mu: EvaluationRep<T>,
    pub nu: EvaluationRep<T>,
    pub lambda: EvaluationRep<T>,
    pub mubar: EvaluationRep<T>,
    pub nubar: EvaluationRep<T>,
}

impl<T: Real> CheckPoint<T> {
    pub fn new(
        n: usize,
        q: Complex<T>,
        thetas: [Complex<T>; 3],
        eps: BoundaryParams<T>,
        convention: DualConvention,
    ) -> Result<Self> {
        eps.check_rank(n)?;
        let mu = vector_rep(n, q, thetas[0].exp())?;
        let nu = vector_rep(n, q, thetas[1].exp())?;
        let lambda = vector_rep(n, q, thetas[2].exp())?;
        let mubar = conjugate_rep(&mu, convention)?;
        let nubar = conjugate_rep(&nu, convention)?;
        Ok(Self {
            n,
            q,
            thetas,
            eps,
            convention,
            mu,
            nu,
            lambda,
            mubar,
            nubar,
        })
    }

    fn annotate(&self, report: VerificationReport<T>) -> VerificationReport<T> {
        report
            .with_context("n", self.n)
            .with_context("q", fmt_complex(self.q))
            .with_context("rapidities", fmt_complex_list(&self.thetas))
            .with_context("eps", fmt_complex_list(self.eps.values()))
            .with_context("convention", self.convention.label())
    }

    fn s(&self, a: &EvaluationRep<T>, b: &EvaluationRep<T>, rel_tol: T) -> Result<Braiding<T>> {
        Braiding::solve(a, b, rel_tol)
    }

    pub fn k_mu(&self, rel_tol: T) -> Result<Reflection<T>> {
        Reflection::solve(&self.mu, &self.mubar, &self.eps, rel_tol)
    }

    pub fn k_nu(&self, rel_tol: T) -> Result<Reflection<T>> {
        Reflection::solve(&self.nu, &self.nubar, &self.eps, rel_tol)
    }

    /// Boundary solution for `μ`, whatever its dimension.
    pub fn boundary_solution(&self, rel_tol: T) -> Result<IntertwinerSolution<T>> {
        solve_boundary(&self.mu, &self.mubar, &self.eps, rel_tol)
    }

    pub fn ybe(&self, rel_tol: T, tol: T) -> Result<VerificationReport<T>> {
        let (a, b, c) = (&self.mu, &self.nu, &self.lambda);
        let report = check_ybe(
            &self.s(a, b, rel_tol)?,
            &self.s(a, c, rel_tol)?,
            &self.s(b, c, rel_tol)?,
            tol,
        )?;
        Ok(self.annotate(report))
    }

    pub fn reflection(&self, rel_tol: T, tol: T) -> Result<VerificationReport<T>> {
        let report = check_reflection_equation(
            &self.k_mu(rel_tol)?,
            &self.k_nu(rel_tol)?,
            &self.s(&self.mu, &self.nu, rel_tol)?,
            &self.s(&self.mu, &self.nubar, rel_tol)?,
            &self.s(&self.nu, &self.mubar, rel_tol)?,
            &self.s(&self.nubar, &self.mubar, rel_tol)?,
            tol,
        )?;
        Ok(self.annotate(report))
    }

    pub fn coideal(&self, tol: T) -> Result<VerificationReport<T>> {
        Ok(self.annotate(check_coideal_property(&self.mu, &self.nu, &self.eps, tol)?))
    }

    /// `B` for particle `μ` with the given companion.
    pub fn b_matrix_with(&self, companion: &EvaluationRep<T>, rel_tol: T) -> Result<ComplexMatrix<T>> {
        b_matrix(
            &self.k_mu(rel_tol)?,
            &self.s(&self.mu, companion, rel_tol)?,
            &self.s(companion, &self.mubar, rel_tol)?,
        )
    }

    pub fn b_commutation(&self, rel_tol: T, tol: T) -> Result<VerificationReport<T>> {
        let b_nu = self.b_matrix_with(&self.nu, rel_tol)?;
        let b_nubar = self.b_matrix_with(&self.nubar, rel_tol)?;
        let report = check_b_commutation(&b_nu, &b_nubar, &self.k_nu(rel_tol)?.matrix, tol)?;
        Ok(self.annotate(report))
    }

    pub fn sklyanin(&self, rel_tol: T, tol: T) -> Result<VerificationReport<T>> {
        let k_nu = self.k_nu(rel_tol)?;
        let b1 = self.b_matrix_with(&self.lambda, rel_tol)?;
        let b2 = b_matrix(
            &k_nu,
            &self.s(&self.nu, &self.lambda, rel_tol)?,
            &self.s(&self.lambda, &self.nubar, rel_tol)?,
        )?;
        let r = RSet {
            r_mu_nu: self.s(&self.mu, &self.nu, rel_tol)?.plain(),
            r_mu_nubar: self.s(&self.mu, &self.nubar, rel_tol)?.plain(),
            prp_nubar_mubar: self.s(&self.nubar, &self.mubar, rel_tol)?.plain_op(),
            prp_nu_mubar: self.s(&self.nu, &self.mubar, rel_tol)?.plain_op(),
        };
        Ok(self.annotate(check_sklyanin(&b1, &b2, &r, tol)?))
    }
}
