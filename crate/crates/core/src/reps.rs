//! Affine `A_n^(1)` data and its vector evaluation representation.
//!
//! Generators are `Q_i`, `Q̄_i` and the group-like `q^{T_i}` for the affine
//! nodes `i = 0..n`; node arithmetic is modulo `N = n + 1` throughout, so
//! node `n` is adjacent to node `0`. `T_i` itself is never represented.
//!
//! The coproduct is
//!
//! ```text
//! Δ(Q_i)     = Q_i ⊗ 1 + q^{T_i} ⊗ Q_i
//! Δ(Q̄_i)     = Q̄_i ⊗ 1 + q^{T_i} ⊗ Q̄_i
//! Δ(q^{T_i}) = q^{T_i} ⊗ q^{T_i}
//! ```
//!
//! which forces the antipode `S(Q_i) = −q^{−T_i} Q_i`, `S(Q̄_i) = −q^{−T_i} Q̄_i`,
//! `S(q^{T_i}) = q^{−T_i}`.

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::report::{fmt_complex, VerificationReport};
use crate::scalar::{cabs, cone, czero, is_finite, Real};

/// `α_i · α_j` for the simple roots of `A_n^(1)`.
pub fn cartan_inner(n: usize, i: usize, j: usize) -> Result<i32> {
    if n == 0 {
        return Err(Error::InvalidParameter("rank n must be at least 1".into()));
    }
    for idx in [i, j] {
        if idx > n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    let size = n + 1;
    Ok(if i == j {
        2
    } else if n == 1 {
        -2
    } else if (i + 1) % size == j || (j + 1) % size == i {
        -1
    } else {
        0
    })
}

/// Table of `α_i · α_j`, `i, j = 0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanData {
    pub n: usize,
    pub inner: Vec<Vec<i32>>,
}

impl CartanData {
    pub fn new(n: usize) -> Result<Self> {
        let inner = (0..=n)
            .map(|i| (0..=n).map(|j| cartan_inner(n, i, j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, inner })
    }
}

/// `q = exp(2πi (1 − ħ) / ħ)`.
pub fn q_from_hbar<T: Real>(hbar: T) -> Result<Complex<T>> {
    if hbar == T::zero() || !num_traits::Float::is_finite(hbar) {
        return Err(Error::InvalidParameter("hbar must be finite and nonzero".into()));
    }
    let tau = T::lit(std::f64::consts::TAU);
    let phase = tau * (T::one() - hbar) / hbar;
    Ok(Complex::from_polar(T::one(), phase))
}

/// Returns the order `k ≤ max_order` if `q^k = 1` to within `1e-9`.
pub fn low_root_of_unity_order<T: Real>(q: Complex<T>, max_order: u32) -> Option<u32> {
    (1..=max_order).find(|&k| cabs(q.powi(k as i32) - cone()) < T::lit(1e-9))
}

/// An algebra generator whose image can be requested from a representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Q(usize),
    QBar(usize),
    /// `q^{T_i}`.
    QPow(usize),
    /// `q^{−T_i}`.
    QPowInv(usize),
}

impl Generator {
    pub fn node(self) -> usize {
        match self {
            Generator::Q(i) | Generator::QBar(i) | Generator::QPow(i) | Generator::QPowInv(i) => i,
        }
    }

    /// The generators used in intertwining equations, node-major:
    /// `Q_0, Q̄_0, q^{T_0}, Q_1, …`. `q^{−T_i}` is implied by invertibility.
    pub fn intertwining_set(n: usize) -> Vec<Generator> {
        (0..=n)
            .flat_map(|i| [Generator::Q(i), Generator::QBar(i), Generator::QPow(i)])
            .collect()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Q(i) => write!(f, "Q_{i}"),
            Generator::QBar(i) => write!(f, "Qbar_{i}"),
            Generator::QPow(i) => write!(f, "q^T_{i}"),
            Generator::QPowInv(i) => write!(f, "q^-T_{i}"),
        }
    }
}

/// Images of the generators in one evaluation representation.
///
/// `x` is the spectral parameter the representation was built at; for a
/// dual representation it is the parameter of the representation that was
/// dualized. Every representation produced here is homogeneous: `Q_i` has
/// degree +1 and `Q̄_i` degree −1 in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationRep<T: Real> {
    n: usize,
    q: Complex<T>,
    x: Complex<T>,
    is_dual: bool,
    q_gen: Vec<ComplexMatrix<T>>,
    qbar: Vec<ComplexMatrix<T>>,
    d: Vec<ComplexMatrix<T>>,
    dinv: Vec<ComplexMatrix<T>>,
}

fn check_param<T: Real>(name: &str, z: Complex<T>) -> Result<()> {
    if !is_finite(z) || cabs(z) == T::zero() {
        return Err(Error::InvalidParameter(format!("{name} must be finite and nonzero")));
    }
    Ok(())
}

/// Vector evaluation representation of `A_n^(1)` on `C^{n+1}` at spectral
/// parameter `x`:
///
/// ```text
/// Q_i     ↦ x e^{i+1}_i
/// Q̄_i     ↦ x⁻¹ e^i_{i+1}
/// q^{T_i} ↦ 1 + (q⁻¹ − 1) e^i_i + (q − 1) e^{i+1}_{i+1}
/// ```
pub fn vector_rep<T: Real>(n: usize, q: Complex<T>, x: Complex<T>) -> Result<EvaluationRep<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("rank n must be at least 1".into()));
    }
    check_param("q", q)?;
    check_param("x", x)?;
    let size = n + 1;
    let mut q_gen = Vec::with_capacity(size);
    let mut qbar = Vec::with_capacity(size);
    let mut d = Vec::with_capacity(size);
    let mut dinv = Vec::with_capacity(size);
    for i in 0..size {
        let ip = (i + 1) % size;
        q_gen.push(ComplexMatrix::elementary(size, ip, i).scale(x));
        qbar.push(ComplexMatrix::elementary(size, i, ip).scale(x.inv()));
        let mut diag = vec![cone::<T>(); size];
        let mut diag_inv = vec![cone::<T>(); size];
        diag[i] = q.inv();
        diag[ip] = q;
        diag_inv[i] = q;
        diag_inv[ip] = q.inv();
        d.push(ComplexMatrix::diagonal(&diag));
        dinv.push(ComplexMatrix::diagonal(&diag_inv));
    }
    Ok(EvaluationRep {
        n,
        q,
        x,
        is_dual: false,
        q_gen,
        qbar,
        d,
        dinv,
    })
}

impl<T: Real> EvaluationRep<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.q_gen[0].rows()
    }

    pub fn q(&self) -> Complex<T> {
        self.q
    }

    pub fn x(&self) -> Complex<T> {
        self.x
    }

    pub fn is_dual(&self) -> bool {
        self.is_dual
    }

    pub fn image(&self, gen: Generator) -> Result<&ComplexMatrix<T>> {
        let i = gen.node();
        if i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(match gen {
            Generator::Q(_) => &self.q_gen[i],
            Generator::QBar(_) => &self.qbar[i],
            Generator::QPow(_) => &self.d[i],
            Generator::QPowInv(_) => &self.dinv[i],
        })
    }

    pub fn q_gen(&self, i: usize) -> &ComplexMatrix<T> {
        &self.q_gen[i]
    }

    pub fn qbar(&self, i: usize) -> &ComplexMatrix<T> {
        &self.qbar[i]
    }

    /// Image of `q^{T_i}`.
    pub fn d(&self, i: usize) -> &ComplexMatrix<T> {
        &self.d[i]
    }

    /// Image of `q^{−T_i}`.
    pub fn dinv(&self, i: usize) -> &ComplexMatrix<T> {
        &self.dinv[i]
    }

    /// The same representation moved to spectral parameter `x_new` by the
    /// grading automorphism `Q_i ↦ (x_new/x) Q_i`, `Q̄_i ↦ (x/x_new) Q̄_i`.
    pub fn at_spectral(&self, x_new: Complex<T>) -> Result<Self> {
        check_param("x", x_new)?;
        let up = x_new / self.x;
        let down = self.x / x_new;
        Ok(Self {
            x: x_new,
            q_gen: self.q_gen.iter().map(|m| m.scale(up)).collect(),
            qbar: self.qbar.iter().map(|m| m.scale(down)).collect(),
            ..self.clone()
        })
    }

    /// Applies `q^{T}`-conjugation by an invertible `g`: `π'(a) = g π(a) g⁻¹`.
    pub fn conjugated(&self, g: &ComplexMatrix<T>) -> Result<Self> {
        let g_inv = g.inverse()?;
        let conj = |m: &ComplexMatrix<T>| -> Result<ComplexMatrix<T>> { g.try_mul(m)?.try_mul(&g_inv) };
        Ok(Self {
            q_gen: self.q_gen.iter().map(conj).collect::<Result<_>>()?,
            qbar: self.qbar.iter().map(conj).collect::<Result<_>>()?,
            d: self.d.iter().map(conj).collect::<Result<_>>()?,
            dinv: self.dinv.iter().map(conj).collect::<Result<_>>()?,
            ..self.clone()
        })
    }

    /// Replaces one generator image; used to build deliberately broken
    /// representations in tests and diagnostics.
    pub fn with_image(mut self, gen: Generator, m: ComplexMatrix<T>) -> Result<Self> {
        if m.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch("replacement image has the wrong shape".into()));
        }
        let i = gen.node();
        if i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        match gen {
            Generator::Q(_) => self.q_gen[i] = m,
            Generator::QBar(_) => self.qbar[i] = m,
            Generator::QPow(_) => self.d[i] = m,
            Generator::QPowInv(_) => self.dinv[i] = m,
        }
        Ok(self)
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::InvalidParameter(format!(
                "representations have different rank ({} vs {})",
                self.n, other.n
            )));
        }
        let scale = num_traits::Float::max(cabs(self.q), T::one());
        if cabs(self.q - other.q) > T::lit(1e-12) * scale {
            return Err(Error::InvalidParameter(format!(
                "representations have different q ({} vs {})",
                fmt_complex(self.q),
                fmt_complex(other.q)
            )));
        }
        Ok(())
    }
}

/// Dual representation `π̄(g) = π(S(g))ᵀ`.
///
/// With `negate_rapidity` the input is first moved to spectral parameter
/// `x⁻¹` (`θ → −θ`). For the vector representation at `y` this gives
/// `π̄(Q_i) = −q⁻¹ y e^i_{i+1}`, `π̄(Q̄_i) = −q y⁻¹ e^{i+1}_i`,
/// `π̄(q^{T_i}) = π(q^{−T_i})`.
pub fn dual_rep<T: Real>(rep: &EvaluationRep<T>, negate_rapidity: bool) -> Result<EvaluationRep<T>> {
    let base = if negate_rapidity {
        rep.at_spectral(rep.x.inv())?
    } else {
        rep.clone()
    };
    let size = base.n + 1;
    let mut out = EvaluationRep {
        n: base.n,
        q: base.q,
        x: base.x,
        is_dual: !base.is_dual,
        q_gen: Vec::with_capacity(size),
        qbar: Vec::with_capacity(size),
        d: Vec::with_capacity(size),
        dinv: Vec::with_capacity(size),
    };
    for i in 0..size {
        out.q_gen.push((-&(&base.dinv[i] * &base.q_gen[i])).transpose());
        out.qbar.push((-&(&base.dinv[i] * &base.qbar[i])).transpose());
        out.d.push(base.dinv[i].transpose());
        out.dinv.push(base.d[i].transpose());
    }
    Ok(out)
}

/// Spectral parameter at which the conjugate (outgoing) multiplet of a
/// reflection is built from the incoming parameter `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DualConvention {
    /// `x ↦ x⁻¹`, the plain `θ → −θ`.
    Inverse,
    /// `x ↦ −q x⁻¹`: `θ → −θ` combined with the crossing shift. This is
    /// the convention under which boundary intertwiners exist.
    Crossed,
}

impl DualConvention {
    pub fn target_spectral<T: Real>(self, q: Complex<T>, x: Complex<T>) -> Complex<T> {
        match self {
            DualConvention::Inverse => x.inv(),
            DualConvention::Crossed => -(q / x),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DualConvention::Inverse => "antipode-dual",
            DualConvention::Crossed => "antipode-dual-crossed",
        }
    }
}

/// Dual of `rep` moved to the spectral parameter `convention` assigns to
/// the outgoing multiplet.
pub fn conjugate_rep<T: Real>(rep: &EvaluationRep<T>, convention: DualConvention) -> Result<EvaluationRep<T>> {
    let target = convention.target_spectral(rep.q, rep.x);
    dual_rep(&rep.at_spectral(target)?, false)
}

/// Boundary parameters `ε̂_0 … ε̂_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryParams<T: Real>(Vec<Complex<T>>);

impl<T: Real> BoundaryParams<T> {
    pub fn new(eps: Vec<Complex<T>>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one boundary parameter is required".into(),
            ));
        }
        if eps.iter().any(|&e| !is_finite(e)) {
            return Err(Error::InvalidParameter("boundary parameters must be finite".into()));
        }
        Ok(Self(eps))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![czero(); n + 1])
    }

    pub fn from_real(eps: &[f64]) -> Result<Self> {
        Self::new(eps.iter().map(|&e| Complex::new(T::lit(e), T::zero())).collect())
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex<T> {
        self.0[i]
    }

    pub fn check_rank(&self, n: usize) -> Result<()> {
        if self.0.len() != n + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} boundary parameters given for rank n = {n} (need {})",
                self.0.len(),
                n + 1
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| cabs(*e) == T::zero())
    }
}

/// Images of the boundary generators `Q̂_i = Q_i + Q̄_i + ε̂_i q^{T_i}`.
#[derive(Clone, Debug)]
pub struct CoidealGenerators<T: Real> {
    pub qhat: Vec<ComplexMatrix<T>>,
    pub params: BoundaryParams<T>,
}

pub fn coideal_generators<T: Real>(rep: &EvaluationRep<T>, eps: &BoundaryParams<T>) -> Result<CoidealGenerators<T>> {
    eps.check_rank(rep.n)?;
    let qhat = (0..=rep.n)
        .map(|i| {
            let mut m = &rep.q_gen[i] + &rep.qbar[i];
            let e = eps.get(i);
            if cabs(e) != T::zero() {
                m = &m + &rep.d[i].scale(e);
            }
            m
        })
        .collect();
    Ok(CoidealGenerators {
        qhat,
        params: eps.clone(),
    })
}

/// Image of `Δ(gen)` on `V_A ⊗ V_B`.
pub fn coproduct_matrix<T: Real>(
    rep_a: &EvaluationRep<T>,
    rep_b: &EvaluationRep<T>,
    gen: Generator,
) -> Result<ComplexMatrix<T>> {
    rep_a.same_algebra(rep_b)?;
    let i = gen.node();
    if i > rep_a.n {
        return Err(Error::IndexOutOfRange { index: i, n: rep_a.n });
    }
    let id_b = ComplexMatrix::identity(rep_b.dim());
    Ok(match gen {
        Generator::Q(_) => &kron(&rep_a.q_gen[i], &id_b) + &kron(&rep_a.d[i], &rep_b.q_gen[i]),
        Generator::QBar(_) => &kron(&rep_a.qbar[i], &id_b) + &kron(&rep_a.d[i], &rep_b.qbar[i]),
        Generator::QPow(_) => kron(&rep_a.d[i], &rep_b.d[i]),
        Generator::QPowInv(_) => kron(&rep_a.dinv[i], &rep_b.dinv[i]),
    })
}

/// The generator images of `V_A ⊗ V_B` as a representation in its own
/// right (dimension `dim A · dim B`).
pub fn tensor_rep<T: Real>(rep_a: &EvaluationRep<T>, rep_b: &EvaluationRep<T>) -> Result<EvaluationRep<T>> {
    rep_a.same_algebra(rep_b)?;
    let nodes = 0..=rep_a.n;
    let images = |mk: fn(usize) -> Generator| -> Result<Vec<ComplexMatrix<T>>> {
        nodes.clone().map(|i| coproduct_matrix(rep_a, rep_b, mk(i))).collect()
    };
    Ok(EvaluationRep {
        n: rep_a.n,
        q: rep_a.q,
        x: rep_a.x,
        is_dual: false,
        q_gen: images(Generator::Q)?,
        qbar: images(Generator::QBar)?,
        d: images(Generator::QPow)?,
        dinv: images(Generator::QPowInv)?,
    })
}

fn rel_residual<T: Real>(lhs: &ComplexMatrix<T>, rhs: &ComplexMatrix<T>) -> T {
    let scale = num_traits::Float::max(
        num_traits::Float::max(lhs.frobenius_norm(), rhs.frobenius_norm()),
        T::one(),
    );
    (lhs - rhs).frobenius_norm() / scale
}

/// Checks the defining relations on a representation's generator images:
///
/// * `q^{T_i} Q_j q^{−T_i} = q^{α_i·α_j} Q_j`
/// * `q^{T_i} Q̄_j q^{−T_i} = q^{−α_i·α_j} Q̄_j`
/// * `Q_i Q̄_j − q^{−α_i·α_j} Q̄_j Q_i = δ_ij (q^{2T_i} − 1)/(q² − 1)`
///
/// plus `q^{T_i} q^{−T_i} = 1`. The deviation is the largest relative
/// Frobenius residual. Serre relations are not checked.
pub fn check_relations<T: Real>(rep: &EvaluationRep<T>, tol: T) -> Result<VerificationReport<T>> {
    let q = rep.q;
    let q2m1 = q * q - cone::<T>();
    if cabs(q2m1) < T::lit(1e-14) {
        return Err(Error::InvalidParameter(
            "q^2 = 1 makes the Q/Qbar relation singular".into(),
        ));
    }
    let n = rep.n;
    let size = rep.dim();
    let id = ComplexMatrix::identity(size);
    let mut worst = T::zero();
    for i in 0..=n {
        worst = num_traits::Float::max(worst, rel_residual(&(&rep.d[i] * &rep.dinv[i]), &id));
        for j in 0..=n {
            let a = cartan_inner(n, i, j)?;
            let qa = q.powi(a);
            let qma = q.powi(-a);
            let conj_q = &(&rep.d[i] * &rep.q_gen[j]) * &rep.dinv[i];
            worst = num_traits::Float::max(worst, rel_residual(&conj_q, &rep.q_gen[j].scale(qa)));
            let conj_qbar = &(&rep.d[i] * &rep.qbar[j]) * &rep.dinv[i];
            worst = num_traits::Float::max(worst, rel_residual(&conj_qbar, &rep.qbar[j].scale(qma)));

            let lhs = &(&rep.q_gen[i] * &rep.qbar[j]) - &(&rep.qbar[j] * &rep.q_gen[i]).scale(qma);
            let rhs = if i == j {
                (&(&rep.d[i] * &rep.d[i]) - &id).scale(q2m1.inv())
            } else {
                ComplexMatrix::zeros(size, size)
            };
            worst = num_traits::Float::max(worst, rel_residual(&lhs, &rhs));
        }
    }
    Ok(VerificationReport::residual("relations", worst, tol)
        .with_context("n", n)
        .with_context("q", fmt_complex(q))
        .with_context("x", fmt_complex(rep.x))
        .with_context("dual", rep.is_dual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    type M = ComplexMatrix<f64>;

    fn close(a: &M, b: &M, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn cartan_examples() {
        assert_eq!(cartan_inner(2, 0, 2).unwrap(), -1);
        assert_eq!(cartan_inner(1, 0, 1).unwrap(), -2);
        assert_eq!(cartan_inner(3, 0, 2).unwrap(), 0);
        assert_eq!(cartan_inner(3, 1, 1).unwrap(), 2);
        assert!(matches!(
            cartan_inner(2, 3, 0),
            Err(Error::IndexOutOfRange { index: 3, n: 2 })
        ));
    }

    #[test]
    fn cartan_rows_sum_to_zero_and_are_symmetric() {
        for n in 1..=6 {
            let data = CartanData::new(n).unwrap();
            for i in 0..=n {
                assert_eq!(data.inner[i][i], 2);
                assert_eq!(data.inner[i].iter().sum::<i32>(), 0, "n={n}, row {i}");
                for j in 0..=n {
                    assert_eq!(data.inner[i][j], data.inner[j][i]);
                }
            }
        }
    }

    #[test]
    fn q_from_hbar_examples() {
        assert!((q_from_hbar(1.0f64).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((q_from_hbar(2.0f64).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((q_from_hbar(0.8f64).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert!(q_from_hbar(0.0f64).is_err());
    }

    #[test]
    fn vector_rep_substitution() {
        let rep = vector_rep(1, c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        assert_eq!(rep.d(0), &M::diagonal(&[c(0.5, 0.0), c(2.0, 0.0)]));
        assert_eq!(rep.d(1), &M::diagonal(&[c(2.0, 0.0), c(0.5, 0.0)]));

        let eps = BoundaryParams::from_real(&[1.0, 1.0]).unwrap();
        let gens = coideal_generators(&rep, &eps).unwrap();
        let expected = M::from_real_rows(&[&[0.5, 1.0 / 3.0], &[3.0, 2.0]]).unwrap();
        assert!(close(&gens.qhat[0], &expected, 1e-15));

        let x = c(0.4, -1.1);
        let rep = vector_rep(2, c(0.7, 0.2), x).unwrap();
        for i in 0..3 {
            let q = rep.q_gen(i);
            let nonzero: Vec<_> = (0..3)
                .flat_map(|r| (0..3).map(move |cc| (r, cc)))
                .filter(|&(r, cc)| q.get(r, cc).norm() > 0.0)
                .collect();
            assert_eq!(nonzero, vec![((i + 1) % 3, i)]);
            assert_eq!(q.get((i + 1) % 3, i), x);
        }
    }

    #[test]
    fn vector_rep_rejects_zero_parameters() {
        assert!(vector_rep(1, c(0.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(vector_rep(1, c(1.5, 0.0), c(0.0, 0.0)).is_err());
        assert!(vector_rep::<f64>(0, c(1.5, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn dual_rep_explicit_entries() {
        let rep = vector_rep(1, c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let dual = dual_rep(&rep, false).unwrap();
        let expected = M::elementary(2, 0, 1).scale(c(-1.5, 0.0));
        assert!(close(dual.q_gen(0), &expected, 1e-15));
        assert!(dual.is_dual());
        // Q̄_0 ↦ −q y⁻¹ e^1_0
        assert!(close(
            dual.qbar(0),
            &M::elementary(2, 1, 0).scale(c(-2.0 / 3.0, 0.0)),
            1e-15
        ));
        assert_eq!(dual.d(0), rep.dinv(0));
    }

    #[test]
    fn dual_satisfies_antipode_axiom() {
        // m(S ⊗ id)Δ(g) = ε(g) 1 evaluated in the representation, with
        // π(S(g)) = π̄(g)ᵀ.
        let rep = vector_rep(2, c(0.8 * 0.3f64.cos(), 0.8 * 0.3f64.sin()), c(0.7f64.exp(), 0.0)).unwrap();
        let dual = dual_rep(&rep, false).unwrap();
        let id = M::identity(3);
        for i in 0..=2 {
            let s_d = dual.d(i).transpose();
            let q_part = &dual.q_gen(i).transpose() + &(&s_d * rep.q_gen(i));
            assert!(q_part.frobenius_norm() < 1e-14);
            let qbar_part = &dual.qbar(i).transpose() + &(&s_d * rep.qbar(i));
            assert!(qbar_part.frobenius_norm() < 1e-14);
            assert!(close(&(&s_d * rep.d(i)), &id, 1e-14));
        }
    }

    #[test]
    fn dual_twice_restores_cartan_part() {
        let rep = vector_rep(2, c(0.6, 0.5), c(1.3, 0.2)).unwrap();
        let dd = dual_rep(&dual_rep(&rep, false).unwrap(), false).unwrap();
        assert!(!dd.is_dual());
        for i in 0..=2 {
            assert_eq!(dd.d(i), rep.d(i));
            assert_eq!(dd.dinv(i), rep.dinv(i));
        }
    }

    #[test]
    fn negated_dual_uses_inverse_spectral_parameter() {
        let q = c(0.6, 0.5);
        let x = c(1.3, 0.2);
        let rep = vector_rep(2, q, x).unwrap();
        let direct = dual_rep(&vector_rep(2, q, x.inv()).unwrap(), false).unwrap();
        let negated = dual_rep(&rep, true).unwrap();
        for i in 0..=2 {
            assert!(close(negated.q_gen(i), direct.q_gen(i), 1e-14));
            assert!(close(negated.qbar(i), direct.qbar(i), 1e-14));
        }
        let crossed = conjugate_rep(&rep, DualConvention::Crossed).unwrap();
        assert!((crossed.x() - (-(q / x))).norm() < 1e-15);
    }

    #[test]
    fn relations_hold_on_vector_and_dual() {
        let rep = vector_rep(1, c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let report = check_relations(&rep, 1e-12).unwrap();
        assert!(report.passed, "{}", report.summary());
        assert!(report.deviation < 1e-12);

        let q = Complex::from_polar(0.8, 0.3);
        let rep = vector_rep(2, q, c(0.7f64.exp(), 0.0)).unwrap();
        let report = check_relations(&dual_rep(&rep, false).unwrap(), 1e-10).unwrap();
        assert!(report.passed, "{}", report.summary());
    }

    #[test]
    fn perturbed_rep_fails_relations() {
        let rep = vector_rep(1, c(2.0, 0.0), c(3.0, 0.0)).unwrap();
        let broken_q = rep.q_gen(0) + &M::elementary(2, 0, 0).scale(c(0.01, 0.0));
        let broken = rep.with_image(Generator::Q(0), broken_q).unwrap();
        assert!(!check_relations(&broken, 1e-10).unwrap().passed);
    }

    #[test]
    fn relations_reject_q_squared_one() {
        let rep = vector_rep(1, c(-1.0, 0.0), c(3.0, 0.0)).unwrap();
        assert!(check_relations(&rep, 1e-10).is_err());
    }

    #[test]
    fn coproduct_examples() {
        let q = c(2.0, 0.0);
        let a = vector_rep(1, q, c(3.0, 0.0)).unwrap();
        let b = vector_rep(1, q, c(5.0, 0.0)).unwrap();
        let k = coproduct_matrix(&a, &b, Generator::QPow(0)).unwrap();
        let expected = M::diagonal(&[c(0.25, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(4.0, 0.0)]);
        assert!(close(&k, &expected, 1e-15));

        // Δ(Q_0) = Q_0 ⊗ 1 + q^{T_0} ⊗ Q_0: nonzeros at the union of both supports.
        let dq = coproduct_matrix(&a, &b, Generator::Q(0)).unwrap();
        let id = M::identity(2);
        let left = kron(a.q_gen(0), &id);
        let right = kron(a.d(0), b.q_gen(0));
        for r in 0..4 {
            for cc in 0..4 {
                let expect_nonzero = left.get(r, cc).norm() > 0.0 || right.get(r, cc).norm() > 0.0;
                assert_eq!(dq.get(r, cc).norm() > 0.0, expect_nonzero, "({r},{cc})");
            }
        }

        let other_q = vector_rep(1, c(1.5, 0.0), c(5.0, 0.0)).unwrap();
        assert!(coproduct_matrix(&a, &other_q, Generator::Q(0)).is_err());
    }

    #[test]
    fn coproduct_is_an_algebra_map() {
        let q = Complex::from_polar(0.8, 0.3);
        let a = vector_rep(1, q, c(0.7f64.exp(), 0.0)).unwrap();
        let b = vector_rep(1, q, c(0.23f64.exp(), 0.0)).unwrap();
        let t = tensor_rep(&a, &b).unwrap();
        assert!(check_relations(&t, 1e-10).unwrap().passed);
        for i in 0..=1 {
            let k = coproduct_matrix(&a, &b, Generator::QPow(i)).unwrap();
            let kinv = coproduct_matrix(&a, &b, Generator::QPowInv(i)).unwrap();
            assert!(close(&(&k * &kinv), &M::identity(4), 1e-14));
        }
    }

    #[test]
    fn coideal_generators_shapes_and_zero_eps() {
        let rep = vector_rep(3, c(0.9, 0.1), c(1.2, -0.3)).unwrap();
        let gens = coideal_generators(&rep, &BoundaryParams::zeros(3)).unwrap();
        for i in 0..=3 {
            assert_eq!(gens.qhat[i].shape(), (4, 4));
            assert_eq!(gens.qhat[i], rep.q_gen(i) + rep.qbar(i));
        }
        assert!(coideal_generators(&rep, &BoundaryParams::zeros(2)).is_err());
    }

    #[test]
    fn low_order_roots_are_detected() {
        assert_eq!(low_root_of_unity_order(c(-1.0, 0.0), 6), Some(2));
        assert_eq!(low_root_of_unity_order(Complex::from_polar(0.8, 0.3), 6), None);
    }
}
