//! Truncated harmonic-oscillator algebra in the number basis.
//!
//! Every operator lives on span{|0>, ..., |N-1>}. Products of truncated
//! matrices differ from the infinite ones only in the last row and column, so
//! identity checks are done on the top-left (N-1) block.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Dense N x N operator tagged with the length scale it was built at.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    entries: CMatrix,
    lambda_p: f64,
}

impl TruncatedOperator {
    pub fn new(entries: CMatrix, lambda_p: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Contract(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_scale(lambda_p)?;
        Ok(Self { entries, lambda_p })
    }

    pub fn from_diagonal(diag: &[f64], lambda_p: f64) -> Result<Self> {
        let n = diag.len();
        let m = CMatrix::from_fn(n, n, |i, j| if i == j { C64::from(diag[i]) } else { ZERO });
        Self::new(m, lambda_p)
    }

    pub fn identity(n: usize, lambda_p: f64) -> Result<Self> {
        Self::new(CMatrix::identity(n, n), lambda_p)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint(), lambda_p: self.lambda_p }
    }

    pub fn is_hermitian(&self) -> bool {
        hermitian_defect(&self.entries) <= HERMITIAN_TOL
    }

    pub fn commutator(&self, other: &Self) -> Self {
        let e = &self.entries * &other.entries - &other.entries * &self.entries;
        Self { entries: e, lambda_p: self.lambda_p }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { entries: &self.entries * c, lambda_p: self.lambda_p }
    }

    /// Top-left k x k block.
    pub fn top_left(&self, k: usize) -> CMatrix {
        self.entries.view((0, 0), (k, k)).into_owned()
    }

    /// <psi, A psi>.
    pub fn expectation(&self, psi: &CVector) -> C64 {
        psi.dotc(&(&self.entries * psi))
    }

    pub fn norm(&self) -> f64 {
        operator_norm(&self.entries)
    }
}

impl Add for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn add(self, rhs: Self) -> TruncatedOperator {
        TruncatedOperator { entries: &self.entries + &rhs.entries, lambda_p: self.lambda_p }
    }
}

impl Sub for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn sub(self, rhs: Self) -> TruncatedOperator {
        TruncatedOperator { entries: &self.entries - &rhs.entries, lambda_p: self.lambda_p }
    }
}

impl Mul for &TruncatedOperator {
    type Output = TruncatedOperator;
    fn mul(self, rhs: Self) -> TruncatedOperator {
        TruncatedOperator { entries: &self.entries * &rhs.entries, lambda_p: self.lambda_p }
    }
}

/// Validated model parameters shared by the higher-level modules.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub lambda_p: f64,
    pub truncation: usize,
    pub tol: f64,
}

impl ModelParams {
    pub fn new(lambda_p: f64, truncation: usize, tol: f64) -> Result<Self> {
        if !(lambda_p > 0.0 && lambda_p.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda_p must be positive, got {lambda_p}")));
        }
        if truncation < 4 {
            return Err(Error::InvalidTruncation { n: truncation, reason: "need N >= 4".into() });
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tol must lie in (0, 1), got {tol}")));
        }
        Ok(Self { lambda_p, truncation, tol })
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { lambda_p: 1.0, truncation: 32, tol: 1e-8 }
    }
}

pub(crate) fn check_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidTruncation { n, reason: format!("need N >= {min}") });
    }
    Ok(())
}

// Zero is allowed here (degenerate scale); anything that divides by the scale
// goes through `check_positive_scale`.
fn check_scale(lambda_p: f64) -> Result<()> {
    if !(lambda_p >= 0.0 && lambda_p.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda_p must be finite and >= 0, got {lambda_p}")));
    }
    Ok(())
}

pub(crate) fn check_positive_scale(lambda_p: f64) -> Result<()> {
    if !(lambda_p > 0.0 && lambda_p.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda_p must be positive, got {lambda_p}")));
    }
    Ok(())
}

/// Largest |A_ij - conj(A_ji)| relative to the largest entry (floored at 1).
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut defect = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
            scale = scale.max(m[(i, j)].norm());
        }
    }
    defect / scale
}

/// Annihilation operator `a` and its adjoint, `a[m, m+1] = lambda_p * sqrt(m+1)`.
pub fn ladder(n: usize, lambda_p: f64) -> Result<(TruncatedOperator, TruncatedOperator)> {
    check_dim(n, 2)?;
    check_scale(lambda_p)?;
    let a = CMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            C64::from(lambda_p * (j as f64).sqrt())
        } else {
            ZERO
        }
    });
    let a_dag = a.adjoint();
    Ok((TruncatedOperator { entries: a, lambda_p }, TruncatedOperator { entries: a_dag, lambda_p }))
}

/// Coordinates q1 = (a + a†)/√2 and q2 = (a - a†)/(i√2).
pub fn position_ops(n: usize, lambda_p: f64) -> Result<(TruncatedOperator, TruncatedOperator)> {
    let (a, a_dag) = ladder(n, lambda_p)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q1 = (&a + &a_dag).scaled(C64::from(s));
    let q2 = (&a - &a_dag).scaled(C64::new(0.0, -s));
    Ok((q1, q2))
}

/// Level energy lambda_p^2 (m + 1/2).
pub fn level_energy(m: usize, lambda_p: f64) -> f64 {
    lambda_p * lambda_p * (m as f64 + 0.5)
}

pub fn hamiltonian(n: usize, lambda_p: f64) -> Result<TruncatedOperator> {
    check_dim(n, 2)?;
    check_scale(lambda_p)?;
    let diag: Vec<f64> = (0..n).map(|m| level_energy(m, lambda_p)).collect();
    TruncatedOperator::from_diagonal(&diag, lambda_p)
}

/// Number operator a†a / lambda_p^2 = diag(0, 1, ..., N-1).
pub fn number_operator(n: usize, lambda_p: f64) -> Result<TruncatedOperator> {
    check_dim(n, 2)?;
    let diag: Vec<f64> = (0..n).map(|m| m as f64).collect();
    TruncatedOperator::from_diagonal(&diag, lambda_p)
}

/// Translation unitary U(kappa) = exp((k a† - conj(k) a)/lambda_p^2), k = (k1 + i k2)/√2.
///
/// The truncated exponential is exactly unitary, so the check that matters is
/// how much of the low columns leaks toward the cut: the block made of the
/// first N/4 columns and first 3N/4 rows must still be an isometry within `tol`.
pub fn displacement(kappa: [f64; 2], n: usize, lambda_p: f64, tol: f64) -> Result<TruncatedOperator> {
    check_dim(n, 2)?;
    check_positive_scale(lambda_p)?;
    if kappa[0] == 0.0 && kappa[1] == 0.0 {
        return TruncatedOperator::identity(n, lambda_p);
    }
    let (a, a_dag) = ladder(n, lambda_p)?;
    let kc = C64::new(kappa[0], kappa[1]) * std::f64::consts::FRAC_1_SQRT_2;
    let inv = 1.0 / (lambda_p * lambda_p);
    // generator G is anti-Hermitian; iG is Hermitian and exp(G) = exp(-i (iG)).
    let gen = (a_dag.entries() * kc - a.entries() * kc.conj()) * C64::from(inv);
    let herm = &gen * I;
    let u = hermitian_apply(&herm, |x| (-I * x).exp());
    let leak = displacement_leakage(&u);
    if leak > tol {
        return Err(Error::TruncationTooSmall(format!(
            "translation by ({}, {}) leaks {leak:.3e} past the cut at N = {n} (tol {tol:.1e})",
            kappa[0], kappa[1]
        )));
    }
    TruncatedOperator::new(u, lambda_p)
}

/// ‖B†B - I‖ for B = U[..3N/4, ..N/4].
pub fn displacement_leakage(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let cols = (n / 4).max(1);
    let rows = (3 * n / 4).max(cols);
    let b = u.view((0, 0), (rows, cols));
    let gram = b.adjoint() * b - CMatrix::identity(cols, cols);
    operator_norm(&gram)
}

/// V f(D) V† for Hermitian A = V D V†.
pub fn hermitian_function<F>(a: &TruncatedOperator, f: F) -> Result<TruncatedOperator>
where
    F: Fn(f64) -> f64,
{
    if !a.is_hermitian() {
        return Err(Error::Contract(format!(
            "hermitian_function needs a Hermitian argument (defect {:.3e})",
            hermitian_defect(a.entries())
        )));
    }
    let out = hermitian_apply(a.entries(), |x| C64::from(f(x)));
    let sym = (&out + out.adjoint()) * C64::from(0.5);
    TruncatedOperator::new(sym, a.lambda_p())
}

/// Functional calculus on a matrix assumed Hermitian; no checks.
pub(crate) fn hermitian_apply<F>(m: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> C64,
{
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eig = m.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let fk = f(lam);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    scaled * v.adjoint()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Largest singular value, from the top eigenvalue of A†A.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let top = gram.symmetric_eigenvalues().iter().fold(0.0f64, |acc, &x| acc.max(x));
    top.max(0.0).sqrt()
}

/// [A, a†] without forming a†: (A a†)_ij = A_{i,j+1} λ√(j+1), (a† A)_ij = λ√i A_{i-1,j}.
pub(crate) fn comm_raising(m: &CMatrix, lambda_p: f64) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let mut v = ZERO;
        if j + 1 < n {
            v += m[(i, j + 1)] * (lambda_p * ((j + 1) as f64).sqrt());
        }
        if i >= 1 {
            v -= m[(i - 1, j)] * (lambda_p * (i as f64).sqrt());
        }
        v
    })
}

/// [A, a]: (A a)_ij = A_{i,j-1} λ√j, (a A)_ij = λ√(i+1) A_{i+1,j}.
pub(crate) fn comm_lowering(m: &CMatrix, lambda_p: f64) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let mut v = ZERO;
        if j >= 1 {
            v += m[(i, j - 1)] * (lambda_p * (j as f64).sqrt());
        }
        if i + 1 < n {
            v -= m[(i + 1, j)] * (lambda_p * ((i + 1) as f64).sqrt());
        }
        v
    })
}

/// ∂_z A = [A, a†] / lambda_p^2.
pub fn deriv_z(a: &TruncatedOperator) -> Result<TruncatedOperator> {
    check_positive_scale(a.lambda_p())?;
    let l = a.lambda_p();
    let m = comm_raising(a.entries(), l) * C64::from(1.0 / (l * l));
    TruncatedOperator::new(m, l)
}

/// ∂_z̄ A = -[A, a] / lambda_p^2, so that ∂_z̄(A†) = (∂_z A)†.
pub fn deriv_zbar(a: &TruncatedOperator) -> Result<TruncatedOperator> {
    check_positive_scale(a.lambda_p())?;
    let l = a.lambda_p();
    let m = comm_lowering(a.entries(), l) * C64::from(-1.0 / (l * l));
    TruncatedOperator::new(m, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    // Plain dense ladder built independently of `ladder`.
    fn oracle_a(n: usize, l: f64) -> CMatrix {
        let mut a = CMatrix::zeros(n, n);
        for m in 0..n - 1 {
            a[(m, m + 1)] = C64::from(l * ((m + 1) as f64).sqrt());
        }
        a
    }

    #[test]
    fn ladder_n3_matches_matrix() {
        let (a, a_dag) = ladder(3, 1.0).unwrap();
        let s2 = 2f64.sqrt();
        let want = CMatrix::from_row_slice(
            3,
            3,
            &[ZERO, ONE, ZERO, ZERO, ZERO, C64::from(s2), ZERO, ZERO, ZERO],
        );
        assert_relative_eq!(max_abs(&(a.entries() - &want)), 0.0);
        assert_eq!(a_dag.entries(), &want.adjoint());
    }

    #[test]
    fn ladder_commutator_low_block() {
        let (a, a_dag) = ladder(2, 1.0).unwrap();
        let c = a.commutator(&a_dag);
        assert_relative_eq!(c.entries()[(0, 0)].re, 1.0);

        let (a, a_dag) = ladder(6, 2.0).unwrap();
        let c = a.commutator(&a_dag);
        for k in 0..5 {
            assert_relative_eq!(c.entries()[(k, k)].re, 4.0, epsilon = 1e-12);
        }
        // the last entry carries the truncation defect
        assert!((c.entries()[(5, 5)].re - 4.0).abs() > 1.0);
    }

    #[test]
    fn ladder_rejects_small_n() {
        assert!(matches!(ladder(1, 1.0), Err(Error::InvalidTruncation { .. })));
    }

    #[test]
    fn position_commutator_and_trace() {
        let (q1, q2) = position_ops(4, 1.0).unwrap();
        let c = q1.commutator(&q2);
        assert_relative_eq!(c.entries()[(0, 0)].im, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.entries()[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(q1.entries().trace().norm(), 0.0);
        assert!(q1.is_hermitian() && q2.is_hermitian());
    }

    #[test]
    fn ground_second_moment() {
        let (q1, _) = position_ops(8, 1.0).unwrap();
        let sq = &q1 * &q1;
        assert_relative_eq!(sq.entries()[(0, 0)].re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn hamiltonian_diagonals() {
        let h = hamiltonian(3, 1.0).unwrap();
        let d: Vec<f64> = h.entries().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![0.5, 1.5, 2.5]);
        let h0 = hamiltonian(3, 0.0).unwrap();
        assert_eq!(max_abs(h0.entries()), 0.0);
        let h2 = hamiltonian(3, 2.0).unwrap();
        let d: Vec<f64> = h2.entries().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![2.0, 6.0, 10.0]);
    }

    #[test]
    fn hamiltonian_matches_number_form() {
        // H = a†a + λ²/2 on the full truncation (a†a is exact there)
        let l = 1.3;
        let a = oracle_a(7, l);
        let h = a.adjoint() * &a + CMatrix::identity(7, 7) * C64::from(l * l / 2.0);
        let got = hamiltonian(7, l).unwrap();
        assert!(max_abs(&(got.entries() - h)) < 1e-12);
    }

    #[test]
    fn displacement_zero_is_identity() {
        let u = displacement([0.0, 0.0], 10, 1.0, 1e-8).unwrap();
        assert_eq!(u.entries(), &CMatrix::identity(10, 10));
    }

    #[test]
    fn displacement_shifts_means() {
        let u = displacement([1.0, 0.0], 64, 1.0, 1e-8).unwrap();
        let psi = u.entries().column(0).into_owned();
        let (q1, _) = position_ops(64, 1.0).unwrap();
        assert_relative_eq!(q1.expectation(&psi).re, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn displacement_second_moment() {
        let u = displacement([1.0, 2.0], 64, 1.0, 1e-8).unwrap();
        let psi = u.entries().column(0).into_owned();
        let (q1, q2) = position_ops(64, 1.0).unwrap();
        let m1 = (&q1 * &q1).expectation(&psi).re;
        let m2 = (&q2 * &q2).expectation(&psi).re;
        assert_relative_eq!(m1, 0.5 + 1.0, epsilon = 1e-8);
        assert_relative_eq!(m2, 0.5 + 4.0, epsilon = 1e-8);
    }

    #[test]
    fn displacement_intertwines_ladder() {
        // U† a U = a + k on the low block
        let n = 48;
        let u = displacement([0.7, -0.4], n, 1.0, 1e-8).unwrap();
        let (a, _) = ladder(n, 1.0).unwrap();
        let lhs = u.adjoint().entries() * a.entries() * u.entries();
        let k = C64::new(0.7, -0.4) * std::f64::consts::FRAC_1_SQRT_2;
        let want = a.entries() + CMatrix::identity(n, n) * k;
        let d = (lhs - want).view((0, 0), (n / 2, n / 2)).into_owned();
        assert!(max_abs(&d) < 1e-8);
    }

    #[test]
    fn displacement_detects_small_truncation() {
        let err = displacement([3.0, 0.0], 32, 1.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::TruncationTooSmall(_)));
        assert!(displacement([3.0, 0.0], 96, 1.0, 1e-8).is_ok());
    }

    #[test]
    fn hermitian_function_cases() {
        let d = TruncatedOperator::from_diagonal(&[4.0, 9.0], 1.0).unwrap();
        let r = hermitian_function(&d, f64::sqrt).unwrap();
        assert_relative_eq!(r.entries()[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.entries()[(1, 1)].re, 3.0, epsilon = 1e-14);

        let h = hamiltonian(3, 1.0).unwrap();
        let r = hermitian_function(&h, |x| 2.0 * x.sqrt()).unwrap();
        for (k, want) in [2f64, 6.0, 10.0].iter().enumerate() {
            assert_relative_eq!(r.entries()[(k, k)].re, want.sqrt(), epsilon = 1e-13);
        }

        let id = TruncatedOperator::identity(5, 1.0).unwrap();
        let r = hermitian_function(&id, |x| x.exp()).unwrap();
        assert!(max_abs(&(r.entries() - CMatrix::identity(5, 5) * C64::from(1f64.exp()))) < 1e-13);
    }

    #[test]
    fn hermitian_function_rejects_non_hermitian() {
        let (a, _) = ladder(4, 1.0).unwrap();
        assert!(matches!(hermitian_function(&a, |x| x), Err(Error::Contract(_))));
    }

    #[test]
    fn operator_norm_cases() {
        assert_eq!(operator_norm(&CMatrix::zeros(3, 3)), 0.0);
        let (a, _) = ladder(4, 1.0).unwrap();
        // oracle: singular values of the shift are the weights themselves
        let svd = a.entries().clone().svd(false, false);
        let top = svd.singular_values.max();
        assert_relative_eq!(operator_norm(a.entries()), top, max_relative = 1e-10);
        assert_relative_eq!(operator_norm(a.entries()), 3f64.sqrt(), max_relative = 1e-10);
        let d = TruncatedOperator::from_diagonal(&[-2.0, 1.0], 1.0).unwrap();
        assert_relative_eq!(d.norm(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn deriv_z_examples() {
        let (a, _) = ladder(7, 1.5).unwrap();
        let d = deriv_z(&a).unwrap();
        let blk = d.top_left(6) - CMatrix::identity(6, 6);
        assert!(max_abs(&blk) < 1e-12);

        let id = TruncatedOperator::identity(7, 1.5).unwrap();
        assert_eq!(max_abs(deriv_z(&id).unwrap().entries()), 0.0);
    }

    #[test]
    fn fast_commutators_match_dense() {
        let n = 6;
        let l = 0.8;
        let m = CMatrix::from_fn(n, n, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        let a = oracle_a(n, l);
        let ad = a.adjoint();
        let want_r = &m * &ad - &ad * &m;
        let want_l = &m * &a - &a * &m;
        assert!(max_abs(&(comm_raising(&m, l) - want_r)) < 1e-12);
        assert!(max_abs(&(comm_lowering(&m, l) - want_l)) < 1e-12);
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(1.0, 4, 1e-8).is_ok());
        assert!(ModelParams::new(1.0, 3, 1e-8).is_err());
        assert!(ModelParams::new(0.0, 8, 1e-8).is_err());
        assert!(ModelParams::new(1.0, 8, 1.0).is_err());
    }

    fn herm_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec(-2.0f64..2.0, 2 * n * n).prop_map(move |v| {
            let m = CMatrix::from_fn(n, n, |i, j| C64::new(v[i * n + j], v[n * n + i * n + j]));
            (&m + m.adjoint()) * C64::from(0.5)
        })
    }

    proptest! {
        #[test]
        fn canonical_commutator_interior(n in 2usize..24, l in 0.1f64..3.0) {
            let (a, a_dag) = ladder(n, l).unwrap();
            let c = a.commutator(&a_dag);
            for k in 0..n - 1 {
                prop_assert!((c.entries()[(k, k)] - C64::from(l * l)).norm() < 1e-10 * l * l);
            }
        }

        #[test]
        fn hamiltonian_commutes_with_number(n in 2usize..20, l in 0.1f64..3.0) {
            let h = hamiltonian(n, l).unwrap();
            let num = number_operator(n, l).unwrap();
            prop_assert!(max_abs(h.commutator(&num).entries()) == 0.0);
            prop_assert!(h.is_hermitian());
        }

        #[test]
        fn derivative_adjoint_identity(m in herm_strategy(5), re in -1.0f64..1.0) {
            // use a non-Hermitian argument to exercise the identity
            let x = TruncatedOperator::new(&m * C64::new(re, 0.5), 1.0).unwrap();
            let lhs = deriv_zbar(&x.adjoint()).unwrap();
            let rhs = deriv_z(&x).unwrap().adjoint();
            prop_assert!(max_abs(&(lhs.entries() - rhs.entries())) < 1e-12);
        }

        #[test]
        fn derivatives_are_linear(m1 in herm_strategy(4), m2 in herm_strategy(4), c in -3.0f64..3.0) {
            let x = TruncatedOperator::new(m1, 1.0).unwrap();
            let y = TruncatedOperator::new(m2, 1.0).unwrap();
            let lhs = deriv_z(&(&x + &y.scaled(C64::from(c)))).unwrap();
            let rhs = &deriv_z(&x).unwrap() + &deriv_z(&y).unwrap().scaled(C64::from(c));
            prop_assert!(max_abs(&(lhs.entries() - rhs.entries())) < 1e-10);
        }

        #[test]
        fn identity_function_round_trip(m in herm_strategy(6)) {
            let x = TruncatedOperator::new(m, 1.0).unwrap();
            let y = hermitian_function(&x, |t| t).unwrap();
            let scale = max_abs(x.entries()).max(1.0);
            prop_assert!(max_abs(&(y.entries() - x.entries())) <= 1e-12 * scale);
        }

        #[test]
        fn inverse_translation_is_adjoint(k1 in -1.5f64..1.5, k2 in -1.5f64..1.5) {
            let n = 48;
            let u = displacement([k1, k2], n, 1.0, 1e-8).unwrap();
            let v = displacement([-k1, -k2], n, 1.0, 1e-8).unwrap();
            let d = (v.entries() - u.adjoint().entries()).view((0, 0), (3 * n / 4, 3 * n / 4)).into_owned();
            prop_assert!(max_abs(&d) < 1e-8);
        }
    }
}
