//! Two-point space H⊗H at truncation N, index map (i, j) <-> i*N + j.
//!
//! Number-conserving operators (L², L) are stored as one block per total
//! number s = i + j. Only sectors with s <= N-2 are free of truncation
//! artifacts; the upper sectors touch the cut-off level N-1.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::{self, check_dim, CMatrix, CVector, TruncatedOperator, ZERO};
use crate::states::StateSpec;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Dense(CMatrix),
    Sectors(Vec<CMatrix>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoPointOperator {
    n: usize,
    lambda_p: f64,
    repr: Repr,
}

/// Basis pairs (i, j) of sector s, ordered by i.
pub fn sector_basis(n: usize, s: usize) -> Vec<(usize, usize)> {
    let lo = s.saturating_sub(n - 1);
    let hi = s.min(n - 1);
    if lo > hi {
        return Vec::new();
    }
    (lo..=hi).map(|i| (i, s - i)).collect()
}

/// Number of sectors unaffected by the cut-off, s = 0..=N-2.
pub fn interior_sectors(n: usize) -> usize {
    n - 1
}

impl TwoPointOperator {
    pub fn from_dense(n: usize, lambda_p: f64, m: CMatrix) -> Result<Self> {
        if m.nrows() != n * n || m.ncols() != n * n {
            return Err(Error::Contract(format!("expected {0}x{0} matrix, got {1}x{2}", n * n, m.nrows(), m.ncols())));
        }
        Ok(Self { n, lambda_p, repr: Repr::Dense(m) })
    }

    /// Build a number-conserving operator from its matrix elements
    /// `f(i', j', i, j) = <i' j'| B |i j>`.
    pub fn from_sector_fn<F>(n: usize, lambda_p: f64, f: F) -> Self
    where
        F: Fn(usize, usize, usize, usize) -> C64,
    {
        let blocks = (0..2 * n - 1)
            .map(|s| {
                let basis = sector_basis(n, s);
                let k = basis.len();
                CMatrix::from_fn(k, k, |r, c| {
                    let (ip, jp) = basis[r];
                    let (i, j) = basis[c];
                    f(ip, jp, i, j)
                })
            })
            .collect();
        Self { n, lambda_p, repr: Repr::Sectors(blocks) }
    }

    /// Truncation N of each factor.
    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    pub fn is_sectored(&self) -> bool {
        matches!(self.repr, Repr::Sectors(_))
    }

    pub fn sector(&self, s: usize) -> Option<&CMatrix> {
        match &self.repr {
            Repr::Sectors(b) => b.get(s),
            Repr::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sectors(blocks) => {
                let n = self.n;
                let mut out = CMatrix::zeros(n * n, n * n);
                for (s, b) in blocks.iter().enumerate() {
                    let basis = sector_basis(n, s);
                    for (r, &(ip, jp)) in basis.iter().enumerate() {
                        for (c, &(i, j)) in basis.iter().enumerate() {
                            out[(ip * n + jp, i * n + j)] = b[(r, c)];
                        }
                    }
                }
                out
            }
        }
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::Contract(format!("vector of length {} on a space of dim {}", v.len(), self.dim())));
        }
        Ok(match &self.repr {
            Repr::Dense(m) => m * v,
            Repr::Sectors(blocks) => {
                let n = self.n;
                let mut out = CVector::zeros(n * n);
                for (s, b) in blocks.iter().enumerate() {
                    let basis = sector_basis(n, s);
                    let x = DVector::from_iterator(basis.len(), basis.iter().map(|&(i, j)| v[i * n + j]));
                    let y = b * x;
                    for (r, &(i, j)) in basis.iter().enumerate() {
                        out[i * n + j] = y[r];
                    }
                }
                out
            }
        })
    }

    pub fn expectation(&self, v: &CVector) -> Result<C64> {
        Ok(v.dotc(&self.apply(v)?))
    }

    pub fn compose(&self, other: &Self) -> Self {
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sectors(x), Repr::Sectors(y)) => Repr::Sectors(x.iter().zip(y).map(|(p, q)| p * q).collect()),
            _ => Repr::Dense(self.to_dense() * other.to_dense()),
        };
        Self { n: self.n, lambda_p: self.lambda_p, repr }
    }

    /// Functional calculus, block by block when sectored.
    pub fn map_hermitian<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let apply = |m: &CMatrix| -> Result<CMatrix> {
            let op = TruncatedOperator::new(m.clone(), self.lambda_p)?;
            Ok(ops::hermitian_function(&op, &f)?.into_entries())
        };
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(apply(m)?),
            Repr::Sectors(blocks) => Repr::Sectors(blocks.iter().map(apply).collect::<Result<_>>()?),
        };
        Ok(Self { n: self.n, lambda_p: self.lambda_p, repr })
    }

    /// Sorted eigenvalues of the sectors `0..sectors` (all of a dense operator).
    pub fn eigenvalues(&self, sectors: usize) -> Vec<f64> {
        let mut ev = match &self.repr {
            Repr::Dense(m) => ops::hermitian_eigenvalues(m),
            Repr::Sectors(blocks) => {
                blocks.iter().take(sectors).flat_map(ops::hermitian_eigenvalues).collect()
            }
        };
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// dA = A⊗I - I⊗A (dense).
pub fn universal_diff(a: &TruncatedOperator) -> TwoPointOperator {
    let n = a.dim();
    let id = CMatrix::identity(n, n);
    let m = a.entries().kronecker(&id) - id.kronecker(a.entries());
    TwoPointOperator { n, lambda_p: a.lambda_p(), repr: Repr::Dense(m) }
}

/// Product state ψ⊗φ.
pub fn product_vector(psi: &CVector, phi: &CVector) -> CVector {
    let n = psi.len();
    let m = phi.len();
    DVector::from_fn(n * m, |k, _| psi[k / m] * phi[k % m])
}

/// L² = (dq1)² + (dq2)², assembled sector by sector from the truncated q and q².
pub fn length_sq(n: usize, lambda_p: f64) -> Result<TwoPointOperator> {
    check_dim(n, 2)?;
    let (q1, q2) = ops::position_ops(n, lambda_p)?;
    let q = [q1.entries().clone(), q2.entries().clone()];
    let sq = [&q[0] * &q[0], &q[1] * &q[1]];
    Ok(TwoPointOperator::from_sector_fn(n, lambda_p, |ip, jp, i, j| {
        let mut v = ZERO;
        for mu in 0..2 {
            if jp == j {
                v += sq[mu][(ip, i)];
            }
            if ip == i {
                v += sq[mu][(jp, j)];
            }
            v -= q[mu][(ip, i)] * q[mu][(jp, j)] * 2.0;
        }
        v
    }))
}

/// 2(H⊗I + I⊗H - a⊗a† - a†⊗a), the ladder form of L².
pub fn length_sq_ladder_form(n: usize, lambda_p: f64) -> Result<TwoPointOperator> {
    check_dim(n, 2)?;
    let h = ops::hamiltonian(n, lambda_p)?;
    let (a, a_dag) = ops::ladder(n, lambda_p)?;
    let (h, a, ad) = (h.entries(), a.entries(), a_dag.entries());
    Ok(TwoPointOperator::from_sector_fn(n, lambda_p, |ip, jp, i, j| {
        let mut v = ZERO;
        if jp == j {
            v += h[(ip, i)];
        }
        if ip == i {
            v += h[(jp, j)];
        }
        v -= a[(ip, i)] * ad[(jp, j)] + ad[(ip, i)] * a[(jp, j)];
        v * 2.0
    }))
}

/// (dq1)² + (dq2)² built from dense products of the universal differentials.
/// Only sensible for small N; used to cross-check the sector assembly.
pub fn length_sq_dense(n: usize, lambda_p: f64) -> Result<TwoPointOperator> {
    check_dim(n, 2)?;
    let (q1, q2) = ops::position_ops(n, lambda_p)?;
    let d1 = universal_diff(&q1).to_dense();
    let d2 = universal_diff(&q2).to_dense();
    TwoPointOperator::from_dense(n, lambda_p, &d1 * &d1 + &d2 * &d2)
}

/// L = √(L²), negative eigenvalues clipped at zero.
pub fn length(n: usize, lambda_p: f64) -> Result<TwoPointOperator> {
    length_sq(n, lambda_p)?.map_hermitian(|x| x.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub level: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub truncation: usize,
    pub lambda_p: f64,
    pub levels: Vec<SpectrumLevel>,
    /// Set when more levels were requested than the truncation resolves well.
    pub unreliable: bool,
}

/// λ_P √(4m + 2) = 2√E_m.
pub fn length_level(m: usize, lambda_p: f64) -> f64 {
    2.0 * ops::level_energy(m, lambda_p).sqrt()
}

/// Lowest `levels` distinct eigenvalues of L, from the sectors s <= N-2.
///
/// Level m shows up once in every sector s >= m, so its truncated
/// multiplicity is N-1-m. Requests beyond N/2 levels are flagged.
pub fn spectrum_l(n: usize, lambda_p: f64, levels: usize) -> Result<SpectrumReport> {
    check_dim(n, 2)?;
    ops::check_positive_scale(lambda_p)?;
    let l2 = length_sq(n, lambda_p)?;
    let vals: Vec<f64> = l2.eigenvalues(interior_sectors(n)).into_iter().map(|x| x.max(0.0).sqrt()).collect();

    let cluster_tol = 1e-6 * lambda_p;
    let mut out: Vec<SpectrumLevel> = Vec::new();
    let mut sum = 0.0;
    for v in vals {
        match out.last_mut() {
            Some(last) if (v - last.numeric).abs() <= cluster_tol => {
                sum += v;
                last.multiplicity += 1;
                last.numeric = sum / last.multiplicity as f64;
            }
            _ => {
                if out.len() == levels {
                    break;
                }
                let level = out.len();
                sum = v;
                out.push(SpectrumLevel { level, analytic: length_level(level, lambda_p), numeric: v, multiplicity: 1 });
            }
        }
    }
    // the loop breaks only after the last level has been fully counted
    Ok(SpectrumReport { truncation: n, lambda_p, unreliable: 2 * levels > n || out.len() < levels, levels: out })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelVector {
    pub sector: usize,
    pub vector: CVector,
    pub schmidt_rank: usize,
}

/// Basis of ker(da) on the sectors s <= N-2.
///
/// The recursion α_{i+1,j}√(i+1) = α_{i,j+1}√(j+1) fixes one vector per
/// sector, with coefficients √C(s,i) / 2^{s/2}.
pub fn ground_kernel(n: usize) -> Result<Vec<KernelVector>> {
    check_dim(n, 3)?;
    let mut out = Vec::with_capacity(n - 1);
    for s in 0..=n - 2 {
        let mut v = CVector::zeros(n * n);
        let norm = 2f64.powf(-(s as f64) / 2.0);
        for i in 0..=s {
            v[i * n + (s - i)] = C64::from(binomial(s, i).sqrt() * norm);
        }
        let schmidt_rank = schmidt_rank(&v, n);
        out.push(KernelVector { sector: s, vector: v, schmidt_rank });
    }
    Ok(out)
}

fn binomial(s: usize, k: usize) -> f64 {
    let k = k.min(s - k);
    (0..k).fold(1.0, |acc, t| acc * (s - t) as f64 / (t + 1) as f64)
}

/// Number of singular values of the N x N coefficient matrix above 1e-10 of the largest.
pub fn schmidt_rank(v: &CVector, n: usize) -> usize {
    let c = CMatrix::from_fn(n, n, |i, j| v[i * n + j]);
    let sv = c.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > 1e-10 * top).count()
}

/// Standard deviation of A in the given state, √(<A²> - <A>²).
pub fn uncertainty(state: &StateSpec, a: &TruncatedOperator) -> Result<f64> {
    let psi = state.realize(a.dim(), a.lambda_p())?;
    let apsi = a.entries() * &psi;
    let mean = psi.dotc(&apsi);
    // <A²> = ‖Aψ‖² for Hermitian A
    let second = if a.is_hermitian() { apsi.norm_squared() } else { psi.dotc(&(a.entries() * &apsi)).re };
    Ok((second - mean.norm_sqr()).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    fn interior_index(n: usize, k: usize) -> bool {
        k / n + k % n <= n - 2
    }

    fn basis(n: usize, i: usize, j: usize) -> CVector {
        let mut v = CVector::zeros(n * n);
        v[i * n + j] = C64::from(1.0);
        v
    }

    #[test]
    fn sector_basis_covers_space() {
        let n = 5;
        let total: usize = (0..2 * n - 1).map(|s| sector_basis(n, s).len()).sum();
        assert_eq!(total, n * n);
        assert_eq!(sector_basis(n, 6), vec![(2, 4), (3, 3), (4, 2)]);
    }

    #[test]
    fn diff_of_identity_vanishes() {
        let id = TruncatedOperator::identity(4, 1.0).unwrap();
        assert_eq!(max_abs(&universal_diff(&id).to_dense()), 0.0);
    }

    #[test]
    fn diff_commutator_doubles() {
        let n = 6;
        let (a, a_dag) = ops::ladder(n, 1.0).unwrap();
        let da = universal_diff(&a).to_dense();
        let dad = universal_diff(&a_dag).to_dense();
        let c = &da * &dad - &dad * &da;
        for k in 0..n * n {
            if interior_index(n, k) {
                assert_relative_eq!(c[(k, k)].re, 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn diff_q1_on_ground_pair() {
        let (q1, _) = ops::position_ops(5, 1.0).unwrap();
        let d = universal_diff(&q1);
        let v = basis(5, 0, 0);
        assert_relative_eq!(d.expectation(&v).unwrap().norm(), 0.0);
    }

    #[test]
    fn sectors_reproduce_dense_sum_of_squares() {
        let n = 7;
        let dense = length_sq_dense(n, 1.3).unwrap().to_dense();
        let sect = length_sq(n, 1.3).unwrap().to_dense();
        // includes the off-sector entries: the truncated sum is exactly number conserving
        assert!(max_abs(&(dense - sect)) < 1e-12);
    }

    #[test]
    fn ground_pair_expectation() {
        let n = 10;
        let l2 = length_sq(n, 1.0).unwrap();
        assert_relative_eq!(l2.expectation(&basis(n, 0, 0)).unwrap().re, 2.0, epsilon = 1e-12);
        let l2 = length_sq(n, 2.0).unwrap();
        assert_relative_eq!(l2.expectation(&basis(n, 0, 0)).unwrap().re, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn ladder_form_agrees_on_interior() {
        let n = 12;
        let x = length_sq(n, 0.7).unwrap();
        let y = length_sq_ladder_form(n, 0.7).unwrap();
        for s in 0..interior_sectors(n) {
            let d = x.sector(s).unwrap() - y.sector(s).unwrap();
            assert!(max_abs(&d) < 1e-10, "sector {s}");
        }
        // and equals 4(da† da / 2 + λ²/2) there
        let (a, _) = ops::ladder(n, 0.7).unwrap();
        let da = universal_diff(&a).to_dense();
        let want = (da.adjoint() * &da) * C64::from(2.0) + CMatrix::identity(n * n, n * n) * C64::from(2.0 * 0.49);
        let got = x.to_dense();
        for r in 0..n * n {
            for c in 0..n * n {
                if interior_index(n, r) && interior_index(n, c) {
                    assert!((got[(r, c)] - want[(r, c)]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn l2_is_bounded_below() {
        let l2 = length_sq(30, 1.0).unwrap();
        let ev = l2.eigenvalues(interior_sectors(30));
        assert_relative_eq!(ev[0], 2.0, epsilon = 1e-6);
    }

    #[test]
    fn spectrum_lowest_levels() {
        let r = spectrum_l(20, 1.0, 3).unwrap();
        assert_relative_eq!(r.levels[0].numeric, 2f64.sqrt(), epsilon = 1e-8);
        assert_relative_eq!(r.levels[1].numeric, 6f64.sqrt(), epsilon = 1e-8);
        assert_eq!(r.levels[0].multiplicity, 19);
        assert_eq!(r.levels[1].multiplicity, 18);
        assert!(!r.unreliable);
        assert!(spectrum_l(20, 1.0, 15).unwrap().unreliable);
        assert!(spectrum_l(20, 1.0, 0).unwrap().levels.is_empty());
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let n = 12;
        let (a, _) = ops::ladder(n, 1.0).unwrap();
        let da = universal_diff(&a);
        let ker = ground_kernel(n).unwrap();
        assert_eq!(ker.len(), 11);
        for kv in &ker {
            assert!(da.apply(&kv.vector).unwrap().norm() <= 1e-10);
            assert_relative_eq!(kv.vector.norm(), 1.0, epsilon = 1e-12);
            assert_eq!(kv.schmidt_rank, kv.sector + 1);
        }
        assert_eq!(ker.iter().filter(|k| k.schmidt_rank == 1).count(), 1);
    }

    #[test]
    fn listed_kernel_states() {
        let n = 6;
        let (a, _) = ops::ladder(n, 1.0).unwrap();
        let da = universal_diff(&a);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = basis(n, 0, 0);
        let v1 = (basis(n, 0, 1) + basis(n, 1, 0)) * C64::from(s);
        let v2 = (basis(n, 1, 1) * C64::from(2f64.sqrt()) + basis(n, 2, 0) + basis(n, 0, 2)) * C64::from(0.5);
        for v in [&v0, &v1, &v2] {
            assert!(da.apply(v).unwrap().norm() < 1e-12);
        }
        assert_eq!(schmidt_rank(&v0, n), 1);
        assert_eq!(schmidt_rank(&v1, n), 2);
        // singular values 1/2, 1/√2, 1/2
        assert_eq!(schmidt_rank(&v2, n), 3);
    }

    #[test]
    fn ground_state_uncertainty() {
        let (q1, q2) = ops::position_ops(16, 1.0).unwrap();
        let w0 = StateSpec::Eigenstate { m: 0 };
        assert_relative_eq!(uncertainty(&w0, &q1).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        let prod = uncertainty(&w0, &q1).unwrap() * uncertainty(&w0, &q2).unwrap();
        assert_relative_eq!(prod, 0.5, epsilon = 1e-12);
        let h = ops::hamiltonian(16, 1.0).unwrap();
        assert_eq!(uncertainty(&w0, &h).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn l2_exchange_symmetric(n in 3usize..9, l in 0.2f64..2.0) {
            let m = length_sq(n, l).unwrap().to_dense();
            let swap = |k: usize| (k % n) * n + k / n;
            for r in 0..n * n {
                for c in 0..n * n {
                    prop_assert!((m[(r, c)] - m[(swap(r), swap(c))]).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn l2_positive_on_interior(n in 4usize..16) {
            let l2 = length_sq(n, 1.0).unwrap();
            let ev = l2.eigenvalues(interior_sectors(n));
            prop_assert!(ev[0] >= 2.0 - 1e-9);
        }

        #[test]
        fn length_squares_back(n in 3usize..10) {
            let l = length(n, 1.0).unwrap();
            let l2 = length_sq(n, 1.0).unwrap();
            let back = l.compose(&l);
            for s in 0..interior_sectors(n) {
                let d = back.sector(s).unwrap() - l2.sector(s).unwrap();
                prop_assert!(max_abs(&d) < 1e-10);
            }
        }
    }
}
