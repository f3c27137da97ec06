//! Direct maximization of tr((ρ₁ − ρ₂)A) over the truncated Lipschitz ball,
//! the optimal element l₀, the candidates l₁, l₂, l₃ and the geodesic check.
//!
//! The constraint is ‖K(A)‖ ≤ r with K(A) = (√2/λ²)·P[A, a†]P, P the
//! projection on the interior (N−1) block. For Hermitian A the [A, a] block is
//! −K(A)†, so one commutator carries the whole seminorm. K vanishes exactly on
//! span{I, E_{N−1,N−1}}; the state difference is projected off that span and
//! the removed edge weight is reported.

use std::f64::consts::SQRT_2;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::{
    self, check_dim, check_positive_scale, comm_lowering, comm_raising, hermitian_defect, operator_norm, CMatrix,
    TruncatedOperator, ONE, ZERO,
};
use crate::quantum_length::{validate_schedule, DistanceReport, Method, TruncationValue};
use crate::spectral::spectral_distance_closed_form;
use crate::states::StateSpec;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    /// Real diagonal A only; exact for number-diagonal states.
    DiagonalLp,
    /// Primal-dual projected ascent over all Hermitian A.
    ProjectedAscent,
    /// Log-det barrier over all Hermitian A, Newton steps.
    InteriorPoint,
}

impl SolverMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverMethod::DiagonalLp => "diagonal-lp",
            SolverMethod::ProjectedAscent => "projected-ascent",
            SolverMethod::InteriorPoint => "interior-point",
        }
    }
}

impl FromStr for SolverMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal-lp" => Ok(SolverMethod::DiagonalLp),
            "projected-ascent" => Ok(SolverMethod::ProjectedAscent),
            "interior-point" => Ok(SolverMethod::InteriorPoint),
            _ => Err(Error::Parse(format!(
                "unknown solver method '{s}' (expected diagonal-lp, projected-ascent or interior-point)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub lambda_p: f64,
    pub schedule: Vec<usize>,
    pub tol: f64,
    /// Iteration cap (Newton steps for the interior-point method).
    pub max_iters: usize,
    pub method: SolverMethod,
    /// Bound on the seminorm; 1 gives the distance.
    pub radius: f64,
    /// Primal/dual step balance of projected ascent: τ = 0.95ω/‖K‖, σ = 0.95/(ω‖K‖).
    pub step_ratio: f64,
    /// Projected ascent stops once the best value has not improved by tol for this many iterations.
    pub stall_window: usize,
    pub record_trace: bool,
}

impl SolverConfig {
    pub fn new(lambda_p: f64, schedule: Vec<usize>, tol: f64, method: SolverMethod) -> Result<Self> {
        let cfg = Self { lambda_p, schedule, tol, method, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive_scale(self.lambda_p)?;
        validate_schedule(&self.schedule)?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.radius)));
        }
        if !(self.step_ratio > 0.0 && self.step_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("step ratio must be positive, got {}", self.step_ratio)));
        }
        if self.max_iters == 0 || self.stall_window == 0 {
            return Err(Error::InvalidParameter("max_iters and stall_window must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_p: 1.0,
            schedule: vec![32],
            tol: 1e-8,
            max_iters: 200_000,
            method: SolverMethod::DiagonalLp,
            radius: 1.0,
            step_ratio: 1.0,
            stall_window: 200,
            record_trace: false,
        }
    }
}

/// Result of one solve at a fixed truncation.
#[derive(Clone, Debug)]
pub struct TruncatedSolve {
    pub truncation: usize,
    pub value: f64,
    /// Feasible maximizer estimate, seminorm ≤ radius.
    pub element: TruncatedOperator,
    pub iterations: usize,
    pub converged: bool,
    /// Weight of the state difference on the constraint-free directions, dropped before solving.
    pub edge_weight: f64,
    /// Objective per iteration, when requested.
    pub trace: Vec<f64>,
}

// ------------------------------------------------------------------ seminorm

fn k_scale(lambda_p: f64) -> f64 {
    SQRT_2 / (lambda_p * lambda_p)
}

fn interior(m: &CMatrix) -> CMatrix {
    let k = m.nrows().saturating_sub(1);
    m.view((0, 0), (k, k)).into_owned()
}

/// (√2/λ²)·max(‖[A, a†]‖, ‖[A, a]‖), commutators cut to the interior block.
pub fn seminorm(a: &TruncatedOperator) -> Result<f64> {
    let defect = hermitian_defect(a.entries());
    if defect > 1e-12 {
        return Err(Error::Contract(format!("seminorm needs a Hermitian operator, defect {defect:.3e}")));
    }
    let lp = a.lambda_p();
    check_positive_scale(lp)?;
    let up = operator_norm(&interior(&comm_raising(a.entries(), lp)));
    let down = operator_norm(&interior(&comm_lowering(a.entries(), lp)));
    Ok(k_scale(lp) * up.max(down))
}

fn k_apply(a: &CMatrix, lp: f64) -> CMatrix {
    interior(&comm_raising(a, lp)) * C64::from(k_scale(lp))
}

// adjoint of k_apply on Hermitian matrices under <X, Y> = Re tr(X†Y)
fn k_adjoint(y: &CMatrix, lp: f64) -> CMatrix {
    let n = y.nrows() + 1;
    let mut padded = CMatrix::zeros(n, n);
    padded.view_mut((0, 0), (n - 1, n - 1)).copy_from(y);
    let m = comm_lowering(&padded, lp) * C64::from(k_scale(lp));
    hermitian_part(&m)
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::from(0.5)
}

fn inner(x: &CMatrix, y: &CMatrix) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Remove the components along ker K = span{E_{N−1,N−1}, diag(1,…,1,0)}.
fn gauge_fix(drho: &CMatrix) -> (CMatrix, f64) {
    let n = drho.nrows();
    let mut out = drho.clone();
    let edge = out[(n - 1, n - 1)].re;
    out[(n - 1, n - 1)] = ZERO;
    let shift = (0..n - 1).map(|i| out[(i, i)].re).sum::<f64>() / (n - 1) as f64;
    for i in 0..n - 1 {
        out[(i, i)] -= C64::from(shift);
    }
    (out, edge.abs() + shift.abs() * ((n - 1) as f64).sqrt())
}

// ------------------------------------------------------------------ elements

/// l₀ = diag(d_k), d_0 = 0, d_k = (λ/√2)·Σ_{j≤k} 1/√j.
pub fn optimal_element_l0(n: usize, lambda_p: f64) -> Result<TruncatedOperator> {
    check_dim(n, 2)?;
    check_positive_scale(lambda_p)?;
    let mut diag = vec![0.0; n];
    for k in 1..n {
        diag[k] = diag[k - 1] + lambda_p / (2.0 * k as f64).sqrt();
    }
    TruncatedOperator::from_diagonal(&diag, lambda_p)
}

/// l₁ = √(aa† + a†a), l₂ = √(2(aa† − λ²)) (negative part clipped), l₃ = √(2(a†a + λ²)).
pub fn candidate_elements(n: usize, lambda_p: f64) -> Result<(TruncatedOperator, TruncatedOperator, TruncatedOperator)> {
    check_dim(n, 2)?;
    check_positive_scale(lambda_p)?;
    let (a, ad) = ops::ladder(n, lambda_p)?;
    let aad = &a * &ad;
    let ada = &ad * &a;
    let l2sq = lambda_p * lambda_p;
    let id = TruncatedOperator::identity(n, lambda_p)?;
    let l1 = ops::hermitian_function(&(&aad + &ada), |x| x.max(0.0).sqrt())?;
    let l2 = ops::hermitian_function(&(&aad - &id.scaled(C64::from(l2sq))), |x| (2.0 * x).max(0.0).sqrt())?;
    let l3 = ops::hermitian_function(&(&ada + &id.scaled(C64::from(l2sq))), |x| (2.0 * x).max(0.0).sqrt())?;
    Ok((l1, l2, l3))
}

/// ‖M aa† M† − ½a†a‖ / ‖½a†a‖ on the interior block, M = ∂_z A.
pub fn geodesic_residual(a: &TruncatedOperator) -> Result<f64> {
    let defect = hermitian_defect(a.entries());
    if defect > 1e-12 {
        return Err(Error::Contract(format!("geodesic residual needs a Hermitian operator, defect {defect:.3e}")));
    }
    let lp = a.lambda_p();
    let n = a.dim();
    check_dim(n, 2)?;
    let m = ops::deriv_z(a)?;
    let (low, up) = ops::ladder(n, lp)?;
    let left = m.entries() * (low.entries() * up.entries()) * m.entries().adjoint();
    let right = (up.entries() * low.entries()) * C64::from(0.5);
    let num = operator_norm(&interior(&(left - &right)));
    let den = operator_norm(&interior(&right));
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiemannComparison {
    /// λ Σ_{k=m+1}^{n} 1/√(2k).
    pub sum: f64,
    /// λ(√(2n+1) − √(2m+1)).
    pub integral: f64,
    pub ratio: f64,
}

pub fn riemann_comparison(m: usize, n: usize, lambda_p: f64) -> Result<RiemannComparison> {
    if m >= n {
        return Err(Error::InvalidParameter(format!("need m < n, got m = {m}, n = {n}")));
    }
    check_positive_scale(lambda_p)?;
    let sum = crate::spectral::dist_eigenstates(m, n, lambda_p);
    let integral = lambda_p * ((2 * n + 1) as f64).sqrt() - lambda_p * ((2 * m + 1) as f64).sqrt();
    Ok(RiemannComparison { sum, integral, ratio: sum / integral })
}

// ------------------------------------------------------------------ solves

/// Density difference |ψ⟩⟨ψ| − |φ⟩⟨φ| at truncation N.
pub fn state_difference(s1: &StateSpec, s2: &StateSpec, n: usize, lambda_p: f64) -> Result<CMatrix> {
    let p = s1.realize(n, lambda_p)?;
    let q = s2.realize(n, lambda_p)?;
    Ok(&p * p.adjoint() - &q * q.adjoint())
}

/// Maximize Re tr(Δρ A) over Hermitian A with seminorm(A) ≤ radius at N = dim Δρ.
pub fn solve_truncated(drho: &CMatrix, cfg: &SolverConfig) -> Result<TruncatedSolve> {
    cfg.validate()?;
    let n = drho.nrows();
    check_dim(n, 3)?;
    if !drho.is_square() || hermitian_defect(drho) > 1e-10 {
        return Err(Error::Contract("state difference must be a Hermitian square matrix".into()));
    }
    match cfg.method {
        SolverMethod::DiagonalLp => diagonal_lp(drho, cfg),
        SolverMethod::ProjectedAscent => projected_ascent(drho, cfg),
        SolverMethod::InteriorPoint => interior_point(drho, cfg),
    }
}

/// One solve per scheduled truncation; truncations too small for the states are skipped.
pub fn solve_schedule(s1: &StateSpec, s2: &StateSpec, cfg: &SolverConfig) -> Result<Vec<TruncatedSolve>> {
    cfg.validate()?;
    let mut out: Vec<TruncatedSolve> = Vec::new();
    let mut last_err = None;
    for &n in &cfg.schedule {
        let drho = match state_difference(s1, s2, n, cfg.lambda_p) {
            Ok(d) => d,
            Err(e @ Error::TruncationTooSmall(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let solve = solve_truncated(&drho, cfg)?;
        let agreed = out.last().is_some_and(|p| (p.value - solve.value).abs() < cfg.tol);
        out.push(solve);
        if agreed {
            break;
        }
    }
    if out.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::TruncationTooSmall("empty schedule".into())));
    }
    Ok(out)
}

/// Solver estimate of d_D, with the closed form attached when one exists.
pub fn solve_distance(s1: &StateSpec, s2: &StateSpec, cfg: &SolverConfig) -> Result<DistanceReport> {
    let solves = solve_schedule(s1, s2, cfg)?;
    Ok(distance_report(s1, s2, cfg, &solves))
}

/// Summarize the output of `solve_schedule`; `solves` must be non-empty.
pub fn distance_report(s1: &StateSpec, s2: &StateSpec, cfg: &SolverConfig, solves: &[TruncatedSolve]) -> DistanceReport {
    let last = solves.last().unwrap();
    let change = match solves.len() {
        1 => f64::INFINITY,
        k => (solves[k - 1].value - solves[k - 2].value).abs(),
    };
    let analytic = spectral_distance_closed_form(s1, s2, cfg.lambda_p).map(|d| d * cfg.radius);
    DistanceReport {
        value: last.value,
        method: Method::Solver,
        analytic,
        operator: Some(last.value),
        truncation: Some(last.truncation),
        residual: analytic.map_or(change, |a| (a - last.value).abs()),
        converged: change < cfg.tol && last.converged,
        per_truncation: solves
            .iter()
            .map(|s| TruncationValue { truncation: s.truncation, value: s.value })
            .collect(),
        gap_sign: None,
    }
}

// Greedy chain solution. Gap k (between d_k and d_{k+1}) is bounded by
// rλ/(√2√(k+1)) for k ≤ N−3 and saturated in the sign of the tail weight;
// the top gap is unconstrained and its tail is the edge weight.
fn diagonal_lp(drho: &CMatrix, cfg: &SolverConfig) -> Result<TruncatedSolve> {
    let n = drho.nrows();
    let lp = cfg.lambda_p;
    let w: Vec<f64> = (0..n).map(|i| drho[(i, i)].re).collect();
    let mut tail = vec![0.0; n + 1];
    for j in (0..n).rev() {
        tail[j] = tail[j + 1] + w[j];
    }
    let mut d = vec![0.0; n];
    for k in 0..n - 2 {
        let bound = cfg.radius * lp / (2.0 * (k + 1) as f64).sqrt();
        let t = tail[k + 1];
        d[k + 1] = d[k] + if t > 0.0 { bound } else if t < 0.0 { -bound } else { 0.0 };
    }
    d[n - 1] = d[n - 2];
    let value: f64 = (0..n).map(|j| w[j] * d[j]).sum();
    let edge = tail[n - 1].abs();
    let trace = if cfg.record_trace { vec![value] } else { Vec::new() };
    Ok(TruncatedSolve {
        truncation: n,
        value,
        element: TruncatedOperator::from_diagonal(&d, lp)?,
        iterations: n - 2,
        converged: edge <= cfg.tol,
        edge_weight: edge,
        trace,
    })
}

// ‖K‖ by power iteration on K*K from a fixed Hermitian start.
fn k_norm(n: usize, lp: f64) -> f64 {
    let mut a = CMatrix::from_fn(n, n, |i, j| C64::new(1.0 + ((i * 7 + j * 3) % 5) as f64, 0.0));
    a = hermitian_part(&a);
    let mut est = 0.0;
    for _ in 0..200 {
        let b = k_adjoint(&k_apply(&a, lp), lp);
        let nb = b.norm();
        if nb == 0.0 {
            break;
        }
        est = nb / a.norm();
        a = b / C64::from(nb);
    }
    est.sqrt()
}

// Soft-threshold the singular values of z by `shrink`.
fn shrink_singular(z: &CMatrix, shrink: f64) -> CMatrix {
    let eig = (z.adjoint() * z).symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, &s2) in eig.eigenvalues.iter().enumerate() {
        let s = s2.max(0.0).sqrt();
        let f = if s > shrink { 1.0 - shrink / s } else { 0.0 };
        scaled.column_mut(k).scale_mut(f);
    }
    z * scaled * v.adjoint()
}

// Chambolle-Pock on min −<Δρ, A> + ι{‖K A‖ ≤ r}, restarted from the epoch
// averages every RESTART_EVERY iterations. Every ten iterations the iterate is
// pushed radially onto the ball boundary and scored.
fn projected_ascent(drho: &CMatrix, cfg: &SolverConfig) -> Result<TruncatedSolve> {
    const CHECK_EVERY: usize = 10;
    const RESTART_EVERY: usize = 100;
    let n = drho.nrows();
    let lp = cfg.lambda_p;
    let r = cfg.radius;
    let (target, edge) = gauge_fix(drho);
    let norm_k = k_norm(n, lp) * 1.01;
    let tau = 0.95 * cfg.step_ratio / norm_k;
    let sigma = 0.95 / (cfg.step_ratio * norm_k);

    let mut a = CMatrix::zeros(n, n);
    let mut a_bar = a.clone();
    let mut y = CMatrix::zeros(n - 1, n - 1);
    let mut best = 0.0;
    let mut best_a = CMatrix::zeros(n, n);
    let mut last_gain = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    let mut sum_a = CMatrix::zeros(n, n);
    let mut sum_y = CMatrix::zeros(n - 1, n - 1);
    let mut epoch = 0usize;
    while iters < cfg.max_iters {
        iters += 1;
        let z = &y + k_apply(&a_bar, lp) * C64::from(sigma);
        y = shrink_singular(&z, sigma * r);
        let step = k_adjoint(&y, lp) - &target;
        let a_new = &a - step * C64::from(tau);
        a_bar = &a_new * C64::from(2.0) - &a;
        a = a_new;
        sum_a += &a;
        sum_y += &y;
        epoch += 1;
        if epoch == RESTART_EVERY {
            a = &sum_a / C64::from(epoch as f64);
            y = &sum_y / C64::from(epoch as f64);
            a_bar = a.clone();
            sum_a.fill(ZERO);
            sum_y.fill(ZERO);
            epoch = 0;
        }
        if cfg.record_trace {
            trace.push(inner(&target, &a));
        }
        if iters % CHECK_EVERY == 0 {
            let s = operator_norm(&k_apply(&a, lp));
            if s > 0.0 {
                let cand = inner(&target, &a) * r / s;
                if cand > best + cfg.tol {
                    best = cand;
                    best_a = &a * C64::from(r / s);
                    last_gain = iters;
                } else if cand > best {
                    best = cand;
                    best_a = &a * C64::from(r / s);
                }
            }
            if iters - last_gain >= cfg.stall_window && best > 0.0 {
                converged = true;
                break;
            }
        }
    }
    Ok(TruncatedSolve {
        truncation: n,
        value: best,
        element: TruncatedOperator::new(hermitian_part(&best_a), lp)?,
        iterations: iters,
        converged,
        edge_weight: edge,
        trace,
    })
}

// ------------------------------------------------------------ interior point

type Sparse = Vec<(usize, usize, C64)>;

// Orthonormal Hermitian basis without E_00 and E_{N−1,N−1} (the kernel gauge),
// each element with its sparse image under K/r.
struct Basis {
    elements: Vec<Sparse>,
    images: Vec<Sparse>,
}

impl Basis {
    fn new(n: usize, lp: f64, radius: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements: Vec<Sparse> = (1..n - 1).map(|j| vec![(j, j, ONE)]).collect();
        for j in 0..n {
            for k in j + 1..n {
                elements.push(vec![(j, k, C64::from(s)), (k, j, C64::from(s))]);
                elements.push(vec![(j, k, C64::new(0.0, s)), (k, j, C64::new(0.0, -s))]);
            }
        }
        let c = k_scale(lp) / radius;
        let images = elements.iter().map(|b| Self::image(b, n - 1, lp * c)).collect();
        Self { elements, images }
    }

    // [E_jk, a†] = λ√k E_{j,k−1} − λ√(j+1) E_{j+1,k}, cut to the m x m block
    fn image(b: &Sparse, m: usize, scale: f64) -> Sparse {
        let mut out: Sparse = Vec::with_capacity(4);
        let mut push = |r: usize, c: usize, v: C64| {
            if r < m && c < m {
                match out.iter_mut().find(|e| e.0 == r && e.1 == c) {
                    Some(e) => e.2 += v,
                    None => out.push((r, c, v)),
                }
            }
        };
        for &(j, k, v) in b {
            if k >= 1 {
                push(j, k - 1, v * (scale * (k as f64).sqrt()));
            }
            push(j + 1, k, -v * (scale * ((j + 1) as f64).sqrt()));
        }
        out.retain(|e| e.2 != ZERO);
        out
    }

    fn len(&self) -> usize {
        self.elements.len()
    }

    fn assemble(&self, x: &DVector<f64>, pick_images: bool, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        let parts = if pick_images { &self.images } else { &self.elements };
        for (xp, part) in x.iter().zip(parts) {
            for &(r, c, v) in part {
                m[(r, c)] += v * *xp;
            }
        }
        m
    }
}

struct BarrierPoint {
    w: CMatrix,
    v: CMatrix,
    z: CMatrix,
}

// W = (I − XX†)⁻¹ and the products the derivatives of log det(I − XX†) need; None outside the ball
fn barrier_point(x: &CMatrix) -> Option<BarrierPoint> {
    let m = x.nrows();
    let chol = Cholesky::new(CMatrix::identity(m, m) - x * x.adjoint())?;
    let w = chol.inverse();
    let v = &w * x;
    let z = x.adjoint() * &v;
    Some(BarrierPoint { w, v, z })
}

fn is_strictly_inside(x: &CMatrix) -> bool {
    let m = x.nrows();
    Cholesky::new(CMatrix::identity(m, m) - x * x.adjoint()).is_some()
}

// Barrier method on max t<c, x> + log det(I − X X†), X = K(A)/r. The
// duality gap at a central point is 2(N−1)/t; the final point is pushed
// radially onto the ball boundary.
fn interior_point(drho: &CMatrix, cfg: &SolverConfig) -> Result<TruncatedSolve> {
    const GROWTH: f64 = 50.0;
    // loose centering is enough: the returned point is rescaled onto the boundary
    const CENTERED: f64 = 0.05;
    let n = drho.nrows();
    let m = n - 1;
    let lp = cfg.lambda_p;
    let (target, edge) = gauge_fix(drho);
    let basis = Basis::new(n, lp, cfg.radius);
    let p = basis.len();
    let cost = DVector::from_iterator(
        p,
        basis.elements.iter().map(|b| b.iter().map(|&(r, c, v)| (target[(c, r)] * v).re).sum::<f64>()),
    );
    let nu = 2.0 * m as f64;

    let mut x = DVector::<f64>::zeros(p);
    let mut t = 1.0 / cost.norm().max(1e-300);
    let mut newton = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    'outer: loop {
        loop {
            if newton >= cfg.max_iters {
                break 'outer;
            }
            let xm = basis.assemble(&x, true, m);
            let bp = barrier_point(&xm).ok_or_else(|| Error::Contract("barrier iterate left the ball".into()))?;
            let grad = barrier_gradient(&basis, &bp, &cost, t);
            let mut hess = barrier_neg_hessian(&basis, &bp);
            let step = match Cholesky::new(hess.clone()) {
                Some(ch) => ch.solve(&grad),
                None => {
                    let bump = 1e-12 * hess.diagonal().amax();
                    for i in 0..p {
                        hess[(i, i)] += bump;
                    }
                    Cholesky::new(hess)
                        .ok_or_else(|| Error::Contract("barrier Hessian is not definite".into()))?
                        .solve(&grad)
                }
            };
            newton += 1;
            let dec2 = grad.dot(&step).max(0.0);
            let dec = dec2.sqrt();
            // damped step, always inside for a self-concordant barrier
            let mut s = if dec < 0.25 { 1.0 } else { 1.0 / (1.0 + dec) };
            let mut trial = &x + &step * s;
            while !is_strictly_inside(&basis.assemble(&trial, true, m)) {
                s *= 0.5;
                if s < 1e-12 {
                    return Err(Error::Contract("barrier line search failed".into()));
                }
                trial = &x + &step * s;
            }
            x = trial;
            if cfg.record_trace {
                trace.push(cost.dot(&x));
            }
            if dec2 / 2.0 < CENTERED {
                break;
            }
        }
        if nu / t < cfg.tol {
            converged = true;
            break;
        }
        t *= GROWTH;
    }
    let a = basis.assemble(&x, false, n);
    let a = hermitian_part(&a);
    let s = operator_norm(&k_apply(&a, lp)) / cfg.radius;
    let (value, element) = if s > 0.0 {
        (cost.dot(&x) / s, &a * C64::from(1.0 / s))
    } else {
        (0.0, CMatrix::zeros(n, n))
    };
    Ok(TruncatedSolve {
        truncation: n,
        value,
        element: TruncatedOperator::new(element, lp)?,
        iterations: newton,
        converged,
        edge_weight: edge,
        trace,
    })
}

fn barrier_gradient(basis: &Basis, bp: &BarrierPoint, cost: &DVector<f64>, t: f64) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis.images.iter().zip(cost.iter()).map(|(img, &c)| {
            let g: f64 = img.iter().map(|&(r, cc, v)| (v.conj() * bp.v[(r, cc)]).re).sum();
            t * c - 2.0 * g
        }),
    )
}

// −∇² of log det(I − XX†) in the basis: 2 Re Σ [β̄ α W_{r'r}(Z_{cc'} + δ_{cc'}) + β̄ ᾱ V_{r'c} V_{rc'}].
// Computed as H = 2 Re Gᴴ T with T = M₁G + M₂Ḡ, G the sparse images, so the dense work runs down columns.
fn barrier_neg_hessian(basis: &Basis, bp: &BarrierPoint) -> DMatrix<f64> {
    let p = basis.len();
    let m = bp.w.nrows();
    let mm = m * m;
    // column-major storage: entry (r, c) at r + c m
    let (w, v) = (bp.w.as_slice(), bp.v.as_slice());
    let zi = (&bp.z + CMatrix::identity(m, m)).as_slice().to_vec();
    let mut t = vec![ZERO; mm * p];
    for (col, img) in t.chunks_exact_mut(mm).zip(&basis.images) {
        for &(re, ce, alpha) in img {
            let ac = alpha.conj();
            let (w_re, v_ce) = (&w[re * m..(re + 1) * m], &v[ce * m..(ce + 1) * m]);
            for cf in 0..m {
                let a1 = alpha * zi[ce + cf * m];
                let a2 = ac * v[re + cf * m];
                for ((out, &wr), &vc) in col[cf * m..(cf + 1) * m].iter_mut().zip(w_re).zip(v_ce) {
                    *out += a1 * wr + a2 * vc;
                }
            }
        }
    }
    let mut h = DMatrix::<f64>::zeros(p, p);
    for (i, col) in t.chunks_exact(mm).enumerate() {
        for j in 0..=i {
            let acc: f64 = basis.images[j].iter().map(|&(rf, cf, beta)| (beta.conj() * col[rf + cf * m]).re).sum();
            h[(i, j)] = 2.0 * acc;
            h[(j, i)] = 2.0 * acc;
        }
    }
    h
}
