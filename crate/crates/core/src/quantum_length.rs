//! Quantum square-length d_L², quantum length d_L and the modified length
//! d'_L between separable two-point states, each by closed form (when one
//! exists) and by evaluation of L² or L on the truncated two-point space.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::{check_positive_scale, level_energy};
use crate::states::{evaluate_pair, StateSpec};
use crate::tensor::{self, TwoPointOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    OperatorEvaluation,
    Solver,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::OperatorEvaluation => "operator-evaluation",
            Method::Solver => "solver",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationValue {
    pub truncation: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub value: f64,
    pub method: Method,
    pub analytic: Option<f64>,
    pub operator: Option<f64>,
    /// Largest truncation that contributed to `operator`.
    pub truncation: Option<usize>,
    /// |analytic - operator| when both exist, else the last change along the schedule.
    pub residual: f64,
    pub converged: bool,
    pub per_truncation: Vec<TruncationValue>,
    /// Sign of d_L² - Λ⁻² (modified length only).
    pub gap_sign: Option<i8>,
}

/// Truncations to evaluate on, and the stopping tolerance between successive ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalConfig {
    pub lambda_p: f64,
    pub schedule: Vec<usize>,
    pub tol: f64,
}

impl EvalConfig {
    pub fn new(lambda_p: f64, schedule: Vec<usize>, tol: f64) -> Result<Self> {
        check_positive_scale(lambda_p)?;
        validate_schedule(&schedule)?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tol must lie in (0, 1), got {tol}")));
        }
        Ok(Self { lambda_p, schedule, tol })
    }

    /// N, 2N, 4N, ... up to `max`.
    pub fn doubling(lambda_p: f64, start: usize, max: usize, tol: f64) -> Result<Self> {
        let mut schedule = vec![start];
        while schedule.last().unwrap() * 2 <= max {
            schedule.push(schedule.last().unwrap() * 2);
        }
        Self::new(lambda_p, schedule, tol)
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { lambda_p: 1.0, schedule: vec![32, 64, 128], tol: 1e-8 }
    }
}

pub(crate) fn validate_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty truncation schedule".into()));
    }
    if let Some(&n) = schedule.iter().find(|&&n| n < 4) {
        return Err(Error::InvalidTruncation { n, reason: "need N >= 4".into() });
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("schedule {schedule:?} is not strictly increasing")));
    }
    Ok(())
}

// ---------------------------------------------------------------- closed forms

/// d_L² between sphere states of the same two levels, valid for n > m + 1.
pub fn sphere_d_l2(m: usize, n: usize, z1: f64, z2: f64, lambda_p: f64) -> Result<f64> {
    if n <= m + 1 {
        return Err(Error::FormulaInapplicable(format!(
            "sphere closed form needs n > m + 1 (coordinate expectations vanish), got m = {m}, n = {n}"
        )));
    }
    let (em, en) = (level_energy(m, lambda_p), level_energy(n, lambda_p));
    Ok(2.0 * (em + en) + (z1 + z2) * (em - en))
}

/// d'_L² for the pair with sphere heights z and -z: 2(E_m + E_n - √((E_m+E_n)² - z²(E_m-E_n)²)).
pub fn sphere_opposite_mod_sq(m: usize, n: usize, z: f64, lambda_p: f64) -> Result<f64> {
    let d = sphere_d_l2(m, n, z, -z, lambda_p)?;
    let (em, en) = (level_energy(m, lambda_p), level_energy(n, lambda_p));
    let root = ((em + en).powi(2) - z * z * (em - en).powi(2)).max(0.0).sqrt();
    debug_assert!((d - 2.0 * (em + en)).abs() < 1e-12 * d.max(1.0));
    Ok(2.0 * (em + en - root))
}

fn same_sphere_levels(s1: &StateSpec, s2: &StateSpec) -> Option<(usize, usize, f64, f64)> {
    match (s1, s2) {
        (StateSpec::Sphere { m, n, z, .. }, StateSpec::Sphere { m: m2, n: n2, z: z2, .. }) if m == m2 && n == n2 => {
            Some((*m, *n, *z, *z2))
        }
        _ => None,
    }
}

fn kappa_dist_sq(k1: [f64; 2], k2: [f64; 2]) -> f64 {
    (k1[0] - k2[0]).powi(2) + (k1[1] - k2[1]).powi(2)
}

/// Closed-form d_L², when the pair belongs to a family that has one.
pub fn d_l2_closed_form(s1: &StateSpec, s2: &StateSpec, lambda_p: f64) -> Option<f64> {
    if let (Some((m, k1)), Some((n, k2))) = (s1.coherent_family(), s2.coherent_family()) {
        return Some(2.0 * level_energy(m, lambda_p) + 2.0 * level_energy(n, lambda_p) + kappa_dist_sq(k1, k2));
    }
    let (m, n, z1, z2) = same_sphere_levels(s1, s2)?;
    sphere_d_l2(m, n, z1, z2, lambda_p).ok()
}

/// Closed-form d'_L, when the pair belongs to a family that has one.
pub fn d_l_mod_closed_form(s1: &StateSpec, s2: &StateSpec, lambda_p: f64) -> Option<f64> {
    if let (Some((m, k1)), Some((n, k2))) = (s1.coherent_family(), s2.coherent_family()) {
        let gap = (2.0 * level_energy(m, lambda_p)).sqrt() - (2.0 * level_energy(n, lambda_p)).sqrt();
        return Some((gap * gap + kappa_dist_sq(k1, k2)).sqrt());
    }
    let (m, n, z1, z2) = same_sphere_levels(s1, s2)?;
    let cross = sphere_d_l2(m, n, z1, z2, lambda_p).ok()?;
    let self1 = sphere_d_l2(m, n, z1, z1, lambda_p).ok()?;
    let self2 = sphere_d_l2(m, n, z2, z2, lambda_p).ok()?;
    Some((cross - geometric_mean(self1, self2)).abs().sqrt())
}

/// d_L for the one family where it is known exactly: both states equal to the same translate of ω_0.
pub fn d_l_closed_form(s1: &StateSpec, s2: &StateSpec, lambda_p: f64) -> Option<f64> {
    match (s1.coherent_family(), s2.coherent_family()) {
        (Some((0, k1)), Some((0, k2))) if k1 == k2 => Some(2.0 * level_energy(0, lambda_p).sqrt()),
        _ => None,
    }
}

// ---------------------------------------------------------- operator evaluation

struct Sweep {
    points: Vec<TruncationValue>,
    converged: bool,
    last_change: f64,
    extra: Vec<f64>,
}

/// Evaluate `f(N)` along the schedule until two successive values agree.
/// Truncations too small to realize the states are skipped.
fn sweep<F>(cfg: &EvalConfig, mut f: F) -> Result<Sweep>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let mut points: Vec<TruncationValue> = Vec::new();
    let mut extra = Vec::new();
    let mut last_err = None;
    let mut last_change = f64::INFINITY;
    for &n in &cfg.schedule {
        match f(n) {
            Ok((v, x)) => {
                if let Some(prev) = points.last() {
                    last_change = (v - prev.value).abs();
                }
                points.push(TruncationValue { truncation: n, value: v });
                extra.push(x);
                if last_change < cfg.tol {
                    return Ok(Sweep { points, converged: true, last_change, extra });
                }
            }
            Err(e @ Error::TruncationTooSmall(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::TruncationTooSmall("empty schedule".into())));
    }
    Ok(Sweep { points, converged: false, last_change, extra })
}

fn l2_value(s1: &StateSpec, s2: &StateSpec, op: &TwoPointOperator) -> Result<f64> {
    Ok(evaluate_pair(s1, s2, op)?.re)
}

fn assemble(analytic: Option<f64>, sweep: Option<Sweep>) -> Result<DistanceReport> {
    let (operator, truncation, converged, change, per_truncation) = match sweep {
        Some(s) => {
            let last = *s.points.last().unwrap();
            (Some(last.value), Some(last.truncation), s.converged, s.last_change, s.points)
        }
        None => (None, None, false, f64::INFINITY, Vec::new()),
    };
    let (value, method) = match (analytic, operator) {
        (Some(a), _) => (a, Method::Analytic),
        (None, Some(o)) => (o, Method::OperatorEvaluation),
        (None, None) => return Err(Error::UnsupportedPair("no closed form and no feasible truncation".into())),
    };
    let residual = match (analytic, operator) {
        (Some(a), Some(o)) => (a - o).abs(),
        (None, Some(_)) => change,
        _ => 0.0,
    };
    Ok(DistanceReport {
        value,
        method,
        analytic,
        operator,
        truncation,
        residual,
        converged: converged || (analytic.is_some() && operator.is_none()),
        per_truncation,
        gap_sign: None,
    })
}

/// Quantum square-length (φ⊗φ̃)(L²).
pub fn d_l2(s1: &StateSpec, s2: &StateSpec, cfg: &EvalConfig) -> Result<DistanceReport> {
    let analytic = d_l2_closed_form(s1, s2, cfg.lambda_p);
    let sw = sweep(cfg, |n| {
        let op = tensor::length_sq(n, cfg.lambda_p)?;
        Ok((l2_value(s1, s2, &op)?, 0.0))
    });
    assemble(analytic, optional_sweep(sw, analytic.is_some())?)
}

/// Quantum length (φ⊗φ̃)(L).
pub fn d_l(s1: &StateSpec, s2: &StateSpec, cfg: &EvalConfig) -> Result<DistanceReport> {
    let analytic = d_l_closed_form(s1, s2, cfg.lambda_p);
    let sw = sweep(cfg, |n| {
        let op = tensor::length(n, cfg.lambda_p)?;
        Ok((l2_value(s1, s2, &op)?, 0.0))
    });
    assemble(analytic, optional_sweep(sw, analytic.is_some())?)
}

/// Λ⁻² = √(d_L²(φ, φ) d_L²(φ̃, φ̃)).
pub fn lambda_inv2(s1: &StateSpec, s2: &StateSpec, cfg: &EvalConfig) -> Result<f64> {
    let a = d_l2(s1, s1, cfg)?.value;
    let b = d_l2(s2, s2, cfg)?.value;
    Ok(geometric_mean(a, b))
}

// exact when both arguments agree, so that d'_L(φ, φ) is exactly zero
fn geometric_mean(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        (a * b).sqrt()
    }
}

/// Modified quantum length √|d_L² - Λ⁻²|, reporting the sign of the gap.
pub fn d_l_mod(s1: &StateSpec, s2: &StateSpec, cfg: &EvalConfig) -> Result<DistanceReport> {
    let lp = cfg.lambda_p;
    let analytic = d_l_mod_closed_form(s1, s2, lp);
    let sw = sweep(cfg, |n| {
        let op = tensor::length_sq(n, lp)?;
        let cross = l2_value(s1, s2, &op)?;
        let inv = geometric_mean(l2_value(s1, s1, &op)?, l2_value(s2, s2, &op)?);
        Ok(((cross - inv).abs().sqrt(), cross - inv))
    });
    let sw = optional_sweep(sw, analytic.is_some())?;
    let gap = match &sw {
        Some(s) => *s.extra.last().unwrap(),
        None => {
            let cross = d_l2_closed_form(s1, s2, lp).unwrap_or(0.0);
            let inv = match (d_l2_closed_form(s1, s1, lp), d_l2_closed_form(s2, s2, lp)) {
                (Some(a), Some(b)) => geometric_mean(a, b),
                _ => cross,
            };
            cross - inv
        }
    };
    let mut report = assemble(analytic, sw)?;
    report.gap_sign = Some(if gap > 0.0 {
        1
    } else if gap < 0.0 {
        -1
    } else {
        0
    });
    Ok(report)
}

// With a closed form in hand, an infeasible schedule only drops the cross-check.
fn optional_sweep(sw: Result<Sweep>, have_analytic: bool) -> Result<Option<Sweep>> {
    match sw {
        Ok(s) => Ok(Some(s)),
        Err(Error::TruncationTooSmall(_)) if have_analytic => Ok(None),
        Err(e) => Err(e),
    }
}
