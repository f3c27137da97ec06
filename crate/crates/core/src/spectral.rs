//! Closed-form spectral distances on the Moyal plane, the doubled triple
//! (two sheets at internal distance 1/Λ) and the high-energy comparison with
//! the modified quantum length.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ops::{check_positive_scale, level_energy};
use crate::quantum_length::sphere_opposite_mod_sq;
use crate::states::StateSpec;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// d_D(ω_m, ω_n) = (λ_P/√2) Σ_{k=min+1}^{max} 1/√k.
pub fn dist_eigenstates(m: usize, n: usize, lambda_p: f64) -> f64 {
    let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
    let s: f64 = (lo + 1..=hi).map(|k| 1.0 / (k as f64).sqrt()).sum();
    lambda_p * FRAC_1_SQRT_2 * s
}

/// Distance between two translates of the same state: |κ - κ̃|.
pub fn dist_translates(k1: [f64; 2], k2: [f64; 2]) -> f64 {
    (k1[0] - k2[0]).hypot(k1[1] - k2[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceBounds {
    /// Interval containing d_D(α_κ ω_m, α_κ̃ ω_n), from the triangle inequality.
    pub lower: f64,
    pub upper: f64,
    /// Integral-comparison bracket of d_D(ω_m, ω_n), present only when well ordered.
    pub eigen_bracket: Option<[f64; 2]>,
}

/// λ_P(√(2(n+1)) - √(2(m+1))) and λ_P(√(2n) - (1+2m)/√(2(m+1))), possibly inverted.
pub fn eigen_bracket_raw(m: usize, n: usize, lambda_p: f64) -> [f64; 2] {
    let (mf, nf) = (m as f64, n as f64);
    let lower = lambda_p * ((2.0 * (nf + 1.0)).sqrt() - (2.0 * (mf + 1.0)).sqrt());
    let upper = lambda_p * ((2.0 * nf).sqrt() - (1.0 + 2.0 * mf) / (2.0 * (mf + 1.0)).sqrt());
    [lower, upper]
}

pub fn dist_bounds(m: usize, n: usize, k1: [f64; 2], k2: [f64; 2], lambda_p: f64) -> Result<DistanceBounds> {
    if m > n {
        return Err(Error::InvalidParameter(format!("dist_bounds needs m <= n, got m = {m}, n = {n}")));
    }
    let d = dist_eigenstates(m, n, lambda_p);
    let k = dist_translates(k1, k2);
    let [lo, hi] = eigen_bracket_raw(m, n, lambda_p);
    Ok(DistanceBounds { lower: (d - k).abs(), upper: d + k, eigen_bracket: (m < n && lo <= hi).then_some([lo, hi]) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub n: usize,
    pub d_mod: f64,
    pub d_lower: f64,
    pub d_upper: f64,
    /// (d_D - d'_L) / d'_L at the two ends of the d_D interval.
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

impl RatioPoint {
    /// Largest |ratio| compatible with the interval.
    pub fn magnitude(&self) -> f64 {
        self.ratio_lower.abs().max(self.ratio_upper.abs())
    }
}

/// Relative gap between d_D(α_κ ω_m, α_κ̃ ω_n) and d'_L for n = m+1..=n_max.
/// With κ = κ̃ the interval collapses to the exact value.
pub fn ratio_convergence(m: usize, k1: [f64; 2], k2: [f64; 2], n_max: usize, lambda_p: f64) -> Result<Vec<RatioPoint>> {
    check_positive_scale(lambda_p)?;
    if n_max <= m {
        return Err(Error::InvalidParameter(format!("need n_max > m, got m = {m}, n_max = {n_max}")));
    }
    let k = dist_translates(k1, k2);
    let mut d = 0.0;
    let mut out = Vec::with_capacity(n_max - m);
    for n in m + 1..=n_max {
        d += lambda_p * FRAC_1_SQRT_2 / (n as f64).sqrt();
        let gap = (2.0 * level_energy(n, lambda_p)).sqrt() - (2.0 * level_energy(m, lambda_p)).sqrt();
        let d_mod = (gap * gap + k * k).sqrt();
        let (lo, hi) = ((d - k).abs(), d + k);
        out.push(RatioPoint {
            n,
            d_mod,
            d_lower: lo,
            d_upper: hi,
            ratio_lower: (lo - d_mod) / d_mod,
            ratio_upper: (hi - d_mod) / d_mod,
        });
    }
    Ok(out)
}

/// d_D between the sphere states with heights z and -z: |z| d_D(ω_m, ω_n).
pub fn dist_sphere_pair(m: usize, n: usize, z: f64, lambda_p: f64) -> Result<f64> {
    if n <= m {
        return Err(Error::InvalidParameter(format!("need n > m, got m = {m}, n = {n}")));
    }
    if z.is_nan() || z.abs() > 1.0 {
        return Err(Error::Domain(format!("sphere height must lie in [-1, 1], got {z}")));
    }
    Ok(z.abs() * dist_eigenstates(m, n, lambda_p))
}

/// √(1 + √(1 - z²)), the high-energy limit of d_D / d'_L on opposite sphere states.
pub fn sphere_ratio_target(z: f64) -> f64 {
    (1.0 + (1.0 - z * z).max(0.0).sqrt()).sqrt()
}

/// The variant with z instead of z² under the inner root; agrees with
/// `sphere_ratio_target` only at z = 0 and z = 1.
pub fn sphere_ratio_target_printed(z: f64) -> f64 {
    (1.0 + (1.0 - z).max(0.0).sqrt()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereRatio {
    /// (n, d_D / d'_L) for n = m+2..=n_max.
    pub series: Vec<(usize, f64)>,
    pub target: f64,
}

pub fn sphere_ratio_limit(m: usize, z: f64, n_max: usize, lambda_p: f64) -> Result<SphereRatio> {
    check_positive_scale(lambda_p)?;
    if z == 0.0 {
        return Err(Error::UndefinedLimit("d'_L vanishes identically at z = 0".into()));
    }
    if z.is_nan() || z.abs() > 1.0 {
        return Err(Error::Domain(format!("sphere height must lie in [-1, 1], got {z}")));
    }
    if n_max < m + 2 {
        return Err(Error::InvalidParameter(format!("need n_max >= m + 2, got m = {m}, n_max = {n_max}")));
    }
    let mut d = dist_eigenstates(m, m + 1, lambda_p);
    let mut series = Vec::with_capacity(n_max - m - 1);
    for n in m + 2..=n_max {
        d += lambda_p * FRAC_1_SQRT_2 / (n as f64).sqrt();
        let mod_len = sphere_opposite_mod_sq(m, n, z, lambda_p)?.sqrt();
        series.push((n, z.abs() * d / mod_len));
    }
    Ok(SphereRatio { series, target: sphere_ratio_target(z) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubledTripleParams {
    pub lambda_cap: f64,
}

impl DoubledTripleParams {
    pub fn new(lambda_cap: f64) -> Result<Self> {
        if !(lambda_cap > 0.0 && lambda_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!("Λ must be positive, got {lambda_cap}")));
        }
        Ok(Self { lambda_cap })
    }

    /// Distance between the two sheets over the same state.
    pub fn internal_distance(&self) -> f64 {
        1.0 / self.lambda_cap
    }
}

/// Λ = 1/√(d_L²(ω_m, ω_m)) = 1/(λ_P √(4m+2)).
pub fn fix_lambda(m: usize, lambda_p: f64) -> Result<DoubledTripleParams> {
    check_positive_scale(lambda_p)?;
    DoubledTripleParams::new(1.0 / (4.0 * level_energy(m, lambda_p)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sheet {
    First,
    Second,
}

/// Exact d_D for pairs in the analytically known families: translates of one
/// state, or eigenstates sharing one translation.
pub fn spectral_distance_closed_form(s1: &StateSpec, s2: &StateSpec, lambda_p: f64) -> Option<f64> {
    if s1 == s2 {
        return Some(0.0);
    }
    let (m, k1) = s1.coherent_family()?;
    let (n, k2) = s2.coherent_family()?;
    if m == n {
        Some(dist_translates(k1, k2))
    } else if k1 == k2 {
        Some(dist_eigenstates(m, n, lambda_p))
    } else {
        None
    }
}

/// Combine a spectral distance with the sheet data: same sheet keeps d_D,
/// opposite sheets give √(d_D² + 1/Λ²).
pub fn doubled_from(d_d: f64, same_sheet: bool, params: &DoubledTripleParams) -> f64 {
    if same_sheet {
        d_d
    } else {
        d_d.hypot(params.internal_distance())
    }
}

pub fn doubled_distance(
    (s1, sheet1): (&StateSpec, Sheet),
    (s2, sheet2): (&StateSpec, Sheet),
    params: &DoubledTripleParams,
    lambda_p: f64,
) -> Result<f64> {
    let d = spectral_distance_closed_form(s1, s2, lambda_p).ok_or_else(|| {
        Error::UnsupportedPair(format!("no closed-form spectral distance between {s1} and {s2}; use the solver"))
    })?;
    Ok(doubled_from(d, sheet1 == sheet2, params))
}
