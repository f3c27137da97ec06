//! Pure states: eigenstates, translated eigenstates, two-level sphere states
//! and raw coefficient vectors, plus their realization at a given truncation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ops::{self, CVector, TruncatedOperator, ZERO};
use crate::tensor::{product_vector, TwoPointOperator};
use crate::C64;

/// Leakage tolerance used when a translation has to be realized without an
/// explicit tolerance.
pub const DEFAULT_REALIZE_TOL: f64 = 1e-8;

const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Eigenstate { m: usize },
    Coherent { m: usize, kappa: [f64; 2] },
    Sphere { m: usize, n: usize, x: f64, y: f64, z: f64 },
    Vector { coeffs: Vec<C64> },
}

impl StateSpec {
    pub fn sphere(m: usize, n: usize, x: f64, y: f64, z: f64) -> Result<Self> {
        let s = StateSpec::Sphere { m, n, x, y, z };
        s.validate()?;
        Ok(s)
    }

    pub fn vector(coeffs: Vec<C64>) -> Result<Self> {
        let s = StateSpec::Vector { coeffs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Eigenstate { .. } => Ok(()),
            StateSpec::Coherent { kappa, .. } => {
                if kappa.iter().all(|k| k.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("translation must be finite".into()))
                }
            }
            StateSpec::Sphere { m, n, x, y, z } => {
                if n <= m {
                    return Err(Error::Domain(format!("sphere state needs n > m, got m = {m}, n = {n}")));
                }
                let r = x * x + y * y + z * z;
                if !r.is_finite() || (r - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Domain(format!("sphere point ({x}, {y}, {z}) is off the unit sphere")));
                }
                Ok(())
            }
            StateSpec::Vector { coeffs } => {
                let r: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
                if coeffs.is_empty() || !r.is_finite() || (r.sqrt() - 1.0).abs() > UNIT_TOL {
                    return Err(Error::Domain(format!("coefficient vector has norm {}, expected 1", r.sqrt())));
                }
                Ok(())
            }
        }
    }

    /// Level and translation when the state is ω_m or a translate of it.
    pub fn coherent_family(&self) -> Option<(usize, [f64; 2])> {
        match *self {
            StateSpec::Eigenstate { m } => Some((m, [0.0, 0.0])),
            StateSpec::Coherent { m, kappa } => Some((m, kappa)),
            _ => None,
        }
    }

    /// Smallest truncation at which the state can be realized at all.
    pub fn min_truncation(&self) -> usize {
        match self {
            StateSpec::Eigenstate { m } => m + 1,
            StateSpec::Coherent { m, .. } => 4 * (m + 1),
            StateSpec::Sphere { n, .. } => n + 1,
            StateSpec::Vector { coeffs } => coeffs.len(),
        }
    }

    pub fn realize(&self, n: usize, lambda_p: f64) -> Result<CVector> {
        self.realize_with_tol(n, lambda_p, DEFAULT_REALIZE_TOL)
    }

    pub fn realize_with_tol(&self, n: usize, lambda_p: f64, tol: f64) -> Result<CVector> {
        self.validate()?;
        let too_small = |idx: usize| Error::TruncationTooSmall(format!("{self} needs level {idx} but N = {n}"));
        match self {
            StateSpec::Eigenstate { m } => {
                if *m >= n {
                    return Err(too_small(*m));
                }
                Ok(unit(n, *m))
            }
            StateSpec::Coherent { m, kappa } => {
                // the leakage check of the translation only covers the first N/4 columns
                if *m >= (n / 4).max(1) {
                    return Err(Error::TruncationTooSmall(format!("{self} needs N > {}, got N = {n}", 4 * m)));
                }
                let u = ops::displacement(*kappa, n, lambda_p, tol)?;
                Ok(u.entries().column(*m).into_owned())
            }
            StateSpec::Sphere { m, n: k, x, y, z } => {
                if *k >= n {
                    return Err(too_small(*k));
                }
                let mut v = CVector::zeros(n);
                let phi = if *x == 0.0 && *y == 0.0 { 0.0 } else { y.atan2(*x) };
                v[*m] = C64::from(((1.0 + z) / 2.0).max(0.0).sqrt());
                v[*k] = C64::from_polar(((1.0 - z) / 2.0).max(0.0).sqrt(), phi);
                Ok(v)
            }
            StateSpec::Vector { coeffs } => {
                if let Some(idx) = coeffs.iter().rposition(|c| *c != ZERO) {
                    if idx >= n {
                        return Err(too_small(idx));
                    }
                }
                Ok(CVector::from_fn(n, |i, _| coeffs.get(i).copied().unwrap_or(ZERO)))
            }
        }
    }
}

fn unit(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = C64::from(1.0);
    v
}

/// <ψ, A ψ> with ψ realized at A's truncation.
pub fn evaluate(spec: &StateSpec, a: &TruncatedOperator) -> Result<C64> {
    let psi = spec.realize(a.dim(), a.lambda_p())?;
    Ok(a.expectation(&psi))
}

/// <ψ1⊗ψ2, B ψ1⊗ψ2>.
pub fn evaluate_pair(spec1: &StateSpec, spec2: &StateSpec, b: &TwoPointOperator) -> Result<C64> {
    let n = b.truncation();
    let v = product_vector(&spec1.realize(n, b.lambda_p())?, &spec2.realize(n, b.lambda_p())?);
    b.expectation(&v)
}

/// Bloch coordinates of a state supported on levels m and n.
pub fn sphere_coords(spec: &StateSpec, m: usize, n: usize) -> Result<[f64; 3]> {
    if m == n {
        return Err(Error::Domain("sphere coordinates need two distinct levels".into()));
    }
    if matches!(spec, StateSpec::Coherent { kappa, .. } if kappa != &[0.0, 0.0]) {
        return Err(Error::Domain("translated states are not supported on two levels".into()));
    }
    let size = spec.min_truncation().max(m + 1).max(n + 1);
    let v = spec.realize(size, 1.0)?;
    let stray = v.iter().enumerate().any(|(k, c)| k != m && k != n && c.norm() > 1e-14);
    if stray {
        return Err(Error::Domain(format!("state has weight outside levels {m} and {n}")));
    }
    let cross = v[m].conj() * v[n];
    Ok([2.0 * cross.re, 2.0 * cross.im, v[m].norm_sqr() - v[n].norm_sqr()])
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Eigenstate { m } => write!(f, "eig:{m}"),
            StateSpec::Coherent { m, kappa } => write!(f, "coh:{m}:{},{}", kappa[0], kappa[1]),
            StateSpec::Sphere { m, n, x, y, z } => write!(f, "sph:{m},{n}:{x},{y},{z}"),
            StateSpec::Vector { coeffs } => {
                write!(f, "vec:")?;
                for (k, c) in coeffs.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    if c.im == 0.0 {
                        write!(f, "{}", c.re)?;
                    } else if c.im < 0.0 {
                        write!(f, "{}-{}i", c.re, -c.im)?;
                    } else {
                        write!(f, "{}+{}i", c.re, c.im)?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} `{s}`")))
}

fn parse_list(s: &str, len: usize, what: &str) -> Result<Vec<f64>> {
    let v = s.split(',').map(|t| parse_num::<f64>(t, what)).collect::<Result<Vec<_>>>()?;
    if v.len() != len {
        return Err(Error::Parse(format!("expected {len} values for {what}, got `{s}`")));
    }
    Ok(v)
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("missing `:` in state `{s}`")))?;
        let spec = match tag {
            "eig" => StateSpec::Eigenstate { m: parse_num(rest, "level")? },
            "coh" => {
                let (m, k) = rest.split_once(':').ok_or_else(|| Error::Parse(format!("expected coh:m:k1,k2, got `{s}`")))?;
                let k = parse_list(k, 2, "translation")?;
                StateSpec::Coherent { m: parse_num(m, "level")?, kappa: [k[0], k[1]] }
            }
            "sph" => {
                let (levels, p) =
                    rest.split_once(':').ok_or_else(|| Error::Parse(format!("expected sph:m,n:x,y,z, got `{s}`")))?;
                let (m, n) = levels
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("expected two levels in `{levels}`")))?;
                let p = parse_list(p, 3, "sphere point")?;
                StateSpec::Sphere { m: parse_num(m, "level")?, n: parse_num(n, "level")?, x: p[0], y: p[1], z: p[2] }
            }
            "vec" => {
                let coeffs = rest.split(',').map(|t| parse_num::<C64>(t, "coefficient")).collect::<Result<Vec<_>>>()?;
                StateSpec::Vector { coeffs }
            }
            other => return Err(Error::Parse(format!("unknown state kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
