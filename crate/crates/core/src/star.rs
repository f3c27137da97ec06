//! Moyal product of functions sampled on a periodic square grid.
//!
//! The twisted convolution is evaluated in a mixed representation: both
//! factors are Fourier transformed in x₂ only, each pair of x₂-frequencies
//! (p₂, q₂) multiplies the x₁-transform by the phase e^{∓iθ k₁ q₂/2} (resp.
//! e^{±iθ k₁ p₂/2}), and the pointwise product in x₁ lands on frequency p₂+q₂.
//! Pairs whose spectral weight is negligible are skipped.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

/// Fraction of the half-width used for every sup-norm comparison.
pub const WINDOW_FRACTION: f64 = 0.6;
const MIN_RESOLUTION: usize = 64;
// pairs below this fraction of the largest weight product are skipped
const PAIR_CUTOFF: f64 = 1e-18;

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    extent: f64,
    resolution: usize,
    theta: f64,
    /// samples[(i, j)] = f(x_i, x_j), x_k = −extent + k·h, h = 2·extent/resolution.
    samples: DMatrix<C64>,
}

impl GridFunction {
    pub fn new(extent: f64, resolution: usize, theta: f64, samples: DMatrix<C64>) -> Result<Self> {
        check_grid(extent, resolution, theta)?;
        if samples.nrows() != resolution || samples.ncols() != resolution {
            return Err(Error::Domain(format!(
                "samples are {}x{}, grid needs {resolution}x{resolution}",
                samples.nrows(),
                samples.ncols()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(Self { extent, resolution, theta, samples })
    }

    pub fn from_fn<F>(extent: f64, resolution: usize, theta: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> C64,
    {
        check_grid(extent, resolution, theta)?;
        let h = 2.0 * extent / resolution as f64;
        let samples = DMatrix::from_fn(resolution, resolution, |i, j| {
            f(-extent + h * i as f64, -extent + h * j as f64)
        });
        Self::new(extent, resolution, theta, samples)
    }

    pub fn zeros(extent: f64, resolution: usize, theta: f64) -> Result<Self> {
        Self::from_fn(extent, resolution, theta, |_, _| C64::new(0.0, 0.0))
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn samples(&self) -> &DMatrix<C64> {
        &self.samples
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.extent + self.spacing() * k as f64
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_grid(self.extent, self.resolution, theta)?;
        Ok(Self { theta, ..self.clone() })
    }

    fn with_samples(&self, samples: DMatrix<C64>) -> Self {
        Self { samples, ..self.clone() }
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.resolution != other.resolution || self.extent != other.extent || self.theta != other.theta {
            return Err(Error::Domain(format!(
                "grid mismatch: (extent {}, resolution {}, θ {}) vs (extent {}, resolution {}, θ {})",
                self.extent, self.resolution, self.theta, other.extent, other.resolution, other.theta
            )));
        }
        Ok(())
    }

    /// Pointwise product.
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_samples(self.samples.component_mul(&other.samples)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.with_samples(&self.samples - &other.samples))
    }

    pub fn conj(&self) -> Self {
        self.with_samples(self.samples.map(|z| z.conj()))
    }

    /// Riemann sum of the samples times h².
    pub fn integral(&self) -> C64 {
        let h = self.spacing();
        self.samples.iter().sum::<C64>() * (h * h)
    }

    fn in_window(&self, k: usize) -> bool {
        self.coord(k).abs() <= WINDOW_FRACTION * self.extent + 1e-12 * self.extent
    }

    /// sup |f| over the interior window.
    pub fn window_sup(&self) -> f64 {
        let mut best = 0.0f64;
        for j in (0..self.resolution).filter(|&j| self.in_window(j)) {
            for i in (0..self.resolution).filter(|&i| self.in_window(i)) {
                best = best.max(self.samples[(i, j)].norm());
            }
        }
        best
    }

    /// sup |f − g| over the interior window.
    pub fn window_distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.window_sup())
    }

    /// CSV with header x1,x2,re,im, one row per grid point, x₂ running fastest.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x1", "x2", "re", "im"])?;
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                let z = self.samples[(i, j)];
                out.write_record([
                    fmt_sig(self.coord(i)),
                    fmt_sig(self.coord(j)),
                    fmt_sig(z.re),
                    fmt_sig(z.im),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Inverse of `write_csv`; the grid is recovered from the coordinates, θ is not stored.
    pub fn read_csv<R: Read>(r: R, theta: f64) -> Result<Self> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(r).records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, got {}", rec.len())));
            }
            let mut vals = [0.0; 4];
            for (v, field) in vals.iter_mut().zip(rec.iter()) {
                *v = field.trim().parse().map_err(|_| Error::Parse(format!("bad number '{field}'")))?;
            }
            rows.push(vals);
        }
        let res = (rows.len() as f64).sqrt().round() as usize;
        if res * res != rows.len() || res == 0 {
            return Err(Error::Parse(format!("{} rows do not form a square grid", rows.len())));
        }
        let extent = -rows[0][0];
        check_grid(extent, res, theta)?;
        let h = 2.0 * extent / res as f64;
        let mut samples = DMatrix::zeros(res, res);
        for (idx, row) in rows.iter().enumerate() {
            let (i, j) = (idx / res, idx % res);
            let tol = 1e-9 * extent;
            if (row[0] - (-extent + h * i as f64)).abs() > tol || (row[1] - (-extent + h * j as f64)).abs() > tol {
                return Err(Error::Parse(format!("row {idx} is off the regular grid")));
            }
            samples[(i, j)] = C64::new(row[2], row[3]);
        }
        Self::new(extent, res, theta, samples)
    }

    /// Little-endian header (f64 extent, u64 resolution, f64 θ), then row-major (f32 re, f32 im).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.extent.to_le_bytes())?;
        w.write_all(&(self.resolution as u64).to_le_bytes())?;
        w.write_all(&self.theta.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.resolution * self.resolution);
        for i in 0..self.resolution {
            for j in 0..self.resolution {
                let z = self.samples[(i, j)];
                buf.extend_from_slice(&(z.re as f32).to_le_bytes());
                buf.extend_from_slice(&(z.im as f32).to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let extent = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let res = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let theta = f64::from_le_bytes(b8);
        let res = usize::try_from(res).map_err(|_| Error::Parse("resolution overflows".into()))?;
        check_grid(extent, res, theta)?;
        let mut buf = vec![0u8; 8 * res * res];
        r.read_exact(&mut buf)?;
        let samples = DMatrix::from_fn(res, res, |i, j| {
            let o = 8 * (i * res + j);
            let re = f32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
            let im = f32::from_le_bytes(buf[o + 4..o + 8].try_into().unwrap());
            C64::new(re as f64, im as f64)
        });
        Self::new(extent, res, theta, samples)
    }
}

fn check_grid(extent: f64, resolution: usize, theta: f64) -> Result<()> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::Domain(format!("extent must be positive, got {extent}")));
    }
    if resolution < MIN_RESOLUTION || !resolution.is_power_of_two() {
        return Err(Error::Domain(format!("resolution must be a power of two >= {MIN_RESOLUTION}, got {resolution}")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be positive, got {theta}")));
    }
    Ok(())
}

/// Twelve significant digits, scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

// ------------------------------------------------------------------ product

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }
}

// unnormalized 2D transform, columns then rows
fn transform_2d(m: &DMatrix<C64>, fft: &dyn Fft<f64>) -> DMatrix<C64> {
    let mut out = m.clone();
    transform_rows(&mut out, fft);
    for mut col in out.column_iter_mut() {
        fft.process(col.as_mut_slice());
    }
    out
}

fn transform_rows(m: &mut DMatrix<C64>, fft: &dyn Fft<f64>) {
    let n = m.ncols();
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for i in 0..m.nrows() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = m[(i, j)];
        }
        fft.process(&mut buf);
        for (j, b) in buf.iter().enumerate() {
            m[(i, j)] = *b;
        }
    }
}

fn wavenumbers(m: usize, extent: f64) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let nu = if i < m / 2 { i as f64 } else { i as f64 - m as f64 };
            PI * nu / extent
        })
        .collect()
}

fn star_with(f: &DMatrix<C64>, g: &DMatrix<C64>, extent: f64, theta: f64, plans: &Plans) -> DMatrix<C64> {
    let m = f.nrows();
    let norm = C64::from(1.0 / (m * m) as f64);
    let fh = transform_2d(f, plans.forward.as_ref()) * norm;
    let gh = transform_2d(g, plans.forward.as_ref()) * norm;
    let k = wavenumbers(m, extent);
    // phase[(i, a)] = e^{iθ k_i k_a / 2}
    let phase = DMatrix::from_fn(m, m, |i, a| C64::from_polar(1.0, 0.5 * theta * k[i] * k[a]));
    let weight = |h: &DMatrix<C64>| -> Vec<f64> { h.column_iter().map(|c| c.iter().map(|z| z.norm()).sum()).collect() };
    let (nf, ng) = (weight(&fh), weight(&gh));
    let top = nf.iter().cloned().fold(0.0, f64::max) * ng.iter().cloned().fold(0.0, f64::max);
    let mut out = DMatrix::<C64>::zeros(m, m);
    if top == 0.0 {
        return out;
    }
    let mut fc = vec![C64::new(0.0, 0.0); m];
    let mut gc = vec![C64::new(0.0, 0.0); m];
    let mut scratch = vec![C64::new(0.0, 0.0); plans.inverse.get_inplace_scratch_len()];
    for a in 0..m {
        if nf[a] == 0.0 {
            continue;
        }
        for b in 0..m {
            if nf[a] * ng[b] < PAIR_CUTOFF * top {
                continue;
            }
            for i in 0..m {
                fc[i] = fh[(i, a)] * phase[(i, b)].conj();
                gc[i] = gh[(i, b)] * phase[(i, a)];
            }
            plans.inverse.process_with_scratch(&mut fc, &mut scratch);
            plans.inverse.process_with_scratch(&mut gc, &mut scratch);
            let mut col = out.column_mut((a + b) % m);
            for i in 0..m {
                col[i] += fc[i] * gc[i];
            }
        }
    }
    transform_rows(&mut out, plans.inverse.as_ref());
    out
}

/// f ⋆ g at the grid's θ.
pub fn star(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.same_grid(g)?;
    let plans = Plans::new(f.resolution);
    Ok(f.with_samples(star_with(&f.samples, &g.samples, f.extent, f.theta, &plans)))
}

/// sup over the window of |star_θ(f, g) − f·g|, one entry per θ.
pub fn commutative_limit(f: &GridFunction, g: &GridFunction, thetas: &[f64]) -> Result<Vec<f64>> {
    f.same_grid(g)?;
    if thetas.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("θ values must be positive".into()));
    }
    if thetas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(format!("θ sequence {thetas:?} is not decreasing")));
    }
    let plans = Plans::new(f.resolution);
    let pointwise = f.mul_pointwise(g)?;
    thetas
        .iter()
        .map(|&t| {
            let p = f.with_samples(star_with(&f.samples, &g.samples, f.extent, t, &plans));
            p.window_distance(&pointwise)
        })
        .collect()
}

/// sup over the window of |(f⋆g)⋆h − f⋆(g⋆h)|.
pub fn associativity_check(f: &GridFunction, g: &GridFunction, h: &GridFunction) -> Result<f64> {
    f.same_grid(g)?;
    f.same_grid(h)?;
    let left = star(&star(f, g)?, h)?;
    let right = star(f, &star(g, h)?)?;
    left.window_distance(&right)
}

// ------------------------------------------------------------------ named functions

/// Test functions addressable by name: `one`, `zero`, `ground`, `x1`, `x2`,
/// `gauss:a,b,v` (centre (a, b), variance v).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedFunction {
    One,
    Zero,
    /// 2e^{−|x|²/θ}, the Wigner function of the oscillator ground state.
    Ground,
    /// x₁ times a plateau window vanishing at the grid edge.
    X1,
    X2,
    Gauss { center: [f64; 2], variance: f64 },
}

impl NamedFunction {
    pub fn sample(&self, extent: f64, resolution: usize, theta: f64) -> Result<GridFunction> {
        let plateau = |t: f64| plateau_window(t, extent);
        match *self {
            NamedFunction::One => GridFunction::from_fn(extent, resolution, theta, |_, _| C64::new(1.0, 0.0)),
            NamedFunction::Zero => GridFunction::zeros(extent, resolution, theta),
            NamedFunction::Ground => GridFunction::from_fn(extent, resolution, theta, |x, y| {
                C64::from(2.0 * (-(x * x + y * y) / theta).exp())
            }),
            NamedFunction::X1 => {
                GridFunction::from_fn(extent, resolution, theta, |x, y| C64::from(x * plateau(x) * plateau(y)))
            }
            NamedFunction::X2 => {
                GridFunction::from_fn(extent, resolution, theta, |x, y| C64::from(y * plateau(x) * plateau(y)))
            }
            NamedFunction::Gauss { center: [a, b], variance } => {
                if variance.is_nan() || variance <= 0.0 {
                    return Err(Error::InvalidParameter(format!("variance must be positive, got {variance}")));
                }
                GridFunction::from_fn(extent, resolution, theta, |x, y| {
                    C64::from((-((x - a).powi(2) + (y - b).powi(2)) / (2.0 * variance)).exp())
                })
            }
        }
    }
}

/// ½[erf((t+R)/s) − erf((t−R)/s)] with R = 0.8E, s = 0.04E: 1 on the window, 0 at the edge.
pub fn plateau_window(t: f64, extent: f64) -> f64 {
    let (r, s) = (0.8 * extent, 0.04 * extent);
    0.5 * (libm::erf((t + r) / s) - libm::erf((t - r) / s))
}

impl FromStr for NamedFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => return Ok(NamedFunction::One),
            "zero" => return Ok(NamedFunction::Zero),
            "ground" => return Ok(NamedFunction::Ground),
            "x1" => return Ok(NamedFunction::X1),
            "x2" => return Ok(NamedFunction::X2),
            _ => {}
        }
        let bad = || Error::Parse(format!("unknown test function '{s}' (one, zero, ground, x1, x2, gauss:a,b,v)"));
        let rest = s.strip_prefix("gauss:").ok_or_else(bad)?;
        let vals: Vec<f64> = rest.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        match vals[..] {
            [a, b, v] if v > 0.0 => Ok(NamedFunction::Gauss { center: [a, b], variance: v }),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss(a: f64, b: f64, v: f64) -> NamedFunction {
        NamedFunction::Gauss { center: [a, b], variance: v }
    }

    fn sample(f: NamedFunction, e: f64, m: usize, theta: f64) -> GridFunction {
        f.sample(e, m, theta).unwrap()
    }

    // ∫ e^{-((x-a)²+(y-b)²)/(2v)} e^{-((x-c)²+(y-d)²)/(2w)} in closed form
    fn gauss_overlap(p: (f64, f64, f64), q: (f64, f64, f64)) -> f64 {
        let (a, b, v) = p;
        let (c, d, w) = q;
        let dist2 = (a - c).powi(2) + (b - d).powi(2);
        2.0 * PI * v * w / (v + w) * (-dist2 / (2.0 * (v + w))).exp()
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::zeros(1.0, 48, 1.0).is_err());
        assert!(GridFunction::zeros(1.0, 96, 1.0).is_err());
        assert!(GridFunction::zeros(-1.0, 64, 1.0).is_err());
        assert!(GridFunction::zeros(1.0, 64, 0.0).is_err());
        let a = GridFunction::zeros(1.0, 64, 1.0).unwrap();
        let b = GridFunction::zeros(1.0, 128, 1.0).unwrap();
        assert!(matches!(star(&a, &b), Err(Error::Domain(_))));
        let c = GridFunction::zeros(1.0, 64, 0.5).unwrap();
        assert!(matches!(star(&a, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_and_zero() {
        let f = sample(gauss(0.3, -0.2, 0.9), 12.0, 64, 1.0);
        let one = sample(NamedFunction::One, 12.0, 64, 1.0);
        assert!(star(&f, &one).unwrap().window_distance(&f).unwrap() < 1e-12);
        assert!(star(&one, &f).unwrap().window_distance(&f).unwrap() < 1e-12);
        let zero = sample(NamedFunction::Zero, 12.0, 64, 1.0);
        assert_eq!(star(&f, &zero).unwrap().window_sup(), 0.0);
        assert_eq!(associativity_check(&f, &f, &zero).unwrap(), 0.0);
        assert_eq!(commutative_limit(&zero, &zero, &[1.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn ground_projector() {
        let g0 = sample(NamedFunction::Ground, 12.0, 128, 1.0);
        let p = star(&g0, &g0).unwrap();
        assert!(p.window_distance(&g0).unwrap() < 1e-6);
        let r = associativity_check(&g0, &g0, &g0).unwrap();
        assert!(r < 1e-6);
        assert!(star(&p, &g0).unwrap().window_distance(&g0).unwrap() < 1e-6);
    }

    #[test]
    fn coordinate_commutator() {
        let (e, m, theta) = (32.0, 256, 1.0);
        let x1 = sample(NamedFunction::X1, e, m, theta);
        let x2 = sample(NamedFunction::X2, e, m, theta);
        let c = star(&x1, &x2).unwrap().sub(&star(&x2, &x1).unwrap()).unwrap();
        let ith = GridFunction::from_fn(e, m, theta, |_, _| C64::new(0.0, theta)).unwrap();
        assert!(c.window_distance(&ith).unwrap() < 1e-6);
    }

    #[test]
    fn gaussian_examples() {
        let (e, m) = (12.0, 128);
        let f = sample(gauss(0.5, 0.0, 1.0), e, m, 1.0);
        let g = sample(gauss(0.0, -0.7, 1.3), e, m, 1.0);
        let h = sample(gauss(-0.4, 0.3, 0.8), e, m, 1.0);
        assert!(associativity_check(&f, &g, &h).unwrap() < 1e-6);
        let lim = commutative_limit(&f, &g, &[1.0, 0.5, 0.25, 0.125]).unwrap();
        assert!(lim.windows(2).all(|w| w[1] < w[0]), "{lim:?}");
        let one = sample(NamedFunction::One, e, m, 1.0);
        for d in commutative_limit(&one, &g, &[1.0, 0.5, 0.25]).unwrap() {
            assert!(d < 1e-12);
        }
        assert!(commutative_limit(&f, &g, &[0.5, 1.0]).is_err());
    }

    #[test]
    fn tracial_and_conjugation() {
        let (e, m) = (12.0, 128);
        let f = sample(gauss(0.5, 0.2, 1.0), e, m, 1.0);
        let g = sample(gauss(-0.3, -0.7, 0.7), e, m, 1.0);
        let fg = star(&f, &g).unwrap();
        let want = gauss_overlap((0.5, 0.2, 1.0), (-0.3, -0.7, 0.7));
        assert_relative_eq!(fg.integral().re, want, epsilon = 1e-10);
        assert_relative_eq!(fg.integral().re, f.mul_pointwise(&g).unwrap().integral().re, epsilon = 1e-10);
        // f, g real: (f⋆g)* = g⋆f
        let gf = star(&g, &f).unwrap();
        assert!(fg.conj().window_distance(&gf).unwrap() < 1e-12);
        assert!(fg.window_distance(&gf).unwrap() > 1e-3);
    }

    #[test]
    fn refinement_reduces_residuals() {
        let e = 12.0;
        let res = |m: usize| {
            let f = sample(gauss(0.5, 0.0, 1.0), e, m, 1.0);
            let g = sample(gauss(0.0, -0.7, 1.3), e, m, 1.0);
            let h = sample(gauss(-0.4, 0.3, 0.8), e, m, 1.0);
            let g0 = sample(NamedFunction::Ground, e, m, 1.0);
            (
                associativity_check(&f, &g, &h).unwrap(),
                star(&g0, &g0).unwrap().window_distance(&g0).unwrap(),
            )
        };
        let (a64, p64) = res(64);
        let (a128, p128) = res(128);
        assert!(a128 < a64 / 4.0 || a128 < 1e-13, "{a64} {a128}");
        assert!(p128 < p64 / 4.0 || p128 < 1e-13, "{p64} {p128}");
    }

    #[test]
    fn io_round_trips() {
        let f = sample(gauss(0.5, 0.0, 1.0), 6.0, 64, 0.5);
        let f = f.with_samples(f.samples.map(|z| z * C64::new(1.0, -0.5)));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice(), 0.5).unwrap();
        assert_eq!(back.resolution(), 64);
        assert_relative_eq!(back.extent(), 6.0);
        assert!(back.window_distance(&f).unwrap() < 1e-11);

        let mut bin = Vec::new();
        f.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 24 + 8 * 64 * 64);
        let back = GridFunction::read_binary(bin.as_slice()).unwrap();
        assert_eq!((back.extent(), back.resolution(), back.theta()), (6.0, 64, 0.5));
        assert!(back.sub(&f).unwrap().samples.iter().all(|z| z.norm() < 1e-6));
        assert!(GridFunction::read_binary(&bin[..100]).is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!("ground".parse::<NamedFunction>().unwrap(), NamedFunction::Ground);
        assert_eq!("gauss:1,-2,0.5".parse::<NamedFunction>().unwrap(), gauss(1.0, -2.0, 0.5));
        assert!("gauss:1,2".parse::<NamedFunction>().is_err());
        assert!("gauss:1,2,-1".parse::<NamedFunction>().is_err());
        assert!("sin".parse::<NamedFunction>().is_err());
        assert!(plateau_window(0.0, 10.0) > 1.0 - 1e-15);
        assert!(plateau_window(10.0, 10.0) < 1e-11);
    }
}
