//! Stability polynomials and their absolute-stability geometry.
//!
//! A one-step method applied to y' = lambda*y multiplies the state by
//! Phi(z), z = lambda*dt; the method is absolutely stable at z when
//! |Phi(z)| <= 1. This module evaluates Phi, rasterizes |Phi| over a window,
//! measures the stable extent along a ray from the origin, and finds
//! polynomial roots.

use num_complex::Complex64;

use crate::{Error, Result};

/// Band used when classifying |Phi(z)| <= 1 + tol in floating point.
pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;
/// Uniform samples used to bracket the first instability along a ray.
pub const AXIS_SCAN_SAMPLES: usize = 4096;
/// Residual contract for [`roots`]: max |p(r)| <= this times max |c_j|.
pub const ROOT_RESIDUAL_FACTOR: f64 = 1e-8;

const MAX_GRID_CELLS: u64 = 64_000_000;
const CONSISTENCY_TOL: f64 = 1e-10;

/// Polynomial Phi(z) = sum c_j z^j stored low-to-high.
///
/// Coefficients are finite and the leading coefficient is nonzero (trailing
/// zeros are trimmed on construction).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityPolynomial {
    coeffs: Vec<Complex64>,
}

impl StabilityPolynomial {
    /// Builds a polynomial from low-to-high coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("polynomial needs coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput(
                "polynomial coefficients must be finite".into(),
            ));
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs == [Complex64::new(0.0, 0.0)] {
            return Err(Error::InvalidInput("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    /// Convenience constructor for real coefficients.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Low-to-high coefficients.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Whether c_0 = 1 and c_1 = 1 (within 1e-10), i.e. the method the
    /// polynomial came from is at least first-order consistent.
    pub fn is_first_order_consistent(&self) -> bool {
        let one = Complex64::new(1.0, 0.0);
        let c0_ok = (self.coeffs[0] - one).norm() <= CONSISTENCY_TOL;
        let c1_ok = self.coeffs.len() > 1 && (self.coeffs[1] - one).norm() <= CONSISTENCY_TOL;
        c0_ok && c1_ok
    }

    /// True when every coefficient has zero imaginary part.
    pub fn has_real_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Horner evaluation of Phi(z).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Absolute stability test |Phi(z)| <= 1 + tol.
    pub fn is_stable(&self, z: Complex64, tol: f64) -> bool {
        self.eval(z).norm() <= 1.0 + tol
    }
}

/// Axis-aligned sampling window for [`region_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl RegionWindow {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if ![re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("window bounds must be finite".into()));
        }
        if re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidInput(format!(
                "window must have positive area, got [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        let cells = nx as u64 * ny as u64;
        if cells < 4 {
            return Err(Error::InvalidInput(format!(
                "window needs at least 4 cells, got {nx} x {ny}"
            )));
        }
        if cells > MAX_GRID_CELLS {
            return Err(Error::GridTooLarge { cells, max: MAX_GRID_CELLS });
        }
        Ok(Self { re_min, re_max, im_min, im_max, nx, ny })
    }

    /// Center of cell (row, col); rows sweep the imaginary axis upward.
    pub fn cell_center(&self, row: usize, col: usize) -> Complex64 {
        let dx = (self.re_max - self.re_min) / self.nx as f64;
        let dy = (self.im_max - self.im_min) / self.ny as f64;
        Complex64::new(
            self.re_min + (col as f64 + 0.5) * dx,
            self.im_min + (row as f64 + 0.5) * dy,
        )
    }
}

/// |Phi| sampled at the cell centers of a [`RegionWindow`].
///
/// Row-major storage; row index increases with the imaginary part.
#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub window: RegionWindow,
    magnitudes: Vec<f64>,
}

impl RegionGrid {
    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn magnitude(&self, row: usize, col: usize) -> f64 {
        self.magnitudes[row * self.window.nx + col]
    }

    /// Writes `re,im,mag` rows (9 significant digits), row-major.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "re,im,mag")?;
        for row in 0..self.window.ny {
            for col in 0..self.window.nx {
                let z = self.window.cell_center(row, col);
                writeln!(
                    out,
                    "{:.8e},{:.8e},{:.8e}",
                    z.re,
                    z.im,
                    self.magnitude(row, col)
                )?;
            }
        }
        Ok(())
    }
}

/// Samples |Phi| at every cell center of `window`.
pub fn region_grid(p: &StabilityPolynomial, window: &RegionWindow) -> RegionGrid {
    let mut magnitudes = Vec::with_capacity(window.nx * window.ny);
    for row in 0..window.ny {
        for col in 0..window.nx {
            magnitudes.push(p.eval(window.cell_center(row, col)).norm());
        }
    }
    RegionGrid { window: *window, magnitudes }
}

/// A unit-modulus direction for [`axis_extent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRay {
    direction: Complex64,
}

impl AxisRay {
    /// Accepts a direction whose modulus is 1 within 1e-12.
    pub fn new(direction: Complex64) -> Result<Self> {
        if !direction.re.is_finite() || !direction.im.is_finite() {
            return Err(Error::InvalidInput("ray direction must be finite".into()));
        }
        if (direction.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "ray direction must have unit modulus, got |{direction}| = {}",
                direction.norm()
            )));
        }
        Ok(Self { direction })
    }

    pub fn from_angle(theta: f64) -> Self {
        Self { direction: Complex64::new(theta.cos(), theta.sin()) }
    }

    pub fn positive_imag() -> Self {
        Self { direction: Complex64::new(0.0, 1.0) }
    }

    pub fn negative_imag() -> Self {
        Self { direction: Complex64::new(0.0, -1.0) }
    }

    pub fn negative_real() -> Self {
        Self { direction: Complex64::new(-1.0, 0.0) }
    }

    pub fn direction(&self) -> Complex64 {
        self.direction
    }
}

/// Stable extent along a ray: the first s in (0, s_max] with
/// |Phi(s * dir)| > 1 + tol, refined by bisection to width tol.
///
/// Returns `s_max` when no crossing is found by the scan, and a value within
/// tol of zero when the ray leaves the stable set immediately.
pub fn axis_extent(p: &StabilityPolynomial, ray: &AxisRay, s_max: f64, tol: f64) -> Result<f64> {
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::InvalidInput(format!("s_max must be positive, got {s_max}")));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let exceeds = |s: f64| p.eval(ray.direction * s).norm() > 1.0 + tol;
    let mut prev = 0.0;
    for m in 1..=AXIS_SCAN_SAMPLES {
        let s = s_max * m as f64 / AXIS_SCAN_SAMPLES as f64;
        if exceeds(s) {
            let (mut lo, mut hi) = (prev, s);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if exceeds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(lo);
        }
        prev = s;
    }
    Ok(s_max)
}

/// All roots of the polynomial, with multiplicity, in no particular order.
///
/// Simultaneous (Durand-Kerner) iteration followed by a guarded Newton
/// polish. The residual contract is max |p(r)| <= 1e-8 * max |c_j|.
pub fn roots(p: &StabilityPolynomial) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = *p.coeffs.last().unwrap();
    let monic: Vec<Complex64> = p.coeffs.iter().map(|&c| c / lead).collect();
    // Cauchy bound: every root has modulus <= 1 + max |a_j|.
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut rs: Vec<Complex64> = (0..n)
        .map(|k| {
            let mut w = Complex64::new(1.0, 0.0);
            for _ in 0..=k {
                w *= seed;
            }
            w * bound
        })
        .collect();

    let eval_monic = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for _ in 0..1000 {
        let mut biggest = 0.0f64;
        for k in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom *= rs[k] - rs[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates: nudge apart and retry next sweep.
                rs[k] += Complex64::new(1e-8 * bound, 1e-8 * bound);
                biggest = f64::MAX;
                continue;
            }
            let step = eval_monic(rs[k]) / denom;
            rs[k] -= step;
            biggest = biggest.max(step.norm() / (1.0 + rs[k].norm()));
        }
        if biggest < 1e-14 {
            break;
        }
    }

    // Newton polish, accepted only when it reduces |p|.
    let deriv: Vec<Complex64> = (1..=n)
        .map(|j| monic[j] * j as f64)
        .collect();
    let eval_deriv = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in deriv.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    for r in rs.iter_mut() {
        for _ in 0..3 {
            let pv = eval_monic(*r);
            let dv = eval_deriv(*r);
            if dv.norm() == 0.0 {
                break;
            }
            let cand = *r - pv / dv;
            if eval_monic(cand).norm() < pv.norm() {
                *r = cand;
            } else {
                break;
            }
        }
    }

    let max_coeff = p.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let allowed = ROOT_RESIDUAL_FACTOR * max_coeff;
    let residual = rs.iter().map(|&r| p.eval(r).norm()).fold(0.0, f64::max);
    if residual > allowed {
        return Err(Error::RootsDidNotConverge { residual, allowed });
    }
    Ok(rs)
}
