//! Benchmark problems: scalar linear decay, a stiff oscillatory scalar ODE,
//! a two-scale 3x3 linear system, and the focusing nonlinear Schroedinger
//! equation discretized pseudo-spectrally.
//!
//! Every problem carries an exact solution (closed form or eigendecomposition)
//! so integration error is measurable, plus the spectrum that drives step-size
//! limits. The Schroedinger nonlinearity is applied without dealiasing — the
//! straightforward pseudo-spectral treatment — and its error metric is the
//! relative discrete L2 norm against the exact soliton, fixed here so sweep
//! results are comparable across runs.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::optimize::{solve_dense, Spectrum};
use crate::{Error, Result};

/// The scalar linear test problem y' = lambda y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DahlquistProblem {
    pub lambda: Complex64,
    pub y0: Complex64,
}

impl DahlquistProblem {
    pub fn new(lambda: Complex64, y0: Complex64) -> Result<Self> {
        for v in [lambda, y0] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidInput("parameters must be finite".into()));
            }
        }
        Ok(Self { lambda, y0 })
    }

    pub fn rhs(&self, _t: Complex64, y: Complex64) -> Complex64 {
        self.lambda * y
    }

    pub fn exact(&self, t: f64) -> Complex64 {
        self.y0 * (self.lambda * t).exp()
    }
}

/// Stiff scalar ODE y' = lambda (y - cos t) - sin t with
/// lambda = -1/epsilon + xi i: the solution hugs cos t after a fast
/// transient (y0 - 1) e^{lambda t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtheroRobinsonProblem {
    epsilon: f64,
    xi: f64,
    y0: f64,
}

impl ProtheroRobinsonProblem {
    /// Starts from the customary y(0) = 3/2, half a unit off the slow manifold.
    pub fn new(epsilon: f64, xi: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive so the transient decays, got {epsilon}"
            )));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidInput("xi must be finite".into()));
        }
        Ok(Self { epsilon, xi, y0: 1.5 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn lambda(&self) -> Complex64 {
        Complex64::new(-1.0 / self.epsilon, self.xi)
    }

    /// cos/sin extend to complex time, as complex substeps require.
    pub fn rhs(&self, t: Complex64, y: Complex64) -> Complex64 {
        self.lambda() * (y - t.cos()) - t.sin()
    }

    pub fn exact(&self, t: f64) -> Complex64 {
        Complex64::new(t.cos(), 0.0)
            + (self.y0 - 1.0) * (self.lambda() * t).exp()
    }
}

/// Two-scale linear system: a damped fast oscillator (rate 1/epsilon,
/// detuning delta) driving a slow exponential decay at rate lambda.
///
/// State (y1, y2, y3) with y2 = y1' and y3 relaxing toward y1:
/// y1' = y2, y2' = -(1/eps^2 + delta^2) y1 - (2/eps) y2, y3' = lambda (y1 - y3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillatorSystem {
    lambda: f64,
    epsilon: f64,
    delta: f64,
    y0: [f64; 3],
}

impl DampedOscillatorSystem {
    pub fn new(lambda: f64, epsilon: f64, delta: f64, y0: [f64; 3]) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("epsilon", epsilon), ("delta", delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        Ok(Self { lambda, epsilon, delta, y0 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn y0(&self) -> [Complex64; 3] {
        self.y0.map(|v| Complex64::new(v, 0.0))
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let omega_sq = 1.0 / (self.epsilon * self.epsilon) + self.delta * self.delta;
        [
            [0.0, 1.0, 0.0],
            [-omega_sq, -2.0 / self.epsilon, 0.0],
            [self.lambda, 0.0, -self.lambda],
        ]
    }

    pub fn rhs(&self, _t: Complex64, y: &[Complex64]) -> Vec<Complex64> {
        let m = self.matrix();
        (0..3)
            .map(|row| {
                m[row]
                    .iter()
                    .zip(y)
                    .map(|(&coeff, yi)| coeff * yi)
                    .sum()
            })
            .collect()
    }

    /// Eigenvalues in the order (slow, fast+, fast-):
    /// (-lambda, -1/eps + i delta, -1/eps - i delta).
    pub fn spectrum(&self) -> Spectrum {
        let fast = Complex64::new(-1.0 / self.epsilon, self.delta);
        Spectrum::new(vec![Complex64::new(-self.lambda, 0.0), fast, fast.conj()])
            .expect("three finite eigenvalues")
    }

    /// Eigenvectors matching [`Self::spectrum`]'s order, as matrix columns:
    /// the slow mode is (0, 0, 1); a fast eigenvalue s has eigenvector
    /// (1, s, lambda / (s + lambda)).
    fn eigenvectors(&self) -> [[Complex64; 3]; 3] {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let lambda = Complex64::new(self.lambda, 0.0);
        let fast = |s: Complex64| [one, s, lambda / (s + lambda)];
        let s_plus = Complex64::new(-1.0 / self.epsilon, self.delta);
        let slow = [zero, zero, one];
        [slow, fast(s_plus), fast(s_plus.conj())]
    }

    /// Exact solution by eigendecomposition, y(t) = V e^{St} V^{-1} y0.
    /// Fails with a degeneracy error when the eigenvector matrix is too
    /// ill-conditioned to trust (Frobenius condition estimate above 1e12).
    pub fn exact(&self, t: f64) -> Result<[Complex64; 3]> {
        let zero = Complex64::new(0.0, 0.0);
        let vectors = self.eigenvectors();
        // Column-major eigenvectors into a row-major system matrix.
        let mut v = [zero; 9];
        for (col, vec) in vectors.iter().enumerate() {
            for row in 0..3 {
                v[row * 3 + col] = vec[row];
            }
        }
        let norm_sq = |m: &[Complex64]| m.iter().map(|e| e.norm_sqr()).sum::<f64>();
        let mut inverse_norm_sq = 0.0;
        for col in 0..3 {
            let mut m = v;
            let mut rhs = [zero; 3];
            rhs[col] = Complex64::new(1.0, 0.0);
            let column = solve_dense(3, &mut m, &mut rhs).ok_or(Error::DegenerateSystem {
                cond: f64::INFINITY,
            })?;
            inverse_norm_sq += norm_sq(&column);
        }
        let cond = (norm_sq(&v) * inverse_norm_sq).sqrt();
        if cond > 1e12 {
            return Err(Error::DegenerateSystem { cond });
        }
        let mut m = v;
        let mut y0 = self.y0();
        let coeffs =
            solve_dense(3, &mut m, &mut y0).ok_or(Error::DegenerateSystem { cond })?;
        let mut out = [zero; 3];
        for ((coeff, vector), &s) in
            coeffs.iter().zip(&vectors).zip(self.spectrum().eigenvalues())
        {
            let mode = coeff * (s * t).exp();
            for (o, v) in out.iter_mut().zip(vector) {
                *o += mode * v;
            }
        }
        Ok(out)
    }
}

/// Focusing nonlinear Schroedinger equation i u_t + u_xx/2 + |u|^2 u = 0 on
/// the periodic domain [-2 pi, 4 pi], with the traveling soliton
/// sqrt(2) sech(sqrt(2)(x - t)) e^{i(x + t/2)} as exact solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsProblem {
    n_modes: usize,
    t_end: f64,
}

/// Left edge of the periodic domain.
pub const NLS_X_MIN: f64 = -2.0 * PI;
/// Domain length (right edge 4 pi).
pub const NLS_LENGTH: f64 = 6.0 * PI;

impl NlsProblem {
    pub fn new(n_modes: usize, t_end: f64) -> Result<Self> {
        if n_modes < 4 || n_modes % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "need an even number of modes >= 4, got {n_modes}"
            )));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
        }
        Ok(Self { n_modes, t_end })
    }

    /// 100 modes to t = 6.
    pub fn standard() -> Self {
        Self { n_modes: 100, t_end: 6.0 }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// The traveling soliton, at any point (not just on the grid).
    pub fn soliton(x: f64, t: f64) -> Complex64 {
        let arg = 2.0f64.sqrt() * (x - t);
        let sech = 1.0 / arg.cosh();
        2.0f64.sqrt() * sech * Complex64::new(0.0, x + 0.5 * t).exp()
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = NLS_LENGTH / self.n_modes as f64;
        (0..self.n_modes).map(|j| NLS_X_MIN + j as f64 * dx).collect()
    }

    /// Transform-ordered wavenumbers 2 pi m / L with m = 0..n/2-1 then
    /// -n/2..-1 (the Nyquist slot carries -n/2).
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_modes as i64;
        (0..n)
            .map(|m| {
                let signed = if m < n / 2 { m } else { m - n };
                2.0 * PI * signed as f64 / NLS_LENGTH
            })
            .collect()
    }

    pub fn exact(&self, t: f64) -> Vec<Complex64> {
        self.grid().iter().map(|&x| Self::soliton(x, t)).collect()
    }

    /// Eigenvalues -i k^2 / 2 of the linear part u_t = i u_xx / 2: all on
    /// the nonpositive imaginary axis.
    pub fn linear_spectrum(&self) -> Spectrum {
        Spectrum::new(
            self.wavenumbers()
                .iter()
                .map(|&k| Complex64::new(0.0, -0.5 * k * k))
                .collect(),
        )
        .expect("nonempty grid")
    }

    /// Discrete mass sum |u|^2 dx, conserved by the exact flow.
    pub fn mass(&self, u: &[Complex64]) -> f64 {
        let dx = NLS_LENGTH / self.n_modes as f64;
        u.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx
    }

    /// Relative discrete L2 distance, the sweep error metric.
    pub fn relative_l2_error(u: &[Complex64], reference: &[Complex64]) -> f64 {
        let num: f64 = u
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = reference.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    /// Plans the transforms once for repeated right-hand-side evaluations.
    pub fn discretize(&self) -> NlsDiscretization {
        let mut planner = FftPlanner::new();
        NlsDiscretization {
            neg_k_sq: self.wavenumbers().iter().map(|&k| -k * k).collect(),
            forward: planner.plan_fft_forward(self.n_modes),
            inverse: planner.plan_fft_inverse(self.n_modes),
            n_modes: self.n_modes,
        }
    }
}

/// Planned-transform workspace evaluating the Schroedinger right-hand side.
#[derive(Clone)]
pub struct NlsDiscretization {
    neg_k_sq: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    n_modes: usize,
}

impl NlsDiscretization {
    /// Spectral second derivative: transform, multiply by -k^2, transform
    /// back (exact for on-grid trigonometric polynomials).
    pub fn second_derivative(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut hat = u.to_vec();
        self.forward.process(&mut hat);
        for (coeff, &factor) in hat.iter_mut().zip(&self.neg_k_sq) {
            *coeff *= factor;
        }
        self.inverse.process(&mut hat);
        let scale = 1.0 / self.n_modes as f64;
        for coeff in hat.iter_mut() {
            *coeff *= scale;
        }
        hat
    }

    /// u_t = i (u_xx / 2 + |u|^2 u), the nonlinearity applied pointwise with
    /// no dealiasing.
    pub fn rhs(&self, u: &[Complex64]) -> Vec<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        self.second_derivative(u)
            .into_iter()
            .zip(u)
            .map(|(uxx, &ui)| i * (0.5 * uxx + ui.norm_sqr() * ui))
            .collect()
    }
}
