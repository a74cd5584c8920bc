//! Time steppers over complex state vectors and a fixed-step driver.
//!
//! All steppers treat time as a complex quantity internally: a substep of
//! complex size moves the evaluation point off the real axis, and
//! non-autonomous right-hand sides are expected to accept that (entire
//! extensions of cos/sin for the stiff oscillator benchmark). States stay
//! complex throughout even for real-valued problems; the trajectory exposes
//! the largest imaginary residual as a diagnostic instead of truncating.

use num_complex::Complex64;

use crate::paths::StepPath;
use crate::poly::StabilityPolynomial;
use crate::{Error, Result};

/// Any state component with modulus above this aborts the step.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Relative band on |Im(sum of inner steps)| above which a projective scheme
/// is flagged: the extrapolation remainder then has an imaginary part and the
/// outer step does not land on the real time axis.
pub const IMAG_REMAINDER_BAND: f64 = 1e-9;

/// How the slope for the projective extrapolation is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeRule {
    /// (y_last - y_previous) / dt_last: the classic projective choice.
    /// Folds the last inner step into the extrapolation, so with conjugate
    /// inner steps it keeps only one of the two annihilated fast modes.
    LastIncrement,
    /// A fresh evaluation f(y_last): the two-step form used with a single
    /// inner step. With a conjugate pair of inner steps this preserves the
    /// annihilation of both fast modes (the inner product has real
    /// coefficients), so the conjugate-pair constructor selects it.
    FreshEval,
}

/// Projective forward Euler: a chain of small inner Euler steps (complex
/// sizes allowed) followed by one extrapolation over the remaining outer
/// step.
#[derive(Debug, Clone, PartialEq)]
pub struct PfeScheme {
    outer_dt: f64,
    inner_dts: Vec<Complex64>,
    slope_rule: SlopeRule,
    imag_sum_flagged: bool,
}

impl PfeScheme {
    /// Builds a scheme with the default slope rule: `FreshEval` for a single
    /// inner step, `LastIncrement` otherwise.
    pub fn new(outer_dt: f64, inner_dts: Vec<Complex64>) -> Result<Self> {
        if !(outer_dt > 0.0) || !outer_dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "outer step must be positive, got {outer_dt}"
            )));
        }
        if inner_dts.is_empty() {
            return Err(Error::InvalidInput("projective scheme needs inner steps".into()));
        }
        if inner_dts
            .iter()
            .any(|dt| !dt.re.is_finite() || !dt.im.is_finite() || dt.norm() == 0.0)
        {
            return Err(Error::InvalidInput(
                "inner steps must be finite and nonzero".into(),
            ));
        }
        let total: Complex64 = inner_dts.iter().sum();
        if total.norm() >= outer_dt {
            return Err(Error::InvalidInput(format!(
                "inner steps sum to |{total}| = {}, leaving no outer remainder below {outer_dt}",
                total.norm()
            )));
        }
        let slope_rule = if inner_dts.len() == 1 {
            SlopeRule::FreshEval
        } else {
            SlopeRule::LastIncrement
        };
        let imag_sum_flagged = total.im.abs() > IMAG_REMAINDER_BAND * outer_dt;
        Ok(Self { outer_dt, inner_dts, slope_rule, imag_sum_flagged })
    }

    /// Replaces the slope rule. A single inner step supports only
    /// `FreshEval` (there is no previous state to difference against a
    /// meaningful increment).
    pub fn with_slope_rule(mut self, rule: SlopeRule) -> Result<Self> {
        if self.inner_dts.len() == 1 && rule == SlopeRule::LastIncrement {
            return Err(Error::InvalidInput(
                "a single inner step extrapolates with a fresh evaluation".into(),
            ));
        }
        self.slope_rule = rule;
        Ok(self)
    }

    /// Conjugate pair of inner steps [dt_fast, conj(dt_fast)] with a fresh
    /// slope evaluation: places inner roots at a conjugate pair of fast
    /// eigenvalues and keeps both annihilated through the extrapolation.
    pub fn conjugate_pair(outer_dt: f64, dt_fast: Complex64) -> Result<Self> {
        Self::new(outer_dt, vec![dt_fast, dt_fast.conj()])?.with_slope_rule(SlopeRule::FreshEval)
    }

    /// `count` equal real inner steps of size `delta`.
    pub fn equal_real_steps(outer_dt: f64, delta: f64, count: usize) -> Result<Self> {
        Self::new(outer_dt, vec![Complex64::new(delta, 0.0); count])
    }

    pub fn outer_dt(&self) -> f64 {
        self.outer_dt
    }

    pub fn inner_dts(&self) -> &[Complex64] {
        &self.inner_dts
    }

    pub fn slope_rule(&self) -> SlopeRule {
        self.slope_rule
    }

    /// Number of inner steps not folded into the extrapolation.
    pub fn k(&self) -> usize {
        self.inner_dts.len() - 1
    }

    /// True when the inner steps do not sum to a real offset (within the
    /// band), so the extrapolated state sits off the real time axis.
    pub fn has_imaginary_remainder(&self) -> bool {
        self.imag_sum_flagged
    }

    /// Same inner chain under a different outer step (shortened final step).
    fn with_outer_dt(&self, outer_dt: f64) -> Result<Self> {
        let mut scheme = Self::new(outer_dt, self.inner_dts.clone())?;
        scheme.slope_rule = self.slope_rule;
        Ok(scheme)
    }
}

/// One-step methods understood by [`integrate_ivp`].
#[derive(Debug, Clone)]
pub enum Stepper {
    /// Composition of forward-Euler substeps along a consistent path.
    ComposedEuler(StepPath),
    /// Predict with stage coefficient c, correct over the full step:
    /// y1 = y + c dt f(t, y), then y + dt f(t + c dt, y1).
    TwoStage(Complex64),
    /// Projective forward Euler; the scheme's outer step is the driver step.
    Pfe(PfeScheme),
}

fn guarded(y: Vec<Complex64>, time: f64, substep: usize) -> Result<Vec<Complex64>> {
    for comp in &y {
        if !comp.re.is_finite() || !comp.im.is_finite() || comp.norm() > DIVERGENCE_GUARD {
            return Err(Error::Divergence { time, substep });
        }
    }
    Ok(y)
}

fn axpy(y: &[Complex64], scale: Complex64, dy: &[Complex64]) -> Vec<Complex64> {
    y.iter().zip(dy).map(|(yi, di)| yi + scale * di).collect()
}

/// Sequential forward-Euler substeps y <- y + (w_i dt) f(t_partial, y), with
/// the time argument advancing along the complex partial sums of the path.
pub fn composed_euler_step<F>(
    f: &F,
    t: f64,
    y: &[Complex64],
    dt: f64,
    path: &StepPath,
) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    if !path.is_consistent() {
        return Err(Error::InvalidInput(
            "composed Euler requires substep weights summing to 1".into(),
        ));
    }
    let mut state = y.to_vec();
    let mut t_partial = Complex64::new(t, 0.0);
    for (i, &w) in path.weights().iter().enumerate() {
        let dy = f(t_partial, &state);
        state = guarded(axpy(&state, w * dt, &dy), t, i + 1)?;
        t_partial += w * dt;
    }
    Ok(state)
}

/// Predictor stage scaled by c, corrector over the full step. On the linear
/// test problem the amplification is 1 + z + c z^2.
pub fn two_stage_step<F>(
    f: &F,
    t: f64,
    y: &[Complex64],
    dt: f64,
    c: Complex64,
) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {dt}")));
    }
    let t0 = Complex64::new(t, 0.0);
    let stage = guarded(axpy(y, c * dt, &f(t0, y)), t, 1)?;
    let dtc = Complex64::new(dt, 0.0);
    guarded(axpy(y, dtc, &f(t0 + c * dt, &stage)), t, 2)
}

/// Inner Euler chain then extrapolation over the remainder of the outer step.
pub fn pfe_step<F>(f: &F, t: f64, y: &[Complex64], scheme: &PfeScheme) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    let mut state = y.to_vec();
    let mut previous = y.to_vec();
    let mut t_partial = Complex64::new(t, 0.0);
    for (m, &dt_inner) in scheme.inner_dts().iter().enumerate() {
        let dy = f(t_partial, &state);
        previous = std::mem::replace(&mut state, Vec::new());
        state = guarded(axpy(&previous, dt_inner, &dy), t, m + 1)?;
        t_partial += dt_inner;
    }
    let remainder = Complex64::new(scheme.outer_dt(), 0.0)
        - scheme.inner_dts().iter().sum::<Complex64>();
    let slope: Vec<Complex64> = match scheme.slope_rule() {
        SlopeRule::LastIncrement => {
            let dt_last = *scheme.inner_dts().last().unwrap();
            state
                .iter()
                .zip(&previous)
                .map(|(cur, prev)| (cur - prev) / dt_last)
                .collect()
        }
        SlopeRule::FreshEval => f(t_partial, &state),
    };
    guarded(axpy(&state, remainder, &slope), t, scheme.inner_dts().len() + 1)
}

/// Amplification polynomial (1 + Lambda z)^K (1 + (1 - K Lambda) z) of a
/// projective step with K damping inner steps of relative size
/// Lambda = dt_inner / dt_outer, the last inner step folded into the
/// extrapolation. K = 0 degenerates to plain forward Euler.
pub fn pfe_stability_polynomial(lambda: Complex64, k: usize) -> StabilityPolynomial {
    let mut weights = vec![lambda; k];
    weights.push(Complex64::new(1.0, 0.0) - lambda * k as f64);
    StepPath::new(weights)
        .expect("finite weights")
        .stability_polynomial()
}

/// A projective step with real relative inner size Lambda written as an
/// explicit Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    /// Strictly lower-triangular stage matrix, row-major (K+1 stages).
    pub a: Vec<Vec<f64>>,
    /// Quadrature weights (Lambda, ..., Lambda, 1 - K Lambda).
    pub b: Vec<f64>,
    /// Abscissae (0, Lambda, ..., K Lambda).
    pub c: Vec<f64>,
}

/// Tableau of the K-inner-step projective method with Lambda in (0, 1/K].
pub fn pfe_butcher_tableau(lambda: f64, k: usize) -> Result<ButcherTableau> {
    if k >= 1 && !(lambda > 0.0 && lambda <= 1.0 / k as f64) {
        return Err(Error::InvalidInput(format!(
            "Lambda = {lambda} outside (0, 1/{k}]: the final weight 1 - K Lambda would be negative"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidInput("Lambda must be finite".into()));
    }
    let stages = k + 1;
    let mut a = vec![vec![0.0; stages]; stages];
    for (m, row) in a.iter_mut().enumerate() {
        for entry in row.iter_mut().take(m) {
            *entry = lambda;
        }
    }
    let mut b = vec![lambda; stages];
    b[stages - 1] = 1.0 - lambda * k as f64;
    let c = (0..stages).map(|m| m as f64 * lambda).collect();
    Ok(ButcherTableau { a, b, c })
}

/// Event recorded when the divergence guard trips during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEvent {
    /// Start time of the failing outer step.
    pub time: f64,
    /// 1-based substep within that outer step.
    pub substep: usize,
}

/// Times and states recorded after every outer step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    wall_time: f64,
    divergence: Option<DivergenceEvent>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<Complex64>] {
        &self.states
    }

    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// Wall-clock seconds spent inside the driver loop.
    pub fn wall_time(&self) -> f64 {
        self.wall_time
    }

    /// Where the run diverged, if it did; the recorded states stop there.
    pub fn divergence(&self) -> Option<DivergenceEvent> {
        self.divergence
    }

    /// Largest |Im| over all recorded components: how far a nominally real
    /// solution drifted off the real axis through complex substeps.
    pub fn max_imag_residual(&self) -> f64 {
        self.states
            .iter()
            .flatten()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// Writes `t,re_0,im_0,...` rows with 12 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "t")?;
        let dim = self.states.first().map_or(0, Vec::len);
        for i in 0..dim {
            write!(out, ",re_{i},im_{i}")?;
        }
        writeln!(out)?;
        for (t, state) in self.times.iter().zip(&self.states) {
            write!(out, "{t:.11e}")?;
            for comp in state {
                write!(out, ",{:.11e},{:.11e}", comp.re, comp.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Fixed-step driver from t0 to t_end; the final step is shortened to land
/// exactly on t_end. A divergence does not error: the event is recorded on
/// the truncated trajectory. For the projective stepper the driver step must
/// equal the scheme's outer step.
pub fn integrate_ivp<F>(
    stepper: &Stepper,
    f: &F,
    y0: &[Complex64],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory>
where
    F: Fn(Complex64, &[Complex64]) -> Vec<Complex64> + ?Sized,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {dt}")));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!(
            "time span must advance, got [{t0}, {t_end}]"
        )));
    }
    if y0.is_empty() || y0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidInput("initial state must be nonempty and finite".into()));
    }
    if let Stepper::Pfe(scheme) = stepper {
        if (scheme.outer_dt() - dt).abs() > 1e-12 * dt {
            return Err(Error::InvalidInput(format!(
                "driver step {dt} disagrees with the scheme's outer step {}",
                scheme.outer_dt()
            )));
        }
    }
    let probe = f(Complex64::new(t0, 0.0), y0);
    if probe.len() != y0.len() {
        return Err(Error::InvalidInput(format!(
            "right-hand side maps dimension {} to {}, expected it preserved",
            y0.len(),
            probe.len()
        )));
    }

    let started = std::time::Instant::now();
    let n_steps = ((t_end - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(t0);
    states.push(y0.to_vec());
    let mut divergence = None;
    let mut t = t0;
    let mut y = y0.to_vec();
    for step in 1..=n_steps {
        let target = if step == n_steps { t_end } else { t0 + step as f64 * dt };
        let step_dt = target - t;
        let outcome = match stepper {
            Stepper::ComposedEuler(path) => composed_euler_step(f, t, &y, step_dt, path),
            Stepper::TwoStage(c) => two_stage_step(f, t, &y, step_dt, *c),
            Stepper::Pfe(scheme) => {
                let fitted = if (step_dt - scheme.outer_dt()).abs() <= 1e-12 * dt {
                    scheme.clone()
                } else {
                    scheme.with_outer_dt(step_dt)?
                };
                pfe_step(f, t, &y, &fitted)
            }
        };
        match outcome {
            Ok(next) => {
                y = next;
                t = target;
                times.push(t);
                states.push(y.clone());
            }
            Err(Error::Divergence { time, substep }) => {
                divergence = Some(DivergenceEvent { time, substep });
                break;
            }
            Err(other) => return Err(other),
        }
    }
    Ok(Trajectory { times, states, wall_time: started.elapsed().as_secs_f64(), divergence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dahlquist(lambda: Complex64) -> impl Fn(Complex64, &[Complex64]) -> Vec<Complex64> {
        move |_t, y| y.iter().map(|yi| lambda * yi).collect()
    }

    fn cfe2() -> StepPath {
        StepPath::new(vec![c(0.5, 0.5), c(0.5, -0.5)]).unwrap()
    }

    fn cfe3() -> StepPath {
        crate::paths::enumerate_full_order_paths(3).unwrap().members()[0].clone()
    }

    #[test]
    fn forward_euler_annihilates_at_minus_one() {
        let f = dahlquist(c(-1.0, 0.0));
        let out =
            composed_euler_step(&f, 0.0, &[c(1.0, 0.0)], 1.0, &StepPath::forward_euler()).unwrap();
        assert_eq!(out, vec![c(0.0, 0.0)]);
    }

    #[test]
    fn composed_amplification_matches_path_polynomial() {
        for (lambda, dt) in [(c(-1.0, 2.0), 0.3), (c(0.4, -1.1), 0.7), (c(-2.0, 0.0), 0.5)] {
            for path in [StepPath::forward_euler(), cfe2(), cfe3()] {
                let f = dahlquist(lambda);
                let out = composed_euler_step(&f, 0.0, &[c(1.0, 0.0)], dt, &path).unwrap();
                let predicted = path.stability_polynomial().eval(lambda * dt);
                assert!(
                    (out[0] - predicted).norm() <= 1e-12 * (1.0 + predicted.norm()),
                    "path {:?}",
                    path.weights()
                );
            }
        }
    }

    #[test]
    fn composed_requires_consistency() {
        let path = StepPath::new(vec![c(0.4, 0.0)]).unwrap();
        let f = dahlquist(c(-1.0, 0.0));
        assert!(composed_euler_step(&f, 0.0, &[c(1.0, 0.0)], 0.1, &path).is_err());
    }

    #[test]
    fn two_stage_amplifications() {
        let lambda = c(-0.7, 1.3);
        let dt = 0.4;
        let z = lambda * dt;
        let f = dahlquist(lambda);
        let cases = [
            (c(1.0, 0.0), c(1.0, 0.0)),
            (c(0.5, -0.5), c(0.5, -0.5)),
            (c(0.0, 0.0), c(0.0, 0.0)),
        ];
        for (stage_c, quad_c) in cases {
            let out = two_stage_step(&f, 0.0, &[c(1.0, 0.0)], dt, stage_c).unwrap();
            let predicted = c(1.0, 0.0) + z + quad_c * z * z;
            assert!((out[0] - predicted).norm() < 1e-14);
        }
    }

    #[test]
    fn pfe_matched_inner_steps_annihilate_the_mode() {
        let lambda = c(-10.0, 22.913);
        let dt_fast = -1.0 / lambda;
        let scheme = PfeScheme::new(0.1, vec![dt_fast, dt_fast]).unwrap();
        let f = dahlquist(lambda);
        let out = pfe_step(&f, 0.0, &[c(3.0, -1.0)], &scheme).unwrap();
        assert_eq!(out, vec![c(0.0, 0.0)]);
    }

    #[test]
    fn pfe_equal_steps_match_closed_form() {
        let lambda = c(-4.0, 1.5);
        for k in 0..=3usize {
            let delta = 0.02;
            let outer = 0.5;
            let scheme = PfeScheme::equal_real_steps(outer, delta, k + 1).unwrap();
            let f = dahlquist(lambda);
            let out = pfe_step(&f, 0.0, &[c(1.0, 0.0)], &scheme).unwrap();
            let a = c(1.0, 0.0) + lambda * delta;
            let inner_total = (k + 1) as f64 * delta;
            let expected = if k == 0 {
                // Single inner step: fresh-slope two-step form.
                a + (outer - inner_total) * lambda * a
            } else {
                a.powu(k as u32 + 1)
                    + (outer - inner_total) * (a.powu(k as u32 + 1) - a.powu(k as u32)) / delta
            };
            assert!(
                (out[0] - expected).norm() <= 1e-12 * (1.0 + expected.norm()),
                "k = {k}: {} vs {expected}",
                out[0]
            );
        }
    }

    #[test]
    fn pfe_last_increment_amplification_equals_polynomial() {
        // With K+1 equal inner steps of relative size Lambda, one projective
        // step on the linear problem amplifies by exactly
        // (1 + Lambda z)^K (1 + (1 - K Lambda) z).
        let lambda = c(-3.0, 2.0);
        let outer = 0.4;
        for k in 1..=3usize {
            let delta = outer / (4.0 * (k as f64 + 1.0));
            let scheme = PfeScheme::equal_real_steps(outer, delta, k + 1).unwrap();
            let f = dahlquist(lambda);
            let out = pfe_step(&f, 0.0, &[c(1.0, 0.0)], &scheme).unwrap();
            let poly = pfe_stability_polynomial(c(delta / outer, 0.0), k);
            let predicted = poly.eval(lambda * outer);
            assert!(
                (out[0] - predicted).norm() <= 1e-12 * (1.0 + predicted.norm()),
                "k = {k}"
            );
        }
    }

    #[test]
    fn pfe_polynomial_degenerates_to_forward_euler() {
        let p = pfe_stability_polynomial(c(0.3, 0.0), 0);
        assert_eq!(p.coefficients(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn pfe_polynomial_two_step_factorization() {
        let lambda = c(0.25, 0.0);
        let p = pfe_stability_polynomial(lambda, 1);
        // (1 + L z)(1 + (1 - L) z) = 1 + z + L(1-L) z^2.
        assert!((p.coefficients()[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.coefficients()[2] - c(0.1875, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pfe_polynomial_three_inner_product() {
        let p = pfe_stability_polynomial(c(0.1, 0.0), 2);
        let expected = [1.0, 1.0, 0.17, 0.008];
        for (coeff, want) in p.coefficients().iter().zip(expected) {
            assert!((coeff - c(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn butcher_tableau_shape_and_weights() {
        let tab = pfe_butcher_tableau(0.1, 2).unwrap();
        assert_eq!(tab.b, vec![0.1, 0.1, 0.8]);
        assert_eq!(tab.c, vec![0.0, 0.1, 0.2]);
        for (m, row) in tab.a.iter().enumerate() {
            let row_sum: f64 = row.iter().sum();
            assert_relative_eq!(row_sum, tab.c[m]);
            for (j, &entry) in row.iter().enumerate() {
                assert_eq!(entry, if j < m { 0.1 } else { 0.0 });
            }
        }
        let fe = pfe_butcher_tableau(0.7, 0).unwrap();
        assert_eq!(fe.b, vec![1.0]);
        assert_eq!(fe.c, vec![0.0]);
    }

    #[test]
    fn butcher_tableau_rejects_large_lambda() {
        assert!(pfe_butcher_tableau(0.6, 2).is_err());
        assert!(pfe_butcher_tableau(0.0, 1).is_err());
        assert!(pfe_butcher_tableau(0.5, 2).is_ok());
    }

    #[test]
    fn butcher_stability_function_matches_polynomial() {
        // Independent route: R(z) = 1 + z b^T (I - z A)^{-1} 1 by forward
        // substitution, sampled across the plane.
        for (lambda, k) in [(0.1, 2usize), (0.25, 1), (1.0, 0), (1.0 / 3.0, 3)] {
            let tab = pfe_butcher_tableau(lambda, k).unwrap();
            let poly = pfe_stability_polynomial(c(lambda, 0.0), k);
            for sample in 0..20 {
                let angle = sample as f64 * 0.37;
                let z = c(1.3 * angle.cos(), 1.3 * angle.sin());
                let stages = tab.b.len();
                // Solve (I - z A) g = 1 row by row (A strictly lower).
                let mut g = vec![c(0.0, 0.0); stages];
                for m in 0..stages {
                    let mut acc = c(1.0, 0.0);
                    for j in 0..m {
                        acc += z * tab.a[m][j] * g[j];
                    }
                    g[m] = acc;
                }
                let mut r = c(1.0, 0.0);
                for (bm, gm) in tab.b.iter().zip(&g) {
                    r += z * bm * gm;
                }
                assert!(
                    (r - poly.eval(z)).norm() <= 1e-12 * (1.0 + r.norm()),
                    "Lambda = {lambda}, K = {k}, z = {z}"
                );
            }
        }
    }

    #[test]
    fn scheme_validation() {
        assert!(PfeScheme::new(0.0, vec![c(0.1, 0.0)]).is_err());
        assert!(PfeScheme::new(1.0, vec![]).is_err());
        assert!(PfeScheme::new(1.0, vec![c(0.0, 0.0)]).is_err());
        // Inner chain must leave a positive remainder.
        assert!(PfeScheme::new(0.1, vec![c(0.06, 0.0), c(0.06, 0.0)]).is_err());
        // Single inner step forces the fresh-evaluation slope.
        let single = PfeScheme::new(1.0, vec![c(0.01, 0.0)]).unwrap();
        assert_eq!(single.slope_rule(), SlopeRule::FreshEval);
        assert!(single.with_slope_rule(SlopeRule::LastIncrement).is_err());
        let pair = PfeScheme::conjugate_pair(0.1, c(0.016, 0.0366)).unwrap();
        assert_eq!(pair.slope_rule(), SlopeRule::FreshEval);
        assert_eq!(pair.k(), 1);
        assert!(!pair.has_imaginary_remainder());
        let lopsided = PfeScheme::new(1.0, vec![c(0.01, 0.005), c(0.01, 0.002)]).unwrap();
        assert!(lopsided.has_imaginary_remainder());
    }

    #[test]
    fn driver_geometric_decay() {
        let f = dahlquist(c(-1.0, 0.0));
        let stepper = Stepper::ComposedEuler(StepPath::forward_euler());
        let run = integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 1.0, 0.1).unwrap();
        assert_eq!(run.times().len(), 11);
        assert_relative_eq!(run.final_state()[0].re, 0.9f64.powi(10), epsilon = 1e-12);
        assert!(run.divergence().is_none());
        assert!(run.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn driver_shortens_final_step() {
        let f = dahlquist(c(-1.0, 0.0));
        let stepper = Stepper::ComposedEuler(StepPath::forward_euler());
        let run = integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 0.95, 0.1).unwrap();
        assert_eq!(run.times().len(), 11);
        assert_eq!(*run.times().last().unwrap(), 0.95);
        assert_relative_eq!(
            run.final_state()[0].re,
            0.9f64.powi(9) * 0.95,
            epsilon = 1e-12
        );
    }

    #[test]
    fn driver_records_divergence_and_truncates() {
        let f = dahlquist(c(100.0, 0.0));
        let stepper = Stepper::ComposedEuler(StepPath::forward_euler());
        let run = integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 100.0, 1.0).unwrap();
        let event = run.divergence().expect("guard must trip");
        // 101^n crosses 1e12 at n = 6; the step starting at t = 5 fails.
        assert_eq!(event.time, 5.0);
        assert_eq!(event.substep, 1);
        assert_eq!(run.times().len(), 6);
        assert!(run.final_state()[0].norm() <= DIVERGENCE_GUARD);
    }

    #[test]
    fn driver_validates_inputs() {
        let f = dahlquist(c(-1.0, 0.0));
        let stepper = Stepper::ComposedEuler(StepPath::forward_euler());
        assert!(integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 0.0, 0.1).is_err());
        assert!(integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 1.0, 0.0).is_err());
        assert!(integrate_ivp(&stepper, &f, &[], 0.0, 1.0, 0.1).is_err());
        let bad_dim = |_t: Complex64, _y: &[Complex64]| vec![c(0.0, 0.0); 3];
        assert!(integrate_ivp(&stepper, &bad_dim, &[c(1.0, 0.0)], 0.0, 1.0, 0.1).is_err());
        let scheme = PfeScheme::equal_real_steps(0.05, 1e-3, 2).unwrap();
        let mismatched = Stepper::Pfe(scheme);
        assert!(integrate_ivp(&mismatched, &f, &[c(1.0, 0.0)], 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn driver_runs_projective_scheme() {
        let lambda = c(-50.0, 0.0);
        let scheme = PfeScheme::equal_real_steps(0.1, 0.01, 2).unwrap();
        let f = dahlquist(lambda);
        let run =
            integrate_ivp(&Stepper::Pfe(scheme.clone()), &f, &[c(1.0, 0.0)], 0.0, 1.0, 0.1)
                .unwrap();
        assert!(run.divergence().is_none());
        let poly = pfe_stability_polynomial(c(0.1, 0.0), 1);
        let per_step = poly.eval(lambda * 0.1);
        assert!((run.final_state()[0] - per_step.powu(10)).norm() < 1e-10);
    }

    #[test]
    fn conjugating_the_problem_conjugates_the_trajectory() {
        let lambda = c(-10.0, 22.913);
        let y0 = c(3.0, -1.0);
        let scheme = PfeScheme::conjugate_pair(0.1, -1.0 / lambda).unwrap();
        let mirror = PfeScheme::new(
            0.1,
            scheme.inner_dts().iter().map(|dt| dt.conj()).collect(),
        )
        .unwrap()
        .with_slope_rule(SlopeRule::FreshEval)
        .unwrap();
        let run = integrate_ivp(
            &Stepper::Pfe(scheme),
            &dahlquist(lambda),
            &[y0],
            0.0,
            1.0,
            0.1,
        )
        .unwrap();
        let conj_run = integrate_ivp(
            &Stepper::Pfe(mirror),
            &dahlquist(lambda.conj()),
            &[y0.conj()],
            0.0,
            1.0,
            0.1,
        )
        .unwrap();
        for (a, b) in run.states().iter().zip(conj_run.states()) {
            assert!((a[0].conj() - b[0]).norm() <= 1e-12 * (1.0 + a[0].norm()));
        }
    }

    #[test]
    fn nonautonomous_substeps_use_complex_partial_times() {
        // f(t, y) = t: after cFE2, y = w1 dt t0 + w2 dt (t0 + w1 dt).
        let f = |t: Complex64, _y: &[Complex64]| vec![t];
        let dt = 0.3;
        let t0 = 0.7;
        let out = composed_euler_step(&f, t0, &[c(0.0, 0.0)], dt, &cfe2()).unwrap();
        let (w1, w2) = (c(0.5, 0.5), c(0.5, -0.5));
        let expected = w1 * dt * c(t0, 0.0) + w2 * dt * (c(t0, 0.0) + w1 * dt);
        assert!((out[0] - expected).norm() < 1e-14);
    }

    #[test]
    fn trajectory_csv_format() {
        let f = dahlquist(c(-1.0, 0.0));
        let stepper = Stepper::ComposedEuler(StepPath::forward_euler());
        let run = integrate_ivp(&stepper, &f, &[c(1.0, 0.0)], 0.0, 0.5, 0.5).unwrap();
        let mut out = Vec::new();
        run.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,re_0,im_0"));
        assert_eq!(
            lines.next(),
            Some("0.00000000000e0,1.00000000000e0,0.00000000000e0")
        );
        assert_eq!(
            lines.next(),
            Some("5.00000000000e-1,5.00000000000e-1,0.00000000000e0")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn imaginary_residual_diagnostic() {
        let lambda = c(-10.0, 22.913);
        let scheme = PfeScheme::conjugate_pair(0.1, -1.0 / lambda).unwrap();
        let f = dahlquist(lambda);
        let run = integrate_ivp(&Stepper::Pfe(scheme), &f, &[c(1.0, 0.0)], 0.0, 1.0, 0.1).unwrap();
        // The fast mode dies on the first step; afterwards the state is 0.
        assert!(run.max_imag_residual() < 1e-12);
    }
}
