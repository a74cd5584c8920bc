//! Named stability polynomials, step paths, and stepper factories.
//!
//! The by-name lookups freeze the handful of schemes used throughout the
//! command-line tool and the verification suite, so figures regenerate
//! without retyping constants. Composed-Euler path presets (`cfe1`..`cfe3`)
//! are regenerated from the full-order root solve at full precision rather
//! than stored as rounded literals.

use num_complex::Complex64;

use crate::integrate::{PfeScheme, SlopeRule, Stepper};
use crate::paths::{enumerate_full_order_paths, StepPath};
use crate::poly::StabilityPolynomial;
use crate::{Error, Result};

/// Every name accepted by [`polynomial`].
pub const POLYNOMIAL_PRESETS: [&str; 11] = [
    "fe",
    "rk2",
    "rk3",
    "cfe1",
    "cfe2",
    "cfe3",
    "phi_r",
    "phi_c",
    "phi_c_minus",
    "rkopt_3s2",
    "copt_3s2",
];

/// Names that also carry a step path (see [`path`]).
pub const PATH_PRESETS: [&str; 4] = ["fe", "cfe1", "cfe2", "cfe3"];

fn real_polynomial(coeffs: &[f64]) -> StabilityPolynomial {
    StabilityPolynomial::from_real(coeffs).expect("valid preset coefficients")
}

fn unknown_name(name: &str, valid: &[&str]) -> Error {
    Error::InvalidInput(format!(
        "unknown preset \"{name}\" (expected one of: {})",
        valid.join(", ")
    ))
}

/// The amplification polynomial a named scheme applies per step, in
/// z = lambda * dt.
///
/// - `fe`, `rk2`, `rk3`: Taylor prefixes of degree 1..3;
/// - `cfe1`..`cfe3`: composed-Euler paths of full order (their polynomial is
///   the same Taylor prefix, reproduced here from the regenerated weights);
/// - `phi_r` = [1, 1, 1] and the complex pair `phi_c` = [1, 1, 1/2 + i/2],
///   `phi_c_minus` = [1, 1, 1/2 - i/2] that trade the second-order condition
///   for imaginary-axis coverage;
/// - `rkopt_3s2` = [1, 1, 1/2, 0.1134] and its complex-shifted variant
///   `copt_3s2` = [1, 1, 1/2, 0.1134 - 0.06i].
pub fn polynomial(name: &str) -> Result<StabilityPolynomial> {
    let poly = match name {
        "fe" => real_polynomial(&[1.0, 1.0]),
        "rk2" => real_polynomial(&[1.0, 1.0, 0.5]),
        "rk3" => real_polynomial(&[1.0, 1.0, 0.5, 1.0 / 6.0]),
        "cfe1" | "cfe2" | "cfe3" => path(name)?.stability_polynomial(),
        "phi_r" => real_polynomial(&[1.0, 1.0, 1.0]),
        "phi_c" => StabilityPolynomial::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.5),
        ])?,
        "phi_c_minus" => StabilityPolynomial::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, -0.5),
        ])?,
        "rkopt_3s2" => real_polynomial(&[1.0, 1.0, 0.5, 0.1134]),
        "copt_3s2" => StabilityPolynomial::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.1134, -0.06),
        ])?,
        _ => return Err(unknown_name(name, &POLYNOMIAL_PRESETS)),
    };
    Ok(poly)
}

/// The canonical step path behind a path preset: plain forward Euler for
/// `fe`/`cfe1`, and the weight-sorted member of the full-order family for
/// `cfe2`/`cfe3`.
pub fn path(name: &str) -> Result<StepPath> {
    let n_steps = match name {
        "fe" | "cfe1" => return Ok(StepPath::forward_euler()),
        "cfe2" => 2,
        "cfe3" => 3,
        _ => return Err(unknown_name(name, &PATH_PRESETS)),
    };
    let family = enumerate_full_order_paths(n_steps)?;
    Ok(family.members()[0].clone())
}

/// Parses a user-facing complex token like `2`, `-1.5e-3`, `i`, `-2i`, or
/// `0.5-0.5i`, as accepted wherever weights or coefficients are typed in.
pub fn parse_complex_token(token: &str) -> Result<Complex64> {
    let t = token.trim();
    let bad = || {
        Error::InvalidInput(format!(
            "`{t}` is not a complex number (examples: 2, -1.5e-3, 2i, 0.5-0.5i)"
        ))
    };
    if t.is_empty() {
        return Err(Error::InvalidInput(
            "empty token where a complex number was expected".into(),
        ));
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last +/- that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&pos| matches!(bytes[pos], b'+' | b'-') && !matches!(bytes[pos - 1], b'e' | b'E'));
    let (re_str, im_str) = match split {
        Some(pos) => (&body[..pos], &body[pos..]),
        None => ("", body),
    };
    let re = if re_str.is_empty() { 0.0 } else { re_str.parse().map_err(|_| bad())? };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

/// A stepper factory paired with the exact polynomial its one-step
/// amplification follows on y' = lambda y.
///
/// Projective schemes bake the step size into their construction, so the
/// preset builds the stepper per dt (with inner substeps held at fixed
/// fractions of dt); the polynomial is then exact in z = lambda * dt for
/// every dt.
pub struct StepperPreset {
    name: &'static str,
    polynomial: StabilityPolynomial,
    build: fn(f64) -> Stepper,
}

impl StepperPreset {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn polynomial(&self) -> &StabilityPolynomial {
        &self.polynomial
    }

    pub fn stepper(&self, dt: f64) -> Stepper {
        (self.build)(dt)
    }
}

const PFE_INNER_FRACTION: f64 = 0.1;
const PFE_INNER_COUNT: usize = 2;
const FRESH_FRACTIONS: [f64; 2] = [0.05, 0.15];
const CONJUGATE_FRACTION: Complex64 = Complex64::new(0.08, 0.12);

fn build_euler(_dt: f64) -> Stepper {
    Stepper::ComposedEuler(StepPath::forward_euler())
}

fn build_cfe2(_dt: f64) -> Stepper {
    Stepper::ComposedEuler(path("cfe2").expect("preset path"))
}

fn build_cfe3(_dt: f64) -> Stepper {
    Stepper::ComposedEuler(path("cfe3").expect("preset path"))
}

fn build_two_stage_real(_dt: f64) -> Stepper {
    Stepper::TwoStage(Complex64::new(1.0, 0.0))
}

fn build_two_stage_complex(_dt: f64) -> Stepper {
    Stepper::TwoStage(Complex64::new(0.5, -0.5))
}

fn build_pfe(dt: f64) -> Stepper {
    Stepper::Pfe(
        PfeScheme::equal_real_steps(dt, PFE_INNER_FRACTION * dt, PFE_INNER_COUNT)
            .expect("valid projective preset"),
    )
}

fn build_pfe_fresh(dt: f64) -> Stepper {
    let inner = FRESH_FRACTIONS
        .iter()
        .map(|f| Complex64::new(f * dt, 0.0))
        .collect();
    Stepper::Pfe(
        PfeScheme::new(dt, inner)
            .and_then(|s| s.with_slope_rule(SlopeRule::FreshEval))
            .expect("valid projective preset"),
    )
}

fn build_cpfe(dt: f64) -> Stepper {
    Stepper::Pfe(
        PfeScheme::conjugate_pair(dt, CONJUGATE_FRACTION * dt)
            .expect("valid projective preset"),
    )
}

fn fresh_slope_polynomial(weights: Vec<Complex64>) -> StabilityPolynomial {
    StepPath::new(weights)
        .expect("consistent fresh-slope weights")
        .stability_polynomial()
}

/// The full roster of stepper presets, covering each stepper kind and both
/// projective slope rules.
pub fn stepper_presets() -> Vec<StepperPreset> {
    let fresh_weights = vec![
        Complex64::new(FRESH_FRACTIONS[0], 0.0),
        Complex64::new(FRESH_FRACTIONS[1], 0.0),
        Complex64::new(1.0 - FRESH_FRACTIONS[0] - FRESH_FRACTIONS[1], 0.0),
    ];
    let conjugate_weights = vec![
        CONJUGATE_FRACTION,
        CONJUGATE_FRACTION.conj(),
        Complex64::new(1.0 - 2.0 * CONJUGATE_FRACTION.re, 0.0),
    ];
    vec![
        StepperPreset {
            name: "euler",
            polynomial: polynomial("fe").expect("preset"),
            build: build_euler,
        },
        StepperPreset {
            name: "cfe2",
            polynomial: polynomial("cfe2").expect("preset"),
            build: build_cfe2,
        },
        StepperPreset {
            name: "cfe3",
            polynomial: polynomial("cfe3").expect("preset"),
            build: build_cfe3,
        },
        StepperPreset {
            name: "two_stage_real",
            polynomial: polynomial("phi_r").expect("preset"),
            build: build_two_stage_real,
        },
        StepperPreset {
            name: "two_stage_complex",
            polynomial: polynomial("phi_c_minus").expect("preset"),
            build: build_two_stage_complex,
        },
        StepperPreset {
            name: "pfe_two_inner",
            // The extrapolation slope replays the last inner factor, so a
            // scheme with M inner steps follows the k = M - 1 polynomial.
            polynomial: crate::integrate::pfe_stability_polynomial(
                Complex64::new(PFE_INNER_FRACTION, 0.0),
                PFE_INNER_COUNT - 1,
            ),
            build: build_pfe,
        },
        StepperPreset {
            name: "pfe_fresh_slope",
            polynomial: fresh_slope_polynomial(fresh_weights),
            build: build_pfe_fresh,
        },
        StepperPreset {
            name: "cpfe_conjugate_pair",
            polynomial: fresh_slope_polynomial(conjugate_weights),
            build: build_cpfe,
        },
    ]
}
