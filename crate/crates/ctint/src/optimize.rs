//! Stability-polynomial optimization over a prescribed spectrum.
//!
//! Given eigenvalues lambda_j, a stage count n, and an enforced Taylor order
//! p, choose the free coefficients c_{p+1}..c_n of
//! Phi(z) = 1 + z + ... + z^p/p! + c_{p+1} z^{p+1} + ... + c_n z^n
//! so that the step size h with |Phi(h lambda_j)| <= 1 is as large as
//! possible. Feasibility is enforced on the whole segment from the origin to
//! each scaled eigenvalue (fractions f*h*lambda_j), not just the endpoint:
//! the endpoint alone is satisfiable for any h by placing a polynomial root
//! there, which no fixed-step integration from dt -> h could survive.
//!
//! Phi is affine in the free coefficients, so max |Phi| over the constraint
//! points is convex in them. The inner minimax solve runs iteratively
//! reweighted least squares, then deterministic Nelder-Mead restarts over a
//! scale ladder, then a pattern-search polish; the outer maximization bisects
//! on h. Everything is seed-free and deterministic.

use num_complex::Complex64;

use crate::paths::{cmp_weights, distinct_orderings, symmetrize_conjugate_roots, StepPath};
use crate::poly::{roots, StabilityPolynomial};
use crate::{Error, Result};

/// Default relative tolerance on the maximized step.
pub const DEFAULT_TOL_H: f64 = 1e-4;
/// Default feasibility band: h is accepted when max |Phi| <= 1 + tol_feas.
pub const DEFAULT_TOL_FEAS: f64 = 1e-9;

/// Uniform constraint fractions per eigenvalue segment.
const UNIFORM_FRACTIONS: usize = 256;
/// Geometric fractions 2^-1..2^-GEOMETRIC_DEPTH added near the origin, where
/// the uniform grid is blind to tolerance-band exploits (a bump of size
/// 0.148 a^3 hiding below the first uniform sample buys extent ~a for free).
const GEOMETRIC_DEPTH: u32 = 20;

/// Whether free coefficients range over the reals or all of C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffDomain {
    Real,
    Complex,
}

/// A set of eigenvalues constraining the step size.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidInput("spectrum needs at least one eigenvalue".into()));
        }
        if eigenvalues.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
            return Err(Error::InvalidInput("spectrum eigenvalues must be finite".into()));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Parses `re,im` rows; a single non-numeric first line is skipped as a
    /// header.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut eigenvalues = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match parse_spectrum_row(line, idx + 1) {
                Ok(z) => eigenvalues.push(z),
                Err(_) if idx == 0 => continue,
                Err(e) => return Err(e),
            }
        }
        Self::new(eigenvalues)
    }

    /// Writes one `re,im` row per eigenvalue.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "re,im")?;
        for l in &self.eigenvalues {
            writeln!(out, "{:.11e},{:.11e}", l.re, l.im)?;
        }
        Ok(())
    }
}

fn parse_spectrum_row(line: &str, line_no: usize) -> Result<Complex64> {
    let mut parts = line.split(',');
    let (re_tok, im_tok) = match (parts.next(), parts.next(), parts.next()) {
        (Some(re), Some(im), None) => (re.trim(), im.trim()),
        _ => {
            return Err(Error::InvalidInput(format!(
                "spectrum line {line_no} must be `re,im`, got `{line}`"
            )))
        }
    };
    let parse = |tok: &str| {
        tok.parse::<f64>().map_err(|_| {
            Error::InvalidInput(format!("spectrum line {line_no}: `{tok}` is not a number"))
        })
    };
    Ok(Complex64::new(parse(re_tok)?, parse(im_tok)?))
}

/// Full description of one step-size maximization.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub spectrum: Spectrum,
    pub n_stages: usize,
    pub order: usize,
    pub coeff_domain: CoeffDomain,
    pub tol_h: f64,
    pub tol_feas: f64,
}

impl OptimizationProblem {
    /// Builds a problem with default tolerances.
    pub fn new(
        spectrum: Spectrum,
        n_stages: usize,
        order: usize,
        coeff_domain: CoeffDomain,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "order must be >= 1: an inconsistent polynomial solves nothing".into(),
            ));
        }
        if order > n_stages {
            return Err(Error::InvalidInput(format!(
                "order {order} exceeds stage count {n_stages}"
            )));
        }
        Ok(Self {
            spectrum,
            n_stages,
            order,
            coeff_domain,
            tol_h: DEFAULT_TOL_H,
            tol_feas: DEFAULT_TOL_FEAS,
        })
    }

    pub fn with_tolerances(mut self, tol_h: f64, tol_feas: f64) -> Result<Self> {
        if !(tol_h > 0.0) || !tol_h.is_finite() || !(tol_feas > 0.0) || !tol_feas.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tolerances must be positive and finite, got tol_h = {tol_h}, tol_feas = {tol_feas}"
            )));
        }
        self.tol_h = tol_h;
        self.tol_feas = tol_feas;
        Ok(self)
    }
}

/// Outcome of [`max_stable_step`].
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub h_max: f64,
    pub polynomial: StabilityPolynomial,
    /// max over the spectrum of |Phi(h_max lambda_j)| - 1.
    pub residual: f64,
}

impl OptimizationResult {
    /// Writes `{"h_max", "coefficients": [{"re", "im"}], "residual"}` with
    /// 12 significant digits.
    pub fn write_json<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "{{\"h_max\":{:.11e},\"coefficients\":[", self.h_max)?;
        for (j, c) in self.polynomial.coefficients().iter().enumerate() {
            if j > 0 {
                write!(out, ",")?;
            }
            write!(out, "{{\"re\":{:.11e},\"im\":{:.11e}}}", c.re, c.im)?;
        }
        writeln!(out, "],\"residual\":{:.11e}}}", self.residual)
    }
}

/// Taylor coefficients 1/j! for j = 0..=order.
pub(crate) fn taylor_prefix(order: usize) -> Vec<Complex64> {
    let mut prefix = vec![Complex64::new(1.0, 0.0)];
    let mut factorial = 1.0;
    for j in 1..=order {
        factorial *= j as f64;
        prefix.push(Complex64::new(1.0 / factorial, 0.0));
    }
    prefix
}

fn segment_fractions() -> Vec<f64> {
    let mut fracs: Vec<f64> = (1..=UNIFORM_FRACTIONS)
        .map(|m| m as f64 / UNIFORM_FRACTIONS as f64)
        .collect();
    fracs.extend((1..=GEOMETRIC_DEPTH).map(|j| 0.5f64.powi(j as i32)));
    fracs
}

fn constraint_points(constraints: &[Complex64], h: f64) -> Vec<Complex64> {
    let fracs = segment_fractions();
    let mut points = Vec::with_capacity(constraints.len() * fracs.len());
    for &lambda in constraints {
        let scaled = lambda * h;
        points.extend(fracs.iter().map(|&f| scaled * f));
    }
    points
}

/// max |prefix(z) + sum c_k z^{prefix_len + k}| over fixed constraint points,
/// with the prefix values and free-coefficient powers precomputed.
struct MinimaxObjective {
    base: Vec<Complex64>,
    /// Row-major [point][free coefficient] powers z^(prefix_len + k).
    powers: Vec<Complex64>,
    n_free: usize,
}

impl MinimaxObjective {
    fn new(points: &[Complex64], prefix: &[Complex64], n_free: usize) -> Self {
        let mut base = Vec::with_capacity(points.len());
        let mut powers = Vec::with_capacity(points.len() * n_free);
        for &z in points {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in prefix.iter().rev() {
                acc = acc * z + c;
            }
            base.push(acc);
            let mut zp = z.powu(prefix.len() as u32);
            for _ in 0..n_free {
                powers.push(zp);
                zp *= z;
            }
        }
        Self { base, powers, n_free }
    }

    fn n_points(&self) -> usize {
        self.base.len()
    }

    fn residual_at(&self, p: usize, free: &[Complex64]) -> f64 {
        let mut phi = self.base[p];
        for (k, &c) in free.iter().enumerate() {
            phi += c * self.powers[p * self.n_free + k];
        }
        phi.norm()
    }

    fn eval(&self, free: &[Complex64]) -> f64 {
        (0..self.n_points())
            .map(|p| self.residual_at(p, free))
            .fold(0.0, f64::max)
    }
}

/// In-place Gaussian elimination with partial pivoting; `g` is row-major
/// n x n. Returns None on an exactly singular pivot.
pub(crate) fn solve_dense(
    n: usize,
    g: &mut [Complex64],
    rhs: &mut [Complex64],
) -> Option<Vec<Complex64>> {
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| g[a * n + col].norm().partial_cmp(&g[b * n + col].norm()).unwrap())?;
        if g[pivot_row * n + col].norm() == 0.0 {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                g.swap(col * n + j, pivot_row * n + j);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = g[col * n + col];
        for row in col + 1..n {
            let factor = g[row * n + col] / pivot;
            for j in col..n {
                let upper = g[col * n + j];
                g[row * n + j] -= factor * upper;
            }
            let upper_rhs = rhs[col];
            rhs[row] -= factor * upper_rhs;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in row + 1..n {
            acc -= g[row * n + j] * x[j];
        }
        x[row] = acc / g[row * n + row];
    }
    Some(x)
}

/// Iteratively reweighted least squares (Lawson): drives the weighted L2
/// minimizer toward the minimax solution by re-weighting with the residuals.
fn lawson(
    obj: &MinimaxObjective,
    domain: CoeffDomain,
    tol_feas: f64,
) -> (Vec<Complex64>, f64) {
    let n_free = obj.n_free;
    let zero_free = vec![Complex64::new(0.0, 0.0); n_free];
    let mut best_f = obj.eval(&zero_free);
    let mut best_c = zero_free;
    if n_free == 0 {
        return (best_c, best_f);
    }
    let n_points = obj.n_points();
    let mut w = vec![1.0 / n_points as f64; n_points];
    let mut residuals = vec![0.0; n_points];
    for it in 0..600 {
        let solved = match domain {
            CoeffDomain::Complex => {
                let mut g = vec![Complex64::new(0.0, 0.0); n_free * n_free];
                let mut rhs = vec![Complex64::new(0.0, 0.0); n_free];
                for p in 0..n_points {
                    let row = &obj.powers[p * n_free..(p + 1) * n_free];
                    for j in 0..n_free {
                        let wj = w[p] * row[j].conj();
                        for k in 0..n_free {
                            g[j * n_free + k] += wj * row[k];
                        }
                        rhs[j] -= wj * obj.base[p];
                    }
                }
                solve_dense(n_free, &mut g, &mut rhs)
            }
            CoeffDomain::Real => {
                // Stack real and imaginary parts: minimize over real c.
                let mut g = vec![Complex64::new(0.0, 0.0); n_free * n_free];
                let mut rhs = vec![Complex64::new(0.0, 0.0); n_free];
                for p in 0..n_points {
                    let row = &obj.powers[p * n_free..(p + 1) * n_free];
                    for j in 0..n_free {
                        for k in 0..n_free {
                            g[j * n_free + k] +=
                                w[p] * (row[j].re * row[k].re + row[j].im * row[k].im);
                        }
                        rhs[j] -=
                            w[p] * (row[j].re * obj.base[p].re + row[j].im * obj.base[p].im);
                    }
                }
                solve_dense(n_free, &mut g, &mut rhs)
            }
        };
        let Some(c) = solved else { break };
        let c: Vec<Complex64> = match domain {
            CoeffDomain::Complex => c,
            CoeffDomain::Real => c.iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        };
        let mut f = 0.0f64;
        for p in 0..n_points {
            residuals[p] = obj.residual_at(p, &c);
            f = f.max(residuals[p]);
        }
        if f < best_f {
            best_f = f;
            best_c = c;
            if best_f <= 1.0 + tol_feas && it > 40 {
                break;
            }
        }
        let mut total = 0.0;
        for p in 0..n_points {
            w[p] *= residuals[p].max(1e-300);
            total += w[p];
        }
        for wp in w.iter_mut() {
            *wp /= total;
        }
    }
    (best_c, best_f)
}

/// Deterministic Nelder-Mead with standard coefficients; the initial simplex
/// is x0 plus `scale` along each coordinate.
fn nelder_mead(
    obj: &mut impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    scale: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += scale;
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| obj(p)).collect();
    for _ in 0..max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = (vals[n] - vals[0]).abs();
        let diameter = simplex[n]
            .iter()
            .zip(&simplex[0])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if spread < 1e-16 && diameter < 1e-14 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (ci, pi) in centroid.iter_mut().zip(p) {
                *ci += pi / n as f64;
            }
        }
        let blend = |towards: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, wrst)| c + towards * (c - wrst))
                .collect()
        };
        let reflected = blend(1.0);
        let f_reflected = obj(&reflected);
        if f_reflected < vals[0] {
            let expanded = blend(2.0);
            let f_expanded = obj(&expanded);
            if f_expanded < f_reflected {
                simplex[n] = expanded;
                vals[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                vals[n] = f_reflected;
            }
        } else if f_reflected < vals[n - 1] {
            simplex[n] = reflected;
            vals[n] = f_reflected;
        } else {
            let contracted = blend(-0.5);
            let f_contracted = obj(&contracted);
            if f_contracted < vals[n] {
                simplex[n] = contracted;
                vals[n] = f_contracted;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(b, p)| b + 0.5 * (p - b))
                        .collect();
                    simplex[i] = shrunk;
                    vals[i] = obj(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()).unwrap();
    (simplex[best].clone(), vals[best])
}

/// Pattern search over each free coefficient: axis and diagonal probes with a
/// halving radius. Cleans up the curved-valley stalls Nelder-Mead leaves.
fn pattern_polish(
    obj: &MinimaxObjective,
    mut c: Vec<Complex64>,
    mut f: f64,
    domain: CoeffDomain,
) -> (Vec<Complex64>, f64) {
    if c.is_empty() {
        return (c, f);
    }
    let diag = 1.0 / 2.0f64.sqrt();
    let dirs: &[Complex64] = match domain {
        CoeffDomain::Real => &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        CoeffDomain::Complex => &[
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(diag, diag),
            Complex64::new(diag, -diag),
            Complex64::new(-diag, diag),
            Complex64::new(-diag, -diag),
        ],
    };
    let mut radius = 0.1;
    let mut trial = c.clone();
    while radius > 1e-12 {
        let mut improved = false;
        for i in 0..c.len() {
            for &d in dirs {
                trial.copy_from_slice(&c);
                trial[i] = c[i] + radius * d;
                let ft = obj.eval(&trial);
                if ft < f {
                    c.copy_from_slice(&trial);
                    f = ft;
                    improved = true;
                }
            }
        }
        if !improved {
            radius *= 0.5;
        }
    }
    (c, f)
}

fn pack(free: &[Complex64], domain: CoeffDomain) -> Vec<f64> {
    match domain {
        CoeffDomain::Real => free.iter().map(|c| c.re).collect(),
        CoeffDomain::Complex => free
            .iter()
            .map(|c| c.re)
            .chain(free.iter().map(|c| c.im))
            .collect(),
    }
}

fn unpack(x: &[f64], domain: CoeffDomain) -> Vec<Complex64> {
    match domain {
        CoeffDomain::Real => x.iter().map(|&re| Complex64::new(re, 0.0)).collect(),
        CoeffDomain::Complex => {
            let n = x.len() / 2;
            (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect()
        }
    }
}

/// Inner convex minimax solve at fixed h: returns the (near-)minimizing free
/// coefficients and the achieved max |Phi|.
fn inner_solve(
    points: &[Complex64],
    prefix: &[Complex64],
    n_free: usize,
    domain: CoeffDomain,
    tol_feas: f64,
) -> (Vec<Complex64>, f64) {
    let obj = MinimaxObjective::new(points, prefix, n_free);
    let (c, mut f) = lawson(&obj, domain, tol_feas);
    if n_free == 0 {
        return (c, f);
    }
    let mut x = pack(&c, domain);
    {
        let mut packed_obj = |x: &[f64]| obj.eval(&unpack(x, domain));
        for &scale in &[0.1, 0.01, 1e-4, 1e-7, 1e-10] {
            let (xs, fs) = nelder_mead(&mut packed_obj, &x, scale, 2000);
            x = xs;
            f = fs;
        }
    }
    pattern_polish(&obj, unpack(&x, domain), f, domain)
}

fn assemble(prefix: &[Complex64], free: &[Complex64]) -> Result<StabilityPolynomial> {
    let mut coeffs = prefix.to_vec();
    coeffs.extend_from_slice(free);
    StabilityPolynomial::new(coeffs)
}

/// Minimizes max_j |Phi(f h lambda_j)| over the free coefficients
/// c_{prefix_len}..c_{n_stages} and reports whether the minimum clears
/// 1 + tol_feas, together with the minimizing polynomial.
pub fn stability_feasible(
    spectrum: &Spectrum,
    h: f64,
    prefix: &[Complex64],
    n_stages: usize,
    domain: CoeffDomain,
    tol_feas: f64,
) -> Result<(bool, StabilityPolynomial)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {h}")));
    }
    if prefix.is_empty() || n_stages + 1 < prefix.len() {
        return Err(Error::InvalidInput(format!(
            "prefix of {} coefficients does not fit {n_stages} stages",
            prefix.len()
        )));
    }
    let n_free = n_stages + 1 - prefix.len();
    let points = constraint_points(spectrum.eigenvalues(), h);
    let (free, f) = inner_solve(&points, prefix, n_free, domain, tol_feas);
    Ok((f <= 1.0 + tol_feas, assemble(prefix, &free)?))
}

/// Bisects on h for the largest step with a feasible stability polynomial.
///
/// The bracket is [tol_h * h_hi, h_hi] with h_hi = 10 n_stages^2 / min |lambda|
/// (Chebyshev-type polynomials reach 2 n^2 on the real axis, so the cap has
/// a 5x margin); exact duplicate and zero eigenvalues are dropped first.
pub fn max_stable_step(prob: &OptimizationProblem) -> Result<OptimizationResult> {
    let mut constraints: Vec<Complex64> = Vec::new();
    for &l in prob.spectrum.eigenvalues() {
        if l == Complex64::new(0.0, 0.0) {
            continue;
        }
        if !constraints.contains(&l) {
            constraints.push(l);
        }
    }
    if constraints.is_empty() {
        return Err(Error::InvalidInput(
            "spectrum has no nonzero eigenvalues to constrain the step".into(),
        ));
    }
    let prefix = taylor_prefix(prob.order);
    let n_free = prob.n_stages - prob.order;
    let min_abs = constraints.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
    let h_hi = 10.0 * (prob.n_stages * prob.n_stages) as f64 / min_abs;

    let solve_at = |h: f64| {
        let points = constraint_points(&constraints, h);
        let (free, f) = inner_solve(&points, &prefix, n_free, prob.coeff_domain, prob.tol_feas);
        (f <= 1.0 + prob.tol_feas, free)
    };

    let mut lo = prob.tol_h * h_hi;
    let (lo_ok, mut witness) = solve_at(lo);
    if !lo_ok {
        return Err(Error::Infeasible(format!(
            "no stable step found even at h = {lo:.3e}; the spectrum resists the stage budget"
        )));
    }
    let mut hi = h_hi;
    let (hi_ok, hi_witness) = solve_at(hi);
    if hi_ok {
        lo = hi;
        witness = hi_witness;
    } else {
        while hi - lo > prob.tol_h * lo {
            let mid = 0.5 * (lo + hi);
            let (ok, c) = solve_at(mid);
            if ok {
                lo = mid;
                witness = c;
            } else {
                hi = mid;
            }
        }
    }
    let polynomial = assemble(&prefix, &witness)?;
    let residual = prob
        .spectrum
        .eigenvalues()
        .iter()
        .map(|&l| polynomial.eval(l * lo).norm() - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(OptimizationResult { h_max: lo, polynomial, residual })
}

/// Adds the imaginary-axis-enlarging cubic perturbation: with
/// theta = arg Phi(i Y_R), returns Phi + epsilon * (-i e^{i theta} / Y_R^3) z^3.
/// Requires Phi real-coefficient, first-order consistent, and |Phi(i Y_R)| = 1
/// within 1e-6 (Y_R marks the edge of the unperturbed imaginary-axis
/// stability interval).
pub fn perturb_imaginary(
    p: &StabilityPolynomial,
    y_r: f64,
    epsilon: f64,
) -> Result<StabilityPolynomial> {
    if !p.has_real_coefficients() {
        return Err(Error::InvalidInput(
            "imaginary-axis perturbation starts from a real-coefficient polynomial".into(),
        ));
    }
    if !p.is_first_order_consistent() {
        return Err(Error::InvalidInput("polynomial must have c_0 = c_1 = 1".into()));
    }
    if !(y_r > 0.0) || !y_r.is_finite() {
        return Err(Error::InvalidInput(format!("Y_R must be positive, got {y_r}")));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let boundary_value = p.eval(Complex64::new(0.0, y_r));
    if (boundary_value.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "|Phi(i Y_R)| = {} but the perturbation direction is defined on the stability boundary",
            boundary_value.norm()
        )));
    }
    if epsilon == 0.0 {
        return Ok(p.clone());
    }
    let theta = boundary_value.arg();
    let delta = Complex64::new(0.0, -1.0)
        * Complex64::new(0.0, theta).exp()
        * (epsilon / (y_r * y_r * y_r));
    let mut coeffs = p.coefficients().to_vec();
    while coeffs.len() < 4 {
        coeffs.push(Complex64::new(0.0, 0.0));
    }
    coeffs[3] += delta;
    StabilityPolynomial::new(coeffs)
}

/// Factors Phi = Prod (1 + w_i z) and returns the step paths realizing it:
/// all distinct weight orderings for degree <= 3, one canonical ordering
/// otherwise.
pub fn polynomial_to_paths(p: &StabilityPolynomial) -> Result<Vec<StepPath>> {
    if (p.coefficients()[0] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::InvalidInput(
            "path recovery requires c_0 = 1 (a consistent one-step method)".into(),
        ));
    }
    if p.degree() == 0 {
        return Err(Error::InvalidInput("constant polynomial has no step path".into()));
    }
    let rs = roots(p)?;
    let mut weights = Vec::with_capacity(rs.len());
    for r in rs {
        if r.norm() < 1e-9 {
            return Err(Error::InvalidInput(
                "polynomial root at the origin cannot be a finite substep".into(),
            ));
        }
        weights.push(-1.0 / r);
    }
    if p.has_real_coefficients() {
        weights = symmetrize_conjugate_roots(weights);
    }
    weights.sort_by(cmp_weights);
    let orderings = if p.degree() <= 3 {
        distinct_orderings(weights)
    } else {
        vec![weights]
    };
    orderings.into_iter().map(StepPath::new).collect()
}
