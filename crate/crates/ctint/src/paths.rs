//! Complex forward-Euler step paths.
//!
//! A step path splits one step of size dt into substeps w_1*dt, ..., w_n*dt
//! with complex weights w_i. Applied to y' = lambda*y the composition
//! multiplies the state by Prod (1 + w_i z), so the weights fully determine
//! the stability polynomial, and the linear order of accuracy is read off the
//! elementary symmetric polynomials of the weights: order >= m iff
//! e_k(w) = 1/k! for all k <= m.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::poly::{roots, StabilityPolynomial};
use crate::{Error, Result};

/// Tolerance for the order conditions |e_m(w) - 1/m!|.
pub const ORDER_CONDITION_TOL: f64 = 1e-10;

/// Largest substep count for which all full-order paths are enumerated.
pub const MAX_ENUMERATED_STEPS: usize = 5;

/// An ordered list of complex substep weights (fractions of the outer step).
///
/// Consistency (sum w_i = 1) is flagged, not required: steppers that need it
/// check [`StepPath::is_consistent`] themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    weights: Vec<Complex64>,
    consistent: bool,
}

impl StepPath {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput("step path needs at least one weight".into()));
        }
        if weights.iter().any(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidInput("step path weights must be finite".into()));
        }
        let total: Complex64 = weights.iter().sum();
        let consistent = (total - Complex64::new(1.0, 0.0)).norm() <= ORDER_CONDITION_TOL;
        Ok(Self { weights, consistent })
    }

    /// Single real forward-Euler step.
    pub fn forward_euler() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0)]).unwrap()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn n_steps(&self) -> usize {
        self.weights.len()
    }

    /// Whether the weights sum to 1 (within 1e-10).
    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    /// Expands Prod (1 + w_i z); degree = n, c_0 = 1 exactly, c_1 = sum w_i.
    pub fn stability_polynomial(&self) -> StabilityPolynomial {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.weights.len() + 1];
        coeffs[0] = Complex64::new(1.0, 0.0);
        for (used, &w) in self.weights.iter().enumerate() {
            for j in (1..=used + 1).rev() {
                let lower = coeffs[j - 1];
                coeffs[j] += w * lower;
            }
        }
        StabilityPolynomial::new(coeffs).expect("product of monic linear factors is nonzero")
    }

    /// Linear order of accuracy: the largest p <= max_order with
    /// e_m(w) = 1/m! for all m <= p (e_m = 0 beyond n). Returns 0 when
    /// already e_1 != 1.
    pub fn order_of_accuracy(&self, max_order: usize) -> usize {
        let e = elementary_symmetric(&self.weights);
        let mut factorial = 1.0;
        for m in 1..=max_order {
            factorial *= m as f64;
            let e_m = e.get(m).copied().unwrap_or(Complex64::new(0.0, 0.0));
            if (e_m - Complex64::new(1.0 / factorial, 0.0)).norm() > ORDER_CONDITION_TOL {
                return m - 1;
            }
        }
        max_order
    }

    /// Prefix sums of the weights: the polyline the step traces through
    /// complex time, ending at e_1 (1 for consistent paths).
    pub fn partial_sums(&self) -> Vec<Complex64> {
        self.weights
            .iter()
            .scan(Complex64::new(0.0, 0.0), |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect()
    }
}

/// Elementary symmetric polynomials e_0..e_n of the weights (e_0 = 1).
fn elementary_symmetric(weights: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); weights.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (used, &w) in weights.iter().enumerate() {
        for m in (1..=used + 1).rev() {
            let lower = e[m - 1];
            e[m] += w * lower;
        }
    }
    e
}

/// All step paths with a common substep count and (at least) a common order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFamily {
    pub n_steps: usize,
    pub order: usize,
    members: Vec<StepPath>,
}

impl PathFamily {
    /// Validates that every member has `n_steps` weights and meets `order`.
    pub fn new(n_steps: usize, order: usize, members: Vec<StepPath>) -> Result<Self> {
        if n_steps == 0 || order == 0 {
            return Err(Error::InvalidInput("family needs n_steps >= 1 and order >= 1".into()));
        }
        if members.is_empty() {
            return Err(Error::InvalidInput("family needs at least one member".into()));
        }
        for (idx, m) in members.iter().enumerate() {
            if m.n_steps() != n_steps {
                return Err(Error::InvalidInput(format!(
                    "member {idx} has {} steps, family declares {n_steps}",
                    m.n_steps()
                )));
            }
            if m.order_of_accuracy(order) < order {
                return Err(Error::InvalidInput(format!(
                    "member {idx} does not reach order {order}"
                )));
            }
        }
        Ok(Self { n_steps, order, members })
    }

    pub fn members(&self) -> &[StepPath] {
        &self.members
    }

    /// Writes `{"n_steps", "order", "paths": [[{"re", "im"}, ...], ...]}`
    /// with weights at 12 significant digits.
    pub fn write_json<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "{{\"n_steps\":{},\"order\":{},\"paths\":[", self.n_steps, self.order)?;
        for (i, member) in self.members.iter().enumerate() {
            if i > 0 {
                write!(out, ",")?;
            }
            write!(out, "[")?;
            for (j, w) in member.weights().iter().enumerate() {
                if j > 0 {
                    write!(out, ",")?;
                }
                write!(out, "{{\"re\":{:.11e},\"im\":{:.11e}}}", w.re, w.im)?;
            }
            write!(out, "]")?;
        }
        writeln!(out, "]}}")
    }
}

/// Weight multiset shared by every full-order n-step path: the roots of the
/// monic polynomial whose elementary symmetric values are e_m = 1/m!,
/// sorted by (re, im).
pub fn full_order_weights(n: usize) -> Result<Vec<Complex64>> {
    if n == 0 || n > MAX_ENUMERATED_STEPS {
        return Err(Error::InvalidInput(format!(
            "full-order enumeration supports 1..={MAX_ENUMERATED_STEPS} substeps, got {n}"
        )));
    }
    // Prod (x - w_i) = sum_j (-1)^(n-j) e_{n-j} x^j with e_m = 1/m!.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut factorial = 1.0;
    let mut factorials = vec![1.0];
    for m in 1..=n {
        factorial *= m as f64;
        factorials.push(factorial);
    }
    for j in 0..=n {
        let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[j] = Complex64::new(sign / factorials[n - j], 0.0);
    }
    let mut ws = symmetrize_conjugate_roots(roots(&StabilityPolynomial::new(coeffs)?)?);
    ws.sort_by(cmp_weights);
    Ok(ws)
}

/// Pairs near-conjugate members of a root multiset and averages each pair so
/// the result is exactly closed under conjugation, with tiny imaginary parts
/// of real roots zeroed. Valid only for roots of real-coefficient
/// polynomials, where the multiset is conjugate-closed mathematically and any
/// asymmetry is root-finder noise; without this, sorting by exact float
/// comparison is unstable.
pub(crate) fn symmetrize_conjugate_roots(roots: Vec<Complex64>) -> Vec<Complex64> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut pending = roots;
    let mut out = Vec::with_capacity(pending.len());
    while let Some(r) = pending.pop() {
        if r.im.abs() <= tol {
            out.push(Complex64::new(r.re, 0.0));
            continue;
        }
        let partner = pending
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s.conj() - r).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        match partner {
            Some((i, dist)) if dist <= tol => {
                let s = pending.swap_remove(i);
                let mean = 0.5 * (r + s.conj());
                out.push(mean);
                out.push(mean.conj());
            }
            _ => out.push(r),
        }
    }
    out
}

/// Every n-substep path of full linear order n: all distinct orderings of
/// [`full_order_weights`], in lexicographic (re, im) order. Family sizes for
/// n = 1, 2, 3 are 1, 2, 6.
pub fn enumerate_full_order_paths(n: usize) -> Result<PathFamily> {
    let sorted = full_order_weights(n)?;
    let members = distinct_orderings(sorted)
        .into_iter()
        .map(StepPath::new)
        .collect::<Result<Vec<_>>>()?;
    PathFamily::new(n, n, members)
}

pub(crate) fn cmp_weights(a: &Complex64, b: &Complex64) -> Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap()
        .then(a.im.partial_cmp(&b.im).unwrap())
}

/// All distinct permutations of an already-sorted multiset, lexicographically.
pub(crate) fn distinct_orderings(sorted: Vec<Complex64>) -> Vec<Vec<Complex64>> {
    let mut seq = sorted;
    let mut out = vec![seq.clone()];
    let n = seq.len();
    loop {
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| cmp_weights(&seq[i], &seq[i + 1]) == Ordering::Less)
        else {
            break;
        };
        let j = (i + 1..n)
            .rev()
            .find(|&j| cmp_weights(&seq[i], &seq[j]) == Ordering::Less)
            .expect("a successor exists to the right of a lexicographic ascent");
        seq.swap(i, j);
        seq[i + 1..].reverse();
        out.push(seq.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfe2() -> StepPath {
        StepPath::new(vec![c(0.5, 0.5), c(0.5, -0.5)]).unwrap()
    }

    #[test]
    fn polynomial_of_single_step() {
        let p = StepPath::forward_euler().stability_polynomial();
        assert_eq!(p.coefficients(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn polynomial_of_conjugate_pair_matches_second_order_taylor() {
        let p = cfe2().stability_polynomial();
        assert_eq!(p.degree(), 2);
        assert!((p.coefficients()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.coefficients()[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.coefficients()[2] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn order_of_accuracy_examples() {
        assert_eq!(StepPath::forward_euler().order_of_accuracy(4), 1);
        // Real halved substeps stay first order: e_2 = 1/4 != 1/2.
        let halved = StepPath::new(vec![c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(halved.order_of_accuracy(4), 1);
        assert_eq!(cfe2().order_of_accuracy(4), 2);
        // Inconsistent weights never reach first order.
        let off = StepPath::new(vec![c(0.9, 0.0)]).unwrap();
        assert_eq!(off.order_of_accuracy(4), 0);
    }

    #[test]
    fn consistency_flag() {
        assert!(StepPath::forward_euler().is_consistent());
        assert!(cfe2().is_consistent());
        assert!(!StepPath::new(vec![c(0.5, 0.0), c(0.1, 0.0)]).unwrap().is_consistent());
    }

    #[test]
    fn degenerate_paths_rejected() {
        assert!(StepPath::new(vec![]).is_err());
        assert!(StepPath::new(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn partial_sums_trace_the_step() {
        assert_eq!(StepPath::forward_euler().partial_sums(), vec![c(1.0, 0.0)]);
        assert_eq!(cfe2().partial_sums(), vec![c(0.5, 0.5), c(1.0, 0.0)]);
        let thirds = StepPath::new(vec![c(1.0 / 3.0, 0.0); 3]).unwrap();
        let sums = thirds.partial_sums();
        assert_relative_eq!(sums[0].re, 1.0 / 3.0);
        assert_relative_eq!(sums[1].re, 2.0 / 3.0);
        assert_relative_eq!(sums[2].re, 1.0);
    }

    #[test]
    fn family_sizes_one_two_six() {
        assert_eq!(enumerate_full_order_paths(1).unwrap().members().len(), 1);
        assert_eq!(enumerate_full_order_paths(2).unwrap().members().len(), 2);
        assert_eq!(enumerate_full_order_paths(3).unwrap().members().len(), 6);
    }

    #[test]
    fn one_step_family_is_forward_euler() {
        let family = enumerate_full_order_paths(1).unwrap();
        let w = family.members()[0].weights()[0];
        assert!((w - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn two_step_weights_are_half_plus_minus_half_i() {
        let family = enumerate_full_order_paths(2).unwrap();
        // Canonical (re, im) order puts the negative-imaginary weight first.
        let first = family.members()[0].weights();
        assert!((first[0] - c(0.5, -0.5)).norm() < 1e-12);
        assert!((first[1] - c(0.5, 0.5)).norm() < 1e-12);
        let second = family.members()[1].weights();
        assert!((second[0] - c(0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn three_step_weight_multiset() {
        let ws = full_order_weights(3).unwrap();
        // Sorted by (re, im): conjugate pair first, the real weight last.
        assert!((ws[0] - c(0.186731, -0.480774)).norm() < 1e-5);
        assert!((ws[1] - c(0.186731, 0.480774)).norm() < 1e-5);
        assert!((ws[2] - c(0.626538, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn full_order_members_match_exponential_taylor() {
        for n in 1..=MAX_ENUMERATED_STEPS {
            let family = enumerate_full_order_paths(n).unwrap();
            let mut factorials = vec![1.0];
            for m in 1..=n {
                factorials.push(factorials[m - 1] * m as f64);
            }
            for member in family.members() {
                assert_eq!(member.order_of_accuracy(n), n);
                let p = member.stability_polynomial();
                for (j, cj) in p.coefficients().iter().enumerate() {
                    assert!(
                        (cj - c(1.0 / factorials[j], 0.0)).norm() < 1e-6,
                        "n = {n}, coefficient {j} = {cj}"
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_range_checked() {
        assert!(enumerate_full_order_paths(0).is_err());
        assert!(enumerate_full_order_paths(6).is_err());
    }

    #[test]
    fn family_validation() {
        let fe = StepPath::forward_euler();
        assert!(PathFamily::new(1, 1, vec![fe.clone()]).is_ok());
        assert!(PathFamily::new(2, 1, vec![fe.clone()]).is_err());
        assert!(PathFamily::new(1, 2, vec![fe.clone()]).is_err());
        assert!(PathFamily::new(1, 1, vec![]).is_err());
        // A second-order claim on a first-order member is rejected.
        let halved = StepPath::new(vec![c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(PathFamily::new(2, 2, vec![halved]).is_err());
    }

    #[test]
    fn family_json_format() {
        let family = PathFamily::new(
            2,
            2,
            vec![cfe2(), StepPath::new(vec![c(0.5, -0.5), c(0.5, 0.5)]).unwrap()],
        )
        .unwrap();
        let mut out = Vec::new();
        family.write_json(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "{\"n_steps\":2,\"order\":2,\"paths\":[\
             [{\"re\":5.00000000000e-1,\"im\":5.00000000000e-1},\
             {\"re\":5.00000000000e-1,\"im\":-5.00000000000e-1}],\
             [{\"re\":5.00000000000e-1,\"im\":-5.00000000000e-1},\
             {\"re\":5.00000000000e-1,\"im\":5.00000000000e-1}]]}\n"
        );
    }

    #[test]
    fn distinct_orderings_deduplicate_repeats() {
        let orderings = distinct_orderings(vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(orderings.len(), 3);
    }

    proptest! {
        #[test]
        fn polynomial_is_permutation_invariant(
            pairs in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..6),
            seed in 0u64..1000,
        ) {
            let weights: Vec<Complex64> = pairs.iter().map(|&(re, im)| c(re, im)).collect();
            // Deterministic pseudo-shuffle driven by the seed.
            let mut shuffled = weights.clone();
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            for i in (1..shuffled.len()).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                shuffled.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let a = StepPath::new(weights).unwrap().stability_polynomial();
            let b = StepPath::new(shuffled).unwrap().stability_polynomial();
            for (ca, cb) in a.coefficients().iter().zip(b.coefficients()) {
                prop_assert!((ca - cb).norm() <= 1e-12);
            }
        }

        #[test]
        fn roots_recover_negative_reciprocal_weights(
            pairs in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6),
        ) {
            let weights: Vec<Complex64> = pairs.iter().map(|&(re, im)| c(re, im)).collect();
            prop_assume!(weights.iter().all(|w| w.norm() > 0.2));
            // Clustered weights make root recovery ill-conditioned; keep them apart.
            for i in 0..weights.len() {
                for j in 0..i {
                    prop_assume!((weights[i] - weights[j]).norm() > 0.1);
                }
            }
            let p = StepPath::new(weights.clone()).unwrap().stability_polynomial();
            let rs = roots(&p).unwrap();
            let mut expected: Vec<Complex64> = weights.iter().map(|w| -1.0 / w).collect();
            for r in rs {
                let (idx, dist) = expected
                    .iter()
                    .enumerate()
                    .map(|(i, e)| (i, (e - r).norm()))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                prop_assert!(dist <= 1e-6, "root {r} missed nearest weight by {dist}");
                expected.swap_remove(idx);
            }
        }

        #[test]
        fn conjugate_closed_weights_give_real_coefficients(
            pairs in proptest::collection::vec((-2.0..2.0f64, 0.01..2.0f64), 1..3),
            real_extra in proptest::option::of(-2.0..2.0f64),
        ) {
            let mut weights = Vec::new();
            for &(re, im) in &pairs {
                weights.push(c(re, im));
                weights.push(c(re, -im));
            }
            if let Some(re) = real_extra {
                weights.push(c(re, 0.0));
            }
            // Interleave to exercise orderings other than adjacent pairs.
            weights.reverse();
            let p = StepPath::new(weights).unwrap().stability_polynomial();
            for cj in p.coefficients() {
                prop_assert!(cj.im.abs() <= 1e-10);
            }
        }
    }
}
