//! Probabilistic zero test by guarded random evaluation.
//!
//! Canonical forms for expressions with radicals are undecidable in
//! general, so identity checks are numeric: draw guard-accepted points and
//! compare the residual against a tolerance scaled by the largest additive
//! term, which keeps the test meaningful for expressions with large dynamic
//! range.

use super::{additive_terms, guard_conditions, sample_domain_points, simplify, Evaluator};
use super::{Expr, GuardKind, SampleDomain};
use crate::error::Error;

/// Worst point seen by a zero test.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWitness {
    /// Coordinates in domain variable order.
    pub point: Vec<(String, f64)>,
    /// Raw residual `|e(point)|`.
    pub residual: f64,
}

/// Outcome of [`is_zero`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOutcome {
    pub is_zero: bool,
    /// Largest scale-normalized residual over the accepted points.
    pub max_scaled_residual: f64,
    /// Worst point with its raw residual; present whenever at least one
    /// point was evaluated.
    pub witness: Option<ZeroWitness>,
}

/// Tests whether `e` vanishes identically on `dom`.
///
/// Draws `samples` guard-accepted points and accepts when at every point
/// `|e(p)| <= tol * (1 + max_i |t_i(p)|)` where `t_i` are the additive
/// terms of the simplified expression. Fails with
/// [`Error::DomainExhausted`] when rejection sampling cannot find enough
/// admissible points.
pub fn is_zero(
    e: &Expr,
    dom: &SampleDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroOutcome, Error> {
    let e = simplify(e);
    run_zero_test(additive_terms(&e), &[], dom, samples, tol, seed)
}

/// Tests whether two already-normalized expressions agree on `dom`:
/// `|a(p) - b(p)| <= tol * (1 + largest additive term of either)`.
///
/// Unlike [`is_zero`] this never rebuilds its inputs, so it is the cheap
/// path for comparing large expanded expressions against compact closed
/// forms. Callers are expected to pass simplified expressions.
pub fn exprs_agree(
    a: &Expr,
    b: &Expr,
    dom: &SampleDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroOutcome, Error> {
    run_zero_test(additive_terms(a), additive_terms(b), dom, samples, tol, seed)
}

/// Shared evaluation loop: residual `|sum(plus) - sum(minus)|` with scale
/// `1 + max |term|` over both sides.
fn run_zero_test(
    plus: &[Expr],
    minus: &[Expr],
    dom: &SampleDomain,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ZeroOutcome, Error> {
    let mut conds: Vec<(GuardKind, Expr)> = Vec::new();
    for term in plus.iter().chain(minus) {
        conds.extend(guard_conditions(term));
    }
    conds.sort();
    conds.dedup();
    let points = sample_domain_points(dom, &conds, samples.max(1), seed)?;
    let vars = dom.variables();

    let mut passed = true;
    let mut max_scaled = 0.0f64;
    let mut witness: Option<ZeroWitness> = None;
    for coords in &points {
        let a = dom.assignment(coords);
        let mut ev = Evaluator::new(&a);
        let mut total = 0.0f64;
        let mut largest_term = 0.0f64;
        for term in plus {
            let v = ev.eval(term)?;
            total += v;
            largest_term = largest_term.max(v.abs());
        }
        for term in minus {
            let v = ev.eval(term)?;
            total -= v;
            largest_term = largest_term.max(v.abs());
        }
        let residual = total.abs();
        let scaled = residual / (1.0 + largest_term);
        if scaled > max_scaled {
            max_scaled = scaled;
            witness = Some(ZeroWitness {
                point: vars
                    .iter()
                    .map(|v| v.to_string())
                    .zip(coords.iter().copied())
                    .collect(),
                residual,
            });
        }
        if residual > tol * (1.0 + largest_term) {
            passed = false;
        }
    }
    Ok(ZeroOutcome {
        is_zero: passed,
        max_scaled_residual: max_scaled,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::expr::parse;

    fn check(text: &str, dom: &SampleDomain) -> ZeroOutcome {
        let e = parse(text).unwrap();
        is_zero(&e, dom, defaults::SAMPLES, defaults::TOL, defaults::SEED).unwrap()
    }

    #[test]
    fn literal_zero_passes_at_any_tolerance() {
        let dom = SampleDomain::uniform(["x"], 1.0, 2.0).unwrap();
        let out = is_zero(&Expr::zero(), &dom, 8, 0.0, 1).unwrap();
        assert!(out.is_zero);
        assert_eq!(out.max_scaled_residual, 0.0);
    }

    #[test]
    fn plain_variable_fails_with_witness() {
        let dom = SampleDomain::uniform(["x"], 1.0, 2.0).unwrap();
        let out = check("x", &dom);
        assert!(!out.is_zero);
        let w = out.witness.unwrap();
        assert!(w.residual >= 1.0);
        assert_eq!(w.point[0].0, "x");
    }

    #[test]
    fn algebraic_identity_passes() {
        // 1/y + x/y^2 - (x+y)/y^2 == 0
        let dom = SampleDomain::uniform(["x", "y"], 1.0, 2.0).unwrap();
        let out = check("1/y + x/y^2 - (x+y)/y^2", &dom);
        assert!(out.is_zero, "residual {}", out.max_scaled_residual);
    }

    #[test]
    fn scale_normalization_tolerates_large_constants() {
        // 1e6 * ((x+y)^2 - x^2 - 2*x*y - y^2) still passes.
        let dom = SampleDomain::uniform(["x", "y"], 1.0, 2.0).unwrap();
        let out = check("1000000*((x+y)^2 - x^2 - 2*x*y - y^2)", &dom);
        assert!(out.is_zero, "residual {}", out.max_scaled_residual);
    }

    #[test]
    fn near_zero_but_not_zero_is_detected() {
        let dom = SampleDomain::uniform(["x"], 1.0, 2.0).unwrap();
        let e = parse("1/100000*x").unwrap();
        let out = is_zero(&e, &dom, 16, defaults::TOL, 3).unwrap();
        assert!(!out.is_zero);
    }

    #[test]
    fn two_sided_agreement_matches_difference_test() {
        let dom = SampleDomain::uniform(["x", "y"], 1.0, 2.0).unwrap();
        let a = crate::expr::simplify(&parse("(x+y)^2").unwrap());
        let b = crate::expr::expand(&parse("x^2 + 2*x*y + y^2").unwrap());
        let out = exprs_agree(&a, &b, &dom, 16, 1e-10, 7).unwrap();
        assert!(out.is_zero);
        let c = crate::expr::simplify(&parse("x^2 + 2*x*y").unwrap());
        let out = exprs_agree(&a, &c, &dom, 16, 1e-10, 7).unwrap();
        assert!(!out.is_zero);
    }
}
