//! Guarded rejection sampling of evaluation points.
//!
//! A [`SampleDomain`] is a box of per-variable intervals plus guard
//! expressions that accepted points must keep away from zero. On top of the
//! caller-supplied guards, the sampler automatically keeps fractional-power
//! bases strictly positive, negative-power bases away from zero, and
//! logarithm arguments positive, so that evaluation on accepted points
//! cannot hit a branch error.
//!
//! Point `i` of a run is drawn from stream `i` of a counter-based generator
//! seeded with the run seed, so parallel and serial draws agree.

use super::{evaluate, Assignment, Expr};
use crate::defaults;
use crate::error::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fmt;

/// How a guard expression constrains accepted points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GuardKind {
    /// `|g| > eps`: used for caller guards and division denominators.
    NonZero,
    /// `g > eps`: used for fractional-power bases and log arguments.
    Positive,
}

/// Box domain with guard expressions and a guard threshold.
#[derive(Debug, Clone)]
pub struct SampleDomain {
    intervals: Vec<(String, f64, f64)>,
    guards: Vec<Expr>,
    eps_guard: f64,
}

impl SampleDomain {
    /// Builds a domain from `(name, lo, hi)` intervals. Fails when any
    /// interval has `lo >= hi`.
    pub fn new<I, S>(intervals: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (S, f64, f64)>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        for (name, lo, hi) in intervals {
            let name = name.into();
            if lo >= hi || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "interval for `{name}` must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
            out.push((name, lo, hi));
        }
        if out.is_empty() {
            return Err(Error::InvalidDomain("no variables".into()));
        }
        Ok(SampleDomain {
            intervals: out,
            guards: Vec::new(),
            eps_guard: defaults::EPS_GUARD,
        })
    }

    /// Convenience constructor: the same interval for every variable.
    pub fn uniform<S: Into<String>>(
        vars: impl IntoIterator<Item = S>,
        lo: f64,
        hi: f64,
    ) -> Result<Self, Error> {
        Self::new(vars.into_iter().map(|v| (v, lo, hi)))
    }

    pub fn with_guard(mut self, guard: Expr) -> Self {
        self.guards.push(guard);
        self
    }

    pub fn with_eps_guard(mut self, eps: f64) -> Self {
        self.eps_guard = eps;
        self
    }

    pub fn variables(&self) -> Vec<&str> {
        self.intervals.iter().map(|(v, _, _)| v.as_str()).collect()
    }

    pub fn guards(&self) -> &[Expr] {
        &self.guards
    }

    pub fn eps_guard(&self) -> f64 {
        self.eps_guard
    }

    pub fn assignment(&self, coords: &[f64]) -> Assignment {
        Assignment::from_point(self.intervals.iter().map(|(v, _, _)| v.as_str()), coords)
    }
}

impl fmt::Display for SampleDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, lo, hi)) in self.intervals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name} in [{lo}, {hi}]")?;
        }
        Ok(())
    }
}

/// Collects the implicit guard conditions of an expression: bases of
/// fractional or symbolic powers must stay positive, bases of negative
/// integer powers and caller guards must stay away from zero, and log
/// arguments must stay positive.
pub fn guard_conditions(e: &Expr) -> Vec<(GuardKind, Expr)> {
    let mut set: BTreeSet<(GuardKind, Expr)> = BTreeSet::new();
    collect(e, &mut set);
    set.into_iter().collect()
}

fn collect(e: &Expr, out: &mut BTreeSet<(GuardKind, Expr)>) {
    match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Deriv(_) => {}
        Expr::Func(f, arg) => {
            if matches!(f, super::Elementary::Log) {
                out.insert((GuardKind::Positive, (**arg).clone()));
            }
            collect(arg, out);
        }
        Expr::Power(base, exp) => {
            match exp.as_rational() {
                Some(r) if r.is_integer() => {
                    if r.is_negative() {
                        out.insert((GuardKind::NonZero, (**base).clone()));
                    }
                }
                Some(_) => {
                    out.insert((GuardKind::Positive, (**base).clone()));
                }
                None => {
                    out.insert((GuardKind::Positive, (**base).clone()));
                }
            }
            collect(base, out);
            collect(exp, out);
        }
        Expr::Sum(args) | Expr::Product(args) => args.iter().for_each(|a| collect(a, out)),
    }
}

/// Draws `count` guard-accepted points. `extra` holds implicit conditions
/// gathered from the expressions that will be evaluated on the points.
///
/// Deterministic given the seed; point `i` uses stream `i` of the
/// generator, and each point retries at most [`defaults::GUARD_RETRIES`]
/// times before the whole draw fails with [`Error::DomainExhausted`].
pub fn sample_domain_points(
    dom: &SampleDomain,
    extra: &[(GuardKind, Expr)],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, Error> {
    let mut points = Vec::with_capacity(count);
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut accepted = None;
        for _ in 0..defaults::GUARD_RETRIES {
            let coords: Vec<f64> = dom
                .intervals
                .iter()
                .map(|(_, lo, hi)| rng.random_range(*lo..*hi))
                .collect();
            if point_admissible(dom, extra, &coords) {
                accepted = Some(coords);
                break;
            }
        }
        match accepted {
            Some(coords) => points.push(coords),
            None => return Err(Error::DomainExhausted(points.len())),
        }
    }
    Ok(points)
}

fn point_admissible(dom: &SampleDomain, extra: &[(GuardKind, Expr)], coords: &[f64]) -> bool {
    let a = dom.assignment(coords);
    let eps = dom.eps_guard;
    for guard in &dom.guards {
        match evaluate(guard, &a) {
            Ok(v) if v.abs() > eps => {}
            _ => return false,
        }
    }
    for (kind, g) in extra {
        match evaluate(g, &a) {
            Ok(v) => {
                let ok = match kind {
                    GuardKind::NonZero => v.abs() > eps,
                    GuardKind::Positive => v > eps,
                };
                if !ok {
                    return false;
                }
            }
            // Guard subexpressions can themselves fail to evaluate near a
            // singular point; treat that as rejection.
            Err(_) => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn guards_are_respected() {
        let dom = SampleDomain::uniform(["x"], -1.0, 1.0)
            .unwrap()
            .with_guard(parse("x").unwrap());
        let pts = sample_domain_points(&dom, &[], 64, 7).unwrap();
        assert_eq!(pts.len(), 64);
        for p in &pts {
            assert!(p[0].abs() > defaults::EPS_GUARD);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let dom = SampleDomain::uniform(["x", "y"], 1.0, 2.0).unwrap();
        let a = sample_domain_points(&dom, &[], 16, 42).unwrap();
        let b = sample_domain_points(&dom, &[], 16, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_domain_points(&dom, &[], 16, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn point_streams_are_prefix_stable() {
        // The first k points of a longer run equal a shorter run.
        let dom = SampleDomain::uniform(["x"], 0.0, 1.0).unwrap();
        let long = sample_domain_points(&dom, &[], 32, 5).unwrap();
        let short = sample_domain_points(&dom, &[], 8, 5).unwrap();
        assert_eq!(&long[..8], &short[..]);
    }

    #[test]
    fn exhausted_domain_errors() {
        // Guard |x| > 1e-3 on a box that sits entirely inside the guard band.
        let dom = SampleDomain::new([("x", -1e-4, 1e-4)])
            .unwrap()
            .with_guard(parse("x").unwrap());
        assert!(matches!(
            sample_domain_points(&dom, &[], 4, 1),
            Err(Error::DomainExhausted(_))
        ));
    }

    #[test]
    fn fractional_power_bases_auto_guard() {
        let e = parse("(x - 3/2)^(1/2)").unwrap();
        let conds = guard_conditions(&e);
        assert_eq!(conds.len(), 1);
        assert_eq!(conds[0].0, GuardKind::Positive);
        let dom = SampleDomain::uniform(["x"], 1.0, 2.0).unwrap();
        let pts = sample_domain_points(&dom, &conds, 32, 11).unwrap();
        for p in &pts {
            assert!(p[0] - 1.5 > defaults::EPS_GUARD);
        }
    }

    #[test]
    fn invalid_interval_is_rejected() {
        assert!(SampleDomain::new([("x", 2.0, 1.0)]).is_err());
        assert!(SampleDomain::new([("x", 1.0, 1.0)]).is_err());
    }
}
