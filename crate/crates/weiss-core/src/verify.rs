//! Numeric verification harness.
//!
//! Residual checks substitute a candidate for the unknown, sample guarded
//! points, and report per-point residuals with a scale-normalized verdict:
//! the raw residual at each point is compared against
//! `tol * (1 + largest additive term)`, which keeps the tolerance
//! meaningful when terms have large dynamic range. Reports are fully
//! reproducible: they carry their seed, and identical inputs produce
//! byte-identical output.

use crate::defaults;
use crate::diffop::{build_weiss_capped, DirectionalOperator};
use crate::error::Error;
use crate::expr::{
    additive_terms, differentiate, evaluate, guard_conditions, sample_domain_points, simplify,
    Assignment, Evaluator, Expr, Rat, SampleDomain,
};
use crate::nullspace::{basis, verify_telescoping_op};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;

/// Shared knobs for the numeric checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: defaults::SAMPLES,
            tol: defaults::TOL,
            seed: defaults::SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of a residual check.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    /// The checked expression, rendered plain.
    pub expression: String,
    /// Human-readable domain description.
    pub domain: String,
    pub seed: u64,
    pub requested_samples: usize,
    /// Accepted points, coordinates in domain variable order.
    pub points: Vec<Vec<f64>>,
    /// Raw per-point residuals `|e(p)|`.
    pub residuals: Vec<f64>,
    /// Largest scale-normalized residual; this is what the verdict compares
    /// against the tolerance.
    pub max_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Diagnostic note for inconclusive verdicts.
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Flat key-value rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "expression = {}", self.expression);
        let _ = writeln!(out, "domain = {}", self.domain);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "samples = {}", self.requested_samples);
        let _ = writeln!(out, "accepted = {}", self.points.len());
        let _ = writeln!(out, "tolerance = {:e}", self.tolerance);
        let _ = writeln!(out, "max_residual = {:e}", self.max_residual);
        let _ = writeln!(
            out,
            "verdict = {}",
            match self.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "fail",
                Verdict::Inconclusive => "inconclusive",
            }
        );
        if let Some(note) = &self.note {
            let _ = writeln!(out, "note = {note}");
        }
        for (i, (point, residual)) in self.points.iter().zip(&self.residuals).enumerate() {
            let coords: Vec<String> = point.iter().map(|c| format!("{c}")).collect();
            let _ = writeln!(out, "point[{i}] = ({})", coords.join(", "));
            let _ = writeln!(out, "residual[{i}] = {residual:e}");
        }
        out
    }
}

/// Uniform guard-accepted draws from the domain; deterministic per seed.
pub fn sample_points(
    dom: &SampleDomain,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, Error> {
    sample_domain_points(dom, &[], count, seed)
}

/// Substitutes `candidate` for `unknown` in `pde_lhs` and checks the
/// residual at guard-accepted sample points.
///
/// Domain exhaustion and evaluation failures produce an inconclusive
/// verdict rather than an error, so callers can report them.
pub fn residual_check(
    pde_lhs: &Expr,
    unknown: &str,
    candidate: &Expr,
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<VerificationReport, Error> {
    let candidate = simplify(candidate);
    let substituted = simplify(&pde_lhs.substitute_one(unknown, &candidate));
    // Even when the substituted residual simplifies past them, the points
    // must stay inside the candidate's own domain of definition (e.g. the
    // radicand of a root solution must stay positive).
    let candidate_conds = guard_conditions(&candidate);
    residual_check_inner(&substituted, &candidate_conds, dom, opts)
}

/// Residual check of an expression that is already free of the unknown.
pub fn residual_check_expr(
    e: &Expr,
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<VerificationReport, Error> {
    residual_check_inner(e, &[], dom, opts)
}

fn residual_check_inner(
    e: &Expr,
    extra_conds: &[(crate::expr::GuardKind, Expr)],
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<VerificationReport, Error> {
    let e = simplify(e);
    let rendered = e.emit(crate::expr::EmitFormat::Plain);
    let mut conds = guard_conditions(&e);
    conds.extend(extra_conds.iter().cloned());
    conds.sort();
    conds.dedup();
    let mut report = VerificationReport {
        expression: rendered,
        domain: dom.to_string(),
        seed: opts.seed,
        requested_samples: opts.samples,
        points: Vec::new(),
        residuals: Vec::new(),
        max_residual: 0.0,
        tolerance: opts.tol,
        verdict: Verdict::Inconclusive,
        note: None,
    };

    let points = match sample_domain_points(dom, &conds, opts.samples, opts.seed) {
        Ok(points) => points,
        Err(Error::DomainExhausted(found)) => {
            report.note = Some(format!(
                "domain exhausted: only {found} of {} guard-accepted points",
                opts.samples
            ));
            return Ok(report);
        }
        Err(other) => return Err(other),
    };

    let mut max_scaled = 0.0f64;
    for coords in &points {
        let a = dom.assignment(coords);
        let mut ev = Evaluator::new(&a);
        let mut total = 0.0f64;
        let mut largest = 0.0f64;
        let mut failure = None;
        for term in additive_terms(&e) {
            match ev.eval(term) {
                Ok(v) => {
                    total += v;
                    largest = largest.max(v.abs());
                }
                Err(err) => {
                    failure = Some(err);
                    break;
                }
            }
        }
        if let Some(err) = failure {
            report.note = Some(format!("evaluation failed at {coords:?}: {err}"));
            return Ok(report);
        }
        report.points.push(coords.clone());
        report.residuals.push(total.abs());
        max_scaled = max_scaled.max(total.abs() / (1.0 + largest));
    }

    report.max_residual = max_scaled;
    report.verdict = if report.points.len() == opts.samples && max_scaled <= opts.tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

/// Symbolic-vs-central-difference comparison of one partial derivative.
#[derive(Debug, Clone, Copy)]
pub struct FdCheck {
    pub symbolic: f64,
    pub numeric: f64,
    pub abs_diff: f64,
}

/// Central difference `(e(p + h e_var) - e(p - h e_var)) / 2h` against the
/// evaluated symbolic derivative at `p`.
pub fn fd_crosscheck(
    e: &Expr,
    var: &str,
    point: &Assignment,
    h: f64,
) -> Result<FdCheck, Error> {
    let derivative = differentiate(e, var);
    let symbolic = evaluate(&derivative, point)?;
    let base = point
        .get(var)
        .ok_or_else(|| Error::Eval(crate::error::EvalError::MissingSymbol(var.into())))?;
    let mut plus = point.clone();
    plus.insert(var, base + h);
    let mut minus = point.clone();
    minus.insert(var, base - h);
    let numeric = (evaluate(e, &plus)? - evaluate(e, &minus)?) / (2.0 * h);
    Ok(FdCheck {
        symbolic,
        numeric,
        abs_diff: (symbolic - numeric).abs(),
    })
}

// ---------------------------------------------------------------------------
// Randomized operator / null-function suite
// ---------------------------------------------------------------------------

/// Deliberate defects for mutation testing of the numeric suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Flip the sign of one factor coefficient (index modulo `n + 1`).
    FlipFactorSign(usize),
    /// Replace `V = D^2(phi)/D(phi)` by `D^2(phi) * D(phi)`.
    CorruptPreSchwarzian,
}

/// Configuration of the randomized suite.
#[derive(Debug, Clone, Copy)]
pub struct TheoremConfig {
    /// Dimensions are drawn from `1..=dims`; capped at 4.
    pub dims: u32,
    /// Order indices are drawn from `min_n..=max_n`; `max_n` capped at 8.
    pub min_n: u32,
    pub max_n: u32,
    pub trials: u32,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub mutation: Option<Mutation>,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        TheoremConfig {
            dims: 3,
            min_n: 0,
            max_n: 4,
            trials: 100,
            seed: defaults::SEED,
            samples: defaults::SAMPLES,
            tol: 1e-7,
            mutation: None,
        }
    }
}

/// One randomized instance and its outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u32,
    pub dim: u32,
    pub n: u32,
    pub passed: bool,
    /// Failure diagnostics (instance echo for replay), empty on pass.
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub outcomes: Vec<TrialOutcome>,
    pub passes: usize,
    pub failures: usize,
}

impl TheoremReport {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
    }
}

const VAR_NAMES: [&str; 4] = ["x", "y", "z", "w"];

/// Runs randomized annihilation and telescoping checks: for each instance,
/// a random directional operator with positive polynomial coefficients and
/// a random positive polynomial producing function, checked on `[1, 2]^d`
/// for every basis index `k <= n`.
pub fn theorem_suite(cfg: &TheoremConfig) -> Result<TheoremReport, Error> {
    if cfg.dims == 0 || cfg.dims > 4 {
        return Err(Error::InvalidDomain(format!(
            "dims must be between 1 and 4, got {}",
            cfg.dims
        )));
    }
    if cfg.max_n > 8 || cfg.min_n > cfg.max_n {
        return Err(Error::InvalidDomain(format!(
            "order range {}..={} is invalid (max 8)",
            cfg.min_n, cfg.max_n
        )));
    }

    let mut outcomes = Vec::with_capacity(cfg.trials as usize);
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0x7468_0000 + trial as u64);
        let dim = rng.random_range(1..=cfg.dims) as usize;
        let n = rng.random_range(cfg.min_n..=cfg.max_n);
        let vars: Vec<&str> = VAR_NAMES[..dim].to_vec();

        let phi = random_positive_poly(&mut rng, &vars);
        let coeffs: Vec<Expr> = (0..dim)
            .map(|_| random_positive_poly(&mut rng, &vars))
            .collect();
        let d = DirectionalOperator::new(vars.clone(), coeffs)?;

        let mut op = build_weiss_capped(&d, &phi, n, 8)?;
        match cfg.mutation {
            Some(Mutation::FlipFactorSign(i)) => op.flip_factor_sign(i),
            Some(Mutation::CorruptPreSchwarzian) => op.corrupt_pre_schwarzian(),
            None => {}
        }

        let dom = SampleDomain::uniform(vars.clone(), 1.0, 2.0)?
            .with_guard(op.d_phi().clone())
            .with_guard(op.phi().clone());

        let members = basis(&d, &phi, n)?;
        let mut passed = true;
        let mut detail = String::new();
        if !crate::nullspace::basis_is_independent(&d, &phi, n, &dom, cfg.seed ^ trial as u64)? {
            passed = false;
            let _ = write!(detail, "basis dependence suspected; ");
        }
        for (k, _member) in members.iter().enumerate() {
            // The trace applies every bracket to the accumulated state, so
            // its final entry is the full factored application of the
            // operator to basis_k: one cascade covers both the
            // intermediate checks and the annihilation check.
            let opts = CheckOptions {
                samples: cfg.samples,
                tol: cfg.tol,
                seed: cfg.seed ^ (trial as u64 * 2063 + k as u64),
            };
            let trace = verify_telescoping_op(&op, k as u32, &dom, &opts)?;
            if !trace.matches.iter().all(|&m| m) {
                passed = false;
                let _ = write!(detail, "telescoping mismatch at basis_{k}; ");
            }
            let image = trace.states.last().unwrap();
            let out = crate::expr::is_zero(
                image,
                &dom,
                cfg.samples,
                cfg.tol,
                cfg.seed ^ (trial as u64 * 1031 + k as u64),
            )?;
            if !out.is_zero {
                passed = false;
                let _ = write!(
                    detail,
                    "L[basis_{k}] residual {:.3e}; ",
                    out.max_scaled_residual
                );
            }
        }
        if !passed {
            let _ = write!(
                detail,
                "instance: d={dim} n={n} phi={} D=({})",
                phi,
                d.coeffs()
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        outcomes.push(TrialOutcome {
            trial,
            dim: dim as u32,
            n,
            passed,
            detail,
        });
    }

    let passes = outcomes.iter().filter(|o| o.passed).count();
    let failures = outcomes.len() - passes;
    Ok(TheoremReport {
        outcomes,
        passes,
        failures,
    })
}

/// Random polynomial of total degree <= 2 with positive rational
/// coefficients: constant and all linear terms always present, plus up to
/// two quadratic monomials. Strictly positive with strictly positive
/// partials on positive boxes.
fn random_positive_poly(rng: &mut ChaCha8Rng, vars: &[&str]) -> Expr {
    let mut terms = vec![Expr::Rational(random_coeff(rng))];
    for v in vars {
        terms.push(Expr::Rational(random_coeff(rng)) * Expr::var(*v));
    }
    let mut quadratics = 0;
    for (i, vi) in vars.iter().enumerate() {
        for vj in vars.iter().skip(i) {
            if quadratics < 2 && rng.random_bool(0.4) {
                quadratics += 1;
                terms.push(
                    Expr::Rational(random_coeff(rng)) * Expr::var(*vi) * Expr::var(*vj),
                );
            }
        }
    }
    simplify(&Expr::sum(terms))
}

/// Uniform positive rational in roughly [1/3, 2].
fn random_coeff(rng: &mut ChaCha8Rng) -> Rat {
    let numer = rng.random_range(1..=6i64);
    let denom = rng.random_range(1..=3i64);
    crate::expr::rat(numer, denom)
}
