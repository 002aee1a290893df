//! Null functions of the factorized operator family.
//!
//! For a producing function `phi` with `D(phi)` not identically zero, the
//! functions `(D phi)^{-n/2} phi^k`, `k = 0..=n`, are annihilated by
//! `L_{n+1}`: each bracket, applied rightmost first, trades one power of
//! `phi` for one power of `D(phi)` and multiplies by the falling factor
//! `k - m + 1`, so after all `n+1` brackets one of the factors
//! `k, k-1, ..., k-n` has hit zero. [`verify_telescoping`] replays that
//! cascade state by state.
//!
//! When the operator coefficients contain the unknown itself, a null
//! function must solve `psi = (D phi)^{-n/2} P(phi)` with `D(phi)`
//! depending on `psi`. [`solve_self_consistent`] handles the monomial
//! pattern `D(phi) = E * psi^m` and returns all real principal-branch
//! closed forms.

use crate::diffop::{build_weiss, DirectionalOperator, WeissOperator};
use crate::error::Error;
use crate::expr::{exprs_agree, rat_int, simplify, Expr, Rat, SampleDomain};
use crate::verify::{residual_check, CheckOptions, VerificationReport};

/// The null basis `[(D phi)^{-n/2} phi^k]`, `k = 0..=n`, each simplified.
pub fn basis(d: &DirectionalOperator, phi: &Expr, n: u32) -> Result<Vec<Expr>, Error> {
    let phi = simplify(phi);
    let d_phi = d.apply(&phi);
    if d_phi.is_zero_const() {
        return Err(Error::DegenerateProducingFunction);
    }
    let prefactor_exp = crate::expr::rat(-(n as i64), 2);
    Ok((0..=n)
        .map(|k| {
            let prefactor = Expr::pow(d_phi.clone(), Expr::Rational(prefactor_exp.clone()));
            let power = Expr::pow(phi.clone(), Expr::int(k as i64));
            simplify(&(prefactor * power))
        })
        .collect())
}

/// A general null function `(D phi)^{-n/2} sum_k c_k phi^k`.
#[derive(Debug, Clone)]
pub struct NullFunction {
    pub n: u32,
    pub phi: Expr,
    pub d_phi: Expr,
    pub coeffs: Vec<Expr>,
    pub expr: Expr,
}

/// Combines the basis with the given coefficients (symbols or rationals).
pub fn general_null(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    coeffs: &[Expr],
) -> Result<NullFunction, Error> {
    if coeffs.len() != (n as usize) + 1 {
        return Err(Error::CoefficientArityMismatch {
            expected: (n as usize) + 1,
            got: coeffs.len(),
        });
    }
    let phi = simplify(phi);
    let d_phi = d.apply(&phi);
    if d_phi.is_zero_const() {
        return Err(Error::DegenerateProducingFunction);
    }
    let members = basis(d, &phi, n)?;
    let combo = members
        .into_iter()
        .zip(coeffs)
        .map(|(b, c)| c.clone() * b)
        .collect();
    Ok(NullFunction {
        n,
        phi,
        d_phi,
        coeffs: coeffs.to_vec(),
        expr: simplify(&Expr::sum(combo)),
    })
}

/// Numeric linear-independence check of the null basis.
///
/// Evaluates the `n + 1` basis members at `n + 1` sampled points and
/// accepts when some draw yields a generalized Vandermonde determinant
/// exceeding `1e-6` in absolute value. Independence is sampled, not proven
/// symbolically.
pub fn basis_is_independent(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    dom: &SampleDomain,
    seed: u64,
) -> Result<bool, Error> {
    use crate::expr::{evaluate, guard_conditions, sample_domain_points};

    let members = basis(d, phi, n)?;
    let size = members.len();
    let mut conds = Vec::new();
    for member in &members {
        conds.extend(guard_conditions(member));
    }
    conds.sort();
    conds.dedup();

    for attempt in 0..8u64 {
        let points = sample_domain_points(dom, &conds, size, seed ^ (attempt * 7919))?;
        let mut matrix = vec![vec![0.0f64; size]; size];
        for (i, coords) in points.iter().enumerate() {
            let a = dom.assignment(coords);
            for (j, member) in members.iter().enumerate() {
                matrix[i][j] = evaluate(member, &a)?;
            }
        }
        // Normalize rows and columns first: the (D phi)^(-n/2) prefactor
        // scales whole rows and phi^k whole columns, and the threshold is
        // only meaningful once those scales are removed.
        let mut degenerate = false;
        for row in matrix.iter_mut() {
            let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                degenerate = true;
                break;
            }
            row.iter_mut().for_each(|v| *v /= scale);
        }
        if !degenerate {
            for j in 0..size {
                let scale = (0..size).fold(0.0f64, |m, i| m.max(matrix[i][j].abs()));
                if scale == 0.0 {
                    degenerate = true;
                    break;
                }
                (0..size).for_each(|i| matrix[i][j] /= scale);
            }
        }
        if !degenerate && determinant(&mut matrix).abs() > 1e-6 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(matrix: &mut [Vec<f64>]) -> f64 {
    let size = matrix.len();
    let mut det = 1.0f64;
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&a, &b| {
                matrix[a][col]
                    .abs()
                    .partial_cmp(&matrix[b][col].abs())
                    .unwrap()
            })
            .unwrap();
        if matrix[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            matrix.swap(pivot, col);
            det = -det;
        }
        det *= matrix[col][col];
        for row in col + 1..size {
            let factor = matrix[row][col] / matrix[col][col];
            let (upper, lower) = matrix.split_at_mut(row);
            for (cell, pivot_cell) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *cell -= factor * pivot_cell;
            }
        }
    }
    det
}

/// State-by-state record of the factor cascade on `(D phi)^{-n/2} phi^k`.
#[derive(Debug, Clone)]
pub struct TelescopingTrace {
    /// `states[0]` is the starting basis member; `states[m]` the result of
    /// the `m`-th applied bracket (rightmost first).
    pub states: Vec<Expr>,
    /// Closed forms `k(k-1)...(k-m+1) (D phi)^{-n/2+m} phi^{k-m}` for each
    /// applied bracket.
    pub expected: Vec<Expr>,
    /// Zero-test result of `states[m] - expected[m-1]` per bracket.
    pub matches: Vec<bool>,
    /// All intermediates matched and the final state vanishes.
    pub passed: bool,
}

/// Replays the proof cascade for `(D phi)^{-n/2} phi^k` under `L_{n+1}`.
pub fn verify_telescoping(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    k: u32,
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<TelescopingTrace, Error> {
    let op = build_weiss(d, phi, n)?;
    verify_telescoping_op(&op, k, dom, opts)
}

/// Same as [`verify_telescoping`], for an already-built (possibly mutated)
/// operator.
pub fn verify_telescoping_op(
    op: &WeissOperator,
    k: u32,
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<TelescopingTrace, Error> {
    let n = op.order_index();
    if k > n {
        return Err(Error::InvalidDomain(format!(
            "basis index k = {k} exceeds the order index n = {n}"
        )));
    }
    for coeff in op.operator().coeffs() {
        if let Some(name) = first_unknown(coeff) {
            return Err(Error::NonlinearOperator(name));
        }
    }

    let d_phi = op.d_phi().clone();
    let phi = op.phi().clone();
    let start = simplify(&Expr::pow(
        d_phi.clone(),
        Expr::Rational(crate::expr::rat(-(n as i64), 2)),
    ));
    let start = simplify(&(start * Expr::pow(phi.clone(), Expr::int(k as i64))));

    let mut states = vec![start.clone()];
    let mut expected = Vec::new();
    let mut matches = Vec::new();
    let mut state = start;
    let mut falling = rat_int(1);
    let factors: Vec<Rat> = op.factor_coefficients().to_vec();
    for (m, c) in factors.iter().rev().enumerate() {
        let m = (m + 1) as i64;
        state = op.apply_factor(c, &state);
        states.push(state.clone());

        falling *= rat_int(k as i64 - (m - 1));
        let closed = if falling.is_zero() {
            Expr::zero()
        } else {
            let exp = crate::expr::rat(-(n as i64), 2) + rat_int(m);
            simplify(
                &(Expr::Rational(falling.clone())
                    * Expr::pow(d_phi.clone(), Expr::Rational(exp))
                    * Expr::pow(phi.clone(), Expr::int(k as i64 - m))),
            )
        };
        // Both sides are already normalized, so compare them without
        // rebuilding the (large) accumulated state.
        let out = exprs_agree(&state, &closed, dom, opts.samples, opts.tol, opts.seed)?;
        expected.push(closed);
        matches.push(out.is_zero);
    }

    let final_zero = exprs_agree(
        states.last().unwrap(),
        &Expr::zero(),
        dom,
        opts.samples,
        opts.tol,
        opts.seed,
    )?;
    let passed = matches.iter().all(|&m| m) && final_zero.is_zero;
    Ok(TelescopingTrace {
        states,
        expected,
        matches,
        passed,
    })
}

fn first_unknown(e: &Expr) -> Option<String> {
    match e {
        Expr::Deriv(atom) => Some(atom.func.clone()),
        Expr::Func(_, a) => first_unknown(a),
        Expr::Power(b, x) => first_unknown(b).or_else(|| first_unknown(x)),
        Expr::Sum(args) | Expr::Product(args) => args.iter().find_map(first_unknown),
        _ => None,
    }
}

/// Solution of the self-consistency equation for an unknown-dependent
/// operator.
#[derive(Debug, Clone)]
pub struct SelfConsistentSolution {
    /// Explicit closed forms for the unknown; two entries for an even root.
    pub branches: Vec<Expr>,
    /// `E` in the detected pattern `D(phi) = E * psi^m`.
    pub scale: Expr,
    /// `m` in the detected pattern.
    pub psi_power: u32,
    /// The exponent `1 + m n / 2` of the equation `psi^q = rhs`.
    pub exponent: Rat,
    /// Right-hand side `E^{-n/2} P(phi)`.
    pub rhs: Expr,
}

/// Solves `psi = (D phi)^{-n/2} P(phi)` when `D(phi)` is a monomial in the
/// unknown, `D(phi) = E * psi^m`.
///
/// The equation becomes `psi^(1 + m n/2) = E^{-n/2} P(phi)`; with the
/// exponent reduced to `p/q`, the real principal-branch solutions are
/// `rhs^(q/p)` for odd `p` and both signs of it for even `p`. A linear
/// operator matches with `m = 0` and degenerates to the general null
/// function.
pub fn solve_self_consistent(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    coeffs: &[Expr],
    unknown: &str,
) -> Result<SelfConsistentSolution, Error> {
    if coeffs.len() != (n as usize) + 1 {
        return Err(Error::CoefficientArityMismatch {
            expected: (n as usize) + 1,
            got: coeffs.len(),
        });
    }
    let phi = simplify(phi);
    let d_phi = d.apply(&phi);
    if d_phi.is_zero_const() {
        return Err(Error::DegenerateProducingFunction);
    }

    // Match D(phi) = E * psi^m with E free of the unknown.
    let factors: Vec<Expr> = match &d_phi {
        Expr::Product(parts) => parts.clone(),
        other => vec![other.clone()],
    };
    let mut m: u32 = 0;
    let mut scale_parts = Vec::new();
    let reject = || {
        Error::PatternNotRecognized(
            d_phi.emit(crate::expr::EmitFormat::Plain),
            unknown.to_string(),
        )
    };
    for f in factors {
        match &f {
            Expr::Deriv(atom) if atom.func == unknown => {
                if !atom.orders.is_empty() {
                    return Err(reject());
                }
                m += 1;
            }
            Expr::Power(base, exp) => match (&**base, exp.as_rational()) {
                (Expr::Deriv(atom), Some(r))
                    if atom.func == unknown && atom.orders.is_empty() =>
                {
                    if !r.is_integer() || !r.is_positive() {
                        return Err(reject());
                    }
                    m += r
                        .as_i64()
                        .and_then(|v| u32::try_from(v).ok())
                        .ok_or_else(reject)?;
                }
                _ => {
                    if f.contains_symbol(unknown) {
                        return Err(reject());
                    }
                    scale_parts.push(f.clone());
                }
            },
            _ => {
                if f.contains_symbol(unknown) {
                    return Err(reject());
                }
                scale_parts.push(f.clone());
            }
        }
    }
    let scale = simplify(&Expr::product(scale_parts));

    // P(phi) = sum_k c_k phi^k.
    let p_of_phi = Expr::sum(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.clone() * Expr::pow(phi.clone(), Expr::int(k as i64)))
            .collect(),
    );

    let exponent = rat_int(1) + crate::expr::rat((m as i64) * (n as i64), 2);
    let rhs = simplify(
        &(Expr::pow(
            scale.clone(),
            Expr::Rational(crate::expr::rat(-(n as i64), 2)),
        ) * p_of_phi),
    );

    let inverse = Expr::Rational(exponent.recip());
    let principal = simplify(&Expr::pow(rhs.clone(), inverse));
    let branches = if exponent.numer_is_even() {
        vec![principal.clone(), simplify(&-principal)]
    } else {
        vec![principal]
    };

    Ok(SelfConsistentSolution {
        branches,
        scale,
        psi_power: m,
        exponent,
        rhs,
    })
}

/// Substitutes `candidate` for the unknown everywhere in `L_{n+1} psi`
/// (including inside the operator coefficients) and residual-checks the
/// result on `dom`.
pub fn verify_solution(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    unknown: &str,
    candidate: &Expr,
    dom: &SampleDomain,
    opts: &CheckOptions,
) -> Result<VerificationReport, Error> {
    let op = build_weiss(d, phi, n)?;
    let pde = op.expand_pde(unknown);
    residual_check(&pde, unknown, candidate, dom, opts)
}
