//! Directional operators and the factorized operator family.
//!
//! `D = sum_i a_i(x) d/dx_i` acts on expressions by exact differentiation.
//! From a producing function `phi` with `D(phi)` not identically zero, the
//! pre-Schwarzian `V = D^2(phi)/D(phi)` defines the order-`n+1` factorized
//! operator
//!
//! ```text
//! L_{n+1} = (D - (n/2) V) ... (D + (n/2) V)
//! ```
//!
//! whose factor coefficients `j - n/2` are stored exactly. Factors do not
//! commute; application is right-to-left (rightmost bracket first), which is
//! the order under which each bracket shifts one power from `phi` to
//! `D(phi)`. Operators are never materialized as commuted symbol tables:
//! everything is expansion-by-application to a concrete expression or to a
//! derivative atom of the unknown.

use crate::defaults;
use crate::error::Error;
use crate::expr::{differentiate, expand, rat, rat_int, simplify, DerivAtom, Expr, Rat};
use std::collections::BTreeMap;

/// First-order directional operator `sum_i a_i(x) d/dx_i`.
///
/// Coefficients may contain derivative atoms of a declared unknown, which
/// is how the self-consistent nonlinear constructions enter.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalOperator {
    vars: Vec<String>,
    coeffs: Vec<Expr>,
}

impl DirectionalOperator {
    pub fn new<S: Into<String>>(
        vars: impl IntoIterator<Item = S>,
        coeffs: Vec<Expr>,
    ) -> Result<Self, Error> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        if vars.is_empty() {
            return Err(Error::InvalidDomain(
                "a directional operator needs at least one variable".into(),
            ));
        }
        if vars.len() != coeffs.len() {
            return Err(Error::InvalidDomain(format!(
                "{} variables but {} coefficients",
                vars.len(),
                coeffs.len()
            )));
        }
        Ok(DirectionalOperator { vars, coeffs })
    }

    /// `d/dx` in a single variable, the classical one-dimensional case.
    pub fn d_dx(var: impl Into<String>) -> Self {
        DirectionalOperator {
            vars: vec![var.into()],
            coeffs: vec![Expr::one()],
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    /// True when no coefficient contains `unknown`.
    pub fn is_linear_in(&self, unknown: &str) -> bool {
        !self.coeffs.iter().any(|c| c.contains_symbol(unknown))
    }

    /// `D e = sum_i a_i de/dx_i`, simplified.
    pub fn apply(&self, e: &Expr) -> Expr {
        let terms = self
            .vars
            .iter()
            .zip(&self.coeffs)
            .map(|(var, coeff)| Expr::product(vec![coeff.clone(), differentiate(e, var)]))
            .collect();
        simplify(&Expr::sum(terms))
    }

    /// `k`-fold left composition `D(D(...(e)))`.
    pub fn apply_power(&self, e: &Expr, k: u32) -> Expr {
        let mut out = e.clone();
        for _ in 0..k {
            out = self.apply(&out);
        }
        out
    }

}

/// `V = D^2(phi) / D(phi)`, simplified.
///
/// Fails with [`Error::DegenerateProducingFunction`] when `D(phi)`
/// simplifies to the zero expression (constant `phi`, or `phi` in the
/// kernel of `D`).
pub fn pre_schwarzian(d: &DirectionalOperator, phi: &Expr) -> Result<Expr, Error> {
    let d_phi = d.apply(phi);
    if d_phi.is_zero_const() {
        return Err(Error::DegenerateProducingFunction);
    }
    let d2_phi = d.apply(&d_phi);
    Ok(simplify(&(d2_phi * Expr::recip(d_phi))))
}

/// The potential `Q = (D V - V^2/2) / 2` induced by `phi`.
pub fn q_potential(d: &DirectionalOperator, phi: &Expr) -> Result<Expr, Error> {
    let v = pre_schwarzian(d, phi)?;
    let dv = d.apply(&v);
    let q = (dv - Expr::pow(v, Expr::int(2)) * Expr::rational(1, 2)) * Expr::rational(1, 2);
    Ok(simplify(&q))
}

/// The factorized operator of order `n + 1` built from `D` and `phi`.
#[derive(Debug, Clone)]
pub struct WeissOperator {
    n: u32,
    d: DirectionalOperator,
    phi: Expr,
    d_phi: Expr,
    v: Expr,
    /// Factor coefficients `j - n/2`, `j = 0..=n`, left-to-right: the
    /// leftmost bracket carries `-n/2`, the rightmost `+n/2`.
    factors: Vec<Rat>,
}

impl WeissOperator {
    pub fn order_index(&self) -> u32 {
        self.n
    }

    pub fn operator(&self) -> &DirectionalOperator {
        &self.d
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn d_phi(&self) -> &Expr {
        &self.d_phi
    }

    pub fn pre_schwarzian(&self) -> &Expr {
        &self.v
    }

    pub fn factor_coefficients(&self) -> &[Rat] {
        &self.factors
    }

    /// Test hook: flip the sign of one factor coefficient. Used by the
    /// mutation checks to confirm the numeric suite is not vacuous.
    pub fn flip_factor_sign(&mut self, index: usize) {
        let i = index % self.factors.len();
        self.factors[i] = -self.factors[i].clone();
    }

    /// Test hook: replace `V` by `D^2(phi) * D(phi)`.
    pub fn corrupt_pre_schwarzian(&mut self) {
        let d2_phi = self.d.apply(&self.d_phi);
        self.v = simplify(&(d2_phi * self.d_phi.clone()));
    }

    /// Applies the operator to `f`, rightmost bracket first, each bracket
    /// acting as `f -> D f + c_j V f`. The result is expanded so the
    /// telescoping cancellations happen symbolically where possible.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut state = expand(f);
        for c in self.factors.iter().rev() {
            state = self.apply_factor(c, &state);
        }
        state
    }

    /// One bracket `D f + c V f` of the factored application.
    ///
    /// Derivatives are collected before the coefficient multiplication
    /// (differentiating trims the term count first), then one expansion
    /// pass normalizes the whole bracket; that is where the telescoping
    /// cancellations collapse.
    pub fn apply_factor(&self, c: &Rat, f: &Expr) -> Expr {
        let mut terms: Vec<Expr> = self
            .d
            .vars
            .iter()
            .zip(&self.d.coeffs)
            .map(|(var, coeff)| Expr::product(vec![coeff.clone(), differentiate(f, var)]))
            .collect();
        if !c.is_zero() {
            terms.push(Expr::product(vec![
                Expr::Rational(c.clone()),
                self.v.clone(),
                f.clone(),
            ]));
        }
        expand(&Expr::sum(terms))
    }

    /// The left-hand side of `L_{n+1} psi = 0` as a single expression, by
    /// application to the zero multi-index atom of `unknown`. Valid in the
    /// nonlinear case too (coefficients containing the unknown).
    pub fn expand_pde(&self, unknown: &str) -> Expr {
        self.apply(&Expr::unknown(unknown))
    }

    /// Collects `L_{n+1} psi` into `sum_alpha c_alpha(x) d^alpha psi`.
    ///
    /// Only defined when neither the operator coefficients nor `V` contain
    /// the unknown.
    pub fn normal_form(&self, unknown: &str) -> Result<NormalForm, Error> {
        if !self.d.is_linear_in(unknown) || self.v.contains_symbol(unknown) {
            return Err(Error::NonlinearOperator(unknown.to_string()));
        }
        let pde = self.expand_pde(unknown);
        let mut terms: BTreeMap<Vec<u32>, Vec<Expr>> = BTreeMap::new();
        for term in additive_terms_owned(&pde) {
            let (atom, coeff) = strip_single_atom(&term, unknown)?;
            let alpha = multi_index(&atom, &self.d.vars);
            terms.entry(alpha).or_default().push(coeff);
        }
        let coefficients = terms
            .into_iter()
            .map(|(alpha, parts)| (alpha, simplify(&Expr::sum(parts))))
            .filter(|(_, c)| !c.is_zero_const())
            .collect();
        Ok(NormalForm {
            vars: self.d.vars.clone(),
            coefficients,
        })
    }
}

/// Builds `L_{n+1}` with the default order cap.
pub fn build_weiss(d: &DirectionalOperator, phi: &Expr, n: u32) -> Result<WeissOperator, Error> {
    build_weiss_capped(d, phi, n, defaults::ORDER_CAP)
}

/// Builds `L_{n+1}`, rejecting order indices above `cap`.
pub fn build_weiss_capped(
    d: &DirectionalOperator,
    phi: &Expr,
    n: u32,
    cap: u32,
) -> Result<WeissOperator, Error> {
    if n > cap {
        return Err(Error::OrderCapExceeded { n, cap });
    }
    let phi = simplify(phi);
    let d_phi = d.apply(&phi);
    if d_phi.is_zero_const() {
        return Err(Error::DegenerateProducingFunction);
    }
    let d2_phi = d.apply(&d_phi);
    let v = simplify(&(d2_phi * Expr::recip(d_phi.clone())));
    let half_n = rat(n as i64, 2);
    let factors = (0..=n).map(|j| rat_int(j as i64) - &half_n).collect();
    Ok(WeissOperator {
        n,
        d: d.clone(),
        phi,
        d_phi,
        v,
        factors,
    })
}

/// Coefficient table of a linear operator in expanded form: a map from the
/// derivative multi-index (aligned with the operator's variable order) to
/// its coefficient expression.
#[derive(Debug, Clone)]
pub struct NormalForm {
    vars: Vec<String>,
    coefficients: BTreeMap<Vec<u32>, Expr>,
}

impl NormalForm {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &Expr)> {
        self.coefficients.iter()
    }

    /// Coefficient of `d^alpha`; zero when the entry is absent.
    pub fn coefficient(&self, alpha: &[u32]) -> Expr {
        self.coefficients
            .get(alpha)
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    /// Highest total derivative order present.
    pub fn top_order(&self) -> u32 {
        self.coefficients
            .keys()
            .map(|alpha| alpha.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Reassembles `sum_alpha c_alpha d^alpha f` for a concrete `f`.
    pub fn apply_to(&self, f: &Expr) -> Expr {
        let mut terms = Vec::new();
        for (alpha, coeff) in &self.coefficients {
            let mut df = f.clone();
            for (var, k) in self.vars.iter().zip(alpha) {
                for _ in 0..*k {
                    df = differentiate(&df, var);
                }
            }
            terms.push(Expr::product(vec![coeff.clone(), df]));
        }
        simplify(&Expr::sum(terms))
    }
}

/// Divides a PDE left-hand side by the common monomial factor of its terms
/// and normalizes the leading rational coefficient to one.
///
/// The common factor is taken over plain symbols, zero multi-index atoms of
/// `unknown`, and composite bases appearing with positive exponent in every
/// term; differentiated atoms are never divided out. The leading term is
/// the one whose derivative atoms have the greatest total order (with the
/// lexicographically greatest multi-index on ties).
pub fn divide_common_factor(e: &Expr, unknown: &str) -> Expr {
    let expanded = expand(e);
    let terms = additive_terms_owned(&expanded);
    if terms.is_empty() {
        return expanded;
    }

    // Per-base minimum exponent across all terms.
    let mut common: BTreeMap<Expr, Rat> = factor_exponents(&terms[0]);
    for term in &terms[1..] {
        let exps = factor_exponents(term);
        common.retain(|base, min_exp| match exps.get(base) {
            Some(exp) => {
                if exp < min_exp {
                    *min_exp = exp.clone();
                }
                min_exp.is_positive()
            }
            None => false,
        });
    }

    let mut divided = expanded;
    if !common.is_empty() {
        let divisor = Expr::product(
            common
                .into_iter()
                .map(|(base, exp)| Expr::pow(base, Expr::Rational(-exp)))
                .collect(),
        );
        divided = expand(&(divided * divisor));
    }

    // Normalize the leading rational coefficient.
    let terms = additive_terms_owned(&divided);
    let basis: Vec<String> = {
        let mut atoms = Vec::new();
        collect_atoms(&divided, unknown, &mut atoms);
        atoms
            .iter()
            .flat_map(|a| a.orders.keys().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect()
    };
    let leading = terms
        .iter()
        .max_by_key(|t| leading_key(t, unknown, &basis))
        .cloned();
    if let Some(lead) = leading {
        let (coeff, _) = crate::expr::split_coeff(&lead);
        if !coeff.is_zero() && !coeff.is_one() {
            divided = expand(&(divided * Expr::Rational(coeff.recip())));
        }
    }
    divided
}

/// Ranking of a term by its highest derivative atom, with multi-indices
/// aligned to a shared variable basis so ties break toward earlier
/// variables.
fn leading_key(term: &Expr, unknown: &str, basis: &[String]) -> (u32, Vec<u32>) {
    let mut atoms = Vec::new();
    collect_atoms(term, unknown, &mut atoms);
    atoms
        .iter()
        .map(|a| {
            let aligned = basis
                .iter()
                .map(|v| a.orders.get(v).copied().unwrap_or(0))
                .collect::<Vec<_>>();
            (a.total_order(), aligned)
        })
        .max()
        .unwrap_or((0, Vec::new()))
}

fn collect_atoms(e: &Expr, unknown: &str, out: &mut Vec<DerivAtom>) {
    match e {
        Expr::Deriv(atom) if atom.func == unknown => out.push(atom.clone()),
        Expr::Func(_, a) => collect_atoms(a, unknown, out),
        Expr::Power(b, x) => {
            collect_atoms(b, unknown, out);
            collect_atoms(x, unknown, out);
        }
        Expr::Sum(args) | Expr::Product(args) => {
            args.iter().for_each(|a| collect_atoms(a, unknown, out))
        }
        _ => {}
    }
}

/// Exponents of the divisible factors of a term: plain symbols, the
/// undifferentiated unknown, and composite bases. Differentiated atoms are
/// excluded so the equation is never divided down to a constant.
fn factor_exponents(term: &Expr) -> BTreeMap<Expr, Rat> {
    let factors: Vec<Expr> = match term {
        Expr::Product(parts) => parts.clone(),
        other => vec![other.clone()],
    };
    let mut out = BTreeMap::new();
    for f in factors {
        let (base, exp) = match f {
            Expr::Power(b, x) => match x.as_rational() {
                Some(r) => ((*b).clone(), r.clone()),
                None => continue,
            },
            Expr::Rational(_) => continue,
            other => (other, Rat::one()),
        };
        if let Expr::Deriv(atom) = &base {
            if !atom.orders.is_empty() {
                continue;
            }
        }
        *out.entry(base).or_insert_with(Rat::zero) += exp;
    }
    out
}

fn additive_terms_owned(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Sum(args) => args.clone(),
        other => vec![other.clone()],
    }
}

/// Pulls the unique power-one atom of `unknown` out of a term, returning
/// the atom and the remaining coefficient.
fn strip_single_atom(term: &Expr, unknown: &str) -> Result<(DerivAtom, Expr), Error> {
    let factors: Vec<Expr> = match term {
        Expr::Product(parts) => parts.clone(),
        other => vec![other.clone()],
    };
    let mut atom: Option<DerivAtom> = None;
    let mut rest = Vec::with_capacity(factors.len());
    for f in factors {
        match &f {
            Expr::Deriv(a) if a.func == unknown => {
                if atom.is_some() {
                    return Err(Error::NonlinearOperator(unknown.to_string()));
                }
                atom = Some(a.clone());
            }
            Expr::Power(b, _) if matches!(&**b, Expr::Deriv(a) if a.func == unknown) => {
                return Err(Error::NonlinearOperator(unknown.to_string()));
            }
            _ => rest.push(f),
        }
    }
    match atom {
        Some(atom) => Ok((atom, Expr::product(rest))),
        None => Err(Error::NonlinearOperator(unknown.to_string())),
    }
}

fn multi_index(atom: &DerivAtom, vars: &[String]) -> Vec<u32> {
    vars.iter()
        .map(|v| atom.orders.get(v).copied().unwrap_or(0))
        .collect()
}
