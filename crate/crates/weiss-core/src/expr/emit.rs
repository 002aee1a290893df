//! Deterministic rendering of expressions.
//!
//! Plain output re-parses to a semantically equal expression; negative
//! powers inside products render as divisions so emitted PDEs and null
//! functions look like the usual hand-written forms. LaTeX output renders
//! derivative atoms as subscripted symbols (`\psi_{xy}`).

use super::{additive_terms, DerivAtom, Expr, Rat};
use std::cmp::Reverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Plain,
    Latex,
}

pub fn emit(e: &Expr, format: EmitFormat) -> String {
    match format {
        EmitFormat::Plain => plain(e),
        EmitFormat::Latex => latex(e),
    }
}

fn collect_atoms<'a>(e: &'a Expr, out: &mut Vec<&'a DerivAtom>) {
    match e {
        Expr::Deriv(atom) => out.push(atom),
        Expr::Func(_, a) => collect_atoms(a, out),
        Expr::Power(b, x) => {
            collect_atoms(b, out);
            collect_atoms(x, out);
        }
        Expr::Sum(args) | Expr::Product(args) => args.iter().for_each(|a| collect_atoms(a, out)),
        _ => {}
    }
}

/// Sort key used to print the terms of a sum in the usual PDE order:
/// highest derivative atoms first (ties broken toward earlier variables),
/// plain terms last. `basis` is the sorted union of atom variables over the
/// whole sum, so multi-index comparisons are consistent across terms.
fn term_sort_key(term: &Expr, basis: &[String]) -> (Reverse<u32>, Reverse<Vec<u32>>) {
    let mut atoms = Vec::new();
    collect_atoms(term, &mut atoms);
    let leading = atoms
        .iter()
        .map(|a| {
            let aligned: Vec<u32> = basis
                .iter()
                .map(|v| a.orders.get(v).copied().unwrap_or(0))
                .collect();
            (a.total_order(), aligned)
        })
        .max();
    match leading {
        Some((total, aligned)) => (Reverse(total), Reverse(aligned)),
        None => (Reverse(0), Reverse(Vec::new())),
    }
}

fn ordered_terms(e: &Expr) -> Vec<&Expr> {
    let mut atoms = Vec::new();
    collect_atoms(e, &mut atoms);
    let basis: Vec<String> = atoms
        .iter()
        .flat_map(|a| a.orders.keys().cloned())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut terms: Vec<&Expr> = additive_terms(e).iter().collect();
    terms.sort_by(|a, b| {
        term_sort_key(a, &basis)
            .cmp(&term_sort_key(b, &basis))
            .then_with(|| a.cmp(b))
    });
    terms
}

// ---------------------------------------------------------------------------
// Plain format
// ---------------------------------------------------------------------------

fn plain(e: &Expr) -> String {
    match e {
        Expr::Rational(r) => plain_rational(r),
        Expr::Var(name) => name.clone(),
        Expr::Deriv(atom) => plain_atom(atom),
        Expr::Func(f, arg) => format!("{}({})", f.name(), plain(arg)),
        Expr::Power(base, exp) => match exp.as_rational() {
            // A bare reciprocal power prints as a division.
            Some(r) if r.is_negative() => {
                let flipped = Expr::Rational(-r.clone());
                if flipped.is_one_const() {
                    format!("1/{}", plain_factor(base))
                } else {
                    format!("1/{}", plain_power(base, &flipped))
                }
            }
            _ => plain_power(base, exp),
        },
        Expr::Sum(_) => {
            let terms = ordered_terms(e);
            let mut out = String::new();
            for (i, term) in terms.iter().enumerate() {
                let (neg, body) = plain_term_magnitude(term);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                    out.push_str(&body);
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                    out.push_str(&body);
                }
            }
            out
        }
        Expr::Product(_) => {
            let (neg, body) = plain_term_magnitude(e);
            if neg {
                // Guard against `-x^2` re-parsing as `(-x)^2`: parenthesize
                // anything that is not a bare symbol or number.
                if body.contains('^') || body.contains('*') || body.contains('/') {
                    format!("-({body})")
                } else {
                    format!("-{body}")
                }
            } else {
                body
            }
        }
    }
}

fn plain_rational(r: &Rat) -> String {
    if r.is_integer() {
        r.numer_big().to_string()
    } else {
        format!("{}/{}", r.numer_big(), r.denom_big())
    }
}

fn plain_atom(atom: &DerivAtom) -> String {
    if atom.orders.is_empty() {
        return atom.func.clone();
    }
    let mut s = atom.func.clone();
    s.push('_');
    for (var, k) in &atom.orders {
        for _ in 0..*k {
            s.push_str(var);
        }
    }
    s
}

/// Renders a term as `(is_negative, magnitude)`, splitting negative-exponent
/// factors into a division.
fn plain_term_magnitude(term: &Expr) -> (bool, String) {
    let (coeff, key) = super::split_coefficient(term);
    let neg = coeff.is_negative();
    let coeff_abs = if neg { -coeff.clone() } else { coeff.clone() };

    let factors: Vec<Expr> = match key {
        None => return (neg, plain_rational(&coeff_abs)),
        Some(Expr::Product(parts)) => parts,
        Some(other) => vec![other],
    };

    let mut numer: Vec<String> = Vec::new();
    let mut denom: Vec<String> = Vec::new();
    for f in &factors {
        match f {
            Expr::Power(base, exp) => match exp.as_rational() {
                Some(r) if r.is_negative() => {
                    let flipped = Expr::Rational(-r.clone());
                    if flipped.is_one_const() {
                        denom.push(plain_factor(base));
                    } else {
                        denom.push(plain_power(base, &flipped));
                    }
                }
                _ => numer.push(plain_power(base, exp)),
            },
            other => numer.push(plain_factor(other)),
        }
    }

    if !coeff_abs.is_one() || numer.is_empty() {
        if coeff_abs.is_integer() {
            numer.insert(0, coeff_abs.numer_big().to_string());
        } else {
            // Put the fraction's denominator with the other divisors so the
            // coefficient never introduces an ambiguous leading `p/q*`.
            if coeff_abs.numer_big() != 1.into() || numer.is_empty() {
                numer.insert(0, coeff_abs.numer_big().to_string());
            }
            denom.insert(0, coeff_abs.denom_big().to_string());
        }
    }

    let numer_str = numer.join("*");
    if denom.is_empty() {
        (neg, numer_str)
    } else if denom.len() == 1 {
        (neg, format!("{numer_str}/{}", denom[0]))
    } else {
        (neg, format!("{numer_str}/({})", denom.join("*")))
    }
}

/// Renders a factor in product position (sums get parentheses).
fn plain_factor(e: &Expr) -> String {
    match e {
        Expr::Sum(_) => format!("({})", plain(e)),
        Expr::Product(_) => format!("({})", plain(e)),
        Expr::Rational(r) if !r.is_integer() || r.is_negative() => {
            format!("({})", plain_rational(r))
        }
        _ => plain(e),
    }
}

fn plain_power(base: &Expr, exp: &Expr) -> String {
    let base_str = match base {
        Expr::Var(_) | Expr::Deriv(_) | Expr::Func(..) => plain(base),
        Expr::Rational(r) if r.is_integer() && !r.is_negative() => plain_rational(r),
        _ => format!("({})", plain(base)),
    };
    let exp_str = match exp {
        Expr::Var(name) => name.clone(),
        Expr::Rational(r) if r.is_integer() && !r.is_negative() => r.numer_big().to_string(),
        _ => format!("({})", plain(exp)),
    };
    format!("{base_str}^{exp_str}")
}

// ---------------------------------------------------------------------------
// LaTeX format
// ---------------------------------------------------------------------------

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
    "omega",
];

fn latex_symbol(name: &str) -> String {
    if GREEK.contains(&name) {
        return format!("\\{name}");
    }
    // Trailing digits become a subscript: c0 -> c_{0}.
    let split = name.len() - name.chars().rev().take_while(|c| c.is_ascii_digit()).count();
    if split > 0 && split < name.len() {
        let (head, digits) = name.split_at(split);
        let head = if GREEK.contains(&head) {
            format!("\\{head}")
        } else {
            head.to_string()
        };
        format!("{head}_{{{digits}}}")
    } else {
        name.to_string()
    }
}

fn latex(e: &Expr) -> String {
    match e {
        Expr::Rational(r) => latex_rational(r),
        Expr::Var(name) => latex_symbol(name),
        Expr::Deriv(atom) => latex_atom(atom),
        Expr::Func(f, arg) => format!("\\{}\\left({}\\right)", f.name(), latex(arg)),
        Expr::Power(base, exp) => latex_power(base, exp),
        Expr::Sum(_) => {
            let terms = ordered_terms(e);
            let mut out = String::new();
            for (i, term) in terms.iter().enumerate() {
                let (neg, body) = latex_term_magnitude(term);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                    out.push_str(&body);
                } else {
                    out.push_str(if neg { " - " } else { " + " });
                    out.push_str(&body);
                }
            }
            out
        }
        Expr::Product(_) => {
            let (neg, body) = latex_term_magnitude(e);
            if neg {
                format!("-{body}")
            } else {
                body
            }
        }
    }
}

fn latex_rational(r: &Rat) -> String {
    if r.is_integer() {
        r.numer_big().to_string()
    } else if r.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -r.numer_big(), r.denom_big())
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer_big(), r.denom_big())
    }
}

fn latex_atom(atom: &DerivAtom) -> String {
    let head = latex_symbol(&atom.func);
    if atom.orders.is_empty() {
        return head;
    }
    let mut sub = String::new();
    for (var, k) in &atom.orders {
        for _ in 0..*k {
            sub.push_str(var);
        }
    }
    format!("{head}_{{{sub}}}")
}

fn latex_term_magnitude(term: &Expr) -> (bool, String) {
    let (coeff, key) = super::split_coefficient(term);
    let neg = coeff.is_negative();
    let coeff_abs = if neg { -coeff.clone() } else { coeff };

    let factors: Vec<Expr> = match key {
        None => return (neg, latex_rational(&coeff_abs)),
        Some(Expr::Product(parts)) => parts,
        Some(other) => vec![other],
    };

    let mut numer: Vec<String> = Vec::new();
    let mut denom: Vec<String> = Vec::new();
    for f in &factors {
        match f {
            Expr::Power(base, exp) => match exp.as_rational() {
                Some(r) if r.is_negative() => {
                    let flipped = Expr::Rational(-r.clone());
                    if flipped.is_one_const() {
                        denom.push(latex_factor(base));
                    } else {
                        denom.push(latex_power(base, &flipped));
                    }
                }
                _ => numer.push(latex_power(base, exp)),
            },
            other => numer.push(latex_factor(other)),
        }
    }

    if !coeff_abs.is_one() || numer.is_empty() {
        if coeff_abs.is_integer() {
            numer.insert(0, coeff_abs.numer_big().to_string());
        } else {
            if coeff_abs.numer_big() != 1.into() || numer.is_empty() {
                numer.insert(0, coeff_abs.numer_big().to_string());
            }
            denom.insert(0, coeff_abs.denom_big().to_string());
        }
    }

    let numer_str = if numer.is_empty() {
        "1".to_string()
    } else {
        numer.join("\\,")
    };
    if denom.is_empty() {
        (neg, numer_str)
    } else {
        (neg, format!("\\frac{{{numer_str}}}{{{}}}", denom.join("\\,")))
    }
}

fn latex_factor(e: &Expr) -> String {
    match e {
        Expr::Sum(_) => format!("\\left({}\\right)", latex(e)),
        Expr::Product(_) => format!("\\left({}\\right)", latex(e)),
        Expr::Rational(r) if !r.is_integer() || r.is_negative() => latex_rational(r),
        _ => latex(e),
    }
}

fn latex_power(base: &Expr, exp: &Expr) -> String {
    if let Some(r) = exp.as_rational() {
        if *r == crate::expr::rat(1, 2) {
            return format!("\\sqrt{{{}}}", latex(base));
        }
    }
    let base_str = match base {
        Expr::Var(_) | Expr::Deriv(_) => latex(base),
        Expr::Rational(r) if r.is_integer() && !r.is_negative() => r.numer_big().to_string(),
        _ => format!("\\left({}\\right)", latex(base)),
    };
    format!("{base_str}^{{{}}}", latex(exp))
}
