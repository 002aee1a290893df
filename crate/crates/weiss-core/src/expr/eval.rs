//! Numeric evaluation under the principal real branch.
//!
//! Rational subtrees are folded exactly and only promoted to `f64` on
//! contact with an irrational operation, so e.g. `(1/3) * 3` evaluates to
//! exactly `1`. Fractional powers demand a strictly positive base.

use super::{differentiate, simplify, Elementary, Expr, Rat};
use crate::error::EvalError;
use std::collections::HashMap;
use std::sync::Arc;

/// Values for free symbols plus optional closed forms for unknown functions.
///
/// A closed form lets the evaluator resolve derivative atoms by symbolic
/// differentiation before evaluating numerically.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    values: HashMap<String, f64>,
    functions: HashMap<String, Expr>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, name: impl Into<String>, value: f64) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    pub fn set_function(mut self, name: impl Into<String>, closed_form: Expr) -> Self {
        self.functions.insert(name.into(), closed_form);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn from_point<'a>(names: impl IntoIterator<Item = &'a str>, coords: &[f64]) -> Self {
        let mut a = Assignment::new();
        for (name, value) in names.into_iter().zip(coords) {
            a.values.insert(name.to_string(), *value);
        }
        a
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

enum Val {
    Exact(Rat),
    Approx(f64),
}

impl Val {
    fn to_f64(&self) -> Result<f64, EvalError> {
        let v = match self {
            Val::Exact(r) => r.to_f64().ok_or(EvalError::NonFinite)?,
            Val::Approx(x) => *x,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// Evaluate `e` at `a`, returning the real value under the principal branch.
pub fn evaluate(e: &Expr, a: &Assignment) -> Result<f64, EvalError> {
    Evaluator::new(a).eval(e)
}

/// Evaluation context with a memo for shared subtrees.
///
/// Expanded operator images repeat the same `(D phi)^e` base across
/// thousands of terms; the memo keys those shared allocations by pointer
/// so each is computed once per point. Only approximate values are cached
/// (exact rational subtrees stay exact for the caller's folding).
pub struct Evaluator<'a> {
    assignment: &'a Assignment,
    memo: HashMap<*const Expr, f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(assignment: &'a Assignment) -> Self {
        Evaluator {
            assignment,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64, EvalError> {
        let v = self.eval_val(e)?.to_f64()?;
        Ok(v)
    }

    fn eval_arc(&mut self, arc: &Arc<Expr>) -> Result<Val, EvalError> {
        match &**arc {
            // Leaves are cheaper than the memo lookup.
            Expr::Rational(_) | Expr::Var(_) => self.eval_val(arc),
            _ => {
                let key = Arc::as_ptr(arc);
                if let Some(v) = self.memo.get(&key) {
                    return Ok(Val::Approx(*v));
                }
                let val = self.eval_val(arc)?;
                if let Val::Approx(v) = &val {
                    self.memo.insert(key, *v);
                }
                Ok(val)
            }
        }
    }

    fn eval_val(&mut self, e: &Expr) -> Result<Val, EvalError> {
        match e {
            Expr::Rational(r) => Ok(Val::Exact(r.clone())),
            Expr::Var(name) => match self.assignment.values.get(name) {
                Some(v) => Ok(Val::Approx(*v)),
                None => Err(EvalError::MissingSymbol(name.clone())),
            },
            Expr::Deriv(atom) => {
                let closed = self
                    .assignment
                    .functions
                    .get(&atom.func)
                    .ok_or_else(|| EvalError::MissingClosedForm(atom.func.clone()))?;
                let mut resolved = simplify(closed);
                for (var, order) in &atom.orders {
                    for _ in 0..*order {
                        resolved = differentiate(&resolved, var);
                    }
                }
                self.eval_val(&resolved)
            }
            Expr::Sum(args) => {
                let mut exact = Rat::zero();
                let mut approx = 0.0;
                let mut any_approx = false;
                for arg in args {
                    match self.eval_val(arg)? {
                        Val::Exact(r) => exact += r,
                        Val::Approx(v) => {
                            approx += v;
                            any_approx = true;
                        }
                    }
                }
                if any_approx {
                    Ok(Val::Approx(
                        approx + exact.to_f64().ok_or(EvalError::NonFinite)?,
                    ))
                } else {
                    Ok(Val::Exact(exact))
                }
            }
            Expr::Product(args) => {
                let mut exact = Rat::one();
                let mut approx = 1.0;
                let mut any_approx = false;
                for arg in args {
                    match self.eval_val(arg)? {
                        Val::Exact(r) => exact *= r,
                        Val::Approx(v) => {
                            approx *= v;
                            any_approx = true;
                        }
                    }
                }
                if any_approx {
                    Ok(Val::Approx(
                        approx * exact.to_f64().ok_or(EvalError::NonFinite)?,
                    ))
                } else {
                    Ok(Val::Exact(exact))
                }
            }
            Expr::Power(base, exp) => {
                let base_val = self.eval_arc(base)?;
                let exp_val = self.eval_arc(exp)?;
                power(base_val, exp_val)
            }
            Expr::Func(f, arg) => {
                let x = self.eval_arc(arg)?.to_f64()?;
                let v = match f {
                    Elementary::Exp => x.exp(),
                    Elementary::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogNonPositive(x));
                        }
                        x.ln()
                    }
                    Elementary::Sin => x.sin(),
                    Elementary::Cos => x.cos(),
                };
                Ok(Val::Approx(v))
            }
        }
    }
}

fn power(base: Val, exp: Val) -> Result<Val, EvalError> {
    // Integer exponents: any base, with 0^negative rejected.
    if let Val::Exact(r) = &exp {
        if r.is_integer() {
            let k = r.as_i64().and_then(|k| i32::try_from(k).ok());
            return match (&base, k) {
                (Val::Exact(b), Some(k)) => {
                    if b.is_zero() && k < 0 {
                        Err(EvalError::DivisionByZero)
                    } else if b.is_zero() && k == 0 {
                        Ok(Val::Exact(Rat::one()))
                    } else {
                        Ok(Val::Exact(b.pow(k)))
                    }
                }
                (_, _) => {
                    let b = base.to_f64()?;
                    let kf = r.to_f64().ok_or(EvalError::NonFinite)?;
                    if b == 0.0 && kf < 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    Ok(Val::Approx(b.powf(kf)))
                }
            };
        }
    }
    // Fractional or symbolic exponent: principal real branch, strictly
    // positive base required.
    let b = base.to_f64()?;
    let x = exp.to_f64()?;
    if b <= 0.0 {
        return Err(EvalError::NonPositiveBase { base: b });
    }
    Ok(Val::Approx(b.powf(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn null_function_value_by_hand() {
        // (c0 y + c1 x)/sqrt(x+y) at c0=1, c1=2, x=1, y=3 is (3+2)/2 = 2.5.
        let e = parse("(c0*y + c1*x)/sqrt(x+y)").unwrap();
        let a = Assignment::new()
            .set("c0", 1.0)
            .set("c1", 2.0)
            .set("x", 1.0)
            .set("y", 3.0);
        assert_eq!(evaluate(&e, &a).unwrap(), 2.5);
    }

    #[test]
    fn zero_numerator() {
        let e = parse("x/y").unwrap();
        let a = Assignment::new().set("x", 0.0).set("y", 5.0);
        assert_eq!(evaluate(&e, &a).unwrap(), 0.0);
    }

    #[test]
    fn non_positive_base_under_fractional_exponent() {
        let e = parse("(x+y)^(-1/2)").unwrap();
        let a = Assignment::new().set("x", 3.0).set("y", -3.0);
        assert!(matches!(
            evaluate(&e, &a),
            Err(EvalError::NonPositiveBase { .. })
        ));
    }

    #[test]
    fn missing_symbol_and_division_by_zero() {
        let e = parse("x/y").unwrap();
        let a = Assignment::new().set("x", 1.0);
        assert!(matches!(evaluate(&e, &a), Err(EvalError::MissingSymbol(_))));
        let a = Assignment::new().set("x", 1.0).set("y", 0.0);
        assert!(matches!(evaluate(&e, &a), Err(EvalError::DivisionByZero)));
    }

    #[test]
    fn log_of_non_positive_argument() {
        let e = parse("log(x)").unwrap();
        let a = Assignment::new().set("x", -1.0);
        assert!(matches!(evaluate(&e, &a), Err(EvalError::LogNonPositive(_))));
    }

    #[test]
    fn exact_folding_avoids_float_drift() {
        // (1/3)*3 must be exactly 1.
        let e = parse("1/3*3").unwrap();
        let a = Assignment::new();
        assert_eq!(evaluate(&e, &a).unwrap(), 1.0);
    }

    #[test]
    fn atoms_resolve_through_closed_forms() {
        // psi_x for psi = x^2 y is 2 x y.
        let e = Expr::deriv("psi", [("x", 1)]);
        let closed = parse("x^2*y").unwrap();
        let a = Assignment::new()
            .set("x", 3.0)
            .set("y", 2.0)
            .set_function("psi", closed);
        assert_eq!(evaluate(&e, &a).unwrap(), 12.0);
    }
}
