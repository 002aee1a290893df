//! Exact symbolic partial differentiation.

use super::{simplify, Elementary, Expr};

/// Partial derivative of `e` with respect to `var`.
///
/// Any symbol other than `var` is treated as constant; derivative atoms
/// have their multi-index incremented along `var`. The result is returned
/// simplified. Total on well-formed expressions.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    simplify(&d(e, var))
}

fn d(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Rational(_) => Expr::zero(),
        Expr::Var(name) => {
            if name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Deriv(atom) => Expr::Deriv(atom.incremented(var)),
        Expr::Sum(args) => Expr::sum(args.iter().map(|a| d(a, var)).collect()),
        Expr::Product(args) => {
            // Leibniz over the whole operand list.
            let mut terms = Vec::with_capacity(args.len());
            for (i, fi) in args.iter().enumerate() {
                let dfi = d(fi, var);
                if dfi.is_zero_const() {
                    continue;
                }
                let mut ops = vec![dfi];
                for (j, fj) in args.iter().enumerate() {
                    if j != i {
                        ops.push(fj.clone());
                    }
                }
                terms.push(Expr::product(ops));
            }
            Expr::sum(terms)
        }
        Expr::Power(base, exp) => {
            if let Some(r) = exp.as_rational() {
                // d/dx A^m = m A^(m-1) dA, exact for rational m including
                // the half-integers used by the null-function prefactor.
                // The base allocation is reused so repeated prefactors stay
                // shared across the derivative's terms.
                let m_minus_one = Expr::Rational(r - super::rat_int(1));
                return Expr::product(vec![
                    Expr::Rational(r.clone()),
                    Expr::pow_shared(base.clone(), m_minus_one),
                    d(base, var),
                ]);
            }
            // General b^e = exp(e log b): b^e * (e' log b + e b'/b).
            let db = d(base, var);
            let de = d(exp, var);
            let log_term = Expr::product(vec![de, Expr::Func(Elementary::Log, base.clone())]);
            let ratio_term = Expr::product(vec![
                (**exp).clone(),
                db,
                Expr::pow_shared(base.clone(), Expr::int(-1)),
            ]);
            Expr::product(vec![e.clone(), Expr::sum(vec![log_term, ratio_term])])
        }
        Expr::Func(f, arg) => {
            let da = d(arg, var);
            if da.is_zero_const() {
                return Expr::zero();
            }
            let outer = match f {
                Elementary::Exp => Expr::Func(Elementary::Exp, arg.clone()),
                Elementary::Log => Expr::pow_shared(arg.clone(), Expr::int(-1)),
                Elementary::Sin => Expr::Func(Elementary::Cos, arg.clone()),
                Elementary::Cos => -Expr::Func(Elementary::Sin, arg.clone()),
            };
            Expr::product(vec![outer, da])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }
    fn y() -> Expr {
        Expr::var("y")
    }

    #[test]
    fn quotient_partials() {
        // d/dx (x/y) = 1/y, d/dy (x/y) = -x/y^2
        let e = x() / y();
        assert_eq!(differentiate(&e, "x"), simplify(&Expr::recip(y())));
        let expected = -(x() * Expr::pow(y(), Expr::int(-2)));
        assert_eq!(differentiate(&e, "y"), simplify(&expected));
    }

    #[test]
    fn constants_differentiate_to_zero() {
        assert!(differentiate(&Expr::rational(7, 3), "x").is_zero_const());
        assert!(differentiate(&Expr::var("c0"), "x").is_zero_const());
    }

    #[test]
    fn derivative_atoms_increment() {
        let e = Expr::deriv("psi", [("x", 1)]);
        assert_eq!(differentiate(&e, "x"), Expr::deriv("psi", [("x", 2)]));
        assert_eq!(
            differentiate(&e, "y"),
            Expr::deriv("psi", [("x", 1), ("y", 1)])
        );
    }

    #[test]
    fn elementary_rules() {
        let e = Expr::func(Elementary::Sin, x());
        assert_eq!(differentiate(&e, "x"), Expr::func(Elementary::Cos, x()));
        let e = Expr::func(Elementary::Exp, Expr::int(2) * x());
        let de = differentiate(&e, "x");
        let expected = Expr::int(2) * e.clone();
        assert_eq!(de, simplify(&expected));
    }

    #[test]
    fn half_integer_power_rule() {
        // d/dx (x + y)^(-1/2) = -1/2 (x + y)^(-3/2)
        let e = Expr::pow(x() + y(), Expr::rational(-1, 2));
        let expected = Expr::rational(-1, 2) * Expr::pow(x() + y(), Expr::rational(-3, 2));
        assert_eq!(differentiate(&e, "x"), simplify(&expected));
    }
}
