//! Best-effort normalization of expression trees.
//!
//! [`simplify`] produces a canonical-ish form: constants folded exactly,
//! nested sums/products flattened and sorted, like terms collected, and
//! same-base powers combined. It never distributes products over sums, so
//! syntactic minimality is not guaranteed; semantic equivalence is.
//!
//! [`expand`] additionally distributes products over sums and multiplies
//! out small positive integer powers of sums, which maximizes cancellation
//! during operator application at the cost of larger intermediate trees.
//!
//! Rewrites preserve the sharing of power bases: the combined `x^a x^b`
//! keeps the original base allocation, so the repeated `(D phi)^e`
//! prefactors of expanded operator images stay one shared node.

use super::{arc_cmp, split_coefficient, Elementary, Expr, Rat};
use num::{BigInt, ToPrimitive};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Growth cap for distribution; beyond this the partial sum is folded back
/// into a compact factor instead of being multiplied out further.
const DISTRIBUTE_CAP: usize = 100_000;

/// Per-pass memo of already-rewritten shared nodes, keyed by allocation.
/// Keys stay valid for the pass because the borrowed input keeps every
/// `Arc` alive. Memoized results also keep repeated subtrees pointer-equal
/// in the output, which the comparison fast paths rely on.
type PassMemo = HashMap<*const Expr, Arc<Expr>>;

fn arc_rewrite(
    arc: &Arc<Expr>,
    memo: &mut PassMemo,
    f: impl FnOnce(&Expr, &mut PassMemo) -> Expr,
) -> Arc<Expr> {
    let key = Arc::as_ptr(arc);
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let out = f(arc, memo);
    let mapped = if out == **arc {
        arc.clone()
    } else {
        Arc::new(out)
    };
    memo.insert(key, mapped.clone());
    mapped
}

pub fn simplify(e: &Expr) -> Expr {
    simp(e, &mut PassMemo::new())
}

fn simp(e: &Expr, memo: &mut PassMemo) -> Expr {
    match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Deriv(_) => e.clone(),
        Expr::Func(f, arg) => make_func(*f, arc_rewrite(arg, memo, simp)),
        Expr::Power(base, exp) => {
            make_power(arc_rewrite(base, memo, simp), arc_rewrite(exp, memo, simp))
        }
        Expr::Sum(args) => make_sum(args.iter().map(|a| simp(a, memo)).collect()),
        Expr::Product(args) => make_product(args.iter().map(|a| simp(a, memo)).collect()),
    }
}

pub fn expand(e: &Expr) -> Expr {
    // expand_inner canonicalizes bottom-up on its own, so no separate
    // simplify pass is needed first.
    expand_inner(e, &mut PassMemo::new())
}

fn expand_inner(e: &Expr, memo: &mut PassMemo) -> Expr {
    match e {
        Expr::Rational(_) | Expr::Var(_) | Expr::Deriv(_) => e.clone(),
        Expr::Func(f, arg) => make_func(*f, arc_rewrite(arg, memo, expand_inner)),
        Expr::Power(base, exp) => {
            let base = arc_rewrite(base, memo, expand_inner);
            let exp = arc_rewrite(exp, memo, expand_inner);
            match exp.as_integer().and_then(|k| u32::try_from(k).ok()) {
                Some(k) if k >= 2 && matches!(&*base, Expr::Sum(_)) => {
                    let mut acc = Expr::one();
                    for _ in 0..k {
                        acc = distribute(vec![acc, (*base).clone()]);
                    }
                    acc
                }
                _ => make_power(base, exp),
            }
        }
        Expr::Sum(args) => make_sum(args.iter().map(|a| expand_inner(a, memo)).collect()),
        Expr::Product(args) => {
            distribute(args.iter().map(|a| expand_inner(a, memo)).collect())
        }
    }
}

/// Multiplies the factors out over any sums among them, collecting like
/// terms after every step so intermediate growth stays bounded by the
/// number of distinct term keys.
fn distribute(factors: Vec<Expr>) -> Expr {
    let mut acc: Vec<Expr> = vec![Expr::one()];
    for factor in factors {
        let terms: Vec<Expr> = match &factor {
            Expr::Sum(args) => args.clone(),
            other => vec![other.clone()],
        };
        if acc.len().saturating_mul(terms.len()) > DISTRIBUTE_CAP {
            // Too large to expand; fold what we have into a compact factor.
            acc = vec![make_product(vec![make_sum(acc), factor])];
            continue;
        }
        let mut next = Vec::with_capacity(acc.len() * terms.len());
        for a in &acc {
            for t in &terms {
                next.push(mul_terms(a, t));
            }
        }
        acc = match make_sum(next) {
            Expr::Sum(args) => args,
            other => vec![other],
        };
    }
    make_sum(acc)
}

/// Product of two canonical sum-free terms by sorted merge of their factor
/// lists. This is the inner loop of [`distribute`]; it avoids the map
/// machinery of [`make_product`] and falls back to it for anything
/// unusual (sum factors, non-rational folds).
fn mul_terms(a: &Expr, b: &Expr) -> Expr {
    let mut coeff = Rat::one();
    // (base, exponent, whole factor for the untouched case)
    let mut pairs: Vec<(Arc<Expr>, Rat, Option<Expr>)> = Vec::new();
    for term in [a, b] {
        let factors: &[Expr] = match term {
            Expr::Product(parts) => parts,
            Expr::Sum(_) => return make_product(vec![a.clone(), b.clone()]),
            single => std::slice::from_ref(single),
        };
        for f in factors {
            match f {
                Expr::Rational(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= r;
                }
                Expr::Sum(_) => return make_product(vec![a.clone(), b.clone()]),
                Expr::Power(base, exp) => match exp.as_rational() {
                    Some(r) => pairs.push((base.clone(), r.clone(), Some(f.clone()))),
                    None => return make_product(vec![a.clone(), b.clone()]),
                },
                other => pairs.push((Arc::new(other.clone()), Rat::one(), Some(other.clone()))),
            }
        }
    }

    pairs.sort_by(|(b1, ..), (b2, ..)| super::arc_cmp(b1, b2));
    let mut factors: Vec<Expr> = Vec::with_capacity(pairs.len());
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i + 1;
        while j < pairs.len() && super::arc_eq(&pairs[i].0, &pairs[j].0) {
            j += 1;
        }
        if j == i + 1 {
            // Untouched factor: reuse it as-is.
            factors.push(pairs[i].2.take().unwrap());
        } else {
            let mut exp = pairs[i].1.clone();
            for pair in &pairs[i + 1..j] {
                exp += &pair.1;
            }
            match make_power(pairs[i].0.clone(), Arc::new(Expr::Rational(exp))) {
                Expr::Rational(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= r;
                }
                Expr::Product(parts) => {
                    // Rare rewrite cascade; hand the whole thing to the
                    // general path for correctness.
                    let mut all: Vec<Expr> = parts;
                    all.push(Expr::Rational(coeff));
                    all.extend(factors);
                    all.extend(pairs[j..].iter().filter_map(|p| p.2.clone()));
                    return make_product(all);
                }
                other if other.is_one_const() => {}
                other => factors.push(other),
            }
        }
        i = j;
    }

    if factors.is_empty() {
        return Expr::Rational(coeff);
    }
    factors.sort();
    if !coeff.is_one() {
        factors.push(Expr::Rational(coeff));
        factors.sort();
    }
    match factors.len() {
        1 => factors.pop().unwrap(),
        _ => Expr::Product(factors),
    }
}

fn make_func(f: Elementary, arg: Arc<Expr>) -> Expr {
    if let Some(r) = arg.as_rational() {
        match f {
            Elementary::Exp if r.is_zero() => return Expr::one(),
            Elementary::Log if r.is_one() => return Expr::zero(),
            Elementary::Sin if r.is_zero() => return Expr::zero(),
            Elementary::Cos if r.is_zero() => return Expr::one(),
            _ => {}
        }
    }
    Expr::Func(f, arg)
}

/// Rebuilds a sum from canonical operands: folds constants, collects like
/// terms by their constant-free key, drops zeros, and sorts. Collection is
/// sort-and-merge over `(key, coefficient)` pairs, which beats a map for
/// the tens of thousands of short-lived terms distribution produces.
fn make_sum(args: Vec<Expr>) -> Expr {
    let mut constant = Rat::zero();
    let mut pairs: Vec<(Expr, Rat)> = Vec::with_capacity(args.len());
    let mut stack: Vec<Expr> = args;
    stack.reverse();
    while let Some(term) = stack.pop() {
        match term {
            Expr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            term => {
                let (coeff, key) = split_coefficient(&term);
                match key {
                    None => constant += coeff,
                    Some(key) => pairs.push((key, coeff)),
                }
            }
        }
    }
    pairs.sort_by(|(a, _), (b, _)| a.cmp(b));

    let mut terms: Vec<Expr> = Vec::with_capacity(pairs.len() + 1);
    if !constant.is_zero() {
        terms.push(Expr::Rational(constant));
    }
    let mut iter = pairs.into_iter();
    let mut current: Option<(Expr, Rat)> = iter.next();
    while let Some((key, mut coeff)) = current.take() {
        for (next_key, next_coeff) in iter.by_ref() {
            if next_key == key {
                coeff += next_coeff;
            } else {
                current = Some((next_key, next_coeff));
                break;
            }
        }
        if coeff.is_zero() {
            continue;
        }
        if coeff.is_one() {
            terms.push(key);
        } else {
            // Route through make_product so coefficient placement stays
            // canonical (it may get pushed into a sum factor of the key).
            terms.push(make_product(vec![Expr::Rational(coeff), key]));
        }
    }
    terms.sort();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => Expr::Sum(terms),
    }
}

/// Map key preserving the base allocation through product grouping.
struct ByBase(Arc<Expr>);

impl PartialEq for ByBase {
    fn eq(&self, other: &Self) -> bool {
        arc_cmp(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for ByBase {}
impl PartialOrd for ByBase {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByBase {
    fn cmp(&self, other: &Self) -> Ordering {
        arc_cmp(&self.0, &other.0)
    }
}

/// Rebuilds a product from canonical operands: folds constants, combines
/// same-base powers (`x^a * x^b -> x^(a+b)`), annihilates on zero, and sorts.
fn make_product(args: Vec<Expr>) -> Expr {
    let mut pending: Vec<Expr> = args;
    loop {
        let mut constant = Rat::one();
        let mut by_base: BTreeMap<ByBase, Vec<Expr>> = BTreeMap::new();
        let mut stack = pending;
        stack.reverse();
        while let Some(factor) = stack.pop() {
            match factor {
                Expr::Product(inner) => stack.extend(inner.into_iter().rev()),
                Expr::Rational(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    constant *= r;
                }
                Expr::Power(base, exp) => by_base
                    .entry(ByBase(base))
                    .or_default()
                    .push((*exp).clone()),
                other => by_base
                    .entry(ByBase(Arc::new(other)))
                    .or_default()
                    .push(Expr::one()),
            }
        }

        let mut factors: Vec<Expr> = Vec::with_capacity(by_base.len() + 1);
        let mut requeue: Vec<Expr> = Vec::new();
        for (ByBase(base), exps) in by_base {
            let exp = make_sum(exps);
            match make_power(base, Arc::new(exp)) {
                Expr::Rational(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    constant *= r;
                }
                // Power combination may re-expose a product (e.g. a product
                // base whose exponent became an integer); run another pass.
                Expr::Product(parts) => requeue.extend(parts),
                other => factors.push(other),
            }
        }
        if !requeue.is_empty() {
            if !constant.is_one() {
                requeue.push(Expr::Rational(constant));
            }
            requeue.extend(factors);
            pending = requeue;
            continue;
        }

        if factors.is_empty() {
            return Expr::Rational(constant);
        }
        factors.sort();
        if !constant.is_one() {
            // Push the constant into the first sum factor, if any, so a
            // scaled-up expression keeps its additive terms visible to the
            // scale-normalized zero test.
            if let Some(pos) = factors.iter().position(|f| matches!(f, Expr::Sum(_))) {
                let Expr::Sum(terms) = factors.remove(pos) else {
                    unreachable!()
                };
                let scaled = terms
                    .into_iter()
                    .map(|t| make_product(vec![Expr::Rational(constant.clone()), t]))
                    .collect();
                factors.push(make_sum(scaled));
                factors.sort();
            } else {
                factors.push(Expr::Rational(constant));
                factors.sort();
            }
        }
        return match factors.len() {
            1 => factors.pop().unwrap(),
            _ => Expr::Product(factors),
        };
    }
}

/// Rebuilds a power node from canonical parts, folding what can be folded
/// exactly and keeping everything else symbolic. The base allocation is
/// reused whenever the node survives.
fn make_power(base: Arc<Expr>, exp: Arc<Expr>) -> Expr {
    if exp.is_zero_const() {
        return Expr::one();
    }
    if exp.is_one_const() {
        return (*base).clone();
    }
    if base.is_one_const() {
        return Expr::one();
    }
    if base.is_zero_const() {
        if let Some(r) = exp.as_rational() {
            if r.is_positive() {
                return Expr::zero();
            }
        }
        // 0^negative and 0^symbolic are evaluation errors, not rewrites.
        return Expr::Power(base, exp);
    }

    if let (Some(b), Some(r)) = (base.as_rational(), exp.as_rational()) {
        if let Some(folded) = rational_pow(b, r) {
            return Expr::Rational(folded);
        }
    }

    if let Expr::Power(inner_base, inner_exp) = &*base {
        // (b^s)^k = b^(s k) is unconditionally valid for integer k, and for
        // arbitrary exponents when the innermost base is a positive constant.
        let safe = exp.as_integer().is_some()
            || matches!(inner_base.as_rational(), Some(r) if r.is_positive());
        if safe {
            let combined = make_product(vec![(**inner_exp).clone(), (*exp).clone()]);
            return make_power(inner_base.clone(), Arc::new(combined));
        }
    }

    if let Expr::Product(parts) = &*base {
        if exp.as_integer().is_some() {
            // Integer powers distribute over any product.
            let distributed = parts
                .iter()
                .map(|p| make_power(Arc::new(p.clone()), exp.clone()))
                .collect();
            return make_product(distributed);
        }
        // For fractional exponents only provably positive factors may be
        // pulled out of the radical.
        let (pos, rest): (Vec<Expr>, Vec<Expr>) =
            parts.iter().cloned().partition(provably_positive);
        if !pos.is_empty() && !rest.is_empty() {
            let mut factors: Vec<Expr> = pos
                .into_iter()
                .map(|p| make_power(Arc::new(p), exp.clone()))
                .collect();
            let rest = match rest.len() {
                1 => rest.into_iter().next().unwrap(),
                _ => Expr::Product(rest),
            };
            factors.push(make_power(Arc::new(rest), exp));
            return make_product(factors);
        }
    }

    Expr::Power(base, exp)
}

fn provably_positive(e: &Expr) -> bool {
    match e {
        Expr::Rational(r) => r.is_positive(),
        Expr::Power(base, _) => provably_positive(base),
        _ => false,
    }
}

/// Exact `b^r` when representable: integer exponents of bounded size, and
/// perfect roots for fractional exponents over positive bases.
fn rational_pow(b: &Rat, r: &Rat) -> Option<Rat> {
    if r.is_integer() {
        let k = r.as_i64()?;
        if !(-256..=256).contains(&k) {
            return None;
        }
        if b.is_zero() && k < 0 {
            return None;
        }
        return Some(b.pow(k as i32));
    }
    // b^(p/q) with q > 1: fold only when b > 0 and both sides of b are
    // perfect q-th powers.
    if !b.is_positive() {
        return None;
    }
    let q = r.denom_u32()?;
    if q > 64 {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let candidate = n.nth_root(q);
        (candidate.pow(q) == *n).then_some(candidate)
    };
    let num_root = root(&b.numer_big())?;
    let den_root = root(&b.denom_big())?;
    let p = r.numer_big().to_i64()?;
    if !(-256..=256).contains(&p) {
        return None;
    }
    Some(Rat::from_big(num_root, den_root).pow(p as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn x() -> Expr {
        Expr::var("x")
    }
    fn y() -> Expr {
        Expr::var("y")
    }

    #[test]
    fn sum_like_terms_cancel_exactly() {
        let e = (x() * y() + Expr::int(3)) - (x() * y() + Expr::int(3));
        assert!(simplify(&e).is_zero_const());
    }

    #[test]
    fn constant_folding_is_exact() {
        let e = Expr::rational(1, 3) * Expr::int(3);
        assert!(simplify(&e).is_one_const());
        let e = Expr::pow(Expr::int(2), Expr::int(-2));
        assert_eq!(simplify(&e), Expr::rational(1, 4));
        let e = Expr::pow(Expr::int(4), Expr::rational(1, 2));
        assert_eq!(simplify(&e), Expr::int(2));
        // 2^(1/3) has no exact form and must stay symbolic.
        let e = Expr::pow(Expr::int(2), Expr::rational(1, 3));
        assert_eq!(simplify(&e), e);
    }

    #[test]
    fn same_base_powers_combine() {
        let e = Expr::pow(x(), Expr::int(2)) * Expr::pow(x(), Expr::int(-1));
        assert_eq!(simplify(&e), x());
        let e = x() * Expr::recip(x());
        assert!(simplify(&e).is_one_const());
    }

    #[test]
    fn combined_powers_share_the_base_allocation() {
        let base = Arc::new(x() + y());
        let e = Expr::product(vec![
            Expr::pow_shared(base.clone(), Expr::rational(-1, 2)),
            Expr::pow_shared(base.clone(), Expr::int(2)),
        ]);
        match simplify(&e) {
            Expr::Power(b, exp) => {
                assert!(Arc::ptr_eq(&b, &base));
                assert_eq!(*exp, Expr::rational(3, 2));
            }
            other => panic!("expected a power, got {other:?}"),
        }
    }

    #[test]
    fn integer_powers_distribute_over_products() {
        // (2/y)^2 -> 4 * y^-2
        let v = Expr::int(2) / y();
        let e = Expr::pow(v, Expr::int(2));
        let expected = Expr::int(4) * Expr::pow(y(), Expr::int(-2));
        assert_eq!(simplify(&e), simplify(&expected));
    }

    #[test]
    fn schwarzian_combination_vanishes() {
        // With V = 2/y and D = d/dx - d/dy: 2*(DV/2 - V^2/4) = 0.
        // DV = 2*y^-2 here, computed by hand.
        let dv = Expr::int(2) * Expr::pow(y(), Expr::int(-2));
        let v = Expr::int(2) / y();
        let q2 = Expr::int(2)
            * (dv * Expr::rational(1, 2)
                - Expr::pow(v, Expr::int(2)) * Expr::rational(1, 4));
        assert!(simplify(&q2).is_zero_const());
    }

    #[test]
    fn expand_distributes_and_collects() {
        // (x + y)*(x - y) -> x^2 - y^2
        let e = (x() + y()) * (x() - y());
        let expected = Expr::pow(x(), Expr::int(2)) - Expr::pow(y(), Expr::int(2));
        assert_eq!(expand(&e), simplify(&expected));

        // (x + y)^2 -> x^2 + 2xy + y^2
        let e = Expr::pow(x() + y(), Expr::int(2));
        let expanded = expand(&e);
        let expected = Expr::pow(x(), Expr::int(2))
            + Expr::int(2) * x() * y()
            + Expr::pow(y(), Expr::int(2));
        assert_eq!(expanded, simplify(&expected));
    }

    #[test]
    fn fractional_powers_keep_unsigned_factors_inside() {
        // (x*y)^(1/2) must not split, but (4*x)^(1/2) -> 2*x^(1/2).
        let e = Expr::pow(x() * y(), Expr::rational(1, 2));
        assert_eq!(simplify(&e), e);
        let e = Expr::pow(Expr::int(4) * x(), Expr::rational(1, 2));
        let expected = Expr::int(2) * Expr::pow(x(), Expr::rational(1, 2));
        assert_eq!(simplify(&e), simplify(&expected));
    }

    #[test]
    fn nested_constant_powers_combine() {
        // (2^(-1/2))^(2/3) -> 2^(-1/3)
        let e = Expr::pow(
            Expr::pow(Expr::int(2), Expr::rational(-1, 2)),
            Expr::rational(2, 3),
        );
        let expected = Expr::pow(Expr::int(2), Expr::rational(-1, 3));
        assert_eq!(simplify(&e), expected);
    }

    #[test]
    fn rational_pow_edge_cases() {
        assert_eq!(rational_pow(&rat(4, 9), &rat(1, 2)), Some(rat(2, 3)));
        assert_eq!(rational_pow(&rat(2, 1), &rat(1, 2)), None);
        assert_eq!(rational_pow(&rat(-4, 1), &rat(1, 2)), None);
        assert_eq!(rational_pow(&rat(8, 27), &rat(-2, 3)), Some(rat(9, 4)));
    }
}
