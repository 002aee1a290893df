//! Immutable symbolic expression trees.
//!
//! An [`Expr`] is a plain enum tree over exact rational constants, named
//! symbols, sums, products, powers with expression exponents, a small set of
//! elementary functions, and opaque derivative atoms of an unknown function
//! (`psi_xy` and friends). Values are immutable after construction and all
//! operations are pure, so expressions can be shared freely across threads.
//!
//! Division and unary minus are sugar: `a/b` is stored as `a * b^-1` and
//! `-a` as `(-1) * a`, which keeps the node set minimal.

mod diff;
mod domain;
mod emit;
mod eval;
mod parse;
mod rational;
mod simplify;
mod zero;

pub use diff::differentiate;
pub use domain::{guard_conditions, sample_domain_points, GuardKind, SampleDomain};
pub use emit::EmitFormat;
pub use eval::{evaluate, Assignment, Evaluator};
pub use parse::{parse, ParseContext};
pub use rational::{rat, rat_int, Rat};
pub use simplify::{expand, simplify};
pub use zero::{exprs_agree, is_zero, ZeroOutcome, ZeroWitness};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Elementary functions understood by the evaluator and differentiator.
///
/// `sqrt` is accepted by the parser but normalized to `Power(_, 1/2)` at
/// construction, so it never appears as a function node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Elementary::Exp),
            "log" => Some(Elementary::Log),
            "sin" => Some(Elementary::Sin),
            "cos" => Some(Elementary::Cos),
            _ => None,
        }
    }
}

/// An opaque partial derivative of a named unknown function.
///
/// `orders` maps variable names to derivative orders; entries with order
/// zero are never stored, and the empty map denotes the undifferentiated
/// unknown itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivAtom {
    pub func: String,
    pub orders: BTreeMap<String, u32>,
}

impl DerivAtom {
    pub fn new(func: impl Into<String>, orders: impl IntoIterator<Item = (String, u32)>) -> Self {
        let orders = orders.into_iter().filter(|(_, k)| *k > 0).collect();
        DerivAtom {
            func: func.into(),
            orders,
        }
    }

    /// Total derivative order.
    pub fn total_order(&self) -> u32 {
        self.orders.values().sum()
    }

    /// The atom with the order along `var` incremented by one.
    pub fn incremented(&self, var: &str) -> Self {
        let mut orders = self.orders.clone();
        *orders.entry(var.to_string()).or_insert(0) += 1;
        DerivAtom {
            func: self.func.clone(),
            orders,
        }
    }
}

/// A node of an immutable expression tree.
///
/// Power bases and exponents and function arguments are reference-counted,
/// so repeated factors (the `(D phi)^e` prefactors that expanded operator
/// images are full of) share one allocation; clones are shallow and
/// comparisons short-circuit on pointer identity.
///
/// The variant order fixes the canonical ordering used to sort operand
/// lists, so constants sort before symbols and composite nodes.
#[derive(Debug, Clone)]
pub enum Expr {
    /// Exact rational constant in lowest terms with positive denominator.
    Rational(Rat),
    /// Variable or parameter symbol.
    Var(String),
    /// Derivative atom of an unknown function.
    Deriv(DerivAtom),
    /// Elementary function application.
    Func(Elementary, Arc<Expr>),
    /// `base ^ exponent`; the exponent is itself an expression and
    /// half-integer rational exponents are represented exactly.
    Power(Arc<Expr>, Arc<Expr>),
    /// Non-empty operand list; nested sums are flattened on construction.
    Sum(Vec<Expr>),
    /// Non-empty operand list; nested products are flattened on construction.
    Product(Vec<Expr>),
}

pub(crate) fn arc_eq(a: &Arc<Expr>, b: &Arc<Expr>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn arc_cmp(a: &Arc<Expr>, b: &Arc<Expr>) -> Ordering {
    if Arc::ptr_eq(a, b) {
        Ordering::Equal
    } else {
        (**a).cmp(&**b)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Rational(a), Expr::Rational(b)) => a == b,
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Deriv(a), Expr::Deriv(b)) => a == b,
            (Expr::Func(f, a), Expr::Func(g, b)) => f == g && arc_eq(a, b),
            // Exponents first: they are small and differ between the
            // power levels of an expanded operator image, while the bases
            // are large and usually shared.
            (Expr::Power(b1, e1), Expr::Power(b2, e2)) => arc_eq(e1, e2) && arc_eq(b1, b2),
            (Expr::Sum(a), Expr::Sum(b)) => a == b,
            (Expr::Product(a), Expr::Product(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Expr {
    fn variant_rank(&self) -> u8 {
        match self {
            Expr::Rational(_) => 0,
            Expr::Var(_) => 1,
            Expr::Deriv(_) => 2,
            Expr::Func(..) => 3,
            Expr::Power(..) => 4,
            Expr::Sum(_) => 5,
            Expr::Product(_) => 6,
        }
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expr::Rational(a), Expr::Rational(b)) => a.cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Deriv(a), Expr::Deriv(b)) => a.cmp(b),
            (Expr::Func(f, a), Expr::Func(g, b)) => f.cmp(g).then_with(|| arc_cmp(a, b)),
            (Expr::Power(b1, e1), Expr::Power(b2, e2)) => {
                arc_cmp(e1, e2).then_with(|| arc_cmp(b1, b2))
            }
            (Expr::Sum(a), Expr::Sum(b)) | (Expr::Product(a), Expr::Product(b)) => a.cmp(b),
            (a, b) => a.variant_rank().cmp(&b.variant_rank()),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rational(rat_int(n))
    }

    pub fn rational(p: i64, q: i64) -> Expr {
        Expr::Rational(rat(p, q))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    /// The undifferentiated unknown function as a zero multi-index atom.
    pub fn unknown(name: impl Into<String>) -> Expr {
        Expr::Deriv(DerivAtom::new(name, []))
    }

    /// Derivative atom, e.g. `Expr::deriv("psi", [("x", 1), ("y", 1)])`.
    pub fn deriv<'a>(
        func: impl Into<String>,
        orders: impl IntoIterator<Item = (&'a str, u32)>,
    ) -> Expr {
        Expr::Deriv(DerivAtom::new(
            func,
            orders.into_iter().map(|(v, k)| (v.to_string(), k)),
        ))
    }

    /// Sum node; flattens nested sums, returns `0` for an empty list and
    /// unwraps singletons.
    pub fn sum(operands: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(operands.len());
        for op in operands {
            match op {
                Expr::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Sum(flat),
        }
    }

    /// Product node; flattens nested products, returns `1` for an empty list
    /// and unwraps singletons.
    pub fn product(operands: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(operands.len());
        for op in operands {
            match op {
                Expr::Product(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::Product(flat),
        }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr::Power(Arc::new(base), Arc::new(exponent))
    }

    /// Power node that reuses an existing base allocation, preserving
    /// sharing through rewrites like the power rule.
    pub fn pow_shared(base: Arc<Expr>, exponent: Expr) -> Expr {
        Expr::Power(base, Arc::new(exponent))
    }

    pub fn func(f: Elementary, arg: Expr) -> Expr {
        Expr::Func(f, Arc::new(arg))
    }

    /// `sqrt(e)` normalized to `e^(1/2)`.
    pub fn sqrt(e: Expr) -> Expr {
        Expr::pow(e, Expr::rational(1, 2))
    }

    pub fn recip(e: Expr) -> Expr {
        Expr::pow(e, Expr::int(-1))
    }

    /// True when the node is the exact constant zero.
    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_zero())
    }

    /// True when the node is the exact constant one.
    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            Expr::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// The value as an exact integer, if the node is an integer constant
    /// in `i64` range.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Expr::Rational(r) => r.as_i64(),
            _ => None,
        }
    }

    /// Names of all variables, parameters, and unknown functions in the tree.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Rational(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Deriv(atom) => {
                out.insert(atom.func.clone());
            }
            Expr::Func(_, arg) => arg.collect_symbols(out),
            Expr::Power(base, exp) => {
                base.collect_symbols(out);
                exp.collect_symbols(out);
            }
            Expr::Sum(args) | Expr::Product(args) => {
                for a in args {
                    a.collect_symbols(out);
                }
            }
        }
    }

    /// True when `name` occurs as a variable or as an unknown-function name.
    pub fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Expr::Rational(_) => false,
            Expr::Var(v) => v == name,
            Expr::Deriv(atom) => atom.func == name,
            Expr::Func(_, arg) => arg.contains_symbol(name),
            Expr::Power(base, exp) => base.contains_symbol(name) || exp.contains_symbol(name),
            Expr::Sum(args) | Expr::Product(args) => args.iter().any(|a| a.contains_symbol(name)),
        }
    }

    /// Simultaneous substitution of symbols by expressions.
    ///
    /// A binding for a plain symbol replaces every `Var` of that name. A
    /// binding for an unknown-function name resolves every derivative atom
    /// of that function to the corresponding symbolic derivative of the
    /// bound closed form. Replacement images are inserted as-is and are not
    /// themselves rewritten.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Rational(_) => self.clone(),
            Expr::Var(name) => bindings.get(name).cloned().unwrap_or_else(|| self.clone()),
            Expr::Deriv(atom) => match bindings.get(&atom.func) {
                Some(closed) => {
                    let mut out = simplify(closed);
                    for (var, order) in &atom.orders {
                        for _ in 0..*order {
                            out = simplify(&differentiate(&out, var));
                        }
                    }
                    out
                }
                None => self.clone(),
            },
            Expr::Func(f, arg) => Expr::Func(*f, arc_map(arg, |a| a.substitute(bindings))),
            Expr::Power(base, exp) => Expr::Power(
                arc_map(base, |b| b.substitute(bindings)),
                arc_map(exp, |e| e.substitute(bindings)),
            ),
            Expr::Sum(args) => Expr::sum(args.iter().map(|a| a.substitute(bindings)).collect()),
            Expr::Product(args) => {
                Expr::product(args.iter().map(|a| a.substitute(bindings)).collect())
            }
        }
    }

    /// Substitute a single symbol.
    pub fn substitute_one(&self, name: &str, value: &Expr) -> Expr {
        let mut bindings = BTreeMap::new();
        bindings.insert(name.to_string(), value.clone());
        self.substitute(&bindings)
    }

    /// Render to the plain text format (round-trips through [`parse`]).
    pub fn emit(&self, format: EmitFormat) -> String {
        emit::emit(self, format)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit(EmitFormat::Plain))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Rat> for Expr {
    fn from(r: Rat) -> Expr {
        Expr::Rational(r)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, Expr::recip(rhs)])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(vec![Expr::int(-1), self])
    }
}

/// Splits a canonical term into its rational coefficient and the remaining
/// symbolic key (`None` when the term is a bare constant).
pub(crate) fn split_coefficient(term: &Expr) -> (Rat, Option<Expr>) {
    match term {
        Expr::Rational(r) => (r.clone(), None),
        Expr::Product(args) => {
            let mut coeff = Rat::one();
            let mut rest = Vec::with_capacity(args.len());
            for a in args {
                match a {
                    Expr::Rational(r) => coeff *= r,
                    other => rest.push(other.clone()),
                }
            }
            match rest.len() {
                0 => (coeff, None),
                1 => (coeff, Some(rest.pop().unwrap())),
                _ => (coeff, Some(Expr::Product(rest))),
            }
        }
        other => (Rat::one(), Some(other.clone())),
    }
}

/// The additive terms of a canonical expression: the operands of a top-level
/// sum, or the expression itself.
pub fn additive_terms(e: &Expr) -> &[Expr] {
    match e {
        Expr::Sum(args) => args,
        other => std::slice::from_ref(other),
    }
}

/// Splits a term into its rational coefficient and the constant-free rest
/// (`None` when the term is a bare constant).
pub fn split_coeff(term: &Expr) -> (Rat, Option<Expr>) {
    split_coefficient(term)
}

/// Applies `f` under an [`Arc`], reusing the allocation when the result is
/// unchanged.
pub(crate) fn arc_map(arc: &Arc<Expr>, f: impl FnOnce(&Expr) -> Expr) -> Arc<Expr> {
    let out = f(arc);
    if out == **arc {
        arc.clone()
    } else {
        Arc::new(out)
    }
}
