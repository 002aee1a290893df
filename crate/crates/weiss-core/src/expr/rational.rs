//! Exact rational scalars with a machine-word fast path.
//!
//! Coefficient arithmetic completely dominates expression normalization,
//! and the values are almost always tiny, so [`Rat`] keeps an `i64/i64`
//! representation (lowest terms, positive denominator) and does its
//! arithmetic in `i128` with checked operations. Anything that does not
//! fit promotes to a heap [`BigRational`] and stays exact.

use num::{BigInt, BigRational, Signed as _, ToPrimitive, Zero as _};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone)]
enum Repr {
    /// Lowest terms, denominator > 0.
    Small(i64, i64),
    Big(Box<BigRational>),
}

/// Exact rational number in lowest terms with positive denominator.
#[derive(Debug, Clone)]
pub struct Rat(Repr);

/// Shorthand for the exact fraction `p/q`. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    assert!(q != 0, "zero denominator");
    Rat::from_i128s(p as i128, q as i128)
}

/// Shorthand for an integer-valued [`Rat`].
pub fn rat_int(n: i64) -> Rat {
    Rat(Repr::Small(n, 1))
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn zero() -> Rat {
        Rat(Repr::Small(0, 1))
    }

    pub fn one() -> Rat {
        Rat(Repr::Small(1, 1))
    }

    /// Reduced rational from (possibly unreduced) `i128` parts.
    fn from_i128s(mut n: i128, mut d: i128) -> Rat {
        debug_assert!(d != 0);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Rat(Repr::Small(0, 1));
        }
        let g = gcd_i128(n, d);
        let (n, d) = (n / g, d / g);
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new(BigRational::new(n.into(), d.into())))),
        }
    }

    /// Reduced rational from big integer parts. Panics if `denom` is zero.
    pub fn from_big(numer: BigInt, denom: BigInt) -> Rat {
        Rat::shrink(BigRational::new(numer, denom))
    }

    fn shrink(big: BigRational) -> Rat {
        match (big.numer().to_i64(), big.denom().to_i64()) {
            (Some(n), Some(d)) => Rat(Repr::Small(n, d)),
            _ => Rat(Repr::Big(Box::new(big))),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new((*n).into(), (*d).into()),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n == 0,
            Repr::Big(b) => b.numer().is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    /// The value as an `i64` when it is an integer in range.
    pub fn as_i64(&self) -> Option<i64> {
        match &self.0 {
            Repr::Small(n, 1) => Some(*n),
            Repr::Small(..) => None,
            Repr::Big(b) if b.is_integer() => b.numer().to_i64(),
            Repr::Big(_) => None,
        }
    }

    pub fn numer_big(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => (*n).into(),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom_big(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => (*d).into(),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn denom_u32(&self) -> Option<u32> {
        match &self.0 {
            Repr::Small(_, d) => u32::try_from(*d).ok(),
            Repr::Big(b) => b.denom().to_u32(),
        }
    }

    pub fn numer_is_even(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => n % 2 == 0,
            Repr::Big(b) => (b.numer() % BigInt::from(2)).is_zero(),
        }
    }

    pub fn recip(&self) -> Rat {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Rat::from_i128s(*d as i128, *n as i128)
            }
            Repr::Big(b) => Rat::shrink(b.recip()),
        }
    }

    pub fn pow(&self, exp: i32) -> Rat {
        if exp == 0 {
            return Rat::one();
        }
        if let Repr::Small(n, d) = &self.0 {
            let k = exp.unsigned_abs();
            if k <= 32 {
                let pow_i128 = |base: i64| -> Option<i128> {
                    let mut acc: i128 = 1;
                    for _ in 0..k {
                        acc = acc.checked_mul(base as i128)?;
                    }
                    Some(acc)
                };
                if let (Some(np), Some(dp)) = (pow_i128(*n), pow_i128(*d)) {
                    if exp > 0 {
                        return Rat::from_i128s(np, dp);
                    }
                    assert!(np != 0, "zero to a negative power");
                    return Rat::from_i128s(dp, np);
                }
            }
        }
        Rat::shrink(self.to_big().pow(exp))
    }

    pub fn to_f64(&self) -> Option<f64> {
        match &self.0 {
            Repr::Small(n, d) => Some(*n as f64 / *d as f64),
            Repr::Big(b) => b.to_f64(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            // Both reduced with positive denominators.
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // Mixed means one side did not fit in i64, so they differ,
            // except a Big that happens to be small-representable (which
            // shrink prevents, but stay safe).
            (Repr::Small(a, b), Repr::Big(big)) | (Repr::Big(big), Repr::Small(a, b)) => {
                big.numer().to_i64() == Some(*a) && big.denom().to_i64() == Some(*b)
            }
        }
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                // b, d > 0, products fit in i128.
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) => write!(f, "{b}"),
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        rat_int(n)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $small:expr, $big:expr) => {
        impl std::ops::$trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &rhs.0) {
                    #[allow(clippy::redundant_closure_call)]
                    if let Some(out) =
                        ($small)(*a as i128, *b as i128, *c as i128, *d as i128)
                    {
                        return out;
                    }
                }
                #[allow(clippy::redundant_closure_call)]
                Rat::shrink(($big)(self.to_big(), rhs.to_big()))
            }
        }
        impl std::ops::$trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                std::ops::$trait::$method(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                std::ops::$trait::$method(&self, rhs)
            }
        }
        impl std::ops::$trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                std::ops::$trait::$method(self, &rhs)
            }
        }
    };
}

binop!(
    Add,
    add,
    |a: i128, b: i128, c: i128, d: i128| {
        let n = a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?;
        Some(Rat::from_i128s(n, b * d))
    },
    |x: BigRational, y: BigRational| x + y
);

binop!(
    Sub,
    sub,
    |a: i128, b: i128, c: i128, d: i128| {
        let n = a.checked_mul(d)?.checked_sub(c.checked_mul(b)?)?;
        Some(Rat::from_i128s(n, b * d))
    },
    |x: BigRational, y: BigRational| x - y
);

binop!(
    Mul,
    mul,
    |a: i128, b: i128, c: i128, d: i128| {
        Some(Rat::from_i128s(a.checked_mul(c)?, b.checked_mul(d)?))
    },
    |x: BigRational, y: BigRational| x * y
);

binop!(
    Div,
    div,
    |a: i128, b: i128, c: i128, d: i128| {
        if c == 0 {
            panic!("division by zero rational");
        }
        Some(Rat::from_i128s(a.checked_mul(d)?, b.checked_mul(c)?))
    },
    |x: BigRational, y: BigRational| x / y
);

impl std::ops::Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match self.0 {
            Repr::Small(n, d) => Rat(Repr::Small(-n, d)),
            Repr::Big(b) => Rat(Repr::Big(Box::new(-*b))),
        }
    }
}

impl std::ops::Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -self.clone()
    }
}

impl std::ops::AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = &*self + &rhs;
    }
}

impl std::ops::AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl std::ops::MulAssign<Rat> for Rat {
    fn mul_assign(&mut self, rhs: Rat) {
        *self = &*self * &rhs;
    }
}

impl std::ops::MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_sign_normalization() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(1, -2), rat(-1, 2));
        assert_eq!(rat(-3, -6), rat(1, 2));
        assert_eq!(rat(0, 7), Rat::zero());
    }

    #[test]
    fn arithmetic_matches_bignum_oracle() {
        let pairs = [
            (3i64, 4i64),
            (-7, 2),
            (0, 1),
            (5, 3),
            (-1, 6),
            (i64::MAX / 2, 3),
        ];
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                let x = rat(a, b);
                let y = rat(c, d);
                let bx = BigRational::new(a.into(), b.into());
                let by = BigRational::new(c.into(), d.into());
                assert_eq!((&x + &y).to_big(), &bx + &by);
                assert_eq!((&x - &y).to_big(), &bx - &by);
                assert_eq!((&x * &y).to_big(), &bx * &by);
                if c != 0 {
                    assert_eq!((&x / &y).to_big(), &bx / &by);
                }
                assert_eq!(x.cmp(&y), bx.cmp(&by));
            }
        }
    }

    #[test]
    fn overflow_promotes_and_stays_exact() {
        let huge = rat(i64::MAX, 1);
        let sum = &huge + &huge;
        assert!(!sum.is_zero());
        assert_eq!(
            sum.numer_big(),
            BigInt::from(i64::MAX) * BigInt::from(2)
        );
        let back = &sum - &huge;
        assert_eq!(back, huge);

        let big_pow = rat(10, 1).pow(30);
        assert_eq!(big_pow.numer_big().to_string().len(), 31);
        assert_eq!(big_pow.pow(-1), Rat::one() / big_pow);
    }

    #[test]
    fn integer_queries() {
        assert!(rat(6, 3).is_integer());
        assert_eq!(rat(6, 3).as_i64(), Some(2));
        assert_eq!(rat(1, 2).as_i64(), None);
        assert!(rat(4, 2).numer_is_even());
        assert!(!rat(3, 1).numer_is_even());
    }

    #[test]
    fn float_conversion() {
        assert_eq!(rat(1, 2).to_f64(), Some(0.5));
        assert_eq!(rat(-7, 4).to_f64(), Some(-1.75));
    }
}
