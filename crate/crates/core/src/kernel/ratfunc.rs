//! Rational functions of the field variables with linear parameter numerators.

use std::fmt;

use num_traits::{One, Zero};

use super::poly::{Monomial, Poly, Var};
use super::{KernelError, Rat};

/// Canonical quotient `num / den` of polynomials.
///
/// `den` is nonzero, parameter-free, coprime to `num` and has leading
/// coefficient 1, so structural equality is mathematical equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        RatFunc::from_poly(Poly::int(c))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        RatFunc::constant(Rat::new(n.into(), d.into()))
    }

    /// Field variable `u^{i+1}`.
    pub fn field(i: usize) -> Self {
        RatFunc::from_poly(Poly::field(i))
    }

    /// Formal parameter `c_{k+1}`.
    pub fn param(k: usize) -> Self {
        RatFunc::from_poly(Poly::param(k))
    }

    /// Builds `num / den` in canonical form.
    pub fn new(num: Poly, den: Poly) -> Result<Self, KernelError> {
        if den.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        if den.has_params() {
            return Err(KernelError::ParameterInDenominator);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatFunc { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        let lc = den.leading_coefficient();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn has_params(&self) -> bool {
        self.num.has_params()
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Division; fails on a zero or parameter-dependent divisor.
    pub fn checked_div(&self, rhs: &RatFunc) -> Result<RatFunc, KernelError> {
        if rhs.is_zero() {
            return Err(KernelError::DivisionByZero);
        }
        if rhs.num.has_params() {
            return Err(KernelError::ParameterInDenominator);
        }
        Ok(Self::normalize(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        RatFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    /// Partial derivative with respect to `u^{i+1}` by the quotient rule.
    pub fn partial(&self, i: usize) -> RatFunc {
        self.partial_var(Var::Field(i as u16))
    }

    pub fn partial_var(&self, v: Var) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from_poly(self.num.partial(v));
        }
        let dn = self.num.partial(v);
        let dd = self.den.partial(v);
        if dd.is_zero() {
            return Self::normalize(dn, self.den.clone());
        }
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        Self::normalize(top, self.den.pow(2))
    }

    /// Substitutes rational values for parameters (or field variables).
    pub fn substitute(&self, subst: &dyn Fn(Var) -> Option<Poly>) -> Result<RatFunc, KernelError> {
        RatFunc::new(self.num.substitute(subst), self.den.substitute(subst))
    }

    /// Evaluates at a rational point; `None` on a pole or missing value.
    pub fn eval(&self, point: &dyn Fn(Var) -> Option<Rat>) -> Option<Rat> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point)? / d)
    }

    /// Largest field-variable index that occurs, plus one.
    pub fn field_arity(&self) -> usize {
        self.num
            .vars()
            .into_iter()
            .chain(self.den.vars())
            .filter_map(|v| match v {
                Var::Field(i) => Some(i as usize + 1),
                Var::Param(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Largest parameter index that occurs, plus one.
    pub fn param_arity(&self) -> usize {
        self.num
            .vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Param(k) => Some(k as usize + 1),
                Var::Field(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Multiplies by a monomial with coefficient.
    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> RatFunc {
        Self::normalize(self.num.mul_monomial(m, c), self.den.clone())
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl From<Rat> for RatFunc {
    fn from(c: Rat) -> Self {
        RatFunc::constant(c)
    }
}

impl std::ops::Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFunc::from_poly(num);
            }
            return RatFunc::normalize(num, self.den.clone());
        }
        let g = self.den.gcd(&rhs.den);
        let (ca, cb) = if g.is_one() {
            (rhs.den.clone(), self.den.clone())
        } else {
            (rhs.den.div_exact(&g).expect("gcd divides"), self.den.div_exact(&g).expect("gcd divides"))
        };
        let num = &(&self.num * &ca) + &(&rhs.num * &cb);
        RatFunc::normalize(num, &self.den * &ca)
    }
}

impl std::ops::Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl std::ops::Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel before multiplying to keep the final gcd small.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let lc = den.leading_coefficient();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.recip();
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                (&self).$m(&rhs)
            }
        }
        impl std::ops::$tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: &RatFunc) -> RatFunc {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl std::ops::Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl std::ops::AddAssign<&RatFunc> for RatFunc {
    fn add_assign(&mut self, rhs: &RatFunc) {
        *self = &*self + rhs;
    }
}

impl std::ops::SubAssign<&RatFunc> for RatFunc {
    fn sub_assign(&mut self, rhs: &RatFunc) {
        *self = &*self - rhs;
    }
}

impl std::iter::Sum for RatFunc {
    fn sum<I: Iterator<Item = RatFunc>>(iter: I) -> RatFunc {
        iter.fold(RatFunc::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let wrap = |p: &Poly| {
            if p.len() > 1 || p.leading().is_some_and(|(m, c)| !c.is_one() || m.factors().len() > 1) {
                format!("({p})")
            } else {
                p.to_string()
            }
        };
        let num = if self.num.len() > 1 || self.num.leading_coefficient() < Rat::zero() {
            format!("({})", self.num)
        } else {
            self.num.to_string()
        };
        write!(f, "{}/{}", num, wrap(&self.den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: usize) -> RatFunc {
        RatFunc::field(i)
    }

    #[test]
    fn cancellation_on_multiply() {
        let q = u(0).checked_div(&u(1)).unwrap();
        assert_eq!(&q * &u(1), u(0));
    }

    #[test]
    fn additive_inverse_is_zero() {
        assert!((&u(0) + &(-&u(0))).is_zero());
    }

    #[test]
    fn difference_of_squares_divides() {
        let a = &(&u(0) * &u(0)) - &(&u(1) * &u(1));
        let b = &u(0) - &u(1);
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q, &u(0) + &u(1));
        // multiply back
        assert_eq!(&q * &b, a);
    }

    #[test]
    fn division_errors() {
        assert!(matches!(u(0).checked_div(&RatFunc::zero()), Err(KernelError::DivisionByZero)));
        assert!(matches!(u(0).checked_div(&RatFunc::param(0)), Err(KernelError::ParameterInDenominator)));
    }

    #[test]
    fn partial_derivatives() {
        let p = &(&u(0) * &u(0)) * &u(1);
        assert_eq!(p.partial(0), (&u(0) * &u(1)).scale(&Rat::from_integer(2.into())));
        let inv = RatFunc::one().checked_div(&u(1)).unwrap();
        let expect = RatFunc::int(-1).checked_div(&(&u(1) * &u(1))).unwrap();
        assert_eq!(inv.partial(1), expect);
        let lin = &(&RatFunc::param(0) * &u(0)) + &RatFunc::param(1);
        assert_eq!(lin.partial(0), RatFunc::param(0));
    }

    #[test]
    fn canonical_denominator_is_monic() {
        let a = RatFunc::new(Poly::field(0), Poly::field(1).scale(&Rat::from_integer(2.into()))).unwrap();
        assert!(a.den().leading_coefficient().is_one());
        assert_eq!(a.to_string(), "1/2*u1/u2");
    }
}
