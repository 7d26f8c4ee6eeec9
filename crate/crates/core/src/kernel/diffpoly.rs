//! Differential polynomials in jet variables with at most one odd factor.
//!
//! Order-zero field variables live inside the [`RatFunc`] coefficients; every
//! even jet stored in a monomial has at least one x-derivative. Odd variables
//! are the covering variables `p_{i,σ}` and the nonlocal potentials `r_α`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use smallvec::SmallVec;

use super::poly::{fmt_rat, Poly, Var};
use super::ratfunc::RatFunc;
use super::{KernelError, Rat};

/// Even jet `u^{index+1}` differentiated `order` times in x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub index: u16,
    pub order: u16,
}

impl Jet {
    pub fn new(index: usize, order: usize) -> Self {
        Jet { index: index as u16, order: order as u16 }
    }
}

/// Odd covering variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OddVar {
    /// `p_{index+1}` differentiated `order` times.
    P { index: u16, order: u16 },
    /// Nonlocal potential `r_{slot+1}`; never carries x-derivatives.
    R { slot: u16 },
}

impl OddVar {
    pub fn p(index: usize, order: usize) -> Self {
        OddVar::P { index: index as u16, order: order as u16 }
    }

    pub fn r(slot: usize) -> Self {
        OddVar::R { slot: slot as u16 }
    }
}

/// A jet variable of any kind, as named in the expression grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JetVar {
    U(Jet),
    Odd(OddVar),
}

fn jet_name(prefix: char, index: u16, order: u16) -> String {
    match order {
        0 => format!("{prefix}{}", index + 1),
        1 => format!("{prefix}{}_x", index + 1),
        2 => format!("{prefix}{}_xx", index + 1),
        k => format!("{prefix}{}_x{k}", index + 1),
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&jet_name('u', self.index, self.order))
    }
}

impl fmt::Display for OddVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OddVar::P { index, order } => f.write_str(&jet_name('p', index, order)),
            OddVar::R { slot } => write!(f, "r{}", slot + 1),
        }
    }
}

/// Product of even jets (orders ≥ 1) times an optional odd factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffMonomial {
    even: SmallVec<[(Jet, u32); 4]>,
    odd: Option<OddVar>,
}

impl DiffMonomial {
    pub fn one() -> Self {
        DiffMonomial::default()
    }

    pub fn odd(v: OddVar) -> Self {
        DiffMonomial { even: SmallVec::new(), odd: Some(v) }
    }

    /// Builds a monomial from even factors (any order, repeats allowed) and an odd factor.
    ///
    /// Panics on an even jet of order 0; those belong in coefficients.
    pub fn new(even: impl IntoIterator<Item = (Jet, u32)>, odd: Option<OddVar>) -> Self {
        let mut m = DiffMonomial { even: SmallVec::new(), odd };
        for (j, e) in even {
            assert!(j.order >= 1, "order-0 field variables belong to coefficients");
            m = m.with_jet(j, e as i32);
        }
        m
    }

    pub fn even(&self) -> &[(Jet, u32)] {
        &self.even
    }

    pub fn odd_factor(&self) -> Option<OddVar> {
        self.odd
    }

    pub fn odd_degree(&self) -> u32 {
        u32::from(self.odd.is_some())
    }

    pub fn degree(&self) -> u32 {
        self.even.iter().map(|f| f.1).sum::<u32>() + self.odd_degree()
    }

    /// Dubrovin–Novikov weight: total number of x-derivatives.
    pub fn weight(&self) -> u32 {
        let even: u32 = self.even.iter().map(|(j, e)| u32::from(j.order) * e).sum();
        let odd = match self.odd {
            Some(OddVar::P { order, .. }) => u32::from(order),
            _ => 0,
        };
        even + odd
    }

    /// Highest x-derivative order among the u and p factors.
    pub fn max_order(&self) -> u16 {
        let e = self.even.iter().map(|f| f.0.order).max().unwrap_or(0);
        match self.odd {
            Some(OddVar::P { order, .. }) => e.max(order),
            _ => e,
        }
    }

    pub fn exponent(&self, j: Jet) -> u32 {
        self.even.iter().find(|f| f.0 == j).map_or(0, |f| f.1)
    }

    /// Changes the exponent of `j` by `delta` (result must stay non-negative).
    pub fn with_jet(&self, j: Jet, delta: i32) -> DiffMonomial {
        let mut even = self.even.clone();
        match even.binary_search_by(|f| f.0.cmp(&j)) {
            Ok(pos) => {
                let e = even[pos].1 as i32 + delta;
                assert!(e >= 0, "negative exponent");
                if e == 0 {
                    even.remove(pos);
                } else {
                    even[pos].1 = e as u32;
                }
            }
            Err(pos) => {
                assert!(delta >= 0, "negative exponent");
                if delta > 0 {
                    even.insert(pos, (j, delta as u32));
                }
            }
        }
        DiffMonomial { even, odd: self.odd }
    }

    pub fn with_odd(&self, odd: Option<OddVar>) -> DiffMonomial {
        DiffMonomial { even: self.even.clone(), odd }
    }

    pub fn without_odd(&self) -> DiffMonomial {
        self.with_odd(None)
    }

    pub fn checked_mul(&self, other: &DiffMonomial) -> Result<DiffMonomial, KernelError> {
        let odd = match (self.odd, other.odd) {
            (Some(_), Some(_)) => return Err(KernelError::OddDegreeOverflow),
            (a, b) => a.or(b),
        };
        let mut m = DiffMonomial { even: self.even.clone(), odd };
        for &(j, e) in &other.even {
            m = m.with_jet(j, e as i32);
        }
        Ok(m)
    }
}

impl Ord for DiffMonomial {
    /// Graded order: total degree, then even factors, then the odd factor.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.even.as_slice().cmp(other.even.as_slice()))
            .then_with(|| self.odd.cmp(&other.odd))
    }
}

impl PartialOrd for DiffMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .even
            .iter()
            .map(|&(j, e)| if e == 1 { j.to_string() } else { format!("{j}^{e}") })
            .collect();
        if let Some(o) = self.odd {
            parts.push(o.to_string());
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

/// Canonical ℚ(u)-linear combination of [`DiffMonomial`]s.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPoly {
    terms: BTreeMap<DiffMonomial, RatFunc>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::from_ratfunc(RatFunc::one())
    }

    pub fn from_ratfunc(c: RatFunc) -> Self {
        DiffPoly::term(DiffMonomial::one(), c)
    }

    pub fn constant(c: Rat) -> Self {
        DiffPoly::from_ratfunc(RatFunc::constant(c))
    }

    pub fn term(m: DiffMonomial, c: RatFunc) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(m, c);
        p
    }

    /// `u^{index+1}` with `order` x-derivatives; order 0 is the coefficient variable.
    pub fn u(index: usize, order: usize) -> Self {
        if order == 0 {
            DiffPoly::from_ratfunc(RatFunc::field(index))
        } else {
            DiffPoly::term(DiffMonomial::new([(Jet::new(index, order), 1)], None), RatFunc::one())
        }
    }

    pub fn p(index: usize, order: usize) -> Self {
        DiffPoly::term(DiffMonomial::odd(OddVar::p(index, order)), RatFunc::one())
    }

    pub fn r(slot: usize) -> Self {
        DiffPoly::term(DiffMonomial::odd(OddVar::r(slot)), RatFunc::one())
    }

    pub fn param(k: usize) -> Self {
        DiffPoly::from_ratfunc(RatFunc::param(k))
    }

    pub fn add_term(&mut self, m: DiffMonomial, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &RatFunc)> {
        self.terms.iter()
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coefficient(&self, m: &DiffMonomial) -> RatFunc {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// The jet-free, odd-free part as a rational function, if that is all there is.
    pub fn as_ratfunc(&self) -> Option<RatFunc> {
        match self.terms.len() {
            0 => Some(RatFunc::zero()),
            1 => self.terms.get(&DiffMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_odd_free(&self) -> bool {
        self.terms.keys().all(|m| m.odd.is_none())
    }

    /// Every term carries exactly one odd factor.
    pub fn is_odd_linear(&self) -> bool {
        self.terms.keys().all(|m| m.odd.is_some())
    }

    pub fn max_order(&self) -> u16 {
        self.terms.keys().map(DiffMonomial::max_order).max().unwrap_or(0)
    }

    pub fn has_params(&self) -> bool {
        self.terms.values().any(RatFunc::has_params)
    }

    pub fn param_arity(&self) -> usize {
        self.terms.values().map(RatFunc::param_arity).max().unwrap_or(0)
    }

    /// Largest dependent-variable index referenced (u or p), plus one.
    pub fn field_arity(&self) -> usize {
        self.terms
            .iter()
            .map(|(m, c)| {
                let e = m.even.iter().map(|f| f.0.index as usize + 1).max().unwrap_or(0);
                let o = match m.odd {
                    Some(OddVar::P { index, .. }) => index as usize + 1,
                    _ => 0,
                };
                e.max(o).max(c.field_arity())
            })
            .max()
            .unwrap_or(0)
    }

    /// Nonlocal slots referenced.
    pub fn slots(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .terms
            .keys()
            .filter_map(|m| match m.odd {
                Some(OddVar::R { slot }) => Some(slot as usize),
                _ => None,
            })
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn scale(&self, c: &RatFunc) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        let mut out = DiffPoly::zero();
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a * c);
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a.scale(c))).collect() }
    }

    /// Multiplies by a single term.
    pub fn mul_term(&self, m: &DiffMonomial, c: &RatFunc) -> Result<DiffPoly, KernelError> {
        let mut out = DiffPoly::zero();
        if c.is_zero() {
            return Ok(out);
        }
        for (k, a) in &self.terms {
            out.add_term(k.checked_mul(m)?, a * c);
        }
        Ok(out)
    }

    /// Distributed product; fails if both factors carry odd terms.
    pub fn checked_mul(&self, rhs: &DiffPoly) -> Result<DiffPoly, KernelError> {
        let mut out = DiffPoly::zero();
        for (m, c) in &rhs.terms {
            for (k, a) in &self.terms {
                out.add_term(k.checked_mul(m)?, a * c);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<DiffPoly, KernelError> {
        let mut acc = DiffPoly::one();
        for _ in 0..e {
            acc = acc.checked_mul(self)?;
        }
        Ok(acc)
    }

    /// Total x-derivative. Nonlocal `r` factors are treated as x-constants;
    /// use [`DiffPoly::total_x_with`] when their derivative is known.
    pub fn total_x(&self) -> DiffPoly {
        self.total_x_impl(&|_| None).expect("no nonlocal rule consulted")
    }

    /// Total x-derivative where `D_x r_α` is supplied by `rx`.
    pub fn total_x_with(&self, rx: &dyn Fn(usize) -> Option<DiffPoly>) -> Result<DiffPoly, KernelError> {
        self.total_x_impl(&|slot| Some(rx(slot).ok_or(KernelError::UnknownNonlocal(slot))))
    }

    fn total_x_impl(
        &self,
        rx: &dyn Fn(usize) -> Option<Result<DiffPoly, KernelError>>,
    ) -> Result<DiffPoly, KernelError> {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            // coefficient: Σ ∂c/∂u^i · u^i_x
            for i in coefficient_fields(c) {
                let dc = c.partial(i);
                if !dc.is_zero() {
                    out.add_term(m.with_jet(Jet::new(i, 1), 1), dc);
                }
            }
            for &(j, e) in &m.even {
                let next = Jet { index: j.index, order: j.order + 1 };
                let m2 = m.with_jet(j, -1).with_jet(next, 1);
                out.add_term(m2, c.scale(&Rat::from_integer(e.into())));
            }
            match m.odd {
                Some(OddVar::P { index, order }) => {
                    out.add_term(m.with_odd(Some(OddVar::P { index, order: order + 1 })), c.clone());
                }
                Some(OddVar::R { slot }) => {
                    if let Some(rule) = rx(slot as usize) {
                        let rule = rule?;
                        let prod = rule.mul_term(&m.without_odd(), c)?;
                        out = &out + &prod;
                    }
                }
                None => {}
            }
        }
        Ok(out)
    }

    /// `k`-fold total x-derivative (nonlocal factors treated as constants).
    pub fn total_x_n(&self, k: usize) -> DiffPoly {
        (0..k).fold(self.clone(), |acc, _| acc.total_x())
    }

    /// Partial derivative with respect to the jet `u^{index+1}_{order}`.
    /// Order 0 differentiates the coefficients.
    pub fn partial_u(&self, index: usize, order: usize) -> DiffPoly {
        let mut out = DiffPoly::zero();
        if order == 0 {
            for (m, c) in &self.terms {
                out.add_term(m.clone(), c.partial(index));
            }
            return out;
        }
        let j = Jet::new(index, order);
        for (m, c) in &self.terms {
            let e = m.exponent(j);
            if e > 0 {
                out.add_term(m.with_jet(j, -1), c.scale(&Rat::from_integer(e.into())));
            }
        }
        out
    }

    /// Jets `(index, order)` with order ≥ 1 that occur in the even part.
    pub fn even_jets(&self) -> Vec<Jet> {
        let mut v: Vec<Jet> = self.terms.keys().flat_map(|m| m.even.iter().map(|f| f.0)).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Field indices the coefficients depend on.
    pub fn coefficient_fields(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.values().flat_map(coefficient_fields).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Exact partition by monomial.
    pub fn collect(&self) -> BTreeMap<DiffMonomial, RatFunc> {
        self.terms.clone()
    }

    /// Applies a coefficient-wise map, dropping terms that become zero.
    pub fn try_map_coefficients(
        &self,
        f: &dyn Fn(&RatFunc) -> Result<RatFunc, KernelError>,
    ) -> Result<DiffPoly, KernelError> {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Substitutes polynomial values for variables inside every coefficient.
    pub fn substitute(&self, subst: &dyn Fn(Var) -> Option<Poly>) -> Result<DiffPoly, KernelError> {
        self.try_map_coefficients(&|c| c.substitute(subst))
    }

    /// Splits `self` by odd factor: the even cofactor of each odd variable.
    pub fn odd_components(&self) -> BTreeMap<Option<OddVar>, DiffPoly> {
        let mut out: BTreeMap<Option<OddVar>, DiffPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.odd).or_default().add_term(m.without_odd(), c.clone());
        }
        out
    }
}

fn coefficient_fields(c: &RatFunc) -> Vec<usize> {
    let mut v: Vec<usize> = c
        .num()
        .vars()
        .into_iter()
        .chain(c.den().vars())
        .filter_map(|v| match v {
            Var::Field(i) => Some(i as usize),
            Var::Param(_) => None,
        })
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl From<RatFunc> for DiffPoly {
    fn from(c: RatFunc) -> Self {
        DiffPoly::from_ratfunc(c)
    }
}

impl std::ops::Add for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl std::ops::Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl std::ops::AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl std::ops::SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c);
        }
    }
}

impl std::iter::Sum for DiffPoly {
    fn sum<I: Iterator<Item = DiffPoly>>(iter: I) -> DiffPoly {
        iter.fold(DiffPoly::zero(), |mut a, b| {
            a += &b;
            a
        })
    }
}

/// Formats a coefficient as a factor in a product.
fn coefficient_factor(c: &RatFunc) -> (bool, String) {
    if let Some(k) = c.as_constant() {
        return (k.is_negative(), fmt_rat(&k.abs()));
    }
    if c.is_polynomial() && c.num().is_monomial() {
        let lc = c.num().leading_coefficient();
        let s = c.num().scale(&lc.signum()).to_string();
        return (lc.is_negative(), s);
    }
    (false, format!("({c})"))
}

impl fmt::Display for DiffPoly {
    /// Prints terms in increasing monomial order; re-parses to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, coef) = coefficient_factor(c);
            let sign = match (i, neg) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            f.write_str(sign)?;
            let unit = coef == "1";
            if m.degree() == 0 {
                f.write_str(&coef)?;
            } else if unit {
                write!(f, "{m}")?;
            } else {
                write!(f, "{coef}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: usize, k: usize) -> DiffPoly {
        DiffPoly::u(i, k)
    }

    fn mul(a: &DiffPoly, b: &DiffPoly) -> DiffPoly {
        a.checked_mul(b).unwrap()
    }

    #[test]
    fn product_examples() {
        assert_eq!(mul(&u(0, 1), &DiffPoly::p(0, 0)).to_string(), "u1_x*p1");
        let lhs = mul(&(&u(0, 0) + &u(0, 1)), &u(0, 1));
        assert_eq!(lhs, &mul(&u(0, 0), &u(0, 1)) + &mul(&u(0, 1), &u(0, 1)));
        assert!(matches!(
            DiffPoly::p(0, 0).checked_mul(&DiffPoly::p(1, 0)),
            Err(KernelError::OddDegreeOverflow)
        ));
    }

    #[test]
    fn total_x_examples() {
        assert_eq!(u(0, 0).total_x(), u(0, 1));
        let a = mul(&u(0, 0), &u(0, 1));
        assert_eq!(a.total_x(), &mul(&u(0, 1), &u(0, 1)) + &mul(&u(0, 0), &u(0, 2)));
        let g = mul(&u(0, 0), &u(0, 0));
        let b = mul(&g, &DiffPoly::p(0, 0));
        let expect = &mul(&mul(&u(0, 0), &u(0, 1)), &DiffPoly::p(0, 0)).scale_rat(&Rat::from_integer(2.into()))
            + &mul(&g, &DiffPoly::p(0, 1));
        assert_eq!(b.total_x(), expect);
    }

    #[test]
    fn total_x_with_rewrites_r() {
        let a = mul(&u(0, 1), &DiffPoly::r(0));
        let rule = mul(&u(0, 1), &DiffPoly::p(0, 0));
        let d = a.total_x_with(&|_| Some(rule.clone())).unwrap();
        let expect = &mul(&u(0, 2), &DiffPoly::r(0)) + &mul(&mul(&u(0, 1), &u(0, 1)), &DiffPoly::p(0, 0));
        assert_eq!(d, expect);
        assert!(matches!(a.total_x_with(&|_| None), Err(KernelError::UnknownNonlocal(0))));
    }

    #[test]
    fn collect_examples() {
        let a = &mul(&u(0, 1), &DiffPoly::p(0, 0)) + &mul(&u(0, 0), &DiffPoly::p(0, 1));
        let c = a.collect();
        assert_eq!(c.len(), 2);
        assert_eq!(c[&DiffMonomial::new([(Jet::new(0, 1), 1)], Some(OddVar::p(0, 0)))], RatFunc::one());
        assert_eq!(c[&DiffMonomial::odd(OddVar::p(0, 1))], RatFunc::field(0));
        assert!(DiffPoly::zero().collect().is_empty());
    }

    #[test]
    fn jet_names() {
        assert_eq!(u(0, 3).to_string(), "u1_x3");
        assert_eq!(u(1, 2).to_string(), "u2_xx");
        assert_eq!(DiffPoly::p(2, 4).to_string(), "p3_x4");
        assert_eq!(DiffPoly::r(0).to_string(), "r1");
    }

    #[test]
    fn weight_counts_derivatives() {
        let m = DiffMonomial::new([(Jet::new(0, 1), 2), (Jet::new(1, 3), 1)], Some(OddVar::p(0, 2)));
        assert_eq!(m.weight(), 7);
        assert_eq!(m.max_order(), 3);
    }
}
