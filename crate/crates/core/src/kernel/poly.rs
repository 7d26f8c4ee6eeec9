//! Sparse multivariate polynomials over ℚ.
//!
//! Variables are field variables `u1..un` and formal parameters `c1..cm`.
//! Terms are kept in a `BTreeMap` keyed by monomials in graded lexicographic
//! order, so two equal polynomials always have identical internal layout.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::Rat;

/// A polynomial variable.
///
/// Field variables sort before parameters, lower indices before higher ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Field variable `u^{i+1}` (0-based index).
    Field(u16),
    /// Formal parameter `c_{k+1}` (0-based index).
    Param(u16),
}

impl Var {
    pub fn is_param(self) -> bool {
        matches!(self, Var::Param(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Field(i) => write!(f, "u{}", i + 1),
            Var::Param(k) => write!(f, "c{}", k + 1),
        }
    }
}

/// Power product of variables, stored as `(var, exponent)` pairs sorted by var.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: Var, e: u32) -> Self {
        let mut m = SmallVec::new();
        if e > 0 {
            m.push((v, e));
        }
        Monomial(m)
    }

    /// Builds a monomial from unsorted, possibly repeated factors.
    pub fn from_factors(factors: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut v: SmallVec<[(Var, u32); 4]> = factors.into_iter().filter(|f| f.1 > 0).collect();
        v.sort_by_key(|f| f.0);
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::new();
        for (var, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == var => last.1 += e,
                _ => out.push((var, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|f| f.1).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0.iter().find(|f| f.0 == v).map_or(0, |f| f.1)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|f| f.0)
    }

    pub fn has_param(&self) -> bool {
        self.0.iter().any(|f| f.0.is_param())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::new();
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let oe = other.0[j].1;
                j += 1;
                match e.cmp(&oe) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - oe)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes all factors of `v`, returning the stripped monomial and the exponent.
    pub fn split_var(&self, v: Var) -> (Monomial, u32) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|f| {
                if f.0 == v {
                    e = f.1;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (Monomial(rest), e)
    }

    /// Splits into the field-variable part and the parameter part.
    pub fn split_params(&self) -> (Monomial, Monomial) {
        let (p, u): (SmallVec<_>, SmallVec<_>) = self.0.iter().copied().partition(|f| f.0.is_param());
        (Monomial(u), Monomial(p))
    }

    fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|&(v, e)| {
                    let oe = other.exponent(v);
                    (oe > 0).then_some((v, e.min(oe)))
                })
                .collect(),
        )
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order with `u1 > u2 > … > c1 > …`.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        for (x, y) in a.iter().zip(b.iter()) {
            if x.0 != y.0 {
                // The monomial containing the earlier variable has the larger exponent there.
                return if x.0 < y.0 { Ordering::Greater } else { Ordering::Less };
            }
            if x.1 != y.1 {
                return x.1.cmp(&y.1);
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(Rat::from_integer(c.into()))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Monomial::var(v), Rat::one())
    }

    pub fn field(i: usize) -> Self {
        Poly::var(Var::Field(i as u16))
    }

    pub fn param(k: usize) -> Self {
        Poly::var(Var::Param(k as u16))
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rat)> {
        self.terms.into_iter()
    }

    /// Leading term in graded lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn has_params(&self) -> bool {
        self.terms.keys().any(Monomial::has_param)
    }

    /// Degree in the parameters (max over terms).
    pub fn param_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.factors().iter().filter(|f| f.0.is_param()).map(|f| f.1).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.terms.keys().flat_map(|m| m.vars()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to `v`.
    pub fn partial(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let (rest, e) = m.split_var(v);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul(&Monomial::var_pow(v, e - 1));
            out.add_term(m2, c * Rat::from_integer(e.into()));
        }
        out
    }

    /// Coefficients with respect to `v`: entry `k` is the coefficient of `v^k`.
    pub fn coefficients_in(&self, v: Var) -> Vec<Poly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(); d + 1];
        for (m, c) in &self.terms {
            let (rest, e) = m.split_var(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    /// Substitutes polynomial values for some variables.
    pub fn substitute(&self, subst: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::one();
            let mut kept = Monomial::one();
            for &(v, e) in m.factors() {
                match subst(v) {
                    Some(p) => acc = &acc * &p.pow(e),
                    None => kept = kept.mul(&Monomial::var_pow(v, e)),
                }
            }
            out = &out + &acc.mul_monomial(&kept, c);
        }
        out
    }

    /// Evaluates at a point; `None` if some variable is unassigned.
    pub fn eval(&self, point: &dyn Fn(Var) -> Option<Rat>) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.factors() {
                let x = point(v)?;
                t *= num_traits::pow(x, e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Makes the leading coefficient 1 (zero stays zero).
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    pub fn leading_coefficient(&self) -> Rat {
        self.leading().map_or_else(Rat::zero, |(_, c)| c.clone())
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((rm, rc)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let tm = rm.div(&dm)?;
            let tc = rc / &dc;
            r = &r - &d.mul_monomial(&tm, &tc);
            q.add_term(tm, tc);
        }
        Some(q)
    }

    fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |acc, m| acc.gcd(m))
    }

    /// Greatest common divisor, normalized to leading coefficient 1.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self.is_monomial() || other.is_monomial() {
            let g = self.monomial_content().gcd(&other.monomial_content());
            return Poly::term(g, Rat::one());
        }
        if self == other {
            return self.monic();
        }
        // Strip common monomial factors first; they are cheap to handle.
        let ma = self.monomial_content();
        let mb = other.monomial_content();
        let mg = ma.gcd(&mb);
        let a = self.div_exact(&Poly::term(ma, Rat::one())).expect("monomial content divides");
        let b = other.div_exact(&Poly::term(mb, Rat::one())).expect("monomial content divides");
        let g = gcd_rec(&a, &b);
        g.mul_monomial(&mg, &Rat::one()).monic()
    }
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.len() <= b.len() {
        if b.div_exact(a).is_some() {
            return a.monic();
        }
    } else if a.div_exact(b).is_some() {
        return b.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    // A variable absent from one side only contributes through the content.
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd_rec(&content_in(a, v), b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd_rec(a, &content_in(b, v));
    }
    let v = *va.iter().max_by_key(|&&v| a.degree_in(v) + b.degree_in(v)).expect("non-constant");
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let g_content = gcd_rec(&ca, &cb);
    let mut r0 = a.div_exact(&ca).expect("content divides");
    let mut r1 = b.div_exact(&cb).expect("content divides");
    if r0.degree_in(v) < r1.degree_in(v) {
        std::mem::swap(&mut r0, &mut r1);
    }
    loop {
        let r = prem(&r0, &r1, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            r1 = Poly::one();
            break;
        }
        r0 = r1;
        r1 = primitive_part(&r, v);
    }
    (&g_content * &primitive_part(&r1, v)).monic()
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: Var) -> Poly {
    let coeffs = p.coefficients_in(v);
    let mut g = Poly::zero();
    for c in coeffs.iter().filter(|c| !c.is_zero()) {
        g = gcd_rec(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive_part(p: &Poly, v: Var) -> Poly {
    if p.is_constant() {
        return Poly::one();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").monic()
}

/// Pseudo-remainder of `a` by `b` with respect to `v`.
fn prem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let n = b.degree_in(v);
    let bc = b.coefficients_in(v);
    let lb = bc[n as usize].clone();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= n {
        let d = r.degree_in(v);
        let lr = r.coefficients_in(v)[d as usize].clone();
        let shift = Poly::term(Monomial::var_pow(v, d - n), Rat::one());
        r = &(&lb * &r) - &(&(&lr * &shift) * b);
    }
    r
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

/// Writes a rational so that it re-parses under the expression grammar.
pub(crate) fn fmt_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn fmt_monomial(m: &Monomial) -> String {
    m.factors()
        .iter()
        .map(|&(v, e)| if e == 1 { v.to_string() } else { format!("{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for Poly {
    /// Highest term first; the output re-parses to the same polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{}", fmt_rat(&a))?;
            } else if a.is_one() {
                write!(f, "{}", fmt_monomial(m))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&a), fmt_monomial(m))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: usize) -> Poly {
        Poly::field(i)
    }

    #[test]
    fn graded_lex_puts_higher_degree_last() {
        let a = Monomial::var_pow(Var::Field(1), 2);
        let b = Monomial::var(Var::Field(0));
        assert!(a > b);
        let c = Monomial::var(Var::Field(1));
        assert!(b > c);
        assert!(Monomial::var(Var::Field(3)) > Monomial::var(Var::Param(0)));
    }

    #[test]
    fn exact_division_and_failure() {
        let a = &(&u(0) * &u(0)) - &(&u(1) * &u(1));
        let b = &u(0) - &u(1);
        assert_eq!(a.div_exact(&b).unwrap(), &u(0) + &u(1));
        assert!(a.div_exact(&(&u(0) + &Poly::int(3))).is_none());
    }

    #[test]
    fn gcd_of_products() {
        let f = &(&u(0) + &u(1)) * &(&u(0) - &Poly::int(2));
        let g = &(&u(0) + &u(1)) * &(&(&u(1) * &u(2)) + &Poly::int(1));
        assert_eq!(f.gcd(&g), &u(0) + &u(1));
        let h = &(&u(0) * &u(0)) + &Poly::int(1);
        assert!(f.gcd(&h).is_one());
    }

    #[test]
    fn gcd_with_monomial_content() {
        let f = &(&u(0) * &u(1)) * &(&u(0) + &Poly::int(1));
        let g = &(&u(0) * &u(0)) * &(&u(0) + &Poly::int(1));
        let expect = &u(0) * &(&u(0) + &Poly::int(1));
        assert_eq!(f.gcd(&g), expect.monic());
    }

    #[test]
    fn partial_and_coefficients() {
        let p = &(&u(0) * &u(0)) * &u(1);
        assert_eq!(p.partial(Var::Field(0)), (&u(0) * &u(1)).scale(&Rat::from_integer(2.into())));
        let cs = p.coefficients_in(Var::Field(0));
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2], u(1));
    }

    #[test]
    fn display_round_trip_shape() {
        let p = &(&u(0).scale(&Rat::new(2.into(), 3.into())) - &Poly::param(0)) + &Poly::int(-1);
        assert_eq!(p.to_string(), "2/3*u1 - c1 - 1");
    }
}
