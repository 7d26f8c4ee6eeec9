//! Exact solving of equations that are affine in the parameters `c_k`.
//!
//! Each equation `E(u; c) = 0` is cleared of its (parameter-free) denominator
//! and expanded over the field monomials; every field monomial gives one
//! scalar affine equation over ℚ. Rows are reduced incrementally to reduced
//! row-echelon form with the smallest parameter index as pivot, so the result
//! does not depend on the order of the input equations.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::poly::{Monomial, Poly, Var};
use super::ratfunc::RatFunc;
use super::{KernelError, Rat};

/// Affine form `Σ coeffs[k]·c_k + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffineForm {
    pub coeffs: BTreeMap<usize, Rat>,
    pub constant: Rat,
}

impl AffineForm {
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    fn add_scaled(&mut self, other: &AffineForm, s: &Rat) {
        for (k, v) in &other.coeffs {
            let e = self.coeffs.entry(*k).or_insert_with(Rat::zero);
            *e += v * s;
            if e.is_zero() {
                self.coeffs.remove(k);
            }
        }
        self.constant += &other.constant * s;
    }

    fn scale(&mut self, s: &Rat) {
        for v in self.coeffs.values_mut() {
            *v *= s;
        }
        self.constant *= s;
    }

    /// As a polynomial in the parameters.
    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::constant(self.constant.clone());
        for (k, v) in &self.coeffs {
            p.add_term(Monomial::var(Var::Param(*k as u16)), v.clone());
        }
        p
    }
}

/// Outcome of [`linear_solve`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearSystemSolution {
    /// `c_p = Σ a_f c_f + b` over free parameters `c_f`.
    pub pivots: BTreeMap<usize, AffineForm>,
    pub free: Vec<usize>,
    pub inconsistent: bool,
}

impl LinearSystemSolution {
    pub fn dimension(&self) -> usize {
        if self.inconsistent {
            0
        } else {
            self.free.len()
        }
    }

    /// Value of parameter `k` as an affine polynomial in the free parameters.
    pub fn value(&self, k: usize) -> Poly {
        match self.pivots.get(&k) {
            Some(a) => a.to_poly(),
            None => Poly::param(k),
        }
    }

    /// Substitution map for use with `substitute` on polynomials and rational functions.
    pub fn substitution(&self) -> impl Fn(Var) -> Option<Poly> + '_ {
        move |v| match v {
            Var::Param(k) => self.pivots.get(&(k as usize)).map(AffineForm::to_poly),
            Var::Field(_) => None,
        }
    }

    /// Concrete parameter values for one free parameter set to 1, all others 0.
    /// Only the homogeneous part is used, so these span the solution directions.
    pub fn basis(&self) -> Vec<BTreeMap<usize, Rat>> {
        if self.inconsistent {
            return Vec::new();
        }
        self.free
            .iter()
            .map(|&f| {
                let mut vals = BTreeMap::new();
                vals.insert(f, Rat::one());
                for (p, a) in &self.pivots {
                    if let Some(v) = a.coeffs.get(&f) {
                        vals.insert(*p, v.clone());
                    }
                }
                vals
            })
            .collect()
    }

    /// Parameter values with every free parameter set to zero.
    pub fn particular(&self) -> BTreeMap<usize, Rat> {
        self.pivots
            .iter()
            .filter(|(_, a)| !a.constant.is_zero())
            .map(|(p, a)| (*p, a.constant.clone()))
            .collect()
    }
}

/// Incremental reduced row-echelon form.
#[derive(Default)]
struct Reducer {
    rows: BTreeMap<usize, AffineForm>,
    inconsistent: bool,
}

impl Reducer {
    fn insert(&mut self, mut row: AffineForm) {
        for (p, r) in &self.rows {
            if let Some(v) = row.coeffs.get(p).cloned() {
                row.add_scaled(r, &-v);
            }
        }
        let Some((&pivot, lead)) = row.coeffs.iter().next() else {
            if !row.constant.is_zero() {
                self.inconsistent = true;
            }
            return;
        };
        let inv = lead.recip();
        row.scale(&inv);
        for r in self.rows.values_mut() {
            if let Some(v) = r.coeffs.get(&pivot).cloned() {
                r.add_scaled(&row, &-v);
            }
        }
        self.rows.insert(pivot, row);
    }
}

/// Splits a cleared numerator into scalar affine rows, one per field monomial.
fn rows_of(eq: &RatFunc) -> Result<Vec<AffineForm>, KernelError> {
    let mut rows: BTreeMap<Monomial, AffineForm> = BTreeMap::new();
    for (m, c) in eq.num().terms() {
        let (field, params) = m.split_params();
        let row = rows.entry(field).or_default();
        match params.factors() {
            [] => row.constant += c,
            [(Var::Param(k), 1)] => {
                let e = row.coeffs.entry(*k as usize).or_insert_with(Rat::zero);
                *e += c;
            }
            _ => return Err(KernelError::NonlinearAnsatz),
        }
    }
    Ok(rows
        .into_values()
        .map(|mut r| {
            r.coeffs.retain(|_, v| !v.is_zero());
            r
        })
        .filter(|r| !r.is_zero())
        .collect())
}

/// Solves `eqs = 0`; free parameters are those that occur and are not pivots.
pub fn linear_solve(eqs: &[RatFunc]) -> Result<LinearSystemSolution, KernelError> {
    let n = eqs.iter().map(RatFunc::param_arity).max().unwrap_or(0);
    let mut present = vec![false; n];
    for e in eqs {
        for v in e.num().vars() {
            if let Var::Param(k) = v {
                present[k as usize] = true;
            }
        }
    }
    let params: Vec<usize> = (0..n).filter(|&k| present[k]).collect();
    linear_solve_with(eqs, &params)
}

/// Solves `eqs = 0` over the parameters `params`; any listed parameter that is
/// not a pivot is free, including ones absent from every equation.
pub fn linear_solve_with(eqs: &[RatFunc], params: &[usize]) -> Result<LinearSystemSolution, KernelError> {
    let mut red = Reducer::default();
    for e in eqs {
        for row in rows_of(e)? {
            red.insert(row);
        }
    }
    if red.inconsistent {
        return Ok(LinearSystemSolution { inconsistent: true, ..Default::default() });
    }
    let mut free: Vec<usize> = params.iter().copied().filter(|k| !red.rows.contains_key(k)).collect();
    free.sort_unstable();
    free.dedup();
    for r in red.rows.values_mut() {
        r.constant = -r.constant.clone();
        let pivot = *r.coeffs.keys().next().expect("pivot present");
        r.coeffs.remove(&pivot);
        for v in r.coeffs.values_mut() {
            *v = -v.clone();
        }
    }
    Ok(LinearSystemSolution { pivots: red.rows, free, inconsistent: red.inconsistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rat;

    fn c(k: usize) -> RatFunc {
        RatFunc::param(k)
    }

    fn u(i: usize) -> RatFunc {
        RatFunc::field(i)
    }

    #[test]
    fn both_pivots() {
        let s = linear_solve(&[&c(0) + &c(1), &c(0) - &c(1)]).unwrap();
        assert!(!s.inconsistent);
        assert!(s.free.is_empty());
        assert_eq!(s.value(0), Poly::zero());
        assert_eq!(s.value(1), Poly::zero());
    }

    #[test]
    fn monomial_expansion() {
        let s = linear_solve(&[&(&c(0) * &u(0)) + &(&c(1) * &u(0))]).unwrap();
        assert_eq!(s.free, vec![1]);
        assert_eq!(s.value(0), Poly::param(1).scale(&rat(-1, 1)));
    }

    #[test]
    fn absolute_term_is_inconsistent() {
        let s = linear_solve(&[&(&c(0) * &u(0)) - &RatFunc::one()]).unwrap();
        assert!(s.inconsistent);
        assert_eq!(s.dimension(), 0);
    }

    #[test]
    fn nonlinear_rejected() {
        assert_eq!(linear_solve(&[&c(0) * &c(1)]), Err(KernelError::NonlinearAnsatz));
    }

    #[test]
    fn denominators_are_cleared() {
        let e = (&c(0) * &u(0)).checked_div(&u(1)).unwrap();
        let s = linear_solve(&[&e - &c(1)]).unwrap();
        assert_eq!(s.pivots.len(), 2);
    }

    #[test]
    fn unused_params_stay_free() {
        let s = linear_solve_with(&[c(0)], &[0, 1, 2]).unwrap();
        assert_eq!(s.free, vec![1, 2]);
        assert_eq!(s.basis().len(), 2);
    }

    #[test]
    fn order_independent() {
        let eqs = vec![
            &(&c(0) * &u(0)) + &(&c(2) * &u(0)),
            &(&c(1) + &c(2)) - &RatFunc::int(3),
            &(&(&c(0) - &c(1)) * &u(1)) + &(&c(3) * &u(1)),
        ];
        let a = linear_solve(&eqs).unwrap();
        assert_eq!(a.free, vec![2]);
        let mut rev = eqs.clone();
        rev.reverse();
        assert_eq!(a, linear_solve(&rev).unwrap());
    }
}
