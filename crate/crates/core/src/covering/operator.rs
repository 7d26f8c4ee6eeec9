//! Local matrix differential operators and their odd-variable form.

use std::collections::BTreeMap;

use num_integer::binomial;

use crate::kernel::{DiffPoly, Rat};

use super::{CoveringContext, CoveringError};

/// An operator written as an odd-linear vector `A(p)`, possibly with `r` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivectorForm {
    pub components: Vec<DiffPoly>,
}

impl BivectorForm {
    pub fn new(components: Vec<DiffPoly>) -> Result<Self, CoveringError> {
        for (i, c) in components.iter().enumerate() {
            if !c.is_odd_linear() {
                return Err(CoveringError::NotOddLinear(i));
            }
        }
        Ok(BivectorForm { components })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }
}

impl std::ops::Add for &BivectorForm {
    type Output = BivectorForm;
    fn add(self, rhs: &BivectorForm) -> BivectorForm {
        let components = self.components.iter().zip(&rhs.components).map(|(a, b)| a + b).collect();
        BivectorForm { components }
    }
}

/// `A^{ij} = Σ_k a^{ij}_k ∂_x^k` with odd-free coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalOperator {
    entries: Vec<Vec<BTreeMap<usize, DiffPoly>>>,
}

impl LocalOperator {
    pub fn zero(n: usize) -> Self {
        LocalOperator { entries: vec![vec![BTreeMap::new(); n]; n] }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    /// Adds `a ∂_x^k` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, k: usize, a: DiffPoly) -> Result<(), CoveringError> {
        if !a.is_odd_free() {
            return Err(CoveringError::OddCharacteristic);
        }
        let slot = self.entries[i][j].entry(k).or_default();
        *slot += &a;
        if slot.is_zero() {
            self.entries[i][j].remove(&k);
        }
        Ok(())
    }

    pub fn entry(&self, i: usize, j: usize) -> &BTreeMap<usize, DiffPoly> {
        &self.entries[i][j]
    }

    pub fn order(&self) -> usize {
        self.entries.iter().flatten().filter_map(|e| e.keys().next_back().copied()).max().unwrap_or(0)
    }

    /// `(A v)^i = Σ_j Σ_k a^{ij}_k D_x^k v_j`.
    pub fn apply(&self, v: &[DiffPoly]) -> Result<Vec<DiffPoly>, CoveringError> {
        let n = self.n();
        if v.len() != n {
            return Err(CoveringError::DimensionMismatch(format!("expected {n} components, got {}", v.len())));
        }
        let top = self.order();
        let jets: Vec<Vec<DiffPoly>> = v
            .iter()
            .map(|x| {
                let mut ds = vec![x.clone()];
                for k in 1..=top {
                    ds.push(ds[k - 1].total_x());
                }
                ds
            })
            .collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = DiffPoly::zero();
            for j in 0..n {
                for (k, a) in &self.entries[i][j] {
                    acc += &a.checked_mul(&jets[j][*k])?;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Formal adjoint: `(a ∂^k)^* = (-1)^k Σ_l C(k,l) D^{k-l}(a) ∂^l`, transposed.
    pub fn formal_adjoint(&self) -> LocalOperator {
        let n = self.n();
        let mut out = LocalOperator::zero(n);
        for i in 0..n {
            for j in 0..n {
                for (k, a) in &self.entries[j][i] {
                    let mut d = a.clone();
                    let mut derivs = vec![d.clone()];
                    for _ in 0..*k {
                        d = d.total_x();
                        derivs.push(d.clone());
                    }
                    for l in 0..=*k {
                        let mut c = Rat::from_integer(binomial(*k as i64, l as i64).into());
                        if k % 2 == 1 {
                            c = -c;
                        }
                        out.add(i, j, l, derivs[k - l].scale_rat(&c)).expect("odd-free");
                    }
                }
            }
        }
        out
    }

    pub fn is_skew(&self) -> bool {
        let adj = self.formal_adjoint();
        let n = self.n();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let a = &self.entries[i][j];
                let b = &adj.entries[i][j];
                let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
                keys.into_iter().all(|k| {
                    let x = a.get(k).cloned().unwrap_or_default();
                    let y = b.get(k).cloned().unwrap_or_default();
                    (&x + &y).is_zero()
                })
            })
        })
    }
}

/// Odd-variable form `A(p)^i = Σ_j A^{ij}(p_j) + Σ_α w_α φ^i_α r_α`,
/// where `φ_α` is the characteristic registered in slot `α`.
pub fn operator_to_bivector(
    op: &LocalOperator,
    tail: &[(Rat, usize)],
    ctx: &CoveringContext,
) -> Result<BivectorForm, CoveringError> {
    let n = op.n();
    let p: Vec<DiffPoly> = (0..n).map(|j| DiffPoly::p(j, 0)).collect();
    let mut comps = op.apply(&p)?;
    for (w, alpha) in tail {
        let slot = ctx.slots().get(*alpha).ok_or(crate::kernel::KernelError::UnknownNonlocal(*alpha))?;
        for (i, c) in comps.iter_mut().enumerate() {
            *c += &slot.phi[i].checked_mul(&DiffPoly::r(*alpha))?.scale_rat(w);
        }
    }
    BivectorForm::new(comps)
}
