//! Linearization, the cotangent covering and bivector residuals.
//!
//! A covering context holds the rewrite rules for `u_t`, `p_t` and for any
//! nonlocal variables `r_α` introduced from symmetries. All t-derivatives are
//! eliminated innermost-first, so every result is a pure x-jet normal form.

mod operator;
mod system;

use std::collections::HashMap;
use std::sync::Mutex;

use crate::kernel::{DiffMonomial, DiffPoly, KernelError, OddVar, RatFunc, Rat};

pub use operator::{operator_to_bivector, BivectorForm, LocalOperator};
pub use system::{EvolutionSystem, SystemKind};

/// Default bound on jet orders produced during reductions.
pub const DEFAULT_JET_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoveringError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("system right-hand sides may not contain odd variables")]
    OddInSystem,
    #[error("characteristic must not contain odd variables")]
    OddCharacteristic,
    #[error("component {0} is not linear in the odd variables")]
    NotOddLinear(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a symmetry: linearization leaves a nonzero residual")]
    NotASymmetry { residual: Vec<DiffPoly> },
    #[error("conservation law check failed for the new nonlocal variable")]
    InconsistentNonlocal,
}

/// A nonlocal odd variable `r_α` with `D_x r = rx_rule`, `D_t r = rt_rule`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonlocalSlot {
    pub phi: Vec<DiffPoly>,
    pub rx_rule: DiffPoly,
    pub rt_rule: DiffPoly,
}

/// The cotangent covering of an evolutionary system.
#[derive(Debug)]
pub struct CoveringContext {
    system: EvolutionSystem,
    symbol: Vec<Vec<Vec<(usize, DiffPoly)>>>,
    pt_rules: Vec<DiffPoly>,
    slots: Vec<NonlocalSlot>,
    jet_cap: usize,
    // D_x^k of u-rules and p-rules, keyed by (kind, index, k)
    cache: Mutex<HashMap<(bool, usize, usize), DiffPoly>>,
}

impl Clone for CoveringContext {
    fn clone(&self) -> Self {
        CoveringContext {
            system: self.system.clone(),
            symbol: self.symbol.clone(),
            pt_rules: self.pt_rules.clone(),
            slots: self.slots.clone(),
            jet_cap: self.jet_cap,
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

/// Builds the cotangent covering: `p_{i,t} = -Σ_{j,σ} (-D_x)^σ(∂f^j/∂u^i_σ · p_j)`.
pub fn build_cotangent(system: &EvolutionSystem) -> CoveringContext {
    CoveringContext::new(system.clone())
}

/// Linearization of a system along an odd-free characteristic.
pub fn linearize(system: &EvolutionSystem, phi: &[DiffPoly]) -> Result<Vec<DiffPoly>, CoveringError> {
    if phi.iter().any(|p| !p.is_odd_free()) {
        return Err(CoveringError::OddCharacteristic);
    }
    CoveringContext::new(system.clone()).linearize(phi)
}

impl CoveringContext {
    pub fn new(system: EvolutionSystem) -> Self {
        let symbol = system.symbol();
        let n = system.n();
        let mut pt_rules = vec![DiffPoly::zero(); n];
        for (j, row) in symbol.iter().enumerate() {
            for (i, entries) in row.iter().enumerate() {
                for (sigma, a) in entries {
                    // -(-D)^σ (a p_j)
                    let mut t = a.checked_mul(&DiffPoly::p(j, 0)).expect("odd-free symbol");
                    t = t.total_x_n(*sigma);
                    if sigma % 2 == 0 {
                        pt_rules[i] -= &t;
                    } else {
                        pt_rules[i] += &t;
                    }
                }
            }
        }
        CoveringContext {
            system,
            symbol,
            pt_rules,
            slots: Vec::new(),
            jet_cap: DEFAULT_JET_CAP,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_jet_cap(mut self, cap: usize) -> Self {
        self.jet_cap = cap;
        self
    }

    pub fn jet_cap(&self) -> usize {
        self.jet_cap
    }

    pub fn system(&self) -> &EvolutionSystem {
        &self.system
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    /// Right-hand sides of `p_{i,t}`.
    pub fn pt_rules(&self) -> &[DiffPoly] {
        &self.pt_rules
    }

    pub fn slots(&self) -> &[NonlocalSlot] {
        &self.slots
    }

    fn capped(&self, a: DiffPoly) -> Result<DiffPoly, CoveringError> {
        let order = a.max_order() as usize;
        if order > self.jet_cap {
            return Err(KernelError::JetCapExceeded { order, cap: self.jet_cap }.into());
        }
        Ok(a)
    }

    /// Total x-derivative on the covering (`D_x r_α` rewritten to its rule).
    pub fn total_x(&self, a: &DiffPoly) -> Result<DiffPoly, CoveringError> {
        let d = a.total_x_with(&|s| self.slots.get(s).map(|sl| sl.rx_rule.clone()))?;
        self.capped(d)
    }

    pub fn total_x_n(&self, a: &DiffPoly, k: usize) -> Result<DiffPoly, CoveringError> {
        let mut acc = a.clone();
        for _ in 0..k {
            acc = self.total_x(&acc)?;
        }
        Ok(acc)
    }

    /// `D_x^k` of the u-rule (`kind = false`) or p-rule (`kind = true`) for index `i`.
    fn rule(&self, p_rule: bool, i: usize, k: usize) -> Result<DiffPoly, CoveringError> {
        let key = (p_rule, i, k);
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = if k == 0 {
            if p_rule {
                self.pt_rules[i].clone()
            } else {
                self.system.fluxes()[i].clone()
            }
        } else {
            self.total_x(&self.rule(p_rule, i, k - 1)?)?
        };
        let v = self.capped(v)?;
        self.cache.lock().expect("cache lock").insert(key, v.clone());
        Ok(v)
    }

    /// `D_t u^i_s` in x-jets.
    fn ut(&self, i: usize, s: usize) -> Result<DiffPoly, CoveringError> {
        self.rule(false, i, s + self.system.jet_offset())
    }

    /// Total t-derivative on the covering.
    pub fn total_t(&self, a: &DiffPoly) -> Result<DiffPoly, CoveringError> {
        let mut out = DiffPoly::zero();
        let n = self.n();
        for (m, c) in a.terms() {
            let cofactor = DiffPoly::term(m.clone(), RatFunc::one());
            for i in 0..n {
                let dc = c.partial(i);
                if dc.is_zero() {
                    continue;
                }
                let d = self.ut(i, 0)?.checked_mul(&cofactor)?;
                out += &d.scale(&dc);
            }
            for &(j, e) in m.even() {
                let rest = m.with_jet(j, -1);
                let d = self.ut(j.index as usize, j.order as usize)?;
                out += &d.mul_term(&rest, &c.scale(&Rat::from_integer(e.into())))?;
            }
            match m.odd_factor() {
                Some(OddVar::P { index, order }) => {
                    let d = self.rule(true, index as usize, order as usize)?;
                    out += &d.mul_term(&m.without_odd(), c)?;
                }
                Some(OddVar::R { slot }) => {
                    let s = self.slots.get(slot as usize).ok_or(KernelError::UnknownNonlocal(slot as usize))?;
                    out += &s.rt_rule.mul_term(&m.without_odd(), c)?;
                }
                None => {}
            }
        }
        self.capped(out)
    }

    /// `ℓ_F(φ)^i = D_t φ^i - Σ_{j,σ} ∂f^i/∂u^j_σ · D_x^σ φ^j`.
    pub fn linearize(&self, phi: &[DiffPoly]) -> Result<Vec<DiffPoly>, CoveringError> {
        let n = self.n();
        if phi.len() != n {
            return Err(CoveringError::DimensionMismatch(format!("expected {n} components, got {}", phi.len())));
        }
        let mut top = 0;
        for row in &self.symbol {
            for entries in row {
                for (sigma, _) in entries {
                    top = top.max(*sigma);
                }
            }
        }
        let mut jets: Vec<Vec<DiffPoly>> = Vec::with_capacity(n);
        for p in phi {
            let mut ds = vec![p.clone()];
            for k in 1..=top {
                ds.push(self.total_x(&ds[k - 1])?);
            }
            jets.push(ds);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut r = self.total_t(&phi[i])?;
            for (j, entries) in self.symbol[i].iter().enumerate() {
                for (sigma, a) in entries {
                    r -= &a.checked_mul(&jets[j][*sigma])?;
                }
            }
            out.push(r);
        }
        Ok(out)
    }

    /// Residual `ℓ_F(A(p))`; zero exactly when `A` is a variational bivector.
    pub fn bivector_residual(&self, a: &BivectorForm) -> Result<Vec<DiffPoly>, CoveringError> {
        for (i, c) in a.components.iter().enumerate() {
            if !c.is_odd_linear() {
                return Err(CoveringError::NotOddLinear(i));
            }
        }
        self.linearize(&a.components)
    }

    /// Adds a nonlocal variable `r` with `r_x = φ^i p_i` for a symmetry `φ`.
    /// Returns the new slot index, or the linearization residual on rejection.
    pub fn register_symmetry(&mut self, phi: Vec<DiffPoly>) -> Result<usize, CoveringError> {
        if phi.iter().any(|p| !p.is_odd_free()) {
            return Err(CoveringError::OddCharacteristic);
        }
        let residual = self.linearize(&phi)?;
        if residual.iter().any(|r| !r.is_zero()) {
            return Err(CoveringError::NotASymmetry { residual });
        }
        let n = self.n();
        let mut rx = DiffPoly::zero();
        for (i, ph) in phi.iter().enumerate() {
            rx += &ph.checked_mul(&DiffPoly::p(i, 0))?;
        }
        // D_t(φ^j p_j) = D_x( Σ_{σ≥1} Σ_{k<σ} (-1)^k D^{σ-1-k} φ^j · D^k(a^i_{jσ} p_i) )
        let mut rt = DiffPoly::zero();
        for i in 0..n {
            for (j, entries) in self.symbol[i].iter().enumerate() {
                for (sigma, a) in entries {
                    if *sigma == 0 {
                        continue;
                    }
                    let ap = a.checked_mul(&DiffPoly::p(i, 0))?;
                    for k in 0..*sigma {
                        let left = self.total_x_n(&phi[j], sigma - 1 - k)?;
                        let right = self.total_x_n(&ap, k)?;
                        let t = left.checked_mul(&right)?;
                        if k % 2 == 0 {
                            rt += &t;
                        } else {
                            rt -= &t;
                        }
                    }
                }
            }
        }
        let lhs = self.total_t(&rx)?;
        let rhs = self.total_x(&rt)?;
        if lhs != rhs {
            return Err(CoveringError::InconsistentNonlocal);
        }
        self.slots.push(NonlocalSlot { phi, rx_rule: rx, rt_rule: rt });
        Ok(self.slots.len() - 1)
    }
}

/// One coefficient of a collected residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedCondition {
    pub component: usize,
    pub monomial: DiffMonomial,
    pub coefficient: RatFunc,
}

/// Coefficients of every monomial in every component; the residual vanishes
/// iff all of them do.
pub fn extract_conditions(residual: &[DiffPoly]) -> Vec<ExtractedCondition> {
    residual
        .iter()
        .enumerate()
        .flat_map(|(component, r)| {
            r.collect()
                .into_iter()
                .map(move |(monomial, coefficient)| ExtractedCondition { component, monomial, coefficient })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse, parse_ratfunc};

    fn kdv() -> EvolutionSystem {
        EvolutionSystem::general(vec![parse("u1_x3 + u1*u1_x").unwrap()]).unwrap()
    }

    fn bv(s: &str) -> BivectorForm {
        BivectorForm::new(vec![parse(s).unwrap()]).unwrap()
    }

    #[test]
    fn kdv_adjoint_system() {
        let ctx = build_cotangent(&kdv());
        assert_eq!(ctx.pt_rules()[0], parse("p1_x3 + u1*p1_x").unwrap());
        assert_eq!(ctx.total_t(&parse("u1").unwrap()).unwrap(), parse("u1_x3 + u1*u1_x").unwrap());
        assert_eq!(ctx.total_t(&parse("p1").unwrap()).unwrap(), parse("p1_x3 + u1*p1_x").unwrap());
    }

    #[test]
    fn kdv_bivectors() {
        let ctx = build_cotangent(&kdv());
        let zero = |s| ctx.bivector_residual(&bv(s)).unwrap().iter().all(DiffPoly::is_zero);
        assert!(zero("p1_x"));
        assert!(zero("p1_x3 + 2/3*u1*p1_x + 1/3*u1_x*p1"));
        assert!(!zero("u1*p1_x"));
    }

    #[test]
    fn translation_symmetry() {
        let r = linearize(&kdv(), &[parse("u1_x").unwrap()]).unwrap();
        assert!(r[0].is_zero());
    }

    #[test]
    fn transport_adjoint() {
        let f = EvolutionSystem::general(vec![parse("u1_x").unwrap()]).unwrap();
        assert_eq!(build_cotangent(&f).pt_rules()[0], parse("p1_x").unwrap());
    }

    #[test]
    fn hydrodynamic_adjoint_system() {
        let v: Vec<Vec<RatFunc>> = [["u1", "u2^2"], ["u1*u2", "3"]]
            .iter()
            .map(|r| r.iter().map(|s| parse_ratfunc(s).unwrap()).collect())
            .collect();
        let ctx = build_cotangent(&EvolutionSystem::hydrodynamic(v.clone()).unwrap());
        for i in 0..2 {
            let mut expect = DiffPoly::zero();
            for k in 0..2 {
                expect += &DiffPoly::p(k, 1).scale(&v[k][i]);
                for j in 0..2 {
                    let c = &v[k][i].partial(j) - &v[k][j].partial(i);
                    expect += &DiffPoly::u(j, 1).checked_mul(&DiffPoly::p(k, 0)).unwrap().scale(&c);
                }
            }
            assert_eq!(ctx.pt_rules()[i], expect);
        }
    }

    #[test]
    fn kdv_rejects_non_symmetry() {
        let mut ctx = build_cotangent(&kdv());
        match ctx.register_symmetry(vec![parse("u1").unwrap()]) {
            Err(CoveringError::NotASymmetry { residual }) => assert!(!residual[0].is_zero()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_hydrodynamic_symmetry_slot() {
        let v = parse_ratfunc("u1^2 + 1").unwrap();
        let w = parse_ratfunc("1/(u1 + 2)").unwrap();
        let mut ctx = build_cotangent(&EvolutionSystem::hydrodynamic(vec![vec![v.clone()]]).unwrap());
        let phi = DiffPoly::u(0, 1).scale(&w);
        let slot = ctx.register_symmetry(vec![phi]).unwrap();
        let expect = DiffPoly::u(0, 1).checked_mul(&DiffPoly::p(0, 0)).unwrap().scale(&(&v * &w));
        assert_eq!(ctx.slots()[slot].rt_rule, expect);
        assert_eq!(ctx.total_t(&DiffPoly::r(0)).unwrap(), expect);
    }

    #[test]
    fn jet_cap_is_enforced() {
        let ctx = build_cotangent(&kdv()).with_jet_cap(4);
        assert!(matches!(
            ctx.total_t(&parse("p1_x2").unwrap()),
            Err(CoveringError::Kernel(KernelError::JetCapExceeded { .. }))
        ));
    }

    #[test]
    fn extraction_partitions_residual() {
        let ctx = build_cotangent(&kdv());
        let r = ctx.bivector_residual(&bv("u1*p1_x")).unwrap();
        let conds = extract_conditions(&r);
        assert!(!conds.is_empty());
        let rebuilt: DiffPoly = conds.iter().map(|c| DiffPoly::term(c.monomial.clone(), c.coefficient.clone())).sum();
        assert_eq!(rebuilt, r[0]);
        assert!(extract_conditions(&[DiffPoly::zero()]).is_empty());
    }
}
