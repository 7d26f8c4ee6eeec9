//! Undetermined-coefficient searches: bivectors of a system within an
//! operator ansatz, and fluxes compatible with a given second- or third-order
//! operator within a flux ansatz.

mod ansatz;

pub use ansatz::{
    make_operator_ansatz, make_operator_ansatz_capped, AnsatzTerm, DegreeCounting, FluxAnsatz, OperatorAnsatz,
    DEFAULT_PARAM_CAP,
};

use std::collections::BTreeMap;

use crate::covering::{extract_conditions, BivectorForm, CoveringContext, CoveringError};
use crate::geometry::{
    haantjes, linalg, linear_degeneracy_check, second_order_canonical_check, second_order_compat,
    third_order_compat, third_order_hamiltonian_check, ConditionReport, GeometryError, SecondOrderData,
    ThirdOrderData,
};
use crate::kernel::{linear_solve_with, DiffPoly, KernelError, LinearSystemSolution, Poly, Rat, RatFunc, Var};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("ansatz exceeds the cap of {cap} parameters")]
    CapExceeded { cap: usize },
    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Solution space of a linear search. `general` is the template with pivot
/// parameters eliminated; `basis[f]` sets the `f`-th free parameter to 1 and
/// the others to 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily<T> {
    pub solution: LinearSystemSolution,
    pub general: Option<T>,
    pub basis: Vec<T>,
    pub dimension: usize,
}

/// Classification of one sampled member of a flux family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberClassification {
    /// Values given to the free parameters, in the order of `solution.free`.
    pub free_values: Vec<Rat>,
    pub flux: Vec<RatFunc>,
    pub linear_degeneracy: ConditionReport,
    pub haantjes_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxFamily {
    pub family: SolutionFamily<Vec<RatFunc>>,
    pub classification: Option<MemberClassification>,
}

fn instantiate_poly(vals: &BTreeMap<usize, Rat>) -> impl Fn(Var) -> Option<Poly> + '_ {
    move |v| match v {
        Var::Param(k) => Some(Poly::constant(vals.get(&(k as usize)).cloned().unwrap_or_default())),
        Var::Field(_) => None,
    }
}

fn instantiate_dp(a: &DiffPoly, vals: &BTreeMap<usize, Rat>) -> Result<DiffPoly, KernelError> {
    a.substitute(&instantiate_poly(vals))
}

fn instantiate_rf(a: &RatFunc, vals: &BTreeMap<usize, Rat>) -> Result<RatFunc, KernelError> {
    a.substitute(&instantiate_poly(vals))
}

fn solve(eqs: &[RatFunc], params: usize) -> Result<LinearSystemSolution, KernelError> {
    let all: Vec<usize> = (0..params).collect();
    linear_solve_with(eqs, &all)
}

/// Variational bivectors of the covered system within `ansatz`.
pub fn find_bivectors(ctx: &CoveringContext, ansatz: &OperatorAnsatz) -> Result<SolutionFamily<BivectorForm>, SolverError> {
    if ansatz.n != ctx.n() {
        return Err(SolverError::InvalidAnsatz(format!("ansatz has n = {}, system has n = {}", ansatz.n, ctx.n())));
    }
    let template = ansatz.template();
    let residual = ctx.bivector_residual(&template)?;
    let eqs: Vec<RatFunc> = extract_conditions(&residual).into_iter().map(|c| c.coefficient).collect();
    let solution = solve(&eqs, ansatz.params())?;
    if solution.inconsistent {
        return Ok(SolutionFamily { solution, general: None, basis: Vec::new(), dimension: 0 });
    }
    let general = {
        let subst = solution.substitution();
        template.components.iter().map(|c| c.substitute(&subst)).collect::<Result<Vec<_>, _>>()?
    };
    let mut basis = Vec::new();
    for vals in solution.basis() {
        let comps = template
            .components
            .iter()
            .map(|c| instantiate_dp(c, &vals))
            .collect::<Result<Vec<_>, _>>()?;
        basis.push(BivectorForm::new(comps)?);
    }
    let dimension = solution.dimension();
    Ok(SolutionFamily { solution, general: Some(BivectorForm::new(general)?), basis, dimension })
}

fn flux_family(
    template: Vec<RatFunc>,
    params: usize,
    report: ConditionReport,
) -> Result<FluxFamily, SolverError> {
    let eqs: Vec<RatFunc> = report.residuals.into_iter().map(|r| r.value).collect();
    let solution = solve(&eqs, params)?;
    if solution.inconsistent {
        let family = SolutionFamily { solution, general: None, basis: Vec::new(), dimension: 0 };
        return Ok(FluxFamily { family, classification: None });
    }
    let general = {
        let subst = solution.substitution();
        template.iter().map(|c| c.substitute(&subst)).collect::<Result<Vec<_>, _>>()?
    };
    let mut basis = Vec::new();
    for vals in solution.basis() {
        basis.push(template.iter().map(|c| instantiate_rf(c, &vals)).collect::<Result<Vec<_>, _>>()?);
    }
    let dimension = solution.dimension();
    let classification = if dimension == 0 { None } else { Some(classify_member(&solution, &template)?) };
    let family = SolutionFamily { solution, general: Some(general), basis, dimension };
    Ok(FluxFamily { family, classification })
}

/// Deterministic nonzero values for sampled members: 2, -3, 5, -7, 11, ...
pub fn sample_values(count: usize) -> Vec<Rat> {
    let mut primes = Vec::new();
    let mut k = 2i64;
    while primes.len() < count {
        if (2..k).take_while(|d| d * d <= k).all(|d| k % d != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
        .into_iter()
        .enumerate()
        .map(|(i, p)| Rat::from_integer(if i % 2 == 0 { p } else { -p }.into()))
        .collect()
}

fn classify_member(solution: &LinearSystemSolution, template: &[RatFunc]) -> Result<MemberClassification, SolverError> {
    let free_values = sample_values(solution.free.len());
    let mut vals: BTreeMap<usize, Rat> = solution.free.iter().copied().zip(free_values.iter().cloned()).collect();
    for (p, a) in &solution.pivots {
        let mut v = a.constant.clone();
        for (f, c) in &a.coeffs {
            v += c * &vals[f];
        }
        vals.insert(*p, v);
    }
    let flux = template.iter().map(|c| instantiate_rf(c, &vals)).collect::<Result<Vec<_>, _>>()?;
    let jac = linalg::jacobian(&flux);
    let linear_degeneracy = linear_degeneracy_check(&jac);
    let haantjes_zero = haantjes(&jac).iter().flatten().flatten().all(RatFunc::is_zero);
    Ok(MemberClassification { free_values, flux, linear_degeneracy, haantjes_zero })
}

/// Fluxes `V` in `ansatz` making `u_t = (V(u))_x` compatible with the
/// second-order operator of `d`.
pub fn find_fluxes_second_order(d: &SecondOrderData, ansatz: &FluxAnsatz) -> Result<FluxFamily, SolverError> {
    if ansatz.n != d.n() {
        return Err(SolverError::InvalidAnsatz(format!("ansatz has n = {}, operator has n = {}", ansatz.n, d.n())));
    }
    if !second_order_canonical_check(d).pass {
        return Err(SolverError::Precondition("operator is not in canonical form".into()));
    }
    let template = ansatz.template();
    let report = second_order_compat(d, &template)?;
    flux_family(template, ansatz.params(), report)
}

/// Fluxes `V` in `ansatz` compatible with the third-order operator of `d`.
pub fn find_fluxes_third_order(d: &ThirdOrderData, ansatz: &FluxAnsatz) -> Result<FluxFamily, SolverError> {
    if ansatz.n != d.n() {
        return Err(SolverError::InvalidAnsatz(format!("ansatz has n = {}, operator has n = {}", ansatz.n, d.n())));
    }
    if !third_order_hamiltonian_check(d).pass {
        return Err(SolverError::Precondition("operator fails the Hamiltonian conditions".into()));
    }
    let template = ansatz.template();
    let report = third_order_compat(d, &template)?;
    flux_family(template, ansatz.params(), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{build_cotangent, EvolutionSystem};
    use crate::kernel::{parse, parse_ratfunc, rat};

    fn kdv() -> CoveringContext {
        build_cotangent(&EvolutionSystem::general(vec![parse("u1_x3 + u1*u1_x").unwrap()]).unwrap())
    }

    #[test]
    fn kdv_family() {
        let ctx = kdv();
        let a = make_operator_ansatz(1, 3, 1, DegreeCounting::Total).unwrap();
        let fam = find_bivectors(&ctx, &a).unwrap();
        assert_eq!(fam.dimension, 2);
        let got: Vec<DiffPoly> = fam.basis.iter().map(|b| b.components[0].clone()).collect();
        assert!(got.contains(&parse("p1_x").unwrap()));
        assert!(got.contains(&parse("p1_x3 + 2/3*u1*p1_x + 1/3*u1_x*p1").unwrap()));
        for b in &fam.basis {
            assert!(ctx.bivector_residual(b).unwrap().iter().all(DiffPoly::is_zero));
        }
    }

    #[test]
    fn transport_admits_p_x() {
        let ctx = build_cotangent(&EvolutionSystem::general(vec![parse("u1_x").unwrap()]).unwrap());
        let fam = find_bivectors(&ctx, &make_operator_ansatz(1, 1, 0, DegreeCounting::Total).unwrap()).unwrap();
        assert_eq!(fam.dimension, 1);
        assert_eq!(fam.basis[0].components[0], parse("p1_x").unwrap());
    }

    #[test]
    fn hydrodynamic_scalar_family() {
        let ctx = build_cotangent(&EvolutionSystem::hydrodynamic(vec![vec![parse_ratfunc("u1").unwrap()]]).unwrap());
        let fam = find_bivectors(&ctx, &make_operator_ansatz(1, 1, 2, DegreeCounting::Total).unwrap()).unwrap();
        assert!(fam.dimension >= 1);
        // g = u1^2 gives u1^2 p_x + u1 u1_x p
        let candidate = BivectorForm::new(vec![parse("u1^2*p1_x + u1*u1_x*p1").unwrap()]).unwrap();
        assert!(ctx.bivector_residual(&candidate).unwrap().iter().all(DiffPoly::is_zero));
        for b in &fam.basis {
            assert!(ctx.bivector_residual(b).unwrap().iter().all(DiffPoly::is_zero));
        }
    }

    #[test]
    fn n2_second_order_affine_only() {
        let d = SecondOrderData::alternating(2, &[], &[([0, 1], rat(1, 1))]);
        let fam = find_fluxes_second_order(&d, &FluxAnsatz::polynomial(2, 2).unwrap()).unwrap();
        let lin = find_fluxes_second_order(&d, &FluxAnsatz::polynomial(2, 1).unwrap()).unwrap();
        assert_eq!(fam.family.dimension, lin.family.dimension);
        for v in &fam.family.basis {
            for c in v {
                assert!(c.num().total_degree() <= 1, "{c}");
            }
        }
        let empty = find_fluxes_second_order(&d, &FluxAnsatz::empty(2)).unwrap();
        assert_eq!(empty.family.dimension, 0);
    }

    #[test]
    fn third_order_flat_affine_only() {
        let id = vec![vec![RatFunc::one(), RatFunc::zero()], vec![RatFunc::zero(), RatFunc::one()]];
        let d = ThirdOrderData::from_metric(id).unwrap();
        let fam = find_fluxes_third_order(&d, &FluxAnsatz::polynomial(2, 2).unwrap()).unwrap();
        assert!(fam.family.dimension > 0);
        for v in &fam.family.basis {
            assert!(third_order_compat(&d, v).unwrap().pass);
            for c in v {
                assert!(c.num().total_degree() <= 1, "{c}");
            }
        }
    }

    #[test]
    fn sample_values_pattern() {
        assert_eq!(sample_values(4), vec![rat(2, 1), rat(-3, 1), rat(5, 1), rat(-7, 1)]);
    }
}
