//! Enumeration of operator and flux ansätze with one fresh parameter per term.

use crate::covering::BivectorForm;
use crate::kernel::{DiffMonomial, DiffPoly, Jet, Monomial, OddVar, Poly, Rat, RatFunc, Var};

use super::SolverError;

pub const DEFAULT_PARAM_CAP: usize = 10_000;

/// How `degree_bound` limits the terms of an operator ansatz.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegreeCounting {
    /// Order-0 `u` factors of the coefficient plus jet factors `u_σ`, `σ ≥ 1`.
    #[default]
    Total,
    /// Order-0 `u` factors of the coefficient only; jets are limited by the weight alone.
    Coefficient,
}

/// One parameter of an operator ansatz: `c · coeff(u) · jets · p_{j,σ}` in component `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzTerm {
    pub component: usize,
    pub coefficient: Monomial,
    pub monomial: DiffMonomial,
}

/// Odd-linear template `A(p)` whose coefficients are the parameters `c_1, c_2, ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorAnsatz {
    pub n: usize,
    pub order: usize,
    pub degree: usize,
    pub counting: DegreeCounting,
    /// Term `k` carries parameter `c_{k+1}`.
    pub terms: Vec<AnsatzTerm>,
}

impl OperatorAnsatz {
    pub fn params(&self) -> usize {
        self.terms.len()
    }

    /// The template with symbolic parameters.
    pub fn template(&self) -> BivectorForm {
        let mut comps = vec![DiffPoly::zero(); self.n];
        for (k, t) in self.terms.iter().enumerate() {
            let c = RatFunc::from(Poly::term(t.coefficient.mul(&Monomial::var(Var::Param(k as u16))), Rat::from_integer(1.into())));
            comps[t.component].add_term(t.monomial.clone(), c);
        }
        BivectorForm::new(comps).expect("odd-linear by construction")
    }
}

/// Exponent vectors of `n` variables with total degree `d`, graded lexicographic.
pub(crate) fn monomials_of_degree(n: usize, d: usize) -> Vec<Monomial> {
    fn rec(n: usize, i: usize, left: usize, cur: &mut Vec<(Var, u32)>, out: &mut Vec<Monomial>) {
        if i + 1 == n {
            if left > 0 {
                cur.push((Var::Field(i as u16), left as u32));
            }
            out.push(Monomial::from_factors(cur.iter().copied()));
            if left > 0 {
                cur.pop();
            }
            return;
        }
        for e in (0..=left).rev() {
            if e > 0 {
                cur.push((Var::Field(i as u16), e as u32));
            }
            rec(n, i + 1, left - e, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    if n == 0 {
        return if d == 0 { vec![Monomial::one()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(n, 0, d, &mut Vec::new(), &mut out);
    out
}

/// All field monomials of degree at most `d`.
pub(crate) fn monomials_up_to(n: usize, d: usize) -> Vec<Monomial> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

/// Multisets of jets `u^k_s` (`s ≥ 1`) whose orders sum to `w`, with at most
/// `max_factors` factors.
fn jet_products(n: usize, w: usize, max_factors: usize) -> Vec<Vec<Jet>> {
    let jets: Vec<Jet> = (1..=w).flat_map(|s| (0..n).map(move |k| Jet::new(k, s))).collect();
    fn rec(jets: &[Jet], start: usize, left: usize, room: usize, cur: &mut Vec<Jet>, out: &mut Vec<Vec<Jet>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if room == 0 {
            return;
        }
        for (pos, j) in jets.iter().enumerate().skip(start) {
            let s = j.order as usize;
            if s > left {
                continue;
            }
            cur.push(*j);
            rec(jets, pos, left - s, room - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&jets, 0, w, max_factors, &mut Vec::new(), &mut out);
    out
}

/// Enumerates every odd-linear term of weight `1..=order` (jet `u_σ` and `p_σ`
/// weigh `σ`) within the degree bound, each with its own parameter.
pub fn make_operator_ansatz(
    n: usize,
    order: usize,
    degree: usize,
    counting: DegreeCounting,
) -> Result<OperatorAnsatz, SolverError> {
    make_operator_ansatz_capped(n, order, degree, counting, DEFAULT_PARAM_CAP)
}

pub fn make_operator_ansatz_capped(
    n: usize,
    order: usize,
    degree: usize,
    counting: DegreeCounting,
    cap: usize,
) -> Result<OperatorAnsatz, SolverError> {
    if n == 0 || order == 0 {
        return Err(SolverError::InvalidAnsatz("need n >= 1 and order >= 1".into()));
    }
    let mut terms = Vec::new();
    for w in 1..=order {
        for i in 0..n {
            for sigma in (0..=w).rev() {
                for j in 0..n {
                    let jet_room = match counting {
                        DegreeCounting::Total => degree,
                        DegreeCounting::Coefficient => usize::MAX,
                    };
                    for jp in jet_products(n, w - sigma, jet_room) {
                        let coeff_room = match counting {
                            DegreeCounting::Total => degree - jp.len(),
                            DegreeCounting::Coefficient => degree,
                        };
                        let mut even: Vec<(Jet, u32)> = Vec::new();
                        for jet in &jp {
                            match even.iter_mut().find(|(x, _)| x == jet) {
                                Some((_, e)) => *e += 1,
                                None => even.push((*jet, 1)),
                            }
                        }
                        let mono = DiffMonomial::new(even, Some(OddVar::p(j, sigma)));
                        for coefficient in monomials_up_to(n, coeff_room) {
                            terms.push(AnsatzTerm { component: i, coefficient, monomial: mono.clone() });
                            if terms.len() > cap {
                                return Err(SolverError::CapExceeded { cap });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(OperatorAnsatz { n, order, degree, counting, terms })
}

/// Flux template `V^i = (Σ_m c_k u^m) / den` over field monomials `u^m` of
/// degree at most `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxAnsatz {
    pub n: usize,
    pub degree: usize,
    pub denominator: Poly,
    /// Parameter `c_{k+1}` multiplies `monomials[k].1` in component `monomials[k].0`.
    pub monomials: Vec<(usize, Monomial)>,
}

impl FluxAnsatz {
    pub fn polynomial(n: usize, degree: usize) -> Result<Self, SolverError> {
        FluxAnsatz::with_denominator(n, degree, Poly::one())
    }

    /// Fixed, parameter-free denominator shared by all components.
    pub fn with_denominator(n: usize, degree: usize, denominator: Poly) -> Result<Self, SolverError> {
        if denominator.is_zero() || denominator.has_params() {
            return Err(SolverError::InvalidAnsatz("denominator must be nonzero and parameter-free".into()));
        }
        let monos = monomials_up_to(n, degree);
        if n * monos.len() > DEFAULT_PARAM_CAP {
            return Err(SolverError::CapExceeded { cap: DEFAULT_PARAM_CAP });
        }
        let monomials = (0..n).flat_map(|i| monos.iter().map(move |m| (i, m.clone()))).collect();
        Ok(FluxAnsatz { n, degree, denominator, monomials })
    }

    /// The zero template, with no parameters.
    pub fn empty(n: usize) -> Self {
        FluxAnsatz { n, degree: 0, denominator: Poly::one(), monomials: Vec::new() }
    }

    pub fn params(&self) -> usize {
        self.monomials.len()
    }

    pub fn template(&self) -> Vec<RatFunc> {
        let mut nums = vec![Poly::zero(); self.n];
        for (k, (i, m)) in self.monomials.iter().enumerate() {
            nums[*i].add_term(m.mul(&Monomial::var(Var::Param(k as u16))), Rat::from_integer(1.into()));
        }
        nums.into_iter()
            .map(|p| RatFunc::new(p, self.denominator.clone()).expect("parameter-free denominator"))
            .collect()
    }
}
