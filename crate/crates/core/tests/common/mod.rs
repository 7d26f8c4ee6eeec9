#![allow(clippy::needless_range_loop)]

//! Fixtures and generators shared by the integration tests.
#![allow(dead_code)]

use hhokit_core::covering::{BivectorForm, CoveringContext, LocalOperator};
use hhokit_core::geometry::linalg::{self, Matrix};
use hhokit_core::geometry::{Connection, Metric};
use hhokit_core::kernel::{parse, parse_ratfunc, rat, DiffMonomial, DiffPoly, Jet, Monomial, OddVar, Poly, Rat, RatFunc, Var};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::Rng;

pub fn rf(s: &str) -> RatFunc {
    parse_ratfunc(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn dp(s: &str) -> DiffPoly {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn mat(rows: &[&[&str]]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|s| rf(s)).collect()).collect()
}

pub fn fluxes(s: &[&str]) -> Vec<RatFunc> {
    s.iter().map(|x| rf(x)).collect()
}

pub fn all_zero(v: &[DiffPoly]) -> bool {
    v.iter().all(DiffPoly::is_zero)
}

pub fn is_zero3(t: &[Vec<Vec<RatFunc>>]) -> bool {
    t.iter().flatten().flatten().all(RatFunc::is_zero)
}

pub const KDV: &str = "u1_x3 + u1*u1_x";

/// Ten-parameter flux family for the `n = 4` skew metric with `T_123 = 1`, `g0_34 = 1`.
pub const N4_FAMILY: [&str; 4] = [
    "(c4*u1^2 + (c1*u2 + c3*u3 + c8)*u1 + c10*u3 - c1*u4 - c2)/u3",
    "(c1*u2^2 + (c3*u3 + c4*u1 + c8)*u2 + c9*u3 + c4*u4 + c6)/u3",
    "c1*u2 + c3*u3 + c4*u1 + c7",
    "((c1*u2 + c3*u3 + c4*u1)*u4 + c2*u2 + c5*u3 + c6*u1)/u3",
];

/// Conservative fluxes of the oriented associativity system in six components.
pub const SYSTEM_SIX: [&str; 6] = [
    "u2",
    "(u2*u6 + u1*u4 - u2*u3)/u5",
    "u4",
    "(u2 + u4*u6)/u5",
    "u6",
    "(u6^2 - u3*u6 + u4*u5 - u1)/u5",
];

pub const MONGE: [[&str; 2]; 2] = [["-2*u2", "u1"], ["u1", "0"]];

fn small_rat(rng: &mut StdRng, lo: i64, hi: i64) -> Rat {
    rat(rng.gen_range(lo..=hi), 1)
}

fn nonzero(rng: &mut StdRng, lo: i64, hi: i64) -> i64 {
    loop {
        let v = rng.gen_range(lo..=hi);
        if v != 0 {
            return v;
        }
    }
}

fn field(i: usize) -> RatFunc {
    RatFunc::field(i)
}

fn c(x: i64) -> RatFunc {
    RatFunc::int(x)
}

/// Substitutes `u^i ↦ w_i(u)` into a function of `w`.
pub fn compose(f: &RatFunc, w: &[Poly]) -> RatFunc {
    f.substitute(&|v| match v {
        Var::Field(i) => Some(w[i as usize].clone()),
        Var::Param(_) => None,
    })
    .expect("composition keeps denominators nonzero")
}

/// First-order test instance: a flat metric written in curvilinear
/// coordinates, its Levi-Civita connection and a velocity matrix.
pub struct FirstOrderInstance {
    pub metric: Metric,
    pub conn: Connection,
    pub v: Matrix,
    pub built_to_pass: bool,
}

/// Flat coordinates `w_1 = u1`, `w_i = u_i + a_i u1^2 + b_i u1`, constant metric
/// `η` in `w`; `V = J^{-1} η^{-1} Hess(h) J` for `h(w)` quadratic plus a
/// `w1^3` term, optionally perturbed.
pub fn first_order_instance(rng: &mut StdRng, n: usize, pass: bool) -> FirstOrderInstance {
    let mut w = vec![Poly::field(0)];
    let mut jac = linalg::zeros(n);
    jac[0][0] = c(1);
    for i in 1..n {
        let a = small_rat(rng, -2, 2);
        let b = small_rat(rng, -2, 2);
        let wi = &(&Poly::field(i) + &Poly::field(0).pow(2).scale(&a)) + &Poly::field(0).scale(&b);
        w.push(wi);
        jac[i][i] = c(1);
        jac[i][0] = &field(0).scale(&(&a * rat(2, 1))) + &RatFunc::constant(b);
    }
    let jac_inv = linalg::inverse(&jac).expect("unitriangular");
    let mut eta = linalg::zeros(n);
    for (i, row) in eta.iter_mut().enumerate() {
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        row[i] = c(s * rng.gen_range(1..=2));
    }
    if n > 1 && rng.gen_bool(0.5) {
        eta[0][1] = c(1);
        eta[1][0] = c(1);
        if linalg::det(&eta).is_zero() {
            eta[0][0] = &eta[0][0] + &c(1);
        }
    }
    let g_low = linalg::mul(&linalg::transpose(&jac), &linalg::mul(&eta, &jac));
    let metric = Metric::lower(g_low).expect("nondegenerate");
    let conn = Connection::levi_civita(&metric);
    // h(w) = quadratic + α w1^3 keeps every entry of V within degree 2 in u
    let mut h = Poly::zero();
    for i in 0..n {
        for j in i..n {
            h.add_term(Monomial::var(Var::Field(i as u16)).mul(&Monomial::var(Var::Field(j as u16))), small_rat(rng, -2, 2));
        }
    }
    h.add_term(Monomial::from_factors([(Var::Field(0), 3)]), rat(nonzero(rng, -2, 2), 1));
    let h = RatFunc::from(h);
    let hess: Matrix = (0..n).map(|a| (0..n).map(|b| h.partial(a).partial(b)).collect()).collect();
    let eta_inv = linalg::inverse(&eta).expect("nondegenerate");
    let vw = linalg::mul(&eta_inv, &hess);
    let vw_u: Matrix = vw.iter().map(|r| r.iter().map(|x| compose(x, &w)).collect()).collect();
    let mut v = linalg::mul(&jac_inv, &linalg::mul(&vw_u, &jac));
    if !pass {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        v[i][j] = &v[i][j] + &c(nonzero(rng, -3, 3));
        if n > 1 {
            let k = (i + 1) % n;
            v[k][i] = &v[k][i] + &field(j).scale(&rat(nonzero(rng, -2, 2), 1));
        }
    }
    FirstOrderInstance { metric, conn, v, built_to_pass: pass }
}

/// Monge metric carried along a random affine map `u ↦ A u + b`:
/// `ĝ(u) = A^T g(Au + b) A`.
pub fn monge_instance(rng: &mut StdRng) -> Matrix {
    let g = mat(&[&MONGE[0], &MONGE[1]]);
    loop {
        let a: Vec<Vec<i64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        if a[0][0] * a[1][1] - a[0][1] * a[1][0] == 0 {
            continue;
        }
        let b: Vec<i64> = (0..2).map(|_| rng.gen_range(-2..=2)).collect();
        let w: Vec<Poly> = (0..2)
            .map(|i| {
                let mut p = Poly::int(b[i]);
                for (j, aij) in a[i].iter().enumerate() {
                    p = &p + &Poly::field(j).scale(&rat(*aij, 1));
                }
                p
            })
            .collect();
        let am: Matrix = a.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect();
        let gw: Matrix = g.iter().map(|r| r.iter().map(|x| compose(x, &w)).collect()).collect();
        return linalg::mul(&linalg::transpose(&am), &linalg::mul(&gw, &am));
    }
}

/// Components `g^{ij} p_{j,x} + Γ^{ij}_k u^k_x p_j + w u_x r_slot`.
pub fn with_tail(base: &BivectorForm, w: &RatFunc, slot: usize) -> BivectorForm {
    let mut comps = base.components.clone();
    let t = DiffPoly::u(0, 1).checked_mul(&DiffPoly::r(slot)).unwrap().scale(w);
    comps[0] += &t;
    BivectorForm::new(comps).unwrap()
}

// ---- proptest strategies ----

pub fn ratfunc_strategy(n: usize) -> impl Strategy<Value = RatFunc> {
    (
        prop::collection::vec((-3i64..=3, prop::collection::vec(0u32..=2, n)), 1..4),
        prop::bool::weighted(0.3),
        0..n,
        1i64..=3,
    )
        .prop_map(move |(terms, with_den, k, shift)| {
            let mut num = Poly::zero();
            for (coef, exps) in terms {
                let m = Monomial::from_factors(
                    exps.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (Var::Field(i as u16), *e)),
                );
                num.add_term(m, rat(coef, 1));
            }
            let den = if with_den { &Poly::field(k) + &Poly::int(shift) } else { Poly::one() };
            RatFunc::new(num, den).unwrap()
        })
}

fn monomial_strategy(n: usize, max_order: usize, odd: bool) -> impl Strategy<Value = DiffMonomial> {
    let jets = prop::collection::vec((0..n, 1..=max_order), 0..3);
    let odd_part = if odd {
        prop::option::weighted(0.7, (0..n, 0..=max_order)).boxed()
    } else {
        Just(None).boxed()
    };
    (jets, odd_part).prop_map(|(js, o)| {
        let mut even: Vec<(Jet, u32)> = Vec::new();
        for (i, s) in js {
            let j = Jet::new(i, s);
            match even.iter_mut().find(|(x, _)| *x == j) {
                Some((_, e)) => *e += 1,
                None => even.push((j, 1)),
            }
        }
        DiffMonomial::new(even, o.map(|(i, s)| OddVar::p(i, s)))
    })
}

/// Random differential polynomial; with `odd`, terms may carry one `p` factor.
pub fn diffpoly_strategy(n: usize, max_order: usize, odd: bool) -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((ratfunc_strategy(n), monomial_strategy(n, max_order, odd)), 0..4).prop_map(|terms| {
        let mut out = DiffPoly::zero();
        for (c, m) in terms {
            out += &DiffPoly::term(m, c);
        }
        out
    })
}

/// Random local operator of order at most 4.
pub fn operator_strategy(n: usize) -> impl Strategy<Value = LocalOperator> {
    prop::collection::vec((0..n, 0..n, 0usize..=4, diffpoly_strategy(n, 2, false)), 0..5).prop_map(move |entries| {
        let mut op = LocalOperator::zero(n);
        for (i, j, k, a) in entries {
            op.add(i, j, k, a).unwrap();
        }
        op
    })
}

/// `D_x D_t a - D_t D_x a` on a covering.
pub fn commutator(ctx: &CoveringContext, a: &DiffPoly) -> DiffPoly {
    let xt = ctx.total_x(&ctx.total_t(a).unwrap()).unwrap();
    let tx = ctx.total_t(&ctx.total_x(a).unwrap()).unwrap();
    &xt - &tx
}
