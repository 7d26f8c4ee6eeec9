mod common;

use common::*;
use hhokit_core::covering::{build_cotangent, BivectorForm, EvolutionSystem};
use hhokit_core::kernel::{linear_solve, DiffPoly, Poly, RatFunc};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 128, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn total_x_is_a_derivation(a in diffpoly_strategy(2, 3, true), b in diffpoly_strategy(2, 3, false)) {
        let lhs = a.checked_mul(&b).unwrap().total_x();
        let rhs = &a.total_x().checked_mul(&b).unwrap() + &a.checked_mul(&b.total_x()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn collect_partitions(a in diffpoly_strategy(2, 3, true)) {
        let rebuilt: DiffPoly = a.collect().into_iter().map(|(m, c)| DiffPoly::term(m, c)).sum();
        prop_assert_eq!(rebuilt, a);
    }

    #[test]
    fn ratfunc_normal_form(a in ratfunc_strategy(2), b in ratfunc_strategy(2)) {
        prop_assert!((&a - &a).is_zero());
        if !b.is_zero() {
            let q = a.checked_div(&b).unwrap();
            prop_assert_eq!(&q * &b, a);
        }
    }

    #[test]
    fn sums_do_not_depend_on_order(terms in prop::collection::vec(ratfunc_strategy(2), 1..6)) {
        let fwd: RatFunc = terms.iter().cloned().sum();
        let rev: RatFunc = terms.iter().rev().cloned().sum();
        prop_assert_eq!(fwd.to_string(), rev.to_string());
        prop_assert_eq!(fwd, rev);
    }

    #[test]
    fn print_parse_round_trip(a in diffpoly_strategy(2, 3, true)) {
        prop_assert_eq!(dp(&a.to_string()), a);
    }

    #[test]
    fn linear_solve_is_sound(
        rows in prop::collection::vec(prop::collection::vec((0usize..4, -2i64..=2, 0u32..=2), 1..5), 1..5),
    ) {
        // Σ c_k · (m · u1^e) with a constant term from k = 3 absent
        let eqs: Vec<RatFunc> = rows
            .iter()
            .map(|row| {
                let mut p = Poly::zero();
                for (k, m, e) in row {
                    let t = &Poly::param(*k) * &Poly::field(0).pow(*e);
                    p = &p + &t.scale(&hhokit_core::kernel::rat(*m, 1));
                }
                RatFunc::from(p)
            })
            .collect();
        let sol = linear_solve(&eqs).unwrap();
        prop_assert!(!sol.inconsistent);
        {
            let subst = sol.substitution();
            for e in &eqs {
                prop_assert!(e.substitute(&subst).unwrap().is_zero());
            }
        }
        let mut shuffled = eqs.clone();
        shuffled.reverse();
        prop_assert_eq!(linear_solve(&shuffled).unwrap(), sol);
    }

    #[test]
    fn adjoint_is_an_involution(op in operator_strategy(2)) {
        prop_assert_eq!(op.formal_adjoint().formal_adjoint(), op);
    }

    #[test]
    fn kdv_covering_commutes(a in diffpoly_strategy(1, 3, true)) {
        let ctx = build_cotangent(&EvolutionSystem::general(vec![dp(KDV)]).unwrap());
        prop_assert!(commutator(&ctx, &a).is_zero());
    }

    #[test]
    fn hydrodynamic_covering_commutes(a in diffpoly_strategy(2, 3, true)) {
        let v = mat(&[&["u2", "u1"], &["1", "u1^2/(u2 + 1)"]]);
        let ctx = build_cotangent(&EvolutionSystem::hydrodynamic(v).unwrap());
        prop_assert!(commutator(&ctx, &a).is_zero());
    }

    #[test]
    fn residual_is_additive(a in diffpoly_strategy(1, 2, true), b in diffpoly_strategy(1, 2, true)) {
        let keep_odd = |x: DiffPoly| -> DiffPoly {
            x.collect().into_iter().filter(|(m, _)| m.odd_degree() == 1).map(|(m, c)| DiffPoly::term(m, c)).sum()
        };
        let fa = BivectorForm::new(vec![keep_odd(a)]).unwrap();
        let fb = BivectorForm::new(vec![keep_odd(b)]).unwrap();
        let ctx = build_cotangent(&EvolutionSystem::general(vec![dp(KDV)]).unwrap());
        let ra = ctx.bivector_residual(&fa).unwrap();
        let rb = ctx.bivector_residual(&fb).unwrap();
        let rab = ctx.bivector_residual(&(&fa + &fb)).unwrap();
        prop_assert_eq!(rab[0].clone(), &ra[0] + &rb[0]);
        let three = BivectorForm::new(vec![fa.components[0].scale_rat(&hhokit_core::kernel::rat(3, 1))]).unwrap();
        prop_assert_eq!(ctx.bivector_residual(&three).unwrap()[0].clone(), ra[0].scale_rat(&hhokit_core::kernel::rat(3, 1)));
    }
}
