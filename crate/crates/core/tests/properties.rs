//! Randomized invariants of the algebra kernel, the DSL and the geometric layers.

use std::collections::HashMap;

use cr_invariants::cli;
use cr_invariants::corpus;
use cr_invariants::dsl::{expr_to_poly, parse_expr, Expr};
use cr_invariants::exactalg::linalg::Matrix;
use cr_invariants::exactalg::rank::random_coordinate;
use cr_invariants::exactalg::resultant::resultant;
use cr_invariants::exactalg::{var_list, Monomial, Poly, Series, VarList, GQ};
use cr_invariants::geometry::{join_point, random_complex_point, split_point};
use cr_invariants::normalform::solve_normal;
use cr_invariants::segre::{inclusion_holds_at, segre_dims, segre_param};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar() -> impl Strategy<Value = GQ> {
    (-9i64..=9, 1i64..=6, -9i64..=9, 1i64..=6)
        .prop_map(|(a, b, c, d)| &GQ::from_frac(a, b) + &(&GQ::from_frac(c, d) * &GQ::from_ints(0, 1)))
}

fn vars() -> VarList {
    var_list(&["x", "y", "conj(x)", "conj(y)"])
}

fn poly_in(v: VarList, max_exp: u16, max_terms: usize) -> impl Strategy<Value = Poly> {
    let n = v.len();
    prop::collection::vec((prop::collection::vec(0..=max_exp, n), scalar()), 0..=max_terms)
        .prop_map(move |terms| Poly::from_terms(&v, terms.into_iter().map(|(m, c)| (m as Monomial, c))))
}

fn poly() -> impl Strategy<Value = Poly> {
    poly_in(vars(), 2, 5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&a * &Poly::one(&vars()), a);
    }

    #[test]
    fn scalar_field_axioms(a in scalar(), b in scalar()) {
        prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inv(), GQ::one());
        }
        prop_assert!((&a * &a.conj()).is_real());
    }

    #[test]
    fn bar_swap_is_an_involutive_automorphism(a in poly(), b in poly()) {
        prop_assert_eq!(a.bar_swap().bar_swap(), a.clone());
        prop_assert_eq!((&a * &b).bar_swap(), &a.bar_swap() * &b.bar_swap());
        prop_assert_eq!((&a + &b).bar_swap(), &a.bar_swap() + &b.bar_swap());
        // a + bar_swap(a) is real on the diagonal
        let s = &a + &a.bar_swap();
        prop_assert_eq!(s.bar_swap(), s);
    }

    #[test]
    fn resultant_with_linear_factor_is_evaluation(a in poly_in(var_list(&["y"]), 2, 3), g in poly_in(var_list(&["x", "y"]), 3, 4)) {
        prop_assume!(g.degree_in("x") > 0);
        let v = var_list(&["x", "y"]);
        let a = a.with_vars(&v);
        let f = &Poly::var(&v, "x") - &a;
        let r = resultant(&f, &g, "x").unwrap().with_vars(&v);
        let mut sub = HashMap::new();
        sub.insert("x".to_string(), a.clone());
        let ga = g.subs(&sub).with_vars(&v);
        prop_assert!(r == ga || r == ga.scale(&-GQ::one()), "res {} vs g(a) {}", r, ga);
    }

    #[test]
    fn resultant_vanishes_on_common_factor(u in poly_in(var_list(&["x", "y"]), 2, 3), p in poly_in(var_list(&["x", "y"]), 2, 3), q in poly_in(var_list(&["x", "y"]), 2, 3)) {
        prop_assume!(u.degree_in("x") > 0 && !p.is_zero() && !q.is_zero());
        let r = resultant(&(&u * &p), &(&u * &q), "x").unwrap();
        prop_assert!(r.is_zero());
    }

    #[test]
    fn rank_is_consistent(rows in prop::collection::vec(prop::collection::vec(scalar(), 4), 1..5), drop in 0usize..4) {
        let a = Matrix::from_rows(&rows);
        let r = a.rank();
        prop_assert_eq!(r, a.transpose().rank());
        prop_assert_eq!(r + a.kernel().len(), 4);
        let sub: Vec<Vec<GQ>> = rows.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, x)| x.clone()).collect();
        if !sub.is_empty() {
            prop_assert!(Matrix::from_rows(&sub).rank() <= r);
        }
        let mut more = rows.clone();
        more.push(rows[0].iter().zip(rows[rows.len() - 1].iter()).map(|(p, q)| p + q).collect());
        prop_assert_eq!(Matrix::from_rows(&more).rank(), r);
    }

    #[test]
    fn dsl_round_trip(p in poly()) {
        let coords = vec!["x".to_string(), "y".to_string()];
        let text = Expr::from_poly(&p).to_string();
        let e = parse_expr(&text, &coords, 1).unwrap();
        prop_assert_eq!(expr_to_poly(&e, &vars(), false).unwrap(), p, "text {}", text);
    }

    #[test]
    fn exponential_is_a_homomorphism(a in poly_in(var_list(&["x", "y"]), 2, 3), b in poly_in(var_list(&["x", "y"]), 2, 3)) {
        let v = var_list(&["x", "y"]);
        let a = &a.with_vars(&v) - &Poly::constant(&v, a.constant_term());
        let b = &b.with_vars(&v) - &Poly::constant(&v, b.constant_term());
        let (sa, sb) = (Series::new(&a, 6), Series::new(&b, 6));
        let lhs = sa.add(&sb).exp().unwrap();
        let rhs = sa.exp().unwrap().mul(&sb.exp().unwrap());
        prop_assert!(lhs.agrees_with(&rhs));
        let one = Series::new(&Poly::one(&v), 6);
        let unit = one.add(&sa);
        prop_assert!(unit.mul(&unit.inverse().unwrap()).agrees_with(&one));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn sampled_points_are_closed_under_the_involution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for spec in corpus::all() {
            let pt = random_complex_point(&spec, &mut rng).unwrap();
            let (z, zeta) = split_point(&spec, &pt);
            let zc: Vec<GQ> = z.iter().map(|x| x.conj()).collect();
            let zetac: Vec<GQ> = zeta.iter().map(|x| x.conj()).collect();
            let flipped = join_point(&spec, &zetac, &zc);
            for rho in &spec.rho {
                prop_assert!(rho.eval(&pt).is_zero(), "{} off the set", spec.name);
                prop_assert!(rho.eval(&flipped).is_zero(), "{} not closed", spec.name);
                // real defining functions: ρ(conj ζ, conj z) = conj ρ(z, ζ)
                prop_assert_eq!(rho.bar_swap(), rho.clone());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn segre_sets_are_nested(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for name in ["lewy", "ex223", "ex224", "ex315", "degen3", "rline"] {
            let spec = corpus::manifold(name).unwrap();
            let m = solve_normal(&spec, &spec.basepoint_or_origin(), 8).unwrap();
            let j0 = segre_dims(&m, &mut ChaCha8Rng::seed_from_u64(1)).j0;
            for j in 1..=j0 {
                let vals: HashMap<String, GQ> =
                    segre_param(&m, j).params.iter().map(|p| (p.clone(), random_coordinate(&mut rng))).collect();
                prop_assert!(inclusion_holds_at(&m, j, &vals), "{}: level {}", name, j);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reports_are_deterministic(seed in 0u64..1000, which in 0usize..4) {
        let (cmd, name) = [("segre", "ex224"), ("nondegen", "lewy"), ("witness", "ex315"), ("report", "degen3")][which];
        let s = seed.to_string();
        let a = cli::run(["crtool", cmd, name, "--json", "--seed", &s]);
        let b = cli::run(["crtool", cmd, name, "--json", "--seed", &s]);
        prop_assert_eq!(a.code, 0);
        prop_assert_eq!(a, b);
    }
}
