//! Acceptance suite: one line per criterion, with its runtime limit.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use cr_invariants::cli;
use cr_invariants::corpus;
use cr_invariants::dsl::parse_manifold;
use cr_invariants::exactalg::{var_list, Monomial, Poly, Series, VarList, GQ};
use cr_invariants::exactalg::rank::random_coordinate;
use cr_invariants::finitetype::{hormander, DEFAULT_LENGTH_MAX};
use cr_invariants::geometry::{ambient_vars, chart_at, ideal_cofactors, join_point, random_complex_point, split_point};
use cr_invariants::homogeneous::{
    degenerate_selfmap, real_witness, vanishes_on_set, vanishing_coordinate, Degeneracy, Witness,
};
use cr_invariants::mapcheck::{
    algebraic_dependence, jacobian_invertible_at, leaf_chart, leaf_family, map_rank, verify_map, LeafFunction, MapSpec,
};
use cr_invariants::nondegen::{nondeg_report, LeviNumber, DEFAULT_ALPHA_BOUND, DEFAULT_DEGREE_BOUND, DEFAULT_TRIALS};
use cr_invariants::normalform::solve_normal;
use cr_invariants::segre::{implicitize_polys, inclusion_holds_at, segre_dims, segre_param};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(20240917)
}

fn gq(re: i64, im: i64) -> GQ {
    GQ::from_ints(re, im)
}

fn origin(n: usize) -> Vec<GQ> {
    vec![GQ::zero(); n]
}

fn ex223() -> Check {
    let spec = ok(corpus::manifold("ex223"))?;
    let m = ok(solve_normal(&spec, &spec.basepoint_or_origin(), 8))?;
    let chain = segre_dims(&m, &mut rng());
    ensure!(chain.dims[..4] == [0, 1, 2, 3], "dims {:?}", chain.dims);
    ensure!(chain.j0 == 3 && chain.minimal(), "j0 {} minimal {}", chain.j0, chain.minimal());
    let t = ok(hormander(&m, DEFAULT_LENGTH_MAX))?;
    ensure!(t.with_multiplicity == vec![2, 4] && t.minimal(), "hormander {:?}", t.with_multiplicity);
    let eqs = ok(implicitize_polys(&m, 2))?.ok_or("no elimination")?;
    let v = eqs[0].vars().clone();
    let expect = &Poly::var(&v, "w2") + &Poly::var(&v, "w1").pow(2).scale(&(&GQ::from_frac(1, 2) * &gq(0, 1)));
    ensure!(eqs == vec![expect.clone()], "N2 equations {:?}", eqs.iter().map(|e| e.to_string()).collect::<Vec<_>>());
    Ok(format!("dims {:?}, j0 3, hormander (2,4), N2: {} = 0", &chain.dims[..4], expect))
}

fn ex224() -> Check {
    let spec = ok(corpus::manifold("ex224"))?;
    let m = ok(solve_normal(&spec, &spec.basepoint_or_origin(), 8))?;
    let chain = segre_dims(&m, &mut rng());
    ensure!(chain.dims.len() >= 4 && chain.dims[2] == 2 && chain.dims[3] == 2, "dims {:?}", chain.dims);
    ensure!(chain.j0 == 2 && !chain.minimal(), "j0 {} minimal {}", chain.j0, chain.minimal());
    let t = ok(hormander(&m, DEFAULT_LENGTH_MAX))?;
    ensure!(t.with_multiplicity == vec![2] && !t.minimal(), "hormander {:?}", t.with_multiplicity);
    Ok(format!("dims {:?}, hormander [2], not minimal", chain.dims))
}

fn ex315() -> Check {
    let spec = ok(corpus::manifold("ex315"))?;
    let p = origin(4);
    let av = ambient_vars(&spec.coords);
    let w = ok(real_witness(&spec, &p, 4, 8, &mut rng()))?;
    match &w {
        Witness::Found { poly, .. } => ensure!(*poly == Poly::var(poly.vars(), "w3"), "witness {}", poly),
        Witness::Minimal => return Err("no witness".into()),
    }
    let half = GQ::from_frac(1, 2);
    let center = vec![GQ::zero(), GQ::zero(), GQ::zero(), half.clone()];
    let leaf = ok(leaf_chart(&spec, &[LeafFunction::poly(Poly::var(&av, "w3"))], &[half.clone()], &center, 8))?;
    let slice = leaf.slice.clone().ok_or("no slice")?;
    let sm = ok(solve_normal(&slice, &slice.basepoint_or_origin(), 8))?;
    let st = ok(hormander(&sm, DEFAULT_LENGTH_MAX))?;
    ensure!(st.minimal(), "leaf slice not minimal: {:?}", st.hormander);
    let h = ok(MapSpec::parse(corpus::map_text("ex315_twist").unwrap(), &spec.coords))?;
    let check = ok(verify_map(&h, &spec, &spec, &p, 10))?;
    ensure!(check.ok && check.order == 10, "twist residual {:?}", check.residual);
    let rank = ok(map_rank(&h, &p, 8, &mut rng()))?;
    ensure!(rank == 4, "map_rank {}", rank);
    let restricted = ok(leaf.restrict(&h))?;
    let mut degs = Vec::new();
    for (k, f) in restricted.iter().enumerate() {
        let cert = algebraic_dependence(f, &leaf.params, 2, 2, 8).ok_or(format!("no leaf certificate for component {}", k + 1))?;
        ensure!(cert.deg_x <= 2, "component {} has deg_X {}", k + 1, cert.deg_x);
        degs.push(cert.deg_x);
    }
    let full = ok(h.expand_at(&p, 8))?;
    ensure!(algebraic_dependence(&full[0], &spec.coords, 2, 2, 8).is_none(), "unexpected certificate for the full first component");
    Ok(format!("witness w3, leaf 1/2 minimal, twist ok at 10, rank 4, leaf deg_X {:?}, none unrestricted", degs))
}

fn worked_example() -> Check {
    let spec = ok(corpus::manifold("ex35"))?;
    let p = spec.basepoint_or_origin();
    let av = ambient_vars(&spec.coords);
    let z1 = Poly::var(&av, "Z1");
    let z3 = Poly::var(&av, "Z3");
    let cz1 = Poly::var(&av, "conj(Z1)");
    let i = gq(0, 1);
    // h1
    let h1 = z3.scale(&-i.clone());
    match ok(real_witness(&spec, &p, 4, 8, &mut rng()))? {
        Witness::Found { poly, .. } => {
            let shifted = &poly.with_vars(&av) - &Poly::constant(&av, poly.constant_term());
            ensure!(shifted == h1, "witness {}", poly)
        }
        Witness::Minimal => return Err("no witness".into()),
    }
    // 2 Z1 (h2 - Re Z1) = Z1^2 - i Z3 - Z1 (Z1 + conj Z1)
    let num = &z1.pow(2) - &z3.scale(&i);
    let g = &num - &(&z1 * &(&z1 + &cz1));
    ensure!(g == &h1 - &(&z1 * &cz1), "identity {}", g);
    ensure!(ideal_cofactors(&g, &spec.rho, 1).is_some(), "{} not in the ideal", g);
    ensure!(ok(vanishes_on_set(&g, &spec, &p, 8))?.ok, "{} does not vanish on the set", g);
    // leaves at r = 1 against Z1 = c2 + (c2^2 - c1)^(1/2), Z3 = i c1
    let h2 = LeafFunction { num: num.clone(), den: z1.scale(&gq(2, 0)) };
    let order = 6;
    let fam = ok(leaf_family(&spec, &[LeafFunction::poly(h1.clone()), h2.clone()], &p, order))?;
    let lv = fam.local["Z1"].vars().clone();
    let dc1 = Poly::var(&lv, "dc1");
    let dc2 = Poly::var(&lv, "dc2");
    let root = ok(Series::new(&(&dc1 - &dc2.pow(2)), order).binomial_pow(1, 2))?;
    let expect_z1 = &(&dc2 + &root.poly().scale(&i)) - &Poly::constant(&lv, i.clone());
    ensure!(fam.local["Z1"].truncate(order) == expect_z1.truncate(order), "Z1 displacement {}", fam.local["Z1"]);
    ensure!(fam.local["Z3"].with_vars(&lv) == dc1.scale(&i), "Z3 displacement {}", fam.local["Z3"]);
    let c0 = vec![GQ::from(1), GQ::zero()];
    let leaf = ok(leaf_chart(&spec, &[LeafFunction::poly(h1), h2], &c0, &p, order))?;
    let class = leaf.slice_class.clone().ok_or("no slice at c = (1, 0)")?;
    ensure!(class.generic, "slice at c = (1, 0) is not generic");
    // the nonalgebraic map
    let h = ok(MapSpec::parse(corpus::map_text("ex35").unwrap(), &spec.coords))?;
    let check = ok(verify_map(&h, &spec, &spec, &p, 8))?;
    ensure!(check.ok && h.nonalgebraic, "map residual {:?}", check.residual);
    Ok("h1 = -i*Z3, h2 identity in the ideal, leaf family matches the closed form, map tangent at 8".into())
}

fn nondegeneracy() -> Check {
    let mut lines = Vec::new();
    for spec in corpus::all() {
        let m = ok(solve_normal(&spec, &spec.basepoint_or_origin(), 8))?;
        let r = nondeg_report(&m, DEFAULT_DEGREE_BOUND, DEFAULT_ALPHA_BOUND, DEFAULT_TRIALS, &mut rng());
        let finite = matches!(r.levi_number, LeviNumber::Finite(_));
        let ef = r.essentially_finite.is_yes();
        ensure!(
            finite == r.witness.is_none() && finite == ef,
            "{}: levi {:?}, witness {}, essentially finite {:?}",
            spec.name,
            r.levi_number,
            r.witness.is_some(),
            r.essentially_finite
        );
        if let LeviNumber::Finite(l) = r.levi_number {
            ensure!(l as usize <= m.n(), "{}: levi {} above N - d", spec.name, l);
        }
        if spec.name == "lewy" {
            ensure!(r.levi_number == LeviNumber::Finite(1) && ef, "lewy: {:?}", r.levi_number);
        }
        if spec.name == "degen3" {
            let x = r.witness.as_ref().ok_or("degen3: no witness")?;
            let expect: Vec<bool> = x.names.iter().map(|v| v == "z2").collect();
            let got: Vec<bool> = x.coeffs.iter().map(|c| !c.is_zero()).collect();
            ensure!(got == expect && x.coeffs.iter().all(|c| c.is_constant()), "degen3 witness {}", x);
            ensure!(!ef, "degen3 essentially finite");
        }
        lines.push(format!("{}:{}", spec.name, if finite { "finite" } else { "degenerate" }));
    }
    Ok(lines.join(" "))
}

fn orbit_dimension() -> Check {
    let mut violations = Vec::new();
    for spec in corpus::all() {
        let m = ok(solve_normal(&spec, &spec.basepoint_or_origin(), 8))?;
        let chain = segre_dims(&m, &mut rng());
        let t = ok(hormander(&m, DEFAULT_LENGTH_MAX))?;
        if chain.orbit_dim != m.n() + t.r {
            violations.push(format!("{}: d_j0 {} vs n + r {}", spec.name, chain.orbit_dim, m.n() + t.r));
        }
        if spec.name == "rline" {
            ensure!(chain.orbit_dim == 0 && m.n() == 0 && t.r == 0, "rline: {:?}", chain.dims);
        }
    }
    ensure!(violations.is_empty(), "{}", violations.join("; "));
    Ok(format!("{} manifolds, 0 violations", corpus::all().len()))
}

fn converse() -> Check {
    let spec = ok(parse_manifold("manifold hyperplane in C^3\nvars z w u\neq Im(w) = |z|^2\neq Re(u) = 0\neq Im(u) = 0\n"))?;
    let p = origin(3);
    let k = ok(vanishing_coordinate(&spec, &p, 6))?.ok_or("set not found inside a hyperplane")?;
    let sm = ok(degenerate_selfmap(&spec, &p, &Degeneracy::Hyperplane(k), 10))?;
    let chart = ok(chart_at(&spec, &p, 10))?;
    ensure!(sm.check.ok && chart.exact && chart.local["u"].is_zero(), "hyperplane map residual {:?}", sm.check.residual);
    let spec = ok(corpus::manifold("ex316"))?;
    let h = ok(MapSpec::parse(corpus::map_text("ex316_twist").unwrap(), &spec.coords))?;
    let check = ok(verify_map(&h, &spec, &spec, &spec.basepoint_or_origin(), 10))?;
    ensure!(check.ok && check.order == 10, "twist residual {:?}", check.residual);
    ensure!(ok(jacobian_invertible_at(&h, &origin(4), 4))?, "Jacobian singular at 0");
    Ok(format!("{} exact, ex316 twist tangent at 10, Jacobian invertible at 0", sm.components[k]))
}

fn random_poly<R: Rng>(v: &VarList, rng: &mut R) -> Poly {
    let terms: Vec<(Monomial, GQ)> = (0..rng.gen_range(1..5))
        .map(|_| ((0..v.len()).map(|_| rng.gen_range(0..3u16)).collect(), random_coordinate(rng)))
        .collect();
    Poly::from_terms(v, terms)
}

fn properties() -> Check {
    let mut r = rng();
    let v = var_list(&["x", "y", "conj(x)", "conj(y)"]);
    for case in 0..100 {
        let (a, b, c) = (random_poly(&v, &mut r), random_poly(&v, &mut r), random_poly(&v, &mut r));
        ensure!(&(&a * &b) * &c == &a * &(&b * &c), "associativity, case {}", case);
        ensure!(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), "distributivity, case {}", case);
        ensure!(&a * &b == &b * &a, "commutativity, case {}", case);
        ensure!((&a * &b).bar_swap() == &a.bar_swap() * &b.bar_swap() && a.bar_swap().bar_swap() == a, "involution, case {}", case);
    }
    let specs = corpus::all();
    for spec in &specs {
        for _ in 0..50 {
            let pt = random_complex_point(spec, &mut r).ok_or(format!("{}: no sample", spec.name))?;
            let (z, zeta) = split_point(spec, &pt);
            let flipped = join_point(spec, &zeta.iter().map(|x| x.conj()).collect::<Vec<_>>(), &z.iter().map(|x| x.conj()).collect::<Vec<_>>());
            ensure!(spec.rho.iter().all(|f| f.eval(&pt).is_zero() && f.eval(&flipped).is_zero()), "{}: involution leaves the set", spec.name);
        }
        let m = ok(solve_normal(spec, &spec.basepoint_or_origin(), 8))?;
        let chain = segre_dims(&m, &mut r);
        for j in 1..=chain.j0 {
            let lvl = segre_param(&m, j);
            for _ in 0..30 {
                let vals: HashMap<String, GQ> = lvl.params.iter().map(|q| (q.clone(), random_coordinate(&mut r))).collect();
                ensure!(inclusion_holds_at(&m, j, &vals), "{}: N{} not inside N{}", spec.name, j, j + 1);
            }
        }
    }
    for name in ["lewy", "ex223", "ex315", "degen3"] {
        let a = cli::run(["crtool", "report", name, "--json", "--seed", "7"]);
        let b = cli::run(["crtool", "report", name, "--json", "--seed", "7"]);
        ensure!(a.code == 0 && a == b, "{}: reports differ", name);
    }
    Ok(format!("100 ring cases, 50 points x {} manifolds, inclusion chains, identical reports", specs.len()))
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Check)> = vec![
        ("ex223 Segre chain and type", 5, ex223),
        ("ex224 maximal Segre set", 5, ex224),
        ("ex315 leaves and twist", 30, ex315),
        ("Z1,Z3 worked example", 60, worked_example),
        ("nondegeneracy coherence", 20, nondegeneracy),
        ("orbit dimension d_j0 = n + r", 20, orbit_dimension),
        ("nonalgebraic self-maps", 20, converse),
        ("property suites", 300, properties),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let dt = t.elapsed();
        let in_time = dt <= Duration::from_secs(limit);
        let (status, detail) = match (&r, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("too slow; {}", d)),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{} [{}] {} ({:.2}s, limit {}s): {}", status, k + 1, name, dt.as_secs_f64(), limit, detail);
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
