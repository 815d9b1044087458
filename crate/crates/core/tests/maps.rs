use cr_invariants::corpus;
use cr_invariants::exactalg::GQ;
use cr_invariants::homogeneous::{find_selfmap, real_witness, Witness};
use cr_invariants::mapcheck::{jacobian_invertible_at, verify_map, MapSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn twist(name: &str, map: &str) -> (cr_invariants::geometry::ManifoldSpec, MapSpec) {
    let spec = corpus::manifold(name).unwrap();
    let h = MapSpec::parse(corpus::map_text(map).unwrap(), &spec.coords).unwrap();
    (spec, h)
}

#[test]
fn composed_twists_stay_tangent() {
    for (name, map) in [("ex315", "ex315_twist"), ("ex316", "ex316_twist")] {
        let (spec, h) = twist(name, map);
        let p = spec.basepoint_or_origin();
        let hh = h.then(&h).unwrap();
        let c = verify_map(&hh, &spec, &spec, &p, 8).unwrap();
        assert!(c.ok, "{}: {:?}", name, c.residual);
        // composing with the identity changes nothing
        let id = MapSpec::identity(&spec.coords);
        assert_eq!(verify_map(&h.then(&id).unwrap(), &spec, &spec, &p, 8).unwrap(), verify_map(&h, &spec, &spec, &p, 8).unwrap());
    }
}

#[test]
fn wrong_twist_is_caught_with_a_residual() {
    let spec = corpus::manifold("ex315").unwrap();
    // the twist must use the real coordinate w3, not w1
    let h = MapSpec::parse("z*exp(i*w1)\nw1\nw2\nw3\n", &spec.coords).unwrap();
    let c = verify_map(&h, &spec, &spec, &spec.basepoint_or_origin(), 6).unwrap();
    assert!(!c.ok);
    assert!(c.residual.is_some());
}

#[test]
fn witness_driven_selfmaps_are_tangent_and_invertible() {
    for name in ["ex315", "ex316", "ex317", "ex35", "rline"] {
        let spec = corpus::manifold(name).unwrap();
        let p = spec.basepoint_or_origin();
        let Witness::Found { poly, .. } = real_witness(&spec, &p, 4, 8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap() else {
            panic!("{}: no witness", name)
        };
        let m = find_selfmap(&spec, &p, &poly, 8).unwrap().unwrap_or_else(|| panic!("{}: no self-map", name));
        assert!(m.check.ok && m.jacobian_invertible && m.nonalgebraic, "{}", name);
    }
}

#[test]
fn twist_jacobian_at_singular_origin() {
    let (_, h) = twist("ex316", "ex316_twist");
    assert!(jacobian_invertible_at(&h, &vec![GQ::from(0); 4], 4).unwrap());
}

#[test]
fn generic_ranks_agree_across_independent_samples() {
    use cr_invariants::mapcheck::map_rank;
    use cr_invariants::nondegen::levi_number;
    use cr_invariants::normalform::solve_normal;
    use cr_invariants::segre::segre_dims;
    for spec in corpus::all() {
        let m = solve_normal(&spec, &spec.basepoint_or_origin(), 8).unwrap();
        let dims: Vec<Vec<usize>> = (11..14).map(|s| segre_dims(&m, &mut ChaCha8Rng::seed_from_u64(s)).dims).collect();
        assert!(dims.windows(2).all(|w| w[0] == w[1]), "{}: {:?}", spec.name, dims);
        let levi: Vec<_> = (11..14).map(|s| levi_number(&m, 1, &mut ChaCha8Rng::seed_from_u64(s))).collect();
        assert!(levi.windows(2).all(|w| w[0] == w[1]), "{}: {:?}", spec.name, levi);
    }
    for (name, map) in [("ex315", "ex315_twist"), ("ex316", "ex316_twist"), ("ex35", "ex35")] {
        let (spec, h) = twist(name, map);
        let p = spec.basepoint_or_origin();
        let r: Vec<usize> = (11..14).map(|s| map_rank(&h, &p, 8, &mut ChaCha8Rng::seed_from_u64(s)).unwrap()).collect();
        assert_eq!(r, vec![4, 4, 4], "{}", name);
    }
}
