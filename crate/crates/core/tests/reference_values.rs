use flatfiber::arith::{dedekind_psi, euler_phi, fiber_invariants, sv_closed_form, SvKind};
use flatfiber::fiber::{build_fiber_origami, classify_special_points, verify, VertexKind};
use flatfiber::sl2z::{minus_id_involution, orbit};
use flatfiber::Origami;
use num_integer::Integer;
use num_rational::BigRational;

#[test]
fn degree_two_invariants() {
    let i = fiber_invariants(2).unwrap();
    assert_eq!(
        (i.cone_count, i.degenerate_count, i.square_count, i.euler_char, i.euler_char_quotient, i.spin_parity),
        (0, 4, 2, 0, 2, 1)
    );
}

#[test]
fn trivial_symmetric_constant_is_two() {
    assert_eq!(sv_closed_form(SvKind::DSymmetricCylinders, 1).unwrap(), BigRational::from_integer(2.into()));
}

#[test]
fn marked_torus_orbits_have_phi_psi_elements() {
    for n in 2..=7i64 {
        for (a, b) in [(1, 0), (0, 1), (1, 1), (2, 3)] {
            if a.gcd(&b).gcd(&n) != 1 {
                continue;
            }
            let o = Origami::marked_torus(n as usize, a % n, b % n).unwrap();
            let size = orbit(&o, 10_000).unwrap().elements.len() as u64;
            let m = n as u64;
            assert_eq!(size, euler_phi(m).unwrap() * dedekind_psi(m).unwrap(), "n={n} mark ({a},{b})");
        }
    }
}

#[test]
fn fiber_of_degree_three_has_the_involution() {
    let f = build_fiber_origami(3).unwrap();
    assert!(minus_id_involution(&f.origami).unwrap().is_some());
    assert!(f.origami.period_lattice().unwrap().is_scaled_standard(2.into()));
}

#[test]
fn fiber_suites_pass() {
    for d in 2..=5 {
        let v = verify(d).unwrap();
        let failed: Vec<_> = v.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        assert!(failed.is_empty(), "d={d}: {failed:?}");
    }
}

#[test]
fn special_point_census() {
    for (d, cones, degenerate, coincident) in [(2, 0, 4, 0), (3, 3, 7, 0), (4, 9, 13, 8)] {
        let f = build_fiber_origami(d).unwrap();
        let sp = classify_special_points(&f).unwrap();
        assert_eq!((sp.cone_count, sp.degenerate_count, sp.coincident_count), (cones, degenerate, coincident), "d={d}");
        for p in &sp.points {
            let want = match p.kind {
                VertexKind::Cone => 1,
                VertexKind::Degenerate => 2,
                VertexKind::Coincident => 0,
            };
            assert_eq!(p.m_plus, want, "d={d} vertex {}", p.vertex_id);
        }
    }
}
