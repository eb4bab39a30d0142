use flatfiber::arith::{dedekind_psi, euler_phi, moebius_recovered_phi, phi_psi_product};
use flatfiber::counting::{count_cylinders, count_saddle_connections, oracle};
use flatfiber::cover::{build, CoverDatum};
use flatfiber::geometry::{direction_cylinders, horizontal_cylinders};
use flatfiber::sl2z::{act, act_s, orbit, Letter, MatrixSL2Z};
use flatfiber::{Origami, Perm};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use proptest::prelude::*;

fn perm(n: usize) -> impl Strategy<Value = Perm> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Perm::new(v).unwrap())
}

fn origami() -> impl Strategy<Value = Origami> {
    (1..=7usize).prop_flat_map(|n| (perm(n), perm(n))).prop_filter_map("disconnected", |(h, v)| {
        let o = Origami::new(h, v, Rational64::from_integer(1), vec![]).ok()?;
        o.is_connected().then_some(o)
    })
}

/// Origami with marks `0` and `1` on two distinct vertices.
fn marked_origami() -> impl Strategy<Value = Origami> {
    (origami(), any::<prop::sample::Index>(), any::<prop::sample::Index>()).prop_filter_map(
        "marks on one vertex",
        |(o, i, j)| {
            let verts = o.vertices();
            let (a, b) = (i.index(verts.len()), j.index(verts.len()));
            (a != b).then(|| o.with_marks(vec![(0, verts[a][0]), (1, verts[b][0])]).unwrap())
        },
    )
}

fn letter() -> impl Strategy<Value = Letter> {
    prop_oneof![(-4i64..=4).prop_map(Letter::T), (0u8..4).prop_map(Letter::S)]
}

fn matrix() -> impl Strategy<Value = MatrixSL2Z> {
    prop::collection::vec(letter(), 0..6).prop_map(|w| MatrixSL2Z::from_word(&w))
}

fn direction() -> impl Strategy<Value = (i64, i64)> {
    (-6i64..=6, -6i64..=6).prop_filter("not primitive", |&(p, q)| p.gcd(&q) == 1)
}

fn same(a: &Origami, b: &Origami) -> bool {
    a.canonical_form().unwrap() == b.canonical_form().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabeling_changes_nothing(
        (o, sigma) in marked_origami().prop_flat_map(|o| { let n = o.n_squares(); (Just(o), perm(n)) })
    ) {
        let marks = o.marks().iter().map(|&(l, q)| (l, sigma.apply(q))).collect();
        let r = Origami::new(sigma.conjugate(o.h()), sigma.conjugate(o.v()), o.unit(), marks).unwrap();
        prop_assert!(same(&o, &r));
        prop_assert_eq!(o.genus().unwrap(), r.genus().unwrap());
        prop_assert_eq!(
            horizontal_cylinders(&o).unwrap().width_height_multiset(),
            horizontal_cylinders(&r).unwrap().width_height_multiset()
        );
        prop_assert_eq!(orbit(&o, 100_000).unwrap().elements.len(), orbit(&r, 100_000).unwrap().elements.len());
    }

    #[test]
    fn text_round_trip(o in marked_origami()) {
        let back = Origami::parse_text(&o.to_text()).unwrap();
        prop_assert!(same(&o, &back));
    }

    #[test]
    fn words_reproduce_matrices(m in matrix()) {
        prop_assert_eq!(MatrixSL2Z::from_word(&m.word()), m);
    }

    #[test]
    fn action_is_a_left_action(o in marked_origami(), a in matrix(), b in matrix()) {
        let ab = act(&o, &a.mul(&b)).unwrap();
        let a_b = act(&act(&o, &b).unwrap(), &a).unwrap();
        prop_assert!(same(&ab, &a_b));
    }

    #[test]
    fn directions_are_equivariant(o in origami(), a in matrix(), (p, q) in direction()) {
        let (p2, q2) = a.apply(p, q);
        let before = direction_cylinders(&o, p, q).unwrap().width_height_multiset();
        let after = direction_cylinders(&act(&o, &a).unwrap(), p2, q2).unwrap().width_height_multiset();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn cylinders_tile_the_surface(o in origami(), (p, q) in direction()) {
        let dec = direction_cylinders(&o, p, q).unwrap();
        prop_assert_eq!(dec.cylinders.iter().map(|c| c.area()).sum::<usize>(), o.n_squares());
        for c in dec.cylinders.iter().filter(|c| !c.top.is_empty()) {
            prop_assert_eq!(c.top.iter().map(|s| s.length).sum::<usize>(), c.width);
        }
    }

    #[test]
    fn counts_are_rotation_invariant(o in marked_origami(), t in 1i64..=6) {
        let t = Rational64::from_integer(t);
        let r = act_s(&o);
        prop_assert_eq!(count_cylinders(&o, t).unwrap(), count_cylinders(&r, t).unwrap());
        prop_assert_eq!(
            count_saddle_connections(&o, (0, 1), t).unwrap(),
            count_saddle_connections(&r, (0, 1), t).unwrap()
        );
    }

    #[test]
    fn marked_torus_matches_lattice_oracle(n in 2i64..=6, a in 0i64..6, b in 0i64..6, t in 1i64..=12) {
        let (a, b) = (a % n, b % n);
        prop_assume!((a, b) != (0, 0));
        let o = Origami::marked_torus(n as usize, a, b).unwrap();
        let t = Rational64::new(t, 2);
        prop_assert_eq!(count_cylinders(&o, t).unwrap(), oracle::marked_torus_cylinders(n, a, b, t));
        prop_assert_eq!(
            count_saddle_connections(&o, (0, 1), t).unwrap(),
            oracle::marked_torus_saddles(n, a, b, t)
        );
    }

    #[test]
    fn covers_satisfy_riemann_hurwitz(
        (h, v, c1) in (2..=4usize).prop_flat_map(|d| (perm(d), perm(d), perm(d))),
        n in 2i64..=3,
        a in 0i64..3,
        b in 0i64..3,
    ) {
        let (a, b) = (a % n, b % n);
        prop_assume!((a, b) != (0, 0));
        let d = h.len();
        let Ok(datum) = CoverDatum::new(h, v, c1, (a, b), n) else { return Ok(()) };
        let o = build(&datum).unwrap();
        prop_assert_eq!(o.n_squares(), d * (n * n) as usize);
        let ram = |p: &Perm| (d - p.cycles().len()) as i64;
        prop_assert_eq!(o.euler_char(), -(ram(&datum.c0) + ram(&datum.c1)));
    }

    #[test]
    fn phi_psi_identities(n in 1u64..200_000) {
        let pp = BigRational::from_integer(BigInt::from(euler_phi(n).unwrap() * dedekind_psi(n).unwrap()));
        prop_assert_eq!(phi_psi_product(n), pp);
    }

    #[test]
    fn moebius_recovers_phi(n in 1u64..3_000) {
        let phi = BigRational::from_integer(BigInt::from(euler_phi(n).unwrap()));
        prop_assert_eq!(moebius_recovered_phi(n).unwrap(), phi);
    }
}
