use kdvlab_core::critical::*;
use kdvlab_core::numerics::C64;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn cubic(p: C64, x: C64) -> C64 {
    x * x * x - x + p
}

#[test]
fn n_below_ten_has_two_members() {
    let v: Vec<f64> = enum_lattice_set(SetTag::N, 10.0).iter().map(|c| c.value).collect();
    assert_eq!(v.len(), 2);
    assert!((v[0] - TAU).abs() < 1e-14);
    assert!((v[1] - TAU * (7.0f64 / 3.0).sqrt()).abs() < 1e-12);
}

#[test]
fn transcendental_witnesses_are_roots_of_the_cubic() {
    let bx = SearchBox { re_max: 8.0, im_max: 16.0 };
    for branch in [Branch::G, Branch::Gprime] {
        let scan = solve_transcendental_set(branch, bx, 0.5);
        assert!(!scan.lengths.is_empty(), "{branch:?}");
        for w in scan.lengths.windows(2) {
            assert!(w[0].value < w[1].value);
        }
        for cl in &scan.lengths {
            let Witness::Transcendental(gw) = &cl.witness else { panic!("lattice witness") };
            assert!((cl.recompute() - cl.value).abs() <= 1e-12 * cl.value);
            let (mus, p) = gw.mus_and_p();
            let scale = 1.0 + p.norm();
            for mu in mus {
                assert!(cubic(p, mu).norm() <= 1e-8 * scale, "{branch:?} L = {}: {mu}", cl.value);
            }
            let r = g_system(branch, [gw.a, gw.b]).unwrap();
            assert!(r[0].norm().max(r[1].norm()) <= 1e-8, "{r:?}");
        }
    }
}

#[test]
fn verdicts_for_every_case_at_two_pi() {
    for id in 1u8..=12 {
        let v = criticality(TAU, id, 1e-9, None).unwrap();
        // (1, 1) is admissible in both N and N3
        let in_n = case_sets(id).unwrap().iter().any(|t| matches!(t, SetTag::N | SetTag::N3));
        assert_eq!(v.critical, in_n, "case {id}");
    }
    assert!(criticality(TAU, 13, 1e-9, None).unwrap_err().is_validation());
    assert!(criticality(-1.0, 1, 1e-9, None).unwrap_err().is_validation());
}

proptest! {
    #[test]
    fn lattice_witnesses_reproduce_their_lengths(lmax in 1.0f64..60.0) {
        for tag in [SetTag::N, SetTag::N3, SetTag::R] {
            let set = enum_lattice_set(tag, lmax);
            for w in set.windows(2) {
                prop_assert!(w[0].value < w[1].value);
            }
            for c in &set {
                prop_assert!(c.value <= lmax);
                prop_assert!((c.recompute() - c.value).abs() <= 1e-12 * c.value);
                prop_assert!(member_lattice(c.value, tag, 1e-9).member);
            }
        }
    }

    #[test]
    fn enumeration_is_monotone_in_lmax(a in 1.0f64..40.0, b in 1.0f64..40.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        for tag in [SetTag::N, SetTag::N3, SetTag::R] {
            let small: Vec<f64> = enum_lattice_set(tag, lo).iter().map(|c| c.value).collect();
            let large: Vec<f64> = enum_lattice_set(tag, hi).iter().map(|c| c.value).collect();
            prop_assert_eq!(&large[..small.len()], &small[..]);
        }
    }

    #[test]
    fn n_witness_roots_are_real_roots_of_the_cubic(k in 1i64..8, l in 1i64..8) {
        let w = n_witness(k, l);
        let p = C64::new(w.p, 0.0);
        prop_assert!(w.mu[0] < w.mu[1] && w.mu[1] < w.mu[2]);
        prop_assert!((w.mu.iter().sum::<f64>()).abs() < 1e-12);
        for mu in w.mu {
            prop_assert!(cubic(p, C64::new(mu, 0.0)).norm() < 1e-12);
        }
        prop_assert!(member_lattice(w.l, SetTag::N, 1e-9).member);
    }

    #[test]
    fn points_off_the_sets_are_not_members(x in 1.0f64..30.0) {
        for tag in [SetTag::N, SetTag::N3, SetTag::R] {
            let set = enum_lattice_set(tag, x + 1.0);
            let d = set.iter().map(|c| (c.value - x).abs()).fold(f64::INFINITY, f64::min);
            let m = member_lattice(x, tag, 1e-9);
            prop_assert_eq!(m.member, d <= 1e-9);
            if !m.member && d.is_finite() {
                prop_assert!((m.distance - d).abs() <= 1e-12 * x);
            }
        }
    }
}
