mod common;

use deloc_core::cochain::ops::{cyclic_coboundary, cyclic_symmetrize, group_coboundary, periodicity_s};
use deloc_core::cochain::random::random_cochain;
use deloc_core::cochain::Flavor;
use deloc_core::group::{Group, GroupElement};
use deloc_core::io::{cochain_to_json, load_cochain};
use deloc_core::pairings::{eta_invariant, invert, sign_sum, trace_cocycle};
use deloc_core::polygrowth::Retraction;
use deloc_core::spectral::{delocalized_trace, extend_cocycle_eval, regular_representation, AlgebraElement, Mat};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FINITE: [&str; 6] = ["cyclic:3", "cyclic:4", "s3", "d4", "cyclic:2*cyclic:3", "cyclic:2*s3"];

fn random_element(rng: &mut ChaCha8Rng, g: &Group, n: usize) -> AlgebraElement {
    let mut a = AlgebraElement::zero(n);
    for x in g.elements().unwrap() {
        if rng.random_bool(0.6) {
            let m = Mat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            a.add_term(x, &m);
        }
    }
    a
}

fn max_abs(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn heis(a: i64, b: i64, c: i64) -> GroupElement {
    GroupElement::Heis(a, b, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn heisenberg_group_laws(a in -5i64..5, b in -5i64..5, c in -5i64..5, d in -5i64..5, e in -5i64..5, f in -5i64..5) {
        let g = Group::heisenberg();
        let x = heis(a, b, c);
        let y = heis(d, e, f);
        let z = heis(b, d, a);
        let xy = g.multiply(&x, &y).unwrap();
        prop_assert_eq!(xy.clone(), heis(a + d, b + e, c + f + a * e));
        prop_assert_eq!(g.multiply(&xy, &z).unwrap(), g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(g.multiply(&x, &g.inverse(&x).unwrap()).unwrap(), g.identity());
    }

    #[test]
    fn word_metric_is_a_metric(a in -2i64..3, b in -2i64..3, c in -2i64..3, d in -2i64..3) {
        let g = Group::heisenberg().with_search_radius(16);
        let x = heis(a, b, 0);
        let y = heis(c, d, a * d);
        let dxy = g.distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, g.distance(&y, &x).unwrap());
        prop_assert!(dxy <= g.word_length(&x).unwrap() + g.word_length(&y).unwrap());
        // Left invariance.
        let s = heis(1, -1, 2);
        prop_assert_eq!(g.distance(&g.multiply(&s, &x).unwrap(), &g.multiply(&s, &y).unwrap()).unwrap(), dxy);
    }

    #[test]
    fn coboundary_squares_vanish(seed in any::<u64>(), gi in 0usize..6, n in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let cl = g.conjugacy_class(&g.generators()[0], 8).unwrap();
        let phi = random_cochain(&mut rng, &g, n, Flavor::CyclicDelocalized, Some(&cl), 3).unwrap();
        let b = cyclic_coboundary(&g, &phi).unwrap();
        prop_assert!(cyclic_coboundary(&g, &b).unwrap().is_zero());
        let psi = random_cochain(&mut rng, &g, n, Flavor::HomogeneousGroup, None, 3).unwrap();
        prop_assert!(group_coboundary(&g, &group_coboundary(&g, &psi).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn regular_representation_is_a_star_homomorphism(seed in any::<u64>(), gi in 0usize..6, n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let a = random_element(&mut rng, &g, n);
        let b = random_element(&mut rng, &g, n);
        let ra = regular_representation(&g, &a).unwrap();
        let rb = regular_representation(&g, &b).unwrap();
        let rab = regular_representation(&g, &a.mul(&g, &b).unwrap()).unwrap();
        prop_assert!(max_abs(&(&ra * &rb - rab)) < 1e-12);
        let rstar = regular_representation(&g, &a.adjoint(&g).unwrap()).unwrap();
        prop_assert!(max_abs(&(ra.adjoint() - rstar)) < 1e-12);
    }

    #[test]
    fn delocalized_trace_is_a_trace(seed in any::<u64>(), gi in 0usize..6, n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let elems = g.elements().unwrap();
        let cl = g.conjugacy_class(&elems[rng.random_range(0..elems.len())], 8).unwrap();
        let a = random_element(&mut rng, &g, n);
        let b = random_element(&mut rng, &g, n);
        let ab = delocalized_trace(&a.mul(&g, &b).unwrap(), &cl);
        let ba = delocalized_trace(&b.mul(&g, &a).unwrap(), &cl);
        prop_assert!((ab - ba).norm() < 1e-12);
    }

    #[test]
    fn functional_calculus_is_multiplicative(seed in any::<u64>(), gi in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::random_model(&mut rng, FINITE[gi], 1 + gi % 2);
        let f = |x: f64| Complex64::new(x.sin(), x);
        let h = |x: f64| Complex64::new((-x * x).exp(), 0.5);
        let prod = b.model.functional_calculus(f).mul(&b.group, &b.model.functional_calculus(h)).unwrap();
        let direct = b.model.functional_calculus(|x| f(x) * h(x));
        prop_assert!(prod.distance(&b.group, &direct) < 1e-10);
        // The identity function gives D back.
        prop_assert!(b.model.functional_calculus(|x| Complex64::new(x, 0.0)).distance(&b.group, &b.model.d) < 1e-10);
    }

    #[test]
    fn cyclic_cochains_change_sign_under_rotation(seed in any::<u64>(), gi in 0usize..6, n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let phi = cyclic_symmetrize(&random_cochain(&mut rng, &g, n, Flavor::Cyclic, None, 4).unwrap());
        let args: Vec<AlgebraElement> = (0..=n).map(|_| random_element(&mut rng, &g, 1)).collect();
        let mut rotated = args[1..].to_vec();
        rotated.push(args[0].clone());
        let a = extend_cocycle_eval(&g, &phi, &args, false).unwrap();
        let b = extend_cocycle_eval(&g, &phi, &rotated, false).unwrap();
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - b * s).norm() < 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn periodicity_preserves_cocycles(seed in any::<u64>(), gi in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let cl = g.conjugacy_class(&g.generators()[0], 8).unwrap();
        let phi = trace_cocycle(&g, &cl);
        let s = periodicity_s(&g, &phi, true).unwrap();
        prop_assert!(cyclic_coboundary(&g, &s).unwrap().is_zero());
        let psi = random_cochain(&mut rng, &g, 0, Flavor::CyclicDelocalized, Some(&cl), 2).unwrap();
        let bpsi = cyclic_coboundary(&g, &psi).unwrap();
        // bψ is a cocycle, so S(bψ) is one too.
        prop_assert!(cyclic_coboundary(&g, &periodicity_s(&g, &bpsi, true).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn cochain_json_round_trip(seed in any::<u64>(), gi in 0usize..6, n in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let name = FINITE[gi];
        let g = Group::from_shorthand(name).unwrap();
        let cl = g.conjugacy_class(&g.generators()[0], 8).unwrap();
        let phi = random_cochain(&mut rng, &g, n, Flavor::CyclicDelocalized, Some(&cl), 4).unwrap();
        let r = deloc_core::group::GroupRef::Shorthand(name.into());
        let text = cochain_to_json(&r, &g, &phi, Some(&cl));
        let back = load_cochain(&text, 8).unwrap();
        prop_assert_eq!(&back.cochain, &phi);
        prop_assert_eq!(cochain_to_json(&r, &back.group, &back.cochain, back.class.as_ref()), text);
    }

    #[test]
    fn retraction_fixes_the_centralizer_and_halves_norms(a in -2i64..3, b in -2i64..3) {
        let g = Group::free_abelian(2).with_search_radius(16);
        let gamma = GroupElement::Lattice(vec![1, 0]);
        let r = Retraction::new(&g, &gamma, 8).unwrap();
        let x = GroupElement::Lattice(vec![a, b]);
        prop_assert_eq!(r.f(&x).unwrap(), x);
        let h = Group::heisenberg().with_search_radius(24);
        let r = Retraction::new(&h, &heis(1, 0, 0), 8).unwrap();
        let y = heis(a, b, a * b);
        let fy = r.f(&y).unwrap();
        prop_assert!(r.in_centralizer(&fy).unwrap());
        prop_assert!(h.word_length(&fy).unwrap() <= 2 * h.word_length(&y).unwrap());
        prop_assert!(h.distance(&fy, &y).unwrap() <= h.word_length(&y).unwrap());
    }

    #[test]
    fn eta_of_the_trace_is_the_sign_sum(seed in any::<u64>(), gi in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = common::random_model(&mut rng, FINITE[gi], 1);
        let eta = eta_invariant(&trace_cocycle(&b.group, &b.class), &b.model, 0, 1e-10).unwrap().value;
        prop_assert!((eta - common::asymmetry(&b)).norm() < 1e-8);
        prop_assert!((sign_sum(&b.model, &b.class) - common::asymmetry(&b)).norm() < 1e-10);
    }

    #[test]
    fn inverse_is_two_sided(seed in any::<u64>(), gi in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Group::from_shorthand(FINITE[gi]).unwrap();
        let mut a = random_element(&mut rng, &g, 1).scaled(Complex64::new(0.2, 0.0));
        a.unit = Complex64::new(1.0, 0.0);
        let inv = invert(&g, &a).unwrap();
        let one = AlgebraElement::unit(1);
        prop_assert!(a.mul(&g, &inv).unwrap().distance(&g, &one) < 1e-10);
        prop_assert!(inv.mul(&g, &a).unwrap().distance(&g, &one) < 1e-10);
    }
}
