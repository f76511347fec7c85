mod common;

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use deloc_core::cochain::ops::{
    build_delocalized_cocycle, chain_homotopy_p, cyclic_coboundary, group_coboundary, periodicity_s, relative_projection,
    skew_symmetrize,
};
use deloc_core::cochain::random::random_cochain;
use deloc_core::cochain::{Cochain, Flavor};
use deloc_core::group::{Group, GroupElement};
use deloc_core::pairings::{
    chern_character, connecting_path, determinant_tau, eta_integrand, eta_invariant, rho_path, spectrum_eta,
    trace_cocycle, verify_transgression,
};
use deloc_core::polygrowth::{growth_bound_estimate, simplex_map_psi, Retraction, SimplexPoint};
use deloc_core::rational::{qc_frac, qc_int, QC};
use deloc_core::quadrature::QuadConfig;
use deloc_core::spectral::{
    eigendecompose, load_spectrum, regular_representation, u_t, udot_uinv, AlgebraElement, Mode, SpectrumFile,
};
use deloc_core::verify::{random_cyclic_delocalized, z2_half_projection, z2_model};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Word lengths by breadth-first search from scratch.
fn bfs(g: &Group, radius: usize) -> HashMap<GroupElement, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(g.identity(), 0);
    queue.push_back(g.identity());
    while let Some(x) = queue.pop_front() {
        let d = dist[&x];
        if d == radius {
            continue;
        }
        for s in g.generators() {
            let y = g.multiply(&x, s).unwrap();
            if !dist.contains_key(&y) {
                dist.insert(y.clone(), d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

#[test]
fn word_lengths_match_bfs() {
    let h = Group::heisenberg();
    let lengths = bfs(&h, 6);
    assert_eq!(lengths[&GroupElement::Heis(0, 0, 1)], 4);
    for (x, d) in lengths.iter().filter(|(_, &d)| d <= 4) {
        assert_eq!(h.word_length(x).unwrap(), *d, "{x:?}");
    }
    let z2 = Group::free_abelian(2);
    let lengths = bfs(&z2, 5);
    for r in 0..=5 {
        let count = lengths.values().filter(|&&d| d <= r).count();
        assert_eq!(count, 2 * r * r + 2 * r + 1);
        assert_eq!(z2.ball(r).unwrap().len(), count);
    }
    assert_eq!(z2.word_length(&GroupElement::Lattice(vec![2, -3])).unwrap(), 5);
}

#[test]
fn growth_degrees() {
    assert_eq!(Group::free_abelian(2).growth_degree_fit(8).unwrap().1, 2);
    assert_eq!(Group::heisenberg().growth_degree_fit(6).unwrap().1, 4);
    assert_eq!(Group::cyclic(5).growth_degree_fit(6).unwrap().1, 0);
}

fn conjugates(g: &Group, gamma: &GroupElement) -> Vec<GroupElement> {
    let mut out: Vec<GroupElement> = g.elements().unwrap().iter().map(|h| g.conjugate(gamma, h).unwrap()).collect();
    out.sort();
    out.dedup();
    out
}

#[test]
fn classes_and_centralizers_by_enumeration() {
    let s3 = Group::s3();
    let t = s3.parse("(12)").unwrap();
    let cl = s3.conjugacy_class(&t, 8).unwrap();
    let mut members = cl.members.clone();
    members.sort();
    assert_eq!(members, conjugates(&s3, &t));
    assert_eq!(members.len(), 3);
    assert!(cl.verify(&s3).unwrap());
    let mut z = s3.centralizer(&t, 8).unwrap();
    z.sort();
    let mut expect = vec![s3.identity(), t.clone()];
    expect.sort();
    assert_eq!(z, expect);

    let d4 = Group::from_shorthand("d4").unwrap();
    let r = d4.parse("r").unwrap();
    let mut names: Vec<String> = d4.conjugacy_class(&r, 8).unwrap().members.iter().map(|x| d4.name(x)).collect();
    names.sort();
    assert_eq!(names, ["r", "r3"]);
    assert_eq!(conjugates(&d4, &r).len(), 2);

    let h = Group::heisenberg();
    let c = GroupElement::Heis(0, 0, 1);
    assert_eq!(h.centralizer(&c, 3).unwrap().len(), h.ball(3).unwrap().len());
}

/// Shortlex-least nearest centralizer point within `‖g‖`, by brute force.
fn brute_f(g: &Group, gamma: &GroupElement, x: &GroupElement) -> GroupElement {
    let elems = g.elements().unwrap();
    let z: Vec<&GroupElement> = elems
        .iter()
        .filter(|z| g.multiply(z, gamma).unwrap() == g.multiply(gamma, z).unwrap())
        .filter(|z| g.distance(z, x).unwrap() <= g.word_length(x).unwrap())
        .collect();
    let best = z.iter().map(|z| g.distance(z, x).unwrap()).min().unwrap();
    z.into_iter()
        .filter(|z| g.distance(z, x).unwrap() == best)
        .min_by_key(|z| g.shortlex_rank(z).unwrap())
        .unwrap()
        .clone()
}

#[test]
fn retraction_on_finite_groups_matches_brute_force() {
    for name in ["s3", "d4"] {
        let g = Group::from_shorthand(name).unwrap();
        let elems = g.elements().unwrap();
        for gamma in &elems {
            let r = Retraction::new(&g, gamma, 8).unwrap();
            for x in &elems {
                assert_eq!(r.f(x).unwrap(), brute_f(&g, gamma, x), "{name} γ={} g={}", g.name(gamma), g.name(x));
            }
        }
    }
}

#[test]
fn coset_map_is_constant_on_cosets() {
    let g = Group::s3();
    let gamma = g.parse("(123)").unwrap();
    let r = Retraction::new(&g, &gamma, 8).unwrap();
    let reps: Vec<GroupElement> = ["(12)", "(13)", "(23)"].iter().map(|x| g.parse(x).unwrap()).collect();
    let first = r.coset_f(&reps[0]).unwrap();
    for h in &reps {
        assert_eq!(r.coset_f(h).unwrap(), first);
    }
    assert_eq!(r.coset_f(&g.identity()).unwrap(), g.identity());
}

#[test]
fn equivariance_defects_match_brute_force() {
    // f(zg) = z f(g) is not automatic: count the failures independently.
    let g = Group::s3();
    let elems = g.elements().unwrap();
    let gamma = g.parse("(123)").unwrap();
    let r = Retraction::new(&g, &gamma, 8).unwrap();
    let mut defects = 0;
    for z in elems.iter().filter(|z| g.multiply(z, &gamma).unwrap() == g.multiply(&gamma, z).unwrap()) {
        for x in &elems {
            let lhs = brute_f(&g, &gamma, &g.multiply(z, x).unwrap());
            let rhs = g.multiply(z, &brute_f(&g, &gamma, x)).unwrap();
            if lhs != rhs {
                defects += 1;
            }
        }
    }
    assert_eq!(r.equivariance_defects(&elems).unwrap().len(), defects);
    assert_eq!(defects, 4);
}

#[test]
fn psi_fixes_centralizer_points() {
    let g = Group::s3();
    let gamma = g.parse("(123)").unwrap();
    let r = Retraction::new(&g, &gamma, 8).unwrap();
    let half = BigRational::new(1.into(), 2.into());
    let p = SimplexPoint::new(vec![half.clone(), half], vec![gamma.clone(), g.identity()], g.identity()).unwrap();
    assert_eq!(simplex_map_psi(&r, &p).unwrap(), p);
    let one = BigRational::from_integer(1.into());
    let zero = BigRational::from_integer(0.into());
    let x = g.parse("(12)").unwrap();
    let q = SimplexPoint::new(vec![one, zero], vec![x.clone(), g.identity()], g.identity()).unwrap();
    assert_eq!(simplex_map_psi(&r, &q).unwrap().vertices[0], brute_f(&g, &gamma, &x));
}

#[test]
fn growth_bounds() {
    let g = Group::cyclic(3);
    let cl = g.conjugacy_class(&GroupElement::Residue(1), 8).unwrap();
    let b = growth_bound_estimate(&trace_cocycle(&g, &cl), &g, 3).unwrap();
    assert_eq!(b.k, 0);
    assert_eq!(b.r_phi, BigRational::from_integer(1.into()));
    let zero = Cochain::zero(1, Flavor::Cyclic);
    assert_eq!(growth_bound_estimate(&zero, &g, 3).unwrap().k, 0);
}

/// Pointwise cyclic faces, coboundary and β, written independently of the library.
fn faces(g: &Group, t: &[GroupElement]) -> Vec<Vec<GroupElement>> {
    let n = t.len() - 1;
    (0..=n)
        .map(|i| {
            if i < n {
                let mut out = t[..i].to_vec();
                out.push(g.multiply(&t[i], &t[i + 1]).unwrap());
                out.extend_from_slice(&t[i + 2..]);
                out
            } else {
                let mut out = vec![g.multiply(&t[n], &t[0]).unwrap()];
                out.extend_from_slice(&t[1..n]);
                out
            }
        })
        .collect()
}

fn b_at(g: &Group, f: &dyn Fn(&[GroupElement]) -> QC, t: &[GroupElement]) -> QC {
    let mut s = qc_int(0);
    for (i, d) in faces(g, t).iter().enumerate() {
        s += f(d) * qc_int(if i % 2 == 0 { 1 } else { -1 });
    }
    s
}

fn beta_at(g: &Group, f: &dyn Fn(&[GroupElement]) -> QC, t: &[GroupElement]) -> QC {
    let mut s = qc_int(0);
    for (i, d) in faces(g, t).iter().enumerate().skip(1) {
        s += f(d) * qc_int(if i % 2 == 0 { i as i64 } else { -(i as i64) });
    }
    s
}

fn tuples(elems: &[GroupElement], len: usize) -> Vec<Vec<GroupElement>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| elems.iter().map(move |x| [t.clone(), vec![x.clone()]].concat())).collect();
    }
    out
}

#[test]
fn periodicity_matches_two_path_oracle() {
    for name in ["cyclic:2", "cyclic:3", "s3"] {
        let g = Group::from_shorthand(name).unwrap();
        let cl = g.conjugacy_class(&g.generators()[0], 8).unwrap();
        let phi = trace_cocycle(&g, &cl);
        let s = periodicity_s(&g, &phi, true).unwrap();
        let f0 = |t: &[GroupElement]| phi.get(t);
        let bf = |t: &[GroupElement]| b_at(&g, &f0, t);
        let betaf = |t: &[GroupElement]| beta_at(&g, &f0, t);
        for t in tuples(&g.elements().unwrap(), 3) {
            let v = (beta_at(&g, &bf, &t) + b_at(&g, &betaf, &t)) * qc_frac(1, 2);
            assert_eq!(s.get(&t), v, "{name} {t:?}");
        }
        assert!(cyclic_coboundary(&g, &s).unwrap().is_zero());
    }
}

#[test]
fn coboundary_examples() {
    let g = Group::cyclic(2);
    let mut phi = Cochain::zero(0, Flavor::Cyclic);
    phi.add_at(vec![GroupElement::Residue(0)], &qc_int(1));
    assert!(cyclic_coboundary(&g, &phi).unwrap().is_zero());
    let e = GroupElement::Residue(0);
    let y = GroupElement::Residue(1);
    let mut psi = Cochain::zero(1, Flavor::HomogeneousGroup);
    psi.add_at(vec![e.clone(), y.clone()], &qc_int(1));
    psi.add_at(vec![y.clone(), e.clone()], &qc_int(-1));
    assert_eq!(group_coboundary(&g, &psi).unwrap().get(&[e.clone(), y, e]), qc_int(0));
}

#[test]
fn skew_symmetrization_is_idempotent_and_homotopy_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = Group::cyclic(2);
    let phi = random_cochain(&mut rng, &g, 1, Flavor::HomogeneousGroup, None, 4).unwrap();
    let f = skew_symmetrize(&phi).unwrap();
    assert_eq!(skew_symmetrize(&f).unwrap(), f);
    // Full enumeration over the four pairs.
    let lhs = f.minus(&phi).unwrap();
    let rhs = group_coboundary(&g, &chain_homotopy_p(&g, &phi, 1).unwrap())
        .unwrap()
        .plus(&chain_homotopy_p(&g, &group_coboundary(&g, &phi).unwrap(), 2).unwrap())
        .unwrap();
    for t in tuples(&g.elements().unwrap(), 2) {
        assert_eq!(lhs.get(&t), rhs.get(&t));
    }
}

#[test]
fn delocalized_cocycles_are_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for name in ["cyclic:4", "s3", "cyclic:6"] {
        let g = Group::from_shorthand(name).unwrap();
        let cl = g.conjugacy_class(&g.generators()[0], 8).unwrap();
        for k in 0..=2usize {
            let alpha = if k == 0 {
                let mut a = Cochain::zero(0, Flavor::Relative).with_gamma(Some(cl.gamma.clone()));
                for x in g.elements().unwrap() {
                    a.add_at(vec![x], &qc_int(1));
                }
                a
            } else {
                let beta = random_cochain(&mut rng, &g, k - 1, Flavor::HomogeneousGroup, None, 3).unwrap();
                relative_projection(&g, &group_coboundary(&g, &beta).unwrap(), &cl).unwrap()
            };
            assert!(group_coboundary(&g, &alpha).unwrap().is_zero());
            let phi = build_delocalized_cocycle(&g, &alpha, &cl).unwrap();
            assert!(cyclic_coboundary(&g, &phi).unwrap().is_zero(), "{name} degree {k}");
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn spectral_examples() {
    let (g, cl, model) = z2_model().unwrap();
    let rep = regular_representation(&g, &model.d).unwrap();
    assert_eq!(rep[(0, 1)], c(2.0));
    assert_eq!(rep[(1, 1)], c(1.0));
    let mut lams = model.eigenvalues.clone();
    lams.sort_by(f64::total_cmp);
    assert!((lams[0] + 1.0).abs() < 1e-12 && (lams[1] - 3.0).abs() < 1e-12);
    // f(x) = e^{−x²} against the spectral sum.
    let f = model.functional_calculus(|x| c((-x * x).exp()));
    let (a, b) = ((-9f64).exp(), (-1f64).exp());
    let e = GroupElement::Residue(0);
    let y = GroupElement::Residue(1);
    assert!((f.coefficient(&e)[(0, 0)] - c((a + b) / 2.0)).norm() < 1e-14);
    assert!((f.coefficient(&y)[(0, 0)] - c((a - b) / 2.0)).norm() < 1e-14);
    // Nontrivial-class multiplicities of any model sum to zero.
    let total: Complex64 = model.class_multiplicities(&cl).iter().sum();
    assert!(total.norm() < 1e-12);
    let scalar = eigendecompose(&g, &AlgebraElement::basis(1, e, c(2.5))).unwrap();
    assert_eq!(scalar.eigenvalues.len(), 1);
    let eta = eta_invariant(&trace_cocycle(&g, &cl), &scalar, 0, 1e-10).unwrap().value;
    assert!(eta.norm() < 1e-10);
}

#[test]
fn eta_path_values() {
    assert!((u_t(3.0, 0.0) - c(-1.0)).norm() < 1e-15);
    assert!((u_t(50.0, 1.0) - c(1.0)).norm() < 1e-12);
    let v = udot_uinv(1.0, 1.0);
    assert!((v - Complex64::new(0.0, 2.0 * PI.sqrt() * (-1f64).exp())).norm() < 1e-15);
    let (_, _, model) = z2_model().unwrap();
    let (u, uinv, dot) = model.eta_path_u(0.7).unwrap();
    let g = Group::cyclic(2);
    let one = AlgebraElement::basis(1, GroupElement::Residue(0), c(1.0));
    assert!(u.mul(&g, &uinv).unwrap().distance(&g, &one) < 1e-12);
    // Central difference of u_t against the closed form of u̇u⁻¹.
    let h = 1e-5;
    let (up, _, _) = model.eta_path_u(0.7 + h).unwrap();
    let (um, _, _) = model.eta_path_u(0.7 - h).unwrap();
    let du = up.plus(&um.scaled(c(-1.0))).scaled(c(0.5 / h));
    assert!(du.mul(&g, &uinv).unwrap().distance(&g, &dot) < 1e-8);
}

#[test]
fn eta_integrand_worked_value() {
    let (g, cl, model) = z2_model().unwrap();
    let v = eta_integrand(&trace_cocycle(&g, &cl), &model, 0, 1.0).unwrap();
    let expect = Complex64::new(0.0, PI.sqrt() * (3.0 * (-9f64).exp() + (-1f64).exp()));
    assert!((v - expect).norm() < 1e-14);
}

#[test]
fn pairing_worked_values() {
    let (g, cl, model) = z2_model().unwrap();
    let tr = trace_cocycle(&g, &cl);
    let p = z2_half_projection();
    let tau = determinant_tau(&g, &tr, &connecting_path(&g, &p, &[0.0, 1.0]).unwrap(), 0, 1e-10).unwrap().value;
    assert!((tau - c(-1.0)).norm() < 1e-10);
    assert!((chern_character(&g, &tr, &p, 0).unwrap() - c(0.5)).norm() < 1e-14);
    let rho = determinant_tau(&g, &tr, &rho_path(&model, &[0.0], true).unwrap(), 0, 1e-10).unwrap().value;
    assert!((rho - c(1.0)).norm() < 1e-8);
    assert_eq!(chern_character(&g, &tr, &AlgebraElement::zero(1), 0).unwrap(), c(0.0));
    // m = 1 coefficient −2: ch_{Sφ}(p) = −2·Sφ(p,p,p).
    let s = periodicity_s(&g, &tr, true).unwrap();
    let raw = deloc_core::spectral::extend_cocycle_eval(&g, &s, &[p.clone(), p.clone(), p.clone()], true).unwrap();
    assert!((chern_character(&g, &s, &p, 1).unwrap() - raw * -2.0).norm() < 1e-14);
}

#[test]
fn transgression_and_coboundary_eta() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (g, cl, model) = z2_model().unwrap();
    let phi = random_cyclic_delocalized(&mut rng, &g, &cl, 1).unwrap();
    let r = verify_transgression(&g, &phi, &model, 1, &[0.2, 0.6, 1.0, 1.4], 1e-3).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    let b = cyclic_coboundary(&g, &phi).unwrap();
    assert!(eta_invariant(&b, &model, 1, 1e-9).unwrap().value.norm() < 1e-6);
}

#[test]
fn spectrum_files() {
    let empty = load_spectrum(r#"{"classes":["g"],"modes":[]}"#, true).unwrap();
    assert_eq!(empty.sign_sum("g"), 0.0);
    let text = r#"{"classes":["g"],"modes":[{"lambda":-1.5,"mult":{"g":0.5}},{"lambda":2.0,"mult":{"g":0.25}}]}"#;
    let s = load_spectrum(text, true).unwrap();
    assert_eq!(load_spectrum(&serde_json::to_string(&s).unwrap(), true).unwrap(), s);
    assert_eq!(s.sign_sum("g"), -0.25);
    let zero = r#"{"classes":["g"],"modes":[{"lambda":0.0,"mult":{"g":1}}]}"#;
    let err = load_spectrum(zero, true).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(load_spectrum(zero, false).is_ok());
    let e = spectrum_eta(&empty, "g", 1e-10, QuadConfig::default()).unwrap();
    assert_eq!(e.value.norm(), 0.0);
    let e = spectrum_eta(&s, "g", 1e-10, QuadConfig::default()).unwrap();
    assert!((e.value.re + 0.25).abs() < 1e-10 && e.passed());
}

#[test]
fn spectrum_and_model_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for group in ["cyclic:3", "s3", "cyclic:2*cyclic:3"] {
        let b = common::random_model(&mut rng, group, 2);
        let mult = b.model.class_multiplicities(&b.class);
        let modes = b.model.eigenvalues.iter().zip(&mult).map(|(l, m)| Mode { lambda: *l, mult: [("c".to_string(), m.re)].into() });
        let file = SpectrumFile { classes: vec!["c".into()], modes: modes.collect(), metadata: None };
        let via_file = spectrum_eta(&file, "c", 1e-10, QuadConfig::default()).unwrap().value;
        let via_model = eta_invariant(&trace_cocycle(&b.group, &b.class), &b.model, 0, 1e-10).unwrap().value;
        assert!((via_file - via_model).norm() < 1e-8, "{group}: {via_file} vs {via_model}");
    }
}

#[test]
fn exact_rationals_survive_big_denominators() {
    let x = BigRational::new(BigInt::from(7), BigInt::from(3)).pow(40);
    let v = QC::new(x.clone(), x);
    let mut phi = Cochain::zero(0, Flavor::Cyclic);
    phi.add_at(vec![GroupElement::Residue(0)], &v);
    phi.add_at(vec![GroupElement::Residue(0)], &-v);
    assert!(phi.is_zero());
}
