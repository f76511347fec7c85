#![allow(dead_code)]

use deloc_core::group::{ClassHandle, Group, GroupElement};
use deloc_core::pairings::gapped_model;
use deloc_core::spectral::{eigendecompose, AlgebraElement, Mat, SpectralModel};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalue palette for random models; every entry has modulus above 0.5.
pub const PALETTE: [f64; 6] = [-2.25, -1.1, -0.6, 0.55, 0.85, 1.75];

/// A gapped model assembled from known projections and eigenvalues.
pub struct BuiltModel {
    pub group: Group,
    pub class: ClassHandle,
    pub model: SpectralModel,
    /// `(μ_j, P_j)` as assembled, before the model re-decomposes `D`.
    pub parts: Vec<(f64, AlgebraElement)>,
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `D = Σ μ_j P_j` with `P_j` the spectral projections of a random Hermitian
/// element and `μ_j` drawn from the palette.
pub fn random_model(rng: &mut ChaCha8Rng, group: &str, n: usize) -> BuiltModel {
    let g = Group::from_shorthand(group).unwrap();
    let elems = g.elements().unwrap();
    let mut a = AlgebraElement::zero(n);
    for x in &elems {
        if rng.random_bool(0.7) {
            a.add_term(x.clone(), &random_matrix(rng, n));
        }
    }
    let h = a.plus(&a.adjoint(&g).unwrap());
    let base = eigendecompose(&g, &h).unwrap();
    let mut parts = vec![];
    let mut d = AlgebraElement::zero(n);
    for p in base.projections {
        let mu = PALETTE[rng.random_range(0..PALETTE.len())];
        d = d.plus(&p.scaled(Complex64::new(mu, 0.0)));
        parts.push((mu, p));
    }
    let gamma = elems[rng.random_range(0..elems.len())].clone();
    let class = g.conjugacy_class(&gamma, 8).unwrap();
    let model = gapped_model(&g, &d).unwrap();
    BuiltModel { group: g, class, model, parts }
}

/// `tr_γ(a) = Σ_{y ∈ cl} tr(a_y)` read straight off the coefficients.
pub fn class_trace(a: &AlgebraElement, cl: &ClassHandle) -> Complex64 {
    cl.members.iter().map(|y| a.coefficient(y).trace()).sum()
}

/// Spectral asymmetry of the assembled parts.
pub fn asymmetry(b: &BuiltModel) -> Complex64 {
    b.parts.iter().map(|(mu, p)| class_trace(p, &b.class) * mu.signum()).sum()
}

pub fn element(g: &Group, terms: &[(&str, f64)]) -> AlgebraElement {
    let mut a = AlgebraElement::zero(1);
    for (x, c) in terms {
        a = a.plus(&AlgebraElement::basis(1, g.parse(x).unwrap(), Complex64::new(*c, 0.0)));
    }
    a
}

pub fn residue(k: u64) -> GroupElement {
    GroupElement::Residue(k)
}
