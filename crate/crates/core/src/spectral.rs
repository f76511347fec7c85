//! Finite equivariant models: `ℂG ⊗ M_N` elements, their regular
//! representation, spectral decomposition and delocalized traces.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::cochain::{Cochain, Evaluate};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement};
use crate::rational::to_c64;

pub type Mat = DMatrix<Complex64>;

/// Eigenvalues closer than this are one cluster.
pub const CLUSTER_TOL: f64 = 1e-10;
/// Models with a smaller gap are refused by the pairings.
pub const MIN_GAP: f64 = 1e-6;

/// `λ·1 + Σ_g A_g ⊗ g` with `N×N` complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    pub n: usize,
    pub coeffs: BTreeMap<GroupElement, Mat>,
    /// Unitization scalar.
    pub unit: Complex64,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Self {
        AlgebraElement { n, coeffs: BTreeMap::new(), unit: Complex64::new(0.0, 0.0) }
    }

    pub fn unit(n: usize) -> Self {
        AlgebraElement { n, coeffs: BTreeMap::new(), unit: Complex64::new(1.0, 0.0) }
    }

    /// `c · (x ⊗ I)`.
    pub fn basis(n: usize, x: GroupElement, c: Complex64) -> Self {
        let mut a = AlgebraElement::zero(n);
        a.coeffs.insert(x, Mat::identity(n, n) * c);
        a
    }

    pub fn add_term(&mut self, x: GroupElement, m: &Mat) {
        match self.coeffs.get_mut(&x) {
            Some(v) => *v += m,
            None => {
                self.coeffs.insert(x, m.clone());
            }
        }
    }

    pub fn plus(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (x, m) in &other.coeffs {
            out.add_term(x.clone(), m);
        }
        out.unit += other.unit;
        out
    }

    pub fn scaled(&self, c: Complex64) -> AlgebraElement {
        AlgebraElement {
            n: self.n,
            coeffs: self.coeffs.iter().map(|(x, m)| (x.clone(), m * c)).collect(),
            unit: self.unit * c,
        }
    }

    /// Convolution product, including the unit scalars.
    pub fn mul(&self, g: &Group, other: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero(self.n);
        for (x, a) in &self.coeffs {
            for (y, b) in &other.coeffs {
                out.add_term(g.multiply(x, y)?, &(a * b));
            }
        }
        for (y, b) in &other.coeffs {
            out.add_term(y.clone(), &(b * self.unit));
        }
        for (x, a) in &self.coeffs {
            out.add_term(x.clone(), &(a * other.unit));
        }
        out.unit = self.unit * other.unit;
        Ok(out)
    }

    /// `(A*)_g = (A_{g⁻¹})†`.
    pub fn adjoint(&self, g: &Group) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero(self.n);
        for (x, a) in &self.coeffs {
            out.add_term(g.inverse(x)?, &a.adjoint());
        }
        out.unit = self.unit.conj();
        Ok(out)
    }

    /// The element with its unit scalar folded into the identity coefficient.
    pub fn folded(&self, g: &Group) -> AlgebraElement {
        let mut out = self.clone();
        if self.unit != Complex64::new(0.0, 0.0) {
            out.add_term(g.identity(), &(Mat::identity(self.n, self.n) * self.unit));
            out.unit = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Largest entry modulus of `self − other` after folding units.
    pub fn distance(&self, g: &Group, other: &AlgebraElement) -> f64 {
        let d = self.folded(g).plus(&other.folded(g).scaled(Complex64::new(-1.0, 0.0)));
        d.coeffs.values().flat_map(|m| m.iter().map(|z| z.norm())).fold(0.0, f64::max)
    }

    pub fn coefficient(&self, x: &GroupElement) -> Mat {
        self.coeffs.get(x).cloned().unwrap_or_else(|| Mat::zeros(self.n, self.n))
    }
}

/// Block matrix on `ℓ²(G) ⊗ ℂ^N` with block `(h, g)` equal to `A_{hg⁻¹}`.
pub fn regular_representation(g: &Group, a: &AlgebraElement) -> Result<Mat> {
    let elems = g.elements()?;
    let n = a.n;
    let size = elems.len() * n;
    let mut m = Mat::zeros(size, size);
    for (hi, h) in elems.iter().enumerate() {
        for (gi, x) in elems.iter().enumerate() {
            let k = g.multiply(h, &g.inverse(x)?)?;
            let mut block = a.coefficient(&k);
            if hi == gi {
                block += Mat::identity(n, n) * a.unit;
            }
            m.view_mut((hi * n, gi * n), (n, n)).copy_from(&block);
        }
    }
    Ok(m)
}

/// Inverse of the regular representation on its image:
/// `A_x = (1/|G|) Σ_h M[h, x⁻¹h]`.
pub fn from_representation(g: &Group, m: &Mat, n: usize) -> Result<AlgebraElement> {
    let elems = g.elements()?;
    let pos: std::collections::HashMap<&GroupElement, usize> = elems.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let scale = 1.0 / elems.len() as f64;
    let mut out = AlgebraElement::zero(n);
    for x in &elems {
        let xi = g.inverse(x)?;
        let mut acc = Mat::zeros(n, n);
        for (hi, h) in elems.iter().enumerate() {
            let k = pos[&g.multiply(&xi, h)?];
            acc += m.view((hi * n, k * n), (n, n));
        }
        if acc.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
            out.coeffs.insert(x.clone(), acc * Complex64::new(scale, 0.0));
        }
    }
    Ok(out)
}

/// `tr_γ(A) = Σ_{y ∈ cl(γ)} tr(A_y)`; the unit contributes nothing.
pub fn delocalized_trace(a: &AlgebraElement, cl: &ClassHandle) -> Complex64 {
    cl.members.iter().filter_map(|y| a.coeffs.get(y)).map(|m| m.trace()).sum()
}

/// A Hermitian element with its spectral decomposition.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    pub d: AlgebraElement,
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
    pub projections: Vec<AlgebraElement>,
    pub gap: f64,
}

/// Spectral decomposition through the regular representation.
pub fn eigendecompose(g: &Group, d: &AlgebraElement) -> Result<SpectralModel> {
    if !g.is_finite() {
        return Err(Error::Unsupported("eigendecomposition needs a finite group".into()));
    }
    let m = regular_representation(g, d)?;
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 * scale {
        return Err(Error::NonHermitian(defect));
    }
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut clusters: Vec<Vec<usize>> = vec![];
    for &i in &order {
        let lam = eig.eigenvalues[i];
        match clusters.last_mut() {
            Some(c) if (lam - eig.eigenvalues[*c.last().unwrap()]).abs() <= CLUSTER_TOL * lam.abs().max(1.0) => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let size = m.nrows();
    let mut eigenvalues = vec![];
    let mut multiplicities = vec![];
    let mut projections = vec![];
    for c in &clusters {
        let mean = c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64;
        let mut p = Mat::zeros(size, size);
        for &i in c {
            let v = eig.eigenvectors.column(i);
            p += &v * v.adjoint();
        }
        eigenvalues.push(mean);
        multiplicities.push(c.len());
        projections.push(from_representation(g, &p, d.n)?);
    }
    let gap = eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    Ok(SpectralModel { d: d.clone(), eigenvalues, multiplicities, projections, gap })
}

impl SpectralModel {
    /// `m_j^γ = tr_γ(P_j)`.
    pub fn class_multiplicities(&self, cl: &ClassHandle) -> Vec<Complex64> {
        self.projections.iter().map(|p| delocalized_trace(p, cl)).collect()
    }

    /// `Σ_j f(λ_j) P_j`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> Complex64) -> AlgebraElement {
        let n = self.d.n;
        let mut out = AlgebraElement::zero(n);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projections) {
            out = out.plus(&p.scaled(f(*lam)));
        }
        out
    }

    /// `c·1 + Σ_j (f(λ_j) − c) P_j`, the same operator split against the unit.
    pub fn functional_calculus_unitized(&self, f: impl Fn(f64) -> Complex64, c: Complex64) -> AlgebraElement {
        let mut out = self.functional_calculus(|x| f(x) - c);
        out.unit = c;
        out
    }

    pub fn require_gap(&self) -> Result<()> {
        if self.gap < MIN_GAP {
            return Err(Error::Gap { gap: self.gap });
        }
        Ok(())
    }

    /// `u_t(D)`, `u_t(D)⁻¹` and the closed form of `u̇_t u_t⁻¹`.
    pub fn eta_path_u(&self, t: f64) -> Result<(AlgebraElement, AlgebraElement, AlgebraElement)> {
        self.require_gap()?;
        Ok((
            self.functional_calculus(|x| u_t(t, x)),
            self.functional_calculus(|x| u_t(t, x).inv()),
            self.functional_calculus(|x| udot_uinv(t, x)),
        ))
    }
}

/// `F_t(x) = (1/√π) ∫_{−∞}^{tx} e^{−s²} ds = ½ erfc(−tx)`.
pub fn f_t(t: f64, x: f64) -> f64 {
    0.5 * erfc(-t * x)
}

/// `u_t(x) = e^{2πi F_t(x)}`.
pub fn u_t(t: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * f_t(t, x))
}

/// `u̇_t(x) u_t(x)⁻¹ = 2i√π x e^{−t²x²}`.
pub fn udot_uinv(t: f64, x: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI.sqrt() * x * (-t * t * x * x).exp())
}

/// Multilinear extension `Σ_k tr(A_0(k_0)⋯A_n(k_n)) φ(k)` over the stored keys.
///
/// In unitized mode the unit scalars are dropped; otherwise they are read as
/// multiples of the identity element.
pub fn extend_cocycle_eval(g: &Group, phi: &Cochain, args: &[AlgebraElement], unitized: bool) -> Result<Complex64> {
    if args.len() != phi.degree + 1 {
        return Err(Error::DegreeMismatch { expected: phi.degree + 1, got: args.len() });
    }
    let args: Vec<AlgebraElement> = if unitized { args.to_vec() } else { args.iter().map(|a| a.folded(g)).collect() };
    let n = args[0].n;
    let mut total = Complex64::new(0.0, 0.0);
    'keys: for (k, v) in phi.entries() {
        let mut prod = Mat::identity(n, n);
        for (a, x) in args.iter().zip(k) {
            match a.coeffs.get(x) {
                Some(m) => prod = prod * m,
                None => continue 'keys,
            }
        }
        total += prod.trace() * to_c64(v);
    }
    Ok(total)
}

/// Same extension for a pointwise cochain, enumerating the product of supports.
pub fn extend_eval(g: &Group, phi: &dyn Evaluate, args: &[AlgebraElement]) -> Result<Complex64> {
    if args.len() != phi.degree() + 1 {
        return Err(Error::DegreeMismatch { expected: phi.degree() + 1, got: args.len() });
    }
    let supports: Vec<Vec<(&GroupElement, &Mat)>> = args.iter().map(|a| a.coeffs.iter().collect()).collect();
    if supports.iter().any(|s| s.is_empty()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = args[0].n;
    let mut idx = vec![0usize; args.len()];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let t: Vec<GroupElement> = idx.iter().zip(&supports).map(|(&i, s)| s[i].0.clone()).collect();
        let v = phi.eval(g, &t)?;
        if v.re != num_rational::BigRational::from_integer(0.into()) || v.im != num_rational::BigRational::from_integer(0.into()) {
            let mut prod = Mat::identity(n, n);
            for (&i, s) in idx.iter().zip(&supports) {
                prod = prod * s[i].1;
            }
            total += prod.trace() * to_c64(&v);
        }
        let mut j = 0;
        while j < idx.len() {
            idx[j] += 1;
            if idx[j] < supports[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == idx.len() {
            return Ok(total);
        }
    }
}

/// `Φ[j_0,…,j_n] = φ(P_{j_0} ⊗ ⋯ ⊗ P_{j_n})` for the spectral projections of a model.
///
/// Any argument that is a function of `D` is a combination of projections, so
/// pairings reduce to contractions of this tensor with scalar weights.
#[derive(Clone, Debug)]
pub struct SpectralTensor {
    pub arity: usize,
    pub eigenvalues: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// Largest tensor size accepted.
pub const TENSOR_CAP: usize = 4_000_000;

impl SpectralTensor {
    pub fn build(phi: &Cochain, model: &SpectralModel) -> Result<Self> {
        let j = model.eigenvalues.len();
        let arity = phi.degree + 1;
        let size = j.checked_pow(arity as u32).filter(|&s| s <= TENSOR_CAP).ok_or_else(|| {
            Error::Capacity(format!("spectral tensor {j}^{arity} exceeds {TENSOR_CAP}"))
        })?;
        let n = model.d.n;
        let mut values = vec![Complex64::new(0.0, 0.0); size];
        let zero = Mat::zeros(n, n);
        for (k, v) in phi.entries() {
            let c = to_c64(v);
            let blocks: Vec<Vec<&Mat>> = k
                .iter()
                .map(|x| model.projections.iter().map(|p| p.coeffs.get(x).unwrap_or(&zero)).collect())
                .collect();
            // Depth-first over index tuples, carrying prefix products.
            let mut stack: Vec<(usize, usize, Mat)> = (0..j).map(|a| (1, a, blocks[0][a].clone())).collect();
            while let Some((depth, flat, prod)) = stack.pop() {
                if depth == arity {
                    values[flat] += prod.trace() * c;
                    continue;
                }
                if prod.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                for a in 0..j {
                    stack.push((depth + 1, flat * j + a, &prod * blocks[depth][a]));
                }
            }
        }
        Ok(SpectralTensor { arity, eigenvalues: model.eigenvalues.clone(), values })
    }

    /// `Σ_j Φ[j] ∏_i w_i[j_i]` for per-slot weight vectors.
    pub fn contract(&self, weights: &[Vec<Complex64>]) -> Complex64 {
        let j = self.eigenvalues.len();
        let mut total = Complex64::new(0.0, 0.0);
        for (flat, v) in self.values.iter().enumerate() {
            if v.norm() == 0.0 {
                continue;
            }
            let mut w = *v;
            let mut rest = flat;
            for slot in (0..self.arity).rev() {
                w *= weights[slot][rest % j];
                rest /= j;
            }
            total += w;
        }
        total
    }
}

/// Externally supplied spectrum with per-class multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    pub classes: Vec<String>,
    pub modes: Vec<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub lambda: f64,
    pub mult: BTreeMap<String, f64>,
}

impl SpectrumFile {
    pub fn validate(&self, eta: bool) -> Result<()> {
        for (i, m) in self.modes.iter().enumerate() {
            if !m.lambda.is_finite() {
                return Err(Error::validation(format!("modes[{i}].lambda"), "not finite"));
            }
            if eta && m.lambda == 0.0 {
                return Err(Error::validation(format!("modes[{i}].lambda"), "zero eigenvalue is not allowed for eta"));
            }
            for k in m.mult.keys() {
                if !self.classes.contains(k) {
                    return Err(Error::validation(format!("modes[{i}].mult.{k}"), "unknown class id"));
                }
            }
        }
        Ok(())
    }

    /// Spectral asymmetry `Σ_j sign(λ_j) m_j^γ` for one class.
    pub fn sign_sum(&self, class: &str) -> f64 {
        self.modes.iter().map(|m| m.lambda.signum() * m.mult.get(class).copied().unwrap_or(0.0)).sum()
    }
}

/// Parses and validates a spectrum file.
pub fn load_spectrum(text: &str, eta: bool) -> Result<SpectrumFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: SpectrumFile = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::validation(e.path().to_string(), format!("{} (line {})", e.inner(), e.inner().line())))?;
    s.validate(eta)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_model() -> (Group, AlgebraElement) {
        let g = Group::cyclic(2);
        let d = AlgebraElement::basis(1, GroupElement::Residue(0), Complex64::new(1.0, 0.0))
            .plus(&AlgebraElement::basis(1, GroupElement::Residue(1), Complex64::new(2.0, 0.0)));
        (g, d)
    }

    #[test]
    fn representation_of_small_elements() {
        let (g, d) = z2_model();
        let m = regular_representation(&g, &d).unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(2.0, 0.0));
        assert_eq!(m[(0, 0)], Complex64::new(1.0, 0.0));
        let u = regular_representation(&g, &AlgebraElement::unit(1)).unwrap();
        assert_eq!(u, Mat::identity(2, 2));
    }

    #[test]
    fn z2_spectrum() {
        let (g, d) = z2_model();
        let model = eigendecompose(&g, &d).unwrap();
        assert_eq!(model.eigenvalues.len(), 2);
        assert!((model.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((model.eigenvalues[1] - 3.0).abs() < 1e-12);
        let cl = g.conjugacy_class(&GroupElement::Residue(1), 4).unwrap();
        let m = model.class_multiplicities(&cl);
        assert!((m[0].re + 0.5).abs() < 1e-12 && (m[1].re - 0.5).abs() < 1e-12);
        let back = model.functional_calculus(|x| Complex64::new(x, 0.0));
        assert!(back.distance(&g, &d) < 1e-12);
    }

    #[test]
    fn closed_form_derivative() {
        let v = udot_uinv(1.0, 1.0);
        assert!((v.im - 2.0 * PI.sqrt() * (-1.0f64).exp()).abs() < 1e-15);
        assert!((f_t(3.0, 0.0) - 0.5).abs() < 1e-16);
        assert!((u_t(1.0, 0.0) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn spectrum_files() {
        let s = load_spectrum(r#"{"classes":["g"],"modes":[]}"#, true).unwrap();
        assert_eq!(s.sign_sum("g"), 0.0);
        assert!(load_spectrum(r#"{"classes":["g"],"modes":[{"lambda":0.0,"mult":{"g":1.0}}]}"#, true).is_err());
        let text = r#"{"classes":["g"],"modes":[{"lambda":-0.3,"mult":{"g":0.5}}]}"#;
        let s = load_spectrum(text, true).unwrap();
        assert_eq!(load_spectrum(&serde_json::to_string(&s).unwrap(), true).unwrap(), s);
    }
}
