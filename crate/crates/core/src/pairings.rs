//! Delocalized eta invariants, the determinant map on invertible paths and the
//! Chern character, evaluated on finite models.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::cochain::ops::{cyclic_coboundary, periodicity_s};
use crate::cochain::{unitized_eval, Cochain, Flavor, UnitizedElement};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group};
use crate::quadrature::{integrate, QuadConfig, QuadResult};
use crate::rational::{to_c64, QC};
use crate::report::{ser_complex, ser_real};
use crate::spectral::{
    eigendecompose, regular_representation, from_representation, udot_uinv, u_t, AlgebraElement, Mat, SpectralModel, SpectrumFile,
    SpectralTensor,
};

/// Highest `m` supported (arity `2m+1 ≤ 5`).
pub const MAX_M: usize = 2;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn parity(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One side-by-side comparison in a report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    #[serde(serialize_with = "ser_complex")]
    pub lhs: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub rhs: Complex64,
    #[serde(serialize_with = "ser_real")]
    pub diff: f64,
    #[serde(serialize_with = "ser_real")]
    pub tol: f64,
    pub passed: bool,
}

impl CheckOutcome {
    pub fn new(name: &str, lhs: Complex64, rhs: Complex64, tol: f64) -> Self {
        let diff = (lhs - rhs).norm();
        CheckOutcome { name: name.into(), lhs, rhs, diff, tol, passed: diff <= tol }
    }
}

/// Value of an invariant with its error budget and any identity checks.
#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub invariant: String,
    pub m: usize,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    #[serde(serialize_with = "ser_real")]
    pub error: f64,
    #[serde(rename = "T", serialize_with = "ser_real")]
    pub truncation: f64,
    #[serde(serialize_with = "ser_real")]
    pub tolerance: f64,
    pub checks: Vec<CheckOutcome>,
    pub provenance: BTreeMap<String, String>,
}

impl PairingReport {
    fn new(invariant: &str, m: usize, value: Complex64, error: f64, truncation: f64, tolerance: f64) -> Self {
        PairingReport {
            invariant: invariant.into(),
            m,
            value,
            error,
            truncation,
            tolerance,
            checks: vec![],
            provenance: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check_degree(phi: &Cochain, expected: usize) -> Result<()> {
    phi.require(&[Flavor::CyclicDelocalized, Flavor::Cyclic])?;
    if phi.degree != expected {
        return Err(Error::DegreeMismatch { expected, got: phi.degree });
    }
    Ok(())
}

fn check_m(m: usize) -> Result<()> {
    if m > MAX_M {
        return Err(Error::Unsupported(format!("m = {m} exceeds {MAX_M}")));
    }
    Ok(())
}

/// Weights for `(X ⊗ (A ⊗ B)^m)` where every slot is a function of `D`.
fn weights(eig: &[f64], slot0: impl Fn(f64) -> Complex64, odd: impl Fn(f64) -> Complex64, even: impl Fn(f64) -> Complex64, m: usize) -> Vec<Vec<Complex64>> {
    let mut w = vec![eig.iter().map(|&x| slot0(x)).collect::<Vec<_>>()];
    for _ in 0..m {
        w.push(eig.iter().map(|&x| odd(x)).collect());
        w.push(eig.iter().map(|&x| even(x)).collect());
    }
    w
}

/// `η(D, t) = φ(u̇u⁻¹ ⊗ ((u−1) ⊗ (u⁻¹−1))^{⊗m})` from a spectral tensor.
pub fn eta_integrand_tensor(tensor: &SpectralTensor, m: usize, t: f64) -> Complex64 {
    let w = weights(
        &tensor.eigenvalues,
        |x| udot_uinv(t, x),
        |x| u_t(t, x) - ONE,
        |x| u_t(t, x).inv() - ONE,
        m,
    );
    tensor.contract(&w)
}

/// `η_φ(D, t)` evaluated directly.
pub fn eta_integrand(phi: &Cochain, model: &SpectralModel, m: usize, t: f64) -> Result<Complex64> {
    check_m(m)?;
    check_degree(phi, 2 * m)?;
    model.require_gap()?;
    Ok(eta_integrand_tensor(&SpectralTensor::build(phi, model)?, m, t))
}

/// Upper bound for `|integrand(t)|` at `t ≥ 0`, using `|u − 1| ≤ 2`.
fn envelope(tensor: &SpectralTensor, m: usize) -> impl Fn(f64) -> f64 + '_ {
    let j = tensor.eigenvalues.len();
    let mut per: Vec<f64> = vec![0.0; j];
    for (flat, v) in tensor.values.iter().enumerate() {
        let lead = flat / j.pow((tensor.arity - 1) as u32);
        per[lead] += v.norm();
    }
    let scale = 4f64.powi(m as i32) * 2.0 * PI.sqrt();
    move |t: f64| {
        tensor
            .eigenvalues
            .iter()
            .zip(&per)
            .map(|(&x, &p)| p * scale * x.abs() * (-t * t * x * x).exp())
            .sum()
    }
}

/// Integrates a Gaussian-decaying integrand on `[0, ∞)`: split at 1, cut at
/// `T = 2√(ln(C/tol))/gap` with `C` the sampled maximum on `[0, 1]`, extended
/// until the envelope tail is below a quarter of the tolerance.
fn integrate_half_line(
    f: &mut dyn FnMut(f64) -> Complex64,
    env: &dyn Fn(f64) -> f64,
    gap: f64,
    tol: f64,
    cfg: QuadConfig,
) -> Result<(QuadResult, f64, f64)> {
    let c = (0..=32).map(|k| f(k as f64 / 32.0).norm()).fold(0.0, f64::max);
    let mut t_max = if c > tol { 2.0 * (c / tol).ln().sqrt() / gap } else { 1.0 };
    t_max = t_max.max(1.0);
    let tail = |t: f64| env(t) / (2.0 * t * gap * gap);
    while tail(t_max) > tol / 4.0 && t_max < 1e6 {
        t_max *= 1.25;
    }
    let a = integrate(f, 0.0, 1.0, tol / 4.0, cfg)?;
    let b = integrate(f, 1.0, t_max, tol / 4.0, cfg)?;
    let res = QuadResult {
        value: a.value + b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
        panels: a.panels + b.panels,
    };
    Ok((res, t_max, tail(t_max)))
}

/// `η_φ(D) = (m!/πi) ∫_0^∞ η_φ(D, t) dt`.
pub fn eta_invariant(phi: &Cochain, model: &SpectralModel, m: usize, tol: f64) -> Result<PairingReport> {
    eta_invariant_with(phi, model, m, tol, QuadConfig::default())
}

pub fn eta_invariant_with(phi: &Cochain, model: &SpectralModel, m: usize, tol: f64, cfg: QuadConfig) -> Result<PairingReport> {
    check_m(m)?;
    check_degree(phi, 2 * m)?;
    model.require_gap()?;
    let tensor = SpectralTensor::build(phi, model)?;
    eta_from_tensor(&tensor, model.gap, m, tol, cfg)
}

pub fn eta_from_tensor(tensor: &SpectralTensor, gap: f64, m: usize, tol: f64, cfg: QuadConfig) -> Result<PairingReport> {
    let coef = factorial(m) / PI;
    let env = envelope(tensor, m);
    let mut f = |t: f64| eta_integrand_tensor(tensor, m, t);
    let (res, t_max, tail) = integrate_half_line(&mut f, &env, gap, tol / coef, cfg)?;
    let value = res.value * Complex64::new(factorial(m), 0.0) / (PI * I);
    let mut report = PairingReport::new("eta", m, value, (res.error + tail) * coef, t_max, tol);
    // Sampled decay against the Gaussian envelope.
    let c0 = env(0.0).max(f64::MIN_POSITIVE);
    let worst = (1..=16)
        .map(|k| {
            let t = 1.0 + (t_max - 1.0) * k as f64 / 16.0;
            f(t).norm() / (c0 * (-t * t * gap * gap / 2.0).exp())
        })
        .fold(0.0, f64::max);
    report.checks.push(CheckOutcome {
        name: "integrand-decay".into(),
        lhs: Complex64::new(worst, 0.0),
        rhs: ONE,
        diff: (worst - 1.0).max(0.0),
        tol: 0.0,
        passed: worst <= 1.0,
    });
    report.provenance.insert("gap".into(), format!("{gap:.17e}"));
    Ok(report)
}

/// Sign-sum `Σ_j sign(λ_j) m_j^γ`, the value of the degree-0 trace pairing.
pub fn sign_sum(model: &SpectralModel, cl: &ClassHandle) -> Complex64 {
    model
        .eigenvalues
        .iter()
        .zip(model.class_multiplicities(cl))
        .map(|(l, m)| m * l.signum())
        .sum()
}

/// Degree-0 eta of an ingested spectrum, by the same quadrature as for models.
/// Error in truncating the spectrum itself is not counted.
pub fn spectrum_eta(s: &SpectrumFile, class: &str, tol: f64, cfg: QuadConfig) -> Result<PairingReport> {
    s.validate(true)?;
    if !s.classes.iter().any(|c| c == class) {
        return Err(Error::validation("class", format!("unknown class id {class}")));
    }
    let modes: Vec<(f64, f64)> =
        s.modes.iter().map(|m| (m.lambda, m.mult.get(class).copied().unwrap_or(0.0))).filter(|&(_, k)| k != 0.0).collect();
    let expected = Complex64::new(s.sign_sum(class), 0.0);
    let mut report = if modes.is_empty() {
        PairingReport::new("eta", 0, Complex64::new(0.0, 0.0), 0.0, 0.0, tol)
    } else {
        let gap = modes.iter().map(|&(l, _)| l.abs()).fold(f64::INFINITY, f64::min);
        let root = 2.0 * PI.sqrt();
        let env = |t: f64| modes.iter().map(|&(l, k)| k.abs() * root * l.abs() * (-t * t * l * l).exp()).sum::<f64>();
        let mut f = |t: f64| I * modes.iter().map(|&(l, k)| k * root * l * (-t * t * l * l).exp()).sum::<f64>();
        let (res, t_max, tail) = integrate_half_line(&mut f, &env, gap, tol * PI, cfg)?;
        let mut r = PairingReport::new("eta", 0, res.value / (PI * I), (res.error + tail) / PI, t_max, tol);
        r.provenance.insert("gap".into(), format!("{gap:.17e}"));
        r
    };
    report.checks.push(CheckOutcome::new("sign-sum", report.value, expected, tol));
    report.provenance.insert("class".into(), class.into());
    report.provenance.insert("truncation".into(), "spectrum truncation error not included".into());
    for (k, v) in s.metadata.iter().flatten() {
        report.provenance.insert(format!("metadata.{k}"), v.clone());
    }
    Ok(report)
}

/// Degree-0 cochain `g ↦ 1` on the class (the delocalized trace).
pub fn trace_cocycle(g: &Group, cl: &ClassHandle) -> Cochain {
    let mut phi = Cochain::zero(0, Flavor::CyclicDelocalized).with_gamma(Some(cl.gamma.clone()));
    for y in &cl.members {
        phi.add_at(vec![y.clone()], &crate::rational::qc_int(1));
    }
    let _ = g;
    phi
}

/// How the derivative of a sampled path is obtained.
#[derive(Clone, Debug)]
pub enum PathKind {
    /// Fourth-order central differences on a uniform grid.
    Sampled,
    /// `w(t) = exp(2πi(1−t)p)` on `[0,1]`, unit afterwards.
    Connecting(AlgebraElement),
    /// `U(t) = e^{2πi F(D/t)}`, or its inverse when `inverse` is set.
    Rho { model: Box<SpectralModel>, inverse: bool },
}

/// Path of invertibles starting at the unit.
#[derive(Clone, Debug)]
pub struct InvertiblePath {
    pub grid: Vec<f64>,
    pub samples: Vec<AlgebraElement>,
    pub kind: PathKind,
}

fn check_idempotent(g: &Group, p: &AlgebraElement) -> Result<()> {
    let sq = p.mul(g, p)?;
    let defect = sq.distance(g, p);
    if defect > 1e-8 {
        return Err(Error::NonIdempotent(defect));
    }
    Ok(())
}

/// `w(t) = 1 + (e^{2πi(1−t)} − 1) p` on `[0,1]`, `1` afterwards.
pub fn connecting_sample(p: &AlgebraElement, t: f64) -> AlgebraElement {
    let mut w = if t < 1.0 { p.scaled(Complex64::from_polar(1.0, 2.0 * PI * (1.0 - t)) - ONE) } else { AlgebraElement::zero(p.n) };
    w.unit = ONE;
    w
}

pub fn connecting_path(g: &Group, p: &AlgebraElement, grid: &[f64]) -> Result<InvertiblePath> {
    check_idempotent(g, p)?;
    Ok(InvertiblePath {
        grid: grid.to_vec(),
        samples: grid.iter().map(|&t| connecting_sample(p, t)).collect(),
        kind: PathKind::Connecting(p.clone()),
    })
}

/// `U(t) = e^{2πi F_{1/t}(D)}` split as `1 + (U − 1)`; `U(0) = 1`.
pub fn rho_sample(model: &SpectralModel, t: f64, inverse: bool) -> AlgebraElement {
    let s = if inverse { -1.0 } else { 1.0 };
    if t <= 0.0 {
        return AlgebraElement::unit(model.d.n);
    }
    model.functional_calculus_unitized(|x| Complex64::from_polar(1.0, s * 2.0 * PI * crate::spectral::f_t(1.0 / t, x)), ONE)
}

pub fn rho_path(model: &SpectralModel, grid: &[f64], inverse: bool) -> Result<InvertiblePath> {
    model.require_gap()?;
    Ok(InvertiblePath {
        grid: grid.to_vec(),
        samples: grid.iter().map(|&t| rho_sample(model, t, inverse)).collect(),
        kind: PathKind::Rho { model: Box::new(model.clone()), inverse },
    })
}

/// Inverse through the regular representation.
pub fn invert(g: &Group, a: &AlgebraElement) -> Result<AlgebraElement> {
    let m = regular_representation(g, a)?;
    let svd = m.clone().svd(false, false);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 1e-8 {
        return Err(Error::Gap { gap: smin });
    }
    let inv = m.try_inverse().ok_or(Error::Gap { gap: 0.0 })?;
    let mut out = from_representation(g, &inv, a.n)?;
    // Keep the unit split of the input.
    if a.unit != Complex64::new(0.0, 0.0) {
        let c = a.unit.inv();
        out.add_term(g.identity(), &(Mat::identity(a.n, a.n) * (-c)));
        out.unit = c;
    }
    Ok(out)
}

/// `τ_φ(w) = ((−1)^m m!/πi) ∫ φ̄(w⁻¹ẇ ⊗ (w⁻¹ ⊗ w)^{⊗m}) dt`.
pub fn determinant_tau(g: &Group, phi: &Cochain, path: &InvertiblePath, m: usize, tol: f64) -> Result<PairingReport> {
    determinant_tau_with(g, phi, path, m, tol, QuadConfig::default())
}

pub fn determinant_tau_with(
    g: &Group,
    phi: &Cochain,
    path: &InvertiblePath,
    m: usize,
    tol: f64,
    cfg: QuadConfig,
) -> Result<PairingReport> {
    check_m(m)?;
    check_degree(phi, 2 * m)?;
    let coef = parity(m) * factorial(m);
    match &path.kind {
        PathKind::Connecting(p) => {
            let base = extend_unitized(g, phi, &vec![p.clone(); 2 * m + 1])?;
            let mut f = |t: f64| {
                let th = 2.0 * PI * (1.0 - t);
                let c = (Complex64::from_polar(1.0, -th) - ONE) * (Complex64::from_polar(1.0, th) - ONE);
                base * (-2.0 * PI) * I * c.powu(m as u32)
            };
            let res = integrate(&mut f, 0.0, 1.0, tol * PI / (4.0 * factorial(m)), cfg)?;
            let value = res.value * coef / (PI * I);
            let mut r = PairingReport::new("tau", m, value, res.error * factorial(m) / PI, 1.0, tol);
            r.provenance.insert("path".into(), "connecting".into());
            Ok(r)
        }
        PathKind::Rho { model, inverse } => {
            model.require_gap()?;
            let tensor = SpectralTensor::build(phi, model)?;
            rho_tau_from_tensor(&tensor, model.gap, m, *inverse, tol, cfg)
        }
        PathKind::Sampled => tau_sampled(g, phi, path, m, tol),
    }
}

/// `τ` of the rho path, integrated in `r = 1/t`:
/// `τ(U) = −((−1)^m m!/πi) ∫_0^∞ φ̄(u_r⁻¹u̇_r ⊗ (u_r⁻¹ ⊗ u_r)^m) dr`.
pub fn rho_tau_from_tensor(
    tensor: &SpectralTensor,
    gap: f64,
    m: usize,
    inverse: bool,
    tol: f64,
    cfg: QuadConfig,
) -> Result<PairingReport> {
    let coef = parity(m) * factorial(m);
    let env = envelope(tensor, m);
    let mut f = |r: f64| {
        let w = if inverse {
            weights(&tensor.eigenvalues, |x| -udot_uinv(r, x), |x| u_t(r, x) - ONE, |x| u_t(r, x).inv() - ONE, m)
        } else {
            weights(&tensor.eigenvalues, |x| udot_uinv(r, x), |x| u_t(r, x).inv() - ONE, |x| u_t(r, x) - ONE, m)
        };
        tensor.contract(&w)
    };
    let scale = factorial(m) / PI;
    let (res, t_max, tail) = integrate_half_line(&mut f, &env, gap, tol / scale, cfg)?;
    let value = -res.value * coef / (PI * I);
    let mut r = PairingReport::new("tau", m, value, (res.error + tail) * scale, t_max, tol);
    r.provenance.insert("path".into(), if inverse { "rho-inverse" } else { "rho" }.into());
    Ok(r)
}

/// `τ` of the rho path from sampled algebra elements `u_r` (or `u_r⁻¹`) on a
/// uniform grid in `r = 1/t`, with finite-difference derivatives.
pub fn rho_tau_sampled(g: &Group, phi: &Cochain, model: &SpectralModel, m: usize, inverse: bool, tol: f64) -> Result<PairingReport> {
    model.require_gap()?;
    let top = model.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let r_max = (2.0 * (1.0 / tol).ln()).sqrt() / model.gap;
    let h = 0.01 / top.max(1.0);
    let steps = ((r_max / h).ceil() as usize).max(8);
    let grid: Vec<f64> = (0..=steps).map(|k| r_max * k as f64 / steps as f64).collect();
    let s = if inverse { -1.0 } else { 1.0 };
    let samples = grid
        .iter()
        .map(|&r| model.functional_calculus_unitized(|x| Complex64::from_polar(1.0, s * 2.0 * PI * crate::spectral::f_t(r, x)), ONE))
        .collect();
    let path = InvertiblePath { grid, samples, kind: PathKind::Sampled };
    let mut r = tau_sampled(g, phi, &path, m, tol)?;
    // The grid runs against the orientation of t.
    r.value = -r.value;
    r.provenance.insert("path".into(), if inverse { "rho-inverse-sampled" } else { "rho-sampled" }.into());
    Ok(r)
}

fn extend_unitized(g: &Group, phi: &Cochain, args: &[AlgebraElement]) -> Result<Complex64> {
    crate::spectral::extend_cocycle_eval(g, phi, args, true)
}

fn tau_sampled(g: &Group, phi: &Cochain, path: &InvertiblePath, m: usize, tol: f64) -> Result<PairingReport> {
    let k = path.grid.len();
    if k < 6 || path.samples.len() != k {
        return Err(Error::validation("grid", "sampled paths need at least 6 points and one sample per point"));
    }
    let h = path.grid[1] - path.grid[0];
    if path.grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-12 * h.abs().max(1.0)) || h <= 0.0 {
        return Err(Error::validation("grid", "sampled paths need a uniform increasing grid"));
    }
    let inv: Vec<AlgebraElement> = path.samples.iter().map(|w| invert(g, w)).collect::<Result<_>>()?;
    let lin = |c: &[(f64, usize)]| {
        let mut out = AlgebraElement::zero(path.samples[0].n);
        for &(w, i) in c {
            out = out.plus(&path.samples[i].scaled(Complex64::new(w, 0.0)));
        }
        out.unit = Complex64::new(0.0, 0.0);
        out
    };
    let mut values = vec![];
    for i in 0..k {
        let d = if i >= 2 && i + 2 < k {
            lin(&[(-1.0 / (12.0 * h), i + 2), (8.0 / (12.0 * h), i + 1), (-8.0 / (12.0 * h), i - 1), (1.0 / (12.0 * h), i - 2)])
        } else if i == 0 {
            let c = 12.0 * h;
            lin(&[(-25.0 / c, 0), (48.0 / c, 1), (-36.0 / c, 2), (16.0 / c, 3), (-3.0 / c, 4)])
        } else if i == 1 {
            let c = 12.0 * h;
            lin(&[(-3.0 / c, 0), (-10.0 / c, 1), (18.0 / c, 2), (-6.0 / c, 3), (1.0 / c, 4)])
        } else if i == k - 2 {
            let c = 12.0 * h;
            lin(&[(3.0 / c, k - 1), (10.0 / c, k - 2), (-18.0 / c, k - 3), (6.0 / c, k - 4), (-1.0 / c, k - 5)])
        } else {
            let c = 12.0 * h;
            lin(&[(25.0 / c, k - 1), (-48.0 / c, k - 2), (36.0 / c, k - 3), (-16.0 / c, k - 4), (3.0 / c, k - 5)])
        };
        let lead = inv[i].mul(g, &d)?;
        let mut args = vec![lead];
        for _ in 0..m {
            args.push(inv[i].clone());
            args.push(path.samples[i].clone());
        }
        values.push(extend_unitized(g, phi, &args)?);
    }
    // Composite Simpson, trapezoid on a trailing odd panel.
    let mut total = Complex64::new(0.0, 0.0);
    let mut i = 0;
    while i + 2 < k {
        total += (values[i] + values[i + 1] * 4.0 + values[i + 2]) * (h / 3.0);
        i += 2;
    }
    if i + 1 < k {
        total += (values[i] + values[i + 1]) * (h / 2.0);
    }
    let coef = parity(m) * factorial(m);
    let value = total * coef / (PI * I);
    let mut r = PairingReport::new("tau", m, value, f64::NAN, path.grid[k - 1], tol);
    r.provenance.insert("path".into(), "sampled".into());
    r.provenance.insert("derivative".into(), format!("central differences, step {h:.17e}"));
    Ok(r)
}

/// `ch_φ(p) = ((−1)^m (2m)!/m!) φ(p^{⊗2m+1})`.
pub fn chern_character(g: &Group, phi: &Cochain, p: &AlgebraElement, m: usize) -> Result<Complex64> {
    check_m(m)?;
    check_degree(phi, 2 * m)?;
    check_idempotent(g, p)?;
    let v = extend_unitized(g, phi, &vec![p.clone(); 2 * m + 1])?;
    Ok(v * (parity(m) * factorial(2 * m) / factorial(m)))
}

/// Exact Chern character for an idempotent with rational coefficients.
pub fn chern_character_exact(g: &Group, phi: &Cochain, p: &UnitizedElement, m: usize) -> Result<QC> {
    check_degree(phi, 2 * m)?;
    let v = unitized_eval(phi, g, &vec![p.clone(); 2 * m + 1])?;
    let c = parity(m) as i64 * (factorial(2 * m) / factorial(m)) as i64;
    Ok(v * crate::rational::qc_int(c))
}

/// Maximal discrepancy of `m η_{bφ}(D,t) = d/dt φ̄((ū_t ⊗ ū_t⁻¹)^{⊗m})` on a grid.
pub fn verify_transgression(g: &Group, phi: &Cochain, model: &SpectralModel, m: usize, grid: &[f64], step: f64) -> Result<PairingReport> {
    if m == 0 {
        return Err(Error::validation("m", "transgression needs m >= 1"));
    }
    check_m(m)?;
    check_degree(phi, 2 * m - 1)?;
    model.require_gap()?;
    let bphi = cyclic_coboundary(g, phi)?;
    let t_b = SpectralTensor::build(&bphi, model)?;
    let t_phi = SpectralTensor::build(phi, model)?;
    let rhs_fn = |t: f64| {
        let mut w = vec![];
        for _ in 0..m {
            w.push(t_phi.eigenvalues.iter().map(|&x| u_t(t, x) - ONE).collect::<Vec<_>>());
            w.push(t_phi.eigenvalues.iter().map(|&x| u_t(t, x).inv() - ONE).collect());
        }
        t_phi.contract(&w)
    };
    let mut worst = 0.0f64;
    let mut at = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &t in grid {
        let lhs = eta_integrand_tensor(&t_b, m, t) * m as f64;
        let rhs = (-rhs_fn(t + 2.0 * step) + rhs_fn(t + step) * 8.0 - rhs_fn(t - step) * 8.0 + rhs_fn(t - 2.0 * step)) / (12.0 * step);
        let d = (lhs - rhs).norm();
        if d >= worst {
            worst = d;
            at = (lhs, rhs);
        }
    }
    let mut r = PairingReport::new("transgression", m, Complex64::new(worst, 0.0), 0.0, grid.last().copied().unwrap_or(0.0), 1e-6);
    r.checks.push(CheckOutcome { name: "max-discrepancy".into(), lhs: at.0, rhs: at.1, diff: worst, tol: 1e-6, passed: worst < 1e-6 });
    r.provenance.insert("step".into(), format!("{step:.17e}"));
    Ok(r)
}

/// Result of the periodicity comparison.
#[derive(Clone, Debug, Serialize)]
pub struct SInvarianceReport {
    pub m: usize,
    pub eta: CheckOutcome,
    /// `η_{Sφ}` against `(−1)·η_φ`, the relation the normalizations actually produce.
    pub eta_sign_flipped: CheckOutcome,
    pub ch: Vec<CheckOutcome>,
    pub passed: bool,
}

/// Compares `η` and `ch` for `φ` and `S_γφ`.
pub fn verify_s_invariance(
    g: &Group,
    phi: &Cochain,
    model: &SpectralModel,
    m: usize,
    idempotents: &[AlgebraElement],
    tol: f64,
) -> Result<SInvarianceReport> {
    if !cyclic_coboundary(g, phi)?.is_zero() {
        return Err(Error::validation("cocycle", "input is not a cocycle"));
    }
    let s_phi = periodicity_s(g, phi, phi.flavor == Flavor::CyclicDelocalized)?;
    let e0 = eta_invariant(phi, model, m, tol / 10.0)?.value;
    let e1 = eta_invariant(&s_phi, model, m + 1, tol / 10.0)?.value;
    let eta = CheckOutcome::new("eta", e1, e0, tol);
    let eta_sign_flipped = CheckOutcome::new("eta-sign-flipped", e1, -e0, tol);
    let mut ch = vec![];
    for p in idempotents {
        let c0 = chern_character(g, phi, p, m)?;
        let c1 = chern_character(g, &s_phi, p, m + 1)?;
        ch.push(CheckOutcome::new("ch", c1, c0, 1e-10));
    }
    let passed = eta.passed && ch.iter().all(|c| c.passed);
    Ok(SInvarianceReport { m, eta, eta_sign_flipped, ch, passed })
}

/// Negative spectral projection `P₋` of a model.
pub fn negative_projection(model: &SpectralModel) -> AlgebraElement {
    let mut p = AlgebraElement::zero(model.d.n);
    for (l, q) in model.eigenvalues.iter().zip(&model.projections) {
        if *l < 0.0 {
            p = p.plus(q);
        }
    }
    p
}

/// Composite check at model scale:
/// `τ(∂p) = −2 ch(p)`, `τ(ρ) = (−1)^m η` and `ch(P₋) = ((−1)^{m+1}/2) η`.
pub fn aps_model_check(g: &Group, phi: &Cochain, p: &AlgebraElement, model: &SpectralModel, m: usize, tol: f64) -> Result<PairingReport> {
    let sign = parity(m);
    let eta = eta_invariant(phi, model, m, tol / 10.0)?;
    let ch_p = chern_character(g, phi, p, m)?;
    let tau_p = determinant_tau(g, phi, &connecting_path(g, p, &[0.0, 1.0])?, m, tol / 10.0)?.value;
    let tensor = SpectralTensor::build(phi, model)?;
    let tau_u = rho_tau_from_tensor(&tensor, model.gap, m, false, tol / 10.0, QuadConfig::default())?.value;
    let tau_v = rho_tau_from_tensor(&tensor, model.gap, m, true, tol / 10.0, QuadConfig::default())?.value;
    let target = eta.value * sign;
    let (orientation, tau_rho) = if (tau_v - target).norm() <= (tau_u - target).norm() { ("inverse", tau_v) } else { ("direct", tau_u) };
    let pm = negative_projection(model);
    let ch_pm = chern_character(g, phi, &pm, m)?;
    let mut r = PairingReport::new("aps-model", m, ch_pm, eta.error, eta.truncation, tol);
    r.checks.push(CheckOutcome::new("tau-connecting=-2ch", tau_p, ch_p * -2.0, tol));
    r.checks.push(CheckOutcome::new("tau-rho=(-1)^m-eta", tau_rho, target, tol));
    let sampled = rho_tau_sampled(g, phi, model, m, orientation == "inverse", tol)?;
    r.checks.push(CheckOutcome::new("tau-rho-sampled=(-1)^m-eta", sampled.value, target, tol));
    r.checks.push(CheckOutcome::new("ch(P-)=(-1)^(m+1)/2-eta", ch_pm, eta.value * (-sign / 2.0), tol));
    // The connecting path of p standing in for the rho path: η = (−1)^m τ(∂p).
    r.checks.push(CheckOutcome::new("ch(p)=(-1)^(m+1)/2-eta-via-connecting", ch_p, tau_p * sign * (-sign / 2.0), tol));
    r.provenance.insert("rho-orientation".into(), orientation.into());
    r.provenance.insert("tau-rho-direct".into(), format!("{:.17e}{:+.17e}i", tau_u.re, tau_u.im));
    r.provenance.insert("tau-rho-inverse".into(), format!("{:.17e}{:+.17e}i", tau_v.re, tau_v.im));
    Ok(r)
}

/// `|φ(f(tD) ⊗ ⋯ ⊗ f(tD))|` along the given scales.
pub fn schwartz_profile(tensor: &SpectralTensor, f: impl Fn(f64) -> f64, scales: &[f64]) -> Vec<f64> {
    scales
        .iter()
        .map(|&t| {
            let w: Vec<Vec<Complex64>> = (0..tensor.arity)
                .map(|_| tensor.eigenvalues.iter().map(|&x| Complex64::new(f(t * x), 0.0)).collect())
                .collect();
            tensor.contract(&w).norm()
        })
        .collect()
}

/// Builds a model from a Hermitian element and checks its gap.
pub fn gapped_model(g: &Group, d: &AlgebraElement) -> Result<SpectralModel> {
    let model = eigendecompose(g, d)?;
    model.require_gap()?;
    Ok(model)
}

/// Exact cochain evaluation as a float, for reports.
pub fn float_value(v: &QC) -> Complex64 {
    to_c64(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;

    fn z2() -> (Group, ClassHandle, SpectralModel) {
        let g = Group::cyclic(2);
        let cl = g.conjugacy_class(&GroupElement::Residue(1), 4).unwrap();
        let d = AlgebraElement::basis(1, GroupElement::Residue(0), ONE)
            .plus(&AlgebraElement::basis(1, GroupElement::Residue(1), Complex64::new(2.0, 0.0)));
        let model = gapped_model(&g, &d).unwrap();
        (g, cl, model)
    }

    fn half_e_plus_gamma() -> AlgebraElement {
        AlgebraElement::basis(1, GroupElement::Residue(0), Complex64::new(0.5, 0.0))
            .plus(&AlgebraElement::basis(1, GroupElement::Residue(1), Complex64::new(0.5, 0.0)))
    }

    #[test]
    fn worked_eta_value() {
        let (g, cl, model) = z2();
        let phi = trace_cocycle(&g, &cl);
        let r = eta_invariant(&phi, &model, 0, 1e-10).unwrap();
        assert!((r.value - ONE).norm() < 1e-9, "{:?}", r.value);
        assert!(r.error <= 1e-10);
        let i1 = eta_integrand(&phi, &model, 0, 1.0).unwrap();
        let expect = I * 2.0 * PI.sqrt() * (3.0 * (-9.0f64).exp() + (-1.0f64).exp()) / 2.0;
        assert!((i1 - expect).norm() < 1e-14);
    }

    #[test]
    fn worked_tau_and_ch() {
        let (g, cl, model) = z2();
        let phi = trace_cocycle(&g, &cl);
        let p = half_e_plus_gamma();
        let tau = determinant_tau(&g, &phi, &connecting_path(&g, &p, &[0.0, 1.0]).unwrap(), 0, 1e-10).unwrap();
        assert!((tau.value + ONE).norm() < 1e-9);
        let ch = chern_character(&g, &phi, &p, 0).unwrap();
        assert!((ch - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let rho = determinant_tau(&g, &phi, &rho_path(&model, &[0.0, 1.0], true).unwrap(), 0, 1e-10).unwrap();
        assert!((rho.value - ONE).norm() < 1e-8);
    }

    #[test]
    fn sampled_constant_path_is_zero() {
        let (g, cl, _) = z2();
        let phi = trace_cocycle(&g, &cl);
        let grid: Vec<f64> = (0..9).map(|k| k as f64 / 8.0).collect();
        let path = InvertiblePath { grid: grid.clone(), samples: vec![AlgebraElement::unit(1); 9], kind: PathKind::Sampled };
        let r = determinant_tau(&g, &phi, &path, 0, 1e-8).unwrap();
        assert!(r.value.norm() < 1e-14);
    }

    #[test]
    fn sampled_connecting_path_matches_closed_form() {
        let (g, cl, _) = z2();
        let phi = trace_cocycle(&g, &cl);
        let p = half_e_plus_gamma();
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
        let mut path = connecting_path(&g, &p, &grid).unwrap();
        path.kind = PathKind::Sampled;
        let r = determinant_tau(&g, &phi, &path, 0, 1e-8).unwrap();
        assert!((r.value + ONE).norm() < 1e-6, "{:?}", r.value);
    }
}
