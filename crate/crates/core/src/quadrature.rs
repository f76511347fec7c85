//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    pub panels: usize,
}

/// Refinement limits.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    pub max_depth: usize,
    pub max_evaluations: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { max_depth: 40, max_evaluations: 2_000_000 }
    }
}

fn kronrod(f: &mut dyn FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by recursive bisection.
///
/// Panels are summed left to right, so the result is deterministic.
pub fn integrate(f: &mut dyn FnMut(f64) -> Complex64, a: f64, b: f64, tol: f64, cfg: QuadConfig) -> Result<QuadResult> {
    if !(tol > 0.0) {
        return Err(Error::validation("tol", "tolerance must be positive"));
    }
    let mut out = QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0, panels: 0 };
    if a == b {
        return Ok(out);
    }
    let mut stalled = false;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = kronrod(f, lo, hi);
        out.evaluations += 15;
        let local = tol * (hi - lo).abs() / (b - a).abs();
        let floor = 64.0 * f64::EPSILON * v.norm();
        if e <= local.max(floor) || depth >= cfg.max_depth || out.evaluations >= cfg.max_evaluations {
            if e > local.max(floor) {
                stalled = true;
            }
            out.value += v;
            out.error += e;
            out.panels += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            // Right half pushed first so the left half is summed first.
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if stalled && out.error > tol {
        return Err(Error::Convergence(format!(
            "error estimate {:e} above tolerance {:e} on [{a}, {b}] after {} evaluations",
            out.error, tol, out.evaluations
        )));
    }
    Ok(out)
}
