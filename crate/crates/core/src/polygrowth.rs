//! The lexicographic retraction onto a centralizer, its coset version, the
//! induced map on simplices, growth bounds and Lipschitz checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::cochain::Evaluate;
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement};

/// Retraction `f` of the group onto `Z_γ`.
///
/// `f(g)` is the shortlex-least element among the centralizer elements at
/// minimal distance from `g`, restricted to those within distance `‖g‖`.
pub struct Retraction<'a> {
    group: &'a Group,
    gamma: GroupElement,
    /// Centralizer elements in shortlex order, with their lengths.
    centralizer: Vec<(GroupElement, usize)>,
    radius: usize,
}

impl<'a> Retraction<'a> {
    /// Enumerates the centralizer within `radius`; `f` is then available for `‖g‖ ≤ radius/2`.
    pub fn new(group: &'a Group, gamma: &GroupElement, radius: usize) -> Result<Self> {
        let z = group.centralizer(gamma, radius)?;
        Self::from_elements(group, gamma, z, radius)
    }

    pub fn from_class(group: &'a Group, cl: &ClassHandle) -> Result<Self> {
        Self::from_elements(group, &cl.gamma, cl.centralizer.clone(), cl.radius)
    }

    fn from_elements(group: &'a Group, gamma: &GroupElement, z: Vec<GroupElement>, radius: usize) -> Result<Self> {
        let centralizer = z
            .into_iter()
            .map(|x| {
                let l = group.word_length(&x)?;
                Ok((x, l))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Retraction { group, gamma: gamma.clone(), centralizer, radius })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn centralizer(&self) -> impl Iterator<Item = &GroupElement> {
        self.centralizer.iter().map(|(z, _)| z)
    }

    pub fn in_centralizer(&self, g: &GroupElement) -> Result<bool> {
        Ok(self.group.multiply(g, &self.gamma)? == self.group.multiply(&self.gamma, g)?)
    }

    fn within(&self, a: &GroupElement, b: &GroupElement, cap: usize) -> Result<Option<usize>> {
        let d = self.group.multiply(&self.group.inverse(a)?, b)?;
        match self.group.word_length_within(&d, cap) {
            Ok(l) if l <= cap => Ok(Some(l)),
            Ok(_) | Err(Error::RadiusExceeded { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// The value `f(g)`.
    pub fn f(&self, g: &GroupElement) -> Result<GroupElement> {
        let len = self.group.word_length(g)?;
        if self.in_centralizer(g)? {
            return Ok(g.clone());
        }
        if 2 * len > self.radius && !self.group.is_finite() {
            return Err(Error::RadiusExceeded { radius: self.radius });
        }
        let mut best: Option<(usize, &GroupElement)> = None;
        for (z, lz) in &self.centralizer {
            if *lz > 2 * len {
                break;
            }
            let cap = best.map_or(len, |(d, _)| d);
            if let Some(d) = self.within(z, g, cap)? {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, z));
                }
            }
        }
        // e is always admissible, so a minimizer exists.
        Ok(best.map(|(_, z)| z.clone()).unwrap_or_else(|| self.group.identity()))
    }

    /// `f̃(hZ_γ)`: the value `f(hz)` for the `z` minimizing `d(hz, f(hz))`,
    /// ties broken by shortlex order of `f(hz)` and then of `z`.
    pub fn coset_f(&self, h: &GroupElement) -> Result<GroupElement> {
        let mut best: Option<(usize, usize, GroupElement)> = None;
        let mut any = false;
        for (z, _) in &self.centralizer {
            let hz = self.group.multiply(h, z)?;
            let l = self.group.word_length(&hz)?;
            if 2 * l > self.radius && !self.group.is_finite() {
                continue;
            }
            any = true;
            let fz = self.f(&hz)?;
            let d = self.group.distance(&hz, &fz)?;
            let rank = self.group.shortlex_rank(&fz)?;
            if best.as_ref().is_none_or(|(bd, br, _)| (d, rank) < (*bd, *br)) {
                best = Some((d, rank, fz));
            }
        }
        if !any {
            return Err(Error::RadiusExceeded { radius: self.radius });
        }
        Ok(best.expect("nonempty").2)
    }

    /// Pairs `(z, g)` with `f(zg) ≠ z f(g)` among the given elements.
    pub fn equivariance_defects(&self, elems: &[GroupElement]) -> Result<Vec<(GroupElement, GroupElement)>> {
        let mut out = vec![];
        for (z, _) in &self.centralizer {
            for g in elems {
                let zg = self.group.multiply(z, g)?;
                if !self.group.is_finite() && 2 * self.group.word_length(&zg)? > self.radius {
                    continue;
                }
                if self.f(&zg)? != self.group.multiply(z, &self.f(g)?)? {
                    out.push((z.clone(), g.clone()));
                }
            }
        }
        Ok(out)
    }
}

/// A point `Σ t_i g_i` of a simplex together with a coset representative.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    pub weights: Vec<BigRational>,
    pub vertices: Vec<GroupElement>,
    pub coset: GroupElement,
}

impl SimplexPoint {
    pub fn new(weights: Vec<BigRational>, vertices: Vec<GroupElement>, coset: GroupElement) -> Result<Self> {
        if weights.len() != vertices.len() || weights.is_empty() {
            return Err(Error::validation("weights", "one weight per vertex required"));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::validation("weights", "weights must be nonnegative"));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::validation("weights", format!("weights sum to {total}, not 1")));
        }
        Ok(SimplexPoint { weights, vertices, coset })
    }
}

/// `ψ`: `f` on every vertex and `f̃` on the coset slot.
pub fn simplex_map_psi(r: &Retraction<'_>, p: &SimplexPoint) -> Result<SimplexPoint> {
    Ok(SimplexPoint {
        weights: p.weights.clone(),
        vertices: p.vertices.iter().map(|v| r.f(v)).collect::<Result<_>>()?,
        coset: r.coset_f(&p.coset)?,
    })
}

/// Certificate `|φ(g_0,…,g_n)| ≤ R ∏(1+‖g_i‖)^{2k}` on a ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthBound {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub r_phi: BigRational,
    pub k: u32,
    pub max_radius_checked: usize,
}

/// Largest tuple count `growth_bound_estimate` will enumerate.
pub const TUPLE_CAP: usize = 4_000_000;

struct Sample {
    /// `|φ|²`.
    norm2: BigRational,
    /// `∏(1+‖g_i‖)`.
    weight: BigInt,
    radius: usize,
}

fn smallest_integer_root(m: &BigRational) -> BigInt {
    // Least positive integer r with r² ≥ m.
    if !m.is_positive() {
        return BigInt::one();
    }
    let c = m.ceil().to_integer();
    let mut r = c.sqrt();
    while BigRational::from_integer(&r * &r) < *m {
        r += 1;
    }
    r.max(BigInt::one())
}

fn fit(samples: &[Sample], k: u32, radius: usize) -> BigInt {
    let mut m = BigRational::zero();
    for s in samples.iter().filter(|s| s.radius <= radius) {
        let p = BigRational::from_integer(s.weight.pow(4 * k));
        let v = &s.norm2 / p;
        if v > m {
            m = v;
        }
    }
    smallest_integer_root(&m)
}

fn certifies(samples: &[Sample], k: u32, r: &BigInt) -> bool {
    let r2 = BigRational::from_integer(r * r);
    samples.iter().all(|s| s.norm2 <= &r2 * BigRational::from_integer(s.weight.pow(4 * k)))
}

/// Smallest `k ≤ 8` whose integer constant, fitted on half the radius,
/// still certifies every tuple in the full ball; `R` is then refitted on the
/// full ball. Never looks beyond `radius`.
pub fn growth_bound_estimate(phi: &dyn Evaluate, g: &Group, radius: usize) -> Result<GrowthBound> {
    let ball = g.ball(radius)?;
    let n = phi.degree();
    let count = ball.len().checked_pow(n as u32 + 1).unwrap_or(usize::MAX);
    if count > TUPLE_CAP {
        return Err(Error::Capacity(format!("{count} tuples exceed {TUPLE_CAP}")));
    }
    let lens = ball.iter().map(|x| g.word_length(x)).collect::<Result<Vec<_>>>()?;
    let mut samples = vec![];
    let mut idx = vec![0usize; n + 1];
    let mut t: Vec<GroupElement> = vec![ball[0].clone(); n + 1];
    loop {
        for i in 0..=n {
            t[i] = ball[idx[i]].clone();
        }
        let v = phi.eval(g, &t)?;
        let norm2 = &v.re * &v.re + &v.im * &v.im;
        if !norm2.is_zero() {
            let weight = idx.iter().map(|&i| BigInt::from(1 + lens[i])).product();
            let r = idx.iter().map(|&i| lens[i]).max().unwrap_or(0);
            samples.push(Sample { norm2, weight, radius: r });
        }
        let mut j = 0;
        while j <= n {
            idx[j] += 1;
            if idx[j] < ball.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j > n {
            break;
        }
    }
    for k in 0..=8u32 {
        let half = fit(&samples, k, radius / 2);
        if certifies(&samples, k, &half) {
            let r = fit(&samples, k, radius);
            return Ok(GrowthBound { r_phi: BigRational::from_integer(r), k, max_radius_checked: radius });
        }
    }
    let r = fit(&samples, 8, radius);
    Ok(GrowthBound { r_phi: BigRational::from_integer(r), k: 8, max_radius_checked: radius })
}

impl GrowthBound {
    /// Re-checks the certificate on the given tuples.
    pub fn holds_on(&self, phi: &dyn Evaluate, g: &Group, tuples: &[Vec<GroupElement>]) -> Result<bool> {
        let r2 = &self.r_phi * &self.r_phi;
        for t in tuples {
            let v = phi.eval(g, t)?;
            let norm2 = &v.re * &v.re + &v.im * &v.im;
            let mut w = BigInt::one();
            for x in t {
                w *= BigInt::from(1 + g.word_length(x)?);
            }
            if norm2 > &r2 * BigRational::from_integer(w.pow(4 * self.k)) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Result of a Lipschitz check over all pairs of a ball.
#[derive(Clone, Debug, Serialize)]
pub struct LipschitzReport {
    pub check: String,
    pub group: String,
    pub gamma: String,
    pub radius: usize,
    /// Maximal ratio `d(f(g),f(h))/d(g,h)` as a reduced fraction.
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub bound: BigRational,
    pub witness_pair: Option<(String, String)>,
    pub pairs: usize,
    /// `f(z) = z` on every centralizer element of the ball.
    pub fixes_centralizer: bool,
    /// `‖f(g)‖ ≤ 2‖g‖` on the ball.
    pub norm_bound_holds: bool,
    /// Pairs `(z, g)` in the ball with `f(zg) ≠ z f(g)`.
    pub equivariance_defects: usize,
    pub passed: bool,
}

/// Maximal Lipschitz ratio of `f` over all pairs of the radius ball.
pub fn lipschitz_check(group: &Group, gamma: &GroupElement, radius: usize) -> Result<LipschitzReport> {
    // Images have length at most 2·radius, so their distances reach 4·radius.
    let wide = group.clone().with_search_radius(group.search_radius().max(4 * radius));
    let g = &wide;
    let r = Retraction::new(g, gamma, 2 * radius)?;
    let ball = g.ball(radius)?;
    let images = ball.iter().map(|x| r.f(x)).collect::<Result<Vec<_>>>()?;
    let mut best = (0usize, 1usize);
    let mut witness = None;
    let mut pairs = 0;
    for i in 0..ball.len() {
        for j in 0..ball.len() {
            if i == j {
                continue;
            }
            pairs += 1;
            let d = g.distance(&ball[i], &ball[j])?;
            let df = g.distance(&images[i], &images[j])?;
            if df * best.1 > best.0 * d {
                best = (df, d);
                witness = Some((g.name(&ball[i]), g.name(&ball[j])));
            }
        }
    }
    let mut fixes = true;
    let mut norm_ok = true;
    for (x, fx) in ball.iter().zip(&images) {
        if r.in_centralizer(x)? && fx != x {
            fixes = false;
        }
        if g.word_length(fx)? > 2 * g.word_length(x)? {
            norm_ok = false;
        }
    }
    let zball: Vec<GroupElement> = ball.iter().filter(|x| r.in_centralizer(x).unwrap_or(false)).cloned().collect();
    let sub = Retraction::from_elements(g, gamma, zball, 2 * radius)?;
    let defects = sub.equivariance_defects(&ball)?.len();
    let bound = BigRational::new(BigInt::from(best.0), BigInt::from(best.1));
    let passed = bound <= BigRational::from_integer(4.into()) && fixes;
    Ok(LipschitzReport {
        check: "lipschitz".into(),
        group: g.label(),
        gamma: g.name(gamma),
        radius,
        bound,
        witness_pair: witness,
        pairs,
        fixes_centralizer: fixes,
        norm_bound_holds: norm_ok,
        equivariance_defects: defects,
        passed,
    })
}
