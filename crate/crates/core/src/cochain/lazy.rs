//! Pointwise evaluation of the cochain maps, usable on infinite groups.

use num_traits::Zero;

use super::ops::{face, permutations, PERMUTATION_CAP};
use super::Evaluate;
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement};
use crate::rational::{qc_frac, QC};

/// A cochain given by a formula.
pub struct Lazy<'a> {
    degree: usize,
    f: Box<dyn Fn(&Group, &[GroupElement]) -> Result<QC> + 'a>,
}

impl<'a> Lazy<'a> {
    pub fn new(degree: usize, f: impl Fn(&Group, &[GroupElement]) -> Result<QC> + 'a) -> Self {
        Lazy { degree, f: Box::new(f) }
    }
}

impl Evaluate for Lazy<'_> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval(&self, g: &Group, t: &[GroupElement]) -> Result<QC> {
        if t.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch { expected: self.degree + 1, got: t.len() });
        }
        (self.f)(g, t)
    }
}

fn alt(i: usize, v: QC) -> QC {
    if i % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `(bφ)(t)`.
pub fn coboundary_at(phi: &dyn Evaluate, g: &Group, t: &[GroupElement]) -> Result<QC> {
    let mut s = QC::zero();
    for i in 0..t.len() {
        s += alt(i, phi.eval(g, &face(g, t, i)?)?);
    }
    Ok(s)
}

/// `(b̂φ)(t)`.
pub fn group_coboundary_at(phi: &dyn Evaluate, g: &Group, t: &[GroupElement]) -> Result<QC> {
    let mut s = QC::zero();
    for i in 0..t.len() {
        let mut u = t.to_vec();
        u.remove(i);
        s += alt(i, phi.eval(g, &u)?);
    }
    Ok(s)
}

/// `(Fφ)(t)`.
pub fn skew_at(phi: &dyn Evaluate, g: &Group, t: &[GroupElement]) -> Result<QC> {
    let n = t.len() - 1;
    if n > PERMUTATION_CAP {
        return Err(Error::PermutationCap { degree: n, cap: PERMUTATION_CAP });
    }
    let perms = permutations(n + 1);
    let fact = perms.len() as i64;
    let mut s = QC::zero();
    for (p, sg) in &perms {
        let u: Vec<GroupElement> = p.iter().map(|&j| t[j].clone()).collect();
        s += phi.eval(g, &u)? * qc_frac(*sg, fact);
    }
    Ok(s)
}

pub fn coboundary<'a>(phi: &'a dyn Evaluate) -> Lazy<'a> {
    Lazy::new(phi.degree() + 1, move |g, t| coboundary_at(phi, g, t))
}

pub fn group_coboundary<'a>(phi: &'a dyn Evaluate) -> Lazy<'a> {
    Lazy::new(phi.degree() + 1, move |g, t| group_coboundary_at(phi, g, t))
}

/// Membership of `y` in the class, with its witness.
///
/// For a truncated class a product reached outside the enumerated members is
/// looked up among conjugators within the search radius; finding one there
/// means the class handle lacks its witness.
pub fn class_witness<'c>(g: &Group, cl: &'c ClassHandle, y: &GroupElement) -> Result<Option<&'c GroupElement>> {
    if let Some(h) = cl.witness(y) {
        return Ok(Some(h));
    }
    if cl.exact {
        return Ok(None);
    }
    for h in g.ball(g.search_radius())? {
        if g.conjugate(&cl.gamma, &h)? == *y {
            return Err(Error::WitnessNotFound(g.name(y)));
        }
    }
    Ok(None)
}

/// `α(h, hg_0, hg_0g_1, …, hg_0⋯g_{n−1})`.
pub fn alpha_normalized(g: &Group, alpha: &dyn Evaluate, h: &GroupElement, t: &[GroupElement]) -> Result<QC> {
    let mut args = Vec::with_capacity(t.len());
    let mut cur = h.clone();
    args.push(cur.clone());
    for x in &t[..t.len() - 1] {
        cur = g.multiply(&cur, x)?;
        args.push(cur.clone());
    }
    alpha.eval(g, &args)
}

/// `φ_{α,γ}(t)`.
pub fn delocalized_cocycle_at(g: &Group, alpha: &dyn Evaluate, cl: &ClassHandle, t: &[GroupElement]) -> Result<QC> {
    let y = g.product(t)?;
    match class_witness(g, cl, &y)? {
        Some(h) => alpha_normalized(g, alpha, h, t),
        None => Ok(QC::zero()),
    }
}

pub fn delocalized_cocycle<'a>(alpha: &'a dyn Evaluate, cl: &'a ClassHandle) -> Lazy<'a> {
    Lazy::new(alpha.degree(), move |g, t| delocalized_cocycle_at(g, alpha, cl, t))
}

/// `ψ(F(g_0),…,F(g_n))` with `F(g_i) = h^{y_0}(g_i⋯g_n)^{−1}y_i`, zero off the class.
pub fn normalize_at(g: &Group, psi: &dyn Evaluate, cl: &ClassHandle, t: &[GroupElement]) -> Result<QC> {
    let y0 = g.product(t)?;
    let h = match class_witness(g, cl, &y0)? {
        Some(h) => h.clone(),
        None => return Ok(QC::zero()),
    };
    let n = t.len() - 1;
    let mut args = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let tail = g.product(&t[i..])?;
        let yi = g.multiply(&tail, &g.product(&t[..i])?)?;
        args.push(g.multiply(&g.multiply(&h, &g.inverse(&tail)?)?, &yi)?);
    }
    psi.eval(g, &args)
}

pub fn normalized<'a>(psi: &'a dyn Evaluate, cl: &'a ClassHandle) -> Lazy<'a> {
    Lazy::new(psi.degree(), move |g, t| normalize_at(g, psi, cl, t))
}
