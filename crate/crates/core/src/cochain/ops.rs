//! Materialized maps between cochain complexes.
//!
//! Every map here is a pull-back along a combinatorial map of tuples, so it is
//! computed by pushing each stored entry forward to the tuples that pull back
//! onto it. Maps whose fibres are infinite (b, b̂, building φ_{α,γ}) need a
//! finite group; the others work everywhere.

use num_traits::Zero;

use super::{Cochain, Flavor, Tuple};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement};
use crate::rational::{qc_frac, qc_int, QC};

/// Largest degree allowed in permutation sums.
pub const PERMUTATION_CAP: usize = 6;

fn sign(i: usize) -> i64 {
    if i % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Cyclic face `d_i` of an (n+1)-tuple: merges slots i, i+1, or wraps for i = n.
pub fn face(g: &Group, t: &[GroupElement], i: usize) -> Result<Tuple> {
    let n = t.len() - 1;
    if i < n {
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&t[..i]);
        out.push(g.multiply(&t[i], &t[i + 1])?);
        out.extend_from_slice(&t[i + 2..]);
        Ok(out)
    } else {
        let mut out = Vec::with_capacity(n);
        out.push(g.multiply(&t[n], &t[0])?);
        out.extend_from_slice(&t[1..n]);
        Ok(out)
    }
}

/// `φ ∘ d_i`, a cochain of degree n+1.
pub fn pull_face(g: &Group, phi: &Cochain, i: usize) -> Result<Cochain> {
    let n = phi.degree;
    if i > n + 1 {
        return Err(Error::Structural(format!("face index {i} out of range for degree {}", n + 1)));
    }
    let elems = g.elements()?;
    let mut out = phi.empty_like();
    out.degree = n + 1;
    for (k, v) in phi.entries() {
        for x in &elems {
            let xi = g.inverse(x)?;
            let mut a = Vec::with_capacity(n + 2);
            if i <= n {
                a.extend_from_slice(&k[..i]);
                a.push(x.clone());
                a.push(g.multiply(&xi, &k[i])?);
                a.extend_from_slice(&k[i + 1..]);
            } else {
                a.push(x.clone());
                a.extend_from_slice(&k[1..]);
                a.push(g.multiply(&k[0], &xi)?);
            }
            out.add_at(a, v);
        }
    }
    Ok(out)
}

/// `φ ∘ δ̂_i`, where δ̂_i deletes slot i.
pub fn pull_delete(g: &Group, phi: &Cochain, i: usize) -> Result<Cochain> {
    let n = phi.degree;
    let elems = g.elements()?;
    let mut out = phi.empty_like();
    out.degree = n + 1;
    for (k, v) in phi.entries() {
        for x in &elems {
            let mut a = k.clone();
            a.insert(i, x.clone());
            out.add_at(a, v);
        }
    }
    Ok(out)
}

fn accumulate(out: &mut Cochain, part: &Cochain, c: &QC) {
    for (t, v) in part.entries() {
        out.add_at(t.clone(), &(v * c));
    }
}

/// The Hochschild/cyclic coboundary `b`.
pub fn cyclic_coboundary(g: &Group, phi: &Cochain) -> Result<Cochain> {
    phi.require(&[Flavor::Cyclic, Flavor::CyclicDelocalized])?;
    let mut out = phi.empty_like();
    out.degree = phi.degree + 1;
    for i in 0..=phi.degree + 1 {
        accumulate(&mut out, &pull_face(g, phi, i)?, &qc_int(sign(i)));
    }
    Ok(out)
}

/// The group coboundary `b̂` (alternating deletions).
pub fn group_coboundary(g: &Group, phi: &Cochain) -> Result<Cochain> {
    phi.require(&[Flavor::HomogeneousGroup, Flavor::Relative])?;
    let mut out = phi.empty_like();
    out.degree = phi.degree + 1;
    for i in 0..=phi.degree + 1 {
        accumulate(&mut out, &pull_delete(g, phi, i)?, &qc_int(sign(i)));
    }
    Ok(out)
}

/// `β φ = Σ (−1)^i i (φ ∘ d_i)`.
pub fn beta(g: &Group, phi: &Cochain) -> Result<Cochain> {
    phi.require(&[Flavor::Cyclic, Flavor::CyclicDelocalized])?;
    let mut out = phi.empty_like();
    out.degree = phi.degree + 1;
    for i in 1..=phi.degree + 1 {
        accumulate(&mut out, &pull_face(g, phi, i)?, &qc_int(sign(i) * i as i64));
    }
    Ok(out)
}

/// The cyclic operator: `(𝔱φ)(a_0,…,a_n) = (−1)^n φ(a_n,a_0,…,a_{n−1})`.
pub fn cyclic_operator(phi: &Cochain) -> Cochain {
    let n = phi.degree;
    let s = qc_int(sign(n));
    let mut out = phi.empty_like();
    for (k, v) in phi.entries() {
        let mut a = k[1..].to_vec();
        a.push(k[0].clone());
        out.add_at(a, &(v * &s));
    }
    out
}

/// Average over powers of the cyclic operator; the result is 𝔱-invariant.
pub fn cyclic_symmetrize(phi: &Cochain) -> Cochain {
    let n = phi.degree;
    let mut out = phi.empty_like();
    let mut cur = phi.clone();
    let w = qc_frac(1, n as i64 + 1);
    for _ in 0..=n {
        accumulate(&mut out, &cur, &w);
        cur = cyclic_operator(&cur);
    }
    out
}

pub(crate) fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = vec![];
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(k: usize, p: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if k == p.len() {
            let mut inv = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            out.push((p.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(k + 1, p, out);
            p.swap(k, i);
        }
    }
    rec(0, &mut p, &mut out);
    out.sort();
    out
}

/// `(Fφ)(h) = (1/(n+1)!) Σ_σ sgn(σ) φ(h_{σ(0)},…,h_{σ(n)})`.
pub fn skew_symmetrize(phi: &Cochain) -> Result<Cochain> {
    phi.require(&[Flavor::HomogeneousGroup, Flavor::Relative])?;
    let n = phi.degree;
    if n > PERMUTATION_CAP {
        return Err(Error::PermutationCap { degree: n, cap: PERMUTATION_CAP });
    }
    let perms = permutations(n + 1);
    let fact = perms.len() as i64;
    let mut out = phi.empty_like();
    for (k, v) in phi.entries() {
        for (p, s) in &perms {
            // h with h_{σ(i)} = k_i pulls back onto k.
            let mut h = k.clone();
            for i in 0..=n {
                h[p[i]] = k[i].clone();
            }
            out.add_at(h, &(v * qc_frac(*s, fact)));
        }
    }
    Ok(out)
}

/// `(Kψ)(h_0,…,h_{n−1}) = (−1)^n ψ(h_0,…,h_{n−1},e)` for ψ of degree n.
fn cone(g: &Group, psi: &Cochain) -> Cochain {
    let n = psi.degree;
    let e = g.identity();
    let s = qc_int(sign(n));
    let mut out = psi.empty_like();
    out.degree = n - 1;
    for (k, v) in psi.entries() {
        if k[n] == e {
            out.add_at(k[..n].to_vec(), &(v * &s));
        }
    }
    out
}

/// Chain homotopy between F and the identity: `p_n φ = K(Fφ − φ)`, with K
/// appending the identity element in the last slot.
pub fn chain_homotopy_p(g: &Group, phi: &Cochain, n: usize) -> Result<Cochain> {
    if n == 0 {
        return Err(Error::validation("n", "chain homotopy needs n >= 1"));
    }
    if phi.degree != n {
        return Err(Error::DegreeMismatch { expected: n, got: phi.degree });
    }
    let d = skew_symmetrize(phi)?.minus(phi)?;
    Ok(cone(g, &d))
}

/// `(Rα)(g_0,…,g_n) = Σ_{r_i=1}^{ord γ} α(γ^{r_0}g_0,…,γ^{r_n}g_n)`.
pub fn averaging_r(g: &Group, alpha: &Cochain, cl: &ClassHandle) -> Result<Cochain> {
    alpha.require(&[Flavor::HomogeneousGroup, Flavor::Relative])?;
    if cl.order == 0 {
        return Err(Error::UnsupportedOrder(format!("{} has infinite order", g.name(&cl.gamma))));
    }
    let n = alpha.degree;
    let ord = cl.order as usize;
    let gi = g.inverse(&cl.gamma)?;
    let mut inv_powers = Vec::with_capacity(ord);
    let mut cur = gi.clone();
    for _ in 0..ord {
        inv_powers.push(cur.clone());
        cur = g.multiply(&cur, &gi)?;
    }
    let mut out = alpha.empty_like().relabel(Flavor::Relative).with_gamma(Some(cl.gamma.clone()));
    let mut idx = vec![0usize; n + 1];
    for (k, v) in alpha.entries() {
        idx.iter_mut().for_each(|x| *x = 0);
        loop {
            let a = (0..=n).map(|i| g.multiply(&inv_powers[idx[i]], &k[i])).collect::<Result<Vec<_>>>()?;
            out.add_at(a, v);
            let mut j = 0;
            while j <= n {
                idx[j] += 1;
                if idx[j] < ord {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j > n {
                break;
            }
        }
    }
    Ok(out)
}

/// Inclusion of γ-invariant relative cochains into the larger complex.
pub fn inclusion_iota(alpha: &Cochain) -> Cochain {
    alpha.clone().relabel(Flavor::Relative)
}

/// Average over the enumerated centralizer acting diagonally on the left.
pub fn centralizer_average(g: &Group, alpha: &Cochain, cl: &ClassHandle) -> Result<Cochain> {
    let z = &cl.centralizer;
    let w = qc_frac(1, z.len() as i64);
    let mut out = alpha.empty_like();
    for (k, v) in alpha.entries() {
        for zz in z {
            let a = k.iter().map(|x| g.multiply(zz, x)).collect::<Result<Vec<_>>>()?;
            out.add_at(a, &(v * &w));
        }
    }
    Ok(out)
}

/// Projects a group cochain onto the relative complex: centralizer average,
/// skew-symmetrization, then γ-averaging.
pub fn relative_projection(g: &Group, alpha: &Cochain, cl: &ClassHandle) -> Result<Cochain> {
    let a = centralizer_average(g, &alpha.clone().relabel(Flavor::HomogeneousGroup), cl)?;
    let a = skew_symmetrize(&a)?;
    averaging_r(g, &a, cl)
}

/// Explicit delocalized cocycle `φ_{α,γ}`, enumerated over all tuples whose
/// product lies in the class.
pub fn build_delocalized_cocycle(g: &Group, alpha: &Cochain, cl: &ClassHandle) -> Result<Cochain> {
    alpha.require(&[Flavor::Relative, Flavor::HomogeneousGroup])?;
    if !cl.nontrivial {
        return Err(Error::validation("class", "delocalized cocycles need a nontrivial class"));
    }
    let n = alpha.degree;
    let elems = g.elements()?;
    let mut out = Cochain::zero(n, Flavor::CyclicDelocalized).with_gamma(Some(cl.gamma.clone()));
    for_each_prefix(&elems, n, &mut |prefix| {
        let prod = g.product(prefix)?;
        let pinv = g.inverse(&prod)?;
        for (y, h) in cl.members.iter().zip(&cl.witnesses) {
            let mut t = prefix.to_vec();
            t.push(g.multiply(&pinv, y)?);
            let v = super::lazy::alpha_normalized(g, alpha, h, &t)?;
            out.add_at(t, &v);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Calls `f` on every n-tuple of `elems` in lexicographic order.
pub(crate) fn for_each_prefix(
    elems: &[GroupElement],
    n: usize,
    f: &mut dyn FnMut(&[GroupElement]) -> Result<()>,
) -> Result<()> {
    let mut idx = vec![0usize; n];
    let mut buf: Vec<GroupElement> = vec![elems[0].clone(); n];
    loop {
        for i in 0..n {
            buf[i] = elems[idx[i]].clone();
        }
        f(&buf)?;
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(());
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < elems.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Materialized normalization map, pulled back over class-supported tuples.
pub fn normalize_cocycle(g: &Group, psi: &Cochain, cl: &ClassHandle) -> Result<Cochain> {
    let n = psi.degree;
    let elems = g.elements()?;
    let mut out = Cochain::zero(n, Flavor::CyclicDelocalized).with_gamma(Some(cl.gamma.clone()));
    for_each_prefix(&elems, n, &mut |prefix| {
        let prod = g.product(prefix)?;
        let pinv = g.inverse(&prod)?;
        for y in &cl.members {
            let mut t = prefix.to_vec();
            t.push(g.multiply(&pinv, y)?);
            let v = super::lazy::normalize_at(g, psi, cl, &t)?;
            out.add_at(t, &v);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Connes' periodicity operator `S = (βb + bβ)/((n+1)(n+2))`, computed from
/// the double-sum expansion `βb + bβ = Σ_{i<j} (−1)^{i+j} φ∘d_i∘d_j`.
///
/// With `delocalized` set the input must be class-supported; the output
/// then is too.
pub fn periodicity_s(g: &Group, phi: &Cochain, delocalized: bool) -> Result<Cochain> {
    if delocalized {
        phi.require(&[Flavor::CyclicDelocalized])?;
    } else {
        phi.require(&[Flavor::Cyclic, Flavor::CyclicDelocalized])?;
    }
    let n = phi.degree;
    let mut out = phi.empty_like();
    out.degree = n + 2;
    let denom = ((n + 1) * (n + 2)) as i64;
    for i in 0..=n + 1 {
        let inner = pull_face(g, phi, i)?;
        for j in i + 1..=n + 2 {
            let c = qc_frac(sign(i + j), denom);
            accumulate(&mut out, &pull_face(g, &inner, j)?, &c);
        }
    }
    Ok(out)
}

/// Checks 𝔱-invariance on stored keys.
pub fn is_cyclic(phi: &Cochain) -> bool {
    cyclic_operator(phi) == *phi
}

/// Checks that every stored tuple multiplies into the class.
pub fn is_class_supported(g: &Group, phi: &Cochain, cl: &ClassHandle) -> Result<bool> {
    for (t, _) in phi.entries() {
        if !cl.contains(&g.product(t)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks skewness under transpositions of adjacent slots on stored keys.
pub fn is_skew(phi: &Cochain) -> bool {
    let n = phi.degree;
    for (k, v) in phi.entries() {
        for i in 0..n {
            let mut s = k.clone();
            s.swap(i, i + 1);
            if phi.get(&s) != -v.clone() {
                return false;
            }
        }
    }
    true
}

/// Sum of `c·φ` over a list, all of one degree.
pub fn linear_combination(items: &[(QC, &Cochain)]) -> Result<Cochain> {
    let first = items.first().ok_or_else(|| Error::Structural("empty combination".into()))?;
    let mut out = first.1.empty_like();
    for (c, phi) in items {
        if phi.degree != out.degree {
            return Err(Error::DegreeMismatch { expected: out.degree, got: phi.degree });
        }
        if !c.is_zero() {
            accumulate(&mut out, phi, c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qc_int;

    fn z2() -> Group {
        Group::cyclic(2)
    }

    #[test]
    fn trace_indicator_is_a_cocycle() {
        let g = z2();
        let mut phi = Cochain::zero(0, Flavor::Cyclic);
        phi.add_at(vec![GroupElement::Residue(0)], &qc_int(1));
        assert!(cyclic_coboundary(&g, &phi).unwrap().is_zero());
    }

    #[test]
    fn group_coboundary_example() {
        let g = z2();
        let (e, c) = (GroupElement::Residue(0), GroupElement::Residue(1));
        let mut phi = Cochain::zero(1, Flavor::HomogeneousGroup);
        phi.add_at(vec![e.clone(), c.clone()], &qc_int(1));
        phi.add_at(vec![c.clone(), e.clone()], &qc_int(-1));
        let d = group_coboundary(&g, &phi).unwrap();
        assert!(d.get(&[e.clone(), c, e]).is_zero());
    }

    #[test]
    fn skew_at_degree_one() {
        let (e, c) = (GroupElement::Residue(0), GroupElement::Residue(1));
        let mut phi = Cochain::zero(1, Flavor::HomogeneousGroup);
        phi.add_at(vec![e.clone(), c.clone()], &qc_int(3));
        let f = skew_symmetrize(&phi).unwrap();
        assert_eq!(f.get(&[e.clone(), c.clone()]), qc_frac(3, 2));
        assert_eq!(f.get(&[c, e]), qc_frac(-3, 2));
        assert_eq!(skew_symmetrize(&f).unwrap(), f);
    }

    #[test]
    fn permutations_have_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p.iter().map(|x| x.1).sum::<i64>(), 0);
    }

    #[test]
    fn averaging_scales_invariant_input() {
        let g = Group::cyclic(4);
        let cl = g.conjugacy_class(&GroupElement::Residue(2), 8).unwrap();
        let mut alpha = Cochain::zero(0, Flavor::Relative);
        alpha.add_at(vec![GroupElement::Residue(0)], &qc_int(1));
        alpha.add_at(vec![GroupElement::Residue(2)], &qc_int(1));
        let r = averaging_r(&g, &inclusion_iota(&alpha), &cl).unwrap();
        assert_eq!(r, alpha.scaled(&qc_int(2)).with_gamma(Some(GroupElement::Residue(2))));
    }

    #[test]
    fn cocycle_from_constant() {
        let g = Group::cyclic(4);
        let cl = g.conjugacy_class(&GroupElement::Residue(1), 8).unwrap();
        let mut alpha = Cochain::zero(0, Flavor::Relative);
        for x in g.elements().unwrap() {
            alpha.add_at(vec![x], &qc_int(1));
        }
        let phi = build_delocalized_cocycle(&g, &alpha, &cl).unwrap();
        assert_eq!(phi.len(), 1);
        assert_eq!(phi.get(&[GroupElement::Residue(1)]), qc_int(1));
    }
}
