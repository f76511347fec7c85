//! Exact cohomology ranks of truncated complexes over finite groups.
//!
//! Cyclic complexes use the 𝔱-invariant cochains, one basis vector per signed
//! orbit of the cyclic rotation. The group complex uses cochains invariant
//! under the diagonal left action, one basis vector per orbit. Ranks come from
//! fraction-free elimination over the integers.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::ops::face;
use super::{Flavor, Tuple};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group};

/// Largest basis size allowed per degree.
pub const SIZE_CAP: usize = 100_000;

/// A sparse integer matrix stored by columns.
#[derive(Clone, Debug, Default)]
pub struct SparseMatrix {
    pub rows: usize,
    pub columns: Vec<BTreeMap<usize, i64>>,
}

impl SparseMatrix {
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<(usize, BigInt)>> = self
            .columns
            .iter()
            .map(|c| c.iter().filter(|(_, v)| **v != 0).map(|(&i, &v)| (i, BigInt::from(v))).collect())
            .collect();
        integer_rank(rows)
    }

    /// Whether `self ∘ before` vanishes; only meaningful when the rows of
    /// `before` index the columns of `self` (the group complex).
    pub fn compose_is_zero(&self, before: &SparseMatrix) -> bool {
        for col in &before.columns {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for (&k, &v) in col {
                for (&i, &w) in &self.columns[k] {
                    *acc.entry(i).or_insert(0) += v * w;
                }
            }
            if acc.values().any(|&x| x != 0) {
                return false;
            }
        }
        true
    }
}

fn normalize(row: &mut Vec<(usize, BigInt)>) {
    row.retain(|(_, v)| !v.is_zero());
    let mut gcd = BigInt::zero();
    for (_, v) in row.iter() {
        gcd = gcd.gcd(v);
        if gcd.is_one() {
            break;
        }
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &gcd;
        }
    }
    if let Some((_, lead)) = row.first() {
        if lead.is_negative() {
            for (_, v) in row.iter_mut() {
                *v = -v.clone();
            }
        }
    }
}

/// `a·x − b·y` on sorted sparse vectors.
fn combine(x: &[(usize, BigInt)], a: &BigInt, y: &[(usize, BigInt)], b: &BigInt) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if take_y {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of a list of sparse integer vectors by incremental echelon reduction.
pub fn integer_rank(vectors: Vec<Vec<(usize, BigInt)>>) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, BigInt)>> = HashMap::new();
    for mut v in vectors {
        v.sort_by_key(|e| e.0);
        normalize(&mut v);
        while let Some((lead, _)) = v.first() {
            let Some(p) = pivots.get(lead) else { break };
            let a = p[0].1.clone();
            let b = v[0].1.clone();
            let g = a.gcd(&b);
            v = combine(&v, &(&a / &g), p, &(&b / &g));
            normalize(&mut v);
        }
        if let Some((lead, _)) = v.first() {
            pivots.insert(*lead, v);
        }
    }
    pivots.len()
}

/// Finite-dimensional carrier of a complex up to a maximum degree.
#[derive(Clone, Debug)]
pub struct ComplexTruncation {
    pub group: String,
    pub flavor: Flavor,
    pub gamma: Option<String>,
    pub max_degree: usize,
    /// Basis size per degree `0..=max_degree+1`.
    pub dims: Vec<usize>,
    /// `matrices[n]` maps degree n to degree n+1.
    pub matrices: Vec<SparseMatrix>,
}

/// Ranks for one truncation.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
}

impl ComplexTruncation {
    pub fn build(g: &Group, flavor: Flavor, cl: Option<&ClassHandle>, max_degree: usize) -> Result<Self> {
        let elems = g.elements()?;
        let mut dims = vec![];
        let mut matrices = vec![];
        match flavor {
            Flavor::Cyclic | Flavor::CyclicDelocalized => {
                let cl = match flavor {
                    Flavor::CyclicDelocalized => {
                        let cl = cl.ok_or_else(|| Error::validation("gamma", "delocalized ranks need a class"))?;
                        if !cl.nontrivial {
                            return Err(Error::validation("gamma", "class must be nontrivial"));
                        }
                        Some(cl)
                    }
                    _ => None,
                };
                let mut supports = vec![];
                for n in 0..=max_degree + 1 {
                    supports.push(cyclic_support(g, &elems, cl, n)?);
                }
                let bases: Vec<Vec<Vec<(Tuple, i64)>>> =
                    supports.iter().enumerate().map(|(n, s)| cyclic_basis(s, n)).collect();
                for (n, b) in bases.iter().enumerate() {
                    dims.push(b.len());
                    if n > max_degree {
                        break;
                    }
                    let rows: HashMap<&Tuple, usize> = supports[n + 1].iter().enumerate().map(|(i, t)| (t, i)).collect();
                    let mut m = SparseMatrix { rows: supports[n + 1].len(), columns: vec![] };
                    for v in b {
                        m.columns.push(cyclic_column(g, &elems, v, &rows)?);
                    }
                    matrices.push(m);
                }
            }
            Flavor::HomogeneousGroup => {
                let e = g.identity();
                let mut reps: Vec<Vec<Tuple>> = vec![];
                for n in 0..=max_degree + 1 {
                    let count = elems.len().checked_pow(n as u32).unwrap_or(usize::MAX);
                    if count > SIZE_CAP {
                        return Err(Error::Capacity(format!("degree {n} basis of size {count} exceeds {SIZE_CAP}")));
                    }
                    let mut list = vec![];
                    super::ops::for_each_prefix(&elems, n, &mut |p| {
                        let mut t = vec![e.clone()];
                        t.extend_from_slice(p);
                        list.push(t);
                        Ok(())
                    })?;
                    reps.push(list);
                }
                for n in 0..=max_degree + 1 {
                    dims.push(reps[n].len());
                    if n > max_degree {
                        break;
                    }
                    let col_of: HashMap<&Tuple, usize> = reps[n].iter().enumerate().map(|(i, t)| (t, i)).collect();
                    let mut columns = vec![BTreeMap::new(); reps[n].len()];
                    for (r, t) in reps[n + 1].iter().enumerate() {
                        for i in 0..t.len() {
                            let mut u = t.clone();
                            u.remove(i);
                            let x0 = g.inverse(&u[0])?;
                            let u: Tuple = u.iter().map(|x| g.multiply(&x0, x)).collect::<Result<_>>()?;
                            let c = col_of[&u];
                            *columns[c].entry(r).or_insert(0) += if i % 2 == 0 { 1 } else { -1 };
                        }
                    }
                    for col in &mut columns {
                        col.retain(|_, v| *v != 0);
                    }
                    matrices.push(SparseMatrix { rows: reps[n + 1].len(), columns });
                }
            }
            Flavor::Relative => return Err(Error::Unsupported("ranks of the relative complex".into())),
        }
        Ok(ComplexTruncation {
            group: g.label(),
            flavor,
            gamma: cl.map(|c| g.name(&c.gamma)),
            max_degree,
            dims,
            matrices,
        })
    }

    /// `dim ker b_n − rank b_{n−1}`.
    pub fn cohomology_rank(&self, degree: usize) -> Result<usize> {
        if degree > self.max_degree {
            return Err(Error::validation("degree", format!("degree {degree} beyond truncation {}", self.max_degree)));
        }
        let here = self.matrices[degree].rank();
        let below = if degree == 0 { 0 } else { self.matrices[degree - 1].rank() };
        Ok(self.dims[degree] - here - below)
    }

    pub fn report(&self) -> Result<RankReport> {
        let mut r: Vec<usize> = self.matrices.iter().map(|m| m.rank()).collect();
        r.insert(0, 0);
        let ranks = (0..=self.max_degree).map(|n| self.dims[n] - r[n + 1] - r[n]).collect();
        Ok(RankReport { dims: self.dims[..=self.max_degree].to_vec(), ranks })
    }
}

fn cyclic_support(g: &Group, elems: &[crate::group::GroupElement], cl: Option<&ClassHandle>, n: usize) -> Result<Vec<Tuple>> {
    let size = match cl {
        Some(c) => c.len() * elems.len().pow(n as u32),
        None => elems.len().pow(n as u32 + 1),
    };
    if size > SIZE_CAP {
        return Err(Error::Capacity(format!("degree {n} support of size {size} exceeds {SIZE_CAP}")));
    }
    let mut out = vec![];
    match cl {
        Some(cl) => super::ops::for_each_prefix(elems, n, &mut |p| {
            let pinv = g.inverse(&g.product(p)?)?;
            for y in &cl.members {
                let mut t = p.to_vec();
                t.push(g.multiply(&pinv, y)?);
                out.push(t);
            }
            Ok(())
        })?,
        None => super::ops::for_each_prefix(elems, n + 1, &mut |p| {
            out.push(p.to_vec());
            Ok(())
        })?,
    }
    out.sort();
    Ok(out)
}

/// One signed orbit per basis vector; orbits forced to vanish are dropped.
fn cyclic_basis(support: &[Tuple], n: usize) -> Vec<Vec<(Tuple, i64)>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = vec![];
    let step = if n % 2 == 0 { 1 } else { -1 };
    for t in support {
        if seen.contains(t) {
            continue;
        }
        let mut orbit: Vec<(Tuple, i64)> = vec![];
        let mut cur = t.clone();
        let mut s = 1i64;
        let mut consistent = true;
        loop {
            if let Some((_, prev)) = orbit.iter().find(|(u, _)| *u == cur) {
                if *prev != s {
                    consistent = false;
                }
                break;
            }
            seen.insert(cur.clone());
            orbit.push((cur.clone(), s));
            let mut next = vec![cur[n].clone()];
            next.extend_from_slice(&cur[..n]);
            cur = next;
            s *= step;
        }
        if consistent {
            out.push(orbit);
        }
    }
    out
}

fn cyclic_column(
    g: &Group,
    elems: &[crate::group::GroupElement],
    v: &[(Tuple, i64)],
    rows: &HashMap<&Tuple, usize>,
) -> Result<BTreeMap<usize, i64>> {
    // Push each basis entry forward along every face.
    let mut col = BTreeMap::new();
    for (k, c) in v {
        let n = k.len() - 1;
        for i in 0..=n + 1 {
            let s = if i % 2 == 0 { *c } else { -*c };
            for x in elems {
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
                debug_assert_eq!(face(g, &a, i)?, *k);
                let r = *rows.get(&a).ok_or_else(|| Error::Structural("coboundary left the support".into()))?;
                *col.entry(r).or_insert(0) += s;
            }
        }
    }
    col.retain(|_, v| *v != 0);
    Ok(col)
}
