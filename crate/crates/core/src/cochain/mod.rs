//! Sparse cochains with exact complex-rational values.
//!
//! Finite groups get materialized operations (see [`ops`]); pointwise
//! versions in [`lazy`] work for any group.

pub mod lazy;
pub mod ops;
pub mod random;
pub mod rank;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::rational::QC;

pub type Tuple = Vec<GroupElement>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Cyclic,
    CyclicDelocalized,
    HomogeneousGroup,
    Relative,
}

impl Flavor {
    pub fn is_cyclic(self) -> bool {
        matches!(self, Flavor::Cyclic | Flavor::CyclicDelocalized)
    }

    pub fn is_group(self) -> bool {
        matches!(self, Flavor::HomogeneousGroup | Flavor::Relative)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Cyclic => "cyclic",
            Flavor::CyclicDelocalized => "cyclic-delocalized",
            Flavor::HomogeneousGroup => "homogeneous-group",
            Flavor::Relative => "relative",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cyclic" => Flavor::Cyclic,
            "cyclic-delocalized" => Flavor::CyclicDelocalized,
            "homogeneous-group" => Flavor::HomogeneousGroup,
            "relative" => Flavor::Relative,
            _ => return Err(Error::validation("flavor", format!("unknown flavor {s:?}"))),
        })
    }
}

/// Anything that can be evaluated on an (n+1)-tuple.
pub trait Evaluate {
    fn degree(&self) -> usize;
    fn eval(&self, g: &Group, t: &[GroupElement]) -> Result<QC>;
}

/// A finitely supported cochain. Missing keys read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub flavor: Flavor,
    /// The class representative for delocalized and relative cochains.
    pub gamma: Option<GroupElement>,
    entries: BTreeMap<Tuple, QC>,
}

impl Cochain {
    pub fn zero(degree: usize, flavor: Flavor) -> Self {
        Cochain { degree, flavor, gamma: None, entries: BTreeMap::new() }
    }

    pub fn with_gamma(mut self, gamma: Option<GroupElement>) -> Self {
        self.gamma = gamma;
        self
    }

    /// Same degree, flavor and class, no entries.
    pub fn empty_like(&self) -> Self {
        Cochain { degree: self.degree, flavor: self.flavor, gamma: self.gamma.clone(), entries: BTreeMap::new() }
    }

    pub fn relabel(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    /// Adds `v` to the entry at `t`, dropping it if the sum vanishes.
    pub fn add_at(&mut self, t: Tuple, v: &QC) {
        debug_assert_eq!(t.len(), self.degree + 1);
        if v.is_zero() {
            return;
        }
        match self.entries.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn get(&self, t: &[GroupElement]) -> QC {
        self.entries.get(t).cloned().unwrap_or_else(QC::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Tuple, &QC)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, c: &QC) -> Cochain {
        let mut out = self.empty_like();
        for (t, v) in &self.entries {
            out.add_at(t.clone(), &(v * c));
        }
        out
    }

    pub fn plus(&self, other: &Cochain) -> Result<Cochain> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, got: other.degree });
        }
        let mut out = self.clone();
        for (t, v) in &other.entries {
            out.add_at(t.clone(), v);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &Cochain) -> Result<Cochain> {
        self.plus(&other.scaled(&QC::new(-num_rational::BigRational::from_integer(1.into()), Zero::zero())))
    }

    /// Largest word length among the elements appearing in keys.
    pub fn support_radius(&self, g: &Group) -> Result<usize> {
        let mut r = 0;
        for t in self.entries.keys() {
            for x in t {
                r = r.max(g.word_length(x)?);
            }
        }
        Ok(r)
    }

    pub fn require(&self, allowed: &[Flavor]) -> Result<()> {
        if allowed.contains(&self.flavor) {
            Ok(())
        } else {
            Err(Error::Flavor {
                expected: allowed.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | "),
                got: self.flavor.to_string(),
            })
        }
    }
}

impl Evaluate for Cochain {
    fn degree(&self) -> usize {
        self.degree
    }

    fn eval(&self, _g: &Group, t: &[GroupElement]) -> Result<QC> {
        if t.len() != self.degree + 1 {
            return Err(Error::DegreeMismatch { expected: self.degree + 1, got: t.len() });
        }
        Ok(self.get(t))
    }
}

/// Element of the unitized group algebra with exact coefficients: `λ·1 + Σ c_g g`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnitizedElement {
    pub scalar: QC,
    pub part: BTreeMap<GroupElement, QC>,
}

impl UnitizedElement {
    pub fn unit() -> Self {
        UnitizedElement { scalar: crate::rational::qc_int(1), part: BTreeMap::new() }
    }

    pub fn from_part(part: BTreeMap<GroupElement, QC>) -> Self {
        UnitizedElement { scalar: QC::zero(), part }
    }
}

/// Unitized evaluation: the scalar parts are dropped and the cochain is
/// extended multilinearly over the remaining group-algebra parts.
pub fn unitized_eval(phi: &dyn Evaluate, g: &Group, args: &[UnitizedElement]) -> Result<QC> {
    if args.len() != phi.degree() + 1 {
        return Err(Error::DegreeMismatch { expected: phi.degree() + 1, got: args.len() });
    }
    let mut total = QC::zero();
    let mut tuple: Vec<GroupElement> = Vec::with_capacity(args.len());
    fn rec(
        phi: &dyn Evaluate,
        g: &Group,
        args: &[UnitizedElement],
        tuple: &mut Vec<GroupElement>,
        coef: QC,
        total: &mut QC,
    ) -> Result<()> {
        let k = tuple.len();
        if k == args.len() {
            *total += coef * phi.eval(g, tuple)?;
            return Ok(());
        }
        for (x, c) in &args[k].part {
            tuple.push(x.clone());
            rec(phi, g, args, tuple, &coef * c, total)?;
            tuple.pop();
        }
        Ok(())
    }
    rec(phi, g, args, &mut tuple, crate::rational::qc_int(1), &mut total)?;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qc_int;

    #[test]
    fn entries_cancel() {
        let mut c = Cochain::zero(0, Flavor::Cyclic);
        c.add_at(vec![GroupElement::Residue(1)], &qc_int(2));
        c.add_at(vec![GroupElement::Residue(1)], &qc_int(-2));
        assert!(c.is_zero());
    }

    #[test]
    fn unit_arguments_give_zero() {
        let g = Group::cyclic(2);
        let mut c = Cochain::zero(1, Flavor::Cyclic);
        c.add_at(vec![GroupElement::Residue(1), GroupElement::Residue(1)], &qc_int(3));
        let mut a = BTreeMap::new();
        a.insert(GroupElement::Residue(1), qc_int(2));
        let x = UnitizedElement { scalar: qc_int(5), part: a };
        assert_eq!(unitized_eval(&c, &g, &[x.clone(), UnitizedElement::unit()]).unwrap(), QC::zero());
        assert_eq!(unitized_eval(&c, &g, &[x.clone(), x]).unwrap(), qc_int(12));
    }
}
