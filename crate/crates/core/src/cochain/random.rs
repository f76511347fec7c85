//! Seeded random cochains.

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use super::{Cochain, Flavor, Tuple};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement};
use crate::rational::{q, QC};

/// Small rational with numerator in [-6, 6] and denominator in [1, 4].
pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    q(rng.random_range(-6..=6), rng.random_range(1..=4))
}

/// Nonzero complex rational; the imaginary part is zero half of the time.
pub fn random_value<R: Rng>(rng: &mut R) -> QC {
    loop {
        let re = random_rational(rng);
        let im = if rng.random_bool(0.5) { random_rational(rng) } else { BigRational::zero() };
        let v = Complex::new(re, im);
        if !v.is_zero() {
            return v;
        }
    }
}

fn random_tuple<R: Rng>(rng: &mut R, elems: &[GroupElement], len: usize) -> Tuple {
    (0..len).map(|_| elems[rng.random_range(0..elems.len())].clone()).collect()
}

/// Random sparse cochain of the given flavor with about `nnz` entries.
///
/// Delocalized cochains only touch tuples whose product lies in `cl`.
pub fn random_cochain<R: Rng>(
    rng: &mut R,
    g: &Group,
    degree: usize,
    flavor: Flavor,
    cl: Option<&ClassHandle>,
    nnz: usize,
) -> Result<Cochain> {
    let elems = g.elements()?;
    let mut out = Cochain::zero(degree, flavor).with_gamma(cl.map(|c| c.gamma.clone()));
    for _ in 0..nnz {
        let t = match (flavor, cl) {
            (Flavor::CyclicDelocalized, Some(cl)) => {
                let mut t = random_tuple(rng, &elems, degree);
                let y = &cl.members[rng.random_range(0..cl.members.len())];
                let p = g.inverse(&g.product(&t)?)?;
                t.push(g.multiply(&p, y)?);
                t
            }
            (Flavor::CyclicDelocalized, None) => {
                return Err(Error::validation("class", "delocalized cochains need a class"));
            }
            _ => random_tuple(rng, &elems, degree + 1),
        };
        out.add_at(t, &random_value(rng));
    }
    Ok(out)
}
