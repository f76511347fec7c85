//! Exact complex rationals.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A complex number with exact rational parts.
pub type QC = Complex<BigRational>;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qc(re: BigRational, im: BigRational) -> QC {
    Complex::new(re, im)
}

pub fn qc_int(n: i64) -> QC {
    Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
}

pub fn qc_frac(n: i64, d: i64) -> QC {
    Complex::new(q(n, d), BigRational::zero())
}

/// Parses `"p/q"` or `"p"`; a zero denominator is an error.
pub fn parse_q(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((_, den)) = t.split_once('/') {
        if den.trim().parse::<BigInt>().map(|d| d.is_zero()).unwrap_or(false) {
            return Err(Error::validation("", format!("zero denominator in {s:?}")));
        }
    }
    BigRational::from_str(t).map_err(|_| Error::validation("", format!("malformed rational {s:?}")))
}

pub fn fmt_q(x: &BigRational) -> String {
    x.to_string()
}

pub fn to_c64(z: &QC) -> Complex64 {
    Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}
