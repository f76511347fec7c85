//! Report serialization: fixed-precision floats, rationals as strings, CSV rows.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float serialized with 17 significant digits, `null` when not finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real17(pub f64);

pub fn format17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0000000000000000e0".into();
    }
    format!("{x:.16e}")
}

impl Serialize for Real17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// A complex float as `{"re":…, "im":…}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Complex17 {
    pub re: Real17,
    pub im: Real17,
}

impl From<Complex64> for Complex17 {
    fn from(z: Complex64) -> Self {
        Complex17 { re: Real17(z.re), im: Real17(z.im) }
    }
}

pub fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_real<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Real17(*x).serialize(s)
}

pub fn ser_complex<S: Serializer>(x: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    Complex17::from(*x).serialize(s)
}

/// Deterministic pretty JSON.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// One CSV row of a pairing result.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub invariant: String,
    pub group: String,
    pub gamma: String,
    pub m: usize,
    pub value: Complex64,
    pub err: f64,
    pub t: f64,
    pub passed: Option<bool>,
}

pub const CSV_HEADER: &str = "invariant,group,gamma,m,value_re,value_im,err,T,passed";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let passed = match r.passed {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.invariant),
            csv_field(&r.group),
            csv_field(&r.gamma),
            r.m,
            format17(r.value.re),
            format17(r.value.im),
            format17(r.err),
            format17(r.t),
            passed
        ));
    }
    out
}
