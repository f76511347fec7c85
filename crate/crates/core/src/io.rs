//! JSON file formats and schema validation with field-path diagnostics.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cochain::{Cochain, Flavor};
use crate::error::{Error, Result};
use crate::group::{ClassHandle, Group, GroupElement, GroupRef, DEFAULT_RADIUS};
use crate::rational::{fmt_q, parse_q, qc};
use crate::spectral::{load_spectrum, AlgebraElement, Mat};

fn with_prefix(e: Error, prefix: &str) -> Error {
    match e {
        Error::Validation { path, message } if path.is_empty() || path == "." => Error::validation(prefix, message),
        Error::Validation { path, message } => Error::validation(format!("{prefix}.{path}"), message),
        other => other,
    }
}

/// Strict deserialization reporting the failing field path.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::validation(path, format!("{inner} (line {})", inner.line()))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryFile {
    pub tuple: Vec<String>,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainFile {
    pub flavor: Flavor,
    pub degree: usize,
    pub group: GroupRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub entries: Vec<EntryFile>,
    /// Class member name to conjugator name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<BTreeMap<String, String>>,
}

/// A cochain with the group and class it was read against.
#[derive(Clone, Debug)]
pub struct LoadedCochain {
    pub group: Group,
    pub group_ref: GroupRef,
    pub class: Option<ClassHandle>,
    pub cochain: Cochain,
}

impl CochainFile {
    pub fn load(&self, radius: usize) -> Result<LoadedCochain> {
        let group = self.group.build().map_err(|e| with_prefix(e, "group"))?;
        let class = match &self.class {
            Some(name) => {
                let gamma = group.parse(name).map_err(|e| with_prefix(e, "class"))?;
                let mut cl = group.conjugacy_class(&gamma, radius).map_err(|e| with_prefix(e, "class"))?;
                if let Some(w) = &self.witnesses {
                    for (y, h) in w {
                        let path = format!("witnesses.{y}");
                        let ye = group.parse(y).map_err(|e| with_prefix(e, &path))?;
                        let he = group.parse(h).map_err(|e| with_prefix(e, &path))?;
                        if group.conjugate(&gamma, &he)? != ye {
                            return Err(Error::validation(path, format!("{h} does not conjugate {name} to {y}")));
                        }
                        if !cl.set_witness(&ye, he) {
                            return Err(Error::validation(path, "not an enumerated class member"));
                        }
                    }
                }
                Some(cl)
            }
            None => {
                if matches!(self.flavor, Flavor::CyclicDelocalized | Flavor::Relative) {
                    return Err(Error::validation("class", format!("required for flavor {}", self.flavor)));
                }
                if self.witnesses.is_some() {
                    return Err(Error::validation("witnesses", "witnesses need a class"));
                }
                None
            }
        };
        let mut phi = Cochain::zero(self.degree, self.flavor).with_gamma(class.as_ref().map(|c| c.gamma.clone()));
        let mut seen = BTreeMap::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.tuple.len() != self.degree + 1 {
                return Err(Error::validation(
                    format!("entries[{i}].tuple"),
                    format!("expected {} elements, got {}", self.degree + 1, e.tuple.len()),
                ));
            }
            let t: Vec<GroupElement> = e
                .tuple
                .iter()
                .enumerate()
                .map(|(j, s)| group.parse(s).map_err(|err| with_prefix(err, &format!("entries[{i}].tuple[{j}]"))))
                .collect::<Result<_>>()?;
            let re = parse_q(&e.re).map_err(|err| with_prefix(err, &format!("entries[{i}].re")))?;
            let im = parse_q(&e.im).map_err(|err| with_prefix(err, &format!("entries[{i}].im")))?;
            if let Some(j) = seen.insert(t.clone(), i) {
                return Err(Error::validation(format!("entries[{i}].tuple"), format!("duplicates entries[{j}]")));
            }
            phi.add_at(t, &qc(re, im));
        }
        Ok(LoadedCochain { group, group_ref: self.group.clone(), class, cochain: phi })
    }

    /// Canonical file: entries in key order, rationals reduced, witnesses spelled out.
    pub fn from_cochain(group_ref: &GroupRef, g: &Group, phi: &Cochain, class: Option<&ClassHandle>) -> Self {
        let entries = phi
            .entries()
            .map(|(t, v)| EntryFile { tuple: t.iter().map(|x| g.name(x)).collect(), re: fmt_q(&v.re), im: fmt_q(&v.im) })
            .collect();
        let witnesses = class.map(|c| c.members.iter().zip(&c.witnesses).map(|(y, h)| (g.name(y), g.name(h))).collect());
        CochainFile {
            flavor: phi.flavor,
            degree: phi.degree,
            group: group_ref.clone(),
            class: class.map(|c| g.name(&c.gamma)).or_else(|| phi.gamma.as_ref().map(|x| g.name(x))),
            entries,
            witnesses,
        }
    }
}

pub fn load_cochain(text: &str, radius: usize) -> Result<LoadedCochain> {
    parse_json::<CochainFile>(text)?.load(radius)
}

pub fn cochain_to_json(group_ref: &GroupRef, g: &Group, phi: &Cochain, class: Option<&ClassHandle>) -> String {
    crate::report::to_json(&CochainFile::from_cochain(group_ref, g, phi, class))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub g: String,
    /// Rows of `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// `unit·1 + Σ matrix ⊗ g`; the model and idempotent formats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupRef>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: Vec<TermFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<[f64; 2]>,
}

impl ElementFile {
    pub fn group(&self) -> Result<Group> {
        self.group.as_ref().ok_or_else(|| Error::validation("group", "missing field"))?.build().map_err(|e| with_prefix(e, "group"))
    }

    pub fn element(&self, g: &Group) -> Result<AlgebraElement> {
        if self.n == 0 {
            return Err(Error::validation("N", "must be at least 1"));
        }
        let mut a = AlgebraElement::zero(self.n);
        for (i, t) in self.d.iter().enumerate() {
            let x = g.parse(&t.g).map_err(|e| with_prefix(e, &format!("D[{i}].g")))?;
            if t.matrix.len() != self.n {
                return Err(Error::validation(format!("D[{i}].matrix"), format!("expected {} rows", self.n)));
            }
            let mut m = Mat::zeros(self.n, self.n);
            for (r, row) in t.matrix.iter().enumerate() {
                if row.len() != self.n {
                    return Err(Error::validation(format!("D[{i}].matrix[{r}]"), format!("expected {} entries", self.n)));
                }
                for (c, z) in row.iter().enumerate() {
                    if !z[0].is_finite() || !z[1].is_finite() {
                        return Err(Error::validation(format!("D[{i}].matrix[{r}][{c}]"), "not finite"));
                    }
                    m[(r, c)] = Complex64::new(z[0], z[1]);
                }
            }
            a.add_term(x, &m);
        }
        if let Some(u) = self.unit {
            if !u[0].is_finite() || !u[1].is_finite() {
                return Err(Error::validation("unit", "not finite"));
            }
            a.unit = Complex64::new(u[0], u[1]);
        }
        Ok(a)
    }

    pub fn from_element(group: Option<&GroupRef>, g: &Group, a: &AlgebraElement) -> Self {
        let d = a
            .coeffs
            .iter()
            .map(|(x, m)| TermFile {
                g: g.name(x),
                matrix: (0..a.n).map(|r| (0..a.n).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect(),
            })
            .collect();
        let unit = (a.unit != Complex64::new(0.0, 0.0)).then_some([a.unit.re, a.unit.im]);
        ElementFile { group: group.cloned(), n: a.n, d, unit }
    }
}

/// Reads a model or idempotent file that carries its group.
pub fn load_element(text: &str) -> Result<(Group, AlgebraElement)> {
    let f: ElementFile = parse_json(text)?;
    let g = f.group()?;
    let a = f.element(&g)?;
    Ok((g, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analytic {
    None,
    Connecting,
    Rho,
}

/// Sampled invertible path. `connecting` needs `idempotent`, `rho` needs `operator`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathFile {
    pub group: GroupRef,
    pub grid: Vec<f64>,
    pub samples: Vec<ElementFile>,
    pub analytic: Analytic,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotent: Option<ElementFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<ElementFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<bool>,
}

pub fn load_path(text: &str) -> Result<(Group, crate::pairings::InvertiblePath)> {
    use crate::pairings::{connecting_path, rho_path, InvertiblePath, PathKind};
    let f: PathFile = parse_json(text)?;
    let g = f.group.build().map_err(|e| with_prefix(e, "group"))?;
    for (i, t) in f.grid.iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::validation(format!("grid[{i}]"), "not finite"));
        }
    }
    match f.analytic {
        Analytic::None => {
            if f.samples.len() != f.grid.len() {
                return Err(Error::validation("samples", format!("expected {} samples, one per grid point", f.grid.len())));
            }
            let samples = f
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| s.element(&g).map_err(|e| with_prefix(e, &format!("samples[{i}]"))))
                .collect::<Result<Vec<_>>>()?;
            Ok((g, InvertiblePath { grid: f.grid, samples, kind: PathKind::Sampled }))
        }
        Analytic::Connecting => {
            let p = f.idempotent.as_ref().ok_or_else(|| Error::validation("idempotent", "required for connecting paths"))?;
            let p = p.element(&g).map_err(|e| with_prefix(e, "idempotent"))?;
            let path = connecting_path(&g, &p, &f.grid)?;
            Ok((g, path))
        }
        Analytic::Rho => {
            let d = f.operator.as_ref().ok_or_else(|| Error::validation("operator", "required for rho paths"))?;
            let d = d.element(&g).map_err(|e| with_prefix(e, "operator"))?;
            let model = crate::spectral::eigendecompose(&g, &d)?;
            let path = rho_path(&model, &f.grid, f.inverse.unwrap_or(true))?;
            Ok((g, path))
        }
    }
}

/// Formats `validate` understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Group,
    Cochain,
    Model,
    Element,
    Path,
    Spectrum,
}

impl std::str::FromStr for Schema {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "group" => Schema::Group,
            "cochain" => Schema::Cochain,
            "model" => Schema::Model,
            "element" | "idempotent" => Schema::Element,
            "path" => Schema::Path,
            "spectrum" => Schema::Spectrum,
            _ => return Err(Error::validation("schema", format!("unknown schema {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

/// Empty when the text conforms; otherwise the first violation with its field path.
pub fn validate(text: &str, schema: Schema) -> Vec<Diagnostic> {
    let outcome: Result<()> = match schema {
        Schema::Group => parse_json::<GroupRef>(text).and_then(|r| r.build().map(|_| ())),
        Schema::Cochain => load_cochain(text, DEFAULT_RADIUS).map(|_| ()),
        Schema::Model => load_element(text).and_then(|(g, d)| crate::spectral::eigendecompose(&g, &d).map(|_| ())),
        Schema::Element => load_element(text).map(|_| ()),
        Schema::Path => load_path(text).map(|_| ()),
        Schema::Spectrum => load_spectrum(text, false).map(|_| ()),
    };
    match outcome {
        Ok(()) => vec![],
        Err(Error::Validation { path, message }) => vec![Diagnostic { path, message }],
        Err(e) => vec![Diagnostic { path: ".".into(), message: e.to_string() }],
    }
}
