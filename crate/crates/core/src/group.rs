//! Finitely generated groups given by evaluable normal forms.
//!
//! Word lengths come from a breadth-first search of the Cayley graph that
//! expands each element by right multiplication with the generators in their
//! stored order. Discovery order is therefore shortlex order on minimal words,
//! and [`Group::shortlex_rank`] exposes it.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default search radius for word lengths in infinite groups.
pub const DEFAULT_RADIUS: usize = 8;
/// Powers tried before an element is declared of infinite order.
pub const ORDER_CAP: u64 = 10_000;
/// Hard cap on the number of elements the BFS cache may hold.
pub const BALL_CAP: usize = 4_000_000;

/// Normal form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Index(usize),
    Residue(u64),
    Lattice(Vec<i64>),
    Heis(i64, i64, i64),
    Tuple(Vec<GroupElement>),
}

/// Multiplication table of a finite group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl Table {
    pub fn new(names: Vec<String>, mul: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::validation("elements", "empty element list"));
        }
        if mul.len() != n {
            return Err(Error::validation("table", format!("expected {n} rows, got {}", mul.len())));
        }
        for (i, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!("table[{i}]"), format!("expected {n} entries")));
            }
            if let Some(j) = row.iter().position(|&x| x >= n) {
                return Err(Error::validation(format!("table[{i}][{j}]"), "index out of range"));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (i, name) in names.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                return Err(Error::validation(format!("elements[{i}]"), format!("duplicate name {name}")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or_else(|| Error::validation("table", "no identity element"))?;
        let mut inverse = vec![0; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| mul[x][y] == identity && mul[y][x] == identity)
                .ok_or_else(|| Error::validation("table", format!("element {} has no inverse", names[x])))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::validation(
                            "table",
                            format!("not associative on ({}, {}, {})", names[a], names[b], names[c]),
                        ));
                    }
                }
            }
        }
        Ok(Table { names, mul, identity, inverse })
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// The kinds of groups supported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    FiniteTable(Table),
    Cyclic(u64),
    FreeAbelian(usize),
    Heisenberg,
    Product(Vec<GroupKind>),
}

fn mismatch(a: &GroupElement, kind: &GroupKind) -> Error {
    Error::Structural(format!("element {a:?} does not belong to {}", kind.label()))
}

impl GroupKind {
    pub fn label(&self) -> String {
        match self {
            GroupKind::FiniteTable(t) => format!("finite_table({})", t.names.len()),
            GroupKind::Cyclic(k) => format!("cyclic:{k}"),
            GroupKind::FreeAbelian(n) => format!("free_abelian:{n}"),
            GroupKind::Heisenberg => "heisenberg".into(),
            GroupKind::Product(f) => f.iter().map(|k| k.label()).collect::<Vec<_>>().join("*"),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupKind::FiniteTable(t) => GroupElement::Index(t.identity),
            GroupKind::Cyclic(_) => GroupElement::Residue(0),
            GroupKind::FreeAbelian(n) => GroupElement::Lattice(vec![0; *n]),
            GroupKind::Heisenberg => GroupElement::Heis(0, 0, 0),
            GroupKind::Product(f) => GroupElement::Tuple(f.iter().map(|k| k.identity()).collect()),
        }
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        match (self, a) {
            (GroupKind::FiniteTable(t), GroupElement::Index(i)) => *i < t.names.len(),
            (GroupKind::Cyclic(k), GroupElement::Residue(r)) => r < k,
            (GroupKind::FreeAbelian(n), GroupElement::Lattice(v)) => v.len() == *n,
            (GroupKind::Heisenberg, GroupElement::Heis(..)) => true,
            (GroupKind::Product(f), GroupElement::Tuple(c)) => {
                f.len() == c.len() && f.iter().zip(c).all(|(k, x)| k.contains(x))
            }
            _ => false,
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        use GroupElement as E;
        Ok(match (self, a, b) {
            (GroupKind::FiniteTable(t), E::Index(x), E::Index(y)) if *x < t.mul.len() && *y < t.mul.len() => {
                E::Index(t.mul[*x][*y])
            }
            (GroupKind::Cyclic(k), E::Residue(x), E::Residue(y)) if x < k && y < k => E::Residue((x + y) % k),
            (GroupKind::FreeAbelian(n), E::Lattice(x), E::Lattice(y)) if x.len() == *n && y.len() == *n => {
                E::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (GroupKind::Heisenberg, E::Heis(a1, b1, c1), E::Heis(a2, b2, c2)) => {
                E::Heis(a1 + a2, b1 + b2, c1 + c2 + a1 * b2)
            }
            (GroupKind::Product(f), E::Tuple(x), E::Tuple(y)) if x.len() == f.len() && y.len() == f.len() => {
                let mut out = Vec::with_capacity(f.len());
                for ((k, p), q) in f.iter().zip(x).zip(y) {
                    out.push(k.mul(p, q)?);
                }
                E::Tuple(out)
            }
            _ => {
                return Err(if self.contains(a) { mismatch(b, self) } else { mismatch(a, self) });
            }
        })
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement> {
        use GroupElement as E;
        Ok(match (self, a) {
            (GroupKind::FiniteTable(t), E::Index(x)) if *x < t.names.len() => E::Index(t.inverse[*x]),
            (GroupKind::Cyclic(k), E::Residue(x)) if x < k => E::Residue((k - x) % k),
            (GroupKind::FreeAbelian(n), E::Lattice(x)) if x.len() == *n => E::Lattice(x.iter().map(|p| -p).collect()),
            (GroupKind::Heisenberg, E::Heis(p, q, r)) => E::Heis(-p, -q, p * q - r),
            (GroupKind::Product(f), E::Tuple(x)) if x.len() == f.len() => {
                E::Tuple(f.iter().zip(x).map(|(k, p)| k.inv(p)).collect::<Result<_>>()?)
            }
            _ => return Err(mismatch(a, self)),
        })
    }

    pub fn finite_order(&self) -> Option<u64> {
        match self {
            GroupKind::FiniteTable(t) => Some(t.names.len() as u64),
            GroupKind::Cyclic(k) => Some(*k),
            GroupKind::FreeAbelian(0) => Some(1),
            GroupKind::FreeAbelian(_) | GroupKind::Heisenberg => None,
            GroupKind::Product(f) => f.iter().map(|k| k.finite_order()).product(),
        }
    }

    /// All elements in canonical kind order (finite kinds only).
    pub fn enumerate(&self) -> Option<Vec<GroupElement>> {
        match self {
            GroupKind::FiniteTable(t) => Some((0..t.names.len()).map(GroupElement::Index).collect()),
            GroupKind::Cyclic(k) => Some((0..*k).map(GroupElement::Residue).collect()),
            GroupKind::FreeAbelian(0) => Some(vec![GroupElement::Lattice(vec![])]),
            GroupKind::FreeAbelian(_) | GroupKind::Heisenberg => None,
            GroupKind::Product(f) => {
                let mut acc: Vec<Vec<GroupElement>> = vec![vec![]];
                for k in f {
                    let elems = k.enumerate()?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |x| {
                                let mut p = prefix.clone();
                                p.push(x.clone());
                                p
                            })
                        })
                        .collect();
                }
                Some(acc.into_iter().map(GroupElement::Tuple).collect())
            }
        }
    }

    /// Element order, 0 for infinite order.
    pub fn element_order(&self, a: &GroupElement) -> Result<u64> {
        use GroupElement as E;
        if !self.contains(a) {
            return Err(mismatch(a, self));
        }
        Ok(match (self, a) {
            (GroupKind::Cyclic(k), E::Residue(x)) => k / x.gcd(k),
            (GroupKind::FreeAbelian(_), E::Lattice(v)) => u64::from(v.iter().all(|&x| x == 0)),
            (GroupKind::Heisenberg, E::Heis(p, q, r)) => u64::from(*p == 0 && *q == 0 && *r == 0),
            (GroupKind::Product(f), E::Tuple(c)) => {
                let mut acc = 1u64;
                for (k, x) in f.iter().zip(c) {
                    let o = k.element_order(x)?;
                    if o == 0 {
                        return Ok(0);
                    }
                    acc = acc.lcm(&o);
                }
                acc
            }
            _ => {
                let id = self.identity();
                let mut cur = a.clone();
                let mut n = 1u64;
                while cur != id {
                    if n >= ORDER_CAP {
                        return Ok(0);
                    }
                    cur = self.mul(&cur, a)?;
                    n += 1;
                }
                n
            }
        })
    }

    pub fn name(&self, a: &GroupElement) -> String {
        use GroupElement as E;
        match (self, a) {
            (GroupKind::FiniteTable(t), E::Index(i)) if *i < t.names.len() => t.names[*i].clone(),
            (GroupKind::Product(f), E::Tuple(c)) if c.len() == f.len() => {
                let parts: Vec<String> = f.iter().zip(c).map(|(k, x)| k.name(x)).collect();
                format!("<{}>", parts.join("|"))
            }
            (_, E::Residue(r)) => r.to_string(),
            (_, E::Lattice(v)) => format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            (_, E::Heis(p, q, r)) => format!("({p},{q},{r})"),
            _ => format!("{a:?}"),
        }
    }

    pub fn parse(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let bad = || Error::validation("element", format!("cannot parse {s:?} as an element of {}", self.label()));
        let ints = |body: &str| -> Result<Vec<i64>> {
            let inner = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).ok_or_else(bad)?;
            if inner.trim().is_empty() {
                return Ok(vec![]);
            }
            inner.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        match self {
            GroupKind::FiniteTable(t) => t.index_of(s).map(GroupElement::Index).ok_or_else(bad),
            GroupKind::Cyclic(k) => {
                let r: i64 = s.parse().map_err(|_| bad())?;
                Ok(GroupElement::Residue(r.rem_euclid(*k as i64) as u64))
            }
            GroupKind::FreeAbelian(n) => {
                let v = ints(s)?;
                if v.len() != *n {
                    return Err(bad());
                }
                Ok(GroupElement::Lattice(v))
            }
            GroupKind::Heisenberg => match ints(s)?.as_slice() {
                [p, q, r] => Ok(GroupElement::Heis(*p, *q, *r)),
                _ => Err(bad()),
            },
            GroupKind::Product(f) => {
                let inner = s.strip_prefix('<').and_then(|b| b.strip_suffix('>')).ok_or_else(bad)?;
                let parts = split_top(inner);
                if parts.len() != f.len() {
                    return Err(bad());
                }
                Ok(GroupElement::Tuple(f.iter().zip(parts).map(|(k, p)| k.parse(p)).collect::<Result<_>>()?))
            }
        }
    }

    pub fn default_generators(&self) -> Vec<GroupElement> {
        use GroupElement as E;
        match self {
            GroupKind::FiniteTable(t) => (0..t.names.len()).filter(|&i| i != t.identity).map(E::Index).collect(),
            GroupKind::Cyclic(k) => match k {
                1 => vec![],
                2 => vec![E::Residue(1)],
                _ => vec![E::Residue(1), E::Residue(k - 1)],
            },
            GroupKind::FreeAbelian(n) => (0..*n)
                .flat_map(|i| {
                    [1i64, -1].into_iter().map(move |s| {
                        let mut v = vec![0; *n];
                        v[i] = s;
                        E::Lattice(v)
                    })
                })
                .collect(),
            GroupKind::Heisenberg => vec![E::Heis(1, 0, 0), E::Heis(-1, 0, 0), E::Heis(0, 1, 0), E::Heis(0, -1, 0)],
            GroupKind::Product(f) => {
                let ids: Vec<GroupElement> = f.iter().map(|k| k.identity()).collect();
                let mut out = vec![];
                for (i, k) in f.iter().enumerate() {
                    for g in k.default_generators() {
                        let mut c = ids.clone();
                        c[i] = g;
                        out.push(E::Tuple(c));
                    }
                }
                out
            }
        }
    }

    fn to_spec(&self) -> GroupSpec {
        match self {
            GroupKind::FiniteTable(t) => GroupSpec::FiniteTable {
                elements: t.names.clone(),
                table: t.mul.clone(),
                generators: None,
            },
            GroupKind::Cyclic(k) => GroupSpec::Cyclic { k: *k, generators: None },
            GroupKind::FreeAbelian(n) => GroupSpec::FreeAbelian { n: *n, generators: None },
            GroupKind::Heisenberg => GroupSpec::Heisenberg { generators: None },
            GroupKind::Product(f) => GroupSpec::Product {
                factors: f.iter().map(|k| k.to_spec()).collect(),
                generators: None,
            },
        }
    }
}

fn split_top(s: &str) -> Vec<&str> {
    let mut parts = vec![];
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '<' | '(' => depth += 1,
            '>' | ')' => depth -= 1,
            '|' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// JSON form of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        k: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    FreeAbelian {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    Heisenberg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    FiniteTable {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
    Product {
        factors: Vec<GroupSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<String>>,
    },
}

/// A group given either inline or by shorthand such as `cyclic:4` or `s3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Shorthand(String),
    Inline(GroupSpec),
}

impl GroupRef {
    pub fn build(&self) -> Result<Group> {
        match self {
            GroupRef::Shorthand(s) => Group::from_shorthand(s),
            GroupRef::Inline(spec) => Group::from_spec(spec),
        }
    }
}

fn kind_from_spec(spec: &GroupSpec) -> Result<GroupKind> {
    Ok(match spec {
        GroupSpec::Cyclic { k, .. } => {
            if *k == 0 {
                return Err(Error::validation("k", "cyclic order must be positive"));
            }
            GroupKind::Cyclic(*k)
        }
        GroupSpec::FreeAbelian { n, .. } => GroupKind::FreeAbelian(*n),
        GroupSpec::Heisenberg { .. } => GroupKind::Heisenberg,
        GroupSpec::FiniteTable { elements, table, .. } => GroupKind::FiniteTable(Table::new(elements.clone(), table.clone())?),
        GroupSpec::Product { factors, .. } => {
            if factors.is_empty() {
                return Err(Error::validation("factors", "empty product"));
            }
            GroupKind::Product(
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| kind_from_spec(f).map_err(|e| prefix_path(e, &format!("factors[{i}]"))))
                    .collect::<Result<_>>()?,
            )
        }
    })
}

pub(crate) fn prefix_path(e: Error, prefix: &str) -> Error {
    match e {
        Error::Validation { path, message } => Error::validation(format!("{prefix}.{path}"), message),
        other => other,
    }
}

#[derive(Default)]
struct Bfs {
    order: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    dist: Vec<u32>,
    /// `layer_end[r]` is the number of elements at distance at most `r`.
    layer_end: Vec<usize>,
    saturated: bool,
}

/// A group together with its ordered symmetric generating set.
pub struct Group {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    search_radius: usize,
    cache: Mutex<Bfs>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Group")
            .field("kind", &self.kind.label())
            .field("generators", &self.generator_names())
            .finish()
    }
}

impl Clone for Group {
    fn clone(&self) -> Self {
        Group::new(self.kind.clone(), self.generators.clone()).expect("validated").with_search_radius(self.search_radius)
    }
}

impl Group {
    /// Builds a group, checking that the generators are valid and closed under inversion.
    pub fn new(kind: GroupKind, generators: Vec<GroupElement>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if !kind.contains(g) {
                return Err(Error::validation(format!("generators[{i}]"), "not an element of the group"));
            }
            if *g == kind.identity() {
                return Err(Error::validation(format!("generators[{i}]"), "identity is not a generator"));
            }
        }
        for (i, g) in generators.iter().enumerate() {
            let gi = kind.inv(g)?;
            if !generators.contains(&gi) {
                return Err(Error::validation(format!("generators[{i}]"), "generating set is not closed under inversion"));
            }
        }
        let g = Group { kind, generators, search_radius: DEFAULT_RADIUS, cache: Mutex::new(Bfs::default()) };
        if let Some(order) = g.kind.finite_order() {
            let reached = g.ball(order as usize)?.len() as u64;
            if reached != order {
                return Err(Error::validation("generators", format!("generate a subgroup of order {reached}, not {order}")));
            }
        }
        Ok(g)
    }

    pub fn with_default_generators(kind: GroupKind) -> Result<Self> {
        let gens = kind.default_generators();
        Group::new(kind, gens)
    }

    pub fn with_search_radius(mut self, radius: usize) -> Self {
        self.search_radius = radius;
        self
    }

    pub fn search_radius(&self) -> usize {
        self.search_radius
    }

    pub fn cyclic(k: u64) -> Self {
        Group::with_default_generators(GroupKind::Cyclic(k)).expect("cyclic group")
    }

    pub fn free_abelian(n: usize) -> Self {
        Group::with_default_generators(GroupKind::FreeAbelian(n)).expect("lattice")
    }

    pub fn heisenberg() -> Self {
        Group::with_default_generators(GroupKind::Heisenberg).expect("heisenberg")
    }

    /// Symmetric group on three letters, generated by (12) and (23).
    pub fn s3() -> Self {
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let mul = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let table = Table::new(names.iter().map(|s| s.to_string()).collect(), mul).expect("S3 table");
        Group::new(GroupKind::FiniteTable(table), vec![GroupElement::Index(1), GroupElement::Index(3)]).expect("S3")
    }

    /// Dihedral group of order 2n with rotations `r..` and reflections `..s`, generated by r, r⁻¹, s.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("n", "dihedral order needs n >= 2"));
        }
        let name = |k: usize, s: usize| {
            let rot = match k {
                0 => String::new(),
                1 => "r".to_string(),
                _ => format!("r{k}"),
            };
            match (rot.is_empty(), s) {
                (true, 0) => "e".to_string(),
                (true, _) => "s".to_string(),
                (false, 0) => rot,
                (false, _) => format!("{rot}s"),
            }
        };
        let elems: Vec<(usize, usize)> = (0..2).flat_map(|s| (0..n).map(move |k| (k, s))).collect();
        let idx = |(k, s): (usize, usize)| s * n + k;
        let mul = elems
            .iter()
            .map(|&(k1, s1)| {
                elems
                    .iter()
                    .map(|&(k2, s2)| {
                        let k = if s1 == 0 { (k1 + k2) % n } else { (k1 + n - k2) % n };
                        idx((k, (s1 + s2) % 2))
                    })
                    .collect()
            })
            .collect();
        let names = elems.iter().map(|&(k, s)| name(k, s)).collect();
        let table = Table::new(names, mul)?;
        let mut gens = vec![GroupElement::Index(1)];
        if n > 2 {
            gens.push(GroupElement::Index(n - 1));
        }
        gens.push(GroupElement::Index(n));
        Group::new(GroupKind::FiniteTable(table), gens)
    }

    /// Parses `cyclic:k`, `free_abelian:n`, `heisenberg`, `s3`, `d4`, `dihedral:n`, joined by `*` for products.
    pub fn from_shorthand(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('*').map(str::trim).collect();
        if parts.len() > 1 {
            let mut kinds = vec![];
            for p in &parts {
                kinds.push(Group::from_shorthand(p)?);
            }
            let gens = {
                let ids: Vec<GroupElement> = kinds.iter().map(|g| g.identity()).collect();
                let mut out = vec![];
                for (i, g) in kinds.iter().enumerate() {
                    for x in g.generators() {
                        let mut c = ids.clone();
                        c[i] = x.clone();
                        out.push(GroupElement::Tuple(c));
                    }
                }
                out
            };
            let kind = GroupKind::Product(kinds.into_iter().map(|g| g.kind).collect());
            return Group::new(kind, gens);
        }
        let bad = || Error::validation("group", format!("unknown group shorthand {s:?}"));
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.parse::<u64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        match (head, arg) {
            ("cyclic", Some(k)) if k > 0 => Group::with_default_generators(GroupKind::Cyclic(k)),
            ("free_abelian", Some(n)) => Group::with_default_generators(GroupKind::FreeAbelian(n as usize)),
            ("heisenberg", None) => Ok(Group::heisenberg()),
            ("s3", None) => Ok(Group::s3()),
            ("d4", None) => Group::dihedral(4),
            ("dihedral", Some(n)) => Group::dihedral(n as usize),
            _ => Err(bad()),
        }
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        let kind = kind_from_spec(spec)?;
        let names = match spec {
            GroupSpec::Cyclic { generators, .. }
            | GroupSpec::FreeAbelian { generators, .. }
            | GroupSpec::Heisenberg { generators }
            | GroupSpec::FiniteTable { generators, .. }
            | GroupSpec::Product { generators, .. } => generators.clone(),
        };
        let gens = match names {
            Some(names) => names
                .iter()
                .enumerate()
                .map(|(i, n)| kind.parse(n).map_err(|e| prefix_path(e, &format!("generators[{i}]"))))
                .collect::<Result<_>>()?,
            None => kind.default_generators(),
        };
        Group::new(kind, gens)
    }

    /// Spec with the generating set spelled out.
    pub fn spec(&self) -> GroupSpec {
        let mut spec = self.kind.to_spec();
        let names = Some(self.generator_names());
        match &mut spec {
            GroupSpec::Cyclic { generators, .. }
            | GroupSpec::FreeAbelian { generators, .. }
            | GroupSpec::Heisenberg { generators }
            | GroupSpec::FiniteTable { generators, .. }
            | GroupSpec::Product { generators, .. } => *generators = names,
        }
        spec
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.generators.iter().map(|g| self.name(g)).collect()
    }

    pub fn identity(&self) -> GroupElement {
        self.kind.identity()
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        self.kind.contains(a)
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.kind.mul(a, b)
    }

    /// Product of a sequence, identity for the empty sequence.
    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a GroupElement>) -> Result<GroupElement> {
        let mut acc = self.identity();
        for x in items {
            acc = self.kind.mul(&acc, x)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.kind.inv(a)
    }

    /// `h⁻¹ g h`.
    pub fn conjugate(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let hi = self.kind.inv(h)?;
        self.kind.mul(&self.kind.mul(&hi, g)?, h)
    }

    pub fn power(&self, g: &GroupElement, n: u64) -> Result<GroupElement> {
        let mut acc = self.identity();
        for _ in 0..n {
            acc = self.kind.mul(&acc, g)?;
        }
        Ok(acc)
    }

    pub fn name(&self, a: &GroupElement) -> String {
        self.kind.name(a)
    }

    pub fn parse(&self, s: &str) -> Result<GroupElement> {
        self.kind.parse(s)
    }

    pub fn is_finite(&self) -> bool {
        self.kind.finite_order().is_some()
    }

    pub fn order(&self) -> Option<u64> {
        self.kind.finite_order()
    }

    pub fn element_order(&self, g: &GroupElement) -> Result<u64> {
        self.kind.element_order(g)
    }

    /// All elements of a finite group in shortlex order.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        let n = self.order().ok_or_else(|| Error::Unsupported(format!("{} is infinite", self.label())))?;
        self.ball(n as usize)
    }

    fn lattice_closed_form(&self) -> bool {
        matches!(self.kind, GroupKind::FreeAbelian(_)) && self.generators == self.kind.default_generators()
    }

    fn grow(&self, bfs: &mut Bfs, radius: usize) -> Result<()> {
        if bfs.order.is_empty() {
            let e = self.identity();
            bfs.index.insert(e.clone(), 0);
            bfs.order.push(e);
            bfs.dist.push(0);
            bfs.layer_end.push(1);
        }
        while bfs.layer_end.len() <= radius && !bfs.saturated {
            let r = bfs.layer_end.len();
            let start = if r >= 2 { bfs.layer_end[r - 2] } else { 0 };
            let end = bfs.layer_end[r - 1];
            for i in start..end {
                for s in &self.generators {
                    let y = self.kind.mul(&bfs.order[i], s)?;
                    if !bfs.index.contains_key(&y) {
                        if bfs.order.len() >= BALL_CAP {
                            return Err(Error::Capacity(format!("ball exceeds {BALL_CAP} elements")));
                        }
                        bfs.index.insert(y.clone(), bfs.order.len());
                        bfs.order.push(y);
                        bfs.dist.push(r as u32);
                    }
                }
            }
            if bfs.order.len() == end {
                bfs.saturated = true;
            } else {
                bfs.layer_end.push(bfs.order.len());
            }
        }
        Ok(())
    }

    /// Elements of word length at most `r`, in shortlex order.
    pub fn ball(&self, r: usize) -> Result<Vec<GroupElement>> {
        let mut bfs = self.cache.lock().expect("bfs cache");
        self.grow(&mut bfs, r)?;
        let end = bfs.layer_end[r.min(bfs.layer_end.len() - 1)];
        Ok(bfs.order[..end].to_vec())
    }

    /// Sizes of the balls of radius 0..=r.
    pub fn ball_sizes(&self, r: usize) -> Result<Vec<usize>> {
        let mut bfs = self.cache.lock().expect("bfs cache");
        self.grow(&mut bfs, r)?;
        Ok((0..=r).map(|k| bfs.layer_end[k.min(bfs.layer_end.len() - 1)]).collect())
    }

    fn lookup(&self, g: &GroupElement, radius: usize) -> Result<(usize, u32)> {
        if !self.contains(g) {
            return Err(mismatch(g, &self.kind));
        }
        let mut bfs = self.cache.lock().expect("bfs cache");
        if let Some(&i) = bfs.index.get(g) {
            return Ok((i, bfs.dist[i]));
        }
        let mut r = bfs.layer_end.len();
        while r <= radius && !bfs.saturated {
            self.grow(&mut bfs, r)?;
            if let Some(&i) = bfs.index.get(g) {
                return Ok((i, bfs.dist[i]));
            }
            r += 1;
        }
        Err(Error::RadiusExceeded { radius })
    }

    fn effective_radius(&self) -> usize {
        match self.order() {
            Some(n) => n as usize,
            None => self.search_radius,
        }
    }

    /// Word length with respect to the stored generators.
    pub fn word_length(&self, g: &GroupElement) -> Result<usize> {
        if self.lattice_closed_form() {
            if let GroupElement::Lattice(v) = g {
                if v.len() == self.generators.len() / 2 {
                    return Ok(v.iter().map(|x| x.unsigned_abs() as usize).sum());
                }
            }
            return Err(mismatch(g, &self.kind));
        }
        self.word_length_within(g, self.effective_radius())
    }

    pub fn word_length_within(&self, g: &GroupElement, radius: usize) -> Result<usize> {
        Ok(self.lookup(g, radius)?.1 as usize)
    }

    /// `d(g, h) = ‖g⁻¹h‖`.
    pub fn distance(&self, g: &GroupElement, h: &GroupElement) -> Result<usize> {
        self.word_length(&self.kind.mul(&self.kind.inv(g)?, h)?)
    }

    /// Position of `g` in shortlex order.
    pub fn shortlex_rank(&self, g: &GroupElement) -> Result<usize> {
        Ok(self.lookup(g, self.effective_radius())?.0)
    }

    /// Conjugacy class of `γ` seen through conjugators of length at most `radius`.
    pub fn conjugacy_class(&self, gamma: &GroupElement, radius: usize) -> Result<ClassHandle> {
        let order = self.element_order(gamma)?;
        let conjugators = match self.order() {
            Some(_) => self.elements()?,
            None => self.ball(radius)?,
        };
        let mut members = vec![];
        let mut witnesses = vec![];
        let mut index = HashMap::new();
        for h in &conjugators {
            let m = self.conjugate(gamma, h)?;
            if !index.contains_key(&m) {
                index.insert(m.clone(), members.len());
                members.push(m);
                witnesses.push(h.clone());
            }
        }
        let exact = match self.order() {
            Some(_) => true,
            None => {
                let mut closed = true;
                'outer: for m in &members {
                    for s in &self.generators {
                        if !index.contains_key(&self.conjugate(m, s)?) {
                            closed = false;
                            break 'outer;
                        }
                    }
                }
                closed
            }
        };
        let centralizer = self.centralizer(gamma, radius)?;
        Ok(ClassHandle {
            nontrivial: *gamma != self.identity(),
            gamma: gamma.clone(),
            order,
            members,
            witnesses,
            centralizer,
            radius,
            exact,
            index,
        })
    }

    /// `{z : ‖z‖ ≤ radius, zγ = γz}` in shortlex order.
    pub fn centralizer(&self, gamma: &GroupElement, radius: usize) -> Result<Vec<GroupElement>> {
        let mut out = vec![];
        for z in self.ball(radius)? {
            if self.multiply(&z, gamma)? == self.multiply(gamma, &z)? {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// Fits `|B(r)| ≤ C0 (r+1)^m` on radii `0..=max_r`.
    ///
    /// `m` is the rounded log-slope of the ball sizes between the two largest
    /// radii, `C0` the smallest integer certifying every sampled radius.
    pub fn growth_degree_fit(&self, max_r: usize) -> Result<(u64, u32)> {
        if max_r < 3 {
            return Err(Error::validation("max_radius", "growth fit needs max radius >= 3"));
        }
        let sizes = self.ball_sizes(max_r)?;
        let (a, b) = (sizes[max_r - 1] as f64, sizes[max_r] as f64);
        let slope = (b / a).ln() / ((max_r as f64 + 1.0) / max_r as f64).ln();
        let m = slope.round().max(0.0) as u32;
        let c0 = sizes
            .iter()
            .enumerate()
            .map(|(r, &s)| {
                let p = (r as u64 + 1).pow(m);
                (s as u64).div_ceil(p)
            })
            .max()
            .unwrap_or(1);
        Ok((c0, m))
    }
}

/// A conjugacy class with conjugating witnesses and the centralizer, both
/// enumerated within a radius.
#[derive(Clone, Debug)]
pub struct ClassHandle {
    pub gamma: GroupElement,
    /// 0 means infinite order.
    pub order: u64,
    pub members: Vec<GroupElement>,
    /// `witnesses[i]⁻¹ γ witnesses[i] = members[i]`.
    pub witnesses: Vec<GroupElement>,
    pub centralizer: Vec<GroupElement>,
    pub radius: usize,
    pub nontrivial: bool,
    /// True when the enumerated members are the whole class.
    pub exact: bool,
    index: HashMap<GroupElement, usize>,
}

impl ClassHandle {
    pub fn contains(&self, y: &GroupElement) -> bool {
        self.index.contains_key(y)
    }

    pub fn witness(&self, y: &GroupElement) -> Option<&GroupElement> {
        self.index.get(y).map(|&i| &self.witnesses[i])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Replaces the witness of `y`; the caller is responsible for validity.
    pub fn set_witness(&mut self, y: &GroupElement, h: GroupElement) -> bool {
        match self.index.get(y) {
            Some(&i) => {
                self.witnesses[i] = h;
                true
            }
            None => false,
        }
    }

    /// Checks every stored witness and centralizer element by multiplication.
    pub fn verify(&self, g: &Group) -> Result<bool> {
        for (m, h) in self.members.iter().zip(&self.witnesses) {
            if g.conjugate(&self.gamma, h)? != *m {
                return Ok(false);
            }
        }
        for z in &self.centralizer {
            if g.multiply(z, &self.gamma)? != g.multiply(&self.gamma, z)? {
                return Ok(false);
            }
        }
        Ok(self.contains(&self.gamma))
    }
}
