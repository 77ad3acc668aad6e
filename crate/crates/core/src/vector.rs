//! Finitely supported vectors over the rationals and the elementary norms.
//!
//! A [`FiniteVector`] is an element of `c_00`: a finite map from 1-based
//! positive indices to exact rationals, with zero entries never stored.
//! Indices are 1-based to match the usual basis `(e_1, e_2, ...)`; the
//! admissibility constraint of the Tsirelson norm is sensitive to the actual
//! index values, so this is load-bearing, not cosmetic.

use crate::enclosure::Enclosure;
use crate::roots;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = num_rational::BigRational;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum VectorError {
    #[error("index {0} is not a positive integer")]
    NonPositiveIndex(i64),
    #[error("duplicate index {0}")]
    DuplicateIndex(u32),
    #[error("lp exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(Rat),
    #[error("malformed vector: {0}")]
    Parse(String),
    #[error("unknown norm space tag `{0}`")]
    UnknownSpace(String),
}

/// A finitely supported vector: sorted `(index, value)` entries, no zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteVector {
    entries: Vec<(u32, Rat)>,
}

impl FiniteVector {
    /// Build a vector from arbitrary `(index, value)` pairs. Zero values are
    /// dropped; duplicate or non-positive indices are rejected.
    pub fn new(entries: Vec<(u32, Rat)>) -> Result<Self, VectorError> {
        let mut map = BTreeMap::new();
        for (idx, value) in entries {
            if idx == 0 {
                return Err(VectorError::NonPositiveIndex(0));
            }
            if map.insert(idx, value).is_some() {
                return Err(VectorError::DuplicateIndex(idx));
            }
        }
        Ok(FiniteVector {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    pub fn zero() -> Self {
        FiniteVector {
            entries: Vec::new(),
        }
    }

    /// The basis vector `e_k`.
    pub fn basis(k: u32) -> Self {
        assert!(k >= 1, "basis index must be positive");
        FiniteVector {
            entries: vec![(k, Rat::one())],
        }
    }

    /// The summing-basis vector `s_n = e_1 + ... + e_n`.
    pub fn summing(n: u32) -> Self {
        FiniteVector {
            entries: (1..=n).map(|i| (i, Rat::one())).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, Rat)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> IndexSet {
        IndexSet {
            items: self.entries.iter().map(|(i, _)| *i).collect(),
        }
    }

    pub fn min_index(&self) -> Option<u32> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|(i, _)| *i)
    }

    /// Coordinate lookup; indices off the support read as zero.
    pub fn get(&self, index: u32) -> Rat {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Rat::zero(),
        }
    }

    /// Restriction `Ex`: agrees with `self` on `set`, zero elsewhere.
    pub fn restrict(&self, set: &IndexSet) -> FiniteVector {
        FiniteVector {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| set.contains(*i))
                .cloned()
                .collect(),
        }
    }

    /// Restriction to the integer interval `[lo, hi]`.
    pub fn restrict_interval(&self, lo: u32, hi: u32) -> FiniteVector {
        FiniteVector {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| *i >= lo && *i <= hi)
                .cloned()
                .collect(),
        }
    }

    pub fn add(&self, other: &FiniteVector) -> FiniteVector {
        let mut map: BTreeMap<u32, Rat> = self.entries.iter().cloned().collect();
        for (i, v) in &other.entries {
            let entry = map.entry(*i).or_insert_with(Rat::zero);
            *entry = &*entry + v;
        }
        FiniteVector {
            entries: map.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    pub fn sub(&self, other: &FiniteVector) -> FiniteVector {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> FiniteVector {
        if c.is_zero() {
            return FiniteVector::zero();
        }
        FiniteVector {
            entries: self.entries.iter().map(|(i, v)| (*i, c * v)).collect(),
        }
    }

    /// Coordinatewise sign flip on the given indices; all other indices keep
    /// sign `+1`. A sign map `index -> ±1` is exactly a flip set.
    pub fn apply_signs(&self, flip: &IndexSet) -> FiniteVector {
        FiniteVector {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| {
                    if flip.contains(*i) {
                        (*i, -v.clone())
                    } else {
                        (*i, v.clone())
                    }
                })
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> Rat {
        self.entries
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn l1_norm(&self) -> Rat {
        self.entries
            .iter()
            .fold(Rat::zero(), |acc, (_, v)| acc + v.abs())
    }

    /// Exact squared `l2` norm, for comparisons without radicals.
    pub fn l2_norm_sq(&self) -> Rat {
        self.entries
            .iter()
            .fold(Rat::zero(), |acc, (_, v)| acc + v * v)
    }

    /// Certified enclosure of the `lp` norm, width at most `tol`.
    pub fn lp_norm_enclosure(&self, p: &Rat, tol: &Rat) -> Result<Enclosure, roots::RootError> {
        let values: Vec<Rat> = self.entries.iter().map(|(_, v)| v.clone()).collect();
        roots::lp_norm_enclosure(&values, p, tol)
    }

    /// Canonical JSON value: `{"entries": [[index, "num/den"], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(i, v)| serde_json::json!([i, v.to_string()]))
            .collect();
        serde_json::json!({ "entries": entries })
    }

    /// Parse from the canonical JSON form. Accepts either the wrapped object
    /// `{"entries": [...]}` or a bare entries array; values may be rational
    /// strings (`"3/2"`) or JSON integers. Indices must be strictly increasing.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, VectorError> {
        let entries_value = match value {
            serde_json::Value::Object(map) => map
                .get("entries")
                .ok_or_else(|| VectorError::Parse("missing `entries` field".into()))?,
            serde_json::Value::Array(_) => value,
            _ => {
                return Err(VectorError::Parse(
                    "expected an object with `entries` or a bare array".into(),
                ))
            }
        };
        let items = entries_value
            .as_array()
            .ok_or_else(|| VectorError::Parse("`entries` must be an array".into()))?;
        let mut entries = Vec::with_capacity(items.len());
        let mut last_index: u32 = 0;
        for item in items {
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| VectorError::Parse("each entry must be [index, value]".into()))?;
            let idx_raw = pair[0]
                .as_i64()
                .ok_or_else(|| VectorError::Parse("entry index must be an integer".into()))?;
            if idx_raw < 1 || idx_raw > u32::MAX as i64 {
                return Err(VectorError::NonPositiveIndex(idx_raw));
            }
            let idx = idx_raw as u32;
            if idx <= last_index {
                return Err(VectorError::Parse(format!(
                    "indices must be strictly increasing (saw {idx} after {last_index})"
                )));
            }
            last_index = idx;
            let value = parse_rat_value(&pair[1])?;
            entries.push((idx, value));
        }
        FiniteVector::new(entries)
    }

    pub fn from_json_str(text: &str) -> Result<Self, VectorError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| VectorError::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        Self::from_json(&value)
    }
}

fn parse_rat_value(value: &serde_json::Value) -> Result<Rat, VectorError> {
    match value {
        serde_json::Value::String(s) => s
            .parse::<Rat>()
            .map_err(|e| VectorError::Parse(format!("bad rational `{s}`: {e}"))),
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(|i| Rat::from_integer(i.into()))
            .ok_or_else(|| VectorError::Parse(format!("non-integer numeric value {n}"))),
        _ => Err(VectorError::Parse(
            "entry value must be a rational string or integer".into(),
        )),
    }
}

impl fmt::Display for FiniteVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(i, v)| format!("{v}*e{i}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A finite set of positive indices, kept strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    items: Vec<u32>,
}

impl IndexSet {
    pub fn new(mut items: Vec<u32>) -> Result<Self, VectorError> {
        items.sort_unstable();
        if items.first() == Some(&0) {
            return Err(VectorError::NonPositiveIndex(0));
        }
        for w in items.windows(2) {
            if w[0] == w[1] {
                return Err(VectorError::DuplicateIndex(w[0]));
            }
        }
        Ok(IndexSet { items })
    }

    pub fn empty() -> Self {
        IndexSet { items: Vec::new() }
    }

    pub fn range(lo: u32, hi: u32) -> Self {
        assert!(lo >= 1);
        IndexSet {
            items: (lo..=hi).collect(),
        }
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.items.binary_search(&index).is_ok()
    }
}

/// Tag selecting the ambient norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormSpace {
    /// `lp` norm with rational exponent `p >= 1`.
    Lp(Rat),
    /// The sup norm (the `c_0` / `l_infinity` norm on `c_00`).
    Sup,
    /// The implicitly defined Tsirelson norm.
    Tsirelson,
}

impl NormSpace {
    pub fn lp(p: Rat) -> Result<Self, VectorError> {
        if p < Rat::one() {
            return Err(VectorError::InvalidExponent(p));
        }
        Ok(NormSpace::Lp(p))
    }

    pub fn l1() -> Self {
        NormSpace::Lp(crate::rat_int(1))
    }

    pub fn l2() -> Self {
        NormSpace::Lp(crate::rat_int(2))
    }

    /// Parse a CLI tag: `sup` (alias `c0`, `linf`), `tsirelson`, `l1`, `l2`,
    /// or `lp:<rational>`.
    pub fn parse(tag: &str) -> Result<Self, VectorError> {
        match tag {
            "sup" | "c0" | "linf" => Ok(NormSpace::Sup),
            "tsirelson" => Ok(NormSpace::Tsirelson),
            "l1" => Ok(NormSpace::l1()),
            "l2" => Ok(NormSpace::l2()),
            _ => {
                if let Some(p) = tag.strip_prefix("lp:") {
                    let p: Rat = p
                        .parse()
                        .map_err(|e| VectorError::Parse(format!("bad exponent `{p}`: {e}")))?;
                    NormSpace::lp(p)
                } else {
                    Err(VectorError::UnknownSpace(tag.to_string()))
                }
            }
        }
    }

    /// Whether norms in this space evaluate to exact rationals here.
    pub fn is_exact(&self) -> bool {
        match self {
            NormSpace::Sup | NormSpace::Tsirelson => true,
            NormSpace::Lp(p) => p.is_one(),
        }
    }
}

impl fmt::Display for NormSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpace::Lp(p) => write!(f, "lp:{p}"),
            NormSpace::Sup => write!(f, "sup"),
            NormSpace::Tsirelson => write!(f, "tsirelson"),
        }
    }
}
