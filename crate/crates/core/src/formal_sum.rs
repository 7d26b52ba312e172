//! Integer formal sums over a finite index set.
//!
//! A [`Config`] is an element of the free abelian group on the vertices, arcs
//! or faces of one particular graph. Each config carries the [`Universe`] it
//! lives in, and every binary operation rejects operands from different
//! universes instead of silently reinterpreting indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::ComponentPartition;

static NEXT_UNIVERSE_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    Vertex,
    Arc,
    Face,
    Block,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IndexKind::Vertex => "vertex",
            IndexKind::Arc => "arc",
            IndexKind::Face => "face",
            IndexKind::Block => "block",
        };
        f.write_str(s)
    }
}

/// Tag identifying a finite index set `{0, .., size-1}` of a given kind.
///
/// Two universes are equal only if they were minted by the same call to
/// [`Universe::fresh`] (clones share the tag).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe {
    id: u64,
    kind: IndexKind,
    size: usize,
}

impl Universe {
    pub fn fresh(kind: IndexKind, size: usize) -> Self {
        Universe {
            id: NEXT_UNIVERSE_ID.fetch_add(1, Ordering::Relaxed),
            kind,
            size,
        }
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn check(&self, other: &Universe) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::UniverseMismatch(format!(
                "{} config (universe #{}) combined with {} config (universe #{})",
                self.kind, self.id, other.kind, other.id
            )))
        }
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            })
        }
    }
}

/// Sparse integer formal sum. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    universe: Universe,
    coeffs: BTreeMap<usize, BigInt>,
}

impl Config {
    pub fn zero(universe: Universe) -> Self {
        Config {
            universe,
            coeffs: BTreeMap::new(),
        }
    }

    /// The basis element for `index`.
    pub fn unit(universe: Universe, index: usize) -> Result<Self> {
        let mut c = Config::zero(universe);
        c.add_coeff(index, BigInt::one())?;
        Ok(c)
    }

    /// Builds a config from `(index, coefficient)` pairs; repeated indices are summed.
    pub fn from_pairs<I, K>(universe: Universe, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, K)>,
        K: Into<BigInt>,
    {
        let mut c = Config::zero(universe);
        for (i, k) in pairs {
            c.add_coeff(i, k.into())?;
        }
        Ok(c)
    }

    pub fn from_dense(universe: Universe, values: &[i64]) -> Result<Self> {
        if values.len() != universe.size {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a universe of size {}",
                values.len(),
                universe.size
            )));
        }
        Config::from_pairs(universe, values.iter().copied().enumerate())
    }

    /// Sum of the basis elements of `indices`, each with coefficient one.
    pub fn indicator<I: IntoIterator<Item = usize>>(universe: Universe, indices: I) -> Result<Self> {
        Config::from_pairs(universe, indices.into_iter().map(|i| (i, 1)))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn get(&self, index: usize) -> BigInt {
        self.coeffs.get(&index).cloned().unwrap_or_default()
    }

    /// Coefficient as `i64`, saturating for huge values.
    pub fn get_i64(&self, index: usize) -> i64 {
        match self.coeffs.get(&index) {
            None => 0,
            Some(k) => k.to_i64().unwrap_or(if k.is_negative() { i64::MIN } else { i64::MAX }),
        }
    }

    pub fn is_positive_at(&self, index: usize) -> bool {
        self.coeffs.get(&index).is_some_and(|k| k.is_positive())
    }

    pub fn is_negative_at(&self, index: usize) -> bool {
        self.coeffs.get(&index).is_some_and(|k| k.is_negative())
    }

    /// Nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigInt)> + '_ {
        self.coeffs.iter().map(|(i, k)| (*i, k))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    /// Indices with coefficient at least one ("elements" of a nonnegative sum).
    pub fn elements(&self) -> BTreeSet<usize> {
        self.coeffs
            .iter()
            .filter(|(_, k)| k.is_positive())
            .map(|(i, _)| *i)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> BigInt {
        self.coeffs.values().sum()
    }

    pub fn add_coeff(&mut self, index: usize, delta: BigInt) -> Result<()> {
        self.universe.check_index(index)?;
        if delta.is_zero() {
            return Ok(());
        }
        let entry = self.coeffs.entry(index).or_default();
        *entry += delta;
        if entry.is_zero() {
            self.coeffs.remove(&index);
        }
        Ok(())
    }

    pub fn set(&mut self, index: usize, value: BigInt) -> Result<()> {
        self.universe.check_index(index)?;
        if value.is_zero() {
            self.coeffs.remove(&index);
        } else {
            self.coeffs.insert(index, value);
        }
        Ok(())
    }

    /// `self + k * other`.
    pub fn combine(&self, k: &BigInt, other: &Config) -> Result<Config> {
        self.universe.check(&other.universe)?;
        let mut out = self.clone();
        if k.is_zero() {
            return Ok(out);
        }
        for (i, c) in &other.coeffs {
            out.add_coeff(*i, k * c)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Config) -> Result<Config> {
        self.combine(&BigInt::one(), other)
    }

    pub fn sub(&self, other: &Config) -> Result<Config> {
        self.combine(&-BigInt::one(), other)
    }

    pub fn scale(&self, k: &BigInt) -> Config {
        if k.is_zero() {
            return Config::zero(self.universe);
        }
        Config {
            universe: self.universe,
            coeffs: self.coeffs.iter().map(|(i, c)| (*i, c * k)).collect(),
        }
    }

    pub fn neg(&self) -> Config {
        self.scale(&-BigInt::one())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|k| k.is_positive())
    }

    /// `self <= other` coefficientwise.
    pub fn leq(&self, other: &Config) -> Result<bool> {
        Ok(other.sub(self)?.is_nonnegative())
    }

    /// Keeps only the entries whose index satisfies `keep`.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> Config {
        Config {
            universe: self.universe,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(i, _)| keep(**i))
                .map(|(i, k)| (*i, k.clone()))
                .collect(),
        }
    }

    /// Per-block coefficient sums, as a config over the partition's blocks.
    pub fn degree(&self, partition: &ComponentPartition) -> Result<Config> {
        self.universe.check(&partition.ground())?;
        let mut out = Config::zero(partition.block_universe());
        for (i, k) in &self.coeffs {
            out.add_coeff(partition.block_of(*i), k.clone())?;
        }
        Ok(out)
    }

    /// Dense `i64` view; `None` if some coefficient does not fit.
    pub fn to_dense_i64(&self) -> Option<Vec<i64>> {
        let mut v = vec![0i64; self.universe.size];
        for (i, k) in &self.coeffs {
            v[*i] = k.to_i64()?;
        }
        Some(v)
    }

    pub fn to_dense(&self) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.universe.size];
        for (i, k) in &self.coeffs {
            v[*i] = k.clone();
        }
        v
    }

    /// Renders the literal syntax `name=k,name=k` in index order.
    pub fn format_with<S: AsRef<str>>(&self, names: &[S]) -> String {
        self.coeffs
            .iter()
            .map(|(i, k)| format!("{}={}", names[*i].as_ref(), k))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses the literal syntax against a name table.
    pub fn parse_with(universe: Universe, text: &str, index: &HashMap<String, usize>) -> Result<Config> {
        let mut c = Config::zero(universe);
        for (name, k) in parse_literal(text)? {
            let i = *index.get(&name).ok_or_else(|| Error::UnknownId {
                kind: kind_name(universe.kind),
                name: name.clone(),
            })?;
            c.add_coeff(i, k)?;
        }
        Ok(c)
    }
}

fn kind_name(kind: IndexKind) -> &'static str {
    match kind {
        IndexKind::Vertex => "vertex",
        IndexKind::Arc => "arc",
        IndexKind::Face => "face",
        IndexKind::Block => "block",
    }
}

/// Splits `a=1,b=-2` into named coefficients. Duplicate names are an error;
/// the empty string is the zero sum.
pub fn parse_literal(text: &str) -> Result<Vec<(String, BigInt)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("expected `index=int`, found `{part}`")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::parse(1, format!("missing index in `{part}`")));
        }
        let value: BigInt = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, format!("bad integer in `{part}`")))?;
        if !seen.insert(name.to_string()) {
            return Err(Error::parse(1, format!("duplicate index `{name}`")));
        }
        out.push((name.to_string(), value));
    }
    Ok(out)
}
