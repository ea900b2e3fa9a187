//! Translation-invariant matrix product states on the cycle `C_m`.
//!
//! A site tensor `T ∈ A ⊗ B ⊗ B*` is stored as `N` slices `T^i`, each an
//! `n × n` matrix with `T^i[s][t] = T^{is}_t`. Placing `T` on every vertex of
//! the cycle and contracting the bond legs gives the state
//!
//! ```text
//! Φ(T)[i_1, …, i_m] = trace(T^{i_m} ⋯ T^{i_2} T^{i_1})
//! ```
//!
//! Multi-indices are linearized with site 1 as the most significant base-`N`
//! digit; every flattening, golden file and JSON dump uses that order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::counting::dim_pow;
use crate::error::{Error, Result};
use crate::scalars::{Field, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor<F: Field> {
    field: F,
    physical_dim: usize,
    bond_dim: usize,
    mats: Vec<Vec<F::Elem>>,
}

impl<F: Field> SiteTensor<F> {
    /// `mats[i]` is the row-major `n × n` slice `T^i`.
    pub fn new(
        field: F,
        physical_dim: usize,
        bond_dim: usize,
        mats: Vec<Vec<F::Elem>>,
    ) -> Result<Self> {
        if physical_dim == 0 || bond_dim == 0 {
            return Err(Error::Dimension("site tensor dimensions must be positive".into()));
        }
        if mats.len() != physical_dim {
            return Err(Error::Dimension(format!(
                "expected {physical_dim} slices, got {}",
                mats.len()
            )));
        }
        if let Some(bad) = mats.iter().position(|m| m.len() != bond_dim * bond_dim) {
            return Err(Error::Dimension(format!(
                "slice {bad} is not {bond_dim}x{bond_dim}"
            )));
        }
        Ok(Self {
            field,
            physical_dim,
            bond_dim,
            mats,
        })
    }

    pub fn zeros(field: F, physical_dim: usize, bond_dim: usize) -> Result<Self> {
        let z = field.zero();
        let mats = vec![vec![z; bond_dim * bond_dim]; physical_dim];
        Self::new(field, physical_dim, bond_dim, mats)
    }

    /// Entries drawn independently and uniformly from the field.
    pub fn random<R: Rng + ?Sized>(
        field: F,
        physical_dim: usize,
        bond_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mats = (0..physical_dim)
            .map(|_| (0..bond_dim * bond_dim).map(|_| field.random(rng)).collect())
            .collect();
        Self::new(field, physical_dim, bond_dim, mats)
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }
    pub fn bond_dim(&self) -> usize {
        self.bond_dim
    }

    pub fn slice(&self, i: usize) -> &[F::Elem] {
        &self.mats[i]
    }

    /// Sets `T^{i s}_t`.
    pub fn set(&mut self, i: usize, s: usize, t: usize, v: F::Elem) {
        self.mats[i][s * self.bond_dim + t] = v;
    }

    pub fn get(&self, i: usize, s: usize, t: usize) -> &F::Elem {
        &self.mats[i][s * self.bond_dim + t]
    }

    /// Replaces every slice `T^i` by `G · T^i · G^{-1}`.
    pub fn conjugated(&self, g: &Matrix<F>) -> Result<Self> {
        let n = self.bond_dim;
        if g.rows() != n || g.cols() != n {
            return Err(Error::Dimension(format!("conjugator must be {n}x{n}")));
        }
        let g_inv = g
            .inverse()?
            .ok_or_else(|| Error::InvalidArgument("conjugator is singular".into()))?;
        let mats = self
            .mats
            .iter()
            .map(|m| {
                let slice = Matrix::new(self.field.clone(), n, n, m.clone())?;
                Ok(g.matmul(&slice)?.matmul(&g_inv)?.entries().to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.field.clone(), self.physical_dim, n, mats)
    }

    fn mat_mul(&self, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let n = self.bond_dim;
        let f = &self.field;
        let mut out = vec![f.zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let x = &a[r * n + k];
                if f.is_zero(x) {
                    continue;
                }
                for c in 0..n {
                    let o = &mut out[r * n + c];
                    *o = f.add(o, &f.mul(x, &b[k * n + c]));
                }
            }
        }
        out
    }

    /// `trace(a · b)` without forming the product.
    fn trace_of_product(&self, a: &[F::Elem], b: &[F::Elem]) -> F::Elem {
        let n = self.bond_dim;
        let f = &self.field;
        let mut acc = f.zero();
        for r in 0..n {
            for k in 0..n {
                acc = f.add(&acc, &f.mul(&a[r * n + k], &b[k * n + r]));
            }
        }
        acc
    }

    fn identity_slice(&self) -> Vec<F::Elem> {
        let n = self.bond_dim;
        let f = &self.field;
        (0..n * n)
            .map(|k| if k / n == k % n { f.one() } else { f.zero() })
            .collect()
    }

    /// One coefficient `trace(T^{i_m} ⋯ T^{i_1})` of `Φ(T)` without
    /// materializing the state.
    pub fn coefficient(&self, multi_index: &[usize]) -> Result<F::Elem> {
        if multi_index.is_empty() {
            return Err(Error::InvalidArgument("empty multi-index".into()));
        }
        if let Some(&bad) = multi_index.iter().find(|&&i| i >= self.physical_dim) {
            return Err(Error::InvalidArgument(format!(
                "physical index {bad} out of range for N = {}",
                self.physical_dim
            )));
        }
        let (last, init) = multi_index.split_last().expect("nonempty");
        let mut prod = self.identity_slice();
        for &i in init {
            prod = self.mat_mul(&self.mats[i], &prod);
        }
        Ok(self.trace_of_product(&self.mats[*last], &prod))
    }

    // Fills `out` (all completions of a prefix of `depth` sites) given the
    // prefix product `prod = T^{i_depth} ⋯ T^{i_1}`.
    fn fill(&self, m: usize, depth: usize, prod: &[F::Elem], out: &mut [F::Elem]) {
        let big_n = self.physical_dim;
        if m - depth == 1 {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.trace_of_product(&self.mats[i], prod);
            }
            return;
        }
        let stride = out.len() / big_n;
        for (i, chunk) in out.chunks_mut(stride).enumerate() {
            let next = self.mat_mul(&self.mats[i], prod);
            self.fill(m, depth + 1, &next, chunk);
        }
    }
}

/// `Φ(T) ∈ A^{⊗m}` as a dense tensor with `N^m` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor<F: Field> {
    field: F,
    sites: usize,
    physical_dim: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> StateTensor<F> {
    pub fn new(field: F, sites: usize, physical_dim: usize, entries: Vec<F::Elem>) -> Result<Self> {
        if sites == 0 || physical_dim == 0 {
            return Err(Error::Dimension("state dimensions must be positive".into()));
        }
        let expected = dim_pow(physical_dim, sites)?;
        if entries.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} entries, got {}",
                entries.len()
            )));
        }
        Ok(Self {
            field,
            sites,
            physical_dim,
            entries,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }
    pub fn entries(&self) -> &[F::Elem] {
        &self.entries
    }
    pub fn into_entries(self) -> Vec<F::Elem> {
        self.entries
    }

    pub fn linear_index(&self, multi_index: &[usize]) -> usize {
        multi_index
            .iter()
            .fold(0, |acc, &i| acc * self.physical_dim + i)
    }

    pub fn multi_index(&self, mut linear: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites];
        for slot in out.iter_mut().rev() {
            *slot = linear % self.physical_dim;
            linear /= self.physical_dim;
        }
        out
    }

    pub fn get(&self, multi_index: &[usize]) -> &F::Elem {
        &self.entries[self.linear_index(multi_index)]
    }

    /// Output entry at `(i_1, …, i_m)` is the input entry at
    /// `(i_{1+k}, …, i_{m+k})`, indices taken mod `m`.
    pub fn cyclic_shift(&self, k: i64) -> Self {
        let m = self.sites;
        let k = k.rem_euclid(m as i64) as usize;
        if k == 0 {
            return self.clone();
        }
        let entries = (0..self.entries.len())
            .map(|idx| {
                let mut digits = self.multi_index(idx);
                digits.rotate_left(k);
                self.entries[self.linear_index(&digits)].clone()
            })
            .collect();
        Self {
            field: self.field.clone(),
            sites: m,
            physical_dim: self.physical_dim,
            entries,
        }
    }

    /// Smallest `k ∈ 1..m` with `cyclic_shift(k) ≠ self`, if any.
    pub fn first_non_invariant_shift(&self) -> Option<usize> {
        (1..self.sites).find(|&k| {
            let shifted = self.cyclic_shift(k as i64);
            shifted
                .entries
                .iter()
                .zip(&self.entries)
                .any(|(a, b)| !self.field.eq(a, b))
        })
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.physical_dim == other.physical_dim
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| self.field.eq(a, b))
    }

    /// The flattening with rows indexed by the source sites and columns by
    /// the sink sites, both in ascending site order.
    pub fn flatten(&self, part: &Partition) -> Result<Matrix<F>> {
        if part.sites() != self.sites {
            return Err(Error::InvalidPartition(format!(
                "partition of {} sites applied to a {}-site state",
                part.sites(),
                self.sites
            )));
        }
        let row_offsets = self.offsets(part.sources())?;
        let col_offsets = self.offsets(part.sinks())?;
        let mut entries = Vec::with_capacity(row_offsets.len() * col_offsets.len());
        for r in &row_offsets {
            for c in &col_offsets {
                entries.push(self.entries[r + c].clone());
            }
        }
        Matrix::new(self.field.clone(), row_offsets.len(), col_offsets.len(), entries)
    }

    // Linear-index contribution of every assignment to the given sites,
    // enumerated with the first listed site most significant.
    fn offsets(&self, sites: &[usize]) -> Result<Vec<usize>> {
        let big_n = self.physical_dim;
        let weights: Vec<usize> = sites
            .iter()
            .map(|&s| dim_pow(big_n, self.sites - 1 - s))
            .collect::<Result<_>>()?;
        let mut out = vec![0usize];
        for w in weights {
            out = out
                .iter()
                .flat_map(|&base| (0..big_n).map(move |i| base + i * w))
                .collect();
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "m": self.sites,
            "N": self.physical_dim,
            "ring": self.field.ring().to_string(),
            "entries": self.entries.iter().map(|e| self.field.elem_to_json(e)).collect::<Vec<_>>(),
        })
    }

    /// Parses the `{m, N, ring, entries}` form; the ring must match `field`.
    pub fn from_json(field: F, value: &Value) -> Result<Self> {
        let get_usize = |key: &str| {
            value
                .get(key)
                .and_then(Value::as_u64)
                .map(|v| v as usize)
                .ok_or_else(|| Error::Parse(format!("missing or invalid '{key}'")))
        };
        let sites = get_usize("m")?;
        let physical_dim = get_usize("N")?;
        if let Some(ring) = value.get("ring").and_then(Value::as_str) {
            let ring: crate::scalars::ScalarRing = ring.parse()?;
            if ring != field.ring() {
                return Err(Error::Parse(format!(
                    "state is over {ring}, expected {}",
                    field.ring()
                )));
            }
        }
        let entries = value
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing 'entries'".into()))?
            .iter()
            .map(|v| field.elem_from_json(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, sites, physical_dim, entries)
    }
}

/// `Φ(T)` for `m` copies of `T` around the cycle.
pub fn contract_cycle<F: Field>(t: &SiteTensor<F>, m: usize) -> Result<StateTensor<F>> {
    if m == 0 {
        return Err(Error::InvalidArgument("the cycle needs at least one site".into()));
    }
    let big_n = t.physical_dim;
    let total = dim_pow(big_n, m)?;
    let f = &t.field;
    let mut entries = vec![f.zero(); total];
    if m == 1 {
        let id = t.identity_slice();
        for (i, e) in entries.iter_mut().enumerate() {
            *e = t.trace_of_product(&t.mats[i], &id);
        }
        return StateTensor::new(f.clone(), m, big_n, entries);
    }
    // Split on a prefix of sites so that the blocks can be filled in parallel.
    let mut prefix = 1;
    while prefix < m - 1 && dim_pow(big_n, prefix)? < 64 {
        prefix += 1;
    }
    let block = dim_pow(big_n, m - prefix)?;
    entries
        .par_chunks_mut(block)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut digits = vec![0; prefix];
            let mut rest = b;
            for d in digits.iter_mut().rev() {
                *d = rest % big_n;
                rest /= big_n;
            }
            let mut prod = t.identity_slice();
            for &i in &digits {
                prod = t.mat_mul(&t.mats[i], &prod);
            }
            t.fill(m, prefix, &prod, chunk);
        });
    StateTensor::new(f.clone(), m, big_n, entries)
}

/// A split of the sites `{1, …, m}` into sources `S` and sinks `S̄`, both
/// nonempty. Stored 0-based and sorted; written 1-based as `"1,3/2,4"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    sites: usize,
    sources: Vec<usize>,
    sinks: Vec<usize>,
}

impl Partition {
    /// `sources` are 0-based site indices.
    pub fn from_sources(sites: usize, sources: &[usize]) -> Result<Self> {
        let mut is_source = vec![false; sites];
        for &s in sources {
            if s >= sites {
                return Err(Error::InvalidPartition(format!(
                    "site {} outside 1..={sites}",
                    s + 1
                )));
            }
            if is_source[s] {
                return Err(Error::InvalidPartition(format!("site {} repeated", s + 1)));
            }
            is_source[s] = true;
        }
        let sources: Vec<usize> = (0..sites).filter(|&s| is_source[s]).collect();
        let sinks: Vec<usize> = (0..sites).filter(|&s| !is_source[s]).collect();
        if sources.is_empty() || sinks.is_empty() {
            return Err(Error::InvalidPartition(
                "sources and sinks must both be nonempty".into(),
            ));
        }
        Ok(Self {
            sites,
            sources,
            sinks,
        })
    }

    /// Odd sites `1, 3, 5, …` as sources.
    pub fn odd_even(sites: usize) -> Result<Self> {
        let sources: Vec<usize> = (0..sites).step_by(2).collect();
        Self::from_sources(sites, &sources)
    }

    /// Sites `1, …, ⌊m/2⌋` as sources.
    pub fn first_half(sites: usize) -> Result<Self> {
        let sources: Vec<usize> = (0..sites / 2).collect();
        Self::from_sources(sites, &sources)
    }

    /// Parses `odd-even`, `first-half`, or an explicit 1-based `"1,3/2,4"`
    /// (the part after `/` may be omitted).
    pub fn parse(sites: usize, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec {
            "odd-even" => return Self::odd_even(sites),
            "first-half" => return Self::first_half(sites),
            _ => {}
        }
        let parse_list = |s: &str| -> Result<Vec<usize>> {
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    let v: usize = t
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad site '{t}' in '{spec}'")))?;
                    if v == 0 {
                        return Err(Error::InvalidPartition("sites are numbered from 1".into()));
                    }
                    Ok(v - 1)
                })
                .collect()
        };
        let (src, snk) = match spec.split_once('/') {
            Some((a, b)) => (a, Some(b)),
            None => (spec, None),
        };
        let part = Self::from_sources(sites, &parse_list(src)?)?;
        if let Some(snk) = snk {
            let mut sinks = parse_list(snk)?;
            sinks.sort_unstable();
            if sinks != part.sinks {
                return Err(Error::InvalidPartition(format!(
                    "'{spec}' does not split 1..={sites} into two complementary sets"
                )));
            }
        }
        Ok(part)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }
    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }
    pub fn is_source(&self, site: usize) -> bool {
        self.sources.binary_search(&site).is_ok()
    }

    /// `(S̄, S)`.
    pub fn swapped(&self) -> Self {
        Self {
            sites: self.sites,
            sources: self.sinks.clone(),
            sinks: self.sources.clone(),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|s| (s + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}/{}", join(&self.sources), join(&self.sinks))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Only the explicit form; the number of sites is the largest label.
    fn from_str(s: &str) -> Result<Self> {
        let sites = s
            .split(['/', ','])
            .filter_map(|t| t.trim().parse::<usize>().ok())
            .max()
            .ok_or_else(|| Error::Parse(format!("bad partition '{s}'")))?;
        Self::parse(sites, s)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
