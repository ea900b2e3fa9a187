//! Bond dimension two on the `2d`-cycle: the line of site tensors
//! `L(μ, ν)`, its image `Φ(L(μ, ν))`, and explicit vectors in the kernel of
//! the odd/even flattening.
//!
//! A full index `δ ∈ {0,1}^{2d}` interlaces the odd-slot bits `η` with the
//! even-slot bits `ε`: `δ = (η_1, ε_1, η_2, ε_2, …, η_d, ε_d)`. The
//! coefficient of `Φ(L(μ, ν))` at `δ` is `μ^{2d - c} ν^c` with `c = coef(δ)`
//! the number of cyclic bit changes.
//!
//! For a set `S` of `2p` odd positions, `K_S` puts the alternating patterns
//! `0101…` (sign `+`) and `1010…` (sign `-`) on the slots of `S` and
//! `α^0 - α^1` on every other odd slot. Odd positions are 1-based sequence
//! positions `1, 3, …, 2d-1`; internally slot `j` is position `2j + 1`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mps::{contract_cycle, Partition, StateTensor};
use crate::qcut::qmc;
use crate::qflow::{line_tensor, qmf_estimate, trial_rng};
use crate::scalars::{span_dimension, Field, Matrix};

/// A string over `{0,1}`; the first bit is the most significant digit of
/// the matching linear index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn from_index(index: usize, len: usize) -> Self {
        let bits = (0..len).map(|k| ((index >> (len - 1 - k)) & 1) as u8).collect();
        Self { bits }
    }

    pub fn to_index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
        }
    }

    pub fn flipped(&self, k: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[k] ^= 1;
        Self { bits }
    }

    /// `η ⌣ ε`: odd slots from `self`, even slots from `even`.
    pub fn interlace(&self, even: &BitString) -> Result<Self> {
        if self.len() != even.len() {
            return Err(Error::Dimension(format!(
                "cannot interlace strings of lengths {} and {}",
                self.len(),
                even.len()
            )));
        }
        let bits = self
            .bits
            .iter()
            .zip(&even.bits)
            .flat_map(|(&a, &b)| [a, b])
            .collect();
        Ok(Self { bits })
    }

    /// Number of cyclic positions where consecutive bits differ.
    pub fn coef(&self) -> usize {
        coef(self)
    }
}

/// `Σ_i δ_i ⊕ δ_{i+1}` with indices read cyclically.
pub fn coef(delta: &BitString) -> usize {
    let b = delta.bits();
    let len = b.len();
    (0..len).filter(|&i| b[i] != b[(i + 1) % len]).count()
}

// Cyclic change count of a `len`-bit index, `len ≥ 1`.
fn coef_of_index(x: usize, len: usize) -> usize {
    let mask = (1usize << len) - 1;
    let rotated = ((x << 1) | (x >> (len - 1))) & mask;
    (x ^ rotated).count_ones() as usize
}

/// `Φ(L(μ, ν))` on the `2d`-cycle from the closed formula.
pub fn phi_line<F: Field>(field: &F, mu: &F::Elem, nu: &F::Elem, d: usize) -> Result<StateTensor<F>> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    if field.is_zero(mu) && field.is_zero(nu) {
        return Err(Error::InvalidArgument("(mu, nu) must not both vanish".into()));
    }
    let m = 2 * d;
    if m >= usize::BITS as usize - 1 {
        return Err(Error::Overflow("2^(2d) entries".into()));
    }
    let powers: Vec<F::Elem> = (0..=m)
        .map(|c| field.mul(&field.pow(mu, (m - c) as u64), &field.pow(nu, c as u64)))
        .collect();
    let entries = (0..1usize << m)
        .map(|x| powers[coef_of_index(x, m)].clone())
        .collect();
    StateTensor::new(field.clone(), m, 2, entries)
}

/// Draws `(μ, ν)` with both nonzero and `μ ≠ ±ν`.
pub fn sample_line_point<F: Field, R: Rng + ?Sized>(field: &F, rng: &mut R) -> (F::Elem, F::Elem) {
    loop {
        let mu = field.random(rng);
        let nu = field.random(rng);
        if field.is_zero(&mu)
            || field.is_zero(&nu)
            || field.eq(&mu, &nu)
            || field.eq(&mu, &field.neg(&nu))
        {
            continue;
        }
        return (mu, nu);
    }
}

/// `K_S` as a signed sparse vector indexed by the odd-slot string `η`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelVector {
    pub d: usize,
    /// 1-based odd positions, ascending.
    pub s: Vec<usize>,
    /// `(η as a linear index, sign)`, sorted by index.
    pub coefficients: Vec<(usize, i8)>,
}

impl KernelVector {
    pub fn support_size(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, eta: &BitString) -> i8 {
        let idx = eta.to_index();
        self.coefficients
            .binary_search_by_key(&idx, |&(i, _)| i)
            .map(|k| self.coefficients[k].1)
            .unwrap_or(0)
    }

    pub fn to_dense<F: Field>(&self, field: &F) -> Vec<F::Elem> {
        let mut v = vec![field.zero(); 1 << self.d];
        for &(i, sign) in &self.coefficients {
            v[i] = field.from_i64(sign as i64);
        }
        v
    }
}

fn slots_of(d: usize, s: &[usize]) -> Result<Vec<usize>> {
    if s.is_empty() || s.len() % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "S must be nonempty of even size, got {} positions",
            s.len()
        )));
    }
    let mut slots = Vec::with_capacity(s.len());
    for &pos in s {
        if pos == 0 || pos > 2 * d || pos % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "position {pos} is not an odd position of the {}-cycle",
                2 * d
            )));
        }
        slots.push((pos - 1) / 2);
    }
    slots.sort_unstable();
    if slots.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("S has repeated positions".into()));
    }
    Ok(slots)
}

/// Builds `K_S`; `s` lists odd positions in any order.
pub fn kernel_vector_ks(d: usize, s: &[usize]) -> Result<KernelVector> {
    let slots = slots_of(d, s)?;
    let free: Vec<usize> = (0..d).filter(|j| !slots.contains(j)).collect();
    let mut coefficients = Vec::with_capacity(2 << free.len());
    for t in 0..2u8 {
        for free_bits in 0..1usize << free.len() {
            let mut bits = vec![0u8; d];
            for (k, &j) in slots.iter().enumerate() {
                bits[j] = t ^ (k % 2) as u8;
            }
            for (k, &j) in free.iter().enumerate() {
                bits[j] = ((free_bits >> k) & 1) as u8;
            }
            let sign = if (t as u32 + free_bits.count_ones()).is_multiple_of(2) { 1 } else { -1 };
            coefficients.push((BitString { bits }.to_index(), sign));
        }
    }
    coefficients.sort_unstable();
    Ok(KernelVector {
        d,
        s: slots.iter().map(|j| 2 * j + 1).collect(),
        coefficients,
    })
}

/// Every admissible `S` (nonempty, even size) as ascending odd positions.
pub fn admissible_sets(d: usize) -> Vec<Vec<usize>> {
    (1usize..1 << d)
        .filter(|mask| mask.count_ones() % 2 == 0)
        .map(|mask| (0..d).filter(|j| mask >> j & 1 == 1).map(|j| 2 * j + 1).collect())
        .collect()
}

/// The sign-reversing, coef-preserving pairing on the support of `K_S` for
/// a fixed even-slot string `ε`. If some free slot sits between unequal
/// even neighbours its bit is flipped (the first such slot); otherwise the
/// alternating pattern on `S` is swapped.
pub fn involution(d: usize, s: &[usize], eps: &BitString, eta: &BitString) -> Result<BitString> {
    let slots = slots_of(d, s)?;
    if eps.len() != d || eta.len() != d {
        return Err(Error::Dimension("η and ε must have length d".into()));
    }
    let e = eps.bits();
    // odd slot j lies between even slots j-1 (cyclically) and j
    let unbalanced = (0..d)
        .filter(|j| !slots.contains(j))
        .find(|&j| e[(j + d - 1) % d] != e[j]);
    Ok(match unbalanced {
        Some(j) => eta.flipped(j),
        None => {
            let mut out = eta.clone();
            for &j in &slots {
                out = out.flipped(j);
            }
            out
        }
    })
}

/// Precomputed odd/even flattening of `Φ(L(μ, ν))` for checking many `K_S`.
pub struct KernelVerifier<F: Field> {
    field: F,
    d: usize,
    flattening: Matrix<F>,
}

impl<F: Field> KernelVerifier<F> {
    /// Builds the flattening from the closed formula and from contracting
    /// `L(μ, ν)`, and fails unless the two agree entrywise.
    pub fn new(field: &F, d: usize, mu: &F::Elem, nu: &F::Elem) -> Result<Self> {
        if !field.is_exact() {
            return Err(Error::InexactRing(field.ring().to_string()));
        }
        let part = Partition::odd_even(2 * d)?;
        let formula = phi_line(field, mu, nu, d)?.flatten(&part)?;
        let contracted = contract_cycle(&line_tensor(field, mu, nu)?, 2 * d)?.flatten(&part)?;
        let agree = formula
            .entries()
            .iter()
            .zip(contracted.entries())
            .all(|(a, b)| field.eq(a, b));
        if !agree {
            return Err(Error::Inconsistent(format!(
                "closed form and contraction of the line tensor differ at d = {d}"
            )));
        }
        Ok(Self {
            field: field.clone(),
            d,
            flattening: formula,
        })
    }

    pub fn flattening(&self) -> &Matrix<F> {
        &self.flattening
    }

    /// Whether `v` (indexed by odd-slot strings) is annihilated.
    pub fn annihilates(&self, v: &[F::Elem]) -> Result<bool> {
        Ok(self
            .flattening
            .vec_mul(v)?
            .iter()
            .all(|x| self.field.is_zero(x)))
    }

    pub fn verify(&self, k: &KernelVector) -> Result<bool> {
        if k.d != self.d {
            return Err(Error::Dimension(format!("K_S has d = {}, expected {}", k.d, self.d)));
        }
        self.annihilates(&k.to_dense(&self.field))
    }

    pub fn verify_all(&self) -> Result<bool> {
        admissible_sets(self.d)
            .par_iter()
            .map(|s| self.verify(&kernel_vector_ks(self.d, s)?))
            .try_reduce(|| true, |a, b| Ok(a && b))
    }
}

/// Whether `K_S` lies in the kernel of the odd/even flattening of
/// `Φ(L(μ, ν))`.
pub fn verify_kernel<F: Field>(field: &F, d: usize, mu: &F::Elem, nu: &F::Elem, s: &[usize]) -> Result<bool> {
    KernelVerifier::new(field, d, mu, nu)?.verify(&kernel_vector_ks(d, s)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelSpan {
    /// `dim span{K_S : 1 ∈ S}`.
    pub containing_first: usize,
    /// `dim span{K_S}` over all admissible `S`.
    pub all: usize,
}

fn span_of<F: Field>(field: &F, d: usize, sets: impl Iterator<Item = Vec<usize>>) -> Result<usize> {
    let vectors = sets
        .map(|s| Ok(kernel_vector_ks(d, &s)?.to_dense(field)))
        .collect::<Result<Vec<_>>>()?;
    if vectors.is_empty() {
        return Ok(0);
    }
    span_dimension(field, &vectors)
}

pub fn kernel_span_dimension_t3<F: Field>(field: &F, d: usize) -> Result<KernelSpan> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    let containing_first = span_of(field, d, admissible_sets(d).into_iter().filter(|s| s[0] == 1))?;
    let all = span_of(field, d, admissible_sets(d).into_iter())?;
    Ok(KernelSpan {
        containing_first,
        all,
    })
}

/// Dimensions of the pieces of `span{K_S : 1 ∈ S}` split by whether `3 ∈ S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelSplit {
    pub with_three: usize,
    pub without_three: usize,
    pub combined: usize,
}

pub fn kernel_split_dimensions<F: Field>(field: &F, d: usize) -> Result<KernelSplit> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("need d >= 3, got {d}")));
    }
    let first: Vec<Vec<usize>> = admissible_sets(d).into_iter().filter(|s| s[0] == 1).collect();
    let with_three = span_of(field, d, first.iter().filter(|s| s.contains(&3)).cloned())?;
    let without_three = span_of(field, d, first.iter().filter(|s| !s.contains(&3)).cloned())?;
    let combined = span_of(field, d, first.into_iter())?;
    Ok(KernelSplit {
        with_three,
        without_three,
        combined,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem3Report {
    pub d: usize,
    pub bound: u64,
    pub qmc: u64,
    pub qmf_observed: usize,
    pub kernel_span: usize,
    #[serde(rename = "all_KS_verified")]
    pub all_ks_verified: bool,
    pub within_bound: bool,
    /// Observed rank equals the bound; consistent with, not a proof of,
    /// tightness.
    pub tight: bool,
}

/// Number of random `(μ, ν)` used to check the kernel vectors in a report.
pub const LINE_POINTS: usize = 5;

pub fn theorem3_report<F: Field>(field: &F, d: usize, trials: usize, seed: u64) -> Result<Theorem3Report> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    if d > 30 {
        return Err(Error::Overflow(format!("2^{d}")));
    }
    let part = Partition::odd_even(2 * d)?;
    let bound = 3u64 << (d - 2);
    let cut = qmc(2 * d, 2, 2, &part)?.qmc;
    let qmc_value = u64::try_from(&cut).map_err(|_| Error::Overflow("min-cut value".into()))?;
    let qmf_observed = qmf_estimate(field, 2 * d, 2, 2, &part, trials, seed)?.max_rank_observed;
    let kernel_span = kernel_span_dimension_t3(field, d)?.containing_first;
    let mut rng = trial_rng(seed, trials);
    let mut all_ks_verified = true;
    for _ in 0..LINE_POINTS {
        let (mu, nu) = sample_line_point(field, &mut rng);
        all_ks_verified &= KernelVerifier::new(field, d, &mu, &nu)?.verify_all()?;
    }
    Ok(Theorem3Report {
        d,
        bound,
        qmc: qmc_value,
        qmf_observed,
        kernel_span,
        all_ks_verified,
        within_bound: qmf_observed as u64 <= bound,
        tight: qmf_observed as u64 == bound,
    })
}

/// Dimension of the span of `Φ(L(μ_i, ν_i))` over `samples` random points.
pub fn rational_curve_span<F: Field>(field: &F, d: usize, samples: usize, seed: u64) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    if samples < d + 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples, got {samples}",
            d + 2
        )));
    }
    let mut rng = trial_rng(seed, 0);
    let mut points: Vec<(F::Elem, F::Elem)> = Vec::with_capacity(samples);
    while points.len() < samples {
        let (mu, nu) = sample_line_point(field, &mut rng);
        // distinct projective points: μ_i ν_j ≠ μ_j ν_i
        if points
            .iter()
            .all(|(a, b)| !field.eq(&field.mul(a, &nu), &field.mul(&mu, b)))
        {
            points.push((mu, nu));
        }
    }
    let states = points
        .iter()
        .map(|(mu, nu)| Ok(phi_line(field, mu, nu, d)?.into_entries()))
        .collect::<Result<Vec<_>>>()?;
    span_dimension(field, &states)
}
