//! Quantum max-flow `QMF'` by generic sampling, plus the structured site
//! tensors used to probe it.
//!
//! The rank of a flattening of `Φ(T)` is lower semicontinuous in the entries
//! of `T`, so the maximum over `T` is attained on a Zariski-open set. Drawing
//! entries uniformly from a large prime field hits that set with overwhelming
//! probability; every sampled rank is in any case a certified lower bound.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::{contract_cycle, Partition, SiteTensor};
use crate::scalars::{span_dimension, ComplexField, Field, Matrix, ScalarRing};

pub const DEFAULT_TRIALS: usize = 16;

/// Outcome of [`qmf_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmfResult {
    pub m: usize,
    #[serde(rename = "N")]
    pub physical_dim: usize,
    pub n: usize,
    pub partition: Partition,
    pub trials: usize,
    pub seed: u64,
    #[serde(with = "ring_string")]
    pub ring: ScalarRing,
    #[serde(rename = "max_rank")]
    pub max_rank_observed: usize,
    /// rank → number of trials that produced it
    pub histogram: BTreeMap<usize, usize>,
}

mod ring_string {
    use super::ScalarRing;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(r: &ScalarRing, s: S) -> Result<S::Ok, S::Error> {
        r.serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ScalarRing, D::Error> {
        ScalarRing::deserialize(d)
    }
}

/// RNG for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

/// Flattening rank for each of `trials` random site tensors, in trial order.
pub fn qmf_trial_ranks<F: Field>(
    field: &F,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    part: &Partition,
    trials: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if !field.is_exact() {
        return Err(Error::InexactRing(field.ring().to_string()));
    }
    trial_ranks_with(field, m, physical_dim, bond_dim, part, trials, seed, |f| f.rank())
}

#[allow(clippy::too_many_arguments)]
fn trial_ranks_with<F: Field>(
    field: &F,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    part: &Partition,
    trials: usize,
    seed: u64,
    rank: impl Fn(&Matrix<F>) -> Result<usize> + Sync,
) -> Result<Vec<usize>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if part.sites() != m {
        return Err(Error::InvalidPartition(format!(
            "partition has {} sites, cycle has {m}",
            part.sites()
        )));
    }
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let t = SiteTensor::random(field.clone(), physical_dim, bond_dim, &mut rng)?;
            rank(&contract_cycle(&t, m)?.flatten(part)?)
        })
        .collect()
}

fn summarize(
    ring: ScalarRing,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    part: &Partition,
    seed: u64,
    ranks: Vec<usize>,
) -> QmfResult {
    let mut histogram = BTreeMap::new();
    for &r in &ranks {
        *histogram.entry(r).or_insert(0) += 1;
    }
    QmfResult {
        m,
        physical_dim,
        n: bond_dim,
        partition: part.clone(),
        trials: ranks.len(),
        seed,
        ring,
        max_rank_observed: ranks.into_iter().max().unwrap_or(0),
        histogram,
    }
}

/// Largest flattening rank over `trials` generic site tensors.
pub fn qmf_estimate<F: Field>(
    field: &F,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    part: &Partition,
    trials: usize,
    seed: u64,
) -> Result<QmfResult> {
    let ranks = qmf_trial_ranks(field, m, physical_dim, bond_dim, part, trials, seed)?;
    Ok(summarize(field.ring(), m, physical_dim, bond_dim, part, seed, ranks))
}

/// Floating-point variant of [`qmf_estimate`] using SVD ranks with the
/// field's relative tolerance. Advisory only: rounding can hide or invent
/// rank near a defect.
pub fn qmf_estimate_numerical(
    field: &ComplexField,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    part: &Partition,
    trials: usize,
    seed: u64,
) -> Result<QmfResult> {
    let tol = field.tolerance();
    let ranks = trial_ranks_with(field, m, physical_dim, bond_dim, part, trials, seed, |f| {
        f.numerical_rank(Some(tol))
    })?;
    Ok(summarize(field.ring(), m, physical_dim, bond_dim, part, seed, ranks))
}

/// `T = a_1⊗b_1⊗β^1 + ⋯ + a_n⊗b_n⊗β^n`, so that `Φ(T) = Σ_i a_i^{⊗m}`.
pub fn diagonal_tensor<F: Field>(field: &F, physical_dim: usize, bond_dim: usize) -> Result<SiteTensor<F>> {
    if bond_dim > physical_dim {
        return Err(Error::InvalidArgument(format!(
            "diagonal tensor needs n <= N, got n = {bond_dim}, N = {physical_dim}"
        )));
    }
    let mut t = SiteTensor::zeros(field.clone(), physical_dim, bond_dim)?;
    for i in 0..bond_dim {
        t.set(i, i, i, field.one());
    }
    Ok(t)
}

/// `T = Σ_k a_k ⊗ b_k ⊗ β^{k-1}` with `N = n = m` (indices mod `m`); `Φ(T)`
/// is the sum over the cyclic orbit of `a_1 ⊗ a_2 ⊗ ⋯ ⊗ a_m`.
pub fn shift_tensor<F: Field>(field: &F, m: usize) -> Result<SiteTensor<F>> {
    if m < 2 {
        return Err(Error::InvalidArgument("shift tensor needs m >= 2".into()));
    }
    let mut t = SiteTensor::zeros(field.clone(), m, m)?;
    for k in 0..m {
        t.set(k, k, (k + m - 1) % m, field.one());
    }
    Ok(t)
}

/// Site tensor of the iterated `k × k` matrix multiplication network, with
/// `N = n = k²`.
///
/// Physical basis `a^i_j` is index `i·k + j`; bond basis `(l, x)` is index
/// `l·k + x`. The slice for `a^i_j` is `Id_k ⊗ E_{j i}`, so the product around
/// the cycle is nonzero exactly when the upper index of each site equals the
/// lower index of its predecessor, and `Φ(T) = k · IMM^m_k` (the spectator
/// index `l` contributes the factor `k`).
pub fn imm_tensor<F: Field>(field: &F, k: usize) -> Result<SiteTensor<F>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let dim = k * k;
    let mut t = SiteTensor::zeros(field.clone(), dim, dim)?;
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                t.set(i * k + j, l * k + j, l * k + i, field.one());
            }
        }
    }
    Ok(t)
}

/// `L(μ, ν) = μ(a_0⊗b_0⊗β^0 + a_1⊗b_1⊗β^1) + ν(a_0⊗b_0⊗β^1 + a_1⊗b_1⊗β^0)`.
pub fn line_tensor<F: Field>(field: &F, mu: &F::Elem, nu: &F::Elem) -> Result<SiteTensor<F>> {
    let z = field.zero();
    SiteTensor::new(
        field.clone(),
        2,
        2,
        vec![
            vec![mu.clone(), nu.clone(), z.clone(), z.clone()],
            vec![z.clone(), z, nu.clone(), mu.clone()],
        ],
    )
}

/// Dimension of the span of `Φ(T)` over `samples` random site tensors.
pub fn invariant_span_dimension<F: Field>(
    field: &F,
    m: usize,
    physical_dim: usize,
    bond_dim: usize,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let states = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let t = SiteTensor::random(field.clone(), physical_dim, bond_dim, &mut rng)?;
            Ok(contract_cycle(&t, m)?.into_entries())
        })
        .collect::<Result<Vec<_>>>()?;
    span_dimension(field, &states)
}
