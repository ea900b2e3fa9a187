//! Cyclic-shift eigenspaces of `A^{⊗d}` and the block structure they force on
//! the odd/even flattening of a `Z_{2d}`-invariant state.
//!
//! Write `σ` for the shift `(x_1, …, x_d) ↦ (x_2, …, x_d, x_1)` of
//! multi-indices and `P e_x = e_{σ(x)}` for the induced operator. For a
//! `d`-th root of unity `z` and an orbit with representative `x` and period
//! `q`, the vector `Σ_{r<q} z^{-r} e_{σ^r x}` lies in `V_z = ker(P - z)` and is
//! nonzero iff `z^q = 1`; these orbit sums form a basis of `V_z`. Their dual
//! vectors `(1/q) Σ_{r<q} z^r e_{σ^r x}` extract coefficients.
//!
//! Invariance under the double shift puts the state in `⊕_z V_z ⊗ V_{z̄}`,
//! and invariance under the single shift makes the `V_1` block symmetric
//! and the `V_{-1}` block skew-symmetric. An odd `dim V_{-1}` therefore
//! forces a rank defect.

use num_integer::Integer;
use serde::Serialize;

use crate::counting::{checked_pow, dim_pow};
use crate::error::{Error, Result};
use crate::mps::{Partition, StateTensor};
use crate::scalars::{Field, Matrix};

/// Cyclic orbit of a multi-index under `σ`; `members[r] = σ^r(members[0])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub members: Vec<usize>,
}

impl Orbit {
    pub fn representative(&self) -> usize {
        self.members[0]
    }
    pub fn period(&self) -> usize {
        self.members.len()
    }
}

/// `σ` on linear indices (first digit most significant).
pub fn rotate_index(x: usize, d: usize, big_n: usize) -> usize {
    let high = big_n.pow((d - 1) as u32);
    (x % high) * big_n + x / high
}

/// All orbits of `σ` on `[N]^d`, ordered by smallest member, which is also
/// the representative.
pub fn shift_orbits(d: usize, big_n: usize) -> Result<Vec<Orbit>> {
    if d == 0 || big_n == 0 {
        return Err(Error::InvalidArgument("d and N must be positive".into()));
    }
    let total = dim_pow(big_n, d)?;
    let mut seen = vec![false; total];
    let mut orbits = Vec::new();
    for x in 0..total {
        if seen[x] {
            continue;
        }
        let mut members = vec![x];
        seen[x] = true;
        let mut y = rotate_index(x, d, big_n);
        while y != x {
            seen[y] = true;
            members.push(y);
            y = rotate_index(y, d, big_n);
        }
        orbits.push(Orbit { members });
    }
    Ok(orbits)
}

fn orbit_admits(z_exponent: usize, period: usize, d: usize) -> bool {
    (z_exponent * period).is_multiple_of(d)
}

fn root<F: Field>(field: &F, d: usize) -> Result<F::Elem> {
    field
        .root_of_unity(d)
        .ok_or_else(|| Error::MissingRootOfUnity {
            ring: field.ring().to_string(),
            order: d,
        })
}

/// Basis of `V_z`, `z = ω^{z_exponent}` for the field's primitive `d`-th root
/// `ω`, as dense vectors of length `N^d`.
pub fn eigenspace_basis<F: Field>(
    field: &F,
    d: usize,
    big_n: usize,
    z_exponent: i64,
) -> Result<Vec<Vec<F::Elem>>> {
    let omega = root(field, d)?;
    let e = z_exponent.rem_euclid(d as i64) as usize;
    let z_inv = field
        .inv(&field.pow(&omega, e as u64))
        .expect("roots of unity are invertible");
    let total = dim_pow(big_n, d)?;
    let basis = shift_orbits(d, big_n)?
        .into_iter()
        .filter(|o| orbit_admits(e, o.period(), d))
        .map(|o| {
            let mut v = vec![field.zero(); total];
            let mut w = field.one();
            for &x in &o.members {
                v[x] = w.clone();
                w = field.mul(&w, &z_inv);
            }
            v
        })
        .collect();
    Ok(basis)
}

/// `A^{⊗d} = ⊕_z V_z`, blocks ordered by exponent.
#[derive(Debug, Clone)]
pub struct EigenspaceDecomposition<F: Field> {
    pub d: usize,
    pub physical_dim: usize,
    pub blocks: Vec<(usize, Vec<Vec<F::Elem>>)>,
}

impl<F: Field> EigenspaceDecomposition<F> {
    pub fn new(field: &F, d: usize, big_n: usize) -> Result<Self> {
        let blocks = (0..d)
            .map(|e| Ok((e, eigenspace_basis(field, d, big_n, e as i64)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            physical_dim: big_n,
            blocks,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|(_, b)| b.len()).sum()
    }
}

/// `dim V_{-1} = (1/d) Σ_{k=1}^{d} (-1)^k N^{gcd(d,k)}` for even `d`.
pub fn sign_multiplicity_character(d: usize, big_n: usize) -> Result<u128> {
    if d == 0 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "the sign character needs an even cycle length, got d = {d}"
        )));
    }
    let mut total: i128 = 0;
    for k in 1..=d {
        let term = checked_pow(big_n as u128, d.gcd(&k) as u32, "sign character")? as i128;
        total += if k % 2 == 0 { term } else { -term };
    }
    debug_assert_eq!(total % d as i128, 0);
    Ok((total / d as i128) as u128)
}

/// Closed form `(1/(2a+1)) Σ_{b=1}^{2a+1} C(N^{gcd(2a+1,b)}, 2)` for
/// `d = 2(2a+1)`.
pub fn sign_multiplicity_formula(d: usize, big_n: usize) -> Result<u128> {
    if d % 4 != 2 {
        return Err(Error::InvalidArgument(format!(
            "closed form holds for d ≡ 2 (mod 4), got d = {d}"
        )));
    }
    let c = d / 2;
    let mut total: u128 = 0;
    for b in 1..=c {
        let x = checked_pow(big_n as u128, c.gcd(&b) as u32, "sign multiplicity")?;
        let binom = x
            .checked_mul(x.saturating_sub(1))
            .ok_or_else(|| Error::Overflow("sign multiplicity".into()))?
            / 2;
        total = total
            .checked_add(binom)
            .ok_or_else(|| Error::Overflow("sign multiplicity".into()))?;
    }
    debug_assert_eq!(total % c as u128, 0);
    Ok(total / c as u128)
}

/// Upper bound on `QMF'(C_{2d}, (odd, even), N)`: `N^d - 1` when
/// `dim V_{-1}` is odd (the skew block loses a rank), `N^d` otherwise.
pub fn qmf_upper_bound_parity(d: usize, big_n: usize) -> Result<u128> {
    if d == 0 || d % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "parity bound needs an even half-length, got d = {d}"
        )));
    }
    let full = checked_pow(big_n as u128, d as u32, "parity bound")?;
    if sign_multiplicity_character(d, big_n)? % 2 == 1 {
        Ok(full - 1)
    } else {
        Ok(full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockStructure {
    Symmetric,
    Skew,
    Generic,
}

/// The block pairing `V_z` (odd side) with `V_{z̄}` (even side).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockInfo {
    pub z_exponent: usize,
    pub dim: usize,
    pub rank: usize,
    pub structure: BlockStructure,
    /// Whether the block is (skew-)symmetric as its `structure` demands;
    /// always true for generic blocks.
    pub structure_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub physical_dim: usize,
    pub blocks: Vec<BlockInfo>,
    pub cross_blocks_zero: bool,
    pub total_rank: usize,
    pub block_rank_sum: usize,
}

impl BlockReport {
    pub fn all_checks_pass(&self) -> bool {
        self.cross_blocks_zero
            && self.blocks.iter().all(|b| b.structure_holds)
            && self.total_rank == self.block_rank_sum
    }

    pub fn block(&self, z_exponent: usize) -> Option<&BlockInfo> {
        self.blocks.iter().find(|b| b.z_exponent == z_exponent)
    }
}

// Sparse dual vector: (linear index, coefficient) pairs.
type DualVector<E> = Vec<(usize, E)>;

/// Rewrites the odd/even flattening of a `Z_{2d}`-invariant state in the
/// orbit-sum bases of the eigenspaces on both sides and checks the block
/// structure. Rows and columns of each block use the same orbit list.
pub fn block_structure_report<F: Field>(field: &F, state: &StateTensor<F>) -> Result<BlockReport> {
    let m = state.sites();
    if m % 2 == 1 || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "block analysis needs an even cycle, got m = {m}"
        )));
    }
    if !field.is_exact() {
        return Err(Error::InexactRing(field.ring().to_string()));
    }
    let d = m / 2;
    let big_n = state.physical_dim();
    let omega = root(field, d)?;
    if let Some(shift) = state.first_non_invariant_shift() {
        return Err(Error::NotInvariant { shift });
    }
    let flat = state.flatten(&Partition::odd_even(m)?)?;
    let orbits = shift_orbits(d, big_n)?;

    let duals: Vec<Vec<DualVector<F::Elem>>> = (0..d)
        .map(|e| {
            let z = field.pow(&omega, e as u64);
            orbits
                .iter()
                .filter(|o| orbit_admits(e, o.period(), d))
                .map(|o| {
                    let scale = field
                        .inv(&field.from_i64(o.period() as i64))
                        .expect("orbit period is invertible in the field");
                    let mut w = scale;
                    o.members
                        .iter()
                        .map(|&x| {
                            let c = w.clone();
                            w = field.mul(&w, &z);
                            (x, c)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let coefficient = |u: &DualVector<F::Elem>, v: &DualVector<F::Elem>| {
        let mut acc = field.zero();
        for (x, cx) in u {
            for (y, cy) in v {
                let t = field.mul(cx, &field.mul(flat.get(*x, *y), cy));
                acc = field.add(&acc, &t);
            }
        }
        acc
    };
    let block_matrix = |row: usize, col: usize| -> Vec<Vec<F::Elem>> {
        duals[row]
            .iter()
            .map(|u| duals[col].iter().map(|v| coefficient(u, v)).collect())
            .collect()
    };

    let mut cross_blocks_zero = true;
    let mut blocks = Vec::with_capacity(d);
    for row in 0..d {
        for col in 0..d {
            if (row + col) % d == 0 {
                continue;
            }
            if duals[row].is_empty() || duals[col].is_empty() {
                continue;
            }
            if block_matrix(row, col)
                .iter()
                .flatten()
                .any(|x| !field.is_zero(x))
            {
                cross_blocks_zero = false;
            }
        }
        let col = (d - row) % d;
        let dim = duals[row].len();
        let block = block_matrix(row, col);
        let structure = if row == 0 {
            BlockStructure::Symmetric
        } else if 2 * row == d {
            BlockStructure::Skew
        } else {
            BlockStructure::Generic
        };
        let structure_holds = match structure {
            BlockStructure::Generic => true,
            BlockStructure::Symmetric => (0..dim)
                .all(|i| (0..dim).all(|j| field.eq(&block[i][j], &block[j][i]))),
            BlockStructure::Skew => (0..dim)
                .all(|i| (0..dim).all(|j| field.eq(&block[i][j], &field.neg(&block[j][i])))),
        };
        let rank = if dim == 0 {
            0
        } else {
            Matrix::from_rows(field.clone(), &block)?.rank()?
        };
        blocks.push(BlockInfo {
            z_exponent: row,
            dim,
            rank,
            structure,
            structure_holds,
        });
    }
    let total_rank = flat.rank()?;
    let block_rank_sum = blocks.iter().map(|b| b.rank).sum();
    Ok(BlockReport {
        d,
        physical_dim: big_n,
        blocks,
        cross_blocks_zero,
        total_rank,
        block_rank_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{contract_cycle, SiteTensor};
    use crate::qflow::imm_tensor;
    use crate::scalars::{PrimeField, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Dense oracle: dim ker(P - z) over a field with the right roots.
    fn dense_eigenspace_dim(field: &PrimeField, d: usize, big_n: usize, e: usize) -> usize {
        let total = big_n.pow(d as u32);
        let z = field.pow(&field.root_of_unity(d).unwrap(), e as u64);
        let mut m = Matrix::zeros(*field, total, total).unwrap();
        for x in 0..total {
            // column x of P has a one in row σ(x)
            let y = rotate_index(x, d, big_n);
            m.set(y, x, field.add(m.get(y, x), &1));
            m.set(x, x, field.sub(m.get(x, x), &z));
        }
        total - m.rank().unwrap()
    }

    #[test]
    fn eigenspace_examples() {
        let f = PrimeField::with_roots_of_unity(4);
        assert_eq!(eigenspace_basis(&f, 2, 2, 0).unwrap().len(), 3);
        assert_eq!(eigenspace_basis(&f, 2, 2, 1).unwrap().len(), 1);
        assert_eq!(eigenspace_basis(&f, 2, 2, -1).unwrap().len(), 1);
        let f3 = PrimeField::with_roots_of_unity(6);
        let dims: Vec<usize> = (0..3)
            .map(|e| eigenspace_basis(&f3, 3, 2, e).unwrap().len())
            .collect();
        assert_eq!(dims.iter().sum::<usize>(), 8);
        assert!(matches!(
            eigenspace_basis(&PrimeField::new(7).unwrap(), 4, 2, 1),
            Err(Error::MissingRootOfUnity { order: 4, .. })
        ));
        // rationals carry square roots of unity only
        assert_eq!(eigenspace_basis(&Rationals, 2, 3, 1).unwrap().len(), 3);
    }

    #[test]
    fn eigenvectors_satisfy_the_eigen_equation() {
        for d in 1..=4 {
            let f = PrimeField::with_roots_of_unity(d);
            let omega = f.root_of_unity(d).unwrap();
            for big_n in 1..=3 {
                for e in 0..d {
                    let z = f.pow(&omega, e as u64);
                    let basis = eigenspace_basis(&f, d, big_n, e as i64).unwrap();
                    for v in &basis {
                        let mut pv = vec![0; v.len()];
                        for (x, c) in v.iter().enumerate() {
                            pv[rotate_index(x, d, big_n)] = *c;
                        }
                        let zv: Vec<u64> = v.iter().map(|c| f.mul(c, &z)).collect();
                        assert_eq!(pv, zv);
                    }
                    assert_eq!(basis.len(), dense_eigenspace_dim(&f, d, big_n, e));
                }
            }
        }
    }

    #[test]
    fn decomposition_is_complete() {
        for d in 1..=5 {
            let f = PrimeField::with_roots_of_unity(d);
            for big_n in 1..=3 {
                let dec = EigenspaceDecomposition::new(&f, d, big_n).unwrap();
                assert_eq!(dec.total_dim(), big_n.pow(d as u32));
                let all: Vec<Vec<u64>> = dec.blocks.iter().flat_map(|(_, b)| b.clone()).collect();
                assert_eq!(crate::scalars::span_dimension(&f, &all).unwrap(), all.len());
            }
        }
    }

    #[test]
    fn sign_multiplicity_examples() {
        assert_eq!(sign_multiplicity_character(2, 2).unwrap(), 1);
        assert_eq!(sign_multiplicity_character(6, 2).unwrap(), 10);
        assert_eq!(sign_multiplicity_character(2, 3).unwrap(), 3);
        assert_eq!(sign_multiplicity_formula(2, 4).unwrap(), 6);
        assert_eq!(sign_multiplicity_formula(6, 2).unwrap(), 10);
        assert_eq!(sign_multiplicity_formula(6, 3).unwrap() % 2, 1);
        assert!(sign_multiplicity_character(3, 2).is_err());
        assert!(sign_multiplicity_formula(4, 2).is_err());
        assert!(sign_multiplicity_formula(8, 2).is_err());
    }

    #[test]
    fn character_matches_dense_dimension() {
        for (d, big_n) in [(2, 2), (2, 3), (2, 4), (2, 5), (4, 2), (4, 3), (6, 2), (6, 3)] {
            let f = PrimeField::with_roots_of_unity(d);
            assert_eq!(
                sign_multiplicity_character(d, big_n).unwrap() as usize,
                dense_eigenspace_dim(&f, d, big_n, d / 2),
                "d={d} N={big_n}"
            );
        }
    }

    #[test]
    fn parity_bound_examples() {
        assert_eq!(qmf_upper_bound_parity(2, 2).unwrap(), 3);
        assert_eq!(qmf_upper_bound_parity(2, 3).unwrap(), 8);
        assert_eq!(qmf_upper_bound_parity(2, 4).unwrap(), 16);
        assert_eq!(qmf_upper_bound_parity(2, 5).unwrap(), 25);
        assert_eq!(qmf_upper_bound_parity(6, 3).unwrap(), 728);
        assert_eq!(qmf_upper_bound_parity(2, 1).unwrap(), 1);
        assert!(qmf_upper_bound_parity(3, 2).is_err());
        // mod-4 table for the 4-cycle
        for big_n in 1..=40usize {
            let expected = if big_n % 4 == 2 || big_n % 4 == 3 {
                big_n * big_n - 1
            } else {
                big_n * big_n
            };
            assert_eq!(qmf_upper_bound_parity(2, big_n).unwrap(), expected as u128);
        }
    }

    #[test]
    fn block_report_on_the_four_cycle() {
        let f = PrimeField::with_roots_of_unity(4);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = SiteTensor::random(f, 2, 2, &mut rng).unwrap();
        let r = block_structure_report(&f, &contract_cycle(&t, 4).unwrap()).unwrap();
        assert!(r.all_checks_pass(), "{r:?}");
        assert_eq!((r.block(0).unwrap().rank, r.block(1).unwrap().rank), (3, 0));
        assert_eq!(r.total_rank, 3);

        let t = SiteTensor::random(f, 3, 3, &mut rng).unwrap();
        let r = block_structure_report(&f, &contract_cycle(&t, 4).unwrap()).unwrap();
        assert!(r.all_checks_pass());
        let skew = r.block(1).unwrap();
        assert_eq!(skew.dim, 3);
        assert!(skew.rank <= 2 && skew.rank % 2 == 0);
        assert!(r.total_rank <= 8);

        let s = contract_cycle(&imm_tensor(&f, 2).unwrap(), 4).unwrap();
        let r = block_structure_report(&f, &s).unwrap();
        assert!(r.all_checks_pass());
        assert_eq!(r.total_rank, 16);
        assert_eq!(r.block(1).unwrap().rank, 6);
    }

    #[test]
    fn block_report_errors() {
        let f = PrimeField::with_roots_of_unity(4);
        let entries: Vec<u64> = (0..16).collect();
        let s = StateTensor::new(f, 4, 2, entries).unwrap();
        assert!(matches!(block_structure_report(&f, &s), Err(Error::NotInvariant { shift: 1 })));
        let s = StateTensor::new(f, 3, 2, vec![1; 8]).unwrap();
        assert!(block_structure_report(&f, &s).is_err());
        let f7 = PrimeField::new(7).unwrap();
        let s = StateTensor::new(f7, 8, 2, vec![1; 256]).unwrap();
        assert!(matches!(
            block_structure_report(&f7, &s),
            Err(Error::MissingRootOfUnity { .. })
        ));
    }
}
