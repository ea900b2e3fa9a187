//! Exact integer counting helpers.

use num_integer::Integer;

use crate::error::{Error, Result};

pub(crate) fn checked_pow(base: u128, exp: u32, what: &str) -> Result<u128> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::Overflow(what.to_string()))
}

/// Dimension of the cyclically invariant subspace of `(C^N)^{⊗m}`, i.e. the
/// number of `N`-ary necklaces of length `m`: `(1/m) Σ_{k=1}^{m} N^{gcd(m,k)}`.
pub fn necklace_count(m: usize, n: usize) -> Result<u128> {
    if m == 0 {
        return Err(Error::InvalidArgument("necklace length must be positive".into()));
    }
    let mut total: u128 = 0;
    for k in 1..=m {
        let term = checked_pow(n as u128, m.gcd(&k) as u32, "necklace count")?;
        total = total
            .checked_add(term)
            .ok_or_else(|| Error::Overflow("necklace count".into()))?;
    }
    debug_assert_eq!(total % m as u128, 0);
    Ok(total / m as u128)
}

/// `N^k` for the dimensions used throughout the crate, as `usize`.
pub fn dim_pow(n: usize, k: usize) -> Result<usize> {
    n.checked_pow(k as u32)
        .ok_or_else(|| Error::Overflow(format!("{n}^{k}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    // Orbit counting by canonical rotation, independent of the gcd formula.
    fn brute_necklaces(m: usize, n: usize) -> u128 {
        let mut seen = HashSet::new();
        let total = n.pow(m as u32);
        for idx in 0..total {
            let digits: Vec<usize> = (0..m).map(|i| idx / n.pow((m - 1 - i) as u32) % n).collect();
            let canon = (0..m)
                .map(|r| {
                    let mut d = digits.clone();
                    d.rotate_left(r);
                    d
                })
                .min()
                .unwrap();
            seen.insert(canon);
        }
        seen.len() as u128
    }

    #[test]
    fn matches_orbit_enumeration() {
        for m in 1..=6 {
            for n in 1..=4 {
                assert_eq!(necklace_count(m, n).unwrap(), brute_necklaces(m, n), "m={m} n={n}");
            }
        }
        assert_eq!(necklace_count(2, 2).unwrap(), 3);
        assert_eq!(necklace_count(4, 4).unwrap(), 70);
    }

    #[test]
    fn rejects_zero_and_overflow() {
        assert!(necklace_count(0, 3).is_err());
        assert!(matches!(necklace_count(200, 10), Err(Error::Overflow(_))));
    }
}
