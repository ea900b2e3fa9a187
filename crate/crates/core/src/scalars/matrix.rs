use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::field::{ComplexField, Field, PrimeField, Rationals};
use crate::error::{Error, Result};

/// Dense row-major matrix over a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    entries: Vec<F::Elem>,
}

impl<F: Field> Matrix<F> {
    pub fn new(field: F, rows: usize, cols: usize, entries: Vec<F::Elem>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix shape must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(field: F, rows: usize, cols: usize) -> Result<Self> {
        let z = field.zero();
        Self::new(field, rows, cols, vec![z; rows * cols])
    }

    pub fn identity(field: F, n: usize) -> Result<Self> {
        Self::from_fn(field.clone(), n, n, |i, j| {
            if i == j {
                field.one()
            } else {
                field.zero()
            }
        })
    }

    pub fn from_fn(
        field: F,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> F::Elem,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(field, rows, cols, entries)
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_rows(field: F, rows: &[Vec<F::Elem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("rows of unequal length".into()));
        }
        Self::new(field, rows.len(), cols, rows.concat())
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn entries(&self) -> &[F::Elem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        Self {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect())
    }

    /// `v^T · self`.
    pub fn vec_mul(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if f.is_zero(vi) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o = f.add(o, &f.mul(vi, a));
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut entries = vec![f.zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let e = &mut entries[i * other.cols + j];
                    *e = f.add(e, &f.mul(a, other.get(k, j)));
                }
            }
        }
        Self::new(f.clone(), self.rows, other.cols, entries)
    }

    /// Inverse of a square matrix over an exact field, `None` if singular.
    pub fn inverse(&self) -> Result<Option<Self>> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        if !self.field.is_exact() {
            return Err(Error::InexactRing(self.field.ring().to_string()));
        }
        let n = self.rows;
        let f = &self.field;
        let augmented = Self::from_fn(f.clone(), n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                f.one()
            } else {
                f.zero()
            }
        })?;
        let (reduced, pivots) = rref(&augmented);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Ok(None);
        }
        let entries = reduced.iter().flat_map(|r| r[n..].to_vec()).collect();
        Ok(Some(Self::new(f.clone(), n, n, entries)?))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.field.is_zero(e))
    }

    /// Exact rank. Rejects complex floating-point matrices.
    pub fn rank(&self) -> Result<usize> {
        self.field.rank_of(self)
    }

    /// Basis of the right null space `{v : self · v = 0}`.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<F::Elem>>> {
        if !self.field.is_exact() {
            return Err(Error::InexactRing(self.field.ring().to_string()));
        }
        let f = &self.field;
        let (reduced, pivots) = rref(self);
        let mut pivot_row = vec![None; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            pivot_row[c] = Some(r);
        }
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        for free in (0..self.cols).filter(|&c| pivot_row[c].is_none()) {
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = f.neg(&reduced[r][free]);
            }
            basis.push(v);
        }
        Ok(basis)
    }
}

impl Matrix<ComplexField> {
    /// Number of singular values above `tol · σ_max`; `tol` defaults to
    /// `max(rows, cols) · ε`.
    pub fn numerical_rank(&self, tol: Option<f64>) -> Result<usize> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.get(i, j);
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let tol = match tol {
            Some(t) if t.is_finite() && t > 0.0 => t,
            Some(t) => {
                return Err(Error::InvalidArgument(format!(
                    "tolerance must be positive, got {t}"
                )))
            }
            None => self.rows.max(self.cols) as f64 * f64::EPSILON,
        };
        let m = DMatrix::<Complex64>::from_row_slice(self.rows, self.cols, &self.entries);
        let sv = m.singular_values();
        let smax = sv.iter().cloned().fold(0.0f64, f64::max);
        if smax == 0.0 {
            return Ok(0);
        }
        Ok(sv.iter().filter(|&&s| s > tol * smax).count())
    }
}

/// Rank of the matrix whose rows are `vectors`; zero for an empty list.
pub fn span_dimension<F: Field>(field: &F, vectors: &[Vec<F::Elem>]) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    if vectors[0].is_empty() {
        return Ok(0);
    }
    Matrix::from_rows(field.clone(), vectors)?.rank()
}

/// Reduced row echelon form plus pivot columns.
pub(crate) fn rref<F: Field>(m: &Matrix<F>) -> (Vec<Vec<F::Elem>>, Vec<usize>) {
    let f = m.field();
    let mut rows: Vec<Vec<F::Elem>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m.cols() {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !f.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(&rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = f.mul(x, &inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || f.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = f.sub(x, &f.mul(&factor, p));
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub(crate) fn rank_by_elimination<F: Field>(m: &Matrix<F>) -> usize {
    rref(m).1.len()
}

pub(crate) fn rank_mod_p(f: &PrimeField, m: &Matrix<PrimeField>) -> usize {
    let p = f.modulus();
    let cols = m.cols();
    let mut rows: Vec<Vec<u64>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        let Some(piv) = (rank..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = f.inv(&rows[rank][c]).expect("pivot is nonzero");
        for x in rows[rank][c..].iter_mut() {
            *x = *x * inv % p;
        }
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        let eliminate = |row: &mut Vec<u64>| {
            let factor = row[c];
            if factor == 0 {
                return;
            }
            let neg = p - factor;
            for (x, &q) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x = (*x + neg * q) % p;
            }
        };
        if tail.len() * (cols - c) > 1 << 14 {
            tail.par_iter_mut().for_each(eliminate);
        } else {
            tail.iter_mut().for_each(eliminate);
        }
        rank += 1;
    }
    rank
}

/// Fraction-free (Bareiss) elimination after clearing row denominators.
pub(crate) fn rank_bareiss(m: &Matrix<Rationals>) -> usize {
    let mut rows: Vec<Vec<BigInt>> = (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();
    let cols = m.cols();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut() {
            for j in (c + 1)..cols {
                let v = &pivot[c] * &row[j] - &row[c] * &pivot[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot[c].clone();
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp() -> PrimeField {
        PrimeField::mersenne31()
    }

    #[test]
    fn trivial_ranks() {
        assert_eq!(Matrix::identity(fp(), 3).unwrap().rank().unwrap(), 3);
        assert_eq!(Matrix::zeros(fp(), 4, 5).unwrap().rank().unwrap(), 0);
        let q = Rationals;
        let m = Matrix::from_fn(q, 2, 2, |i, j| q.from_i64([[1, 2], [2, 4]][i][j])).unwrap();
        assert_eq!(m.rank().unwrap(), 1);
        let m = Matrix::from_fn(fp(), 2, 2, |i, j| [[1, 2], [2, 4]][i][j]).unwrap();
        assert_eq!(m.rank().unwrap(), 1);
    }

    #[test]
    fn complex_rank_is_rejected() {
        let c = ComplexField::default();
        let m = Matrix::identity(c, 2).unwrap();
        assert!(matches!(m.rank(), Err(Error::InexactRing(_))));
        assert!(m.kernel_basis().is_err());
        assert_eq!(m.numerical_rank(None).unwrap(), 2);
    }

    #[test]
    fn numerical_rank_threshold() {
        let c = ComplexField::default();
        let m = Matrix::from_fn(c, 2, 2, |i, j| {
            if i != j {
                c.zero()
            } else if i == 0 {
                c.one()
            } else {
                Complex64::new(1e-18, 0.0)
            }
        })
        .unwrap();
        assert_eq!(m.numerical_rank(None).unwrap(), 1);
        assert_eq!(Matrix::zeros(c, 3, 2).unwrap().numerical_rank(None).unwrap(), 0);
        let mut bad = Matrix::identity(c, 2).unwrap();
        bad.set(1, 0, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(
            bad.numerical_rank(None),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn kernel_examples() {
        let k = Matrix::zeros(fp(), 2, 3).unwrap().kernel_basis().unwrap();
        assert_eq!(k.len(), 3);
        assert!(Matrix::identity(fp(), 4).unwrap().kernel_basis().unwrap().is_empty());
        let p = fp().modulus();
        let k = Matrix::new(fp(), 1, 2, vec![1, 1]).unwrap().kernel_basis().unwrap();
        assert_eq!(k, vec![vec![p - 1, 1]]);
    }

    #[test]
    fn span_examples() {
        let f = fp();
        assert_eq!(span_dimension(&f, &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap(), 2);
        assert_eq!(span_dimension::<PrimeField>(&f, &[]).unwrap(), 0);
        assert!(span_dimension(&f, &[vec![1, 0], vec![1]]).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(Matrix::new(fp(), 0, 2, vec![]).is_err());
        assert!(Matrix::new(fp(), 2, 2, vec![1, 2, 3]).is_err());
        let m = Matrix::identity(fp(), 2).unwrap();
        assert!(m.mul_vec(&[1, 2, 3]).is_err());
        assert!(m.vec_mul(&[1]).is_err());
    }

    #[test]
    fn rational_and_prime_ranks_agree_on_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Rationals;
        let f = fp();
        let mut discrepancies = 0;
        for trial in 0..1000 {
            // Some samples get duplicated rows so that low ranks occur too.
            let mut ints: Vec<i64> = (0..100).map(|_| rng.gen_range(0..100)).collect();
            if trial % 3 == 0 {
                let (src, dst) = (rng.gen_range(0..10), rng.gen_range(0..10));
                for j in 0..10 {
                    ints[dst * 10 + j] = ints[src * 10 + j];
                }
            }
            let mq = Matrix::new(q, 10, 10, ints.iter().map(|&x| q.from_i64(x)).collect()).unwrap();
            let mp = Matrix::new(f, 10, 10, ints.iter().map(|&x| f.from_i64(x)).collect()).unwrap();
            let (rq, rp) = (mq.rank().unwrap(), mp.rank().unwrap());
            // generic elimination over Q as a third route
            assert_eq!(rq, rank_by_elimination(&mq));
            if rq != rp {
                discrepancies += 1;
                eprintln!("rank discrepancy on sample {trial}: Q={rq}, F_p={rp}");
            }
        }
        assert_eq!(discrepancies, 0);
    }

    #[test]
    fn numerical_rank_matches_exact_rank_of_lifted_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = ComplexField::default();
        let q = Rationals;
        for _ in 0..20 {
            let xs: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
            let mc = Matrix::new(c, 8, 8, xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .unwrap();
            let mq = Matrix::new(q, 8, 8, xs.iter().map(|&x| q.from_f64(x).unwrap()).collect())
                .unwrap();
            assert_eq!(mc.numerical_rank(None).unwrap(), mq.rank().unwrap());
        }
    }

    fn small_int_matrix() -> impl proptest::strategy::Strategy<Value = (usize, usize, Vec<i64>)> {
        use proptest::prelude::*;
        (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), proptest::collection::vec(-3i64..4, r * c))
        })
    }

    proptest::proptest! {
        #[test]
        fn rank_is_transpose_invariant((r, c, xs) in small_int_matrix()) {
            let f = fp();
            let m = Matrix::new(f, r, c, xs.iter().map(|&x| f.from_i64(x)).collect()).unwrap();
            proptest::prop_assert_eq!(m.rank().unwrap(), m.transpose().rank().unwrap());
            let q = Rationals;
            let m = Matrix::new(q, r, c, xs.iter().map(|&x| q.from_i64(x)).collect()).unwrap();
            proptest::prop_assert_eq!(m.rank().unwrap(), m.transpose().rank().unwrap());
        }

        #[test]
        fn kernel_basis_is_independent_and_annihilated((r, c, xs) in small_int_matrix()) {
            let f = fp();
            let m = Matrix::new(f, r, c, xs.iter().map(|&x| f.from_i64(x)).collect()).unwrap();
            let basis = m.kernel_basis().unwrap();
            proptest::prop_assert_eq!(basis.len(), c - m.rank().unwrap());
            proptest::prop_assert_eq!(span_dimension(&f, &basis).unwrap(), basis.len());
            for v in &basis {
                proptest::prop_assert!(m.mul_vec(v).unwrap().iter().all(|x| *x == 0));
            }
            let q = Rationals;
            let m = Matrix::new(q, r, c, xs.iter().map(|&x| q.from_i64(x)).collect()).unwrap();
            for v in m.kernel_basis().unwrap() {
                proptest::prop_assert!(m.mul_vec(&v).unwrap().iter().all(|x| q.is_zero(x)));
            }
        }
    }
}
