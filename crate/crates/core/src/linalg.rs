//! Exact linear algebra: an incremental reduced row echelon basis over any
//! supported field, plain modular elimination on `u64` residues, and
//! fraction-free (Bareiss) elimination over the integers for `QQ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::field::{inv_mod, mul_mod, FieldSpec, Scalar};

/// Fully reduced row echelon basis of a row space, grown one row at a time.
/// Pivot entries are 1 and pivot columns are zero in every other basis row,
/// so a single pass reduces any vector against the basis.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: FieldSpec,
    ncols: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new(field: FieldSpec, ncols: usize) -> Self {
        Echelon {
            field,
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows<'a>(
        field: FieldSpec,
        ncols: usize,
        rows: impl IntoIterator<Item = &'a Vec<Scalar>>,
    ) -> Self {
        let mut e = Echelon::new(field, ncols);
        for r in rows {
            e.insert(r.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    /// Residual of `row` after elimination against the basis.
    pub fn reduce(&self, mut row: Vec<Scalar>) -> Vec<Scalar> {
        let f = self.field;
        for (basis, &pc) in self.rows.iter().zip(&self.pivots) {
            if f.is_zero(&row[pc]) {
                continue;
            }
            let factor = row[pc].clone();
            for (x, b) in row.iter_mut().zip(basis) {
                if !f.is_zero(b) {
                    *x = f.sub(x, &f.mul(&factor, b));
                }
            }
        }
        row
    }

    /// True when `row` lies in the row space.
    pub fn contains(&self, row: &[Scalar]) -> bool {
        self.reduce(row.to_vec())
            .iter()
            .all(|x| self.field.is_zero(x))
    }

    /// Adds `row`; returns `true` when the rank went up.
    pub fn insert(&mut self, row: Vec<Scalar>) -> bool {
        assert_eq!(row.len(), self.ncols);
        let f = self.field;
        let mut row = self.reduce(row);
        let Some(pc) = row.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&row[pc]).unwrap();
        for x in row.iter_mut() {
            *x = f.mul(x, &inv);
        }
        for basis in self.rows.iter_mut() {
            if f.is_zero(&basis[pc]) {
                continue;
            }
            let factor = basis[pc].clone();
            for (b, x) in basis.iter_mut().zip(&row) {
                *b = f.sub(b, &f.mul(&factor, x));
            }
        }
        self.rows.push(row);
        self.pivots.push(pc);
        true
    }

    /// Basis of `{v : basis_row . v = 0 for every row}`, one vector per free
    /// column.
    pub fn kernel(&self) -> Vec<Vec<Scalar>> {
        let f = self.field;
        let mut is_pivot = vec![false; self.ncols];
        for &pc in &self.pivots {
            is_pivot[pc] = true;
        }
        (0..self.ncols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.ncols];
                v[free] = f.one();
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    v[pc] = f.neg(&row[free]);
                }
                v
            })
            .collect()
    }
}

/// Row rank of a matrix of residues mod `p` by straightforward Gaussian
/// elimination. Coded independently of [`Echelon`] so each can check the other.
pub fn rank_mod_p(matrix: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|x| x % p).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(sel) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, sel);
        let inv = inv_mod(m[rank][col], p);
        for x in m[rank].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let factor = m[r][col];
                for c in col..ncols {
                    let sub = mul_mod(factor, m[rank][c], p);
                    m[r][c] = (m[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Clears denominators of a rational row, giving a primitive-free integer row
/// spanning the same line.
pub fn integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Rank of an integer matrix by Bareiss fraction-free elimination. All
/// divisions are exact, so intermediate entries stay bounded by minors.
pub fn bareiss_rank(matrix: &[Vec<BigInt>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = matrix.to_vec();
    let nrows = m.len();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(sel) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, sel);
        let pivot = m[rank][col].clone();
        for r in rank + 1..nrows {
            let lead = m[r][col].clone();
            for c in col..ncols {
                let v = (&pivot * &m[r][c] - &lead * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// For each row, whether it raises the rank of the rows before it. Integer
/// rows are eliminated by cross-multiplication with content removal, so no
/// fractions ever appear.
pub fn fraction_free_profile(matrix: &[Vec<BigInt>]) -> Vec<bool> {
    let mut basis: Vec<(usize, Vec<BigInt>)> = Vec::new();
    let mut out = Vec::with_capacity(matrix.len());
    for row in matrix {
        let mut r = row.clone();
        for (pc, b) in &basis {
            if r[*pc].is_zero() {
                continue;
            }
            let a = b[*pc].clone();
            let lead = r[*pc].clone();
            for (x, y) in r.iter_mut().zip(b) {
                *x = &a * &*x - &lead * y;
            }
            let content = r.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
            if !content.is_zero() && !content.is_one() {
                for x in r.iter_mut() {
                    *x = &*x / &content;
                }
            }
        }
        match r.iter().position(|x| !x.is_zero()) {
            Some(pc) => {
                if r[pc].is_negative() {
                    r.iter_mut().for_each(|x| *x = -&*x);
                }
                let at = basis.partition_point(|(c, _)| *c < pc);
                basis.insert(at, (pc, r));
                out.push(true);
            }
            None => out.push(false),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_scalars(f: FieldSpec, rows: &[Vec<i64>]) -> Vec<Vec<Scalar>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| f.from_i64(x)).collect())
            .collect()
    }

    #[test]
    fn echelon_rank_and_kernel() {
        let f = FieldSpec::prime(7).unwrap();
        let rows = to_scalars(f, &[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        let e = Echelon::from_rows(f, 3, &rows);
        assert_eq!(e.rank(), 2);
        let k = e.kernel();
        assert_eq!(k.len(), 1);
        for r in &rows {
            let dot = r
                .iter()
                .zip(&k[0])
                .fold(f.zero(), |a, (x, y)| f.add(&a, &f.mul(x, y)));
            assert!(f.is_zero(&dot));
        }
    }

    #[test]
    fn independent_routines_agree() {
        let rows = vec![
            vec![1i64, 0, 2, 5],
            vec![3, 1, 0, 1],
            vec![4, 1, 2, 6],
            vec![0, 0, 0, 0],
            vec![2, -1, 7, 3],
        ];
        let p = 101;
        let f = FieldSpec::prime(p).unwrap();
        let mod_rows: Vec<Vec<u64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
            .collect();
        let int_rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let e = Echelon::from_rows(f, 4, &to_scalars(f, &rows));
        assert_eq!(e.rank(), 3);
        assert_eq!(rank_mod_p(&mod_rows, p), 3);
        assert_eq!(bareiss_rank(&int_rows), 3);
        assert_eq!(
            fraction_free_profile(&int_rows),
            [true, true, false, false, true]
        );
    }

    #[test]
    fn integer_row_clears_denominators() {
        let row = vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::new((-2).into(), 3.into()),
        ];
        assert_eq!(integer_row(&row), vec![BigInt::from(3), BigInt::from(-4)]);
    }
}
