use std::fmt;
use std::ops::{Index, IndexMut};

use super::Rational;
use crate::error::{Error, Result};

pub type RationalVector = Vec<Rational>;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Output of [`RationalMatrix::rref`].
#[derive(Debug, Clone)]
pub struct Rref {
    pub matrix: RationalMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diag(v: &[Rational]) -> Self {
        let mut m = Self::zeros(v.len(), v.len());
        for (i, x) in v.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Panics when rows have different lengths.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RationalMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> RationalVector {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn diagonal(&self) -> RationalVector {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RationalVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[Rational]) -> Rational {
        assert!(self.is_square() && x.len() == self.rows);
        let mut acc = Rational::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, xj) in x.iter().enumerate() {
                if !xj.is_zero() {
                    acc += &(xi * xj) * &self[(i, j)];
                }
            }
        }
        acc
    }

    /// `x^T M x` for a 0/1 vector given by its support.
    pub fn quadratic_form_support(&self, support: &[usize]) -> Rational {
        let mut acc = Rational::zero();
        for &i in support {
            for &j in support {
                acc += &self[(i, j)];
            }
        }
        acc
    }

    /// `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> RationalMatrix {
        assert!(self.is_square());
        let half = Rational::new(1, 2);
        Self::from_fn(self.rows, self.cols, |i, j| {
            &(&self[(i, j)] + &self[(j, i)]) * &half
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `S + S^T = 0`.
    pub fn is_skew_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..=i).all(|j| (&self[(i, j)] + &self[(j, i)]).is_zero()))
    }

    /// Vertically stacks `other` below `self`.
    pub fn stack(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        RationalMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form. Pivot choice is the first nonzero entry of
    /// each column, scanning columns left to right.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                if !m[(r, j)].is_zero() {
                    let v = &m[(r, j)] * &inv;
                    m[(r, j)] = v;
                }
            }
            let pivot_row: Vec<(usize, Rational)> = (c..m.cols)
                .filter(|&j| !m[(r, j)].is_zero())
                .map(|j| (j, m[(r, j)].clone()))
                .collect();
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for (j, v) in &pivot_row {
                    let d = &f * v;
                    m[(i, *j)] -= &d;
                }
            }
            pivots.push(c);
            r += 1;
        }
        let rank = pivots.len();
        Rref {
            matrix: m,
            pivots,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of `{v : Mv = 0}`, one vector per free column of the rref.
    pub fn null_space_basis(&self) -> Vec<RationalVector> {
        let Rref { matrix, pivots, .. } = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    let a = &matrix[(row, free)];
                    if !a.is_zero() {
                        v[p] = -a;
                    }
                }
                v
            })
            .collect()
    }

    /// Solves `x` in `A x = rhs` when a solution exists; `None` otherwise.
    pub fn solve(&self, rhs: &[Rational]) -> Option<RationalVector> {
        assert_eq!(rhs.len(), self.rows);
        let aug = RationalMatrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[i].clone()
            }
        });
        let Rref { matrix, pivots, .. } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = matrix[(row, self.cols)].clone();
        }
        Some(x)
    }
}

/// Forward substitution for a square lower-triangular system.
pub fn solve_lower_triangular(l: &RationalMatrix, rhs: &[Rational]) -> Result<RationalVector> {
    if !l.is_square() || rhs.len() != l.rows() {
        return Err(Error::DimensionMismatch(format!(
            "lower-triangular solve with {}x{} matrix and rhs of length {}",
            l.rows(),
            l.cols(),
            rhs.len()
        )));
    }
    let n = l.rows();
    let mut x: RationalVector = Vec::with_capacity(n);
    for i in 0..n {
        let d = &l[(i, i)];
        if d.is_zero() {
            return Err(Error::ZeroDiagonal(i));
        }
        let mut acc = rhs[i].clone();
        for (j, xj) in x.iter().enumerate() {
            let a = &l[(i, j)];
            if !a.is_zero() && !xj.is_zero() {
                acc -= a * xj;
            }
        }
        x.push(if d == &Rational::one() { acc } else { acc / d });
    }
    Ok(x)
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RationalMatrix {
        RationalMatrix::from_fn(rows, cols, |_, _| {
            // Sparse-ish with small fractions so rank deficiency shows up.
            if rng.gen_bool(0.4) {
                Rational::zero()
            } else {
                Rational::new(rng.gen_range(-3..=3), rng.gen_range(1..=3))
            }
        })
    }

    // Independent rank oracle: the largest k with a nonzero k x k minor,
    // determinants by cofactor expansion.
    fn det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 0 {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for c in 0..n {
            if m[0][c].is_zero() {
                continue;
            }
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
                .collect();
            let term = &m[0][c] * &det(&minor);
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    fn minor_rank(m: &RationalMatrix) -> usize {
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<Rational>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| m[(i, j)].clone()).collect())
                        .collect();
                    if !det(&sub).is_zero() {
                        return k;
                    }
                }
            }
        }
        0
    }

    #[test]
    fn rref_identity() {
        let r = RationalMatrix::identity(2).rref();
        assert_eq!(r.matrix, RationalMatrix::identity(2));
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rref_dependent_rows() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 2], &[2, 4]]);
        let r = m.rref();
        assert_eq!(r.matrix, RationalMatrix::from_i64_rows(&[&[1, 2], &[0, 0]]));
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn rref_rank_matches_minor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 5, 8);
            assert_eq!(m.rref().rank, minor_rank(&m), "{m:?}");
        }
        // Force rank deficiency: third row = first + second.
        let mut m = random_matrix(&mut rng, 5, 8);
        for j in 0..8 {
            m[(2, j)] = &m[(0, j)] + &m[(1, j)];
        }
        assert_eq!(m.rref().rank, minor_rank(&m));
    }

    #[test]
    fn rref_preserves_row_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 5);
            let r = m.rref();
            // Each matrix's rows lie in the other's row space: stacking does
            // not raise the rank.
            assert_eq!(m.stack(&r.matrix).rank(), r.rank);
            assert_eq!(m.rank(), r.rank);
        }
    }

    #[test]
    fn null_space_of_identity_is_trivial() {
        assert!(RationalMatrix::identity(3).null_space_basis().is_empty());
    }

    #[test]
    fn null_space_one_dimensional() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 1]]);
        let basis = m.null_space_basis();
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert_eq!(&v[0] + &v[1], Rational::zero());
        assert!(!v[0].is_zero());
    }

    #[test]
    fn null_space_random_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 6, 10);
            let basis = m.null_space_basis();
            assert_eq!(basis.len(), 10 - m.rref().rank);
            for v in &basis {
                assert!(m.mul_vec(v).iter().all(Rational::is_zero));
            }
            if !basis.is_empty() {
                let b = RationalMatrix::from_rows(basis.clone());
                assert_eq!(b.rank(), basis.len());
            }
        }
    }

    #[test]
    fn lower_triangular_cases() {
        let id = RationalMatrix::identity(3);
        let r = vec![q(4), q(-1), Rational::new(2, 3)];
        assert_eq!(solve_lower_triangular(&id, &r).unwrap(), r);

        let l = RationalMatrix::from_i64_rows(&[&[1, 0], &[1, 1]]);
        assert_eq!(solve_lower_triangular(&l, &[q(2), q(3)]).unwrap(), vec![q(2), q(1)]);

        let bad = RationalMatrix::from_i64_rows(&[&[1, 0], &[1, 0]]);
        assert!(matches!(solve_lower_triangular(&bad, &[q(1), q(1)]), Err(Error::ZeroDiagonal(1))));
    }

    #[test]
    fn lower_triangular_random_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let l = RationalMatrix::from_fn(8, 8, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Equal => Rational::one(),
                std::cmp::Ordering::Greater => Rational::new(rng.gen_range(-5..=5), rng.gen_range(1..=4)),
                std::cmp::Ordering::Less => Rational::zero(),
            });
            let rhs: Vec<Rational> = (0..8).map(|_| q(rng.gen_range(-9..=9))).collect();
            let x = solve_lower_triangular(&l, &rhs).unwrap();
            assert_eq!(l.mul_vec(&x), rhs);
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = RationalMatrix::from_i64_rows(&[&[1, 1], &[2, 2]]);
        assert!(m.solve(&[q(1), q(3)]).is_none());
        let x = m.solve(&[q(1), q(2)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(1), q(2)]);
    }
}
