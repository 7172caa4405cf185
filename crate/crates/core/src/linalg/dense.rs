use num_traits::Float;

use crate::{Error, Real, Result};

/// Small row-major dense matrix, used for oracles and scalar surrogates.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix { n_rows, n_cols, data: vec![T::zero(); n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let data: Vec<T> = rows.into_iter().flat_map(|r| {
            assert_eq!(r.len(), n_cols, "ragged rows");
            r
        }).collect();
        DenseMatrix { n_rows, n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n_cols);
        self.data
            .chunks(self.n_cols.max(1))
            .take(self.n_rows)
            .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a != T::zero() {
                    for j in 0..other.n_cols {
                        out[(i, j)] += a * other[(k, j)];
                    }
                }
            }
        }
        out
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let data = self.data.iter().zip(&other.data).map(|(&x, &y)| a * x + b * y).collect();
        DenseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n_cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Gaussian elimination with partial pivoting.
#[derive(Clone, Debug)]
pub struct DenseLu<T> {
    lu: DenseMatrix<T>,
    pivots: Vec<usize>,
}

impl<T: Real> DenseLu<T> {
    pub fn factor(a: &DenseMatrix<T>) -> Result<Self> {
        assert_eq!(a.n_rows, a.n_cols, "square matrix required");
        let n = a.n_rows;
        let mut lu = a.clone();
        let mut pivots = vec![0; n];
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&p, &q| Float::abs(lu[(p, k)]).partial_cmp(&Float::abs(lu[(q, k)])).unwrap())
                .unwrap();
            if lu[(piv, k)] == T::zero() {
                return Err(Error::SingularMatrix { row: k });
            }
            pivots[k] = piv;
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
            }
            for r in k + 1..n {
                let f = lu[(r, k)] / lu[(k, k)];
                lu[(r, k)] = f;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(r, j)] -= f * u;
                }
            }
        }
        Ok(DenseLu { lu, pivots })
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.pivots.len();
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                b[i] -= l * b[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                b[i] -= u * b[k];
            }
            b[i] = b[i] / self.lu[(i, i)];
        }
    }
}
