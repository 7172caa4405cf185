use num_traits::Float;

use crate::{Error, Real, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored row by
/// row: row `i` holds columns `i - kl ..= i + ku`.
#[derive(Clone, Debug)]
pub struct BandedMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandedMatrix { n, kl, ku, data: vec![T::zero(); n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |k| self.data[k])
    }

    /// Adds `v` to entry `(i, j)`. Panics if the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside band"));
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).fold(T::zero(), |acc, j| acc + self.get(i, j) * x[j])
            })
            .collect()
    }
}

/// LU factorization with partial pivoting of a band matrix (the LAPACK
/// `gbtrf` scheme). Row position `p` keeps a window of columns
/// `p - kl ..= p + kl + ku`; the extra `kl` columns absorb pivoting fill-in.
/// Multipliers stay at the position where they were produced, so the forward
/// solve replays interchanges and eliminations in factorization order.
#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    rows: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Real> BandedLu<T> {
    pub fn factor(a: &BandedMatrix<T>) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let width = 2 * kl + ku + 1;
        let mut rows = vec![T::zero(); n * width];
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n.saturating_sub(1));
            for j in lo..=hi {
                rows[i * width + (j + kl - i)] = a.get(i, j);
            }
        }
        let mut pivots = vec![0usize; n];
        // index of column `j` inside the window of position `p`
        let at = |p: usize, j: usize| p * width + (j + kl - p);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut piv = k;
            let mut best = Float::abs(rows[at(k, k)]);
            for r in k + 1..=last_row {
                let v = Float::abs(rows[at(r, k)]);
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            pivots[k] = piv;
            if best == T::zero() || !best.is_finite() {
                return Err(Error::SingularMatrix { row: k });
            }
            if piv != k {
                for j in k..=last_col {
                    rows.swap(at(k, j), at(piv, j));
                }
            }
            let inv = rows[at(k, k)].recip();
            for r in k + 1..=last_row {
                let f = rows[at(r, k)] * inv;
                rows[at(r, k)] = f;
                if f != T::zero() {
                    for j in k + 1..=last_col {
                        let u = rows[at(k, j)];
                        rows[at(r, j)] -= f * u;
                    }
                }
            }
        }
        Ok(BandedLu { n, kl, ku, width, rows, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        let at = |p: usize, j: usize| p * w + (j + kl - p);
        for k in 0..n {
            let piv = self.pivots[k];
            if piv != k {
                b.swap(k, piv);
            }
            let bk = b[k];
            if bk != T::zero() {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= self.rows[at(r, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.rows[at(k, j)] * b[j];
            }
            b[k] = s / self.rows[at(k, k)];
        }
    }
}
