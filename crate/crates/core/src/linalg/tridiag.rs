use crate::{Error, Real, Result};

/// Tridiagonal matrix stored by diagonals. `sub[0]` and `sup[n - 1]` are unused
/// and kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal { sub: vec![T::zero(); n], diag: vec![T::zero(); n], sup: vec![T::zero(); n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n);
        t.diag.iter_mut().for_each(|d| *d = T::one());
        t
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[i]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            T::zero()
        }
    }

    /// `a * self + b * other`
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let f = |x: &[T], y: &[T]| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect();
        Tridiagonal { sub: f(&self.sub, &other.sub), diag: f(&self.diag, &other.diag), sup: f(&self.sup, &other.sup) }
    }

    /// `I - coef * self`
    pub fn shifted_identity(&self, coef: T) -> Self {
        Tridiagonal::identity(self.len()).combine(T::one(), self, -coef)
    }

    /// Row `i` applied to the strided line `x[offset + k * stride]`.
    #[inline]
    pub fn row_dot(&self, i: usize, x: &[T], offset: usize, stride: usize) -> T {
        let n = self.len();
        let mut acc = self.diag[i] * x[offset + i * stride];
        if i > 0 {
            acc += self.sub[i] * x[offset + (i - 1) * stride];
        }
        if i + 1 < n {
            acc += self.sup[i] * x[offset + (i + 1) * stride];
        }
        acc
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.len()).map(|i| self.row_dot(i, x, 0, 1)).collect()
    }
}

/// Thomas-algorithm LU factors of a tridiagonal matrix (no pivoting).
#[derive(Clone, Debug)]
pub struct TridiagonalLu<T> {
    lower: Vec<T>,
    inv_pivot: Vec<T>,
    sup: Vec<T>,
}

impl<T: Real> TridiagonalLu<T> {
    pub fn factor(a: &Tridiagonal<T>) -> Result<Self> {
        let n = a.len();
        let mut lower = vec![T::zero(); n];
        let mut inv_pivot = vec![T::zero(); n];
        let mut pivot = T::zero();
        for i in 0..n {
            pivot = if i == 0 {
                a.diag[0]
            } else {
                lower[i] = a.sub[i] * inv_pivot[i - 1];
                a.diag[i] - lower[i] * a.sup[i - 1]
            };
            if pivot == T::zero() || !pivot.is_finite() {
                return Err(Error::SingularMatrix { row: i });
            }
            inv_pivot[i] = pivot.recip();
        }
        let _ = pivot;
        Ok(TridiagonalLu { lower, inv_pivot, sup: a.sup.clone() })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        self.solve_strided(b, 0, 1);
    }

    /// Solves for the strided line `b[offset + k * stride]`, `k = 0..n`.
    pub fn solve_strided(&self, b: &mut [T], offset: usize, stride: usize) {
        let n = self.len();
        for i in 1..n {
            let prev = b[offset + (i - 1) * stride];
            b[offset + i * stride] -= self.lower[i] * prev;
        }
        b[offset + (n - 1) * stride] = b[offset + (n - 1) * stride] * self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            let next = b[offset + (i + 1) * stride];
            b[offset + i * stride] = (b[offset + i * stride] - self.sup[i] * next) * self.inv_pivot[i];
        }
    }

    /// Solves simultaneously for `width` interleaved systems: unknown `k` of
    /// system `p` lives at `b[p + k * width]`. This is the layout of the
    /// second grid direction, where the inner loop runs over contiguous memory.
    pub fn solve_interleaved(&self, b: &mut [T], width: usize) {
        let n = self.len();
        for i in 1..n {
            let l = self.lower[i];
            let (head, tail) = b.split_at_mut(i * width);
            let prev = &head[(i - 1) * width..];
            for (x, &p) in tail[..width].iter_mut().zip(prev) {
                *x -= l * p;
            }
        }
        let last = &mut b[(n - 1) * width..n * width];
        let ip = self.inv_pivot[n - 1];
        last.iter_mut().for_each(|x| *x = *x * ip);
        for i in (0..n - 1).rev() {
            let (head, tail) = b.split_at_mut((i + 1) * width);
            let next = &tail[..width];
            let (c, ip) = (self.sup[i], self.inv_pivot[i]);
            for (x, &q) in head[i * width..].iter_mut().zip(next) {
                *x = (*x - c * q) * ip;
            }
        }
    }
}
