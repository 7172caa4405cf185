//! Sparse, banded and tridiagonal linear algebra used by the operators and
//! the implicit stages of the time steppers.

mod banded;
mod csr;
mod dense;
mod tridiag;

pub use banded::{BandedLu, BandedMatrix};
pub use csr::CsrMatrix;
pub use dense::{DenseLu, DenseMatrix};
pub use tridiag::{Tridiagonal, TridiagonalLu};

use crate::Real;

/// `y += a * x`
#[inline]
pub(crate) fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
