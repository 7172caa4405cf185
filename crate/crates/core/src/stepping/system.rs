use crate::error::{Error, Result};
use crate::jump_operator::JumpOperator;
use crate::linalg::{BandedLu, DenseLu, DenseMatrix, TridiagonalLu};
use crate::spatial_operator::{OperatorSet, Which};
use crate::Real;

/// Shape of the matrix behind a factored stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageStructure {
    /// Independent tridiagonal systems, one per grid line.
    Tridiagonal { lines: usize, line_len: usize },
    /// One band matrix with the given lower and upper bandwidths.
    Banded { kl: usize, ku: usize },
    Dense,
}

/// A factored matrix `I - c A` ready for repeated solves.
pub trait StageSolver<T>: Send + Sync {
    fn solve_in_place(&self, b: &mut [T]);
    fn structure(&self) -> StageStructure;
}

/// The semidiscrete system `V' = (A_M + A_1 + A_2 + A_J) V` as seen by the
/// time steppers.
pub trait SplitSystem<T: Real> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = A v` for a part of `A_D`.
    fn apply_part(&self, which: Which, v: &[T], out: &mut [T]) -> Result<()>;

    /// `out = A_J v`.
    fn apply_jump(&self, v: &[T], out: &mut [T]) -> Result<()>;

    /// Factors `I - coef A_D`.
    fn factor_full(&self, coef: T) -> Result<Box<dyn StageSolver<T>>>;

    /// Factors `I - coef A_dir` for `dir` in `{1, 2}`.
    fn factor_direction(&self, dir: usize, coef: T) -> Result<Box<dyn StageSolver<T>>>;
}

/// Finite-difference operators plus the FFT jump operator of one grid.
#[derive(Debug)]
pub struct PideSystem<T: Real> {
    pub ops: OperatorSet<T>,
    pub jump: JumpOperator<T>,
}

impl<T: Real> PideSystem<T> {
    pub fn new(ops: OperatorSet<T>, jump: JumpOperator<T>) -> Result<Self> {
        if ops.len() != jump.len() {
            return Err(Error::LengthMismatch { expected: ops.len(), got: jump.len() });
        }
        Ok(PideSystem { ops, jump })
    }
}

struct BandedStage<T>(BandedLu<T>, usize);

impl<T: Real> StageSolver<T> for BandedStage<T> {
    fn solve_in_place(&self, b: &mut [T]) {
        self.0.solve_in_place(b);
    }

    fn structure(&self) -> StageStructure {
        StageStructure::Banded { kl: self.1, ku: self.1 }
    }
}

struct LineStage<T> {
    lu: TridiagonalLu<T>,
    dir: usize,
    n1: usize,
    lines: usize,
}

impl<T: Real> StageSolver<T> for LineStage<T> {
    fn solve_in_place(&self, b: &mut [T]) {
        if self.dir == 1 {
            b.chunks_exact_mut(self.n1).for_each(|line| self.lu.solve_in_place(line));
        } else {
            self.lu.solve_interleaved(b, self.n1);
        }
    }

    fn structure(&self) -> StageStructure {
        StageStructure::Tridiagonal { lines: self.lines, line_len: self.lu.len() }
    }
}

impl<T: Real> SplitSystem<T> for PideSystem<T> {
    fn len(&self) -> usize {
        self.ops.len()
    }

    fn apply_part(&self, which: Which, v: &[T], out: &mut [T]) -> Result<()> {
        self.ops.apply_into(which, v, out)
    }

    fn apply_jump(&self, v: &[T], out: &mut [T]) -> Result<()> {
        self.jump.apply_into(v, out)
    }

    fn factor_full(&self, coef: T) -> Result<Box<dyn StageSolver<T>>> {
        let a = self.ops.shifted_full_banded(coef);
        let bw = a.bandwidths().0;
        Ok(Box::new(BandedStage(BandedLu::factor(&a)?, bw)))
    }

    fn factor_direction(&self, dir: usize, coef: T) -> Result<Box<dyn StageSolver<T>>> {
        let (m1, m2) = self.ops.dims();
        let lu = TridiagonalLu::factor(&self.ops.direction_block(dir).shifted_identity(coef))?;
        let lines = if dir == 1 { m2 + 1 } else { m1 + 1 };
        Ok(Box::new(LineStage { lu, dir, n1: m1 + 1, lines }))
    }
}

/// A small system with explicit dense parts, for testing schemes.
#[derive(Clone, Debug)]
pub struct DenseSystem<T> {
    pub mixed: DenseMatrix<T>,
    pub dir1: DenseMatrix<T>,
    pub dir2: DenseMatrix<T>,
    pub jump: DenseMatrix<T>,
}

struct DenseStage<T>(DenseLu<T>);

impl<T: Real> StageSolver<T> for DenseStage<T> {
    fn solve_in_place(&self, b: &mut [T]) {
        self.0.solve_in_place(b);
    }

    fn structure(&self) -> StageStructure {
        StageStructure::Dense
    }
}

impl<T: Real> DenseSystem<T> {
    pub fn new(mixed: DenseMatrix<T>, dir1: DenseMatrix<T>, dir2: DenseMatrix<T>, jump: DenseMatrix<T>) -> Result<Self> {
        let n = mixed.n_rows();
        for m in [&mixed, &dir1, &dir2, &jump] {
            if m.n_rows() != n || m.n_cols() != n {
                return Err(Error::LengthMismatch { expected: n, got: m.n_rows().max(m.n_cols()) });
            }
        }
        Ok(DenseSystem { mixed, dir1, dir2, jump })
    }

    /// `A_D = A_M + A_1 + A_2`.
    pub fn full(&self) -> DenseMatrix<T> {
        self.mixed.combine(T::one(), &self.dir1, T::one()).combine(T::one(), &self.dir2, T::one())
    }

    fn shifted(a: &DenseMatrix<T>, coef: T) -> DenseMatrix<T> {
        DenseMatrix::identity(a.n_rows()).combine(T::one(), a, -coef)
    }
}

fn copy_into<T: Copy>(src: Vec<T>, out: &mut [T]) -> Result<()> {
    if src.len() != out.len() {
        return Err(Error::LengthMismatch { expected: src.len(), got: out.len() });
    }
    out.copy_from_slice(&src);
    Ok(())
}

impl<T: Real> SplitSystem<T> for DenseSystem<T> {
    fn len(&self) -> usize {
        self.mixed.n_rows()
    }

    fn apply_part(&self, which: Which, v: &[T], out: &mut [T]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: v.len() });
        }
        let y = match which {
            Which::Mixed => self.mixed.matvec(v),
            Which::Dir1 => self.dir1.matvec(v),
            Which::Dir2 => self.dir2.matvec(v),
            Which::FullD => self.full().matvec(v),
        };
        copy_into(y, out)
    }

    fn apply_jump(&self, v: &[T], out: &mut [T]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: v.len() });
        }
        copy_into(self.jump.matvec(v), out)
    }

    fn factor_full(&self, coef: T) -> Result<Box<dyn StageSolver<T>>> {
        Ok(Box::new(DenseStage(DenseLu::factor(&Self::shifted(&self.full(), coef))?)))
    }

    fn factor_direction(&self, dir: usize, coef: T) -> Result<Box<dyn StageSolver<T>>> {
        let a = match dir {
            1 => &self.dir1,
            2 => &self.dir2,
            _ => return Err(Error::InvalidParameter(format!("direction must be 1 or 2, got {dir}"))),
        };
        Ok(Box::new(DenseStage(DenseLu::factor(&Self::shifted(a, coef))?)))
    }
}
