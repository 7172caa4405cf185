//! The nonlocal jump integral `lambda E[v(s1 Y1, s2 Y2)]` on the price grid.
//!
//! Interior nodes follow the log-grid route: bilinear transfer of `V` to a
//! uniform log grid, a two-level Toeplitz correlation with the log-jump
//! density evaluated by FFT, and bilinear transfer back. On the edges
//! `s1 = 0` and `s2 = 0` the problem is one-dimensional and uses the marginal
//! log-jump density of the other asset; values beyond the log axis are
//! extended as constants there. At the corner the integral is `lambda v`.

mod kernel;
mod log_grid;
mod transfer;

pub use kernel::{blocktoeplitz_matvec, EdgeKernel, ToeplitzKernel};
pub use log_grid::{required_points, LogAxis, LogGrid, DEFAULT_LOG_POINTS_CAP};
pub use transfer::{AxisTransfer, TransferMaps};

use crate::grid::SpatialGrid;
use crate::model::{Asset, ModelParams};
use crate::{Error, Real, Result};

use transfer::{line_from_log, line_to_log};

/// Everything needed to apply `A_J`, built once per (grid, parameters).
#[derive(Debug)]
pub struct JumpOperator<T: Real> {
    m1: usize,
    m2: usize,
    lambda: T,
    log_grid: LogGrid<T>,
    kernel: ToeplitzKernel<T>,
    maps: TransferMaps<T>,
    keep_rows: Vec<bool>,
    /// Edge `s1 = 0`: jumps of the second asset only.
    edge1: EdgeKernel<T>,
    /// Edge `s2 = 0`: jumps of the first asset only.
    edge2: EdgeKernel<T>,
}

impl<T: Real> JumpOperator<T> {
    pub fn new(params: &ModelParams<T>, grid: &SpatialGrid<T>) -> Result<Self> {
        Self::with_cap(params, grid, DEFAULT_LOG_POINTS_CAP)
    }

    pub fn with_cap(params: &ModelParams<T>, grid: &SpatialGrid<T>, cap: usize) -> Result<Self> {
        params.validate()?;
        let log_grid = LogGrid::build_with_cap(grid, cap)?;
        Ok(Self::from_parts(params, grid, log_grid))
    }

    /// Operator on a caller-chosen log grid.
    pub fn from_parts(params: &ModelParams<T>, grid: &SpatialGrid<T>, log_grid: LogGrid<T>) -> Self {
        let kernel = ToeplitzKernel::from_density(params, &log_grid).expect("kernel sized from the log grid");
        let maps = TransferMaps::build(grid, &log_grid);
        let keep_rows = maps.needed_rows();
        JumpOperator {
            m1: grid.m1(),
            m2: grid.m2(),
            lambda: params.lambda,
            edge1: EdgeKernel::marginal(params, Asset::Second, &log_grid.axis2),
            edge2: EdgeKernel::marginal(params, Asset::First, &log_grid.axis1),
            log_grid,
            kernel,
            maps,
            keep_rows,
        }
    }

    pub fn len(&self) -> usize {
        (self.m1 + 1) * (self.m2 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn log_grid(&self) -> &LogGrid<T> {
        &self.log_grid
    }

    pub fn kernel(&self) -> &ToeplitzKernel<T> {
        &self.kernel
    }

    pub fn maps(&self) -> &TransferMaps<T> {
        &self.maps
    }

    pub fn edge_kernels(&self) -> (&EdgeKernel<T>, &EdgeKernel<T>) {
        (&self.edge1, &self.edge2)
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.len()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// Writes `A_J v` into `out`.
    pub fn apply_into(&self, v: &[T], out: &mut [T]) -> Result<()> {
        let n = self.len();
        for len in [v.len(), out.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, got: len });
            }
        }
        if self.lambda == T::zero() {
            out.iter_mut().for_each(|x| *x = T::zero());
            return Ok(());
        }
        let n1 = self.m1 + 1;

        let vbar = self.maps.to_log(v);
        let (big1, big2) = self.log_grid.points();
        let mut jbar = vec![T::zero(); big1 * big2];
        self.kernel.matvec_rows(&vbar, &mut jbar, |b| self.keep_rows[b])?;
        self.maps.from_log_interior(&jbar, out);

        let mut buf = vec![T::zero(); big2];
        let line = line_to_log(&self.maps.axis2, |j| v[j * n1]);
        self.edge1.apply(&line, &mut buf)?;
        for j in 1..=self.m2 {
            out[j * n1] = line_from_log(&self.maps.axis2, &buf, j);
        }

        let mut buf = vec![T::zero(); big1];
        let line = line_to_log(&self.maps.axis1, |i| v[i]);
        self.edge2.apply(&line, &mut buf)?;
        for i in 1..=self.m1 {
            out[i] = line_from_log(&self.maps.axis1, &buf, i);
        }

        out[0] = self.lambda * v[0];
        Ok(())
    }
}
