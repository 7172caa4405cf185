use crate::grid::{Axis, SpatialGrid};
use crate::{Error, Real, Result};

/// Largest number of log-grid points per direction accepted by default. The
/// kernel holds `(2M - 1)^2` values, about 0.5 GB in `f64` at this cap.
pub const DEFAULT_LOG_POINTS_CAP: usize = 1 << 12;

/// Uniform log-price axis `x_k = k dx`, `k = -M/2 + 1 ..= M/2`, with
/// `(M/2) dx = X_max`. Storage index `q = k + M/2 - 1` runs over `0..M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAxis<T> {
    pub x_max: T,
    pub points: usize,
    pub dx: T,
}

impl<T: Real> LogAxis<T> {
    pub fn new(x_max: T, points: usize) -> Self {
        LogAxis { x_max, points, dx: T::lit(2.0) * x_max / T::count(points) }
    }

    /// Axis for `[0, S_max]` whose spacing is finer than every log-mesh of `axis`.
    pub fn covering(axis: &Axis<T>, cap: usize) -> Result<Self> {
        let x_max = axis.s_max().ln();
        let ln: Vec<T> = axis.nodes()[1..].iter().map(|s| s.ln()).collect();
        let min_mesh = ln.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min);
        Ok(Self::new(x_max, required_points(x_max, min_mesh, cap)?))
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// Logical index `k` of storage position `q`.
    pub fn logical(&self, q: usize) -> i64 {
        q as i64 - (self.points / 2) as i64 + 1
    }

    /// Node `x` at storage position `q`; the last node is exactly `X_max`.
    pub fn node(&self, q: usize) -> T {
        if q + 1 == self.points {
            return self.x_max;
        }
        T::lit(self.logical(q) as f64) * self.dx
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.points).map(|q| self.node(q)).collect()
    }
}

/// Smallest power of two `M >= 2` with `2 X_max / M < min_mesh`.
pub fn required_points<T: Real>(x_max: T, min_mesh: T, cap: usize) -> Result<usize> {
    if !(x_max > T::zero()) || !(min_mesh > T::zero()) {
        return Err(Error::InvalidParameter("log grid needs S_max > 1 and a positive log mesh".into()));
    }
    let mut m = 2usize;
    while !(T::lit(2.0) * x_max / T::count(m) < min_mesh) {
        m *= 2;
        if m > cap {
            return Err(Error::LogGridTooLarge { required: m, cap });
        }
    }
    Ok(m)
}

/// The two log-price axes of the jump integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogGrid<T> {
    pub axis1: LogAxis<T>,
    pub axis2: LogAxis<T>,
}

impl<T: Real> LogGrid<T> {
    pub fn build(grid: &SpatialGrid<T>) -> Result<Self> {
        Self::build_with_cap(grid, DEFAULT_LOG_POINTS_CAP)
    }

    pub fn build_with_cap(grid: &SpatialGrid<T>, cap: usize) -> Result<Self> {
        Ok(LogGrid { axis1: LogAxis::covering(&grid.axis1, cap)?, axis2: LogAxis::covering(&grid.axis2, cap)? })
    }

    pub fn x_max(&self) -> T {
        self.axis1.x_max
    }

    pub fn points(&self) -> (usize, usize) {
        (self.axis1.points, self.axis2.points)
    }

    pub fn spacing(&self) -> (T, T) {
        (self.axis1.dx, self.axis2.dx)
    }
}
