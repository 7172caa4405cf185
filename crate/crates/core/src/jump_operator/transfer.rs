use crate::grid::{Axis, SpatialGrid};
use crate::Real;

use super::log_grid::{LogAxis, LogGrid};

/// Linear interpolation between the price axis and the log axis of one direction.
///
/// Each entry `(lo, w)` stands for `w * u[lo] + (1 - w) * u[lo + 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisTransfer<T> {
    /// One entry per log node: `s_lo <= e^x <= s_{lo+1}`.
    pub to_log: Vec<(usize, T)>,
    /// One entry per price node: `e^{x_lo} <= s <= e^{x_{lo+1}}`, clamped to the
    /// first log node for `s` below it.
    pub from_log: Vec<(usize, T)>,
}

impl<T: Real> AxisTransfer<T> {
    pub fn new(axis: &Axis<T>, log: &LogAxis<T>) -> Self {
        let s = axis.nodes();
        let m = axis.m();
        let s_max = axis.s_max();
        let to_log = (0..log.points)
            .map(|q| {
                let y = log.node(q).exp().min(s_max);
                let lo = axis.locate(y).expect("log nodes lie inside [0, S_max]");
                let w = (s[lo + 1] - y) / (s[lo + 1] - s[lo]);
                (lo, clamp01(w))
            })
            .collect();
        let ex: Vec<T> = log.nodes().iter().map(|x| x.exp()).collect();
        let n = log.points;
        let from_log = (0..=m)
            .map(|i| {
                let si = s[i];
                if si <= ex[0] {
                    return (0, T::one());
                }
                let k = ex.partition_point(|&e| e <= si).saturating_sub(1).min(n - 2);
                let w = (ex[k + 1] - si) / (ex[k + 1] - ex[k]);
                (k, clamp01(w))
            })
            .collect();
        AxisTransfer { to_log, from_log }
    }
}

fn clamp01<T: Real>(w: T) -> T {
    w.max(T::zero()).min(T::one())
}

/// The bilinear transfer maps between the price grid and the log grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMaps<T> {
    pub axis1: AxisTransfer<T>,
    pub axis2: AxisTransfer<T>,
    m1: usize,
    m2: usize,
    big1: usize,
    big2: usize,
}

impl<T: Real> TransferMaps<T> {
    pub fn build(grid: &SpatialGrid<T>, lg: &LogGrid<T>) -> Self {
        TransferMaps {
            axis1: AxisTransfer::new(&grid.axis1, &lg.axis1),
            axis2: AxisTransfer::new(&grid.axis2, &lg.axis2),
            m1: grid.m1(),
            m2: grid.m2(),
            big1: lg.axis1.points,
            big2: lg.axis2.points,
        }
    }

    /// `Vbar = X V`: price-grid values (length `(m1+1)(m2+1)`) to the log grid
    /// (length `M1 M2`, ordered `a + b M1`).
    pub fn to_log(&self, v: &[T]) -> Vec<T> {
        let (n1, n2) = (self.m1 + 1, self.m2 + 1);
        let big1 = self.big1;
        let mut tmp = vec![T::zero(); big1 * n2];
        for j in 0..n2 {
            let row = &v[j * n1..(j + 1) * n1];
            for (a, &(lo, w)) in self.axis1.to_log.iter().enumerate() {
                tmp[a + j * big1] = w * row[lo] + (T::one() - w) * row[lo + 1];
            }
        }
        let mut out = vec![T::zero(); big1 * self.big2];
        for (b, &(lo, w)) in self.axis2.to_log.iter().enumerate() {
            let lower = &tmp[lo * big1..(lo + 1) * big1];
            let upper = &tmp[(lo + 1) * big1..(lo + 2) * big1];
            let o = &mut out[b * big1..(b + 1) * big1];
            for a in 0..big1 {
                o[a] = w * lower[a] + (T::one() - w) * upper[a];
            }
        }
        out
    }

    /// Log-grid rows needed by [`from_log_interior`](Self::from_log_interior).
    pub fn needed_rows(&self) -> Vec<bool> {
        let mut keep = vec![false; self.big2];
        for &(lo, _) in &self.axis2.from_log[1..] {
            keep[lo] = true;
            keep[lo + 1] = true;
        }
        keep
    }

    /// `J = Xbar Jbar` at the nodes with `i, j >= 1`; other entries of `out` are untouched.
    pub fn from_log_interior(&self, jbar: &[T], out: &mut [T]) {
        let n1 = self.m1 + 1;
        let big1 = self.big1;
        let mut line = vec![T::zero(); big1];
        for j in 1..=self.m2 {
            let (lo, w) = self.axis2.from_log[j];
            let lower = &jbar[lo * big1..(lo + 1) * big1];
            let upper = &jbar[(lo + 1) * big1..(lo + 2) * big1];
            for a in 0..big1 {
                line[a] = w * lower[a] + (T::one() - w) * upper[a];
            }
            for i in 1..=self.m1 {
                let (lo1, w1) = self.axis1.from_log[i];
                out[i + j * n1] = w1 * line[lo1] + (T::one() - w1) * line[lo1 + 1];
            }
        }
    }
}

/// One-dimensional transfer of a price-grid line to its log axis.
pub(crate) fn line_to_log<T: Real>(map: &AxisTransfer<T>, line: impl Fn(usize) -> T) -> Vec<T> {
    map.to_log.iter().map(|&(lo, w)| w * line(lo) + (T::one() - w) * line(lo + 1)).collect()
}

/// Value of a log-axis line at price node `i`.
pub(crate) fn line_from_log<T: Real>(map: &AxisTransfer<T>, jbar: &[T], i: usize) -> T {
    let (lo, w) = map.from_log[i];
    w * jbar[lo] + (T::one() - w) * jbar[lo + 1]
}
