//! Payoff-adapted nonuniform price grids, cell-averaged initial data and the
//! region of interest.

use crate::model::{OptionSpec, PayoffKind};
use crate::{Error, Real, Result};

/// Stretch parameter of the put-on-min grid as a fraction of the strike.
pub const DEFAULT_CONCENTRATION_FRACTION: f64 = 0.5;

/// Recipe for a grid with the same number of cells in both directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub m: usize,
    pub payoff: PayoffKind,
    pub strike: T,
    pub s_max: T,
    /// Width scale `c` of the sinh map around the strike (put-on-min only).
    pub concentration: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(payoff: PayoffKind, m: usize, strike: T, s_max: T) -> Self {
        GridSpec { m, payoff, strike, s_max, concentration: strike * T::lit(DEFAULT_CONCENTRATION_FRACTION) }
    }

    pub fn with_concentration(mut self, c: T) -> Self {
        self.concentration = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(Error::InvalidParameter(format!("grid needs m >= 4, got {}", self.m)));
        }
        if !(self.strike > T::zero()) {
            return Err(Error::InvalidParameter("strike must be positive".into()));
        }
        if !(self.s_max > T::lit(2.0) * self.strike) || !self.s_max.is_finite() {
            return Err(Error::InvalidParameter("S_max must be finite and exceed 2K".into()));
        }
        if !(self.concentration > T::zero()) || !self.concentration.is_finite() {
            return Err(Error::InvalidParameter("concentration must be positive and finite".into()));
        }
        Ok(())
    }
}

/// One direction of a Cartesian grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis<T> {
    nodes: Vec<T>,
    /// `mesh[k] = s_{k+1} - s_k`.
    mesh: Vec<T>,
    /// `half[l] = s_{l-1/2}` for `l = 0..=m+1`, with `s_{-1/2} = 0` and `s_{m+1/2} = S_max`.
    half: Vec<T>,
}

impl<T: Real> Axis<T> {
    pub fn from_nodes(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("an axis needs at least two nodes".into()));
        }
        if nodes[0] != T::zero() {
            return Err(Error::InvalidParameter("the first node must be 0".into()));
        }
        for k in 1..nodes.len() {
            if !(nodes[k] > nodes[k - 1]) || !nodes[k].is_finite() {
                return Err(Error::NonMonotoneGrid { index: k });
            }
        }
        let mesh: Vec<T> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let m = mesh.len();
        let mut half = Vec::with_capacity(m + 2);
        half.push(T::zero());
        half.extend(nodes.windows(2).map(|w| T::lit(0.5) * (w[0] + w[1])));
        half.push(nodes[m]);
        Ok(Axis { nodes, mesh, half })
    }

    /// Number of cells `m`; nodes are indexed `0..=m`.
    pub fn m(&self) -> usize {
        self.mesh.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn s_max(&self) -> T {
        self.nodes[self.m()]
    }

    /// Mesh width `h_i = s_i - s_{i-1}` for `1 <= i <= m`.
    pub fn h(&self, i: usize) -> T {
        self.mesh[i - 1]
    }

    pub fn mesh(&self) -> &[T] {
        &self.mesh
    }

    pub fn half_cells(&self) -> &[T] {
        &self.half
    }

    /// Control interval `[s_{l-1/2}, s_{l+1/2}]` of node `l`.
    pub fn cell(&self, l: usize) -> (T, T) {
        (self.half[l], self.half[l + 1])
    }

    /// Index `k` with `s_k <= s <= s_{k+1}`, `k <= m - 1`, or `None` outside `[0, S_max]`.
    pub fn locate(&self, s: T) -> Option<usize> {
        if !(s >= T::zero() && s <= self.s_max()) {
            return None;
        }
        let k = self.nodes.partition_point(|&x| x <= s);
        Some(k.saturating_sub(1).min(self.m() - 1))
    }
}

/// Cartesian product of two axes; flat index `i + j (m1 + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid<T> {
    pub axis1: Axis<T>,
    pub axis2: Axis<T>,
}

impl<T: Real> SpatialGrid<T> {
    pub fn from_axes(nodes1: Vec<T>, nodes2: Vec<T>) -> Result<Self> {
        Ok(SpatialGrid { axis1: Axis::from_nodes(nodes1)?, axis2: Axis::from_nodes(nodes2)? })
    }

    pub fn m1(&self) -> usize {
        self.axis1.m()
    }

    pub fn m2(&self) -> usize {
        self.axis2.m()
    }

    /// Number of unknowns `(m1 + 1)(m2 + 1)`.
    pub fn len(&self) -> usize {
        (self.m1() + 1) * (self.m2() + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * (self.m1() + 1)
    }

    pub fn node(&self, i: usize, j: usize) -> (T, T) {
        (self.axis1.nodes[i], self.axis2.nodes[j])
    }

    /// Bilinear interpolation of grid values at `(s1, s2)`.
    pub fn interpolate(&self, values: &[T], s1: T, s2: T) -> Result<T> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: values.len() });
        }
        let out = || Error::OutOfDomain { s1: s1.to_f64_lossy(), s2: s2.to_f64_lossy() };
        let i = self.axis1.locate(s1).ok_or_else(out)?;
        let j = self.axis2.locate(s2).ok_or_else(out)?;
        let (x0, x1) = (self.axis1.nodes[i], self.axis1.nodes[i + 1]);
        let (y0, y1) = (self.axis2.nodes[j], self.axis2.nodes[j + 1]);
        let tx = (s1 - x0) / (x1 - x0);
        let ty = (s2 - y0) / (y1 - y0);
        let one = T::one();
        let v = |a, b| values[self.index(a, b)];
        Ok((one - ty) * ((one - tx) * v(i, j) + tx * v(i + 1, j)) + ty * ((one - tx) * v(i, j + 1) + tx * v(i + 1, j + 1)))
    }
}

/// Builds the grid described by `spec`, identical in both directions.
pub fn build_grid<T: Real>(spec: &GridSpec<T>) -> Result<SpatialGrid<T>> {
    spec.validate()?;
    let nodes = match spec.payoff {
        PayoffKind::PutOnMin => sinh_nodes(spec.m, spec.strike, spec.s_max, spec.concentration),
        PayoffKind::PutOnAverage => average_nodes(spec.m, spec.strike, spec.s_max),
    };
    SpatialGrid::from_axes(nodes.clone(), nodes)
}

/// `s_i = K + c sinh(xi_i)` on a uniform `xi` grid spanning `[0, S_max]`.
fn sinh_nodes<T: Real>(m: usize, k: T, s_max: T, c: T) -> Vec<T> {
    let lo = (-k / c).asinh();
    let hi = ((s_max - k) / c).asinh();
    let d = (hi - lo) / T::count(m);
    let mut nodes: Vec<T> = (0..=m).map(|i| k + c * (lo + T::count(i) * d).sinh()).collect();
    nodes[0] = T::zero();
    nodes[m] = s_max;
    nodes
}

/// Uniform on `[0, 2K]` with `ceil(m/2)` cells, sinh-stretched outside with the
/// first outer width equal to the inner width.
fn average_nodes<T: Real>(m: usize, k: T, s_max: T) -> Vec<T> {
    let two_k = T::lit(2.0) * k;
    let m_in = m.div_ceil(2);
    let m_out = m - m_in;
    let h = two_k / T::count(m_in);
    let mut nodes: Vec<T> = (0..m_in).map(|i| T::count(i) * h).collect();
    nodes.push(two_k);

    let len = s_max - two_k;
    if len / T::count(m_out) <= h {
        let w = len / T::count(m_out);
        nodes.extend((1..m_out).map(|k| two_k + T::count(k) * w));
    } else {
        let c = outer_stretch(len, m_out, h);
        let d = (len / c).asinh() / T::count(m_out);
        nodes.extend((1..m_out).map(|k| two_k + c * (T::count(k) * d).sinh()));
    }
    nodes.push(s_max);
    nodes
}

/// Solves `c sinh(asinh(L/c)/n) = h` for `c`; the left side increases from 0 to `L/n`.
fn outer_stretch<T: Real>(len: T, n: usize, h: T) -> T {
    let g = |c: T| c * ((len / c).asinh() / T::count(n)).sinh() - h;
    let mut lo = len * T::lit(1e-12);
    let mut hi = len;
    while g(hi) < T::zero() {
        hi = hi * T::lit(16.0);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= hi * T::epsilon() * T::lit(4.0) {
            break;
        }
    }
    T::lit(0.5) * (lo + hi)
}

/// `V(0)`: payoff at nodes, replaced by the exact cell average on control
/// cells that meet the payoff's kink set.
///
/// The kink set is `{min(s1, s2) = K}` for the put-on-min (the two half-lines
/// where the put switches off) and `{s1 + s2 = 2K}` for the put-on-average.
/// Cells are half-open, `[s_{l-1/2}, s_{l+1/2})`.
pub fn cell_average_initial<T: Real>(grid: &SpatialGrid<T>, option: &OptionSpec<T>) -> Vec<T> {
    let (m1, m2) = (grid.m1(), grid.m2());
    let mut v = Vec::with_capacity(grid.len());
    let k = option.strike;
    for j in 0..=m2 {
        let (a2, b2) = grid.axis2.cell(j);
        for i in 0..=m1 {
            let (a1, b1) = grid.axis1.cell(i);
            let (s1, s2) = grid.node(i, j);
            let hits = match option.payoff {
                PayoffKind::PutOnMin => {
                    (a1 <= k && k < b1 && b2 > k) || (a2 <= k && k < b2 && b1 > k)
                }
                PayoffKind::PutOnAverage => a1 + a2 <= T::lit(2.0) * k && T::lit(2.0) * k < b1 + b2,
            };
            v.push(if hits {
                cell_average(option, a1, b1, a2, b2)
            } else {
                option.payoff(s1, s2)
            });
        }
    }
    v
}

/// Exact mean of the payoff over `[a1, b1] x [a2, b2]`.
pub fn cell_average<T: Real>(option: &OptionSpec<T>, a1: T, b1: T, a2: T, b2: T) -> T {
    let k = option.strike;
    let area = (b1 - a1) * (b2 - a2);
    let integral = match option.payoff {
        PayoffKind::PutOnMin => {
            // (K - min)^+ = (K - s1)^+ + (K - s2)^+ - (K - max)^+
            let ramp = |a: T, b: T| ramp2(k - a) - ramp2(k - b);
            let single = ramp(a1, b1) * (b2 - a2) + ramp(a2, b2) * (b1 - a1);
            // (K - max)^+ = min(u1, u2)^+ with u = K - s
            let (u1lo, u1hi) = (k - b1, k - a1);
            let (u2lo, u2hi) = (k - b2, k - a2);
            let both = min_corner(u1hi, u2hi) - min_corner(u1lo, u2hi) - min_corner(u1hi, u2lo)
                + min_corner(u1lo, u2lo);
            single - both
        }
        PayoffKind::PutOnAverage => {
            let c = T::lit(2.0) * k;
            let sum = ramp3(c - a1 - a2) - ramp3(c - b1 - a2) - ramp3(c - a1 - b2) + ramp3(c - b1 - b2);
            T::lit(0.5) * sum
        }
    };
    integral / area
}

/// `(z^+)^2 / 2`.
fn ramp2<T: Real>(z: T) -> T {
    let z = z.max(T::zero());
    T::lit(0.5) * z * z
}

/// `(z^+)^3 / 6`.
fn ramp3<T: Real>(z: T) -> T {
    let z = z.max(T::zero());
    z * z * z / T::lit(6.0)
}

/// `int_0^x int_0^y min(u, v) dv du` for the positive parts of `x`, `y`.
fn min_corner<T: Real>(x: T, y: T) -> T {
    let (x, y) = (x.max(T::zero()), y.max(T::zero()));
    let (a, b) = (x.min(y), x.max(y));
    a * a * b / T::lit(2.0) - a * a * a / T::lit(6.0)
}

/// Flat indices of nodes with `K/2 < s1, s2 < 3K/2`.
pub fn roi_mask<T: Real>(grid: &SpatialGrid<T>, strike: T) -> Result<Vec<usize>> {
    let lo = T::lit(0.5) * strike;
    let hi = T::lit(1.5) * strike;
    let inside = |s: T| lo < s && s < hi;
    let mut idx = Vec::new();
    for (j, &s2) in grid.axis2.nodes().iter().enumerate() {
        if !inside(s2) {
            continue;
        }
        for (i, &s1) in grid.axis1.nodes().iter().enumerate() {
            if inside(s1) {
                idx.push(grid.index(i, j));
            }
        }
    }
    if idx.is_empty() {
        return Err(Error::EmptyRegionOfInterest);
    }
    Ok(idx)
}
