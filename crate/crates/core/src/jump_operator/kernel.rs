//! Toeplitz correlation kernels and their FFT matrix-vector products.
//!
//! A two-level Toeplitz product `J_k = sum_i V_i F_{i-k}` (indices per level
//! in `0..M`) is a linear convolution with the flipped kernel `g_t = F_{-t}`.
//! Zero-padding each level to a length `P` makes the circular convolution
//! agree with it on `0..M`, so the product is one forward transform of the
//! padded vector, a pointwise multiplication by the cached spectrum of `g`,
//! and one inverse transform, all built from 1-D FFTs.
//!
//! `P = 2M` always suffices. When `F_{c,.}` vanishes for `c` outside
//! `[c_lo, c_hi]`, any `P >= M + max(c_hi, -c_lo)` is wrap-free as well, and
//! the smallest such `P` with only factors 2, 3 and 5 is used.

use std::sync::{Arc, Mutex};

use num_traits::Float;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::log_grid::{LogAxis, LogGrid};
use crate::model::{Asset, ModelParams};
use crate::{Error, Real, Result};

/// Rows transposed together, to keep the strided accesses in cache.
const TILE: usize = 16;

struct Scratch2d<T> {
    row: Vec<T>,
    crow: Vec<Complex<T>>,
    tile: Vec<Complex<T>>,
    spec: Vec<Complex<T>>,
    work: Vec<Complex<T>>,
}

/// Two-level Toeplitz matrix `lambda F` with `F_{c,d}` for
/// `|c| < M1`, `|d| < M2`, applied through circulant embedding.
pub struct ToeplitzKernel<T: Real> {
    m1: usize,
    m2: usize,
    p1: usize,
    p2: usize,
    lambda: T,
    /// `F_{c,d}` at `(c + M1 - 1) + (d + M2 - 1)(2 M1 - 1)`.
    values: Vec<T>,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    /// Spectrum of the flipped kernel, scaled by `lambda / (P1 P2)`,
    /// stored bin-major: entry `h * P2 + b`.
    spectrum: Vec<Complex<T>>,
    work_len: usize,
    pool: Mutex<Vec<Scratch2d<T>>>,
}

impl<T: Real> std::fmt::Debug for ToeplitzKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzKernel")
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("p1", &self.p1)
            .field("p2", &self.p2)
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl<T: Real> ToeplitzKernel<T> {
    /// Kernel from raw values laid out as `(c + M1 - 1) + (d + M2 - 1)(2 M1 - 1)`.
    pub fn from_values(m1: usize, m2: usize, values: Vec<T>, lambda: T) -> Result<Self> {
        let expected = (2 * m1 - 1) * (2 * m2 - 1);
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, got: values.len() });
        }
        let w1 = 2 * m1 - 1;
        let (mut reach1, mut reach2) = (0usize, 0usize);
        for (k, v) in values.iter().enumerate() {
            if *v != T::zero() {
                reach1 = reach1.max((k % w1).abs_diff(m1 - 1));
                reach2 = reach2.max((k / w1).abs_diff(m2 - 1));
            }
        }
        let (p1, p2) = (padded_len(m1, reach1), padded_len(m2, reach2));
        let h1 = p1 / 2 + 1;
        let mut real_planner = RealFftPlanner::<T>::new();
        let r2c = real_planner.plan_fft_forward(p1);
        let c2r = real_planner.plan_fft_inverse(p1);
        let mut planner = FftPlanner::<T>::new();
        let fwd = planner.plan_fft_forward(p2);
        let inv = planner.plan_fft_inverse(p2);
        let work_len = [r2c.get_scratch_len(), c2r.get_scratch_len(), fwd.get_inplace_scratch_len(), inv.get_inplace_scratch_len()]
            .into_iter()
            .max()
            .unwrap_or(0);

        let mut kernel = ToeplitzKernel {
            m1,
            m2,
            p1,
            p2,
            lambda,
            values,
            r2c,
            c2r,
            fwd,
            inv,
            spectrum: Vec::new(),
            work_len,
            pool: Mutex::new(Vec::new()),
        };

        // g[t mod P] = F_{-t}
        let mut g = vec![T::zero(); p1 * p2];
        let (r1, r2) = (reach1 as i64, reach2 as i64);
        for d in -r2..=r2 {
            let b = (-d).rem_euclid(p2 as i64) as usize;
            for c in -r1..=r1 {
                let a = (-c).rem_euclid(p1 as i64) as usize;
                let src = (c + m1 as i64 - 1) as usize + (d + m2 as i64 - 1) as usize * w1;
                g[a + b * p1] = kernel.values[src];
            }
        }
        let mut s = kernel.new_scratch();
        let mut spectrum = vec![Complex::new(T::zero(), T::zero()); h1 * p2];
        for b in 0..p2 {
            s.row.copy_from_slice(&g[b * p1..(b + 1) * p1]);
            kernel.r2c.process_with_scratch(&mut s.row, &mut s.crow, &mut s.work).expect("buffer sizes fixed at construction");
            for (h, z) in s.crow.iter().enumerate() {
                spectrum[h * p2 + b] = *z;
            }
        }
        kernel.fwd.process_with_scratch(&mut spectrum, &mut s.work);
        let scale = lambda / T::count(p1 * p2);
        spectrum.iter_mut().for_each(|z| *z = *z * scale);
        kernel.spectrum = spectrum;
        kernel.pool.lock().unwrap().push(s);
        Ok(kernel)
    }

    /// `F_{c,d} = fbar(c dx1, d dx2) dx1 dx2` for the bivariate normal
    /// log-jump density. Entries below `1e-20` times the largest one are
    /// stored as zero, which shortens the FFTs without a visible change in
    /// the product.
    pub fn from_density(params: &ModelParams<T>, lg: &LogGrid<T>) -> Result<Self> {
        let (m1, m2) = lg.points();
        let (dx1, dx2) = lg.spacing();
        let w1 = 2 * m1 - 1;
        let mut values = vec![T::zero(); w1 * (2 * m2 - 1)];
        let cell = dx1 * dx2;
        for d in 0..(2 * m2 - 1) {
            let eta2 = T::lit(d as f64 - (m2 as f64 - 1.0)) * dx2;
            for c in 0..w1 {
                let eta1 = T::lit(c as f64 - (m1 as f64 - 1.0)) * dx1;
                values[c + d * w1] = params.log_jump_density(eta1, eta2) * cell;
            }
        }
        let peak = values.iter().copied().fold(T::zero(), T::max);
        let floor = peak * T::lit(1e-20);
        values.iter_mut().filter(|v| **v < floor).for_each(|v| *v = T::zero());
        Self::from_values(m1, m2, values, params.lambda)
    }

    /// Padded FFT lengths per level.
    pub fn padded_dims(&self) -> (usize, usize) {
        (self.p1, self.p2)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// `F_{c,d}`; zero outside `|c| < M1`, `|d| < M2`.
    pub fn value(&self, c: i64, d: i64) -> T {
        let (m1, m2) = (self.m1 as i64, self.m2 as i64);
        if c.abs() >= m1 || d.abs() >= m2 {
            return T::zero();
        }
        self.values[(c + m1 - 1) as usize + (d + m2 - 1) as usize * (2 * self.m1 - 1)]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mass(&self) -> T {
        self.values.iter().copied().sum()
    }

    fn new_scratch(&self) -> Scratch2d<T> {
        let (p1, p2) = (self.p1, self.p2);
        let h1 = p1 / 2 + 1;
        let zero = Complex::new(T::zero(), T::zero());
        Scratch2d { row: vec![T::zero(); p1], crow: vec![zero; h1], tile: vec![zero; TILE * h1], spec: vec![zero; h1 * p2], work: vec![zero; self.work_len] }
    }

    /// `lambda F v` for `v` of length `M1 M2` ordered `a + b M1`.
    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.m1 * self.m2];
        self.matvec_rows(v, &mut out, |_| true)?;
        Ok(out)
    }

    /// Like [`matvec`](Self::matvec), but only output rows `b` with `keep(b)`
    /// are written.
    pub fn matvec_rows(&self, v: &[T], out: &mut [T], keep: impl Fn(usize) -> bool) -> Result<()> {
        let (m1, m2) = (self.m1, self.m2);
        let n = m1 * m2;
        if v.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: v.len() });
        }
        if out.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: out.len() });
        }
        let mut s = self.pool.lock().unwrap().pop().unwrap_or_else(|| self.new_scratch());
        let (p1, p2) = (self.p1, self.p2);
        let h1 = p1 / 2 + 1;
        let zero = Complex::new(T::zero(), T::zero());
        for col in s.spec.chunks_exact_mut(p2) {
            col[m2..].iter_mut().for_each(|z| *z = zero);
        }
        for b0 in (0..m2).step_by(TILE) {
            let t = TILE.min(m2 - b0);
            for r in 0..t {
                let b = b0 + r;
                s.row[..m1].copy_from_slice(&v[b * m1..(b + 1) * m1]);
                s.row[m1..].iter_mut().for_each(|x| *x = T::zero());
                let dst = &mut s.tile[r * h1..(r + 1) * h1];
                self.r2c.process_with_scratch(&mut s.row, dst, &mut s.work).expect("buffer sizes fixed at construction");
            }
            for h in 0..h1 {
                let col = &mut s.spec[h * p2 + b0..h * p2 + b0 + t];
                for (r, z) in col.iter_mut().enumerate() {
                    *z = s.tile[r * h1 + h];
                }
            }
        }
        // transform, multiply and invert one column at a time while it is in cache
        for (col, ker) in s.spec.chunks_exact_mut(p2).zip(self.spectrum.chunks_exact(p2)) {
            self.fwd.process_with_scratch(col, &mut s.work);
            for (z, k) in col.iter_mut().zip(ker) {
                *z = *z * *k;
            }
            self.inv.process_with_scratch(col, &mut s.work);
        }
        let rows: Vec<usize> = (0..m2).filter(|&b| keep(b)).collect();
        for chunk in rows.chunks(TILE) {
            for h in 0..h1 {
                let col = &s.spec[h * p2..(h + 1) * p2];
                for (r, &b) in chunk.iter().enumerate() {
                    s.tile[r * h1 + h] = col[b];
                }
            }
            for (r, &b) in chunk.iter().enumerate() {
                let src = &mut s.tile[r * h1..(r + 1) * h1];
                src[0].im = T::zero();
                src[h1 - 1].im = T::zero();
                self.c2r.process_with_scratch(src, &mut s.row, &mut s.work).expect("imaginary parts cleared");
                out[b * m1..(b + 1) * m1].copy_from_slice(&s.row[..m1]);
            }
        }
        self.pool.lock().unwrap().push(s);
        Ok(())
    }
}

/// Smallest even `P >= m + reach` whose odd part has only factors 3 and 5,
/// capped at `2m`.
fn padded_len(m: usize, reach: usize) -> usize {
    let need = m + reach;
    let smooth = |mut n: usize| {
        for f in [2, 3, 5] {
            while n % f == 0 {
                n /= f;
            }
        }
        n == 1
    };
    (need..2 * m).find(|&p| p % 2 == 0 && smooth(p)).unwrap_or(2 * m)
}

/// Free-function form of [`ToeplitzKernel::matvec`].
pub fn blocktoeplitz_matvec<T: Real>(kernel: &ToeplitzKernel<T>, v_bar: &[T]) -> Result<Vec<T>> {
    kernel.matvec(v_bar)
}

struct Scratch1d<T> {
    row: Vec<T>,
    crow: Vec<Complex<T>>,
    work: Vec<Complex<T>>,
}

/// One-level Toeplitz correlation `J_k = lambda sum_i V_i g_{i-k}` on a log
/// axis, with constant extrapolation of `V` beyond both ends of the axis.
pub struct EdgeKernel<T: Real> {
    m: usize,
    lambda: T,
    values: Vec<T>,
    /// Kernel mass beyond the top node seen from each node, `sum_{c >= M - q} g_c`.
    tail_hi: Vec<T>,
    /// Kernel mass below the bottom node, `sum_{c <= -q - 1} g_c`.
    tail_lo: Vec<T>,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    spectrum: Vec<Complex<T>>,
    work_len: usize,
    pool: Mutex<Vec<Scratch1d<T>>>,
}

impl<T: Real> std::fmt::Debug for EdgeKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeKernel").field("m", &self.m).field("lambda", &self.lambda).finish()
    }
}

impl<T: Real> EdgeKernel<T> {
    /// `g_c = N(c dx; gamma_i, delta_i^2) dx` on the log axis of `asset`,
    /// normalized to unit sum over all `c`.
    pub fn marginal(params: &ModelParams<T>, asset: Asset, axis: &LogAxis<T>) -> Self {
        let m = axis.points;
        let dx = axis.dx;
        let raw = |c: i64| params.marginal_log_jump_density(asset, T::lit(c as f64) * dx) * dx;
        // far enough that the omitted normal mass is far below roundoff
        let reach = ((Float::abs(params.gamma(asset)) + T::lit(40.0) * params.delta(asset)) / dx).ceil().to_f64_lossy() as i64;
        let big = m as i64 + reach.max(0);
        // unit total mass, so constants on the edge are reproduced exactly
        let total: T = (-big..=big).map(raw).sum();
        let g = |c: i64| raw(c) / total;
        let values: Vec<T> = (-(m as i64 - 1)..=(m as i64 - 1)).map(g).collect();
        // suffix sums of g over c >= c0 and prefix sums over c <= c0, accumulated
        // from the far tails inwards
        let mut above = vec![T::zero(); m + 1];
        let mut acc = T::zero();
        for c in (m as i64..=big).rev() {
            acc += g(c);
        }
        above[m] = acc;
        for c0 in (1..m).rev() {
            acc += g(c0 as i64);
            above[c0] = acc;
        }
        let tail_hi: Vec<T> = (0..m).map(|q| above[m - q]).collect();
        let mut below = vec![T::zero(); m + 1];
        let mut acc = T::zero();
        for c in (m as i64..=big).rev() {
            acc += g(-c);
        }
        below[m] = acc;
        for c0 in (1..m).rev() {
            acc += g(-(c0 as i64));
            below[c0] = acc;
        }
        let tail_lo: Vec<T> = (0..m).map(|q| below[q + 1]).collect();
        Self::build(m, values, tail_hi, tail_lo, params.lambda)
    }

    fn build(m: usize, values: Vec<T>, tail_hi: Vec<T>, tail_lo: Vec<T>, lambda: T) -> Self {
        let p = 2 * m;
        let mut planner = RealFftPlanner::<T>::new();
        let r2c = planner.plan_fft_forward(p);
        let c2r = planner.plan_fft_inverse(p);
        let work_len = r2c.get_scratch_len().max(c2r.get_scratch_len());
        let mut k = EdgeKernel {
            m,
            lambda,
            values,
            tail_hi,
            tail_lo,
            r2c,
            c2r,
            spectrum: Vec::new(),
            work_len,
            pool: Mutex::new(Vec::new()),
        };
        let mut s = k.new_scratch();
        for c in -(m as i64 - 1)..=(m as i64 - 1) {
            s.row[(-c).rem_euclid(p as i64) as usize] = k.values[(c + m as i64 - 1) as usize];
        }
        k.r2c.process_with_scratch(&mut s.row, &mut s.crow, &mut s.work).expect("buffer sizes fixed at construction");
        let scale = lambda / T::count(p);
        k.spectrum = s.crow.iter().map(|z| *z * scale).collect();
        k.pool.lock().unwrap().push(s);
        k
    }

    fn new_scratch(&self) -> Scratch1d<T> {
        let zero = Complex::new(T::zero(), T::zero());
        Scratch1d { row: vec![T::zero(); 2 * self.m], crow: vec![zero; self.m + 1], work: vec![zero; self.work_len] }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `g_c` for `|c| < M`.
    pub fn value(&self, c: i64) -> T {
        if c.unsigned_abs() as usize >= self.m {
            return T::zero();
        }
        self.values[(c + self.m as i64 - 1) as usize]
    }

    pub fn tails(&self) -> (&[T], &[T]) {
        (&self.tail_lo, &self.tail_hi)
    }

    /// Correlation of `v` (length `M`) with the kernel, plus the extrapolated tails.
    pub fn apply(&self, v: &[T], out: &mut [T]) -> Result<()> {
        let m = self.m;
        if v.len() != m || out.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: v.len().min(out.len()) });
        }
        let mut s = self.pool.lock().unwrap().pop().unwrap_or_else(|| self.new_scratch());
        s.row[..m].copy_from_slice(v);
        s.row[m..].iter_mut().for_each(|x| *x = T::zero());
        self.r2c.process_with_scratch(&mut s.row, &mut s.crow, &mut s.work).expect("buffer sizes fixed at construction");
        for (z, k) in s.crow.iter_mut().zip(&self.spectrum) {
            *z = *z * *k;
        }
        s.crow[0].im = T::zero();
        s.crow[m].im = T::zero();
        self.c2r.process_with_scratch(&mut s.crow, &mut s.row, &mut s.work).expect("imaginary parts cleared");
        let (lo, hi) = (v[0], v[m - 1]);
        for q in 0..m {
            out[q] = s.row[q] + self.lambda * (self.tail_lo[q] * lo + self.tail_hi[q] * hi);
        }
        self.pool.lock().unwrap().push(s);
        Ok(())
    }
}
