//! Finite-difference discretization of the convection-diffusion-reaction part
//! of the pricing PIDE.
//!
//! With unknowns ordered as `i + j (m1 + 1)` the semidiscrete operator is
//! `A_D = A_M + A_1 + A_2` where
//!
//! * `A_1 = I (x) B_1`, `B_1 = 1/2 sigma1^2 X1^2 D1_ss + (r - lambda kappa1) X1 D1_s - 1/2 (r + lambda) I`,
//! * `A_2 = B_2 (x) I`, built the same way in the second direction,
//! * `A_M = rho sigma1 sigma2 (X2 D2_s) (x) (X1 D1_s)`.
//!
//! Only the one-dimensional tridiagonal factors are stored; products are
//! applied direction by direction.

use crate::grid::{Axis, SpatialGrid};
use crate::linalg::{BandedMatrix, CsrMatrix, Tridiagonal};
use crate::model::{Asset, ModelParams};
use crate::{Error, Real, Result};

/// Three-point stencil `(w_{-1}, w_0, w_{+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdWeights<T> {
    pub w_minus1: T,
    pub w_0: T,
    pub w_plus1: T,
}

impl<T: Real> FdWeights<T> {
    pub fn apply(&self, left: T, centre: T, right: T) -> T {
        self.w_minus1 * left + self.w_0 * centre + self.w_plus1 * right
    }
}

/// Central first-derivative weights for left width `h_i` and right width `h_{i+1}`.
pub fn central_first_derivative_weights<T: Real>(h_i: T, h_ip1: T) -> FdWeights<T> {
    FdWeights {
        w_minus1: -h_ip1 / (h_i * (h_i + h_ip1)),
        w_0: (h_ip1 - h_i) / (h_i * h_ip1),
        w_plus1: h_i / (h_ip1 * (h_i + h_ip1)),
    }
}

/// Central second-derivative weights for left width `h_i` and right width `h_{i+1}`.
pub fn central_second_derivative_weights<T: Real>(h_i: T, h_ip1: T) -> FdWeights<T> {
    let two = T::lit(2.0);
    FdWeights {
        w_minus1: two / (h_i * (h_i + h_ip1)),
        w_0: -two / (h_i * h_ip1),
        w_plus1: two / (h_ip1 * (h_i + h_ip1)),
    }
}

/// Part of `A_D` to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Which {
    Mixed,
    Dir1,
    Dir2,
    FullD,
}

/// The assembled spatial operators of one grid.
#[derive(Clone, Debug)]
pub struct OperatorSet<T> {
    m1: usize,
    m2: usize,
    b1: Tridiagonal<T>,
    b2: Tridiagonal<T>,
    c1: Tridiagonal<T>,
    c2: Tridiagonal<T>,
    mixed_coef: T,
}

/// `X D_s` on one axis: central inside, backward at `s_m`, zero at `s_0 = 0`.
fn convection_matrix<T: Real>(axis: &Axis<T>) -> Tridiagonal<T> {
    let m = axis.m();
    let s = axis.nodes();
    let mut t = Tridiagonal::zeros(m + 1);
    for i in 1..m {
        let w = central_first_derivative_weights(axis.h(i), axis.h(i + 1));
        t.sub[i] = s[i] * w.w_minus1;
        t.diag[i] = s[i] * w.w_0;
        t.sup[i] = s[i] * w.w_plus1;
    }
    let hm = axis.h(m);
    t.sub[m] = -s[m] / hm;
    t.diag[m] = s[m] / hm;
    t
}

/// `X^2 D_ss` on one axis; the rows at `s_0` and `s_m` vanish.
fn diffusion_matrix<T: Real>(axis: &Axis<T>) -> Tridiagonal<T> {
    let m = axis.m();
    let s = axis.nodes();
    let mut t = Tridiagonal::zeros(m + 1);
    for i in 1..m {
        let w = central_second_derivative_weights(axis.h(i), axis.h(i + 1));
        let s2 = s[i] * s[i];
        t.sub[i] = s2 * w.w_minus1;
        t.diag[i] = s2 * w.w_0;
        t.sup[i] = s2 * w.w_plus1;
    }
    t
}

fn direction_block<T: Real>(params: &ModelParams<T>, asset: Asset, axis: &Axis<T>) -> (Tridiagonal<T>, Tridiagonal<T>) {
    let half = T::lit(0.5);
    let sigma = params.sigma(asset);
    let drift = params.r - params.lambda * params.expected_relative_jump_size(asset);
    let c = convection_matrix(axis);
    let mut b = diffusion_matrix(axis).combine(half * sigma * sigma, &c, drift);
    let reaction = half * (params.r + params.lambda);
    b.diag.iter_mut().for_each(|d| *d -= reaction);
    (b, c)
}

impl<T: Real> OperatorSet<T> {
    pub fn assemble(params: &ModelParams<T>, grid: &SpatialGrid<T>) -> Result<Self> {
        params.validate()?;
        let (b1, c1) = direction_block(params, Asset::First, &grid.axis1);
        let (b2, c2) = direction_block(params, Asset::Second, &grid.axis2);
        Ok(OperatorSet {
            m1: grid.m1(),
            m2: grid.m2(),
            b1,
            b2,
            c1,
            c2,
            mixed_coef: params.rho * params.sigma1 * params.sigma2,
        })
    }

    pub fn len(&self) -> usize {
        (self.m1 + 1) * (self.m2 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    /// One-dimensional block of `A_1` (`dir = 1`) or `A_2` (`dir = 2`).
    pub fn direction_block(&self, dir: usize) -> &Tridiagonal<T> {
        match dir {
            1 => &self.b1,
            2 => &self.b2,
            _ => panic!("direction must be 1 or 2, got {dir}"),
        }
    }

    /// `X_k D_k` factor of the mixed term.
    pub fn convection_block(&self, dir: usize) -> &Tridiagonal<T> {
        match dir {
            1 => &self.c1,
            2 => &self.c2,
            _ => panic!("direction must be 1 or 2, got {dir}"),
        }
    }

    pub fn mixed_coefficient(&self) -> T {
        self.mixed_coef
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }

    pub fn apply(&self, which: Which, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.len()];
        self.apply_into(which, v, &mut out)?;
        Ok(out)
    }

    /// Writes `A v` into `out`.
    pub fn apply_into(&self, which: Which, v: &[T], out: &mut [T]) -> Result<()> {
        self.check(v.len())?;
        self.check(out.len())?;
        match which {
            Which::Dir1 => along_first(&self.b1, T::one(), v, out, self.m1 + 1),
            Which::Dir2 => along_second(&self.b2, T::one(), v, out, self.m1 + 1),
            Which::Mixed => {
                let mut tmp = vec![T::zero(); v.len()];
                along_first(&self.c1, T::one(), v, &mut tmp, self.m1 + 1);
                along_second(&self.c2, self.mixed_coef, &tmp, out, self.m1 + 1);
            }
            Which::FullD => {
                let mut d1 = vec![T::zero(); v.len()];
                let mut d2 = vec![T::zero(); v.len()];
                self.apply_into(Which::Mixed, v, out)?;
                along_first(&self.b1, T::one(), v, &mut d1, self.m1 + 1);
                along_second(&self.b2, T::one(), v, &mut d2, self.m1 + 1);
                for ((o, &a), &b) in out.iter_mut().zip(&d1).zip(&d2) {
                    *o = *o + a + b;
                }
            }
        }
        Ok(())
    }

    /// Sparse matrix of the selected operator.
    pub fn matrix(&self, which: Which) -> CsrMatrix<T> {
        let n = self.len();
        let mut trip = Vec::new();
        self.push_triplets(which, T::one(), &mut |r, c, v| trip.push((r, c, v)));
        CsrMatrix::from_triplets(n, n, trip)
    }

    /// `I - coef * A_D` as a band matrix with half-bandwidth `m1 + 2`.
    pub fn shifted_full_banded(&self, coef: T) -> BandedMatrix<T> {
        let n = self.len();
        let bw = self.m1 + 2;
        let mut a = BandedMatrix::zeros(n, bw, bw);
        for k in 0..n {
            a.add(k, k, T::one());
        }
        self.push_triplets(Which::FullD, -coef, &mut |r, c, v| a.add(r, c, v));
        a
    }

    fn push_triplets(&self, which: Which, scale: T, sink: &mut dyn FnMut(usize, usize, T)) {
        let n1 = self.m1 + 1;
        let idx = |i: usize, j: usize| i + j * n1;
        let entries = |t: &Tridiagonal<T>, k: usize| {
            let n = t.len();
            let mut e = Vec::with_capacity(3);
            if k > 0 {
                e.push((k - 1, t.sub[k]));
            }
            e.push((k, t.diag[k]));
            if k + 1 < n {
                e.push((k + 1, t.sup[k]));
            }
            e
        };
        let dir1 = matches!(which, Which::Dir1 | Which::FullD);
        let dir2 = matches!(which, Which::Dir2 | Which::FullD);
        let mixed = matches!(which, Which::Mixed | Which::FullD);
        for j in 0..=self.m2 {
            for i in 0..=self.m1 {
                let row = idx(i, j);
                if dir1 {
                    for (c, w) in entries(&self.b1, i) {
                        sink(row, idx(c, j), scale * w);
                    }
                }
                if dir2 {
                    for (c, w) in entries(&self.b2, j) {
                        sink(row, idx(i, c), scale * w);
                    }
                }
                if mixed {
                    for (cj, wj) in entries(&self.c2, j) {
                        for (ci, wi) in entries(&self.c1, i) {
                            let w = self.mixed_coef * wj * wi;
                            if w != T::zero() {
                                sink(row, idx(ci, cj), scale * w);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `out = coef * (I (x) t) v`: `t` acts along the contiguous first index.
pub(crate) fn along_first<T: Real>(t: &Tridiagonal<T>, coef: T, v: &[T], out: &mut [T], n1: usize) {
    for (vl, ol) in v.chunks_exact(n1).zip(out.chunks_exact_mut(n1)) {
        for i in 0..n1 {
            ol[i] = coef * t.row_dot(i, vl, 0, 1);
        }
    }
}

/// `out = coef * (t (x) I) v`: `t` acts along the strided second index.
pub(crate) fn along_second<T: Real>(t: &Tridiagonal<T>, coef: T, v: &[T], out: &mut [T], n1: usize) {
    let n2 = t.len();
    for j in 0..n2 {
        let o = &mut out[j * n1..(j + 1) * n1];
        let (l, d, u) = (coef * t.sub[j], coef * t.diag[j], coef * t.sup[j]);
        let centre = &v[j * n1..(j + 1) * n1];
        o.iter_mut().zip(centre).for_each(|(x, &c)| *x = d * c);
        if j > 0 {
            let below = &v[(j - 1) * n1..j * n1];
            o.iter_mut().zip(below).for_each(|(x, &b)| *x += l * b);
        }
        if j + 1 < n2 {
            let above = &v[(j + 1) * n1..(j + 2) * n1];
            o.iter_mut().zip(above).for_each(|(x, &a)| *x += u * a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};
    use crate::linalg::{BandedLu, DenseMatrix};
    use crate::model::{ParameterSet, PayoffKind, SetId};
    use proptest::prelude::*;

    fn set(id: SetId) -> ModelParams<f64> {
        ParameterSet::preset(id).params
    }

    fn sample_grid(m: usize) -> SpatialGrid<f64> {
        build_grid(&GridSpec::new(PayoffKind::PutOnMin, m, 100.0, 500.0)).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn weight_examples() {
        let w = central_first_derivative_weights(0.1, 0.1);
        assert!(close(w.w_minus1, -5.0, 1e-14) && w.w_0 == 0.0 && close(w.w_plus1, 5.0, 1e-14));
        let w = central_first_derivative_weights(1.0, 2.0);
        assert!(close(w.w_minus1, -2.0 / 3.0, 1e-15) && close(w.w_0, 0.5, 1e-15) && close(w.w_plus1, 1.0 / 6.0, 1e-15));
        let w = central_second_derivative_weights(0.1, 0.1);
        assert!(close(w.w_minus1, 100.0, 1e-14) && close(w.w_0, -200.0, 1e-14) && close(w.w_plus1, 100.0, 1e-14));
        let w = central_second_derivative_weights(1.0, 2.0);
        assert!(close(w.w_minus1, 2.0 / 3.0, 1e-15) && close(w.w_0, -1.0, 1e-15) && close(w.w_plus1, 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn corner_row_is_pure_reaction() {
        let p = set(SetId::Set1);
        let ops = OperatorSet::assemble(&p, &sample_grid(10)).unwrap();
        let half = -0.5 * (p.r + p.lambda);
        for (which, diag) in [(Which::Dir1, half), (Which::Dir2, half), (Which::Mixed, 0.0)] {
            let a = ops.matrix(which);
            let row: Vec<_> = a.row(0).collect();
            let expected: Vec<(usize, f64)> = if diag == 0.0 { vec![] } else { vec![(0, diag)] };
            assert_eq!(row, expected, "{which:?}");
        }
    }

    #[test]
    fn linear_function_in_first_asset() {
        let p = set(SetId::Set2);
        let g = sample_grid(16);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|k| g.node(k % 17, k / 17).0).collect();
        let out = ops.apply(Which::FullD, &v).unwrap();
        let k1 = p.expected_relative_jump_size(Asset::First);
        for j in 1..16 {
            for i in 1..16 {
                let s1 = g.node(i, j).0;
                let expected = (p.r - p.lambda * k1) * s1 - (p.r + p.lambda) * s1;
                assert!(close(out[g.index(i, j)], expected, 1e-12));
            }
        }
    }

    #[test]
    fn mixed_term_on_bilinear() {
        let p = set(SetId::Set3);
        let g = sample_grid(12);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|k| g.node(k % 13, k / 13)).map(|(a, b)| a * b).collect();
        let out = ops.apply(Which::Mixed, &v).unwrap();
        for j in 1..=12 {
            for i in 1..=12 {
                let (s1, s2) = g.node(i, j);
                assert!(close(out[g.index(i, j)], p.rho * p.sigma1 * p.sigma2 * s1 * s2, 1e-12));
            }
        }
    }

    /// Independent dense assembly: explicit Kronecker products of dense 1-D
    /// difference matrices written out from the stencil formulas.
    fn dense_oracle(p: &ModelParams<f64>, g: &SpatialGrid<f64>) -> (DenseMatrix<f64>, DenseMatrix<f64>, DenseMatrix<f64>) {
        let d = |axis: &Axis<f64>| {
            let m = axis.m();
            let s = axis.nodes();
            let mut d1 = DenseMatrix::zeros(m + 1, m + 1);
            let mut d2 = DenseMatrix::zeros(m + 1, m + 1);
            let mut x = DenseMatrix::zeros(m + 1, m + 1);
            for i in 0..=m {
                x[(i, i)] = s[i];
            }
            for i in 1..m {
                let (a, b) = (s[i] - s[i - 1], s[i + 1] - s[i]);
                d1[(i, i - 1)] = -b / (a * (a + b));
                d1[(i, i)] = (b - a) / (a * b);
                d1[(i, i + 1)] = a / (b * (a + b));
                d2[(i, i - 1)] = 2.0 / (a * (a + b));
                d2[(i, i)] = -2.0 / (a * b);
                d2[(i, i + 1)] = 2.0 / (b * (a + b));
            }
            d1[(m, m - 1)] = -1.0 / (s[m] - s[m - 1]);
            d1[(m, m)] = 1.0 / (s[m] - s[m - 1]);
            (x, d1, d2)
        };
        let kron = |a: &DenseMatrix<f64>, b: &DenseMatrix<f64>| {
            let (ra, rb) = (a.n_rows(), b.n_rows());
            let mut k = DenseMatrix::zeros(ra * rb, ra * rb);
            for i in 0..ra {
                for j in 0..ra {
                    for r in 0..rb {
                        for c in 0..rb {
                            k[(i * rb + r, j * rb + c)] = a[(i, j)] * b[(r, c)];
                        }
                    }
                }
            }
            k
        };
        let block = |sig: f64, kap: f64, x: &DenseMatrix<f64>, d1: &DenseMatrix<f64>, d2: &DenseMatrix<f64>| {
            let n = x.n_rows();
            let x2d2 = x.matmul(x).matmul(d2);
            let xd1 = x.matmul(d1);
            x2d2.combine(0.5 * sig * sig, &xd1, p.r - p.lambda * kap)
                .combine(1.0, &DenseMatrix::identity(n), -0.5 * (p.r + p.lambda))
        };
        let (x1, d11, d12) = d(&g.axis1);
        let (x2, d21, d22) = d(&g.axis2);
        let b1 = block(p.sigma1, p.expected_relative_jump_size(Asset::First), &x1, &d11, &d12);
        let b2 = block(p.sigma2, p.expected_relative_jump_size(Asset::Second), &x2, &d21, &d22);
        let a1 = kron(&DenseMatrix::identity(x2.n_rows()), &b1);
        let a2 = kron(&b2, &DenseMatrix::identity(x1.n_rows()));
        let am = kron(&x2.matmul(&d21), &x1.matmul(&d11)).combine(p.rho * p.sigma1 * p.sigma2, &a1, 0.0);
        (am, a1, a2)
    }

    #[test]
    fn sparse_apply_matches_dense_oracle() {
        let p = set(SetId::Set1);
        let g = SpatialGrid::from_axes(vec![0.0, 30.0, 80.0, 100.0, 115.0, 200.0, 500.0], vec![0.0, 40.0, 90.0, 100.0, 120.0, 260.0, 500.0]).unwrap();
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let (am, a1, a2) = dense_oracle(&p, &g);
        let v: Vec<f64> = (0..g.len()).map(|k| ((k * 37 % 11) as f64 - 5.0) * 3.7).collect();
        let ad = am.combine(1.0, &a1, 1.0).combine(1.0, &a2, 1.0);
        for (which, dense) in [(Which::Mixed, &am), (Which::Dir1, &a1), (Which::Dir2, &a2), (Which::FullD, &ad)] {
            let x = ops.apply(which, &v).unwrap();
            let y = dense.matvec(&v);
            let z = ops.matrix(which).matvec(&v).unwrap();
            let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..v.len() {
                assert!((x[k] - y[k]).abs() <= 1e-14 * scale, "{which:?} {k}");
                assert!((z[k] - y[k]).abs() <= 1e-14 * scale, "{which:?} {k}");
            }
        }
    }

    #[test]
    fn full_is_sum_of_parts_and_zero_maps_to_zero() {
        let p = set(SetId::Set2);
        let g = sample_grid(9);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        assert!(ops.apply(Which::FullD, &vec![0.0; g.len()]).unwrap().iter().all(|&x| x == 0.0));
        let v: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let parts: Vec<Vec<f64>> = [Which::Mixed, Which::Dir1, Which::Dir2].iter().map(|&w| ops.apply(w, &v).unwrap()).collect();
        let full = ops.apply(Which::FullD, &v).unwrap();
        for k in 0..v.len() {
            assert_eq!(full[k], parts[0][k] + parts[1][k] + parts[2][k]);
        }
        assert!(matches!(ops.apply(Which::Dir1, &v[1..]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn structure_of_directional_matrices() {
        let p = set(SetId::Set3);
        let g = sample_grid(8);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let n1 = 9;
        let (a1, a2, am) = (ops.matrix(Which::Dir1), ops.matrix(Which::Dir2), ops.matrix(Which::Mixed));
        for r in 0..g.len() {
            for (c, _) in a1.row(r) {
                assert_eq!(c / n1, r / n1);
                assert!((c % n1).abs_diff(r % n1) <= 1);
            }
            for (c, _) in a2.row(r) {
                assert_eq!(c % n1, r % n1);
                assert!((c / n1).abs_diff(r / n1) <= 1);
            }
            assert!(am.row(r).count() <= 9);
            let (i, j) = (r % n1, r / n1);
            if i == 0 || j == 0 {
                assert_eq!(am.row(r).count(), 0);
            }
        }
        // far boundary rows: backward first difference, no diffusion
        let s = g.axis1.nodes();
        let hm = g.axis1.h(8);
        let p1 = ops.direction_block(1);
        let drift = p.r - p.lambda * p.expected_relative_jump_size(Asset::First);
        assert!(close(p1.sub[8], -drift * s[8] / hm, 1e-14));
        assert!(close(p1.diag[8], drift * s[8] / hm - 0.5 * (p.r + p.lambda), 1e-14));
    }

    #[test]
    fn swapping_directions_exchanges_dir_operators() {
        let mut p = set(SetId::Set1);
        p.sigma2 = p.sigma1;
        p.gamma2 = p.gamma1;
        p.delta2 = p.delta1;
        let g = sample_grid(7);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let n1 = 8;
        let swap = |v: &[f64]| (0..v.len()).map(|k| v[(k / n1) + (k % n1) * n1]).collect::<Vec<f64>>();
        let v: Vec<f64> = (0..g.len()).map(|k| (k as f64).cos()).collect();
        let lhs = swap(&ops.apply(Which::Dir1, &swap(&v)).unwrap());
        let rhs = ops.apply(Which::Dir2, &v).unwrap();
        for k in 0..v.len() {
            assert!((lhs[k] - rhs[k]).abs() < 1e-12 * (1.0 + rhs[k].abs()));
        }
    }

    #[test]
    fn banded_shift_matches_sparse() {
        let p = set(SetId::Set2);
        let g = sample_grid(6);
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let band = ops.shifted_full_banded(0.3);
        let v: Vec<f64> = (0..g.len()).map(|k| (k as f64 * 1.3).sin()).collect();
        let ad = ops.apply(Which::FullD, &v).unwrap();
        let bv = band.matvec(&v);
        for k in 0..v.len() {
            assert!((bv[k] - (v[k] - 0.3 * ad[k])).abs() < 1e-10);
        }
        let lu = BandedLu::factor(&band).unwrap();
        let mut x = bv.clone();
        lu.solve_in_place(&mut x);
        for k in 0..v.len() {
            assert!((x[k] - v[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_precision_instantiation() {
        let p: ModelParams<f32> = set(SetId::Set1).cast();
        let g = build_grid(&GridSpec::<f32>::new(PayoffKind::PutOnMin, 10, 100.0, 500.0)).unwrap();
        let ops = OperatorSet::assemble(&p, &g).unwrap();
        let v = vec![1.0f32; g.len()];
        let out = ops.apply(Which::FullD, &v).unwrap();
        assert!((out[g.index(5, 5)] + (p.r + p.lambda)).abs() < 1e-4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weights_are_exact_on_quadratics(h1 in 0.01f64..10.0, h2 in 0.01f64..10.0, s in -5.0f64..5.0) {
            let f1 = central_first_derivative_weights(h1, h2);
            let f2 = central_second_derivative_weights(h1, h2);
            let u = |x: f64| x * x;
            prop_assert!((f1.w_minus1 + f1.w_0 + f1.w_plus1).abs() < 1e-10 * (1.0 / h1 + 1.0 / h2));
            prop_assert!((-f1.w_minus1 * h1 + f1.w_plus1 * h2 - 1.0).abs() < 1e-12);
            let d1 = f1.apply(u(s - h1), u(s), u(s + h2));
            let d2 = f2.apply(u(s - h1), u(s), u(s + h2));
            let scale = (s.abs() + h1 + h2).powi(2) * (1.0 / h1 + 1.0 / h2).powi(2);
            prop_assert!((d1 - 2.0 * s).abs() < 1e-13 * scale);
            prop_assert!((d2 - 2.0).abs() < 1e-13 * scale);
        }

        #[test]
        fn interior_rows_exact_on_quadratics(
            cuts1 in proptest::collection::vec(0.5f64..3.0, 6..12),
            cuts2 in proptest::collection::vec(0.5f64..3.0, 6..12),
            q in proptest::array::uniform6(-1.0f64..1.0),
        ) {
            let axis = |c: &[f64]| {
                let mut s = vec![0.0];
                for w in c { s.push(s.last().unwrap() + 20.0 * w); }
                s
            };
            let g = SpatialGrid::from_axes(axis(&cuts1), axis(&cuts2)).unwrap();
            let p = set(SetId::Set3);
            let ops = OperatorSet::assemble(&p, &g).unwrap();
            let f = |a: f64, b: f64| q[0] + q[1] * a + q[2] * b + q[3] * a * a + q[4] * a * b + q[5] * b * b;
            let (k1, k2) = (p.expected_relative_jump_size(Asset::First), p.expected_relative_jump_size(Asset::Second));
            let exact = |a: f64, b: f64| {
                let (fa, fb) = (q[1] + 2.0 * q[3] * a + q[4] * b, q[2] + q[4] * a + 2.0 * q[5] * b);
                0.5 * p.sigma1.powi(2) * a * a * 2.0 * q[3]
                    + 0.5 * p.sigma2.powi(2) * b * b * 2.0 * q[5]
                    + p.rho * p.sigma1 * p.sigma2 * a * b * q[4]
                    + (p.r - p.lambda * k1) * a * fa
                    + (p.r - p.lambda * k2) * b * fb
                    - (p.r + p.lambda) * f(a, b)
            };
            let v: Vec<f64> = (0..g.len()).map(|k| { let (a, b) = g.node(k % (g.m1() + 1), k / (g.m1() + 1)); f(a, b) }).collect();
            let out = ops.apply(Which::FullD, &v).unwrap();
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) * 10.0;
            for j in 1..g.m2() {
                for i in 1..g.m1() {
                    let (a, b) = g.node(i, j);
                    prop_assert!((out[g.index(i, j)] - exact(a, b)).abs() < 1e-12 * scale);
                }
            }
        }
    }
}
