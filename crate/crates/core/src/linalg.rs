// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex kernels used by the evolution and reduction paths.
//!
//! Complex products are carried out as four real products so that they run
//! through nalgebra's optimized `f64` GEMM. The LU factorization is written
//! out here because the condition estimate needs solves with both `A` and
//! `Aᴴ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// A complex matrix stored as separate real and imaginary planes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitMatrix {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl SplitMatrix {
    pub fn from_complex(m: &CMatrix) -> Self {
        Self {
            re: m.map(|z| z.re),
            im: m.map(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> CMatrix {
        self.re.zip_map(&self.im, C64::new)
    }

    pub fn mul(&self, rhs: &SplitMatrix) -> SplitMatrix {
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        SplitMatrix { re, im }
    }
}

/// Complex matrix product through the real GEMM.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    SplitMatrix::from_complex(a)
        .mul(&SplitMatrix::from_complex(b))
        .to_complex()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus of `m - mᵀ`.
pub fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    worst
}

/// Whether a real symmetric matrix admits a Cholesky factorization.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    Cholesky::new(m.clone()).is_some()
}

pub fn real_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m)
}

/// Matrix 1-norm (largest column sum of moduli).
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization with partial pivoting, `P·A = L·U`, stored in place.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    lu: CMatrix,
    /// Row swapped with row `k` at elimination step `k`.
    swaps: Vec<usize>,
    singular: bool,
}

impl ComplexLu {
    pub fn new(mut a: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let mut swaps = Vec::with_capacity(n);
        let mut singular = false;
        let data = a.as_mut_slice();
        for k in 0..n {
            let col = k * n;
            let mut p = k;
            let mut best = 0.0;
            for i in k..n {
                let z = data[col + i];
                let mag = z.re.abs() + z.im.abs();
                if mag > best {
                    best = mag;
                    p = i;
                }
            }
            swaps.push(p);
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    data.swap(j * n + k, j * n + p);
                }
            }
            let inv_pivot = data[col + k].inv();
            for i in (k + 1)..n {
                data[col + i] *= inv_pivot;
            }
            for j in (k + 1)..n {
                let ukj = data[j * n + k];
                if ukj == C64::new(0.0, 0.0) {
                    continue;
                }
                let (left, right) = data.split_at_mut(j * n);
                let lcol = &left[col + k + 1..col + n];
                let target = &mut right[k + 1..n];
                for (t, l) in target.iter_mut().zip(lcol) {
                    *t -= l * ukj;
                }
            }
        }
        Ok(Self {
            lu: a,
            swaps,
            singular,
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    fn solve_column(&self, b: &mut [C64]) {
        let n = self.dim();
        let data = self.lu.as_slice();
        for (k, &p) in self.swaps.iter().enumerate() {
            b.swap(k, p);
        }
        for k in 0..n {
            let bk = b[k];
            if bk == C64::new(0.0, 0.0) {
                continue;
            }
            let lcol = &data[k * n + k + 1..(k + 1) * n];
            for (bi, l) in b[k + 1..].iter_mut().zip(lcol) {
                *bi -= l * bk;
            }
        }
        for k in (0..n).rev() {
            b[k] /= data[k * n + k];
            let bk = b[k];
            let ucol = &data[k * n..k * n + k];
            for (bi, u) in b[..k].iter_mut().zip(ucol) {
                *bi -= u * bk;
            }
        }
    }

    /// Solves `A·X = B` for every column of `B` in place.
    pub fn solve_in_place(&self, b: &mut CMatrix) -> Result<()> {
        if b.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: b.nrows(),
            });
        }
        if self.singular {
            return Err(Error::SingularEvolution {
                condition: f64::INFINITY,
            });
        }
        let n = self.dim();
        for col in b.as_mut_slice().chunks_exact_mut(n) {
            self.solve_column(col);
        }
        Ok(())
    }

    fn solve_vector(&self, mut b: DVector<C64>) -> DVector<C64> {
        self.solve_column(b.as_mut_slice());
        b
    }

    /// Solves `Aᴴ·x = b`.
    fn solve_adjoint_vector(&self, mut b: DVector<C64>) -> DVector<C64> {
        let n = self.dim();
        let data = self.lu.as_slice();
        // Uᴴ z = b, forward.
        for k in 0..n {
            let ucol = &data[k * n..k * n + k];
            let dot: C64 = ucol.iter().zip(b.iter()).map(|(u, z)| u.conj() * z).sum();
            b[k] = (b[k] - dot) / data[k * n + k].conj();
        }
        // Lᴴ w = z, backward.
        for k in (0..n).rev() {
            let lcol = &data[k * n + k + 1..(k + 1) * n];
            let dot: C64 = lcol
                .iter()
                .zip(b.iter().skip(k + 1))
                .map(|(l, w)| l.conj() * w)
                .sum();
            b[k] -= dot;
        }
        for (k, &p) in self.swaps.iter().enumerate().rev() {
            b.swap_rows(k, p);
        }
        b
    }

    /// Estimate of `‖A⁻¹‖₁` by Hager's method with Higham's refinements.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.dim();
        if self.singular {
            return f64::INFINITY;
        }
        let l1 = |v: &DVector<C64>| v.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = DVector::from_element(n, C64::new(1.0 / n as f64, 0.0));
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve_vector(x.clone());
            let norm = l1(&y);
            if iter > 0 && norm <= estimate {
                break;
            }
            estimate = norm;
            let signs = y.map(|z| {
                let m = z.norm();
                if m == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    z / m
                }
            });
            let z = self.solve_adjoint_vector(signs);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x = DVector::from_element(n, C64::new(0.0, 0.0));
            x[j] = C64::new(1.0, 0.0);
        }
        // Alternating test vector guards against the estimate stalling.
        let alt = DVector::from_fn(n, |i, _| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let scale = if n > 1 {
                1.0 + i as f64 / (n - 1) as f64
            } else {
                1.0
            };
            C64::new(sign * scale, 0.0)
        });
        let alt_est = 2.0 * l1(&self.solve_vector(alt)) / (3.0 * n as f64);
        estimate.max(alt_est)
    }
}

/// 1-norm condition estimate of `a` together with its factorization.
pub fn factor_with_condition(a: CMatrix) -> Result<(ComplexLu, f64)> {
    let anorm = norm1(&a);
    let lu = ComplexLu::new(a)?;
    let cond = anorm * lu.inverse_norm1_estimate();
    Ok((lu, cond))
}
