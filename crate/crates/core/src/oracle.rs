// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Independent checks for the fast paths.
//!
//! [`quadrature_reduce`] builds `ρ₀(x₀, x₀′)` by summing `ψ ψ*` over a
//! uniform grid of bath coordinates and then takes `Tr ρ₀²` by a second sum.
//! It knows nothing about Schur complements or covariance identities, which
//! makes it the arbiter between the two cross-term conventions.
//! [`scalar_evolution`] is the one-mode closed form of the evolution map.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{self, C64, I};

/// Single-mode evolution `ω̃ (ω̃ sin ω̃t − i Ω₀ cos ω̃t) / (Ω₀ sin ω̃t − i ω̃ cos ω̃t)`.
pub fn scalar_evolution(omega0: C64, mode_freq: f64, t: f64) -> C64 {
    let (s, c) = (mode_freq * t).sin_cos();
    mode_freq * (mode_freq * s - I * omega0 * c) / (omega0 * s - I * mode_freq * c)
}

/// Uniform grid of `points_per_axis` nodes on `[−half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            points_per_axis: 256,
        }
    }
}

/// Largest acceptable purity change when the grid is refined twofold.
pub const DOUBLING_TOL: f64 = 1e-4;

const MIN_POINTS: usize = 64;
const WIDTH_IN_STD: f64 = 6.0;

impl QuadratureGrid {
    pub fn new(half_width: f64, points_per_axis: usize) -> Self {
        Self {
            half_width,
            points_per_axis,
        }
    }

    /// Grid wide enough for `state`: at least the default half-width, and
    /// seven position standard deviations.
    pub fn covering(state: &GaussianState, points_per_axis: usize) -> Result<Self> {
        let sigma = max_position_std(state)?;
        Ok(Self::new(
            (7.0 * sigma).max(Self::default().half_width),
            points_per_axis,
        ))
    }

    fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis - 1) as f64
    }

    fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    fn check(&self, state: &GaussianState) -> Result<()> {
        if self.points_per_axis < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per axis, got {}",
                self.points_per_axis
            )));
        }
        let sigma = max_position_std(state)?;
        if self.half_width < WIDTH_IN_STD * sigma {
            return Err(Error::InvalidGrid(format!(
                "half-width {} is below {WIDTH_IN_STD} x largest std {sigma}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Largest `sqrt(⟨x_j²⟩)` with `⟨xxᵀ⟩ = ½ (Re Ω)⁻¹`.
fn max_position_std(state: &GaussianState) -> Result<f64> {
    let re = state.real_part();
    let chol = linalg::real_cholesky(re).ok_or(Error::NonPositiveBath)?;
    let inv = chol.inverse();
    Ok((0..inv.nrows())
        .map(|j| (0.5 * inv[(j, j)]).sqrt())
        .fold(0.0, f64::max))
}

/// Brute-force purity of oscillator 0 for `N ∈ {2, 3}`, checked against a
/// twofold refinement of `grid`.
pub fn quadrature_reduce(state: &GaussianState, grid: &QuadratureGrid) -> Result<f64> {
    grid.check(state)?;
    let coarse = purity_on_grid(state, grid)?;
    let fine_grid = QuadratureGrid::new(grid.half_width, 2 * grid.points_per_axis);
    let fine = purity_on_grid(state, &fine_grid)?;
    let change = (fine - coarse).abs();
    if change > DOUBLING_TOL {
        return Err(Error::GridTooCoarse { change });
    }
    Ok(fine)
}

/// `Tr ρ₀² / (Tr ρ₀)²` on a single grid, without the refinement check.
pub fn purity_on_grid(state: &GaussianState, grid: &QuadratureGrid) -> Result<f64> {
    let n = state.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidGrid(format!(
            "quadrature supports 2 or 3 oscillators, got {n}"
        )));
    }
    let m = grid.points_per_axis;
    let h = grid.spacing();
    let omega = state.matrix();
    let xs: Vec<f64> = (0..m).map(|i| grid.node(i)).collect();

    // ρ₀ = Σ_blocks Ψ_b Ψ_bᴴ, Ψ_b[i, j] = ψ(x₀ = xs[i], x₁ = xs[j], x₂ = block).
    let blocks = if n == 3 { m } else { 1 };
    let mut rho_re = DMatrix::<f64>::zeros(m, m);
    let mut rho_im = DMatrix::<f64>::zeros(m, m);
    let mut psi_re = DMatrix::<f64>::zeros(m, m);
    let mut psi_im = DMatrix::<f64>::zeros(m, m);
    for b in 0..blocks {
        let x2 = if n == 3 { xs[b] } else { 0.0 };
        for j in 0..m {
            let x1 = xs[j];
            for i in 0..m {
                let x0 = xs[i];
                let mut q = omega[(0, 0)] * x0 * x0
                    + omega[(1, 1)] * x1 * x1
                    + 2.0 * omega[(0, 1)] * x0 * x1;
                if n == 3 {
                    q += omega[(2, 2)] * x2 * x2
                        + 2.0 * omega[(0, 2)] * x0 * x2
                        + 2.0 * omega[(1, 2)] * x1 * x2;
                }
                let psi = (-0.5 * q).exp();
                psi_re[(i, j)] = psi.re;
                psi_im[(i, j)] = psi.im;
            }
        }
        // (A + iB)(A − iB)ᵀ = AAᵀ + BBᵀ + i(BAᵀ − ABᵀ)
        rho_re.gemm(1.0, &psi_re, &psi_re.transpose(), 1.0);
        rho_re.gemm(1.0, &psi_im, &psi_im.transpose(), 1.0);
        rho_im.gemm(1.0, &psi_im, &psi_re.transpose(), 1.0);
        rho_im.gemm(-1.0, &psi_re, &psi_im.transpose(), 1.0);
    }
    let bath_measure = h.powi(n as i32 - 1);
    let trace: f64 = (0..m).map(|i| rho_re[(i, i)]).sum::<f64>() * bath_measure * h;
    let square: f64 = rho_re
        .iter()
        .zip(rho_im.iter())
        .map(|(a, b)| a * a + b * b)
        .sum::<f64>()
        * bath_measure
        * bath_measure
        * h
        * h;
    if !(trace > 0.0) {
        return Err(Error::Internal("quadrature trace vanished".into()));
    }
    Ok(square / (trace * trace))
}
