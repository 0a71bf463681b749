// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reduced state of oscillator 0 and its purity.
//!
//! Splitting `Ω` into the corner `Ω₀₀`, the coupling row `v` and the bath
//! block `M`, integrating the bath out of `ψ(x)ψ*(x′)` leaves
//!
//! ```text
//! ρ₀(x, x′) ∝ exp(−½ R₁₁ x² − ½ R₁₁* x′² + R₁₂ x x′)
//! R₁₁ = Ω₀₀ − a,   a = vᵀ (M + M*)⁻¹ v
//! ```
//!
//! and `μ = Tr ρ₀² = sqrt((Re R₁₁ − R₁₂) / (Re R₁₁ + R₁₂))`.
//!
//! The cross term `R₁₂` comes in two flavours. [`R12Mode::Exact`] is the
//! Hermitian form `vᵀ (M + M*)⁻¹ v̄` that the Gaussian integral produces;
//! [`R12Mode::Paper`] is the modulus `|a|` of the bilinear form. They agree
//! whenever `v` is a real vector times a common phase, in particular for a
//! real initial `Ω`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::linalg::{self, C64};

/// Slack below zero on `Re R₁₁ − R₁₂` that is treated as round-off.
pub const PURITY_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum R12Mode {
    /// `R₁₂ = |vᵀ K v|`.
    #[default]
    Paper,
    /// `R₁₂ = vᵀ K v̄`.
    Exact,
}

impl R12Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            R12Mode::Paper => "paper",
            R12Mode::Exact => "exact",
        }
    }
}

impl std::str::FromStr for R12Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" => Ok(R12Mode::Paper),
            "exact" => Ok(R12Mode::Exact),
            other => Err(format!("unknown r12_mode '{other}' (expected paper|exact)")),
        }
    }
}

/// The two numbers that fix the reduced density matrix of oscillator 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub r11: C64,
    pub r12: f64,
    pub mode: R12Mode,
}

impl ReducedState {
    pub fn new(r11: C64, r12: f64, mode: R12Mode) -> Result<Self> {
        if !(r11.re > 0.0) || !(r12 >= 0.0) || r12 > r11.re + PURITY_CLAMP {
            return Err(Error::NonPositiveReduced {
                re_r11: r11.re,
                r12,
            });
        }
        Ok(Self { r11, r12, mode })
    }
}

/// Schur-complement pieces shared by both cross-term modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathContraction {
    /// `a = vᵀ K v`.
    pub bilinear: C64,
    /// `vᵀ K v̄`, real and non-negative.
    pub hermitian: f64,
}

pub fn bath_contraction(state: &GaussianState) -> Result<BathContraction> {
    let omega = state.matrix();
    let n = omega.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: n,
        });
    }
    let nb = n - 1;
    // M + M* = 2 Re M.
    let bath = DMatrix::from_fn(nb, nb, |i, j| {
        omega[(i + 1, j + 1)].re + omega[(j + 1, i + 1)].re
    });
    let chol = linalg::real_cholesky(bath).ok_or(Error::NonPositiveBath)?;
    let v_re = DVector::from_fn(nb, |k, _| omega[(0, k + 1)].re);
    let v_im = DVector::from_fn(nb, |k, _| omega[(0, k + 1)].im);
    let y_re = chol.solve(&v_re);
    let y_im = chol.solve(&v_im);
    let mut bilinear = C64::new(0.0, 0.0);
    let mut hermitian = 0.0;
    for k in 0..nb {
        let v = C64::new(v_re[k], v_im[k]);
        let y = C64::new(y_re[k], y_im[k]);
        bilinear += v * y;
        hermitian += (y * v.conj()).re;
    }
    Ok(BathContraction {
        bilinear,
        hermitian,
    })
}

pub fn reduce(state: &GaussianState, mode: R12Mode) -> Result<ReducedState> {
    let contraction = bath_contraction(state)?;
    let r11 = state.matrix()[(0, 0)] - contraction.bilinear;
    let r12 = match mode {
        R12Mode::Paper => contraction.bilinear.norm(),
        R12Mode::Exact => contraction.hermitian.max(0.0),
    };
    ReducedState::new(r11, r12, mode)
}

pub fn purity(r: &ReducedState) -> Result<f64> {
    let re = r.r11.re;
    let mut gap = re - r.r12;
    if gap < -PURITY_CLAMP {
        return Err(Error::NonPositiveReduced {
            re_r11: re,
            r12: r.r12,
        });
    }
    if gap < 0.0 {
        gap = 0.0;
    }
    Ok((gap / (re + r.r12)).sqrt())
}

/// Purity from the single-oscillator covariance block.
///
/// Uses the pure-Gaussian moments `⟨xxᵀ⟩ = ½ R⁻¹`, `sym⟨xpᵀ⟩ = −½ R⁻¹ J`,
/// `⟨ppᵀ⟩ = ½ (R + J R⁻¹ J)` with `Ω = R + iJ`, and `μ = 1 / (2 √det σ₀)`.
/// Independent of [`reduce`]; works for any `N ≥ 1`.
pub fn covariance_purity(state: &GaussianState) -> Result<f64> {
    let re = state.real_part();
    let im = state.imag_part();
    let n = re.nrows();
    let chol = linalg::real_cholesky((&re + re.transpose()) * 0.5).ok_or(Error::NonPositiveBath)?;
    // R⁻¹ e₀ and R⁻¹ J are all that the (0, 0) entries need.
    let mut e0 = DVector::zeros(n);
    e0[0] = 1.0;
    let r_inv_e0 = chol.solve(&e0);
    let r_inv_j = chol.solve(&im);
    let xx = 0.5 * r_inv_e0[0];
    let xp = -0.5 * r_inv_j[(0, 0)];
    // (J R⁻¹ J)₀₀ = J₀· (R⁻¹ J)·₀
    let j_rinv_j: f64 = (0..n).map(|k| im[(0, k)] * r_inv_j[(k, 0)]).sum();
    let pp = 0.5 * (re[(0, 0)] + j_rinv_j);
    let det = xx * pp - xp * xp;
    if !(det > 0.0) {
        return Err(Error::Internal(format!(
            "covariance determinant {det:e} is not positive"
        )));
    }
    Ok(1.0 / (2.0 * det.sqrt()))
}

/// Reduce-then-purity convenience.
pub fn state_purity(state: &GaussianState, mode: R12Mode) -> Result<f64> {
    purity(&reduce(state, mode)?)
}
