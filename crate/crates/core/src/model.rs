// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! The ring lattice and its normal modes.
//!
//! `N` oscillators sit on a circle with on-site frequency `ω` and a
//! nearest-neighbour spring `λ (x_a − x_{a+1})²`. Translation invariance makes
//! the discrete Fourier transform diagonalize the problem:
//!
//! ```text
//! ω̃_k² = ω² + 4λ sin²(πk/N),   x̃ = S x,   S_jk = exp(−2πi jk/N) / √N
//! ```
//!
//! and the ground state is `exp(−½ xᵀ A_T x)` with `A_T = S† diag(ω̃) S`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, SplitMatrix, C64};

/// Ground-state imaginary residue above which the spectrum symmetry is broken.
const GROUND_STATE_IMAG_TOL: f64 = 1e-8;

/// Threshold on `|sin(ω̃_k t)|` below which a propagator kernel is singular.
pub const PROPAGATOR_SINGULAR_TOL: f64 = 1e-9;

/// Parameters of the ring Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    omega: f64,
    lambda: f64,
}

impl ModelParams {
    pub fn new(n: usize, omega: f64, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "ring size must be >= 2, got {n}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "omega must be > 0, got {omega}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(Self { n, omega, lambda })
    }

    /// Ring with `ω = 1`.
    pub fn with_unit_omega(n: usize, lambda: f64) -> Result<Self> {
        Self::new(n, 1.0, lambda)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of bath oscillators, `N − 1`.
    pub fn bath_size(&self) -> usize {
        self.n - 1
    }
}

/// Normal-mode frequencies `ω̃_k`, `k = 0..N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    freqs: Vec<f64>,
}

impl ModeSpectrum {
    /// Wraps an arbitrary list of positive frequencies.
    ///
    /// Used for single-mode checks; lattice spectra come from
    /// [`normal_mode_frequencies`].
    pub fn from_frequencies(freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() || freqs.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams(
                "mode frequencies must be finite and > 0".into(),
            ));
        }
        Ok(Self { freqs })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

pub fn normal_mode_frequencies(params: &ModelParams) -> ModeSpectrum {
    let n = params.n;
    let omega2 = params.omega * params.omega;
    // k and N−k share one evaluation so the mirror symmetry is bit-exact.
    let freqs = (0..n)
        .map(|k| {
            let k = k.min(n - k);
            let s = (PI * k as f64 / n as f64).sin();
            (omega2 + 4.0 * params.lambda * s * s).sqrt()
        })
        .collect();
    ModeSpectrum { freqs }
}

/// The unitary, symmetric DFT matrix `S` and its adjoint.
#[derive(Debug, Clone)]
pub struct DftBasis {
    s: CMatrix,
    s_split: SplitMatrix,
    s_adj_split: SplitMatrix,
    s_conj_split: SplitMatrix,
}

impl DftBasis {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "DFT basis needs at least one site");
        let norm = 1.0 / (n as f64).sqrt();
        let s = CMatrix::from_fn(n, n, |j, k| {
            // Reduce jk mod N first; the phase stays accurate for large N.
            let phase = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            C64::from_polar(norm, phase)
        });
        let s_split = SplitMatrix::from_complex(&s);
        let s_adj_split = SplitMatrix::from_complex(&s.adjoint());
        let s_conj_split = SplitMatrix {
            re: s_split.re.clone(),
            im: -&s_split.im,
        };
        Self {
            s,
            s_split,
            s_adj_split,
            s_conj_split,
        }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.s
    }

    pub(crate) fn split(&self) -> &SplitMatrix {
        &self.s_split
    }

    pub(crate) fn adjoint_split(&self) -> &SplitMatrix {
        &self.s_adj_split
    }

    /// `S̄`, which equals `S†` because `S` is symmetric.
    pub(crate) fn conj_split(&self) -> &SplitMatrix {
        &self.s_conj_split
    }
}

pub fn dft_matrix(n: usize) -> Result<DftBasis> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "DFT size must be >= 2, got {n}"
        )));
    }
    Ok(DftBasis::new(n))
}

/// `A_T = S† diag(ω̃) S`, the position-basis matrix of the ground state.
pub fn ground_state_matrix(params: &ModelParams) -> Result<DMatrix<f64>> {
    let spectrum = normal_mode_frequencies(params);
    let basis = DftBasis::new(params.n);
    let n = params.n;
    let mut diag_s = basis.split().clone();
    for (k, w) in spectrum.freqs().iter().enumerate() {
        diag_s.re.row_mut(k).scale_mut(*w);
        diag_s.im.row_mut(k).scale_mut(*w);
    }
    let a = basis.adjoint_split().mul(&diag_s);
    let worst_imag = a.im.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if worst_imag > GROUND_STATE_IMAG_TOL {
        return Err(Error::Internal(format!(
            "ground-state matrix has imaginary residue {worst_imag:e}"
        )));
    }
    let re = a.re;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        0.5 * (re[(i, j)] + re[(j, i)])
    }))
}

/// Per-mode Green-function kernels `f_k = ω̃_k cot(ω̃_k t)`, `g_k = ω̃_k / sin(ω̃_k t)`.
///
/// Modes with `|sin(ω̃_k t)| < 1e−9` carry `NaN` in both kernels and set
/// `singular`; no finite stand-in is substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorDiagonals {
    pub t: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub singular: bool,
}

pub fn propagator_diagonals(params: &ModelParams, t: f64) -> PropagatorDiagonals {
    normal_mode_frequencies(params).propagator(t)
}

impl ModeSpectrum {
    pub fn propagator(&self, t: f64) -> PropagatorDiagonals {
        let mut singular = false;
        let (f, g) = self
            .freqs()
            .iter()
            .map(|&w| {
                let (s, c) = (w * t).sin_cos();
                if s.abs() < PROPAGATOR_SINGULAR_TOL {
                    singular = true;
                    (f64::NAN, f64::NAN)
                } else {
                    (w * c / s, w / s)
                }
            })
            .unzip();
        PropagatorDiagonals { t, f, g, singular }
    }
}
