// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian pure states `ψ(x) ∝ exp(−½ xᵀ Ω x)` and their exact evolution.
//!
//! In the normal-mode basis the ring is a set of independent oscillators, so
//! the quadratic form evolves by a matrix Möbius map. The production path uses
//!
//! ```text
//! Ω̃(t) = W (Ω̃₀ sin(Wt) − i W cos(Wt))⁻¹ (W sin(Wt) − i Ω̃₀ cos(Wt))
//! ```
//!
//! which equals `g (Ω̃₀ − i f)⁻¹ g − i f` whenever every `sin(ω̃_k t) ≠ 0`
//! but stays finite where the Green-function kernels blow up. Each time is
//! mapped directly from the initial state; there is no time stepping.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, SplitMatrix, C64, I};
use crate::model::{normal_mode_frequencies, DftBasis, ModeSpectrum, ModelParams};

/// Tolerance on `|Ω_jk − Ω_kj|` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Condition estimate above which the Möbius denominator is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Full N-oscillator pure state, held as its complex symmetric matrix `Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    omega: CMatrix,
}

impl GaussianState {
    /// Checks symmetry and positive definiteness of `Re Ω`.
    pub fn new(omega: CMatrix) -> Result<Self> {
        if omega.nrows() != omega.ncols() {
            return Err(Error::DimensionMismatch {
                expected: omega.nrows(),
                got: omega.ncols(),
            });
        }
        let diag = validate_state(&omega);
        if !diag.symmetric {
            return Err(Error::InvalidState(format!(
                "matrix is not symmetric (max |Ω - Ωᵀ| = {:e})",
                diag.max_asymmetry
            )));
        }
        if !diag.posdef {
            return Err(Error::InvalidState(format!(
                "real part is not positive definite (min eigenvalue {:e})",
                diag.min_real_eigenvalue
            )));
        }
        Ok(Self { omega })
    }

    pub fn from_real(omega: &DMatrix<f64>) -> Result<Self> {
        Self::new(omega.map(|x| C64::new(x, 0.0)))
    }

    /// Wraps a matrix produced by the evolution map, which preserves both invariants.
    pub(crate) fn from_evolved(omega: CMatrix) -> Self {
        Self { omega }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.omega
    }

    pub fn into_matrix(self) -> CMatrix {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.omega.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.omega.map(|z| z.im)
    }
}

/// Invariant report for a candidate `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateDiagnostics {
    pub symmetric: bool,
    pub posdef: bool,
    pub max_asymmetry: f64,
    pub min_real_eigenvalue: f64,
}

pub fn validate_state(omega: &CMatrix) -> StateDiagnostics {
    if omega.nrows() != omega.ncols() || omega.nrows() == 0 {
        return StateDiagnostics {
            symmetric: false,
            posdef: false,
            max_asymmetry: f64::INFINITY,
            min_real_eigenvalue: f64::NAN,
        };
    }
    let max_asymmetry = linalg::max_asymmetry(omega);
    let re = omega.map(|z| z.re);
    let sym = (&re + re.transpose()) * 0.5;
    let min_real_eigenvalue = sym
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    StateDiagnostics {
        symmetric: max_asymmetry <= SYMMETRY_TOL,
        posdef: linalg::is_positive_definite(&sym),
        max_asymmetry,
        min_real_eigenvalue,
    }
}

/// How the position-basis form is carried into mode coordinates.
///
/// `Sesquilinear` writes `xᵀΩx = x̃† (S Ω S†) x̃` and reproduces the true
/// wavefunction. `Bilinear` writes it as `x̃ᵀ (S Ω Sᵀ) x̃` and evolves every
/// complex mode coordinate as if it were an independent real oscillator. That
/// runs the reflection-odd modes backwards in time; those modes vanish on
/// oscillator 0, so the reduced state of oscillator 0 (and its purity via the
/// Hermitian cross term) is identical in both frames, while the modulus
/// `|a|` of the bilinear cross term is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeFrame {
    #[default]
    Sesquilinear,
    Bilinear,
}

impl ModeFrame {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeFrame::Sesquilinear => "sesquilinear",
            ModeFrame::Bilinear => "bilinear",
        }
    }
}

impl std::str::FromStr for ModeFrame {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sesquilinear" => Ok(ModeFrame::Sesquilinear),
            "bilinear" => Ok(ModeFrame::Bilinear),
            other => Err(format!(
                "unknown frame '{other}' (expected sesquilinear|bilinear)"
            )),
        }
    }
}

fn check_dim(basis: &DftBasis, m: &CMatrix) -> Result<()> {
    if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            got: m.nrows(),
        });
    }
    Ok(())
}

fn to_frame(omega: &CMatrix, basis: &DftBasis, frame: ModeFrame) -> SplitMatrix {
    let o = SplitMatrix::from_complex(omega);
    match frame {
        ModeFrame::Sesquilinear => basis.split().mul(&o).mul(basis.adjoint_split()),
        ModeFrame::Bilinear => basis.split().mul(&o).mul(basis.split()),
    }
}

fn from_frame(mode: &CMatrix, basis: &DftBasis, frame: ModeFrame) -> CMatrix {
    let m = SplitMatrix::from_complex(mode);
    let out = match frame {
        ModeFrame::Sesquilinear => basis.adjoint_split().mul(&m).mul(basis.split()),
        ModeFrame::Bilinear => basis.conj_split().mul(&m).mul(basis.conj_split()),
    };
    out.to_complex()
}

/// `Ω̃ = S Ω S†`.
pub fn to_mode_basis(state: &GaussianState, basis: &DftBasis) -> Result<CMatrix> {
    check_dim(basis, state.matrix())?;
    Ok(to_frame(state.matrix(), basis, ModeFrame::Sesquilinear).to_complex())
}

/// `Ω = S† Ω̃ S`.
pub fn from_mode_basis(mode: &CMatrix, basis: &DftBasis) -> Result<CMatrix> {
    check_dim(basis, mode)?;
    Ok(from_frame(mode, basis, ModeFrame::Sesquilinear))
}

/// Evolution of one initial state, with its mode-basis matrix cached.
///
/// Immutable after construction, so one evolver can be shared across threads
/// evaluating different times.
#[derive(Debug, Clone)]
pub struct Evolver {
    spectrum: ModeSpectrum,
    basis: DftBasis,
    frame: ModeFrame,
    initial_mode: CMatrix,
}

impl Evolver {
    pub fn new(params: &ModelParams, initial: &GaussianState, frame: ModeFrame) -> Result<Self> {
        Self::with_spectrum(normal_mode_frequencies(params), initial, frame)
    }

    /// Evolver for an arbitrary mode spectrum; the DFT basis matches its length.
    pub fn with_spectrum(
        spectrum: ModeSpectrum,
        initial: &GaussianState,
        frame: ModeFrame,
    ) -> Result<Self> {
        let basis = DftBasis::new(spectrum.len());
        check_dim(&basis, initial.matrix())?;
        let initial_mode = to_frame(initial.matrix(), &basis, frame).to_complex();
        Ok(Self {
            spectrum,
            basis,
            frame,
            initial_mode,
        })
    }

    pub fn frame(&self) -> ModeFrame {
        self.frame
    }

    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    /// Initial matrix in the evolver's mode frame.
    pub fn initial_mode(&self) -> &CMatrix {
        &self.initial_mode
    }

    /// Mode-frame matrix at time `t`.
    pub fn mode_matrix_at(&self, t: f64) -> Result<CMatrix> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "time must be finite and >= 0, got {t}"
            )));
        }
        let w = self.spectrum.freqs();
        let n = w.len();
        let (sin, cos): (Vec<f64>, Vec<f64>) = w.iter().map(|wk| (wk * t).sin_cos()).unzip();
        let x0 = &self.initial_mode;

        let mut denom = CMatrix::from_fn(n, n, |j, k| x0[(j, k)] * sin[k]);
        let mut numer = CMatrix::from_fn(n, n, |j, k| -I * x0[(j, k)] * cos[k]);
        for k in 0..n {
            denom[(k, k)] -= I * (w[k] * cos[k]);
            numer[(k, k)] += C64::new(w[k] * sin[k], 0.0);
        }

        let (lu, condition) = linalg::factor_with_condition(denom)?;
        if !(condition <= SINGULAR_CONDITION) {
            return Err(Error::SingularEvolution { condition });
        }
        lu.solve_in_place(&mut numer)?;
        for (k, wk) in w.iter().enumerate() {
            numer.row_mut(k).scale_mut(*wk);
        }
        Ok(numer)
    }

    /// Position-basis state at time `t`.
    pub fn at(&self, t: f64) -> Result<GaussianState> {
        let mode = self.mode_matrix_at(t)?;
        Ok(GaussianState::from_evolved(from_frame(
            &mode,
            &self.basis,
            self.frame,
        )))
    }
}

/// Maps `state` to time `t` under the ring Hamiltonian.
pub fn evolve(state: &GaussianState, params: &ModelParams, t: f64) -> Result<GaussianState> {
    Evolver::new(params, state, ModeFrame::Sesquilinear)?.at(t)
}

/// The Green-function form `g (Ω̃₀ − i f)⁻¹ g − i f`, valid only away from
/// propagator singularities. Kept as an independent route for cross-checks.
pub fn evolve_propagator_form(
    state: &GaussianState,
    params: &ModelParams,
    t: f64,
) -> Result<GaussianState> {
    let spectrum = normal_mode_frequencies(params);
    let basis = DftBasis::new(params.n());
    let x0 = to_mode_basis(state, &basis)?;
    let kernels = spectrum.propagator(t);
    if kernels.singular {
        return Err(Error::SingularEvolution {
            condition: f64::INFINITY,
        });
    }
    let n = params.n();
    let f = DVector::from_vec(kernels.f.clone());
    let g = DVector::from_vec(kernels.g.clone());
    let mut shifted = x0;
    for k in 0..n {
        shifted[(k, k)] -= I * f[k];
    }
    let inv = shifted.try_inverse().ok_or(Error::SingularEvolution {
        condition: f64::INFINITY,
    })?;
    let mut mode = CMatrix::from_fn(n, n, |j, k| inv[(j, k)] * g[j] * g[k]);
    for k in 0..n {
        mode[(k, k)] -= I * f[k];
    }
    Ok(GaussianState::from_evolved(from_mode_basis(&mode, &basis)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ground_state_matrix;
    use crate::oracle::scalar_evolution;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Random real symmetric matrix with a comfortably positive spectrum.
    fn random_state(n: usize, seed: &[f64]) -> GaussianState {
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            let v = seed[(i * 7 + j * 13) % seed.len()];
            0.3 * v
        });
        m = (&m + m.transpose()) * 0.5;
        for i in 0..n {
            m[(i, i)] += 1.0 + 0.3 * n as f64;
        }
        GaussianState::from_real(&m).unwrap()
    }

    #[test]
    fn rejects_invalid_matrices() {
        let nonsym = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.2), c(0.3), c(1.0)]);
        assert!(matches!(
            GaussianState::new(nonsym),
            Err(Error::InvalidState(_))
        ));
        let indefinite = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        assert!(matches!(
            GaussianState::new(indefinite),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn diagnostics() {
        let id = CMatrix::identity(3, 3);
        let d = validate_state(&id);
        assert!(d.symmetric && d.posdef);
        assert!((d.min_real_eigenvalue - 1.0).abs() < 1e-14);

        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let d = validate_state(&m);
        assert!(d.symmetric && !d.posdef);
        assert!((d.min_real_eigenvalue + 1.0).abs() < 1e-12);

        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.1), c(0.2), c(1.0)]);
        let d = validate_state(&m);
        assert!(!d.symmetric);
        assert!((d.max_asymmetry - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mode_basis_of_scaled_identity() {
        let basis = DftBasis::new(6);
        let state = GaussianState::new(CMatrix::identity(6, 6) * c(2.5)).unwrap();
        let mode = to_mode_basis(&state, &basis).unwrap();
        assert!(linalg::max_abs_diff(&mode, &(CMatrix::identity(6, 6) * c(2.5))) < 1e-13);
    }

    #[test]
    fn mode_basis_diagonalizes_ground_state() {
        let p = ModelParams::new(7, 1.0, 0.8).unwrap();
        let a = ground_state_matrix(&p).unwrap();
        let basis = DftBasis::new(7);
        let mode = to_mode_basis(&GaussianState::from_real(&a).unwrap(), &basis).unwrap();
        let w = normal_mode_frequencies(&p);
        let expected =
            CMatrix::from_diagonal(&DVector::from_iterator(7, w.freqs().iter().map(|x| c(*x))));
        assert!(linalg::max_abs_diff(&mode, &expected) < 1e-10);
    }

    #[test]
    fn mode_basis_round_trip_and_symmetry() {
        let basis = DftBasis::new(5);
        let state = random_state(5, &[0.3, -0.7, 0.1, 0.9, -0.2, 0.5]);
        let mode = to_mode_basis(&state, &basis).unwrap();
        let back = from_mode_basis(&mode, &basis).unwrap();
        assert!(linalg::max_abs_diff(&back, state.matrix()) < 1e-10);
        // Real symmetric Ω gives a Hermitian Ω̃; its conjugate transpose equals itself.
        assert!(linalg::max_abs_diff(&mode, &mode.adjoint()) < 1e-10);
    }

    #[test]
    fn mode_basis_dimension_mismatch() {
        let basis = DftBasis::new(4);
        let state = GaussianState::new(CMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            to_mode_basis(&state, &basis),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_mode_half_period() {
        let spectrum = ModeSpectrum::from_frequencies(vec![1.0]).unwrap();
        let state = GaussianState::new(CMatrix::from_element(1, 1, c(2.0))).unwrap();
        let ev = Evolver::with_spectrum(spectrum, &state, ModeFrame::Sesquilinear).unwrap();
        let out = ev.at(PI / 2.0).unwrap();
        assert!((out.matrix()[(0, 0)] - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn single_mode_eigenstate_is_stationary() {
        let spectrum = ModeSpectrum::from_frequencies(vec![1.7]).unwrap();
        let state = GaussianState::new(CMatrix::from_element(1, 1, c(1.7))).unwrap();
        let ev = Evolver::with_spectrum(spectrum, &state, ModeFrame::Sesquilinear).unwrap();
        for t in [0.0, 0.3, PI / 1.7, 12.0] {
            assert!((ev.at(t).unwrap().matrix()[(0, 0)] - c(1.7)).norm() < 1e-12);
        }
    }

    #[test]
    fn time_zero_is_identity_map() {
        let p = ModelParams::new(6, 1.0, 0.5).unwrap();
        let state = random_state(6, &[0.4, -0.1, 0.8, 0.2, -0.6]);
        for frame in [ModeFrame::Sesquilinear, ModeFrame::Bilinear] {
            let out = Evolver::new(&p, &state, frame).unwrap().at(0.0).unwrap();
            assert!(linalg::max_abs_diff(out.matrix(), state.matrix()) < 1e-10);
        }
    }

    #[test]
    fn ground_state_is_fixed_point() {
        let p = ModelParams::new(9, 1.0, 0.3).unwrap();
        let a = GaussianState::from_real(&ground_state_matrix(&p).unwrap()).unwrap();
        for frame in [ModeFrame::Sesquilinear, ModeFrame::Bilinear] {
            let ev = Evolver::new(&p, &a, frame).unwrap();
            for t in [0.1, 1.0, 10.0, 100.0] {
                let out = ev.at(t).unwrap();
                assert!(linalg::max_abs_diff(out.matrix(), a.matrix()) < 1e-8);
            }
        }
    }

    #[test]
    fn finite_at_propagator_singularity() {
        // λ = 0 makes every mode singular at t = π.
        let p = ModelParams::new(4, 1.0, 0.0).unwrap();
        assert!(p.n() == 4 && crate::model::propagator_diagonals(&p, PI).singular);
        let state = random_state(4, &[0.2, 0.5, -0.3]);
        let out = evolve(&state, &p, PI).unwrap();
        assert!(out
            .matrix()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite()));
        // Half a period of a free oscillator maps x → −x, leaving Ω unchanged.
        assert!(linalg::max_abs_diff(out.matrix(), state.matrix()) < 1e-10);
    }

    #[test]
    fn propagator_form_refuses_singular_times() {
        let p = ModelParams::new(3, 1.0, 0.0).unwrap();
        let state = random_state(3, &[0.1]);
        assert!(matches!(
            evolve_propagator_form(&state, &p, PI),
            Err(Error::SingularEvolution { .. })
        ));
    }

    #[test]
    fn degenerate_initial_state_is_singular() {
        // Ω̃₀ sin − i W cos vanishes for Ω̃₀ = −iW·cot at a chosen t; build it in 1-D.
        let t: f64 = 0.7;
        let omega0 = C64::new(0.0, 1.0) * (t.cos() / t.sin());
        let spectrum = ModeSpectrum::from_frequencies(vec![1.0]).unwrap();
        let ev = Evolver {
            spectrum,
            basis: DftBasis::new(1),
            frame: ModeFrame::Sesquilinear,
            initial_mode: CMatrix::from_element(1, 1, omega0),
        };
        assert!(matches!(ev.at(t), Err(Error::SingularEvolution { .. })));
    }

    fn arb_state(n: usize) -> impl Strategy<Value = GaussianState> {
        proptest::collection::vec(-0.5f64..0.5, n * n).prop_map(move |v| {
            let mut m = DMatrix::from_vec(n, n, v);
            m = (&m + m.transpose()) * 0.5;
            for i in 0..n {
                m[(i, i)] += 0.6 + 0.5 * n as f64;
            }
            GaussianState::from_real(&m).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn stable_form_matches_green_function_form(
            state in arb_state(5),
            lambda in 0.0f64..1.5,
            t in 0.05f64..60.0,
        ) {
            let p = ModelParams::new(5, 1.0, lambda).unwrap();
            let w = normal_mode_frequencies(&p);
            prop_assume!(w.freqs().iter().all(|wk| (wk * t).sin().abs() > 0.1));
            let a = evolve(&state, &p, t).unwrap();
            let b = evolve_propagator_form(&state, &p, t).unwrap();
            prop_assert!(linalg::max_abs_diff(a.matrix(), b.matrix()) < 1e-8);
        }

        #[test]
        fn evolution_preserves_invariants(
            state in arb_state(6),
            lambda in 0.0f64..1.5,
            t in 0.0f64..100.0,
            bilinear in any::<bool>(),
        ) {
            let frame = if bilinear { ModeFrame::Bilinear } else { ModeFrame::Sesquilinear };
            let p = ModelParams::new(6, 1.0, lambda).unwrap();
            let out = Evolver::new(&p, &state, frame).unwrap().at(t).unwrap();
            let d = validate_state(out.matrix());
            prop_assert!(d.max_asymmetry < 1e-9);
            prop_assert!(d.posdef);
        }

        #[test]
        fn single_mode_matches_scalar_map(
            re in 0.1f64..4.0,
            im in -3.0f64..3.0,
            w in 0.2f64..3.0,
            t in 0.0f64..50.0,
        ) {
            let omega0 = C64::new(re, im);
            let spectrum = ModeSpectrum::from_frequencies(vec![w]).unwrap();
            let state = GaussianState::new(CMatrix::from_element(1, 1, omega0)).unwrap();
            let ev = Evolver::with_spectrum(spectrum, &state, ModeFrame::Sesquilinear).unwrap();
            let got = ev.at(t).unwrap().matrix()[(0, 0)];
            prop_assert!((got - scalar_evolution(omega0, w, t)).norm() < 1e-10 * (1.0 + got.norm()));
        }

        #[test]
        fn scalar_map_composes(
            re in 0.1f64..4.0,
            im in -3.0f64..3.0,
            w in 0.2f64..3.0,
            t1 in 0.0f64..20.0,
            t2 in 0.0f64..20.0,
        ) {
            let omega0 = C64::new(re, im);
            let two_step = scalar_evolution(scalar_evolution(omega0, w, t1), w, t2);
            let one_step = scalar_evolution(omega0, w, t1 + t2);
            prop_assert!((two_step - one_step).norm() < 1e-8 * (1.0 + one_step.norm()));
        }
    }
}
