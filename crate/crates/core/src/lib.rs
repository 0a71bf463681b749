// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact Gaussian dynamics of a ring of coupled harmonic oscillators, and the
//! purity of one oscillator after the rest of the ring is traced out.
//!
//! The pieces, in the order a run uses them:
//!
//! * [`model`]: normal-mode frequencies, the DFT basis and the ground state.
//! * [`gaussian`]: pure Gaussian states `ψ ∝ exp(-½ xᵀΩx)` and their exact
//!   time evolution.
//! * [`reduction`]: the reduced state of oscillator 0 and its purity.
//! * [`experiment`]: bath preparations, purity traces and dispersion widths.
//! * [`cli`]: config files and output files.
//! * [`oracle`]: brute-force quadrature and the one-mode closed form, used to
//!   check the fast paths.
//!
//! ```
//! use ring_purity::experiment::{run_experiment, BathId, Case, ExperimentConfig, Window};
//!
//! let cfg = ExperimentConfig {
//!     n: 7,
//!     lambda: 0.1,
//!     case: Case::A,
//!     target_r12: 0.0,
//!     profiles: vec![BathId::Bp1, BathId::Bp2],
//!     t_max: 4.0,
//!     windows: vec![Window::new(0.0, 4.0)],
//!     ..Default::default()
//! };
//! let result = run_experiment(&cfg)?;
//! assert!(result.traces.iter().all(|t| t.mu[0] == 1.0));
//! assert!(result.widths.column("w2")[0] > 0.0);
//! # Ok::<(), ring_purity::error::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod reduction;

/// The guide under `book/`, compiled so its snippets stay in sync.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/ring.md")]
    pub mod ring {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    pub mod evolution {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    pub mod reduction {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    pub mod experiment {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
    #[doc = include_str!("../../../book/src/reproduction.md")]
    pub mod reproduction {}
}
