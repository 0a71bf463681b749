// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Everything that can go wrong while building, evolving, or reducing a state.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("internal numerical error: {0}")]
    Internal(String),

    #[error("invalid Gaussian state: {0}")]
    InvalidState(String),

    #[error("evolution matrix is numerically singular (condition estimate {condition:e})")]
    SingularEvolution { condition: f64 },

    #[error("bath block M + M* is not positive definite")]
    NonPositiveBath,

    #[error("reduced state is not positive: Re R11 = {re_r11}, R12 = {r12}")]
    NonPositiveReduced { re_r11: f64, r12: f64 },

    #[error("bath preparation {profile} needs an even bath size, got {n1}")]
    OddBathSize { profile: &'static str, n1: usize },

    #[error("bath preparation {profile} needs at least {min} bath oscillators, got {n1}")]
    BathTooSmall {
        profile: &'static str,
        min: usize,
        n1: usize,
    },

    #[error("initial matrix has a non positive-definite real part (target R12 = {target_r12})")]
    NonPositiveInitial { target_r12: f64 },

    #[error("purity traces do not share one time grid")]
    GridMismatch,

    #[error("quadrature grid too coarse: doubling the grid moved the purity by {change:e}")]
    GridTooCoarse { change: f64 },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_time(self, t: f64) -> Self {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
