// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bath preparations, purity traces, and dispersion widths.
//!
//! Every profile of one case starts from the same reduced state of
//! oscillator 0 and differs only in how the bath is prepared. If the reduced
//! dynamics were Markovian, their purity traces would coincide; the
//! dispersion width measures how far apart they drift.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{Evolver, GaussianState, ModeFrame};
use crate::linalg;
use crate::model::ModelParams;
use crate::reduction::{state_purity, R12Mode};

/// Times closer than this to a window edge count as inside it.
const WINDOW_EDGE_TOL: f64 = 1e-9;

/// One of the five bath preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathId {
    Bp1,
    Bp2,
    Bp3,
    Bp4,
    Bp5,
}

impl BathId {
    pub const ALL: [BathId; 5] = [
        BathId::Bp1,
        BathId::Bp2,
        BathId::Bp3,
        BathId::Bp4,
        BathId::Bp5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BathId::Bp1 => "bp1",
            BathId::Bp2 => "bp2",
            BathId::Bp3 => "bp3",
            BathId::Bp4 => "bp4",
            BathId::Bp5 => "bp5",
        }
    }
}

impl fmt::Display for BathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BathId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        BathId::ALL
            .into_iter()
            .find(|id| id.as_str() == lower)
            .ok_or_else(|| format!("unknown bath profile '{}' (expected bp1..bp5)", s.trim()))
    }
}

/// Diagonal of the bath block of the initial matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathProfile {
    pub id: BathId,
    pub diag: Vec<f64>,
    pub seed: u64,
}

/// Builds the bath diagonal for `n1` bath oscillators.
///
/// Labels in the descriptions below are 1-based oscillator labels.
/// BP1 is all ones; BP2 puts 1.5 on oscillator 1 and 0.5 on oscillator 2;
/// BP3 does the same at `n1/2` and `n1/2 + 1`; BP4 sets the first half to 1.5
/// and the second to 0.5; BP5 scatters the same values by a seeded shuffle.
pub fn bath_profile(id: BathId, n1: usize, seed: u64) -> Result<BathProfile> {
    let name = id.as_str();
    if n1 < 2 {
        return Err(Error::BathTooSmall {
            profile: name,
            min: 2,
            n1,
        });
    }
    if matches!(id, BathId::Bp3 | BathId::Bp4 | BathId::Bp5) && n1 % 2 == 1 {
        return Err(Error::OddBathSize { profile: name, n1 });
    }
    let half = n1 / 2;
    let mut diag = vec![1.0; n1];
    match id {
        BathId::Bp1 => {}
        BathId::Bp2 => {
            diag[0] = 1.5;
            diag[1] = 0.5;
        }
        BathId::Bp3 => {
            diag[half - 1] = 1.5;
            diag[half] = 0.5;
        }
        BathId::Bp4 | BathId::Bp5 => {
            diag[..half].fill(1.5);
            diag[half..].fill(0.5);
            if id == BathId::Bp5 {
                diag.shuffle(&mut SplitMix64::seed_from_u64(seed));
            }
        }
    }
    Ok(BathProfile { id, diag, seed })
}

/// Uniform coupling `c` between oscillator 0 and a diagonal bath such that
/// the initial cross term equals `target_r12`.
pub fn solve_uniform_coupling(target_r12: f64, bath_diag: &[f64]) -> f64 {
    if target_r12 == 0.0 {
        return 0.0;
    }
    let sum: f64 = bath_diag.iter().map(|d| 0.5 / d).sum();
    (target_r12 / sum).sqrt()
}

/// Initial preparation of oscillator 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// Pure reduced state, no initial coupling to the bath.
    A,
    /// Mixed reduced state with cross term 0.325.
    B,
}

impl Case {
    pub fn default_target(self) -> f64 {
        match self {
            Case::A => 0.0,
            Case::B => 0.325,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Case::A => "A",
            Case::B => "B",
        }
    }
}

impl FromStr for Case {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(Case::A),
            "B" | "b" => Ok(Case::B),
            other => Err(format!("unknown case '{other}' (expected A|B)")),
        }
    }
}

/// Closed time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo - WINDOW_EDGE_TOL && t <= self.hi + WINDOW_EDGE_TOL
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Parses `"0:20;20:40"`.
pub fn parse_windows(text: &str) -> std::result::Result<Vec<Window>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("window '{pair}' is not lo:hi"))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad window bound '{lo}'"))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad window bound '{hi}'"))?;
            Ok(Window::new(lo, hi))
        })
        .collect()
}

pub fn default_windows() -> Vec<Window> {
    (0..5)
        .map(|i| Window::new(20.0 * i as f64, 20.0 * (i + 1) as f64))
        .collect()
}

/// A named set of profiles whose traces are compared pairwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthSubset {
    pub name: String,
    pub members: Vec<BathId>,
}

impl WidthSubset {
    pub fn new(name: impl Into<String>, members: &[BathId]) -> Self {
        Self {
            name: name.into(),
            members: members.to_vec(),
        }
    }
}

/// `w2 = {bp1, bp2}`, `w3 = {bp1, bp3, bp5}`, `w5 = {bp1..bp5}`.
pub fn standard_subsets() -> Vec<WidthSubset> {
    use BathId::*;
    vec![
        WidthSubset::new("w2", &[Bp1, Bp2]),
        WidthSubset::new("w3", &[Bp1, Bp3, Bp5]),
        WidthSubset::new("w5", &[Bp1, Bp2, Bp3, Bp4, Bp5]),
    ]
}

/// Parses `"w2:bp1,bp2;mine:bp3,bp4"`.
pub fn parse_subsets(text: &str) -> std::result::Result<Vec<WidthSubset>, String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (name, members) = entry
                .split_once(':')
                .ok_or_else(|| format!("subset '{entry}' is not name:bpX,bpY"))?;
            let members = members
                .split(',')
                .map(BathId::from_str)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(WidthSubset::new(name.trim(), &members))
        })
        .collect()
}

/// Everything that defines one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub omega: f64,
    pub lambda: f64,
    pub case: Case,
    pub target_r12: f64,
    pub profiles: Vec<BathId>,
    pub t_max: f64,
    pub dt: f64,
    pub windows: Vec<Window>,
    pub seed: u64,
    pub r12_mode: R12Mode,
    pub frame: ModeFrame,
    /// Explicit width subsets; `None` uses [`standard_subsets`].
    pub subsets: Option<Vec<WidthSubset>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 101,
            omega: 1.0,
            lambda: 0.1,
            case: Case::A,
            target_r12: 0.0,
            profiles: BathId::ALL.to_vec(),
            t_max: 100.0,
            dt: 0.02,
            windows: default_windows(),
            seed: 0,
            r12_mode: R12Mode::Paper,
            frame: ModeFrame::Sesquilinear,
            subsets: None,
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.omega, self.lambda)
    }

    /// Number of grid intervals; `t_max` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::Validation(format!(
                "t_max must be >= 0, got {}",
                self.t_max
            )));
        }
        let steps = (self.t_max / self.dt).round();
        if (steps * self.dt - self.t_max).abs() > 1e-9 * self.t_max.max(1.0) {
            return Err(Error::Validation(format!(
                "t_max = {} is not a whole number of dt = {} steps",
                self.t_max, self.dt
            )));
        }
        Ok(steps as usize)
    }

    /// `0, dt, 2 dt, …, t_max`.
    pub fn times(&self) -> Result<Vec<f64>> {
        let steps = self.steps()?;
        Ok((0..=steps).map(|i| i as f64 * self.dt).collect())
    }

    pub fn subsets(&self) -> Vec<WidthSubset> {
        self.subsets.clone().unwrap_or_else(standard_subsets)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()
            .map_err(|e| Error::Validation(e.to_string()))?;
        self.steps()?;
        if self.case == Case::A && self.target_r12 != 0.0 {
            return Err(Error::Validation(format!(
                "case A requires target_r12 = 0, got {}",
                self.target_r12
            )));
        }
        if !(self.target_r12 >= 0.0 && self.target_r12.is_finite()) {
            return Err(Error::Validation(format!(
                "target_r12 must be >= 0, got {}",
                self.target_r12
            )));
        }
        if self.profiles.is_empty() {
            return Err(Error::Validation("no bath profiles selected".into()));
        }
        let unique: BTreeSet<_> = self.profiles.iter().collect();
        if unique.len() != self.profiles.len() {
            return Err(Error::Validation("bath profiles listed twice".into()));
        }
        for w in &self.windows {
            if !(w.lo >= 0.0 && w.lo < w.hi && w.hi <= self.t_max + WINDOW_EDGE_TOL) {
                return Err(Error::Validation(format!(
                    "window {w} must satisfy 0 <= lo < hi <= t_max = {}",
                    self.t_max
                )));
            }
        }
        if let Some(subsets) = &self.subsets {
            for s in subsets {
                if let Some(missing) = s.members.iter().find(|m| !unique.contains(m)) {
                    return Err(Error::Validation(format!(
                        "subset {} uses {missing}, which is not among the profiles",
                        s.name
                    )));
                }
            }
        }
        for &id in &self.profiles {
            bath_profile(id, self.n - 1, self.seed)
                .map_err(|e| Error::Validation(e.to_string()))?;
        }
        Ok(())
    }

    pub fn bath_profiles(&self) -> Result<Vec<BathProfile>> {
        self.profiles
            .iter()
            .map(|&id| bath_profile(id, self.n - 1, self.seed))
            .collect()
    }
}

/// Real symmetric initial matrix: `Ω₀₀ = 1`, bath diagonal from `profile`,
/// uniform coupling in row and column 0, zero bath-bath couplings.
pub fn build_initial_omega(
    config: &ExperimentConfig,
    profile: &BathProfile,
) -> Result<GaussianState> {
    let n = config.n;
    if profile.diag.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: profile.diag.len(),
        });
    }
    let c = solve_uniform_coupling(config.target_r12, &profile.diag);
    let mut omega = DMatrix::<f64>::zeros(n, n);
    omega[(0, 0)] = 1.0;
    for (k, &d) in profile.diag.iter().enumerate() {
        omega[(k + 1, k + 1)] = d;
        omega[(0, k + 1)] = c;
        omega[(k + 1, 0)] = c;
    }
    if !linalg::is_positive_definite(&omega) {
        return Err(Error::NonPositiveInitial {
            target_r12: config.target_r12,
        });
    }
    GaussianState::from_real(&omega)
}

/// Purity of oscillator 0 on the run's time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityTrace {
    pub profile: BathId,
    pub times: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Evolves one initial state over `times` in parallel and records the purity.
pub fn purity_series(
    params: &ModelParams,
    initial: &GaussianState,
    times: &[f64],
    mode: R12Mode,
    frame: ModeFrame,
) -> Result<Vec<f64>> {
    let evolver = Evolver::new(params, initial, frame)?;
    times
        .par_iter()
        .map(|&t| {
            evolver
                .at(t)
                .and_then(|s| state_purity(&s, mode))
                .map_err(|e| e.at_time(t))
        })
        .collect()
}

pub fn purity_trace(config: &ExperimentConfig, profile: &BathProfile) -> Result<PurityTrace> {
    let params = config.params()?;
    let initial = build_initial_omega(config, profile)?;
    let times = config.times()?;
    let mu = purity_series(&params, &initial, &times, config.r12_mode, config.frame)?;
    Ok(PurityTrace {
        profile: profile.id,
        times,
        mu,
    })
}

/// One entry of a [`WidthTable`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub window: Window,
    pub subset: String,
    pub members: Vec<BathId>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WidthTable {
    pub rows: Vec<WidthRow>,
}

impl WidthTable {
    /// Widths of one subset in window order.
    pub fn column(&self, subset: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.subset == subset)
            .map(|r| r.width)
            .collect()
    }

    pub fn get(&self, subset: &str, window: &Window) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.subset == subset && r.window == *window)
            .map(|r| r.width)
    }

    /// True when every subset's width is at most that of each superset on
    /// the same window.
    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(|a| {
            self.rows.iter().all(|b| {
                a.window != b.window
                    || !a.members.iter().all(|m| b.members.contains(m))
                    || a.width <= b.width
            })
        })
    }
}

fn check_grids(traces: &[PurityTrace]) -> Result<()> {
    let Some(first) = traces.first() else {
        return Ok(());
    };
    for t in traces {
        if t.times != first.times || t.mu.len() != t.times.len() {
            return Err(Error::GridMismatch);
        }
    }
    Ok(())
}

/// Largest pairwise purity gap among `members` over the grid points of `window`.
fn window_width(traces: &[&PurityTrace], window: &Window) -> f64 {
    let Some(first) = traces.first() else {
        return 0.0;
    };
    first
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| window.contains(t))
        .map(|(i, _)| {
            let (lo, hi) = traces
                .iter()
                .map(|tr| tr.mu[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                    (lo.min(m), hi.max(m))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Widths for the standard subsets whose members are all present.
pub fn dispersion_width(traces: &[PurityTrace], windows: &[Window]) -> Result<WidthTable> {
    let present: BTreeSet<BathId> = traces.iter().map(|t| t.profile).collect();
    let subsets: Vec<WidthSubset> = standard_subsets()
        .into_iter()
        .filter(|s| s.members.iter().all(|m| present.contains(m)))
        .collect();
    dispersion_width_for(traces, windows, &subsets)
}

/// Widths for explicit subsets; every member must have a trace.
pub fn dispersion_width_for(
    traces: &[PurityTrace],
    windows: &[Window],
    subsets: &[WidthSubset],
) -> Result<WidthTable> {
    check_grids(traces)?;
    let mut rows = Vec::with_capacity(subsets.len() * windows.len());
    for subset in subsets {
        let members = subset
            .members
            .iter()
            .map(|id| {
                traces.iter().find(|t| t.profile == *id).ok_or_else(|| {
                    Error::Validation(format!("subset {} needs a trace for {id}", subset.name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for window in windows {
            rows.push(WidthRow {
                window: *window,
                subset: subset.name.clone(),
                members: subset.members.clone(),
                width: window_width(&members, window),
            });
        }
    }
    Ok(WidthTable { rows })
}

/// Smoothed `(t, μ)` curve for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedTrace {
    pub profile: BathId,
    pub times: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Indices of `n_ctrl` points spread uniformly over `0..len`.
fn stride_indices(len: usize, n_ctrl: usize) -> Vec<usize> {
    let n_ctrl = n_ctrl.clamp(1, len);
    if n_ctrl == 1 {
        return vec![0];
    }
    (0..n_ctrl)
        .map(|i| ((i * (len - 1)) as f64 / (n_ctrl - 1) as f64).round() as usize)
        .collect()
}

/// Evaluates the Bézier curve with the given control values at `u ∈ [0, 1]`.
pub fn de_casteljau(ctrl: &[f64], u: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(ctrl);
    for level in (1..scratch.len()).rev() {
        for i in 0..level {
            scratch[i] = (1.0 - u) * scratch[i] + u * scratch[i + 1];
        }
    }
    scratch.first().copied().unwrap_or(f64::NAN)
}

/// Strides the trace down to `n_ctrl` control points and samples the single
/// Bézier curve through them at `n_out` uniform parameter values. Time and
/// purity are both treated as curve coordinates. `n_ctrl` larger than the
/// trace is capped at its length.
pub fn bezier_smooth(trace: &PurityTrace, n_ctrl: usize, n_out: usize) -> SmoothedTrace {
    let mut out = SmoothedTrace {
        profile: trace.profile,
        times: Vec::with_capacity(n_out),
        mu: Vec::with_capacity(n_out),
    };
    if trace.mu.is_empty() || n_out == 0 {
        return out;
    }
    let idx = stride_indices(trace.mu.len(), n_ctrl);
    let ct: Vec<f64> = idx.iter().map(|&i| trace.times[i]).collect();
    let cm: Vec<f64> = idx.iter().map(|&i| trace.mu[i]).collect();
    let mut scratch = Vec::with_capacity(idx.len());
    for j in 0..n_out {
        let u = if n_out == 1 {
            0.0
        } else {
            j as f64 / (n_out - 1) as f64
        };
        out.times.push(de_casteljau(&ct, u, &mut scratch));
        out.mu.push(de_casteljau(&cm, u, &mut scratch));
    }
    out
}

/// Traces for every configured profile plus their width table.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub profiles: Vec<BathProfile>,
    pub traces: Vec<PurityTrace>,
    pub widths: WidthTable,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let profiles = config.bath_profiles()?;
    let traces = profiles
        .iter()
        .map(|p| purity_trace(config, p))
        .collect::<Result<Vec<_>>>()?;
    let widths = match &config.subsets {
        Some(s) => dispersion_width_for(&traces, &config.windows, s)?,
        None => dispersion_width(&traces, &config.windows)?,
    };
    Ok(ExperimentResult {
        profiles,
        traces,
        widths,
    })
}

/// Angular frequency of the strongest periodogram peak after removing the
/// least-squares linear trend. `times` must be uniformly spaced.
pub fn dominant_angular_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 4 || times.len() != n {
        return None;
    }
    let dt = times[1] - times[0];
    let nf = n as f64;
    let t_mean = times.iter().sum::<f64>() / nf;
    let v_mean = values.iter().sum::<f64>() / nf;
    let sxx: f64 = times.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = times
        .iter()
        .zip(values)
        .map(|(t, v)| (t - t_mean) * (v - v_mean))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid: Vec<f64> = times
        .iter()
        .zip(values)
        .map(|(t, v)| v - v_mean - slope * (t - t_mean))
        .collect();

    let power = |k: usize| {
        let step = 2.0 * std::f64::consts::PI * k as f64 / nf;
        let (mut re, mut im) = (0.0, 0.0);
        for (j, r) in resid.iter().enumerate() {
            let (s, c) = (step * j as f64).sin_cos();
            re += r * c;
            im -= r * s;
        }
        re * re + im * im
    };
    let powers: Vec<f64> = (0..=n / 2).into_par_iter().map(power).collect();
    let (k_best, _) =
        powers
            .iter()
            .enumerate()
            .skip(1)
            .fold((0, f64::NEG_INFINITY), |best, (k, &p)| {
                if p > best.1 {
                    (k, p)
                } else {
                    best
                }
            });
    // Parabolic refinement of the peak on log power.
    let mut k = k_best as f64;
    if k_best >= 1 && k_best + 1 < powers.len() {
        let (a, b, c) = (
            powers[k_best - 1].max(f64::MIN_POSITIVE).ln(),
            powers[k_best].max(f64::MIN_POSITIVE).ln(),
            powers[k_best + 1].max(f64::MIN_POSITIVE).ln(),
        );
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            k += 0.5 * (a - c) / denom;
        }
    }
    Some(2.0 * std::f64::consts::PI * k / (nf * dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ground_state_matrix;
    use crate::reduction::reduce;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn config(n: usize, case: Case) -> ExperimentConfig {
        ExperimentConfig {
            n,
            case,
            target_r12: case.default_target(),
            profiles: vec![BathId::Bp1],
            t_max: 2.0,
            dt: 0.5,
            windows: vec![Window::new(0.0, 2.0)],
            ..Default::default()
        }
    }

    #[test]
    fn profile_examples() {
        let bp2 = bath_profile(BathId::Bp2, 10, 0).unwrap();
        assert_eq!(bp2.diag, [1.5, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let bp3 = bath_profile(BathId::Bp3, 10, 0).unwrap();
        assert_eq!(bp3.diag, [1.0, 1.0, 1.0, 1.0, 1.5, 0.5, 1.0, 1.0, 1.0, 1.0]);
        let bp4 = bath_profile(BathId::Bp4, 4, 0).unwrap();
        assert_eq!(bp4.diag, [1.5, 1.5, 0.5, 0.5]);
        let bp5 = bath_profile(BathId::Bp5, 100, 7).unwrap();
        assert_eq!(bp5.diag.iter().filter(|&&d| d == 1.5).count(), 50);
        assert_eq!(bp5.diag.iter().filter(|&&d| d == 0.5).count(), 50);
        assert_eq!(bp5.diag.iter().sum::<f64>(), 100.0);
    }

    #[test]
    fn profile_preconditions() {
        for id in [BathId::Bp3, BathId::Bp4, BathId::Bp5] {
            assert!(matches!(
                bath_profile(id, 11, 0),
                Err(Error::OddBathSize { n1: 11, .. })
            ));
        }
        assert!(bath_profile(BathId::Bp2, 11, 0).is_ok());
        assert!(matches!(
            bath_profile(BathId::Bp2, 1, 0),
            Err(Error::BathTooSmall { .. })
        ));
    }

    #[test]
    fn shuffle_is_seeded() {
        let a = bath_profile(BathId::Bp5, 100, 42).unwrap();
        let b = bath_profile(BathId::Bp5, 100, 42).unwrap();
        let c = bath_profile(BathId::Bp5, 100, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.diag, c.diag);
    }

    #[test]
    fn coupling_examples() {
        assert_eq!(solve_uniform_coupling(0.0, &[1.0; 10]), 0.0);
        assert_relative_eq!(
            solve_uniform_coupling(0.325, &[1.0; 10]),
            0.254_950_975_679_639_2,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            solve_uniform_coupling(0.325, &[1.5, 1.5, 0.5, 0.5]),
            (0.325f64 * 3.0 / 8.0).sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            solve_uniform_coupling(0.325, &[1.5, 1.5, 0.5, 0.5]),
            0.349_106_001_094_223_6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn initial_states() {
        let a = config(11, Case::A);
        let p = bath_profile(BathId::Bp2, 10, 0).unwrap();
        let s = build_initial_omega(&a, &p).unwrap();
        let mut expected = DMatrix::<f64>::identity(11, 11);
        expected[(1, 1)] = 1.5;
        expected[(2, 2)] = 0.5;
        assert_eq!(s.real_part(), expected);
        assert_eq!(s.imag_part(), DMatrix::zeros(11, 11));

        let b = config(11, Case::B);
        let s = build_initial_omega(&b, &bath_profile(BathId::Bp1, 10, 0).unwrap()).unwrap();
        let r = reduce(&s, R12Mode::Paper).unwrap();
        assert_relative_eq!(r.r11.re, 0.675, epsilon = 1e-12);
        assert_relative_eq!(r.r12, 0.325, epsilon = 1e-12);

        let b3 = config(3, Case::B);
        let s = build_initial_omega(&b3, &bath_profile(BathId::Bp1, 2, 0).unwrap()).unwrap();
        let c = 0.325f64.sqrt();
        assert_relative_eq!(s.real_part()[(0, 1)], c, epsilon = 1e-15);
        assert_relative_eq!(s.real_part()[(0, 2)], c, epsilon = 1e-15);
        assert_eq!(s.real_part()[(1, 2)], 0.0);
        assert_relative_eq!(
            reduce(&s, R12Mode::Exact).unwrap().r12,
            0.325,
            epsilon = 1e-12
        );
    }

    #[test]
    fn oversized_target_is_rejected() {
        let mut cfg = config(3, Case::B);
        cfg.target_r12 = 0.6;
        let p = bath_profile(BathId::Bp1, 2, 0).unwrap();
        assert!(matches!(
            build_initial_omega(&cfg, &p),
            Err(Error::NonPositiveInitial { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(11, Case::A);
        cfg.target_r12 = 0.3;
        assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
        let mut cfg = config(12, Case::A);
        cfg.profiles = vec![BathId::Bp3];
        assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
        let mut cfg = config(11, Case::A);
        cfg.dt = 0.3;
        assert!(cfg.validate().is_err());
        let mut cfg = config(11, Case::A);
        cfg.windows = vec![Window::new(0.0, 3.0)];
        assert!(cfg.validate().is_err());
        assert!(config(11, Case::B).validate().is_ok());
        assert_eq!(
            config(11, Case::B).times().unwrap(),
            [0.0, 0.5, 1.0, 1.5, 2.0]
        );
    }

    #[test]
    fn decoupled_case_a_stays_pure() {
        let mut cfg = config(5, Case::A);
        cfg.lambda = 0.0;
        cfg.profiles = vec![BathId::Bp2];
        let tr = purity_trace(&cfg, &bath_profile(BathId::Bp2, 4, 0).unwrap()).unwrap();
        assert!(tr.mu.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ground_state_trace_is_flat() {
        let params = ModelParams::with_unit_omega(7, 0.3).unwrap();
        let s = GaussianState::from_real(&ground_state_matrix(&params).unwrap()).unwrap();
        let times = [0.0, 0.1, 1.0, 10.0, 100.0];
        let mu =
            purity_series(&params, &s, &times, R12Mode::Exact, ModeFrame::Sesquilinear).unwrap();
        for m in &mu {
            assert!((m - mu[0]).abs() < 1e-8);
        }
        assert!(mu[0] < 1.0);
    }

    fn trace(id: BathId, mu: &[f64]) -> PurityTrace {
        PurityTrace {
            profile: id,
            times: (0..mu.len()).map(|i| i as f64 * 10.0).collect(),
            mu: mu.to_vec(),
        }
    }

    #[test]
    fn width_examples() {
        let w = [Window::new(0.0, 20.0)];
        let same = [
            trace(BathId::Bp1, &[1.0, 0.9, 0.8]),
            trace(BathId::Bp2, &[1.0, 0.9, 0.8]),
        ];
        assert_eq!(dispersion_width(&same, &w).unwrap().column("w2"), [0.0]);
        let apart = [trace(BathId::Bp1, &[1.0; 3]), trace(BathId::Bp2, &[0.9; 3])];
        let t = dispersion_width(&apart, &w).unwrap();
        assert_relative_eq!(t.get("w2", &w[0]).unwrap(), 0.1, epsilon = 1e-15);
        assert!(t.get("w3", &w[0]).is_none());

        let short = PurityTrace {
            times: vec![0.0, 10.0],
            mu: vec![1.0, 1.0],
            ..apart[1].clone()
        };
        assert!(matches!(
            dispersion_width(&[apart[0].clone(), short], &w),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn window_edges_are_inclusive() {
        let w = [Window::new(10.0, 20.0)];
        let tr = [
            trace(BathId::Bp1, &[0.0, 1.0, 1.0, 0.0]),
            trace(BathId::Bp2, &[1.0, 0.5, 0.9, 1.0]),
        ];
        assert_relative_eq!(dispersion_width(&tr, &w).unwrap().column("w2")[0], 0.5);
    }

    #[test]
    fn bezier_examples() {
        let flat = trace(BathId::Bp1, &[0.7; 40]);
        let s = bezier_smooth(&flat, 16, 33);
        assert!(s.mu.iter().all(|m| (m - 0.7).abs() < 1e-15));

        let two = PurityTrace {
            profile: BathId::Bp1,
            times: vec![0.0, 1.0],
            mu: vec![0.2, 0.6],
        };
        let s = bezier_smooth(&two, 2, 5);
        for (t, m) in s.times.iter().zip(&s.mu) {
            assert_relative_eq!(*m, 0.2 + 0.4 * t, epsilon = 1e-15);
        }

        let ramp = PurityTrace {
            profile: BathId::Bp1,
            times: (0..100).map(|i| i as f64).collect(),
            mu: (0..100).map(|i| 0.01 * i as f64).collect(),
        };
        let s = bezier_smooth(&ramp, 20, 50);
        assert!((s.mu[0] - 0.0).abs() < 1e-10);
        assert!((s.mu[49] - 0.99).abs() < 1e-10);
        assert!((s.times[49] - 99.0).abs() < 1e-10);
    }

    #[test]
    fn dominant_frequency_of_a_tilted_sine() {
        let times: Vec<f64> = (0..5001).map(|i| i as f64 * 0.02).collect();
        let v: Vec<f64> = times
            .iter()
            .map(|t| 0.3 * (2.3 * t).sin() + 0.001 * t)
            .collect();
        let w = dominant_angular_frequency(&times, &v).unwrap();
        assert!((w - 2.3).abs() < 0.02, "{w}");
    }

    proptest! {
        #[test]
        fn profiles_keep_the_bath_trace(half in 1usize..40, seed in any::<u64>()) {
            let n1 = 2 * half;
            for id in BathId::ALL {
                let p = bath_profile(id, n1, seed).unwrap();
                prop_assert!((p.diag.iter().sum::<f64>() - n1 as f64).abs() < 1e-12);
                prop_assert!(p.diag.iter().all(|d| [0.5, 1.0, 1.5].contains(d)));
            }
        }

        #[test]
        fn cases_pin_the_initial_reduced_state(half in 1usize..15, seed in any::<u64>()) {
            let n = 2 * half + 1;
            for case in [Case::A, Case::B] {
                let cfg = ExperimentConfig {
                    n,
                    case,
                    target_r12: case.default_target(),
                    ..Default::default()
                };
                let reduced: Vec<_> = BathId::ALL
                    .iter()
                    .map(|&id| {
                        let p = bath_profile(id, n - 1, seed).unwrap();
                        reduce(&build_initial_omega(&cfg, &p).unwrap(), R12Mode::Paper).unwrap()
                    })
                    .collect();
                for r in &reduced {
                    prop_assert!((r.r11 - reduced[0].r11).norm() < 1e-12);
                    prop_assert!((r.r12 - reduced[0].r12).abs() < 1e-12);
                    prop_assert!((r.r12 - case.default_target()).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn widths_grow_with_the_subset(
            rows in proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, 5), 12)
        ) {
            let traces: Vec<PurityTrace> = BathId::ALL
                .iter()
                .enumerate()
                .map(|(p, &id)| PurityTrace {
                    profile: id,
                    times: (0..12).map(|i| i as f64).collect(),
                    mu: rows.iter().map(|r| r[p]).collect(),
                })
                .collect();
            let w = [Window::new(0.0, 5.0), Window::new(5.0, 11.0)];
            let table = dispersion_width(&traces, &w).unwrap();
            prop_assert!(table.is_monotone());
            prop_assert!(table.rows.iter().all(|r| r.width >= 0.0));
        }

        #[test]
        fn bezier_stays_in_the_hull(vals in proptest::collection::vec(0.0f64..1.0, 2..300)) {
            let tr = PurityTrace {
                profile: BathId::Bp1,
                times: (0..vals.len()).map(|i| i as f64).collect(),
                mu: vals.clone(),
            };
            let s = bezier_smooth(&tr, 256, 64);
            let idx = stride_indices(vals.len(), 256);
            let lo = idx.iter().map(|&i| vals[i]).fold(f64::INFINITY, f64::min);
            let hi = idx.iter().map(|&i| vals[i]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s.mu.iter().all(|m| *m >= lo - 1e-12 && *m <= hi + 1e-12));
        }
    }
}
