// Copyright 2026 ring-purity Contributors
// SPDX-License-Identifier: Apache-2.0

//! Config files, run orchestration, and the files a run leaves behind.
//!
//! A run writes four files into its output directory:
//!
//! * `raw_trace.csv` with header `t,mu_bp1,…` on the full time grid,
//! * `smooth_trace.csv` with the same columns after Bézier smoothing,
//! * `widths.json` with one row per (window, subset),
//! * `manifest.json`, enough to repeat the run bit for bit.
//!
//! Floats are written with 17 significant digits so they read back exactly.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::experiment::{
    bath_profile, bezier_smooth, dispersion_width, dispersion_width_for, parse_subsets,
    parse_windows, run_experiment, BathId, Case, ExperimentConfig, ExperimentResult, PurityTrace,
    WidthSubset, WidthTable, Window,
};
use crate::gaussian::{Evolver, GaussianState, ModeFrame};
use crate::model::ModelParams;
use crate::oracle::{quadrature_reduce, QuadratureGrid};
use crate::reduction::{covariance_purity, state_purity, R12Mode};

pub const RAW_TRACE: &str = "raw_trace.csv";
pub const SMOOTH_TRACE: &str = "smooth_trace.csv";
pub const WIDTHS: &str = "widths.json";
pub const MANIFEST: &str = "manifest.json";

/// Control points and output samples of the plotted curves.
pub const SMOOTH_CTRL: usize = 256;
pub const SMOOTH_OUT: usize = 512;

/// `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `f64` that serializes to JSON with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float"));
        }
        RawValue::from_string(format_f64(self.0))
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Exact)
    }
}

fn exact_vec(v: &[f64]) -> Vec<Exact> {
    v.iter().copied().map(Exact).collect()
}

/// A parsed config file: the experiment plus where its files go.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub out_dir: PathBuf,
}

const KEYS: [&str; 14] = [
    "n",
    "omega",
    "lambda",
    "case",
    "target_r12",
    "profiles",
    "t_max",
    "dt",
    "windows",
    "seed",
    "r12_mode",
    "frame",
    "subsets",
    "out_dir",
];

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Parse {
        line,
        msg: format!("{key}: {e}"),
    })
}

/// Parses `key=value` lines. `#` starts a comment; blank lines are ignored.
/// Missing keys take the [`ExperimentConfig::default`] values, `out_dir`
/// defaults to `out`, and `target_r12` defaults to the value for the case.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut out_dir = PathBuf::from("out");
    let mut target = None;
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected key=value, got '{content}'"),
        })?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line,
                msg: format!("unknown key '{key}'"),
            });
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Parse {
                line,
                msg: format!("key '{key}' given twice"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                msg: format!("key '{key}' has no value"),
            });
        }
        match key.as_str() {
            "n" => cfg.n = parse_value(line, &key, value)?,
            "omega" => cfg.omega = parse_value(line, &key, value)?,
            "lambda" => cfg.lambda = parse_value(line, &key, value)?,
            "case" => cfg.case = parse_value::<Case>(line, &key, value)?,
            "target_r12" => target = Some(parse_value::<f64>(line, &key, value)?),
            "profiles" => {
                cfg.profiles = value
                    .split(',')
                    .map(|p| parse_value::<BathId>(line, &key, p))
                    .collect::<Result<_>>()?
            }
            "t_max" => cfg.t_max = parse_value(line, &key, value)?,
            "dt" => cfg.dt = parse_value(line, &key, value)?,
            "windows" => {
                cfg.windows = parse_windows(value).map_err(|msg| Error::Parse { line, msg })?
            }
            "seed" => cfg.seed = parse_value(line, &key, value)?,
            "r12_mode" => cfg.r12_mode = parse_value(line, &key, value)?,
            "frame" => cfg.frame = parse_value(line, &key, value)?,
            "subsets" => {
                cfg.subsets = Some(parse_subsets(value).map_err(|msg| Error::Parse { line, msg })?)
            }
            "out_dir" => out_dir = PathBuf::from(value),
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.target_r12 = target.unwrap_or_else(|| cfg.case.default_target());
    cfg.validate()?;
    Ok(RunConfig {
        experiment: cfg,
        out_dir,
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    parse_config_text(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub lo: Exact,
    pub hi: Exact,
}

impl From<&Window> for WindowRecord {
    fn from(w: &Window) -> Self {
        Self {
            lo: Exact(w.lo),
            hi: Exact(w.hi),
        }
    }
}

impl From<&WindowRecord> for Window {
    fn from(w: &WindowRecord) -> Self {
        Window::new(w.lo.0, w.hi.0)
    }
}

/// Every [`ExperimentConfig`] field plus the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub omega: Exact,
    pub lambda: Exact,
    pub case: Case,
    pub target_r12: Exact,
    pub profiles: Vec<BathId>,
    pub t_max: Exact,
    pub dt: Exact,
    pub windows: Vec<WindowRecord>,
    pub seed: u64,
    pub r12_mode: R12Mode,
    pub frame: ModeFrame,
    pub subsets: Option<Vec<WidthSubset>>,
    pub out_dir: PathBuf,
}

impl ConfigEcho {
    pub fn new(run: &RunConfig) -> Self {
        let c = &run.experiment;
        Self {
            n: c.n,
            omega: Exact(c.omega),
            lambda: Exact(c.lambda),
            case: c.case,
            target_r12: Exact(c.target_r12),
            profiles: c.profiles.clone(),
            t_max: Exact(c.t_max),
            dt: Exact(c.dt),
            windows: c.windows.iter().map(WindowRecord::from).collect(),
            seed: c.seed,
            r12_mode: c.r12_mode,
            frame: c.frame,
            subsets: c.subsets.clone(),
            out_dir: run.out_dir.clone(),
        }
    }

    pub fn to_run_config(&self) -> RunConfig {
        RunConfig {
            experiment: ExperimentConfig {
                n: self.n,
                omega: self.omega.0,
                lambda: self.lambda.0,
                case: self.case,
                target_r12: self.target_r12.0,
                profiles: self.profiles.clone(),
                t_max: self.t_max.0,
                dt: self.dt.0,
                windows: self.windows.iter().map(Window::from).collect(),
                seed: self.seed,
                r12_mode: self.r12_mode,
                frame: self.frame,
                subsets: self.subsets.clone(),
            },
            out_dir: self.out_dir.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub t_start: Exact,
    pub t_max: Exact,
    pub dt: Exact,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub id: BathId,
    pub seed: u64,
    pub diag: Vec<Exact>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ConfigEcho,
    pub seed: u64,
    pub grid: GridRecord,
    pub r12_mode: R12Mode,
    pub frame: ModeFrame,
    pub profiles: Vec<ProfileRecord>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRecord {
    pub window: WindowRecord,
    pub subset: String,
    pub members: Vec<BathId>,
    pub width: Exact,
}

/// Contents of `widths.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthsFile {
    pub rows: Vec<WidthRecord>,
}

impl From<&WidthTable> for WidthsFile {
    fn from(t: &WidthTable) -> Self {
        Self {
            rows: t
                .rows
                .iter()
                .map(|r| WidthRecord {
                    window: WindowRecord::from(&r.window),
                    subset: r.subset.clone(),
                    members: r.members.clone(),
                    width: Exact(r.width),
                })
                .collect(),
        }
    }
}

fn trace_csv(times: &[f64], columns: &[(BathId, &[f64])]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header =
        std::iter::once("t".to_string()).chain(columns.iter().map(|(id, _)| format!("mu_{id}")));
    w.write_record(header)?;
    for (i, t) in times.iter().enumerate() {
        let row =
            std::iter::once(format_f64(*t)).chain(columns.iter().map(|(_, mu)| format_f64(mu[i])));
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Renders the four output files of a finished experiment.
pub fn render_outputs(
    run: &RunConfig,
    result: &ExperimentResult,
) -> Result<Vec<(&'static str, Vec<u8>)>> {
    let cfg = &run.experiment;
    let traces = &result.traces;
    let times = traces.first().map(|t| t.times.as_slice()).unwrap_or(&[]);
    let raw_cols: Vec<(BathId, &[f64])> = traces
        .iter()
        .map(|t| (t.profile, t.mu.as_slice()))
        .collect();
    let raw = trace_csv(times, &raw_cols)?;

    let smooth: Vec<_> = traces
        .iter()
        .map(|t| bezier_smooth(t, SMOOTH_CTRL, SMOOTH_OUT))
        .collect();
    let smooth_times = smooth.first().map(|s| s.times.as_slice()).unwrap_or(&[]);
    let smooth_cols: Vec<(BathId, &[f64])> = smooth
        .iter()
        .map(|s| (s.profile, s.mu.as_slice()))
        .collect();
    let smooth = trace_csv(smooth_times, &smooth_cols)?;

    let mut widths = serde_json::to_vec_pretty(&WidthsFile::from(&result.widths))?;
    widths.push(b'\n');

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: ConfigEcho::new(run),
        seed: cfg.seed,
        grid: GridRecord {
            t_start: Exact(0.0),
            t_max: Exact(cfg.t_max),
            dt: Exact(cfg.dt),
            points: times.len(),
        },
        r12_mode: cfg.r12_mode,
        frame: cfg.frame,
        profiles: result
            .profiles
            .iter()
            .map(|p| ProfileRecord {
                id: p.id,
                seed: p.seed,
                diag: exact_vec(&p.diag),
            })
            .collect(),
        artifacts: [RAW_TRACE, SMOOTH_TRACE, WIDTHS, MANIFEST]
            .map(String::from)
            .to_vec(),
    };
    let mut manifest = serde_json::to_vec_pretty(&manifest)?;
    manifest.push(b'\n');

    Ok(vec![
        (RAW_TRACE, raw),
        (SMOOTH_TRACE, smooth),
        (WIDTHS, widths),
        (MANIFEST, manifest),
    ])
}

/// Writes each file through a temporary sibling and a rename. If any write
/// fails, files already placed by this call are removed.
fn write_all_atomic(dir: &Path, files: &[(&'static str, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut placed = Vec::new();
    let outcome = files.iter().try_for_each(|(name, bytes)| {
        let target = dir.join(name);
        let tmp = dir.join(format!(".{name}.tmp"));
        let written = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, &target));
        if written.is_err() {
            let _ = fs::remove_file(&tmp);
        } else {
            placed.push(target);
        }
        written
    });
    if let Err(e) = outcome {
        for p in placed {
            let _ = fs::remove_file(p);
        }
        return Err(e.into());
    }
    Ok(())
}

/// Runs the experiment and writes its files into `run.out_dir`.
pub fn run(run: &RunConfig) -> Result<RunManifest> {
    let result = run_experiment(&run.experiment)?;
    let files = render_outputs(run, &result)?;
    let manifest: RunManifest = serde_json::from_slice(&files[3].1)?;
    write_all_atomic(&run.out_dir, &files)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Config recorded in a manifest, after checking that the recorded bath
/// realizations are what the config regenerates.
pub fn config_from_manifest(manifest: &RunManifest) -> Result<RunConfig> {
    let run = manifest.config.to_run_config();
    run.experiment.validate()?;
    let n1 = run.experiment.n - 1;
    for rec in &manifest.profiles {
        let regenerated = bath_profile(rec.id, n1, rec.seed)?;
        let recorded: Vec<f64> = rec.diag.iter().map(|d| d.0).collect();
        if regenerated.diag != recorded || rec.seed != run.experiment.seed {
            return Err(Error::Validation(format!(
                "recorded realization of {} does not match its seed",
                rec.id
            )));
        }
    }
    Ok(run)
}

/// Repeats a recorded run, optionally into another directory.
pub fn rerun(manifest_path: &Path, out_dir: Option<&Path>) -> Result<RunManifest> {
    let manifest = read_manifest(manifest_path)?;
    let mut cfg = config_from_manifest(&manifest)?;
    if let Some(dir) = out_dir {
        cfg.out_dir = dir.to_path_buf();
    }
    run(&cfg)
}

/// Reads `raw_trace.csv` back into traces.
pub fn read_traces(path: &Path) -> Result<Vec<PurityTrace>> {
    read_traces_from(fs::File::open(path)?)
}

pub fn read_traces_from(reader: impl std::io::Read) -> Result<Vec<PurityTrace>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("t") {
        return Err(Error::Parse {
            line: 1,
            msg: "first column must be 't'".into(),
        });
    }
    let ids = headers
        .iter()
        .skip(1)
        .map(|h| {
            h.strip_prefix("mu_")
                .ok_or_else(|| format!("column '{h}' is not mu_<profile>"))
                .and_then(|p| p.parse::<BathId>())
                .map_err(|msg| Error::Parse { line: 1, msg })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut times = Vec::new();
    let mut cols = vec![Vec::new(); ids.len()];
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != ids.len() + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, got {}", ids.len() + 1, rec.len()),
            });
        }
        let mut fields = rec
            .iter()
            .map(|f| parse_value::<f64>(line, "value", f.trim()));
        times.push(fields.next().expect("length checked")?);
        for (col, v) in cols.iter_mut().zip(fields) {
            col.push(v?);
        }
    }
    Ok(ids
        .into_iter()
        .zip(cols)
        .map(|(profile, mu)| PurityTrace {
            profile,
            times: times.clone(),
            mu,
        })
        .collect())
}

/// Widths recomputed from a raw trace file.
pub fn widths_from_csv(
    path: &Path,
    windows: &[Window],
    subsets: Option<&[WidthSubset]>,
) -> Result<WidthTable> {
    let traces = read_traces(path)?;
    match subsets {
        Some(s) => dispersion_width_for(&traces, windows, s),
        None => dispersion_width(&traces, windows),
    }
}

/// One comparison printed by `oracle-check`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLine {
    pub label: String,
    pub quadrature: f64,
    pub exact: f64,
    pub paper: f64,
    pub covariance: f64,
}

impl OracleLine {
    /// Fast exact path and covariance identity both within the quadrature
    /// tolerance.
    pub fn agrees(&self) -> bool {
        (self.exact - self.quadrature).abs() < 1e-4
            && (self.covariance - self.quadrature).abs() < 1e-4
    }
}

impl fmt::Display for OracleLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<34} quadrature {:.6}  exact {:.6} ({:+.1e})  paper {:.6} ({:+.1e})  covariance {:.6} ({:+.1e})",
            self.label,
            self.quadrature,
            self.exact,
            self.exact - self.quadrature,
            self.paper,
            self.paper - self.quadrature,
            self.covariance,
            self.covariance - self.quadrature
        )
    }
}

fn oracle_line(label: String, state: &GaussianState, points: usize) -> Result<OracleLine> {
    let grid = QuadratureGrid::covering(state, points)?;
    Ok(OracleLine {
        label,
        quadrature: quadrature_reduce(state, &grid)?,
        exact: state_purity(state, R12Mode::Exact)?,
        paper: state_purity(state, R12Mode::Paper)?,
        covariance: covariance_purity(state)?,
    })
}

/// Brute-force checks of the reduction on small rings: case-B states at
/// several times in both mode frames.
pub fn oracle_report(points: usize) -> Result<Vec<OracleLine>> {
    let mut lines = Vec::new();
    for n in [2usize, 3] {
        let cfg = ExperimentConfig {
            n,
            lambda: 0.1,
            case: Case::B,
            target_r12: Case::B.default_target(),
            profiles: vec![BathId::Bp2],
            ..Default::default()
        };
        let params = ModelParams::new(n, cfg.omega, cfg.lambda)?;
        // A single bath oscillator admits only the uniform preparation.
        let profile = match n {
            2 => crate::experiment::BathProfile {
                id: BathId::Bp1,
                diag: vec![1.0],
                seed: 0,
            },
            _ => bath_profile(BathId::Bp2, n - 1, 0)?,
        };
        let initial = crate::experiment::build_initial_omega(&cfg, &profile)?;
        for frame in [ModeFrame::Sesquilinear, ModeFrame::Bilinear] {
            let ev = Evolver::new(&params, &initial, frame)?;
            for t in [0.0, 1.0, 7.3] {
                let state = ev.at(t)?;
                let label = format!("N={n} case B {} {} t={t}", profile.id, frame.as_str());
                lines.push(oracle_line(label, &state, points)?);
            }
        }
    }
    Ok(lines)
}
