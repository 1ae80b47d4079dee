//! The run configuration: a line-oriented `section.key = value` file.
//!
//! `#` starts a comment; blank lines are ignored. Lists are comma
//! separated, and potential segments are `x_lo, x_hi, value` triples
//! separated by `;`. Every key must be known and may appear only once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contour::MAX_THETA;
use crate::discretize::{CutoffSpec, Grid};
use crate::linalg::C64;
use crate::model::{validate_problem, Geometry, ModelProblem, PotentialSpec, Segment};
use crate::oracle::EnergyWindow;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate key `{key}`, first set on line {first}")]
    Duplicate { key: String, first: usize, line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("{key}: {message}")]
    Range { key: String, message: String },
}

impl ConfigError {
    /// Stable name used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "Io",
            Self::Parse { .. } | Self::Duplicate { .. } => "ParseError",
            Self::UnknownKey { .. } => "UnknownKey",
            Self::MissingKey { .. } => "MissingKey",
            Self::Range { .. } => "RangeError",
        }
    }
}

/// Every accepted key.
pub const KNOWN_KEYS: &[&str] = &[
    "problem.geometry",
    "problem.potential",
    "problem.segments",
    "problem.beta",
    "problem.metric_beta",
    "problem.r0",
    "problem.r1",
    "contour.theta",
    "contour.alpha0",
    "contour.grid_points",
    "contour.tolerance",
    "discretization.length",
    "discretization.n_points",
    "discretization.r_inner",
    "discretization.r_outer",
    "discretization.cutoff_order",
    "discretization.scheme",
    "scaling.epsilon",
    "davies.epsilon",
    "davies.theta",
    "davies.length",
    "davies.n_points",
    "davies.count",
    "davies.tolerance",
    "oracle.window",
    "sweep.window",
    "sweep.epsilon_start",
    "sweep.epsilon_end",
    "sweep.epsilon_steps",
    "sweep.epsilon_schedule",
    "sweep.delta",
    "sweep.matching_radius",
    "sweep.theta",
    "sweep.grow_domain",
    "dtn.center",
    "dtn.radius",
    "dtn.samples",
    "dtn.candidates",
    "dtn.epsilon",
    "eigen.quadrature_points",
    "output.directory",
    "output.formats",
];

/// Keys that do not change what is computed and stay out of the digest.
const UNHASHED_KEYS: &[&str] = &["output.directory"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    Fd4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContourSection {
    pub theta: f64,
    pub alpha0: f64,
    pub grid_points: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiscretizationSection {
    pub length: f64,
    pub n_points: usize,
    pub cutoff: CutoffSpec,
    pub scheme: Scheme,
}

impl DiscretizationSection {
    pub fn grid(&self) -> Grid {
        Grid {
            t_min: 0.0,
            t_max: self.length,
            n_points: self.n_points,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.grid().spacing()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DaviesSection {
    pub epsilon: f64,
    pub theta: f64,
    pub length: f64,
    pub n_points: usize,
    pub count: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepSection {
    pub window: Option<EnergyWindow>,
    pub epsilon_schedule: Vec<f64>,
    /// `None` means half the smallest reference spacing, floored.
    pub delta: Option<f64>,
    pub matching_radius: f64,
    pub theta: f64,
    pub grow_domain: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DtnSection {
    pub center: Option<C64>,
    pub radius: f64,
    pub samples: usize,
    pub candidates: Vec<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OutputSection {
    pub directory: String,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub problem: ModelProblem,
    pub contour: ContourSection,
    pub discretization: DiscretizationSection,
    pub scaling_epsilon: f64,
    pub davies: DaviesSection,
    pub oracle_window: Option<EnergyWindow>,
    pub sweep: SweepSection,
    pub dtn: DtnSection,
    pub quadrature_points: usize,
    pub output: OutputSection,
    /// Hex SHA-256 of the canonical entry list.
    pub digest: String,
}

impl RunConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// Window used by the oracle: its own, else the sweep window.
    pub fn oracle_window(&self) -> Option<EnergyWindow> {
        self.oracle_window.or(self.sweep.window)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw entries keyed by `section.key`.
#[derive(Debug, Clone, Default)]
pub struct Entries(BTreeMap<String, Entry>);

impl Entries {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `section.key = value`, got `{content}`"),
                });
            };
            let key = k.trim();
            let value = v.trim();
            let well_formed = key
                .split_once('.')
                .is_some_and(|(s, n)| !s.is_empty() && !n.is_empty() && !n.contains('.'))
                && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
            if !well_formed {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("malformed key `{key}`, expected `section.key`"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("empty value for `{key}`"),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if let Some(prev) = map.get(key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    first: prev.line,
                    line,
                });
            }
            map.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self(map))
    }

    /// Sets `key` from a command-line flag, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: 0,
                key: key.to_string(),
            });
        }
        self.0.insert(
            key.to_string(),
            Entry {
                value: value.trim().to_string(),
                line: 0,
            },
        );
        Ok(())
    }

    /// Sorted `key=value` lines with all whitespace removed from values.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, e) in &self.0 {
            if UNHASHED_KEYS.contains(&k.as_str()) {
                continue;
            }
            let v: String = e.value.chars().filter(|c| !c.is_whitespace()).collect();
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.0.get(key).map(|e| (e.value.as_str(), e.line))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|(v, line)| number(v, line)).transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| ConfigError::Parse {
                line,
                message: format!("`{v}` is not a non-negative integer"),
            }),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(("true", _)) => Ok(true),
            Some(("false", _)) => Ok(false),
            Some((v, line)) => Err(ConfigError::Parse {
                line,
                message: format!("`{v}` is not `true` or `false`"),
            }),
        }
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(key)
            .map(|(v, line)| v.split(',').map(|x| number(x.trim(), line)).collect())
            .transpose()
    }

    fn fixed_list(&self, key: &str, n: usize) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.list(key)? else {
            return Ok(None);
        };
        if v.len() != n {
            let line = self.raw(key).map_or(0, |r| r.1);
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` needs {n} numbers, got {}", v.len()),
            });
        }
        Ok(Some(v))
    }

    fn window(&self, key: &str) -> Result<Option<EnergyWindow>, ConfigError> {
        let Some(v) = self.fixed_list(key, 4)? else {
            return Ok(None);
        };
        if !(v[0] < v[1] && v[2] < v[3]) {
            return Err(range(key, format!("window {v:?} must satisfy re_min < re_max, im_min < im_max")));
        }
        Ok(Some(EnergyWindow::new(v[0], v[1], v[2], v[3])))
    }

    fn word(&self, key: &str, allowed: &[&str], default: &'static str) -> Result<String, ConfigError> {
        match self.raw(key) {
            None => Ok(default.to_string()),
            Some((v, _)) if allowed.contains(&v) => Ok(v.to_string()),
            Some((v, line)) => Err(ConfigError::Parse {
                line,
                message: format!("`{v}` is not one of {allowed:?}"),
            }),
        }
    }
}

fn number(v: &str, line: usize) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("`{v}` is not a finite number"),
        }),
    }
}

fn range(key: &str, message: String) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        message,
    }
}

fn check_theta(key: &str, theta: f64) -> Result<(), ConfigError> {
    if !(0.0..=MAX_THETA).contains(&theta) {
        return Err(range(
            key,
            format!("theta = {theta} violates the sector bound 0 <= theta <= pi/8 (= {MAX_THETA:.6})"),
        ));
    }
    Ok(())
}

fn segments(text: &str, line: usize) -> Result<Vec<Segment>, ConfigError> {
    text.split(';')
        .map(|triple| {
            let v: Vec<f64> = triple
                .split(',')
                .map(|x| number(x.trim(), line))
                .collect::<Result<_, _>>()?;
            match v[..] {
                [x_lo, x_hi, value] => Ok(Segment { x_lo, x_hi, value }),
                _ => Err(ConfigError::Parse {
                    line,
                    message: format!("segment `{}` needs `x_lo, x_hi, value`", triple.trim()),
                }),
            }
        })
        .collect()
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config_str(&read_config_text(path)?)
}

/// Reads a configuration file as UTF-8 text.
pub fn read_config_text(path: &Path) -> Result<String, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|_| ConfigError::Io {
        path: path.display().to_string(),
        message: "file is not valid UTF-8".into(),
    })
}

/// Parses configuration text, fills defaults and runs the validators.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Like [`parse_config_str`], with `(key, value)` overrides applied on top.
/// Overrides take part in the digest like any other entry.
pub fn parse_config_with(text: &str, overrides: &[(&str, String)]) -> Result<RunConfig, ConfigError> {
    let mut e = Entries::parse(text)?;
    for (k, v) in overrides {
        e.set(k, v)?;
    }
    let problem = build_problem(&e)?;

    let contour = ContourSection {
        theta: e.f64_or("contour.theta", 0.3)?,
        alpha0: e.f64_or("contour.alpha0", 0.1)?,
        grid_points: e.usize_or("contour.grid_points", 10_000)?,
        tolerance: e.f64_or("contour.tolerance", 1e-12)?,
    };
    check_theta("contour.theta", contour.theta)?;
    if !(contour.alpha0 > 0.0) {
        return Err(range("contour.alpha0", format!("alpha0 = {} must be positive", contour.alpha0)));
    }

    let gap = problem.r1 - problem.r0;
    let mut cutoff = CutoffSpec::new(
        e.f64_or("discretization.r_inner", problem.r0 + 0.2 * gap)?,
        e.f64_or("discretization.r_outer", problem.r1 - 0.2 * gap)?,
    );
    cutoff.order = e.usize_or("discretization.cutoff_order", cutoff.order)?;
    cutoff
        .validate(&problem)
        .map_err(|err| range("discretization.r_inner", err.to_string()))?;
    e.word("discretization.scheme", &["fd4"], "fd4")?;
    let discretization = DiscretizationSection {
        length: e.f64_or("discretization.length", 40.0)?,
        n_points: e.usize_or("discretization.n_points", 401)?,
        cutoff,
        scheme: Scheme::Fd4,
    };
    discretization
        .grid()
        .validate()
        .map_err(|err| range("discretization.n_points", err.to_string()))?;
    if discretization.length <= problem.r1 {
        return Err(range(
            "discretization.length",
            format!("L = {} must exceed R1 = {}", discretization.length, problem.r1),
        ));
    }

    let scaling_epsilon = e.f64_or("scaling.epsilon", 0.0)?;
    if scaling_epsilon < 0.0 {
        return Err(range("scaling.epsilon", format!("{scaling_epsilon} must be >= 0")));
    }

    let davies = DaviesSection {
        epsilon: e.f64_or("davies.epsilon", 1.0)?,
        theta: e.f64_or("davies.theta", 0.0)?,
        length: e.f64_or("davies.length", 12.0)?,
        n_points: e.usize_or("davies.n_points", 1600)?,
        count: e.usize_or("davies.count", 6)?,
        tolerance: e.f64_or("davies.tolerance", 1e-6)?,
    };
    check_theta("davies.theta", davies.theta)?;
    if !(davies.epsilon > 0.0) {
        return Err(range("davies.epsilon", format!("{} must be positive", davies.epsilon)));
    }
    Grid::new(-davies.length, davies.length, davies.n_points).map_err(|err| range("davies.n_points", err.to_string()))?;

    let oracle_window = e.window("oracle.window")?;
    let sweep = build_sweep(&e)?;

    let dtn = DtnSection {
        center: e.fixed_list("dtn.center", 2)?.map(|v| C64::new(v[0], v[1])),
        radius: e.f64_or("dtn.radius", 0.05)?,
        samples: e.usize_or("dtn.samples", 128)?,
        candidates: e
            .list("dtn.candidates")?
            .unwrap_or_else(|| vec![problem.r0 + 0.2 * gap, problem.r0 + 0.5 * gap, problem.r1 - 0.2 * gap]),
        epsilon: e.f64_or("dtn.epsilon", 0.0)?,
    };
    if !(dtn.radius > 0.0) || dtn.samples < 8 {
        return Err(range("dtn.radius", format!("radius {} and samples {} (need > 0 and >= 8)", dtn.radius, dtn.samples)));
    }
    if let Some(a) = dtn.candidates.iter().find(|a| !(**a > problem.r0 && **a < problem.r1)) {
        return Err(range("dtn.candidates", format!("interface {a} outside (R0, R1)")));
    }

    let quadrature_points = e.usize_or("eigen.quadrature_points", 32)?;
    if quadrature_points < 4 {
        return Err(range("eigen.quadrature_points", format!("{quadrature_points} < 4")));
    }

    let mut formats = Vec::new();
    match e.raw("output.formats") {
        None => formats = vec![Format::Csv, Format::Json],
        Some((v, line)) => {
            for f in v.split(',').map(str::trim) {
                formats.push(match f {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    other => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("unknown format `{other}` (use csv, json)"),
                        })
                    }
                });
            }
            formats.sort();
            formats.dedup();
        }
    }
    let output = OutputSection {
        directory: e.raw("output.directory").map_or("capres-runs", |r| r.0).to_string(),
        formats,
    };

    Ok(RunConfig {
        problem,
        contour,
        discretization,
        scaling_epsilon,
        davies,
        oracle_window,
        sweep,
        dtn,
        quadrature_points,
        output,
        digest: e.digest(),
    })
}

fn build_problem(e: &Entries) -> Result<ModelProblem, ConfigError> {
    let geometry = match e.word("problem.geometry", &["half_line", "full_line"], "half_line")?.as_str() {
        "full_line" => Geometry::FullLine,
        _ => Geometry::HalfLineDirichlet,
    };
    let kind = e.word("problem.potential", &["zero", "piecewise", "rational"], "zero")?;
    let potential = match kind.as_str() {
        "piecewise" => {
            let (text, line) = e.raw("problem.segments").ok_or(ConfigError::MissingKey {
                key: "problem.segments".into(),
            })?;
            PotentialSpec::PiecewiseConstant(segments(text, line)?)
        }
        "rational" => PotentialSpec::RationalDecay {
            beta: e.f64("problem.beta")?.ok_or(ConfigError::MissingKey {
                key: "problem.beta".into(),
            })?,
        },
        _ => PotentialSpec::Zero,
    };
    let require = |key: &str| {
        e.f64(key)?.ok_or(ConfigError::MissingKey { key: key.to_string() })
    };
    let problem = ModelProblem {
        geometry,
        potential,
        metric_beta: e.f64_or("problem.metric_beta", 0.0)?,
        r0: require("problem.r0")?,
        r1: require("problem.r1")?,
    };
    let report = validate_problem(&problem);
    if let Some(bad) = report.failures().next() {
        return Err(range("problem", format!("{}: {}", bad.name, bad.detail)));
    }
    Ok(problem)
}

fn build_sweep(e: &Entries) -> Result<SweepSection, ConfigError> {
    let explicit = e.list("sweep.epsilon_schedule")?;
    let stepped = ["sweep.epsilon_start", "sweep.epsilon_end", "sweep.epsilon_steps"]
        .iter()
        .any(|k| e.raw(k).is_some());
    if explicit.is_some() && stepped {
        return Err(range(
            "sweep.epsilon_schedule",
            "give either an explicit schedule or start/end/steps, not both".into(),
        ));
    }
    let epsilon_schedule = match explicit {
        Some(s) => s,
        None => {
            let start = e.f64_or("sweep.epsilon_start", 1e-1)?;
            let end = e.f64_or("sweep.epsilon_end", 1e-5)?;
            let steps = e.usize_or("sweep.epsilon_steps", 9)?;
            if !(start > end && end > 0.0) || steps < 2 {
                return Err(range(
                    "sweep.epsilon_steps",
                    format!("need start > end > 0 and at least 2 steps, got {start}, {end}, {steps}"),
                ));
            }
            crate::sweep::geometric_schedule(start, end, steps)
        }
    };
    if epsilon_schedule.is_empty()
        || epsilon_schedule.iter().any(|x| !(*x > 0.0))
        || epsilon_schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(range(
            "sweep.epsilon_schedule",
            format!("{epsilon_schedule:?} must be positive and strictly decreasing"),
        ));
    }
    let s = SweepSection {
        window: e.window("sweep.window")?,
        epsilon_schedule,
        delta: e.f64("sweep.delta")?,
        matching_radius: e.f64_or("sweep.matching_radius", 0.05)?,
        theta: e.f64_or("sweep.theta", 0.0)?,
        grow_domain: e.bool_or("sweep.grow_domain", true)?,
    };
    check_theta("sweep.theta", s.theta)?;
    if let Some(d) = s.delta {
        if !(d > 0.0) {
            return Err(range("sweep.delta", format!("{d} must be positive")));
        }
    }
    if !(s.matching_radius > 0.0) {
        return Err(range("sweep.matching_radius", format!("{} must be positive", s.matching_radius)));
    }
    if let Some(w) = &s.window {
        if crate::sweep::window_meets_string_ray(w) {
            return Err(range("sweep.window", format!("{w:?} meets the ray arg z = -pi/4")));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "problem.potential = piecewise\nproblem.segments = 1, 2, 10\nproblem.r0 = 2\nproblem.r1 = 3\n";

    #[test]
    fn minimal_barrier_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.contour.alpha0, 0.1);
        assert_eq!(c.quadrature_points, 32);
        assert_eq!(c.discretization.scheme, Scheme::Fd4);
        assert_eq!(c.discretization.cutoff.r_inner, 2.2);
        assert_eq!(c.sweep.epsilon_schedule.len(), 9);
        assert_eq!(c.dtn.candidates, vec![2.2, 2.5, 2.8]);
        assert!(matches!(c.problem.potential, PotentialSpec::PiecewiseConstant(ref s) if s.len() == 1));
    }

    #[test]
    fn theta_beyond_sector_is_range_error() {
        let err = parse_config_str(&format!("{MINIMAL}contour.theta = 0.5\n")).unwrap_err();
        assert_eq!(err.kind(), "RangeError");
        assert!(err.to_string().contains("pi/8"), "{err}");
    }

    #[test]
    fn duplicate_names_both_lines() {
        let err = parse_config_str(&format!("{MINIMAL}# note\nproblem.r0 = 2.5\n")).unwrap_err();
        assert_eq!(err, ConfigError::Duplicate { key: "problem.r0".into(), first: 3, line: 6 });
        assert_eq!(err.kind(), "ParseError");
        let msg = err.to_string();
        assert!(msg.contains("line 6") && msg.contains("line 3"));
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let err = parse_config_str(&format!("{MINIMAL}sweep.tolerence = 1\n")).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 5, key: "sweep.tolerence".into() });
        let err = parse_config_str("problem.r0 2\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config_str(&format!("{MINIMAL}contour.theta = fast\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 5, .. }));
        let err = parse_config_str("problem.r0 = 2\n").unwrap_err();
        assert_eq!(err, ConfigError::MissingKey { key: "problem.r1".into() });
    }

    #[test]
    fn digest_ignores_comments_and_whitespace() {
        let a = parse_config_str(MINIMAL).unwrap().digest;
        let b = parse_config_str(
            "# barrier\n\nproblem.potential=piecewise\n  problem.segments =1,2 ,  10   # V0\nproblem.r0 = 2\nproblem.r1   = 3\n",
        )
        .unwrap()
        .digest;
        assert_eq!(a, b);
        let c = parse_config_str(&MINIMAL.replace("10", "11")).unwrap().digest;
        assert_ne!(a, c);
        let d = parse_config_str(&format!("{MINIMAL}output.directory = elsewhere\n")).unwrap().digest;
        assert_eq!(a, d);
    }

    #[test]
    fn validators_reject_bad_problems() {
        let err = parse_config_str("problem.potential = piecewise\nproblem.segments = 1, 3, 10\nproblem.r0 = 2\nproblem.r1 = 3\n")
            .unwrap_err();
        assert_eq!(err.kind(), "RangeError");
        let err = parse_config_str(&format!("{MINIMAL}sweep.window = 0.1, 1, -1, -0.01\n")).unwrap_err();
        assert_eq!(err.kind(), "RangeError");
    }
}
