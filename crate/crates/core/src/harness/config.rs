use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::quantizer::Dithering;
use crate::sensing::SensingKind;
use crate::signals::SignalModel;

pub const DEFAULT_GRID_POINTS: usize = 12;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_DIAGNOSE_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    /// Error against the number of measurements.
    DecayVsM,
    /// Error against the quantizer resolution.
    ErrorVsDelta,
    /// Decay against `m` with the dither removed.
    NoDither,
    /// Decay against `m` plus a per-trial bound audit.
    Diagnose,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DecayVsM => "decay_vs_m",
            ExperimentKind::ErrorVsDelta => "error_vs_delta",
            ExperimentKind::NoDither => "no_dither",
            ExperimentKind::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::DecayVsM,
            ExperimentKind::ErrorVsDelta,
            ExperimentKind::NoDither,
            ExperimentKind::Diagnose,
        ]
        .into_iter()
        .find(|k| k.name() == s.trim())
        .ok_or_else(|| Error::config(format!("unknown experiment {s:?}")))
    }
}

/// Measurement grid as written in a config file.
#[derive(Clone, Debug, PartialEq)]
pub enum MGrid {
    Explicit(Vec<usize>),
    Geometric { min: usize, max: usize, points: usize },
}

impl MGrid {
    /// `points` geometrically spaced integers from `min` to `max`, rounded
    /// and deduplicated.
    pub fn resolve(&self) -> Vec<usize> {
        match self {
            MGrid::Explicit(v) => v.clone(),
            MGrid::Geometric { min, max, points } => {
                if *points <= 1 || min == max {
                    return vec![*min];
                }
                let ratio = *max as f64 / *min as f64;
                let mut out: Vec<usize> = (0..*points)
                    .map(|i| {
                        let t = i as f64 / (*points - 1) as f64;
                        (*min as f64 * ratio.powf(t)).round() as usize
                    })
                    .collect();
                out.dedup();
                out
            }
        }
    }
}

impl fmt::Display for MGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MGrid::Explicit(v) => f.write_str(&join(v)),
            MGrid::Geometric { min, max, points } => write!(f, "geometric({min}, {max}, {points})"),
        }
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub experiment_id: String,
    pub model: SignalModel,
    pub sensing: SensingKind,
    pub deltas: Vec<f64>,
    pub m_grid: MGrid,
    pub trials: usize,
    pub base_seed: u64,
    pub dithering: Dithering,
    pub output: Option<PathBuf>,
    /// Samples per distortion estimate in `diagnose` runs.
    pub diagnose_samples: usize,
}

/// `4k log₂(n/k)` for vector sets, `r(n₁ + n₂)` for matrices.
pub fn default_min_measurements(model: &SignalModel) -> usize {
    match *model {
        SignalModel::Sparse { n, k } | SignalModel::Compressible { n, k } => {
            let v = 4.0 * k as f64 * (n as f64 / k as f64).log2();
            (v.ceil() as usize).clamp(1, n)
        }
        SignalModel::LowRank { rows, cols, rank } => (rank * (rows + cols)).min(rows * cols),
    }
}

impl ExperimentConfig {
    /// Dithered decay experiment with the default grid and trial count.
    pub fn new(experiment_id: &str, model: SignalModel, sensing: SensingKind) -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::DecayVsM,
            experiment_id: experiment_id.to_string(),
            model,
            sensing,
            deltas: vec![1.0],
            m_grid: MGrid::Geometric {
                min: default_min_measurements(&model),
                max: model.dim(),
                points: DEFAULT_GRID_POINTS,
            },
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            dithering: Dithering::Uniform,
            output: None,
            diagnose_samples: DEFAULT_DIAGNOSE_SAMPLES,
        }
    }

    pub fn measurements(&self) -> Vec<usize> {
        self.m_grid.resolve()
    }

    pub fn validate(&self) -> Result<()> {
        self.model
            .validate()
            .map_err(|e| Error::config(e.to_string()))?;
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.deltas.is_empty() {
            return Err(Error::config("delta_list is empty"));
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config(format!("delta {d} must be positive and finite")));
            }
        }
        if let MGrid::Geometric { min, max, points } = self.m_grid {
            if min == 0 || min > max || points == 0 {
                return Err(Error::config(format!("bad geometric grid ({min}, {max}, {points})")));
            }
        }
        let grid = self.measurements();
        if grid.is_empty() {
            return Err(Error::config("m_grid is empty"));
        }
        let n = self.model.dim();
        let mut seen = grid.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != grid.len() {
            return Err(Error::config("m_grid contains duplicates"));
        }
        for &m in &grid {
            if m == 0 || m > n {
                return Err(Error::config(format!("m={m} outside 1..={n}")));
            }
        }
        if self.experiment == ExperimentKind::NoDither && self.dithering.is_on() {
            return Err(Error::config("no_dither experiment requires dithering = off"));
        }
        if self.diagnose_samples == 0 {
            return Err(Error::config("diagnose_samples must be at least 1"));
        }
        if self.experiment_id.contains([',', '"', '\n']) {
            return Err(Error::config("experiment_id must not contain commas, quotes or newlines"));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    /// Flat `key = value` rendering accepted by [`FromStr`].
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("experiment", self.experiment.to_string());
        line("experiment_id", self.experiment_id.clone());
        line("set", self.model.name().to_string());
        match self.model {
            SignalModel::Sparse { n, k } | SignalModel::Compressible { n, k } => {
                line("n", n.to_string());
                line("k", k.to_string());
            }
            SignalModel::LowRank { rows, cols, rank } => {
                line("n1", rows.to_string());
                line("n2", cols.to_string());
                line("r", rank.to_string());
            }
        }
        line("sensing", self.sensing.to_string());
        line("delta_list", join(&self.deltas));
        line("m_grid", self.m_grid.to_string());
        line("trials", self.trials.to_string());
        line("base_seed", self.base_seed.to_string());
        line(
            "dithering",
            if self.dithering.is_on() { "on" } else { "off" }.to_string(),
        );
        if let Some(p) = &self.output {
            line("output", p.display().to_string());
        }
        line("diagnose_samples", self.diagnose_samples.to_string());
        out
    }
}

const KEYS: &[&str] = &[
    "experiment",
    "experiment_id",
    "set",
    "n",
    "k",
    "n1",
    "n2",
    "r",
    "sensing",
    "delta_list",
    "m_grid",
    "trials",
    "base_seed",
    "dithering",
    "output",
    "diagnose_samples",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// `a, b, c` or `log2(lo, hi)` (all powers `2^lo ..= 2^hi`).
fn parse_deltas(v: &str) -> Result<Vec<f64>> {
    if let Some(args) = call_args(v, "log2") {
        let bounds: Vec<i32> = parse_list("delta_list", args)?;
        if bounds.len() != 2 || bounds[0] > bounds[1] {
            return Err(Error::config("delta_list: log2(lo, hi) needs lo <= hi"));
        }
        return Ok((bounds[0]..=bounds[1]).map(|e| 2f64.powi(e)).collect());
    }
    parse_list("delta_list", v)
}

fn parse_grid(v: &str) -> Result<MGrid> {
    if let Some(args) = call_args(v, "geometric") {
        let p: Vec<usize> = parse_list("m_grid", args)?;
        if p.len() != 3 {
            return Err(Error::config("m_grid: geometric(min, max, points) takes 3 values"));
        }
        return Ok(MGrid::Geometric {
            min: p[0],
            max: p[1],
            points: p[2],
        });
    }
    Ok(MGrid::Explicit(parse_list("m_grid", v)?))
}

fn call_args<'a>(v: &'a str, name: &str) -> Option<&'a str> {
    v.trim()
        .strip_prefix(name)?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::config(format!("line {}: unknown key {k:?}", lineno + 1)));
            }
            if kv.insert(k, v.trim()).is_some() {
                return Err(Error::config(format!("line {}: duplicate key {k:?}", lineno + 1)));
            }
        }
        let get = |k: &str| kv.get(k).copied();
        let need = |k: &str| get(k).ok_or_else(|| Error::config(format!("missing key {k:?}")));

        let experiment: ExperimentKind = get("experiment").unwrap_or("decay_vs_m").parse()?;
        let model = match need("set")? {
            "sparse" => SignalModel::Sparse {
                n: parse_num("n", need("n")?)?,
                k: parse_num("k", need("k")?)?,
            },
            "compressible" => SignalModel::Compressible {
                n: parse_num("n", need("n")?)?,
                k: parse_num("k", need("k")?)?,
            },
            "lowrank" => SignalModel::LowRank {
                rows: parse_num("n1", need("n1")?)?,
                cols: parse_num("n2", need("n2")?)?,
                rank: parse_num("r", need("r")?)?,
            },
            other => {
                return Err(Error::config(format!(
                    "unknown set {other:?} (expected sparse | compressible | lowrank)"
                )))
            }
        };
        let sensing: SensingKind = need("sensing")?.parse()?;
        let id = get("experiment_id").unwrap_or(experiment.name());
        let mut cfg = ExperimentConfig::new(id, model, sensing);
        cfg.experiment = experiment;
        if experiment == ExperimentKind::NoDither {
            cfg.dithering = Dithering::Disabled;
        }
        if let Some(v) = get("delta_list") {
            cfg.deltas = parse_deltas(v)?;
        }
        if let Some(v) = get("m_grid") {
            cfg.m_grid = parse_grid(v)?;
        }
        if let Some(v) = get("trials") {
            cfg.trials = parse_num("trials", v)?;
        }
        if let Some(v) = get("base_seed") {
            cfg.base_seed = parse_num("base_seed", v)?;
        }
        if let Some(v) = get("dithering") {
            cfg.dithering = v.parse()?;
        }
        if let Some(v) = get("output") {
            cfg.output = Some(PathBuf::from(v));
        }
        if let Some(v) = get("diagnose_samples") {
            cfg.diagnose_samples = parse_num("diagnose_samples", v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
