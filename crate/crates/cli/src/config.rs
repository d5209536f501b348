//! Experiment configuration: schema, parsing and line-anchored validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    TransformSuite,
    TranslationSuite,
    Dispersion,
    StrichartzScan,
    Solve,
    PicardVerify,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: ParamsBlock,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub suite: Option<SuiteBlock>,
    #[serde(default)]
    pub dispersion: Option<DispersionBlock>,
    #[serde(default)]
    pub strichartz: Option<StrichartzBlock>,
    #[serde(default)]
    pub data: Option<DataBlock>,
    #[serde(default)]
    pub solver: Option<SolverBlock>,
    #[serde(default)]
    pub picard: Option<PicardBlock>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub alpha: f64,
    pub d: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub axial_n: usize,
    pub half_width: f64,
    pub radial_n: usize,
    pub radial_extent: f64,
}

impl GridBlock {
    pub fn spec(&self) -> weinstein::GridSpec {
        weinstein::GridSpec {
            axial_n: self.axial_n,
            half_width: self.half_width,
            radial_n: self.radial_n,
            radial_extent: self.radial_extent,
        }
    }
}

/// Knobs shared by the transform and translation suites.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteBlock {
    #[serde(default = "default_suite_s")]
    pub s: f64,
    #[serde(default = "default_fields")]
    pub fields: usize,
    #[serde(default = "default_oracle_nodes")]
    pub oracle_nodes: usize,
}

impl Default for SuiteBlock {
    fn default() -> Self {
        Self {
            s: default_suite_s(),
            fields: default_fields(),
            oracle_nodes: default_oracle_nodes(),
        }
    }
}

fn default_suite_s() -> f64 {
    1.0
}
fn default_fields() -> usize {
    20
}
fn default_oracle_nodes() -> usize {
    64
}

/// A float exponent that may be `inf` (TOML float or the JSON string `"inf"`).
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Number(f64),
    Named(NamedExponent),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum NamedExponent {
    #[serde(rename = "inf")]
    Inf,
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.value();
        if v.is_infinite() && v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(v)
        }
    }
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Number(v) => v,
            Exponent::Named(NamedExponent::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionBlock {
    pub s: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_decay_samples")]
    pub samples: usize,
    pub p: Exponent,
}

fn default_decay_samples() -> usize {
    24
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzBlock {
    pub pairs: Vec<[f64; 2]>,
    pub ensemble_size: usize,
    pub horizon: f64,
    pub dt: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Repeat on a grid with doubled node counts.
    #[serde(default)]
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Gaussian,
    Packets,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub kind: DataKind,
    /// Gaussian width, or the lower width bound for packets.
    pub s: f64,
    /// Upper width bound for packets.
    #[serde(default)]
    pub s_max: Option<f64>,
    #[serde(default = "default_packet_count")]
    pub count: usize,
    /// Target `L²_α` norm.
    pub norm: f64,
}

fn default_packet_count() -> usize {
    3
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub p: f64,
    /// `[Re μ, Im μ]`.
    pub mu: [f64; 2],
    pub horizon: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Write a field checkpoint every this many records; 0 writes only the
    /// final state.
    #[serde(default)]
    pub checkpoint_every: usize,
    #[serde(default = "default_picard_samples")]
    pub picard_samples: usize,
    #[serde(default = "default_picard_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "unit")]
    pub strichartz_constant: f64,
    #[serde(default)]
    pub ball_radius: Option<f64>,
    #[serde(default)]
    pub pair: Option<[f64; 2]>,
    #[serde(default = "default_sup_limit")]
    pub sup_limit: f64,
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}
fn default_picard_samples() -> usize {
    129
}
fn default_picard_iter() -> usize {
    50
}
fn default_picard_tol() -> f64 {
    1e-12
}
fn default_sup_limit() -> f64 {
    weinstein::solver::DEFAULT_SUP_LIMIT
}

/// Extra settings for `PicardVerify`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardBlock {
    #[serde(default = "default_skip")]
    pub geometric_skip: usize,
    /// Also measure how the contraction window rescales when the data norm
    /// is halved along the scaling orbit.
    #[serde(default)]
    pub scaling: bool,
    #[serde(default = "default_kappa")]
    pub window_kappa: f64,
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_window_samples")]
    pub window_samples: usize,
}

impl Default for PicardBlock {
    fn default() -> Self {
        Self {
            geometric_skip: default_skip(),
            scaling: false,
            window_kappa: default_kappa(),
            window: default_window(),
            window_samples: default_window_samples(),
        }
    }
}

fn default_skip() -> usize {
    2
}
fn default_kappa() -> f64 {
    0.3
}
fn default_window() -> [f64; 2] {
    [1.0, 64.0]
}
fn default_window_samples() -> usize {
    33
}

/// A schema violation, anchored to a line of the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path.display(), l, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

/// JSON for `.json` files or text starting with `{`; TOML otherwise.
pub fn detect_format(path: &Path, text: &str) -> Format {
    let json_ext = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if json_ext || text.trim_start().starts_with('{') {
        Format::Json
    } else {
        Format::Toml
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = ...` (TOML) or `"key": ...` (JSON) entry,
/// searched inside `section` when given.
pub fn locate(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut in_section = section.is_none();
    let quoted = format!("\"{key}\"");
    let header = section.map(|s| (format!("[{s}]"), format!("\"{s}\"")));
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some((toml_h, json_h)) = &header {
            if line.starts_with('[') && !line.starts_with("[[") && line.len() > 1 && line[1..].starts_with(|c: char| c.is_alphabetic()) {
                in_section = line.starts_with(toml_h.as_str());
            }
            if line.starts_with(json_h.as_str()) {
                in_section = true;
            }
        }
        if !in_section {
            continue;
        }
        let toml_hit = line
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        let json_hit = line.contains(&quoted) && line[line.find(&quoted).unwrap() + quoted.len()..].trim_start().starts_with(':');
        if toml_hit || json_hit {
            return Some(i + 1);
        }
    }
    None
}

/// Parses configuration text, then checks its semantic invariants.
pub fn parse(path: &Path, text: &str) -> Result<ExperimentConfig, SchemaError> {
    let err = |line, message: String| SchemaError {
        path: path.to_path_buf(),
        line,
        message,
    };
    let cfg: ExperimentConfig = match detect_format(path, text) {
        Format::Json => serde_json::from_str(text).map_err(|e| err(Some(e.line()), e.to_string()))?,
        Format::Toml => toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            err(line, e.message().to_string())
        })?,
    };
    validate(&cfg).map_err(|v| err(locate(text, v.section, v.key), v.message))?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, SchemaError> {
    let text = std::fs::read_to_string(path).map_err(|e| SchemaError {
        path: path.to_path_buf(),
        line: None,
        message: format!("cannot read configuration: {e}"),
    })?;
    parse(path, &text)
}

/// A violated invariant and the key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub section: Option<&'static str>,
    pub key: &'static str,
    pub message: String,
}

fn violation(section: Option<&'static str>, key: &'static str, message: impl Into<String>) -> Violation {
    Violation {
        section,
        key,
        message: message.into(),
    }
}

fn positive(section: &'static str, key: &'static str, v: f64) -> Result<(), Violation> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(violation(Some(section), key, format!("{section}.{key} must be positive and finite, got {v}")))
    }
}

fn need<'a, T>(block: &'a Option<T>, name: &'static str, exp: Experiment) -> Result<&'a T, Violation> {
    block
        .as_ref()
        .ok_or_else(|| violation(None, "experiment", format!("experiment {exp:?} requires a [{name}] block")))
}

fn check_grid(g: &GridBlock, d: usize) -> Result<(), Violation> {
    if d == 0 {
        if g.axial_n != 1 {
            return Err(violation(Some("grid"), "axial_n", "grid.axial_n must be 1 when d = 0"));
        }
    } else {
        if !(g.axial_n >= 8 && g.axial_n.is_power_of_two()) {
            return Err(violation(Some("grid"), "axial_n", format!("grid.axial_n must be a power of two >= 8, got {}", g.axial_n)));
        }
        positive("grid", "half_width", g.half_width)?;
    }
    if g.radial_n < 16 {
        return Err(violation(Some("grid"), "radial_n", format!("grid.radial_n must be >= 16, got {}", g.radial_n)));
    }
    positive("grid", "radial_extent", g.radial_extent)
}

fn check_data(b: &DataBlock) -> Result<(), Violation> {
    positive("data", "s", b.s)?;
    positive("data", "norm", b.norm)?;
    if b.kind == DataKind::Packets {
        let hi = b.s_max.unwrap_or(b.s);
        if !(hi >= b.s) {
            return Err(violation(Some("data"), "s_max", "data.s_max must be >= data.s"));
        }
        if b.count == 0 {
            return Err(violation(Some("data"), "count", "data.count must be >= 1"));
        }
    }
    Ok(())
}

fn check_solver(b: &SolverBlock) -> Result<(), Violation> {
    positive("solver", "p", b.p)?;
    positive("solver", "horizon", b.horizon)?;
    positive("solver", "dt", b.dt)?;
    positive("solver", "picard_tol", b.picard_tol)?;
    positive("solver", "strichartz_constant", b.strichartz_constant)?;
    positive("solver", "sup_limit", b.sup_limit)?;
    if !(b.mu[0].is_finite() && b.mu[1].is_finite()) {
        return Err(violation(Some("solver"), "mu", "solver.mu must be finite"));
    }
    if b.dt > b.horizon {
        return Err(violation(Some("solver"), "dt", "solver.dt must not exceed solver.horizon"));
    }
    if b.record_every == 0 {
        return Err(violation(Some("solver"), "record_every", "solver.record_every must be >= 1"));
    }
    if b.picard_samples < 3 {
        return Err(violation(Some("solver"), "picard_samples", "solver.picard_samples must be >= 3"));
    }
    if b.picard_max_iter == 0 {
        return Err(violation(Some("solver"), "picard_max_iter", "solver.picard_max_iter must be >= 1"));
    }
    if let Some(r) = b.ball_radius {
        positive("solver", "ball_radius", r)?;
    }
    if let Some([q, r]) = b.pair {
        if !(q >= 2.0 && r >= 2.0) {
            return Err(violation(Some("solver"), "pair", "solver.pair exponents must be >= 2"));
        }
    }
    Ok(())
}

/// Semantic invariants that the type schema cannot express.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), Violation> {
    let p = cfg.params;
    if !(p.alpha > -0.5) || !p.alpha.is_finite() {
        return Err(violation(Some("params"), "alpha", format!("params.alpha must satisfy alpha > -1/2, got {}", p.alpha)));
    }
    if p.d > 3 {
        return Err(violation(Some("params"), "d", format!("params.d must be at most 3, got {}", p.d)));
    }
    let exp = cfg.experiment;
    if let Some(g) = &cfg.grid {
        check_grid(g, p.d)?;
    }
    match exp {
        Experiment::TransformSuite | Experiment::TranslationSuite => {
            need(&cfg.grid, "grid", exp)?;
            if exp == Experiment::TranslationSuite && p.d != 1 {
                return Err(violation(Some("params"), "d", "TranslationSuite runs at d = 1"));
            }
            if let Some(s) = &cfg.suite {
                positive("suite", "s", s.s)?;
            }
        }
        Experiment::Dispersion => {
            let b = need(&cfg.dispersion, "dispersion", exp)?;
            positive("dispersion", "s", b.s)?;
            positive("dispersion", "t_min", b.t_min)?;
            if !(b.t_max > b.t_min) {
                return Err(violation(Some("dispersion"), "t_max", "dispersion.t_max must exceed dispersion.t_min"));
            }
            if b.samples < 2 {
                return Err(violation(Some("dispersion"), "samples", "dispersion.samples must be >= 2"));
            }
            if !(b.p.value() >= 1.0) {
                return Err(violation(Some("dispersion"), "p", "dispersion.p must be >= 1 or \"inf\""));
            }
        }
        Experiment::StrichartzScan => {
            need(&cfg.grid, "grid", exp)?;
            let b = need(&cfg.strichartz, "strichartz", exp)?;
            if b.pairs.is_empty() {
                return Err(violation(Some("strichartz"), "pairs", "strichartz.pairs must not be empty"));
            }
            if b.ensemble_size == 0 {
                return Err(violation(Some("strichartz"), "ensemble_size", "strichartz.ensemble_size must be >= 1"));
            }
            positive("strichartz", "horizon", b.horizon)?;
            positive("strichartz", "dt", b.dt)?;
            positive("strichartz", "s_min", b.s_min)?;
            if !(b.s_max >= b.s_min) {
                return Err(violation(Some("strichartz"), "s_max", "strichartz.s_max must be >= strichartz.s_min"));
            }
        }
        Experiment::Solve | Experiment::PicardVerify => {
            need(&cfg.grid, "grid", exp)?;
            check_data(need(&cfg.data, "data", exp)?)?;
            check_solver(need(&cfg.solver, "solver", exp)?)?;
            if let Some(pb) = &cfg.picard {
                positive("picard", "window_kappa", pb.window_kappa)?;
                if !(pb.window[0] > 0.0 && pb.window[1] > pb.window[0]) {
                    return Err(violation(Some("picard"), "window", "picard.window must satisfy 0 < lo < hi"));
                }
                if pb.window_samples < 3 {
                    return Err(violation(Some("picard"), "window_samples", "picard.window_samples must be >= 3"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
experiment = "TransformSuite"
seed = 1

[params]
alpha = 0.5
d = 1

[grid]
axial_n = 64
half_width = 8.0
radial_n = 64
radial_extent = 8.0
"#;

    #[test]
    fn parses_toml() {
        let c = parse(Path::new("a.toml"), GOOD).unwrap();
        assert_eq!(c.experiment, Experiment::TransformSuite);
        assert_eq!(c.grid.unwrap().axial_n, 64);
    }

    #[test]
    fn invariant_violation_points_at_its_line() {
        let bad = GOOD.replace("alpha = 0.5", "alpha = -1");
        let e = parse(Path::new("a.toml"), &bad).unwrap_err();
        assert_eq!(e.line, Some(6));
        assert!(e.message.contains("alpha > -1/2"));
    }

    #[test]
    fn syntax_and_unknown_keys_are_line_anchored() {
        let e = parse(Path::new("a.toml"), &GOOD.replace("\nd = 1", "\nd = 1\ncolour = 3")).unwrap_err();
        assert_eq!(e.line, Some(8));
        let e = parse(Path::new("a.toml"), &GOOD.replace("axial_n = 64", "axial_n = \"many\"")).unwrap_err();
        assert_eq!(e.line, Some(10));
    }

    #[test]
    fn json_is_accepted() {
        let text = r#"{
  "experiment": "Dispersion",
  "params": {"alpha": 0.5, "d": 1},
  "dispersion": {"s": 1.0, "t_min": 1.0, "t_max": 30.0, "p": "inf"}
}"#;
        let c = parse(Path::new("a.json"), text).unwrap();
        assert!(c.dispersion.unwrap().p.value().is_infinite());
        let round: ExperimentConfig = serde_json::from_value(serde_json::to_value(&c).unwrap()).unwrap();
        assert!(round.dispersion.unwrap().p.value().is_infinite());
        let e = parse(Path::new("a.json"), &text.replace("\"t_max\": 30.0", "\"t_max\": 0.5")).unwrap_err();
        assert_eq!(e.line, Some(4));
    }

    #[test]
    fn missing_block_is_reported() {
        let text = GOOD.replace("TransformSuite", "Solve");
        let e = parse(Path::new("a.toml"), &text).unwrap_err();
        assert!(e.message.contains("[data]"), "{}", e.message);
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn locate_respects_sections() {
        let text = "[a]\nx = 1\n[b]\nx = 2\n";
        assert_eq!(locate(text, Some("b"), "x"), Some(4));
        assert_eq!(locate(text, None, "x"), Some(2));
        assert_eq!(locate(text, Some("c"), "x"), None);
    }
}
