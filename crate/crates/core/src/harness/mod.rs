//! Configuration, check registry, suite orchestration and reporting.
//!
//! A run evaluates the checks of the selected suites on one parameter set and
//! produces one [`CheckResult`] per check. Suites run concurrently; results
//! are merged in registry order, so the report depends only on the
//! configuration and the seed.

mod checks;
pub mod io;
mod registry;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{Grid, Params};
use crate::qcore::Precision;
use crate::transform::{Transform, TransformOptions};
use crate::{Error, Result};

pub use registry::{CheckSpec, INVARIANTS, REGISTRY};

/// Random generator handed to every check.
pub type Rng = ChaCha8Rng;

/// Default lattice window.
pub const DEFAULT_WINDOW: (i64, i64) = (-40, 60);
/// Default number of circle quadrature nodes.
pub const DEFAULT_NODES: usize = 400;
/// Largest `k_max` used for transform tables. Beyond it the weights of the
/// `Γ^inf` points needed near the origin underflow in binary64.
pub const TRANSFORM_K_MAX: i64 = 12;
/// Smallest `k_min` used for transform tables.
pub const TRANSFORM_K_MIN: i64 = -40;

/// A parameter set, either by preset name or by value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Preset(String),
    Raw(Params),
}

impl ParamSpec {
    pub fn resolve(&self) -> Result<Params> {
        match self {
            ParamSpec::Preset(n) => Params::preset(n).ok_or_else(|| Error::Config(format!("unknown preset {n:?}; known: {:?}", Params::PRESETS))),
            ParamSpec::Raw(p) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }
}

fn default_window() -> (i64, i64) {
    DEFAULT_WINDOW
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

/// Run configuration, read from JSON.
///
/// ```json
/// { "params": "ps1", "window": [-40, 60], "quadrature_nodes": 400,
///   "precision": { "tail_epsilon": 1e-17, "max_terms": 20000 },
///   "suites": ["theta", "plancherel"], "report_path": "report.jsonl", "seed": 7 }
/// ```
///
/// `params` is a preset name or an object with `q`, `z_minus`, `z_plus` and
/// complex `a`, `b`, `c`, `d` written as `[re, im]`. Only `params` is
/// required; `verify` also needs a non-empty suite list. Timings are left out of the report unless
/// `record_timings` is set, so that reports are byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamSpec,
    #[serde(default = "default_window")]
    pub window: (i64, i64),
    #[serde(default)]
    pub precision: Precision,
    #[serde(default = "default_nodes")]
    pub quadrature_nodes: usize,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub report_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub record_timings: bool,
}

impl RunConfig {
    /// A configuration with defaults for everything but the parameters and suites.
    pub fn new(params: ParamSpec, suites: &[&str]) -> RunConfig {
        RunConfig {
            params,
            window: DEFAULT_WINDOW,
            precision: Precision::default(),
            quadrature_nodes: DEFAULT_NODES,
            suites: suites.iter().map(|s| s.to_string()).collect(),
            report_path: None,
            seed: 0,
            record_timings: false,
        }
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Checks every field and builds the evaluation context.
    pub fn context(&self) -> Result<Context> {
        let params = self.params.resolve()?;
        params.require_generic()?;
        let (k_min, k_max) = self.window;
        if !(k_min < 0 && k_max > 0) {
            return Err(Error::Config(format!("window [{k_min}, {k_max}] must satisfy k_min < 0 < k_max")));
        }
        let window = Grid::new(k_min, k_max)?;
        self.precision.validate()?;
        let opts = TransformOptions { nodes: self.quadrature_nodes, ..TransformOptions::default() };
        if self.quadrature_nodes < 16 || !self.quadrature_nodes.is_multiple_of(opts.panels) {
            return Err(Error::Config(format!("quadrature_nodes = {} must be a multiple of {} and at least 16", self.quadrature_nodes, opts.panels)));
        }
        Ok(Context { params, window, precision: self.precision, options: opts, transform: OnceLock::new() })
    }

    /// The configured suites in registry order, with duplicates removed.
    pub fn selected_suites(&self) -> Result<Vec<&'static str>> {
        if self.suites.is_empty() {
            return Err(Error::Config("suite list is empty".into()));
        }
        let known = suite_names();
        for s in &self.suites {
            if !known.contains(&s.as_str()) {
                return Err(Error::Config(format!("unknown suite {s:?}; known: {known:?}")));
            }
        }
        Ok(known.into_iter().filter(|k| self.suites.iter().any(|s| s == k)).collect())
    }
}

/// Suite names in registry order.
pub fn suite_names() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for c in REGISTRY {
        if !out.contains(&c.suite) {
            out.push(c.suite);
        }
    }
    out
}

/// Shared state of one run.
pub struct Context {
    pub params: Params,
    pub window: Grid,
    pub precision: Precision,
    pub options: TransformOptions,
    transform: OnceLock<std::result::Result<Transform, Error>>,
}

impl Context {
    /// The window used for transform tables: the configured window clipped to
    /// `[TRANSFORM_K_MIN, TRANSFORM_K_MAX]`.
    pub fn transform_window(&self) -> Result<Grid> {
        Grid::new(self.window.k_min.max(TRANSFORM_K_MIN), self.window.k_max.min(TRANSFORM_K_MAX))
    }

    /// Transform tables, built once per run.
    pub fn transform(&self) -> Result<&Transform> {
        self.transform
            .get_or_init(|| Transform::new(&self.params, self.transform_window()?, self.options))
            .as_ref()
            .map_err(|e| e.clone())
    }
}

/// Result of a check body: a residual with the inputs at which it was
/// attained, or a reason why the check does not apply to the parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Measured { residual: f64, inputs: String },
    Skipped(String),
}

/// One line of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckResult {
    pub suite: String,
    pub check_id: String,
    pub anchor: String,
    /// `None` when the check raised an error or produced a non-finite value.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Inputs at which the largest residual occurred, or the failing inputs.
    pub inputs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// A check that did not apply to the parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Skipped {
    pub suite: String,
    pub check_id: String,
    pub reason: String,
}

/// Results of a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub results: Vec<CheckResult>,
    pub skipped: Vec<Skipped>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

fn check_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a of the id, mixed into the run seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs one registered check.
pub fn run_check(spec: &CheckSpec, ctx: &Context, seed: u64, timings: bool) -> std::result::Result<CheckResult, Skipped> {
    let mut rng = Rng::seed_from_u64(check_seed(seed, spec.id));
    let start = Instant::now();
    let out = (spec.run)(ctx, &mut rng);
    let wall = timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let base = |residual: Option<f64>, inputs: String, error: Option<String>| {
        let passed = residual.is_some_and(|r| r <= spec.tolerance);
        CheckResult {
            suite: spec.suite.into(),
            check_id: spec.id.into(),
            anchor: spec.anchor.into(),
            residual,
            tolerance: spec.tolerance,
            passed,
            inputs,
            error,
            wall_time_ms: wall,
        }
    };
    match out {
        Ok(Outcome::Measured { residual, inputs }) => Ok(base(residual.is_finite().then_some(residual), inputs, None)),
        Ok(Outcome::Skipped(reason)) => Err(Skipped { suite: spec.suite.into(), check_id: spec.id.into(), reason }),
        Err(e) => Ok(base(None, String::new(), Some(e.to_string()))),
    }
}

/// Runs the configured suites. Errors inside a check are recorded in its
/// result; only configuration problems abort the run.
pub fn run_suites(cfg: &RunConfig) -> Result<RunReport> {
    let ctx = cfg.context()?;
    let suites = cfg.selected_suites()?;
    let per_suite: Vec<Vec<std::result::Result<CheckResult, Skipped>>> = suites
        .par_iter()
        .map(|s| REGISTRY.iter().filter(|c| c.suite == *s).map(|c| run_check(c, &ctx, cfg.seed, cfg.record_timings)).collect())
        .collect();
    let mut report = RunReport::default();
    for r in per_suite.into_iter().flatten() {
        match r {
            Ok(c) => report.results.push(c),
            Err(s) => report.skipped.push(s),
        }
    }
    Ok(report)
}

/// Per-suite part of the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSummary {
    pub checks: usize,
    pub failed: usize,
    pub max_residual: Option<f64>,
}

/// Last line of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub skipped: Vec<Skipped>,
    pub suites: BTreeMap<String, SuiteSummary>,
}

impl Summary {
    pub fn new(report: &RunReport, seed: u64) -> Summary {
        let mut suites: BTreeMap<String, SuiteSummary> = BTreeMap::new();
        for r in &report.results {
            let e = suites.entry(r.suite.clone()).or_insert(SuiteSummary { checks: 0, failed: 0, max_residual: None });
            e.checks += 1;
            if !r.passed {
                e.failed += 1;
            }
            if let Some(x) = r.residual {
                e.max_residual = Some(e.max_residual.map_or(x, |m| m.max(x)));
            }
        }
        let passed = report.results.iter().filter(|r| r.passed).count();
        Summary {
            seed,
            total: report.results.len(),
            passed,
            failed: report.results.len() - passed,
            errors: report.results.iter().filter(|r| r.error.is_some()).count(),
            skipped: report.skipped.clone(),
            suites,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record {
    Check(CheckResult),
    Summary(Summary),
}

/// Line-delimited JSON: one `check` record per result, then one `summary`
/// record.
pub fn render_report(report: &RunReport, seed: u64) -> String {
    let mut out = String::new();
    for r in &report.results {
        out.push_str(&serde_json::to_string(&Record::Check(r.clone())).expect("serialisable"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&Record::Summary(Summary::new(report, seed))).expect("serialisable"));
    out.push('\n');
    out
}

/// Writes [`render_report`] to `path`.
pub fn emit_report(path: &Path, report: &RunReport, seed: u64) -> Result<()> {
    std::fs::write(path, render_report(report, seed))?;
    Ok(())
}

/// Parses a report written by [`emit_report`].
pub fn parse_report(text: &str) -> Result<(Vec<CheckResult>, Summary)> {
    let mut checks = Vec::new();
    let mut summary = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str::<Record>(line).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))? {
            Record::Check(c) => checks.push(c),
            Record::Summary(s) => summary = Some(s),
        }
    }
    Ok((checks, summary.ok_or_else(|| Error::Parse("report has no summary record".into()))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_invariant_has_a_check() {
        for label in INVARIANTS {
            assert!(REGISTRY.iter().any(|c| c.covers.contains(label)), "no check covers {label}");
        }
        for c in REGISTRY {
            for l in c.covers {
                assert!(INVARIANTS.contains(l), "{} covers unknown label {l}", c.id);
            }
        }
    }

    #[test]
    fn check_ids_are_unique() {
        let mut ids: Vec<&str> = REGISTRY.iter().map(|c| c.id).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn config_rejects_unknown_keys_and_empty_suites() {
        assert!(matches!(RunConfig::from_json(r#"{"params":"ps1","suites":["theta"],"colour":1}"#), Err(Error::Config(_))));
        let cfg = RunConfig::from_json(r#"{"params":"ps1","suites":[]}"#).unwrap();
        assert!(matches!(run_suites(&cfg), Err(Error::Config(_))));
        let cfg = RunConfig::from_json(r#"{"params":"ps1","suites":["nope"]}"#).unwrap();
        assert!(matches!(run_suites(&cfg), Err(Error::Config(_))));
        let cfg = RunConfig::from_json(r#"{"params":"ps9","suites":["theta"]}"#).unwrap();
        assert!(matches!(run_suites(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn raw_parameters_parse() {
        let cfg = RunConfig::from_json(
            r#"{"params":{"q":0.5,"z_minus":-1,"z_plus":1,"a":[1.3,0],"b":[1.8,0],"c":[1.25,0],"d":[1.9,0]},"suites":["theta"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.params.resolve().unwrap(), Params::preset("ps2").unwrap());
    }

    #[test]
    fn empty_report_is_summary_only() {
        let text = render_report(&RunReport::default(), 3);
        assert_eq!(text.lines().count(), 1);
        let (checks, s) = parse_report(&text).unwrap();
        assert!(checks.is_empty());
        assert_eq!((s.total, s.seed), (0, 3));
    }

    #[test]
    fn residuals_round_trip() {
        let r = CheckResult {
            suite: "s".into(),
            check_id: "c".into(),
            anchor: "a".into(),
            residual: Some(1.234_567_890_123_456_7e-11),
            tolerance: 1e-10,
            passed: true,
            inputs: String::new(),
            error: None,
            wall_time_ms: None,
        };
        let report = RunReport { results: vec![r.clone()], skipped: vec![] };
        let (checks, _) = parse_report(&render_report(&report, 0)).unwrap();
        assert_eq!(checks[0], r);
    }

    #[test]
    fn theta_suite_is_deterministic() {
        let mut cfg = RunConfig::new(ParamSpec::Preset("ps1".into()), &["theta"]);
        cfg.seed = 11;
        let a = render_report(&run_suites(&cfg).unwrap(), cfg.seed);
        let b = render_report(&run_suites(&cfg).unwrap(), cfg.seed);
        assert_eq!(a, b);
        let report = run_suites(&cfg).unwrap();
        assert!(report.all_passed(), "{a}");
    }
}
