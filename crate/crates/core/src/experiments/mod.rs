//! Monte Carlo and exact experiments for the limit theorems.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]: trajectory
//! `i` draws from the substream `(seed, id, i)`, per-trajectory results are
//! collected in index order and reduced sequentially, so reports are
//! byte-identical across runs and thread counts.

mod geometry;
mod occurrence;
mod progress;
mod projections;

use std::collections::BTreeMap;
use std::fmt;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::group::{Element, Group, GroupError};
use crate::markov::qi::QiBijection;
use crate::markov::{Body, Kernel, KernelError};
use crate::projection::{ProjectionError, ProjectionSystem};
use crate::rng::{substream, RNG_FAMILY};
use crate::tree::TreeModel;

pub use geometry::morse_constant;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LinearProgress,
    TranslationLength,
    Deviation,
    Clt,
    GromovTail,
    Subword,
    Backtracking,
    MomentContraction,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::LinearProgress,
        ExperimentKind::TranslationLength,
        ExperimentKind::Deviation,
        ExperimentKind::Clt,
        ExperimentKind::GromovTail,
        ExperimentKind::Subword,
        ExperimentKind::Backtracking,
        ExperimentKind::MomentContraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LinearProgress => "linear_progress",
            ExperimentKind::TranslationLength => "translation_length",
            ExperimentKind::Deviation => "deviation",
            ExperimentKind::Clt => "clt",
            ExperimentKind::GromovTail => "gromov_tail",
            ExperimentKind::Subword => "subword",
            ExperimentKind::Backtracking => "backtracking",
            ExperimentKind::MomentContraction => "moment_contraction",
        }
    }

    /// The statement the experiment tests.
    pub fn claim(self) -> &'static str {
        match self {
            ExperimentKind::LinearProgress => "linear progress with exponentially small failure probability",
            ExperimentKind::TranslationLength => "translation length grows linearly, loxodromics are generic",
            ExperimentKind::Deviation => "sample paths stay close to geodesics with exponential tails",
            ExperimentKind::Clt => "central limit theorem for the distance from the start",
            ExperimentKind::GromovTail => "Gromov product of w_n and w_n^2 at w_n has linear-scale exponential tails",
            ExperimentKind::Subword => "short words appear as increments of the sample path",
            ExperimentKind::Backtracking => "backtracking measured by projections has exponential tails",
            ExperimentKind::MomentContraction => "exponential moments of the projection sum contract",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tolerance band. `center ± width`, `≥ min` and `≤ max` may be combined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Tolerance {
    pub fn band(center: f64, width: f64) -> Self {
        Tolerance { center: Some(center), width: Some(width), ..Default::default() }
    }

    pub fn at_most(max: f64) -> Self {
        Tolerance { max: Some(max), ..Default::default() }
    }

    pub fn at_least(min: f64) -> Self {
        Tolerance { min: Some(min), ..Default::default() }
    }

    fn validate(&self, key: &str) -> Result<(), ExperimentError> {
        if self.center.is_some() != self.width.is_some() {
            return Err(ExperimentError::Config(format!("tolerance {key}: center and width go together")));
        }
        if self.center.is_none() && self.min.is_none() && self.max.is_none() {
            return Err(ExperimentError::Config(format!("tolerance {key} is empty")));
        }
        if self.width.is_some_and(|w| w < 0.0) {
            return Err(ExperimentError::Config(format!("tolerance {key} has a negative width")));
        }
        Ok(())
    }

    /// Widen by `scale`: band widths and upper limits are multiplied, lower
    /// limits are left alone.
    pub fn scaled(&self, scale: f64) -> Self {
        Tolerance {
            center: self.center,
            width: self.width.map(|w| w * scale),
            min: self.min,
            max: self.max.map(|m| m * scale),
        }
    }

    pub fn admits(&self, v: f64) -> bool {
        if v.is_nan() {
            return false;
        }
        let band = match (self.center, self.width) {
            (Some(c), Some(w)) => (v - c).abs() <= w,
            _ => true,
        };
        band && self.min.is_none_or(|m| v >= m) && self.max.is_none_or(|m| v <= m)
    }
}

/// Configuration of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Report name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub group: String,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub germ: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behrstock: Option<u64>,
    pub n_grid: Vec<usize>,
    pub trajectories: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Starting point `o`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    /// Second point `p` (backtracking).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Word `y` (subword occurrence).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    /// Linear progress: also estimate `P[d < cutoff]` at every `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// Deviation: positions `k = ratio·n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// Deviation: tail table runs over `l = 0..=l_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_max: Option<u64>,
    /// Deviation: inclusive range of `l` used by the exponential fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_range: Option<[u64; 2]>,
    /// Deviation: quasi-geodesic constant whose Morse constant is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasi_constant: Option<u64>,
    /// Deviation: coupled kernel run on the same randomness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_kernel: Option<String>,
    /// Gromov tail: `ε` values for `P[(x₀, w_n²x₀)_{w_n x₀} ≥ εn]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_grid: Option<Vec<f64>>,
    /// Backtracking: `t` values for `P[max_r Σ ≥ t]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<u64>>,
    /// Moment contraction: `λ` values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    /// Moment contraction: number of sampled `(o, p)` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    /// CLT: known drift and variance used for a second standardisation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_variance: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, Tolerance>,
}

impl ExperimentConfig {
    /// A config with the required fields set and everything else absent.
    pub fn new(kind: ExperimentKind, group: &str, kernel: &str, n_grid: Vec<usize>, trajectories: usize) -> Self {
        ExperimentConfig {
            kind,
            id: None,
            group: group.into(),
            kernel: kernel.into(),
            germ: None,
            threshold: None,
            behrstock: None,
            n_grid,
            trajectories,
            seed: None,
            start: None,
            target: None,
            word: None,
            cutoff: None,
            ratios: None,
            l_max: None,
            fit_range: None,
            quasi_constant: None,
            compare_kernel: None,
            epsilon_grid: None,
            t_grid: None,
            lambda_grid: None,
            pairs: None,
            reference_drift: None,
            reference_variance: None,
            tolerances: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn with_tolerance(mut self, key: &str, t: Tolerance) -> Self {
        self.tolerances.insert(key.into(), t);
        self
    }

    /// Structural validation, before any compute.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(format!("{}: {m}", self.id())));
        if self.trajectories == 0 {
            return bad("trajectories must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if !self.id().chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return bad("id may only use letters, digits, '_' and '-'".into());
        }
        for (k, t) in &self.tolerances {
            t.validate(k)?;
        }
        if let Some(r) = &self.ratios {
            if r.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return bad("ratios must lie in [0, 1]".into());
            }
        }
        if let Some([a, b]) = self.fit_range {
            if a > b {
                return bad("fit_range must be increasing".into());
            }
        }
        let needs_germ = matches!(self.kind, ExperimentKind::Backtracking | ExperimentKind::MomentContraction);
        if needs_germ && self.germ.is_none() {
            return bad("a germ is required".into());
        }
        if self.kind == ExperimentKind::Backtracking && self.target.is_none() {
            return bad("backtracking needs a target p".into());
        }
        if self.kind == ExperimentKind::Subword && self.word.is_none() {
            return bad("subword needs a word".into());
        }
        Ok(())
    }

    /// Resolve the group, kernel and start point.
    pub(crate) fn setup(&self) -> Result<Setup, ExperimentError> {
        self.validate()?;
        let group: Group = self.group.parse()?;
        let kernel = Kernel::from_descriptor(&group, &self.kernel)?;
        let start = match &self.start {
            Some(s) => group.parse_element(s)?,
            None => group.identity(),
        };
        let model = TreeModel::new(group.clone());
        Ok(Setup { group, model, kernel, start })
    }

    /// Resolve every descriptor the experiment uses, without running it.
    pub fn resolve(&self) -> Result<(), ExperimentError> {
        let s = self.setup()?;
        if self.germ.is_some() {
            self.projection_system(&s.model)?;
        }
        for e in [&self.target, &self.word].into_iter().flatten() {
            s.group.parse_element(e)?;
        }
        if let Some(k) = &self.compare_kernel {
            Kernel::from_descriptor(&s.group, k)?;
        }
        Ok(())
    }

    pub(crate) fn projection_system(&self, model: &TreeModel) -> Result<ProjectionSystem, ExperimentError> {
        let germ = model.group().parse_element(self.germ.as_deref().unwrap_or_default())?;
        // build with a loose threshold to learn B, then apply the configured or default one
        let loose = match self.behrstock {
            Some(b) => ProjectionSystem::with_behrstock(model.clone(), &germ, b, u64::MAX / 2)?,
            None => ProjectionSystem::new(model.clone(), &germ, u64::MAX / 2)?,
        };
        let b = loose.behrstock();
        Ok(loose.with_constants(b, self.threshold.unwrap_or(ProjectionSystem::default_threshold(b)))?)
    }

    fn seed(&self) -> u64 {
        self.seed.expect("seed is resolved before running")
    }
}

pub(crate) struct Setup {
    pub group: Group,
    pub model: TreeModel,
    pub kernel: Kernel,
    pub start: Element,
}

/// Rank of the free group if `kernel` has the law of the simple random walk
/// on `F_rank` up to an isometry fixing the identity, so that the radial law
/// is an exact oracle for distances from the start.
pub(crate) fn radial_oracle_rank(kernel: &Kernel) -> Option<usize> {
    let group = kernel.group();
    if !group.is_free() {
        return None;
    }
    match &kernel.body {
        Body::RandomWalk { steps, .. } => {
            let gens = group.generators();
            let uniform = steps.len() == gens.len()
                && gens.iter().all(|g| steps.iter().any(|(s, p)| *s == g.element && (p - 1.0 / gens.len() as f64).abs() < 1e-12));
            uniform.then_some(gens.len() / 2)
        }
        Body::Pushforward { map: QiBijection::Identity | QiBijection::DepthRelabel { .. }, base } => radial_oracle_rank(base),
        _ => None,
    }
}

/// Run `f` on trajectories `0..count` in parallel; results come back in index order.
pub(crate) fn par_samples<T, F>(seed: u64, label: &str, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..count).into_par_iter().map(|i| f(&mut substream(seed, label, i as u64))).collect()
}

/// One tolerance check, recorded with the number it judged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: Tolerance,
    pub passed: bool,
}

/// A fitted constant and the residual of its fit (or its standard error).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fitted {
    pub value: f64,
    pub residual: f64,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub rng: String,
    pub code_version: String,
    pub tolerance_scale: f64,
}

/// A numeric table written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(|x| x.to_string())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub kind: ExperimentKind,
    pub claim: String,
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub statistics: Value,
    pub fitted: BTreeMap<String, Fitted>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub tail: Option<Table>,
    #[serde(skip)]
    pub hist: Option<Table>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Collects checks while an experiment runs.
pub(crate) struct Judge<'a> {
    cfg: &'a ExperimentConfig,
    scale: f64,
    pub checks: Vec<Check>,
    pub fitted: BTreeMap<String, Fitted>,
    pub notes: Vec<String>,
}

impl<'a> Judge<'a> {
    fn new(cfg: &'a ExperimentConfig, scale: f64) -> Self {
        Judge { cfg, scale, checks: Vec::new(), fitted: BTreeMap::new(), notes: Vec::new() }
    }

    /// Check `value` against the configured tolerance `key`, if there is one.
    pub fn configured(&mut self, key: &str, value: f64) {
        if let Some(t) = self.cfg.tolerances.get(key) {
            let t = t.scaled(self.scale);
            self.checks.push(Check { name: key.into(), value, passed: t.admits(value), tolerance: t });
        }
    }

    /// A check that always runs (exact identities and oracle guards).
    pub fn always(&mut self, key: &str, value: f64, t: Tolerance) {
        let t = self.cfg.tolerances.get(key).cloned().unwrap_or(t).scaled(self.scale);
        self.checks.push(Check { name: key.into(), value, passed: t.admits(value), tolerance: t });
    }

    pub fn fit(&mut self, key: &str, value: f64, residual: f64, method: &str) {
        self.fitted.insert(key.into(), Fitted { value, residual, method: method.into() });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

/// Outputs of an experiment body before it is wrapped into a report.
pub(crate) struct Outcome {
    pub statistics: Value,
    pub tail: Option<Table>,
    pub hist: Option<Table>,
}

/// Run one experiment. `cfg.seed` must be set; `scale` widens tolerances.
pub fn run_experiment(cfg: &ExperimentConfig, scale: f64) -> Result<ExperimentReport, ExperimentError> {
    if cfg.seed.is_none() {
        return Err(ExperimentError::Config(format!("{}: seed is not set", cfg.id())));
    }
    let setup = cfg.setup()?;
    let mut judge = Judge::new(cfg, scale);
    let out = match cfg.kind {
        ExperimentKind::LinearProgress => progress::linear_progress(cfg, &setup, &mut judge)?,
        ExperimentKind::Clt => progress::clt(cfg, &setup, &mut judge)?,
        ExperimentKind::TranslationLength => geometry::translation_length(cfg, &setup, &mut judge)?,
        ExperimentKind::GromovTail => geometry::gromov_tail(cfg, &setup, &mut judge)?,
        ExperimentKind::Deviation => geometry::deviation(cfg, &setup, &mut judge)?,
        ExperimentKind::Subword => occurrence::subword(cfg, &setup, &mut judge)?,
        ExperimentKind::Backtracking => projections::backtracking(cfg, &setup, &mut judge)?,
        ExperimentKind::MomentContraction => projections::moment_contraction(cfg, &setup, &mut judge)?,
    };
    let passed = judge.checks.iter().all(|c| c.passed);
    Ok(ExperimentReport {
        id: cfg.id(),
        kind: cfg.kind,
        claim: cfg.kind.claim().into(),
        provenance: Provenance {
            seed: cfg.seed(),
            rng: RNG_FAMILY.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            tolerance_scale: scale,
        },
        config: cfg.clone(),
        statistics: out.statistics,
        fitted: judge.fitted,
        checks: judge.checks,
        notes: judge.notes,
        passed,
        tail: out.tail,
        hist: out.hist,
    })
}

/// Fraction helper.
pub(crate) fn frac(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}
