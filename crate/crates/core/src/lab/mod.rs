//! Config-driven runs: resolve seeds, run experiments, write and audit run directories.
//!
//! A run directory holds `manifest.json`, the resolved `config.toml` and, per
//! experiment, `<id>.report.json` plus optional `<id>.tail.csv` and
//! `<id>.hist.csv`. The resolved config has every seed filled in, so feeding it
//! (or the manifest) back to [`cmd_experiment`] reproduces the reports byte for byte.

mod verify;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::experiments::{run_experiment, ExperimentConfig, ExperimentError, ExperimentReport};
use crate::rng::{fresh_seed, substream, MAX_SEED, RNG_FAMILY};

pub use verify::{cmd_verify, Suite, VerifyLine, VerifyOptions, VerifyOutcome};

pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_CONFIG: &str = "config.toml";

/// Stable process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const TOLERANCE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => exit::CONFIG,
            LabError::Runtime(_) => exit::RUNTIME,
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        LabError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<ExperimentError> for LabError {
    fn from(e: ExperimentError) -> Self {
        LabError::Config(e.to_string())
    }
}

/// Run-wide settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Master seed; per-experiment seeds that are absent derive from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_scale: Option<f64>,
}

/// The config file: a `[run]` table and one `[[experiment]]` table per experiment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configs serialise")
    }

    /// Read a TOML config, or the config embedded in a run manifest.
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|x| x == "json") {
            let m: RunManifest = serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
            return Ok(m.config);
        }
        Self::parse(&text)
    }

    /// Schema checks and descriptor resolution for every experiment, before any compute.
    pub fn validate(&self) -> Result<(), LabError> {
        if self.experiments.is_empty() {
            return Err(LabError::Config("no [[experiment]] entries".into()));
        }
        if self.run.tolerance_scale.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
            return Err(LabError::Config("tolerance_scale must be positive".into()));
        }
        let seeds = self.run.seed.iter().chain(self.experiments.iter().filter_map(|e| e.seed.as_ref()));
        if let Some(s) = seeds.into_iter().find(|s| **s > MAX_SEED) {
            return Err(LabError::Config(format!("seed {s} exceeds {MAX_SEED}")));
        }
        let mut ids = BTreeSet::new();
        for e in &self.experiments {
            if !ids.insert(e.id()) {
                return Err(LabError::Config(format!("duplicate experiment id {}", e.id())));
            }
            e.resolve()?;
        }
        Ok(())
    }

    /// Fill in the master seed and every absent per-experiment seed.
    /// `override_seed` wins over the config's own master seed; explicit
    /// per-experiment seeds are kept.
    pub fn resolve_seeds(&mut self, override_seed: Option<u64>) {
        let master = override_seed.or(self.run.seed).unwrap_or_else(fresh_seed);
        self.run.seed = Some(master);
        for e in &mut self.experiments {
            if e.seed.is_none() {
                e.seed = Some(substream(master, &format!("experiment:{}", e.id()), 0).random::<u64>() >> 1);
            }
        }
    }
}

/// One experiment's entry in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub kind: String,
    pub passed: bool,
    pub report: String,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hist: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub code_version: String,
    pub rng: String,
    pub tolerance_scale: f64,
    pub resolved_config: String,
    pub entries: Vec<ManifestEntry>,
    /// The exact config used, seeds included.
    pub config: RunConfig,
}

/// Command-line overrides for a run.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Replace every experiment's trajectory count.
    pub samples: Option<usize>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub reports: Vec<ExperimentReport>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::SUCCESS
        } else {
            exit::TOLERANCE
        }
    }

    /// One line per experiment.
    pub fn lines(&self) -> Vec<String> {
        self.reports
            .iter()
            .map(|r| {
                let failed: Vec<&str> = r.failed_checks().iter().map(|c| c.name.as_str()).collect();
                if failed.is_empty() {
                    format!("PASS {} ({})", r.id, r.kind)
                } else {
                    format!("FAIL {} ({}): {}", r.id, r.kind, failed.join(", "))
                }
            })
            .collect()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(path: &Path, text: &str) -> Result<(), LabError> {
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

/// Run every experiment of `config` and write the run directory.
pub fn run_config(mut config: RunConfig, config_path: &str, opts: &RunOptions) -> Result<RunSummary, LabError> {
    if let Some(n) = opts.samples {
        if n == 0 {
            return Err(LabError::Config("--samples must be at least 1".into()));
        }
        for e in &mut config.experiments {
            e.trajectories = n;
        }
    }
    if let Some(s) = opts.tolerance_scale {
        config.run.tolerance_scale = Some(s);
    }
    if let Some(s) = opts.seed.filter(|s| *s > MAX_SEED) {
        return Err(LabError::Config(format!("seed {s} exceeds {MAX_SEED}")));
    }
    config.validate()?;
    config.resolve_seeds(opts.seed);
    let dir = opts
        .out
        .clone()
        .or_else(|| config.run.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("runs/run-{}", config.run.seed.expect("resolved"))));
    config.run.out = Some(dir.display().to_string());
    let scale = config.run.tolerance_scale.unwrap_or(1.0);

    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    write(&dir.join(RESOLVED_CONFIG), &config.to_toml())?;

    let mut reports = Vec::new();
    let mut entries = Vec::new();
    for e in &config.experiments {
        let report = run_experiment(e, scale).map_err(|err| LabError::Runtime(err.to_string()))?;
        let id = report.id.clone();
        let json = report.to_json();
        let report_file = format!("{id}.report.json");
        write(&dir.join(&report_file), &json)?;
        let mut entry = ManifestEntry {
            id: id.clone(),
            kind: report.kind.to_string(),
            passed: report.passed,
            report: report_file,
            sha256: sha256_hex(json.as_bytes()),
            tail: None,
            hist: None,
        };
        if let Some(t) = &report.tail {
            let f = format!("{id}.tail.csv");
            write(&dir.join(&f), &t.to_csv())?;
            entry.tail = Some(f);
        }
        if let Some(h) = &report.hist {
            let f = format!("{id}.hist.csv");
            write(&dir.join(&f), &h.to_csv())?;
            entry.hist = Some(f);
        }
        entries.push(entry);
        reports.push(report);
    }
    let manifest = RunManifest {
        config_path: config_path.into(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        code_version: env!("CARGO_PKG_VERSION").into(),
        rng: RNG_FAMILY.into(),
        tolerance_scale: scale,
        resolved_config: RESOLVED_CONFIG.into(),
        entries,
        config,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    write(&dir.join(MANIFEST), &text)?;
    Ok(RunSummary { dir, manifest, reports })
}

/// `experiment <config>`: load a TOML config (or a previous manifest) and run it.
pub fn cmd_experiment(path: &Path, opts: &RunOptions) -> Result<RunSummary, LabError> {
    let config = RunConfig::load(path)?;
    run_config(config, &path.display().to_string(), opts)
}

/// Result of auditing a run directory.
#[derive(Clone, Debug)]
pub struct RunAudit {
    pub table: String,
    pub integrity_warnings: Vec<String>,
    pub all_passed: bool,
}

impl RunAudit {
    pub fn exit_code(&self) -> i32 {
        if self.all_passed && self.integrity_warnings.is_empty() {
            exit::SUCCESS
        } else {
            exit::TOLERANCE
        }
    }
}

/// `report <dir>`: check every report against its manifest checksum and
/// tabulate claims, fitted constants and verdicts.
pub fn cmd_report(dir: &Path) -> Result<RunAudit, LabError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(LabError::Config(format!("no manifest: {} does not exist", path.display())));
    }
    let text = fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("corrupt manifest {}: {e}", path.display())))?;
    let mut warnings = Vec::new();
    let mut table = String::new();
    let seed = manifest.config.run.seed.map_or_else(|| "unset".to_string(), |s| s.to_string());
    let _ = writeln!(table, "run seed {seed}, code {}, tolerance scale {}", manifest.code_version, manifest.tolerance_scale);
    let _ = writeln!(table, "{:<24} {:<8} {:<70} fitted", "experiment", "verdict", "claim");
    let mut all_passed = true;
    for entry in &manifest.entries {
        let rp = dir.join(&entry.report);
        let body = match fs::read(&rp) {
            Ok(b) => b,
            Err(e) => {
                warnings.push(format!("{}: missing report ({e})", entry.report));
                all_passed = false;
                continue;
            }
        };
        if sha256_hex(&body) != entry.sha256 {
            warnings.push(format!("{}: checksum mismatch, the report was modified after the run", entry.report));
        }
        let value: serde_json::Value = match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => {
                warnings.push(format!("{}: unreadable report ({e})", entry.report));
                all_passed = false;
                continue;
            }
        };
        let passed = value["passed"].as_bool().unwrap_or(false);
        all_passed &= passed;
        let fitted = value["fitted"]
            .as_object()
            .map(|m| {
                m.iter()
                    .map(|(k, f)| format!("{k}={:.4}", f["value"].as_f64().unwrap_or(f64::NAN)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        let claim = value["claim"].as_str().unwrap_or("");
        let _ = writeln!(table, "{:<24} {:<8} {:<70} {}", entry.id, if passed { "PASS" } else { "FAIL" }, claim, fitted);
    }
    for w in &warnings {
        let _ = writeln!(table, "integrity warning: {w}");
    }
    Ok(RunAudit { table, integrity_warnings: warnings, all_passed })
}

/// Run `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, LabError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(LabError::Config("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| LabError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, Tolerance};

    fn minimal() -> RunConfig {
        let mut e = ExperimentConfig::new(ExperimentKind::LinearProgress, "free:2", "srw:uniform", vec![100], 100);
        e.cutoff = Some(20.0);
        RunConfig { run: RunSection { seed: Some(5), ..Default::default() }, experiments: vec![e.with_tolerance("drift", Tolerance::band(0.5, 0.1))] }
    }

    #[test]
    fn config_round_trip() {
        let c = minimal();
        let text = c.to_toml();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_and_bad_descriptors_are_config_errors() {
        let bad = "[run]\nseed = 1\n[[experiment]]\nkind = \"clt\"\ngroup = \"free:2\"\nkernel = \"srw:uniform\"\nn_grid = [10]\ntrajectories = 3\nbogus = 1\n";
        assert!(matches!(RunConfig::parse(bad), Err(LabError::Config(_))));
        let mut c = minimal();
        c.experiments[0].kernel = "srw:q=1".into();
        assert_eq!(c.validate().unwrap_err().exit_code(), exit::CONFIG);
    }

    #[test]
    fn seeds_resolve_in_order_of_precedence() {
        let mut c = minimal();
        c.resolve_seeds(None);
        let derived = c.experiments[0].seed.unwrap();
        let mut again = minimal();
        again.resolve_seeds(None);
        assert_eq!(again.experiments[0].seed, Some(derived));
        let mut cli = minimal();
        cli.resolve_seeds(Some(9));
        assert_eq!(cli.run.seed, Some(9));
        assert_ne!(cli.experiments[0].seed, Some(derived));
        let mut fresh = minimal();
        fresh.run.seed = None;
        fresh.resolve_seeds(None);
        assert!(fresh.run.seed.is_some());
    }

    #[test]
    fn run_directory_and_audit() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions { out: Some(dir.path().to_path_buf()), ..Default::default() };
        let s = run_config(minimal(), "inline", &opts).unwrap();
        assert_eq!(s.reports.len(), 1);
        for f in [MANIFEST, RESOLVED_CONFIG, "linear_progress.report.json", "linear_progress.tail.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let audit = cmd_report(dir.path()).unwrap();
        assert!(audit.integrity_warnings.is_empty());

        // rerunning the manifest reproduces the report
        let first = fs::read(dir.path().join("linear_progress.report.json")).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let opts2 = RunOptions { out: Some(dir2.path().to_path_buf()), ..Default::default() };
        cmd_experiment(&dir.path().join(MANIFEST), &opts2).unwrap();
        assert_eq!(first, fs::read(dir2.path().join("linear_progress.report.json")).unwrap());

        fs::write(dir.path().join("linear_progress.report.json"), b"{}").unwrap();
        let audit = cmd_report(dir.path()).unwrap();
        assert_eq!(audit.integrity_warnings.len(), 1);
        assert_eq!(audit.exit_code(), exit::TOLERANCE);

        let empty = tempfile::tempdir().unwrap();
        let err = cmd_report(empty.path()).unwrap_err();
        assert!(err.to_string().contains("no manifest"));
    }
}
