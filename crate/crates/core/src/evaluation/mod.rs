//! Accuracy measurement: minify, recover, compare with the original names.

mod minify;
mod sweep;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::extraction::{analyze, ParseError};
use crate::index::{corpus_files, BuildError, CorpusIndex, IndexBuilder};
use crate::recovery::{recover_file, Contexts, RecoveryConfig};

pub use crate::extraction::fingerprint as ast_fingerprint;
pub use minify::{alpha_minify, GroundTruth, Minified, TruthFunction};
pub use sweep::{parse_grid, sweep, sweep_csv, GridError, SweepParam, SweepRow};

/// Which files are recovered and which index they are recovered against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Every file, against an index that contains it.
    SelfRecovery,
    /// Files whose sorted position is `test_fold` modulo `folds`.
    HoldOut { folds: usize, test_fold: usize },
}

impl Split {
    fn is_test(&self, position: usize) -> bool {
        match *self {
            Split::SelfRecovery => true,
            Split::HoldOut { folds, test_fold } => position % folds == test_fold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub config: RecoveryConfig,
    pub split: Split,
    /// Seed for the minifier's name assignment.
    pub minify_seed: u64,
    /// Count top-level bindings too. They are never renamed, so each is a hit.
    pub all_vars: bool,
    /// Record recovery times in the report.
    pub timings: bool,
    /// Also evaluate every combination of contexts.
    pub ablate: bool,
    /// Input files are already minified, each with a `<stem>.truth.json`.
    pub pre_minified: bool,
    pub jobs: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            config: RecoveryConfig::default(),
            split: Split::SelfRecovery,
            minify_seed: 0,
            all_vars: false,
            timings: false,
            ablate: false,
            pre_minified: false,
            jobs: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("no test files to evaluate")]
    EmptyTestSet,
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid configuration: {0}")]
    Config(#[from] crate::recovery::ConfigError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileAccuracy {
    pub path: String,
    pub hits: usize,
    pub total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub contexts: String,
    pub hits: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub files: usize,
    pub excluded_dynamic_scope: usize,
    pub excluded_errors: usize,
    pub hits: usize,
    pub total: usize,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_file_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_variable_ms: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub ablation: Vec<AblationRow>,
    pub per_file: Vec<FileAccuracy>,
}

fn ratio(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

impl AccuracyReport {
    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("files        {}\n", self.files));
        if self.excluded_dynamic_scope + self.excluded_errors > 0 {
            out.push_str(&format!(
                "excluded     {} (dynamic scope {}, errors {})\n",
                self.excluded_dynamic_scope + self.excluded_errors,
                self.excluded_dynamic_scope,
                self.excluded_errors
            ));
        }
        out.push_str(&format!("variables    {}\n", self.total));
        out.push_str(&format!("recovered    {}\n", self.hits));
        out.push_str(&format!("accuracy     {:.2}%\n", 100.0 * self.accuracy));
        if let Some(ms) = self.mean_file_ms {
            out.push_str(&format!("ms/file      {ms:.3}\n"));
        }
        if let Some(ms) = self.mean_variable_ms {
            out.push_str(&format!("ms/variable  {ms:.3}\n"));
        }
        if !self.ablation.is_empty() {
            out.push_str("\ncontexts        accuracy\n");
            for row in &self.ablation {
                out.push_str(&format!("{:<15} {:.2}%\n", row.contexts, 100.0 * row.accuracy));
            }
        }
        out
    }

    /// Combines reports over disjoint test sets, e.g. the folds of a
    /// cross-validation.
    pub fn merge(reports: &[AccuracyReport]) -> AccuracyReport {
        let sum = |f: fn(&AccuracyReport) -> usize| reports.iter().map(f).sum::<usize>();
        let hits = sum(|r| r.hits);
        let total = sum(|r| r.total);
        let files = sum(|r| r.files);
        let mut per_file: Vec<FileAccuracy> = reports.iter().flat_map(|r| r.per_file.clone()).collect();
        per_file.sort_by(|a, b| a.path.cmp(&b.path));
        let timed = reports.iter().all(|r| r.mean_file_ms.is_some()) && !reports.is_empty();
        let file_ms: f64 = per_file.iter().filter_map(|f| f.elapsed_ms).sum();
        let ablation = match reports.first() {
            Some(first) if !first.ablation.is_empty() => first
                .ablation
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let hits = reports.iter().map(|r| r.ablation[i].hits).sum();
                    let total = reports.iter().map(|r| r.ablation[i].total).sum();
                    AblationRow { contexts: row.contexts.clone(), hits, total, accuracy: ratio(hits, total) }
                })
                .collect(),
            _ => Vec::new(),
        };
        AccuracyReport {
            files,
            excluded_dynamic_scope: sum(|r| r.excluded_dynamic_scope),
            excluded_errors: sum(|r| r.excluded_errors),
            hits,
            total,
            accuracy: ratio(hits, total),
            mean_file_ms: (timed && files > 0).then(|| file_ms / files as f64),
            mean_variable_ms: (timed && total > 0).then(|| file_ms / total as f64),
            ablation,
            per_file,
        }
    }
}

/// One minified test file with its expected names.
#[derive(Debug, Clone)]
pub(crate) struct TestCase {
    path: String,
    source: String,
    truth: GroundTruth,
    globals: usize,
}

pub(crate) struct TestSet {
    cases: Vec<TestCase>,
    excluded_dynamic_scope: usize,
    excluded_errors: usize,
}

fn truth_path(path: &Path) -> PathBuf {
    path.with_extension("truth.json")
}

fn count_globals(source: &str, path: &str) -> Result<usize, ParseError> {
    let parsed = analyze(source, path)?;
    let names: BTreeSet<&str> = parsed
        .symbols
        .iter()
        .filter(|s| s.renamable && s.owner.is_none())
        .map(|s| s.name.as_str())
        .collect();
    Ok(names.len())
}

fn prepare(rel: &str, path: &Path, opts: &EvalOptions) -> Result<Option<TestCase>, String> {
    let source = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let (source, truth) = if opts.pre_minified {
        let truth_file = truth_path(path);
        let text = std::fs::read_to_string(&truth_file)
            .map_err(|e| format!("{}: {e}", truth_file.display()))?;
        let truth: GroundTruth = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", truth_file.display()))?;
        if analyze(&source, rel).map_err(|e| e.to_string())?.dynamic_scope {
            return Ok(None);
        }
        (source, truth)
    } else {
        let seed = opts.minify_seed ^ crc32fast::hash(rel.as_bytes()) as u64;
        let out = alpha_minify(&source, rel, seed).map_err(|e| e.to_string())?;
        if out.dynamic_scope {
            return Ok(None);
        }
        (out.source, out.truth)
    };
    let globals = if opts.all_vars { count_globals(&source, rel).map_err(|e| e.to_string())? } else { 0 };
    Ok(Some(TestCase { path: rel.to_string(), source, truth, globals }))
}

/// Minifies (or loads) the test files of `split`.
pub(crate) fn test_set(files: &[(String, PathBuf)], opts: &EvalOptions) -> TestSet {
    let chosen: Vec<&(String, PathBuf)> =
        files.iter().enumerate().filter(|(i, _)| opts.split.is_test(*i)).map(|(_, f)| f).collect();
    let prepared: Vec<Result<Option<TestCase>, String>> =
        chosen.par_iter().map(|(rel, path)| prepare(rel, path, opts)).collect();
    let mut set = TestSet { cases: Vec::new(), excluded_dynamic_scope: 0, excluded_errors: 0 };
    for ((rel, _), outcome) in chosen.iter().zip(prepared) {
        match outcome {
            Ok(Some(case)) => set.cases.push(case),
            Ok(None) => set.excluded_dynamic_scope += 1,
            Err(err) => {
                log::warn!("{rel}: {err}");
                set.excluded_errors += 1;
            }
        }
    }
    set
}

fn score_case(case: &TestCase, index: &CorpusIndex, config: &RecoveryConfig) -> Result<(FileAccuracy, f64), String> {
    let started = Instant::now();
    let out = recover_file(&case.source, &case.path, index, config, false).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut hits = case.globals;
    let mut total = case.globals;
    for truth in &case.truth.functions {
        let report = out.report.functions.iter().find(|f| f.index == truth.index);
        for (minified, original) in &truth.variables {
            total += 1;
            let applied = report.and_then(|f| f.variables.iter().find(|v| v.variable == *minified));
            if applied.is_some_and(|v| v.applied == *original) {
                hits += 1;
            }
        }
    }
    Ok((FileAccuracy { path: case.path.clone(), hits, total, elapsed_ms: None }, elapsed))
}

pub(crate) fn run_set(set: &TestSet, index: &CorpusIndex, config: &RecoveryConfig, timings: bool) -> AccuracyReport {
    let scored: Vec<Result<(FileAccuracy, f64), String>> =
        set.cases.par_iter().map(|case| score_case(case, index, config)).collect();
    let mut per_file = Vec::with_capacity(scored.len());
    let mut errors = set.excluded_errors;
    let mut elapsed = 0.0;
    for (case, result) in set.cases.iter().zip(scored) {
        match result {
            Ok((mut file, ms)) => {
                elapsed += ms;
                if timings {
                    file.elapsed_ms = Some(ms);
                }
                per_file.push(file);
            }
            Err(err) => {
                log::warn!("{}: {err}", case.path);
                errors += 1;
            }
        }
    }
    let hits = per_file.iter().map(|f| f.hits).sum();
    let total = per_file.iter().map(|f| f.total).sum();
    let files = per_file.len();
    AccuracyReport {
        files,
        excluded_dynamic_scope: set.excluded_dynamic_scope,
        excluded_errors: errors,
        hits,
        total,
        accuracy: ratio(hits, total),
        mean_file_ms: (timings && files > 0).then(|| elapsed / files as f64),
        mean_variable_ms: (timings && total > 0).then(|| elapsed / total as f64),
        ablation: Vec::new(),
        per_file,
    }
}

pub(crate) fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, EvalError> {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| EvalError::Pool(e.to_string())),
        None => Ok(f()),
    }
}

fn check_split(split: Split) -> Result<(), EvalError> {
    if let Split::HoldOut { folds, test_fold } = split {
        if folds < 2 || test_fold >= folds {
            return Err(EvalError::Split(format!("fold {test_fold} of {folds}")));
        }
    }
    Ok(())
}

pub(crate) fn evaluate_files(
    files: &[(String, PathBuf)],
    index: &CorpusIndex,
    opts: &EvalOptions,
) -> Result<AccuracyReport, EvalError> {
    opts.config.validate()?;
    check_split(opts.split)?;
    with_pool(opts.jobs, || {
        let set = test_set(files, opts);
        if set.cases.is_empty() {
            return Err(EvalError::EmptyTestSet);
        }
        let mut report = run_set(&set, index, &opts.config, opts.timings);
        if opts.ablate {
            report.ablation = Contexts::ABLATION
                .iter()
                .map(|(label, contexts)| {
                    let config = RecoveryConfig { contexts: *contexts, ..opts.config.clone() };
                    let r = run_set(&set, index, &config, false);
                    AblationRow { contexts: label.to_string(), hits: r.hits, total: r.total, accuracy: r.accuracy }
                })
                .collect();
        }
        Ok(report)
    })?
}

/// Minifies the test files of `corpus_dir`, recovers them against `index`
/// and reports exact-match accuracy over local variables. Variables left
/// unnamed count as misses.
pub fn evaluate(corpus_dir: &Path, index: &CorpusIndex, opts: &EvalOptions) -> Result<AccuracyReport, EvalError> {
    let files = corpus_files(corpus_dir)?;
    evaluate_files(&files, index, opts)
}

/// Builds an index from the files outside the test folds selected by `keep`.
pub(crate) fn build_training_index(
    files: &[(String, PathBuf)],
    keep: impl Fn(usize) -> bool + Sync + Send,
    jobs: Option<usize>,
) -> Result<CorpusIndex, EvalError> {
    let sources: Vec<(String, Option<String>)> = with_pool(jobs, || {
        files
            .par_iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, (rel, path))| (rel.clone(), std::fs::read_to_string(path).ok()))
            .collect()
    })?;
    let mut builder = IndexBuilder::new().timestamp(0);
    for (rel, source) in sources {
        match source {
            Some(source) => {
                if let Err(err) = builder.add_source(&rel, &source) {
                    log::warn!("{err}");
                }
            }
            None => log::warn!("{rel}: unreadable"),
        }
    }
    Ok(builder.finish()?)
}

/// k-fold cross-validation: each fold is recovered against an index built
/// from the other folds.
pub fn cross_validate(corpus_dir: &Path, folds: usize, opts: &EvalOptions) -> Result<AccuracyReport, EvalError> {
    check_split(Split::HoldOut { folds, test_fold: 0 })?;
    let files = corpus_files(corpus_dir)?;
    let mut reports = Vec::with_capacity(folds);
    for test_fold in 0..folds {
        if !files.iter().enumerate().any(|(i, _)| i % folds == test_fold) {
            continue;
        }
        let index = build_training_index(&files, |i| i % folds != test_fold, opts.jobs)?;
        let fold_opts = EvalOptions { split: Split::HoldOut { folds, test_fold }, ..opts.clone() };
        reports.push(evaluate_files(&files, &index, &fold_opts)?);
    }
    if reports.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    Ok(AccuracyReport::merge(&reports))
}
