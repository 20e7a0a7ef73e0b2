//! Joint name recovery for the variables of one function.
//!
//! Per-variable candidate lists blend the single-variable and task contexts
//! into one score (ST). A beam search then assigns names variable by variable,
//! ranking partial assignments by how well their names co-occur in the corpus.

pub(crate) mod rename;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::extraction::{analyze, locals, records, FunctionRecord, ParseError};
use crate::index::{CorpusIndex, NameId};
use crate::mvc::{ordered_sum, AssocCache, McState};
use crate::svc::{single_var_candidates, sort_by_score, SvcCandidate};
pub use crate::tsc::TscMode;
use crate::tsc::{self, task_candidates};
use rename::Renamer;

/// Which usage contexts take part in recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Contexts {
    pub svc: bool,
    pub tsc: bool,
    pub mvc: bool,
}

impl Default for Contexts {
    fn default() -> Self {
        Contexts { svc: true, tsc: true, mvc: true }
    }
}

impl Contexts {
    /// The six context combinations, TSC alone first and all three last.
    pub const ABLATION: [(&'static str, Contexts); 6] = [
        ("TSC", Contexts { svc: false, tsc: true, mvc: false }),
        ("SVC", Contexts { svc: true, tsc: false, mvc: false }),
        ("TSC+SVC", Contexts { svc: true, tsc: true, mvc: false }),
        ("TSC+MVC", Contexts { svc: false, tsc: true, mvc: true }),
        ("SVC+MVC", Contexts { svc: true, tsc: false, mvc: true }),
        ("TSC+SVC+MVC", Contexts { svc: true, tsc: true, mvc: true }),
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Minimum graph match score for a single-variable candidate.
    pub phi: f64,
    pub beam_k: usize,
    /// Subset size for the association average.
    pub assoc_j: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    /// Per-variable candidate cap.
    pub c_max: usize,
    pub tsc_mode: TscMode,
    pub seed: u64,
    pub contexts: Contexts,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            phi: 0.8,
            beam_k: 30,
            assoc_j: 2,
            alpha: 0.75,
            beta: 0.25,
            gamma: 1.0,
            theta: 0.0,
            c_max: 50,
            tsc_mode: TscMode::FullName,
            seed: 0,
            contexts: Contexts::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("phi must be in (0, 1], got {0}")]
    Phi(f64),
    #[error("{0} must be at least {1}")]
    TooSmall(&'static str, usize),
    #[error("weight {0} must be a finite non-negative number")]
    Weight(&'static str),
    #[error("alpha + beta must be positive")]
    ZeroStWeights,
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(ConfigError::Phi(self.phi));
        }
        if self.beam_k < 1 {
            return Err(ConfigError::TooSmall("beam size", 1));
        }
        if self.assoc_j < 2 {
            return Err(ConfigError::TooSmall("assoc-j", 2));
        }
        if self.c_max < 1 {
            return Err(ConfigError::TooSmall("cmax", 1));
        }
        for (name, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("theta", self.theta),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(ConfigError::Weight(name));
            }
        }
        if self.alpha + self.beta <= 0.0 {
            return Err(ConfigError::ZeroStWeights);
        }
        Ok(())
    }

    /// `(gamma, theta)` as used by the beam: with the multi-variable context
    /// off, entries are ranked by ST alone.
    pub fn beam_weights(&self) -> (f64, f64) {
        if self.contexts.mvc {
            (self.gamma, self.theta)
        } else {
            (0.0, 1.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub name: NameId,
    pub st: f64,
    pub sc: f64,
    pub tc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateList {
    pub variable: String,
    /// Edge count of the variable's relation graph.
    pub edges: usize,
    pub entries: Vec<Candidate>,
}

/// Merges single-variable and task candidates into ST-ranked candidates.
/// A name missing from one side scores 0 there.
pub fn combine_st(
    index: &CorpusIndex,
    svc: Option<&[SvcCandidate]>,
    tsc: &[(NameId, f64)],
    alpha: f64,
    beta: f64,
    c_max: usize,
) -> Vec<Candidate> {
    let mut merged: HashMap<NameId, (f64, f64)> = HashMap::new();
    for c in svc.unwrap_or_default() {
        merged.entry(c.name).or_default().0 = c.score;
    }
    for &(name, score) in tsc {
        merged.entry(name).or_default().1 = score;
    }
    let mut out: Vec<Candidate> = merged
        .into_iter()
        .map(|(name, (sc, tc))| Candidate { name, st: alpha * sc + beta * tc, sc, tc })
        .collect();
    sort_by_score(&mut out, index, |c| (c.name, c.st));
    out.truncate(c_max);
    out
}

/// Builds the candidate list of every variable of `record`.
pub fn candidate_lists(
    record: &FunctionRecord,
    index: &CorpusIndex,
    config: &RecoveryConfig,
) -> Vec<CandidateList> {
    let fn_name = &record.function_name;
    let task = if config.contexts.tsc {
        task_candidates(index, fn_name, config.tsc_mode, config.c_max)
    } else {
        Vec::new()
    };
    record
        .variables
        .iter()
        .map(|(variable, graph)| {
            let svc = (config.contexts.svc && !graph.is_empty())
                .then(|| single_var_candidates(graph, index, config.phi).unwrap_or_default());
            let mut tc = task.clone();
            if config.contexts.tsc {
                let listed: BTreeSet<NameId> = tc.iter().map(|t| t.0).collect();
                for c in svc.iter().flatten().filter(|c| !listed.contains(&c.name)) {
                    tc.push((c.name, tsc::score(index, c.name, fn_name, config.tsc_mode)));
                }
            }
            CandidateList {
                variable: variable.clone(),
                edges: graph.len(),
                entries: combine_st(index, svc.as_deref(), &tc, config.alpha, config.beta, config.c_max),
            }
        })
        .collect()
}

/// The variable with the most edges, earliest on ties.
pub fn pick_first_variable(edge_counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &n) in edge_counts.iter().enumerate() {
        if n > edge_counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pick {
    pub name: NameId,
    pub st: f64,
    /// Chosen at random after every distinct candidate was taken.
    pub fallback: bool,
}

/// A partial assignment during the search.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamEntry {
    /// Indexed like the candidate lists; `None` until assigned.
    pub picks: Vec<Option<Pick>>,
    pub score: f64,
    mc: McState,
    st_sum: f64,
    fallbacks: usize,
}

impl BeamEntry {
    fn root(vars: usize, j: usize) -> Self {
        BeamEntry { picks: vec![None; vars], score: 0.0, mc: McState::empty(j), st_sum: 0.0, fallbacks: 0 }
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    fn holds(&self, name: NameId) -> bool {
        self.mc.names().binary_search(&name).is_ok()
    }

    fn extend(&self, cache: &AssocCache, var: usize, pick: Pick, (gamma, theta): (f64, f64)) -> Self {
        let mut picks = self.picks.clone();
        picks[var] = Some(pick);
        let mc = self.mc.extended(cache, pick.name);
        let mut st: Vec<f64> = picks.iter().flatten().map(|p| p.st).collect();
        let count = st.len() as f64;
        let st_sum = ordered_sum(&mut st);
        let score = gamma * mc.mc() + theta * (st_sum / count);
        BeamEntry { picks, score, mc, st_sum, fallbacks: self.fallbacks + usize::from(pick.fallback) }
    }
}

/// Beam order: fewer fallbacks, higher score, higher ST total, then names
/// in variable order.
fn beam_order(index: &CorpusIndex) -> impl Fn(&BeamEntry, &BeamEntry) -> Ordering + '_ {
    move |a, b| {
        a.fallbacks
            .cmp(&b.fallbacks)
            .then_with(|| b.score.total_cmp(&a.score))
            .then_with(|| b.st_sum.total_cmp(&a.st_sum))
            .then_with(|| {
                let names = |e: &BeamEntry| -> Vec<Option<&str>> {
                    e.picks.iter().map(|p| p.map(|p| index.name(p.name))).collect()
                };
                names(a).cmp(&names(b))
            })
    }
}

/// The remaining variable whose best duplicate-free extension of any entry
/// scores highest; earliest on ties. `remaining` must be non-empty.
pub fn pick_next_variable(
    cache: &AssocCache,
    beam: &[BeamEntry],
    lists: &[CandidateList],
    remaining: &[usize],
    config: &RecoveryConfig,
) -> usize {
    let weights = config.beam_weights();
    let mut best: Option<(usize, f64)> = None;
    for &var in remaining {
        for entry in beam {
            for c in &lists[var].entries {
                if entry.holds(c.name) {
                    continue;
                }
                let pick = Pick { name: c.name, st: c.st, fallback: false };
                let score = entry.extend(cache, var, pick, weights).score;
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((var, score));
                }
            }
        }
    }
    best.map_or(remaining[0], |(var, _)| var)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecoveryError {
    #[error("no variable has any candidate name")]
    EmptyRecovery,
}

/// Beam search over joint assignments. Variables with empty candidate lists
/// stay unassigned. Entries come back best first, at most `beam_k`.
pub fn mvar(
    index: &CorpusIndex,
    lists: &[CandidateList],
    config: &RecoveryConfig,
) -> Result<Vec<BeamEntry>, RecoveryError> {
    let cache = AssocCache::new(index);
    mvar_with(&cache, lists, config)
}

fn mvar_with(
    cache: &AssocCache,
    lists: &[CandidateList],
    config: &RecoveryConfig,
) -> Result<Vec<BeamEntry>, RecoveryError> {
    let index = cache.index();
    let mut remaining: Vec<usize> = (0..lists.len()).filter(|&v| !lists[v].entries.is_empty()).collect();
    if remaining.is_empty() {
        return Err(RecoveryError::EmptyRecovery);
    }
    let weights = config.beam_weights();
    let order = beam_order(index);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let edge_counts: Vec<usize> = remaining.iter().map(|&v| lists[v].edges).collect();
    let first = remaining.remove(pick_first_variable(&edge_counts));
    let root = BeamEntry::root(lists.len(), config.assoc_j);
    let mut beam: Vec<BeamEntry> = lists[first]
        .entries
        .iter()
        .map(|c| root.extend(cache, first, Pick { name: c.name, st: c.st, fallback: false }, weights))
        .collect();
    beam.sort_by(&order);
    beam.truncate(config.beam_k);

    while !remaining.is_empty() {
        let var = pick_next_variable(cache, &beam, lists, &remaining, config);
        remaining.retain(|&v| v != var);
        let entries = &lists[var].entries;
        let mut next = Vec::with_capacity(beam.len() * entries.len());
        for entry in &beam {
            let before = next.len();
            for c in entries.iter().filter(|c| !entry.holds(c.name)) {
                next.push(entry.extend(cache, var, Pick { name: c.name, st: c.st, fallback: false }, weights));
            }
            if next.len() == before {
                let c = entries[rng.random_range(0..entries.len())];
                next.push(entry.extend(cache, var, Pick { name: c.name, st: c.st, fallback: true }, weights));
            }
        }
        next.sort_by(&order);
        next.truncate(config.beam_k);
        beam = next;
    }
    Ok(beam)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedAssignment {
    /// Per variable, in appearance order; `None` when unrecovered.
    pub names: Vec<Option<String>>,
    pub score: f64,
    pub fallback: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub function_name: String,
    /// Variable names as they appear in the input.
    pub variables: Vec<String>,
    pub candidates: Vec<CandidateList>,
    pub ranked: Vec<RankedAssignment>,
    pub elapsed: Duration,
}

impl RecoveryResult {
    /// Top-ranked name per variable.
    pub fn top(&self) -> Vec<Option<&str>> {
        match self.ranked.first() {
            Some(best) => best.names.iter().map(|n| n.as_deref()).collect(),
            None => vec![None; self.variables.len()],
        }
    }

    pub fn unrecovered(&self) -> Vec<&str> {
        self.variables
            .iter()
            .zip(self.top())
            .filter(|(_, n)| n.is_none())
            .map(|(v, _)| v.as_str())
            .collect()
    }
}

/// Recovers names for every variable of one function.
pub fn recover_function(
    record: &FunctionRecord,
    index: &CorpusIndex,
    config: &RecoveryConfig,
) -> RecoveryResult {
    let cache = AssocCache::new(index);
    recover_with(&cache, record, config)
}

fn recover_with(cache: &AssocCache, record: &FunctionRecord, config: &RecoveryConfig) -> RecoveryResult {
    let index = cache.index();
    let started = Instant::now();
    let candidates = candidate_lists(record, index, config);
    let ranked = match mvar_with(cache, &candidates, config) {
        Ok(beam) => beam
            .iter()
            .map(|e| RankedAssignment {
                names: e.picks.iter().map(|p| p.map(|p| index.name(p.name).to_string())).collect(),
                score: e.score,
                fallback: e.picks.iter().map(|p| p.is_some_and(|p| p.fallback)).collect(),
            })
            .collect(),
        Err(RecoveryError::EmptyRecovery) => Vec::new(),
    };
    RecoveryResult {
        function_name: record.function_name.clone(),
        variables: record.variables.iter().map(|(v, _)| v.clone()).collect(),
        candidates,
        ranked,
        elapsed: started.elapsed(),
    }
}

/// How a variable's output name was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The top-ranked name was applied.
    Recovered,
    /// The top-ranked name would change scoping; a lower candidate was used.
    Alternate,
    /// The applied name came from the duplicate fallback.
    Fallback,
    /// The input name was kept.
    Kept,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternativeReport {
    pub name: String,
    pub st: f64,
    pub sc: f64,
    pub tc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableReport {
    pub variable: String,
    pub predicted: Option<String>,
    pub applied: String,
    pub outcome: Outcome,
    pub alternatives: Vec<AlternativeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentReport {
    pub names: Vec<Option<String>>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionReport {
    pub index: usize,
    pub name: String,
    pub variables: Vec<VariableReport>,
    pub assignments: Vec<AssignmentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileReport {
    pub path: String,
    /// Set when the file uses direct `eval` or `with`; no renames are applied.
    pub dynamic_scope: bool,
    pub functions: Vec<FunctionReport>,
}

pub const REPORT_ALTERNATIVES: usize = 5;

/// Output of [`recover_file`].
#[derive(Debug, Clone)]
pub struct FileRecovery {
    pub source: String,
    pub report: FileReport,
    pub results: Vec<RecoveryResult>,
}

/// Recovers every function of a file and rewrites it with the chosen names.
///
/// A name that would shadow or capture another binding is replaced by the
/// next candidate that does not; if none fits, the input name stays.
pub fn recover_file(
    source: &str,
    path: &str,
    index: &CorpusIndex,
    config: &RecoveryConfig,
    timings: bool,
) -> Result<FileRecovery, ParseError> {
    let parsed = analyze(source, path)?;
    let cache = AssocCache::new(index);
    let recs = records(&parsed);
    let vars = locals(&parsed);
    let results: Vec<RecoveryResult> = recs.iter().map(|r| recover_with(&cache, r, config)).collect();
    let mut renamer = Renamer::new(&parsed);
    let mut functions = Vec::with_capacity(recs.len());
    for ((record, result), locals) in recs.iter().zip(&results).zip(&vars) {
        let top = result.top();
        let fallback = result.ranked.first().map(|r| r.fallback.clone()).unwrap_or_default();
        let mut taken: BTreeSet<String> = BTreeSet::new();
        let mut variables = Vec::with_capacity(locals.len());
        for (k, local) in locals.iter().enumerate() {
            let predicted = top[k].map(str::to_string);
            let mut tries: Vec<&str> = predicted.iter().map(String::as_str).collect();
            tries.extend(result.candidates[k].entries.iter().map(|c| index.name(c.name)));
            let mut applied = None;
            if !parsed.dynamic_scope {
                for (attempt, name) in tries.iter().enumerate() {
                    let reserved = top.iter().enumerate().any(|(j, t)| j != k && *t == Some(*name));
                    if taken.contains(*name) || reserved {
                        continue;
                    }
                    if renamer.try_rename_all(&local.symbols, name) {
                        applied = Some((attempt, name.to_string()));
                        break;
                    }
                }
            }
            let (outcome, applied) = match applied {
                Some((0, name)) if predicted.is_some() => {
                    let outcome = if fallback.get(k) == Some(&true) { Outcome::Fallback } else { Outcome::Recovered };
                    (outcome, name)
                }
                Some((_, name)) => (Outcome::Alternate, name),
                None => (Outcome::Kept, local.name.clone()),
            };
            taken.insert(applied.clone());
            variables.push(VariableReport {
                variable: local.name.clone(),
                predicted,
                applied,
                outcome,
                alternatives: result.candidates[k]
                    .entries
                    .iter()
                    .take(REPORT_ALTERNATIVES)
                    .map(|c| AlternativeReport { name: index.name(c.name).to_string(), st: c.st, sc: c.sc, tc: c.tc })
                    .collect(),
            });
        }
        functions.push(FunctionReport {
            index: record.function_id,
            name: record.function_name.clone(),
            variables,
            assignments: result
                .ranked
                .iter()
                .take(REPORT_ALTERNATIVES)
                .map(|a| AssignmentReport { names: a.names.clone(), score: a.score })
                .collect(),
            elapsed_ms: timings.then_some(result.elapsed.as_secs_f64() * 1e3),
        });
    }
    Ok(FileRecovery {
        source: renamer.apply(),
        report: FileReport { path: path.to_string(), dynamic_scope: parsed.dynamic_scope, functions },
        results,
    })
}
